use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use nilgeom::cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    let mut out = std::io::BufWriter::new(stdout.lock());
    let mut err = stderr.lock();
    let status = match run(&cli, &mut out, &mut err) {
        Ok(s) => s,
        Err(e) => {
            let _ = out.flush();
            let _ = writeln!(err, "error: {e:#}");
            1
        }
    };
    let _ = out.flush();
    ExitCode::from(status as u8)
}
