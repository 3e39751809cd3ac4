use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use nilgeom::config::{parse_config, parse_config_str};
use serde_json::Value;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn shipped(name: &str) -> String {
    configs().join(name).to_string_lossy().into_owned()
}

fn run(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_nilgeom"));
    cmd.args(args).env_remove("NILGEOM_THREADS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("spawn nilgeom")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8 stdout")
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).expect("utf-8 stderr")
}

fn scratch(name: &str, text: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("cli");
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

/// 1-based line and column of the first occurrence of `needle`.
fn position(text: &str, needle: &str) -> (usize, usize) {
    let at = text.find(needle).expect("needle present");
    let line = text[..at].matches('\n').count() + 1;
    let col = at - text[..at].rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, col)
}

const BAD_WEIGHT: &str = r#"points = [[0, 0]]

[structure]
variables = ["x", "y"]
nu = 2
depth = [1, 2]

[[structure.family]]
name = "horizontal"
weight = [1, 0]
fields = ["d/dx", "d/dy"]

[[structure.family]]
name = "vertical"
weight = [1]
fields = ["d/dx", "x*d/dy"]
"#;

// Five-dimensional Heisenberg: the central character has a four-dimensional orbit.
const H5: &str = r#"points = [[0, 0, 0, 0, 0]]

[structure]
variables = ["a", "b", "c", "d", "z"]
nu = 1
depth = [2]

[[structure.family]]
weight = [1]
fields = ["d/da", "d/db + a*d/dz", "d/dc", "d/dd + c*d/dz"]

[[generator]]
name = "X1"
weight = [1]
field = "d/da"

[[generator]]
name = "Y1"
weight = [1]
field = "d/db + a*d/dz"

[[generator]]
name = "X2"
weight = [1]
field = "d/dc"

[[generator]]
name = "Y2"
weight = [1]
field = "d/dd + c*d/dz"

[[generator]]
name = "Z"
weight = [2]
field = "d/dz"

[[covector]]
name = "central"
point = [0, 0, 0, 0, 0]
values = { Z = 1 }

[[operator]]
name = "L"
expression = "X1^2 + Y1^2 + X2^2 + Y2^2"
order = [2]

[numeric]
random_paths = 2
hermite_m = 16
eigenvalues = 2
"#;

#[test]
fn empty_config_is_rejected_with_location() {
    let err = parse_config_str("", "empty.toml").unwrap_err();
    assert_eq!(err.to_string(), "empty.toml:1:1: empty configuration");

    let p = scratch("empty.toml", "  \n");
    let o = run(&["filtration", p.to_str().unwrap()], &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("empty configuration"), "{}", stderr(&o));
}

#[test]
fn bad_weight_length_names_the_family_and_position() {
    let err = parse_config_str(BAD_WEIGHT, "bad.toml").unwrap_err();
    let (line, col) = position(BAD_WEIGHT, "[1]\nfields = [\"d/dx\", \"x*d/dy\"]");
    assert_eq!(err.line, line);
    assert_eq!(err.column, col);
    assert_eq!(
        err.to_string(),
        format!("bad.toml:{line}:{col}: vertical: weight has length 1, expected nu = 2")
    );

    let p = scratch("bad.toml", BAD_WEIGHT);
    let o = run(&["filtration", p.to_str().unwrap()], &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains(&format!(":{line}:{col}: vertical: weight has length 1")), "{}", stderr(&o));
}

#[test]
fn shipped_example_parses() {
    for (file, n) in [("example_n2.toml", 2usize), ("example_n3.toml", 3)] {
        let cfg = parse_config(&configs().join(file)).unwrap();
        assert_eq!(cfg.structure.families().len(), 2);
        assert_eq!(cfg.structure.depth().0, vec![1, n as u32]);
        assert_eq!(cfg.generators.len(), n + 3);
        assert_eq!(cfg.points.len(), 2);
        let d = cfg.find_operator("D").unwrap();
        assert_eq!(d.scan.as_ref().unwrap().values.len(), 31);
    }
}

#[test]
fn empty_results_print_csv_header_only() {
    let text = H5.split("[[covector]]").next().unwrap().to_string();
    let p = scratch("no_covectors.toml", &text);
    let o = run(&["rep", p.to_str().unwrap(), "--format", "csv"], &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o), "rep-id,point,k,element,dpi\n");

    let o = run(&["rep", p.to_str().unwrap(), "--format", "jsonl"], &[]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "");
}

#[test]
fn single_cone_record_has_four_keys_in_order() {
    let cfg = shipped("example_n2.toml");
    let o = run(&["cones", &cfg, "--point", "1,0", "--format", "jsonl"], &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert!(!lines.is_empty());
    for line in lines {
        assert!(line.starts_with("{\"point\":"), "{line}");
        let (p, c, b, m) = (line.find("\"point\"").unwrap(), line.find("\"codim\"").unwrap(), line.find("\"basis\"").unwrap(), line.find("\"match\"").unwrap());
        assert!(p < c && c < b && b < m);
        let v: Value = serde_json::from_str(line).unwrap();
        let keys: BTreeSet<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
        assert_eq!(keys, BTreeSet::from(["point", "codim", "basis", "match"]));
        assert_eq!(v["point"], serde_json::json!(["1", "0"]));
        // at a regular point the cone is a 2-plane in the 4-dimensional algebra
        assert_eq!(v["codim"], 2);
        let basis = v["basis"].as_array().unwrap();
        assert_eq!(basis.len(), 2);
        assert!(basis.iter().all(|b| b.as_array().unwrap().len() == 4));
    }
}

#[test]
fn jsonl_round_trips_and_carries_the_summary() {
    let cfg = shipped("example_n2.toml");
    let o = run(&["verdict", &cfg, "--format", "jsonl"], &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let values: Vec<Value> = out.lines().map(|l| serde_json::from_str(l).expect("valid json")).collect();
    let (summary, rows) = values.split_last().unwrap();
    assert_eq!(rows.len(), 31 * 4);
    for r in rows {
        let keys: Vec<&str> = r.as_object().unwrap().keys().map(String::as_str).collect();
        assert_eq!(keys.len(), 6);
        assert!(r["M"].as_u64() == Some(256));
    }
    assert_eq!(summary["aggregate"], "OBSTRUCTED");
    assert_eq!(summary["obstructions"], serde_json::json!(["1", "9", "25"]));

    // re-serializing each value and reparsing is the identity
    for (line, v) in out.lines().zip(&values) {
        let again: Value = serde_json::from_str(&serde_json::to_string(v).unwrap()).unwrap();
        assert_eq!(&again, v, "{line}");
    }
}

#[test]
fn csv_summary_goes_to_stderr() {
    let cfg = shipped("example_n2.toml");
    let o = run(&["spectrum", &cfg, "--format", "csv", "--param", "c=1"], &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.starts_with("rep-id,params,M,sigma_min,verdict,eigenvalues\n"), "{out}");
    assert!(!out.contains('#'));
    assert!(stderr(&o).contains("# aggregate=OBSTRUCTED"), "{}", stderr(&o));
}

#[test]
fn strict_exit_codes() {
    let p = scratch("h5.toml", H5);
    let p = p.to_str().unwrap();
    let o = run(&["spectrum", p, "--format", "jsonl"], &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("\"UNSUPPORTED\""), "{out}");
    assert!(out.contains("\"INCONCLUSIVE\""), "{out}");

    let o = run(&["spectrum", p, "--strict"], &[]);
    assert_eq!(o.status.code(), Some(2));

    // a conclusive aggregate leaves --strict at 0
    let cfg = shipped("heisenberg.toml");
    let o = run(&["verdict", &cfg, "--strict"], &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn thread_count_does_not_change_output() {
    let cfg = shipped("heisenberg.toml");
    let args = ["cones", cfg.as_str(), "--format", "jsonl", "--seed", "7"];
    let one = run(&args, &[("NILGEOM_THREADS", "1")]);
    let four = run(&args, &[("NILGEOM_THREADS", "4")]);
    assert!(one.status.success() && four.status.success());
    assert_eq!(one.stdout, four.stdout);

    let bad = run(&args, &[("NILGEOM_THREADS", "many")]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(stderr(&bad).contains("NILGEOM_THREADS"));
}

#[test]
fn default_config_is_the_depth_two_example() {
    let o = run(&["osculate", "--point", "0,0", "--format", "jsonl"], &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: Value = serde_json::from_str(stdout(&o).lines().next().unwrap()).unwrap();
    assert_eq!(v["dim"], 5);
}

#[test]
fn validate_passes_on_shipped_configs() {
    let names = ["example_n2.toml", "example_n3.toml", "heisenberg.toml"].map(shipped);
    let mut args = vec!["validate", "--format", "csv"];
    args.extend(names.iter().map(String::as_str));
    let o = run(&args, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(!stdout(&o).contains("FAIL"));
}

#[test]
fn bad_point_is_an_error() {
    let o = run(&["osculate", "--point", "1,zero"], &[]);
    assert_eq!(o.status.code(), Some(1));
}
