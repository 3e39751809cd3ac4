//! Command-line interface: argument parsing and command dispatch.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use nilgeom_core::catalog::{identify_example, match_example_cone};
use nilgeom_core::grading::{build_graded_basis, GradedBasis};
use nilgeom_core::hncone::{hn_at_point, nonsingular_filter, ConeReport, ConeSampler, SampleParams, Strategy, TangentCone};
use nilgeom_core::linalg::QMatrix;
use nilgeom_core::orbit::{homomorphism_defects, rep_of_covector, Representation};
use nilgeom_core::osculating::{default_jet_order, osculating_algebra, OsculatingAlgebra};
use nilgeom_core::rational::{fmt_q, parse_q, Q};
use nilgeom_core::spectra::{analyse_symbol, summarize, Aggregate, Eigen, ScanRow, SpectralParams, SpectrumCache, Verdict};
use nilgeom_core::symbol::principal_symbol;
use num_traits::Zero;

use crate::config::{parse_config, parse_config_str, CovectorSpec, CovectorValues, OperatorSpec, RunConfig};
use crate::records::{emit, floats, fmt_float, rats, Format, Table, Val};

/// Configurations shipped with the tool, by file name.
pub const SHIPPED: [(&str, &str); 3] = [
    ("example_n2.toml", include_str!("../configs/example_n2.toml")),
    ("example_n3.toml", include_str!("../configs/example_n3.toml")),
    ("heisenberg.toml", include_str!("../configs/heisenberg.toml")),
];

#[derive(Parser, Debug)]
#[command(name = "nilgeom", version, about = "Osculating algebras, tangent cones, representations and symbols of weighted vector-field structures")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Seed for randomized cone sampling.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Exit with status 2 on INCONCLUSIVE or UNSTABLE aggregates.
    #[arg(long, global = true)]
    pub strict: bool,
    #[arg(long, global = true, value_enum, default_value = "table")]
    pub format: Format,
    /// Jet order for membership tests; overrides the config.
    #[arg(long, global = true)]
    pub jet_order: Option<u32>,
}

#[derive(Args, Debug, Clone)]
pub struct Source {
    /// Config file; defaults to the shipped depth-two example.
    pub config: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct Points {
    /// Point as comma-separated rationals, e.g. `0,0` or `1/2,3`; repeatable.
    /// Defaults to the config's points.
    #[arg(long = "point")]
    pub points: Vec<String>,
}

#[derive(Args, Debug, Clone)]
pub struct Spectral {
    /// Hermite truncation size (doubled for stabilization).
    #[arg(long)]
    pub m: Option<usize>,
    /// Injectivity margin for the smallest singular value.
    #[arg(long)]
    pub margin: Option<f64>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generated filtration atoms.
    Filtration(Source),
    /// Osculating algebra at each point.
    Osculate {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        points: Points,
    },
    /// Sampled tangent cones at each point.
    Cones {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        points: Points,
    },
    /// Covectors annihilating sampled cones, with their dilates.
    Hn {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        points: Points,
        /// Only nonsingular covectors.
        #[arg(long)]
        nonsingular: bool,
    },
    /// Induced representations of the configured covectors.
    Rep {
        #[command(flatten)]
        source: Source,
        /// Covector name; defaults to every configured covector.
        #[arg(long)]
        covector: Option<String>,
    },
    /// Principal symbols of operators under the configured representations.
    Symbol {
        #[command(flatten)]
        source: Source,
        /// Operator name; defaults to every configured operator.
        #[arg(long)]
        operator: Option<String>,
        /// Covector name; defaults to every configured covector.
        #[arg(long)]
        covector: Option<String>,
        /// Parameter override `name=value`; repeatable.
        #[arg(long = "param")]
        params: Vec<String>,
    },
    /// Low spectrum and injectivity of symbols at fixed parameters.
    Spectrum {
        #[command(flatten)]
        source: Source,
        /// Operator name; defaults to the first configured operator.
        #[arg(long)]
        operator: Option<String>,
        /// Covector name; defaults to every configured covector.
        #[arg(long)]
        covector: Option<String>,
        /// Parameter override `name=value`; repeatable.
        #[arg(long = "param")]
        params: Vec<String>,
        #[command(flatten)]
        spectral: Spectral,
    },
    /// Injectivity scan over an operator's parameter grid.
    Verdict {
        #[command(flatten)]
        source: Source,
        /// Operator name; defaults to the first operator with a scan grid.
        #[arg(long)]
        operator: Option<String>,
        #[command(flatten)]
        spectral: Spectral,
    },
    /// Consistency checks; without arguments, checks the shipped configs.
    Validate { configs: Vec<PathBuf> },
}

pub fn load(source: &Source) -> Result<RunConfig> {
    match &source.config {
        Some(p) => Ok(parse_config(p)?),
        None => Ok(parse_config_str(SHIPPED[0].1, SHIPPED[0].0)?),
    }
}

fn parse_point(s: &str) -> Result<Vec<Q>> {
    s.split(',')
        .map(|p| parse_q(p).ok_or_else(|| anyhow!("bad rational `{p}` in point `{s}`")))
        .collect()
}

fn select_points(cfg: &RunConfig, p: &Points) -> Result<Vec<Vec<Q>>> {
    let pts = if p.points.is_empty() {
        cfg.points.clone()
    } else {
        p.points.iter().map(|s| parse_point(s)).collect::<Result<Vec<_>>>()?
    };
    if pts.is_empty() {
        bail!("no points given in the config or with --point");
    }
    for x in &pts {
        if x.len() != cfg.structure.n_vars() {
            bail!("point has {} coordinates, expected {}", x.len(), cfg.structure.n_vars());
        }
    }
    Ok(pts)
}

fn parse_params(ps: &[String]) -> Result<Vec<(String, Q)>> {
    ps.iter()
        .map(|s| {
            let (k, v) = s.split_once('=').ok_or_else(|| anyhow!("expected name=value, got `{s}`"))?;
            let q = parse_q(v).ok_or_else(|| anyhow!("bad rational `{v}`"))?;
            Ok((k.trim().to_string(), q))
        })
        .collect()
}

/// Shared state of one invocation.
pub struct Session {
    pub cfg: RunConfig,
    pub basis: GradedBasis,
    pub jet_order: u32,
    pub seed: u64,
}

impl Session {
    pub fn new(cfg: RunConfig, jet_order: Option<u32>, seed: u64) -> Result<Self> {
        let basis = build_graded_basis(&cfg.structure, false)?;
        let jet_order = jet_order
            .or(cfg.numeric.jet_order)
            .unwrap_or_else(|| default_jet_order(&cfg.structure));
        Ok(Session {
            cfg,
            basis,
            jet_order,
            seed,
        })
    }

    /// `𝔤ₓ`, rebased on the generators when their classes form a basis.
    pub fn osculating(&self, x: &[Q]) -> Result<OsculatingAlgebra> {
        let osc = osculating_algebra(&self.cfg.structure, &self.basis, x, self.jet_order)?;
        let mut chosen = Vec::new();
        let mut cols: Vec<Vec<Q>> = Vec::new();
        for g in &self.cfg.generators {
            let c = osc.class_of(&g.field, &g.weight)?;
            if c.iter().all(Zero::is_zero) {
                continue;
            }
            let mut trial = cols.clone();
            trial.push(c);
            if QMatrix::from_rows(&trial).rank() == trial.len() {
                cols = trial;
                chosen.push((g.name.clone(), g.field.clone(), g.weight.clone()));
            }
        }
        if !chosen.is_empty() && chosen.len() == osc.dim() {
            if let Ok(r) = osc.rebase(&chosen) {
                return Ok(r);
            }
        }
        Ok(osc)
    }

    fn strategy_paths(&self) -> Vec<nilgeom_core::hncone::SamplingPath> {
        let s = &self.cfg.structure;
        let depth_max = s.depth().0.iter().copied().max().unwrap_or(1);
        let mut paths = Strategy::default_rays(depth_max).paths(s.nu(), s.n_vars());
        if self.cfg.numeric.random_paths > 0 {
            let r = Strategy::Random {
                seed: self.seed,
                paths: self.cfg.numeric.random_paths,
                max_exponent: depth_max + 1,
            };
            paths.extend(r.paths(s.nu(), s.n_vars()));
        }
        paths
    }

    fn sample_params(&self) -> SampleParams {
        let n = &self.cfg.numeric;
        SampleParams {
            start: n.sample_start,
            terms: n.sample_terms,
            tol: n.tolerance,
            bracket_tol: n.bracket_tolerance,
        }
    }

    pub fn cones(&self, osc: &OsculatingAlgebra) -> Result<ConeReport> {
        let sampler = ConeSampler::new(&self.basis, osc, self.sample_params());
        let outcomes = self
            .strategy_paths()
            .par_iter()
            .map(|p| sampler.sample(p))
            .collect::<nilgeom_core::Result<Vec<_>>>()?;
        Ok(sampler.merge(outcomes))
    }

    pub fn covector(&self, spec: &CovectorSpec, osc: &OsculatingAlgebra) -> Result<Vec<Q>> {
        let d = osc.dim();
        match &spec.values {
            CovectorValues::Positional(v) => {
                if v.len() != d {
                    bail!("{}: covector {} has {} entries, expected dim 𝔤ₓ = {d}", spec.location, spec.name, v.len());
                }
                Ok(v.clone())
            }
            CovectorValues::Named(m) => {
                let mut out = vec![Q::zero(); d];
                for (k, v) in m {
                    let i = osc
                        .names()
                        .iter()
                        .position(|n| n == k)
                        .ok_or_else(|| anyhow!("{}: covector {}: unresolved basis name `{k}` (basis {:?})", spec.location, spec.name, osc.names()))?;
                    out[i] = v.clone();
                }
                Ok(out)
            }
        }
    }

    /// Representations of the selected covectors with the algebra of their point.
    pub fn reps(&self, only: Option<&str>) -> Result<Vec<(String, OsculatingAlgebra, Representation)>> {
        let specs: Vec<&CovectorSpec> = self
            .cfg
            .covectors
            .iter()
            .filter(|c| only.is_none_or(|n| c.name == n))
            .collect();
        if let Some(n) = only {
            if specs.is_empty() {
                bail!("unknown covector `{n}`");
            }
        }
        let mut algebras: BTreeMap<Vec<Q>, OsculatingAlgebra> = BTreeMap::new();
        let mut out = Vec::new();
        for spec in specs {
            if !algebras.contains_key(&spec.point) {
                algebras.insert(spec.point.clone(), self.osculating(&spec.point)?);
            }
            let osc = algebras[&spec.point].clone();
            let xi = self.covector(spec, &osc)?;
            let rep = rep_of_covector(osc.algebra(), &xi).with_context(|| format!("covector {}", spec.name))?;
            out.push((spec.name.clone(), osc, rep));
        }
        Ok(out)
    }

    fn operators(&self, only: Option<&str>) -> Result<Vec<&OperatorSpec>> {
        match only {
            Some(n) => Ok(vec![self.cfg.find_operator(n).ok_or_else(|| anyhow!("unknown operator `{n}`"))?]),
            None => Ok(self.cfg.operators.iter().collect()),
        }
    }
}

fn element_text(v: &[Q], names: &[String]) -> String {
    let mut parts = Vec::new();
    for (c, n) in v.iter().zip(names) {
        if c.is_zero() {
            continue;
        }
        let one = Q::from_integer(1.into());
        let s = if *c == one {
            n.clone()
        } else if *c == -one {
            format!("-{n}")
        } else {
            format!("{}*{n}", fmt_q(c))
        };
        parts.push(s);
    }
    if parts.is_empty() {
        "0".to_string()
    } else {
        parts.join(" + ").replace("+ -", "- ")
    }
}

fn brackets(osc: &OsculatingAlgebra) -> Vec<String> {
    let a = osc.algebra();
    let names = osc.names();
    let mut out = Vec::new();
    for i in 0..a.dim() {
        for j in (i + 1)..a.dim() {
            let b = a.bracket(&a.basis_vector(i), &a.basis_vector(j)).expect("basis vectors");
            if b.iter().any(|c| !c.is_zero()) {
                out.push(format!("[{},{}] = {}", names[i], names[j], element_text(&b, names)));
            }
        }
    }
    out
}

fn eigen_val(e: &Eigen) -> Val {
    let z = e.value;
    if z.im.abs() <= 1e-9 * z.re.abs().max(1.0) {
        Val::Float(z.re)
    } else {
        let re = fmt_float(z.re).unwrap_or_else(|| "nan".into());
        let im = fmt_float(z.im.abs()).unwrap_or_else(|| "nan".into());
        Val::Str(format!("{re}{}{im}i", if z.im < 0.0 { "-" } else { "+" }))
    }
}

fn params_val(p: &[(String, Q)]) -> Val {
    Val::List(p.iter().map(|(k, v)| Val::Str(format!("{k}={}", fmt_q(v)))).collect())
}

fn cmd_filtration(s: &Session) -> Table {
    let mut t = Table::new(&["label", "weight", "field"]);
    for a in s.cfg.structure.atoms() {
        t.push(vec![a.label.clone().into(), a.weight.to_string().into(), a.field.display(s.cfg.structure.vars()).into()]);
    }
    t
}

fn cmd_osculate(s: &Session, pts: &[Vec<Q>]) -> Result<Table> {
    let mut t = Table::new(&["point", "dim", "basis", "weights", "brackets"]);
    let algs = pts.par_iter().map(|x| s.osculating(x)).collect::<Result<Vec<_>>>()?;
    for (x, osc) in pts.iter().zip(&algs) {
        let weights: Vec<Val> = (0..osc.dim()).map(|i| osc.algebra().weight(i).to_string().into()).collect();
        t.push(vec![
            rats(x),
            osc.dim().into(),
            Val::List(osc.names().iter().map(|n| n.as_str().into()).collect()),
            Val::List(weights),
            Val::List(brackets(osc).into_iter().map(Val::Str).collect()),
        ]);
    }
    Ok(t)
}

fn cone_match(s: &Session, x: &[Q], c: &TangentCone) -> Result<Val> {
    let Some(n) = identify_example(&s.cfg.structure) else {
        return Ok(Val::Null);
    };
    Ok(match match_example_cone(n, x, &c.subspace, s.cfg.numeric.catalog_tolerance)? {
        None => Val::Null,
        Some(m) => {
            let ps: Vec<String> = m.params.iter().map(|&p| fmt_float(if p.abs() < SNAP { 0.0 } else { p }).unwrap_or_default()).collect();
            Val::Str(format!("{}({})", m.family.name(), ps.join(",")))
        }
    })
}

/// Floating output below this magnitude is round-off from orthonormalization.
const SNAP: f64 = 1e-10;

fn snapped(v: &[f64]) -> Val {
    let v: Vec<f64> = v.iter().map(|&x| if x.abs() < SNAP { 0.0 } else { x }).collect();
    floats(&v)
}

fn basis_val(c: &TangentCone) -> Val {
    let b = c.subspace.float_basis();
    Val::List((0..b.ncols()).map(|j| snapped(b.column(j).as_slice())).collect())
}

fn cmd_cones(s: &Session, pts: &[Vec<Q>]) -> Result<Table> {
    let mut t = Table::new(&["point", "codim", "basis", "match"]);
    for x in pts {
        let osc = s.osculating(x)?;
        let rep = s.cones(&osc)?;
        for c in &rep.cones {
            t.push(vec![rats(x), c.codim.into(), basis_val(c), cone_match(s, x, c)?]);
        }
    }
    Ok(t)
}

fn cmd_hn(s: &Session, pts: &[Vec<Q>], only_nonsingular: bool) -> Result<Table> {
    let mut t = Table::new(&["point", "covector", "cone", "nonsingular"]);
    for x in pts {
        let osc = s.osculating(x)?;
        let rep = s.cones(&osc)?;
        if rep.cones.is_empty() {
            continue;
        }
        let h = hn_at_point(&osc, &rep.cones, &s.cfg.numeric.hn_dilations, &[])?;
        let ns = nonsingular_filter(&osc, &h, s.cfg.numeric.nonsingular_threshold).ok();
        for c in &h.covectors {
            let nonsing = ns.as_ref().map(|n| n.covectors.iter().any(|d| d.coords == c.coords));
            if only_nonsingular && nonsing != Some(true) {
                continue;
            }
            t.push(vec![
                rats(x),
                snapped(&c.coords),
                c.source.map_or(Val::Null, Val::from),
                nonsing.map_or(Val::Null, Val::from),
            ]);
        }
    }
    Ok(t)
}

fn cmd_rep(s: &Session, only: Option<&str>) -> Result<Table> {
    let mut t = Table::new(&["rep-id", "point", "k", "element", "dpi"]);
    for (id, osc, rep) in s.reps(only)? {
        for (i, d) in rep.dpi.iter().enumerate() {
            t.push(vec![id.clone().into(), rats(osc.point()), rep.k.into(), osc.names()[i].clone().into(), d.display().into()]);
        }
    }
    Ok(t)
}

fn cmd_symbol(s: &Session, op: Option<&str>, cov: Option<&str>, overrides: &[(String, Q)]) -> Result<Table> {
    let mut t = Table::new(&["operator", "rep-id", "params", "order", "symbol"]);
    let reps = s.reps(cov)?;
    for spec in s.operators(op)? {
        let p = s.cfg.operator(spec, overrides)?;
        let params = merged(&spec.params, overrides);
        for (id, osc, rep) in &reps {
            let sym = principal_symbol(&p, rep, osc)?;
            t.push(vec![spec.name.clone().into(), id.clone().into(), params_val(&params), spec.order.to_string().into(), sym.display().into()]);
        }
    }
    Ok(t)
}

fn merged(base: &[(String, Q)], overrides: &[(String, Q)]) -> Vec<(String, Q)> {
    let mut p = base.to_vec();
    for (k, v) in overrides {
        match p.iter_mut().find(|(n, _)| n == k) {
            Some(slot) => slot.1 = v.clone(),
            None => p.push((k.clone(), v.clone())),
        }
    }
    p
}

fn spectral_params(s: &Session, sp: &Spectral) -> SpectralParams {
    SpectralParams {
        m: sp.m.unwrap_or(s.cfg.numeric.hermite_m),
        margin: sp.margin.unwrap_or(s.cfg.numeric.margin),
        count: s.cfg.numeric.eigenvalues,
    }
}

const SCAN_COLUMNS: [&str; 6] = ["rep-id", "params", "M", "sigma_min", "verdict", "eigenvalues"];

fn scan_row_vals(r: &ScanRow, params: &[(String, Q)]) -> Vec<Val> {
    vec![
        r.rep_id.clone().into(),
        params_val(params),
        r.m.into(),
        r.sigma_min.map_or(Val::Null, Val::Float),
        r.verdict.name().into(),
        Val::List(r.eigenvalues.iter().map(eigen_val).collect()),
    ]
}

/// Scan rows for every representation over `grid`, one spectrum cache per
/// representation, merged in grid order.
fn scan(
    s: &Session,
    spec: &OperatorSpec,
    reps: &[(String, OsculatingAlgebra, Representation)],
    grid: &[Vec<(String, Q)>],
    params: &SpectralParams,
) -> Result<Vec<Vec<ScanRow>>> {
    let ops = grid
        .iter()
        .map(|p| s.cfg.operator(spec, p))
        .collect::<nilgeom_core::Result<Vec<_>>>()?;
    let per_rep = reps
        .par_iter()
        .map(|(id, osc, rep)| {
            let mut cache = SpectrumCache::default();
            ops.iter()
                .map(|op| {
                    let sym = principal_symbol(op, rep, osc)?;
                    let (verdict, sigma_min, eigenvalues) = analyse_symbol(&sym, params, &mut cache)?;
                    Ok(ScanRow {
                        rep_id: id.clone(),
                        param: Q::zero(),
                        k: rep.k,
                        m: params.m,
                        sigma_min,
                        verdict,
                        eigenvalues,
                        symbol: sym,
                    })
                })
                .collect::<nilgeom_core::Result<Vec<_>>>()
        })
        .collect::<nilgeom_core::Result<Vec<_>>>()?;
    Ok((0..grid.len())
        .map(|g| per_rep.iter().map(|rows| rows[g].clone()).collect())
        .collect())
}

fn cmd_spectrum(s: &Session, op: Option<&str>, cov: Option<&str>, overrides: &[(String, Q)], sp: &Spectral) -> Result<(Table, bool)> {
    let mut t = Table::new(&SCAN_COLUMNS);
    let reps = s.reps(cov)?;
    let params = spectral_params(s, sp);
    let mut verdicts = Vec::new();
    // one operator per table: rows carry no operator column
    let spec = match op {
        Some(n) => s.cfg.find_operator(n).ok_or_else(|| anyhow!("unknown operator `{n}`"))?,
        None => s.cfg.operators.first().ok_or_else(|| anyhow!("configuration defines no operator"))?,
    };
    {
        let p = merged(&spec.params, overrides);
        let rows = scan(s, spec, &reps, std::slice::from_ref(&p), &params)?;
        for r in &rows[0] {
            verdicts.push(r.verdict);
            t.push(scan_row_vals(r, &p));
        }
    }
    let agg = if verdicts.iter().any(|v| v.is_obstruction()) {
        Aggregate::Obstructed
    } else if verdicts.iter().any(|v| v.is_inconclusive()) {
        Aggregate::Inconclusive
    } else {
        Aggregate::Hypoelliptic
    };
    let unstable = verdicts.contains(&Verdict::Unstable);
    t.summary = Some(vec![("aggregate", agg.name().into()), ("rows", verdicts.len().into())]);
    Ok((t, agg == Aggregate::Inconclusive || unstable))
}

fn cmd_verdict(s: &Session, op: Option<&str>, sp: &Spectral) -> Result<(Table, bool)> {
    let spec = match op {
        Some(n) => s.cfg.find_operator(n).ok_or_else(|| anyhow!("unknown operator `{n}`"))?,
        None => s
            .cfg
            .operators
            .iter()
            .find(|o| o.scan.is_some())
            .ok_or_else(|| anyhow!("no operator with a scan grid"))?,
    };
    let scan_spec = spec.scan.as_ref().ok_or_else(|| anyhow!("operator {} has no scan grid", spec.name))?;
    let reps = s.reps(None)?;
    let params = spectral_params(s, sp);
    let grid: Vec<Vec<(String, Q)>> = scan_spec
        .values
        .iter()
        .map(|v| merged(&spec.params, &[(scan_spec.param.clone(), v.clone())]))
        .collect();
    let rows = scan(s, spec, &reps, &grid, &params)?;
    let mut t = Table::new(&SCAN_COLUMNS);
    let mut flat = Vec::new();
    for ((v, p), rs) in scan_spec.values.iter().zip(&grid).zip(rows) {
        for mut r in rs {
            t.push(scan_row_vals(&r, p));
            r.param = v.clone();
            flat.push(r);
        }
    }
    let report = summarize(flat, &scan_spec.values);
    let unstable = report.rows.iter().any(|r| r.verdict == Verdict::Unstable);
    t.summary = Some(vec![
        ("operator", spec.name.clone().into()),
        ("param", scan_spec.param.clone().into()),
        ("aggregate", report.aggregate.name().into()),
        ("obstructions", rats(&report.obstructions)),
    ]);
    Ok((t, report.aggregate == Aggregate::Inconclusive || unstable))
}

fn validate_one(name: &str, parsed: std::result::Result<RunConfig, crate::config::ConfigError>, jet: Option<u32>, seed: u64, t: &mut Table) -> bool {
    let mut ok = true;
    let mut push = |t: &mut Table, check: &str, subject: String, pass: bool, detail: String| {
        ok &= pass;
        t.push(vec![name.into(), check.into(), subject.into(), if pass { "PASS" } else { "FAIL" }.into(), detail.into()]);
    };
    let cfg = match parsed {
        Ok(c) => c,
        Err(e) => {
            push(t, "parse", String::new(), false, e.to_string());
            return false;
        }
    };
    push(t, "parse", String::new(), true, String::new());
    let s = match Session::new(cfg, jet, seed) {
        Ok(s) => s,
        Err(e) => {
            push(t, "basis", String::new(), false, e.to_string());
            return false;
        }
    };
    for x in &s.cfg.points {
        let subject = format!("({})", x.iter().map(fmt_q).collect::<Vec<_>>().join(","));
        match s.osculating(x) {
            Ok(osc) => {
                let v = osc.algebra().validate();
                push(t, "lie-algebra", subject, v.is_empty(), if v.is_empty() { format!("dim {}", osc.dim()) } else { format!("{v:?}") });
            }
            Err(e) => push(t, "lie-algebra", subject, false, e.to_string()),
        }
    }
    match s.reps(None) {
        Ok(reps) => {
            for (id, osc, rep) in reps {
                let defects = homomorphism_defects(osc.algebra(), &rep);
                let skew = rep.dpi.iter().all(|d| d.adjoint() == d.neg());
                push(
                    t,
                    "homomorphism",
                    id,
                    defects.is_empty() && skew,
                    format!("k = {}, defects {:?}, skew {}", rep.k, defects, skew),
                );
            }
        }
        Err(e) => push(t, "homomorphism", String::new(), false, format!("{e:#}")),
    }
    for op in &s.cfg.operators {
        let r = s.cfg.operator(op, &[]);
        push(t, "operator", op.name.clone(), r.is_ok(), r.err().map(|e| e.to_string()).unwrap_or_default());
    }
    ok
}

fn cmd_validate(configs: &[PathBuf], jet: Option<u32>, seed: u64) -> (Table, bool) {
    let mut t = Table::new(&["config", "check", "subject", "status", "detail"]);
    let mut ok = true;
    if configs.is_empty() {
        for (name, text) in SHIPPED {
            ok &= validate_one(name, parse_config_str(text, name), jet, seed, &mut t);
        }
    } else {
        for p in configs {
            ok &= validate_one(&p.display().to_string(), parse_config(p), jet, seed, &mut t);
        }
    }
    t.summary = Some(vec![("aggregate", if ok { "PASS" } else { "FAIL" }.into())]);
    (t, ok)
}

/// Runs a parsed command, writing records to `out` (and csv summaries to
/// `err`). Returns the exit status.
pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let threads = std::env::var("NILGEOM_THREADS")
        .ok()
        .map(|v| v.parse::<usize>().with_context(|| format!("NILGEOM_THREADS = `{v}`")))
        .transpose()?
        .unwrap_or(0);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build()?;
    let (table, status) = pool.install(|| dispatch(cli))?;
    emit(&table, cli.format, out, err)?;
    Ok(status)
}

fn dispatch(cli: &Cli) -> Result<(Table, i32)> {
    let session = |src: &Source| Session::new(load(src)?, cli.jet_order, cli.seed);
    let (table, status) = match &cli.command {
        Command::Filtration(src) => (cmd_filtration(&session(src)?), 0),
        Command::Osculate { source, points } => {
            let s = session(source)?;
            (cmd_osculate(&s, &select_points(&s.cfg, points)?)?, 0)
        }
        Command::Cones { source, points } => {
            let s = session(source)?;
            (cmd_cones(&s, &select_points(&s.cfg, points)?)?, 0)
        }
        Command::Hn { source, points, nonsingular } => {
            let s = session(source)?;
            (cmd_hn(&s, &select_points(&s.cfg, points)?, *nonsingular)?, 0)
        }
        Command::Rep { source, covector } => (cmd_rep(&session(source)?, covector.as_deref())?, 0),
        Command::Symbol { source, operator, covector, params } => {
            let s = session(source)?;
            (cmd_symbol(&s, operator.as_deref(), covector.as_deref(), &parse_params(params)?)?, 0)
        }
        Command::Spectrum { source, operator, covector, params, spectral } => {
            let s = session(source)?;
            let (t, weak) = cmd_spectrum(&s, operator.as_deref(), covector.as_deref(), &parse_params(params)?, spectral)?;
            (t, if weak && cli.strict { 2 } else { 0 })
        }
        Command::Verdict { source, operator, spectral } => {
            let s = session(source)?;
            let (t, weak) = cmd_verdict(&s, operator.as_deref(), spectral)?;
            (t, if weak && cli.strict { 2 } else { 0 })
        }
        Command::Validate { configs } => {
            let (t, ok) = cmd_validate(configs, cli.jet_order, cli.seed);
            (t, if ok { 0 } else { 1 })
        }
    };
    Ok((table, status))
}
