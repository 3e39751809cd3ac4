//! Run configuration: a TOML document declaring a weighted structure, points,
//! covectors, operators and numeric knobs.
//!
//! ```toml
//! points = [[0, 0], [1, 0]]             # top level; before any table
//!
//! [structure]
//! variables = ["x", "y"]
//! nu = 2
//! depth = [1, 2]
//!
//! [[structure.family]]
//! weight = [1, 0]
//! fields = ["d/dx", "d/dy"]
//!
//! [[generator]]
//! name = "X1"
//! weight = [1, 0]
//! field = "d/dx"
//!
//! [[covector]]
//! name = "pi3"
//! point = [0, 0]
//! values = { X2 = 1, Z2 = 1 }          # or a positional list
//!
//! [[operator]]
//! name = "D"
//! expression = "(X1^2 + X2^2)*(Y^2 + Z1^2)^2 + c*Z2^2*X2^2"
//! order = [2, 4]
//! params = { c = 0 }
//! scan = { param = "c", from = 0, to = 30, step = 1 }
//! ```
//!
//! Rationals are integers or strings `"p/q"`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Range;
use std::path::Path;

use nilgeom_core::field::parse_field;
use nilgeom_core::grading::{generate_filtration, Family, GradedStructure};
use nilgeom_core::rational::{parse_q, Q};
use nilgeom_core::symbol::{parse_operator, Generator, WeightedOperator};
use nilgeom_core::WeightVector;
use num_traits::Zero;
use serde::Deserialize;
use toml::Spanned;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub source_name: String,
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}: {}", self.source_name, self.line, self.column, self.message)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Deserialize, Clone, Debug)]
#[serde(untagged)]
enum RatLit {
    Int(i64),
    Str(String),
}

#[derive(Deserialize)]
#[serde(untagged)]
// spans do not survive untagged buffering; errors point at the whole table
enum Values {
    List(Vec<RatLit>),
    Named(BTreeMap<String, RatLit>),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFamily {
    name: Option<String>,
    weight: Spanned<Vec<u32>>,
    fields: Vec<Spanned<String>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStructure {
    variables: Spanned<Vec<String>>,
    nu: Spanned<usize>,
    depth: Spanned<Vec<u32>>,
    #[serde(default)]
    family: Vec<Spanned<RawFamily>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGenerator {
    name: Spanned<String>,
    weight: Spanned<Vec<u32>>,
    field: Spanned<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCovector {
    name: Spanned<String>,
    point: Spanned<Vec<Spanned<RatLit>>>,
    values: Spanned<Values>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScan {
    param: Spanned<String>,
    from: Spanned<RatLit>,
    to: Spanned<RatLit>,
    step: Spanned<RatLit>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOperator {
    name: Spanned<String>,
    expression: Spanned<String>,
    order: Spanned<Vec<u32>>,
    #[serde(default)]
    params: BTreeMap<String, Spanned<RatLit>>,
    scan: Option<Spanned<RawScan>>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawNumeric {
    jet_order: Option<u32>,
    sample_start: Option<u32>,
    sample_terms: Option<u32>,
    random_paths: Option<usize>,
    tolerance: Option<f64>,
    bracket_tolerance: Option<f64>,
    catalog_tolerance: Option<f64>,
    hermite_m: Option<usize>,
    margin: Option<f64>,
    eigenvalues: Option<usize>,
    hn_dilations: Option<Vec<Vec<Spanned<RatLit>>>>,
    nonsingular_threshold: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default)]
    points: Vec<Spanned<Vec<Spanned<RatLit>>>>,
    structure: Spanned<RawStructure>,
    #[serde(default)]
    generator: Vec<RawGenerator>,
    #[serde(default)]
    covector: Vec<RawCovector>,
    #[serde(default)]
    operator: Vec<RawOperator>,
    #[serde(default)]
    numeric: RawNumeric,
}

#[derive(Clone, Debug)]
pub enum CovectorValues {
    /// Coordinates in the named osculating basis at the point.
    Positional(Vec<Q>),
    /// Basis name to coordinate; missing names are zero.
    Named(Vec<(String, Q)>),
}

#[derive(Clone, Debug)]
pub struct CovectorSpec {
    pub name: String,
    pub point: Vec<Q>,
    pub values: CovectorValues,
    /// `line:column` of the entry, for errors raised after parsing.
    pub location: String,
}

#[derive(Clone, Debug)]
pub struct Scan {
    pub param: String,
    pub values: Vec<Q>,
}

#[derive(Clone, Debug)]
pub struct OperatorSpec {
    pub name: String,
    pub expression: String,
    pub order: WeightVector,
    pub params: Vec<(String, Q)>,
    pub scan: Option<Scan>,
}

#[derive(Clone, Debug)]
pub struct Numeric {
    pub jet_order: Option<u32>,
    pub sample_start: u32,
    pub sample_terms: u32,
    pub random_paths: usize,
    pub tolerance: f64,
    pub bracket_tolerance: f64,
    pub catalog_tolerance: f64,
    pub hermite_m: usize,
    pub margin: f64,
    pub eigenvalues: usize,
    pub hn_dilations: Vec<Vec<Q>>,
    pub nonsingular_threshold: f64,
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub source_name: String,
    pub structure: GradedStructure,
    pub generators: Vec<Generator>,
    pub points: Vec<Vec<Q>>,
    pub covectors: Vec<CovectorSpec>,
    pub operators: Vec<OperatorSpec>,
    pub numeric: Numeric,
}

impl RunConfig {
    /// The operator with scan parameter (if any) set to `value`.
    pub fn operator(&self, op: &OperatorSpec, overrides: &[(String, Q)]) -> nilgeom_core::Result<WeightedOperator> {
        let mut params = op.params.clone();
        for (k, v) in overrides {
            match params.iter_mut().find(|(n, _)| n == k) {
                Some(slot) => slot.1 = v.clone(),
                None => params.push((k.clone(), v.clone())),
            }
        }
        parse_operator(&op.expression, self.generators.clone(), self.structure.vars(), &params, op.order.clone())
    }

    pub fn find_operator(&self, name: &str) -> Option<&OperatorSpec> {
        self.operators.iter().find(|o| o.name == name)
    }
}

struct Ctx<'a> {
    name: &'a str,
    text: &'a str,
}

impl Ctx<'_> {
    fn at(&self, span: Range<usize>, message: impl Into<String>) -> ConfigError {
        let (line, column) = line_col(self.text, span.start);
        ConfigError {
            source_name: self.name.to_string(),
            line,
            column,
            message: message.into(),
        }
    }

    fn location(&self, span: Range<usize>) -> String {
        let (l, c) = line_col(self.text, span.start);
        format!("{}:{l}:{c}", self.name)
    }

    fn rat(&self, v: &Spanned<RatLit>) -> Result<Q, ConfigError> {
        self.rat_at(v.span(), v.get_ref())
    }

    fn rat_at(&self, span: Range<usize>, v: &RatLit) -> Result<Q, ConfigError> {
        let parsed = match v {
            RatLit::Int(i) => Some(Q::from_integer((*i).into())),
            RatLit::Str(s) => parse_q(s),
        };
        parsed.ok_or_else(|| self.at(span, "expected a rational `p` or `p/q`"))
    }

    fn rats(&self, v: &[Spanned<RatLit>]) -> Result<Vec<Q>, ConfigError> {
        v.iter().map(|x| self.rat(x)).collect()
    }
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

pub fn parse_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let name = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
        source_name: name.clone(),
        line: 0,
        column: 0,
        message: format!("cannot read: {e}"),
    })?;
    parse_config_str(&text, &name)
}

pub fn parse_config_str(text: &str, source_name: &str) -> Result<RunConfig, ConfigError> {
    let ctx = Ctx { name: source_name, text };
    if text.trim().is_empty() {
        return Err(ctx.at(0..0, "empty configuration"));
    }
    let raw: RawConfig = toml::from_str(text).map_err(|e| {
        let span = e.span().unwrap_or(0..0);
        ctx.at(span, e.message().to_string())
    })?;

    let st = raw.structure.get_ref();
    let nu = *st.nu.get_ref();
    if nu == 0 {
        return Err(ctx.at(st.nu.span(), "nu must be positive"));
    }
    if st.depth.get_ref().len() != nu {
        return Err(ctx.at(st.depth.span(), format!("depth has length {}, expected nu = {nu}", st.depth.get_ref().len())));
    }
    if st.depth.get_ref().iter().any(|&d| d == 0) {
        return Err(ctx.at(st.depth.span(), "depth entries must be positive"));
    }
    let vars = st.variables.get_ref().clone();
    if vars.is_empty() {
        return Err(ctx.at(st.variables.span(), "no variables declared"));
    }
    if st.family.is_empty() {
        return Err(ctx.at(raw.structure.span(), "no [[structure.family]] declared"));
    }
    let mut families = Vec::new();
    for (i, f) in st.family.iter().enumerate() {
        let fr = f.get_ref();
        let label = fr.name.clone().unwrap_or_else(|| format!("family {}", i + 1));
        if fr.weight.get_ref().len() != nu {
            return Err(ctx.at(
                fr.weight.span(),
                format!("{label}: weight has length {}, expected nu = {nu}", fr.weight.get_ref().len()),
            ));
        }
        let mut fields = Vec::new();
        for fs in &fr.fields {
            fields.push(parse_field(fs.get_ref(), &vars).map_err(|e| ctx.at(fs.span(), format!("{label}: {e}")))?);
        }
        families.push(Family {
            weight: WeightVector(fr.weight.get_ref().clone()),
            fields,
        });
    }
    let structure = generate_filtration(vars.clone(), families, WeightVector(st.depth.get_ref().clone()))
        .map_err(|e| ctx.at(raw.structure.span(), e.to_string()))?;

    let mut generators: Vec<Generator> = Vec::new();
    for g in &raw.generator {
        let name = g.name.get_ref().clone();
        if generators.iter().any(|h| h.name == name) {
            return Err(ctx.at(g.name.span(), format!("duplicate generator `{name}`")));
        }
        if g.weight.get_ref().len() != nu {
            return Err(ctx.at(
                g.weight.span(),
                format!("generator {name}: weight has length {}, expected nu = {nu}", g.weight.get_ref().len()),
            ));
        }
        let field = parse_field(g.field.get_ref(), &vars).map_err(|e| ctx.at(g.field.span(), format!("generator {name}: {e}")))?;
        generators.push(Generator {
            name,
            weight: WeightVector(g.weight.get_ref().clone()),
            field,
        });
    }

    let point = |p: &Spanned<Vec<Spanned<RatLit>>>| -> Result<Vec<Q>, ConfigError> {
        let v = ctx.rats(p.get_ref())?;
        if v.len() != vars.len() {
            return Err(ctx.at(p.span(), format!("point has {} coordinates, expected {}", v.len(), vars.len())));
        }
        Ok(v)
    };
    let points = raw.points.iter().map(point).collect::<Result<Vec<_>, _>>()?;

    let mut covectors: Vec<CovectorSpec> = Vec::new();
    for c in &raw.covector {
        let name = c.name.get_ref().clone();
        if covectors.iter().any(|d| d.name == name) {
            return Err(ctx.at(c.name.span(), format!("duplicate covector `{name}`")));
        }
        let values = match c.values.get_ref() {
            Values::List(v) => CovectorValues::Positional(
                v.iter()
                    .map(|x| ctx.rat_at(c.values.span(), x))
                    .collect::<Result<Vec<_>, ConfigError>>()?,
            ),
            Values::Named(m) => CovectorValues::Named(
                m.iter()
                    .map(|(k, v)| Ok((k.clone(), ctx.rat_at(c.values.span(), v)?)))
                    .collect::<Result<Vec<_>, ConfigError>>()?,
            ),
        };
        covectors.push(CovectorSpec {
            name,
            point: point(&c.point)?,
            values,
            location: ctx.location(c.name.span()),
        });
    }

    let mut operators: Vec<OperatorSpec> = Vec::new();
    for o in &raw.operator {
        let name = o.name.get_ref().clone();
        if operators.iter().any(|p| p.name == name) {
            return Err(ctx.at(o.name.span(), format!("duplicate operator `{name}`")));
        }
        if o.order.get_ref().len() != nu {
            return Err(ctx.at(
                o.order.span(),
                format!("operator {name}: order has length {}, expected nu = {nu}", o.order.get_ref().len()),
            ));
        }
        let mut params = Vec::new();
        for (k, v) in &o.params {
            params.push((k.clone(), ctx.rat(v)?));
        }
        let scan = match &o.scan {
            None => None,
            Some(s) => {
                let sr = s.get_ref();
                let (from, to, step) = (ctx.rat(&sr.from)?, ctx.rat(&sr.to)?, ctx.rat(&sr.step)?);
                if step <= Q::zero() || to < from {
                    return Err(ctx.at(s.span(), "scan needs from ≤ to and a positive step"));
                }
                let mut values = Vec::new();
                let mut v = from;
                while v <= to {
                    values.push(v.clone());
                    v += &step;
                    if values.len() > 100_000 {
                        return Err(ctx.at(s.span(), "scan grid exceeds 100000 values"));
                    }
                }
                if !params.iter().any(|(k, _)| k == sr.param.get_ref()) {
                    params.push((sr.param.get_ref().clone(), values[0].clone()));
                }
                Some(Scan {
                    param: sr.param.get_ref().clone(),
                    values,
                })
            }
        };
        let spec = OperatorSpec {
            name: name.clone(),
            expression: o.expression.get_ref().clone(),
            order: WeightVector(o.order.get_ref().clone()),
            params,
            scan,
        };
        parse_operator(&spec.expression, generators.clone(), &vars, &spec.params, spec.order.clone())
            .map_err(|e| ctx.at(o.expression.span(), format!("operator {name}: {e}")))?;
        operators.push(spec);
    }

    let n = &raw.numeric;
    let hn_dilations = match &n.hn_dilations {
        None => Vec::new(),
        Some(ds) => ds
            .iter()
            .map(|d| {
                let v = ctx.rats(d)?;
                if v.len() != nu || v.iter().any(|x| *x <= Q::zero()) {
                    let span = d.first().map_or(0..0, |x| x.span());
                    return Err(ctx.at(span, format!("hn dilation needs {nu} positive entries")));
                }
                Ok(v)
            })
            .collect::<Result<Vec<_>, _>>()?,
    };
    let numeric = Numeric {
        jet_order: n.jet_order,
        sample_start: n.sample_start.unwrap_or(24),
        sample_terms: n.sample_terms.unwrap_or(24),
        random_paths: n.random_paths.unwrap_or(0),
        tolerance: n.tolerance.unwrap_or(1e-6),
        bracket_tolerance: n.bracket_tolerance.unwrap_or(1e-8),
        catalog_tolerance: n.catalog_tolerance.unwrap_or(1e-6),
        hermite_m: n.hermite_m.unwrap_or(nilgeom_core::spectra::DEFAULT_M),
        margin: n.margin.unwrap_or(nilgeom_core::spectra::DEFAULT_MARGIN),
        eigenvalues: n.eigenvalues.unwrap_or(6),
        hn_dilations,
        nonsingular_threshold: n.nonsingular_threshold.unwrap_or(1e-6),
    };

    Ok(RunConfig {
        source_name: source_name.to_string(),
        structure,
        generators,
        points,
        covectors,
        operators,
        numeric,
    })
}
