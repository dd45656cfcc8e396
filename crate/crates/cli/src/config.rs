//! Flat `section.key = value` configuration files.
//!
//! Every key has a default; a file overrides any subset of them. Unknown or
//! repeated keys and malformed values are parse errors.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use frns_core::model::{ModelConfig, NonlinearitySpec, PotentialShape, PotentialSpec, Region};
use frns_core::{FracParams, Grid, Point, Tolerances};
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Real,
    Count,
    Word(&'static [&'static str]),
    Points,
    Reals,
}

struct Key {
    name: &'static str,
    kind: Kind,
    default: &'static str,
    /// Excluded from the config hash (does not affect results).
    hashed: bool,
}

const fn key(name: &'static str, kind: Kind, default: &'static str) -> Key {
    Key {
        name,
        kind,
        default,
        hashed: true,
    }
}

const KEYS: &[Key] = &[
    key("frac.s", Kind::Real, "0.5"),
    key("frac.m", Kind::Real, "1"),
    key("frac.N", Kind::Count, "2"),
    key("grid.points", Kind::Count, "128"),
    key("grid.half_length", Kind::Real, "8"),
    key("potential.shape", Kind::Word(&["wells", "constant"]), "wells"),
    key("potential.V0", Kind::Real, "0.2"),
    key("potential.V1", Kind::Real, "0.2"),
    key("potential.top", Kind::Real, "0.5"),
    key("potential.width", Kind::Real, "0.5"),
    key("potential.M", Kind::Points, "0,0"),
    key("lambda.shape", Kind::Word(&["balls", "boxes", "everywhere"]), "balls"),
    key("lambda.centers", Kind::Points, "0,0"),
    key("lambda.radius", Kind::Real, "1"),
    key("nonlin.lambda", Kind::Real, "3"),
    key("nonlin.p", Kind::Real, "3"),
    key("nonlin.q", Kind::Real, "3.5"),
    key("nonlin.theta", Kind::Real, "3"),
    key("pen.kappa", Kind::Real, "10"),
    key("model.eps", Kind::Real, "0.25"),
    key("solver.grad_tol", Kind::Real, "1e-6"),
    key("solver.nehari_tol", Kind::Real, "1e-10"),
    key("solver.max_iterations", Kind::Count, "20000"),
    key("solver.restarts", Kind::Count, "3"),
    key("solver.seed", Kind::Count, "0"),
    key("sweep.eps", Kind::Reals, "0.5, 0.25, 0.1"),
    key("sstar.points", Kind::Count, "0"),
    key("sstar.half_length", Kind::Real, "1"),
    Key {
        name: "run.jobs",
        kind: Kind::Count,
        default: "0",
        hashed: false,
    },
];

#[derive(Debug, Clone, PartialEq)]
enum Value {
    Real(f64),
    Count(u64),
    Word(String),
    Points(Vec<Point>),
    Reals(Vec<f64>),
}

impl Value {
    fn canonical(&self) -> String {
        match self {
            Value::Real(v) => format!("{v:?}"),
            Value::Count(v) => v.to_string(),
            Value::Word(w) => w.clone(),
            Value::Points(ps) => ps
                .iter()
                .map(|p| format!("{:?},{:?}", p[0], p[1]))
                .collect::<Vec<_>>()
                .join("; "),
            Value::Reals(vs) => vs.iter().map(|v| format!("{v:?}")).collect::<Vec<_>>().join(", "),
        }
    }
}

fn parse_real(text: &str) -> Result<f64, String> {
    let v: f64 = text.trim().parse().map_err(|_| format!("expected a number, got '{}'", text.trim()))?;
    if !v.is_finite() {
        return Err(format!("expected a finite number, got '{}'", text.trim()));
    }
    Ok(v)
}

fn parse_value(kind: Kind, text: &str) -> Result<Value, String> {
    let text = text.trim();
    match kind {
        Kind::Real => parse_real(text).map(Value::Real),
        Kind::Count => text
            .parse()
            .map(Value::Count)
            .map_err(|_| format!("expected a nonnegative integer, got '{text}'")),
        Kind::Word(allowed) => {
            if allowed.contains(&text) {
                Ok(Value::Word(text.to_string()))
            } else {
                Err(format!("expected one of {allowed:?}, got '{text}'"))
            }
        }
        Kind::Points => {
            if text.is_empty() {
                return Ok(Value::Points(Vec::new()));
            }
            text.split(';')
                .map(|p| {
                    let coords = p.split(',').map(parse_real).collect::<Result<Vec<_>, _>>()?;
                    match coords.as_slice() {
                        [x] => Ok([*x, 0.0]),
                        [x, y] => Ok([*x, *y]),
                        _ => Err(format!("a point has one or two coordinates, got '{}'", p.trim())),
                    }
                })
                .collect::<Result<Vec<_>, _>>()
                .map(Value::Points)
        }
        Kind::Reals => {
            if text.is_empty() {
                return Ok(Value::Reals(Vec::new()));
            }
            text.split(',').map(parse_real).collect::<Result<Vec<_>, _>>().map(Value::Reals)
        }
    }
}

/// Parsed configuration: every key resolved to a typed value.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    values: BTreeMap<&'static str, Value>,
}

fn lookup(name: &str) -> Option<&'static Key> {
    KEYS.iter().find(|k| k.name == name)
}

impl Default for RunConfig {
    fn default() -> Self {
        let values = KEYS
            .iter()
            .map(|k| (k.name, parse_value(k.kind, k.default).expect("defaults parse")))
            .collect();
        Self { values }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut cfg = Self::default();
        let mut seen: BTreeMap<&'static str, usize> = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (name, value) = line.split_once('=').ok_or_else(|| CliError::Parse {
                line: line_no,
                field: line.to_string(),
                message: "expected 'key = value'".into(),
            })?;
            let name = name.trim();
            let key = lookup(name).ok_or_else(|| CliError::Parse {
                line: line_no,
                field: name.to_string(),
                message: "unknown key".into(),
            })?;
            if let Some(prev) = seen.insert(key.name, line_no) {
                return Err(CliError::Parse {
                    line: line_no,
                    field: name.to_string(),
                    message: format!("repeated key (first set on line {prev})"),
                });
            }
            let v = parse_value(key.kind, value).map_err(|message| CliError::Parse {
                line: line_no,
                field: name.to_string(),
                message,
            })?;
            cfg.values.insert(key.name, v);
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Override a single key, as if it were written in the file.
    pub fn set(&mut self, name: &str, value: &str) -> Result<(), CliError> {
        let key = lookup(name).ok_or_else(|| CliError::Parse {
            line: 0,
            field: name.to_string(),
            message: "unknown key".into(),
        })?;
        let v = parse_value(key.kind, value).map_err(|message| CliError::Parse {
            line: 0,
            field: name.to_string(),
            message,
        })?;
        self.values.insert(key.name, v);
        Ok(())
    }

    /// Sorted `key = value` lines with numbers in shortest round-trip form.
    pub fn canonical(&self) -> String {
        let mut out = String::new();
        for k in KEYS.iter().filter(|k| k.hashed) {
            let _ = writeln!(out, "{} = {}", k.name, self.values[k.name].canonical());
        }
        out
    }

    /// Hex SHA-256 of [`canonical`](Self::canonical).
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical().as_bytes()))
    }

    fn real(&self, name: &str) -> f64 {
        match &self.values[name] {
            Value::Real(v) => *v,
            other => unreachable!("{name} holds {other:?}"),
        }
    }

    fn count(&self, name: &str) -> u64 {
        match &self.values[name] {
            Value::Count(v) => *v,
            other => unreachable!("{name} holds {other:?}"),
        }
    }

    fn word(&self, name: &str) -> &str {
        match &self.values[name] {
            Value::Word(w) => w,
            other => unreachable!("{name} holds {other:?}"),
        }
    }

    fn points(&self, name: &str) -> Vec<Point> {
        match &self.values[name] {
            Value::Points(p) => p.clone(),
            other => unreachable!("{name} holds {other:?}"),
        }
    }

    pub fn eps_list(&self) -> Vec<f64> {
        match &self.values["sweep.eps"] {
            Value::Reals(v) => v.clone(),
            other => unreachable!("sweep.eps holds {other:?}"),
        }
    }

    pub fn seed(&self) -> u64 {
        self.count("solver.seed")
    }

    pub fn restarts(&self) -> usize {
        self.count("solver.restarts") as usize
    }

    /// Worker count; `0` means one per core.
    pub fn jobs(&self) -> usize {
        self.count("run.jobs") as usize
    }

    /// `(N, s)` as written, before any validation.
    pub fn frac_unchecked(&self) -> (usize, f64) {
        (self.count("frac.N") as usize, self.real("frac.s"))
    }

    pub fn frac(&self) -> Result<FracParams, CliError> {
        Ok(FracParams::new(
            self.real("frac.s"),
            self.real("frac.m"),
            self.count("frac.N") as usize,
        )?)
    }

    pub fn grid(&self) -> Result<Grid, CliError> {
        Ok(Grid::new(
            self.count("frac.N") as usize,
            self.count("grid.points") as usize,
            self.real("grid.half_length"),
        )?)
    }

    /// Grid of the S_* estimate: `sstar.points = 0` picks 512 points in two
    /// dimensions and `2^18` in one.
    pub fn sstar_grid(&self, n_dim: usize) -> Result<Grid, CliError> {
        let points = match self.count("sstar.points") {
            0 if n_dim == 1 => 1 << 18,
            0 => 512,
            p => p as usize,
        };
        Ok(Grid::new(n_dim, points, self.real("sstar.half_length"))?)
    }

    pub fn tolerances(&self) -> Tolerances {
        Tolerances {
            grad: self.real("solver.grad_tol"),
            nehari: self.real("solver.nehari_tol"),
            max_iterations: self.count("solver.max_iterations") as usize,
        }
    }

    pub fn model(&self) -> Result<ModelConfig, CliError> {
        let frac = self.frac()?;
        let shape = match self.word("potential.shape") {
            "constant" => PotentialShape::Constant,
            _ => PotentialShape::Wells {
                top: self.real("potential.top"),
                width: self.real("potential.width"),
            },
        };
        let lambda = match self.word("lambda.shape") {
            "everywhere" => Region::Everywhere,
            "boxes" => Region::Boxes {
                centers: self.points("lambda.centers"),
                half_width: self.real("lambda.radius"),
            },
            _ => Region::Balls {
                centers: self.points("lambda.centers"),
                radius: self.real("lambda.radius"),
            },
        };
        let m_points = if shape == PotentialShape::Constant {
            Vec::new()
        } else {
            self.points("potential.M")
        };
        let potential = PotentialSpec {
            shape,
            v0: self.real("potential.V0"),
            v1: self.real("potential.V1"),
            lambda,
            m_points,
        };
        let nonlin = NonlinearitySpec {
            lambda: self.real("nonlin.lambda"),
            p: self.real("nonlin.p"),
            ar_theta: self.real("nonlin.theta"),
            q: self.real("nonlin.q"),
        };
        Ok(ModelConfig::new(frac, self.real("model.eps"), potential, nonlin, self.real("pen.kappa"))?)
    }

    /// Documentation table: `(key, default)` in file order.
    pub fn keys() -> impl Iterator<Item = (&'static str, &'static str)> {
        KEYS.iter().map(|k| (k.name, k.default))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_overrides() {
        let c = RunConfig::parse("# comment\nfrac.s = 0.25   # trailing\n\nsweep.eps = 0.4,0.2\n").unwrap();
        assert_eq!(c.real("frac.s"), 0.25);
        assert_eq!(c.eps_list(), vec![0.4, 0.2]);
        assert_eq!(c.real("frac.m"), 1.0);
    }

    #[test]
    fn parse_errors_name_line_and_field() {
        match RunConfig::parse("frac.s = 0.5\nfrac.z = 1\n") {
            Err(CliError::Parse { line, field, .. }) => assert_eq!((line, field.as_str()), (2, "frac.z")),
            other => panic!("{other:?}"),
        }
        assert!(matches!(RunConfig::parse("frac.s = abc"), Err(CliError::Parse { line: 1, .. })));
        assert!(matches!(RunConfig::parse("frac.s = 1\nfrac.s = 2"), Err(CliError::Parse { line: 2, .. })));
        assert!(matches!(RunConfig::parse("just text"), Err(CliError::Parse { .. })));
        assert!(matches!(RunConfig::parse("potential.M = 1,2,3"), Err(CliError::Parse { .. })));
        assert!(matches!(RunConfig::parse("lambda.shape = blob"), Err(CliError::Parse { .. })));
    }

    #[test]
    fn hash_ignores_formatting_and_jobs() {
        let a = RunConfig::parse("frac.s = 0.50\npotential.M = 1.5 , 0 ; -1.5,0").unwrap();
        let b = RunConfig::parse("potential.M=1.5,0;-1.5,0.0\nfrac.s=5e-1\nrun.jobs = 4").unwrap();
        assert_eq!(a.hash(), b.hash());
        let c = RunConfig::parse("frac.s = 0.51").unwrap();
        assert_ne!(a.hash(), c.hash());
    }
}
