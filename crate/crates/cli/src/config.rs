//! Run configuration: line-oriented `key = value` with `[section]` headers.
//!
//! ```text
//! seed = 7
//! [chart]
//! topology = torus
//! n = 64
//! side = 2.0
//! window = 0.6
//! [scenario]
//! kind = twistor
//! numerator = 0.1-0.1i, 1+0.2i
//! psi1 = 0.3i, 0.2
//! ```
//!
//! `#` starts a comment. Unknown sections and keys are errors, as are
//! repeated keys and values outside their documented ranges.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use dhm_core::spinor::Spinor;
use dhm_core::{Topology, TargetGeometry};
use num_complex::Complex64;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("config line {line}: {message}")]
pub struct ConfigError {
    /// 1-based line number; 0 for problems not tied to a line.
    pub line: usize,
    pub message: String,
}

fn err<T>(line: usize, message: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError { line, message: message.into() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioKind {
    /// Pushforward of a twistor spinor along a rational conformal map.
    Twistor,
    /// A rational conformal map with `ψ = 0`.
    HarmonicMap,
    /// A constant map with a constant tangent spinor.
    Constant,
    /// A constant pair whose map is perturbed by smooth seeded modes.
    Perturbation,
    /// Seeded smooth fields that solve nothing.
    Random,
}

impl ScenarioKind {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "twistor" => Self::Twistor,
            "harmonic_map" => Self::HarmonicMap,
            "constant" => Self::Constant,
            "perturbation" => Self::Perturbation,
            "random" => Self::Random,
            _ => return None,
        })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Twistor => "twistor",
            Self::HarmonicMap => "harmonic_map",
            Self::Constant => "constant",
            Self::Perturbation => "perturbation",
            Self::Random => "random",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChartSpec {
    pub topology: Topology,
    pub n: usize,
    pub side: f64,
    pub window: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub kind: ScenarioKind,
    /// Rational map coefficients in ascending powers.
    pub numerator: Vec<Complex64>,
    pub denominator: Vec<Complex64>,
    pub psi0: Spinor,
    pub psi1: Spinor,
    /// Image point of constant maps.
    pub point: Vec<f64>,
    /// Ambient direction carrying the constant spinor (projected tangent).
    pub direction: Vec<f64>,
    pub spinor: Spinor,
    pub amplitude: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverSpec {
    /// Defaults to the stability bound `h²/8`.
    pub dt: Option<f64>,
    pub max_iters: usize,
    pub residual_tol: f64,
    pub reproject_every: usize,
    pub spinor_norm_target: f64,
    pub power_iters: usize,
    pub inner_tol: f64,
    pub inner_max_iters: usize,
    pub trace_every: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub output_dir: Option<PathBuf>,
    pub chart: ChartSpec,
    pub target: TargetGeometry,
    pub scenario: ScenarioSpec,
    pub solver: SolverSpec,
    /// Probe radii; defaults to fractions of the interior radius.
    pub probe_radii: Option<Vec<f64>>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            output_dir: None,
            chart: ChartSpec { topology: Topology::Torus, n: 64, side: 2.0, window: Some(0.6) },
            target: TargetGeometry::sphere(2),
            scenario: ScenarioSpec {
                kind: ScenarioKind::Twistor,
                numerator: vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
                denominator: vec![Complex64::new(1.0, 0.0)],
                psi0: Spinor::from_parts(1.0, 0.0, 0.0, 0.0),
                psi1: Spinor::ZERO,
                point: vec![0.0, 0.0, 1.0],
                direction: vec![1.0, 0.0, 0.0],
                spinor: Spinor::from_parts(1.0, 0.0, 0.0, 0.0),
                amplitude: 0.05,
            },
            solver: SolverSpec {
                dt: None,
                max_iters: 2000,
                residual_tol: 1e-8,
                reproject_every: 20,
                spinor_norm_target: 0.5,
                power_iters: 2,
                inner_tol: 1e-10,
                inner_max_iters: 5000,
                trace_every: 1,
            },
            probe_radii: None,
        }
    }
}

// ------------------------------------------------------------------ values

fn parse_f64(line: usize, key: &str, v: &str) -> Result<f64, ConfigError> {
    match v.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => err(line, format!("{key}: expected a finite number, got `{v}`")),
    }
}

fn parse_positive(line: usize, key: &str, v: &str) -> Result<f64, ConfigError> {
    let x = parse_f64(line, key, v)?;
    if x > 0.0 {
        Ok(x)
    } else {
        err(line, format!("{key}: must be positive, got {x}"))
    }
}

fn parse_count(line: usize, key: &str, v: &str, lo: usize, hi: usize) -> Result<usize, ConfigError> {
    match v.parse::<usize>() {
        Ok(x) if (lo..=hi).contains(&x) => Ok(x),
        Ok(x) => err(line, format!("{key}: {x} outside [{lo}, {hi}]")),
        Err(_) => err(line, format!("{key}: expected an integer, got `{v}`")),
    }
}

fn parse_list<T>(line: usize, key: &str, v: &str, f: impl Fn(&str) -> Option<T>) -> Result<Vec<T>, ConfigError> {
    v.split(',')
        .map(|s| f(s.trim()).map_or_else(|| err(line, format!("{key}: cannot parse `{}`", s.trim())), Ok))
        .collect()
}

/// `a`, `bi`, `a+bi`, `a-bi`, `i`, `-i`.
pub fn parse_complex(s: &str) -> Option<Complex64> {
    let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return None;
    }
    let unit = |t: &str| -> Option<f64> {
        match t {
            "" | "+" => Some(1.0),
            "-" => Some(-1.0),
            _ => t.parse::<f64>().ok(),
        }
    };
    let c = match s.strip_suffix('i') {
        None => Complex64::new(s.parse().ok()?, 0.0),
        Some(body) => {
            let b = body.as_bytes();
            let split = (1..b.len()).rev().find(|&p| (b[p] == b'+' || b[p] == b'-') && !matches!(b[p - 1], b'e' | b'E'));
            match split {
                Some(p) => Complex64::new(body[..p].parse().ok()?, unit(&body[p..])?),
                None => Complex64::new(0.0, unit(body)?),
            }
        }
    };
    (c.re.is_finite() && c.im.is_finite()).then_some(c)
}

fn parse_spinor(line: usize, key: &str, v: &str) -> Result<Spinor, ConfigError> {
    let c = parse_list(line, key, v, parse_complex)?;
    match c[..] {
        [f, g] => Ok(Spinor::new(f, g)),
        _ => err(line, format!("{key}: expected two complex components, got {}", c.len())),
    }
}

fn fmt_complex(c: Complex64) -> String {
    format!("{:?}{:+?}i", c.re, c.im)
}

fn fmt_spinor(s: Spinor) -> String {
    format!("{}, {}", fmt_complex(s.f), fmt_complex(s.g))
}

fn fmt_reals(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(", ")
}

// ------------------------------------------------------------------ parser

const KEYS: &[(&str, &[&str])] = &[
    ("", &["seed", "output_dir"]),
    ("chart", &["topology", "n", "side", "window"]),
    ("target", &["kind", "dim"]),
    ("scenario", &["kind", "numerator", "denominator", "psi0", "psi1", "point", "direction", "spinor", "amplitude"]),
    (
        "solver",
        &[
            "dt",
            "max_iters",
            "residual_tol",
            "reproject_every",
            "spinor_norm_target",
            "power_iters",
            "inner_tol",
            "inner_max_iters",
            "trace_every",
        ],
    ),
    ("probe", &["radii"]),
];

pub const MAX_GRID: usize = 4096;

type Entries = BTreeMap<(String, String), (usize, String)>;

fn tokenize(text: &str) -> Result<Entries, ConfigError> {
    let mut entries = Entries::new();
    let mut section = String::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let s = raw.split('#').next().unwrap_or("").trim();
        if s.is_empty() {
            continue;
        }
        if let Some(name) = s.strip_prefix('[') {
            let Some(name) = name.strip_suffix(']') else {
                return err(line, format!("malformed section header `{s}`"));
            };
            let name = name.trim();
            if !KEYS.iter().any(|(sec, _)| *sec == name) || name.is_empty() {
                return err(line, format!("unknown section [{name}]"));
            }
            section = name.to_string();
            continue;
        }
        let Some((key, value)) = s.split_once('=') else {
            return err(line, format!("expected `key = value`, got `{s}`"));
        };
        let (key, value) = (key.trim(), value.trim().trim_matches('"'));
        let known = KEYS.iter().find(|(sec, _)| *sec == section).is_some_and(|(_, keys)| keys.contains(&key));
        if !known {
            let place = if section.is_empty() { "top level".to_string() } else { format!("[{section}]") };
            return err(line, format!("unknown key `{key}` in {place}"));
        }
        if value.is_empty() {
            return err(line, format!("{key}: empty value"));
        }
        if let Some((first, _)) = entries.insert((section.clone(), key.to_string()), (line, value.to_string())) {
            return err(line, format!("duplicate key `{key}` (first set on line {first})"));
        }
    }
    Ok(entries)
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let entries = tokenize(text)?;
        let mut cfg = RunConfig::default();
        let mut target_kind = (0, "sphere".to_string());
        let mut target_dim = None;
        let mut side_line = None;
        for ((section, key), (line, v)) in &entries {
            let line = *line;
            let v = v.as_str();
            let k = key.as_str();
            match (section.as_str(), k) {
                ("", "seed") => {
                    cfg.seed = v.parse().map_or_else(|_| err(line, format!("seed: expected an unsigned integer, got `{v}`")), Ok)?
                }
                ("", "output_dir") => cfg.output_dir = Some(PathBuf::from(v)),
                ("chart", "topology") => {
                    cfg.chart.topology = match v {
                        "torus" => Topology::Torus,
                        "disk" => Topology::Disk,
                        _ => return err(line, format!("topology: expected torus or disk, got `{v}`")),
                    }
                }
                ("chart", "n") => cfg.chart.n = parse_count(line, k, v, 8, MAX_GRID)?,
                ("chart", "side") => {
                    cfg.chart.side = parse_positive(line, k, v)?;
                    side_line = Some(line);
                }
                ("chart", "window") => {
                    cfg.chart.window = if v == "none" { None } else { Some(parse_positive(line, k, v)?) }
                }
                ("target", "kind") => target_kind = (line, v.to_string()),
                ("target", "dim") => target_dim = Some((line, parse_count(line, k, v, 1, 16)?)),
                ("scenario", "kind") => {
                    cfg.scenario.kind =
                        ScenarioKind::parse(v).map_or_else(|| err(line, format!("scenario kind `{v}` not recognised")), Ok)?
                }
                ("scenario", "numerator") => cfg.scenario.numerator = parse_list(line, k, v, parse_complex)?,
                ("scenario", "denominator") => cfg.scenario.denominator = parse_list(line, k, v, parse_complex)?,
                ("scenario", "psi0") => cfg.scenario.psi0 = parse_spinor(line, k, v)?,
                ("scenario", "psi1") => cfg.scenario.psi1 = parse_spinor(line, k, v)?,
                ("scenario", "spinor") => cfg.scenario.spinor = parse_spinor(line, k, v)?,
                ("scenario", "point") => cfg.scenario.point = parse_list(line, k, v, |s| s.parse().ok())?,
                ("scenario", "direction") => cfg.scenario.direction = parse_list(line, k, v, |s| s.parse().ok())?,
                ("scenario", "amplitude") => {
                    let a = parse_f64(line, k, v)?;
                    if !(0.0..=0.5).contains(&a) {
                        return err(line, format!("amplitude: {a} outside [0, 0.5]"));
                    }
                    cfg.scenario.amplitude = a;
                }
                ("solver", "dt") => cfg.solver.dt = Some(parse_positive(line, k, v)?),
                ("solver", "max_iters") => cfg.solver.max_iters = parse_count(line, k, v, 0, 10_000_000)?,
                ("solver", "residual_tol") => cfg.solver.residual_tol = parse_positive(line, k, v)?,
                ("solver", "reproject_every") => cfg.solver.reproject_every = parse_count(line, k, v, 1, 1_000_000)?,
                ("solver", "spinor_norm_target") => {
                    let a = parse_f64(line, k, v)?;
                    if a < 0.0 {
                        return err(line, format!("spinor_norm_target: must be nonnegative, got {a}"));
                    }
                    cfg.solver.spinor_norm_target = a;
                }
                ("solver", "power_iters") => cfg.solver.power_iters = parse_count(line, k, v, 1, 1000)?,
                ("solver", "inner_tol") => cfg.solver.inner_tol = parse_positive(line, k, v)?,
                ("solver", "inner_max_iters") => cfg.solver.inner_max_iters = parse_count(line, k, v, 1, 1_000_000)?,
                ("solver", "trace_every") => cfg.solver.trace_every = parse_count(line, k, v, 1, 1_000_000)?,
                ("probe", "radii") => {
                    let r = parse_list(line, k, v, |s| s.parse::<f64>().ok().filter(|x| *x > 0.0 && x.is_finite()))?;
                    cfg.probe_radii = Some(r);
                }
                _ => unreachable!("key table and match arms agree"),
            }
        }
        cfg.target = match (target_kind.1.as_str(), target_dim) {
            ("sphere", d) => TargetGeometry::sphere(d.map_or(2, |(_, d)| d)),
            ("flat", d) => TargetGeometry::flat(d.map_or(2, |(_, d)| d)),
            (other, _) => return err(target_kind.0, format!("target kind: expected sphere or flat, got `{other}`")),
        };
        if cfg.chart.topology == Topology::Disk {
            if let Some(line) = side_line.filter(|_| cfg.chart.side != 2.0) {
                return err(line, "side: the disk chart always has side 2");
            }
            cfg.chart.side = 2.0;
        }
        cfg.check(&entries)?;
        Ok(cfg)
    }

    /// Cross-field checks, reported at the line of the offending key.
    fn check(&self, entries: &Entries) -> Result<(), ConfigError> {
        let line_of = |sec: &str, key: &str| entries.get(&(sec.to_string(), key.to_string())).map_or(0, |(l, _)| *l);
        let k = self.target.ambient_dim();
        let s = &self.scenario;
        let needs_conformal = matches!(s.kind, ScenarioKind::Twistor | ScenarioKind::HarmonicMap);
        if needs_conformal && self.target != TargetGeometry::sphere(2) {
            return err(line_of("scenario", "kind"), format!("scenario {} needs the 2-sphere target", s.kind.as_str()));
        }
        let needs_point = matches!(s.kind, ScenarioKind::Constant | ScenarioKind::Perturbation);
        if needs_point {
            if s.point.len() != k {
                return err(line_of("scenario", "point"), format!("point: expected {k} coordinates, got {}", s.point.len()));
            }
            if s.direction.len() != k {
                return err(
                    line_of("scenario", "direction"),
                    format!("direction: expected {k} coordinates, got {}", s.direction.len()),
                );
            }
            if self.target.is_sphere() && s.point.iter().all(|x| *x == 0.0) {
                return err(line_of("scenario", "point"), "point: the origin does not project to the sphere");
            }
        }
        if needs_conformal && (s.numerator.is_empty() || s.denominator.is_empty()) {
            return err(line_of("scenario", "numerator"), "rational map needs numerator and denominator coefficients");
        }
        Ok(())
    }

    /// Every field in a fixed order with round-trip float formatting; parsing
    /// the result gives back the same configuration.
    pub fn canonical(&self) -> String {
        let (tk, td) = match self.target {
            TargetGeometry::Sphere { n } => ("sphere", n),
            TargetGeometry::Flat { k } => ("flat", k),
        };
        let cs = |v: &[Complex64]| v.iter().map(|c| fmt_complex(*c)).collect::<Vec<_>>().join(", ");
        let c = &self.chart;
        let s = &self.scenario;
        let o = &self.solver;
        let mut out = format!("seed = {}\n", self.seed);
        if let Some(d) = &self.output_dir {
            out += &format!("output_dir = {}\n", d.display());
        }
        out += &format!(
            "[chart]\ntopology = {}\nn = {}\nside = {:?}\nwindow = {}\n",
            match c.topology {
                Topology::Torus => "torus",
                Topology::Disk => "disk",
            },
            c.n,
            c.side,
            c.window.map_or("none".to_string(), |w| format!("{w:?}")),
        );
        out += &format!("[target]\nkind = {tk}\ndim = {td}\n");
        out += &format!(
            "[scenario]\nkind = {}\nnumerator = {}\ndenominator = {}\npsi0 = {}\npsi1 = {}\npoint = {}\ndirection = {}\nspinor = {}\namplitude = {:?}\n",
            s.kind.as_str(),
            cs(&s.numerator),
            cs(&s.denominator),
            fmt_spinor(s.psi0),
            fmt_spinor(s.psi1),
            fmt_reals(&s.point),
            fmt_reals(&s.direction),
            fmt_spinor(s.spinor),
            s.amplitude,
        );
        out += "[solver]\n";
        if let Some(dt) = o.dt {
            out += &format!("dt = {dt:?}\n");
        }
        out += &format!(
            "max_iters = {}\nresidual_tol = {:?}\nreproject_every = {}\nspinor_norm_target = {:?}\npower_iters = {}\ninner_tol = {:?}\ninner_max_iters = {}\ntrace_every = {}\n",
            o.max_iters, o.residual_tol, o.reproject_every, o.spinor_norm_target, o.power_iters, o.inner_tol, o.inner_max_iters, o.trace_every,
        );
        if let Some(r) = &self.probe_radii {
            out += &format!("[probe]\nradii = {}\n", fmt_reals(r));
        }
        out
    }
}

impl fmt::Display for RunConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_literals() {
        let c = |re, im| Some(Complex64::new(re, im));
        assert_eq!(parse_complex("1"), c(1.0, 0.0));
        assert_eq!(parse_complex("0.3i"), c(0.0, 0.3));
        assert_eq!(parse_complex("-i"), c(0.0, -1.0));
        assert_eq!(parse_complex("1+0.2i"), c(1.0, 0.2));
        assert_eq!(parse_complex("0.1 - 0.1i"), c(0.1, -0.1));
        assert_eq!(parse_complex("1e-3-2e-1i"), c(1e-3, -0.2));
        assert_eq!(parse_complex("1+i"), c(1.0, 1.0));
        assert_eq!(parse_complex("x"), None);
        assert_eq!(parse_complex(""), None);
    }

    #[test]
    fn unknown_key_reports_line() {
        let e = RunConfig::parse("seed = 3\n[chart]\nn = 32\nsize = 2\n").unwrap_err();
        assert_eq!(e.line, 4);
        assert!(e.message.contains("size"));
    }

    #[test]
    fn range_and_duplicate_errors() {
        assert_eq!(RunConfig::parse("[chart]\nn = 4\n").unwrap_err().line, 2);
        assert_eq!(RunConfig::parse("[chart]\nn = 16\n\nn = 32\n").unwrap_err().line, 4);
        assert_eq!(RunConfig::parse("[nope]\n").unwrap_err().line, 1);
        assert_eq!(RunConfig::parse("[scenario]\namplitude = 2\n").unwrap_err().line, 2);
        assert_eq!(RunConfig::parse("[target]\nkind = flat\n[scenario]\nkind = twistor\n").unwrap_err().line, 4);
    }

    #[test]
    fn canonical_round_trips() {
        let text = "seed = 9\n[chart]\nn = 32\nwindow = 0.5\n[scenario]\nkind = twistor\nnumerator = 0.1-0.1i, 1+0.2i\npsi1 = 0.3i, 0.2\n[solver]\ndt = 1e-5\n";
        let cfg = RunConfig::parse(text).unwrap();
        assert_eq!(cfg.scenario.psi1, Spinor::new(Complex64::new(0.0, 0.3), Complex64::new(0.2, 0.0)));
        let again = RunConfig::parse(&cfg.canonical()).unwrap();
        assert_eq!(again, cfg);
        assert_eq!(again.canonical(), cfg.canonical());
    }
}
