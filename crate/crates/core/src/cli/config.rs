//! Line-oriented `key = value` configuration with `[section]` headers.
//!
//! Keys may appear before any header or under their own section; `#` starts
//! a comment. [`RunConfig::echo`] writes every key, defaults included, and
//! parsing the echo gives back the same config.

use std::fmt::Write as _;

use crate::certify::{ConstantsLedger, CONSTANT_NAMES};
use crate::convergence::step_count;
use crate::expr::FieldExpression;
use crate::mesh::BoxExtents;
use crate::solver::RESIDUAL_TOL;
use crate::{Error, Point, Result};

/// Every accepted key with its section.
pub const KEYS: &[(&str, &str)] = &[
    ("domain", "lo"),
    ("domain", "hi"),
    ("mesh", "mesh"),
    ("mesh", "refine"),
    ("time", "tau"),
    ("time", "T"),
    ("time", "N"),
    ("physics", "mu"),
    ("physics", "u0"),
    ("physics", "forcing"),
    ("physics", "pressure"),
    ("certify", "M"),
    ("ledger", "C0"),
    ("ledger", "C1"),
    ("ledger", "C1star"),
    ("ledger", "C2"),
    ("ledger", "C3"),
    ("ledger", "C4"),
    ("ledger", "C5"),
    ("ledger", "C6"),
    ("ledger", "C7"),
    ("ledger", "C8"),
    ("ledger", "C9"),
    ("solver", "tol"),
    ("output", "out"),
    ("output", "vtk_stride"),
    ("output", "thin"),
    ("convergence", "study"),
    ("convergence", "levels"),
    ("convergence", "interp_field"),
    ("convergence", "velocity"),
    ("convergence", "pressure"),
    ("convergence", "space_tau"),
    ("convergence", "space_T"),
    ("convergence", "space_mu"),
    ("convergence", "time_velocity"),
    ("convergence", "time_pressure"),
    ("convergence", "time_cells"),
    ("convergence", "time_mu"),
    ("convergence", "time_T"),
    ("convergence", "taus"),
];

const REQUIRED: &[&str] = &["mesh", "tau", "mu", "u0"];

#[derive(Debug, Clone, PartialEq)]
pub enum ForcingSpec {
    None,
    /// Forcing that makes `(u0, pressure)` an exact solution.
    Manufactured,
    Expression(String),
}

impl ForcingSpec {
    fn text(&self) -> String {
        match self {
            ForcingSpec::None => "none".into(),
            ForcingSpec::Manufactured => "manufactured".into(),
            ForcingSpec::Expression(e) => e.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StudyKind {
    All,
    Interpolation,
    Projection,
    Space,
    Time,
}

impl StudyKind {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "all" => StudyKind::All,
            "interpolation" => StudyKind::Interpolation,
            "projection" => StudyKind::Projection,
            "space" => StudyKind::Space,
            "time" => StudyKind::Time,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            StudyKind::All => "all",
            StudyKind::Interpolation => "interpolation",
            StudyKind::Projection => "projection",
            StudyKind::Space => "space",
            StudyKind::Time => "time",
        }
    }

    pub fn includes(self, other: StudyKind) -> bool {
        self == StudyKind::All || self == other
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceConfig {
    pub study: StudyKind,
    pub levels: Vec<usize>,
    pub interp_field: String,
    pub velocity: String,
    pub pressure: String,
    pub space_tau: f64,
    pub space_t: f64,
    pub space_mu: f64,
    pub time_velocity: String,
    pub time_pressure: String,
    pub time_cells: usize,
    pub time_mu: f64,
    pub time_t: f64,
    pub taus: Vec<f64>,
}

impl Default for ConvergenceConfig {
    fn default() -> Self {
        ConvergenceConfig {
            study: StudyKind::All,
            levels: vec![2, 4, 8],
            interp_field: "sine".into(),
            velocity: "vortex".into(),
            pressure: "vortex_pressure".into(),
            space_tau: 1e-3,
            space_t: 0.01,
            space_mu: 1.0,
            time_velocity: "vortex_pulse".into(),
            time_pressure: "vortex_pulse_pressure".into(),
            time_cells: 4,
            time_mu: 0.1,
            time_t: 0.4,
            taus: vec![0.04, 0.02, 0.01],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub lo: Point,
    pub hi: Point,
    pub cells: [usize; 3],
    pub refine: usize,
    pub tau: f64,
    pub t_final: f64,
    pub num_steps: usize,
    pub mu: f64,
    /// Catalog name, expression, or `random`.
    pub u0: String,
    pub forcing: ForcingSpec,
    /// Exact pressure paired with `u0` for manufactured forcing and projection.
    pub pressure: String,
    /// `(index into CONSTANT_NAMES, value)`
    pub ledger_overrides: Vec<(usize, f64)>,
    pub m: Option<f64>,
    pub out: String,
    /// Write a VTK snapshot every `vtk_stride` steps; 0 disables.
    pub vtk_stride: usize,
    /// Keep every `thin`-th level in memory.
    pub thin: usize,
    pub solver_tol: f64,
    pub convergence: ConvergenceConfig,
}

impl RunConfig {
    pub fn extents(&self) -> BoxExtents {
        BoxExtents::new(self.lo, self.hi)
    }

    pub fn is_random_u0(&self) -> bool {
        self.u0.trim() == "random"
    }

    pub fn ledger(&self) -> ConstantsLedger {
        let mut l = ConstantsLedger::all_ones(self.mu);
        for &(i, v) in &self.ledger_overrides {
            l.values[i] = v;
            l.provenance[i] = "config override".into();
        }
        l
    }

    pub fn velocity_expr(&self) -> Result<FieldExpression> {
        FieldExpression::resolve(&self.u0)
    }

    pub fn pressure_expr(&self) -> Result<FieldExpression> {
        FieldExpression::resolve(&self.pressure)
    }

    pub fn echo(&self) -> String {
        let mut s = String::new();
        let list = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        let _ = writeln!(s, "[domain]");
        let _ = writeln!(s, "lo = {}", list(&self.lo));
        let _ = writeln!(s, "hi = {}", list(&self.hi));
        let _ = writeln!(s, "\n[mesh]");
        let _ = writeln!(s, "mesh = {},{},{}", self.cells[0], self.cells[1], self.cells[2]);
        let _ = writeln!(s, "refine = {}", self.refine);
        let _ = writeln!(s, "\n[time]");
        let _ = writeln!(s, "tau = {}", self.tau);
        let _ = writeln!(s, "T = {}", self.t_final);
        let _ = writeln!(s, "N = {}", self.num_steps);
        let _ = writeln!(s, "\n[physics]");
        let _ = writeln!(s, "mu = {}", self.mu);
        let _ = writeln!(s, "u0 = {}", self.u0);
        let _ = writeln!(s, "forcing = {}", self.forcing.text());
        let _ = writeln!(s, "pressure = {}", self.pressure);
        let _ = writeln!(s, "\n[certify]");
        match self.m {
            Some(m) => {
                let _ = writeln!(s, "M = {m}");
            }
            None => {
                let _ = writeln!(s, "M = auto");
            }
        }
        let _ = writeln!(s, "\n[ledger]");
        for (i, n) in CONSTANT_NAMES.iter().enumerate() {
            match self.ledger_overrides.iter().find(|(j, _)| *j == i) {
                Some((_, v)) => {
                    let _ = writeln!(s, "{n} = {v}");
                }
                None => {
                    let _ = writeln!(s, "# {n} = 1 (default)");
                }
            }
        }
        let _ = writeln!(s, "\n[solver]");
        let _ = writeln!(s, "tol = {}", self.solver_tol);
        let _ = writeln!(s, "\n[output]");
        let _ = writeln!(s, "out = {}", self.out);
        let _ = writeln!(s, "vtk_stride = {}", self.vtk_stride);
        let _ = writeln!(s, "thin = {}", self.thin);
        let c = &self.convergence;
        let _ = writeln!(s, "\n[convergence]");
        let _ = writeln!(s, "study = {}", c.study.name());
        let _ = writeln!(s, "levels = {}", c.levels.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","));
        let _ = writeln!(s, "interp_field = {}", c.interp_field);
        let _ = writeln!(s, "velocity = {}", c.velocity);
        let _ = writeln!(s, "pressure = {}", c.pressure);
        let _ = writeln!(s, "space_tau = {}", c.space_tau);
        let _ = writeln!(s, "space_T = {}", c.space_t);
        let _ = writeln!(s, "space_mu = {}", c.space_mu);
        let _ = writeln!(s, "time_velocity = {}", c.time_velocity);
        let _ = writeln!(s, "time_pressure = {}", c.time_pressure);
        let _ = writeln!(s, "time_cells = {}", c.time_cells);
        let _ = writeln!(s, "time_mu = {}", c.time_mu);
        let _ = writeln!(s, "time_T = {}", c.time_t);
        let _ = writeln!(s, "taus = {}", list(&c.taus));
        s
    }
}

fn config_err(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Config(format!("line {line}: {msg}"))
}

fn suggest(key: &str) -> String {
    let best = KEYS
        .iter()
        .map(|(_, k)| (strsim::levenshtein(&key.to_lowercase(), &k.to_lowercase()), *k))
        .min_by_key(|(d, _)| *d);
    let mut valid: Vec<&str> = KEYS.iter().map(|(_, k)| *k).collect();
    valid.sort_unstable();
    valid.dedup();
    match best {
        Some((d, k)) if d <= 2 => format!("unknown key `{key}`, did you mean `{k}`? valid keys: {}", valid.join(", ")),
        _ => format!("unknown key `{key}`; valid keys: {}", valid.join(", ")),
    }
}

struct Entry {
    line: usize,
    key: &'static str,
    value: String,
}

fn lookup_key(section: Option<&str>, key: &str) -> Option<&'static str> {
    KEYS.iter()
        .filter(|(s, _)| section.is_none_or(|sec| sec == *s))
        .find(|(_, k)| *k == key)
        .map(|(_, k)| *k)
}

/// Splits the text into entries, checking keys and sections.
fn tokenize(text: &str) -> Result<Vec<Entry>> {
    let sections: Vec<&str> = {
        let mut v: Vec<&str> = KEYS.iter().map(|(s, _)| *s).collect();
        v.dedup();
        v
    };
    let mut section: Option<&str> = None;
    let mut entries: Vec<Entry> = vec![];
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        if let Some(rest) = body.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| config_err(line, format!("malformed section header `{body}`")))?
                .trim();
            let s = sections
                .iter()
                .find(|s| **s == name)
                .ok_or_else(|| config_err(line, format!("unknown section `{name}`; valid sections: {}", sections.join(", "))))?;
            section = Some(s);
            continue;
        }
        let (k, v) = body
            .split_once('=')
            .ok_or_else(|| config_err(line, format!("expected `key = value`, got `{body}`")))?;
        let (k, v) = (k.trim(), v.trim());
        // `pressure` exists in two sections; the section decides which one.
        let key = match lookup_key(section, k) {
            Some(key) => key,
            None if section.is_some() && lookup_key(None, k).is_some() => {
                return Err(config_err(line, format!("key `{k}` does not belong to section [{}]", section.unwrap())))
            }
            None => return Err(config_err(line, suggest(k))),
        };
        let key: &'static str = if key == "pressure" && section == Some("convergence") { "convergence.pressure" } else { key };
        if entries.iter().any(|e| e.key == key) {
            return Err(config_err(line, format!("duplicate key `{k}`")));
        }
        if v.is_empty() {
            return Err(config_err(line, format!("missing value for `{k}`")));
        }
        entries.push(Entry { line, key, value: v.to_string() });
    }
    Ok(entries)
}

fn num(e: &Entry) -> Result<f64> {
    e.value
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| config_err(e.line, format!("type mismatch for `{}`: expected a number, got `{}`", e.key, e.value)))
}

fn count(e: &Entry) -> Result<usize> {
    e.value
        .parse::<usize>()
        .map_err(|_| config_err(e.line, format!("type mismatch for `{}`: expected a nonnegative integer, got `{}`", e.key, e.value)))
}

fn num_list(e: &Entry) -> Result<Vec<f64>> {
    e.value
        .split(',')
        .map(|p| {
            p.trim().parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| {
                config_err(e.line, format!("type mismatch for `{}`: expected a comma-separated list of numbers, got `{}`", e.key, e.value))
            })
        })
        .collect()
}

fn count_list(e: &Entry) -> Result<Vec<usize>> {
    e.value
        .split(',')
        .map(|p| {
            p.trim().parse::<usize>().map_err(|_| {
                config_err(e.line, format!("type mismatch for `{}`: expected a comma-separated list of integers, got `{}`", e.key, e.value))
            })
        })
        .collect()
}

fn positive(e: &Entry, v: f64) -> Result<f64> {
    if v > 0.0 {
        Ok(v)
    } else {
        Err(config_err(e.line, format!("constraint violated: `{}` must be positive, got {v}", e.key)))
    }
}

fn point(e: &Entry) -> Result<Point> {
    let v = num_list(e)?;
    if v.len() != 3 {
        return Err(config_err(e.line, format!("type mismatch for `{}`: expected three numbers, got `{}`", e.key, e.value)));
    }
    Ok([v[0], v[1], v[2]])
}

fn check_field(e: &Entry, arity: usize) -> Result<()> {
    let f = FieldExpression::resolve(&e.value).map_err(|err| config_err(e.line, format!("`{}`: {err}", e.key)))?;
    if f.arity() != arity {
        return Err(config_err(
            e.line,
            format!("constraint violated: `{}` must be a {} field", e.key, if arity == 3 { "vector" } else { "scalar" }),
        ));
    }
    Ok(())
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    let entries = tokenize(text)?;
    for r in REQUIRED {
        if !entries.iter().any(|e| e.key == *r) {
            return Err(Error::Config(format!("missing required key `{r}`")));
        }
    }
    let mut c = RunConfig {
        lo: [0.0; 3],
        hi: [1.0; 3],
        cells: [0; 3],
        refine: 0,
        tau: 0.0,
        t_final: 0.0,
        num_steps: 0,
        mu: 0.0,
        u0: String::new(),
        forcing: ForcingSpec::None,
        pressure: "0".into(),
        ledger_overrides: vec![],
        m: None,
        out: "out".into(),
        vtk_stride: 0,
        thin: 1,
        solver_tol: RESIDUAL_TOL,
        convergence: ConvergenceConfig::default(),
    };
    let (mut t_entry, mut n_entry) = (None, None);
    for e in &entries {
        let cv = &mut c.convergence;
        match e.key {
            "lo" => c.lo = point(e)?,
            "hi" => c.hi = point(e)?,
            "mesh" => {
                let v = count_list(e)?;
                c.cells = match v.as_slice() {
                    [n] => [*n; 3],
                    [a, b, d] => [*a, *b, *d],
                    _ => return Err(config_err(e.line, "type mismatch for `mesh`: expected one or three integers")),
                };
                if c.cells.contains(&0) {
                    return Err(config_err(e.line, "constraint violated: `mesh` cell counts must be at least 1"));
                }
            }
            "refine" => c.refine = count(e)?,
            "tau" => c.tau = positive(e, num(e)?)?,
            "T" => t_entry = Some((e.line, positive(e, num(e)?)?)),
            "N" => {
                let n = count(e)?;
                if n == 0 {
                    return Err(config_err(e.line, "constraint violated: `N` must be at least 1"));
                }
                n_entry = Some((e.line, n));
            }
            "mu" => c.mu = positive(e, num(e)?)?,
            "u0" => {
                if e.value != "random" {
                    check_field(e, 3)?;
                }
                c.u0 = e.value.clone();
            }
            "forcing" => {
                c.forcing = match e.value.as_str() {
                    "none" => ForcingSpec::None,
                    "manufactured" => ForcingSpec::Manufactured,
                    _ => {
                        check_field(e, 3)?;
                        ForcingSpec::Expression(e.value.clone())
                    }
                }
            }
            "pressure" => {
                check_field(e, 1)?;
                c.pressure = e.value.clone();
            }
            "M" => {
                c.m = if e.value == "auto" { None } else { Some(positive(e, num(e)?)?) };
            }
            "tol" => c.solver_tol = positive(e, num(e)?)?,
            "out" => c.out = e.value.clone(),
            "vtk_stride" => c.vtk_stride = count(e)?,
            "thin" => {
                c.thin = count(e)?;
                if c.thin == 0 {
                    return Err(config_err(e.line, "constraint violated: `thin` must be at least 1"));
                }
            }
            "study" => {
                cv.study = StudyKind::parse(&e.value).ok_or_else(|| {
                    config_err(e.line, format!("constraint violated: `study` must be one of all, interpolation, projection, space, time; got `{}`", e.value))
                })?
            }
            "levels" => {
                cv.levels = count_list(e)?;
                if cv.levels.len() < 3 || cv.levels.contains(&0) {
                    return Err(config_err(e.line, "constraint violated: `levels` needs at least 3 positive cell counts"));
                }
            }
            "interp_field" => {
                check_field(e, 3)?;
                cv.interp_field = e.value.clone();
            }
            "velocity" => {
                check_field(e, 3)?;
                cv.velocity = e.value.clone();
            }
            "convergence.pressure" => {
                check_field(e, 1)?;
                cv.pressure = e.value.clone();
            }
            "space_tau" => cv.space_tau = positive(e, num(e)?)?,
            "space_T" => cv.space_t = positive(e, num(e)?)?,
            "space_mu" => cv.space_mu = positive(e, num(e)?)?,
            "time_velocity" => {
                check_field(e, 3)?;
                cv.time_velocity = e.value.clone();
            }
            "time_pressure" => {
                check_field(e, 1)?;
                cv.time_pressure = e.value.clone();
            }
            "time_cells" => {
                cv.time_cells = count(e)?;
                if cv.time_cells == 0 {
                    return Err(config_err(e.line, "constraint violated: `time_cells` must be at least 1"));
                }
            }
            "time_mu" => cv.time_mu = positive(e, num(e)?)?,
            "time_T" => cv.time_t = positive(e, num(e)?)?,
            "taus" => {
                cv.taus = num_list(e)?;
                if cv.taus.len() < 3 || cv.taus.iter().any(|t| !(*t > 0.0)) {
                    return Err(config_err(e.line, "constraint violated: `taus` needs at least 3 positive step sizes"));
                }
            }
            name => {
                let i = CONSTANT_NAMES.iter().position(|n| *n == name).expect("ledger key");
                c.ledger_overrides.push((i, positive(e, num(e)?)?));
            }
        }
    }
    c.ledger_overrides.sort_by_key(|(i, _)| *i);
    match (t_entry, n_entry) {
        (Some((line, t)), n) => {
            let steps = step_count(c.tau, t).map_err(|err| config_err(line, format!("constraint violated: `T`: {err}")))?;
            if let Some((nl, n)) = n {
                if n != steps {
                    return Err(config_err(nl, format!("constraint violated: `N` = {n} but T / tau = {steps}")));
                }
            }
            c.t_final = t;
            c.num_steps = steps;
        }
        (None, Some((_, n))) => {
            c.num_steps = n;
            c.t_final = n as f64 * c.tau;
        }
        (None, None) => return Err(Error::Config("missing required key `T` (or `N`)".into())),
    }
    if c.lo.iter().zip(&c.hi).any(|(a, b)| !(a < b)) {
        return Err(Error::Config("constraint violated: `lo` must be below `hi` in every coordinate".into()));
    }
    if c.forcing == ForcingSpec::Manufactured && c.is_random_u0() {
        return Err(Error::Config("constraint violated: `forcing = manufactured` needs a closed-form `u0`".into()));
    }
    if c.convergence.taus.iter().any(|t| step_count(*t, c.convergence.time_t).is_err()) {
        return Err(Error::Config("constraint violated: `time_T` must be a multiple of every entry of `taus`".into()));
    }
    if step_count(c.convergence.space_tau, c.convergence.space_t).is_err() {
        return Err(Error::Config("constraint violated: `space_T` must be a multiple of `space_tau`".into()));
    }
    Ok(c)
}

pub fn read_config(path: &std::path::Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text)
}
