//! Line-oriented `section.key = value` run configuration.
//!
//! Blank lines and `#` comments are ignored. Every key outside the table
//! below is rejected, and all problems are reported together.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use spme_core::ergodic::{EnsembleConfig, Functional};
use spme_core::model::{Phi, Psi};
use spme_core::{InitialCondition, NoiseProfile, NoiseSpec, NonlinearitySpec, Scheme, SimConfig};

/// Every recognized key with its default (`None` = required).
const KEYS: &[(&str, Option<&str>)] = &[
    ("run.seed", Some("0")),
    ("run.out", Some("spme-out")),
    ("run.jobs", Some("0")),
    ("run.experiments", Some("")),
    ("operator.n_modes", Some("64")),
    ("operator.grid_size", Some("512")),
    ("model.r", None),
    ("model.psi", Some("odd_power")),
    ("model.psi_coeff", Some("1")),
    ("model.psi_alpha", Some("0")),
    ("model.phi", Some("zero")),
    ("model.phi_beta", Some("0")),
    ("noise.profile", Some("zero")),
    ("noise.c", Some("1")),
    ("noise.a", Some("1")),
    ("noise.q", Some("")),
    ("noise.matrix", Some("")),
    ("sim.dt", Some("1e-4")),
    ("sim.t_end", Some("1")),
    ("sim.scheme", Some("tamed_em")),
    ("sim.record_every", Some("100")),
    ("sim.initial", Some("e1")),
    ("sim.record_modes", Some("0")),
    ("sim.snapshot_times", Some("")),
    ("sim.gate_override", Some("false")),
    ("couple.initial_x", Some("e1")),
    ("couple.initial_y", Some("-1.0*e1")),
    ("couple.refine", Some("false")),
    ("couple.tolerance", Some("0.1")),
    ("ergodic.n_traj", Some("100")),
    ("ergodic.burn_in", Some("1")),
    ("ergodic.sample_times", Some("linspace:0.1:2:20")),
    ("ergodic.initials", Some("zero e1 10.0*e1")),
    ("ergodic.functionals", Some("h_norm,tanh_h_norm,coord1,lrp1_power")),
    ("ergodic.fit_window", Some("")),
    ("ergodic.moment_stability", Some("false")),
    ("ergodic.time_average_t_end", Some("0")),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Experiment {
    Verify,
    Simulate,
    Couple,
    Ergodic,
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Verify => "verify",
            Experiment::Simulate => "simulate",
            Experiment::Couple => "couple",
            Experiment::Ergodic => "ergodic",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "verify" => Some(Experiment::Verify),
            "simulate" => Some(Experiment::Simulate),
            "couple" => Some(Experiment::Couple),
            "ergodic" => Some(Experiment::Ergodic),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimSection {
    pub dt: f64,
    pub t_end: f64,
    pub scheme: Scheme,
    pub record_every: usize,
    pub initial: InitialCondition,
    pub record_modes: usize,
    pub snapshot_times: Vec<f64>,
    pub gate_override: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoupleSection {
    pub initial_x: InitialCondition,
    pub initial_y: InitialCondition,
    pub refine: bool,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErgodicSection {
    pub n_traj: usize,
    pub burn_in: f64,
    pub sample_times: Vec<f64>,
    pub initials: Vec<InitialCondition>,
    pub functionals: Vec<Functional>,
    pub fit_window: Option<(f64, f64)>,
    pub moment_stability: bool,
    pub time_average_t_end: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub out: PathBuf,
    /// 0 means "decide at run time".
    pub jobs: usize,
    pub experiments: Vec<Experiment>,
    pub n_modes: usize,
    pub grid_size: usize,
    pub model: NonlinearitySpec,
    pub noise: NoiseProfile,
    pub sim: SimSection,
    pub couple: CoupleSection,
    pub ergodic: ErgodicSection,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigIssue {
    pub line: Option<usize>,
    pub key: String,
    pub message: String,
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) if self.key.is_empty() => write!(f, "line {l}: {}", self.message),
            Some(l) => write!(f, "line {l}: {}: {}", self.key, self.message),
            None => write!(f, "{}: {}", self.key, self.message),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub issues: Vec<ConfigIssue>,
}

impl ConfigError {
    pub fn keys(&self) -> Vec<&str> {
        self.issues.iter().map(|i| i.key.as_str()).collect()
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, issue) in self.issues.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{issue}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigError {}

/// Parsed configuration plus the keys that fell back to their defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct Parsed {
    pub config: RunConfig,
    pub defaulted: Vec<(&'static str, &'static str)>,
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    parse_config_with_defaults(text).map(|p| p.config)
}

/// Comma-separated times, or `linspace:<a>:<b>:<n>`, or
/// `geomspace:<a>:<b>:<n>`. The result must be finite, nonnegative and
/// strictly increasing.
pub fn parse_sample_times(text: &str) -> Result<Vec<f64>, String> {
    let text = text.trim();
    if text.is_empty() {
        return Ok(Vec::new());
    }
    let times = if let Some(rest) = text.strip_prefix("linspace:").or_else(|| text.strip_prefix("geomspace:")) {
        let geometric = text.starts_with("geomspace:");
        let parts: Vec<&str> = rest.split(':').collect();
        if parts.len() != 3 {
            return Err("expected <start>:<end>:<count>".into());
        }
        let a = parse_f64(parts[0])?;
        let b = parse_f64(parts[1])?;
        let n: usize = parts[2].trim().parse().map_err(|_| format!("bad count `{}`", parts[2]))?;
        if n < 2 || n > 1_000_000 {
            return Err("count must lie in 2..=1000000".into());
        }
        if !(b > a) {
            return Err("end must exceed start".into());
        }
        if geometric && !(a > 0.0) {
            return Err("geomspace start must be positive".into());
        }
        (0..n)
            .map(|i| {
                let f = i as f64 / (n - 1) as f64;
                if i == n - 1 {
                    b
                } else if geometric {
                    a * (b / a).powf(f)
                } else {
                    a + (b - a) * f
                }
            })
            .collect::<Vec<_>>()
    } else {
        text.split(',').map(parse_f64).collect::<Result<Vec<_>, _>>()?
    };
    if times.iter().any(|t| *t < 0.0) {
        return Err("times must be nonnegative".into());
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err("times must be strictly increasing".into());
    }
    Ok(times)
}

fn parse_f64(s: &str) -> Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("`{}` is not a number", s.trim()))?;
    if !v.is_finite() {
        return Err(format!("`{}` is not finite", s.trim()));
    }
    Ok(v)
}

fn parse_bool(s: &str) -> Result<bool, String> {
    match s {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(format!("expected true or false, got `{s}`")),
    }
}

fn parse_list(s: &str) -> Result<Vec<f64>, String> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',').map(parse_f64).collect()
}

struct Reader<'a> {
    values: BTreeMap<&'a str, (usize, &'a str)>,
    issues: Vec<ConfigIssue>,
    defaulted: Vec<(&'static str, &'static str)>,
}

impl<'a> Reader<'a> {
    fn raw(&mut self, key: &'static str) -> Option<(Option<usize>, &'a str)> {
        if let Some(&(line, v)) = self.values.get(key) {
            return Some((Some(line), v));
        }
        let default = KEYS.iter().find(|(k, _)| *k == key).and_then(|(_, d)| *d);
        match default {
            Some(d) => {
                self.defaulted.push((key, d));
                Some((None, d))
            }
            None => {
                self.issues.push(ConfigIssue {
                    line: None,
                    key: key.to_string(),
                    message: "required key is missing".into(),
                });
                None
            }
        }
    }

    fn get<T>(&mut self, key: &'static str, parse: impl FnOnce(&str) -> Result<T, String>) -> Option<T> {
        let (line, raw) = self.raw(key)?;
        match parse(raw) {
            Ok(v) => Some(v),
            Err(message) => {
                self.issues.push(ConfigIssue {
                    line,
                    key: key.to_string(),
                    message,
                });
                None
            }
        }
    }

    fn fail(&mut self, key: &'static str, message: impl Into<String>) {
        let line = self.values.get(key).map(|(l, _)| *l);
        self.issues.push(ConfigIssue {
            line,
            key: key.to_string(),
            message: message.into(),
        });
    }
}

fn positive(s: &str) -> Result<f64, String> {
    let v = parse_f64(s)?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err(format!("must be positive, got {v}"))
    }
}

fn nonnegative(s: &str) -> Result<f64, String> {
    let v = parse_f64(s)?;
    if v >= 0.0 {
        Ok(v)
    } else {
        Err(format!("must be nonnegative, got {v}"))
    }
}

fn count(s: &str) -> Result<usize, String> {
    s.parse().map_err(|_| format!("`{s}` is not a nonnegative integer"))
}

fn positive_count(s: &str) -> Result<usize, String> {
    match count(s)? {
        0 => Err("must be positive".into()),
        n => Ok(n),
    }
}

pub fn parse_config_with_defaults(text: &str) -> Result<Parsed, ConfigError> {
    let mut values = BTreeMap::new();
    let mut issues = Vec::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw_line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            issues.push(ConfigIssue {
                line: Some(line_no),
                key: String::new(),
                message: format!("expected `section.key = value`, got `{line}`"),
            });
            continue;
        };
        let (key, value) = (key.trim(), value.trim());
        if !KEYS.iter().any(|(k, _)| *k == key) {
            issues.push(ConfigIssue {
                line: Some(line_no),
                key: key.to_string(),
                message: "unknown key".into(),
            });
            continue;
        }
        if let Some((first, _)) = values.insert(key, (line_no, value)) {
            issues.push(ConfigIssue {
                line: Some(line_no),
                key: key.to_string(),
                message: format!("duplicate key (first set on line {first})"),
            });
        }
    }
    let mut rd = Reader {
        values,
        issues,
        defaulted: Vec::new(),
    };

    let seed = rd.get("run.seed", |s| s.parse::<u64>().map_err(|_| format!("`{s}` is not a u64")));
    let out = rd.get("run.out", |s| {
        if s.is_empty() {
            Err("must not be empty".to_string())
        } else {
            Ok(PathBuf::from(s))
        }
    });
    let jobs = rd.get("run.jobs", count);
    let experiments = rd.get("run.experiments", |s| {
        let mut v = Vec::new();
        for name in s.split(',').map(str::trim).filter(|n| !n.is_empty()) {
            let e = Experiment::parse(name).ok_or_else(|| format!("unknown experiment `{name}`"))?;
            if !v.contains(&e) {
                v.push(e);
            }
        }
        Ok(v)
    });
    let n_modes = rd.get("operator.n_modes", positive_count);
    let grid_size = rd.get("operator.grid_size", positive_count);
    if let (Some(n), Some(g)) = (n_modes, grid_size) {
        if g < n {
            rd.fail("operator.grid_size", format!("must be at least n_modes ({n})"));
        }
    }

    let r = rd.get("model.r", |s| {
        let r = parse_f64(s)?;
        if r > 1.0 {
            Ok(r)
        } else {
            Err("r must exceed 1".to_string())
        }
    });
    let coeff = rd.get("model.psi_coeff", parse_f64);
    let alpha = rd.get("model.psi_alpha", parse_f64);
    let psi = rd.get("model.psi", |s| match s {
        "odd_power" | "linear_plus_odd_power" | "linear" => Ok(s.to_string()),
        _ => Err(format!("unknown psi `{s}` (odd_power, linear_plus_odd_power, linear)")),
    });
    let beta = rd.get("model.phi_beta", parse_f64);
    let phi = rd.get("model.phi", |s| match s {
        "zero" | "scaled_identity" | "bounded_lipschitz" => Ok(s.to_string()),
        _ => Err(format!("unknown phi `{s}` (zero, scaled_identity, bounded_lipschitz)")),
    });
    let mut model = None;
    if let (Some(r), Some(coeff), Some(alpha), Some(psi), Some(beta), Some(phi)) = (r, coeff, alpha, psi, beta, phi) {
        let psi = match psi.as_str() {
            "odd_power" => Psi::OddPower { coeff },
            "linear_plus_odd_power" => Psi::LinearPlusOddPower { alpha, coeff },
            _ => Psi::Linear { alpha },
        };
        let phi = match phi.as_str() {
            "zero" => Phi::Zero,
            "scaled_identity" => Phi::ScaledIdentity { beta },
            _ => Phi::BoundedLipschitz { beta },
        };
        match NonlinearitySpec::new(r, psi, phi) {
            Ok(m) => model = Some(m),
            Err(e) => rd.fail("model.r", e.to_string()),
        }
    }

    let c = rd.get("noise.c", parse_f64);
    let a = rd.get("noise.a", parse_f64);
    let q = rd.get("noise.q", parse_list);
    let matrix = rd.get("noise.matrix", |s| {
        if s.trim().is_empty() {
            return Ok(Vec::new());
        }
        s.split(';').map(parse_list).collect::<Result<Vec<_>, _>>()
    });
    let profile_name = rd.get("noise.profile", |s| match s {
        "zero" | "diagonal_power" | "explicit_diagonal" | "full_matrix" => Ok(s.to_string()),
        _ => Err(format!("unknown noise profile `{s}` (zero, diagonal_power, explicit_diagonal, full_matrix)")),
    });
    let mut noise = None;
    if let (Some(p), Some(c), Some(a), Some(q), Some(matrix)) = (profile_name, c, a, q, matrix) {
        let profile = match p.as_str() {
            "zero" => NoiseProfile::Zero,
            "diagonal_power" => NoiseProfile::DiagonalPower { c, a },
            "explicit_diagonal" => NoiseProfile::ExplicitDiagonal(q),
            _ => NoiseProfile::FullMatrix(matrix),
        };
        match NoiseSpec::new(profile.clone(), 0) {
            Ok(_) => noise = Some(profile),
            Err(e) => rd.fail("noise.profile", e.to_string()),
        }
    }

    let dt = rd.get("sim.dt", positive);
    let t_end = rd.get("sim.t_end", positive);
    if let (Some(dt), Some(t_end)) = (dt, t_end) {
        if dt > t_end {
            rd.fail("sim.dt", format!("dt ({dt}) exceeds t_end ({t_end})"));
        }
    }
    let scheme = rd.get("sim.scheme", |s| s.parse::<Scheme>());
    let record_every = rd.get("sim.record_every", positive_count);
    let initial = rd.get("sim.initial", |s| s.parse::<InitialCondition>());
    let record_modes = rd.get("sim.record_modes", count);
    let snapshot_times = rd.get("sim.snapshot_times", parse_sample_times);
    let gate_override = rd.get("sim.gate_override", parse_bool);

    let initial_x = rd.get("couple.initial_x", |s| s.parse::<InitialCondition>());
    let initial_y = rd.get("couple.initial_y", |s| s.parse::<InitialCondition>());
    let refine = rd.get("couple.refine", parse_bool);
    let tolerance = rd.get("couple.tolerance", nonnegative);

    let n_traj = rd.get("ergodic.n_traj", |s| match count(s)? {
        n if n >= 2 => Ok(n),
        _ => Err("need at least 2 trajectories".to_string()),
    });
    let burn_in = rd.get("ergodic.burn_in", nonnegative);
    let sample_times = rd.get("ergodic.sample_times", |s| {
        let t = parse_sample_times(s)?;
        if t.is_empty() {
            Err("at least one sample time is required".to_string())
        } else {
            Ok(t)
        }
    });
    let initials = rd.get("ergodic.initials", |s| {
        let v = s
            .split_whitespace()
            .map(|p| p.parse::<InitialCondition>())
            .collect::<Result<Vec<_>, _>>()?;
        if v.is_empty() {
            Err("at least one initial preset is required".to_string())
        } else {
            Ok(v)
        }
    });
    let functionals = rd.get("ergodic.functionals", |s| {
        let v = s
            .split(',')
            .map(|p| p.parse::<Functional>())
            .collect::<Result<Vec<_>, _>>()?;
        Ok(v)
    });
    let fit_window = rd.get("ergodic.fit_window", |s| {
        if s.trim().is_empty() {
            return Ok(None);
        }
        let v = parse_list(s)?;
        match v[..] {
            [lo, hi] if hi > lo && lo >= 0.0 => Ok(Some((lo, hi))),
            _ => Err("expected `<lo>,<hi>` with 0 <= lo < hi".to_string()),
        }
    });
    let moment_stability = rd.get("ergodic.moment_stability", parse_bool);
    let time_average_t_end = rd.get("ergodic.time_average_t_end", nonnegative);

    if !rd.issues.is_empty() {
        return Err(ConfigError { issues: rd.issues });
    }
    let config = RunConfig {
        seed: seed.unwrap(),
        out: out.unwrap(),
        jobs: jobs.unwrap(),
        experiments: experiments.unwrap(),
        n_modes: n_modes.unwrap(),
        grid_size: grid_size.unwrap(),
        model: model.unwrap(),
        noise: noise.unwrap(),
        sim: SimSection {
            dt: dt.unwrap(),
            t_end: t_end.unwrap(),
            scheme: scheme.unwrap(),
            record_every: record_every.unwrap(),
            initial: initial.unwrap(),
            record_modes: record_modes.unwrap(),
            snapshot_times: snapshot_times.unwrap(),
            gate_override: gate_override.unwrap(),
        },
        couple: CoupleSection {
            initial_x: initial_x.unwrap(),
            initial_y: initial_y.unwrap(),
            refine: refine.unwrap(),
            tolerance: tolerance.unwrap(),
        },
        ergodic: ErgodicSection {
            n_traj: n_traj.unwrap(),
            burn_in: burn_in.unwrap(),
            sample_times: sample_times.unwrap(),
            initials: initials.unwrap(),
            functionals: functionals.unwrap(),
            fit_window: fit_window.unwrap(),
            moment_stability: moment_stability.unwrap(),
            time_average_t_end: time_average_t_end.unwrap(),
        },
    };
    Ok(Parsed {
        config,
        defaulted: rd.defaulted,
    })
}

fn join_f64(v: &[f64], sep: &str) -> String {
    v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(sep)
}

impl RunConfig {
    /// Text that parses back to an identical config.
    pub fn to_text(&self) -> String {
        let (psi, coeff, alpha) = match self.model.psi {
            Psi::OddPower { coeff } => ("odd_power", coeff, 0.0),
            Psi::LinearPlusOddPower { alpha, coeff } => ("linear_plus_odd_power", coeff, alpha),
            Psi::Linear { alpha } => ("linear", 1.0, alpha),
        };
        let (phi, beta) = match self.model.phi {
            Phi::ScaledIdentity { beta } => ("scaled_identity", beta),
            Phi::BoundedLipschitz { beta } => ("bounded_lipschitz", beta),
            _ => ("zero", 0.0),
        };
        let (profile, c, a, q, matrix) = match &self.noise {
            NoiseProfile::Zero => ("zero", 1.0, 1.0, String::new(), String::new()),
            NoiseProfile::DiagonalPower { c, a } => ("diagonal_power", *c, *a, String::new(), String::new()),
            NoiseProfile::ExplicitDiagonal(q) => ("explicit_diagonal", 1.0, 1.0, join_f64(q, ","), String::new()),
            NoiseProfile::FullMatrix(m) => (
                "full_matrix",
                1.0,
                1.0,
                String::new(),
                m.iter().map(|row| join_f64(row, ",")).collect::<Vec<_>>().join(";"),
            ),
        };
        let e = &self.ergodic;
        let lines = [
            format!("run.seed = {}", self.seed),
            format!("run.out = {}", self.out.display()),
            format!("run.jobs = {}", self.jobs),
            format!(
                "run.experiments = {}",
                self.experiments.iter().map(|e| e.name()).collect::<Vec<_>>().join(",")
            ),
            format!("operator.n_modes = {}", self.n_modes),
            format!("operator.grid_size = {}", self.grid_size),
            format!("model.r = {:?}", self.model.r()),
            format!("model.psi = {psi}"),
            format!("model.psi_coeff = {coeff:?}"),
            format!("model.psi_alpha = {alpha:?}"),
            format!("model.phi = {phi}"),
            format!("model.phi_beta = {beta:?}"),
            format!("noise.profile = {profile}"),
            format!("noise.c = {c:?}"),
            format!("noise.a = {a:?}"),
            format!("noise.q = {q}"),
            format!("noise.matrix = {matrix}"),
            format!("sim.dt = {:?}", self.sim.dt),
            format!("sim.t_end = {:?}", self.sim.t_end),
            format!("sim.scheme = {}", self.sim.scheme.name()),
            format!("sim.record_every = {}", self.sim.record_every),
            format!("sim.initial = {}", self.sim.initial),
            format!("sim.record_modes = {}", self.sim.record_modes),
            format!("sim.snapshot_times = {}", join_f64(&self.sim.snapshot_times, ",")),
            format!("sim.gate_override = {}", self.sim.gate_override),
            format!("couple.initial_x = {}", self.couple.initial_x),
            format!("couple.initial_y = {}", self.couple.initial_y),
            format!("couple.refine = {}", self.couple.refine),
            format!("couple.tolerance = {:?}", self.couple.tolerance),
            format!("ergodic.n_traj = {}", e.n_traj),
            format!("ergodic.burn_in = {:?}", e.burn_in),
            format!("ergodic.sample_times = {}", join_f64(&e.sample_times, ",")),
            format!(
                "ergodic.initials = {}",
                e.initials.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(" ")
            ),
            format!(
                "ergodic.functionals = {}",
                e.functionals.iter().map(|f| f.to_string()).collect::<Vec<_>>().join(",")
            ),
            format!(
                "ergodic.fit_window = {}",
                e.fit_window.map(|(a, b)| format!("{a:?},{b:?}")).unwrap_or_default()
            ),
            format!("ergodic.moment_stability = {}", e.moment_stability),
            format!("ergodic.time_average_t_end = {:?}", e.time_average_t_end),
        ];
        let mut s = lines.join("\n");
        s.push('\n');
        s
    }

    pub fn noise_spec(&self) -> NoiseSpec {
        NoiseSpec::new(self.noise.clone(), self.seed).expect("validated at parse time")
    }

    pub fn sim_config(&self) -> Result<SimConfig, spme_core::SimError> {
        let mut c = SimConfig::new(self.model, self.noise_spec(), self.sim.t_end)?
            .with_resolution(self.n_modes, self.grid_size)?;
        c.dt = self.sim.dt;
        c.scheme = self.sim.scheme;
        c.record_every = self.sim.record_every;
        c.initial = self.sim.initial.clone();
        c.record_modes = self.sim.record_modes;
        c.snapshot_times = self.sim.snapshot_times.clone();
        c.gate_override = self.sim.gate_override;
        Ok(c)
    }

    pub fn ensemble_config(&self, jobs: usize) -> Result<EnsembleConfig, spme_core::SimError> {
        let mut base = self.sim_config()?;
        let e = &self.ergodic;
        base.t_end = base.t_end.max(*e.sample_times.last().unwrap_or(&base.t_end));
        let mut ec = EnsembleConfig::new(base, e.n_traj, e.sample_times.clone());
        ec.burn_in = e.burn_in;
        ec.initial_set = e.initials.clone();
        ec.functionals = e.functionals.clone();
        ec.fit_window = e.fit_window;
        ec.jobs = jobs;
        Ok(ec)
    }
}
