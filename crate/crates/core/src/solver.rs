//! Time stepping of the Galerkin system
//!
//! ```text
//! da_i = −λ_i m(e_i Ψ(X)) dt + m(e_i Φ(X)) dt + q_i dB^i,   X = Σ_k a_k e_k
//! ```
//!
//! The drift is evaluated pseudo-spectrally: synthesize `X` on the
//! quadrature grid, apply `Ψ` and `Φ` pointwise, project back.
//!
//! Each step of size `dt` consumes one noise vector drawn from the
//! trajectory's counter-based stream at that step index. Under the tamed
//! scheme the drift is additionally sub-stepped so that every sub-step
//! satisfies `h · λ_n · sup|Ψ′(X)| ≤ 1`; the step's noise increment is
//! spread evenly over its sub-steps. Degenerate diffusion makes the
//! stiffness proportional to `|X|^{r−1}`, so the sub-step count falls as the
//! solution decays.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::basis::{lp_power, OperatorSpec, SpectralField};
use crate::model::NonlinearitySpec;
use crate::noise::{NoiseSampler, NoiseSpec};
use crate::rng::StreamKey;

/// Stability number targeted by each tamed sub-step.
pub const SUBSTEP_CFL: f64 = 1.0;
/// Bound `dt · λ_n (1 + sup|Ψ′|)` enforced by the explicit scheme.
pub const EXPLICIT_GUARD: f64 = 0.1;
/// A single step needing more sub-steps than this is reported as blow-up.
pub const MAX_SUBSTEPS: u64 = 1 << 24;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("invalid simulation config: {0}")]
    Config(String),
    #[error("grid of {grid_size} nodes cannot dealias degree-{r} products of {n_modes} modes (need {required})")]
    Dealiasing {
        grid_size: usize,
        n_modes: usize,
        r: f64,
        required: usize,
    },
    #[error("increment vector has {actual} entries, expected {expected}")]
    IncrementSize { expected: usize, actual: usize },
    #[error(transparent)]
    BlowUp(#[from] BlowUp),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlowUpReason {
    NonFinite,
    StabilityGuard,
    SubstepLimit,
}

/// Abort of a trajectory at time `t`.
#[derive(Debug, Error, Clone, Copy, PartialEq)]
#[error("blow-up at t = {t}: {reason:?}")]
pub struct BlowUp {
    pub t: f64,
    pub reason: BlowUpReason,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    ExplicitEm,
    TamedEm,
}

impl Scheme {
    pub fn name(&self) -> &'static str {
        match self {
            Scheme::ExplicitEm => "explicit_em",
            Scheme::TamedEm => "tamed_em",
        }
    }
}

impl FromStr for Scheme {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "explicit_em" => Ok(Scheme::ExplicitEm),
            "tamed_em" => Ok(Scheme::TamedEm),
            other => Err(format!("unknown scheme `{other}`")),
        }
    }
}

/// Initial data presets.
///
/// Text form: `zero`, `e<k>`, `<scale>*e<k>`, `hnorm:<v>` (`e₁` scaled to
/// H-norm `v`), `random:<seed>:<modes>:<hnorm>` (band-limited random
/// coefficients with the given H-norm), `coeffs:<a1>,<a2>,...`.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialCondition {
    Zero,
    Mode { k: usize, scale: f64 },
    HNorm(f64),
    RandomBand { seed: u64, modes: usize, h_norm: f64 },
    Coeffs(Vec<f64>),
}

impl InitialCondition {
    pub fn e1() -> Self {
        InitialCondition::Mode { k: 1, scale: 1.0 }
    }

    pub fn to_field(&self, operator: &OperatorSpec) -> Result<SpectralField, SimError> {
        let n = operator.n_modes();
        let mut a = vec![0.0; n];
        match self {
            InitialCondition::Zero => {}
            InitialCondition::Mode { k, scale } => {
                if *k == 0 || *k > n {
                    return Err(SimError::Config(format!("initial mode e{k} outside 1..={n}")));
                }
                a[k - 1] = *scale;
            }
            InitialCondition::HNorm(v) => a[0] = v * operator.lambda_1().sqrt(),
            InitialCondition::RandomBand {
                seed,
                modes,
                h_norm,
            } => {
                let m = (*modes).min(n);
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                for (k, ak) in a.iter_mut().take(m).enumerate() {
                    *ak = rng.random_range(-1.0..1.0) / (k as f64 + 1.0);
                }
                let cur = operator.h_norm(&a);
                if cur > 0.0 {
                    a.iter_mut().for_each(|x| *x *= h_norm / cur);
                }
            }
            InitialCondition::Coeffs(c) => {
                if c.len() > n {
                    return Err(SimError::Config(format!(
                        "{} initial coefficients for {n} modes",
                        c.len()
                    )));
                }
                a[..c.len()].copy_from_slice(c);
            }
        }
        if a.iter().any(|x| !x.is_finite()) {
            return Err(SimError::Config("initial data is not finite".into()));
        }
        Ok(SpectralField(a))
    }
}

impl fmt::Display for InitialCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitialCondition::Zero => write!(f, "zero"),
            InitialCondition::Mode { k, scale } if *scale == 1.0 => write!(f, "e{k}"),
            InitialCondition::Mode { k, scale } => write!(f, "{scale:?}*e{k}"),
            InitialCondition::HNorm(v) => write!(f, "hnorm:{v:?}"),
            InitialCondition::RandomBand {
                seed,
                modes,
                h_norm,
            } => write!(f, "random:{seed}:{modes}:{h_norm:?}"),
            InitialCondition::Coeffs(c) => {
                write!(f, "coeffs:")?;
                for (i, v) in c.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{v:?}")?;
                }
                Ok(())
            }
        }
    }
}

fn parse_finite(s: &str) -> Result<f64, String> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| format!("`{s}` is not a number"))?;
    if !v.is_finite() {
        return Err(format!("`{s}` is not finite"));
    }
    Ok(v)
}

fn parse_mode(s: &str) -> Result<usize, String> {
    let k = s
        .strip_prefix('e')
        .ok_or_else(|| format!("expected e<k>, got `{s}`"))?;
    let k: usize = k.parse().map_err(|_| format!("bad mode index in `{s}`"))?;
    if k == 0 {
        return Err("mode index starts at 1".into());
    }
    Ok(k)
}

impl FromStr for InitialCondition {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        if s == "zero" {
            return Ok(InitialCondition::Zero);
        }
        if let Some(v) = s.strip_prefix("hnorm:") {
            let v = parse_finite(v)?;
            if v < 0.0 {
                return Err("hnorm must be nonnegative".into());
            }
            return Ok(InitialCondition::HNorm(v));
        }
        if let Some(rest) = s.strip_prefix("random:") {
            let parts: Vec<&str> = rest.split(':').collect();
            if parts.len() != 3 {
                return Err("expected random:<seed>:<modes>:<hnorm>".into());
            }
            let seed = parts[0].parse().map_err(|_| "bad random seed".to_string())?;
            let modes = parts[1].parse().map_err(|_| "bad random mode count".to_string())?;
            let h_norm = parse_finite(parts[2])?;
            if h_norm < 0.0 {
                return Err("hnorm must be nonnegative".into());
            }
            return Ok(InitialCondition::RandomBand {
                seed,
                modes,
                h_norm,
            });
        }
        if let Some(rest) = s.strip_prefix("coeffs:") {
            let c = rest
                .split(',')
                .map(parse_finite)
                .collect::<Result<Vec<_>, _>>()?;
            return Ok(InitialCondition::Coeffs(c));
        }
        if let Some((scale, mode)) = s.split_once('*') {
            return Ok(InitialCondition::Mode {
                k: parse_mode(mode.trim())?,
                scale: parse_finite(scale)?,
            });
        }
        Ok(InitialCondition::Mode {
            k: parse_mode(s)?,
            scale: 1.0,
        })
    }
}

/// Spectral state at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct GalerkinState {
    pub t: f64,
    pub coeffs: SpectralField,
}

impl GalerkinState {
    pub fn new(coeffs: SpectralField) -> Self {
        Self { t: 0.0, coeffs }
    }
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub operator: Arc<OperatorSpec>,
    pub model: NonlinearitySpec,
    pub noise: NoiseSpec,
    pub dt: f64,
    pub t_end: f64,
    pub scheme: Scheme,
    pub record_every: usize,
    pub initial: InitialCondition,
    /// Number of leading modes copied into each record row.
    pub record_modes: usize,
    /// Times at which the full coefficient vector is kept.
    pub snapshot_times: Vec<f64>,
    /// Run even if the hypothesis gate fails (negative and linear tests).
    pub gate_override: bool,
}

impl SimConfig {
    /// Default resolution: 64 modes, 512 nodes, `dt = 1e−4`, tamed scheme.
    pub fn new(model: NonlinearitySpec, noise: NoiseSpec, t_end: f64) -> Result<Self, SimError> {
        let operator = OperatorSpec::dirichlet(64, 512).map_err(|e| SimError::Config(e.to_string()))?;
        Ok(Self {
            operator: Arc::new(operator),
            model,
            noise,
            dt: 1e-4,
            t_end,
            scheme: Scheme::TamedEm,
            record_every: 100,
            initial: InitialCondition::e1(),
            record_modes: 0,
            snapshot_times: Vec::new(),
            gate_override: false,
        })
    }

    pub fn with_resolution(mut self, n_modes: usize, grid_size: usize) -> Result<Self, SimError> {
        self.operator = Arc::new(
            OperatorSpec::dirichlet(n_modes, grid_size).map_err(|e| SimError::Config(e.to_string()))?,
        );
        Ok(self)
    }

    pub fn n_steps(&self) -> u64 {
        (self.t_end / self.dt).round() as u64
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(SimError::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(SimError::Config(format!("t_end must be positive, got {}", self.t_end)));
        }
        if self.dt > self.t_end {
            return Err(SimError::Config("dt exceeds t_end".into()));
        }
        if self.record_every == 0 {
            return Err(SimError::Config("record_every must be positive".into()));
        }
        check_dealiasing(&self.operator, self.model.r())
    }

    fn system(&self) -> GalerkinSystem {
        GalerkinSystem {
            operator: Arc::clone(&self.operator),
            model: self.model,
        }
    }
}

/// Grid size needed to dealias degree-`r` products of `n` modes.
pub fn dealiasing_grid(n_modes: usize, r: f64) -> usize {
    (2.0 * (r + 1.0) * n_modes as f64).ceil() as usize
}

pub fn check_dealiasing(operator: &OperatorSpec, r: f64) -> Result<(), SimError> {
    let required = dealiasing_grid(operator.n_modes(), r);
    if operator.grid_size() < required {
        return Err(SimError::Dealiasing {
            grid_size: operator.grid_size(),
            n_modes: operator.n_modes(),
            r,
            required,
        });
    }
    Ok(())
}

/// Scratch buffers for one state; never shared between workers.
#[derive(Debug, Clone)]
pub struct Workspace {
    values: Vec<f64>,
    pointwise: Vec<f64>,
    projected: Vec<f64>,
    drift: Vec<f64>,
}

impl Workspace {
    pub fn new(operator: &OperatorSpec) -> Self {
        Self {
            values: vec![0.0; operator.grid_size()],
            pointwise: vec![0.0; operator.grid_size()],
            projected: vec![0.0; operator.n_modes()],
            drift: vec![0.0; operator.n_modes()],
        }
    }

    pub fn drift(&self) -> &[f64] {
        &self.drift
    }

    /// Grid values from the last drift evaluation.
    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Operator and nonlinearity: everything needed to evaluate the drift.
#[derive(Debug, Clone)]
pub struct GalerkinSystem {
    pub operator: Arc<OperatorSpec>,
    pub model: NonlinearitySpec,
}

impl GalerkinSystem {
    pub fn new(operator: Arc<OperatorSpec>, model: NonlinearitySpec) -> Self {
        Self { operator, model }
    }

    /// Pseudo-spectral drift `b_i = −λ_i⟨Ψ(X)⟩_i + ⟨Φ(X)⟩_i` into
    /// `ws.drift`. Returns `max |X|` on the grid.
    pub fn drift_into(&self, coeffs: &[f64], ws: &mut Workspace) -> f64 {
        let op = &*self.operator;
        op.synth_into(coeffs, &mut ws.values);
        let mut max_abs = 0.0f64;
        for (p, &v) in ws.pointwise.iter_mut().zip(&ws.values) {
            max_abs = max_abs.max(v.abs());
            *p = self.model.psi(v);
        }
        op.analyze_into(&ws.pointwise, &mut ws.projected);
        for ((d, p), l) in ws.drift.iter_mut().zip(&ws.projected).zip(op.eigenvalues()) {
            *d = -l * p;
        }
        if !self.model.phi.is_zero() {
            for (p, &v) in ws.pointwise.iter_mut().zip(&ws.values) {
                *p = self.model.phi(v);
            }
            op.analyze_into(&ws.pointwise, &mut ws.projected);
            for (d, p) in ws.drift.iter_mut().zip(&ws.projected) {
                *d += p;
            }
        }
        if max_abs.is_nan() {
            f64::INFINITY
        } else {
            max_abs
        }
    }

    pub fn drift(&self, state: &GalerkinState) -> Result<Vec<f64>, SimError> {
        check_len(self.operator.n_modes(), state.coeffs.len())?;
        let mut ws = Workspace::new(&self.operator);
        self.drift_into(&state.coeffs, &mut ws);
        if ws.drift.iter().any(|d| !d.is_finite()) {
            return Err(BlowUp {
                t: state.t,
                reason: BlowUpReason::NonFinite,
            }
            .into());
        }
        Ok(ws.drift)
    }

    /// Linearized stiffness `λ_n sup|Ψ′(X)| + |Φ′|` for a field with
    /// `max |X| = max_abs`.
    pub fn stiffness(&self, max_abs: f64) -> f64 {
        let psi_prime = self.model.sup_psi_prime(&[max_abs]);
        let (c1, c2) = self.model.phi.increment_constants();
        let phi_prime = c2 + c1 * self.model.r() * max_abs.powf(self.model.r() - 1.0);
        self.operator.lambda_max() * psi_prime + phi_prime
    }

    /// One step of the chosen scheme:
    /// explicit `a ← a + b dt + ΔW`, tamed `a ← a + b dt/(1 + dt|b|₂) + ΔW`.
    pub fn step(
        &self,
        state: &GalerkinState,
        dt: f64,
        increments: &[f64],
        scheme: Scheme,
    ) -> Result<GalerkinState, SimError> {
        let n = self.operator.n_modes();
        check_len(n, state.coeffs.len())?;
        if increments.len() != n {
            return Err(SimError::IncrementSize {
                expected: n,
                actual: increments.len(),
            });
        }
        let mut ws = Workspace::new(&self.operator);
        self.drift_into(&state.coeffs, &mut ws);
        let mut next = state.clone();
        apply_update(&mut next.coeffs, &ws.drift, dt, increments, 1.0, scheme);
        next.t = state.t + dt;
        if !next.coeffs.is_finite() {
            return Err(BlowUp {
                t: next.t,
                reason: BlowUpReason::NonFinite,
            }
            .into());
        }
        Ok(next)
    }
}

fn check_len(expected: usize, actual: usize) -> Result<(), SimError> {
    if expected != actual {
        return Err(SimError::Config(format!(
            "state has {actual} coefficients, operator has {expected} modes"
        )));
    }
    Ok(())
}

#[inline]
fn apply_update(
    coeffs: &mut [f64],
    drift: &[f64],
    h: f64,
    increments: &[f64],
    noise_fraction: f64,
    scheme: Scheme,
) {
    let factor = match scheme {
        Scheme::ExplicitEm => h,
        Scheme::TamedEm => {
            let norm = drift.iter().map(|b| b * b).sum::<f64>().sqrt();
            h / (1.0 + h * norm)
        }
    };
    if noise_fraction == 1.0 {
        for ((a, b), w) in coeffs.iter_mut().zip(drift).zip(increments) {
            *a += factor * b + w;
        }
    } else {
        for ((a, b), w) in coeffs.iter_mut().zip(drift).zip(increments) {
            *a += factor * b + noise_fraction * w;
        }
    }
}

/// A group of states driven by one noise stream with a common sub-step
/// schedule. A single trajectory is a group of one; the coupled pair is a
/// group of two, so their difference sees no noise at all.
pub struct Propagator {
    system: GalerkinSystem,
    sampler: NoiseSampler,
    key: StreamKey,
    scheme: Scheme,
    dt: f64,
    step: u64,
    states: Vec<GalerkinState>,
    work: Vec<Workspace>,
    increments: Vec<f64>,
    drift_evals: u64,
}

impl Propagator {
    pub fn new(config: &SimConfig, key: StreamKey, initial: Vec<SpectralField>) -> Result<Self, SimError> {
        config.validate()?;
        let n = config.operator.n_modes();
        for f in &initial {
            check_len(n, f.len())?;
        }
        let work = initial.iter().map(|_| Workspace::new(&config.operator)).collect();
        Ok(Self {
            system: config.system(),
            sampler: config.noise.sampler(n),
            key,
            scheme: config.scheme,
            dt: config.dt,
            step: 0,
            states: initial.into_iter().map(GalerkinState::new).collect(),
            work,
            increments: vec![0.0; n],
            drift_evals: 0,
        })
    }

    pub fn states(&self) -> &[GalerkinState] {
        &self.states
    }

    pub fn step_index(&self) -> u64 {
        self.step
    }

    pub fn system(&self) -> &GalerkinSystem {
        &self.system
    }

    pub fn drift_evaluations(&self) -> u64 {
        self.drift_evals
    }

    pub fn time(&self) -> f64 {
        self.step as f64 * self.dt
    }

    /// Advance every state by one step `dt`.
    pub fn advance(&mut self) -> Result<(), BlowUp> {
        let t0 = self.time();
        let t1 = (self.step + 1) as f64 * self.dt;
        if !self.sampler.is_zero() {
            let mut rng = self.key.at_step(self.step);
            self.sampler
                .sample_into(self.dt, &mut rng, &mut self.increments)
                .expect("dt validated positive");
        }
        let mut max_abs = 0.0f64;
        for (s, ws) in self.states.iter().zip(self.work.iter_mut()) {
            max_abs = max_abs.max(self.system.drift_into(&s.coeffs, ws));
        }
        self.drift_evals += self.states.len() as u64;
        let stiffness = self.system.stiffness(max_abs);
        if !stiffness.is_finite() {
            return Err(BlowUp {
                t: t0,
                reason: BlowUpReason::NonFinite,
            });
        }
        let substeps = match self.scheme {
            Scheme::ExplicitEm => {
                let guard = self.dt * (self.system.operator.lambda_max() * (1.0 + self.system.model.sup_psi_prime(&[max_abs])));
                if guard > EXPLICIT_GUARD {
                    return Err(BlowUp {
                        t: t0,
                        reason: BlowUpReason::StabilityGuard,
                    });
                }
                1
            }
            Scheme::TamedEm => {
                let m = (self.dt * stiffness / SUBSTEP_CFL).ceil().max(1.0);
                if m > MAX_SUBSTEPS as f64 {
                    return Err(BlowUp {
                        t: t0,
                        reason: BlowUpReason::SubstepLimit,
                    });
                }
                m as u64
            }
        };
        let h = self.dt / substeps as f64;
        let fraction = 1.0 / substeps as f64;
        for sub in 0..substeps {
            for (s, ws) in self.states.iter_mut().zip(self.work.iter_mut()) {
                if sub > 0 {
                    self.system.drift_into(&s.coeffs, ws);
                }
                apply_update(&mut s.coeffs, &ws.drift, h, &self.increments, fraction, self.scheme);
            }
            if sub > 0 {
                self.drift_evals += self.states.len() as u64;
            }
        }
        self.step += 1;
        for s in self.states.iter_mut() {
            s.t = t1;
            if !s.coeffs.is_finite() {
                return Err(BlowUp {
                    t: t1,
                    reason: BlowUpReason::NonFinite,
                });
            }
        }
        Ok(())
    }
}

/// Norm time series of one trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    pub h_norms: Vec<f64>,
    pub l2_norms: Vec<f64>,
    /// `‖X‖_{r+1}^{r+1}`
    pub lrp1_powers: Vec<f64>,
    /// Leading `record_modes` coefficients per row.
    pub modes: Vec<Vec<f64>>,
    pub snapshots: Vec<GalerkinState>,
    pub scheme: Scheme,
    pub master_seed: u64,
    pub stream_id: u64,
    pub blow_up: Option<BlowUp>,
    pub drift_evaluations: u64,
}

impl TrajectoryRecord {
    fn new(config: &SimConfig, key: StreamKey) -> Self {
        Self {
            times: Vec::new(),
            h_norms: Vec::new(),
            l2_norms: Vec::new(),
            lrp1_powers: Vec::new(),
            modes: Vec::new(),
            snapshots: Vec::new(),
            scheme: config.scheme,
            master_seed: key.master_seed,
            stream_id: key.stream_id,
            blow_up: None,
            drift_evaluations: 0,
        }
    }

    fn push(&mut self, operator: &OperatorSpec, r: f64, state: &GalerkinState, record_modes: usize, scratch: &mut [f64]) {
        operator.synth_into(&state.coeffs, scratch);
        self.times.push(state.t);
        self.h_norms.push(operator.h_norm(&state.coeffs));
        self.l2_norms.push(state.coeffs.iter().map(|a| a * a).sum::<f64>().sqrt());
        self.lrp1_powers.push(lp_power(scratch, r + 1.0).unwrap_or(f64::NAN));
        if record_modes > 0 {
            let k = record_modes.min(state.coeffs.len());
            self.modes.push(state.coeffs[..k].to_vec());
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

fn is_record_step(step: u64, n_steps: u64, every: u64) -> bool {
    step % every == 0 || step == n_steps
}

fn snapshot_steps(config: &SimConfig) -> Vec<u64> {
    let mut s: Vec<u64> = config
        .snapshot_times
        .iter()
        .map(|t| (t / config.dt).round() as u64)
        .filter(|&k| k <= config.n_steps())
        .collect();
    s.sort_unstable();
    s.dedup();
    s
}

/// Integrate one trajectory from `config.initial` on noise stream `key`.
/// A blow-up stops the run and is flagged on the partial record.
pub fn simulate(config: &SimConfig, key: StreamKey) -> Result<TrajectoryRecord, SimError> {
    let x0 = config.initial.to_field(&config.operator)?;
    let mut prop = Propagator::new(config, key, vec![x0])?;
    let mut rec = TrajectoryRecord::new(config, key);
    let op = Arc::clone(&config.operator);
    let r = config.model.r();
    let n_steps = config.n_steps();
    let every = config.record_every as u64;
    let snaps = snapshot_steps(config);
    let mut scratch = vec![0.0; op.grid_size()];
    loop {
        let step = prop.step_index();
        let state = &prop.states()[0];
        if is_record_step(step, n_steps, every) {
            rec.push(&op, r, state, config.record_modes, &mut scratch);
        }
        if snaps.binary_search(&step).is_ok() {
            rec.snapshots.push(state.clone());
        }
        if step == n_steps {
            break;
        }
        if let Err(b) = prop.advance() {
            rec.blow_up = Some(b);
            break;
        }
    }
    rec.drift_evaluations = prop.drift_evaluations();
    Ok(rec)
}

/// Shared-noise pair and the H-distance on the common time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledRecord {
    pub x: TrajectoryRecord,
    pub y: TrajectoryRecord,
    pub times: Vec<f64>,
    pub distances: Vec<f64>,
    /// Largest one-step increase of `‖X−Y‖_H` relative to `1 + ‖X−Y‖_H`,
    /// tracked over every step (not only recorded ones).
    pub max_step_increase: f64,
}

/// Integrate `X` from `initial_x` and `Y` from `initial_y` with the identical
/// increment sequence and sub-step schedule.
pub fn coupled_simulate(
    config: &SimConfig,
    initial_x: &InitialCondition,
    initial_y: &InitialCondition,
    key: StreamKey,
) -> Result<CoupledRecord, SimError> {
    let op = Arc::clone(&config.operator);
    let x0 = initial_x.to_field(&op)?;
    let y0 = initial_y.to_field(&op)?;
    let mut prop = Propagator::new(config, key, vec![x0, y0])?;
    let mut x = TrajectoryRecord::new(config, key);
    let mut y = TrajectoryRecord::new(config, key);
    let r = config.model.r();
    let n_steps = config.n_steps();
    let every = config.record_every as u64;
    let mut times = Vec::new();
    let mut distances = Vec::new();
    let mut scratch = vec![0.0; op.grid_size()];
    let mut prev = op.h_distance(&prop.states()[0].coeffs, &prop.states()[1].coeffs);
    let mut max_step_increase = f64::NEG_INFINITY;
    loop {
        let step = prop.step_index();
        let [sx, sy] = prop.states() else {
            unreachable!("pair")
        };
        let d = op.h_distance(&sx.coeffs, &sy.coeffs);
        if step > 0 {
            max_step_increase = max_step_increase.max((d - prev) / (1.0 + prev));
        }
        prev = d;
        if is_record_step(step, n_steps, every) {
            x.push(&op, r, sx, config.record_modes, &mut scratch);
            y.push(&op, r, sy, config.record_modes, &mut scratch);
            times.push(sx.t);
            distances.push(d);
        }
        if step == n_steps {
            break;
        }
        if let Err(b) = prop.advance() {
            x.blow_up = Some(b);
            y.blow_up = Some(b);
            break;
        }
    }
    x.drift_evaluations = prop.drift_evaluations() / 2;
    y.drift_evaluations = prop.drift_evaluations() / 2;
    Ok(CoupledRecord {
        x,
        y,
        times,
        distances,
        max_step_increase,
    })
}
