//! Ensemble Monte Carlo for the transition semigroup `P_t F(x) = E F(X_t(x))`.
//!
//! Trajectory `j` of every initial preset is driven by noise stream `j`, so
//! ensembles from different initial data are coupled path by path. Work
//! items are independent and results are gathered in index order, which
//! keeps reports bit-reproducible for any number of worker threads.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::basis::{lp_power, OperatorSpec};
use crate::bounds::{fit_exp_rate, fit_power_law, BoundsError, RateFit};
use crate::model::{certify, gate_hypotheses};
use crate::rng::StreamKey;
use crate::solver::{InitialCondition, Propagator, SimConfig, SimError};

/// Clip level of the coordinate functional.
pub const DEFAULT_CLIP: f64 = 1e6;
/// Largest tolerated fraction of blown-up trajectories.
pub const MAX_EXCLUDED_FRACTION: f64 = 0.01;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ErgodicError {
    #[error("invalid ensemble config: {0}")]
    Config(String),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("{excluded} of {total} trajectories blew up (limit 1%)")]
    TooManyBlowUps { excluded: usize, total: usize },
    #[error("no sample time after burn-in {0}")]
    InsufficientSamples(f64),
    #[error("need at least two usable trajectories, have {0}")]
    TooFewTrajectories(usize),
    #[error(transparent)]
    Fit(#[from] BoundsError),
    #[error("could not build worker pool: {0}")]
    Pool(String),
}

/// Observable evaluated on the state coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Functional {
    /// `‖x‖_H`
    HNorm,
    /// `min(⟨x, e₁⟩_H λ₁^{1/2}, M)`
    ClippedCoordinate { clip: f64 },
    /// `tanh ‖x‖_H`
    TanhHNorm,
    /// `‖x‖_H²`, not Lipschitz
    HNormSq,
    /// `⟨x, e₁⟩²` in L² coefficients, not Lipschitz
    ModeOneSq,
    /// `‖x‖_{r+1}^{r+1}`, not Lipschitz
    Lrp1Power,
}

impl Functional {
    pub fn lipschitz(&self) -> Option<f64> {
        match self {
            Functional::HNorm | Functional::ClippedCoordinate { .. } | Functional::TanhHNorm => Some(1.0),
            _ => None,
        }
    }

    pub fn eval(&self, op: &OperatorSpec, r: f64, coeffs: &[f64], scratch: &mut [f64]) -> f64 {
        match self {
            Functional::HNorm => op.h_norm(coeffs),
            Functional::ClippedCoordinate { clip } => (coeffs[0] / op.lambda_1().sqrt()).min(*clip),
            Functional::TanhHNorm => op.h_norm(coeffs).tanh(),
            Functional::HNormSq => op.h_norm_sq(coeffs),
            Functional::ModeOneSq => coeffs[0] * coeffs[0],
            Functional::Lrp1Power => {
                op.synth_into(coeffs, scratch);
                lp_power(scratch, r + 1.0).unwrap_or(f64::NAN)
            }
        }
    }
}

impl fmt::Display for Functional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Functional::HNorm => write!(f, "h_norm"),
            Functional::ClippedCoordinate { clip } if *clip == DEFAULT_CLIP => write!(f, "coord1"),
            Functional::ClippedCoordinate { clip } => write!(f, "coord1:{clip:?}"),
            Functional::TanhHNorm => write!(f, "tanh_h_norm"),
            Functional::HNormSq => write!(f, "h_norm_sq"),
            Functional::ModeOneSq => write!(f, "mode1_sq"),
            Functional::Lrp1Power => write!(f, "lrp1_power"),
        }
    }
}

impl FromStr for Functional {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim() {
            "h_norm" => Ok(Functional::HNorm),
            "coord1" => Ok(Functional::ClippedCoordinate { clip: DEFAULT_CLIP }),
            "tanh_h_norm" => Ok(Functional::TanhHNorm),
            "h_norm_sq" => Ok(Functional::HNormSq),
            "mode1_sq" => Ok(Functional::ModeOneSq),
            "lrp1_power" => Ok(Functional::Lrp1Power),
            other => {
                if let Some(c) = other.strip_prefix("coord1:") {
                    let clip: f64 = c.parse().map_err(|_| format!("bad clip level `{c}`"))?;
                    if !(clip > 0.0) || !clip.is_finite() {
                        return Err("clip level must be positive".into());
                    }
                    return Ok(Functional::ClippedCoordinate { clip });
                }
                Err(format!("unknown functional `{other}`"))
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct EnsembleConfig {
    pub base: SimConfig,
    pub n_traj: usize,
    pub burn_in: f64,
    pub sample_times: Vec<f64>,
    pub initial_set: Vec<InitialCondition>,
    pub functionals: Vec<Functional>,
    /// Window of the mixing-gap fit; `None` uses `[0.5, t_max]` for power
    /// laws and `[1, t_max]` for exponential rates.
    pub fit_window: Option<(f64, f64)>,
    /// Stream offset, so that `stream_id = first_stream + j`.
    pub first_stream: u64,
    pub jobs: usize,
}

impl EnsembleConfig {
    pub fn new(base: SimConfig, n_traj: usize, sample_times: Vec<f64>) -> Self {
        Self {
            base,
            n_traj,
            burn_in: 1.0,
            sample_times,
            initial_set: vec![InitialCondition::Zero],
            functionals: vec![Functional::HNorm],
            fit_window: None,
            first_stream: 0,
            jobs: 1,
        }
    }

    pub fn validate(&self) -> Result<(), ErgodicError> {
        self.base.validate()?;
        if self.n_traj < 2 {
            return Err(ErgodicError::Config("n_traj must be at least 2".into()));
        }
        if self.sample_times.is_empty() {
            return Err(ErgodicError::Config("sample_times is empty".into()));
        }
        if self.sample_times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            return Err(ErgodicError::Config("sample times must be finite and nonnegative".into()));
        }
        if self.sample_times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(ErgodicError::Config("sample_times must be increasing".into()));
        }
        let steps: Vec<u64> = self.sample_steps();
        if steps.windows(2).any(|w| w[1] == w[0]) {
            return Err(ErgodicError::Config("two sample times fall on the same step".into()));
        }
        if self.initial_set.is_empty() {
            return Err(ErgodicError::Config("initial_set is empty".into()));
        }
        if self.functionals.is_empty() {
            return Err(ErgodicError::Config("no functionals".into()));
        }
        if !(self.burn_in >= 0.0) {
            return Err(ErgodicError::Config("burn_in must be nonnegative".into()));
        }
        Ok(())
    }

    fn sample_steps(&self) -> Vec<u64> {
        self.sample_times
            .iter()
            .map(|t| (t / self.base.dt).round() as u64)
            .collect()
    }

    /// Initial preset used as the reference for `μ̂`: the zero preset if
    /// present, else the first.
    pub fn reference_initial(&self) -> usize {
        self.initial_set
            .iter()
            .position(|x| *x == InitialCondition::Zero)
            .unwrap_or(0)
    }
}

/// Raw samples. `values[((i·n_traj + j)·n_times + k)·n_func + f]` holds
/// functional `f` at sample time `k` on trajectory `j` from initial `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSamples {
    pub sample_times: Vec<f64>,
    pub n_initials: usize,
    pub n_traj: usize,
    pub functionals: Vec<Functional>,
    pub values: Vec<f64>,
    /// `valid[i·n_traj + j]` is false for blown-up trajectories.
    pub valid: Vec<bool>,
    /// Coefficients at the last sample time (empty for excluded runs).
    pub final_states: Vec<Vec<f64>>,
    pub excluded: usize,
}

impl EnsembleSamples {
    pub fn get(&self, init: usize, traj: usize, time: usize, func: usize) -> f64 {
        let nt = self.sample_times.len();
        let nf = self.functionals.len();
        self.values[((init * self.n_traj + traj) * nt + time) * nf + func]
    }

    pub fn is_valid(&self, init: usize, traj: usize) -> bool {
        self.valid[init * self.n_traj + traj]
    }

    /// Trajectory indices usable for every initial (keeps the coupling).
    pub fn usable(&self) -> Vec<usize> {
        (0..self.n_traj)
            .filter(|&j| (0..self.n_initials).all(|i| self.is_valid(i, j)))
            .collect()
    }

    pub fn func_index(&self, f: Functional) -> Option<usize> {
        self.functionals.iter().position(|g| *g == f)
    }
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool, ErgodicError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| ErgodicError::Pool(e.to_string()))
}

struct RunOutput {
    values: Vec<f64>,
    valid: bool,
    final_state: Vec<f64>,
}

fn run_one(config: &EnsembleConfig, init: &InitialCondition, key: StreamKey, steps: &[u64]) -> Result<RunOutput, SimError> {
    let base = &config.base;
    let op = Arc::clone(&base.operator);
    let r = base.model.r();
    let x0 = init.to_field(&op)?;
    let mut prop = Propagator::new(base, key, vec![x0])?;
    let nf = config.functionals.len();
    let mut values = Vec::with_capacity(steps.len() * nf);
    let mut scratch = vec![0.0; op.grid_size()];
    for &target in steps {
        while prop.step_index() < target {
            if prop.advance().is_err() {
                return Ok(RunOutput {
                    values: vec![f64::NAN; steps.len() * nf],
                    valid: false,
                    final_state: Vec::new(),
                });
            }
        }
        let coeffs = &prop.states()[0].coeffs;
        for f in &config.functionals {
            values.push(f.eval(&op, r, coeffs, &mut scratch));
        }
    }
    Ok(RunOutput {
        values,
        valid: true,
        final_state: prop.states()[0].coeffs.to_vec(),
    })
}

/// Run `n_traj` trajectories from every initial preset. Trajectory `j` uses
/// stream `first_stream + j` regardless of the preset.
pub fn run_ensemble(config: &EnsembleConfig) -> Result<EnsembleSamples, ErgodicError> {
    config.validate()?;
    let steps = config.sample_steps();
    let seed = config.base.noise.master_seed;
    let n_init = config.initial_set.len();
    let items: Vec<(usize, usize)> = (0..n_init)
        .flat_map(|i| (0..config.n_traj).map(move |j| (i, j)))
        .collect();
    let outputs: Vec<Result<RunOutput, SimError>> = pool(config.jobs)?.install(|| {
        items
            .par_iter()
            .map(|&(i, j)| {
                let key = StreamKey::new(seed, config.first_stream + j as u64);
                run_one(config, &config.initial_set[i], key, &steps)
            })
            .collect()
    });
    let mut values = Vec::with_capacity(items.len() * steps.len() * config.functionals.len());
    let mut valid = Vec::with_capacity(items.len());
    let mut final_states = Vec::with_capacity(items.len());
    for out in outputs {
        let out = out?;
        values.extend(out.values);
        valid.push(out.valid);
        final_states.push(out.final_state);
    }
    let excluded = valid.iter().filter(|v| !**v).count();
    if excluded as f64 > MAX_EXCLUDED_FRACTION * valid.len() as f64 {
        return Err(ErgodicError::TooManyBlowUps {
            excluded,
            total: valid.len(),
        });
    }
    Ok(EnsembleSamples {
        sample_times: config.sample_times.clone(),
        n_initials: n_init,
        n_traj: config.n_traj,
        functionals: config.functionals.clone(),
        values,
        valid,
        final_states,
        excluded,
    })
}

/// Mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub std_err: f64,
    pub count: usize,
}

impl Estimate {
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let std_err = if n > 1 {
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        } else {
            f64::INFINITY
        };
        Self {
            mean,
            std_err,
            count: n,
        }
    }
}

/// Per-initial, per-time ensemble means `P̂_t F(x)`: `[init][time]`.
pub fn ptf_estimates(samples: &EnsembleSamples, func: usize) -> Vec<Vec<Estimate>> {
    let usable = samples.usable();
    (0..samples.n_initials)
        .map(|i| {
            (0..samples.sample_times.len())
                .map(|k| {
                    let xs: Vec<f64> = usable.iter().map(|&j| samples.get(i, j, k, func)).collect();
                    Estimate::from_samples(&xs)
                })
                .collect()
        })
        .collect()
}

/// Estimate `μ(F)` from the reference initial: each trajectory's average
/// over the post-burn-in sample times is one batch, and the standard error
/// is taken across these independent batches.
pub fn estimate_invariant(samples: &EnsembleSamples, burn_in: f64, reference: usize) -> Result<Vec<Estimate>, ErgodicError> {
    let times: Vec<usize> = (0..samples.sample_times.len())
        .filter(|&k| samples.sample_times[k] >= burn_in)
        .collect();
    if times.is_empty() {
        return Err(ErgodicError::InsufficientSamples(burn_in));
    }
    let usable: Vec<usize> = (0..samples.n_traj).filter(|&j| samples.is_valid(reference, j)).collect();
    if usable.len() < 2 {
        return Err(ErgodicError::TooFewTrajectories(usable.len()));
    }
    Ok((0..samples.functionals.len())
        .map(|f| {
            let batches: Vec<f64> = usable
                .iter()
                .map(|&j| times.iter().map(|&k| samples.get(reference, j, k, f)).sum::<f64>() / times.len() as f64)
                .collect();
            Estimate::from_samples(&batches)
        })
        .collect())
}

/// Single-trajectory time average of `functional` over `(burn_in, t_end]`,
/// sampled every step, with a batch-means standard error over `n_batches`
/// equal blocks.
pub fn time_average(
    base: &SimConfig,
    functional: Functional,
    key: StreamKey,
    burn_in: f64,
    t_end: f64,
    n_batches: usize,
) -> Result<Estimate, ErgodicError> {
    if !(t_end > burn_in) || n_batches < 2 {
        return Err(ErgodicError::Config("time average needs t_end > burn_in and two batches".into()));
    }
    let op = Arc::clone(&base.operator);
    let r = base.model.r();
    let x0 = base.initial.to_field(&op)?;
    let mut prop = Propagator::new(base, key, vec![x0])?;
    let start = (burn_in / base.dt).round() as u64;
    let end = (t_end / base.dt).round() as u64;
    let per_batch = (end - start) / n_batches as u64;
    if per_batch == 0 {
        return Err(ErgodicError::InsufficientSamples(burn_in));
    }
    let mut scratch = vec![0.0; op.grid_size()];
    while prop.step_index() < start {
        prop.advance().map_err(SimError::from)?;
    }
    let mut batches = Vec::with_capacity(n_batches);
    for _ in 0..n_batches {
        let mut acc = 0.0;
        for _ in 0..per_batch {
            prop.advance().map_err(SimError::from)?;
            acc += functional.eval(&op, r, &prop.states()[0].coeffs, &mut scratch);
        }
        batches.push(acc / per_batch as f64);
    }
    Ok(Estimate::from_samples(&batches))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    PowerLaw,
    Exponential,
}

/// Largest disagreement between two initial presets at the last sample
/// time, against the combined standard error of the two estimates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Uniqueness {
    pub max_diff: f64,
    pub combined_se: f64,
    pub pair: (usize, usize),
}

impl Uniqueness {
    pub fn within(&self, k: f64) -> bool {
        self.max_diff < k * self.combined_se
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentEstimate {
    pub estimate: f64,
    pub std_err: f64,
    /// Whether a run with doubled resolution agreed within 10%.
    pub stable: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalReport {
    pub functional: Functional,
    pub mu: Estimate,
    /// Value the mixing gap is measured against: `P̂_{t_max}F` of the
    /// reference initial.
    pub mu_reference: f64,
    /// `[init][time]`
    pub ptf: Vec<Vec<Estimate>>,
    /// `[init][time]`: `|P̂_t F(x) − μ̂(F)|`
    pub gaps: Vec<Vec<f64>>,
    /// Max over initials per time.
    pub max_gap: Vec<f64>,
    pub fit: Option<Result<RateFit, BoundsError>>,
    pub uniqueness: Uniqueness,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErgodicReport {
    pub sample_times: Vec<f64>,
    pub initials: Vec<InitialCondition>,
    pub regime: Regime,
    pub fit_window: (f64, f64),
    pub functionals: Vec<FunctionalReport>,
    pub moment: Option<MomentEstimate>,
    pub excluded: usize,
    pub total: usize,
}

fn uniqueness(ptf: &[Vec<Estimate>]) -> Uniqueness {
    let last = ptf[0].len() - 1;
    let mut best = Uniqueness {
        max_diff: 0.0,
        combined_se: 0.0,
        pair: (0, 0),
    };
    let mut first = true;
    for a in 0..ptf.len() {
        for b in a + 1..ptf.len() {
            let (x, y) = (ptf[a][last], ptf[b][last]);
            let diff = (x.mean - y.mean).abs();
            if first || diff > best.max_diff {
                best = Uniqueness {
                    max_diff: diff,
                    combined_se: (x.std_err.powi(2) + y.std_err.powi(2)).sqrt(),
                    pair: (a, b),
                };
                first = false;
            }
        }
    }
    best
}

/// Build the report from finished samples.
pub fn analyze(config: &EnsembleConfig, samples: &EnsembleSamples, regime: Regime) -> Result<ErgodicReport, ErgodicError> {
    let reference = config.reference_initial();
    let mu = estimate_invariant(samples, config.burn_in, reference)?;
    let t_max = *samples.sample_times.last().expect("validated nonempty");
    let window = config.fit_window.unwrap_or(match regime {
        Regime::PowerLaw => (0.5, t_max),
        Regime::Exponential => (1.0, t_max),
    });
    let mut reports = Vec::with_capacity(samples.functionals.len());
    for (f, &functional) in samples.functionals.iter().enumerate() {
        let ptf = ptf_estimates(samples, f);
        let mu_reference = ptf[reference].last().expect("nonempty").mean;
        let gaps: Vec<Vec<f64>> = ptf
            .iter()
            .map(|row| row.iter().map(|e| (e.mean - mu_reference).abs()).collect())
            .collect();
        let max_gap: Vec<f64> = (0..samples.sample_times.len())
            .map(|k| gaps.iter().map(|g| g[k]).fold(0.0, f64::max))
            .collect();
        let fit = functional.lipschitz().map(|_| match regime {
            Regime::PowerLaw => fit_power_law(&samples.sample_times, &max_gap, window),
            Regime::Exponential => fit_exp_rate(&samples.sample_times, &max_gap, window),
        });
        let uniqueness = uniqueness(&ptf);
        reports.push(FunctionalReport {
            functional,
            mu: mu[f],
            mu_reference,
            ptf,
            gaps,
            max_gap,
            fit,
            uniqueness,
        });
    }
    let moment = samples
        .func_index(Functional::Lrp1Power)
        .map(|f| moment_from(&mu[f]));
    Ok(ErgodicReport {
        sample_times: samples.sample_times.clone(),
        initials: config.initial_set.clone(),
        regime,
        fit_window: window,
        functionals: reports,
        moment,
        excluded: samples.excluded,
        total: samples.valid.len(),
    })
}

/// Run the ensemble and analyze it. The regime follows the hypothesis
/// gate: exponential when it passes with `σ > δ`, power law otherwise.
/// With a single preset the uniqueness diagnostic is trivially zero.
pub fn mixing_experiment(config: &EnsembleConfig) -> Result<ErgodicReport, ErgodicError> {
    let samples = run_ensemble(config)?;
    analyze(config, &samples, regime_of(&config.base))
}

pub fn regime_of(base: &SimConfig) -> Regime {
    let lambda_1 = base.operator.lambda_1();
    let trace = base.noise.trace(&base.operator).value();
    match certify(&base.model, lambda_1) {
        Ok(k) if gate_hypotheses(&k, base.model.r(), trace).exponential_regime => Regime::Exponential,
        _ => Regime::PowerLaw,
    }
}

fn moment_from(e: &Estimate) -> MomentEstimate {
    MomentEstimate {
        estimate: e.mean,
        std_err: e.std_err,
        stable: None,
    }
}

/// Post-burn-in estimate of `μ(‖·‖_{r+1}^{r+1})` from the reference initial.
pub fn moment_check(samples: &EnsembleSamples, burn_in: f64, reference: usize) -> Result<MomentEstimate, ErgodicError> {
    let f = samples
        .func_index(Functional::Lrp1Power)
        .ok_or_else(|| ErgodicError::Config("lrp1_power was not recorded".into()))?;
    let mu = estimate_invariant(samples, burn_in, reference)?;
    Ok(moment_from(&mu[f]))
}

/// Relative change below which a moment estimate counts as resolved.
pub const MOMENT_STABILITY_TOLERANCE: f64 = 0.1;

/// Moment estimate at the configured resolution and with modes and grid
/// doubled, on the same noise streams.
pub fn moment_stability(config: &EnsembleConfig) -> Result<(MomentEstimate, MomentEstimate), ErgodicError> {
    let mut cfg = config.clone();
    if !cfg.functionals.contains(&Functional::Lrp1Power) {
        cfg.functionals.push(Functional::Lrp1Power);
    }
    let reference = cfg.reference_initial();
    let coarse = moment_check(&run_ensemble(&cfg)?, cfg.burn_in, reference)?;
    let op = &cfg.base.operator;
    cfg.base = cfg
        .base
        .clone()
        .with_resolution(op.n_modes() * 2, op.grid_size() * 2)?;
    let mut fine = moment_check(&run_ensemble(&cfg)?, cfg.burn_in, reference)?;
    let scale = coarse.estimate.abs().max(fine.estimate.abs());
    let stable = scale == 0.0 || (coarse.estimate - fine.estimate).abs() / scale < MOMENT_STABILITY_TOLERANCE;
    let coarse = MomentEstimate {
        stable: Some(stable),
        ..coarse
    };
    fine.stable = Some(stable);
    Ok((coarse, fine))
}

/// Largest `|F(x) − F(y)| / (𝓛(F)‖x − y‖_H)` over `pairs` random pairs of
/// `states`, for every Lipschitz functional.
pub fn lipschitz_spot_check(
    op: &OperatorSpec,
    r: f64,
    functionals: &[Functional],
    states: &[Vec<f64>],
    pairs: usize,
    seed: u64,
) -> Vec<(Functional, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut scratch = vec![0.0; op.grid_size()];
    functionals
        .iter()
        .filter_map(|f| f.lipschitz().map(|l| (f, l)))
        .map(|(f, l)| {
            let mut worst = 0.0f64;
            if states.len() >= 2 {
                for _ in 0..pairs {
                    let a = rng.random_range(0..states.len());
                    let b = rng.random_range(0..states.len());
                    let d = op.h_distance(&states[a], &states[b]);
                    if d > 0.0 {
                        let fa = f.eval(op, r, &states[a], &mut scratch);
                        let fb = f.eval(op, r, &states[b], &mut scratch);
                        worst = worst.max((fa - fb).abs() / (l * d));
                    }
                }
            }
            (*f, worst)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::NonlinearitySpec;
    use crate::noise::{NoiseProfile, NoiseSpec};

    fn base(noise: NoiseSpec) -> SimConfig {
        let mut c = SimConfig::new(NonlinearitySpec::cubic(), noise, 1.0)
            .unwrap()
            .with_resolution(8, 64)
            .unwrap();
        c.dt = 1e-3;
        c
    }

    fn noisy() -> NoiseSpec {
        NoiseSpec::new(NoiseProfile::DiagonalPower { c: 0.5, a: 1.0 }, 11).unwrap()
    }

    fn ensemble(noise: NoiseSpec, n_traj: usize) -> EnsembleConfig {
        let mut e = EnsembleConfig::new(base(noise), n_traj, vec![0.1, 0.2, 0.5, 1.0, 1.5, 2.0]);
        e.initial_set = vec![InitialCondition::Zero, InitialCondition::e1(), InitialCondition::HNorm(1.0)];
        e.functionals = vec![
            Functional::HNorm,
            Functional::TanhHNorm,
            Functional::ClippedCoordinate { clip: DEFAULT_CLIP },
            Functional::Lrp1Power,
        ];
        e
    }

    #[test]
    fn functional_text_roundtrip() {
        for s in ["h_norm", "coord1", "coord1:5.0", "tanh_h_norm", "h_norm_sq", "mode1_sq", "lrp1_power"] {
            let f: Functional = s.parse().unwrap();
            assert_eq!(f.to_string(), s);
        }
        assert!("coord1:-1".parse::<Functional>().is_err());
        assert!("l2".parse::<Functional>().is_err());
    }

    #[test]
    fn deterministic_flow_gives_identical_trajectories() {
        let samples = run_ensemble(&ensemble(NoiseSpec::zero(), 3)).unwrap();
        for i in 0..3 {
            for k in 0..6 {
                for f in 0..4 {
                    assert_eq!(samples.get(i, 0, k, f), samples.get(i, 2, k, f));
                }
            }
        }
    }

    #[test]
    fn zero_noise_invariant_measure_is_dirac_at_zero() {
        let e = ensemble(NoiseSpec::zero(), 2);
        let s = run_ensemble(&e).unwrap();
        let mu = estimate_invariant(&s, 1.0, 0).unwrap();
        for m in &mu {
            assert_eq!(m.mean, 0.0);
        }
        assert_eq!(moment_check(&s, 1.0, 0).unwrap().estimate, 0.0);
    }

    #[test]
    fn forced_equal_streams_are_identical() {
        let mut e = ensemble(noisy(), 2);
        e.initial_set = vec![InitialCondition::e1()];
        let a = run_ensemble(&e).unwrap();
        e.first_stream = 1;
        e.n_traj = 2;
        let b = run_ensemble(&e).unwrap();
        // trajectory 1 of the first run and trajectory 0 of the second share stream 1
        for k in 0..6 {
            for f in 0..4 {
                assert_eq!(a.get(0, 1, k, f), b.get(0, 0, k, f));
            }
        }
    }

    #[test]
    fn reproducible_for_any_job_count() {
        let mut e = ensemble(noisy(), 6);
        let a = mixing_experiment(&e).unwrap();
        e.jobs = 3;
        let b = mixing_experiment(&e).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn identical_presets_have_no_gap() {
        let mut e = ensemble(noisy(), 8);
        e.initial_set = vec![InitialCondition::e1(), InitialCondition::e1()];
        let rep = mixing_experiment(&e).unwrap();
        for f in &rep.functionals {
            assert_eq!(f.uniqueness.max_diff, 0.0);
            assert!(f.gaps[0].iter().zip(&f.gaps[1]).all(|(a, b)| a == b));
        }
    }

    #[test]
    fn invariant_estimates_are_sane() {
        let e = ensemble(noisy(), 16);
        let s = run_ensemble(&e).unwrap();
        let mu = estimate_invariant(&s, 1.0, 0).unwrap();
        assert!(mu.iter().all(|m| m.mean.is_finite() && m.std_err >= 0.0));
        assert!(mu[3].mean > 0.0);
        assert!(matches!(estimate_invariant(&s, 5.0, 0), Err(ErgodicError::InsufficientSamples(_))));
    }

    #[test]
    fn lipschitz_constants_hold_on_sampled_states() {
        let e = ensemble(noisy(), 16);
        let s = run_ensemble(&e).unwrap();
        let op = &e.base.operator;
        let checks = lipschitz_spot_check(op, 3.0, &e.functionals, &s.final_states, 1000, 5);
        assert_eq!(checks.len(), 3);
        for (f, ratio) in checks {
            assert!(ratio <= 1.0 + 1e-12, "{f}: {ratio}");
        }
    }

    #[test]
    fn config_validation() {
        let mut e = ensemble(noisy(), 1);
        assert!(e.validate().is_err());
        e.n_traj = 2;
        e.sample_times = vec![0.5, 0.2];
        assert!(e.validate().is_err());
        e.sample_times = vec![0.1, 0.1001];
        assert!(e.validate().is_err());
    }
}
