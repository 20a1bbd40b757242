//! Subcommand execution and artifact emission.
//!
//! Each experiment produces an [`Outcome`]: CSV artifacts held in memory,
//! `key = value` index entries and human-readable summary lines. Nothing
//! touches the file system until [`write_outcome`], which writes in a fixed
//! order so identical inputs give identical bytes.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use spme_core::bounds::{contraction_bound, exponential_bound, fit_exp_rate, fit_power_law, BoundParams};
use spme_core::ergodic::{mixing_experiment, moment_stability, time_average, ErgodicError, ErgodicReport, Regime};
use spme_core::model::{certify, gate_hypotheses, AssumptionConstants, Verdict};
use spme_core::solver::{coupled_simulate, simulate, BlowUp, CoupledRecord};
use spme_core::{OperatorSpec, SimError, StreamKey};

use crate::config::{Experiment, RunConfig};

pub const SIMULATE_HEADER: &str = "t,h_norm,l2_norm,lrp1_power";
pub const COUPLE_HEADER: &str = "t,dist_h,bound_poly,bound_exp";
pub const ERGODIC_HEADER: &str = "t,functional,initial,ptf_estimate,std_err,mixing_gap";
pub const VERIFY_HEADER: &str = "eta,sigma,theta,delta,kappa,c,c1,c2,trace_q,gate";

/// Per-step tolerance on growth of the coupled distance.
pub const MONOTONE_TOLERANCE: f64 = 1e-9;

/// Process exit status. Each failure path maps to exactly one code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Status {
    Ok = 0,
    ConfigOrIo = 1,
    GateFailed = 2,
    BoundViolated = 3,
    BlowUp = 4,
}

impl Status {
    pub fn code(self) -> i32 {
        self as i32
    }
}

/// Scientific notation with 17 significant digits, enough to round-trip.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub status: Status,
    /// `(file name, contents)`
    pub files: Vec<(String, String)>,
    pub index: Vec<(String, String)>,
    pub summary: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Self {
            status: Status::Ok,
            files: Vec::new(),
            index: Vec::new(),
            summary: Vec::new(),
        }
    }

    fn entry(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.index.push((key.into(), value.into()));
    }

    fn line(&mut self, s: impl Into<String>) {
        self.summary.push(s.into());
    }

    fn fail(&mut self, status: Status, message: impl Into<String>) {
        let message = message.into();
        if self.status == Status::Ok {
            self.status = status;
        }
        self.entry("failure", format!("{} {}", status.code(), message));
        self.line(format!("FAILURE (exit {}): {message}", status.code()));
    }

    pub fn index_text(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.index {
            let _ = writeln!(s, "{k} = {v}");
        }
        s
    }

    pub fn summary_text(&self) -> String {
        let mut s = String::new();
        for l in &self.summary {
            s.push_str(l);
            s.push('\n');
        }
        s
    }

    pub fn file(&self, name: &str) -> Option<&str> {
        self.files.iter().find(|(n, _)| n == name).map(|(_, c)| c.as_str())
    }
}

/// Write every artifact plus `index.txt` and `summary.txt` into `dir`.
pub fn write_outcome(dir: &Path, outcome: &Outcome) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    for (name, contents) in &outcome.files {
        fs::write(dir.join(name), contents)?;
    }
    fs::write(dir.join("index.txt"), outcome.index_text())?;
    fs::write(dir.join("summary.txt"), outcome.summary_text())?;
    Ok(())
}

struct Gate {
    constants: Option<AssumptionConstants>,
    verdict: Verdict,
    trace: f64,
}

fn gate(cfg: &RunConfig, op: &OperatorSpec) -> Gate {
    let trace = cfg.noise_spec().trace(op).value();
    match certify(&cfg.model, op.lambda_1()) {
        Ok(k) => Gate {
            verdict: gate_hypotheses(&k, cfg.model.r(), trace),
            constants: Some(k),
            trace,
        },
        Err(e) => Gate {
            constants: None,
            verdict: Verdict {
                pass: false,
                reasons: vec![e.to_string()],
                exponential_regime: false,
            },
            trace,
        },
    }
}

fn operator(cfg: &RunConfig, out: &mut Outcome) -> Option<OperatorSpec> {
    match OperatorSpec::dirichlet(cfg.n_modes, cfg.grid_size) {
        Ok(op) => Some(op),
        Err(e) => {
            out.fail(Status::ConfigOrIo, e.to_string());
            None
        }
    }
}

fn gate_entries(out: &mut Outcome, g: &Gate) {
    out.entry("gate", if g.verdict.pass { "pass" } else { "fail" });
    out.entry("gate.exponential_regime", g.verdict.exponential_regime.to_string());
    for r in &g.verdict.reasons {
        out.line(format!("gate: {r}"));
    }
}

/// Check the gate for run subcommands; returns false (and records the
/// failure) when the run must not proceed.
fn require_gate(cfg: &RunConfig, out: &mut Outcome, g: &Gate) -> bool {
    gate_entries(out, g);
    if g.verdict.pass {
        return true;
    }
    if cfg.sim.gate_override {
        out.line("gate failed; continuing because sim.gate_override = true");
        return true;
    }
    out.fail(Status::GateFailed, format!("hypothesis gate failed: {}", g.verdict.reasons.join("; ")));
    false
}

fn sim_error(out: &mut Outcome, e: &SimError) {
    match e {
        SimError::BlowUp(b) => blow_up(out, b),
        other => out.fail(Status::ConfigOrIo, other.to_string()),
    }
}

fn blow_up(out: &mut Outcome, b: &BlowUp) {
    out.entry("blow_up.t", fmt_f64(b.t));
    out.entry("blow_up.reason", format!("{:?}", b.reason));
    out.fail(Status::BlowUp, format!("blow-up at t = {} ({:?})", fmt_f64(b.t), b.reason));
}

pub fn verify(cfg: &RunConfig) -> Outcome {
    let mut out = Outcome::new();
    let Some(op) = operator(cfg, &mut out) else {
        return out;
    };
    let g = gate(cfg, &op);
    gate_entries(&mut out, &g);
    let gate_word = if g.verdict.pass { "pass" } else { "fail" };
    let mut csv = format!("{VERIFY_HEADER}\n");
    match &g.constants {
        Some(k) => {
            let cols = [k.eta, k.sigma, k.theta, k.delta, k.kappa, k.c, k.c1, k.c2, g.trace];
            let names = ["eta", "sigma", "theta", "delta", "kappa", "c", "c1", "c2", "trace_q"];
            for (n, v) in names.iter().zip(cols) {
                csv.push_str(&fmt_f64(v));
                csv.push(',');
                out.entry(*n, fmt_f64(v));
            }
            out.line(format!(
                "eta = {}, sigma = {}, theta = {}, delta = {}, trace_q = {}",
                k.eta, k.sigma, k.theta, k.delta, g.trace
            ));
        }
        None => {
            csv.push_str(",,,,,,,,");
            csv.push_str(&fmt_f64(g.trace));
            csv.push(',');
            out.entry("trace_q", fmt_f64(g.trace));
        }
    }
    csv.push_str(gate_word);
    csv.push('\n');
    out.files.push(("verify.csv".into(), csv));
    out.line(format!("gate: {gate_word}"));
    if !g.verdict.pass {
        out.fail(Status::GateFailed, format!("hypothesis gate failed: {}", g.verdict.reasons.join("; ")));
    }
    out
}

pub fn simulate_cmd(cfg: &RunConfig) -> Outcome {
    let mut out = Outcome::new();
    let Some(op) = operator(cfg, &mut out) else {
        return out;
    };
    let g = gate(cfg, &op);
    if !require_gate(cfg, &mut out, &g) {
        return out;
    }
    let sc = match cfg.sim_config() {
        Ok(c) => c,
        Err(e) => {
            sim_error(&mut out, &e);
            return out;
        }
    };
    let rec = match simulate(&sc, StreamKey::new(cfg.seed, 0)) {
        Ok(r) => r,
        Err(e) => {
            sim_error(&mut out, &e);
            return out;
        }
    };
    let mut csv = String::from(SIMULATE_HEADER);
    let k = cfg.sim.record_modes.min(cfg.n_modes);
    for m in 1..=k {
        let _ = write!(csv, ",mode_{m}");
    }
    csv.push('\n');
    for i in 0..rec.len() {
        let _ = write!(
            csv,
            "{},{},{},{}",
            fmt_f64(rec.times[i]),
            fmt_f64(rec.h_norms[i]),
            fmt_f64(rec.l2_norms[i]),
            fmt_f64(rec.lrp1_powers[i])
        );
        if k > 0 {
            for v in &rec.modes[i] {
                csv.push(',');
                csv.push_str(&fmt_f64(*v));
            }
        }
        csv.push('\n');
    }
    out.files.push(("simulate.csv".into(), csv));
    if !rec.snapshots.is_empty() {
        let mut snap = String::from("t");
        for m in 1..=cfg.n_modes {
            let _ = write!(snap, ",a_{m}");
        }
        snap.push('\n');
        for s in &rec.snapshots {
            snap.push_str(&fmt_f64(s.t));
            for a in s.coeffs.iter() {
                snap.push(',');
                snap.push_str(&fmt_f64(*a));
            }
            snap.push('\n');
        }
        out.files.push(("snapshots.csv".into(), snap));
    }
    out.entry("records", rec.len().to_string());
    out.entry("drift_evaluations", rec.drift_evaluations.to_string());
    if let Some(last) = rec.h_norms.last() {
        out.entry("h_norm.final", fmt_f64(*last));
    }
    let target = -1.0 / (cfg.model.r() - 1.0);
    let window = (0.5, cfg.sim.t_end);
    if cfg.sim.t_end > 0.5 {
        match fit_power_law(&rec.times, &rec.h_norms, window) {
            Ok(f) => {
                out.entry("fit.h_norm.exponent", fmt_f64(f.rate));
                out.entry("fit.h_norm.residual", fmt_f64(f.residual));
                out.line(format!(
                    "h_norm decay exponent on [{}, {}]: {:.4} (the t^(-1/(r-1)) family predicts {:.4})",
                    window.0, window.1, f.rate, target
                ));
            }
            Err(e) => out.line(format!("h_norm power-law fit unavailable: {e}")),
        }
    }
    out.entry("fit.h_norm.target", fmt_f64(target));
    if let Some(b) = rec.blow_up {
        blow_up(&mut out, &b);
    }
    out
}

/// Largest `dist/bound − 1`, floored at zero; infinite if the bound is zero
/// while the distance is not.
pub fn violation_margin(dist: &[f64], bound: &[f64]) -> f64 {
    dist.iter().zip(bound).fold(0.0f64, |m, (d, b)| {
        if *b > 0.0 {
            m.max(d / b - 1.0)
        } else if *d > 0.0 {
            f64::INFINITY
        } else {
            m
        }
    })
}

/// Bound series for a coupled run: `(poly, exp)`.
pub fn coupled_bounds(rec: &CoupledRecord, params: &BoundParams, exponential: bool) -> (Vec<f64>, Option<Vec<f64>>) {
    let z0 = rec.distances.first().copied().unwrap_or(0.0);
    let poly = rec
        .times
        .iter()
        .map(|t| contraction_bound(z0, *t, params).unwrap_or(f64::NAN))
        .collect();
    let exp = exponential.then(|| {
        rec.times
            .iter()
            .map(|t| exponential_bound(z0, *t, params).unwrap_or(f64::NAN))
            .collect()
    });
    (poly, exp)
}

fn couple_csv(rec: &CoupledRecord, poly: &[f64], exp: Option<&[f64]>) -> String {
    let mut csv = format!("{COUPLE_HEADER}\n");
    for i in 0..rec.times.len() {
        let e = exp.map(|e| fmt_f64(e[i])).unwrap_or_default();
        let _ = writeln!(
            csv,
            "{},{},{},{}",
            fmt_f64(rec.times[i]),
            fmt_f64(rec.distances[i]),
            fmt_f64(poly[i]),
            e
        );
    }
    csv
}

pub fn couple(cfg: &RunConfig) -> Outcome {
    let mut out = Outcome::new();
    let Some(op) = operator(cfg, &mut out) else {
        return out;
    };
    let g = gate(cfg, &op);
    if !require_gate(cfg, &mut out, &g) {
        return out;
    }
    let Some(k) = g.constants else {
        out.fail(Status::GateFailed, "no certified constants for the contraction bound");
        return out;
    };
    let params = BoundParams::from_constants(&k, cfg.model.r(), op.lambda_1());
    let exponential = g.verdict.exponential_regime;
    let tol = cfg.couple.tolerance;
    let run = |sc: &spme_core::SimConfig| coupled_simulate(sc, &cfg.couple.initial_x, &cfg.couple.initial_y, StreamKey::new(cfg.seed, 0));

    let sc = match cfg.sim_config() {
        Ok(c) => c,
        Err(e) => {
            sim_error(&mut out, &e);
            return out;
        }
    };
    let rec = match run(&sc) {
        Ok(r) => r,
        Err(e) => {
            sim_error(&mut out, &e);
            return out;
        }
    };
    let (poly, exp) = coupled_bounds(&rec, &params, exponential);
    out.files.push(("couple.csv".into(), couple_csv(&rec, &poly, exp.as_deref())));
    let margin_poly = violation_margin(&rec.distances, &poly);
    let violations = rec
        .distances
        .iter()
        .zip(&poly)
        .filter(|(d, b)| **d > **b * (1.0 + tol))
        .count();
    out.entry("dist.max", fmt_f64(rec.distances.iter().cloned().fold(0.0, f64::max)));
    out.entry("dist.final", fmt_f64(*rec.distances.last().unwrap_or(&0.0)));
    out.entry("bound_poly.margin", fmt_f64(margin_poly));
    out.entry("bound_poly.violations", violations.to_string());
    let max_inc = if rec.max_step_increase.is_finite() {
        rec.max_step_increase
    } else {
        0.0
    };
    out.entry("monotone.max_step_increase", fmt_f64(max_inc));
    out.line(format!(
        "max distance {}; polynomial-bound margin {} with {} violations beyond tolerance {}",
        fmt_f64(rec.distances.iter().cloned().fold(0.0, f64::max)),
        fmt_f64(margin_poly),
        violations,
        tol
    ));
    let mut failed = Vec::new();
    if violations > 0 {
        failed.push(format!("{violations} records exceed the contraction bound by more than {tol}"));
    }
    if max_inc > MONOTONE_TOLERANCE {
        failed.push(format!("distance grew by {} relative in one step", fmt_f64(max_inc)));
    }
    if let Some(exp) = &exp {
        let margin = violation_margin(&rec.distances, exp);
        let v = rec
            .distances
            .iter()
            .zip(exp)
            .filter(|(d, b)| **d > **b * (1.0 + tol))
            .count();
        out.entry("bound_exp.margin", fmt_f64(margin));
        out.entry("bound_exp.violations", v.to_string());
        if v > 0 {
            failed.push(format!("{v} records exceed the exponential bound by more than {tol}"));
        }
        let window = (1.0, cfg.sim.t_end);
        match fit_exp_rate(&rec.times, &rec.distances, window) {
            Ok(f) => {
                out.entry("fit.dist.rate", fmt_f64(f.rate));
                out.entry("fit.dist.target", fmt_f64(-(params.sigma - params.delta)));
                out.line(format!(
                    "fitted exponential rate of the distance on [{}, {}]: {:.4} (bound rate {:.4})",
                    window.0,
                    window.1,
                    f.rate,
                    -(params.sigma - params.delta)
                ));
            }
            Err(e) => out.line(format!("exponential fit unavailable: {e}")),
        }
    }
    if let Some(b) = rec.x.blow_up {
        blow_up(&mut out, &b);
        return out;
    }
    if cfg.couple.refine {
        let mut fine = sc.clone();
        fine.dt /= 2.0;
        fine.record_every *= 2;
        match fine.with_resolution(cfg.n_modes * 2, cfg.grid_size * 2).and_then(|f| run(&f)) {
            Ok(fr) => {
                let (fp, fe) = coupled_bounds(&fr, &params, exponential);
                let fine_margin = violation_margin(&fr.distances, &fp);
                out.files.push(("couple_refined.csv".into(), couple_csv(&fr, &fp, fe.as_deref())));
                out.entry("refined.bound_poly.margin", fmt_f64(fine_margin));
                out.line(format!(
                    "refined margin {} vs default {}",
                    fmt_f64(fine_margin),
                    fmt_f64(margin_poly)
                ));
                if fine_margin > margin_poly {
                    failed.push("violation margin grew under refinement".into());
                }
                if let Some(b) = fr.x.blow_up {
                    blow_up(&mut out, &b);
                    return out;
                }
            }
            Err(e) => {
                sim_error(&mut out, &e);
                return out;
            }
        }
    }
    if !failed.is_empty() {
        out.fail(Status::BoundViolated, failed.join("; "));
    }
    out
}

fn ergodic_csv(rep: &ErgodicReport) -> String {
    let mut csv = format!("{ERGODIC_HEADER}\n");
    for f in &rep.functionals {
        for (i, init) in rep.initials.iter().enumerate() {
            for (k, t) in rep.sample_times.iter().enumerate() {
                let e = f.ptf[i][k];
                let _ = writeln!(
                    csv,
                    "{},{},{},{},{},{}",
                    fmt_f64(*t),
                    f.functional,
                    init,
                    fmt_f64(e.mean),
                    fmt_f64(e.std_err),
                    fmt_f64(f.gaps[i][k])
                );
            }
        }
    }
    csv
}

pub fn ergodic_cmd(cfg: &RunConfig, jobs: usize) -> Outcome {
    let mut out = Outcome::new();
    let Some(op) = operator(cfg, &mut out) else {
        return out;
    };
    let g = gate(cfg, &op);
    if !require_gate(cfg, &mut out, &g) {
        return out;
    }
    let ec = match cfg.ensemble_config(jobs) {
        Ok(c) => c,
        Err(e) => {
            sim_error(&mut out, &e);
            return out;
        }
    };
    let rep = match mixing_experiment(&ec) {
        Ok(r) => r,
        Err(e) => {
            ergodic_error(&mut out, &e);
            return out;
        }
    };
    out.files.push(("ergodic.csv".into(), ergodic_csv(&rep)));
    out.entry("regime", format!("{:?}", rep.regime));
    out.entry("fit.window", format!("{},{}", fmt_f64(rep.fit_window.0), fmt_f64(rep.fit_window.1)));
    out.entry("trajectories.excluded", rep.excluded.to_string());
    out.entry("trajectories.total", rep.total.to_string());
    let target = match rep.regime {
        Regime::PowerLaw => -1.0 / (cfg.model.r() - 1.0),
        Regime::Exponential => -g.constants.map(|k| k.sigma - k.delta).unwrap_or(f64::NAN),
    };
    out.entry("fit.target", fmt_f64(target));
    for f in &rep.functionals {
        let name = f.functional.to_string();
        out.entry(format!("mu.{name}.mean"), fmt_f64(f.mu.mean));
        out.entry(format!("mu.{name}.std_err"), fmt_f64(f.mu.std_err));
        out.entry(format!("uniqueness.{name}.max_diff"), fmt_f64(f.uniqueness.max_diff));
        out.entry(format!("uniqueness.{name}.combined_se"), fmt_f64(f.uniqueness.combined_se));
        out.line(format!(
            "{name}: mu = {} +- {}; final-time spread {} vs combined standard error {}",
            fmt_f64(f.mu.mean),
            fmt_f64(f.mu.std_err),
            fmt_f64(f.uniqueness.max_diff),
            fmt_f64(f.uniqueness.combined_se)
        ));
        match &f.fit {
            Some(Ok(fit)) => {
                out.entry(format!("fit.{name}.rate"), fmt_f64(fit.rate));
                out.entry(format!("fit.{name}.residual"), fmt_f64(fit.residual));
                out.line(format!("{name}: mixing-gap fit {:.4} (target {:.4})", fit.rate, target));
            }
            Some(Err(e)) => out.line(format!("{name}: mixing-gap fit unavailable: {e}")),
            None => {}
        }
    }
    if let Some(m) = rep.moment {
        out.entry("moment.estimate", fmt_f64(m.estimate));
        out.entry("moment.std_err", fmt_f64(m.std_err));
    }
    if cfg.ergodic.moment_stability {
        match moment_stability(&ec) {
            Ok((a, b)) => {
                out.entry("moment.coarse", fmt_f64(a.estimate));
                out.entry("moment.fine", fmt_f64(b.estimate));
                out.entry("moment.stable", a.stable.unwrap_or(false).to_string());
                out.line(format!(
                    "moment under mode doubling: {} -> {} (stable: {})",
                    fmt_f64(a.estimate),
                    fmt_f64(b.estimate),
                    a.stable.unwrap_or(false)
                ));
            }
            Err(e) => {
                ergodic_error(&mut out, &e);
                return out;
            }
        }
    }
    let ta_end = cfg.ergodic.time_average_t_end;
    if ta_end > cfg.ergodic.burn_in {
        let mut base = ec.base.clone();
        base.initial = ec.initial_set[ec.reference_initial()].clone();
        for f in &rep.functionals {
            if f.functional.lipschitz().is_none() {
                continue;
            }
            let key = StreamKey::new(cfg.seed, cfg.ergodic.n_traj as u64);
            match time_average(&base, f.functional, key, cfg.ergodic.burn_in, ta_end, 20) {
                Ok(ta) => {
                    let name = f.functional.to_string();
                    out.entry(format!("time_average.{name}.mean"), fmt_f64(ta.mean));
                    out.entry(format!("time_average.{name}.std_err"), fmt_f64(ta.std_err));
                }
                Err(e) => {
                    ergodic_error(&mut out, &e);
                    return out;
                }
            }
        }
    }
    out
}

fn ergodic_error(out: &mut Outcome, e: &ErgodicError) {
    match e {
        ErgodicError::TooManyBlowUps { .. } => out.fail(Status::BlowUp, e.to_string()),
        ErgodicError::Sim(s) => sim_error(out, s),
        other => out.fail(Status::ConfigOrIo, other.to_string()),
    }
}

fn prefixed(mut out: Outcome, name: &str) -> Outcome {
    for (k, _) in out.index.iter_mut() {
        *k = format!("experiment.{name}.{k}");
    }
    for l in out.summary.iter_mut() {
        *l = format!("[{name}] {l}");
    }
    out
}

/// Run one experiment family.
pub fn run_experiment(cfg: &RunConfig, e: Experiment, jobs: usize) -> Outcome {
    match e {
        Experiment::Verify => verify(cfg),
        Experiment::Simulate => simulate_cmd(cfg),
        Experiment::Couple => couple(cfg),
        Experiment::Ergodic => ergodic_cmd(cfg, jobs),
    }
}

/// The `report` subcommand: every experiment in `run.experiments`, in the
/// listed order, with a combined index. The exit status is that of the
/// first failing experiment.
pub fn report(cfg: &RunConfig, jobs: usize, defaulted: &[(&str, &str)]) -> Outcome {
    let mut out = Outcome::new();
    out.entry(
        "experiments",
        cfg.experiments.iter().map(|e| e.name()).collect::<Vec<_>>().join(","),
    );
    out.entry("seed", cfg.seed.to_string());
    for (k, v) in defaulted {
        out.entry(format!("default.{k}"), *v);
    }
    if cfg.experiments.is_empty() {
        out.line("no experiments requested");
    }
    for &e in &cfg.experiments {
        let sub = prefixed(run_experiment(cfg, e, jobs), e.name());
        out.entry(format!("experiment.{}.exit", e.name()), sub.status.code().to_string());
        for (name, _) in &sub.files {
            out.entry(format!("experiment.{}.artifact", e.name()), name.clone());
        }
        if out.status == Status::Ok && sub.status != Status::Ok {
            out.status = sub.status;
        }
        out.index.extend(sub.index);
        out.summary.extend(sub.summary);
        out.files.extend(sub.files);
    }
    out
}

/// Entry point shared by the binary and the tests.
pub fn run_subcommand(name: &str, cfg: &RunConfig, jobs: usize, defaulted: &[(&str, &str)]) -> Outcome {
    let mut out = match name {
        "report" => return report(cfg, jobs, defaulted),
        other => match Experiment::parse(other) {
            Some(e) => run_experiment(cfg, e, jobs),
            None => {
                let mut o = Outcome::new();
                o.fail(Status::ConfigOrIo, format!("unknown subcommand `{other}`"));
                return o;
            }
        },
    };
    let mut head = vec![("subcommand".to_string(), name.to_string()), ("seed".to_string(), cfg.seed.to_string())];
    for (k, v) in defaulted {
        head.push((format!("default.{k}"), v.to_string()));
    }
    head.append(&mut out.index);
    out.index = head;
    for (name, _) in &out.files {
        out.index.push(("artifact".into(), name.clone()));
    }
    out.index.push(("exit".into(), out.status.code().to_string()));
    if let Some((_, v)) = defaulted.iter().find(|(k, _)| *k == "sim.dt") {
        out.summary.push(format!("sim.dt not set; default {v} applied"));
    }
    out
}
