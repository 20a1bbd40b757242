//! Closed-form decay and contraction bounds, the scalar comparison ODE and
//! least-squares rate fits.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundsError {
    #[error("contraction bounds need eta > theta (eta = {eta}, theta = {theta})")]
    NoContraction { eta: f64, theta: f64 },
    #[error("exponential bound needs sigma > delta (sigma = {sigma}, delta = {delta})")]
    NoExponentialRegime { sigma: f64, delta: f64 },
    #[error("{0} must be positive")]
    NonPositive(&'static str),
    #[error("r must exceed 1, got {0}")]
    Exponent(f64),
    #[error("fit window [{lo}, {hi}] holds {count} usable samples, need at least 5")]
    Underdetermined { lo: f64, hi: f64, count: usize },
    #[error("nonpositive value {value} at t = {t} inside the fit window")]
    NonPositiveSample { t: f64, value: f64 },
    #[error("times and values differ in length ({0} vs {1})")]
    Length(usize, usize),
}

/// Constants entering the bounds. `c` is the fitted envelope constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundParams {
    pub r: f64,
    pub eta: f64,
    pub theta: f64,
    pub sigma: f64,
    pub delta: f64,
    pub lambda_1: f64,
    pub c: f64,
}

impl BoundParams {
    pub fn from_constants(k: &crate::model::AssumptionConstants, r: f64, lambda_1: f64) -> Self {
        Self {
            r,
            eta: k.eta,
            theta: k.theta,
            sigma: k.sigma,
            delta: k.delta,
            lambda_1,
            c: 1.0,
        }
    }

    /// `(r−1)(η−θ)λ₁^{(r+1)/2}`
    pub fn contraction_rate(&self) -> Result<f64, BoundsError> {
        if self.r <= 1.0 {
            return Err(BoundsError::Exponent(self.r));
        }
        if self.eta <= self.theta {
            return Err(BoundsError::NoContraction {
                eta: self.eta,
                theta: self.theta,
            });
        }
        Ok((self.r - 1.0) * (self.eta - self.theta) * self.lambda_1.powf((self.r + 1.0) / 2.0))
    }
}

/// Bound on `‖X_t − Y_t‖_H` given `‖X_0 − Y_0‖_H = z0_h`:
///
/// ```text
/// min( z0, { z0^{1−r} + (r−1)(η−θ)λ₁^{(r+1)/2} t }^{−1/(r−1)} )
/// ```
///
/// `z0_h = ∞` gives the initial-value-free branch.
pub fn contraction_bound(z0_h: f64, t: f64, p: &BoundParams) -> Result<f64, BoundsError> {
    let k = p.contraction_rate()?;
    if z0_h.is_nan() || z0_h < 0.0 {
        return Err(BoundsError::NonPositive("z0_h"));
    }
    if t.is_nan() || t < 0.0 {
        return Err(BoundsError::NonPositive("t"));
    }
    if z0_h == 0.0 {
        return Ok(0.0);
    }
    if t == 0.0 {
        return Ok(z0_h);
    }
    let base = z0_h.powf(1.0 - p.r) + k * t;
    Ok(base.powf(-1.0 / (p.r - 1.0)).min(z0_h))
}

/// `z_s e^{−(σ−δ)(t−s)}`
pub fn exponential_bound(z_s: f64, t_minus_s: f64, p: &BoundParams) -> Result<f64, BoundsError> {
    if p.sigma <= p.delta {
        return Err(BoundsError::NoExponentialRegime {
            sigma: p.sigma,
            delta: p.delta,
        });
    }
    if t_minus_s.is_nan() || t_minus_s < 0.0 {
        return Err(BoundsError::NonPositive("t - s"));
    }
    Ok(z_s * (-(p.sigma - p.delta) * t_minus_s).exp())
}

/// `C(1 + t^{−2/(r−1)})`
pub fn moment_decay_bound(t: f64, c: f64, r: f64) -> Result<f64, BoundsError> {
    if r <= 1.0 {
        return Err(BoundsError::Exponent(r));
    }
    if t.is_nan() || t <= 0.0 {
        return Err(BoundsError::NonPositive("t"));
    }
    if t.is_infinite() {
        return Ok(c);
    }
    Ok(c * (1.0 + t.powf(-2.0 / (r - 1.0))))
}

/// Smallest `C` with `moment_decay_bound(t, C, r) ≥ v(t)` on every sample.
pub fn envelope_constant(times: &[f64], values: &[f64], r: f64) -> Result<f64, BoundsError> {
    if times.len() != values.len() {
        return Err(BoundsError::Length(times.len(), values.len()));
    }
    let mut c = 0.0f64;
    for (&t, &v) in times.iter().zip(values) {
        if t > 0.0 {
            c = c.max(v / moment_decay_bound(t, 1.0, r)?);
        }
    }
    Ok(c)
}

/// Closed form of `h′ = −c₂ h^{(r+1)/2}`.
pub fn comparison_closed_form(c2: f64, r: f64, h0: f64, t: f64) -> f64 {
    (h0.powf(-(r - 1.0) / 2.0) + (r - 1.0) * c2 * t / 2.0).powf(-2.0 / (r - 1.0))
}

/// Solve `h′ = −c₂ h^{(r+1)/2} + c₁`, `h(0) = h0` with classical RK4 and
/// return `h` at each point of `t_grid` (nondecreasing, starting at or after
/// zero). Internal steps never exceed `min(grid spacing, 1e−3)`.
pub fn comparison_ode_solve(c1: f64, c2: f64, r: f64, h0: f64, t_grid: &[f64]) -> Result<Vec<f64>, BoundsError> {
    if r <= 1.0 {
        return Err(BoundsError::Exponent(r));
    }
    if !(c2 > 0.0) {
        return Err(BoundsError::NonPositive("c2"));
    }
    if !(h0 > 0.0) {
        return Err(BoundsError::NonPositive("h0"));
    }
    if c1.is_nan() || c1 < 0.0 {
        return Err(BoundsError::NonPositive("c1"));
    }
    let power = (r + 1.0) / 2.0;
    let f = |h: f64| -c2 * h.max(0.0).powf(power) + c1;
    let mut out = Vec::with_capacity(t_grid.len());
    let mut t = 0.0;
    let mut h = h0;
    for &target in t_grid {
        if target.is_nan() || target < t {
            return Err(BoundsError::NonPositive("t_grid spacing"));
        }
        let span = target - t;
        if span > 0.0 {
            let steps = (span / 1e-3).ceil().max(1.0) as usize;
            let dt = span / steps as f64;
            for _ in 0..steps {
                let k1 = f(h);
                let k2 = f(h + 0.5 * dt * k1);
                let k3 = f(h + 0.5 * dt * k2);
                let k4 = f(h + dt * k3);
                h += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            }
            t = target;
        }
        out.push(h);
    }
    Ok(out)
}

/// Closed-form solution of `h′ = −2(η−θ)λ₁^{(r+1)/2} h^{(r+1)/2}` from
/// `h(0) = (z0 + ε)²`.
pub fn contraction_ode_reference(z0: f64, eps: f64, p: &BoundParams, t_grid: &[f64]) -> Result<Vec<f64>, BoundsError> {
    let k = p.contraction_rate()?;
    if !(z0 > 0.0) {
        return Err(BoundsError::NonPositive("z0"));
    }
    if eps.is_nan() || eps < 0.0 {
        return Err(BoundsError::NonPositive("eps"));
    }
    let h0 = (z0 + eps).powi(2);
    Ok(t_grid
        .iter()
        .map(|&t| (h0.powf(-(p.r - 1.0) / 2.0) + k * t).powf(-2.0 / (p.r - 1.0)))
        .collect())
}

/// Least-squares fit result. `rate` is the power-law exponent or the
/// exponential rate; `residual` is the RMS of the log-space residuals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    pub rate: f64,
    pub intercept: f64,
    pub residual: f64,
    pub window: (f64, f64),
    pub samples: usize,
}

fn fit_line(
    times: &[f64],
    values: &[f64],
    window: (f64, f64),
    transform_t: impl Fn(f64) -> f64,
) -> Result<RateFit, BoundsError> {
    if times.len() != values.len() {
        return Err(BoundsError::Length(times.len(), values.len()));
    }
    let (lo, hi) = window;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (&t, &v) in times.iter().zip(values) {
        if t < lo || t > hi {
            continue;
        }
        if !(v > 0.0) || !v.is_finite() {
            return Err(BoundsError::NonPositiveSample { t, value: v });
        }
        xs.push(transform_t(t));
        ys.push(v.ln());
    }
    if xs.len() < 5 {
        return Err(BoundsError::Underdetermined { lo, hi, count: xs.len() });
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if !(sxx > 0.0) {
        return Err(BoundsError::Underdetermined { lo, hi, count: 1 });
    }
    let rate = sxy / sxx;
    let intercept = my - rate * mx;
    let ss: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - rate * x).powi(2))
        .sum();
    Ok(RateFit {
        rate,
        intercept,
        residual: (ss / n).sqrt(),
        window,
        samples: xs.len(),
    })
}

/// Fit `log v = intercept + rate · log t` on samples with `t` in `window`.
pub fn fit_power_law(times: &[f64], values: &[f64], window: (f64, f64)) -> Result<RateFit, BoundsError> {
    if !(window.0 > 0.0) {
        return Err(BoundsError::NonPositive("power-law window start"));
    }
    fit_line(times, values, window, f64::ln)
}

/// Fit `log v = intercept + rate · t` on samples with `t` in `window`.
pub fn fit_exp_rate(times: &[f64], values: &[f64], window: (f64, f64)) -> Result<RateFit, BoundsError> {
    fit_line(times, values, window, |t| t)
}
