//! Additive noise `Q dW_t` truncated to the Galerkin modes.
//!
//! Mode `i` receives `q_i dB^i` with `q_i² = Σ_j q_ij²`; modes above the
//! truncation receive nothing.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::basis::OperatorSpec;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NoiseError {
    #[error("time step must be positive, got {0}")]
    NonPositiveStep(f64),
    #[error("noise coefficient is not finite")]
    NonFinite,
    #[error("noise matrix must be square, row {row} has {len} entries for {rows} rows")]
    NotSquare { row: usize, len: usize, rows: usize },
    #[error("noise parameter out of range: {0}")]
    Range(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum NoiseProfile {
    Zero,
    /// `q_i = c · i^{−a}`
    DiagonalPower { c: f64, a: f64 },
    ExplicitDiagonal(Vec<f64>),
    /// Row-major `q_ij`.
    FullMatrix(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSpec {
    pub profile: NoiseProfile,
    pub master_seed: u64,
}

/// `q = Σ q_i²/λ_i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseTrace {
    /// Sum over the Galerkin modes.
    pub truncated: f64,
    /// Upper bound on the omitted tail.
    pub tail_bound: f64,
    /// Truncated sum plus an asymptotic tail estimate.
    pub extrapolated: f64,
    /// Reserved for profiles whose series may diverge; never set by the
    /// built-in families.
    pub divergent: bool,
}

impl NoiseTrace {
    pub fn value(&self) -> f64 {
        if self.divergent {
            f64::INFINITY
        } else {
            self.extrapolated
        }
    }
}

/// `Σ_{i>n} i^{−p}` by Euler–Maclaurin, accurate to `O(n^{−p−5})`.
fn zeta_tail(p: f64, n: usize) -> f64 {
    let n = n as f64;
    n.powf(1.0 - p) / (p - 1.0) - 0.5 * n.powf(-p) + p / 12.0 * n.powf(-p - 1.0)
        - p * (p + 1.0) * (p + 2.0) / 720.0 * n.powf(-p - 3.0)
}

impl NoiseSpec {
    pub fn new(profile: NoiseProfile, master_seed: u64) -> Result<Self, NoiseError> {
        match &profile {
            NoiseProfile::Zero => {}
            NoiseProfile::DiagonalPower { c, a } => {
                if !(c.is_finite() && a.is_finite()) {
                    return Err(NoiseError::NonFinite);
                }
                if *c < 0.0 || *a < 0.0 {
                    return Err(NoiseError::Range(format!(
                        "diagonal_power needs c >= 0 and a >= 0, got c={c}, a={a}"
                    )));
                }
            }
            NoiseProfile::ExplicitDiagonal(q) => {
                if q.iter().any(|v| !v.is_finite()) {
                    return Err(NoiseError::NonFinite);
                }
            }
            NoiseProfile::FullMatrix(m) => {
                for (row, r) in m.iter().enumerate() {
                    if r.len() != m.len() {
                        return Err(NoiseError::NotSquare {
                            row,
                            len: r.len(),
                            rows: m.len(),
                        });
                    }
                    if r.iter().any(|v| !v.is_finite()) {
                        return Err(NoiseError::NonFinite);
                    }
                }
            }
        }
        Ok(Self {
            profile,
            master_seed,
        })
    }

    pub fn zero() -> Self {
        Self {
            profile: NoiseProfile::Zero,
            master_seed: 0,
        }
    }

    pub fn is_zero(&self) -> bool {
        match &self.profile {
            NoiseProfile::Zero => true,
            NoiseProfile::DiagonalPower { c, .. } => *c == 0.0,
            NoiseProfile::ExplicitDiagonal(q) => q.iter().all(|v| *v == 0.0),
            NoiseProfile::FullMatrix(m) => m.iter().flatten().all(|v| *v == 0.0),
        }
    }

    /// `q_i` for `i = 1..=n` (row norms for a full matrix).
    pub fn amplitudes(&self, n: usize) -> Vec<f64> {
        match &self.profile {
            NoiseProfile::Zero => vec![0.0; n],
            NoiseProfile::DiagonalPower { c, a } => {
                (1..=n).map(|i| c * (i as f64).powf(-a)).collect()
            }
            NoiseProfile::ExplicitDiagonal(q) => {
                (0..n).map(|i| q.get(i).copied().unwrap_or(0.0)).collect()
            }
            NoiseProfile::FullMatrix(m) => (0..n)
                .map(|i| {
                    m.get(i)
                        .map(|row| row.iter().map(|v| v * v).sum::<f64>().sqrt())
                        .unwrap_or(0.0)
                })
                .collect(),
        }
    }

    /// Trace `Σ q_i²/λ_i` over the operator's modes, with a tail bound
    /// for the modes beyond the truncation (Dirichlet spectrum assumed
    /// there).
    pub fn trace(&self, operator: &OperatorSpec) -> NoiseTrace {
        let n = operator.n_modes();
        let q = self.amplitudes(n);
        let truncated: f64 = q
            .iter()
            .zip(operator.eigenvalues())
            .map(|(q, l)| q * q / l)
            .sum();
        let dirichlet = |i: usize| {
            let w = i as f64 * PI;
            w * w
        };
        let (tail_bound, tail_estimate) = match &self.profile {
            NoiseProfile::Zero => (0.0, 0.0),
            NoiseProfile::DiagonalPower { c, a } => {
                let p = 2.0 * a + 2.0;
                let scale = c * c / (PI * PI);
                (
                    scale / ((2.0 * a + 1.0) * (n as f64).powf(2.0 * a + 1.0)),
                    scale * zeta_tail(p, n),
                )
            }
            NoiseProfile::ExplicitDiagonal(q) => {
                let t: f64 = q
                    .iter()
                    .enumerate()
                    .skip(n)
                    .map(|(i, v)| v * v / dirichlet(i + 1))
                    .sum();
                (t, t)
            }
            NoiseProfile::FullMatrix(m) => {
                let t: f64 = m
                    .iter()
                    .enumerate()
                    .skip(n)
                    .map(|(i, row)| row.iter().map(|v| v * v).sum::<f64>() / dirichlet(i + 1))
                    .sum();
                (t, t)
            }
        };
        NoiseTrace {
            truncated,
            tail_bound,
            extrapolated: truncated + tail_estimate,
            divergent: false,
        }
    }

    /// Prepare a sampler for an `n`-mode Galerkin system.
    pub fn sampler(&self, n: usize) -> NoiseSampler {
        let kind = if self.is_zero() {
            SamplerKind::Zero
        } else {
            match &self.profile {
                NoiseProfile::FullMatrix(m) => SamplerKind::Matrix(
                    (0..n)
                        .flat_map(|i| {
                            (0..n).map(move |j| m.get(i).and_then(|r| r.get(j)).copied().unwrap_or(0.0))
                        })
                        .collect(),
                ),
                _ => SamplerKind::Diagonal(self.amplitudes(n)),
            }
        };
        NoiseSampler { n, kind }
    }
}

#[derive(Debug, Clone)]
enum SamplerKind {
    Zero,
    Diagonal(Vec<f64>),
    // row-major n×n
    Matrix(Vec<f64>),
}

/// Draws `(q_i ξ_i √dt)_{i ≤ n}` (or `q · ξ√dt` for a full matrix).
#[derive(Debug, Clone)]
pub struct NoiseSampler {
    n: usize,
    kind: SamplerKind,
}

impl NoiseSampler {
    pub fn n_modes(&self) -> usize {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.kind, SamplerKind::Zero)
    }

    pub fn sample_into<R: Rng + ?Sized>(
        &self,
        dt: f64,
        rng: &mut R,
        out: &mut [f64],
    ) -> Result<(), NoiseError> {
        if !(dt > 0.0) {
            return Err(NoiseError::NonPositiveStep(dt));
        }
        debug_assert_eq!(out.len(), self.n);
        let sd = dt.sqrt();
        match &self.kind {
            SamplerKind::Zero => out.fill(0.0),
            SamplerKind::Diagonal(q) => {
                for (o, q) in out.iter_mut().zip(q) {
                    let xi: f64 = rng.sample(StandardNormal);
                    *o = q * (xi * sd);
                }
            }
            SamplerKind::Matrix(m) => {
                let z: Vec<f64> = (0..self.n)
                    .map(|_| rng.sample::<f64, _>(StandardNormal) * sd)
                    .collect();
                for (i, o) in out.iter_mut().enumerate() {
                    let row = &m[i * self.n..(i + 1) * self.n];
                    let mut acc = row[i] * z[i];
                    for (j, (q, zj)) in row.iter().zip(&z).enumerate() {
                        if j != i {
                            acc += q * zj;
                        }
                    }
                    *o = acc;
                }
            }
        }
        Ok(())
    }
}

/// One vector of increments for an `n`-mode system.
pub fn sample_increments<R: Rng + ?Sized>(
    spec: &NoiseSpec,
    n_modes: usize,
    dt: f64,
    rng: &mut R,
) -> Result<Vec<f64>, NoiseError> {
    let mut out = vec![0.0; n_modes];
    spec.sampler(n_modes).sample_into(dt, rng, &mut out)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::StreamKey;

    fn op(n: usize) -> OperatorSpec {
        OperatorSpec::dirichlet(n, 4 * n).unwrap()
    }

    #[test]
    fn trace_examples() {
        assert_eq!(NoiseSpec::zero().trace(&op(8)).value(), 0.0);

        let harmonic = NoiseSpec::new(NoiseProfile::DiagonalPower { c: 1.0, a: 1.0 }, 0).unwrap();
        let t = harmonic.trace(&op(64));
        assert!((t.extrapolated - PI * PI / 90.0).abs() < 1e-9, "{t:?}");
        assert!(t.truncated < PI * PI / 90.0);
        assert!(t.truncated + t.tail_bound >= PI * PI / 90.0);

        let single = NoiseSpec::new(NoiseProfile::ExplicitDiagonal(vec![1.0]), 0).unwrap();
        assert!((single.trace(&op(8)).value() - 1.0 / (PI * PI)).abs() < 1e-15);
    }

    #[test]
    fn explicit_tail_uses_dirichlet_spectrum() {
        let q = NoiseSpec::new(NoiseProfile::ExplicitDiagonal(vec![0.0, 0.0, 1.0]), 0).unwrap();
        let t = q.trace(&op(2));
        assert_eq!(t.truncated, 0.0);
        assert!((t.extrapolated - 1.0 / (9.0 * PI * PI)).abs() < 1e-15);
    }

    #[test]
    fn matrix_row_norms() {
        let m = NoiseSpec::new(
            NoiseProfile::FullMatrix(vec![vec![3.0, 4.0], vec![0.0, 1.0]]),
            0,
        )
        .unwrap();
        assert_eq!(m.amplitudes(2), vec![5.0, 1.0]);
        assert!(NoiseSpec::new(NoiseProfile::FullMatrix(vec![vec![1.0]; 2]), 0).is_err());
    }

    #[test]
    fn validation() {
        assert!(NoiseSpec::new(NoiseProfile::DiagonalPower { c: -1.0, a: 1.0 }, 0).is_err());
        assert!(NoiseSpec::new(NoiseProfile::ExplicitDiagonal(vec![f64::NAN]), 0).is_err());
    }

    #[test]
    fn zero_profile_gives_zero_increments() {
        let key = StreamKey::new(9, 0);
        for seed in 0..3 {
            let v = sample_increments(&NoiseSpec::zero(), 5, 0.1, &mut StreamKey::new(seed, 1).at_step(0))
                .unwrap();
            assert!(v.iter().all(|x| *x == 0.0));
        }
        assert_eq!(
            sample_increments(&NoiseSpec::zero(), 5, 0.0, &mut key.at_step(0)),
            Err(NoiseError::NonPositiveStep(0.0))
        );
    }

    #[test]
    fn reproducible_and_diagonal_consistent() {
        let key = StreamKey::new(11, 2);
        let diag = NoiseSpec::new(NoiseProfile::ExplicitDiagonal(vec![0.5, 0.25, 0.125]), 0).unwrap();
        let full = NoiseSpec::new(
            NoiseProfile::FullMatrix(vec![
                vec![0.5, 0.0, 0.0],
                vec![0.0, 0.25, 0.0],
                vec![0.0, 0.0, 0.125],
            ]),
            0,
        )
        .unwrap();
        let a = sample_increments(&diag, 3, 1e-3, &mut key.at_step(5)).unwrap();
        let b = sample_increments(&diag, 3, 1e-3, &mut key.at_step(5)).unwrap();
        let c = sample_increments(&full, 3, 1e-3, &mut key.at_step(5)).unwrap();
        assert_eq!(a, b);
        for (x, y) in a.iter().zip(&c) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    #[test]
    fn gaussian_moments() {
        let spec = NoiseSpec::new(NoiseProfile::DiagonalPower { c: 0.8, a: 1.0 }, 0).unwrap();
        let sampler = spec.sampler(3);
        let key = StreamKey::new(2024, 0);
        let n = 100_000;
        let dt = 0.01;
        let mut sum = [0.0; 3];
        let mut sum2 = [0.0; 3];
        let mut buf = [0.0; 3];
        for step in 0..n {
            sampler.sample_into(dt, &mut key.at_step(step), &mut buf).unwrap();
            for i in 0..3 {
                let z = buf[i] / dt.sqrt();
                sum[i] += z;
                sum2[i] += z * z;
            }
        }
        let q = spec.amplitudes(3);
        for i in 0..3 {
            let mean = sum[i] / n as f64;
            let var = sum2[i] / n as f64 - mean * mean;
            let se_mean = q[i] / (n as f64).sqrt();
            assert!(mean.abs() < 4.0 * se_mean, "mode {i}: mean {mean}");
            // Var of a sample variance of Gaussians is 2σ⁴/n
            let se_var = q[i] * q[i] * (2.0 / n as f64).sqrt();
            assert!((var - q[i] * q[i]).abs() < 4.0 * se_var, "mode {i}: var {var}");
        }
    }

    #[test]
    fn distinct_streams_are_uncorrelated() {
        let spec = NoiseSpec::new(NoiseProfile::ExplicitDiagonal(vec![1.0]), 0).unwrap();
        let sampler = spec.sampler(1);
        let (ka, kb) = (StreamKey::new(5, 0), StreamKey::new(5, 1));
        let n = 100_000u64;
        let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
        let (mut a, mut b) = ([0.0], [0.0]);
        for step in 0..n {
            sampler.sample_into(1.0, &mut ka.at_step(step), &mut a).unwrap();
            sampler.sample_into(1.0, &mut kb.at_step(step), &mut b).unwrap();
            sab += a[0] * b[0];
            saa += a[0] * a[0];
            sbb += b[0] * b[0];
        }
        let corr = sab / (saa * sbb).sqrt();
        assert!(corr.abs() < 4.0 / (n as f64).sqrt(), "{corr}");
    }
}
