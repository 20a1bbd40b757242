//! Discrete-spectrum operator `L`, its eigenbasis, spectral/physical
//! transforms and the norms used throughout the crate.
//!
//! The built-in instance is the Dirichlet Laplacian on `(0, 1)` with
//! eigenpairs `λ_k = (kπ)²`, `e_k(x) = √2 sin(kπx)`, sign convention
//! `L e_k = −λ_k e_k`. Integrals against the (probability) Lebesgue
//! measure use the composite midpoint rule on `grid_size` uniform cells.

use std::f64::consts::{PI, SQRT_2};
use std::ops::{Deref, DerefMut};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BasisError {
    #[error("mode index {index} outside 1..={n_modes}")]
    ModeOutOfRange { index: usize, n_modes: usize },
    #[error("expected {expected} values, got {actual}")]
    SizeMismatch { expected: usize, actual: usize },
    #[error("invalid resolution: {0}")]
    Resolution(String),
    #[error("L^p norm requires p >= 1, got {0}")]
    InvalidExponent(f64),
}

/// Eigen-decomposition of a negative definite self-adjoint operator with
/// discrete spectrum on a probability space over `(0, 1)`.
pub trait Spectrum: Send + Sync {
    /// `λ_k > 0` for `k >= 1`, nondecreasing.
    fn eigenvalue(&self, k: usize) -> f64;
    /// `L²`-normalized eigenfunction `e_k` evaluated at `x`.
    fn eigenfunction(&self, k: usize, x: f64) -> f64;
}

/// Dirichlet Laplacian on the unit interval.
#[derive(Debug, Clone, Copy, Default)]
pub struct DirichletInterval;

impl Spectrum for DirichletInterval {
    fn eigenvalue(&self, k: usize) -> f64 {
        let w = k as f64 * PI;
        w * w
    }

    fn eigenfunction(&self, k: usize, x: f64) -> f64 {
        SQRT_2 * (k as f64 * PI * x).sin()
    }
}

/// Truncated operator: the first `n_modes` eigenpairs tabulated on the
/// midpoints of `grid_size` uniform cells.
#[derive(Debug, Clone)]
pub struct OperatorSpec {
    n_modes: usize,
    grid_size: usize,
    eigenvalues: Vec<f64>,
    nodes: Vec<f64>,
    // row-major, `table[(k-1) * grid_size + j] = e_k(x_j)`
    table: Vec<f64>,
}

impl OperatorSpec {
    pub fn dirichlet(n_modes: usize, grid_size: usize) -> Result<Self, BasisError> {
        Self::from_spectrum(&DirichletInterval, n_modes, grid_size)
    }

    pub fn from_spectrum(
        spectrum: &dyn Spectrum,
        n_modes: usize,
        grid_size: usize,
    ) -> Result<Self, BasisError> {
        if n_modes == 0 {
            return Err(BasisError::Resolution("n_modes must be positive".into()));
        }
        if grid_size < n_modes {
            return Err(BasisError::Resolution(format!(
                "grid_size {grid_size} cannot resolve {n_modes} modes"
            )));
        }
        let eigenvalues: Vec<f64> = (1..=n_modes).map(|k| spectrum.eigenvalue(k)).collect();
        if eigenvalues.iter().any(|l| !(l.is_finite() && *l > 0.0))
            || eigenvalues.windows(2).any(|w| w[1] < w[0])
        {
            return Err(BasisError::Resolution(
                "eigenvalues must be positive and nondecreasing".into(),
            ));
        }
        let h = 1.0 / grid_size as f64;
        let nodes: Vec<f64> = (0..grid_size).map(|j| (j as f64 + 0.5) * h).collect();
        let mut table = Vec::with_capacity(n_modes * grid_size);
        for k in 1..=n_modes {
            table.extend(nodes.iter().map(|&x| spectrum.eigenfunction(k, x)));
        }
        Ok(Self {
            n_modes,
            grid_size,
            eigenvalues,
            nodes,
            table,
        })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn grid_size(&self) -> usize {
        self.grid_size
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn lambda_1(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn lambda_max(&self) -> f64 {
        self.eigenvalues[self.n_modes - 1]
    }

    /// `λ_k` for `1 <= k <= n_modes`.
    pub fn eigenvalue(&self, k: usize) -> Result<f64, BasisError> {
        self.check_mode(k)?;
        Ok(self.eigenvalues[k - 1])
    }

    /// Values of `e_k` at arbitrary nodes.
    pub fn eigenfunction_values(&self, k: usize, nodes: &[f64]) -> Result<Vec<f64>, BasisError> {
        self.check_mode(k)?;
        Ok(nodes
            .iter()
            .map(|&x| DirichletInterval.eigenfunction(k, x))
            .collect())
    }

    /// Tabulated `e_k` on the quadrature grid.
    pub fn mode_on_grid(&self, k: usize) -> Result<&[f64], BasisError> {
        self.check_mode(k)?;
        Ok(self.row(k - 1))
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.table[i * self.grid_size..(i + 1) * self.grid_size]
    }

    fn check_mode(&self, k: usize) -> Result<(), BasisError> {
        if k == 0 || k > self.n_modes {
            return Err(BasisError::ModeOutOfRange {
                index: k,
                n_modes: self.n_modes,
            });
        }
        Ok(())
    }

    /// Grid values of `Σ_k a_k e_k`.
    pub fn synth(&self, field: &SpectralField) -> Result<Vec<f64>, BasisError> {
        check_len(self.n_modes, field.len())?;
        let mut out = vec![0.0; self.grid_size];
        self.synth_into(field, &mut out);
        Ok(out)
    }

    /// Projection `a_k = m(X e_k)` by midpoint quadrature.
    pub fn analyze(&self, values: &[f64]) -> Result<SpectralField, BasisError> {
        check_len(self.grid_size, values.len())?;
        let mut out = vec![0.0; self.n_modes];
        self.analyze_into(values, &mut out);
        Ok(SpectralField(out))
    }

    /// Unchecked variant of [`synth`](Self::synth) writing into `out`.
    pub fn synth_into(&self, coeffs: &[f64], out: &mut [f64]) {
        debug_assert_eq!(coeffs.len(), self.n_modes);
        debug_assert_eq!(out.len(), self.grid_size);
        out.fill(0.0);
        for (i, &a) in coeffs.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for (o, &e) in out.iter_mut().zip(self.row(i)) {
                *o += a * e;
            }
        }
    }

    /// Unchecked variant of [`analyze`](Self::analyze) writing into `out`.
    pub fn analyze_into(&self, values: &[f64], out: &mut [f64]) {
        debug_assert_eq!(values.len(), self.grid_size);
        debug_assert_eq!(out.len(), self.n_modes);
        let w = 1.0 / self.grid_size as f64;
        for (i, o) in out.iter_mut().enumerate() {
            *o = w * dot(values, self.row(i));
        }
    }

    /// `‖X‖_H = (Σ λ_k⁻¹ a_k²)^{1/2}`.
    pub fn h_norm(&self, coeffs: &[f64]) -> f64 {
        self.h_norm_sq(coeffs).sqrt()
    }

    pub fn h_norm_sq(&self, coeffs: &[f64]) -> f64 {
        coeffs
            .iter()
            .zip(&self.eigenvalues)
            .map(|(a, l)| a * a / l)
            .sum()
    }

    /// H-norm of `x − y` without allocating.
    pub fn h_distance(&self, x: &[f64], y: &[f64]) -> f64 {
        x.iter()
            .zip(y)
            .zip(&self.eigenvalues)
            .map(|((a, b), l)| {
                let d = a - b;
                d * d / l
            })
            .sum::<f64>()
            .sqrt()
    }

    /// `L⁻¹` acting diagonally: `a_k ↦ −a_k/λ_k`.
    pub fn inv_l_coeffs(&self, field: &SpectralField) -> SpectralField {
        SpectralField(
            field
                .iter()
                .zip(&self.eigenvalues)
                .map(|(a, l)| -a / l)
                .collect(),
        )
    }

    /// `L` acting diagonally: `a_k ↦ −λ_k a_k`.
    pub fn apply_l(&self, field: &SpectralField) -> SpectralField {
        SpectralField(
            field
                .iter()
                .zip(&self.eigenvalues)
                .map(|(a, l)| -a * l)
                .collect(),
        )
    }

    pub fn zero_field(&self) -> SpectralField {
        SpectralField(vec![0.0; self.n_modes])
    }
}

fn check_len(expected: usize, actual: usize) -> Result<(), BasisError> {
    if expected != actual {
        return Err(BasisError::SizeMismatch { expected, actual });
    }
    Ok(())
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    // four accumulators so the loop vectorizes
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        let i = 4 * c;
        acc[0] += a[i] * b[i];
        acc[1] += a[i + 1] * b[i + 1];
        acc[2] += a[i + 2] * b[i + 2];
        acc[3] += a[i + 3] * b[i + 3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for i in 4 * chunks..a.len() {
        s += a[i] * b[i];
    }
    s
}

/// `(m(|X|^p))^{1/p}` by midpoint quadrature over grid values.
pub fn lp_norm(values: &[f64], p: f64) -> Result<f64, BasisError> {
    Ok(lp_power(values, p)?.powf(1.0 / p))
}

/// `m(|X|^p)` by midpoint quadrature over grid values.
pub fn lp_power(values: &[f64], p: f64) -> Result<f64, BasisError> {
    if !(p >= 1.0) {
        return Err(BasisError::InvalidExponent(p));
    }
    if values.is_empty() {
        return Ok(0.0);
    }
    let s: f64 = if p == 2.0 {
        values.iter().map(|v| v * v).sum()
    } else if p == 4.0 {
        values.iter().map(|v| (v * v) * (v * v)).sum()
    } else {
        values.iter().map(|v| v.abs().powf(p)).sum()
    };
    Ok(s / values.len() as f64)
}

/// Spectral coefficients `a_k = ⟨X, e_k⟩` of a Galerkin field.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField(pub Vec<f64>);

impl SpectralField {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self(coeffs)
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    /// `scale · e_k` in an `n`-mode space.
    pub fn unit(n: usize, k: usize, scale: f64) -> Self {
        let mut v = vec![0.0; n];
        v[k - 1] = scale;
        Self(v)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|a| a.is_finite())
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for SpectralField {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for SpectralField {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn op() -> OperatorSpec {
        OperatorSpec::dirichlet(16, 64).unwrap()
    }

    #[test]
    fn eigenvalues_follow_dirichlet_spectrum() {
        let op = op();
        assert!((op.eigenvalue(1).unwrap() - 9.869604401089358).abs() < 1e-12);
        assert!((op.eigenvalue(2).unwrap() - 39.47841760435743).abs() < 1e-12);
        assert!((op.eigenvalue(3).unwrap() - 9.0 * PI * PI).abs() < 1e-12);
        assert!(matches!(
            op.eigenvalue(0),
            Err(BasisError::ModeOutOfRange { .. })
        ));
        assert!(op.eigenvalue(17).is_err());
    }

    #[test]
    fn eigenfunction_point_values() {
        let op = op();
        let v = op.eigenfunction_values(1, &[0.5]).unwrap();
        assert!((v[0] - SQRT_2).abs() < 1e-15);
        let v = op.eigenfunction_values(2, &[0.5]).unwrap();
        assert!(v[0].abs() < 1e-15);
        assert!(op.eigenfunction_values(99, &[0.5]).is_err());
    }

    #[test]
    fn discrete_orthonormality() {
        let op = op();
        for j in 1..=16 {
            for k in 1..=16 {
                let ej = op.mode_on_grid(j).unwrap();
                let ek = op.mode_on_grid(k).unwrap();
                let q = dot(ej, ek) / 64.0;
                let expected = if j == k { 1.0 } else { 0.0 };
                assert!((q - expected).abs() < 1e-10, "({j},{k}) -> {q}");
            }
        }
    }

    #[test]
    fn synth_analyze_examples() {
        let op = op();
        let e1 = SpectralField::unit(16, 1, 1.0);
        let vals = op.synth(&e1).unwrap();
        for (v, x) in vals.iter().zip(op.nodes()) {
            assert!((v - SQRT_2 * (PI * x).sin()).abs() < 1e-14);
        }
        let back = op.analyze(&vals).unwrap();
        assert!((back[0] - 1.0).abs() < 1e-12);
        assert!(back[1..].iter().all(|a| a.abs() < 1e-12));

        let z = op.synth(&op.zero_field()).unwrap();
        assert!(z.iter().all(|v| *v == 0.0));

        assert_eq!(
            op.synth(&SpectralField::zeros(3)),
            Err(BasisError::SizeMismatch {
                expected: 16,
                actual: 3
            })
        );
        assert!(op.analyze(&[0.0; 5]).is_err());
    }

    #[test]
    fn random_roundtrip_fixed_seed() {
        let op = OperatorSpec::dirichlet(64, 256).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = SpectralField((0..64).map(|_| rng.random_range(-1.0..1.0)).collect());
        let back = op.analyze(&op.synth(&a).unwrap()).unwrap();
        let err = a
            .iter()
            .zip(back.iter())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-10, "{err}");
    }

    #[test]
    fn h_norm_examples() {
        let op = op();
        assert!((op.h_norm(&SpectralField::unit(16, 1, 1.0)) - 1.0 / PI).abs() < 1e-15);
        assert_eq!(op.h_norm(&op.zero_field()), 0.0);
        let mut a = op.zero_field();
        a[0] = 1.0;
        a[1] = 1.0;
        assert!((op.h_norm(&a) - 5f64.sqrt() / (2.0 * PI)).abs() < 1e-15);
    }

    #[test]
    fn lp_norm_examples() {
        let op = OperatorSpec::dirichlet(4, 512).unwrap();
        let e1 = op.synth(&SpectralField::unit(4, 1, 1.0)).unwrap();
        assert!((lp_norm(&e1, 2.0).unwrap() - 1.0).abs() < 1e-6);
        assert!((lp_norm(&e1, 4.0).unwrap() - 1.5f64.powf(0.25)).abs() < 1e-6);
        assert!((lp_norm(&e1, 3.0).unwrap() - lp_power(&e1, 3.0).unwrap().cbrt()).abs() < 1e-12);
        assert_eq!(lp_norm(&[0.0; 8], 3.5).unwrap(), 0.0);
        assert_eq!(lp_norm(&e1, 0.5), Err(BasisError::InvalidExponent(0.5)));
    }

    #[test]
    fn inverse_operator_examples() {
        let op = op();
        let inv = op.inv_l_coeffs(&SpectralField::unit(16, 1, 1.0));
        assert!((inv[0] + 1.0 / (PI * PI)).abs() < 1e-15);
        assert!(inv[1..].iter().all(|a| *a == 0.0));
        assert_eq!(op.inv_l_coeffs(&op.zero_field()), op.zero_field());
    }

    #[test]
    fn resolution_validation() {
        assert!(OperatorSpec::dirichlet(0, 8).is_err());
        assert!(OperatorSpec::dirichlet(8, 4).is_err());
    }

    fn field_strategy(n: usize) -> impl Strategy<Value = SpectralField> {
        prop::collection::vec(-10.0f64..10.0, n).prop_map(SpectralField)
    }

    proptest! {
        #[test]
        fn l_then_inverse_is_identity(a in field_strategy(16)) {
            let op = op();
            let back = op.inv_l_coeffs(&op.apply_l(&a));
            for (x, y) in a.iter().zip(back.iter()) {
                prop_assert!((x - y).abs() <= 1e-12 * (1.0 + x.abs()));
            }
        }

        #[test]
        fn parseval_and_norm_chain(a in field_strategy(16)) {
            let op = op();
            let vals = op.synth(&a).unwrap();
            let l2 = lp_norm(&vals, 2.0).unwrap();
            let spectral = a.iter().map(|x| x * x).sum::<f64>().sqrt();
            prop_assert!((l2 - spectral).abs() <= 1e-8 * (1.0 + spectral));
            // ‖X‖₂² ≥ λ₁‖X‖_H²
            prop_assert!(l2 * l2 + 1e-12 >= op.lambda_1() * op.h_norm_sq(&a));
            // Jensen on a probability space
            prop_assert!(lp_norm(&vals, 4.0).unwrap() + 1e-6 >= l2);
        }

        #[test]
        fn analyze_is_linear(
            u in prop::collection::vec(-5.0f64..5.0, 64),
            v in prop::collection::vec(-5.0f64..5.0, 64),
            alpha in -3.0f64..3.0,
            beta in -3.0f64..3.0,
        ) {
            let op = op();
            let w: Vec<f64> = u.iter().zip(&v).map(|(x, y)| alpha * x + beta * y).collect();
            let aw = op.analyze(&w).unwrap();
            let au = op.analyze(&u).unwrap();
            let av = op.analyze(&v).unwrap();
            for k in 0..16 {
                let lin = alpha * au[k] + beta * av[k];
                prop_assert!((aw[k] - lin).abs() <= 1e-12 * (1.0 + lin.abs()));
            }
        }
    }
}
