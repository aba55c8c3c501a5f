//! Exact Gaussian-process regression over the state-action space with
//! Matern covariance: posterior mean, variance, and the probability that
//! the modeled measure exceeds a safety level.

use std::sync::atomic::{AtomicU64, Ordering};

use nalgebra::{Cholesky, DMatrix, DVector};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::GpError;
use crate::grid::ScalarField;

/// Matern smoothness, fixed to the three standard half-integer orders.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Matern {
    Half,
    ThreeHalves,
    FiveHalves,
}

/// Kernel hyperparameters: one lengthscale per input dimension plus the
/// signal variance.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelParams {
    lengthscales: Vec<f64>,
    signal_variance: f64,
    smoothness: Matern,
}

impl KernelParams {
    pub fn new(
        lengthscales: Vec<f64>,
        signal_variance: f64,
        smoothness: Matern,
    ) -> Result<Self, GpError> {
        if lengthscales.is_empty() || lengthscales.iter().any(|l| !l.is_finite() || *l <= 0.0) {
            return Err(GpError::InvalidParams(
                "lengthscales must be finite and positive".into(),
            ));
        }
        if !signal_variance.is_finite() || signal_variance <= 0.0 {
            return Err(GpError::InvalidParams(
                "signal variance must be finite and positive".into(),
            ));
        }
        Ok(Self { lengthscales, signal_variance, smoothness })
    }

    pub fn lengthscales(&self) -> &[f64] {
        &self.lengthscales
    }

    pub fn signal_variance(&self) -> f64 {
        self.signal_variance
    }

    pub fn smoothness(&self) -> Matern {
        self.smoothness
    }

    pub fn dim(&self) -> usize {
        self.lengthscales.len()
    }

    fn scaled_distance(&self, q1: &[f64], q2: &[f64]) -> f64 {
        let mut r2 = 0.0;
        for ((&a, &b), &l) in q1.iter().zip(q2).zip(&self.lengthscales) {
            let d = (a - b) / l;
            r2 += d * d;
        }
        r2.sqrt()
    }

    /// Covariance between two points.
    pub fn eval(&self, q1: &[f64], q2: &[f64]) -> Result<f64, GpError> {
        if q1.len() != self.dim() || q2.len() != self.dim() {
            return Err(GpError::DimensionMismatch {
                expected: self.dim(),
                found: if q1.len() != self.dim() { q1.len() } else { q2.len() },
            });
        }
        Ok(self.eval_unchecked(q1, q2))
    }

    fn eval_unchecked(&self, q1: &[f64], q2: &[f64]) -> f64 {
        let r = self.scaled_distance(q1, q2);
        let shape = match self.smoothness {
            Matern::Half => (-r).exp(),
            Matern::ThreeHalves => {
                let t = 3.0f64.sqrt() * r;
                (1.0 + t) * (-t).exp()
            }
            Matern::FiveHalves => {
                let t = 5.0f64.sqrt() * r;
                (1.0 + t + t * t / 3.0) * (-t).exp()
            }
        };
        self.signal_variance * shape
    }

    /// Estimate kernel hyperparameters from a gridded field, e.g. a
    /// ground-truth measure computed on a low-fidelity model: the signal
    /// variance is the field's value variance, and each lengthscale matches
    /// the kernel's expected squared derivative to the field's mean squared
    /// finite difference along that axis.
    pub fn estimate_from_field(
        field: &ScalarField,
        smoothness: Matern,
    ) -> Result<Self, GpError> {
        let grid = field.grid();
        let dims = grid.q_axis_cells();
        let widths = grid.q_axis_widths();
        if field.len() != dims.iter().product::<usize>() {
            return Err(GpError::InvalidParams(
                "lengthscale estimation needs a state-action field".into(),
            ));
        }
        let n = field.len() as f64;
        let mean = field.values().iter().sum::<f64>() / n;
        let variance = field.values().iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        if variance <= 0.0 {
            return Err(GpError::InvalidParams(
                "field is constant; cannot estimate a signal variance".into(),
            ));
        }
        // Var[df/dx] for a unit-variance Matern kernel with unit lengthscale;
        // the exponential kernel is not differentiable, so treat it like the
        // once-differentiable case
        let deriv_factor = match smoothness {
            Matern::Half | Matern::ThreeHalves => 3.0,
            Matern::FiveHalves => 5.0 / 3.0,
        };
        let mut lengthscales = Vec::with_capacity(dims.len());
        let mut stride = field.len();
        for (axis, (&cells, &width)) in dims.iter().zip(&widths).enumerate() {
            stride /= cells;
            if cells < 2 {
                return Err(GpError::InvalidParams(format!(
                    "axis {axis} has fewer than 2 cells; cannot estimate its lengthscale"
                )));
            }
            let mut sum_sq = 0.0;
            let mut count = 0usize;
            for cell in 0..field.len() {
                let along = (cell / stride) % cells;
                if along + 1 < cells {
                    let d = (field.get(cell + stride) - field.get(cell)) / width;
                    sum_sq += d * d;
                    count += 1;
                }
            }
            let mean_sq = sum_sq / count as f64;
            if mean_sq <= 0.0 {
                return Err(GpError::InvalidParams(format!(
                    "field is constant along axis {axis}; cannot estimate its lengthscale"
                )));
            }
            lengthscales.push((deriv_factor * variance / mean_sq).sqrt());
        }
        Self::new(lengthscales, variance, smoothness)
    }
}

/// Prior mean over the state-action space.
#[derive(Debug, Clone, PartialEq)]
pub enum PriorMean {
    Constant(f64),
    /// Radial bump `offset + amplitude * exp(-0.5 * sum(((q - center)/width)^2))`.
    Bump {
        center: Vec<f64>,
        widths: Vec<f64>,
        amplitude: f64,
        offset: f64,
    },
}

impl PriorMean {
    pub fn validate(&self, dim: usize) -> Result<(), GpError> {
        match self {
            PriorMean::Constant(c) => {
                if !c.is_finite() {
                    return Err(GpError::InvalidParams("prior mean must be finite".into()));
                }
            }
            PriorMean::Bump { center, widths, amplitude, offset } => {
                if center.len() != dim || widths.len() != dim {
                    return Err(GpError::DimensionMismatch {
                        expected: dim,
                        found: center.len().max(widths.len()),
                    });
                }
                if widths.iter().any(|w| !w.is_finite() || *w <= 0.0)
                    || center.iter().any(|c| !c.is_finite())
                    || !amplitude.is_finite()
                    || !offset.is_finite()
                {
                    return Err(GpError::InvalidParams(
                        "bump prior needs finite center/offset/amplitude and positive widths"
                            .into(),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn eval(&self, q: &[f64]) -> f64 {
        match self {
            PriorMean::Constant(c) => *c,
            PriorMean::Bump { center, widths, amplitude, offset } => {
                let mut r2 = 0.0;
                for ((&x, &c), &w) in q.iter().zip(center).zip(widths) {
                    let d = (x - c) / w;
                    r2 += d * d;
                }
                offset + amplitude * (-0.5 * r2).exp()
            }
        }
    }
}

/// Jitter ladder tried when the regularized kernel matrix fails to
/// factorize, as multiples of the signal variance.
const JITTER_LADDER: [f64; 5] = [0.0, 1e-12, 1e-10, 1e-8, 1e-6];

/// Fitted Gaussian-process posterior. Immutable once fitted; predictions are
/// safe to run concurrently.
#[derive(Debug)]
pub struct GpPosterior {
    data: Vec<(Vec<f64>, f64)>,
    kernel: KernelParams,
    noise_variance: f64,
    prior_mean: PriorMean,
    /// Lower Cholesky factor of K + (noise + jitter) I; empty when no data.
    chol_l: DMatrix<f64>,
    alpha: DVector<f64>,
    jitter_used: f64,
    variance_clamps: AtomicU64,
}

impl Clone for GpPosterior {
    fn clone(&self) -> Self {
        Self {
            data: self.data.clone(),
            kernel: self.kernel.clone(),
            noise_variance: self.noise_variance,
            prior_mean: self.prior_mean.clone(),
            chol_l: self.chol_l.clone(),
            alpha: self.alpha.clone(),
            jitter_used: self.jitter_used,
            variance_clamps: AtomicU64::new(self.variance_clamps.load(Ordering::Relaxed)),
        }
    }
}

impl GpPosterior {
    /// Fit exact GP regression to `data`, factorizing the regularized kernel
    /// matrix. An empty dataset is allowed: predictions then return the
    /// prior.
    pub fn fit(
        data: Vec<(Vec<f64>, f64)>,
        kernel: KernelParams,
        noise_variance: f64,
        prior_mean: PriorMean,
    ) -> Result<Self, GpError> {
        if !noise_variance.is_finite() || noise_variance < 0.0 {
            return Err(GpError::InvalidParams(
                "noise variance must be finite and non-negative".into(),
            ));
        }
        prior_mean.validate(kernel.dim())?;
        for (q, y) in &data {
            if q.len() != kernel.dim() {
                return Err(GpError::DimensionMismatch {
                    expected: kernel.dim(),
                    found: q.len(),
                });
            }
            if q.iter().any(|v| !v.is_finite()) || !y.is_finite() {
                return Err(GpError::InvalidParams("training data must be finite".into()));
            }
        }
        let n = data.len();
        if n == 0 {
            return Ok(Self {
                data,
                kernel,
                noise_variance,
                prior_mean,
                chol_l: DMatrix::zeros(0, 0),
                alpha: DVector::zeros(0),
                jitter_used: 0.0,
                variance_clamps: AtomicU64::new(0),
            });
        }

        let base = DMatrix::from_fn(n, n, |i, j| {
            kernel.eval_unchecked(&data[i].0, &data[j].0)
        });
        let mut fitted = None;
        let mut jitter_used = 0.0;
        for &scale in &JITTER_LADDER {
            let jitter = scale * kernel.signal_variance();
            let mut m = base.clone();
            for i in 0..n {
                m[(i, i)] += noise_variance + jitter;
            }
            if let Some(chol) = Cholesky::new(m) {
                jitter_used = jitter;
                fitted = Some(chol);
                break;
            }
        }
        let Some(chol) = fitted else {
            return Err(GpError::NotPositiveDefinite {
                n,
                max_jitter: JITTER_LADDER[JITTER_LADDER.len() - 1] * kernel.signal_variance(),
            });
        };
        let residuals = DVector::from_fn(n, |i, _| data[i].1 - prior_mean.eval(&data[i].0));
        let alpha = chol.solve(&residuals);
        Ok(Self {
            data,
            kernel,
            noise_variance,
            prior_mean,
            chol_l: chol.unpack(),
            alpha,
            jitter_used,
            variance_clamps: AtomicU64::new(0),
        })
    }

    /// Refit with one more observation appended.
    pub fn with_observation(&self, q: Vec<f64>, target: f64) -> Result<Self, GpError> {
        let mut data = self.data.clone();
        data.push((q, target));
        Self::fit(data, self.kernel.clone(), self.noise_variance, self.prior_mean.clone())
    }

    pub fn data(&self) -> &[(Vec<f64>, f64)] {
        &self.data
    }

    pub fn kernel(&self) -> &KernelParams {
        &self.kernel
    }

    pub fn noise_variance(&self) -> f64 {
        self.noise_variance
    }

    pub fn prior_mean(&self) -> &PriorMean {
        &self.prior_mean
    }

    pub fn jitter_used(&self) -> f64 {
        self.jitter_used
    }

    /// How often a tiny negative predicted variance was clamped to zero.
    pub fn variance_clamps(&self) -> u64 {
        self.variance_clamps.load(Ordering::Relaxed)
    }

    /// Posterior mean and variance at one point.
    pub fn predict(&self, q: &[f64]) -> Result<(f64, f64), GpError> {
        Ok(self.predict_many(std::slice::from_ref(&q))?[0])
    }

    /// Posterior mean and variance at many points, sharing one triangular
    /// solve.
    pub fn predict_many<Q: AsRef<[f64]>>(&self, qs: &[Q]) -> Result<Vec<(f64, f64)>, GpError> {
        for q in qs {
            if q.as_ref().len() != self.kernel.dim() {
                return Err(GpError::DimensionMismatch {
                    expected: self.kernel.dim(),
                    found: q.as_ref().len(),
                });
            }
        }
        let n = self.data.len();
        let m = qs.len();
        if n == 0 {
            return Ok(qs
                .iter()
                .map(|q| (self.prior_mean.eval(q.as_ref()), self.kernel.signal_variance()))
                .collect());
        }
        let kstar = DMatrix::from_fn(n, m, |i, j| {
            self.kernel.eval_unchecked(&self.data[i].0, qs[j].as_ref())
        });
        let v = self
            .chol_l
            .solve_lower_triangular(&kstar)
            .expect("Cholesky factor is invertible");
        let mut out = Vec::with_capacity(m);
        for j in 0..m {
            let mean = self.prior_mean.eval(qs[j].as_ref()) + kstar.column(j).dot(&self.alpha);
            let mut var = self.kernel.signal_variance() - v.column(j).norm_squared();
            if var < 0.0 {
                self.variance_clamps.fetch_add(1, Ordering::Relaxed);
                var = 0.0;
            }
            out.push((mean, var));
        }
        Ok(out)
    }

    /// Probability that the modeled value at `q` exceeds `lambda`.
    pub fn prob_exceeds(&self, q: &[f64], lambda: f64) -> Result<f64, GpError> {
        let (mean, var) = self.predict(q)?;
        Ok(exceed_probability(mean, var, lambda))
    }
}

/// P[X > lambda] for X ~ N(mean, variance); degenerates to a point mass when
/// the variance is zero.
pub fn exceed_probability(mean: f64, variance: f64, lambda: f64) -> f64 {
    if variance <= 0.0 {
        return if mean > lambda { 1.0 } else { 0.0 };
    }
    let z = (lambda - mean) / variance.sqrt();
    let normal = Normal::standard();
    1.0 - normal.cdf(z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn unit_kernel(dim: usize) -> KernelParams {
        KernelParams::new(vec![1.0; dim], 1.0, Matern::FiveHalves).unwrap()
    }

    /// Dense GP solve with hand-rolled Gauss-Jordan elimination, independent
    /// of the Cholesky path under test.
    pub(crate) fn dense_reference(
        data: &[(Vec<f64>, f64)],
        kernel: &KernelParams,
        noise: f64,
        prior: &PriorMean,
        q: &[f64],
    ) -> (f64, f64) {
        let n = data.len();
        let mut m = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                m[i][j] = kernel.eval(&data[i].0, &data[j].0).unwrap();
            }
            m[i][i] += noise;
        }
        let residuals: Vec<f64> =
            data.iter().map(|(x, y)| y - prior.eval(x)).collect();
        let kstar: Vec<f64> = data.iter().map(|(x, _)| kernel.eval(x, q).unwrap()).collect();
        let a = gauss_solve(&m, &residuals);
        let w = gauss_solve(&m, &kstar);
        let mean = prior.eval(q) + kstar.iter().zip(&a).map(|(k, a)| k * a).sum::<f64>();
        let var = kernel.eval(q, q).unwrap()
            - kstar.iter().zip(&w).map(|(k, w)| k * w).sum::<f64>();
        (mean, var)
    }

    fn gauss_solve(m: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
        let n = b.len();
        let mut aug: Vec<Vec<f64>> = m
            .iter()
            .zip(b)
            .map(|(row, &bi)| {
                let mut r = row.clone();
                r.push(bi);
                r
            })
            .collect();
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&a, &b| aug[a][col].abs().total_cmp(&aug[b][col].abs()))
                .unwrap();
            aug.swap(col, pivot);
            let p = aug[col][col];
            assert!(p.abs() > 0.0, "singular system in reference solver");
            for r in 0..n {
                if r != col {
                    let factor = aug[r][col] / p;
                    for c in col..=n {
                        aug[r][c] -= factor * aug[col][c];
                    }
                }
            }
        }
        (0..n).map(|i| aug[i][n] / aug[i][i]).collect()
    }

    #[test]
    fn kernel_at_zero_distance_is_signal_variance() {
        let k = KernelParams::new(vec![0.3, 0.7], 2.5, Matern::FiveHalves).unwrap();
        let q = [0.4, -1.0];
        assert_relative_eq!(k.eval(&q, &q).unwrap(), 2.5);
    }

    #[test]
    fn kernel_is_symmetric() {
        for smooth in [Matern::Half, Matern::ThreeHalves, Matern::FiveHalves] {
            let k = KernelParams::new(vec![0.5, 1.5], 1.2, smooth).unwrap();
            let a = [0.0, 1.0];
            let b = [2.0, -0.5];
            assert_eq!(k.eval(&a, &b).unwrap(), k.eval(&b, &a).unwrap());
        }
    }

    #[test]
    fn exponential_kernel_closed_form() {
        let k = KernelParams::new(vec![1.0], 1.0, Matern::Half).unwrap();
        let r = 0.8;
        assert_relative_eq!(k.eval(&[0.0], &[r]).unwrap(), (-r).exp(), max_relative = 1e-14);
    }

    #[test]
    fn invalid_kernel_params_are_rejected() {
        assert!(KernelParams::new(vec![], 1.0, Matern::Half).is_err());
        assert!(KernelParams::new(vec![0.0], 1.0, Matern::Half).is_err());
        assert!(KernelParams::new(vec![1.0], -1.0, Matern::Half).is_err());
        assert!(KernelParams::new(vec![1.0], f64::NAN, Matern::Half).is_err());
    }

    #[test]
    fn empty_dataset_predicts_the_prior() {
        let gp = GpPosterior::fit(vec![], unit_kernel(2), 1e-6, PriorMean::Constant(0.7))
            .unwrap();
        let (mean, var) = gp.predict(&[0.3, 0.4]).unwrap();
        assert_relative_eq!(mean, 0.7);
        assert_relative_eq!(var, 1.0);
    }

    #[test]
    fn single_point_interpolates_as_noise_vanishes() {
        let gp = GpPosterior::fit(
            vec![(vec![0.5], 2.0)],
            KernelParams::new(vec![1.0], 1.0, Matern::FiveHalves).unwrap(),
            1e-12,
            PriorMean::Constant(0.0),
        )
        .unwrap();
        let (mean, var_at) = gp.predict(&[0.5]).unwrap();
        assert_relative_eq!(mean, 2.0, max_relative = 1e-9);
        let (_, var_far) = gp.predict(&[8.0]).unwrap();
        assert!(var_at < var_far);
        assert_relative_eq!(var_far, 1.0, max_relative = 1e-6);
    }

    #[test]
    fn posterior_matches_dense_reference() {
        let mut rng = StdRng::seed_from_u64(17);
        for trial in 0..20 {
            let n = rng.random_range(5..=50);
            let kernel =
                KernelParams::new(vec![0.4, 0.8], 0.9, Matern::FiveHalves).unwrap();
            let prior = PriorMean::Constant(0.3);
            let noise = 1e-4;
            let data: Vec<(Vec<f64>, f64)> = (0..n)
                .map(|_| {
                    (
                        vec![rng.random_range(0.0..2.0), rng.random_range(0.0..1.0)],
                        rng.random_range(0.0..1.5),
                    )
                })
                .collect();
            let gp = GpPosterior::fit(data.clone(), kernel.clone(), noise, prior.clone())
                .unwrap();
            for _ in 0..5 {
                let q = vec![rng.random_range(0.0..2.0), rng.random_range(0.0..1.0)];
                let (mean, var) = gp.predict(&q).unwrap();
                let (mean_ref, var_ref) = dense_reference(&data, &kernel, noise, &prior, &q);
                assert_relative_eq!(mean, mean_ref, max_relative = 1e-8, epsilon = 1e-10);
                assert_relative_eq!(var, var_ref, max_relative = 1e-8, epsilon = 1e-10);
            }
            let _ = trial;
        }
    }

    #[test]
    fn noise_tight_posterior_reproduces_targets() {
        let mut rng = StdRng::seed_from_u64(3);
        let kernel = KernelParams::new(vec![0.5], 1.0, Matern::FiveHalves).unwrap();
        let data: Vec<(Vec<f64>, f64)> = (0..10)
            .map(|i| (vec![i as f64 * 0.35], rng.random_range(0.0..2.0)))
            .collect();
        let gp =
            GpPosterior::fit(data.clone(), kernel, 1e-8, PriorMean::Constant(0.0)).unwrap();
        for (q, y) in &data {
            let (mean, _) = gp.predict(q).unwrap();
            assert!((mean - y).abs() < 1e-3, "|{mean} - {y}| too large");
        }
    }

    #[test]
    fn sampled_kernel_matrices_factorize_within_the_jitter_budget() {
        let mut rng = StdRng::seed_from_u64(41);
        for _ in 0..25 {
            let n = rng.random_range(5..=50);
            let sv = rng.random_range(0.1..4.0);
            let kernel = KernelParams::new(vec![0.3, 0.6], sv, Matern::FiveHalves).unwrap();
            let data: Vec<(Vec<f64>, f64)> = (0..n)
                .map(|_| (vec![rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)], 0.0))
                .collect();
            // no observation noise: the jitter ladder alone must succeed
            let gp = GpPosterior::fit(data, kernel, 0.0, PriorMean::Constant(0.0)).unwrap();
            assert!(gp.jitter_used() <= 1e-6 * sv);
        }
    }

    #[test]
    fn exceedance_probability_reference_points() {
        assert_relative_eq!(exceed_probability(1.0, 1.0, 1.0), 0.5, epsilon = 1e-12);
        assert_relative_eq!(exceed_probability(1.0, 1.0, 0.0), 0.8413447460685429, epsilon = 1e-9);
        assert_eq!(exceed_probability(1.0, 1.0, f64::INFINITY), 0.0);
        assert_eq!(exceed_probability(1.0, 1.0, f64::NEG_INFINITY), 1.0);
        // zero variance degenerates to a point mass
        assert_eq!(exceed_probability(0.5, 0.0, 0.4), 1.0);
        assert_eq!(exceed_probability(0.5, 0.0, 0.6), 0.0);
    }

    #[test]
    fn viability_probability_equals_exceedance_at_zero() {
        // mass below zero counts as "unviable"; P[viable] = 1 - CDF(0)
        let gp = GpPosterior::fit(
            vec![(vec![0.0], 0.4)],
            KernelParams::new(vec![1.0], 0.25, Matern::FiveHalves).unwrap(),
            1e-6,
            PriorMean::Constant(0.0),
        )
        .unwrap();
        let q = [0.3];
        let (mean, var) = gp.predict(&q).unwrap();
        let normal = Normal::standard();
        let expected = 1.0 - normal.cdf((0.0 - mean) / var.sqrt());
        assert_relative_eq!(gp.prob_exceeds(&q, 0.0).unwrap(), expected, epsilon = 1e-14);
    }

    #[test]
    fn lengthscale_estimation_recovers_scale_ordering() {
        use crate::grid::{AxisGrid, Domain, ProductGrid, ScalarField};
        use std::sync::Arc;
        // field varies fast along the state axis, slowly along the action
        let grid = Arc::new(
            ProductGrid::new(
                vec![AxisGrid::new(0.0, 1.0, 30).unwrap()],
                vec![AxisGrid::new(0.0, 1.0, 30).unwrap()],
            )
            .unwrap(),
        );
        let mut f = ScalarField::new_zero(Arc::clone(&grid), Domain::StateActions);
        for s in 0..30 {
            for a in 0..30 {
                let x = grid.state_center(s)[0];
                let y = grid.action_center(a)[0];
                f.set(grid.q_index(s, a), (8.0 * x).sin() + 0.3 * (2.0 * y).cos());
            }
        }
        let est = KernelParams::estimate_from_field(&f, Matern::FiveHalves).unwrap();
        assert!(est.lengthscales()[0] < est.lengthscales()[1]);
        assert!(est.signal_variance() > 0.0);
    }

    proptest! {
        // P[X > lambda] is non-increasing in lambda for a fixed posterior
        #[test]
        fn exceedance_is_monotone(
            mean in -2.0f64..2.0,
            var in 0.0f64..4.0,
            l1 in 0.0f64..3.0,
            l2 in 0.0f64..3.0,
        ) {
            let (lo, hi) = if l1 <= l2 { (l1, l2) } else { (l2, l1) };
            prop_assert!(exceed_probability(mean, var, hi) <= exceed_probability(mean, var, lo) + 1e-15);
        }
    }
}
