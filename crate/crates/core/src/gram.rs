//! Empirical Christoffel functions of a weighted sample.
//!
//! With `W = diag(√η)` and `M = λI + W K W`, every query reduces to solves
//! with the Cholesky factor of `M`, whose spectrum is bounded below by `λ`:
//!
//! ```text
//! C(z)  = λ / (q(0) − v_zᵀ W M⁻¹ W v_z),      v_z = (k(z, xⱼ))ⱼ
//! C(xᵢ) = ηᵢ / (1 − λ (M⁻¹)ᵢᵢ)                (ηᵢ > 0)
//! ```

use std::sync::Arc;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{ensure_finite, invalid, Error, Result};
use crate::kernel::KernelSpec;
use crate::measure::WeightedSample;

/// Jitter levels tried in turn, relative to `q(0)`.
pub const JITTER_LADDER: [f64; 6] = [0.0, 1e-12, 1e-11, 1e-10, 1e-9, 1e-8];

/// Largest accepted relative residual of the factorization on a probe vector.
pub const PROBE_RESIDUAL: f64 = 1e-8;

/// Smallest accepted `λ / (q(0)·n)`.
pub const LAMBDA_FLOOR: f64 = 1e-12;

// Above this value of λ(M⁻¹)ᵢᵢ the support formula loses digits to cancellation.
const SUPPORT_FORM_LIMIT: f64 = 0.5;

#[derive(Debug)]
struct Assembled {
    kernel: KernelSpec,
    sample: WeightedSample,
    gram: DMatrix<f64>,
    sqrt_eta: DVector<f64>,
}

/// A Gram matrix with a factorization of the regularized system for one `λ`.
#[derive(Debug, Clone)]
pub struct GramSystem {
    shared: Arc<Assembled>,
    lambda: f64,
    jitter: f64,
    residual: f64,
    chol: Cholesky<f64, Dyn>,
}

pub(crate) fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn probe(n: usize) -> DVector<f64> {
    DVector::from_fn(n, |i, _| ((i + 1) as f64 * 0.754_877_666).sin() + 0.5)
}

impl GramSystem {
    pub fn assemble(kernel: &KernelSpec, sample: &WeightedSample, lambda: f64) -> Result<Self> {
        if kernel.dim() != sample.dim() {
            return Err(Error::DimensionMismatch {
                expected: kernel.dim(),
                got: sample.dim(),
            });
        }
        let n = sample.len();
        let q0 = kernel.q_origin();
        let mut gram = DMatrix::<f64>::zeros(n, n);
        for j in 0..n {
            gram[(j, j)] = q0;
            let xj = sample.point(j);
            for i in j + 1..n {
                let v = kernel.eval_q_radial(distance(sample.point(i), xj))?;
                gram[(i, j)] = v;
                gram[(j, i)] = v;
            }
        }
        let sqrt_eta = DVector::from_iterator(n, sample.weights().iter().map(|w| w.sqrt()));
        let shared = Arc::new(Assembled {
            kernel: kernel.clone(),
            sample: sample.clone(),
            gram,
            sqrt_eta,
        });
        Self::factor(shared, lambda)
    }

    /// Same Gram matrix, new `λ`: only the factorization is recomputed.
    pub fn refit_lambda(&self, lambda: f64) -> Result<Self> {
        Self::factor(Arc::clone(&self.shared), lambda)
    }

    fn factor(shared: Arc<Assembled>, lambda: f64) -> Result<Self> {
        let n = shared.sample.len();
        let q0 = shared.kernel.q_origin();
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(invalid("lambda", format!("must be positive and finite, got {lambda}")));
        }
        let floor = LAMBDA_FLOOR * q0 * n as f64;
        if lambda < floor {
            return Err(Error::LambdaTooSmall { lambda, floor });
        }
        let w = &shared.sqrt_eta;
        let mut base = shared.gram.clone();
        for j in 0..n {
            for i in 0..n {
                base[(i, j)] *= w[i] * w[j];
            }
            base[(j, j)] += lambda;
        }
        let p = probe(n);
        let mut last = 0.0;
        for &eps in &JITTER_LADDER {
            let jitter = eps * q0;
            last = jitter;
            let mut m = base.clone();
            for i in 0..n {
                m[(i, i)] += jitter * w[i] * w[i];
            }
            let target = &m * &p;
            let Some(chol) = Cholesky::new(m) else {
                continue;
            };
            let l = chol.l_dirty();
            let mut lt_p = p.clone();
            upper_times(l, &mut lt_p);
            lower_times(l, &mut lt_p);
            let residual = (&target - &lt_p).norm() / target.norm();
            if residual <= PROBE_RESIDUAL {
                return Ok(Self {
                    shared,
                    lambda,
                    jitter,
                    residual,
                    chol,
                });
            }
        }
        Err(Error::Factorization { jitter: last })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Diagonal jitter added to `K` (absolute, already scaled by `q(0)`).
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    /// Relative residual of the factorization on the probe vector.
    pub fn probe_residual(&self) -> f64 {
        self.residual
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.shared.kernel
    }

    pub fn sample(&self) -> &WeightedSample {
        &self.shared.sample
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.shared.gram
    }

    pub fn len(&self) -> usize {
        self.shared.sample.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i < self.len() {
            Ok(())
        } else {
            Err(invalid("index", format!("{i} out of range for {} points", self.len())))
        }
    }

    /// `C(xᵢ)` at a support point.
    pub fn christoffel_at_support(&self, i: usize) -> Result<f64> {
        self.check_index(i)?;
        let n = self.len();
        let eta = self.shared.sample.weights()[i];
        if eta > 0.0 {
            let mut e = DVector::zeros(n);
            e[i] = 1.0;
            self.chol.l_dirty().solve_lower_triangular_mut(&mut e);
            let t = self.lambda * e.norm_squared();
            if t <= SUPPORT_FORM_LIMIT {
                return Ok(eta / (1.0 - t));
            }
        }
        let v = self.shared.gram.column(i).into_owned();
        Ok(self.christoffel_from_column(v, self.kernel().q_origin() + self.jitter))
    }

    /// `C(xᵢ)` for every support point, sharing one triangular inverse.
    pub fn christoffel_at_support_all(&self) -> Vec<f64> {
        let n = self.len();
        let mut linv = DMatrix::<f64>::identity(n, n);
        self.chol.l_dirty().solve_lower_triangular_mut(&mut linv);
        let eta = self.shared.sample.weights();
        let q0 = self.kernel().q_origin() + self.jitter;
        (0..n)
            .map(|i| {
                let t = self.lambda * linv.column(i).norm_squared();
                if eta[i] > 0.0 && t <= SUPPORT_FORM_LIMIT {
                    eta[i] / (1.0 - t)
                } else {
                    self.christoffel_from_column(self.shared.gram.column(i).into_owned(), q0)
                }
            })
            .collect()
    }

    fn cross_column(&self, z: &[f64]) -> Result<DVector<f64>> {
        let s = &self.shared.sample;
        if z.len() != s.dim() {
            return Err(Error::DimensionMismatch {
                expected: s.dim(),
                got: z.len(),
            });
        }
        ensure_finite(z, "christoffel_at_point")?;
        let mut v = DVector::zeros(s.len());
        for (j, x) in s.points().enumerate() {
            v[j] = self.kernel().eval_q_radial(distance(z, x))?;
        }
        Ok(v)
    }

    fn christoffel_from_column(&self, mut v: DVector<f64>, kzz: f64) -> f64 {
        v.component_mul_assign(&self.shared.sqrt_eta);
        self.chol.l_dirty().solve_lower_triangular_mut(&mut v);
        self.lambda / (kzz - v.norm_squared())
    }

    /// `C(z)` at an arbitrary point.
    pub fn christoffel_at_point(&self, z: &[f64]) -> Result<f64> {
        let v = self.cross_column(z)?;
        Ok(self.christoffel_from_column(v, self.kernel().q_origin()))
    }

    /// `C` at many points with one blocked triangular solve.
    pub fn christoffel_at_points(&self, zs: &[Vec<f64>]) -> Result<Vec<f64>> {
        const BLOCK: usize = 256;
        let n = self.len();
        let q0 = self.kernel().q_origin();
        let mut out = Vec::with_capacity(zs.len());
        for chunk in zs.chunks(BLOCK) {
            let mut v = DMatrix::<f64>::zeros(n, chunk.len());
            for (c, z) in chunk.iter().enumerate() {
                let col = self.cross_column(z)?;
                v.set_column(c, &col.component_mul(&self.shared.sqrt_eta));
            }
            self.chol.l_dirty().solve_lower_triangular_mut(&mut v);
            out.extend(v.column_iter().map(|col| self.lambda / (q0 - col.norm_squared())));
        }
        Ok(out)
    }

    /// `1 / C(z)`.
    pub fn leverage_score(&self, z: &[f64]) -> Result<f64> {
        Ok(1.0 / self.christoffel_at_point(z)?)
    }

    /// `ηᵢ⁻¹ (K (K + λ diag(η)⁻¹)⁻¹)ᵢᵢ` for every `i`, by an LU factorization
    /// independent of the Cholesky route. This is the leverage score `1/C(xᵢ)`.
    /// Requires all weights positive.
    pub fn smoothing_leverage(&self) -> Result<Vec<f64>> {
        let eta = self.shared.sample.weights();
        if let Some(i) = eta.iter().position(|&w| w <= 0.0) {
            return Err(invalid("weights", format!("weight {i} is zero")));
        }
        let k = &self.shared.gram;
        let mut a = k.clone();
        for i in 0..self.len() {
            a[(i, i)] += self.jitter + self.lambda / eta[i];
        }
        let lu = a.lu();
        let mut kj = k.clone();
        for i in 0..self.len() {
            kj[(i, i)] += self.jitter;
        }
        let y = lu.solve(&kj).ok_or(Error::Factorization { jitter: self.jitter })?;
        Ok((0..self.len()).map(|i| y[(i, i)] / eta[i]).collect())
    }

    /// The minimizer `f*` defining `C(z)`, evaluated at `ys`:
    /// `f*(y) = C(z)/λ · (k(y, z) − v_yᵀ W M⁻¹ W v_z)`, with `f*(z) = 1`.
    pub fn extremal_function(&self, z: &[f64], ys: &[Vec<f64>]) -> Result<Vec<f64>> {
        let mut vz = self.cross_column(z)?;
        vz.component_mul_assign(&self.shared.sqrt_eta);
        let mut a = vz.clone();
        self.chol.solve_mut(&mut a);
        let c = self.lambda / (self.kernel().q_origin() - vz.dot(&a));
        ys.iter()
            .map(|y| {
                let mut vy = self.cross_column(y)?;
                vy.component_mul_assign(&self.shared.sqrt_eta);
                let kyz = self.kernel().eval_q_radial(distance(y, z))?;
                Ok(c / self.lambda * (kyz - vy.dot(&a)))
            })
            .collect()
    }
}

/// `x ← Lᵀ x` for lower-triangular `L` stored in the lower part of `l`.
fn upper_times(l: &DMatrix<f64>, x: &mut DVector<f64>) {
    let n = x.len();
    for i in 0..n {
        let mut s = 0.0;
        for k in i..n {
            s += l[(k, i)] * x[k];
        }
        x[i] = s;
    }
}

/// `x ← L x` for lower-triangular `L` stored in the lower part of `l`.
fn lower_times(l: &DMatrix<f64>, x: &mut DVector<f64>) {
    let n = x.len();
    for i in (0..n).rev() {
        let mut s = 0.0;
        for k in 0..=i {
            s += l[(i, k)] * x[k];
        }
        x[i] = s;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn sample(points: &[f64], weights: &[f64]) -> WeightedSample {
        let pts: Vec<Vec<f64>> = points.iter().map(|&x| vec![x]).collect();
        WeightedSample::new(&pts, weights).unwrap()
    }

    #[test]
    fn one_point_systems() {
        let k = KernelSpec::matern(1.3, 0.8, 1).unwrap();
        for &lambda in &[1e-3, 0.5, 4.0] {
            let sys = GramSystem::assemble(&k, &sample(&[0.2], &[1.0]), lambda).unwrap();
            assert_relative_eq!(sys.christoffel_at_support(0).unwrap(), 1.0 + lambda, max_relative = 1e-14);
            assert_relative_eq!(sys.christoffel_at_point(&[0.2]).unwrap(), 1.0 + lambda, max_relative = 1e-12);
            let empty = GramSystem::assemble(&k, &sample(&[0.2], &[0.0]), lambda).unwrap();
            assert_relative_eq!(empty.christoffel_at_support(0).unwrap(), lambda, max_relative = 1e-14);
        }
        let sys = GramSystem::assemble(&k, &sample(&[0.0], &[1.0]), 1.0).unwrap();
        assert_relative_eq!(sys.leverage_score(&[0.0]).unwrap(), 0.5, max_relative = 1e-14);
    }

    #[test]
    fn two_point_gram() {
        let k = KernelSpec::matern(0.5, 1.0, 1).unwrap();
        let sys = GramSystem::assemble(&k, &sample(&[0.0, 1.0], &[0.5, 0.5]), 0.1).unwrap();
        let g = sys.gram();
        assert_eq!(g[(0, 0)], 1.0);
        assert_relative_eq!(g[(0, 1)], (-1.0f64).exp(), max_relative = 1e-15);
        assert_eq!(g[(0, 1)], g[(1, 0)]);
    }

    #[test]
    fn far_query_gives_lambda() {
        let k = KernelSpec::matern(0.5, 0.01, 1).unwrap();
        let sys = GramSystem::assemble(&k, &sample(&[0.0, 0.3], &[0.5, 0.5]), 1e-2).unwrap();
        assert_eq!(sys.christoffel_at_point(&[50.0]).unwrap(), 1e-2);
    }

    #[test]
    fn point_and_support_forms_agree() {
        let k = KernelSpec::matern(1.0, 0.4, 1).unwrap();
        let xs: Vec<f64> = (0..12).map(|i| -1.0 + 0.17 * i as f64).collect();
        let w: Vec<f64> = (0..12).map(|i| 0.05 + 0.01 * i as f64).collect();
        let sys = GramSystem::assemble(&k, &sample(&xs, &w), 1e-2).unwrap();
        let all = sys.christoffel_at_support_all();
        let batch = sys
            .christoffel_at_points(&xs.iter().map(|&x| vec![x]).collect::<Vec<_>>())
            .unwrap();
        let lev = sys.smoothing_leverage().unwrap();
        for i in 0..xs.len() {
            let c = sys.christoffel_at_support(i).unwrap();
            assert_relative_eq!(c, all[i], max_relative = 1e-12);
            assert_relative_eq!(c, sys.christoffel_at_point(&[xs[i]]).unwrap(), max_relative = 1e-8);
            assert_relative_eq!(c, batch[i], max_relative = 1e-8);
            assert_relative_eq!(c * lev[i], 1.0, max_relative = 1e-8);
        }
    }

    #[test]
    fn refit_same_lambda_is_bitwise_equal() {
        let k = KernelSpec::matern(1.5, 0.3, 1).unwrap();
        let s = sample(&[0.0, 0.1, 0.5, 0.9], &[0.1, 0.4, 0.3, 0.2]);
        let a = GramSystem::assemble(&k, &s, 3e-3).unwrap();
        let b = a.refit_lambda(3e-3).unwrap();
        for z in [0.05, 0.7, 2.0] {
            assert_eq!(
                a.christoffel_at_point(&[z]).unwrap().to_bits(),
                b.christoffel_at_point(&[z]).unwrap().to_bits()
            );
        }
        let c = a.refit_lambda(1e-2).unwrap();
        for i in 0..4 {
            assert!(c.christoffel_at_support(i).unwrap() > a.christoffel_at_support(i).unwrap());
        }
    }

    #[test]
    fn extremal_function_interpolates_one() {
        let k = KernelSpec::matern(0.5, 0.2, 1).unwrap();
        let s = sample(&[-0.5, 0.0, 0.5], &[0.3, 0.3, 0.3]);
        let sys = GramSystem::assemble(&k, &s, 1e-3).unwrap();
        let f = sys.extremal_function(&[0.25], &[vec![0.25], vec![10.0]]).unwrap();
        assert_relative_eq!(f[0], 1.0, max_relative = 1e-10);
        assert!(f[1].abs() < 1e-12);
    }

    #[test]
    fn guards() {
        let k = KernelSpec::matern(0.5, 1.0, 1).unwrap();
        let s = sample(&[0.0, 1.0], &[0.5, 0.5]);
        assert!(matches!(
            GramSystem::assemble(&k, &s, 1e-13),
            Err(Error::LambdaTooSmall { .. })
        ));
        assert!(GramSystem::assemble(&k, &s, -1.0).is_err());
        let k2 = KernelSpec::matern(0.5, 1.0, 2).unwrap();
        assert!(GramSystem::assemble(&k2, &s, 1.0).is_err());
        let sys = GramSystem::assemble(&k, &s, 1.0).unwrap();
        assert!(sys.christoffel_at_support(2).is_err());
        assert!(sys.christoffel_at_point(&[f64::NAN]).is_err());
        assert!(sys.probe_residual() <= PROBE_RESIDUAL);
        assert_eq!(sys.jitter(), 0.0);
    }
}
