//! Population quantities of the Lebesgue measure: `D(λ)`, the extremal
//! function `f_λ`, the constant `q₀` and the predictors built from them.
//!
//! ```text
//! D(λ)   = (2π)^d / ∫ q̂(ω)/(λ + q̂(ω)) dω
//! f_λ(x) = D(λ) (2π)^{-d} ∫ q̂(ω)/(λ + q̂(ω)) e^{iω·x} dω
//! D(λ)   ~ λ^β / q₀,   β = d/(2sγ)
//! ```

use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};
use crate::kernel::{Family, KernelSpec, Sobolev};
use crate::quad::{integrate, radial_fourier, radial_integral, OscillatorySettings, Tolerance};
use crate::special::{ln_gamma, sphere_area};

/// Relative accuracy of `D(λ)`.
pub const D_REL_TOL: f64 = 1e-8;

/// `λ` at which `λ^β / D(λ)` stands in for its limit `q₀`.
pub const Q0_LIMIT_LAMBDA: f64 = 1e-8;

/// Relative gap between closed form and quadrature above which a diagnostic is raised.
pub const Q0_AGREEMENT: f64 = 0.01;

/// The ways `q₀` was obtained, side by side.
#[derive(Debug, Clone, PartialEq)]
pub struct Q0Report {
    /// `(2π)^{-d} ∫ 1/(1 + c‖ω‖^{2sγ}) dω` by radial quadrature, with `c` the
    /// tail constant of `q̂`. Authoritative.
    pub quadrature: f64,
    /// Analytic value of the same integral.
    pub closed_form: f64,
    /// The Matérn formula `A^{1/(2ν+d)} / ((2ν+d) sin(dπ/(2ν+d)))`, which
    /// coincides with `closed_form` only for `d = 1`.
    pub matern_formula: Option<f64>,
    /// `λ^β / D(λ)` at a small `λ`.
    pub limit: f64,
    /// Set when one of the formulas misses the quadrature value by more than 1%.
    pub diagnostic: Option<String>,
}

impl Q0Report {
    pub fn value(&self) -> f64 {
        self.quadrature
    }
}

/// `D`, `f_λ`, `q₀` and the asymptotic predictors for one kernel.
#[derive(Debug, Clone)]
pub struct SpectralProfile {
    kernel: KernelSpec,
    sobolev: Option<Sobolev>,
    q0: Option<Q0Report>,
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda.is_finite() && lambda > 0.0 {
        Ok(())
    } else {
        Err(invalid("lambda", format!("must be positive and finite, got {lambda}")))
    }
}

impl SpectralProfile {
    pub fn new(kernel: &KernelSpec) -> Result<Self> {
        let mut profile = Self {
            kernel: kernel.clone(),
            sobolev: kernel.sobolev(),
            q0: None,
        };
        if profile.sobolev.is_some() {
            profile.q0 = Some(profile.compute_q0()?);
        }
        Ok(profile)
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn dim(&self) -> usize {
        self.kernel.dim()
    }

    pub fn sobolev(&self) -> Option<Sobolev> {
        self.sobolev
    }

    fn require_sobolev(&self) -> Result<Sobolev> {
        self.sobolev.ok_or_else(|| {
            Error::Unsupported("kernel has no algebraic spectral tail (no Sobolev parameters)".into())
        })
    }

    /// `β = d/(2sγ)`.
    pub fn exponent(&self) -> Result<f64> {
        Ok(self.dim() as f64 / self.require_sobolev()?.order())
    }

    pub fn q0_report(&self) -> Result<&Q0Report> {
        self.require_sobolev()?;
        Ok(self.q0.as_ref().expect("q0 computed with Sobolev parameters"))
    }

    pub fn q0(&self) -> Result<f64> {
        Ok(self.q0_report()?.value())
    }

    /// Radius where `q̂` crosses `λ`, or the kernel's own scale if `q̂` never exceeds `λ`.
    fn knee(&self, lambda: f64) -> f64 {
        let scale = self.kernel.spectral_scale();
        if self.kernel.q_hat_radial(scale) <= lambda {
            return scale;
        }
        let (mut lo, mut hi) = (scale, 2.0 * scale);
        while self.kernel.q_hat_radial(hi) > lambda {
            lo = hi;
            hi *= 2.0;
        }
        for _ in 0..60 {
            let mid = (lo * hi).sqrt();
            if self.kernel.q_hat_radial(mid) > lambda {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    }

    /// `D(λ)`.
    pub fn compute_d(&self, lambda: f64) -> Result<f64> {
        check_lambda(lambda)?;
        let k = &self.kernel;
        let h = |r: f64| {
            let q = k.q_hat_radial(r);
            q / (lambda + q)
        };
        let integral = radial_integral(h, self.dim(), self.knee(lambda), D_REL_TOL * 1e-2)?;
        if !(integral.value > 0.0) || integral.error > D_REL_TOL * integral.value {
            return Err(Error::Quadrature {
                achieved: integral.error / integral.value.abs(),
                requested: D_REL_TOL,
            });
        }
        Ok((2.0 * PI).powi(self.dim() as i32) / integral.value)
    }

    fn compute_q0(&self) -> Result<Q0Report> {
        let sob = self.require_sobolev()?;
        let d = self.dim();
        let df = d as f64;
        let order = sob.order();
        let beta = df / order;
        // q̂(ω) ≈ ‖ω‖^{-2sγ} / c for large ‖ω‖
        let ln_c = match self.kernel.family() {
            Family::Matern { nu, length } => -(df * 2f64.ln() + 0.5 * df * PI.ln() + ln_gamma(nu + df / 2.0)
                + nu * (2.0 * nu).ln()
                - ln_gamma(*nu)
                - 2.0 * nu * length.ln()),
            _ => self.tail_constant(order)?,
        };
        let radius = (-ln_c / order).exp();
        let norm = (2.0 * PI).powi(d as i32);
        let quadrature = radial_integral(
            |r: f64| 1.0 / (1.0 + (ln_c + order * r.ln()).exp()),
            d,
            radius,
            1e-12,
        )?
        .value
            / norm;
        let angle = PI * beta;
        let closed_form = (-beta * ln_c).exp() * sphere_area(d) * PI / (norm * order * angle.sin());
        let matern_formula = match self.kernel.family() {
            Family::Matern { .. } => Some((-ln_c / order).exp() / (order * angle.sin())),
            _ => None,
        };
        let limit = Q0_LIMIT_LAMBDA.powf(beta) / self.compute_d(Q0_LIMIT_LAMBDA)?;

        let gap = |v: f64| (v - quadrature).abs() / quadrature;
        let mut notes = Vec::new();
        if gap(closed_form) > Q0_AGREEMENT {
            notes.push(format!("closed form {closed_form:.10e} vs quadrature {quadrature:.10e}"));
        }
        if gap(limit) > Q0_AGREEMENT {
            notes.push(format!("λ^β/D(λ) limit {limit:.10e} vs quadrature {quadrature:.10e}"));
        }
        if let Some(m) = matern_formula {
            if gap(m) > Q0_AGREEMENT {
                notes.push(format!(
                    "Matérn formula {m:.10e} differs from quadrature {quadrature:.10e} by factor {:.6}",
                    m / quadrature
                ));
            }
        }
        Ok(Q0Report {
            quadrature,
            closed_form,
            matern_formula,
            limit,
            diagnostic: (!notes.is_empty()).then(|| notes.join("; ")),
        })
    }

    /// `ln c` with `q̂(ρ) ρ^{2sγ} → 1/c`, read off far in the tail.
    fn tail_constant(&self, order: f64) -> Result<f64> {
        let mut rho = 1e3 * self.kernel.spectral_scale();
        let ln_at = |r: f64| -(self.kernel.q_hat_radial(r).ln() + order * r.ln());
        let mut prev = ln_at(rho);
        for _ in 0..40 {
            rho *= 4.0;
            let next = ln_at(rho);
            if !next.is_finite() {
                break;
            }
            if (next - prev).abs() < 1e-13 {
                return Ok(next);
            }
            prev = next;
        }
        Err(Error::Unsupported(format!(
            "spectral density does not settle into a ‖ω‖^-{order} tail"
        )))
    }

    /// `f_λ` at a point, for `d ≤ 3`.
    pub fn eval_f_lambda(&self, lambda: f64, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        self.f_lambda_radial(lambda, self.compute_d(lambda)?, r, 1e-10)
    }

    fn f_lambda_radial(&self, lambda: f64, d_value: f64, r: f64, abs_tol: f64) -> Result<f64> {
        check_lambda(lambda)?;
        let k = &self.kernel;
        let h = |w: f64| {
            let q = k.q_hat_radial(w);
            q / (lambda + q)
        };
        let settings = OscillatorySettings {
            abs_tol: abs_tol / d_value,
            ..Default::default()
        };
        Ok(d_value * radial_fourier(h, self.dim(), r, self.knee(lambda), settings)?.value)
    }

    /// `ε(λ) = λ^ℓ` with `ℓ = 0.9 (1 − β)/(8⌈sγ⌉)`.
    pub fn default_epsilon(&self, lambda: f64) -> Result<f64> {
        let sob = self.require_sobolev()?;
        let beta = self.exponent()?;
        let ell = 0.9 * (1.0 - beta) / (8.0 * (sob.s * sob.gamma).ceil());
        Ok(lambda.powf(ell))
    }

    /// `∫_{|x| ≥ ε} f_λ² dx / (λ D(λ))` in one dimension.
    pub fn tail_mass_ratio(&self, lambda: f64, epsilon: f64) -> Result<f64> {
        if self.dim() != 1 {
            return Err(Error::Unsupported("tail mass ratio is implemented for d = 1".into()));
        }
        check_lambda(lambda)?;
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(invalid("epsilon", format!("must be positive, got {epsilon}")));
        }
        let d_value = self.compute_d(lambda)?;
        let budget = lambda * d_value;
        let f_tol = 1e-7 * budget.sqrt();
        // f_λ varies on the scale 1/knee
        let width = (1.0 / self.knee(lambda)).max(epsilon);
        let tol = Tolerance::relative(1e-6).with_abs(1e-13 * budget);
        let mut total = 0.0;
        let mut lo = epsilon;
        let mut step = width;
        for _ in 0..80 {
            let hi = lo + step;
            let mut failure = None;
            let piece = integrate(
                |x| match self.f_lambda_radial(lambda, d_value, x, f_tol) {
                    Ok(v) => v * v,
                    Err(e) => {
                        failure.get_or_insert(e);
                        0.0
                    }
                },
                lo,
                hi,
                tol,
            )?;
            if let Some(e) = failure {
                return Err(e);
            }
            total += 2.0 * piece.value;
            lo = hi;
            step *= 2.0;
            if 2.0 * piece.value.abs() < 1e-12 * budget {
                return Ok(total / budget);
            }
        }
        Err(Error::Quadrature {
            achieved: total / budget,
            requested: 1e-12,
        })
    }

    /// `p · D(λ/p)`.
    pub fn predict_inside(&self, lambda: f64, p: f64) -> Result<f64> {
        if !(p > 0.0 && p.is_finite()) {
            return Err(invalid("p", format!("density must be positive, got {p}")));
        }
        Ok(p * self.compute_d(lambda / p)?)
    }

    /// `λ^β p^{1−β} / q₀`.
    pub fn predict_asymptotic(&self, lambda: f64, p: f64) -> Result<f64> {
        check_lambda(lambda)?;
        if !(p > 0.0 && p.is_finite()) {
            return Err(invalid("p", format!("density must be positive, got {p}")));
        }
        let beta = self.exponent()?;
        Ok(lambda.powf(beta) * p.powf(1.0 - beta) / self.q0()?)
    }

    /// Envelope scales outside the support: `(√λ D(√λ), λ)`.
    pub fn predict_outside(&self, lambda: f64) -> Result<(f64, f64)> {
        check_lambda(lambda)?;
        let root = lambda.sqrt();
        Ok((root * self.compute_d(root)?, lambda))
    }
}
