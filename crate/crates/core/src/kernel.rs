//! Translation-invariant kernels `k(x, y) = q(x - y)` and their spectral
//! densities `q̂`, with the transform convention
//! `q̂(ω) = ∫ q(x) e^{-i x·ω} dx` and `q(x) = (2π)^{-d} ∫ q̂(ω) e^{i x·ω} dω`.
//!
//! The Matérn family is normalized so that `q(0) = 1`:
//!
//! ```text
//! q(x) = 2^{1-ν}/Γ(ν) · z^ν K_ν(z),   z = √(2ν)‖x‖/l
//! q̂(ω) = 2^d π^{d/2} Γ(ν+d/2) (2ν)^ν / (Γ(ν) l^{2ν}) · (2ν/l² + ‖ω‖²)^{-(ν+d/2)}
//! ```
//!
//! Its spectral density decays like `‖ω‖^{-2sγ}` with Sobolev parameters
//! `s = 1`, `γ = ν + d/2`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{ensure_finite, invalid, Error, Result};
use crate::quad::{radial_fourier, radial_integral, OscillatorySettings};
use crate::special::{bessel_k_scaled, ln_gamma};

/// A radial spectral profile `ρ ↦ q̂(ρ)`, `ρ = ‖ω‖`.
pub type SpectralFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Kernel families.
#[derive(Clone)]
pub enum Family {
    Matern { nu: f64, length: f64 },
    /// `q(x) = exp(-‖x‖²/l)`.
    Gaussian { length: f64 },
    /// A user supplied radial spectral density with Sobolev-type decay
    /// `q̂(ω) ~ c ‖ω‖^{-2sγ}`.
    RadialProfile { q_hat: SpectralFn, s: f64, gamma: f64 },
    /// Pointwise sum of two kernels on the same space.
    Sum(Box<KernelSpec>, Box<KernelSpec>),
}

impl fmt::Debug for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Matern { nu, length } => write!(f, "Matern {{ nu: {nu}, length: {length} }}"),
            Family::Gaussian { length } => write!(f, "Gaussian {{ length: {length} }}"),
            Family::RadialProfile { s, gamma, .. } => {
                write!(f, "RadialProfile {{ s: {s}, gamma: {gamma} }}")
            }
            Family::Sum(a, b) => write!(f, "Sum({:?}, {:?})", a.family, b.family),
        }
    }
}

/// Sobolev parameters `(s, γ)` of a spectral density decaying like `‖ω‖^{-2sγ}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sobolev {
    pub s: f64,
    pub gamma: f64,
}

impl Sobolev {
    /// Tail exponent `2sγ`.
    pub fn order(&self) -> f64 {
        2.0 * self.s * self.gamma
    }
}

#[derive(Debug, Clone, Copy)]
struct MaternConsts {
    /// `ln(2^{1-ν}/Γ(ν))`
    ln_prefactor: f64,
    /// `√(2ν)/l`
    inv_scale: f64,
    /// `ln` of the spectral amplitude
    ln_amplitude: f64,
    /// `2ν/l²`
    shift: f64,
    /// `ν + d/2`
    gamma: f64,
    /// below this `z`, `z^ν K_ν(z)` equals its limit to double precision
    z_floor: f64,
}

/// A translation-invariant kernel on `ℝ^d`.
#[derive(Clone, Debug)]
pub struct KernelSpec {
    family: Family,
    dim: usize,
    q_origin: f64,
    matern: Option<MaternConsts>,
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 {
        Err(invalid("dimension", "must be at least 1"))
    } else {
        Ok(())
    }
}

fn check_positive(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(invalid(name, format!("must be positive and finite, got {v}")))
    }
}

impl KernelSpec {
    pub fn matern(nu: f64, length: f64, dim: usize) -> Result<Self> {
        check_positive("nu", nu)?;
        check_positive("length", length)?;
        check_dim(dim)?;
        let d = dim as f64;
        let gamma = nu + d / 2.0;
        let ln_amplitude = d * 2f64.ln() + 0.5 * d * PI.ln() + ln_gamma(gamma) + nu * (2.0 * nu).ln()
            - ln_gamma(nu)
            - 2.0 * nu * length.ln();
        let consts = MaternConsts {
            ln_prefactor: (1.0 - nu) * 2f64.ln() - ln_gamma(nu),
            inv_scale: (2.0 * nu).sqrt() / length,
            ln_amplitude,
            shift: 2.0 * nu / (length * length),
            gamma,
            z_floor: 1e-20f64.powf(1.0 / (2.0 * nu.min(1.0))),
        };
        Ok(Self {
            family: Family::Matern { nu, length },
            dim,
            q_origin: 1.0,
            matern: Some(consts),
        })
    }

    pub fn gaussian(length: f64, dim: usize) -> Result<Self> {
        check_positive("length", length)?;
        check_dim(dim)?;
        Ok(Self {
            family: Family::Gaussian { length },
            dim,
            q_origin: 1.0,
            matern: None,
        })
    }

    /// A radial kernel given through its spectral density.
    ///
    /// `q(0)` is computed once by radial quadrature; evaluating `q` elsewhere
    /// requires an oscillatory transform and is supported for `d ≤ 3`.
    pub fn radial_profile(q_hat: SpectralFn, s: f64, gamma: f64, dim: usize) -> Result<Self> {
        check_positive("s", s)?;
        check_dim(dim)?;
        if !(gamma >= 1.0) || !gamma.is_finite() {
            return Err(invalid("gamma", format!("must be at least 1, got {gamma}")));
        }
        if 2.0 * s * gamma <= dim as f64 {
            return Err(invalid(
                "gamma",
                format!("2sγ = {} must exceed the dimension {dim}", 2.0 * s * gamma),
            ));
        }
        for rho in [0.0, 0.5, 1.0, 10.0, 1e3] {
            let v = q_hat(rho);
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(
                    "q_hat",
                    format!("spectral density must be positive and finite, got {v} at {rho}"),
                ));
            }
        }
        let at_origin = radial_integral(|r| q_hat(r), dim, 1.0, 1e-12)?.value / (2.0 * PI).powi(dim as i32);
        Ok(Self {
            family: Family::RadialProfile { q_hat, s, gamma },
            dim,
            q_origin: at_origin,
            matern: None,
        })
    }

    /// The kernel `k + k'`.
    pub fn sum(a: KernelSpec, b: KernelSpec) -> Result<Self> {
        if a.dim != b.dim {
            return Err(Error::DimensionMismatch {
                expected: a.dim,
                got: b.dim,
            });
        }
        Ok(Self {
            dim: a.dim,
            q_origin: a.q_origin + b.q_origin,
            family: Family::Sum(Box::new(a), Box::new(b)),
            matern: None,
        })
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `q(0) = k(x, x)`.
    pub fn q_origin(&self) -> f64 {
        self.q_origin
    }

    /// Sobolev parameters of the spectral tail, if the tail is algebraic.
    ///
    /// For sums the heavier (slower decaying) tail dominates.
    pub fn sobolev(&self) -> Option<Sobolev> {
        match &self.family {
            Family::Matern { .. } => Some(Sobolev {
                s: 1.0,
                gamma: self.matern.expect("matern constants").gamma,
            }),
            Family::Gaussian { .. } => None,
            Family::RadialProfile { s, gamma, .. } => Some(Sobolev { s: *s, gamma: *gamma }),
            Family::Sum(a, b) => match (a.sobolev(), b.sobolev()) {
                (Some(x), Some(y)) => Some(if x.order() <= y.order() { x } else { y }),
                (x, y) => x.or(y),
            },
        }
    }

    /// A frequency beyond which `q̂` is in its monotone decay.
    pub fn spectral_scale(&self) -> f64 {
        match &self.family {
            Family::Matern { .. } => self.matern.expect("matern constants").inv_scale,
            Family::Gaussian { length } => 2.0 / length.sqrt(),
            Family::RadialProfile { .. } => 1.0,
            Family::Sum(a, b) => a.spectral_scale().max(b.spectral_scale()),
        }
    }

    /// `q(x) = k(x, 0)`.
    pub fn eval_q(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        ensure_finite(x, "eval_q")?;
        self.eval_q_radial(norm(x))
    }

    /// `q` as a function of the radius `r = ‖x‖ ≥ 0`.
    pub fn eval_q_radial(&self, r: f64) -> Result<f64> {
        if !r.is_finite() {
            return Err(Error::NonFinite { context: "eval_q" });
        }
        let r = r.abs();
        match &self.family {
            Family::Matern { nu, .. } => {
                let c = self.matern.as_ref().expect("matern constants");
                let z = c.inv_scale * r;
                if z <= c.z_floor {
                    return Ok(1.0);
                }
                let scaled = bessel_k_scaled(*nu, z)?;
                Ok((c.ln_prefactor + nu * z.ln() - z).exp() * scaled)
            }
            Family::Gaussian { length } => Ok((-r * r / length).exp()),
            Family::RadialProfile { q_hat, .. } => {
                if r == 0.0 {
                    return Ok(self.q_origin);
                }
                let settings = OscillatorySettings {
                    abs_tol: 1e-13 * self.q_origin,
                    ..Default::default()
                };
                Ok(radial_fourier(|w| q_hat(w), self.dim, r, 1.0, settings)?.value)
            }
            Family::Sum(a, b) => Ok(a.eval_q_radial(r)? + b.eval_q_radial(r)?),
        }
    }

    /// Spectral density `q̂(ω)`.
    pub fn eval_q_hat(&self, omega: &[f64]) -> Result<f64> {
        if omega.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: omega.len(),
            });
        }
        ensure_finite(omega, "eval_q_hat")?;
        Ok(self.q_hat_radial(norm(omega)))
    }

    /// `q̂` as a function of the frequency radius `ρ = ‖ω‖`.
    pub fn q_hat_radial(&self, rho: f64) -> f64 {
        match &self.family {
            Family::Matern { .. } => {
                let c = self.matern.as_ref().expect("matern constants");
                (c.ln_amplitude - c.gamma * (c.shift + rho * rho).ln()).exp()
            }
            Family::Gaussian { length } => {
                (PI * length).powf(self.dim as f64 / 2.0) * (-length * rho * rho / 4.0).exp()
            }
            Family::RadialProfile { q_hat, .. } => q_hat(rho),
            Family::Sum(a, b) => a.q_hat_radial(rho) + b.q_hat_radial(rho),
        }
    }

    /// Numerically inverts `q̂` at each point and returns the largest absolute
    /// deviation from `q`. A self-test of the transform convention, `d ∈ {1, 2}`.
    pub fn fourier_roundtrip_check(&self, points: &[Vec<f64>]) -> Result<f64> {
        if self.dim > 2 {
            return Err(Error::Unsupported(format!(
                "round-trip check in dimension {}",
                self.dim
            )));
        }
        let settings = OscillatorySettings {
            abs_tol: 1e-11 * self.q_origin,
            ..Default::default()
        };
        let scale = self.spectral_scale();
        let mut worst = 0.0f64;
        for x in points {
            let direct = self.eval_q(x)?;
            let inverted = radial_fourier(|w| self.q_hat_radial(w), self.dim, norm(x), scale, settings)?;
            worst = worst.max((direct - inverted.value).abs());
        }
        Ok(worst)
    }
}

pub(crate) fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}
