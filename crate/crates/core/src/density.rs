//! Density and support estimates read off Christoffel values.
//!
//! Inside the support `C_λ(z) ≈ λ^β p(z)^{1−β} / q₀`; outside it is `O(λ)`.

use crate::error::{invalid, Result};
use crate::gram::GramSystem;
use crate::spectral::SpectralProfile;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SupportLabel {
    Inside,
    Outside,
    BoundaryUncertain,
}

impl SupportLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Inside => "inside",
            Self::Outside => "outside",
            Self::BoundaryUncertain => "boundary_uncertain",
        }
    }
}

/// Decision thresholds for [`support_indicator`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    /// Multiplicative slack on both envelopes, `> 1`.
    pub margin: f64,
    /// Smallest density the inside envelope is built for.
    pub p_min: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            margin: 10.0,
            p_min: 1e-2,
        }
    }
}

impl Thresholds {
    pub fn validate(&self) -> Result<()> {
        if !(self.margin > 1.0 && self.margin.is_finite()) {
            return Err(invalid("margin", format!("must exceed 1, got {}", self.margin)));
        }
        if !(self.p_min > 0.0 && self.p_min.is_finite()) {
            return Err(invalid("p_min", format!("must be positive, got {}", self.p_min)));
        }
        Ok(())
    }
}

/// One evaluated query point.
#[derive(Debug, Clone, PartialEq)]
pub struct ChristoffelEstimate {
    pub z: Vec<f64>,
    pub c_value: f64,
    pub leverage: f64,
    /// Present exactly when the point is labeled inside.
    pub p_hat: Option<f64>,
    pub label: SupportLabel,
}

fn check_positive(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(name, format!("must be positive and finite, got {v}")))
    }
}

/// `p̂ = (C q₀ / λ^β)^{1/(1−β)}`.
pub fn estimate_density(profile: &SpectralProfile, lambda: f64, c_value: f64) -> Result<f64> {
    check_positive("lambda", lambda)?;
    check_positive("c_value", c_value)?;
    let beta = profile.exponent()?;
    let q0 = profile.q0()?;
    Ok(((c_value.ln() + q0.ln() - beta * lambda.ln()) / (1.0 - beta)).exp())
}

/// `(C q₀ / p^{1−β})^{1/β}`, which tracks `λ` when `p` is the true density.
pub fn rate_diagnostic(profile: &SpectralProfile, lambda: f64, c_value: f64, p_true: f64) -> Result<f64> {
    check_positive("lambda", lambda)?;
    check_positive("c_value", c_value)?;
    check_positive("p_true", p_true)?;
    let beta = profile.exponent()?;
    let q0 = profile.q0()?;
    Ok(((c_value.ln() + q0.ln() - (1.0 - beta) * p_true.ln()) / beta).exp())
}

/// Outside below `margin·λ`, inside above `λ^β p_min^{1−β}/(q₀·margin)`,
/// undecided in between. The outside test takes precedence.
///
/// Kernels without an algebraic spectral tail have no inside scale, so they
/// only ever get `Outside` or `BoundaryUncertain`.
pub fn support_indicator(
    profile: &SpectralProfile,
    lambda: f64,
    c_value: f64,
    thresholds: Thresholds,
) -> Result<SupportLabel> {
    thresholds.validate()?;
    check_positive("lambda", lambda)?;
    if c_value < thresholds.margin * lambda {
        return Ok(SupportLabel::Outside);
    }
    if profile.sobolev().is_none() {
        return Ok(SupportLabel::BoundaryUncertain);
    }
    let inside = profile.predict_asymptotic(lambda, thresholds.p_min)? / thresholds.margin;
    Ok(if c_value > inside {
        SupportLabel::Inside
    } else {
        SupportLabel::BoundaryUncertain
    })
}

/// Labels one Christoffel value and attaches a density estimate when inside.
pub fn annotate(
    profile: &SpectralProfile,
    lambda: f64,
    z: &[f64],
    c_value: f64,
    thresholds: Thresholds,
) -> Result<ChristoffelEstimate> {
    let label = support_indicator(profile, lambda, c_value, thresholds)?;
    let p_hat = match label {
        SupportLabel::Inside => Some(estimate_density(profile, lambda, c_value)?),
        _ => None,
    };
    Ok(ChristoffelEstimate {
        z: z.to_vec(),
        c_value,
        leverage: 1.0 / c_value,
        p_hat,
        label,
    })
}

/// Christoffel value, leverage, label and (inside only) density at each query, in input order.
pub fn evaluate_field(
    sys: &GramSystem,
    profile: &SpectralProfile,
    queries: &[Vec<f64>],
    thresholds: Thresholds,
) -> Result<Vec<ChristoffelEstimate>> {
    thresholds.validate()?;
    let lambda = sys.lambda();
    let values = sys.christoffel_at_points(queries)?;
    queries
        .iter()
        .zip(values)
        .map(|(z, c)| annotate(profile, lambda, z, c, thresholds))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::KernelSpec;
    use crate::measure::WeightedSample;
    use approx::assert_relative_eq;

    fn laplace() -> SpectralProfile {
        SpectralProfile::new(&KernelSpec::matern(0.5, 1.0, 1).unwrap()).unwrap()
    }

    #[test]
    fn fixed_point_and_round_trip() {
        let p = laplace();
        let lambda: f64 = 1e-6;
        let c = lambda.powf(0.5) / p.q0().unwrap();
        assert_relative_eq!(estimate_density(&p, lambda, c).unwrap(), 1.0, max_relative = 1e-12);
        let c = p.predict_asymptotic(lambda, 0.5).unwrap();
        assert_relative_eq!(c, 1e-3, max_relative = 1e-8);
        assert_relative_eq!(estimate_density(&p, lambda, c).unwrap(), 0.5, max_relative = 1e-12);
    }

    #[test]
    fn rate_identities() {
        let p = laplace();
        let (lambda, pt) = (1e-4, 0.3);
        let c = p.predict_asymptotic(lambda, pt).unwrap();
        assert_relative_eq!(rate_diagnostic(&p, lambda, c, pt).unwrap(), lambda, max_relative = 1e-12);
        let c = p.predict_inside(lambda, pt).unwrap();
        let expect = lambda * (1.0 + lambda / (2.0 * pt));
        assert_relative_eq!(rate_diagnostic(&p, lambda, c, pt).unwrap(), expect, max_relative = 1e-7);
        let r1 = rate_diagnostic(&p, lambda, 1e-3, pt).unwrap();
        let r2 = rate_diagnostic(&p, lambda, 2e-3, pt).unwrap();
        assert_relative_eq!(r2 / r1, 4.0, max_relative = 1e-12);
    }

    #[test]
    fn labels() {
        let p = laplace();
        let t = Thresholds::default();
        let lambda = 1e-4;
        assert_eq!(support_indicator(&p, lambda, lambda / 2.0, t).unwrap(), SupportLabel::Outside);
        let c = p.predict_asymptotic(lambda, 1.0).unwrap();
        assert_eq!(support_indicator(&p, lambda, c, t).unwrap(), SupportLabel::Inside);
        // the undecided band only opens once λ^{1-β} is small against p_min^{1-β}/(q₀ margin²)
        let lambda = 1e-8;
        let lo = t.margin * lambda;
        let hi = p.predict_asymptotic(lambda, t.p_min).unwrap() / t.margin;
        assert!(lo < hi);
        assert_eq!(
            support_indicator(&p, lambda, (lo * hi).sqrt(), t).unwrap(),
            SupportLabel::BoundaryUncertain
        );
        let g = SpectralProfile::new(&KernelSpec::gaussian(0.5, 1).unwrap()).unwrap();
        assert_eq!(support_indicator(&g, lambda, lambda, t).unwrap(), SupportLabel::Outside);
        assert_eq!(support_indicator(&g, lambda, 0.5, t).unwrap(), SupportLabel::BoundaryUncertain);
        let bad = Thresholds { margin: 1.0, ..t };
        assert!(support_indicator(&p, lambda, 1.0, bad).is_err());
    }

    #[test]
    fn field_composition() {
        let k = KernelSpec::matern(0.5, 1.0, 1).unwrap();
        let p = SpectralProfile::new(&k).unwrap();
        let s = WeightedSample::new(&[vec![0.0], vec![0.5]], &[0.5, 0.5]).unwrap();
        let sys = GramSystem::assemble(&k, &s, 1e-3).unwrap();
        let t = Thresholds::default();
        assert!(evaluate_field(&sys, &p, &[], t).unwrap().is_empty());
        let out = evaluate_field(&sys, &p, &[vec![0.5]], t).unwrap();
        let c = sys.christoffel_at_support(1).unwrap();
        assert_relative_eq!(out[0].c_value, c, max_relative = 1e-8);
        assert_relative_eq!(out[0].leverage * out[0].c_value, 1.0, max_relative = 1e-12);
        assert_eq!(out[0].label, support_indicator(&p, 1e-3, out[0].c_value, t).unwrap());
        assert_eq!(out[0].p_hat.is_some(), out[0].label == SupportLabel::Inside);
    }
}
