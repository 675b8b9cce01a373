//! Built-in test densities and seeded samplers.

use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};
use crate::measure::{Lattice, WeightedSample};
use crate::quad::{integrate, Tolerance};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BuiltinDensity {
    /// `(1 + cos πx)/2` on `[-1, 1]`.
    Sinusoidal,
    /// `0.7` on `[-1, 0)`, `0.3` on `[0, 1]`.
    Piecewise,
    /// `(1 + cos(π‖x‖/√2))/(2Z)` on `[-1, 1]²`.
    Ring2d,
}

fn ring_unnormalized(x: &[f64]) -> f64 {
    let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
    0.5 * (1.0 + (PI * r / SQRT_2).cos())
}

fn ring_mass() -> f64 {
    static MASS: OnceLock<f64> = OnceLock::new();
    *MASS.get_or_init(|| {
        let tol = Tolerance::relative(1e-13);
        let inner = |a: f64| {
            integrate(|b| ring_unnormalized(&[a, b]), -1.0, 1.0, tol)
                .expect("smooth integrand")
                .value
        };
        integrate(inner, -1.0, 1.0, tol).expect("smooth integrand").value
    })
}

impl BuiltinDensity {
    pub const ALL: [BuiltinDensity; 3] = [Self::Sinusoidal, Self::Piecewise, Self::Ring2d];

    pub fn name(self) -> &'static str {
        match self {
            Self::Sinusoidal => "sinusoidal",
            Self::Piecewise => "piecewise",
            Self::Ring2d => "ring2d",
        }
    }

    pub fn dim(self) -> usize {
        match self {
            Self::Ring2d => 2,
            _ => 1,
        }
    }

    /// Support box `[-1, 1]^d`.
    pub fn support(self) -> (f64, f64) {
        (-1.0, 1.0)
    }

    pub fn eval(self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim());
        if x.iter().any(|v| !(-1.0..=1.0).contains(v)) {
            return 0.0;
        }
        match self {
            Self::Sinusoidal => 0.5 * (1.0 + (PI * x[0]).cos()),
            Self::Piecewise => {
                if x[0] < 0.0 {
                    0.7
                } else {
                    0.3
                }
            }
            Self::Ring2d => ring_unnormalized(x) / ring_mass(),
        }
    }

    fn sup(self) -> f64 {
        match self {
            Self::Sinusoidal => 1.0,
            Self::Piecewise => 0.7,
            Self::Ring2d => 1.0 / ring_mass(),
        }
    }

    /// Cell-centered Riemann measure with `m` cells per axis on the support.
    pub fn riemann(self, m: usize) -> Result<WeightedSample> {
        let (lo, hi) = self.support();
        let grid = Lattice::cube(lo, hi, m, self.dim())?;
        WeightedSample::riemann_from_density(&grid, |x| self.eval(x))
    }

    /// `n` i.i.d. draws by rejection from the support box.
    pub fn sample(self, n: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
        if n == 0 {
            return Err(Error::EmptySample);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (lo, hi) = self.support();
        let bound = self.sup();
        let mut out = Vec::with_capacity(n);
        while out.len() < n {
            let x: Vec<f64> = (0..self.dim()).map(|_| rng.random_range(lo..hi)).collect();
            if rng.random::<f64>() * bound < self.eval(&x) {
                out.push(x);
            }
        }
        Ok(out)
    }
}

impl fmt::Display for BuiltinDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BuiltinDensity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|d| d.name() == s)
            .ok_or_else(|| invalid("density", format!("unknown density `{s}`")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn densities_integrate_to_one() {
        let tol = Tolerance::relative(1e-12);
        for d in [BuiltinDensity::Sinusoidal, BuiltinDensity::Piecewise] {
            let m = integrate(|x| d.eval(&[x]), -1.0, 0.0, tol).unwrap().value
                + integrate(|x| d.eval(&[x]), 0.0, 1.0, tol).unwrap().value;
            assert!((m - 1.0).abs() < 1e-10, "{d}: {m}");
        }
        let ring = BuiltinDensity::Ring2d.riemann(400).unwrap();
        assert!((ring.total_mass() - 1.0).abs() < 1e-4);
    }

    #[test]
    fn riemann_mass_two_thousand_nodes() {
        let s = BuiltinDensity::Sinusoidal.riemann(2000).unwrap();
        assert_eq!(s.len(), 2000);
        assert!((s.total_mass() - 1.0).abs() <= 1e-3);
    }

    #[test]
    fn sampling_is_seeded() {
        let a = BuiltinDensity::Piecewise.sample(50, 7).unwrap();
        let b = BuiltinDensity::Piecewise.sample(50, 7).unwrap();
        let c = BuiltinDensity::Piecewise.sample(50, 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.iter().all(|x| (-1.0..1.0).contains(&x[0])));
    }

    #[test]
    fn sample_fractions_follow_density() {
        let xs = BuiltinDensity::Piecewise.sample(20_000, 1).unwrap();
        let left = xs.iter().filter(|x| x[0] < 0.0).count() as f64 / 20_000.0;
        assert!((left - 0.7).abs() < 0.02);
    }

    #[test]
    fn names_roundtrip() {
        for d in BuiltinDensity::ALL {
            assert_eq!(d.name().parse::<BuiltinDensity>().unwrap(), d);
        }
        assert!("uniform".parse::<BuiltinDensity>().is_err());
    }

    #[test]
    fn zero_outside_support() {
        assert_eq!(BuiltinDensity::Sinusoidal.eval(&[1.5]), 0.0);
        assert_eq!(BuiltinDensity::Ring2d.eval(&[0.0, -1.2]), 0.0);
        assert!(BuiltinDensity::Ring2d.eval(&[0.0, 0.0]) > BuiltinDensity::Ring2d.eval(&[0.5, 0.5]));
    }
}
