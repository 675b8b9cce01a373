//! One-dimensional quadrature used by the spectral computations.
//!
//! * [`integrate`]: globally adaptive 21-point Gauss–Kronrod on a finite interval.
//! * [`wynn_epsilon`]: Wynn's ε-algorithm for accelerating partial sums.
//! * [`radial_fourier`]: inverse Fourier transform of a radial profile in
//!   dimension 1, 2 or 3, summed piecewise between zeros of the oscillatory
//!   factor and accelerated once the profile enters its monotone tail.

use std::collections::BinaryHeap;
use std::cmp::Ordering;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::special::{bessel_j0, bessel_j0_zero, sphere_area};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// Tolerance and work budget for adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Tolerance {
    pub const fn relative(rel: f64) -> Self {
        Self {
            abs: 0.0,
            rel,
            max_intervals: 2000,
        }
    }

    pub const fn with_abs(mut self, abs: f64) -> Self {
        self.abs = abs;
        self
    }

    fn target(&self, value: f64) -> f64 {
        self.abs.max(self.rel * value.abs())
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self::relative(1e-10)
    }
}

/// An integral value with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

/// Single 21-point Kronrod rule with the embedded 10-point Gauss error estimate.
fn gk21<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Estimate {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[10];
    let mut gauss = 0.0;
    for j in 0..10 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    let value = kronrod * half;
    let raw = ((kronrod - gauss) * half).abs();
    // QUADPACK-style sharpening of the Gauss/Kronrod difference.
    let error = if raw > 0.0 {
        let scaled = (200.0 * raw / value.abs().max(f64::MIN_POSITIVE)).powf(1.5);
        raw.min(value.abs() * scaled.min(1.0)).max(50.0 * f64::EPSILON * value.abs())
    } else {
        0.0
    };
    Estimate { value, error }
}

struct Segment {
    a: f64,
    b: f64,
    est: Estimate,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.est.error == other.est.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.est.error.total_cmp(&other.est.error)
    }
}

/// Adaptive Gauss–Kronrod integration of `f` over `[a, b]`.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: Tolerance) -> Result<Estimate> {
    if a == b {
        return Ok(Estimate { value: 0.0, error: 0.0 });
    }
    let first = gk21(&mut f, a, b);
    let mut total = first;
    if !total.value.is_finite() {
        return Err(Error::Quadrature {
            achieved: f64::INFINITY,
            requested: tol.target(0.0),
        });
    }
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, est: first });
    while total.error > tol.target(total.value) {
        if heap.len() >= tol.max_intervals {
            return Err(Error::Quadrature {
                achieved: total.error,
                requested: tol.target(total.value),
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval can no longer be split in floating point
            return Err(Error::Quadrature {
                achieved: total.error,
                requested: tol.target(total.value),
            });
        }
        let left = gk21(&mut f, worst.a, mid);
        let right = gk21(&mut f, mid, worst.b);
        total.value += left.value + right.value - worst.est.value;
        total.error += left.error + right.error - worst.est.error;
        heap.push(Segment { a: worst.a, b: mid, est: left });
        heap.push(Segment { a: mid, b: worst.b, est: right });
        if !total.value.is_finite() {
            return Err(Error::Quadrature {
                achieved: f64::INFINITY,
                requested: tol.target(0.0),
            });
        }
    }
    // recompute the sums to shed accumulated rounding from the updates
    let (value, error) = heap
        .iter()
        .fold((0.0, 0.0), |(v, e), s| (v + s.est.value, e + s.est.error));
    Ok(Estimate { value, error })
}

/// Wynn's ε-algorithm applied to a sequence of partial sums.
///
/// Each even column yields a candidate limit whose error proxy is the gap to
/// its neighbour in the same column; the candidate with the smallest gap wins.
pub fn wynn_epsilon(partial_sums: &[f64]) -> Estimate {
    let n = partial_sums.len();
    if n == 0 {
        return Estimate { value: 0.0, error: f64::INFINITY };
    }
    let last = partial_sums[n - 1];
    let mut best = Estimate {
        value: last,
        error: if n >= 2 { (last - partial_sums[n - 2]).abs() } else { f64::INFINITY },
    };
    // columns k-1 and k of the ε table; even columns carry limit estimates
    let mut prev = vec![0.0; n + 1];
    let mut cur = partial_sums.to_vec();
    let mut prev_even_last = last;
    let mut k = 0;
    while cur.len() > 1 {
        let mut next = Vec::with_capacity(cur.len() - 1);
        for i in 0..cur.len() - 1 {
            let diff = cur[i + 1] - cur[i];
            if diff == 0.0 {
                break;
            }
            next.push(prev[i + 1] + 1.0 / diff);
        }
        if next.len() != cur.len() - 1 || next.iter().any(|v| !v.is_finite()) {
            break;
        }
        k += 1;
        if k % 2 == 0 {
            let m = next.len();
            let value = next[m - 1];
            let error = if m >= 2 {
                (value - next[m - 2]).abs()
            } else {
                (value - prev_even_last).abs()
            };
            if error < best.error {
                best = Estimate { value, error };
            }
            prev_even_last = value;
        }
        prev = cur;
        cur = next;
    }
    best
}

/// The oscillatory factor of a radial inverse Fourier transform.
#[derive(Debug, Clone, Copy)]
enum Oscillator {
    /// `cos(ρ r)`, zeros at `(k + 1/2)π / r`
    Cosine,
    /// `J0(ρ r) ρ`
    Bessel0,
    /// `sin(ρ r) ρ / r`
    Sine,
}

impl Oscillator {
    fn weight(self, rho: f64, r: f64) -> f64 {
        match self {
            Oscillator::Cosine => (rho * r).cos(),
            Oscillator::Bessel0 => bessel_j0(rho * r) * rho,
            Oscillator::Sine => (rho * r).sin() * rho / r,
        }
    }

    /// The `k`-th (1-based) positive node separating half-periods.
    fn node(self, k: usize, r: f64) -> f64 {
        match self {
            Oscillator::Cosine => (k as f64 - 0.5) * PI / r,
            Oscillator::Bessel0 => bessel_j0_zero(k) / r,
            Oscillator::Sine => k as f64 * PI / r,
        }
    }

    fn prefactor(self) -> f64 {
        match self {
            Oscillator::Cosine => 1.0 / PI,
            Oscillator::Bessel0 => 1.0 / (2.0 * PI),
            Oscillator::Sine => 1.0 / (2.0 * PI * PI),
        }
    }
}

/// Settings for [`radial_fourier`].
#[derive(Debug, Clone, Copy)]
pub struct OscillatorySettings {
    /// Target absolute accuracy of the transform value.
    pub abs_tol: f64,
    /// Maximum number of half-periods summed before giving up.
    pub max_pieces: usize,
}

impl Default for OscillatorySettings {
    fn default() -> Self {
        Self {
            abs_tol: 1e-13,
            max_pieces: 2_000_000,
        }
    }
}

/// Integral of a radial profile over `[0, ∞)` with respect to `ρ^{d-1} dρ`,
/// times the area of the unit sphere: `∫_{ℝ^d} h(‖ω‖) dω`.
///
/// `scale` is a radius beyond which `h` decays monotonically with an
/// algebraic or faster tail; the integral is summed over geometric panels
/// and the remainder past the last panel is estimated from the local
/// power-law exponent of `h`.
pub fn radial_integral<H: Fn(f64) -> f64>(h: H, d: usize, scale: f64, rel_tol: f64) -> Result<Estimate> {
    let dm1 = (d - 1) as i32;
    let integrand = |rho: f64| h(rho) * rho.powi(dm1);
    let tol = Tolerance::relative(rel_tol * 0.1);
    let mut total = integrate(integrand, 0.0, scale, tol)?;
    let peak = total.value.abs() / scale;
    let mut lo = scale;
    for _ in 0..400 {
        let hi = 2.0 * lo;
        let piece = integrate(integrand, lo, hi, tol.with_abs(rel_tol * 1e-3 * total.value.abs()))?;
        total.value += piece.value;
        total.error += piece.error;
        lo = hi;
        let at_edge = integrand(lo);
        if at_edge.abs() <= 1e-12 * peak || at_edge == 0.0 {
            // local exponent p of integrand ~ ρ^{-p}
            let next = integrand(2.0 * lo);
            let tail = if next > 0.0 && at_edge > 0.0 {
                let p = (at_edge / next).log2();
                if p <= 1.0 {
                    return Err(Error::Quadrature {
                        achieved: f64::INFINITY,
                        requested: rel_tol,
                    });
                }
                at_edge * lo / (p - 1.0)
            } else {
                0.0
            };
            total.value += tail;
            total.error += 0.01 * tail.abs();
            let area = sphere_area(d);
            return Ok(Estimate {
                value: total.value * area,
                error: total.error * area,
            });
        }
    }
    Err(Error::Quadrature {
        achieved: total.error,
        requested: rel_tol,
    })
}

/// Inverse Fourier transform `(2π)^{-d} ∫_{ℝ^d} h(‖ω‖) e^{i ω·x} dω` at `‖x‖ = r`.
///
/// `scale` marks where `h` settles into its monotone tail; half-periods are
/// summed directly up to a few multiples of it and the remaining partial sums
/// are accelerated with [`wynn_epsilon`].
pub fn radial_fourier<H: Fn(f64) -> f64>(
    h: H,
    d: usize,
    r: f64,
    scale: f64,
    settings: OscillatorySettings,
) -> Result<Estimate> {
    if !r.is_finite() || !scale.is_finite() || scale <= 0.0 {
        return Err(Error::NonFinite { context: "radial_fourier" });
    }
    let r = r.abs();
    if r == 0.0 {
        let est = radial_integral(&h, d, scale, 1e-12)?;
        let norm = (2.0 * PI).powi(d as i32);
        return Ok(Estimate {
            value: est.value / norm,
            error: est.error / norm,
        });
    }
    let osc = match d {
        1 => Oscillator::Cosine,
        2 => Oscillator::Bessel0,
        3 => Oscillator::Sine,
        _ => {
            return Err(Error::Unsupported(format!(
                "radial Fourier inversion in dimension {d}"
            )))
        }
    };
    let integrand = |rho: f64| h(rho) * osc.weight(rho, r);
    let piece_tol = Tolerance::relative(1e-12).with_abs(settings.abs_tol * 1e-3);

    let mut sum = 0.0;
    let mut lo = 0.0;
    let direct_until = 4.0 * scale;
    let mut partial = Vec::new();
    let mut last_estimate: Option<f64> = None;
    let mut stable = 0;
    for k in 1..=settings.max_pieces {
        let hi = osc.node(k, r);
        let piece = integrate(integrand, lo, hi, piece_tol)?;
        sum += piece.value;
        lo = hi;
        if hi < direct_until {
            continue;
        }
        if piece.value.abs() < 1e-3 * settings.abs_tol && partial.len() > 4 {
            // direct convergence: the tail is negligible
            return Ok(Estimate {
                value: osc.prefactor() * sum,
                error: osc.prefactor() * piece.value.abs(),
            });
        }
        partial.push(sum);
        if partial.len() > 40 {
            partial.remove(0);
        }
        if partial.len() >= 8 {
            let est = wynn_epsilon(&partial);
            if let Some(prev) = last_estimate {
                let spread = (est.value - prev).abs().max(est.error);
                if osc.prefactor() * spread < settings.abs_tol {
                    stable += 1;
                    if stable >= 2 {
                        return Ok(Estimate {
                            value: osc.prefactor() * est.value,
                            error: osc.prefactor() * spread,
                        });
                    }
                } else {
                    stable = 0;
                }
            }
            last_estimate = Some(est.value);
        }
    }
    Err(Error::Quadrature {
        achieved: last_estimate.map_or(f64::INFINITY, |v| (v - sum).abs() * osc.prefactor()),
        requested: settings.abs_tol,
    })
}
