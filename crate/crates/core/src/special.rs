//! Special functions: modified Bessel functions of the second kind, Bessel
//! functions of the first kind of orders 0 and 1, and the zeros of `J0`.
//!
//! `K_ν` follows Temme's method: the order is split as `ν = μ + m` with
//! `|μ| ≤ 1/2`, the pair `(K_μ, K_{μ+1})` comes from Temme's power series for
//! `x ≤ 2` and from Steed's continued fraction otherwise, and forward
//! recurrence (stable for `K`) lifts the order to `ν`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{Error, Result};

pub use statrs::function::gamma::{gamma, ln_gamma};

const MAX_ITER: usize = 10_000;

// Chebyshev expansions of Temme's auxiliary gamma functions on [-1, 1]
// (argument 4|μ| - 1), as tabulated in SLATEC / GSL.
#[allow(clippy::excessive_precision)]
const G1_CHEB: [f64; 14] = [
    -1.14516408366268311786898152867,
    0.00636085311347084238122955495,
    0.00186245193007206848934643657,
    0.000152833085873453507081227824,
    0.000017017464011802038795324732,
    -6.4597502923347254354668326451e-07,
    -5.1819848432519380894104312968e-08,
    4.5189092894858183051123180797e-10,
    3.2433227371020873043666259180e-11,
    6.8309434024947522875432400828e-13,
    2.8353502755172101513119628130e-14,
    -7.9883905769323592875638087541e-16,
    -3.3726677300771949833341213457e-17,
    -3.6586334809210520744054437104e-20,
];

#[allow(clippy::excessive_precision)]
const G2_CHEB: [f64; 15] = [
    1.882645524949671835019616975350,
    -0.077490658396167518329547945212,
    -0.018256714847324929419579340950,
    0.0006338030209074895795923971731,
    0.0000762290543508729021194461175,
    -9.5501647561720443519853993526e-07,
    -8.8927268107886351912431512955e-08,
    -1.9521334772319613740511880132e-09,
    -9.4003052735885162111769579771e-11,
    4.6875133849532393179290879101e-12,
    2.2658535746925759582447545145e-13,
    -1.1725509698488015111878735251e-15,
    -7.0441338200245222530843155877e-17,
    -2.4377878310107693650659740228e-18,
    -7.5225243218253901727164675011e-20,
];

/// Clenshaw evaluation with the `c[0]/2` convention.
fn chebyshev(coeffs: &[f64], y: f64) -> f64 {
    let y2 = 2.0 * y;
    let (mut d, mut dd) = (0.0, 0.0);
    for &c in coeffs[1..].iter().rev() {
        let tmp = d;
        d = y2 * d - dd + c;
        dd = tmp;
    }
    y * d - dd + 0.5 * coeffs[0]
}

/// Temme's gamma terms for `|μ| ≤ 1/2`:
/// `(Γ1(μ), Γ2(μ), 1/Γ(1+μ), 1/Γ(1-μ))`.
fn temme_gamma(mu: f64) -> (f64, f64, f64, f64) {
    let y = 4.0 * mu.abs() - 1.0;
    let g1 = chebyshev(&G1_CHEB, y);
    let g2 = chebyshev(&G2_CHEB, y);
    (g1, g2, g2 - mu * g1, g2 + mu * g1)
}

/// Scaled pair `(e^x K_μ(x), e^x K_{μ+1}(x))` for `|μ| ≤ 1/2`, `x > 0`.
fn k_pair_scaled(mu: f64, x: f64) -> (f64, f64) {
    if x <= 2.0 {
        let half_x = 0.5 * x;
        let pimu = PI * mu;
        let fact = if pimu.abs() < f64::EPSILON {
            1.0
        } else {
            pimu / pimu.sin()
        };
        let d = -half_x.ln();
        let e = mu * d;
        let fact2 = if e.abs() < f64::EPSILON {
            1.0
        } else {
            e.sinh() / e
        };
        let (g1, g2, inv_gamma_plus, inv_gamma_minus) = temme_gamma(mu);
        let mut ff = fact * (g1 * e.cosh() + g2 * fact2 * d);
        let mut sum = ff;
        let ee = e.exp();
        let mut p = 0.5 * ee / inv_gamma_plus;
        let mut q = 0.5 / (ee * inv_gamma_minus);
        let mut c = 1.0;
        let dd = half_x * half_x;
        let mut sum1 = p;
        for i in 1..MAX_ITER {
            let fi = i as f64;
            ff = (fi * ff + p + q) / (fi * fi - mu * mu);
            c *= dd / fi;
            p /= fi - mu;
            q /= fi + mu;
            let del = c * ff;
            sum += del;
            sum1 += c * (p - fi * ff);
            if del.abs() < sum.abs() * f64::EPSILON {
                break;
            }
        }
        let scale = x.exp();
        (sum * scale, sum1 * (2.0 / x) * scale)
    } else {
        let mut b = 2.0 * (1.0 + x);
        let mut d = 1.0 / b;
        let mut delh = d;
        let mut h = d;
        let mut q1 = 0.0;
        let mut q2 = 1.0;
        let a1 = 0.25 - mu * mu;
        let mut q = a1;
        let mut c = a1;
        let mut a = -a1;
        let mut s = 1.0 + q * delh;
        for i in 1..MAX_ITER {
            let fi = i as f64;
            a -= 2.0 * fi;
            c = -a * c / (fi + 1.0);
            let qnew = (q1 - b * q2) / a;
            q1 = q2;
            q2 = qnew;
            q += c * qnew;
            b += 2.0;
            d = 1.0 / (b + a * d);
            delh *= b * d - 1.0;
            h += delh;
            let dels = q * delh;
            s += dels;
            if (dels / s).abs() < f64::EPSILON {
                break;
            }
        }
        let h = a1 * h;
        let k_mu = (PI / (2.0 * x)).sqrt() / s;
        let k_mu1 = k_mu * (mu + x + 0.5 - h) / x;
        (k_mu, k_mu1)
    }
}

/// Exponentially scaled modified Bessel function `e^x K_ν(x)`.
///
/// `K` is even in its order, so negative `ν` is accepted.
pub fn bessel_k_scaled(nu: f64, x: f64) -> Result<f64> {
    if !nu.is_finite() || !x.is_finite() || x <= 0.0 {
        return Err(Error::Domain {
            function: "bessel_k",
            argument: x,
        });
    }
    let nu = nu.abs();
    let steps = (nu + 0.5).floor() as usize;
    let mu = nu - steps as f64;
    let (mut k_lo, mut k_hi) = k_pair_scaled(mu, x);
    let two_over_x = 2.0 / x;
    for i in 1..=steps {
        let next = (mu + i as f64) * two_over_x * k_hi + k_lo;
        k_lo = k_hi;
        k_hi = next;
    }
    if k_lo.is_finite() {
        Ok(k_lo)
    } else {
        Err(Error::Domain {
            function: "bessel_k",
            argument: x,
        })
    }
}

/// Modified Bessel function of the second kind `K_ν(x)`, `x > 0`.
///
/// Underflows gracefully to `0` for large `x`; overflow near the origin is a
/// domain error carrying the offending argument.
pub fn bessel_k(nu: f64, x: f64) -> Result<f64> {
    let scaled = bessel_k_scaled(nu, x)?;
    let value = scaled * (-x).exp();
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Domain {
            function: "bessel_k",
            argument: x,
        })
    }
}

/// `(P, Q)` of Hankel's large-argument expansion for order `n`.
fn hankel_pq(n: f64, x: f64) -> (f64, f64) {
    let mu = 4.0 * n * n;
    let mut term = 1.0_f64;
    let (mut p, mut q) = (1.0, 0.0);
    let mut prev = f64::INFINITY;
    for k in 1..60 {
        let odd = (2 * k - 1) as f64;
        let next = term * (mu - odd * odd) / (k as f64 * 8.0 * x);
        if next.abs() >= prev || next == 0.0 {
            break;
        }
        prev = next.abs();
        term = next;
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 1 {
            q += sign * term;
        } else {
            p += sign * term;
        }
        if term.abs() < 1e-17 {
            break;
        }
    }
    (p, q)
}

/// Miller's backward recurrence for `(J0(x), J1(x))`, `x ≥ 0` moderate.
fn j01_miller(x: f64) -> (f64, f64) {
    let start = 2 * (((x + 30.0 + (50.0 * x).sqrt()) / 2.0) as usize);
    let (mut jp1, mut j) = (0.0_f64, 1e-300_f64);
    let (mut j0, mut j1) = (0.0, 0.0);
    let mut norm = 0.0;
    for k in (1..=start).rev() {
        let jm1 = 2.0 * k as f64 / x * j - jp1;
        jp1 = j;
        j = jm1;
        // j now holds J_{k-1}
        if (k - 1) % 2 == 0 && k - 1 > 0 {
            norm += 2.0 * j;
        }
        if k - 1 == 1 {
            j1 = j;
        }
        if k - 1 == 0 {
            j0 = j;
        }
        if j.abs() > 1e250 {
            j *= 1e-250;
            jp1 *= 1e-250;
            norm *= 1e-250;
            j1 *= 1e-250;
            j0 *= 1e-250;
        }
    }
    norm += j0;
    (j0 / norm, j1 / norm)
}

/// Bessel functions of the first kind `(J0(x), J1(x))`.
pub fn bessel_j01(x: f64) -> (f64, f64) {
    let ax = x.abs();
    let sign1 = if x < 0.0 { -1.0 } else { 1.0 };
    if ax < 1.0 {
        let q = -0.25 * ax * ax;
        let (mut t0, mut t1) = (1.0, 0.5 * ax);
        let (mut s0, mut s1) = (t0, t1);
        for k in 1..30 {
            let fk = k as f64;
            t0 *= q / (fk * fk);
            t1 *= q / (fk * (fk + 1.0));
            s0 += t0;
            s1 += t1;
            if t0.abs() < 1e-18 && t1.abs() < 1e-18 {
                break;
            }
        }
        (s0, sign1 * s1)
    } else if ax < 25.0 {
        let (j0, j1) = j01_miller(ax);
        (j0, sign1 * j1)
    } else {
        let amp = (2.0 / (PI * ax)).sqrt();
        let (s, c) = ax.sin_cos();
        let (p0, q0) = hankel_pq(0.0, ax);
        let (p1, q1) = hankel_pq(1.0, ax);
        let j0 = amp * (p0 * (c + s) - q0 * (s - c)) * FRAC_1_SQRT_2;
        let j1 = amp * (p1 * (s - c) + q1 * (s + c)) * FRAC_1_SQRT_2;
        (j0, sign1 * j1)
    }
}

pub fn bessel_j0(x: f64) -> f64 {
    bessel_j01(x).0
}

/// The `k`-th positive zero of `J0` (`k ≥ 1`), McMahon start refined by Newton.
pub fn bessel_j0_zero(k: usize) -> f64 {
    let beta = (k as f64 - 0.25) * PI;
    let b8 = 8.0 * beta;
    let mut z = beta + 1.0 / b8 - 124.0 / (3.0 * b8.powi(3));
    for _ in 0..6 {
        let (j0, j1) = bessel_j01(z);
        let step = j0 / j1;
        z += step;
        if step.abs() < 1e-15 * z {
            break;
        }
    }
    z
}

/// Surface area of the unit sphere in `ℝ^d`, `2π^{d/2}/Γ(d/2)`.
pub fn sphere_area(d: usize) -> f64 {
    let half = d as f64 / 2.0;
    2.0 * PI.powf(half) / gamma(half)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Integral representation `K_ν(x) = ∫_0^∞ exp(-x cosh t) cosh(νt) dt`,
    /// integrated by the trapezoid rule (spectrally accurate here).
    fn k_oracle(nu: f64, x: f64) -> f64 {
        let h: f64 = 1e-3;
        let mut sum = 0.5 * (-x).exp();
        let mut t = h;
        loop {
            let v = (-x * t.cosh()).exp() * (nu * t).cosh();
            sum += v;
            if v < 1e-300 || (v < sum * 1e-18 && t > 1.0) {
                break;
            }
            t += h;
        }
        sum * h
    }

    #[test]
    fn half_integer_closed_forms() {
        let k = bessel_k(0.5, 1.0).unwrap();
        assert_relative_eq!(k, (PI / 2.0).sqrt() * (-1.0f64).exp(), max_relative = 1e-14);
        assert_relative_eq!(k, 0.4610685, epsilon = 5e-8);
        let k2 = bessel_k(0.5, 2.0).unwrap();
        assert_relative_eq!(k2, (PI / 4.0).sqrt() * (-2.0f64).exp(), max_relative = 1e-14);
        assert_relative_eq!(k2, 0.1199378, epsilon = 5e-8);
        let x = 1.7;
        let k32 = bessel_k(1.5, x).unwrap();
        let exact = (PI / (2.0 * x)).sqrt() * (-x).exp() * (1.0 + 1.0 / x);
        assert_relative_eq!(k32, exact, max_relative = 1e-14);
    }

    #[test]
    fn even_in_order() {
        for &x in &[0.01, 0.7, 3.0, 12.0] {
            assert_eq!(bessel_k(0.3, x).unwrap(), bessel_k(-0.3, x).unwrap());
        }
    }

    #[test]
    fn matches_integral_representation() {
        for &nu in &[0.05, 0.3, 0.5, 1.0, 1.37, 2.5, 4.2, 7.9, 10.0] {
            for &x in &[1e-6, 1e-3, 0.1, 0.9, 2.0, 2.0001, 5.0, 17.0, 50.0] {
                let got = bessel_k(nu, x).unwrap();
                let want = k_oracle(nu, x);
                assert_relative_eq!(got, want, max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn domain_and_underflow() {
        assert!(matches!(bessel_k(1.0, 0.0), Err(Error::Domain { .. })));
        assert!(matches!(bessel_k(1.0, -1.0), Err(Error::Domain { .. })));
        assert_eq!(bessel_k(1.0, 800.0).unwrap(), 0.0);
        assert!(bessel_k_scaled(1.0, 800.0).unwrap() > 0.0);
        assert!(matches!(bessel_k(10.0, 1e-40), Err(Error::Domain { .. })));
    }

    /// `J_n(x) = (1/π)∫_0^π cos(nτ - x sin τ) dτ`, trapezoid (periodic integrand).
    fn j_oracle(n: f64, x: f64) -> f64 {
        let m = 4000;
        let h = PI / m as f64;
        let mut s = 0.5 * (1.0 + (n * PI - x * PI.sin()).cos());
        for i in 1..m {
            let t = i as f64 * h;
            s += (n * t - x * t.sin()).cos();
        }
        s * h / PI
    }

    #[test]
    fn j01_against_integral() {
        for &x in &[0.0, 0.3, 0.99, 1.0, 4.0, 11.5, 24.9, 25.0, 60.0, 300.0] {
            let (j0, j1) = bessel_j01(x);
            assert!((j0 - j_oracle(0.0, x)).abs() < 1e-13, "J0({x})");
            assert!((j1 - j_oracle(1.0, x)).abs() < 1e-13, "J1({x})");
        }
        let (j0, j1) = bessel_j01(-2.0);
        assert_eq!(j0, bessel_j0(2.0));
        assert_eq!(j1, -bessel_j01(2.0).1);
    }

    #[test]
    fn j0_zeros() {
        assert_relative_eq!(bessel_j0_zero(1), 2.404825557695773, max_relative = 1e-14);
        assert_relative_eq!(bessel_j0_zero(2), 5.520078110286311, max_relative = 1e-14);
        for k in [5, 40, 400] {
            assert!(bessel_j0(bessel_j0_zero(k)).abs() < 1e-13);
        }
    }

    #[test]
    fn sphere_areas() {
        assert_relative_eq!(sphere_area(1), 2.0, max_relative = 1e-14);
        assert_relative_eq!(sphere_area(2), 2.0 * PI, max_relative = 1e-14);
        assert_relative_eq!(sphere_area(3), 4.0 * PI, max_relative = 1e-14);
    }
}
