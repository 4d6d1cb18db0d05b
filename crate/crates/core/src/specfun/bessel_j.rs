use std::f64::consts::PI;

use super::ln_gamma;
use crate::error::{Error, Result};

const SERIES_MAX_X: f64 = 8.0;

/// Bessel function of the first kind `J_nu(x)` for real order `nu >= -1`
/// and `x >= 0`.
///
/// Negative orders in `[-1, 0)` are reached through the three-term
/// recurrence from `J_{nu+1}` and `J_{nu+2}`. Non-integer negative orders are
/// singular at the origin and return a domain error there.
pub fn bessel_j(nu: f64, x: f64) -> Result<f64> {
    if !(nu >= -1.0) || !nu.is_finite() {
        return Err(Error::Domain(format!("bessel_j order {nu} below -1")));
    }
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("bessel_j argument {x} must be finite and >= 0")));
    }
    if nu < 0.0 {
        if nu == -1.0 {
            return Ok(-j_nonneg(1.0, x));
        }
        if x == 0.0 {
            return Err(Error::Domain(format!("J_{nu} is singular at 0")));
        }
        let j1 = j_nonneg(nu + 1.0, x);
        let j2 = j_nonneg(nu + 2.0, x);
        return Ok(2.0 * (nu + 1.0) / x * j1 - j2);
    }
    Ok(j_nonneg(nu, x))
}

pub(crate) fn j_nonneg(nu: f64, x: f64) -> f64 {
    if x == 0.0 {
        return if nu == 0.0 { 1.0 } else { 0.0 };
    }
    if x <= SERIES_MAX_X {
        series(nu, x)
    } else if x >= 25.0 + nu * nu {
        hankel_asymptotic(nu, x)
    } else {
        miller(nu, x)
    }
}

fn series(nu: f64, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut term = (nu * half.ln() - ln_gamma(nu + 1.0)).exp();
    let q = half * half;
    let mut sum = term;
    let mut m = 0.0;
    loop {
        m += 1.0;
        term *= -q / (m * (m + nu));
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() && m > half {
            break;
        }
        if m > 500.0 {
            break;
        }
    }
    sum
}

fn hankel_asymptotic(nu: f64, x: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut t = 1.0f64;
    let mut k = 1.0;
    let mut last = f64::INFINITY;
    loop {
        let odd = 2.0 * k - 1.0;
        t *= (mu - odd * odd) / (k * 8.0 * x);
        if t.abs() > last || t == 0.0 {
            break;
        }
        last = t.abs();
        // t_k contributes to Q for odd k and to P for even k, with alternating signs.
        match (k as u64) % 4 {
            1 => q += t,
            2 => p -= t,
            3 => q -= t,
            _ => p += t,
        }
        if t.abs() < 1e-17 {
            break;
        }
        k += 1.0;
    }
    let chi = x - (0.5 * nu + 0.25) * PI;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

/// Backward recurrence normalized by
/// `sum_k (nu + 2k) Gamma(nu + k) / k! J_{nu+2k}(x) = (x/2)^nu`.
fn miller(nu: f64, x: f64) -> f64 {
    let mut n = (2.0 * x + 40.0 + nu).ceil() as usize;
    if n % 2 == 1 {
        n += 1;
    }
    // Coefficients c_k for k = 0..=n/2.
    let half_n = n / 2;
    let mut coeff = Vec::with_capacity(half_n + 1);
    let g = super::gamma(nu + 1.0).unwrap_or(1.0);
    coeff.push(g);
    let mut r = g; // Gamma(nu + 1) / 1!
    for k in 1..=half_n {
        if k > 1 {
            let kf = k as f64;
            r *= (nu + kf - 1.0) / kf;
        }
        coeff.push((nu + 2.0 * k as f64) * r);
    }

    let mut f_next = 0.0; // J_{nu+n+1}
    let mut f = 1e-30; // J_{nu+n}
    let mut norm = if n.is_multiple_of(2) { coeff[half_n] * f } else { 0.0 };
    for offset in (0..n).rev() {
        let order = nu + offset as f64 + 1.0;
        let f_prev = 2.0 * order / x * f - f_next;
        f_next = f;
        f = f_prev;
        if offset % 2 == 0 {
            norm += coeff[offset / 2] * f;
        }
        if f.abs() > 1e250 {
            f *= 1e-250;
            f_next *= 1e-250;
            norm *= 1e-250;
        }
    }
    f * (0.5 * x).powf(nu) / norm
}
