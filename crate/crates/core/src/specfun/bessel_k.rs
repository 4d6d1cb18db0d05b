use std::f64::consts::PI;

use super::{ComplexValue, EULER_GAMMA};
use crate::error::{Error, Result};

const EPS: f64 = 1e-16;
const CF_MAX_ITER: usize = 100_000;

/// Modified Bessel function of the second kind `K_nu(x)` for real order and
/// `x > 0`. Even in the order.
///
/// Temme's series for `x < 2`, Steed's continued fraction otherwise, then
/// upward recurrence from the fractional order `|mu| <= 1/2`.
pub fn bessel_k_real(nu: f64, x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("K_nu requires x > 0, got {x}")));
    }
    if !nu.is_finite() {
        return Err(Error::Domain(format!("K_nu order {nu} not finite")));
    }
    let nu = nu.abs();
    let nl = (nu + 0.5).floor();
    let mu = nu - nl;
    let (mut k_mu, mut k_mu1) = if x < 2.0 {
        temme_series(mu, x)
    } else {
        let (a, b) = steed_cf2(mu, ComplexValue::new(x, 0.0))?;
        (a.re, b.re)
    };
    let two_over_x = 2.0 / x;
    for i in 1..=(nl as u64) {
        let next = (mu + i as f64) * two_over_x * k_mu1 + k_mu;
        k_mu = k_mu1;
        k_mu1 = next;
    }
    Ok(k_mu)
}

/// `K_0(z)` for complex `z` with `Re z > 0`.
///
/// Ascending series for `|z| <= 2`, continued fraction for `2 < |z| <= 25`,
/// Hankel asymptotic expansion beyond. Satisfies `K_0(conj z) = conj K_0(z)`
/// by construction: every branch is a real-coefficient analytic expression.
pub fn bessel_k0_complex(z: ComplexValue) -> Result<ComplexValue> {
    if !(z.re > 0.0) || !z.im.is_finite() || !z.re.is_finite() {
        return Err(Error::Domain(format!("K_0(z) requires Re z > 0, got {z}")));
    }
    let r = z.norm();
    if r <= 2.0 {
        Ok(k0_ascending(z))
    } else if r <= 25.0 {
        Ok(steed_cf2(0.0, z)?.0)
    } else {
        Ok(k0_asymptotic(z))
    }
}

fn k0_ascending(z: ComplexValue) -> ComplexValue {
    let q = z * z * 0.25;
    let mut term = ComplexValue::new(1.0, 0.0);
    let mut i0 = term;
    let mut tail = ComplexValue::new(0.0, 0.0);
    let mut harmonic = 0.0;
    for k in 1..200 {
        let kf = k as f64;
        term = term * q / (kf * kf);
        harmonic += 1.0 / kf;
        i0 += term;
        tail += term * harmonic;
        if term.norm() * harmonic < EPS * tail.norm().max(i0.norm()) {
            break;
        }
    }
    -((z * 0.5).ln() + EULER_GAMMA) * i0 + tail
}

fn k0_asymptotic(z: ComplexValue) -> ComplexValue {
    let mut sum = ComplexValue::new(1.0, 0.0);
    let mut term = sum;
    let mut last = f64::INFINITY;
    for k in 1..200 {
        let odd = (2 * k - 1) as f64;
        term = term * (-odd * odd) / (8.0 * k as f64 * z);
        let mag = term.norm();
        if mag > last {
            break;
        }
        last = mag;
        sum += term;
        if mag < EPS * sum.norm() {
            break;
        }
    }
    (PI / (2.0 * z)).sqrt() * (-z).exp() * sum
}

fn gamma_pair(mu: f64) -> (f64, f64, f64, f64) {
    // Returns (gam1, gam2, 1/Gamma(1+mu), 1/Gamma(1-mu)).
    let gampl = 1.0 / statrs::function::gamma::gamma(1.0 + mu);
    let gammi = 1.0 / statrs::function::gamma::gamma(1.0 - mu);
    if mu.abs() < 1e-3 {
        // 1/Gamma(1+x) = 1 + g x - 0.6558780715 x^2 - 0.0420026350 x^3 + 0.1665386114 x^4 ...
        let m2 = mu * mu;
        let gam1 = -EULER_GAMMA + 0.042_002_635_034_095_2 * m2;
        let gam2 = 1.0 - 0.655_878_071_520_253_8 * m2 + 0.166_538_611_382_291_5 * m2 * m2;
        (gam1, gam2, gampl, gammi)
    } else {
        ((gammi - gampl) / (2.0 * mu), 0.5 * (gammi + gampl), gampl, gammi)
    }
}

/// Temme's series for `K_mu(x)`, `K_{mu+1}(x)` with `|mu| <= 1/2`, `x < 2`.
fn temme_series(mu: f64, x: f64) -> (f64, f64) {
    let (gam1, gam2, gampl, gammi) = gamma_pair(mu);
    let x2 = 0.5 * x;
    let pimu = PI * mu;
    let fact = if pimu.abs() < EPS { 1.0 } else { pimu / pimu.sin() };
    let d = -x2.ln();
    let e = mu * d;
    let fact2 = if e.abs() < EPS { 1.0 } else { e.sinh() / e };
    let mut ff = fact * (gam1 * e.cosh() + gam2 * fact2 * d);
    let mut sum = ff;
    let ee = e.exp();
    let mut p = 0.5 * ee / gampl;
    let mut q = 0.5 / (ee * gammi);
    let mut c = 1.0;
    let dd = x2 * x2;
    let mut sum1 = p;
    let mu2 = mu * mu;
    for i in 1..10_000 {
        let fi = i as f64;
        ff = (fi * ff + p + q) / (fi * fi - mu2);
        c *= dd / fi;
        p /= fi - mu;
        q /= fi + mu;
        let del = c * ff;
        sum += del;
        let del1 = c * (p - fi * ff);
        sum1 += del1;
        if del.abs() < sum.abs() * EPS {
            break;
        }
    }
    (sum, sum1 * 2.0 / x)
}

/// Steed's continued fraction (Temme's normalization) for `K_mu(z)` and
/// `K_{mu+1}(z)`, `|mu| <= 1/2`, `Re z > 0`.
fn steed_cf2(mu: f64, z: ComplexValue) -> Result<(ComplexValue, ComplexValue)> {
    let one = ComplexValue::new(1.0, 0.0);
    let mu2 = mu * mu;
    let mut b = (z + 1.0) * 2.0;
    let mut d = one / b;
    let mut delh = d;
    let mut h = d;
    let mut q1 = ComplexValue::new(0.0, 0.0);
    let mut q2 = one;
    let a1 = 0.25 - mu2;
    let mut q = ComplexValue::new(a1, 0.0);
    let mut c = ComplexValue::new(a1, 0.0);
    let mut a = -a1;
    let mut s = one + q * delh;
    let mut converged = false;
    for i in 1..CF_MAX_ITER {
        let fi = i as f64;
        a -= 2.0 * fi;
        c = -c * a / (fi + 1.0);
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = one / (b + d * a);
        delh = (b * d - 1.0) * delh;
        h += delh;
        let dels = q * delh;
        s += dels;
        if dels.norm() < EPS * s.norm() {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NonConvergence(format!("K continued fraction at z={z}")));
    }
    h *= a1;
    let k_mu = (PI / (2.0 * z)).sqrt() * (-z).exp() / s;
    let k_mu1 = k_mu * (z + mu + 0.5 - h) / z;
    Ok((k_mu, k_mu1))
}
