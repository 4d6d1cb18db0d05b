//! Special functions used by the closed-form covariances.
//!
//! Everything here is a pure function of its arguments. Orders and domains are
//! restricted to what the covariance families need: integer and half-integer
//! Bessel orders down to -1, real-order `K_nu` on the positive axis, `K_0` in
//! the open right half-plane, and the terminating Lommel polynomials.

mod bessel_j;
mod bessel_k;
mod lommel;

pub use bessel_j::bessel_j;
pub use bessel_k::{bessel_k0_complex, bessel_k_real};
pub use lommel::{lommel_s, lommel_terminating, LommelKind};

use crate::error::{Error, Result};

/// Complex number with principal-branch `sqrt`, `powc` and `ln`.
pub type ComplexValue = num_complex::Complex64;

/// Euler-Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Gamma function for real argument.
pub fn gamma(x: f64) -> Result<f64> {
    if x <= 0.0 && x == x.floor() {
        return Err(Error::Pole(x));
    }
    if !x.is_finite() {
        return Err(Error::Domain(format!("gamma of non-finite argument {x}")));
    }
    Ok(statrs::function::gamma::gamma(x))
}

/// Natural log of |Gamma(x)| for x > 0.
pub(crate) fn ln_gamma(x: f64) -> f64 {
    statrs::function::gamma::ln_gamma(x)
}

/// Surface area of the unit sphere in `d` dimensions, `2 pi^{d/2} / Gamma(d/2)`.
pub fn unit_sphere_surface(d: u32) -> f64 {
    let half = f64::from(d) / 2.0;
    2.0 * std::f64::consts::PI.powf(half) / statrs::function::gamma::gamma(half)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn gamma_anchors() {
        assert_relative_eq!(gamma(1.0).unwrap(), 1.0, max_relative = 1e-14);
        assert_relative_eq!(gamma(0.5).unwrap(), PI.sqrt(), max_relative = 1e-14);
        // Gamma(3.5) = 2.5 * 1.5 * 0.5 * Gamma(0.5)
        let g35 = 2.5 * 1.5 * 0.5 * PI.sqrt();
        assert_relative_eq!(gamma(3.5).unwrap(), g35, max_relative = 1e-13);
        assert!((gamma(3.5).unwrap() - 3.323_350_9).abs() < 1e-7);
    }

    #[test]
    fn gamma_recurrence_over_range() {
        let mut x = 0.1;
        while x < 29.0 {
            let lhs = gamma(x + 1.0).unwrap();
            let rhs = x * gamma(x).unwrap();
            assert_relative_eq!(lhs, rhs, max_relative = 1e-12);
            x += 0.37;
        }
    }

    #[test]
    fn gamma_poles_rejected() {
        assert_eq!(gamma(0.0), Err(Error::Pole(0.0)));
        assert_eq!(gamma(-3.0), Err(Error::Pole(-3.0)));
        assert!(gamma(-2.5).is_ok());
    }

    #[test]
    fn sphere_surfaces() {
        assert_relative_eq!(unit_sphere_surface(1), 2.0, max_relative = 1e-14);
        assert_relative_eq!(unit_sphere_surface(2), 2.0 * PI, max_relative = 1e-14);
        assert_relative_eq!(unit_sphere_surface(3), 4.0 * PI, max_relative = 1e-14);
    }
}
