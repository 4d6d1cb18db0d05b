use crate::error::{Error, Result};

/// Which of the two Lommel families entering the Bessel-Lommel sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LommelKind {
    /// `S_{nu+2l, nu-1}(z)`
    Lower,
    /// `S_{nu+2l+1, nu}(z)`
    Upper,
}

/// Terminating Lommel functions for `l in {0, 1, 2}`, as closed polynomials in `1/z^2`.
pub fn lommel_s(l: u32, nu: f64, z: f64, kind: LommelKind) -> Result<f64> {
    if !(z > 0.0) {
        return Err(Error::Domain(format!("Lommel function needs z > 0, got {z}")));
    }
    let z2 = z * z;
    let v = match (kind, l) {
        (LommelKind::Lower, 0) => z.powf(nu - 1.0),
        (LommelKind::Lower, 1) => z.powf(nu + 1.0) * (1.0 - 4.0 * nu / z2),
        (LommelKind::Lower, 2) => {
            z.powf(nu + 3.0)
                * (1.0 - 8.0 * (1.0 + nu) / z2 + 32.0 * nu * (1.0 + nu) / (z2 * z2))
        }
        (LommelKind::Upper, 0) => z.powf(nu),
        (LommelKind::Upper, 1) => z.powf(nu + 2.0) * (1.0 - 4.0 * (1.0 + nu) / z2),
        (LommelKind::Upper, 2) => {
            z.powf(nu + 4.0)
                * (1.0 - 8.0 * (nu + 2.0) / z2 + 32.0 * (nu + 1.0) * (nu + 2.0) / (z2 * z2))
        }
        _ => return Err(Error::Domain(format!("Lommel index l={l} not in 0..=2"))),
    };
    Ok(v)
}

/// Generic descending series
/// `S_{mu,nu}(z) = z^{mu-1} [1 - ((mu-1)^2 - nu^2)/z^2 + ((mu-1)^2 - nu^2)((mu-3)^2 - nu^2)/z^4 - ...]`,
/// valid only where it terminates (`mu - nu` or `mu + nu` an odd positive integer).
pub fn lommel_terminating(mu: f64, nu: f64, z: f64) -> Result<f64> {
    if !(z > 0.0) {
        return Err(Error::Domain(format!("Lommel function needs z > 0, got {z}")));
    }
    let terms = [mu - nu, mu + nu]
        .iter()
        .filter_map(|&s| {
            let l = (s - 1.0) / 2.0;
            (l >= 0.0 && (l - l.round()).abs() < 1e-12).then(|| l.round() as usize + 1)
        })
        .min()
        .ok_or_else(|| {
            Error::Domain(format!("S_{{{mu},{nu}}} has no terminating series"))
        })?;
    let z2 = z * z;
    let mut term = 1.0;
    let mut sum = 1.0;
    for j in 1..terms {
        let a = mu - 1.0 - 2.0 * (j as f64 - 1.0);
        term *= -(a * a - nu * nu) / z2;
        sum += term;
    }
    Ok(z.powf(mu - 1.0) * sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn table_anchors() {
        assert_eq!(lommel_s(0, 0.0, 3.7, LommelKind::Upper).unwrap(), 1.0);
        assert_relative_eq!(lommel_s(1, 0.0, 3.0, LommelKind::Lower).unwrap(), 3.0, max_relative = 1e-15);
        // z^4 (1 - 16/z^2 + 64/z^4) at z = 2: 16 (1 - 4 + 4)
        assert_relative_eq!(lommel_s(2, 0.0, 2.0, LommelKind::Upper).unwrap(), 16.0, max_relative = 1e-15);
    }

    #[test]
    fn bad_index() {
        assert!(lommel_s(3, 0.0, 1.0, LommelKind::Upper).is_err());
        assert!(lommel_s(0, 0.0, 0.0, LommelKind::Upper).is_err());
        assert!(lommel_terminating(2.5, 0.0, 1.0).is_err());
    }

    proptest! {
        #[test]
        fn table_matches_generic_series(z in 0.5f64..50.0, d in 2u32..9) {
            let nu = f64::from(d) / 2.0 - 1.0;
            for l in 0..3u32 {
                let lf = f64::from(l);
                let lower = lommel_s(l, nu, z, LommelKind::Lower).unwrap();
                let lower_gen = lommel_terminating(nu + 2.0 * lf, nu - 1.0, z).unwrap();
                prop_assert!((lower - lower_gen).abs() <= 1e-12 * lower.abs().max(1e-300) + 1e-300);
                let upper = lommel_s(l, nu, z, LommelKind::Upper).unwrap();
                let upper_gen = lommel_terminating(nu + 2.0 * lf + 1.0, nu, z).unwrap();
                prop_assert!((upper - upper_gen).abs() <= 1e-12 * upper.abs());
            }
        }
    }
}
