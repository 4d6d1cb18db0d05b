use std::f64::consts::PI;

use crate::specfun::bessel_j;

/// Ascending positive zeros of `J_nu` for `nu >= -1/2`.
///
/// Early zeros are bracketed by a sign scan; once the spacing has settled
/// near `pi`, each zero is found by Newton iteration from the previous zero
/// plus `pi`, falling back to the scan if the step lands outside the bracket.
#[derive(Debug, Clone)]
pub(crate) struct BesselZeros {
    nu: f64,
    last: f64,
}

const SCAN_STEP: f64 = 0.1;

impl BesselZeros {
    pub(crate) fn new(nu: f64) -> Self {
        BesselZeros { nu, last: 0.0 }
    }

    fn j(&self, x: f64) -> f64 {
        bessel_j(self.nu, x).unwrap_or(f64::NAN)
    }

    fn newton(&self, mut x: f64) -> Option<f64> {
        for _ in 0..30 {
            let jv = self.j(x);
            let jp = self.nu / x * jv - bessel_j(self.nu + 1.0, x).ok()?;
            if jp == 0.0 {
                return None;
            }
            let step = jv / jp;
            x -= step;
            if step.abs() <= 4.0 * f64::EPSILON * x {
                return Some(x);
            }
        }
        None
    }

    fn scan_from(&self, from: f64) -> f64 {
        let mut a = from.max(1e-3);
        let mut fa = self.j(a);
        loop {
            let b = a + SCAN_STEP;
            let fb = self.j(b);
            if fa == 0.0 {
                return a;
            }
            if fa * fb <= 0.0 {
                return self.bisect(a, b, fa);
            }
            a = b;
            fa = fb;
        }
    }

    fn bisect(&self, mut a: f64, mut b: f64, mut fa: f64) -> f64 {
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            let fm = self.j(m);
            if fa * fm <= 0.0 {
                b = m;
            } else {
                a = m;
                fa = fm;
            }
        }
        0.5 * (a + b)
    }
}

impl Iterator for BesselZeros {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        let settled = self.last > 2.0 * self.nu.abs() + 20.0;
        let z = if settled {
            self.newton(self.last + PI)
                .filter(|&z| z > self.last + 0.5 * PI && z < self.last + 1.5 * PI)
                .unwrap_or_else(|| self.scan_from(self.last + 1e-6))
        } else {
            // Step just past the previous root before scanning for the next sign change.
            self.scan_from(self.last + 1e-6)
        };
        self.last = z;
        Some(z)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn known_zeros() {
        let z: Vec<f64> = BesselZeros::new(0.0).take(3).collect();
        assert_abs_diff_eq!(z[0], 2.404_825_557_695_773, epsilon = 1e-12);
        assert_abs_diff_eq!(z[1], 5.520_078_110_286_311, epsilon = 1e-12);
        assert_abs_diff_eq!(z[2], 8.653_727_912_911_013, epsilon = 1e-12);
        let z1: Vec<f64> = BesselZeros::new(1.0).take(2).collect();
        assert_abs_diff_eq!(z1[0], 3.831_705_970_207_512, epsilon = 1e-12);
        assert_abs_diff_eq!(z1[1], 7.015_586_669_815_619, epsilon = 1e-12);
    }

    #[test]
    fn half_order_zeros_are_multiples_of_pi() {
        for (m, z) in BesselZeros::new(0.5).take(200).enumerate() {
            assert_abs_diff_eq!(z, PI * (m + 1) as f64, epsilon = 1e-9);
        }
        for (m, z) in BesselZeros::new(-0.5).take(50).enumerate() {
            assert_abs_diff_eq!(z, PI * (m as f64 + 0.5), epsilon = 1e-9);
        }
    }

    #[test]
    fn no_zero_skipped() {
        for &nu in &[0.0, 1.0, 1.5, 3.0] {
            let z: Vec<f64> = BesselZeros::new(nu).take(100).collect();
            for w in z.windows(2) {
                let gap = w[1] - w[0];
                assert!(gap > 2.5 && gap < 4.5, "nu={nu} gap={gap}");
            }
        }
    }
}
