//! Closed-form covariances: planar SSRF with infinite cutoff, and the
//! band-limited Bessel-Lommel family in `d >= 2`.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::models::{ssrf_roots, BlParams, Model, Regime, SsrfParams, DEFAULT_TOL_CRITICAL};
use crate::specfun::{bessel_j, bessel_k0_complex, bessel_k_real, gamma, lommel_s, LommelKind};

/// Below `z = kc r` of this size the Bessel-Lommel sum is replaced by its
/// ascending series. The Lommel terms cancel like `z^{-(d+2)}` for small `z`,
/// so the switch moves out with the dimension.
pub fn bl_z_switch(d: u32) -> f64 {
    2.0 + 0.5 * f64::from(d)
}

fn check_lag(r: f64) -> Result<()> {
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::Domain(format!("lag must be finite and >= 0, got {r}")));
    }
    Ok(())
}

fn check_planar(p: &SsrfParams) -> Result<()> {
    p.check()?;
    if p.d != 2 {
        return Err(Error::Dimension { d: p.d, reason: "SSRF closed form exists only for d = 2" });
    }
    if p.kc.is_finite() {
        return Err(Error::Cutoff("SSRF closed form requires kc = inf"));
    }
    Ok(())
}

/// Planar SSRF covariance at lag `r`, for `kc = inf`.
pub fn ssrf_cov_2d(r: f64, p: &SsrfParams) -> Result<f64> {
    check_planar(p)?;
    check_lag(r)?;
    if r == 0.0 {
        return ssrf_variance_2d(p);
    }
    let h = r / p.xi;
    let roots = ssrf_roots(p.eta1, DEFAULT_TOL_CRITICAL)?;
    let v = match roots.regime {
        Regime::Critical => p.eta0 * h * bessel_k_real(1.0, h)? / (4.0 * PI),
        Regime::Rigid => {
            let k_small = bessel_k_real(0.0, h * roots.z_plus.re)?;
            let k_large = bessel_k_real(0.0, h * roots.z_minus.re)?;
            p.eta0 * (k_small - k_large) / (2.0 * PI * roots.delta.re)
        }
        Regime::Oscillatory => {
            let k0 = bessel_k0_complex(roots.z_plus * h)?;
            p.eta0 * k0.im / (PI * roots.delta.im)
        }
    };
    Ok(v)
}

/// Planar SSRF variance, the `r -> 0` limit of [`ssrf_cov_2d`].
pub fn ssrf_variance_2d(p: &SsrfParams) -> Result<f64> {
    check_planar(p)?;
    let eta1 = p.eta1;
    let roots = ssrf_roots(eta1, DEFAULT_TOL_CRITICAL)?;
    let v = match roots.regime {
        Regime::Critical => p.eta0 / (4.0 * PI),
        Regime::Rigid => {
            let delta = roots.delta.re;
            // ln((eta1 + Delta)/(eta1 - Delta)) with eta1 - Delta = 4/(eta1 + Delta)
            let ratio = (eta1 + delta) * (eta1 + delta) / 4.0;
            p.eta0 * ratio.ln() / (4.0 * PI * delta)
        }
        Regime::Oscillatory => {
            let delta = roots.delta.im;
            p.eta0 * delta.atan2(eta1) / (2.0 * PI * delta)
        }
    };
    Ok(v)
}

/// `1/d + eta1 u^2/(d+2) + u^4/(d+4)` with every denominator shifted by `shift`.
pub(crate) fn bl_band_poly(d: f64, eta1: f64, uc: f64, shift: f64) -> f64 {
    let u2 = uc * uc;
    1.0 / (d + shift) + eta1 * u2 / (d + shift + 2.0) + u2 * u2 / (d + shift + 4.0)
}

/// Bessel-Lommel variance.
pub fn bl_variance(p: &BlParams) -> Result<f64> {
    p.check()?;
    let d = f64::from(p.d);
    let half = 0.5 * d;
    let pref = 2f64.powf(1.0 - d) * p.kc.powf(d) / (PI.powf(half) * gamma(half)? * p.eta0 * p.xi.powf(d));
    Ok(pref * bl_band_poly(d, p.eta1, p.uc(), 0.0))
}

/// `kc^d / ((2 pi)^{d/2} eta0 xi^d)`, the common factor of the Lommel sum.
fn bl_g0(p: &BlParams) -> f64 {
    let d = f64::from(p.d);
    p.kc.powf(d) / ((2.0 * PI).powf(0.5 * d) * p.eta0 * p.xi.powf(d))
}

fn bl_coefficients(p: &BlParams) -> [f64; 3] {
    let u2 = p.uc() * p.uc();
    [1.0, p.eta1 * u2, u2 * u2]
}

/// Bessel-Lommel covariance at lag `r`.
pub fn bl_cov(r: f64, p: &BlParams) -> Result<f64> {
    p.check()?;
    check_lag(r)?;
    if r == 0.0 {
        return bl_variance(p);
    }
    let z = p.kc * r;
    if z < bl_z_switch(p.d) {
        bl_cov_series(z, p)
    } else {
        bl_cov_lommel(z, p)
    }
}

/// Tripartite sum of Bessel and terminating Lommel functions, `z = kc r > 0`.
pub fn bl_cov_lommel(z: f64, p: &BlParams) -> Result<f64> {
    let nu = 0.5 * f64::from(p.d) - 1.0;
    let j_nu = bessel_j(nu, z)?;
    let j_nu_m1 = bessel_j(nu - 1.0, z)?;
    let g0 = bl_g0(p);
    let mut sum = 0.0;
    for (l, c) in bl_coefficients(p).into_iter().enumerate() {
        let l = l as u32;
        let lf = f64::from(l);
        let lower = lommel_s(l, nu, z, LommelKind::Lower)?;
        let upper = lommel_s(l, nu, z, LommelKind::Upper)?;
        let bracket = (2.0 * nu + 2.0 * lf) * j_nu * lower - j_nu_m1 * upper;
        sum += c * bracket / z.powf(2.0 * nu + 2.0 * lf + 1.0);
    }
    Ok(g0 * sum)
}

/// Term-by-term integral of the ascending series of `J_nu(zx)/(zx)^nu` against the spectral weight.
pub fn bl_cov_series(z: f64, p: &BlParams) -> Result<f64> {
    let d = f64::from(p.d);
    let nu = 0.5 * d - 1.0;
    let c = bl_coefficients(p);
    let q = 0.25 * z * z;
    let mut coef = 1.0 / (2f64.powf(nu) * gamma(nu + 1.0)?);
    let mut sum = 0.0;
    for m in 0..200 {
        let mf = f64::from(m);
        if m > 0 {
            coef *= -q / (mf * (mf + nu));
        }
        let inner: f64 = c.iter().enumerate().map(|(l, cl)| cl / (d + 2.0 * l as f64 + 2.0 * mf)).sum();
        let term = coef * inner;
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    Ok(bl_g0(p) * sum)
}

/// Bessel-Lommel autocorrelation `C(r)/C(0)`; independent of `eta0`.
pub fn bl_autocorrelation(r: f64, p: &BlParams) -> Result<f64> {
    Ok(bl_cov(r, p)? / bl_variance(p)?)
}

/// Closed-form covariance for either family.
pub fn covariance(model: &Model, r: f64) -> Result<f64> {
    match model {
        Model::Ssrf(p) => ssrf_cov_2d(r, p),
        Model::BesselLommel(p) => bl_cov(r, p),
    }
}

/// Closed-form variance for either family.
pub fn variance(model: &Model) -> Result<f64> {
    match model {
        Model::Ssrf(p) => ssrf_variance_2d(p),
        Model::BesselLommel(p) => bl_variance(p),
    }
}

/// A model together with an ascending list of non-negative lags.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceQuery {
    pub model: Model,
    pub lags: Vec<f64>,
}

impl CovarianceQuery {
    pub fn new(model: Model, lags: Vec<f64>) -> Result<Self> {
        model.check()?;
        if let Some(bad) = lags.iter().find(|r| !(**r >= 0.0) || !r.is_finite()) {
            return Err(Error::Domain(format!("lag must be finite and >= 0, got {bad}")));
        }
        if lags.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Precondition("lags must be sorted ascending".into()));
        }
        Ok(CovarianceQuery { model, lags })
    }

    /// Covariance at every lag, evaluated in parallel.
    pub fn covariances(&self) -> Result<Vec<f64>> {
        self.lags.par_iter().map(|&r| covariance(&self.model, r)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{hankel_inverse, QuadratureConfig, RadialProfile};
    use crate::specfun::ComplexValue;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;

    fn planar(eta0: f64, eta1: f64, xi: f64) -> SsrfParams {
        SsrfParams::planar(eta0, eta1, xi).unwrap()
    }

    fn bl_reference(d: u32) -> BlParams {
        BlParams::new(1.0, 2.0, 1.0, 2.0, d).unwrap()
    }

    fn oracle(model: Model, r: f64) -> f64 {
        let prof = RadialProfile::from_model(&model);
        hankel_inverse(&prof, model.dim(), r, &QuadratureConfig::strict()).unwrap()
    }

    #[test]
    fn ssrf_anchor_values() {
        assert_relative_eq!(ssrf_cov_2d(1e-12, &planar(1.0, 2.0, 1.0)).unwrap(), 1.0 / (4.0 * PI), max_relative = 1e-9);
        assert_relative_eq!(ssrf_cov_2d(0.0, &planar(8.0, 0.0, 1.0)).unwrap(), 1.0, max_relative = 1e-14);
        let v3 = (((3.0 + 5f64.sqrt()) / (3.0 - 5f64.sqrt())).ln()) / (4.0 * PI * 5f64.sqrt());
        assert_relative_eq!(ssrf_cov_2d(0.0, &planar(1.0, 3.0, 1.0)).unwrap(), v3, max_relative = 1e-14);
        assert_abs_diff_eq!(v3, 0.0685, epsilon = 5e-5);
        let k1 = ssrf_cov_2d(1.0, &planar(4.0 * PI, 2.0, 1.0)).unwrap();
        assert_abs_diff_eq!(k1, 0.601_907_230_197_234_6, epsilon = 1e-12);
    }

    #[test]
    fn ssrf_variance_anchors() {
        assert_relative_eq!(ssrf_variance_2d(&planar(1.0, 2.0, 1.0)).unwrap(), 1.0 / (4.0 * PI), max_relative = 1e-15);
        assert_relative_eq!(ssrf_variance_2d(&planar(1.0, 0.0, 1.0)).unwrap(), 0.125, max_relative = 1e-15);
        assert_abs_diff_eq!(ssrf_variance_2d(&planar(1.0, 3.0, 1.0)).unwrap(), 0.0685, epsilon = 5e-5);
    }

    #[test]
    fn ssrf_variance_matches_quadrature() {
        for &eta1 in &[-1.9, -1.5, 0.0, 1.5, 2.0, 3.0, 15.0, 1e4] {
            let p = planar(1.0, eta1, 1.3);
            let q = oracle(Model::Ssrf(p), 0.0);
            assert_relative_eq!(ssrf_variance_2d(&p).unwrap(), q, max_relative = 1e-8);
        }
    }

    #[test]
    fn ssrf_small_lag_approaches_variance() {
        for &eta1 in &[-1.5, 0.0, 2.0, 3.0] {
            let p = planar(1.0, eta1, 1.0);
            let var = ssrf_variance_2d(&p).unwrap();
            let near = ssrf_cov_2d(1e-7, &p).unwrap();
            assert_abs_diff_eq!(near, var, epsilon = 1e-5 * var);
        }
    }

    #[test]
    fn ssrf_matches_oracle_in_every_regime() {
        for &eta1 in &[-1.5, 0.0, 1.5, 2.0, 3.0, 15.0] {
            let p = planar(1.0, eta1, 1.0);
            let var = ssrf_variance_2d(&p).unwrap();
            for i in 1..=40 {
                let h = 10.0 * f64::from(i) / 40.0;
                let cf = ssrf_cov_2d(h, &p).unwrap();
                let q = oracle(Model::Ssrf(p), h);
                assert!((cf - q).abs() <= 1e-7 * var, "eta1={eta1} h={h}: {cf} vs {q}");
            }
        }
    }

    #[test]
    fn ssrf_regime_continuity() {
        let base = planar(1.0, 2.0, 1.0);
        let var = ssrf_variance_2d(&base).unwrap();
        for &eta1 in &[2.0 - 1e-4, 2.0 + 1e-4] {
            let p = planar(1.0, eta1, 1.0);
            for i in 0..=40 {
                let r = 0.25 * f64::from(i);
                let diff = (ssrf_cov_2d(r, &p).unwrap() - ssrf_cov_2d(r, &base).unwrap()).abs();
                assert!(diff <= 1e-3 * var);
            }
        }
    }

    #[test]
    fn ssrf_decays() {
        for &eta1 in &[0.0, 0.5, 1.0, 1.5, 2.0] {
            let p = planar(1.0, eta1, 1.0);
            let var = ssrf_variance_2d(&p).unwrap();
            assert!(ssrf_cov_2d(20.0, &p).unwrap().abs() <= 1e-6 * var);
        }
        // In the rigid regime the decay length is xi / z_+, which grows like sqrt(eta1).
        for &eta1 in &[3.0, 5.0, 15.0, 1e3] {
            let p = planar(1.0, eta1, 1.0);
            let var = ssrf_variance_2d(&p).unwrap();
            let zp = ssrf_roots(eta1, DEFAULT_TOL_CRITICAL).unwrap().z_plus.re;
            assert!(ssrf_cov_2d(20.0 / zp, &p).unwrap().abs() <= 1e-6 * var);
        }
    }

    #[test]
    fn oscillatory_intermediate_is_conjugate_symmetric() {
        let roots = ssrf_roots(-0.5, DEFAULT_TOL_CRITICAL).unwrap();
        for &h in &[0.1, 1.0, 4.0] {
            let a = bessel_k0_complex(roots.z_plus * h).unwrap();
            let b = bessel_k0_complex(roots.z_minus * h).unwrap();
            assert_abs_diff_eq!((a - b.conj()).norm(), 0.0, epsilon = 1e-14);
            // Im of the conjugate-pair difference is what survives in the covariance.
            let diff: ComplexValue = (a - b) / ComplexValue::new(0.0, 2.0);
            assert_abs_diff_eq!(diff.im, 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn ssrf_rejects_unsupported() {
        let finite = SsrfParams::new(1.0, 1.0, 1.0, 5.0, 2).unwrap();
        assert!(matches!(ssrf_cov_2d(1.0, &finite), Err(Error::Cutoff(_))));
        let three = SsrfParams::new(1.0, 1.0, 1.0, f64::INFINITY, 3).unwrap();
        assert!(matches!(ssrf_cov_2d(1.0, &three), Err(Error::Dimension { .. })));
        assert!(ssrf_cov_2d(-1.0, &planar(1.0, 1.0, 1.0)).is_err());
        let bad = SsrfParams { eta1: -2.5, ..planar(1.0, 1.0, 1.0) };
        assert!(matches!(ssrf_cov_2d(1.0, &bad), Err(Error::Permissibility(_))));
    }

    #[test]
    fn bl_variance_anchors() {
        assert_abs_diff_eq!(bl_variance(&bl_reference(2)).unwrap(), 2.0 / PI * (0.5 + 2.0 + 8.0 / 3.0), epsilon = 1e-13);
        assert_abs_diff_eq!(bl_variance(&bl_reference(2)).unwrap(), 3.2893, epsilon = 1e-4);
        let p = BlParams::new(1.0, 0.0, 1.0, 1.0, 2).unwrap();
        assert_abs_diff_eq!(bl_variance(&p).unwrap(), 0.106_10, epsilon = 1e-5);
        let doubled = BlParams { eta0: 2.0, ..p };
        assert_relative_eq!(bl_variance(&doubled).unwrap(), 0.5 * bl_variance(&p).unwrap(), max_relative = 1e-15);
        assert_eq!(bl_cov(0.0, &p).unwrap(), bl_variance(&p).unwrap());
    }

    #[test]
    fn bl_variance_matches_quadrature() {
        for d in 2..=6 {
            let p = bl_reference(d);
            let q = oracle(Model::BesselLommel(p), 0.0);
            assert_relative_eq!(bl_variance(&p).unwrap(), q, max_relative = 1e-11);
        }
    }

    #[test]
    fn bl_matches_oracle() {
        for d in 2..=5 {
            let p = bl_reference(d);
            let var = bl_variance(&p).unwrap();
            for i in 1..=50 {
                let r = 20.0 * f64::from(i) / 50.0;
                let cf = bl_cov(r, &p).unwrap();
                let q = oracle(Model::BesselLommel(p), r);
                assert!((cf - q).abs() <= 1e-8 * var, "d={d} r={r}: {cf} vs {q}");
            }
        }
    }

    #[test]
    fn bl_series_and_lommel_agree_near_switch() {
        for d in 2..=6 {
            for &eta1 in &[-1.5, 0.0, 2.0, 10.0] {
                let p = BlParams::new(0.7, eta1, 1.3, 2.0, d).unwrap();
                let var = bl_variance(&p).unwrap();
                let zs = bl_z_switch(d);
                for &z in &[0.8 * zs, zs, 1.2 * zs] {
                    let a = bl_cov_series(z, &p).unwrap();
                    let b = bl_cov_lommel(z, &p).unwrap();
                    assert!((a - b).abs() <= 1e-12 * var, "d={d} eta1={eta1} z={z}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn bl_has_negative_excursion() {
        let p = bl_reference(2);
        let min = (1..2000).map(|i| bl_autocorrelation(0.01 * f64::from(i), &p).unwrap()).fold(f64::INFINITY, f64::min);
        assert!(min < 0.0);
    }

    fn first_zero(p: &BlParams) -> f64 {
        let mut prev = 1.0;
        for i in 1..100_000 {
            let r = 1e-3 * f64::from(i);
            let v = bl_autocorrelation(r, p).unwrap();
            if v <= 0.0 && prev > 0.0 {
                return r;
            }
            prev = v;
        }
        f64::INFINITY
    }

    #[test]
    fn bl_first_zero_moves_out_with_dimension() {
        let zeros: Vec<f64> = (2..=5).map(|d| first_zero(&bl_reference(d))).collect();
        assert!(zeros.iter().all(|z| z.is_finite()));
        assert!(zeros.windows(2).all(|w| w[1] > w[0]), "{zeros:?}");
    }

    #[test]
    fn bl_autocorrelation_ignores_eta0() {
        for i in 0..30 {
            let r = 0.3 * f64::from(i);
            let base = bl_autocorrelation(r, &bl_reference(3)).unwrap();
            for &eta0 in &[0.1, 10.0] {
                let p = BlParams { eta0, ..bl_reference(3) };
                assert_abs_diff_eq!(bl_autocorrelation(r, &p).unwrap(), base, epsilon = 1e-14);
            }
        }
        assert_eq!(bl_autocorrelation(0.0, &bl_reference(2)).unwrap(), 1.0);
    }

    #[test]
    fn query_validation() {
        let m = Model::BesselLommel(bl_reference(2));
        assert!(CovarianceQuery::new(m, vec![0.0, 1.0, 0.5]).is_err());
        assert!(CovarianceQuery::new(m, vec![-1.0, 1.0]).is_err());
        let q = CovarianceQuery::new(m, vec![0.0, 0.5, 1.0]).unwrap();
        let v = q.covariances().unwrap();
        assert_eq!(v[0], bl_variance(&bl_reference(2)).unwrap());
        assert_eq!(v[2], bl_cov(1.0, &bl_reference(2)).unwrap());
    }

    // Symmetric Jacobi eigenvalue sweep, enough for 30x30 checks.
    #[allow(clippy::needless_range_loop)]
    fn eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
        let n = a.len();
        for _ in 0..100 {
            let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i][j] * a[i][j]).sum();
            if off < 1e-22 {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    if a[p][q].abs() < 1e-300 {
                        continue;
                    }
                    let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let t = if theta == 0.0 { 1.0 } else { t };
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let (akp, akq) = (a[k][p], a[k][q]);
                        a[k][p] = c * akp - s * akq;
                        a[k][q] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let (apk, aqk) = (a[p][k], a[q][k]);
                        a[p][k] = c * apk - s * aqk;
                        a[q][k] = s * apk + c * aqk;
                    }
                }
            }
        }
        (0..n).map(|i| a[i][i]).collect()
    }

    fn min_eig_ratio(model: &Model, pts: &[(f64, f64)]) -> f64 {
        let n = pts.len();
        let mut m = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                let r = ((pts[i].0 - pts[j].0).powi(2) + (pts[i].1 - pts[j].1).powi(2)).sqrt();
                m[i][j] = covariance(model, r).unwrap();
            }
        }
        let trace: f64 = (0..n).map(|i| m[i][i]).sum();
        eigenvalues(m).into_iter().fold(f64::INFINITY, f64::min) / trace
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn covariance_matrices_are_positive_semidefinite(
            pts in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 30),
            eta1 in -1.9f64..20.0,
            xi in 0.05f64..0.5,
            kc in 2.0f64..40.0,
        ) {
            let ssrf = Model::Ssrf(planar(1.0, eta1, xi));
            prop_assert!(min_eig_ratio(&ssrf, &pts) >= -1e-8);
            let bl = Model::BesselLommel(BlParams::new(1.0, eta1, xi, kc, 2).unwrap());
            prop_assert!(min_eig_ratio(&bl, &pts) >= -1e-8);
        }

        #[test]
        fn autocorrelation_bounded(r in 0.0f64..50.0, d in 2u32..7, eta1 in -1.9f64..10.0, kc in 0.1f64..5.0) {
            let p = BlParams::new(1.0, eta1, 1.0, kc, d).unwrap();
            let rho = bl_autocorrelation(r, &p).unwrap();
            prop_assert!(rho.abs() <= 1.0 + 1e-9);
        }
    }
}
