//! Length scales: integral ranges, the correlation spectrum `lambda_c^(alpha)`
//! and radial spectral moments.

use std::f64::consts::PI;

use serde::Serialize;

use crate::covariance::bl_band_poly;
use crate::error::{Error, Result};
use crate::models::{char_poly, BlParams, Model, SsrfParams};
use crate::oracle::{radial_moment, radial_volume_integral, QuadratureConfig, RadialProfile};
use crate::specfun::{gamma, unit_sphere_surface};

/// A correlation-spectrum value. Divergent spectral integrals give a zero
/// length with `divergent` set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorrSpectrum {
    pub value: f64,
    pub divergent: bool,
}

impl CorrSpectrum {
    fn finite(value: f64) -> Self {
        CorrSpectrum { value, divergent: false }
    }

    fn divergent() -> Self {
        CorrSpectrum { value: 0.0, divergent: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumMethod {
    ClosedForm,
    Numeric,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumQuery {
    pub model: Model,
    pub alpha: f64,
    pub method: SpectrumMethod,
}

impl SpectrumQuery {
    pub fn new(model: Model, alpha: f64, method: SpectrumMethod) -> Result<Self> {
        model.check()?;
        check_alpha(alpha)?;
        Ok(SpectrumQuery { model, alpha, method })
    }

    pub fn evaluate(&self, cfg: &QuadratureConfig) -> Result<CorrSpectrum> {
        match (self.method, &self.model) {
            (SpectrumMethod::ClosedForm, Model::Ssrf(p)) => ssrf_corr_spectrum(self.alpha, p),
            (SpectrumMethod::ClosedForm, Model::BesselLommel(p)) => bl_corr_spectrum(self.alpha, p).map(CorrSpectrum::finite),
            (SpectrumMethod::Numeric, _) => corr_spectrum_numeric(self, cfg),
        }
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::Domain(format!("alpha must lie in [0, 1], got {alpha}")));
    }
    Ok(())
}

/// Integral range `ell_c = (int C(r) dr / C(0))^{1/d}`, from the spectral
/// density as `((2 pi)^d C~(0) / int C~(k) dk)^{1/d}`.
pub fn integral_range_numeric(model: &Model, cfg: &QuadratureConfig) -> Result<f64> {
    model.check()?;
    let d = f64::from(model.dim());
    let profile = RadialProfile::from_model(model);
    let volume = radial_volume_integral(&profile, model.dim(), 0.0, cfg)?;
    Ok(2.0 * PI * (model.density(0.0) / volume).powf(1.0 / d))
}

/// Closed-form Bessel-Lommel integral range.
pub fn bl_integral_range(p: &BlParams) -> Result<f64> {
    p.check()?;
    let d = f64::from(p.d);
    let poly = bl_band_poly(d, p.eta1, p.uc(), 0.0);
    Ok(PI.sqrt() * 2f64.powf(1.0 - 1.0 / d) / p.kc * gamma(0.5 * d)?.powf(1.0 / d) * poly.powf(-1.0 / d))
}

/// Number of scan points used for the supremum and the unimodality check.
const SCAN_POINTS: usize = 10_000;

fn scan_grid(model: &Model) -> Vec<f64> {
    match model.cutoff() {
        Some(kc) => (0..=SCAN_POINTS).map(|i| kc * i as f64 / SCAN_POINTS as f64).collect(),
        None => {
            let stretch = model.eta1().max(1.0).sqrt();
            let (lo, hi) = (1e-4 / (stretch * model.xi()), 1e4 * stretch / model.xi());
            let ratio = (hi / lo).ln() / (SCAN_POINTS - 1) as f64;
            std::iter::once(0.0).chain((0..SCAN_POINTS).map(|i| lo * (ratio * i as f64).exp())).collect()
        }
    }
}

fn weighted(model: &Model, alpha: f64, k: f64) -> f64 {
    // 0^0 is 1 so that alpha = 0 reduces to the density itself
    k.powf(2.0 * alpha) * model.density(k)
}

/// Count of local maxima of `values`, endpoints included.
fn peak_count(values: &[f64]) -> usize {
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let signs: Vec<i8> = values
        .windows(2)
        .filter_map(|w| {
            let diff = w[1] - w[0];
            if diff.abs() <= 1e-13 * scale {
                None
            } else {
                Some(if diff > 0.0 { 1 } else { -1 })
            }
        })
        .collect();
    let Some((&first, &last)) = signs.first().zip(signs.last()) else { return 1 };
    let interior = signs.windows(2).filter(|w| w[0] > 0 && w[1] < 0).count();
    interior + usize::from(first < 0) + usize::from(last > 0)
}

/// Golden-section refinement of a maximum bracketed by `[a, b]`.
fn refine_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() <= 1e-13 * b.abs().max(1e-300) {
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    fc.max(fd)
}

/// `sup_k k^{2 alpha} C~(k)` by grid scan plus golden-section refinement.
fn weighted_sup(model: &Model, alpha: f64, grid: &[f64], values: &[f64]) -> f64 {
    let (imax, &vmax) = values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("scan grid is never empty");
    if imax == 0 || imax + 1 == grid.len() {
        return vmax;
    }
    refine_max(|k| weighted(model, alpha, k), grid[imax - 1], grid[imax + 1]).max(vmax)
}

/// Numeric correlation spectrum straight from its definition. The weighted
/// density must be unimodal; a scan that finds several maxima is a
/// precondition error.
pub fn corr_spectrum_numeric(q: &SpectrumQuery, cfg: &QuadratureConfig) -> Result<CorrSpectrum> {
    spectrum_numeric(&q.model, q.alpha, cfg, true)
}

/// As [`corr_spectrum_numeric`] but without the unimodality check, for
/// densities (such as Bessel-Lommel with `eta1 < 0`) whose supremum is still
/// well defined.
pub fn corr_spectrum_numeric_unchecked(model: &Model, alpha: f64, cfg: &QuadratureConfig) -> Result<CorrSpectrum> {
    spectrum_numeric(model, alpha, cfg, false)
}

fn spectrum_numeric(model: &Model, alpha: f64, cfg: &QuadratureConfig, check_modes: bool) -> Result<CorrSpectrum> {
    model.check()?;
    check_alpha(alpha)?;
    let grid = scan_grid(model);
    let values: Vec<f64> = grid.iter().map(|&k| weighted(model, alpha, k)).collect();
    if check_modes {
        let peaks = peak_count(&values);
        if peaks > 1 {
            return Err(Error::Precondition(format!(
                "weighted spectral density has {peaks} local maxima, not unimodal"
            )));
        }
    }
    let profile = RadialProfile::from_model(model);
    let volume = match radial_volume_integral(&profile, model.dim(), 2.0 * alpha, cfg) {
        Ok(v) => v,
        Err(Error::Divergence(_)) => return Ok(CorrSpectrum::divergent()),
        Err(e) => return Err(e),
    };
    let sup = weighted_sup(model, alpha, &grid, &values);
    Ok(CorrSpectrum::finite((sup / volume).powf(1.0 / f64::from(model.dim()))))
}

/// `(kappa~ xi)^2`, the stationary point of `u^{2 alpha} / Pi(u)` in `t = u^2`.
pub(crate) fn ssrf_peak_t(alpha: f64, eta1: f64) -> f64 {
    let b = eta1 * (1.0 - alpha);
    let root = (b * b + 4.0 * alpha * (2.0 - alpha)).sqrt();
    // The two forms are equal; pick the one free of cancellation.
    if b > 0.0 {
        2.0 * alpha / (root + b)
    } else {
        (root - b) / (2.0 * (2.0 - alpha))
    }
}

/// `S_d int_0^inf u^{d-1+2 alpha} / Pi(u) du` for `beta = alpha + d/2 - 1 < 1`.
///
/// With `t = u^2` and the roots of `t^2 + eta1 t + 1` written as `e^{+-s}`,
/// the integral is `(S_d/2) pi sinh(beta s) / (sinh(s) sin(pi beta))`; for
/// `|eta1| < 2`, `s = i theta` and the hyperbolic functions turn circular.
pub(crate) fn ssrf_b(alpha: f64, eta1: f64, d: u32) -> f64 {
    let beta = alpha + 0.5 * f64::from(d) - 1.0;
    let half_sd = 0.5 * unit_sphere_surface(d);
    let (ratio, limit0) = if eta1 >= 2.0 {
        let s = (0.5 * eta1).acosh();
        if s == 0.0 {
            (beta, 1.0)
        } else {
            ((beta * s).sinh() / s.sinh(), s / s.sinh())
        }
    } else {
        let theta = (0.5 * eta1).acos();
        ((beta * theta).sin() / theta.sin(), theta / theta.sin())
    };
    if beta.abs() < 1e-8 {
        return half_sd * limit0;
    }
    half_sd * PI * ratio / (PI * beta).sin()
}

/// Closed-form SSRF correlation spectrum, `kc = inf`, `d` in `{1, 2, 3}`.
pub fn ssrf_corr_spectrum(alpha: f64, p: &SsrfParams) -> Result<CorrSpectrum> {
    p.check()?;
    check_alpha(alpha)?;
    if !(1..=3).contains(&p.d) {
        return Err(Error::Dimension { d: p.d, reason: "SSRF correlation spectrum needs 1 <= d <= 3" });
    }
    if p.kc.is_finite() {
        return Err(Error::Cutoff("SSRF correlation spectrum closed form requires kc = inf"));
    }
    let beta = alpha + 0.5 * f64::from(p.d) - 1.0;
    if beta >= 1.0 {
        return Ok(CorrSpectrum::divergent());
    }
    let t = ssrf_peak_t(alpha, p.eta1);
    let pi_val = 1.0 + t * (p.eta1 + t);
    let b = ssrf_b(alpha, p.eta1, p.d);
    let inner = t.powf(alpha) / (b * pi_val);
    Ok(CorrSpectrum::finite(p.xi * inner.powf(1.0 / f64::from(p.d))))
}

/// Auxiliary quantities of the Bessel-Lommel correlation spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlSpectrumAux {
    /// Rigidity below which `k^{2 alpha} Pi(k xi)` has an interior maximum.
    pub eta1_c: f64,
    /// Interior local maximum of `k^{2 alpha} Pi(k xi)`, when one exists.
    pub kappa_minus: Option<f64>,
    /// Interior local minimum, when one exists.
    pub kappa_plus: Option<f64>,
    /// Location of the supremum over `[0, kc]`.
    pub kappa_star: f64,
    pub g_d: f64,
}

pub fn bl_spectrum_aux(alpha: f64, p: &BlParams) -> Result<BlSpectrumAux> {
    p.check()?;
    check_alpha(alpha)?;
    let d = f64::from(p.d);
    let a1 = alpha + 1.0;
    let eta1_c = -2.0 * (alpha * (alpha + 2.0)).sqrt() / a1;
    let poly = bl_band_poly(d, p.eta1, p.uc(), 2.0 * alpha);
    let g_d = (gamma(0.5 * d)? / (2.0 * PI.powf(0.5 * d) * poly)).powf(1.0 / d);
    let phi = |k: f64| k.powf(2.0 * alpha) * char_poly(k * p.xi, p.eta1);
    let disc = a1 * a1 * p.eta1 * p.eta1 - 4.0 * alpha * (alpha + 2.0);
    let (kappa_minus, kappa_plus) = if p.eta1 < eta1_c && disc >= 0.0 {
        let b = -a1 * p.eta1;
        let t_plus = (b + disc.sqrt()) / (2.0 * (alpha + 2.0));
        let t_minus = alpha / ((alpha + 2.0) * t_plus);
        (Some(t_minus.sqrt() / p.xi), Some(t_plus.sqrt() / p.xi))
    } else {
        (None, None)
    };
    let kappa_star = match (kappa_minus, kappa_plus) {
        (Some(km), Some(kp)) if p.kc > km => {
            if p.kc <= kp || phi(km) > phi(p.kc) {
                km
            } else {
                p.kc
            }
        }
        _ => p.kc,
    };
    Ok(BlSpectrumAux { eta1_c, kappa_minus, kappa_plus, kappa_star, g_d })
}

/// Closed-form Bessel-Lommel correlation spectrum.
pub fn bl_corr_spectrum(alpha: f64, p: &BlParams) -> Result<f64> {
    let aux = bl_spectrum_aux(alpha, p)?;
    let d = f64::from(p.d);
    let ks = aux.kappa_star;
    let ratio = (ks / p.kc).powf(2.0 * alpha / d);
    Ok(aux.g_d * ratio * char_poly(ks * p.xi, p.eta1).powf(1.0 / d) / p.kc)
}

/// Radial spectral moment `int_0^{kc_eff} k^{2n+d-1} C~(k) dk` for an even `order = 2n`.
pub fn spectral_moment(model: &Model, order: u32, kc_eff: f64, cfg: &QuadratureConfig) -> Result<f64> {
    model.check()?;
    if !order.is_multiple_of(2) {
        return Err(Error::Precondition(format!("moment order must be even, got {order}")));
    }
    if !(kc_eff > 0.0) || !kc_eff.is_finite() {
        return Err(Error::Domain(format!("effective cutoff must be finite and > 0, got {kc_eff}")));
    }
    let m = *model;
    let upper = m.cutoff().map_or(kc_eff, |kc| kc.min(kc_eff));
    let stretch = m.eta1().max(1.0).sqrt();
    let profile = RadialProfile::with_scales(move |k| m.density(k), Some(upper), 1.0 / (stretch * m.xi()), stretch / m.xi());
    radial_moment(&profile, f64::from(order + m.dim() - 1), cfg)
}
