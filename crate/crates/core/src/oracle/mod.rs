//! Independent numerical evaluation of the spectral integrals.
//!
//! Everything here works from a radial spectral profile alone and never calls
//! the closed-form covariances, so it can serve as ground truth for them.

mod quad;
mod zeros;

pub(crate) use quad::{adaptive, tanh_sinh};
pub(crate) use zeros::BesselZeros;

use crate::error::{Error, Result};
use crate::models::Model;
use crate::specfun::{bessel_j, gamma, unit_sphere_surface};
use quad::Wynn;

/// How integrals over an unbounded wavenumber range are closed off.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailStrategy {
    /// Panels between consecutive zeros of the Bessel kernel, summed with
    /// Wynn epsilon acceleration.
    ZeroPartition,
    /// Integrate up to `k_max` and drop the rest.
    HardTruncation { k_max: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    pub tail: TailStrategy,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            abs_tol: 1e-10,
            rel_tol: 1e-9,
            max_subdivisions: 4000,
            tail: TailStrategy::ZeroPartition,
        }
    }
}

impl QuadratureConfig {
    /// Tight tolerances for reference values.
    pub fn strict() -> Self {
        QuadratureConfig { abs_tol: 1e-13, rel_tol: 1e-12, max_subdivisions: 20_000, ..Default::default() }
    }

    pub fn check(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) || !(self.rel_tol > 0.0) {
            return Err(Error::Precondition("quadrature tolerances must be > 0".into()));
        }
        if let TailStrategy::HardTruncation { k_max } = self.tail {
            if !(k_max > 0.0) || !k_max.is_finite() {
                return Err(Error::Precondition(format!("truncation wavenumber must be finite and > 0, got {k_max}")));
            }
        }
        Ok(())
    }

    fn tol(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }
}

type DensityFn<'a> = dyn Fn(f64) -> f64 + Send + Sync + 'a;

/// A radial spectral density with the wavenumber scales that matter for
/// placing quadrature breakpoints.
pub struct RadialProfile<'a> {
    density: Box<DensityFn<'a>>,
    cutoff: Option<f64>,
    scale_lo: f64,
    scale_hi: f64,
}

impl<'a> RadialProfile<'a> {
    /// `scale` is a wavenumber where the density has structure (e.g. `1/xi`).
    pub fn new<F>(density: F, cutoff: Option<f64>, scale: f64) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'a,
    {
        Self::with_scales(density, cutoff, scale, scale)
    }

    /// Density with structure spread over the band `[scale_lo, scale_hi]`.
    pub fn with_scales<F>(density: F, cutoff: Option<f64>, scale_lo: f64, scale_hi: f64) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'a,
    {
        RadialProfile { density: Box::new(density), cutoff, scale_lo, scale_hi: scale_hi.max(scale_lo) }
    }

    /// The model's own spectral density.
    pub fn from_model(model: &Model) -> RadialProfile<'static> {
        let m = *model;
        let xi = m.xi();
        // The SSRF density bends at 1/(sqrt(eta1) xi) and sqrt(eta1)/xi when eta1 is large.
        let stretch = m.eta1().max(1.0).sqrt();
        RadialProfile::with_scales(move |k| m.density(k), m.cutoff(), 1.0 / (stretch * xi), stretch / xi)
    }

    pub fn eval(&self, k: f64) -> f64 {
        if let Some(kc) = self.cutoff {
            if k > kc {
                return 0.0;
            }
        }
        (self.density)(k)
    }

    pub fn cutoff(&self) -> Option<f64> {
        self.cutoff
    }

    /// Log-spaced breakpoints covering the structured band, clipped to `(lo, hi)`.
    fn breakpoints(&self, lo: f64, hi: f64) -> Vec<f64> {
        let mut pts = vec![lo];
        let mut k = self.scale_lo * 1e-2;
        while k < self.scale_hi * 1e2 {
            if k > lo && k < hi {
                pts.push(k);
            }
            k *= 10f64.sqrt();
        }
        pts.push(hi);
        pts
    }
}

/// `J_nu(x) / x^nu`, finite at the origin.
fn scaled_j(nu: f64, x: f64, norm0: f64) -> f64 {
    if x < 1e-3 {
        let q = 0.25 * x * x;
        return norm0 * (1.0 - q / (nu + 1.0) + q * q / (2.0 * (nu + 1.0) * (nu + 2.0)));
    }
    bessel_j(nu, x).unwrap_or(f64::NAN) / x.powf(nu)
}

/// Upper end of the integration range, or `None` when it is unbounded.
fn finite_upper(profile: &RadialProfile, cfg: &QuadratureConfig) -> Option<f64> {
    match (profile.cutoff, cfg.tail) {
        (Some(kc), TailStrategy::HardTruncation { k_max }) => Some(kc.min(k_max)),
        (Some(kc), _) => Some(kc),
        (None, TailStrategy::HardTruncation { k_max }) => Some(k_max),
        (None, TailStrategy::ZeroPartition) => None,
    }
}

/// `int_0^kc k^power profile(k) dk`, with an unbounded range mapped onto a
/// finite one. Fails with a divergence error when the integrand decays no
/// faster than `1/k`.
pub(crate) fn radial_moment(profile: &RadialProfile, power: f64, cfg: &QuadratureConfig) -> Result<f64> {
    cfg.check()?;
    let g = |k: f64| {
        let f = profile.eval(k);
        if f == 0.0 || power == 0.0 { f } else { k.powf(power) * f }
    };
    let upper = finite_upper(profile, cfg);
    let tol = cfg.abs_tol / 3.0;
    let far = profile.scale_hi * 1e3;
    let inner_end = upper.map_or(far, |u| u.min(far));
    let b0 = inner_end.min(profile.scale_lo);
    let mut total = tanh_sinh(&g, 0.0, b0, tol, cfg.rel_tol)?;
    let pts = profile.breakpoints(b0, inner_end);
    total += adaptive(&g, &pts, tol, cfg.rel_tol, cfg.max_subdivisions)?;
    match upper {
        Some(u) if u > inner_end => {
            let pts = profile.breakpoints(inner_end, u);
            total += adaptive(&g, &pts, tol, cfg.rel_tol, cfg.max_subdivisions)?;
        }
        Some(_) => {}
        None => {
            let (k1, k2) = (profile.scale_hi * 1e6, profile.scale_hi * 1e7);
            let (g1, g2) = (g(k1), g(k2));
            if g1 != 0.0 || g2 != 0.0 {
                let slope = (g2.abs() / g1.abs()).ln() / 10f64.ln();
                if !(slope < -1.0 - 1e-6) {
                    return Err(Error::Divergence(format!(
                        "radial integrand decays like k^{slope:.3}, not integrable"
                    )));
                }
            }
            let mapped = |w: f64| {
                let k = 1.0 / w;
                // Far enough out the density underflows before k^2 overflows.
                let v = g(k);
                if v == 0.0 || !k.is_finite() { 0.0 } else { v * k * k }
            };
            total += tanh_sinh(&mapped, 0.0, 1.0 / inner_end, tol, cfg.rel_tol)?;
        }
    }
    Ok(total)
}

/// `S_d int_0^kc k^{d-1+2 alpha} profile(k) dk`, the `d`-volume integral of
/// a radial function weighted by `|k|^{2 alpha}`.
pub fn radial_volume_integral(
    profile: &RadialProfile,
    d: u32,
    two_alpha: f64,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    if d == 0 {
        return Err(Error::Dimension { d, reason: "dimension must be >= 1" });
    }
    if !(two_alpha >= 0.0) {
        return Err(Error::Precondition(format!("weight exponent must be >= 0, got {two_alpha}")));
    }
    Ok(unit_sphere_surface(d) * radial_moment(profile, f64::from(d) - 1.0 + two_alpha, cfg)?)
}

/// Inverse radial Fourier transform
/// `C(r) = (2 pi)^{-d/2} r^{-nu} int_0^kc k^{d/2} J_nu(k r) profile(k) dk`, `nu = d/2 - 1`.
///
/// At `r = 0` this reduces to `S_d / (2 pi)^d` times the plain radial integral.
pub fn hankel_inverse(profile: &RadialProfile, d: u32, r: f64, cfg: &QuadratureConfig) -> Result<f64> {
    cfg.check()?;
    if d == 0 {
        return Err(Error::Dimension { d, reason: "dimension must be >= 1" });
    }
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::Domain(format!("lag must be finite and >= 0, got {r}")));
    }
    let df = f64::from(d);
    let nu = 0.5 * df - 1.0;
    let norm0 = 1.0 / (2f64.powf(nu) * gamma(nu + 1.0)?);
    let pref = (2.0 * std::f64::consts::PI).powf(-0.5 * df);
    if r == 0.0 {
        return Ok(pref * norm0 * radial_moment(profile, df - 1.0, cfg)?);
    }
    // r^{-nu} k^{d/2} J_nu(kr) = k^{d-1} J_nu(kr) / (kr)^nu
    let g = |k: f64| {
        let w = if d == 1 { 1.0 } else { k.powf(df - 1.0) };
        w * profile.eval(k) * scaled_j(nu, k * r, norm0)
    };
    let zeros = BesselZeros::new(nu).map(|z| z / r);
    let value = match finite_upper(profile, cfg) {
        Some(upper) => {
            let mut pts = merge(profile.breakpoints(0.0, upper), zeros.take_while(|&z| z < upper));
            pts.dedup();
            adaptive(&g, &pts, cfg.abs_tol, cfg.rel_tol, cfg.max_subdivisions.max(pts.len()))?
        }
        None => hankel_tail(&g, profile, zeros, cfg)?,
    };
    Ok(pref * value)
}

fn hankel_tail<G, Z>(g: &G, profile: &RadialProfile, mut zeros: Z, cfg: &QuadratureConfig) -> Result<f64>
where
    G: Fn(f64) -> f64,
    Z: Iterator<Item = f64>,
{
    const MAX_PANELS: usize = 400;
    let head_end_min = 20.0 * profile.scale_hi;
    let mut head_zeros = Vec::new();
    let mut edge = 0.0;
    for z in zeros.by_ref() {
        head_zeros.push(z);
        edge = z;
        if z >= head_end_min {
            break;
        }
    }
    let pts = merge(profile.breakpoints(0.0, edge), head_zeros.into_iter());
    let head = adaptive(g, &pts, cfg.abs_tol * 0.1, cfg.rel_tol, cfg.max_subdivisions.max(pts.len()))?;
    let mut wynn = Wynn::default();
    let mut partial = head;
    let mut history = [wynn.push(partial), f64::NAN];
    let mut agreed = 0;
    for (n, z) in zeros.take(MAX_PANELS).enumerate() {
        partial += adaptive(g, &[edge, z], cfg.abs_tol * 0.01, cfg.rel_tol, cfg.max_subdivisions)?;
        edge = z;
        let est = wynn.push(partial);
        let change = (est - history[0]).abs();
        history = [est, history[0]];
        if n >= 3 && change <= 0.1 * cfg.tol(est) {
            agreed += 1;
            if agreed >= 2 {
                return Ok(est);
            }
        } else {
            agreed = 0;
        }
    }
    Err(Error::NonConvergence(format!(
        "oscillatory tail not settled after {MAX_PANELS} panels (last estimates {:.12e}, {:.12e})",
        history[0], history[1]
    )))
}

/// Sorted union of two ascending sequences.
fn merge(a: Vec<f64>, b: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut out: Vec<f64> = a.into_iter().chain(b).collect();
    out.sort_by(f64::total_cmp);
    out.dedup();
    out
}

/// `A_{mu,nu}(z) = int_0^1 x^mu J_nu(z x) dx`, requiring `mu > -(nu + 1)`.
pub fn a_mu_nu(mu: f64, nu: f64, z: f64, cfg: &QuadratureConfig) -> Result<f64> {
    cfg.check()?;
    if !(nu >= -1.0) {
        return Err(Error::Domain(format!("order {nu} below -1")));
    }
    if !(mu > -(nu + 1.0)) {
        return Err(Error::Precondition(format!("A_{{mu,nu}} needs mu > -(nu+1), got mu={mu}, nu={nu}")));
    }
    if !(z > 0.0) || !z.is_finite() {
        return Err(Error::Domain(format!("A_{{mu,nu}} needs finite z > 0, got {z}")));
    }
    let f = |x: f64| x.powf(mu) * bessel_j(nu, z * x).unwrap_or(f64::NAN);
    let zeros: Vec<f64> = BesselZeros::new(nu.max(-0.5)).map(|j| j / z).take_while(|&x| x < 1.0).collect();
    let first = zeros.first().copied().unwrap_or(1.0);
    let mut total = tanh_sinh(&f, 0.0, first, cfg.abs_tol * 0.5, cfg.rel_tol)?;
    if first < 1.0 {
        let mut pts = zeros;
        pts.push(1.0);
        total += adaptive(&f, &pts, cfg.abs_tol * 0.5, cfg.rel_tol, cfg.max_subdivisions.max(pts.len()))?;
    }
    if !total.is_finite() {
        return Err(Error::NonConvergence(format!("A_{{{mu},{nu}}}({z}) is not finite")));
    }
    Ok(total)
}
