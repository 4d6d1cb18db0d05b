//! Parameter vectors, spectral densities and the root structure of the
//! characteristic polynomial `Pi(u) = 1 + eta1 u^2 + u^4`.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::specfun::ComplexValue;

/// Half-width of the band around `eta1 = 2` treated as the critical (double root) case.
pub const DEFAULT_TOL_CRITICAL: f64 = 1e-6;

/// Spartan spatial random field parameters `(eta0, eta1, xi, kc)` in `d` dimensions.
///
/// `kc` may be `f64::INFINITY`, which is only integrable for `d < 4`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SsrfParams {
    pub eta0: f64,
    pub eta1: f64,
    pub xi: f64,
    pub kc: f64,
    pub d: u32,
}

impl SsrfParams {
    pub fn new(eta0: f64, eta1: f64, xi: f64, kc: f64, d: u32) -> Result<Self> {
        let p = SsrfParams { eta0, eta1, xi, kc, d };
        p.check()?;
        Ok(p)
    }

    /// Two-dimensional model with infinite cutoff.
    pub fn planar(eta0: f64, eta1: f64, xi: f64) -> Result<Self> {
        Self::new(eta0, eta1, xi, f64::INFINITY, 2)
    }

    pub fn check(&self) -> Result<()> {
        check_common(self.eta0, self.eta1, self.xi)?;
        if !(self.kc > 0.0) {
            return Err(Error::Permissibility(format!("kc must be > 0, got {}", self.kc)));
        }
        if self.d == 0 {
            return Err(Error::Dimension { d: 0, reason: "dimension must be >= 1" });
        }
        if self.kc.is_infinite() && self.d >= 4 {
            return Err(Error::Permissibility(format!(
                "infinite cutoff is not integrable for d={}",
                self.d
            )));
        }
        Ok(())
    }
}

/// Bessel-Lommel parameters: spectral density reciprocal to the SSRF one, band-limited at finite `kc`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlParams {
    pub eta0: f64,
    pub eta1: f64,
    pub xi: f64,
    pub kc: f64,
    pub d: u32,
}

impl BlParams {
    pub fn new(eta0: f64, eta1: f64, xi: f64, kc: f64, d: u32) -> Result<Self> {
        let p = BlParams { eta0, eta1, xi, kc, d };
        p.check()?;
        Ok(p)
    }

    pub fn check(&self) -> Result<()> {
        check_common(self.eta0, self.eta1, self.xi)?;
        if !(self.kc > 0.0) || !self.kc.is_finite() {
            return Err(Error::Cutoff("Bessel-Lommel requires a finite positive kc"));
        }
        if self.d < 2 {
            return Err(Error::Dimension { d: self.d, reason: "Bessel-Lommel needs d >= 2" });
        }
        Ok(())
    }

    /// Dimensionless cutoff `u_c = kc xi`.
    pub fn uc(&self) -> f64 {
        self.kc * self.xi
    }
}

fn check_common(eta0: f64, eta1: f64, xi: f64) -> Result<()> {
    if !(eta0 > 0.0) || !eta0.is_finite() {
        return Err(Error::Permissibility(format!("eta0 must be finite and > 0, got {eta0}")));
    }
    if !(xi > 0.0) || !xi.is_finite() {
        return Err(Error::Permissibility(format!("xi must be finite and > 0, got {xi}")));
    }
    if !(eta1 > -2.0) || !eta1.is_finite() {
        return Err(Error::Permissibility(format!("eta1 must be > -2, got {eta1}")));
    }
    Ok(())
}

/// `Pi(u) = 1 + eta1 u^2 + u^4`.
pub fn char_poly(u: f64, eta1: f64) -> f64 {
    let u2 = u * u;
    1.0 + u2 * (eta1 + u2)
}

fn check_wavenumber(k: f64) -> Result<()> {
    if !(k >= 0.0) {
        return Err(Error::Domain(format!("wavenumber must be >= 0, got {k}")));
    }
    Ok(())
}

/// `eta0 xi^d / Pi(k xi)` for `k <= kc`, zero above the cutoff.
pub fn ssrf_spectral_density(k: f64, p: &SsrfParams) -> Result<f64> {
    p.check()?;
    check_wavenumber(k)?;
    Ok(ssrf_density_unchecked(k, p))
}

pub(crate) fn ssrf_density_unchecked(k: f64, p: &SsrfParams) -> f64 {
    if k > p.kc {
        return 0.0;
    }
    p.eta0 * p.xi.powi(p.d as i32) / char_poly(k * p.xi, p.eta1)
}

/// `Pi(k xi) / (eta0 xi^d)` for `k <= kc`, zero above the cutoff.
pub fn bl_spectral_density(k: f64, p: &BlParams) -> Result<f64> {
    p.check()?;
    check_wavenumber(k)?;
    Ok(bl_density_unchecked(k, p))
}

pub(crate) fn bl_density_unchecked(k: f64, p: &BlParams) -> f64 {
    if k > p.kc {
        return 0.0;
    }
    char_poly(k * p.xi, p.eta1) / (p.eta0 * p.xi.powi(p.d as i32))
}

/// Root structure of `Pi` as a quadratic in `u^2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Regime {
    /// `eta1 > 2`: two distinct real roots.
    Rigid,
    /// `eta1 = 2` within tolerance: double root.
    Critical,
    /// `|eta1| < 2`: complex conjugate roots.
    Oscillatory,
}

/// `z_{+-}` with `z_{+-}^2 = (eta1 -+ Delta)/2`, `Delta = sqrt(eta1^2 - 4)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootPair {
    pub z_plus: ComplexValue,
    pub z_minus: ComplexValue,
    pub delta: ComplexValue,
    pub regime: Regime,
}

/// Roots of the characteristic polynomial; `Pi(u) = (u^2 + z_+^2)(u^2 + z_-^2)`.
pub fn ssrf_roots(eta1: f64, tol_critical: f64) -> Result<RootPair> {
    if !(eta1 > -2.0) || !eta1.is_finite() {
        return Err(Error::Permissibility(format!("eta1 must be > -2, got {eta1}")));
    }
    let regime = if (eta1 - 2.0).abs() <= tol_critical {
        Regime::Critical
    } else if eta1 > 2.0 {
        Regime::Rigid
    } else {
        Regime::Oscillatory
    };
    let pair = if eta1 >= 2.0 {
        let delta = (eta1 * eta1 - 4.0).sqrt();
        // (eta1 - Delta)/2 = 2/(eta1 + Delta) avoids cancellation for large eta1
        let small = 2.0 / (eta1 + delta);
        let large = 0.5 * (eta1 + delta);
        RootPair {
            z_plus: ComplexValue::new(small.sqrt(), 0.0),
            z_minus: ComplexValue::new(large.sqrt(), 0.0),
            delta: ComplexValue::new(delta, 0.0),
            regime,
        }
    } else {
        let delta = ComplexValue::new(0.0, (4.0 - eta1 * eta1).sqrt());
        let zp2 = (ComplexValue::new(eta1, 0.0) - delta) * 0.5;
        let z_plus = zp2.sqrt();
        RootPair { z_plus, z_minus: z_plus.conj(), delta, regime }
    };
    Ok(pair)
}

/// Either covariance family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Model {
    Ssrf(SsrfParams),
    BesselLommel(BlParams),
}

impl Model {
    pub fn check(&self) -> Result<()> {
        match self {
            Model::Ssrf(p) => p.check(),
            Model::BesselLommel(p) => p.check(),
        }
    }

    pub fn family(&self) -> Family {
        match self {
            Model::Ssrf(_) => Family::Ssrf,
            Model::BesselLommel(_) => Family::BesselLommel,
        }
    }

    pub fn eta0(&self) -> f64 {
        match self {
            Model::Ssrf(p) => p.eta0,
            Model::BesselLommel(p) => p.eta0,
        }
    }

    pub fn eta1(&self) -> f64 {
        match self {
            Model::Ssrf(p) => p.eta1,
            Model::BesselLommel(p) => p.eta1,
        }
    }

    /// Spectral density at wavenumber `k >= 0`, without validation.
    pub fn density(&self, k: f64) -> f64 {
        match self {
            Model::Ssrf(p) => ssrf_density_unchecked(k, p),
            Model::BesselLommel(p) => bl_density_unchecked(k, p),
        }
    }

    /// Finite cutoff, or `None` for an infinite band.
    pub fn cutoff(&self) -> Option<f64> {
        let kc = match self {
            Model::Ssrf(p) => p.kc,
            Model::BesselLommel(p) => p.kc,
        };
        kc.is_finite().then_some(kc)
    }

    pub fn xi(&self) -> f64 {
        match self {
            Model::Ssrf(p) => p.xi,
            Model::BesselLommel(p) => p.xi,
        }
    }

    pub fn dim(&self) -> u32 {
        match self {
            Model::Ssrf(p) => p.d,
            Model::BesselLommel(p) => p.d,
        }
    }

    /// Copy with the amplitude coefficient replaced.
    pub fn with_eta0(&self, eta0: f64) -> Model {
        match *self {
            Model::Ssrf(p) => Model::Ssrf(SsrfParams { eta0, ..p }),
            Model::BesselLommel(p) => Model::BesselLommel(BlParams { eta0, ..p }),
        }
    }

    pub fn to_doc(&self) -> ParamDoc {
        let (family, eta0, eta1, xi, kc, d) = match *self {
            Model::Ssrf(p) => (Family::Ssrf, p.eta0, p.eta1, p.xi, p.kc, p.d),
            Model::BesselLommel(p) => (Family::BesselLommel, p.eta0, p.eta1, p.xi, p.kc, p.d),
        };
        ParamDoc { family, eta0, eta1, xi, kc, d }
    }
}

impl From<SsrfParams> for Model {
    fn from(p: SsrfParams) -> Self {
        Model::Ssrf(p)
    }
}

impl From<BlParams> for Model {
    fn from(p: BlParams) -> Self {
        Model::BesselLommel(p)
    }
}

/// Covariance family tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    #[serde(rename = "ssrf")]
    Ssrf,
    #[serde(rename = "bessel-lommel", alias = "bl")]
    BesselLommel,
}

impl Family {
    /// Tag stored in binary field headers.
    pub fn tag(self) -> u16 {
        match self {
            Family::Ssrf => 0,
            Family::BesselLommel => 1,
        }
    }

    pub fn from_tag(tag: u16) -> Option<Family> {
        match tag {
            0 => Some(Family::Ssrf),
            1 => Some(Family::BesselLommel),
            _ => None,
        }
    }
}

/// Flat key-value parameter document:
/// `{"family": "ssrf"|"bessel-lommel", "eta0", "eta1", "xi", "kc", "d"}` with `"kc": "inf"` allowed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamDoc {
    pub family: Family,
    pub eta0: f64,
    pub eta1: f64,
    pub xi: f64,
    #[serde(serialize_with = "ser_cutoff", deserialize_with = "de_cutoff")]
    pub kc: f64,
    pub d: u32,
}

impl ParamDoc {
    /// Validated model. `kc = inf` is accepted only for the SSRF family.
    pub fn to_model(&self) -> Result<Model> {
        match self.family {
            Family::Ssrf => Ok(Model::Ssrf(SsrfParams::new(self.eta0, self.eta1, self.xi, self.kc, self.d)?)),
            Family::BesselLommel => Ok(Model::BesselLommel(BlParams::new(
                self.eta0, self.eta1, self.xi, self.kc, self.d,
            )?)),
        }
    }

    pub fn from_json(s: &str) -> Result<ParamDoc> {
        serde_json::from_str(s).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("parameter document serializes")
    }
}

/// Parse a decimal number, accepting `inf`/`infinity` (any case, optional sign).
pub fn parse_real(s: &str) -> Result<f64> {
    let t = s.trim();
    match t.to_ascii_lowercase().as_str() {
        "inf" | "+inf" | "infinity" | "+infinity" => Ok(f64::INFINITY),
        "-inf" | "-infinity" => Ok(f64::NEG_INFINITY),
        _ => t
            .parse::<f64>()
            .ok()
            .filter(|v| !v.is_nan())
            .ok_or_else(|| Error::Format(format!("not a number: {s:?}"))),
    }
}

fn ser_cutoff<S: Serializer>(kc: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if kc.is_infinite() {
        s.serialize_str("inf")
    } else {
        s.serialize_f64(*kc)
    }
}

fn de_cutoff<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Num(f64),
        Text(String),
    }
    match Raw::deserialize(d)? {
        Raw::Num(v) => Ok(v),
        Raw::Text(t) => parse_real(&t).map_err(serde::de::Error::custom),
    }
}
