//! FFT spectral simulation of planar Gaussian fields, empirical second-order
//! statistics and a non-ergodicity probe.
//!
//! A realization on an `L x L` grid of spacing `delta` is
//! `f(x) = sum_k A_k exp(i k.x)` over the lattice wavevectors
//! `k = 2 pi (i, j) / (L delta)`. The amplitudes are Hermitian, `A_{-k} = conj(A_k)`,
//! complex Gaussian with `E|A_k|^2 = C~(|k|) / (L delta)^2`, which is the midpoint
//! Riemann sum of the spectral integral. The `k = 0` amplitude is zero so
//! every realization has zero spatial mean.
//!
//! Each Hermitian pair draws its normals from its own ChaCha8 stream, numbered
//! by the smaller row-major index of the pair, so a parameter change under the
//! same seed only rescales amplitudes.

use std::f64::consts::PI;
use std::io::{BufWriter, Read, Write};
use std::time::{SystemTime, UNIX_EPOCH};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use rustfft::{FftDirection, FftPlanner};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::models::{BlParams, Family, Model, SsrfParams};
use crate::oracle::QuadratureConfig;
use crate::scales::integral_range_numeric;
use crate::table::RadialTable;

/// Largest supported grid side.
pub const MAX_GRID: usize = 1 << 14;

/// Leading bytes of the binary field format.
pub const FIELD_MAGIC: [u8; 4] = *b"SRFG";
pub const FIELD_VERSION: u16 = 1;
pub const FIELD_HEADER_LEN: usize = 64;

/// Grid enlargement used by the non-ergodicity probe before cropping.
pub const PROBE_EMBEDDING: usize = 4;

const SLOPE_BINS: usize = 20;

/// How realization seeds are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeedSpec {
    Fixed(u64),
    /// Seed from the system clock; the realized value is logged.
    Clock,
}

impl SeedSpec {
    pub fn resolve(self) -> u64 {
        match self {
            SeedSpec::Fixed(s) => s,
            SeedSpec::Clock => {
                let nanos = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_nanos());
                let seed = nanos as u64;
                log::info!("clock-derived seed {seed}");
                seed
            }
        }
    }
}

/// Seed of realization `i` in an ensemble started from `base`.
pub fn realization_seed(base: u64, i: usize) -> u64 {
    base.wrapping_add(i as u64)
}

/// One simulated field, row-major `values[row * grid_size + col]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldRealization {
    pub grid_size: usize,
    pub spacing: f64,
    pub values: Vec<f64>,
    pub seed: u64,
    pub model: Model,
}

fn check_grid(model: &Model, n: usize, spacing: f64) -> Result<()> {
    model.check()?;
    if model.dim() != 2 {
        return Err(Error::Dimension { d: model.dim(), reason: "simulation grids are two-dimensional" });
    }
    if n < 2 || !n.is_power_of_two() || n > MAX_GRID {
        return Err(Error::Size(format!("grid side must be a power of two in [2, {MAX_GRID}], got {n}")));
    }
    if !(spacing > 0.0) || !spacing.is_finite() {
        return Err(Error::Domain(format!("grid spacing must be finite and > 0, got {spacing}")));
    }
    Ok(())
}

fn signed(i: usize, n: usize) -> f64 {
    if i <= n / 2 {
        i as f64
    } else {
        i as f64 - n as f64
    }
}

/// Wavenumber magnitude of lattice mode `(i, j)`.
fn mode_k(i: usize, j: usize, n: usize, spacing: f64) -> f64 {
    2.0 * PI / (n as f64 * spacing) * signed(i, n).hypot(signed(j, n))
}

fn mode_amplitude(model: &Model, n: usize, spacing: f64, seed: u64, i: usize, j: usize) -> Complex64 {
    let var = model.density(mode_k(i, j, n, spacing)) / (n as f64 * spacing).powi(2);
    if (i == 0 && j == 0) || var == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let own = i * n + j;
    let partner = ((n - i) % n) * n + (n - j) % n;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(own.min(partner) as u64);
    let a: f64 = rng.sample(StandardNormal);
    if own == partner {
        return Complex64::new(var.sqrt() * a, 0.0);
    }
    let b: f64 = rng.sample(StandardNormal);
    let z = Complex64::new(a, b) * (0.5 * var).sqrt();
    if own < partner {
        z
    } else {
        z.conj()
    }
}

fn transpose(buf: &[Complex64], n: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); n * n];
    out.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
        for (j, v) in row.iter_mut().enumerate() {
            *v = buf[j * n + i];
        }
    });
    out
}

/// Unnormalized two-dimensional FFT of a square row-major array.
fn fft2(buf: &mut Vec<Complex64>, n: usize, direction: FftDirection) {
    let fft = FftPlanner::new().plan_fft(n, direction);
    let rows = |data: &mut [Complex64]| {
        data.par_chunks_mut(n).for_each_init(
            || vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()],
            |scratch, row| fft.process_with_scratch(row, scratch),
        );
    };
    rows(buf);
    let mut t = transpose(buf, n);
    rows(&mut t);
    *buf = transpose(&t, n);
}

/// Complex synthesis before the real part is taken.
pub(crate) fn synthesize(model: &Model, n: usize, spacing: f64, seed: u64) -> Vec<Complex64> {
    let mut spectrum = vec![Complex64::new(0.0, 0.0); n * n];
    spectrum.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
        for (j, v) in row.iter_mut().enumerate() {
            *v = mode_amplitude(model, n, spacing, seed, i, j);
        }
    });
    fft2(&mut spectrum, n, FftDirection::Inverse);
    spectrum
}

/// One Gaussian realization of `model` on an `n x n` grid.
pub fn simulate_field(model: &Model, n: usize, spacing: f64, seed: u64) -> Result<FieldRealization> {
    check_grid(model, n, spacing)?;
    let values: Vec<f64> = synthesize(model, n, spacing, seed).into_iter().map(|z| z.re).collect();
    if !values.iter().all(|v| v.is_finite()) {
        return Err(Error::Domain("synthesized field has non-finite values".into()));
    }
    Ok(FieldRealization { grid_size: n, spacing, values, seed, model: *model })
}

/// `count` realizations with seeds `base, base + 1, ...`, generated in parallel.
pub fn simulate_ensemble(model: &Model, n: usize, spacing: f64, base: u64, count: usize) -> Result<Vec<FieldRealization>> {
    check_grid(model, n, spacing)?;
    (0..count)
        .into_par_iter()
        .map(|i| simulate_field(model, n, spacing, realization_seed(base, i)))
        .collect()
}

impl FieldRealization {
    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Little-endian binary grid: 64-byte header then row-major `f64` values.
    pub fn write_binary<W: Write>(&self, w: W) -> Result<()> {
        let (eta0, eta1, xi, kc) = match self.model {
            Model::Ssrf(p) => (p.eta0, p.eta1, p.xi, p.kc),
            Model::BesselLommel(p) => (p.eta0, p.eta1, p.xi, p.kc),
        };
        let side = u32::try_from(self.grid_size).map_err(|_| Error::Size("grid too large for header".into()))?;
        let mut header = Vec::with_capacity(FIELD_HEADER_LEN);
        header.extend_from_slice(&FIELD_MAGIC);
        header.extend_from_slice(&FIELD_VERSION.to_le_bytes());
        header.extend_from_slice(&self.model.family().tag().to_le_bytes());
        header.extend_from_slice(&side.to_le_bytes());
        header.extend_from_slice(&0u32.to_le_bytes());
        header.extend_from_slice(&self.spacing.to_le_bytes());
        header.extend_from_slice(&self.seed.to_le_bytes());
        for v in [eta0, eta1, xi, kc] {
            header.extend_from_slice(&v.to_le_bytes());
        }
        debug_assert_eq!(header.len(), FIELD_HEADER_LEN);
        let mut w = BufWriter::new(w);
        w.write_all(&header)?;
        for v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut header = [0u8; FIELD_HEADER_LEN];
        r.read_exact(&mut header).map_err(|e| Error::Format(format!("truncated header: {e}")))?;
        if header[0..4] != FIELD_MAGIC {
            return Err(Error::Format("bad magic, not a field grid file".into()));
        }
        let u16_at = |o: usize| u16::from_le_bytes([header[o], header[o + 1]]);
        let u32_at = |o: usize| u32::from_le_bytes(header[o..o + 4].try_into().expect("4 bytes"));
        let u64_at = |o: usize| u64::from_le_bytes(header[o..o + 8].try_into().expect("8 bytes"));
        let f64_at = |o: usize| f64::from_bits(u64_at(o));
        let version = u16_at(4);
        if version != FIELD_VERSION {
            return Err(Error::Format(format!("unsupported field file version {version}")));
        }
        let family = Family::from_tag(u16_at(6)).ok_or_else(|| Error::Format(format!("unknown family tag {}", u16_at(6))))?;
        let n = u32_at(8) as usize;
        let spacing = f64_at(16);
        let seed = u64_at(24);
        let (eta0, eta1, xi, kc) = (f64_at(32), f64_at(40), f64_at(48), f64_at(56));
        let model = match family {
            Family::Ssrf => Model::Ssrf(SsrfParams::new(eta0, eta1, xi, kc, 2)?),
            Family::BesselLommel => Model::BesselLommel(BlParams::new(eta0, eta1, xi, kc, 2)?),
        };
        check_grid(&model, n, spacing)?;
        let mut payload = vec![0u8; n * n * 8];
        r.read_exact(&mut payload).map_err(|e| Error::Format(format!("truncated payload: {e}")))?;
        let values = payload
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect();
        Ok(FieldRealization { grid_size: n, spacing, values, seed, model })
    }

    /// One grid row per line, comma separated.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut w = BufWriter::new(w);
        for row in self.values.chunks(self.grid_size) {
            let line: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Ensemble statistics of a set of homogeneous realizations.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalStats {
    pub n_fields: usize,
    /// Ensemble and spatial average of `f^2`; the fields have zero mean by construction.
    pub variance_hat: f64,
    /// Radially binned circular autocovariance, unit-spacing lag bins.
    pub radial_cov_hat: RadialTable,
    /// Lags beyond a quarter of the domain are biased by periodicity and not reported.
    pub trusted_lag: f64,
    /// Radially binned ensemble periodogram, an estimate of `C~(k)`.
    pub periodogram: RadialTable,
    /// Log-log slope of the periodogram over `slope_band`.
    pub spd_slope_hat: f64,
    pub slope_band: (f64, f64),
}

fn check_homogeneous(fields: &[FieldRealization]) -> Result<&FieldRealization> {
    let first = fields.first().ok_or(Error::EmptyInput("no fields to estimate from"))?;
    if fields
        .iter()
        .any(|f| f.grid_size != first.grid_size || f.spacing != first.spacing || f.model != first.model)
    {
        return Err(Error::Precondition("fields differ in grid size, spacing or model".into()));
    }
    if first.values.len() != first.grid_size * first.grid_size {
        return Err(Error::Size("value count does not match the grid side".into()));
    }
    Ok(first)
}

fn mode_radii(n: usize, spacing: f64) -> impl Iterator<Item = (usize, f64)> {
    (0..n * n).filter(|&m| m != 0).map(move |m| (m, mode_k(m / n, m % n, n, spacing)))
}

fn periodogram_table(per_mode: &[f64], n: usize, spacing: f64) -> RadialTable {
    let dk = 2.0 * PI / (n as f64 * spacing);
    RadialTable::from_samples(mode_radii(n, spacing).map(|(m, k)| (k, per_mode[m])), dk, n)
}

/// The target density averaged over the same lattice bins as the periodogram.
pub fn binned_spectral_density(model: &Model, n: usize, spacing: f64) -> Result<RadialTable> {
    check_grid(model, n, spacing)?;
    let per_mode: Vec<f64> = (0..n * n).map(|m| model.density(mode_k(m / n, m % n, n, spacing))).collect();
    Ok(periodogram_table(&per_mode, n, spacing))
}

fn slope_fit(per_mode: &[f64], n: usize, spacing: f64, band: (f64, f64)) -> Result<f64> {
    let (lo, hi) = band;
    let mut sum_k = [0.0; SLOPE_BINS];
    let mut sum_p = [0.0; SLOPE_BINS];
    let mut count = [0usize; SLOPE_BINS];
    let span = (hi / lo).ln();
    for (m, k) in mode_radii(n, spacing) {
        if k < lo || k > hi {
            continue;
        }
        let b = (((k / lo).ln() / span * SLOPE_BINS as f64) as usize).min(SLOPE_BINS - 1);
        sum_k[b] += k;
        sum_p[b] += per_mode[m];
        count[b] += 1;
    }
    let pts: Vec<(f64, f64)> = (0..SLOPE_BINS)
        .filter(|&b| count[b] > 0 && sum_p[b] > 0.0)
        .map(|b| ((sum_k[b] / count[b] as f64).ln(), (sum_p[b] / count[b] as f64).ln()))
        .collect();
    if pts.len() < 3 {
        return Err(Error::Precondition(format!(
            "slope band [{lo:e}, {hi:e}] covers too few lattice wavenumbers"
        )));
    }
    let np = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / np;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / np;
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

/// Variance, radial covariance up to `max_lag` and periodogram slope.
///
/// `slope_band` defaults to the resolvable band `[2 pi / (L delta), pi / delta]`
/// and is clipped to it.
pub fn estimate_stats(fields: &[FieldRealization], max_lag: f64, slope_band: Option<(f64, f64)>) -> Result<EmpiricalStats> {
    let first = check_homogeneous(fields)?;
    let (n, spacing) = (first.grid_size, first.spacing);
    if !(max_lag >= 0.0) {
        return Err(Error::Domain(format!("max_lag must be >= 0, got {max_lag}")));
    }
    let cells = (n * n) as f64;
    let nf = fields.len() as f64;
    let trusted_lag = 0.25 * n as f64 * spacing;
    if max_lag > trusted_lag {
        log::warn!("max_lag {max_lag} clipped to the trusted lag {trusted_lag}");
    }
    let lag = max_lag.min(trusted_lag);

    let power = fields
        .par_iter()
        .map(|f| {
            let mut buf: Vec<Complex64> = f.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
            fft2(&mut buf, n, FftDirection::Forward);
            buf.into_iter().map(|z| z.norm_sqr()).collect::<Vec<f64>>()
        })
        .reduce(|| vec![0.0; n * n], |mut a, b| {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
            a
        });
    let power: Vec<f64> = power.into_iter().map(|p| p / nf).collect();

    let variance_hat = fields.par_iter().map(|f| f.values.iter().map(|v| v * v).sum::<f64>()).sum::<f64>() / (cells * nf);

    // Circular autocovariance by Wiener-Khinchin.
    let mut acov: Vec<Complex64> = power.iter().map(|&p| Complex64::new(p, 0.0)).collect();
    fft2(&mut acov, n, FftDirection::Inverse);
    let lags = (0..n * n).map(|m| {
        let r = spacing * signed(m / n, n).hypot(signed(m % n, n));
        (r, acov[m].re / (cells * cells))
    });
    let lag_bins = (lag / spacing).floor() as usize + 1;
    let radial_cov_hat = RadialTable::from_samples(lags.filter(|&(r, _)| r <= lag), spacing, lag_bins);

    let per_mode: Vec<f64> = power.iter().map(|p| p * spacing * spacing / cells).collect();
    let periodogram = periodogram_table(&per_mode, n, spacing);
    let dk = 2.0 * PI / (n as f64 * spacing);
    let (lo, hi) = slope_band.unwrap_or((dk, PI / spacing));
    let band = (lo.max(dk), hi.min(PI / spacing));
    if !(band.0 < band.1) {
        return Err(Error::Precondition(format!("slope band [{lo:e}, {hi:e}] lies outside the lattice band")));
    }
    let spd_slope_hat = slope_fit(&per_mode, n, spacing, band)?;

    Ok(EmpiricalStats {
        n_fields: fields.len(),
        variance_hat,
        radial_cov_hat,
        trusted_lag,
        periodogram,
        spd_slope_hat,
        slope_band: band,
    })
}

/// Summary of one probe realization.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeRealization {
    pub seed: u64,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    /// Spatial mean beyond twice the predicted standard deviation of window means.
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErgodicityReport {
    /// Numeric integral range of the model.
    pub integral_range: f64,
    /// `xi sqrt(2 pi eta1 / ln eta1)`, the stiff-field asymptote, for SSRF with `eta1 > 1`.
    pub integral_range_asymptotic: Option<f64>,
    pub domain_size: f64,
    /// The integral range exceeds the domain side.
    pub domain_flag: bool,
    /// Point standard deviation of the simulated lattice field.
    pub field_std: f64,
    /// Standard deviation of the window mean over the ensemble.
    pub mean_std: f64,
    pub realizations: Vec<ProbeRealization>,
}

/// Simulates on a grid `PROBE_EMBEDDING` times larger, crops an `n x n`
/// window and compares window means with their predicted spread.
///
/// When the integral range exceeds the window, window means stay close to
/// the point standard deviation instead of averaging out.
pub fn non_ergodicity_probe(
    model: &Model,
    n: usize,
    spacing: f64,
    n_real: usize,
    seeds: SeedSpec,
    cfg: &QuadratureConfig,
) -> Result<ErgodicityReport> {
    check_grid(model, n, spacing)?;
    let m = n * PROBE_EMBEDDING;
    check_grid(model, m, spacing)?;
    let integral_range = integral_range_numeric(model, cfg)?;
    let integral_range_asymptotic = match model {
        Model::Ssrf(p) if p.eta1 > 1.0 => Some(p.xi * (2.0 * PI * p.eta1 / p.eta1.ln()).sqrt()),
        _ => None,
    };
    let domain_size = n as f64 * spacing;

    // Exact lattice sums: |D|^2 is the squared box average of exp(i k.x) over the window.
    let box_gain = |i: usize| {
        let theta = 2.0 * PI * signed(i, m) / m as f64;
        let half = 0.5 * theta;
        if half.sin() == 0.0 {
            1.0
        } else {
            ((n as f64 * half).sin() / (n as f64 * half.sin())).powi(2)
        }
    };
    let gains: Vec<f64> = (0..m).map(box_gain).collect();
    let (var, mean_var) = (0..m)
        .into_par_iter()
        .map(|i| {
            let mut acc = (0.0, 0.0);
            for j in 0..m {
                if i == 0 && j == 0 {
                    continue;
                }
                let v = model.density(mode_k(i, j, m, spacing)) / (m as f64 * spacing).powi(2);
                acc.0 += v;
                acc.1 += v * gains[i] * gains[j];
            }
            acc
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    let mean_std = mean_var.sqrt();

    let base = seeds.resolve();
    let realizations = (0..n_real)
        .map(|r| {
            let seed = realization_seed(base, r);
            let z = synthesize(model, m, spacing, seed);
            let (mut sum, mut lo, mut hi) = (0.0, f64::INFINITY, f64::NEG_INFINITY);
            for row in z.chunks(m).take(n) {
                for v in &row[..n] {
                    sum += v.re;
                    lo = lo.min(v.re);
                    hi = hi.max(v.re);
                }
            }
            let mean = sum / (n * n) as f64;
            ProbeRealization { seed, mean, min: lo, max: hi, flagged: mean.abs() > 2.0 * mean_std }
        })
        .collect();

    Ok(ErgodicityReport {
        integral_range,
        integral_range_asymptotic,
        domain_size,
        domain_flag: integral_range > domain_size,
        field_std: var.sqrt(),
        mean_std,
        realizations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covariance::{ssrf_cov_2d, ssrf_variance_2d};
    use approx::assert_relative_eq;

    fn ssrf(eta0: f64, eta1: f64, xi: f64) -> Model {
        Model::Ssrf(SsrfParams::planar(eta0, eta1, xi).unwrap())
    }

    #[test]
    fn same_seed_is_bit_identical() {
        let m = ssrf(1.0, 2.0, 3.0);
        let a = simulate_field(&m, 64, 1.0, 42).unwrap();
        let b = simulate_field(&m, 64, 1.0, 42).unwrap();
        assert!(a.values.iter().zip(&b.values).all(|(x, y)| x.to_bits() == y.to_bits()));
        let c = simulate_field(&m, 64, 1.0, 43).unwrap();
        assert_ne!(a.values, c.values);
    }

    #[test]
    fn amplitude_scaling_with_eta0() {
        // SSRF density grows with eta0, Bessel-Lommel density shrinks with it.
        let m = ssrf(1.0, 0.5, 4.0);
        let a = simulate_field(&m, 64, 1.0, 7).unwrap();
        let b = simulate_field(&m.with_eta0(4.0), 64, 1.0, 7).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            assert_relative_eq!(*y, 2.0 * x, max_relative = 1e-13);
        }
        let bl = Model::BesselLommel(BlParams::new(1.0, 0.5, 1.0, 1.5, 2).unwrap());
        let a = simulate_field(&bl, 64, 1.0, 7).unwrap();
        let b = simulate_field(&bl.with_eta0(4.0), 64, 1.0, 7).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            assert_relative_eq!(*y, 0.5 * x, max_relative = 1e-13);
        }
    }

    #[test]
    fn parameter_change_keeps_phases() {
        // Same seed, different rigidity: each mode keeps its normal deviates.
        let a = synthesize(&ssrf(1.0, 0.0, 2.0), 16, 1.0, 9);
        let b = synthesize(&ssrf(1.0, 5.0, 2.0), 16, 1.0, 9);
        let mut fa = a.clone();
        let mut fb = b.clone();
        fft2(&mut fa, 16, FftDirection::Forward);
        fft2(&mut fb, 16, FftDirection::Forward);
        for (x, y) in fa.iter().zip(&fb).skip(1) {
            assert!((x * y.conj()).arg().abs() < 1e-9 || x.norm() < 1e-12);
        }
    }

    #[test]
    fn synthesis_is_real() {
        for &eta1 in &[-1.5, 2.0, 30.0] {
            let z = synthesize(&ssrf(1.0, eta1, 2.0), 128, 0.5, 3);
            let std = (z.iter().map(|v| v.re * v.re).sum::<f64>() / z.len() as f64).sqrt();
            let im = z.iter().fold(0.0f64, |m, v| m.max(v.im.abs()));
            assert!(im <= 1e-10 * std, "imaginary residue {im} vs std {std}");
        }
    }

    #[test]
    fn zero_spatial_mean() {
        let f = simulate_field(&ssrf(1.0, 1.0, 5.0), 128, 1.0, 11).unwrap();
        assert!(f.mean().abs() < 1e-12 * f.values.iter().map(|v| v.abs()).fold(0.0, f64::max));
    }

    #[test]
    fn rejects_bad_grids() {
        let m = ssrf(1.0, 1.0, 1.0);
        assert!(matches!(simulate_field(&m, 100, 1.0, 0), Err(Error::Size(_))));
        assert!(matches!(simulate_field(&m, 1, 1.0, 0), Err(Error::Size(_))));
        assert!(matches!(simulate_field(&m, 64, 0.0, 0), Err(Error::Domain(_))));
        let m3 = Model::Ssrf(SsrfParams::new(1.0, 1.0, 1.0, f64::INFINITY, 3).unwrap());
        assert!(matches!(simulate_field(&m3, 64, 1.0, 0), Err(Error::Dimension { .. })));
        assert!(matches!(estimate_stats(&[], 1.0, None), Err(Error::EmptyInput(_))));
    }

    #[test]
    fn mixed_ensembles_are_rejected() {
        let a = simulate_field(&ssrf(1.0, 1.0, 1.0), 32, 1.0, 0).unwrap();
        let b = simulate_field(&ssrf(1.0, 2.0, 1.0), 32, 1.0, 0).unwrap();
        assert!(matches!(estimate_stats(&[a, b], 4.0, None), Err(Error::Precondition(_))));
    }

    #[test]
    fn white_noise_has_no_correlation() {
        // A tiny xi makes the band-limited density flat over the whole lattice.
        let m = Model::BesselLommel(BlParams::new(1.0, 0.0, 1e-6, 5.0, 2).unwrap());
        let fields = simulate_ensemble(&m, 64, 1.0, 5, 20).unwrap();
        let stats = estimate_stats(&fields, 10.0, None).unwrap();
        let var = stats.variance_hat;
        let (r0, c0, _) = stats.radial_cov_hat.iter().next().unwrap();
        assert_eq!(r0, 0.0);
        assert_relative_eq!(c0, var, max_relative = 1e-10);
        for (r, c, _) in stats.radial_cov_hat.iter().skip(1) {
            assert!(c.abs() <= 0.02 * var, "lag {r}: {c}");
        }
        assert!(stats.spd_slope_hat.abs() < 0.1);
    }

    #[test]
    fn lattice_variance_matches_closed_form() {
        // The discrete mode variances sum to the continuous variance up to the
        // missing k = 0 cell and the truncated tail.
        let m = ssrf(1.0, 2.0, 5.0);
        let report = non_ergodicity_probe(&m, 64, 1.0, 0, SeedSpec::Fixed(0), &QuadratureConfig::default()).unwrap();
        let target = ssrf_variance_2d(&SsrfParams::planar(1.0, 2.0, 5.0).unwrap()).unwrap();
        assert_relative_eq!(report.field_std.powi(2), target, max_relative = 0.01);
    }

    #[test]
    fn ensemble_matches_covariance() {
        let p = SsrfParams::planar(1.0, 2.0, 3.0).unwrap();
        let fields = simulate_ensemble(&Model::Ssrf(p), 128, 1.0, 100, 40).unwrap();
        let stats = estimate_stats(&fields, 30.0, None).unwrap();
        let var = ssrf_variance_2d(&p).unwrap();
        assert_relative_eq!(stats.variance_hat, var, max_relative = 0.05);
        for (r, c, _) in stats.radial_cov_hat.iter() {
            let target = ssrf_cov_2d(r, &p).unwrap();
            assert!((c - target).abs() <= 0.05 * var, "lag {r}: {c} vs {target}");
        }
        assert!(stats.radial_cov_hat.abscissa.windows(2).all(|w| w[1] > w[0]));
        assert!(stats.trusted_lag == 32.0 && stats.radial_cov_hat.abscissa.last().unwrap() <= &30.0);
    }

    #[test]
    fn pooled_values_are_gaussian() {
        let m = ssrf(1.0, 1.0, 2.0);
        let fields = simulate_ensemble(&m, 128, 1.0, 1, 500).unwrap();
        // One value per field at a fixed site, plus a pooled check over a sparse sub-grid.
        let mut xs = Vec::new();
        for f in &fields {
            for r in (0..128).step_by(16) {
                for c in (0..128).step_by(16) {
                    xs.push(f.values[r * 128 + c]);
                }
            }
        }
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let m2 = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        let m3 = xs.iter().map(|x| (x - mean).powi(3)).sum::<f64>() / n;
        let m4 = xs.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n;
        let skew = m3 / m2.powf(1.5);
        let kurt = m4 / (m2 * m2) - 3.0;
        assert!(skew.abs() <= 0.1, "skewness {skew}");
        assert!(kurt.abs() <= 0.2, "excess kurtosis {kurt}");
    }

    #[test]
    fn periodogram_tracks_target() {
        let m = ssrf(1.0, 0.0, 4.0);
        let fields = simulate_ensemble(&m, 64, 1.0, 17, 200).unwrap();
        let stats = estimate_stats(&fields, 8.0, None).unwrap();
        let target = binned_spectral_density(&m, 64, 1.0).unwrap();
        assert_eq!(target.abscissa, stats.periodogram.abscissa);
        for ((k, p, count), t) in stats.periodogram.iter().zip(&target.values) {
            if count >= 50 {
                assert!((p - t).abs() <= 0.1 * t, "k={k}: {p} vs {t}");
            }
        }
    }

    #[test]
    fn binary_round_trip() {
        let m = Model::BesselLommel(BlParams::new(2.0, -0.5, 1.5, 2.0, 2).unwrap());
        let f = simulate_field(&m, 16, 0.25, u64::MAX - 3).unwrap();
        let mut bytes = Vec::new();
        f.write_binary(&mut bytes).unwrap();
        assert_eq!(bytes.len(), FIELD_HEADER_LEN + 16 * 16 * 8);
        assert_eq!(&bytes[..4], b"SRFG");
        let back = FieldRealization::read_binary(bytes.as_slice()).unwrap();
        assert_eq!(back, f);

        let s = simulate_field(&ssrf(1.0, 2.0, 1.0), 8, 1.0, 1).unwrap();
        let mut bytes = Vec::new();
        s.write_binary(&mut bytes).unwrap();
        let back = FieldRealization::read_binary(bytes.as_slice()).unwrap();
        assert_eq!(back.model, s.model);
        bytes[0] = b'X';
        assert!(matches!(FieldRealization::read_binary(bytes.as_slice()), Err(Error::Format(_))));
        assert!(matches!(FieldRealization::read_binary(&bytes[..20]), Err(Error::Format(_))));
    }

    #[test]
    fn csv_layout() {
        let f = simulate_field(&ssrf(1.0, 2.0, 1.0), 8, 1.0, 1).unwrap();
        let mut out = Vec::new();
        f.write_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let rows: Vec<&str> = text.lines().collect();
        assert_eq!(rows.len(), 8);
        let first: Vec<f64> = rows[0].split(',').map(|v| v.parse().unwrap()).collect();
        assert_eq!(first, f.values[..8]);
    }

    #[test]
    fn probe_stiff_asymptote_values() {
        let cfg = QuadratureConfig::default();
        let r = non_ergodicity_probe(&ssrf(1.0, 2.0, 10.0), 64, 1.0, 3, SeedSpec::Fixed(1), &cfg).unwrap();
        assert!(r.integral_range < r.domain_size && !r.domain_flag);
        assert_eq!(r.integral_range_asymptotic.map(|v| v.round()), Some(43.0));
        assert_eq!(r.realizations.len(), 3);
        assert!(r.mean_std < 0.5 * r.field_std);
    }

    #[test]
    fn clock_seed_resolves() {
        let a = SeedSpec::Clock.resolve();
        let b = SeedSpec::Clock.resolve();
        assert!(a != 0 || b != 0);
        assert_eq!(SeedSpec::Fixed(5).resolve(), 5);
        assert_eq!(realization_seed(u64::MAX, 2), 1);
    }
}
