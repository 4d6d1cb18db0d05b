//! One-dimensional quadrature primitives behind the oracle.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_600_525_478_096,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

// Gauss weights for the odd-indexed Kronrod nodes XGK[1], XGK[3], ..., XGK[9].
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// One Gauss-Kronrod 21 point panel: `(estimate, error, roundoff floor)`.
pub(crate) fn gk21<F: Fn(f64) -> f64 + ?Sized>(f: &F, a: f64, b: f64) -> (f64, f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = WGK[10] * fc;
    let mut gauss = 0.0;
    let mut abs_sum = WGK[10] * fc.abs();
    let mut fv = [(0.0, 0.0); 10];
    for (j, item) in fv.iter_mut().enumerate() {
        let dx = h * XGK[j];
        let (f1, f2) = (f(c - dx), f(c + dx));
        kron += WGK[j] * (f1 + f2);
        abs_sum += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
        *item = (f1, f2);
    }
    let mean = 0.5 * kron;
    let mut asc = WGK[10] * (fc - mean).abs();
    for (j, &(f1, f2)) in fv.iter().enumerate() {
        asc += WGK[j] * ((f1 - mean).abs() + (f2 - mean).abs());
    }
    let result = kron * h;
    let resasc = asc * h.abs();
    let resabs = abs_sum * h.abs();
    let mut err = ((kron - gauss) * h).abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    let floor = 50.0 * f64::EPSILON * resabs;
    (result, err.max(floor), floor)
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
    floor: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Globally adaptive Gauss-Kronrod over `[points[0], points[last]]`, with the
/// interior points used as initial breakpoints.
pub(crate) fn adaptive<F: Fn(f64) -> f64 + ?Sized>(
    f: &F,
    points: &[f64],
    abs_tol: f64,
    rel_tol: f64,
    max_sub: usize,
) -> Result<f64> {
    let mut heap = BinaryHeap::new();
    let mut total = 0.0;
    let mut total_err = 0.0;
    for w in points.windows(2) {
        if w[1] <= w[0] {
            continue;
        }
        let (value, err, floor) = gk21(f, w[0], w[1]);
        total += value;
        total_err += err;
        heap.push(Panel { a: w[0], b: w[1], value, err, floor });
    }
    let mut splits = 0;
    // Panels whose error is already at the roundoff floor are set aside.
    let mut settled_err = 0.0;
    let mut settled_value = 0.0;
    while total_err > abs_tol.max(rel_tol * total.abs()) {
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if worst.err <= worst.floor || mid <= worst.a || mid >= worst.b {
            settled_err += worst.err;
            settled_value += worst.value;
            total_err -= worst.err;
            continue;
        }
        if splits >= max_sub {
            return Err(Error::NonConvergence(format!(
                "adaptive quadrature: error {:.3e} after {max_sub} subdivisions",
                total_err + settled_err
            )));
        }
        splits += 1;
        let left = gk21(f, worst.a, mid);
        let right = gk21(f, mid, worst.b);
        total += left.0 + right.0 - worst.value;
        total_err += left.1 + right.1 - worst.err;
        heap.push(Panel { a: worst.a, b: mid, value: left.0, err: left.1, floor: left.2 });
        heap.push(Panel { a: mid, b: worst.b, value: right.0, err: right.1, floor: right.2 });
    }
    if !total.is_finite() {
        return Err(Error::NonConvergence("adaptive quadrature produced a non-finite sum".into()));
    }
    // Re-sum to shed the drift of the running update.
    Ok(settled_value + heap.iter().map(|p| p.value).sum::<f64>())
}

/// Double-exponential (tanh-sinh) rule on `[a, b]`, robust to algebraic
/// endpoint singularities. Nodes are formed as offsets from the nearer
/// endpoint so that points close to `a = 0` keep full relative precision.
pub(crate) fn tanh_sinh<F: Fn(f64) -> f64 + ?Sized>(
    f: &F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<f64> {
    if b <= a {
        return Ok(0.0);
    }
    const T_MAX: f64 = 6.0;
    const MAX_LEVEL: u32 = 12;
    let width = b - a;
    let half_pi = std::f64::consts::FRAC_PI_2;
    let term = |t: f64| -> f64 {
        let y = half_pi * t.sinh();
        let x = if t >= 0.0 { b - width / (1.0 + (2.0 * y).exp()) } else { a + width / (1.0 + (-2.0 * y).exp()) };
        if x <= a || x >= b {
            return 0.0;
        }
        let cy = y.cosh();
        let w = 0.5 * width * half_pi * t.cosh() / (cy * cy);
        if w == 0.0 {
            return 0.0;
        }
        w * f(x)
    };
    let mut h = 1.0;
    let mut sum = term(0.0);
    let mut k = 1;
    while f64::from(k) * h <= T_MAX {
        let t = f64::from(k) * h;
        sum += term(t) + term(-t);
        k += 1;
    }
    let mut estimate = sum * h;
    for _ in 0..MAX_LEVEL {
        h *= 0.5;
        let mut fresh = 0.0;
        let mut k = 1;
        while f64::from(k) * h <= T_MAX {
            let t = f64::from(k) * h;
            fresh += term(t) + term(-t);
            k += 2;
        }
        sum += fresh;
        let next = sum * h;
        if !next.is_finite() {
            return Err(Error::NonConvergence("tanh-sinh rule produced a non-finite sum".into()));
        }
        let diff = (next - estimate).abs();
        estimate = next;
        if diff <= abs_tol.max(rel_tol * next.abs()) {
            return Ok(next);
        }
    }
    Err(Error::NonConvergence(format!("tanh-sinh rule on [{a}, {b}] did not converge")))
}

/// Wynn epsilon extrapolation of a sequence of partial sums.
#[derive(Debug, Default)]
pub(crate) struct Wynn {
    // Last diagonal of the epsilon table, even columns hold the estimates.
    row: Vec<f64>,
}

impl Wynn {
    /// Push the next partial sum and return the current best estimate.
    pub(crate) fn push(&mut self, s: f64) -> f64 {
        let mut prev_row = std::mem::take(&mut self.row);
        let mut row = Vec::with_capacity(prev_row.len() + 1);
        row.push(s);
        let mut back = 0.0; // eps_{k-2} of the new diagonal
        for (j, &old) in prev_row.iter().enumerate() {
            let diff = row[j] - old;
            let next = if diff == 0.0 { f64::INFINITY } else { back + 1.0 / diff };
            back = old;
            if !next.is_finite() {
                break;
            }
            row.push(next);
        }
        prev_row.clear();
        self.row = row;
        let last_even = (self.row.len() - 1) & !1;
        self.row[last_even]
    }
}
