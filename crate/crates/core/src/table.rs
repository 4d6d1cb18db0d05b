//! Radially binned tables shared by estimators and outputs.

use serde::Serialize;

/// Values binned by a radial coordinate (lag or wavenumber), ascending.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialTable {
    /// Mean radial coordinate of the samples in each bin.
    pub abscissa: Vec<f64>,
    pub values: Vec<f64>,
    /// Number of lattice points that fell into each bin.
    pub counts: Vec<usize>,
}

impl RadialTable {
    pub fn len(&self) -> usize {
        self.abscissa.len()
    }

    pub fn is_empty(&self) -> bool {
        self.abscissa.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64, usize)> + '_ {
        self.abscissa
            .iter()
            .zip(&self.values)
            .zip(&self.counts)
            .map(|((&x, &v), &n)| (x, v, n))
    }

    /// Accumulates `(radius, value)` samples into unit-width bins of `radius / width`,
    /// dropping empty bins.
    pub(crate) fn from_samples<I: IntoIterator<Item = (f64, f64)>>(samples: I, width: f64, n_bins: usize) -> Self {
        let mut sum_r = vec![0.0; n_bins];
        let mut sum_v = vec![0.0; n_bins];
        let mut counts = vec![0usize; n_bins];
        for (r, v) in samples {
            let b = (r / width).round() as usize;
            if b < n_bins {
                sum_r[b] += r;
                sum_v[b] += v;
                counts[b] += 1;
            }
        }
        let mut table = RadialTable { abscissa: Vec::new(), values: Vec::new(), counts: Vec::new() };
        for b in 0..n_bins {
            if counts[b] > 0 {
                let n = counts[b] as f64;
                table.abscissa.push(sum_r[b] / n);
                table.values.push(sum_v[b] / n);
                table.counts.push(counts[b]);
            }
        }
        table
    }
}
