//! Direct discrete Fourier transform over the exact series length.

use std::f64::consts::TAU;

/// Squared DFT magnitudes for bins `0..=n/2`, computed directly with a
/// precomputed twiddle table (no zero padding).
pub fn power_spectrum(series: &[f64]) -> Vec<f64> {
    let n = series.len();
    if n == 0 {
        return Vec::new();
    }
    let (cos, sin): (Vec<f64>, Vec<f64>) = (0..n)
        .map(|m| {
            let angle = TAU * m as f64 / n as f64;
            (angle.cos(), angle.sin())
        })
        .unzip();
    (0..=n / 2)
        .map(|k| {
            let (mut re, mut im) = (0.0, 0.0);
            let mut m = 0usize;
            for &x in series {
                re += x * cos[m];
                im -= x * sin[m];
                m += k;
                if m >= n {
                    m -= n;
                }
            }
            re * re + im * im
        })
        .collect()
}

/// Bins with power below this fraction of `n·Σx²` (the Parseval bound on a
/// single bin) are rounding residue and count as zero.
const NEGLIGIBLE_POWER: f64 = 1e-20;

/// Strongest non-DC bin below Nyquist, `None` when every such bin is
/// negligible. Ties resolve to the lowest bin.
pub fn principal_bin(series: &[f64]) -> Option<usize> {
    let n = series.len();
    let power = power_spectrum(series);
    let floor = NEGLIGIBLE_POWER * n as f64 * series.iter().map(|x| x * x).sum::<f64>();
    let mut best: Option<(usize, f64)> = None;
    for (k, &p) in power.iter().enumerate().take((n.saturating_sub(1)) / 2 + 1).skip(1) {
        if p > floor && p > best.map_or(0.0, |b| b.1) {
            best = Some((k, p));
        }
    }
    best.map(|b| b.0)
}

/// Frequency in Hz of the principal bin after subtracting the series minimum;
/// a constant series yields 0.
pub fn principal_frequency(series: &[f64], sample_rate_hz: f64) -> f64 {
    if series.is_empty() {
        return 0.0;
    }
    let min = series.iter().copied().fold(f64::INFINITY, f64::min);
    let shifted: Vec<f64> = series.iter().map(|v| v - min).collect();
    match principal_bin(&shifted) {
        Some(k) => k as f64 * sample_rate_hz / series.len() as f64,
        None => 0.0,
    }
}
