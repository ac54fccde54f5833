//! Passband figures extracted numerically from swept |s21|.

use crate::error::{BandSide, Error, Result};
use crate::response::Response;
use crate::scalar::Real;

/// Depth below which a minimum above the passband counts as a transmission zero.
pub const ZERO_DEPTH: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics<T> {
    /// Peak-|s21| frequency, Hz.
    pub f_c: T,
    /// −20·log10 of the refined peak |s21|.
    pub insertion_loss_db: T,
    /// Lower and upper (peak − 3 dB) crossings, Hz.
    pub f_lower: T,
    pub f_upper: T,
    pub bw_3db: T,
    pub fbw: T,
    /// Always exactly `1 / fbw`.
    pub q_loaded: T,
    /// Deepest interior |s21| minimum above `f_c`, when deeper than 0.1.
    pub f_zero: Option<T>,
}

/// Vertex offset (in grid steps, within [−1, 1]) and value of the parabola
/// through three equally spaced samples.
fn parabola<T: Real>(y0: T, y1: T, y2: T) -> (T, T) {
    let half = T::lit(0.5);
    let den = y0 - y1 - y1 + y2;
    if den == T::zero() {
        return (T::zero(), y1);
    }
    let p = (half * (y0 - y2) / den).max(-T::one()).min(T::one());
    (p, y1 - T::lit(0.25) * (y0 - y2) * p)
}

fn db_pow<T: Real>(mag: T) -> T {
    T::lit(20.0) * mag.log10()
}

pub fn extract_metrics<T: Real>(curve: &Response<T>) -> Result<Metrics<T>> {
    extract_from_magnitudes(&curve.freqs, &curve.s21_mag())
}

/// Works on any strictly increasing frequency list with matching |s21|
/// samples. Parabolic refinement assumes locally uniform spacing.
pub fn extract_from_magnitudes<T: Real>(freqs: &[T], mag: &[T]) -> Result<Metrics<T>> {
    let n = freqs.len();
    if n != mag.len() || n < 3 {
        return Err(Error::Input(format!(
            "need >= 3 matching samples (got {} frequencies, {} magnitudes)",
            n,
            mag.len()
        )));
    }
    let mut peak = 0;
    for (i, &m) in mag.iter().enumerate() {
        if m > mag[peak] {
            peak = i;
        }
    }
    if peak == 0 || peak == n - 1 {
        return Err(Error::BandNotBracketed);
    }

    let (p, peak_mag) = parabola(mag[peak - 1], mag[peak], mag[peak + 1]);
    let f_c = if p >= T::zero() {
        freqs[peak] + p * (freqs[peak + 1] - freqs[peak])
    } else {
        freqs[peak] + p * (freqs[peak] - freqs[peak - 1])
    };

    let db: Vec<T> = mag.iter().map(|&m| db_pow(m)).collect();
    let peak_db = db_pow(peak_mag);
    let threshold = peak_db - T::lit(3.0);
    let crossing = |i: usize, j: usize| {
        let t = (threshold - db[i]) / (db[j] - db[i]);
        freqs[i] + t * (freqs[j] - freqs[i])
    };

    let upper = (peak + 1..n)
        .find(|&j| db[j] <= threshold)
        .ok_or(Error::OneSidedBand(BandSide::Upper))?;
    let lower = (0..peak)
        .rev()
        .find(|&j| db[j] <= threshold)
        .ok_or(Error::OneSidedBand(BandSide::Lower))?;
    let f_upper = crossing(upper - 1, upper);
    let f_lower = crossing(lower, lower + 1);
    let bw_3db = f_upper - f_lower;
    let fbw = bw_3db / f_c;

    Ok(Metrics {
        f_c,
        insertion_loss_db: -peak_db,
        f_lower,
        f_upper,
        bw_3db,
        fbw,
        q_loaded: fbw.recip(),
        f_zero: find_zero(freqs, mag, peak),
    })
}

fn find_zero<T: Real>(freqs: &[T], mag: &[T], peak: usize) -> Option<T> {
    let deepest = (peak + 1..mag.len() - 1)
        .filter(|&k| mag[k] <= mag[k - 1] && mag[k] <= mag[k + 1])
        .min_by(|&a, &b| {
            mag[a]
                .partial_cmp(&mag[b])
                .unwrap_or(std::cmp::Ordering::Equal)
        })?;
    if !(mag[deepest] < T::lit(ZERO_DEPTH)) {
        return None;
    }
    // |s21|² is smooth through a null where |s21| has a kink.
    let sq = |k: usize| mag[k] * mag[k];
    let (p, _) = parabola(sq(deepest - 1), sq(deepest), sq(deepest + 1));
    Some(if p >= T::zero() {
        freqs[deepest] + p * (freqs[deepest + 1] - freqs[deepest])
    } else {
        freqs[deepest] + p * (freqs[deepest] - freqs[deepest - 1])
    })
}
