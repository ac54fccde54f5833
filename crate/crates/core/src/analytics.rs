//! Closed-form resonance relations of the single-layer hybrid resonator.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Outcome of the unloaded-Q formula; lossless resonators have no finite Q.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QFactor<T> {
    Finite(T),
    Infinite,
}

impl<T: Real> QFactor<T> {
    pub fn value(&self) -> Option<T> {
        match self {
            QFactor::Finite(q) => Some(*q),
            QFactor::Infinite => None,
        }
    }
}

fn lc_resonance<T: Real>(l: T, c: T) -> T {
    (T::TAU() * (l * c).sqrt()).recip()
}

fn check_ring<T: Real>(l1: T, c1: T) -> Result<()> {
    if !(l1 > T::zero()) || !(c1 > T::zero()) {
        return Err(Error::Domain(format!(
            "ring values must be positive (L1 = {l1}, C1 = {c1})"
        )));
    }
    Ok(())
}

/// Passband frequency f_p = 1/(2π√((L + L1)·C1)).
pub fn passband_freq<T: Real>(l: T, l1: T, c1: T) -> Result<T> {
    check_ring(l1, c1)?;
    if !(l >= T::zero()) {
        return Err(Error::Domain(format!(
            "grid inductance must be >= 0, got {l}"
        )));
    }
    Ok(lc_resonance(l + l1, c1))
}

/// Transmission-zero frequency f_z = 1/(2π√(L1·C1)).
pub fn zero_freq<T: Real>(l1: T, c1: T) -> Result<T> {
    check_ring(l1, c1)?;
    Ok(lc_resonance(l1, c1))
}

/// Unloaded quality factor Q = √((L + L1)/C1) / (R + R1).
pub fn unloaded_q<T: Real>(r: T, r1: T, l: T, l1: T, c1: T) -> Result<QFactor<T>> {
    check_ring(l1, c1)?;
    if !(l >= T::zero()) || !(r >= T::zero()) || !(r1 >= T::zero()) {
        return Err(Error::Domain(format!(
            "unloaded_q requires L, R, R1 >= 0 (got {l}, {r}, {r1})"
        )));
    }
    let loss = r + r1;
    if loss == T::zero() {
        return Ok(QFactor::Infinite);
    }
    Ok(QFactor::Finite(((l + l1) / c1).sqrt() / loss))
}
