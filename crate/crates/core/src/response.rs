//! Frequency grids and swept responses of ladders.

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fss::Ladder;
use crate::network::{Incidence, SParams};
use crate::scalar::Real;

/// Linear, endpoint-inclusive frequency grid, Hz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid<T> {
    pub f_start: T,
    pub f_stop: T,
    pub n_points: usize,
}

impl<T: Real> Grid<T> {
    pub fn new(f_start: T, f_stop: T, n_points: usize) -> Result<Self> {
        if !(f_start > T::zero()) || !(f_stop > f_start) || !f_stop.is_finite() || n_points < 2 {
            return Err(Error::Input(format!(
                "frequency grid needs 0 < f_start < f_stop and n >= 2 (got {f_start}, {f_stop}, {n_points})"
            )));
        }
        Ok(Self {
            f_start,
            f_stop,
            n_points,
        })
    }

    pub fn step(&self) -> T {
        (self.f_stop - self.f_start) / T::from_usize(self.n_points - 1).unwrap()
    }

    pub fn point(&self, i: usize) -> T {
        if i + 1 == self.n_points {
            return self.f_stop;
        }
        self.f_start + self.step() * T::from_usize(i).unwrap()
    }

    pub fn points(&self) -> Vec<T> {
        (0..self.n_points).map(|i| self.point(i)).collect()
    }
}

/// Sampled S-parameters of one network under one incidence condition.
#[derive(Debug, Clone, PartialEq)]
pub struct Response<T> {
    pub freqs: Vec<T>,
    pub s: Vec<SParams<T>>,
    pub incidence: Incidence<T>,
}

impl<T: Real> Response<T> {
    pub fn new(freqs: Vec<T>, s: Vec<SParams<T>>, incidence: Incidence<T>) -> Result<Self> {
        if freqs.len() != s.len() {
            return Err(Error::Input(format!(
                "{} frequencies but {} samples",
                freqs.len(),
                s.len()
            )));
        }
        if freqs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Input(
                "frequencies must be strictly increasing".into(),
            ));
        }
        if !s.iter().all(SParams::is_finite) {
            return Err(Error::Input("non-finite S-parameter sample".into()));
        }
        Ok(Self {
            freqs,
            s,
            incidence,
        })
    }

    pub fn len(&self) -> usize {
        self.freqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freqs.is_empty()
    }

    pub fn s21(&self) -> impl Iterator<Item = Complex<T>> + '_ {
        self.s.iter().map(|s| s.s21)
    }

    pub fn s21_mag(&self) -> Vec<T> {
        self.s21().map(|z| z.norm()).collect()
    }
}

/// Evaluates the ladder at every grid point. Points are computed in parallel
/// but each is a pure function of its frequency, so results do not depend on
/// scheduling.
pub fn sweep_response<T: Real>(
    net: &Ladder<T>,
    grid: &Grid<T>,
    inc: Incidence<T>,
) -> Result<Response<T>> {
    sweep_at(net, &grid.points(), inc)
}

/// Same as [`sweep_response`] on an arbitrary increasing frequency list.
pub fn sweep_at<T: Real>(net: &Ladder<T>, freqs: &[T], inc: Incidence<T>) -> Result<Response<T>> {
    let s = freqs
        .par_iter()
        .map(|&f| {
            net.s_params(f, inc).map_err(|e| Error::AtPoint {
                freq_hz: f.to_f64_lossy(),
                theta_deg: inc.theta_deg().to_f64_lossy(),
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Response::new(freqs.to_vec(), s, inc)
}
