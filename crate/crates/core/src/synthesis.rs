//! Inverse design: ring/grid values from target frequencies, loss budget from
//! a target Q, and strip width from a target bandwidth.

use crate::error::{Error, Result};
use crate::fss::{build_first_order, params_from_geometry, Calibration, Geometry};
use crate::metrics::extract_metrics;
use crate::network::Incidence;
use crate::response::{sweep_response, Grid};
use crate::scalar::Real;

/// Bandwidth search stops once |fbw − target| is below this.
pub const FBW_TOLERANCE: f64 = 1e-3;
/// ... or once the width bracket is narrower than this, m.
pub const WIDTH_TOLERANCE: f64 = 1e-6;

/// Target passband and transmission-zero frequencies with C1 pinned.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Design<T> {
    pub f_p_target: T,
    pub f_z_target: T,
    pub c1_given: T,
    pub q_target: Option<T>,
    pub fbw_target: Option<T>,
}

impl<T: Real> Design<T> {
    pub fn new(f_p_target: T, f_z_target: T, c1_given: T) -> Self {
        Self {
            f_p_target,
            f_z_target,
            c1_given,
            q_target: None,
            fbw_target: None,
        }
    }
}

/// Element values that realise a design.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LcValues<T> {
    pub l: T,
    pub l1: T,
    pub c1: T,
}

/// L1 = 1/((2πf_z)²C1), L = 1/((2πf_p)²C1) − L1.
pub fn synthesize_lc<T: Real>(spec: &Design<T>) -> Result<LcValues<T>> {
    let Design {
        f_p_target: fp,
        f_z_target: fz,
        c1_given: c1,
        ..
    } = *spec;
    if !(c1 > T::zero()) || !(fp > T::zero()) || !fz.is_finite() {
        return Err(Error::Domain(format!(
            "design needs positive f_p and C1 (got f_p = {fp}, C1 = {c1})"
        )));
    }
    if !(fz > fp) {
        return Err(Error::Infeasible(format!(
            "transmission zero {fz} Hz must lie above the passband {fp} Hz"
        )));
    }
    let inv_w2c = |f: T| {
        let w = T::TAU() * f;
        (w * w * c1).recip()
    };
    let l1 = inv_w2c(fz);
    let l = inv_w2c(fp) - l1;
    Ok(LcValues { l, l1, c1 })
}

/// Total series loss R + R1 giving unloaded Q = `q_target`.
pub fn loss_budget_for_q<T: Real>(q_target: T, l: T, l1: T, c1: T) -> Result<T> {
    if !(q_target > T::zero()) {
        return Err(Error::Domain(format!(
            "q_target must be positive, got {q_target}"
        )));
    }
    if !(l >= T::zero()) || !(l1 > T::zero()) || !(c1 > T::zero()) {
        return Err(Error::Domain(format!(
            "loss budget needs L >= 0, L1 > 0, C1 > 0 (got {l}, {l1}, {c1})"
        )));
    }
    Ok(((l + l1) / c1).sqrt() / q_target)
}

/// Fractional bandwidth of the first-order surface at strip width `w`,
/// normal incidence.
pub fn fbw_at_width<T: Real>(
    w: T,
    geometry: &Geometry<T>,
    cal: &Calibration<T>,
    l1: T,
    c1: T,
    grid: &Grid<T>,
) -> Result<T> {
    let g = Geometry {
        strip_width: w,
        ..*geometry
    };
    let net = build_first_order(&params_from_geometry(&g, cal, l1, c1)?)?;
    let curve = sweep_response(&net, grid, Incidence::normal())?;
    Ok(extract_metrics(&curve)?.fbw)
}

/// Bisection on strip width for a target fractional bandwidth. Relies on
/// FBW falling monotonically with w.
pub fn width_for_bandwidth<T: Real>(
    fbw_target: T,
    geometry: &Geometry<T>,
    cal: &Calibration<T>,
    l1: T,
    c1: T,
    w_range: (T, T),
    grid: &Grid<T>,
) -> Result<T> {
    let (w_min, w_max) = w_range;
    if !(w_min > T::zero()) || !(w_max >= w_min) || !(w_max < geometry.period) {
        return Err(Error::Domain(format!(
            "width range [{w_min}, {w_max}] must lie inside (0, {})",
            geometry.period
        )));
    }
    let tol = T::lit(FBW_TOLERANCE);
    let fbw = |w: T| fbw_at_width(w, geometry, cal, l1, c1, grid);
    let meets = |v: T| (v - fbw_target).abs() < tol;
    let infeasible = |lo: T, hi: T| Error::InfeasibleTarget {
        target: fbw_target.to_f64_lossy(),
        min: lo.to_f64_lossy(),
        max: hi.to_f64_lossy(),
    };

    let fbw_wide = fbw(w_min)?;
    if meets(fbw_wide) {
        return Ok(w_min);
    }
    if w_max == w_min {
        return Err(infeasible(fbw_wide, fbw_wide));
    }
    let fbw_narrow = fbw(w_max)?;
    if meets(fbw_narrow) {
        return Ok(w_max);
    }
    let (lo_fbw, hi_fbw) = (fbw_narrow.min(fbw_wide), fbw_narrow.max(fbw_wide));
    if fbw_target < lo_fbw || fbw_target > hi_fbw {
        return Err(infeasible(lo_fbw, hi_fbw));
    }

    let (mut lo, mut hi) = (w_min, w_max);
    let half = T::lit(0.5);
    loop {
        let mid = (lo + hi) * half;
        let v = fbw(mid)?;
        if meets(v) || hi - lo < T::lit(WIDTH_TOLERANCE) {
            return Ok(mid);
        }
        if v > fbw_target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}
