//! Unit-cell geometry to circuit values, and assembly of first- and
//! second-order FSS ladders.
//!
//! A single layer is a shunt series-L1C1 branch (front ring array), a short
//! dielectric line (spacer, thickness `h`) and a shunt R–L branch (back wire
//! grid). Second-order surfaces join two layers with an air line of length
//! `h1`.

use crate::error::{Error, Result};
use crate::network::{
    abcd_shunt, abcd_tline, abcd_to_s, shorted_s, shunt_rl_admittance, shunt_series_rlc_admittance,
    wave_impedance, Incidence, Line, SParams, ShuntAdmittance, TwoPort,
};
use crate::scalar::Real;

/// Spacer loss tangent used when none is given.
pub const DEFAULT_TAN_DELTA: f64 = 0.0009;
/// Spacer relative permittivity used when none is given.
pub const DEFAULT_EPS_R: f64 = 2.2;

/// Published unit-cell dimensions, m.
pub const PAPER_PERIOD: f64 = 10.2e-3;
pub const PAPER_RING_SIDE: f64 = 9.8e-3;
pub const PAPER_RING_WIDTH: f64 = 0.4e-3;
pub const PAPER_SPACER: f64 = 0.254e-3;
/// Strip width at which the published circuit values apply, m.
pub const PAPER_STRIP_WIDTH: f64 = 2.6e-3;

/// Published second-order circuit values.
pub const PAPER_L: f64 = 2.85e-9;
pub const PAPER_L1: f64 = 1.61e-9;
pub const PAPER_C1: f64 = 0.6e-12;
pub const PAPER_H1: f64 = 10e-3;

/// Default grid loss scale, Ω·m, giving R(2.6 mm) = 0.1 Ω.
pub const DEFAULT_K_R: f64 = 0.26e-3;
/// Default ring loss, Ω.
pub const DEFAULT_R1: f64 = 0.1;

/// Square-ring / wire-grid unit cell. All lengths in metres.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geometry<T> {
    /// Unit-cell period D (= Dx = Dy).
    pub period: T,
    /// Outer side of the square ring, d.
    pub ring_side: T,
    /// Ring arm width, t.
    pub ring_width: T,
    /// Back-layer grid strip width, w.
    pub strip_width: T,
    /// Spacer thickness, h.
    pub spacer: T,
    pub eps_r: T,
}

impl<T: Real> Geometry<T> {
    /// Published unit cell with the given strip width.
    pub fn paper(strip_width: T) -> Self {
        Self {
            period: T::lit(PAPER_PERIOD),
            ring_side: T::lit(PAPER_RING_SIDE),
            ring_width: T::lit(PAPER_RING_WIDTH),
            strip_width,
            spacer: T::lit(PAPER_SPACER),
            eps_r: T::lit(DEFAULT_EPS_R),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let two = T::lit(2.0);
        let ok = self.strip_width > T::zero()
            && self.strip_width < self.period
            && self.ring_width > T::zero()
            && self.ring_width < self.ring_side / two
            && self.ring_side < self.period
            && self.spacer > T::zero()
            && self.eps_r >= T::one();
        if !ok {
            return Err(Error::Domain(format!(
                "invalid unit cell: D = {}, d = {}, t = {}, w = {}, h = {}, eps_r = {}",
                self.period,
                self.ring_side,
                self.ring_width,
                self.strip_width,
                self.spacer,
                self.eps_r
            )));
        }
        Ok(())
    }
}

/// Scale constants behind the grid inductance and resistance laws.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Calibration<T> {
    /// L = k_l · ln(1/sin(πw/2D)), H.
    pub k_l: T,
    /// R = k_r / w, Ω·m.
    pub k_r: T,
    /// Ring loss R1 assigned to built circuits, Ω.
    pub r1_default: T,
}

impl<T: Real> Default for Calibration<T> {
    /// Anchored so that L(2.6 mm) = 2.85 nH and R(2.6 mm) = 0.1 Ω on the
    /// published 10.2 mm cell.
    fn default() -> Self {
        let k_l = calibrate_kl(
            T::lit(PAPER_STRIP_WIDTH),
            T::lit(PAPER_PERIOD),
            T::lit(PAPER_L),
        )
        .expect("default calibration anchor is valid");
        Self {
            k_l,
            k_r: T::lit(DEFAULT_K_R),
            r1_default: T::lit(DEFAULT_R1),
        }
    }
}

impl<T: Real> Calibration<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.k_l > T::zero()) || !(self.k_r >= T::zero()) || !(self.r1_default >= T::zero()) {
            return Err(Error::Domain(format!(
                "calibration requires k_l > 0, k_r >= 0, r1 >= 0 (got {}, {}, {})",
                self.k_l, self.k_r, self.r1_default
            )));
        }
        Ok(())
    }
}

/// Lumped equivalent-circuit values of a first- or second-order surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Circuit<T> {
    /// Grid inductance, H.
    pub l: T,
    /// Ring inductance, H.
    pub l1: T,
    /// Inter-ring capacitance, F.
    pub c1: T,
    /// Grid loss, Ω.
    pub r: T,
    /// Ring loss, Ω.
    pub r1: T,
    /// Spacer thickness, m.
    pub h: T,
    pub eps_r: T,
    pub tan_delta: T,
    /// Air gap between layers, m. Present iff `order == 2`.
    pub h1: Option<T>,
    pub order: u8,
}

impl<T: Real> Circuit<T> {
    /// Published second-order circuit with default losses.
    pub fn paper_second_order() -> Self {
        Self {
            h1: Some(T::lit(PAPER_H1)),
            order: 2,
            ..Self::paper_first_order()
        }
    }

    /// One layer of the published circuit with default losses.
    pub fn paper_first_order() -> Self {
        Self {
            l: T::lit(PAPER_L),
            l1: T::lit(PAPER_L1),
            c1: T::lit(PAPER_C1),
            r: T::lit(0.1),
            r1: T::lit(DEFAULT_R1),
            h: T::lit(PAPER_SPACER),
            eps_r: T::lit(DEFAULT_EPS_R),
            tan_delta: T::lit(DEFAULT_TAN_DELTA),
            h1: None,
            order: 1,
        }
    }

    /// Same circuit with every loss mechanism removed.
    pub fn lossless(mut self) -> Self {
        self.r = T::zero();
        self.r1 = T::zero();
        self.tan_delta = T::zero();
        self
    }

    /// Two identical layers of this circuit separated by `h1`.
    pub fn with_air_gap(mut self, h1: T) -> Self {
        self.h1 = Some(h1);
        self.order = 2;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.l > T::zero()
            && self.l1 > T::zero()
            && self.c1 > T::zero()
            && self.r >= T::zero()
            && self.r1 >= T::zero()
            && self.h >= T::zero()
            && self.eps_r >= T::one()
            && self.tan_delta >= T::zero();
        if !ok {
            return Err(Error::Domain(format!(
                "invalid circuit values: L = {}, L1 = {}, C1 = {}, R = {}, R1 = {}, h = {}, eps_r = {}, tan_delta = {}",
                self.l, self.l1, self.c1, self.r, self.r1, self.h, self.eps_r, self.tan_delta
            )));
        }
        match (self.order, self.h1) {
            (1, None) => Ok(()),
            (2, Some(h1)) if h1 >= T::zero() => Ok(()),
            (2, Some(h1)) => Err(Error::Domain(format!("negative air gap h1 = {h1}"))),
            (2, None) => Err(Error::Usage("second-order circuit requires h1".into())),
            (1, Some(_)) => Err(Error::Usage("h1 given for a first-order circuit".into())),
            (o, _) => Err(Error::Usage(format!("order must be 1 or 2, got {o}"))),
        }
    }
}

/// Shunt branch to ground.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ShuntBranch<T> {
    /// Front-layer ring array: series R1–L1–C1.
    Ring { r1: T, l1: T, c1: T },
    /// Back-layer wire grid: series R–L.
    Grid { r: T, l: T },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BranchKind {
    RingResonator,
    WireGrid,
}

impl<T: Real> ShuntBranch<T> {
    pub fn kind(&self) -> BranchKind {
        match self {
            ShuntBranch::Ring { .. } => BranchKind::RingResonator,
            ShuntBranch::Grid { .. } => BranchKind::WireGrid,
        }
    }

    pub fn admittance(&self, f: T) -> Result<ShuntAdmittance<T>> {
        match *self {
            ShuntBranch::Ring { r1, l1, c1 } => shunt_series_rlc_admittance(r1, l1, c1, f),
            ShuntBranch::Grid { r, l } => shunt_rl_admittance(r, l, f).map(ShuntAdmittance::Finite),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Element<T> {
    Shunt(ShuntBranch<T>),
    Line(Line<T>),
}

/// Chain of a ladder at one frequency and incidence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Chain<T> {
    Through(TwoPort<T>),
    /// Some branch shorts the transverse plane; the chains before the first
    /// and after the last short are kept for the reflections.
    Shorted {
        upstream: TwoPort<T>,
        downstream: TwoPort<T>,
    },
}

/// Layer orientation of a second-order surface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Orientation {
    /// Both layers ring-first, facing the source.
    #[default]
    Identical,
    /// Second layer reversed, so the two grids face each other across the gap.
    Mirrored,
}

/// Ordered ladder of shunt branches and line segments; the first element is
/// on the wave-arrival side. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct Ladder<T> {
    elements: Vec<Element<T>>,
    source: Option<Circuit<T>>,
}

impl<T: Real> Ladder<T> {
    /// Free-form ladder without a circuit provenance.
    pub fn new(elements: Vec<Element<T>>) -> Self {
        Self {
            elements,
            source: None,
        }
    }

    pub fn elements(&self) -> &[Element<T>] {
        &self.elements
    }

    /// Circuit values this ladder was built from, if any.
    pub fn source(&self) -> Option<&Circuit<T>> {
        self.source.as_ref()
    }

    pub fn chain(&self, f: T, inc: Incidence<T>) -> Result<Chain<T>> {
        let mut acc = TwoPort::identity();
        let mut upstream = None;
        for element in &self.elements {
            let m = match element {
                Element::Line(line) => abcd_tline(line, f, inc)?,
                Element::Shunt(branch) => match branch.admittance(f)? {
                    ShuntAdmittance::Finite(y) => abcd_shunt(y)?,
                    ShuntAdmittance::Short => {
                        upstream.get_or_insert(acc);
                        acc = TwoPort::identity();
                        continue;
                    }
                },
            };
            acc = acc.then(&m);
        }
        Ok(match upstream {
            None => Chain::Through(acc),
            Some(upstream) => Chain::Shorted {
                upstream,
                downstream: acc,
            },
        })
    }

    /// S-parameters referenced to the port wave impedance of `inc`.
    pub fn s_params(&self, f: T, inc: Incidence<T>) -> Result<SParams<T>> {
        let z_ref = wave_impedance(inc.theta(), inc.pol())?;
        match self.chain(f, inc)? {
            Chain::Through(m) => abcd_to_s(&m, z_ref),
            Chain::Shorted {
                upstream,
                downstream,
            } => Ok(shorted_s(&upstream, &downstream, z_ref)),
        }
    }
}

fn layer<T: Real>(p: &Circuit<T>) -> [Element<T>; 3] {
    [
        Element::Shunt(ShuntBranch::Ring {
            r1: p.r1,
            l1: p.l1,
            c1: p.c1,
        }),
        Element::Line(Line {
            eps_r: p.eps_r,
            tan_delta: p.tan_delta,
            length: p.h,
        }),
        Element::Shunt(ShuntBranch::Grid { r: p.r, l: p.l }),
    ]
}

/// Grid inductance L = k_l · ln(1/sin(πw/2D)).
pub fn grid_inductance<T: Real>(w: T, period: T, k_l: T) -> Result<T> {
    if !(w > T::zero() && w < period) {
        return Err(Error::Domain(format!(
            "strip width {w} outside (0, {period})"
        )));
    }
    let arg = T::PI() * w / (T::lit(2.0) * period);
    Ok(k_l * (-arg.sin().ln()))
}

/// Grid resistance R = k_r / w.
pub fn grid_resistance<T: Real>(w: T, k_r: T) -> Result<T> {
    if !(w > T::zero()) {
        return Err(Error::Domain(format!(
            "strip width must be positive, got {w}"
        )));
    }
    Ok(k_r / w)
}

/// Scale `k_l` such that `grid_inductance(w_ref, period, k_l) == l_ref`.
pub fn calibrate_kl<T: Real>(w_ref: T, period: T, l_ref: T) -> Result<T> {
    if !(l_ref > T::zero()) {
        return Err(Error::Domain(format!(
            "reference inductance must be positive, got {l_ref}"
        )));
    }
    let log_term = grid_inductance(w_ref, period, T::one())?;
    if !(log_term > T::zero()) {
        return Err(Error::DegenerateCalibration(format!(
            "ln(1/sin(pi w / 2D)) vanishes at w = {w_ref}, D = {period}"
        )));
    }
    Ok(l_ref / log_term)
}

/// `[ring, spacer line, grid]`.
pub fn build_first_order<T: Real>(p: &Circuit<T>) -> Result<Ladder<T>> {
    if p.order != 1 {
        return Err(Error::Usage(format!(
            "build_first_order called with order {}",
            p.order
        )));
    }
    p.validate()?;
    Ok(Ladder {
        elements: layer(p).to_vec(),
        source: Some(*p),
    })
}

/// `[ring, line, grid, air line(h1), ring, line, grid]`.
pub fn build_second_order<T: Real>(p: &Circuit<T>) -> Result<Ladder<T>> {
    build_second_order_with(p, Orientation::Identical)
}

pub fn build_second_order_with<T: Real>(
    p: &Circuit<T>,
    orientation: Orientation,
) -> Result<Ladder<T>> {
    let h1 = match (p.order, p.h1) {
        (2, Some(h1)) => h1,
        (2, None) => return Err(Error::Usage("second-order build requires h1".into())),
        (o, _) => {
            return Err(Error::Usage(format!(
                "build_second_order called with order {o}"
            )))
        }
    };
    p.validate()?;
    let front = layer(p);
    let mut back = layer(p);
    if orientation == Orientation::Mirrored {
        back.reverse();
    }
    let mut elements = Vec::with_capacity(7);
    elements.extend_from_slice(&front);
    elements.push(Element::Line(Line::air(h1)));
    elements.extend_from_slice(&back);
    Ok(Ladder {
        elements,
        source: Some(*p),
    })
}

/// Dispatches on `p.order`.
pub fn build<T: Real>(p: &Circuit<T>) -> Result<Ladder<T>> {
    match p.order {
        1 => build_first_order(p),
        2 => build_second_order(p),
        o => Err(Error::Usage(format!("order must be 1 or 2, got {o}"))),
    }
}

/// First-order circuit for a unit cell: L and R from the strip width, ring
/// values supplied by the caller.
pub fn params_from_geometry<T: Real>(
    g: &Geometry<T>,
    cal: &Calibration<T>,
    l1: T,
    c1: T,
) -> Result<Circuit<T>> {
    g.validate()?;
    cal.validate()?;
    let c = Circuit {
        l: grid_inductance(g.strip_width, g.period, cal.k_l)?,
        l1,
        c1,
        r: grid_resistance(g.strip_width, cal.k_r)?,
        r1: cal.r1_default,
        h: g.spacer,
        eps_r: g.eps_r,
        tan_delta: T::lit(DEFAULT_TAN_DELTA),
        h1: None,
        order: 1,
    };
    c.validate()?;
    Ok(c)
}
