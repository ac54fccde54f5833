//! Complex two-port algebra: ABCD element matrices, cascading, ABCD to S
//! conversion and incidence-dependent wave impedances.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Free-space wave impedance, Ω.
pub const ETA0: f64 = 376.730;
/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Polarization {
    #[serde(rename = "TE")]
    Te,
    #[serde(rename = "TM")]
    Tm,
}

impl std::fmt::Display for Polarization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Polarization::Te => f.write_str("TE"),
            Polarization::Tm => f.write_str("TM"),
        }
    }
}

impl std::str::FromStr for Polarization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "TE" => Ok(Polarization::Te),
            "TM" => Ok(Polarization::Tm),
            other => Err(Error::Input(format!("unknown polarization `{other}`"))),
        }
    }
}

/// Plane-wave incidence: angle from the surface normal and polarization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Incidence<T> {
    theta: T,
    pol: Polarization,
}

impl<T: Real> Incidence<T> {
    /// Angle must satisfy 0 ≤ θ < π/2.
    pub fn new(theta: T, pol: Polarization) -> Result<Self> {
        check_angle(theta)?;
        Ok(Self { theta, pol })
    }

    pub fn from_degrees(theta_deg: T, pol: Polarization) -> Result<Self> {
        Self::new(theta_deg.to_radians(), pol)
    }

    pub fn normal() -> Self {
        Self {
            theta: T::zero(),
            pol: Polarization::Te,
        }
    }

    pub fn theta(&self) -> T {
        self.theta
    }

    pub fn theta_deg(&self) -> T {
        self.theta.to_degrees()
    }

    pub fn pol(&self) -> Polarization {
        self.pol
    }

    fn sin2(&self) -> T {
        let s = self.theta.sin();
        s * s
    }
}

impl<T: Real> Default for Incidence<T> {
    fn default() -> Self {
        Self::normal()
    }
}

fn check_angle<T: Real>(theta: T) -> Result<()> {
    if !(theta >= T::zero() && theta < T::FRAC_PI_2()) {
        return Err(Error::Domain(format!(
            "incidence angle {} rad outside [0, pi/2)",
            theta
        )));
    }
    Ok(())
}

/// Port wave impedance for oblique incidence: η₀/cosθ (TE) or η₀·cosθ (TM).
pub fn wave_impedance<T: Real>(theta: T, pol: Polarization) -> Result<T> {
    check_angle(theta)?;
    let eta = T::lit(ETA0);
    let cos = theta.cos();
    Ok(match pol {
        Polarization::Te => eta / cos,
        Polarization::Tm => eta * cos,
    })
}

/// Complex 2×2 chain (ABCD) matrix. `b` is in Ω, `c` in S.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoPort<T> {
    pub a: Complex<T>,
    pub b: Complex<T>,
    pub c: Complex<T>,
    pub d: Complex<T>,
}

impl<T: Real> TwoPort<T> {
    pub fn identity() -> Self {
        Self {
            a: Complex::new(T::one(), T::zero()),
            b: Complex::new(T::zero(), T::zero()),
            c: Complex::new(T::zero(), T::zero()),
            d: Complex::new(T::one(), T::zero()),
        }
    }

    pub fn from_abcd(a: Complex<T>, b: Complex<T>, c: Complex<T>, d: Complex<T>) -> Self {
        Self { a, b, c, d }
    }

    pub fn determinant(&self) -> Complex<T> {
        self.a * self.d - self.b * self.c
    }

    /// Matrix product `self · rhs`; `self` is on the wave-arrival side.
    pub fn then(&self, rhs: &TwoPort<T>) -> TwoPort<T> {
        TwoPort {
            a: self.a * rhs.a + self.b * rhs.c,
            b: self.a * rhs.b + self.b * rhs.d,
            c: self.c * rhs.a + self.d * rhs.c,
            d: self.c * rhs.b + self.d * rhs.d,
        }
    }

    pub fn is_finite(&self) -> bool {
        [self.a, self.b, self.c, self.d].iter().all(|&z| finite(z))
    }

    /// Largest entrywise difference relative to the largest entry of `self`.
    pub fn max_rel_diff(&self, other: &TwoPort<T>) -> T {
        let scale = [self.a, self.b, self.c, self.d]
            .iter()
            .map(|z| z.norm())
            .fold(T::min_positive_value(), T::max);
        [
            self.a - other.a,
            self.b - other.b,
            self.c - other.c,
            self.d - other.d,
        ]
        .iter()
        .map(|z| z.norm())
        .fold(T::zero(), T::max)
            / scale
    }
}

/// Chain matrix of a shunt admittance: [[1, 0], [Y, 1]].
pub fn abcd_shunt<T: Real>(admittance: Complex<T>) -> Result<TwoPort<T>> {
    if !finite(admittance) {
        return Err(Error::Input(format!(
            "shunt admittance must be finite, got {admittance}"
        )));
    }
    let mut m = TwoPort::identity();
    m.c = admittance;
    Ok(m)
}

/// Admittance of a shunt branch, which may short the line outright.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ShuntAdmittance<T> {
    Finite(Complex<T>),
    /// Branch impedance is zero to working precision.
    Short,
}

impl<T: Real> ShuntAdmittance<T> {
    pub fn finite(&self) -> Option<Complex<T>> {
        match self {
            ShuntAdmittance::Finite(y) => Some(*y),
            ShuntAdmittance::Short => None,
        }
    }

    pub fn is_short(&self) -> bool {
        matches!(self, ShuntAdmittance::Short)
    }
}

fn finite<T: Real>(z: Complex<T>) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

fn angular<T: Real>(f: T) -> T {
    T::TAU() * f
}

/// Series R1–L1–C1 branch to ground: Y = 1/(R1 + jωL1 + 1/(jωC1)).
///
/// When R1 = 0 and the reactances cancel to rounding level, the branch is
/// reported as [`ShuntAdmittance::Short`].
pub fn shunt_series_rlc_admittance<T: Real>(
    r1: T,
    l1: T,
    c1: T,
    f: T,
) -> Result<ShuntAdmittance<T>> {
    if !(r1 >= T::zero()) || !(l1 > T::zero()) || !(c1 > T::zero()) {
        return Err(Error::Domain(format!(
            "series RLC requires r1 >= 0, l1 > 0, c1 > 0 (got {r1}, {l1}, {c1})"
        )));
    }
    if !(f > T::zero()) || !f.is_finite() {
        return Err(Error::Domain(format!(
            "series RLC branch evaluated at non-positive frequency {f}"
        )));
    }
    let w = angular(f);
    let xl = w * l1;
    let xc = (w * c1).recip();
    let x = xl - xc;
    let noise = T::lit(64.0) * T::epsilon() * xl.max(xc);
    if r1 == T::zero() && x.abs() <= noise {
        return Ok(ShuntAdmittance::Short);
    }
    Ok(ShuntAdmittance::Finite(Complex::new(r1, x).inv()))
}

/// Lossy shunt inductor: Y = 1/(R + jωL).
pub fn shunt_rl_admittance<T: Real>(r: T, l: T, f: T) -> Result<Complex<T>> {
    if !(r >= T::zero()) || !(l > T::zero()) || !(f >= T::zero()) {
        return Err(Error::Domain(format!(
            "shunt RL requires r >= 0, l > 0, f >= 0 (got {r}, {l}, {f})"
        )));
    }
    if r == T::zero() && f == T::zero() {
        return Err(Error::Domain("lossless shunt inductor shorts at DC".into()));
    }
    Ok(Complex::new(r, angular(f) * l).inv())
}

/// Uniform dielectric line segment between two metallic layers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Line<T> {
    pub eps_r: T,
    /// Loss tangent; 0 for a lossless line.
    pub tan_delta: T,
    /// Physical length, m.
    pub length: T,
}

impl<T: Real> Line<T> {
    pub fn lossless(eps_r: T, length: T) -> Self {
        Self {
            eps_r,
            tan_delta: T::zero(),
            length,
        }
    }

    pub fn air(length: T) -> Self {
        Self::lossless(T::one(), length)
    }

    fn validate(&self) -> Result<()> {
        if !(self.eps_r >= T::one())
            || !(self.length >= T::zero())
            || !(self.tan_delta >= T::zero())
        {
            return Err(Error::Domain(format!(
                "line requires eps_r >= 1, length >= 0, tan_delta >= 0 (got {}, {}, {})",
                self.eps_r, self.length, self.tan_delta
            )));
        }
        Ok(())
    }

    /// Normalised longitudinal wavenumber √(εr − sin²θ) and the line's
    /// characteristic impedance for the given incidence.
    pub fn modal(&self, inc: Incidence<T>) -> Result<(T, T)> {
        self.validate()?;
        let eta = T::lit(ETA0);
        let s2 = inc.sin2();
        if s2 == T::zero() {
            let k = self.eps_r.sqrt();
            return Ok((k, eta / k));
        }
        let kz2 = self.eps_r - s2;
        if !(kz2 > T::zero()) {
            return Err(Error::Evanescent {
                eps_r: self.eps_r.to_f64_lossy(),
                theta_deg: inc.theta_deg().to_f64_lossy(),
            });
        }
        let kz = kz2.sqrt();
        let z = match inc.pol() {
            Polarization::Te => eta / kz,
            Polarization::Tm => eta * kz / self.eps_r,
        };
        Ok((kz, z))
    }
}

/// Chain matrix of a line segment:
/// [[cos φ, jZ sin φ], [j sin φ / Z, cos φ]], φ = k₀·√(εr − sin²θ)·length.
///
/// A nonzero loss tangent scales the propagation constant by (1 − j·tanδ/2).
pub fn abcd_tline<T: Real>(line: &Line<T>, f: T, inc: Incidence<T>) -> Result<TwoPort<T>> {
    if !(f > T::zero()) || !f.is_finite() {
        return Err(Error::Domain(format!("line evaluated at frequency {f}")));
    }
    let (kz, z) = line.modal(inc)?;
    let phi = angular(f) / T::lit(SPEED_OF_LIGHT) * kz * line.length;
    let (cos, sin) = if line.tan_delta == T::zero() {
        (
            Complex::new(phi.cos(), T::zero()),
            Complex::new(phi.sin(), T::zero()),
        )
    } else {
        let p = Complex::new(phi, -phi * line.tan_delta / T::lit(2.0));
        (p.cos(), p.sin())
    };
    let j = Complex::new(T::zero(), T::one());
    Ok(TwoPort {
        a: cos,
        b: j * sin * z,
        c: j * sin / z,
        d: cos,
    })
}

/// Left-to-right product of the segments; the first is the wave-arrival side.
pub fn cascade<T: Real>(segments: &[TwoPort<T>]) -> Result<TwoPort<T>> {
    let (first, rest) = segments
        .split_first()
        .ok_or_else(|| Error::Input("cascade of an empty segment list".into()))?;
    Ok(rest.iter().fold(*first, |acc, m| acc.then(m)))
}

/// Scattering parameters of a reciprocal two-port with equal port references.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SParams<T> {
    pub s11: Complex<T>,
    pub s21: Complex<T>,
    pub s22: Complex<T>,
}

impl<T: Real> SParams<T> {
    /// Reciprocal: always equal to `s21`.
    pub fn s12(&self) -> Complex<T> {
        self.s21
    }

    /// |s11|² + |s21|², the fraction of incident power not dissipated.
    pub fn power_sum(&self) -> T {
        self.s11.norm_sqr() + self.s21.norm_sqr()
    }

    pub fn is_finite(&self) -> bool {
        finite(self.s11) && finite(self.s21) && finite(self.s22)
    }
}

/// Converts a chain matrix to S-parameters referenced to `z_ref` at both ports.
pub fn abcd_to_s<T: Real>(m: &TwoPort<T>, z_ref: T) -> Result<SParams<T>> {
    if !(z_ref > T::zero()) || !z_ref.is_finite() {
        return Err(Error::Domain(format!(
            "reference impedance must be positive, got {z_ref}"
        )));
    }
    let bz = m.b / z_ref;
    let cz = m.c * z_ref;
    let delta = m.a + bz + cz + m.d;
    if delta.norm() == T::zero() || !finite(delta) {
        return Err(Error::Singular);
    }
    let two = Complex::new(T::lit(2.0), T::zero());
    Ok(SParams {
        s11: (m.a + bz - cz - m.d) / delta,
        s21: two / delta,
        s22: (-m.a + bz - cz + m.d) / delta,
    })
}

/// S-parameters of a network whose transverse plane is shorted somewhere
/// inside: `upstream` and `downstream` are the chains on either side of the
/// short, seen from port 1 and port 2 respectively.
pub fn shorted_s<T: Real>(upstream: &TwoPort<T>, downstream: &TwoPort<T>, z_ref: T) -> SParams<T> {
    // Chain terminated in a short: Zin = B / D.
    let gamma = |m: &TwoPort<T>| (m.b - m.d * z_ref) / (m.b + m.d * z_ref);
    // Reversing a reciprocal chain swaps a and d.
    let rev = TwoPort {
        a: downstream.d,
        b: downstream.b,
        c: downstream.c,
        d: downstream.a,
    };
    SParams {
        s11: gamma(upstream),
        s21: Complex::new(T::zero(), T::zero()),
        s22: gamma(&rev),
    }
}
