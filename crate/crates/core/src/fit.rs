//! Circuit-value extraction from sampled |s21| by damped least squares.
//!
//! Reactive parameters are searched in log space, losses linearly. The
//! Jacobian is a central finite difference; steps are only accepted when the
//! residual norm falls.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fss::build;
use crate::network::Incidence;
use crate::response::sweep_at;
use crate::{CircuitParams, ResponseCurve};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FitParam {
    L,
    L1,
    C1,
    R,
    R1,
}

impl FitParam {
    pub fn name(&self) -> &'static str {
        match self {
            FitParam::L => "l",
            FitParam::L1 => "l1",
            FitParam::C1 => "c1",
            FitParam::R => "r",
            FitParam::R1 => "r1",
        }
    }

    pub fn get(&self, c: &CircuitParams) -> f64 {
        match self {
            FitParam::L => c.l,
            FitParam::L1 => c.l1,
            FitParam::C1 => c.c1,
            FitParam::R => c.r,
            FitParam::R1 => c.r1,
        }
    }

    pub fn set(&self, c: &mut CircuitParams, v: f64) {
        match self {
            FitParam::L => c.l = v,
            FitParam::L1 => c.l1 = v,
            FitParam::C1 => c.c1 = v,
            FitParam::R => c.r = v,
            FitParam::R1 => c.r1 = v,
        }
    }

    fn is_reactive(&self) -> bool {
        matches!(self, FitParam::L | FitParam::L1 | FitParam::C1)
    }

    fn to_internal(self, v: f64) -> f64 {
        if self.is_reactive() {
            v.ln()
        } else {
            v
        }
    }

    fn to_physical(self, x: f64) -> f64 {
        if self.is_reactive() {
            x.exp()
        } else {
            x
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub max_iterations: usize,
    /// Converged once ‖Δx‖/‖x‖ falls below this.
    pub step_tolerance: f64,
    /// ... or the residual norm improves by less than this.
    pub improvement_tolerance: f64,
    /// Relative central-difference step.
    pub fd_step: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            step_tolerance: 1e-8,
            improvement_tolerance: 1e-12,
            fd_step: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreeParam {
    pub param: FitParam,
    pub initial: f64,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone)]
pub struct FitProblem {
    /// Only |s21| is used.
    pub observed: ResponseCurve,
    /// Topology and every value not listed in `free`.
    pub template: CircuitParams,
    pub free: Vec<FreeParam>,
    pub options: FitOptions,
}

impl FitProblem {
    pub fn validate(&self) -> Result<()> {
        if self.free.is_empty() {
            return Err(Error::Input("fit needs at least one free parameter".into()));
        }
        for (i, p) in self.free.iter().enumerate() {
            if self.free[..i].iter().any(|q| q.param == p.param) {
                return Err(Error::Input(format!(
                    "parameter `{}` listed twice",
                    p.param.name()
                )));
            }
            let positive = !p.param.is_reactive() || p.lower > 0.0;
            if !(p.lower.is_finite()
                && p.upper.is_finite()
                && p.lower >= 0.0
                && positive
                && p.lower <= p.upper)
            {
                return Err(Error::Input(format!(
                    "bad bounds for `{}`: [{}, {}]",
                    p.param.name(),
                    p.lower,
                    p.upper
                )));
            }
            if !(p.initial >= p.lower && p.initial <= p.upper) {
                return Err(Error::Input(format!(
                    "initial `{}` = {} outside [{}, {}]",
                    p.param.name(),
                    p.initial,
                    p.lower,
                    p.upper
                )));
            }
        }
        if self.observed.len() < self.free.len() {
            return Err(Error::Input("fewer samples than free parameters".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct FitReport {
    pub params: CircuitParams,
    pub values: Vec<(FitParam, f64)>,
    /// ‖|s21_model| − |s21_obs|‖₂ at the returned point.
    pub residual_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Residual norm after each accepted step, starting from the initial guess.
    pub history: Vec<f64>,
}

struct Model<'a> {
    freqs: &'a [f64],
    target: Vec<f64>,
    incidence: Incidence<f64>,
    template: CircuitParams,
    free: &'a [FreeParam],
}

impl Model<'_> {
    fn circuit(&self, x: &DVector<f64>) -> CircuitParams {
        let mut c = self.template;
        for (p, &xi) in self.free.iter().zip(x.iter()) {
            p.param.set(&mut c, p.param.to_physical(xi));
        }
        c
    }

    fn residual(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        let net = build(&self.circuit(x))?;
        let curve = sweep_at(&net, self.freqs, self.incidence)?;
        Ok(DVector::from_iterator(
            self.target.len(),
            curve
                .s
                .iter()
                .zip(&self.target)
                .map(|(s, obs)| s.s21.norm() - obs),
        ))
    }

    fn jacobian(
        &self,
        x: &DVector<f64>,
        lo: &DVector<f64>,
        hi: &DVector<f64>,
        rel_step: f64,
    ) -> Result<DMatrix<f64>> {
        let mut j = DMatrix::zeros(self.target.len(), x.len());
        for k in 0..x.len() {
            let p = self.free[k].param;
            let h = if p.is_reactive() {
                rel_step
            } else {
                rel_step * x[k].abs().max(1e-3)
            };
            let (mut xm, mut xp) = (x.clone(), x.clone());
            let (mut span, mut up, mut down) = (2.0 * h, h, h);
            if x[k] - h < lo[k] {
                down = 0.0;
                span = h;
            } else if x[k] + h > hi[k] {
                up = 0.0;
                span = h;
            }
            xp[k] += up;
            xm[k] -= down;
            let col = (self.residual(&xp)? - self.residual(&xm)?) / span;
            j.set_column(k, &col);
        }
        Ok(j)
    }
}

fn clamp(x: &DVector<f64>, lo: &DVector<f64>, hi: &DVector<f64>) -> DVector<f64> {
    DVector::from_iterator(
        x.len(),
        x.iter()
            .zip(lo.iter().zip(hi.iter()))
            .map(|(v, (l, h))| v.max(*l).min(*h)),
    )
}

/// Largest change of a log-space coordinate per step (about 16%). Without it
/// the early Gauss–Newton steps from a start whose resonances sit far from the
/// observed ones leap onto the bounds.
const MAX_LOG_STEP: f64 = 0.15;

/// Levenberg–Marquardt on r_i = |s21_model(f_i)| − |s21_obs(f_i)|.
pub fn fit_circuit(problem: &FitProblem) -> Result<FitReport> {
    problem.validate()?;
    let opts = problem.options;
    let free = &problem.free;
    let model = Model {
        freqs: &problem.observed.freqs,
        target: problem.observed.s21_mag(),
        incidence: problem.observed.incidence,
        template: problem.template,
        free,
    };
    let map = |f: fn(&FreeParam) -> f64| {
        DVector::from_iterator(free.len(), free.iter().map(|p| p.param.to_internal(f(p))))
    };
    let lo = map(|p| p.lower);
    let hi = map(|p| p.upper);
    let mut x = map(|p| p.initial);

    let mut r = model.residual(&x)?;
    let mut norm = r.norm();
    let mut history = vec![norm];
    let mut lambda = 1e-3;
    let mut iterations = 0;
    let mut converged = norm == 0.0;

    while !converged && iterations < opts.max_iterations {
        iterations += 1;
        let j = model.jacobian(&x, &lo, &hi, opts.fd_step)?;
        let jtj = j.transpose() * &j;
        let grad = j.transpose() * &r;
        let scale_floor = jtj.diagonal().max() * 1e-12 + f64::MIN_POSITIVE;

        let mut accepted = None;
        let mut last_step = f64::INFINITY;
        for _ in 0..60 {
            let mut damped = jtj.clone();
            for i in 0..x.len() {
                damped[(i, i)] += lambda * jtj[(i, i)].max(scale_floor);
            }
            let Some(chol) = damped.cholesky() else {
                lambda *= 10.0;
                continue;
            };
            let mut delta = chol.solve(&(-&grad));
            let big = free
                .iter()
                .zip(delta.iter())
                .filter(|(p, _)| p.param.is_reactive())
                .fold(0.0f64, |m, (_, d)| m.max(d.abs()));
            if big > MAX_LOG_STEP {
                delta *= MAX_LOG_STEP / big;
            }
            let candidate = clamp(&(&x + &delta), &lo, &hi);
            last_step = (&candidate - &x).norm() / x.norm().max(1e-300);
            match model.residual(&candidate) {
                Ok(rc) if rc.norm() < norm => {
                    accepted = Some((candidate, rc));
                    lambda = (lambda / 10.0).max(1e-15);
                    break;
                }
                _ => {
                    lambda *= 10.0;
                    if last_step < opts.step_tolerance {
                        break;
                    }
                }
            }
        }

        match accepted {
            Some((candidate, rc)) => {
                let new_norm = rc.norm();
                let improvement = norm - new_norm;
                x = candidate;
                r = rc;
                norm = new_norm;
                history.push(norm);
                converged = norm == 0.0
                    || last_step < opts.step_tolerance
                    || improvement < opts.improvement_tolerance;
            }
            // No step reduces the residual: stationary to working precision
            // if the proposed steps have become negligible.
            None => {
                converged = last_step < opts.step_tolerance;
                break;
            }
        }
    }

    let params = model.circuit(&x);
    Ok(FitReport {
        values: free
            .iter()
            .map(|p| (p.param, p.param.get(&params)))
            .collect(),
        params,
        residual_norm: norm,
        iterations,
        converged,
        history,
    })
}
