//! Executes a [`RunConfig`]: writes data artifacts and builds the run summary.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde_json::{json, Value};

use crate::analytics::{passband_freq, unloaded_q, zero_freq};
use crate::config::{Mode, RunConfig};
use crate::error::{Error, Result};
use crate::export::{condition_label, fmt12, metrics_csv, response_csv, write_text, MetricsRow};
use crate::fit::{fit_circuit, FitOptions, FitProblem, FreeParam};
use crate::fss::{build_first_order, build_second_order_with, params_from_geometry, Ladder};
use crate::metrics::extract_metrics;
use crate::network::Incidence;
use crate::response::sweep_response;
use crate::synthesis::{loss_budget_for_q, synthesize_lc, width_for_bandwidth, Design};
use crate::touchstone::{read_touchstone, write_touchstone};
use crate::{CircuitParams, GeometryParams, PassbandMetrics, ResponseCurve};

/// Environment variable that overrides the default output directory.
pub const OUT_DIR_ENV: &str = "FSS_OUT_DIR";

#[derive(Debug, Clone)]
pub struct RunOutcome {
    /// Structured run summary, printed on standard output by the CLI.
    pub summary: Value,
    /// Files written, in creation order.
    pub artifacts: Vec<PathBuf>,
    /// Number of conditions / rows whose computation failed.
    pub failures: usize,
}

impl RunOutcome {
    /// 0 on full success, 6 when some rows or conditions failed.
    pub fn exit_code(&self) -> i32 {
        if self.failures == 0 {
            0
        } else {
            6
        }
    }
}

pub fn metrics_json(m: &PassbandMetrics) -> Value {
    json!({
        "f_c_hz": m.f_c,
        "insertion_loss_db": m.insertion_loss_db,
        "f_lower_hz": m.f_lower,
        "f_upper_hz": m.f_upper,
        "bw_3db_hz": m.bw_3db,
        "fbw": m.fbw,
        "q_loaded": m.q_loaded,
        "f_zero_hz": m.f_zero,
    })
}

fn circuit_json(c: &CircuitParams) -> Value {
    json!({
        "order": c.order,
        "l_h": c.l,
        "l1_h": c.l1,
        "c1_f": c.c1,
        "r_ohm": c.r,
        "r1_ohm": c.r1,
        "h_m": c.h,
        "h1_m": c.h1,
        "eps_r": c.eps_r,
        "tan_delta": c.tan_delta,
    })
}

fn incidence_json(inc: &Incidence<f64>) -> Value {
    json!({"theta_deg": inc.theta_deg(), "pol": inc.pol().to_string()})
}

/// Runs on a dedicated pool of `threads` workers (0 = one per core).
pub fn run_with_threads(cfg: &RunConfig, out_dir: &Path, threads: usize) -> Result<RunOutcome> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Usage(format!("thread pool: {e}")))?;
    pool.install(|| run(cfg, out_dir))
}

pub fn run(cfg: &RunConfig, out_dir: &Path) -> Result<RunOutcome> {
    std::fs::create_dir_all(out_dir)?;
    let mut out = Output {
        dir: out_dir,
        artifacts: Vec::new(),
    };
    let (body, failures) = match cfg.mode {
        Mode::Simulate => simulate(cfg, &mut out)?,
        Mode::SweepW => sweep_w(cfg, &mut out)?,
        Mode::Synthesize => synthesize(cfg, &mut out)?,
        Mode::Fit => fit(cfg, &mut out)?,
        Mode::Analyze => analyze(cfg)?,
    };
    let artifacts: Vec<String> = out
        .artifacts
        .iter()
        .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
        .collect();
    let summary = json!({
        "mode": cfg.mode.name(),
        "tool_version": env!("CARGO_PKG_VERSION"),
        "result": body,
        "failures": failures,
        "artifacts": artifacts,
    });
    Ok(RunOutcome {
        summary,
        artifacts: out.artifacts,
        failures,
    })
}

struct Output<'a> {
    dir: &'a Path,
    artifacts: Vec<PathBuf>,
}

impl Output<'_> {
    fn text(&mut self, name: &str, text: &str) -> Result<()> {
        let path = self.dir.join(name);
        write_text(&path, text)?;
        self.artifacts.push(path);
        Ok(())
    }

    fn touchstone(&mut self, name: &str, curve: &ResponseCurve) -> Result<()> {
        let path = self.dir.join(name);
        write_touchstone(curve, &path)?;
        self.artifacts.push(path);
        Ok(())
    }
}

fn condition_metrics(curve: &ResponseCurve) -> (Value, bool) {
    let mut v = incidence_json(&curve.incidence);
    match extract_metrics(curve) {
        Ok(m) => {
            v["metrics"] = metrics_json(&m);
            (v, true)
        }
        Err(e) => {
            v["error"] = json!(e.to_string());
            (v, false)
        }
    }
}

fn build_network(cfg: &RunConfig) -> Result<Ladder<f64>> {
    match cfg.circuit.order {
        1 => build_first_order(&cfg.circuit),
        _ => build_second_order_with(&cfg.circuit, cfg.orientation),
    }
}

fn simulate(cfg: &RunConfig, out: &mut Output) -> Result<(Value, usize)> {
    let net = build_network(cfg)?;
    let curves = cfg
        .incidences
        .par_iter()
        .map(|&inc| sweep_response(&net, &cfg.grid, inc))
        .collect::<Result<Vec<_>>>()?;

    let base = &cfg.output.basename;
    if cfg.output.csv {
        out.text(&format!("{base}.csv"), &response_csv(&curves)?)?;
    }
    if cfg.output.touchstone {
        for c in &curves {
            out.touchstone(&format!("{base}_{}.s2p", condition_label(c)), c)?;
        }
    }

    let mut failures = 0;
    let conditions: Vec<Value> = curves
        .iter()
        .map(|c| {
            let (v, ok) = condition_metrics(c);
            failures += usize::from(!ok);
            v
        })
        .collect();
    let p = &cfg.circuit;
    let q = unloaded_q(p.r, p.r1, p.l, p.l1, p.c1)?.value();
    let body = json!({
        "circuit": circuit_json(p),
        "analytic": {
            "passband_freq_hz": passband_freq(p.l, p.l1, p.c1)?,
            "zero_freq_hz": zero_freq(p.l1, p.c1)?,
            "unloaded_q": q,
        },
        "grid": {"f_start_hz": cfg.grid.f_start, "f_stop_hz": cfg.grid.f_stop, "n_points": cfg.grid.n_points},
        "conditions": conditions,
    });
    Ok((body, failures))
}

fn geometry_with(g: &GeometryParams, w: f64) -> GeometryParams {
    GeometryParams {
        strip_width: w,
        ..*g
    }
}

fn sweep_w(cfg: &RunConfig, out: &mut Output) -> Result<(Value, usize)> {
    let rows: Vec<MetricsRow> = cfg
        .sweep_w
        .par_iter()
        .map(|&w| {
            let metrics = params_from_geometry(
                &geometry_with(&cfg.geometry, w),
                &cfg.calibration,
                cfg.circuit.l1,
                cfg.circuit.c1,
            )
            .and_then(|p| build_first_order(&p))
            .and_then(|net| sweep_response(&net, &cfg.grid, Incidence::normal()))
            .and_then(|c| extract_metrics(&c))
            .map_err(|e| e.to_string());
            MetricsRow {
                // Rounded so 1.8 mm is not reported as 1.8000000000000003.
                sweep_value: fmt12(w * 1e3).parse().unwrap_or(w * 1e3),
                metrics,
            }
        })
        .collect();
    let failures = rows.iter().filter(|r| r.metrics.is_err()).count();
    let (table, failed) = metrics_csv(&rows, "w_mm");
    let base = &cfg.output.basename;
    out.text(&format!("{base}.csv"), &table)?;
    if failures > 0 {
        out.text(&format!("{base}_failures.csv"), &failed)?;
    }
    let body = json!({
        "rows": rows.iter().map(|r| {
            let mut v = json!({"w_mm": r.sweep_value});
            match &r.metrics {
                Ok(m) => v["metrics"] = metrics_json(m),
                Err(e) => v["error"] = json!(e),
            }
            v
        }).collect::<Vec<_>>(),
    });
    Ok((body, failures))
}

fn synthesize(cfg: &RunConfig, out: &mut Output) -> Result<(Value, usize)> {
    let s = cfg.synthesis.as_ref().expect("validated synthesis block");
    let lc = synthesize_lc(&Design::new(s.f_p, s.f_z, s.c1))?;
    let mut body = json!({
        "targets": {"f_p_hz": s.f_p, "f_z_hz": s.f_z, "c1_f": s.c1},
        "l_h": lc.l,
        "l1_h": lc.l1,
        "c1_f": lc.c1,
        "check": {
            "passband_freq_hz": passband_freq(lc.l, lc.l1, lc.c1)?,
            "zero_freq_hz": zero_freq(lc.l1, lc.c1)?,
        },
    });
    if let Some(q) = s.q_target {
        body["q_target"] = json!(q);
        body["loss_budget_ohm"] = json!(loss_budget_for_q(q, lc.l, lc.l1, lc.c1)?);
    }
    let mut failures = 0;
    if let Some(fbw) = s.fbw_target {
        body["fbw_target"] = json!(fbw);
        match width_for_bandwidth(
            fbw,
            &cfg.geometry,
            &cfg.calibration,
            lc.l1,
            lc.c1,
            s.w_range,
            &cfg.grid,
        ) {
            Ok(w) => body["strip_width_m"] = json!(w),
            Err(e) => {
                failures += 1;
                body["strip_width_error"] = json!(e.to_string());
            }
        }
    }
    out.text(
        &format!("{}.json", cfg.output.basename),
        &format!("{}\n", serde_json::to_string_pretty(&body).unwrap()),
    )?;
    Ok((body, failures))
}

fn fit(cfg: &RunConfig, out: &mut Output) -> Result<(Value, usize)> {
    let f = cfg.fit.as_ref().expect("validated fit block");
    let observed = read_touchstone(&f.input)?;
    let free: Vec<FreeParam> = f
        .free
        .iter()
        .map(|b| {
            let initial = b.initial.unwrap_or_else(|| b.param.get(&cfg.circuit));
            let (lower, upper) = b.bounds.unwrap_or(if initial > 0.0 {
                (initial * 0.2, initial * 5.0)
            } else {
                (0.0, 1.0)
            });
            FreeParam {
                param: b.param,
                initial,
                lower,
                upper,
            }
        })
        .collect();
    let report = fit_circuit(&FitProblem {
        observed,
        template: cfg.circuit,
        free: free.clone(),
        options: FitOptions {
            max_iterations: f.max_iterations,
            ..FitOptions::default()
        },
    })?;
    let body = json!({
        "input": f.input.file_name().map(|n| n.to_string_lossy().into_owned()),
        "parameters": report.values.iter().zip(&free).map(|((p, v), fp)| {
            json!({"name": p.name(), "value": v, "initial": fp.initial, "lower": fp.lower, "upper": fp.upper})
        }).collect::<Vec<_>>(),
        "circuit": circuit_json(&report.params),
        "residual_norm": report.residual_norm,
        "iterations": report.iterations,
        "converged": report.converged,
    });
    out.text(
        &format!("{}.json", cfg.output.basename),
        &format!("{}\n", serde_json::to_string_pretty(&body).unwrap()),
    )?;
    Ok((body, usize::from(!report.converged)))
}

fn analyze(cfg: &RunConfig) -> Result<(Value, usize)> {
    let path = cfg.analyze_input.as_ref().expect("validated analyze block");
    let curve = read_touchstone(path)?;
    let (cond, ok) = condition_metrics(&curve);
    let body = json!({
        "input": path.file_name().map(|n| n.to_string_lossy().into_owned()),
        "n_points": curve.len(),
        "conditions": [cond],
    });
    Ok((body, usize::from(!ok)))
}
