//! JSON run configuration.
//!
//! Every dimensional field carries its unit as a key suffix (`l_nh`, `h_mm`,
//! `f_start_ghz`, ...). Unknown keys are rejected by name, and a key that
//! differs from a known one only in its unit suffix is reported as a unit
//! mismatch.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::fit::FitParam;
use crate::fss::{Calibration, Orientation, PAPER_C1, PAPER_L1};
use crate::network::{Incidence, Polarization};
use crate::{
    CalibrationConstants, CircuitParams, FrequencyGrid, GeometryParams, IncidenceCondition,
};

pub const DEFAULT_N_POINTS: usize = 1001;
pub const DEFAULT_F_START_GHZ: f64 = 1.0;
pub const DEFAULT_F_STOP_GHZ: f64 = 5.0;

const NH: f64 = 1e-9;
const PF: f64 = 1e-12;
const MM: f64 = 1e-3;
const GHZ: f64 = 1e9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Simulate,
    SweepW,
    Synthesize,
    Fit,
    Analyze,
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::Simulate => "simulate",
            Mode::SweepW => "sweep-w",
            Mode::Synthesize => "synthesize",
            Mode::Fit => "fit",
            Mode::Analyze => "analyze",
        }
    }

    fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "simulate" => Mode::Simulate,
            "sweep-w" => Mode::SweepW,
            "synthesize" => Mode::Synthesize,
            "fit" => Mode::Fit,
            "analyze" => Mode::Analyze,
            other => {
                return Err(Error::Config(format!(
                "unknown mode `{other}` (expected simulate, sweep-w, synthesize, fit or analyze)"
            )))
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthesisConfig {
    pub f_p: f64,
    pub f_z: f64,
    pub c1: f64,
    pub q_target: Option<f64>,
    pub fbw_target: Option<f64>,
    pub w_range: (f64, f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitBound {
    pub param: FitParam,
    pub initial: Option<f64>,
    pub bounds: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    pub input: PathBuf,
    pub free: Vec<FitBound>,
    pub max_iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    pub basename: String,
    pub csv: bool,
    pub touchstone: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mode: Mode,
    pub circuit: CircuitParams,
    pub orientation: Orientation,
    pub geometry: GeometryParams,
    pub calibration: CalibrationConstants,
    pub grid: FrequencyGrid,
    pub incidences: Vec<IncidenceCondition>,
    /// Strip widths for `sweep-w`, m.
    pub sweep_w: Vec<f64>,
    pub synthesis: Option<SynthesisConfig>,
    pub fit: Option<FitConfig>,
    pub analyze_input: Option<PathBuf>,
    pub output: OutputConfig,
}

const UNITS: &[&str] = &[
    "ohm_m", "nh", "ph", "uh", "h", "pf", "nf", "f", "ohm", "mm", "um", "m", "ghz", "mhz", "hz",
    "deg", "rad",
];

fn stem(key: &str) -> &str {
    for u in UNITS {
        if let Some(s) = key.strip_suffix(u).and_then(|s| s.strip_suffix('_')) {
            return s;
        }
    }
    key
}

fn check_keys(block: &str, obj: &Map<String, Value>, known: &[&str]) -> Result<()> {
    for key in obj.keys() {
        if known.contains(&key.as_str()) {
            continue;
        }
        if let Some(k) = known
            .iter()
            .find(|k| stem(k) == stem(key) && stem(key) != key.as_str())
        {
            return Err(Error::Config(format!(
                "unit-suffix mismatch in `{block}`: `{key}` should be `{k}`"
            )));
        }
        return Err(Error::Config(format!("unknown key `{key}` in `{block}`")));
    }
    Ok(())
}

fn block<'a>(
    root: &'a Map<String, Value>,
    name: &str,
    known: &[&str],
) -> Result<Option<&'a Map<String, Value>>> {
    match root.get(name) {
        None | Some(Value::Null) => Ok(None),
        Some(Value::Object(obj)) => {
            check_keys(name, obj, known)?;
            Ok(Some(obj))
        }
        Some(_) => Err(Error::Config(format!("`{name}` must be an object"))),
    }
}

fn typed<T>(block: &str, obj: Option<&Map<String, Value>>) -> Result<T>
where
    T: for<'de> Deserialize<'de> + Default,
{
    match obj {
        None => Ok(T::default()),
        Some(o) => serde_json::from_value(Value::Object(o.clone()))
            .map_err(|e| Error::Config(format!("in `{block}`: {e}"))),
    }
}

fn required<T>(v: Option<T>, field: &str, mode: Mode) -> Result<T> {
    v.ok_or_else(|| Error::Config(format!("`{field}` is required for mode `{}`", mode.name())))
}

#[derive(Debug, Default, Deserialize)]
struct RawCircuit {
    order: Option<u8>,
    l_nh: Option<f64>,
    l1_nh: Option<f64>,
    c1_pf: Option<f64>,
    r_ohm: Option<f64>,
    r1_ohm: Option<f64>,
    h_mm: Option<f64>,
    h1_mm: Option<f64>,
    eps_r: Option<f64>,
    tan_delta: Option<f64>,
    orientation: Option<String>,
}
const CIRCUIT_KEYS: &[&str] = &[
    "order",
    "l_nh",
    "l1_nh",
    "c1_pf",
    "r_ohm",
    "r1_ohm",
    "h_mm",
    "h1_mm",
    "eps_r",
    "tan_delta",
    "orientation",
];

#[derive(Debug, Default, Deserialize)]
struct RawGeometry {
    period_mm: Option<f64>,
    ring_side_mm: Option<f64>,
    ring_width_mm: Option<f64>,
    strip_width_mm: Option<f64>,
    spacer_mm: Option<f64>,
    eps_r: Option<f64>,
}
const GEOMETRY_KEYS: &[&str] = &[
    "period_mm",
    "ring_side_mm",
    "ring_width_mm",
    "strip_width_mm",
    "spacer_mm",
    "eps_r",
];

#[derive(Debug, Default, Deserialize)]
struct RawCalibration {
    k_l_nh: Option<f64>,
    k_r_ohm_m: Option<f64>,
    r1_default_ohm: Option<f64>,
}
const CALIBRATION_KEYS: &[&str] = &["k_l_nh", "k_r_ohm_m", "r1_default_ohm"];

#[derive(Debug, Default, Deserialize)]
struct RawGrid {
    f_start_ghz: Option<f64>,
    f_stop_ghz: Option<f64>,
    n_points: Option<usize>,
}
const GRID_KEYS: &[&str] = &["f_start_ghz", "f_stop_ghz", "n_points"];

#[derive(Debug, Default, Deserialize)]
struct RawIncidence {
    theta_deg: Option<Vec<f64>>,
    pol: Option<Vec<Polarization>>,
}
const INCIDENCE_KEYS: &[&str] = &["theta_deg", "pol"];

#[derive(Debug, Default, Deserialize)]
struct RawSweep {
    w_mm: Option<Vec<f64>>,
}
const SWEEP_KEYS: &[&str] = &["w_mm"];

#[derive(Debug, Default, Deserialize)]
struct RawSynthesis {
    f_p_ghz: Option<f64>,
    f_z_ghz: Option<f64>,
    c1_pf: Option<f64>,
    q_target: Option<f64>,
    fbw_target: Option<f64>,
    w_min_mm: Option<f64>,
    w_max_mm: Option<f64>,
}
const SYNTHESIS_KEYS: &[&str] = &[
    "f_p_ghz",
    "f_z_ghz",
    "c1_pf",
    "q_target",
    "fbw_target",
    "w_min_mm",
    "w_max_mm",
];

#[derive(Debug, Default, Deserialize)]
struct RawFit {
    input: Option<PathBuf>,
    free: Option<Vec<FitParam>>,
    initial: Option<Map<String, Value>>,
    bounds: Option<Map<String, Value>>,
    max_iterations: Option<usize>,
}
const FIT_KEYS: &[&str] = &["input", "free", "initial", "bounds", "max_iterations"];
/// Unit-suffixed names of fit parameters in `initial` / `bounds`, with scale to SI.
const FIT_PARAM_KEYS: &[(&str, FitParam, f64)] = &[
    ("l_nh", FitParam::L, NH),
    ("l1_nh", FitParam::L1, NH),
    ("c1_pf", FitParam::C1, PF),
    ("r_ohm", FitParam::R, 1.0),
    ("r1_ohm", FitParam::R1, 1.0),
];

#[derive(Debug, Default, Deserialize)]
struct RawAnalyze {
    input: Option<PathBuf>,
}
const ANALYZE_KEYS: &[&str] = &["input"];

#[derive(Debug, Default, Deserialize)]
struct RawOutput {
    basename: Option<String>,
    formats: Option<Vec<String>>,
}
const OUTPUT_KEYS: &[&str] = &["basename", "formats"];

const ROOT_KEYS: &[&str] = &[
    "mode",
    "circuit",
    "geometry",
    "calibration",
    "grid",
    "incidence",
    "sweep",
    "synthesis",
    "fit",
    "analyze",
    "output",
];

fn fit_values(block: &str, map: &Map<String, Value>) -> Result<Vec<(FitParam, Value)>> {
    let known: Vec<&str> = FIT_PARAM_KEYS.iter().map(|k| k.0).collect();
    check_keys(block, map, &known)?;
    Ok(FIT_PARAM_KEYS
        .iter()
        .filter_map(|(k, p, _)| map.get(*k).map(|v| (*p, v.clone())))
        .collect())
}

fn fit_scale(p: FitParam) -> f64 {
    FIT_PARAM_KEYS
        .iter()
        .find(|k| k.1 == p)
        .map(|k| k.2)
        .unwrap()
}

/// Parses and validates a configuration document, applying defaults.
/// Relative input paths are left as written; see [`RunConfig::resolve_paths`].
pub fn parse_config(text: &str) -> Result<RunConfig> {
    if text.trim().is_empty() {
        return Err(Error::Config("mode required".into()));
    }
    let root: Value =
        serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid JSON: {e}")))?;
    let Value::Object(root) = root else {
        return Err(Error::Config("configuration must be a JSON object".into()));
    };
    let mode = match root.get("mode") {
        None | Some(Value::Null) => return Err(Error::Config("mode required".into())),
        Some(Value::String(s)) => Mode::parse(s)?,
        Some(_) => return Err(Error::Config("`mode` must be a string".into())),
    };
    check_keys("root", &root, ROOT_KEYS)?;

    let rc: RawCircuit = typed("circuit", block(&root, "circuit", CIRCUIT_KEYS)?)?;
    let rg: RawGeometry = typed("geometry", block(&root, "geometry", GEOMETRY_KEYS)?)?;
    let rcal: RawCalibration = typed(
        "calibration",
        block(&root, "calibration", CALIBRATION_KEYS)?,
    )?;
    let rgrid: RawGrid = typed("grid", block(&root, "grid", GRID_KEYS)?)?;
    let rinc: RawIncidence = typed("incidence", block(&root, "incidence", INCIDENCE_KEYS)?)?;
    let rsweep: RawSweep = typed("sweep", block(&root, "sweep", SWEEP_KEYS)?)?;
    let rsyn: RawSynthesis = typed("synthesis", block(&root, "synthesis", SYNTHESIS_KEYS)?)?;
    let rfit: RawFit = typed("fit", block(&root, "fit", FIT_KEYS)?)?;
    let rana: RawAnalyze = typed("analyze", block(&root, "analyze", ANALYZE_KEYS)?)?;
    let rout: RawOutput = typed("output", block(&root, "output", OUTPUT_KEYS)?)?;

    let paper = CircuitParams::paper_first_order();
    let needs_circuit = matches!(mode, Mode::Simulate | Mode::Fit);
    let order = if needs_circuit {
        required(rc.order, "circuit.order", mode)?
    } else {
        rc.order.unwrap_or(1)
    };
    let l = if needs_circuit {
        required(rc.l_nh, "circuit.l_nh", mode)? * NH
    } else {
        rc.l_nh.map_or(paper.l, |v| v * NH)
    };
    let h1 = match order {
        2 => Some(required(rc.h1_mm, "circuit.h1_mm", mode)? * MM),
        _ => rc.h1_mm.map(|v| v * MM),
    };
    let circuit = CircuitParams {
        l,
        l1: rc.l1_nh.map_or(PAPER_L1, |v| v * NH),
        c1: rc.c1_pf.map_or(PAPER_C1, |v| v * PF),
        r: rc.r_ohm.unwrap_or(paper.r),
        r1: rc.r1_ohm.unwrap_or(paper.r1),
        h: rc.h_mm.map_or(paper.h, |v| v * MM),
        eps_r: rc.eps_r.unwrap_or(paper.eps_r),
        tan_delta: rc.tan_delta.unwrap_or(paper.tan_delta),
        h1,
        order,
    };
    if needs_circuit {
        circuit
            .validate()
            .map_err(|e| Error::Config(format!("circuit: {e}")))?;
    }
    let orientation = match rc.orientation.as_deref() {
        None | Some("identical") => Orientation::Identical,
        Some("mirrored") => Orientation::Mirrored,
        Some(o) => {
            return Err(Error::Config(format!(
                "circuit.orientation must be `identical` or `mirrored`, got `{o}`"
            )))
        }
    };

    let pg = GeometryParams::paper(crate::fss::PAPER_STRIP_WIDTH);
    let geometry = GeometryParams {
        period: rg.period_mm.map_or(pg.period, |v| v * MM),
        ring_side: rg.ring_side_mm.map_or(pg.ring_side, |v| v * MM),
        ring_width: rg.ring_width_mm.map_or(pg.ring_width, |v| v * MM),
        strip_width: rg.strip_width_mm.map_or(pg.strip_width, |v| v * MM),
        spacer: rg.spacer_mm.map_or(pg.spacer, |v| v * MM),
        eps_r: rg.eps_r.unwrap_or(pg.eps_r),
    };
    let dc = Calibration::default();
    let calibration = Calibration {
        k_l: rcal.k_l_nh.map_or(dc.k_l, |v| v * NH),
        k_r: rcal.k_r_ohm_m.unwrap_or(dc.k_r),
        r1_default: rcal.r1_default_ohm.unwrap_or(dc.r1_default),
    };
    if matches!(mode, Mode::SweepW | Mode::Synthesize) {
        geometry
            .validate()
            .map_err(|e| Error::Config(format!("geometry: {e}")))?;
        calibration
            .validate()
            .map_err(|e| Error::Config(format!("calibration: {e}")))?;
    }

    let grid = FrequencyGrid::new(
        rgrid.f_start_ghz.unwrap_or(DEFAULT_F_START_GHZ) * GHZ,
        rgrid.f_stop_ghz.unwrap_or(DEFAULT_F_STOP_GHZ) * GHZ,
        rgrid.n_points.unwrap_or(DEFAULT_N_POINTS),
    )
    .map_err(|e| Error::Config(format!("grid: {e}")))?;

    let thetas = rinc.theta_deg.unwrap_or_else(|| vec![0.0]);
    let pols = rinc.pol.unwrap_or_else(|| vec![Polarization::Te]);
    if thetas.is_empty() || pols.is_empty() {
        return Err(Error::Config("incidence lists must not be empty".into()));
    }
    let incidences = pols
        .iter()
        .flat_map(|&p| thetas.iter().map(move |&t| Incidence::from_degrees(t, p)))
        .collect::<Result<Vec<_>>>()
        .map_err(|e| Error::Config(format!("incidence: {e}")))?;

    let sweep_w = match mode {
        Mode::SweepW => {
            let mut w: Vec<f64> = required(rsweep.w_mm, "sweep.w_mm", mode)?
                .iter()
                .map(|v| v * MM)
                .collect();
            if w.is_empty() {
                return Err(Error::Config("`sweep.w_mm` must not be empty".into()));
            }
            w.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
            w
        }
        _ => rsweep
            .w_mm
            .unwrap_or_default()
            .iter()
            .map(|v| v * MM)
            .collect(),
    };

    let synthesis = match mode {
        Mode::Synthesize => Some(SynthesisConfig {
            f_p: required(rsyn.f_p_ghz, "synthesis.f_p_ghz", mode)? * GHZ,
            f_z: required(rsyn.f_z_ghz, "synthesis.f_z_ghz", mode)? * GHZ,
            c1: rsyn.c1_pf.map_or(PAPER_C1, |v| v * PF),
            q_target: rsyn.q_target,
            fbw_target: rsyn.fbw_target,
            w_range: (
                rsyn.w_min_mm.unwrap_or(0.6) * MM,
                rsyn.w_max_mm.unwrap_or(2.6) * MM,
            ),
        }),
        _ => None,
    };

    let fit = match mode {
        Mode::Fit => {
            let params = required(rfit.free, "fit.free", mode)?;
            let initial = match &rfit.initial {
                Some(m) => fit_values("fit.initial", m)?,
                None => vec![],
            };
            let bounds = match &rfit.bounds {
                Some(m) => fit_values("fit.bounds", m)?,
                None => vec![],
            };
            let mut free = Vec::with_capacity(params.len());
            for p in params {
                let s = fit_scale(p);
                let init = initial
                    .iter()
                    .find(|(q, _)| *q == p)
                    .map(|(_, v)| {
                        v.as_f64().map(|x| x * s).ok_or_else(|| {
                            Error::Config(format!("fit.initial.{} must be a number", p.name()))
                        })
                    })
                    .transpose()?;
                let b = bounds
                    .iter()
                    .find(|(q, _)| *q == p)
                    .map(|(_, v)| {
                        serde_json::from_value::<[f64; 2]>(v.clone())
                            .map(|[lo, hi]| (lo * s, hi * s))
                            .map_err(|_| {
                                Error::Config(format!(
                                    "fit.bounds.{} must be [lower, upper]",
                                    p.name()
                                ))
                            })
                    })
                    .transpose()?;
                free.push(FitBound {
                    param: p,
                    initial: init,
                    bounds: b,
                });
            }
            Some(FitConfig {
                input: required(rfit.input, "fit.input", mode)?,
                free,
                max_iterations: rfit.max_iterations.unwrap_or(500),
            })
        }
        _ => None,
    };

    let analyze_input = match mode {
        Mode::Analyze => Some(required(rana.input, "analyze.input", mode)?),
        _ => rana.input,
    };

    let formats = rout
        .formats
        .unwrap_or_else(|| vec!["csv".into(), "s2p".into()]);
    for f in &formats {
        if f != "csv" && f != "s2p" {
            return Err(Error::Config(format!(
                "unknown output format `{f}` (expected csv or s2p)"
            )));
        }
    }
    let output = OutputConfig {
        basename: rout
            .basename
            .unwrap_or_else(|| mode.name().replace('-', "_")),
        csv: formats.iter().any(|f| f == "csv"),
        touchstone: formats.iter().any(|f| f == "s2p"),
    };

    Ok(RunConfig {
        mode,
        circuit,
        orientation,
        geometry,
        calibration,
        grid,
        incidences,
        sweep_w,
        synthesis,
        fit,
        analyze_input,
        output,
    })
}

impl RunConfig {
    /// Makes input paths relative to `base` absolute and checks they exist.
    pub fn resolve_paths(&mut self, base: &Path) -> Result<()> {
        let fix = |p: &mut PathBuf| -> Result<()> {
            if p.is_relative() {
                *p = base.join(&*p);
            }
            if !p.is_file() {
                return Err(Error::Config(format!(
                    "input file `{}` does not exist",
                    p.display()
                )));
            }
            Ok(())
        };
        if let Some(fit) = &mut self.fit {
            fix(&mut fit.input)?;
        }
        if let Some(p) = &mut self.analyze_input {
            fix(p)?;
        }
        Ok(())
    }
}

/// Reads, parses and resolves a configuration file.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)?;
    let mut cfg = parse_config(&text)?;
    cfg.resolve_paths(path.parent().unwrap_or(Path::new(".")))?;
    Ok(cfg)
}
