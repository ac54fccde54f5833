//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.
//!
//! Criteria are evaluated as stated; a failing criterion is reported, not
//! relaxed.

use std::path::Path;
use std::time::Instant;

use fss_core::analytics::{passband_freq, zero_freq};
use fss_core::config::parse_config;
use fss_core::export::{fmt12, mag_db};
use fss_core::fit::{fit_circuit, FitOptions, FitParam, FitProblem, FreeParam};
use fss_core::fss::{build_first_order, build_second_order, Element, Ladder, ShuntBranch};
use fss_core::metrics::extract_metrics;
use fss_core::network::{abcd_tline, cascade, Incidence, Line, Polarization, TwoPort};
use fss_core::response::{sweep_at, sweep_response, Grid};
use fss_core::runner::run_with_threads;
use fss_core::synthesis::{synthesize_lc, Design};
use fss_core::touchstone::{read_touchstone, write_touchstone};
use fss_core::CircuitParams;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const NH: f64 = 1e-9;
const PF: f64 = 1e-12;
const MM: f64 = 1e-3;
const GHZ: f64 = 1e9;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c1_published_response() -> Outcome {
    let p = CircuitParams::paper_second_order();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap();
    let t0 = Instant::now();
    let m = pool
        .install(|| {
            let net = build_second_order(&p)?;
            let c = sweep_response(
                &net,
                &Grid::new(1.0 * GHZ, 5.0 * GHZ, 2001)?,
                Incidence::normal(),
            )?;
            extract_metrics(&c)
        })
        .map_err(|e| e.to_string())?;
    let dt = t0.elapsed().as_secs_f64();
    let net = build_second_order(&p).unwrap();
    let at_27 = sweep_at(&net, &[2.7 * GHZ], Incidence::normal()).unwrap().s[0]
        .s21
        .norm();
    let detail = format!(
        "f_c = {:.4} GHz (want 2.70 ± 0.15), FBW = {:.2}% (want 8.5 ± 2), runtime {:.3} s; \
         [info] |s21(2.7 GHz)| = {at_27:.3}",
        m.f_c / GHZ,
        m.fbw * 100.0,
        dt
    );
    check(
        (m.f_c - 2.7 * GHZ).abs() <= 0.15 * GHZ && (m.fbw - 0.085).abs() <= 0.02 && dt < 1.0,
        detail,
    )
}

fn c2_analytic_consistency() -> Outcome {
    let p = CircuitParams {
        h: 0.0,
        ..CircuitParams::paper_first_order().lossless()
    };
    let c = sweep_response(
        &build_first_order(&p).map_err(|e| e.to_string())?,
        &Grid::new(1.0 * GHZ, 8.0 * GHZ, 7001).unwrap(),
        Incidence::normal(),
    )
    .map_err(|e| e.to_string())?;
    let m = extract_metrics(&c).map_err(|e| e.to_string())?;
    let zero = m.f_zero.ok_or("no transmission zero found")?;
    let (fp, fz) = (3.0767 * GHZ, 5.1206 * GHZ);
    let detail = format!(
        "peak {:.5} GHz ({:.3}% off), zero {:.5} GHz ({:.3}% off)",
        m.f_c / GHZ,
        rel(m.f_c, fp) * 100.0,
        zero / GHZ,
        rel(zero, fz) * 100.0
    );
    check(rel(m.f_c, fp) < 5e-3 && rel(zero, fz) < 5e-3, detail)
}

fn c3_zero_depth() -> Outcome {
    let lossless = CircuitParams::paper_first_order().lossless();
    let damped = CircuitParams {
        r1: 0.1,
        ..lossless
    };
    let depth = |p: &CircuitParams| -> Result<f64, String> {
        let fz = zero_freq(p.l1, p.c1).map_err(|e| e.to_string())?;
        let net = build_first_order(p).map_err(|e| e.to_string())?;
        let r = sweep_at(&net, &[fz], Incidence::normal()).map_err(|e| e.to_string())?;
        Ok(r.s[0].s21.norm())
    };
    let (a, b) = (depth(&lossless)?, depth(&damped)?);
    check(
        a <= 1e-6 && b <= 1e-3,
        format!("|s21(f_z)| = {a:.3e} lossless (≤ 1e-6), {b:.3e} with R1 = 0.1 Ω (≤ 1e-3)"),
    )
}

fn random_element(rng: &mut ChaCha8Rng, lossy: bool) -> Element<f64> {
    let loss = if lossy { 1.0 } else { 0.0 };
    match rng.random_range(0..3) {
        0 => Element::Shunt(ShuntBranch::Ring {
            r1: loss * rng.random_range(0.0..5.0),
            l1: rng.random_range(0.2..10.0) * NH,
            c1: rng.random_range(0.05..3.0) * PF,
        }),
        1 => Element::Shunt(ShuntBranch::Grid {
            r: loss * rng.random_range(0.0..5.0),
            l: rng.random_range(0.2..10.0) * NH,
        }),
        _ => Element::Line(Line {
            eps_r: rng.random_range(1.0..10.0),
            tan_delta: loss * rng.random_range(0.0..0.05),
            length: rng.random_range(0.0..20.0) * MM,
        }),
    }
}

fn random_incidence(rng: &mut ChaCha8Rng) -> Incidence<f64> {
    let pol = if rng.random_bool(0.5) {
        Polarization::Te
    } else {
        Polarization::Tm
    };
    Incidence::from_degrees(rng.random_range(0.0..80.0), pol).unwrap()
}

fn random_line(rng: &mut ChaCha8Rng) -> TwoPort<f64> {
    let line = Line {
        eps_r: rng.random_range(1.0..10.0),
        tan_delta: rng.random_range(0.0..0.02),
        length: rng.random_range(0.0..20.0) * MM,
    };
    abcd_tline(
        &line,
        rng.random_range(1.0..6.0) * GHZ,
        random_incidence(rng),
    )
    .unwrap()
}

fn c4_property_suites() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let grid = Grid::new(1.0 * GHZ, 6.0 * GHZ, 1001).unwrap();
    let (mut unit, mut passive, mut det, mut assoc) = (0f64, f64::NEG_INFINITY, 0f64, 0f64);
    let mut polar_mismatch = 0usize;
    for _ in 0..1000 {
        let n = rng.random_range(1..8);
        let lossless = Ladder::new((0..n).map(|_| random_element(&mut rng, false)).collect());
        let lossy = Ladder::new((0..n).map(|_| random_element(&mut rng, true)).collect());
        let inc = random_incidence(&mut rng);
        for s in &sweep_response(&lossless, &grid, inc)
            .map_err(|e| e.to_string())?
            .s
        {
            unit = unit.max((s.power_sum() - 1.0).abs());
        }
        for s in &sweep_response(&lossy, &grid, inc)
            .map_err(|e| e.to_string())?
            .s
        {
            passive = passive.max(s.power_sum() - 1.0);
        }
        let f = rng.random_range(1.0..6.0) * GHZ;
        let te = lossy.s_params(f, Incidence::from_degrees(0.0, Polarization::Te).unwrap());
        let tm = lossy.s_params(f, Incidence::from_degrees(0.0, Polarization::Tm).unwrap());
        polar_mismatch +=
            usize::from(te.map_err(|e| e.to_string())? != tm.map_err(|e| e.to_string())?);

        let ms: Vec<TwoPort<f64>> = (0..3).map(|_| random_line(&mut rng)).collect();
        let m = cascade(&ms).unwrap();
        det = det.max((m.determinant() - Complex64::new(1.0, 0.0)).norm());
        let left = ms[0].then(&ms[1]).then(&ms[2]);
        let right = ms[0].then(&ms[1].then(&ms[2]));
        assoc = assoc.max(left.max_rel_diff(&right));
    }
    check(
        unit < 1e-10 && passive <= 1e-12 && det < 1e-9 && assoc < 1e-12 && polar_mismatch == 0,
        format!(
            "max |Σ|s|²−1| {unit:.1e}, max passivity excess {passive:.1e}, max |det−1| {det:.1e}, \
             max assoc diff {assoc:.1e}, θ=0 TE/TM mismatches {polar_mismatch}"
        ),
    )
}

fn c5_width_trends() -> Outcome {
    let cfg = parse_config(
        r#"{"mode": "sweep-w", "sweep": {"w_mm": [0.6, 1.0, 1.4, 1.8, 2.2, 2.6]},
            "grid": {"f_start_ghz": 1, "f_stop_ghz": 6, "n_points": 2001}}"#,
    )
    .map_err(|e| e.to_string())?;
    let dir = tempfile::tempdir().unwrap();
    let out = run_with_threads(&cfg, dir.path(), 0).map_err(|e| e.to_string())?;
    let rows = out.summary["result"]["rows"].as_array().unwrap();
    let col = |k: &str| -> Vec<f64> {
        rows.iter()
            .map(|r| r["metrics"][k].as_f64().unwrap_or(f64::NAN))
            .collect()
    };
    let (fbw, q, fc) = (col("fbw"), col("q_loaded"), col("f_c_hz"));
    let dec = |v: &[f64]| v.windows(2).all(|w| w[1] < w[0]);
    let inc = |v: &[f64]| v.windows(2).all(|w| w[1] > w[0]);
    let fmt = |v: &[f64], s: f64| {
        v.iter()
            .map(|x| format!("{:.3}", x * s))
            .collect::<Vec<_>>()
            .join(" ")
    };
    check(
        out.failures == 0 && dec(&fbw) && inc(&q) && inc(&fc),
        format!(
            "FBW% [{}], Q [{}], f_c GHz [{}]",
            fmt(&fbw, 100.0),
            fmt(&q, 1.0),
            fmt(&fc, 1e-9)
        ),
    )
}

fn c6_oblique_stability() -> Outcome {
    let net =
        build_second_order(&CircuitParams::paper_second_order()).map_err(|e| e.to_string())?;
    let grid = Grid::new(1.0 * GHZ, 6.0 * GHZ, 2001).unwrap();
    let mut worst = (0.0, String::new());
    let mut worst_mid = 0f64;
    let mut physical = true;
    for pol in [Polarization::Te, Polarization::Tm] {
        let mut base = None;
        for theta in [0.0, 15.0, 30.0, 45.0] {
            let c = sweep_response(&net, &grid, Incidence::from_degrees(theta, pol).unwrap())
                .map_err(|e| e.to_string())?;
            physical &=
                c.s.iter()
                    .all(|s| s.is_finite() && s.power_sum() <= 1.0 + 1e-12);
            let m = extract_metrics(&c).map_err(|e| format!("{pol} {theta}°: {e}"))?;
            let mid = 0.5 * (m.f_lower + m.f_upper);
            let (f0, mid0) = *base.get_or_insert((m.f_c, mid));
            let drift = rel(m.f_c, f0);
            worst_mid = worst_mid.max(rel(mid, mid0));
            if drift >= worst.0 {
                worst = (drift, format!("{pol} {theta}°"));
            }
        }
    }
    check(
        worst.0 <= 0.05 && physical,
        format!(
            "worst peak drift {:.2}% at {} (limit 5%); finite & passive: {physical}; \
             [info] worst band-midpoint drift {:.2}%",
            worst.0 * 100.0,
            worst.1,
            worst_mid * 100.0
        ),
    )
}

fn c7_synthesis_round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut worst = 0f64;
    for _ in 0..1000 {
        let fp = rng.random_range(0.5..20.0) * GHZ;
        let d = Design::new(
            fp,
            fp * rng.random_range(1.01..5.0),
            rng.random_range(0.01..10.0) * PF,
        );
        let v = synthesize_lc(&d).map_err(|e| e.to_string())?;
        worst = worst
            .max(rel(passband_freq(v.l, v.l1, v.c1).unwrap(), d.f_p_target))
            .max(rel(zero_freq(v.l1, v.c1).unwrap(), d.f_z_target));
    }
    // Anchor: the frequencies the published element values produce.
    let (l, l1, c1) = (2.85 * NH, 1.61 * NH, 0.6 * PF);
    let anchor = Design::new(
        passband_freq(l, l1, c1).unwrap(),
        zero_freq(l1, c1).unwrap(),
        c1,
    );
    let a = synthesize_lc(&anchor).map_err(|e| e.to_string())?;
    let rounded =
        synthesize_lc(&Design::new(3.0767 * GHZ, 5.1206 * GHZ, c1)).map_err(|e| e.to_string())?;
    let (el, el1) = (rel(a.l, l), rel(a.l1, l1));
    check(
        worst < 1e-9 && el < 1e-6 && el1 < 1e-6,
        format!(
            "worst forward error {worst:.1e}; anchor L {:.6} nH ({el:.1e}), L1 {:.6} nH ({el1:.1e}); \
             [info] from 5-digit rounded targets: L {:.5} nH, L1 {:.5} nH",
            a.l / NH,
            a.l1 / NH,
            rounded.l / NH,
            rounded.l1 / NH
        ),
    )
}

fn c8_fit_recovery() -> Outcome {
    let truth = CircuitParams::paper_second_order();
    let observed = sweep_response(
        &build_second_order(&truth).unwrap(),
        &Grid::new(1.0 * GHZ, 5.0 * GHZ, 1001).unwrap(),
        Incidence::normal(),
    )
    .unwrap();
    let params = [FitParam::L, FitParam::L1, FitParam::C1];
    let (mut worst_err, mut worst_res, mut worst_it) = (0f64, 0f64, 0usize);
    let mut all_converged = true;
    for corner in 0..8u32 {
        let free = params
            .iter()
            .enumerate()
            .map(|(k, &p)| {
                let v = p.get(&truth);
                let s = if corner >> k & 1 == 1 { 1.3 } else { 0.7 };
                FreeParam {
                    param: p,
                    initial: v * s,
                    lower: v * 0.2,
                    upper: v * 5.0,
                }
            })
            .collect();
        let rep = fit_circuit(&FitProblem {
            observed: observed.clone(),
            template: truth,
            free,
            options: FitOptions::default(),
        })
        .map_err(|e| e.to_string())?;
        all_converged &= rep.converged;
        worst_res = worst_res.max(rep.residual_norm);
        worst_it = worst_it.max(rep.iterations);
        for (p, v) in &rep.values {
            worst_err = worst_err.max(rel(*v, p.get(&truth)));
        }
    }
    check(
        worst_err < 0.01 && worst_res < 1e-6 && worst_it <= 500,
        format!(
            "8 starts at ±30%: worst param error {:.2e}, worst residual {worst_res:.1e}, \
             max iterations {worst_it}, all converged: {all_converged}",
            worst_err
        ),
    )
}

fn csv_s21_db(text: &str, column: usize) -> Vec<f64> {
    text.lines()
        .skip(1)
        .map(|l| l.split(',').nth(column).unwrap().parse().unwrap())
        .collect()
}

fn read_dir_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                std::fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    v.sort();
    v
}

fn c9_io_round_trips() -> Outcome {
    let err = |e: fss_core::Error| e.to_string();
    let cfg = parse_config(
        r#"{"mode": "simulate",
            "circuit": {"order": 2, "l_nh": 2.85, "l1_nh": 1.61, "c1_pf": 0.6, "h_mm": 0.254, "h1_mm": 10},
            "incidence": {"theta_deg": [0, 30], "pol": ["TE", "TM"]},
            "grid": {"f_start_ghz": 1, "f_stop_ghz": 5, "n_points": 1001},
            "output": {"basename": "io"}}"#,
    )
    .map_err(err)?;
    let (d1, d2) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let o1 = run_with_threads(&cfg, d1.path(), 1).map_err(err)?;
    let o2 = run_with_threads(&cfg, d2.path(), 4).map_err(err)?;
    let identical =
        read_dir_bytes(d1.path()) == read_dir_bytes(d2.path()) && o1.summary == o2.summary;

    // Touchstone write → read against the in-memory curve.
    let net = build_second_order(&CircuitParams::paper_second_order()).unwrap();
    let inc = Incidence::from_degrees(30.0, Polarization::Tm).unwrap();
    let curve = sweep_response(&net, &Grid::new(1.0 * GHZ, 5.0 * GHZ, 1001).unwrap(), inc).unwrap();
    let path = d1.path().join("rt.s2p");
    write_touchstone(&curve, &path).map_err(err)?;
    let back = read_touchstone(&path).map_err(err)?;
    let mut ts_err = 0f64;
    for (a, b) in curve.s.iter().zip(&back.s) {
        ts_err = ts_err
            .max((a.s11 - b.s11).norm())
            .max((a.s21 - b.s21).norm())
            .max((a.s22 - b.s22).norm());
    }
    for (a, b) in curve.freqs.iter().zip(&back.freqs) {
        ts_err = ts_err.max(rel(*b, *a));
    }

    // CSV |s21| dB against the Touchstone files; analyze against simulate.
    let csv = std::fs::read_to_string(d1.path().join("io.csv")).unwrap();
    let conditions = o1.summary["result"]["conditions"].as_array().unwrap();
    let (mut db_err, mut an_err) = (0f64, 0f64);
    for (k, cond) in conditions.iter().enumerate() {
        let label = format!(
            "{}_{}deg",
            cond["pol"].as_str().unwrap(),
            fmt12(cond["theta_deg"].as_f64().unwrap())
        );
        let s2p = d1.path().join(format!("io_{label}.s2p"));
        let ts = read_touchstone(&s2p).map_err(err)?;
        for (db, s) in csv_s21_db(&csv, 2 + 2 * k).iter().zip(&ts.s) {
            db_err = db_err.max((db - mag_db(s.s21.norm())).abs());
        }
        let acfg = parse_config(&format!(
            r#"{{"mode": "analyze", "analyze": {{"input": {}}}}}"#,
            serde_json::to_string(&s2p).unwrap()
        ))
        .map_err(err)?;
        let a = run_with_threads(&acfg, d2.path(), 0).map_err(err)?;
        let (ma, ms) = (
            &a.summary["result"]["conditions"][0]["metrics"],
            &cond["metrics"],
        );
        for key in [
            "f_c_hz",
            "bw_3db_hz",
            "fbw",
            "q_loaded",
            "insertion_loss_db",
        ] {
            let (x, y) = (ma[key].as_f64().unwrap(), ms[key].as_f64().unwrap());
            an_err = an_err.max((x - y).abs() / y.abs().max(1.0));
        }
    }

    // Exit status tracks error artifacts.
    let bad =
        parse_config(r#"{"mode": "sweep-w", "sweep": {"w_mm": [1.0, 12.0]}}"#).map_err(err)?;
    let d3 = tempfile::tempdir().unwrap();
    let ob = run_with_threads(&bad, d3.path(), 0).map_err(err)?;
    let status_ok = o1.exit_code() == 0
        && ob.exit_code() != 0
        && d3.path().join("sweep_w_failures.csv").is_file()
        && !d1.path().join("io_failures.csv").exists();

    check(
        ts_err <= 1e-12 && db_err <= 1e-9 && an_err <= 1e-9 && identical && status_ok,
        format!(
            "Touchstone round trip {ts_err:.1e}, CSV vs s2p dB {db_err:.1e}, analyze vs simulate {an_err:.1e}, \
             byte-identical across thread counts: {identical}, exit status tracks failures: {status_ok}"
        ),
    )
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("1 published second-order response", c1_published_response),
        ("2 analytic-numeric consistency", c2_analytic_consistency),
        ("3 transmission-zero depth", c3_zero_depth),
        ("4 network property suites", c4_property_suites),
        ("5 strip-width trends", c5_width_trends),
        ("6 oblique stability", c6_oblique_stability),
        ("7 synthesis round trip", c7_synthesis_round_trip),
        ("8 fit recovery", c8_fit_recovery),
        ("9 IO round trips", c9_io_round_trips),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        match f() {
            Ok(d) => println!("PASS criterion {name}: {d}"),
            Err(d) => {
                failed += 1;
                println!("FAIL criterion {name}: {d}");
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
