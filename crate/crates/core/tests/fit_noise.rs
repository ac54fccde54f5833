//! Fit robustness against measurement noise on |s21|.

use fss_core::fit::{fit_circuit, FitOptions, FitParam, FitProblem, FreeParam};
use fss_core::fss::build_second_order;
use fss_core::network::Incidence;
use fss_core::response::{sweep_response, Grid};
use fss_core::CircuitParams;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const PARAMS: [FitParam; 3] = [FitParam::L, FitParam::L1, FitParam::C1];

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

#[test]
fn noisy_fits_stay_within_five_percent() {
    let truth = CircuitParams::paper_second_order();
    let clean = sweep_response(
        &build_second_order(&truth).unwrap(),
        &Grid::new(1e9, 5e9, 401).unwrap(),
        Incidence::normal(),
    )
    .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut errors = vec![Vec::new(); PARAMS.len()];
    for _ in 0..20 {
        let mut noisy = clean.clone();
        for s in &mut noisy.s {
            // Uniform on ±√3·σ has standard deviation σ = 0.01.
            let n = rng.random_range(-1.0..1.0) * 0.01 * 3f64.sqrt();
            let mag = (s.s21.norm() + n).max(0.0);
            s.s21 = num_complex::Complex64::from_polar(mag, s.s21.arg());
        }
        let free = PARAMS
            .iter()
            .map(|&p| {
                let v = p.get(&truth);
                FreeParam {
                    param: p,
                    initial: v * rng.random_range(0.85..1.15),
                    lower: v * 0.2,
                    upper: v * 5.0,
                }
            })
            .collect();
        let rep = fit_circuit(&FitProblem {
            observed: noisy,
            template: truth,
            free,
            options: FitOptions::default(),
        })
        .unwrap();
        for (k, (p, v)) in rep.values.iter().enumerate() {
            let t = p.get(&truth);
            errors[k].push(((v - t) / t).abs());
        }
    }
    for (p, e) in PARAMS.iter().zip(errors) {
        let m = median(e);
        assert!(m < 0.05, "{}: median relative error {m}", p.name());
    }
}
