//! CSV export and the fixed-precision number format shared by text outputs.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::{PassbandMetrics, ResponseCurve};

/// Text outputs never go below this many dB.
pub const DB_FLOOR: f64 = -200.0;

/// Shortest `%.{sig}g`-style rendering: `sig` significant digits, trailing
/// zeros trimmed, exponent form outside [1e-5, 10^sig).
pub fn fmt_sig(x: f64, sig: usize) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.*e}", sig - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -5 || exp >= sig as i32 {
        let m = trim_zeros(mantissa);
        return format!("{m}e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs());
    }
    let decimals = (sig as i32 - 1 - exp).max(0) as usize;
    trim_zeros(&format!("{:.*}", decimals, x)).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn fmt12(x: f64) -> String {
    fmt_sig(x, 12)
}

/// 20·log10|z| floored at [`DB_FLOOR`].
pub fn mag_db(mag: f64) -> f64 {
    if mag <= 0.0 {
        return DB_FLOOR;
    }
    (20.0 * mag.log10()).max(DB_FLOOR)
}

/// Column-group label of an incidence condition, e.g. `TE_15deg`.
pub fn condition_label(curve: &ResponseCurve) -> String {
    format!(
        "{}_{}deg",
        curve.incidence.pol(),
        fmt_sig(curve.incidence.theta_deg(), 6)
    )
}

/// `f_GHz` followed by `|s11|` and `|s21|` in dB for each curve. All curves
/// must share one frequency list.
pub fn response_csv(curves: &[ResponseCurve]) -> Result<String> {
    let first = curves
        .first()
        .ok_or_else(|| Error::Input("no curves to export".into()))?;
    if curves.iter().any(|c| c.freqs != first.freqs) {
        return Err(Error::Input("curves do not share a frequency grid".into()));
    }
    let mut out = String::from("f_GHz");
    for c in curves {
        let label = condition_label(c);
        write!(out, ",s11_dB_{label},s21_dB_{label}").unwrap();
    }
    out.push('\n');
    for (i, f) in first.freqs.iter().enumerate() {
        out.push_str(&fmt12(f / 1e9));
        for c in curves {
            let s = &c.s[i];
            write!(
                out,
                ",{},{}",
                fmt12(mag_db(s.s11.norm())),
                fmt12(mag_db(s.s21.norm()))
            )
            .unwrap();
        }
        out.push('\n');
    }
    Ok(out)
}

/// One row of a metrics table. `metrics` is `Err` for rows whose extraction failed.
#[derive(Debug, Clone)]
pub struct MetricsRow {
    pub sweep_value: f64,
    pub metrics: std::result::Result<PassbandMetrics, String>,
}

pub const METRICS_HEADER: &str =
    "w_mm,f_c_GHz,bw_3db_GHz,fbw,q_loaded,insertion_loss_dB,f_zero_GHz";

/// Successful rows as a table, failed rows as `(value, message)` pairs.
pub fn metrics_csv(rows: &[MetricsRow], sweep_header: &str) -> (String, String) {
    let mut ok = METRICS_HEADER.replacen("w_mm", sweep_header, 1);
    ok.push('\n');
    let mut failed = format!("{sweep_header},error\n");
    for row in rows {
        match &row.metrics {
            Ok(m) => {
                writeln!(
                    ok,
                    "{},{},{},{},{},{},{}",
                    fmt12(row.sweep_value),
                    fmt12(m.f_c / 1e9),
                    fmt12(m.bw_3db / 1e9),
                    fmt12(m.fbw),
                    fmt12(m.q_loaded),
                    fmt12(m.insertion_loss_db),
                    m.f_zero.map(|z| fmt12(z / 1e9)).unwrap_or_default()
                )
                .unwrap();
            }
            Err(e) => {
                writeln!(
                    failed,
                    "{},\"{}\"",
                    fmt12(row.sweep_value),
                    e.replace('"', "'")
                )
                .unwrap();
            }
        }
    }
    (ok, failed)
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digit_format() {
        assert_eq!(fmt12(1.0), "1");
        assert_eq!(fmt12(0.0), "0");
        assert_eq!(fmt12(-0.0), "0");
        assert_eq!(fmt12(2.7), "2.7");
        assert_eq!(fmt12(376.73), "376.73");
        assert_eq!(fmt12(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt12(-123456.789), "-123456.789");
        assert_eq!(fmt12(1.5e-7), "1.5e-07");
        assert_eq!(fmt12(6.02214076e23), "6.02214076e+23");
        assert_eq!(fmt12(999999999999.9), "1e+12");
        for x in [0.1234567890123456, 7.77e-3, -4.2e-12, 123.456] {
            let back: f64 = fmt12(x).parse().unwrap();
            assert!(((back - x) / x).abs() < 5e-12);
        }
    }

    #[test]
    fn db_floor() {
        assert_eq!(mag_db(0.0), DB_FLOOR);
        assert_eq!(mag_db(1e-20), DB_FLOOR);
        assert!((mag_db(0.5) + 6.0206).abs() < 1e-4);
    }
}
