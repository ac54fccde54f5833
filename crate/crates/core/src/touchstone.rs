//! Touchstone v1 two-port (`.s2p`) reading and writing.
//!
//! Files are written as `# GHz S RI R <z_ref>` with 12 significant digits.
//! The reader accepts S-parameter files in RI, MA or DB format with any
//! frequency unit. Curves are reciprocal, so the s12 column is written as a
//! copy of s21 and ignored on input.

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::export::fmt12;
use crate::network::{wave_impedance, Incidence, Polarization};
use crate::{ResponseCurve, SMatrix};

const INCIDENCE_TAG: &str = "incidence";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataFormat {
    Ri,
    Ma,
    Db,
}

/// Parsed file contents.
#[derive(Debug, Clone)]
pub struct Touchstone {
    pub curve: ResponseCurve,
    /// Port reference impedance from the option line, Ω.
    pub reference: f64,
    pub comments: Vec<String>,
}

/// Renders a curve in the format [`write_touchstone`] produces.
pub fn format_touchstone(curve: &ResponseCurve) -> Result<String> {
    let inc = curve.incidence;
    let z_ref = wave_impedance(inc.theta(), inc.pol())?;
    let mut out = String::new();
    writeln!(
        out,
        "! {} {}",
        env!("CARGO_PKG_NAME"),
        env!("CARGO_PKG_VERSION")
    )
    .unwrap();
    writeln!(
        out,
        "! {INCIDENCE_TAG} theta_deg = {} polarization = {}",
        fmt12(inc.theta_deg()),
        inc.pol()
    )
    .unwrap();
    writeln!(out, "# GHz S RI R {}", fmt12(z_ref)).unwrap();
    for (f, s) in curve.freqs.iter().zip(&curve.s) {
        let cols = [s.s11, s.s21, s.s12(), s.s22];
        out.push_str(&fmt12(f / 1e9));
        for z in cols {
            write!(out, " {} {}", fmt12(z.re), fmt12(z.im)).unwrap();
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn write_touchstone(curve: &ResponseCurve, path: &Path) -> Result<()> {
    std::fs::write(path, format_touchstone(curve)?)?;
    Ok(())
}

pub fn read_touchstone(path: &Path) -> Result<ResponseCurve> {
    Ok(parse_touchstone(&std::fs::read_to_string(path)?)?.curve)
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

struct Options {
    scale: f64,
    format: DataFormat,
    reference: f64,
}

fn parse_option_line(line_no: usize, body: &str) -> Result<Options> {
    let mut opts = Options {
        scale: 1e9,
        format: DataFormat::Ma,
        reference: 50.0,
    };
    let mut tokens = body.split_whitespace();
    while let Some(tok) = tokens.next() {
        match tok.to_ascii_uppercase().as_str() {
            "HZ" => opts.scale = 1.0,
            "KHZ" => opts.scale = 1e3,
            "MHZ" => opts.scale = 1e6,
            "GHZ" => opts.scale = 1e9,
            "S" => {}
            "Y" | "Z" | "H" | "G" => {
                return Err(parse_err(
                    line_no,
                    format!("only S-parameters are supported, got `{tok}`"),
                ))
            }
            "RI" => opts.format = DataFormat::Ri,
            "MA" => opts.format = DataFormat::Ma,
            "DB" => opts.format = DataFormat::Db,
            "R" => {
                let v = tokens
                    .next()
                    .ok_or_else(|| parse_err(line_no, "`R` without a reference impedance"))?;
                opts.reference =
                    v.parse().ok().filter(|r: &f64| *r > 0.0).ok_or_else(|| {
                        parse_err(line_no, format!("bad reference impedance `{v}`"))
                    })?;
            }
            _ => return Err(parse_err(line_no, format!("unknown option `{tok}`"))),
        }
    }
    Ok(opts)
}

fn parse_incidence(comment: &str) -> Option<Incidence<f64>> {
    let rest = comment.trim().strip_prefix(INCIDENCE_TAG)?;
    let mut theta = None;
    let mut pol = None;
    let tokens: Vec<&str> = rest.split_whitespace().collect();
    for w in tokens.windows(3) {
        if w[1] != "=" {
            continue;
        }
        match w[0] {
            "theta_deg" => theta = w[2].parse::<f64>().ok(),
            "polarization" => pol = w[2].parse::<Polarization>().ok(),
            _ => {}
        }
    }
    Incidence::from_degrees(theta?, pol?).ok()
}

fn to_complex(format: DataFormat, x: f64, y: f64) -> Complex64 {
    match format {
        DataFormat::Ri => Complex64::new(x, y),
        DataFormat::Ma => Complex64::from_polar(x, y.to_radians()),
        DataFormat::Db => Complex64::from_polar(10f64.powf(x / 20.0), y.to_radians()),
    }
}

/// Parses Touchstone v1 two-port text. Incidence is restored from the
/// comment header this crate writes; other files default to normal incidence.
pub fn parse_touchstone(text: &str) -> Result<Touchstone> {
    let mut opts: Option<Options> = None;
    let mut comments = Vec::new();
    let mut freqs = Vec::new();
    let mut samples = Vec::new();
    let mut incidence = None;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let (data, comment) = match raw.split_once('!') {
            Some((d, c)) => (d, Some(c)),
            None => (raw, None),
        };
        if let Some(c) = comment {
            incidence = incidence.or_else(|| parse_incidence(c));
            comments.push(c.trim().to_string());
        }
        let data = data.trim();
        if data.is_empty() {
            continue;
        }
        if let Some(body) = data.strip_prefix('#') {
            if opts.is_some() {
                return Err(parse_err(line_no, "duplicate option line"));
            }
            opts = Some(parse_option_line(line_no, body)?);
            continue;
        }
        let o = opts
            .as_ref()
            .ok_or_else(|| parse_err(line_no, "data before the option line"))?;
        let nums = data
            .split_whitespace()
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|_| parse_err(line_no, format!("not a number: `{t}`")))
            })
            .collect::<Result<Vec<f64>>>()?;
        if nums.len() != 9 {
            return Err(parse_err(
                line_no,
                format!("expected 9 columns for a two-port, found {}", nums.len()),
            ));
        }
        let f = nums[0] * o.scale;
        if let Some(&prev) = freqs.last() {
            if !(f > prev) {
                return Err(parse_err(
                    line_no,
                    "frequencies must be strictly increasing",
                ));
            }
        }
        let z = |k: usize| to_complex(o.format, nums[k], nums[k + 1]);
        freqs.push(f);
        samples.push(SMatrix {
            s11: z(1),
            s21: z(3),
            s22: z(7),
        });
    }
    let o = opts.ok_or_else(|| parse_err(text.lines().count().max(1), "missing option line"))?;
    let curve = ResponseCurve::new(freqs, samples, incidence.unwrap_or_default())
        .map_err(|e| parse_err(0, e.to_string()))?;
    Ok(Touchstone {
        curve,
        reference: o.reference,
        comments,
    })
}
