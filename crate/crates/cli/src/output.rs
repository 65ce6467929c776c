//! CSV, JSON and SVG writers.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use xlab_core::measures;

use crate::config::System;
use crate::error::{CliError, CliResult};
use crate::experiment::{ConversionRecord, SampleRecord};

pub const CSV_HEADER: &str = "entanglement,purity,rank,family,sample_index";
pub const BOUNDARY_POINTS: usize = 500;

/// Plain decimal with 17 significant digits, no exponent.
pub fn decimal17(v: f64) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    if v == 0.0 {
        return "0.0000000000000000".into();
    }
    let sci = format!("{:.16e}", v.abs());
    let (mant, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    let digits: String = mant.chars().filter(|c| *c != '.').collect();
    let sign = if v < 0.0 { "-" } else { "" };
    let body = if exp >= 0 {
        let point = exp as usize + 1;
        if point >= digits.len() {
            format!("{digits}{}.0", "0".repeat(point - digits.len()))
        } else {
            format!("{}.{}", &digits[..point], &digits[point..])
        }
    } else {
        format!("0.{}{digits}", "0".repeat((-exp - 1) as usize))
    };
    format!("{sign}{body}")
}

fn opt(v: Option<f64>) -> String {
    v.map(decimal17).unwrap_or_default()
}

fn require_nonempty<T>(records: &[T]) -> CliResult<()> {
    if records.is_empty() {
        return Err(CliError::Config("no records to write".into()));
    }
    Ok(())
}

pub fn records_csv(records: &[SampleRecord]) -> CliResult<String> {
    require_nonempty(records)?;
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in records {
        let _ = writeln!(s, "{},{},{},{},{}", decimal17(r.entanglement), decimal17(r.purity), r.rank, r.family, r.sample_index);
    }
    Ok(s)
}

pub fn records_json(records: &[SampleRecord]) -> CliResult<String> {
    require_nonempty(records)?;
    Ok(serde_json::to_string_pretty(records).expect("records serialize") + "\n")
}

pub fn conversion_csv(records: &[ConversionRecord]) -> CliResult<String> {
    require_nonempty(records)?;
    let mut s = String::from(
        "sample_index,rank,input_concurrence,purity,output_concurrence,delta_c,anti_x,spectrum_error,attempts,success\n",
    );
    for r in records {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{}",
            r.sample_index,
            r.rank,
            decimal17(r.input_concurrence),
            decimal17(r.purity),
            opt(r.output_concurrence),
            decimal17(r.delta_c),
            opt(r.anti_x),
            opt(r.spectrum_error),
            r.attempts,
            r.success
        );
    }
    Ok(s)
}

pub fn curve_csv(points: &[(f64, f64)]) -> CliResult<String> {
    require_nonempty(points)?;
    let mut s = String::from("purity,entanglement\n");
    for (p, e) in points {
        let _ = writeln!(s, "{},{}", decimal17(*p), decimal17(*e));
    }
    Ok(s)
}

/// Writes to `path`, or to stdout when `path` is `None`.
pub fn write_text(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::io(p.display().to_string(), e)),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).and_then(|_| out.flush()).map_err(|e| CliError::io("stdout", e))
        }
    }
}

pub fn boundary(system: System, p: f64) -> f64 {
    let r = match system {
        System::TwoQubit => measures::mems_boundary_2x2(p),
        System::QubitQutrit => measures::mems_boundary_2x3(p),
    };
    r.expect("purity inside the boundary domain")
}

/// Boundary sampled at `n` evenly spaced purities from `1/d` to 1.
pub fn boundary_curve(system: System, n: usize) -> Vec<(f64, f64)> {
    let lo = system.min_purity();
    (0..n)
        .map(|k| {
            let p = if n <= 1 { 1.0 } else { lo + (1.0 - lo) * k as f64 / (n - 1) as f64 };
            (p, boundary(system, p.min(1.0)))
        })
        .collect()
}

const W: f64 = 640.0;
const H: f64 = 480.0;
const M: f64 = 50.0;

fn sx(p: f64, lo: f64) -> f64 {
    M + (p - lo) / (1.0 - lo) * (W - 2.0 * M)
}

fn sy(e: f64) -> f64 {
    H - M - e * (H - 2.0 * M)
}

/// Path data of the boundary polyline, `BOUNDARY_POINTS` vertices.
pub fn boundary_path(system: System) -> String {
    let lo = system.min_purity();
    let mut d = String::new();
    for (k, (p, e)) in boundary_curve(system, BOUNDARY_POINTS).into_iter().enumerate() {
        let _ = write!(d, "{}{:.3},{:.3}", if k == 0 { "M" } else { " L" }, sx(p, lo), sy(e));
    }
    d
}

/// Entanglement-purity scatter with the MEMS boundary overlaid.
pub fn scatter_svg(records: &[SampleRecord], system: System) -> CliResult<String> {
    require_nonempty(records)?;
    let lo = system.min_purity();
    let ylabel = match system {
        System::TwoQubit => "concurrence",
        System::QubitQutrit => "E_T1",
    };
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<path id="axes" d="M{M},{} L{M},{} L{},{}" fill="none" stroke="black"/>"#,
        M,
        H - M,
        W - M,
        H - M
    );
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">purity</text>"#, W / 2.0, H - 12.0);
    let _ = writeln!(s, r#"<text x="14" y="{}" transform="rotate(-90 14 {})" text-anchor="middle">{ylabel}</text>"#, H / 2.0, H / 2.0);
    let _ = writeln!(s, r#"<g id="samples" fill="steelblue" fill-opacity="0.5">"#);
    for r in records {
        let _ = writeln!(s, r#"<circle cx="{:.3}" cy="{:.3}" r="1.5"/>"#, sx(r.purity, lo), sy(r.entanglement));
    }
    s.push_str("</g>\n");
    let _ = writeln!(s, r#"<path id="boundary" d="{}" fill="none" stroke="crimson" stroke-width="1.5"/>"#, boundary_path(system));
    s.push_str("</svg>\n");
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_formatting() {
        assert_eq!(decimal17(0.5), "0.50000000000000000");
        assert_eq!(decimal17(1.0), "1.0000000000000000");
        assert_eq!(decimal17(-12.5), "-12.500000000000000");
        assert_eq!(decimal17(1e-3), "0.0010000000000000000");
        assert_eq!(decimal17(0.0), "0.0000000000000000");
        for v in [0.1, 1.0 / 3.0, 2.0f64.sqrt(), 1e-20, 123456.789] {
            assert_eq!(decimal17(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn boundary_path_has_expected_vertices() {
        let d = boundary_path(System::TwoQubit);
        assert_eq!(d.matches('L').count() + 1, BOUNDARY_POINTS);
    }
}
