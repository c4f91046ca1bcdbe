use std::fs::File;
use std::io::Write;
use std::path::Path;

use crate::error::Result;

use super::sweep::SweepRow;

pub const CSV_HEADER: [&str; 10] = [
    "model",
    "h_km",
    "lambda_per_km2",
    "gamma_db",
    "coverage_lower",
    "coverage_upper",
    "ase_lower",
    "ase_upper",
    "mc_coverage",
    "mc_halfwidth",
];

/// `%g` with six significant digits: plain notation for exponents in
/// `[-4, 6)`, scientific otherwise, trailing zeros dropped.
pub fn format_sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').unwrap();
    let exp: i32 = exp.parse().unwrap();
    if (-4..6).contains(&exp) {
        let decimals = (5 - exp) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn cell(v: Option<f64>) -> String {
    v.map(format_sig6).unwrap_or_default()
}

pub fn write_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            r.model.clone(),
            format_sig6(r.h_km),
            format_sig6(r.lambda_per_km2),
            format_sig6(r.gamma_db),
            cell(r.coverage_lower),
            cell(r.coverage_upper),
            cell(r.ase_lower),
            cell(r.ase_upper),
            cell(r.mc_coverage),
            cell(r.mc_halfwidth),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv_file(rows: &[SweepRow], path: impl AsRef<Path>) -> Result<()> {
    write_csv(rows, File::create(path)?)
}
