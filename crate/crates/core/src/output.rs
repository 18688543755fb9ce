//! CSV emission. Numbers are printed with 12 significant digits, rows in
//! input order, LF line endings.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::scan::{SweepMatrix, TimeSeriesRow};

pub const TIME_SERIES_HEADER: [&str; 6] = [
    "omega_t",
    "f_sq",
    "discord",
    "classical_corr",
    "mutual_info",
    "concurrence",
];

/// `%.12g`-style formatting.
pub fn format_sig12(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci
        .split_once('e')
        .expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..12).contains(&exp) {
        let mantissa = trim_fraction(mantissa);
        return format!("{mantissa}e{exp}");
    }
    let decimals = (11 - exp) as usize;
    trim_fraction(&format!("{x:.decimals$}")).to_string()
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w)
}

pub fn write_time_series<W: Write>(rows: &[TimeSeriesRow], w: W) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::EmptyData);
    }
    let mut out = csv_writer(w);
    out.write_record(TIME_SERIES_HEADER)?;
    for r in rows {
        out.write_record(
            [
                r.omega_t,
                r.f_sq,
                r.discord,
                r.classical_corr,
                r.mutual_info,
                r.concurrence,
            ]
            .map(format_sig12),
        )?;
    }
    out.flush()?;
    Ok(())
}

/// First column `gamma_over_omega`, remaining header cells are the `Ωt`
/// values.
pub fn write_sweep<W: Write>(sweep: &SweepMatrix, w: W) -> Result<()> {
    if sweep.gammas.is_empty() || sweep.omega_t.is_empty() {
        return Err(Error::EmptyData);
    }
    let mut out = csv_writer(w);
    let header: Vec<String> = std::iter::once("gamma_over_omega".to_string())
        .chain(sweep.omega_t.iter().map(|&t| format_sig12(t)))
        .collect();
    out.write_record(&header)?;
    for (g, row) in sweep.gammas.iter().zip(&sweep.values) {
        let record: Vec<String> = std::iter::once(format_sig12(*g))
            .chain(row.iter().map(|&v| format_sig12(v)))
            .collect();
        out.write_record(&record)?;
    }
    out.flush()?;
    Ok(())
}

pub fn emit_time_series_csv(rows: &[TimeSeriesRow], path: impl AsRef<Path>) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::EmptyData);
    }
    let file = BufWriter::new(File::create(path)?);
    write_time_series(rows, file)
}

pub fn emit_sweep_csv(sweep: &SweepMatrix, path: impl AsRef<Path>) -> Result<()> {
    if sweep.gammas.is_empty() || sweep.omega_t.is_empty() {
        return Err(Error::EmptyData);
    }
    let file = BufWriter::new(File::create(path)?);
    write_sweep(sweep, file)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(t: f64) -> TimeSeriesRow {
        TimeSeriesRow {
            omega_t: t,
            f_sq: 1.0,
            discord: 0.1,
            classical_corr: 0.2,
            mutual_info: 0.3,
            concurrence: 0.0,
        }
    }

    #[test]
    fn significant_digit_formatting() {
        assert_eq!(format_sig12(0.0), "0");
        assert_eq!(format_sig12(1.0), "1");
        assert_eq!(format_sig12(0.1), "0.1");
        assert_eq!(format_sig12(1.0 / 3.0), "0.333333333333");
        assert_eq!(format_sig12(-2.0 / 3.0), "-0.666666666667");
        assert_eq!(format_sig12(123456.789), "123456.789");
        assert_eq!(format_sig12(1.5e-7), "1.5e-7");
        assert_eq!(
            format_sig12(std::f64::consts::PI * 1e15),
            "3.14159265359e15"
        );
        assert_eq!(format_sig12(0.00012345678901234), "0.000123456789012");
    }

    #[test]
    fn header_and_line_count() {
        let mut buf = Vec::new();
        write_time_series(&[row(0.0), row(0.5), row(1.0)], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(!text.contains('\r'));
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(
            lines[0],
            "omega_t,f_sq,discord,classical_corr,mutual_info,concurrence"
        );
        assert_eq!(lines[2], "0.5,1,0.1,0.2,0.3,0");
    }

    #[test]
    fn empty_input_rejected() {
        assert!(matches!(
            write_time_series(&[], Vec::new()),
            Err(Error::EmptyData)
        ));
    }

    #[test]
    fn sweep_layout() {
        let sweep = SweepMatrix {
            gammas: vec![0.01, 0.1],
            omega_t: vec![0.0, 1.0],
            values: vec![vec![0.5, 0.4], vec![0.5, 0.3]],
        };
        let mut buf = Vec::new();
        write_sweep(&sweep, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "gamma_over_omega,0,1\n0.01,0.5,0.4\n0.1,0.5,0.3\n"
        );
    }
}
