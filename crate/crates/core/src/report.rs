//! CSV formatting shared by every table the crate emits.

use std::io::Write;

use crate::error::{Error, Result};

/// Formats `x` with 12 significant digits, trailing zeros trimmed.
pub fn fmt_sig(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let mag = x.abs().log10().floor() as i32;
    if !(-5..15).contains(&mag) {
        let s = format!("{:.11e}", x);
        let (mantissa, exp) = s.split_once('e').expect("exponent form");
        return format!("{}e{}", trim(mantissa), exp);
    }
    let decimals = (11 - mag).max(0) as usize;
    let s = format!("{:.*}", decimals, x);
    let s = trim(&s);
    if s == "-0" {
        "0".into()
    } else {
        s.to_string()
    }
}

/// Absolute resolution of information columns; smaller magnitudes are round-off.
pub const INFO_RESOLUTION: f64 = 1e-12;

/// [`fmt_sig`] for information quantities, printing `|x| < 1e-12` as `0`.
pub fn fmt_info(x: f64) -> String {
    if x.abs() < INFO_RESOLUTION {
        "0".into()
    } else {
        fmt_sig(x)
    }
}

fn trim(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Writes a header and rows as CSV.
pub fn write_csv<W: Write, H: AsRef<[u8]>, R: AsRef<[u8]>>(
    out: W,
    header: &[H],
    rows: impl IntoIterator<Item = Vec<R>>,
) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Config(format!("csv output failed: {e}"));
    writer.write_record(header).map_err(io)?;
    for row in rows {
        writer.write_record(&row).map_err(io)?;
    }
    writer
        .flush()
        .map_err(|e| Error::Config(format!("csv output failed: {e}")))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt_sig(0.12279029868), "0.12279029868");
        assert_eq!(fmt_sig(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_sig(1.0), "1");
        assert_eq!(fmt_info(-4.4e-16), "0");
        assert_eq!(fmt_info(0.1), "0.1");
        assert_eq!(fmt_sig(-2.5), "-2.5");
        assert_eq!(fmt_sig(123456.789012345), "123456.789012");
        assert_eq!(fmt_sig(1.5e-9), "1.5e-9");
        assert_eq!(fmt_sig(0.0), "0");
        assert_eq!(fmt_sig(f64::NEG_INFINITY), "-inf");
    }

    #[test]
    fn csv_round_trip_parse() {
        let mut buf = Vec::new();
        write_csv(&mut buf, &["a", "b"], vec![vec!["1", "2"], vec!["3", "4"]]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "a,b\n1,2\n3,4\n");
    }
}
