//! Flat-file output helpers.

use std::fmt::Write as _;

/// 17 significant digits: enough to round-trip any `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// CSV text from a header and rows of numbers.
pub fn csv_table<'a>(header: &[&str], rows: impl IntoIterator<Item = &'a [f64]>) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let mut first = true;
        for x in row {
            if !first {
                out.push(',');
            }
            first = false;
            write!(out, "{}", fmt_f64(*x)).unwrap();
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_exactly() {
        for x in [0.1, 1.0 / 3.0, std::f64::consts::PI, 1e-300, -2.5e17, 0.0] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn table_layout() {
        let rows = [vec![1.0, 0.5], vec![2.0, 0.25]];
        let text = csv_table(&["a", "b"], rows.iter().map(|r| r.as_slice()));
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "a,b");
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[2].split(',').count(), 2);
    }
}
