//! Convergence tables: error rows per mesh size with successive rates,
//! rendered as CSV (full precision) or markdown (3 significant digits,
//! 2-decimal rates).

use crate::norms::rates;

/// Errors measured on one refinement level.
#[derive(Debug, Clone)]
pub struct ErrorRow {
    pub h: f64,
    pub linf: f64,
    pub h1: f64,
    pub w21: f64,
    pub w22: f64,
}

#[derive(Debug, Clone)]
pub struct ErrorReport {
    pub label: String,
    pub rows: Vec<ErrorRow>,
}

fn column(rows: &[ErrorRow], pick: fn(&ErrorRow) -> f64) -> Vec<f64> {
    rows.iter().map(pick).collect()
}

fn fmt_rate(r: Option<f64>) -> String {
    match r {
        Some(v) => format!("{v:.2}"),
        None => "--".into(),
    }
}

impl ErrorReport {
    /// Successive rates `log2(e_k / e_{k+1})` for each error column, aligned
    /// with the rows (first entry has no rate).
    pub fn rate_columns(&self) -> [Vec<Option<f64>>; 4] {
        let padded = |errs: Vec<f64>| {
            let mut col = vec![None];
            col.extend(rates(&errs));
            col
        };
        [
            padded(column(&self.rows, |r| r.linf)),
            padded(column(&self.rows, |r| r.h1)),
            padded(column(&self.rows, |r| r.w21)),
            padded(column(&self.rows, |r| r.w22)),
        ]
    }

    /// Full-precision CSV (shortest round-trip float formatting, so reruns
    /// of the same configuration are byte-identical).
    pub fn to_csv(&self) -> String {
        let [rl, rh, r1, r2] = self.rate_columns();
        let mut s = String::from("h,linf,linf_rate,h1,h1_rate,w21,w21_rate,w22,w22_rate\n");
        for (k, row) in self.rows.iter().enumerate() {
            let rate = |col: &Vec<Option<f64>>| col[k].map_or(String::new(), |v| v.to_string());
            s.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                row.h,
                row.linf,
                rate(&rl),
                row.h1,
                rate(&rh),
                row.w21,
                rate(&r1),
                row.w22,
                rate(&r2),
            ));
        }
        s
    }

    /// Markdown table in the classical convergence-study layout.
    pub fn to_markdown(&self) -> String {
        let [rl, rh, r1, r2] = self.rate_columns();
        let mut s = format!("### {}\n\n", self.label);
        s.push_str("| h | L-inf | rate | H1 | rate | W2_1 | rate | W2_2 | rate |\n");
        s.push_str("|---|-------|------|----|------|------|------|------|------|\n");
        for (k, row) in self.rows.iter().enumerate() {
            s.push_str(&format!(
                "| {} | {:.2e} | {} | {:.2e} | {} | {:.2e} | {} | {:.2e} | {} |\n",
                fmt_h(row.h),
                row.linf,
                fmt_rate(rl[k]),
                row.h1,
                fmt_rate(rh[k]),
                row.w21,
                fmt_rate(r1[k]),
                row.w22,
                fmt_rate(r2[k]),
            ));
        }
        s
    }
}

/// Mesh sizes print as 1/n when n = 1/h is a small integer, else as a float.
fn fmt_h(h: f64) -> String {
    let inv = 1.0 / h;
    if inv.fract().abs() < 1e-9 && inv >= 1.0 && inv < 1e6 {
        if inv == 1.0 {
            "1".into()
        } else {
            format!("1/{}", inv.round() as u64)
        }
    } else {
        h.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ErrorReport {
        ErrorReport {
            label: "sample".into(),
            rows: vec![
                ErrorRow { h: 0.5, linf: 4e-2, h1: 8e-2, w21: 2e-1, w22: 4e-1 },
                ErrorRow { h: 0.25, linf: 1e-2, h1: 2e-2, w21: 1e-1, w22: 2.82842712474619e-1 },
            ],
        }
    }

    #[test]
    fn csv_contains_rates_and_full_precision() {
        let csv = sample().to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("0.5,0.04,,"));
        assert!(lines[2].contains(",2,"), "{csv}"); // linf rate log2(4) = 2
        assert!(csv.contains("0.282842712474619"));
    }

    #[test]
    fn csv_is_deterministic() {
        assert_eq!(sample().to_csv(), sample().to_csv());
    }

    #[test]
    fn markdown_rounds_to_three_digits() {
        let md = sample().to_markdown();
        assert!(md.contains("| 1/2 |"), "{md}");
        assert!(md.contains("4.00e-2"), "{md}");
        assert!(md.contains("| 2.00 |"), "{md}");
        assert!(md.contains("| -- |"), "{md}");
    }
}
