//! Error tables and experimental orders of convergence.

use std::io::Write;

use crate::error::{Error, Result};

/// Column names of an [`ErrorRow`], in CSV order.
pub const COLUMNS: [&str; 14] = [
    "h",
    "y_L2",
    "y_H1",
    "p_L2",
    "phi1_L2",
    "phi1_H1",
    "r1_L2",
    "phi2_L2",
    "phi2_H1",
    "r2_L2",
    "u1_L2",
    "u2_L2",
    "Pu1_minus_u1h_L2",
    "Pu2_minus_u2h_L2",
];

/// Errors of one discrete equilibrium against the exact one.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ErrorRow {
    pub h: f64,
    pub y_l2: f64,
    pub y_h1: f64,
    pub p_l2: f64,
    pub phi_l2: [f64; 2],
    pub phi_h1: [f64; 2],
    pub r_l2: [f64; 2],
    pub u_l2: [f64; 2],
    /// `‖P_i u_i − u_{i,h}‖`
    pub projected_u_l2: [f64; 2],
}

impl ErrorRow {
    /// Values in [`COLUMNS`] order.
    pub fn values(&self) -> [f64; 14] {
        [
            self.h,
            self.y_l2,
            self.y_h1,
            self.p_l2,
            self.phi_l2[0],
            self.phi_h1[0],
            self.r_l2[0],
            self.phi_l2[1],
            self.phi_h1[1],
            self.r_l2[1],
            self.u_l2[0],
            self.u_l2[1],
            self.projected_u_l2[0],
            self.projected_u_l2[1],
        ]
    }

    /// The error columns (everything but `h`) scaled by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        let m2 = |v: [f64; 2]| [s * v[0], s * v[1]];
        Self {
            h: self.h,
            y_l2: s * self.y_l2,
            y_h1: s * self.y_h1,
            p_l2: s * self.p_l2,
            phi_l2: m2(self.phi_l2),
            phi_h1: m2(self.phi_h1),
            r_l2: m2(self.r_l2),
            u_l2: m2(self.u_l2),
            projected_u_l2: m2(self.projected_u_l2),
        }
    }
}

/// `log(e_j / e_{j+1}) / log(h_j / h_{j+1})`.
pub fn eoc(e: &[f64], h: &[f64]) -> Vec<f64> {
    e.windows(2)
        .zip(h.windows(2))
        .map(|(e, h)| (e[0] / e[1]).ln() / (h[0] / h[1]).ln())
        .collect()
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ErrorReport {
    pub rows: Vec<ErrorRow>,
}

impl ErrorReport {
    pub fn new(rows: Vec<ErrorRow>) -> Self {
        Self { rows }
    }

    /// Column `name` of every row.
    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let k = COLUMNS
            .iter()
            .position(|c| *c == name)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown error column '{name}'")))?;
        Ok(self.rows.iter().map(|r| r.values()[k]).collect())
    }

    /// EOC between consecutive rows for every error column; entry `j` compares
    /// rows `j` and `j + 1`. The `h` slot holds the mesh ratio.
    pub fn eoc_rows(&self) -> Vec<[f64; 14]> {
        self.rows
            .windows(2)
            .map(|w| {
                let (a, b) = (w[0].values(), w[1].values());
                let mut out = [0.0; 14];
                out[0] = a[0] / b[0];
                for k in 1..14 {
                    out[k] = (a[k] / b[k]).ln() / (a[0] / b[0]).ln();
                }
                out
            })
            .collect()
    }

    /// EOC of column `name`.
    pub fn eoc(&self, name: &str) -> Result<Vec<f64>> {
        let h = self.column("h")?;
        Ok(eoc(&self.column(name)?, &h))
    }

    /// CSV with a leading `row` column: mesh rows are numbered from 0 and EOC
    /// rows, interleaved between the meshes they compare, are labelled `EOC`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let header = std::iter::once("row").chain(COLUMNS);
        w.write_record(header).map_err(csv_error)?;
        let eocs = self.eoc_rows();
        for (j, row) in self.rows.iter().enumerate() {
            let values = row.values();
            let rec = std::iter::once(j.to_string()).chain(values.iter().map(|v| format!("{v:e}")));
            w.write_record(rec).map_err(csv_error)?;
            if let Some(e) = eocs.get(j) {
                let rec = std::iter::once("EOC".to_string()).chain(e.iter().map(|v| format!("{v:.4}")));
                w.write_record(rec).map_err(csv_error)?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    fn row(h: f64, e: f64) -> ErrorRow {
        ErrorRow {
            h,
            y_l2: e,
            y_h1: 2.0 * e,
            p_l2: e,
            phi_l2: [e, e],
            phi_h1: [e, e],
            r_l2: [e, e],
            u_l2: [e, e],
            projected_u_l2: [e, e],
        }
    }

    #[test]
    fn synthetic_second_order_sequence() {
        let r = eoc(&[1.0, 0.25, 1.0 / 16.0], &[1.0, 0.5, 0.25]);
        assert_eq!(r, vec![2.0, 2.0]);
    }

    #[test]
    fn csv_layout() {
        let report = ErrorReport::new(vec![row(0.5, 1.0), row(0.25, 0.125)]);
        let mut buf = Vec::new();
        report.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert!(lines[0].starts_with("row,h,y_L2,y_H1,p_L2,phi1_L2"));
        assert!(lines[0].ends_with("Pu2_minus_u2h_L2"));
        assert!(lines[1].starts_with("0,"));
        assert!(lines[2].starts_with("EOC,2.0000,3.0000"));
        assert!(lines[3].starts_with("1,"));
        assert_eq!(report.eoc("y_H1").unwrap(), vec![3.0]);
        assert!(report.column("nope").is_err());
    }

    proptest! {
        #[test]
        fn eoc_is_scale_invariant(
            e in prop::collection::vec(1e-8f64..1.0, 3..6),
            s in 1e-6f64..1e6,
        ) {
            let h: Vec<f64> = (0..e.len()).map(|j| 0.5f64.powi(j as i32)).collect();
            let scaled: Vec<f64> = e.iter().map(|v| v * s).collect();
            for (a, b) in eoc(&e, &h).iter().zip(eoc(&scaled, &h)) {
                prop_assert!((a - b).abs() < 1e-13);
            }
            let report = ErrorReport::new(e.iter().zip(&h).map(|(&v, &hh)| row(hh, v)).collect());
            let scaled_report = ErrorReport::new(report.rows.iter().map(|r| r.scaled(s)).collect());
            for (a, b) in report.eoc_rows().iter().zip(scaled_report.eoc_rows()) {
                for k in 1..14 {
                    prop_assert!((a[k] - b[k]).abs() < 1e-13);
                }
            }
        }
    }
}
