//! Per-round regret records and their CSV form.
//!
//! Column order: `t, s, x1..xd, f_true, g_true, violation, r, r_prime, r_X,
//! R, R_prime, R_X, n_surviving_x, n_G, n_M, ms`. Floats are written with 17
//! significant digits so that parsing returns the identical value.

use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord {
    pub t: usize,
    pub s: f64,
    pub x: Vec<f64>,
    pub f_true: f64,
    pub g_true: f64,
    pub violation: bool,
    pub r: f64,
    pub r_prime: f64,
    pub r_x: f64,
    pub cum_r: f64,
    pub cum_r_prime: f64,
    pub cum_r_x: f64,
    pub n_surviving_x: usize,
    pub n_g: usize,
    pub n_m: usize,
    pub ms: f64,
}

/// All rounds of one (algorithm, seed) run.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretLog {
    pub x_dim: usize,
    pub rows: Vec<RoundRecord>,
    /// Why the run stopped before the requested number of rounds, if it did.
    pub termination: Option<String>,
}

impl RegretLog {
    pub fn new(x_dim: usize) -> Self {
        Self {
            x_dim,
            rows: Vec::new(),
            termination: None,
        }
    }

    /// Appends a round, filling the cumulative columns from the previous row.
    pub fn push(&mut self, mut row: RoundRecord) {
        let (r, rp, rx) = self
            .rows
            .last()
            .map_or((0.0, 0.0, 0.0), |p| (p.cum_r, p.cum_r_prime, p.cum_r_x));
        row.cum_r = r + row.r;
        row.cum_r_prime = rp + row.r_prime;
        row.cum_r_x = rx + row.r_x;
        self.rows.push(row);
    }

    pub fn violations(&self) -> usize {
        self.rows.iter().filter(|r| r.violation).count()
    }

    /// `(R_t/t, R'_t/t, R^X_t/t)` after round `t` (1-based), if it was reached.
    pub fn normalized_at(&self, t: usize) -> Option<(f64, f64, f64)> {
        let row = self.rows.get(t.checked_sub(1)?)?;
        let t = t as f64;
        Some((row.cum_r / t, row.cum_r_prime / t, row.cum_r_x / t))
    }

    pub fn header(&self) -> Vec<String> {
        header(self.x_dim)
    }
}

fn header(x_dim: usize) -> Vec<String> {
    let mut h = vec!["t".to_string(), "s".to_string()];
    h.extend((1..=x_dim).map(|i| format!("x{i}")));
    h.extend(
        [
            "f_true",
            "g_true",
            "violation",
            "r",
            "r_prime",
            "r_X",
            "R",
            "R_prime",
            "R_X",
            "n_surviving_x",
            "n_G",
            "n_M",
            "ms",
        ]
        .map(String::from),
    );
    h
}

/// 17 significant digits.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn record(row: &RoundRecord) -> Vec<String> {
    let mut out = vec![row.t.to_string(), format_float(row.s)];
    out.extend(row.x.iter().map(|v| format_float(*v)));
    out.extend([
        format_float(row.f_true),
        format_float(row.g_true),
        row.violation.to_string(),
        format_float(row.r),
        format_float(row.r_prime),
        format_float(row.r_x),
        format_float(row.cum_r),
        format_float(row.cum_r_prime),
        format_float(row.cum_r_x),
        row.n_surviving_x.to_string(),
        row.n_g.to_string(),
        row.n_m.to_string(),
        format_float(row.ms),
    ]);
    out
}

pub fn write_csv(log: &RegretLog, path: &Path) -> Result<()> {
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(log.header()).map_err(csv_err)?;
    for row in &log.rows {
        if row.x.len() != log.x_dim {
            return Err(Error::contract(format!(
                "row {} has {} x coordinates, log expects {}",
                row.t,
                row.x.len(),
                log.x_dim
            )));
        }
        w.write_record(record(row)).map_err(csv_err)?;
    }
    w.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Reads a file written by [`write_csv`]. The termination reason is not stored in the file.
pub fn read_csv(path: &Path) -> Result<RegretLog> {
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let bad = |msg: String| Error::config(format!("{}: {msg}", path.display()));
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    let head: Vec<String> = r.headers().map_err(csv_err)?.iter().map(String::from).collect();
    let x_dim = head
        .len()
        .checked_sub(header(0).len())
        .ok_or_else(|| bad("too few columns".into()))?;
    if head != header(x_dim) {
        return Err(bad(format!("unexpected header {head:?}")));
    }
    let mut log = RegretLog::new(x_dim);
    for rec in r.records() {
        let rec = rec.map_err(csv_err)?;
        let f = |i: usize| -> Result<f64> {
            rec[i]
                .parse()
                .map_err(|_| bad(format!("bad number '{}'", &rec[i])))
        };
        let u = |i: usize| -> Result<usize> {
            rec[i]
                .parse()
                .map_err(|_| bad(format!("bad count '{}'", &rec[i])))
        };
        let o = 2 + x_dim;
        log.rows.push(RoundRecord {
            t: u(0)?,
            s: f(1)?,
            x: (2..o).map(f).collect::<Result<_>>()?,
            f_true: f(o)?,
            g_true: f(o + 1)?,
            violation: rec[o + 2]
                .parse()
                .map_err(|_| bad(format!("bad flag '{}'", &rec[o + 2])))?,
            r: f(o + 3)?,
            r_prime: f(o + 4)?,
            r_x: f(o + 5)?,
            cum_r: f(o + 6)?,
            cum_r_prime: f(o + 7)?,
            cum_r_x: f(o + 8)?,
            n_surviving_x: u(o + 9)?,
            n_g: u(o + 10)?,
            n_m: u(o + 11)?,
            ms: f(o + 12)?,
        });
    }
    Ok(log)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(t: usize, r: f64) -> RoundRecord {
        RoundRecord {
            t,
            s: 0.1 * t as f64,
            x: vec![1.0 / 3.0, 2.0],
            f_true: std::f64::consts::PI,
            g_true: -0.0,
            violation: t == 2,
            r,
            r_prime: r / 7.0,
            r_x: r * 1.1,
            cum_r: 0.0,
            cum_r_prime: 0.0,
            cum_r_x: 0.0,
            n_surviving_x: 10 - t,
            n_g: t,
            n_m: 2,
            ms: 0.0,
        }
    }

    #[test]
    fn empty_log_writes_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.csv");
        write_csv(&RegretLog::new(2), &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 1);
        assert!(text.starts_with("t,s,x1,x2,f_true,g_true,violation,r,r_prime,r_X,R,R_prime,R_X,n_surviving_x,n_G,n_M,ms"));
    }

    #[test]
    fn round_trip_and_resum() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("b.csv");
        let mut log = RegretLog::new(2);
        for (t, r) in [(1, 0.3), (2, 0.1 + 0.2), (3, 1e-17)] {
            log.push(row(t, r));
        }
        write_csv(&log, &path).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap().lines().count(), 4);
        let back = read_csv(&path).unwrap();
        assert_eq!(back, log);
        let (mut r, mut rp, mut rx) = (0.0, 0.0, 0.0);
        for row in &back.rows {
            r += row.r;
            rp += row.r_prime;
            rx += row.r_x;
            assert_eq!(row.cum_r, r);
            assert_eq!(row.cum_r_prime, rp);
            assert_eq!(row.cum_r_x, rx);
        }
        assert_eq!(back.violations(), 1);
    }

    #[test]
    fn format_round_trips() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 123456789.12345679, f64::MIN_POSITIVE] {
            assert_eq!(format_float(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn io_errors_carry_the_path() {
        let err = write_csv(&RegretLog::new(1), Path::new("/nonexistent/dir/x.csv")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/dir/x.csv"));
    }
}
