//! CSV emission and the series reader used by `compare` and `tables`.
//!
//! Numbers are written with six significant digits; lines end in `\n`.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::sim::MetricSeries;
use crate::stats::{ConditionSample, WelchResult};

/// Formats `x` with six significant digits, dropping trailing zeros.
/// Very small or large magnitudes use exponent notation.
pub fn num(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let mag = x.abs().log10().floor() as i32;
    if !(-4..6).contains(&mag) {
        let s = format!("{x:.5e}");
        let (mantissa, exp) = s.split_once('e').unwrap();
        return format!("{}e{exp}", trim(mantissa));
    }
    let decimals = (5 - mag).max(0) as usize;
    let s = format!("{x:.decimals$}");
    // Rounding may carry into a new digit (9.999995 -> 10.00000).
    trim(&s).to_string()
}

fn trim(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn series_csv(series: &MetricSeries) -> String {
    let mut s = String::from("run,epoch,f,cooperation\n");
    let fs: Vec<String> = series.eval_f.iter().map(|&f| num(f)).collect();
    for (run, records) in series.runs.iter().enumerate() {
        for r in records {
            for (f, v) in fs.iter().zip(&r.eval) {
                let _ = writeln!(s, "{run},{},{f},{}", r.epoch, num(*v));
            }
        }
    }
    s
}

/// One row of `summary.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub condition: String,
    pub f: f64,
    pub mean: f64,
    pub std: f64,
}

pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut s = String::from("condition,f,mean,std\n");
    for r in rows {
        let _ = writeln!(s, "{},{},{},{}", r.condition, num(r.f), num(r.mean), num(r.std));
    }
    s
}

pub fn ttest_csv(rows: &[(f64, WelchResult)], threshold: f64) -> String {
    let mut s = String::from("f,t,df,p,significant\n");
    for (f, w) in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            num(*f),
            num(w.t),
            num(w.df),
            num(w.p),
            w.p < threshold
        );
    }
    s
}

/// Evaluation curves read back from a `series.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesTable {
    pub eval_f: Vec<f64>,
    /// `values[run][f_index]` holds the curve over epochs.
    pub values: Vec<Vec<Vec<f64>>>,
}

impl SeriesTable {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().unwrap_or("");
        if header.trim() != "run,epoch,f,cooperation" {
            return Err(Error::InvalidArgument(format!(
                "expected header `run,epoch,f,cooperation`, got `{header}`"
            )));
        }
        let mut eval_f: Vec<f64> = Vec::new();
        let mut values: Vec<Vec<Vec<f64>>> = Vec::new();
        for (i, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let bad = || Error::InvalidArgument(format!("malformed row {}: `{line}`", i + 2));
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 4 {
                return Err(bad());
            }
            let run: usize = cols[0].parse().map_err(|_| bad())?;
            let epoch: usize = cols[1].parse().map_err(|_| bad())?;
            let f: f64 = cols[2].parse().map_err(|_| bad())?;
            let v: f64 = cols[3].parse().map_err(|_| bad())?;
            let fi = match eval_f.iter().position(|&x| x == f) {
                Some(fi) => fi,
                None => {
                    eval_f.push(f);
                    for r in values.iter_mut() {
                        r.push(Vec::new());
                    }
                    eval_f.len() - 1
                }
            };
            while values.len() <= run {
                values.push(vec![Vec::new(); eval_f.len()]);
            }
            let curve = &mut values[run][fi];
            if curve.len() != epoch {
                return Err(Error::InvalidArgument(format!(
                    "row {}: run {run} at f={f} jumps to epoch {epoch}",
                    i + 2
                )));
            }
            curve.push(v);
        }
        if values.is_empty() {
            return Err(Error::InvalidArgument("series has no rows".into()));
        }
        let epochs = values[0][0].len();
        if values.iter().flatten().any(|c| c.len() != epochs) {
            return Err(Error::InvalidArgument("runs or factors differ in length".into()));
        }
        Ok(SeriesTable { eval_f, values })
    }

    pub fn num_epochs(&self) -> usize {
        self.values[0][0].len()
    }

    /// Per-run mean over the last `last_k` epochs at factor `f`.
    pub fn final_values(&self, f: f64, last_k: usize) -> Result<ConditionSample> {
        let fi = self
            .eval_f
            .iter()
            .position(|&x| x == f)
            .ok_or_else(|| Error::InvalidArgument(format!("factor {f} not in series")))?;
        let n = self.num_epochs();
        if last_k == 0 || last_k > n {
            return Err(Error::InvalidArgument(format!(
                "last_k must be in 1..={n}, got {last_k}"
            )));
        }
        Ok(ConditionSample::new(
            self.values
                .iter()
                .map(|run| run[fi][n - last_k..].iter().sum::<f64>() / last_k as f64)
                .collect(),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::EpochRecord;

    #[test]
    fn six_significant_digits() {
        assert_eq!(num(0.0), "0");
        assert_eq!(num(0.5), "0.5");
        assert_eq!(num(1.0), "1");
        assert_eq!(num(3.5), "3.5");
        assert_eq!(num(1.0 / 3.0), "0.333333");
        assert_eq!(num(2.0 / 3.0), "0.666667");
        assert_eq!(num(-1.0), "-1");
        assert_eq!(num(123456.7), "123457");
        assert_eq!(num(1234567.0), "1.23457e6");
        assert_eq!(num(9.9999996), "10");
        assert_eq!(num(0.141421356), "0.141421");
        assert_eq!(num(1.7306e-14), "1.7306e-14");
        assert_eq!(num(0.0001), "0.0001");
        assert_eq!(num(0.00001234567), "1.23457e-5");
        assert_eq!(num(8.0), "8");
        assert_eq!(num(f64::INFINITY), "inf");
    }

    #[test]
    fn series_round_trip() {
        let rec = |epoch, eval: Vec<f64>| EpochRecord {
            epoch,
            active: (0, 1),
            f: 1.0,
            training_cooperation: 0.0,
            eval,
        };
        let series = MetricSeries {
            eval_f: vec![0.5, 1.5],
            runs: vec![
                vec![rec(0, vec![0.0, 1.0]), rec(1, vec![0.5, 1.0])],
                vec![rec(0, vec![1.0, 0.0]), rec(1, vec![0.5, 0.25])],
            ],
        };
        let text = series_csv(&series);
        assert!(text.starts_with("run,epoch,f,cooperation\n0,0,0.5,0\n0,0,1.5,1\n"));
        assert!(!text.contains('\r'));
        let t = SeriesTable::parse(&text).unwrap();
        assert_eq!(t.eval_f, vec![0.5, 1.5]);
        assert_eq!(t.values[1][1], vec![0.0, 0.25]);
        assert_eq!(t.final_values(0.5, 1).unwrap().values, vec![0.5, 0.5]);
        assert_eq!(t.final_values(1.5, 2).unwrap().values, vec![1.0, 0.125]);
        assert!(t.final_values(2.0, 1).is_err());
        assert!(t.final_values(0.5, 3).is_err());
    }

    #[test]
    fn rejects_bad_series() {
        assert!(SeriesTable::parse("a,b\n").is_err());
        assert!(SeriesTable::parse("run,epoch,f,cooperation\n").is_err());
        assert!(SeriesTable::parse("run,epoch,f,cooperation\n0,1,0.5,1\n").is_err());
        assert!(SeriesTable::parse("run,epoch,f,cooperation\n0,0,0.5\n").is_err());
        let ragged = "run,epoch,f,cooperation\n0,0,0.5,1\n0,1,0.5,1\n1,0,0.5,1\n";
        assert!(SeriesTable::parse(ragged).is_err());
    }
}
