use std::path::Path;

use crate::engine::RunResult;
use crate::{Error, Result};

pub const REPORT_COLUMNS: [&str; 12] = [
    "instance_id",
    "problem",
    "n",
    "kappa",
    "fold",
    "base_evals",
    "biased_evals",
    "base_time_ms",
    "biased_time_ms",
    "speedup_evals",
    "speedup_time",
    "improved",
];

/// Smallest time a biased run is credited with, in milliseconds.
pub const CLOCK_FLOOR_MS: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Speedup {
    pub evaluations: f64,
    pub time: Option<f64>,
    /// The biased time was below the clock floor and was raised to it.
    pub time_floored: bool,
}

impl Speedup {
    pub fn from_measurements(
        base_evals: f64,
        biased_evals: f64,
        base_ms: Option<f64>,
        biased_ms: Option<f64>,
    ) -> Self {
        let (time, time_floored) = match (base_ms, biased_ms) {
            (Some(b), Some(t)) => {
                let floored = t < CLOCK_FLOOR_MS;
                (Some(b.max(CLOCK_FLOOR_MS) / t.max(CLOCK_FLOOR_MS)), floored)
            }
            _ => (None, false),
        };
        Self {
            evaluations: base_evals / biased_evals,
            time,
            time_floored,
        }
    }
}

/// Base over biased cost of two runs on the same instance.
pub fn measure_speedup(base: &RunResult, biased: &RunResult) -> Speedup {
    Speedup::from_measurements(
        base.evaluations,
        biased.evaluations,
        Some(base.elapsed_ms),
        Some(biased.elapsed_ms),
    )
}

/// One instance under one bias strength.
#[derive(Clone, Debug, PartialEq)]
pub struct ReportRow {
    pub instance_id: String,
    pub problem: String,
    pub n: usize,
    pub kappa: f64,
    pub fold: Option<usize>,
    pub base_evals: f64,
    pub biased_evals: f64,
    pub base_time_ms: Option<f64>,
    pub biased_time_ms: Option<f64>,
    pub speedup_evals: f64,
    pub speedup_time: Option<f64>,
    pub improved: bool,
    pub time_floored: bool,
    pub sporadic: bool,
    pub base_population: usize,
    pub biased_population: usize,
}

#[derive(Clone, Debug, Default)]
pub struct ExperimentReport {
    pub rows: Vec<ReportRow>,
    pub sporadic: bool,
    /// Fold of each instance, in instance order; empty without folds.
    pub fold_of: Vec<usize>,
    /// Instance ids whose models built each fold's table.
    pub bias_sources: Vec<Vec<String>>,
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| x.to_string())
}

impl ExperimentReport {
    pub fn kappas(&self) -> Vec<f64> {
        let mut ks: Vec<f64> = Vec::new();
        for r in &self.rows {
            if !ks.contains(&r.kappa) {
                ks.push(r.kappa);
            }
        }
        ks
    }

    pub fn rows_for(&self, kappa: f64) -> Vec<&ReportRow> {
        self.rows.iter().filter(|r| r.kappa == kappa).collect()
    }

    pub fn summary(&self, kappa: f64) -> Summary {
        summarize(self.rows_for(kappa).into_iter())
    }

    pub fn to_csv(&self) -> String {
        render_csv(&self.rows)
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }
}

fn num_field(v: f64) -> String {
    v.to_string()
}

pub fn render_csv(rows: &[ReportRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    // Writing to memory cannot fail.
    w.write_record(REPORT_COLUMNS).expect("in-memory csv");
    for r in rows {
        w.write_record([
            r.instance_id.clone(),
            r.problem.clone(),
            r.n.to_string(),
            num_field(r.kappa),
            r.fold.map_or_else(|| "NA".to_string(), |f| f.to_string()),
            num_field(r.base_evals),
            num_field(r.biased_evals),
            opt(r.base_time_ms),
            opt(r.biased_time_ms),
            num_field(r.speedup_evals),
            opt(r.speedup_time),
            u8::from(r.improved).to_string(),
        ])
        .expect("in-memory csv");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("csv output is utf-8")
}

/// Reads rows written by [`ExperimentReport::to_csv`]. Fields outside the
/// file format come back as defaults.
pub fn parse_report_csv(path: &Path, text: &str) -> Result<Vec<ReportRow>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| Error::parse(path, 1, e.to_string()))?;
    if headers.iter().ne(REPORT_COLUMNS) {
        return Err(Error::parse(path, 1, "missing or unexpected header"));
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            Error::parse(path, line, e.to_string())
        })?;
        let line_no = record.position().map_or(0, |p| p.line() as usize);
        if record.len() != REPORT_COLUMNS.len() {
            return Err(Error::parse(
                path,
                line_no,
                format!("expected {} fields, found {}", REPORT_COLUMNS.len(), record.len()),
            ));
        }
        let f = |i: usize| &record[i];
        let num = |i: usize| -> Result<f64> {
            f(i).parse::<f64>().map_err(|_| {
                Error::parse(path, line_no, format!("bad {} '{}'", REPORT_COLUMNS[i], f(i)))
            })
        };
        let opt_num = |i: usize| -> Result<Option<f64>> {
            if f(i) == "NA" {
                Ok(None)
            } else {
                num(i).map(Some)
            }
        };
        let fold = if f(4) == "NA" {
            None
        } else {
            Some(num(4)? as usize)
        };
        let improved = match f(11) {
            "0" => false,
            "1" => true,
            other => return Err(Error::parse(path, line_no, format!("bad improved '{other}'"))),
        };
        rows.push(ReportRow {
            instance_id: f(0).to_string(),
            problem: f(1).to_string(),
            n: num(2)? as usize,
            kappa: num(3)?,
            fold,
            base_evals: num(5)?,
            biased_evals: num(6)?,
            base_time_ms: opt_num(7)?,
            biased_time_ms: opt_num(8)?,
            speedup_evals: num(9)?,
            speedup_time: opt_num(10)?,
            improved,
            time_floored: false,
            sporadic: false,
            base_population: 0,
            biased_population: 0,
        });
    }
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Summary {
    pub count: usize,
    pub median_speedup_evals: f64,
    pub mean_speedup_evals: f64,
    pub improved_fraction: f64,
    pub median_speedup_time: Option<f64>,
}

fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

pub fn summarize<'a>(rows: impl Iterator<Item = &'a ReportRow>) -> Summary {
    let rows: Vec<&ReportRow> = rows.collect();
    let count = rows.len();
    let evals: Vec<f64> = rows.iter().map(|r| r.speedup_evals).collect();
    let times: Option<Vec<f64>> = rows.iter().map(|r| r.speedup_time).collect();
    Summary {
        count,
        mean_speedup_evals: evals.iter().sum::<f64>() / count as f64,
        median_speedup_evals: median(evals),
        improved_fraction: rows.iter().filter(|r| r.improved).count() as f64 / count as f64,
        median_speedup_time: times.filter(|t| !t.is_empty()).map(median),
    }
}

pub const SUMMARY_COLUMNS: [&str; 6] = [
    "kappa",
    "count",
    "median_speedup_evals",
    "mean_speedup_evals",
    "improved_fraction",
    "median_speedup_time",
];

/// One summary line per bias strength, in first-seen order.
pub fn render_summary_csv(rows: &[ReportRow]) -> String {
    let mut kappas: Vec<f64> = Vec::new();
    for r in rows {
        if !kappas.contains(&r.kappa) {
            kappas.push(r.kappa);
        }
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(SUMMARY_COLUMNS).expect("in-memory csv");
    for k in kappas {
        let s = summarize(rows.iter().filter(|r| r.kappa == k));
        w.write_record([
            num_field(k),
            s.count.to_string(),
            num_field(s.median_speedup_evals),
            num_field(s.mean_speedup_evals),
            num_field(s.improved_fraction),
            opt(s.median_speedup_time),
        ])
        .expect("in-memory csv");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("csv output is utf-8")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(id: &str, kappa: f64, base: f64, biased: f64) -> ReportRow {
        let s = Speedup::from_measurements(base, biased, None, None);
        ReportRow {
            instance_id: id.into(),
            problem: "mvc".into(),
            n: 10,
            kappa,
            fold: Some(0),
            base_evals: base,
            biased_evals: biased,
            base_time_ms: None,
            biased_time_ms: None,
            speedup_evals: s.evaluations,
            speedup_time: None,
            improved: biased < base,
            time_floored: false,
            sporadic: false,
            base_population: 32,
            biased_population: 32,
        }
    }

    #[test]
    fn speedup_definition() {
        assert_eq!(Speedup::from_measurements(5.0, 5.0, Some(3.0), Some(3.0)).time, Some(1.0));
        let s = Speedup::from_measurements(10.0, 5.0, Some(2000.0), Some(1000.0));
        assert_eq!((s.evaluations, s.time, s.time_floored), (2.0, Some(2.0), false));
    }

    #[test]
    fn zero_biased_time_is_floored_and_flagged() {
        let s = Speedup::from_measurements(1.0, 1.0, Some(1.0), Some(0.0));
        assert!(s.time_floored);
        assert_eq!(s.time, Some(1.0 / CLOCK_FLOOR_MS));
    }

    #[test]
    fn summary_recomputes() {
        let rows = vec![row("a", 5.0, 10.0, 5.0), row("b", 5.0, 10.0, 10.0), row("c", 5.0, 9.0, 3.0), row("d", 5.0, 4.0, 8.0)];
        let s = summarize(rows.iter());
        assert_eq!(s.count, 4);
        assert_eq!(s.median_speedup_evals, 1.5);
        assert!((s.mean_speedup_evals - (2.0 + 1.0 + 3.0 + 0.5) / 4.0).abs() < 1e-12);
        assert_eq!(s.improved_fraction, 0.5);
        assert_eq!(s.median_speedup_time, None);
    }

    #[test]
    fn csv_round_trip() {
        let mut rows = vec![row("i0", 1.0, 100.5, 80.25), row("i1", 3.0, 7.0, 9.0)];
        rows[1].fold = None;
        rows[1].base_time_ms = Some(1.5);
        rows[1].biased_time_ms = Some(0.75);
        rows[1].speedup_time = Some(2.0);
        let csv = render_csv(&rows);
        assert!(csv.starts_with("instance_id,problem,n,kappa,fold,base_evals"));
        let back = parse_report_csv(Path::new("r.csv"), &csv).unwrap();
        for (a, b) in rows.iter().zip(&back) {
            assert_eq!(render_csv(std::slice::from_ref(a)), render_csv(std::slice::from_ref(b)));
        }
    }

    #[test]
    fn malformed_csv_reports_line() {
        let text = format!("{}\na,b,1\n", REPORT_COLUMNS.join(","));
        match parse_report_csv(Path::new("r.csv"), &text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }
}
