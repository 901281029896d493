//! Per-(learner, S) summaries of convergence records.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use super::experiment::ConvergenceRecord;
use super::HarnessError;

/// Sentinel written instead of a number when every seed of a cell is censored.
pub const CENSORED: &str = "censored";

#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub learner: String,
    pub states: usize,
    /// Mean samples-to-convergence over converged seeds; `None` if all censored.
    pub mean_samples: Option<f64>,
    /// Sample standard deviation; 0 with one converged seed.
    pub std_samples: Option<f64>,
    pub n_converged: usize,
    pub n_censored: usize,
}

/// Groups by (learner, S) in sorted order.
pub fn aggregate(records: &[ConvergenceRecord]) -> Vec<SummaryRow> {
    let mut groups: BTreeMap<(&str, usize), (Vec<f64>, usize)> = BTreeMap::new();
    for r in records {
        let entry = groups.entry((r.learner.as_str(), r.states)).or_default();
        match r.samples_to_convergence {
            Some(n) if !r.censored => entry.0.push(n as f64),
            _ => entry.1 += 1,
        }
    }
    groups
        .into_iter()
        .map(|((learner, states), (xs, censored))| {
            let (mean, std) = if xs.is_empty() {
                (None, None)
            } else {
                let mean = xs.iter().sum::<f64>() / xs.len() as f64;
                let std = if xs.len() == 1 {
                    0.0
                } else {
                    let ss: f64 = xs.iter().map(|x| (x - mean).powi(2)).sum();
                    (ss / (xs.len() - 1) as f64).sqrt()
                };
                (Some(mean), Some(std))
            };
            SummaryRow {
                learner: learner.to_string(),
                states,
                mean_samples: mean,
                std_samples: std,
                n_converged: xs.len(),
                n_censored: censored,
            }
        })
        .collect()
}

fn cell(v: Option<f64>) -> String {
    v.map_or_else(|| CENSORED.to_string(), |x| x.to_string())
}

/// CSV with header `learner,S,mean_samples,std_samples,n_censored`.
pub fn summary_to_csv(rows: &[SummaryRow]) -> String {
    let mut out = String::from("learner,S,mean_samples,std_samples,n_censored\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.learner,
            r.states,
            cell(r.mean_samples),
            cell(r.std_samples),
            r.n_censored
        );
    }
    out
}

/// Reads a `summary.csv`. The converged count is not stored, so it is
/// reported as 0 for censored cells and 1 otherwise.
pub fn read_summary_csv(path: &Path) -> Result<Vec<SummaryRow>, HarnessError> {
    let malformed = |message: String| HarnessError::Malformed {
        path: path.display().to_string(),
        message,
    };
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    if headers.iter().collect::<Vec<_>>()
        != ["learner", "S", "mean_samples", "std_samples", "n_censored"]
    {
        return Err(malformed(format!("unexpected header {headers:?}")));
    }
    let parse_opt = |s: &str| -> Result<Option<f64>, HarnessError> {
        if s == CENSORED {
            Ok(None)
        } else {
            s.parse()
                .map(Some)
                .map_err(|_| malformed(format!("bad number {s:?}")))
        }
    };
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec?;
        let mean = parse_opt(&rec[2])?;
        rows.push(SummaryRow {
            learner: rec[0].to_string(),
            states: rec[1]
                .parse()
                .map_err(|_| malformed(format!("bad size {:?}", &rec[1])))?,
            mean_samples: mean,
            std_samples: parse_opt(&rec[3])?,
            n_converged: usize::from(mean.is_some()),
            n_censored: rec[4]
                .parse()
                .map_err(|_| malformed(format!("bad count {:?}", &rec[4])))?,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(learner: &str, states: usize, seed: u64, samples: Option<u64>) -> ConvergenceRecord {
        ConvergenceRecord {
            learner: learner.into(),
            states,
            actions: 4,
            seed,
            samples_to_convergence: samples,
            censored: samples.is_none(),
            final_mean_error: 0.0,
            total_timesteps: 0,
            termination: None,
            all_locked_at: None,
            error: None,
        }
    }

    #[test]
    fn hand_computed_mean_and_std() {
        let rows = aggregate(&[
            record("pdql", 50, 0, Some(100)),
            record("pdql", 50, 1, Some(200)),
            record("pdql", 50, 2, Some(600)),
        ]);
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].mean_samples, Some(300.0));
        // deviations -200, -100, 300: (40000 + 10000 + 90000) / 2 = 70000
        assert!((rows[0].std_samples.unwrap() - 70000f64.sqrt()).abs() < 1e-9);
        assert_eq!(rows[0].n_censored, 0);
    }

    #[test]
    fn one_seed_has_zero_std_and_all_censored_uses_sentinel() {
        let rows = aggregate(&[
            record("dql", 50, 0, Some(7)),
            record("pdql", 50, 0, None),
            record("pdql", 50, 1, None),
        ]);
        assert_eq!(rows[0].std_samples, Some(0.0));
        assert_eq!(rows[1].mean_samples, None);
        assert_eq!(rows[1].n_censored, 2);
        let csv = summary_to_csv(&rows);
        assert!(csv.contains("pdql,50,censored,censored,2"), "{csv}");
        assert!(csv.contains("dql,50,7,0,0"), "{csv}");
    }

    #[test]
    fn summary_round_trips_through_csv() {
        let rows = aggregate(&[record("a", 10, 0, Some(5)), record("b", 10, 0, None)]);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("summary.csv");
        std::fs::write(&path, summary_to_csv(&rows)).unwrap();
        let back = read_summary_csv(&path).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[0].mean_samples, Some(5.0));
        assert_eq!(back[1].mean_samples, None);
        assert_eq!(back[1].n_censored, 1);
    }
}
