use std::io::Read;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::nemenyi::nemenyi_cd;
use super::stats::chi_square_sf;
use super::EvaluationError;

/// Whether smaller or larger metric values rank first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    LowerIsBetter,
    HigherIsBetter,
}

/// Methods × logs table of metric values; `None` marks a missing cell.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricMatrix {
    pub methods: Vec<String>,
    pub logs: Vec<String>,
    pub values: Vec<Vec<Option<f64>>>,
}

const MISSING_MARKERS: [&str; 5] = ["", "NA", "N/A", "/", "-"];

impl MetricMatrix {
    pub fn new(methods: Vec<String>, logs: Vec<String>, values: Vec<Vec<Option<f64>>>) -> Result<Self, EvaluationError> {
        if values.len() != methods.len() || values.iter().any(|row| row.len() != logs.len()) {
            return Err(EvaluationError::Dimensions(format!(
                "expected {} rows of {} values",
                methods.len(),
                logs.len()
            )));
        }
        Ok(MetricMatrix { methods, logs, values })
    }

    pub fn from_complete(methods: Vec<String>, logs: Vec<String>, values: Vec<Vec<f64>>) -> Result<Self, EvaluationError> {
        let values = values.into_iter().map(|r| r.into_iter().map(Some).collect()).collect();
        Self::new(methods, logs, values)
    }

    /// Reads `method,<log1>,<log2>,...` CSV. Lines starting with `#` are
    /// skipped; empty cells and `NA`, `N/A`, `/`, `-` are missing.
    pub fn from_csv<R: Read>(source: R) -> Result<Self, EvaluationError> {
        let mut reader = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .flexible(false)
            .from_reader(source);
        let header = reader.headers().map_err(|e| EvaluationError::Csv(e.to_string()))?.clone();
        if header.len() < 2 {
            return Err(EvaluationError::Csv("need a method column and at least one log column".into()));
        }
        let logs: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
        let mut methods = Vec::new();
        let mut values = Vec::new();
        for (i, record) in reader.records().enumerate() {
            let record = record.map_err(|e| EvaluationError::Csv(e.to_string()))?;
            methods.push(record[0].to_string());
            let row = record
                .iter()
                .skip(1)
                .map(|cell| {
                    if MISSING_MARKERS.contains(&cell) {
                        Ok(None)
                    } else {
                        cell.parse::<f64>().map(Some).map_err(|_| {
                            EvaluationError::Csv(format!("row {}: `{cell}` is not a number", i + 2))
                        })
                    }
                })
                .collect::<Result<Vec<_>, _>>()?;
            values.push(row);
        }
        Self::new(methods, logs, values)
    }

    /// Keeps only the named log columns, in the given order.
    pub fn select_logs<S: AsRef<str>>(&self, names: &[S]) -> Result<Self, EvaluationError> {
        let idx: Vec<usize> = names
            .iter()
            .map(|n| {
                self.logs
                    .iter()
                    .position(|l| l == n.as_ref())
                    .ok_or_else(|| EvaluationError::UnknownLog(n.as_ref().to_string()))
            })
            .collect::<Result<_, _>>()?;
        Ok(MetricMatrix {
            methods: self.methods.clone(),
            logs: idx.iter().map(|&i| self.logs[i].clone()).collect(),
            values: self.values.iter().map(|row| idx.iter().map(|&i| row[i]).collect()).collect(),
        })
    }

    fn complete_column(&self, log: usize) -> Result<Vec<f64>, EvaluationError> {
        self.values
            .iter()
            .enumerate()
            .map(|(m, row)| {
                row[log].ok_or_else(|| EvaluationError::MissingCell {
                    method: self.methods[m].clone(),
                    log: self.logs[log].clone(),
                })
            })
            .collect()
    }

    /// Per-log ranks, methods × logs.
    pub fn rank_matrix(&self, direction: Direction) -> Result<Vec<Vec<f64>>, EvaluationError> {
        if self.methods.is_empty() || self.logs.is_empty() {
            return Err(EvaluationError::Dimensions("empty matrix".into()));
        }
        let mut ranks = vec![vec![0.0; self.logs.len()]; self.methods.len()];
        for l in 0..self.logs.len() {
            let col = rank_column(&self.complete_column(l)?, direction);
            for (m, r) in col.into_iter().enumerate() {
                ranks[m][l] = r;
            }
        }
        Ok(ranks)
    }
}

/// Ranks starting at 1; tied values share the mean of their positions.
pub fn rank_column(values: &[f64], direction: Direction) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| match direction {
        Direction::LowerIsBetter => values[a].total_cmp(&values[b]),
        Direction::HigherIsBetter => values[b].total_cmp(&values[a]),
    });
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // positions start+1 ..= end
        let shared = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = shared;
        }
        start = end;
    }
    ranks
}

/// Mean rank of each method over all logs.
pub fn average_ranks(matrix: &MetricMatrix, direction: Direction) -> Result<Vec<f64>, EvaluationError> {
    let ranks = matrix.rank_matrix(direction)?;
    let n = matrix.logs.len() as f64;
    Ok(ranks.iter().map(|row| row.iter().sum::<f64>() / n).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FriedmanResult {
    pub chi2: f64,
    pub p_value: f64,
    pub df: usize,
}

/// Friedman statistic from a methods × logs rank matrix.
pub fn friedman_from_ranks(ranks: &[Vec<f64>]) -> Result<FriedmanResult, EvaluationError> {
    let k = ranks.len();
    let n = ranks.first().map_or(0, Vec::len);
    if k < 2 || n < 2 {
        return Err(EvaluationError::Dimensions(format!(
            "the Friedman test needs at least 2 methods and 2 logs (got {k} x {n})"
        )));
    }
    let (kf, nf) = (k as f64, n as f64);
    let sum_sq: f64 = ranks.iter().map(|row| row.iter().sum::<f64>().powi(2)).sum();
    // 12/(N k (k+1)) * sum R_j^2 - 3 N (k+1), over a common denominator so
    // that all-tied input gives exactly zero
    let chi2 = ((12.0 * sum_sq - 3.0 * nf * nf * kf * (kf + 1.0).powi(2)) / (nf * kf * (kf + 1.0))).max(0.0);
    Ok(FriedmanResult {
        chi2,
        p_value: chi_square_sf(chi2, kf - 1.0),
        df: k - 1,
    })
}

pub fn friedman_test(matrix: &MetricMatrix, direction: Direction) -> Result<FriedmanResult, EvaluationError> {
    friedman_from_ranks(&matrix.rank_matrix(direction)?)
}

/// Serializable summary of a ranking analysis. Statistics that cannot be
/// computed for the matrix shape are `null`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankReport {
    pub metric: String,
    pub avg_ranks: IndexMap<String, f64>,
    pub friedman_chi2: Option<f64>,
    pub p_value: Option<f64>,
    pub cd: Option<f64>,
    pub pairs_significant: Vec<[String; 2]>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    #[serde(skip)]
    pub ranks: Vec<Vec<f64>>,
}

/// Average ranks, Friedman test and Nemenyi critical difference. Method
/// pairs whose average ranks differ by more than the critical difference
/// are listed only when the Friedman test rejects at `alpha`.
pub fn rank_report(
    matrix: &MetricMatrix,
    metric: &str,
    direction: Direction,
    alpha: f64,
) -> Result<RankReport, EvaluationError> {
    let ranks = matrix.rank_matrix(direction)?;
    let n = matrix.logs.len() as f64;
    let avg: Vec<f64> = ranks.iter().map(|row| row.iter().sum::<f64>() / n).collect();
    let mut notes = Vec::new();

    let friedman = match friedman_from_ranks(&ranks) {
        Ok(f) => Some(f),
        Err(e) => {
            notes.push(e.to_string());
            None
        }
    };
    let cd = match nemenyi_cd(matrix.methods.len(), matrix.logs.len(), alpha) {
        Ok(cd) => Some(cd),
        Err(e) => {
            notes.push(e.to_string());
            None
        }
    };

    let mut pairs = Vec::new();
    if let (Some(f), Some(cd)) = (friedman, cd) {
        if f.p_value < alpha {
            for i in 0..avg.len() {
                for j in i + 1..avg.len() {
                    if (avg[i] - avg[j]).abs() > cd {
                        pairs.push([matrix.methods[i].clone(), matrix.methods[j].clone()]);
                    }
                }
            }
        } else {
            notes.push(format!("Friedman test does not reject at alpha = {alpha}; no pairwise differences reported"));
        }
    }

    Ok(RankReport {
        metric: metric.to_string(),
        avg_ranks: matrix.methods.iter().cloned().zip(avg).collect(),
        friedman_chi2: friedman.map(|f| f.chi2),
        p_value: friedman.map(|f| f.p_value),
        cd,
        pairs_significant: pairs,
        notes,
        ranks,
    })
}
