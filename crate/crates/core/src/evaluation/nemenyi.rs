use std::sync::OnceLock;

use super::EvaluationError;

const TABLE: &str = include_str!("../../data/nemenyi_q05.csv");

/// `q_alpha` for alpha = 0.05 indexed by number of methods (2..=12).
fn q_table() -> &'static Vec<(usize, f64)> {
    static CELL: OnceLock<Vec<(usize, f64)>> = OnceLock::new();
    CELL.get_or_init(|| {
        TABLE
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#') && !l.starts_with('k'))
            .map(|l| {
                let cols: Vec<&str> = l.split(',').collect();
                let k = cols[0].parse().expect("k column");
                let q = cols[2].parse().expect("q_alpha column");
                (k, q)
            })
            .collect()
    })
}

pub fn nemenyi_q(k: usize, alpha: f64) -> Result<f64, EvaluationError> {
    if (alpha - 0.05).abs() > 1e-12 {
        return Err(EvaluationError::UnsupportedAlpha(alpha));
    }
    q_table()
        .iter()
        .find(|(kk, _)| *kk == k)
        .map(|&(_, q)| q)
        .ok_or(EvaluationError::MethodsOutOfTable(k))
}

/// Nemenyi critical difference `q_alpha * sqrt(k (k+1) / (6 N))` for `k`
/// methods compared over `n` logs.
pub fn nemenyi_cd(k: usize, n: usize, alpha: f64) -> Result<f64, EvaluationError> {
    if n == 0 {
        return Err(EvaluationError::Dimensions("at least one log is required".into()));
    }
    let q = nemenyi_q(k, alpha)?;
    let kf = k as f64;
    Ok(q * (kf * (kf + 1.0) / (6.0 * n as f64)).sqrt())
}
