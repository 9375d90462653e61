//! Ranking metrics over normality scores, with anomalies as the positive class.
//!
//! Every function takes the one-class scores `s` (higher = more normal) and
//! ranks by the anomaly score `-s`.

use std::cmp::Ordering;

use crate::error::{MuseError, Result};

pub const DEFAULT_K: usize = 10;

fn check(scores: &[f64], is_anomaly: &[bool]) -> Result<usize> {
    if scores.len() != is_anomaly.len() {
        return Err(MuseError::Metric(format!(
            "{} scores but {} labels",
            scores.len(),
            is_anomaly.len()
        )));
    }
    if let Some(s) = scores.iter().find(|s| s.is_nan()) {
        return Err(MuseError::Metric(format!("score {s} is not a number")));
    }
    let pos = is_anomaly.iter().filter(|&&a| a).count();
    if pos == 0 || pos == scores.len() {
        return Err(MuseError::Metric("both normal and anomalous samples are required".into()));
    }
    Ok(pos)
}

/// Mann-Whitney AUROC: the chance that a random anomaly scores as less
/// normal than a random normal graph, ties counting one half.
pub fn auroc(scores: &[f64], is_anomaly: &[bool]) -> Result<f64> {
    let pos = check(scores, is_anomaly)?;
    let neg = scores.len() - pos;
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    // Descending normality = ascending anomaly score.
    idx.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    // Sum of 1-based ascending ranks of the anomaly score over anomalies,
    // with tied groups given their average rank.
    let mut rank_sum = 0.0;
    let mut start = 0;
    while start < idx.len() {
        let mut end = start + 1;
        while end < idx.len() && scores[idx[end]] == scores[idx[start]] {
            end += 1;
        }
        let avg = (start + end + 1) as f64 / 2.0;
        rank_sum += avg * idx[start..end].iter().filter(|&&i| is_anomaly[i]).count() as f64;
        start = end;
    }
    let u = rank_sum - (pos * (pos + 1)) as f64 / 2.0;
    Ok(u / (pos as f64 * neg as f64))
}

/// Indices by descending anomaly score; ties keep input order.
pub fn anomaly_ranking(scores: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| match scores[a].total_cmp(&scores[b]) {
        Ordering::Equal => a.cmp(&b),
        o => o,
    });
    idx
}

/// Mean over anomalies of the precision at each anomaly's rank.
pub fn average_precision(scores: &[f64], is_anomaly: &[bool]) -> Result<f64> {
    let pos = check(scores, is_anomaly)?;
    let mut hits = 0usize;
    let mut total = 0.0;
    for (r, &i) in anomaly_ranking(scores).iter().enumerate() {
        if is_anomaly[i] {
            hits += 1;
            total += hits as f64 / (r + 1) as f64;
        }
    }
    Ok(total / pos as f64)
}

/// Fraction of anomalies among the `k` least normal samples.
pub fn precision_at_k(scores: &[f64], is_anomaly: &[bool], k: usize) -> Result<f64> {
    check(scores, is_anomaly)?;
    if k == 0 || k > scores.len() {
        return Err(MuseError::Metric(format!("k = {k} outside 1..={}", scores.len())));
    }
    let hits = anomaly_ranking(scores)[..k].iter().filter(|&&i| is_anomaly[i]).count();
    Ok(hits as f64 / k as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_and_tied() {
        let s = [0.9, 0.8, 0.2, 0.1];
        let y = [false, false, true, true];
        assert_eq!(auroc(&s, &y).unwrap(), 1.0);
        assert_eq!(auroc(&[0.5; 4], &y).unwrap(), 0.5);
        assert_eq!(average_precision(&s, &y).unwrap(), 1.0);
        assert_eq!(precision_at_k(&s, &y, 2).unwrap(), 1.0);
    }

    #[test]
    fn single_anomaly_ranked_last() {
        let s = [0.1, 0.2, 0.3, 0.4, 0.9];
        let y = [false, false, false, false, true];
        assert_eq!(average_precision(&s, &y).unwrap(), 0.2);
        assert_eq!(auroc(&s, &y).unwrap(), 0.0);
    }

    #[test]
    fn errors() {
        assert!(auroc(&[0.1, 0.2], &[true, true]).is_err());
        assert!(auroc(&[0.1, 0.2], &[true]).is_err());
        assert!(precision_at_k(&[0.1, 0.2], &[true, false], 3).is_err());
        assert!(average_precision(&[f64::NAN, 0.2], &[true, false]).is_err());
    }
}
