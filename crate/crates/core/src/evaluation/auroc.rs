//! AUROC via the Mann-Whitney U statistic with midranks for ties.

use crate::error::{Error, Result};

/// Area under the ROC curve, treating `labels[i] == true` as the positive
/// (hallucination) class and higher scores as more positive.
///
/// Equal scores share their average rank, so a tied positive/negative pair
/// contributes one half.
pub fn auroc(scores: &[f64], labels: &[bool]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::SizeMismatch(format!(
            "{} scores but {} labels",
            scores.len(),
            labels.len()
        )));
    }
    if scores.len() < 2 {
        return Err(Error::UndefinedAuroc("need at least two samples".into()));
    }
    if let Some(i) = scores.iter().position(|s| !s.is_finite()) {
        return Err(Error::MalformedInput(format!(
            "non-finite score at index {i}"
        )));
    }
    let positives = labels.iter().filter(|&&l| l).count();
    let negatives = labels.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::UndefinedAuroc(format!(
            "only one class present ({positives} positive, {negatives} negative)"
        )));
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    // Ranks are 1-based; doubled so midranks stay integral.
    let mut positive_rank_sum2: u64 = 0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && scores[order[end]] == scores[order[start]] {
            end += 1;
        }
        let midrank2 = (start + 1 + end) as u64;
        let tied_positives = order[start..end].iter().filter(|&&i| labels[i]).count() as u64;
        positive_rank_sum2 += midrank2 * tied_positives;
        start = end;
    }

    let pos = positives as u64;
    let u2 = positive_rank_sum2 - pos * (pos + 1);
    Ok(u2 as f64 / (2 * positives * negatives) as f64)
}
