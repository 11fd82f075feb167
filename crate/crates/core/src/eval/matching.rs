use serde::{Deserialize, Serialize};

use super::Skeleton2d;

/// Default rejection threshold on mean joint distance (px).
pub const DEFAULT_MATCH_THRESHOLD: f64 = 30.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchResult {
    /// `(predicted id, ground-truth id)`.
    pub pairs: Vec<(u8, u8)>,
    pub unmatched_predicted: Vec<u8>,
    pub unmatched_ground_truth: Vec<u8>,
    pub detection_rate: f64,
    /// Sum of the mean distances of the accepted pairs.
    pub cost: f64,
}

/// Mean distance over joints present in both skeletons; `None` without
/// common joints.
pub fn skeleton_distance(a: &Skeleton2d, b: &Skeleton2d) -> Option<f64> {
    let (mut sum, mut n) = (0.0, 0usize);
    for (p, q) in a.joints.iter().zip(&b.joints) {
        if let (Some(p), Some(q)) = (p, q) {
            sum += ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt();
            n += 1;
        }
    }
    (n > 0).then(|| sum / n as f64)
}

/// Pair costs with inadmissible pairs (no common joints, or farther than
/// `threshold`) as `None`. Rows are predictions.
pub fn admissible_costs(
    predicted: &[Skeleton2d],
    ground_truth: &[Skeleton2d],
    threshold: f64,
) -> Vec<Vec<Option<f64>>> {
    predicted
        .iter()
        .map(|p| ground_truth.iter().map(|g| skeleton_distance(p, g).filter(|&d| d <= threshold)).collect())
        .collect()
}

/// One-to-one assignment that first maximizes the number of admissible
/// pairs and then minimizes their summed cost.
pub fn match_skeletons(predicted: &[Skeleton2d], ground_truth: &[Skeleton2d], threshold: f64) -> MatchResult {
    let costs = admissible_costs(predicted, ground_truth, threshold);
    let n = predicted.len().max(ground_truth.len());
    // any admissible set beats one more inadmissible pair
    let big = (threshold.max(1.0) + 1.0) * (n as f64 + 1.0);
    let square: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| costs.get(i).and_then(|r| r.get(j)).map_or(big, |c| c.unwrap_or(big))).collect())
        .collect();
    let assignment = hungarian(&square);
    let mut pairs = Vec::new();
    let mut cost = 0.0;
    let mut used_gt = vec![false; ground_truth.len()];
    let mut used_pred = vec![false; predicted.len()];
    for (i, &j) in assignment.iter().enumerate() {
        if let Some(Some(c)) = costs.get(i).and_then(|r| r.get(j)) {
            pairs.push((predicted[i].id, ground_truth[j].id));
            cost += c;
            used_pred[i] = true;
            used_gt[j] = true;
        }
    }
    let unmatched =
        |s: &[Skeleton2d], used: &[bool]| s.iter().zip(used).filter(|(_, &u)| !u).map(|(k, _)| k.id).collect();
    MatchResult {
        detection_rate: if ground_truth.is_empty() { 0.0 } else { pairs.len() as f64 / ground_truth.len() as f64 },
        unmatched_predicted: unmatched(predicted, &used_pred),
        unmatched_ground_truth: unmatched(ground_truth, &used_gt),
        pairs,
        cost,
    }
}

/// Minimum-cost perfect matching on a square matrix (shortest augmenting
/// paths with potentials). Returns the column of each row.
pub fn hungarian(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    if n == 0 {
        return Vec::new();
    }
    // 1-based with a virtual column 0
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut row_of = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        row_of[0] = i;
        let mut j0 = 0;
        let mut min = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = row_of[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < min[j] {
                        min[j] = cur;
                        way[j] = j0;
                    }
                    if min[j] < delta {
                        delta = min[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[row_of[j]] += delta;
                    v[j] -= delta;
                } else {
                    min[j] -= delta;
                }
            }
            j0 = j1;
            if row_of[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            row_of[j0] = row_of[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut col_of = vec![0; n];
    for j in 1..=n {
        col_of[row_of[j] - 1] = j - 1;
    }
    col_of
}
