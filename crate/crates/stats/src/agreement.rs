//! Agreement between two labelings: Cohen's κ and Spearman's ρ.

use serde::{Deserialize, Serialize};

use crate::error::{Result, StatsError};

/// 2×2 counts, indexed `[a][b]` with `false = 0`, `true = 1`.
pub type Contingency = [[u64; 2]; 2];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementStats {
    pub kappa: f64,
    pub spearman_rho: f64,
    pub contingency: Contingency,
    pub n: usize,
}

pub fn contingency(a: &[bool], b: &[bool]) -> Result<Contingency> {
    if a.len() != b.len() {
        return Err(StatsError::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let mut table = [[0u64; 2]; 2];
    for (&x, &y) in a.iter().zip(b) {
        table[usize::from(x)][usize::from(y)] += 1;
    }
    Ok(table)
}

/// Cohen's κ for two binary raters. When chance agreement is 1 (both
/// raters constant and identical) κ is defined as 1.
pub fn cohen_kappa(a: &[bool], b: &[bool]) -> Result<f64> {
    let t = contingency(a, b)?;
    if a.is_empty() {
        return Err(StatsError::TooShort { needed: 1, got: 0 });
    }
    let n = a.len() as f64;
    let p_o = (t[0][0] + t[1][1]) as f64 / n;
    let a1 = (t[1][0] + t[1][1]) as f64 / n;
    let b1 = (t[0][1] + t[1][1]) as f64 / n;
    let p_e = a1 * b1 + (1.0 - a1) * (1.0 - b1);
    if p_e >= 1.0 {
        return Ok(1.0);
    }
    Ok((p_o - p_e) / (1.0 - p_e))
}

/// Ranks starting at 1, ties receiving the mean of the ranks they span.
pub fn mid_ranks(x: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&i, &j| x[i].total_cmp(&x[j]));
    let mut ranks = vec![0.0; x.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && x[order[end]] == x[order[start]] {
            end += 1;
        }
        // positions start..end hold ranks start+1..=end
        let rank = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    (sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0)
}

/// Spearman's ρ: Pearson correlation of mid-ranks.
pub fn spearman(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(StatsError::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.len() < 2 {
        return Err(StatsError::TooShort {
            needed: 2,
            got: a.len(),
        });
    }
    let constant = |v: &[f64]| v.iter().all(|x| *x == v[0]);
    if constant(a) {
        return Err(StatsError::ConstantInput("a"));
    }
    if constant(b) {
        return Err(StatsError::ConstantInput("b"));
    }
    Ok(pearson(&mid_ranks(a), &mid_ranks(b)))
}

/// κ on the binary labels and ρ on the continuous scores of the same items.
pub fn agreement(
    binary_a: &[bool],
    binary_b: &[bool],
    scores_a: &[f64],
    scores_b: &[f64],
) -> Result<AgreementStats> {
    if binary_a.len() != scores_a.len() {
        return Err(StatsError::LengthMismatch {
            left: binary_a.len(),
            right: scores_a.len(),
        });
    }
    Ok(AgreementStats {
        kappa: cohen_kappa(binary_a, binary_b)?,
        spearman_rho: spearman(scores_a, scores_b)?,
        contingency: contingency(binary_a, binary_b)?,
        n: binary_a.len(),
    })
}
