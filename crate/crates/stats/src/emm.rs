//! Estimated marginal means and Tukey-adjusted pairwise odds ratios.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::dist::{norm_quantile, norm_two_sided, ptukey_sf, qtukey};
use crate::error::{Result, StatsError};
use crate::model::{FittedModel, Link};

/// How the other factors' levels are averaged over.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmmWeights {
    /// Every combination of the other factors' levels counts equally.
    #[default]
    Equal,
    /// Combinations are weighted by their observed frequency.
    Proportional,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmmLevel {
    pub level: String,
    /// Averaged linear predictor (log-odds for logit models).
    pub linear_predictor: f64,
    pub se: f64,
    /// Inverse link of the averaged linear predictor.
    pub response: f64,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmmResult {
    pub factor: String,
    pub link: Link,
    pub weights: EmmWeights,
    pub averaged_over: Vec<String>,
    pub levels: Vec<EmmLevel>,
    /// Averaged design row per level; `linear_predictor = row · β`.
    #[serde(skip)]
    pub rows: Vec<DVector<f64>>,
}

impl EmmResult {
    pub fn level(&self, name: &str) -> Option<&EmmLevel> {
        self.levels.iter().find(|l| l.level == name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseComparison {
    pub pair: (String, String),
    pub log_odds_ratio: f64,
    pub odds_ratio: f64,
    pub se: f64,
    pub z: f64,
    /// Tukey-adjusted 95% interval for the odds ratio.
    pub ci: (f64, f64),
    pub p_unadjusted: f64,
    pub p_adjusted: f64,
}

pub fn emmeans(fit: &dyn FittedModel, factor: &str, weights: EmmWeights) -> Result<EmmResult> {
    let info = fit.design();
    let focal = info
        .factor_index(factor)
        .ok_or_else(|| StatsError::UnknownTerm(factor.to_string()))?;
    let others: Vec<usize> = (0..info.factors.len()).filter(|&f| f != focal).collect();
    let covariates: Vec<f64> = info.covariates.iter().map(|c| c.mean).collect();

    // Grid over the other factors' level combinations.
    let mut grid: Vec<Vec<usize>> = vec![Vec::new()];
    for &f in &others {
        let n = info.factors[f].levels.len();
        grid = grid
            .into_iter()
            .flat_map(|combo| {
                (0..n).map(move |l| {
                    let mut c = combo.clone();
                    c.push(l);
                    c
                })
            })
            .collect();
    }
    let cell_weights: Vec<f64> = match weights {
        EmmWeights::Equal => vec![1.0 / grid.len() as f64; grid.len()],
        EmmWeights::Proportional => {
            let counts: Vec<f64> = grid
                .iter()
                .map(|combo| {
                    info.cells
                        .iter()
                        .filter(|(key, _)| others.iter().zip(combo).all(|(&f, &l)| key[f] == l))
                        .map(|(_, &c)| c as f64)
                        .sum()
                })
                .collect();
            let total: f64 = counts.iter().sum();
            counts.into_iter().map(|c| c / total).collect()
        }
    };

    let beta = fit.beta();
    let vcov = fit.vcov();
    let link = fit.link();
    let z95 = norm_quantile(0.975);
    let mut levels = Vec::new();
    let mut rows = Vec::new();
    for (li, name) in info.factors[focal].levels.iter().enumerate() {
        let mut avg = DVector::zeros(info.n_coef());
        let mut assign = vec![0usize; info.factors.len()];
        assign[focal] = li;
        for (combo, w) in grid.iter().zip(&cell_weights) {
            for (&f, &l) in others.iter().zip(combo) {
                assign[f] = l;
            }
            avg.axpy(*w, &info.row(&assign, &covariates), 1.0);
        }
        let eta = avg.dot(beta);
        let se = (avg.transpose() * vcov * &avg)[(0, 0)].max(0.0).sqrt();
        levels.push(EmmLevel {
            level: name.clone(),
            linear_predictor: eta,
            se,
            response: link.inverse(eta),
            lower: link.inverse(eta - z95 * se),
            upper: link.inverse(eta + z95 * se),
        });
        rows.push(avg);
    }

    Ok(EmmResult {
        factor: factor.to_string(),
        link,
        weights,
        averaged_over: others.iter().map(|&f| info.factors[f].name.clone()).collect(),
        levels,
        rows,
    })
}

/// All pairwise odds ratios between levels, in level order
/// (first vs second, first vs third, ...), Tukey-adjusted over the
/// `k` levels of the factor.
pub fn pairwise_or(emm: &EmmResult, fit: &dyn FittedModel) -> Result<Vec<PairwiseComparison>> {
    let k = emm.levels.len();
    if k < 2 {
        return Err(StatsError::TooFewLevels(k));
    }
    let mut out = Vec::with_capacity(k * (k - 1) / 2);
    for i in 0..k {
        for j in i + 1..k {
            out.push(compare(emm, fit, i, j, k)?);
        }
    }
    Ok(out)
}

/// Odds ratio of level `a` against level `b`.
pub fn contrast(emm: &EmmResult, fit: &dyn FittedModel, a: &str, b: &str) -> Result<PairwiseComparison> {
    let idx = |name: &str| {
        emm.levels
            .iter()
            .position(|l| l.level == name)
            .ok_or_else(|| StatsError::UnknownTerm(format!("{}[{}]", emm.factor, name)))
    };
    let k = emm.levels.len();
    if k < 2 {
        return Err(StatsError::TooFewLevels(k));
    }
    compare(emm, fit, idx(a)?, idx(b)?, k)
}

fn compare(emm: &EmmResult, fit: &dyn FittedModel, i: usize, j: usize, k: usize) -> Result<PairwiseComparison> {
    if fit.link() != Link::Logit {
        return Err(StatsError::NotLogit);
    }
    let log_or = emm.levels[i].linear_predictor - emm.levels[j].linear_predictor;
    let c = &emm.rows[i] - &emm.rows[j];
    let se = (c.transpose() * fit.vcov() * &c)[(0, 0)].max(0.0).sqrt();
    let z = if se == 0.0 && log_or == 0.0 { 0.0 } else { log_or / se };
    let half_width = qtukey(0.95, k) / std::f64::consts::SQRT_2 * se;
    Ok(PairwiseComparison {
        pair: (emm.levels[i].level.clone(), emm.levels[j].level.clone()),
        log_odds_ratio: log_or,
        odds_ratio: log_or.exp(),
        se,
        z,
        ci: ((log_or - half_width).exp(), (log_or + half_width).exp()),
        p_unadjusted: norm_two_sided(z),
        p_adjusted: ptukey_sf(std::f64::consts::SQRT_2 * z.abs(), k),
    })
}
