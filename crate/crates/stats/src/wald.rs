//! Type II Wald chi-square tests over a term's coefficient block.
//!
//! For main-effects models the Type II test of a term is the joint Wald
//! test of its coefficient block, `b' V⁻¹ b`, which does not depend on the
//! reference levels chosen for other factors.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dist::chisq_sf;
use crate::error::{Result, StatsError};
use crate::format::p_clause;
use crate::model::FittedModel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChiSqTest {
    pub term: String,
    pub statistic: f64,
    pub df: usize,
    pub p: f64,
}

impl fmt::Display for ChiSqTest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "χ²({}) = {:.2}, {}", self.df, self.statistic, p_clause(self.p))
    }
}

pub fn wald_type2(fit: &dyn FittedModel, term: &str) -> Result<ChiSqTest> {
    let info = fit.design();
    let block = info
        .term(term)
        .ok_or_else(|| StatsError::UnknownTerm(term.to_string()))?
        .columns
        .clone();
    let df = block.len();
    if df == 0 {
        return Err(StatsError::TooFewLevels(1));
    }
    let beta = fit.beta();
    let vcov = fit.vcov();
    let statistic = if df == 1 {
        let j = block.start;
        let z = beta[j] / vcov[(j, j)].sqrt();
        z * z
    } else {
        let b = beta.rows(block.start, df).into_owned();
        let v = vcov.view((block.start, block.start), (df, df)).into_owned();
        let chol = v
            .cholesky()
            .ok_or_else(|| StatsError::SingularBlock(term.to_string()))?;
        b.dot(&chol.solve(&b))
    };
    if !statistic.is_finite() {
        return Err(StatsError::SingularBlock(term.to_string()));
    }
    Ok(ChiSqTest {
        term: term.to_string(),
        statistic,
        df,
        p: chisq_sf(statistic, df as f64),
    })
}
