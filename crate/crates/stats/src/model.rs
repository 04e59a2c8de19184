//! Shared view over fitted linear-predictor models.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::design::DesignInfo;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Link {
    Identity,
    Logit,
}

impl Link {
    pub fn inverse(self, eta: f64) -> f64 {
        match self {
            Link::Identity => eta,
            Link::Logit => inv_logit(eta),
        }
    }
}

pub fn inv_logit(eta: f64) -> f64 {
    if eta >= 0.0 {
        1.0 / (1.0 + (-eta).exp())
    } else {
        let e = eta.exp();
        e / (1.0 + e)
    }
}

pub fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// A fitted model with coefficients on a linear-predictor scale.
pub trait FittedModel {
    fn design(&self) -> &DesignInfo;
    fn beta(&self) -> &DVector<f64>;
    fn vcov(&self) -> &DMatrix<f64>;
    fn link(&self) -> Link;
}

/// One row of a coefficient table (estimate, SE, z or t, p).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientRow {
    pub predictor: String,
    pub estimate: f64,
    pub se: f64,
    pub statistic: f64,
    pub p: f64,
}
