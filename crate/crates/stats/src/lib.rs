//! Statistics engine for comment-health analyses.
//!
//! * [`fit_glmm_logit`]: random-intercept logistic regression (Laplace).
//! * [`fit_ols`]: least squares with factor interactions.
//! * [`wald_type2`]: joint Wald χ² tests per term.
//! * [`emmeans`] / [`pairwise_or`]: marginal means and Tukey-adjusted
//!   odds ratios.
//! * [`cohen_kappa`] / [`spearman`]: agreement between labelings.
//!
//! Models are described by a [`ModelSpec`] over a [`DataTable`]; factors
//! use treatment coding against a chosen reference level.

pub mod agreement;
pub mod design;
pub mod dist;
pub mod emm;
pub mod error;
pub mod format;
pub mod glmm;
pub mod model;
pub mod ols;
pub mod optim;
pub mod reply;
pub mod table;
pub mod wald;

pub use agreement::{agreement, cohen_kappa, contingency, mid_ranks, spearman, AgreementStats};
pub use design::{Design, DesignInfo, FactorSpec, ModelSpec};
pub use emm::{contrast, emmeans, pairwise_or, EmmLevel, EmmResult, EmmWeights, PairwiseComparison};
pub use error::{Result, StatsError};
pub use glmm::{fit_glmm_design, fit_glmm_logit, laplace_loglik, GlmmFit, GlmmOptions, VarianceConstraint};
pub use model::{inv_logit, logit, CoefficientRow, FittedModel, Link};
pub use ols::{fit_ols, fit_ols_design, OlsFit};
pub use reply::{mean_reply_health, ThreadStats};
pub use table::{Column, DataTable};
pub use wald::{wald_type2, ChiSqTest};
