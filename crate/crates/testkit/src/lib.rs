//! Reference implementations used only by tests.
//!
//! Everything here is written independently of the production crates:
//! different algorithms (normal equations instead of QR, Gauss–Hermite
//! quadrature instead of Laplace, Simpson instead of Gauss–Legendre,
//! brute-force counting instead of contingency tables) so that agreement
//! between the two is meaningful.

pub mod agreement;
pub mod logistic;
pub mod ols;
pub mod quadrature;
pub mod risk;
pub mod sim;
pub mod tukey;
