//! Log-mean (LM) and log-mean-linear (LML) regression for multivariate binary
//! responses with binary covariates.

pub mod cli;
pub mod inference;
pub mod lattice;
pub mod params;
pub mod risk;
pub mod selection;
