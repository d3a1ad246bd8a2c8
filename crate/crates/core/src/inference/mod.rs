//! Product-multinomial likelihood, constrained maximum likelihood fitting,
//! Wald tests, deviance and simulation.

mod fit;
mod model;
mod simulate;
pub(crate) mod table;

use thiserror::Error;

use crate::params::ParamError;

pub use fit::{
    chi_square_sf, deviance, fit, loglik, wald_p_value, wald_tests, Deviance, FitOptions, FitResult,
    Objective, WaldTest,
};
pub use model::{coefficient_order, ModelSpec};
pub use simulate::{simulate, simulate_from_pi};
pub use table::{CountTable, DataError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FitError {
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error("invalid model: {0}")]
    InvalidSpec(String),
    #[error("no starting point inside the parameter space satisfies the constraints")]
    NoValidStart,
}
