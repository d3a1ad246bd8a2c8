use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use crate::params::{self, Link, ParamMatrix};

use super::table::{CountTable, DataError};
use super::FitError;

/// Draws a product-multinomial table from the model with coefficients
/// `beta`: one independent multinomial sample of size `totals[E]` per
/// covariate cell. Deterministic for a fixed seed.
pub fn simulate(beta: &ParamMatrix, link: Link, totals: &[u64], seed: u64) -> Result<CountTable, FitError> {
    let pi = params::pi_from_beta(beta, link)?;
    simulate_from_pi(&pi, totals, seed)
}

/// As [`simulate`], from cell probabilities.
pub fn simulate_from_pi(pi: &ParamMatrix, totals: &[u64], seed: u64) -> Result<CountTable, FitError> {
    if totals.len() != pi.n_cols() {
        return Err(FitError::Data(DataError::Shape {
            expected: pi.n_cols(),
            got: totals.len(),
        }));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut table = CountTable::zeros(pi.rows().clone(), pi.cols().clone());
    for (e, &n) in totals.iter().enumerate() {
        // sequential conditional binomials
        let mut left = n;
        let mut mass = 1.0;
        for d in 0..pi.n_rows() {
            if left == 0 {
                break;
            }
            let p = pi.get(d, e);
            let k = if d + 1 == pi.n_rows() || mass <= p {
                left
            } else {
                let prob = (p / mass).clamp(0.0, 1.0);
                Binomial::new(left, prob).expect("valid binomial").sample(&mut rng)
            };
            table.add(d, e, k);
            left -= k;
            mass -= p;
        }
    }
    Ok(table)
}
