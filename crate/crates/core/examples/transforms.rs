//! Moves one table of cell probabilities through every parameterization
//! and back.
//!
//! ```text
//! cargo run --example transforms
//! ```

use lmlreg::lattice::SubsetLattice;
use lmlreg::params::{self, Link, ParamKind, ParamMatrix};
use lmlreg::risk::reference_coeffs;

fn show(m: &ParamMatrix) {
    println!("{}", m.kind().name());
    for d in m.rows().display_order() {
        let row: Vec<String> = (0..m.n_cols()).map(|e| format!("{:8.4}", m.get(d, e))).collect();
        println!("  {:<8}{}", m.rows().format(d), row.join(" "));
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let rows = SubsetLattice::new(&["b", "c"])?;
    let cols = SubsetLattice::new(&["h"])?;
    // columns are the covariate cells {} and {h}; each sums to one
    let pi = ParamMatrix::new(ParamKind::Pi, rows, cols, vec![0.40, 0.30, 0.10, 0.20, 0.20, 0.10, 0.30, 0.40])?;

    let mu = params::mu_from_pi(&pi)?;
    let beta_mu = params::beta_from_pi(&pi, Link::Lm)?;
    let beta_gamma = params::beta_from_pi(&pi, Link::Lml)?;
    for m in [&pi, &mu, &params::log_mu_from_mu(&mu)?, &params::gamma_from_mu(&mu)?, &beta_mu, &beta_gamma] {
        show(m);
    }
    show(&reference_coeffs(&beta_mu)?);

    let back = params::pi_from_beta(&beta_gamma, Link::Lml)?;
    println!("round trip error {:.2e}", back.max_abs_diff(&pi));
    Ok(())
}
