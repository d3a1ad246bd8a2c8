//! Monte Carlo check of the fitted standard errors: coverage of nominal 95%
//! Wald intervals over repeated simulation.

use lmlreg::inference::{fit, simulate, FitOptions, ModelSpec};
use lmlreg::lattice::SubsetLattice;
use lmlreg::params::{Link, ParamKind, ParamMatrix};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let truth = ParamMatrix::new(
        ParamKind::BetaGamma,
        SubsetLattice::new(&["b", "c"])?,
        SubsetLattice::new(&["h"])?,
        vec![0.0, 0.0, -1.0, 0.4, -0.7, -0.3, 0.5, 0.0],
    )?;
    let spec = ModelSpec::new(Link::Lml, [(3, 1)])?;
    let opts = FitOptions::default();
    let reps = 500;
    let mut covered = vec![0usize; spec.free_coefficients(truth.rows(), truth.cols()).len()];
    for seed in 0..reps {
        let data = simulate(&truth, Link::Lml, &[1000, 1000], seed)?;
        let f = fit(&spec, &data, &opts)?;
        for (k, &(d, e)) in f.free.iter().enumerate() {
            let se = f.std_errors[k].unwrap_or(f64::INFINITY);
            covered[k] += usize::from((f.estimates[k] - truth.get(d, e)).abs() <= 1.96 * se);
        }
    }
    for (k, c) in covered.iter().enumerate() {
        println!("coefficient {k}: coverage {:.3}", *c as f64 / reps as f64);
    }
    Ok(())
}
