//! Staged backward elimination with two covariates: the interaction column
//! is removed first, then higher-order patterns, then everything else.

use lmlreg::inference::{simulate, FitOptions};
use lmlreg::lattice::SubsetLattice;
use lmlreg::params::{Link, ParamKind, ParamMatrix};
use lmlreg::selection::{backward_staged_selection, StagePolicy};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let v = SubsetLattice::new(&["b", "c", "d"])?;
    let u = SubsetLattice::new(&["a", "h"])?;
    let mut truth = ParamMatrix::zeros(ParamKind::BetaGamma, v.clone(), u.clone());
    for (d, e, x) in [
        ("{b}", "{}", -1.2),
        ("{b}", "{a}", 0.4),
        ("{c}", "{}", -0.9),
        ("{c}", "{h}", 0.5),
        ("{d}", "{}", -1.0),
        ("{d}", "{a}", -0.4),
        ("{d}", "{h}", 0.3),
        ("{b,d}", "{}", 0.5),
    ] {
        truth.set(v.parse(d)?, u.parse(e)?, x);
    }
    let data = simulate(&truth, Link::Lml, &[5000; 4], 2)?;
    let policy = StagePolicy::default_for(v.ground_size());
    let trace = backward_staged_selection(&data, Link::Lml, 0.05, &policy, &FitOptions::default())?;

    for s in &trace.steps {
        println!("{:<28} zeros {:2}  deviance {:8.3}  p {:.3}", s.stage, s.df, s.deviance, s.p_value);
    }
    let f = &trace.final_fit;
    println!("kept coefficients:");
    for (k, &(d, e)) in f.free.iter().enumerate() {
        println!("  {:<8}{:<6}{:7.3}", v.format(d), u.format(e), f.estimates[k]);
    }
    Ok(())
}
