//! Relative risks, their reference values under conditional independence,
//! and the independencies implied by a set of structural zeros.

use lmlreg::inference::{fit, simulate, FitOptions, ModelSpec};
use lmlreg::lattice::SubsetLattice;
use lmlreg::params::{Link, ParamKind, ParamMatrix};
use lmlreg::risk::{implied_response_independencies, risk_report, IndependenceSource};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let v = SubsetLattice::new(&["b", "c", "d"])?;
    let u = SubsetLattice::new(&["h"])?;
    let mut truth = ParamMatrix::zeros(ParamKind::BetaGamma, v.clone(), u.clone());
    for (d, e, x) in [("{b}", "{}", -1.0), ("{b}", "{h}", 0.4), ("{c}", "{}", -0.8), ("{d}", "{}", -0.6), ("{d}", "{h}", -0.3), ("{c,d}", "{}", 0.5)] {
        truth.set(v.parse(d)?, u.parse(e)?, x);
    }
    // b is unrelated to c and d given h
    let zeros = ["{b,c}", "{b,d}", "{b,c,d}"]
        .iter()
        .flat_map(|d| [(v.parse(d).unwrap(), 0), (v.parse(d).unwrap(), 1)])
        .chain([(v.parse("{c,d}")?, 1)]);
    let spec = ModelSpec::new(Link::Lml, zeros)?;

    let data = simulate(&truth, Link::Lml, &[5000, 5000], 3)?;
    let f = fit(&spec, &data, &FitOptions::default())?;

    println!("D\tu\tE\trr\tref_rr\tratio");
    for r in risk_report(&f.beta_hat, Some(&spec))?.entries {
        let fmt = |x: Option<f64>| x.map_or("-".into(), |x| format!("{:.3}", x.exp()));
        println!(
            "{}\t{}\t{}\t{:.3}\t{}\t{}{}",
            v.format(r.response),
            u.labels()[r.covariate],
            u.format(r.context),
            r.log_rr.exp(),
            fmt(r.log_ref_rr),
            fmt(r.log_ratio),
            if r.constrained { "\tconstrained" } else { "" },
        );
    }
    let source = IndependenceSource::Spec { spec: &spec, responses: &v, covariates: &u };
    for ind in implied_response_independencies(source) {
        println!("Y{} independent of Y{} given X", v.format(ind.left), v.format(ind.right));
    }
    Ok(())
}
