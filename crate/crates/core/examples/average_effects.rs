//! Average covariate effects by pattern size under both links, the series
//! behind an effect-by-order plot.

use lmlreg::inference::{fit, simulate, FitOptions, ModelSpec};
use lmlreg::lattice::SubsetLattice;
use lmlreg::params::{Link, ParamKind, ParamMatrix};
use lmlreg::selection::average_effects;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let v = SubsetLattice::new(&["b", "c", "d"])?;
    let u = SubsetLattice::new(&["h"])?;
    let mut truth = ParamMatrix::zeros(ParamKind::BetaGamma, v.clone(), u.clone());
    for (d, e, x) in [("{b}", "{}", -1.1), ("{b}", "{h}", 0.3), ("{c}", "{}", -1.0), ("{c}", "{h}", 0.2), ("{d}", "{}", -0.9), ("{b,c}", "{}", -0.3), ("{b,c}", "{h}", 0.2)] {
        truth.set(v.parse(d)?, u.parse(e)?, x);
    }
    let data = simulate(&truth, Link::Lml, &[8000, 8000], 5)?;
    println!("link\tk\testimate\tci_lo\tci_hi");
    for link in [Link::Lm, Link::Lml] {
        let f = fit(&ModelSpec::saturated(link), &data, &FitOptions::default())?;
        for a in average_effects(&f, &data, 0)? {
            println!("{}\t{}\t{:.3}\t{:.3}\t{:.3}", link.name(), a.k, a.estimate, a.ci.0, a.ci.1);
        }
    }
    Ok(())
}
