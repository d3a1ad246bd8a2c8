//! Margin-by-margin forward selection on data simulated from a sparse model,
//! printing the trace and comparing the chosen zeros with the truth.

use lmlreg::inference::{simulate, FitOptions, ModelSpec};
use lmlreg::lattice::SubsetLattice;
use lmlreg::params::{Link, ParamKind, ParamMatrix};
use lmlreg::selection::forward_margin_selection;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let v = SubsetLattice::new(&["b", "c", "d"])?;
    let u = SubsetLattice::new(&["h"])?;
    let mut truth = ParamMatrix::zeros(ParamKind::BetaGamma, v.clone(), u.clone());
    for (d, e, x) in [("{b}", "{}", -1.2), ("{b}", "{h}", 0.4), ("{c}", "{}", -1.0), ("{c}", "{h}", 0.3), ("{d}", "{}", -1.1), ("{b,c}", "{}", -0.4), ("{c,d}", "{h}", 0.35)] {
        truth.set(v.parse(d)?, u.parse(e)?, x);
    }
    let data = simulate(&truth, Link::Lml, &[10_000, 10_000], 11)?;
    let trace = forward_margin_selection(&data, Link::Lml, 0.05, &FitOptions::default())?;

    for s in &trace.steps {
        let dropped: Vec<String> = s.dropped.iter().map(|&(d, e)| format!("{};{}", v.format(d), u.format(e))).collect();
        let margin = s.margin.map_or(String::new(), |d| v.format(d));
        println!("{:<8}{:<10} dev {:8.3} df {:2} p {:.3}  dropped {}", s.stage, margin, s.deviance, s.df, s.p_value, dropped.join(" "));
    }
    let true_zeros: Vec<(usize, usize)> =
        (1..v.size()).flat_map(|d| (0..u.size()).map(move |e| (d, e))).filter(|&(d, e)| truth.get(d, e) == 0.0).collect();
    let chosen = trace.final_spec.zero_set();
    println!("exact recovery: {}", *chosen == ModelSpec::new(Link::Lml, true_zeros)?.zero_set().clone());
    Ok(())
}
