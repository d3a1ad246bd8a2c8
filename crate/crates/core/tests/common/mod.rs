//! Shared fixtures: the two reference zero patterns with valid coefficient
//! values, and random parameter generators.

#![allow(dead_code)]

use std::collections::BTreeSet;

use lmlreg::inference::ModelSpec;
use lmlreg::lattice::SubsetLattice;
use lmlreg::params::{Link, ParamKind, ParamMatrix};
use rand::Rng;

pub fn lat(labels: &[&str]) -> SubsetLattice {
    SubsetLattice::new(labels).unwrap()
}

pub fn responses() -> SubsetLattice {
    lat(&["b", "c", "d", "r"])
}

fn pairs(v: &SubsetLattice, u: &SubsetLattice, list: &[(&str, &[&str])]) -> BTreeSet<(usize, usize)> {
    list.iter()
        .flat_map(|(d, es)| es.iter().map(|e| (v.parse(d).unwrap(), u.parse(e).unwrap())))
        .collect()
}

fn matrix(v: SubsetLattice, u: SubsetLattice, coeffs: &[(&str, &str, f64)]) -> ParamMatrix {
    let mut m = ParamMatrix::zeros(ParamKind::BetaGamma, v, u);
    for (d, e, x) in coeffs {
        let (d, e) = (m.rows().parse(d).unwrap(), m.cols().parse(e).unwrap());
        m.set(d, e, *x);
    }
    m
}

/// Zero pattern of the selected single-covariate model: 12 constraints.
pub fn single_covariate_zeros() -> BTreeSet<(usize, usize)> {
    pairs(&responses(), &lat(&["h"]), &[
        ("{b,c}", &["{h}"]),
        ("{b,d}", &["{}", "{h}"]),
        ("{b,r}", &["{}", "{h}"]),
        ("{c,r}", &["{}", "{h}"]),
        ("{d,r}", &["{h}"]),
        ("{b,c,d}", &["{}", "{h}"]),
        ("{c,d,r}", &["{}", "{h}"]),
    ])
}

pub fn single_covariate_spec() -> ModelSpec {
    ModelSpec::new(Link::Lml, single_covariate_zeros()).unwrap()
}

/// LML coefficients with the 12-zero pattern; every free value is far from
/// zero relative to its standard error at n = 20,000.
pub fn single_covariate_truth() -> ParamMatrix {
    matrix(responses(), lat(&["h"]), &[
        ("{b}", "{}", -0.96),
        ("{b}", "{h}", 0.36),
        ("{c}", "{}", -1.06),
        ("{c}", "{h}", 0.35),
        ("{d}", "{}", -0.80),
        ("{d}", "{h}", -0.48),
        ("{r}", "{}", -0.65),
        ("{r}", "{h}", -0.35),
        ("{b,c}", "{}", -0.41),
        ("{c,d}", "{}", -0.43),
        ("{c,d}", "{h}", 0.31),
        ("{d,r}", "{}", -0.31),
        ("{b,c,r}", "{}", 0.30),
        ("{b,c,r}", "{h}", -0.49),
        ("{b,d,r}", "{}", -0.46),
        ("{b,d,r}", "{h}", 0.35),
        ("{b,c,d,r}", "{}", 0.50),
        ("{b,c,d,r}", "{h}", 0.36),
    ])
}

/// Covariates `a`, `h` (so `{a}` is mask 1, `{h}` mask 2).
pub fn covariates_ah() -> SubsetLattice {
    lat(&["a", "h"])
}

/// Zero pattern of the selected two-covariate model: 33 constraints.
pub fn two_covariate_zeros() -> BTreeSet<(usize, usize)> {
    let v = responses();
    let u = covariates_ah();
    let mut z = pairs(&v, &u, &[
        ("{b,c}", &["{a}"]),
        ("{b,d}", &["{}", "{a}", "{h}"]),
        ("{c,r}", &["{a}"]),
        ("{b,c,d}", &["{}", "{a}", "{h}"]),
        ("{b,c,r}", &["{}", "{a}", "{h}"]),
        ("{b,d,r}", &["{}", "{a}", "{h}"]),
        ("{c,d,r}", &["{a}"]),
        ("{b,c,d,r}", &["{}", "{a}", "{h}"]),
    ]);
    z.extend((1..16).map(|d| (d, 3)));
    z
}

pub fn two_covariate_spec() -> ModelSpec {
    ModelSpec::new(Link::Lml, two_covariate_zeros()).unwrap()
}

pub fn two_covariate_truth() -> ParamMatrix {
    matrix(responses(), covariates_ah(), &[
        ("{b}", "{}", -1.49),
        ("{b}", "{a}", 0.42),
        ("{b}", "{h}", 0.32),
        ("{c}", "{}", -1.09),
        ("{c}", "{a}", -0.32),
        ("{c}", "{h}", 0.39),
        ("{d}", "{}", -1.31),
        ("{d}", "{a}", -0.42),
        ("{d}", "{h}", 0.31),
        ("{r}", "{}", -1.48),
        ("{r}", "{a}", -0.38),
        ("{r}", "{h}", 0.32),
        ("{b,c}", "{}", -0.34),
        ("{b,c}", "{h}", 0.43),
        ("{b,r}", "{}", 0.46),
        ("{b,r}", "{a}", -0.31),
        ("{b,r}", "{h}", -0.39),
        ("{c,d}", "{}", 0.47),
        ("{c,d}", "{a}", 0.32),
        ("{c,d}", "{h}", -0.35),
        ("{c,r}", "{}", 0.31),
        ("{c,r}", "{h}", -0.40),
        ("{d,r}", "{}", 0.39),
        ("{d,r}", "{a}", 0.39),
        ("{d,r}", "{h}", -0.35),
        ("{c,d,r}", "{}", -0.38),
        ("{c,d,r}", "{h}", 0.49),
    ])
}

/// Strictly positive cell probabilities, each column normalized.
pub fn random_pi<R: Rng>(rng: &mut R, p: usize, q: usize, floor: f64) -> ParamMatrix {
    let rows = SubsetLattice::numbered(p).unwrap();
    let cols = SubsetLattice::numbered(q).unwrap();
    let mut m = ParamMatrix::from_fn(ParamKind::Pi, rows, cols, |_, _| rng.gen_range(floor..1.0));
    for e in 0..m.n_cols() {
        let s: f64 = m.column(e).iter().sum();
        for d in 0..m.n_rows() {
            let v = m.get(d, e) / s;
            m.set(d, e, v);
        }
    }
    m
}

/// Splits `n` evenly over `cells` covariate cells.
pub fn even_totals(n: u64, cells: usize) -> Vec<u64> {
    let c = cells as u64;
    (0..c).map(|i| n / c + u64::from(i < n % c)).collect()
}
