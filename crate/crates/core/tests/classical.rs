//! The single-sheet complex against the classical grid complex oracle.

mod common;

use std::collections::{BTreeMap, HashMap};

use common::classical::{classical, f2_homology, grading};
use common::*;
use covergrid::homology::Coeff;
use covergrid::pipeline::run;
use covergrid::{Cuts, Rational};

fn ranks(pairs: &[(i64, usize)]) -> BTreeMap<Rational, usize> {
    pairs.iter().map(|&(a, r)| (Rational::from_integer(a), r)).collect()
}

#[test]
fn rectangles_match_the_classical_complex() {
    for g in [u2(), u3(), t5(), random_knot(5, 7), random_knot(6, 3)] {
        let oracle = classical(&g);
        let r = run(&g, 1, Cuts::Vertical, Coeff::Z, None).unwrap();
        let c = &r.complex;
        assert_eq!(c.len(), oracle.gens.len());
        let mut mine: HashMap<(usize, usize), usize> = HashMap::new();
        for e in &c.edges {
            let f: Vec<usize> = c.gens[e.from as usize].iter().map(|&v| v as usize).collect();
            let t: Vec<usize> = c.gens[e.to as usize].iter().map(|&v| v as usize).collect();
            let fi = oracle.gens.iter().position(|v| *v == f).unwrap();
            let ti = oracle.gens.iter().position(|v| *v == t).unwrap();
            *mine.entry((fi, ti)).or_insert(0) += 1;
        }
        assert_eq!(mine, oracle.rects);
        assert!(oracle.rects.values().all(|&k| k <= 2));
        for (k, x) in c.gens.iter().enumerate() {
            let p: Vec<usize> = x.iter().map(|&v| v as usize).collect();
            assert_eq!(c.alexander[k], grading(&g, &p));
        }
    }
}

#[test]
fn single_sheet_homology_matches_the_oracle() {
    let u = run(&u2(), 1, Cuts::Vertical, Coeff::Z, None).unwrap().homology;
    assert_eq!(u.rank_map(), ranks(&[(0, 1), (-1, 1)]));
    assert_eq!(f2_homology(&classical(&u2())), u.rank_map());

    let t = run(&t5(), 1, Cuts::Vertical, Coeff::Z, None).unwrap().homology;
    let oracle = f2_homology(&classical(&t5()));
    assert_eq!(t.rank_map(), oracle);
    assert!(t.torsion_map().is_empty());
    assert_eq!(t.total_rank(), 48);
    // ranks 1, 1, 1 in gradings 1, 0, -1 times (1 + t^-1)^4
    let spread = ranks(&[(1, 1), (0, 5), (-1, 11), (-2, 14), (-3, 11), (-4, 5), (-5, 1)]);
    assert_eq!(t.rank_map(), spread);
}
