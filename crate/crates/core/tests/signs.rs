mod common;

use common::*;
use covergrid::clifford::{edge_signs, formal_rect_of_edge, CurveFrame, FormalGen, FormalRect, Spinors};
use covergrid::homology::{homology, Coeff};
use covergrid::signs::{check_d_squared, composite_classes, generate_constraints, signed_boundary, solve, Supports};
use covergrid::snf::{dense_invariant_factors, smith_normal_form, PivotStrategy, SparseMatrix};
use covergrid::{ChainComplex, CoverDiagram, Cuts, GridDiagram};
use num_bigint::BigInt;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn complex(g: &GridDiagram, m: usize) -> ChainComplex {
    ChainComplex::build(&CoverDiagram::new(g, m, Cuts::Vertical).unwrap()).unwrap()
}

#[test]
fn solved_signs_square_to_zero() {
    for (g, m) in [(u2(), 1), (u2(), 2), (u2(), 3), (u3(), 1), (u3(), 2), (u3(), 3), (t5(), 1), (t5(), 2)] {
        let c = complex(&g, m);
        let p = generate_constraints(&c).unwrap();
        let sol = solve(&c, &p, None).unwrap();
        assert!(p.system.all_hold(&sol.var_sign.iter().map(|&s| s < 0).collect::<Vec<_>>()));
        check_d_squared(&c, &sol.edge_sign).unwrap();
        // entries lie in -2..=2 and reduce to the unsigned boundary
        let entries = signed_boundary(&c, &sol.edge_sign);
        assert!(entries.iter().all(|e| (-2..=2).contains(&e.2)));
        let mut odd: Vec<(u32, u32)> = entries.iter().filter(|e| e.2 % 2 != 0).map(|e| (e.0, e.1)).collect();
        odd.sort();
        assert_eq!(odd, c.boundary_mod2());
    }
}

#[test]
fn empty_complex_gets_trivial_signs() {
    let c = complex(&u2(), 1);
    let p = generate_constraints(&c).unwrap();
    assert!(p.system.equations.is_empty());
    assert!(solve(&c, &p, None).unwrap().edge_sign.is_empty());
}

#[test]
fn one_equation_per_pair_of_paths() {
    let c = complex(&t5(), 1);
    let p = generate_constraints(&c).unwrap();
    assert_eq!(2 * p.system.equations.len(), p.paths);
}

#[test]
fn gauge_transforms_keep_every_constraint() {
    let c = complex(&t5(), 2);
    let p = generate_constraints(&c).unwrap();
    let sol = solve(&c, &p, None).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..5 {
        let u: Vec<i8> = (0..c.len()).map(|_| if rng.gen() { -1 } else { 1 }).collect();
        let t: Vec<bool> = p
            .vars
            .pairs
            .iter()
            .enumerate()
            .map(|(v, &(a, b))| sol.var_sign[v] * u[a as usize] * u[b as usize] < 0)
            .collect();
        assert!(p.system.all_hold(&t));
    }
}

#[test]
fn different_solutions_give_the_same_homology() {
    for (g, m) in [(u3(), 2), (t5(), 2)] {
        let c = complex(&g, m);
        let p = generate_constraints(&c).unwrap();
        let base = homology(&c, &signed_boundary(&c, &solve(&c, &p, None).unwrap().edge_sign), Coeff::Z);
        for seed in [1, 2] {
            let s = solve(&c, &p, Some(seed)).unwrap();
            check_d_squared(&c, &s.edge_sign).unwrap();
            assert_eq!(homology(&c, &signed_boundary(&c, &s.edge_sign), Coeff::Z), base);
        }
    }
}

fn frames(c: &ChainComplex) -> Vec<CurveFrame> {
    let l = c.cover.lifts();
    let std = CurveFrame::standard(&c.cover);
    let rev: Vec<usize> = (0..l).rev().collect();
    let rot: Vec<usize> = (0..l).map(|i| (i + 2) % l).collect();
    vec![std.clone(), std.clone().reverse_alpha(1).reverse_beta(l - 1), std.permuted(&rev, &rot)]
}

#[test]
fn spinor_signs_agree_with_the_solver() {
    for (g, m) in [(u3(), 2), (t5(), 1), (t5(), 2)] {
        let c = complex(&g, m);
        let p = generate_constraints(&c).unwrap();
        let f2 = homology(&c, &signed_boundary(&c, &solve(&c, &p, None).unwrap().edge_sign), Coeff::Z);
        for f in frames(&c) {
            let s = edge_signs(&c, &f).unwrap();
            check_d_squared(&c, &s).unwrap();
            // every square anticommutes under the spinor signs too
            let sup = Supports::new(&c);
            for x in 0..c.len() {
                for class in composite_classes(&c, &sup, x) {
                    let prod = |(a, b): (u32, u32)| s[a as usize] * s[b as usize];
                    assert_eq!(prod(class[0]), -prod(class[1]));
                }
            }
            assert_eq!(homology(&c, &signed_boundary(&c, &s), Coeff::Z), f2);
        }
    }
}

#[test]
fn annulus_degenerations() {
    for (g, m) in [(u3(), 2), (t5(), 2)] {
        let c = complex(&g, m);
        for f in frames(&c) {
            let sp = Spinors::new(f.len());
            for e in &c.edges {
                let x = FormalGen::of(&c.cover, &f, &c.gens[e.from as usize]);
                let y = FormalGen::of(&c.cover, &f, &c.gens[e.to as usize]);
                let r = formal_rect_of_edge(&c, &f, e);
                let s = sp.rect_sign(&x, &y, &r).unwrap();
                let or_of = |slot: usize| f.alpha_or[f.alpha_slot.iter().position(|&v| v == slot).unwrap()];
                let horizontal = FormalRect { s: r.s, n: r.n, w: r.e, e: r.w, o_s: or_of(r.s) };
                let vertical = FormalRect { s: r.n, n: r.s, w: r.w, e: r.e, o_s: or_of(r.n) };
                assert_eq!(s * sp.rect_sign(&y, &x, &horizontal).unwrap(), 1);
                assert_eq!(s * sp.rect_sign(&y, &x, &vertical).unwrap(), -1);
            }
        }
    }
}

#[test]
fn snf_examples() {
    let m = SparseMatrix::from_dense(&[vec![2, 0], vec![0, 3]]);
    for st in [PivotStrategy::Sparse, PivotStrategy::Dense] {
        let s = smith_normal_form(&m, st);
        assert_eq!(s.diagonal, vec![BigInt::from(1), BigInt::from(6)]);
    }
    let z = SparseMatrix::from_dense(&[vec![0, 0], vec![0, 0]]);
    assert_eq!(smith_normal_form(&z, PivotStrategy::Sparse).rank, 0);
}

proptest! {
    #[test]
    fn pivot_strategies_agree(seed in any::<u64>(), density in 1u32..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut triples = Vec::new();
        for r in 0..30 {
            for c in 0..30 {
                if rng.gen_ratio(density, 40) {
                    triples.push((r, c, rng.gen_range(-4i64..=4)));
                }
            }
        }
        let m = SparseMatrix::from_triples(30, 30, &triples);
        let a = smith_normal_form(&m, PivotStrategy::Sparse);
        let b = smith_normal_form(&m, PivotStrategy::Dense);
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(a.diagonal, dense_invariant_factors(m.to_dense()));
        for w in b.diagonal.windows(2) {
            prop_assert!((&w[1] % &w[0]) == BigInt::from(0));
        }
    }
}
