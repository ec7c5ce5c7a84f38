use std::collections::BTreeMap;

use num_rational::BigRational;
use proptest::prelude::*;

use super::*;
use crate::catalog::Catalog;
use crate::expr::{rat, Symbol};
use crate::tables;
use crate::vielbein::compute_vielbein;

fn p(s: &str) -> Expression {
    Expression::parse(s).unwrap()
}

fn upper(dim: usize, entries: &[((usize, usize), &str)]) -> BivectorField {
    let map = entries.iter().map(|((i, j), s)| ((i - 1, j - 1), p(s))).collect();
    BivectorField::from_upper(dim, &map).unwrap()
}

fn table_pair(name: &str) -> (BivectorField, BivectorField) {
    let row = tables::find(name).unwrap();
    let alg = row.lie_algebra(&Catalog::builtin()).unwrap();
    let v = compute_vielbein(&alg).unwrap();
    (
        bivector_from_frame(&row.p_matrix().unwrap(), &v).unwrap(),
        bivector_from_frame(&row.pprime_matrix().unwrap(), &v).unwrap(),
    )
}

/// `[𝐏,𝐏]^{λμν}` by an independent loop over all ρ with explicit float partials.
fn loop_oracle(b: &BivectorField, l: usize, m: usize, n: usize, pt: &[f64]) -> f64 {
    let dim = b.dim();
    let val = |i: usize, j: usize| b.get(i, j).evaluate(pt, &BTreeMap::new()).unwrap();
    let d = |rho: usize, i: usize, j: usize| b.get(i, j).partial(rho).evaluate(pt, &BTreeMap::new()).unwrap();
    let mut s = 0.0;
    for rho in 0..dim {
        s += val(rho, l) * d(rho, m, n) + val(rho, n) * d(rho, l, m) + val(rho, m) * d(rho, n, l);
    }
    s
}

#[test]
fn frame_bivector_of_a41() {
    let (b, _) = table_pair("A_{4,1}");
    assert_eq!(b.get(0, 1), &p("p12 + p23*x4^2/2"));
    assert_eq!(b.get(0, 2), &p("p23*x4"));
}

#[test]
fn identity_frame_keeps_bivector() {
    let pm = upper(4, &[((1, 2), "p12"), ((3, 4), "p34")]);
    let b = bivector_from_frame(pm.matrix(), &VielbeinMatrix::identity(4)).unwrap();
    assert_eq!(b, pm);
}

#[test]
fn frame_bivector_of_a69() {
    let (b, _) = table_pair("A_{6,9}");
    assert_eq!(b.get(2, 3), &p("p14*x2"));
    assert_eq!(b.get(3, 5), &p("p46 + p14*x2^2/2 - p14*x5"));
}

#[test]
fn constant_bivector_on_abelian_group() {
    let b = upper(4, &[((1, 2), "1"), ((3, 4), "1")]);
    assert!(schouten(&b, &b).unwrap().is_zero());
    assert!(check_compatibility(&b, &b).unwrap().all_hold());
}

#[test]
fn a41_table_bivector_is_poisson() {
    let (b, _) = table_pair("A_{4,1}");
    assert!(schouten(&b, &b).unwrap().is_zero());
}

#[test]
fn non_poisson_bivector_is_detected() {
    let b = upper(4, &[((1, 2), "x3"), ((3, 4), "1")]);
    let t = schouten(&b, &b).unwrap();
    let c = t.get(0, 1, 3);
    assert!(!c.is_zero());
    let mut seed = 3u64;
    for _ in 0..5 {
        seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let pt: Vec<f64> = (0..4).map(|k| ((seed >> (8 * k + 8)) % 200) as f64 / 50.0 - 2.0).collect();
        for (a, bb, cc) in [(0, 1, 3), (0, 1, 2), (1, 2, 3)] {
            let exact = t.get(a, bb, cc).evaluate(&pt, &BTreeMap::new()).unwrap();
            assert!((exact - loop_oracle(&b, a, bb, cc, &pt)).abs() < 1e-12);
        }
    }
}

#[test]
fn three_by_three_example_with_constant_column_is_poisson() {
    let b = upper(4, &[((1, 2), "x3"), ((1, 3), "1"), ((2, 3), "1")]);
    let t = schouten(&b, &b).unwrap();
    let pt = [0.3, -1.1, 0.7, 0.2];
    for (a, bb, cc) in [(0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)] {
        assert_eq!(loop_oracle(&b, a, bb, cc, &pt), 0.0);
    }
    assert!(t.is_zero());
}

#[test]
fn trivector_get_applies_permutation_sign() {
    let b = upper(4, &[((1, 2), "x3"), ((3, 4), "1")]);
    let t = schouten_self(&b);
    let c = t.get(0, 1, 3);
    assert_eq!(t.get(1, 0, 3), -&c);
    assert_eq!(t.get(3, 0, 1), c);
    assert!(t.get(0, 0, 1).is_zero());
}

#[test]
fn coordinate_brackets() {
    let b = upper(4, &[((1, 2), "p12 + x4"), ((2, 3), "p23")]);
    for mu in 0..4 {
        for nu in 0..4 {
            assert_eq!(&poisson_bracket(&b, &Expression::coord(mu), &Expression::coord(nu)), b.get(mu, nu));
        }
    }
}

#[test]
fn a61_bracket_of_x2_x3() {
    let (b, _) = table_pair("A_{6,1}");
    assert_eq!(poisson_bracket(&b, &p("x2"), &p("x3")), p("p23"));
}

#[test]
fn a43_pair_is_compatible() {
    let (b, bp) = table_pair("A_{4,3}");
    assert!(check_compatibility(&b, &bp).unwrap().all_hold());
}

#[test]
fn a41_pair_with_flipped_sign_fails_mixed_bracket() {
    let row = tables::find("A_{4,1}").unwrap();
    let alg = row.lie_algebra(&Catalog::builtin()).unwrap();
    let v = compute_vielbein(&alg).unwrap();
    let mut pp = row.pprime_matrix().unwrap();
    pp[(0, 2)] = p("p'13 - a44*x3");
    pp[(2, 0)] = -&pp[(0, 2)];
    let b = bivector_from_frame(&row.p_matrix().unwrap(), &v).unwrap();
    let bp = bivector_from_frame(&pp, &v).unwrap();
    let report = check_compatibility(&b, &bp).unwrap();
    assert!(report.p_p.holds);
    assert!(!report.p_pprime.holds);
    let mixed = schouten_mixed(&b, &bp).unwrap();
    let vals: BTreeMap<Symbol, f64> =
        [("p12", 0.7), ("p14", 1.3), ("p23", -0.4), ("p'12", 0.2), ("p'13", -1.5), ("p'24", 0.9), ("a44", 1.1), ("a23", 0.3), ("a24", -0.8)]
            .iter()
            .map(|(k, v)| (Symbol::new(k), *v))
            .collect();
    let mut seed = 17u64;
    let mut nonzero = 0;
    for _ in 0..10 {
        seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let pt: Vec<f64> = (0..4).map(|k| ((seed >> (8 * k + 8)) % 200) as f64 / 50.0 - 2.0).collect();
        let mut s = 0.0;
        let num = |f: &BivectorField, i: usize, j: usize| f.get(i, j).evaluate(&pt, &vals).unwrap();
        let dnum = |f: &BivectorField, r: usize, i: usize, j: usize| f.get(i, j).partial(r).evaluate(&pt, &vals).unwrap();
        let (l, m, n) = (0, 1, 2);
        for r in 0..4 {
            s += num(&b, r, l) * dnum(&bp, r, m, n) + num(&b, r, n) * dnum(&bp, r, l, m) + num(&b, r, m) * dnum(&bp, r, n, l);
            s += num(&bp, r, l) * dnum(&b, r, m, n) + num(&bp, r, n) * dnum(&b, r, l, m) + num(&bp, r, m) * dnum(&b, r, n, l);
        }
        let exact = mixed.get(0, 1, 2).evaluate(&pt, &vals).unwrap();
        assert!((s - exact).abs() < 1e-9);
        if s.abs() > 1e-9 {
            nonzero += 1;
        }
    }
    assert_eq!(nonzero, 10);
}

#[test]
fn rejects_bad_inputs() {
    let m = ExprMatrix::from_fn(2, 2, |i, j| if i == 0 && j == 1 { Expression::one() } else { Expression::zero() });
    assert_eq!(BivectorField::new(m), Err(PoissonError::NotAntisymmetric(1, 2)));
    let a = BivectorField::zero(3);
    let b = BivectorField::zero(4);
    assert!(schouten_mixed(&a, &b).is_err());
}

fn arb_entry() -> impl Strategy<Value = Expression> {
    proptest::collection::vec((-2i64..=2, 0usize..4, 0u32..3), 0..3).prop_map(|terms| {
        terms.into_iter().fold(Expression::zero(), |acc, (c, i, n)| acc + Expression::coord(i).pow(n).scale(&rat(c, 1)))
    })
}

fn arb_bivector() -> impl Strategy<Value = BivectorField> {
    proptest::collection::vec(arb_entry(), 6).prop_map(|es| {
        let keys = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
        let map = keys.iter().cloned().zip(es).collect();
        BivectorField::from_upper(4, &map).unwrap()
    })
}

fn jacobi_sum(b: &BivectorField, l: usize, m: usize, n: usize) -> Expression {
    let x = Expression::coord;
    let pb = |f: &Expression, g: &Expression| poisson_bracket(b, f, g);
    pb(&x(l), &pb(&x(m), &x(n))) + pb(&x(m), &pb(&x(n), &x(l))) + pb(&x(n), &pb(&x(l), &x(m)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn schouten_matches_jacobi_on_coordinates(b in arb_bivector()) {
        let t = schouten_self(&b);
        for l in 0..4 {
            for m in 0..4 {
                for n in 0..4 {
                    prop_assert_eq!(&t.get(l, m, n) + &jacobi_sum(&b, l, m, n), Expression::zero());
                }
            }
        }
    }

    #[test]
    fn mixed_bracket_is_bilinear_and_symmetric(
        b in arb_bivector(), q1 in arb_bivector(), q2 in arb_bivector(), a in -3i64..=3, c in -3i64..=3
    ) {
        let (ar, cr): (BigRational, BigRational) = (rat(a, 1), rat(c, 1));
        let combo = q1.map(|e| e.scale(&ar)).add(&q2.map(|e| e.scale(&cr)));
        let lhs = schouten_mixed(&b, &combo).unwrap();
        let t1 = schouten_mixed(&b, &q1).unwrap();
        let t2 = schouten_mixed(&b, &q2).unwrap();
        for l in 0..4 {
            for m in l + 1..4 {
                for n in m + 1..4 {
                    prop_assert_eq!(lhs.get(l, m, n), t1.get(l, m, n).scale(&ar) + t2.get(l, m, n).scale(&cr));
                }
            }
        }
        prop_assert_eq!(schouten_mixed(&q1, &b).unwrap(), t1);
    }

    #[test]
    fn poisson_bracket_is_antisymmetric(b in arb_bivector(), f in arb_entry(), g in arb_entry()) {
        prop_assert!(poisson_bracket(&b, &f, &f).is_zero());
        prop_assert_eq!(poisson_bracket(&b, &f, &g), -poisson_bracket(&b, &g, &f));
    }
}
