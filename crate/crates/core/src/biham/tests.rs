use std::collections::BTreeMap;

use proptest::prelude::*;

use super::*;
use crate::catalog::Catalog;
use crate::solver::row_bivectors;
use crate::tables;

fn p(s: &str) -> Expression {
    Expression::parse(s).unwrap()
}

fn upper(dim: usize, entries: &[((usize, usize), &str)]) -> BivectorField {
    let map = entries.iter().map(|((i, j), s)| ((i - 1, j - 1), p(s))).collect();
    BivectorField::from_upper(dim, &map).unwrap()
}

fn pair(name: &str) -> (BivectorField, BivectorField) {
    row_bivectors(&tables::find(name).unwrap(), &Catalog::builtin()).unwrap()
}

fn printed(name: &str) -> IntegralSet {
    IntegralSet::from_expressions(tables::find(name).unwrap().printed_integrals().unwrap().unwrap())
}

/// Laplace expansion along the first row.
fn laplace_det(m: &ExprMatrix) -> Expression {
    let n = m.rows();
    if n == 1 {
        return m[(0, 0)].clone();
    }
    (0..n).fold(Expression::zero(), |acc, c| {
        if m[(0, c)].is_zero() {
            return acc;
        }
        let minor = ExprMatrix::from_fn(n - 1, n - 1, |i, j| m[(i + 1, if j < c { j } else { j + 1 })].clone());
        let term = &m[(0, c)] * &laplace_det(&minor);
        if c % 2 == 0 {
            acc + term
        } else {
            acc - term
        }
    })
}

fn float_params(names: &[(&str, f64)]) -> BTreeMap<Symbol, f64> {
    names.iter().map(|(k, v)| (Symbol::new(k), *v)).collect()
}

fn float_matrix(n: &RecursionOperator, pt: &[f64], params: &BTreeMap<Symbol, f64>) -> Vec<Vec<f64>> {
    (0..n.dim()).map(|i| (0..n.dim()).map(|j| n.entry(i, j).evaluate(pt, params).unwrap()).collect()).collect()
}

fn float_det(mut a: Vec<Vec<f64>>) -> f64 {
    let n = a.len();
    let mut det = 1.0;
    for c in 0..n {
        let piv = (c..n).max_by(|&x, &y| a[x][c].abs().total_cmp(&a[y][c].abs())).unwrap();
        if a[piv][c] == 0.0 {
            return 0.0;
        }
        if piv != c {
            a.swap(piv, c);
            det = -det;
        }
        det *= a[c][c];
        let pivot = a[c].clone();
        for row in a.iter_mut().skip(c + 1) {
            let f = row[c] / pivot[c];
            for (x, p) in row[c..].iter_mut().zip(&pivot[c..]) {
                *x -= f * p;
            }
        }
    }
    det
}

/// `det(N − λI)` at a point, scaled by the matrix size.
fn char_value(m: &[Vec<f64>], lambda: f64) -> f64 {
    let shifted: Vec<Vec<f64>> =
        m.iter().enumerate().map(|(i, r)| r.iter().enumerate().map(|(j, v)| if i == j { v - lambda } else { *v }).collect()).collect();
    let scale = m.iter().flatten().fold(1.0f64, |s, v| s.max(v.abs())).max(lambda.abs());
    float_det(shifted) / scale.powi(m.len() as i32)
}

#[test]
fn constant_block_matrix_has_constant_inverse() {
    let b = upper(4, &[((1, 2), "2"), ((3, 4), "-3")]);
    let inv = invert_bivector(&b).unwrap();
    assert_eq!(inv.entry(0, 1).as_expression().unwrap(), &p("-1/2"));
    assert_eq!(inv.entry(2, 3).as_expression().unwrap(), &p("1/3"));
    assert!(b.matrix().mul(&inv.num).scale_expr(&inv.den.inverse_unit().unwrap()).is_identity());
}

#[test]
fn a41_inverse_has_pfaffian_squared_determinant() {
    let (b, _) = pair("A_{4,1}");
    let det = laplace_det(b.matrix());
    assert_eq!(det, p("p14^2*p23^2"));
    let inv = invert_bivector(&b).unwrap();
    let scaled = b.matrix().mul(&inv.num);
    assert_eq!(scaled, ExprMatrix::identity(4).scale_expr(&inv.den));
    let adj_check = b.matrix().mul(&b.matrix().adjugate());
    assert_eq!(adj_check, ExprMatrix::identity(4).scale_expr(&det));
}

#[test]
fn a624_frame_p_inverts_blockwise() {
    let row = tables::find("A_{6,24}").unwrap();
    let pm = BivectorField::new(row.p_matrix().unwrap()).unwrap();
    let inv = invert_bivector(&pm).unwrap();
    assert_eq!(inv.entry(0, 2), RationalExpression::from(p("-1/p13")));
    assert_eq!(inv.entry(1, 4), RationalExpression::from(p("-1/p25")));
    assert_eq!(inv.entry(3, 5), RationalExpression::from(p("-1/p46")));
    assert!(inv.entry(0, 1).is_zero());
}

#[test]
fn degenerate_bivector_is_rejected() {
    let b = upper(4, &[((1, 2), "x3")]);
    assert!(matches!(invert_bivector(&b), Err(BihamError::Singular)));
    assert!(matches!(recursion_operator(&b, &b), Err(BihamError::Singular)));
}

#[test]
fn equal_structures_give_identity_operator() {
    let (b, _) = pair("A_{4,3}");
    let n = recursion_operator(&b, &b).unwrap();
    assert!(n.matrix.num.is_identity() && n.matrix.den.is_one());
    let hs = integrals(&n, 2);
    assert_eq!(hs.integrals[0], RationalExpression::from(Expression::integer(2)));
    assert_eq!(hs.integrals[1], RationalExpression::from(Expression::integer(1)));
}

#[test]
fn operator_reproduces_second_structure() {
    for name in ["A_{4,1}", "A_{4,12}", "A_{6,9}", "A_{6,32}"] {
        let (b, q) = pair(name);
        assert!(recursion_operator(&b, &q).unwrap().reproduces(&b, &q), "{name}");
    }
}

/// Row name, closed-form eigenvalues, parameter values.
type EigenCase<'a> = (&'a str, [&'a str; 2], &'a [(&'a str, f64)]);

#[test]
fn eigenvalues_match_closed_forms() {
    let cases: [EigenCase; 2] = [
        ("A_{4,5}^{-1,-1}", ["a53*x3/p23", "a64*x4/p24"], &[("p12", 0.7), ("p13", 1.3), ("p23", -0.6), ("p24", 1.9), ("p'12", 0.4), ("a23", 0.2), ("a24", -0.5), ("a53", 1.1), ("a64", -0.8)]),
        ("A_2+A_2", ["a21*x1/p12", "a73*x3/p34"], &[("p12", 0.9), ("p24", -1.2), ("p34", 1.4), ("p'24", 0.3), ("a21", 0.6), ("a61", -0.4), ("a63", 0.5), ("a73", -1.3)]),
    ];
    for (name, forms, vals) in cases {
        let (b, q) = pair(name);
        let n = recursion_operator(&b, &q).unwrap();
        let params = float_params(vals);
        for k in 0..5 {
            let pt: Vec<f64> = (0..4).map(|i| ((k * 7 + i * 3) % 11) as f64 / 5.0 - 1.0).collect();
            let m = float_matrix(&n, &pt, &params);
            for f in forms {
                let lambda = p(f).evaluate(&pt, &params).unwrap();
                assert!(char_value(&m, lambda).abs() < 1e-9, "{name} {f} at {pt:?}");
            }
            let trace: f64 = (0..4).map(|i| m[i][i]).sum();
            let sum: f64 = forms.iter().map(|f| 2.0 * p(f).evaluate(&pt, &params).unwrap()).sum();
            assert!((trace - sum).abs() < 1e-9);
        }
    }
}

#[test]
fn nilpotent_operator_has_constant_integrals() {
    let num = ExprMatrix::from_fn(4, 4, |i, j| if j > i { Expression::coord(i + j - 1) } else { Expression::zero() });
    let n = RecursionOperator::from_matrix(RationalMatrix::new(num, Expression::one()).unwrap());
    let hs = integrals(&n, 4);
    assert!(all_constant(&hs, 4));
    assert!(hs.integrals.iter().all(RationalExpression::is_zero));
}

#[test]
fn commutator_examples() {
    let e = |k: usize| -> Vec<Expression> { (0..3).map(|i| if i == k { Expression::one() } else { Expression::zero() }).collect() };
    assert!(vector_field_commutator(&e(0), &e(1)).iter().all(Expression::is_zero));
    let x = vec![p("x1"), Expression::zero(), Expression::zero()];
    assert_eq!(vector_field_commutator(&x, &e(0)), vec![Expression::integer(-1), Expression::zero(), Expression::zero()]);
}

#[test]
fn identity_operator_has_no_torsion() {
    let n = RecursionOperator::from_matrix(RationalMatrix::new(ExprMatrix::identity(4), Expression::one()).unwrap());
    assert!(torsion_on_basis(&n).holds);
    let x: Vec<RationalExpression> = ["x2", "x1^2", "1", "x3"].iter().map(|s| p(s).into()).collect();
    let y: Vec<RationalExpression> = ["x4", "0", "x1*x2", "2"].iter().map(|s| p(s).into()).collect();
    assert!(nijenhuis_torsion(&n, &x, &y).iter().all(RationalExpression::is_zero));
}

#[test]
fn scalar_multiple_of_identity_is_torsion_free() {
    let n = RecursionOperator::from_matrix(RationalMatrix::new(ExprMatrix::identity(4).scale_expr(&p("x1 + x2^2")), Expression::one()).unwrap());
    assert!(torsion_on_basis(&n).holds);
}

#[test]
fn diagonal_operator_has_torsion() {
    let mut num = ExprMatrix::identity(4);
    num[(0, 0)] = p("x2");
    let n = RecursionOperator::from_matrix(RationalMatrix::new(num, Expression::one()).unwrap());
    let basis = |k: usize| -> Vec<RationalExpression> {
        (0..4).map(|i| if i == k { RationalExpression::one() } else { RationalExpression::zero() }).collect()
    };
    let t = nijenhuis_torsion(&n, &basis(0), &basis(1));
    let expected: Vec<RationalExpression> = ["x2 - 1", "0", "0", "0"].iter().map(|s| p(s).into()).collect();
    assert_eq!(t, expected);
    let report = torsion_on_basis(&n);
    assert_eq!(report.failing_pairs, vec![(1, 2)]);
    let rational = RecursionOperator::from_matrix(RationalMatrix::new(n.matrix.num.clone(), p("1 + x3^2")).unwrap());
    assert!(!torsion_on_basis(&rational).holds);
}

#[test]
fn table_pair_torsion_vanishes() {
    for name in ["A_{4,1}", "A_{4,12}", "A_{6,1}"] {
        let (b, q) = pair(name);
        assert!(torsion_on_basis(&recursion_operator(&b, &q).unwrap()).holds, "{name}");
    }
}

#[test]
fn computed_integrals_commute_with_printed_a41() {
    let (b, q) = pair("A_{4,1}");
    let hs = integrals(&recursion_operator(&b, &q).unwrap(), 2);
    let ph = printed("A_{4,1}");
    assert_eq!(ph.integrals[0], RationalExpression::from(p("a44*x4/p14")));
    assert!(cross_involution(&b, &q, &hs, &ph).holds);
}

#[test]
fn lenard_chain_on_printed_integrals() {
    let (b, q) = pair("A_{4,1}");
    assert!(lenard_check(&b, &q, &printed("A_{4,1}")).unwrap().holds);
    let (b, q) = pair("A_{6,1}");
    let rep = lenard_check(&b, &q, &printed("A_{6,1}")).unwrap();
    assert_eq!(rep.links.len(), 2);
    assert!(rep.holds);
    let consts = IntegralSet::from_expressions(vec![p("3"), p("p12")]);
    let rep = lenard_check(&b, &q, &consts).unwrap();
    assert!(rep.holds && rep.links[0].residual.is_empty());
    assert!(matches!(lenard_check(&b, &q, &IntegralSet::from_expressions(vec![p("x1")])), Err(BihamError::TooFewIntegrals { .. })));
}

#[test]
fn computed_lenard_chain_holds() {
    for name in ["A_{4,2}^{-1}", "A_{6,24}"] {
        let (b, q) = pair(name);
        let hs = integrals(&recursion_operator(&b, &q).unwrap(), b.dim() / 2);
        assert!(lenard_check(&b, &q, &hs).unwrap().holds, "{name}");
    }
}

#[test]
fn involution_of_printed_integrals() {
    let (b, q) = pair("A_{6,1}");
    assert!(involution_check(&b, &q, &IntegralSet::from_expressions(vec![p("x2^2 + x5")])).holds);
    for name in ["A_{4,2}^{-1}", "A_{6,9}"] {
        let (b, q) = pair(name);
        assert!(involution_check(&b, &q, &printed(name)).holds, "{name}");
    }
    let (b, q) = pair("A_{4,1}");
    let bad = IntegralSet::from_expressions(vec![p("x1"), p("x2")]);
    assert!(!involution_check(&b, &q, &bad).holds);
}

/// All 2×2 minors of the gradient matrix at a point.
fn minors_nonzero(h: &IntegralSet, pt: &[BigRational]) -> bool {
    let none = BTreeMap::new();
    let g: Vec<Vec<BigRational>> =
        h.integrals.iter().map(|f| gradient(f, pt.len()).iter().map(|e| e.evaluate_exact(pt, &none).unwrap()).collect()).collect();
    (0..pt.len()).any(|a| (a + 1..pt.len()).any(|c| !(&g[0][a] * &g[1][c] - &g[0][c] * &g[1][a]).is_zero()))
}

#[test]
fn independence_ranks() {
    let pts = vec![vec![rat(1, 2), rat(-1, 3), rat(2, 1), rat(3, 5)]];
    assert_eq!(independence_rank(&IntegralSet::from_expressions(vec![p("x1"), p("x2")]), &pts).unwrap(), 2);
    let f = p("x1*x3 + x2");
    let dep = IntegralSet::from_expressions(vec![f.clone(), f.pow(2)]);
    assert_eq!(independence_rank(&dep, &pts).unwrap(), 1);

    let ph = printed("A_{4,5}^{-1,-1}");
    let bound = ph.bind(&parameter_sample(&ph, 3)).unwrap();
    let points = sample_points(&bound, 4, 5, 3);
    assert_eq!(points.len(), 5);
    let oracle = points.iter().any(|pt| minors_nonzero(&bound, pt));
    assert!(oracle);
    assert_eq!(independence_rank(&bound, &points).unwrap(), 2);
}

#[test]
fn exponential_gradients_use_float_rank() {
    let h = IntegralSet::from_expressions(vec![p("exp(x1)"), p("x2*exp(x1)")]);
    let pts = vec![vec![rat(1, 3), rat(2, 1)]];
    assert_eq!(independence_rank(&h, &pts).unwrap(), 2);
}

#[test]
fn singular_points_are_skipped() {
    let h = IntegralSet { integrals: vec![RationalExpression::new(p("1"), p("x1")).unwrap()], k_max: 1 };
    let zero = vec![vec![rat(0, 1), rat(1, 1)]];
    assert!(matches!(independence_rank(&h, &zero), Err(BihamError::AllPointsSingular)));
    let mixed = vec![vec![rat(0, 1), rat(1, 1)], vec![rat(2, 1), rat(1, 1)]];
    assert_eq!(independence_rank(&h, &mixed).unwrap(), 1);
    assert!(sample_points(&h, 2, 4, 1).iter().all(|pt| !pt[0].is_zero()));
}

#[test]
fn analysis_report_for_a41() {
    let (b, q) = pair("A_{4,1}");
    let row = tables::find("A_{4,1}").unwrap();
    let rep = analyze(&b, &q, 2, row.printed_integrals().unwrap(), 42).unwrap();
    assert!(rep.passes());
    assert_eq!(rep.determinant, "p14^2*p23^2");
    let pr = rep.printed.unwrap();
    assert_eq!(pr.agrees_with_trace, vec![true, true]);
    assert_eq!((pr.independence_rank, pr.expected_rank), (2, 2));
}

fn arb_entry() -> impl Strategy<Value = Expression> {
    proptest::collection::vec((-2i64..=2, 0usize..4, 0u32..2), 0..3).prop_map(|terms| {
        terms.into_iter().fold(Expression::zero(), |acc, (c, i, n)| acc + Expression::coord(i).pow(n).scale(&rat(c, 1)))
    })
}

fn arb_field() -> impl Strategy<Value = Vec<Expression>> {
    proptest::collection::vec(arb_entry(), 4)
}

fn arb_bivector() -> impl Strategy<Value = BivectorField> {
    proptest::collection::vec(arb_entry(), 6).prop_map(|es| {
        let keys = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
        BivectorField::from_upper(4, &keys.iter().cloned().zip(es).collect()).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn commutator_satisfies_jacobi(x in arb_field(), y in arb_field(), z in arb_field()) {
        let c = vector_field_commutator;
        let s1 = c(&x, &c(&y, &z));
        let s2 = c(&y, &c(&z, &x));
        let s3 = c(&z, &c(&x, &y));
        for i in 0..4 {
            prop_assert!((&(&s1[i] + &s2[i]) + &s3[i]).is_zero());
        }
        let xy = c(&x, &y);
        let yx = c(&y, &x);
        for i in 0..4 {
            prop_assert_eq!(&xy[i], &-&yx[i]);
        }
    }

    #[test]
    fn operator_times_p_is_pprime(b in arb_bivector(), q in arb_bivector()) {
        match recursion_operator(&b, &q) {
            Ok(n) => prop_assert!(n.reproduces(&b, &q)),
            Err(BihamError::Singular) => prop_assert!(b.matrix().determinant().is_zero()),
            Err(e) => prop_assert!(false, "{e}"),
        }
    }
}
