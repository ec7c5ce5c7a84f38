use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::ToPrimitive;
use proptest::prelude::*;

use super::*;
use crate::catalog::Catalog;
use crate::expr::rat;

fn p(s: &str) -> Expression {
    Expression::parse(s).unwrap()
}

fn rmat(rows: &[&[i64]]) -> Vec<Vec<BigRational>> {
    rows.iter().map(|r| r.iter().map(|v| rat(*v, 1)).collect()).collect()
}

fn lookup(name: &str) -> LieAlgebra {
    Catalog::builtin().lookup(name, &BTreeMap::new()).unwrap()
}

fn lookup_symbolic(name: &str) -> LieAlgebra {
    Catalog::builtin().lookup_symbolic(name, &BTreeMap::new()).unwrap()
}

/// Float Taylor series of `e^{tA}` to high order.
fn series_oracle(a: &[Vec<BigRational>], t: f64) -> Vec<Vec<f64>> {
    let n = a.len();
    let af: Vec<Vec<f64>> = a.iter().map(|r| r.iter().map(|v| v.to_f64().unwrap() * t).collect()).collect();
    let mut out: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| f64::from(u8::from(i == j))).collect()).collect();
    let mut term = out.clone();
    for k in 1..60 {
        let mut next = vec![vec![0.0; n]; n];
        for i in 0..n {
            for l in 0..n {
                for j in 0..n {
                    next[i][j] += term[i][l] * af[l][j] / k as f64;
                }
            }
        }
        term = next;
        for i in 0..n {
            for j in 0..n {
                out[i][j] += term[i][j];
            }
        }
    }
    out
}

fn assert_close_to_series(a: &[Vec<BigRational>], t: f64) {
    let e = matrix_exponential(a, 0).unwrap();
    let oracle = series_oracle(a, t);
    for (i, row) in oracle.iter().enumerate() {
        for (j, want) in row.iter().enumerate() {
            let got = e[(i, j)].evaluate(&[t], &BTreeMap::new()).unwrap();
            assert!((got - want).abs() <= 1e-9 * want.abs().max(1.0), "({i},{j}) {got} vs {want} for {a:?}");
        }
    }
}

#[test]
fn nilpotent_exponential_terminates() {
    let alg = lookup("A_{6,1}");
    let x1 = alg.adjoint().x_mats[0].clone();
    let e = nilpotent_exponential(&x1, 0).unwrap();
    let mut series = ExprMatrix::identity(6);
    let mut term = ExprMatrix::identity(6);
    let tx = x1.scale_expr(&Expression::coord(0));
    for k in 1..6 {
        term = term.mul(&tx).map(|v| v.scale(&rat(1, k)));
        series = series.add(&term);
    }
    assert_eq!(e, series);
}

#[test]
fn rotation_generator() {
    let e = matrix_exponential(&rmat(&[&[0, -1], &[1, 0]]), 3).unwrap();
    assert_eq!(e[(0, 0)], p("cos(x4)"));
    assert_eq!(e[(0, 1)], p("-sin(x4)"));
    assert_eq!(e[(1, 0)], p("sin(x4)"));
    assert_eq!(e[(1, 1)], p("cos(x4)"));
}

#[test]
fn a41_exponential_matches_series_to_order_four() {
    let alg = lookup("A_{4,1}");
    let x4 = alg.adjoint().x_mats[3].clone();
    let rational: Vec<Vec<BigRational>> = (0..4).map(|i| x4.row(i).iter().map(|v| v.as_rational().unwrap()).collect()).collect();
    let e = matrix_exponential(&rational, 3).unwrap();
    let tx = x4.scale_expr(&Expression::coord(3));
    let mut series = ExprMatrix::identity(4);
    let mut term = ExprMatrix::identity(4);
    for k in 1..=4 {
        term = term.mul(&tx).map(|v| v.scale(&rat(1, k)));
        series = series.add(&term);
    }
    assert_eq!(e, series);
    assert_eq!(e[(1, 0)], p("x4"));
    assert_eq!(e[(2, 0)], p("x4^2/2"));
}

#[test]
fn diagonalizable_and_defective_spectra() {
    assert_close_to_series(&rmat(&[&[2, 0], &[0, -1]]), 0.7);
    assert_close_to_series(&rmat(&[&[1, 1, 0], &[0, 1, 1], &[0, 0, 1]]), -0.4);
    assert_close_to_series(&rmat(&[&[1, -1], &[1, 1]]), 0.9);
    assert_close_to_series(&rmat(&[&[0, -1, 1, 0], &[1, 0, 0, 1], &[0, 0, 0, -1], &[0, 0, 1, 0]]), 1.3);
    assert_close_to_series(&rmat(&[&[3, 0, 0], &[0, 1, -2], &[0, 2, 1]]), 0.5);
}

#[test]
fn unsupported_spectrum_names_the_factor() {
    let err = matrix_exponential(&rmat(&[&[0, 2], &[1, 0]]), 0).unwrap_err();
    assert_eq!(err, VielbeinError::UnsupportedSpectrum { factor: "x^2 - 2".into() });
}

#[test]
fn characteristic_polynomial_of_companion() {
    let cp = characteristic_polynomial(&rmat(&[&[0, 0, -6], &[1, 0, -11], &[0, 1, -6]]));
    assert_eq!(cp, vec![rat(6, 1), rat(11, 1), rat(6, 1), rat(1, 1)]);
    let eig = eigenvalues(&rmat(&[&[0, 0, -6], &[1, 0, -11], &[0, 1, -6]])).unwrap();
    let mut re: Vec<BigRational> = eig.iter().map(|z| z.re.clone()).collect();
    re.sort();
    assert_eq!(re, vec![rat(-3, 1), rat(-2, 1), rat(-1, 1)]);
}

#[test]
fn a41_frame() {
    let v = compute_vielbein(&lookup("A_{4,1}")).unwrap();
    let expected = [["1", "0", "0", "0"], ["x4", "1", "0", "0"], ["x4^2/2", "x4", "1", "0"], ["0", "0", "0", "1"]];
    for (i, row) in expected.iter().enumerate() {
        for (j, e) in row.iter().enumerate() {
            assert_eq!(v.frame[(i, j)], p(e));
        }
    }
    assert!(v.frame.mul(&v.dual).is_identity());
    assert!(v.dual.mul(&v.frame).is_identity());
}

#[test]
fn a61_frame() {
    let v = compute_vielbein(&lookup("A_{6,1}")).unwrap();
    let row1: Vec<Expression> = ["1", "0", "x2", "x3", "0", "x5"].iter().map(|s| p(s)).collect();
    assert_eq!(v.frame.row(0), row1.as_slice());
    for i in 1..6 {
        for j in 0..6 {
            let e = if i == j { Expression::one() } else { Expression::zero() };
            assert_eq!(v.frame[(i, j)], e);
        }
    }
}

#[test]
fn abelian_frame_is_identity() {
    let v = compute_vielbein(&LieAlgebra::abelian(4)).unwrap();
    assert!(v.frame.is_identity() && v.dual.is_identity());
    assert!(recover_structure_constants(&v).unwrap().is_empty());
}

#[test]
fn recovers_a41_and_a69() {
    let v = compute_vielbein(&lookup("A_{4,1}")).unwrap();
    let c = recover_structure_constants(&v).unwrap();
    let expected: BTreeMap<_, _> = [((2, 4, 1), Expression::one()), ((3, 4, 2), Expression::one())].into_iter().collect();
    assert_eq!(c, expected);
    let alg = lookup("A_{6,9}");
    let c = recover_structure_constants(&compute_vielbein(&alg).unwrap()).unwrap();
    assert_eq!(&c, alg.structure());
}

#[test]
fn invalid_frame_is_rejected() {
    let frame = ExprMatrix::from_fn(2, 2, |i, j| match (i, j) {
        (0, 1) => p("x2^2"),
        (i, j) if i == j => Expression::one(),
        _ => Expression::zero(),
    });
    let v = VielbeinMatrix::from_frame("bad", frame).unwrap();
    assert!(matches!(recover_structure_constants(&v), Err(VielbeinError::NonConstant { .. })));
}

#[test]
fn frames_at_the_identity_and_round_trip() {
    let cat = Catalog::builtin();
    for name in cat.names() {
        let alg = lookup_symbolic(name);
        let alg = match alg.free_params() {
            [] => alg,
            fp => alg.bind(&fp.iter().map(|s| (s.clone(), rat(1, 1))).collect()).unwrap(),
        };
        let v = compute_vielbein(&alg).unwrap();
        let zero = vec![rat(0, 1); alg.dim()];
        for i in 0..alg.dim() {
            for j in 0..alg.dim() {
                let want = rat(i64::from(i == j), 1);
                assert_eq!(v.frame[(i, j)].evaluate_exact(&zero, alg.params()).unwrap(), want, "{name}");
                assert_eq!(v.dual[(i, j)].evaluate_exact(&zero, alg.params()).unwrap(), want, "{name}");
            }
        }
        assert_eq!(&recover_structure_constants(&v).unwrap(), alg.structure(), "{name}");
    }
}

#[test]
fn nilpotent_frames_are_polynomial() {
    for fx in fixtures().iter().filter(|f| f.algebra.starts_with("A_{6")) {
        let v = compute_vielbein(&lookup_symbolic(&fx.algebra)).unwrap();
        for i in 0..6 {
            assert!(v.frame.row(i).iter().all(Expression::is_polynomial), "{}", fx.algebra);
        }
    }
}

#[test]
fn fixtures_match_and_flags_are_real() {
    for fx in fixtures() {
        let alg = lookup_symbolic(&fx.algebra);
        let v = compute_vielbein(&alg).unwrap();
        assert!(compare_with_fixture(&v, &fx).unwrap().matches(), "{}", fx.algebra);
        for f in &fx.flags {
            assert_ne!(f.printed, f.computed);
        }
    }
}

fn arb_triangular() -> impl Strategy<Value = Vec<Vec<BigRational>>> {
    (proptest::collection::vec(-2i64..=2, 3), proptest::collection::vec((-3i64..=3, 1i64..=2), 3)).prop_map(|(d, u)| {
        let mut m = vec![vec![rat(0, 1); 3]; 3];
        for i in 0..3 {
            m[i][i] = rat(d[i], 1);
        }
        m[0][1] = rat(u[0].0, u[0].1);
        m[0][2] = rat(u[1].0, u[1].1);
        m[1][2] = rat(u[2].0, u[2].1);
        m
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn exponential_matches_series(a in arb_triangular(), t in -1.0f64..1.0) {
        let e = matrix_exponential(&a, 0).unwrap();
        let oracle = series_oracle(&a, t);
        for (i, row) in oracle.iter().enumerate() {
            for (j, want) in row.iter().enumerate() {
                let got = e[(i, j)].evaluate(&[t], &BTreeMap::new()).unwrap();
                prop_assert!((got - want).abs() <= 1e-9 * want.abs().max(1.0));
            }
        }
    }

    #[test]
    fn exponential_is_identity_at_zero(a in arb_triangular()) {
        let e = matrix_exponential(&a, 0).unwrap();
        let z = e.try_map(|v| Ok(Expression::constant(v.evaluate_exact(&[rat(0, 1)], &BTreeMap::new())?))).unwrap();
        prop_assert!(z.is_identity());
    }
}
