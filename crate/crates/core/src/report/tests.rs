use super::*;
use crate::solver::Naming;

fn catalog() -> Catalog {
    Catalog::builtin()
}

fn entries(list: &[(&str, &str)]) -> BTreeMap<String, String> {
    list.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
}

fn symplectic_pair() -> PairFile {
    let p = entries(&[("1,2", "1"), ("3,4", "1")]);
    PairFile { p: p.clone(), pprime: p, integrals: None, side_conditions: Vec::new() }
}

#[test]
fn identical_pair_on_abelian_group() {
    let alg = catalog().lookup("abelian4", &BTreeMap::new()).unwrap();
    let (compat, section) = analyze_pair(&alg, &symplectic_pair(), "P' = P", 2, 7).unwrap();
    assert!(compat.passes());
    let r = &section.report;
    assert!(r.passes());
    assert_eq!(r.integrals, vec!["2", "1"]);
    for (i, row) in r.recursion_operator.iter().enumerate() {
        for (j, e) in row.iter().enumerate() {
            assert_eq!(e, if i == j { "1" } else { "0" });
        }
    }
    let doc = ReportDocument::new(Metadata::new("analyze", 7), vec![Section::Compatibility(compat), Section::BiHamiltonian(section)]);
    assert!(doc.status.passed);
    assert!(doc.to_human().contains("status: PASS"));
}

#[test]
fn verify_a412_reports_side_condition() {
    let v = solver::verify_table("A_{4,12}", &catalog()).unwrap();
    let doc = ReportDocument::new(Metadata::new("verify-table", 0), vec![Section::Compatibility(v.clone())]);
    assert!(doc.status.passed);
    assert_eq!(v.side_conditions, vec!["p14 != 0"]);
    let json: serde_json::Value = serde_json::from_str(&doc.to_json()).unwrap();
    assert_eq!(json["schema"], SCHEMA);
    assert_eq!(json["sections"][0]["section"], "compatibility");
    assert_eq!(json["sections"][0]["compatibility"]["p_pprime"]["holds"], true);
}

#[test]
fn a61_vielbein_matches_reference() {
    let alg = catalog().lookup("A_{6,1}", &BTreeMap::new()).unwrap();
    let v = vielbein_section(&alg).unwrap();
    assert!(v.round_trip);
    let fx = v.fixture.as_ref().unwrap();
    assert!(fx.matches && fx.flags.is_empty());
    assert_eq!(v.frame[0][0], "1");
    let val = validation_section(&alg);
    assert!(val.valid);
    assert_eq!(val.structure.get("1,2,3").map(String::as_str), Some("1"));
}

#[test]
fn a619_reference_typo_is_a_discrepancy() {
    let alg = catalog().lookup("A_{6,19}", &BTreeMap::new()).unwrap();
    let doc = ReportDocument::new(Metadata::new("show-vielbein", 0), vec![Section::Vielbein(vielbein_section(&alg).unwrap())]);
    assert!(doc.status.passed);
    assert!(doc.status.discrepancies.iter().any(|d| d.contains("x_30")), "{:?}", doc.status.discrepancies);
}

#[test]
fn abelian_solve_leaves_constants_free() {
    let alg = catalog().lookup("abelian4", &BTreeMap::new()).unwrap();
    let pat = AnsatzPattern::full(4, Naming::RowLetter).unwrap();
    let p = matrix_from_entries(4, &entries(&[("1,2", "1"), ("3,4", "1")])).unwrap();
    let s = solve(&alg, &pat, &p, None, 1).unwrap();
    assert!(s.p_is_poisson);
    assert_eq!(s.unknowns, 30);
    assert!(s.linear_rank > 0);
    for c in ["p'12", "p'13", "p'14", "p'23", "p'24", "p'34"] {
        assert!(s.free_parameters.iter().any(|f| f == c), "{c}");
    }
    assert_eq!(s.table_match, None);
    assert_eq!(s.nullity + s.linear_rank, s.unknowns);
}

#[test]
fn non_poisson_p_is_a_failure() {
    let alg = catalog().lookup("A_{4,1}", &BTreeMap::new()).unwrap();
    let pat = AnsatzPattern::full(4, Naming::PairIndex).unwrap();
    let p = matrix_from_entries(4, &entries(&[("1,2", "1"), ("1,3", "1"), ("1,4", "1"), ("2,3", "1"), ("2,4", "1"), ("3,4", "1")])).unwrap();
    let s = solve(&alg, &pat, &p, None, 1).unwrap();
    assert!(!s.p_is_poisson);
    let doc = ReportDocument::new(Metadata::new("solve", 1), vec![Section::SolverFamily(s)]);
    assert!(!doc.status.passed);
    assert!(doc.to_human().contains("status: FAIL"));
}

#[test]
fn p_outside_pattern_is_rejected() {
    let alg = catalog().lookup("A_{4,1}", &BTreeMap::new()).unwrap();
    let file = PatternFile { p: Some(vec!["1,2".into()]), ..Default::default() };
    let pat = AnsatzPattern::from_file(4, &file).unwrap();
    let p = matrix_from_entries(4, &entries(&[("3,4", "1")])).unwrap();
    assert!(matches!(solve(&alg, &pat, &p, None, 1), Err(ReportError::Solver(SolverError::OutsidePattern { i: 3, j: 4 }))));
}

#[test]
fn row_solver_matches_table() {
    let row = tables::find("A_{4,1}").unwrap();
    let s = solve_row(&row, &catalog(), None, 3).unwrap();
    assert_eq!(s.table_match, Some(true));
    assert!(s.p_pattern.contains(&"1,2".to_string()));
    assert_eq!(s.naming, Naming::PairIndex);
}

#[test]
fn a69_row_reports_rank_discrepancy() {
    let row = tables::find("A_{6,9}").unwrap();
    let r = row_report(&row, &catalog(), 5);
    assert!(r.errors.is_empty(), "{:?}", r.errors);
    let doc = ReportDocument::new(Metadata::new("report-all", 5), vec![Section::Row(Box::new(r))]);
    assert!(doc.status.passed, "{:?}", doc.status.failures);
    assert!(doc.status.discrepancies.iter().any(|d| d.contains("rank 2 of 3")));
}

#[test]
fn row_reports_are_deterministic() {
    let row = tables::find("A_{4,3}").unwrap();
    let a = ReportDocument::new(Metadata::new("report-all", 9), vec![Section::Row(Box::new(row_report(&row, &catalog(), 9)))]);
    let b = ReportDocument::new(Metadata::new("report-all", 9), vec![Section::Row(Box::new(row_report(&row, &catalog(), 9)))]);
    assert_eq!(a.to_json(), b.to_json());
    assert_eq!(a.to_human(), b.to_human());
}

#[test]
fn unsupported_spectrum_is_classified() {
    let e = ReportError::Vielbein(VielbeinError::UnsupportedSpectrum { factor: "x^2 - 2".into() });
    assert!(e.is_unsupported_spectrum());
    assert!(!ReportError::Input("x".into()).is_unsupported_spectrum());
}

#[test]
fn parameter_parsing() {
    let p = parse_params(&["a=2".into(), "b = -1/3".into()]).unwrap();
    assert_eq!(p[&Symbol::new("b")], BigRational::new((-1).into(), 3.into()));
    assert!(matches!(parse_params(&["a".into()]), Err(ReportError::Input(_))));
    assert!(parse_params(&["a=x".into()]).is_err());
}

#[test]
fn entry_parsing_rejects_bad_keys() {
    assert!(matrix_from_entries(4, &entries(&[("2,1", "1")])).is_err());
    assert!(matrix_from_entries(4, &entries(&[("1,5", "1")])).is_err());
    let m = matrix_from_entries(4, &entries(&[("1,3", "p13")])).unwrap();
    assert_eq!(m[(2, 0)].to_string(), "-p13");
}
