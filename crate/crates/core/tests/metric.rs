mod common;

use std::collections::BTreeMap;

use common::*;
use nilflat::exactlin::{diagonal_derivations, RationalMatrix};
use nilflat::grading::{enumerate_g_sequences, grading_from_torus};
use nilflat::metric::{
    ad_is_isotropic, build_grading_metric, differentials_isotropic, parse_sigma, ricci_formula, ricci_koszul,
    sigma_diagonal_metric, sigma_string, signature, verify_ricci_flat, MetricSpec, VerifyMode,
};
use nilflat::{parse_algebra, LieAlgebra, Rational};
use proptest::prelude::*;

fn parse(s: &str) -> LieAlgebra {
    parse_algebra(s, &BTreeMap::new()).unwrap()
}

fn metric(rows: Vec<Vec<Rational>>) -> MetricSpec {
    MetricSpec::explicit(RationalMatrix::from_rows(rows).unwrap()).unwrap()
}

fn small_algebras() -> Vec<LieAlgebra> {
    all_fixtures().into_iter().filter(|r| r.algebra.dim() <= 6).map(|r| r.algebra).collect()
}

#[test]
fn heisenberg_riemannian_ricci() {
    let l = parse("0,0,e^{12}");
    let m = metric(RationalMatrix::identity(3).to_rows());
    let expect = vec![vec![q(-1, 2), qi(0), qi(0)], vec![qi(0), q(-1, 2), qi(0)], vec![qi(0), qi(0), q(1, 2)]];
    assert_eq!(ricci_formula(&l, &m).unwrap().ric.to_rows(), expect);
    assert_eq!(ricci_koszul(&l, &m).unwrap().ric.to_rows(), expect);
    assert_eq!(koszul_ricci(&l, &m.g.to_rows()), expect);
    let v = verify_ricci_flat(&l, &m, VerifyMode::Exact).unwrap();
    assert!(!v.flat);
}

#[test]
fn first_example_antidiagonal_metric_is_flat() {
    let l = parse("0,0,e^{12},e^{13},e^{23},e^{25}+e^{14}");
    // e²⊙e⁶ + e¹⊙e⁵ + e³⊙e⁴
    let mut g = RationalMatrix::zeros(6, 6);
    for (i, j) in [(1, 5), (0, 4), (2, 3)] {
        g[(i, j)] = qi(1);
        g[(j, i)] = qi(1);
    }
    let m = MetricSpec::explicit(g).unwrap();
    assert!(ricci_formula(&l, &m).unwrap().is_flat);
    assert!(ricci_koszul(&l, &m).unwrap().is_flat);
    assert!(is_zero_matrix(&koszul_ricci(&l, &m.g.to_rows())));
    assert!(ad_is_isotropic(&l, &m).unwrap());
    assert!(differentials_isotropic(&l, &m).unwrap());
}

#[test]
fn grading_metrics_have_isotropic_ad_and_d() {
    for r in all_fixtures().iter().filter(|r| r.algebra.dim() <= 7) {
        let l = &r.algebra;
        let Ok(g) = grading_from_torus(l, &diagonal_derivations(l)) else {
            continue;
        };
        let Some(s) = enumerate_g_sequences(&g).next() else {
            continue;
        };
        let m = build_grading_metric(l, &g, &s).unwrap();
        assert!(ad_is_isotropic(l, &m).unwrap(), "{}", r.name);
        assert!(differentials_isotropic(l, &m).unwrap(), "{}", r.name);
        assert!(is_zero_matrix(&koszul_ricci(l, &m.g.to_rows())), "{}", r.name);
        let (p, neg) = m.signature();
        assert_eq!((p, neg), (l.dim().div_ceil(2), l.dim() / 2), "{}", r.name);
    }
}

#[test]
fn signatures() {
    let d = |v: &[i64]| {
        let n = v.len();
        let mut g = RationalMatrix::zeros(n, n);
        for (i, &x) in v.iter().enumerate() {
            g[(i, i)] = qi(x);
        }
        g
    };
    assert_eq!(signature(&d(&[1, -2, 3, -4])), (2, 2));
    assert_eq!(signature(&d(&[-1, -1, -1])), (0, 3));
    let swap = RationalMatrix::from_i64(&[&[0, 1], &[1, 0]]);
    assert_eq!(signature(&swap), (1, 1));
    let m = metric(RationalMatrix::from_i64(&[&[2, 1, 0], &[1, 2, 0], &[0, 0, -1]]).to_rows());
    assert_eq!(m.signature(), (2, 1));
}

#[test]
fn degenerate_and_asymmetric_metrics_are_rejected() {
    assert!(MetricSpec::explicit(RationalMatrix::from_i64(&[&[1, 1], &[1, 1]])).is_err());
    assert!(MetricSpec::explicit(RationalMatrix::from_i64(&[&[1, 2], &[0, 1]])).is_err());
}

#[test]
fn sigma_notation() {
    let s = parse_sigma("18 35", 8).unwrap();
    assert_eq!(s, vec![7, 1, 4, 3, 2, 5, 6, 0]);
    assert_eq!(sigma_string(&s), "18 35");
    assert_eq!(parse_sigma("(18)(35)", 8).unwrap(), s);
    assert!(parse_sigma("18 13", 8).is_err());
    assert!(parse_sigma("19", 8).is_err());
    let t = parse_sigma("1-10 2-9", 10).unwrap();
    assert_eq!(t[0], 9);
    assert_eq!(sigma_string(&t), "1-10 2-9");
    assert!(sigma_diagonal_metric(&parse_sigma("123", 3).unwrap(), &[qi(1), qi(1), qi(1)]).is_err());
    let s2 = parse_sigma("12", 3).unwrap();
    assert!(sigma_diagonal_metric(&s2, &[qi(1), qi(2), qi(1)]).is_err());
    assert!(sigma_diagonal_metric(&s2, &[qi(1), qi(1), qi(0)]).is_err());
    let m = sigma_diagonal_metric(&s2, &[qi(2), qi(2), qi(-1)]).unwrap();
    assert_eq!(m.g.to_rows(), RationalMatrix::from_i64(&[&[0, 2, 0], &[2, 0, 0], &[0, 0, -1]]).to_rows());
}

#[test]
fn six_dimensional_sigma_metrics() {
    let a = record("no_filtration.nf", "p6_1");
    let m = sigma_diagonal_metric(&a.sigma.clone().unwrap().sigma, &(0..6).map(|_| qi(1)).collect::<Vec<_>>()).unwrap();
    let v = verify_ricci_flat(&a.algebra, &m, VerifyMode::Generic { samples: 5, seed: 7 }).unwrap();
    assert!(v.flat && v.probabilistic);

    // flat exactly when g1 = g3
    let b = record("no_filtration.nf", "p6_2");
    let sigma = b.sigma.clone().unwrap().sigma;
    let good = sigma_diagonal_metric(&sigma, &[qi(1), qi(2), qi(1), qi(3), qi(1), qi(1)]).unwrap();
    assert!(is_zero_matrix(&koszul_ricci(&b.algebra, &good.g.to_rows())));
    assert!(verify_ricci_flat(&b.algebra, &good, VerifyMode::Exact).unwrap().flat);
    let bad = sigma_diagonal_metric(&sigma, &[qi(1), qi(2), qi(5), qi(3), qi(5), qi(1)]).unwrap();
    assert!(!is_zero_matrix(&koszul_ricci(&b.algebra, &bad.g.to_rows())));
    let v = verify_ricci_flat(&b.algebra, &good, VerifyMode::Generic { samples: 5, seed: 0 }).unwrap();
    assert!(!v.flat);
    assert!(v.counterexample.is_some());
}

#[test]
fn generic_mode_needs_a_family() {
    let l = parse("0,0,e^{12}");
    let m = metric(RationalMatrix::identity(3).to_rows());
    assert!(verify_ricci_flat(&l, &m, VerifyMode::Generic { samples: 2, seed: 0 }).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(120))]

    #[test]
    fn three_ricci_computations_agree(pick in 0usize..10_000, seed in any::<u64>()) {
        let algs = small_algebras();
        let l = &algs[pick % algs.len()];
        let g = random_metric(l.dim(), seed);
        let m = metric(g.clone());
        let f = ricci_formula(l, &m).unwrap();
        let k = ricci_koszul(l, &m).unwrap();
        prop_assert_eq!(&f.ric, &k.ric);
        prop_assert_eq!(f.ric.to_rows(), koszul_ricci(l, &g));
        prop_assert!(f.ric.is_symmetric());
    }
}
