//! One PASS/FAIL line per acceptance criterion. Exits nonzero if any fails.

mod common;

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::time::{Duration, Instant};

use common::*;
use nilflat::batch::{run_batch, run_record, BatchOptions, Strategy, TorusSource};
use nilflat::exactlin::{derivation_space, diagonal_derivations, DiagonalTorus, RationalMatrix};
use nilflat::filtration::{admissible_orders, check_f_assignment, search_filtration, AdmissibleOrder};
use nilflat::grading::{check_g_sequence, enumerate_g_sequences, grading_from_torus, Grading, Weight, WeightSequence};
use nilflat::metric::{
    build_filtration_metric, build_grading_metric, parse_sigma, random_nonzero, ricci_formula, ricci_koszul,
    sigma_diagonal_metric, verify_ricci_flat, MetricSpec, VerifyMode,
};
use nilflat::rational::from_integers;
use nilflat::records::{AlgebraRecord, OutcomeKind};
use nilflat::{LieAlgebra, Rational};
use num_traits::Zero;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, &'static str, Option<Duration>, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn exact_flat(l: &LieAlgebra, m: &MetricSpec) -> bool {
    let v = verify_ricci_flat(l, m, VerifyMode::Exact).expect("verification runs");
    v.flat && is_zero_matrix(&koszul_ricci(l, &m.g.to_rows()))
}

fn torus_from(rec: &AlgebraRecord, weights: Vec<Weight>) -> DiagonalTorus {
    DiagonalTorus::from_weight_rows(&rec.algebra, weights.into_iter().map(|w| w.0).collect()).expect("torus")
}

fn listed_torus(rec: &AlgebraRecord) -> DiagonalTorus {
    if let Some(t) = &rec.torus {
        return torus_from(rec, t.clone());
    }
    let s = rec.sequence.as_ref().expect("listed sequence");
    let mut w = vec![Weight(vec![]); rec.algebra.dim()];
    for (p, &i) in s.order.iter().enumerate() {
        w[i] = s.weights[p].clone();
    }
    torus_from(rec, w)
}

fn first_passing(g: &Grading) -> Option<WeightSequence> {
    enumerate_g_sequences(g).next()
}

fn c1_cross_oracle() -> Outcome {
    let mut algs: Vec<(String, LieAlgebra)> = Vec::new();
    let mut seen = BTreeSet::new();
    let sources = [fixture("worked_examples.nf"), fixture("no_filtration.nf"), fixture("corpus_dim7.nf")];
    for r in sources.iter().flatten() {
        let d = r.algebra.dim();
        if (3..=6).contains(&d) && seen.insert(r.algebra.to_salamon()) && algs.len() < 10 {
            algs.push((r.name.clone(), r.algebra.clone()));
        }
    }
    ensure(algs.len() == 10, || format!("only {} algebras", algs.len()))?;
    let mut count = 0;
    for (a, (name, l)) in algs.iter().enumerate() {
        for s in 0..50u64 {
            let g = random_metric(l.dim(), 1000 * a as u64 + s);
            let m = MetricSpec::explicit(RationalMatrix::from_rows(g.clone()).unwrap()).unwrap();
            let f = ricci_formula(l, &m).unwrap();
            let k = ricci_koszul(l, &m).unwrap();
            ensure(f.ric == k.ric, || format!("{name}: methods differ at seed {s}"))?;
            if s < 5 {
                ensure(f.ric.to_rows() == koszul_ricci(l, &g), || format!("{name}: test oracle differs at seed {s}"))?;
            }
            count += 1;
        }
    }
    Ok(format!("{count} metrics over 10 algebras agree entrywise"))
}

fn c2_calibration() -> Outcome {
    let l = record("worked_examples.nf", "heis3").algebra;
    let m = MetricSpec::explicit(RationalMatrix::identity(3)).unwrap();
    let expect = vec![vec![q(-1, 2), qi(0), qi(0)], vec![qi(0), q(-1, 2), qi(0)], vec![qi(0), qi(0), q(1, 2)]];
    ensure(koszul_ricci(&l, &m.g.to_rows()) == expect, || "test oracle disagrees with diag(-1/2,-1/2,1/2)".into())?;
    ensure(ricci_formula(&l, &m).unwrap().ric.to_rows() == expect, || "formula".into())?;
    ensure(ricci_koszul(&l, &m).unwrap().ric.to_rows() == expect, || "koszul".into())?;
    Ok("Ric = diag(-1/2, -1/2, 1/2) by both methods".into())
}

/// A permutation inside each layer taking `g` to `target`.
fn equal_up_to_layers(g: &RationalMatrix, target: &RationalMatrix, grading: &Grading) -> bool {
    let n = g.rows();
    permutations(n).into_iter().any(|p| {
        (0..n).all(|i| grading.weight(p[i]) == grading.weight(i))
            && (0..n).all(|i| (0..n).all(|j| g[(p[i], p[j])] == target[(i, j)]))
    })
}

fn c3_first_example() -> Outcome {
    let r = record("worked_examples.nf", "grading6");
    let l = &r.algebra;
    let d = derivation_space(l).dim();
    ensure(d == 10 && derivation_dim(l) == 10, || format!("dim Der = {d}"))?;
    let g = grading_from_torus(l, &diagonal_derivations(l)).unwrap();
    let layers: Vec<Vec<usize>> = g.layers().values().cloned().collect();
    ensure(layers == vec![vec![0, 1], vec![2], vec![3, 4], vec![5]], || format!("layers {layers:?}"))?;
    let s = first_passing(&g).ok_or("no weight sequence")?;
    let m = build_grading_metric(l, &g, &s).unwrap();
    let mut target = RationalMatrix::zeros(6, 6);
    for (i, j) in [(1, 5), (0, 4), (2, 3)] {
        target[(i, j)] = qi(1);
        target[(j, i)] = qi(1);
    }
    ensure(equal_up_to_layers(&m.g, &target, &g), || format!("metric {m}"))?;
    ensure(exact_flat(l, &m), || "metric not flat".into())?;
    Ok(format!("dim Der = 10, layers {{e1,e2}},{{e3}},{{e4,e5}},{{e6}}, metric {m}, Ricci = 0"))
}

fn c4_non_nice() -> Outcome {
    let r = record("worked_examples.nf", "nonnice6");
    let l = &r.algebra;
    let t = diagonal_derivations(l);
    ensure(t.rank() == 1, || format!("torus rank {}", t.rank()))?;
    let w: Vec<Rational> = (0..6).map(|i| t.weight(i)[0].clone()).collect();
    let expect: Vec<Rational> = [1, 2, 3, 3, 4, 5].into_iter().map(qi).collect();
    ensure(w.iter().zip(&expect).all(|(x, e)| x / &w[0] == *e), || format!("weights {w:?}"))?;
    let g = grading_from_torus(l, &t).unwrap();
    let s = WeightSequence::new(&g, (0..6).collect()).unwrap();
    ensure(check_g_sequence(&g, &s).passed() && g_oracle(s.weights()), || "sequence fails (G1)-(G5)".into())?;
    let m = build_grading_metric(l, &g, &s).unwrap();
    ensure(exact_flat(l, &m), || "antidiagonal metric not flat".into())?;
    let f = search_filtration(l).ok_or("no filtration")?;
    let fw = f.rational_weights();
    ensure(fw.iter().zip(&expect).all(|(x, e)| x / &fw[0] == *e), || {
        format!("filtration weights {}", f.weights_string())
    })?;
    ensure(f_oracle(l, &f.order.0, &fw), || "filtration fails (F1)-(F4)".into())?;
    ensure(exact_flat(l, &build_filtration_metric(l, &f).unwrap()), || "filtration metric not flat".into())?;
    Ok(format!("torus weights ∝ 1,2,3,3,4,5; grading metric flat; filtration {f}"))
}

fn c5_nonnice_gradings() -> Outcome {
    let recs = fixture("nonnice_gradings.nf");
    ensure(recs.len() == 23, || format!("{} rows", recs.len()))?;
    for r in &recs {
        let g = grading_from_torus(&r.algebra, &listed_torus(r)).map_err(|e| format!("{}: {e}", r.name))?;
        let listed = r.sequence.clone().unwrap();
        let s = WeightSequence::listed(&g, listed.order, listed.weights).map_err(|e| format!("{}: {e}", r.name))?;
        ensure(check_g_sequence(&g, &s).passed(), || format!("{}: listed sequence fails", r.name))?;
        let found = first_passing(&g).ok_or_else(|| format!("{}: enumeration empty", r.name))?;
        ensure(g_oracle(found.weights()), || format!("{}: enumerated sequence fails the oracle", r.name))?;
    }
    let ug = fixture("unique_grading.nf");
    ensure(ug.len() == 5, || "five unique-grading algebras".into())?;
    let mut zero = 0;
    for r in &ug {
        let g = grading_from_torus(&r.algebra, &listed_torus(r)).unwrap();
        zero += usize::from(g.has_zero_weight());
        ensure(first_passing(&g).is_none(), || format!("{}: enumeration not empty", r.name))?;
    }
    Ok(format!("23 rows enumerate and verify; 5 unique gradings ({zero} with weight 0) enumerate nothing"))
}

fn c6_filtrations() -> Outcome {
    let recs = fixture("filtrations.nf");
    ensure(recs.len() == 39, || format!("{} rows", recs.len()))?;
    for r in &recs {
        let f = r.filtration.clone().unwrap();
        let w = from_integers(&f.weights);
        ensure(check_f_assignment(&r.algebra, &AdmissibleOrder(f.order.clone()), &w).passed(), || {
            format!("{}: listed assignment fails", r.name)
        })?;
        ensure(f_oracle(&r.algebra, &f.order, &w), || format!("{}: listed assignment fails the oracle", r.name))?;
        let found = search_filtration(&r.algebra).ok_or_else(|| format!("{}: search found nothing", r.name))?;
        let m = build_filtration_metric(&r.algebra, &found).unwrap();
        ensure(exact_flat(&r.algebra, &m), || format!("{}: witness metric not flat", r.name))?;
    }
    Ok("39 listed assignments pass; 39 searched witnesses give exactly flat metrics".into())
}

fn c7_nonexistence() -> Outcome {
    let mut recs: Vec<AlgebraRecord> = fixture("no_filtration.nf");
    ensure(recs.len() == 7, || format!("{} algebras", recs.len()))?;
    recs.push(record("counterexamples9.nf", "no_filtration9"));
    for r in &recs {
        ensure(search_filtration(&r.algebra).is_none(), || format!("{}: a filtration was found", r.name))?;
    }
    Ok("no adapted filtration for the 7 algebras and the 9-dimensional example".into())
}

fn c8_counterexamples() -> Outcome {
    let opts =
        BatchOptions { strategies: vec![Strategy::Grading], torus: TorusSource::FromFile, ..BatchOptions::default() };
    let cases = [("g1_obstructed_a", ["d1+d7=d3", "d3+d4=d7"]), ("g1_obstructed_b", ["d2+d9=d7", "d4+d7=d9"])];
    for (name, witness) in cases {
        let r = record("counterexamples9.nf", name);
        let g = grading_from_torus(&r.algebra, &listed_torus(&r)).unwrap();
        ensure(first_passing(&g).is_none(), || format!("{name}: enumeration not empty"))?;
        let rep = run_record(&r, &opts);
        ensure(rep.outcome.kind() == Some(OutcomeKind::Unresolved), || format!("{name}: {}", rep.outcome.label()))?;
        let diag = rep.diagnostics.join("; ");
        ensure(witness.iter().all(|w| diag.contains(w)), || format!("{name}: diagnostics `{diag}`"))?;
    }
    Ok("both 9-dimensional gradings enumerate nothing; (G1) witnesses reported".into())
}

fn sigma8_algebra(row: usize) -> LieAlgebra {
    record("sigma8.nf", &format!("s8_{row}")).algebra
}

/// Ricci-flat at `samples` random σ-invariant parameter choices.
fn generic_flat(l: &LieAlgebra, sigma: &str) -> bool {
    let s = parse_sigma(sigma, 8).unwrap();
    let m = sigma_diagonal_metric(&s, &vec![qi(1); 8]).unwrap();
    verify_ricci_flat(l, &m, VerifyMode::Generic { samples: 5, seed: 0 }).unwrap().flat
}

/// Row 4 at `g2` solved from a relation `a·g2 + b = 0`, σ = 18 26 37.
fn row4_params(g1: &Rational, g3: &Rational, g4: &Rational, g5: &Rational, g2: Rational) -> Vec<Rational> {
    vec![g1.clone(), g2.clone(), g3.clone(), g4.clone(), g5.clone(), g2, g3.clone(), g1.clone()]
}

fn row4_check(solve: impl Fn(&Rational, &Rational, &Rational, &Rational) -> Option<Rational>) -> (usize, usize, bool) {
    let l = sigma8_algebra(4);
    let s = parse_sigma("18 26 37", 8).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut flat, mut tried) = (0, 0);
    let mut violation_flat = false;
    while tried < 5 {
        let (g1, g3, g4, g5) =
            (random_nonzero(&mut rng), random_nonzero(&mut rng), random_nonzero(&mut rng), random_nonzero(&mut rng));
        let Some(g2) = solve(&g1, &g3, &g4, &g5).filter(|x| !x.is_zero()) else {
            continue;
        };
        tried += 1;
        let m = sigma_diagonal_metric(&s, &row4_params(&g1, &g3, &g4, &g5, g2.clone())).unwrap();
        flat += usize::from(exact_flat(&l, &m));
        let off = &g2 + qi(1);
        if !off.is_zero() {
            let m = sigma_diagonal_metric(&s, &row4_params(&g1, &g3, &g4, &g5, off)).unwrap();
            violation_flat |= exact_flat(&l, &m);
        }
    }
    (flat, tried, violation_flat)
}

fn c9_sigma_printed() -> Outcome {
    let printed = [(1, "18 35"), (2, "17 28 35"), (3, "18 26 37"), (5, "47 56")];
    let mut failures = Vec::new();
    for (row, sigma) in printed {
        if !generic_flat(&sigma8_algebra(row), sigma) {
            failures.push(format!("row {row} σ = {sigma} is not flat at random parameters"));
        }
    }
    // 8g4g5(g3²-g1²) + g2g3(9g5²+4g1²) = 0
    let displayed = |g1: &Rational, g3: &Rational, g4: &Rational, g5: &Rational| {
        let a = g3 * &(qi(9) * g5 * g5 + qi(4) * g1 * g1);
        let b = qi(8) * g4 * g5 * (g3 * g3 - g1 * g1);
        (!a.is_zero()).then(|| -b / a)
    };
    let (flat, tried, violation_flat) = row4_check(displayed);
    if flat != tried {
        failures.push(format!("row 4 flat at {flat}/{tried} solutions of the displayed relation"));
    }
    if violation_flat {
        failures.push("row 4 flat off the displayed relation".into());
    }
    if failures.is_empty() {
        Ok("rows 1, 2, 3, 5 generically flat; row 4 flat exactly on the displayed relation".into())
    } else {
        Err(failures.join("; "))
    }
}

/// Companion checks for the σ's and relation shipped in the fixtures.
fn c9_shipped() -> Outcome {
    for r in fixture("sigma8.nf") {
        let spec = r.sigma.clone().unwrap();
        let m = match &spec.params {
            Some(p) => sigma_diagonal_metric(&spec.sigma, p).unwrap(),
            None => sigma_diagonal_metric(&spec.sigma, &vec![qi(1); 8]).unwrap(),
        };
        let ok = match spec.params {
            Some(_) => exact_flat(&r.algebra, &m),
            None => verify_ricci_flat(&r.algebra, &m, VerifyMode::Generic { samples: 5, seed: 0 }).unwrap().flat,
        };
        ensure(ok, || format!("{}: shipped σ-metric not flat", r.name))?;
    }
    // 8g4g5(g3²-g1²) + g2g3(4g1²-9g5²) = 0
    let corrected = |g1: &Rational, g3: &Rational, g4: &Rational, g5: &Rational| {
        let a = g3 * &(qi(4) * g1 * g1 - qi(9) * g5 * g5);
        let b = qi(8) * g4 * g5 * (g3 * g3 - g1 * g1);
        (!a.is_zero()).then(|| -b / a)
    };
    let (flat, tried, violation_flat) = row4_check(corrected);
    ensure(flat == tried && !violation_flat, || {
        format!("corrected relation: {flat}/{tried}, violation flat {violation_flat}")
    })?;
    Ok("shipped σ's (18 35 67, 17 28 35, 18 26 35 47, 18 26 37, 18 47 56) flat; row 4 flat exactly on 8g4g5(g3²-g1²)+g2g3(4g1²-9g5²)=0".into())
}

fn c10_brute_force() -> Outcome {
    let mut count = 0;
    for r in all_fixtures().iter().filter(|r| r.algebra.dim() <= 5) {
        let l = &r.algebra;
        let perms = permutations(l.dim());
        let got: BTreeSet<Vec<usize>> = admissible_orders(l).map(|o| o.0).collect();
        let want: BTreeSet<Vec<usize>> = perms.iter().filter(|o| admissible_oracle(l, o)).cloned().collect();
        ensure(got == want, || format!("{}: admissible orders differ", r.name))?;
        let g = grading_from_torus(l, &diagonal_derivations(l)).unwrap();
        let got: Vec<Vec<usize>> = enumerate_g_sequences(&g).map(|s| s.order().to_vec()).collect();
        let set: BTreeSet<Vec<usize>> = got.iter().cloned().collect();
        let want: BTreeSet<Vec<usize>> = perms
            .iter()
            .filter(|o| g_oracle(&o.iter().map(|&i| g.weight(i).clone()).collect::<Vec<_>>()))
            .cloned()
            .collect();
        ensure(set.len() == got.len() && set == want, || format!("{}: weight sequences differ", r.name))?;
        count += 1;
    }
    ensure(count >= 10, || format!("only {count} fixtures"))?;
    Ok(format!("{count} fixtures with n <= 5 match brute force"))
}

fn c11_classification() -> Outcome {
    let path = std::env::var_os("LIE_CLASSIFICATION_FILE")
        .map(PathBuf::from)
        .unwrap_or_else(|| fixture_path("corpus_dim7.nf"));
    let report = run_batch(&path, &Default::default(), &BatchOptions::default()).map_err(|e| e.to_string())?;
    let unresolved: Vec<&str> = report.unresolved().iter().map(|r| r.name.as_str()).collect();
    ensure(unresolved.is_empty(), || format!("unresolved: {}", unresolved.join(", ")))?;
    let n = report.records.len();
    let count = |k| report.records.iter().filter(|r| r.outcome.kind() == Some(k)).count();
    Ok(format!(
        "{}: {n}/{n} resolved ({} grading, {} filtration, {} sigma)",
        path.display(),
        count(OutcomeKind::Grading),
        count(OutcomeKind::Filtration),
        count(OutcomeKind::Sigma)
    ))
}

fn main() {
    let criteria: Vec<Criterion> = vec![
        ("1", "cross-oracle Ricci", Some(Duration::from_secs(30)), c1_cross_oracle),
        ("2", "Heisenberg calibration", None, c2_calibration),
        ("3", "first example (derivations, layers, metric)", None, c3_first_example),
        ("4", "non-nice 6-dimensional example", None, c4_non_nice),
        ("5", "non-nice gradings and unique gradings", Some(Duration::from_secs(120)), c5_nonnice_gradings),
        ("6", "listed filtrations", Some(Duration::from_secs(300)), c6_filtrations),
        ("7", "filtration nonexistence", Some(Duration::from_secs(600)), c7_nonexistence),
        ("8", "9-dimensional grading counterexamples", None, c8_counterexamples),
        ("9", "8-dimensional σ-diagonal metrics as listed", None, c9_sigma_printed),
        ("9*", "8-dimensional σ-diagonal metrics as corrected", None, c9_shipped),
        ("10", "brute-force equivalence", Some(Duration::from_secs(60)), c10_brute_force),
        ("11", "classification file", None, c11_classification),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = Vec::new();
    for (id, title, limit, f) in criteria {
        let start = Instant::now();
        let mut result = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let elapsed = start.elapsed();
        if let (Some(lim), Ok(_)) = (limit, &result) {
            if elapsed > lim {
                result = Err(format!("took {elapsed:.1?}, limit {lim:?}"));
            }
        }
        match result {
            Ok(detail) => println!("PASS [{id}] {title}: {detail} ({elapsed:.1?})"),
            Err(detail) => {
                println!("FAIL [{id}] {title}: {detail} ({elapsed:.1?})");
                failed.push(id);
            }
        }
    }
    if !failed.is_empty() {
        println!("acceptance: {} failing criteria: {}", failed.len(), failed.join(", "));
        std::process::exit(1);
    }
    println!("acceptance: all criteria pass");
}
