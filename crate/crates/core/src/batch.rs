//! Batch resolution: grading, then filtration, then a supplied σ-diagonal
//! metric, with every metric re-verified exactly.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::exactlin::{diagonal_derivations, DiagonalTorus, RationalMatrix};
use crate::filtration::{search_filtration, FiltrationWitness};
use crate::grading::{enumerate_g_sequences, g1_obstructions, grading_from_torus, Grading, Weight, WeightSequence};
use crate::metric::{
    build_filtration_metric, build_grading_metric, random_sigma_params, sigma_diagonal_metric, sigma_string,
    verify_ricci_flat, MetricSpec, VerifyMode,
};
use crate::rational::{parse_rational, Rational};
use crate::records::{read_records, AlgebraRecord, OutcomeKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    Grading,
    Filtration,
    Sigma,
}

/// Parses `g,f,s` (or full names).
pub fn parse_strategy(text: &str) -> Result<Vec<Strategy>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| match s {
            "g" | "grading" => Ok(Strategy::Grading),
            "f" | "filtration" => Ok(Strategy::Filtration),
            "s" | "sigma" => Ok(Strategy::Sigma),
            _ => Err(Error::Input(format!("unknown strategy `{s}`"))),
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TorusSource {
    /// Diagonal derivations in the given basis.
    Diagonal,
    /// `!torus` or `!sequence` data when present, diagonal otherwise.
    FromFile,
}

#[derive(Clone, Debug)]
pub struct BatchOptions {
    pub strategies: Vec<Strategy>,
    pub torus: TorusSource,
    /// Worker threads; `None` uses the global pool.
    pub jobs: Option<usize>,
    pub seed: u64,
    pub samples: usize,
}

impl Default for BatchOptions {
    fn default() -> Self {
        Self {
            strategies: vec![Strategy::Grading, Strategy::Filtration, Strategy::Sigma],
            torus: TorusSource::FromFile,
            jobs: None,
            seed: 0,
            samples: 5,
        }
    }
}

#[derive(Clone, Debug)]
pub enum Outcome {
    Grading(WeightSequence),
    Filtration(FiltrationWitness),
    Sigma {
        sigma: Vec<usize>,
        params: Vec<Rational>,
        generic: bool,
    },
    Unresolved,
    /// The record could not be processed (Jacobi failure, bad data).
    Invalid(String),
}

impl Outcome {
    pub fn kind(&self) -> Option<OutcomeKind> {
        match self {
            Outcome::Grading(_) => Some(OutcomeKind::Grading),
            Outcome::Filtration(_) => Some(OutcomeKind::Filtration),
            Outcome::Sigma { .. } => Some(OutcomeKind::Sigma),
            Outcome::Unresolved => Some(OutcomeKind::Unresolved),
            Outcome::Invalid(_) => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Outcome::Grading(_) => "grading",
            Outcome::Filtration(_) => "filtration",
            Outcome::Sigma { .. } => "sigma",
            Outcome::Unresolved => "unresolved",
            Outcome::Invalid(_) => "invalid",
        }
    }

    pub fn is_resolved(&self) -> bool {
        matches!(self, Outcome::Grading(_) | Outcome::Filtration(_) | Outcome::Sigma { .. })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RicciCertificate {
    pub formula_zero: bool,
    pub koszul_zero: bool,
}

#[derive(Clone, Debug)]
pub struct RecordReport {
    pub name: String,
    pub source: String,
    pub dim: usize,
    pub outcome: Outcome,
    pub metric: Option<MetricSpec>,
    pub certificate: Option<RicciCertificate>,
    pub diagnostics: Vec<String>,
    /// Disagreements with the record's `!expect` line.
    pub mismatches: Vec<String>,
    pub elapsed: Duration,
}

impl RecordReport {
    pub fn weights(&self) -> Option<String> {
        match &self.outcome {
            Outcome::Grading(s) => Some(s.weights_string()),
            Outcome::Filtration(w) => Some(w.weights_string()),
            Outcome::Sigma { params, .. } => Some(params.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")),
            _ => None,
        }
    }

    pub fn adapted_basis(&self) -> Option<String> {
        match &self.outcome {
            Outcome::Grading(s) => Some(s.basis_string()),
            Outcome::Filtration(w) => Some(w.order.basis_string()),
            Outcome::Sigma { sigma, .. } => Some(sigma_string(sigma)),
            _ => None,
        }
    }

    pub fn to_json(&self) -> Value {
        let mut v = json!({
            "name": self.name,
            "outcome": self.outcome.label(),
            "metric": self.metric.as_ref().map(MetricSpec::to_string_rows),
            "certificate": self.certificate.map(|c| json!({
                "formula_zero": c.formula_zero,
                "koszul_zero": c.koszul_zero,
            })),
        });
        let obj = v.as_object_mut().expect("object");
        if let Some(w) = self.weights() {
            obj.insert("weights".into(), json!(w));
        }
        if let Some(b) = self.adapted_basis() {
            obj.insert("adapted_basis".into(), json!(b));
        }
        if !self.diagnostics.is_empty() {
            obj.insert("diagnostics".into(), json!(self.diagnostics));
        }
        v
    }
}

#[derive(Clone, Debug, Default)]
pub struct Report {
    pub records: Vec<RecordReport>,
}

impl Report {
    pub fn unresolved(&self) -> Vec<&RecordReport> {
        self.records.iter().filter(|r| !r.outcome.is_resolved()).collect()
    }

    pub fn mismatches(&self) -> Vec<(&str, &str)> {
        self.records.iter().flat_map(|r| r.mismatches.iter().map(move |m| (r.name.as_str(), m.as_str()))).collect()
    }

    pub fn to_json(&self) -> Value {
        Value::Array(self.records.iter().map(RecordReport::to_json).collect())
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for r in &self.records {
            let _ = write!(s, "{}: {}", r.name, r.outcome.label());
            if let Some(b) = r.adapted_basis() {
                let _ = write!(s, "  {b}");
            }
            if let Some(w) = r.weights() {
                let _ = write!(s, "  {w}");
            }
            let _ = writeln!(s, "  ({:.1?})", r.elapsed);
            if let Outcome::Invalid(e) = &r.outcome {
                let _ = writeln!(s, "    error: {e}");
            }
            if let Some(m) = &r.metric {
                let _ = writeln!(s, "    metric: {m}");
            }
            if let Some(c) = r.certificate {
                let _ = writeln!(
                    s,
                    "    ricci: formula {}, koszul {}",
                    if c.formula_zero { "zero" } else { "nonzero" },
                    if c.koszul_zero { "zero" } else { "nonzero" }
                );
            }
            for d in &r.diagnostics {
                let _ = writeln!(s, "    {d}");
            }
            for m in &r.mismatches {
                let _ = writeln!(s, "    MISMATCH: {m}");
            }
        }
        let resolved = self.records.iter().filter(|r| r.outcome.is_resolved()).count();
        let _ = writeln!(s, "{resolved}/{} resolved", self.records.len());
        s
    }

    /// A `tabular` with one row per record.
    pub fn to_latex_table(&self) -> String {
        let mut s =
            String::from("\\begin{tabular}{llll}\n\\mathfrak{g} & outcome & adapted basis & weights\\\\\n\\hline\n");
        for r in &self.records {
            let _ = writeln!(
                s,
                "{} & {} & {} & {}\\\\",
                r.source,
                r.outcome.label(),
                r.adapted_basis().unwrap_or_default(),
                r.weights().unwrap_or_default()
            );
        }
        s.push_str("\\end{tabular}\n");
        s
    }
}

/// Parses a metric back from its JSON rows.
pub fn metric_from_json(rows: &Value) -> Result<MetricSpec> {
    let rows = rows.as_array().ok_or_else(|| Error::Input("metric must be an array".into()))?;
    let parsed: Vec<Vec<Rational>> = rows
        .iter()
        .map(|r| {
            r.as_array()
                .ok_or_else(|| Error::Input("metric row must be an array".into()))?
                .iter()
                .map(|x| {
                    x.as_str().and_then(parse_rational).ok_or_else(|| Error::Input(format!("bad metric entry {x}")))
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    MetricSpec::explicit(RationalMatrix::from_rows(parsed)?)
}

fn torus_for(rec: &AlgebraRecord, source: TorusSource) -> Result<DiagonalTorus> {
    let l = &rec.algebra;
    let listed: Option<Vec<Weight>> = match source {
        TorusSource::Diagonal => None,
        TorusSource::FromFile => rec.torus.clone().or_else(|| {
            rec.sequence.as_ref().map(|s| {
                let mut w = vec![Weight(vec![]); l.dim()];
                for (p, &i) in s.order.iter().enumerate() {
                    w[i] = s.weights[p].clone();
                }
                w
            })
        }),
    };
    match listed {
        Some(w) => DiagonalTorus::from_weight_rows(l, w.into_iter().map(|x| x.0).collect()),
        None => Ok(diagonal_derivations(l)),
    }
}

fn grading_failure(g: &Grading) -> String {
    if g.has_zero_weight() {
        "grading: 0 is a weight, (G1) cannot hold".into()
    } else {
        let obs = g1_obstructions(g);
        if obs.is_empty() {
            return "grading: no weight sequence satisfies (G1)-(G5)".into();
        }
        let obs: Vec<String> =
            obs.iter().map(|o| o.cycle.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")).collect();
        format!("grading: (G1) cannot hold: {}", obs.join("; "))
    }
}

fn certify(rec: &AlgebraRecord, m: &MetricSpec) -> Result<RicciCertificate> {
    let v = verify_ricci_flat(&rec.algebra, m, VerifyMode::Exact)?;
    Ok(RicciCertificate { formula_zero: v.formula_zero, koszul_zero: v.koszul_zero })
}

struct Attempt {
    outcome: Outcome,
    metric: MetricSpec,
    certificate: RicciCertificate,
}

fn try_strategy(
    rec: &AlgebraRecord,
    s: Strategy,
    opts: &BatchOptions,
    diag: &mut Vec<String>,
    tried: &mut Vec<Strategy>,
) -> Result<Option<Attempt>> {
    let l = &rec.algebra;
    tried.push(s);
    match s {
        Strategy::Grading => {
            let g = grading_from_torus(l, &torus_for(rec, opts.torus)?)?;
            let Some(seq) = enumerate_g_sequences(&g).next() else {
                diag.push(grading_failure(&g));
                return Ok(None);
            };
            let m = build_grading_metric(l, &g, &seq)?;
            let c = certify(rec, &m)?;
            if !(c.formula_zero && c.koszul_zero) {
                return Err(Error::NotFlat);
            }
            Ok(Some(Attempt { outcome: Outcome::Grading(seq), metric: m, certificate: c }))
        }
        Strategy::Filtration => {
            let Some(w) = search_filtration(l) else {
                diag.push("filtration: no adapted filtration in this basis".into());
                return Ok(None);
            };
            let m = build_filtration_metric(l, &w)?;
            let c = certify(rec, &m)?;
            if !(c.formula_zero && c.koszul_zero) {
                return Err(Error::NotFlat);
            }
            Ok(Some(Attempt { outcome: Outcome::Filtration(w), metric: m, certificate: c }))
        }
        Strategy::Sigma => {
            let Some(spec) = &rec.sigma else {
                return Ok(None);
            };
            let (params, generic) = match &spec.params {
                Some(p) => (p.clone(), false),
                None => {
                    use rand::SeedableRng;
                    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(opts.seed);
                    (random_sigma_params(&spec.sigma, &mut rng), true)
                }
            };
            let m = sigma_diagonal_metric(&spec.sigma, &params)?;
            if generic {
                let v = verify_ricci_flat(l, &m, VerifyMode::Generic { samples: opts.samples, seed: opts.seed })?;
                if !v.flat {
                    diag.push(format!("sigma: {} is not Ricci-flat for generic parameters", sigma_string(&spec.sigma)));
                    return Ok(None);
                }
            }
            let c = certify(rec, &m)?;
            if !(c.formula_zero && c.koszul_zero) {
                diag.push(format!("sigma: {} is not Ricci-flat at the given parameters", sigma_string(&spec.sigma)));
                return Ok(None);
            }
            Ok(Some(Attempt {
                outcome: Outcome::Sigma { sigma: spec.sigma.clone(), params, generic },
                metric: m,
                certificate: c,
            }))
        }
    }
}

pub fn run_record(rec: &AlgebraRecord, opts: &BatchOptions) -> RecordReport {
    let start = Instant::now();
    let mut diagnostics = Vec::new();
    let mut tried = Vec::new();
    let l = &rec.algebra;
    let mut result: Result<Option<Attempt>> = Ok(None);
    if let Err(v) = l.jacobi_check() {
        result = Err(Error::Input(format!(
            "Jacobi identity fails: {}",
            v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
        )));
    } else if !l.is_nilpotent() {
        result = Err(Error::NotNilpotent);
    } else {
        for &s in &opts.strategies {
            result = try_strategy(rec, s, opts, &mut diagnostics, &mut tried);
            if !matches!(result, Ok(None)) {
                break;
            }
        }
    }
    let (outcome, metric, certificate) = match result {
        Ok(Some(a)) => (a.outcome, Some(a.metric), Some(a.certificate)),
        Ok(None) => (Outcome::Unresolved, None, None),
        Err(e) => (Outcome::Invalid(e.to_string()), None, None),
    };
    let mut mismatches = Vec::new();
    let e = &rec.expect;
    if let Some(want) = e.outcome {
        if outcome.kind() != Some(want) {
            mismatches.push(format!("expected {want}, got {}", outcome.label()));
        }
    }
    if e.no_grading && matches!(outcome, Outcome::Grading(_)) {
        mismatches.push("expected no grading".into());
    }
    if e.no_filtration && matches!(outcome, Outcome::Filtration(_)) {
        mismatches.push("expected no filtration".into());
    }
    RecordReport {
        name: rec.name.clone(),
        source: rec.source.clone(),
        dim: l.dim(),
        outcome,
        metric,
        certificate,
        diagnostics,
        mismatches,
        elapsed: start.elapsed(),
    }
}

/// Runs every record; the report follows input order whatever the
/// parallelism.
pub fn run_records(records: &[AlgebraRecord], opts: &BatchOptions) -> Result<Report> {
    let work = || records.par_iter().map(|r| run_record(r, opts)).collect::<Vec<_>>();
    let records = match opts.jobs {
        Some(j) => rayon::ThreadPoolBuilder::new()
            .num_threads(j.max(1))
            .build()
            .map_err(|e| Error::Input(e.to_string()))?
            .install(work),
        None => work(),
    };
    Ok(Report { records })
}

pub fn run_batch(path: &Path, subst: &BTreeMap<String, Rational>, opts: &BatchOptions) -> Result<Report> {
    let records = read_records(path, subst)?;
    run_records(&records, opts)
}
