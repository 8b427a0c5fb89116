//! Classification files: one algebra per line, with directives.
//!
//! ```text
//! # comment
//! !params lambda=3
//! !frame e1+e2, e1-e2, e3
//! name: 0,0,e^{12}
//! ```
//!
//! Directives apply to the next algebra line:
//!
//! - `!params a=1/2, b`: parameter values (a bare name means 2)
//! - `!frame v1, ..., vn`: rewrite the algebra in this frame
//! - `!torus w1, ..., wn`: torus weights per basis index
//! - `!sequence w1,...,wn | e3,e1,...`: a weight sequence and its basis
//! - `!filtration e1,...,en | 2,3,...`: an adapted basis and filtration weights
//! - `!sigma 18 35 | g1,...,gn`: a σ-diagonal metric, parameters optional
//! - `!expect grading|filtration|sigma|unresolved, no-grading, no-filtration`

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use num_bigint::BigInt;

use crate::algebra::{parse_algebra, parse_vectors, LieAlgebra};
use crate::error::{Error, Result};
use crate::exactlin::RationalMatrix;
use crate::grading::{parse_weights, Weight};
use crate::metric::parse_sigma;
use crate::rational::{parse_rational, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutcomeKind {
    Grading,
    Filtration,
    Sigma,
    Unresolved,
}

impl fmt::Display for OutcomeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutcomeKind::Grading => "grading",
            OutcomeKind::Filtration => "filtration",
            OutcomeKind::Sigma => "sigma",
            OutcomeKind::Unresolved => "unresolved",
        })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Expectations {
    pub outcome: Option<OutcomeKind>,
    pub no_grading: bool,
    pub no_filtration: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ListedSequence {
    pub order: Vec<usize>,
    pub weights: Vec<Weight>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ListedFiltration {
    pub order: Vec<usize>,
    pub weights: Vec<BigInt>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SigmaSpec {
    pub sigma: Vec<usize>,
    /// `None` means "for generic parameters".
    pub params: Option<Vec<Rational>>,
}

#[derive(Clone, Debug)]
pub struct AlgebraRecord {
    pub name: String,
    pub line: usize,
    /// The Salamon text as written.
    pub source: String,
    pub algebra: LieAlgebra,
    pub frame: Option<RationalMatrix>,
    pub torus: Option<Vec<Weight>>,
    pub sequence: Option<ListedSequence>,
    pub filtration: Option<ListedFiltration>,
    pub sigma: Option<SigmaSpec>,
    pub expect: Expectations,
}

/// Parses `e2,e1,e_3` into 0-based indices forming a permutation.
pub fn parse_basis_list(text: &str, n: usize) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for tok in text.split(',').map(str::trim) {
        let digits = tok
            .strip_prefix('e')
            .or_else(|| tok.strip_prefix('E'))
            .map(|s| s.trim_start_matches('_').trim_matches(|c| c == '{' || c == '}'))
            .ok_or_else(|| Error::Input(format!("expected a basis vector, found `{tok}`")))?;
        let i: usize = digits.parse().map_err(|_| Error::Input(format!("expected a basis vector, found `{tok}`")))?;
        if i == 0 || i > n {
            return Err(Error::IndexOutOfRange { index: i, dim: n });
        }
        out.push(i - 1);
    }
    crate::algebra::check_permutation(&out, n)?;
    Ok(out)
}

fn parse_params(text: &str) -> Result<BTreeMap<String, Rational>> {
    let mut out = BTreeMap::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (name, value) = match item.split_once('=') {
            Some((a, b)) => {
                (a.trim(), parse_rational(b).ok_or_else(|| Error::Input(format!("bad value in `{item}`")))?)
            }
            None => (item, Rational::from_integer(2.into())),
        };
        let name = name.trim_start_matches('\\');
        if name.is_empty() || !name.chars().all(|c| c.is_alphanumeric() || c == '_') {
            return Err(Error::Input(format!("bad parameter name in `{item}`")));
        }
        out.insert(name.to_string(), value);
    }
    Ok(out)
}

fn is_basis_list(s: &str) -> bool {
    s.split(',').all(|t| t.trim().starts_with(['e', 'E']))
}

/// Splits `a | b` into the basis part and the other part.
fn basis_and_rest(text: &str) -> Result<(&str, &str)> {
    let (a, b) = text.split_once('|').ok_or_else(|| Error::Input("expected `basis | weights`".into()))?;
    let (a, b) = (a.trim(), b.trim());
    if is_basis_list(a) {
        Ok((a, b))
    } else if is_basis_list(b) {
        Ok((b, a))
    } else {
        Err(Error::Input("neither side of `|` is a basis list".into()))
    }
}

#[derive(Default)]
struct Pending {
    params: BTreeMap<String, Rational>,
    frame: Option<String>,
    torus: Option<String>,
    sequence: Option<String>,
    filtration: Option<String>,
    sigma: Option<String>,
    expect: Expectations,
}

fn parse_expect(text: &str) -> Result<Expectations> {
    let mut e = Expectations::default();
    for tok in text.split([',', ' ']).map(str::trim).filter(|s| !s.is_empty()) {
        match tok {
            "grading" => e.outcome = Some(OutcomeKind::Grading),
            "filtration" => e.outcome = Some(OutcomeKind::Filtration),
            "sigma" => e.outcome = Some(OutcomeKind::Sigma),
            "unresolved" => e.outcome = Some(OutcomeKind::Unresolved),
            "no-grading" => e.no_grading = true,
            "no-filtration" => e.no_filtration = true,
            _ => return Err(Error::Input(format!("unknown expectation `{tok}`"))),
        }
    }
    Ok(e)
}

fn build_record(
    name: String,
    line: usize,
    source: &str,
    p: Pending,
    subst: &BTreeMap<String, Rational>,
) -> Result<AlgebraRecord> {
    let mut params = subst.clone();
    params.extend(p.params);
    let raw = parse_algebra(source, &params)?;
    let n = raw.dim();
    let (algebra, frame) = match &p.frame {
        Some(text) => {
            let m = RationalMatrix::from_columns(&parse_vectors(text, n)?)?;
            if m.cols() != n {
                return Err(Error::Shape(format!("frame has {} vectors, need {n}", m.cols())));
            }
            (raw.change_basis(&m)?, Some(m))
        }
        None => (raw, None),
    };
    let torus = p.torus.as_deref().map(parse_weights).transpose()?;
    if let Some(t) = &torus {
        if t.len() != n {
            return Err(Error::Shape(format!("torus lists {} weights, need {n}", t.len())));
        }
    }
    let sequence = match &p.sequence {
        Some(text) => {
            let (basis, weights) = basis_and_rest(text)?;
            let weights = parse_weights(weights)?;
            if weights.len() != n {
                return Err(Error::Shape(format!("sequence lists {} weights, need {n}", weights.len())));
            }
            Some(ListedSequence { order: parse_basis_list(basis, n)?, weights })
        }
        None => None,
    };
    let filtration = match &p.filtration {
        Some(text) => {
            let (basis, weights) = basis_and_rest(text)?;
            let weights: Vec<BigInt> = weights
                .split(',')
                .map(|s| s.trim().parse::<BigInt>().map_err(|_| Error::Input(format!("bad weight `{s}`"))))
                .collect::<Result<_>>()?;
            if weights.len() != n {
                return Err(Error::Shape(format!("filtration lists {} weights, need {n}", weights.len())));
            }
            Some(ListedFiltration { order: parse_basis_list(basis, n)?, weights })
        }
        None => None,
    };
    let sigma = match &p.sigma {
        Some(text) => {
            let (cycles, values) = match text.split_once('|') {
                Some((a, b)) => (a, Some(b)),
                None => (text.as_str(), None),
            };
            let sigma = parse_sigma(cycles, n)?;
            let params = values
                .map(|v| {
                    v.split(',')
                        .map(|s| parse_rational(s).ok_or_else(|| Error::Input(format!("bad parameter `{s}`"))))
                        .collect::<Result<Vec<_>>>()
                })
                .transpose()?;
            Some(SigmaSpec { sigma, params })
        }
        None => None,
    };
    Ok(AlgebraRecord {
        name,
        line,
        source: source.to_string(),
        algebra,
        frame,
        torus,
        sequence,
        filtration,
        sigma,
        expect: p.expect,
    })
}

/// Parses a classification file. `subst` supplies default parameter
/// values, overridden by `!params`.
pub fn parse_records(text: &str, subst: &BTreeMap<String, Rational>) -> Result<Vec<AlgebraRecord>> {
    let mut out: Vec<AlgebraRecord> = Vec::new();
    let mut pending = Pending::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(d) = content.strip_prefix('!') {
            let (key, rest) = d.split_once(char::is_whitespace).unwrap_or((d, ""));
            let rest = rest.trim().to_string();
            let r: Result<()> = (|| {
                match key {
                    "params" => pending.params.extend(parse_params(&rest)?),
                    "frame" => pending.frame = Some(rest),
                    "torus" => pending.torus = Some(rest),
                    "sequence" => pending.sequence = Some(rest),
                    "filtration" => pending.filtration = Some(rest),
                    "sigma" => pending.sigma = Some(rest),
                    "expect" => pending.expect = parse_expect(&rest)?,
                    _ => return Err(Error::Input(format!("unknown directive `!{key}`"))),
                }
                Ok(())
            })();
            r.map_err(|e| e.at_line(line))?;
            continue;
        }
        let (name, source) = match content.split_once(':') {
            Some((a, b)) => (a.trim().to_string(), b.trim()),
            None => (format!("line{line}"), content),
        };
        if out.iter().any(|r| r.name == name) {
            return Err(Error::Input(format!("duplicate record name `{name}`")).at_line(line));
        }
        let rec = build_record(name, line, source, std::mem::take(&mut pending), subst).map_err(|e| e.at_line(line))?;
        out.push(rec);
    }
    Ok(out)
}

pub fn read_records(path: &Path, subst: &BTreeMap<String, Rational>) -> Result<Vec<AlgebraRecord>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
    parse_records(&text, subst)
}
