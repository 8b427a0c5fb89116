//! Antidiagonal and σ-diagonal metrics, and their Ricci tensors.

mod isotropic;
mod ricci;

use std::fmt;

use num_traits::{One, Signed, Zero};

pub use isotropic::{
    adapt_basis_isotropic, antidiagonal, check_multiplicities, isotropic_basis, isotropic_split_bases,
    isotropic_split_metric, split_trace_square, SplitBases, TwoForm,
};
pub use ricci::{
    ad_is_isotropic, ad_matrix, differentials_isotropic, random_nonzero, random_sigma_params, ricci_formula,
    ricci_koszul, verify_ricci_flat, RicciMethod, RicciReport, Verdict, VerifyMode,
};

use crate::algebra::LieAlgebra;
use crate::error::{Error, Result};
use crate::exactlin::RationalMatrix;
use crate::filtration::{check_f_assignment, FCheck, FiltrationWitness};
use crate::grading::{check_g_sequence, GCheck, Grading, Weight, WeightSequence};
use crate::rational::Rational;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Provenance {
    /// `Σ e^i⊗e^î` in the frame whose columns are given in the original
    /// basis; `order` is the reordering the frame started from.
    Antidiagonal {
        order: Vec<usize>,
        frame: RationalMatrix,
    },
    SigmaDiagonal {
        sigma: Vec<usize>,
        params: Vec<Rational>,
    },
    Explicit,
}

/// A symmetric nondegenerate bilinear form, `g[(i, j)] = g(e_i, e_j)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MetricSpec {
    pub g: RationalMatrix,
    pub provenance: Provenance,
}

impl MetricSpec {
    pub fn explicit(g: RationalMatrix) -> Result<Self> {
        Self::checked(g, Provenance::Explicit)
    }

    fn checked(g: RationalMatrix, provenance: Provenance) -> Result<Self> {
        if !g.is_square() {
            return Err(Error::Shape("metric must be square".into()));
        }
        if !g.is_symmetric() {
            return Err(Error::MetricParameters("metric is not symmetric".into()));
        }
        if g.determinant()?.is_zero() {
            return Err(Error::DegenerateMetric);
        }
        Ok(Self { g, provenance })
    }

    /// The metric `Σ E^p⊗E^p̂` where `E_p` is column `p` of `frame`.
    pub fn antidiagonal_in_frame(order: Vec<usize>, frame: RationalMatrix) -> Result<Self> {
        let inv = frame.inverse()?;
        let n = frame.rows();
        let g = &(&inv.transpose() * &antidiagonal(n)) * &inv;
        Self::checked(g, Provenance::Antidiagonal { order, frame })
    }

    pub fn dim(&self) -> usize {
        self.g.rows()
    }

    /// `(p, q)`: numbers of positive and negative directions.
    pub fn signature(&self) -> (usize, usize) {
        signature(&self.g)
    }

    /// `p − q`.
    pub fn index(&self) -> i64 {
        let (p, q) = self.signature();
        p as i64 - q as i64
    }

    /// The Gram matrix in the adapted frame, for antidiagonal provenance.
    pub fn adapted_gram(&self) -> Option<RationalMatrix> {
        match &self.provenance {
            Provenance::Antidiagonal { frame, .. } => Some(&(&frame.transpose() * &self.g) * frame),
            _ => None,
        }
    }

    /// Rows of rational strings.
    pub fn to_string_rows(&self) -> Vec<Vec<String>> {
        self.g.to_rows().into_iter().map(|r| r.into_iter().map(|x| x.to_string()).collect()).collect()
    }
}

fn covector(n: usize, i: usize) -> String {
    if n <= 9 {
        format!("e^{}", i + 1)
    } else {
        format!("e^{{{}}}", i + 1)
    }
}

/// `e^1⊙e^5+e^2⊙e^6+e^3⊗e^3`, with `e^i⊙e^j = e^i⊗e^j + e^j⊗e^i`.
impl fmt::Display for MetricSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.dim();
        let mut first = true;
        for i in 0..n {
            for j in i..n {
                let c = &self.g[(i, j)];
                if c.is_zero() {
                    continue;
                }
                if c.is_negative() {
                    f.write_str("-")?;
                } else if !first {
                    f.write_str("+")?;
                }
                first = false;
                let a = c.abs();
                if !a.is_one() {
                    write!(f, "{a}")?;
                }
                let op = if i == j { '⊗' } else { '⊙' };
                write!(f, "{}{op}{}", covector(n, i), covector(n, j))?;
            }
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

/// Sylvester inertia by symmetric elimination.
pub fn signature(g: &RationalMatrix) -> (usize, usize) {
    let n = g.rows();
    let mut a = g.clone();
    let mut alive: Vec<usize> = (0..n).collect();
    let (mut p, mut q) = (0, 0);
    while !alive.is_empty() {
        let pivot = alive.iter().copied().find(|&i| !a[(i, i)].is_zero());
        let k = match pivot {
            Some(k) => k,
            None => {
                let pair = alive
                    .iter()
                    .flat_map(|&i| alive.iter().map(move |&j| (i, j)))
                    .find(|&(i, j)| i != j && !a[(i, j)].is_zero());
                let Some((i, j)) = pair else { break };
                // e_i ← e_i + e_j gives a nonzero diagonal 2 a_ij.
                for c in 0..n {
                    let v = a[(j, c)].clone();
                    a[(i, c)] += v;
                }
                for r in 0..n {
                    let v = a[(r, j)].clone();
                    a[(r, i)] += v;
                }
                i
            }
        };
        let d = a[(k, k)].clone();
        if d.is_positive() {
            p += 1;
        } else {
            q += 1;
        }
        alive.retain(|&x| x != k);
        for &r in &alive {
            let f = &a[(r, k)] / &d;
            if f.is_zero() {
                continue;
            }
            for c in 0..n {
                let v = &f * &a[(k, c)];
                a[(r, c)] -= v;
            }
        }
        for &c in &alive {
            a[(k, c)] = Rational::zero();
            a[(c, k)] = Rational::zero();
        }
    }
    (p, q)
}

/// Parses `"18 35"` or `"(18)(35)"`: each group is a cycle of 1-based
/// indices, written as digits for `n ≤ 9` or joined by `-` (e.g. `1-10`).
/// Returns 0-based images.
pub fn parse_sigma(text: &str, n: usize) -> Result<Vec<usize>> {
    let mut sigma: Vec<usize> = (0..n).collect();
    let mut seen = vec![false; n];
    for tok in text.split(|c: char| c.is_whitespace() || c == '(' || c == ')' || c == ',').filter(|t| !t.is_empty()) {
        let idx: Vec<usize> = if tok.contains('-') {
            tok.split('-')
                .map(|s| s.parse::<usize>().map_err(|_| Error::Input(format!("bad cycle `{tok}`"))))
                .collect::<Result<_>>()?
        } else {
            tok.chars()
                .map(|c| c.to_digit(10).map(|d| d as usize).ok_or_else(|| Error::Input(format!("bad cycle `{tok}`"))))
                .collect::<Result<_>>()?
        };
        for &i in &idx {
            if i == 0 || i > n {
                return Err(Error::IndexOutOfRange { index: i, dim: n });
            }
            if std::mem::replace(&mut seen[i - 1], true) {
                return Err(Error::NotPermutation(n));
            }
        }
        for (a, &i) in idx.iter().enumerate() {
            sigma[i - 1] = idx[(a + 1) % idx.len()] - 1;
        }
    }
    Ok(sigma)
}

/// `σ` as cycles, e.g. `18 35`.
pub fn sigma_string(sigma: &[usize]) -> String {
    let n = sigma.len();
    sigma
        .iter()
        .enumerate()
        .filter(|&(i, &s)| i < s)
        .map(|(i, &s)| if n <= 9 { format!("{}{}", i + 1, s + 1) } else { format!("{}-{}", i + 1, s + 1) })
        .collect::<Vec<_>>()
        .join(" ")
}

/// `Σ g_i e^i⊗e^{σ(i)}`.
pub fn sigma_diagonal_metric(sigma: &[usize], params: &[Rational]) -> Result<MetricSpec> {
    let n = sigma.len();
    let mut seen = vec![false; n];
    for &s in sigma {
        if s >= n || std::mem::replace(&mut seen[s], true) {
            return Err(Error::NotPermutation(n));
        }
    }
    if (0..n).any(|i| sigma[sigma[i]] != i) {
        return Err(Error::NotInvolution);
    }
    if params.len() != n {
        return Err(Error::MetricParameters(format!("expected {n} parameters, got {}", params.len())));
    }
    for i in 0..n {
        if params[i].is_zero() {
            return Err(Error::MetricParameters(format!("g{} is zero", i + 1)));
        }
        if params[i] != params[sigma[i]] {
            return Err(Error::MetricParameters(format!("g{} ≠ g{} although σ swaps them", i + 1, sigma[i] + 1)));
        }
    }
    let mut g = RationalMatrix::zeros(n, n);
    for i in 0..n {
        g[(i, sigma[i])] = params[i].clone();
    }
    MetricSpec::checked(g, Provenance::SigmaDiagonal { sigma: sigma.to_vec(), params: params.to_vec() })
}

/// Component of `de^n` (in the reordered algebra) in
/// `Σ_{α+β=w_n} V_α∧V_β`.
fn top_layer_form(r: &LieAlgebra, w: &[Weight]) -> TwoForm {
    let n = r.dim();
    let top = &w[n - 1];
    let terms: Vec<(usize, usize, Rational)> =
        r.differential(n - 1).into_iter().filter(|(i, j, _)| &(&w[*i] + &w[*j]) == top).collect();
    TwoForm::from_terms(n, &terms)
}

/// Antidiagonal metric in the reordering `order` with weights per
/// position, after adapting each layer so that the top differential is
/// isotropic.
pub fn antidiagonal_metric(l: &LieAlgebra, order: &[usize], w: &[Weight]) -> Result<MetricSpec> {
    let n = l.dim();
    let r = l.reorder(order)?;
    let f = top_layer_form(&r, w);
    let c = adapt_basis_isotropic(w, &f)?;
    let mut perm = RationalMatrix::zeros(n, n);
    for (p, &i) in order.iter().enumerate() {
        perm[(i, p)] = Rational::one();
    }
    MetricSpec::antidiagonal_in_frame(order.to_vec(), &perm * &c)
}

pub fn build_grading_metric(l: &LieAlgebra, g: &Grading, s: &WeightSequence) -> Result<MetricSpec> {
    if let GCheck::Fail { condition, .. } = check_g_sequence(g, s) {
        return Err(Error::Inapplicable(format!("weight sequence fails {condition}")));
    }
    antidiagonal_metric(l, s.order(), s.weights())
}

/// Uses the component of `de^n` in `Σ_{α+β=w_n} V_α∧V_β` for the layers of
/// equal weight. Only its part on pairs with `w_j = w_î` pairs nontrivially,
/// and unlike that part it does not depend on the basis chosen inside each
/// layer.
pub fn build_filtration_metric(l: &LieAlgebra, w: &FiltrationWitness) -> Result<MetricSpec> {
    let weights = w.rational_weights();
    if let FCheck::Fail { condition, .. } = check_f_assignment(l, &w.order, &weights) {
        return Err(Error::Inapplicable(format!("filtration fails {condition}")));
    }
    let ws: Vec<Weight> = weights.into_iter().map(Weight::scalar).collect();
    antidiagonal_metric(l, &w.order.0, &ws)
}
