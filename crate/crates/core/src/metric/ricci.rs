//! Exact Ricci tensors of left-invariant metrics.

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::isotropic::TwoForm;
use super::{sigma_diagonal_metric, MetricSpec, Provenance};
use crate::algebra::LieAlgebra;
use crate::error::{Error, Result};
use crate::exactlin::RationalMatrix;
use crate::rational::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RicciMethod {
    Formula,
    Koszul,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RicciReport {
    pub ric: RationalMatrix,
    pub is_flat: bool,
    pub method: RicciMethod,
}

impl RicciReport {
    fn new(ric: RationalMatrix, method: RicciMethod) -> Self {
        Self { is_flat: ric.is_zero(), ric, method }
    }
}

/// Matrix of `ad e_a`: column `j` is `[e_a, e_j]`.
pub fn ad_matrix(l: &LieAlgebra, a: usize) -> RationalMatrix {
    let n = l.dim();
    let mut m = RationalMatrix::zeros(n, n);
    for j in 0..n {
        let b = l.bracket(a, j).expect("index in range");
        for (k, c) in b.into_iter().enumerate() {
            m[(k, j)] = c;
        }
    }
    m
}

fn inverse_gram(l: &LieAlgebra, g: &MetricSpec) -> Result<RationalMatrix> {
    if g.g.rows() != l.dim() {
        return Err(Error::Shape(format!("metric is {0}x{0}, algebra has dimension {1}", g.g.rows(), l.dim())));
    }
    g.g.inverse().map_err(|_| Error::DegenerateMetric)
}

/// `g(ad x, ad y)` with `g(α⊗x, β⊗y) = g*(α,β) g(x,y)`.
pub fn ad_pairing(a: &RationalMatrix, b: &RationalMatrix, g: &RationalMatrix, g_inv: &RationalMatrix) -> Rational {
    let m = &(&(&a.transpose() * g) * b) * g_inv;
    (0..m.rows()).map(|i| m[(i, i)].clone()).sum()
}

/// `ric(v,w) = ½ g(dv♭, dw♭) − ½ g(ad v, ad w)`, valid on nilpotent Lie
/// algebras.
pub fn ricci_formula(l: &LieAlgebra, g: &MetricSpec) -> Result<RicciReport> {
    if !l.is_nilpotent() {
        return Err(Error::NotNilpotent);
    }
    let g_inv = inverse_gram(l, g)?;
    let n = l.dim();
    let forms: Vec<TwoForm> = (0..n).map(|k| TwoForm::differential(l, k)).collect();
    let mut d = RationalMatrix::zeros(n, n);
    for k in 0..n {
        for m in k..n {
            let v = forms[k].pairing(&forms[m], &g_inv);
            d[(m, k)] = v.clone();
            d[(k, m)] = v;
        }
    }
    let ads: Vec<RationalMatrix> = (0..n).map(|a| ad_matrix(l, a)).collect();
    let gdg = &(&g.g * &d) * &g.g;
    let half = Rational::new(1.into(), 2.into());
    let mut ric = RationalMatrix::zeros(n, n);
    for a in 0..n {
        for b in a..n {
            let v = (&gdg[(a, b)] - ad_pairing(&ads[a], &ads[b], &g.g, &g_inv)) * &half;
            ric[(b, a)] = v.clone();
            ric[(a, b)] = v;
        }
    }
    Ok(RicciReport::new(ric, RicciMethod::Formula))
}

/// Levi-Civita connection from the Koszul formula, then
/// `ric(x, y) = tr(z ↦ R(z, x) y)`.
pub fn ricci_koszul(l: &LieAlgebra, g: &MetricSpec) -> Result<RicciReport> {
    let g_inv = inverse_gram(l, g)?;
    let n = l.dim();
    let gm = &g.g;
    let br: Vec<Vec<Vec<Rational>>> =
        (0..n).map(|i| (0..n).map(|j| l.bracket(i, j).expect("in range")).collect()).collect();
    let pair = |x: &[Rational], k: usize| -> Rational { x.iter().enumerate().map(|(a, xa)| xa * &gm[(a, k)]).sum() };
    // nabla[i] is the matrix of ∇_{e_i}: column j is ∇_{e_i} e_j.
    let half = Rational::new(1.into(), 2.into());
    let mut nabla = vec![RationalMatrix::zeros(n, n); n];
    for i in 0..n {
        for j in 0..n {
            let low: Vec<Rational> =
                (0..n).map(|k| (pair(&br[i][j], k) - pair(&br[j][k], i) + pair(&br[k][i], j)) * &half).collect();
            let v = g_inv.mul_vec(&low);
            for (k, c) in v.into_iter().enumerate() {
                nabla[i][(k, j)] = c;
            }
        }
    }
    // Ric(e_b, e_d) = Σ_a R(e_a, e_b)_{a,d}, so only row a of each curvature matrix is needed.
    let mut ric = RationalMatrix::zeros(n, n);
    for a in 0..n {
        for b in 0..n {
            for d in 0..n {
                let mut r = Rational::zero();
                for x in 0..n {
                    let (p, q) = (&nabla[a][(a, x)], &nabla[b][(x, d)]);
                    if !p.is_zero() && !q.is_zero() {
                        r += p * q;
                    }
                    let (p, q) = (&nabla[b][(a, x)], &nabla[a][(x, d)]);
                    if !p.is_zero() && !q.is_zero() {
                        r -= p * q;
                    }
                }
                for (c, coef) in br[a][b].iter().enumerate() {
                    if !coef.is_zero() {
                        r -= coef * &nabla[c][(a, d)];
                    }
                }
                ric[(b, d)] += r;
            }
        }
    }
    Ok(RicciReport::new(ric, RicciMethod::Koszul))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VerifyMode {
    Exact,
    /// Evaluate a σ-diagonal family at random parameters.
    Generic {
        samples: usize,
        seed: u64,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub flat: bool,
    pub formula_zero: bool,
    pub koszul_zero: bool,
    /// Number of parameter samples; 1 in exact mode.
    pub samples: usize,
    pub probabilistic: bool,
    /// Parameters of the first non-flat sample.
    pub counterexample: Option<Vec<Rational>>,
}

impl Verdict {
    pub fn describe(&self) -> &'static str {
        match (self.flat, self.probabilistic) {
            (true, false) => "Ricci-flat",
            (true, true) => "generically flat (probabilistic)",
            (false, _) => "not Ricci-flat",
        }
    }
}

fn both(l: &LieAlgebra, g: &MetricSpec) -> Result<(bool, bool)> {
    let f = ricci_formula(l, g)?;
    let k = ricci_koszul(l, g)?;
    let n = l.dim();
    for row in 0..n {
        for col in 0..n {
            if f.ric[(row, col)] != k.ric[(row, col)] {
                return Err(Error::MethodDisagreement {
                    row: row + 1,
                    col: col + 1,
                    formula: Box::new(f.ric[(row, col)].clone()),
                    koszul: Box::new(k.ric[(row, col)].clone()),
                });
            }
        }
    }
    Ok((f.is_flat, k.is_flat))
}

/// Nonzero rational with numerator and denominator in `1..=1000` and a
/// random sign.
pub fn random_nonzero(rng: &mut impl Rng) -> Rational {
    let num: i64 = rng.gen_range(1..=1000);
    let den: i64 = rng.gen_range(1..=1000);
    let sign = if rng.gen_bool(0.5) { 1 } else { -1 };
    Rational::new((sign * num).into(), den.into())
}

/// σ-invariant random parameters: one draw per orbit.
pub fn random_sigma_params(sigma: &[usize], rng: &mut impl Rng) -> Vec<Rational> {
    let mut p = vec![Rational::zero(); sigma.len()];
    for i in 0..sigma.len() {
        if sigma[i] >= i {
            let v = random_nonzero(rng);
            p[sigma[i]] = v.clone();
            p[i] = v;
        }
    }
    p
}

pub fn verify_ricci_flat(l: &LieAlgebra, g: &MetricSpec, mode: VerifyMode) -> Result<Verdict> {
    match mode {
        VerifyMode::Exact => {
            let (formula_zero, koszul_zero) = both(l, g)?;
            Ok(Verdict {
                flat: formula_zero && koszul_zero,
                formula_zero,
                koszul_zero,
                samples: 1,
                probabilistic: false,
                counterexample: None,
            })
        }
        VerifyMode::Generic { samples, seed } => {
            let Provenance::SigmaDiagonal { sigma, .. } = &g.provenance else {
                return Err(Error::MetricParameters("generic verification needs a σ-diagonal family".into()));
            };
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut verdict = Verdict {
                flat: true,
                formula_zero: true,
                koszul_zero: true,
                samples,
                probabilistic: true,
                counterexample: None,
            };
            for _ in 0..samples {
                let params = random_sigma_params(sigma, &mut rng);
                let m = sigma_diagonal_metric(sigma, &params)?;
                let (f, k) = both(l, &m)?;
                if !(f && k) {
                    verdict.flat = false;
                    verdict.formula_zero &= f;
                    verdict.koszul_zero &= k;
                    verdict.counterexample = Some(params);
                    break;
                }
            }
            Ok(verdict)
        }
    }
}

/// `g(ad e_i, ad e_j) = 0` for all `i, j`.
pub fn ad_is_isotropic(l: &LieAlgebra, g: &MetricSpec) -> Result<bool> {
    let g_inv = inverse_gram(l, g)?;
    let n = l.dim();
    let ads: Vec<RationalMatrix> = (0..n).map(|a| ad_matrix(l, a)).collect();
    Ok((0..n).all(|a| (a..n).all(|b| ad_pairing(&ads[a], &ads[b], &g.g, &g_inv).is_zero())))
}

/// `g(de^i, de^j) = 0` for all `i, j`.
pub fn differentials_isotropic(l: &LieAlgebra, g: &MetricSpec) -> Result<bool> {
    let g_inv = inverse_gram(l, g)?;
    let n = l.dim();
    let forms: Vec<TwoForm> = (0..n).map(|k| TwoForm::differential(l, k)).collect();
    Ok((0..n).all(|a| (a..n).all(|b| forms[a].pairing(&forms[b], &g_inv).is_zero())))
}
