//! Nilpotent Lie algebras given by the differentials of a coframe.
//!
//! Indices are 0-based in the API; anything printed for humans is 1-based.
//! The algebra stores `a[k][i][j]`, the coefficient of `e^i∧e^j` in `de^k`,
//! antisymmetric in `(i, j)`. Brackets follow `dα(x,y) = -α([x,y])`, so
//! `[e_i, e_j] = -Σ_k a[k][i][j] e_k`.

mod salamon;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::exactlin::matrix::RationalMatrix;
use crate::rational::Rational;

pub use salamon::{parse_algebra, parse_vectors};

pub const MAX_DIM: usize = 16;

/// `î = n + 1 - i` in 1-based terms.
pub fn hat(n: usize, i: usize) -> usize {
    debug_assert!(i < n);
    n - 1 - i
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LieAlgebra {
    n: usize,
    a: Vec<Rational>,
    params: BTreeMap<String, Rational>,
}

/// A nonzero coefficient of `d(de^k)` on `e^i∧e^j∧e^l` with `i < j < l`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JacobiViolation {
    pub k: usize,
    pub triple: (usize, usize, usize),
    pub coefficient: Rational,
}

impl fmt::Display for JacobiViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (i, j, l) = self.triple;
        write!(f, "d(de^{}) has coefficient {} on e^{}{}{}", self.k + 1, self.coefficient, i + 1, j + 1, l + 1)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NiceViolation {
    /// `[e_i, e_j]` has two or more components.
    Bracket(usize, usize),
    /// `e_i ⌟ de^j` has two or more components.
    Contraction(usize, usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NiceReport {
    pub is_nice: bool,
    pub violations: Vec<NiceViolation>,
}

impl LieAlgebra {
    /// The abelian algebra of dimension `n`.
    pub fn abelian(n: usize) -> Result<Self> {
        if !(1..=MAX_DIM).contains(&n) {
            return Err(Error::Dimension(n));
        }
        Ok(Self { n, a: vec![Rational::zero(); n * n * n], params: BTreeMap::new() })
    }

    /// Builds an algebra from `(k, i, j, c)` meaning `de^k += c e^i∧e^j`.
    pub fn from_terms(n: usize, terms: &[(usize, usize, usize, Rational)]) -> Result<Self> {
        let mut l = Self::abelian(n)?;
        for (k, i, j, c) in terms {
            for &x in [k, i, j] {
                if x >= n {
                    return Err(Error::IndexOutOfRange { index: x + 1, dim: n });
                }
            }
            if i == j {
                return Err(Error::RepeatedIndex(i + 1));
            }
            let cur = l.coeff(*k, *i, *j).clone();
            l.set(*k, *i, *j, cur + c);
        }
        Ok(l)
    }

    pub(crate) fn with_params(mut self, params: BTreeMap<String, Rational>) -> Self {
        self.params = params;
        self
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Parameter values substituted while parsing.
    pub fn params(&self) -> &BTreeMap<String, Rational> {
        &self.params
    }

    fn idx(&self, k: usize, i: usize, j: usize) -> usize {
        (k * self.n + i) * self.n + j
    }

    /// Coefficient of `e^i∧e^j` in `de^k`; antisymmetric in `(i, j)`.
    pub fn coeff(&self, k: usize, i: usize, j: usize) -> &Rational {
        &self.a[self.idx(k, i, j)]
    }

    fn set(&mut self, k: usize, i: usize, j: usize, c: Rational) {
        let p = self.idx(k, i, j);
        let q = self.idx(k, j, i);
        self.a[q] = -c.clone();
        self.a[p] = c;
    }

    /// Nonzero terms `(i, j, a^k_ij)` of `de^k` with `i < j`.
    pub fn differential(&self, k: usize) -> Vec<(usize, usize, Rational)> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for j in i + 1..self.n {
                let c = self.coeff(k, i, j);
                if !c.is_zero() {
                    out.push((i, j, c.clone()));
                }
            }
        }
        out
    }

    /// All nonzero `(k, i, j, a^k_ij)` with `i < j`.
    pub fn terms(&self) -> Vec<(usize, usize, usize, Rational)> {
        (0..self.n).flat_map(|k| self.differential(k).into_iter().map(move |(i, j, c)| (k, i, j, c))).collect()
    }

    pub fn is_abelian(&self) -> bool {
        self.a.iter().all(Zero::is_zero)
    }

    /// Structure constant `c^k_ij` with `[e_i, e_j] = Σ_k c^k_ij e_k`.
    pub fn structure_constant(&self, i: usize, j: usize, k: usize) -> Rational {
        -self.coeff(k, i, j).clone()
    }

    /// Coordinates of `[e_i, e_j]`.
    pub fn bracket(&self, i: usize, j: usize) -> Result<Vec<Rational>> {
        for x in [i, j] {
            if x >= self.n {
                return Err(Error::IndexOutOfRange { index: x + 1, dim: self.n });
            }
        }
        Ok((0..self.n).map(|k| self.structure_constant(i, j, k)).collect())
    }

    /// Bracket of two vectors given in coordinates.
    pub fn bracket_vectors(&self, x: &[Rational], y: &[Rational]) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); self.n];
        for i in 0..self.n {
            if x[i].is_zero() {
                continue;
            }
            for j in 0..self.n {
                if y[j].is_zero() || i == j {
                    continue;
                }
                let xy = &x[i] * &y[j];
                for (k, o) in out.iter_mut().enumerate() {
                    let c = self.coeff(k, i, j);
                    if !c.is_zero() {
                        *o -= &xy * c;
                    }
                }
            }
        }
        out
    }

    /// Coordinates of `e_i ⌟ de^k` as a covector.
    pub fn contraction(&self, i: usize, k: usize) -> Vec<Rational> {
        (0..self.n).map(|j| self.coeff(k, i, j).clone()).collect()
    }

    /// `d(de^k) = Σ a^k_ij (de^i∧e^j - e^i∧de^j)`, as a map over sorted
    /// triples.
    fn d_squared(&self, k: usize) -> BTreeMap<(usize, usize, usize), Rational> {
        let mut out: BTreeMap<(usize, usize, usize), Rational> = BTreeMap::new();
        let mut add = |p: usize, q: usize, r: usize, c: Rational| {
            if let Some((t, s)) = sort3(p, q, r) {
                let e = out.entry(t).or_insert_with(Rational::zero);
                if s {
                    *e += c;
                } else {
                    *e -= c;
                }
            }
        };
        for (i, j, a) in self.differential(k) {
            // de^i ∧ e^j
            for (p, q, b) in self.differential(i) {
                add(p, q, j, &a * &b);
            }
            // - e^i ∧ de^j
            for (p, q, b) in self.differential(j) {
                add(i, p, q, -(&a * &b));
            }
        }
        out.retain(|_, c| !c.is_zero());
        out
    }

    /// Checks `d² = 0` on every `e^k`.
    pub fn jacobi_check(&self) -> std::result::Result<(), Vec<JacobiViolation>> {
        let violations: Vec<_> = (0..self.n)
            .flat_map(|k| {
                self.d_squared(k).into_iter().map(move |(triple, coefficient)| JacobiViolation {
                    k,
                    triple,
                    coefficient,
                })
            })
            .collect();
        if violations.is_empty() {
            Ok(())
        } else {
            Err(violations)
        }
    }

    /// Triples `i < j < l` whose Jacobi sum computed from brackets is nonzero.
    pub fn jacobi_bracket_failures(&self) -> Vec<(usize, usize, usize)> {
        let n = self.n;
        let e = |i: usize| -> Vec<Rational> {
            let mut v = vec![Rational::zero(); n];
            v[i] = Rational::one();
            v
        };
        let mut bad = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                for l in j + 1..n {
                    let (x, y, z) = (e(i), e(j), e(l));
                    let a = self.bracket_vectors(&self.bracket_vectors(&x, &y), &z);
                    let b = self.bracket_vectors(&self.bracket_vectors(&y, &z), &x);
                    let c = self.bracket_vectors(&self.bracket_vectors(&z, &x), &y);
                    if (0..n).any(|k| !(&a[k] + &b[k] + &c[k]).is_zero()) {
                        bad.push((i, j, l));
                    }
                }
            }
        }
        bad
    }

    pub fn is_nice_basis(&self) -> NiceReport {
        let n = self.n;
        let mut violations = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let support = (0..n).filter(|&k| !self.coeff(k, i, j).is_zero()).count();
                if support >= 2 {
                    violations.push(NiceViolation::Bracket(i, j));
                }
            }
        }
        for i in 0..n {
            for k in 0..n {
                let support = (0..n).filter(|&j| !self.coeff(k, i, j).is_zero()).count();
                if support >= 2 {
                    violations.push(NiceViolation::Contraction(i, k));
                }
            }
        }
        NiceReport { is_nice: violations.is_empty(), violations }
    }

    /// Rewrites the algebra in the frame whose `i`-th vector is column `i`
    /// of `m` (in the old basis).
    pub fn change_basis(&self, m: &RationalMatrix) -> Result<Self> {
        let n = self.n;
        if m.rows() != n || m.cols() != n {
            return Err(Error::Shape(format!("basis change must be {n}x{n}")));
        }
        let inv = m.inverse()?;
        let mut pulled: Vec<RationalMatrix> = Vec::with_capacity(n);
        for k in 0..n {
            let mut ak = RationalMatrix::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    ak[(i, j)] = self.coeff(k, i, j).clone();
                }
            }
            pulled.push(&(&m.transpose() * &ak) * m);
        }
        let mut out = Self::abelian(n)?;
        out.params = self.params.clone();
        for l in 0..n {
            for i in 0..n {
                for j in i + 1..n {
                    let mut c = Rational::zero();
                    for (k, b) in pulled.iter().enumerate() {
                        let s = &inv[(l, k)];
                        if !s.is_zero() && !b[(i, j)].is_zero() {
                            c += s * &b[(i, j)];
                        }
                    }
                    out.set(l, i, j, c);
                }
            }
        }
        Ok(out)
    }

    /// Reorders the basis: new `e_p` is old `e_{order[p]}`.
    pub fn reorder(&self, order: &[usize]) -> Result<Self> {
        check_permutation(order, self.n)?;
        let n = self.n;
        let mut out = Self::abelian(n)?;
        out.params = self.params.clone();
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let c = self.coeff(order[k], order[i], order[j]);
                    if !c.is_zero() {
                        let p = out.idx(k, i, j);
                        out.a[p] = c.clone();
                    }
                }
            }
        }
        Ok(out)
    }

    /// Dimensions of the lower central series `g ⊃ [g,g] ⊃ ...` until it
    /// stabilizes.
    pub fn lower_central_series(&self) -> Vec<usize> {
        let n = self.n;
        let mut span: Vec<Vec<Rational>> = (0..n)
            .map(|i| {
                let mut v = vec![Rational::zero(); n];
                v[i] = Rational::one();
                v
            })
            .collect();
        let mut dims = vec![n];
        loop {
            let mut next = Vec::new();
            for i in 0..n {
                let mut ei = vec![Rational::zero(); n];
                ei[i] = Rational::one();
                for v in &span {
                    let b = self.bracket_vectors(&ei, v);
                    if b.iter().any(|x| !x.is_zero()) {
                        next.push(b);
                    }
                }
            }
            let next = basis_of(&next);
            let d = next.len();
            if d == *dims.last().unwrap() {
                return dims;
            }
            dims.push(d);
            if d == 0 {
                return dims;
            }
            span = next;
        }
    }

    pub fn is_nilpotent(&self) -> bool {
        self.lower_central_series().last() == Some(&0)
    }

    /// Serializes to canonical Salamon notation.
    pub fn to_salamon(&self) -> String {
        salamon::serialize(self)
    }
}

impl fmt::Display for LieAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_salamon())
    }
}

/// Sorts a triple of distinct indices; returns the sorted triple and whether
/// the permutation was even. `None` if two indices coincide.
fn sort3(p: usize, q: usize, r: usize) -> Option<((usize, usize, usize), bool)> {
    if p == q || q == r || p == r {
        return None;
    }
    let mut v = [p, q, r];
    let mut even = true;
    for i in 0..3 {
        for j in 0..2 - i {
            if v[j] > v[j + 1] {
                v.swap(j, j + 1);
                even = !even;
            }
        }
    }
    Some(((v[0], v[1], v[2]), even))
}

/// Extracts a basis (rows of the reduced echelon form) from a spanning list.
pub(crate) fn basis_of(vectors: &[Vec<Rational>]) -> Vec<Vec<Rational>> {
    if vectors.is_empty() {
        return Vec::new();
    }
    let m = RationalMatrix::from_rows(vectors.to_vec()).expect("equal lengths");
    let (red, pivots) = m.rref();
    (0..pivots.len()).map(|r| red.row(r).to_vec()).collect()
}

pub(crate) fn check_permutation(order: &[usize], n: usize) -> Result<()> {
    if order.len() != n {
        return Err(Error::Shape(format!("permutation of length {} for n = {n}", order.len())));
    }
    let seen: BTreeSet<usize> = order.iter().copied().collect();
    if seen.len() != n {
        let dup = order.iter().enumerate().find(|(p, x)| order[..*p].contains(x)).map_or(0, |(_, x)| *x);
        return Err(Error::NotPermutation(dup + 1));
    }
    if let Some(&bad) = order.iter().find(|&&x| x >= n) {
        return Err(Error::NotPermutation(bad + 1));
    }
    Ok(())
}
