use num_traits::Zero;

use crate::algebra::LieAlgebra;
use crate::error::{Error, Result};
use crate::exactlin::matrix::{kernel_basis, rank_of, RationalMatrix};
use crate::rational::Rational;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DerivationSpace {
    pub basis: Vec<RationalMatrix>,
}

impl DerivationSpace {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// True if `d` lies in the span of the basis.
    pub fn contains(&self, d: &RationalMatrix) -> bool {
        let flat = |m: &RationalMatrix| -> Vec<Rational> { m.to_rows().concat() };
        let mut rows: Vec<Vec<Rational>> = self.basis.iter().map(flat).collect();
        let r = rank_of(&rows);
        rows.push(flat(d));
        rank_of(&rows) == r
    }
}

/// `D[x,y] = [Dx,y] + [x,Dy]` on all basis pairs. Column `c` of `d` is
/// `D e_c`.
pub fn is_derivation(l: &LieAlgebra, d: &RationalMatrix) -> bool {
    let n = l.dim();
    let col = |c: usize| d.column(c);
    for i in 0..n {
        for j in i + 1..n {
            let lhs = d.mul_vec(&l.bracket(i, j).expect("in range"));
            let mut ei = vec![Rational::zero(); n];
            let mut ej = vec![Rational::zero(); n];
            ei[i] = num_traits::One::one();
            ej[j] = num_traits::One::one();
            let a = l.bracket_vectors(&col(i), &ej);
            let b = l.bracket_vectors(&ei, &col(j));
            if (0..n).any(|m| lhs[m] != &a[m] + &b[m]) {
                return false;
            }
        }
    }
    true
}

/// Kernel of the Leibniz system in the `n²` entries of `D`.
pub fn derivation_space(l: &LieAlgebra) -> DerivationSpace {
    let n = l.dim();
    let var = |r: usize, c: usize| r * n + c;
    let mut rows = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            for m in 0..n {
                let mut row = vec![Rational::zero(); n * n];
                for k in 0..n {
                    row[var(m, k)] += l.structure_constant(i, j, k);
                }
                for r in 0..n {
                    row[var(r, i)] -= l.structure_constant(r, j, m);
                    row[var(r, j)] -= l.structure_constant(i, r, m);
                }
                if row.iter().any(|x| !x.is_zero()) {
                    rows.push(row);
                }
            }
        }
    }
    let basis = if rows.is_empty() {
        (0..n * n)
            .map(|p| {
                let mut d = RationalMatrix::zeros(n, n);
                d[(p / n, p % n)] = num_traits::One::one();
                d
            })
            .collect()
    } else {
        let m = RationalMatrix::from_rows(rows).expect("rectangular");
        kernel_basis(&m)
            .into_iter()
            .map(|v| RationalMatrix::from_rows(v.chunks(n).map(<[Rational]>::to_vec).collect()).expect("square"))
            .collect()
    };
    DerivationSpace { basis }
}

/// Weights of the torus of diagonal derivations: row `i` is the functional
/// `λ ↦ weight of e_i`, in coordinates `λ_1..λ_k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiagonalTorus {
    weight_rows: Vec<Vec<Rational>>,
    rank: usize,
}

impl DiagonalTorus {
    /// Validates user-supplied weight rows against the algebra.
    pub fn from_weight_rows(l: &LieAlgebra, rows: Vec<Vec<Rational>>) -> Result<Self> {
        let n = l.dim();
        if rows.len() != n {
            return Err(Error::Shape(format!("{} weight rows for dimension {n}", rows.len())));
        }
        let width = rows[0].len();
        if rows.iter().any(|r| r.len() != width) {
            return Err(Error::Shape("weight rows of different lengths".into()));
        }
        // coordinates that never occur (e.g. `l1` when only `l8, l9` are used)
        let used: Vec<usize> = (0..width).filter(|&c| rows.iter().any(|r| !r[c].is_zero())).collect();
        let rows: Vec<Vec<Rational>> = rows.into_iter().map(|r| used.iter().map(|&c| r[c].clone()).collect()).collect();
        let rank = used.len();
        let t = Self { weight_rows: rows, rank };
        t.check(l)?;
        Ok(t)
    }

    pub(crate) fn check(&self, l: &LieAlgebra) -> Result<()> {
        for (k, i, j, _) in l.terms() {
            let w = &self.weight_rows;
            let ok = (0..self.rank).all(|c| &w[i][c] + &w[j][c] == w[k][c]);
            if !ok {
                return Err(Error::InconsistentWeights(format!("w{} + w{} != w{}", i + 1, j + 1, k + 1)));
            }
        }
        let gens = self.generators();
        if rank_of(&gens) != gens.len() {
            return Err(Error::InconsistentWeights("generating derivations are linearly dependent".into()));
        }
        Ok(())
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn weight_rows(&self) -> &[Vec<Rational>] {
        &self.weight_rows
    }

    pub fn weight(&self, i: usize) -> &[Rational] {
        &self.weight_rows[i]
    }

    /// Diagonals of the `k` generating derivations.
    pub fn generators(&self) -> Vec<Vec<Rational>> {
        (0..self.rank).map(|c| self.weight_rows.iter().map(|r| r[c].clone()).collect()).collect()
    }

    pub fn generator_matrices(&self) -> Vec<RationalMatrix> {
        self.generators()
            .into_iter()
            .map(|diag| {
                let mut m = RationalMatrix::zeros(diag.len(), diag.len());
                for (i, x) in diag.into_iter().enumerate() {
                    m[(i, i)] = x;
                }
                m
            })
            .collect()
    }
}

/// Solves `w_i + w_j = w_k` for every nonzero `a^k_ij`.
///
/// The solution space is row reduced with pivots taken from the highest
/// indices, so the free parameters are the lowest-index weights and the
/// `c`-th generator has weight 1 on the `c`-th free index.
pub fn diagonal_derivations(l: &LieAlgebra) -> DiagonalTorus {
    let n = l.dim();
    let rev = |i: usize| n - 1 - i;
    let mut rows = Vec::new();
    for (k, i, j, _) in l.terms() {
        let mut row = vec![Rational::zero(); n];
        row[rev(i)] += Rational::from_integer(1.into());
        row[rev(j)] += Rational::from_integer(1.into());
        row[rev(k)] -= Rational::from_integer(1.into());
        rows.push(row);
    }
    let m = if rows.is_empty() {
        RationalMatrix::zeros(1, n)
    } else {
        RationalMatrix::from_rows(rows).expect("rectangular")
    };
    let mut gens: Vec<Vec<Rational>> = kernel_basis(&m)
        .into_iter()
        .map(|mut v| {
            v.reverse();
            v
        })
        .collect();
    gens.reverse();
    let rank = gens.len();
    let weight_rows = (0..n).map(|i| gens.iter().map(|g| g[i].clone()).collect()).collect();
    DiagonalTorus { weight_rows, rank }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::parse_algebra;
    use crate::rational::int;
    use std::collections::BTreeMap;

    fn p(s: &str) -> LieAlgebra {
        parse_algebra(s, &BTreeMap::new()).unwrap()
    }

    #[test]
    fn derivation_dimensions() {
        assert_eq!(derivation_space(&p("0,0,e^{12},e^{13},e^{23},e^{25}+e^{14}")).dim(), 10);
        assert_eq!(derivation_space(&p("0,0,e^{12}")).dim(), 6);
        assert_eq!(derivation_space(&p("0,0,0,0")).dim(), 16);
    }

    #[test]
    fn basis_elements_are_derivations() {
        let l = p("0,0,e^{12},e^{13},e^{23},e^{25}+e^{14}");
        for d in derivation_space(&l).basis {
            assert!(is_derivation(&l, &d));
        }
    }

    #[test]
    fn heisenberg_torus() {
        let t = diagonal_derivations(&p("0,0,e^{12}"));
        assert_eq!(t.rank(), 2);
        assert_eq!(t.weight_rows(), &[vec![int(1), int(0)], vec![int(0), int(1)], vec![int(1), int(1)]]);
    }

    #[test]
    fn non_nice_torus_is_rank_one() {
        let t = diagonal_derivations(&p("0,0,0,e^{12},e^{14},e^{15}+e^{23}+e^{24}"));
        assert_eq!(t.rank(), 1);
        let w: Vec<Rational> = t.weight_rows().iter().map(|r| r[0].clone()).collect();
        assert_eq!(w, [1, 2, 3, 3, 4, 5].map(int).to_vec());
    }

    #[test]
    fn abelian_torus_is_full() {
        let t = diagonal_derivations(&p("0,0,0"));
        assert_eq!(t.rank(), 3);
        assert_eq!(rank_of(&t.generators()), 3);
    }

    #[test]
    fn supplied_rows_are_validated() {
        let l = p("0,0,e^{12}");
        assert!(DiagonalTorus::from_weight_rows(&l, vec![vec![int(1)], vec![int(1)], vec![int(2)]]).is_ok());
        assert!(matches!(
            DiagonalTorus::from_weight_rows(&l, vec![vec![int(1)], vec![int(1)], vec![int(3)]]),
            Err(Error::InconsistentWeights(_))
        ));
    }
}
