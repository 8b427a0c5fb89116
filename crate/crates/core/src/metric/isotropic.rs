//! Basis adaptations that make a two-form isotropic for an antidiagonal
//! metric.

use num_traits::{One, Zero};

use crate::algebra::{hat, LieAlgebra};
use crate::error::{Error, Result};
use crate::exactlin::{kernel_basis, RationalMatrix};
use crate::grading::Weight;
use crate::rational::{int, Rational};

/// A two-form stored as an antisymmetric matrix, `F(e_i, e_j) = m[(i, j)]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TwoForm {
    m: RationalMatrix,
}

impl TwoForm {
    pub fn zero(n: usize) -> Self {
        Self { m: RationalMatrix::zeros(n, n) }
    }

    /// `de^k`, with `(e^i∧e^j)(e_i, e_j) = 1`.
    pub fn differential(l: &LieAlgebra, k: usize) -> Self {
        let mut f = Self::zero(l.dim());
        for (i, j, c) in l.differential(k) {
            f.set(i, j, c);
        }
        f
    }

    /// From `(i, j, c)` with `i < j`.
    pub fn from_terms(n: usize, terms: &[(usize, usize, Rational)]) -> Self {
        let mut f = Self::zero(n);
        for (i, j, c) in terms {
            f.set(*i, *j, c.clone());
        }
        f
    }

    pub fn dim(&self) -> usize {
        self.m.rows()
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.m[(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, c: Rational) {
        self.m[(j, i)] = -c.clone();
        self.m[(i, j)] = c;
    }

    pub fn matrix(&self) -> &RationalMatrix {
        &self.m
    }

    pub fn is_zero(&self) -> bool {
        self.m.is_zero()
    }

    /// `F(Cx, Cy)`: the form in the frame whose vectors are the columns of
    /// `c`.
    pub fn pullback(&self, c: &RationalMatrix) -> Self {
        Self { m: &(&c.transpose() * &self.m) * c }
    }

    /// Restriction to the span of the given basis vectors.
    pub fn restrict(&self, idx: &[usize]) -> Self {
        let mut f = Self::zero(idx.len());
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                f.m[(a, b)] = self.m[(i, j)].clone();
            }
        }
        f
    }

    /// `F(u, v)` for coordinate vectors.
    pub fn eval(&self, u: &[Rational], v: &[Rational]) -> Rational {
        let mv = self.m.mul_vec(v);
        u.iter().zip(&mv).map(|(a, b)| a * b).sum()
    }

    /// `g(F, G)` on two-forms, where `g_inv` is the inverse Gram matrix:
    /// `g(α∧β, γ∧δ) = g*(α,γ)g*(β,δ) − g*(α,δ)g*(β,γ)`.
    pub fn pairing(&self, other: &TwoForm, g_inv: &RationalMatrix) -> Rational {
        let a = &(&self.m * g_inv) * &other.m.transpose();
        let b = &a * g_inv;
        let tr: Rational = (0..b.rows()).map(|i| b[(i, i)].clone()).sum();
        tr / int(2)
    }

    pub fn terms(&self) -> Vec<(usize, usize, Rational)> {
        let n = self.dim();
        let mut out = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if !self.m[(i, j)].is_zero() {
                    out.push((i, j, self.m[(i, j)].clone()));
                }
            }
        }
        out
    }
}

/// Inverse Gram matrix of `Σ e^i⊗e^î` is itself.
pub fn antidiagonal(n: usize) -> RationalMatrix {
    let mut g = RationalMatrix::zeros(n, n);
    for i in 0..n {
        g[(i, hat(n, i))] = Rational::one();
    }
    g
}

/// New bases of `U` and `W` (columns, in old coordinates) from
/// [`isotropic_split_metric`]. Declaring `u_a` and `w_a` dual and both
/// subspaces isotropic makes `F` isotropic.
#[derive(Clone, Debug)]
pub struct SplitBases {
    pub u: RationalMatrix,
    pub w: RationalMatrix,
    pub rank: usize,
}

/// Invertible `p`, `q` with `pᵀ m q = diag(1,…,1,0,…,0)`.
fn rank_normal_form(m: &RationalMatrix) -> (RationalMatrix, RationalMatrix, usize) {
    let h = m.rows();
    let aug: Vec<Vec<Rational>> = (0..h)
        .map(|i| {
            let mut row = m.row(i).to_vec();
            row.extend(unit(h, i));
            row
        })
        .collect();
    let (e, pivots) = RationalMatrix::from_rows(aug).expect("rectangular").rref();
    let pivots: Vec<usize> = pivots.into_iter().filter(|&c| c < h).collect();
    let r = pivots.len();
    let mut p = RationalMatrix::zeros(h, h);
    for i in 0..h {
        for j in 0..h {
            p[(j, i)] = e[(i, h + j)].clone();
        }
    }
    let mut cols: Vec<Vec<Rational>> = pivots.iter().map(|&c| unit(h, c)).collect();
    for c in (0..h).filter(|c| !pivots.contains(c)) {
        let mut v = unit(h, c);
        for (t, &pc) in pivots.iter().enumerate() {
            v[pc] -= &e[(t, c)];
        }
        cols.push(v);
    }
    let q = RationalMatrix::from_columns(&cols).expect("square");
    (p, q, r)
}

/// Second part of the lemma: `V = U ⊕ W` with `dim U = dim W = h`, `F`
/// given by `f[(a, b)] = F(u_a, w_b)`. Produces bases in which
/// `f⁻¹∘f_F` is cyclic (rank ≥ 3), `e^1⊗(e_1+e_2)+e^2⊗(−e_1+e_2)`
/// (rank 2) or `e^1⊗e_2` (rank 1), each with traceless square.
pub fn isotropic_split_bases(f: &RationalMatrix) -> Result<SplitBases> {
    let h = f.rows();
    if h == 0 || !f.is_square() {
        return Err(Error::Shape("split form must be square and nonempty".into()));
    }
    let (p, q0, r) = rank_normal_form(f);
    if r == 1 && h == 1 {
        return Err(Error::Inapplicable("rank one on a one-dimensional U".into()));
    }
    // pᵀ f (q0 π) = diag(I_r, 0) π.
    let mut pi = RationalMatrix::identity(h);
    match r {
        0 => {}
        1 => {
            pi[(0, 0)] = Rational::zero();
            pi[(1, 1)] = Rational::zero();
            pi[(0, 1)] = Rational::one();
            pi[(1, 0)] = Rational::one();
        }
        2 => {
            pi[(0, 1)] = int(1);
            pi[(1, 0)] = int(-1);
        }
        _ => {
            for a in 0..r {
                pi[(a, a)] = Rational::zero();
                pi[(a, (a + 1) % r)] = Rational::one();
            }
        }
    }
    let q = &q0 * &pi;
    let out = SplitBases { u: p, w: q, rank: r };
    debug_assert!(split_trace_square(f, &out).is_zero());
    Ok(out)
}

/// `Tr((f⁻¹∘f_F)²)` in the bases `b`, where `f` pairs `u_a` with `w_a`.
pub fn split_trace_square(f: &RationalMatrix, b: &SplitBases) -> Rational {
    let n = &(&b.u.transpose() * f) * &b.w;
    let sq = &n * &n;
    (0..sq.rows()).map(|i| sq[(i, i)].clone()).sum()
}

/// As [`isotropic_split_bases`] for a two-form on `U ⊕ W` where `U` is the
/// first half of the coordinates. Fails if `F` has `U∧U` or `W∧W`
/// components.
pub fn isotropic_split_metric(f: &TwoForm) -> Result<SplitBases> {
    let n = f.dim();
    if !n.is_multiple_of(2) || n == 0 {
        return Err(Error::Shape("U ⊕ W needs dim U = dim W ≥ 1".into()));
    }
    let h = n / 2;
    for i in 0..n {
        for j in 0..n {
            if (i < h) == (j < h) && !f.get(i, j).is_zero() {
                return Err(Error::NotSplitForm);
            }
        }
    }
    let mut m = RationalMatrix::zeros(h, h);
    for a in 0..h {
        for b in 0..h {
            m[(a, b)] = f.get(a, h + b).clone();
        }
    }
    isotropic_split_bases(&m)
}

/// Symplectic Gram-Schmidt: returns pairs `(x, y)` with `F(x, y) = 1` and a
/// basis of the kernel, together forming a basis.
type Pair = (Vec<Rational>, Vec<Rational>);

fn darboux(f: &TwoForm) -> (Vec<Pair>, Vec<Vec<Rational>>) {
    let m = f.dim();
    let mut rest: Vec<Vec<Rational>> = (0..m).map(|i| unit(m, i)).collect();
    let mut pairs = Vec::new();
    'outer: loop {
        for a in 0..rest.len() {
            for b in a + 1..rest.len() {
                let v = f.eval(&rest[a], &rest[b]);
                if v.is_zero() {
                    continue;
                }
                let x = rest[a].clone();
                let y: Vec<Rational> = rest[b].iter().map(|c| c / &v).collect();
                let mut next = Vec::new();
                for (k, z) in rest.iter().enumerate() {
                    if k == a || k == b {
                        continue;
                    }
                    let zy = f.eval(z, &y);
                    let zx = f.eval(z, &x);
                    next.push(z.iter().zip(x.iter().zip(&y)).map(|(zc, (xc, yc))| zc - &zy * xc + &zx * yc).collect());
                }
                pairs.push((x, y));
                rest = next;
                continue 'outer;
            }
        }
        break;
    }
    (pairs, rest)
}

fn unit(n: usize, i: usize) -> Vec<Rational> {
    let mut v = vec![Rational::zero(); n];
    v[i] = Rational::one();
    v
}

fn combine(cols: &RationalMatrix, basis: &[Vec<Rational>]) -> Vec<Vec<Rational>> {
    (0..cols.cols())
        .map(|c| {
            let mut v = vec![Rational::zero(); basis[0].len()];
            for (k, b) in basis.iter().enumerate() {
                if cols[(k, c)].is_zero() {
                    continue;
                }
                for (vi, bi) in v.iter_mut().zip(b) {
                    *vi += &cols[(k, c)] * bi;
                }
            }
            v
        })
        .collect()
}

/// First part of the lemma: a basis (listed in position order) of a space
/// of dimension `m ≠ 2` making `F` isotropic for `Σ e^i⊗e^î`.
pub fn isotropic_basis(f: &TwoForm) -> Result<Vec<Vec<Rational>>> {
    let m = f.dim();
    if m == 2 {
        return Err(Error::Inapplicable("dimension two".into()));
    }
    if m <= 1 || f.is_zero() {
        return Ok((0..m).map(|i| unit(m, i)).collect());
    }
    let (pairs, mut kernel) = darboux(f);
    if m == 3 {
        // F is a multiple of e^{12} in (x, y, r).
        let (x, y) = pairs.into_iter().next().expect("nonzero form has a pair");
        return Ok(vec![x, y, kernel.remove(0)]);
    }
    let center = if m % 2 == 1 { Some(kernel.remove(0)) } else { None };
    let half = kernel.len() / 2;
    let mut us: Vec<Vec<Rational>> = pairs.iter().map(|p| p.0.clone()).collect();
    let mut ws: Vec<Vec<Rational>> = pairs.iter().map(|p| p.1.clone()).collect();
    us.extend(kernel[..half].iter().cloned());
    ws.extend(kernel[half..].iter().cloned());
    let h = us.len();
    let mut fm = RationalMatrix::zeros(h, h);
    for a in 0..h {
        for b in 0..h {
            fm[(a, b)] = f.eval(&us[a], &ws[b]);
        }
    }
    let sb = isotropic_split_bases(&fm)?;
    let u_new = combine(&sb.u, &us);
    let w_new = combine(&sb.w, &ws);
    let mut out = u_new;
    out.extend(center);
    out.extend(w_new.into_iter().rev());
    Ok(out)
}

/// Checks the multiplicity hypotheses: if `w_i + w_î = w_n` then either
/// some weight of the pair repeats (`w_i ≠ w_î`), or `i = î`, or the common
/// weight has multiplicity greater than two.
pub fn check_multiplicities(w: &[Weight]) -> Result<()> {
    let n = w.len();
    let top = &w[n - 1];
    let mult = |x: &Weight| w.iter().filter(|y| *y == x).count();
    for i in 0..n {
        let ih = hat(n, i);
        if &(&w[i] + &w[ih]) != top {
            continue;
        }
        let ok = if w[i] != w[ih] { mult(&w[i]) >= 2 || mult(&w[ih]) >= 2 } else { i == ih || mult(&w[i]) > 2 };
        if !ok {
            return Err(Error::Hypothesis(i.min(ih) + 1, i.max(ih) + 1));
        }
    }
    Ok(())
}

/// Replaces the layer at `positions` by `vectors` (in layer coordinates,
/// possibly fewer than the layer size), completing with old layer vectors.
fn place(c: &mut RationalMatrix, layer: &[usize], assigned: &[(usize, Vec<Rational>)]) {
    let d = layer.len();
    let mut chosen: Vec<Vec<Rational>> = assigned.iter().map(|a| a.1.clone()).collect();
    let mut free: Vec<usize> = layer.iter().copied().filter(|p| !assigned.iter().any(|a| a.0 == *p)).collect();
    free.sort_unstable();
    let mut fill = Vec::new();
    for k in 0..d {
        if fill.len() == free.len() {
            break;
        }
        let e = unit(d, k);
        let mut trial = chosen.clone();
        trial.push(e.clone());
        if crate::exactlin::matrix::rank_of(&trial) == trial.len() {
            chosen.push(e.clone());
            fill.push(e);
        }
    }
    for (pos, v) in assigned.iter().map(|(p, v)| (*p, v)).chain(free.iter().copied().zip(fill.iter())) {
        for (k, &q) in layer.iter().enumerate() {
            c[(q, pos)] = v[k].clone();
        }
    }
}

/// Basis change within layers (column `p` is the new `E_p` in the old
/// adapted basis) making `F ∈ Σ_{α+β=w_n} V_α∧V_β` isotropic for
/// `Σ e^i⊗e^î`. Weights are listed per position.
pub fn adapt_basis_isotropic(w: &[Weight], f: &TwoForm) -> Result<RationalMatrix> {
    let n = w.len();
    if f.dim() != n {
        return Err(Error::Shape("two-form and weight sequence differ in size".into()));
    }
    let top = &w[n - 1];
    for (i, j, _) in f.terms() {
        if &(&w[i] + &w[j]) != top {
            return Err(Error::Inapplicable(format!(
                "e^{{{}{}}} is not in a layer pairing summing to the top weight",
                i + 1,
                j + 1
            )));
        }
    }
    check_multiplicities(w)?;
    let layer = |a: &Weight| -> Vec<usize> { (0..n).filter(|&p| &w[p] == a).collect() };
    let mut c = RationalMatrix::identity(n);
    let mut done: Vec<&Weight> = Vec::new();
    for p in 0..n {
        let alpha = &w[p];
        if done.contains(&alpha) {
            continue;
        }
        done.push(alpha);
        let va = layer(alpha);
        let beta = top + &neg(alpha);
        let vb = layer(&beta);
        if vb.is_empty() {
            continue;
        }
        if &beta == alpha {
            let ii: Vec<usize> = va.iter().copied().filter(|&i| w[hat(n, i)] == *alpha).collect();
            match ii.len() {
                0 | 1 => {}
                2 => {
                    // Two vectors of V_α on which F vanishes.
                    if va.len() < 3 {
                        return Err(Error::Hypothesis(ii[0] + 1, ii[1] + 1));
                    }
                    let fa = f.restrict(&va);
                    let v1 = unit(va.len(), 0);
                    let row: Vec<Rational> = (0..va.len()).map(|k| fa.eval(&v1, &unit(va.len(), k))).collect();
                    let ker = kernel_basis(&RationalMatrix::from_rows(vec![row]).expect("row"));
                    let v2 = ker
                        .into_iter()
                        .find(|v| crate::exactlin::matrix::rank_of(&[v1.clone(), v.clone()]) == 2)
                        .expect("kernel of a functional on dim ≥ 3 exceeds the span of v1");
                    place(&mut c, &va, &[(ii[0], v1), (ii[1], v2)]);
                }
                _ => {
                    let fu = f.restrict(&ii);
                    let basis = isotropic_basis(&fu)?;
                    let assigned: Vec<(usize, Vec<Rational>)> = ii
                        .iter()
                        .zip(basis)
                        .map(|(&pos, v)| {
                            let mut full = vec![Rational::zero(); va.len()];
                            for (k, &q) in ii.iter().enumerate() {
                                full[va.iter().position(|&x| x == q).unwrap()] = v[k].clone();
                            }
                            (pos, full)
                        })
                        .collect();
                    place(&mut c, &va, &assigned);
                }
            }
            continue;
        }
        done.push(vb.first().map(|&q| &w[q]).unwrap());
        let ii: Vec<usize> = va.iter().copied().filter(|&i| w[hat(n, i)] == beta).collect();
        let jj: Vec<usize> = ii.iter().map(|&i| hat(n, i)).collect();
        match ii.len() {
            0 => {}
            1 => {
                let (i, ih) = (ii[0], jj[0]);
                if va.len() >= 2 {
                    let row: Vec<Rational> = va.iter().map(|&q| f.get(q, ih).clone()).collect();
                    let v = first_kernel_vector(row);
                    place(&mut c, &va, &[(i, v)]);
                } else if vb.len() >= 2 {
                    let row: Vec<Rational> = vb.iter().map(|&q| f.get(i, q).clone()).collect();
                    let v = first_kernel_vector(row);
                    place(&mut c, &vb, &[(ih, v)]);
                } else {
                    return Err(Error::Hypothesis(i.min(ih) + 1, i.max(ih) + 1));
                }
            }
            h => {
                let mut fm = RationalMatrix::zeros(h, h);
                for a in 0..h {
                    for b in 0..h {
                        fm[(a, b)] = f.get(ii[a], jj[b]).clone();
                    }
                }
                let sb = isotropic_split_bases(&fm)?;
                let lift = |cols: &RationalMatrix, sub: &[usize], layer: &[usize]| {
                    (0..h)
                        .map(|t| {
                            let mut v = vec![Rational::zero(); layer.len()];
                            for (k, q) in sub.iter().enumerate() {
                                v[layer.iter().position(|x| x == q).unwrap()] = cols[(k, t)].clone();
                            }
                            (sub[t], v)
                        })
                        .collect::<Vec<_>>()
                };
                place(&mut c, &va, &lift(&sb.u, &ii, &va));
                place(&mut c, &vb, &lift(&sb.w, &jj, &vb));
            }
        }
    }
    Ok(c)
}

fn neg(w: &Weight) -> Weight {
    Weight(w.0.iter().map(|x| -x.clone()).collect())
}

fn first_kernel_vector(row: Vec<Rational>) -> Vec<Rational> {
    kernel_basis(&RationalMatrix::from_rows(vec![row]).expect("row"))
        .into_iter()
        .next()
        .expect("a functional on dim ≥ 2 has a kernel")
}
