//! Test-side oracles written directly from the definitions, sharing no code
//! with the library beyond parsing and structure constants.
#![allow(dead_code, clippy::needless_range_loop)]

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::OnceLock;

use nilflat::exactlin::RationalMatrix;
use nilflat::grading::Weight;
use nilflat::records::{read_records, AlgebraRecord};
use nilflat::{hat, LieAlgebra, Rational};
use num_traits::{One, Signed, Zero};

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn fixture(name: &str) -> Vec<AlgebraRecord> {
    read_records(&fixture_path(name), &BTreeMap::new()).expect("fixture parses")
}

pub fn all_fixtures() -> Vec<AlgebraRecord> {
    static ALL: OnceLock<Vec<AlgebraRecord>> = OnceLock::new();
    ALL.get_or_init(load_all).clone()
}

fn load_all() -> Vec<AlgebraRecord> {
    [
        "worked_examples.nf",
        "nonnice_gradings.nf",
        "filtrations.nf",
        "unique_grading.nf",
        "counterexamples9.nf",
        "sigma8.nf",
        "no_filtration.nf",
        "frames.nf",
        "corpus_dim7.nf",
    ]
    .iter()
    .flat_map(|f| fixture(f))
    .collect()
}

pub fn record(file: &str, name: &str) -> AlgebraRecord {
    fixture(file).into_iter().find(|r| r.name == name).unwrap_or_else(|| panic!("no record {name} in {file}"))
}

pub fn q(num: i64, den: i64) -> Rational {
    Rational::new(num.into(), den.into())
}

pub fn qi(n: i64) -> Rational {
    Rational::from_integer(n.into())
}

fn zeros(n: usize) -> Vec<Vec<Rational>> {
    vec![vec![Rational::zero(); n]; n]
}

/// Gauss-Jordan inverse, independent of the library matrix code.
pub fn invert(m: &[Vec<Rational>]) -> Option<Vec<Vec<Rational>>> {
    let n = m.len();
    let mut a: Vec<Vec<Rational>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { Rational::one() } else { Rational::zero() }));
            r
        })
        .collect();
    for c in 0..n {
        let p = (c..n).find(|&r| !a[r][c].is_zero())?;
        a.swap(c, p);
        let inv = a[c][c].recip();
        for x in a[c].iter_mut() {
            *x *= &inv;
        }
        for r in 0..n {
            if r != c && !a[r][c].is_zero() {
                let f = a[r][c].clone();
                for j in 0..2 * n {
                    let v = &a[c][j] * &f;
                    a[r][j] -= v;
                }
            }
        }
    }
    Some(a.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Ricci tensor of the left-invariant metric `g` from the Koszul formula
/// and the curvature `R(X,Y) = [∇_X, ∇_Y] - ∇_[X,Y]`, traced over the first
/// slot.
pub fn koszul_ricci(l: &LieAlgebra, g: &[Vec<Rational>]) -> Vec<Vec<Rational>> {
    let n = l.dim();
    let gi = invert(g).expect("nondegenerate metric");
    let c: Vec<Vec<Vec<Rational>>> =
        (0..n).map(|i| (0..n).map(|j| (0..n).map(|k| l.structure_constant(i, j, k)).collect()).collect()).collect();
    // cg[i][j][m] = g([e_i, e_j], e_m)
    let mut cg = vec![zeros(n); n];
    for i in 0..n {
        for j in 0..n {
            for m in 0..n {
                let mut s = Rational::zero();
                for k in 0..n {
                    if !c[i][j][k].is_zero() {
                        s += &c[i][j][k] * &g[k][m];
                    }
                }
                cg[i][j][m] = s;
            }
        }
    }
    let half = q(1, 2);
    // nabla[a][k][j] = e^k(∇_{e_a} e_j)
    let mut nabla = vec![zeros(n); n];
    for a in 0..n {
        for j in 0..n {
            let low: Vec<Rational> = (0..n).map(|m| &half * &(&(&cg[a][j][m] - &cg[j][m][a]) + &cg[m][a][j])).collect();
            for k in 0..n {
                let mut s = Rational::zero();
                for m in 0..n {
                    s += &gi[k][m] * &low[m];
                }
                nabla[a][k][j] = s;
            }
        }
    }
    let mul = |x: &Vec<Vec<Rational>>, y: &Vec<Vec<Rational>>| {
        let mut out = zeros(n);
        for r in 0..n {
            for s in 0..n {
                let mut t = Rational::zero();
                for u in 0..n {
                    t += &x[r][u] * &y[u][s];
                }
                out[r][s] = t;
            }
        }
        out
    };
    let mut ric = zeros(n);
    for i in 0..n {
        for j in 0..n {
            let a = mul(&nabla[i], &nabla[j]);
            let b = mul(&nabla[j], &nabla[i]);
            for lcol in 0..n {
                let mut r = &a[i][lcol] - &b[i][lcol];
                for k in 0..n {
                    r -= &c[i][j][k] * &nabla[k][i][lcol];
                }
                ric[j][lcol] += r;
            }
        }
    }
    ric
}

pub fn to_rows(m: &RationalMatrix) -> Vec<Vec<Rational>> {
    m.to_rows()
}

pub fn is_zero_matrix(m: &[Vec<Rational>]) -> bool {
    m.iter().all(|r| r.iter().all(Zero::is_zero))
}

pub fn mult<T: PartialEq>(w: &[T], x: &T) -> usize {
    w.iter().filter(|y| *y == x).count()
}

/// (G1)-(G5) read literally; the layer set is the set of entries of `w`.
/// (G5) is taken over `i ≠ j`.
pub fn g_oracle(w: &[Weight]) -> bool {
    let n = w.len();
    let is_weight = |x: &Weight| w.contains(x);
    let top = &w[n - 1];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let s = &w[i] + &w[j];
            for k in 0..n {
                if w[k] == s && !(i < k && j < k) {
                    return false;
                }
            }
        }
    }
    for i in 0..n {
        let s = &w[i] + &w[hat(n, i)];
        for j in 0..n {
            if w[j] == s && j != n - 1 {
                return false;
            }
        }
    }
    for i in 0..n {
        let ih = hat(n, i);
        if &(&w[i] + &w[ih]) != top {
            continue;
        }
        if w[i] != w[ih] {
            if mult(w, &w[i]) < 2 && mult(w, &w[ih]) < 2 {
                return false;
            }
        } else if i != ih && mult(w, &w[i]) <= 2 {
            return false;
        }
    }
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let (ih, jh) = (hat(n, i), hat(n, j));
            if is_weight(&(&w[i] + &w[j])) && is_weight(&(&w[ih] + &w[jh])) && !(w[j] == w[ih] && w[i] == w[jh]) {
                return false;
            }
        }
    }
    true
}

/// The filtration inequality and (F1)-(F4) for `E_p = e_{order[p]}` with
/// weight `w[p]`.
pub fn f_oracle(l: &LieAlgebra, order: &[usize], w: &[Rational]) -> bool {
    let n = l.dim();
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if !l.coeff(order[k], order[i], order[j]).is_zero() && &w[i] + &w[j] > w[k] {
                    return false;
                }
            }
        }
    }
    if !w[0].is_positive() || (1..n).any(|p| w[p] < w[p - 1]) {
        return false;
    }
    let top = &w[n - 1];
    for i in 0..n {
        let ih = hat(n, i);
        let s = &w[i] + &w[ih];
        if s < *top || (n >= 2 && s <= w[n - 2]) {
            return false;
        }
        if s == *top {
            if w[i] != w[ih] {
                if mult(w, &w[i]) < 2 && mult(w, &w[ih]) < 2 {
                    return false;
                }
            } else if i != ih && mult(w, &w[i]) <= 2 {
                return false;
            }
        }
    }
    true
}

/// A reordering where `e_i ⌟ de^k ≠ 0` puts `e_i` before `e_k`, and every
/// `[E_p, E_p̂]` lies in the span of the last vector.
pub fn admissible_oracle(l: &LieAlgebra, order: &[usize]) -> bool {
    let n = l.dim();
    let mut pos = vec![0; n];
    for (p, &i) in order.iter().enumerate() {
        pos[i] = p;
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if !l.coeff(k, i, j).is_zero() && pos[i] >= pos[k] {
                    return false;
                }
            }
        }
    }
    (0..n).all(|p| {
        let (a, b) = (order[p], order[hat(n, p)]);
        (0..n).all(|k| k == order[n - 1] || l.structure_constant(a, b, k).is_zero())
    })
}

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        let n = used.len();
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        for i in 0..n {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                go(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// Random nondegenerate symmetric matrix with small entries, from a seed.
pub fn random_metric(n: usize, seed: u64) -> Vec<Vec<Rational>> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    loop {
        let mut g = zeros(n);
        for i in 0..n {
            for j in i..n {
                let num: i64 = rng.gen_range(-9..=9);
                let den: i64 = rng.gen_range(1..=5);
                g[i][j] = q(num, den);
                g[j][i] = g[i][j].clone();
            }
        }
        if invert(&g).is_some() {
            return g;
        }
    }
}

/// Rank by row reduction, independent of the library.
pub fn rank(rows: &[Vec<Rational>]) -> usize {
    let mut a: Vec<Vec<Rational>> = rows.to_vec();
    let cols = a.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..a.len()).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        for i in r + 1..a.len() {
            if !a[i][c].is_zero() {
                let f = &a[i][c] / &a[r][c];
                for j in c..cols {
                    let v = &a[r][j] * &f;
                    a[i][j] -= v;
                }
            }
        }
        r += 1;
    }
    r
}

/// `dim Der(g)` as the nullity of `D ↦ D[x,y] - [Dx,y] - [x,Dy]`.
pub fn derivation_dim(l: &LieAlgebra) -> usize {
    let n = l.dim();
    // unknown D[(a, b)] at index a * n + b; D e_b = Σ_a D[(a, b)] e_a
    let mut rows = Vec::new();
    for x in 0..n {
        for y in x + 1..n {
            for k in 0..n {
                let mut row = vec![Rational::zero(); n * n];
                for m in 0..n {
                    let c = l.structure_constant(x, y, m);
                    if !c.is_zero() {
                        row[k * n + m] += &c;
                    }
                    // [D e_x, e_y] = Σ_m D[(m, x)] [e_m, e_y]
                    row[m * n + x] -= l.structure_constant(m, y, k);
                    row[m * n + y] -= l.structure_constant(x, m, k);
                }
                rows.push(row);
            }
        }
    }
    n * n - rank(&rows)
}
