//! Positive filtrations adapted to a reordering of the basis, satisfying
//! (F1)-(F4).
//!
//! The search runs over admissible reorderings (linear extensions of "e_i
//! precedes e_k when e_i ⌟ de^k ≠ 0" such that `[E_p, E_p̂]` is a multiple
//! of `E_n`) and over equality patterns of consecutive weights. A pattern
//! fixes every multiplicity, so the conditional hypotheses of (F3) and (F4)
//! become a choice between no constraint and a strict inequality, and each
//! branch is a single linear system decided by Fourier-Motzkin.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rayon::prelude::*;

use crate::algebra::{hat, LieAlgebra};
use crate::exactlin::{diagonal_derivations, fm_feasible, ConstraintSystem, Feasibility, Relation};
use crate::rational::{from_integers, integerize, Rational};

/// Position `p` of the reordered basis is original index `order[p]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AdmissibleOrder(pub Vec<usize>);

impl AdmissibleOrder {
    pub fn basis_string(&self) -> String {
        self.0.iter().map(|i| format!("e{}", i + 1)).collect::<Vec<_>>().join(",")
    }
}

/// `pattern[p]` is true when `w_p = w_{p+1}` and false when `w_p < w_{p+1}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct EqualityPattern(pub Vec<bool>);

impl EqualityPattern {
    /// Run length of the maximal block of equal weights containing each
    /// position.
    pub fn multiplicities(&self) -> Vec<usize> {
        let n = self.0.len() + 1;
        let mut run_of = vec![0; n];
        let mut runs = vec![1usize];
        for p in 1..n {
            if self.0[p - 1] {
                *runs.last_mut().unwrap() += 1;
            } else {
                runs.push(1);
            }
            run_of[p] = runs.len() - 1;
        }
        run_of.into_iter().map(|r| runs[r]).collect()
    }

    /// Run index of each position.
    fn runs(&self) -> Vec<usize> {
        let mut out = vec![0];
        for (p, &eq) in self.0.iter().enumerate() {
            out.push(out[p] + usize::from(!eq));
        }
        out
    }

    /// All patterns on `n` positions, by number of equalities and then
    /// lexicographically.
    pub fn all(n: usize) -> Vec<EqualityPattern> {
        let bits = n.saturating_sub(1);
        let mut v: Vec<Vec<bool>> =
            (0u32..1 << bits).map(|m| (0..bits).map(|b| m >> (bits - 1 - b) & 1 == 1).collect()).collect();
        v.sort_by_key(|p| (p.iter().filter(|&&b| b).count(), p.clone()));
        v.into_iter().map(EqualityPattern).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiltrationWitness {
    pub order: AdmissibleOrder,
    pub weights: Vec<BigInt>,
}

impl FiltrationWitness {
    pub fn rational_weights(&self) -> Vec<Rational> {
        from_integers(&self.weights)
    }

    pub fn weights_string(&self) -> String {
        self.weights.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
    }
}

impl fmt::Display for FiltrationWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}  {}", self.order.basis_string(), self.weights_string())
    }
}

/// `before[i]` lists the `k` that must come after `i`.
fn precedence(l: &LieAlgebra) -> Vec<Vec<bool>> {
    let n = l.dim();
    let mut after = vec![vec![false; n]; n];
    for (k, i, j, _) in l.terms() {
        after[i][k] = true;
        after[j][k] = true;
    }
    after
}

/// `[E_p, E_p̂] ∈ Span{E_n}` for every position `p`.
pub fn pairs_land_in_top(l: &LieAlgebra, order: &[usize]) -> bool {
    let n = l.dim();
    let top = order[n - 1];
    (0..n).all(|p| {
        let (i, j) = (order[p], order[hat(n, p)]);
        i == j || (0..n).all(|k| k == top || l.coeff(k, i, j).is_zero())
    })
}

/// Respects "e_i before e_k whenever e_i ⌟ de^k ≠ 0".
pub fn respects_precedence(l: &LieAlgebra, order: &[usize]) -> bool {
    let n = l.dim();
    let mut pos = vec![0; n];
    for (p, &i) in order.iter().enumerate() {
        pos[i] = p;
    }
    l.terms().iter().all(|&(k, i, j, _)| pos[i] < pos[k] && pos[j] < pos[k])
}

/// Lazily yields admissible orders in lexicographic order.
pub fn admissible_orders(l: &LieAlgebra) -> AdmissibleOrders<'_> {
    let n = l.dim();
    let after = precedence(l);
    let mut indegree = vec![0usize; n];
    for row in &after {
        for (k, &a) in row.iter().enumerate() {
            if a {
                indegree[k] += 1;
            }
        }
    }
    AdmissibleOrders { l, after, indegree, prefix: Vec::with_capacity(n), next_choice: vec![0], used: vec![false; n] }
}

pub struct AdmissibleOrders<'a> {
    l: &'a LieAlgebra,
    after: Vec<Vec<bool>>,
    indegree: Vec<usize>,
    prefix: Vec<usize>,
    next_choice: Vec<usize>,
    used: Vec<bool>,
}

impl AdmissibleOrders<'_> {
    fn pop(&mut self) {
        self.next_choice.pop();
        if let Some(i) = self.prefix.pop() {
            self.used[i] = false;
            for k in 0..self.after.len() {
                if self.after[i][k] {
                    self.indegree[k] += 1;
                }
            }
        }
    }
}

impl Iterator for AdmissibleOrders<'_> {
    type Item = AdmissibleOrder;

    fn next(&mut self) -> Option<AdmissibleOrder> {
        let n = self.after.len();
        loop {
            let depth = self.prefix.len();
            let choice = *self.next_choice.last()?;
            if depth == n {
                let order = self.prefix.clone();
                self.pop();
                if pairs_land_in_top(self.l, &order) {
                    return Some(AdmissibleOrder(order));
                }
                continue;
            }
            match (choice..n).find(|&i| !self.used[i] && self.indegree[i] == 0) {
                Some(i) => {
                    *self.next_choice.last_mut().unwrap() = i + 1;
                    self.used[i] = true;
                    for k in 0..n {
                        if self.after[i][k] {
                            self.indegree[k] -= 1;
                        }
                    }
                    self.prefix.push(i);
                    self.next_choice.push(0);
                }
                None => {
                    debug_assert!(depth > 0 || choice > 0, "precedence relation has no minimal element");
                    self.pop();
                }
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FCondition {
    /// `w_i + w_j ≤ w_k` whenever `de^k(e_i, e_j) ≠ 0`.
    Sum,
    F1,
    F2,
    F3,
    F4,
}

impl fmt::Display for FCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FCondition::Sum => f.write_str("filtration inequality"),
            other => write!(f, "{other:?}"),
        }
    }
}

/// Witnesses are 0-based positions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FCheck {
    Pass,
    Fail { condition: FCondition, witness: Vec<usize> },
}

impl FCheck {
    pub fn passed(&self) -> bool {
        matches!(self, FCheck::Pass)
    }
}

/// Checks the filtration inequality and (F1)-(F4) for weights listed per
/// position of `order`.
pub fn check_f_assignment(l: &LieAlgebra, order: &AdmissibleOrder, w: &[Rational]) -> FCheck {
    let n = l.dim();
    let fail = |condition, witness| FCheck::Fail { condition, witness };
    if order.0.len() != n || w.len() != n {
        return fail(FCondition::F1, vec![]);
    }
    let r = match l.reorder(&order.0) {
        Ok(r) => r,
        Err(_) => return fail(FCondition::F1, vec![]),
    };
    for (k, i, j, _) in r.terms() {
        if &w[i] + &w[j] > w[k] {
            return fail(FCondition::Sum, vec![i, j, k]);
        }
    }
    if !w[0].is_positive() {
        return fail(FCondition::F1, vec![0]);
    }
    for p in 1..n {
        if w[p] < w[p - 1] {
            return fail(FCondition::F1, vec![p - 1, p]);
        }
    }
    let top = &w[n - 1];
    for i in 0..n {
        let s = &w[i] + &w[hat(n, i)];
        if s < *top || (n >= 2 && s <= w[n - 2]) {
            return fail(FCondition::F2, vec![i]);
        }
    }
    let mult = |x: &Rational| w.iter().filter(|y| *y == x).count();
    for i in 0..n {
        let ih = hat(n, i);
        if &w[i] + &w[ih] != *top {
            continue;
        }
        if w[i] != w[ih] {
            if mult(&w[i]) < 2 && mult(&w[ih]) < 2 {
                return fail(FCondition::F3, vec![i]);
            }
        } else if i != ih && mult(&w[i]) <= 2 {
            return fail(FCondition::F4, vec![i]);
        }
    }
    FCheck::Pass
}

/// `[L_a, L_b] ⊂ L_{a+b}` for the filtration spanned by trailing basis
/// vectors: every bracket component lands on positions of weight at least
/// the sum.
pub fn is_filtration(l: &LieAlgebra, order: &AdmissibleOrder, w: &[Rational]) -> bool {
    let Ok(r) = l.reorder(&order.0) else {
        return false;
    };
    r.terms().iter().all(|(k, i, j, _)| &w[*i] + &w[*j] <= w[*k])
}

/// The linear system of one (order, pattern) branch, in position variables.
/// Returns `None` when the pattern contradicts the filtration inequality
/// outright.
pub fn branch_system(r: &LieAlgebra, pattern: &EqualityPattern) -> Option<ConstraintSystem> {
    let n = r.dim();
    let runs = pattern.runs();
    let mult = pattern.multiplicities();
    let terms = r.terms();
    // w_i + w_j ≤ w_k with positive weights forces w_i, w_j < w_k.
    if terms.iter().any(|&(k, i, j, _)| runs[i] == runs[k] || runs[j] == runs[k]) {
        return None;
    }
    let mut s = ConstraintSystem::new(n);
    for &(k, i, j, _) in &terms {
        s.add(&[(k, 1), (i, -1), (j, -1)], Relation::Ge, 0);
    }
    s.add(&[(0, 1)], Relation::Gt, 0);
    for p in 0..n - 1 {
        let rel = if pattern.0[p] { Relation::Eq } else { Relation::Gt };
        s.add(&[(p + 1, 1), (p, -1)], rel, 0);
    }
    for i in 0..=hat(n, 0) / 2 {
        let ih = hat(n, i);
        if i > ih {
            break;
        }
        s.add(&[(i, 1), (ih, 1), (n - 1, -1)], Relation::Ge, 0);
        s.add(&[(i, 1), (ih, 1), (n - 2, -1)], Relation::Gt, 0);
        let allowed_equal = if runs[i] != runs[ih] { mult[i] >= 2 || mult[ih] >= 2 } else { i == ih || mult[i] > 2 };
        if !allowed_equal {
            s.add(&[(i, 1), (ih, 1), (n - 1, -1)], Relation::Gt, 0);
        }
    }
    Some(s)
}

/// Tries the weights of a positive rank-one grading, sorted, as a
/// filtration.
fn graded_candidate(l: &LieAlgebra) -> Option<FiltrationWitness> {
    let t = diagonal_derivations(l);
    if t.rank() != 1 {
        return None;
    }
    let mut w: Vec<Rational> = t.weight_rows().iter().map(|r| r[0].clone()).collect();
    if w.iter().all(Signed::is_negative) {
        w.iter_mut().for_each(|x| *x = -x.clone());
    }
    if !w.iter().all(Signed::is_positive) {
        return None;
    }
    let mut order: Vec<usize> = (0..l.dim()).collect();
    order.sort_by(|&a, &b| w[a].cmp(&w[b]));
    let sorted: Vec<Rational> = order.iter().map(|&i| w[i].clone()).collect();
    let ints = integerize(&sorted);
    let order = AdmissibleOrder(order);
    let admissible = respects_precedence(l, &order.0) && pairs_land_in_top(l, &order.0);
    (admissible && check_f_assignment(l, &order, &from_integers(&ints)).passed())
        .then_some(FiltrationWitness { order, weights: ints })
}

#[derive(Clone, Debug)]
pub struct SearchOptions {
    /// Try the weights of a positive rank-one grading before branching.
    pub graded_first: bool,
    pub parallel: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self { graded_first: true, parallel: true }
    }
}

#[derive(Clone, Debug)]
pub struct FiltrationSearch {
    pub witness: Option<FiltrationWitness>,
    pub orders: usize,
    pub systems: usize,
}

/// First witness of the branch with the smallest (order, pattern) index.
fn search_order(
    l: &LieAlgebra,
    order: &AdmissibleOrder,
    patterns: &[EqualityPattern],
) -> (Option<FiltrationWitness>, usize) {
    let r = l.reorder(&order.0).expect("permutation");
    let mut systems = 0;
    for pattern in patterns {
        let Some(s) = branch_system(&r, pattern) else {
            continue;
        };
        systems += 1;
        if let Feasibility::Feasible(w) = fm_feasible(&s) {
            let ints = integerize(&w);
            let witness = FiltrationWitness { order: order.clone(), weights: ints };
            assert!(
                check_f_assignment(l, order, &witness.rational_weights()).passed(),
                "feasible branch produced an invalid filtration"
            );
            return (Some(witness), systems);
        }
    }
    (None, systems)
}

pub fn search_filtration_with(l: &LieAlgebra, opts: &SearchOptions) -> FiltrationSearch {
    if opts.graded_first {
        if let Some(w) = graded_candidate(l) {
            return FiltrationSearch { witness: Some(w), orders: 0, systems: 0 };
        }
    }
    let orders: Vec<AdmissibleOrder> = admissible_orders(l).collect();
    let patterns = EqualityPattern::all(l.dim());
    let results: Vec<(Option<FiltrationWitness>, usize)> = if opts.parallel {
        // Deterministic: the earliest order with a witness wins, whatever
        // finishes first.
        let found = orders.par_iter().map(|o| search_order(l, o, &patterns)).collect::<Vec<_>>();
        found
    } else {
        let mut out = Vec::new();
        for o in &orders {
            let r = search_order(l, o, &patterns);
            let done = r.0.is_some();
            out.push(r);
            if done {
                break;
            }
        }
        out
    };
    let systems = results.iter().map(|r| r.1).sum();
    let witness = results.into_iter().find_map(|r| r.0);
    FiltrationSearch { witness, orders: orders.len(), systems }
}

/// Exhaustive over admissible orders and equality patterns; `None` proves
/// that no filtration adapted to a reordering of this basis satisfies
/// (F1)-(F4).
pub fn search_filtration(l: &LieAlgebra) -> Option<FiltrationWitness> {
    search_filtration_with(l, &SearchOptions::default()).witness
}
