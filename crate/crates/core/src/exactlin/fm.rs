//! Fourier-Motzkin feasibility for mixed strict and non-strict systems.
//!
//! Equalities are substituted away first (each solved for its
//! highest-index variable), then the remaining variables are eliminated from
//! the last index down. Every derived row carries the multipliers that
//! produce it from the input rows, so an infeasible system comes with a
//! Farkas-style certificate.

use std::collections::HashMap;
use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::rational::{int, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Relation {
    Ge,
    Gt,
    Eq,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Ge => ">=",
            Relation::Gt => ">",
            Relation::Eq => "=",
        })
    }
}

/// `coeffs · w  relation  constant`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constraint {
    pub coeffs: Vec<Rational>,
    pub constant: Rational,
    pub relation: Relation,
}

impl Constraint {
    pub fn new(coeffs: Vec<Rational>, relation: Relation, constant: Rational) -> Self {
        Self { coeffs, constant, relation }
    }

    pub fn is_satisfied(&self, w: &[Rational]) -> bool {
        let lhs = self.coeffs.iter().zip(w).fold(Rational::zero(), |acc, (a, x)| acc + a * x);
        match self.relation {
            Relation::Ge => lhs >= self.constant,
            Relation::Gt => lhs > self.constant,
            Relation::Eq => lhs == self.constant,
        }
    }

    /// True for a row `0 rel c` that no point satisfies.
    pub fn is_contradiction(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero) && !self.is_satisfied(&vec![Rational::zero(); self.coeffs.len()])
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let a = c.abs();
            match (first, c.is_negative()) {
                (true, true) => f.write_str("-")?,
                (true, false) => {}
                (false, true) => f.write_str(" - ")?,
                (false, false) => f.write_str(" + ")?,
            }
            if !a.is_one() {
                write!(f, "{a}")?;
            }
            write!(f, "w{}", i + 1)?;
            first = false;
        }
        if first {
            f.write_str("0")?;
        }
        write!(f, " {} {}", self.relation, self.constant)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ConstraintSystem {
    vars: usize,
    constraints: Vec<Constraint>,
}

impl ConstraintSystem {
    pub fn new(vars: usize) -> Self {
        Self { vars, constraints: Vec::new() }
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn push(&mut self, c: Constraint) {
        assert_eq!(c.coeffs.len(), self.vars, "constraint arity");
        self.constraints.push(c);
    }

    /// Adds `Σ terms  relation  constant` from sparse `(variable, coefficient)`
    /// pairs.
    pub fn add(&mut self, terms: &[(usize, i64)], relation: Relation, constant: i64) {
        let mut coeffs = vec![Rational::zero(); self.vars];
        for &(v, c) in terms {
            coeffs[v] += int(c);
        }
        self.push(Constraint::new(coeffs, relation, int(constant)));
    }

    pub fn is_satisfied_by(&self, w: &[Rational]) -> bool {
        self.constraints.iter().all(|c| c.is_satisfied(w))
    }
}

impl fmt::Display for ConstraintSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.constraints {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }
}

/// Multipliers over the input rows whose combination is `derived`, a row
/// with zero coefficients that no point satisfies. Multipliers of
/// inequalities are nonnegative; those of equalities may have any sign.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Certificate {
    pub multipliers: Vec<Rational>,
    pub derived: Constraint,
}

impl Certificate {
    /// Recombines the input rows and checks that the result is the reported
    /// contradiction.
    pub fn verify(&self, system: &ConstraintSystem) -> bool {
        let rows = system.constraints();
        if self.multipliers.len() != rows.len() {
            return false;
        }
        let mut coeffs = vec![Rational::zero(); system.vars()];
        let mut constant = Rational::zero();
        let mut strict = false;
        let mut only_eq = true;
        for (lambda, row) in self.multipliers.iter().zip(rows) {
            if lambda.is_zero() {
                continue;
            }
            match row.relation {
                Relation::Eq => {}
                Relation::Ge | Relation::Gt if lambda.is_negative() => return false,
                Relation::Gt => {
                    strict = true;
                    only_eq = false;
                }
                Relation::Ge => only_eq = false,
            }
            for (c, a) in coeffs.iter_mut().zip(&row.coeffs) {
                *c += lambda * a;
            }
            constant += lambda * &row.constant;
        }
        let relation = if only_eq {
            Relation::Eq
        } else if strict {
            Relation::Gt
        } else {
            Relation::Ge
        };
        let combined = Constraint::new(coeffs, relation, constant);
        combined == self.derived && combined.is_contradiction()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Feasibility {
    Feasible(Vec<Rational>),
    Infeasible(Certificate),
}

impl Feasibility {
    pub fn witness(&self) -> Option<&[Rational]> {
        match self {
            Feasibility::Feasible(w) => Some(w),
            Feasibility::Infeasible(_) => None,
        }
    }
}

#[derive(Clone, Debug)]
struct Row {
    coeffs: Vec<Rational>,
    constant: Rational,
    relation: Relation,
    mult: Vec<Rational>,
}

impl Row {
    fn is_trivial(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    fn as_constraint(&self) -> Constraint {
        Constraint::new(self.coeffs.clone(), self.relation, self.constant.clone())
    }

    fn scaled_add(&self, s: &Rational, other: &Row, t: &Rational) -> Row {
        let lin =
            |a: &[Rational], b: &[Rational]| -> Vec<Rational> { a.iter().zip(b).map(|(x, y)| s * x + t * y).collect() };
        let relation = match (self.relation, other.relation) {
            (Relation::Gt, _) | (_, Relation::Gt) => Relation::Gt,
            (Relation::Eq, Relation::Eq) => Relation::Eq,
            _ => Relation::Ge,
        };
        Row {
            coeffs: lin(&self.coeffs, &other.coeffs),
            constant: s * &self.constant + t * &other.constant,
            relation,
            mult: lin(&self.mult, &other.mult),
        }
    }

    fn scale(&mut self, s: &Rational) {
        for c in self.coeffs.iter_mut().chain(self.mult.iter_mut()) {
            *c *= s;
        }
        self.constant *= s;
    }
}

/// Drops rows implied by a parallel row (same direction, weaker constant).
fn prune(rows: Vec<Row>) -> Vec<Row> {
    let mut best: HashMap<Vec<Rational>, Row> = HashMap::new();
    let mut order = Vec::new();
    for mut r in rows {
        let lead = r.coeffs.iter().find(|c| !c.is_zero()).expect("nontrivial").abs();
        r.scale(&lead.recip());
        let key = r.coeffs.clone();
        match best.get_mut(&key) {
            None => {
                order.push(key.clone());
                best.insert(key, r);
            }
            Some(cur) => {
                let stronger = r.constant > cur.constant
                    || (r.constant == cur.constant && r.relation == Relation::Gt && cur.relation == Relation::Ge);
                if stronger {
                    *cur = r;
                }
            }
        }
    }
    order.into_iter().map(|k| best.remove(&k).unwrap()).collect()
}

fn contradiction(r: &Row) -> Certificate {
    Certificate { multipliers: r.mult.clone(), derived: r.as_constraint() }
}

/// Decides feasibility and returns an exact witness or a certificate.
pub fn fm_feasible(system: &ConstraintSystem) -> Feasibility {
    let m = system.vars();
    let rows_in = system.constraints().len();
    let mut rows: Vec<Row> = system
        .constraints()
        .iter()
        .enumerate()
        .map(|(idx, c)| {
            let mut mult = vec![Rational::zero(); rows_in];
            mult[idx] = Rational::one();
            Row { coeffs: c.coeffs.clone(), constant: c.constant.clone(), relation: c.relation, mult }
        })
        .collect();

    // Substitute equalities.
    let mut solved: Vec<(usize, Row)> = Vec::new();
    while let Some(pos) = rows.iter().position(|r| r.relation == Relation::Eq) {
        let eq = rows.remove(pos);
        let Some(v) = (0..m).rev().find(|&v| !eq.coeffs[v].is_zero()) else {
            if eq.constant.is_zero() {
                continue;
            }
            return Feasibility::Infeasible(contradiction(&eq));
        };
        let pivot = eq.coeffs[v].clone();
        for r in rows.iter_mut() {
            if r.coeffs[v].is_zero() {
                continue;
            }
            let t = -(&r.coeffs[v] / &pivot);
            let relation = r.relation;
            *r = r.scaled_add(&Rational::one(), &eq, &t);
            r.relation = relation;
            r.coeffs[v] = Rational::zero();
        }
        solved.push((v, eq));
    }

    // Eliminate from the last variable down.
    let mut levels: Vec<(usize, Vec<Row>)> = Vec::new();
    for v in (0..m).rev() {
        let mut kept = Vec::new();
        for r in rows {
            if r.is_trivial() {
                if r.as_constraint().is_contradiction() {
                    return Feasibility::Infeasible(contradiction(&r));
                }
            } else {
                kept.push(r);
            }
        }
        rows = prune(kept);
        let (with_v, rest): (Vec<Row>, Vec<Row>) = rows.into_iter().partition(|r| !r.coeffs[v].is_zero());
        let (pos, neg): (Vec<&Row>, Vec<&Row>) = with_v.iter().partition(|r| r.coeffs[v].is_positive());
        let mut next = rest;
        for p in &pos {
            for q in &neg {
                let s = -q.coeffs[v].clone();
                let t = p.coeffs[v].clone();
                let mut r = p.scaled_add(&s, q, &t);
                r.coeffs[v] = Rational::zero();
                next.push(r);
            }
        }
        levels.push((v, with_v));
        rows = next;
    }
    for r in &rows {
        if r.as_constraint().is_contradiction() {
            return Feasibility::Infeasible(contradiction(r));
        }
    }

    // Back-substitute, lowest variable first.
    let mut w = vec![Rational::zero(); m];
    for (v, level) in levels.iter().rev() {
        let v = *v;
        let mut lower: Option<(Rational, bool)> = None;
        let mut upper: Option<(Rational, bool)> = None;
        for r in level {
            let rest = r
                .coeffs
                .iter()
                .enumerate()
                .filter(|(u, c)| *u != v && !c.is_zero())
                .fold(Rational::zero(), |acc, (u, c)| acc + c * &w[u]);
            let bound = (&r.constant - rest) / &r.coeffs[v];
            let strict = r.relation == Relation::Gt;
            if r.coeffs[v].is_positive() {
                if lower.as_ref().is_none_or(|(b, s)| bound > *b || (bound == *b && strict && !s)) {
                    lower = Some((bound, strict));
                }
            } else if upper.as_ref().is_none_or(|(b, s)| bound < *b || (bound == *b && strict && !s)) {
                upper = Some((bound, strict));
            }
        }
        w[v] = match (lower, upper) {
            (Some((l, _)), Some((u, _))) => (l + u) / int(2),
            (Some((l, s)), None) => {
                if s {
                    l + int(1)
                } else {
                    l
                }
            }
            (None, Some((u, s))) => {
                if s {
                    u - int(1)
                } else {
                    u
                }
            }
            (None, None) => Rational::zero(),
        };
    }
    for (v, eq) in solved.iter().rev() {
        let rest = eq
            .coeffs
            .iter()
            .enumerate()
            .filter(|(u, c)| u != v && !c.is_zero())
            .fold(Rational::zero(), |acc, (u, c)| acc + c * &w[u]);
        w[*v] = (&eq.constant - rest) / &eq.coeffs[*v];
    }
    debug_assert!(system.is_satisfied_by(&w), "witness violates the system");
    Feasibility::Feasible(w)
}
