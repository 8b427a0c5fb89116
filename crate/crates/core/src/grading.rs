//! Gradings from diagonal tori and weight sequences satisfying (G1)-(G5).
//!
//! Positions in a weight sequence are 0-based and `hat(p) = n - 1 - p`.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use std::ops::Add;

use num_traits::{One, Signed, Zero};

use crate::algebra::{check_permutation, hat, LieAlgebra};
use crate::error::{Error, Result};
use crate::exactlin::DiagonalTorus;
use crate::rational::{parse_rational, Rational};

/// A weight as a vector of coordinates on the torus.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Weight(pub Vec<Rational>);

impl Weight {
    pub fn scalar(q: Rational) -> Self {
        Weight(vec![q])
    }

    pub fn rank(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }
}

impl Add for &Weight {
    type Output = Weight;

    fn add(self, rhs: &Weight) -> Weight {
        Weight(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl fmt::Display for Weight {
    /// Rank one prints as a number; higher ranks as combinations of `l1`, `l2`, ...
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.len() == 1 {
            return write!(f, "{}", self.0[0]);
        }
        let mut first = true;
        for (c, q) in self.0.iter().enumerate() {
            if q.is_zero() {
                continue;
            }
            if q.is_negative() {
                f.write_str("-")?;
            } else if !first {
                f.write_str("+")?;
            }
            let a = q.abs();
            if !a.is_one() {
                write!(f, "{a} ")?;
            }
            write!(f, "l{}", c + 1)?;
            first = false;
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

/// Parses a comma-separated list of weights: plain rationals (`1/2`) or
/// combinations of torus coordinates (`2/5 l1`, `-l1+2l2`, `λ1`).
pub fn parse_weights(text: &str) -> Result<Vec<Weight>> {
    let items: Vec<&str> = text.split(',').map(str::trim).collect();
    let mut parsed: Vec<BTreeMap<usize, Rational>> = Vec::new();
    let mut rank = 0;
    let mut symbolic = None;
    for item in &items {
        let (terms, sym) = parse_weight_terms(item)?;
        if let Some(prev) = symbolic {
            if prev != sym && !terms.is_empty() {
                return Err(Error::Input(format!("weights mix plain numbers and torus coordinates: `{item}`")));
            }
        }
        if !terms.is_empty() {
            symbolic = Some(sym);
        }
        rank = rank.max(terms.keys().next_back().map_or(1, |k| k + 1));
        parsed.push(terms);
    }
    Ok(parsed
        .into_iter()
        .map(|t| {
            let mut v = vec![Rational::zero(); rank];
            for (k, q) in t {
                v[k] = q;
            }
            Weight(v)
        })
        .collect())
}

/// Terms of one weight, keyed by coordinate; plain numbers go to coordinate 0.
fn parse_weight_terms(item: &str) -> Result<(BTreeMap<usize, Rational>, bool)> {
    let bad = || Error::Input(format!("cannot parse weight `{item}`"));
    let s: String = item
        .replace('\u{2212}', "-")
        .replace("\\lambda", "l")
        .replace("lambda", "l")
        .replace('λ', "l")
        .replace('_', "")
        .split_whitespace()
        .collect();
    let mut out: BTreeMap<usize, Rational> = BTreeMap::new();
    let mut symbolic = false;
    // split into signed terms
    let mut terms = Vec::new();
    let mut cur = String::new();
    for ch in s.chars() {
        if (ch == '+' || ch == '-') && !cur.is_empty() {
            terms.push(std::mem::take(&mut cur));
        }
        cur.push(ch);
    }
    if !cur.is_empty() {
        terms.push(cur);
    }
    if terms.is_empty() {
        return Err(bad());
    }
    for t in terms {
        let (coef, var) = match t.find('l') {
            Some(p) => (&t[..p], Some(&t[p + 1..])),
            None => (t.as_str(), None),
        };
        let coef = match coef {
            "" | "+" => Rational::one(),
            "-" => -Rational::one(),
            c => parse_rational(c).ok_or_else(bad)?,
        };
        let slot = match var {
            Some(v) => {
                symbolic = true;
                let k: usize = v.parse().map_err(|_| bad())?;
                if k == 0 {
                    return Err(bad());
                }
                k - 1
            }
            None => 0,
        };
        *out.entry(slot).or_insert_with(Rational::zero) += coef;
    }
    Ok((out, symbolic))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Grading {
    torus: DiagonalTorus,
    weights: Vec<Weight>,
    layers: BTreeMap<Weight, Vec<usize>>,
}

/// Groups basis indices by weight and checks `[g_α, g_β] ⊂ g_{α+β}`.
pub fn grading_from_torus(l: &LieAlgebra, t: &DiagonalTorus) -> Result<Grading> {
    if t.weight_rows().len() != l.dim() {
        return Err(Error::Shape("torus and algebra dimensions differ".into()));
    }
    t.check(l)?;
    let weights: Vec<Weight> = t.weight_rows().iter().map(|r| Weight(r.clone())).collect();
    let mut layers: BTreeMap<Weight, Vec<usize>> = BTreeMap::new();
    for (i, w) in weights.iter().enumerate() {
        layers.entry(w.clone()).or_default().push(i);
    }
    let g = Grading { torus: t.clone(), weights, layers };
    for (k, i, j, _) in l.terms() {
        if &g.weights[i] + &g.weights[j] != g.weights[k] {
            return Err(Error::InconsistentWeights(format!(
                "[e{}, e{}] leaves the layer of weight w{} + w{}",
                i + 1,
                j + 1,
                i + 1,
                j + 1
            )));
        }
    }
    Ok(g)
}

impl Grading {
    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn torus(&self) -> &DiagonalTorus {
        &self.torus
    }

    pub fn weight(&self, i: usize) -> &Weight {
        &self.weights[i]
    }

    pub fn weights(&self) -> &[Weight] {
        &self.weights
    }

    pub fn layers(&self) -> &BTreeMap<Weight, Vec<usize>> {
        &self.layers
    }

    pub fn multiplicity(&self, w: &Weight) -> usize {
        self.layers.get(w).map_or(0, Vec::len)
    }

    pub fn is_weight(&self, w: &Weight) -> bool {
        self.layers.contains_key(w)
    }

    pub fn has_zero_weight(&self) -> bool {
        self.layers.keys().any(Weight::is_zero)
    }
}

/// An ordering of the basis with the weight of each position.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WeightSequence {
    order: Vec<usize>,
    weights: Vec<Weight>,
}

impl WeightSequence {
    /// Position `p` holds original index `order[p]`.
    pub fn new(g: &Grading, order: Vec<usize>) -> Result<Self> {
        check_permutation(&order, g.dim())?;
        let weights = order.iter().map(|&i| g.weight(i).clone()).collect();
        Ok(Self { order, weights })
    }

    /// Checks a listed sequence (weights per position) against the grading.
    pub fn listed(g: &Grading, order: Vec<usize>, weights: Vec<Weight>) -> Result<Self> {
        let s = Self::new(g, order)?;
        if s.weights != weights {
            let p = (0..weights.len()).find(|&p| weights.get(p) != s.weights.get(p)).unwrap_or(0);
            return Err(Error::InconsistentWeights(format!(
                "position {} lists weight {} but e{} has weight {}",
                p + 1,
                weights.get(p).map_or("?".to_string(), ToString::to_string),
                s.order[p] + 1,
                s.weights[p]
            )));
        }
        Ok(s)
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn weights(&self) -> &[Weight] {
        &self.weights
    }

    /// `w1,...,wn`.
    pub fn weights_string(&self) -> String {
        self.weights.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
    }

    /// `e_{σ1},...,e_{σn}`, 1-based.
    pub fn basis_string(&self) -> String {
        self.order.iter().map(|i| format!("e{}", i + 1)).collect::<Vec<_>>().join(",")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GCondition {
    G1,
    G2,
    G3,
    G4,
    G5,
}

impl fmt::Display for GCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

/// Outcome of checking a weight sequence; witnesses are 0-based positions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GCheck {
    Pass,
    Fail { condition: GCondition, witness: Vec<usize> },
}

impl GCheck {
    pub fn passed(&self) -> bool {
        matches!(self, GCheck::Pass)
    }
}

/// Weights replaced by small integer ids with a precomputed sum table.
struct Table {
    mult: Vec<usize>,
    sum: Vec<Vec<Option<usize>>>,
    /// For each weight `γ`, the pairs `(α, β)` with `α ≤ β` and `α + β = γ`.
    splits: Vec<Vec<(usize, usize)>>,
}

impl Table {
    fn new(g: &Grading) -> (Self, Vec<Weight>) {
        let keys: Vec<Weight> = g.layers.keys().cloned().collect();
        let id: BTreeMap<&Weight, usize> = keys.iter().enumerate().map(|(i, w)| (w, i)).collect();
        let m = keys.len();
        let mut sum = vec![vec![None; m]; m];
        let mut splits = vec![Vec::new(); m];
        for a in 0..m {
            for b in 0..m {
                let s = &keys[a] + &keys[b];
                if let Some(&c) = id.get(&s) {
                    sum[a][b] = Some(c);
                    if a <= b {
                        splits[c].push((a, b));
                    }
                }
            }
        }
        let mult = keys.iter().map(|w| g.layers[w].len()).collect();
        (Self { mult, sum, splits }, keys)
    }

    fn ids(&self, keys: &[Weight], s: &WeightSequence) -> Vec<usize> {
        s.weights.iter().map(|w| keys.iter().position(|k| k == w).expect("weight of the grading")).collect()
    }

    fn check(&self, w: &[usize]) -> GCheck {
        let n = w.len();
        let fail = |condition, witness| GCheck::Fail { condition, witness };
        let top = w[n - 1];
        // (G1)
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                if let Some(s) = self.sum[w[i]][w[j]] {
                    for k in 0..n {
                        if w[k] == s && (i >= k || j >= k) {
                            return fail(GCondition::G1, vec![i, j, k]);
                        }
                    }
                }
            }
        }
        // (G2)
        for i in 0..n {
            if let Some(s) = self.sum[w[i]][w[hat(n, i)]] {
                if let Some(j) = (0..n - 1).find(|&j| w[j] == s) {
                    return fail(GCondition::G2, vec![i, j]);
                }
            }
        }
        for i in 0..n {
            let ih = hat(n, i);
            if self.sum[w[i]][w[ih]] != Some(top) {
                continue;
            }
            if w[i] != w[ih] {
                // (G3)
                if self.mult[w[i]] < 2 && self.mult[w[ih]] < 2 {
                    return fail(GCondition::G3, vec![i]);
                }
            } else if i != ih && self.mult[w[i]] <= 2 {
                // (G4)
                return fail(GCondition::G4, vec![i]);
            }
        }
        // (G5)
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let (ih, jh) = (hat(n, i), hat(n, j));
                if self.sum[w[i]][w[j]].is_some()
                    && self.sum[w[ih]][w[jh]].is_some()
                    && !(w[j] == w[ih] && w[i] == w[jh])
                {
                    return fail(GCondition::G5, vec![i, j]);
                }
            }
        }
        GCheck::Pass
    }

    /// True if placing weight `c` at the next position breaks (G1) for every
    /// completion. `post` counts occurrences not yet placed, including `c`.
    fn g1_blocks(&self, c: usize, post: &[usize]) -> bool {
        self.splits[c].iter().any(|&(a, b)| {
            if a == b {
                self.mult[a] >= 2 && post[a] >= 1
            } else {
                (post[a] >= 1 && self.mult[b] >= 1) || (post[b] >= 1 && self.mult[a] >= 1)
            }
        })
    }
}

pub fn check_g_sequence(g: &Grading, s: &WeightSequence) -> GCheck {
    let (t, keys) = Table::new(g);
    t.check(&t.ids(&keys, s))
}

/// Lazily enumerates weight sequences passing (G1)-(G5).
///
/// Weight patterns are generated position by position, refusing any weight
/// that would have to precede a summand still to be placed; each complete
/// pattern that passes the full check is expanded into all assignments of
/// the layer's basis indices to its positions. Patterns come in
/// lexicographic order of weights, assignments in lexicographic order of
/// indices.
pub fn enumerate_g_sequences(g: &Grading) -> GSequences {
    let (table, keys) = Table::new(g);
    let n = g.dim();
    let remaining = table.mult.clone();
    GSequences {
        indices: keys.iter().map(|k| g.layers[k].clone()).collect(),
        keys,
        table,
        n,
        prefix: Vec::with_capacity(n),
        remaining,
        next_choice: vec![0],
        expansion: VecDeque::new(),
    }
}

pub struct GSequences {
    table: Table,
    keys: Vec<Weight>,
    indices: Vec<Vec<usize>>,
    n: usize,
    prefix: Vec<usize>,
    remaining: Vec<usize>,
    next_choice: Vec<usize>,
    expansion: VecDeque<WeightSequence>,
}

impl GSequences {
    /// Advances the depth-first search to the next complete pattern that
    /// passes the full check.
    fn next_pattern(&mut self) -> Option<Vec<usize>> {
        let m = self.keys.len();
        loop {
            let depth = self.prefix.len();
            let choice = self.next_choice.last_mut()?;
            if depth == self.n {
                let pattern = self.prefix.clone();
                self.next_choice.pop();
                if let Some(c) = self.prefix.pop() {
                    self.remaining[c] += 1;
                }
                if self.table.check(&pattern).passed() {
                    return Some(pattern);
                }
                continue;
            }
            let mut found = None;
            while *choice < m {
                let c = *choice;
                *choice += 1;
                if self.remaining[c] > 0 && !self.table.g1_blocks(c, &self.remaining) {
                    found = Some(c);
                    break;
                }
            }
            match found {
                Some(c) => {
                    self.remaining[c] -= 1;
                    self.prefix.push(c);
                    self.next_choice.push(0);
                }
                None => {
                    self.next_choice.pop();
                    if let Some(c) = self.prefix.pop() {
                        self.remaining[c] += 1;
                    }
                }
            }
        }
    }

    fn expand(&mut self, pattern: &[usize]) {
        let positions: Vec<Vec<usize>> =
            (0..self.keys.len()).map(|c| (0..self.n).filter(|&p| pattern[p] == c).collect()).collect();
        let mut out = Vec::new();
        let mut order = vec![usize::MAX; self.n];
        self.assign(0, &positions, &mut order, &mut out);
        let weights: Vec<Weight> = pattern.iter().map(|&c| self.keys[c].clone()).collect();
        out.sort();
        self.expansion.extend(out.into_iter().map(|order| WeightSequence { order, weights: weights.clone() }));
    }

    fn assign(&self, c: usize, positions: &[Vec<usize>], order: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if c == positions.len() {
            out.push(order.clone());
            return;
        }
        for perm in permutations(&self.indices[c]) {
            for (p, i) in positions[c].iter().zip(&perm) {
                order[*p] = *i;
            }
            self.assign(c + 1, positions, order, out);
        }
    }
}

impl Iterator for GSequences {
    type Item = WeightSequence;

    fn next(&mut self) -> Option<WeightSequence> {
        loop {
            if let Some(s) = self.expansion.pop_front() {
                return Some(s);
            }
            let pattern = self.next_pattern()?;
            self.expand(&pattern);
        }
    }
}

/// All permutations of `items` in lexicographic order of positions.
fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for (k, &x) in items.iter().enumerate() {
        let mut rest = items.to_vec();
        rest.remove(k);
        for mut tail in permutations(&rest) {
            tail.insert(0, x);
            out.push(tail);
        }
    }
    out
}

/// One relation `d_i + d_j = d_k` (0-based original indices, `i ≠ j`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct WeightRelation {
    pub i: usize,
    pub j: usize,
    pub k: usize,
}

impl fmt::Display for WeightRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "d{}+d{}=d{}", self.i + 1, self.j + 1, self.k + 1)
    }
}

/// A cycle in the precedence relation forced by (G1) on basis indices:
/// each relation forces its summands before its sum, and following the
/// listed relations leads back to the start. No weight sequence of the
/// grading can then satisfy (G1).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct G1Obstruction {
    pub cycle: Vec<WeightRelation>,
}

impl fmt::Display for G1Obstruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.cycle.iter().map(ToString::to_string).collect();
        write!(f, "(G1) cannot hold: {}", parts.join(", "))
    }
}

/// Shortest cycle of the (G1) precedence digraph, if any.
pub fn g1_obstruction(g: &Grading) -> Option<G1Obstruction> {
    g1_obstructions(g).into_iter().next()
}

/// All shortest cycles of the (G1) precedence digraph, one per vertex set,
/// each rotated to start at its smallest index.
pub fn g1_obstructions(g: &Grading) -> Vec<G1Obstruction> {
    let n = g.dim();
    // edge u -> v labelled by the first relation (lexicographic) producing it
    let mut edge: BTreeMap<(usize, usize), WeightRelation> = BTreeMap::new();
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let s = g.weight(i) + g.weight(j);
            for k in 0..n {
                if *g.weight(k) == s {
                    let (a, b) = if i < j { (i, j) } else { (j, i) };
                    let rel = WeightRelation { i: a, j: b, k };
                    edge.entry((i, k)).or_insert(rel);
                }
            }
        }
    }
    let mut adj = vec![Vec::new(); n];
    for &(u, v) in edge.keys() {
        adj[u].push(v);
    }
    let mut cycles: Vec<Vec<usize>> = Vec::new();
    for start in 0..n {
        // BFS for the shortest path start -> ... -> start
        let mut prev = vec![usize::MAX; n];
        let mut queue = VecDeque::from([start]);
        let mut seen = vec![false; n];
        let mut closing = None;
        'bfs: while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if v == start {
                    closing = Some(u);
                    break 'bfs;
                }
                if !seen[v] {
                    seen[v] = true;
                    prev[v] = u;
                    queue.push_back(v);
                }
            }
        }
        if let Some(last) = closing {
            let mut path = vec![last];
            while *path.last().unwrap() != start {
                let p = prev[*path.last().unwrap()];
                path.push(p);
            }
            path.reverse();
            let m = (0..path.len()).min_by_key(|&p| path[p]).unwrap();
            path.rotate_left(m);
            cycles.push(path);
        }
    }
    let Some(shortest) = cycles.iter().map(Vec::len).min() else {
        return Vec::new();
    };
    let mut sets: Vec<Vec<usize>> = Vec::new();
    let mut out = Vec::new();
    for path in cycles.into_iter().filter(|c| c.len() == shortest) {
        let mut key = path.clone();
        key.sort_unstable();
        if sets.contains(&key) {
            continue;
        }
        sets.push(key);
        let len = path.len();
        let cycle = (0..len).map(|p| edge[&(path[p], path[(p + 1) % len])]).collect();
        out.push(G1Obstruction { cycle });
    }
    out
}
