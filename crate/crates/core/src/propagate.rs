//! Bound propagation with cycle detection: decides `Φ ∧ x ≥ s` under the
//! promise that `Φ` is satisfiable.
//!
//! Bounds are pushed along every bend for up to `2n` rounds. Each improvement
//! remembers the bend and the bound on the other variable that produced it;
//! walking these records backwards from a variable finds closed walks, whose
//! residues (after renaming repeated variables) give bounds that plain
//! propagation would only approach in the limit. The outer loop stops once
//! the number of redundant literals is stable.

use crate::bend::{Bend, Bound, Literal, VarId};
use crate::error::Error;
use crate::formula::BijunctiveFormula;
use crate::linear::{satisfiable, Atom};
use crate::num::Rational;
use crate::reason::{bound_implies_unchecked, literal_projection, Interval, Side};
use crate::residue::{cycle_residue, Cycle, Step, Walk};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Answer {
    Yes,
    No,
}

/// One bound improvement and what caused it.
#[derive(Debug, Clone, PartialEq)]
pub struct Improvement {
    pub var: VarId,
    pub side: Side,
    pub bound: Bound,
    /// Bend that produced the bound; `None` for the query and cycle residues.
    pub bend: Option<usize>,
    /// Variable whose bound was pushed through `bend`.
    pub from: Option<VarId>,
    /// Improvement of `from` that was current when this one was derived.
    pub parent: Option<usize>,
}

/// Bounds and bookkeeping of one run.
#[derive(Debug, Clone)]
pub struct PropagateState {
    pub beta_low: Vec<Bound>,
    pub beta_high: Vec<Bound>,
    /// Every improvement in order; parents index into this log.
    pub log: Vec<Improvement>,
    last: Vec<[Option<usize>; 2]>,
    pub redundant_count: usize,
    pub outer_iterations: usize,
    pub rounds: usize,
}

fn side_index(side: Side) -> usize {
    match side {
        Side::Lower => 0,
        Side::Upper => 1,
    }
}

impl PropagateState {
    fn new(n: usize) -> Self {
        PropagateState {
            beta_low: (0..n as u32).map(|v| Bound::trivial(VarId(v), false)).collect(),
            beta_high: (0..n as u32).map(|v| Bound::trivial(VarId(v), true)).collect(),
            log: Vec::new(),
            last: vec![[None; 2]; n],
            redundant_count: 0,
            outer_iterations: 0,
            rounds: 0,
        }
    }

    pub fn interval(&self, v: VarId) -> Interval {
        self.beta_low[v.index()]
            .interval()
            .intersect(&self.beta_high[v.index()].interval())
    }

    pub fn bound(&self, v: VarId, side: Side) -> &Bound {
        match side {
            Side::Lower => &self.beta_low[v.index()],
            Side::Upper => &self.beta_high[v.index()],
        }
    }

    /// Installs `b` if strictly stronger than the current bound; reports whether it did.
    fn improve(&mut self, b: Bound, side: Side, bend: Option<usize>, from: Option<VarId>, parent: Option<usize>) -> bool {
        let v = b.var;
        let cur = self.bound(v, side);
        if bound_implies_unchecked(cur, &b) {
            return false;
        }
        debug_assert!(bound_implies_unchecked(&b, cur) || b.is_unsatisfiable());
        self.log.push(Improvement {
            var: v,
            side,
            bound: b.clone(),
            bend,
            from,
            parent,
        });
        self.last[v.index()][side_index(side)] = Some(self.log.len() - 1);
        match side {
            Side::Lower => self.beta_low[v.index()] = b,
            Side::Upper => self.beta_high[v.index()] = b,
        }
        true
    }

    fn conflict(&self, v: VarId) -> bool {
        self.interval(v).is_empty()
    }
}

/// Decides `Φ ∧ x ≥ s`, assuming `Φ` is satisfiable.
pub fn propagate(phi: &BijunctiveFormula, x: VarId, s: &Rational) -> Result<Answer, Error> {
    propagate_bound(phi, &Bound::finite(x, crate::bend::Rel::Ge, s.clone()))
}

/// Decides `Φ ∧ query` for a bound `query`, assuming `Φ` is satisfiable.
pub fn propagate_bound(phi: &BijunctiveFormula, query: &Bound) -> Result<Answer, Error> {
    Ok(run(phi, query)?.0)
}

/// Like [`propagate_bound`], also returning the final state.
pub fn run(phi: &BijunctiveFormula, query: &Bound) -> Result<(Answer, PropagateState), Error> {
    if !phi.contains_var(query.var) {
        return Err(Error::UnknownVariable(query.var.to_string()));
    }
    let n = phi.num_vars();
    let mut st = PropagateState::new(n);

    for b in phi.bends() {
        if b.is_bottom() {
            return Ok((Answer::No, st));
        }
        if b.literal_count() == 1 {
            if let Some(Literal::Bound(bd)) = b.literals().next().map(|(_, l)| l) {
                if !bd.is_trivially_true() {
                    let side = if bd.is_upper() { Side::Upper } else { Side::Lower };
                    st.improve(bd, side, None, None, None);
                }
            }
        }
    }
    // Initial bounds are facts, not derivations.
    st.log.clear();
    st.last.iter_mut().for_each(|l| *l = [None; 2]);
    let qside = if query.is_upper() { Side::Upper } else { Side::Lower };
    st.improve(query.clone(), qside, None, None, None);
    if (0..n as u32).any(|v| st.conflict(VarId(v))) {
        return Ok((Answer::No, st));
    }

    let rounds = 2 * n.max(1);
    let mut prev_redundant = None;
    loop {
        st.outer_iterations += 1;
        for _ in 0..rounds {
            st.rounds += 1;
            match propagation_round(phi, &mut st) {
                RoundOutcome::Conflict => return Ok((Answer::No, st)),
                RoundOutcome::Changed => {}
                RoundOutcome::Stable => break,
            }
        }
        for v in 0..n as u32 {
            for side in [Side::Lower, Side::Upper] {
                if detect_cycles(phi, &mut st, VarId(v), side, rounds) {
                    return Ok((Answer::No, st));
                }
            }
        }
        let count = redundant_literal_count(phi, &st);
        st.redundant_count = count;
        if prev_redundant == Some(count) {
            break;
        }
        prev_redundant = Some(count);
    }
    Ok((Answer::Yes, st))
}

enum RoundOutcome {
    Conflict,
    Changed,
    Stable,
}

fn propagation_round(phi: &BijunctiveFormula, st: &mut PropagateState) -> RoundOutcome {
    let mut changed = false;
    for (i, bend) in phi.bends().iter().enumerate() {
        if bend.is_top() {
            continue;
        }
        let (bx, by) = (bend.x(), bend.y());
        let orientations: &[(VarId, VarId)] = if bx == by { &[(bx, bx)] } else { &[(bx, by), (by, bx)] };
        for &(u, v) in orientations {
            let d = derive(bend, u, &st.interval(u), v);
            if d.interval.is_empty() {
                return RoundOutcome::Conflict;
            }
            for side in [Side::Lower, Side::Upper] {
                let (b, dep) = match side {
                    Side::Lower => (d.interval.lower_bound(v), d.lower_dep),
                    Side::Upper => (d.interval.upper_bound(v), d.upper_dep),
                };
                let (from, parent) = match dep {
                    Some(s) if u != v => (Some(u), st.last[u.index()][side_index(s)]),
                    _ => (None, None),
                };
                if st.improve(b, side, Some(i), from, parent) {
                    changed = true;
                    if st.conflict(v) {
                        return RoundOutcome::Conflict;
                    }
                }
            }
        }
    }
    if changed {
        RoundOutcome::Changed
    } else {
        RoundOutcome::Stable
    }
}

/// Interval implied on `v`, with the side of `u`'s box each end depends on.
struct Derivation {
    interval: Interval,
    lower_dep: Option<Side>,
    upper_dep: Option<Side>,
}

fn derive(bend: &Bend, u: VarId, u_box: &Interval, v: VarId) -> Derivation {
    let mut hull = Interval::empty();
    let (mut lower_dep, mut upper_dep) = (None, None);
    let mut killer = None;
    for (_, lit) in bend.literals() {
        let proj = literal_projection(&lit, u, u_box, v);
        let dep = match &lit {
            Literal::Bound(b) if b.var == v => None,
            Literal::Bound(b) => {
                if proj.is_empty() {
                    killer = Some(if b.is_upper() { Side::Lower } else { Side::Upper });
                }
                None
            }
            Literal::Ineq(t) => {
                let a = t.coeff_of(u).expect("inequality mentions u");
                Some(if a.is_positive() { Side::Lower } else { Side::Upper })
            }
        };
        if proj.is_empty() {
            continue;
        }
        let next = hull.hull(&proj);
        if next.lo != hull.lo {
            lower_dep = dep;
        }
        if next.hi != hull.hi {
            upper_dep = dep;
        }
        hull = next;
    }
    Derivation {
        interval: hull,
        lower_dep: lower_dep.or(killer),
        upper_dep: upper_dep.or(killer),
    }
}

/// Follows the improvement records of `v` backwards; at every return to `v`
/// tightens both bounds of `v` with the residue of the closed walk. Returns
/// `true` on a conflict.
fn detect_cycles(phi: &BijunctiveFormula, st: &mut PropagateState, v: VarId, side: Side, max_len: usize) -> bool {
    let mut cursor = st.last[v.index()][side_index(side)];
    let mut walk: Vec<(usize, VarId, VarId)> = Vec::new();
    let mut at = v;
    while let Some(e) = cursor {
        let rec = &st.log[e];
        let (Some(bend), Some(from)) = (rec.bend, rec.from) else {
            break;
        };
        debug_assert_eq!(rec.var, at);
        walk.insert(0, (bend, from, at));
        at = from;
        cursor = rec.parent;
        if at == v {
            if let Some(res) = closed_walk_residue(phi, &walk, v) {
                let iv = crate::reason::implied_interval(&res, &st.interval(v), v)
                    .expect("residue is over v");
                if iv.is_empty() {
                    return true;
                }
                st.improve(iv.lower_bound(v), Side::Lower, None, None, None);
                st.improve(iv.upper_bound(v), Side::Upper, None, None, None);
                if st.conflict(v) {
                    return true;
                }
            }
        }
        if walk.len() >= max_len {
            break;
        }
    }
    false
}

/// Residue at `v` of a closed walk, after giving every inner position a fresh variable.
pub fn closed_walk_residue(phi: &BijunctiveFormula, walk: &[(usize, VarId, VarId)], v: VarId) -> Option<Bend> {
    let k = walk.len();
    if k < 2 {
        return None;
    }
    let local = |i: usize| VarId(if i == k { 0 } else { i as u32 });
    let mut steps = Vec::with_capacity(k);
    for (i, &(b, from, to)) in walk.iter().enumerate() {
        let oriented = phi.bend(b).oriented(from, to)?;
        let renamed = oriented.renamed(local(i), local(i + 1)).ok()?;
        steps.push(Step::new(&renamed, local(i), local(i + 1)).ok()?);
    }
    let cycle = Cycle::new(Walk::from_steps(local(0), steps).ok()?).ok()?;
    let res = cycle_residue(&cycle).ok()?;
    res.bend.renamed(v, v).ok().map(|b| b.with_scope(v, v))
}

/// Literals of `Φ` whose removal leaves each bend unchanged inside the box
/// given by the current bounds.
pub fn redundant_literal_count(phi: &BijunctiveFormula, st: &PropagateState) -> usize {
    phi.bends()
        .iter()
        .map(|b| redundant_literals(b, &st.interval(b.x()), &st.interval(b.y())).len())
        .sum()
}

/// Slots of the redundant literals of `bend` within the box `x_box × y_box`.
pub fn redundant_literals(bend: &Bend, x_box: &Interval, y_box: &Interval) -> Vec<crate::bend::Slot> {
    let mut box_atoms = Vec::new();
    for (v, iv) in [(bend.x(), x_box), (bend.y(), y_box)] {
        box_atoms.push(Atom::from_bound(&iv.lower_bound(v)));
        box_atoms.push(Atom::from_bound(&iv.upper_bound(v)));
    }
    let lits: Vec<_> = bend.literals().collect();
    let mut out = Vec::new();
    for (slot, lit) in &lits {
        // ψ is redundant iff ψ ∧ box ∧ ¬(other literals) is empty.
        let mut atoms = box_atoms.clone();
        atoms.push(Atom::from_literal(lit));
        for (other, olit) in &lits {
            if other != slot {
                atoms.push(Atom::negated_literal(olit));
            }
        }
        if !satisfiable(&atoms) {
            out.push(*slot);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bend::{normalize_bend, RawLiteral, Rel, Slot};
    use crate::num::ExtendedRational;

    fn q(n: i64) -> Rational {
        Rational::from(n)
    }

    struct F {
        phi: BijunctiveFormula,
    }

    impl F {
        fn new(vars: &[&str]) -> F {
            let mut phi = BijunctiveFormula::new();
            for v in vars {
                phi.var(v);
            }
            F { phi }
        }

        fn add(&mut self, lits: &[(&[(&str, i64)], Rel, i64)]) -> &mut Self {
            let raw: Vec<_> = lits
                .iter()
                .map(|(t, r, c)| {
                    RawLiteral::new(t.iter().map(|(v, a)| (self.phi.var(v), q(*a))).collect(), *r, q(*c))
                })
                .collect();
            self.phi.push(normalize_bend(&raw).unwrap()).unwrap();
            self
        }

        fn v(&self, name: &str) -> VarId {
            self.phi.lookup(name).unwrap()
        }
    }

    #[test]
    fn doubling_chain_is_refuted() {
        let mut f = F::new(&["x", "y"]);
        f.add(&[(&[("y", 1), ("x", -2)], Rel::Ge, 0)]).add(&[(&[("x", 1), ("y", -2)], Rel::Ge, 0)]);
        assert_eq!(propagate(&f.phi, f.v("x"), &q(1)).unwrap(), Answer::No);
        assert_eq!(propagate(&f.phi, f.v("x"), &q(0)).unwrap(), Answer::Yes);
    }

    #[test]
    fn mixed_sign_cycle_is_refuted() {
        // x + y ≤ 0 and x + 2y ≥ 0 force x ≤ 0; the derivation alternates lower and upper bounds.
        let mut f = F::new(&["x", "y"]);
        f.add(&[(&[("x", 1), ("y", 1)], Rel::Le, 0)]).add(&[(&[("x", 1), ("y", 2)], Rel::Ge, 0)]);
        assert_eq!(propagate(&f.phi, f.v("x"), &q(1)).unwrap(), Answer::No);
        assert_eq!(propagate(&f.phi, f.v("x"), &q(0)).unwrap(), Answer::Yes);
    }

    #[test]
    fn simple_yes() {
        let mut f = F::new(&["x", "y"]);
        f.add(&[(&[("x", 1), ("y", -1)], Rel::Le, 0)]);
        assert_eq!(propagate(&f.phi, f.v("x"), &q(0)).unwrap(), Answer::Yes);
    }

    fn example_family(n: i64, with_x_pos: bool) -> F {
        let mut f = F::new(&["x", "y", "z"]);
        if with_x_pos {
            f.add(&[(&[("x", 1)], Rel::Gt, 0)]);
        }
        f.add(&[(&[("y", 1)], Rel::Lt, n)]);
        for i in 0..=n {
            f.add(&[(&[("x", 1)], Rel::Ge, i), (&[("y", 1)], Rel::Le, i)]);
        }
        f.add(&[(&[("x", 1), ("z", -1)], Rel::Lt, 0)]);
        f.add(&[(&[("z", 1), ("y", -1)], Rel::Lt, 0)]);
        f
    }

    #[test]
    fn strict_lower_bound_matters() {
        // y < 2, (x ≥ i ∨ y ≤ i) for i = 0..2, x < z < y, queried at x ≥ 0: witness x = 0, z = 1/2, y = 9/10.
        let mut f = F::new(&["x", "y", "z"]);
        f.add(&[(&[("y", 1)], Rel::Lt, 2)]);
        for i in 0..=2 {
            f.add(&[(&[("x", 1)], Rel::Ge, i), (&[("y", 1)], Rel::Le, i)]);
        }
        f.add(&[(&[("x", 1), ("z", -1)], Rel::Lt, 0)]);
        f.add(&[(&[("z", 1), ("y", -1)], Rel::Lt, 0)]);
        assert_eq!(propagate(&f.phi, f.v("x"), &q(0)).unwrap(), Answer::Yes);
        let w: crate::formula::Assignment = [
            (f.v("x"), q(0)),
            (f.v("y"), Rational::new(9, 10)),
            (f.v("z"), Rational::new(1, 2)),
        ]
        .into_iter()
        .collect();
        assert!(f.phi.eval(&w).unwrap());

        // Without x > 0 the family at n = 3 still admits x = 1/2, z = 3/4, y = 1.
        let f = example_family(3, false);
        assert_eq!(propagate(&f.phi, f.v("x"), &Rational::new(1, 2)).unwrap(), Answer::Yes);
        let w: crate::formula::Assignment = [
            (f.v("x"), Rational::new(1, 2)),
            (f.v("y"), q(1)),
            (f.v("z"), Rational::new(3, 4)),
        ]
        .into_iter()
        .collect();
        assert!(f.phi.eval(&w).unwrap());
    }

    #[test]
    fn unknown_variable() {
        let f = F::new(&["x"]);
        assert!(matches!(propagate(&f.phi, VarId(7), &q(0)), Err(Error::UnknownVariable(_))));
    }

    #[test]
    fn redundancy_examples() {
        let mut f = F::new(&["x", "y"]);
        f.add(&[(&[("x", 1)], Rel::Ge, 2), (&[("y", 1)], Rel::Le, 3)]);
        let b = f.phi.bend(0);
        let x_box = Bound::finite(f.v("x"), Rel::Le, q(1)).interval();
        assert_eq!(redundant_literals(b, &x_box, &Interval::full()), vec![Slot::BoundX]);

        let mut f = F::new(&["x", "y"]);
        f.add(&[(&[("x", 1), ("y", 1)], Rel::Le, 4)]);
        assert!(redundant_literals(f.phi.bend(0), &Interval::full(), &Interval::full()).is_empty());

        let mut f = F::new(&["x"]);
        f.add(&[(&[("x", 1)], Rel::Le, 0), (&[("x", 1)], Rel::Ge, 1)]);
        let x_box = Bound::finite(f.v("x"), Rel::Ge, q(1)).interval();
        assert_eq!(redundant_literals(f.phi.bend(0), &x_box, &x_box), vec![Slot::BoundX]);
    }

    #[test]
    fn bounds_only_tighten() {
        let f = example_family(4, true);
        let (_, st) = run(&f.phi, &Bound::finite(f.v("x"), Rel::Ge, q(0))).unwrap();
        for rec in &st.log {
            assert_ne!(rec.bound.constant, ExtendedRational::PosInf);
        }
        let mut seen: std::collections::HashMap<(VarId, bool), Bound> = Default::default();
        for rec in &st.log {
            let key = (rec.var, rec.side == Side::Upper);
            if let Some(prev) = seen.get(&key) {
                assert!(bound_implies_unchecked(&rec.bound, prev));
            }
            seen.insert(key, rec.bound.clone());
        }
    }
}
