//! Composition of bends along a shared variable, residues of paths and
//! cycles, and handcuffs.
//!
//! `∃q (φ₁(p, q) ∧ φ₂(q, r))` is again a bend over `(p, r)`. Splitting each
//! bend into its bound on the left variable, its inequality and its bound on
//! the right variable, the existential distributes over the nine pairs of
//! disjuncts; each pair either vanishes, is subsumed, or yields one bound or
//! one inequality.

use std::collections::BTreeSet;

use crate::bend::{normalize_bend, Bend, Bound, Literal, RawLiteral, Slot, TvpiIneq, VarId};
use crate::error::Error;
use crate::linear::{satisfiable, Atom};
use crate::num::{ExtendedRational, Rational};
use crate::reason::{bound_implies_unchecked, literal_projection};

/// The literal of an input walk a residue bound derives from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LiteralSource {
    /// Position of the bend in the walk.
    pub step: usize,
    pub literal_id: u32,
}

/// A residue bend together with the origin of each of its bound literals.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidueBend {
    pub bend: Bend,
    sources: [Option<LiteralSource>; 3],
}

impl ResidueBend {
    pub fn source(&self, slot: Slot) -> Option<LiteralSource> {
        self.sources[slot_index(slot)]
    }

    /// Source of the bound literal on `var`, if any.
    pub fn source_of_bound(&self, var: VarId, upper: bool) -> Option<LiteralSource> {
        for (slot, lit) in self.bend.literals() {
            if let Literal::Bound(b) = lit {
                if b.var == var && b.is_upper() == upper {
                    return self.source(slot);
                }
            }
        }
        None
    }

    /// Every recorded source with its slot.
    pub fn sources(&self) -> impl Iterator<Item = (Slot, LiteralSource)> + '_ {
        Slot::ALL.into_iter().filter_map(|s| self.source(s).map(|src| (s, src)))
    }

    fn plain(bend: Bend) -> ResidueBend {
        ResidueBend {
            bend,
            sources: [None; 3],
        }
    }

    /// A single walk bend as its own residue.
    fn of_step(bend: &Bend, step: usize) -> ResidueBend {
        let mut sources = [None; 3];
        for (slot, lit) in bend.literals() {
            if matches!(lit, Literal::Bound(ref b) if !b.is_trivially_true()) {
                sources[slot_index(slot)] = Some(LiteralSource {
                    step,
                    literal_id: bend.literal_id(slot),
                });
            }
        }
        ResidueBend {
            bend: bend.clone(),
            sources,
        }
    }
}

fn slot_index(slot: Slot) -> usize {
    match slot {
        Slot::BoundX => 0,
        Slot::Ineq => 1,
        Slot::BoundY => 2,
    }
}

/// One bend of a walk, read from `from` to `to`.
#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub bend: Bend,
    pub from: VarId,
    pub to: VarId,
}

impl Step {
    /// Orients `bend` from `from` to `to`. The bend may only mention those variables.
    pub fn new(bend: &Bend, from: VarId, to: VarId) -> Result<Step, Error> {
        if bend.vars().iter().any(|&v| v != from && v != to) {
            return Err(Error::VariableMismatch);
        }
        let bend = if bend.x() == to && bend.y() == from && from != to {
            bend.reversed()
        } else {
            bend.clone()
        };
        Ok(Step { bend, from, to })
    }

    pub fn reversed(&self) -> Step {
        Step {
            bend: self.bend.reversed(),
            from: self.to,
            to: self.from,
        }
    }
}

/// A sequence of bends chained through shared variables.
#[derive(Debug, Clone, PartialEq)]
pub struct Walk {
    pub start: VarId,
    pub steps: Vec<Step>,
}

impl Walk {
    pub fn empty(start: VarId) -> Walk {
        Walk {
            start,
            steps: Vec::new(),
        }
    }

    pub fn from_steps(start: VarId, steps: Vec<Step>) -> Result<Walk, Error> {
        let mut at = start;
        for (i, s) in steps.iter().enumerate() {
            if s.from != at {
                return Err(Error::NotAPath(format!("step {i} starts at {} but the walk is at {at}", s.from)));
            }
            at = s.to;
        }
        Ok(Walk { start, steps })
    }

    pub fn end(&self) -> VarId {
        self.steps.last().map_or(self.start, |s| s.to)
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// `x₀, x₁, …, x_k`.
    pub fn vertices(&self) -> Vec<VarId> {
        std::iter::once(self.start).chain(self.steps.iter().map(|s| s.to)).collect()
    }

    pub fn reversed(&self) -> Walk {
        Walk {
            start: self.end(),
            steps: self.steps.iter().rev().map(Step::reversed).collect(),
        }
    }

    pub fn is_path(&self) -> bool {
        let vs = self.vertices();
        vs.iter().collect::<BTreeSet<_>>().len() == vs.len()
    }

    pub fn is_closed_cycle(&self) -> bool {
        let vs = self.vertices();
        if vs.len() < 3 || vs[0] != vs[vs.len() - 1] {
            return false;
        }
        let inner = &vs[..vs.len() - 1];
        inner.iter().collect::<BTreeSet<_>>().len() == inner.len()
    }
}

/// A walk whose vertices are pairwise distinct.
#[derive(Debug, Clone, PartialEq)]
pub struct Path(Walk);

impl Path {
    pub fn new(walk: Walk) -> Result<Path, Error> {
        if !walk.is_path() {
            return Err(Error::NotAPath("a vertex repeats".into()));
        }
        Ok(Path(walk))
    }

    pub fn empty(at: VarId) -> Path {
        Path(Walk::empty(at))
    }

    pub fn walk(&self) -> &Walk {
        &self.0
    }

    pub fn start(&self) -> VarId {
        self.0.start
    }

    pub fn end(&self) -> VarId {
        self.0.end()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn reversed(&self) -> Path {
        Path(self.0.reversed())
    }

    pub fn vertices(&self) -> Vec<VarId> {
        self.0.vertices()
    }
}

/// A closed walk `x₀ → … → x₀` with distinct inner vertices, or a single
/// one-variable bend at `x₀` (length 0).
#[derive(Debug, Clone, PartialEq)]
pub enum Cycle {
    Loop { at: VarId, bend: Bend },
    Closed(Walk),
}

impl Cycle {
    pub fn new(walk: Walk) -> Result<Cycle, Error> {
        if !walk.is_closed_cycle() {
            return Err(Error::NotACycle(
                "a cycle must return to its start with distinct inner vertices and length at least 2".into(),
            ));
        }
        Ok(Cycle::Closed(walk))
    }

    pub fn loop_at(at: VarId, bend: Bend) -> Result<Cycle, Error> {
        if bend.vars().iter().any(|&v| v != at) {
            return Err(Error::NotACycle(format!("length-0 cycle bend {bend} mentions a variable other than {at}")));
        }
        Ok(Cycle::Loop { at, bend })
    }

    pub fn at(&self) -> VarId {
        match self {
            Cycle::Loop { at, .. } => *at,
            Cycle::Closed(w) => w.start,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Cycle::Loop { .. } => 0,
            Cycle::Closed(w) => w.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn vertices(&self) -> Vec<VarId> {
        match self {
            Cycle::Loop { at, .. } => vec![*at],
            Cycle::Closed(w) => {
                let mut vs = w.vertices();
                vs.pop();
                vs
            }
        }
    }

    /// Bends in order with their orientation.
    pub fn steps(&self) -> Vec<Step> {
        match self {
            Cycle::Loop { at, bend } => vec![Step {
                bend: bend.clone(),
                from: *at,
                to: *at,
            }],
            Cycle::Closed(w) => w.steps.clone(),
        }
    }
}

/// Splits a bend read from `p` to `q` into its bound on `p`, its inequality
/// oriented as `(p, q)`, and its bound on `q`, with slots.
type Parts = (Option<(Bound, Slot)>, Option<TvpiIneq>, Option<(Bound, Slot)>);

fn parts(bend: &Bend, p: VarId, q: VarId) -> Result<Parts, Error> {
    let (mut left, mut ineq, mut right) = (None, None, None);
    for (slot, lit) in bend.literals() {
        match lit {
            Literal::Bound(b) => {
                let target = if b.var == p { &mut left } else { &mut right };
                if target.is_some() {
                    return Err(Error::NonBendResidue(format!(
                        "{bend} has two bounds on {} and cannot be a step of a walk",
                        b.var
                    )));
                }
                *target = Some((b, slot));
            }
            Literal::Ineq(t) => {
                ineq = Some(if t.var_x == p { t } else { t.reversed() });
                debug_assert_eq!(ineq.as_ref().unwrap().var_y, q);
            }
        }
    }
    Ok((left, ineq, right))
}

/// `∃q (φ₁(p, q) ∧ φ₂(q, r))` with sources, for `p`, `q`, `r` pairwise distinct.
fn compose_tracked(
    r1: &ResidueBend,
    p: VarId,
    q: VarId,
    r2: &ResidueBend,
    r: VarId,
) -> Result<ResidueBend, Error> {
    let (phi1, phi2) = (&r1.bend, &r2.bend);
    if phi1.is_bottom() || phi2.is_bottom() {
        return Ok(ResidueBend::plain(Bend::bottom(p).with_scope(p, r)));
    }
    let top = || ResidueBend::plain(Bend::top(p).with_scope(p, r));
    let (a1, l1, g1) = if phi1.is_top() { (None, None, None) } else { parts(phi1, p, q)? };
    let (a2, l2, g2) = if phi2.is_top() { (None, None, None) } else { parts(phi2, q, r)? };
    // ⊤ acts as a literal on q: it makes the other side's q-literals disappear.
    let q_in_1 = phi1.is_top() || l1.is_some() || g1.is_some();
    let q_in_2 = phi2.is_top() || a2.is_some() || l2.is_some();
    if phi1.is_top() && phi2.is_top() {
        return Ok(top());
    }
    if !q_in_1 && !q_in_2 {
        return Err(Error::NonBendResidue(format!(
            "neither {phi1} nor {phi2} constrains the shared variable {q}"
        )));
    }
    if (phi1.is_top() && q_in_2) || (phi2.is_top() && q_in_1) {
        return Ok(top());
    }

    let mut left: Vec<(Bound, Option<LiteralSource>)> = Vec::new();
    let mut right: Vec<(Bound, Option<LiteralSource>)> = Vec::new();
    let mut ineq: Option<TvpiIneq> = None;

    if q_in_2 {
        if let Some((b, s)) = &a1 {
            left.push((b.clone(), r1.source(*s)));
        }
    }
    if let (Some((b1, _)), Some((b2, _))) = (&g1, &a2) {
        if !b1.interval().intersect(&b2.interval()).is_empty() {
            return Ok(top());
        }
    }
    if let (Some(t), Some((b, s))) = (&l1, &a2) {
        let iv = literal_projection(&Literal::Ineq(t.clone()), q, &b.interval(), p);
        if iv.is_full() {
            return Ok(top());
        }
        if !iv.is_empty() {
            let bound = if iv.lo.value == ExtendedRational::NegInf { iv.upper_bound(p) } else { iv.lower_bound(p) };
            left.push((bound, r2.source(*s)));
        }
    }
    if let (Some(t1), Some(t2)) = (&l1, &l2) {
        let (b1, a2c) = (&t1.coeff_y, &t2.coeff_x);
        if b1.is_positive() == a2c.is_positive() {
            return Ok(top());
        }
        let (a, b) = (Atom::from_ineq(t1), Atom::from_ineq(t2));
        let atom = if b1.is_positive() { a.resolve(&b, q) } else { b.resolve(&a, q) };
        let cp = atom.coeff(p);
        let cr = atom.coeff(r);
        ineq = Some(TvpiIneq::new(p, cp, r, cr, atom.strict, atom.rhs)?);
    }
    if let (Some((b, s)), Some(t)) = (&g1, &l2) {
        let iv = literal_projection(&Literal::Ineq(t.clone()), q, &b.interval(), r);
        if iv.is_full() {
            return Ok(top());
        }
        if !iv.is_empty() {
            let bound = if iv.lo.value == ExtendedRational::NegInf { iv.upper_bound(r) } else { iv.lower_bound(r) };
            right.push((bound, r1.source(*s)));
        }
    }
    if q_in_1 {
        if let Some((b, s)) = &g2 {
            right.push((b.clone(), r2.source(*s)));
        }
    }

    let left = merge_rays(left, p);
    let right = merge_rays(right, r);
    let (Some(left), Some(right)) = (left, right) else {
        return Ok(top());
    };
    if left.len() > 1 || right.len() > 1 {
        return Err(Error::NonBendResidue("bounds on one variable in both directions".into()));
    }
    let (bx, sx) = left.into_iter().next().map_or((None, None), |(b, s)| (Some(b), s));
    let (by, sy) = right.into_iter().next().map_or((None, None), |(b, s)| (Some(b), s));
    let bend = Bend::assemble(p, r, bx, ineq, by, [0, 1, 2])?;
    if bend.is_top() {
        return Ok(ResidueBend::plain(bend));
    }
    Ok(ResidueBend {
        sources: [
            bend.bound_x().and(sx),
            None,
            bend.bound_y().and(sy),
        ],
        bend,
    })
}

/// Disjunction of bounds on one variable, keeping per direction the weakest
/// (the first on ties). `None` means the disjunction is a tautology.
fn merge_rays(
    rays: Vec<(Bound, Option<LiteralSource>)>,
    var: VarId,
) -> Option<Vec<(Bound, Option<LiteralSource>)>> {
    let mut upper: Option<(Bound, Option<LiteralSource>)> = None;
    let mut lower: Option<(Bound, Option<LiteralSource>)> = None;
    for (b, s) in rays {
        debug_assert_eq!(b.var, var);
        if b.is_unsatisfiable() {
            continue;
        }
        if b.is_trivially_true() {
            return None;
        }
        let slot = if b.is_upper() { &mut upper } else { &mut lower };
        match slot {
            Some((kept, _)) if bound_implies_unchecked(&b, kept) => {}
            _ => *slot = Some((b, s)),
        }
    }
    if let (Some((u, _)), Some((l, _))) = (&upper, &lower) {
        if u.interval().union_is_everything(&l.interval()) {
            return None;
        }
    }
    Some(upper.into_iter().chain(lower).collect())
}

/// Composes `phi1` over `(x0, x1)` with `phi2` over `(x1, x2)`.
///
/// `phi2` may be given in either orientation. Sources refer to step 0 (`phi1`)
/// and step 1 (`phi2`).
pub fn compose_bends(phi1: &Bend, phi2: &Bend) -> Result<ResidueBend, Error> {
    let (p, q) = (phi1.x(), phi1.y());
    let phi2 = phi2.oriented(q, if phi2.x() == q { phi2.y() } else { phi2.x() }).ok_or(Error::VariableMismatch)?;
    let r = phi2.y();
    if p == q || q == r {
        return Err(Error::VariableMismatch);
    }
    if p == r {
        return Err(Error::SharedEndpoint);
    }
    compose_tracked(&ResidueBend::of_step(phi1, 0), p, q, &ResidueBend::of_step(&phi2, 1), r)
}

/// Residue of a path: the bend over its endpoints equivalent to quantifying
/// away the inner vertices. An empty path gives ⊤.
pub fn path_residue(path: &Path) -> Result<ResidueBend, Error> {
    walk_residue(path.walk())
}

fn walk_residue(walk: &Walk) -> Result<ResidueBend, Error> {
    let Some(first) = walk.steps.first() else {
        return Ok(ResidueBend::plain(Bend::top(walk.start)));
    };
    let mut acc = ResidueBend::of_step(&first.bend, 0);
    if acc.bend.is_top() {
        acc.bend = acc.bend.with_scope(first.from, first.to);
    }
    for (i, step) in walk.steps.iter().enumerate().skip(1) {
        acc = compose_tracked(&acc, walk.start, step.from, &ResidueBend::of_step(&step.bend, i), step.to)?;
    }
    Ok(acc)
}

/// Placeholder for the endpoint of a cycle opened into a path.
const OPENED: VarId = VarId(u32::MAX);

/// Residue of a cycle at `x`: a disjunction of an upper and a lower bound on `x`.
pub fn cycle_residue(cycle: &Cycle) -> Result<ResidueBend, Error> {
    let (x, walk) = match cycle {
        Cycle::Loop { at, bend } => {
            return Ok(ResidueBend::of_step(&bend.clone().with_scope(*at, *at), 0));
        }
        Cycle::Closed(w) => (w.start, w),
    };
    // Open the cycle into a path ending in a fresh copy of x, then identify the copies.
    let mut steps = walk.steps.clone();
    let last = steps.last_mut().expect("closed cycles are nonempty");
    last.bend = last.bend.renamed(last.from, OPENED)?;
    last.to = OPENED;
    let opened = walk_residue(&Walk { start: x, steps })?;
    close_residue(&opened, x)
}

/// Substitutes `x` for the opened endpoint of a path residue over `(x, OPENED)`.
fn close_residue(opened: &ResidueBend, x: VarId) -> Result<ResidueBend, Error> {
    let bend = &opened.bend;
    if bend.is_top() || bend.is_bottom() {
        let b = if bend.is_top() { Bend::top(x) } else { Bend::bottom(x) };
        return Ok(ResidueBend::plain(b));
    }
    let mut raw = Vec::new();
    let mut origin = Vec::new();
    for (slot, lit) in bend.literals() {
        let l = match lit {
            Literal::Bound(b) => RawLiteral::new(vec![(x, Rational::one())], b.rel, b.constant),
            Literal::Ineq(t) => {
                let rel = t.rel();
                RawLiteral::new(vec![(x, t.coeff_x), (x, t.coeff_y)], rel, t.constant)
            }
        };
        raw.push(l);
        origin.push(opened.source(slot));
    }
    let closed = normalize_bend(&raw)?;
    let mut sources = [None; 3];
    for (slot, _) in closed.literals() {
        sources[slot_index(slot)] = origin[closed.literal_id(slot) as usize];
    }
    if closed.is_top() {
        sources = [None; 3];
    }
    Ok(ResidueBend { bend: closed, sources })
}

/// A cycle at `x`, a path from `x` to `y` and a cycle at `y`.
///
/// The cycles are disjoint and meet the path only at its ends. With an empty
/// path (`x = y`) the two cycles share exactly `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct Handcuff {
    pub cycle_c: Cycle,
    pub path_p: Path,
    pub cycle_d: Cycle,
}

impl Handcuff {
    pub fn new(cycle_c: Cycle, path_p: Path, cycle_d: Cycle) -> Result<Handcuff, Error> {
        let (x, y) = (path_p.start(), path_p.end());
        if cycle_c.at() != x {
            return Err(Error::NotACycle(format!("C is at {} but P starts at {x}", cycle_c.at())));
        }
        if cycle_d.at() != y {
            return Err(Error::NotACycle(format!("D is at {} but P ends at {y}", cycle_d.at())));
        }
        let c: BTreeSet<VarId> = cycle_c.vertices().into_iter().collect();
        let d: BTreeSet<VarId> = cycle_d.vertices().into_iter().collect();
        let p: BTreeSet<VarId> = path_p.vertices().into_iter().collect();
        let cd: Vec<_> = c.intersection(&d).copied().collect();
        let cd_ok = if x == y { cd == [x] } else { cd.is_empty() };
        if !cd_ok
            || c.intersection(&p).copied().collect::<Vec<_>>() != [x]
            || d.intersection(&p).copied().collect::<Vec<_>>() != [y]
        {
            return Err(Error::SharedEndpoint);
        }
        Ok(Handcuff { cycle_c, path_p, cycle_d })
    }

    /// All bends with their endpoints: C, then P, then D.
    pub fn steps(&self) -> Vec<Step> {
        let mut out = self.cycle_c.steps();
        out.extend(self.path_p.walk().steps.iter().cloned());
        out.extend(self.cycle_d.steps());
        out
    }

    pub fn vertices(&self) -> BTreeSet<VarId> {
        let mut vs: BTreeSet<VarId> = self.cycle_c.vertices().into_iter().collect();
        vs.extend(self.path_p.vertices());
        vs.extend(self.cycle_d.vertices());
        vs
    }

    pub fn total_len(&self) -> usize {
        self.cycle_c.len() + self.path_p.len() + self.cycle_d.len()
    }

    /// `(res_C, res_P, res_D)`.
    pub fn residues(&self) -> Result<(ResidueBend, ResidueBend, ResidueBend), Error> {
        Ok((
            cycle_residue(&self.cycle_c)?,
            path_residue(&self.path_p)?,
            cycle_residue(&self.cycle_d)?,
        ))
    }
}

/// Whether `res_C(x) ∧ res_P(x, y) ∧ res_D(y)` has no solution.
pub fn handcuff_unsat(h: &Handcuff) -> Result<bool, Error> {
    let (c, p, d) = h.residues()?;
    Ok(!bends_satisfiable(&[&c.bend, &p.bend, &d.bend]))
}

/// Decides a conjunction of a few bends by splitting on disjuncts.
pub fn bends_satisfiable(bends: &[&Bend]) -> bool {
    fn go(bends: &[&Bend], atoms: &mut Vec<Atom>) -> bool {
        let Some((first, rest)) = bends.split_first() else {
            return satisfiable(atoms);
        };
        if first.is_top() {
            return go(rest, atoms);
        }
        for (_, lit) in first.literals() {
            atoms.push(Atom::from_literal(&lit));
            let ok = satisfiable(atoms) && go(rest, atoms);
            atoms.pop();
            if ok {
                return true;
            }
        }
        false
    }
    go(bends, &mut Vec::new())
}

/// A homomorphism from a handcuff over local variables into a formula.
#[derive(Debug, Clone, PartialEq)]
pub struct HandcuffRefutation {
    pub handcuff: Handcuff,
    /// Local variable to formula variable.
    pub hom: std::collections::BTreeMap<VarId, VarId>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bend::Rel;
    use crate::reason::Interval;
    use proptest::prelude::*;

    fn q(n: i64) -> Rational {
        Rational::from(n)
    }
    fn v(i: u32) -> VarId {
        VarId(i)
    }

    /// Normalizes literals given as (terms, rel, constant).
    fn bend(lits: &[(&[(u32, i64)], Rel, i64)]) -> Bend {
        normalize_bend(
            &lits
                .iter()
                .map(|(t, r, c)| RawLiteral::new(t.iter().map(|&(x, a)| (v(x), q(a))).collect(), *r, q(*c)))
                .collect::<Vec<_>>(),
        )
        .unwrap()
    }

    fn step(b: &Bend, from: u32, to: u32) -> Step {
        Step::new(b, v(from), v(to)).unwrap()
    }

    fn path(start: u32, steps: Vec<Step>) -> Path {
        Path::new(Walk::from_steps(v(start), steps).unwrap()).unwrap()
    }

    fn cycle(start: u32, steps: Vec<Step>) -> Cycle {
        Cycle::new(Walk::from_steps(v(start), steps).unwrap()).unwrap()
    }

    #[test]
    fn compose_chain_of_inequalities() {
        let r = compose_bends(&bend(&[(&[(0, 1), (1, 1)], Rel::Le, 0)]), &bend(&[(&[(1, -1), (2, 1)], Rel::Le, 0)])).unwrap();
        assert_eq!(r.bend, bend(&[(&[(0, 1), (2, 1)], Rel::Le, 0)]));
        let r = compose_bends(&bend(&[(&[(0, 1), (1, 1)], Rel::Lt, 0)]), &bend(&[(&[(1, -1), (2, 1)], Rel::Le, 0)])).unwrap();
        assert_eq!(r.bend, bend(&[(&[(0, 1), (2, 1)], Rel::Lt, 0)]));
    }

    #[test]
    fn compose_keeps_outer_bound_with_source() {
        let phi1 = bend(&[(&[(0, 1)], Rel::Le, 5), (&[(0, 1), (1, 1)], Rel::Le, 0)]);
        let phi2 = bend(&[(&[(1, -1), (2, 1)], Rel::Le, 0)]);
        let r = compose_bends(&phi1, &phi2).unwrap();
        assert_eq!(r.bend, bend(&[(&[(0, 1)], Rel::Le, 5), (&[(0, 1), (2, 1)], Rel::Le, 0)]));
        assert_eq!(r.source_of_bound(v(0), true), Some(LiteralSource { step: 0, literal_id: 0 }));
    }

    #[test]
    fn compose_with_top() {
        let any = bend(&[(&[(1, -1), (2, 1)], Rel::Le, 0)]);
        assert!(compose_bends(&Bend::top(v(0)).with_scope(v(0), v(1)), &any).unwrap().bend.is_top());
    }

    #[test]
    fn compose_rejects_shared_endpoint() {
        let a = bend(&[(&[(0, 1), (1, 1)], Rel::Le, 0)]);
        let b = bend(&[(&[(1, 1), (0, -1)], Rel::Le, 0)]);
        assert_eq!(compose_bends(&a, &b), Err(Error::SharedEndpoint));
    }

    #[test]
    fn path_examples() {
        let single = bend(&[(&[(0, 1)], Rel::Le, 1), (&[(0, 1), (1, 1)], Rel::Le, 0)]);
        let r = path_residue(&path(0, vec![step(&single, 0, 1)])).unwrap();
        assert_eq!(r.bend, single);
        assert_eq!(r.source(Slot::BoundX), Some(LiteralSource { step: 0, literal_id: 0 }));

        let p = path(
            0,
            vec![
                step(&bend(&[(&[(0, 1), (1, 1)], Rel::Le, 0)]), 0, 1),
                step(&bend(&[(&[(1, -1), (2, 1)], Rel::Le, 0)]), 1, 2),
                step(&bend(&[(&[(2, -1), (3, 1)], Rel::Le, -1)]), 2, 3),
            ],
        );
        assert_eq!(path_residue(&p).unwrap().bend, bend(&[(&[(0, 1), (3, 1)], Rel::Le, -1)]));
        // With x2 − x3 ≤ −1 instead, both constraints bound x2 from above and x2 can escape to −∞.
        let p = path(
            0,
            vec![
                step(&bend(&[(&[(0, 1), (1, 1)], Rel::Le, 0)]), 0, 1),
                step(&bend(&[(&[(1, -1), (2, 1)], Rel::Le, 0)]), 1, 2),
                step(&bend(&[(&[(2, 1), (3, -1)], Rel::Le, -1)]), 2, 3),
            ],
        );
        assert!(path_residue(&p).unwrap().bend.is_top());

        let tops = Path::new(Walk {
            start: v(0),
            steps: vec![
                Step { bend: Bend::top(v(0)), from: v(0), to: v(1) },
                Step { bend: Bend::top(v(1)), from: v(1), to: v(2) },
            ],
        })
        .unwrap();
        assert!(path_residue(&tops).unwrap().bend.is_top());
        assert!(path_residue(&Path::empty(v(0))).unwrap().bend.is_top());
    }

    #[test]
    fn cycle_examples() {
        // 2x ≤ y, 2y ≤ x forces x ≤ 0.
        let c = cycle(
            0,
            vec![
                step(&bend(&[(&[(0, 2), (1, -1)], Rel::Le, 0)]), 0, 1),
                step(&bend(&[(&[(1, 2), (0, -1)], Rel::Le, 0)]), 1, 0),
            ],
        );
        assert_eq!(cycle_residue(&c).unwrap().bend, bend(&[(&[(0, 1)], Rel::Le, 0)]));

        let c = cycle(
            0,
            vec![
                step(&bend(&[(&[(0, 1), (1, -1)], Rel::Le, 0)]), 0, 1),
                step(&bend(&[(&[(1, 1), (0, -1)], Rel::Le, 0)]), 1, 0),
            ],
        );
        assert!(cycle_residue(&c).unwrap().bend.is_top());

        let gadget = bend(&[(&[(0, 1)], Rel::Le, 0), (&[(0, 1)], Rel::Ge, 1)]);
        let c = Cycle::loop_at(v(0), gadget.clone()).unwrap();
        assert_eq!(cycle_residue(&c).unwrap().bend, gadget);
    }

    fn doubling_cycle(at: u32, other: u32) -> Cycle {
        cycle(
            at,
            vec![
                step(&bend(&[(&[(at, 2), (other, -1)], Rel::Le, 0)]), at, other),
                step(&bend(&[(&[(other, 2), (at, -1)], Rel::Le, 0)]), other, at),
            ],
        )
    }

    #[test]
    fn handcuff_examples() {
        let h = Handcuff::new(
            Cycle::loop_at(v(0), bend(&[(&[(0, 1)], Rel::Ge, 1)])).unwrap(),
            Path::empty(v(0)),
            doubling_cycle(0, 1),
        )
        .unwrap();
        assert!(handcuff_unsat(&h).unwrap());

        let h = Handcuff::new(
            Cycle::loop_at(v(0), bend(&[(&[(0, 1)], Rel::Ge, 0)])).unwrap(),
            Path::empty(v(0)),
            Cycle::loop_at(v(0), bend(&[(&[(0, 1)], Rel::Le, 5)])).unwrap(),
        )
        .unwrap();
        assert!(!handcuff_unsat(&h).unwrap());
    }

    #[test]
    fn example_family_handcuff_after_removals() {
        // With n = 2: x > 0, y < 2, x < z < y and the bends (x ≥ i ∨ y ≤ i) reduced
        // to the literals that survive under x > 0, y < 2 give the path x → z → y
        // and the loops x > 0 (at x) and y < 2 (at y); the bend x ≥ 1 ∨ y ≤ 1 is
        // the path between them. Its residues conflict.
        let (x, y, z) = (0, 1, 2);
        let gadget = bend(&[(&[(x, 1)], Rel::Ge, 1), (&[(y, 1)], Rel::Le, 1)]);
        // x < z ∧ z < y ∧ (x ≥ 1 ∨ y ≤ 1) ∧ x > 0 ∧ y < 2 is satisfiable, but the
        // literal-removed chain (x ≥ 1 from bend i=1 when y > 1) is not:
        let h = Handcuff::new(
            Cycle::loop_at(v(x), bend(&[(&[(x, 1)], Rel::Lt, 1)])).unwrap(),
            path(x, vec![step(&bend(&[(&[(x, 1), (z, -1)], Rel::Lt, 0)]), x, z), step(&bend(&[(&[(z, 1), (y, -1)], Rel::Lt, 0)]), z, y)]),
            Cycle::loop_at(v(y), bend(&[(&[(y, 1)], Rel::Le, 1)])).unwrap(),
        )
        .unwrap();
        assert!(!handcuff_unsat(&h).unwrap());
        let h = Handcuff::new(
            Cycle::loop_at(v(x), bend(&[(&[(x, 1)], Rel::Ge, 1)])).unwrap(),
            path(x, vec![step(&bend(&[(&[(x, 1), (z, -1)], Rel::Lt, 0)]), x, z), step(&bend(&[(&[(z, 1), (y, -1)], Rel::Lt, 0)]), z, y)]),
            Cycle::loop_at(v(y), bend(&[(&[(y, 1)], Rel::Lt, 1)])).unwrap(),
        )
        .unwrap();
        assert!(handcuff_unsat(&h).unwrap());
        let _ = gadget;
    }

    #[test]
    fn handcuff_rejects_overlap() {
        let err = Handcuff::new(doubling_cycle(0, 1), path(0, vec![step(&bend(&[(&[(0, 1), (1, 1)], Rel::Le, 0)]), 0, 1)]), Cycle::loop_at(v(1), bend(&[(&[(1, 1)], Rel::Le, 0)])).unwrap());
        assert_eq!(err, Err(Error::SharedEndpoint));
    }

    // Independent check of ∃t (φ₁(u, t) ∧ φ₂(t, w)): for each disjunct pair, the set
    // of feasible t is an interval computed directly from the literals.
    fn feasible_t(phi1: &Bend, phi2: &Bend, u: &Rational, w: &Rational) -> bool {
        // Values of t allowed by lit once var = val; t is v(1).
        let fix = |lit: &Literal, var: VarId, val: &Rational| -> Interval {
            match lit {
                Literal::Bound(b) if b.var == v(1) => b.interval(),
                Literal::Bound(b) if b.holds(val) => Interval::full(),
                Literal::Bound(_) => Interval::empty(),
                Literal::Ineq(t) => {
                    let k = t.coeff_of(v(1)).unwrap();
                    let rest = t.coeff_of(var).unwrap() * val;
                    let c = t.constant.finite().unwrap();
                    let e = crate::reason::Endpoint::new(ExtendedRational::Finite(&(c - &rest) / k), t.strict);
                    if k.is_positive() {
                        Interval::new(crate::reason::Endpoint::unbounded_below(), e)
                    } else {
                        Interval::new(e, crate::reason::Endpoint::unbounded_above())
                    }
                }
            }
        };
        for (_, l1) in phi1.literals() {
            for (_, l2) in phi2.literals() {
                if !fix(&l1, v(0), u).intersect(&fix(&l2, v(2), w)).is_empty() {
                    return true;
                }
            }
        }
        false
    }

    fn small() -> impl Strategy<Value = i64> {
        -3i64..=3
    }

    fn arb_bend(p: u32, q: u32) -> impl Strategy<Value = Bend> {
        (small(), small(), small(), any::<bool>(), small(), small(), 0u8..8).prop_filter_map(
            "not a bend",
            move |(a, b, c, strict, d1, d2, mask)| {
                let mut lits = Vec::new();
                let rel = if strict { Rel::Lt } else { Rel::Le };
                if mask & 2 != 0 && a != 0 && b != 0 {
                    lits.push(RawLiteral::new(vec![(v(p), q_(a)), (v(q), q_(b))], rel, q_(c)));
                }
                let up_p = a > 0;
                let up_q = b > 0;
                if mask & 1 != 0 {
                    lits.push(RawLiteral::new(vec![(v(p), q_(1))], if up_p { Rel::Le } else { Rel::Gt }, q_(d1)));
                }
                if mask & 4 != 0 {
                    lits.push(RawLiteral::new(vec![(v(q), q_(1))], if up_q { Rel::Lt } else { Rel::Ge }, q_(d2)));
                }
                if lits.is_empty() {
                    return None;
                }
                let b = normalize_bend(&lits).ok()?;
                // Steps of a walk must constrain both ends.
                (b.mentions(v(p)) && b.mentions(v(q)) || b.is_top()).then_some(b)
            },
        )
    }

    fn q_(n: i64) -> Rational {
        q(n)
    }

    fn grid() -> Vec<Rational> {
        (-5..=5).map(|i| Rational::new(i, 2)).collect()
    }

    proptest! {
        #[test]
        fn composition_matches_existential(phi1 in arb_bend(0, 1), phi2 in arb_bend(1, 2)) {
            let phi1 = phi1.oriented(v(0), v(1)).unwrap_or(phi1);
            let r = compose_tracked(&ResidueBend::of_step(&phi1, 0), v(0), v(1), &ResidueBend::of_step(&phi2, 1), v(2));
            let r = match r { Ok(r) => r, Err(Error::NonBendResidue(_)) => return Ok(()), Err(e) => panic!("{e}") };
            for u in grid() {
                for w in grid() {
                    let val = |x: VarId| Some(if x == v(0) { u.clone() } else { w.clone() });
                    let got = r.bend.eval_with(val).unwrap();
                    prop_assert_eq!(got, feasible_t(&phi1, &phi2, &u, &w), "u={} w={} residue {}", u, w, r.bend);
                }
            }
        }

        #[test]
        fn reversal_commutes_with_residue(a in arb_bend(0, 1), b in arb_bend(1, 2), c in arb_bend(2, 3)) {
            let steps = vec![
                Step { bend: a.oriented(v(0), v(1)).unwrap_or(a), from: v(0), to: v(1) },
                Step { bend: b.oriented(v(1), v(2)).unwrap_or(b), from: v(1), to: v(2) },
                Step { bend: c.oriented(v(2), v(3)).unwrap_or(c), from: v(2), to: v(3) },
            ];
            let p = Path::new(Walk::from_steps(v(0), steps).unwrap()).unwrap();
            let (Ok(fwd), Ok(bwd)) = (path_residue(&p), path_residue(&p.reversed())) else { return Ok(()) };
            for u in grid() {
                for w in grid() {
                    let val = |x: VarId| Some(if x == v(0) { u.clone() } else { w.clone() });
                    prop_assert_eq!(fwd.bend.eval_with(val).unwrap(), bwd.bend.eval_with(val).unwrap());
                }
            }
        }

        #[test]
        fn sources_are_input_bounds(a in arb_bend(0, 1), b in arb_bend(1, 2), c in arb_bend(2, 3)) {
            let steps = vec![
                Step { bend: a.oriented(v(0), v(1)).unwrap_or(a), from: v(0), to: v(1) },
                Step { bend: b.oriented(v(1), v(2)).unwrap_or(b), from: v(1), to: v(2) },
                Step { bend: c.oriented(v(2), v(3)).unwrap_or(c), from: v(2), to: v(3) },
            ];
            let p = Path::new(Walk::from_steps(v(0), steps.clone()).unwrap()).unwrap();
            let Ok(res) = path_residue(&p) else { return Ok(()) };
            for (slot, src) in res.sources() {
                let origin = &steps[src.step].bend;
                let lit = Slot::ALL.into_iter()
                    .find(|&s| origin.literal(s).is_some() && origin.literal_id(s) == src.literal_id)
                    .and_then(|s| origin.literal(s));
                let Some(Literal::Bound(origin_bound)) = lit else {
                    return Err(TestCaseError::fail(format!("source {src:?} is not a bound")));
                };
                let Some(Literal::Bound(res_bound)) = res.bend.literal(slot) else { unreachable!() };
                // The source implies the residue bound where they share a variable.
                if origin_bound.var == res_bound.var {
                    prop_assert!(bound_implies_unchecked(&origin_bound, &res_bound));
                }
            }
        }

        #[test]
        fn cycle_residue_shape(a in arb_bend(0, 1), b in arb_bend(1, 2), c in arb_bend(2, 0)) {
            let steps = vec![
                Step { bend: a.oriented(v(0), v(1)).unwrap_or(a), from: v(0), to: v(1) },
                Step { bend: b.oriented(v(1), v(2)).unwrap_or(b), from: v(1), to: v(2) },
                Step { bend: c.oriented(v(2), v(0)).unwrap_or(c), from: v(2), to: v(0) },
            ];
            let c = Cycle::new(Walk::from_steps(v(0), steps).unwrap()).unwrap();
            let Ok(res) = cycle_residue(&c) else { return Ok(()) };
            prop_assert!(res.bend.ineq().is_none());
            prop_assert!(res.bend.vars().iter().all(|&x| x == v(0)));
            if let (Some(l), Some(u)) = (res.bend.bound_y(), res.bend.bound_x()) {
                prop_assert!(u.is_upper() && l.is_lower());
            }
        }
    }
}
