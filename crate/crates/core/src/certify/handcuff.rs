//! Bounded search for handcuff refutations, and the handcuff-consistency check.
//!
//! Walks are grown from every variable one step at a time. Only their
//! residues matter for extending them, so a walk is dropped when an earlier,
//! no longer walk to the same end has a residue at least as strong.

use std::collections::BTreeMap;

use crate::bend::{Bend, Slot, VarId};
use crate::error::Error;
use crate::formula::BijunctiveFormula;
use crate::linear::{satisfiable, Atom};
use crate::residue::{
    bends_satisfiable, compose_bends, handcuff_unsat, Cycle, Handcuff, HandcuffRefutation, Path, Step, Walk,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchLimits {
    /// Longest cycle or path; 0 means the number of variables.
    pub max_len: usize,
    /// Refuse formulas with more variables than this.
    pub max_vars: usize,
    /// Refuse after this many candidate handcuffs.
    pub max_checks: usize,
}

impl Default for SearchLimits {
    fn default() -> Self {
        SearchLimits {
            max_len: 0,
            max_vars: 6,
            max_checks: 5_000_000,
        }
    }
}

// Local variables used while composing; far from any formula variable.
const START: VarId = VarId(u32::MAX - 16);
const END: VarId = VarId(u32::MAX - 15);
const NEXT: VarId = VarId(u32::MAX - 14);

/// `(bend index, from, to)` in formula variables.
type Hop = (usize, VarId, VarId);

#[derive(Debug, Clone)]
struct Walked {
    hops: Vec<Hop>,
    /// Residue over `(START, END)`, or on `START` alone for a cycle.
    residue: Bend,
}

/// Whether every point of `a` satisfies `b`.
fn bend_implies(a: &Bend, b: &Bend) -> bool {
    if a.is_bottom() || b.is_top() {
        return true;
    }
    if a.is_top() {
        return false;
    }
    let negated: Vec<Atom> = b.literals().map(|(_, l)| Atom::negated_literal(&l)).collect();
    a.literals().all(|(_, l)| {
        let mut atoms = negated.clone();
        atoms.push(Atom::from_literal(&l));
        !satisfiable(&atoms)
    })
}

/// Adds `w` unless an equally short or shorter kept walk implies it; drops
/// the kept walks it implies that are at least as long.
fn insert_pareto(kept: &mut Vec<Walked>, w: Walked) -> bool {
    if kept
        .iter()
        .any(|k| k.hops.len() <= w.hops.len() && bend_implies(&k.residue, &w.residue))
    {
        return false;
    }
    kept.retain(|k| !(k.hops.len() >= w.hops.len() && bend_implies(&w.residue, &k.residue)));
    kept.push(w);
    true
}

fn step_bend(phi: &BijunctiveFormula, hop: &Hop, from: VarId, to: VarId) -> Option<Bend> {
    phi.bend(hop.0).oriented(hop.1, hop.2)?.renamed(from, to).ok()
}

fn extend(phi: &BijunctiveFormula, w: &Walked, hop: Hop) -> Option<Walked> {
    let step = step_bend(phi, &hop, END, NEXT)?;
    let composed = compose_bends(&w.residue.clone().with_scope(START, END), &step).ok()?.bend;
    if composed.is_top() {
        return None;
    }
    let residue = composed.renamed(START, END).ok()?;
    let mut hops = w.hops.clone();
    hops.push(hop);
    Some(Walked { hops, residue })
}

/// Identifies the two ends of a walk residue.
fn close(w: &Walked) -> Option<Walked> {
    let residue = w.residue.renamed(START, START).ok()?.with_scope(START, START);
    if residue.is_top() {
        return None;
    }
    Some(Walked {
        hops: w.hops.clone(),
        residue,
    })
}

/// Two-variable bends as hops in both directions, in input order.
fn hops_from(phi: &BijunctiveFormula, v: VarId) -> Vec<Hop> {
    let mut out = Vec::new();
    for (i, b) in phi.bends().iter().enumerate() {
        if b.is_one_variable() || b.is_top() {
            continue;
        }
        if b.x() == v {
            out.push((i, v, b.y()));
        } else if b.y() == v {
            out.push((i, v, b.x()));
        }
    }
    out
}

struct Tables {
    /// Cycles at each variable: loops (no hops) and closed walks.
    cycles: Vec<Vec<Walked>>,
    /// Walks between distinct variables, keyed by `(start, end)`.
    paths: BTreeMap<(VarId, VarId), Vec<Walked>>,
}

fn build_tables(phi: &BijunctiveFormula, max_len: usize) -> Tables {
    let n = phi.num_vars();
    let mut cycles: Vec<Vec<Walked>> = vec![Vec::new(); n];
    let mut paths: BTreeMap<(VarId, VarId), Vec<Walked>> = BTreeMap::new();
    for (i, b) in phi.bends().iter().enumerate() {
        if b.is_one_variable() && !b.is_top() {
            let at = b.x();
            let residue = b.renamed(START, START).expect("renaming a one-variable bend");
            insert_pareto(
                &mut cycles[at.index()],
                Walked {
                    hops: vec![(i, at, at)],
                    residue,
                },
            );
        }
    }
    for s in phi.vars() {
        let mut by_end: BTreeMap<VarId, Vec<Walked>> = BTreeMap::new();
        let mut frontier: Vec<(VarId, Walked)> = Vec::new();
        for hop in hops_from(phi, s) {
            let Some(residue) = step_bend(phi, &hop, START, END) else {
                continue;
            };
            let w = Walked {
                hops: vec![hop],
                residue,
            };
            if insert_pareto(by_end.entry(hop.2).or_default(), w.clone()) {
                frontier.push((hop.2, w));
            }
        }
        for _ in 1..max_len {
            let mut next = Vec::new();
            for (end, w) in &frontier {
                // A walk superseded since it was queued is not extended.
                if !by_end[end].iter().any(|k| k.hops == w.hops) {
                    continue;
                }
                for hop in hops_from(phi, *end) {
                    let Some(e) = extend(phi, w, hop) else {
                        continue;
                    };
                    if insert_pareto(by_end.entry(hop.2).or_default(), e.clone()) {
                        next.push((hop.2, e));
                    }
                }
            }
            frontier = next;
        }
        for (end, walks) in by_end {
            if end == s {
                for w in walks.iter().filter(|w| w.hops.len() >= 2) {
                    if let Some(c) = close(w) {
                        insert_pareto(&mut cycles[s.index()], c);
                    }
                }
            } else {
                paths.insert((s, end), walks);
            }
        }
    }
    for list in cycles.iter_mut() {
        list.sort_by_key(cycle_len);
    }
    for list in paths.values_mut() {
        list.sort_by_key(|w| w.hops.len());
    }
    Tables { cycles, paths }
}

fn cycle_len(w: &Walked) -> usize {
    if w.hops.len() == 1 && w.hops[0].1 == w.hops[0].2 {
        0
    } else {
        w.hops.len()
    }
}

/// Searches handcuffs with cycles and path of length at most the number of
/// variables, smallest total length first, then by start variable.
pub fn find_handcuff_refutation(phi: &BijunctiveFormula) -> Result<Option<HandcuffRefutation>, Error> {
    find_handcuff_refutation_with(phi, &SearchLimits::default())
}

pub fn find_handcuff_refutation_with(
    phi: &BijunctiveFormula,
    limits: &SearchLimits,
) -> Result<Option<HandcuffRefutation>, Error> {
    let n = phi.num_vars();
    if n > limits.max_vars {
        return Err(Error::BudgetExceeded(format!(
            "{n} variables exceed the handcuff search limit of {}",
            limits.max_vars
        )));
    }
    if let Some(i) = phi.bends().iter().position(Bend::is_bottom) {
        // An empty bend refutes on its own: a loop at its variable, twice.
        let at = phi.bend(i).x();
        let w = Walked {
            hops: vec![(i, at, at)],
            residue: Bend::bottom(START),
        };
        return Ok(Some(assemble(phi, at, &w, at, None, &w)?));
    }
    let max_len = if limits.max_len == 0 { n } else { limits.max_len };
    let tables = build_tables(phi, max_len);
    let mut checks = 0usize;
    let empty: Vec<Walked> = Vec::new();
    for total in 0..=3 * max_len {
        for x in phi.vars() {
            for c in &tables.cycles[x.index()] {
                let lc = cycle_len(c);
                if lc > total {
                    break;
                }
                for y in phi.vars() {
                    let (path_list, same) = if y == x {
                        (&empty, true)
                    } else {
                        (tables.paths.get(&(x, y)).unwrap_or(&empty), false)
                    };
                    let mut options: Vec<Option<&Walked>> = Vec::new();
                    if same {
                        options.push(None);
                    }
                    options.extend(path_list.iter().map(Some));
                    for p in options {
                        let lp = p.map_or(0, |w| w.hops.len());
                        if lc + lp > total {
                            break;
                        }
                        let want = total - lc - lp;
                        for d in tables.cycles[y.index()].iter().filter(|d| cycle_len(d) == want) {
                            checks += 1;
                            if checks > limits.max_checks {
                                return Err(Error::BudgetExceeded(format!("more than {} handcuffs", limits.max_checks)));
                            }
                            if residues_conflict(c, p, d) {
                                return Ok(Some(assemble(phi, x, c, y, p, d)?));
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(None)
}

fn residues_conflict(c: &Walked, p: Option<&Walked>, d: &Walked) -> bool {
    let cr = c.residue.clone();
    match p {
        None => !bends_satisfiable(&[&cr, &d.residue]),
        Some(p) => {
            let Ok(dr) = d.residue.renamed(END, END) else {
                return false;
            };
            let dr = dr.with_scope(END, END);
            !bends_satisfiable(&[&cr, &p.residue, &dr])
        }
    }
}

/// Builds the handcuff over fresh local variables and the map back into `phi`.
fn assemble(
    phi: &BijunctiveFormula,
    x: VarId,
    c: &Walked,
    y: VarId,
    p: Option<&Walked>,
    d: &Walked,
) -> Result<HandcuffRefutation, Error> {
    let mut hom: BTreeMap<VarId, VarId> = BTreeMap::new();
    let fresh = |target: VarId, hom: &mut BTreeMap<VarId, VarId>| {
        let v = VarId(hom.len() as u32);
        hom.insert(v, target);
        v
    };
    let lx = fresh(x, &mut hom);

    let cycle_at = |at_local: VarId, at: VarId, w: &Walked, hom: &mut BTreeMap<VarId, VarId>| -> Result<Cycle, Error> {
        if cycle_len(w) == 0 {
            let b = phi.bend(w.hops[0].0).renamed(at_local, at_local)?.with_scope(at_local, at_local);
            return Cycle::loop_at(at_local, b);
        }
        let mut steps = Vec::new();
        let mut cur = at_local;
        for (k, hop) in w.hops.iter().enumerate() {
            let next = if k + 1 == w.hops.len() { at_local } else { fresh(hop.2, hom) };
            let b = step_bend(phi, hop, cur, next).ok_or(Error::NotACycle("hop does not orient".into()))?;
            steps.push(Step::new(&b, cur, next)?);
            cur = next;
        }
        debug_assert_eq!(hom[&at_local], at);
        Cycle::new(Walk::from_steps(at_local, steps)?)
    };

    let cycle_c = cycle_at(lx, x, c, &mut hom)?;
    let (path_p, ly) = match p {
        None => (Path::empty(lx), lx),
        Some(p) => {
            let mut steps = Vec::new();
            let mut cur = lx;
            for hop in &p.hops {
                let next = fresh(hop.2, &mut hom);
                let b = step_bend(phi, hop, cur, next).ok_or(Error::NotAPath("hop does not orient".into()))?;
                steps.push(Step::new(&b, cur, next)?);
                cur = next;
            }
            (Path::new(Walk::from_steps(lx, steps)?)?, cur)
        }
    };
    let cycle_d = cycle_at(ly, y, d, &mut hom)?;
    let handcuff = Handcuff::new(cycle_c, path_p, cycle_d)?;
    debug_assert!(handcuff_unsat(&handcuff).unwrap_or(false));
    Ok(HandcuffRefutation { handcuff, hom })
}

/// A bend and bound whose replacement yields a refutable formula; `None`
/// for the formula itself.
#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencyViolation {
    pub replaced: Option<(usize, Slot)>,
    pub refutation: HandcuffRefutation,
}

/// Looks for a handcuff refutation of `phi` and of every `phi[φ/β]` with `β`
/// a bound literal of a bend `φ`.
pub fn handcuff_consistency_violation(
    phi: &BijunctiveFormula,
    limits: &SearchLimits,
) -> Result<Option<ConsistencyViolation>, Error> {
    if let Some(r) = find_handcuff_refutation_with(phi, limits)? {
        return Ok(Some(ConsistencyViolation {
            replaced: None,
            refutation: r,
        }));
    }
    for (i, bend) in phi.bends().iter().enumerate() {
        if bend.literal_count() < 2 {
            continue;
        }
        for (slot, lit) in bend.literals() {
            let Some(b) = lit.as_bound() else {
                continue;
            };
            let replaced = phi.replace_bend(i, Bend::from_bound(b.clone()));
            if let Some(r) = find_handcuff_refutation_with(&replaced, limits)? {
                return Ok(Some(ConsistencyViolation {
                    replaced: Some((i, slot)),
                    refutation: r,
                }));
            }
        }
    }
    Ok(None)
}

pub fn is_handcuff_consistent(phi: &BijunctiveFormula, limits: &SearchLimits) -> Result<bool, Error> {
    Ok(handcuff_consistency_violation(phi, limits)?.is_none())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse::parse;

    #[test]
    fn doubling_cycle_against_a_bound() {
        let phi = parse("-2 x + y >= 0\nx - 2 y >= 0\nx >= 1").unwrap();
        let cert = find_handcuff_refutation(&phi).unwrap().expect("refutable");
        let h = &cert.handcuff;
        assert_eq!(h.total_len(), 2);
        assert!(h.path_p.is_empty());
        let (c, d) = (h.cycle_c.len(), h.cycle_d.len());
        assert_eq!((c.min(d), c.max(d)), (0, 2));
        assert!(handcuff_unsat(h).unwrap());
    }

    #[test]
    fn satisfiable_formulas_have_none() {
        let phi = parse("x - y <= 0").unwrap();
        assert!(find_handcuff_refutation(&phi).unwrap().is_none());
        assert!(is_handcuff_consistent(&phi, &SearchLimits::default()).unwrap());
    }

    #[test]
    fn empty_bend_refutes_itself() {
        let phi = parse("x <= -inf").unwrap();
        assert!(find_handcuff_refutation(&phi).unwrap().is_some());
    }

    #[test]
    fn consistency_looks_at_bound_replacements() {
        // Only the gadget's x <= 0 branch conflicts with x >= 1/2.
        let phi = parse("x >= 1/2\nx <= 0 | x >= 1").unwrap();
        let v = handcuff_consistency_violation(&phi, &SearchLimits::default()).unwrap().unwrap();
        assert_eq!(v.replaced.map(|(i, _)| i), Some(1));
    }

    #[test]
    fn respects_the_variable_limit() {
        let phi = parse("a - b <= 0\nb - c <= 0\nc - d <= 0").unwrap();
        let limits = SearchLimits { max_vars: 3, ..SearchLimits::default() };
        assert!(matches!(find_handcuff_refutation_with(&phi, &limits), Err(Error::BudgetExceeded(_))));
    }
}
