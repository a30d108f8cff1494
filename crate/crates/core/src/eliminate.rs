//! The decision procedure: pick a variable, locate the strip of its
//! breakpoints that contains a solution (if any), fix one disjunct per bend on
//! that strip, and eliminate the variable by Fourier–Motzkin.
//!
//! The strip is found by binary search with [`propagate`](crate::propagate).
//! A solution may sit exactly on the left breakpoint while the open strip to
//! its right is empty, so that point is tested separately and, if it is
//! feasible, the variable is substituted instead.

use std::collections::HashSet;

use rayon::prelude::*;

use crate::bend::{normalize_bend, Bend, BendKey, Bound, Literal, RawLiteral, Rel, Slot, VarId};
use crate::certify::{find_handcuff_refutation_with, SearchLimits};
use crate::error::Error;
use crate::formula::{Assignment, BijunctiveFormula};
use crate::linear::{satisfiable, Atom};
use crate::num::{ExtendedRational, Rational};
use crate::propagate::{propagate_bound, Answer};
use crate::reason::{Endpoint, Interval};
use crate::residue::HandcuffRefutation;

/// Sorted, deduplicated x-coordinates where the constraint lines on `var` meet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BreakpointList {
    pub var: VarId,
    pub points: Vec<Rational>,
}

/// Where the eliminated variable is confined.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Strip {
    /// The variable is fixed to this value.
    Point(Rational),
    /// `lo < x < hi`.
    Open { lo: ExtendedRational, hi: ExtendedRational },
}

impl Strip {
    pub fn full() -> Strip {
        Strip::Open {
            lo: ExtendedRational::NegInf,
            hi: ExtendedRational::PosInf,
        }
    }

    pub fn interval(&self) -> Interval {
        match self {
            Strip::Point(q) => Interval::point(q.clone()),
            Strip::Open { lo, hi } => Interval::new(Endpoint::new(lo.clone(), true), Endpoint::new(hi.clone(), true)),
        }
    }

    fn bounds(&self, x: VarId) -> Vec<Bound> {
        let iv = self.interval();
        [iv.lower_bound(x), iv.upper_bound(x)]
            .into_iter()
            .filter(|b| !b.is_trivially_true())
            .collect()
    }

    fn atoms(&self, x: VarId) -> Vec<Atom> {
        self.bounds(x).iter().map(Atom::from_bound).collect()
    }
}

/// Outcome of locating the strip for one variable.
#[derive(Debug, Clone, PartialEq)]
pub struct StripChoice {
    pub strip: Strip,
    /// For each bend on the variable (by index), the disjunct kept on the strip.
    /// Empty for a point strip.
    pub chosen: Vec<(usize, Slot)>,
    /// Number of PROPAGATE calls made.
    pub probes: usize,
}

/// What one elimination did, enough to extend a solution of the rest.
#[derive(Debug, Clone, PartialEq)]
pub struct EliminationRecord {
    pub var: VarId,
    pub strip: Strip,
    pub chosen: Vec<(usize, Slot)>,
    /// The fixed disjuncts on `var` that survived pruning. Together with the
    /// strip they imply every dropped one.
    pub retained: Vec<Literal>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SolveResult {
    Sat(Assignment),
    Unsat {
        trace: Vec<EliminationRecord>,
        refutation: Option<HandcuffRefutation>,
    },
}

impl SolveResult {
    pub fn is_sat(&self) -> bool {
        matches!(self, SolveResult::Sat(_))
    }

    pub fn witness(&self) -> Option<&Assignment> {
        match self {
            SolveResult::Sat(a) => Some(a),
            SolveResult::Unsat { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveOptions {
    /// Look for a handcuff refutation when the answer is UNSAT.
    pub certify: bool,
    pub handcuff_max_vars: usize,
    /// Check the witness against every bend before returning it.
    pub verify_witness: bool,
    /// Issue the binary-search probes concurrently.
    pub parallel: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            certify: true,
            handcuff_max_vars: 6,
            verify_witness: true,
            parallel: false,
        }
    }
}

/// x-coordinate of the intersection of `a₁x + b₁y = c₁` and `a₂x + b₂y = c₂`, if unique.
fn intersection_x(l1: &(Rational, Rational, Rational), l2: &(Rational, Rational, Rational)) -> Option<Rational> {
    let (a1, b1, c1) = l1;
    let (a2, b2, c2) = l2;
    let det = &(a1 * b2) - &(a2 * b1);
    if det.is_zero() {
        return None;
    }
    Some(&(&(c1 * b2) - &(c2 * b1)) / &det)
}

/// Lines `a·x + b·y = c` of the finite literals of `bend`, with `y` the other variable.
fn lines_of(bend: &Bend, x: VarId) -> Vec<(Rational, Rational, Rational)> {
    let mut out = Vec::new();
    for (_, lit) in bend.literals() {
        match lit {
            Literal::Ineq(t) => {
                if let Some(c) = t.constant.finite() {
                    let (a, b) = if t.var_x == x { (&t.coeff_x, &t.coeff_y) } else { (&t.coeff_y, &t.coeff_x) };
                    out.push((a.clone(), b.clone(), c.clone()));
                }
            }
            Literal::Bound(b) if b.var != x => {
                if let Some(c) = b.constant.finite() {
                    out.push((Rational::zero(), Rational::one(), c.clone()));
                }
            }
            Literal::Bound(_) => {}
        }
    }
    out
}

pub fn breakpoints(phi: &BijunctiveFormula, x: VarId) -> BreakpointList {
    let mut points = Vec::new();
    let mut by_neighbor: std::collections::BTreeMap<VarId, Vec<(Rational, Rational, Rational)>> = Default::default();
    for bend in phi.bends() {
        if !bend.mentions(x) {
            continue;
        }
        for (_, lit) in bend.literals() {
            if let Literal::Bound(b) = &lit {
                if b.var == x {
                    points.extend(b.constant.finite().cloned());
                }
            }
        }
        let vars = bend.vars();
        if let Some(&y) = vars.iter().find(|&&v| v != x) {
            by_neighbor.entry(y).or_default().extend(lines_of(bend, x));
        }
    }
    for lines in by_neighbor.values() {
        for i in 0..lines.len() {
            for j in i + 1..lines.len() {
                points.extend(intersection_x(&lines[i], &lines[j]));
            }
        }
    }
    points.sort();
    points.dedup();
    BreakpointList { var: x, points }
}

fn with_bound(phi: &BijunctiveFormula, b: Bound) -> BijunctiveFormula {
    let mut out = phi.clone();
    out.push(Bend::from_bound(b)).expect("variable belongs to the formula");
    out
}

/// Index of the largest entry of `points` (1-based, 0 for none) at which
/// PROPAGATE answers YES for `x ≥ entry`.
fn search_largest_yes(phi: &BijunctiveFormula, x: VarId, points: &[Rational], parallel: bool) -> Result<(usize, usize), Error> {
    let probe = |i: usize| -> Result<bool, Error> {
        let q = Bound::finite(x, Rel::Ge, points[i - 1].clone());
        Ok(propagate_bound(phi, &q)? == Answer::Yes)
    };
    let (mut lo, mut hi) = (0usize, points.len());
    let mut probes = 0;
    if parallel {
        let width = rayon::current_num_threads().max(1);
        while lo < hi {
            let span = hi - lo;
            let picks: Vec<usize> = (1..=width.min(span))
                .map(|j| lo + (span * j).div_ceil(width.min(span)))
                .collect::<std::collections::BTreeSet<_>>()
                .into_iter()
                .collect();
            probes += picks.len();
            let answers: Vec<bool> = picks.par_iter().map(|&i| probe(i)).collect::<Result<_, _>>()?;
            let mut new_lo = lo;
            let mut new_hi = hi;
            for (&i, &yes) in picks.iter().zip(&answers) {
                if yes {
                    new_lo = i;
                } else {
                    new_hi = i - 1;
                    break;
                }
            }
            lo = new_lo;
            hi = new_hi.max(lo);
        }
    } else {
        while lo < hi {
            let mid = lo + (hi - lo).div_ceil(2);
            probes += 1;
            if probe(mid)? {
                lo = mid;
            } else {
                hi = mid - 1;
            }
        }
    }
    Ok((lo, probes))
}

/// Slots of `bend` in tie-break order: inequality, bound on `x`, other bound.
fn preference(bend: &Bend, x: VarId) -> Vec<Slot> {
    let mut slots: Vec<(u8, Slot)> = bend
        .literals()
        .map(|(slot, lit)| {
            let rank = match lit {
                Literal::Ineq(_) => 0,
                Literal::Bound(b) if b.var == x => 1,
                Literal::Bound(_) => 2,
            };
            (rank, slot)
        })
        .collect();
    slots.sort_by_key(|&(r, _)| r);
    slots.into_iter().map(|(_, s)| s).collect()
}

/// The disjunct of `bend` that contains every other disjunct within the strip.
fn dominant_disjunct(bend: &Bend, x: VarId, strip: &[Atom]) -> Option<Slot> {
    let lits: Vec<(Slot, Literal)> = bend.literals().collect();
    if lits.len() == 1 {
        return Some(lits[0].0);
    }
    preference(bend, x).into_iter().find(|&slot| {
        let psi = bend.literal(slot).expect("slot is present");
        let not_psi = Atom::negated_literal(&psi);
        lits.iter().filter(|(s, _)| *s != slot).all(|(_, other)| {
            let mut atoms = strip.to_vec();
            atoms.push(Atom::from_literal(other));
            atoms.push(not_psi.clone());
            !satisfiable(&atoms)
        })
    })
}

pub fn fix_strip(phi: &BijunctiveFormula, x: VarId, b: &BreakpointList, parallel: bool) -> Result<StripChoice, Error> {
    let (ell, mut probes) = search_largest_yes(phi, x, &b.points, parallel)?;
    if ell > 0 {
        let at = b.points[ell - 1].clone();
        let pinned = with_bound(phi, Bound::finite(x, Rel::Ge, at.clone()));
        probes += 1;
        if propagate_bound(&pinned, &Bound::finite(x, Rel::Le, at.clone()))? == Answer::Yes {
            return Ok(StripChoice {
                strip: Strip::Point(at),
                chosen: Vec::new(),
                probes,
            });
        }
    }
    let lo = if ell == 0 {
        ExtendedRational::NegInf
    } else {
        ExtendedRational::Finite(b.points[ell - 1].clone())
    };
    let hi = b.points.get(ell).cloned().map_or(ExtendedRational::PosInf, ExtendedRational::Finite);
    let strip = Strip::Open { lo, hi };
    let atoms = strip.atoms(x);
    let mut chosen = Vec::new();
    for (i, bend) in phi.bends().iter().enumerate() {
        if !bend.mentions(x) {
            continue;
        }
        let slot = dominant_disjunct(bend, x, &atoms).ok_or(Error::NoDisjunctDominates(i))?;
        chosen.push((i, slot));
    }
    Ok(StripChoice { strip, chosen, probes })
}

/// A constraint on `x` solved for `x`: `x ≤ slope·y + offset` (or `≥`, `<`, `>`).
#[derive(Debug, Clone, PartialEq)]
struct Solved {
    upper: bool,
    strict: bool,
    neighbor: Option<(VarId, Rational)>,
    offset: Rational,
}

enum Form {
    True,
    False,
    Solved(Solved),
}

fn solve_for(lit: &Literal, x: VarId) -> Result<Form, Error> {
    match lit {
        Literal::Bound(b) if b.var == x => {
            if b.is_trivially_true() {
                return Ok(Form::True);
            }
            let Some(d) = b.constant.finite() else {
                return Ok(Form::False);
            };
            Ok(Form::Solved(Solved {
                upper: b.is_upper(),
                strict: b.is_strict(),
                neighbor: None,
                offset: d.clone(),
            }))
        }
        Literal::Ineq(t) if t.var_x == x || t.var_y == x => {
            let (cx, y, cy) = if t.var_x == x {
                (&t.coeff_x, t.var_y, &t.coeff_y)
            } else {
                (&t.coeff_y, t.var_x, &t.coeff_x)
            };
            let c = match &t.constant {
                ExtendedRational::PosInf => return Ok(Form::True),
                ExtendedRational::NegInf => return Ok(Form::False),
                ExtendedRational::Finite(c) => c,
            };
            let inv = cx.recip();
            Ok(Form::Solved(Solved {
                upper: cx.is_positive(),
                strict: t.strict,
                neighbor: Some((y, -&(cy * &inv))),
                offset: c * &inv,
            }))
        }
        _ => Err(Error::NonTvpiInput),
    }
}

impl Solved {
    fn atom(&self, x: VarId) -> Atom {
        // x - slope·y ≤ offset, negated for a lower form.
        let mut terms = vec![(x, Rational::one())];
        if let Some((y, a)) = &self.neighbor {
            terms.push((*y, -a));
        }
        let a = Atom {
            terms,
            strict: self.strict,
            rhs: self.offset.clone(),
        };
        if self.upper {
            a
        } else {
            Atom {
                terms: a.terms.into_iter().map(|(v, c)| (v, -c)).collect(),
                strict: a.strict,
                rhs: -a.rhs,
            }
        }
    }

    fn neighbor_var(&self) -> Option<VarId> {
        self.neighbor.as_ref().map(|(v, _)| *v)
    }
}

/// Drops every constraint implied on the strip by another one on the same
/// neighbour. Lines on one neighbour do not cross inside the strip, so at most
/// two two-variable constraints per neighbour survive.
fn prune<T>(forms: Vec<(Solved, T)>, x: VarId, strip: &[Atom]) -> Vec<(Solved, T)> {
    let implies = |a: &Solved, b: &Solved| {
        let mut atoms = strip.to_vec();
        atoms.push(a.atom(x));
        atoms.push(b.atom(x).negated());
        !satisfiable(&atoms)
    };
    let mut kept: Vec<(Solved, T)> = Vec::new();
    for (f, tag) in forms {
        let near = |g: &Solved| g.neighbor_var() == f.neighbor_var();
        if kept.iter().any(|(k, _)| near(k) && implies(k, &f)) {
            continue;
        }
        kept.retain(|(k, _)| !(near(k) && implies(&f, k)));
        kept.push((f, tag));
    }
    kept
}

/// Combines every lower form on `x` with every upper form. The inputs must be
/// bounds on `x` or two-variable inequalities mentioning `x`.
pub fn fourier_motzkin_step(constraints: &[Literal], x: VarId) -> Result<Vec<Bend>, Error> {
    let mut forms = Vec::new();
    for lit in constraints {
        match solve_for(lit, x)? {
            Form::True => {}
            Form::False => return Ok(vec![Bend::bottom(x)]),
            Form::Solved(s) => forms.push(s),
        }
    }
    combine(&forms, x)
}

fn combine(forms: &[Solved], x: VarId) -> Result<Vec<Bend>, Error> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for lower in forms.iter().filter(|f| !f.upper) {
        for upper in forms.iter().filter(|f| f.upper) {
            // lower.slope·y₁ + lower.offset ∘ upper.slope·y₂ + upper.offset
            let mut terms = vec![(x, Rational::zero())];
            if let Some((y, a)) = &lower.neighbor {
                terms.push((*y, a.clone()));
            }
            if let Some((y, a)) = &upper.neighbor {
                terms.push((*y, -a));
            }
            let rel = if lower.strict || upper.strict { Rel::Lt } else { Rel::Le };
            let raw = RawLiteral::new(terms, rel, &upper.offset - &lower.offset);
            let bend = normalize_bend(&[raw])?;
            if bend.is_top() {
                continue;
            }
            if seen.insert(bend.key()) {
                out.push(bend);
            }
        }
    }
    Ok(out)
}

/// The bend with `x` replaced by the constant `value`.
fn substitute(bend: &Bend, x: VarId, value: &Rational) -> Result<Bend, Error> {
    let raws: Vec<RawLiteral> = bend
        .to_raw_literals()
        .into_iter()
        .map(|mut r| {
            let mut shift = Rational::zero();
            for (v, a) in r.terms.iter_mut() {
                if *v == x {
                    shift = &shift + &(&*a * value);
                    *a = Rational::zero();
                }
            }
            r.constant = match r.constant {
                ExtendedRational::Finite(c) => ExtendedRational::Finite(&c - &shift),
                inf => inf,
            };
            r
        })
        .collect();
    normalize_bend(&raws)
}

/// Chooses the next variable: fewest incident bends, then lowest index.
fn pick_variable(phi: &BijunctiveFormula, alive: &[VarId]) -> VarId {
    *alive
        .iter()
        .min_by_key(|&&v| (phi.bends().iter().filter(|b| b.mentions(v)).count(), v))
        .expect("at least one live variable")
}

/// Result of eliminating one variable.
#[derive(Debug, Clone)]
pub enum Reduced {
    /// An equisatisfiable formula without the variable.
    Formula(BijunctiveFormula, EliminationRecord),
    /// A bend became empty.
    Contradiction(EliminationRecord),
}

fn push_unique(out: &mut BijunctiveFormula, seen: &mut HashSet<BendKey>, bend: Bend) -> bool {
    if bend.is_bottom() {
        return false;
    }
    if !bend.is_top() && seen.insert(bend.key()) {
        out.push(bend).expect("variables are shared");
    }
    true
}

/// One round of the procedure: locate the strip for `x`, fix disjuncts and
/// eliminate `x`.
pub fn eliminate_variable(phi: &BijunctiveFormula, x: VarId, parallel: bool) -> Result<Reduced, Error> {
    let bps = breakpoints(phi, x);
    let choice = fix_strip(phi, x, &bps, parallel)?;
    let mut out = BijunctiveFormula::new();
    for name in phi.names() {
        out.var(name);
    }
    let mut seen = HashSet::new();
    let mut record = EliminationRecord {
        var: x,
        strip: choice.strip.clone(),
        chosen: choice.chosen.clone(),
        retained: Vec::new(),
    };
    match &choice.strip {
        Strip::Point(at) => {
            for bend in phi.bends() {
                let b = if bend.mentions(x) { substitute(bend, x, at)? } else { bend.clone() };
                if !push_unique(&mut out, &mut seen, b) {
                    return Ok(Reduced::Contradiction(record));
                }
            }
        }
        Strip::Open { .. } => {
            let strip_atoms = choice.strip.atoms(x);
            // The strip's own bounds are never pruned: a constraint that
            // misses the strip implies everything there, vacuously.
            let mut pruned: Vec<Solved> = Vec::new();
            for b in choice.strip.bounds(x) {
                if let Form::Solved(s) = solve_for(&Literal::Bound(b), x)? {
                    pruned.push(s);
                }
            }
            let mut forms: Vec<(Solved, Literal)> = Vec::new();
            let mut chosen = choice.chosen.iter().peekable();
            for (i, bend) in phi.bends().iter().enumerate() {
                if chosen.peek().map(|c| c.0) != Some(i) {
                    if !push_unique(&mut out, &mut seen, bend.clone()) {
                        return Ok(Reduced::Contradiction(record));
                    }
                    continue;
                }
                let (_, slot) = chosen.next().expect("peeked");
                let lit = bend.literal(*slot).expect("chosen slot is present");
                if !lit.mentions(x) {
                    let Literal::Bound(b) = lit else {
                        unreachable!("an inequality in a bend on x mentions x")
                    };
                    if !push_unique(&mut out, &mut seen, Bend::from_bound(b)) {
                        return Ok(Reduced::Contradiction(record));
                    }
                    continue;
                }
                match solve_for(&lit, x)? {
                    Form::True => {}
                    Form::False => return Ok(Reduced::Contradiction(record)),
                    Form::Solved(s) => forms.push((s, lit)),
                }
            }
            for (s, lit) in prune(forms, x, &strip_atoms) {
                pruned.push(s);
                record.retained.push(lit);
            }
            for bend in combine(&pruned, x)? {
                if !push_unique(&mut out, &mut seen, bend) {
                    return Ok(Reduced::Contradiction(record));
                }
            }
        }
    }
    Ok(Reduced::Formula(out, record))
}

/// Decides a formula whose bends mention at most one variable.
fn decide_single(phi: &BijunctiveFormula) -> Option<Assignment> {
    let mut consts: Vec<Rational> = Vec::new();
    let mut vars: Vec<VarId> = Vec::new();
    for bend in phi.bends() {
        if bend.is_bottom() {
            return None;
        }
        for (_, lit) in bend.literals() {
            if let Literal::Bound(b) = lit {
                consts.extend(b.constant.finite().cloned());
                vars.push(b.var);
            }
        }
    }
    vars.sort();
    vars.dedup();
    debug_assert!(vars.len() <= 1);
    consts.sort();
    consts.dedup();
    let mut candidates = consts.clone();
    candidates.extend(consts.windows(2).map(|w| w[0].midpoint(&w[1])));
    match (consts.first(), consts.last()) {
        (Some(lo), Some(hi)) => {
            candidates.push(lo - &Rational::one());
            candidates.push(hi + &Rational::one());
        }
        _ => candidates.push(Rational::zero()),
    }
    let Some(&v) = vars.first() else {
        return Some(Assignment::new());
    };
    candidates.into_iter().find_map(|q| {
        let a: Assignment = [(v, q)].into_iter().collect();
        phi.bends().iter().all(|b| b.eval_with(|w| a.get(w).cloned()).unwrap_or(false)).then_some(a)
    })
}

/// Extends `tail` to the eliminated variables, most recent first.
pub fn back_substitute(records: &[EliminationRecord], tail: &Assignment) -> Result<Assignment, Error> {
    let mut a = tail.clone();
    for rec in records.iter().rev() {
        let x = rec.var;
        let mut iv = rec.strip.interval();
        for lit in &rec.retained {
            let Form::Solved(s) = solve_for(lit, x)? else {
                continue;
            };
            let mut rhs = s.offset.clone();
            if let Some((y, slope)) = &s.neighbor {
                let yv = a.get(*y).ok_or(Error::UnassignedVariable((*y).into()))?;
                rhs = &rhs + &(slope * yv);
            }
            let b = Bound::finite(x, Rel::from_parts(s.upper, s.strict), rhs);
            iv = iv.intersect(&b.interval());
        }
        let value = iv.pick().ok_or(Error::EmptyInterval)?;
        a.set(x, value);
    }
    Ok(a)
}

pub fn solve(phi: &BijunctiveFormula) -> Result<SolveResult, Error> {
    solve_with(phi, &SolveOptions::default())
}

pub fn solve_with(phi: &BijunctiveFormula, opts: &SolveOptions) -> Result<SolveResult, Error> {
    let mut current = phi.clone();
    let mut alive: Vec<VarId> = phi.vars().collect();
    let mut trace: Vec<EliminationRecord> = Vec::new();
    let mut contradiction = current.bends().iter().any(Bend::is_bottom);

    while !contradiction && alive.len() > 1 {
        let x = pick_variable(&current, &alive);
        alive.retain(|&v| v != x);
        match eliminate_variable(&current, x, opts.parallel)? {
            Reduced::Formula(next, rec) => {
                trace.push(rec);
                current = next;
            }
            Reduced::Contradiction(rec) => {
                trace.push(rec);
                contradiction = true;
            }
        }
    }

    let tail = if contradiction { None } else { decide_single(&current) };
    let Some(mut tail) = tail else {
        let refutation = if opts.certify {
            certificate_for(phi, opts)
        } else {
            None
        };
        return Ok(SolveResult::Unsat { trace, refutation });
    };
    for v in &alive {
        if tail.get(*v).is_none() {
            tail.set(*v, Rational::zero());
        }
    }
    let witness = back_substitute(&trace, &tail)?;
    if opts.verify_witness && !(witness.is_total_for(phi) && phi.eval(&witness)?) {
        return Err(Error::WitnessRejected(format_assignment(phi, &witness)));
    }
    Ok(SolveResult::Sat(witness))
}

fn certificate_for(phi: &BijunctiveFormula, opts: &SolveOptions) -> Option<HandcuffRefutation> {
    let tvpi = phi.bends().iter().all(Bend::is_tvpi_or_bound);
    if phi.num_vars() > opts.handcuff_max_vars && !tvpi {
        return None;
    }
    let limits = SearchLimits {
        max_len: phi.num_vars(),
        max_vars: if tvpi { phi.num_vars() } else { opts.handcuff_max_vars },
        ..SearchLimits::default()
    };
    find_handcuff_refutation_with(phi, &limits).ok().flatten()
}

fn format_assignment(phi: &BijunctiveFormula, a: &Assignment) -> String {
    a.iter()
        .map(|(v, q)| format!("{}={q}", phi.name(v)))
        .collect::<Vec<_>>()
        .join(", ")
}
