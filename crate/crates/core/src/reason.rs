//! Intervals and elementary bound reasoning: implication, conflict and the
//! strongest bound a bend forces on one variable given a box on the other.

use std::cmp::Ordering;
use std::fmt;

use crate::bend::{Bend, Bound, Literal, Rel, VarId};
use crate::error::Error;
use crate::num::{ExtendedRational, Rational};

/// One end of an interval. Infinite ends are always open.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Endpoint {
    pub value: ExtendedRational,
    pub open: bool,
}

impl Endpoint {
    pub fn new(value: ExtendedRational, open: bool) -> Endpoint {
        let open = open || !value.is_finite();
        Endpoint { value, open }
    }

    pub fn closed(q: Rational) -> Endpoint {
        Endpoint::new(ExtendedRational::Finite(q), false)
    }

    pub fn open(q: Rational) -> Endpoint {
        Endpoint::new(ExtendedRational::Finite(q), true)
    }

    pub fn unbounded_below() -> Endpoint {
        Endpoint::new(ExtendedRational::NegInf, true)
    }

    pub fn unbounded_above() -> Endpoint {
        Endpoint::new(ExtendedRational::PosInf, true)
    }

    pub fn finite_value(&self) -> Option<&Rational> {
        self.value.finite()
    }
}

/// Compares two lower ends: `Greater` means the first is tighter.
fn cmp_lower(a: &Endpoint, b: &Endpoint) -> Ordering {
    a.value.cmp(&b.value).then_with(|| a.open.cmp(&b.open))
}

/// Compares two upper ends: `Less` means the first is tighter.
fn cmp_upper(a: &Endpoint, b: &Endpoint) -> Ordering {
    a.value.cmp(&b.value).then_with(|| b.open.cmp(&a.open))
}

/// A convex subset of ℚ.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Interval {
    pub lo: Endpoint,
    pub hi: Endpoint,
}

impl Interval {
    pub fn new(lo: Endpoint, hi: Endpoint) -> Interval {
        Interval { lo, hi }
    }

    pub fn full() -> Interval {
        Interval::new(Endpoint::unbounded_below(), Endpoint::unbounded_above())
    }

    pub fn empty() -> Interval {
        Interval::new(Endpoint::unbounded_above(), Endpoint::unbounded_below())
    }

    pub fn point(q: Rational) -> Interval {
        Interval::new(Endpoint::closed(q.clone()), Endpoint::closed(q))
    }

    pub fn is_empty(&self) -> bool {
        match self.lo.value.cmp(&self.hi.value) {
            Ordering::Greater => true,
            Ordering::Equal => self.lo.open || self.hi.open,
            Ordering::Less => false,
        }
    }

    pub fn is_full(&self) -> bool {
        self.lo.value == ExtendedRational::NegInf && self.hi.value == ExtendedRational::PosInf
    }

    pub fn contains(&self, q: &Rational) -> bool {
        let v = ExtendedRational::Finite(q.clone());
        let above = match v.cmp(&self.lo.value) {
            Ordering::Greater => true,
            Ordering::Equal => !self.lo.open,
            Ordering::Less => false,
        };
        let below = match v.cmp(&self.hi.value) {
            Ordering::Less => true,
            Ordering::Equal => !self.hi.open,
            Ordering::Greater => false,
        };
        above && below
    }

    pub fn intersect(&self, other: &Interval) -> Interval {
        let lo = if cmp_lower(&self.lo, &other.lo) == Ordering::Less { &other.lo } else { &self.lo };
        let hi = if cmp_upper(&self.hi, &other.hi) == Ordering::Greater { &other.hi } else { &self.hi };
        Interval::new(lo.clone(), hi.clone())
    }

    /// Smallest interval containing both.
    pub fn hull(&self, other: &Interval) -> Interval {
        if self.is_empty() {
            return other.clone();
        }
        if other.is_empty() {
            return self.clone();
        }
        let lo = if cmp_lower(&self.lo, &other.lo) == Ordering::Greater { &other.lo } else { &self.lo };
        let hi = if cmp_upper(&self.hi, &other.hi) == Ordering::Less { &other.hi } else { &self.hi };
        Interval::new(lo.clone(), hi.clone())
    }

    pub fn is_subset_of(&self, other: &Interval) -> bool {
        self.is_empty()
            || (cmp_lower(&self.lo, &other.lo) != Ordering::Less
                && cmp_upper(&self.hi, &other.hi) != Ordering::Greater)
    }

    /// Whether the union of two intervals is all of ℚ.
    pub fn union_is_everything(&self, other: &Interval) -> bool {
        if self.is_full() || other.is_full() {
            return true;
        }
        // One must reach −∞ and the other +∞, and they must overlap or touch with a closed end.
        let (left, right) = if self.lo.value == ExtendedRational::NegInf {
            (self, other)
        } else {
            (other, self)
        };
        if left.lo.value != ExtendedRational::NegInf || right.hi.value != ExtendedRational::PosInf {
            return false;
        }
        if left.is_empty() || right.is_empty() {
            return false;
        }
        match left.hi.value.cmp(&right.lo.value) {
            Ordering::Greater => true,
            Ordering::Equal => !(left.hi.open && right.lo.open),
            Ordering::Less => false,
        }
    }

    /// `var ≥ lo` (or `var > lo`); trivial when unbounded below.
    pub fn lower_bound(&self, var: VarId) -> Bound {
        let rel = if self.lo.open { Rel::Gt } else { Rel::Ge };
        if self.lo.value == ExtendedRational::NegInf {
            return Bound::trivial(var, false);
        }
        Bound::new(var, rel, self.lo.value.clone())
    }

    /// `var ≤ hi` (or `var < hi`); trivial when unbounded above.
    pub fn upper_bound(&self, var: VarId) -> Bound {
        let rel = if self.hi.open { Rel::Lt } else { Rel::Le };
        if self.hi.value == ExtendedRational::PosInf {
            return Bound::trivial(var, true);
        }
        Bound::new(var, rel, self.hi.value.clone())
    }

    /// Some rational in the interval, preferring simple values:
    /// 0 if it fits, a closed end, the midpoint, or an end moved by one.
    pub fn pick(&self) -> Option<Rational> {
        if self.is_empty() {
            return None;
        }
        if self.contains(&Rational::zero()) && (self.is_full()) {
            return Some(Rational::zero());
        }
        match (self.lo.value.finite(), self.hi.value.finite()) {
            (Some(a), Some(b)) => {
                if a == b {
                    Some(a.clone())
                } else {
                    Some(a.midpoint(b))
                }
            }
            (Some(a), None) => Some(if self.lo.open { a + &Rational::one() } else { a.clone() }),
            (None, Some(b)) => Some(if self.hi.open { b - &Rational::one() } else { b.clone() }),
            (None, None) => Some(Rational::zero()),
        }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("{}");
        }
        let l = if self.lo.open { '(' } else { '[' };
        let r = if self.hi.open { ')' } else { ']' };
        write!(f, "{l}{}, {}{r}", self.lo.value, self.hi.value)
    }
}

/// Whether every rational satisfying `b1` satisfies `b2`.
pub fn bound_implies(b1: &Bound, b2: &Bound) -> Result<bool, Error> {
    if b1.var != b2.var {
        return Err(Error::DifferentVariables);
    }
    Ok(bound_implies_unchecked(b1, b2))
}

pub(crate) fn bound_implies_unchecked(b1: &Bound, b2: &Bound) -> bool {
    b1.interval().is_subset_of(&b2.interval())
}

/// Whether `lower ∧ upper` has no rational solution.
pub fn bounds_conflict(lower: &Bound, upper: &Bound) -> Result<bool, Error> {
    if lower.var != upper.var {
        return Err(Error::DifferentVariables);
    }
    Ok(lower.interval().intersect(&upper.interval()).is_empty())
}

/// Set of values of `v` for which `lit(u, v)` holds for some `u ∈ u_box`.
///
/// `lit` may only mention `u` and `v` (which may coincide).
pub fn literal_projection(lit: &Literal, u: VarId, u_box: &Interval, v: VarId) -> Interval {
    if u_box.is_empty() {
        return Interval::empty();
    }
    match lit {
        Literal::Bound(b) if b.var == v && u == v => b.interval().intersect(u_box),
        Literal::Bound(b) if b.var == v => b.interval(),
        Literal::Bound(b) => {
            if b.interval().intersect(u_box).is_empty() {
                Interval::empty()
            } else {
                Interval::full()
            }
        }
        Literal::Ineq(t) => {
            let (a, b) = if t.var_x == u {
                (&t.coeff_x, &t.coeff_y)
            } else {
                (&t.coeff_y, &t.coeff_x)
            };
            let c = match &t.constant {
                ExtendedRational::Finite(c) => c,
                ExtendedRational::PosInf => return Interval::full(),
                ExtendedRational::NegInf => return Interval::empty(),
            };
            // inf over u ∈ u_box of a·u, and whether it is attained.
            let end = if a.is_positive() { &u_box.lo } else { &u_box.hi };
            let Some(e) = end.value.finite() else {
                return Interval::full();
            };
            let m = a * e;
            let strict = t.strict || end.open;
            // b·v ∘ c − m
            let k = &(c - &m) / b;
            if b.is_positive() {
                Interval::new(Endpoint::unbounded_below(), Endpoint::new(ExtendedRational::Finite(k), strict))
            } else {
                Interval::new(Endpoint::new(ExtendedRational::Finite(k), strict), Endpoint::unbounded_above())
            }
        }
    }
}

/// Set of values of `v` compatible with `bend(u, v)` and `u ∈ u_box`, as an interval hull.
pub fn implied_interval(bend: &Bend, u_box: &Interval, target: VarId) -> Result<Interval, Error> {
    let u = other_variable(bend, target)?;
    let mut hull = Interval::empty();
    for (_, lit) in bend.literals() {
        if let Literal::Bound(b) = &lit {
            if b.is_trivially_true() {
                return Ok(if u == target { u_box.clone() } else if u_box.is_empty() { Interval::empty() } else { Interval::full() });
            }
        }
        hull = hull.hull(&literal_projection(&lit, u, u_box, target));
    }
    Ok(hull)
}

/// The variable of `bend` other than `target` (or `target` itself for one-variable bends).
pub fn other_variable(bend: &Bend, target: VarId) -> Result<VarId, Error> {
    if bend.x() == target {
        Ok(bend.y())
    } else if bend.y() == target {
        Ok(bend.x())
    } else {
        Err(Error::VariableMismatch)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Lower,
    Upper,
}

/// Strongest bound on `target` in direction `side` implied by
/// `lower(u) ∧ upper(u) ∧ bend(u, target)`.
///
/// Returns the trivial bound if nothing is implied, and an unsatisfiable bound
/// if the conjunction has no solution.
pub fn strongest_bound(
    bend: &Bend,
    lower: &Bound,
    upper: &Bound,
    target: VarId,
    side: Side,
) -> Result<Bound, Error> {
    let u = other_variable(bend, target)?;
    if lower.var != u || upper.var != u {
        return Err(Error::VariableMismatch);
    }
    let u_box = lower.interval().intersect(&upper.interval());
    let iv = implied_interval(bend, &u_box, target)?;
    Ok(match (side, iv.is_empty()) {
        (Side::Upper, true) => Bound::unsatisfiable(target, true),
        (Side::Lower, true) => Bound::unsatisfiable(target, false),
        (Side::Upper, false) => iv.upper_bound(target),
        (Side::Lower, false) => iv.lower_bound(target),
    })
}
