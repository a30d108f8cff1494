//! Bounds, two-variable inequalities and bends.
//!
//! A bend is a disjunction `x ∘₁ d₁ ∨ a₁x + a₂y ∘ c ∨ y ∘₂ d₂` where the bound on
//! each variable points "up" exactly when that variable's coefficient is
//! positive. Absent disjuncts are `None`; the canonical tautology is the single
//! literal `x ≤ +∞`. Present literals otherwise always carry finite constants.

use std::fmt;

use crate::error::Error;
use crate::num::{ExtendedRational, Rational};
use crate::reason::{Endpoint, Interval};

/// Dense variable index. Names live in [`crate::formula::BijunctiveFormula`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub u32);

impl VarId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rel {
    Le,
    Lt,
    Ge,
    Gt,
}

impl Rel {
    pub fn from_parts(upper: bool, strict: bool) -> Rel {
        match (upper, strict) {
            (true, false) => Rel::Le,
            (true, true) => Rel::Lt,
            (false, false) => Rel::Ge,
            (false, true) => Rel::Gt,
        }
    }

    pub fn is_upper(self) -> bool {
        matches!(self, Rel::Le | Rel::Lt)
    }

    pub fn is_strict(self) -> bool {
        matches!(self, Rel::Lt | Rel::Gt)
    }

    /// The relation obtained by multiplying both sides by a negative number.
    pub fn flipped(self) -> Rel {
        Rel::from_parts(!self.is_upper(), self.is_strict())
    }

    pub fn negated(self) -> Rel {
        Rel::from_parts(!self.is_upper(), !self.is_strict())
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Rel::Le => "<=",
            Rel::Lt => "<",
            Rel::Ge => ">=",
            Rel::Gt => ">",
        }
    }

    /// Decides `lhs ∘ rhs` on the extended line.
    pub fn holds(self, lhs: &ExtendedRational, rhs: &ExtendedRational) -> bool {
        match self {
            Rel::Le => lhs <= rhs,
            Rel::Lt => lhs < rhs,
            Rel::Ge => lhs >= rhs,
            Rel::Gt => lhs > rhs,
        }
    }
}

/// `var ∘ constant`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Bound {
    pub var: VarId,
    pub rel: Rel,
    pub constant: ExtendedRational,
}

impl Bound {
    pub fn new(var: VarId, rel: Rel, constant: impl Into<ExtendedRational>) -> Bound {
        Bound {
            var,
            rel,
            constant: constant.into(),
        }
    }

    pub fn finite(var: VarId, rel: Rel, constant: Rational) -> Bound {
        Bound::new(var, rel, ExtendedRational::Finite(constant))
    }

    /// `var ≥ −∞` or `var ≤ +∞`, satisfied by everything.
    pub fn trivial(var: VarId, upper: bool) -> Bound {
        if upper {
            Bound::new(var, Rel::Le, ExtendedRational::PosInf)
        } else {
            Bound::new(var, Rel::Ge, ExtendedRational::NegInf)
        }
    }

    /// `var ≤ −∞` or `var ≥ +∞`, satisfied by nothing.
    pub fn unsatisfiable(var: VarId, upper: bool) -> Bound {
        if upper {
            Bound::new(var, Rel::Le, ExtendedRational::NegInf)
        } else {
            Bound::new(var, Rel::Ge, ExtendedRational::PosInf)
        }
    }

    pub fn is_upper(&self) -> bool {
        self.rel.is_upper()
    }

    pub fn is_lower(&self) -> bool {
        !self.rel.is_upper()
    }

    pub fn is_strict(&self) -> bool {
        self.rel.is_strict()
    }

    pub fn is_trivially_true(&self) -> bool {
        matches!(
            (&self.constant, self.is_upper()),
            (ExtendedRational::PosInf, true) | (ExtendedRational::NegInf, false)
        )
    }

    pub fn is_unsatisfiable(&self) -> bool {
        matches!(
            (&self.constant, self.is_upper()),
            (ExtendedRational::NegInf, true) | (ExtendedRational::PosInf, false)
        )
    }

    pub fn holds(&self, value: &Rational) -> bool {
        self.rel
            .holds(&ExtendedRational::Finite(value.clone()), &self.constant)
    }

    /// The set of rationals satisfying this bound.
    pub fn interval(&self) -> Interval {
        let end = Endpoint::new(self.constant.clone(), self.is_strict());
        if self.is_upper() {
            Interval::new(Endpoint::unbounded_below(), end)
        } else {
            Interval::new(end, Endpoint::unbounded_above())
        }
    }

    /// The complementary bound (`x ≤ d` becomes `x > d`).
    pub fn negation(&self) -> Bound {
        Bound::new(self.var, self.rel.negated(), self.constant.clone())
    }

    pub fn with_var(&self, var: VarId) -> Bound {
        Bound { var, ..self.clone() }
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.var, self.rel.symbol(), self.constant)
    }
}

/// `coeff_x·var_x + coeff_y·var_y ∘ constant` with `∘ ∈ {≤, <}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TvpiIneq {
    pub var_x: VarId,
    pub var_y: VarId,
    pub coeff_x: Rational,
    pub coeff_y: Rational,
    pub strict: bool,
    pub constant: ExtendedRational,
}

impl TvpiIneq {
    pub fn new(
        var_x: VarId,
        coeff_x: Rational,
        var_y: VarId,
        coeff_y: Rational,
        strict: bool,
        constant: impl Into<ExtendedRational>,
    ) -> Result<TvpiIneq, Error> {
        if var_x == var_y {
            return Err(Error::InvalidLiteral(
                "a two-variable inequality needs two distinct variables".into(),
            ));
        }
        if coeff_x.is_zero() || coeff_y.is_zero() {
            return Err(Error::InvalidLiteral(
                "a two-variable inequality needs nonzero coefficients".into(),
            ));
        }
        Ok(TvpiIneq {
            var_x,
            var_y,
            coeff_x,
            coeff_y,
            strict,
            constant: constant.into(),
        })
    }

    pub fn rel(&self) -> Rel {
        if self.strict {
            Rel::Lt
        } else {
            Rel::Le
        }
    }

    pub fn coeff_of(&self, v: VarId) -> Option<&Rational> {
        if v == self.var_x {
            Some(&self.coeff_x)
        } else if v == self.var_y {
            Some(&self.coeff_y)
        } else {
            None
        }
    }

    pub fn holds(&self, x: &Rational, y: &Rational) -> bool {
        let lhs = &(&self.coeff_x * x) + &(&self.coeff_y * y);
        self.rel().holds(&ExtendedRational::Finite(lhs), &self.constant)
    }

    pub fn reversed(&self) -> TvpiIneq {
        TvpiIneq {
            var_x: self.var_y,
            var_y: self.var_x,
            coeff_x: self.coeff_y.clone(),
            coeff_y: self.coeff_x.clone(),
            strict: self.strict,
            constant: self.constant.clone(),
        }
    }

    /// Positive rescaling so that `|coeff_x| = 1`.
    pub fn scaled_canonical(&self) -> TvpiIneq {
        let s = self.coeff_x.abs();
        if s == Rational::one() {
            return self.clone();
        }
        let inv = s.recip();
        TvpiIneq {
            var_x: self.var_x,
            var_y: self.var_y,
            coeff_x: &self.coeff_x * &inv,
            coeff_y: &self.coeff_y * &inv,
            strict: self.strict,
            constant: self.constant.scaled(&inv),
        }
    }
}

impl fmt::Display for TvpiIneq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} + {} {} {} {}",
            self.coeff_x,
            self.var_x,
            self.coeff_y,
            self.var_y,
            self.rel().symbol(),
            self.constant
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Literal {
    Bound(Bound),
    Ineq(TvpiIneq),
}

impl Literal {
    pub fn mentions(&self, v: VarId) -> bool {
        match self {
            Literal::Bound(b) => b.var == v,
            Literal::Ineq(t) => t.var_x == v || t.var_y == v,
        }
    }

    pub fn as_bound(&self) -> Option<&Bound> {
        match self {
            Literal::Bound(b) => Some(b),
            Literal::Ineq(_) => None,
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Bound(b) => b.fmt(f),
            Literal::Ineq(t) => t.fmt(f),
        }
    }
}

/// Position of a disjunct inside a bend.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Slot {
    BoundX,
    Ineq,
    BoundY,
}

impl Slot {
    pub const ALL: [Slot; 3] = [Slot::BoundX, Slot::Ineq, Slot::BoundY];

    fn index(self) -> usize {
        match self {
            Slot::BoundX => 0,
            Slot::Ineq => 1,
            Slot::BoundY => 2,
        }
    }
}

/// A linear (in)equality as written by a user: `Σ coeff·var ∘ constant`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawLiteral {
    pub terms: Vec<(VarId, Rational)>,
    pub rel: Rel,
    pub constant: ExtendedRational,
}

impl RawLiteral {
    pub fn new(terms: Vec<(VarId, Rational)>, rel: Rel, constant: impl Into<ExtendedRational>) -> Self {
        RawLiteral {
            terms,
            rel,
            constant: constant.into(),
        }
    }
}

/// A bend in canonical form. See the module docs for the shape.
#[derive(Clone)]
pub struct Bend {
    x: VarId,
    y: VarId,
    bound_x: Option<Bound>,
    ineq: Option<TvpiIneq>,
    bound_y: Option<Bound>,
    literal_ids: [u32; 3],
}

/// Orientation-free identity of a bend's solution set.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BendKey {
    Top,
    Literals(Vec<LiteralKey>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LiteralKey {
    Bound(VarId, Rel, ExtendedRational),
    Ineq(VarId, Rational, VarId, Rational, bool, ExtendedRational),
}

fn literal_key(lit: &Literal) -> LiteralKey {
    match lit {
        Literal::Bound(b) => LiteralKey::Bound(b.var, b.rel, b.constant.clone()),
        Literal::Ineq(t) => {
            let t = if t.var_x <= t.var_y { t.scaled_canonical() } else { t.reversed().scaled_canonical() };
            LiteralKey::Ineq(t.var_x, t.coeff_x, t.var_y, t.coeff_y, t.strict, t.constant)
        }
    }
}

impl Bend {
    /// The tautology, written `var ≤ +∞`.
    pub fn top(var: VarId) -> Bend {
        Bend {
            x: var,
            y: var,
            bound_x: Some(Bound::trivial(var, true)),
            ineq: None,
            bound_y: None,
            literal_ids: [0, 1, 2],
        }
    }

    /// The empty disjunction.
    pub fn bottom(var: VarId) -> Bend {
        Bend {
            x: var,
            y: var,
            bound_x: None,
            ineq: None,
            bound_y: None,
            literal_ids: [0, 1, 2],
        }
    }

    pub fn from_bound(b: Bound) -> Bend {
        Bend::assemble(b.var, b.var, Some(b), None, None, [0, 1, 2])
            .expect("a single bound is always a bend")
    }

    pub fn from_ineq(t: TvpiIneq) -> Bend {
        Bend::assemble(t.var_x, t.var_y, None, Some(t), None, [0, 1, 2])
            .expect("a single inequality is always a bend")
    }

    /// Builds a bend over `(x, y)` from its three optional disjuncts, checking
    /// the shape and putting it into canonical form.
    pub fn from_parts(
        x: VarId,
        y: VarId,
        bound_x: Option<Bound>,
        ineq: Option<TvpiIneq>,
        bound_y: Option<Bound>,
    ) -> Result<Bend, Error> {
        Bend::assemble(x, y, bound_x, ineq, bound_y, [0, 1, 2])
    }

    /// Canonicalization shared by every constructor. Literal ids follow their literal.
    pub(crate) fn assemble(
        x: VarId,
        y: VarId,
        bound_x: Option<Bound>,
        ineq: Option<TvpiIneq>,
        bound_y: Option<Bound>,
        ids: [u32; 3],
    ) -> Result<Bend, Error> {
        if let Some(b) = &bound_x {
            if b.var != x {
                return Err(Error::InvalidLiteral(format!("x-bound {b} is not on {x}")));
            }
        }
        if let Some(b) = &bound_y {
            if b.var != y {
                return Err(Error::InvalidLiteral(format!("y-bound {b} is not on {y}")));
            }
        }
        let top_var = bound_x
            .as_ref()
            .filter(|b| b.is_trivially_true())
            .map(|b| b.var)
            .or_else(|| bound_y.as_ref().filter(|b| b.is_trivially_true()).map(|b| b.var))
            .or_else(|| {
                ineq.as_ref()
                    .filter(|t| t.constant == ExtendedRational::PosInf)
                    .map(|_| x)
            });
        if let Some(v) = top_var {
            return Ok(Bend::top(v).with_scope(x, y));
        }
        let bound_x = bound_x.filter(|b| !b.is_unsatisfiable());
        let bound_y = bound_y.filter(|b| !b.is_unsatisfiable());
        let ineq = ineq.filter(|t| t.constant != ExtendedRational::NegInf);

        let mut bend = Bend {
            x,
            y,
            bound_x,
            ineq,
            bound_y,
            literal_ids: ids,
        };
        if let Some(t) = bend.ineq.take() {
            let t = if t.var_x == x && t.var_y == y {
                t
            } else if t.var_x == y && t.var_y == x {
                t.reversed()
            } else {
                return Err(Error::InvalidLiteral(format!("inequality {t} is not over ({x}, {y})")));
            };
            for (b, c) in [(&bend.bound_x, &t.coeff_x), (&bend.bound_y, &t.coeff_y)] {
                if let Some(b) = b {
                    if b.is_upper() != c.is_positive() {
                        return Err(Error::SignCondition(format!(
                            "bound {b} must be {} because its coefficient in {t} is {}",
                            if c.is_positive() { "upper-type" } else { "lower-type" },
                            if c.is_positive() { "positive" } else { "negative" },
                        )));
                    }
                }
            }
            bend.ineq = Some(t.scaled_canonical());
        } else if x == y {
            bend = bend.merge_one_variable();
        }
        Ok(bend)
    }

    /// Re-labels the scope of a bend whose literals do not pin it (⊤, ⊥, lone bounds).
    pub fn with_scope(mut self, x: VarId, y: VarId) -> Bend {
        if self.bound_x.as_ref().map(|b| b.var) == Some(x) || self.bound_x.is_none() {
            self.x = x;
            self.y = y;
        }
        self
    }

    /// Two bounds on one variable, no inequality: merge and order as upper, lower.
    fn merge_one_variable(mut self) -> Bend {
        let ids = self.literal_ids;
        let mut lits: Vec<(Bound, u32)> = Vec::new();
        if let Some(b) = self.bound_x.take() {
            lits.push((b, ids[0]));
        }
        if let Some(b) = self.bound_y.take() {
            lits.push((b, ids[2]));
        }
        if lits.len() == 2 {
            let (a, b) = (&lits[0].0, &lits[1].0);
            if a.is_upper() == b.is_upper() {
                // Same direction: the disjunction is the weaker bound.
                let keep = if crate::reason::bound_implies_unchecked(b, a) { 0 } else { 1 };
                let kept = lits.swap_remove(keep);
                lits = vec![kept];
            } else if a.interval().union_is_everything(&b.interval()) {
                return Bend::top(self.x);
            } else if !a.is_upper() {
                lits.swap(0, 1);
            }
        }
        let mut it = lits.into_iter();
        if let Some((b, id)) = it.next() {
            self.bound_x = Some(b);
            self.literal_ids[0] = id;
        }
        if let Some((b, id)) = it.next() {
            self.bound_y = Some(b);
            self.literal_ids[2] = id;
        }
        self
    }

    pub fn x(&self) -> VarId {
        self.x
    }

    pub fn y(&self) -> VarId {
        self.y
    }

    pub fn bound_x(&self) -> Option<&Bound> {
        self.bound_x.as_ref()
    }

    pub fn ineq(&self) -> Option<&TvpiIneq> {
        self.ineq.as_ref()
    }

    pub fn bound_y(&self) -> Option<&Bound> {
        self.bound_y.as_ref()
    }

    pub fn literal_id(&self, slot: Slot) -> u32 {
        self.literal_ids[slot.index()]
    }

    pub fn literal_ids(&self) -> [u32; 3] {
        self.literal_ids
    }

    pub fn with_literal_ids(mut self, ids: [u32; 3]) -> Bend {
        self.literal_ids = ids;
        self
    }

    pub fn is_top(&self) -> bool {
        self.bound_x.as_ref().is_some_and(Bound::is_trivially_true)
    }

    pub fn is_bottom(&self) -> bool {
        self.bound_x.is_none() && self.ineq.is_none() && self.bound_y.is_none()
    }

    pub fn literal(&self, slot: Slot) -> Option<Literal> {
        match slot {
            Slot::BoundX => self.bound_x.clone().map(Literal::Bound),
            Slot::Ineq => self.ineq.clone().map(Literal::Ineq),
            Slot::BoundY => self.bound_y.clone().map(Literal::Bound),
        }
    }

    /// Present disjuncts in slot order.
    pub fn literals(&self) -> impl Iterator<Item = (Slot, Literal)> + '_ {
        Slot::ALL
            .into_iter()
            .filter_map(move |s| self.literal(s).map(|l| (s, l)))
    }

    pub fn literal_count(&self) -> usize {
        self.literals().count()
    }

    /// Variables mentioned by some disjunct, deduplicated, in slot order.
    pub fn vars(&self) -> Vec<VarId> {
        let mut out = Vec::with_capacity(2);
        for (_, lit) in self.literals() {
            let vs: &[VarId] = match &lit {
                Literal::Bound(b) => &[b.var],
                Literal::Ineq(t) => &[t.var_x, t.var_y],
            };
            for &v in vs {
                if !out.contains(&v) {
                    out.push(v);
                }
            }
        }
        out
    }

    pub fn mentions(&self, v: VarId) -> bool {
        self.literals().any(|(_, l)| l.mentions(v))
    }

    /// True when at most one variable occurs in the disjuncts.
    pub fn is_one_variable(&self) -> bool {
        self.vars().len() <= 1
    }

    /// Only a single inequality, or a single bound.
    pub fn is_tvpi_or_bound(&self) -> bool {
        self.literal_count() == 1
    }

    /// `φ⁻¹`: the same constraint with the roles of x and y swapped.
    pub fn reversed(&self) -> Bend {
        if self.x == self.y {
            return self.clone();
        }
        Bend {
            x: self.y,
            y: self.x,
            bound_x: self.bound_y.clone(),
            ineq: self.ineq.as_ref().map(|t| t.reversed().scaled_canonical()),
            bound_y: self.bound_x.clone(),
            literal_ids: [self.literal_ids[2], self.literal_ids[1], self.literal_ids[0]],
        }
    }

    /// Orients the bend so that it reads from `from` to `to`.
    pub fn oriented(&self, from: VarId, to: VarId) -> Option<Bend> {
        if self.x == from && self.y == to {
            Some(self.clone())
        } else if self.x == to && self.y == from {
            Some(self.reversed())
        } else {
            None
        }
    }

    /// Renames the scope variables, keeping the canonical shape. Collapsing x and y
    /// onto one variable turns the inequality into a bound.
    pub fn renamed(&self, new_x: VarId, new_y: VarId) -> Result<Bend, Error> {
        let lits: Vec<RawLiteral> = self
            .literals()
            .map(|(_, l)| match l {
                Literal::Bound(b) => {
                    let v = if b.var == self.x { new_x } else { new_y };
                    RawLiteral::new(vec![(v, Rational::one())], b.rel, b.constant)
                }
                Literal::Ineq(t) => {
                    let rel = t.rel();
                    RawLiteral::new(vec![(new_x, t.coeff_x), (new_y, t.coeff_y)], rel, t.constant)
                }
            })
            .collect();
        if lits.is_empty() {
            return Ok(Bend::bottom(new_x).with_scope_raw(new_x, new_y));
        }
        let ids: Vec<u32> = self.literals().map(|(s, _)| self.literal_id(s)).collect();
        let mut b = normalize_bend(&lits)?;
        // Carry the original ids through normalization (which numbers by position).
        let mut new_ids = b.literal_ids;
        for slot in Slot::ALL {
            let pos = b.literal_ids[slot.index()] as usize;
            if let Some(&id) = ids.get(pos) {
                new_ids[slot.index()] = id;
            }
        }
        b.literal_ids = new_ids;
        Ok(b)
    }

    fn with_scope_raw(mut self, x: VarId, y: VarId) -> Bend {
        self.x = x;
        self.y = y;
        self
    }

    /// Decides the bend at a point. Errors if a mentioned variable has no value.
    pub fn eval_with(&self, value: impl Fn(VarId) -> Option<Rational>) -> Result<bool, Error> {
        let get = |v: VarId| value(v).ok_or(Error::UnassignedVariable(v.into()));
        for (_, lit) in self.literals() {
            let holds = match &lit {
                Literal::Bound(b) if b.is_trivially_true() => true,
                Literal::Bound(b) => b.holds(&get(b.var)?),
                Literal::Ineq(t) => t.holds(&get(t.var_x)?, &get(t.var_y)?),
            };
            if holds {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// Literals written back as raw literals, in slot order.
    pub fn to_raw_literals(&self) -> Vec<RawLiteral> {
        self.literals()
            .map(|(_, l)| match l {
                Literal::Bound(b) => RawLiteral::new(vec![(b.var, Rational::one())], b.rel, b.constant),
                Literal::Ineq(t) => {
                    let rel = t.rel();
                    RawLiteral::new(vec![(t.var_x, t.coeff_x), (t.var_y, t.coeff_y)], rel, t.constant)
                }
            })
            .collect()
    }

    pub fn key(&self) -> BendKey {
        if self.is_top() {
            return BendKey::Top;
        }
        let mut lits: Vec<LiteralKey> = self.literals().map(|(_, l)| literal_key(&l)).collect();
        lits.sort();
        BendKey::Literals(lits)
    }
}

impl PartialEq for Bend {
    /// Equality of canonical disjunct sets; scope order and literal ids are ignored.
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}

impl Eq for Bend {}

impl std::hash::Hash for Bend {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.key().hash(state)
    }
}

impl fmt::Debug for Bend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Bend({}, {}: {self})", self.x, self.y)
    }
}

impl fmt::Display for Bend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_bottom() {
            return write!(f, "{} <= -inf", self.x);
        }
        let mut first = true;
        for (_, lit) in self.literals() {
            if !first {
                f.write_str(" | ")?;
            }
            first = false;
            write!(f, "{lit}")?;
        }
        Ok(())
    }
}

enum Classified {
    True,
    False,
    Bound(Bound),
    Ineq(TvpiIneq),
}

fn classify(lit: &RawLiteral, index: usize) -> Result<Classified, Error> {
    let mut terms: Vec<(VarId, Rational)> = Vec::new();
    for (v, c) in &lit.terms {
        match terms.iter_mut().find(|(w, _)| w == v) {
            Some((_, acc)) => *acc = &*acc + c,
            None => terms.push((*v, c.clone())),
        }
    }
    terms.retain(|(_, c)| !c.is_zero());
    match terms.len() {
        0 => {
            let zero = ExtendedRational::Finite(Rational::zero());
            Ok(if lit.rel.holds(&zero, &lit.constant) {
                Classified::True
            } else {
                Classified::False
            })
        }
        1 => {
            let (v, a) = terms.pop().unwrap();
            let rel = if a.is_negative() { lit.rel.flipped() } else { lit.rel };
            let b = Bound::new(v, rel, lit.constant.scaled(&a.recip()));
            Ok(if b.is_trivially_true() {
                Classified::True
            } else if b.is_unsatisfiable() {
                Classified::False
            } else {
                Classified::Bound(b)
            })
        }
        2 => {
            let (vy, cy) = terms.pop().unwrap();
            let (vx, cx) = terms.pop().unwrap();
            let (cx, cy, c) = if lit.rel.is_upper() {
                (cx, cy, lit.constant.clone())
            } else {
                (-cx, -cy, lit.constant.negated())
            };
            Ok(match c {
                ExtendedRational::PosInf => Classified::True,
                ExtendedRational::NegInf => Classified::False,
                c => Classified::Ineq(TvpiIneq::new(vx, cx, vy, cy, lit.rel.is_strict(), c)?),
            })
        }
        _ => Err(Error::RejectedNotABend {
            literal: index,
            reason: "literal mentions more than two variables".into(),
        }),
    }
}

/// Turns a disjunction of raw linear literals into a canonical [`Bend`].
///
/// Literal ids are the positions of the literals in `literals`.
pub fn normalize_bend(literals: &[RawLiteral]) -> Result<Bend, Error> {
    let scope_var = literals
        .iter()
        .flat_map(|l| l.terms.iter().map(|(v, _)| *v))
        .next()
        .ok_or_else(|| Error::RejectedNotABend {
            literal: 0,
            reason: "a bend must mention at least one variable".into(),
        })?;

    let mut bounds: Vec<(Bound, usize)> = Vec::new();
    let mut ineq: Option<(TvpiIneq, usize)> = None;
    for (i, lit) in literals.iter().enumerate() {
        match classify(lit, i)? {
            Classified::True => return Ok(Bend::top(scope_var)),
            Classified::False => {}
            Classified::Bound(b) => bounds.push((b, i)),
            Classified::Ineq(t) => {
                if ineq.is_some() {
                    return Err(Error::RejectedNotABend {
                        literal: i,
                        reason: "a bend has at most one two-variable inequality".into(),
                    });
                }
                ineq = Some((t, i));
            }
        }
    }

    // Disjunction of same-direction bounds on one variable is the weakest of them.
    let mut merged: Vec<(Bound, usize)> = Vec::new();
    for (b, i) in bounds {
        match merged
            .iter_mut()
            .find(|(m, _)| m.var == b.var && m.is_upper() == b.is_upper())
        {
            Some(slot) => {
                if crate::reason::bound_implies_unchecked(&slot.0, &b) {
                    *slot = (b, i);
                }
            }
            None => merged.push((b, i)),
        }
    }

    let id = |i: usize| i as u32;
    if let Some((t, ti)) = ineq {
        let (x, y) = (t.var_x, t.var_y);
        let mut bx: Option<(Bound, usize)> = None;
        let mut by: Option<(Bound, usize)> = None;
        for (b, i) in merged {
            let (coeff, slot) = if b.var == x {
                (&t.coeff_x, &mut bx)
            } else if b.var == y {
                (&t.coeff_y, &mut by)
            } else {
                return Err(Error::RejectedNotABend {
                    literal: i,
                    reason: format!("bound on a third variable next to inequality {t}"),
                });
            };
            if b.is_upper() != coeff.is_positive() {
                return Err(Error::RejectedNotABend {
                    literal: i,
                    reason: format!(
                        "sign condition: the bound must be {} because its variable's coefficient is {}",
                        if coeff.is_positive() { "upper-type (<= or <)" } else { "lower-type (>= or >)" },
                        if coeff.is_positive() { "positive" } else { "negative" },
                    ),
                });
            }
            *slot = Some((b, i));
        }
        let ids = [
            bx.as_ref().map_or(0, |(_, i)| id(*i)),
            id(ti),
            by.as_ref().map_or(2, |(_, i)| id(*i)),
        ];
        return Bend::assemble(x, y, bx.map(|p| p.0), Some(t), by.map(|p| p.0), ids);
    }

    match merged.len() {
        0 => Ok(Bend::bottom(scope_var)),
        1 => {
            let (b, i) = merged.pop().unwrap();
            Bend::assemble(b.var, b.var, Some(b), None, None, [id(i), 1, 2])
        }
        2 => {
            let (b2, i2) = merged.pop().unwrap();
            let (b1, i1) = merged.pop().unwrap();
            Bend::assemble(b1.var, b2.var, Some(b1), None, Some(b2), [id(i1), 1, id(i2)])
        }
        _ => Err(Error::RejectedNotABend {
            literal: merged[2].1,
            reason: "without an inequality a bend is a disjunction of at most two bounds".into(),
        }),
    }
}
