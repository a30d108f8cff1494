//! Feasibility of small conjunctions of linear atoms by Fourier–Motzkin
//! elimination with strictness.

use crate::bend::{Bound, Literal, TvpiIneq, VarId};
use crate::num::{ExtendedRational, Rational};

/// `Σ coeff·var ≤ rhs`, or `<` when `strict`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Atom {
    pub terms: Vec<(VarId, Rational)>,
    pub strict: bool,
    pub rhs: Rational,
}

impl Atom {
    pub fn truth(value: bool) -> Atom {
        Atom {
            terms: Vec::new(),
            strict: false,
            rhs: if value { Rational::zero() } else { Rational::from(-1) },
        }
    }

    pub fn from_bound(b: &Bound) -> Atom {
        if b.is_trivially_true() {
            return Atom::truth(true);
        }
        let ExtendedRational::Finite(d) = &b.constant else {
            return Atom::truth(false);
        };
        let (coeff, rhs) = if b.is_upper() {
            (Rational::one(), d.clone())
        } else {
            (Rational::from(-1), -d)
        };
        Atom {
            terms: vec![(b.var, coeff)],
            strict: b.is_strict(),
            rhs,
        }
    }

    pub fn from_ineq(t: &TvpiIneq) -> Atom {
        match &t.constant {
            ExtendedRational::PosInf => Atom::truth(true),
            ExtendedRational::NegInf => Atom::truth(false),
            ExtendedRational::Finite(c) => Atom {
                terms: vec![(t.var_x, t.coeff_x.clone()), (t.var_y, t.coeff_y.clone())],
                strict: t.strict,
                rhs: c.clone(),
            },
        }
    }

    pub fn from_literal(lit: &Literal) -> Atom {
        match lit {
            Literal::Bound(b) => Atom::from_bound(b),
            Literal::Ineq(t) => Atom::from_ineq(t),
        }
    }

    /// The complement of the atom.
    pub fn negated(&self) -> Atom {
        Atom {
            terms: self.terms.iter().map(|(v, a)| (*v, -a)).collect(),
            strict: !self.strict,
            rhs: -&self.rhs,
        }
    }

    pub fn negated_literal(lit: &Literal) -> Atom {
        Atom::from_literal(lit).negated()
    }

    pub fn coeff(&self, v: VarId) -> Rational {
        self.terms
            .iter()
            .filter(|(w, _)| *w == v)
            .fold(Rational::zero(), |acc, (_, a)| &acc + a)
    }

    /// Combines terms on the same variable and drops zeros.
    pub fn simplified(&self) -> Atom {
        let mut terms: Vec<(VarId, Rational)> = Vec::with_capacity(self.terms.len());
        for (v, a) in &self.terms {
            match terms.iter_mut().find(|(w, _)| w == v) {
                Some((_, acc)) => *acc = &*acc + a,
                None => terms.push((*v, a.clone())),
            }
        }
        terms.retain(|(_, a)| !a.is_zero());
        terms.sort_by_key(|(v, _)| *v);
        Atom {
            terms,
            strict: self.strict,
            rhs: self.rhs.clone(),
        }
    }

    /// Truth value of a variable-free atom.
    pub fn constant_truth(&self) -> Option<bool> {
        if !self.terms.is_empty() {
            return None;
        }
        let zero = Rational::zero();
        Some(if self.strict { zero < self.rhs } else { zero <= self.rhs })
    }

    pub fn holds(&self, value: impl Fn(VarId) -> Rational) -> bool {
        let lhs = self
            .terms
            .iter()
            .fold(Rational::zero(), |acc, (v, a)| &acc + &(a * &value(*v)));
        if self.strict {
            lhs < self.rhs
        } else {
            lhs <= self.rhs
        }
    }

    fn scaled(&self, k: &Rational) -> Atom {
        Atom {
            terms: self.terms.iter().map(|(v, a)| (*v, a * k)).collect(),
            strict: self.strict,
            rhs: &self.rhs * k,
        }
    }

    /// Eliminates `v` from a pair where `self` has a positive and `other` a negative coefficient.
    pub fn resolve(&self, other: &Atom, v: VarId) -> Atom {
        let p = self.scaled(&self.coeff(v).recip());
        let n = other.scaled(&(-other.coeff(v)).recip());
        let mut terms = p.terms;
        terms.extend(n.terms);
        Atom {
            terms,
            strict: p.strict || n.strict,
            rhs: &p.rhs + &n.rhs,
        }
        .simplified()
    }
}

/// Whether the conjunction of `atoms` has a rational solution.
pub fn satisfiable(atoms: &[Atom]) -> bool {
    let mut work: Vec<Atom> = atoms.iter().map(Atom::simplified).collect();
    loop {
        let mut next = Vec::with_capacity(work.len());
        for a in work {
            match a.constant_truth() {
                Some(false) => return false,
                Some(true) => {}
                None => {
                    if !next.contains(&a) {
                        next.push(a);
                    }
                }
            }
        }
        work = next;
        let Some(v) = work.first().map(|a| a.terms[0].0) else {
            return true;
        };
        let (mut pos, mut neg, mut rest) = (Vec::new(), Vec::new(), Vec::new());
        for a in work {
            let c = a.coeff(v);
            if c.is_positive() {
                pos.push(a);
            } else if c.is_negative() {
                neg.push(a);
            } else {
                rest.push(a);
            }
        }
        for p in &pos {
            for n in &neg {
                rest.push(p.resolve(n, v));
            }
        }
        work = rest;
    }
}
