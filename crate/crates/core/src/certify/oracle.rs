//! Brute-force oracle: expand the bends into conjunctions of literals and
//! decide each by dense Fourier–Motzkin with back-substitution.
//!
//! Deliberately shares no elimination code with the solver.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::bend::{Literal, VarId};
use crate::error::Error;
use crate::formula::{Assignment, BijunctiveFormula};
use crate::num::{ExtendedRational, Rational};

pub const DEFAULT_BUDGET: u64 = 531_441; // 3^12

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleAnswer {
    Sat(Assignment),
    Unsat,
}

impl OracleAnswer {
    pub fn is_sat(&self) -> bool {
        matches!(self, OracleAnswer::Sat(_))
    }
}

/// `Σ coeffs[i]·v_i ≤ rhs`, or `<` when strict.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Row {
    coeffs: Vec<Rational>,
    strict: bool,
    rhs: Rational,
}

impl Row {
    fn is_constant(&self) -> bool {
        self.coeffs.iter().all(Rational::is_zero)
    }

    fn constant_holds(&self) -> bool {
        let zero = Rational::zero();
        if self.strict {
            zero < self.rhs
        } else {
            zero <= self.rhs
        }
    }

    /// Divides by the absolute value of the first nonzero coefficient.
    fn normalized(mut self) -> Row {
        if let Some(lead) = self.coeffs.iter().find(|c| !c.is_zero()).map(Rational::abs) {
            let inv = lead.recip();
            for c in self.coeffs.iter_mut() {
                *c = &*c * &inv;
            }
            self.rhs = &self.rhs * &inv;
        }
        self
    }
}

enum Encoded {
    True,
    False,
    Row(Row),
}

fn encode(lit: &Literal, n: usize) -> Encoded {
    let mut coeffs = vec![Rational::zero(); n];
    let (strict, rhs) = match lit {
        Literal::Bound(b) => {
            let c = match &b.constant {
                ExtendedRational::Finite(c) => c.clone(),
                ExtendedRational::PosInf => return if b.is_upper() { Encoded::True } else { Encoded::False },
                ExtendedRational::NegInf => return if b.is_upper() { Encoded::False } else { Encoded::True },
            };
            if b.is_upper() {
                coeffs[b.var.index()] = Rational::one();
                (b.is_strict(), c)
            } else {
                coeffs[b.var.index()] = Rational::from(-1);
                (b.is_strict(), -c)
            }
        }
        Literal::Ineq(t) => {
            let c = match &t.constant {
                ExtendedRational::Finite(c) => c.clone(),
                ExtendedRational::PosInf => return Encoded::True,
                ExtendedRational::NegInf => return Encoded::False,
            };
            coeffs[t.var_x.index()] = &coeffs[t.var_x.index()] + &t.coeff_x;
            coeffs[t.var_y.index()] = &coeffs[t.var_y.index()] + &t.coeff_y;
            (t.strict, c)
        }
    };
    Encoded::Row(Row { coeffs, strict, rhs })
}

/// How to choose a value inside a nonempty interval during back-substitution.
pub trait PointChooser {
    fn choose(&mut self, lo: Option<(&Rational, bool)>, hi: Option<(&Rational, bool)>) -> Rational;
}

/// Midpoint of finite ends, closed end, or open end ±1; 0 on the whole line.
pub struct Canonical;

impl PointChooser for Canonical {
    fn choose(&mut self, lo: Option<(&Rational, bool)>, hi: Option<(&Rational, bool)>) -> Rational {
        match (lo, hi) {
            (None, None) => Rational::zero(),
            (Some((l, _)), Some((h, _))) if l == h => l.clone(),
            (Some((l, _)), Some((h, _))) => l.midpoint(h),
            (Some((l, open)), None) => if open { l + &Rational::one() } else { l.clone() },
            (None, Some((h, open))) => if open { h - &Rational::one() } else { h.clone() },
        }
    }
}

/// Random point: endpoints when closed, otherwise random convex combinations.
pub struct Sampled<'a, R: Rng>(pub &'a mut R);

impl<R: Rng> PointChooser for Sampled<'_, R> {
    fn choose(&mut self, lo: Option<(&Rational, bool)>, hi: Option<(&Rational, bool)>) -> Rational {
        let frac = Rational::new(self.0.gen_range(1..8), 8);
        let spread = Rational::from(self.0.gen_range(0..4));
        match (lo, hi) {
            (None, None) => Rational::from(self.0.gen_range(-4..=4)),
            (Some((l, _)), Some((h, _))) if l == h => l.clone(),
            (Some((l, lo_open)), Some((h, hi_open))) => match self.0.gen_range(0..3) {
                0 if !lo_open => l.clone(),
                1 if !hi_open => h.clone(),
                _ => l + &(&(h - l) * &frac),
            },
            (Some((l, open)), None) => {
                if !open && spread.is_zero() {
                    l.clone()
                } else {
                    l + &(&spread + &frac)
                }
            }
            (None, Some((h, open))) => {
                if !open && spread.is_zero() {
                    h.clone()
                } else {
                    h - &(&spread + &frac)
                }
            }
        }
    }
}

/// Dense Fourier–Motzkin on variables `0..n`. Returns a solution when feasible.
fn solve_rows(rows: Vec<Row>, n: usize, chooser: &mut dyn PointChooser) -> Option<Vec<Rational>> {
    let mut stages: Vec<Vec<Row>> = Vec::with_capacity(n);
    let mut current = rows;
    for k in 0..n {
        let mut next = Vec::new();
        let (mut pos, mut neg) = (Vec::new(), Vec::new());
        for r in &current {
            if r.coeffs[k].is_positive() {
                pos.push(r);
            } else if r.coeffs[k].is_negative() {
                neg.push(r);
            } else {
                next.push(r.clone());
            }
        }
        for p in &pos {
            for q in &neg {
                let sp = p.coeffs[k].recip();
                let sq = (-&q.coeffs[k]).recip();
                let coeffs = (0..n).map(|i| &(&p.coeffs[i] * &sp) + &(&q.coeffs[i] * &sq)).collect();
                next.push(Row {
                    coeffs,
                    strict: p.strict || q.strict,
                    rhs: &(&p.rhs * &sp) + &(&q.rhs * &sq),
                });
            }
        }
        let mut kept: Vec<Row> = Vec::new();
        for r in next {
            if r.is_constant() {
                if !r.constant_holds() {
                    return None;
                }
                continue;
            }
            let r = r.normalized();
            if !kept.contains(&r) {
                kept.push(r);
            }
        }
        stages.push(current);
        current = kept;
    }
    debug_assert!(current.is_empty());

    let mut values = vec![Rational::zero(); n];
    for k in (0..n).rev() {
        let mut lo: Option<(Rational, bool)> = None;
        let mut hi: Option<(Rational, bool)> = None;
        for r in &stages[k] {
            let a = &r.coeffs[k];
            if a.is_zero() {
                continue;
            }
            let rest = (k + 1..n).fold(Rational::zero(), |acc, i| &acc + &(&r.coeffs[i] * &values[i]));
            let bound = &(&r.rhs - &rest) / a;
            if a.is_positive() {
                let tighter = match &hi {
                    None => true,
                    Some((h, open)) => bound < *h || (bound == *h && r.strict && !open),
                };
                if tighter {
                    hi = Some((bound, r.strict));
                }
            } else {
                let tighter = match &lo {
                    None => true,
                    Some((l, open)) => bound > *l || (bound == *l && r.strict && !open),
                };
                if tighter {
                    lo = Some((bound, r.strict));
                }
            }
        }
        values[k] = chooser.choose(lo.as_ref().map(|(q, o)| (q, *o)), hi.as_ref().map(|(q, o)| (q, *o)));
    }
    Some(values)
}

fn expansion_size(phi: &BijunctiveFormula) -> u64 {
    phi.bends()
        .iter()
        .map(|b| if b.is_top() { 1 } else { b.literal_count().max(1) as u64 })
        .try_fold(1u64, |acc, k| acc.checked_mul(k))
        .unwrap_or(u64::MAX)
}

/// Per non-trivial bend, its satisfiable literals as rows.
fn encode_formula(phi: &BijunctiveFormula, budget: u64) -> Result<Vec<Vec<Row>>, Error> {
    let size = expansion_size(phi);
    if size > budget {
        return Err(Error::BudgetExceeded(format!("{size} disjunct combinations exceed {budget}")));
    }
    let n = phi.num_vars();
    let mut encoded = Vec::new();
    for b in phi.bends() {
        if b.is_top() {
            continue;
        }
        let mut alts = Vec::new();
        let mut trivially = false;
        for (_, lit) in b.literals() {
            match encode(&lit, n) {
                Encoded::True => trivially = true,
                Encoded::False => {}
                Encoded::Row(r) => alts.push(r),
            }
        }
        if !trivially {
            encoded.push(alts);
        }
    }
    Ok(encoded)
}

/// Depth-first over one literal per bend, abandoning infeasible prefixes.
fn search(encoded: &[Vec<Row>], n: usize, pick: &mut Vec<usize>) -> bool {
    let depth = pick.len();
    if depth == encoded.len() {
        return true;
    }
    for j in 0..encoded[depth].len() {
        pick.push(j);
        if solve_rows(picked(encoded, pick), n, &mut Canonical).is_some() && search(encoded, n, pick) {
            return true;
        }
        pick.pop();
    }
    false
}

fn picked(encoded: &[Vec<Row>], pick: &[usize]) -> Vec<Row> {
    pick.iter().enumerate().map(|(i, &j)| encoded[i][j].clone()).collect()
}

fn decide(encoded: &[Vec<Row>], n: usize, chooser: &mut dyn PointChooser) -> OracleAnswer {
    let mut pick = Vec::new();
    if !search(encoded, n, &mut pick) {
        return OracleAnswer::Unsat;
    }
    let values = solve_rows(picked(encoded, &pick), n, chooser).expect("feasible combination");
    OracleAnswer::Sat(values.into_iter().enumerate().map(|(i, q)| (VarId(i as u32), q)).collect())
}

/// Decides `phi` by expanding every combination of disjuncts.
pub fn brute_force_sat(phi: &BijunctiveFormula) -> Result<OracleAnswer, Error> {
    brute_force_sat_with(phi, DEFAULT_BUDGET)
}

pub fn brute_force_sat_with(phi: &BijunctiveFormula, budget: u64) -> Result<OracleAnswer, Error> {
    let encoded = encode_formula(phi, budget)?;
    Ok(decide(&encoded, phi.num_vars(), &mut Canonical))
}

/// Like [`brute_force_sat`], but tries the disjuncts in random order and
/// returns a random point of the first feasible combination.
pub fn brute_force_sample<R: Rng>(phi: &BijunctiveFormula, rng: &mut R) -> Result<OracleAnswer, Error> {
    let mut encoded = encode_formula(phi, DEFAULT_BUDGET)?;
    for alts in encoded.iter_mut() {
        alts.shuffle(rng);
    }
    Ok(decide(&encoded, phi.num_vars(), &mut Sampled(rng)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bend::{RawLiteral, Rel};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn bound(v: u32, rel: Rel, c: i64) -> RawLiteral {
        RawLiteral::new(vec![(VarId(v), Rational::one())], rel, Rational::from(c))
    }

    fn gadget() -> BijunctiveFormula {
        let mut f = BijunctiveFormula::with_vars(1);
        f.push_literals(&[bound(0, Rel::Ge, 0)]).unwrap();
        f.push_literals(&[bound(0, Rel::Le, 1)]).unwrap();
        f.push_literals(&[bound(0, Rel::Le, 0), bound(0, Rel::Ge, 1)]).unwrap();
        f
    }

    #[test]
    fn gadget_has_an_endpoint_witness() {
        let OracleAnswer::Sat(a) = brute_force_sat(&gadget()).unwrap() else {
            panic!("gadget is satisfiable");
        };
        let x = a.get(VarId(0)).unwrap();
        assert!(*x == Rational::zero() || *x == Rational::one());
        assert!(gadget().eval(&a).unwrap());
    }

    #[test]
    fn open_interval_contradiction() {
        let mut f = BijunctiveFormula::with_vars(1);
        f.push_literals(&[bound(0, Rel::Gt, 0)]).unwrap();
        f.push_literals(&[bound(0, Rel::Lt, 0)]).unwrap();
        assert_eq!(brute_force_sat(&f).unwrap(), OracleAnswer::Unsat);
    }

    #[test]
    fn budget_is_enforced() {
        let mut f = BijunctiveFormula::with_vars(2);
        // 3^13 combinations, one over the default budget
        for i in 0..13 {
            let diff = RawLiteral::new(vec![(VarId(0), Rational::one()), (VarId(1), Rational::from(-1))], Rel::Le, Rational::from(i));
            f.push_literals(&[bound(0, Rel::Le, i), diff, bound(1, Rel::Ge, i)]).unwrap();
        }
        assert!(matches!(brute_force_sat(&f), Err(Error::BudgetExceeded(_))));
        assert!(brute_force_sat_with(&f, u64::MAX).unwrap().is_sat());
    }

    #[test]
    fn samples_are_witnesses() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = gadget();
        for _ in 0..20 {
            let OracleAnswer::Sat(a) = brute_force_sample(&f, &mut rng).unwrap() else {
                panic!("gadget is satisfiable");
            };
            assert!(f.eval(&a).unwrap());
        }
    }
}
