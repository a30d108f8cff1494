//! Conjunctions of bends over interned variables, and assignments.

use std::collections::{BTreeMap, HashMap};

use crate::bend::{normalize_bend, Bend, RawLiteral, VarId};
use crate::error::Error;
use crate::num::Rational;

/// A conjunction of bends. Variables are dense indices `0..n` with names.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BijunctiveFormula {
    names: Vec<String>,
    index: HashMap<String, VarId>,
    bends: Vec<Bend>,
}

impl BijunctiveFormula {
    pub fn new() -> Self {
        Self::default()
    }

    /// A formula over variables named `v0 .. v{n-1}`.
    pub fn with_vars(n: usize) -> Self {
        let mut f = Self::new();
        for i in 0..n {
            f.var(&format!("v{i}"));
        }
        f
    }

    /// Returns the variable named `name`, registering it if new.
    pub fn var(&mut self, name: &str) -> VarId {
        if let Some(&v) = self.index.get(name) {
            return v;
        }
        let v = VarId(self.names.len() as u32);
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), v);
        v
    }

    pub fn lookup(&self, name: &str) -> Option<VarId> {
        self.index.get(name).copied()
    }

    pub fn name(&self, v: VarId) -> &str {
        &self.names[v.index()]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn vars(&self) -> impl Iterator<Item = VarId> + '_ {
        (0..self.names.len() as u32).map(VarId)
    }

    pub fn num_vars(&self) -> usize {
        self.names.len()
    }

    pub fn num_bends(&self) -> usize {
        self.bends.len()
    }

    pub fn bends(&self) -> &[Bend] {
        &self.bends
    }

    pub fn bend(&self, i: usize) -> &Bend {
        &self.bends[i]
    }

    pub fn contains_var(&self, v: VarId) -> bool {
        v.index() < self.names.len()
    }

    /// Adds a bend whose variables are already registered.
    pub fn push(&mut self, bend: Bend) -> Result<usize, Error> {
        for v in [bend.x(), bend.y()] {
            if !self.contains_var(v) {
                return Err(Error::UnknownVariable(v.to_string()));
            }
        }
        self.bends.push(bend);
        Ok(self.bends.len() - 1)
    }

    /// Normalizes `literals` and adds the result.
    pub fn push_literals(&mut self, literals: &[RawLiteral]) -> Result<usize, Error> {
        let b = normalize_bend(literals)?;
        self.push(b)
    }

    /// The same variables with the bend at `index` replaced.
    pub fn replace_bend(&self, index: usize, bend: Bend) -> BijunctiveFormula {
        let mut f = self.clone();
        f.bends[index] = bend;
        f
    }

    /// The same variables with the bend at `index` removed.
    pub fn without_bend(&self, index: usize) -> BijunctiveFormula {
        let mut f = self.clone();
        f.bends.remove(index);
        f
    }

    /// Indices of bends whose literals mention `v`.
    pub fn incident(&self, v: VarId) -> Vec<usize> {
        (0..self.bends.len()).filter(|&i| self.bends[i].mentions(v)).collect()
    }

    pub fn total_literals(&self) -> usize {
        self.bends.iter().map(Bend::literal_count).sum()
    }

    pub fn eval(&self, a: &Assignment) -> Result<bool, Error> {
        for b in &self.bends {
            if !eval_bend(b, a)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Sum of bit sizes of all constants and coefficients.
    pub fn bit_size(&self) -> u64 {
        let mut total = 0;
        for b in &self.bends {
            for (_, lit) in b.literals() {
                match lit {
                    crate::bend::Literal::Bound(bd) => {
                        total += bd.constant.finite().map_or(1, Rational::bit_size);
                    }
                    crate::bend::Literal::Ineq(t) => {
                        total += t.coeff_x.bit_size() + t.coeff_y.bit_size();
                        total += t.constant.finite().map_or(1, Rational::bit_size);
                    }
                }
            }
        }
        total
    }
}

/// A map from variables to rationals.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Assignment(BTreeMap<VarId, Rational>);

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, v: VarId) -> Option<&Rational> {
        self.0.get(&v)
    }

    pub fn set(&mut self, v: VarId, q: Rational) {
        self.0.insert(v, q);
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (VarId, &Rational)> {
        self.0.iter().map(|(v, q)| (*v, q))
    }

    /// Whether the assignment covers exactly the formula's variables.
    pub fn is_total_for(&self, phi: &BijunctiveFormula) -> bool {
        self.0.len() == phi.num_vars() && phi.vars().all(|v| self.0.contains_key(&v))
    }
}

impl FromIterator<(VarId, Rational)> for Assignment {
    fn from_iter<I: IntoIterator<Item = (VarId, Rational)>>(iter: I) -> Self {
        Assignment(iter.into_iter().collect())
    }
}

/// Whether at least one disjunct of `bend` holds under `a`.
pub fn eval_bend(bend: &Bend, a: &Assignment) -> Result<bool, Error> {
    bend.eval_with(|v| a.get(v).cloned())
}

/// Componentwise median of three assignments over the same variables.
pub fn median3(t1: &Assignment, t2: &Assignment, t3: &Assignment) -> Result<Assignment, Error> {
    let same_keys = |a: &Assignment, b: &Assignment| a.0.len() == b.0.len() && a.0.keys().eq(b.0.keys());
    if !same_keys(t1, t2) || !same_keys(t1, t3) {
        return Err(Error::VariableSetMismatch);
    }
    Ok(t1
        .iter()
        .map(|(v, a)| {
            let mut three = [a, t2.get(v).unwrap(), t3.get(v).unwrap()];
            three.sort();
            (v, three[1].clone())
        })
        .collect())
}
