#![allow(dead_code)]

use bendsat::certify::fuzz::{random_formula, FuzzConfig};
use bendsat::certify::oracle::brute_force_sat;
use bendsat::residue::{path_residue, Path, Step, Walk};
use bendsat::{Bend, BijunctiveFormula, Bound, Rational, Rel, VarId};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn q(n: i64) -> Rational {
    Rational::from_integer(n)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn small_config(max_vars: usize, max_bends: usize) -> FuzzConfig {
    FuzzConfig {
        max_vars,
        max_bends,
        ..FuzzConfig::default()
    }
}

pub fn formula(seed: u64, cfg: &FuzzConfig) -> BijunctiveFormula {
    random_formula(&mut rng(seed), cfg)
}

pub fn oracle_sat(phi: &BijunctiveFormula) -> bool {
    brute_force_sat(phi).expect("instance within the oracle budget").is_sat()
}

pub fn with_bends(phi: &BijunctiveFormula, extra: impl IntoIterator<Item = Bend>) -> BijunctiveFormula {
    let mut out = phi.clone();
    for b in extra {
        out.push(b).expect("variables of the formula");
    }
    out
}

pub fn with_bound(phi: &BijunctiveFormula, v: VarId, rel: Rel, c: Rational) -> BijunctiveFormula {
    with_bends(phi, [Bend::from_bound(Bound::finite(v, rel, c))])
}

/// Halves from -5/2 to 5/2 together with integers out to ±6.
pub fn grid() -> Vec<Rational> {
    let mut g: Vec<Rational> = (-5..=5).map(|i| Rational::new(i, 2)).collect();
    g.extend([-6, -4, -3, 3, 4, 6].map(q));
    g.sort();
    g
}

/// `∃t. phi1(u, t) ∧ phi2(t, w)` at fixed `u`, `w`, decided by the oracle.
pub fn exists_middle(phi1: &Bend, phi2: &Bend, u: &Rational, w: &Rational) -> bool {
    let mut f = BijunctiveFormula::with_vars(3);
    f.push(phi1.clone()).unwrap();
    f.push(phi2.clone()).unwrap();
    for (v, val) in [(VarId(0), u), (VarId(2), w)] {
        f.push(Bend::from_bound(Bound::finite(v, Rel::Ge, val.clone()))).unwrap();
        f.push(Bend::from_bound(Bound::finite(v, Rel::Le, val.clone()))).unwrap();
    }
    oracle_sat(&f)
}

/// Residue of the walk `v0 → v1 → … ` through `bends`.
pub fn residue_of(bends: &[Bend], start: u32) -> Option<Bend> {
    let steps = bends
        .iter()
        .enumerate()
        .map(|(i, b)| Step::new(b, VarId(start + i as u32), VarId(start + i as u32 + 1)))
        .collect::<Result<Vec<_>, _>>()
        .ok()?;
    let walk = Walk::from_steps(VarId(start), steps).ok()?;
    path_residue(&Path::new(walk).ok()?).ok().map(|r| r.bend)
}

pub fn eval2(b: &Bend, x: VarId, xv: &Rational, y: VarId, yv: &Rational) -> bool {
    b.eval_with(|v| {
        if v == x {
            Some(xv.clone())
        } else if v == y {
            Some(yv.clone())
        } else {
            None
        }
    })
    .expect("bend only mentions the two variables")
}
