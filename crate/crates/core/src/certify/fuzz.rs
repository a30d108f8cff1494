//! Random bend formulas, for differential testing against the oracle.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bend::{Bend, Bound, Rel, TvpiIneq, VarId};
use crate::formula::{Assignment, BijunctiveFormula};
use crate::num::Rational;

#[derive(Debug, Clone)]
pub struct FuzzConfig {
    pub max_vars: usize,
    pub max_bends: usize,
    /// Numerators of coefficients are drawn from `-coeff_range..=coeff_range`.
    pub coeff_range: i64,
    pub max_denominator: i64,
    /// Constants are drawn from `-const_range..=const_range` (before dividing).
    pub const_range: i64,
    /// Only single inequalities and bounds, no genuine disjunctions.
    pub tvpi_only: bool,
    /// Fraction of instances built around a hidden solution.
    pub planted_ratio: f64,
    /// Fraction of instances built around an infeasible core.
    pub refuted_ratio: f64,
}

impl Default for FuzzConfig {
    fn default() -> Self {
        FuzzConfig {
            max_vars: 5,
            max_bends: 8,
            coeff_range: 3,
            max_denominator: 3,
            const_range: 6,
            tvpi_only: false,
            planted_ratio: 0.35,
            refuted_ratio: 0.35,
        }
    }
}

fn rational<R: Rng + ?Sized>(rng: &mut R, range: i64, max_denominator: i64) -> Rational {
    let d = if rng.gen_bool(0.7) { 1 } else { rng.gen_range(1..=max_denominator.max(1)) };
    Rational::new(rng.gen_range(-range..=range), d)
}

fn nonzero<R: Rng + ?Sized>(rng: &mut R, cfg: &FuzzConfig) -> Rational {
    loop {
        let q = rational(rng, cfg.coeff_range.max(1), cfg.max_denominator);
        if !q.is_zero() {
            return q;
        }
    }
}

fn constant<R: Rng + ?Sized>(rng: &mut R, cfg: &FuzzConfig) -> Rational {
    rational(rng, cfg.const_range, cfg.max_denominator)
}

fn rel<R: Rng + ?Sized>(rng: &mut R, upper: bool) -> Rel {
    Rel::from_parts(upper, rng.gen_bool(0.25))
}

fn bound<R: Rng + ?Sized>(rng: &mut R, cfg: &FuzzConfig, v: VarId, upper: bool) -> Bound {
    Bound::finite(v, rel(rng, upper), constant(rng, cfg))
}

/// A random bend over `x` and `y` (which may coincide).
pub fn random_bend<R: Rng + ?Sized>(rng: &mut R, cfg: &FuzzConfig, x: VarId, y: VarId) -> Bend {
    let shape = if x == y {
        if cfg.tvpi_only { 0 } else { rng.gen_range(0..2) }
    } else if cfg.tvpi_only {
        rng.gen_range(0..2) + 2
    } else {
        rng.gen_range(0..5)
    };
    let result = match shape {
        0 => {
            let upper = rng.gen_bool(0.5);
            Ok(Bend::from_bound(bound(rng, cfg, x, upper)))
        }
        1 => {
            // x ≤ a ∨ x ≥ b
            let a = constant(rng, cfg);
            let b = constant(rng, cfg);
            Bend::from_parts(x, x, Some(Bound::finite(x, rel(rng, true), a)), None, Some(Bound::finite(x, rel(rng, false), b)))
        }
        2 => {
            let v = if rng.gen_bool(0.5) { x } else { y };
            let upper = rng.gen_bool(0.5);
            Ok(Bend::from_bound(bound(rng, cfg, v, upper)))
        }
        _ => {
            let (a1, a2) = (nonzero(rng, cfg), nonzero(rng, cfg));
            let t = TvpiIneq::new(x, a1.clone(), y, a2.clone(), rng.gen_bool(0.25), constant(rng, cfg))
                .expect("distinct variables and nonzero coefficients");
            let with_bounds = shape == 4;
            let bx = (with_bounds && rng.gen_bool(0.8)).then(|| bound(rng, cfg, x, a1.is_positive()));
            let by = (with_bounds && rng.gen_bool(0.8)).then(|| bound(rng, cfg, y, a2.is_positive()));
            Bend::from_parts(x, y, bx, Some(t), by)
        }
    };
    result.expect("generated literals respect the sign condition")
}

fn scope<R: Rng + ?Sized>(rng: &mut R, n: usize) -> (VarId, VarId) {
    let x = VarId(rng.gen_range(0..n as u32));
    if n == 1 || rng.gen_bool(0.2) {
        return (x, x);
    }
    let vars: Vec<u32> = (0..n as u32).filter(|v| *v != x.0).collect();
    (x, VarId(*vars.choose(rng).expect("n > 1")))
}

fn empty_formula(n: usize) -> BijunctiveFormula {
    let mut phi = BijunctiveFormula::new();
    for i in 0..n {
        phi.var(&format!("x{i}"));
    }
    phi
}

/// A random formula with `n` variables and `m` bends.
pub fn random_formula_sized<R: Rng + ?Sized>(rng: &mut R, cfg: &FuzzConfig, n: usize, m: usize) -> BijunctiveFormula {
    let mut phi = empty_formula(n);
    for _ in 0..m {
        let (x, y) = scope(rng, n);
        phi.push(random_bend(rng, cfg, x, y)).expect("variables exist");
    }
    phi
}

/// A formula whose bends all hold at a hidden point, returned alongside it.
pub fn planted_formula_sized<R: Rng + ?Sized>(
    rng: &mut R,
    cfg: &FuzzConfig,
    n: usize,
    m: usize,
) -> (BijunctiveFormula, Assignment) {
    let point: Assignment = (0..n as u32)
        .map(|i| (VarId(i), rational(rng, cfg.const_range / 2 + 1, cfg.max_denominator)))
        .collect();
    let mut phi = empty_formula(n);
    while phi.num_bends() < m {
        let (x, y) = scope(rng, n);
        let b = random_bend(rng, cfg, x, y);
        if b.eval_with(|v| point.get(v).cloned()).unwrap_or(false) {
            phi.push(b).expect("variables exist");
        }
    }
    (phi, point)
}

fn positive<R: Rng + ?Sized>(rng: &mut R, cfg: &FuzzConfig) -> Rational {
    nonzero(rng, cfg).abs()
}

/// A few bends with no common solution: a gadget squeezed between its two
/// values, or a cycle of scaled differences whose constants sum below zero.
fn infeasible_core<R: Rng + ?Sized>(rng: &mut R, cfg: &FuzzConfig, n: usize, max_bends: usize) -> Vec<Bend> {
    let v = VarId(rng.gen_range(0..n as u32));
    if n == 1 || max_bends < 2 || rng.gen_bool(0.25) {
        let a = constant(rng, cfg);
        let b = &a + &positive(rng, cfg);
        if cfg.tvpi_only || max_bends < 3 {
            let below = Bound::finite(v, Rel::Lt, a.clone());
            return vec![Bend::from_bound(Bound::finite(v, Rel::Ge, a)), Bend::from_bound(below)];
        }
        let split = Bend::from_parts(v, v, Some(Bound::finite(v, Rel::Le, a.clone())), None, Some(Bound::finite(v, Rel::Ge, b.clone())))
            .expect("one-variable disjunction");
        return vec![
            Bend::from_bound(Bound::finite(v, Rel::Gt, a)),
            Bend::from_bound(Bound::finite(v, Rel::Lt, b)),
            split,
        ];
    }
    let mut order: Vec<u32> = (0..n as u32).collect();
    order.shuffle(rng);
    let k = rng.gen_range(2..=n.min(max_bends));
    let cycle: Vec<VarId> = order[..k].iter().map(|&i| VarId(i)).collect();
    let mut constants: Vec<Rational> = (0..k).map(|_| constant(rng, cfg)).collect();
    let sum = constants.iter().fold(Rational::zero(), |acc, c| &acc + c);
    let slack = if rng.gen_bool(0.3) { Rational::zero() } else { positive(rng, cfg) };
    constants[k - 1] = &(&constants[k - 1] - &sum) - &slack;
    let strict_at = slack.is_zero().then(|| rng.gen_range(0..k));

    let mut core = Vec::new();
    let mut killers = Vec::new();
    for i in 0..k {
        let (x, y) = (cycle[i], cycle[(i + 1) % k]);
        let s = positive(rng, cfg);
        let t = TvpiIneq::new(x, s.clone(), y, -&s, strict_at == Some(i), &constants[i] * &s)
            .expect("distinct variables");
        let guarded = !cfg.tvpi_only && core.len() + killers.len() + k - i + 1 < max_bends && rng.gen_bool(0.5);
        if guarded {
            // x ≤ d ∨ t ∨ y ≥ e, with x > d and y < e forced elsewhere
            let (d, e) = (constant(rng, cfg), constant(rng, cfg));
            killers.push(Bend::from_bound(Bound::finite(x, Rel::Gt, d.clone())));
            killers.push(Bend::from_bound(Bound::finite(y, Rel::Lt, e.clone())));
            core.push(
                Bend::from_parts(x, y, Some(Bound::finite(x, Rel::Le, d)), Some(t), Some(Bound::finite(y, Rel::Ge, e)))
                    .expect("bounds follow the coefficient signs"),
            );
        } else {
            core.push(Bend::from_ineq(t));
        }
    }
    core.extend(killers);
    core
}

/// An unsatisfiable formula: an infeasible core plus random bends, shuffled.
pub fn refuted_formula_sized<R: Rng + ?Sized>(rng: &mut R, cfg: &FuzzConfig, n: usize, m: usize) -> BijunctiveFormula {
    let mut bends = infeasible_core(rng, cfg, n, m.max(2));
    while bends.len() < m {
        let (x, y) = scope(rng, n);
        bends.push(random_bend(rng, cfg, x, y));
    }
    bends.shuffle(rng);
    let mut phi = empty_formula(n);
    for b in bends {
        phi.push(b).expect("variables exist");
    }
    phi
}

/// Picks sizes from the configuration, then a planted, refuted or plain
/// random instance.
pub fn random_formula<R: Rng + ?Sized>(rng: &mut R, cfg: &FuzzConfig) -> BijunctiveFormula {
    let n = rng.gen_range(1..=cfg.max_vars.max(1));
    let m = rng.gen_range(1..=cfg.max_bends.max(1));
    let roll: f64 = rng.gen();
    if roll < cfg.planted_ratio {
        planted_formula_sized(rng, cfg, n, m).0
    } else if roll < cfg.planted_ratio + cfg.refuted_ratio {
        refuted_formula_sized(rng, cfg, n, m)
    } else {
        random_formula_sized(rng, cfg, n, m)
    }
}

/// `count` formulas from a fixed seed; the same seed always gives the same list.
pub fn generate(seed: u64, count: usize, cfg: &FuzzConfig) -> Vec<BijunctiveFormula> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_formula(&mut rng, cfg)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certify::oracle::brute_force_sat;

    #[test]
    fn seeds_are_reproducible() {
        let cfg = FuzzConfig::default();
        let a = generate(7, 20, &cfg);
        let b = generate(7, 20, &cfg);
        assert_eq!(a, b);
        assert_ne!(a, generate(8, 20, &cfg));
    }

    #[test]
    fn planted_point_satisfies() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let cfg = FuzzConfig::default();
        for _ in 0..50 {
            let (phi, point) = planted_formula_sized(&mut rng, &cfg, 4, 6);
            assert!(phi.eval(&point).unwrap());
        }
    }

    #[test]
    fn refuted_instances_have_no_solution() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for tvpi_only in [false, true] {
            let cfg = FuzzConfig {
                tvpi_only,
                ..FuzzConfig::default()
            };
            for _ in 0..200 {
                let n = rng.gen_range(1..=5);
                let m = rng.gen_range(1..=8);
                let phi = refuted_formula_sized(&mut rng, &cfg, n, m);
                assert!(phi.num_bends() <= m.max(2), "{phi:?}");
                assert!(!brute_force_sat(&phi).unwrap().is_sat(), "{phi:?}");
            }
        }
    }

    #[test]
    fn tvpi_only_has_no_disjunctions() {
        let cfg = FuzzConfig {
            tvpi_only: true,
            ..FuzzConfig::default()
        };
        for phi in generate(3, 50, &cfg) {
            assert!(phi.bends().iter().all(|b| b.literal_count() == 1));
        }
    }
}
