mod common;

use std::collections::BTreeMap;

use bendsat::certify::check::{check_refutation, check_witness, read_refutation, write_refutation};
use bendsat::certify::fuzz::{random_bend, FuzzConfig};
use bendsat::certify::handcuff::find_handcuff_refutation;
use bendsat::certify::oracle::{brute_force_sat, OracleAnswer};
use bendsat::eliminate::{breakpoints, eliminate_variable, fix_strip, Reduced, Strip};
use bendsat::num::{reset_stats, stats};
use bendsat::propagate::{propagate, run, Answer};
use bendsat::{
    bound_implies, normalize_bend, parse, pretty_print, solve, solve_with, strongest_bound, Bend, Bound, Literal,
    Rational, Rel, Side, SolveOptions, SolveResult, VarId,
};
use common::*;
use proptest::prelude::*;
use rand::Rng;

fn arb_rel() -> impl Strategy<Value = Rel> {
    prop_oneof![Just(Rel::Le), Just(Rel::Lt), Just(Rel::Ge), Just(Rel::Gt)]
}

fn arb_bound(v: VarId) -> impl Strategy<Value = Bound> {
    (arb_rel(), -6i64..=6, 1i64..=2).prop_map(move |(rel, n, d)| Bound::finite(v, rel, Rational::new(n, d)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn canonical_form_is_idempotent(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (x, y) = (VarId(0), VarId(r.gen_range(0..2)));
        let b = random_bend(&mut r, &FuzzConfig::default(), x, y);
        let again = normalize_bend(&b.to_raw_literals()).unwrap();
        prop_assert_eq!(again.key(), b.key());
    }

    #[test]
    fn bound_implication_is_a_partial_order(a in arb_bound(VarId(0)), b in arb_bound(VarId(0)), c in arb_bound(VarId(0))) {
        let imp = |p: &Bound, q: &Bound| bound_implies(p, q).unwrap();
        prop_assert!(imp(&a, &a));
        if imp(&a, &b) && imp(&b, &c) {
            prop_assert!(imp(&a, &c));
        }
        if imp(&a, &b) && imp(&b, &a) {
            prop_assert_eq!(a.interval(), b.interval());
        }
    }

    #[test]
    fn strongest_bound_is_sound_and_tight(seed in any::<u64>(), lo in arb_bound(VarId(0)), hi in arb_bound(VarId(0))) {
        let (u, v) = (VarId(0), VarId(1));
        let lo = if lo.is_upper() { lo.negation() } else { lo };
        let hi = if hi.is_upper() { hi } else { hi.negation() };
        let mut r = rng(seed);
        let cfg = FuzzConfig { tvpi_only: r.gen_bool(0.3), ..FuzzConfig::default() };
        let bend = random_bend(&mut r, &cfg, u, v);
        prop_assume!(bend.mentions(u) && bend.mentions(v));
        let mut base = bendsat::BijunctiveFormula::with_vars(2);
        for b in [Bend::from_bound(lo.clone()), Bend::from_bound(hi.clone()), bend.clone()] {
            base.push(b).unwrap();
        }
        for side in [Side::Lower, Side::Upper] {
            let beta = strongest_bound(&bend, &lo, &hi, v, side).unwrap();
            for uv in grid() {
                if !(lo.holds(&uv) && hi.holds(&uv)) {
                    continue;
                }
                for vv in grid() {
                    if eval2(&bend, u, &uv, v, &vv) {
                        prop_assert!(beta.holds(&vv), "{} fails at u={} v={}", beta, uv, vv);
                    }
                }
            }
            let upper = side == Side::Upper;
            let beyond = |rel: Rel, c: Rational| oracle_sat(&with_bound(&base, v, rel, c));
            if beta.is_unsatisfiable() {
                prop_assert!(!oracle_sat(&base));
            } else if beta.is_trivially_true() {
                let (rel, far) = if upper { (Rel::Ge, q(1000)) } else { (Rel::Le, q(-1000)) };
                prop_assert!(beyond(rel, far));
            } else {
                let c = beta.constant.finite().unwrap().clone();
                let eps = Rational::new(1, 1000);
                let (at, past) = if upper { (Rel::Ge, Rel::Gt) } else { (Rel::Le, Rel::Lt) };
                prop_assert!(!beyond(past, c.clone()));
                if beta.is_strict() {
                    prop_assert!(!beyond(at, c.clone()));
                    let near = if upper { &c - &eps } else { &c + &eps };
                    prop_assert!(beyond(past, near));
                } else {
                    prop_assert!(beyond(at, c));
                }
            }
        }
    }

    #[test]
    fn path_residue_is_associative(seed in any::<u64>()) {
        let mut r = rng(seed);
        let cfg = FuzzConfig::default();
        let bends: Vec<Bend> = (0..3).map(|i| random_bend(&mut r, &cfg, VarId(i), VarId(i + 1))).collect();
        let Some(left) = residue_of(&bends, 0) else { return Ok(()) };
        let Some(tail) = residue_of(&bends[1..], 1) else { return Ok(()) };
        let Some(right) = residue_of(&[bends[0].clone(), tail], 0) else { return Ok(()) };
        for u in grid() {
            for w in grid() {
                prop_assert_eq!(
                    eval2(&left, VarId(0), &u, VarId(3), &w),
                    eval2(&right, VarId(0), &u, VarId(3), &w),
                    "u={} w={}", u, w
                );
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn propagate_decides_under_the_promise(seed in any::<u64>(), s2 in -8i64..=8) {
        let phi = formula(seed, &small_config(4, 6));
        prop_assume!(oracle_sat(&phi));
        let x = VarId((seed % phi.num_vars() as u64) as u32);
        let s = Rational::new(s2, 2);
        let expected = oracle_sat(&with_bound(&phi, x, Rel::Ge, s.clone()));
        prop_assert_eq!(propagate(&phi, x, &s).unwrap() == Answer::Yes, expected);
    }

    #[test]
    fn propagate_no_is_sound(seed in any::<u64>(), s2 in -8i64..=8) {
        let phi = formula(seed, &small_config(4, 6));
        let x = VarId((seed % phi.num_vars() as u64) as u32);
        let s = Rational::new(s2, 2);
        if propagate(&phi, x, &s).unwrap() == Answer::No {
            prop_assert!(!oracle_sat(&with_bound(&phi, x, Rel::Ge, s)));
        }
    }

    #[test]
    fn propagate_bounds_only_tighten(seed in any::<u64>(), s2 in -8i64..=8) {
        let phi = formula(seed, &small_config(5, 8));
        let x = VarId((seed % phi.num_vars() as u64) as u32);
        let (_, st) = run(&phi, &Bound::finite(x, Rel::Ge, Rational::new(s2, 2))).unwrap();
        let mut last: BTreeMap<(VarId, bool), Bound> = BTreeMap::new();
        for imp in &st.log {
            let key = (imp.var, imp.side == Side::Upper);
            if let Some(prev) = last.get(&key) {
                prop_assert!(bound_implies(&imp.bound, prev).unwrap(), "{} weakens {}", imp.bound, prev);
            }
            last.insert(key, imp.bound.clone());
        }
        prop_assert!(st.outer_iterations <= phi.total_literals() + 1);
    }

    #[test]
    fn propagate_operation_count(seed in any::<u64>()) {
        let phi = formula(seed, &small_config(5, 8));
        let (n, m) = (phi.num_vars() as u64, phi.num_bends() as u64);
        reset_stats();
        propagate(&phi, VarId(0), &q(0)).unwrap();
        let ops = stats().ops;
        prop_assert!(ops <= 500 * n * m * m + 500, "{} ops for n={} m={}", ops, n, m);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn solve_agrees_with_the_oracle(seed in any::<u64>()) {
        let phi = formula(seed, &FuzzConfig::default());
        let result = solve(&phi).unwrap();
        prop_assert_eq!(result.is_sat(), oracle_sat(&phi), "{}", pretty_print(&phi));
        if let SolveResult::Sat(w) = &result {
            prop_assert!(check_witness(&phi, w));
        }
    }

    #[test]
    fn parallel_search_agrees(seed in any::<u64>()) {
        let phi = formula(seed, &small_config(6, 12));
        let seq = solve(&phi).unwrap();
        let par = solve_with(&phi, &SolveOptions { parallel: true, ..SolveOptions::default() }).unwrap();
        prop_assert_eq!(seq.is_sat(), par.is_sat());
        if let Some(w) = par.witness() {
            prop_assert!(check_witness(&phi, w));
        }
    }

    #[test]
    fn fixed_strip_is_equisatisfiable(seed in any::<u64>()) {
        let phi = formula(seed, &FuzzConfig::default());
        let x = VarId((seed % phi.num_vars() as u64) as u32);
        let choice = fix_strip(&phi, x, &breakpoints(&phi, x), false).unwrap();
        let mut fixed = bendsat::BijunctiveFormula::with_vars(phi.num_vars());
        let chosen: BTreeMap<usize, bendsat::Slot> = choice.chosen.iter().copied().collect();
        for (i, b) in phi.bends().iter().enumerate() {
            let b = match chosen.get(&i) {
                Some(&slot) => match b.literal(slot).unwrap() {
                    Literal::Bound(bd) => Bend::from_bound(bd),
                    Literal::Ineq(t) => Bend::from_ineq(t),
                },
                None => b.clone(),
            };
            fixed.push(b).unwrap();
        }
        let iv = choice.strip.interval();
        let strip = [iv.lower_bound(x), iv.upper_bound(x)].into_iter().filter(|b| !b.is_trivially_true()).map(Bend::from_bound);
        let fixed = with_bends(&fixed, strip);
        prop_assert_eq!(oracle_sat(&fixed), oracle_sat(&phi), "strip {:?}\n{}", choice.strip, pretty_print(&phi));
    }

    #[test]
    fn at_most_two_inequalities_per_neighbour(seed in any::<u64>()) {
        let phi = formula(seed, &small_config(6, 14));
        let x = VarId(0);
        if let Reduced::Formula(_, rec) = eliminate_variable(&phi, x, false).unwrap() {
            let mut per: BTreeMap<VarId, usize> = BTreeMap::new();
            for lit in &rec.retained {
                if let Literal::Ineq(t) = lit {
                    *per.entry(if t.var_x == x { t.var_y } else { t.var_x }).or_default() += 1;
                }
            }
            if matches!(rec.strip, Strip::Open { .. }) {
                prop_assert!(per.values().all(|&c| c <= 2), "{:?}", rec);
            } else {
                prop_assert!(per.is_empty());
            }
        }
    }

    #[test]
    fn refutations_are_sound_and_survive_printing(seed in any::<u64>()) {
        let phi = formula(seed, &small_config(4, 8));
        if let Some(cert) = find_handcuff_refutation(&phi).unwrap() {
            prop_assert!(!oracle_sat(&phi));
            prop_assert!(check_refutation(&cert, &phi));
            let text = write_refutation(&cert, &phi).unwrap();
            let back = read_refutation(&text, &phi).unwrap();
            prop_assert!(check_refutation(&back, &phi), "{}", text);
        }
    }

    #[test]
    fn oracle_witnesses_check(seed in any::<u64>()) {
        let phi = formula(seed, &FuzzConfig::default());
        if let OracleAnswer::Sat(w) = brute_force_sat(&phi).unwrap() {
            prop_assert!(check_witness(&phi, &w));
        }
    }

    #[test]
    fn printing_round_trips(seed in any::<u64>()) {
        let phi = formula(seed, &FuzzConfig::default());
        let again = parse(&pretty_print(&phi)).unwrap();
        prop_assert_eq!(again.num_bends(), phi.num_bends());
        for (a, b) in phi.bends().iter().zip(again.bends()) {
            prop_assert_eq!(a.key(), b.key());
        }
    }
}
