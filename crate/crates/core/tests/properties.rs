mod common;

use cjss::bench::{deviation, render_gantt, GanttFormat};
use cjss::energy::{energy, residuals};
use cjss::init::{list_schedule, DispatchRule, RuleKind};
use cjss::model::{build_constraints, cycle_time, is_feasible, parse_instance, serialize_instance, span, validate};
use cjss::repair::{adhere_conjunctive, adhere_disjunctive, compact, integerize, make_feasible, sequences_of};
use cjss::solver::{descent_step, solve, SolverConfig, Variant};
use cjss::{Instance, Schedule};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{energy_oracle, random_instance, random_schedule};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn case(seed: u64) -> (Instance, Schedule) {
    let mut r = rng(seed);
    let inst = random_instance(&mut r, 12, 4, 20);
    let s = random_schedule(&mut r, &inst);
    (inst, s)
}

fn rectangular(n: usize, m: usize, seed: u64) -> Instance {
    let mut r = rng(seed);
    let routes: Vec<Vec<(usize, u32)>> =
        (0..n).map(|_| (0..m).map(|_| (r.random_range(0..m), r.random_range(1..=99))).collect()).collect();
    let refs: Vec<&[(usize, u32)]> = routes.iter().map(Vec::as_slice).collect();
    Instance::from_routes("rect", m, &refs).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn parse_serialize_round_trip(n in 1usize..8, m in 1usize..8, seed in any::<u64>()) {
        let inst = rectangular(n, m, seed);
        let text = serialize_instance(&inst).unwrap();
        let back = parse_instance(&text, "rect").unwrap();
        prop_assert_eq!(&back, &inst);
        prop_assert_eq!(serialize_instance(&back).unwrap(), text);
    }

    #[test]
    fn constraint_counts(seed in any::<u64>()) {
        let (inst, _) = case(seed);
        let cs = build_constraints(&inst);
        prop_assert_eq!(cs.gamma(), inst.op_count() - inst.job_count());
        let omega: usize = common::machine_groups(&inst).iter().map(|g| g.len() * g.len().saturating_sub(1) / 2).sum();
        prop_assert_eq!(cs.omega(), omega);
        prop_assert_eq!(cs.xi(), cs.gamma() + cs.omega());
    }

    #[test]
    fn zero_penalty_iff_feasible(seed in any::<u64>(), repair in any::<bool>()) {
        let (inst, mut s) = case(seed);
        let cs = build_constraints(&inst);
        if repair {
            s = make_feasible(&inst, &cs, &s).unwrap();
        }
        let e = energy(&inst, &cs, &s, 1.0).unwrap();
        prop_assert_eq!(e.penalty == 0.0, validate(&inst, &cs, &s).feasible);
        prop_assert_eq!(e.total, e.objective + e.penalty);
    }

    #[test]
    fn energy_matches_oracle(seed in any::<u64>(), k in 0.01f64..100.0) {
        let (inst, s) = case(seed);
        let cs = build_constraints(&inst);
        let e = energy(&inst, &cs, &s, k).unwrap();
        let want = energy_oracle(&inst, s.starts(), k);
        prop_assert!((e.total - want).abs() <= 1e-9 * want.abs().max(1.0));
    }

    #[test]
    fn energy_grows_with_k_when_infeasible(seed in any::<u64>(), k1 in 0.01f64..10.0, dk in 0.01f64..10.0) {
        let (inst, s) = case(seed);
        let cs = build_constraints(&inst);
        let e1 = energy(&inst, &cs, &s, k1).unwrap();
        let e2 = energy(&inst, &cs, &s, k1 + dk).unwrap();
        if e1.penalty > 0.0 {
            prop_assert!(e2.total > e1.total);
        } else {
            prop_assert_eq!(e2.total, e1.total);
        }
    }

    #[test]
    fn residuals_are_affine(seed in any::<u64>()) {
        let (inst, s) = case(seed);
        let cs = build_constraints(&inst);
        let doubled = Schedule::new(&inst, s.starts().iter().map(|v| 2.0 * v).collect()).unwrap();
        let r1 = residuals(&inst, &cs, &s);
        let r2 = residuals(&inst, &cs, &doubled);
        // the orientation is scale invariant, so r - p doubles exactly
        let p_term = |i: usize| -> f64 {
            let pairs: Vec<(usize, usize)> = cs.conjunctive().iter().copied().chain(cs.disjunctive().iter().copied()).collect();
            let (a, b) = pairs[i];
            if i < cs.gamma() || s.start(a) <= s.start(b) { inst.duration(a) } else { inst.duration(b) }
        };
        for i in 0..r1.len() {
            let p = p_term(i);
            prop_assert!(((r2[i] - p) - 2.0 * (r1[i] - p)).abs() <= 1e-9 * (1.0 + r1[i].abs()));
        }
    }

    #[test]
    fn repair_is_sound(seed in any::<u64>()) {
        let (inst, s) = case(seed);
        let cs = build_constraints(&inst);
        let f = make_feasible(&inst, &cs, &s).unwrap();
        prop_assert!(is_feasible(&inst, &cs, &f));
        prop_assert_eq!(make_feasible(&inst, &cs, &f).unwrap(), f.clone());
        let c = compact(&inst, &cs, &f).unwrap();
        prop_assert!(is_feasible(&inst, &cs, &c));
        // fractional starts can round C_max - S_min a few ulps below the
        // exact integer value that compaction recovers
        let tf = cycle_time(&inst, &f);
        prop_assert!(cycle_time(&inst, &c) <= tf + 1e-12 * tf);
        prop_assert_eq!(span(&inst, &c).0, 0.0);
        prop_assert_eq!(compact(&inst, &cs, &c).unwrap(), c.clone());
        prop_assert_eq!(sequences_of(&cs, &c), sequences_of(&cs, &f));
    }

    #[test]
    fn adhere_passes_only_shift_right(seed in any::<u64>()) {
        let (inst, s) = case(seed);
        let cs = build_constraints(&inst);
        let d = adhere_disjunctive(&inst, &cs, &s);
        prop_assert!(d.starts().iter().zip(s.starts()).all(|(a, b)| a >= b));
        prop_assert_eq!(sequences_of(&cs, &d), sequences_of(&cs, &s));
        prop_assert!(validate(&inst, &cs, &d).disjunctive_violations.is_empty());
        let c = adhere_conjunctive(&inst, &s);
        prop_assert!(c.starts().iter().zip(s.starts()).all(|(a, b)| a >= b));
        prop_assert!(validate(&inst, &cs, &c).conjunctive_violations.is_empty());
    }

    #[test]
    fn integerize_yields_integral_feasible(seed in any::<u64>()) {
        let (inst, s) = case(seed);
        let cs = build_constraints(&inst);
        let f = make_feasible(&inst, &cs, &s).unwrap();
        let i = integerize(&inst, &cs, &f).unwrap();
        prop_assert!(i.is_integral());
        prop_assert!(is_feasible(&inst, &cs, &i));
        prop_assert_eq!(sequences_of(&cs, &i), sequences_of(&cs, &f));
    }

    #[test]
    fn feasible_schedules_clear_the_next_cycle(seed in any::<u64>()) {
        let (inst, s) = case(seed);
        let cs = build_constraints(&inst);
        let f = make_feasible(&inst, &cs, &s).unwrap();
        let report = validate(&inst, &cs, &f);
        prop_assert!(report.cross_cycle_ok);
        // every op in occurrence k + 1 starts after every op in occurrence k ends
        let tau = cycle_time(&inst, &f);
        for a in 0..inst.op_count() {
            for b in 0..inst.op_count() {
                if inst.op(a).machine == inst.op(b).machine {
                    let end_a = f.start(a) + inst.duration(a);
                    for k in 0..3 {
                        prop_assert!(end_a + tau * k as f64 <= f.start(b) + tau * (k + 1) as f64 + 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn dispatch_schedules_are_feasible_and_semi_active(seed in any::<u64>(), rule in 0usize..3) {
        let (inst, _) = case(seed);
        let cs = build_constraints(&inst);
        let s = list_schedule(&inst, &DispatchRule::new(RuleKind::ALL[rule]), seed).unwrap();
        prop_assert!(is_feasible(&inst, &cs, &s));
        prop_assert!(s.is_integral());
        prop_assert_eq!(compact(&inst, &cs, &s).unwrap(), s.clone());
        prop_assert_eq!(list_schedule(&inst, &DispatchRule::new(RuleKind::ALL[rule]), seed).unwrap(), s);
    }

    #[test]
    fn cdrp_is_the_argmin(seed in any::<u64>()) {
        let (inst, _) = case(seed);
        let best = cjss::cdrp(&inst, seed);
        let taus: Vec<f64> = RuleKind::ALL
            .iter()
            .map(|&k| {
                let rs = if k == RuleKind::Random { seed ^ 0x9e37_79b9_7f4a_7c15 } else { seed };
                cycle_time(&inst, &list_schedule(&inst, &DispatchRule::new(k), rs).unwrap())
            })
            .collect();
        prop_assert_eq!(cycle_time(&inst, &best), taus.iter().copied().fold(f64::INFINITY, f64::min));
    }

    #[test]
    fn deviation_is_scale_invariant(a in 1.0f64..1e4, b in 1.0f64..1e4, c in 0.01f64..100.0) {
        let d1 = deviation(a, b).unwrap();
        let d2 = deviation(c * a, c * b).unwrap();
        prop_assert!((d1 - d2).abs() <= 1e-9 * d1.abs().max(1.0));
    }

    #[test]
    fn gantt_has_one_box_per_op(seed in any::<u64>()) {
        let (inst, s) = case(seed);
        let cs = build_constraints(&inst);
        let f = compact(&inst, &cs, &make_feasible(&inst, &cs, &s).unwrap()).unwrap();
        let svg = render_gantt(&inst, &cs, &f, GanttFormat::Svg).unwrap();
        prop_assert_eq!(svg.matches("<rect class=\"op\"").count(), inst.op_count());
        prop_assert_eq!(svg.matches("<g class=\"lane\"").count(), inst.machine_count());
        let text = render_gantt(&inst, &cs, &f, GanttFormat::Text).unwrap();
        prop_assert_eq!(text.lines().count(), 1 + inst.machine_count());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn solve_is_reproducible_and_feasible(seed in any::<u64>(), lrrnn in any::<bool>()) {
        let (inst, _) = case(seed);
        let cs = build_constraints(&inst);
        let cfg = SolverConfig {
            max_iters: 400,
            seed,
            variant: if lrrnn { Variant::Lrrnn } else { Variant::Rnn },
            trace_every: Some(50),
            ..SolverConfig::default()
        };
        let a = solve(&inst, &cfg).unwrap();
        let b = solve(&inst, &cfg).unwrap();
        prop_assert!(is_feasible(&inst, &cs, &a.best_schedule));
        prop_assert_eq!(a.best_tau, cycle_time(&inst, &a.best_schedule));
        prop_assert!(a.best_tau <= a.init_tau);
        prop_assert!(a.improvements.windows(2).all(|w| w[1].1 < w[0].1));
        prop_assert_eq!(&a.best_schedule, &b.best_schedule);
        prop_assert_eq!((a.iterations, a.best_iteration, a.perturbations), (b.iterations, b.best_iteration, b.perturbations));
        prop_assert_eq!(&a.energy_trace, &b.energy_trace);
        prop_assert_eq!(&a.improvements, &b.improvements);
    }
}

/// A small step never raises the energy unless a kink is crossed: a
/// residual changes sign, an orientation flips, or the argmax/argmin set
/// changes.
#[test]
fn small_steps_descend_away_from_kinks() {
    let mut checked = 0;
    for seed in 0..2000u64 {
        let mut r = rng(seed);
        let inst = random_instance(&mut r, 10, 3, 20);
        let cs = build_constraints(&inst);
        let s = random_schedule(&mut r, &inst);
        let k = 1.0;
        let mu = 1e-4 * f64::from(inst.max_duration());
        let next = descent_step(&inst, &cs, &s, mu, k, None);
        let signs = |x: &Schedule| -> Vec<bool> { residuals(&inst, &cs, x).iter().map(|&v| v > 0.0).collect() };
        let order =
            |x: &Schedule| -> Vec<bool> { cs.disjunctive().iter().map(|&(a, b)| x.start(a) <= x.start(b)).collect() };
        let extremes = |x: &Schedule| -> (Vec<usize>, Vec<usize>) {
            let (lo, hi) = span(&inst, x);
            (
                (0..inst.op_count()).filter(|&i| x.start(i) == lo).collect(),
                (0..inst.op_count()).filter(|&i| x.start(i) + inst.duration(i) == hi).collect(),
            )
        };
        let (mins, maxs) = extremes(&s);
        let clamped = next.starts().contains(&0.0);
        if mins.len() != 1 || maxs.len() != 1 || clamped {
            continue;
        }
        if signs(&s) != signs(&next) || order(&s) != order(&next) || extremes(&s) != extremes(&next) {
            continue;
        }
        let e0 = energy(&inst, &cs, &s, k).unwrap().total;
        let e1 = energy(&inst, &cs, &next, k).unwrap().total;
        assert!(e1 <= e0 + 1e-9 * e0.abs(), "seed {seed}: {e0} -> {e1}");
        checked += 1;
    }
    assert!(checked > 500, "only {checked} usable trials");
}
