use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use pfs_core::model::{completion_vector, evaluate, evaluate_completions};
use pfs_core::oracle::{
    enumerate_orders_optimum, mcnaughton_cmax, random_feasible_schedule, random_instance, GeneratorConfig,
};
use pfs_core::pfs_lp::{build_lp, solve};
use pfs_core::simplex::{self, LinearProgram, LpOutcome, Relation, VarId};
use pfs_core::transform::{left_shift_normalize, vertical_order};
use pfs_core::validate::{check_feasible, is_non_delay, is_vertically_ordered};
use pfs_core::{q, Criterion, Instance, Job, Piece, Rational, Schedule};

fn instance(n: usize, m: usize, seed: u64, agreeable: bool) -> Instance {
    random_instance(&GeneratorConfig { n, m, max_value: 6, seed, agreeable }).unwrap()
}

fn without_releases(i: &Instance) -> Instance {
    let jobs = i.jobs().iter().map(|j| Job { release: Rational::zero(), ..j.clone() }).collect();
    Instance::new(i.machines(), jobs).unwrap()
}

/// Whether moving a sliver of some job's last piece into an earlier idle
/// machine gives a feasible schedule. Tries every machine at every event.
fn has_permissible_left_shift(i: &Instance, s: &Schedule) -> bool {
    let mut events: Vec<Rational> = s
        .pieces()
        .iter()
        .flat_map(|p| [p.start.clone(), p.end.clone()])
        .chain(i.jobs().iter().map(|j| j.release.clone()))
        .collect();
    events.sort();
    events.dedup();
    for w in events.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let gap = (b - a) / q!(2);
        for q in 1..=i.machines() {
            if s.pieces().iter().any(|p| p.machine == q && p.covers(a)) {
                continue;
            }
            for job in i.jobs() {
                let Some(last) = s.pieces_of(job.id).max_by(|x, y| x.end.cmp(&y.end)).cloned() else {
                    continue;
                };
                if last.end <= *b {
                    continue;
                }
                let eps = gap.clone().min(last.len());
                let mut pieces: Vec<Piece> = s.pieces().iter().filter(|p| **p != last).cloned().collect();
                let cut = &last.end - &eps;
                pieces.push(Piece::new(job.id, last.machine, last.start.clone(), cut));
                pieces.push(Piece::new(job.id, q, a.clone(), a + &eps));
                let moved = Schedule::new(pieces).unwrap();
                if check_feasible(i, &moved).is_ok() {
                    return true;
                }
            }
        }
    }
    false
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn feasibility_ignores_piece_order(n in 1usize..6, m in 1usize..4, seed in any::<u64>()) {
        let i = instance(n, m, seed, false);
        let s = random_feasible_schedule(&i, seed);
        let mut pieces = s.pieces().to_vec();
        pieces.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert!(check_feasible(&i, &s).is_ok());
        prop_assert!(check_feasible(&i, &Schedule::new(pieces).unwrap()).is_ok());
    }

    #[test]
    fn vertical_order_keeps_completions(n in 1usize..6, m in 1usize..4, seed in any::<u64>()) {
        let i = instance(n, m, seed, false);
        let s = random_feasible_schedule(&i, seed);
        let v = vertical_order(&s).unwrap();
        prop_assert!(check_feasible(&i, &v).is_ok());
        prop_assert!(is_vertically_ordered(&v).unwrap().is_ok());
        prop_assert_eq!(completion_vector(&i, &v).unwrap(), completion_vector(&i, &s).unwrap());
        prop_assert_eq!(vertical_order(&v).unwrap(), v);
    }

    #[test]
    fn left_shift_removes_delays(n in 1usize..6, m in 1usize..4, seed in any::<u64>()) {
        let i = instance(n, m, seed, false);
        let s = random_feasible_schedule(&i, seed);
        let out = left_shift_normalize(&i, &s).unwrap();
        prop_assert!(check_feasible(&i, &out).is_ok());
        prop_assert!(is_non_delay(&i, &out).unwrap().is_ok());
        let before = completion_vector(&i, &s).unwrap();
        let after = completion_vector(&i, &out).unwrap();
        prop_assert!(after.iter().zip(&before).all(|(a, b)| a <= b));
        prop_assert_eq!(left_shift_normalize(&i, &out).unwrap(), out);
    }

    #[test]
    fn non_delay_agrees_with_fragment_moves(n in 1usize..5, m in 1usize..4, seed in any::<u64>()) {
        let i = instance(n, m, seed, false);
        let s = random_feasible_schedule(&i, seed);
        for s in [s.clone(), left_shift_normalize(&i, &s).unwrap()] {
            let ok = is_non_delay(&i, &s).unwrap().is_ok();
            prop_assert_eq!(ok, !has_permissible_left_shift(&i, &s), "{:?}", s);
        }
    }

    #[test]
    fn regular_criteria_are_monotone(
        n in 1usize..6,
        seed in any::<u64>(),
        base in prop::collection::vec(0i64..20, 6),
        bump in prop::collection::vec(0i64..5, 6),
    ) {
        let i = instance(n, 2, seed, false);
        let c: Vec<Rational> = base[..n].iter().map(|&x| q!(x)).collect();
        let later: Vec<Rational> = c.iter().zip(&bump).map(|(x, &d)| x + &q!(d)).collect();
        let due = i.job(1).due.clone().unwrap();
        for crit in [
            Criterion::total_completion(n),
            Criterion::total_weighted_tardiness(&i).unwrap(),
            Criterion::max_lateness(&i).unwrap(),
            Criterion::weighted_late_common_due(due),
        ] {
            prop_assert!(evaluate_completions(&i, &c, &crit) <= evaluate_completions(&i, &later, &crit));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn lp_completions_follow_the_order(n in 1usize..5, m in 1usize..4, seed in any::<u64>()) {
        let i = instance(n, m, seed, false);
        let mut order: Vec<usize> = (1..=n).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let crit = Criterion::total_weighted_tardiness(&i).unwrap();
        let model = build_lp(&i, &order, &crit).unwrap();
        let lp = model.read(&simplex::solve(model.lp()).unwrap().optimal().unwrap());
        prop_assert!(lp.completions.windows(2).all(|w| w[0] <= w[1]));
        // An arbitrary order need not be a completion order, so the LP only
        // bounds the schedules built from it.
        let s = solve(&i, &crit, Some(&order)).unwrap();
        prop_assert!(evaluate(&i, &s.extracted, &crit).unwrap() <= s.lp_value);
        prop_assert!(s.value <= s.lp_value);
        prop_assert!(check_feasible(&i, &s.schedule).is_ok());
    }

    #[test]
    fn enumeration_is_a_lower_bound(n in 1usize..5, m in 1usize..4, seed in any::<u64>()) {
        let i = instance(n, m, seed, false);
        let crit = Criterion::total_weighted_tardiness(&i).unwrap();
        let best = enumerate_orders_optimum(&i, &crit).unwrap();
        let mut order: Vec<usize> = (1..=n).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed ^ 1));
        prop_assert!(best.value <= solve(&i, &crit, Some(&order)).unwrap().lp_value);
    }

    #[test]
    fn makespan_without_releases_is_closed_form(n in 1usize..7, m in 1usize..4, seed in any::<u64>()) {
        let i = without_releases(&instance(n, m, seed, false));
        let s = solve(&i, &Criterion::makespan(n), None).unwrap();
        prop_assert_eq!(s.value, mcnaughton_cmax(&i).unwrap());
    }

    #[test]
    fn lp_duality(
        rows in 1usize..4,
        cols in 1usize..4,
        a in prop::collection::vec(-3i64..4, 9),
        b in prop::collection::vec(-3i64..4, 3),
        c in prop::collection::vec(-2i64..4, 3),
    ) {
        // min c·x, Ax ≥ b, x ≥ 0  against  max b·y, Aᵀy ≤ c, y ≥ 0.
        let entry = |r: usize, k: usize| q!(a[r * 3 + k]);
        let mut primal = LinearProgram::new();
        let x: Vec<VarId> = (0..cols).map(|k| primal.add_variable(format!("x{k}"), Some(q!(0)))).collect();
        for (r, &rhs) in b.iter().enumerate().take(rows) {
            primal.add_constraint((0..cols).map(|k| (x[k], entry(r, k))), Relation::Ge, q!(rhs));
        }
        primal.set_objective((0..cols).map(|k| (x[k], q!(c[k]))));
        let mut dual = LinearProgram::new();
        let y: Vec<VarId> = (0..rows).map(|r| dual.add_variable(format!("y{r}"), Some(q!(0)))).collect();
        for (k, &cost) in c.iter().enumerate().take(cols) {
            dual.add_constraint((0..rows).map(|r| (y[r], entry(r, k))), Relation::Le, q!(cost));
        }
        dual.set_objective((0..rows).map(|r| (y[r], -q!(b[r]))));

        match (simplex::solve(&primal).unwrap(), simplex::solve(&dual).unwrap()) {
            (LpOutcome::Optimal(p), LpOutcome::Optimal(d)) => {
                prop_assert!(primal.is_feasible(&p.values));
                prop_assert!(dual.is_feasible(&d.values));
                prop_assert_eq!(p.value, -d.value);
            }
            (LpOutcome::Optimal(_), other) | (other, LpOutcome::Optimal(_)) => {
                prop_assert!(false, "one side optimal, the other {:?}", other);
            }
            (LpOutcome::Unbounded, d) => prop_assert!(d.is_infeasible()),
            (p, LpOutcome::Unbounded) => prop_assert!(p.is_infeasible()),
            (LpOutcome::Infeasible, LpOutcome::Infeasible) => {}
        }
    }
}
