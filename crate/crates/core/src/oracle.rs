//! Brute-force references and random generators used to check the solver.

use std::collections::BTreeSet;

use itertools::Itertools;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Criterion, Instance, Job, Piece, Rational, Schedule};
use crate::pfs_lp::{build_lp, determine_order, on_time_feasible};
use crate::simplex::{self, LpOutcome};

pub const DEFAULT_ORDER_CAP: usize = 8;
pub const DEFAULT_SUBSET_CAP: usize = 16;

/// Subsets of at most this many jobs are also checked against LP-free bounds.
const CROSS_CHECK_LIMIT: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Optimality {
    /// Provably optimal over all feasible schedules.
    Optimal,
    /// Best over PFS-like schedules only; releases differ and no agreeable order exists.
    BestPfsLike,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EnumerationResult {
    pub value: Rational,
    pub order: Vec<usize>,
    pub label: Optimality,
}

pub fn enumerate_orders_optimum(instance: &Instance, criterion: &Criterion) -> Result<EnumerationResult> {
    enumerate_orders_optimum_capped(instance, criterion, DEFAULT_ORDER_CAP)
}

/// Minimum of the fixed-order LP over all `n!` orders. Ties go to the
/// lexicographically smallest order.
pub fn enumerate_orders_optimum_capped(
    instance: &Instance,
    criterion: &Criterion,
    cap: usize,
) -> Result<EnumerationResult> {
    let n = instance.len();
    if n > cap {
        return Err(Error::TooLarge(format!("{n} jobs exceed the enumeration cap of {cap}")));
    }
    let mut best: Option<(Rational, Vec<usize>)> = None;
    for order in (1..=n).permutations(n) {
        let model = build_lp(instance, &order, criterion)?;
        let value = match simplex::solve(model.lp())? {
            LpOutcome::Optimal(s) => s.value,
            _ => return Err(Error::Internal(format!("fixed-order LP for {order:?} has no optimum"))),
        };
        if best.as_ref().is_none_or(|(b, _)| value < *b) {
            best = Some((value, order));
        }
    }
    let (value, order) = best.expect("at least one order");
    let label = if instance.has_equal_releases() || determine_order(instance, criterion).is_ok() {
        Optimality::Optimal
    } else {
        Optimality::BestPfsLike
    };
    Ok(EnumerationResult { value, order, label })
}

/// Optimal preemptive makespan without releases: `max(max p_j, Σ p_j / m)`.
pub fn mcnaughton_cmax(instance: &Instance) -> Result<Rational> {
    if !instance.has_equal_releases() {
        return Err(Error::ReleasesPresent);
    }
    let jobs = instance.jobs();
    let longest = jobs.iter().map(|j| j.processing.clone()).max().expect("non-empty");
    let total: Rational = jobs.iter().map(|j| j.processing.clone()).sum();
    let spread = total / Rational::from(instance.machines());
    // Every job starts at the common release.
    Ok(&jobs[0].release + longest.max(spread))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LateJobsOptimum {
    pub value: Rational,
    pub on_time: BTreeSet<usize>,
}

pub fn brute_force_late_jobs(instance: &Instance, due: &Rational) -> Result<LateJobsOptimum> {
    brute_force_late_jobs_capped(instance, due, DEFAULT_SUBSET_CAP)
}

/// Lightest late set over all `2^n` on-time subsets.
///
/// Each subset is tested with the deadline LP in `(r, p)` order. Subsets are
/// visited by increasing late weight, so the first feasible one is optimal;
/// ties go to the lexicographically smallest on-time set. Subsets violating
/// simple capacity bounds are skipped without an LP solve, and on small
/// instances both tests are run and must agree.
pub fn brute_force_late_jobs_capped(instance: &Instance, due: &Rational, cap: usize) -> Result<LateJobsOptimum> {
    let n = instance.len();
    if n > cap {
        return Err(Error::TooLarge(format!("{n} jobs exceed the subset cap of {cap}")));
    }
    let weight = |j: &Job| -> Result<Rational> {
        j.weight.clone().ok_or_else(|| Error::InvalidCriterion(format!("job {} has no weight", j.id)))
    };
    let weights: Vec<Rational> = instance.jobs().iter().map(weight).collect::<Result<_>>()?;
    let total: Rational = weights.iter().cloned().sum();

    let mut subsets: Vec<(Rational, Vec<usize>)> = (0u32..1 << n)
        .map(|mask| {
            let ids: Vec<usize> = (1..=n).filter(|j| mask & (1 << (j - 1)) != 0).collect();
            let on_time: Rational = ids.iter().map(|&j| weights[j - 1].clone()).sum();
            (&total - &on_time, ids)
        })
        .collect();
    subsets.sort();

    let cross_check = n <= CROSS_CHECK_LIMIT;
    let mut found: Option<LateJobsOptimum> = None;
    for (value, mut ids) in subsets {
        if found.is_some() && !cross_check {
            break;
        }
        let bounds_ok = capacity_bounds_hold(instance, &ids, due);
        if !bounds_ok && !cross_check {
            continue;
        }
        ids.sort_by(|&a, &b| {
            let (a, b) = (instance.job(a), instance.job(b));
            (&a.release, &a.processing, a.id).cmp(&(&b.release, &b.processing, b.id))
        });
        let feasible = on_time_feasible(instance, &ids, due)?;
        if feasible && !bounds_ok {
            return Err(Error::Internal(format!("on-time set {ids:?} passes the LP but breaks a capacity bound")));
        }
        let equal_releases = ids.windows(2).all(|w| instance.job(w[0]).release == instance.job(w[1]).release);
        if bounds_ok && equal_releases && !feasible {
            return Err(Error::Internal(format!(
                "on-time set {ids:?} meets the exact capacity bound but fails the LP"
            )));
        }
        if feasible && found.is_none() {
            found = Some(LateJobsOptimum { value, on_time: ids.into_iter().collect() });
        }
    }
    found.ok_or_else(|| Error::Internal("the empty on-time set is always feasible".into()))
}

/// Necessary conditions for meeting `due`: each job fits after its release,
/// and for every release `ρ` the jobs released at or after `ρ` fit into
/// `m(d - ρ)`. Exact when all releases are equal.
fn capacity_bounds_hold(instance: &Instance, ids: &[usize], due: &Rational) -> bool {
    let m = Rational::from(instance.machines());
    ids.iter().all(|&j| {
        let job = instance.job(j);
        &job.release + &job.processing <= *due
    }) && ids.iter().all(|&k| {
        let rho = &instance.job(k).release;
        let load: Rational =
            ids.iter().map(|&j| instance.job(j)).filter(|j| j.release >= *rho).map(|j| j.processing.clone()).sum();
        load <= &m * &(due - rho)
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub n: usize,
    pub m: usize,
    /// Upper bound for releases, processing times, due dates and weights.
    pub max_value: u32,
    pub seed: u64,
    /// Pair the i-th smallest release with the i-th smallest processing time.
    pub agreeable: bool,
}

/// Integer instance drawn from `config`. Releases and due dates lie in
/// `0..=max_value`, processing times and weights in `1..=max_value`.
pub fn random_instance(config: &GeneratorConfig) -> Result<Instance> {
    if config.n == 0 || config.m == 0 || config.max_value == 0 {
        return Err(Error::InvalidInstance(format!("invalid generator config {config:?}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let hi = config.max_value;
    let mut releases: Vec<u32> = (0..config.n).map(|_| rng.gen_range(0..=hi)).collect();
    let mut processing: Vec<u32> = (0..config.n).map(|_| rng.gen_range(1..=hi)).collect();
    if config.agreeable {
        releases.sort_unstable();
        processing.sort_unstable();
    }
    let jobs = (0..config.n)
        .map(|i| {
            Job::new(i + 1, Rational::from(releases[i]), Rational::from(processing[i]))
                .with_due(Rational::from(rng.gen_range(0..=hi)))
                .with_weight(Rational::from(rng.gen_range(1..=hi)))
        })
        .collect();
    Instance::new(config.m, jobs)
}

/// Randomized list scheduling: at each step a random subset of the released
/// unfinished jobs runs on randomly chosen machines for a random length in
/// halves, and now and then every machine idles.
pub fn random_feasible_schedule(instance: &Instance, seed: u64) -> Schedule {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = instance.machines();
    let mut remaining: Vec<Rational> = instance.jobs().iter().map(|j| j.processing.clone()).collect();
    let mut t = Rational::zero();
    let mut pieces = Vec::new();
    let lengths = [Rational::new(1, 2), Rational::new(1, 1), Rational::new(3, 2), Rational::new(2, 1)]
        .map(|r| r.expect("nonzero denominators"));

    while remaining.iter().any(Rational::is_positive) {
        let mut ready: Vec<usize> = instance
            .jobs()
            .iter()
            .filter(|j| remaining[j.id - 1].is_positive() && j.release <= t)
            .map(|j| j.id)
            .collect();
        if ready.is_empty() {
            t = instance
                .jobs()
                .iter()
                .filter(|j| remaining[j.id - 1].is_positive())
                .map(|j| j.release.clone())
                .min()
                .expect("work remains");
            continue;
        }
        let step = lengths.choose(&mut rng).expect("non-empty").clone();
        if rng.gen_bool(0.15) {
            t += step;
            continue;
        }
        ready.shuffle(&mut rng);
        let count = rng.gen_range(1..=ready.len().min(m));
        let mut machines: Vec<usize> = (1..=m).collect();
        machines.shuffle(&mut rng);
        let step = ready[..count].iter().map(|&j| remaining[j - 1].clone()).fold(step, Rational::min);
        let end = &t + &step;
        for (&j, &q) in ready[..count].iter().zip(&machines) {
            pieces.push(Piece::new(j, q, t.clone(), end.clone()));
            remaining[j - 1] -= &step;
        }
        t = end;
    }
    Schedule::new(pieces).expect("pieces are well formed").merged()
}
