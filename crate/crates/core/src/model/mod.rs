//! Instances, criteria and schedules.
//!
//! Jobs and machines are 1-based throughout. Every time value is an exact
//! [`Rational`].

mod function;
mod rational;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

pub use function::{PiecewiseLinearFn, Segment};
pub use rational::Rational;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Job {
    pub id: usize,
    pub release: Rational,
    pub processing: Rational,
    pub due: Option<Rational>,
    pub weight: Option<Rational>,
}

impl Job {
    pub fn new(id: usize, release: Rational, processing: Rational) -> Self {
        Job { id, release, processing, due: None, weight: None }
    }

    pub fn with_due(mut self, due: Rational) -> Self {
        self.due = Some(due);
        self
    }

    pub fn with_weight(mut self, weight: Rational) -> Self {
        self.weight = Some(weight);
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    machines: usize,
    jobs: Vec<Job>,
}

impl Instance {
    pub fn new(machines: usize, jobs: Vec<Job>) -> Result<Self> {
        if machines == 0 {
            return Err(Error::InvalidInstance("at least one machine is required".into()));
        }
        if jobs.is_empty() {
            return Err(Error::InvalidInstance("at least one job is required".into()));
        }
        for (i, job) in jobs.iter().enumerate() {
            if job.id != i + 1 {
                return Err(Error::InvalidInstance(format!(
                    "job at position {} has id {}; ids must be 1..n in order",
                    i + 1,
                    job.id
                )));
            }
            if !job.processing.is_positive() {
                return Err(Error::InvalidInstance(format!("job {} has non-positive processing time", job.id)));
            }
            if job.release.is_negative() {
                return Err(Error::InvalidInstance(format!("job {} has a negative release date", job.id)));
            }
            if job.weight.as_ref().is_some_and(Rational::is_negative) {
                return Err(Error::InvalidInstance(format!("job {} has a negative weight", job.id)));
            }
        }
        Ok(Instance { machines, jobs })
    }

    /// Builds jobs `1..=n` from parallel release and processing lists.
    pub fn from_times(machines: usize, releases: &[Rational], processing: &[Rational]) -> Result<Self> {
        if releases.len() != processing.len() {
            return Err(Error::InvalidInstance("release and processing lists differ in length".into()));
        }
        let jobs = releases
            .iter()
            .zip(processing)
            .enumerate()
            .map(|(i, (r, p))| Job::new(i + 1, r.clone(), p.clone()))
            .collect();
        Instance::new(machines, jobs)
    }

    pub fn machines(&self) -> usize {
        self.machines
    }

    pub fn jobs(&self) -> &[Job] {
        &self.jobs
    }

    pub fn len(&self) -> usize {
        self.jobs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.jobs.is_empty()
    }

    /// Panics if `id` is not in `1..=n`.
    pub fn job(&self, id: usize) -> &Job {
        &self.jobs[id - 1]
    }

    pub fn has_equal_releases(&self) -> bool {
        self.jobs.windows(2).all(|w| w[0].release == w[1].release)
    }

    /// The same instance restricted to `ids`, renumbered `1..=k` in the given order.
    /// Returns the sub-instance and the map from new id to old id.
    pub fn restrict(&self, ids: &[usize]) -> Result<(Instance, Vec<usize>)> {
        let jobs = ids.iter().enumerate().map(|(i, &id)| Job { id: i + 1, ..self.job(id).clone() }).collect();
        Ok((Instance::new(self.machines, jobs)?, ids.to_vec()))
    }
}

/// Regular objective to minimize.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Criterion {
    /// `Σ f_j(C_j)`.
    Sum(Vec<PiecewiseLinearFn>),
    /// `max f_j(C_j)`.
    Max(Vec<PiecewiseLinearFn>),
    /// `Σ w_j U_j` with every due date equal to `due`.
    WeightedLateCommonDue { due: Rational },
}

impl Criterion {
    pub fn total_completion(n: usize) -> Self {
        Criterion::Sum(vec![PiecewiseLinearFn::identity(); n])
    }

    pub fn makespan(n: usize) -> Self {
        Criterion::Max(vec![PiecewiseLinearFn::identity(); n])
    }

    pub fn total_weighted_completion(instance: &Instance) -> Result<Self> {
        let fs = instance
            .jobs()
            .iter()
            .map(|j| PiecewiseLinearFn::affine(weight_of(j)?, Rational::zero()))
            .collect::<Result<_>>()?;
        Ok(Criterion::Sum(fs))
    }

    pub fn total_weighted_tardiness(instance: &Instance) -> Result<Self> {
        let fs = instance
            .jobs()
            .iter()
            .map(|j| PiecewiseLinearFn::tardiness(weight_of(j)?, due_of(j)?))
            .collect::<Result<_>>()?;
        Ok(Criterion::Sum(fs))
    }

    /// `Σ T_j`, ignoring weights.
    pub fn total_tardiness(instance: &Instance) -> Result<Self> {
        let fs = instance
            .jobs()
            .iter()
            .map(|j| PiecewiseLinearFn::tardiness(Rational::one(), due_of(j)?))
            .collect::<Result<_>>()?;
        Ok(Criterion::Sum(fs))
    }

    pub fn max_lateness(instance: &Instance) -> Result<Self> {
        let fs = instance.jobs().iter().map(|j| Ok(PiecewiseLinearFn::lateness(due_of(j)?))).collect::<Result<_>>()?;
        Ok(Criterion::Max(fs))
    }

    pub fn weighted_late_common_due(due: Rational) -> Self {
        Criterion::WeightedLateCommonDue { due }
    }

    /// Per-job functions of SUM and MAX criteria.
    pub fn functions(&self) -> Option<&[PiecewiseLinearFn]> {
        match self {
            Criterion::Sum(fs) | Criterion::Max(fs) => Some(fs),
            Criterion::WeightedLateCommonDue { .. } => None,
        }
    }

    pub fn check_against(&self, instance: &Instance) -> Result<()> {
        match self {
            Criterion::Sum(fs) | Criterion::Max(fs) => {
                if fs.len() != instance.len() {
                    return Err(Error::InvalidCriterion(format!("{} functions for {} jobs", fs.len(), instance.len())));
                }
            }
            Criterion::WeightedLateCommonDue { .. } => {
                for job in instance.jobs() {
                    weight_of(job)?;
                }
            }
        }
        Ok(())
    }
}

fn weight_of(job: &Job) -> Result<Rational> {
    job.weight.clone().ok_or_else(|| Error::InvalidCriterion(format!("job {} has no weight", job.id)))
}

fn due_of(job: &Job) -> Result<Rational> {
    job.due.clone().ok_or_else(|| Error::InvalidCriterion(format!("job {} has no due date", job.id)))
}

/// A maximal uninterrupted run of one job on one machine, over `[start, end)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Piece {
    pub job: usize,
    pub machine: usize,
    pub start: Rational,
    pub end: Rational,
}

impl Piece {
    pub fn new(job: usize, machine: usize, start: Rational, end: Rational) -> Self {
        Piece { job, machine, start, end }
    }

    pub fn len(&self) -> Rational {
        &self.end - &self.start
    }

    pub fn covers(&self, t: &Rational) -> bool {
        &self.start <= t && t < &self.end
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Schedule {
    pieces: Vec<Piece>,
}

impl Schedule {
    /// Drops zero-length pieces and stores the rest sorted by machine, then start.
    pub fn new(pieces: Vec<Piece>) -> Result<Self> {
        let mut kept = Vec::with_capacity(pieces.len());
        for p in pieces {
            if p.job == 0 || p.machine == 0 {
                return Err(Error::InvalidPiece(format!("job and machine indices are 1-based ({p:?})")));
            }
            if p.start.is_negative() {
                return Err(Error::InvalidPiece(format!("negative start time ({p:?})")));
            }
            match p.start.cmp(&p.end) {
                std::cmp::Ordering::Less => kept.push(p),
                std::cmp::Ordering::Equal => {}
                std::cmp::Ordering::Greater => return Err(Error::InvalidPiece(format!("start after end ({p:?})"))),
            }
        }
        kept.sort_by(|a, b| (a.machine, &a.start, a.job, &a.end).cmp(&(b.machine, &b.start, b.job, &b.end)));
        Ok(Schedule { pieces: kept })
    }

    pub fn empty() -> Self {
        Schedule::default()
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn into_pieces(self) -> Vec<Piece> {
        self.pieces
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn pieces_of(&self, job: usize) -> impl Iterator<Item = &Piece> {
        self.pieces.iter().filter(move |p| p.job == job)
    }

    /// Joins touching pieces of the same job on the same machine.
    pub fn merged(&self) -> Schedule {
        let mut out: Vec<Piece> = Vec::with_capacity(self.pieces.len());
        let mut sorted = self.pieces.clone();
        sorted.sort_by(|a, b| (a.machine, &a.start).cmp(&(b.machine, &b.start)));
        for p in sorted {
            if let Some(last) = out.last_mut() {
                if last.machine == p.machine && last.job == p.job && last.end == p.start {
                    last.end = p.end;
                    continue;
                }
            }
            out.push(p);
        }
        Schedule::new(out).expect("merging keeps pieces valid")
    }

    /// `C_j`: the latest end over the job's pieces.
    pub fn completion_time(&self, job: usize) -> Result<Rational> {
        self.pieces_of(job).map(|p| &p.end).max().cloned().ok_or(Error::UnknownJob(job))
    }

    /// Completion times of jobs `1..=n`; `None` for jobs without pieces.
    pub fn completion_times(&self, n: usize) -> Vec<Option<Rational>> {
        let mut out = vec![None::<Rational>; n];
        for p in &self.pieces {
            if let Some(slot) = out.get_mut(p.job - 1) {
                match slot {
                    Some(c) if *c >= p.end => {}
                    _ => *slot = Some(p.end.clone()),
                }
            }
        }
        out
    }

    pub fn processed_amount(&self, job: usize) -> Rational {
        self.pieces_of(job).map(Piece::len).sum()
    }

    /// `J(t)`: jobs with a piece `[start, end)` containing `t`.
    pub fn jobs_processed_at(&self, t: &Rational) -> BTreeSet<usize> {
        self.pieces.iter().filter(|p| p.covers(t)).map(|p| p.job).collect()
    }

    /// `M(j, t)` and `C(j, t)`: the machine and piece end of `job` at time `t`.
    pub fn piece_at(&self, job: usize, t: &Rational) -> Option<&Piece> {
        self.pieces.iter().find(|p| p.job == job && p.covers(t))
    }

    /// Latest piece end, or zero for the empty schedule.
    pub fn horizon(&self) -> Rational {
        self.pieces.iter().map(|p| &p.end).max().cloned().unwrap_or_else(Rational::zero)
    }

    /// Renumbers jobs through `map[old_id - 1] = new_id`.
    pub fn relabel(&self, map: &[usize]) -> Schedule {
        let pieces = self.pieces.iter().map(|p| Piece { job: map[p.job - 1], ..p.clone() }).collect();
        Schedule::new(pieces).expect("relabeling keeps pieces valid")
    }
}

/// Position of every job in `order`, indexed by job id minus one.
///
/// Fails unless `order` is a permutation of `1..=n`.
pub fn positions(order: &[usize], n: usize) -> Result<Vec<usize>> {
    if order.len() != n {
        return Err(Error::InvalidOrder(format!("order has {} entries for {} jobs", order.len(), n)));
    }
    let mut pos = vec![usize::MAX; n];
    for (i, &id) in order.iter().enumerate() {
        if id == 0 || id > n || pos[id - 1] != usize::MAX {
            return Err(Error::InvalidOrder(format!("{order:?} is not a permutation of 1..={n}")));
        }
        pos[id - 1] = i;
    }
    Ok(pos)
}

/// Completion times of a complete schedule, indexed by job id minus one.
pub fn completion_vector(instance: &Instance, schedule: &Schedule) -> Result<Vec<Rational>> {
    let completions = schedule.completion_times(instance.len());
    completions.into_iter().enumerate().map(|(i, c)| c.ok_or(Error::UnknownJob(i + 1))).collect()
}

/// Objective value of a complete schedule.
pub fn evaluate(instance: &Instance, schedule: &Schedule, criterion: &Criterion) -> Result<Rational> {
    criterion.check_against(instance)?;
    for job in instance.jobs() {
        let scheduled = schedule.processed_amount(job.id);
        if scheduled != job.processing {
            return Err(Error::IncompleteSchedule {
                job: job.id,
                scheduled: scheduled.to_string(),
                required: job.processing.to_string(),
            });
        }
    }
    let completions = completion_vector(instance, schedule)?;
    Ok(evaluate_completions(instance, &completions, criterion))
}

/// Objective value for a completion-time vector (indexed by job id minus one).
pub fn evaluate_completions(instance: &Instance, completions: &[Rational], criterion: &Criterion) -> Rational {
    match criterion {
        Criterion::Sum(fs) => fs.iter().zip(completions).map(|(f, c)| f.value_at(c)).sum(),
        Criterion::Max(fs) => {
            fs.iter().zip(completions).map(|(f, c)| f.value_at(c)).max().unwrap_or_else(Rational::zero)
        }
        Criterion::WeightedLateCommonDue { due } => instance
            .jobs()
            .iter()
            .zip(completions)
            .filter(|(_, c)| *c > due)
            .map(|(j, _)| j.weight.clone().unwrap_or_else(Rational::zero))
            .sum(),
    }
}
