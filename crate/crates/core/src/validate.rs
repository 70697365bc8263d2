//! Structural predicates over schedules: feasibility, non-delay, vertical
//! order and the PFS-like structure.
//!
//! Every predicate is evaluated at event points only (piece starts and ends,
//! release dates). Between two consecutive events the set of running jobs and
//! the machine assignment are constant, so this is exact.
//!
//! Vertical order compares jobs by their position in a job order. The plain
//! variants use the id order `1, 2, ..., n`; the `_in` variants take an
//! explicit permutation, which is how schedules solved for a non-identity
//! completion order are checked.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{positions, Instance, Piece, Rational, Schedule};
use crate::transform::Timeline;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    UnknownJob,
    UnknownMachine,
    MachineOverlap,
    JobOverlap,
    ReleaseViolated,
    ProcessingMismatch,
    Delay,
    VerticalOrder,
    RepeatedPiece,
    OrderConflict,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub jobs: Vec<usize>,
    pub interval: Option<(Rational, Rational)>,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.kind)?;
        if let Some((a, b)) = &self.interval {
            write!(f, " [{a}, {b})")?;
        }
        write!(f, ": {}", self.message)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    ok: bool,
    violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn from_violations(violations: Vec<Violation>) -> Self {
        ValidationReport { ok: violations.is_empty(), violations }
    }

    pub fn is_ok(&self) -> bool {
        self.ok
    }

    pub fn violations(&self) -> &[Violation] {
        &self.violations
    }

    pub fn has(&self, kind: ViolationKind) -> bool {
        self.violations.iter().any(|v| v.kind == kind)
    }

    pub fn merge(mut self, other: ValidationReport) -> Self {
        self.violations.extend(other.violations);
        self.ok = self.violations.is_empty();
        self
    }
}

fn violation(
    kind: ViolationKind,
    jobs: Vec<usize>,
    interval: Option<(Rational, Rational)>,
    message: String,
) -> Violation {
    Violation { kind, jobs, interval, message }
}

/// Machine and job non-overlap, release dates, and exact processing amounts.
pub fn check_feasible(instance: &Instance, schedule: &Schedule) -> ValidationReport {
    let n = instance.len();
    let m = instance.machines();
    let mut out = Vec::new();

    for p in schedule.pieces() {
        if p.job > n {
            out.push(violation(
                ViolationKind::UnknownJob,
                vec![p.job],
                Some((p.start.clone(), p.end.clone())),
                format!("job {} does not exist", p.job),
            ));
        }
        if p.machine > m {
            out.push(violation(
                ViolationKind::UnknownMachine,
                vec![p.job],
                Some((p.start.clone(), p.end.clone())),
                format!("machine {} does not exist", p.machine),
            ));
        }
    }

    let mut by_machine: BTreeMap<usize, Vec<&Piece>> = BTreeMap::new();
    let mut by_job: BTreeMap<usize, Vec<&Piece>> = BTreeMap::new();
    for p in schedule.pieces() {
        by_machine.entry(p.machine).or_default().push(p);
        by_job.entry(p.job).or_default().push(p);
    }

    for (machine, pieces) in &mut by_machine {
        for (a, b) in overlapping_pairs(pieces) {
            out.push(violation(
                ViolationKind::MachineOverlap,
                vec![a.job, b.job],
                Some((b.start.clone(), a.end.clone().min(b.end.clone()))),
                format!("jobs {} and {} overlap on machine {}", a.job, b.job, machine),
            ));
        }
    }
    for (job, pieces) in &mut by_job {
        for (a, b) in overlapping_pairs(pieces) {
            out.push(violation(
                ViolationKind::JobOverlap,
                vec![*job],
                Some((b.start.clone(), a.end.clone().min(b.end.clone()))),
                format!("job {} runs on machines {} and {} at once", job, a.machine, b.machine),
            ));
        }
    }

    for job in instance.jobs() {
        let pieces = by_job.get(&job.id).map(Vec::as_slice).unwrap_or(&[]);
        if let Some(early) = pieces.iter().find(|p| p.start < job.release) {
            out.push(violation(
                ViolationKind::ReleaseViolated,
                vec![job.id],
                Some((early.start.clone(), early.end.clone())),
                format!("job {} starts at {} before its release {}", job.id, early.start, job.release),
            ));
        }
        let total: Rational = pieces.iter().map(|p| p.len()).sum();
        if total != job.processing {
            out.push(violation(
                ViolationKind::ProcessingMismatch,
                vec![job.id],
                None,
                format!("job {} is processed for {} instead of {}", job.id, total, job.processing),
            ));
        }
    }

    ValidationReport::from_violations(out)
}

fn overlapping_pairs<'a>(pieces: &mut [&'a Piece]) -> Vec<(&'a Piece, &'a Piece)> {
    pieces.sort_by(|a, b| a.start.cmp(&b.start));
    let mut out = Vec::new();
    for i in 0..pieces.len() {
        for b in &pieces[i + 1..] {
            if b.start >= pieces[i].end {
                break;
            }
            out.push((pieces[i], *b));
        }
    }
    out
}

fn require_feasible(instance: &Instance, schedule: &Schedule) -> Result<()> {
    let report = check_feasible(instance, schedule);
    if report.is_ok() {
        Ok(())
    } else {
        Err(Error::InfeasibleInput(report))
    }
}

fn machine_count(schedule: &Schedule) -> usize {
    schedule.pieces().iter().map(|p| p.machine).max().unwrap_or(0)
}

/// Whether some released, unfinished job waits while a machine is idle.
///
/// A job that is released by `t`, not running at `t` and processed later
/// could have a fragment moved into any machine idle at `t`.
pub fn is_non_delay(instance: &Instance, schedule: &Schedule) -> Result<ValidationReport> {
    require_feasible(instance, schedule)?;
    let releases: Vec<Rational> = instance.jobs().iter().map(|j| j.release.clone()).collect();
    let timeline = Timeline::from_schedule(schedule, instance.machines(), &releases)?;
    let mut last_start: Vec<Option<Rational>> = vec![None; instance.len()];
    for p in schedule.pieces() {
        let slot = &mut last_start[p.job - 1];
        if slot.as_ref().is_none_or(|s| *s < p.start) {
            *slot = Some(p.start.clone());
        }
    }

    let mut out = Vec::new();
    for slice in timeline.slices() {
        if slice.busy() == instance.machines() {
            continue;
        }
        let running: BTreeSet<usize> = slice.jobs().collect();
        for job in instance.jobs() {
            let waits = job.release <= slice.start
                && !running.contains(&job.id)
                && last_start[job.id - 1].as_ref().is_some_and(|s| *s > slice.start);
            if waits {
                out.push(violation(
                    ViolationKind::Delay,
                    vec![job.id],
                    Some((slice.start.clone(), slice.end.clone())),
                    format!("a machine is idle while job {} waits for later processing", job.id),
                ));
            }
        }
    }
    Ok(ValidationReport::from_violations(out))
}

/// Running jobs, sorted by id, occupy machines `M_1, M_2, ...` in that order.
pub fn is_vertically_ordered(schedule: &Schedule) -> Result<ValidationReport> {
    let n = schedule.pieces().iter().map(|p| p.job).max().unwrap_or(0);
    let order: Vec<usize> = (1..=n).collect();
    is_vertically_ordered_in(schedule, &order)
}

/// Vertical order with jobs ranked by their position in `order`.
pub fn is_vertically_ordered_in(schedule: &Schedule, order: &[usize]) -> Result<ValidationReport> {
    let pos = positions(order, order.len())?;
    if let Some(p) = schedule.pieces().iter().find(|p| p.job > order.len()) {
        return Err(Error::InvalidOrder(format!("order does not rank job {}", p.job)));
    }
    let timeline = Timeline::from_schedule(schedule, machine_count(schedule), &[])?;
    let mut out = Vec::new();
    for slice in timeline.slices() {
        let mut running: Vec<usize> = slice.jobs().collect();
        running.sort_by_key(|&j| pos[j - 1]);
        let ordered = running.iter().enumerate().all(|(i, &j)| slice.machines[i] == Some(j));
        if !ordered {
            out.push(violation(
                ViolationKind::VerticalOrder,
                running.clone(),
                Some((slice.start.clone(), slice.end.clone())),
                format!(
                    "running jobs {:?} are not on machines 1..={} in order (assignment {:?})",
                    running,
                    running.len(),
                    slice.machines
                ),
            ));
        }
    }
    Ok(ValidationReport::from_violations(out))
}

/// PFS-like: vertically ordered, one piece per job and machine, and machine
/// sequences that are all subsequences of one common job order.
pub fn is_pfs_like(schedule: &Schedule) -> Result<ValidationReport> {
    let n = schedule.pieces().iter().map(|p| p.job).max().unwrap_or(0);
    let order: Vec<usize> = (1..=n).collect();
    is_pfs_like_in(schedule, &order)
}

pub fn is_pfs_like_in(schedule: &Schedule, order: &[usize]) -> Result<ValidationReport> {
    let vertical = is_vertically_ordered_in(schedule, order)?;
    let merged = schedule.merged();
    let mut out = Vec::new();

    let mut sequences: BTreeMap<usize, Vec<&Piece>> = BTreeMap::new();
    for p in merged.pieces() {
        sequences.entry(p.machine).or_default().push(p);
    }
    for (machine, seq) in &mut sequences {
        seq.sort_by(|a, b| a.start.cmp(&b.start));
        let mut seen: BTreeMap<usize, usize> = BTreeMap::new();
        for p in seq.iter() {
            *seen.entry(p.job).or_default() += 1;
        }
        for (job, count) in seen.into_iter().filter(|&(_, c)| c > 1) {
            out.push(violation(
                ViolationKind::RepeatedPiece,
                vec![job],
                None,
                format!("machine {machine} processes {count} pieces of job {job}"),
            ));
        }
    }

    // Precedences between consecutive distinct jobs on each machine; the
    // sequences share a common order iff this graph is acyclic.
    let mut succ: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
    let mut jobs: BTreeSet<usize> = BTreeSet::new();
    for seq in sequences.values() {
        let mut jobs_in_seq: Vec<usize> = seq.iter().map(|p| p.job).collect();
        jobs_in_seq.dedup();
        jobs.extend(jobs_in_seq.iter().copied());
        for w in jobs_in_seq.windows(2) {
            succ.entry(w[0]).or_default().insert(w[1]);
        }
    }
    if let Some(cycle) = find_cycle(&jobs, &succ) {
        out.push(violation(
            ViolationKind::OrderConflict,
            cycle.clone(),
            None,
            format!("machine sequences disagree on the order of jobs {cycle:?}"),
        ));
    }

    Ok(vertical.merge(ValidationReport::from_violations(out)))
}

fn find_cycle(nodes: &BTreeSet<usize>, succ: &BTreeMap<usize, BTreeSet<usize>>) -> Option<Vec<usize>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Fresh,
        Active,
        Done,
    }
    fn visit(
        v: usize,
        succ: &BTreeMap<usize, BTreeSet<usize>>,
        marks: &mut BTreeMap<usize, Mark>,
        stack: &mut Vec<usize>,
    ) -> Option<Vec<usize>> {
        marks.insert(v, Mark::Active);
        stack.push(v);
        for &w in succ.get(&v).into_iter().flatten() {
            match marks.get(&w).copied().unwrap_or(Mark::Fresh) {
                Mark::Active => {
                    let from = stack.iter().position(|&x| x == w).expect("on stack");
                    return Some(stack[from..].to_vec());
                }
                Mark::Fresh => {
                    if let Some(c) = visit(w, succ, marks, stack) {
                        return Some(c);
                    }
                }
                Mark::Done => {}
            }
        }
        stack.pop();
        marks.insert(v, Mark::Done);
        None
    }

    let mut marks = BTreeMap::new();
    for &v in nodes {
        if marks.get(&v).copied().unwrap_or(Mark::Fresh) == Mark::Fresh {
            if let Some(c) = visit(v, succ, &mut marks, &mut Vec::new()) {
                return Some(c);
            }
        }
    }
    None
}
