//! Schedule surgery: left-shift normalization, vertical ordering, conversion
//! to a non-delay PFS-like schedule, and the pairwise completion exchange.
//!
//! None of these operations increases a completion time, so none increases a
//! regular objective.

mod exchange;
mod pfs;
mod timeline;

use crate::error::{Error, Result};
use crate::model::{positions, Instance, Piece, Rational, Schedule};
use crate::validate::check_feasible;

pub use exchange::exchange_pair;
pub use pfs::{canonicalize_in, make_pfs, make_pfs_in, ExchangeStep, PfsTrace};
pub use timeline::{Slice, Timeline};

fn identity_order(n: usize) -> Vec<usize> {
    (1..=n).collect()
}

fn require_feasible(instance: &Instance, schedule: &Schedule) -> Result<()> {
    let report = check_feasible(instance, schedule);
    if report.is_ok() {
        Ok(())
    } else {
        Err(Error::InfeasibleInput(report))
    }
}

/// Removes every permissible left shift; jobs filling idle time are taken in id order.
pub fn left_shift_normalize(instance: &Instance, schedule: &Schedule) -> Result<Schedule> {
    left_shift_normalize_in(instance, schedule, &identity_order(instance.len()))
}

/// Sweeps time forward, keeping each job where the input runs it while work
/// remains and pulling released waiting jobs (lowest position in `order`
/// first) onto machines that would otherwise idle.
///
/// Each job's remaining work never exceeds its remaining work in the input,
/// so completion times can only decrease. A non-delay input is returned
/// unchanged up to merging of touching pieces.
pub fn left_shift_normalize_in(instance: &Instance, schedule: &Schedule, order: &[usize]) -> Result<Schedule> {
    require_feasible(instance, schedule)?;
    let n = instance.len();
    let m = instance.machines();
    let pos = positions(order, n)?;
    let timeline = Timeline::from_schedule(schedule, m, &[])?;
    let slices = timeline.slices();

    let mut releases: Vec<Rational> = instance.jobs().iter().map(|j| j.release.clone()).collect();
    releases.sort();
    releases.dedup();

    let mut by_priority: Vec<usize> = (1..=n).collect();
    by_priority.sort_by_key(|&j| pos[j - 1]);

    let mut remaining: Vec<Rational> = instance.jobs().iter().map(|j| j.processing.clone()).collect();
    let mut t = releases[0].clone();
    let mut cursor = 0;
    let mut pieces = Vec::new();
    let empty = vec![None; m];

    while remaining.iter().any(Rational::is_positive) {
        while cursor < slices.len() && slices[cursor].end <= t {
            cursor += 1;
        }
        let (assignment, mut horizon) = match slices.get(cursor) {
            Some(s) if s.start <= t => (&s.machines, Some(s.end.clone())),
            Some(s) => (&empty, Some(s.start.clone())),
            None => (&empty, None),
        };
        if let Some(r) = releases.iter().find(|r| **r > t) {
            if horizon.as_ref().is_none_or(|h| r < h) {
                horizon = Some(r.clone());
            }
        }

        let mut active: Vec<Option<usize>> =
            assignment.iter().map(|j| j.filter(|&j| remaining[j - 1].is_positive())).collect();
        let mut waiting = by_priority
            .iter()
            .copied()
            .filter(|&j| remaining[j - 1].is_positive() && instance.job(j).release <= t && !active.contains(&Some(j)))
            .collect::<Vec<_>>()
            .into_iter();
        for slot in active.iter_mut().filter(|s| s.is_none()) {
            match waiting.next() {
                Some(j) => *slot = Some(j),
                None => break,
            }
        }

        let Some(shortest) = active.iter().flatten().map(|&j| &remaining[j - 1]).min().cloned() else {
            match horizon {
                Some(h) => {
                    t = h;
                    continue;
                }
                None => return Err(Error::Internal("unfinished work with nothing left to run".into())),
            }
        };
        let step = match &horizon {
            Some(h) => (h - &t).min(shortest),
            None => shortest,
        };
        let end = &t + &step;
        for (q, job) in active.iter().enumerate() {
            if let Some(j) = *job {
                pieces.push(Piece::new(j, q + 1, t.clone(), end.clone()));
                remaining[j - 1] -= &step;
            }
        }
        t = end;
    }
    Ok(Schedule::new(pieces)?.merged())
}

/// Reassigns the jobs of every slice to `M_1, M_2, ...` in id order.
pub fn vertical_order(schedule: &Schedule) -> Result<Schedule> {
    let n = schedule.pieces().iter().map(|p| p.job).max().unwrap_or(0);
    vertical_order_in(schedule, &identity_order(n))
}

/// Vertical order with jobs ranked by their position in `order`.
/// Completion times are unchanged.
pub fn vertical_order_in(schedule: &Schedule, order: &[usize]) -> Result<Schedule> {
    let pos = positions(order, order.len())?;
    if let Some(p) = schedule.pieces().iter().find(|p| p.job > order.len()) {
        return Err(Error::InvalidOrder(format!("order does not rank job {}", p.job)));
    }
    let machines = schedule.pieces().iter().map(|p| p.machine).max().unwrap_or(0);
    let mut timeline = Timeline::from_schedule(schedule, machines, &[])?;
    for slice in timeline.slices_mut() {
        let mut jobs: Vec<usize> = slice.jobs().collect();
        jobs.sort_by_key(|&j| pos[j - 1]);
        slice.machines = jobs.into_iter().map(Some).chain(std::iter::repeat(None)).take(machines).collect();
    }
    Ok(timeline.to_schedule())
}
