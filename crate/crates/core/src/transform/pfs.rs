use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{completion_vector, positions, Instance, Piece, Rational, Schedule};
use crate::validate::{check_feasible, is_non_delay, is_pfs_like_in};

use super::{identity_order, left_shift_normalize_in, require_feasible, vertical_order_in};

const MAX_EXCHANGES: usize = 100_000;

/// One fragment swap performed while untangling machine sequences.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExchangeStep {
    /// Job whose sequence was violated.
    pub job: usize,
    /// Later job whose fragment moved to `resumed_at`.
    pub partner: usize,
    pub machine: usize,
    pub at: Rational,
    pub resumed_at: Rational,
    pub delta: Rational,
    /// Whether the swap left idle time that had to be normalized away.
    pub renormalized: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PfsTrace {
    pub schedule: Schedule,
    pub steps: Vec<ExchangeStep>,
}

/// Converts a feasible schedule whose releases and completions are both
/// nondecreasing in job id into a non-delay PFS-like schedule in id order.
pub fn make_pfs(instance: &Instance, schedule: &Schedule) -> Result<Schedule> {
    Ok(make_pfs_in(instance, schedule, &identity_order(instance.len()))?.schedule)
}

/// [`make_pfs`] for an arbitrary ranking of the jobs, returning the swaps made.
///
/// Fails with `OrderHypothesisViolated` unless releases and completions are
/// nondecreasing along `order`. No job finishes later than in the input.
pub fn make_pfs_in(instance: &Instance, schedule: &Schedule, order: &[usize]) -> Result<PfsTrace> {
    require_feasible(instance, schedule)?;
    positions(order, instance.len())?;
    for w in order.windows(2) {
        let (a, b) = (instance.job(w[0]), instance.job(w[1]));
        if a.release > b.release {
            return Err(Error::OrderHypothesisViolated(format!(
                "job {} precedes job {} but r = {} > {}",
                a.id, b.id, a.release, b.release
            )));
        }
    }
    let completions = completion_vector(instance, schedule)?;
    for w in order.windows(2) {
        let (a, b) = (&completions[w[0] - 1], &completions[w[1] - 1]);
        if a > b {
            return Err(Error::OrderHypothesisViolated(format!(
                "job {} precedes job {} but C = {} > {}",
                w[0], w[1], a, b
            )));
        }
    }
    canonicalize_in(instance, schedule, order)
}

/// Normalizes, orders vertically and swaps fragments until every machine
/// runs jobs in `order` at most once each.
///
/// Unlike [`make_pfs_in`] nothing is assumed about releases or completions;
/// the swap loop reports `TransformStalled` if it cannot make progress.
pub fn canonicalize_in(instance: &Instance, schedule: &Schedule, order: &[usize]) -> Result<PfsTrace> {
    require_feasible(instance, schedule)?;
    let pos = positions(order, instance.len())?;
    let original = completion_vector(instance, schedule)?;
    let mut s = vertical_order_in(&left_shift_normalize_in(instance, schedule, order)?, order)?;
    let mut steps: Vec<ExchangeStep> = Vec::new();

    while let Some(found) = first_violation(&s, order, &pos) {
        let (job, machine, at, resumed_at) = match found {
            Found::Interleaved { job, machine, at, resumed_at } => (job, machine, at, resumed_at),
            Found::Repeated { job, machine } => {
                return Err(Error::TransformStalled(format!(
                    "job {job} has several pieces on machine {machine} with nothing interleaved"
                )))
            }
        };
        if steps.len() >= MAX_EXCHANGES {
            return Err(Error::TransformStalled(format!("no PFS-like schedule after {MAX_EXCHANGES} swaps")));
        }
        if let Some(prev) = steps.last() {
            if (pos[job - 1], &at) <= (pos[prev.job - 1], &prev.at) {
                return Err(Error::TransformStalled(format!(
                    "violation at job {job}, t = {at} does not follow job {}, t = {}",
                    prev.job, prev.at
                )));
            }
        }
        if instance.job(job).release > at {
            return Err(Error::TransformStalled(format!(
                "job {job} cannot move to {at} before its release {}",
                instance.job(job).release
            )));
        }

        let (swapped, partner, delta) = swap_fragments(&s, job, machine, &at, &resumed_at, &pos)?;
        if !check_feasible(instance, &swapped).is_ok() {
            return Err(Error::Internal(format!("fragment swap at {at} broke feasibility")));
        }
        s = vertical_order_in(&swapped, order)?;
        let renormalized = !is_non_delay(instance, &s)?.is_ok();
        if renormalized {
            s = vertical_order_in(&left_shift_normalize_in(instance, &s, order)?, order)?;
        }
        steps.push(ExchangeStep { job, partner, machine, at, resumed_at, delta, renormalized });
    }

    if !is_pfs_like_in(&s, order)?.is_ok() || !is_non_delay(instance, &s)?.is_ok() {
        return Err(Error::Internal("swap loop ended on a schedule that is not PFS-like and non-delay".into()));
    }
    let after = completion_vector(instance, &s)?;
    if let Some(j) = (0..after.len()).find(|&j| after[j] > original[j]) {
        return Err(Error::TransformStalled(format!(
            "job {} would finish at {} instead of {}",
            j + 1,
            after[j],
            original[j]
        )));
    }
    Ok(PfsTrace { schedule: s, steps })
}

enum Found {
    /// A later job starts on `machine` at `at`, before `job` resumes there at `resumed_at`.
    Interleaved {
        job: usize,
        machine: usize,
        at: Rational,
        resumed_at: Rational,
    },
    Repeated {
        job: usize,
        machine: usize,
    },
}

fn first_violation(s: &Schedule, order: &[usize], pos: &[usize]) -> Option<Found> {
    let mut by_machine: BTreeMap<usize, Vec<&Piece>> = BTreeMap::new();
    for p in s.pieces() {
        by_machine.entry(p.machine).or_default().push(p);
    }
    for &j in order {
        let rank = pos[j - 1];
        let mut best: Option<(Rational, usize, Rational)> = None;
        for (&q, seq) in &by_machine {
            let Some(last) = seq.iter().filter(|p| p.job == j).map(|p| &p.start).max() else {
                continue;
            };
            let Some(t) = seq.iter().filter(|p| pos[p.job - 1] > rank && p.start < *last).map(|p| &p.start).min()
            else {
                continue;
            };
            if best.as_ref().is_none_or(|(b, _, _)| t < b) {
                let resumed = seq.iter().filter(|p| p.job == j && p.start > *t).map(|p| &p.start).min();
                best = Some((t.clone(), q, resumed.expect("last start lies after t").clone()));
            }
        }
        if let Some((at, machine, resumed_at)) = best {
            return Some(Found::Interleaved { job: j, machine, at, resumed_at });
        }
        for (&q, seq) in &by_machine {
            if seq.iter().filter(|p| p.job == j).count() > 1 {
                return Some(Found::Repeated { job: j, machine: q });
            }
        }
    }
    None
}

/// Moves `[at, at+δ)` of the latest-ranked job running at `at` (but not at
/// `resumed_at`) to `[resumed_at, resumed_at+δ)` on `machine`, and the same
/// length of `job` the other way.
fn swap_fragments(
    s: &Schedule,
    job: usize,
    machine: usize,
    at: &Rational,
    resumed_at: &Rational,
    pos: &[usize],
) -> Result<(Schedule, usize, Rational)> {
    let running_at = s.jobs_processed_at(at);
    let running_resumed = s.jobs_processed_at(resumed_at);
    if running_at.contains(&job) {
        return Err(Error::TransformStalled(format!("job {job} already runs at {at}")));
    }
    let partner = running_at
        .iter()
        .copied()
        .filter(|l| !running_resumed.contains(l) && pos[l - 1] > pos[job - 1])
        .max_by_key(|&l| pos[l - 1])
        .ok_or_else(|| {
            Error::TransformStalled(format!("every later job running at {at} is still running at {resumed_at}"))
        })?;

    let mut delta: Option<Rational> = None;
    let mut bound = |x: Rational| {
        if delta.as_ref().is_none_or(|d| x < *d) {
            delta = Some(x);
        }
    };
    if let Some(next) = s.pieces_of(partner).map(|p| &p.start).filter(|t| *t > resumed_at).min() {
        bound(next - resumed_at);
    }
    if let Some(next) = s.pieces_of(job).map(|p| &p.start).filter(|t| *t > at).min() {
        bound(next - at);
    }
    for i in &running_at {
        bound(&s.piece_at(*i, at).expect("running").end - at);
    }
    for i in &running_resumed {
        bound(&s.piece_at(*i, resumed_at).expect("running").end - resumed_at);
    }
    let delta = delta.expect("the partner runs at `at`");
    let at_end = at + &delta;
    let resumed_end = resumed_at + &delta;

    let mut pieces = Vec::with_capacity(s.pieces().len() + 4);
    for p in s.pieces() {
        let (cut, from, to, other) = if p.job == partner && p.covers(at) {
            (true, at, &at_end, job)
        } else if p.job == job && p.machine == machine && p.covers(resumed_at) {
            (true, resumed_at, &resumed_end, partner)
        } else {
            (false, at, at, 0)
        };
        if !cut {
            pieces.push(p.clone());
            continue;
        }
        pieces.push(Piece::new(p.job, p.machine, p.start.clone(), from.clone()));
        pieces.push(Piece::new(other, p.machine, from.clone(), to.clone()));
        pieces.push(Piece::new(p.job, p.machine, to.clone(), p.end.clone()));
    }
    Ok((Schedule::new(pieces)?.merged(), partner, delta))
}
