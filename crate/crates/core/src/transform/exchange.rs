use crate::error::{Error, Result};
use crate::model::{Instance, Piece, Rational, Schedule};

use super::{require_feasible, Timeline};

/// Swaps the completion order of jobs `j < k` when `j` finishes after `k`.
///
/// Other jobs keep their pieces. Pieces of `j` before `r_k` stay, and on
/// every interval where `j` and `k` run together they keep running together.
/// The remaining slots of the two jobs, taken in time order from `r_k`, are
/// given first to the rest of `j` and then to the rest of `k`. With
/// `p_j ≤ p_k` this yields `C'_j ≤ C_k` and `C'_k = C_j`.
pub fn exchange_pair(instance: &Instance, schedule: &Schedule, j: usize, k: usize) -> Result<Schedule> {
    let n = instance.len();
    if j == 0 || k == 0 || j > n || k > n {
        return Err(Error::PreconditionViolated(format!("jobs {j} and {k} must be in 1..={n}")));
    }
    if j >= k {
        return Err(Error::PreconditionViolated(format!("need j < k, got j = {j}, k = {k}")));
    }
    let (job_j, job_k) = (instance.job(j), instance.job(k));
    if job_j.release > job_k.release {
        return Err(Error::PreconditionViolated(format!(
            "need r_{j} ≤ r_{k}, got {} > {}",
            job_j.release, job_k.release
        )));
    }
    if job_j.processing > job_k.processing {
        return Err(Error::PreconditionViolated(format!(
            "need p_{j} ≤ p_{k}, got {} > {}",
            job_j.processing, job_k.processing
        )));
    }
    require_feasible(instance, schedule)?;
    let c_j = schedule.completion_time(j)?;
    let c_k = schedule.completion_time(k)?;
    if c_j <= c_k {
        return Err(Error::PreconditionViolated(format!("need C_{j} > C_{k}, got {c_j} ≤ {c_k}")));
    }

    let r_k = job_k.release.clone();
    let timeline = Timeline::from_schedule(schedule, instance.machines(), std::slice::from_ref(&r_k))?;
    let mut pieces = Vec::new();
    let mut slots: Vec<(usize, Rational, Rational)> = Vec::new();
    let mut kept_j = Rational::zero();
    let mut kept_k = Rational::zero();

    for slice in timeline.slices() {
        let on_j = slice.machine_of(j);
        let on_k = slice.machine_of(k);
        for (q, job) in slice.machines.iter().enumerate() {
            if let Some(x) = *job {
                if x != j && x != k {
                    pieces.push(Piece::new(x, q + 1, slice.start.clone(), slice.end.clone()));
                }
            }
        }
        match (on_j, on_k) {
            (Some(qj), Some(qk)) => {
                pieces.push(Piece::new(j, qj, slice.start.clone(), slice.end.clone()));
                pieces.push(Piece::new(k, qk, slice.start.clone(), slice.end.clone()));
                kept_j += slice.len();
                kept_k += slice.len();
            }
            (Some(qj), None) if slice.end <= r_k => {
                pieces.push(Piece::new(j, qj, slice.start.clone(), slice.end.clone()));
                kept_j += slice.len();
            }
            (Some(q), None) | (None, Some(q)) => {
                slots.push((q, slice.start.clone(), slice.end.clone()));
            }
            (None, None) => {}
        }
    }

    let mut rest_j = &job_j.processing - &kept_j;
    let mut rest_k = &job_k.processing - &kept_k;
    for (q, start, end) in slots {
        let mut at = start;
        for (job, rest) in [(j, &mut rest_j), (k, &mut rest_k)] {
            if at < end && rest.is_positive() {
                let take = (&end - &at).min(rest.clone());
                let stop = &at + &take;
                pieces.push(Piece::new(job, q, at.clone(), stop.clone()));
                *rest -= &take;
                at = stop;
            }
        }
    }
    if rest_j.is_positive() || rest_k.is_positive() {
        return Err(Error::Internal("exchange ran out of slots".into()));
    }

    let out = Schedule::new(pieces)?.merged();
    let new_j = out.completion_time(j)?;
    let new_k = out.completion_time(k)?;
    if new_j > c_k || new_k != c_j {
        return Err(Error::Internal(format!(
            "exchange produced C'_{j} = {new_j}, C'_{k} = {new_k} from C_{j} = {c_j}, C_{k} = {c_k}"
        )));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::q;
    use crate::validate::check_feasible;

    fn piece(job: usize, machine: usize, start: i64, end: i64) -> Piece {
        Piece::new(job, machine, q!(start), q!(end))
    }

    fn inst(m: usize, r: &[i64], p: &[i64]) -> Instance {
        let r: Vec<_> = r.iter().map(|&x| q!(x)).collect();
        let p: Vec<_> = p.iter().map(|&x| q!(x)).collect();
        Instance::from_times(m, &r, &p).unwrap()
    }

    #[test]
    fn tail_of_j_after_k_is_swapped() {
        // Job 1 (p=2) runs [0,1) and [3,4); job 2 (p=3) runs [1,3) and [0,1) on M2.
        let i = inst(2, &[0, 0], &[2, 3]);
        let s =
            Schedule::new(vec![piece(1, 1, 0, 1), piece(2, 1, 1, 3), piece(2, 2, 0, 1), piece(1, 1, 3, 4)]).unwrap();
        let out = exchange_pair(&i, &s, 1, 2).unwrap();
        assert!(check_feasible(&i, &out).is_ok());
        assert!(out.completion_time(1).unwrap() <= q!(3));
        assert_eq!(out.completion_time(2).unwrap(), q!(4));
    }

    #[test]
    fn equal_lengths_in_disjoint_windows() {
        let i = inst(1, &[0, 0], &[2, 2]);
        let s = Schedule::new(vec![piece(2, 1, 0, 2), piece(1, 1, 2, 4)]).unwrap();
        let out = exchange_pair(&i, &s, 1, 2).unwrap();
        assert_eq!(out.pieces(), &[piece(1, 1, 0, 2), piece(2, 1, 2, 4)]);
        assert_eq!(out.processed_amount(1), q!(2));
        assert_eq!(out.processed_amount(2), q!(2));
    }

    #[test]
    fn j_takes_the_earliest_slots_of_the_union() {
        // j entirely after r_k and never concurrent with k.
        let i = inst(2, &[0, 1], &[1, 3]);
        let s = Schedule::new(vec![piece(2, 1, 1, 4), piece(1, 2, 5, 6)]).unwrap();
        let out = exchange_pair(&i, &s, 1, 2).unwrap();
        assert!(check_feasible(&i, &out).is_ok());
        assert_eq!(out.pieces_of(1).next().unwrap(), &piece(1, 1, 1, 2));
        assert_eq!(out.completion_time(1).unwrap(), q!(2));
        assert_eq!(out.completion_time(2).unwrap(), q!(6));
    }

    #[test]
    fn preconditions_are_reported() {
        let i = inst(1, &[0, 0], &[2, 1]);
        let s = Schedule::new(vec![piece(2, 1, 0, 1), piece(1, 1, 1, 3)]).unwrap();
        assert!(matches!(exchange_pair(&i, &s, 1, 2), Err(Error::PreconditionViolated(_))));
        assert!(matches!(exchange_pair(&i, &s, 2, 1), Err(Error::PreconditionViolated(_))));

        let i = inst(1, &[0, 0], &[1, 2]);
        let s = Schedule::new(vec![piece(1, 1, 0, 1), piece(2, 1, 1, 3)]).unwrap();
        assert!(matches!(exchange_pair(&i, &s, 1, 2), Err(Error::PreconditionViolated(_))));
    }
}
