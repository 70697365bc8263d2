use crate::error::{Error, Result};
use crate::model::{Piece, Rational, Schedule};

/// Constant machine assignment over `[start, end)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Slice {
    pub start: Rational,
    pub end: Rational,
    /// `machines[q]` is the job on machine `q + 1`, if any.
    pub machines: Vec<Option<usize>>,
}

impl Slice {
    pub fn len(&self) -> Rational {
        &self.end - &self.start
    }

    pub fn jobs(&self) -> impl Iterator<Item = usize> + '_ {
        self.machines.iter().flatten().copied()
    }

    pub fn machine_of(&self, job: usize) -> Option<usize> {
        self.machines.iter().position(|&j| j == Some(job)).map(|q| q + 1)
    }

    pub fn busy(&self) -> usize {
        self.machines.iter().filter(|j| j.is_some()).count()
    }
}

/// A schedule cut at every event so that each slice has a constant assignment.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Timeline {
    machines: usize,
    slices: Vec<Slice>,
}

impl Timeline {
    /// Cuts at every piece start and end plus `extra_events`.
    ///
    /// Fails when two pieces share a machine or a job runs twice at once.
    pub fn from_schedule(schedule: &Schedule, machines: usize, extra_events: &[Rational]) -> Result<Self> {
        let mut events: Vec<Rational> = schedule
            .pieces()
            .iter()
            .flat_map(|p| [p.start.clone(), p.end.clone()])
            .chain(extra_events.iter().cloned())
            .collect();
        events.sort();
        events.dedup();

        let mut slices: Vec<Slice> = events
            .windows(2)
            .map(|w| Slice { start: w[0].clone(), end: w[1].clone(), machines: vec![None; machines] })
            .collect();

        for p in schedule.pieces() {
            if p.machine > machines {
                return Err(Error::InvalidPiece(format!(
                    "machine {} does not exist ({} machines)",
                    p.machine, machines
                )));
            }
            let first = slices.partition_point(|s| s.start < p.start);
            for slice in slices[first..].iter_mut().take_while(|s| s.end <= p.end) {
                if slice.jobs().any(|j| j == p.job) {
                    return Err(Error::InvalidPiece(format!(
                        "job {} runs twice during [{}, {})",
                        p.job, slice.start, slice.end
                    )));
                }
                let cell = &mut slice.machines[p.machine - 1];
                if let Some(other) = cell {
                    return Err(Error::InvalidPiece(format!(
                        "jobs {} and {} overlap on machine {} during [{}, {})",
                        other, p.job, p.machine, slice.start, slice.end
                    )));
                }
                *cell = Some(p.job);
            }
        }
        Ok(Timeline { machines, slices })
    }

    pub fn from_slices(machines: usize, slices: Vec<Slice>) -> Self {
        Timeline { machines, slices }
    }

    pub fn machines(&self) -> usize {
        self.machines
    }

    pub fn slices(&self) -> &[Slice] {
        &self.slices
    }

    pub fn slices_mut(&mut self) -> &mut [Slice] {
        &mut self.slices
    }

    /// Concatenates slices back into maximal pieces.
    pub fn to_schedule(&self) -> Schedule {
        let mut pieces = Vec::new();
        for q in 0..self.machines {
            let mut open: Option<Piece> = None;
            for slice in &self.slices {
                let job = slice.machines[q];
                match (&mut open, job) {
                    (Some(p), Some(j)) if p.job == j && p.end == slice.start => {
                        p.end = slice.end.clone();
                    }
                    (_, job) => {
                        if let Some(p) = open.take() {
                            pieces.push(p);
                        }
                        open = job.map(|j| Piece::new(j, q + 1, slice.start.clone(), slice.end.clone()));
                    }
                }
            }
            pieces.extend(open);
        }
        Schedule::new(pieces).expect("slices have positive length")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::q;

    #[test]
    fn round_trip_reproduces_the_schedule() {
        let s = Schedule::new(vec![
            Piece::new(1, 1, q!(0), q!(3)),
            Piece::new(2, 2, q!(1), q!(2)),
            Piece::new(2, 1, q!(3), q!(4)),
        ])
        .unwrap();
        let tl = Timeline::from_schedule(&s, 2, &[q!(5, 2)]).unwrap();
        assert_eq!(tl.slices().len(), 5);
        assert_eq!(tl.to_schedule(), s);
    }

    #[test]
    fn detects_overlaps() {
        let s = Schedule::new(vec![Piece::new(1, 1, q!(0), q!(2)), Piece::new(2, 1, q!(1), q!(3))]).unwrap();
        assert!(Timeline::from_schedule(&s, 1, &[]).is_err());
        let s = Schedule::new(vec![Piece::new(1, 1, q!(0), q!(2)), Piece::new(1, 2, q!(1), q!(3))]).unwrap();
        assert!(Timeline::from_schedule(&s, 2, &[]).is_err());
    }
}
