//! Fixed-order LP over PFS-like schedules.
//!
//! With the jobs renumbered by an order `π`, job `j` visits the machines
//! `M_m, M_{m-1}, ..., M_1` in turn: its piece on `M_l` starts at `t_j^l` and
//! lasts `p_j^l ≥ 0`. Pieces of one job are chained downwards, each machine
//! serves jobs in order, the first piece may not start before the release,
//! and the piece on `M_1` ends at `C_j`. Regular convex criteria enter through
//! epigraph variables, so one LP solve gives the best PFS-like schedule in
//! order `π`.

mod late_jobs;
mod order;

use crate::error::{Error, Result};
use crate::model::{evaluate, positions, Criterion, Instance, Piece, Rational, Schedule};
use crate::simplex::{self, LinearProgram, LpOutcome, LpSolution, Relation, VarId};
use crate::transform::canonicalize_in;
use crate::validate::check_feasible;

pub use late_jobs::{on_time_feasible, solve_common_due_late_jobs, LateJobsSolution};
pub use order::{
    check_difference_monotone, check_difference_nonnegative, determine_order, Evidence, OrderCase, OrderCertificate,
    PairCondition,
};

/// The LP together with the variable layout needed to read a solution back.
#[derive(Clone, Debug)]
pub struct PfsModel {
    lp: LinearProgram,
    order: Vec<usize>,
    machines: usize,
    /// `starts[i][l-1]` is `t^l` of the job at position `i`.
    starts: Vec<Vec<VarId>>,
    amounts: Vec<Vec<VarId>>,
    completions: Vec<VarId>,
}

/// LP values by position in the order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlowShopSolution {
    pub order: Vec<usize>,
    pub starts: Vec<Vec<Rational>>,
    pub amounts: Vec<Vec<Rational>>,
    pub completions: Vec<Rational>,
    pub value: Rational,
}

impl PfsModel {
    /// Variables and the five families of flow-shop constraints, no objective.
    fn structure(instance: &Instance, order: &[usize]) -> Result<Self> {
        positions(order, instance.len())?;
        let m = instance.machines();
        let mut lp = LinearProgram::new();
        let zero = || Some(Rational::zero());
        let mut starts = Vec::with_capacity(order.len());
        let mut amounts = Vec::with_capacity(order.len());
        let mut completions = Vec::with_capacity(order.len());
        for &j in order {
            let mut t = Vec::with_capacity(m);
            let mut p = Vec::with_capacity(m);
            for l in 1..=m {
                t.push(lp.add_variable(format!("t[{j},{l}]"), zero()));
                p.push(lp.add_variable(format!("p[{j},{l}]"), zero()));
            }
            starts.push(t);
            amounts.push(p);
            completions.push(lp.add_variable(format!("C[{j}]"), zero()));
        }

        let one = Rational::one;
        let minus = || -Rational::one();
        for (i, &j) in order.iter().enumerate() {
            let job = instance.job(j);
            let (t, p) = (&starts[i], &amounts[i]);
            lp.add_constraint(p.iter().map(|&v| (v, one())), Relation::Eq, job.processing.clone());
            for l in 0..m - 1 {
                lp.add_constraint(
                    [(t[l + 1], one()), (p[l + 1], one()), (t[l], minus())],
                    Relation::Le,
                    Rational::zero(),
                );
            }
            if let Some(next) = starts.get(i + 1) {
                for l in 0..m {
                    lp.add_constraint(
                        [(t[l], one()), (p[l], one()), (next[l], minus())],
                        Relation::Le,
                        Rational::zero(),
                    );
                }
            }
            lp.add_constraint([(t[m - 1], one())], Relation::Ge, job.release.clone());
            lp.add_constraint(
                [(t[0], one()), (p[0], one()), (completions[i], minus())],
                Relation::Eq,
                Rational::zero(),
            );
        }
        Ok(PfsModel { lp, order: order.to_vec(), machines: m, starts, amounts, completions })
    }

    pub fn lp(&self) -> &LinearProgram {
        &self.lp
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// `n(2m + 1)`: the start, amount and completion variables.
    pub fn structural_variable_count(&self) -> usize {
        self.order.len() * (2 * self.machines + 1)
    }

    pub fn completion_variable(&self, position: usize) -> VarId {
        self.completions[position]
    }

    pub fn read(&self, solution: &LpSolution) -> FlowShopSolution {
        let read = |vars: &Vec<VarId>| vars.iter().map(|&v| solution.get(v).clone()).collect();
        FlowShopSolution {
            order: self.order.clone(),
            starts: self.starts.iter().map(read).collect(),
            amounts: self.amounts.iter().map(read).collect(),
            completions: self.completions.iter().map(|&v| solution.get(v).clone()).collect(),
            value: solution.value.clone(),
        }
    }

    fn solve_optimal(&self) -> Result<FlowShopSolution> {
        match simplex::solve(&self.lp)? {
            LpOutcome::Optimal(s) => Ok(self.read(&s)),
            LpOutcome::Infeasible => Err(Error::Internal("fixed-order LP reported infeasible".into())),
            LpOutcome::Unbounded => Err(Error::Internal("fixed-order LP reported unbounded".into())),
        }
    }
}

/// Builds the fixed-order LP minimizing a SUM or MAX criterion.
///
/// Each convex `f_j` is the maximum of its segments, so `f_j(C_j) ≤ φ` is one
/// linear inequality per segment.
pub fn build_lp(instance: &Instance, order: &[usize], criterion: &Criterion) -> Result<PfsModel> {
    criterion.check_against(instance)?;
    let functions = match criterion {
        Criterion::Sum(fs) | Criterion::Max(fs) => fs,
        Criterion::WeightedLateCommonDue { .. } => {
            return Err(Error::UnsupportedCriterion(
                "the late-job count is not linear; use the common due date solver".into(),
            ))
        }
    };
    if let Some(j) = functions.iter().position(|f| !f.is_convex()) {
        return Err(Error::UnsupportedCriterion(format!("cost function of job {} is not convex", j + 1)));
    }
    let mut model = PfsModel::structure(instance, order)?;
    let lp = &mut model.lp;
    let mut objective = Vec::new();
    let mut shared = None;
    for (i, &j) in order.iter().enumerate() {
        let phi = match criterion {
            Criterion::Max(_) => *shared.get_or_insert_with(|| {
                let z = lp.add_variable("z", None);
                objective.push((z, Rational::one()));
                z
            }),
            _ => {
                let phi = lp.add_variable(format!("phi[{j}]"), None);
                objective.push((phi, Rational::one()));
                phi
            }
        };
        for seg in functions[j - 1].segments() {
            lp.add_constraint(
                [(phi, Rational::one()), (model.completions[i], -seg.slope)],
                Relation::Ge,
                seg.intercept,
            );
        }
    }
    lp.set_objective(objective);
    Ok(model)
}

/// Turns LP values into pieces, piece `l` of each job on machine `M_l`.
///
/// Every flow-shop constraint is re-checked exactly first; a violation
/// yields `InfeasibleLpSolution`.
pub fn extract_schedule(instance: &Instance, solution: &FlowShopSolution) -> Result<Schedule> {
    let order = &solution.order;
    positions(order, instance.len())?;
    let m = instance.machines();
    let bad = |msg: String| Err(Error::InfeasibleLpSolution(msg));
    if solution.starts.len() != order.len()
        || solution.amounts.len() != order.len()
        || solution.completions.len() != order.len()
        || solution.starts.iter().chain(&solution.amounts).any(|v| v.len() != m)
    {
        return bad("dimensions do not match the instance".into());
    }
    let mut pieces = Vec::new();
    for (i, &j) in order.iter().enumerate() {
        let job = instance.job(j);
        let (t, p, c) = (&solution.starts[i], &solution.amounts[i], &solution.completions[i]);
        if t.iter().chain(p).any(Rational::is_negative) || c.is_negative() {
            return bad(format!("job {j} has a negative variable"));
        }
        if p.iter().cloned().sum::<Rational>() != job.processing {
            return bad(format!("amounts of job {j} do not sum to {}", job.processing));
        }
        for l in 0..m - 1 {
            if &t[l + 1] + &p[l + 1] > t[l] {
                return bad(format!("job {j} reaches M_{} before leaving M_{}", l + 1, l + 2));
            }
        }
        if let Some(next) = solution.starts.get(i + 1) {
            for l in 0..m {
                if &t[l] + &p[l] > next[l] {
                    return bad(format!("job {j} still occupies M_{} when job {} starts", l + 1, order[i + 1]));
                }
            }
        }
        if t[m - 1] < job.release {
            return bad(format!("job {j} starts before its release"));
        }
        if &t[0] + &p[0] != *c {
            return bad(format!("completion of job {j} does not match its last piece"));
        }
        for l in 0..m {
            pieces.push(Piece::new(j, l + 1, t[l].clone(), &t[l] + &p[l]));
        }
    }
    let schedule = Schedule::new(pieces).map_err(|e| Error::InfeasibleLpSolution(e.to_string()))?;
    let report = check_feasible(instance, &schedule);
    if let Some(v) = report.violations().first() {
        return bad(v.to_string());
    }
    Ok(schedule)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Solution {
    /// Non-delay PFS-like schedule in the certificate's order.
    pub schedule: Schedule,
    /// Objective value of `schedule`.
    pub value: Rational,
    /// Optimum of the fixed-order LP. Equals `value` for certified orders and
    /// bounds it from above otherwise.
    pub lp_value: Rational,
    pub certificate: OrderCertificate,
    /// The schedule read directly off the LP, before normalization.
    pub extracted: Schedule,
}

/// Minimizes `criterion` over PFS-like schedules.
///
/// Without `order` the order is derived by [`determine_order`], which makes
/// the result optimal over all feasible schedules; the common-due late-job
/// criterion is delegated to [`solve_common_due_late_jobs`].
pub fn solve(instance: &Instance, criterion: &Criterion, order: Option<&[usize]>) -> Result<Solution> {
    criterion.check_against(instance)?;
    if let Criterion::WeightedLateCommonDue { due } = criterion {
        if order.is_some() {
            return Err(Error::UnsupportedCriterion("the late-job solver derives its own order".into()));
        }
        let late = solve_common_due_late_jobs(instance, due.clone())?;
        return Ok(Solution {
            extracted: late.extracted,
            schedule: late.schedule,
            lp_value: late.value.clone(),
            value: late.value,
            certificate: late.certificate,
        });
    }

    let certificate = match order {
        Some(o) => OrderCertificate::user_supplied(instance, o)?,
        None => determine_order(instance, criterion)?,
    };
    let model = build_lp(instance, &certificate.permutation, criterion)?;
    let lp = model.solve_optimal()?;
    let extracted = extract_schedule(instance, &lp)?;
    // C_j only bounds the real completion: a job with no share of M1 may
    // finish before its predecessor. For a certified order the two agree,
    // otherwise the extracted schedule can only be better.
    let extracted_value = evaluate(instance, &extracted, criterion)?;
    let consistent = if certificate.is_certified() { extracted_value == lp.value } else { extracted_value <= lp.value };
    if !consistent {
        return Err(Error::Internal(format!(
            "extracted schedule has value {extracted_value}, LP optimum is {}",
            lp.value
        )));
    }

    // The LP may leave C_j slack when p_j^1 = 0, so actual completions need
    // not be sorted along the order; canonicalize without that hypothesis.
    let schedule = if certificate.is_certified() {
        canonicalize_in(instance, &extracted, &certificate.permutation)?.schedule
    } else {
        match canonicalize_in(instance, &extracted, &certificate.permutation) {
            Ok(trace) => trace.schedule,
            Err(Error::TransformStalled(_)) => extracted.clone(),
            Err(e) => return Err(e),
        }
    };
    let value = evaluate(instance, &schedule, criterion)?;
    if certificate.is_certified() && value != lp.value {
        return Err(Error::Internal(format!("normalized schedule has value {value}, LP optimum is {}", lp.value)));
    }
    Ok(Solution { schedule, value, lp_value: lp.value, certificate, extracted })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::q;
    use crate::validate::{is_non_delay, is_pfs_like_in};

    fn inst(m: usize, r: &[i64], p: &[i64]) -> Instance {
        let r: Vec<_> = r.iter().map(|&x| q!(x)).collect();
        let p: Vec<_> = p.iter().map(|&x| q!(x)).collect();
        Instance::from_times(m, &r, &p).unwrap()
    }

    #[test]
    fn variable_count() {
        let i = inst(3, &[0, 0], &[1, 2]);
        let model = build_lp(&i, &[1, 2], &Criterion::total_completion(2)).unwrap();
        assert_eq!(model.structural_variable_count(), 14);
        // Plus one epigraph variable per job.
        assert_eq!(model.lp().variables().len(), 16);
    }

    #[test]
    fn total_completion_on_two_machines() {
        let i = inst(2, &[0, 0, 0], &[1, 2, 3]);
        let s = solve(&i, &Criterion::total_completion(3), None).unwrap();
        assert_eq!(s.value, q!(7));
        assert_eq!(s.lp_value, q!(7));
        assert!(is_pfs_like_in(&s.schedule, &s.certificate.permutation).unwrap().is_ok());
        assert!(is_non_delay(&i, &s.schedule).unwrap().is_ok());
    }

    #[test]
    fn single_machine_user_order() {
        let i = inst(1, &[0, 0], &[2, 1]);
        let s = solve(&i, &Criterion::total_completion(2), Some(&[2, 1])).unwrap();
        assert_eq!(s.value, q!(4));
        assert_eq!(s.certificate.case, OrderCase::UserSupplied);
    }

    #[test]
    fn uncertified_order_can_beat_its_lp() {
        // Order (1, 2) forces C_2 ≥ C_1 ≥ 2 in the LP, but job 2 can sit on
        // M2 alone and finish at 1.
        let i = inst(2, &[0, 0], &[2, 1]);
        let c = Criterion::total_completion(2);
        let s = solve(&i, &c, Some(&[1, 2])).unwrap();
        assert_eq!(s.lp_value, q!(4));
        assert!(s.value <= s.lp_value);

        let model = build_lp(&i, &[1, 2], &c).unwrap();
        let mut vertex = model.solve_optimal().unwrap();
        vertex.starts = vec![vec![q!(0), q!(0)], vec![q!(2), q!(0)]];
        vertex.amounts = vec![vec![q!(2), q!(0)], vec![q!(0), q!(1)]];
        vertex.completions = vec![q!(2), q!(2)];
        let extracted = extract_schedule(&i, &vertex).unwrap();
        assert_eq!(evaluate(&i, &extracted, &c).unwrap(), q!(3));
    }

    #[test]
    fn makespan_with_releases() {
        let i = inst(2, &[0, 1, 2], &[1, 2, 4]);
        let s = solve(&i, &Criterion::makespan(3), None).unwrap();
        assert_eq!(s.certificate.case, OrderCase::AgreeableMax);
        assert_eq!(s.value, q!(6));
    }

    #[test]
    fn late_jobs_criterion_is_not_an_lp_objective() {
        let i = Instance::new(1, vec![crate::Job::new(1, q!(0), q!(1)).with_weight(q!(1))]).unwrap();
        let crit = Criterion::weighted_late_common_due(q!(1));
        assert!(matches!(build_lp(&i, &[1], &crit), Err(Error::UnsupportedCriterion(_))));
    }

    #[test]
    fn extraction_rejects_broken_solutions() {
        let i = inst(1, &[0, 0], &[1, 1]);
        let bad = FlowShopSolution {
            order: vec![1, 2],
            starts: vec![vec![q!(0)], vec![q!(0)]],
            amounts: vec![vec![q!(1)], vec![q!(1)]],
            completions: vec![q!(1), q!(1)],
            value: q!(2),
        };
        assert!(matches!(extract_schedule(&i, &bad), Err(Error::InfeasibleLpSolution(_))));
    }
}
