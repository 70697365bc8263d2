use crate::error::{Error, Result};
use crate::model::{evaluate, Criterion, Instance, Rational, Schedule};
use crate::simplex::{self, LpOutcome, Relation};
use crate::transform::canonicalize_in;

use super::{determine_order, extract_schedule, OrderCertificate, PfsModel};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LateJobsSolution {
    pub schedule: Schedule,
    /// Total weight of late jobs.
    pub value: Rational,
    /// Length of the longest on-time prefix of the certified order.
    pub k_star: usize,
    pub certificate: OrderCertificate,
    pub extracted: Schedule,
}

/// Whether the jobs `ids`, kept in that order as a PFS-like sequence, can all
/// finish by `due`.
pub fn on_time_feasible(instance: &Instance, ids: &[usize], due: &Rational) -> Result<bool> {
    if ids.is_empty() {
        return Ok(true);
    }
    let (sub, _) = instance.restrict(ids)?;
    let order: Vec<usize> = (1..=ids.len()).collect();
    let mut model = PfsModel::structure(&sub, &order)?;
    for i in 0..ids.len() {
        let c = model.completion_variable(i);
        model.lp.add_constraint([(c, Rational::one())], Relation::Le, due.clone());
    }
    Ok(!simplex::solve(&model.lp)?.is_infeasible())
}

/// Minimizes the total weight of jobs finishing after the common due date `due`.
///
/// With `r`, `p` agreeable and weights nonincreasing along the certified
/// order, the on-time jobs can be taken as a prefix of that order: `k*` is
/// the longest prefix whose jobs all meet `due`. The remaining jobs are then
/// scheduled as early as possible behind it.
pub fn solve_common_due_late_jobs(instance: &Instance, due: Rational) -> Result<LateJobsSolution> {
    let criterion = Criterion::weighted_late_common_due(due.clone());
    criterion.check_against(instance)?;
    let certificate = determine_order(instance, &criterion)?;
    let order = &certificate.permutation;

    let mut k_star = 0;
    let mut failed_at = None;
    for k in 1..=order.len() {
        let feasible = on_time_feasible(instance, &order[..k], &due)?;
        match (feasible, failed_at) {
            (true, None) => k_star = k,
            (true, Some(f)) => {
                return Err(Error::Internal(format!(
                    "prefix of length {k} meets the due date although the prefix of length {f} does not"
                )))
            }
            (false, None) => failed_at = Some(k),
            (false, Some(_)) => {}
        }
    }

    let mut model = PfsModel::structure(instance, order)?;
    for i in 0..k_star {
        let c = model.completion_variable(i);
        model.lp.add_constraint([(c, Rational::one())], Relation::Le, due.clone());
    }
    let objective: Vec<_> = (0..order.len()).map(|i| (model.completion_variable(i), Rational::one())).collect();
    model.lp.set_objective(objective);
    let lp = match simplex::solve(&model.lp)? {
        LpOutcome::Optimal(s) => model.read(&s),
        _ => return Err(Error::Internal("on-time prefix LP lost feasibility".into())),
    };
    let extracted = extract_schedule(instance, &lp)?;
    let schedule = canonicalize_in(instance, &extracted, order)?.schedule;
    let value = evaluate(instance, &schedule, &criterion)?;
    let expected: Rational =
        order[k_star..].iter().map(|&j| instance.job(j).weight.clone().unwrap_or_else(Rational::zero)).sum();
    if value != expected {
        return Err(Error::Internal(format!(
            "late weight {value} differs from the weight {expected} outside the on-time prefix"
        )));
    }
    Ok(LateJobsSolution { schedule, value, k_star, certificate, extracted })
}
