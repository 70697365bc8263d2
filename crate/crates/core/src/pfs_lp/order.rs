use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{positions, Criterion, Instance, Job, PiecewiseLinearFn, Rational};
use crate::oracle;

/// Why a job order is known to contain an optimal schedule.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderCase {
    /// All releases equal.
    NoRelease,
    /// `r` and `p` agreeable, cost differences nondecreasing.
    AgreeableSum,
    /// `r` and `p` agreeable, cost differences nonnegative.
    AgreeableMax,
    /// `r`, `p` agreeable and weights nonincreasing, with a common due date.
    AgreeableWulj,
    /// Chosen by the caller; the LP optimum is only the best schedule in that order.
    UserSupplied,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairCondition {
    /// `r_j ≤ r_k` and `p_j ≤ p_k`.
    ReleaseAndProcessing,
    /// `f_j - f_k` nondecreasing.
    DifferenceNondecreasing,
    /// `f_j - f_k ≥ 0`.
    DifferenceNonnegative,
    /// `w_j ≥ w_k`.
    WeightNonincreasing,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Evidence {
    /// Consecutive jobs satisfy every listed condition; each condition is transitive.
    Pair {
        before: usize,
        after: usize,
        conditions: Vec<PairCondition>,
    },
    EqualReleases,
    /// The order won an exhaustive comparison of this many permutations.
    Enumerated {
        orders: u64,
    },
    Supplied,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderCertificate {
    pub permutation: Vec<usize>,
    pub case: OrderCase,
    pub evidence: Vec<Evidence>,
}

impl OrderCertificate {
    /// Certificate for a caller-chosen order; fails unless it is a permutation.
    pub fn user_supplied(instance: &Instance, order: &[usize]) -> Result<Self> {
        positions(order, instance.len())?;
        Ok(OrderCertificate {
            permutation: order.to_vec(),
            case: OrderCase::UserSupplied,
            evidence: vec![Evidence::Supplied],
        })
    }

    pub fn is_certified(&self) -> bool {
        self.case != OrderCase::UserSupplied
    }
}

/// All breakpoints of both functions together with 0, sorted and deduplicated.
fn merged_breakpoints(f: &PiecewiseLinearFn, g: &PiecewiseLinearFn) -> Vec<Rational> {
    let mut points: Vec<Rational> = std::iter::once(Rational::zero())
        .chain(f.breakpoints().iter().cloned())
        .chain(g.breakpoints().iter().cloned())
        .collect();
    points.sort();
    points.dedup();
    points
}

/// Whether `f - g` is nondecreasing on `[0, ∞)`.
pub fn check_difference_monotone(f: &PiecewiseLinearFn, g: &PiecewiseLinearFn) -> bool {
    merged_breakpoints(f, g).iter().all(|t| f.slope_at(t) >= g.slope_at(t))
}

/// Whether `f(t) ≥ g(t)` for all `t ≥ 0`.
pub fn check_difference_nonnegative(f: &PiecewiseLinearFn, g: &PiecewiseLinearFn) -> bool {
    let points = merged_breakpoints(f, g);
    let last = points.last().expect("contains zero");
    points.iter().all(|t| f.value_at(t) >= g.value_at(t)) && f.slope_at(last) >= g.slope_at(last)
}

/// Finds an order for which the fixed-order LP is optimal, or explains why
/// none of the supported cases applies.
///
/// Jobs are sorted by release, then processing time; jobs tied on both are
/// arranged so that the criterion's pairwise condition holds, preferring
/// heavier jobs and then lower ids. Without releases and with at most
/// [`oracle::DEFAULT_ORDER_CAP`] jobs, an order failing the condition is
/// replaced by the best of all permutations.
pub fn determine_order(instance: &Instance, criterion: &Criterion) -> Result<OrderCertificate> {
    criterion.check_against(instance)?;
    let equal_releases = instance.has_equal_releases();
    let (case, condition) = match criterion {
        Criterion::Sum(fs) => {
            if let Some(j) = fs.iter().position(|f| !f.is_convex()) {
                return Err(Error::UnsupportedCriterion(format!("cost function of job {} is not convex", j + 1)));
            }
            (OrderCase::AgreeableSum, PairCondition::DifferenceNondecreasing)
        }
        Criterion::Max(_) => (OrderCase::AgreeableMax, PairCondition::DifferenceNonnegative),
        Criterion::WeightedLateCommonDue { .. } => (OrderCase::AgreeableWulj, PairCondition::WeightNonincreasing),
    };
    let pair_ok = |a: &Job, b: &Job| -> bool {
        match criterion {
            Criterion::Sum(fs) => check_difference_monotone(&fs[a.id - 1], &fs[b.id - 1]),
            Criterion::Max(fs) => check_difference_nonnegative(&fs[a.id - 1], &fs[b.id - 1]),
            Criterion::WeightedLateCommonDue { .. } => a.weight >= b.weight,
        }
    };

    let mut sorted: Vec<&Job> = instance.jobs().iter().collect();
    sorted.sort_by(|a, b| (&a.release, &a.processing, a.id).cmp(&(&b.release, &b.processing, b.id)));
    for w in sorted.windows(2) {
        if w[0].processing > w[1].processing {
            return Err(Error::NotAgreeable {
                first: w[0].id,
                second: w[1].id,
                reason: format!(
                    "r = {} < {} but p = {} > {}",
                    w[0].release, w[1].release, w[0].processing, w[1].processing
                ),
            });
        }
    }

    // Arrange each group of identical (r, p) so the condition holds inside it.
    let mut order: Vec<&Job> = Vec::with_capacity(sorted.len());
    let mut i = 0;
    while i < sorted.len() {
        let end = i + sorted[i..]
            .iter()
            .take_while(|j| j.release == sorted[i].release && j.processing == sorted[i].processing)
            .count();
        let mut group: Vec<&Job> = sorted[i..end].to_vec();
        while !group.is_empty() {
            let pick = group
                .iter()
                .enumerate()
                .filter(|(_, a)| group.iter().all(|b| a.id == b.id || pair_ok(a, b)))
                .max_by(|(_, a), (_, b)| a.weight.cmp(&b.weight).then(b.id.cmp(&a.id)))
                .map(|(k, _)| k);
            match pick {
                Some(k) => order.push(group.remove(k)),
                None => {
                    // Every candidate fails against someone; fall through to the
                    // consecutive check, which reports a concrete pair.
                    order.append(&mut group);
                }
            }
        }
        i = end;
    }

    let mut evidence = Vec::with_capacity(order.len());
    if equal_releases {
        evidence.push(Evidence::EqualReleases);
    }
    for w in order.windows(2) {
        if !pair_ok(w[0], w[1]) {
            if equal_releases && criterion.functions().is_some() && instance.len() <= oracle::DEFAULT_ORDER_CAP {
                let best = oracle::enumerate_orders_optimum(instance, criterion)?;
                return Ok(OrderCertificate {
                    permutation: best.order,
                    case: OrderCase::NoRelease,
                    evidence: vec![Evidence::EqualReleases, Evidence::Enumerated { orders: factorial(instance.len()) }],
                });
            }
            return Err(Error::NotAgreeable {
                first: w[0].id,
                second: w[1].id,
                reason: format!("{} fails", describe(condition)),
            });
        }
        evidence.push(Evidence::Pair {
            before: w[0].id,
            after: w[1].id,
            conditions: vec![PairCondition::ReleaseAndProcessing, condition],
        });
    }

    Ok(OrderCertificate {
        permutation: order.iter().map(|j| j.id).collect(),
        case: if equal_releases { OrderCase::NoRelease } else { case },
        evidence,
    })
}

fn describe(condition: PairCondition) -> &'static str {
    match condition {
        PairCondition::ReleaseAndProcessing => "r_j ≤ r_k and p_j ≤ p_k",
        PairCondition::DifferenceNondecreasing => "f_j - f_k nondecreasing",
        PairCondition::DifferenceNonnegative => "f_j - f_k ≥ 0",
        PairCondition::WeightNonincreasing => "w_j ≥ w_k",
    }
}

fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::q;

    fn pl(breaks: &[i64], init: i64, slopes: &[i64]) -> PiecewiseLinearFn {
        PiecewiseLinearFn::new(
            breaks.iter().map(|&b| q!(b)).collect(),
            q!(init),
            slopes.iter().map(|&s| q!(s)).collect(),
        )
        .unwrap()
    }

    fn inst(m: usize, r: &[i64], p: &[i64]) -> Instance {
        let r: Vec<_> = r.iter().map(|&x| q!(x)).collect();
        let p: Vec<_> = p.iter().map(|&x| q!(x)).collect();
        Instance::from_times(m, &r, &p).unwrap()
    }

    #[test]
    fn monotone_difference() {
        let two_c = pl(&[], 0, &[2]);
        let c = pl(&[], 0, &[1]);
        assert!(check_difference_monotone(&two_c, &c));
        assert!(!check_difference_monotone(&c, &two_c));
        let tard = pl(&[3], 0, &[0, 1]);
        assert!(check_difference_monotone(&c, &tard));
        assert!(!check_difference_monotone(&tard, &c));
        // Earlier kink first: (C-2)^+ - (C-5)^+ rises, then stays flat.
        assert!(check_difference_monotone(&pl(&[2], 0, &[0, 1]), &pl(&[5], 0, &[0, 1])));
        assert!(!check_difference_monotone(&pl(&[5], 0, &[0, 1]), &pl(&[2], 0, &[0, 1])));
    }

    #[test]
    fn nonnegative_difference() {
        let l1 = PiecewiseLinearFn::lateness(q!(1));
        let l4 = PiecewiseLinearFn::lateness(q!(4));
        assert!(check_difference_nonnegative(&l1, &l4));
        assert!(!check_difference_nonnegative(&l4, &l1));
        // Crossing functions fail both ways.
        let steep = pl(&[], 0, &[2]);
        let flat = pl(&[], 3, &[1]);
        assert!(!check_difference_nonnegative(&steep, &flat));
        assert!(!check_difference_nonnegative(&flat, &steep));
    }

    #[test]
    fn equal_releases_sort_by_processing() {
        let i = inst(2, &[0, 0, 0], &[3, 1, 2]);
        let cert = determine_order(&i, &Criterion::total_completion(3)).unwrap();
        assert_eq!(cert.permutation, vec![2, 3, 1]);
        assert_eq!(cert.case, OrderCase::NoRelease);
    }

    #[test]
    fn agreeable_sum_case() {
        let i = inst(2, &[2, 0, 1], &[3, 1, 2]);
        let cert = determine_order(&i, &Criterion::total_completion(3)).unwrap();
        assert_eq!(cert.permutation, vec![2, 3, 1]);
        assert_eq!(cert.case, OrderCase::AgreeableSum);
        assert_eq!(cert.evidence.len(), 2);
    }

    #[test]
    fn non_agreeable_is_reported() {
        let i = inst(2, &[0, 1], &[2, 1]);
        let err = determine_order(&i, &Criterion::total_completion(2)).unwrap_err();
        assert!(matches!(err, Error::NotAgreeable { first: 1, second: 2, .. }));
    }

    #[test]
    fn ties_prefer_the_condition_then_weight() {
        // Identical (r, p); the second job has the earlier due date.
        let jobs = vec![Job::new(1, q!(0), q!(1)).with_due(q!(5)), Job::new(2, q!(0), q!(1)).with_due(q!(2))];
        let i = Instance::new(1, jobs).unwrap();
        let cert = determine_order(&i, &Criterion::max_lateness(&i).unwrap()).unwrap();
        assert_eq!(cert.permutation, vec![2, 1]);
    }

    #[test]
    fn wulj_needs_nonincreasing_weights() {
        let jobs = vec![Job::new(1, q!(0), q!(1)).with_weight(q!(1)), Job::new(2, q!(1), q!(2)).with_weight(q!(3))];
        let i = Instance::new(1, jobs).unwrap();
        let crit = Criterion::weighted_late_common_due(q!(3));
        assert!(matches!(determine_order(&i, &crit), Err(Error::NotAgreeable { .. })));
    }
}
