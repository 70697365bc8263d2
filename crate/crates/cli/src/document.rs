//! JSON documents for instances and schedules.
//!
//! Every number is exact: integers may be written as JSON integers, anything
//! else as a string such as `"7/2"`. Floats are rejected.

use serde::{Deserialize, Serialize};

use pfs_core::model::evaluate;
use pfs_core::pfs_lp::OrderCase;
use pfs_core::{Criterion, Instance, Job, Piece, PiecewiseLinearFn, Rational, Schedule};

use crate::error::CliError;

/// Serde adapter writing integral rationals as JSON integers.
pub mod exact {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use pfs_core::Rational;

    pub fn serialize<S: Serializer>(value: &Rational, serializer: S) -> Result<S::Ok, S::Error> {
        match value.to_string().parse::<i64>() {
            Ok(n) => serializer.serialize_i64(n),
            Err(_) => value.serialize(serializer),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<Rational, D::Error> {
        Rational::deserialize(deserializer)
    }

    pub mod option {
        use super::*;

        pub fn serialize<S: Serializer>(value: &Option<Rational>, serializer: S) -> Result<S::Ok, S::Error> {
            match value {
                Some(v) => super::serialize(v, serializer),
                None => serializer.serialize_none(),
            }
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<Option<Rational>, D::Error> {
            Option::<Rational>::deserialize(deserializer)
        }
    }

    pub mod vec {
        use super::*;

        #[derive(Serialize)]
        struct Item<'a>(#[serde(with = "super")] &'a Rational);

        pub fn serialize<S: Serializer>(values: &[Rational], serializer: S) -> Result<S::Ok, S::Error> {
            serializer.collect_seq(values.iter().map(Item))
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<Vec<Rational>, D::Error> {
            Vec::<Rational>::deserialize(deserializer)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobDoc {
    pub id: usize,
    #[serde(with = "exact")]
    pub release: Rational,
    #[serde(with = "exact")]
    pub processing: Rational,
    #[serde(default, with = "exact::option", skip_serializing_if = "Option::is_none")]
    pub due: Option<Rational>,
    #[serde(default, with = "exact::option", skip_serializing_if = "Option::is_none")]
    pub weight: Option<Rational>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CriterionKind {
    Sum,
    Max,
    Wulj,
}

/// `f(t) = initial + Σ slopes` over the segments split at `breakpoints`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionDoc {
    #[serde(default, with = "exact::vec")]
    pub breakpoints: Vec<Rational>,
    #[serde(default, with = "exact")]
    pub initial: Rational,
    #[serde(with = "exact::vec")]
    pub slopes: Vec<Rational>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FunctionsDoc {
    Named(String),
    Explicit(Vec<FunctionDoc>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CriterionDoc {
    pub kind: CriterionKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub functions: Option<FunctionsDoc>,
    #[serde(default, with = "exact::option", skip_serializing_if = "Option::is_none")]
    pub common_due: Option<Rational>,
}

impl CriterionDoc {
    /// Parses a command-line shortcut: `sum_cj`, `sum_wj_cj`, `sum_tj`,
    /// `sum_wj_tj`, `cmax`, `lmax` or `wulj` (which needs `common_due`).
    pub fn shortcut(name: &str, common_due: Option<Rational>) -> Result<Self, CliError> {
        let kind = match name {
            "wulj" => {
                return match common_due {
                    Some(d) => Ok(CriterionDoc { kind: CriterionKind::Wulj, functions: None, common_due: Some(d) }),
                    None => Err(CliError::Usage("criterion wulj needs --common-due".into())),
                }
            }
            "sum_cj" | "sum_wj_cj" | "sum_tj" | "sum_wj_tj" => CriterionKind::Sum,
            "cmax" | "lmax" => CriterionKind::Max,
            other => return Err(CliError::Usage(format!("unknown criterion {other:?}"))),
        };
        if common_due.is_some() {
            return Err(CliError::Usage("--common-due only applies to wulj".into()));
        }
        Ok(CriterionDoc { kind, functions: Some(FunctionsDoc::Named(name.into())), common_due: None })
    }

    pub fn to_criterion(&self, instance: &Instance) -> Result<Criterion, CliError> {
        let n = instance.len();
        let functions = match (&self.kind, &self.functions) {
            (CriterionKind::Wulj, None) => {
                let due =
                    self.common_due.clone().ok_or_else(|| CliError::Parse("criterion wulj needs common_due".into()))?;
                return Ok(Criterion::weighted_late_common_due(due));
            }
            (CriterionKind::Wulj, Some(_)) => {
                return Err(CliError::Parse("criterion wulj takes no functions".into()));
            }
            (_, None) => return Err(CliError::Parse("criterion needs functions".into())),
            (kind, Some(FunctionsDoc::Named(name))) => {
                let c = match (kind, name.as_str()) {
                    (CriterionKind::Sum, "sum_cj") => Criterion::total_completion(n),
                    (CriterionKind::Sum, "sum_wj_cj") => Criterion::total_weighted_completion(instance)?,
                    (CriterionKind::Sum, "sum_tj") => Criterion::total_tardiness(instance)?,
                    (CriterionKind::Sum, "sum_wj_tj") => Criterion::total_weighted_tardiness(instance)?,
                    (CriterionKind::Max, "cmax") => Criterion::makespan(n),
                    (CriterionKind::Max, "lmax") => Criterion::max_lateness(instance)?,
                    _ => {
                        return Err(CliError::Parse(format!("shortcut {name:?} does not fit criterion kind {kind:?}")))
                    }
                };
                return Ok(c);
            }
            (_, Some(FunctionsDoc::Explicit(fs))) => fs,
        };
        if self.common_due.is_some() {
            return Err(CliError::Parse("common_due only applies to wulj".into()));
        }
        let fs = functions
            .iter()
            .map(|f| PiecewiseLinearFn::new(f.breakpoints.clone(), f.initial.clone(), f.slopes.clone()))
            .collect::<Result<Vec<_>, _>>()?;
        let c = match self.kind {
            CriterionKind::Max => Criterion::Max(fs),
            _ => Criterion::Sum(fs),
        };
        c.check_against(instance)?;
        Ok(c)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDocument {
    pub machines: usize,
    pub jobs: Vec<JobDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub criterion: Option<CriterionDoc>,
}

impl InstanceDocument {
    pub fn from_instance(instance: &Instance, criterion: Option<CriterionDoc>) -> Self {
        let jobs = instance
            .jobs()
            .iter()
            .map(|j| JobDoc {
                id: j.id,
                release: j.release.clone(),
                processing: j.processing.clone(),
                due: j.due.clone(),
                weight: j.weight.clone(),
            })
            .collect();
        InstanceDocument { machines: instance.machines(), jobs, criterion }
    }

    pub fn instance(&self) -> Result<Instance, CliError> {
        let jobs = self
            .jobs
            .iter()
            .map(|j| Job {
                id: j.id,
                release: j.release.clone(),
                processing: j.processing.clone(),
                due: j.due.clone(),
                weight: j.weight.clone(),
            })
            .collect();
        Ok(Instance::new(self.machines, jobs)?)
    }

    /// The criterion from `overrides` if given, else the document's own.
    pub fn criterion(
        &self,
        instance: &Instance,
        overrides: Option<&CriterionDoc>,
    ) -> Result<Option<Criterion>, CliError> {
        overrides.or(self.criterion.as_ref()).map(|c| c.to_criterion(instance)).transpose()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PieceDoc {
    pub job: usize,
    pub machine: usize,
    #[serde(with = "exact")]
    pub start: Rational,
    #[serde(with = "exact")]
    pub end: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleDocument {
    pub pieces: Vec<PieceDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<Rational>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<OrderCase>,
}

impl ScheduleDocument {
    /// Pieces are merged and listed by machine, then start time, so equal
    /// schedules always print the same.
    pub fn new(
        schedule: &Schedule,
        value: Option<Rational>,
        order: Option<Vec<usize>>,
        certificate: Option<OrderCase>,
    ) -> Self {
        let mut pieces: Vec<PieceDoc> = schedule
            .merged()
            .pieces()
            .iter()
            .map(|p| PieceDoc { job: p.job, machine: p.machine, start: p.start.clone(), end: p.end.clone() })
            .collect();
        pieces.sort_by(|a, b| (a.machine, &a.start).cmp(&(b.machine, &b.start)));
        ScheduleDocument { pieces, value, order, certificate }
    }

    pub fn schedule(&self) -> Result<Schedule, CliError> {
        let pieces = self.pieces.iter().map(|p| Piece::new(p.job, p.machine, p.start.clone(), p.end.clone())).collect();
        Ok(Schedule::new(pieces)?)
    }

    /// Same metadata, new pieces and value recomputed under `criterion`.
    pub fn with_schedule(
        &self,
        instance: &Instance,
        schedule: &Schedule,
        criterion: Option<&Criterion>,
    ) -> Result<Self, CliError> {
        let value = criterion.map(|c| evaluate(instance, schedule, c)).transpose()?;
        Ok(ScheduleDocument::new(schedule, value, self.order.clone(), self.certificate))
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut out = serde_json::to_string_pretty(value).expect("documents serialize");
    out.push('\n');
    out
}

pub fn from_json<T: for<'de> Deserialize<'de>>(text: &str, what: &str) -> Result<T, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Parse(format!("{what}: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use pfs_core::q;

    #[test]
    fn numbers_round_trip_exactly() {
        let text = r#"{"machines":2,"jobs":[{"id":1,"release":0,"processing":"7/2","due":"3"},{"id":2,"release":"1/3","processing":2,"weight":5}]}"#;
        let doc: InstanceDocument = from_json(text, "instance").unwrap();
        assert_eq!(doc.jobs[0].processing, q!(7, 2));
        assert_eq!(doc.jobs[0].due, Some(q!(3)));
        assert_eq!(doc.jobs[1].release, q!(1, 3));
        let again: InstanceDocument = from_json(&to_json(&doc), "instance").unwrap();
        assert_eq!(again, doc);
        let out = to_json(&doc);
        assert!(out.contains("\"processing\": \"7/2\""));
        assert!(out.contains("\"due\": 3"));
    }

    #[test]
    fn floats_are_rejected() {
        let text = r#"{"machines":1,"jobs":[{"id":1,"release":0,"processing":1.5}]}"#;
        assert!(matches!(from_json::<InstanceDocument>(text, "instance"), Err(CliError::Parse(_))));
    }

    #[test]
    fn shortcuts_expand_against_the_instance() {
        let text = r#"{"machines":1,"jobs":[{"id":1,"release":0,"processing":2,"due":1,"weight":3}],
            "criterion":{"kind":"sum","functions":"sum_wj_tj"}}"#;
        let doc: InstanceDocument = from_json(text, "instance").unwrap();
        let i = doc.instance().unwrap();
        let Some(Criterion::Sum(fs)) = doc.criterion(&i, None).unwrap() else { panic!() };
        assert_eq!(fs[0].value_at(&q!(2)), q!(3));
        let cmax = CriterionDoc::shortcut("cmax", None).unwrap();
        assert_eq!(doc.criterion(&i, Some(&cmax)).unwrap(), Some(Criterion::makespan(1)));
    }

    #[test]
    fn explicit_functions_are_validated() {
        let text = r#"{"machines":1,"jobs":[{"id":1,"release":0,"processing":2}],
            "criterion":{"kind":"max","functions":[{"breakpoints":[2,1],"slopes":[0,1,2]}]}}"#;
        let doc: InstanceDocument = from_json(text, "instance").unwrap();
        let i = doc.instance().unwrap();
        assert!(doc.criterion(&i, None).is_err());
    }

    #[test]
    fn wulj_needs_a_due_date() {
        assert!(CriterionDoc::shortcut("wulj", None).is_err());
        assert!(CriterionDoc::shortcut("sum_cj", Some(q!(1))).is_err());
        let c = CriterionDoc::shortcut("wulj", Some(q!(4))).unwrap();
        assert_eq!(c.common_due, Some(q!(4)));
    }

    #[test]
    fn schedule_documents_are_canonical() {
        let s = Schedule::new(vec![
            Piece::new(2, 2, q!(0), q!(1)),
            Piece::new(1, 1, q!(1), q!(2)),
            Piece::new(1, 1, q!(0), q!(1)),
        ])
        .unwrap();
        let doc = ScheduleDocument::new(&s, None, None, None);
        assert_eq!(doc.pieces.len(), 2);
        assert_eq!((doc.pieces[0].job, doc.pieces[0].end.clone()), (1, q!(2)));
        assert_eq!(doc.schedule().unwrap().merged(), s.merged());
    }
}
