use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::json;

use pfs_core::model::completion_vector;
use pfs_core::oracle::{
    brute_force_late_jobs_capped, enumerate_orders_optimum_capped, random_instance, GeneratorConfig,
};
use pfs_core::pfs_lp::solve;
use pfs_core::transform::{exchange_pair, left_shift_normalize_in, make_pfs_in, vertical_order_in};
use pfs_core::validate::{check_feasible, is_non_delay, is_pfs_like_in, is_vertically_ordered_in, ValidationReport};
use pfs_core::{Criterion, Instance, Rational, Schedule};

use crate::document::{from_json, to_json, CriterionDoc, InstanceDocument, ScheduleDocument};
use crate::error::{CliError, EXIT_OK, EXIT_VERIFY};
use crate::gantt;

/// What a command prints and how it exits.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Output {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

impl Output {
    fn stdout(text: String) -> Self {
        Output { stdout: text, ..Default::default() }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

pub fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

pub fn load_instance(path: &Path) -> Result<(InstanceDocument, Instance), CliError> {
    let doc: InstanceDocument = from_json(&read(path)?, &path.display().to_string())?;
    let instance = doc.instance()?;
    Ok((doc, instance))
}

pub fn load_schedule(path: &Path) -> Result<ScheduleDocument, CliError> {
    from_json(&read(path)?, &path.display().to_string())
}

fn require_criterion(
    doc: &InstanceDocument,
    instance: &Instance,
    overrides: Option<&CriterionDoc>,
) -> Result<Criterion, CliError> {
    doc.criterion(instance, overrides)?
        .ok_or_else(|| CliError::Usage("no criterion in the instance; pass --criterion".into()))
}

/// Ranking used by order-dependent checks: the document's order, else job ids.
fn ranking(instance: &Instance, schedule: &ScheduleDocument) -> Vec<usize> {
    schedule.order.clone().unwrap_or_else(|| (1..=instance.len()).collect())
}

fn format_vector(values: &[Rational]) -> String {
    let parts: Vec<String> = values.iter().map(Rational::to_string).collect();
    format!("[{}]", parts.join(", "))
}

pub fn cmd_solve(
    instance_path: &Path,
    criterion: Option<&CriterionDoc>,
    order: Option<&[usize]>,
) -> Result<Output, CliError> {
    let (doc, instance) = load_instance(instance_path)?;
    let criterion = require_criterion(&doc, &instance, criterion)?;
    let solution = solve(&instance, &criterion, order)?;
    let out = ScheduleDocument::new(
        &solution.schedule,
        Some(solution.value.clone()),
        Some(solution.certificate.permutation.clone()),
        Some(solution.certificate.case),
    );
    let mut output = Output::stdout(to_json(&out));
    output.stderr = format!(
        "order {:?} ({}), value {}, LP optimum {}\n",
        solution.certificate.permutation,
        serde_json::to_value(solution.certificate.case).expect("tag").as_str().unwrap_or("?"),
        solution.value,
        solution.lp_value
    );
    Ok(output)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct VerifyFlags {
    pub non_delay: bool,
    pub vertical: bool,
    pub pfs: bool,
    pub json: bool,
}

#[derive(Serialize)]
struct Check<'a> {
    name: &'static str,
    report: Option<&'a ValidationReport>,
}

pub fn cmd_verify(instance_path: &Path, schedule_path: &Path, flags: VerifyFlags) -> Result<Output, CliError> {
    let (_, instance) = load_instance(instance_path)?;
    let doc = load_schedule(schedule_path)?;
    let schedule = doc.schedule()?;
    let order = ranking(&instance, &doc);

    let feasible = check_feasible(&instance, &schedule);
    let mut checks: Vec<(&'static str, Option<ValidationReport>)> = vec![("feasible", Some(feasible.clone()))];
    // The structural checks assume a feasible schedule; report them as skipped otherwise.
    let gate = |r: pfs_core::Result<ValidationReport>| -> Result<Option<ValidationReport>, CliError> {
        if feasible.is_ok() {
            Ok(Some(r?))
        } else {
            Ok(None)
        }
    };
    if flags.non_delay {
        checks.push(("non_delay", gate(is_non_delay(&instance, &schedule))?));
    }
    if flags.vertical {
        checks.push(("vertical", gate(is_vertically_ordered_in(&schedule, &order))?));
    }
    if flags.pfs {
        checks.push(("pfs", gate(is_pfs_like_in(&schedule, &order))?));
    }

    let ok = checks.iter().all(|(_, r)| r.as_ref().is_some_and(ValidationReport::is_ok));
    let code = if ok { EXIT_OK } else { EXIT_VERIFY };
    let stdout = if flags.json {
        let list: Vec<Check> = checks.iter().map(|(name, report)| Check { name, report: report.as_ref() }).collect();
        to_json(&json!({ "ok": ok, "checks": list }))
    } else {
        let mut text = String::new();
        for (name, report) in &checks {
            match report {
                None => text.push_str(&format!("{name}: skipped (schedule infeasible)\n")),
                Some(r) if r.is_ok() => text.push_str(&format!("{name}: ok\n")),
                Some(r) => {
                    text.push_str(&format!("{name}: {} violation(s)\n", r.violations().len()));
                    for v in r.violations() {
                        text.push_str(&format!("  {v}\n"));
                    }
                }
            }
        }
        text
    };
    Ok(Output { stdout, stderr: String::new(), code })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TransformMode {
    Normalize,
    Vertical,
    Pfs,
    Exchange(usize, usize),
}

pub fn cmd_transform(
    instance_path: &Path,
    schedule_path: &Path,
    mode: TransformMode,
    criterion: Option<&CriterionDoc>,
) -> Result<Output, CliError> {
    let (idoc, instance) = load_instance(instance_path)?;
    let doc = load_schedule(schedule_path)?;
    let schedule = doc.schedule()?;
    let order = ranking(&instance, &doc);
    let criterion = idoc.criterion(&instance, criterion)?;

    let (out, mut meta): (Schedule, ScheduleDocument) = match mode {
        TransformMode::Normalize => (left_shift_normalize_in(&instance, &schedule, &order)?, doc.clone()),
        TransformMode::Vertical => (vertical_order_in(&schedule, &order)?, doc.clone()),
        TransformMode::Pfs => {
            let trace = make_pfs_in(&instance, &schedule, &order)?;
            let mut meta = doc.clone();
            meta.order = Some(order.clone());
            (trace.schedule, meta)
        }
        TransformMode::Exchange(j, k) => {
            // The swap changes the completion order, so any recorded order is stale.
            let meta = ScheduleDocument { order: None, certificate: None, ..doc.clone() };
            (exchange_pair(&instance, &schedule, j, k)?, meta)
        }
    };
    let unchanged = out.merged() == schedule.merged();
    let kept_value = meta.value.clone();
    meta = meta.with_schedule(&instance, &out, criterion.as_ref())?;
    if criterion.is_none() && unchanged {
        meta.value = kept_value;
    }
    let before = completion_vector(&instance, &schedule)?;
    let after = completion_vector(&instance, &out)?;
    Ok(Output {
        stdout: to_json(&meta),
        stderr: format!("C before: {}\nC after:  {}\n", format_vector(&before), format_vector(&after)),
        code: EXIT_OK,
    })
}

pub fn cmd_gantt(instance_path: &Path, schedule_path: &Path) -> Result<Output, CliError> {
    let (_, instance) = load_instance(instance_path)?;
    let schedule = load_schedule(schedule_path)?.schedule()?;
    Ok(Output::stdout(gantt::render(&instance, &schedule)))
}

pub fn cmd_oracle(
    instance_path: &Path,
    criterion: Option<&CriterionDoc>,
    cap: Option<usize>,
) -> Result<Output, CliError> {
    let (doc, instance) = load_instance(instance_path)?;
    let criterion = require_criterion(&doc, &instance, criterion)?;
    let value = match &criterion {
        Criterion::WeightedLateCommonDue { due } => {
            let cap = cap.unwrap_or(pfs_core::oracle::DEFAULT_SUBSET_CAP);
            serde_json::to_value(brute_force_late_jobs_capped(&instance, due, cap)?)
        }
        _ => {
            let cap = cap.unwrap_or(pfs_core::oracle::DEFAULT_ORDER_CAP);
            serde_json::to_value(enumerate_orders_optimum_capped(&instance, &criterion, cap)?)
        }
    }
    .expect("oracle results serialize");
    Ok(Output::stdout(to_json(&value)))
}

pub fn cmd_generate(config: &GeneratorConfig, criterion: Option<CriterionDoc>) -> Result<Output, CliError> {
    let instance = random_instance(config)?;
    if let Some(c) = &criterion {
        c.to_criterion(&instance)?;
    }
    Ok(Output::stdout(to_json(&InstanceDocument::from_instance(&instance, criterion))))
}
