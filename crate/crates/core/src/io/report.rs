//! Assessment reports: a versioned JSON document and a plain-text table.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{check_schema_version, json_error_to_schema, parse_json, to_json_string, InputDigest, SCHEMA_VERSION};
use crate::metrics::{summarize_by_kind, ExperimentKind, ExperimentSummary, TrialResult};
use crate::stability::StabilityReport;
use crate::stats::{compare_experiments, Pooling, ZTestResult};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub a: ExperimentKind,
    pub b: ExperimentKind,
    pub pooling: Pooling,
    pub result: ZTestResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub schema_version: u32,
    pub tool_version: String,
    pub inputs: Vec<InputDigest>,
    pub experiments: Vec<ExperimentSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stability: Option<StabilityReport>,
    pub statistics: Vec<Comparison>,
}

impl ReportDocument {
    pub fn new(inputs: Vec<InputDigest>) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            tool_version: TOOL_VERSION.to_string(),
            inputs,
            experiments: Vec::new(),
            stability: None,
            statistics: Vec::new(),
        }
    }

    pub fn experiment(&self, kind: ExperimentKind) -> Option<&ExperimentSummary> {
        self.experiments.iter().find(|e| e.experiment_kind == kind)
    }

    pub fn trials(&self) -> impl Iterator<Item = &TrialResult> {
        self.experiments.iter().flat_map(|e| e.trials.iter())
    }
}

/// Pairs compared by default: physical against holographic feedback, and
/// holographic against no feedback.
pub const DEFAULT_COMPARISONS: [(ExperimentKind, ExperimentKind); 2] = [
    (ExperimentKind::PhysicalFeedback, ExperimentKind::HolographicFeedback),
    (ExperimentKind::HolographicFeedback, ExperimentKind::NoFeedback),
];

/// Groups trials by kind and runs the default comparisons on every pair
/// present.
pub fn build_report(inputs: Vec<InputDigest>, trials: &[TrialResult], pooling: Pooling) -> Result<ReportDocument> {
    let mut report = ReportDocument::new(inputs);
    report.experiments = summarize_by_kind(trials)?;
    for (a, b) in DEFAULT_COMPARISONS {
        if let (Some(sa), Some(sb)) = (report.experiment(a), report.experiment(b)) {
            let result = compare_experiments(sa, sb, pooling)?;
            report.statistics.push(Comparison { a, b, pooling, result });
        }
    }
    Ok(report)
}

/// Trial list file: `{"schema_version": 1, "trials": [...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialsDocument {
    pub schema_version: u32,
    pub trials: Vec<TrialResult>,
}

/// Trials from a report or a trial list file.
pub fn parse_trials(text: &str) -> Result<Vec<TrialResult>> {
    let doc = parse_json(text)?;
    check_schema_version(&doc)?;
    if doc.get("experiments").is_some() {
        let report = parse_report_value(doc)?;
        return Ok(report.trials().cloned().collect());
    }
    let trials = doc.get("trials").ok_or_else(|| Error::schema("/trials", "missing"))?;
    serde_json::from_value(trials.clone()).map_err(|e| json_error_to_schema("/trials", e))
}

pub fn parse_report(text: &str) -> Result<ReportDocument> {
    let doc = parse_json(text)?;
    check_schema_version(&doc)?;
    parse_report_value(doc)
}

fn parse_report_value(doc: serde_json::Value) -> Result<ReportDocument> {
    serde_json::from_value(doc).map_err(|e| json_error_to_schema("", e))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReportFormat {
    #[default]
    Json,
    Table,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "table" => Ok(ReportFormat::Table),
            other => Err(Error::InvalidArgument(format!("unknown report format {other:?}"))),
        }
    }
}

pub fn emit_report(report: &ReportDocument, format: ReportFormat) -> Result<String> {
    match format {
        ReportFormat::Json => to_json_string(report),
        ReportFormat::Table => Ok(render_table(report)),
    }
}

/// Half-up rounding to two decimals, for display only.
pub fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

fn cell(x: f64) -> String {
    format!("{:.2}", round2(x))
}

fn p_value(p: f64) -> String {
    if p >= 1e-4 {
        format!("{p:.4}")
    } else {
        format!("{p:.2e}")
    }
}

pub fn render_table(report: &ReportDocument) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<22} {:<28} {:>7} {:>6} {:>9} {:>8}",
        "experiment", "trial", "error", "SD", "tip error", "gt error"
    );
    for e in &report.experiments {
        for (i, t) in e.trials.iter().enumerate() {
            let name = if i == 0 { e.experiment_kind.title() } else { "" };
            let _ = writeln!(
                out,
                "{:<22} {:<28} {:>7} {:>6} {:>9} {:>8}",
                name,
                t.trial_id,
                cell(t.error_mean),
                cell(t.error_sd),
                cell(t.tip_error),
                cell(t.gt_error)
            );
        }
        let a = &e.averages;
        let _ = writeln!(
            out,
            "{:<22} {:<28} {:>7} {:>6} {:>9} {:>8}",
            "",
            "average",
            cell(a.error),
            cell(a.sd),
            cell(a.tip_error),
            cell(a.gt_error)
        );
    }
    if let Some(s) = &report.stability {
        let max_axis = s
            .per_marker_sd
            .iter()
            .flat_map(|m| m.axis_sd)
            .fold(0.0, f64::max);
        let _ = writeln!(
            out,
            "\nstability over {} frames: max per-axis SD {}, max pairwise distance SD {}",
            s.n_frames,
            cell(max_axis),
            cell(s.max_pairwise_sd)
        );
    }
    if !report.statistics.is_empty() {
        out.push('\n');
    }
    for c in &report.statistics {
        let _ = writeln!(
            out,
            "{} vs {}: z = {}, p = {} ({} pooling)",
            c.a,
            c.b,
            cell(c.result.z),
            p_value(c.result.p_two_sided),
            match c.pooling {
                Pooling::Summary => "summary",
                Pooling::Exact => "exact",
            }
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trial(id: &str, kind: ExperimentKind, v: [f64; 4]) -> TrialResult {
        TrialResult {
            trial_id: id.into(),
            experiment_kind: kind,
            error_mean: v[0],
            error_sd: v[1],
            tip_error: v[2],
            gt_error: v[3],
            n_fiducials: 16,
            target_errors: Vec::new(),
        }
    }

    #[test]
    fn empty_report_is_valid() {
        let r = build_report(Vec::new(), &[], Pooling::Summary).unwrap();
        let json = emit_report(&r, ReportFormat::Json).unwrap();
        assert_eq!(parse_report(&json).unwrap(), r);
        assert!(emit_report(&r, ReportFormat::Table).unwrap().starts_with("experiment"));
    }

    #[test]
    fn half_up_rounding() {
        assert_eq!(cell(0.985), "0.99");
        assert_eq!(cell(6.9766), "6.98");
        assert_eq!(cell(12.745), "12.75");
    }

    #[test]
    fn comparisons_follow_available_kinds() {
        let trials = vec![
            trial("p1", ExperimentKind::PhysicalFeedback, [7.0, 3.0, 1.0, 1.0]),
            trial("h1", ExperimentKind::HolographicFeedback, [12.0, 3.0, 1.0, 1.0]),
        ];
        let r = build_report(Vec::new(), &trials, Pooling::Summary).unwrap();
        assert_eq!(r.statistics.len(), 1);
        assert_eq!(r.statistics[0].a, ExperimentKind::PhysicalFeedback);
        let text = emit_report(&r, ReportFormat::Json).unwrap();
        let back = parse_trials(&text).unwrap();
        assert_eq!(back, vec![trials[1].clone(), trials[0].clone()]);
        assert_eq!(text, emit_report(&r, ReportFormat::Json).unwrap());
    }
}
