//! Specialization metrics and report serialization.
//!
//! The three ratios relate dependency units to project units: for a project
//! with `P` units whose compile-scope dependencies contribute `CD` units,
//! of which debloating removed `D` and specialization removed `S`,
//!
//! - original ratio  = CD / P
//! - debloated ratio = (CD - D) / P
//! - specialized ratio = (CD - D - S) / P
//!
//! Human-readable output rounds half-up to one decimal; machine output keeps
//! full precision. The JSON report is stable-ordered (keys sorted,
//! dependencies sorted by coordinates) so identical runs are byte-identical.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::buildcheck::BuildStatus;
use crate::callgraph::{CallGraph, DependencyClassification};
use crate::model::PackageId;
use crate::project::LoadedProject;
use crate::repository::{compute_checksum, ChecksumRecord};
use crate::resolver::{Phase, ResolvedTree};
use crate::specializer::SpecializedArtifact;
use crate::treebuilder::{SpecializedTreeResult, TreeKind};

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("ratios are undefined for a project with zero units")]
    UndefinedRatio,
    #[error("removal counts exceed the dependency unit count")]
    RemovalsExceedUnits,
    #[error("internal consistency error: dependency {0} fits no outcome category")]
    InternalConsistency(PackageId),
    #[error("internal consistency error: no artifact recorded for specialized {0}")]
    MissingArtifact(PackageId),
    #[error("cannot write report to `{path}`: {source}")]
    Io {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// The dependency-units-to-project-units ratios for the original, debloated,
/// and specialized tree. Full precision; see [`round_one_decimal`] for the
/// human rendering.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RatioSet {
    pub ratio_o: f64,
    pub ratio_d: f64,
    pub ratio_s: f64,
}

/// Half-up rounding to one decimal place.
pub fn round_one_decimal(x: f64) -> f64 {
    (x * 10.0 + 0.5).floor() / 10.0
}

/// Computes the ratio set from unit counts.
pub fn compute_ratios(
    project_units: u64,
    cd_units: u64,
    removed_by_debloat: u64,
    removed_by_specialization: u64,
) -> Result<RatioSet, ReportError> {
    if project_units == 0 {
        return Err(ReportError::UndefinedRatio);
    }
    if removed_by_debloat + removed_by_specialization > cd_units {
        return Err(ReportError::RemovalsExceedUnits);
    }
    let p = project_units as f64;
    Ok(RatioSet {
        ratio_o: cd_units as f64 / p,
        ratio_d: (cd_units - removed_by_debloat) as f64 / p,
        ratio_s: (cd_units - removed_by_debloat - removed_by_specialization) as f64 / p,
    })
}

/// Final status of one compile-scope dependency of the original tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DependencyStatus {
    #[serde(rename = "specialized")]
    Specialized,
    #[serde(rename = "TUD")]
    Tud,
    #[serde(rename = "bloatedRemoved")]
    BloatedRemoved,
    #[serde(rename = "revertedCompileError")]
    RevertedCompileError,
    #[serde(rename = "revertedTestFailure")]
    RevertedTestFailure,
    #[serde(rename = "ignored")]
    Ignored,
}

impl DependencyStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            DependencyStatus::Specialized => "specialized",
            DependencyStatus::Tud => "TUD",
            DependencyStatus::BloatedRemoved => "bloatedRemoved",
            DependencyStatus::RevertedCompileError => "revertedCompileError",
            DependencyStatus::RevertedTestFailure => "revertedTestFailure",
            DependencyStatus::Ignored => "ignored",
        }
    }
}

/// Per-dependency report entry.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DependencyReport {
    pub id: PackageId,
    pub status: DependencyStatus,
    pub kept_units: u64,
    pub removed_units: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub checksum: Option<ChecksumRecord>,
}

/// A flattened diagnostic line attached to the report.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ReportDiagnostic {
    /// Where the diagnostic arose: `callGraph` or `revert:<coordinates>`.
    pub context: String,
    pub kind: String,
    pub source_unit: String,
    pub target: String,
}

/// The machine-readable result of one pipeline run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SpecializationReport {
    pub project_id: PackageId,
    pub project_unit_count: u64,
    /// Units contributed by compile-scope dependencies of the original tree.
    pub cd_unit_count: u64,
    /// Non-bloated compile-scope dependencies.
    pub nbcd_count: u64,
    pub bloated_removed_units: u64,
    pub specialized_removed_units: u64,
    pub tree_kind: TreeKind,
    pub per_dependency: Vec<DependencyReport>,
    pub ratios: RatioSet,
    pub diagnostics: Vec<ReportDiagnostic>,
}

/// Output format for [`emit_report`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReportFormat {
    #[default]
    Json,
    Text,
}

/// Maps every compile-scope dependency of the run onto its final status.
pub fn classify_outcomes(
    result: &SpecializedTreeResult,
    classification: &DependencyClassification,
) -> Result<Vec<(PackageId, DependencyStatus)>, ReportError> {
    let all: BTreeSet<&PackageId> =
        classification.bloated.iter().chain(classification.non_bloated.iter()).collect();
    let mut statuses = Vec::with_capacity(all.len());
    for id in all {
        let status = if classification.bloated.contains(id) {
            DependencyStatus::BloatedRemoved
        } else if classification.ignored.contains(id) {
            DependencyStatus::Ignored
        } else if classification.totally_used.contains(id) {
            DependencyStatus::Tud
        } else if result.specialized.contains(id) {
            DependencyStatus::Specialized
        } else if let Some(outcome) = result.reverted.get(id) {
            match outcome.status {
                BuildStatus::TestFailure => DependencyStatus::RevertedTestFailure,
                _ => DependencyStatus::RevertedCompileError,
            }
        } else {
            return Err(ReportError::InternalConsistency(id.clone()));
        };
        statuses.push((id.clone(), status));
    }
    Ok(statuses)
}

/// Builds the full report from the pieces of one pipeline run.
pub fn assemble_report(
    project: &LoadedProject,
    tree: &ResolvedTree,
    debloated_tree: &ResolvedTree,
    cg: &CallGraph,
    classification: &DependencyClassification,
    artifacts: &[SpecializedArtifact],
    result: &SpecializedTreeResult,
) -> Result<SpecializationReport, ReportError> {
    let statuses = classify_outcomes(result, classification)?;

    let compile_nodes: Vec<PackageId> = tree.classpath(Phase::Compile);
    let cd_unit_count: u64 =
        compile_nodes.iter().map(|id| tree.nodes[id].archive.units.len() as u64).sum();
    let debloated_nodes: BTreeSet<PackageId> =
        debloated_tree.classpath(Phase::Compile).into_iter().collect();
    let bloated_removed_units: u64 = compile_nodes
        .iter()
        .filter(|id| !debloated_nodes.contains(*id))
        .map(|id| tree.nodes[id].archive.units.len() as u64)
        .sum();

    let mut per_dependency = Vec::with_capacity(statuses.len());
    let mut specialized_removed_units = 0u64;
    for (id, status) in statuses {
        let archive = &tree.nodes[&id].archive;
        let total = archive.units.len() as u64;
        let entry = match status {
            DependencyStatus::Specialized => {
                let artifact = artifacts
                    .iter()
                    .find(|a| a.original_id == id)
                    .ok_or_else(|| ReportError::MissingArtifact(id.clone()))?;
                specialized_removed_units += artifact.removed_units as u64;
                DependencyReport {
                    id,
                    status,
                    kept_units: artifact.kept_units as u64,
                    removed_units: artifact.removed_units as u64,
                    checksum: Some(artifact.checksum.clone()),
                }
            }
            DependencyStatus::BloatedRemoved => DependencyReport {
                id,
                status,
                kept_units: 0,
                removed_units: total,
                checksum: None,
            },
            // TUD, ignored, and reverted dependencies stay at their original
            // coordinates with all units intact.
            _ => DependencyReport {
                id,
                status,
                kept_units: total,
                removed_units: 0,
                checksum: Some(compute_checksum(archive)),
            },
        };
        per_dependency.push(entry);
    }
    per_dependency.sort_by(|a, b| a.id.cmp(&b.id));

    let mut diagnostics: Vec<ReportDiagnostic> = Vec::new();
    for u in cg.unresolved() {
        diagnostics.push(ReportDiagnostic {
            context: "callGraph".into(),
            kind: "unresolvedStaticRef".into(),
            source_unit: u.source_unit.clone(),
            target: u.target_unit.clone(),
        });
    }
    for (dep, outcome) in &result.reverted {
        for d in &outcome.diagnostics {
            diagnostics.push(ReportDiagnostic {
                context: format!("revert:{dep}"),
                kind: d.kind.as_str().to_string(),
                source_unit: d.source_unit.clone(),
                target: d.target.clone(),
            });
        }
    }
    diagnostics.sort();
    diagnostics.dedup();

    let ratios = compute_ratios(
        project.src_units.len() as u64,
        cd_unit_count,
        bloated_removed_units,
        specialized_removed_units,
    )?;

    Ok(SpecializationReport {
        project_id: project.manifest.id.clone(),
        project_unit_count: project.src_units.len() as u64,
        cd_unit_count,
        nbcd_count: classification.non_bloated.len() as u64,
        bloated_removed_units,
        specialized_removed_units,
        tree_kind: result.kind,
        per_dependency,
        ratios,
        diagnostics,
    })
}

/// Stable-ordered JSON rendering: keys sorted, trailing newline.
pub fn render_json(report: &SpecializationReport) -> String {
    // Round-tripping through Value sorts object keys (serde_json maps are
    // B-tree backed), which pins the byte-level layout.
    let value = serde_json::to_value(report).expect("report serializes");
    let mut body = serde_json::to_string_pretty(&value).expect("report serializes");
    body.push('\n');
    body
}

/// Human-readable rendering with one-decimal ratios.
pub fn render_text(report: &SpecializationReport) -> String {
    use std::fmt::Write;
    let mut out = String::new();
    let nbcd_specialized = report
        .per_dependency
        .iter()
        .filter(|d| d.status == DependencyStatus::Specialized)
        .count();
    writeln!(out, "project: {}", report.project_id).unwrap();
    writeln!(out, "project units: {}", report.project_unit_count).unwrap();
    writeln!(out, "dependency units (compile scope): {}", report.cd_unit_count).unwrap();
    writeln!(out, "tree: {:?}", report.tree_kind).unwrap();
    writeln!(out, "non-bloated dependencies specialized: {}/{}", nbcd_specialized, report.nbcd_count)
        .unwrap();
    writeln!(out, "units removed by debloating: {}", report.bloated_removed_units).unwrap();
    writeln!(out, "units removed by specialization: {}", report.specialized_removed_units).unwrap();
    writeln!(
        out,
        "ratios: original {:.1}x, debloated {:.1}x, specialized {:.1}x",
        round_one_decimal(report.ratios.ratio_o),
        round_one_decimal(report.ratios.ratio_d),
        round_one_decimal(report.ratios.ratio_s),
    )
    .unwrap();
    writeln!(out, "dependencies:").unwrap();
    for dep in &report.per_dependency {
        writeln!(
            out,
            "  {:<22} kept {:>6}  removed {:>6}  {}",
            dep.status.as_str(),
            dep.kept_units,
            dep.removed_units,
            dep.id
        )
        .unwrap();
    }
    let checksums: Vec<&DependencyReport> = report
        .per_dependency
        .iter()
        .filter(|d| d.checksum.is_some() && d.status == DependencyStatus::Specialized)
        .collect();
    if !checksums.is_empty() {
        writeln!(out, "checksums:").unwrap();
        for dep in checksums {
            let record = dep.checksum.as_ref().unwrap();
            writeln!(out, "{}", serde_json::to_string_pretty(record).unwrap()).unwrap();
        }
    }
    if !report.diagnostics.is_empty() {
        writeln!(out, "diagnostics:").unwrap();
        for d in &report.diagnostics {
            writeln!(out, "  [{}] {} {} -> {}", d.context, d.kind, d.source_unit, d.target)
                .unwrap();
        }
    }
    out
}

/// Writes the report to `out` in the requested format.
pub fn emit_report(
    report: &SpecializationReport,
    format: ReportFormat,
    out: &Path,
) -> Result<(), ReportError> {
    let body = match format {
        ReportFormat::Json => render_json(report),
        ReportFormat::Text => render_text(report),
    };
    std::fs::write(out, body).map_err(|e| ReportError::Io { path: out.to_path_buf(), source: e })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rounded(r: &RatioSet) -> (f64, f64, f64) {
        (
            round_one_decimal(r.ratio_o),
            round_one_decimal(r.ratio_d),
            round_one_decimal(r.ratio_s),
        )
    }

    #[test]
    fn ratios_match_constraint_solver_case_study() {
        // 833 project units, 8487 dependency units, 504 removed by
        // debloating, 5704 removed by specialization.
        let r = compute_ratios(833, 8487, 504, 5704).unwrap();
        assert_eq!(rounded(&r), (10.2, 9.6, 2.7));
        assert!((r.ratio_o - 8487.0 / 833.0).abs() < 1e-12);
        assert!((r.ratio_d - 7983.0 / 833.0).abs() < 1e-12);
        assert!((r.ratio_s - 2279.0 / 833.0).abs() < 1e-12);
    }

    #[test]
    fn ratios_match_validator_library_case_study() {
        let r = compute_ratios(64, 780, 0, 625).unwrap();
        assert_eq!(rounded(&r), (12.2, 12.2, 2.4));
        assert!((r.ratio_s - 155.0 / 64.0).abs() < 1e-12);
    }

    #[test]
    fn zero_dependency_project_has_zero_ratios() {
        let r = compute_ratios(7, 0, 0, 0).unwrap();
        assert_eq!(rounded(&r), (0.0, 0.0, 0.0));
    }

    #[test]
    fn zero_project_units_is_undefined() {
        assert!(matches!(compute_ratios(0, 10, 0, 0), Err(ReportError::UndefinedRatio)));
    }

    #[test]
    fn removals_beyond_cd_units_are_rejected() {
        assert!(matches!(
            compute_ratios(10, 5, 4, 2),
            Err(ReportError::RemovalsExceedUnits)
        ));
    }

    #[test]
    fn ratio_monotonicity_under_removals() {
        let r = compute_ratios(5, 100, 30, 20).unwrap();
        assert!(r.ratio_s <= r.ratio_d && r.ratio_d <= r.ratio_o);
    }

    #[test]
    fn half_up_rounding() {
        assert_eq!(round_one_decimal(0.25), 0.3);
        assert_eq!(round_one_decimal(0.24), 0.2);
        assert_eq!(round_one_decimal(10.188475), 10.2);
        assert_eq!(round_one_decimal(2.4218), 2.4);
    }

    #[test]
    fn tree_kind_serializes_as_bare_names() {
        assert_eq!(serde_json::to_string(&TreeKind::TST).unwrap(), "\"TST\"");
        assert_eq!(serde_json::to_string(&TreeKind::PST).unwrap(), "\"PST\"");
    }

    #[test]
    fn status_names_match_report_vocabulary() {
        for (status, name) in [
            (DependencyStatus::Specialized, "\"specialized\""),
            (DependencyStatus::Tud, "\"TUD\""),
            (DependencyStatus::BloatedRemoved, "\"bloatedRemoved\""),
            (DependencyStatus::RevertedCompileError, "\"revertedCompileError\""),
            (DependencyStatus::RevertedTestFailure, "\"revertedTestFailure\""),
            (DependencyStatus::Ignored, "\"ignored\""),
        ] {
            assert_eq!(serde_json::to_string(&status).unwrap(), name);
        }
    }
}
