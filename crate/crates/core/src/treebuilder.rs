//! Tree-level specialization: assemble the totally specialized manifest,
//! validate it, and fall back to the per-dependency partially-specialized
//! search when it fails.
//!
//! The search validates each specialized dependency in isolation, keeps the
//! original entry for any that fail, then validates the union of the safe
//! ones. If the union build fails, safe artifacts are reverted greedily by
//! descending removed-unit count until the build passes.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::buildcheck::{validate_candidate, BuildError, BuildOutcome, BuildStatus, Validation};
use crate::callgraph::{build_call_graph, classify_dependencies, GraphError};
use crate::model::{PackageId, Pin, ProjectManifest};
use crate::project::{
    write_manifest, LoadedProject, ProjectError, SPECIALIZED_MANIFEST_FILE,
};
use crate::report::{assemble_report, ReportError, SpecializationReport};
use crate::repository::Repository;
use crate::resolver::{resolve_tree, Phase, ResolveError};
use crate::specializer::{
    debloat_manifest, deploy_specialized, specialize_dependency, SpecializeError,
    SpecializedArtifact, DEFAULT_SPECIALIZED_PREFIX,
};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("load phase: {0}")]
    Load(#[from] ProjectError),
    #[error("resolve phase: {0}")]
    Resolve(#[from] ResolveError),
    #[error("analyze phase: {0}")]
    Graph(#[from] GraphError),
    #[error("specialize phase: {0}")]
    Specialize(#[from] SpecializeError),
    #[error("validate phase: {0}")]
    Build(#[from] BuildError),
    #[error("report phase: {0}")]
    Report(#[from] ReportError),
    #[error("original build must pass before specialization (status {status:?})")]
    OriginalBuildFailed { status: BuildStatus, outcome: BuildOutcome },
    #[error("internal error: duplicate pin for {0}")]
    DuplicatePin(PackageId),
}

/// TST: every used dependency specialized. PST: the largest found set of
/// specialized dependencies that keeps the build passing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TreeKind {
    TST,
    PST,
}

/// Outcome of the tree specialization search.
#[derive(Debug, Clone)]
pub struct SpecializedTreeResult {
    pub kind: TreeKind,
    pub manifest: ProjectManifest,
    /// Original coordinates of the dependencies that remained pinned.
    pub specialized: BTreeSet<PackageId>,
    /// Original coordinates of reverted dependencies, with the failing
    /// outcome that caused each revert.
    pub reverted: BTreeMap<PackageId, BuildOutcome>,
    /// Originals reverted during union backoff, in revert order.
    pub union_backoff_steps: Vec<PackageId>,
}

/// Options for the end-to-end pipeline.
#[derive(Debug, Clone)]
pub struct PipelineOptions {
    pub repo_root: std::path::PathBuf,
    pub jobs: usize,
    pub specialized_prefix: String,
    /// Merged with the manifest's own ignore list.
    pub ignore: Vec<PackageId>,
    pub build_command: Option<String>,
}

impl PipelineOptions {
    pub fn new(repo_root: impl Into<std::path::PathBuf>) -> Self {
        PipelineOptions {
            repo_root: repo_root.into(),
            jobs: 1,
            specialized_prefix: DEFAULT_SPECIALIZED_PREFIX.to_string(),
            ignore: Vec::new(),
            build_command: None,
        }
    }

    fn validation(&self) -> Validation {
        match &self.build_command {
            Some(cmd) => Validation::Command(cmd.clone()),
            None => Validation::InProcess,
        }
    }
}

/// Adds a pin original -> specialized for every artifact; direct dependency
/// entries are additionally rewritten in place. Totally used dependencies
/// never appear in `artifacts`, so they receive no pin.
pub fn build_tst_manifest(
    debloated: &ProjectManifest,
    artifacts: &[SpecializedArtifact],
) -> Result<ProjectManifest, PipelineError> {
    let mut manifest = debloated.clone();
    let mut pinned: BTreeSet<&PackageId> =
        manifest.pins.iter().map(|p| &p.from).collect::<BTreeSet<_>>();
    for artifact in artifacts {
        if !pinned.insert(&artifact.original_id) {
            return Err(PipelineError::DuplicatePin(artifact.original_id.clone()));
        }
    }
    for artifact in artifacts {
        manifest.pins.push(Pin {
            from: artifact.original_id.clone(),
            to: artifact.specialized_id.clone(),
        });
        for dep in &mut manifest.dependencies {
            if dep.id == artifact.original_id {
                dep.id = artifact.specialized_id.clone();
            }
        }
    }
    Ok(manifest)
}

fn workspace_name(prefix: &str, id: &PackageId) -> String {
    format!("{prefix}-{}", id.to_string().replace([':', '/'], "_"))
}

/// Runs the TST/PST search over deployed artifacts.
///
/// The artifacts are processed in lexicographic order of their original
/// coordinates, so the result is a pure function of its inputs.
pub fn search_pst(
    project: &LoadedProject,
    debloated: &ProjectManifest,
    artifacts: &[SpecializedArtifact],
    repo: &Repository,
    options: &PipelineOptions,
) -> Result<SpecializedTreeResult, PipelineError> {
    let validation = options.validation();
    let mut artifacts: Vec<&SpecializedArtifact> = artifacts.iter().collect();
    artifacts.sort_by(|a, b| a.original_id.cmp(&b.original_id));

    // Step 1: the totally specialized tree.
    let tst = build_tst_manifest(debloated, &artifacts.iter().map(|a| (*a).clone()).collect::<Vec<_>>())?;
    let outcome = validate_candidate(&validation, project, &tst, repo, "tst")?;
    if outcome.is_success() {
        return Ok(SpecializedTreeResult {
            kind: TreeKind::TST,
            manifest: tst,
            specialized: artifacts.iter().map(|a| a.original_id.clone()).collect(),
            reverted: BTreeMap::new(),
            union_backoff_steps: Vec::new(),
        });
    }

    // Step 2: one specialized dependency at a time, independently.
    let candidate_outcomes = run_candidates(project, debloated, &artifacts, repo, options)?;
    let mut safe: Vec<&SpecializedArtifact> = Vec::new();
    let mut reverted: BTreeMap<PackageId, BuildOutcome> = BTreeMap::new();
    for (artifact, outcome) in artifacts.iter().zip(candidate_outcomes) {
        if outcome.is_success() {
            safe.push(artifact);
        } else {
            reverted.insert(artifact.original_id.clone(), outcome);
        }
    }

    // Steps 3 and 4: union of the safe set, with greedy backoff on failure.
    let mut union_backoff_steps = Vec::new();
    loop {
        let subset: Vec<SpecializedArtifact> = safe.iter().map(|a| (*a).clone()).collect();
        let manifest = build_tst_manifest(debloated, &subset)?;
        let candidate = if union_backoff_steps.is_empty() {
            "union".to_string()
        } else {
            format!("union-backoff-{}", union_backoff_steps.len())
        };
        let outcome = validate_candidate(&validation, project, &manifest, repo, &candidate)?;
        if outcome.is_success() {
            return Ok(SpecializedTreeResult {
                kind: TreeKind::PST,
                manifest,
                specialized: safe.iter().map(|a| a.original_id.clone()).collect(),
                reverted,
                union_backoff_steps,
            });
        }
        if safe.is_empty() {
            // Even the pin-free debloated manifest fails.
            return Err(PipelineError::OriginalBuildFailed {
                status: outcome.status,
                outcome,
            });
        }
        // Revert the largest specialization first; ties go to the
        // lexicographically smaller coordinates.
        let victim = safe
            .iter()
            .enumerate()
            .max_by(|(_, a), (_, b)| {
                a.removed_units
                    .cmp(&b.removed_units)
                    .then_with(|| b.original_id.cmp(&a.original_id))
            })
            .map(|(i, _)| i)
            .expect("safe set is non-empty");
        let removed = safe.remove(victim);
        union_backoff_steps.push(removed.original_id.clone());
        reverted.insert(removed.original_id.clone(), outcome);
    }
}

/// Validates every single-pin candidate, in input order, optionally across
/// worker threads. Output order matches input order regardless of scheduling.
fn run_candidates(
    project: &LoadedProject,
    debloated: &ProjectManifest,
    artifacts: &[&SpecializedArtifact],
    repo: &Repository,
    options: &PipelineOptions,
) -> Result<Vec<BuildOutcome>, PipelineError> {
    let validation = options.validation();
    let mut manifests = Vec::with_capacity(artifacts.len());
    for artifact in artifacts {
        let manifest = build_tst_manifest(debloated, std::slice::from_ref(*artifact))?;
        let name = workspace_name("dep", &artifact.original_id);
        manifests.push((manifest, name));
    }

    let jobs = options.jobs.max(1).min(manifests.len().max(1));
    if jobs <= 1 {
        let mut outcomes = Vec::with_capacity(manifests.len());
        for (manifest, name) in &manifests {
            outcomes.push(validate_candidate(&validation, project, manifest, repo, name)?);
        }
        return Ok(outcomes);
    }

    let next = AtomicUsize::new(0);
    let results: Vec<Mutex<Option<Result<BuildOutcome, BuildError>>>> =
        manifests.iter().map(|_| Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..jobs {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= manifests.len() {
                    break;
                }
                let (manifest, name) = &manifests[i];
                let outcome = validate_candidate(&validation, project, manifest, repo, name);
                *results[i].lock().unwrap() = Some(outcome);
            });
        }
    });
    let mut outcomes = Vec::with_capacity(results.len());
    for slot in results {
        let result = slot.into_inner().unwrap().expect("candidate was processed");
        outcomes.push(result?);
    }
    Ok(outcomes)
}

/// End-to-end specialization of a project directory: resolve, analyze,
/// classify, debloat, specialize, deploy, search, report. Writes the
/// specialized manifest beside the original, which is never mutated.
pub fn run_pipeline(
    project_dir: &Path,
    options: &PipelineOptions,
) -> Result<SpecializationReport, PipelineError> {
    let project = LoadedProject::load(project_dir)?;
    let repo = Repository::new(&options.repo_root);
    run_pipeline_loaded(&project, &repo, options)
}

/// [`run_pipeline`] over an already-loaded project.
pub fn run_pipeline_loaded(
    project: &LoadedProject,
    repo: &Repository,
    options: &PipelineOptions,
) -> Result<SpecializationReport, PipelineError> {
    // Precondition: the original build passes.
    let original =
        validate_candidate(&options.validation(), project, &project.manifest, repo, "original")?;
    if !original.is_success() {
        return Err(PipelineError::OriginalBuildFailed {
            status: original.status,
            outcome: original,
        });
    }

    let tree = resolve_tree(&project.manifest, repo)?;
    let cg = build_call_graph(
        &project.src_units,
        &tree.classpath_archives(Phase::Compile),
        project.manifest.entry_points.as_deref(),
    )?;
    let mut ignore = project.manifest.ignore_dependencies.clone();
    ignore.extend(options.ignore.iter().cloned());
    let classification = classify_dependencies(&cg, &tree, &ignore);

    let debloated = debloat_manifest(&project.manifest, &classification, &tree);

    let mut pairs = Vec::new();
    for dep in classification.specializable() {
        let archive = &tree.nodes[dep].archive;
        let reachable = &classification.reachable_units[dep];
        pairs.push(specialize_dependency(archive, reachable, &options.specialized_prefix)?);
    }
    deploy_specialized(repo, &pairs)?;
    let artifacts: Vec<SpecializedArtifact> = pairs.into_iter().map(|(_, a)| a).collect();

    let result = search_pst(project, &debloated, &artifacts, repo, options)?;

    write_manifest(&project.dir.join(SPECIALIZED_MANIFEST_FILE), &result.manifest)?;

    let debloated_tree = resolve_tree(&debloated, repo)?;
    let report = assemble_report(
        project,
        &tree,
        &debloated_tree,
        &cg,
        &classification,
        &artifacts,
        &result,
    )?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{generate_corpus, CorpusSpec};
    use tempfile::tempdir;

    fn pkg(g: &str, a: &str, v: &str) -> PackageId {
        PackageId::new(g, a, v).unwrap()
    }

    #[test]
    fn closed_world_corpus_yields_tst() {
        let dir = tempdir().unwrap();
        let spec = CorpusSpec { seed: 11, dep_count: 4, ..CorpusSpec::default() };
        let (project_dir, repo, truth) = generate_corpus(&spec, dir.path()).unwrap();
        let options = PipelineOptions::new(repo.root());
        let report = run_pipeline(&project_dir, &options).unwrap();
        assert_eq!(report.tree_kind, TreeKind::TST);
        assert_eq!(report.specialized_removed_units, truth.removed_by_specialization);
    }

    #[test]
    fn hidden_ref_corpus_yields_pst_with_test_failure_revert() {
        let dir = tempdir().unwrap();
        let spec = CorpusSpec {
            seed: 12,
            dep_count: 5,
            hidden_ref_count: 1,
            ..CorpusSpec::default()
        };
        let (project_dir, repo, truth) = generate_corpus(&spec, dir.path()).unwrap();
        assert_eq!(truth.reverted.len(), 1);
        let options = PipelineOptions::new(repo.root());
        let report = run_pipeline(&project_dir, &options).unwrap();
        assert_eq!(report.tree_kind, TreeKind::PST);
        let reverted: Vec<_> = report
            .per_dependency
            .iter()
            .filter(|d| d.status == crate::report::DependencyStatus::RevertedTestFailure)
            .map(|d| d.id.clone())
            .collect();
        assert_eq!(reverted, truth.reverted.keys().cloned().collect::<Vec<_>>());
    }

    #[test]
    fn original_build_failure_is_a_precondition_error() {
        let dir = tempdir().unwrap();
        let spec = CorpusSpec { seed: 13, dep_count: 3, ..CorpusSpec::default() };
        let (project_dir, repo, _) = generate_corpus(&spec, dir.path()).unwrap();
        // Break the project: reference a unit that exists nowhere.
        let broken = project_dir.join("src-units").join("corpus.Extra.json");
        std::fs::write(
            &broken,
            serde_json::json!({
                "name": "corpus.Extra",
                "members": [{"name": "m0", "kind": "method"}],
                "staticRefs": [{"unit": "ghost.G", "kind": "class"}]
            })
            .to_string(),
        )
        .unwrap();
        let options = PipelineOptions::new(repo.root());
        let err = run_pipeline(&project_dir, &options).unwrap_err();
        assert!(matches!(err, PipelineError::OriginalBuildFailed { .. }), "{err}");
    }

    #[test]
    fn parallel_candidates_match_sequential_result() {
        let dir1 = tempdir().unwrap();
        let dir2 = tempdir().unwrap();
        let spec = CorpusSpec {
            seed: 14,
            dep_count: 6,
            hidden_ref_count: 2,
            ..CorpusSpec::default()
        };
        let (p1, r1, _) = generate_corpus(&spec, dir1.path()).unwrap();
        let (p2, r2, _) = generate_corpus(&spec, dir2.path()).unwrap();
        let sequential = run_pipeline(&p1, &PipelineOptions::new(r1.root())).unwrap();
        let parallel = run_pipeline(
            &p2,
            &PipelineOptions { jobs: 4, ..PipelineOptions::new(r2.root()) },
        )
        .unwrap();
        assert_eq!(sequential.tree_kind, parallel.tree_kind);
        assert_eq!(sequential.per_dependency, parallel.per_dependency);
        assert_eq!(sequential.ratios, parallel.ratios);
    }

    #[test]
    fn duplicate_pin_is_an_internal_error() {
        let debloated = ProjectManifest::new(pkg("demo", "app", "1.0"));
        let artifact = SpecializedArtifact {
            original_id: pkg("libx", "libx", "1.0"),
            specialized_id: pkg("deptrim.spl.libx", "libx", "1.0"),
            kept_units: 1,
            removed_units: 1,
            checksum: crate::repository::checksum_of_bytes(
                &pkg("deptrim.spl.libx", "libx", "1.0"),
                b"",
            ),
        };
        let err =
            build_tst_manifest(&debloated, &[artifact.clone(), artifact]).unwrap_err();
        assert!(matches!(err, PipelineError::DuplicatePin(_)));
    }

    #[test]
    fn tst_manifest_rewrites_direct_entries_and_adds_pins() {
        let mut debloated = ProjectManifest::new(pkg("demo", "app", "1.0"));
        debloated
            .dependencies
            .push(crate::model::Dependency::compile(pkg("libx", "libx", "1.0")));
        let artifact = SpecializedArtifact {
            original_id: pkg("libx", "libx", "1.0"),
            specialized_id: pkg("deptrim.spl.libx", "libx", "1.0"),
            kept_units: 1,
            removed_units: 1,
            checksum: crate::repository::checksum_of_bytes(
                &pkg("deptrim.spl.libx", "libx", "1.0"),
                b"",
            ),
        };
        let tst = build_tst_manifest(&debloated, &[artifact]).unwrap();
        assert_eq!(tst.dependencies[0].id, pkg("deptrim.spl.libx", "libx", "1.0"));
        assert_eq!(tst.pins.len(), 1);
        assert_eq!(tst.pins[0].from, pkg("libx", "libx", "1.0"));
        // Zero artifacts: unchanged.
        let same = build_tst_manifest(&debloated, &[]).unwrap();
        assert_eq!(same, debloated);
    }

    #[test]
    fn original_manifest_file_is_never_mutated() {
        let dir = tempdir().unwrap();
        let spec = CorpusSpec { seed: 15, dep_count: 3, ..CorpusSpec::default() };
        let (project_dir, repo, _) = generate_corpus(&spec, dir.path()).unwrap();
        let manifest_path = project_dir.join(crate::project::MANIFEST_FILE);
        let before = std::fs::read(&manifest_path).unwrap();
        run_pipeline(&project_dir, &PipelineOptions::new(repo.root())).unwrap();
        let after = std::fs::read(&manifest_path).unwrap();
        assert_eq!(before, after);
        assert!(project_dir.join(SPECIALIZED_MANIFEST_FILE).is_file());
    }
}
