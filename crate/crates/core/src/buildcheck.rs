//! Build validation without a toolchain: the compile check resolves the
//! static closure of the project sources against the compile classpath, and
//! the test check resolves static, dynamic-literal, and hidden references
//! from the test units against the test classpath. Both produce a
//! deterministic [`BuildOutcome`] instead of invoking a compiler or runner —
//! which reproduces exactly the failure mode of removing a unit that is still
//! needed. An external build command can replace both checks when a real
//! toolchain is available.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Archive, BuildCheck, ClassUnit, ProjectManifest};
use crate::project::{write_manifest, LoadedProject, ProjectError, MANIFEST_FILE};
use crate::repository::{compute_checksum, Repository};
use crate::resolver::{resolve_tree, Phase, ResolveError, ResolvedTree};

#[derive(Debug, Error)]
pub enum BuildError {
    #[error("resolution failed: {0}")]
    Resolve(#[from] ResolveError),
    #[error(transparent)]
    Project(#[from] ProjectError),
    #[error("build command failed to start: {0}")]
    CommandSpawn(std::io::Error),
}

/// Outcome status of a validation run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum BuildStatus {
    Success,
    CompileError,
    TestFailure,
}

/// What went wrong, and where.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum DiagnosticKind {
    MissingStaticRef,
    ChecksumMismatch,
    MissingRequiredUnit,
    MissingDynamicRef,
    MissingHiddenRef,
    /// A coordinate in the manifest or a declared dependency did not resolve
    /// to an archive in the repository.
    MissingArchive,
    /// An external build command exited non-zero.
    CommandFailed,
}

impl DiagnosticKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            DiagnosticKind::MissingStaticRef => "missingStaticRef",
            DiagnosticKind::ChecksumMismatch => "checksumMismatch",
            DiagnosticKind::MissingRequiredUnit => "missingRequiredUnit",
            DiagnosticKind::MissingDynamicRef => "missingDynamicRef",
            DiagnosticKind::MissingHiddenRef => "missingHiddenRef",
            DiagnosticKind::MissingArchive => "missingArchive",
            DiagnosticKind::CommandFailed => "commandFailed",
        }
    }
}

/// One validation finding: the referencing unit (or check context) and the
/// unit name or coordinates it failed on.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    pub source_unit: String,
    pub target: String,
}

/// Result of a compile or test validation phase. `status == Success` exactly
/// when `diagnostics` is empty; diagnostics are sorted by source unit, then
/// target.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BuildOutcome {
    pub status: BuildStatus,
    pub diagnostics: Vec<Diagnostic>,
}

impl BuildOutcome {
    pub fn success() -> Self {
        BuildOutcome { status: BuildStatus::Success, diagnostics: Vec::new() }
    }

    fn from_diagnostics(failure: BuildStatus, mut diagnostics: Vec<Diagnostic>) -> Self {
        diagnostics.sort_by(|a, b| {
            (&a.source_unit, &a.target, a.kind).cmp(&(&b.source_unit, &b.target, b.kind))
        });
        diagnostics.dedup();
        if diagnostics.is_empty() {
            BuildOutcome::success()
        } else {
            BuildOutcome { status: failure, diagnostics }
        }
    }

    pub fn is_success(&self) -> bool {
        self.status == BuildStatus::Success
    }
}

fn unit_index<'a>(
    projects: &[&'a BTreeMap<String, ClassUnit>],
    archives: &'a [std::sync::Arc<Archive>],
) -> HashMap<&'a str, &'a ClassUnit> {
    let mut index: HashMap<&str, &ClassUnit> = HashMap::new();
    for units in projects {
        for (name, unit) in units.iter() {
            index.entry(name.as_str()).or_insert(unit);
        }
    }
    for archive in archives {
        for (name, unit) in &archive.units {
            index.entry(name.as_str()).or_insert(unit);
        }
    }
    index
}

/// Compile check: walks the static closure from every project source unit
/// through the compile classpath (static references only) and evaluates the
/// manifest's build checks.
pub fn compile_check(
    src_units: &BTreeMap<String, ClassUnit>,
    tree: &ResolvedTree,
    build_checks: &[BuildCheck],
    _repo: &Repository,
) -> BuildOutcome {
    let archives = tree.classpath_archives(Phase::Compile);
    let index = unit_index(&[src_units], &archives);
    let mut diagnostics = Vec::new();

    let mut visited: HashSet<&str> = HashSet::new();
    let mut queue: VecDeque<&str> = src_units.keys().map(String::as_str).collect();
    visited.extend(queue.iter().copied());
    while let Some(name) = queue.pop_front() {
        let Some(unit) = index.get(name) else { continue };
        for r in &unit.static_refs {
            match index.get(r.unit.as_str()) {
                None => diagnostics.push(Diagnostic {
                    kind: DiagnosticKind::MissingStaticRef,
                    source_unit: unit.name.clone(),
                    target: r.to_string(),
                }),
                Some(target) => {
                    if let Some(member) = &r.member {
                        if !target.has_member(member) {
                            diagnostics.push(Diagnostic {
                                kind: DiagnosticKind::MissingStaticRef,
                                source_unit: unit.name.clone(),
                                target: r.to_string(),
                            });
                        }
                    }
                    if visited.insert(target.name.as_str()) {
                        queue.push_back(target.name.as_str());
                    }
                }
            }
        }
        // Dynamic literals and hidden refs are not resolved at compile time.
    }

    for check in build_checks {
        match check {
            BuildCheck::Checksum { dep, expected, .. } => {
                let node_id = tree.resolve_alias(dep);
                match tree.nodes.get(node_id) {
                    None => diagnostics.push(Diagnostic {
                        kind: DiagnosticKind::ChecksumMismatch,
                        source_unit: "build-check".into(),
                        target: dep.to_string(),
                    }),
                    Some(node) => {
                        let actual = compute_checksum(&node.archive);
                        if !actual.checksum.eq_ignore_ascii_case(expected) {
                            diagnostics.push(Diagnostic {
                                kind: DiagnosticKind::ChecksumMismatch,
                                source_unit: "build-check".into(),
                                target: dep.to_string(),
                            });
                        }
                    }
                }
            }
            BuildCheck::RequireUnit { unit } => {
                if !index.contains_key(unit.as_str()) {
                    diagnostics.push(Diagnostic {
                        kind: DiagnosticKind::MissingRequiredUnit,
                        source_unit: "build-check".into(),
                        target: unit.clone(),
                    });
                }
            }
        }
    }

    BuildOutcome::from_diagnostics(BuildStatus::CompileError, diagnostics)
}

/// Test check: resolves static, dynamic-literal, and hidden references
/// transitively from every test unit against the project units plus the test
/// classpath. Call only after a clean compile check.
pub fn test_check(
    test_units: &BTreeMap<String, ClassUnit>,
    tree: &ResolvedTree,
    src_units: &BTreeMap<String, ClassUnit>,
) -> BuildOutcome {
    let archives = tree.classpath_archives(Phase::Test);
    let index = unit_index(&[src_units, test_units], &archives);
    let mut diagnostics = Vec::new();

    let mut visited: HashSet<&str> = HashSet::new();
    let mut queue: VecDeque<&str> = test_units.keys().map(String::as_str).collect();
    visited.extend(queue.iter().copied());
    while let Some(name) = queue.pop_front() {
        let Some(unit) = index.get(name) else { continue };
        let mut visit = |target_unit: &str, kind: DiagnosticKind, target: String,
                         diagnostics: &mut Vec<Diagnostic>| {
            match index.get(target_unit) {
                None => diagnostics.push(Diagnostic {
                    kind,
                    source_unit: unit.name.clone(),
                    target,
                }),
                Some(resolved) => {
                    if visited.insert(resolved.name.as_str()) {
                        queue.push_back(resolved.name.as_str());
                    }
                }
            }
        };
        for r in &unit.static_refs {
            visit(&r.unit, DiagnosticKind::MissingStaticRef, r.to_string(), &mut diagnostics);
        }
        for literal in &unit.dynamic_literal_refs {
            visit(literal, DiagnosticKind::MissingDynamicRef, literal.clone(), &mut diagnostics);
        }
        for hidden in &unit.hidden_refs {
            visit(hidden, DiagnosticKind::MissingHiddenRef, hidden.clone(), &mut diagnostics);
        }
    }

    BuildOutcome::from_diagnostics(BuildStatus::TestFailure, diagnostics)
}

/// Full in-process build: resolve, compile check, then test check. The first
/// failing phase determines the status; resolution failures surface as
/// compile-error diagnostics carrying coordinates.
pub fn full_build(
    project: &LoadedProject,
    manifest: &ProjectManifest,
    repo: &Repository,
) -> Result<BuildOutcome, BuildError> {
    let tree = match resolve_tree(manifest, repo) {
        Ok(tree) => tree,
        Err(ResolveError::MissingArchive { id, path }) => {
            let source = path
                .len()
                .checked_sub(2)
                .and_then(|i| path.get(i))
                .map(|p| p.to_string())
                .unwrap_or_default();
            return Ok(BuildOutcome {
                status: BuildStatus::CompileError,
                diagnostics: vec![Diagnostic {
                    kind: DiagnosticKind::MissingArchive,
                    source_unit: source,
                    target: id.to_string(),
                }],
            });
        }
        Err(e) => return Err(e.into()),
    };
    let compile = compile_check(&project.src_units, &tree, &manifest.build_checks, repo);
    if !compile.is_success() {
        return Ok(compile);
    }
    Ok(test_check(&project.test_units, &tree, &project.src_units))
}

/// How candidate manifests are validated: by the in-process checks, or by an
/// external command run in a per-candidate workspace directory.
#[derive(Debug, Clone, Default)]
pub enum Validation {
    #[default]
    InProcess,
    /// `sh -c <command>` with the candidate manifest materialized as
    /// `project.json` in the workspace; exit code 0 maps to success,
    /// anything else to a compile error.
    Command(String),
}

/// Runs one candidate validation. `candidate` names the workspace
/// subdirectory under `<project>/.spectrim/work/`.
pub fn validate_candidate(
    validation: &Validation,
    project: &LoadedProject,
    manifest: &ProjectManifest,
    repo: &Repository,
    candidate: &str,
) -> Result<BuildOutcome, BuildError> {
    match validation {
        Validation::InProcess => full_build(project, manifest, repo),
        Validation::Command(command) => {
            let workspace = candidate_workspace(&project.dir, candidate);
            std::fs::create_dir_all(&workspace).map_err(|e| {
                BuildError::Project(ProjectError::Io { path: workspace.clone(), source: e })
            })?;
            write_manifest(&workspace.join(MANIFEST_FILE), manifest)?;
            let status = std::process::Command::new("sh")
                .arg("-c")
                .arg(command)
                .current_dir(&workspace)
                .env("SPECTRIM_PROJECT_DIR", &project.dir)
                .env("SPECTRIM_REPO", repo.root())
                .status()
                .map_err(BuildError::CommandSpawn)?;
            if status.success() {
                Ok(BuildOutcome::success())
            } else {
                Ok(BuildOutcome {
                    status: BuildStatus::CompileError,
                    diagnostics: vec![Diagnostic {
                        kind: DiagnosticKind::CommandFailed,
                        source_unit: candidate.to_string(),
                        target: format!("exit code {}", status.code().unwrap_or(-1)),
                    }],
                })
            }
        }
    }
}

/// Per-candidate workspace directory: `<project>/.spectrim/work/<candidate>/`.
pub fn candidate_workspace(project_dir: &Path, candidate: &str) -> PathBuf {
    project_dir.join(".spectrim").join("work").join(candidate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Dependency, Member, MemberKind, MemberRef, PackageId, Pin};
    use crate::specializer::specialize_dependency;
    use std::collections::BTreeSet;
    use tempfile::tempdir;

    fn pkg(g: &str, a: &str, v: &str) -> PackageId {
        PackageId::new(g, a, v).unwrap()
    }

    fn unit(name: &str) -> ClassUnit {
        let mut u = ClassUnit::new(name);
        u.members.push(Member { name: "m0".into(), kind: MemberKind::Method });
        u
    }

    struct Fixture {
        repo: Repository,
        manifest: ProjectManifest,
        src: BTreeMap<String, ClassUnit>,
        tests: BTreeMap<String, ClassUnit>,
        _dir: tempfile::TempDir,
    }

    /// Demo project: Main -> x.X1; libx has {x.X1, x.X2}; tst is test scope.
    fn fixture() -> Fixture {
        let dir = tempdir().unwrap();
        let repo = Repository::new(dir.path());
        let mut libx = Archive::new(pkg("libx", "libx", "1.0"));
        libx.insert_unit(unit("x.X1"));
        libx.insert_unit(unit("x.X2"));
        repo.store_archive(&libx).unwrap();
        let mut tst = Archive::new(pkg("tst", "tst", "1.0"));
        tst.insert_unit(unit("t.T1"));
        repo.store_archive(&tst).unwrap();

        let mut manifest = ProjectManifest::new(pkg("demo", "app", "1.0"));
        manifest.dependencies.push(Dependency::compile(pkg("libx", "libx", "1.0")));
        manifest.dependencies.push(Dependency::test(pkg("tst", "tst", "1.0")));

        let mut main = unit("app.Main");
        main.static_refs.push(MemberRef::to_member("x.X1", "m0", MemberKind::Method));
        let mut src = BTreeMap::new();
        src.insert(main.name.clone(), main);

        let mut main_test = unit("app.MainTest");
        main_test.is_test = true;
        main_test.static_refs.push(MemberRef::to_class("app.Main"));
        main_test.static_refs.push(MemberRef::to_class("t.T1"));
        let mut tests = BTreeMap::new();
        tests.insert(main_test.name.clone(), main_test);

        Fixture { repo, manifest, src, tests, _dir: dir }
    }

    fn specialize_libx(f: &Fixture) -> PackageId {
        let original = f.repo.lookup(&pkg("libx", "libx", "1.0")).unwrap();
        let reachable = BTreeSet::from(["x.X1".to_string()]);
        let (spl, artifact) =
            specialize_dependency(&original, &reachable, "deptrim.spl").unwrap();
        f.repo.store_archive(&spl).unwrap();
        artifact.specialized_id
    }

    fn pinned_manifest(f: &Fixture, to: PackageId) -> ProjectManifest {
        let mut m = f.manifest.clone();
        m.pins.push(Pin { from: pkg("libx", "libx", "1.0"), to });
        m
    }

    #[test]
    fn specialized_tree_passes_compile_check() {
        let f = fixture();
        let spl = specialize_libx(&f);
        let manifest = pinned_manifest(&f, spl);
        let tree = resolve_tree(&manifest, &f.repo).unwrap();
        let outcome = compile_check(&f.src, &tree, &[], &f.repo);
        assert!(outcome.is_success(), "{outcome:?}");
    }

    #[test]
    fn checksum_pinned_to_original_digest_fails_after_specialization() {
        let f = fixture();
        let original_digest =
            compute_checksum(&f.repo.lookup(&pkg("libx", "libx", "1.0")).unwrap());
        let spl = specialize_libx(&f);
        let mut manifest = pinned_manifest(&f, spl);
        manifest.build_checks.push(BuildCheck::Checksum {
            dep: pkg("libx", "libx", "1.0"),
            algorithm: "SHA-256".into(),
            expected: original_digest.checksum.clone(),
        });
        let tree = resolve_tree(&manifest, &f.repo).unwrap();
        let outcome = compile_check(&f.src, &tree, &manifest.build_checks, &f.repo);
        assert_eq!(outcome.status, BuildStatus::CompileError);
        assert_eq!(outcome.diagnostics[0].kind, DiagnosticKind::ChecksumMismatch);
        assert_eq!(outcome.diagnostics[0].target, "libx:libx:1.0");

        // The same check passes against the unpinned original.
        let tree = resolve_tree(&f.manifest, &f.repo).unwrap();
        let outcome = compile_check(&f.src, &tree, &manifest.build_checks, &f.repo);
        assert!(outcome.is_success());
    }

    #[test]
    fn require_unit_on_removed_unit_fails_compile() {
        let f = fixture();
        let spl = specialize_libx(&f);
        let mut manifest = pinned_manifest(&f, spl);
        manifest
            .build_checks
            .push(BuildCheck::RequireUnit { unit: "x.X2".into() });
        let tree = resolve_tree(&manifest, &f.repo).unwrap();
        let outcome = compile_check(&f.src, &tree, &manifest.build_checks, &f.repo);
        assert_eq!(outcome.status, BuildStatus::CompileError);
        assert_eq!(outcome.diagnostics[0].kind, DiagnosticKind::MissingRequiredUnit);
        assert_eq!(outcome.diagnostics[0].target, "x.X2");
    }

    #[test]
    fn hidden_ref_to_removed_unit_fails_test_check() {
        let mut f = fixture();
        f.tests.get_mut("app.MainTest").unwrap().hidden_refs.push("x.X2".into());
        let spl = specialize_libx(&f);
        let manifest = pinned_manifest(&f, spl);
        let tree = resolve_tree(&manifest, &f.repo).unwrap();
        assert!(compile_check(&f.src, &tree, &[], &f.repo).is_success());
        let outcome = test_check(&f.tests, &tree, &f.src);
        assert_eq!(outcome.status, BuildStatus::TestFailure);
        assert_eq!(outcome.diagnostics[0].kind, DiagnosticKind::MissingHiddenRef);
        assert_eq!(outcome.diagnostics[0].source_unit, "app.MainTest");
        assert_eq!(outcome.diagnostics[0].target, "x.X2");
    }

    #[test]
    fn hidden_ref_to_kept_unit_passes() {
        let mut f = fixture();
        f.tests.get_mut("app.MainTest").unwrap().hidden_refs.push("x.X1".into());
        let spl = specialize_libx(&f);
        let manifest = pinned_manifest(&f, spl);
        let tree = resolve_tree(&manifest, &f.repo).unwrap();
        let outcome = test_check(&f.tests, &tree, &f.src);
        assert!(outcome.is_success(), "{outcome:?}");
    }

    #[test]
    fn hidden_refs_resolve_transitively_through_kept_units() {
        // Test -> (static) app.Main -> nothing; app.Main hides a ref into a
        // removed unit: the transitive walk finds it.
        let mut f = fixture();
        f.src.get_mut("app.Main").unwrap().hidden_refs.push("x.X2".into());
        let spl = specialize_libx(&f);
        let manifest = pinned_manifest(&f, spl);
        let tree = resolve_tree(&manifest, &f.repo).unwrap();
        let outcome = test_check(&f.tests, &tree, &f.src);
        assert_eq!(outcome.status, BuildStatus::TestFailure);
        assert_eq!(outcome.diagnostics[0].source_unit, "app.Main");
    }

    #[test]
    fn full_build_passes_on_original_fixture() {
        let f = fixture();
        let project = LoadedProject {
            dir: PathBuf::from("."),
            manifest: f.manifest.clone(),
            src_units: f.src.clone(),
            test_units: f.tests.clone(),
        };
        let outcome = full_build(&project, &f.manifest, &f.repo).unwrap();
        assert!(outcome.is_success(), "{outcome:?}");
    }

    #[test]
    fn full_build_surfaces_missing_archive_as_compile_diagnostic() {
        let f = fixture();
        let mut manifest = f.manifest.clone();
        manifest.dependencies.push(Dependency::compile(pkg("gone", "gone", "1.0")));
        let project = LoadedProject {
            dir: PathBuf::from("."),
            manifest: f.manifest.clone(),
            src_units: f.src.clone(),
            test_units: f.tests.clone(),
        };
        let outcome = full_build(&project, &manifest, &f.repo).unwrap();
        assert_eq!(outcome.status, BuildStatus::CompileError);
        assert_eq!(outcome.diagnostics[0].kind, DiagnosticKind::MissingArchive);
        assert!(outcome.diagnostics[0].target.contains("gone:gone:1.0"));
    }

    #[test]
    fn test_phase_never_runs_after_compile_failure() {
        let mut f = fixture();
        // Break compile (missing static target) and tests (hidden ref) at once.
        f.src.get_mut("app.Main").unwrap().static_refs.push(MemberRef::to_class("ghost.G"));
        f.tests.get_mut("app.MainTest").unwrap().hidden_refs.push("ghost.H".into());
        let project = LoadedProject {
            dir: PathBuf::from("."),
            manifest: f.manifest.clone(),
            src_units: f.src.clone(),
            test_units: f.tests.clone(),
        };
        let outcome = full_build(&project, &f.manifest, &f.repo).unwrap();
        assert_eq!(outcome.status, BuildStatus::CompileError);
        assert!(outcome
            .diagnostics
            .iter()
            .all(|d| d.kind == DiagnosticKind::MissingStaticRef));
    }

    #[test]
    fn diagnostics_are_sorted_and_deterministic() {
        let mut f = fixture();
        let main = f.src.get_mut("app.Main").unwrap();
        main.static_refs.push(MemberRef::to_class("zz.Z"));
        main.static_refs.push(MemberRef::to_class("aa.A"));
        let tree = resolve_tree(&f.manifest, &f.repo).unwrap();
        let o1 = compile_check(&f.src, &tree, &[], &f.repo);
        let o2 = compile_check(&f.src, &tree, &[], &f.repo);
        assert_eq!(o1, o2);
        assert_eq!(o1.diagnostics[0].target, "aa.A");
        assert_eq!(o1.diagnostics[1].target, "zz.Z");
    }

    #[test]
    fn missing_member_on_existing_unit_is_a_static_ref_error() {
        let mut f = fixture();
        f.src
            .get_mut("app.Main")
            .unwrap()
            .static_refs
            .push(MemberRef::to_member("x.X1", "nope", MemberKind::Method));
        let tree = resolve_tree(&f.manifest, &f.repo).unwrap();
        let outcome = compile_check(&f.src, &tree, &[], &f.repo);
        assert_eq!(outcome.status, BuildStatus::CompileError);
        assert_eq!(outcome.diagnostics[0].target, "x.X1#nope");
    }

    #[test]
    fn command_validation_maps_exit_codes() {
        let f = fixture();
        let dir = tempdir().unwrap();
        let project = LoadedProject {
            dir: dir.path().to_path_buf(),
            manifest: f.manifest.clone(),
            src_units: f.src.clone(),
            test_units: f.tests.clone(),
        };
        let ok = validate_candidate(
            &Validation::Command("test -f project.json".into()),
            &project,
            &f.manifest,
            &f.repo,
            "probe",
        )
        .unwrap();
        assert!(ok.is_success());
        assert!(candidate_workspace(dir.path(), "probe").join(MANIFEST_FILE).is_file());

        let bad = validate_candidate(
            &Validation::Command("exit 3".into()),
            &project,
            &f.manifest,
            &f.repo,
            "probe",
        )
        .unwrap();
        assert_eq!(bad.status, BuildStatus::CompileError);
        assert_eq!(bad.diagnostics[0].kind, DiagnosticKind::CommandFailed);
        assert!(bad.diagnostics[0].target.contains('3'));
    }
}
