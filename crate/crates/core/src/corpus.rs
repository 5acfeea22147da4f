//! Synthetic project and repository generation with embedded ground truth.
//!
//! Generated corpora are a pure function of their seed: identical spec and
//! seed produce byte-identical trees. Reachability inside each dependency is
//! laid out as a reference chain of known length, so the expected
//! classification and removal counts are exact by construction.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    Archive, BuildCheck, ClassUnit, Dependency, Member, MemberKind, MemberRef, PackageId,
    ProjectManifest, CHECKSUM_ALGORITHM,
};
use crate::project::{write_manifest, write_unit, ProjectError, MANIFEST_FILE, SRC_UNITS_DIR, TEST_UNITS_DIR};
use crate::repository::{compute_checksum, RepoError, Repository};
use crate::treebuilder::TreeKind;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("inconsistent corpus spec: {0}")]
    Inconsistent(String),
    #[error(transparent)]
    Project(#[from] ProjectError),
    #[error(transparent)]
    Repo(#[from] RepoError),
}

/// Input parameters for the random corpus generator. Loadable from a
/// `corpus.json` file; all fields default.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct CorpusSpec {
    pub seed: u64,
    pub project_unit_count: usize,
    pub test_unit_count: usize,
    pub dep_count: usize,
    /// Inclusive (min, max) unit count per dependency.
    pub units_per_dep: (usize, usize),
    /// Fraction of units reachable per used dependency.
    pub usage_density: f64,
    /// Fraction of dependencies with zero usage.
    pub bloated_fraction: f64,
    /// Analysis-invisible test-time references, each poisoning one
    /// specializable dependency into a test-failure revert.
    pub hidden_ref_count: usize,
    /// Checksum build checks pinned to original digests, each poisoning one
    /// specializable dependency into a compile-error revert.
    pub checksum_check_count: usize,
    /// Required-unit build checks on removable units, same effect as
    /// checksum checks.
    pub require_unit_check_count: usize,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        CorpusSpec {
            seed: 0,
            project_unit_count: 8,
            test_unit_count: 2,
            dep_count: 5,
            units_per_dep: (4, 12),
            usage_density: 0.5,
            bloated_fraction: 0.25,
            hidden_ref_count: 0,
            checksum_check_count: 0,
            require_unit_check_count: 0,
        }
    }
}

/// Why a poisoned dependency is expected to be reverted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum RevertCause {
    CompileError,
    TestFailure,
}

/// Expected pipeline results for a generated corpus.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GroundTruth {
    pub project_id: PackageId,
    pub bloated: BTreeSet<PackageId>,
    pub non_bloated: BTreeSet<PackageId>,
    pub totally_used: BTreeSet<PackageId>,
    pub reachable_units: BTreeMap<PackageId, BTreeSet<String>>,
    pub removed_by_debloat: u64,
    /// Over dependencies expected to stay specialized (poisoned ones revert
    /// and keep their full unit sets).
    pub removed_by_specialization: u64,
    pub tree_kind: TreeKind,
    pub reverted: BTreeMap<PackageId, RevertCause>,
}

pub const GROUND_TRUTH_FILE: &str = "ground-truth.json";

fn pick(rng: &mut ChaCha8Rng, n: usize) -> usize {
    debug_assert!(n > 0);
    (rng.next_u64() % n as u64) as usize
}

fn member() -> Member {
    Member { name: "m0".into(), kind: MemberKind::Method }
}

fn unit_with_member(name: String) -> ClassUnit {
    let mut u = ClassUnit::new(name);
    u.members.push(member());
    u
}

fn chain_ref(target: &str, alternate: bool) -> MemberRef {
    if alternate {
        MemberRef::to_member(target, "m0", MemberKind::Method)
    } else {
        MemberRef::to_class(target)
    }
}

/// An archive whose first `reachable` units form a reference chain from
/// `U0000`; the remaining units have no incoming references.
fn chain_archive(
    id: PackageId,
    namespace: &str,
    total: usize,
    reachable: usize,
    declared: Vec<Dependency>,
    first_unit_extra_refs: Vec<MemberRef>,
) -> Archive {
    assert!(reachable <= total);
    let mut archive = Archive::new(id);
    archive.declared_dependencies = declared;
    for i in 0..total {
        let mut unit = unit_with_member(format!("{namespace}.U{i:04}"));
        if i + 1 < reachable {
            unit.static_refs
                .push(chain_ref(&format!("{namespace}.U{:04}", i + 1), i % 2 == 0));
        }
        if i == 0 {
            unit.static_refs.extend(first_unit_extra_refs.iter().cloned());
        }
        archive.insert_unit(unit);
    }
    archive
}

fn reachable_set(namespace: &str, reachable: usize) -> BTreeSet<String> {
    (0..reachable).map(|i| format!("{namespace}.U{i:04}")).collect()
}

struct CorpusFiles {
    manifest: ProjectManifest,
    src_units: Vec<ClassUnit>,
    test_units: Vec<ClassUnit>,
    archives: Vec<Archive>,
}

impl CorpusFiles {
    fn write(self, out_dir: &Path) -> Result<(PathBuf, Repository), CorpusError> {
        let project_dir = out_dir.join("project");
        let repo = Repository::new(out_dir.join("repo"));
        std::fs::create_dir_all(&project_dir)
            .map_err(|e| ProjectError::Io { path: project_dir.clone(), source: e })?;
        write_manifest(&project_dir.join(MANIFEST_FILE), &self.manifest)?;
        for unit in &self.src_units {
            write_unit(&project_dir.join(SRC_UNITS_DIR), unit)?;
        }
        for unit in &self.test_units {
            write_unit(&project_dir.join(TEST_UNITS_DIR), unit)?;
        }
        for archive in &self.archives {
            repo.store_archive(archive)?;
        }
        Ok((project_dir, repo))
    }
}

/// Generates a seeded random corpus under `out_dir` (`project/` and `repo/`
/// subdirectories, plus a `ground-truth.json`).
pub fn generate_corpus(
    spec: &CorpusSpec,
    out_dir: &Path,
) -> Result<(PathBuf, Repository, GroundTruth), CorpusError> {
    validate_spec(spec)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let project_id = PackageId::new("corpus", "app", "1.0").expect("static id");

    // Per-dependency shape.
    let dep_ids: Vec<PackageId> = (0..spec.dep_count)
        .map(|d| PackageId::new("corpus.deps", format!("dep{d:02}"), "1.0").expect("static id"))
        .collect();
    let namespaces: Vec<String> = (0..spec.dep_count).map(|d| format!("dep{d:02}")).collect();
    let unit_counts: Vec<usize> = (0..spec.dep_count)
        .map(|_| {
            let (lo, hi) = spec.units_per_dep;
            lo + pick(&mut rng, hi - lo + 1)
        })
        .collect();

    // Deterministic shuffle, then the prefix is bloated.
    let bloated_count =
        ((spec.bloated_fraction * spec.dep_count as f64) + 0.5).floor() as usize;
    let mut order: Vec<usize> = (0..spec.dep_count).collect();
    for i in (1..order.len()).rev() {
        order.swap(i, pick(&mut rng, i + 1));
    }
    let bloated_idx: BTreeSet<usize> = order.iter().take(bloated_count).copied().collect();

    let reachable_counts: Vec<usize> = (0..spec.dep_count)
        .map(|d| {
            if bloated_idx.contains(&d) {
                0
            } else {
                let n = unit_counts[d];
                (((spec.usage_density * n as f64) + 0.5).floor() as usize).clamp(1, n)
            }
        })
        .collect();

    // Poison assignment over specializable dependencies (used, not totally
    // used), spread in shuffled order.
    let specializable: Vec<usize> = order
        .iter()
        .copied()
        .filter(|&d| !bloated_idx.contains(&d) && reachable_counts[d] < unit_counts[d])
        .collect();
    let poisons_needed =
        spec.hidden_ref_count + spec.checksum_check_count + spec.require_unit_check_count;
    if poisons_needed > specializable.len() {
        return Err(CorpusError::Inconsistent(format!(
            "{poisons_needed} poisoned dependencies requested but only {} are specializable",
            specializable.len()
        )));
    }
    if spec.hidden_ref_count > 0 && spec.test_unit_count == 0 {
        return Err(CorpusError::Inconsistent(
            "hidden refs require at least one test unit".into(),
        ));
    }
    let hidden_targets = &specializable[..spec.hidden_ref_count];
    let checksum_targets =
        &specializable[spec.hidden_ref_count..spec.hidden_ref_count + spec.checksum_check_count];
    let require_targets = &specializable[spec.hidden_ref_count + spec.checksum_check_count
        ..poisons_needed];

    // Project source units, with anchors into each used dependency.
    let mut src_units: Vec<ClassUnit> =
        (0..spec.project_unit_count).map(|i| unit_with_member(format!("corpus.C{i:03}"))).collect();
    for i in 0..spec.project_unit_count.saturating_sub(1) {
        if pick(&mut rng, 2) == 0 {
            let target = format!("corpus.C{:03}", i + 1);
            src_units[i].static_refs.push(chain_ref(&target, true));
        }
    }
    for d in 0..spec.dep_count {
        if reachable_counts[d] > 0 {
            let anchor = d % spec.project_unit_count;
            src_units[anchor]
                .static_refs
                .push(chain_ref(&format!("{}.U0000", namespaces[d]), pick(&mut rng, 2) == 0));
        }
    }

    // Dependency archives: reachable chain plus unreferenced noise links
    // among the removable units.
    let mut archives = Vec::with_capacity(spec.dep_count);
    for d in 0..spec.dep_count {
        let mut archive = chain_archive(
            dep_ids[d].clone(),
            &namespaces[d],
            unit_counts[d],
            reachable_counts[d],
            Vec::new(),
            Vec::new(),
        );
        let mut j = reachable_counts[d];
        while j + 1 < unit_counts[d] {
            if pick(&mut rng, 2) == 0 {
                let source = format!("{}.U{j:04}", namespaces[d]);
                let target = format!("{}.U{:04}", namespaces[d], j + 1);
                archive
                    .units
                    .get_mut(&source)
                    .expect("unit generated")
                    .static_refs
                    .push(chain_ref(&target, false));
            }
            j += 2;
        }
        archives.push(archive);
    }

    // Test units reference project units and reachable dependency units only.
    let used: Vec<usize> = (0..spec.dep_count).filter(|&d| reachable_counts[d] > 0).collect();
    let mut test_units: Vec<ClassUnit> = (0..spec.test_unit_count)
        .map(|i| {
            let mut unit = unit_with_member(format!("corpus.T{i:02}"));
            unit.is_test = true;
            unit.static_refs
                .push(chain_ref(&format!("corpus.C{:03}", i % spec.project_unit_count), true));
            if !used.is_empty() {
                let d = used[i % used.len()];
                let u = pick(&mut rng, reachable_counts[d]);
                unit.static_refs
                    .push(chain_ref(&format!("{}.U{u:04}", namespaces[d]), false));
            }
            unit
        })
        .collect();

    // Hidden-reference poisons.
    let mut reverted: BTreeMap<PackageId, RevertCause> = BTreeMap::new();
    for (k, &d) in hidden_targets.iter().enumerate() {
        let removable = unit_counts[d] - reachable_counts[d];
        let target = format!(
            "{}.U{:04}",
            namespaces[d],
            reachable_counts[d] + pick(&mut rng, removable)
        );
        test_units[k % spec.test_unit_count].hidden_refs.push(target);
        reverted.insert(dep_ids[d].clone(), RevertCause::TestFailure);
    }

    // Build-check poisons.
    let mut build_checks = Vec::new();
    for &d in checksum_targets {
        build_checks.push(BuildCheck::Checksum {
            dep: dep_ids[d].clone(),
            algorithm: CHECKSUM_ALGORITHM.to_string(),
            expected: compute_checksum(&archives[d]).checksum,
        });
        reverted.insert(dep_ids[d].clone(), RevertCause::CompileError);
    }
    for &d in require_targets {
        let removable = unit_counts[d] - reachable_counts[d];
        let unit = format!(
            "{}.U{:04}",
            namespaces[d],
            reachable_counts[d] + pick(&mut rng, removable)
        );
        build_checks.push(BuildCheck::RequireUnit { unit });
        reverted.insert(dep_ids[d].clone(), RevertCause::CompileError);
    }

    let mut manifest = ProjectManifest::new(project_id.clone());
    manifest.dependencies =
        dep_ids.iter().map(|id| Dependency::compile(id.clone())).collect();
    manifest.build_checks = build_checks;

    let truth = GroundTruth {
        project_id,
        bloated: bloated_idx.iter().map(|&d| dep_ids[d].clone()).collect(),
        non_bloated: (0..spec.dep_count)
            .filter(|d| !bloated_idx.contains(d))
            .map(|d| dep_ids[d].clone())
            .collect(),
        totally_used: (0..spec.dep_count)
            .filter(|&d| !bloated_idx.contains(&d) && reachable_counts[d] == unit_counts[d])
            .map(|d| dep_ids[d].clone())
            .collect(),
        reachable_units: (0..spec.dep_count)
            .map(|d| (dep_ids[d].clone(), reachable_set(&namespaces[d], reachable_counts[d])))
            .collect(),
        removed_by_debloat: bloated_idx.iter().map(|&d| unit_counts[d] as u64).sum(),
        removed_by_specialization: (0..spec.dep_count)
            .filter(|&d| {
                !bloated_idx.contains(&d)
                    && reachable_counts[d] < unit_counts[d]
                    && !reverted.contains_key(&dep_ids[d])
            })
            .map(|d| (unit_counts[d] - reachable_counts[d]) as u64)
            .sum(),
        tree_kind: if reverted.is_empty() { TreeKind::TST } else { TreeKind::PST },
        reverted,
    };

    let files = CorpusFiles { manifest, src_units, test_units, archives };
    let (project_dir, repo) = files.write(out_dir)?;
    let truth_path = out_dir.join(GROUND_TRUTH_FILE);
    let mut body = serde_json::to_vec_pretty(&serde_json::to_value(&truth).expect("serializes"))
        .expect("serializes");
    body.push(b'\n');
    std::fs::write(&truth_path, body)
        .map_err(|e| ProjectError::Io { path: truth_path, source: e })?;
    Ok((project_dir, repo, truth))
}

fn validate_spec(spec: &CorpusSpec) -> Result<(), CorpusError> {
    let fraction = |name: &str, v: f64| {
        if !(0.0..=1.0).contains(&v) {
            Err(CorpusError::Inconsistent(format!("{name} {v} outside [0, 1]")))
        } else {
            Ok(())
        }
    };
    fraction("usageDensity", spec.usage_density)?;
    fraction("bloatedFraction", spec.bloated_fraction)?;
    if spec.project_unit_count == 0 {
        return Err(CorpusError::Inconsistent("projectUnitCount must be positive".into()));
    }
    let (lo, hi) = spec.units_per_dep;
    if lo > hi {
        return Err(CorpusError::Inconsistent(format!("unitsPerDep range ({lo}, {hi}) is empty")));
    }
    if spec.dep_count > 0 && spec.usage_density > 0.0 && lo == 0 {
        return Err(CorpusError::Inconsistent(
            "usageDensity > 0 requires at least one unit per dependency".into(),
        ));
    }
    Ok(())
}

/// Named corpus presets exposed by the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Demo,
    Jacop,
    CommonsValidator,
}

impl std::str::FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "demo" => Ok(Preset::Demo),
            "jacop" => Ok(Preset::Jacop),
            "commons-validator" => Ok(Preset::CommonsValidator),
            other => Err(format!("unknown preset `{other}` (expected demo, jacop, or commons-validator)")),
        }
    }
}

/// Generates a preset corpus under `out_dir`.
pub fn generate_preset(preset: Preset, out_dir: &Path) -> Result<(PathBuf, Repository), CorpusError> {
    match preset {
        Preset::Demo => generate_demo(out_dir),
        Preset::Jacop => replicate_jacop(out_dir),
        Preset::CommonsValidator => replicate_commons_validator(out_dir),
    }
}

/// Tiny three-dependency fixture used in documentation and golden tests:
/// `libx` is partially used, `liby` is bloated, `tst` is test scope.
pub fn generate_demo(out_dir: &Path) -> Result<(PathBuf, Repository), CorpusError> {
    let pkg = |g: &str, a: &str, v: &str| PackageId::new(g, a, v).expect("static id");

    let mut main = unit_with_member("app.Main".into());
    main.static_refs.push(MemberRef::to_member("x.X1", "m0", MemberKind::Method));

    let mut main_test = unit_with_member("app.MainTest".into());
    main_test.is_test = true;
    main_test.static_refs.push(MemberRef::to_class("app.Main"));
    main_test.static_refs.push(MemberRef::to_class("t.T1"));

    let mut libx = Archive::new(pkg("libx", "libx", "1.0"));
    libx.insert_unit(unit_with_member("x.X1".into()));
    libx.insert_unit(unit_with_member("x.X2".into()));
    libx.resources.insert("META/libx.properties".into(), b"name=libx\n".to_vec());
    let mut liby = Archive::new(pkg("liby", "liby", "1.0"));
    liby.insert_unit(unit_with_member("y.Y1".into()));
    let mut tst = Archive::new(pkg("tst", "tst", "1.0"));
    tst.insert_unit(unit_with_member("t.T1".into()));

    let mut manifest = ProjectManifest::new(pkg("demo", "app", "1.0"));
    manifest.dependencies.push(Dependency::compile(pkg("libx", "libx", "1.0")));
    manifest.dependencies.push(Dependency::compile(pkg("liby", "liby", "1.0")));
    manifest.dependencies.push(Dependency::test(pkg("tst", "tst", "1.0")));

    CorpusFiles {
        manifest,
        src_units: vec![main],
        test_units: vec![main_test],
        archives: vec![libx, liby, tst],
    }
    .write(out_dir)
}

/// Desk-scale replica of a real constraint-solver project's dependency
/// shape: 833 project units; 9 compile-scope dependencies totaling 8487
/// units (5 bloated with 504 units, 4 non-bloated with 7983); a 2984-unit
/// compiler dependency with exactly 2 reachable units; and one checksum
/// check that forces a compile-error revert of the smallest non-bloated
/// dependency, so the search settles on a PST with 3 of 4 specialized.
pub fn replicate_jacop(out_dir: &Path) -> Result<(PathBuf, Repository), CorpusError> {
    let pkg = |g: &str, a: &str, v: &str| PackageId::new(g, a, v).expect("static id");

    let scala_compiler = pkg("org.scala-lang", "scala-compiler", "2.13.0");
    let scala_library = pkg("org.scala-lang", "scala-library", "2.13.0");
    let scala_reflect = pkg("org.scala-lang", "scala-reflect", "2.13.0");
    let scala_xml = pkg("org.scala-lang.modules", "scala-xml", "1.2.0");
    let jline = pkg("jline", "jline", "2.14.6");
    let jansi = pkg("org.fusesource.jansi", "jansi", "1.18");
    let log4j = pkg("log4j", "log4j", "1.2.17");
    let slf4j_api = pkg("org.slf4j", "slf4j-api", "1.7.30");
    let slf4j_log4j12 = pkg("org.slf4j", "slf4j-log4j12", "1.7.30");
    let junit = pkg("junit", "junit", "4.13.2");
    let hamcrest = pkg("org.hamcrest", "hamcrest-core", "1.3");

    let archives = vec![
        // Non-bloated: reachable chains of exact lengths.
        chain_archive(
            scala_compiler.clone(),
            "scala.compiler",
            2984,
            2,
            vec![Dependency::compile(scala_reflect.clone())],
            vec![MemberRef::to_member("scala.reflect.U0000", "m0", MemberKind::Method)],
        ),
        chain_archive(
            scala_library.clone(),
            "scala.library",
            3000,
            1500,
            vec![Dependency::compile(scala_xml.clone())],
            vec![MemberRef::to_class("scala.xml.U0000")],
        ),
        chain_archive(scala_reflect, "scala.reflect", 1800, 578, vec![], vec![]),
        chain_archive(scala_xml.clone(), "scala.xml", 199, 100, vec![], vec![]),
        // Bloated: no incoming references anywhere.
        chain_archive(jline.clone(), "jline", 120, 0, vec![Dependency::compile(jansi.clone())], vec![]),
        chain_archive(jansi, "jansi", 80, 0, vec![], vec![]),
        chain_archive(
            log4j.clone(),
            "log4j",
            150,
            0,
            vec![
                Dependency::compile(slf4j_api.clone()),
                Dependency::compile(slf4j_log4j12.clone()),
            ],
            vec![],
        ),
        chain_archive(slf4j_api, "slf4j.api", 34, 0, vec![], vec![]),
        chain_archive(slf4j_log4j12, "slf4j.log4j12", 120, 0, vec![], vec![]),
        // Test scope.
        chain_archive(junit.clone(), "junit", 90, 0, vec![], vec![]),
        chain_archive(hamcrest.clone(), "hamcrest", 10, 0, vec![], vec![]),
    ];
    let xml_digest = compute_checksum(&archives[3]).checksum;

    let mut src_units: Vec<ClassUnit> =
        (0..833).map(|i| unit_with_member(format!("org.jacop.C{i:03}"))).collect();
    src_units[0]
        .static_refs
        .push(MemberRef::to_member("scala.compiler.U0000", "m0", MemberKind::Method));
    src_units[1].static_refs.push(MemberRef::to_class("scala.library.U0000"));

    let test_units: Vec<ClassUnit> = (0..24)
        .map(|i| {
            let mut unit = unit_with_member(format!("org.jacop.T{i:02}"));
            unit.is_test = true;
            unit.static_refs.push(MemberRef::to_class(format!("org.jacop.C{i:03}")));
            unit.static_refs
                .push(MemberRef::to_member(format!("junit.U{i:04}"), "m0", MemberKind::Method));
            if i == 0 {
                unit.static_refs.push(MemberRef::to_class("hamcrest.U0000"));
            }
            unit
        })
        .collect();

    let mut manifest = ProjectManifest::new(pkg("org.jacop", "jacop", "4.10.0"));
    manifest.dependencies = vec![
        Dependency::compile(scala_compiler),
        Dependency::compile(scala_library),
        Dependency::compile(jline),
        Dependency::compile(log4j),
        Dependency::test(junit),
        Dependency::test(hamcrest),
    ];
    // An integrity check pinned to the original digest: the specialized
    // variant hashes differently, so pinning this dependency breaks the
    // compile check and forces a revert.
    manifest.build_checks.push(BuildCheck::Checksum {
        dep: scala_xml,
        algorithm: CHECKSUM_ALGORITHM.to_string(),
        expected: xml_digest,
    });

    CorpusFiles { manifest, src_units, test_units, archives }.write(out_dir)
}

/// Replica of a small validator library: 64 project units, 4 non-bloated
/// compile dependencies totaling 780 units with 155 reachable, no bloated
/// dependencies, no poisons — a clean TST removing 625 units.
pub fn replicate_commons_validator(out_dir: &Path) -> Result<(PathBuf, Repository), CorpusError> {
    let pkg = |g: &str, a: &str, v: &str| PackageId::new(g, a, v).expect("static id");

    let beanutils = pkg("commons-beanutils", "commons-beanutils", "1.9.4");
    let digester = pkg("commons-digester", "commons-digester", "2.1");
    let logging = pkg("commons-logging", "commons-logging", "1.2");
    let collections = pkg("commons-collections", "commons-collections", "3.2.2");
    let junit = pkg("junit", "junit", "4.13.2");

    let archives = vec![
        chain_archive(beanutils.clone(), "commons.beanutils", 230, 40, vec![], vec![]),
        chain_archive(digester.clone(), "commons.digester", 150, 30, vec![], vec![]),
        chain_archive(logging.clone(), "commons.logging", 30, 10, vec![], vec![]),
        chain_archive(collections.clone(), "commons.collections", 370, 75, vec![], vec![]),
        chain_archive(junit.clone(), "junit", 90, 0, vec![], vec![]),
    ];

    let mut src_units: Vec<ClassUnit> =
        (0..64).map(|i| unit_with_member(format!("org.apache.commons.validator.C{i:02}"))).collect();
    for (i, ns) in
        ["commons.beanutils", "commons.digester", "commons.logging", "commons.collections"]
            .iter()
            .enumerate()
    {
        src_units[i].static_refs.push(MemberRef::to_class(format!("{ns}.U0000")));
    }

    let test_units: Vec<ClassUnit> = (0..8)
        .map(|i| {
            let mut unit = unit_with_member(format!("org.apache.commons.validator.T{i:02}"));
            unit.is_test = true;
            unit.static_refs
                .push(MemberRef::to_class(format!("org.apache.commons.validator.C{i:02}")));
            unit.static_refs
                .push(MemberRef::to_member(format!("junit.U{i:04}"), "m0", MemberKind::Method));
            unit
        })
        .collect();

    let mut manifest =
        ProjectManifest::new(pkg("commons-validator", "commons-validator", "1.7"));
    manifest.dependencies = vec![
        Dependency::compile(beanutils),
        Dependency::compile(digester),
        Dependency::compile(logging),
        Dependency::compile(collections),
        Dependency::test(junit),
    ];

    CorpusFiles { manifest, src_units, test_units, archives }.write(out_dir)
}
