//! Removal of bloated dependencies from the manifest and of unreachable
//! units from non-bloated archives, plus deployment of the trimmed archives
//! under rewritten coordinates.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::callgraph::DependencyClassification;
use crate::model::{Archive, PackageId, ProjectManifest, Scope};
use crate::repository::{compute_checksum, ChecksumRecord, RepoError, Repository};
use crate::resolver::ResolvedTree;

/// Default group prefix for specialized coordinates. The original group is
/// kept as a suffix for traceability: `libx` becomes `deptrim.spl.libx`.
pub const DEFAULT_SPECIALIZED_PREFIX: &str = "deptrim.spl";

#[derive(Debug, Error)]
pub enum SpecializeError {
    #[error("refusing to specialize {0} with an empty reachable set; bloated dependencies are removed, not specialized")]
    EmptyReachableSet(PackageId),
    #[error("reachable unit `{unit}` is not part of archive {id}")]
    UnknownReachableUnit { id: PackageId, unit: String },
    #[error("deployment failed for {}: {}",
        .0.iter().map(|(id, _)| id.to_string()).collect::<Vec<_>>().join(", "),
        .0.iter().map(|(_, e)| e.to_string()).collect::<Vec<_>>().join("; "))]
    Deployment(Vec<(PackageId, RepoError)>),
}

/// A trimmed archive deployed under rewritten coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpecializedArtifact {
    pub original_id: PackageId,
    pub specialized_id: PackageId,
    pub kept_units: usize,
    pub removed_units: usize,
    pub checksum: ChecksumRecord,
}

/// Returns a manifest without the direct compile-scope dependencies whose
/// entire reachable subtree is bloated. The input manifest is never mutated;
/// test-scope entries are untouched.
pub fn debloat_manifest(
    manifest: &ProjectManifest,
    classification: &DependencyClassification,
    tree: &ResolvedTree,
) -> ProjectManifest {
    let mut result = manifest.clone();
    result.dependencies = manifest
        .dependencies
        .iter()
        .filter(|dep| {
            if dep.scope != Scope::Compile {
                return true;
            }
            let node_id = tree.resolve_alias(&dep.id);
            if !classification.bloated.contains(node_id) {
                return true;
            }
            // Keep the entry if anything under it is still needed.
            tree.subtree(node_id)
                .iter()
                .any(|n| !classification.bloated.contains(n))
        })
        .cloned()
        .collect();
    result
}

/// Rewrites the archive's group under `group_prefix` and keeps exactly the
/// units in `reachable`, all resources, and the declared dependencies.
pub fn specialize_dependency(
    archive: &Archive,
    reachable: &BTreeSet<String>,
    group_prefix: &str,
) -> Result<(Archive, SpecializedArtifact), SpecializeError> {
    if reachable.is_empty() {
        return Err(SpecializeError::EmptyReachableSet(archive.id.clone()));
    }
    for unit in reachable {
        if !archive.units.contains_key(unit) {
            return Err(SpecializeError::UnknownReachableUnit {
                id: archive.id.clone(),
                unit: unit.clone(),
            });
        }
    }

    // The rewrite is idempotent: an already-prefixed group is left alone, so
    // re-specializing a specialized archive reproduces it exactly.
    let group = if archive.id.group.starts_with(&format!("{group_prefix}.")) {
        archive.id.group.clone()
    } else {
        format!("{group_prefix}.{}", archive.id.group)
    };
    let specialized_id = PackageId {
        group,
        artifact: archive.id.artifact.clone(),
        version: archive.id.version.clone(),
    };
    let specialized = Archive {
        id: specialized_id.clone(),
        units: archive
            .units
            .iter()
            .filter(|(name, _)| reachable.contains(*name))
            .map(|(name, unit)| (name.clone(), unit.clone()))
            .collect(),
        resources: archive.resources.clone(),
        declared_dependencies: archive.declared_dependencies.clone(),
    };
    let artifact = SpecializedArtifact {
        original_id: archive.id.clone(),
        specialized_id,
        kept_units: reachable.len(),
        removed_units: archive.units.len() - reachable.len(),
        checksum: compute_checksum(&specialized),
    };
    Ok((specialized, artifact))
}

/// Stores every specialized archive at its rewritten coordinates. All
/// archives are attempted even after a failure; failures are aggregated.
pub fn deploy_specialized(
    repo: &Repository,
    artifacts: &[(Archive, SpecializedArtifact)],
) -> Result<Vec<PackageId>, SpecializeError> {
    let mut deployed = Vec::with_capacity(artifacts.len());
    let mut failures = Vec::new();
    for (archive, artifact) in artifacts {
        match repo.store_archive(archive) {
            Ok(_) => deployed.push(artifact.specialized_id.clone()),
            Err(e) => failures.push((artifact.specialized_id.clone(), e)),
        }
    }
    if failures.is_empty() {
        Ok(deployed)
    } else {
        Err(SpecializeError::Deployment(failures))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::callgraph::{build_call_graph, classify_dependencies};
    use crate::model::{ClassUnit, Dependency, Member, MemberKind, MemberRef};
    use crate::resolver::{resolve_tree, Phase};
    use std::collections::BTreeMap;
    use tempfile::tempdir;

    fn pkg(g: &str, a: &str, v: &str) -> PackageId {
        PackageId::new(g, a, v).unwrap()
    }

    fn unit(name: &str) -> ClassUnit {
        let mut u = ClassUnit::new(name);
        u.members.push(Member { name: "m0".into(), kind: MemberKind::Method });
        u
    }

    fn libx() -> Archive {
        let mut a = Archive::new(pkg("libx", "libx", "1.0"));
        a.insert_unit(unit("x.X1"));
        a.insert_unit(unit("x.X2"));
        a.resources.insert("META/info.txt".into(), b"libx".to_vec());
        a.declared_dependencies.push(Dependency::compile(pkg("leaf", "leaf", "1.0")));
        a
    }

    #[test]
    fn specialize_keeps_reachable_units_and_rewrites_group() {
        let archive = libx();
        let reachable = BTreeSet::from(["x.X1".to_string()]);
        let (spl, artifact) = specialize_dependency(&archive, &reachable, "deptrim.spl").unwrap();

        assert_eq!(spl.id, pkg("deptrim.spl.libx", "libx", "1.0"));
        assert_eq!(spl.units.len(), 1);
        assert!(spl.units.contains_key("x.X1"));
        assert_eq!(spl.resources, archive.resources);
        assert_eq!(spl.declared_dependencies, archive.declared_dependencies);
        assert_eq!(artifact.kept_units, 1);
        assert_eq!(artifact.removed_units, 1);
        assert_eq!(artifact.original_id, archive.id);
        assert_eq!(artifact.specialized_id.artifact, archive.id.artifact);
        assert_eq!(artifact.specialized_id.version, archive.id.version);
    }

    #[test]
    fn totally_used_specialization_changes_nothing_but_coordinates() {
        let archive = libx();
        let all: BTreeSet<String> = archive.units.keys().cloned().collect();
        let (spl, artifact) = specialize_dependency(&archive, &all, "deptrim.spl").unwrap();
        assert_eq!(artifact.removed_units, 0);
        assert_eq!(spl.units, archive.units);
    }

    #[test]
    fn empty_reachable_set_is_a_caller_error() {
        let archive = libx();
        let err = specialize_dependency(&archive, &BTreeSet::new(), "deptrim.spl").unwrap_err();
        assert!(matches!(err, SpecializeError::EmptyReachableSet(_)));
    }

    #[test]
    fn reachable_unit_outside_archive_is_rejected() {
        let archive = libx();
        let reachable = BTreeSet::from(["zz.Nope".to_string()]);
        let err = specialize_dependency(&archive, &reachable, "deptrim.spl").unwrap_err();
        assert!(matches!(err, SpecializeError::UnknownReachableUnit { .. }));
    }

    #[test]
    fn specialization_is_idempotent_on_checksums() {
        let archive = libx();
        let reachable = BTreeSet::from(["x.X1".to_string()]);
        let (first, a1) = specialize_dependency(&archive, &reachable, "deptrim.spl").unwrap();
        let (second, a2) = specialize_dependency(&first, &reachable, "deptrim.spl").unwrap();
        assert_eq!(second, first);
        assert_eq!(a2.checksum, a1.checksum);
        assert_eq!(a2.removed_units, 0);
    }

    #[test]
    fn deploy_stores_under_rewritten_coordinates() {
        let dir = tempdir().unwrap();
        let repo = Repository::new(dir.path());
        let archive = libx();
        let reachable = BTreeSet::from(["x.X1".to_string()]);
        let pair = specialize_dependency(&archive, &reachable, "deptrim.spl").unwrap();
        let ids = deploy_specialized(&repo, &[pair]).unwrap();
        assert_eq!(ids, vec![pkg("deptrim.spl.libx", "libx", "1.0")]);
        let expected = dir
            .path()
            .join("deptrim.spl.libx")
            .join("libx")
            .join("1.0")
            .join("libx-1.0.uar");
        assert!(expected.is_file());
        let stored = repo.lookup(&ids[0]).unwrap();
        assert_eq!(stored.units.len(), 1);
    }

    #[test]
    fn deploy_of_empty_list_is_empty() {
        let dir = tempdir().unwrap();
        let repo = Repository::new(dir.path());
        assert!(deploy_specialized(&repo, &[]).unwrap().is_empty());
    }

    #[test]
    fn deploy_failures_are_aggregated_per_artifact() {
        let dir = tempdir().unwrap();
        let blocker = dir.path().join("blocker");
        std::fs::write(&blocker, b"file").unwrap();
        let repo = Repository::new(blocker.join("repo"));
        let archive = libx();
        let reachable = BTreeSet::from(["x.X1".to_string()]);
        let p1 = specialize_dependency(&archive, &reachable, "deptrim.spl").unwrap();
        let p2 = specialize_dependency(&archive, &reachable, "other.spl").unwrap();
        let err = deploy_specialized(&repo, &[p1, p2]).unwrap_err();
        match err {
            SpecializeError::Deployment(failures) => {
                assert_eq!(failures.len(), 2);
                let msg = SpecializeError::Deployment(failures).to_string();
                assert!(msg.contains("deptrim.spl.libx:libx:1.0"), "{msg}");
                assert!(msg.contains("other.spl.libx:libx:1.0"), "{msg}");
            }
            other => panic!("expected aggregated deployment error, got {other}"),
        }
    }

    fn demo_setup(dir: &std::path::Path) -> (ProjectManifest, ResolvedTree, DependencyClassification) {
        let repo = Repository::new(dir);
        repo.store_archive(&{
            let mut a = Archive::new(pkg("libx", "libx", "1.0"));
            a.insert_unit(unit("x.X1"));
            a.insert_unit(unit("x.X2"));
            a
        })
        .unwrap();
        repo.store_archive(&{
            let mut a = Archive::new(pkg("liby", "liby", "1.0"));
            a.insert_unit(unit("y.Y1"));
            a
        })
        .unwrap();
        let mut m = ProjectManifest::new(pkg("demo", "app", "1.0"));
        m.dependencies.push(Dependency::compile(pkg("libx", "libx", "1.0")));
        m.dependencies.push(Dependency::compile(pkg("liby", "liby", "1.0")));
        let tree = resolve_tree(&m, &repo).unwrap();

        let mut main = unit("app.Main");
        main.static_refs.push(MemberRef::to_member("x.X1", "m0", MemberKind::Method));
        let mut project = BTreeMap::new();
        project.insert(main.name.clone(), main);
        let cg =
            build_call_graph(&project, &tree.classpath_archives(Phase::Compile), None).unwrap();
        let classification = classify_dependencies(&cg, &tree, &[]);
        (m, tree, classification)
    }

    #[test]
    fn debloat_drops_fully_bloated_direct_subtrees() {
        let dir = tempdir().unwrap();
        let (manifest, tree, classification) = demo_setup(dir.path());
        let debloated = debloat_manifest(&manifest, &classification, &tree);
        let ids: Vec<&PackageId> = debloated.dependencies.iter().map(|d| &d.id).collect();
        assert_eq!(ids, vec![&pkg("libx", "libx", "1.0")]);
        // Original untouched.
        assert_eq!(manifest.dependencies.len(), 2);
    }

    #[test]
    fn debloat_without_bloated_deps_is_identity() {
        let dir = tempdir().unwrap();
        let (mut manifest, tree, mut classification) = demo_setup(dir.path());
        manifest.dependencies.retain(|d| d.id.artifact == "libx");
        classification.bloated.clear();
        let debloated = debloat_manifest(&manifest, &classification, &tree);
        assert_eq!(debloated, manifest);
    }

    #[test]
    fn debloat_keeps_bloated_direct_with_needed_subtree() {
        // parent (bloated) -> leaf (non-bloated): the conservative rule keeps
        // the direct entry so the needed transitive node is not lost.
        let dir = tempdir().unwrap();
        let repo = Repository::new(dir.path());
        repo.store_archive(&{
            let mut a = Archive::new(pkg("leaf", "leaf", "1.0"));
            a.insert_unit(unit("l.L1"));
            a
        })
        .unwrap();
        repo.store_archive(&{
            let mut a = Archive::new(pkg("parent", "parent", "1.0"));
            a.insert_unit(unit("p.P1"));
            a.declared_dependencies.push(Dependency::compile(pkg("leaf", "leaf", "1.0")));
            a
        })
        .unwrap();
        let mut m = ProjectManifest::new(pkg("demo", "app", "1.0"));
        m.dependencies.push(Dependency::compile(pkg("parent", "parent", "1.0")));
        let tree = resolve_tree(&m, &repo).unwrap();

        let mut main = unit("app.Main");
        main.static_refs.push(MemberRef::to_class("l.L1"));
        let mut project = BTreeMap::new();
        project.insert(main.name.clone(), main);
        let cg =
            build_call_graph(&project, &tree.classpath_archives(Phase::Compile), None).unwrap();
        let classification = classify_dependencies(&cg, &tree, &[]);
        assert!(classification.bloated.contains(&pkg("parent", "parent", "1.0")));

        let debloated = debloat_manifest(&m, &classification, &tree);
        assert_eq!(debloated.dependencies.len(), 1);
    }
}
