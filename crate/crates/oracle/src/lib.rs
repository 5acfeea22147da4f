//! Independent brute-force reference implementations, used only by tests:
//! breadth-first reachability over raw adjacency lists, and exhaustive
//! partially-specialized-tree search by subset enumeration. Nothing here
//! shares code with the traversal or search logic it checks.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use thiserror::Error;

use spectrim_core::buildcheck::full_build;
use spectrim_core::model::{PackageId, ProjectManifest};
use spectrim_core::project::LoadedProject;
use spectrim_core::repository::Repository;
use spectrim_core::specializer::SpecializedArtifact;
use spectrim_core::treebuilder::build_tst_manifest;

/// Subset enumeration bound for [`exhaustive_pst`].
pub const MAX_ARTIFACTS: usize = 12;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("{0} artifacts exceed the subset enumeration bound of {MAX_ARTIFACTS}")]
    BoundExceeded(usize),
    #[error("candidate build failed: {0}")]
    Build(String),
}

/// A plain directed graph over string nodes.
#[derive(Debug, Clone, Default)]
pub struct OracleGraph {
    pub adjacency: BTreeMap<String, Vec<String>>,
    pub entries: BTreeSet<String>,
}

/// Standard breadth-first closure of the entry set.
pub fn bfs_reachable(graph: &OracleGraph) -> BTreeSet<String> {
    let mut seen: BTreeSet<String> = graph.entries.clone();
    let mut queue: VecDeque<&String> = graph.entries.iter().collect();
    while let Some(node) = queue.pop_front() {
        if let Some(next) = graph.adjacency.get(node) {
            for n in next {
                if seen.insert(n.clone()) {
                    if let Some((key, _)) = graph.adjacency.get_key_value(n) {
                        queue.push_back(key);
                    }
                }
            }
        }
    }
    seen
}

/// The maximum-cardinality pin subset whose build succeeds, found by trying
/// every subset. Ties are broken toward the lexicographically smallest
/// sorted id list.
pub fn exhaustive_pst(
    project: &LoadedProject,
    debloated: &ProjectManifest,
    artifacts: &[SpecializedArtifact],
    repo: &Repository,
) -> Result<Vec<PackageId>, OracleError> {
    if artifacts.len() > MAX_ARTIFACTS {
        return Err(OracleError::BoundExceeded(artifacts.len()));
    }
    let mut sorted: Vec<&SpecializedArtifact> = artifacts.iter().collect();
    sorted.sort_by(|a, b| a.original_id.cmp(&b.original_id));

    let mut best: Option<Vec<PackageId>> = None;
    for mask in 0u32..(1u32 << sorted.len()) {
        let subset: Vec<SpecializedArtifact> = sorted
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, a)| (*a).clone())
            .collect();
        let manifest = build_tst_manifest(debloated, &subset)
            .map_err(|e| OracleError::Build(e.to_string()))?;
        let outcome =
            full_build(project, &manifest, repo).map_err(|e| OracleError::Build(e.to_string()))?;
        if !outcome.is_success() {
            continue;
        }
        let ids: Vec<PackageId> = subset.iter().map(|a| a.original_id.clone()).collect();
        best = match best {
            None => Some(ids),
            Some(current) => {
                if ids.len() > current.len() || (ids.len() == current.len() && ids < current) {
                    Some(ids)
                } else {
                    Some(current)
                }
            }
        };
    }
    Ok(best.unwrap_or_default())
}
