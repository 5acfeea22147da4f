//! Mediated dependency tree construction and per-phase classpaths.
//!
//! Resolution expands declared dependencies breadth-first from the manifest,
//! applies pins by exact-coordinate substitution before every lookup, and
//! mediates version conflicts nearest-wins: the occurrence with minimal depth
//! is retained, ties broken by the declaration order of the nearer ancestor.
//! The scope of a transitive node is the scope of its nearest direct
//! ancestor; test-scope entries declared by dependencies are not expanded.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::sync::Arc;

use thiserror::Error;

use crate::model::{Archive, PackageId, ProjectManifest, Scope};
use crate::repository::{RepoError, Repository};

#[derive(Debug, Error)]
pub enum ResolveError {
    #[error("missing archive {id} (path from root: {})", render_path(.path))]
    MissingArchive { id: PackageId, path: Vec<PackageId> },
    #[error("dependency cycle: {}", render_path(.cycle))]
    Cycle { cycle: Vec<PackageId> },
    #[error(transparent)]
    Repo(#[from] RepoError),
}

fn render_path(path: &[PackageId]) -> String {
    path.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(" -> ")
}

/// A resolved dependency node: its archive, BFS depth, and effective scope.
#[derive(Debug, Clone)]
pub struct ResolvedNode {
    pub archive: Arc<Archive>,
    pub depth: usize,
    pub scope: Scope,
}

/// The mediated dependency DAG rooted at the project.
#[derive(Debug, Clone)]
pub struct ResolvedTree {
    pub root: PackageId,
    pub nodes: BTreeMap<PackageId, ResolvedNode>,
    /// Parent -> child edges; parents include the root id.
    pub edges: Vec<(PackageId, PackageId)>,
    /// Original coordinates -> substituted coordinates, for every pin that
    /// was applied during resolution.
    pub aliases: BTreeMap<PackageId, PackageId>,
}

/// Build phase for classpath derivation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Compile,
    Test,
}

impl ResolvedTree {
    /// Resolves `id` through the pin aliases to the node id actually present
    /// in the tree, when any.
    pub fn resolve_alias<'a>(&'a self, id: &'a PackageId) -> &'a PackageId {
        self.aliases.get(id).unwrap_or(id)
    }

    /// Children of `id` via the edge relation.
    pub fn children<'a>(&'a self, id: &'a PackageId) -> impl Iterator<Item = &'a PackageId> + 'a {
        self.edges.iter().filter(move |(p, _)| p == id).map(|(_, c)| c)
    }

    /// All node ids in the subtree reachable from `id`, including `id`.
    pub fn subtree(&self, id: &PackageId) -> Vec<PackageId> {
        let mut seen = vec![id.clone()];
        let mut queue = VecDeque::from([id.clone()]);
        while let Some(next) = queue.pop_front() {
            for child in self.children(&next) {
                if !seen.contains(child) {
                    seen.push(child.clone());
                    queue.push_back(child.clone());
                }
            }
        }
        seen
    }

    /// Ordered classpath for a build phase: compile-scope nodes in
    /// deterministic BFS order (depth, then coordinates), with test-scope
    /// nodes appended for the test phase.
    pub fn classpath(&self, phase: Phase) -> Vec<PackageId> {
        let select = |want: Scope| {
            let mut ids: Vec<&PackageId> = self
                .nodes
                .iter()
                .filter(|(_, n)| n.scope == want)
                .map(|(id, _)| id)
                .collect();
            ids.sort_by_key(|id| (self.nodes[*id].depth, (*id).clone()));
            ids.into_iter().cloned().collect::<Vec<_>>()
        };
        let mut path = select(Scope::Compile);
        if phase == Phase::Test {
            path.extend(select(Scope::Test));
        }
        path
    }

    /// Archives along the classpath for a phase, in classpath order.
    pub fn classpath_archives(&self, phase: Phase) -> Vec<Arc<Archive>> {
        self.classpath(phase)
            .iter()
            .map(|id| Arc::clone(&self.nodes[id].archive))
            .collect()
    }
}

/// Resolves the mediated dependency tree for a manifest against a repository.
pub fn resolve_tree(
    manifest: &ProjectManifest,
    repo: &Repository,
) -> Result<ResolvedTree, ResolveError> {
    let pin_map: HashMap<&PackageId, &PackageId> =
        manifest.pins.iter().map(|p| (&p.from, &p.to)).collect();

    let mut tree = ResolvedTree {
        root: manifest.id.clone(),
        nodes: BTreeMap::new(),
        edges: Vec::new(),
        aliases: BTreeMap::new(),
    };
    // Mediation table: (group, artifact) -> winning node id.
    let mut by_ga: HashMap<(String, String), PackageId> = HashMap::new();

    struct Pending {
        parent: PackageId,
        declared: PackageId,
        scope: Scope,
        depth: usize,
        // Node ids from the root down to (excluding) this entry.
        path: Vec<PackageId>,
    }

    let mut queue: VecDeque<Pending> = manifest
        .dependencies
        .iter()
        .map(|d| Pending {
            parent: manifest.id.clone(),
            declared: d.id.clone(),
            scope: d.scope,
            depth: 1,
            path: vec![manifest.id.clone()],
        })
        .collect();

    while let Some(entry) = queue.pop_front() {
        let effective = match pin_map.get(&entry.declared) {
            Some(pinned) => {
                tree.aliases.insert(entry.declared.clone(), (*pinned).clone());
                (*pinned).clone()
            }
            None => entry.declared.clone(),
        };

        if entry.path.contains(&effective) {
            let mut cycle = entry.path.clone();
            cycle.push(effective);
            return Err(ResolveError::Cycle { cycle });
        }

        let ga = (effective.group.clone(), effective.artifact.clone());
        if let Some(winner) = by_ga.get(&ga) {
            // Mediated: point the edge at the retained version, don't expand.
            // A winner that is an ancestor of this entry is a conflict-loser
            // arc that would close a cycle; drop it to keep the DAG acyclic.
            if !entry.path.contains(winner) {
                tree.edges.push((entry.parent.clone(), winner.clone()));
            }
            continue;
        }

        let archive = match repo.lookup(&effective) {
            Ok(a) => a,
            Err(RepoError::NotFound(id)) => {
                let mut path = entry.path.clone();
                path.push(id.clone());
                return Err(ResolveError::MissingArchive { id, path });
            }
            Err(e) => return Err(e.into()),
        };

        by_ga.insert(ga, effective.clone());
        tree.edges.push((entry.parent.clone(), effective.clone()));
        tree.nodes.insert(
            effective.clone(),
            ResolvedNode { archive: Arc::clone(&archive), depth: entry.depth, scope: entry.scope },
        );

        let mut child_path = entry.path.clone();
        child_path.push(effective.clone());
        for declared in &archive.declared_dependencies {
            // Test-scope subtrees of dependencies are not expanded.
            if declared.scope == Scope::Test {
                continue;
            }
            queue.push_back(Pending {
                parent: effective.clone(),
                declared: declared.id.clone(),
                scope: entry.scope,
                depth: entry.depth + 1,
                path: child_path.clone(),
            });
        }
    }

    Ok(tree)
}
