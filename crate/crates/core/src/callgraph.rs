//! Member-level static reachability over class units.
//!
//! The graph contains one node per declared (or referenced) member and one
//! class-level node per unit. Every member links to its own unit's class
//! node, and a unit's outgoing references originate from that class node, so
//! reaching any member of a unit makes the whole unit — and everything it
//! references — reachable. A unit is retained when at least one of its
//! members (or its class node) is reachable from the entry set.
//!
//! Static references and exact-match dynamic literals produce edges; hidden
//! references never do.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use thiserror::Error;

use crate::model::{Archive, ClassUnit, MemberRef, PackageId};
use crate::resolver::{Phase, ResolvedTree};

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("entry point `{0}` does not name a project unit")]
    EntryPointNotProjectUnit(String),
    #[error("dependency {0} is not part of the call graph")]
    NotInGraph(PackageId),
}

/// Who a unit belongs to.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum UnitOwner {
    Project,
    Dependency(PackageId),
}

/// A reference from one unit that named a unit absent from the analyzed
/// classpath. Recorded as a diagnostic, never an error: the original tree may
/// legitimately contain unused broken references.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct UnresolvedRef {
    pub source_unit: String,
    pub target_unit: String,
}

/// The member-level reachability graph rooted at project entry points.
#[derive(Debug, Clone)]
pub struct CallGraph {
    node_ids: HashMap<MemberRef, usize>,
    nodes: Vec<MemberRef>,
    adjacency: Vec<Vec<usize>>,
    entry_set: Vec<usize>,
    /// Class-level node per unit name.
    unit_nodes: HashMap<String, usize>,
    unit_owner: BTreeMap<String, UnitOwner>,
    unresolved: Vec<UnresolvedRef>,
}

impl CallGraph {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn member_node_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.member.is_some()).count()
    }

    pub fn nodes(&self) -> impl Iterator<Item = &MemberRef> {
        self.nodes.iter()
    }

    pub fn edges(&self) -> impl Iterator<Item = (&MemberRef, &MemberRef)> {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(move |(from, tos)| tos.iter().map(move |to| (&self.nodes[from], &self.nodes[*to])))
    }

    pub fn entry_set(&self) -> impl Iterator<Item = &MemberRef> {
        self.entry_set.iter().map(|i| &self.nodes[*i])
    }

    pub fn unit_owner(&self) -> &BTreeMap<String, UnitOwner> {
        &self.unit_owner
    }

    pub fn unresolved(&self) -> &[UnresolvedRef] {
        &self.unresolved
    }

    /// Breadth-first closure of the entry set, as a per-node flag vector.
    pub fn reachable_nodes(&self) -> Vec<bool> {
        let mut seen = vec![false; self.nodes.len()];
        let mut queue: VecDeque<usize> = VecDeque::new();
        for &entry in &self.entry_set {
            if !seen[entry] {
                seen[entry] = true;
                queue.push_back(entry);
            }
        }
        while let Some(node) = queue.pop_front() {
            for &next in &self.adjacency[node] {
                if !seen[next] {
                    seen[next] = true;
                    queue.push_back(next);
                }
            }
        }
        seen
    }

    /// The units of `dep` with at least one member (or the unit node itself)
    /// reachable from the entry set.
    pub fn reachable_units(&self, dep: &PackageId) -> Result<BTreeSet<String>, GraphError> {
        if !self
            .unit_owner
            .values()
            .any(|o| matches!(o, UnitOwner::Dependency(d) if d == dep))
        {
            return Err(GraphError::NotInGraph(dep.clone()));
        }
        let reachable = self.reachable_nodes();
        Ok(self.reachable_units_with(&reachable, dep))
    }

    fn reachable_units_with(&self, reachable: &[bool], dep: &PackageId) -> BTreeSet<String> {
        self.unit_owner
            .iter()
            .filter(|(_, owner)| matches!(owner, UnitOwner::Dependency(d) if d == dep))
            .filter(|(unit, _)| {
                // Members link to their unit's class node, so unit-node
                // reachability subsumes member reachability.
                self.unit_nodes
                    .get(*unit)
                    .is_some_and(|&node| reachable[node])
            })
            .map(|(unit, _)| unit.clone())
            .collect()
    }
}

/// Builds the call graph from project source units, the compile classpath,
/// and optional entry-point unit names (defaulting to every member of every
/// project source unit).
pub fn build_call_graph(
    project_units: &BTreeMap<String, ClassUnit>,
    classpath_archives: &[std::sync::Arc<Archive>],
    entry_points: Option<&[String]>,
) -> Result<CallGraph, GraphError> {
    let mut graph = CallGraph {
        node_ids: HashMap::new(),
        nodes: Vec::new(),
        adjacency: Vec::new(),
        entry_set: Vec::new(),
        unit_nodes: HashMap::new(),
        unit_owner: BTreeMap::new(),
        unresolved: Vec::new(),
    };

    // Index every unit with an owner; first owner wins on classpath shadowing.
    let mut unit_index: HashMap<&str, &ClassUnit> = HashMap::new();
    let mut active_units: Vec<&ClassUnit> = Vec::new();
    for (name, unit) in project_units {
        unit_index.insert(name.as_str(), unit);
        active_units.push(unit);
        graph.unit_owner.insert(name.clone(), UnitOwner::Project);
    }
    for archive in classpath_archives {
        for (name, unit) in &archive.units {
            if !unit_index.contains_key(name.as_str()) {
                unit_index.insert(name.as_str(), unit);
                active_units.push(unit);
                graph
                    .unit_owner
                    .insert(name.clone(), UnitOwner::Dependency(archive.id.clone()));
            }
        }
    }

    fn intern(graph: &mut CallGraph, node: MemberRef) -> usize {
        if let Some(&id) = graph.node_ids.get(&node) {
            return id;
        }
        let id = graph.nodes.len();
        graph.node_ids.insert(node.clone(), id);
        graph.nodes.push(node);
        graph.adjacency.push(Vec::new());
        id
    }

    fn class_node(graph: &mut CallGraph, unit: &str) -> usize {
        if let Some(&id) = graph.unit_nodes.get(unit) {
            return id;
        }
        let id = intern(graph, MemberRef::to_class(unit));
        graph.unit_nodes.insert(unit.to_string(), id);
        id
    }

    // Nodes and intra-unit edges first: member -> own class node.
    for unit in &active_units {
        let class = class_node(&mut graph, &unit.name);
        for member in &unit.members {
            let node = intern(
                &mut graph,
                MemberRef::to_member(&unit.name, &member.name, member.kind),
            );
            graph.adjacency[node].push(class);
        }
    }

    // Outgoing references from each unit's class node.
    for unit in &active_units {
        let class = class_node(&mut graph, &unit.name);
        for r in &unit.static_refs {
            if !unit_index.contains_key(r.unit.as_str()) {
                graph.unresolved.push(UnresolvedRef {
                    source_unit: unit.name.clone(),
                    target_unit: r.unit.clone(),
                });
                continue;
            }
            let target = match &r.member {
                Some(member) => {
                    let target_class = class_node(&mut graph, &r.unit);
                    let node = intern(&mut graph, MemberRef::to_member(&r.unit, member, r.kind));
                    if !graph.adjacency[node].contains(&target_class) {
                        graph.adjacency[node].push(target_class);
                    }
                    node
                }
                None => class_node(&mut graph, &r.unit),
            };
            graph.adjacency[class].push(target);
        }
        // A literal creates a class-level edge only on an exact unit-name
        // match; other strings are ignored silently.
        for literal in &unit.dynamic_literal_refs {
            if unit_index.contains_key(literal.as_str()) {
                let target = class_node(&mut graph, literal);
                graph.adjacency[class].push(target);
            }
        }
        // hidden_refs are invisible to static analysis by definition.
    }

    // Entry set: all members of the selected project units.
    let entry_units: Vec<&ClassUnit> = match entry_points {
        None => project_units.values().collect(),
        Some(names) => {
            let mut units = Vec::with_capacity(names.len());
            for name in names {
                match project_units.get(name) {
                    Some(unit) => units.push(unit),
                    None => return Err(GraphError::EntryPointNotProjectUnit(name.clone())),
                }
            }
            units
        }
    };
    for unit in entry_units {
        for member in &unit.members {
            let node = intern(
                &mut graph,
                MemberRef::to_member(&unit.name, &member.name, member.kind),
            );
            graph.entry_set.push(node);
        }
    }

    graph.unresolved.sort();
    graph.unresolved.dedup();
    Ok(graph)
}

/// Bloated / non-bloated / totally-used classification of the compile-scope
/// dependencies of a tree, with per-dependency reachable unit sets.
#[derive(Debug, Clone)]
pub struct DependencyClassification {
    pub bloated: BTreeSet<PackageId>,
    pub non_bloated: BTreeSet<PackageId>,
    pub totally_used: BTreeSet<PackageId>,
    /// Dependencies forced into `totally_used` by the ignore list; a subset
    /// of `totally_used`, kept separate for reporting.
    pub ignored: BTreeSet<PackageId>,
    pub reachable_units: BTreeMap<PackageId, BTreeSet<String>>,
}

impl DependencyClassification {
    /// Dependencies that are candidates for unit removal: non-bloated and not
    /// totally used.
    pub fn specializable(&self) -> impl Iterator<Item = &PackageId> {
        self.non_bloated.iter().filter(|d| !self.totally_used.contains(*d))
    }
}

/// Classifies every compile-scope dependency of `tree` against the graph.
///
/// A dependency with no reachable unit is bloated; with every unit reachable,
/// totally used; otherwise plain non-bloated. A dependency with zero units
/// (resources only) is bloated. Dependencies on the ignore list are forced
/// into `totally_used` so they are never trimmed.
pub fn classify_dependencies(
    cg: &CallGraph,
    tree: &ResolvedTree,
    ignore: &[PackageId],
) -> DependencyClassification {
    let mut classification = DependencyClassification {
        bloated: BTreeSet::new(),
        non_bloated: BTreeSet::new(),
        totally_used: BTreeSet::new(),
        ignored: BTreeSet::new(),
        reachable_units: BTreeMap::new(),
    };
    let reachable = cg.reachable_nodes();

    for id in tree.classpath(Phase::Compile) {
        let node = &tree.nodes[&id];
        let all_units: BTreeSet<String> = node.archive.units.keys().cloned().collect();
        // Ignore-list entries may be written against original coordinates
        // even when the tree resolved a pinned substitute.
        let is_ignored = ignore
            .iter()
            .any(|ig| ig == &id || tree.resolve_alias(ig) == &id);
        if is_ignored {
            classification.ignored.insert(id.clone());
            classification.totally_used.insert(id.clone());
            classification.non_bloated.insert(id.clone());
            classification.reachable_units.insert(id, all_units);
            continue;
        }
        if all_units.is_empty() {
            classification.bloated.insert(id.clone());
            classification.reachable_units.insert(id, BTreeSet::new());
            continue;
        }
        let reached = cg.reachable_units_with(&reachable, &id);
        if reached.is_empty() {
            classification.bloated.insert(id.clone());
        } else {
            classification.non_bloated.insert(id.clone());
            if reached.len() == all_units.len() {
                classification.totally_used.insert(id.clone());
            }
        }
        classification.reachable_units.insert(id, reached);
    }
    classification
}
