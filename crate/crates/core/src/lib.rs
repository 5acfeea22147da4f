//! Specializes the third-party dependency tree of a project: builds a static
//! reachability graph over class units, removes bloated dependencies, strips
//! unreachable units from the rest, deploys the trimmed archives to a local
//! repository, and validates the result with compile and test checks.
//!
//! The crate is organized along the pipeline:
//!
//! - [`model`]: coordinates, scopes, class units, archives, manifests
//! - [`repository`]: on-disk `.uar` archive storage and checksums
//! - [`resolver`]: mediated dependency tree and per-phase classpaths
//! - [`callgraph`]: member-level reachability and dependency classification
//! - [`specializer`]: manifest debloating and archive trimming
//! - [`buildcheck`]: compile/test validation of a candidate tree
//! - [`treebuilder`]: the TST/PST search and end-to-end pipeline
//! - [`report`]: ratio metrics, outcome taxonomy, report serialization
//! - [`corpus`]: synthetic project generation with embedded ground truth

pub mod buildcheck;
pub mod callgraph;
pub mod corpus;
pub mod model;
pub mod project;
pub mod report;
pub mod repository;
pub mod resolver;
pub mod specializer;
pub mod treebuilder;

pub use buildcheck::{BuildOutcome, BuildStatus, Diagnostic, DiagnosticKind};
pub use callgraph::{CallGraph, DependencyClassification, UnitOwner};
pub use model::{
    Archive, BuildCheck, ClassUnit, Dependency, Member, MemberKind, MemberRef, PackageId, Pin,
    ProjectManifest, Scope,
};
pub use project::LoadedProject;
pub use report::{DependencyStatus, RatioSet, SpecializationReport};
pub use repository::{ChecksumRecord, Repository};
pub use resolver::{ResolvedNode, ResolvedTree};
pub use specializer::SpecializedArtifact;
pub use treebuilder::{PipelineOptions, SpecializedTreeResult, TreeKind};
