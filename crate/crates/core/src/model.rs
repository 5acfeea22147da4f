//! Shared domain types: package coordinates, scopes, class units, archives,
//! and project manifests. All types are immutable values after construction.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("malformed coordinates `{0}`: expected `group:artifact:version` with non-empty parts")]
    MalformedCoordinates(String),
    #[error("duplicate (group, artifact) pair `{0}:{1}` among direct dependencies")]
    DuplicateDirectDependency(String, String),
    #[error("pin maps `{0}` onto itself")]
    SelfPin(PackageId),
    #[error("duplicate member name `{0}` in unit `{1}`")]
    DuplicateMember(String, String),
    #[error("unit map key `{key}` does not match unit name `{name}`")]
    UnitKeyMismatch { key: String, name: String },
    #[error("unit-level reference to `{0}` must not name a member")]
    ClassRefWithMember(String),
}

/// A `group:artifact:version` coordinate triplet.
///
/// All three parts are non-empty and free of the `:` separator. Versions are
/// opaque strings compared for equality.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PackageId {
    pub group: String,
    pub artifact: String,
    pub version: String,
}

impl PackageId {
    pub fn new(
        group: impl Into<String>,
        artifact: impl Into<String>,
        version: impl Into<String>,
    ) -> Result<Self, ModelError> {
        let id = PackageId {
            group: group.into(),
            artifact: artifact.into(),
            version: version.into(),
        };
        for part in [&id.group, &id.artifact, &id.version] {
            if part.is_empty() || part.contains(':') {
                return Err(ModelError::MalformedCoordinates(id.to_string()));
            }
        }
        Ok(id)
    }

    /// Whether this id shares `group` and `artifact` with `other`.
    pub fn same_ga(&self, other: &PackageId) -> bool {
        self.group == other.group && self.artifact == other.artifact
    }
}

/// Parses the canonical `group:artifact:version` form.
pub fn parse_coordinates(text: &str) -> Result<PackageId, ModelError> {
    let mut parts = text.split(':');
    let (g, a, v) = match (parts.next(), parts.next(), parts.next(), parts.next()) {
        (Some(g), Some(a), Some(v), None) => (g, a, v),
        _ => return Err(ModelError::MalformedCoordinates(text.to_string())),
    };
    if g.is_empty() || a.is_empty() || v.is_empty() {
        return Err(ModelError::MalformedCoordinates(text.to_string()));
    }
    Ok(PackageId {
        group: g.to_string(),
        artifact: a.to_string(),
        version: v.to_string(),
    })
}

impl fmt::Display for PackageId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.group, self.artifact, self.version)
    }
}

impl FromStr for PackageId {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_coordinates(s)
    }
}

impl Serialize for PackageId {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PackageId {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        parse_coordinates(&s).map_err(serde::de::Error::custom)
    }
}

/// Dependency scope. Only `compile` and `test` carry pipeline semantics; the
/// remaining four are carried through resolution unchanged and never analyzed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scope {
    #[default]
    Compile,
    Test,
    Runtime,
    Provided,
    System,
    Import,
}

impl Scope {
    pub fn as_str(&self) -> &'static str {
        match self {
            Scope::Compile => "compile",
            Scope::Test => "test",
            Scope::Runtime => "runtime",
            Scope::Provided => "provided",
            Scope::System => "system",
            Scope::Import => "import",
        }
    }
}

impl fmt::Display for Scope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Kind of a class member or member reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MemberKind {
    Method,
    Field,
    Annotation,
    Class,
}

/// A reference to a unit or one of its members. `kind == Class` implies no
/// member name.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MemberRef {
    pub unit: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub member: Option<String>,
    pub kind: MemberKind,
}

impl MemberRef {
    pub fn to_class(unit: impl Into<String>) -> Self {
        MemberRef {
            unit: unit.into(),
            member: None,
            kind: MemberKind::Class,
        }
    }

    pub fn to_member(unit: impl Into<String>, member: impl Into<String>, kind: MemberKind) -> Self {
        MemberRef {
            unit: unit.into(),
            member: Some(member.into()),
            kind,
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.unit.is_empty() {
            return Err(ModelError::MalformedCoordinates(String::new()));
        }
        if self.kind == MemberKind::Class && self.member.is_some() {
            return Err(ModelError::ClassRefWithMember(self.unit.clone()));
        }
        Ok(())
    }
}

impl fmt::Display for MemberRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.member {
            Some(m) => write!(f, "{}#{}", self.unit, m),
            None => f.write_str(&self.unit),
        }
    }
}

/// A declared member of a class unit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Member {
    pub name: String,
    pub kind: MemberKind,
}

/// A compiled class descriptor: declared members plus the three kinds of
/// outgoing references.
///
/// `static_refs` are visible to analysis and to the compile check.
/// `dynamic_literal_refs` model class names found in string constants; they
/// feed the call graph and the test check. `hidden_refs` model runtime-only
/// loads (external configuration, serialization, native code) that no static
/// analysis can see; they only surface in the test check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ClassUnit {
    pub name: String,
    #[serde(default, skip_serializing_if = "is_false")]
    pub is_test: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub members: Vec<Member>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub static_refs: Vec<MemberRef>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub dynamic_literal_refs: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub hidden_refs: Vec<String>,
}

fn is_false(b: &bool) -> bool {
    !*b
}

impl ClassUnit {
    pub fn new(name: impl Into<String>) -> Self {
        ClassUnit {
            name: name.into(),
            is_test: false,
            members: Vec::new(),
            static_refs: Vec::new(),
            dynamic_literal_refs: Vec::new(),
            hidden_refs: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let mut seen = std::collections::HashSet::new();
        for m in &self.members {
            if !seen.insert(m.name.as_str()) {
                return Err(ModelError::DuplicateMember(m.name.clone(), self.name.clone()));
            }
        }
        for r in &self.static_refs {
            r.validate()?;
        }
        Ok(())
    }

    pub fn has_member(&self, name: &str) -> bool {
        self.members.iter().any(|m| m.name == name)
    }
}

/// A declared dependency edge: coordinates plus scope (`compile` if omitted
/// from the serialized form).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dependency {
    pub id: PackageId,
    #[serde(default)]
    pub scope: Scope,
}

impl Dependency {
    pub fn compile(id: PackageId) -> Self {
        Dependency { id, scope: Scope::Compile }
    }

    pub fn test(id: PackageId) -> Self {
        Dependency { id, scope: Scope::Test }
    }
}

/// A deployable package: a set of class units plus opaque resources and the
/// dependencies it declares for transitive resolution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Archive {
    pub id: PackageId,
    /// Keyed by unit name; each key equals the unit's own `name` field.
    pub units: BTreeMap<String, ClassUnit>,
    /// Relative path -> raw bytes.
    pub resources: BTreeMap<String, Vec<u8>>,
    pub declared_dependencies: Vec<Dependency>,
}

impl Archive {
    pub fn new(id: PackageId) -> Self {
        Archive {
            id,
            units: BTreeMap::new(),
            resources: BTreeMap::new(),
            declared_dependencies: Vec::new(),
        }
    }

    pub fn insert_unit(&mut self, unit: ClassUnit) {
        self.units.insert(unit.name.clone(), unit);
    }

    pub fn unit_count(&self) -> usize {
        self.units.len()
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        for (key, unit) in &self.units {
            if key != &unit.name {
                return Err(ModelError::UnitKeyMismatch {
                    key: key.clone(),
                    name: unit.name.clone(),
                });
            }
            unit.validate()?;
        }
        Ok(())
    }
}

/// A coordinate substitution applied during resolution, so transitive
/// occurrences of `from` resolve to `to` everywhere in the tree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pin {
    pub from: PackageId,
    pub to: PackageId,
}

/// A validation constraint evaluated by the compile check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum BuildCheck {
    /// Recompute the named dependency's archive checksum and compare.
    #[serde(rename_all = "camelCase")]
    Checksum {
        dep: PackageId,
        algorithm: String,
        expected: String,
    },
    /// Demand that a unit exist on the compile classpath.
    #[serde(rename_all = "camelCase")]
    RequireUnit { unit: String },
}

/// The checksum algorithm supported in this version.
pub const CHECKSUM_ALGORITHM: &str = "SHA-256";

/// The project build file: direct dependencies, optional entry points,
/// build checks, ignored dependencies, and coordinate pins.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ProjectManifest {
    pub id: PackageId,
    #[serde(default)]
    pub dependencies: Vec<Dependency>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entry_points: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub build_checks: Vec<BuildCheck>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub ignore_dependencies: Vec<PackageId>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub pins: Vec<Pin>,
}

impl ProjectManifest {
    pub fn new(id: PackageId) -> Self {
        ProjectManifest {
            id,
            dependencies: Vec::new(),
            entry_points: None,
            build_checks: Vec::new(),
            ignore_dependencies: Vec::new(),
            pins: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let mut seen = std::collections::HashSet::new();
        for dep in &self.dependencies {
            if !seen.insert((dep.id.group.as_str(), dep.id.artifact.as_str())) {
                return Err(ModelError::DuplicateDirectDependency(
                    dep.id.group.clone(),
                    dep.id.artifact.clone(),
                ));
            }
        }
        for pin in &self.pins {
            if pin.from == pin.to {
                return Err(ModelError::SelfPin(pin.from.clone()));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parse_canonical_triplet() {
        let id = parse_coordinates("org.scala-lang:scala-compiler:2.13.0").unwrap();
        assert_eq!(id.group, "org.scala-lang");
        assert_eq!(id.artifact, "scala-compiler");
        assert_eq!(id.version, "2.13.0");
    }

    #[test]
    fn parse_self_grouped_artifact() {
        let id = parse_coordinates("commons-io:commons-io:2.11.0").unwrap();
        assert_eq!(id.group, "commons-io");
        assert_eq!(id.artifact, "commons-io");
        assert_eq!(id.version, "2.11.0");
    }

    #[test]
    fn parse_rejects_wrong_part_count() {
        assert!(matches!(
            parse_coordinates("g:a"),
            Err(ModelError::MalformedCoordinates(t)) if t == "g:a"
        ));
        assert!(parse_coordinates("g:a:v:extra").is_err());
    }

    #[test]
    fn parse_rejects_empty_part() {
        assert!(parse_coordinates("g::v").is_err());
        assert!(parse_coordinates(":a:v").is_err());
        assert!(parse_coordinates("g:a:").is_err());
    }

    #[test]
    fn new_rejects_colon_in_part() {
        assert!(PackageId::new("g:h", "a", "v").is_err());
    }

    #[test]
    fn scope_defaults_to_compile_when_absent() {
        let dep: Dependency = serde_json::from_str(r#"{"id":"g:a:1.0"}"#).unwrap();
        assert_eq!(dep.scope, Scope::Compile);
    }

    #[test]
    fn build_check_json_shape() {
        let check: BuildCheck = serde_json::from_str(
            r#"{"kind":"checksum","dep":"commons-io:commons-io:2.11.0","algorithm":"SHA-256","expected":"00"}"#,
        )
        .unwrap();
        assert!(matches!(check, BuildCheck::Checksum { .. }));
        let check: BuildCheck =
            serde_json::from_str(r#"{"kind":"requireUnit","unit":"x.X2"}"#).unwrap();
        assert!(matches!(check, BuildCheck::RequireUnit { unit } if unit == "x.X2"));
    }

    #[test]
    fn manifest_rejects_duplicate_ga() {
        let mut m = ProjectManifest::new(PackageId::new("g", "p", "1").unwrap());
        m.dependencies.push(Dependency::compile(PackageId::new("x", "a", "1.0").unwrap()));
        m.dependencies.push(Dependency::test(PackageId::new("x", "a", "2.0").unwrap()));
        assert!(matches!(m.validate(), Err(ModelError::DuplicateDirectDependency(..))));
    }

    #[test]
    fn manifest_rejects_self_pin() {
        let mut m = ProjectManifest::new(PackageId::new("g", "p", "1").unwrap());
        let id = PackageId::new("x", "a", "1.0").unwrap();
        m.pins.push(Pin { from: id.clone(), to: id });
        assert!(matches!(m.validate(), Err(ModelError::SelfPin(_))));
    }

    #[test]
    fn unit_rejects_duplicate_member() {
        let mut u = ClassUnit::new("x.X1");
        u.members.push(Member { name: "m".into(), kind: MemberKind::Method });
        u.members.push(Member { name: "m".into(), kind: MemberKind::Field });
        assert!(matches!(u.validate(), Err(ModelError::DuplicateMember(..))));
    }

    #[test]
    fn class_ref_must_not_name_member() {
        let r = MemberRef {
            unit: "x.X1".into(),
            member: Some("m".into()),
            kind: MemberKind::Class,
        };
        assert!(r.validate().is_err());
    }

    #[test]
    fn unit_json_uses_camel_case_keys() {
        let mut u = ClassUnit::new("x.X1");
        u.is_test = true;
        u.static_refs.push(MemberRef::to_class("x.X2"));
        u.dynamic_literal_refs.push("x.X3".into());
        u.hidden_refs.push("x.X4".into());
        let json = serde_json::to_string(&u).unwrap();
        assert!(json.contains("\"isTest\""));
        assert!(json.contains("\"staticRefs\""));
        assert!(json.contains("\"dynamicLiteralRefs\""));
        assert!(json.contains("\"hiddenRefs\""));
    }

    fn coordinate_part() -> impl Strategy<Value = String> {
        "[a-z][a-z0-9.-]{0,12}".prop_filter("no colon", |s| !s.contains(':'))
    }

    proptest! {
        #[test]
        fn parse_render_round_trip(g in coordinate_part(), a in coordinate_part(), v in coordinate_part()) {
            let text = format!("{g}:{a}:{v}");
            let id = parse_coordinates(&text).unwrap();
            prop_assert_eq!(id.to_string(), text);
        }
    }
}
