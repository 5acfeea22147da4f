//! Loading a project directory: `project.json` plus the unit files under
//! `src-units/` and `test-units/`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::model::{ClassUnit, ModelError, ProjectManifest};

pub const MANIFEST_FILE: &str = "project.json";
pub const SRC_UNITS_DIR: &str = "src-units";
pub const TEST_UNITS_DIR: &str = "test-units";
/// Output manifest written beside the original, which is never mutated.
pub const SPECIALIZED_MANIFEST_FILE: &str = "project.specialized.json";
/// Machine-readable report file name.
pub const REPORT_FILE: &str = "spectrim-report.json";

#[derive(Debug, Error)]
pub enum ProjectError {
    #[error("missing project manifest `{0}`")]
    MissingManifest(PathBuf),
    #[error("invalid `{path}`: {message}")]
    InvalidFile { path: PathBuf, message: String },
    #[error("duplicate unit name `{0}` across project unit files")]
    DuplicateUnit(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("i/o error on `{path}`: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// A project loaded from disk: manifest plus source and test units.
#[derive(Debug, Clone)]
pub struct LoadedProject {
    pub dir: PathBuf,
    pub manifest: ProjectManifest,
    pub src_units: BTreeMap<String, ClassUnit>,
    pub test_units: BTreeMap<String, ClassUnit>,
}

impl LoadedProject {
    /// Reads and validates a project directory.
    pub fn load(dir: &Path) -> Result<Self, ProjectError> {
        let manifest_path = dir.join(MANIFEST_FILE);
        if !manifest_path.is_file() {
            return Err(ProjectError::MissingManifest(manifest_path));
        }
        let manifest: ProjectManifest = read_json(&manifest_path)?;
        manifest.validate()?;

        let src_units = load_units(&dir.join(SRC_UNITS_DIR), false)?;
        let test_units = load_units(&dir.join(TEST_UNITS_DIR), true)?;
        for name in test_units.keys() {
            if src_units.contains_key(name) {
                return Err(ProjectError::DuplicateUnit(name.clone()));
            }
        }

        Ok(LoadedProject { dir: dir.to_path_buf(), manifest, src_units, test_units })
    }

    /// The same project with a different manifest, for candidate validation.
    pub fn with_manifest(&self, manifest: ProjectManifest) -> LoadedProject {
        LoadedProject {
            dir: self.dir.clone(),
            manifest,
            src_units: self.src_units.clone(),
            test_units: self.test_units.clone(),
        }
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, ProjectError> {
    let bytes = std::fs::read(path)
        .map_err(|e| ProjectError::Io { path: path.to_path_buf(), source: e })?;
    serde_json::from_slice(&bytes).map_err(|e| ProjectError::InvalidFile {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

fn load_units(dir: &Path, mark_test: bool) -> Result<BTreeMap<String, ClassUnit>, ProjectError> {
    let mut units = BTreeMap::new();
    if !dir.is_dir() {
        return Ok(units);
    }
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| ProjectError::Io { path: dir.to_path_buf(), source: e })?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|ext| ext == "json"))
        .collect();
    paths.sort();
    for path in paths {
        let mut unit: ClassUnit = read_json(&path)?;
        unit.validate().map_err(|e| ProjectError::InvalidFile {
            path: path.clone(),
            message: e.to_string(),
        })?;
        if mark_test {
            unit.is_test = true;
        }
        if units.insert(unit.name.clone(), unit.clone()).is_some() {
            return Err(ProjectError::DuplicateUnit(unit.name));
        }
    }
    Ok(units)
}

/// Writes a unit as `<dir>/<name>.json`.
pub fn write_unit(dir: &Path, unit: &ClassUnit) -> Result<PathBuf, ProjectError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| ProjectError::Io { path: dir.to_path_buf(), source: e })?;
    let path = dir.join(format!("{}.json", unit.name));
    let mut body = serde_json::to_vec_pretty(unit).expect("unit serializes");
    body.push(b'\n');
    std::fs::write(&path, body)
        .map_err(|e| ProjectError::Io { path: path.clone(), source: e })?;
    Ok(path)
}

/// Writes a manifest as pretty JSON with stable key order.
pub fn write_manifest(path: &Path, manifest: &ProjectManifest) -> Result<(), ProjectError> {
    let value = serde_json::to_value(manifest).expect("manifest serializes");
    let mut body = serde_json::to_vec_pretty(&value).expect("manifest serializes");
    body.push(b'\n');
    std::fs::write(path, body).map_err(|e| ProjectError::Io { path: path.to_path_buf(), source: e })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::PackageId;
    use tempfile::tempdir;

    #[test]
    fn load_round_trips_units_and_manifest() {
        let dir = tempdir().unwrap();
        let manifest = ProjectManifest::new(PackageId::new("demo", "app", "1.0").unwrap());
        write_manifest(&dir.path().join(MANIFEST_FILE), &manifest).unwrap();
        let mut unit = ClassUnit::new("app.Main");
        unit.members.push(crate::model::Member {
            name: "main".into(),
            kind: crate::model::MemberKind::Method,
        });
        write_unit(&dir.path().join(SRC_UNITS_DIR), &unit).unwrap();
        let mut test_unit = ClassUnit::new("app.MainTest");
        write_unit(&dir.path().join(TEST_UNITS_DIR), &test_unit).unwrap();
        test_unit.is_test = true;

        let project = LoadedProject::load(dir.path()).unwrap();
        assert_eq!(project.manifest, manifest);
        assert_eq!(project.src_units["app.Main"], unit);
        assert_eq!(project.test_units["app.MainTest"], test_unit);
    }

    #[test]
    fn missing_manifest_is_an_error() {
        let dir = tempdir().unwrap();
        assert!(matches!(
            LoadedProject::load(dir.path()),
            Err(ProjectError::MissingManifest(_))
        ));
    }

    #[test]
    fn duplicate_unit_across_src_and_test_is_rejected() {
        let dir = tempdir().unwrap();
        let manifest = ProjectManifest::new(PackageId::new("demo", "app", "1.0").unwrap());
        write_manifest(&dir.path().join(MANIFEST_FILE), &manifest).unwrap();
        let unit = ClassUnit::new("app.Main");
        write_unit(&dir.path().join(SRC_UNITS_DIR), &unit).unwrap();
        write_unit(&dir.path().join(TEST_UNITS_DIR), &unit).unwrap();
        assert!(matches!(
            LoadedProject::load(dir.path()),
            Err(ProjectError::DuplicateUnit(_))
        ));
    }
}
