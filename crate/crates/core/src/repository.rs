//! On-disk archive repository with a Maven-like layout and deterministic
//! canonical serialization.
//!
//! A unit archive (`.uar`) is a ZIP container holding `archive.json`,
//! `units/<name>.json`, and `resources/<path>`. Canonical form: the metadata
//! entry first, units sorted by name, resources sorted by path, all entries
//! stored uncompressed with a fixed timestamp. Checksums are SHA-256 over
//! those canonical bytes, so a digest changes exactly when content changes.

use std::collections::{BTreeMap, HashSet};
use std::io::{Cursor, Read, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};
use std::time::SystemTime;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;
use zip::write::SimpleFileOptions;
use zip::{CompressionMethod, ZipArchive, ZipWriter};

use crate::model::{Archive, ClassUnit, Dependency, PackageId, CHECKSUM_ALGORITHM};

const METADATA_ENTRY: &str = "archive.json";
const UNIT_PREFIX: &str = "units/";
const RESOURCE_PREFIX: &str = "resources/";
const LOCK_FILE: &str = ".spectrim-lock";

#[derive(Debug, Error)]
pub enum RepoError {
    #[error("archive file not found: {0}")]
    FileNotFound(PathBuf),
    #[error("archive not found in repository: {0}")]
    NotFound(PackageId),
    #[error("malformed archive container `{path}`: {message}")]
    MalformedContainer { path: PathBuf, message: String },
    #[error("invalid entry `{entry}` in `{path}`: {message}")]
    InvalidEntry {
        path: PathBuf,
        entry: String,
        message: String,
    },
    #[error("duplicate unit name `{entry}` in `{path}`")]
    DuplicateUnit { path: PathBuf, entry: String },
    #[error("failed to deploy {id}: {source}")]
    Deploy {
        id: PackageId,
        #[source]
        source: std::io::Error,
    },
    #[error("repository is locked by another writer: {0}")]
    Locked(PathBuf),
    #[error("i/o error on `{path}`: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// How a writer behaves when the repository lock is already held.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LockMode {
    /// Wait until the lock is released (bounded by an internal timeout).
    #[default]
    Block,
    /// Return [`RepoError::Locked`] immediately.
    FailFast,
}

/// A record of an archive digest, serialized with the exact field names used
/// by integrity tooling.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChecksumRecord {
    #[serde(rename = "groupId")]
    pub group_id: String,
    #[serde(rename = "artifactId")]
    pub artifact_id: String,
    pub version: String,
    #[serde(rename = "checksumAlgorithm")]
    pub checksum_algorithm: String,
    pub checksum: String,
}

impl ChecksumRecord {
    pub fn id(&self) -> Result<PackageId, crate::model::ModelError> {
        PackageId::new(&self.group_id, &self.artifact_id, &self.version)
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct ArchiveMetadata {
    id: PackageId,
    #[serde(default)]
    dependencies: Vec<Dependency>,
}

#[derive(Default)]
struct ReadCache {
    entries: BTreeMap<PathBuf, CachedArchive>,
}

struct CachedArchive {
    len: u64,
    mtime: Option<SystemTime>,
    archive: Arc<Archive>,
}

/// A local archive repository rooted at a directory.
///
/// Layout: `<root>/<group>/<artifact>/<version>/<artifact>-<version>.uar`.
/// Reads are safe concurrently; writes are serialized through an advisory
/// lock file at the root and never leave partial files behind (write to a
/// temporary file, then atomic rename).
#[derive(Clone)]
pub struct Repository {
    root: PathBuf,
    lock_mode: LockMode,
    cache: Arc<Mutex<ReadCache>>,
}

impl std::fmt::Debug for Repository {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Repository")
            .field("root", &self.root)
            .field("lock_mode", &self.lock_mode)
            .finish()
    }
}

impl Repository {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Repository {
            root: root.into(),
            lock_mode: LockMode::default(),
            cache: Arc::new(Mutex::new(ReadCache::default())),
        }
    }

    pub fn with_lock_mode(mut self, mode: LockMode) -> Self {
        self.lock_mode = mode;
        self
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Layout path for the given coordinates.
    pub fn archive_path(&self, id: &PackageId) -> PathBuf {
        self.root
            .join(&id.group)
            .join(&id.artifact)
            .join(&id.version)
            .join(format!("{}-{}.uar", id.artifact, id.version))
    }

    /// Loads the archive stored at the layout path for `id`.
    pub fn lookup(&self, id: &PackageId) -> Result<Arc<Archive>, RepoError> {
        let path = self.archive_path(id);
        if !path.is_file() {
            return Err(RepoError::NotFound(id.clone()));
        }
        self.load_cached(&path)
    }

    fn load_cached(&self, path: &Path) -> Result<Arc<Archive>, RepoError> {
        let meta = std::fs::metadata(path).map_err(|e| io_err(path, e))?;
        let len = meta.len();
        let mtime = meta.modified().ok();
        {
            let cache = self.cache.lock().unwrap();
            if let Some(entry) = cache.entries.get(path) {
                if entry.len == len && entry.mtime == mtime {
                    return Ok(Arc::clone(&entry.archive));
                }
            }
        }
        let archive = Arc::new(load_archive(path)?);
        let mut cache = self.cache.lock().unwrap();
        cache.entries.insert(
            path.to_path_buf(),
            CachedArchive { len, mtime, archive: Arc::clone(&archive) },
        );
        Ok(archive)
    }

    /// Serializes `archive` in canonical form at the layout path for its id,
    /// overwriting any prior file at the same coordinates.
    pub fn store_archive(&self, archive: &Archive) -> Result<PathBuf, RepoError> {
        let _guard = self.acquire_lock()?;
        let path = self.archive_path(&archive.id);
        let dir = path.parent().expect("layout path has a parent");
        let deploy = |e: std::io::Error| RepoError::Deploy { id: archive.id.clone(), source: e };
        std::fs::create_dir_all(dir).map_err(deploy)?;
        let bytes = canonical_bytes(archive);
        let tmp = dir.join(format!(
            ".{}-{}.uar.tmp{}",
            archive.id.artifact,
            archive.id.version,
            std::process::id()
        ));
        std::fs::write(&tmp, &bytes).map_err(deploy)?;
        std::fs::rename(&tmp, &path).map_err(|e| {
            let _ = std::fs::remove_file(&tmp);
            deploy(e)
        })?;
        self.cache.lock().unwrap().entries.remove(&path);
        Ok(path)
    }

    fn acquire_lock(&self) -> Result<LockGuard, RepoError> {
        std::fs::create_dir_all(&self.root).map_err(|e| io_err(&self.root, e))?;
        let lock_path = self.root.join(LOCK_FILE);
        let deadline = std::time::Instant::now() + std::time::Duration::from_secs(30);
        loop {
            match std::fs::OpenOptions::new()
                .write(true)
                .create_new(true)
                .open(&lock_path)
            {
                Ok(_) => return Ok(LockGuard { path: lock_path }),
                Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
                    match self.lock_mode {
                        LockMode::FailFast => return Err(RepoError::Locked(lock_path)),
                        LockMode::Block => {
                            if std::time::Instant::now() >= deadline {
                                return Err(RepoError::Locked(lock_path));
                            }
                            std::thread::sleep(std::time::Duration::from_millis(5));
                        }
                    }
                }
                Err(e) => return Err(io_err(&lock_path, e)),
            }
        }
    }
}

struct LockGuard {
    path: PathBuf,
}

impl Drop for LockGuard {
    fn drop(&mut self) {
        let _ = std::fs::remove_file(&self.path);
    }
}

fn io_err(path: &Path, source: std::io::Error) -> RepoError {
    RepoError::Io { path: path.to_path_buf(), source }
}

/// Canonical serialized bytes of an archive: the input to storage and to
/// checksum computation.
pub fn canonical_bytes(archive: &Archive) -> Vec<u8> {
    let mut buf = Cursor::new(Vec::new());
    let mut writer = ZipWriter::new(&mut buf);
    let opts = SimpleFileOptions::default()
        .compression_method(CompressionMethod::Stored)
        .last_modified_time(zip::DateTime::default())
        .unix_permissions(0o644);

    let metadata = ArchiveMetadata {
        id: archive.id.clone(),
        dependencies: archive.declared_dependencies.clone(),
    };
    writer.start_file(METADATA_ENTRY, opts).expect("in-memory zip write");
    writer
        .write_all(&serde_json::to_vec(&metadata).expect("metadata serializes"))
        .expect("in-memory zip write");

    // BTreeMap iteration gives the sorted canonical entry order.
    for (name, unit) in &archive.units {
        writer
            .start_file(format!("{UNIT_PREFIX}{name}.json"), opts)
            .expect("in-memory zip write");
        writer
            .write_all(&serde_json::to_vec(unit).expect("unit serializes"))
            .expect("in-memory zip write");
    }
    for (path, bytes) in &archive.resources {
        writer
            .start_file(format!("{RESOURCE_PREFIX}{path}"), opts)
            .expect("in-memory zip write");
        writer.write_all(bytes).expect("in-memory zip write");
    }
    writer.finish().expect("in-memory zip write");
    buf.into_inner()
}

/// Reads an archive from a `.uar` file. The id stored in the metadata entry
/// is authoritative, regardless of the file's location.
pub fn load_archive(path: &Path) -> Result<Archive, RepoError> {
    if !path.is_file() {
        return Err(RepoError::FileNotFound(path.to_path_buf()));
    }
    let bytes = std::fs::read(path).map_err(|e| io_err(path, e))?;
    load_archive_bytes(&bytes, path)
}

/// Finds a duplicated entry name by walking the raw central directory. The
/// zip reader silently collapses duplicate names, which would let one entry
/// shadow another; an ambiguous container is rejected instead.
fn find_duplicate_entry(bytes: &[u8]) -> Option<String> {
    const EOCD: [u8; 4] = [0x50, 0x4b, 0x05, 0x06];
    const CENTRAL: [u8; 4] = [0x50, 0x4b, 0x01, 0x02];
    let u16_at = |pos: usize| -> usize {
        u16::from_le_bytes([bytes[pos], bytes[pos + 1]]) as usize
    };
    let u32_at = |pos: usize| -> usize {
        u32::from_le_bytes([bytes[pos], bytes[pos + 1], bytes[pos + 2], bytes[pos + 3]]) as usize
    };
    let search_from = bytes.len().saturating_sub(65557);
    let eocd = search_from + bytes[search_from..].windows(4).rposition(|w| w == EOCD)?;
    if eocd + 20 > bytes.len() {
        return None;
    }
    let cd_size = u32_at(eocd + 12);
    let cd_offset = u32_at(eocd + 16);
    let end = cd_offset.checked_add(cd_size)?.min(bytes.len());
    let mut pos = cd_offset;
    let mut seen: HashSet<&[u8]> = HashSet::new();
    while pos + 46 <= end {
        if bytes[pos..pos + 4] != CENTRAL {
            break;
        }
        let name_len = u16_at(pos + 28);
        let extra_len = u16_at(pos + 30);
        let comment_len = u16_at(pos + 32);
        let name_end = pos + 46 + name_len;
        if name_end > end {
            break;
        }
        let name = &bytes[pos + 46..name_end];
        if !seen.insert(name) {
            return Some(String::from_utf8_lossy(name).into_owned());
        }
        pos = name_end + extra_len + comment_len;
    }
    None
}

fn load_archive_bytes(bytes: &[u8], path: &Path) -> Result<Archive, RepoError> {
    let malformed = |message: String| RepoError::MalformedContainer {
        path: path.to_path_buf(),
        message,
    };
    let mut zip = ZipArchive::new(Cursor::new(bytes)).map_err(|e| malformed(e.to_string()))?;
    if let Some(entry) = find_duplicate_entry(bytes) {
        if entry.starts_with(UNIT_PREFIX) {
            return Err(RepoError::DuplicateUnit { path: path.to_path_buf(), entry });
        }
        return Err(malformed(format!("duplicate entry `{entry}`")));
    }

    let mut metadata: Option<ArchiveMetadata> = None;
    let mut units: BTreeMap<String, ClassUnit> = BTreeMap::new();
    let mut resources: BTreeMap<String, Vec<u8>> = BTreeMap::new();

    for i in 0..zip.len() {
        let mut entry = zip.by_index(i).map_err(|e| malformed(e.to_string()))?;
        let name = entry.name().to_string();
        let mut data = Vec::new();
        entry
            .read_to_end(&mut data)
            .map_err(|e| malformed(format!("{name}: {e}")))?;
        let invalid = |message: String| RepoError::InvalidEntry {
            path: path.to_path_buf(),
            entry: name.clone(),
            message,
        };
        if name == METADATA_ENTRY {
            metadata = Some(serde_json::from_slice(&data).map_err(|e| invalid(e.to_string()))?);
        } else if let Some(stem) = name.strip_prefix(UNIT_PREFIX) {
            let unit: ClassUnit =
                serde_json::from_slice(&data).map_err(|e| invalid(e.to_string()))?;
            unit.validate()
                .map_err(|e| invalid(e.to_string()))?;
            let expected = format!("{}.json", unit.name);
            if stem != expected {
                return Err(invalid(format!(
                    "entry name does not match unit name `{}`",
                    unit.name
                )));
            }
            if units.insert(unit.name.clone(), unit).is_some() {
                return Err(RepoError::DuplicateUnit { path: path.to_path_buf(), entry: name });
            }
        } else if let Some(res) = name.strip_prefix(RESOURCE_PREFIX) {
            resources.insert(res.to_string(), data);
        } else {
            return Err(invalid("unrecognized entry".to_string()));
        }
    }

    let metadata = metadata.ok_or_else(|| malformed("missing archive.json".to_string()))?;
    Ok(Archive {
        id: metadata.id,
        units,
        resources,
        declared_dependencies: metadata.dependencies,
    })
}

/// SHA-256 over the canonical serialized bytes of the archive.
pub fn compute_checksum(archive: &Archive) -> ChecksumRecord {
    checksum_of_bytes(&archive.id, &canonical_bytes(archive))
}

/// SHA-256 of already-serialized archive bytes.
pub fn checksum_of_bytes(id: &PackageId, bytes: &[u8]) -> ChecksumRecord {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    ChecksumRecord {
        group_id: id.group.clone(),
        artifact_id: id.artifact.clone(),
        version: id.version.clone(),
        checksum_algorithm: CHECKSUM_ALGORITHM.to_string(),
        checksum: hex::encode(hasher.finalize()),
    }
}
