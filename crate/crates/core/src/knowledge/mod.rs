//! Per-package knowledge: candidate versions compatible with the target
//! interpreter, per-version dependency metadata, and per-version code
//! inventories (modules, APIs, name-simplification maps) extracted from
//! source archives. Everything is cached on disk under a configurable
//! knowledge directory and reused across runs.

mod archive;
mod index;
mod inventory;

pub use index::{HttpIndex, IndexError, PackageIndex, ProjectInfo, ReleaseEntry, ReleaseInfo};
pub use inventory::{build_api_inventory, build_module_inventory, InventoryBuild};

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::versioning::{satisfies, PackageName, Specifier, Version};

#[derive(Debug, Error)]
pub enum KnowledgeError {
    #[error("index unavailable for {0} (offline and no cache)")]
    IndexUnavailable(String),
    #[error("unknown package: {0}")]
    UnknownPackage(String),
    #[error("metadata missing for {0}=={1}")]
    MetadataMissing(String, String),
    #[error("source unavailable for {0}=={1}")]
    SourceUnavailable(String, String),
    #[error("io error at {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("index error: {0}")]
    Index(#[from] IndexError),
}

fn io_err(path: &Path, source: io::Error) -> KnowledgeError {
    KnowledgeError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Ascending candidate versions per package, all admitted by the
/// configured interpreter version.
#[derive(Debug, Clone, Default)]
pub struct CandidateIndex {
    pub python_version: String,
    pub lists: BTreeMap<PackageName, Vec<Version>>,
}

impl CandidateIndex {
    pub fn get(&self, pkg: &PackageName) -> Option<&[Version]> {
        self.lists.get(pkg).map(|v| v.as_slice())
    }
}

/// One dependency edge: the required package and its version constraint.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DependencyEdge {
    pub name: PackageName,
    pub specifier: Specifier,
}

/// Dependency lists per (package, version).
#[derive(Debug, Clone, Default)]
pub struct DependencyMetadata {
    pub edges: BTreeMap<PackageName, BTreeMap<Version, Vec<DependencyEdge>>>,
}

impl DependencyMetadata {
    pub fn get(&self, pkg: &PackageName, version: &Version) -> Option<&[DependencyEdge]> {
        self.edges
            .get(pkg)
            .and_then(|m| m.get(version))
            .map(|v| v.as_slice())
    }

    pub fn insert(&mut self, pkg: PackageName, version: Version, deps: Vec<DependencyEdge>) {
        self.edges.entry(pkg).or_default().insert(version, deps);
    }
}

/// All importable module paths of one package version.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModuleInventory {
    pub package: PackageName,
    pub version: Version,
    pub modules: std::collections::BTreeSet<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ParamKind {
    Positional,
    KeywordOnly,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Param {
    pub name: String,
    pub kind: ParamKind,
    pub has_default: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub annotation: Option<String>,
}

/// One callable signature: definition line, ordered parameters, and
/// whether variadic catch-alls are present.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApiSignature {
    pub lineno: usize,
    #[serde(rename = "parameter")]
    pub params: Vec<Param>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub vararg: bool,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub kwarg: bool,
}

/// Every function, class, and module-level assignment of one package
/// version, keyed by fully qualified name. Overloads (typically from
/// stub files) are stored as a signature list under one name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApiInventory {
    pub package: PackageName,
    pub version: Version,
    pub apis: BTreeMap<String, Vec<ApiSignature>>,
}

impl ApiInventory {
    pub fn contains(&self, fqn: &str) -> bool {
        self.apis.contains_key(fqn)
    }
}

/// Shortened call name → fully qualified name, built from re-export
/// import statements.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimplificationMap {
    pub package: PackageName,
    pub version: Version,
    pub map: BTreeMap<String, String>,
}

impl SimplificationMap {
    pub fn resolve(&self, name: &str) -> Option<&str> {
        self.map.get(name).map(|s| s.as_str())
    }
}

// ---------------------------------------------------------------------
// on-disk JSON shapes
// ---------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct VersionsFile {
    python_version: String,
    versions: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct MetaFile {
    dependencies: Vec<MetaDep>,
}

#[derive(Serialize, Deserialize)]
struct MetaDep {
    name: String,
    specifier: String,
}

#[derive(Serialize, Deserialize)]
struct ModulesFile {
    #[serde(rename = "Modules")]
    modules: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum SigEntry {
    One(ApiSignature),
    Many(Vec<ApiSignature>),
}

#[derive(Serialize, Deserialize)]
struct ApisFile {
    #[serde(rename = "APIs")]
    apis: BTreeMap<String, SigEntry>,
}

#[derive(Serialize, Deserialize)]
struct SimplifyFile {
    #[serde(rename = "Simplify")]
    map: BTreeMap<String, String>,
}

/// The local knowledge cache plus an optional live package index.
///
/// Every read goes cache-first; misses trigger a fetch-and-build when an
/// index is configured, and fail with the corresponding error when not.
/// Writes are atomic (temp file + rename) so concurrent readers never see
/// partial files.
pub struct KnowledgeStore {
    root: PathBuf,
    python_version: String,
    python: Version,
    index: Option<Box<dyn PackageIndex>>,
}

impl KnowledgeStore {
    pub fn new(
        root: impl Into<PathBuf>,
        python_version: &str,
        index: Option<Box<dyn PackageIndex>>,
    ) -> Result<KnowledgeStore, KnowledgeError> {
        let python = Version::parse(python_version).map_err(|_| KnowledgeError::Io {
            path: String::new(),
            source: io::Error::new(
                io::ErrorKind::InvalidInput,
                format!("bad python version {python_version:?}"),
            ),
        })?;
        Ok(KnowledgeStore {
            root: root.into(),
            python_version: python_version.to_string(),
            python,
            index,
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn python_version(&self) -> &str {
        &self.python_version
    }

    pub fn is_offline(&self) -> bool {
        self.index.is_none()
    }

    fn pkg_dir(&self, pkg: &PackageName) -> PathBuf {
        self.root.join(pkg.as_str())
    }

    fn ver_dir(&self, pkg: &PackageName, version: &Version) -> PathBuf {
        self.pkg_dir(pkg).join(version.to_string())
    }

    /// Ascending candidate versions admitted by the configured interpreter.
    pub fn candidates(&self, pkg: &PackageName) -> Result<Vec<Version>, KnowledgeError> {
        let path = self.pkg_dir(pkg).join("versions.json");
        if let Some(file) = read_json::<VersionsFile>(&path) {
            if file.python_version == self.python_version {
                let mut versions: Vec<Version> = file
                    .versions
                    .iter()
                    .filter_map(|s| Version::parse(s).ok())
                    .collect();
                versions.sort();
                versions.dedup();
                return Ok(versions);
            }
        }
        self.fetch_candidates(pkg)
    }

    /// Queries the index for all versions compatible with the interpreter
    /// and persists the result.
    pub fn fetch_candidates(&self, pkg: &PackageName) -> Result<Vec<Version>, KnowledgeError> {
        let index = self
            .index
            .as_deref()
            .ok_or_else(|| KnowledgeError::IndexUnavailable(pkg.to_string()))?;
        let info = match index.project(pkg.as_str()) {
            Ok(info) => info,
            Err(IndexError::NotFound) => {
                return Err(KnowledgeError::UnknownPackage(pkg.to_string()))
            }
            Err(e) => return Err(e.into()),
        };
        let mut versions = Vec::new();
        for entry in &info.releases {
            let version = match Version::parse(&entry.version) {
                Ok(v) => v,
                Err(_) => {
                    log::warn!("skipping unparseable version {:?} of {}", entry.version, pkg);
                    continue;
                }
            };
            if let Some(req) = &entry.requires_python {
                match Specifier::parse(req) {
                    Ok(spec) => {
                        if !satisfies(&self.python, &spec) {
                            continue;
                        }
                    }
                    Err(_) => {
                        log::warn!(
                            "unparseable requires-python {:?} for {}=={}; keeping candidate",
                            req,
                            pkg,
                            version
                        );
                    }
                }
            }
            versions.push(version);
        }
        versions.sort();
        versions.dedup();
        self.put_candidates(pkg, &versions)?;
        Ok(versions)
    }

    /// Persists a candidate list, replacing any cached one.
    pub fn put_candidates(
        &self,
        pkg: &PackageName,
        versions: &[Version],
    ) -> Result<(), KnowledgeError> {
        let mut sorted: Vec<Version> = versions.to_vec();
        sorted.sort();
        sorted.dedup();
        let file = VersionsFile {
            python_version: self.python_version.clone(),
            versions: sorted.iter().map(|v| v.to_string()).collect(),
        };
        write_json(&self.pkg_dir(pkg).join("versions.json"), &file)
    }

    /// Parsed dependency pairs for one candidate. Entries with
    /// unparseable specifiers were skipped at fetch time.
    pub fn dependencies(
        &self,
        pkg: &PackageName,
        version: &Version,
    ) -> Result<Vec<DependencyEdge>, KnowledgeError> {
        let path = self.ver_dir(pkg, version).join("meta.json");
        if let Some(file) = read_json::<MetaFile>(&path) {
            return Ok(decode_meta(file));
        }
        self.fetch_dependencies(pkg, version)
    }

    pub fn fetch_dependencies(
        &self,
        pkg: &PackageName,
        version: &Version,
    ) -> Result<Vec<DependencyEdge>, KnowledgeError> {
        let index = self.index.as_deref().ok_or_else(|| {
            KnowledgeError::MetadataMissing(pkg.to_string(), version.to_string())
        })?;
        let info = match index.release(pkg.as_str(), &version.to_string()) {
            Ok(info) => info,
            Err(IndexError::NotFound) => {
                return Err(KnowledgeError::MetadataMissing(
                    pkg.to_string(),
                    version.to_string(),
                ))
            }
            Err(e) => return Err(e.into()),
        };
        let mut deps = Vec::new();
        for raw in &info.requires_dist {
            match index::parse_requires_dist(raw) {
                index::ParsedDep::Dep(name, spec) => deps.push(DependencyEdge {
                    name,
                    specifier: spec,
                }),
                index::ParsedDep::ExtraOnly => {}
                index::ParsedDep::Unparseable => {
                    log::warn!("skipping unparseable dependency {raw:?} of {pkg}=={version}");
                }
            }
        }
        self.put_dependencies(pkg, version, &deps)?;
        Ok(deps)
    }

    pub fn put_dependencies(
        &self,
        pkg: &PackageName,
        version: &Version,
        deps: &[DependencyEdge],
    ) -> Result<(), KnowledgeError> {
        let file = MetaFile {
            dependencies: deps
                .iter()
                .map(|d| MetaDep {
                    name: d.name.as_str().to_string(),
                    specifier: d.specifier.to_string(),
                })
                .collect(),
        };
        write_json(&self.ver_dir(pkg, version).join("meta.json"), &file)
    }

    /// The unpacked source tree for one version, downloading and
    /// unpacking on first use.
    pub fn source_root(
        &self,
        pkg: &PackageName,
        version: &Version,
    ) -> Result<PathBuf, KnowledgeError> {
        let src = self.ver_dir(pkg, version).join("src");
        if src.is_dir() {
            return Ok(src);
        }
        let index = self.index.as_deref().ok_or_else(|| {
            KnowledgeError::SourceUnavailable(pkg.to_string(), version.to_string())
        })?;
        let info = match index.release(pkg.as_str(), &version.to_string()) {
            Ok(info) => info,
            Err(IndexError::NotFound) => {
                return Err(KnowledgeError::SourceUnavailable(
                    pkg.to_string(),
                    version.to_string(),
                ))
            }
            Err(e) => return Err(e.into()),
        };
        // Prefer the sdist; fall back to the first wheel.
        let artifact = info
            .artifacts
            .iter()
            .find(|a| a.is_sdist)
            .or_else(|| info.artifacts.iter().find(|a| a.is_wheel))
            .ok_or_else(|| {
                KnowledgeError::SourceUnavailable(pkg.to_string(), version.to_string())
            })?;
        let bytes = index.download(&artifact.url)?;
        let staging = self.ver_dir(pkg, version).join("src.tmp");
        let _ = fs::remove_dir_all(&staging);
        fs::create_dir_all(&staging).map_err(|e| io_err(&staging, e))?;
        archive::unpack_archive(&bytes, &artifact.filename, &staging).map_err(|_| {
            KnowledgeError::SourceUnavailable(pkg.to_string(), version.to_string())
        })?;
        let normalized = archive::normalize_source_root(&staging);
        if normalized == staging {
            fs::rename(&staging, &src).map_err(|e| io_err(&src, e))?;
        } else {
            fs::rename(&normalized, &src).map_err(|e| io_err(&src, e))?;
            let _ = fs::remove_dir_all(&staging);
        }
        Ok(src)
    }

    /// Copies a local source tree into the cache and builds its
    /// inventories. Used for vendored packages and test fixtures.
    pub fn ingest_source_tree(
        &self,
        pkg: &PackageName,
        version: &Version,
        tree: &Path,
    ) -> Result<(), KnowledgeError> {
        let src = self.ver_dir(pkg, version).join("src");
        if src.exists() {
            fs::remove_dir_all(&src).map_err(|e| io_err(&src, e))?;
        }
        copy_tree(tree, &src)?;
        self.build_and_persist(pkg, version, &src)?;
        Ok(())
    }

    fn build_and_persist(
        &self,
        pkg: &PackageName,
        version: &Version,
        src: &Path,
    ) -> Result<(ModuleInventory, ApiInventory, SimplificationMap), KnowledgeError> {
        let modules = build_module_inventory(src);
        let build = build_api_inventory(src);
        for failure in &build.parse_failures {
            log::warn!("parse failure in {pkg}=={version}: {failure}");
        }
        let dir = self.ver_dir(pkg, version);
        write_json(
            &dir.join("modules.json"),
            &ModulesFile {
                modules: modules.iter().cloned().collect(),
            },
        )?;
        write_json(
            &dir.join("apis.json"),
            &ApisFile {
                apis: build
                    .apis
                    .iter()
                    .map(|(k, sigs)| {
                        let entry = if sigs.len() == 1 {
                            SigEntry::One(sigs[0].clone())
                        } else {
                            SigEntry::Many(sigs.clone())
                        };
                        (k.clone(), entry)
                    })
                    .collect(),
            },
        )?;
        write_json(
            &dir.join("simplify.json"),
            &SimplifyFile {
                map: build.simplify.clone(),
            },
        )?;
        Ok((
            ModuleInventory {
                package: pkg.clone(),
                version: version.clone(),
                modules,
            },
            ApiInventory {
                package: pkg.clone(),
                version: version.clone(),
                apis: build.apis,
            },
            SimplificationMap {
                package: pkg.clone(),
                version: version.clone(),
                map: build.simplify,
            },
        ))
    }

    /// Loads the three code inventories, building them from source when
    /// the cache misses or is corrupt.
    pub fn inventories(
        &self,
        pkg: &PackageName,
        version: &Version,
    ) -> Result<(ModuleInventory, ApiInventory, SimplificationMap), KnowledgeError> {
        let dir = self.ver_dir(pkg, version);
        let modules = read_json::<ModulesFile>(&dir.join("modules.json"));
        let apis = read_json::<ApisFile>(&dir.join("apis.json"));
        let simplify = read_json::<SimplifyFile>(&dir.join("simplify.json"));
        if let (Some(m), Some(a), Some(s)) = (modules, apis, simplify) {
            return Ok((
                ModuleInventory {
                    package: pkg.clone(),
                    version: version.clone(),
                    modules: m.modules.into_iter().collect(),
                },
                ApiInventory {
                    package: pkg.clone(),
                    version: version.clone(),
                    apis: a
                        .apis
                        .into_iter()
                        .map(|(k, v)| {
                            let sigs = match v {
                                SigEntry::One(sig) => vec![sig],
                                SigEntry::Many(sigs) => sigs,
                            };
                            (k, sigs)
                        })
                        .collect(),
                },
                SimplificationMap {
                    package: pkg.clone(),
                    version: version.clone(),
                    map: s.map,
                },
            ));
        }
        // cache miss or corrupt: rebuild from source
        let src = self.source_root(pkg, version)?;
        self.build_and_persist(pkg, version, &src)
    }

    pub fn modules(
        &self,
        pkg: &PackageName,
        version: &Version,
    ) -> Result<ModuleInventory, KnowledgeError> {
        Ok(self.inventories(pkg, version)?.0)
    }

    pub fn apis(
        &self,
        pkg: &PackageName,
        version: &Version,
    ) -> Result<ApiInventory, KnowledgeError> {
        Ok(self.inventories(pkg, version)?.1)
    }

    pub fn simplification(
        &self,
        pkg: &PackageName,
        version: &Version,
    ) -> Result<SimplificationMap, KnowledgeError> {
        Ok(self.inventories(pkg, version)?.2)
    }

    /// Cache hit returns stored knowledge; miss triggers fetch, build,
    /// and persist. The result is identical either way.
    pub fn load_or_refresh(
        &self,
        pkg: &PackageName,
        version: &Version,
    ) -> Result<
        (
            ModuleInventory,
            ApiInventory,
            SimplificationMap,
            Vec<DependencyEdge>,
        ),
        KnowledgeError,
    > {
        let (modules, apis, simplify) = self.inventories(pkg, version)?;
        let deps = self.dependencies(pkg, version)?;
        Ok((modules, apis, simplify, deps))
    }
}

fn decode_meta(file: MetaFile) -> Vec<DependencyEdge> {
    file.dependencies
        .into_iter()
        .filter_map(|d| {
            let spec = Specifier::parse(&d.specifier).ok()?;
            Some(DependencyEdge {
                name: PackageName::new(&d.name),
                specifier: spec,
            })
        })
        .collect()
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Option<T> {
    let bytes = fs::read(path).ok()?;
    match serde_json::from_slice(&bytes) {
        Ok(v) => Some(v),
        Err(e) => {
            log::warn!("corrupt cache file {}: {e}", path.display());
            None
        }
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), KnowledgeError> {
    let parent = path.parent().unwrap_or(Path::new("."));
    fs::create_dir_all(parent).map_err(|e| io_err(parent, e))?;
    let mut bytes = serde_json::to_vec_pretty(value).expect("serializable");
    bytes.push(b'\n');
    let tmp = path.with_extension("json.tmp");
    fs::write(&tmp, &bytes).map_err(|e| io_err(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| io_err(path, e))?;
    Ok(())
}

fn copy_tree(from: &Path, to: &Path) -> Result<(), KnowledgeError> {
    fs::create_dir_all(to).map_err(|e| io_err(to, e))?;
    for entry in walkdir::WalkDir::new(from).sort_by_file_name() {
        let entry = entry.map_err(|e| KnowledgeError::Io {
            path: from.display().to_string(),
            source: io::Error::other(e),
        })?;
        let rel = entry.path().strip_prefix(from).expect("under root");
        if rel.as_os_str().is_empty() {
            continue;
        }
        let dest = to.join(rel);
        if entry.file_type().is_dir() {
            fs::create_dir_all(&dest).map_err(|e| io_err(&dest, e))?;
        } else if entry.file_type().is_file() {
            fs::copy(entry.path(), &dest).map_err(|e| io_err(&dest, e))?;
        }
    }
    Ok(())
}
