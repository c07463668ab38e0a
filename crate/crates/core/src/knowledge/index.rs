//! Package index client: JSON endpoints for version lists, release
//! metadata, and artifact downloads, with retry and backoff.

use std::thread;
use std::time::Duration;

use thiserror::Error;

use crate::versioning::{PackageName, Specifier};

#[derive(Debug, Error)]
pub enum IndexError {
    #[error("not found on index")]
    NotFound,
    #[error("index unavailable: {0}")]
    Unavailable(String),
}

/// One release of a project as listed by the index.
#[derive(Debug, Clone)]
pub struct ReleaseEntry {
    pub version: String,
    pub requires_python: Option<String>,
}

#[derive(Debug, Clone)]
pub struct ProjectInfo {
    pub releases: Vec<ReleaseEntry>,
}

#[derive(Debug, Clone)]
pub struct Artifact {
    pub filename: String,
    pub url: String,
    pub is_sdist: bool,
    pub is_wheel: bool,
}

#[derive(Debug, Clone)]
pub struct ReleaseInfo {
    pub requires_dist: Vec<String>,
    pub artifacts: Vec<Artifact>,
}

/// Read access to a package index.
pub trait PackageIndex: Send + Sync {
    fn project(&self, pkg: &str) -> Result<ProjectInfo, IndexError>;
    fn release(&self, pkg: &str, version: &str) -> Result<ReleaseInfo, IndexError>;
    fn download(&self, url: &str) -> Result<Vec<u8>, IndexError>;
}

pub const DEFAULT_INDEX_URL: &str = "https://pypi.org";

const RETRIES: u32 = 3;

/// HTTP client for `{index}/pypi/{name}/json` style endpoints.
pub struct HttpIndex {
    base: String,
    agent: ureq::Agent,
}

impl HttpIndex {
    pub fn new(base_url: &str) -> HttpIndex {
        HttpIndex {
            base: base_url.trim_end_matches('/').to_string(),
            agent: ureq::AgentBuilder::new()
                .timeout(Duration::from_secs(60))
                .build(),
        }
    }

    fn get_with_retry(&self, url: &str) -> Result<ureq::Response, IndexError> {
        let mut delay = Duration::from_millis(200);
        let mut last_err = String::new();
        for attempt in 0..=RETRIES {
            if attempt > 0 {
                thread::sleep(delay);
                delay *= 4;
            }
            match self.agent.get(url).call() {
                Ok(resp) => return Ok(resp),
                Err(ureq::Error::Status(404, _)) => return Err(IndexError::NotFound),
                Err(e) => {
                    last_err = e.to_string();
                    log::warn!("request {url} failed (attempt {}): {last_err}", attempt + 1);
                }
            }
        }
        Err(IndexError::Unavailable(last_err))
    }

    fn get_json(&self, url: &str) -> Result<serde_json::Value, IndexError> {
        let resp = self.get_with_retry(url)?;
        resp.into_json()
            .map_err(|e| IndexError::Unavailable(e.to_string()))
    }
}

impl PackageIndex for HttpIndex {
    fn project(&self, pkg: &str) -> Result<ProjectInfo, IndexError> {
        let doc = self.get_json(&format!("{}/pypi/{}/json", self.base, pkg))?;
        let releases = doc
            .get("releases")
            .and_then(|r| r.as_object())
            .ok_or_else(|| IndexError::Unavailable("malformed project document".into()))?;
        let mut out = Vec::new();
        for (version, files) in releases {
            let requires_python = files
                .as_array()
                .into_iter()
                .flatten()
                .filter_map(|f| f.get("requires_python").and_then(|v| v.as_str()))
                .next()
                .map(|s| s.to_string());
            out.push(ReleaseEntry {
                version: version.clone(),
                requires_python,
            });
        }
        Ok(ProjectInfo { releases: out })
    }

    fn release(&self, pkg: &str, version: &str) -> Result<ReleaseInfo, IndexError> {
        let doc = self.get_json(&format!("{}/pypi/{}/{}/json", self.base, pkg, version))?;
        let requires_dist = doc
            .get("info")
            .and_then(|i| i.get("requires_dist"))
            .and_then(|r| r.as_array())
            .map(|arr| {
                arr.iter()
                    .filter_map(|v| v.as_str().map(|s| s.to_string()))
                    .collect()
            })
            .unwrap_or_default();
        let artifacts = doc
            .get("urls")
            .and_then(|u| u.as_array())
            .map(|arr| {
                arr.iter()
                    .filter_map(|f| {
                        let url = f.get("url")?.as_str()?.to_string();
                        let filename = f.get("filename")?.as_str()?.to_string();
                        let packagetype =
                            f.get("packagetype").and_then(|p| p.as_str()).unwrap_or("");
                        Some(Artifact {
                            is_sdist: packagetype == "sdist",
                            is_wheel: packagetype == "bdist_wheel",
                            filename,
                            url,
                        })
                    })
                    .collect()
            })
            .unwrap_or_default();
        Ok(ReleaseInfo {
            requires_dist,
            artifacts,
        })
    }

    fn download(&self, url: &str) -> Result<Vec<u8>, IndexError> {
        let resp = self.get_with_retry(url)?;
        let mut bytes = Vec::new();
        resp.into_reader()
            .read_to_end(&mut bytes)
            .map_err(|e| IndexError::Unavailable(e.to_string()))?;
        Ok(bytes)
    }
}

pub(crate) enum ParsedDep {
    Dep(PackageName, Specifier),
    ExtraOnly,
    Unparseable,
}

/// Parses one requires-dist entry like `torch (==1.4.0)`,
/// `numpy (<=1.14.5,>=1.13.3)`, or `packaging>=17.0`. Entries guarded by
/// an `extra ==` marker are skipped; other environment markers are
/// ignored and the dependency kept unconditionally.
pub(crate) fn parse_requires_dist(entry: &str) -> ParsedDep {
    let (body, marker) = match entry.split_once(';') {
        Some((b, m)) => (b.trim(), Some(m.trim())),
        None => (entry.trim(), None),
    };
    if let Some(marker) = marker {
        if marker.contains("extra") {
            return ParsedDep::ExtraOnly;
        }
    }
    let name_end = body
        .find(|c: char| !(c.is_ascii_alphanumeric() || c == '-' || c == '_' || c == '.'))
        .unwrap_or(body.len());
    let name = &body[..name_end];
    if name.is_empty() {
        return ParsedDep::Unparseable;
    }
    let mut rest = body[name_end..].trim();
    // strip extras on the dependency name: requests[socks]
    if rest.starts_with('[') {
        match rest.find(']') {
            Some(close) => rest = rest[close + 1..].trim(),
            None => return ParsedDep::Unparseable,
        }
    }
    let rest = rest.trim_start_matches('(').trim_end_matches(')').trim();
    let spec = if rest.is_empty() {
        Specifier::any()
    } else {
        match Specifier::parse(rest) {
            Ok(s) => s,
            Err(_) => return ParsedDep::Unparseable,
        }
    };
    ParsedDep::Dep(PackageName::new(name), spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::versioning::{satisfies, Version};

    fn parse(entry: &str) -> Option<(String, String)> {
        match parse_requires_dist(entry) {
            ParsedDep::Dep(name, spec) => Some((name.to_string(), spec.to_string())),
            _ => None,
        }
    }

    #[test]
    fn plain_pinned_dependency() {
        assert_eq!(
            parse("torch (==1.4.0)").unwrap(),
            ("torch".to_string(), "==1.4.0".to_string())
        );
    }

    #[test]
    fn range_dependency() {
        let (name, spec) = parse("numpy (<=1.14.5,>=1.13.3)").unwrap();
        assert_eq!(name, "numpy");
        let spec = Specifier::parse(&spec).unwrap();
        assert!(satisfies(&Version::parse("1.14.5").unwrap(), &spec));
        assert!(!satisfies(&Version::parse("1.19.5").unwrap(), &spec));
    }

    #[test]
    fn modern_format_without_parens() {
        assert_eq!(
            parse("packaging>=17.0").unwrap(),
            ("packaging".to_string(), ">=17.0".to_string())
        );
    }

    #[test]
    fn extra_marked_entries_skipped() {
        assert!(matches!(
            parse_requires_dist("pytest ; extra == 'test'"),
            ParsedDep::ExtraOnly
        ));
    }

    #[test]
    fn non_extra_markers_kept() {
        assert_eq!(
            parse("dataclasses (>=0.6) ; python_version < \"3.7\"").unwrap().0,
            "dataclasses"
        );
    }

    #[test]
    fn extras_on_name_stripped() {
        assert_eq!(parse("requests[socks] (>=2.0)").unwrap().0, "requests");
    }

    #[test]
    fn no_constraint_means_any() {
        let (name, spec) = parse("six").unwrap();
        assert_eq!(name, "six");
        assert_eq!(spec, "");
    }

    #[test]
    fn wildcard_specifiers_are_unparseable() {
        assert!(matches!(
            parse_requires_dist("torch (==1.4.*)"),
            ParsedDep::Unparseable
        ));
    }
}
