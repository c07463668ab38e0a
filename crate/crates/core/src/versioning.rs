//! Python-ecosystem version identifiers, constraint specifiers, and
//! pinned requirements files.
//!
//! Versions follow the PyPI ordering rules (epoch, release, pre/post/dev
//! markers); package names follow the index normalization rules (lowercase,
//! runs of `-`/`_`/`.` collapsed to `-`). Requirements files are fully
//! pinned `name==version` lists; anything looser is rejected.

use std::borrow::Borrow;
use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VersionError {
    #[error("malformed version: {0:?}")]
    MalformedVersion(String),
    #[error("malformed specifier: {0:?}")]
    MalformedSpecifier(String),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RequirementsError {
    #[error("malformed requirement line {line_no}: {line:?}")]
    MalformedRequirement { line_no: usize, line: String },
    #[error("duplicate package: {0}")]
    DuplicatePackage(String),
}

/// A package identifier carrying both the spelling found in the input and
/// the normalized form used for every comparison.
#[derive(Debug, Clone)]
pub struct PackageName {
    raw: String,
    normalized: String,
}

impl PackageName {
    pub fn new(raw: &str) -> Self {
        PackageName {
            raw: raw.to_string(),
            normalized: normalize_name(raw),
        }
    }

    pub fn raw(&self) -> &str {
        &self.raw
    }

    pub fn as_str(&self) -> &str {
        &self.normalized
    }

    /// Default import name: the normalized name with `-` replaced by `_`.
    /// Packages whose import name differs (e.g. scikit-learn vs sklearn)
    /// are handled by the alias table in the configuration.
    pub fn default_import_name(&self) -> String {
        self.normalized.replace('-', "_")
    }
}

fn normalize_name(raw: &str) -> String {
    let mut out = String::with_capacity(raw.len());
    let mut prev_sep = false;
    for ch in raw.trim().chars() {
        if ch == '-' || ch == '_' || ch == '.' {
            if !prev_sep && !out.is_empty() {
                out.push('-');
            }
            prev_sep = true;
        } else {
            out.push(ch.to_ascii_lowercase());
            prev_sep = false;
        }
    }
    while out.ends_with('-') {
        out.pop();
    }
    out
}

impl PartialEq for PackageName {
    fn eq(&self, other: &Self) -> bool {
        self.normalized == other.normalized
    }
}
impl Eq for PackageName {}

impl PartialOrd for PackageName {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for PackageName {
    fn cmp(&self, other: &Self) -> Ordering {
        self.normalized.cmp(&other.normalized)
    }
}

impl Hash for PackageName {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.normalized.hash(state);
    }
}

impl fmt::Display for PackageName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.normalized)
    }
}

impl From<&str> for PackageName {
    fn from(s: &str) -> Self {
        PackageName::new(s)
    }
}

impl Borrow<str> for PackageName {
    fn borrow(&self) -> &str {
        &self.normalized
    }
}

impl Serialize for PackageName {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        ser.serialize_str(&self.normalized)
    }
}

impl<'de> Deserialize<'de> for PackageName {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let s = String::deserialize(de)?;
        Ok(PackageName::new(&s))
    }
}

/// Pre-release tag, ordered alpha < beta < release candidate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PreTag {
    Alpha,
    Beta,
    Rc,
}

impl PreTag {
    fn as_str(self) -> &'static str {
        match self {
            PreTag::Alpha => "a",
            PreTag::Beta => "b",
            PreTag::Rc => "rc",
        }
    }
}

/// An ordered version identifier: epoch, dotted release, and optional
/// pre / post / dev markers.
#[derive(Debug, Clone)]
pub struct Version {
    epoch: u64,
    release: Vec<u64>,
    pre: Option<(PreTag, u64)>,
    post: Option<u64>,
    dev: Option<u64>,
    raw: String,
}

impl Version {
    pub fn parse(text: &str) -> Result<Version, VersionError> {
        let trimmed = text.trim();
        if trimmed.is_empty() {
            return Err(VersionError::MalformedVersion(text.to_string()));
        }
        let lower = trimmed.to_ascii_lowercase();
        let mut s = lower.as_str();
        if let Some(rest) = s.strip_prefix('v') {
            s = rest;
        }

        let err = || VersionError::MalformedVersion(text.to_string());

        // epoch
        let mut epoch = 0u64;
        if let Some(bang) = s.find('!') {
            epoch = s[..bang].parse().map_err(|_| err())?;
            s = &s[bang + 1..];
        }

        // release: one or more dot-separated integers
        let mut release = Vec::new();
        let mut chars = s.char_indices().peekable();
        let mut pos = 0;
        loop {
            let start = pos;
            while let Some(&(i, c)) = chars.peek() {
                if c.is_ascii_digit() {
                    chars.next();
                    pos = i + c.len_utf8();
                } else {
                    break;
                }
            }
            if pos == start {
                return Err(err());
            }
            release.push(s[start..pos].parse().map_err(|_| err())?);
            match chars.peek() {
                Some(&(i, '.')) => {
                    // A dot continues the release only if a digit follows.
                    let after = &s[i + 1..];
                    if after.starts_with(|c: char| c.is_ascii_digit()) {
                        chars.next();
                        pos = i + 1;
                        continue;
                    }
                    break;
                }
                _ => break,
            }
        }
        let mut rest = &s[pos..];

        let mut pre = None;
        let mut post = None;
        let mut dev = None;

        // pre segment
        if let Some((tag, consumed)) = take_pre_tag(rest) {
            rest = &rest[consumed..];
            let (num, consumed) = take_optional_number(rest);
            rest = &rest[consumed..];
            pre = Some((tag, num));
        }

        // post segment: `.post1`, `-1`, `rev1`, `r1`
        if let Some(stripped) = rest.strip_prefix('-') {
            // implicit post release: hyphen followed by digits
            if stripped.starts_with(|c: char| c.is_ascii_digit()) {
                let (num, consumed) = take_optional_number(stripped);
                rest = &stripped[consumed..];
                post = Some(num);
            }
        }
        if post.is_none() {
            if let Some(consumed) = take_word(rest, &["post", "rev", "r"]) {
                rest = &rest[consumed..];
                let (num, consumed) = take_optional_number(rest);
                rest = &rest[consumed..];
                post = Some(num);
            }
        }

        // dev segment
        if let Some(consumed) = take_word(rest, &["dev"]) {
            rest = &rest[consumed..];
            let (num, consumed) = take_optional_number(rest);
            rest = &rest[consumed..];
            dev = Some(num);
        }

        if !rest.is_empty() {
            // Local version labels and any other trailing junk are rejected;
            // index entries carrying them are skipped upstream.
            return Err(err());
        }

        Ok(Version {
            epoch,
            release,
            pre,
            post,
            dev,
            raw: trimmed.to_string(),
        })
    }

    /// The exact text this version was parsed from.
    pub fn raw(&self) -> &str {
        &self.raw
    }

    pub fn release(&self) -> &[u64] {
        &self.release
    }

    pub fn epoch(&self) -> u64 {
        self.epoch
    }

    /// True when a dev or pre marker is present.
    pub fn is_prerelease(&self) -> bool {
        self.dev.is_some() || self.pre.is_some()
    }

    pub fn is_postrelease(&self) -> bool {
        self.post.is_some()
    }

    /// Release digits with trailing zeros removed; the comparison domain.
    fn trimmed_release(&self) -> &[u64] {
        let mut n = self.release.len();
        while n > 1 && self.release[n - 1] == 0 {
            n -= 1;
        }
        &self.release[..n]
    }

    /// (epoch, trimmed release) — what two versions must share to be
    /// variants of the same release.
    fn base(&self) -> (u64, &[u64]) {
        (self.epoch, self.trimmed_release())
    }

    fn cmp_key(&self) -> VersionKey<'_> {
        // Final releases sort after every pre-release of the same release;
        // a bare dev release sorts before the pre-releases.
        let pre = match (self.pre, self.dev) {
            (Some(p), _) => PreKey::Tagged(p),
            (None, Some(_)) => PreKey::DevOnly,
            (None, None) => PreKey::Final,
        };
        VersionKey {
            epoch: self.epoch,
            release: self.trimmed_release(),
            pre,
            post: match self.post {
                Some(n) => PostKey::Post(n),
                None => PostKey::NoPost,
            },
            dev: match self.dev {
                Some(n) => DevKey::Dev(n),
                None => DevKey::NoDev,
            },
        }
    }
}

#[derive(PartialEq, Eq, PartialOrd, Ord)]
enum PreKey {
    DevOnly,
    Tagged((PreTag, u64)),
    Final,
}

#[derive(PartialEq, Eq, PartialOrd, Ord)]
enum PostKey {
    NoPost,
    Post(u64),
}

#[derive(PartialEq, Eq, PartialOrd, Ord)]
enum DevKey {
    Dev(u64),
    NoDev,
}

#[derive(PartialEq, Eq, PartialOrd, Ord)]
struct VersionKey<'a> {
    epoch: u64,
    release: &'a [u64],
    pre: PreKey,
    post: PostKey,
    dev: DevKey,
}

fn take_pre_tag(s: &str) -> Option<(PreTag, usize)> {
    let trimmed = s.trim_start_matches(['.', '-', '_']);
    let sep = s.len() - trimmed.len();
    if sep > 1 {
        return None;
    }
    for (word, tag) in [
        ("alpha", PreTag::Alpha),
        ("beta", PreTag::Beta),
        ("preview", PreTag::Rc),
        ("pre", PreTag::Rc),
        ("rc", PreTag::Rc),
        ("a", PreTag::Alpha),
        ("b", PreTag::Beta),
        ("c", PreTag::Rc),
    ] {
        if trimmed.starts_with(word) {
            return Some((tag, sep + word.len()));
        }
    }
    None
}

fn take_word(s: &str, words: &[&str]) -> Option<usize> {
    let trimmed = s.trim_start_matches(['.', '-', '_']);
    let sep = s.len() - trimmed.len();
    if sep > 1 {
        return None;
    }
    for w in words {
        if trimmed.starts_with(w) {
            return Some(sep + w.len());
        }
    }
    None
}

fn take_optional_number(s: &str) -> (u64, usize) {
    let trimmed = s.trim_start_matches(['.', '-', '_']);
    let sep = s.len() - trimmed.len();
    let digits: usize = trimmed
        .chars()
        .take_while(|c| c.is_ascii_digit())
        .map(|c| c.len_utf8())
        .sum();
    if digits == 0 || sep > 1 {
        (0, 0)
    } else {
        (trimmed[..digits].parse().unwrap_or(0), sep + digits)
    }
}

impl PartialEq for Version {
    fn eq(&self, other: &Self) -> bool {
        self.cmp_key() == other.cmp_key()
    }
}
impl Eq for Version {}

impl PartialOrd for Version {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Version {
    fn cmp(&self, other: &Self) -> Ordering {
        self.cmp_key().cmp(&other.cmp_key())
    }
}

impl Hash for Version {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.epoch.hash(state);
        self.trimmed_release().hash(state);
        self.pre.hash(state);
        self.post.hash(state);
        self.dev.hash(state);
    }
}

impl fmt::Display for Version {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.epoch != 0 {
            write!(f, "{}!", self.epoch)?;
        }
        let mut first = true;
        for part in &self.release {
            if !first {
                f.write_str(".")?;
            }
            write!(f, "{part}")?;
            first = false;
        }
        if let Some((tag, n)) = self.pre {
            write!(f, "{}{}", tag.as_str(), n)?;
        }
        if let Some(n) = self.post {
            write!(f, ".post{n}")?;
        }
        if let Some(n) = self.dev {
            write!(f, ".dev{n}")?;
        }
        Ok(())
    }
}

impl FromStr for Version {
    type Err = VersionError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Version::parse(s)
    }
}

impl Serialize for Version {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        ser.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Version {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let s = String::deserialize(de)?;
        Version::parse(&s).map_err(serde::de::Error::custom)
    }
}

/// One of `==` `!=` `<=` `>=` `<` `>` `~=`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Operator {
    Equal,
    NotEqual,
    LessEqual,
    GreaterEqual,
    Less,
    Greater,
    TildeEqual,
}

impl Operator {
    fn as_str(self) -> &'static str {
        match self {
            Operator::Equal => "==",
            Operator::NotEqual => "!=",
            Operator::LessEqual => "<=",
            Operator::GreaterEqual => ">=",
            Operator::Less => "<",
            Operator::Greater => ">",
            Operator::TildeEqual => "~=",
        }
    }
}

/// A conjunction of operator clauses; the empty specifier admits everything.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Specifier {
    clauses: Vec<(Operator, Version)>,
}

impl Specifier {
    pub fn any() -> Specifier {
        Specifier::default()
    }

    pub fn parse(text: &str) -> Result<Specifier, VersionError> {
        let trimmed = text.trim();
        if trimmed.is_empty() {
            return Ok(Specifier::any());
        }
        let mut clauses = Vec::new();
        for part in trimmed.split(',') {
            let part = part.trim();
            if part.is_empty() {
                return Err(VersionError::MalformedSpecifier(text.to_string()));
            }
            let (op, rest) = if let Some(r) = part.strip_prefix("==") {
                (Operator::Equal, r)
            } else if let Some(r) = part.strip_prefix("!=") {
                (Operator::NotEqual, r)
            } else if let Some(r) = part.strip_prefix("<=") {
                (Operator::LessEqual, r)
            } else if let Some(r) = part.strip_prefix(">=") {
                (Operator::GreaterEqual, r)
            } else if let Some(r) = part.strip_prefix("~=") {
                (Operator::TildeEqual, r)
            } else if let Some(r) = part.strip_prefix('<') {
                (Operator::Less, r)
            } else if let Some(r) = part.strip_prefix('>') {
                (Operator::Greater, r)
            } else {
                return Err(VersionError::MalformedSpecifier(text.to_string()));
            };
            let version = Version::parse(rest)
                .map_err(|_| VersionError::MalformedSpecifier(text.to_string()))?;
            if op == Operator::TildeEqual && version.release.len() < 2 {
                return Err(VersionError::MalformedSpecifier(text.to_string()));
            }
            clauses.push((op, version));
        }
        Ok(Specifier { clauses })
    }

    pub fn exact(version: Version) -> Specifier {
        Specifier {
            clauses: vec![(Operator::Equal, version)],
        }
    }

    pub fn is_any(&self) -> bool {
        self.clauses.is_empty()
    }

    pub fn clauses(&self) -> &[(Operator, Version)] {
        &self.clauses
    }
}

impl fmt::Display for Specifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (op, v) in &self.clauses {
            if !first {
                f.write_str(",")?;
            }
            write!(f, "{}{}", op.as_str(), v)?;
            first = false;
        }
        Ok(())
    }
}

impl FromStr for Specifier {
    type Err = VersionError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Specifier::parse(s)
    }
}

impl Serialize for Specifier {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        ser.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Specifier {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let s = String::deserialize(de)?;
        Specifier::parse(&s).map_err(serde::de::Error::custom)
    }
}

/// True iff every clause of `spec` holds for `v`.
pub fn satisfies(v: &Version, spec: &Specifier) -> bool {
    spec.clauses.iter().all(|(op, s)| clause_holds(v, *op, s))
}

fn clause_holds(v: &Version, op: Operator, s: &Version) -> bool {
    match op {
        Operator::Equal => v == s,
        Operator::NotEqual => v != s,
        Operator::LessEqual => v <= s,
        Operator::GreaterEqual => v >= s,
        Operator::Less => {
            // An exclusive upper bound never admits a pre-release of the
            // bound itself unless the bound is a pre-release too.
            if v >= s {
                return false;
            }
            !(v.is_prerelease() && !s.is_prerelease() && v.base() == s.base())
        }
        Operator::Greater => {
            // An exclusive lower bound never admits a post-release of the
            // bound itself unless the bound is a post-release too.
            if v <= s {
                return false;
            }
            !(v.is_postrelease() && !s.is_postrelease() && v.base() == s.base())
        }
        Operator::TildeEqual => {
            if v < s {
                return false;
            }
            if v.epoch != s.epoch {
                return false;
            }
            // prefix match on all but the last stated release digit
            let prefix = &s.release[..s.release.len() - 1];
            let padded = |r: &[u64], i: usize| r.get(i).copied().unwrap_or(0);
            (0..prefix.len()).all(|i| padded(&v.release, i) == prefix[i])
        }
    }
}

/// An ordered, duplicate-free map of fully pinned packages.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Requirements {
    pins: Vec<(PackageName, Version)>,
}

impl Requirements {
    pub fn new() -> Requirements {
        Requirements::default()
    }

    /// Parses a fully pinned requirements file. Blank lines and `#` comments
    /// are ignored; any constraint other than `==` is rejected.
    pub fn parse(text: &str) -> Result<Requirements, RequirementsError> {
        let mut reqs = Requirements::new();
        for (idx, raw_line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = match raw_line.find('#') {
                Some(pos) => &raw_line[..pos],
                None => raw_line,
            };
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let malformed = || RequirementsError::MalformedRequirement {
                line_no,
                line: raw_line.trim().to_string(),
            };
            let eq = line.find("==").ok_or_else(malformed)?;
            let name_part = line[..eq].trim();
            let ver_part = line[eq + 2..].trim();
            if name_part.is_empty()
                || ver_part.is_empty()
                || name_part.contains(|c: char| "<>=!~,;[ ".contains(c))
                || ver_part.contains(|c: char| "<>=!~,; ".contains(c))
            {
                return Err(malformed());
            }
            let name = PackageName::new(name_part);
            let version = Version::parse(ver_part).map_err(|_| malformed())?;
            if reqs.get(&name).is_some() {
                return Err(RequirementsError::DuplicatePackage(
                    name.as_str().to_string(),
                ));
            }
            reqs.pins.push((name, version));
        }
        Ok(reqs)
    }

    /// One `name==version` line per pin, input order preserved.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (name, version) in &self.pins {
            out.push_str(name.as_str());
            out.push_str("==");
            out.push_str(&version.to_string());
            out.push('\n');
        }
        out
    }

    pub fn get(&self, name: &PackageName) -> Option<&Version> {
        self.pins.iter().find(|(n, _)| n == name).map(|(_, v)| v)
    }

    /// Replaces an existing pin in place or appends a new one.
    pub fn set(&mut self, name: PackageName, version: Version) {
        if let Some(slot) = self.pins.iter_mut().find(|(n, _)| *n == name) {
            slot.1 = version;
        } else {
            self.pins.push((name, version));
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = &(PackageName, Version)> {
        self.pins.iter()
    }

    pub fn names(&self) -> impl Iterator<Item = &PackageName> {
        self.pins.iter().map(|(n, _)| n)
    }

    pub fn len(&self) -> usize {
        self.pins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pins.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v(s: &str) -> Version {
        Version::parse(s).unwrap()
    }

    fn spec(s: &str) -> Specifier {
        Specifier::parse(s).unwrap()
    }

    // Frozen from the reference implementation of the PyPI ordering rules
    // over this corpus; see tests below that re-check the order pairwise.
    const SORTED_CORPUS: &[&str] = &[
        "0.0.12", "0.5.0", "0.6.0", "0.7.0", "0.8.0", "0.9.1", "0.10.0", "0.13.1", "0.18.1",
        "0.22", "0.22.1", "0.24.0", "1.0.dev3", "1.0a1.dev1", "1.0a1", "1.0a1.post2", "1.0b2",
        "1.0rc1", "1.0", "1.0.post1", "1.1", "1.3.0", "1.4.0", "1.5.0a2", "1.5.0", "1.5.0.post3",
        "1.6.0", "1.7.1", "1.9.0rc1", "1.9.0", "1.10.0", "1.13.3", "1.14.5", "1.16.4", "1.18.0",
        "1.19.5", "1.24.0", "2.0.0", "2.6.2.2", "3.0.0.dev8", "6.2.0", "8.0.0", "9.0.0", "9.5.0",
        "10.0", "2!1.0",
    ];

    #[test]
    fn corpus_order_matches_reference() {
        let parsed: Vec<Version> = SORTED_CORPUS.iter().map(|s| v(s)).collect();
        for pair in parsed.windows(2) {
            assert!(
                pair[0] < pair[1],
                "expected {} < {}",
                pair[0].raw(),
                pair[1].raw()
            );
        }
        let mut shuffled: Vec<Version> = parsed.clone();
        shuffled.reverse();
        shuffled.sort();
        let rendered: Vec<String> = shuffled.iter().map(|x| x.raw().to_string()).collect();
        let expected: Vec<String> = SORTED_CORPUS.iter().map(|s| s.to_string()).collect();
        assert_eq!(rendered, expected);
    }

    #[test]
    fn prerelease_sorts_before_final() {
        assert!(v("1.9.0rc1") < v("1.9.0"));
        assert!(v("1.9.0") < v("1.10.0"));
    }

    #[test]
    fn release_zero_padding_equality() {
        assert_eq!(v("1.0"), v("1"));
        assert_eq!(v("1.0"), v("1.0.0"));
        assert_ne!(v("1.0"), v("1.0.post1"));
    }

    #[test]
    fn minimal_release_parses() {
        let version = v("0");
        assert_eq!(version.release(), &[0]);
    }

    #[test]
    fn epoch_dominates() {
        assert!(v("2!1.0") > v("10.0"));
    }

    #[test]
    fn malformed_versions_rejected() {
        for bad in ["", "abc", "1.0+cu117", "1..0", "1.0.x", "1.0post1junk"] {
            assert!(
                Version::parse(bad).is_err(),
                "expected parse failure for {bad:?}"
            );
        }
    }

    #[test]
    fn spelling_variants_parse_equal() {
        assert_eq!(v("1.0alpha1"), v("1.0a1"));
        assert_eq!(v("1.0-a.1"), v("1.0a1"));
        assert_eq!(v("1.0.rev2"), v("1.0.post2"));
        assert_eq!(v("1.0-3"), v("1.0.post3"));
        assert_eq!(v("V1.0"), v("1.0"));
        assert_eq!(v("1.0.PRE1"), v("1.0rc1"));
    }

    // Frozen satisfies decisions from the reference specifier semantics.
    #[test]
    fn satisfies_matches_reference() {
        let cases: &[(&str, &str, bool)] = &[
            ("1.4.0", "==1.4.0", true),
            ("1.14.5", "<=1.14.5,>=1.13.3", true),
            ("1.19.5", "<=1.14.5,>=1.13.3", false),
            ("2.2.3", "~=2.2", true),
            ("2.9", "~=2.2", true),
            ("3.0", "~=2.2", false),
            ("2.2", "~=2.2", true),
            ("1.4.5", "~=1.4.2", true),
            ("1.4.1", "~=1.4.2", false),
            ("1.5.0", "~=1.4.2", false),
            ("1.9.0rc1", ">=1.6.0", true),
            ("1.0.post1", "==1.0", false),
            ("1.0", "!=1.0", false),
            ("1.0.dev3", "<1.0", false),
            ("2!1.0", ">=1.24.0", true),
            ("1.0.0", "==1.0", true),
            ("1.0", "==1.0.0", true),
            ("1.0.1", "==1.0", false),
            ("1.0a1", "<1.0", false),
            ("1.0rc1", "<1.0", false),
            ("0.9", "<1.0", true),
            ("1.0.post1", "<1.0", false),
            ("1.0.post1", ">1.0", false),
            ("1.0.post2", ">1.0.post1", true),
            ("1.1", ">1.0", true),
            ("1.0a1", ">1.0", false),
            ("1.0.dev1", ">0.9", true),
            ("1.0a1", ">=1.0a1", true),
            ("1.0", "<=1.0", true),
            ("1.0.post1", "<=1.0", false),
            ("1.0.dev3", "<=1.0", true),
            ("1.0.dev3", "<1.0.dev4", true),
            ("1.0a2", "<1.0b1", true),
            ("2!1.0", "<3.0", false),
            ("1.0", "!=1.0.0", false),
            ("1.0.post1", "!=1.0", true),
            ("2.2.post3", "~=2.2", true),
            ("2.2.dev1", "~=2.2", false),
        ];
        for (ver, sp, expected) in cases {
            assert_eq!(
                satisfies(&v(ver), &spec(sp)),
                *expected,
                "({ver}, {sp}) should be {expected}"
            );
        }
    }

    #[test]
    fn empty_specifier_admits_everything() {
        assert!(satisfies(&v("1.0"), &Specifier::any()));
        assert!(satisfies(&v("0.0.1.dev0"), &spec("")));
    }

    #[test]
    fn tilde_requires_two_release_digits() {
        assert!(Specifier::parse("~=2").is_err());
    }

    #[test]
    fn name_normalization() {
        assert_eq!(PackageName::new("Pillow").as_str(), "pillow");
        assert_eq!(PackageName::new("scikit_learn").as_str(), "scikit-learn");
        assert_eq!(PackageName::new("a.-_b").as_str(), "a-b");
        assert_eq!(PackageName::new("Pillow"), PackageName::new("pillow"));
        // idempotent
        let n = PackageName::new("A__B.c");
        assert_eq!(PackageName::new(n.as_str()).as_str(), n.as_str());
    }

    #[test]
    fn requirements_parse_basic() {
        let reqs = Requirements::parse("torch==1.6.0\ntorchvision==0.7.0").unwrap();
        assert_eq!(reqs.len(), 2);
        assert_eq!(
            reqs.get(&PackageName::new("torch")).unwrap(),
            &v("1.6.0")
        );
        assert_eq!(
            reqs.get(&PackageName::new("torchvision")).unwrap(),
            &v("0.7.0")
        );
    }

    #[test]
    fn requirements_empty_input() {
        let reqs = Requirements::parse("").unwrap();
        assert!(reqs.is_empty());
        assert_eq!(reqs.render(), "");
    }

    #[test]
    fn requirements_comments_and_blank_lines() {
        let text = "# build deps\n\ntorch==1.6.0  # pinned\r\nnumpy==1.16.4\n";
        let reqs = Requirements::parse(text).unwrap();
        assert_eq!(reqs.len(), 2);
    }

    #[test]
    fn requirements_name_normalization_collides() {
        let a = Requirements::parse("Pillow==6.2.0").unwrap();
        let b = Requirements::parse("pillow==6.2.0").unwrap();
        assert_eq!(a, b);
        assert!(matches!(
            Requirements::parse("Pillow==6.2.0\npillow==6.2.0"),
            Err(RequirementsError::DuplicatePackage(_))
        ));
    }

    #[test]
    fn requirements_reject_loose_constraints() {
        for bad in ["torch>=1.6.0", "torch", "torch==1.6.0,<2", "torch~=1.6"] {
            assert!(
                matches!(
                    Requirements::parse(bad),
                    Err(RequirementsError::MalformedRequirement { .. })
                ),
                "expected rejection of {bad:?}"
            );
        }
    }

    #[test]
    fn requirements_single_pin_render() {
        let reqs = Requirements::parse("torch==1.6.0").unwrap();
        assert_eq!(reqs.render(), "torch==1.6.0\n");
    }

    prop_compose! {
        fn arb_version()(
            epoch in 0u64..3,
            release in proptest::collection::vec(0u64..40, 1..5),
            pre in proptest::option::of((0u8..3, 0u64..5)),
            post in proptest::option::of(0u64..5),
            dev in proptest::option::of(0u64..5),
        ) -> Version {
            let mut s = String::new();
            if epoch > 0 {
                s.push_str(&format!("{epoch}!"));
            }
            s.push_str(
                &release.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("."),
            );
            if let Some((tag, n)) = pre {
                let tag = ["a", "b", "rc"][tag as usize];
                s.push_str(&format!("{tag}{n}"));
            }
            if let Some(n) = post {
                s.push_str(&format!(".post{n}"));
            }
            if let Some(n) = dev {
                s.push_str(&format!(".dev{n}"));
            }
            Version::parse(&s).unwrap()
        }
    }

    proptest! {
        #[test]
        fn version_render_round_trips(version in arb_version()) {
            let rendered = version.to_string();
            let reparsed = Version::parse(&rendered).unwrap();
            prop_assert_eq!(&reparsed, &version);
            prop_assert_eq!(reparsed.to_string(), rendered);
        }

        #[test]
        fn ordering_is_total_and_consistent(
            a in arb_version(), b in arb_version(), c in arb_version()
        ) {
            // exactly one of <, =, > holds
            let lt = a < b;
            let eq = a == b;
            let gt = a > b;
            prop_assert_eq!(lt as u8 + eq as u8 + gt as u8, 1);
            // antisymmetry
            prop_assert_eq!(a.cmp(&b), b.cmp(&a).reverse());
            // transitivity
            if a <= b && b <= c {
                prop_assert!(a <= c);
            }
        }

        #[test]
        fn satisfies_monotone_for_lower_bounds(a in arb_version(), b in arb_version()) {
            // for spec ">=a": v satisfying and v' > v implies v' satisfies
            let sp = Specifier::parse(&format!(">={a}")).unwrap();
            let (lo, hi) = if a <= b { (&a, &b) } else { (&b, &a) };
            if satisfies(lo, &sp) {
                prop_assert!(satisfies(hi, &sp));
            }
        }

        #[test]
        fn requirements_round_trip(
            pins in proptest::collection::vec(("[a-z]{1,8}", arb_version()), 0..8)
        ) {
            let mut reqs = Requirements::new();
            for (name, version) in pins {
                reqs.set(PackageName::new(&name), version);
            }
            let rendered = reqs.render();
            let reparsed = Requirements::parse(&rendered).unwrap();
            prop_assert_eq!(reparsed, reqs);
        }
    }
}
