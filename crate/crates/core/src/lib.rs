//! Compatible-requirements inference for Python third-party library
//! upgrades.
//!
//! Given a fully pinned `requirements.txt`, a target library, and the
//! version to upgrade it to, the engine jointly checks version
//! compatibility (constraint solving over the candidate/dependency
//! universe) and code compatibility (static inventories of modules, API
//! names, and API parameters across direct and transitive dependency
//! paths), iteratively adjusting versions until both hold, then emits the
//! pinned requirements plus a structured inference report.

pub mod assessment;
pub mod cli;
pub mod config;
pub mod extraction;
pub mod knowledge;
pub mod pysrc;
pub mod report;
pub mod solver;
pub mod strategy;
pub mod versioning;

pub use config::Config;
pub use knowledge::KnowledgeStore;
pub use report::InferenceReport;
pub use versioning::{satisfies, PackageName, Requirements, Specifier, Version};
