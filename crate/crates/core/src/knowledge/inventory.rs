//! Module and API inventory extraction from an unpacked source tree.
//!
//! Module discovery walks the directory hierarchy collecting `.py` files
//! and packages (directories with an init file), filtering out caches,
//! tests, documentation, and build artifacts. API discovery parses every
//! source file (including `.pyi` stubs) and records each function, class,
//! and module-level assignment under its fully qualified name, pathing
//! nested definitions through their enclosing scopes. Re-export import
//! statements produce the name-simplification map.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use rustpython_parser::ast::{self, Ranged};
use walkdir::WalkDir;

use crate::pysrc::{
    self, dotted_name, is_excluded_dir, module_path_for_file, parse_module, resolve_relative,
    ImportRecord, LineMap,
};

use super::{ApiSignature, Param, ParamKind};

/// All dotted module paths under `source_root`.
pub fn build_module_inventory(source_root: &Path) -> BTreeSet<String> {
    let mut modules = BTreeSet::new();
    for entry in walk_sources(source_root) {
        let path = entry.as_path();
        if path.extension().and_then(|e| e.to_str()) != Some("py") {
            continue;
        }
        if let Some(dotted) = module_path_for_file(source_root, path) {
            modules.insert(dotted);
        }
    }
    modules
}

/// Output of API extraction: signatures keyed by fully qualified name,
/// the simplification map, and any files that failed to parse.
#[derive(Debug, Default)]
pub struct InventoryBuild {
    pub apis: BTreeMap<String, Vec<ApiSignature>>,
    pub simplify: BTreeMap<String, String>,
    pub parse_failures: Vec<String>,
}

/// Extracts every API definition and the re-export simplification map.
pub fn build_api_inventory(source_root: &Path) -> InventoryBuild {
    let mut build = InventoryBuild::default();
    let mut reexports: Vec<(String, String)> = Vec::new();
    let mut star_imports: Vec<(String, String)> = Vec::new(); // (importer module, source module)
    let mut modules = BTreeSet::new();

    for file in walk_sources(source_root) {
        let path = file.as_path();
        let ext = path.extension().and_then(|e| e.to_str());
        if !matches!(ext, Some("py") | Some("pyi")) {
            continue;
        }
        let Some(module_path) = module_path_for_file(source_root, path) else {
            continue;
        };
        if ext == Some("py") {
            modules.insert(module_path.clone());
        }
        let source = match fs::read_to_string(path) {
            Ok(s) => s,
            Err(_) => {
                build.parse_failures.push(path.display().to_string());
                continue;
            }
        };
        let suite = match parse_module(&source, &path.display().to_string()) {
            Ok(s) => s,
            Err(_) => {
                build.parse_failures.push(path.display().to_string());
                continue;
            }
        };
        let lines = LineMap::new(&source);
        collect_defs(
            &suite,
            &format!("{module_path}."),
            false,
            &lines,
            &mut build.apis,
        );

        let package = pysrc::package_of_file(source_root, path).unwrap_or_default();
        for record in pysrc::collect_imports(&suite, &lines) {
            match record {
                ImportRecord::From {
                    module,
                    level,
                    names,
                    line: _,
                } => {
                    let Some(abs) = resolve_relative(&package, level, &module) else {
                        continue;
                    };
                    if abs.is_empty() {
                        continue;
                    }
                    for name in &names {
                        if name.name == "*" {
                            star_imports.push((module_path.clone(), abs.clone()));
                        } else {
                            let bound = name.asname.as_ref().unwrap_or(&name.name);
                            let short = format!("{module_path}.{bound}");
                            let full = format!("{abs}.{}", name.name);
                            reexports.push((short, full));
                        }
                    }
                }
                ImportRecord::Plain {
                    module,
                    asname: Some(alias),
                    ..
                } => {
                    let short = format!("{module_path}.{alias}");
                    reexports.push((short, module));
                }
                ImportRecord::Plain { .. } => {}
            }
        }
    }

    // dedup overload lists that picked up identical definitions twice
    for sigs in build.apis.values_mut() {
        let mut seen = Vec::new();
        sigs.retain(|s| {
            if seen.contains(s) {
                false
            } else {
                seen.push(s.clone());
                true
            }
        });
    }

    build.simplify = resolve_simplifications(&build.apis, &modules, reexports, star_imports);
    build
}

fn walk_sources(root: &Path) -> Vec<PathBuf> {
    WalkDir::new(root)
        .sort_by_file_name()
        .into_iter()
        .filter_entry(|e| {
            if e.depth() == 0 || !e.file_type().is_dir() {
                return true;
            }
            e.file_name()
                .to_str()
                .map(|n| !is_excluded_dir(n))
                .unwrap_or(false)
        })
        .filter_map(|e| e.ok())
        .filter(|e| e.file_type().is_file())
        .map(|e| e.into_path())
        .collect()
}

/// Depth-first walk recording functions, classes, and assignments with
/// their enclosing-scope paths.
fn collect_defs(
    suite: &[ast::Stmt],
    prefix: &str,
    in_class: bool,
    lines: &LineMap,
    apis: &mut BTreeMap<String, Vec<ApiSignature>>,
) {
    for stmt in suite {
        match stmt {
            ast::Stmt::FunctionDef(f) => {
                let fqn = format!("{prefix}{}", f.name);
                let sig = signature_of(&f.args, lines.line_of_node(f), in_class);
                apis.entry(fqn.clone()).or_default().push(sig);
                collect_defs(&f.body, &format!("{fqn}."), false, lines, apis);
            }
            ast::Stmt::AsyncFunctionDef(f) => {
                let fqn = format!("{prefix}{}", f.name);
                let sig = signature_of(&f.args, lines.line_of_node(f), in_class);
                apis.entry(fqn.clone()).or_default().push(sig);
                collect_defs(&f.body, &format!("{fqn}."), false, lines, apis);
            }
            ast::Stmt::ClassDef(c) => {
                let fqn = format!("{prefix}{}", c.name);
                apis.entry(fqn.clone()).or_default().push(ApiSignature {
                    lineno: lines.line_of_node(c),
                    params: Vec::new(),
                    vararg: false,
                    kwarg: false,
                });
                collect_defs(&c.body, &format!("{fqn}."), true, lines, apis);
            }
            ast::Stmt::Assign(a) => {
                for target in &a.targets {
                    if let ast::Expr::Name(n) = target {
                        let fqn = format!("{prefix}{}", n.id);
                        apis.entry(fqn).or_default().push(ApiSignature {
                            lineno: lines.line_of_node(a),
                            params: Vec::new(),
                            vararg: false,
                            kwarg: false,
                        });
                    }
                }
            }
            ast::Stmt::AnnAssign(a) => {
                if let ast::Expr::Name(n) = &*a.target {
                    let fqn = format!("{prefix}{}", n.id);
                    apis.entry(fqn).or_default().push(ApiSignature {
                        lineno: lines.line_of_node(a),
                        params: Vec::new(),
                        vararg: false,
                        kwarg: false,
                    });
                }
            }
            // conditional definition blocks still define module names
            ast::Stmt::If(_) | ast::Stmt::Try(_) | ast::Stmt::TryStar(_) => {
                for body in pysrc::stmt_bodies(stmt) {
                    collect_defs(body, prefix, in_class, lines, apis);
                }
            }
            _ => {}
        }
    }
}

fn signature_of(args: &ast::Arguments, lineno: usize, in_class: bool) -> ApiSignature {
    let mut params = Vec::new();
    let positional = args.posonlyargs.iter().chain(args.args.iter());
    for (idx, arg) in positional.enumerate() {
        let name = arg.def.arg.as_str();
        // bound receivers are not part of the callable surface
        if idx == 0 && in_class && (name == "self" || name == "cls") {
            continue;
        }
        params.push(Param {
            name: name.to_string(),
            kind: ParamKind::Positional,
            has_default: arg.default.is_some(),
            annotation: arg.def.annotation.as_deref().and_then(annotation_text),
        });
    }
    for arg in &args.kwonlyargs {
        params.push(Param {
            name: arg.def.arg.to_string(),
            kind: ParamKind::KeywordOnly,
            has_default: arg.default.is_some(),
            annotation: arg.def.annotation.as_deref().and_then(annotation_text),
        });
    }
    ApiSignature {
        lineno,
        params,
        vararg: args.vararg.is_some(),
        kwarg: args.kwarg.is_some(),
    }
}

fn annotation_text(expr: &ast::Expr) -> Option<String> {
    match expr {
        ast::Expr::Constant(c) => match &c.value {
            ast::Constant::Str(s) => Some(s.to_string()),
            ast::Constant::None => Some("None".to_string()),
            _ => None,
        },
        _ => dotted_name(expr),
    }
}

/// Resolves re-export chains to their final targets and keeps only the
/// entries that land on a real API or module of this version.
fn resolve_simplifications(
    apis: &BTreeMap<String, Vec<ApiSignature>>,
    modules: &BTreeSet<String>,
    reexports: Vec<(String, String)>,
    star_imports: Vec<(String, String)>,
) -> BTreeMap<String, String> {
    let mut map: BTreeMap<String, String> = BTreeMap::new();
    for (short, full) in reexports {
        if short != full && !apis.contains_key(&short) {
            map.entry(short).or_insert(full);
        }
    }

    // Star re-exports surface the public names of the source module,
    // including names the source itself re-exported. Iterate to a small
    // fixed point so chained star imports resolve.
    for _round in 0..8 {
        let mut added = false;
        for (importer, source) in &star_imports {
            let source_prefix = format!("{source}.");
            let mut surfaced: Vec<(String, String)> = Vec::new();
            for api in apis.keys() {
                if let Some(tail) = api.strip_prefix(&source_prefix) {
                    if !tail.contains('.') && !tail.starts_with('_') {
                        surfaced.push((tail.to_string(), api.clone()));
                    }
                }
            }
            for (key, value) in map.clone() {
                if let Some(tail) = key.strip_prefix(&source_prefix) {
                    if !tail.contains('.') && !tail.starts_with('_') {
                        surfaced.push((tail.to_string(), value));
                    }
                }
            }
            for (tail, target) in surfaced {
                let short = format!("{importer}.{tail}");
                if short != target && !apis.contains_key(&short) && !map.contains_key(&short) {
                    map.insert(short, target);
                    added = true;
                }
            }
        }
        if !added {
            break;
        }
    }

    // chase chains: a value that is itself a shortened name resolves on
    let keys: Vec<String> = map.keys().cloned().collect();
    for key in keys {
        let mut seen = BTreeSet::new();
        let mut value = map[&key].clone();
        while let Some(next) = map.get(&value) {
            if !seen.insert(value.clone()) {
                break;
            }
            value = next.clone();
        }
        map.insert(key, value);
    }

    map.retain(|_, value| apis.contains_key(value) || modules.contains(value));
    map
}
