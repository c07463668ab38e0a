//! Shared helpers for analyzing Python source files: parsing, line
//! mapping, recursive statement traversal, import collection, and
//! module-path mapping between files and dotted names.

use std::path::{Component, Path, PathBuf};

use rustpython_parser::ast::{self, Ranged};
use rustpython_parser::Parse;

/// Parses a Python module (`.py` or `.pyi` source).
pub fn parse_module(source: &str, path_hint: &str) -> Result<ast::Suite, String> {
    ast::Suite::parse(source, path_hint).map_err(|e| e.to_string())
}

/// Byte-offset to 1-based line number mapping for one source file.
pub struct LineMap {
    line_starts: Vec<usize>,
}

impl LineMap {
    pub fn new(source: &str) -> LineMap {
        let mut line_starts = vec![0usize];
        for (idx, b) in source.bytes().enumerate() {
            if b == b'\n' {
                line_starts.push(idx + 1);
            }
        }
        LineMap { line_starts }
    }

    pub fn line_of(&self, offset: usize) -> usize {
        match self.line_starts.binary_search(&offset) {
            Ok(i) => i + 1,
            Err(i) => i,
        }
    }

    pub fn line_of_node(&self, node: &impl Ranged) -> usize {
        self.line_of(u32::from(node.start()) as usize)
    }
}

/// One name bound by a from-import statement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FromName {
    pub name: String,
    pub asname: Option<String>,
}

/// A single import statement, flattened per bound alias for plain imports.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ImportRecord {
    /// `import a.b [as x]`
    Plain {
        module: String,
        asname: Option<String>,
        line: usize,
    },
    /// `from [...]a.b import x [as y], z` — `module` may be empty for
    /// `from . import x`; `level` counts leading dots.
    From {
        module: String,
        level: usize,
        names: Vec<FromName>,
        line: usize,
    },
}

/// Collects every import statement in the module, including those nested
/// inside functions, classes, and conditional blocks.
pub fn collect_imports(suite: &[ast::Stmt], lines: &LineMap) -> Vec<ImportRecord> {
    let mut out = Vec::new();
    walk_statements(suite, &mut |stmt| match stmt {
        ast::Stmt::Import(imp) => {
            let line = lines.line_of_node(imp);
            for alias in &imp.names {
                out.push(ImportRecord::Plain {
                    module: alias.name.to_string(),
                    asname: alias.asname.as_ref().map(|a| a.to_string()),
                    line,
                });
            }
        }
        ast::Stmt::ImportFrom(imp) => {
            let line = lines.line_of_node(imp);
            let names = imp
                .names
                .iter()
                .map(|alias| FromName {
                    name: alias.name.to_string(),
                    asname: alias.asname.as_ref().map(|a| a.to_string()),
                })
                .collect();
            out.push(ImportRecord::From {
                module: imp.module.as_ref().map(|m| m.to_string()).unwrap_or_default(),
                level: imp.level.map(|l| l.to_u32() as usize).unwrap_or(0),
                names,
                line,
            });
        }
        _ => {}
    });
    out
}

/// Depth-first walk over every statement, descending into all nested
/// bodies (functions, classes, loops, conditionals, try blocks, with
/// blocks, match arms).
pub fn walk_statements<'a>(suite: &'a [ast::Stmt], visit: &mut impl FnMut(&'a ast::Stmt)) {
    for stmt in suite {
        visit(stmt);
        for body in stmt_bodies(stmt) {
            walk_statements(body, visit);
        }
    }
}

/// The nested statement bodies of a compound statement.
pub fn stmt_bodies(stmt: &ast::Stmt) -> Vec<&[ast::Stmt]> {
    match stmt {
        ast::Stmt::FunctionDef(s) => vec![&s.body],
        ast::Stmt::AsyncFunctionDef(s) => vec![&s.body],
        ast::Stmt::ClassDef(s) => vec![&s.body],
        ast::Stmt::If(s) => vec![&s.body, &s.orelse],
        ast::Stmt::While(s) => vec![&s.body, &s.orelse],
        ast::Stmt::For(s) => vec![&s.body, &s.orelse],
        ast::Stmt::AsyncFor(s) => vec![&s.body, &s.orelse],
        ast::Stmt::With(s) => vec![&s.body],
        ast::Stmt::AsyncWith(s) => vec![&s.body],
        ast::Stmt::Try(s) => {
            let mut bodies = vec![s.body.as_slice(), s.orelse.as_slice(), s.finalbody.as_slice()];
            for handler in &s.handlers {
                let ast::ExceptHandler::ExceptHandler(h) = handler;
                bodies.push(&h.body);
            }
            bodies
        }
        ast::Stmt::TryStar(s) => {
            let mut bodies = vec![s.body.as_slice(), s.orelse.as_slice(), s.finalbody.as_slice()];
            for handler in &s.handlers {
                let ast::ExceptHandler::ExceptHandler(h) = handler;
                bodies.push(&h.body);
            }
            bodies
        }
        ast::Stmt::Match(s) => s.cases.iter().map(|c| c.body.as_slice()).collect(),
        _ => vec![],
    }
}

/// Renders a plain `Name`/`Attribute` chain as a dotted path. Returns
/// `None` for anything else (calls, subscripts, literals).
pub fn dotted_name(expr: &ast::Expr) -> Option<String> {
    match expr {
        ast::Expr::Name(n) => Some(n.id.to_string()),
        ast::Expr::Attribute(a) => {
            let base = dotted_name(&a.value)?;
            Some(format!("{base}.{}", a.attr.as_str()))
        }
        _ => None,
    }
}

/// Directory names excluded from module scanning: caches, tests,
/// documentation, build artifacts, and hidden directories.
pub fn is_excluded_dir(name: &str) -> bool {
    matches!(
        name,
        "__pycache__" | "test" | "tests" | "testing" | "doc" | "docs" | "build" | "dist"
            | "examples" | "benchmarks"
    ) || name.starts_with('.')
}

/// Maps a file under `root` to its dotted module path. `pkg/mod.py`
/// becomes `pkg.mod`; `pkg/__init__.py` becomes `pkg`. Returns `None`
/// for files outside `root` or without a `.py`/`.pyi` extension.
pub fn module_path_for_file(root: &Path, file: &Path) -> Option<String> {
    let rel = file.strip_prefix(root).ok()?;
    let mut parts: Vec<String> = Vec::new();
    for comp in rel.components() {
        match comp {
            Component::Normal(os) => parts.push(os.to_string_lossy().into_owned()),
            _ => return None,
        }
    }
    let last = parts.pop()?;
    let stem = last.strip_suffix(".py").or_else(|| last.strip_suffix(".pyi"))?;
    if stem != "__init__" {
        parts.push(stem.to_string());
    }
    if parts.is_empty() {
        return None;
    }
    Some(parts.join("."))
}

/// Resolves a dotted module path to an existing file under `root`,
/// trying `a/b.py`, `a/b/__init__.py`, then the stub equivalents.
pub fn file_for_module_path(root: &Path, dotted: &str) -> Option<PathBuf> {
    let rel: PathBuf = dotted.split('.').collect();
    for candidate in [
        root.join(rel.with_extension("py")),
        root.join(&rel).join("__init__.py"),
        root.join(rel.with_extension("pyi")),
        root.join(&rel).join("__init__.pyi"),
    ] {
        if candidate.is_file() {
            return Some(candidate);
        }
    }
    None
}

/// The package position of a module: for `pkg/sub/mod.py` it is
/// `pkg.sub`; for `pkg/sub/__init__.py` it is `pkg.sub` itself.
pub fn package_of_file(root: &Path, file: &Path) -> Option<String> {
    let dotted = module_path_for_file(root, file)?;
    if file.file_name().and_then(|n| n.to_str()).is_some_and(|n| {
        n == "__init__.py" || n == "__init__.pyi"
    }) {
        Some(dotted)
    } else {
        match dotted.rsplit_once('.') {
            Some((pkg, _)) => Some(pkg.to_string()),
            None => Some(String::new()),
        }
    }
}

/// Resolves a relative import (`level` leading dots, optional module
/// suffix) against the importing file's package position. Returns the
/// absolute dotted path, or `None` when the dots escape the tree.
pub fn resolve_relative(package: &str, level: usize, module: &str) -> Option<String> {
    if level == 0 {
        return Some(module.to_string());
    }
    let mut parts: Vec<&str> = if package.is_empty() {
        Vec::new()
    } else {
        package.split('.').collect()
    };
    for _ in 1..level {
        parts.pop()?;
    }
    if parts.is_empty() {
        return None;
    }
    let mut base = parts.join(".");
    if !module.is_empty() {
        base.push('.');
        base.push_str(module);
    }
    Some(base)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_map_basics() {
        let map = LineMap::new("a\nbb\nccc\n");
        assert_eq!(map.line_of(0), 1);
        assert_eq!(map.line_of(1), 1);
        assert_eq!(map.line_of(2), 2);
        assert_eq!(map.line_of(5), 3);
    }

    #[test]
    fn collects_nested_imports() {
        let src = "import a.b as x\nif True:\n    from ..c import d, e as f\n";
        let suite = parse_module(src, "<t>").unwrap();
        let lines = LineMap::new(src);
        let imports = collect_imports(&suite, &lines);
        assert_eq!(imports.len(), 2);
        assert_eq!(
            imports[0],
            ImportRecord::Plain {
                module: "a.b".into(),
                asname: Some("x".into()),
                line: 1
            }
        );
        match &imports[1] {
            ImportRecord::From {
                module,
                level,
                names,
                line,
            } => {
                assert_eq!(module, "c");
                assert_eq!(*level, 2);
                assert_eq!(*line, 3);
                assert_eq!(names.len(), 2);
                assert_eq!(names[1].asname.as_deref(), Some("f"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn module_paths_round_trip() {
        let root = Path::new("/src");
        assert_eq!(
            module_path_for_file(root, Path::new("/src/pkg/mod.py")).unwrap(),
            "pkg.mod"
        );
        assert_eq!(
            module_path_for_file(root, Path::new("/src/pkg/__init__.py")).unwrap(),
            "pkg"
        );
        assert_eq!(module_path_for_file(root, Path::new("/src/top.py")).unwrap(), "top");
        assert!(module_path_for_file(root, Path::new("/src/pkg/data.txt")).is_none());
    }

    #[test]
    fn relative_resolution() {
        // from . import x  (in pkg/sub/mod.py, package position pkg.sub)
        assert_eq!(resolve_relative("pkg.sub", 1, "x").unwrap(), "pkg.sub.x");
        // from .. import y
        assert_eq!(resolve_relative("pkg.sub", 2, "y").unwrap(), "pkg.y");
        // from .mod import z — module part only
        assert_eq!(resolve_relative("pkg", 1, "mod").unwrap(), "pkg.mod");
        // escaping the tree
        assert_eq!(resolve_relative("pkg", 2, "x"), None);
    }

    #[test]
    fn dotted_names() {
        let src = "a.b.c\nf(x).g\n";
        let suite = parse_module(src, "<t>").unwrap();
        let exprs: Vec<_> = suite
            .iter()
            .filter_map(|s| match s {
                ast::Stmt::Expr(e) => Some(&*e.value),
                _ => None,
            })
            .collect();
        assert_eq!(dotted_name(exprs[0]).unwrap(), "a.b.c");
        assert_eq!(dotted_name(exprs[1]), None);
    }
}
