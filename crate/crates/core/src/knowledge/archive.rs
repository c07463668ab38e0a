//! Source archive unpacking: sdists (`.tar.gz`) and wheels (`.zip`).

use std::fs;
use std::io::Cursor;
use std::path::{Path, PathBuf};

pub fn unpack_archive(bytes: &[u8], filename: &str, dest: &Path) -> Result<(), String> {
    let lower = filename.to_ascii_lowercase();
    if lower.ends_with(".tar.gz") || lower.ends_with(".tgz") {
        let gz = flate2::read::GzDecoder::new(Cursor::new(bytes));
        let mut archive = tar::Archive::new(gz);
        archive.unpack(dest).map_err(|e| e.to_string())
    } else if lower.ends_with(".zip") || lower.ends_with(".whl") {
        let mut archive = zip::ZipArchive::new(Cursor::new(bytes)).map_err(|e| e.to_string())?;
        archive.extract(dest).map_err(|e| e.to_string())
    } else if lower.ends_with(".tar.bz2") || lower.ends_with(".tar") {
        Err(format!("unsupported archive format: {filename}"))
    } else {
        Err(format!("unrecognized archive format: {filename}"))
    }
}

/// Picks the directory that actually contains the package code: descends
/// a single wrapping directory (`name-version/` in sdists) and an `src/`
/// layout level when present.
pub fn normalize_source_root(unpacked: &Path) -> PathBuf {
    let mut root = unpacked.to_path_buf();
    for _ in 0..2 {
        if has_python_code(&root) {
            return root;
        }
        let subdirs: Vec<PathBuf> = fs::read_dir(&root)
            .into_iter()
            .flatten()
            .filter_map(|e| e.ok())
            .filter(|e| e.file_type().map(|t| t.is_dir()).unwrap_or(false))
            .map(|e| e.path())
            .filter(|p| {
                let name = p.file_name().and_then(|n| n.to_str()).unwrap_or("");
                !name.ends_with(".dist-info") && !name.ends_with(".data")
            })
            .collect();
        if subdirs.len() == 1 {
            root = subdirs.into_iter().next().unwrap();
        } else {
            break;
        }
    }
    let src = root.join("src");
    if !has_python_code(&root) && has_python_code(&src) {
        return src;
    }
    root
}

fn has_python_code(dir: &Path) -> bool {
    let Ok(entries) = fs::read_dir(dir) else {
        return false;
    };
    for entry in entries.filter_map(|e| e.ok()) {
        let path = entry.path();
        if path.extension().and_then(|e| e.to_str()) == Some("py") {
            return true;
        }
        if path.is_dir() && path.join("__init__.py").is_file() {
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;
    use tempfile::TempDir;

    fn make_targz(entries: &[(&str, &str)]) -> Vec<u8> {
        let mut builder = tar::Builder::new(flate2::write::GzEncoder::new(
            Vec::new(),
            flate2::Compression::default(),
        ));
        for (path, content) in entries {
            let mut header = tar::Header::new_gnu();
            header.set_size(content.len() as u64);
            header.set_mode(0o644);
            header.set_cksum();
            builder.append_data(&mut header, path, content.as_bytes()).unwrap();
        }
        builder.into_inner().unwrap().finish().unwrap()
    }

    fn make_zip(entries: &[(&str, &str)]) -> Vec<u8> {
        let mut buf = Cursor::new(Vec::new());
        {
            let mut writer = zip::ZipWriter::new(&mut buf);
            let options = zip::write::SimpleFileOptions::default();
            for (path, content) in entries {
                writer.start_file(*path, options).unwrap();
                writer.write_all(content.as_bytes()).unwrap();
            }
            writer.finish().unwrap();
        }
        buf.into_inner()
    }

    #[test]
    fn sdist_unpacks_and_normalizes_through_wrapper_dir() {
        let bytes = make_targz(&[
            ("demo-1.0/PKG-INFO", "Name: demo"),
            ("demo-1.0/demo/__init__.py", ""),
            ("demo-1.0/demo/core.py", "x = 1\n"),
        ]);
        let dir = TempDir::new().unwrap();
        unpack_archive(&bytes, "demo-1.0.tar.gz", dir.path()).unwrap();
        let root = normalize_source_root(dir.path());
        assert!(root.join("demo/core.py").is_file());
    }

    #[test]
    fn src_layout_normalizes() {
        let bytes = make_targz(&[
            ("demo-1.0/setup.py", ""),
            ("demo-1.0/src/demo/__init__.py", ""),
        ]);
        let dir = TempDir::new().unwrap();
        unpack_archive(&bytes, "demo-1.0.tar.gz", dir.path()).unwrap();
        let root = normalize_source_root(dir.path());
        assert!(root.join("demo/__init__.py").is_file());
    }

    #[test]
    fn wheel_unpacks_flat() {
        let bytes = make_zip(&[
            ("demo/__init__.py", ""),
            ("demo/core.py", "x = 1\n"),
            ("demo-1.0.dist-info/METADATA", "Name: demo"),
        ]);
        let dir = TempDir::new().unwrap();
        unpack_archive(&bytes, "demo-1.0-py3-none-any.whl", dir.path()).unwrap();
        let root = normalize_source_root(dir.path());
        assert!(root.join("demo/core.py").is_file());
    }

    #[test]
    fn unknown_format_rejected() {
        assert!(unpack_archive(b"x", "demo.rar", Path::new("/tmp")).is_err());
    }
}
