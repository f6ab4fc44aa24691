//! Compilation database ingestion.
//!
//! The database is a JSON array of `{directory, command, file}` objects,
//! one per compilation unit. Paths are normalized lexically: separators
//! unified to `/`, `.` and `..` collapsed, relative files resolved
//! against the entry's directory. Comparison is byte-wise after
//! normalization.

use std::fmt;
use std::path::Path;

use serde_json::Value;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompileCommand {
    pub directory: String,
    pub command: String,
    /// Absolute normalized path of the unit's source file.
    pub file: String,
}

#[derive(Debug, Default)]
pub struct CompilationDatabase {
    pub entries: Vec<CompileCommand>,
    /// Non-fatal findings (extra keys, suspicious commands).
    pub warnings: Vec<String>,
}

#[derive(Debug, Error)]
pub enum CompdbError {
    #[error("cannot read compilation database {path}: {reason}")]
    UnreadableFile { path: String, reason: String },
    #[error("compilation database root is not an array")]
    NotAnArray,
    #[error("entry {index} is missing key `{key}`")]
    MissingKey { index: usize, key: &'static str },
    #[error("duplicate compilation unit {path}")]
    DuplicateUnit { path: String },
}

/// Lexically normalize a path: `/` separators, `.` and `..` collapsed.
/// Normalization is a fixpoint: applying it twice changes nothing.
pub fn normalize_path(p: &str) -> String {
    let unified = p.replace('\\', "/");
    let (prefix, rest) = split_prefix(&unified);
    let mut parts: Vec<&str> = Vec::new();
    for comp in rest.split('/') {
        match comp {
            "" | "." => {}
            ".." => {
                if matches!(parts.last(), Some(&"..")) || (prefix.is_empty() && parts.is_empty())
                {
                    parts.push("..");
                } else if !parts.is_empty() {
                    parts.pop();
                }
                // `..` at an absolute root collapses to the root itself.
            }
            c => parts.push(c),
        }
    }
    let body = parts.join("/");
    if prefix.is_empty() && body.is_empty() {
        ".".to_string()
    } else {
        format!("{}{}", prefix, body)
    }
}

/// Root prefix of a path: `/`, or a drive like `c:/`, else empty.
fn split_prefix(p: &str) -> (String, &str) {
    let b = p.as_bytes();
    if b.first() == Some(&b'/') {
        ("/".to_string(), &p[1..])
    } else if b.len() >= 2 && b[0].is_ascii_alphabetic() && b[1] == b':' {
        let rest = p[2..].strip_prefix('/').unwrap_or(&p[2..]);
        (format!("{}:/", &p[..1]), rest)
    } else {
        (String::new(), p)
    }
}

pub fn is_absolute_path(p: &str) -> bool {
    let b = p.as_bytes();
    b.first() == Some(&b'/')
        || b.first() == Some(&b'\\')
        || (b.len() >= 2 && b[0].is_ascii_alphabetic() && b[1] == b':')
}

/// Resolve `p` against `base` unless it is already absolute.
pub fn resolve_path(base: &str, p: &str) -> String {
    if is_absolute_path(p) {
        normalize_path(p)
    } else {
        normalize_path(&format!("{}/{}", base, p))
    }
}

pub fn load_database(path: &Path) -> Result<CompilationDatabase, CompdbError> {
    let text = std::fs::read_to_string(path).map_err(|e| CompdbError::UnreadableFile {
        path: path.display().to_string(),
        reason: e.to_string(),
    })?;
    parse_database(&text)
}

/// Parse database text; separated from file IO for testability.
pub fn parse_database(text: &str) -> Result<CompilationDatabase, CompdbError> {
    let value: Value = serde_json::from_str(text).map_err(|e| CompdbError::UnreadableFile {
        path: "<database>".to_string(),
        reason: e.to_string(),
    })?;
    let Value::Array(items) = value else {
        return Err(CompdbError::NotAnArray);
    };
    let mut db = CompilationDatabase::default();
    let mut seen: Vec<String> = Vec::new();
    for (index, item) in items.iter().enumerate() {
        let Value::Object(obj) = item else {
            return Err(CompdbError::MissingKey { index, key: "directory" });
        };
        let get = |key: &'static str| -> Result<&str, CompdbError> {
            obj.get(key)
                .and_then(Value::as_str)
                .ok_or(CompdbError::MissingKey { index, key })
        };
        let directory = normalize_path(get("directory")?);
        let command = get("command")?.to_string();
        let file = resolve_path(&directory, get("file")?);
        for key in obj.keys() {
            if !matches!(key.as_str(), "directory" | "command" | "file") {
                db.warnings
                    .push(format!("entry {}: ignoring unknown key `{}`", index, key));
            }
        }
        if directory.is_empty() {
            db.warnings.push(format!("entry {}: empty directory", index));
        }
        let basename = file.rsplit('/').next().unwrap_or(&file);
        if !command.contains(basename) {
            db.warnings.push(format!(
                "entry {}: command does not mention `{}`",
                index, basename
            ));
        }
        if seen.contains(&file) {
            return Err(CompdbError::DuplicateUnit { path: file });
        }
        seen.push(file.clone());
        db.entries.push(CompileCommand { directory, command, file });
    }
    Ok(db)
}

/// Include search directories for one unit: the unit's own directory
/// first, then every `-I` flag in command order.
pub fn extract_include_dirs(cmd: &CompileCommand) -> Vec<String> {
    let mut dirs = vec![cmd.directory.clone()];
    let mut tokens = cmd.command.split_whitespace().peekable();
    while let Some(tok) = tokens.next() {
        let dir = if tok == "-I" {
            tokens.next()
        } else {
            tok.strip_prefix("-I").filter(|d| !d.is_empty())
        };
        if let Some(d) = dir {
            let resolved = resolve_path(&cmd.directory, d);
            if !dirs.contains(&resolved) {
                dirs.push(resolved);
            }
        }
    }
    dirs
}

impl fmt::Display for CompileCommand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.file)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plain_entry() {
        let db = parse_database(
            r#"[{"directory":"c:/work/projectDir","command":"cl.exe -c Source1.cpp -o2","file":"c:/work/projectDir/Source1.cpp"}]"#,
        )
        .unwrap();
        assert_eq!(db.entries.len(), 1);
        assert_eq!(db.entries[0].file, "c:/work/projectDir/Source1.cpp");
        assert!(db.warnings.is_empty());
    }

    #[test]
    fn empty_array_is_valid() {
        let db = parse_database("[]").unwrap();
        assert!(db.entries.is_empty());
    }

    #[test]
    fn relative_file_resolves_against_directory() {
        let db = parse_database(
            r#"[{"directory":"/p","command":"cc -c a.cpp","file":"sub/../a.cpp"}]"#,
        )
        .unwrap();
        assert_eq!(db.entries[0].file, "/p/a.cpp");
    }

    #[test]
    fn missing_key_reports_index_and_key() {
        let err = parse_database(r#"[{"directory":"/p","command":"cc"}]"#).unwrap_err();
        match err {
            CompdbError::MissingKey { index: 0, key: "file" } => {}
            other => panic!("unexpected error: {:?}", other),
        }
    }

    #[test]
    fn duplicate_unit_is_rejected() {
        let err = parse_database(
            r#"[{"directory":"/p","command":"cc -c a.cpp","file":"a.cpp"},
                {"directory":"/p","command":"cc -c a.cpp","file":"sub/../a.cpp"}]"#,
        )
        .unwrap_err();
        assert!(matches!(err, CompdbError::DuplicateUnit { .. }));
    }

    #[test]
    fn non_array_root_is_rejected() {
        assert!(matches!(parse_database("{}"), Err(CompdbError::NotAnArray)));
    }

    #[test]
    fn extra_keys_warn_but_load() {
        let db = parse_database(
            r#"[{"directory":"/p","command":"cc -c a.cpp","file":"a.cpp","output":"a.o"}]"#,
        )
        .unwrap();
        assert_eq!(db.entries.len(), 1);
        assert_eq!(db.warnings.len(), 1);
        assert!(db.warnings[0].contains("output"));
    }

    #[test]
    fn include_dirs_in_command_order() {
        let cmd = CompileCommand {
            directory: "/p".to_string(),
            command: "cc -Iinc -c a.cpp".to_string(),
            file: "/p/a.cpp".to_string(),
        };
        assert_eq!(extract_include_dirs(&cmd), vec!["/p", "/p/inc"]);

        let cmd = CompileCommand {
            directory: "/p".to_string(),
            command: "cc -c a.cpp".to_string(),
            file: "/p/a.cpp".to_string(),
        };
        assert_eq!(extract_include_dirs(&cmd), vec!["/p"]);

        let cmd = CompileCommand {
            directory: "/p".to_string(),
            command: "cc -I /abs -Irel -c a.cpp".to_string(),
            file: "/p/a.cpp".to_string(),
        };
        assert_eq!(extract_include_dirs(&cmd), vec!["/p", "/abs", "/p/rel"]);
    }

    #[test]
    fn normalization_is_a_fixpoint() {
        for p in ["c:\\work\\..\\work\\a.cpp", "/a/./b/../c", "x/../../y", ".."] {
            let once = normalize_path(p);
            assert_eq!(normalize_path(&once), once);
        }
        assert_eq!(normalize_path("c:\\work\\..\\work\\a.cpp"), "c:/work/a.cpp");
        assert_eq!(normalize_path("/a/./b/../c"), "/a/c");
        assert_eq!(normalize_path("x/../../y"), "../y");
    }
}
