//! Persistent incremental state and stale-unit selection.
//!
//! The store keeps three tables: compilation units (timestamp and command
//! line at last successful transform), files (integer ids for normalized
//! paths), and unit-to-dependency relations with the dependency's
//! timestamp as seen by that unit. Per-relation timestamps make a shared
//! header that changed once re-select every dependent unit.
//!
//! The store is a single JSON file written atomically (write-then-rename)
//! at `<workdir>/.retrofit/state.db`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::compdb::{normalize_path, resolve_path, CompilationDatabase, CompileCommand};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct UnitRecord {
    pub id: u64,
    pub file_id: u64,
    /// Modification time (nanoseconds since epoch) of the unit file at
    /// the last successful transform.
    pub timestamp: u64,
    pub cmd_args: String,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct FileRecord {
    pub id: u64,
    pub path: String,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct RelationRecord {
    pub file_id: u64,
    pub dep_id: u64,
    pub dependency_timestamp: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
pub struct ProjectState {
    pub schema_version: u32,
    pub units: Vec<UnitRecord>,
    pub files: Vec<FileRecord>,
    pub relations: Vec<RelationRecord>,
}

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("state store {path}: {reason}")]
    Io { path: String, reason: String },
    #[error("state store is corrupt: {0}")]
    Corrupt(String),
    #[error("state store schema version {found} is newer than supported {supported}")]
    SchemaVersion { found: u32, supported: u32 },
}

pub fn state_path(workdir: &Path) -> PathBuf {
    workdir.join(".retrofit").join("state.db")
}

impl ProjectState {
    pub fn new() -> Self {
        ProjectState { schema_version: SCHEMA_VERSION, ..Default::default() }
    }

    /// Load the store, or start fresh when the file does not exist yet.
    pub fn load(path: &Path) -> Result<Self, StoreError> {
        let text = match fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Self::new()),
            Err(e) => {
                return Err(StoreError::Io {
                    path: path.display().to_string(),
                    reason: e.to_string(),
                })
            }
        };
        let state: ProjectState =
            serde_json::from_str(&text).map_err(|e| StoreError::Corrupt(e.to_string()))?;
        if state.schema_version > SCHEMA_VERSION {
            return Err(StoreError::SchemaVersion {
                found: state.schema_version,
                supported: SCHEMA_VERSION,
            });
        }
        Ok(state)
    }

    /// Persist atomically: serialize to a sibling temp file, then rename
    /// over the store, so an aborted run leaves the old state intact.
    pub fn save(&self, path: &Path) -> Result<(), StoreError> {
        let io_err = |e: std::io::Error| StoreError::Io {
            path: path.display().to_string(),
            reason: e.to_string(),
        };
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).map_err(io_err)?;
        }
        let text = serde_json::to_string_pretty(self)
            .map_err(|e| StoreError::Corrupt(e.to_string()))?;
        let tmp = path.with_extension("db.tmp");
        fs::write(&tmp, text).map_err(io_err)?;
        fs::rename(&tmp, path).map_err(io_err)?;
        Ok(())
    }

    pub fn file_id(&self, path: &str) -> Option<u64> {
        self.files.iter().find(|f| f.path == path).map(|f| f.id)
    }

    fn intern_file(&mut self, path: &str) -> u64 {
        if let Some(id) = self.file_id(path) {
            return id;
        }
        let id = self.files.iter().map(|f| f.id).max().unwrap_or(0) + 1;
        self.files.push(FileRecord { id, path: path.to_string() });
        id
    }

    pub fn unit_for(&self, file_id: u64) -> Option<&UnitRecord> {
        self.units.iter().find(|u| u.file_id == file_id)
    }

    fn relations_of(&self, file_id: u64) -> impl Iterator<Item = &RelationRecord> {
        self.relations.iter().filter(move |r| r.file_id == file_id)
    }
}

/// Modification time in nanoseconds since the epoch, if readable.
pub fn fs_mtime(path: &str) -> Option<u64> {
    let meta = fs::metadata(path).ok()?;
    let t = meta.modified().ok()?;
    let d = t.duration_since(std::time::UNIX_EPOCH).ok()?;
    Some(d.as_nanos().min(u64::MAX as u128) as u64)
}

/// Transitive closure of quoted-include dependencies of one unit,
/// flattened. The quoted form resolves against the including file's
/// directory first, then the `-I` search directories in order. System
/// includes and unresolvable names are treated as external. Cycles
/// terminate through the visited set.
pub fn scan_dependencies(
    unit_file: &str,
    include_dirs: &[String],
    read: &dyn Fn(&str) -> Option<String>,
) -> BTreeSet<String> {
    let mut deps = BTreeSet::new();
    let mut visited = BTreeSet::new();
    let mut queue = vec![unit_file.to_string()];
    visited.insert(unit_file.to_string());
    while let Some(cur) = queue.pop() {
        let Some(text) = read(&cur) else { continue };
        let cur_dir = parent_dir(&cur);
        for name in quoted_includes(&text) {
            let resolved = std::iter::once(cur_dir.as_str())
                .chain(include_dirs.iter().map(String::as_str))
                .map(|d| resolve_path(d, &name))
                .find(|p| read(p).is_some());
            let Some(dep) = resolved else { continue };
            deps.insert(dep.clone());
            if visited.insert(dep.clone()) {
                queue.push(dep);
            }
        }
    }
    deps.remove(unit_file);
    deps
}

fn parent_dir(path: &str) -> String {
    match path.rfind('/') {
        Some(0) => "/".to_string(),
        Some(i) => path[..i].to_string(),
        None => ".".to_string(),
    }
}

/// Targets of `#include "..."` lines; the `<...>` form is external.
fn quoted_includes(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    for line in text.lines() {
        let rest = line.trim_start();
        let Some(rest) = rest.strip_prefix('#') else { continue };
        let rest = rest.trim_start();
        let Some(rest) = rest.strip_prefix("include") else { continue };
        let rest = rest.trim_start();
        if let Some(stripped) = rest.strip_prefix('"') {
            if let Some(end) = stripped.find('"') {
                out.push(normalize_path(&stripped[..end]));
            }
        }
    }
    out
}

/// One stale compilation unit with the triggers that selected it.
#[derive(Debug, Clone)]
pub struct StaleInfo {
    /// Index into the compilation database's entry list.
    pub index: usize,
    pub reasons: Vec<String>,
}

/// Apply the five change triggers to every unit of the database.
pub fn select_stale(
    state: &ProjectState,
    db: &CompilationDatabase,
    scans: &HashMap<String, BTreeSet<String>>,
    mtime: &dyn Fn(&str) -> Option<u64>,
) -> Vec<StaleInfo> {
    let mut out = Vec::new();
    for (index, entry) in db.entries.iter().enumerate() {
        let reasons = unit_reasons(state, entry, scans, mtime);
        if !reasons.is_empty() {
            out.push(StaleInfo { index, reasons });
        }
    }
    out
}

fn unit_reasons(
    state: &ProjectState,
    entry: &CompileCommand,
    scans: &HashMap<String, BTreeSet<String>>,
    mtime: &dyn Fn(&str) -> Option<u64>,
) -> Vec<String> {
    let Some(file_id) = state.file_id(&entry.file) else {
        return vec!["new unit".to_string()];
    };
    let Some(unit) = state.unit_for(file_id) else {
        return vec!["new unit".to_string()];
    };
    let mut reasons = Vec::new();
    if mtime(&entry.file) != Some(unit.timestamp) {
        reasons.push("unit file modified".to_string());
    }
    if entry.command != unit.cmd_args {
        reasons.push("command line changed".to_string());
    }
    let empty = BTreeSet::new();
    let scanned = scans.get(&entry.file).unwrap_or(&empty);
    let recorded: BTreeMap<&str, u64> = state
        .relations_of(file_id)
        .filter_map(|r| {
            state
                .files
                .iter()
                .find(|f| f.id == r.dep_id)
                .map(|f| (f.path.as_str(), r.dependency_timestamp))
        })
        .collect();
    for dep in scanned {
        match recorded.get(dep.as_str()) {
            None => reasons.push(format!("new dependency {}", dep)),
            Some(&ts) if mtime(dep) != Some(ts) => {
                reasons.push(format!("dependency {} modified", dep))
            }
            Some(_) => {}
        }
    }
    for (dep, _) in &recorded {
        if !scanned.contains(*dep) {
            reasons.push(format!("dependency {} removed", dep));
        }
    }
    reasons
}

/// Record a set of successfully transformed units: refresh timestamps and
/// command lines and reconcile each unit's relations with its scan.
/// Failed units are simply not passed in, so they stay stale.
pub fn commit(
    state: &mut ProjectState,
    transformed: &[&CompileCommand],
    scans: &HashMap<String, BTreeSet<String>>,
    mtime: &dyn Fn(&str) -> Option<u64>,
) {
    for entry in transformed {
        let file_id = state.intern_file(&entry.file);
        let timestamp = mtime(&entry.file).unwrap_or(0);
        match state.units.iter_mut().find(|u| u.file_id == file_id) {
            Some(u) => {
                u.timestamp = timestamp;
                u.cmd_args = entry.command.clone();
            }
            None => {
                let id = state.units.iter().map(|u| u.id).max().unwrap_or(0) + 1;
                state.units.push(UnitRecord {
                    id,
                    file_id,
                    timestamp,
                    cmd_args: entry.command.clone(),
                });
            }
        }
        state.relations.retain(|r| r.file_id != file_id);
        let empty = BTreeSet::new();
        for dep in scans.get(&entry.file).unwrap_or(&empty) {
            let dep_id = state.intern_file(dep);
            state.relations.push(RelationRecord {
                file_id,
                dep_id,
                dependency_timestamp: mtime(dep).unwrap_or(0),
            });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(file: &str, command: &str) -> CompileCommand {
        CompileCommand {
            directory: "/p".to_string(),
            command: command.to_string(),
            file: file.to_string(),
        }
    }

    struct World {
        mtimes: HashMap<String, u64>,
        db: CompilationDatabase,
        scans: HashMap<String, BTreeSet<String>>,
        state: ProjectState,
    }

    /// Three units: u1 and u2 share `shared.h`, u3 uses `own.h`.
    fn world() -> World {
        let db = CompilationDatabase {
            entries: vec![
                entry("/p/u1.cpp", "cc -c u1.cpp"),
                entry("/p/u2.cpp", "cc -c u2.cpp"),
                entry("/p/u3.cpp", "cc -c u3.cpp"),
            ],
            warnings: Vec::new(),
        };
        let mut mtimes = HashMap::new();
        for f in ["/p/u1.cpp", "/p/u2.cpp", "/p/u3.cpp", "/p/shared.h", "/p/own.h"] {
            mtimes.insert(f.to_string(), 100);
        }
        let mut scans = HashMap::new();
        let dep = |d: &str| [d.to_string()].into_iter().collect::<BTreeSet<_>>();
        scans.insert("/p/u1.cpp".to_string(), dep("/p/shared.h"));
        scans.insert("/p/u2.cpp".to_string(), dep("/p/shared.h"));
        scans.insert("/p/u3.cpp".to_string(), dep("/p/own.h"));

        let mut state = ProjectState::new();
        let m = mtimes.clone();
        let all: Vec<&CompileCommand> = db.entries.iter().collect();
        commit(&mut state, &all, &scans, &|p| m.get(p).copied());
        World { mtimes, db, scans, state }
    }

    fn stale_files(w: &World) -> Vec<String> {
        let m = w.mtimes.clone();
        select_stale(&w.state, &w.db, &w.scans, &|p| m.get(p).copied())
            .into_iter()
            .map(|s| w.db.entries[s.index].file.clone())
            .collect()
    }

    #[test]
    fn unchanged_world_selects_nothing() {
        let w = world();
        assert!(stale_files(&w).is_empty());
    }

    #[test]
    fn trigger_unit_mtime() {
        let mut w = world();
        w.mtimes.insert("/p/u1.cpp".to_string(), 200);
        assert_eq!(stale_files(&w), vec!["/p/u1.cpp"]);
    }

    #[test]
    fn trigger_command_change() {
        let mut w = world();
        w.db.entries[0].command = "cc -O2 -c u1.cpp".to_string();
        assert_eq!(stale_files(&w), vec!["/p/u1.cpp"]);
    }

    #[test]
    fn trigger_shared_dependency_selects_all_dependents() {
        let mut w = world();
        w.mtimes.insert("/p/shared.h".to_string(), 300);
        assert_eq!(stale_files(&w), vec!["/p/u1.cpp", "/p/u2.cpp"]);
    }

    #[test]
    fn trigger_new_dependency() {
        let mut w = world();
        w.mtimes.insert("/p/extra.h".to_string(), 100);
        w.scans
            .get_mut("/p/u3.cpp")
            .unwrap()
            .insert("/p/extra.h".to_string());
        assert_eq!(stale_files(&w), vec!["/p/u3.cpp"]);
    }

    #[test]
    fn trigger_removed_dependency() {
        let mut w = world();
        w.scans.get_mut("/p/u2.cpp").unwrap().clear();
        assert_eq!(stale_files(&w), vec!["/p/u2.cpp"]);
    }

    #[test]
    fn new_unit_is_always_selected() {
        let mut w = world();
        w.db.entries.push(entry("/p/u4.cpp", "cc -c u4.cpp"));
        w.mtimes.insert("/p/u4.cpp".to_string(), 100);
        assert_eq!(stale_files(&w), vec!["/p/u4.cpp"]);
    }

    #[test]
    fn failed_unit_stays_stale_after_partial_commit() {
        let mut w = world();
        w.mtimes.insert("/p/u1.cpp".to_string(), 200);
        w.mtimes.insert("/p/u2.cpp".to_string(), 200);
        // Only u2 succeeded this run.
        let m = w.mtimes.clone();
        let ok = [&w.db.entries[1]];
        commit(&mut w.state, &ok, &w.scans, &|p| m.get(p).copied());
        assert_eq!(stale_files(&w), vec!["/p/u1.cpp"]);
    }

    #[test]
    fn removed_dependency_commit_keeps_file_record() {
        let mut w = world();
        w.scans.get_mut("/p/u2.cpp").unwrap().clear();
        let m = w.mtimes.clone();
        let ok = [&w.db.entries[1]];
        commit(&mut w.state, &ok, &w.scans, &|p| m.get(p).copied());
        let u2 = w.state.file_id("/p/u2.cpp").unwrap();
        assert_eq!(w.state.relations_of(u2).count(), 0);
        assert!(w.state.file_id("/p/shared.h").is_some());
        assert!(stale_files(&w).is_empty());
    }

    #[test]
    fn include_closure_is_flat_and_cycle_safe() {
        let mut fs: HashMap<String, String> = HashMap::new();
        fs.insert("/p/a.cpp".into(), "#include \"b.h\"\n".into());
        fs.insert("/p/b.h".into(), "#include \"c.h\"\n".into());
        fs.insert("/p/c.h".into(), "int c;\n".into());
        let read = |p: &str| fs.get(p).cloned();
        let deps = scan_dependencies("/p/a.cpp", &["/p".to_string()], &read);
        let expect: BTreeSet<String> = ["/p/b.h", "/p/c.h"].iter().map(|s| s.to_string()).collect();
        assert_eq!(deps, expect);

        let mut fs2: HashMap<String, String> = HashMap::new();
        fs2.insert("/p/u.cpp".into(), "#include \"a.h\"\n".into());
        fs2.insert("/p/a.h".into(), "#include \"b.h\"\n".into());
        fs2.insert("/p/b.h".into(), "#include \"a.h\"\n".into());
        let read2 = |p: &str| fs2.get(p).cloned();
        let deps = scan_dependencies("/p/u.cpp", &[], &read2);
        let expect: BTreeSet<String> = ["/p/a.h", "/p/b.h"].iter().map(|s| s.to_string()).collect();
        assert_eq!(deps, expect);
    }

    #[test]
    fn no_includes_means_no_dependencies() {
        let read = |p: &str| {
            (p == "/p/a.cpp").then(|| "int main() { return 0; }\n".to_string())
        };
        assert!(scan_dependencies("/p/a.cpp", &[], &read).is_empty());
    }

    #[test]
    fn store_roundtrip_and_schema_guard() {
        let dir = tempfile::tempdir().unwrap();
        let path = state_path(dir.path());
        let w = world();
        w.state.save(&path).unwrap();
        let loaded = ProjectState::load(&path).unwrap();
        assert_eq!(loaded.units, w.state.units);
        assert_eq!(loaded.files, w.state.files);
        assert_eq!(loaded.relations, w.state.relations);

        let mut newer = w.state.clone();
        newer.schema_version = SCHEMA_VERSION + 1;
        newer.save(&path).unwrap();
        assert!(matches!(
            ProjectState::load(&path),
            Err(StoreError::SchemaVersion { .. })
        ));
    }

    #[test]
    fn missing_store_starts_fresh() {
        let dir = tempfile::tempdir().unwrap();
        let s = ProjectState::load(&state_path(dir.path())).unwrap();
        assert!(s.units.is_empty());
        assert_eq!(s.schema_version, SCHEMA_VERSION);
    }
}
