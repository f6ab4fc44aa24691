//! End-to-end run orchestration: mirror the project tree into the work
//! directory, transform stale units across a worker pool, write outputs
//! and trace sidecars, then commit the incremental state.
//!
//! Only compilation units named by the database are rewritten; headers
//! and non-source assets are mirrored verbatim. A unit's output is
//! written only after its whole phase list succeeded, so a failed unit
//! leaves its mirrored copy untouched and stays stale for the next run.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::time::Instant;

use thiserror::Error;

use crate::compdb::{self, CompdbError, CompileCommand};
use crate::incremental::{self, ProjectState, StoreError};
use crate::syntax::edit::Feature;
use crate::traceability;
use crate::transforms::{run_phases, UnitOutcome};

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub project_root: PathBuf,
    pub compdb_path: PathBuf,
    pub workdir: PathBuf,
    pub jobs: usize,
    pub force_full: bool,
    pub fail_fast: bool,
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Compdb(#[from] CompdbError),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("cannot copy {path}: {reason}")]
    CopyFailure { path: String, reason: String },
    #[error("{path}: {reason}")]
    Io { path: String, reason: String },
    #[error("invalid configuration: {0}")]
    BadConfig(String),
}

/// Per-unit result kept for the summary and the exit status.
#[derive(Debug)]
pub struct UnitReport {
    pub file: String,
    pub ok: bool,
    pub skipped_by_fail_fast: bool,
    pub warnings: usize,
    pub diagnostics: Vec<String>,
    pub phase_millis: Vec<(&'static str, u128)>,
    pub feature_edits: BTreeMap<Feature, usize>,
}

#[derive(Debug, Default)]
pub struct RunSummary {
    pub transformed: usize,
    pub skipped: usize,
    pub failed: usize,
    /// Aggregated wall time per phase, in pipeline order of first sight.
    pub phase_millis: Vec<(&'static str, u128)>,
    pub phase_edits: Vec<(&'static str, usize)>,
    pub feature_edits: BTreeMap<Feature, usize>,
    pub total_millis: u128,
    pub units: Vec<UnitReport>,
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> PipelineError + '_ {
    move |e| PipelineError::Io { path: path.display().to_string(), reason: e.to_string() }
}

/// Path of `file` (an absolute normalized unit or dependency path)
/// inside the mirrored tree under `workdir`.
pub fn mirror_path(config: &RunConfig, file: &str) -> Result<PathBuf, PipelineError> {
    let root = compdb::normalize_path(&config.project_root.to_string_lossy());
    let prefix = format!("{}/", root.trim_end_matches('/'));
    let rel = file.strip_prefix(&prefix).ok_or_else(|| PipelineError::BadConfig(format!(
        "{} is outside the project root {}",
        file, root
    )))?;
    Ok(config.workdir.join(rel))
}

fn copy_one(src: &Path, dst: &Path) -> Result<(), PipelineError> {
    let fail = |e: std::io::Error| PipelineError::CopyFailure {
        path: src.display().to_string(),
        reason: e.to_string(),
    };
    if let Some(dir) = dst.parent() {
        fs::create_dir_all(dir).map_err(fail)?;
    }
    fs::copy(src, dst).map_err(fail)?;
    Ok(())
}

#[derive(Debug, Default)]
pub struct MirrorReport {
    pub copied: usize,
}

/// Populate the work directory. A first (or forced) run copies the whole
/// hierarchy; a later run refreshes only the given files, so untouched
/// mirrored files keep their timestamps.
pub fn mirror_tree(
    config: &RunConfig,
    full: bool,
    refresh: &BTreeSet<String>,
) -> Result<MirrorReport, PipelineError> {
    let mut report = MirrorReport::default();
    if full {
        for entry in walkdir::WalkDir::new(&config.project_root) {
            let entry = entry.map_err(|e| PipelineError::CopyFailure {
                path: config.project_root.display().to_string(),
                reason: e.to_string(),
            })?;
            if !entry.file_type().is_file() {
                continue;
            }
            let abs = compdb::normalize_path(&entry.path().to_string_lossy());
            let dst = mirror_path(config, &abs)?;
            copy_one(entry.path(), &dst)?;
            report.copied += 1;
        }
    } else {
        for file in refresh {
            let dst = mirror_path(config, file)?;
            copy_one(Path::new(file), &dst)?;
            report.copied += 1;
        }
    }
    Ok(report)
}

struct UnitTask {
    index: usize,
    entry: CompileCommand,
}

enum UnitRun {
    Done(Box<UnitOutcome>, u128),
    Skipped,
    ReadError(String),
}

fn process_unit(task: &UnitTask) -> UnitRun {
    let started = Instant::now();
    let src = match fs::read(&task.entry.file) {
        Ok(b) => b,
        Err(e) => return UnitRun::ReadError(e.to_string()),
    };
    let outcome = run_phases(&src);
    UnitRun::Done(Box::new(outcome), started.elapsed().as_millis())
}

#[cfg(feature = "parallel")]
fn run_units(tasks: &[UnitTask], jobs: usize, fail_fast: bool) -> Vec<UnitRun> {
    use rayon::prelude::*;
    let stop = AtomicBool::new(false);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .expect("worker pool");
    pool.install(|| {
        tasks
            .par_iter()
            .map(|t| {
                if stop.load(Ordering::Relaxed) {
                    return UnitRun::Skipped;
                }
                let r = process_unit(t);
                let failed = match &r {
                    UnitRun::Done(o, _) => o.untransformable,
                    UnitRun::ReadError(_) => true,
                    UnitRun::Skipped => false,
                };
                if failed && fail_fast {
                    stop.store(true, Ordering::Relaxed);
                }
                r
            })
            .collect()
    })
}

#[cfg(not(feature = "parallel"))]
fn run_units(tasks: &[UnitTask], _jobs: usize, fail_fast: bool) -> Vec<UnitRun> {
    let stop = AtomicBool::new(false);
    tasks
        .iter()
        .map(|t| {
            if stop.load(Ordering::Relaxed) {
                return UnitRun::Skipped;
            }
            let r = process_unit(t);
            let failed = match &r {
                UnitRun::Done(o, _) => o.untransformable,
                UnitRun::ReadError(_) => true,
                UnitRun::Skipped => false,
            };
            if failed && fail_fast {
                stop.store(true, Ordering::Relaxed);
            }
            r
        })
        .collect()
}

/// Stale set of the project without transforming anything.
pub fn status(config: &RunConfig) -> Result<Vec<(String, Vec<String>)>, PipelineError> {
    let db = compdb::load_database(&config.compdb_path)?;
    let state = ProjectState::load(&incremental::state_path(&config.workdir))?;
    let scans = scan_all(&db);
    let stale = incremental::select_stale(&state, &db, &scans, &|p| incremental::fs_mtime(p));
    Ok(stale
        .into_iter()
        .map(|s| (db.entries[s.index].file.clone(), s.reasons))
        .collect())
}

fn scan_all(db: &compdb::CompilationDatabase) -> HashMap<String, BTreeSet<String>> {
    let read = |p: &str| fs::read_to_string(p).ok();
    db.entries
        .iter()
        .map(|e| {
            let dirs = compdb::extract_include_dirs(e);
            (e.file.clone(), incremental::scan_dependencies(&e.file, &dirs, &read))
        })
        .collect()
}

pub fn run(config: &RunConfig) -> Result<RunSummary, PipelineError> {
    if config.jobs < 1 {
        return Err(PipelineError::BadConfig("jobs must be at least 1".to_string()));
    }
    let run_started = Instant::now();
    let db = compdb::load_database(&config.compdb_path)?;
    for w in &db.warnings {
        log::warn!("compilation database: {}", w);
    }
    let state_file = incremental::state_path(&config.workdir);
    let first_run = !state_file.exists();
    let mut state = ProjectState::load(&state_file)?;

    let scans = scan_all(&db);
    let mtime = |p: &str| incremental::fs_mtime(p);
    let stale: Vec<usize> = if config.force_full {
        (0..db.entries.len()).collect()
    } else {
        incremental::select_stale(&state, &db, &scans, &mtime)
            .into_iter()
            .map(|s| s.index)
            .collect()
    };
    log::info!(
        "{} of {} units stale{}",
        stale.len(),
        db.entries.len(),
        if config.force_full { " (full run)" } else { "" }
    );

    let mut refresh: BTreeSet<String> = BTreeSet::new();
    for &i in &stale {
        let file = &db.entries[i].file;
        refresh.insert(file.clone());
        if let Some(deps) = scans.get(file) {
            refresh.extend(deps.iter().cloned());
        }
    }
    mirror_tree(config, first_run || config.force_full, &refresh)?;

    let tasks: Vec<UnitTask> = stale
        .iter()
        .map(|&index| UnitTask { index, entry: db.entries[index].clone() })
        .collect();
    let runs = run_units(&tasks, config.jobs, config.fail_fast);

    let mut summary = RunSummary {
        skipped: db.entries.len() - tasks.len(),
        ..Default::default()
    };
    let mut committed: Vec<&CompileCommand> = Vec::new();
    for (task, outcome) in tasks.iter().zip(runs) {
        let entry = &db.entries[task.index];
        let mut report = UnitReport {
            file: entry.file.clone(),
            ok: false,
            skipped_by_fail_fast: false,
            warnings: 0,
            diagnostics: Vec::new(),
            phase_millis: Vec::new(),
            feature_edits: BTreeMap::new(),
        };
        match outcome {
            UnitRun::Skipped => {
                report.skipped_by_fail_fast = true;
                summary.skipped += 1;
                log::info!("{}: skipped (fail-fast)", entry.file);
            }
            UnitRun::ReadError(reason) => {
                report.diagnostics.push(format!("cannot read unit: {}", reason));
                summary.failed += 1;
                log::error!("{}: cannot read unit: {}", entry.file, reason);
            }
            UnitRun::Done(o, millis) => {
                report.warnings = o.warnings.len();
                report.diagnostics = o.diagnostics.clone();
                for p in &o.phases {
                    report.phase_millis.push((p.phase, p.millis));
                    add_phase(&mut summary.phase_millis, p.phase, p.millis);
                    add_phase(&mut summary.phase_edits, p.phase, p.edits);
                    log::info!("{}: {} ({} edits, {} ms)", entry.file, p.phase, p.edits, p.millis);
                }
                report.feature_edits = o.feature_edits.clone();
                for (f, n) in &o.feature_edits {
                    *summary.feature_edits.entry(*f).or_insert(0) += n;
                }
                for w in &o.warnings {
                    log::warn!("{}:{}: {}", entry.file, w.line, w.reason);
                }
                if o.untransformable {
                    summary.failed += 1;
                    for d in &o.diagnostics {
                        log::error!("{}: {}", entry.file, d);
                    }
                } else {
                    write_unit_output(config, entry, &o)?;
                    committed.push(entry);
                    report.ok = true;
                    summary.transformed += 1;
                    log::info!("{}: transformed in {} ms", entry.file, millis);
                }
            }
        }
        summary.units.push(report);
    }

    incremental::commit(&mut state, &committed, &scans, &mtime);
    state.save(&state_file)?;
    summary.total_millis = run_started.elapsed().as_millis();
    Ok(summary)
}

fn add_phase<T: std::ops::AddAssign + Copy>(
    acc: &mut Vec<(&'static str, T)>,
    phase: &'static str,
    value: T,
) {
    match acc.iter_mut().find(|(p, _)| *p == phase) {
        Some((_, v)) => *v += value,
        None => acc.push((phase, value)),
    }
}

fn write_unit_output(
    config: &RunConfig,
    entry: &CompileCommand,
    outcome: &UnitOutcome,
) -> Result<(), PipelineError> {
    let out = mirror_path(config, &entry.file)?;
    if let Some(dir) = out.parent() {
        fs::create_dir_all(dir).map_err(io_err(&out))?;
    }
    fs::write(&out, &outcome.text).map_err(io_err(&out))?;
    let map = traceability::build_linemap(
        &entry.file,
        &compdb::normalize_path(&out.to_string_lossy()),
        &outcome.maps,
    );
    let side = traceability::sidecar_path(&out);
    traceability::write_sidecar(&map, &side).map_err(|e| PipelineError::Io {
        path: side.display().to_string(),
        reason: e.to_string(),
    })?;
    Ok(())
}

/// One JSON line per phase with its aggregated timing and edit count.
pub fn write_report(summary: &RunSummary, path: &Path) -> Result<(), PipelineError> {
    let mut text = String::new();
    for (phase, millis) in &summary.phase_millis {
        let edits = summary
            .phase_edits
            .iter()
            .find(|(p, _)| p == phase)
            .map(|(_, n)| *n)
            .unwrap_or(0);
        text.push_str(&serde_json::json!({
            "phase": phase,
            "millis": millis,
            "edits": edits,
        }).to_string());
        text.push('\n');
    }
    text.push_str(&serde_json::json!({
        "phase": "total",
        "millis": summary.total_millis,
        "transformed": summary.transformed,
        "skipped": summary.skipped,
        "failed": summary.failed,
    }).to_string());
    text.push('\n');
    fs::write(path, text).map_err(io_err(path))
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Project {
        _root: tempfile::TempDir,
        _work: tempfile::TempDir,
        config: RunConfig,
    }

    fn write(p: &Path, text: &str) {
        fs::create_dir_all(p.parent().unwrap()).unwrap();
        fs::write(p, text).unwrap();
    }

    /// Two units (one using auto, one including a header) plus an asset.
    fn project() -> Project {
        let root = tempfile::tempdir().unwrap();
        let work = tempfile::tempdir().unwrap();
        let r = root.path();
        write(&r.join("a.cpp"), "int main() {\n  auto x = 1;\n  return x;\n}\n");
        write(&r.join("src/b.cpp"), "#include \"util.h\"\nint bar() { return util(); }\n");
        write(&r.join("src/util.h"), "inline int util() { return 2; }\n");
        write(&r.join("notes.txt"), "not a source file\n");
        let rn = compdb::normalize_path(&r.to_string_lossy());
        let db = format!(
            r#"[{{"directory":"{rn}","command":"cc -c a.cpp","file":"a.cpp"}},
                {{"directory":"{rn}/src","command":"cc -c b.cpp","file":"b.cpp"}}]"#
        );
        write(&r.join("compile_commands.json"), &db);
        let config = RunConfig {
            project_root: r.to_path_buf(),
            compdb_path: r.join("compile_commands.json"),
            workdir: work.path().to_path_buf(),
            jobs: 1,
            force_full: false,
            fail_fast: false,
        };
        Project { _root: root, _work: work, config }
    }

    #[test]
    fn first_run_mirrors_everything_and_transforms() {
        let p = project();
        let s = run(&p.config).unwrap();
        assert_eq!(s.transformed, 2);
        assert_eq!(s.failed, 0);
        let w = &p.config.workdir;
        let a = fs::read_to_string(w.join("a.cpp")).unwrap();
        assert!(a.contains("int x = 1;"), "auto not lowered: {}", a);
        assert!(!a.contains("auto"));
        assert!(w.join("a.cpp.trace").exists());
        assert!(w.join("src/b.cpp.trace").exists());
        // Non-source asset mirrored verbatim.
        assert_eq!(
            fs::read_to_string(w.join("notes.txt")).unwrap(),
            "not a source file\n"
        );
        assert!(s.feature_edits.get(&Feature::Auto).copied().unwrap_or(0) >= 1);
    }

    #[test]
    fn second_run_with_no_changes_transforms_nothing() {
        let p = project();
        run(&p.config).unwrap();
        let s2 = run(&p.config).unwrap();
        assert_eq!(s2.transformed, 0);
        assert_eq!(s2.skipped, 2);
        assert_eq!(s2.failed, 0);
    }

    #[test]
    fn header_change_reselects_dependent_unit_only() {
        let p = project();
        run(&p.config).unwrap();
        let untouched = p.config.workdir.join("a.cpp");
        let before = fs::metadata(&untouched).unwrap().modified().unwrap();
        std::thread::sleep(std::time::Duration::from_millis(10));
        write(
            &p.config.project_root.join("src/util.h"),
            "inline int util() { return 3; }\n",
        );
        let s = run(&p.config).unwrap();
        assert_eq!(s.transformed, 1);
        assert_eq!(s.units.iter().filter(|u| u.ok).count(), 1);
        assert!(s.units.iter().any(|u| u.ok && u.file.ends_with("/b.cpp")));
        // The unrelated unit's mirrored copy was not rewritten.
        let after = fs::metadata(&untouched).unwrap().modified().unwrap();
        assert_eq!(before, after);
        // The refreshed header reached the mirror.
        assert!(fs::read_to_string(p.config.workdir.join("src/util.h"))
            .unwrap()
            .contains("return 3"));
    }

    #[test]
    fn untransformable_unit_fails_run_but_not_others() {
        let p = project();
        // A delegation cycle cannot be inlined and fails the unit.
        write(
            &p.config.project_root.join("a.cpp"),
            "class A {\npublic:\n  A() : A(1) {}\n  A(int x) : A() {}\n};\n",
        );
        let s = run(&p.config).unwrap();
        assert_eq!(s.failed, 1);
        assert_eq!(s.transformed, 1);
        // The failed unit keeps its mirrored original, so the workdir
        // still holds a file and the unit stays stale.
        let a = fs::read_to_string(p.config.workdir.join("a.cpp")).unwrap();
        assert!(a.contains("A() : A(1)"));
        let stale = status(&p.config).unwrap();
        assert_eq!(stale.len(), 1);
        assert!(stale[0].0.ends_with("/a.cpp"));
    }

    #[test]
    fn outputs_are_independent_of_job_count() {
        let p1 = project();
        let mut c1 = p1.config.clone();
        c1.jobs = 1;
        run(&c1).unwrap();
        let p2 = project();
        let mut c4 = p2.config.clone();
        c4.jobs = 4;
        run(&c4).unwrap();
        for rel in ["a.cpp", "src/b.cpp"] {
            let x = fs::read(c1.workdir.join(rel)).unwrap();
            let y = fs::read(c4.workdir.join(rel)).unwrap();
            assert_eq!(x, y, "{} differs between job counts", rel);
        }
        // Sidecars embed the (differing) temp project path on their first
        // line; the segment lines themselves must match.
        for rel in ["a.cpp.trace", "src/b.cpp.trace"] {
            let strip = |w: &Path| {
                let t = fs::read_to_string(w.join(rel)).unwrap();
                t.lines().skip(1).map(String::from).collect::<Vec<_>>()
            };
            assert_eq!(strip(&c1.workdir), strip(&c4.workdir), "{} differs", rel);
        }
    }

    #[test]
    fn force_full_retransforms_everything() {
        let p = project();
        run(&p.config).unwrap();
        let mut full = p.config.clone();
        full.force_full = true;
        let s = run(&full).unwrap();
        assert_eq!(s.transformed, 2);
    }

    #[test]
    fn report_file_has_one_line_per_phase_plus_total() {
        let p = project();
        let s = run(&p.config).unwrap();
        let report = p.config.workdir.join("report.jsonl");
        write_report(&s, &report).unwrap();
        let text = fs::read_to_string(&report).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), s.phase_millis.len() + 1);
        for line in &lines {
            let v: serde_json::Value = serde_json::from_str(line).unwrap();
            assert!(v.get("phase").is_some());
        }
        assert!(text.contains("\"phase\":\"total\""));
    }

    #[test]
    fn zero_jobs_is_rejected() {
        let p = project();
        let mut c = p.config.clone();
        c.jobs = 0;
        assert!(matches!(run(&c), Err(PipelineError::BadConfig(_))));
    }
}
