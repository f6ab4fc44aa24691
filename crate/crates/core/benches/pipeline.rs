//! Throughput benchmarks: the single-unit phase pipeline on each fixture
//! input, and the whole-project run at several worker counts.

use std::path::Path;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use retrofit_core::pipeline::{run, RunConfig};
use retrofit_core::transforms::run_phases;

const FIXTURES: &[&str] = &[
    "member_init",
    "auto",
    "lambda",
    "final_override",
    "range_for",
    "delegation",
    "type_alias",
    "attributes",
];

fn bench_phases(c: &mut Criterion) {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join("goldens");
    let mut group = c.benchmark_group("run_phases");
    for name in FIXTURES {
        let input = std::fs::read(dir.join(format!("{}.in.cpp", name))).expect("fixture");
        group.bench_with_input(BenchmarkId::from_parameter(name), &input, |b, input| {
            b.iter(|| run_phases(input));
        });
    }
    group.finish();
}

fn bench_project(c: &mut Criterion) {
    let tmp = tempfile::tempdir().expect("tempdir");
    let proj = tmp.path().join("proj");
    std::fs::create_dir_all(&proj).expect("mkdir");
    let corpus = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join("corpus");
    let mut entries = Vec::new();
    let snippets: Vec<Vec<u8>> = walkdir::WalkDir::new(&corpus)
        .sort_by_file_name()
        .into_iter()
        .filter_map(Result::ok)
        .filter(|e| e.file_type().is_file())
        .map(|e| std::fs::read(e.path()).expect("snippet"))
        .collect();
    for i in 0..60 {
        let name = format!("gen{:02}.cpp", i);
        std::fs::write(proj.join(&name), &snippets[i % snippets.len()]).expect("write");
        entries.push(serde_json::json!({
            "directory": proj.display().to_string(),
            "command": format!("g++ -std=c++11 -c {}", name),
            "file": name,
        }));
    }
    let compdb_path = proj.join("compile_commands.json");
    std::fs::write(&compdb_path, serde_json::Value::Array(entries).to_string()).expect("write db");

    let mut group = c.benchmark_group("project_run");
    group.sample_size(10);
    for jobs in [1usize, 2, 4] {
        group.bench_with_input(BenchmarkId::from_parameter(jobs), &jobs, |b, &jobs| {
            let workdir = tmp.path().join(format!("w{}", jobs));
            let config = RunConfig {
                project_root: proj.clone(),
                compdb_path: compdb_path.clone(),
                workdir,
                jobs,
                force_full: true,
                fail_fast: false,
            };
            b.iter(|| run(&config).expect("run"));
        });
    }
    group.finish();
}

criterion_group!(benches, bench_phases, bench_project);
criterion_main!(benches);
