#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use jsonschema::{Registry, Resource};
use serde_json::Value;

pub const SCHEMAS: [&str; 6] = [
    "config",
    "manifest",
    "verify_report",
    "optimize_report",
    "scan_summary",
    "nclone_report",
];

pub fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_clonebench"));
    c.env_remove("CLONEBENCH_SEED");
    c
}

pub fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

pub fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8 stdout")
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

pub fn read_json(path: &Path) -> Value {
    let text = std::fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    serde_json::from_str(&text).expect("valid JSON")
}

fn schema_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("schemas")
        .join(format!("{name}.schema.json"))
}

pub fn schema(name: &str) -> Value {
    read_json(&schema_path(name))
}

/// Validates `instance` against one of the shipped schemas, resolving
/// cross-references between them locally.
pub fn assert_schema(name: &str, instance: &Value) {
    let mut registry = Registry::new();
    for s in SCHEMAS {
        let contents = schema(s);
        let id = contents["$id"]
            .as_str()
            .expect("schema has $id")
            .to_string();
        registry = registry
            .add(id, Resource::from_contents(contents))
            .expect("resource registers");
    }
    let registry = registry.prepare().expect("registry resolves");
    let validator = jsonschema::options()
        .with_registry(&registry)
        .build(&schema(name))
        .unwrap_or_else(|e| panic!("{name} schema: {e}"));
    let errors: Vec<String> = validator
        .iter_errors(instance)
        .map(|e| format!("{} at {}", e, e.instance_path()))
        .collect();
    assert!(errors.is_empty(), "{name}: {errors:#?}");
}

/// `dir/stem.manifest.json` for an artifact at `dir/stem.ext`.
pub fn manifest_of(out: &Path) -> Value {
    let stem = out.file_stem().unwrap().to_string_lossy();
    let m = read_json(&out.with_file_name(format!("{stem}.manifest.json")));
    assert_schema("manifest", &m);
    m
}
