use std::process::{Command, Output};

use longrun::inference::TableRow;
use longrun::montecarlo::RatioSummary;
use longrun::{ConfidenceInterval, CoverageReport, IntervalMethod};
use serde_json::{json, Value};

const SCHEMA: &str = include_str!("../../../docs/schema.json");

fn longrun(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_longrun"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn longrun_env(args: &[&str], key: &str, value: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_longrun"))
        .args(args)
        .env(key, value)
        .output()
        .expect("binary runs")
}

fn split(line: &str) -> Vec<&str> {
    line.split_whitespace().collect()
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}",
            String::from_utf8_lossy(&out.stdout)
        )
    })
}

fn schema() -> Value {
    serde_json::from_str(SCHEMA).unwrap()
}

/// Validates against the whole document schema, or against one `$defs` entry.
fn assert_valid(doc: &Value, def: Option<&str>) {
    let mut s = schema();
    if let Some(name) = def {
        let obj = s.as_object_mut().unwrap();
        obj.remove("oneOf");
        obj.insert("$ref".into(), json!(format!("#/$defs/{name}")));
    }
    let validator = jsonschema::validator_for(&s).expect("schema compiles");
    let errors: Vec<String> = validator.iter_errors(doc).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "schema violations {errors:?} in {doc:#}");
}

fn ok(args: &str) -> Value {
    let out = longrun(&split(args));
    assert!(
        out.status.success(),
        "{args}: {}\n{}",
        out.status,
        String::from_utf8_lossy(&out.stdout)
    );
    let doc = json_of(&out);
    assert_valid(&doc, None);
    doc
}

const COMMANDS: &[&str] = &[
    "dist --n 3 --p 0.5 --k 2",
    "dist --n 12 --p 0.3",
    "dist --n 5 --p 0.5 --k 9",
    "mgf --n 200 --p 0.5 --lambda 0.3465735902799726",
    "mgf --n 120 --p 0.3 --lambda -1 --method recursion",
    "mgf --n 300 --p 0.5 --lambda 1.3862943611198906 --speed away",
    "rate --family near --p 0.5 --x 1",
    "rate --family away --p 0.8 --x 1.5",
    "legendre --family near --p 0.5 --x 3",
    "cumulant --family near --p 0.5 --lambda 2",
    "cumulant --family away --p 0.5 --lambda 2 --n 100",
    "ldp --regime near-upper --n 1000 --p 0.5 --x 0.5",
    "ldp --regime near-lower --n 1000 --p 0.5 --x 0.5",
    "ldp --regime away --n 2000 --p 0.5 --x 0.5",
    "ldp --regime interval --n 1000 --p 0.5 --a 1.5 --b inf",
    "varadhan --t 1 --alpha 0.5 --p 0.5 --n-ladder 100,1000",
    "ci --method wilson --n 200 --k 193 --alpha 0.05",
    "ci --method lr --n 200 --l-obs 40 --p-hat 0.965 --alpha 0.05",
    "tables --which 1",
    "tables --which 2 --l-obs 90",
    "simulate coverage --p 0.95 --n 200 --alpha 0.05 --reps 300 --seed 11",
    "simulate ratio --n 1000 --p 0.5 --reps 200 --seed 3",
];

#[test]
fn wilson_example_matches_published_cell() {
    let doc = ok("ci --method wilson --n 200 --k 193 --alpha 0.05");
    assert_eq!(doc["command"], "ci");
    assert_eq!(doc["result"]["lower_4dp"], json!(0.9295));
    assert_eq!(doc["result"]["upper_4dp"], json!(0.9829));
}

#[test]
fn near_rate_vanishes_at_nominal_value() {
    let doc = ok("rate --family near --p 0.5 --x 1");
    assert_eq!(doc["result"]["closed_form"], json!(0.0));
    assert_eq!(doc["result"]["numeric"], json!(0.0));
}

#[test]
fn dist_single_threshold_matches_enumeration() {
    // length-3 strings without two consecutive successes: 000, 001, 010, 100, 101
    let doc = ok("dist --n 3 --p 0.5 --k 2");
    let r = &doc["result"];
    assert_eq!(r["prob_below"], json!(0.625));
    assert_eq!(r["bounds"]["lower"], json!(0.5625));
    assert_eq!(r["bounds"]["upper"], json!(0.765625));
    // pmf at 2: 011, 110
    assert_eq!(r["pmf"], json!(0.25));
}

#[test]
fn every_command_validates_against_schema() {
    for args in COMMANDS {
        let doc = ok(args);
        let command = doc["command"].as_str().unwrap();
        assert!(args.starts_with(command), "{args} echoed as {command}");
    }
}

#[test]
fn quiet_prints_only_the_payload() {
    let cases = [
        ("ci --method cp --n 200 --k 193 --alpha 0.05", "ci_result"),
        ("mgf --n 50 --p 0.5 --lambda 1", "mgf_result"),
        ("ldp --regime away --n 500 --p 0.5 --x 0.25", "ldp_result"),
        ("tables --which 2", "tables_result"),
        (
            "simulate ratio --n 100 --p 0.5 --reps 10 --seed 1",
            "ratio_summary",
        ),
    ];
    for (args, def) in cases {
        let full = ok(args);
        let out = longrun(&split(&format!("{args} --quiet")));
        assert!(out.status.success());
        let payload = json_of(&out);
        assert_valid(&payload, Some(def));
        assert_eq!(payload, full["result"], "{args}");
    }
}

#[test]
fn repeated_runs_are_byte_identical() {
    for args in COMMANDS {
        let a = longrun(&split(args));
        let b = longrun(&split(args));
        assert_eq!(a.stdout, b.stdout, "{args}");
        assert_eq!(a.status.code(), b.status.code());
    }
}

#[test]
fn simulation_output_ignores_thread_count() {
    let args = split("simulate coverage --p 0.98 --n 200 --alpha 0.05 --reps 500 --seed 42");
    let one = longrun_env(&args, "RAYON_NUM_THREADS", "1");
    let four = longrun_env(&args, "RAYON_NUM_THREADS", "4");
    assert!(one.status.success());
    assert_eq!(one.stdout, four.stdout);
}

#[test]
fn typed_payloads_round_trip() {
    let doc = ok("ci --method normal --n 1000 --k 995 --alpha 0.05");
    let ci: ConfidenceInterval = serde_json::from_value(doc["result"].clone()).unwrap();
    assert_eq!(ci.method, IntervalMethod::Normal);
    assert_eq!(json!(ci.lower), doc["result"]["lower"]);

    let doc = ok("tables --which 1");
    let rows: Vec<TableRow> = serde_json::from_value(doc["result"]["rows"].clone()).unwrap();
    assert_eq!(rows.len(), 20);
    assert_eq!(serde_json::to_value(&rows).unwrap(), doc["result"]["rows"]);

    let doc = ok("simulate coverage --p 0.95 --n 200 --alpha 0.05 --reps 100 --seed 5");
    let report: CoverageReport = serde_json::from_value(doc["result"].clone()).unwrap();
    assert_eq!(report.config.master_seed, 5);
    assert_eq!(json!(report.generator), doc["generator"]);
    assert_eq!(serde_json::to_value(&report).unwrap(), doc["result"]);

    let doc = ok("simulate ratio --n 1000 --p 0.5 --reps 50 --seed 9");
    let summary: RatioSummary = serde_json::from_value(doc["result"].clone()).unwrap();
    assert_eq!(summary.replications, 50);
    assert_eq!(serde_json::to_value(&summary).unwrap(), doc["result"]);
}

#[test]
fn csv_outputs_carry_headers() {
    let out = longrun(&split("tables --which 2 --format csv"));
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "table_id,block_p,p_hat,n,alpha,method,lower,upper,lower_4dp,upper_4dp"
    );
    assert_eq!(lines.count(), 15);

    let out = longrun(&split("dist --n 4 --p 0.5 --format csv"));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "k,pmf,cdf_below,log_pmf,log_cdf_below,log_tail"
    );
    assert_eq!(text.lines().count(), 6);

    let out = longrun(&split(
        "simulate coverage --p 0.95 --n 200 --alpha 0.05 --reps 20 --seed 1 --methods wilson,cp --format csv",
    ));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("method,"));
    assert_eq!(text.lines().count(), 3);
}

fn failure(args: &str) -> (i32, Value) {
    let out = longrun(&split(args));
    let doc = json_of(&out);
    assert_valid(&doc, None);
    assert!(!out.stderr.is_empty());
    (out.status.code().unwrap(), doc)
}

#[test]
fn schema_violations_exit_with_two() {
    for args in [
        "ci --method wilson --n 200 --alpha 0.05",
        "ci --method lr --n 200 --k 5 --alpha 0.05",
        "tables --which 3",
        "dist --p 0.5",
        "dist --n 10 --p 1.5",
        "dist --n 10 --p nan",
        "ldp --regime interval --n 100 --p 0.5 --x 0.5",
        "rate --family sideways --p 0.5 --x 1",
        "nonsense",
    ] {
        let (code, doc) = failure(args);
        assert_eq!(code, 2, "{args}");
        assert_eq!(doc["error"]["exit_code"], json!(2));
    }
}

#[test]
fn module_errors_exit_with_three() {
    let (code, doc) = failure("mgf --n 5000 --p 0.5 --lambda 1 --method recursion");
    assert_eq!(code, 3);
    assert_eq!(doc["error"]["kind"], "resource");

    // (1-x) log_{1/p} n exceeds n, so P(L(n) <= j) = 1 and its double log is undefined
    let (code, doc) = failure("ldp --regime near-lower --n 10 --p 0.999 --x 0.5");
    assert_eq!(code, 3, "{doc:#}");
    assert_eq!(doc["error"]["kind"], "domain");
}

#[test]
fn resource_cap_can_be_lowered_from_the_environment() {
    let out = longrun_env(
        &split("dist --n 20 --p 0.5"),
        "LONGRUN_DISTRIBUTION_CAP",
        "10",
    );
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(json_of(&out)["error"]["kind"], "resource");
    let out = longrun_env(
        &split("dist --n 20 --p 0.5"),
        "LONGRUN_DISTRIBUTION_CAP",
        "junk",
    );
    assert!(out.status.success());
}
