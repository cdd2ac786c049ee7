use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn formality(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_formality"))
        .args(args)
        .env_remove("FORMALITY_CACHE_DIR")
        .output()
        .expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("bad JSON ({e}): stdout={} stderr={}", String::from_utf8_lossy(&out.stdout), String::from_utf8_lossy(&out.stderr))
    })
}

fn path(name: &str) -> String {
    data(name).display().to_string()
}

#[test]
fn schouten_of_vector_fields() {
    let out = formality(&["bracket", "-i", &path("field_a.json"), "-i", &path("field_b.json")]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["result"]["output"]["bracket"], "schouten");
    // [x2 ∂0, x1² ∂1] = 2 x1 x2 ∂1 − x1² ∂0
    let value = &r["result"]["output"]["value"];
    let text: Vec<(u64, String, Vec<u64>)> = value
        .as_array()
        .unwrap()
        .iter()
        .map(|t| {
            let mono = &t["coef"]["terms"][0];
            (
                t["indices"][0].as_u64().unwrap(),
                mono["coef"].as_str().unwrap().to_owned(),
                mono["exp"].as_array().unwrap().iter().map(|e| e.as_u64().unwrap()).collect(),
            )
        })
        .collect();
    assert_eq!(text, vec![(0, "-1".into(), vec![2, 0]), (1, "2".into(), vec![1, 1])]);
}

#[test]
fn output_round_trips_as_input() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first.json");
    let out = formality(&["bracket", "-i", &path("diff_a.json"), "-i", &path("diff_b.json"), "--output", first.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&first).unwrap()).unwrap();
    let value = dir.path().join("value.json");
    std::fs::write(&value, r["result"]["output"]["value"].to_string()).unwrap();
    // [[a, b], [a, b]] = 0 for an even-degree (here degree 0) operator
    let out = formality(&["bracket", "-i", value.to_str().unwrap(), "-i", value.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["result"]["output"]["value"], serde_json::json!([]));
}

#[test]
fn hkr_on_module_is_cocycle() {
    let out = formality(&["hkr", "-i", &path("section_rank2.json"), "--module", &path("module_rank2.json")]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["result"]["cocycle"], true);
}

#[test]
fn curved_module_is_an_error() {
    for args in [
        vec!["act", "-i", "A", "-i", "B", "--module", "M"],
        vec!["verify", "hkr-cocycle", "--cases", "2", "--module", "M"],
    ] {
        let a = path("field_a.json");
        let b = path("section_rank2.json");
        let m = path("module_curved.json");
        let args: Vec<&str> = args
            .iter()
            .map(|s| match *s {
                "A" => a.as_str(),
                "B" => b.as_str(),
                "M" => m.as_str(),
                s => s,
            })
            .collect();
        let out = formality(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(String::from_utf8_lossy(&out.stderr).contains("not flat"));
    }
}

#[test]
fn non_poisson_is_an_error() {
    let out = formality(&["star", "-i", &path("not_poisson.json")]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Jacobi"));
}

#[test]
fn verify_suites_pass() {
    for suite in ["jacobi", "associator", "hkr-cocycle", "model-complex", "graph-counts"] {
        let out = formality(&["verify", suite, "--cases", "20", "--seed", "5"]);
        assert_eq!(out.status.code(), Some(0), "{suite}");
        let r = report(&out);
        assert_eq!(r["pass"], true);
        assert!(r["result"]["checked"].as_u64().unwrap() > 0);
    }
}

#[test]
fn graphs_match_binomial_count() {
    // n = 2, m = 2: 2·3 target slots, 4 edges
    let out = formality(&["graphs", "--n", "2", "--m", "2"]);
    let r = report(&out);
    assert_eq!(r["options"]["edges"], 4);
    assert_eq!(r["result"]["count"], 15);
    assert_eq!(r["result"]["graphs"].as_array().unwrap().len(), 15);
}

#[test]
fn wedge_weight_is_one_half() {
    let out = formality(&["weight", "--graph", r#"{"n":1,"m":2,"edges":[[1,-1],[1,-2]]}"#, "--samples", "100000", "--seed", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let est = &report(&out)["result"]["estimate"];
    let (v, s) = (est["value"].as_f64().unwrap(), est["std_error"].as_f64().unwrap());
    assert!((v - 0.5).abs() < 4.0 * s, "{v} ± {s}");
}

#[test]
fn weight_cache_is_reused() {
    let dir = tempfile::tempdir().unwrap();
    let graph = r#"{"n":1,"m":2,"edges":[[1,-1],[1,-2]]}"#;
    let run = || {
        let out = Command::new(env!("CARGO_BIN_EXE_formality"))
            .args(["weight", "--graph", graph, "--samples", "20000"])
            .env("FORMALITY_CACHE_DIR", dir.path())
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0));
        report(&out)
    };
    let a = run();
    let cache = dir.path().join("weights.jsonl");
    let lines = std::fs::read_to_string(&cache).unwrap().lines().count();
    assert!(lines >= 1);
    let b = run();
    assert_eq!(std::fs::read_to_string(&cache).unwrap().lines().count(), lines);
    assert_eq!(a["result"]["estimate"], b["result"]["estimate"]);
    assert_eq!(a["options"]["cache"], dir.path().display().to_string());
}

#[test]
fn zero_bivector_gives_pointwise_product() {
    let out = formality(&["star", "-i", &path("zero2.json"), "--samples", "1000"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    let terms = r["result"]["terms"].as_array().unwrap();
    assert_eq!(terms.len(), 1);
    assert_eq!(terms[0]["h_order"], 0);
    let op = terms[0]["operator"].as_array().unwrap();
    assert_eq!(op.len(), 1);
    assert_eq!(op[0]["alphas"], serde_json::json!([[0, 0], [0, 0]]));
}

#[test]
fn so3_star_is_associative() {
    let out = formality(&["assoc", "-i", &path("so3.json"), "--samples", "50000", "--seed", "8"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let r = report(&out);
    assert_eq!(r["pass"], true);
    assert_eq!(r["result"]["complete"], true);
}

#[test]
fn failing_check_exits_one() {
    // at 1000 samples with a zero tolerance, the h² defect is nonzero noise
    let out = formality(&["assoc", "-i", &path("so3.json"), "--samples", "1000", "--tolerance", "0"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(report(&out)["pass"], false);
}

#[test]
fn cohomology_of_zero_bivector() {
    let out = formality(&["cohomology", "-i", &path("zero2.json"), "--no-residual"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["result"]["h0_agree"], true);
    assert_eq!(r["result"]["leading_agree"], true);
    for row in r["result"]["rows"].as_array().unwrap() {
        assert_eq!(row["poisson_leading"], row["hochschild_leading"]);
    }
}

#[test]
fn cohomology_needs_a_dimension() {
    let empty = tempfile::NamedTempFile::new().unwrap();
    std::fs::write(empty.path(), "[]").unwrap();
    let p = empty.path().to_str().unwrap();
    let out = formality(&["cohomology", "-i", p, "--no-residual"]);
    assert_eq!(out.status.code(), Some(2));
    let out = formality(&["cohomology", "-i", p, "--no-residual", "--dim", "2"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn symplectic_cohomology_with_residual() {
    let out = formality(&["cohomology", "-i", &path("symplectic.json"), "--samples", "20000"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let rows = report(&out)["result"]["rows"].clone();
    let leading: Vec<u64> = rows.as_array().unwrap().iter().map(|r| r["poisson_leading"].as_u64().unwrap()).collect();
    assert_eq!(leading, vec![1, 0, 0]);
}
