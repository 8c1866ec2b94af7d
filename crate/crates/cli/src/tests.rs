use std::path::Path;
use std::sync::{Mutex, MutexGuard};

use clap::Parser;
use serde_json::Value;

use super::{execute, exit_code, run, Cli};

// Parsing reads WEIL_CACHE_DIR, so runs are serialized around changes to it.
static ENV: Mutex<()> = Mutex::new(());

fn lock() -> MutexGuard<'static, ()> {
    ENV.lock().unwrap_or_else(|e| e.into_inner())
}

fn weil(args: &[&str]) -> (u8, String) {
    let _g = lock();
    execute(std::iter::once("weil").chain(args.iter().copied()))
}

fn json(text: &str) -> Value {
    serde_json::from_str(text).unwrap_or_else(|e| panic!("{e}: {text}"))
}

#[test]
fn verify_presentation_q5() {
    let (code, out) = weil(&["verify-presentation", "--q", "5", "--n", "1"]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert_eq!(v["passed"], true);
    let rel = v["report"]["presentation"]["relations"].as_array().unwrap();
    assert_eq!(rel.len(), 5);
    assert!(rel.iter().all(|r| r["passed"] == true && r["exhaustive"] == true));
    assert_eq!(v["report"]["group_order"]["bruhat_closure"], 14400);
    assert_eq!(v["report"]["group_order"]["isometry_group"], 28800);
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["verify-presentation", "--q", "4", "--n", "1"][..],
        &["verify-presentation", "--q", "9"],
        &["verify-presentation", "--q", "3"],
        &["build-rep", "--q", "5", "--lambda", "10"],
        &["build-rep", "--q", "5", "--n", "0"],
        &["build-rep", "--q", "5", "--samples", "0"],
        &["decompose"],
        &["dual-pair", "--q", "5", "--format", "xml"],
        &["no-such-command"],
    ] {
        assert_eq!(weil(args).0, 2, "{args:?}");
    }
}

#[test]
fn build_rep_q5_and_twist() {
    for lambda in ["1", "-3"] {
        let (code, out) = weil(&["build-rep", "--q", "5", "--lambda", lambda, "--pairs", "20"]);
        assert_eq!(code, 0);
        let v = json(&out);
        let gauss = v["report"]["datum"]["gauss_sums"].as_array().unwrap();
        assert_eq!(gauss.len(), 4);
        assert!(gauss.iter().all(|g| g["value"] == "25"));
        assert_eq!(v["report"]["representation"]["homomorphism"]["passed"], true);
        assert_eq!(v["report"]["representation"]["homomorphism"]["instances"], 20);
        assert_eq!(v["report"]["psi_independence"]["check"]["passed"], true);
        assert!(v["report"]["quadratic_forms"].as_array().unwrap().iter().all(|f| f["zero_count"] == 145));
    }
}

#[test]
fn build_rep_float_backend_reports_mirror() {
    let (code, out) = weil(&["build-rep", "--q", "5", "--backend", "float", "--pairs", "0"]);
    assert_eq!(code, 0);
    let v = json(&out);
    let err = v["report"]["float_mirror"]["max_unitarity_error"].as_f64().unwrap();
    assert!(err < 1e-9, "{err}");
}

#[test]
fn build_rep_n2_skips_operators() {
    let (code, out) = weil(&["build-rep", "--q", "5", "--n", "2", "--samples", "8"]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert!(v["report"]["representation"].is_null());
    let notes = v["notes"].as_array().unwrap();
    assert!(notes.iter().any(|n| n.as_str().unwrap().contains("operator materialization skipped")));
    assert!(v["report"]["datum"]["gauss_sums"].as_array().unwrap().iter().all(|g| g["value"] == "625"));
}

#[test]
fn decompose_q5_json_and_csv() {
    let (code, out) = weil(&["decompose", "--q", "5"]);
    assert_eq!(code, 0);
    let v = json(&out);
    let comps = v["report"]["components"].as_array().unwrap();
    assert_eq!(comps.len(), 9);
    let total: u64 = comps.iter().map(|c| c["dim"].as_u64().unwrap() * c["multiplicity"].as_u64().unwrap()).sum();
    assert_eq!(total, 625);
    let ranks: u64 = comps.iter().map(|c| c["projector_rank"].as_str().unwrap().parse::<u64>().unwrap()).sum();
    assert_eq!(ranks, 625);

    let (code, text) = weil(&["decompose", "--q", "5", "--format", "csv"]);
    assert_eq!(code, 0);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("irrep,dim,multiplicity,projector_rank,hom_dim"));
    assert_eq!(lines.clone().take_while(|l| !l.is_empty()).count(), 9);
    assert!(text.contains("\nirrep,dim,class0"));
}

#[test]
fn csv_format_flattens_other_reports() {
    let (code, text) = weil(&["dual-pair", "--q", "5", "--format", "csv"]);
    assert_eq!(code, 0);
    assert!(text.lines().any(|l| l == "passed,true"), "{text}");
}

#[test]
fn text_format_is_flattened_json() {
    let (code, text) = weil(&["dual-pair", "--q", "5", "--format", "text"]);
    assert_eq!(code, 0);
    assert!(text.lines().any(|l| l == "passed = true"));
    assert!(text.lines().any(|l| l == "report.w.equal = true"));
}

#[test]
fn dual_pair_q5() {
    let (code, out) = weil(&["dual-pair", "--q", "5", "--n", "1"]);
    assert_eq!(code, 0);
    let v = json(&out);
    for fam in ["h", "u", "w", "chi", "sl2_sigma"] {
        assert_eq!(v["report"][fam]["equal"], true, "{fam}");
        assert!(v["report"][fam]["first_mismatch"].is_null());
    }
    assert_eq!(v["report"]["sl2_sigma"]["instances"], 120);
}

#[test]
fn dual_pair_rejects_n2() {
    assert_eq!(weil(&["dual-pair", "--q", "5", "--n", "2"]).0, 2);
}

#[test]
fn same_seed_same_bytes() {
    let a = weil(&["decompose", "--q", "5", "--seed", "3"]);
    let b = weil(&["decompose", "--q", "5", "--seed", "3"]);
    assert_eq!(a, b);
}

fn cache_file(dir: &Path) -> std::path::PathBuf {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .find(|p| p.extension().is_some_and(|e| e == "bin"))
        .expect("cache file")
}

#[test]
fn cache_roundtrip_and_corruption() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let first = weil(&["verify-presentation", "--q", "5", "--cache-dir", d]);
    assert_eq!(first.0, 0);
    let path = cache_file(dir.path());
    let stored = std::fs::read(&path).unwrap();
    let second = weil(&["verify-presentation", "--q", "5", "--cache-dir", d]);
    assert_eq!(first, second);
    assert_eq!(std::fs::read(&path).unwrap(), stored);

    let (code, out) = weil(&["dual-pair", "--q", "5", "--cache-dir", d]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert!(v["report"]["form"].as_array().unwrap().iter().any(|c| c["name"] == "G-invariance (enumerated elements)"));

    let mut bytes = stored;
    let mid = bytes.len() / 2;
    bytes[mid] ^= 0x40;
    std::fs::write(&path, &bytes).unwrap();
    assert_eq!(weil(&["dual-pair", "--q", "5", "--cache-dir", d]).0, 3);
    let err = {
        let _g = lock();
        run(Cli::try_parse_from(["weil", "verify-presentation", "--q", "5", "--cache-dir", d]).unwrap()).unwrap_err()
    };
    assert_eq!(exit_code(&err), 3);
    assert!(err.to_string().contains("cache"), "{err}");

    // WEIL_CACHE_DIR selects the same directory
    let _g = lock();
    std::env::set_var("WEIL_CACHE_DIR", d);
    let (code, _) = execute(["weil", "verify-presentation", "--q", "5"]);
    std::env::remove_var("WEIL_CACHE_DIR");
    assert_eq!(code, 3);
}
