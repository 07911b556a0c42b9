use std::process::{Command, Output};

fn voa(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_voa"))
        .args(args)
        .output()
        .expect("voa runs")
}

fn json(args: &[&str]) -> serde_json::Value {
    let mut all = args.to_vec();
    all.push("--json");
    let out = voa(&all);
    serde_json::from_slice(&out.stdout).expect("valid JSON on stdout")
}

#[test]
fn axioms_pass_with_exit_zero() {
    let out = voa(&["axioms", "--rank", "1", "--cutoff", "6"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("jacobi"));
    assert!(text.trim_end().ends_with("PASS"));
}

#[test]
fn reports_are_versioned_and_echo_the_config() {
    let doc = json(&["dims", "--cutoff", "6", "--seed", "9", "--level", "2/4"]);
    assert_eq!(doc["schema"], 1);
    assert_eq!(doc["command"], "dims");
    assert_eq!(doc["config"]["seed"], 9);
    assert_eq!(doc["config"]["level"], "1/2");
    assert_eq!(doc["pass"], true);
    assert_eq!(doc["report"]["rows"].as_array().unwrap().len(), 7);
}

#[test]
fn recover_reports_headroom_up_front() {
    let out = voa(&["recover", "--cutoff", "8", "--max-pair-degree", "5"]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("recover"), "{err}");
    assert!(err.contains("9"), "{err}");
}

#[test]
fn recover_small_instance() {
    let doc = json(&["recover", "--cutoff", "7", "--max-pair-degree", "4"]);
    assert_eq!(doc["pass"], true);
    assert_eq!(doc["report"]["needed_cutoff"], 7);
    assert_eq!(doc["report"]["purity"]["bracket_calls"], 0);
}

#[test]
fn overflowing_sweep_exits_three() {
    let out = voa(&["axioms", "--cutoff", "4", "--max-total-degree", "4"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8(out.stderr).unwrap().contains("axiom_sweep"));
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["nonsense"][..],
        &["li", "--level", "abc"],
        &["dims", "--level", "0"],
        &["dims", "--cutoff", "1"],
        &["dims", "--rank", "0"],
        &["orbifold", "--cutoff", "x"],
    ] {
        assert_eq!(voa(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn failed_checks_exit_one() {
    // two right closures of degree-4 generators first contain E_7
    let out = voa(&["ideal", "--cutoff", "8"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stdout).unwrap().trim_end().ends_with("FAIL"));
}

#[test]
fn two_sided_ideals_meet_the_bound() {
    let doc = json(&["ideal", "--cutoff", "8", "--side", "two-sided", "--max-gen-degree", "3"]);
    assert_eq!(doc["pass"], true);
    assert_eq!(doc["config"]["side"], "two-sided");
}

#[test]
fn counterexample_grows_at_even_weights() {
    let doc = json(&["counterexample", "--cutoff", "10"]);
    assert_eq!(doc["pass"], true);
    let totals: Vec<u64> = doc["report"]["totals_by_even_cutoff"]
        .as_array()
        .unwrap()
        .iter()
        .map(|t| t["total"].as_u64().unwrap())
        .collect();
    assert_eq!(totals, vec![1, 2, 3, 4, 5]);
}

#[test]
fn li_chain_and_orbifold_pass() {
    for args in [
        &["li", "--cutoff", "6"][..],
        &["chain", "--cutoff", "7"],
        &["orbifold", "--cutoff", "8"],
    ] {
        let out = voa(args);
        assert_eq!(
            out.status.code(),
            Some(0),
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stdout)
        );
    }
}

#[test]
fn rank_two_dims() {
    let doc = json(&["dims", "--rank", "2", "--cutoff", "4"]);
    let dims: Vec<u64> = doc["report"]["rows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["dim"].as_u64().unwrap())
        .collect();
    assert_eq!(dims, vec![1, 2, 5, 10, 20]);
}
