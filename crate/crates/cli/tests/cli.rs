use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mplred")).args(args).env_remove("MPLRED_SEED").output().expect("binary runs")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("valid json")
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(run(&["reduce", "--n", "4", "--mode", "odd_n"]).status.code(), Some(2));
    assert_eq!(run(&["reduce", "--n", "2"]).status.code(), Some(2));
    assert_eq!(run(&["verify", "--identity", "no_such_identity"]).status.code(), Some(2));
    assert_eq!(run(&["verify", "--trials", "0"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn reduce_weight_five_counts() {
    let out = run(&["--format", "json", "reduce", "--n", "5", "--mode", "odd_n"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["total"], 113);
    let out = run(&["--format", "json", "reduce", "--n", "5", "--mode", "all_n"]);
    assert_eq!(json(&out)["total"], 307);
}

#[test]
fn verify_is_deterministic() {
    let args = ["--format", "json", "verify", "--identity", "gangl_de", "--seed", "7"];
    let (a, b) = (run(&args), run(&args));
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(json(&a)["pass"], true);
}

#[test]
fn census_reports_every_table() {
    let out = run(&["--format", "json", "census"]);
    assert_eq!(out.status.code(), Some(0));
    let tables = json(&out)["tables"].as_array().unwrap().clone();
    let names: Vec<&str> = tables.iter().map(|t| t["name"].as_str().unwrap()).collect();
    assert_eq!(names, ["phi5_odd_n", "phi5_all_n", "phi5_prime", "phi5_doubleprime"]);
    assert_eq!(tables[3]["found_total"], 2457);
}
