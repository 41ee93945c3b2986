use overtake_cli::{dispatch, EXIT_OK, EXIT_REFUSED, EXIT_USAGE};
use serde_json::Value;

fn call(args: &[&str]) -> (i32, Vec<Value>) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("overtake").chain(args.iter().copied());
    let code = dispatch(argv, &mut out, &mut err);
    let rows = String::from_utf8(out)
        .unwrap()
        .lines()
        .filter(|l| !l.is_empty())
        .map(|l| serde_json::from_str(l).expect("json line"))
        .collect();
    (code, rows)
}

#[test]
fn encode_pair_two_one() {
    let (code, rows) = call(&["codec", "encode", "--n", "2", "--m", "1"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(rows[0]["provenance"], "computed");
    assert_eq!(rows[0]["result"]["code"], "11000");
}

#[test]
fn decode_round_trips_encode() {
    let (_, rows) = call(&["codec", "decode", "--word", "11000"]);
    assert_eq!(rows[0]["result"]["n"], "2");
    assert_eq!(rows[0]["result"]["m"], "1");
    assert_eq!(rows[0]["result"]["valid"], true);
}

#[test]
fn law_for_machine_one() {
    let (code, rows) = call(&["codec", "law", "--m", "1", "--probe", "0..10"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(rows[0]["result"]["law"]["a"], "16");
}

#[test]
fn sigma_two_is_four() {
    let (code, rows) = call(&["bb", "sigma", "--n", "2", "--cutoff", "30"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(rows[0]["result"]["value"], 4);
    assert_eq!(rows[0]["result"]["exact"], true);
}

#[test]
fn g0_crossover_at_two() {
    let (_, rows) = call(&["gfun", "g0", "--m", "2", "--mode", "crossover"]);
    assert_eq!(rows[0]["result"]["value"], 5);
}

#[test]
fn g_of_zero_machine_is_zero() {
    let (code, rows) = call(&["gfun", "g", "--index", "0"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(rows[0]["result"]["value"], "0");
}

#[test]
fn f_omega_three_is_refused() {
    let (code, rows) = call(&["gfun", "fw", "--n", "3"]);
    assert_eq!(code, EXIT_REFUSED);
    assert_eq!(rows[0]["provenance"], "refused");
    assert!(rows[0]["reason"].as_str().unwrap().contains("ceiling"));
}

#[test]
fn domination_window() {
    let (_, rows) = call(&["dominate", "--f", "n^2", "--g", "n+1", "--window", "2..40"]);
    assert_eq!(rows[0]["result"]["failures"], Value::Array(vec![]));
}

#[test]
fn eval_emits_one_row_per_input() {
    let (_, rows) = call(&["gfun", "eval", "--f", "2^n", "--n", "0..4"]);
    let vals: Vec<_> = rows.iter().map(|r| r["result"]["value"].as_str().unwrap().to_string()).collect();
    assert_eq!(vals, ["1", "2", "4", "8", "16"]);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(call(&["codec", "encode", "--n", "x", "--m", "1"]).0, EXIT_USAGE);
    assert_eq!(call(&["nope"]).0, EXIT_USAGE);
    assert_eq!(call(&["dominate", "--f", "n", "--g", "n", "--window", "5..2"]).0, EXIT_USAGE);
}

#[test]
fn bad_expression_is_refused() {
    let (code, rows) = call(&["gfun", "eval", "--f", "n +", "--n", "0..1"]);
    assert_eq!(code, EXIT_REFUSED);
    assert_eq!(rows[0]["provenance"], "refused");
}

#[test]
fn output_is_deterministic() {
    let args = ["bb", "sigma", "--n", "2", "--cutoff", "30", "--shards", "3"];
    assert_eq!(call(&args), call(&args));
    let (_, single) = call(&["bb", "sigma", "--n", "2", "--cutoff", "30"]);
    assert_eq!(call(&args).1[0]["result"], single[0]["result"]);
}

#[test]
fn pretty_renders_a_header() {
    let mut out = Vec::new();
    let code = dispatch(["overtake", "--pretty", "codec", "index", "--n", "2", "--m", "1"], &mut out, &mut Vec::new());
    assert_eq!(code, EXIT_OK);
    let text = String::from_utf8(out).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().contains("index"));
    assert!(lines.next().unwrap().contains("11000"));
}

#[test]
fn family_registry_file_feeds_g() {
    let dir = std::env::temp_dir().join(format!("overtake-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("registry.json");
    let p = path.to_str().unwrap();
    let (code, rows) = call(&["family", "build", "--n-range", "0..1", "--out", p]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(rows.len(), 2);
    let index = rows[0]["result"]["ell_index"].as_str().unwrap().to_string();
    let (code, g) = call(&["gfun", "g", "--index", &index, "--registry", p]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(g[0]["result"]["certified"], true);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn machine_run_from_file() {
    let dir = std::env::temp_dir().join(format!("overtake-cli-run-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("flip.tm");
    std::fs::write(&path, "states 2\n1 0 -> 1 R 1\n1 1 -> 0 R 1\n1 _ -> _ L 0\n").unwrap();
    let (code, rows) = call(&["machine", "run", "--table", path.to_str().unwrap(), "--input", "0110"]);
    assert_eq!(code, EXIT_OK, "{rows:?}");
    assert_eq!(rows[0]["result"]["output"], "1001");
    std::fs::remove_dir_all(&dir).unwrap();
}
