use std::process::{Command, Output};

fn toromaps(args: &[&str]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_toromaps"));
    for (k, _) in std::env::vars().filter(|(k, _)| k.starts_with("TOROMAPS_")) {
        cmd.env_remove(k);
    }
    cmd.args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(toromaps(&["sample", "--n", "50"]).status.code(), Some(2), "missing --seed");
    assert_eq!(toromaps(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(toromaps(&["gf", "eval", "r", "--g", "0.5", "--labels", "1"]).status.code(), Some(2));
    assert_eq!(toromaps(&["gf", "series", "nonsense"]).status.code(), Some(2));
}

#[test]
fn series_output_is_exact_json() {
    let o = toromaps(&["gf", "series", "q1-rooted", "--order", "4"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["order"], 4);
}

#[test]
fn codec_reports_no_failures() {
    let o = toromaps(&["codec", "--n", "4"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["objects"], 614);
    assert_eq!(v["failures"], 0);
}

#[test]
fn csv_headers() {
    let o = toromaps(&["dist", "sigma", "--rmax", "1", "--step", "0.5"]);
    assert!(stdout(&o).starts_with("r,cdf,pdf,err\n"));
    let o = toromaps(&["sample", "--n", "30", "--seed", "3", "--samples", "4"]);
    assert!(stdout(&o).starts_with("index,size,weight,minskel,m2,marked_distance\n"));
    assert_eq!(stdout(&o).lines().count(), 5);
}

#[test]
fn samples_do_not_depend_on_run_or_thread_count() {
    let args = ["sample", "--n", "200", "--seed", "11", "--samples", "40"];
    let one = toromaps(&[&["--threads", "1"], &args[..]].concat());
    let again = toromaps(&[&["--threads", "1"], &args[..]].concat());
    let four = toromaps(&[&["--threads", "4"], &args[..]].concat());
    assert!(one.status.success());
    assert_eq!(one.stdout, again.stdout);
    assert_eq!(one.stdout, four.stdout);
    let other = toromaps(&["sample", "--n", "200", "--seed", "12", "--samples", "40"]);
    assert_ne!(one.stdout, other.stdout);
}

#[test]
fn quick_verification_passes_and_a_wrong_constant_is_caught() {
    let o = toromaps(&["verify", "--profile", "quick"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["passed"], true);
    let o = toromaps(&["verify", "--profile", "quick", "--override", "small_l_denominator=895"]);
    assert_eq!(o.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let failed: Vec<u64> =
        v["criteria"].as_array().unwrap().iter().filter(|c| c["passed"] == false).map(|c| c["id"].as_u64().unwrap()).collect();
    assert_eq!(failed, vec![9]);
}
