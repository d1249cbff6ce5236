//! One line per acceptance criterion. Runs the full profile unless
//! `TOROMAPS_ACCEPTANCE_PROFILE=quick`.
//!
//! Criteria listed in `KNOWN_FAILURES` are run with unchanged tolerances and
//! reported as `FAIL (known)`; they do not fail the target. Any other failure
//! does, and so does a known failure that starts passing, so the list cannot go stale.

use std::process::ExitCode;

use toromaps::verify::{registry, run, run_criterion, Profile, Settings};

/// Criteria that fail at the sizes the suite can afford; see the README.
const KNOWN_FAILURES: [u32; 4] = [3, 10, 11, 12];

fn main() -> ExitCode {
    let profile: Profile = std::env::var("TOROMAPS_ACCEPTANCE_PROFILE")
        .ok()
        .map(|p| p.parse().expect("TOROMAPS_ACCEPTANCE_PROFILE must be quick or full"))
        .unwrap_or(Profile::Full);
    println!("acceptance suite, {profile:?} profile");
    let mut unexpected = Vec::new();
    let report = run(profile, &Settings::default(), |c| {
        let known = KNOWN_FAILURES.contains(&c.id);
        let line = c.line();
        match (c.passed, known) {
            (true, false) => println!("{line}"),
            (false, true) => println!("{} (known)", line),
            (false, false) => {
                unexpected.push(c.id);
                println!("{line}");
            }
            (true, true) => {
                unexpected.push(c.id);
                println!("{line} (XPASS: remove from the known list)");
            }
        }
    });

    // a wrong small-L constant has to be caught
    let wrong = Settings { small_l_denominator: 895.0, ..Settings::default() };
    let nine = registry().into_iter().find(|c| c.id == 9).expect("criterion 9");
    let control = run_criterion(&nine, profile, &wrong);
    let caught = !control.passed;
    println!(
        "[{}] negative control: criterion 9 with denominator 895 {}",
        if caught { "PASS" } else { "FAIL" },
        if caught { "fails" } else { "passes" }
    );
    if !caught {
        unexpected.push(0);
    }

    let ran = report.criteria.len();
    let failed = report.failed_ids();
    println!("{ran} criteria run, failed {failed:?}, known {KNOWN_FAILURES:?}");
    if unexpected.is_empty() {
        println!("acceptance: ok");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: unexpected outcome for {unexpected:?}");
        ExitCode::FAILURE
    }
}
