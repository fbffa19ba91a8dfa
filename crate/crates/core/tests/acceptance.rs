//! Runs every acceptance criterion at desk scale and prints one line each.

use radon_hgf::suite::{run_criterion, SuiteLevel, CRITERIA};

#[test]
fn acceptance_criteria() {
    let mut failed = Vec::new();
    for id in 1..=CRITERIA {
        let report = run_criterion(id, SuiteLevel::Desk, 0);
        println!("{report}");
        if !report.pass {
            failed.push(id);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
