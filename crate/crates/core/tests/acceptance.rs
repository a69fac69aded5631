//! Runs every acceptance criterion at its stated tolerance and prints one
//! PASS/FAIL line per criterion.

use ssmlab::suite::{run_criterion, SuiteConfig, CRITERIA};
use std::process::ExitCode;
use std::time::Instant;

const SEED: u64 = 20_240_611;

/// Wall-clock budgets in seconds for the criteria that state one.
fn budget(id: u32) -> Option<f64> {
    match id {
        1 => Some(60.0),
        2 => Some(120.0),
        _ => None,
    }
}

fn main() -> ExitCode {
    let cfg = SuiteConfig::new(SEED);
    let mut failed = Vec::new();
    for (id, name) in CRITERIA {
        let start = Instant::now();
        let outcome = run_criterion(id, &cfg, None);
        let secs = start.elapsed().as_secs_f64();
        let (pass, line) = match outcome {
            Ok(o) => {
                let in_budget = budget(id).map_or(true, |b| secs <= b);
                let time_note = if in_budget { String::new() } else { " over time budget".into() };
                (
                    o.pass && in_budget,
                    format!(
                        "{} instances, worst {:.3e} (threshold {:.1e}), {:.2}s{}; {}",
                        o.instances, o.worst, o.threshold, secs, time_note, o.detail
                    ),
                )
            }
            Err(e) => (false, format!("error: {e}")),
        };
        println!("criterion {id:>2} {name:<26} {}  {line}", if pass { "PASS" } else { "FAIL" });
        if !pass {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all {} criteria passed", CRITERIA.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed criteria {failed:?}");
        ExitCode::FAILURE
    }
}
