//! One line per acceptance criterion; exits nonzero if any fails.

use std::time::{Duration, Instant};

use openbath::validation::{criterion, ALL};

const SEED: u64 = 7;

/// Wall-clock budget per criterion.
fn budget(id: u8) -> Duration {
    Duration::from_secs(match id {
        1 => 10,
        2 => 5,
        3 | 4 => 30,
        5 => 60,
        6 => 300,
        7 => 120,
        8 | 10 => 60,
        9 => 300,
        _ => 0,
    })
}

fn main() {
    let only: Vec<u8> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for id in ALL.iter().copied().filter(|id| only.is_empty() || only.contains(id)) {
        let start = Instant::now();
        let outcome = criterion(id, SEED);
        let elapsed = start.elapsed();
        let in_time = elapsed <= budget(id);
        match outcome {
            Ok(r) => {
                let ok = r.passed && in_time;
                failed += usize::from(!ok);
                println!(
                    "{} criterion {:>2} {}: metric {:.4e} ({}); {}; {:.1}s of {}s",
                    if ok { "PASS" } else { "FAIL" },
                    id,
                    r.name,
                    r.metric,
                    r.threshold,
                    r.detail,
                    elapsed.as_secs_f64(),
                    budget(id).as_secs()
                );
            }
            Err(e) => {
                failed += 1;
                println!("FAIL criterion {id:>2}: error {e}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
