//! Pass rates of every agent on the reference pack.
//!
//! cargo run --example variant_table -p playtest-core -- [runs] [dynamics]

use std::time::Instant;

use playtest_core::env::reference_pack;
use playtest_core::mcts::{play_level_traced, AgentKind, AgentSpec, Dynamics};
use playtest_core::policy::train_policy;
use playtest_core::seed::derive_seed;
use rayon::prelude::*;

fn main() {
    let mut args = std::env::args().skip(1);
    let runs: u64 = args.next().map_or(20, |a| a.parse().expect("runs"));
    let dynamics = match args.next().as_deref() {
        Some("det") => Dynamics::Deterministic,
        _ => Dynamics::HiddenRefill,
    };
    let pack = reference_pack();
    let t0 = Instant::now();
    let weights: Vec<_> = pack
        .levels
        .par_iter()
        .map(|l| train_policy(l, 30, 32, 1).expect("training"))
        .collect();
    eprintln!("trained in {:.1?}", t0.elapsed());
    let kinds = [AgentKind::PolicyOnly, AgentKind::Vanilla, AgentKind::Policy, AgentKind::Myopic, AgentKind::PolicyMyopic];
    println!("{:<14} {}", "agent", pack.levels.iter().map(|l| format!("{:>6}", l.level_id)).collect::<String>());
    for kind in kinds {
        let t = Instant::now();
        let mut spec = AgentSpec::new(kind);
        spec.dynamics = dynamics;
        let mut line = format!("{:<14}", kind.tag());
        let mut goals = String::new();
        let mut depth = 0.0;
        let mut decisions = 0usize;
        for (level, w) in pack.levels.iter().zip(&weights) {
            let traces: Vec<_> = (0..runs)
                .into_par_iter()
                .map(|r| play_level_traced(level, &spec, Some(w), derive_seed(&[7, level.level_id as u64, r])).unwrap())
                .collect();
            let pass = traces.iter().filter(|t| t.record.passed).count() as f64 / runs as f64;
            let g = traces.iter().map(|t| t.record.goals_cleared_fraction).sum::<f64>() / runs as f64;
            for t in &traces {
                depth += t.decision_depths.iter().sum::<usize>() as f64;
                decisions += t.decision_depths.len();
            }
            line.push_str(&format!("{pass:>6.2}"));
            goals.push_str(&format!("{g:>6.2}"));
        }
        println!("{line}   goals {goals}   depth {:.2} ({:.1?})", depth / decisions.max(1) as f64, t.elapsed());
    }
}
