use std::collections::BTreeMap;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};

use super::*;
use crate::seed::StreamRng;

fn cfg(width: u32, height: u32, num_colors: u32, goal_count: u32, move_budget: u32) -> LevelConfig {
    LevelConfig {
        level_id: 1,
        width,
        height,
        num_colors,
        goal_count,
        move_budget,
        refill_seed_salt: 17,
    }
}

fn snapshot(s: &GameState) -> Vec<Option<u8>> {
    (0..s.height())
        .flat_map(|r| (0..s.width()).map(move |c| (r, c)))
        .map(|(r, c)| s.cell(r, c))
        .collect()
}

/// Union-find over adjacent equal cells, then the smallest (row, col) of
/// every component with two or more members.
fn oracle_actions(s: &GameState) -> Vec<Action> {
    let (w, h) = (s.width(), s.height());
    let mut parent: Vec<usize> = (0..w * h).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        p[x] = r;
        r
    }
    for r in 0..h {
        for c in 0..w {
            let here = s.cell(r, c);
            if here.is_none() {
                continue;
            }
            if c + 1 < w && s.cell(r, c + 1) == here {
                let (a, b) = (find(&mut parent, r * w + c), find(&mut parent, r * w + c + 1));
                parent[a] = b;
            }
            if r + 1 < h && s.cell(r + 1, c) == here {
                let (a, b) = (find(&mut parent, r * w + c), find(&mut parent, (r + 1) * w + c));
                parent[a] = b;
            }
        }
    }
    let mut comps: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
    for r in 0..h {
        for c in 0..w {
            if s.cell(r, c).is_some() {
                let root = find(&mut parent, r * w + c);
                comps.entry(root).or_default().push((r, c));
            }
        }
    }
    let mut out: Vec<Action> = comps
        .values()
        .filter(|m| m.len() >= 2)
        .map(|m| {
            let (r, c) = *m.iter().min().unwrap();
            Action::new(r as u8, c as u8)
        })
        .collect();
    out.sort();
    out
}

#[test]
fn new_level_is_deterministic() {
    let c = cfg(4, 4, 2, 5, 10);
    assert_eq!(new_level(&c, 7).unwrap(), new_level(&c, 7).unwrap());
}

#[test]
fn different_seeds_give_different_grids() {
    let c = cfg(6, 6, 3, 5, 10);
    let differing = (0..100u64)
        .filter(|&k| {
            let a = new_level(&c, 2 * k + 1).unwrap();
            let b = new_level(&c, 2 * k + 2).unwrap();
            snapshot(&a) != snapshot(&b)
        })
        .count();
    assert!(differing >= 99, "only {differing} of 100 seed pairs differ");
}

#[test]
fn zero_goal_count_is_rejected() {
    assert!(matches!(new_level(&cfg(4, 4, 2, 0, 5), 1), Err(Error::Config(_))));
}

#[test]
fn out_of_range_dimensions_are_rejected() {
    assert!(new_level(&cfg(3, 4, 2, 1, 5), 1).is_err());
    assert!(new_level(&cfg(4, 17, 2, 1, 5), 1).is_err());
    assert!(new_level(&cfg(4, 4, 9, 1, 5), 1).is_err());
    assert!(new_level(&cfg(4, 4, 2, 161, 5), 1).is_err());
    assert!(new_level(&cfg(4, 4, 2, 160, 5), 1).is_ok());
}

#[test]
fn fresh_level_is_populated_and_in_progress() {
    let s = new_level(&cfg(8, 8, 4, 10, 10), 3).unwrap();
    assert_eq!(is_terminal(&s), Status::InProgress);
    assert_eq!(s.moves_used(), 0);
    assert_eq!(s.goals_remaining(), 10);
    assert!(snapshot(&s).iter().all(|c| matches!(c, Some(v) if *v < 4)));
    assert!(!legal_actions(&s).is_empty());
}

#[test]
fn uniform_grid_has_one_action() {
    let s = GameState::from_rows(&[&[1, 1], &[1, 1]], 2, 3, 0).unwrap();
    assert_eq!(legal_actions(&s), vec![Action::new(0, 0)]);
}

#[test]
fn checkerboard_is_dead_and_gets_reshuffled() {
    let rows: Vec<Vec<u8>> = (0..4).map(|r| (0..4).map(|c| ((r + c) % 2) as u8).collect()).collect();
    let rows: Vec<&[u8]> = rows.iter().map(|r| r.as_slice()).collect();
    let mut s = GameState::from_rows(&rows, 2, 3, 5).unwrap();
    assert!(legal_actions(&s).is_empty());
    assert!(s.resolve_dead_board());
    assert!(!legal_actions(&s).is_empty());
    assert_eq!(s.moves_used(), 0);
    assert_eq!(s.status(), Status::InProgress);
    assert!(!s.resolve_dead_board());
}

#[test]
fn seeded_grid_matches_flood_fill_oracle() {
    let mut c = cfg(6, 6, 3, 5, 10);
    c.refill_seed_salt = 0;
    let s = new_level(&c, 11).unwrap();
    let actions = legal_actions(&s);
    assert!(!actions.is_empty());
    assert_eq!(actions, oracle_actions(&s));
}

#[test]
fn legal_actions_match_oracle_on_random_states() {
    let mut rng = StreamRng::seed_from_u64(99);
    for k in 0..1000u64 {
        let c = cfg(
            rng.random_range(4..=10),
            rng.random_range(4..=10),
            rng.random_range(2..=6),
            150,
            1000,
        );
        let mut s = new_level(&c, k).unwrap();
        let moves = rng.random_range(0..6);
        for _ in 0..moves {
            let acts = legal_actions(&s);
            let a = acts[rng.random_range(0..acts.len())];
            s = step(&s, a, 1000).unwrap().next_state;
        }
        assert_eq!(legal_actions(&s), oracle_actions(&s), "state {k}");
    }
}

#[test]
fn winning_pop_pays_goal_and_win_bonus() {
    // three goal tiles in the top row, goal of exactly three
    let s = GameState::from_rows(&[&[0, 0, 0, 1], &[1, 2, 1, 2], &[2, 1, 2, 1], &[1, 2, 1, 2]], 3, 3, 1)
        .unwrap();
    let out = step(&s, Action::new(0, 0), 10).unwrap();
    assert_eq!(out.next_state.status(), Status::Won);
    assert_eq!(out.events.goals_cleared, 3);
    assert!(out.events.won);
    assert!((out.reward - (R_MOVE + R_GOAL * 3.0 + R_WIN)).abs() < 1e-12);
}

#[test]
fn last_move_without_goal_progress_loses() {
    let s = GameState::from_rows(&[&[1, 1, 2, 0], &[2, 0, 1, 2], &[0, 2, 0, 1], &[1, 0, 2, 0]], 3, 5, 1)
        .unwrap();
    let out = step(&s, Action::new(0, 0), 1).unwrap();
    assert_eq!(out.next_state.status(), Status::Lost);
    assert_eq!(out.events.goals_cleared, 0);
    assert!((out.reward - (R_MOVE + R_LOSE)).abs() < 1e-12);
    assert_eq!(is_terminal(&out.next_state), Status::Lost);
}

#[test]
fn step_replays_identically() {
    let s = new_level(&cfg(8, 8, 4, 20, 10), 5).unwrap();
    let a = legal_actions(&s)[0];
    let first = step(&s, a, 10).unwrap();
    for _ in 0..10 {
        assert_eq!(step(&s, a, 10).unwrap(), first);
    }
}

#[test]
fn illegal_and_terminal_steps_fail() {
    let s = GameState::from_rows(&[&[0, 1, 0, 1], &[1, 0, 1, 0], &[0, 1, 1, 1], &[1, 0, 1, 0]], 2, 3, 1)
        .unwrap();
    assert!(matches!(step(&s, Action::new(0, 0), 5), Err(Error::Contract(_))));
    assert!(matches!(step(&s, Action::new(9, 0), 5), Err(Error::Contract(_))));
    let row: &[u8] = &[0, 0, 1, 1];
    let won = step(&GameState::from_rows(&[row; 4], 2, 2, 1).unwrap(), Action::new(0, 0), 5)
        .unwrap()
        .next_state;
    assert_eq!(won.status(), Status::Won);
    assert!(legal_actions(&won).is_empty());
    assert!(matches!(step(&won, Action::new(0, 2), 5), Err(Error::Contract(_))));
}

#[test]
fn gravity_drops_tiles_and_refills_from_top() {
    let s = GameState::from_rows(&[&[1, 2, 1, 2], &[0, 0, 2, 1], &[2, 1, 1, 2], &[1, 2, 2, 1]], 3, 9, 4)
        .unwrap()
        .with_settle_noise(0.0)
        .unwrap();
    let next = step(&s, Action::new(1, 0), 5).unwrap().next_state;
    // the tiles that sat above the popped pair fell by one row
    assert_eq!(next.cell(2, 0), Some(2));
    assert_eq!(next.cell(1, 0), Some(1));
    assert_eq!(next.cell(1, 1), Some(2));
    assert_eq!(next.cell(3, 0), Some(1));
    assert_eq!(next.goals_remaining(), 7);
    assert_eq!(next.tiles_cleared(), 2);
}

#[test]
fn settling_recolours_untouched_columns() {
    let rows: [&[u8]; 4] = [&[1, 2, 1, 2], &[0, 0, 2, 1], &[2, 1, 1, 2], &[1, 2, 2, 1]];
    let untouched = |s: &GameState| -> Vec<Option<u8>> { (0..4).flat_map(|r| [s.cell(r, 2), s.cell(r, 3)]).collect() };
    let before = untouched(&GameState::from_rows(&rows, 3, 9, 0).unwrap());
    let mut changed = 0;
    for seed in 0..50 {
        let quiet = GameState::from_rows(&rows, 3, 9, seed).unwrap().with_settle_noise(0.0).unwrap();
        assert_eq!(untouched(&step(&quiet, Action::new(1, 0), 5).unwrap().next_state), before);
        let noisy = GameState::from_rows(&rows, 3, 9, seed).unwrap().with_settle_noise(0.5).unwrap();
        if untouched(&step(&noisy, Action::new(1, 0), 5).unwrap().next_state) != before {
            changed += 1;
        }
    }
    assert!(changed >= 45);
    assert!(GameState::from_rows(&rows, 3, 9, 0).unwrap().with_settle_noise(1.5).is_err());
    assert_eq!(GameState::from_rows(&rows, 3, 9, 0).unwrap().settle_noise(), SETTLE_NOISE);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn trajectories_conserve_cells_and_replay(seed in any::<u64>(), picks in prop::collection::vec(any::<u32>(), 1..25)) {
        let c = cfg(7, 6, 4, 60, 20);
        let run = |seed: u64| {
            let mut s = new_level(&c, seed).unwrap();
            let mut trace = vec![(snapshot(&s), 0.0)];
            for &p in &picks {
                if s.status().is_terminal() {
                    break;
                }
                let acts = legal_actions(&s);
                let out = step(&s, acts[p as usize % acts.len()], c.move_budget).unwrap();
                assert_eq!(out.next_state.moves_used(), s.moves_used() + 1);
                assert!(out.next_state.goals_remaining() <= s.goals_remaining());
                assert!(snapshot(&out.next_state).iter().all(|v| matches!(v, Some(x) if *x < 4)));
                assert!((out.reward - out.events.reward()).abs() == 0.0);
                assert_eq!(out.next_state.status() == Status::Won, out.next_state.goals_remaining() == 0);
                s = out.next_state;
                trace.push((snapshot(&s), out.reward));
            }
            assert!(s.moves_used() <= c.move_budget);
            trace
        };
        prop_assert_eq!(run(seed), run(seed));
    }
}
