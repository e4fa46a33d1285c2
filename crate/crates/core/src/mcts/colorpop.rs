use super::{Mdp, RolloutPolicy};
use crate::env::{self, Action, GameState};
use crate::policy::{sample_action, ActionPolicy};
use crate::seed::StreamRng;

/// The puzzle as a search problem under a fixed agent move budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ColorPop {
    pub move_budget: u32,
}

impl Mdp for ColorPop {
    type State = GameState;
    type Action = Action;

    fn actions(&self, state: &GameState) -> Vec<Action> {
        env::legal_actions(state)
    }

    fn step(&self, state: &GameState, action: Action) -> (GameState, f64) {
        let out = env::step(state, action, self.move_budget)
            .expect("search only applies legal actions to live states");
        (out.next_state, out.reward)
    }

    fn is_terminal(&self, state: &GameState) -> bool {
        state.status().is_terminal()
    }
}

impl RolloutPolicy<ColorPop> for ActionPolicy {
    fn choose(&self, _mdp: &ColorPop, state: &GameState, rng: &mut StreamRng) -> Option<Action> {
        sample_action(state, self, rng).ok()
    }
}
