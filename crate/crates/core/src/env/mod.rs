//! ColorPop: a seeded pop-the-group puzzle with gravity and refill.
//!
//! Players tap a connected same-colour group of at least two tiles. The group
//! disappears, the columns fall, and fresh tiles drop in from a random stream
//! carried inside the state. The board then settles: every tile is
//! recoloured with a small probability ([`SETTLE_NOISE`]), so only the near
//! future of a position is predictable. Tiles of [`GOAL_COLOR`] count towards
//! the level goal; the level is won when `goal_count` of them have been
//! cleared within the move budget.

mod level;
mod pack;

pub use level::LevelConfig;
pub use pack::{evaluation_pack, load_pack, reference_pack, save_pack, write_pack, LevelPack};

use rand::{Rng, SeedableRng};

use crate::error::{Error, Result};
use crate::seed::{derive_seed, StreamRng};

/// Reward for every move taken.
pub const R_MOVE: f64 = -0.01;
/// Reward per goal tile cleared.
pub const R_GOAL: f64 = 0.1;
pub const R_WIN: f64 = 1.0;
pub const R_LOSE: f64 = -1.0;

/// Per-tile probability of a random recolour after each move.
pub const SETTLE_NOISE: f64 = 0.05;

/// The colour whose tiles count towards the level goal.
pub const GOAL_COLOR: u8 = 0;

const EMPTY: u8 = u8::MAX;
const MAX_CELLS: usize = 16 * 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Status {
    InProgress,
    Won,
    Lost,
}

impl Status {
    pub fn is_terminal(self) -> bool {
        self != Status::InProgress
    }
}

/// A tap on a cell. Legal actions are reported by the lexicographically
/// smallest cell of their group, so `Ord` gives the canonical action order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Action {
    pub row: u8,
    pub col: u8,
}

impl Action {
    pub fn new(row: u8, col: u8) -> Self {
        Action { row, col }
    }
}

/// A connected same-colour region of the current grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Group {
    pub anchor: Action,
    pub color: u8,
    pub size: u32,
}

impl Group {
    pub fn goal_tiles(&self) -> u32 {
        if self.color == GOAL_COLOR {
            self.size
        } else {
            0
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepEvents {
    pub tiles_cleared: u32,
    pub goals_cleared: u32,
    pub won: bool,
    pub lost: bool,
}

impl StepEvents {
    /// The reward table: a move penalty, a bonus per goal tile and the
    /// terminal win/lose bonuses.
    pub fn reward(&self) -> f64 {
        let mut r = R_MOVE + R_GOAL * f64::from(self.goals_cleared);
        if self.won {
            r += R_WIN;
        }
        if self.lost {
            r += R_LOSE;
        }
        r
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub next_state: GameState,
    pub reward: f64,
    pub events: StepEvents,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GameState {
    width: u8,
    height: u8,
    num_colors: u8,
    /// Row-major, row 0 at the top.
    grid: Vec<u8>,
    moves_used: u32,
    goal_count: u32,
    goals_remaining: u32,
    tiles_cleared: u32,
    rng: StreamRng,
    status: Status,
    settle_noise: f64,
}

/// Builds the starting state of a level. The same `(config, seed)` always
/// yields the same grid and refill stream.
pub fn new_level(config: &LevelConfig, seed: u64) -> Result<GameState> {
    config.validate()?;
    let rng = StreamRng::seed_from_u64(derive_seed(&[
        seed,
        config.refill_seed_salt,
        u64::from(config.level_id),
    ]));
    let mut state = GameState {
        width: config.width as u8,
        height: config.height as u8,
        num_colors: config.num_colors as u8,
        grid: vec![EMPTY; (config.width * config.height) as usize],
        moves_used: 0,
        goal_count: config.goal_count,
        goals_remaining: config.goal_count,
        tiles_cleared: 0,
        rng,
        status: Status::InProgress,
        settle_noise: SETTLE_NOISE,
    };
    state.reshuffle();
    Ok(state)
}

/// Every playable group in canonical order. Empty for terminal states.
pub fn legal_actions(state: &GameState) -> Vec<Action> {
    if state.status.is_terminal() {
        return Vec::new();
    }
    state.groups().into_iter().map(|g| g.anchor).collect()
}

pub fn is_terminal(state: &GameState) -> Status {
    state.status
}

/// Applies one tap. `move_budget` is the number of moves the acting agent
/// is allowed for the whole level.
pub fn step(state: &GameState, action: Action, move_budget: u32) -> Result<StepOutcome> {
    if state.status.is_terminal() {
        return Err(Error::contract(format!("step on terminal state ({:?})", state.status)));
    }
    if state.moves_used >= move_budget {
        return Err(Error::contract(format!(
            "move budget {move_budget} already used up"
        )));
    }
    let start = state
        .index(action)
        .ok_or_else(|| Error::contract(format!("action {action:?} outside the grid")))?;
    let mut next = state.clone();
    let (members, color) = next.flood(start);
    if members.len() < 2 {
        return Err(Error::contract(format!(
            "action {action:?} does not select a group of two or more tiles"
        )));
    }
    for &i in &members {
        next.grid[i] = EMPTY;
    }
    let tiles = members.len() as u32;
    let goal_tiles = if color == GOAL_COLOR { tiles } else { 0 };
    let goals_cleared = goal_tiles.min(next.goals_remaining);
    next.goals_remaining -= goals_cleared;
    next.tiles_cleared += tiles;
    next.moves_used += 1;
    next.collapse();
    next.refill();
    next.settle();

    let mut events = StepEvents {
        tiles_cleared: tiles,
        goals_cleared,
        ..StepEvents::default()
    };
    if next.goals_remaining == 0 {
        next.status = Status::Won;
        events.won = true;
    } else if next.moves_used >= move_budget {
        next.status = Status::Lost;
        events.lost = true;
    } else if !next.has_legal_action() {
        next.reshuffle();
    }
    Ok(StepOutcome {
        reward: events.reward(),
        next_state: next,
        events,
    })
}

impl GameState {
    /// Builds a state from explicit rows of colour ids. Intended for tests and
    /// tooling; the grid is taken as is, even when it has no legal move.
    pub fn from_rows(rows: &[&[u8]], num_colors: u8, goal_count: u32, seed: u64) -> Result<Self> {
        let height = rows.len();
        let width = rows.first().map_or(0, |r| r.len());
        if height == 0 || width == 0 || height > 16 || width > 16 {
            return Err(Error::config("grid must be between 1x1 and 16x16"));
        }
        if rows.iter().any(|r| r.len() != width) {
            return Err(Error::config("ragged grid rows"));
        }
        if rows.iter().flat_map(|r| r.iter()).any(|&c| c >= num_colors) {
            return Err(Error::config("colour id out of range"));
        }
        if goal_count == 0 {
            return Err(Error::config("goal_count must be at least 1"));
        }
        Ok(GameState {
            width: width as u8,
            height: height as u8,
            num_colors,
            grid: rows.iter().flat_map(|r| r.iter().copied()).collect(),
            moves_used: 0,
            goal_count,
            goals_remaining: goal_count,
            tiles_cleared: 0,
            rng: StreamRng::seed_from_u64(seed),
            status: Status::InProgress,
            settle_noise: SETTLE_NOISE,
        })
    }

    /// Replaces the settle noise; 0 makes a move's outcome depend only on
    /// the refill stream.
    pub fn with_settle_noise(mut self, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::config(format!("settle noise {p} outside [0, 1]")));
        }
        self.settle_noise = p;
        Ok(self)
    }

    pub fn settle_noise(&self) -> f64 {
        self.settle_noise
    }

    pub fn width(&self) -> usize {
        self.width as usize
    }

    pub fn height(&self) -> usize {
        self.height as usize
    }

    pub fn cells(&self) -> usize {
        self.grid.len()
    }

    pub fn num_colors(&self) -> u8 {
        self.num_colors
    }

    pub fn cell(&self, row: usize, col: usize) -> Option<u8> {
        let c = self.grid[row * self.width() + col];
        (c != EMPTY).then_some(c)
    }

    pub fn moves_used(&self) -> u32 {
        self.moves_used
    }

    pub fn goal_count(&self) -> u32 {
        self.goal_count
    }

    pub fn goals_remaining(&self) -> u32 {
        self.goals_remaining
    }

    /// Tiles of any colour cleared since the level started.
    pub fn tiles_cleared(&self) -> u32 {
        self.tiles_cleared
    }

    pub fn status(&self) -> Status {
        self.status
    }

    pub fn goals_cleared_fraction(&self) -> f64 {
        f64::from(self.goal_count - self.goals_remaining) / f64::from(self.goal_count)
    }

    /// Replaces the refill stream. Used to model refills the agent cannot
    /// foresee; the grid itself is untouched.
    pub fn reseed(&mut self, seed: u64) {
        self.rng = StreamRng::seed_from_u64(seed);
    }

    /// Regenerates a dead board in place (no legal move while in progress).
    /// Moves are not charged. Returns whether a reshuffle happened.
    pub fn resolve_dead_board(&mut self) -> bool {
        if self.status.is_terminal() || self.has_legal_action() {
            return false;
        }
        self.reshuffle();
        true
    }

    /// All groups of two or more tiles, ordered by anchor.
    pub fn groups(&self) -> Vec<Group> {
        let mut out = Vec::new();
        self.scan_groups(|g| {
            if g.size >= 2 {
                out.push(g);
            }
            true
        });
        out
    }

    /// The group containing the tapped cell, if the cell is occupied.
    pub fn group_at(&self, action: Action) -> Option<Group> {
        let start = self.index(action)?;
        let (members, color) = self.flood(start);
        let anchor = members.iter().copied().min()?;
        let w = self.width();
        Some(Group {
            anchor: Action::new((anchor / w) as u8, (anchor % w) as u8),
            color,
            size: members.len() as u32,
        })
    }

    pub fn has_legal_action(&self) -> bool {
        let mut found = false;
        self.scan_groups(|g| {
            found = g.size >= 2;
            !found
        });
        found
    }

    fn index(&self, a: Action) -> Option<usize> {
        let (r, c) = (a.row as usize, a.col as usize);
        (r < self.height() && c < self.width()).then(|| r * self.width() + c)
    }

    /// Visits every group once, in row-major order of anchors, until `visit`
    /// returns false.
    fn scan_groups(&self, mut visit: impl FnMut(Group) -> bool) {
        let w = self.width();
        let n = self.grid.len();
        let mut seen = [false; MAX_CELLS];
        let mut stack = [0u16; MAX_CELLS];
        for start in 0..n {
            let color = self.grid[start];
            if seen[start] || color == EMPTY {
                continue;
            }
            seen[start] = true;
            stack[0] = start as u16;
            let mut top = 1;
            let mut size = 0u32;
            while top > 0 {
                top -= 1;
                let i = stack[top] as usize;
                size += 1;
                let (r, c) = (i / w, i % w);
                let mut push = |j: usize, stack: &mut [u16; MAX_CELLS], top: &mut usize| {
                    if !seen[j] && self.grid[j] == color {
                        seen[j] = true;
                        stack[*top] = j as u16;
                        *top += 1;
                    }
                };
                if r > 0 {
                    push(i - w, &mut stack, &mut top);
                }
                if i + w < n {
                    push(i + w, &mut stack, &mut top);
                }
                if c > 0 {
                    push(i - 1, &mut stack, &mut top);
                }
                if c + 1 < w {
                    push(i + 1, &mut stack, &mut top);
                }
            }
            let anchor = Action::new((start / w) as u8, (start % w) as u8);
            if !visit(Group { anchor, color, size }) {
                return;
            }
        }
    }

    /// Cells of the group containing `start`, and its colour.
    fn flood(&self, start: usize) -> (Vec<usize>, u8) {
        let color = self.grid[start];
        if color == EMPTY {
            return (Vec::new(), color);
        }
        let w = self.width();
        let n = self.grid.len();
        let mut seen = [false; MAX_CELLS];
        let mut members = vec![start];
        seen[start] = true;
        let mut k = 0;
        while k < members.len() {
            let i = members[k];
            k += 1;
            let (r, c) = (i / w, i % w);
            let mut neighbours = [usize::MAX; 4];
            if r > 0 {
                neighbours[0] = i - w;
            }
            if i + w < n {
                neighbours[1] = i + w;
            }
            if c > 0 {
                neighbours[2] = i - 1;
            }
            if c + 1 < w {
                neighbours[3] = i + 1;
            }
            for j in neighbours.into_iter().filter(|&j| j != usize::MAX) {
                if !seen[j] && self.grid[j] == color {
                    seen[j] = true;
                    members.push(j);
                }
            }
        }
        (members, color)
    }

    /// Drops tiles down each column so the empties end up on top.
    fn collapse(&mut self) {
        let (w, h) = (self.width(), self.height());
        for c in 0..w {
            let mut write = h;
            for r in (0..h).rev() {
                let v = self.grid[r * w + c];
                if v != EMPTY {
                    write -= 1;
                    self.grid[write * w + c] = v;
                }
            }
            for r in 0..write {
                self.grid[r * w + c] = EMPTY;
            }
        }
    }

    /// Fills empty cells column by column, top to bottom within a column,
    /// drawing each colour uniformly from the state's stream.
    fn refill(&mut self) {
        let (w, h) = (self.width(), self.height());
        let colors = self.num_colors;
        for c in 0..w {
            for r in 0..h {
                let i = r * w + c;
                if self.grid[i] == EMPTY {
                    self.grid[i] = self.rng.random_range(0..colors);
                }
            }
        }
    }

    /// Recolours each tile with probability `settle_noise`, in row-major
    /// order. Skipped entirely when the noise is zero.
    fn settle(&mut self) {
        if self.settle_noise <= 0.0 {
            return;
        }
        let colors = self.num_colors;
        for i in 0..self.grid.len() {
            if self.rng.random_bool(self.settle_noise) {
                self.grid[i] = self.rng.random_range(0..colors);
            }
        }
    }

    /// Redraws the whole board until at least one group is playable.
    fn reshuffle(&mut self) {
        loop {
            self.grid.iter_mut().for_each(|c| *c = EMPTY);
            self.refill();
            if self.has_legal_action() {
                return;
            }
        }
    }
}

#[cfg(test)]
mod tests;
