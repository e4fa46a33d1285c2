use std::collections::VecDeque;

use rand::Rng;

use super::{Mdp, RolloutPolicy, VariantConfig};
use crate::error::{Error, Result};
use crate::num::Real;
use crate::seed::StreamRng;

pub type NodeId = usize;

#[derive(Debug, Clone)]
pub struct SearchNode<M: Mdp, R> {
    /// Cached result of applying the edge action; never recomputed.
    pub state: M::State,
    /// Reward received on entering this node.
    pub edge_reward: R,
    pub visits: u64,
    /// Sum of backed-up returns.
    pub value: R,
    /// Expanded children, sorted by action.
    pub children: Vec<(M::Action, NodeId)>,
    /// Legal actions not expanded yet, in canonical order.
    pub untried: Vec<M::Action>,
    pub terminal: bool,
}

impl<M: Mdp, R: Real> SearchNode<M, R> {
    fn new(mdp: &M, state: M::State, edge_reward: R) -> Self {
        let terminal = mdp.is_terminal(&state);
        let untried = if terminal { Vec::new() } else { mdp.actions(&state) };
        SearchNode {
            state,
            edge_reward,
            visits: 0,
            value: R::zero(),
            children: Vec::new(),
            untried,
            terminal,
        }
    }

    pub fn mean_value(&self) -> R {
        self.value / R::of(self.visits as f64)
    }

    pub fn child(&self, action: M::Action) -> Option<NodeId> {
        self.children
            .binary_search_by(|(a, _)| a.cmp(&action))
            .ok()
            .map(|i| self.children[i].1)
    }
}

/// `V/N + c·sqrt(ln N_parent / N)`. Only defined for visited children.
pub fn uct_score<R: Real>(value: R, visits: u64, parent_visits: u64, c: R) -> R {
    let n = R::of(visits as f64);
    value / n + c * (R::of(parent_visits as f64).ln() / n).sqrt()
}

/// Discounted return `Σ γ^t r_t` of at most `cap` policy moves from `state`,
/// with `t = 0` at the first move. Terminal states return zero.
pub fn rollout<M: Mdp, R: Real>(
    mdp: &M,
    state: &M::State,
    gamma: R,
    cap: usize,
    policy: &dyn RolloutPolicy<M>,
    rng: &mut StreamRng,
) -> R {
    let mut total = R::zero();
    let mut discount = R::one();
    let mut current = state.clone();
    for _ in 0..cap {
        if mdp.is_terminal(&current) {
            break;
        }
        let Some(action) = policy.choose(mdp, &current, rng) else {
            break;
        };
        let (next, reward) = mdp.step(&current, action);
        total = total + discount * R::of(reward);
        discount = discount * gamma;
        current = next;
    }
    total
}

/// One search tree, owned by a single run. The root is always node 0.
pub struct SearchTree<'p, M: Mdp, R: Real> {
    mdp: M,
    nodes: Vec<SearchNode<M, R>>,
    config: VariantConfig,
    gamma: R,
    c: R,
    policy: &'p dyn RolloutPolicy<M>,
    rng: StreamRng,
    /// Visits the root owns beyond those of its children: 0 for a fresh
    /// root, 1 for a re-rooted child that was once a rollout leaf.
    root_own_visits: u64,
}

impl<'p, M: Mdp, R: Real> SearchTree<'p, M, R> {
    pub fn new(
        mdp: M,
        root_state: M::State,
        config: VariantConfig,
        policy: &'p dyn RolloutPolicy<M>,
        rng: StreamRng,
    ) -> Result<Self> {
        config.validate()?;
        let root = SearchNode::new(&mdp, root_state, R::zero());
        Ok(SearchTree {
            gamma: R::of(config.gamma),
            c: R::of(config.c),
            mdp,
            nodes: vec![root],
            config,
            policy,
            rng,
            root_own_visits: 0,
        })
    }

    pub const ROOT: NodeId = 0;

    pub fn root(&self) -> &SearchNode<M, R> {
        &self.nodes[Self::ROOT]
    }

    pub fn node(&self, id: NodeId) -> &SearchNode<M, R> {
        &self.nodes[id]
    }

    #[cfg(test)]
    pub(crate) fn node_mut(&mut self, id: NodeId) -> &mut SearchNode<M, R> {
        &mut self.nodes[id]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn config(&self) -> &VariantConfig {
        &self.config
    }

    pub fn mdp(&self) -> &M {
        &self.mdp
    }

    /// Adds a child by hand, bypassing expansion; for building fixtures.
    pub fn attach(&mut self, parent: NodeId, action: M::Action, state: M::State, edge_reward: R) -> NodeId {
        let id = self.nodes.len();
        self.nodes.push(SearchNode::new(&self.mdp, state, edge_reward));
        let p = &mut self.nodes[parent];
        p.untried.retain(|a| *a != action);
        let at = p.children.partition_point(|(a, _)| *a < action);
        p.children.insert(at, (action, id));
        id
    }

    /// Descends from the root while the current node is fully expanded,
    /// following the highest UCT score (lowest action on ties). Stops at a
    /// node with untried actions or at a terminal node.
    pub fn select(&self) -> Vec<NodeId> {
        let mut path = vec![Self::ROOT];
        let mut current = Self::ROOT;
        loop {
            let node = &self.nodes[current];
            if node.terminal || !node.untried.is_empty() || node.children.is_empty() {
                return path;
            }
            let mut best: Option<(R, NodeId)> = None;
            for &(_, child) in &node.children {
                let ch = &self.nodes[child];
                let score = uct_score(ch.value, ch.visits, node.visits, self.c);
                if best.is_none_or(|(s, _)| score > s) {
                    best = Some((score, child));
                }
            }
            current = best.expect("fully expanded node has children").1;
            path.push(current);
        }
    }

    /// Expands one untried action of `node`, chosen uniformly at random.
    pub fn expand(&mut self, node: NodeId) -> Result<NodeId> {
        let n = &self.nodes[node];
        if n.terminal {
            return Err(Error::contract("cannot expand a terminal node"));
        }
        if n.untried.is_empty() {
            return Err(Error::contract("node has no untried action"));
        }
        let pick = self.rng.random_range(0..n.untried.len());
        let action = self.nodes[node].untried.remove(pick);
        let (state, reward) = self.mdp.step(&self.nodes[node].state, action);
        let id = self.nodes.len();
        self.nodes.push(SearchNode::new(&self.mdp, state, R::of(reward)));
        let children = &mut self.nodes[node].children;
        let at = children.partition_point(|(a, _)| *a < action);
        children.insert(at, (action, id));
        Ok(id)
    }

    /// Rollout from a node's cached state with the tree's policy and stream.
    pub fn rollout_from(&mut self, node: NodeId) -> R {
        rollout(
            &self.mdp,
            &self.nodes[node].state,
            self.gamma,
            self.config.rollout_cap,
            self.policy,
            &mut self.rng,
        )
    }

    /// Backs `leaf_value` (the return collected below the last node of the
    /// path) up to the root: each node gets one visit and adds
    /// `V̂ = r(node) + γ·V̂(next)`.
    pub fn backpropagate(&mut self, path: &[NodeId], leaf_value: R) {
        let mut backed = leaf_value;
        for &id in path.iter().rev() {
            let node = &mut self.nodes[id];
            backed = node.edge_reward + self.gamma * backed;
            node.visits += 1;
            node.value = node.value + backed;
        }
    }

    /// One select, expand, rollout, backpropagate pass. Terminal leaves are
    /// backed up with a zero rollout value.
    pub fn iterate(&mut self) -> Result<()> {
        let mut path = self.select();
        let leaf = *path.last().expect("path starts at the root");
        let value = if self.nodes[leaf].terminal {
            R::zero()
        } else {
            let child = self.expand(leaf)?;
            path.push(child);
            self.rollout_from(child)
        };
        self.backpropagate(&path, value);
        Ok(())
    }

    /// Runs the configured number of iterations and returns the most
    /// visited root action (lowest action on ties).
    pub fn decide(&mut self) -> Result<M::Action> {
        if self.root().terminal {
            return Err(Error::contract("decide called on a terminal root"));
        }
        for _ in 0..self.config.budget {
            self.iterate()?;
        }
        self.most_visited_action()
            .ok_or_else(|| Error::contract("root has no expanded child"))
    }

    pub fn most_visited_action(&self) -> Option<M::Action> {
        let mut best: Option<(u64, M::Action)> = None;
        for &(action, child) in &self.root().children {
            let visits = self.nodes[child].visits;
            if best.is_none_or(|(v, _)| visits > v) {
                best = Some((visits, action));
            }
        }
        best.map(|(_, a)| a)
    }

    /// Depth of the deepest node below the root.
    pub fn max_depth(&self) -> usize {
        let mut deepest = 0;
        let mut queue = VecDeque::from([(Self::ROOT, 0usize)]);
        while let Some((id, depth)) = queue.pop_front() {
            deepest = deepest.max(depth);
            queue.extend(self.nodes[id].children.iter().map(|&(_, c)| (c, depth + 1)));
        }
        deepest
    }

    /// Moves the root to the child reached by `action` when its cached state
    /// equals the state actually observed, keeping its subtree. Otherwise
    /// starts over from `observed`. Returns whether the subtree was kept.
    pub fn advance(&mut self, action: M::Action, observed: M::State) -> bool {
        match self.root().child(action) {
            Some(child) if self.nodes[child].state == observed => {
                self.reroot(child);
                true
            }
            _ => {
                self.nodes = vec![SearchNode::new(&self.mdp, observed, R::zero())];
                self.root_own_visits = 0;
                false
            }
        }
    }

    fn reroot(&mut self, new_root: NodeId) {
        let mut old: Vec<Option<SearchNode<M, R>>> = std::mem::take(&mut self.nodes).into_iter().map(Some).collect();
        let mut queue = VecDeque::from([new_root]);
        let mut remap = vec![usize::MAX; old.len()];
        let mut order = Vec::new();
        while let Some(id) = queue.pop_front() {
            remap[id] = order.len();
            order.push(id);
            let node = old[id].as_ref().expect("tree nodes have one parent");
            queue.extend(node.children.iter().map(|&(_, c)| c));
        }
        self.nodes = order
            .iter()
            .map(|&id| {
                let mut node = old[id].take().expect("visited once");
                for (_, c) in node.children.iter_mut() {
                    *c = remap[*c];
                }
                node
            })
            .collect();
        let root = &self.nodes[Self::ROOT];
        let below: u64 = root.children.iter().map(|&(_, c)| self.nodes[c].visits).sum();
        self.root_own_visits = root.visits - below;
    }

    /// Visits the root holds beyond those of its children.
    pub fn root_own_visits(&self) -> u64 {
        self.root_own_visits
    }

    /// Checks `N = 1 + Σ N(children)` for every expanded non-root node,
    /// `N = own + Σ N(children)` at the root, and that untried and expanded
    /// actions partition the legal actions. Returns the first offender.
    pub fn check_consistency(&self) -> std::result::Result<(), String> {
        for (id, node) in self.nodes.iter().enumerate() {
            let mut actions: Vec<M::Action> = node
                .children
                .iter()
                .map(|(a, _)| *a)
                .chain(node.untried.iter().copied())
                .collect();
            actions.sort();
            let legal = if node.terminal { Vec::new() } else { self.mdp.actions(&node.state) };
            if actions != legal {
                return Err(format!("node {id}: children and untried do not partition the legal actions"));
            }
            if node.children.is_empty() {
                continue;
            }
            let below: u64 = node.children.iter().map(|&(_, c)| self.nodes[c].visits).sum();
            let own = if id == Self::ROOT { self.root_own_visits } else { 1 };
            if node.visits != own + below {
                return Err(format!("node {id}: N={} but own {own} + children {below}", node.visits));
            }
        }
        Ok(())
    }
}
