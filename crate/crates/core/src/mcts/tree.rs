use rand_chacha::ChaCha8Rng;

use super::rollout::best_rollout;
use super::{MctsParams, Objective};
use crate::state::{RoutingContext, RoutingState, Step};

pub type NodeId = usize;

#[derive(Clone, Debug)]
pub struct Node {
    state: RoutingState,
    step: Step,
    parent: Option<NodeId>,
    children: Vec<NodeId>,
    pub val: f64,
    pub visit: u32,
}

impl Node {
    pub fn state(&self) -> &RoutingState {
        &self.state
    }

    /// The incoming transition; `action` is `None` at the root.
    pub fn step(&self) -> &Step {
        &self.step
    }

    pub fn rew(&self) -> f64 {
        self.step.reward() as f64
    }

    pub fn parent(&self) -> Option<NodeId> {
        self.parent
    }

    pub fn children(&self) -> &[NodeId] {
        &self.children
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }
}

/// Search tree stored as an arena. The root is always node 0.
pub struct SearchTree<'c> {
    ctx: &'c RoutingContext,
    params: MctsParams,
    nodes: Vec<Node>,
}

impl<'c> SearchTree<'c> {
    pub fn new(ctx: &'c RoutingContext, state: RoutingState, params: MctsParams) -> Self {
        SearchTree {
            ctx,
            params,
            nodes: vec![Node {
                state,
                step: Step::default(),
                parent: None,
                children: Vec::new(),
                val: 0.0,
                visit: 0,
            }],
        }
    }

    pub const ROOT: NodeId = 0;

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id]
    }

    pub fn node_mut(&mut self, id: NodeId) -> &mut Node {
        &mut self.nodes[id]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn params(&self) -> &MctsParams {
        &self.params
    }

    /// Selection score of `child` seen from its parent.
    pub fn score(&self, child: NodeId) -> f64 {
        let n = &self.nodes[child];
        if n.visit == 0 {
            return f64::INFINITY;
        }
        let parent = &self.nodes[n.parent.expect("root has no score")];
        let explore = ((parent.visit as f64).ln() / n.visit as f64).sqrt();
        n.rew() + n.val + self.params.c * explore
    }

    /// Walks from the root to a leaf by best score, counting a visit on every
    /// node passed. Returns the leaf and its depth.
    pub fn select(&mut self) -> (NodeId, usize) {
        let mut id = Self::ROOT;
        let mut depth = 0;
        loop {
            self.nodes[id].visit += 1;
            if self.nodes[id].is_leaf() {
                return (id, depth);
            }
            let mut best = self.nodes[id].children[0];
            let mut best_score = self.score(best);
            for &c in &self.nodes[id].children[1..] {
                let s = self.score(c);
                if s > best_score {
                    best = c;
                    best_score = s;
                }
            }
            id = best;
            depth += 1;
        }
    }

    /// Adds one child per pertinent SWAP, then one per bridge if enabled.
    pub fn expand(&mut self, id: NodeId) {
        assert!(self.nodes[id].is_leaf(), "node {id} is already expanded");
        let state = self.nodes[id].state.clone();
        if state.is_goal() {
            return;
        }
        let mut children = Vec::new();
        for edge in self.ctx.pertinent_swaps(&state) {
            children.push(
                self.ctx
                    .apply_swap(&state, edge)
                    .expect("pertinent swaps are edges"),
            );
        }
        for action in self.ctx.bridge_candidates(&state, self.params.d_remote) {
            children.push(
                self.ctx
                    .apply(&state, action)
                    .expect("bridge candidates are valid"),
            );
        }
        assert!(
            !children.is_empty(),
            "unfinished state without pertinent swaps"
        );
        for (child, step) in children {
            let cid = self.nodes.len();
            self.nodes.push(Node {
                state: child,
                step,
                parent: Some(id),
                children: Vec::new(),
                val: 0.0,
                visit: 0,
            });
            self.nodes[id].children.push(cid);
        }
    }

    /// Estimates the node's value from rollouts and raises VAL to it.
    pub fn simulate(&mut self, id: NodeId, rng: &mut ChaCha8Rng) {
        let p = &self.params;
        let depth_cost = p.objective == Objective::Depth;
        let value = match best_rollout(
            self.ctx,
            &self.nodes[id].state,
            p.g_sim,
            p.n_sim,
            depth_cost,
            rng,
        ) {
            Some(cost) => p.gamma.powf(cost as f64 / 2.0) * p.g_sim as f64,
            None => 0.0,
        };
        let node = &mut self.nodes[id];
        node.val = node.val.max(value);
    }

    /// Discount exponent applied across the edge into `id`.
    pub fn discount(&self, id: NodeId) -> f64 {
        match self.params.objective {
            Objective::Size => 1.0,
            Objective::Depth => self.nodes[id].step.depth_overhead as f64,
        }
    }

    /// Propagates the node's value to all its ancestors by max-update.
    pub fn backpropagate(&mut self, id: NodeId) {
        let mut child = id;
        while let Some(parent) = self.nodes[child].parent {
            let c = &self.nodes[child];
            let candidate = self.params.gamma.powf(self.discount(child)) * (c.rew() + c.val);
            let p = &mut self.nodes[parent];
            p.val = p.val.max(candidate);
            child = parent;
        }
    }

    /// One select, expand, simulate, backpropagate cycle. Returns the depth
    /// of the selected leaf.
    pub fn playout(&mut self, rng: &mut ChaCha8Rng) -> usize {
        let (leaf, depth) = self.select();
        if self.nodes[leaf].state.is_goal() {
            let node = &mut self.nodes[leaf];
            node.val = node.val.max(self.params.g_sim as f64);
        } else {
            self.expand(leaf);
            self.simulate(leaf, rng);
        }
        self.backpropagate(leaf);
        depth
    }

    /// Root child with the best [`decision_score`](Self::decision_score);
    /// ties go to more visits, then to the earlier action.
    pub fn best_child(&self) -> Option<NodeId> {
        let mut best: Option<NodeId> = None;
        for &c in &self.nodes[Self::ROOT].children {
            let better = match best {
                None => true,
                Some(b) => {
                    let (nc, nb) = (&self.nodes[c], &self.nodes[b]);
                    let (sc, sb) = (self.decision_score(c), self.decision_score(b));
                    sc > sb || (sc == sb && nc.visit > nb.visit)
                }
            };
            if better {
                best = Some(c);
            }
        }
        best
    }

    /// REW + VAL of a root child, discounted across its edge. The discount
    /// is uniform in size mode and only matters for the depth objective.
    pub fn decision_score(&self, c: NodeId) -> f64 {
        let n = &self.nodes[c];
        self.params.gamma.powf(self.discount(c)) * (n.rew() + n.val)
    }

    /// Commits to the best root child and keeps only its subtree. Returns the
    /// committed state and step.
    pub fn decide(&mut self) -> Option<(RoutingState, Step)> {
        let chosen = self.best_child()?;
        self.reroot(chosen);
        let root = &self.nodes[Self::ROOT];
        Some((root.state.clone(), root.step.clone()))
    }

    fn reroot(&mut self, new_root: NodeId) {
        let old = std::mem::take(&mut self.nodes);
        let mut map = vec![usize::MAX; old.len()];
        let mut order = vec![new_root];
        let mut i = 0;
        while i < order.len() {
            let id = order[i];
            map[id] = i;
            order.extend_from_slice(&old[id].children);
            i += 1;
        }
        let mut slots: Vec<Option<Node>> = old.into_iter().map(Some).collect();
        self.nodes = order
            .iter()
            .map(|&id| {
                let mut n = slots[id].take().expect("tree nodes have one parent");
                n.parent = if id == new_root {
                    None
                } else {
                    n.parent.map(|p| map[p])
                };
                for c in n.children.iter_mut() {
                    *c = map[*c];
                }
                n
            })
            .collect();
    }
}
