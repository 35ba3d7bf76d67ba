//! Exhaustive search over every legal move, used to check the planner.

use std::collections::{HashMap, VecDeque};

use serde::Serialize;

use crate::analysis::{
    classify_trivial, is_semi_disentangled, select_endpoints, NodeDeletionTarget,
};
use crate::diagram::{serialize, Diagram, Endpoint};
use crate::moves::{apply, Action};

pub const DEFAULT_MAX_DEPTH: u32 = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Reachability {
    Reachable,
    Unreachable,
    /// The depth limit cut the search short.
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleResult {
    pub reachability: Reachability,
    /// Fewest Node Deletions plus Cable Extractions.
    pub min_moves: Option<u32>,
    pub witness: Option<Vec<Action>>,
    pub states_explored: usize,
}

impl OracleResult {
    pub fn reachable(&self) -> bool {
        self.reachability == Reachability::Reachable
    }
}

/// Dedup key: everything except the endpoint order.
fn state_key(d: &Diagram) -> String {
    serialize(d)
        .lines()
        .filter(|l| !l.starts_with("order:"))
        .collect::<Vec<_>>()
        .join("\n")
}

fn legal_actions(d: &Diagram) -> Vec<Action> {
    let mut out = Vec::new();
    if let Ok(sel) = select_endpoints(d) {
        out.push(Action::Reidemeister(sel));
    }
    let trivial = classify_trivial(d).trivial;
    for (id, c) in d.crossings() {
        if trivial.contains(&id) {
            continue;
        }
        let Some(hold) = c.top() else { continue };
        for (&seg, depth) in c.segments.iter().zip(&c.depths) {
            if depth.is_under() {
                out.push(Action::NodeDeletion(NodeDeletionTarget {
                    crossing: id,
                    hold,
                    pull: seg,
                }));
            }
        }
    }
    let live: Vec<_> = d.live_cables().collect();
    for &cable in &live {
        if !is_semi_disentangled(d, cable).unwrap_or(false) {
            continue;
        }
        let pin = live
            .iter()
            .find(|&&o| o != cable)
            .map(|&o| Endpoint::left(o))
            .unwrap_or_else(|| Endpoint::right(cable));
        out.push(Action::CableExtraction { cable, pin });
    }
    out
}

/// 0-1 breadth-first search: Reidemeister moves are free, disentangling
/// actions cost one. States whose cost would exceed `max_depth` are not
/// expanded.
pub fn bfs_solve(diagram: &Diagram, max_depth: u32) -> OracleResult {
    struct Node {
        diagram: Diagram,
        cost: u32,
        parent: Option<(usize, Action)>,
    }
    let mut nodes = vec![Node {
        diagram: diagram.clone(),
        cost: 0,
        parent: None,
    }];
    let mut best: HashMap<String, u32> = HashMap::from([(state_key(diagram), 0)]);
    let mut queue = VecDeque::from([0usize]);
    let mut truncated = false;

    while let Some(i) = queue.pop_front() {
        let (cost, key) = (nodes[i].cost, state_key(&nodes[i].diagram));
        if best.get(&key).is_some_and(|&b| b < cost) {
            continue;
        }
        if nodes[i].diagram.workspace_empty() {
            let mut witness = Vec::new();
            let mut cur = i;
            while let Some((p, a)) = nodes[cur].parent {
                witness.push(a);
                cur = p;
            }
            witness.reverse();
            return OracleResult {
                reachability: Reachability::Reachable,
                min_moves: Some(cost),
                witness: Some(witness),
                states_explored: nodes.len(),
            };
        }
        for action in legal_actions(&nodes[i].diagram) {
            let step = u32::from(action.is_disentangling());
            if cost + step > max_depth {
                truncated = true;
                continue;
            }
            let Ok(next) = apply(&nodes[i].diagram, &action) else {
                continue;
            };
            let k = state_key(&next);
            if best.get(&k).is_some_and(|&b| b <= cost + step) {
                continue;
            }
            best.insert(k, cost + step);
            nodes.push(Node {
                diagram: next,
                cost: cost + step,
                parent: Some((i, action)),
            });
            let j = nodes.len() - 1;
            if step == 0 {
                queue.push_front(j);
            } else {
                queue.push_back(j);
            }
        }
    }
    OracleResult {
        reachability: if truncated {
            Reachability::Unknown
        } else {
            Reachability::Unreachable
        },
        min_moves: None,
        witness: None,
        states_explored: nodes.len(),
    }
}

/// Replay a witness and report whether it empties the workspace.
pub fn replay(diagram: &Diagram, witness: &[Action]) -> bool {
    let mut d = diagram.clone();
    for a in witness {
        match apply(&d, a) {
            Ok(n) => d = n,
            Err(_) => return false,
        }
    }
    d.workspace_empty()
}
