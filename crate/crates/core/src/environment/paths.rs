//! Intruder route generation.
//!
//! Routes come from two sources: the k shortest simple paths (Yen's
//! algorithm over unit-weight edges), followed by loop-erased random walks
//! drawn from a seeded generator until the requested number of distinct
//! routes is reached.

use std::collections::{BTreeSet, HashSet, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::environment::grid::GridEnvironment;
use crate::error::{Error, Result};

/// A simple source-to-terminal route, as a sequence of node indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Path {
    pub id: usize,
    pub nodes: Vec<usize>,
    pub cost: f64,
}

impl Path {
    /// Number of edges traversed.
    pub fn length(&self) -> usize {
        self.nodes.len().saturating_sub(1)
    }

    /// Checks the route is simple, starts at the source, ends at the
    /// terminal and only moves between adjacent cells.
    pub fn is_valid(&self, env: &GridEnvironment) -> bool {
        let src = env.index(env.source());
        let dst = env.index(env.terminal());
        if self.nodes.first() != Some(&src) || self.nodes.last() != Some(&dst) {
            return false;
        }
        let mut seen = HashSet::new();
        self.nodes.iter().all(|n| seen.insert(*n)) && self.nodes.windows(2).all(|w| env.are_adjacent(w[0], w[1]))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathOptions {
    /// How many routes are taken from the k-shortest enumeration before
    /// switching to random sampling. `None` means `ceil(count / 5)`.
    pub num_shortest: Option<usize>,
    /// Path cost per traversed edge (r_j = scale * length).
    pub cost_scale: f64,
    /// Random walk attempts per requested path before falling back to
    /// depth-first enumeration.
    pub attempts_per_path: usize,
}

impl Default for PathOptions {
    fn default() -> Self {
        PathOptions { num_shortest: None, cost_scale: 0.0, attempts_per_path: 200 }
    }
}

struct Blocked<'a> {
    nodes: &'a [bool],
    edges: &'a HashSet<(usize, usize)>,
}

/// Unit-weight shortest path avoiding blocked nodes and directed edges.
fn bfs(env: &GridEnvironment, from: usize, to: usize, blocked: &Blocked<'_>) -> Option<Vec<usize>> {
    let n = env.width() * env.height();
    let mut prev = vec![usize::MAX; n];
    let mut queue = VecDeque::new();
    prev[from] = from;
    queue.push_back(from);
    while let Some(u) = queue.pop_front() {
        if u == to {
            let mut path = vec![to];
            let mut cur = to;
            while cur != from {
                cur = prev[cur];
                path.push(cur);
            }
            path.reverse();
            return Some(path);
        }
        for v in env.neighbors(u) {
            if prev[v] != usize::MAX || blocked.nodes[v] || blocked.edges.contains(&(u, v)) {
                continue;
            }
            prev[v] = u;
            queue.push_back(v);
        }
    }
    None
}

/// Yen's k shortest simple paths. Equal-length candidates are ordered
/// lexicographically by node sequence.
pub fn k_shortest_paths(env: &GridEnvironment, k: usize) -> Vec<Vec<usize>> {
    let src = env.index(env.source());
    let dst = env.index(env.terminal());
    let n = env.width() * env.height();
    let no_nodes = vec![false; n];
    let no_edges = HashSet::new();
    let Some(first) = bfs(env, src, dst, &Blocked { nodes: &no_nodes, edges: &no_edges }) else {
        return Vec::new();
    };
    let mut accepted: Vec<Vec<usize>> = vec![first];
    let mut candidates: BTreeSet<(usize, Vec<usize>)> = BTreeSet::new();
    while accepted.len() < k {
        let last = accepted.last().unwrap().clone();
        for i in 0..last.len() - 1 {
            let spur = last[i];
            let root = &last[..=i];
            let mut edges = HashSet::new();
            for p in &accepted {
                if p.len() > i + 1 && &p[..=i] == root {
                    edges.insert((p[i], p[i + 1]));
                }
            }
            let mut nodes = vec![false; n];
            for &r in &root[..i] {
                nodes[r] = true;
            }
            if let Some(spur_path) = bfs(env, spur, dst, &Blocked { nodes: &nodes, edges: &edges }) {
                let mut total = root[..i].to_vec();
                total.extend(spur_path);
                if !accepted.contains(&total) {
                    candidates.insert((total.len(), total));
                }
            }
        }
        match candidates.pop_first() {
            Some((_, p)) => accepted.push(p),
            None => break,
        }
    }
    accepted
}

/// Loop-erased random walk from source to terminal.
fn loop_erased_walk(env: &GridEnvironment, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let src = env.index(env.source());
    let dst = env.index(env.terminal());
    let mut position = vec![usize::MAX; env.width() * env.height()];
    let mut path = vec![src];
    position[src] = 0;
    let mut nbrs = Vec::with_capacity(4);
    let mut cur = src;
    while cur != dst {
        nbrs.clear();
        nbrs.extend(env.neighbors(cur));
        let next = nbrs[rng.random_range(0..nbrs.len())];
        if position[next] != usize::MAX {
            for &erased in &path[position[next] + 1..] {
                position[erased] = usize::MAX;
            }
            path.truncate(position[next] + 1);
        } else {
            position[next] = path.len();
            path.push(next);
        }
        cur = next;
    }
    path
}

/// Depth-first enumeration of up to `limit` simple paths, pruning any
/// branch from which the terminal is no longer reachable.
pub fn enumerate_simple_paths(env: &GridEnvironment, limit: usize) -> Vec<Vec<usize>> {
    let src = env.index(env.source());
    let dst = env.index(env.terminal());
    let n = env.width() * env.height();
    let mut out = Vec::new();
    let mut visited = vec![false; n];
    let mut path = vec![src];
    visited[src] = true;
    let no_edges = HashSet::new();

    fn recurse(
        env: &GridEnvironment,
        dst: usize,
        limit: usize,
        visited: &mut Vec<bool>,
        path: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
        no_edges: &HashSet<(usize, usize)>,
    ) {
        if out.len() >= limit {
            return;
        }
        let cur = *path.last().unwrap();
        if cur == dst {
            out.push(path.clone());
            return;
        }
        // prune: terminal must stay reachable through unvisited nodes
        if bfs(env, cur, dst, &Blocked { nodes: visited, edges: no_edges }).is_none() {
            return;
        }
        let nbrs: Vec<usize> = env.neighbors(cur).collect();
        for v in nbrs {
            if visited[v] {
                continue;
            }
            visited[v] = true;
            path.push(v);
            recurse(env, dst, limit, visited, path, out, no_edges);
            path.pop();
            visited[v] = false;
            if out.len() >= limit {
                return;
            }
        }
    }

    recurse(env, dst, limit, &mut visited, &mut path, &mut out, &no_edges);
    out
}

/// Returns exactly `count` distinct simple source-to-terminal routes,
/// deterministically for a given seed.
pub fn enumerate_paths(env: &GridEnvironment, count: usize, seed: u64, opts: &PathOptions) -> Result<Vec<Path>> {
    if count == 0 {
        return Err(Error::param("count", "must be at least 1"));
    }
    let src = env.index(env.source());
    let dst = env.index(env.terminal());
    let no_nodes = vec![false; env.width() * env.height()];
    let no_edges = HashSet::new();
    if bfs(env, src, dst, &Blocked { nodes: &no_nodes, edges: &no_edges }).is_none() {
        return Err(Error::Unreachable);
    }
    let exhaustive = enumerate_simple_paths(env, count);
    if exhaustive.len() < count {
        return Err(Error::NotEnoughPaths { requested: count, available: exhaustive.len() });
    }

    let num_shortest = opts.num_shortest.unwrap_or(count.div_ceil(5)).min(count);
    let mut routes: Vec<Vec<usize>> = Vec::with_capacity(count);
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    for p in k_shortest_paths(env, num_shortest) {
        if seen.insert(p.clone()) {
            routes.push(p);
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut attempts = opts.attempts_per_path.saturating_mul(count);
    while routes.len() < count && attempts > 0 {
        attempts -= 1;
        let p = loop_erased_walk(env, &mut rng);
        if seen.insert(p.clone()) {
            routes.push(p);
        }
    }
    for p in exhaustive {
        if routes.len() >= count {
            break;
        }
        if seen.insert(p.clone()) {
            routes.push(p);
        }
    }
    debug_assert_eq!(routes.len(), count);

    Ok(routes
        .into_iter()
        .enumerate()
        .map(|(id, nodes)| {
            let cost = opts.cost_scale * nodes.len().saturating_sub(1) as f64;
            Path { id, nodes, cost }
        })
        .collect())
}
