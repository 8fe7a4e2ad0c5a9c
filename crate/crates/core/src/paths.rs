//! Minimum-cost pairs of arc-disjoint paths (successive shortest paths with
//! potentials, i.e. Suurballe's construction on a super-source network).

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::dag::{ArcId, CostFunction, Dag, NodeId, NodeSet};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Path {
    pub start: NodeId,
    pub arcs: Vec<ArcId>,
}

impl Path {
    pub fn cost(&self, cost: &CostFunction) -> u64 {
        self.arcs.iter().map(|&a| cost.cost[a]).sum()
    }
}

struct Residual {
    to: Vec<usize>,
    cap: Vec<i32>,
    cost: Vec<i64>,
    // dag arc carried by a forward edge
    label: Vec<Option<ArcId>>,
    adj: Vec<Vec<usize>>,
}

impl Residual {
    fn new(n: usize) -> Self {
        Self { to: vec![], cap: vec![], cost: vec![], label: vec![], adj: vec![Vec::new(); n] }
    }

    fn add(&mut self, from: usize, to: usize, cap: i32, cost: i64, label: Option<ArcId>) {
        let e = self.to.len();
        self.to.extend([to, from]);
        self.cap.extend([cap, 0]);
        self.cost.extend([cost, -cost]);
        self.label.extend([label, None]);
        self.adj[from].push(e);
        self.adj[to].push(e + 1);
    }

    fn shortest_path(&self, s: usize, t: usize, pot: &[i64]) -> Option<(Vec<i64>, Vec<usize>)> {
        let n = self.adj.len();
        let mut dist = vec![i64::MAX; n];
        let mut via = vec![usize::MAX; n];
        dist[s] = 0;
        let mut heap = BinaryHeap::from([Reverse((0i64, s))]);
        while let Some(Reverse((d, u))) = heap.pop() {
            if d > dist[u] {
                continue;
            }
            for &e in &self.adj[u] {
                if self.cap[e] <= 0 {
                    continue;
                }
                let v = self.to[e];
                let nd = d + self.cost[e] + pot[u] - pot[v];
                if nd < dist[v] {
                    dist[v] = nd;
                    via[v] = e;
                    heap.push(Reverse((nd, v)));
                }
            }
        }
        (dist[t] != i64::MAX).then_some((dist, via))
    }
}

/// Two arc-disjoint paths into `target` of minimum total cost.
///
/// Paths start at nodes of `sources`; the second path never starts in
/// `forbidden_starts`, and neither path passes through a node of
/// `forbidden_interior` other than at its start. Returns `None` when no such
/// pair exists.
pub fn min_cost_disjoint_pair(
    dag: &Dag,
    cost: &CostFunction,
    sources: &NodeSet,
    target: NodeId,
    forbidden_starts: &NodeSet,
    forbidden_interior: &NodeSet,
) -> Option<(Path, Path)> {
    if sources.contains(&target) {
        return None;
    }
    let n = dag.node_count();
    let (sigma, hub) = (n, n + 1);
    let mut net = Residual::new(n + 2);
    for &u in sources {
        if forbidden_starts.contains(&u) {
            net.add(hub, u, 1, 0, None);
        } else {
            net.add(sigma, u, 2, 0, None);
        }
    }
    net.add(sigma, hub, 1, 0, None);
    for a in dag.arcs() {
        if a.head != target && forbidden_interior.contains(&a.head) {
            continue;
        }
        net.add(a.tail, a.head, 1, cost.cost[a.id] as i64, Some(a.id));
    }

    let mut pot = vec![0i64; n + 2];
    for _ in 0..2 {
        let (dist, via) = net.shortest_path(sigma, target, &pot)?;
        for v in 0..n + 2 {
            if dist[v] != i64::MAX {
                pot[v] += dist[v];
            }
        }
        let mut v = target;
        while v != sigma {
            let e = via[v];
            net.cap[e] -= 1;
            net.cap[e ^ 1] += 1;
            v = net.to[e ^ 1];
        }
    }

    // forward edges with spare reverse capacity carry flow
    let mut used = vec![0i32; net.to.len()];
    let mut walk = |start_edge_filter: &dyn Fn(usize) -> bool| -> Option<Path> {
        let mut u = sigma;
        let mut arcs = Vec::new();
        let mut start = None;
        while u != target {
            let e = net.adj[u].iter().copied().find(|&e| {
                e % 2 == 0 && net.cap[e ^ 1] - used[e] > 0 && (u != sigma || start_edge_filter(e))
            })?;
            used[e] += 1;
            let v = net.to[e];
            if let Some(a) = net.label[e] {
                start.get_or_insert(u);
                arcs.push(a);
            }
            u = v;
        }
        Some(Path { start: start?, arcs })
    };
    let hub_edge = |e: usize| net.to[e] == hub;
    let first = walk(&|e| hub_edge(e)).or_else(|| walk(&|_| true))?;
    let second = walk(&|e| !hub_edge(e))?;
    Some((first, second))
}
