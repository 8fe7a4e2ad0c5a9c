//! Single-source acyclic multigraphs with unit-capacity arcs.
//!
//! A [`Dag`] is validated once on construction: it is acyclic, its source has
//! no entering arcs and every node is reachable from the source. Arc ids are
//! the positions of the arcs in the list they were built from, so parallel
//! arcs are told apart by id.

use std::collections::{BTreeSet, BinaryHeap};
use std::cmp::Reverse;

use crate::error::{Error, Result};
use crate::flow::UnitNetwork;

pub type NodeId = usize;
pub type ArcId = usize;
pub type NodeSet = BTreeSet<NodeId>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Arc {
    pub id: ArcId,
    pub tail: NodeId,
    pub head: NodeId,
}

/// Non-negative arc costs, indexed by arc id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CostFunction {
    pub cost: Vec<u64>,
}

impl CostFunction {
    pub fn zero(arc_count: usize) -> Self {
        Self { cost: vec![0; arc_count] }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dag {
    node_count: usize,
    source: NodeId,
    arcs: Vec<Arc>,
    out_arcs: Vec<Vec<ArcId>>,
    in_arcs: Vec<Vec<ArcId>>,
    order: Vec<NodeId>,
    position: Vec<usize>,
}

/// Kahn's algorithm, always emitting the smallest ready node id first.
pub fn topological_order(node_count: usize, arcs: &[(NodeId, NodeId)]) -> Result<Vec<NodeId>> {
    let mut indeg = vec![0usize; node_count];
    let mut out = vec![Vec::new(); node_count];
    for &(t, h) in arcs {
        if t >= node_count {
            return Err(Error::UnknownNode(t));
        }
        if h >= node_count {
            return Err(Error::UnknownNode(h));
        }
        indeg[h] += 1;
        out[t].push(h);
    }
    let mut ready: BinaryHeap<Reverse<NodeId>> =
        (0..node_count).filter(|&v| indeg[v] == 0).map(Reverse).collect();
    let mut order = Vec::with_capacity(node_count);
    while let Some(Reverse(v)) = ready.pop() {
        order.push(v);
        for &h in &out[v] {
            indeg[h] -= 1;
            if indeg[h] == 0 {
                ready.push(Reverse(h));
            }
        }
    }
    if order.len() != node_count {
        return Err(Error::CycleDetected);
    }
    Ok(order)
}

impl Dag {
    /// Builds a dag whose arc `i` is `arcs[i]`.
    pub fn new(node_count: usize, source: NodeId, arcs: &[(NodeId, NodeId)]) -> Result<Self> {
        if source >= node_count {
            return Err(Error::UnknownNode(source));
        }
        let order = topological_order(node_count, arcs)?;
        let mut out_arcs = vec![Vec::new(); node_count];
        let mut in_arcs = vec![Vec::new(); node_count];
        let arcs: Vec<Arc> = arcs
            .iter()
            .enumerate()
            .map(|(id, &(tail, head))| Arc { id, tail, head })
            .collect();
        for a in &arcs {
            if a.tail == a.head {
                return Err(Error::CycleDetected);
            }
            out_arcs[a.tail].push(a.id);
            in_arcs[a.head].push(a.id);
        }
        if !in_arcs[source].is_empty() {
            return Err(Error::InvalidGraph(format!("source {source} has entering arcs")));
        }
        let mut position = vec![0; node_count];
        for (i, &v) in order.iter().enumerate() {
            position[v] = i;
        }
        let dag = Self { node_count, source, arcs, out_arcs, in_arcs, order, position };
        let reach = dag.reachable(&NodeSet::from([source]), |_| true);
        if let Some(v) = (0..node_count).find(|v| !reach.contains(v)) {
            return Err(Error::InvalidGraph(format!("node {v} is not reachable from the source")));
        }
        Ok(dag)
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn arc_count(&self) -> usize {
        self.arcs.len()
    }

    pub fn source(&self) -> NodeId {
        self.source
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn arc(&self, id: ArcId) -> Arc {
        self.arcs[id]
    }

    pub fn nodes(&self) -> std::ops::Range<NodeId> {
        0..self.node_count
    }

    pub fn out_arcs(&self, v: NodeId) -> &[ArcId] {
        &self.out_arcs[v]
    }

    pub fn in_arcs(&self, v: NodeId) -> &[ArcId] {
        &self.in_arcs[v]
    }

    /// Deterministic topological order; the source comes first.
    pub fn topological_order(&self) -> &[NodeId] {
        &self.order
    }

    /// Index of `v` in [`Dag::topological_order`].
    pub fn position(&self, v: NodeId) -> usize {
        self.position[v]
    }

    pub fn arc_pairs(&self) -> Vec<(NodeId, NodeId)> {
        self.arcs.iter().map(|a| (a.tail, a.head)).collect()
    }

    /// Number of arcs entering `x`.
    pub fn rho(&self, x: &NodeSet) -> usize {
        self.entering_arcs(x).len()
    }

    pub fn entering_arcs(&self, x: &NodeSet) -> Vec<ArcId> {
        self.arcs
            .iter()
            .filter(|a| !x.contains(&a.tail) && x.contains(&a.head))
            .map(|a| a.id)
            .collect()
    }

    fn check_target(&self, v: NodeId) -> Result<()> {
        if v >= self.node_count {
            Err(Error::UnknownNode(v))
        } else if v == self.source {
            Err(Error::NodeIsSource(v))
        } else {
            Ok(())
        }
    }

    fn unit_network(&self) -> UnitNetwork {
        UnitNetwork::with_arcs(self.node_count, self.arcs.iter().map(|a| (a.tail, a.head)))
    }

    /// `min(cap, λ(s, v))`, stopping after `cap` augmentations.
    pub fn lambda(&self, v: NodeId, cap: usize) -> Result<usize> {
        self.check_target(v)?;
        Ok(self.unit_network().max_flow(self.source, v, cap))
    }

    /// The unique inclusion-maximal node set containing `v`, avoiding the
    /// source, with exactly `λ(s, v)` entering arcs.
    ///
    /// It is the complement of the residual reach of the source after a
    /// maximum s-v flow.
    pub fn maximal_iset(&self, v: NodeId) -> Result<NodeSet> {
        self.check_target(v)?;
        let mut net = self.unit_network();
        net.max_flow(self.source, v, usize::MAX);
        let reach = net.residual_reachable(self.source);
        Ok(self.nodes().filter(|&u| !reach[u]).collect())
    }

    /// Closure of `roots` over the arcs accepted by `allowed`.
    pub fn reachable(&self, roots: &NodeSet, allowed: impl Fn(ArcId) -> bool) -> NodeSet {
        let mut seen = vec![false; self.node_count];
        let mut stack: Vec<NodeId> = roots.iter().copied().filter(|&r| r < self.node_count).collect();
        for &r in &stack {
            seen[r] = true;
        }
        while let Some(x) = stack.pop() {
            for &a in &self.out_arcs[x] {
                let h = self.arcs[a].head;
                if !seen[h] && allowed(a) {
                    seen[h] = true;
                    stack.push(h);
                }
            }
        }
        self.nodes().filter(|&v| seen[v]).collect()
    }

    /// An s-arborescence over the allowed arcs spanning every node they reach.
    ///
    /// Each reached node takes its lowest-id allowed arc from an already
    /// reached tail, in topological order.
    pub fn arborescence(&self, allowed: impl Fn(ArcId) -> bool) -> BTreeSet<ArcId> {
        let mut reached = vec![false; self.node_count];
        reached[self.source] = true;
        let mut tree = BTreeSet::new();
        for &v in &self.order {
            if v == self.source {
                continue;
            }
            let entry = self.in_arcs[v]
                .iter()
                .copied()
                .filter(|&a| reached[self.arcs[a].tail] && allowed(a))
                .min();
            if let Some(a) = entry {
                reached[v] = true;
                tree.insert(a);
            }
        }
        tree
    }
}
