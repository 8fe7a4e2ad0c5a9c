//! Network codes, height and performance functions, and layered demands.

use std::collections::BTreeMap;

use crate::dag::{ArcId, Dag, NodeId, NodeSet};
use crate::error::{Error, Result};
use crate::gf::{CoeffVector, Field, Subspace};

/// Per-arc upper layer, indexed by arc id.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HeightFunction(pub Vec<usize>);

impl HeightFunction {
    pub fn constant(arc_count: usize, value: usize) -> Self {
        Self(vec![value; arc_count])
    }

    pub fn get(&self, a: ArcId) -> usize {
        self.0[a]
    }

    pub fn max_value(&self) -> usize {
        self.0.iter().copied().max().unwrap_or(0)
    }
}

/// Receivers and the number of layers each one requests.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Demand {
    k: usize,
    levels: BTreeMap<NodeId, usize>,
}

impl Demand {
    pub fn new(k: usize) -> Self {
        Self { k, levels: BTreeMap::new() }
    }

    /// Builds a demand from tiers `T_1..T_k`, given in order.
    pub fn from_tiers(tiers: &[NodeSet]) -> Result<Self> {
        let mut d = Self::new(tiers.len());
        for (i, tier) in tiers.iter().enumerate() {
            for &v in tier {
                if d.levels.insert(v, i + 1).is_some() {
                    return Err(Error::InvalidDemand(format!("node {v} is in more than one tier")));
                }
            }
        }
        Ok(d)
    }

    pub fn layers(&self) -> usize {
        self.k
    }

    /// Puts `v` into tier `level`, replacing any earlier tier; level 0 removes it.
    pub fn set(&mut self, v: NodeId, level: usize) -> Result<()> {
        if level > self.k {
            return Err(Error::InvalidDemand(format!("level {level} exceeds {} layers", self.k)));
        }
        if level == 0 {
            self.levels.remove(&v);
        } else {
            self.levels.insert(v, level);
        }
        Ok(())
    }

    pub fn demand_of(&self, v: NodeId) -> usize {
        self.levels.get(&v).copied().unwrap_or(0)
    }

    pub fn tier(&self, i: usize) -> NodeSet {
        self.levels.iter().filter(|&(_, &l)| l == i).map(|(&v, _)| v).collect()
    }

    pub fn receivers(&self) -> NodeSet {
        self.levels.keys().copied().collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (NodeId, usize)> + '_ {
        self.levels.iter().map(|(&v, &l)| (v, l))
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    /// Checks that the demand fits the graph: known nodes, no source.
    pub fn validate(&self, dag: &Dag) -> Result<()> {
        for &v in self.levels.keys() {
            if v >= dag.node_count() {
                return Err(Error::UnknownNode(v));
            }
            if v == dag.source() {
                return Err(Error::NodeIsSource(v));
            }
        }
        Ok(())
    }
}

/// Every receiver in tier `i` has at least `i` arc-disjoint paths from the source.
pub fn is_proper(dag: &Dag, demand: &Demand) -> bool {
    demand
        .iter()
        .all(|(v, l)| v < dag.node_count() && v != dag.source() && dag.lambda(v, l).is_ok_and(|x| x == l))
}

/// Per-node number of decodable layers, indexed by node id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PerformanceFunction(pub Vec<usize>);

impl PerformanceFunction {
    pub fn get(&self, v: NodeId) -> usize {
        self.0[v]
    }

    pub fn satisfies(&self, demand: &Demand) -> bool {
        demand.iter().all(|(v, l)| self.0.get(v).is_some_and(|&p| p >= l))
    }
}

/// A coefficient vector on every arc.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkCode {
    field: Field,
    k: usize,
    assignment: Vec<CoeffVector>,
}

impl NetworkCode {
    /// Builds a code and audits it against `dag`.
    pub fn new(dag: &Dag, field: Field, k: usize, assignment: Vec<CoeffVector>) -> Result<Self> {
        let code = Self::unchecked(field, k, assignment);
        code.audit(dag)?;
        Ok(code)
    }

    /// Builds a code without checking the linear combination property.
    pub fn unchecked(field: Field, k: usize, assignment: Vec<CoeffVector>) -> Self {
        Self { field, k, assignment }
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn layers(&self) -> usize {
        self.k
    }

    pub fn get(&self, a: ArcId) -> &CoeffVector {
        &self.assignment[a]
    }

    pub fn assignment(&self) -> &[CoeffVector] {
        &self.assignment
    }

    /// Every arc has a vector of length `k` and every arc leaving a node
    /// other than the source carries a combination of the entering vectors.
    pub fn audit(&self, dag: &Dag) -> Result<()> {
        if self.assignment.len() != dag.arc_count() {
            return Err(Error::InvalidGraph(format!(
                "code covers {} arcs, graph has {}",
                self.assignment.len(),
                dag.arc_count()
            )));
        }
        for (a, c) in self.assignment.iter().enumerate() {
            if c.len() != self.k {
                return Err(Error::WrongLayerCount { expected: self.k, got: c.len() });
            }
            if c.0.iter().any(|&x| x >= self.field.size()) {
                return Err(Error::Infeasible(format!("arc {a} has an unreduced coefficient")));
            }
        }
        for v in dag.nodes().filter(|&v| v != dag.source()) {
            let span = self.incoming_span(dag, v);
            if let Some(&a) = dag.out_arcs(v).iter().find(|&&a| !span.contains(&self.assignment[a])) {
                return Err(Error::LinearCombinationViolated(a));
            }
        }
        Ok(())
    }

    pub fn incoming_span(&self, dag: &Dag, v: NodeId) -> Subspace {
        Subspace::span(self.field, self.k, dag.in_arcs(v).iter().map(|&a| &self.assignment[a]))
    }

    /// Number of leading layers `v` can decode; the source decodes all `k`.
    pub fn performance(&self, dag: &Dag, v: NodeId) -> usize {
        if v == dag.source() {
            return self.k;
        }
        self.incoming_span(dag, v).decodable_prefix()
    }

    pub fn performances(&self, dag: &Dag) -> PerformanceFunction {
        PerformanceFunction(dag.nodes().map(|v| self.performance(dag, v)).collect())
    }

    pub fn height_function(&self) -> HeightFunction {
        HeightFunction(self.assignment.iter().map(CoeffVector::height).collect())
    }

    pub fn is_feasible(&self, dag: &Dag, demand: &Demand) -> bool {
        demand.iter().all(|(v, l)| self.performance(dag, v) >= l)
    }
}
