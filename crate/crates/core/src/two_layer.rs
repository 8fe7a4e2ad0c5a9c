//! Optimal planning for two layers.

use std::collections::BTreeSet;
use std::fmt;

use crate::builder::build_two_layer_code;
use crate::code::{is_proper, Demand, HeightFunction, NetworkCode};
use crate::dag::{ArcId, Dag, NodeId, NodeSet};
use crate::error::{Error, Result};
use crate::gf::Field;

/// First failing condition of the two-layer characterization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConditionViolation {
    /// A 2-valued arc leaves a non-source node with no 2-valued entering arc.
    UnsupportedTwo(ArcId),
    /// A 1-valued arc leaves a node with no 1-valued entering arc and connectivity 1.
    UnsupportedOne(ArcId),
    /// A base-layer receiver with connectivity 1 has no 1-valued entering arc.
    BaseReceiverUnserved(NodeId),
    /// A two-layer receiver has no 2-valued entering arc.
    TopReceiverUnserved(NodeId),
}

impl fmt::Display for ConditionViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::UnsupportedTwo(a) => write!(f, "clause 1 fails at arc {a}"),
            Self::UnsupportedOne(a) => write!(f, "clause 2 fails at arc {a}"),
            Self::BaseReceiverUnserved(v) => write!(f, "clause 3 fails at receiver {v}"),
            Self::TopReceiverUnserved(v) => write!(f, "clause 4 fails at receiver {v}"),
        }
    }
}

/// Checks whether `f` is a feasible height function for a proper two-layer demand.
///
/// Returns the first violated condition, or `None` when all of them hold.
pub fn check_theorem7(dag: &Dag, f: &HeightFunction, demand: &Demand) -> Result<Option<ConditionViolation>> {
    if demand.layers() != 2 {
        return Err(Error::WrongLayerCount { expected: 2, got: demand.layers() });
    }
    if f.0.len() != dag.arc_count() {
        return Err(Error::PreconditionViolated("height function does not cover every arc".into()));
    }
    if let Some(a) = f.0.iter().position(|&x| x != 1 && x != 2) {
        return Err(Error::PreconditionViolated(format!("arc {a} has value {} outside 1..=2", f.0[a])));
    }
    let has_in = |u: NodeId, value: usize| dag.in_arcs(u).iter().any(|&a| f.get(a) == value);
    for a in dag.arcs().iter().filter(|a| a.tail != dag.source()) {
        if f.get(a.id) == 2 && !has_in(a.tail, 2) {
            return Ok(Some(ConditionViolation::UnsupportedTwo(a.id)));
        }
    }
    for a in dag.arcs().iter().filter(|a| a.tail != dag.source()) {
        if f.get(a.id) == 1 && !has_in(a.tail, 1) && dag.lambda(a.tail, 2)? < 2 {
            return Ok(Some(ConditionViolation::UnsupportedOne(a.id)));
        }
    }
    for t in demand.tier(1) {
        if dag.lambda(t, 2)? == 1 && !has_in(t, 1) {
            return Ok(Some(ConditionViolation::BaseReceiverUnserved(t)));
        }
    }
    for t in demand.tier(2) {
        if !has_in(t, 2) {
            return Ok(Some(ConditionViolation::TopReceiverUnserved(t)));
        }
    }
    Ok(None)
}

/// Output of [`solve_two_layer`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwoLayerPlan {
    /// Maximal 1-sets containing a receiver, one per entering arc.
    pub z_sets: Vec<NodeSet>,
    /// Nodes cut off from the source once the arcs touching the 1-sets are removed.
    pub z_closure: NodeSet,
    /// Two-layer receivers that keep their request.
    pub t2_kept: NodeSet,
    /// Two-layer receivers served with the base layer only.
    pub t2_demoted: NodeSet,
    pub f: HeightFunction,
    pub field: Field,
    pub code: NetworkCode,
}

impl TwoLayerPlan {
    /// The demand actually served: demoted receivers join the base tier.
    pub fn served_demand(&self, demand: &Demand) -> Demand {
        let mut served = demand.clone();
        for &t in &self.t2_demoted {
            served.set(t, 1).expect("level 1 fits two layers");
        }
        served
    }
}

/// Keeps the largest set of two-layer receivers that can be served while
/// every receiver still gets the base layer, and builds the code.
pub fn solve_two_layer(dag: &Dag, demand: &Demand) -> Result<TwoLayerPlan> {
    if demand.layers() != 2 {
        return Err(Error::WrongLayerCount { expected: 2, got: demand.layers() });
    }
    demand.validate(dag)?;
    if !is_proper(dag, demand) {
        let bad = demand.iter().find(|&(v, l)| dag.lambda(v, l).map_or(true, |x| x < l)).map(|(v, _)| v);
        return Err(Error::ImproperDemand(bad.unwrap_or(dag.source())));
    }
    let receivers = demand.receivers();
    let mut entries = BTreeSet::new();
    let mut z_sets = Vec::new();
    for &t in &receivers {
        if dag.lambda(t, 2)? == 1 {
            let z = dag.maximal_iset(t)?;
            let entry = dag.entering_arcs(&z)[0];
            if entries.insert(entry) {
                z_sets.push(z);
            }
        }
    }
    let touched: NodeSet = z_sets.iter().flatten().copied().collect();
    let touches = |a: ArcId| {
        let arc = dag.arc(a);
        touched.contains(&arc.tail) || touched.contains(&arc.head)
    };
    let reach = dag.reachable(&NodeSet::from([dag.source()]), |a| !touches(a));
    let z_closure: NodeSet = dag.nodes().filter(|v| !reach.contains(v)).collect();
    let t2 = demand.tier(2);
    let t2_kept: NodeSet = t2.difference(&z_closure).copied().collect();
    let t2_demoted: NodeSet = t2.intersection(&z_closure).copied().collect();
    let f = HeightFunction(
        dag.arcs()
            .iter()
            .map(|a| if z_closure.contains(&a.tail) || z_closure.contains(&a.head) { 1 } else { 2 })
            .collect(),
    );
    let field = Field::smallest_above(receivers.len());
    let t1all: NodeSet = demand.tier(1).union(&t2_demoted).copied().collect();
    let code = build_two_layer_code(dag, &f, &t2_kept, &t1all, field)?;
    Ok(TwoLayerPlan { z_sets, z_closure, t2_kept, t2_demoted, f, field, code })
}
