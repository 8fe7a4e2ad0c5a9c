//! Three-layer planning: every receiver gets the base layer, the largest
//! possible set gets two layers, and the rest of the capacity goes to a
//! third layer where it survives.

use crate::builder::realize_fan_extension;
use crate::code::{Demand, HeightFunction, NetworkCode, PerformanceFunction};
use crate::dag::{ArcId, CostFunction, Dag, NodeSet};
use crate::error::{Error, Result};
use crate::fan::{settle, FanExtension};
use crate::gf::Field;
use crate::paths::{min_cost_disjoint_pair, Path};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwoMaxPlan {
    /// Union of the maximal 1-sets around receivers.
    pub w1: NodeSet,
    /// Nodes cut off from the source by `w1`.
    pub w1_closure: NodeSet,
    /// Nodes outside `w1_closure` with an arc into it.
    pub pseudo: NodeSet,
    /// Union of the maximal 2-sets around receivers and pseudo receivers.
    pub w2: NodeSet,
    /// Nodes outside `w1_closure` cut off from the source by `w1_closure` and `w2`.
    pub w2_closure: NodeSet,
    /// Receivers limited to the base layer.
    pub t1: NodeSet,
    /// Receivers and pseudo receivers limited to two layers.
    pub t2: NodeSet,
    /// Nodes whose path pair had to start a path in `w1_closure`.
    pub second_case: NodeSet,
    /// Nodes for which no path pair was found.
    pub unpaired: NodeSet,
    pub f: HeightFunction,
    pub extension: FanExtension,
    pub field: Field,
    pub code: NetworkCode,
}

impl TwoMaxPlan {
    pub fn performances(&self, dag: &Dag) -> PerformanceFunction {
        self.code.performances(dag)
    }
}

/// Closure of a cut: nodes not reachable from the source without entering `blocked`.
fn cut_off(dag: &Dag, blocked: &NodeSet) -> NodeSet {
    let reach = dag.reachable(&NodeSet::from([dag.source()]), |a| !blocked.contains(&dag.arc(a).head));
    dag.nodes().filter(|v| !reach.contains(v)).collect()
}

fn touches(dag: &Dag, set: &NodeSet, a: ArcId) -> bool {
    let arc = dag.arc(a);
    set.contains(&arc.tail) || set.contains(&arc.head)
}

/// Runs the heuristic over the smallest prime field larger than the node count.
pub fn run_2max(dag: &Dag, demand: &Demand) -> Result<TwoMaxPlan> {
    run_2max_with_field(dag, demand, Field::smallest_above(dag.node_count()))
}

/// Same as [`run_2max`] over a given field, which must have more elements
/// than the graph has nodes.
pub fn run_2max_with_field(dag: &Dag, demand: &Demand, field: Field) -> Result<TwoMaxPlan> {
    if demand.layers() != 3 {
        return Err(Error::WrongLayerCount { expected: 3, got: demand.layers() });
    }
    demand.validate(dag)?;
    let s = dag.source();
    let receivers = demand.receivers();

    // Step 1
    let mut w1 = NodeSet::new();
    for &t in &receivers {
        if dag.lambda(t, 2)? == 1 {
            w1.extend(dag.maximal_iset(t)?);
        }
    }
    let w1_closure = cut_off(dag, &w1);
    let t1: NodeSet = receivers.intersection(&w1_closure).copied().collect();
    let pseudo: NodeSet = dag
        .arcs()
        .iter()
        .filter(|a| a.tail != s && !w1_closure.contains(&a.tail) && w1_closure.contains(&a.head))
        .map(|a| a.tail)
        .collect();
    let star: NodeSet = receivers.union(&pseudo).copied().collect();
    let active: NodeSet = star.difference(&t1).copied().collect();

    // Step 2
    let mut w2 = NodeSet::new();
    for &v in &active {
        if dag.lambda(v, 3)? == 2 {
            w2.extend(dag.maximal_iset(v)?);
        }
    }
    let blocked: NodeSet = w1_closure.union(&w2).copied().collect();
    let w2_closure: NodeSet = cut_off(dag, &blocked).difference(&w1_closure).copied().collect();
    let t2: NodeSet = star.intersection(&w2_closure).copied().collect();

    // Step 3
    let mut f = HeightFunction(
        (0..dag.arc_count())
            .map(|a| {
                if touches(dag, &w1_closure, a) {
                    1
                } else if touches(dag, &w2_closure, a) {
                    2
                } else {
                    3
                }
            })
            .collect(),
    );
    let big = dag.arc_count() as u64;
    let mut order: Vec<_> = active.iter().copied().collect();
    order.sort_by_key(|&v| dag.position(v));
    let mut second_case = NodeSet::new();
    let mut unpaired = NodeSet::new();
    let first_sources: NodeSet = active.iter().copied().chain([s]).collect();
    let second_sources: NodeSet = first_sources.union(&w1_closure).copied().collect();
    for v in order {
        let mut cost = CostFunction { cost: f.0.iter().map(|&x| u64::from(x == 3)).collect() };
        for a in protected_tree(dag, &f, &receivers) {
            cost.cost[a] = big;
        }
        let interior: NodeSet = star.union(&w1_closure).copied().filter(|&u| u != v).collect();
        let mut sources = first_sources.clone();
        sources.remove(&v);
        let pair = min_cost_disjoint_pair(dag, &cost, &sources, v, &NodeSet::new(), &interior).or_else(|| {
            let mut sources = second_sources.clone();
            sources.remove(&v);
            let pair = min_cost_disjoint_pair(dag, &cost, &sources, v, &w1_closure, &interior);
            if pair.is_some() {
                second_case.insert(v);
            }
            pair
        });
        match pair {
            Some((p1, p2)) => lower_paths(&mut f, [&p1, &p2]),
            None => {
                unpaired.insert(v);
            }
        }
    }

    // Step 4
    for &u in dag.topological_order() {
        if u != s && !dag.in_arcs(u).iter().any(|&a| f.get(a) == 3) {
            for &a in dag.out_arcs(u) {
                if f.get(a) == 3 {
                    f.0[a] = 2;
                }
            }
        }
    }

    let (f, extension) = settle(dag, &f, 3);
    let code = realize_fan_extension(dag, &f, &extension, field)?;
    Ok(TwoMaxPlan {
        w1,
        w1_closure,
        pseudo,
        w2,
        w2_closure,
        t1,
        t2,
        second_case,
        unpaired,
        f,
        extension,
        field,
        code,
    })
}

fn lower_paths<'a>(f: &mut HeightFunction, paths: impl IntoIterator<Item = &'a Path>) {
    for p in paths {
        for &a in &p.arcs {
            if f.get(a) == 3 {
                f.0[a] = 2;
            }
        }
    }
}

/// Arcs of a 3-valued source arborescence that lie on the tree path to
/// some receiver reachable on 3-valued arcs.
fn protected_tree(dag: &Dag, f: &HeightFunction, receivers: &NodeSet) -> Vec<ArcId> {
    let tree = dag.arborescence(|a| f.get(a) == 3);
    let mut parent = vec![None; dag.node_count()];
    for &a in &tree {
        parent[dag.arc(a).head] = Some(a);
    }
    let mut keep = vec![false; dag.arc_count()];
    for &t in receivers {
        let mut at = t;
        while let Some(a) = parent[at] {
            if keep[a] {
                break;
            }
            keep[a] = true;
            at = dag.arc(a).tail;
        }
    }
    (0..dag.arc_count()).filter(|&a| keep[a]).collect()
}

/// Outcome of checking a plan against the guarantees of the method.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuditReport {
    /// Receivers decoding no layer at all.
    pub missing_base: NodeSet,
    /// Receivers outside `t1` decoding fewer than two layers.
    pub missing_two: NodeSet,
    /// Base-only receivers according to an independent recomputation.
    pub expected_t1: NodeSet,
    pub t1_matches: bool,
}

impl AuditReport {
    pub fn base_ok(&self) -> bool {
        self.missing_base.is_empty()
    }

    pub fn two_ok(&self) -> bool {
        self.missing_two.is_empty()
    }

    pub fn passed(&self) -> bool {
        self.base_ok() && self.two_ok() && self.t1_matches
    }
}

/// Checks the realized code: every receiver gets the base layer, every
/// receiver outside `t1` gets two, and `t1` is exactly the set of receivers
/// cut off by 1-sets, recomputed here from single-arc cuts.
pub fn guarantee_audit(dag: &Dag, demand: &Demand, plan: &TwoMaxPlan) -> AuditReport {
    let receivers = demand.receivers();
    let p = plan.code.performances(dag);
    let missing_base = receivers.iter().copied().filter(|&t| p.get(t) < 1).collect();
    let missing_two = receivers.difference(&plan.t1).copied().filter(|&t| p.get(t) < 2).collect();
    let mut w1 = NodeSet::new();
    for &t in &receivers {
        if let Some(set) = largest_single_arc_cut(dag, t) {
            w1.extend(set);
        }
    }
    let expected_t1: NodeSet = receivers.intersection(&cut_off(dag, &w1)).copied().collect();
    let t1_matches = expected_t1 == plan.t1;
    AuditReport { missing_base, missing_two, expected_t1, t1_matches }
}

/// For a node behind a single-arc cut, the largest set of nodes cut off by
/// removing one arc, among the sets containing it.
fn largest_single_arc_cut(dag: &Dag, t: usize) -> Option<NodeSet> {
    let root = NodeSet::from([dag.source()]);
    // every cut arc lies on any fixed source-t path
    let mut via = vec![None; dag.node_count()];
    for &u in dag.topological_order() {
        for &a in dag.out_arcs(u) {
            let h = dag.arc(a).head;
            if via[h].is_none() && (u == dag.source() || via[u].is_some()) {
                via[h] = Some(a);
            }
        }
    }
    let mut path = Vec::new();
    let mut at = t;
    while let Some(a) = via[at] {
        path.push(a);
        at = dag.arc(a).tail;
    }
    path.iter()
        .filter_map(|&e| {
            let reach = dag.reachable(&root, |a| a != e);
            (!reach.contains(&t)).then(|| dag.nodes().filter(|v| !reach.contains(v)).collect::<NodeSet>())
        })
        .max_by_key(|set| set.len())
}
