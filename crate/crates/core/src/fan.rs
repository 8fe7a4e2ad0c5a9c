//! Monotone paths, fans and fan-extensions of height functions.
//!
//! A node `v` has an `i`-fan when `i` arc-disjoint monotone paths end at it,
//! the `j`-th one using values between `j` and `i` and starting at a node
//! that can already decode its first value. Fans are found as arc-disjoint
//! path systems in an auxiliary graph built per node and per `i`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::code::HeightFunction;
use crate::dag::{ArcId, Dag, NodeId};
use crate::error::{Error, Result};
use crate::flow::UnitNetwork;
use crate::paths::Path;

/// Node function `g` together with a witness fan for every node with `g > 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FanExtension {
    pub g: Vec<usize>,
    /// `fans[v]` lists the paths `P_1..P_g(v)` in order.
    pub fans: BTreeMap<NodeId, Vec<Path>>,
}

impl FanExtension {
    pub fn get(&self, v: NodeId) -> usize {
        self.g[v]
    }
}

/// True if `f` never decreases along `path`.
pub fn is_monotone(dag: &Dag, path: &[ArcId], f: &HeightFunction) -> Result<bool> {
    check_path(dag, path)?;
    Ok(path.windows(2).all(|w| f.get(w[0]) <= f.get(w[1])))
}

fn check_path(dag: &Dag, path: &[ArcId]) -> Result<()> {
    if let Some(&a) = path.iter().find(|&&a| a >= dag.arc_count()) {
        return Err(Error::UnknownArc(a));
    }
    if path.windows(2).any(|w| dag.arc(w[0]).head != dag.arc(w[1]).tail) {
        return Err(Error::NotAPath);
    }
    Ok(())
}

/// Role of an auxiliary node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AuxRole {
    Original(NodeId),
    /// `t_j`, the entry point for paths of value `j`.
    Layer(usize),
    /// Tail end of a kept arc.
    ArcTail(ArcId),
    /// Head end of a kept arc.
    ArcHead(ArcId),
}

/// The auxiliary digraph used to decide whether a node has an `i`-fan.
///
/// It is a plain digraph: split nodes of dropped arcs stay isolated, so not
/// every node is reachable from the source.
#[derive(Debug, Clone)]
pub struct AuxGraph {
    pub roles: Vec<AuxRole>,
    pub arcs: Vec<(usize, usize)>,
    /// Original arc carried by each auxiliary arc, if any.
    pub carries: Vec<Option<ArcId>>,
    pub source: usize,
    pub target: usize,
}

impl AuxGraph {
    pub fn node_count(&self) -> usize {
        self.roles.len()
    }

    pub fn layer_node(&self, j: usize) -> Option<usize> {
        self.roles.iter().position(|&r| r == AuxRole::Layer(j))
    }

    pub fn tail_node(&self, a: ArcId) -> Option<usize> {
        self.roles.iter().position(|&r| r == AuxRole::ArcTail(a))
    }

    pub fn head_node(&self, a: ArcId) -> Option<usize> {
        self.roles.iter().position(|&r| r == AuxRole::ArcHead(a))
    }

    pub fn has_arc(&self, from: usize, to: usize) -> bool {
        self.arcs.contains(&(from, to))
    }

    pub fn count_arcs(&self, from: usize, to: usize) -> usize {
        self.arcs.iter().filter(|&&e| e == (from, to)).count()
    }

    /// Maximum number of arc-disjoint source-target paths, capped at `cap`.
    pub fn connectivity(&self, cap: usize) -> usize {
        UnitNetwork::with_arcs(self.node_count(), self.arcs.iter().copied()).max_flow(self.source, self.target, cap)
    }

    /// Dump in the instance file format, with node roles as comments.
    pub fn to_instance_text(&self) -> String {
        let mut out = String::new();
        for (i, r) in self.roles.iter().enumerate() {
            let _ = writeln!(out, "# node {i} {r:?}");
        }
        let _ = writeln!(out, "nodes {}", self.node_count());
        let _ = writeln!(out, "source {}", self.source);
        for (id, (t, h)) in self.arcs.iter().enumerate() {
            let _ = writeln!(out, "arc {id} {t} {h}");
        }
        out
    }
}

/// Builds the auxiliary graph deciding whether `v` has an `i`-fan.
///
/// `g` is read only on nodes before `v` in the topological order. Arcs with
/// value 0 are dropped along with those above `i`: no fan path can use them.
pub fn build_aux_graph(dag: &Dag, f: &HeightFunction, g: &[usize], v: NodeId, i: usize) -> AuxGraph {
    build(dag, f, g, v, i, false)
}

fn build(dag: &Dag, f: &HeightFunction, g: &[usize], v: NodeId, i: usize, prune: bool) -> AuxGraph {
    let n = dag.node_count();
    let m = dag.arc_count();
    let layer = |j: usize| n + j - 1;
    let split = |a: ArcId| (n + i + 2 * a, n + i + 2 * a + 1);
    let mut roles: Vec<AuxRole> = (0..n).map(AuxRole::Original).collect();
    roles.extend((1..=i).map(AuxRole::Layer));
    for a in 0..m {
        roles.extend([AuxRole::ArcTail(a), AuxRole::ArcHead(a)]);
    }
    let pv = dag.position(v);
    let kept = |a: ArcId| {
        let arc = dag.arc(a);
        let x = f.get(a);
        x >= 1 && x <= i && (!prune || dag.position(arc.head) <= pv)
    };
    let redirected = |a: ArcId| {
        let u = dag.arc(a).tail;
        dag.position(u) < pv && g[u] >= f.get(a)
    };
    let mut arcs = Vec::new();
    let mut carries = Vec::new();
    let mut push = |e: (usize, usize), c: Option<ArcId>| {
        arcs.push(e);
        carries.push(c);
    };
    for a in (0..m).filter(|&a| kept(a)) {
        let arc = dag.arc(a);
        let (zt, zh) = split(a);
        push((zt, zh), Some(a));
        push((zh, arc.head), None);
        if redirected(a) {
            push((layer(f.get(a)), zt), None);
        } else {
            for &b in dag.in_arcs(arc.tail) {
                if kept(b) && f.get(b) <= f.get(a) {
                    push((split(b).1, zt), None);
                }
            }
        }
    }
    for j in 1..=i {
        push((dag.source(), layer(j)), None);
        if j < i {
            for _ in 0..i - 1 {
                push((layer(j), layer(j + 1)), None);
            }
        }
    }
    AuxGraph { roles, arcs, carries, source: dag.source(), target: v }
}

/// An `i`-fan of `v`, with paths ordered as `P_1..P_i`, if one exists.
pub fn has_i_fan(dag: &Dag, f: &HeightFunction, g: &[usize], v: NodeId, i: usize) -> Option<Vec<Path>> {
    if i == 0 || v == dag.source() || dag.in_arcs(v).len() < i {
        return None;
    }
    let aux = build(dag, f, g, v, i, true);
    let mut net = UnitNetwork::with_arcs(aux.node_count(), aux.arcs.iter().copied());
    if net.max_flow(aux.source, aux.target, i) < i {
        return None;
    }
    let mut paths: Vec<Path> = net
        .flow_paths(aux.source, aux.target)
        .into_iter()
        .map(|p| {
            let arcs: Vec<ArcId> = p.iter().filter_map(|&e| aux.carries[e]).collect();
            Path { start: dag.arc(arcs[0]).tail, arcs }
        })
        .collect();
    paths.sort_by_key(|p| (f.get(p.arcs[0]), p.arcs[0]));
    Some(paths)
}

/// Checks that `paths` form a `paths.len()`-fan of `v`.
pub fn validate_fan(dag: &Dag, f: &HeightFunction, g: &[usize], v: NodeId, paths: &[Path]) -> Result<()> {
    let bad = |msg: String| Err(Error::InvalidFanExtension(msg));
    let i = paths.len();
    let mut seen = vec![false; dag.arc_count()];
    for (j, p) in paths.iter().enumerate() {
        let j = j + 1;
        let (Some(&first), Some(&last)) = (p.arcs.first(), p.arcs.last()) else {
            return bad(format!("path {j} of node {v} is empty"));
        };
        check_path(dag, &p.arcs)?;
        if dag.arc(first).tail != p.start || dag.arc(last).head != v {
            return bad(format!("path {j} of node {v} has wrong endpoints"));
        }
        if !is_monotone(dag, &p.arcs, f)? {
            return bad(format!("path {j} of node {v} is not monotone"));
        }
        let (lo, hi) = (f.get(first), f.get(last));
        if lo < j || hi > i {
            return bad(format!("path {j} of node {v} has values {lo}..{hi} outside {j}..{i}"));
        }
        if g[p.start] < lo {
            return bad(format!("path {j} of node {v} starts at a node that cannot supply value {lo}"));
        }
        for &a in &p.arcs {
            if std::mem::replace(&mut seen[a], true) {
                return bad(format!("fan of node {v} reuses arc {a}"));
            }
        }
    }
    Ok(())
}

/// Checks both defining properties of a fan-extension.
pub fn validate_fan_extension(dag: &Dag, f: &HeightFunction, ext: &FanExtension) -> Result<()> {
    if ext.g.len() != dag.node_count() || f.0.len() != dag.arc_count() {
        return Err(Error::InvalidFanExtension("sizes do not match the graph".into()));
    }
    for v in dag.nodes().filter(|&v| v != dag.source() && ext.g[v] > 0) {
        let Some(fan) = ext.fans.get(&v) else {
            return Err(Error::InvalidFanExtension(format!("node {v} has no fan")));
        };
        if fan.len() != ext.g[v] {
            return Err(Error::InvalidFanExtension(format!("fan of node {v} has the wrong size")));
        }
        validate_fan(dag, f, &ext.g, v, fan)?;
    }
    if let Some(a) = property_ii_violation(dag, f, &ext.g) {
        return Err(Error::InvalidFanExtension(format!("arc {a} is neither free nor supported")));
    }
    Ok(())
}

fn property_ii_violation(dag: &Dag, f: &HeightFunction, g: &[usize]) -> Option<ArcId> {
    dag.arcs()
        .iter()
        .find(|a| f.get(a.id) > g[a.tail] && !dag.in_arcs(a.tail).iter().any(|&b| f.get(b) == f.get(a.id)))
        .map(|a| a.id)
}

/// Cuts every path so that its only free arc is the first one.
pub fn trim_fan(dag: &Dag, f: &HeightFunction, g: &[usize], paths: &[Path]) -> Vec<Path> {
    paths
        .iter()
        .map(|p| {
            let last_free = p.arcs.iter().rposition(|&a| f.get(a) <= g[dag.arc(a).tail]).unwrap_or(0);
            let arcs = p.arcs[last_free..].to_vec();
            Path { start: dag.arc(arcs[0]).tail, arcs }
        })
        .collect()
}

fn fan_for(dag: &Dag, f: &HeightFunction, g: &[usize], v: NodeId, k: usize) -> (usize, Option<Vec<Path>>) {
    for i in (1..=k.min(dag.in_arcs(v).len())).rev() {
        if let Some(fan) = has_i_fan(dag, f, g, v, i) {
            return (i, Some(fan));
        }
    }
    (0, None)
}

/// The largest fan value at every node, processed in topological order,
/// or `None` when the result violates the arc condition.
pub fn maximal_fan_extension(dag: &Dag, f: &HeightFunction, k: usize) -> Option<FanExtension> {
    let ext = greedy_fans(dag, f, k);
    property_ii_violation(dag, f, &ext.g).is_none().then_some(ext)
}

fn greedy_fans(dag: &Dag, f: &HeightFunction, k: usize) -> FanExtension {
    let mut g = vec![0; dag.node_count()];
    g[dag.source()] = k;
    let mut fans = BTreeMap::new();
    for &v in &dag.topological_order()[1..] {
        let (i, fan) = fan_for(dag, f, &g, v, k);
        g[v] = i;
        if let Some(fan) = fan {
            fans.insert(v, fan);
        }
    }
    FanExtension { g, fans }
}

/// Whether the maximal fan-extension exists and meets every demand.
pub fn is_feasible_height_function(dag: &Dag, f: &HeightFunction, demand: &crate::code::Demand) -> bool {
    maximal_fan_extension(dag, f, demand.layers()).is_some_and(|ext| demand.iter().all(|(v, l)| ext.g[v] >= l))
}

/// Lowers arc values until the arc condition holds, keeping every fan.
///
/// Nodes are visited in topological order; each out-arc of `u` drops to the
/// largest value not above its current one that is either at most `g(u)` or
/// equal to the value of an arc entering `u`. Fans only use arcs entering
/// their node, so values fixed earlier never change a computed `g`.
pub fn settle(dag: &Dag, f: &HeightFunction, k: usize) -> (HeightFunction, FanExtension) {
    let mut f = f.clone();
    let mut g = vec![0; dag.node_count()];
    g[dag.source()] = k;
    let mut fans = BTreeMap::new();
    for &u in dag.topological_order() {
        if u != dag.source() {
            let (i, fan) = fan_for(dag, &f, &g, u, k);
            g[u] = i;
            if let Some(fan) = fan {
                fans.insert(u, fan);
            }
        }
        let incoming: Vec<usize> = dag.in_arcs(u).iter().map(|&b| f.get(b)).collect();
        for &a in dag.out_arcs(u) {
            let x = f.get(a);
            let supported = incoming.iter().copied().filter(|&y| y <= x).max().unwrap_or(0);
            f.0[a] = x.min(g[u]).max(supported);
        }
    }
    (f, FanExtension { g, fans })
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::dag::test_support::small_dag;

    // s=0 u=1 v=2 x=3 z=4 w=5
    fn figure() -> (Dag, HeightFunction) {
        let dag = Dag::new(6, 0, &[(0, 3), (0, 1), (0, 2), (1, 2), (3, 1), (2, 4), (2, 5)]).unwrap();
        (dag, HeightFunction(vec![1, 2, 3, 2, 1, 2, 3]))
    }

    #[test]
    fn monotone_examples() {
        let dag = Dag::new(4, 0, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        let f = HeightFunction(vec![1, 2, 2]);
        assert_eq!(is_monotone(&dag, &[0], &f), Ok(true));
        assert_eq!(is_monotone(&dag, &[0, 1, 2], &f), Ok(true));
        let down = HeightFunction(vec![2, 1, 1]);
        assert_eq!(is_monotone(&dag, &[0, 1], &down), Ok(false));
        assert_eq!(is_monotone(&dag, &[0, 2], &f), Err(Error::NotAPath));
    }

    #[test]
    fn figure_aux_graph() {
        let (dag, f) = figure();
        let ext = greedy_fans(&dag, &f, 3);
        assert_eq!(&ext.g[..4], &[3, 2, 0, 1]);
        let aux = build_aux_graph(&dag, &f, &ext.g, 2, 3);
        let t = |j| aux.layer_node(j).unwrap();
        let zt = |a| aux.tail_node(a).unwrap();
        let zh = |a| aux.head_node(a).unwrap();
        // free arcs hang off the layer nodes
        for (a, j) in [(0, 1), (4, 1), (1, 2), (3, 2), (2, 3)] {
            assert!(aux.has_arc(t(j), zt(a)), "arc {a} from t_{j}");
        }
        for a in 0..7 {
            assert!(aux.has_arc(zt(a), zh(a)));
            assert!(aux.has_arc(zh(a), dag.arc(a).head));
        }
        // into the arcs leaving v
        assert!(aux.has_arc(zh(3), zt(5)) && aux.has_arc(zh(3), zt(6)));
        assert!(aux.has_arc(zh(2), zt(6)) && !aux.has_arc(zh(2), zt(5)));
        assert!(!aux.has_arc(zh(4), zt(3)));
        assert_eq!(aux.count_arcs(t(1), t(2)), 2);
        assert_eq!(aux.count_arcs(t(2), t(3)), 2);
        for j in 1..=3 {
            assert!(aux.has_arc(0, t(j)));
        }
        assert_eq!(aux.connectivity(3), 2);
        assert!(has_i_fan(&dag, &f, &ext.g, 2, 3).is_none());
        assert!(aux.to_instance_text().contains("source 0"));
    }

    #[test]
    fn aux_graph_of_single_arc() {
        let dag = Dag::new(2, 0, &[(0, 1)]).unwrap();
        let f = HeightFunction(vec![1]);
        let aux = build_aux_graph(&dag, &f, &[1, 0], 1, 1);
        assert!(aux.has_arc(aux.layer_node(1).unwrap(), aux.tail_node(0).unwrap()));
        assert_eq!(aux.connectivity(2), 1);
        assert!(build_aux_graph(&dag, &f, &[1, 0], 1, 0).layer_node(1).is_none());
    }

    #[test]
    fn fan_examples() {
        let dag = Dag::new(2, 0, &[(0, 1)]).unwrap();
        let f = HeightFunction(vec![1]);
        let fan = has_i_fan(&dag, &f, &[2, 0], 1, 1).unwrap();
        assert_eq!(fan, vec![Path { start: 0, arcs: vec![0] }]);
        assert!(has_i_fan(&dag, &f, &[2, 0], 1, 2).is_none());
    }

    #[test]
    fn maximal_extension_examples() {
        let star = Dag::new(4, 0, &[(0, 1), (0, 2), (0, 3)]).unwrap();
        let ext = maximal_fan_extension(&star, &HeightFunction::constant(3, 1), 2).unwrap();
        assert_eq!(ext.g, vec![2, 1, 1, 1]);
        validate_fan_extension(&star, &HeightFunction::constant(3, 1), &ext).unwrap();

        let path = Dag::new(3, 0, &[(0, 1), (1, 2)]).unwrap();
        assert!(maximal_fan_extension(&path, &HeightFunction(vec![1, 2]), 2).is_none());
        let (settled, ext) = settle(&path, &HeightFunction(vec![1, 2]), 2);
        assert_eq!(settled, HeightFunction(vec![1, 1]));
        assert_eq!(ext.g, vec![2, 1, 1]);
    }

    #[test]
    fn feasibility_examples() {
        let path = Dag::new(3, 0, &[(0, 1), (1, 2)]).unwrap();
        let f = HeightFunction::constant(2, 1);
        assert!(is_feasible_height_function(&path, &f, &crate::code::Demand::new(2)));
        let mut d = crate::code::Demand::new(2);
        d.set(2, 2).unwrap();
        assert!(!is_feasible_height_function(&path, &HeightFunction::constant(2, 2), &d));
    }

    /// All fans of `v` found by enumerating every monotone path and every
    /// ordered choice of them.
    fn brute_force_fan(dag: &Dag, f: &HeightFunction, g: &[usize], v: NodeId, i: usize) -> bool {
        fn collect(dag: &Dag, u: NodeId, v: NodeId, cur: &mut Vec<ArcId>, out: &mut Vec<Vec<ArcId>>) {
            if u == v && !cur.is_empty() {
                out.push(cur.clone());
                return;
            }
            for &a in dag.out_arcs(u) {
                if dag.position(dag.arc(a).head) <= dag.position(v) {
                    cur.push(a);
                    collect(dag, dag.arc(a).head, v, cur, out);
                    cur.pop();
                }
            }
        }
        let mut all = Vec::new();
        for u in dag.nodes().filter(|&u| dag.position(u) < dag.position(v)) {
            let mut found = Vec::new();
            collect(dag, u, v, &mut Vec::new(), &mut found);
            all.extend(found.into_iter().map(|arcs| Path { start: u, arcs }));
        }
        let all: Vec<Path> = all
            .into_iter()
            .filter(|p| is_monotone(dag, &p.arcs, f).unwrap() && g[p.start] >= f.get(p.arcs[0]))
            .collect();
        fn pick(dag: &Dag, f: &HeightFunction, g: &[usize], v: NodeId, i: usize, all: &[Path], chosen: &mut Vec<Path>) -> bool {
            if chosen.len() == i {
                return validate_fan(dag, f, g, v, chosen).is_ok();
            }
            let j = chosen.len() + 1;
            for p in all {
                let fits = f.get(p.arcs[0]) >= j
                    && f.get(*p.arcs.last().unwrap()) <= i
                    && chosen.iter().all(|c| c.arcs.iter().all(|a| !p.arcs.contains(a)));
                if fits {
                    chosen.push(p.clone());
                    if pick(dag, f, g, v, i, all, chosen) {
                        return true;
                    }
                    chosen.pop();
                }
            }
            false
        }
        pick(dag, f, g, v, i, &all, &mut Vec::new())
    }

    fn heights(max: usize) -> impl Strategy<Value = Vec<usize>> {
        proptest::collection::vec(0..=max, 16)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(96))]

        #[test]
        fn fan_search_matches_enumeration(dag in small_dag(6, 6), raw in heights(3), graw in proptest::collection::vec(0usize..=3, 6)) {
            let f = HeightFunction(raw[..dag.arc_count()].to_vec());
            let mut g: Vec<usize> = graw[..dag.node_count()].to_vec();
            g[0] = 3;
            for v in 1..dag.node_count() {
                for i in 1..=3 {
                    let found = has_i_fan(&dag, &f, &g, v, i);
                    if let Some(fan) = &found {
                        validate_fan(&dag, &f, &g, v, fan).unwrap();
                        let trimmed = trim_fan(&dag, &f, &g, fan);
                        validate_fan(&dag, &f, &g, v, &trimmed).unwrap();
                        for p in &trimmed {
                            let free = p.arcs.iter().filter(|&&a| f.get(a) <= g[dag.arc(a).tail]).count();
                            prop_assert_eq!(free, 1);
                        }
                    }
                    prop_assert_eq!(found.is_some(), brute_force_fan(&dag, &f, &g, v, i), "node {} i {}", v, i);
                }
            }
        }

        #[test]
        fn maximal_extension_dominates(dag in small_dag(7, 6), raw in heights(3), seeds in proptest::collection::vec(0usize..=3, 7)) {
            let f = HeightFunction(raw[..dag.arc_count()].to_vec());
            if let Some(best) = maximal_fan_extension(&dag, &f, 3) {
                validate_fan_extension(&dag, &f, &best).unwrap();
                // any other fan-extension found from a random start stays below g*
                let mut g = seeds[..dag.node_count()].to_vec();
                g[0] = 3;
                let mut fans = BTreeMap::new();
                for &v in &dag.topological_order()[1..] {
                    if g[v] > 0 {
                        match has_i_fan(&dag, &f, &g, v, g[v]) {
                            Some(fan) => { fans.insert(v, fan); }
                            None => g[v] = 0,
                        }
                    }
                }
                let other = FanExtension { g, fans };
                if validate_fan_extension(&dag, &f, &other).is_ok() {
                    for v in dag.nodes() {
                        prop_assert!(other.g[v] <= best.g[v]);
                    }
                }
            }
        }

        #[test]
        fn settle_yields_extension(dag in small_dag(8, 8), raw in heights(3)) {
            let f = HeightFunction(raw[..dag.arc_count()].to_vec());
            let (settled, ext) = settle(&dag, &f, 3);
            for a in 0..dag.arc_count() {
                prop_assert!(settled.get(a) <= f.get(a));
            }
            validate_fan_extension(&dag, &settled, &ext).unwrap();
            prop_assert_eq!(maximal_fan_extension(&dag, &settled, 3), Some(ext));
        }
    }
}
