//! Explicit code construction from fan-extensions.

use crate::code::{Demand, HeightFunction, NetworkCode};
use crate::dag::{ArcId, Dag, NodeSet};
use crate::error::{Error, Result};
use crate::fan::{has_i_fan, trim_fan, validate_fan_extension, FanExtension};
use crate::gf::{coding_lemma_combine, control_vectors, CoeffVector, Field, Subspace};
use crate::paths::Path;
use crate::two_layer::check_theorem7;

/// Realizes a fan-extension: the returned code has height exactly `f` on
/// every arc and every node decodes at least `g` layers.
///
/// Requires a field with more elements than the graph has nodes.
pub fn realize_fan_extension(dag: &Dag, f: &HeightFunction, ext: &FanExtension, field: Field) -> Result<NetworkCode> {
    if (field.size() as usize) <= dag.node_count() {
        return Err(Error::FieldTooSmall { q: field.size(), needed: dag.node_count() });
    }
    realize(dag, f, ext, field)
}

/// Same as [`realize_fan_extension`] but only asks for a field larger than
/// the number of fans sharing an arc.
pub(crate) fn realize(dag: &Dag, f: &HeightFunction, ext: &FanExtension, field: Field) -> Result<NetworkCode> {
    validate_fan_extension(dag, f, ext)?;
    let k = ext.g[dag.source()];
    if let Some(a) = f.0.iter().position(|&x| x > k) {
        return Err(Error::InvalidFanExtension(format!("arc {a} is above the {k} layers")));
    }
    let m = dag.arc_count();
    let fans: Vec<Vec<Path>> = ext.fans.values().map(|paths| trim_fan(dag, f, &ext.g, paths)).collect();

    // (fan, path, position) for every arc on a fan path
    let mut cover: Vec<Vec<(usize, usize, usize)>> = vec![Vec::new(); m];
    for (fi, paths) in fans.iter().enumerate() {
        for (pi, p) in paths.iter().enumerate() {
            for (pos, &a) in p.arcs.iter().enumerate() {
                cover[a].push((fi, pi, pos));
            }
        }
    }
    let load = cover.iter().map(|c| c.len()).max().unwrap_or(0);
    if load + 1 > field.size() as usize {
        return Err(Error::FieldTooSmall { q: field.size(), needed: load });
    }

    let is_free = |a: ArcId| f.get(a) <= ext.g[dag.arc(a).tail];
    let mut code: Vec<Option<CoeffVector>> = vec![None; m];

    // free arcs by increasing value: each first arc of a fan avoids the span
    // of that fan's first arcs assigned before it
    let mut free: Vec<ArcId> = (0..m).filter(|&a| is_free(a)).collect();
    free.sort_by_key(|&a| (f.get(a), a));
    for &a in &free {
        let h = f.get(a);
        if h == 0 {
            code[a] = Some(CoeffVector::zero(k));
            continue;
        }
        let mut pairs = Vec::new();
        for &(fi, _, pos) in &cover[a] {
            debug_assert_eq!(pos, 0, "trimmed paths have a single free arc");
            let assigned = fans[fi].iter().filter_map(|p| code[p.arcs[0]].as_ref());
            let y = Subspace::span(field, k, assigned)
                .orthogonal_within(h)
                .expect("fewer than h first arcs of a fan lie below value h");
            let l = (1..=h).find(|&l| y.layer(l) != 0).expect("non-zero vector");
            pairs.push((CoeffVector::unit(k, l), y));
        }
        pairs.push((CoeffVector::unit(k, h), CoeffVector::unit(k, h)));
        code[a] = Some(coding_lemma_combine(&pairs, field)?);
    }

    let mut frontier: Vec<Vec<ArcId>> = fans.iter().map(|ps| ps.iter().map(|p| p.arcs[0]).collect()).collect();
    let mut rest: Vec<ArcId> = (0..m).filter(|&a| !is_free(a)).collect();
    rest.sort_by_key(|&a| (dag.position(dag.arc(a).tail), a));
    for &a in &rest {
        let u = dag.arc(a).tail;
        let h = f.get(a);
        let support = dag
            .in_arcs(u)
            .iter()
            .copied()
            .filter(|&b| f.get(b) == h)
            .min()
            .expect("arc condition gives a supporting entering arc");
        let support_code = code[support].clone().expect("entering arcs are assigned first");
        if cover[a].is_empty() {
            code[a] = Some(support_code);
            continue;
        }
        let mut pairs = Vec::new();
        for &(fi, pi, _) in &cover[a] {
            let basis: Vec<CoeffVector> =
                frontier[fi].iter().map(|&b| code[b].clone().expect("frontier is assigned")).collect();
            let n = basis.len();
            let ys = control_vectors(&basis, field)?;
            debug_assert!(n <= k);
            pairs.push((basis[pi].clone(), ys[pi].clone()));
        }
        pairs.push((support_code, CoeffVector::unit(k, h)));
        code[a] = Some(coding_lemma_combine(&pairs, field)?);
        for &(fi, pi, _) in &cover[a] {
            frontier[fi][pi] = a;
        }
    }

    let code = NetworkCode::new(dag, field, k, code.into_iter().map(|c| c.expect("every arc assigned")).collect())?;
    if code.height_function() != *f {
        return Err(Error::Infeasible("realized heights differ from the height function".into()));
    }
    if let Some(v) = dag.nodes().find(|&v| code.performance(dag, v) < ext.g[v]) {
        return Err(Error::Infeasible(format!("node {v} decodes fewer layers than its fan value")));
    }
    Ok(code)
}

/// Builds a feasible two-layer code for base receivers `t1all` and
/// two-layer receivers `t2prime` with height exactly `f`.
pub fn build_two_layer_code(
    dag: &Dag,
    f: &HeightFunction,
    t2prime: &NodeSet,
    t1all: &NodeSet,
    field: Field,
) -> Result<NetworkCode> {
    let demand = Demand::from_tiers(&[t1all.clone(), t2prime.clone()])?;
    demand.validate(dag)?;
    if let Some(violation) = check_theorem7(dag, f, &demand)? {
        return Err(Error::ConditionsViolated(violation));
    }
    let all_two = |v| dag.in_arcs(v).iter().all(|&a| f.get(a) == 2);
    let receivers = demand.receivers();
    // nodes that must see both layers in the all-height-two code
    let inner: NodeSet = dag
        .nodes()
        .filter(|&v| v != dag.source() && all_two(v))
        .filter(|&v| receivers.contains(&v) || dag.out_arcs(v).iter().any(|&a| f.get(a) == 1))
        .collect();
    let twos = HeightFunction::constant(dag.arc_count(), 2);
    let mut g = vec![0; dag.node_count()];
    g[dag.source()] = 2;
    for &v in &inner {
        g[v] = 2;
    }
    let mut fans = std::collections::BTreeMap::new();
    for &v in &inner {
        let fan = has_i_fan(dag, &twos, &g, v, 2)
            .ok_or_else(|| Error::Infeasible(format!("node {v} lacks two arc-disjoint paths")))?;
        fans.insert(v, fan);
    }
    let inner_code = realize(dag, &twos, &FanExtension { g, fans }, field)?;
    let assignment: Vec<CoeffVector> = (0..dag.arc_count())
        .map(|a| if f.get(a) == 1 { CoeffVector::unit(2, 1) } else { inner_code.get(a).clone() })
        .collect();
    let code = NetworkCode::new(dag, field, 2, assignment)?;
    if !code.is_feasible(dag, &demand) {
        return Err(Error::Infeasible("two-layer code misses a demand".into()));
    }
    Ok(code)
}
