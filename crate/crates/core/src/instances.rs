//! Structured instances built from 3-SAT formulas and vertex cover graphs,
//! together with the explicit codes that certify their solutions.

use std::collections::BTreeSet;

use crate::code::{Demand, NetworkCode};
use crate::dag::{Dag, NodeId, NodeSet};
use crate::error::{Error, Result};
use crate::gf::{CoeffVector, Field};

/// A conjunction of clauses with three literals each. Literal `+i` is
/// variable `i` (1-based), `-i` its negation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SatFormula {
    variable_count: usize,
    clauses: Vec<[i32; 3]>,
}

impl SatFormula {
    pub fn new(variable_count: usize, clauses: Vec<[i32; 3]>) -> Result<Self> {
        for (j, clause) in clauses.iter().enumerate() {
            if let Some(l) = clause.iter().find(|&&l| l == 0 || l.unsigned_abs() as usize > variable_count) {
                return Err(Error::InvalidFormula(format!("clause {j} has literal {l}")));
            }
        }
        Ok(Self { variable_count, clauses })
    }

    /// Parses DIMACS CNF text where every clause has exactly three literals.
    pub fn parse_dimacs(text: &str) -> Result<Self> {
        let mut header = None;
        let mut literals = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('c') || line.starts_with('%') {
                continue;
            }
            let parse_err = |msg: &str| Error::Parse { line: i + 1, msg: msg.into() };
            if line.starts_with('p') {
                let fields: Vec<&str> = line.split_whitespace().collect();
                if fields.len() != 4 || fields[1] != "cnf" {
                    return Err(parse_err("expected `p cnf <vars> <clauses>`"));
                }
                let vars = fields[2].parse().map_err(|_| parse_err("bad variable count"))?;
                let count: usize = fields[3].parse().map_err(|_| parse_err("bad clause count"))?;
                header = Some((vars, count));
                continue;
            }
            if header.is_none() {
                return Err(parse_err("clause before header"));
            }
            for tok in line.split_whitespace() {
                literals.push(tok.parse::<i32>().map_err(|_| parse_err("bad literal"))?);
            }
        }
        let (vars, count) = header.ok_or(Error::Parse { line: 0, msg: "missing header".into() })?;
        let mut clauses = Vec::new();
        for group in literals.split(|&l| l == 0).filter(|g| !g.is_empty()) {
            let clause: [i32; 3] = group
                .try_into()
                .map_err(|_| Error::InvalidFormula(format!("clause {} has {} literals", clauses.len(), group.len())))?;
            clauses.push(clause);
        }
        if clauses.len() != count {
            return Err(Error::InvalidFormula(format!("header promises {count} clauses, found {}", clauses.len())));
        }
        Self::new(vars, clauses)
    }

    pub fn variable_count(&self) -> usize {
        self.variable_count
    }

    pub fn clauses(&self) -> &[[i32; 3]] {
        &self.clauses
    }

    /// Index of the first clause the assignment leaves unsatisfied.
    pub fn first_unsatisfied(&self, assignment: &[bool]) -> Option<usize> {
        self.clauses.iter().position(|c| !c.iter().any(|&l| assignment[l.unsigned_abs() as usize - 1] == (l > 0)))
    }
}

/// Node layout of the 3-SAT instance.
#[derive(Debug, Clone, Copy)]
pub struct SatLayout {
    pub variable_count: usize,
}

impl SatLayout {
    pub const SOURCE: NodeId = 0;
    pub const HUB: NodeId = 1;

    /// Nodes of variable `i` (0-based): positive literal, negative literal,
    /// then the gadget nodes a, b, c, d.
    pub fn gadget(&self, i: usize) -> [NodeId; 6] {
        let base = 2 + 6 * i;
        [base, base + 1, base + 2, base + 3, base + 4, base + 5]
    }

    pub fn literal(&self, l: i32) -> NodeId {
        let g = self.gadget(l.unsigned_abs() as usize - 1);
        if l > 0 {
            g[0]
        } else {
            g[1]
        }
    }

    pub fn clause(&self, j: usize) -> NodeId {
        2 + 6 * self.variable_count + j
    }
}

fn gadget_arcs(layout: &SatLayout, i: usize) -> [(NodeId, NodeId); 11] {
    let s = SatLayout::SOURCE;
    let [x, nx, a, b, c, d] = layout.gadget(i);
    [(s, x), (s, nx), (s, a), (s, c), (x, a), (x, b), (nx, b), (nx, c), (a, d), (b, d), (c, d)]
}

fn sat_arcs(formula: &SatFormula) -> Vec<(NodeId, NodeId)> {
    let layout = SatLayout { variable_count: formula.variable_count };
    let (s, t) = (SatLayout::SOURCE, SatLayout::HUB);
    let mut arcs = vec![(s, t)];
    for i in 0..formula.variable_count {
        arcs.extend(gadget_arcs(&layout, i));
    }
    for (j, clause) in formula.clauses.iter().enumerate() {
        let cj = layout.clause(j);
        arcs.push((s, cj));
        arcs.push((t, cj));
        arcs.extend(clause.iter().map(|&l| (layout.literal(l), cj)));
    }
    arcs
}

/// Three-layer instance that admits a feasible code iff the formula is
/// satisfiable: the hub and gadget nodes a, b, c want the base layer, gadget
/// nodes d and all clause nodes want three layers.
pub fn gen_3sat_instance(formula: &SatFormula) -> Result<(Dag, Demand)> {
    let layout = SatLayout { variable_count: formula.variable_count };
    let n = 2 + 6 * formula.variable_count + formula.clauses.len();
    let dag = Dag::new(n, SatLayout::SOURCE, &sat_arcs(formula))?;
    let mut demand = Demand::new(3);
    demand.set(SatLayout::HUB, 1)?;
    for i in 0..formula.variable_count {
        let [_, _, a, b, c, d] = layout.gadget(i);
        for v in [a, b, c] {
            demand.set(v, 1)?;
        }
        demand.set(d, 3)?;
    }
    for j in 0..formula.clauses.len() {
        demand.set(layout.clause(j), 3)?;
    }
    Ok((dag, demand))
}

/// Explicit feasible code for the 3-SAT instance from a satisfying assignment.
pub fn assignment_to_code(formula: &SatFormula, assignment: &[bool]) -> Result<NetworkCode> {
    if assignment.len() != formula.variable_count {
        return Err(Error::InvalidFormula(format!(
            "assignment has {} values for {} variables",
            assignment.len(),
            formula.variable_count
        )));
    }
    if let Some(j) = formula.first_unsatisfied(assignment) {
        return Err(Error::AssignmentNotSatisfying(j));
    }
    let (dag, _) = gen_3sat_instance(formula)?;
    let field = Field::new(2)?;
    let v = |x: [i64; 3]| field.vector(&x);
    let (e1, e2, e12, all) = (v([1, 0, 0]), v([0, 1, 0]), v([1, 1, 0]), v([1, 1, 1]));
    let mut code: Vec<Option<CoeffVector>> = vec![None; dag.arc_count()];
    code[0] = Some(e1.clone());
    for (i, &value) in assignment.iter().enumerate() {
        let base = 1 + 11 * i;
        // arcs: sx, snx, sa, sc, xa, xb, nxb, nxc, ad, bd, cd
        let (sx, snx, sa, sc, ad, cd) = if value {
            (e12.clone(), e1.clone(), e2.clone(), all.clone(), e2.clone(), all.clone())
        } else {
            (e1.clone(), e12.clone(), all.clone(), e2.clone(), all.clone(), e2.clone())
        };
        for (offset, c) in [(0, sx), (1, snx), (2, sa), (3, sc), (8, ad), (9, e1.clone()), (10, cd)] {
            code[base + offset] = Some(c);
        }
    }
    for j in 0..formula.clauses.len() {
        let first = 1 + 11 * formula.variable_count + 5 * j;
        code[first] = Some(all.clone());
    }
    // single-entry nodes forward what they hear
    for &u in dag.topological_order() {
        if let [only] = dag.in_arcs(u) {
            let c = code[*only].clone().expect("entering arc precedes in topological order");
            for &a in dag.out_arcs(u) {
                code[a].get_or_insert_with(|| c.clone());
            }
        }
    }
    NetworkCode::new(&dag, field, 3, code.into_iter().map(|c| c.expect("every arc assigned")).collect())
}

/// A simple undirected graph on vertices `0..vertex_count`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverGraph {
    vertex_count: usize,
    edges: Vec<(usize, usize)>,
}

impl CoverGraph {
    pub fn new(vertex_count: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for &(u, v) in edges {
            if u == v || u >= vertex_count || v >= vertex_count {
                return Err(Error::InvalidGraph(format!("bad edge {u}-{v}")));
            }
            if !seen.insert((u.min(v), u.max(v))) {
                return Err(Error::InvalidGraph(format!("repeated edge {u}-{v}")));
            }
        }
        Ok(Self { vertex_count, edges: edges.to_vec() })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn vertex_node(&self, w: usize) -> NodeId {
        1 + w
    }

    pub fn edge_node(&self, e: usize) -> NodeId {
        1 + self.vertex_count + e
    }

    pub fn first_uncovered(&self, cover: &BTreeSet<usize>) -> Option<(usize, usize)> {
        self.edges.iter().copied().find(|(u, v)| !cover.contains(u) && !cover.contains(v))
    }
}

/// Two-layer instance: a base receiver per vertex fed by the source, a
/// two-layer receiver per edge fed by its endpoints.
pub fn gen_vertex_cover_instance(graph: &CoverGraph) -> Result<(Dag, Demand)> {
    let mut arcs: Vec<(NodeId, NodeId)> = (0..graph.vertex_count).map(|w| (0, graph.vertex_node(w))).collect();
    for (e, &(u, v)) in graph.edges.iter().enumerate() {
        arcs.push((graph.vertex_node(u), graph.edge_node(e)));
        arcs.push((graph.vertex_node(v), graph.edge_node(e)));
    }
    let dag = Dag::new(1 + graph.vertex_count + graph.edges.len(), 0, &arcs)?;
    let t1: NodeSet = (0..graph.vertex_count).map(|w| graph.vertex_node(w)).collect();
    let t2: NodeSet = (0..graph.edges.len()).map(|e| graph.edge_node(e)).collect();
    Ok((dag, Demand::from_tiers(&[t1, t2])?))
}

/// The demand served when the vertices of `subset` give up the base layer.
pub fn cover_demand(graph: &CoverGraph, subset: &BTreeSet<usize>) -> Result<Demand> {
    let t1: NodeSet = (0..graph.vertex_count).filter(|w| !subset.contains(w)).map(|w| graph.vertex_node(w)).collect();
    let t2: NodeSet = (0..graph.edges.len()).map(|e| graph.edge_node(e)).collect();
    Demand::from_tiers(&[t1, t2])
}

/// Code with pairwise independent height-2 vectors on the source arcs of
/// `subset` and `(1, 0)` everywhere else, forwarded by the vertex nodes.
/// Feasible for [`cover_demand`] exactly when `subset` is a vertex cover.
pub fn subset_code(graph: &CoverGraph, subset: &BTreeSet<usize>, field: Field) -> Result<NetworkCode> {
    if subset.len() > field.size() as usize {
        return Err(Error::FieldTooSmall { q: field.size(), needed: subset.len() });
    }
    let (dag, _) = gen_vertex_cover_instance(graph)?;
    let mut top = (0..subset.len()).map(|i| field.vector(&[i as i64, 1]));
    let per_vertex: Vec<CoeffVector> = (0..graph.vertex_count)
        .map(|w| if subset.contains(&w) { top.next().unwrap() } else { CoeffVector::unit(2, 1) })
        .collect();
    let mut code = per_vertex.clone();
    for &(u, v) in &graph.edges {
        code.push(per_vertex[u].clone());
        code.push(per_vertex[v].clone());
    }
    NetworkCode::new(&dag, field, 2, code)
}

/// [`subset_code`] for a vertex cover; requires `q ≥ |cover|`.
pub fn cover_to_code(graph: &CoverGraph, cover: &BTreeSet<usize>, field: Field) -> Result<NetworkCode> {
    if let Some((u, v)) = graph.first_uncovered(cover) {
        return Err(Error::NotACover(u, v));
    }
    subset_code(graph, cover, field)
}
