//! Plain-text instance and code files.
//!
//! Instance files hold one directive per line, `#` starts a comment:
//!
//! ```text
//! nodes 4
//! source 0
//! layers 2
//! arc 0 0 1
//! arc 1 0 2
//! demand 3 2
//! ```
//!
//! Arc ids must cover `0..m` exactly once; `layers` is optional and
//! defaults to the highest demand level (at least 1). Code files have a
//! `field <q>` and a `layers <k>` header, then `code <arc> <c_1> ... <c_k>`
//! per arc.

use std::collections::BTreeMap;
use std::fmt::Write;
use std::str::FromStr;

use crate::code::{Demand, NetworkCode};
use crate::dag::{ArcId, Dag, NodeId};
use crate::error::{Error, Result};
use crate::gf::{CoeffVector, Field};

fn directives(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let line = line.split('#').next().unwrap_or("").trim();
        (!line.is_empty()).then(|| (i + 1, line.split_whitespace().collect()))
    })
}

fn field_value<T: FromStr>(line: usize, fields: &[&str], i: usize) -> Result<T> {
    fields
        .get(i)
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::Parse { line, msg: format!("expected a number at position {}", i + 1) })
}

fn arity(line: usize, fields: &[&str], n: usize) -> Result<()> {
    if fields.len() != n {
        return Err(Error::Parse { line, msg: format!("`{}` takes {} values", fields[0], n - 1) });
    }
    Ok(())
}

/// Parses an instance file into a graph and a demand.
pub fn parse_instance(text: &str) -> Result<(Dag, Demand)> {
    let (mut nodes, mut source, mut layers) = (None, None, None);
    let mut arcs: BTreeMap<ArcId, (NodeId, NodeId)> = BTreeMap::new();
    let mut levels: Vec<(NodeId, usize)> = Vec::new();
    for (line, fields) in directives(text) {
        match fields[0] {
            "nodes" => {
                arity(line, &fields, 2)?;
                nodes = Some(field_value::<usize>(line, &fields, 1)?);
            }
            "source" => {
                arity(line, &fields, 2)?;
                source = Some(field_value::<NodeId>(line, &fields, 1)?);
            }
            "layers" => {
                arity(line, &fields, 2)?;
                layers = Some(field_value::<usize>(line, &fields, 1)?);
            }
            "arc" => {
                arity(line, &fields, 4)?;
                let id = field_value(line, &fields, 1)?;
                let ends = (field_value(line, &fields, 2)?, field_value(line, &fields, 3)?);
                if arcs.insert(id, ends).is_some() {
                    return Err(Error::DuplicateArcId(id));
                }
            }
            "demand" => {
                arity(line, &fields, 3)?;
                levels.push((field_value(line, &fields, 1)?, field_value(line, &fields, 2)?));
            }
            other => return Err(Error::Parse { line, msg: format!("unknown directive `{other}`") }),
        }
    }
    let nodes = nodes.ok_or(Error::Parse { line: 0, msg: "missing `nodes`".into() })?;
    let source = source.ok_or(Error::Parse { line: 0, msg: "missing `source`".into() })?;
    if let Some((expected, _)) = arcs.keys().enumerate().find(|&(i, &id)| i != id) {
        return Err(Error::Parse { line: 0, msg: format!("arc ids must be 0..m, arc {expected} is missing") });
    }
    let dag = Dag::new(nodes, source, &arcs.into_values().collect::<Vec<_>>())?;
    let k = layers.unwrap_or_else(|| levels.iter().map(|&(_, l)| l).max().unwrap_or(1).max(1));
    let mut demand = Demand::new(k);
    for (v, level) in levels {
        if demand.demand_of(v) != 0 {
            return Err(Error::InvalidDemand(format!("node {v} has more than one demand")));
        }
        demand.set(v, level)?;
    }
    demand.validate(&dag)?;
    Ok((dag, demand))
}

pub fn write_instance(dag: &Dag, demand: &Demand) -> String {
    let mut out = String::new();
    writeln!(out, "nodes {}", dag.node_count()).unwrap();
    writeln!(out, "source {}", dag.source()).unwrap();
    writeln!(out, "layers {}", demand.layers()).unwrap();
    for a in dag.arcs() {
        writeln!(out, "arc {} {} {}", a.id, a.tail, a.head).unwrap();
    }
    for (v, level) in demand.iter() {
        writeln!(out, "demand {v} {level}").unwrap();
    }
    out
}

/// Parses a code file for `dag` and checks it.
pub fn parse_code(text: &str, dag: &Dag) -> Result<NetworkCode> {
    let (mut field, mut layers) = (None, None);
    let mut codes: Vec<Option<CoeffVector>> = vec![None; dag.arc_count()];
    for (line, fields) in directives(text) {
        match fields[0] {
            "field" => {
                arity(line, &fields, 2)?;
                field = Some(Field::new(field_value(line, &fields, 1)?)?);
            }
            "layers" => {
                arity(line, &fields, 2)?;
                layers = Some(field_value::<usize>(line, &fields, 1)?);
            }
            "code" => {
                let (Some(f), Some(k)) = (field, layers) else {
                    return Err(Error::Parse { line, msg: "`field` and `layers` must come first".into() });
                };
                arity(line, &fields, k + 2)?;
                let a: ArcId = field_value(line, &fields, 1)?;
                let entries = (0..k).map(|i| field_value::<i64>(line, &fields, i + 2)).collect::<Result<Vec<_>>>()?;
                let slot = codes.get_mut(a).ok_or(Error::UnknownArc(a))?;
                if slot.replace(f.vector(&entries)).is_some() {
                    return Err(Error::DuplicateArcId(a));
                }
            }
            other => return Err(Error::Parse { line, msg: format!("unknown directive `{other}`") }),
        }
    }
    let field = field.ok_or(Error::Parse { line: 0, msg: "missing `field`".into() })?;
    let k = layers.ok_or(Error::Parse { line: 0, msg: "missing `layers`".into() })?;
    let assignment = codes
        .into_iter()
        .enumerate()
        .map(|(a, c)| c.ok_or(Error::Parse { line: 0, msg: format!("no code for arc {a}") }))
        .collect::<Result<Vec<_>>>()?;
    NetworkCode::new(dag, field, k, assignment)
}

pub fn write_code(code: &NetworkCode) -> String {
    let mut out = String::new();
    writeln!(out, "field {}", code.field().size()).unwrap();
    writeln!(out, "layers {}", code.layers()).unwrap();
    for (a, c) in code.assignment().iter().enumerate() {
        write!(out, "code {a}").unwrap();
        for x in &c.0 {
            write!(out, " {x}").unwrap();
        }
        out.push('\n');
    }
    out
}
