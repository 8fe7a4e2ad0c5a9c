//! Message-passing computation of capped connectivities and of the entry
//! arcs of maximal 1- and 2-sets.
//!
//! Every node waits for one message per entering arc, then sends the same
//! three-symbol message along all of its leaving arcs. The simulation runs
//! nodes in any order that respects message availability.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use rayon::prelude::*;

use crate::dag::{ArcId, Dag, NodeId};
use crate::error::{Error, Result};

/// `None` stands for the blank symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Message {
    pub m1: Option<ArcId>,
    pub m2: Option<ArcId>,
    pub m3: Option<ArcId>,
}

impl Message {
    pub const BLANK: Message = Message { m1: None, m2: None, m3: None };
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeVerdict {
    /// `min(3, λ(s, v))`.
    pub lambda_capped: usize,
    /// Entering arc of the maximal 1-set around the node, when λ = 1.
    pub one_set_entry: Option<ArcId>,
    /// Entering arcs of the maximal 2-set around the node, when λ = 2.
    pub two_set_entries: Option<(ArcId, ArcId)>,
}

fn pair(set: &BTreeSet<ArcId>) -> (ArcId, ArcId) {
    let mut it = set.iter().copied();
    (it.next().unwrap(), it.next().unwrap())
}

/// One protocol step at a non-source node, given the message heard on each
/// entering arc.
pub fn node_step(incoming: &[(ArcId, Message)]) -> Result<(NodeVerdict, Message)> {
    if incoming.is_empty() {
        return Err(Error::SourceHasNoStep);
    }
    let heard: Vec<[ArcId; 3]> = incoming
        .iter()
        .map(|&(a, m)| [m.m1.unwrap_or(a), m.m2.unwrap_or(a), m.m3.unwrap_or(a)])
        .collect();

    let mut lambda = None;
    let mut out = Message::BLANK;
    let mut top: Option<(ArcId, ArcId)> = None;

    let m1: BTreeSet<ArcId> = heard.iter().map(|h| h[0]).collect();
    if m1.len() == 1 {
        lambda = Some(1);
        let a = heard[0][0];
        out = Message { m1: Some(a), m2: Some(a), m3: Some(a) };
    }

    let m2: BTreeSet<ArcId> = heard.iter().flat_map(|h| [h[1], h[2]]).collect();
    let mut adopt = |set: &BTreeSet<ArcId>, lambda: &mut Option<usize>| {
        let (x, y) = pair(set);
        out.m2 = Some(x);
        out.m3 = Some(y);
        top = Some((x, y));
        lambda.get_or_insert(2);
    };
    let mut m2_prime_len = None;
    if m2.len() == 2 {
        adopt(&m2, &mut lambda);
    } else if m2.len() > 2 {
        let important = |j: usize| {
            !heard.iter().enumerate().any(|(i, h)| i != j && (h[1] == heard[j][0] || h[2] == heard[j][0]))
        };
        let m2_prime: BTreeSet<ArcId> = heard
            .iter()
            .enumerate()
            .flat_map(|(j, h)| if important(j) { vec![h[1], h[2]] } else { vec![h[0]] })
            .collect();
        m2_prime_len = Some(m2_prime.len());
        if m2_prime.len() == 2 {
            adopt(&m2_prime, &mut lambda);
        }
    }

    if m2.len() > 2 && m2_prime_len.is_some_and(|l| l > 2) && lambda != Some(1) && m1.len() <= 2 {
        adopt(&m1, &mut lambda);
    }

    let lambda = lambda.unwrap_or(3);
    if lambda == 3 {
        out.m2 = None;
        out.m3 = None;
    }
    let verdict = NodeVerdict {
        lambda_capped: lambda,
        one_set_entry: if lambda == 1 { out.m1 } else { None },
        two_set_entries: if lambda == 2 { top } else { None },
    };
    Ok((verdict, out))
}

struct Run<'a> {
    dag: &'a Dag,
    inbox: Vec<Option<Message>>,
    waiting: Vec<usize>,
    verdicts: BTreeMap<NodeId, NodeVerdict>,
}

impl<'a> Run<'a> {
    fn new(dag: &'a Dag) -> Self {
        let waiting = dag.nodes().map(|v| dag.in_arcs(v).len()).collect();
        let mut run = Run { dag, inbox: vec![None; dag.arc_count()], waiting, verdicts: BTreeMap::new() };
        run.send(dag.source(), Message::BLANK);
        run
    }

    fn send(&mut self, u: NodeId, m: Message) {
        for &a in self.dag.out_arcs(u) {
            self.inbox[a] = Some(m);
            self.waiting[self.dag.arc(a).head] -= 1;
        }
    }

    fn ready_after(&self, u: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        let heads: BTreeSet<NodeId> = self.dag.out_arcs(u).iter().map(|&a| self.dag.arc(a).head).collect();
        heads.into_iter().filter(|&h| self.waiting[h] == 0)
    }

    fn incoming(&self, v: NodeId) -> Vec<(ArcId, Message)> {
        self.dag.in_arcs(v).iter().map(|&a| (a, self.inbox[a].expect("node is ready"))).collect()
    }

    fn step(&mut self, v: NodeId) -> Vec<NodeId> {
        let (verdict, m) = node_step(&self.incoming(v)).expect("non-source nodes have entering arcs");
        self.verdicts.insert(v, verdict);
        self.send(v, m);
        self.ready_after(v).collect()
    }

    fn initially_ready(&self) -> Vec<NodeId> {
        self.ready_after(self.dag.source()).collect()
    }
}

/// Runs the protocol in topological order.
pub fn run_protocol(dag: &Dag) -> BTreeMap<NodeId, NodeVerdict> {
    let mut run = Run::new(dag);
    for &v in dag.topological_order().iter().filter(|&&v| v != dag.source()) {
        run.step(v);
    }
    run.verdicts
}

/// Runs the protocol, each time stepping a uniformly chosen node among those
/// that have heard all their messages.
pub fn run_protocol_random(dag: &Dag, rng: &mut impl Rng) -> BTreeMap<NodeId, NodeVerdict> {
    let mut run = Run::new(dag);
    let mut ready = run.initially_ready();
    while !ready.is_empty() {
        let v = ready.swap_remove(rng.gen_range(0..ready.len()));
        let next = run.step(v);
        ready.extend(next);
    }
    run.verdicts
}

/// Runs the protocol in waves, computing the steps of all ready nodes of a
/// wave in parallel.
pub fn run_protocol_parallel(dag: &Dag) -> BTreeMap<NodeId, NodeVerdict> {
    let mut run = Run::new(dag);
    let mut wave = run.initially_ready();
    while !wave.is_empty() {
        let results: Vec<(NodeId, NodeVerdict, Message)> = wave
            .par_iter()
            .map(|&v| {
                let (verdict, m) = node_step(&run.incoming(v)).expect("non-source nodes have entering arcs");
                (v, verdict, m)
            })
            .collect();
        let mut next = BTreeSet::new();
        for (v, verdict, m) in results {
            run.verdicts.insert(v, verdict);
            run.send(v, m);
            next.extend(run.ready_after(v));
        }
        wave = next.into_iter().collect();
    }
    run.verdicts
}
