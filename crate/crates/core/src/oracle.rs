//! Exhaustive feasibility search for tiny instances.
//!
//! Arcs are assigned in topological order of their tails, each one drawing
//! from the span of the vectors entering its tail. Scaling a vector by a
//! non-zero constant changes no span, so only the zero vector and one
//! representative per line are tried.

use crate::code::{Demand, HeightFunction, NetworkCode};
use crate::dag::{ArcId, Dag, NodeId};
use crate::error::{Error, Result};
use crate::gf::{CoeffVector, Field, Subspace};

pub const DEFAULT_BUDGET: u64 = 100_000_000;

#[derive(Debug, Clone)]
pub struct OracleOptions<'a> {
    /// Maximum number of candidate vectors tried before giving up.
    pub budget: u64,
    /// When set, every arc must carry a vector of exactly this height.
    pub heights: Option<&'a HeightFunction>,
}

impl Default for OracleOptions<'_> {
    fn default() -> Self {
        Self { budget: DEFAULT_BUDGET, heights: None }
    }
}

/// A feasible code over `field`, or `None` if there is none.
pub fn brute_force_feasible(dag: &Dag, demand: &Demand, field: Field) -> Result<Option<NetworkCode>> {
    brute_force_with(dag, demand, field, &OracleOptions::default())
}

pub fn brute_force_with(
    dag: &Dag,
    demand: &Demand,
    field: Field,
    options: &OracleOptions<'_>,
) -> Result<Option<NetworkCode>> {
    demand.validate(dag)?;
    let k = demand.layers();
    if let Some(h) = options.heights {
        if h.0.len() != dag.arc_count() || h.0.iter().any(|&x| x > k) {
            return Err(Error::PreconditionViolated("height function does not fit the instance".into()));
        }
    }
    let mut order: Vec<ArcId> = (0..dag.arc_count()).collect();
    order.sort_by_key(|&a| (dag.position(dag.arc(a).tail), a));
    // nodes whose demand can be checked once order[i] is assigned
    let mut checks = vec![Vec::new(); order.len()];
    for (v, level) in demand.iter() {
        let last = dag.in_arcs(v).iter().map(|&a| order.iter().position(|&b| b == a).unwrap()).max();
        match last {
            Some(i) => checks[i].push((v, level)),
            None => return Ok(None),
        }
    }
    let search = Search { dag, field, k, order: &order, checks: &checks, heights: options.heights, budget: options.budget, spent: 0 };
    let assignment = if k == 2 { search.run_patterns()? } else { search.run_vectors()? };
    Ok(assignment.map(|a| NetworkCode::unchecked(field, k, a)))
}

struct Search<'a> {
    dag: &'a Dag,
    field: Field,
    k: usize,
    order: &'a [ArcId],
    checks: &'a [Vec<(NodeId, usize)>],
    heights: Option<&'a HeightFunction>,
    budget: u64,
    spent: u64,
}

impl Search<'_> {
    fn charge(&mut self) -> Result<()> {
        self.spent += 1;
        if self.spent > self.budget {
            Err(Error::BudgetExceeded(self.budget))
        } else {
            Ok(())
        }
    }

    fn height_ok(&self, a: ArcId, h: usize) -> bool {
        self.heights.is_none_or(|f| f.get(a) == h)
    }

    fn run_vectors(mut self) -> Result<Option<Vec<CoeffVector>>> {
        let mut assignment = vec![CoeffVector::zero(self.k); self.dag.arc_count()];
        Ok(self.dfs_vectors(0, &mut assignment)?.then_some(assignment))
    }

    fn dfs_vectors(&mut self, i: usize, assignment: &mut Vec<CoeffVector>) -> Result<bool> {
        if i == self.order.len() {
            return Ok(true);
        }
        let a = self.order[i];
        let tail = self.dag.arc(a).tail;
        let basis: Vec<CoeffVector> = if tail == self.dag.source() {
            (1..=self.k).map(|j| CoeffVector::unit(self.k, j)).collect()
        } else {
            Subspace::span(self.field, self.k, self.dag.in_arcs(tail).iter().map(|&b| &assignment[b]))
                .basis()
                .to_vec()
        };
        for candidate in line_representatives(self.field, self.k, &basis) {
            self.charge()?;
            if !self.height_ok(a, candidate.height()) {
                continue;
            }
            assignment[a] = candidate;
            let met = self.checks[i].iter().all(|&(v, level)| {
                Subspace::span(self.field, self.k, self.dag.in_arcs(v).iter().map(|&b| &assignment[b]))
                    .decodable_prefix()
                    >= level
            });
            if met && self.dfs_vectors(i + 1, assignment)? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// Two layers: a line of `F_q^2` is either `(1,0)` or one of `q` lines
    /// of height two, and spans only depend on which lines coincide. Lines
    /// of height two are therefore named by first use, which is exact.
    fn run_patterns(mut self) -> Result<Option<Vec<CoeffVector>>> {
        let mut symbols = vec![Symbol::Zero; self.dag.arc_count()];
        if !self.dfs_patterns(0, &mut symbols, 0)? {
            return Ok(None);
        }
        let f = self.field;
        Ok(Some(
            symbols
                .into_iter()
                .map(|s| match s {
                    Symbol::Zero => CoeffVector::zero(2),
                    Symbol::Base => CoeffVector::unit(2, 1),
                    Symbol::Top(j) => CoeffVector(vec![j % f.size(), 1]),
                })
                .collect(),
        ))
    }

    fn dfs_patterns(&mut self, i: usize, symbols: &mut Vec<Symbol>, used: u32) -> Result<bool> {
        if i == self.order.len() {
            return Ok(true);
        }
        let a = self.order[i];
        let tail = self.dag.arc(a).tail;
        let incoming = if tail == self.dag.source() {
            Lines::Plane
        } else {
            lines_of(self.dag.in_arcs(tail).iter().map(|&b| symbols[b]))
        };
        let mut candidates = vec![Symbol::Zero];
        match incoming {
            Lines::None => {}
            Lines::One(x) => candidates.push(x),
            Lines::Plane => {
                candidates.push(Symbol::Base);
                candidates.extend((0..used).map(Symbol::Top));
                if used < self.field.size() {
                    candidates.push(Symbol::Top(used));
                }
            }
        }
        for candidate in candidates {
            self.charge()?;
            if !self.height_ok(a, candidate.height()) {
                continue;
            }
            symbols[a] = candidate;
            let met = self.checks[i].iter().all(|&(v, level)| {
                let p = match lines_of(self.dag.in_arcs(v).iter().map(|&b| symbols[b])) {
                    Lines::Plane => 2,
                    Lines::One(Symbol::Base) => 1,
                    _ => 0,
                };
                p >= level
            });
            let next_used = if candidate == Symbol::Top(used) { used + 1 } else { used };
            if met && self.dfs_patterns(i + 1, symbols, next_used)? {
                return Ok(true);
            }
        }
        Ok(false)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Symbol {
    Zero,
    Base,
    Top(u32),
}

impl Symbol {
    fn height(self) -> usize {
        match self {
            Symbol::Zero => 0,
            Symbol::Base => 1,
            Symbol::Top(_) => 2,
        }
    }
}

enum Lines {
    None,
    One(Symbol),
    Plane,
}

fn lines_of(symbols: impl Iterator<Item = Symbol>) -> Lines {
    let mut first = None;
    for s in symbols.filter(|&s| s != Symbol::Zero) {
        match first {
            None => first = Some(s),
            Some(x) if x != s => return Lines::Plane,
            _ => {}
        }
    }
    first.map_or(Lines::None, Lines::One)
}

/// The zero vector followed by one non-zero vector per line of the span.
fn line_representatives(field: Field, k: usize, basis: &[CoeffVector]) -> Vec<CoeffVector> {
    let q = field.size();
    let d = basis.len();
    let mut out = vec![CoeffVector::zero(k)];
    let total = (q as u64).pow(d as u32);
    for mut code in 1..total {
        let mut coeffs = Vec::with_capacity(d);
        for _ in 0..d {
            coeffs.push((code % q as u64) as u32);
            code /= q as u64;
        }
        // keep coefficient tuples whose first non-zero entry is 1
        if coeffs.iter().find(|&&c| c != 0) != Some(&1) {
            continue;
        }
        let mut v = CoeffVector::zero(k);
        for (c, b) in coeffs.iter().zip(basis) {
            v = field.axpy(&v, *c, b);
        }
        out.push(v);
    }
    out
}
