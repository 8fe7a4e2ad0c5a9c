//! Randomized baseline: every arc carries a random combination of what its
//! tail hears, restricted to the layers its head can hope to decode.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bench::score;
use crate::code::{Demand, NetworkCode};
use crate::dag::Dag;
use crate::error::{Error, Result};
use crate::gf::{CoeffVector, Field, Subspace};

/// Height cap per node: `min(k, λ(s, v))`.
pub fn mincut_heights(dag: &Dag, k: usize) -> Result<Vec<usize>> {
    dag.nodes()
        .into_par_iter()
        .map(|v| if v == dag.source() { Ok(k) } else { dag.lambda(v, k) })
        .collect()
}

fn draw(dag: &Dag, k: usize, caps: &[usize], field: Field, rng: &mut ChaCha8Rng) -> Vec<CoeffVector> {
    let mut code = vec![CoeffVector::zero(k); dag.arc_count()];
    for &u in dag.topological_order() {
        let span = if u == dag.source() {
            Subspace::span(field, k, &(1..=k).map(|i| CoeffVector::unit(k, i)).collect::<Vec<_>>())
        } else {
            Subspace::span(field, k, dag.in_arcs(u).iter().map(|&a| &code[a]))
        };
        for &a in dag.out_arcs(u) {
            let mut c = CoeffVector::zero(k);
            for b in span.below_height(caps[dag.arc(a).head]) {
                c = field.axpy(&c, rng.gen_range(0..field.size()), &b);
            }
            code[a] = c;
        }
    }
    code
}

/// Best of `retries` random draws by score, then by the number of receivers
/// decoding the base layer. Draw seeds are derived from `seed`.
pub fn kim_mincut_code(dag: &Dag, demand: &Demand, field: Field, seed: u64, retries: usize) -> Result<NetworkCode> {
    if retries == 0 {
        return Err(Error::PreconditionViolated("at least one draw is needed".into()));
    }
    let k = demand.layers();
    let caps = mincut_heights(dag, k)?;
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    let seeds: Vec<u64> = (0..retries).map(|_| master.gen()).collect();
    let receivers = demand.receivers();
    let draws: Vec<(f64, usize, NetworkCode)> = seeds
        .par_iter()
        .map(|&s| {
            let code = NetworkCode::new(dag, field, k, draw(dag, k, &caps, field, &mut ChaCha8Rng::seed_from_u64(s)))?;
            let p = code.performances(dag);
            let base = receivers.iter().filter(|&&t| p.get(t) >= 1).count();
            Ok((score(demand, &p)?.score, base, code))
        })
        .collect::<Result<_>>()?;
    let mut best = 0;
    for (i, d) in draws.iter().enumerate() {
        if (d.0, d.1) > (draws[best].0, draws[best].1) {
            best = i;
        }
    }
    Ok(draws.into_iter().nth(best).expect("at least one draw").2)
}
