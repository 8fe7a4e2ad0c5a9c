//! Random instances, scoring, and head-to-head runs of the three-layer
//! heuristic against the randomized baseline.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::code::{Demand, PerformanceFunction};
use crate::dag::{Dag, NodeId};
use crate::error::{Error, Result};
use crate::gf::Field;
use crate::mincut::kim_mincut_code;
use crate::two_max::{guarantee_audit, run_2max_with_field};

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub node_count: usize,
    /// Arcs per node.
    pub density: f64,
    pub receiver_prob: f64,
    pub trials: usize,
    pub seed: u64,
    /// Field for both codes; defaults to the smallest prime above the node count.
    pub field: Option<u32>,
    /// Random draws kept by the baseline.
    pub retries: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self { node_count: 551, density: 4.0, receiver_prob: 0.1, trials: 10, seed: 1, field: None, retries: 5 }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.node_count < 2 {
            return Err(Error::PreconditionViolated("at least two nodes are needed".into()));
        }
        if !(self.receiver_prob > 0.0 && self.receiver_prob <= 1.0) {
            return Err(Error::PreconditionViolated(format!("receiver probability {} outside (0, 1]", self.receiver_prob)));
        }
        if !(self.density.is_finite() && self.density > 0.0) {
            return Err(Error::PreconditionViolated(format!("density {} is not positive", self.density)));
        }
        if self.retries == 0 {
            return Err(Error::PreconditionViolated("retries must be positive".into()));
        }
        Ok(())
    }

    pub fn field_for(&self, node_count: usize) -> Result<Field> {
        match self.field {
            Some(q) => Field::new(q),
            None => Ok(Field::smallest_above(node_count)),
        }
    }
}

/// Random acyclic graph with source 0 and `round(n · density)` arcs, at
/// least `n - 1` and at most one per node pair.
///
/// Node labels other than the source are placed in a random order; each node
/// first gets an arc from a random earlier node, then uniformly random
/// forward pairs are added until the target is reached.
pub fn gen_random_dag(config: &ExperimentConfig) -> Result<Dag> {
    config.validate()?;
    let n = config.node_count;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<NodeId> = (1..n).collect();
    order.shuffle(&mut rng);
    order.insert(0, 0);
    let target = ((n as f64 * config.density).round() as usize).clamp(n - 1, n * (n - 1) / 2);
    let mut seen = HashSet::new();
    let mut arcs = Vec::with_capacity(target);
    for j in 1..n {
        let i = rng.gen_range(0..j);
        seen.insert((i, j));
        arcs.push((order[i], order[j]));
    }
    while arcs.len() < target {
        let (x, y) = (rng.gen_range(0..n), rng.gen_range(0..n));
        let (i, j) = (x.min(y), x.max(y));
        if i != j && seen.insert((i, j)) {
            arcs.push((order[i], order[j]));
        }
    }
    Dag::new(n, 0, &arcs)
}

/// Picks every non-source node as a receiver with probability
/// `receiver_prob` and puts it in a uniform tier among `1..=min(3, λ)`.
pub fn sample_demand(dag: &Dag, receiver_prob: f64, seed: u64) -> Result<Demand> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut demand = Demand::new(3);
    for v in dag.nodes().filter(|&v| v != dag.source()) {
        if rng.gen_bool(receiver_prob.clamp(0.0, 1.0)) {
            let top = dag.lambda(v, 3)?;
            if top > 0 {
                demand.set(v, rng.gen_range(1..=top))?;
            }
        }
    }
    Ok(demand)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreReport {
    /// Two-layer receivers decoding both layers.
    pub r2_2: usize,
    /// Three-layer receivers decoding exactly two layers.
    pub r2_3: usize,
    /// Three-layer receivers decoding all three layers.
    pub r3_3: usize,
    pub score: f64,
    /// (receiver, requested layers, decoded layers)
    pub per_receiver: Vec<(NodeId, usize, usize)>,
}

/// Scores decoded layers above the base layer: 2 per satisfied two-layer
/// receiver, 1.8 or 2.7 per three-layer receiver decoding two or three.
pub fn score(demand: &Demand, performances: &PerformanceFunction) -> Result<ScoreReport> {
    let mut report = ScoreReport { r2_2: 0, r2_3: 0, r3_3: 0, score: 0.0, per_receiver: Vec::new() };
    for (v, level) in demand.iter() {
        let p = *performances.0.get(v).ok_or(Error::MissingPerformance(v))?;
        report.per_receiver.push((v, level, p));
        match (level, p) {
            (2, p) if p >= 2 => report.r2_2 += 1,
            (3, 2) => report.r2_3 += 1,
            (3, p) if p >= 3 => report.r3_3 += 1,
            _ => {}
        }
    }
    report.score = 2.0 * report.r2_2 as f64 + 1.8 * report.r2_3 as f64 + 2.7 * report.r3_3 as f64;
    Ok(report)
}

/// Receivers per (requested tier, decoded layers), both indexed from 0.
pub type Histogram = [[usize; 4]; 4];

pub fn histogram(report: &ScoreReport) -> Histogram {
    let mut h = [[0; 4]; 4];
    for &(_, level, p) in &report.per_receiver {
        h[level.min(3)][p.min(3)] += 1;
    }
    h
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub seed: u64,
    pub nodes: usize,
    pub arcs: usize,
    pub tiers: [usize; 3],
    pub two_max: ScoreReport,
    pub mincut: ScoreReport,
}

impl TrialResult {
    pub fn receivers(&self) -> usize {
        self.tiers.iter().sum()
    }
}

fn at_least(report: &ScoreReport, layers: usize) -> usize {
    report.per_receiver.iter().filter(|r| r.2 >= layers).count()
}

/// Runs both methods on the instance generated from `seed`.
///
/// Fails if the heuristic's plan does not pass its guarantee audit.
pub fn run_trial(config: &ExperimentConfig, seed: u64) -> Result<TrialResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (dag_seed, demand_seed, baseline_seed) = (rng.gen(), rng.gen(), rng.gen());
    let dag = gen_random_dag(&ExperimentConfig { seed: dag_seed, ..config.clone() })?;
    let demand = sample_demand(&dag, config.receiver_prob, demand_seed)?;
    let field = config.field_for(dag.node_count())?;

    let plan = run_2max_with_field(&dag, &demand, field)?;
    let audit = guarantee_audit(&dag, &demand, &plan);
    if !audit.passed() {
        return Err(Error::Infeasible(format!("guarantee audit failed for seed {seed}: {audit:?}")));
    }
    let two_max = score(&demand, &plan.code.performances(&dag))?;
    let baseline = kim_mincut_code(&dag, &demand, field, baseline_seed, config.retries)?;
    let mincut = score(&demand, &baseline.performances(&dag))?;
    Ok(TrialResult {
        seed,
        nodes: dag.node_count(),
        arcs: dag.arc_count(),
        tiers: [1, 2, 3].map(|i| demand.tier(i).len()),
        two_max,
        mincut,
    })
}

/// Per-trial seeds derived from the master seed.
pub fn trial_seeds(config: &ExperimentConfig) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    (0..config.trials).map(|_| rng.gen()).collect()
}

/// Runs all trials in parallel, in trial order.
pub fn run_trials(config: &ExperimentConfig) -> Result<Vec<TrialResult>> {
    config.validate()?;
    trial_seeds(config).into_par_iter().map(|s| run_trial(config, s)).collect()
}

pub const CSV_COLUMNS: &[&str] = &[
    "trial",
    "seed",
    "nodes",
    "arcs",
    "receivers",
    "t1",
    "t2",
    "t3",
    "retries",
    "score_2max",
    "score_mincut",
    "two_plus_2max",
    "two_plus_mincut",
    "base_miss_2max",
    "base_miss_mincut",
    "2max_t2_l0",
    "2max_t2_l1",
    "2max_t2_l2",
    "2max_t3_l0",
    "2max_t3_l1",
    "2max_t3_l2",
    "2max_t3_l3",
    "mincut_t2_l0",
    "mincut_t2_l1",
    "mincut_t2_l2",
    "mincut_t3_l0",
    "mincut_t3_l1",
    "mincut_t3_l2",
    "mincut_t3_l3",
];

fn numeric_row(t: &TrialResult, retries: usize) -> Vec<f64> {
    let mut row = vec![t.nodes, t.arcs, t.receivers(), t.tiers[0], t.tiers[1], t.tiers[2], retries]
        .into_iter()
        .map(|x| x as f64)
        .collect::<Vec<_>>();
    row.extend([t.two_max.score, t.mincut.score]);
    for layers in [2, 1] {
        let count = |r: &ScoreReport| if layers == 2 { at_least(r, 2) } else { r.per_receiver.len() - at_least(r, 1) };
        row.extend([count(&t.two_max) as f64, count(&t.mincut) as f64]);
    }
    for report in [&t.two_max, &t.mincut] {
        let h = histogram(report);
        // two-layer receivers that also decode the third layer count as served
        let t2 = [h[2][0], h[2][1], h[2][2] + h[2][3]];
        row.extend(t2.iter().chain(&h[3]).map(|&x| x as f64));
    }
    row
}

fn format_row(values: &[f64], score_cols: (usize, usize)) -> Vec<String> {
    values
        .iter()
        .enumerate()
        .map(|(i, &x)| if i == score_cols.0 || i == score_cols.1 { format!("{x:.1}") } else { format!("{}", x as u64) })
        .collect()
}

/// CSV of one row per trial followed by a row of trial averages.
pub fn to_csv(config: &ExperimentConfig, trials: &[TrialResult]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    // writes into memory cannot fail
    w.write_record(CSV_COLUMNS).expect("in-memory write");
    let rows: Vec<Vec<f64>> = trials.iter().map(|t| numeric_row(t, config.retries)).collect();
    for (i, (t, row)) in trials.iter().zip(&rows).enumerate() {
        let mut record = vec![i.to_string(), t.seed.to_string()];
        record.extend(format_row(row, (7, 8)));
        w.write_record(&record).expect("in-memory write");
    }
    if !rows.is_empty() {
        let mut record = vec!["avg".to_string(), String::new()];
        for col in 0..rows[0].len() {
            let mean = rows.iter().map(|r| r[col]).sum::<f64>() / rows.len() as f64;
            record.push(format!("{mean:.3}"));
        }
        w.write_record(&record).expect("in-memory write");
    }
    let bytes = w.into_inner().expect("in-memory write");
    String::from_utf8(bytes).expect("csv output is utf-8")
}

pub fn compare(config: &ExperimentConfig) -> Result<String> {
    Ok(to_csv(config, &run_trials(config)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dag::NodeSet;

    fn small(seed: u64) -> ExperimentConfig {
        ExperimentConfig { node_count: 30, density: 3.0, receiver_prob: 0.3, trials: 3, seed, field: None, retries: 2 }
    }

    #[test]
    fn two_nodes() {
        let cfg = ExperimentConfig { node_count: 2, density: 1.0, ..small(0) };
        let dag = gen_random_dag(&cfg).unwrap();
        assert_eq!(dag.arc_pairs(), vec![(0, 1)]);
    }

    #[test]
    fn full_scale_arc_count() {
        let dag = gen_random_dag(&ExperimentConfig::default()).unwrap();
        assert_eq!((dag.node_count(), dag.arc_count()), (551, 2204));
        assert_eq!(dag, gen_random_dag(&ExperimentConfig::default()).unwrap());
        assert!(dag.nodes().skip(1).all(|v| !dag.in_arcs(v).is_empty()));
    }

    #[test]
    fn demand_sampling() {
        let dag = gen_random_dag(&ExperimentConfig::default()).unwrap();
        assert!(sample_demand(&dag, 0.0, 3).unwrap().is_empty());
        let d = sample_demand(&dag, 0.1, 3).unwrap();
        assert!((25..=90).contains(&d.receivers().len()));
        assert_eq!(d, sample_demand(&dag, 0.1, 3).unwrap());
        for (v, l) in d.iter() {
            assert!(l <= dag.lambda(v, 3).unwrap());
        }
        let path = Dag::new(3, 0, &[(0, 1), (1, 2)]).unwrap();
        assert!(sample_demand(&path, 1.0, 9).unwrap().iter().all(|(_, l)| l == 1));
    }

    #[test]
    fn scoring() {
        let d = Demand::from_tiers(&[NodeSet::from([1]), NodeSet::from([2]), NodeSet::from([3, 4])]).unwrap();
        let base = score(&d, &PerformanceFunction(vec![3, 1, 1, 1, 1])).unwrap();
        assert_eq!(base.score, 0.0);
        let r = score(&d, &PerformanceFunction(vec![3, 1, 2, 2, 3])).unwrap();
        assert_eq!((r.r2_2, r.r2_3, r.r3_3), (1, 1, 1));
        assert!((r.score - 6.5).abs() < 1e-9);
        assert_eq!(score(&d, &PerformanceFunction(vec![3, 1])), Err(Error::MissingPerformance(2)));
    }

    #[test]
    fn formula_arithmetic() {
        let mut tiers = vec![NodeSet::new(), NodeSet::new(), NodeSet::new()];
        let mut perf = vec![3];
        let mut add = |tier: usize, p: usize| {
            tiers[tier - 1].insert(perf.len());
            perf.push(p);
        };
        (0..10).for_each(|_| add(2, 2));
        (0..5).for_each(|_| add(3, 2));
        (0..4).for_each(|_| add(3, 3));
        let r = score(&Demand::from_tiers(&tiers).unwrap(), &PerformanceFunction(perf)).unwrap();
        assert!((r.score - 39.8).abs() < 1e-9);
    }

    #[test]
    fn single_trial_average_matches() {
        let cfg = ExperimentConfig { trials: 1, ..small(5) };
        let csv = compare(&cfg).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        let data: Vec<&str> = lines[1].split(',').skip(2).collect();
        let avg: Vec<&str> = lines[2].split(',').skip(2).collect();
        for (d, a) in data.iter().zip(&avg) {
            assert!((d.parse::<f64>().unwrap() - a.parse::<f64>().unwrap()).abs() < 1e-9);
        }
        assert_eq!(csv, compare(&cfg).unwrap());
    }

    #[test]
    fn histogram_columns_cover_every_receiver() {
        let cfg = ExperimentConfig { trials: 4, ..small(9) };
        let trials = run_trials(&cfg).unwrap();
        let csv = to_csv(&cfg, &trials);
        for (line, t) in csv.lines().skip(1).zip(&trials) {
            let v: Vec<usize> = line.split(',').skip(15).map(|x| x.parse().unwrap()).collect();
            for offset in [0, 7] {
                assert_eq!(v[offset..offset + 3].iter().sum::<usize>(), t.tiers[1]);
                assert_eq!(v[offset + 3..offset + 7].iter().sum::<usize>(), t.tiers[2]);
            }
        }
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(ExperimentConfig { node_count: 1, ..small(0) }.validate().is_err());
        assert!(ExperimentConfig { receiver_prob: 0.0, ..small(0) }.validate().is_err());
        assert!(ExperimentConfig { retries: 0, ..small(0) }.validate().is_err());
    }
}
