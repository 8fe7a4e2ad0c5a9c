use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use layercast_core::bench::{compare, gen_random_dag, sample_demand, ExperimentConfig};
use layercast_core::distributed::run_protocol;
use layercast_core::format::{parse_instance, write_code, write_instance};
use layercast_core::two_layer::solve_two_layer;
use layercast_core::two_max::{guarantee_audit, run_2max_with_field};
use layercast_core::{Dag, Demand, Field};

#[derive(Parser)]
#[command(name = "layercast", version, about = "Layered network code planning for acyclic networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random instance with a three-layer demand
    Gen {
        #[command(flatten)]
        random: RandomArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Optimal two-layer plan for an instance
    Plan2 {
        instance: PathBuf,
        /// Where to write the code file
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Three-layer plan for an instance
    Plan3 {
        instance: PathBuf,
        #[arg(long)]
        field: Option<u32>,
        /// Where to write the code file
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Connectivities and maximal 1- and 2-set entry arcs as TSV
    Cuts { instance: PathBuf },
    /// Run both three-layer methods on random instances and print CSV
    Compare {
        #[command(flatten)]
        random: RandomArgs,
        #[arg(long, default_value_t = 10)]
        trials: usize,
        #[arg(long)]
        field: Option<u32>,
        /// Random draws kept by the baseline
        #[arg(long, default_value_t = 5)]
        retries: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RandomArgs {
    #[arg(long, default_value_t = 551)]
    nodes: usize,
    /// Arcs per node
    #[arg(long, default_value_t = 4.0)]
    density: f64,
    #[arg(long, default_value_t = 0.1)]
    receiver_prob: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

impl RandomArgs {
    fn config(&self) -> ExperimentConfig {
        ExperimentConfig {
            node_count: self.nodes,
            density: self.density,
            receiver_prob: self.receiver_prob,
            seed: self.seed,
            ..ExperimentConfig::default()
        }
    }
}

fn read_instance(path: &Path) -> Result<(Dag, Demand)> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_instance(&text).with_context(|| format!("parsing {}", path.display()))
}

fn with_layers(demand: &Demand, k: usize) -> Result<Demand> {
    let mut out = Demand::new(k);
    for (v, level) in demand.iter() {
        if level > k {
            bail!("receiver {v} asks for {level} layers, at most {k} supported here");
        }
        out.set(v, level)?;
    }
    Ok(out)
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Gen { random, out } => {
            let config = random.config();
            let dag = gen_random_dag(&config)?;
            let demand = sample_demand(&dag, config.receiver_prob, config.seed)?;
            emit(out.as_deref(), &write_instance(&dag, &demand))?;
        }
        Command::Plan2 { instance, out } => {
            let (dag, demand) = read_instance(&instance)?;
            let demand = with_layers(&demand, 2)?;
            let plan = solve_two_layer(&dag, &demand)?;
            for &t in &plan.t2_kept {
                println!("kept {t}");
            }
            for &t in &plan.t2_demoted {
                println!("demoted {t}");
            }
            for (a, x) in plan.f.0.iter().enumerate() {
                println!("f {a} {x}");
            }
            emit(out.as_deref(), &write_code(&plan.code))?;
        }
        Command::Plan3 { instance, field, out } => {
            let (dag, demand) = read_instance(&instance)?;
            let demand = with_layers(&demand, 3)?;
            let field = match field {
                Some(q) => Field::new(q)?,
                None => Field::smallest_above(dag.node_count()),
            };
            let plan = run_2max_with_field(&dag, &demand, field)?;
            let audit = guarantee_audit(&dag, &demand, &plan);
            if !audit.passed() {
                bail!("plan fails its guarantee audit: {audit:?}");
            }
            let p = plan.performances(&dag);
            for (v, level) in demand.iter() {
                println!("receiver {v} demand {level} layers {}", p.get(v));
            }
            for (a, x) in plan.f.0.iter().enumerate() {
                println!("f {a} {x}");
            }
            emit(out.as_deref(), &write_code(&plan.code))?;
        }
        Command::Cuts { instance } => {
            let (dag, _) = read_instance(&instance)?;
            println!("node\tlambda\tentry_arcs");
            for (v, verdict) in run_protocol(&dag) {
                let mut row = vec![v.to_string(), verdict.lambda_capped.to_string()];
                row.extend(verdict.one_set_entry.map(|a| a.to_string()));
                if let Some((a, b)) = verdict.two_set_entries {
                    row.extend([a.to_string(), b.to_string()]);
                }
                println!("{}", row.join("\t"));
            }
        }
        Command::Compare { random, trials, field, retries, out } => {
            let config = ExperimentConfig { trials, field, retries, ..random.config() };
            emit(out.as_deref(), &compare(&config)?)?;
        }
    }
    Ok(())
}
