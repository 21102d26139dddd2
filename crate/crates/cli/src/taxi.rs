use std::path::PathBuf;

use clap::Args;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use tmss_core::instance::{parse_instance, parse_ktaxi_instance};
use tmss_core::ktaxi::{frt_embed, simulate_ktaxi, TaxiConfig, TreeMetric, FRT_BETA_DENOMINATOR};
use tmss_core::random::{random_taxi_requests, random_tree};
use tmss_core::wfa::fmt_float;
use tmss_core::{MetricSpace, Rational};

use crate::error::CliError;
use crate::output::{float, read_file, Output, Summary, Table};

#[derive(Args, Debug)]
pub struct KtaxiArgs {
    /// Tree instance; without one a random tree and ride list are drawn.
    pub instance: Option<PathBuf>,
    /// Leaves of the random tree.
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    /// Rides in the random instance.
    #[arg(long, default_value_t = 20)]
    pub rounds: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct EmbedArgs {
    pub instance: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn rational_json(r: Rational) -> Value {
    if r.is_integer() {
        json!(r.to_integer())
    } else {
        json!(r.to_string())
    }
}

/// The tree in the `vertices`/`parent`/`weights` layout of taxi instances.
fn tree_json(t: &TreeMetric) -> Value {
    let parent: Vec<Value> = (0..t.len()).map(|v| t.parent(v).map_or(Value::Null, |p| json!(t.label(p)))).collect();
    json!({
        "vertices": t.labels(),
        "parent": parent,
        "weights": (0..t.len()).map(|v| rational_json(t.weight(v))).collect::<Vec<_>>(),
    })
}

pub fn ktaxi(a: &KtaxiArgs) -> Result<(), CliError> {
    let output = Output::new(a.out.as_deref())?;
    let (tree, k, start, requests, params, seed) = match &a.instance {
        Some(path) => {
            let inst = parse_ktaxi_instance(&read_file(path)?)?;
            let params = json!({ "instance": path.display().to_string(), "k": inst.k });
            (inst.tree, inst.k, inst.start, inst.requests, params, None)
        }
        None => {
            if a.n == 0 || a.k == 0 {
                return Err(CliError::Validation("--n and --k must be positive".into()));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
            let tree = random_tree(&mut rng, a.n, 3);
            let leaves = tree.leaves().to_vec();
            let start: Vec<usize> = (0..a.k).map(|_| leaves[rng.gen_range(0..leaves.len())]).collect();
            let start = TaxiConfig::from_leaves(&tree, &start)?;
            let requests = random_taxi_requests(&mut rng, &tree, a.rounds);
            let params = json!({ "leaves": a.n, "k": a.k, "rides": a.rounds });
            (tree, a.k, start, requests, params, Some(a.seed))
        }
    };
    let rep = simulate_ktaxi(&tree, k, &start, &requests)?;
    let scale = rep.scale;
    let mut table = Table::new(&["t", "s", "d", "empty_cost", "before", "served_from", "after"]);
    let mut ride_total = 0i64;
    for (i, &(s, d)) in requests.iter().enumerate() {
        ride_total += tree.scaled_distance(s, d);
        table.row([
            (i + 1).to_string(),
            tree.label(s).to_string(),
            tree.label(d).to_string(),
            fmt_float(rep.run.steps[i].cost as f64 / scale as f64),
            rep.trajectory[i].label(&tree),
            rep.served_from[i].label(&tree),
            rep.trajectory[i + 1].label(&tree),
        ]);
    }
    output.write("steps.csv", table.into_bytes())?;
    output.write("tree.json", serde_json::to_string_pretty(&tree_json(&tree)).expect("serializable") + "\n")?;

    let mut s = Summary::new("ktaxi", seed, params);
    s.costs(rep.run.online_cost, rep.run.offline_cost, scale, rep.run.ratio)
        .set("rounds", requests.len())
        .set("k", k)
        .set("leaves", tree.leaves().len())
        .set("torus_size", rep.torus_size)
        .set("ride_cost", float(ride_total as f64 / scale as f64))
        .set("start", start.label(&tree))
        .set("final", rep.trajectory.last().expect("start is recorded").label(&tree));
    output.finish(&s)?;
    if rep.run.offline_cost != rep.offline_config_cost {
        return Err(CliError::Invariant(format!(
            "offline cost on the torus ({}) differs from the configuration space ({})",
            rep.run.offline_cost, rep.offline_config_cost
        )));
    }
    Ok(())
}

pub fn embed(a: &EmbedArgs) -> Result<(), CliError> {
    let output = Output::new(a.out.as_deref())?;
    let m = parse_instance(&read_file(&a.instance)?)?.metric;
    let e = frt_embed(&m, a.seed);
    let scale = m.scale() as f64;
    let mut table = Table::new(&["p", "q", "d", "d_tree", "stretch"]);
    let mut stretches = Vec::new();
    for p in 0..m.len() {
        for q in p + 1..m.len() {
            let dt = e.tree.scaled_distance(e.leaf_of[p], e.leaf_of[q]);
            let st = dt as f64 / m.dist(p, q) as f64;
            stretches.push(st);
            table.row([
                m.label(p).to_string(),
                m.label(q).to_string(),
                fmt_float(m.dist(p, q) as f64 / scale),
                fmt_float(dt as f64 / scale),
                fmt_float(st),
            ]);
        }
    }
    output.write("stretch.csv", table.into_bytes())?;
    output.write("tree.json", serde_json::to_string_pretty(&tree_json(&e.tree)).expect("serializable") + "\n")?;

    let mean = if stretches.is_empty() { 1.0 } else { stretches.iter().sum::<f64>() / stretches.len() as f64 };
    let max = stretches.iter().copied().fold(1.0, f64::max);
    let beta = (FRT_BETA_DENOMINATOR + e.beta_offset) as f64 / FRT_BETA_DENOMINATOR as f64;
    let non_contracting = e.is_non_contracting(&m);
    let params = json!({ "instance": a.instance.display().to_string() });
    let mut s = Summary::new("embed", Some(a.seed), params);
    s.set("points", m.len())
        .set("tree_vertices", e.tree.len())
        .set("beta", float(beta))
        .set("mean_stretch", float(mean))
        .set("max_stretch", float(max))
        .set("non_contracting", non_contracting);
    output.finish(&s)?;
    if !non_contracting {
        return Err(CliError::Invariant("tree distance below the original distance".into()));
    }
    Ok(())
}
