use std::path::{Path, PathBuf};

use clap::Args;
use serde_json::json;
use tmss_core::adversaries::lipschitz_lb_adversary;
use tmss_core::homogenize::torus_size;
use tmss_core::instance::{parse_instance, parse_ktaxi_instance};
use tmss_core::lipschitz::{
    build_ultrametric_distortion, composed_ratio_bound, distortion_bound, run_lipschitz_pipeline, run_pipeline,
};
use tmss_core::ultrametric::find_ultrametric_violation;
use tmss_core::wfa::{check_potential_run, clique_sum, fmt_float, simulate_sequence, Potential, RunReport, SimOptions};
use tmss_core::{FiniteMetric, MetricSpace, Rational, TransformKind};

use crate::error::CliError;
use crate::output::{cost, exact, float, read_file, Output, Summary, Table};
use crate::{rational_arg, Algo, InstanceKind, PotentialArg};

#[derive(Args, Debug)]
pub struct RunArgs {
    pub instance: PathBuf,
    #[arg(long, value_enum, default_value_t = Algo::Wfa)]
    pub algo: Algo,
    /// Replay the run and check the potential-function inequalities.
    #[arg(long, value_enum, default_value_t = PotentialArg::None)]
    pub potential: PotentialArg,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct PipelineArgs {
    /// Instance to serve; without one the randomized lower-bound adversary
    /// plays against the pipeline.
    pub instance: Option<PathBuf>,
    #[arg(long, value_parser = rational_arg, default_value = "2")]
    pub alpha: Rational,
    #[arg(long, default_value_t = 4)]
    pub n: usize,
    #[arg(long, default_value_t = 1000)]
    pub rounds: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn kind_name(k: &TransformKind) -> &'static str {
    match k {
        TransformKind::Identity => "identity",
        TransformKind::Swap => "swap",
        TransformKind::Isometry => "isometry",
        TransformKind::Lipschitz { .. } => "lipschitz",
    }
}

fn scaled_float(v: i64, scale: i64) -> String {
    fmt_float(v as f64 / scale as f64)
}

pub fn validate(path: &Path, kind: InstanceKind, out: Option<&Path>) -> Result<(), CliError> {
    let text = read_file(path)?;
    let output = Output::new(out)?;
    let params = json!({ "instance": path.display().to_string(), "kind": format!("{kind:?}").to_lowercase() });
    let mut s = Summary::new("validate", None, params);
    match kind {
        InstanceKind::Mss => {
            let inst = parse_instance(&text)?;
            let m = &inst.metric;
            let mut counts = json!({ "identity": 0, "swap": 0, "isometry": 0, "lipschitz": 0 });
            let mut max_alpha = Rational::from_integer(0);
            for t in &inst.requests {
                let k = kind_name(t.kind());
                counts[k] = json!(counts[k].as_u64().unwrap_or(0) + 1);
                max_alpha = max_alpha.max(t.alpha());
            }
            s.set("points", m.len())
                .set("requests", inst.requests.len())
                .set("initial", m.label(inst.initial))
                .set("diameter", exact(m.diameter(), m.scale()))
                .set("ultrametric", find_ultrametric_violation(m).is_none())
                .set("request_kinds", counts)
                .set("max_alpha", max_alpha.to_string());
        }
        InstanceKind::Ktaxi => {
            let inst = parse_ktaxi_instance(&text)?;
            let size = torus_size(inst.k, inst.tree.len() - 1);
            s.set("vertices", inst.tree.len())
                .set("leaves", inst.tree.leaves().len())
                .set("k", inst.k)
                .set("requests", inst.requests.len())
                .set("torus_size", size.to_string());
        }
    }
    output.finish(&s)
}

fn steps_table(m: &FiniteMetric, rep: &RunReport) -> Table {
    let mut t = Table::new(&["t", "a_t", "b_t", "step_cost", "min_work"]);
    for r in &rep.steps {
        t.row([
            r.t.to_string(),
            m.label(r.a).to_string(),
            m.label(r.b).to_string(),
            scaled_float(r.cost, rep.scale),
            scaled_float(r.min_work, rep.scale),
        ]);
    }
    t
}

pub fn run(a: &RunArgs) -> Result<(), CliError> {
    let inst = parse_instance(&read_file(&a.instance)?)?;
    let output = Output::new(a.out.as_deref())?;
    let m = &inst.metric;
    let n = m.len();
    if a.potential == PotentialArg::Swap {
        if n < 2 {
            return Err(CliError::Validation("the swap potential needs at least two points".into()));
        }
        if let Some(i) =
            inst.requests.iter().position(|t| !matches!(t.kind(), TransformKind::Identity | TransformKind::Swap))
        {
            return Err(CliError::Validation(format!(
                "requests[{i}]: the swap potential applies to identity and swap requests only"
            )));
        }
    }
    let opts = if a.potential == PotentialArg::None { SimOptions::default() } else { SimOptions::recording() };
    let mut algo = a.algo.build();
    let rep = simulate_sequence(m, inst.initial, &inst.requests, algo.as_mut(), &opts)?;
    output.write("steps.csv", steps_table(m, &rep).into_bytes())?;

    let params = json!({
        "instance": a.instance.display().to_string(),
        "algo": a.algo.name(),
        "potential": format!("{:?}", a.potential).to_lowercase(),
    });
    let mut s = Summary::new("run", None, params);
    s.costs(rep.online_cost, rep.offline_cost, rep.scale, rep.ratio)
        .set("rounds", rep.steps.len())
        .set("points", n)
        .set("initial", m.label(inst.initial));

    let mut failure = None;
    if a.potential != PotentialArg::None {
        let trace = rep.trace.as_ref().expect("recorded");
        let (potential, rho, additive, enforced): (_, i64, i64, &[u8]) = match a.potential {
            PotentialArg::Sum => (Potential::Sum, n as i64, (n as i64 - 1) * m.diameter(), &[1, 3]),
            _ => (Potential::Swap, 2 * n as i64 - 2, clique_sum(m, &(0..n).collect::<Vec<_>>()), &[1, 2, 3]),
        };
        let pot = check_potential_run(m, trace, potential, rho, additive)?;
        let count = |i: u8| pot.violations_of(i).count();
        s.set(
            "potential",
            json!({
                "rho": rho,
                "additive": cost(additive, m.scale()),
                "phi_final": cost(pot.phi_post.last().copied().unwrap_or(pot.phi_initial), m.scale()),
                "violations": { "1": count(1), "2": count(2), "3": count(3) },
            }),
        );
        if let Some(v) = pot.violations.iter().find(|v| enforced.contains(&v.inequality)) {
            failure = Some(CliError::Invariant(format!(
                "potential inequality ({}) fails at step {}: {} > {}",
                v.inequality, v.step, v.lhs, v.rhs
            )));
        }
    }
    output.finish(&s)?;
    failure.map_or(Ok(()), Err)
}

pub fn pipeline(a: &PipelineArgs) -> Result<(), CliError> {
    let output = Output::new(a.out.as_deref())?;
    let (metric, rep, rounds, params, seed) = match &a.instance {
        Some(path) => {
            let inst = parse_instance(&read_file(path)?)?;
            let rep = run_lipschitz_pipeline(&inst.metric, inst.initial, &inst.requests, a.alpha)?;
            let rounds = rep.run.steps.len();
            let params = json!({ "instance": path.display().to_string(), "alpha": a.alpha.to_string() });
            (inst.metric, rep, rounds, params, None)
        }
        None => {
            let mut lb = lipschitz_lb_adversary(a.n, a.alpha, a.seed, a.rounds)?;
            let rep = run_pipeline(&lb.metric, 0, &mut lb.adversary, a.alpha, &SimOptions::default())?;
            let rounds = rep.run.round_ends.len();
            let params = json!({
                "adversary": "lipschitz-lb",
                "n": a.n,
                "alpha": a.alpha.to_string(),
                "rounds": a.rounds,
            });
            (lb.metric, rep, rounds, params, Some(a.seed))
        }
    };
    let n = metric.len();
    let scale = metric.scale();
    let hat = build_ultrametric_distortion(&metric, a.alpha)?.partition;

    let mut t = Table::new(&["t", "a_t", "b_t", "step_cost_d", "step_cost_hat", "min_work_d"]);
    let mut pos = rep.run.start;
    for r in &rep.run.steps {
        t.row([
            r.t.to_string(),
            metric.label(r.a).to_string(),
            metric.label(r.b).to_string(),
            scaled_float(r.cost, scale),
            scaled_float(hat.distorted(pos, r.a), scale),
            scaled_float(r.min_work, scale),
        ]);
        pos = r.b;
    }
    output.write("steps.csv", t.into_bytes())?;

    let mut s = Summary::new("pipeline", seed, params);
    s.costs(rep.run.online_cost, rep.run.offline_cost, scale, rep.run.ratio)
        .set("rounds", rounds)
        .set("points", n)
        .set("hat_online_cost", cost(rep.hat_online_cost, scale))
        .set("hat_offline_cost", cost(rep.hat_offline_cost, scale))
        .set("hat_bound", float(rep.hat_bound() as f64 / scale as f64))
        .set("extension_size", rep.extension_size)
        .set("alpha_used", rep.alpha_used.to_string())
        .set("distortion", rep.distortion.to_string())
        .set("level_count", rep.level_max.len());
    if n >= 2 {
        s.set("distortion_bound", distortion_bound(a.alpha, n).to_string())
            .set("ratio_bound", float(ratio_value(composed_ratio_bound(a.alpha, n))));
    }
    output.finish(&s)?;

    if rep.run.online_cost > rep.hat_online_cost {
        return Err(CliError::Invariant(format!(
            "cost in d ({}) exceeds cost in the distorted metric ({})",
            rep.run.online_cost, rep.hat_online_cost
        )));
    }
    if rep.hat_online_cost as i128 > rep.hat_bound() {
        return Err(CliError::Invariant(format!(
            "cost on the extension ({}) exceeds its guarantee ({})",
            rep.hat_online_cost,
            rep.hat_bound()
        )));
    }
    Ok(())
}

fn ratio_value(r: Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}
