use std::path::PathBuf;
use std::thread;

use clap::Args;
use serde_json::{json, Value};
use tmss_core::adversaries::{
    lipschitz_lb_adversary, summarize_rounds, superlinear_adversary, swap_lb_adversary, RoundSummary,
};
use tmss_core::wfa::{fmt_float, simulate, AdaptiveAdversary, RunReport, SimOptions};
use tmss_core::{FiniteMetric, MetricSpace, Rational};

use crate::error::CliError;
use crate::output::{float, Output, Summary, Table};
use crate::{rational_arg, Algo, ExperimentName};

#[derive(Args, Debug)]
pub struct ExperimentArgs {
    #[arg(long, value_enum)]
    pub name: ExperimentName,
    #[arg(long, value_enum, default_value_t = Algo::Wfa)]
    pub algo: Algo,
    /// Number of points (lipschitz-lb: default 4, swap-lb: default 5).
    #[arg(long)]
    pub n: Option<usize>,
    /// Lipschitz bound (lipschitz-lb: default 2) or integer scale factor
    /// (superlinear-wfa: default 20).
    #[arg(long, value_parser = rational_arg)]
    pub alpha: Option<Rational>,
    /// Depth of the recursive space for superlinear-wfa.
    #[arg(long, default_value_t = 2)]
    pub h: u32,
    #[arg(long, default_value_t = 100)]
    pub rounds: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Independent seeds `seed, seed+1, …` run in parallel and merged in
    /// seed order.
    #[arg(long, default_value_t = 1)]
    pub seeds: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl ExperimentArgs {
    fn alpha(&self) -> Rational {
        self.alpha.unwrap_or_else(|| match self.name {
            ExperimentName::SuperlinearWfa => Rational::from_integer(20),
            _ => Rational::from_integer(2),
        })
    }
}

struct SeedRun {
    seed: u64,
    metric: FiniteMetric,
    report: RunReport,
    predicted: f64,
    /// Per-round extra column.
    notes: Vec<String>,
    deviations: usize,
}

fn play(metric: &FiniteMetric, adversary: &mut dyn AdaptiveAdversary, algo: Algo) -> Result<RunReport, CliError> {
    let mut a = algo.build();
    Ok(simulate(metric, 0, adversary, a.as_mut(), &SimOptions::default())?)
}

fn run_seed(a: &ExperimentArgs, seed: u64) -> Result<SeedRun, CliError> {
    match a.name {
        ExperimentName::LipschitzLb => {
            let mut lb = lipschitz_lb_adversary(a.n.unwrap_or(4), a.alpha(), seed, a.rounds)?;
            let report = play(&lb.metric, &mut lb.adversary, a.algo)?;
            let notes = (0..report.round_ends.len())
                .map(|r| if lb.adversary.drew_far_end(r) { "far" } else { "near" }.to_string())
                .collect();
            Ok(SeedRun { seed, metric: lb.metric, report, predicted: lb.predicted, notes, deviations: 0 })
        }
        ExperimentName::SwapLb => {
            let mut lb = swap_lb_adversary(a.n.unwrap_or(5), a.rounds)?;
            let report = play(&lb.metric, &mut lb.adversary, a.algo)?;
            let notes = vec![String::new(); report.round_ends.len()];
            Ok(SeedRun { seed, metric: lb.metric, report, predicted: lb.predicted, notes, deviations: 0 })
        }
        ExperimentName::SuperlinearWfa => {
            let alpha = a.alpha();
            if !alpha.is_integer() {
                return Err(CliError::Validation(format!("superlinear-wfa needs an integer alpha, got {alpha}")));
            }
            let alpha = alpha.to_integer();
            let mut lb = superlinear_adversary(a.h, alpha, a.rounds)?;
            let report = play(&lb.metric, &mut lb.adversary, a.algo)?;
            let deviations = lb.adversary.deviations().len();
            let mut notes = vec![0usize; report.round_ends.len()];
            let ends = report.round_ends.clone();
            for d in lb.adversary.deviations() {
                let r = ends.iter().position(|&e| d.step <= e).unwrap_or(notes.len().saturating_sub(1));
                if let Some(c) = notes.get_mut(r) {
                    *c += 1;
                }
            }
            let notes = notes.into_iter().map(|c| c.to_string()).collect();
            Ok(SeedRun { seed, metric: lb.metric, report, predicted: lb.predicted, notes, deviations })
        }
    }
}

fn note_column(name: ExperimentName) -> &'static str {
    match name {
        ExperimentName::LipschitzLb => "final_request",
        ExperimentName::SwapLb => "note",
        ExperimentName::SuperlinearWfa => "deviations",
    }
}

pub fn experiment(a: &ExperimentArgs) -> Result<(), CliError> {
    if a.seeds == 0 {
        return Err(CliError::Validation("--seeds must be at least 1".into()));
    }
    let output = Output::new(a.out.as_deref())?;
    let seeds: Vec<u64> = (0..a.seeds).map(|i| a.seed.wrapping_add(i)).collect();
    let results: Vec<Result<SeedRun, CliError>> = thread::scope(|scope| {
        let handles: Vec<_> = seeds.iter().map(|&s| scope.spawn(move || run_seed(a, s))).collect();
        handles.into_iter().map(|h| h.join().expect("experiment worker panicked")).collect()
    });
    let runs = results.into_iter().collect::<Result<Vec<_>, _>>()?;

    let mut table = Table::new(&["seed", "round", "online_cost", "offline_cost", note_column(a.name)]);
    let (mut online, mut offline) = (Vec::new(), Vec::new());
    let (mut total_on, mut total_off) = (0i64, 0i64);
    for run in &runs {
        let scale = run.metric.scale() as f64;
        let on = run.report.round_online_costs();
        let off = run.report.round_offline_costs();
        for (r, (&c_on, &c_off)) in on.iter().zip(&off).enumerate() {
            let (x, y) = (c_on as f64 / scale, c_off as f64 / scale);
            table.row([
                run.seed.to_string(),
                (r + 1).to_string(),
                fmt_float(x),
                fmt_float(y),
                run.notes.get(r).cloned().unwrap_or_default(),
            ]);
            online.push(x);
            offline.push(y);
        }
        total_on += run.report.online_cost;
        total_off += run.report.offline_cost;
    }
    output.write("rounds.csv", table.into_bytes())?;

    let first = &runs[0];
    let stats: RoundSummary = summarize_rounds(&online, &offline);
    let params = parameters(a, first.metric.len());
    let mut s = Summary::new("experiment", Some(a.seed), params);
    s.costs(total_on, total_off, first.metric.scale(), tmss_core::wfa::ratio_of(total_on, total_off))
        .set("rounds", a.rounds)
        .set("seeds", a.seeds)
        .set("points", first.metric.len())
        .set("mean_online_cost", float(stats.mean_online))
        .set("mean_offline_cost", float(stats.mean_offline))
        .set("round_ratio", float(stats.ratio))
        .set("ratio_half_width", float(stats.ratio_half_width))
        .set(
            "predicted",
            match a.name {
                ExperimentName::SuperlinearWfa => json!({ "online_cost_per_round": float(first.predicted) }),
                _ => json!({ "ratio": float(first.predicted) }),
            },
        );
    if a.name == ExperimentName::SuperlinearWfa {
        s.set("deviations", runs.iter().map(|r| r.deviations).sum::<usize>());
    }
    output.finish(&s)
}

fn parameters(a: &ExperimentArgs, points: usize) -> Value {
    let name = match a.name {
        ExperimentName::LipschitzLb => "lipschitz-lb",
        ExperimentName::SwapLb => "swap-lb",
        ExperimentName::SuperlinearWfa => "superlinear-wfa",
    };
    let mut p = json!({ "name": name, "algo": a.algo.name(), "rounds": a.rounds, "seeds": a.seeds });
    match a.name {
        ExperimentName::LipschitzLb => {
            p["n"] = json!(points);
            p["alpha"] = json!(a.alpha().to_string());
        }
        ExperimentName::SwapLb => p["n"] = json!(points),
        ExperimentName::SuperlinearWfa => {
            p["h"] = json!(a.h);
            p["alpha"] = json!(a.alpha().to_string());
        }
    }
    p
}
