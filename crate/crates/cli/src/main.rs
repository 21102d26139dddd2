//! `tmss`: run work-function experiments, build extensions and check the
//! guarantees on concrete instances.

mod error;
mod experiment;
mod extend;
mod output;
mod run;
mod taxi;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use tmss_core::homogenize::Family;
use tmss_core::instance::parse_rational;
use tmss_core::Rational;

use crate::error::CliError;

#[derive(Parser, Debug)]
#[command(name = "tmss", version, about = "Metrical service systems with transformations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Algo {
    Wfa,
    Greedy,
}

impl Algo {
    pub fn name(self) -> &'static str {
        match self {
            Algo::Wfa => "wfa",
            Algo::Greedy => "greedy",
        }
    }

    pub fn build(self) -> Box<dyn tmss_core::wfa::OnlineAlgorithm> {
        match self {
            Algo::Wfa => Box::new(tmss_core::wfa::Wfa),
            Algo::Greedy => Box::new(tmss_core::wfa::Greedy),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PotentialArg {
    None,
    Sum,
    Swap,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ExperimentName {
    LipschitzLb,
    SwapLb,
    SuperlinearWfa,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    All,
    Swaps,
    Translations,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::All => Family::All,
            FamilyArg::Swaps => Family::Swaps,
            FamilyArg::Translations => Family::Translations,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum InstanceKind {
    Mss,
    Ktaxi,
}

fn rational_arg(s: &str) -> Result<Rational, String> {
    parse_rational(s)
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse and check an instance file.
    Validate {
        instance: PathBuf,
        #[arg(long, value_enum, default_value_t = InstanceKind::Mss)]
        kind: InstanceKind,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Serve an instance's requests with an online algorithm.
    Run(run::RunArgs),
    /// Serve α-Lipschitz requests through the ultrametric distortion and its
    /// symmetric-tree extension.
    Pipeline(run::PipelineArgs),
    /// Build an extension of a metric and certify that the chosen family of
    /// partial isometries extends to automorphisms.
    Extend(extend::ExtendArgs),
    /// Play a lower-bound adversary.
    Experiment(experiment::ExperimentArgs),
    /// Serve taxi rides on a weighted tree.
    Ktaxi(taxi::KtaxiArgs),
    /// Embed a metric into a random dominating tree.
    Embed(taxi::EmbedArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result: Result<(), CliError> = match cli.command {
        Command::Validate { instance, kind, out } => run::validate(&instance, kind, out.as_deref()),
        Command::Run(a) => run::run(&a),
        Command::Pipeline(a) => run::pipeline(&a),
        Command::Extend(a) => extend::extend(&a),
        Command::Experiment(a) => experiment::experiment(&a),
        Command::Ktaxi(a) => taxi::ktaxi(&a),
        Command::Embed(a) => taxi::embed(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
