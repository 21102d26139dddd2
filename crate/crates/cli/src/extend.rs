use std::path::PathBuf;

use clap::Args;
use serde_json::{json, Value};
use tmss_core::homogenize::{
    build_line_extension, build_swap_extension, build_symmetric_tree_extension, build_torus_extension,
    verify_weak_ultrahomogeneity, ExtendedSpace, ExtensionSpace, Family, Verdict, VerifyOptions,
};
use tmss_core::instance::{instance_to_json, parse_instance};
use tmss_core::{MetricSpace, Rational, UltrametricTree};

use crate::error::CliError;
use crate::output::{read_file, Output, Summary};
use crate::{rational_arg, FamilyArg};

/// Largest extension written out as an instance file.
const MAX_WRITTEN_POINTS: usize = 4096;

#[derive(Args, Debug)]
pub struct ExtendArgs {
    /// Base metric. Required for `swaps` and `all` (which needs an
    /// ultrametric); `translations` builds its grid from --k/--D or --n.
    pub instance: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub family: FamilyArg,
    /// Grid side length for translations.
    #[arg(long)]
    pub k: Option<usize>,
    /// Grid dimension for translations.
    #[arg(long = "D")]
    pub dims: Option<usize>,
    /// Comma-separated coordinate weights (default all 1).
    #[arg(long, value_delimiter = ',', value_parser = rational_arg)]
    pub weights: Vec<Rational>,
    /// Equally spaced points on a line, extended to a circle.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 3)]
    pub max_domain_size: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn labels<E: ExtensionSpace>(e: &E, points: impl IntoIterator<Item = usize>) -> Vec<String> {
    points.into_iter().map(|i| e.point_label(i)).collect()
}

fn report<E: ExtensionSpace>(
    e: &ExtendedSpace<E>,
    family: Family,
    max_domain_size: usize,
    output: &Output,
    params: Value,
) -> Result<(), CliError> {
    let opts = VerifyOptions { max_domain_size, ..VerifyOptions::default() };
    let verdict = verify_weak_ultrahomogeneity(e, family, &opts)?;
    let size = e.size();
    let ext_labels = labels(&e.extension, 0..size);
    if size <= MAX_WRITTEN_POINTS {
        output.write("extension.json", instance_to_json(&e.extension, &ext_labels, None, &[]) + "\n")?;
    }
    let base_label = |p: usize| e.base.label(p).to_string();
    let mut s = Summary::new("extend", None, params);
    s.set("base_points", e.base.len()).set("extension_size", size).set("family", family.to_string());
    let failure = match &verdict {
        Verdict::Certified(c) => {
            let entries: Vec<Value> = c
                .entries
                .iter()
                .map(|en| {
                    json!({
                        "domain": en.domain.iter().map(|&p| base_label(p)).collect::<Vec<_>>(),
                        "image": en.image.iter().map(|&p| base_label(p)).collect::<Vec<_>>(),
                        "automorphism": en.automorphism.iter().map(|&p| ext_labels[p].clone()).collect::<Vec<_>>(),
                    })
                })
                .collect();
            let cert = json!({
                "family": family.to_string(),
                "embedding": (0..e.base.len()).map(|p| json!([base_label(p), ext_labels[e.embedding[p]]])).collect::<Vec<_>>(),
                "checked": c.checked,
                "entries": entries,
            });
            output.write("certificate.json", serde_json::to_string_pretty(&cert).expect("serializable") + "\n")?;
            s.set("checked", c.checked).set("certified", true);
            None
        }
        Verdict::Counterexample(iso) => {
            let dom: Vec<String> = iso.domain.iter().map(|&p| base_label(p)).collect();
            let img: Vec<String> = iso.image.iter().map(|&p| base_label(p)).collect();
            s.set("certified", false).set("counterexample", json!({ "domain": dom, "image": img }));
            Some(CliError::Invariant(format!("partial isometry {dom:?} -> {img:?} has no extending automorphism")))
        }
    };
    let mismatch = e.embedding_mismatch();
    s.set("embedding_isometric", mismatch.is_none());
    output.finish(&s)?;
    if let Some((x, y)) = mismatch {
        return Err(CliError::Invariant(format!(
            "embedding changes the distance between {} and {}",
            base_label(x),
            base_label(y)
        )));
    }
    failure.map_or(Ok(()), Err)
}

pub fn extend(a: &ExtendArgs) -> Result<(), CliError> {
    let output = Output::new(a.out.as_deref())?;
    let family: Family = a.family.into();
    let mut params = json!({ "family": family.to_string(), "max_domain_size": a.max_domain_size });
    match family {
        Family::Swaps | Family::All => {
            let path = a
                .instance
                .as_ref()
                .ok_or_else(|| CliError::Validation(format!("--family {family} needs an instance file")))?;
            params["instance"] = json!(path.display().to_string());
            let m = parse_instance(&read_file(path)?)?.metric;
            if family == Family::Swaps {
                report(&build_swap_extension(&m)?, family, a.max_domain_size, &output, params)
            } else {
                let tree = UltrametricTree::from_metric(&m)?;
                report(&build_symmetric_tree_extension(&tree)?, family, a.max_domain_size, &output, params)
            }
        }
        Family::Translations => match (a.k, a.dims, a.n) {
            (Some(k), Some(dims), None) => {
                let weights =
                    if a.weights.is_empty() { vec![Rational::from_integer(1); dims] } else { a.weights.clone() };
                params["k"] = json!(k);
                params["D"] = json!(dims);
                params["weights"] = json!(weights.iter().map(|w| w.to_string()).collect::<Vec<_>>());
                report(&build_torus_extension(k, dims, &weights)?, family, a.max_domain_size, &output, params)
            }
            (None, None, Some(n)) => {
                params["n"] = json!(n);
                report(&build_line_extension(n)?, family, a.max_domain_size, &output, params)
            }
            _ => Err(CliError::Validation("--family translations needs either --k and --D, or --n".into())),
        },
    }
}
