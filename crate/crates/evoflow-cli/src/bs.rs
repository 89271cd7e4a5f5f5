use crate::config::{push_path_flag, CliError, LawSpec};
use crate::output::{to_json, write_file, Csv};
use crate::svg;
use clap::Args;
use evoflow_core::baksneppen::{threshold_estimate, Ring};
use evoflow_core::Histogram;
use serde::Serialize;
use std::path::PathBuf;

#[derive(Args, Debug, Clone, PartialEq)]
pub struct BsArgs {
    /// Ring size (at least 3)
    #[arg(long)]
    pub sites: usize,
    /// Total updates
    #[arg(long)]
    pub steps: u64,
    /// Updates discarded before sampling starts
    #[arg(long, default_value_t = 0)]
    pub burn_in: u64,
    /// Record the full ring every this many post-burn-in updates
    #[arg(long, default_value_t = 1000)]
    pub sample_every: u64,
    /// Fitness law: uniform | exp:RATE | pareto:ALPHA
    #[arg(long, default_value = "uniform")]
    pub law: LawSpec,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Bins for the sample histogram outputs
    #[arg(long, default_value_t = 20)]
    pub hist_bins: usize,
    /// Lower edge of the histogram range
    #[arg(long, default_value_t = 0.0)]
    pub hist_lo: f64,
    /// Upper edge of the histogram range
    #[arg(long, default_value_t = 1.0)]
    pub hist_hi: f64,
    /// Samples CSV path: update,site,fitness
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// JSON summary path (stdout when omitted)
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// SVG histogram path
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

impl BsArgs {
    pub fn to_args(&self) -> Vec<String> {
        let mut args = vec![
            "bs".to_string(),
            "--sites".into(),
            self.sites.to_string(),
            "--steps".into(),
            self.steps.to_string(),
            "--burn-in".into(),
            self.burn_in.to_string(),
            "--sample-every".into(),
            self.sample_every.to_string(),
            "--law".into(),
            self.law.to_string(),
            "--seed".into(),
            self.seed.to_string(),
            "--hist-bins".into(),
            self.hist_bins.to_string(),
            "--hist-lo".into(),
            self.hist_lo.to_string(),
            "--hist-hi".into(),
            self.hist_hi.to_string(),
        ];
        push_path_flag(&mut args, "--csv", &self.csv);
        push_path_flag(&mut args, "--json", &self.json);
        push_path_flag(&mut args, "--svg", &self.svg);
        args
    }
}

#[derive(Serialize)]
struct BsSummary {
    sites: usize,
    updates: u64,
    burn_in: u64,
    sample_every: u64,
    law: String,
    seed: u64,
    samples: usize,
    /// Moment-inversion threshold estimate (2*mean - 1); null when fewer
    /// than 1000 samples were recorded.
    f_star_moment: Option<f64>,
    /// 1% sample quantile, the cross-checking estimator.
    f_star_quantile: Option<f64>,
}

pub fn run(args: &BsArgs) -> Result<(), CliError> {
    if args.steps < args.burn_in || args.sample_every == 0 {
        return Err(CliError::Config(format!(
            "invalid sampling plan: steps ({}) must be >= burn-in ({}) and sample-every ({}) >= 1",
            args.steps, args.burn_in, args.sample_every
        )));
    }
    let mut ring = Ring::new(args.sites, args.law.0, args.seed)?;

    let mut samples_csv = args.csv.as_ref().map(|_| Csv::new("update,site,fitness"));
    let mut pooled = Vec::new();
    for u in 1..=args.steps {
        ring.step();
        if u > args.burn_in && (u - args.burn_in).is_multiple_of(args.sample_every) {
            pooled.extend_from_slice(ring.fitness());
            if let Some(csv) = &mut samples_csv {
                for (site, f) in ring.fitness().iter().enumerate() {
                    csv.row(&[&u, &site, f]);
                }
            }
        }
    }

    let estimate = threshold_estimate(&pooled).ok();
    let summary = BsSummary {
        sites: args.sites,
        updates: args.steps,
        burn_in: args.burn_in,
        sample_every: args.sample_every,
        law: args.law.to_string(),
        seed: args.seed,
        samples: pooled.len(),
        f_star_moment: estimate.map(|e| e.moment),
        f_star_quantile: estimate.map(|e| e.lower_quantile),
    };

    if let (Some(path), Some(csv)) = (&args.csv, samples_csv) {
        write_file(path, csv.into_string().as_bytes())?;
    }
    if let Some(path) = &args.svg {
        let mut hist = Histogram::new(args.hist_bins, args.hist_lo, args.hist_hi)
            .map_err(|e| CliError::Config(e.to_string()))?;
        for &v in &pooled {
            hist.record(v);
        }
        let title = format!("ring fitnesses ({} sites, {} updates)", args.sites, args.steps);
        write_file(
            path,
            svg::histogram_svg(&hist, &title, summary.f_star_moment).as_bytes(),
        )?;
    }
    match &args.json {
        Some(path) => write_file(path, to_json(&summary)?.as_bytes())?,
        None => print!("{}", to_json(&summary)?),
    }
    Ok(())
}
