use crate::config::{push_path_flag, CliError, Interval, LawSpec};
use crate::output::{write_file, Csv};
use clap::Args;
use evoflow_core::trackers::density_estimate;
use evoflow_core::{replicate_seed, Chain, ModelParams, TrackerConfig, Trackers};
use std::path::PathBuf;

#[derive(Args, Debug, Clone, PartialEq)]
pub struct SweepArgs {
    /// Lowest birth probability in the grid (must exceed 1/2)
    #[arg(long, value_parser = crate::config::parse_probability)]
    pub p_min: f64,
    /// Highest birth probability in the grid (must stay below 1)
    #[arg(long, value_parser = crate::config::parse_probability)]
    pub p_max: f64,
    /// Grid spacing
    #[arg(long, value_parser = crate::config::parse_probability)]
    pub p_step: f64,
    /// Fitness law: uniform | exp:RATE | pareto:ALPHA
    #[arg(long, default_value = "uniform")]
    pub law: LawSpec,
    /// Steps per run
    #[arg(long)]
    pub steps: u64,
    /// Master seed; row i replicate r derives from (seed, i*replicates + r)
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Independent replicates per grid point
    #[arg(long, default_value_t = 1)]
    pub replicates: u64,
    /// Density interval A,B; repeatable (one output row per p per interval)
    #[arg(long = "interval")]
    pub intervals: Vec<Interval>,
    /// Output CSV path: p,f_c,a,b,estimate,target (stdout when omitted)
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

impl SweepArgs {
    pub fn to_args(&self) -> Vec<String> {
        let mut args = vec![
            "sweep".to_string(),
            "--p-min".into(),
            self.p_min.to_string(),
            "--p-max".into(),
            self.p_max.to_string(),
            "--p-step".into(),
            self.p_step.to_string(),
            "--law".into(),
            self.law.to_string(),
            "--steps".into(),
            self.steps.to_string(),
            "--seed".into(),
            self.seed.to_string(),
            "--replicates".into(),
            self.replicates.to_string(),
        ];
        for i in &self.intervals {
            args.push("--interval".into());
            args.push(i.to_string());
        }
        push_path_flag(&mut args, "--csv", &self.csv);
        args
    }
}

pub fn run(args: &SweepArgs) -> Result<(), CliError> {
    if !(args.p_min > 0.5 && args.p_max < 1.0 && args.p_min <= args.p_max) {
        return Err(CliError::Config(format!(
            "sweep range must satisfy 1/2 < p-min <= p-max < 1, got [{}, {}]",
            args.p_min, args.p_max
        )));
    }
    if args.p_step <= 0.0 || args.p_step.is_nan() {
        return Err(CliError::Config(format!(
            "--p-step must be positive, got {}",
            args.p_step
        )));
    }
    if args.intervals.is_empty() {
        return Err(CliError::Config(
            "sweep needs at least one --interval".to_string(),
        ));
    }
    if args.steps == 0 {
        return Err(CliError::Config("--steps must be at least 1".to_string()));
    }

    let mut grid = Vec::new();
    let mut p = args.p_min;
    while p <= args.p_max + 1e-12 {
        grid.push(p.min(args.p_max));
        p += args.p_step;
    }

    let replicates = args.replicates.max(1);
    let mut csv = Csv::new("p,f_c,a,b,estimate,target");
    for (row, &p) in grid.iter().enumerate() {
        let params = ModelParams::new(p)?;
        let mut counts = vec![0u64; args.intervals.len()];
        let mut targets = vec![0.0f64; args.intervals.len()];
        let mut applies = vec![true; args.intervals.len()];
        for r in 0..replicates {
            let seed = replicate_seed(args.seed, row as u64 * replicates + r);
            let mut chain = Chain::new(params, args.law.0, seed);
            let mut trackers = Trackers::new(TrackerConfig::for_params(&params));
            chain.run(args.steps, &mut trackers);
            for (i, interval) in args.intervals.iter().enumerate() {
                let d = density_estimate(&chain, interval.a, interval.b)?;
                counts[i] += chain.count_in(interval.a, interval.b)?;
                targets[i] = d.target;
                applies[i] &= d.limit_applies;
            }
        }
        for (i, interval) in args.intervals.iter().enumerate() {
            let estimate = counts[i] as f64 / (args.steps * replicates) as f64;
            csv.row(&[
                &p,
                &params.critical_fitness(),
                &interval.a,
                &interval.b,
                &estimate,
                &targets[i],
            ]);
        }
    }

    match &args.csv {
        Some(path) => write_file(path, csv.into_string().as_bytes())?,
        None => print!("{}", csv.into_string()),
    }
    Ok(())
}
