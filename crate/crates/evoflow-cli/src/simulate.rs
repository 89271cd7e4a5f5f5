use crate::config::{push_path_flag, CliError, Interval, LawSpec};
use crate::output::{to_json, write_file, Csv};
use crate::svg;
use clap::Args;
use evoflow_core::trackers::{density_estimate, excursion_summary, tail_bound_check};
use evoflow_core::{replicate_seed, Chain, ModelParams, TrackerConfig, Trackers};
use serde::Serialize;
use std::path::PathBuf;

#[derive(Args, Debug, Clone, PartialEq)]
pub struct SimulateArgs {
    /// Birth probability (decimal or fraction, e.g. 2/3)
    #[arg(long, value_parser = crate::config::parse_probability)]
    pub p: f64,
    /// Fitness law: uniform | exp:RATE | pareto:ALPHA
    #[arg(long, default_value = "uniform")]
    pub law: LawSpec,
    /// Steps per replicate
    #[arg(long)]
    pub steps: u64,
    /// Master seed; replicate i runs with a seed derived from (seed, i)
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Independent replicate count
    #[arg(long, default_value_t = 1)]
    pub replicates: u64,
    /// Timeseries cadence in steps (0 = steps/100)
    #[arg(long, default_value_t = 0)]
    pub report_every: u64,
    /// Density interval A,B; repeatable
    #[arg(long = "interval")]
    pub intervals: Vec<Interval>,
    /// Bins for the fitness histogram outputs
    #[arg(long, default_value_t = 20)]
    pub hist_bins: usize,
    /// Lower edge of the histogram range
    #[arg(long, default_value_t = 0.0)]
    pub hist_lo: f64,
    /// Upper edge of the histogram range
    #[arg(long, default_value_t = 1.0)]
    pub hist_hi: f64,
    /// Exponent offset for the empty-steps tail check
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
    /// Timeseries CSV path (replicate 0): n,pop_size,l_size,t_n,k_n,N_n
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Histogram CSV path: bin_lo,bin_hi,count,density
    #[arg(long)]
    pub hist_csv: Option<PathBuf>,
    /// JSON summary path
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// SVG histogram path
    #[arg(long)]
    pub svg: Option<PathBuf>,
    /// Event-log CSV path (replicate 0): n,event_type,fitness
    #[arg(long)]
    pub event_log: Option<PathBuf>,
}

impl SimulateArgs {
    /// Canonical flag form; parsing it back yields an equal config.
    pub fn to_args(&self) -> Vec<String> {
        let mut args = vec![
            "simulate".to_string(),
            "--p".into(),
            self.p.to_string(),
            "--law".into(),
            self.law.to_string(),
            "--steps".into(),
            self.steps.to_string(),
            "--seed".into(),
            self.seed.to_string(),
            "--replicates".into(),
            self.replicates.to_string(),
            "--report-every".into(),
            self.report_every.to_string(),
            "--hist-bins".into(),
            self.hist_bins.to_string(),
            "--hist-lo".into(),
            self.hist_lo.to_string(),
            "--hist-hi".into(),
            self.hist_hi.to_string(),
            "--eps".into(),
            self.eps.to_string(),
        ];
        for i in &self.intervals {
            args.push("--interval".into());
            args.push(i.to_string());
        }
        push_path_flag(&mut args, "--csv", &self.csv);
        push_path_flag(&mut args, "--hist-csv", &self.hist_csv);
        push_path_flag(&mut args, "--json", &self.json);
        push_path_flag(&mut args, "--svg", &self.svg);
        push_path_flag(&mut args, "--event-log", &self.event_log);
        args
    }
}

#[derive(Serialize)]
pub struct Summary {
    pub p: f64,
    pub law: String,
    pub f_c: f64,
    pub v_c: Option<f64>,
    pub steps: u64,
    pub seed: u64,
    pub replicates: u64,
    pub pop_size: u64,
    pub births: u64,
    pub null_deaths: u64,
    pub t_n: u64,
    pub k_n: u64,
    pub tail_check: Option<TailCheckSummary>,
    pub densities: Vec<DensitySummary>,
    pub excursions: Option<ExcursionsSummary>,
    pub ks_above_vc: Option<f64>,
}

#[derive(Serialize)]
pub struct TailCheckSummary {
    pub eps: f64,
    pub threshold: f64,
    pub pass: bool,
    /// Worst (largest) margin across replicates.
    pub margin: f64,
}

#[derive(Serialize)]
pub struct DensitySummary {
    pub a: f64,
    pub b: f64,
    pub estimate: f64,
    pub target: f64,
    pub limit_applies: bool,
}

#[derive(Serialize)]
pub struct ExcursionsSummary {
    pub count: u64,
    #[serde(rename = "mean_G")]
    pub mean_gap: Option<f64>,
    #[serde(rename = "mean_E")]
    pub mean_excursion: Option<f64>,
}

struct ReplicateResult {
    trackers: Trackers,
    pop_size: u64,
    interval_counts: Vec<u64>,
    survivors_above_vc: Vec<f64>,
    tail_margin: Option<(bool, f64)>,
    densities: Vec<(f64, f64, bool)>,
}

struct ReplicateOutput {
    result: ReplicateResult,
    histogram: evoflow_core::Histogram,
    /// Replicate 0 only.
    timeseries: Option<Csv>,
    /// Replicate 0 only.
    events: Option<Csv>,
}

/// Fill every slot with `f(index)`, splitting the indices across `workers`
/// scoped threads in contiguous chunks. Slot order is index order, so the
/// caller's merge sequence is independent of scheduling.
fn scatter<T: Send>(slots: &mut [Option<T>], workers: usize, f: impl Fn(usize) -> T + Sync) {
    if workers <= 1 || slots.len() <= 1 {
        for (i, slot) in slots.iter_mut().enumerate() {
            *slot = Some(f(i));
        }
        return;
    }
    let per = slots.len().div_ceil(workers);
    std::thread::scope(|scope| {
        for (w, chunk) in slots.chunks_mut(per).enumerate() {
            let f = &f;
            scope.spawn(move || {
                for (i, slot) in chunk.iter_mut().enumerate() {
                    *slot = Some(f(w * per + i));
                }
            });
        }
    });
}

#[allow(clippy::too_many_arguments)]
fn run_replicate(
    r: u64,
    args: &SimulateArgs,
    params: &ModelParams,
    law: evoflow_core::FitnessLaw,
    tracker_config: &TrackerConfig,
    intervals: &[(f64, f64)],
    report_every: u64,
) -> ReplicateOutput {
    let mut chain = Chain::new(*params, law, replicate_seed(args.seed, r));
    let mut trackers = Trackers::new(tracker_config.clone());
    let first = r == 0;
    let mut timeseries =
        (first && args.csv.is_some()).then(|| Csv::new("n,pop_size,l_size,t_n,k_n,N_n"));
    let mut events =
        (first && args.event_log.is_some()).then(|| Csv::new("n,event_type,fitness"));

    chain.run_with(args.steps, &mut trackers, |chain, trackers, event| {
        if let Some(log) = &mut events {
            match event.fitness() {
                Some(f) => log.raw_line(&format!("{},{},{}", chain.n(), event.tag(), f)),
                None => log.raw_line(&format!("{},{},", chain.n(), event.tag())),
            }
        }
        if chain.n() % report_every == 0 || chain.n() == args.steps {
            check_count_bracket(chain, trackers, intervals);
            if let Some(csv) = &mut timeseries {
                csv.row(&[
                    &chain.n(),
                    &chain.size(),
                    &chain.l_size().unwrap_or(0),
                    &trackers.empty_steps(),
                    &trackers.empty_returns(),
                    &trackers.births(),
                ]);
            }
        }
    });

    let mut histogram = evoflow_core::Histogram::new(args.hist_bins, args.hist_lo, args.hist_hi)
        .expect("histogram config validated");
    for v in chain.population().iter() {
        histogram.record(v);
    }
    let result = ReplicateResult {
        pop_size: chain.size(),
        interval_counts: intervals
            .iter()
            .map(|&(a, b)| chain.count_in(a, b).expect("intervals validated"))
            .collect(),
        survivors_above_vc: match chain.critical_value() {
            Some(vc) => chain.population().iter().filter(|&v| v > vc).collect(),
            None => Vec::new(),
        },
        tail_margin: params
            .is_supercritical()
            .then(|| tail_bound_check(&trackers, params, args.eps).expect("eps validated"))
            .map(|c| (c.pass, c.margin)),
        densities: if args.steps > 0 {
            intervals
                .iter()
                .map(|&(a, b)| {
                    let d = density_estimate(&chain, a, b).expect("intervals validated");
                    (d.estimate, d.target, d.limit_applies)
                })
                .collect()
        } else {
            intervals
                .iter()
                .map(|&(a, b)| (0.0, params.p() * (law.cdf(b) - law.cdf(a)), false))
                .collect()
        },
        trackers,
    };
    ReplicateOutput {
        result,
        histogram,
        timeseries,
        events,
    }
}

pub fn run(args: &SimulateArgs) -> Result<(), CliError> {
    let params = ModelParams::new(args.p)?;
    let law = args.law.0;
    let intervals: Vec<(f64, f64)> = args.intervals.iter().map(|i| (i.a, i.b)).collect();
    if !(args.eps > 0.0 && args.eps.is_finite()) {
        return Err(CliError::Config(format!(
            "--eps must be positive, got {}",
            args.eps
        )));
    }
    if args.hist_bins == 0 || args.hist_lo >= args.hist_hi || args.hist_lo.is_nan() {
        return Err(CliError::Config(format!(
            "invalid histogram range: {} bins over [{}, {})",
            args.hist_bins, args.hist_lo, args.hist_hi
        )));
    }
    let report_every = if args.report_every == 0 {
        (args.steps / 100).max(1)
    } else {
        args.report_every
    };

    let tracker_config = TrackerConfig::for_params(&params).with_intervals(intervals.clone());
    let replicates = args.replicates.max(1);

    // Replicates are independent chains and run on worker threads when the
    // host has them; results are merged in replicate order afterwards, so
    // the outputs never depend on scheduling.
    let workers = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
        .min(replicates as usize);
    let mut slots: Vec<Option<ReplicateOutput>> = Vec::new();
    slots.resize_with(replicates as usize, || None);
    scatter(&mut slots, workers, |r| {
        run_replicate(r as u64, args, &params, law, &tracker_config, &intervals, report_every)
    });

    let mut merged = Trackers::new(tracker_config.clone());
    let mut results: Vec<ReplicateResult> = Vec::new();
    let mut timeseries = None;
    let mut events = None;
    let mut pooled_hist = evoflow_core::Histogram::new(args.hist_bins, args.hist_lo, args.hist_hi)
        .map_err(|e| CliError::Config(e.to_string()))?;
    for (r, slot) in slots.into_iter().enumerate() {
        let out = slot.expect("every replicate ran");
        merged = merged.merge(out.result.trackers.clone())?;
        pooled_hist.merge(&out.histogram)?;
        results.push(out.result);
        if r == 0 {
            timeseries = out.timeseries;
            events = out.events;
        }
    }

    let summary = build_summary(args, &params, law, &merged, &results);

    if let (Some(path), Some(csv)) = (&args.csv, timeseries) {
        write_file(path, csv.into_string().as_bytes())?;
    }
    if let (Some(path), Some(log)) = (&args.event_log, events) {
        write_file(path, log.into_string().as_bytes())?;
    }
    if let Some(path) = &args.hist_csv {
        let mut csv = Csv::new("bin_lo,bin_hi,count,density");
        let total = pooled_hist.total().max(1) as f64;
        for (i, &count) in pooled_hist.counts().iter().enumerate() {
            let (lo, hi) = pooled_hist.bin_edges(i);
            let density = count as f64 / total / (hi - lo);
            csv.row(&[&lo, &hi, &count, &density]);
        }
        write_file(path, csv.into_string().as_bytes())?;
    }
    if let Some(path) = &args.svg {
        let title = format!(
            "living fitnesses after {} steps (p = {}, {})",
            args.steps, args.p, summary.law
        );
        let marker = summary.v_c;
        write_file(path, svg::histogram_svg(&pooled_hist, &title, marker).as_bytes())?;
    }
    if let Some(path) = &args.json {
        write_file(path, to_json(&summary)?.as_bytes())?;
    } else {
        print!("{}", to_json(&summary)?);
    }
    Ok(())
}

/// The per-run count bracket is an exact identity, not a statistical one:
/// for any interval above the critical value, births into it minus the
/// empty-set step count can never exceed the living count, which in turn
/// can never exceed the births. A violation is a simulator bug.
fn check_count_bracket(chain: &Chain, trackers: &Trackers, intervals: &[(f64, f64)]) {
    let Some(vc) = chain.critical_value() else {
        return;
    };
    for (i, &(a, b)) in intervals.iter().enumerate() {
        if a < vc {
            continue;
        }
        let count = chain.count_in(a, b).expect("intervals validated");
        let births = trackers.births_in(i);
        assert!(
            births.saturating_sub(trackers.empty_steps()) <= count && count <= births,
            "count bracket violated at step {}: births_in={} t_n={} count={}",
            chain.n(),
            births,
            trackers.empty_steps(),
            count,
        );
    }
}

fn build_summary(
    args: &SimulateArgs,
    params: &ModelParams,
    law: evoflow_core::FitnessLaw,
    merged: &Trackers,
    results: &[ReplicateResult],
) -> Summary {
    let replicates = args.replicates.max(1);
    let total_steps = args.steps * replicates;
    let pop_size: u64 = results.iter().map(|r| r.pop_size).sum();

    let densities = args
        .intervals
        .iter()
        .enumerate()
        .map(|(i, interval)| {
            let total_count: u64 = results.iter().map(|r| r.interval_counts[i]).sum();
            let estimate = if total_steps > 0 {
                total_count as f64 / total_steps as f64
            } else {
                0.0
            };
            DensitySummary {
                a: interval.a,
                b: interval.b,
                estimate,
                target: params.p() * (law.cdf(interval.b) - law.cdf(interval.a)),
                limit_applies: results
                    .first()
                    .map(|r| r.densities.get(i).map(|d| d.2).unwrap_or(false))
                    .unwrap_or(false),
            }
        })
        .collect();

    let tail_check = if params.is_supercritical() {
        let threshold = 2.0 / (params.p() * params.critical_fitness())
            * (args.steps as f64).powf(0.5 + args.eps);
        let mut pass = true;
        let mut margin = 0.0f64;
        for r in results {
            if let Some((p, m)) = r.tail_margin {
                pass &= p;
                margin = margin.max(m);
            }
        }
        Some(TailCheckSummary {
            eps: args.eps,
            threshold,
            pass,
            margin,
        })
    } else {
        None
    };

    let excursions = if params.is_supercritical() {
        let s = excursion_summary(merged);
        Some(ExcursionsSummary {
            count: s.count,
            mean_gap: s.mean_gap,
            mean_excursion: s.mean_excursion,
        })
    } else {
        None
    };

    let v_c = params
        .is_supercritical()
        .then(|| law.quantile(params.critical_fitness()));
    let ks_above_vc = v_c.and_then(|vc| {
        let mut pooled: Vec<f64> = results
            .iter()
            .flat_map(|r| r.survivors_above_vc.iter().copied())
            .collect();
        if pooled.is_empty() {
            return None;
        }
        let tail = 1.0 - law.cdf(vc);
        Some(evoflow_core::stats::ks_statistic(&mut pooled, |x| {
            ((law.cdf(x) - law.cdf(vc)) / tail).clamp(0.0, 1.0)
        }))
    });

    Summary {
        p: params.p(),
        law: law.label(),
        f_c: params.critical_fitness(),
        v_c,
        steps: args.steps,
        seed: args.seed,
        replicates,
        pop_size,
        births: merged.births(),
        null_deaths: merged.null_deaths(),
        t_n: merged.empty_steps(),
        k_n: merged.empty_returns(),
        tail_check,
        densities,
        excursions,
        ks_above_vc,
    }
}
