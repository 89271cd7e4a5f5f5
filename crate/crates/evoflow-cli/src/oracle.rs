use crate::config::{push_path_flag, CliError};
use crate::output::{write_file, Csv};
use clap::{Args, Subcommand};
use evoflow_core::oracles;
use evoflow_core::ModelParams;
use std::path::PathBuf;

#[derive(Args, Debug, Clone, PartialEq)]
pub struct OracleArgs {
    #[command(subcommand)]
    pub which: OracleKind,
}

/// Exact reference distributions, emitted as `k,probability` CSV rows.
#[derive(Subcommand, Debug, Clone, PartialEq)]
pub enum OracleKind {
    /// Distribution of the below-critical species count after n steps
    Lpmf {
        /// Birth probability (decimal or fraction); must exceed 1/2
        #[arg(long, value_parser = crate::config::parse_probability)]
        p: f64,
        /// Step count
        #[arg(long)]
        n: u64,
        /// State-space cap (defaults to n, which is lossless)
        #[arg(long)]
        cap: Option<u64>,
        /// Output CSV path (stdout when omitted)
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Survival of the symmetric-walk hitting time of 0 from 1: rows k = 0..=n
    Srw {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Binomial pmf rows; a single row with --k, otherwise k = 0..=n
    Binomial {
        #[arg(long)]
        n: u64,
        #[arg(long, value_parser = crate::config::parse_probability)]
        p: f64,
        #[arg(long)]
        k: Option<u64>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

impl OracleArgs {
    pub fn to_args(&self) -> Vec<String> {
        let mut args = vec!["oracle".to_string()];
        match &self.which {
            OracleKind::Lpmf { p, n, cap, csv } => {
                args.extend(["lpmf".into(), "--p".into(), p.to_string(), "--n".into(), n.to_string()]);
                if let Some(cap) = cap {
                    args.push("--cap".into());
                    args.push(cap.to_string());
                }
                push_path_flag(&mut args, "--csv", csv);
            }
            OracleKind::Srw { n, csv } => {
                args.extend(["srw".into(), "--n".into(), n.to_string()]);
                push_path_flag(&mut args, "--csv", csv);
            }
            OracleKind::Binomial { n, p, k, csv } => {
                args.extend(["binomial".into(), "--n".into(), n.to_string(), "--p".into(), p.to_string()]);
                if let Some(k) = k {
                    args.push("--k".into());
                    args.push(k.to_string());
                }
                push_path_flag(&mut args, "--csv", csv);
            }
        }
        args
    }
}

pub fn run(args: &OracleArgs) -> Result<(), CliError> {
    let mut csv = Csv::new("k,probability");
    let path = match &args.which {
        OracleKind::Lpmf { p, n, cap, csv: path } => {
            let params = ModelParams::new(*p)?;
            let pmf = oracles::exact_l_pmf(&params, *n, cap.unwrap_or(*n))?;
            for (i, prob) in pmf.probs.iter().enumerate() {
                csv.row(&[&(pmf.offset + i as i64), prob]);
            }
            path
        }
        OracleKind::Srw { n, csv: path } => {
            for k in 0..=*n {
                csv.row(&[&k, &oracles::srw_survival(k)]);
            }
            path
        }
        OracleKind::Binomial { n, p, k, csv: path } => {
            match k {
                Some(k) => csv.row(&[k, &oracles::binomial_pmf(*n, *p, *k)?]),
                None => {
                    for k in 0..=*n {
                        csv.row(&[&k, &oracles::binomial_pmf(*n, *p, k)?]);
                    }
                }
            }
            path
        }
    };
    match path {
        Some(path) => write_file(path, csv.into_string().as_bytes())?,
        None => print!("{}", csv.into_string()),
    }
    Ok(())
}
