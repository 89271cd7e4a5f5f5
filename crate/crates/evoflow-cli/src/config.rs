//! Flag types shared across subcommands, with the parsers for probabilities
//! (decimal or fraction literals like `2/3`), law specs, and intervals.

use evoflow_core::FitnessLaw;
use std::fmt;
use std::path::PathBuf;

/// Exit status contract: 0 success, 2 configuration error, 3 runtime or
/// resource error.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) | CliError::Runtime(msg) => f.write_str(msg),
        }
    }
}

impl std::error::Error for CliError {}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<evoflow_core::Error> for CliError {
    fn from(e: evoflow_core::Error) -> Self {
        match e {
            evoflow_core::Error::EnumerationTooLarge { .. } => CliError::Runtime(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

/// Probability accepted as a decimal (`0.6667`) or a fraction (`2/3`).
pub fn parse_probability(s: &str) -> Result<f64, String> {
    let value = match s.split_once('/') {
        Some((num, den)) => {
            let num: f64 = num.trim().parse().map_err(|_| bad_probability(s))?;
            let den: f64 = den.trim().parse().map_err(|_| bad_probability(s))?;
            num / den
        }
        None => s.trim().parse().map_err(|_| bad_probability(s))?,
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(bad_probability(s))
    }
}

fn bad_probability(s: &str) -> String {
    format!("invalid probability `{s}` (expected a decimal like 0.6667 or a fraction like 2/3)")
}

/// Fitness law spec: `uniform`, `exp:RATE`, or `pareto:ALPHA`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LawSpec(pub FitnessLaw);

impl std::str::FromStr for LawSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let law = match s.split_once(':') {
            None if s == "uniform" => FitnessLaw::uniform(),
            Some(("exp", rate)) => {
                let rate: f64 = rate
                    .parse()
                    .map_err(|_| format!("invalid rate in law spec `{s}`"))?;
                FitnessLaw::exponential(rate).map_err(|e| e.to_string())?
            }
            Some(("pareto", alpha)) => {
                let alpha: f64 = alpha
                    .parse()
                    .map_err(|_| format!("invalid alpha in law spec `{s}`"))?;
                FitnessLaw::pareto(alpha).map_err(|e| e.to_string())?
            }
            _ => {
                return Err(format!(
                    "invalid law spec `{s}` (expected uniform | exp:RATE | pareto:ALPHA)"
                ))
            }
        };
        Ok(LawSpec(law))
    }
}

impl fmt::Display for LawSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.label())
    }
}

/// Open interval `A,B`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub a: f64,
    pub b: f64,
}

impl std::str::FromStr for Interval {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || format!("invalid interval `{s}` (expected A,B with A <= B)");
        let (a, b) = s.split_once(',').ok_or_else(bad)?;
        let a: f64 = a.trim().parse().map_err(|_| bad())?;
        let b: f64 = b.trim().parse().map_err(|_| bad())?;
        if a.is_nan() || b.is_nan() || a > b {
            return Err(bad());
        }
        Ok(Interval { a, b })
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.a, self.b)
    }
}

/// Push `--flag value` pairs for an optional path.
pub fn push_path_flag(args: &mut Vec<String>, flag: &str, path: &Option<PathBuf>) {
    if let Some(p) = path {
        args.push(flag.to_string());
        args.push(p.display().to_string());
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn probabilities_parse_both_forms() {
        assert_eq!(parse_probability("0.25").unwrap(), 0.25);
        assert_eq!(parse_probability("2/3").unwrap(), 2.0 / 3.0);
        assert_eq!(parse_probability(" 3 / 4 ").unwrap(), 0.75);
        assert!(parse_probability("x").is_err());
        assert!(parse_probability("1/0").is_err());
    }

    #[test]
    fn law_specs_round_trip() {
        for s in ["uniform", "exp:1", "exp:2.5", "pareto:1.5"] {
            let law: LawSpec = s.parse().unwrap();
            assert_eq!(law.to_string(), s);
            assert_eq!(law.to_string().parse::<LawSpec>().unwrap(), law);
        }
        assert!("exp".parse::<LawSpec>().is_err());
        assert!("exp:-1".parse::<LawSpec>().is_err());
        assert!("normal:1".parse::<LawSpec>().is_err());
    }

    #[test]
    fn intervals_parse() {
        let i: Interval = "0.6,0.8".parse().unwrap();
        assert_eq!((i.a, i.b), (0.6, 0.8));
        assert!("0.8,0.6".parse::<Interval>().is_err());
        assert!("0.8".parse::<Interval>().is_err());
    }
}
