//! Flag-value parsing: exact fractions, comma lists, and strategy arguments
//! that are either an inline pure strategy or `@file` in the strategy text
//! format.

use knockdown::{
    Deviation, DieSpec, Error, MixedStrategy, PureStrategy, Result, Scale, TokenAllocation,
};

/// Parses "1/3" as an exact division and anything else as a decimal.
pub fn number(s: &str) -> Result<f64> {
    let s = s.trim();
    if let Some((num, den)) = s.split_once('/') {
        let num: f64 = num.trim().parse().map_err(|_| bad_number(s))?;
        let den: f64 = den.trim().parse().map_err(|_| bad_number(s))?;
        if den == 0.0 {
            return Err(Error::Parse(format!("zero denominator in '{s}'")));
        }
        return Ok(num / den);
    }
    s.parse().map_err(|_| bad_number(s))
}

fn bad_number(s: &str) -> Error {
    Error::Parse(format!("'{s}' is not a number or fraction"))
}

pub fn number_list(s: &str) -> Result<Vec<f64>> {
    s.split(',').map(number).collect()
}

pub fn count_list(s: &str) -> Result<Vec<u64>> {
    s.split(',')
        .map(|c| {
            c.trim()
                .parse()
                .map_err(|_| Error::Parse(format!("'{c}' is not a token count")))
        })
        .collect()
}

pub fn die(s: &str) -> Result<DieSpec> {
    DieSpec::new(number_list(s)?)
}

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ScaleArg {
    Discrete,
    Continuous,
}

/// Loads a strategy argument: `@path` reads a mixed strategy in the text
/// format, anything else is an inline pure strategy (token counts on the
/// discrete scale, deviation coordinates on the continuous scale).
pub fn strategy(arg: &str, scale: ScaleArg, n: Option<u64>) -> Result<MixedStrategy> {
    if let Some(path) = arg.strip_prefix('@') {
        let text = std::fs::read_to_string(path)?;
        let loaded = MixedStrategy::from_text(&text)?;
        check_scale(&loaded, scale, n)?;
        return Ok(loaded);
    }
    match scale {
        ScaleArg::Discrete => {
            let counts = count_list(arg)?;
            let total: u64 = counts.iter().sum();
            if let Some(n) = n {
                if total != n {
                    return Err(Error::Parse(format!(
                        "allocation {arg} has {total} tokens but --n is {n}"
                    )));
                }
            }
            Ok(MixedStrategy::point_mass(PureStrategy::Tokens(TokenAllocation::new(counts)?)))
        }
        ScaleArg::Continuous => {
            Ok(MixedStrategy::point_mass(PureStrategy::Deviation(Deviation::new(number_list(arg)?)?)))
        }
    }
}

fn check_scale(loaded: &MixedStrategy, scale: ScaleArg, n: Option<u64>) -> Result<()> {
    match (loaded.scale(), scale) {
        (Scale::Discrete { n: have }, ScaleArg::Discrete) => {
            if let Some(want) = n {
                if have != want {
                    return Err(Error::Parse(format!(
                        "strategy file is for n={have}, --n is {want}"
                    )));
                }
            }
            Ok(())
        }
        (Scale::Continuous, ScaleArg::Continuous) => Ok(()),
        _ => Err(Error::Parse("strategy file scale does not match --scale".into())),
    }
}
