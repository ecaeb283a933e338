use std::fmt;
use std::str::FromStr;

/// Optimization direction.
///
/// `Min` problems pay costs and accepted values; `Max` problems collect accepted values
/// and pay costs out of them.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    Min,
    Max,
}

impl Mode {
    /// True when `a` is strictly better than `b` in this direction.
    pub fn better(self, a: f64, b: f64) -> bool {
        match self {
            Mode::Min => a < b,
            Mode::Max => a > b,
        }
    }

    /// The better of two values.
    pub fn pick(self, a: f64, b: f64) -> f64 {
        match self {
            Mode::Min => a.min(b),
            Mode::Max => a.max(b),
        }
    }

    /// Sign applied to action costs when folded into a value: `+1` for `Min`, `-1` for
    /// `Max`.
    pub fn cost_sign(self) -> f64 {
        match self {
            Mode::Min => 1.0,
            Mode::Max => -1.0,
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Min => "min",
            Mode::Max => "max",
        })
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "min" => Ok(Mode::Min),
            "max" => Ok(Mode::Max),
            other => Err(format!("unknown mode '{other}', expected 'min' or 'max'")),
        }
    }
}
