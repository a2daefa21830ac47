use std::fmt;
use std::str::FromStr;

use anyhow::{bail, Context};
use qgeom::operator::random_density;
use qgeom::{DensityOperator, Seed};

/// Initial-state specification: `maximally-mixed`, `pure:k` (computational basis state `k`)
/// or `random:seed` (Hilbert–Schmidt random state).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateSpec {
    MaximallyMixed,
    Pure(usize),
    Random(u64),
}

impl StateSpec {
    pub fn build(self, dim: usize) -> anyhow::Result<DensityOperator> {
        let rho = match self {
            StateSpec::MaximallyMixed => DensityOperator::maximally_mixed(dim)?,
            StateSpec::Pure(k) => DensityOperator::basis_state(dim, k)?,
            StateSpec::Random(seed) => random_density(dim, Seed(seed))?,
        };
        Ok(rho)
    }
}

impl FromStr for StateSpec {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> anyhow::Result<Self> {
        let s = s.trim();
        if s == "maximally-mixed" {
            return Ok(StateSpec::MaximallyMixed);
        }
        if let Some(k) = s.strip_prefix("pure:") {
            let k = k.parse().with_context(|| format!("invalid basis index in state '{s}'"))?;
            return Ok(StateSpec::Pure(k));
        }
        if let Some(seed) = s.strip_prefix("random:") {
            let seed = seed.parse().with_context(|| format!("invalid seed in state '{s}'"))?;
            return Ok(StateSpec::Random(seed));
        }
        bail!("unknown state '{s}': expected maximally-mixed, pure:<k> or random:<seed>")
    }
}

impl fmt::Display for StateSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateSpec::MaximallyMixed => write!(f, "maximally-mixed"),
            StateSpec::Pure(k) => write!(f, "pure:{k}"),
            StateSpec::Random(s) => write!(f, "random:{s}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_displays() {
        for text in ["maximally-mixed", "pure:0", "pure:3", "random:7"] {
            let spec: StateSpec = text.parse().unwrap();
            assert_eq!(spec.to_string(), text);
        }
        assert!("pure:x".parse::<StateSpec>().is_err());
        assert!("mixed".parse::<StateSpec>().is_err());
        assert!(StateSpec::Pure(2).build(2).is_err());
    }
}
