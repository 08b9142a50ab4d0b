use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Starting-point schemes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitScheme {
    Zeros,
    Ones,
    /// Standard normal entries.
    Normal,
    /// Standard normal direction scaled to unit norm.
    NormalizedNormal,
    /// Standard normal entries times `c`.
    ScaledNormal(f64),
}

impl InitScheme {
    pub fn generate(self, dim: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut normal = |c: f64| -> Vec<f64> {
            (0..dim).map(|_| c * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng)).collect()
        };
        match self {
            Self::Zeros => vec![0.0; dim],
            Self::Ones => vec![1.0; dim],
            Self::Normal => normal(1.0),
            Self::ScaledNormal(c) => normal(c),
            Self::NormalizedNormal => {
                let mut v = normal(1.0);
                let n = crate::linalg::norm(&v);
                if n > 0.0 {
                    crate::linalg::scale(1.0 / n, &mut v);
                }
                v
            }
        }
    }
}

impl FromStr for InitScheme {
    type Err = Error;

    /// `zeros`, `ones`, `normal`, `normalized` (or `normalized_normal`),
    /// `scaled:C` (or `scaled_normal:C`).
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidConfig(format!("unknown init scheme `{s}`"));
        match s {
            "zeros" => Ok(Self::Zeros),
            "ones" => Ok(Self::Ones),
            "normal" => Ok(Self::Normal),
            "normalized" | "normalized_normal" => Ok(Self::NormalizedNormal),
            _ => {
                let (head, c) = s.split_once(':').ok_or_else(bad)?;
                if head != "scaled" && head != "scaled_normal" {
                    return Err(bad());
                }
                let c: f64 = c.parse().map_err(|_| bad())?;
                if !c.is_finite() {
                    return Err(bad());
                }
                Ok(Self::ScaledNormal(c))
            }
        }
    }
}

impl fmt::Display for InitScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Zeros => f.write_str("zeros"),
            Self::Ones => f.write_str("ones"),
            Self::Normal => f.write_str("normal"),
            Self::NormalizedNormal => f.write_str("normalized"),
            Self::ScaledNormal(c) => write!(f, "scaled:{c}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_generate() {
        assert_eq!("scaled:0.25".parse::<InitScheme>().unwrap(), InitScheme::ScaledNormal(0.25));
        assert!("scaled:x".parse::<InitScheme>().is_err());
        assert!("uniform".parse::<InitScheme>().is_err());
        let v = InitScheme::NormalizedNormal.generate(50, 3);
        assert!((crate::linalg::norm(&v) - 1.0).abs() < 1e-14);
        let a = InitScheme::Normal.generate(10, 1);
        let b = InitScheme::ScaledNormal(0.25).generate(10, 1);
        assert!(a.iter().zip(&b).all(|(x, y)| (0.25 * x - y).abs() < 1e-15));
        assert_eq!(InitScheme::Zeros.generate(3, 0), vec![0.0; 3]);
        for s in ["zeros", "ones", "normal", "normalized", "scaled:0.25"] {
            assert_eq!(s.parse::<InitScheme>().unwrap().to_string(), s);
        }
    }
}
