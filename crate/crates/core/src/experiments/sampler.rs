use std::fmt;
use std::str::FromStr;

use rand::RngCore;

use crate::error::{Error, Result};
use crate::generators::{Generator, GeneratorKind};
use crate::rng::standard_normal;

/// Scalar distributions with closed-form d-means and d-variances under the
/// generators they are paired with.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Sampler {
    /// `N(mean, sd²)`, for generators on ℝ.
    Gaussian { mean: f64, sd: f64 },
    /// `exp(N(mu, sigma²))`, for generators on (0, ∞).
    LogNormal { mu: f64, sigma: f64 },
    /// A point mass, for any generator whose domain contains it.
    Constant(f64),
}

impl Sampler {
    pub fn draw<R: RngCore>(&self, rng: &mut R) -> f64 {
        match *self {
            Sampler::Gaussian { mean, sd } => mean + sd * standard_normal(rng),
            Sampler::LogNormal { mu, sigma } => (mu + sigma * standard_normal(rng)).exp(),
            Sampler::Constant(c) => c,
        }
    }

    fn mismatch(&self, gen: &Generator) -> Error {
        Error::DomainSamplerMismatch {
            sampler: self.to_string(),
            generator: gen.name(),
        }
    }

    /// Errors unless this sampler has closed-form truths under `gen`.
    pub fn check_compatible(&self, gen: &Generator) -> Result<()> {
        let positive = gen.domain().lower.is_finite();
        match *self {
            Sampler::Gaussian { .. } if positive => Err(self.mismatch(gen)),
            Sampler::LogNormal { .. } if !positive => Err(self.mismatch(gen)),
            Sampler::Constant(c) if !gen.domain().contains_guarded(c) => Err(self.mismatch(gen)),
            _ => Ok(()),
        }
    }

    /// `E_d[X] = H(E[h(X)])` in closed form.
    pub fn d_mean(&self, gen: &Generator) -> Result<f64> {
        self.check_compatible(gen)?;
        Ok(match (*self, gen.kind()) {
            (Sampler::Constant(c), _) => c,
            (Sampler::Gaussian { mean, .. }, GeneratorKind::Quadratic) => mean,
            (Sampler::Gaussian { mean, sd }, GeneratorKind::Exp) => mean + 0.25 * sd * sd,
            (Sampler::Gaussian { mean, sd }, GeneratorKind::NegExp) => mean - 0.25 * sd * sd,
            (Sampler::LogNormal { mu, .. }, GeneratorKind::NegLog) => mu.exp(),
            (Sampler::LogNormal { mu, sigma }, GeneratorKind::XLogX) => (mu + 0.25 * sigma * sigma).exp(),
            (Sampler::LogNormal { mu, sigma }, GeneratorKind::Power(p)) => (mu + 0.25 * p * sigma * sigma).exp(),
            _ => return Err(self.mismatch(gen)),
        })
    }

    /// `σ_d²(X) = Var(h(X))` in closed form.
    pub fn d_variance(&self, gen: &Generator) -> Result<f64> {
        self.check_compatible(gen)?;
        // Var(c·e^{aZ}) for Z ~ N(m, s²) is c² e^{2am + a²s²} (e^{a²s²} − 1).
        let lognormal_var = |c: f64, a: f64, m: f64, s: f64| {
            let v = a * a * s * s;
            c * c * (2.0 * a * m + v).exp() * v.exp_m1()
        };
        Ok(match (*self, gen.kind()) {
            (Sampler::Constant(_), _) => 0.0,
            (Sampler::Gaussian { sd, .. }, GeneratorKind::Quadratic) => sd * sd,
            (Sampler::Gaussian { mean, sd }, GeneratorKind::Exp) => lognormal_var(2.0, 0.5, mean, sd),
            (Sampler::Gaussian { mean, sd }, GeneratorKind::NegExp) => lognormal_var(2.0, -0.5, mean, sd),
            (Sampler::LogNormal { sigma, .. }, GeneratorKind::NegLog) => sigma * sigma,
            (Sampler::LogNormal { mu, sigma }, GeneratorKind::XLogX) => lognormal_var(2.0, 0.5, mu, sigma),
            (Sampler::LogNormal { mu, sigma }, GeneratorKind::Power(p)) => {
                lognormal_var(gen.h(1.0), 0.5 * p, mu, sigma)
            }
            _ => return Err(self.mismatch(gen)),
        })
    }

    /// A sampler suited to `gen` with unit scale.
    pub fn default_for(gen: &Generator) -> Sampler {
        if gen.domain().lower.is_finite() {
            Sampler::LogNormal { mu: 0.0, sigma: 1.0 }
        } else {
            Sampler::Gaussian { mean: 0.0, sd: 1.0 }
        }
    }
}

impl fmt::Display for Sampler {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sampler::Gaussian { mean, sd } => write!(f, "gaussian:{mean}:{sd}"),
            Sampler::LogNormal { mu, sigma } => write!(f, "lognormal:{mu}:{sigma}"),
            Sampler::Constant(c) => write!(f, "constant:{c}"),
        }
    }
}

impl FromStr for Sampler {
    type Err = Error;

    /// `gaussian:<mean>:<sd>`, `lognormal:<mu>:<sigma>` or `constant:<c>`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = |reason: &str| Error::InvalidArgument {
            field: "sampler",
            reason: format!("`{s}`: {reason}"),
        };
        let parts: Vec<&str> = s.split(':').collect();
        let nums = parts[1..]
            .iter()
            .map(|p| p.parse::<f64>().map_err(|_| bad("parameters must be numbers")))
            .collect::<Result<Vec<_>>>()?;
        let sampler = match (parts[0], nums.as_slice()) {
            ("gaussian", [mean, sd]) => Sampler::Gaussian { mean: *mean, sd: *sd },
            ("lognormal", [mu, sigma]) => Sampler::LogNormal { mu: *mu, sigma: *sigma },
            ("constant", [c]) => Sampler::Constant(*c),
            _ => {
                return Err(bad(
                    "expected gaussian:<mean>:<sd>, lognormal:<mu>:<sigma> or constant:<c>",
                ))
            }
        };
        match sampler {
            Sampler::Gaussian { sd, .. } | Sampler::LogNormal { sigma: sd, .. } if !(sd > 0.0) => {
                Err(bad("scale must be positive"))
            }
            _ => Ok(sampler),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;

    #[test]
    fn parse_and_display() {
        let s: Sampler = "lognormal:0:1".parse().unwrap();
        assert_eq!(s, Sampler::LogNormal { mu: 0.0, sigma: 1.0 });
        assert_eq!(s.to_string().parse::<Sampler>().unwrap(), s);
        assert!("gaussian:0".parse::<Sampler>().is_err());
        assert!("gaussian:0:-1".parse::<Sampler>().is_err());
        assert!("poisson:3".parse::<Sampler>().is_err());
    }

    #[test]
    fn compatibility() {
        let neglog: Generator = "neglog".parse().unwrap();
        let exp: Generator = "exp".parse().unwrap();
        let g = Sampler::Gaussian { mean: 0.0, sd: 1.0 };
        assert!(matches!(g.d_mean(&neglog), Err(Error::DomainSamplerMismatch { .. })));
        assert!(g.d_mean(&exp).is_ok());
        assert!(Sampler::Constant(-1.0).check_compatible(&neglog).is_err());
    }

    // Closed forms against a large-sample estimate of E[h(X)] and Var(h(X)).
    #[test]
    fn closed_forms_match_sampling() {
        let n = 400_000;
        for gen in Generator::shipped() {
            let sampler = match Sampler::default_for(&gen) {
                Sampler::Gaussian { .. } => Sampler::Gaussian { mean: 0.3, sd: 0.7 },
                _ => Sampler::LogNormal { mu: 0.2, sigma: 0.6 },
            };
            let mut rng = stream_rng(11, 0);
            let hs: Vec<f64> = (0..n).map(|_| gen.h(sampler.draw(&mut rng))).collect();
            let m = hs.iter().sum::<f64>() / n as f64;
            let v = hs.iter().map(|h| (h - m).powi(2)).sum::<f64>() / (n - 1) as f64;
            let truth_mean = gen.h(sampler.d_mean(&gen).unwrap());
            let truth_var = sampler.d_variance(&gen).unwrap();
            assert!(
                (m - truth_mean).abs() < 5.0 * (truth_var / n as f64).sqrt(),
                "{gen}: {m} vs {truth_mean}"
            );
            assert!((v - truth_var).abs() < 0.02 * truth_var, "{gen}: {v} vs {truth_var}");
        }
    }
}
