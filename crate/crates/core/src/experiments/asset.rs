//! Two-day asset price prediction under the logarithmic metric.
//!
//! `S(1) = S(0)e^X`, `S(2) = S(0)e^{X+Y}` with `(X, Y)` bivariate normal.
//! Given `X`, `Y ~ N(m, (1−ρ²)σ₂²)` with `m = μ₂ + ρ(σ₂/σ₁)(X − μ₁)`, so
//! `E_d[S(2) | S(1)] = S(1)e^m` and `E[S(2) | S(1)] = S(1)e^{m + (1−ρ²)σ₂²/2}`.
//! Conditioning on `S(1)` is realised by equal-count quantile bins of `X`.

use crate::error::{Error, Result};
use crate::finite_probability::{FiniteProbSpace, Partition, RandomVector};
use crate::generators::{Generator, GeneratorKind};
use crate::prediction::prediction_error_compare;
use crate::rng::{standard_normal, stream_rng};

use super::ExperimentResult;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssetModel {
    pub s0: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub sigma1: f64,
    pub sigma2: f64,
    pub rho: f64,
}

impl Default for AssetModel {
    fn default() -> Self {
        AssetModel {
            s0: 1.0,
            mu1: 0.0,
            mu2: 0.0,
            sigma1: 1.0,
            sigma2: 1.0,
            rho: 0.5,
        }
    }
}

impl AssetModel {
    pub fn validate(&self) -> Result<()> {
        let bad = |field, reason: &str| {
            Err(Error::InvalidModel {
                field,
                reason: reason.to_string(),
            })
        };
        if !(self.s0 > 0.0 && self.s0.is_finite()) {
            return bad("s0", "must be positive");
        }
        if !(self.sigma1 > 0.0 && self.sigma1.is_finite()) {
            return bad("sigma1", "must be positive");
        }
        if !(self.sigma2 > 0.0 && self.sigma2.is_finite()) {
            return bad("sigma2", "must be positive");
        }
        if !(self.rho.abs() < 1.0) {
            return bad("rho", "must lie strictly inside (-1, 1)");
        }
        if !(self.mu1.is_finite() && self.mu2.is_finite()) {
            return bad("mu", "must be finite");
        }
        Ok(())
    }

    /// Conditional mean `m(x)` of `Y` given `X = x`.
    pub fn conditional_mean(&self, x: f64) -> f64 {
        self.mu2 + self.rho * self.sigma2 / self.sigma1 * (x - self.mu1)
    }

    /// Conditional variance `(1 − ρ²)σ₂²` of `Y` given `X`.
    pub fn conditional_variance(&self) -> f64 {
        (1.0 - self.rho * self.rho) * self.sigma2 * self.sigma2
    }

    /// `S(1)e^m`.
    pub fn d_predictor(&self, x: f64) -> f64 {
        self.s0 * (x + self.conditional_mean(x)).exp()
    }

    /// `S(1)e^{m + (1−ρ²)σ₂²/2}`.
    pub fn classical_predictor(&self, x: f64) -> f64 {
        self.s0 * (x + self.conditional_mean(x) + 0.5 * self.conditional_variance()).exp()
    }

    /// `E/E_d = e^{(1−ρ²)σ₂²/2}`, the same at every `S(1)`.
    pub fn predictor_ratio(&self) -> f64 {
        (0.5 * self.conditional_variance()).exp()
    }

    /// One path `(X, Y)`; path `i` uses its own stream.
    pub fn simulate_path(&self, seed: u64, path: u64) -> (f64, f64) {
        let mut rng = stream_rng(seed, path);
        let z1 = standard_normal(&mut rng);
        let z2 = standard_normal(&mut rng);
        let x = self.mu1 + self.sigma1 * z1;
        let y = self.mu2 + self.sigma2 * (self.rho * z1 + (1.0 - self.rho * self.rho).sqrt() * z2);
        (x, y)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssetReport {
    pub result: ExperimentResult,
    /// `Δ(S(2), E[S(2) | G])²` under `φ = −ln x`.
    pub divergence_error: f64,
    /// `D(S(2), E_d[S(2) | G])²` under `φ = −ln x`.
    pub distance_error: f64,
    /// Whether `divergence_error ≥ distance_error` (the ordering claimed for
    /// `φ''' < 0`) held on this run.
    pub prediction_ordering_satisfied: bool,
    /// Paths where the closed forms violate `E_d[S(2)|G] < E[S(2)|G]`.
    pub pathwise_violations: usize,
}

fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn within_3se(est: f64, truth: f64, se: f64) -> bool {
    (est - truth).abs() <= 3.0 * se + 1e-12 * truth.abs().max(1.0)
}

/// Simulates `n_paths` paths and compares per-bin Monte Carlo estimates of
/// both predictors with their closed forms.
///
/// Closed forms are averaged over the bin's own draws of `X` (in log space
/// for `E_d`, which is linear in `X` there), so they are the exact bin
/// conditional expectations and the residuals are conditionally centred.
pub fn asset_experiment(model: &AssetModel, n_paths: usize, n_bins: usize, seed: u64) -> Result<AssetReport> {
    model.validate()?;
    if n_paths < 10_000 {
        return Err(Error::InvalidArgument {
            field: "paths",
            reason: format!("need at least 10000 paths, got {n_paths}"),
        });
    }
    if n_bins < 10 || n_bins > n_paths / 2 {
        return Err(Error::InvalidArgument {
            field: "bins",
            reason: format!("need between 10 and paths/2 bins, got {n_bins}"),
        });
    }
    let paths: Vec<(f64, f64)> = (0..n_paths as u64).map(|i| model.simulate_path(seed, i)).collect();
    let mut order: Vec<usize> = (0..n_paths).collect();
    order.sort_by(|&a, &b| paths[a].0.total_cmp(&paths[b].0).then(a.cmp(&b)));
    let mut labels = vec![0usize; n_paths];
    for (rank, &i) in order.iter().enumerate() {
        labels[i] = rank * n_bins / n_paths;
    }

    let v = model.conditional_variance();
    let mut result = ExperimentResult::new(
        "asset",
        &[
            "bin",
            "count",
            "x_center",
            "x_mean",
            "ed_mc",
            "ed_closed",
            "ed_log_se",
            "ed_within_3se",
            "e_mc",
            "e_closed",
            "e_se",
            "e_within_3se",
            "ratio_mc",
            "ratio_closed",
            "ratio_log_se",
            "ratio_within_3se",
            "ed_le_e",
        ],
        seed,
        GeneratorKind::NegLog.name(),
    );
    let mut pathwise_violations = 0;
    for bin in 0..n_bins {
        let members: Vec<usize> = order[bin * n_paths / n_bins..(bin + 1) * n_paths / n_bins].to_vec();
        let xs: Vec<f64> = members.iter().map(|&i| paths[i].0).collect();
        let count = xs.len();
        let x_center = xs[count / 2];
        let x_mean = xs.iter().sum::<f64>() / count as f64;

        // E_d in log space: ln S(2) − (ln S(0) + X + m(X)) = Y − m(X).
        let log_resid: Vec<f64> = members
            .iter()
            .map(|&i| paths[i].1 - model.conditional_mean(paths[i].0))
            .collect();
        let (log_bias, ed_log_se) = mean_se(&log_resid);
        let ed_closed_log = model.s0.ln() + x_mean + model.conditional_mean(x_mean);
        let ed_mc_log = ed_closed_log + log_bias;

        let s2: Vec<f64> = members
            .iter()
            .map(|&i| model.s0 * (paths[i].0 + paths[i].1).exp())
            .collect();
        let e_closed_each: Vec<f64> = members.iter().map(|&i| model.classical_predictor(paths[i].0)).collect();
        let resid: Vec<f64> = s2.iter().zip(&e_closed_each).map(|(s, c)| s - c).collect();
        let (e_bias, e_se) = mean_se(&resid);
        let e_closed = e_closed_each.iter().sum::<f64>() / count as f64;
        let e_mc = s2.iter().sum::<f64>() / count as f64;
        debug_assert!((e_mc - (e_closed + e_bias)).abs() <= 1e-9 * e_mc.abs().max(1.0));

        // Ratio E[e^Z]/e^{E Z} for Z = Y − m(X) ~ N(0, v); log-ratio SE by the
        // delta method.
        let ez: Vec<f64> = log_resid.iter().map(|z| z.exp()).collect();
        let mean_ez = ez.iter().sum::<f64>() / count as f64;
        let log_ratio = mean_ez.ln() - log_bias;
        let lin: Vec<f64> = ez.iter().zip(&log_resid).map(|(e, z)| e / mean_ez - z).collect();
        let (_, ratio_log_se) = mean_se(&lin);

        for &i in &members {
            if !(model.d_predictor(paths[i].0) < model.classical_predictor(paths[i].0)) {
                pathwise_violations += 1;
            }
        }
        let ed_mc = ed_mc_log.exp();
        let ed_closed = ed_closed_log.exp();
        result.push(vec![
            bin.into(),
            count.into(),
            x_center.into(),
            x_mean.into(),
            ed_mc.into(),
            ed_closed.into(),
            ed_log_se.into(),
            within_3se(ed_mc_log, ed_closed_log, ed_log_se).into(),
            e_mc.into(),
            e_closed.into(),
            e_se.into(),
            within_3se(e_mc, e_closed, e_se).into(),
            log_ratio.exp().into(),
            model.predictor_ratio().into(),
            ratio_log_se.into(),
            within_3se(log_ratio, 0.5 * v, ratio_log_se).into(),
            (ed_mc <= e_mc && ed_closed < e_closed).into(),
        ]);
    }

    let gen = Generator::new(GeneratorKind::NegLog)?;
    let space = FiniteProbSpace::uniform(n_paths)?;
    let s2 = RandomVector::from_scalars(&paths.iter().map(|(x, y)| model.s0 * (x + y).exp()).collect::<Vec<_>>())?;
    let part = Partition::from_labels(&labels)?;
    let errors = prediction_error_compare(&gen, &space, &s2, &part)?;

    Ok(AssetReport {
        result,
        divergence_error: errors.divergence_error,
        distance_error: errors.distance_error,
        prediction_ordering_satisfied: errors.ordering_satisfied,
        pathwise_violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_ratio_without_correlation() {
        let m = AssetModel {
            rho: 0.0,
            ..AssetModel::default()
        };
        for x in [-2.0, 0.0, 1.3] {
            let r = m.classical_predictor(x) / m.d_predictor(x);
            assert!((r - 0.5f64.exp()).abs() < 1e-14);
        }
        assert!((m.predictor_ratio() - 1.648721).abs() < 1e-6);
    }

    #[test]
    fn degenerate_second_day() {
        let m = AssetModel {
            sigma2: 1e-6,
            ..AssetModel::default()
        };
        for x in [-1.0, 0.5, 2.0] {
            let (ed, e) = (m.d_predictor(x), m.classical_predictor(x));
            assert!(ed < e);
            assert!((e - ed).abs() <= 1e-5 * e);
        }
    }

    #[test]
    fn model_validation() {
        let bad = [
            AssetModel {
                rho: 1.0,
                ..AssetModel::default()
            },
            AssetModel {
                rho: -1.2,
                ..AssetModel::default()
            },
            AssetModel {
                sigma1: 0.0,
                ..AssetModel::default()
            },
            AssetModel {
                sigma2: -1.0,
                ..AssetModel::default()
            },
            AssetModel {
                s0: 0.0,
                ..AssetModel::default()
            },
        ];
        for m in bad {
            assert!(matches!(m.validate(), Err(Error::InvalidModel { .. })), "{m:?}");
        }
        assert!(asset_experiment(&AssetModel::default(), 100, 10, 1).is_err());
        assert!(asset_experiment(&AssetModel::default(), 10_000, 5, 1).is_err());
    }
}
