//! Law-of-large-numbers and unbiasedness experiments for the sample d-mean
//! `Sₙ = H(n⁻¹ Σ h(xₖ))` and the sample d-variance.

use crate::error::{Error, Result};
use crate::generators::Generator;
use crate::geometry;
use crate::point::Point;
use crate::prediction::{d_mean_sample, d_variance_sample, EmpiricalSample};
use crate::rng::stream_rng;

use super::{ExperimentResult, Sampler};

fn draw_sample(sampler: &Sampler, n: usize, seed: u64, stream: u64) -> Result<EmpiricalSample> {
    let mut rng = stream_rng(seed, stream);
    EmpiricalSample::new((0..n).map(|_| Point::scalar(sampler.draw(&mut rng))).collect())
}

fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn fit_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// For each `n`, the trial average of `d(Sₙ, E_d[X])`, plus the fitted slope
/// of `ln error` against `ln n` (repeated on every row).
pub fn lln_experiment(
    gen: &Generator,
    sampler: &Sampler,
    n_values: &[usize],
    trials: usize,
    seed: u64,
) -> Result<ExperimentResult> {
    let truth = Point::scalar(sampler.d_mean(gen)?);
    if n_values.is_empty() || n_values.contains(&0) || n_values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument {
            field: "n",
            reason: "sample sizes must be positive and strictly increasing".into(),
        });
    }
    if trials == 0 {
        return Err(Error::InvalidArgument {
            field: "trials",
            reason: "need at least one trial".into(),
        });
    }
    let mut stats = Vec::with_capacity(n_values.len());
    for (idx, &n) in n_values.iter().enumerate() {
        let errors = (0..trials)
            .map(|t| {
                let sample = draw_sample(sampler, n, seed, ((idx as u64) << 32) | t as u64)?;
                geometry::distance(gen, &d_mean_sample(gen, &sample)?, &truth)
            })
            .collect::<Result<Vec<_>>>()?;
        stats.push(mean_and_se(&errors));
    }
    let ns: Vec<f64> = n_values.iter().map(|&n| n as f64).collect();
    let means: Vec<f64> = stats.iter().map(|s| s.0).collect();
    let slope = if n_values.len() >= 2 && means.iter().all(|m| *m > 0.0) {
        fit_log_slope(&ns, &means)
    } else {
        f64::NAN
    };
    let mut result = ExperimentResult::new(
        "lln",
        &["n", "trials", "mean_error", "se_error", "d_mean_truth", "fitted_slope"],
        seed,
        gen.name(),
    );
    for (&n, (m, se)) in n_values.iter().zip(stats) {
        result.push(vec![
            n.into(),
            trials.into(),
            m.into(),
            se.into(),
            truth[0].into(),
            slope.into(),
        ]);
    }
    Ok(result)
}

/// Monte Carlo average of `σ̂_d²` over `trials` samples of size `n` against the
/// closed-form `σ_d²`; also checks `E[h(Sₙ)] = E[h(X)]` the same way.
pub fn variance_unbiasedness_experiment(
    gen: &Generator,
    sampler: &Sampler,
    n: usize,
    trials: usize,
    seed: u64,
) -> Result<ExperimentResult> {
    let var_truth = sampler.d_variance(gen)?;
    let h_truth = gen.h(sampler.d_mean(gen)?);
    if n < 2 {
        return Err(Error::SampleTooSmall(n));
    }
    if trials < 2 {
        return Err(Error::InvalidArgument {
            field: "trials",
            reason: "need at least two trials for a standard error".into(),
        });
    }
    let mut estimates = Vec::with_capacity(trials);
    let mut h_means = Vec::with_capacity(trials);
    for t in 0..trials {
        let sample = draw_sample(sampler, n, seed, t as u64)?;
        estimates.push(d_variance_sample(gen, &sample)?);
        h_means.push(gen.h(d_mean_sample(gen, &sample)?[0]));
    }
    let (v_mean, v_se) = mean_and_se(&estimates);
    let (h_mean, h_se) = mean_and_se(&h_means);
    let within = |est: f64, se: f64, truth: f64| (est - truth).abs() <= 3.0 * se + 1e-12 * truth.abs().max(1.0);
    let z = if v_se > 0.0 { (v_mean - var_truth) / v_se } else { 0.0 };
    let mut result = ExperimentResult::new(
        "variance",
        &[
            "n",
            "trials",
            "mean_estimate",
            "standard_error",
            "truth",
            "z_score",
            "within_3se",
            "mean_h_dmean",
            "h_dmean_se",
            "h_truth",
            "h_within_3se",
        ],
        seed,
        gen.name(),
    );
    result.push(vec![
        n.into(),
        trials.into(),
        v_mean.into(),
        v_se.into(),
        var_truth.into(),
        z.into(),
        within(v_mean, v_se, var_truth).into(),
        h_mean.into(),
        h_se.into(),
        h_truth.into(),
        within(h_mean, h_se, h_truth).into(),
    ]);
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_power_law() {
        let xs = [10.0, 100.0, 1000.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(-0.5)).collect();
        assert!((fit_log_slope(&xs, &ys) + 0.5).abs() < 1e-12);
    }

    #[test]
    fn single_draw_error_is_its_distance() {
        let gen: Generator = "neglog".parse().unwrap();
        let s = Sampler::LogNormal { mu: 0.0, sigma: 1.0 };
        let r = lln_experiment(&gen, &s, &[1], 1, 5).unwrap();
        let x = draw_sample(&s, 1, 5, 0).unwrap().points()[0][0];
        assert!((r.column("mean_error")[0] - x.ln().abs()).abs() < 1e-15);
    }

    #[test]
    fn constant_sampler_has_zero_variance_estimates() {
        let gen: Generator = "exp".parse().unwrap();
        let r = variance_unbiasedness_experiment(&gen, &Sampler::Constant(0.7), 5, 10, 1).unwrap();
        assert_eq!(r.column("mean_estimate")[0], 0.0);
        assert_eq!(r.text_column("within_3se")[0], "true");
    }

    #[test]
    fn argument_validation() {
        let gen: Generator = "neglog".parse().unwrap();
        let s = Sampler::LogNormal { mu: 0.0, sigma: 1.0 };
        assert!(lln_experiment(&gen, &s, &[100, 10], 5, 1).is_err());
        assert!(lln_experiment(&gen, &s, &[10], 0, 1).is_err());
        assert!(variance_unbiasedness_experiment(&gen, &s, 1, 5, 1).is_err());
        let g = Sampler::Gaussian { mean: 0.0, sd: 1.0 };
        assert!(matches!(
            lln_experiment(&gen, &g, &[10], 5, 1),
            Err(Error::DomainSamplerMismatch { .. })
        ));
    }

    #[test]
    fn reruns_are_identical() {
        let gen: Generator = "xlogx".parse().unwrap();
        let s = Sampler::LogNormal { mu: 0.1, sigma: 0.5 };
        let a = lln_experiment(&gen, &s, &[5, 50], 20, 9).unwrap();
        let b = lln_experiment(&gen, &s, &[5, 50], 20, 9).unwrap();
        assert_eq!(a.to_csv_string(), b.to_csv_string());
    }
}
