//! d-means, d-variances and d-conditional expectations, plus checks of the
//! identities and orderings they satisfy.
//!
//! Everything here is a pull-back through `h`: `E_d[X | G] = H(E[h(X) | G])`.

use crate::divergence::{bregman_unchecked, divergence_rv};
use crate::error::{Error, Result};
use crate::finite_probability::{
    conditional_expectation_real, conditional_expectation_vector, expectation, map_h, refines, FiniteProbSpace,
    Partition, RandomVector,
};
use crate::generators::{Generator, GeneratorKind};
use crate::geometry::{self, claim_for, claim_holds, Claim};
use crate::point::Point;

/// A non-empty list of i.i.d. draws of common dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalSample {
    points: Vec<Point>,
}

impl EmpiricalSample {
    pub fn new(points: Vec<Point>) -> Result<Self> {
        let first = points.first().ok_or(Error::EmptySample)?;
        for p in &points {
            first.check_same_dim(p)?;
        }
        Ok(EmpiricalSample { points })
    }

    pub fn from_scalars(xs: &[f64]) -> Result<Self> {
        EmpiricalSample::new(xs.iter().map(|&x| Point::scalar(x)).collect())
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

fn h_columns(gen: &Generator, x: &RandomVector) -> Result<Vec<Vec<f64>>> {
    let rows = map_h(gen, x)?;
    Ok((0..x.dim()).map(|i| rows.iter().map(|r| r[i]).collect()).collect())
}

/// `E_d[X] = H(E[h(X)])`.
pub fn d_mean(gen: &Generator, space: &FiniteProbSpace, x: &RandomVector) -> Result<Point> {
    x.check_on(space)?;
    let means = h_columns(gen, x)?
        .iter()
        .map(|c| expectation(space, c))
        .collect::<Result<Vec<_>>>()?;
    gen.h_inv_point("d-mean", &means)
}

/// `Sₙ = H(n⁻¹ Σ h(xₖ))`, identical to [`geometry::closest_point_to_set`].
pub fn d_mean_sample(gen: &Generator, sample: &EmpiricalSample) -> Result<Point> {
    geometry::h_space_mean(gen, sample.points())
}

/// `σ_d²(X) = E‖h(X) − h(E_d[X])‖²`.
pub fn d_variance(gen: &Generator, space: &FiniteProbSpace, x: &RandomVector) -> Result<f64> {
    x.check_on(space)?;
    let cols = h_columns(gen, x)?;
    let mut total = 0.0;
    for c in &cols {
        let m = expectation(space, c)?;
        let dev: Vec<f64> = c.iter().map(|v| (v - m) * (v - m)).collect();
        total += expectation(space, &dev)?;
    }
    Ok(total)
}

/// `(n − 1)⁻¹ Σₖ ‖h(xₖ) − h(Sₙ)‖²`.
pub fn d_variance_sample(gen: &Generator, sample: &EmpiricalSample) -> Result<f64> {
    let n = sample.len();
    if n < 2 {
        return Err(Error::SampleTooSmall(n));
    }
    let hs = sample
        .points()
        .iter()
        .map(|p| gen.h_point("sample", p))
        .collect::<Result<Vec<_>>>()?;
    let k = hs[0].len();
    let mut total = 0.0;
    for i in 0..k {
        // h(Sₙ) is the h-space mean itself; H∘h would only add round-off.
        let m = hs.iter().map(|r| r[i]).sum::<f64>() / n as f64;
        total += hs.iter().map(|r| (r[i] - m).powi(2)).sum::<f64>();
    }
    Ok(total / (n - 1) as f64)
}

/// `E[h(X) | G]` per outcome (rows) and coordinate (columns of each row).
fn conditional_h(
    gen: &Generator,
    space: &FiniteProbSpace,
    x: &RandomVector,
    part: &Partition,
) -> Result<Vec<Vec<f64>>> {
    x.check_on(space)?;
    let cols = h_columns(gen, x)?
        .iter()
        .map(|c| conditional_expectation_real(space, c, part))
        .collect::<Result<Vec<_>>>()?;
    Ok((0..x.len()).map(|w| cols.iter().map(|c| c[w]).collect()).collect())
}

/// `E_d[X | G] = H(E[h(X) | G])`, constant on the blocks of `part`.
pub fn d_conditional_expectation(
    gen: &Generator,
    space: &FiniteProbSpace,
    x: &RandomVector,
    part: &Partition,
) -> Result<RandomVector> {
    let rows = conditional_h(gen, space, x, part)?;
    let values = rows
        .iter()
        .map(|r| gen.h_inv_point("E_d[X|G]", r))
        .collect::<Result<Vec<_>>>()?;
    RandomVector::new(values)
}

/// `max |h(E_d[X | G]) − E[h(X) | G]|` over outcomes and coordinates.
pub fn intertwining_residual(
    gen: &Generator,
    space: &FiniteProbSpace,
    x: &RandomVector,
    part: &Partition,
) -> Result<f64> {
    let inner = conditional_h(gen, space, x, part)?;
    let pred = d_conditional_expectation(gen, space, x, part)?;
    let mapped = map_h(gen, &pred)?;
    Ok(mapped
        .iter()
        .zip(&inner)
        .flat_map(|(a, b)| a.iter().zip(b).map(|(u, v)| (u - v).abs()))
        .fold(0.0, f64::max))
}

/// Residuals of the structural properties of `E_d[· | G]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PropertiesReport {
    /// `|E_d[X | trivial] − E_d[X]|`
    pub trivial: f64,
    /// `|E_d[E_d[X | fine] | coarse] − E_d[X | coarse]|`
    pub tower: f64,
    /// `|E_d[Z | coarse] − Z|` for the coarse-measurable `Z = E_d[X | coarse]`.
    pub measurability: f64,
    /// Largest amount by which `E_d[X | G] ≤ E_d[Y | G]` fails for `X ≤ Y`
    /// (zero when monotone), checked on both partitions.
    pub monotonicity_violation: f64,
}

impl PropertiesReport {
    pub fn max_residual(&self) -> f64 {
        self.trivial
            .max(self.tower)
            .max(self.measurability)
            .max(self.monotonicity_violation)
    }
}

/// A random vector dominating `x` inside the generator's domain: `x + 1` on
/// domains unbounded below, `2x` on (0, ∞).
pub fn dominating(gen: &Generator, x: &RandomVector) -> Result<RandomVector> {
    let lower = gen.domain().lower;
    let values = x
        .values()
        .iter()
        .map(|p| {
            p.iter()
                .map(|&v| if lower.is_finite() { 2.0 * v } else { v + 1.0 })
                .collect()
        })
        .collect();
    RandomVector::new(values)
}

/// Largest `E_d[X|G] − E_d[Y|G]` over outcomes and coordinates, clamped at 0.
pub fn monotonicity_violation(
    gen: &Generator,
    space: &FiniteProbSpace,
    x: &RandomVector,
    y: &RandomVector,
    part: &Partition,
) -> Result<f64> {
    let ex = d_conditional_expectation(gen, space, x, part)?;
    let ey = d_conditional_expectation(gen, space, y, part)?;
    Ok(ex
        .values()
        .iter()
        .zip(ey.values())
        .flat_map(|(a, b)| a.iter().zip(b.iter()).map(|(u, v)| u - v))
        .fold(0.0, f64::max))
}

/// Checks the trivial-partition reduction, the tower property for `fine`
/// refining `coarse`, measurability, and monotonicity against
/// [`dominating`]`(x)`.
pub fn condexp_properties_check(
    gen: &Generator,
    space: &FiniteProbSpace,
    x: &RandomVector,
    fine: &Partition,
    coarse: &Partition,
) -> Result<PropertiesReport> {
    if !refines(fine, coarse)? {
        return Err(Error::RefinementViolation);
    }
    let n = space.n_outcomes();
    let mean = d_mean(gen, space, x)?;
    let on_trivial = d_conditional_expectation(gen, space, x, &Partition::trivial(n))?;
    let trivial = on_trivial
        .values()
        .iter()
        .map(|p| p.max_abs_diff(&mean))
        .fold(0.0, f64::max);

    let given_fine = d_conditional_expectation(gen, space, x, fine)?;
    let given_coarse = d_conditional_expectation(gen, space, x, coarse)?;
    let nested = d_conditional_expectation(gen, space, &given_fine, coarse)?;
    let tower = nested.max_abs_diff(&given_coarse);

    let again = d_conditional_expectation(gen, space, &given_coarse, coarse)?;
    let measurability = again.max_abs_diff(&given_coarse);

    let y = dominating(gen, x)?;
    let monotonicity_violation =
        monotonicity_violation(gen, space, x, &y, fine)?.max(monotonicity_violation(gen, space, x, &y, coarse)?);

    Ok(PropertiesReport {
        trivial,
        tower,
        measurability,
        monotonicity_violation,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredictionErrorRecord {
    /// `Δ(X, E[X | G])²`
    pub divergence_error: f64,
    /// `D(X, E_d[X | G])²`
    pub distance_error: f64,
    pub phi3_sign: i8,
    /// `divergence_error ≤ distance_error` when `φ''' > 0`, `≥` when
    /// `φ''' < 0`; for the flat generator, `divergence_error = ½ distance_error`.
    pub ordering_satisfied: bool,
}

/// `D(X, Y)² = E‖h(X) − h(Y)‖²`.
pub fn distance_rv(gen: &Generator, space: &FiniteProbSpace, x: &RandomVector, y: &RandomVector) -> Result<f64> {
    x.check_on(space)?;
    y.check_on(space)?;
    x.values()
        .iter()
        .zip(y.values())
        .zip(space.weights())
        .map(|((a, b), w)| {
            let d = geometry::distance(gen, a, b)?;
            Ok(w * d * d)
        })
        .sum()
}

/// Prediction errors of the classical and the d-conditional expectation, each
/// in its own error functional.
pub fn prediction_error_compare(
    gen: &Generator,
    space: &FiniteProbSpace,
    x: &RandomVector,
    part: &Partition,
) -> Result<PredictionErrorRecord> {
    let classical = conditional_expectation_vector(space, x, part)?;
    let divergence_error = divergence_rv(gen, space, x, &classical)?;
    let pred = d_conditional_expectation(gen, space, x, part)?;
    let distance_error = distance_rv(gen, space, x, &pred)?;
    let phi3_sign = gen.phi3_sign();
    let tol = 1e-12 * divergence_error.max(distance_error).max(1.0);
    let ordering_satisfied = match phi3_sign {
        0 => (divergence_error - 0.5 * distance_error).abs() <= tol,
        s if s > 0 => divergence_error <= distance_error + tol,
        _ => divergence_error >= distance_error - tol,
    };
    Ok(PredictionErrorRecord {
        divergence_error,
        distance_error,
        phi3_sign,
        ordering_satisfied,
    })
}

/// `Δ(Y, X)²` against `½D(Y, X)²` for random vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomComparison {
    pub divergence: f64,
    pub half_distance_sq: f64,
    /// Common orientation of `Y − X` over all outcomes and coordinates, or 0.
    pub orientation: i8,
    pub claim: Option<Claim>,
    pub satisfied: bool,
}

/// Integrates the pointwise comparison over Ω. The claim follows the sign of
/// `φ'''` times the orientation of `Y − X`, which must be common to every
/// outcome of positive probability (otherwise no claim is made).
pub fn compare_random_vectors(
    gen: &Generator,
    space: &FiniteProbSpace,
    y: &RandomVector,
    x: &RandomVector,
) -> Result<RandomComparison> {
    let divergence = divergence_rv(gen, space, y, x)?;
    let half_distance_sq = 0.5 * distance_rv(gen, space, y, x)?;
    let mut orient: Option<i8> = None;
    let mut mixed = false;
    for ((a, b), w) in x.values().iter().zip(y.values()).zip(space.weights()) {
        if *w == 0.0 || a == b {
            continue;
        }
        let o = geometry::orientation(a, b);
        match (o, orient) {
            (0, _) => mixed = true,
            (o, None) => orient = Some(o),
            (o, Some(prev)) if o != prev => mixed = true,
            _ => {}
        }
    }
    let orientation = if mixed { 0 } else { orient.unwrap_or(0) };
    let claim = if orient.is_none() && !mixed {
        // X = Y almost surely: both sides vanish.
        Some(Claim::Equal)
    } else {
        claim_for(gen.phi3_sign(), orientation)
    };
    Ok(RandomComparison {
        divergence,
        half_distance_sq,
        orientation,
        claim,
        satisfied: claim_holds(claim, divergence, half_distance_sq),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupInvarianceReport {
    /// `|d(x∘v, y∘v) − d(x, y)|`
    pub translation_residual: f64,
    /// `| |x|_d − |x⁻¹|_d |` with `|x|_d = d(e, x)`.
    pub inverse_norm_residual: f64,
}

/// Invariance of the metric under the shipped commutative group operations:
/// addition for `quadratic`, componentwise multiplication for `neglog`.
pub fn group_invariance_check(gen: &Generator, x: &Point, y: &Point, v: &Point) -> Result<GroupInvarianceReport> {
    x.check_same_dim(y)?;
    x.check_same_dim(v)?;
    type Op = fn(f64, f64) -> f64;
    let (op, inverse, identity): (Op, fn(f64) -> f64, f64) = match gen.kind() {
        GeneratorKind::Quadratic => (|a, b| a + b, |a| -a, 0.0),
        GeneratorKind::NegLog => (|a, b| a * b, |a| 1.0 / a, 1.0),
        _ => return Err(Error::UnsupportedGenerator(gen.name())),
    };
    let combine = |a: &Point, b: &Point| -> Point { a.iter().zip(b.iter()).map(|(&s, &t)| op(s, t)).collect() };
    let moved = geometry::distance(gen, &combine(x, v), &combine(y, v))?;
    let base = geometry::distance(gen, x, y)?;
    let e: Point = vec![identity; x.dim()].into();
    let x_inv: Point = x.iter().map(|&a| inverse(a)).collect();
    let norm = geometry::distance(gen, &e, x)?;
    let norm_inv = geometry::distance(gen, &e, &x_inv)?;
    Ok(GroupInvarianceReport {
        translation_residual: (moved - base).abs(),
        inverse_norm_residual: (norm - norm_inv).abs(),
    })
}

/// `max |E_d[X₁^a₁ X₂^a₂ | G] − E_d[X₁|G]^a₁ E_d[X₂|G]^a₂|` under the
/// logarithmic metric, relative to the magnitude of each entry.
pub fn multiplicative_linearity_check(
    space: &FiniteProbSpace,
    x1: &RandomVector,
    x2: &RandomVector,
    a1: f64,
    a2: f64,
    part: &Partition,
) -> Result<f64> {
    let gen = Generator::new(GeneratorKind::NegLog)?;
    x1.check_on(space)?;
    x2.check_on(space)?;
    if x1.dim() != x2.dim() {
        return Err(Error::DimensionMismatch {
            expected: x1.dim(),
            found: x2.dim(),
        });
    }
    let combined = RandomVector::new(
        x1.values()
            .iter()
            .zip(x2.values())
            .map(|(p, q)| {
                gen.check_point("X1", p)?;
                gen.check_point("X2", q)?;
                Ok(p.iter().zip(q.iter()).map(|(&s, &t)| s.powf(a1) * t.powf(a2)).collect())
            })
            .collect::<Result<Vec<Point>>>()?,
    )?;
    let lhs = d_conditional_expectation(&gen, space, &combined, part)?;
    let e1 = d_conditional_expectation(&gen, space, x1, part)?;
    let e2 = d_conditional_expectation(&gen, space, x2, part)?;
    let mut worst = 0.0_f64;
    for ((l, p), q) in lhs.values().iter().zip(e1.values()).zip(e2.values()) {
        for ((&lv, &pv), &qv) in l.iter().zip(p.iter()).zip(q.iter()) {
            let rhs = pv.powf(a1) * qv.powf(a2);
            worst = worst.max((lv - rhs).abs() / lv.abs().max(rhs.abs()).max(1.0));
        }
    }
    Ok(worst)
}

/// `Σₖ d(xₖ, v)² / n` for the empirical objective minimised by the d-mean.
pub fn empirical_distance_objective(gen: &Generator, sample: &EmpiricalSample, v: &Point) -> Result<f64> {
    let mut total = 0.0;
    for p in sample.points() {
        let d = geometry::distance(gen, p, v)?;
        total += d * d;
    }
    Ok(total / sample.len() as f64)
}

/// `E[d(X, v)²]`, minimised over `v` by [`d_mean`].
pub fn distance_objective(gen: &Generator, space: &FiniteProbSpace, x: &RandomVector, v: &Point) -> Result<f64> {
    x.check_on(space)?;
    x.values()
        .iter()
        .zip(space.weights())
        .map(|(p, w)| {
            let d = geometry::distance(gen, p, v)?;
            Ok(w * d * d)
        })
        .sum()
}

/// `Σₖ δ(xₖ, v)²` for a point cloud.
pub fn divergence_objective(gen: &Generator, points: &[Point], v: &Point) -> f64 {
    points
        .iter()
        .map(|p| {
            p.iter()
                .zip(v.iter())
                .map(|(&a, &b)| bregman_unchecked(gen, a, b))
                .sum::<f64>()
        })
        .sum()
}
