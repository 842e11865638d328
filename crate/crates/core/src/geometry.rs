//! Geodesics, distances and midpoints of the metric `g = diag(φ''(xᵢ))`.
//!
//! `h` maps `(M, d_φ)` isometrically onto a subset of Euclidean ℝᴷ, so a
//! geodesic is `xᵢ(t) = H(h(xᵢ) + kᵢ t)` with `kᵢ = h(yᵢ) − h(xᵢ)` and
//! `d_φ(x, y) = ‖h(y) − h(x)‖`.

use crate::divergence::{self, bregman_unchecked};
use crate::error::{Error, Result};
use crate::generators::{Generator, GeneratorKind};
use crate::numeric;
use crate::point::Point;

#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicPath {
    gen: Generator,
    start: Point,
    end: Point,
    k: Vec<f64>,
    h_start: Vec<f64>,
}

impl GeodesicPath {
    pub fn generator(&self) -> &Generator {
        &self.gen
    }

    pub fn start(&self) -> &Point {
        &self.start
    }

    pub fn end(&self) -> &Point {
        &self.end
    }

    /// Integration constants `kᵢ = h(yᵢ) − h(xᵢ)`.
    pub fn k(&self) -> &[f64] {
        &self.k
    }

    /// The geodesic at parameter `t`; values outside `[0, 1]` extend the curve
    /// as long as `h(xᵢ) + kᵢ t` stays inside the image of `h`.
    pub fn sample(&self, t: f64) -> Result<Point> {
        if t == 0.0 {
            return Ok(self.start.clone());
        }
        if t == 1.0 {
            return Ok(self.end.clone());
        }
        self.h_start
            .iter()
            .zip(&self.k)
            .map(|(h0, k)| {
                self.gen
                    .h_inv_checked("t", h0 + k * t)
                    .map_err(|_| Error::GeodesicExitsDomain { t })
            })
            .collect()
    }

    /// Velocity `ẋᵢ(t) = kᵢ / h'(xᵢ(t))`.
    pub fn velocity(&self, t: f64) -> Result<Vec<f64>> {
        let x = self.sample(t)?;
        Ok(x.iter().zip(&self.k).map(|(&xi, k)| k / self.gen.h_prime(xi)).collect())
    }
}

pub fn geodesic(gen: &Generator, x: &Point, y: &Point) -> Result<GeodesicPath> {
    x.check_same_dim(y)?;
    let hx = gen.h_point("x", x)?;
    let hy = gen.h_point("y", y)?;
    let k = hy.iter().zip(&hx).map(|(b, a)| b - a).collect();
    Ok(GeodesicPath {
        gen: *gen,
        start: x.clone(),
        end: y.clone(),
        k,
        h_start: hx,
    })
}

pub fn geodesic_sample(path: &GeodesicPath, t: f64) -> Result<Point> {
    path.sample(t)
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum::<f64>().sqrt()
}

/// `d_φ(x, y) = ‖h(y) − h(x)‖`.
pub fn distance(gen: &Generator, x: &Point, y: &Point) -> Result<f64> {
    x.check_same_dim(y)?;
    Ok(euclidean(&gen.h_point("x", x)?, &gen.h_point("y", y)?))
}

/// `zᵢ = H(½(h(xᵢ) + h(yᵢ)))`.
pub fn midpoint(gen: &Generator, x: &Point, y: &Point) -> Result<Point> {
    x.check_same_dim(y)?;
    let hx = gen.h_point("x", x)?;
    let hy = gen.h_point("y", y)?;
    let mid: Vec<f64> = hx.iter().zip(&hy).map(|(a, b)| 0.5 * (a + b)).collect();
    gen.h_inv_point("midpoint", &mid)
}

/// `2d(v,x)² + 2d(v,y)² − d(x,y)² − 4d(v,z)²` with `z` the midpoint of `x`
/// and `y`. Non-negative on spaces of non-positive curvature; zero here.
pub fn semi_parallelogram_residual(gen: &Generator, x: &Point, y: &Point, v: &Point) -> Result<f64> {
    v.check_same_dim(x)?;
    let z = midpoint(gen, x, y)?;
    let dvx = distance(gen, v, x)?;
    let dvy = distance(gen, v, y)?;
    let dxy = distance(gen, x, y)?;
    let dvz = distance(gen, v, &z)?;
    Ok(2.0 * dvx * dvx + 2.0 * dvy * dvy - dxy * dxy - 4.0 * dvz * dvz)
}

/// Equispaced samples of a numerically integrated geodesic.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledPath {
    pub t: Vec<f64>,
    pub points: Vec<Point>,
}

impl SampledPath {
    pub fn last(&self) -> &Point {
        self.points.last().expect("at least one sample")
    }
}

/// Local error target of the geodesic ODE oracle.
const ODE_TOL: f64 = 1e-13;

/// Integrates `φ''(x)ẍ + ½φ'''(x)ẋ² = 0` per coordinate as an initial value
/// problem from `x` with `ẋ(0) = k / h'(x)`, reporting the state on a grid of
/// `steps` equal intervals of `[0, 1]`. Each interval is integrated by RK4
/// with step-doubling error control, since geodesics that start close to a
/// boundary branch point (power kinds near 0) defeat a fixed step. Independent
/// of the closed-form geodesic except for the initial velocity.
pub fn geodesic_ode_oracle(gen: &Generator, x: &Point, y: &Point, steps: usize) -> Result<SampledPath> {
    if steps < 16 {
        return Err(Error::StepCountTooSmall(steps));
    }
    x.check_same_dim(y)?;
    gen.check_point("x", x)?;
    gen.check_point("y", y)?;
    let dt = 1.0 / steps as f64;
    let mut states: Vec<[f64; 2]> = x
        .iter()
        .zip(y.iter())
        .map(|(&a, &b)| [a, (gen.h(b) - gen.h(a)) / gen.h_prime(a)])
        .collect();
    let rhs = |s: &[f64; 2]| [s[1], -0.5 * gen.phi3(s[0]) / gen.phi2(s[0]) * s[1] * s[1]];
    let mut t_out = Vec::with_capacity(steps + 1);
    let mut points = Vec::with_capacity(steps + 1);
    t_out.push(0.0);
    points.push(x.clone());
    for n in 1..=steps {
        let t = n as f64 * dt;
        for s in states.iter_mut() {
            *s = numeric::rk4_adaptive(rhs, |s| gen.domain().contains(s[0]), *s, dt, ODE_TOL)
                .map_err(|_| Error::IntegrationBlowUp { t, value: s[0] })?;
            if !gen.domain().contains(s[0]) || !s[1].is_finite() {
                return Err(Error::IntegrationBlowUp { t, value: s[0] });
            }
        }
        t_out.push(t);
        points.push(states.iter().map(|s| s[0]).collect());
    }
    Ok(SampledPath { t: t_out, points })
}

/// Direction in which the divergence/distance comparison is claimed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Claim {
    /// `δ² ≤ ½d²`
    AtMost,
    /// `δ² ≥ ½d²`
    AtLeast,
    /// `δ² = ½d²` (flat generator)
    Equal,
}

/// Sign of `y − x` when it is the same in every coordinate (zeros allowed),
/// else 0.
pub fn orientation(x: &Point, y: &Point) -> i8 {
    let up = x.iter().zip(y.iter()).all(|(a, b)| b >= a);
    let down = x.iter().zip(y.iter()).all(|(a, b)| b <= a);
    match (up, down) {
        (true, false) => 1,
        (false, true) => -1,
        _ => 0,
    }
}

/// The claim implied by the sign of `φ'''` and the orientation of the pair.
/// Writing `δ(y,x)² − ½d(y,x)² = ∫ₓʸ h'(u)[h'(u)(y−u) − (h(y)−h(u))] du`, the
/// bracket has the sign of `−φ''' (y − x)` and the integral flips with the
/// orientation of `[x, y]`, so the direction is `sign(φ''') · sign(y − x)`.
pub fn claim_for(phi3_sign: i8, orientation: i8) -> Option<Claim> {
    match (phi3_sign, orientation) {
        (0, _) => Some(Claim::Equal),
        (_, 0) => None,
        (s, o) if s * o > 0 => Some(Claim::AtMost),
        _ => Some(Claim::AtLeast),
    }
}

pub(crate) fn claim_holds(claim: Option<Claim>, lhs: f64, rhs: f64) -> bool {
    let tol = 1e-12 * lhs.abs().max(rhs.abs()).max(1.0);
    match claim {
        None => true,
        Some(Claim::AtMost) => lhs <= rhs + tol,
        Some(Claim::AtLeast) => lhs >= rhs - tol,
        Some(Claim::Equal) => (lhs - rhs).abs() <= tol,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRecord {
    /// `δ(y, x)²` (gradient at `x`).
    pub divergence: f64,
    /// `½ d(y, x)²`.
    pub half_distance_sq: f64,
    pub phi3_sign: i8,
    pub orientation: i8,
    pub claim: Option<Claim>,
    pub satisfied: bool,
}

/// Compares `δ(y, x)²` with `½d(y, x)²`. For `y ≥ x` the comparison is
/// `≤` when `φ''' > 0` and `≥` when `φ''' < 0`; it reverses for `y ≤ x`, and
/// pairs whose coordinates move in both directions carry no claim.
pub fn compare_divergence_distance(gen: &Generator, x: &Point, y: &Point) -> Result<ComparisonRecord> {
    let divergence = divergence::bregman_point(gen, y, x)?;
    let d = distance(gen, y, x)?;
    let half_distance_sq = 0.5 * d * d;
    let orientation = orientation(x, y);
    let claim = claim_for(gen.phi3_sign(), orientation);
    Ok(ComparisonRecord {
        divergence,
        half_distance_sq,
        phi3_sign: gen.phi3_sign(),
        orientation,
        claim,
        satisfied: claim_holds(claim, divergence, half_distance_sq),
    })
}

/// The point minimising `Σₖ d(xₖ, v)²` together with the aggregate costs of
/// it and of the divergence minimiser `v ↦ Σₖ δ(xₖ, v)²` (the arithmetic mean).
#[derive(Debug, Clone, PartialEq)]
pub struct ClosestPoint {
    pub point: Point,
    /// `Σₖ d(xₖ, point)²`
    pub distance_cost: f64,
    pub divergence_minimizer: Point,
    /// `Σₖ δ(xₖ, divergence_minimizer)²`
    pub divergence_cost: f64,
}

/// `H(n⁻¹ Σₖ h(xₖ))`; shared by the sample d-mean.
pub fn h_space_mean(gen: &Generator, points: &[Point]) -> Result<Point> {
    let first = points.first().ok_or(Error::EmptySet)?;
    let k = first.dim();
    let mut acc = vec![0.0; k];
    for p in points {
        first.check_same_dim(p)?;
        for (a, u) in acc.iter_mut().zip(gen.h_point("points", p)?) {
            *a += u;
        }
    }
    let n = points.len() as f64;
    for a in acc.iter_mut() {
        *a /= n;
    }
    gen.h_inv_point("mean", &acc)
}

pub fn closest_point_to_set(gen: &Generator, points: &[Point]) -> Result<ClosestPoint> {
    let point = h_space_mean(gen, points)?;
    let k = point.dim();
    let n = points.len() as f64;
    let mean: Point = (0..k).map(|i| points.iter().map(|p| p[i]).sum::<f64>() / n).collect();
    let mut distance_cost = 0.0;
    let mut divergence_cost = 0.0;
    for p in points {
        let d = distance(gen, p, &point)?;
        distance_cost += d * d;
        divergence_cost += p
            .iter()
            .zip(mean.iter())
            .map(|(&a, &b)| bregman_unchecked(gen, a, b))
            .sum::<f64>();
    }
    Ok(ClosestPoint {
        point,
        distance_cost,
        divergence_minimizer: mean,
        divergence_cost,
    })
}

/// True for the flat generator, where geodesics are straight lines.
pub fn is_flat(gen: &Generator) -> bool {
    gen.kind() == GeneratorKind::Quadratic
}
