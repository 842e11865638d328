//! Bregman divergences of a separable generator, reported in squared units.
//!
//! Argument order: `δ(x, y)² = φ(x) − φ(y) − (x − y) φ'(y)`, the gradient is
//! taken at the second argument.

use crate::error::Result;
use crate::finite_probability::{FiniteProbSpace, RandomVector};
use crate::generators::Generator;
use crate::numeric::{self, QuadratureConfig};
use crate::point::Point;

pub fn bregman_scalar(gen: &Generator, x: f64, y: f64) -> Result<f64> {
    gen.check_value("x", x)?;
    gen.check_value("y", y)?;
    Ok(bregman_unchecked(gen, x, y))
}

// Clamped at zero: the exact value is non-negative, cancellation is not.
pub(crate) fn bregman_unchecked(gen: &Generator, x: f64, y: f64) -> f64 {
    if x == y {
        return 0.0;
    }
    (gen.phi(x) - gen.phi(y) - (x - y) * gen.phi1(y)).max(0.0)
}

/// `Σᵢ δ(xᵢ, yᵢ)²`.
pub fn bregman_point(gen: &Generator, x: &Point, y: &Point) -> Result<f64> {
    x.check_same_dim(y)?;
    gen.check_point("X", x)?;
    gen.check_point("Y", y)?;
    Ok(x.iter()
        .zip(y.iter())
        .map(|(&a, &b)| bregman_unchecked(gen, a, b))
        .sum())
}

/// `Δ(X, Y)² = E[δ(X, Y)²]`.
pub fn divergence_rv(gen: &Generator, space: &FiniteProbSpace, x: &RandomVector, y: &RandomVector) -> Result<f64> {
    x.check_on(space)?;
    y.check_on(space)?;
    x.values()
        .iter()
        .zip(y.values())
        .zip(space.weights())
        .map(|((a, b), w)| Ok(w * bregman_point(gen, a, b)?))
        .sum()
}

/// `|φ(y) − φ(x) − (y − x)φ'(x) − ∫ₓʸ φ''(u)(y − u) du|`, the integral done
/// by adaptive quadrature.
pub fn integral_identity_residual(gen: &Generator, x: f64, y: f64) -> Result<f64> {
    let lhs = bregman_scalar(gen, y, x)?;
    let cfg = QuadratureConfig {
        abs_tol: 1e-15,
        rel_tol: 1e-13,
        max_intervals: 4000,
    };
    let rhs = numeric::integrate(|u| gen.phi2(u) * (y - u), x, y, cfg)?;
    Ok((lhs - rhs).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::GeneratorKind;
    use std::f64::consts::{E, LN_2};

    fn g(s: &str) -> Generator {
        s.parse().unwrap()
    }

    #[test]
    fn scalar_examples() {
        let v = bregman_scalar(&g("xlogx"), 2.0, 1.0).unwrap();
        // x ln(x/y) - x + y
        assert!((v - (2.0 * LN_2 - 1.0)).abs() < 1e-15);
        assert!((v - 0.386294).abs() < 1e-6);
        let v = bregman_scalar(&g("exp"), 1.0, 0.0).unwrap();
        assert!((v - (E - 2.0)).abs() < 1e-15);
        for gen in Generator::shipped() {
            assert_eq!(bregman_scalar(&gen, 1.7, 1.7).unwrap(), 0.0);
        }
    }

    #[test]
    fn point_examples() {
        let neglog = g("neglog");
        let one = Point::new(vec![1.0, 1.0]);
        assert_eq!(bregman_point(&neglog, &one, &one).unwrap(), 0.0);
        let two = Point::new(vec![2.0, 2.0]);
        let v = bregman_point(&g("xlogx"), &two, &one).unwrap();
        assert!((v - 2.0 * (2.0 * LN_2 - 1.0)).abs() < 1e-15);
        assert!((v - 0.772589).abs() < 1e-6);
        let x = Point::new(vec![0.3, -1.2, 4.0]);
        let y = Point::new(vec![1.1, 2.0, -0.5]);
        let half_sq: f64 = 0.5 * x.iter().zip(y.iter()).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
        assert!((bregman_point(&g("quadratic"), &x, &y).unwrap() - half_sq).abs() < 1e-12);
        assert!(bregman_point(&neglog, &one, &Point::new(vec![1.0])).is_err());
        assert!(bregman_point(&neglog, &one, &Point::new(vec![1.0, -1.0])).is_err());
    }

    #[test]
    fn random_variable_examples() {
        let xlogx = g("xlogx");
        let space = FiniteProbSpace::uniform(2).unwrap();
        let x = RandomVector::from_scalars(&[2.0, 1.0]).unwrap();
        let y = RandomVector::from_scalars(&[1.0, 1.0]).unwrap();
        let v = divergence_rv(&xlogx, &space, &x, &y).unwrap();
        assert!((v - 0.5 * (2.0 * LN_2 - 1.0)).abs() < 1e-15);
        assert!((v - 0.193147).abs() < 1e-6);
        assert_eq!(divergence_rv(&xlogx, &space, &x, &x).unwrap(), 0.0);

        let neglog = g("neglog");
        let one = FiniteProbSpace::uniform(1).unwrap();
        let a = RandomVector::from_scalars(&[3.0]).unwrap();
        let b = RandomVector::from_scalars(&[0.5]).unwrap();
        assert_eq!(
            divergence_rv(&neglog, &one, &a, &b).unwrap(),
            bregman_point(&neglog, &Point::scalar(3.0), &Point::scalar(0.5)).unwrap()
        );
        assert!(divergence_rv(&neglog, &space, &a, &b).is_err());
    }

    #[test]
    fn asymmetry_witness() {
        for gen in Generator::shipped() {
            if gen.kind() == GeneratorKind::Quadratic {
                continue;
            }
            let fwd = bregman_scalar(&gen, 1.0, 3.0).unwrap();
            let back = bregman_scalar(&gen, 3.0, 1.0).unwrap();
            assert!((fwd - back).abs() > 1e-3, "{gen}: {fwd} vs {back}");
        }
    }

    #[test]
    fn integral_identity_examples() {
        assert!(integral_identity_residual(&g("quadratic"), 0.0, 1.0).unwrap() <= 1e-12);
        assert_eq!(integral_identity_residual(&g("neglog"), 2.0, 2.0).unwrap(), 0.0);
        assert!(integral_identity_residual(&g("neglog"), 1.0, 3.0).unwrap() <= 1e-8);
    }
}
