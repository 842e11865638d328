//! Convex generators `φ`, their derivatives, and the isometry `h` with
//! `h' = sqrt(φ'')` together with its inverse `H`.
//!
//! The closed forms use the exact normalisation `h' = sqrt(φ'')`, so for
//! example `x ln x` maps through `h(x) = 2 sqrt(x)`. Conditional expectations
//! `H(E[h(X) | G])` do not depend on constant rescalings of `h`, but distances
//! do, and the comparison `δ² ≶ ½ d²` needs this normalisation.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::numeric::{self, QuadratureConfig};
use crate::point::Point;

/// Points closer than this to a finite open endpoint are rejected.
pub const BOUNDARY_GUARD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainInterval {
    pub lower: f64,
    pub upper: f64,
    pub open_lower: bool,
    pub open_upper: bool,
}

impl DomainInterval {
    pub fn new(lower: f64, upper: f64, open_lower: bool, open_upper: bool) -> Result<Self> {
        if !(lower < upper) {
            return Err(Error::InvalidArgument {
                field: "domain",
                reason: format!("lower {lower} must be below upper {upper}"),
            });
        }
        Ok(DomainInterval {
            lower,
            upper,
            open_lower,
            open_upper,
        })
    }

    pub const fn real_line() -> Self {
        DomainInterval {
            lower: f64::NEG_INFINITY,
            upper: f64::INFINITY,
            open_lower: true,
            open_upper: true,
        }
    }

    pub const fn positive() -> Self {
        DomainInterval {
            lower: 0.0,
            upper: f64::INFINITY,
            open_lower: true,
            open_upper: true,
        }
    }

    pub const fn negative() -> Self {
        DomainInterval {
            lower: f64::NEG_INFINITY,
            upper: 0.0,
            open_lower: true,
            open_upper: true,
        }
    }

    /// Plain membership: open endpoints exclude themselves.
    pub fn contains(&self, x: f64) -> bool {
        if x.is_nan() {
            return false;
        }
        let above = if self.open_lower {
            x > self.lower
        } else {
            x >= self.lower
        };
        let below = if self.open_upper {
            x < self.upper
        } else {
            x <= self.upper
        };
        above && below && x.is_finite()
    }

    /// Membership with the boundary guard applied to finite open endpoints.
    pub fn contains_guarded(&self, x: f64) -> bool {
        if !self.contains(x) {
            return false;
        }
        let lower_ok = !(self.open_lower && self.lower.is_finite()) || x - self.lower > BOUNDARY_GUARD;
        let upper_ok = !(self.open_upper && self.upper.is_finite()) || self.upper - x > BOUNDARY_GUARD;
        lower_ok && upper_ok
    }
}

impl fmt::Display for DomainInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let l = if self.open_lower { '(' } else { '[' };
        let r = if self.open_upper { ')' } else { ']' };
        write!(f, "{l}{}, {}{r}", self.lower, self.upper)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GeneratorKind {
    /// `φ(x) = x²/2` on ℝ.
    Quadratic,
    /// `φ(x) = eˣ` on ℝ.
    Exp,
    /// `φ(x) = e⁻ˣ` on ℝ.
    NegExp,
    /// `φ(x) = x ln x` on (0, ∞).
    XLogX,
    /// `φ(x) = −ln x` on (0, ∞).
    NegLog,
    /// `φ(x) = xᵖ` on (0, ∞), `p > 1`, `p ≠ 2`.
    Power(f64),
}

impl GeneratorKind {
    pub fn name(&self) -> String {
        match self {
            GeneratorKind::Quadratic => "quadratic".into(),
            GeneratorKind::Exp => "exp".into(),
            GeneratorKind::NegExp => "neg_exp".into(),
            GeneratorKind::XLogX => "xlogx".into(),
            GeneratorKind::NegLog => "neglog".into(),
            GeneratorKind::Power(p) => format!("power:{p}"),
        }
    }
}

impl fmt::Display for GeneratorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for GeneratorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "quadratic" => Ok(GeneratorKind::Quadratic),
            "exp" => Ok(GeneratorKind::Exp),
            "neg_exp" => Ok(GeneratorKind::NegExp),
            "xlogx" => Ok(GeneratorKind::XLogX),
            "neglog" => Ok(GeneratorKind::NegLog),
            _ => {
                let p = s
                    .strip_prefix("power:")
                    .ok_or_else(|| Error::UnknownKind(s.to_string()))?;
                let p: f64 = p.parse().map_err(|_| Error::UnknownKind(s.to_string()))?;
                Ok(GeneratorKind::Power(p))
            }
        }
    }
}

/// A validated convex generator. Cheap to copy; all methods are pure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Generator {
    kind: GeneratorKind,
    domain: DomainInterval,
}

/// Builds a generator from a kind name and, for `power`, its exponent.
pub fn make_generator(kind: &str, p: Option<f64>) -> Result<Generator> {
    let kind = match (kind, p) {
        ("power", Some(p)) => GeneratorKind::Power(p),
        ("power", None) => {
            return Err(Error::InvalidArgument {
                field: "p",
                reason: "the power generator needs an exponent".into(),
            })
        }
        (other, None) => other.parse()?,
        (_, Some(_)) => {
            return Err(Error::InvalidArgument {
                field: "p",
                reason: "an exponent is only accepted by the power generator".into(),
            })
        }
    };
    Generator::new(kind)
}

impl Generator {
    pub fn new(kind: GeneratorKind) -> Result<Self> {
        let domain = match kind {
            GeneratorKind::Quadratic | GeneratorKind::Exp | GeneratorKind::NegExp => DomainInterval::real_line(),
            GeneratorKind::XLogX | GeneratorKind::NegLog => DomainInterval::positive(),
            GeneratorKind::Power(p) => {
                if !(p.is_finite() && p > 1.0 && p != 2.0) {
                    return Err(Error::InvalidPower(p));
                }
                DomainInterval::positive()
            }
        };
        Ok(Generator { kind, domain })
    }

    /// All shipped generators, with the power family at `p = 1.5` and `p = 3`.
    pub fn shipped() -> Vec<Generator> {
        [
            GeneratorKind::Quadratic,
            GeneratorKind::Exp,
            GeneratorKind::NegExp,
            GeneratorKind::XLogX,
            GeneratorKind::NegLog,
            GeneratorKind::Power(1.5),
            GeneratorKind::Power(3.0),
        ]
        .into_iter()
        .map(|k| Generator::new(k).expect("shipped generators are valid"))
        .collect()
    }

    pub fn kind(&self) -> GeneratorKind {
        self.kind
    }

    pub fn name(&self) -> String {
        self.kind.name()
    }

    pub fn domain(&self) -> DomainInterval {
        self.domain
    }

    /// Every shipped kind has closed-form `h` and `H`.
    pub fn h_closed_form(&self) -> bool {
        true
    }

    /// Constant sign of `φ'''` on the interior.
    pub fn phi3_sign(&self) -> i8 {
        match self.kind {
            GeneratorKind::Quadratic => 0,
            GeneratorKind::Exp => 1,
            GeneratorKind::NegExp | GeneratorKind::XLogX | GeneratorKind::NegLog => -1,
            GeneratorKind::Power(p) => {
                if p > 2.0 {
                    1
                } else {
                    -1
                }
            }
        }
    }

    pub fn phi(&self, x: f64) -> f64 {
        match self.kind {
            GeneratorKind::Quadratic => 0.5 * x * x,
            GeneratorKind::Exp => x.exp(),
            GeneratorKind::NegExp => (-x).exp(),
            GeneratorKind::XLogX => x * x.ln(),
            GeneratorKind::NegLog => -x.ln(),
            GeneratorKind::Power(p) => x.powf(p),
        }
    }

    pub fn phi1(&self, x: f64) -> f64 {
        match self.kind {
            GeneratorKind::Quadratic => x,
            GeneratorKind::Exp => x.exp(),
            GeneratorKind::NegExp => -(-x).exp(),
            GeneratorKind::XLogX => x.ln() + 1.0,
            GeneratorKind::NegLog => -1.0 / x,
            GeneratorKind::Power(p) => p * x.powf(p - 1.0),
        }
    }

    pub fn phi2(&self, x: f64) -> f64 {
        match self.kind {
            GeneratorKind::Quadratic => 1.0,
            GeneratorKind::Exp => x.exp(),
            GeneratorKind::NegExp => (-x).exp(),
            GeneratorKind::XLogX => 1.0 / x,
            GeneratorKind::NegLog => 1.0 / (x * x),
            GeneratorKind::Power(p) => p * (p - 1.0) * x.powf(p - 2.0),
        }
    }

    pub fn phi3(&self, x: f64) -> f64 {
        match self.kind {
            GeneratorKind::Quadratic => 0.0,
            GeneratorKind::Exp => x.exp(),
            GeneratorKind::NegExp => -(-x).exp(),
            GeneratorKind::XLogX => -1.0 / (x * x),
            GeneratorKind::NegLog => -2.0 / (x * x * x),
            GeneratorKind::Power(p) => p * (p - 1.0) * (p - 2.0) * x.powf(p - 3.0),
        }
    }

    /// `h'(x) = sqrt(φ''(x))`.
    pub fn h_prime(&self, x: f64) -> f64 {
        self.phi2(x).sqrt()
    }

    /// Closed-form `h`, normalised so that `h' = sqrt(φ'')`.
    pub fn h(&self, x: f64) -> f64 {
        match self.kind {
            GeneratorKind::Quadratic => x,
            GeneratorKind::Exp => 2.0 * (0.5 * x).exp(),
            GeneratorKind::NegExp => -2.0 * (-0.5 * x).exp(),
            GeneratorKind::XLogX => 2.0 * x.sqrt(),
            GeneratorKind::NegLog => x.ln(),
            GeneratorKind::Power(p) => power_h_scale(p) * x.powf(0.5 * p),
        }
    }

    /// Closed-form `H = h⁻¹`. Only meaningful on [`Generator::h_image`].
    pub fn h_inv(&self, u: f64) -> f64 {
        match self.kind {
            GeneratorKind::Quadratic => u,
            GeneratorKind::Exp => 2.0 * (0.5 * u).ln(),
            GeneratorKind::NegExp => -2.0 * (-0.5 * u).ln(),
            GeneratorKind::XLogX => 0.25 * u * u,
            GeneratorKind::NegLog => u.exp(),
            GeneratorKind::Power(p) => (u / power_h_scale(p)).powf(2.0 / p),
        }
    }

    /// The open interval `h(J)`.
    pub fn h_image(&self) -> DomainInterval {
        match self.kind {
            GeneratorKind::Quadratic | GeneratorKind::NegLog => DomainInterval::real_line(),
            GeneratorKind::Exp | GeneratorKind::XLogX | GeneratorKind::Power(_) => DomainInterval::positive(),
            GeneratorKind::NegExp => DomainInterval::negative(),
        }
    }

    /// Reference point for the numeric transform: 0 when it is interior, else 1.
    pub fn reference_point(&self) -> f64 {
        if self.domain.contains_guarded(0.0) {
            0.0
        } else {
            1.0
        }
    }

    pub fn check_value(&self, field: &'static str, x: f64) -> Result<()> {
        if self.domain.contains_guarded(x) {
            Ok(())
        } else {
            Err(Error::OutOfDomain {
                field,
                value: x,
                domain: self.domain.to_string(),
            })
        }
    }

    pub fn check_point(&self, field: &'static str, x: &Point) -> Result<()> {
        if x.dim() == 0 {
            return Err(Error::DimensionMismatch { expected: 1, found: 0 });
        }
        x.iter().try_for_each(|&v| self.check_value(field, v))
    }

    /// `H(u)` with the image and the resulting domain point checked.
    pub fn h_inv_checked(&self, field: &'static str, u: f64) -> Result<f64> {
        if !self.h_image().contains(u) {
            return Err(Error::OutOfRange { field, value: u });
        }
        let x = self.h_inv(u);
        if !self.domain.contains_guarded(x) {
            return Err(Error::OutOfRange { field, value: u });
        }
        Ok(x)
    }

    /// Componentwise `h` of a point, after a domain check.
    pub fn h_point(&self, field: &'static str, x: &Point) -> Result<Vec<f64>> {
        self.check_point(field, x)?;
        Ok(x.iter().map(|&v| self.h(v)).collect())
    }

    /// Componentwise `H` of an `h`-space vector.
    pub fn h_inv_point(&self, field: &'static str, u: &[f64]) -> Result<Point> {
        u.iter().map(|&v| self.h_inv_checked(field, v)).collect()
    }
}

impl FromStr for Generator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Generator::new(s.parse()?)
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.kind.fmt(f)
    }
}

// h(x) = (2/p) sqrt(p(p-1)) x^{p/2}
fn power_h_scale(p: f64) -> f64 {
    2.0 / p * (p * (p - 1.0)).sqrt()
}

fn quad_cfg() -> QuadratureConfig {
    QuadratureConfig {
        abs_tol: 1e-15,
        rel_tol: 1e-13,
        max_intervals: 4000,
    }
}

/// `∫_{x_ref}^{x} sqrt(φ''(t)) dt` by adaptive quadrature.
pub fn h_numeric(gen: &Generator, x: f64, x_ref: f64) -> Result<f64> {
    gen.check_value("x", x)?;
    gen.check_value("x_ref", x_ref)?;
    numeric::integrate(|t| gen.h_prime(t), x_ref, x, quad_cfg())
}

const MAX_EXPANSIONS: usize = 200;
const MAX_NEWTON: usize = 200;

/// Solves `h_numeric(gen, x, x_ref) = u` for `x`: the bracket is grown away
/// from `x_ref` one quadrature panel at a time, then refined by safeguarded
/// Newton (`d/dx h = sqrt(φ'')`).
pub fn inverse_h_numeric(gen: &Generator, u: f64, x_ref: f64) -> Result<f64> {
    gen.check_value("x_ref", x_ref)?;
    if !u.is_finite() {
        return Err(Error::OutOfRange { field: "u", value: u });
    }
    if u == 0.0 {
        return Ok(x_ref);
    }
    let domain = gen.domain();
    let upward = u > 0.0;
    let out_of_range = || Error::OutOfRange { field: "u", value: u };

    let mut cur = x_ref;
    let mut acc = 0.0;
    let mut step = 1.0_f64;
    for _ in 0..MAX_EXPANSIONS {
        let next = if upward {
            if domain.lower.is_finite() {
                cur + cur.max(1.0)
            } else {
                cur + step
            }
        } else if domain.lower.is_finite() {
            let half = domain.lower + 0.5 * (cur - domain.lower);
            if half - domain.lower <= BOUNDARY_GUARD {
                return Err(out_of_range());
            }
            half
        } else {
            cur - step
        };
        step *= 2.0;
        if !domain.contains_guarded(next) {
            return Err(out_of_range());
        }
        let piece = numeric::integrate(|t| gen.h_prime(t), cur, next, quad_cfg())?;
        let acc_next = acc + piece;
        let crossed = if upward { acc_next >= u } else { acc_next <= u };
        if crossed {
            // Increasing orientation: left end `lo` with known h-value `h_lo`.
            let (lo, hi, h_lo) = if upward {
                (cur, next, acc)
            } else {
                (next, cur, acc_next)
            };
            return numeric::safeguarded_newton(
                |x| Ok(h_lo + numeric::integrate(|t| gen.h_prime(t), lo, x, quad_cfg())? - u),
                |x| gen.h_prime(x),
                lo,
                hi,
                1e-15,
                MAX_NEWTON,
            );
        }
        if piece.abs() <= 1e-16 * acc_next.abs() {
            // The image of h is bounded on this side.
            return Err(out_of_range());
        }
        cur = next;
        acc = acc_next;
    }
    Err(out_of_range())
}

/// Worst relative residuals of finite-difference derivative checks.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeReport {
    /// `[φ', φ'', φ''']` worst residuals over the sampled points.
    pub worst_residual: [f64; 3],
    /// Whether `φ'''` carried the declared sign at every sampled point.
    pub phi3_sign_consistent: bool,
}

impl DerivativeReport {
    pub fn max_residual(&self) -> f64 {
        self.worst_residual.iter().copied().fold(0.0, f64::max)
    }
}

fn relative_residual(approx: f64, exact: f64) -> f64 {
    let scale = if exact != 0.0 { exact.abs() } else { 1.0 };
    (approx - exact).abs() / scale
}

/// Confirms the hand-coded derivatives with central differences: each order
/// is differenced from the closed form one order below (`φ → φ'`, `φ' → φ''`,
/// `φ'' → φ'''`), which keeps round-off at `O(ε_mach / eps)`.
pub fn check_derivatives(gen: &Generator, xs: &[f64], eps: f64) -> Result<DerivativeReport> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument {
            field: "eps",
            reason: "must be positive".into(),
        });
    }
    let mut worst = [0.0_f64; 3];
    let mut sign_ok = true;
    for &x in xs {
        gen.check_value("xs", x)?;
        gen.check_value("xs", x - eps)?;
        gen.check_value("xs", x + eps)?;
        let d1 = numeric::central_difference(|t| gen.phi(t), x, eps);
        let d2 = numeric::central_difference(|t| gen.phi1(t), x, eps);
        let d3 = numeric::central_difference(|t| gen.phi2(t), x, eps);
        worst[0] = worst[0].max(relative_residual(d1, gen.phi1(x)));
        worst[1] = worst[1].max(relative_residual(d2, gen.phi2(x)));
        worst[2] = worst[2].max(relative_residual(d3, gen.phi3(x)));
        let p3 = gen.phi3(x);
        let sign = if p3 > 0.0 {
            1
        } else if p3 < 0.0 {
            -1
        } else {
            0
        };
        sign_ok &= sign == gen.phi3_sign();
    }
    Ok(DerivativeReport {
        worst_residual: worst,
        phi3_sign_consistent: sign_ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    fn gen(kind: GeneratorKind) -> Generator {
        Generator::new(kind).unwrap()
    }

    #[test]
    fn kind_names_round_trip() {
        for g in Generator::shipped() {
            let parsed: Generator = g.name().parse().unwrap();
            assert_eq!(parsed, g);
        }
        assert_eq!(GeneratorKind::Power(1.5).name(), "power:1.5");
        assert_eq!(GeneratorKind::Power(3.0).name(), "power:3");
    }

    #[test]
    fn rejects_unknown_kinds_and_bad_powers() {
        assert!(matches!("cosh".parse::<Generator>(), Err(Error::UnknownKind(_))));
        assert!(matches!("power:x".parse::<Generator>(), Err(Error::UnknownKind(_))));
        assert_eq!(make_generator("power", Some(2.0)), Err(Error::InvalidPower(2.0)));
        assert_eq!(make_generator("power", Some(1.0)), Err(Error::InvalidPower(1.0)));
        assert_eq!(make_generator("power", Some(0.5)), Err(Error::InvalidPower(0.5)));
        assert!(make_generator("power", None).is_err());
        assert!(make_generator("exp", Some(3.0)).is_err());
        assert!(make_generator("power", Some(3.0)).is_ok());
    }

    #[test]
    fn table_values() {
        let neglog = make_generator("neglog", None).unwrap();
        assert_eq!(neglog.h(E), 1.0);
        assert!((neglog.h_inv(2.0) - E * E).abs() < 1e-12);
        assert_eq!(gen(GeneratorKind::Quadratic).h(1.0), 1.0);
        assert_eq!(gen(GeneratorKind::XLogX).h(4.0), 4.0);
        let p = gen(GeneratorKind::Power(3.0));
        // (2/3) sqrt(6) x^{3/2} at x = 4
        assert!((p.h(4.0) - 2.0 / 3.0 * 6f64.sqrt() * 8.0).abs() < 1e-12);
    }

    #[test]
    fn phi3_signs() {
        let signs: Vec<i8> = Generator::shipped().iter().map(|g| g.phi3_sign()).collect();
        assert_eq!(signs, vec![0, 1, -1, -1, -1, -1, 1]);
    }

    #[test]
    fn domain_membership_and_guard() {
        let d = DomainInterval::positive();
        assert!(!d.contains(0.0));
        assert!(d.contains(1e-13));
        assert!(!d.contains_guarded(1e-13));
        assert!(d.contains_guarded(1e-11));
        assert!(!d.contains(f64::NAN));
        let closed = DomainInterval::new(0.0, 1.0, false, false).unwrap();
        assert!(closed.contains(0.0) && closed.contains(1.0));
        assert!(DomainInterval::new(1.0, 1.0, true, true).is_err());
    }

    #[test]
    fn h_numeric_examples() {
        let neglog = gen(GeneratorKind::NegLog);
        assert!((h_numeric(&neglog, E, 1.0).unwrap() - 1.0).abs() < 1e-12);
        let quad = gen(GeneratorKind::Quadratic);
        assert_eq!(h_numeric(&quad, 0.3, 0.3).unwrap(), 0.0);
        let xlogx = gen(GeneratorKind::XLogX);
        assert!((h_numeric(&xlogx, 4.0, 1.0).unwrap() - 2.0).abs() < 1e-12);
        assert!(matches!(h_numeric(&neglog, -1.0, 1.0), Err(Error::OutOfDomain { .. })));
    }

    #[test]
    fn inverse_h_numeric_examples() {
        let neglog = gen(GeneratorKind::NegLog);
        assert_eq!(inverse_h_numeric(&neglog, 0.0, 1.0).unwrap(), 1.0);
        assert!((inverse_h_numeric(&neglog, 2.0, 1.0).unwrap() - E * E).abs() < 1e-10);
        let exp = gen(GeneratorKind::Exp);
        let u = exp.h(1.0) - exp.h(0.0);
        assert!((inverse_h_numeric(&exp, u, 0.0).unwrap() - 1.0).abs() < 1e-12);
        let x = inverse_h_numeric(&exp, -1.5, 0.0).unwrap();
        assert!((x - exp.h_inv(exp.h(0.0) - 1.5)).abs() < 1e-10);
    }

    #[test]
    fn inverse_h_numeric_out_of_range() {
        // h(x) - h(0) = 2e^{x/2} - 2 > -2 for exp.
        let exp = gen(GeneratorKind::Exp);
        assert!(matches!(
            inverse_h_numeric(&exp, -2.5, 0.0),
            Err(Error::OutOfRange { .. })
        ));
        // 2 sqrt(x) - 2 > -2 for xlogx.
        let xlogx = gen(GeneratorKind::XLogX);
        assert!(matches!(
            inverse_h_numeric(&xlogx, -2.5, 1.0),
            Err(Error::OutOfRange { .. })
        ));
        let ne = gen(GeneratorKind::NegExp);
        assert!(matches!(
            inverse_h_numeric(&ne, 2.5, 0.0),
            Err(Error::OutOfRange { .. })
        ));
    }

    #[test]
    fn derivative_checks() {
        let quad = gen(GeneratorKind::Quadratic);
        let r = check_derivatives(&quad, &[-1.0, 0.0, 2.0], 1e-4).unwrap();
        assert!(r.max_residual() <= 1e-5);
        assert_eq!(r.worst_residual[2], 0.0);
        assert!(r.phi3_sign_consistent);

        let neglog = gen(GeneratorKind::NegLog);
        let r = check_derivatives(&neglog, &[0.5, 1.0, 10.0], 1e-5).unwrap();
        assert!(r.max_residual() <= 1e-5, "{r:?}");

        let p = gen(GeneratorKind::Power(1.5));
        let r = check_derivatives(&p, &[1.0, 4.0], 1e-5).unwrap();
        assert!(r.phi3_sign_consistent && p.phi3_sign() == -1);
        assert!(p.phi3(1.0) < 0.0 && p.phi3(4.0) < 0.0);

        assert!(check_derivatives(&neglog, &[1e-6], 1e-5).is_err());
    }
}
