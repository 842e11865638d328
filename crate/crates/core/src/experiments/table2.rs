//! The conditional expectation written with the unnormalised `h` of the
//! classical tables, compared with `H(E[h(X) | G])`.

use crate::error::Result;
use crate::finite_probability::{conditional_expectation_vector, FiniteProbSpace, Partition, RandomVector};
use crate::generators::{Generator, GeneratorKind};
use crate::prediction::d_conditional_expectation;

use super::ExperimentResult;

/// Relative agreement required between the two routes.
pub const TABLE_TOLERANCE: f64 = 1e-10;

type Map = Box<dyn Fn(f64) -> f64>;

/// `E_d[X | G]` by the textbook closed form for each kind: `E[X|G]`,
/// `2 ln E[e^{X/2}|G]`, `−2 ln E[e^{−X/2}|G]`, `(E[√X|G])²`,
/// `exp E[ln X|G]` and `(E[X^{p/2}|G])^{2/p}`.
pub fn table_closed_form(
    gen: &Generator,
    space: &FiniteProbSpace,
    x: &RandomVector,
    part: &Partition,
) -> Result<RandomVector> {
    for pt in x.values() {
        gen.check_point("X", pt)?;
    }
    let (forward, back): (Map, Map) = match gen.kind() {
        GeneratorKind::Quadratic => (Box::new(|v| v), Box::new(|m| m)),
        GeneratorKind::Exp => (Box::new(|v| (0.5 * v).exp()), Box::new(|m: f64| 2.0 * m.ln())),
        GeneratorKind::NegExp => (Box::new(|v| (-0.5 * v).exp()), Box::new(|m: f64| 2.0 * (1.0 / m).ln())),
        GeneratorKind::XLogX => (Box::new(f64::sqrt), Box::new(|m| m * m)),
        GeneratorKind::NegLog => (Box::new(f64::ln), Box::new(f64::exp)),
        GeneratorKind::Power(p) => (
            Box::new(move |v: f64| v.powf(0.5 * p)),
            Box::new(move |m: f64| m.powf(2.0 / p)),
        ),
    };
    let mapped = RandomVector::new(
        x.values()
            .iter()
            .map(|pt| pt.iter().map(|&v| forward(v)).collect())
            .collect(),
    )?;
    let inner = conditional_expectation_vector(space, &mapped, part)?;
    RandomVector::new(
        inner
            .values()
            .iter()
            .map(|pt| pt.iter().map(|&m| back(m)).collect())
            .collect(),
    )
}

/// One row per outcome and coordinate with both routes and their relative
/// residual.
pub fn table_reproduction(
    gen: &Generator,
    space: &FiniteProbSpace,
    x: &RandomVector,
    part: &Partition,
) -> Result<ExperimentResult> {
    let via_h = d_conditional_expectation(gen, space, x, part)?;
    let closed = table_closed_form(gen, space, x, part)?;
    let mut result = ExperimentResult::new(
        "table2",
        &[
            "generator",
            "outcome",
            "coordinate",
            "via_h",
            "closed_form",
            "rel_residual",
            "agree",
        ],
        0,
        gen.name(),
    );
    for (w, (a, b)) in via_h.values().iter().zip(closed.values()).enumerate() {
        for (i, (&u, &v)) in a.iter().zip(b.iter()).enumerate() {
            let rel = (u - v).abs() / u.abs().max(v.abs()).max(1.0);
            result.push(vec![
                gen.name().into(),
                w.into(),
                i.into(),
                u.into(),
                v.into(),
                rel.into(),
                (rel <= TABLE_TOLERANCE).into(),
            ]);
        }
    }
    Ok(result)
}
