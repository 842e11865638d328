//! The seeded property suite behind `divgeo verify`.
//!
//! Gated properties must hold on every instance. Claims listed as ungated are
//! evaluated and reported in their literal form but do not affect the verdict.

use rand::RngCore;

use crate::divergence::{bregman_point, integral_identity_residual};
use crate::error::Result;
use crate::finite_probability::RandomVector;
use crate::generators::{check_derivatives, h_numeric, inverse_h_numeric, Generator, GeneratorKind};
use crate::geometry::{
    closest_point_to_set, compare_divergence_distance, distance, geodesic, geodesic_ode_oracle, midpoint,
    semi_parallelogram_residual,
};
use crate::point::Point;
use crate::prediction::{
    compare_random_vectors, condexp_properties_check, d_mean, distance_objective, group_invariance_check,
    intertwining_residual, multiplicative_linearity_check, prediction_error_compare,
};
use crate::rng::stream_rng;

use super::instances::{nested_partitions, ordered_pair, random_point, random_space, random_value, random_vector};
use super::table2::table_reproduction;
use super::ExperimentResult;

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyOutcome {
    pub name: &'static str,
    pub gated: bool,
    pub cases: usize,
    pub failures: usize,
    pub max_residual: f64,
}

impl PropertyOutcome {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub generator: String,
    pub seed: u64,
    pub outcomes: Vec<PropertyOutcome>,
}

impl VerifyReport {
    /// True when every gated property held.
    pub fn passed(&self) -> bool {
        self.outcomes.iter().filter(|o| o.gated).all(PropertyOutcome::passed)
    }

    pub fn outcome(&self, name: &str) -> Option<&PropertyOutcome> {
        self.outcomes.iter().find(|o| o.name == name)
    }

    pub fn to_result(&self) -> ExperimentResult {
        let mut res = ExperimentResult::new(
            "verify",
            &["property", "gated", "cases", "failures", "max_residual", "passed"],
            self.seed,
            self.generator.clone(),
        );
        for o in &self.outcomes {
            res.push(vec![
                o.name.into(),
                o.gated.into(),
                o.cases.into(),
                o.failures.into(),
                o.max_residual.into(),
                o.passed().into(),
            ]);
        }
        res
    }
}

struct Tally {
    name: &'static str,
    gated: bool,
    cases: usize,
    failures: usize,
    max_residual: f64,
}

impl Tally {
    fn new(name: &'static str, gated: bool) -> Self {
        Tally {
            name,
            gated,
            cases: 0,
            failures: 0,
            max_residual: 0.0,
        }
    }

    /// Records a residual checked against `tol`.
    fn residual(&mut self, r: f64, tol: f64) {
        self.cases += 1;
        if r.is_nan() {
            self.max_residual = f64::NAN;
        } else {
            self.max_residual = self.max_residual.max(r);
        }
        if !(r <= tol) {
            self.failures += 1;
        }
    }

    fn check(&mut self, ok: bool) {
        self.cases += 1;
        if !ok {
            self.failures += 1;
        }
    }

    fn finish(self) -> PropertyOutcome {
        PropertyOutcome {
            name: self.name,
            gated: self.gated,
            cases: self.cases,
            failures: self.failures,
            max_residual: self.max_residual,
        }
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

/// Number of seeded instances per property.
pub const DEFAULT_CASES: usize = 200;

/// Runs the suite for one generator. Each property draws from its own stream
/// of `seed`, so adding properties does not perturb the others.
pub fn verify(gen: &Generator, seed: u64, cases: usize) -> Result<VerifyReport> {
    let mut outcomes = Vec::new();
    let mut stream = 0u64;
    let mut next_rng = || {
        stream += 1;
        stream_rng(seed, stream)
    };

    let mut rng = next_rng();
    let mut t = Tally::new("derivatives", true);
    let xs: Vec<f64> = (0..cases.min(50)).map(|_| random_value(gen, &mut rng)).collect();
    let rep = check_derivatives(gen, &xs, 1e-5)?;
    t.residual(rep.worst_residual.iter().cloned().fold(0.0, f64::max), 1e-6);
    t.check(rep.phi3_sign_consistent);
    outcomes.push(t.finish());

    let mut rng = next_rng();
    let mut t = Tally::new("transform_fidelity", true);
    let x_ref = gen.reference_point();
    for _ in 0..cases.min(50) {
        let x = random_value(gen, &mut rng);
        let numeric = h_numeric(gen, x, x_ref)?;
        t.residual(rel(gen.h(x) - gen.h(x_ref), numeric), 1e-8);
        let back = inverse_h_numeric(gen, numeric, x_ref)?;
        t.residual(rel(back, x), 1e-8);
        t.residual(rel(gen.h_inv(gen.h(x)), x), 1e-10);
    }
    outcomes.push(t.finish());

    let mut rng = next_rng();
    let mut t = Tally::new("divergence_nonnegative", true);
    let mut ident = Tally::new("divergence_integral_identity", true);
    for _ in 0..cases {
        let x = random_point(gen, 2, &mut rng);
        let y = random_point(gen, 2, &mut rng);
        let d = bregman_point(gen, &x, &y)?;
        t.check(d >= 0.0 && bregman_point(gen, &x, &x)? == 0.0);
        ident.residual(integral_identity_residual(gen, x[0], y[0])? / (1.0 + d), 1e-9);
    }
    outcomes.push(t.finish());
    outcomes.push(ident.finish());

    let mut rng = next_rng();
    let mut t = Tally::new("metric_axioms", true);
    for _ in 0..cases {
        let x = random_point(gen, 3, &mut rng);
        let y = random_point(gen, 3, &mut rng);
        let z = random_point(gen, 3, &mut rng);
        let (dxy, dyx) = (distance(gen, &x, &y)?, distance(gen, &y, &x)?);
        let (dxz, dzy) = (distance(gen, &x, &z)?, distance(gen, &z, &y)?);
        t.residual((dxy - dyx).abs(), 1e-12 * dxy.max(1.0));
        t.residual((dxy - dxz - dzy).max(0.0), 1e-12 * dxy.max(1.0));
        t.residual(distance(gen, &x, &x)?, 0.0);
        t.check(dxy > 0.0 || x == y);
    }
    outcomes.push(t.finish());

    let mut rng = next_rng();
    let mut t = Tally::new("geodesic_ode_oracle", true);
    for _ in 0..cases.min(5) {
        let x = random_point(gen, 2, &mut rng);
        let y = random_point(gen, 2, &mut rng);
        let path = geodesic(gen, &x, &y)?;
        let ode = geodesic_ode_oracle(gen, &x, &y, 1000)?;
        let mut sup = 0.0f64;
        for (ti, p) in ode.t.iter().zip(&ode.points) {
            sup = sup.max(path.sample(*ti)?.max_abs_diff(p));
        }
        t.residual(sup, 1e-6);
        t.residual(path.sample(0.0)?.max_abs_diff(&x), 1e-12);
        t.residual(rel(path.sample(1.0)?.max_abs_diff(&y), 0.0), 1e-10);
    }
    outcomes.push(t.finish());

    let mut rng = next_rng();
    let mut t = Tally::new("divergence_vs_distance_ordered", true);
    for _ in 0..cases {
        let (x, y) = ordered_pair(gen, 1, &mut rng);
        let (x, y) = if rng.next_u32() % 2 == 0 { (x, y) } else { (y, x) };
        t.check(compare_divergence_distance(gen, &x, &y)?.satisfied);
    }
    outcomes.push(t.finish());

    let mut rng = next_rng();
    let mut t = Tally::new("semi_parallelogram", true);
    let mut mid = Tally::new("midpoint", true);
    for _ in 0..cases {
        let x = random_point(gen, 2, &mut rng);
        let y = random_point(gen, 2, &mut rng);
        let v = random_point(gen, 2, &mut rng);
        let scale = distance(gen, &v, &x)?.powi(2) + distance(gen, &v, &y)?.powi(2);
        t.residual(
            semi_parallelogram_residual(gen, &x, &y, &v)?.abs() / scale.max(1.0),
            1e-9,
        );
        let z = midpoint(gen, &x, &y)?;
        let half = 0.5 * distance(gen, &x, &y)?;
        mid.residual(
            (distance(gen, &x, &z)? - half)
                .abs()
                .max((distance(gen, &y, &z)? - half).abs()),
            1e-10 * half.max(1.0),
        );
    }
    outcomes.push(t.finish());
    outcomes.push(mid.finish());

    let mut rng = next_rng();
    let mut inter = Tally::new("intertwining", true);
    let mut props = Tally::new("conditional_expectation_properties", true);
    let mut mean_min = Tally::new("d_mean_minimizes", true);
    let mut cmp = Tally::new("random_vector_comparison_ordered", true);
    let mut table = Tally::new("table2_closed_forms", true);
    for _ in 0..cases {
        let n = 2 + (rng.next_u32() % 10) as usize;
        let space = random_space(n, &mut rng);
        let x = random_vector(gen, n, 2, &mut rng);
        let (fine, coarse) = nested_partitions(n, &mut rng);
        inter.residual(intertwining_residual(gen, &space, &x, &fine)?, 1e-10);
        props.residual(
            condexp_properties_check(gen, &space, &x, &fine, &coarse)?.max_residual(),
            1e-10,
        );

        let m = d_mean(gen, &space, &x)?;
        let best = distance_objective(gen, &space, &x, &m)?;
        let v: Point = m
            .iter()
            .map(|&c| {
                let u = gen.h(c) + 0.1 * (rng.next_u32() as f64 / u32::MAX as f64 - 0.5);
                if gen.h_image().contains(u) {
                    gen.h_inv(u)
                } else {
                    c
                }
            })
            .collect();
        mean_min.check(best <= distance_objective(gen, &space, &x, &v)? + 1e-12 * best.max(1.0));

        let bumps = random_vector(gen, n, 2, &mut rng);
        let (lo, hi): (Vec<Point>, Vec<Point>) = x
            .values()
            .iter()
            .zip(bumps.values())
            .map(|(a, b)| {
                let l: Point = a.iter().zip(b.iter()).map(|(s, t)| s.min(*t)).collect();
                let h: Point = a.iter().zip(b.iter()).map(|(s, t)| s.max(*t)).collect();
                (l, h)
            })
            .unzip();
        let (lo, hi) = (RandomVector::new(lo)?, RandomVector::new(hi)?);
        let r = compare_random_vectors(gen, &space, &hi, &lo)?;
        cmp.check(r.satisfied);
        let r = compare_random_vectors(gen, &space, &lo, &hi)?;
        cmp.check(r.satisfied);

        let tab = table_reproduction(gen, &space, &x, &fine)?;
        for r in tab.column("rel_residual") {
            table.residual(r, 1e-10);
        }
    }
    for t in [inter, props, mean_min, cmp, table] {
        outcomes.push(t.finish());
    }

    let mut rng = next_rng();
    match gen.kind() {
        GeneratorKind::Quadratic | GeneratorKind::NegLog => {
            let mut t = Tally::new("group_invariance", true);
            for _ in 0..cases {
                let x = random_point(gen, 2, &mut rng);
                let y = random_point(gen, 2, &mut rng);
                let v = random_point(gen, 2, &mut rng);
                let rep = group_invariance_check(gen, &x, &y, &v)?;
                t.residual(rep.translation_residual.max(rep.inverse_norm_residual), 1e-10);
            }
            outcomes.push(t.finish());
        }
        _ => {}
    }
    if gen.kind() == GeneratorKind::NegLog {
        let mut t = Tally::new("multiplicative_linearity", true);
        let exps = [-1.0, 0.5, 1.0, 2.0];
        for i in 0..cases {
            let n = 2 + (rng.next_u32() % 10) as usize;
            let space = random_space(n, &mut rng);
            let x1 = random_vector(gen, n, 2, &mut rng);
            let x2 = random_vector(gen, n, 2, &mut rng);
            let (part, _) = nested_partitions(n, &mut rng);
            let (a1, a2) = (exps[i % 4], exps[(i / 4) % 4]);
            t.residual(multiplicative_linearity_check(&space, &x1, &x2, a1, a2, &part)?, 1e-10);
        }
        outcomes.push(t.finish());
    }

    // Literal statements recorded for audit only.
    let mut rng = next_rng();
    let mut unordered = Tally::new("claim_divergence_vs_distance_any_order", false);
    let mut cloud = Tally::new("claim_closest_point_costs", false);
    let mut pred = Tally::new("claim_prediction_error_ordering", false);
    for _ in 0..cases {
        let x = random_point(gen, 1, &mut rng);
        let y = random_point(gen, 1, &mut rng);
        let rec = compare_divergence_distance(gen, &x, &y)?;
        let tol = 1e-12 * rec.divergence.max(rec.half_distance_sq).max(1.0);
        unordered.check(match gen.phi3_sign() {
            0 => (rec.divergence - rec.half_distance_sq).abs() <= tol,
            s if s > 0 => rec.divergence <= rec.half_distance_sq + tol,
            _ => rec.divergence >= rec.half_distance_sq - tol,
        });

        let pts: Vec<Point> = (0..5).map(|_| random_point(gen, 2, &mut rng)).collect();
        let cp = closest_point_to_set(gen, &pts)?;
        let half = 0.5 * cp.distance_cost;
        let tol = 1e-12 * cp.divergence_cost.max(half).max(1.0);
        cloud.check(match gen.phi3_sign() {
            0 => (cp.divergence_cost - half).abs() <= tol,
            s if s > 0 => cp.divergence_cost <= half + tol,
            _ => cp.divergence_cost >= half - tol,
        });

        let n = 2 + (rng.next_u32() % 10) as usize;
        let space = random_space(n, &mut rng);
        let x = random_vector(gen, n, 1, &mut rng);
        let (part, _) = nested_partitions(n, &mut rng);
        pred.check(prediction_error_compare(gen, &space, &x, &part)?.ordering_satisfied);
    }
    outcomes.push(unordered.finish());
    outcomes.push(cloud.finish());
    outcomes.push(pred.finish());

    Ok(VerifyReport {
        generator: gen.name(),
        seed,
        outcomes,
    })
}
