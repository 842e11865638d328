//! Acceptance suite. Runs every criterion, prints one line each, and exits
//! nonzero if any criterion fails.

use std::process::{Command, ExitCode};

use divgeo::experiments::instances::{
    nested_partitions, ordered_pair, random_partition, random_point, random_space, random_value, random_vector,
};
use divgeo::experiments::{
    asset_experiment, lln_experiment, table_reproduction, variance_unbiasedness_experiment, AssetModel, Sampler,
};
use divgeo::generators::{h_numeric, inverse_h_numeric};
use divgeo::geometry::{
    compare_divergence_distance, distance, geodesic, geodesic_ode_oracle, midpoint, semi_parallelogram_residual,
};
use divgeo::prediction::{
    condexp_properties_check, d_conditional_expectation, d_mean, group_invariance_check, intertwining_residual,
    multiplicative_linearity_check, prediction_error_compare,
};
use divgeo::rng::stream_rng;
use divgeo::{Generator, GeneratorKind, Partition, Point};
use rand::Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn lib<T>(r: divgeo::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

fn p(v: &[f64]) -> Point {
    Point::from(v)
}

fn transform_fidelity() -> Outcome {
    let mut worst = (0.0f64, 0.0f64, 0.0f64);
    for (g, gen) in Generator::shipped().iter().enumerate() {
        let mut rng = stream_rng(1, g as u64);
        let x_ref = gen.reference_point();
        for _ in 0..100 {
            let x = random_value(gen, &mut rng);
            let closed = gen.h(x) - gen.h(x_ref);
            let numeric = lib(h_numeric(gen, x, x_ref))?;
            worst.0 = worst.0.max(rel(closed, numeric));
            let back = lib(inverse_h_numeric(gen, closed, x_ref))?;
            worst.1 = worst.1.max(rel(back, x));
            worst.2 = worst.2.max((gen.h_inv(gen.h(x)) - x).abs());
        }
    }
    ensure(
        worst.0 <= 1e-8 && worst.1 <= 1e-8 && worst.2 <= 1e-10,
        format!(
            "h rel {:.1e}, H rel {:.1e}, round trip {:.1e}",
            worst.0, worst.1, worst.2
        ),
    )
}

fn geodesic_oracle() -> Outcome {
    let mut worst = 0.0f64;
    let mut flat = 0.0f64;
    for (g, gen) in Generator::shipped().iter().enumerate() {
        let mut rng = stream_rng(2, g as u64);
        for _ in 0..20 {
            let x = random_point(gen, 2, &mut rng);
            let y = random_point(gen, 2, &mut rng);
            let path = lib(geodesic(gen, &x, &y))?;
            let ode = lib(geodesic_ode_oracle(gen, &x, &y, 1000))?;
            let mut sup = 0.0f64;
            for (t, q) in ode.t.iter().zip(&ode.points) {
                sup = sup.max(lib(path.sample(*t))?.max_abs_diff(q));
            }
            if gen.kind() == GeneratorKind::Quadratic {
                flat = flat.max(sup);
            } else {
                worst = worst.max(sup);
            }
        }
    }
    ensure(
        worst <= 1e-6 && flat <= 1e-12,
        format!("sup deviation {worst:.1e}, quadratic {flat:.1e}"),
    )
}

fn divergence_vs_distance() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;
    for (g, gen) in Generator::shipped().iter().enumerate() {
        let mut rng = stream_rng(3, g as u64);
        let mut fails = 0;
        let mut flat = 0.0f64;
        for _ in 0..10_000 {
            // The bound's direction is sign(φ''') times the direction of
            // y − x; pairs are drawn with x < y, the case the bound covers.
            let (x, y) = ordered_pair(gen, 1, &mut rng);
            let rec = lib(compare_divergence_distance(gen, &x, &y))?;
            if gen.kind() == GeneratorKind::Quadratic {
                flat = flat.max((rec.divergence - rec.half_distance_sq).abs());
            } else {
                let s = gen.phi3_sign() as f64;
                if s * (rec.half_distance_sq - rec.divergence) < -1e-12 * rec.divergence.max(1.0) {
                    fails += 1;
                }
            }
        }
        ok &= fails == 0 && flat <= 1e-12;
        notes.push(format!("{} {fails}", gen.name()));
    }
    let exp: Generator = "exp".parse().unwrap();
    let e = lib(compare_divergence_distance(&exp, &p(&[0.0]), &p(&[1.0])))?;
    let xl: Generator = "xlogx".parse().unwrap();
    let q = lib(compare_divergence_distance(&xl, &p(&[1.0]), &p(&[4.0])))?;
    let spots = (e.divergence - 0.718282).abs() < 5e-7
        && (e.half_distance_sq - 0.841679).abs() < 5e-7
        && (q.divergence - 2.545177).abs() < 5e-7
        && (q.half_distance_sq - 2.0).abs() < 1e-12;
    ok &= spots && e.satisfied && q.satisfied;

    // Reported only: with x and y drawn independently, the fixed-direction
    // reading holds for about half the pairs.
    let mut rng = stream_rng(3, 99);
    let mut literal = 0;
    for _ in 0..10_000 {
        let x = random_point(&exp, 1, &mut rng);
        let y = random_point(&exp, 1, &mut rng);
        let rec = lib(compare_divergence_distance(&exp, &x, &y))?;
        if rec.divergence <= rec.half_distance_sq + 1e-12 {
            literal += 1;
        }
    }
    ensure(
        ok,
        format!(
            "ordered-pair failures [{}], spot values {}; unordered exp pairs meeting the fixed-direction bound: {literal}/10000",
            notes.join(", "),
            if spots { "match" } else { "MISMATCH" }
        ),
    )
}

fn semi_parallelogram() -> Outcome {
    let mut worst = 0.0f64;
    for (g, gen) in Generator::shipped().iter().enumerate() {
        let mut rng = stream_rng(4, g as u64);
        for _ in 0..1000 {
            let x = random_point(gen, 2, &mut rng);
            let y = random_point(gen, 2, &mut rng);
            let v = random_point(gen, 2, &mut rng);
            worst = worst.max(lib(semi_parallelogram_residual(gen, &x, &y, &v))?.abs());
        }
    }
    ensure(worst <= 1e-9, format!("max residual {worst:.1e}"))
}

fn midpoints() -> Outcome {
    let mut worst = 0.0f64;
    for (g, gen) in Generator::shipped().iter().enumerate() {
        let mut rng = stream_rng(5, g as u64);
        for _ in 0..1000 {
            let x = random_point(gen, 2, &mut rng);
            let y = random_point(gen, 2, &mut rng);
            let z = lib(midpoint(gen, &x, &y))?;
            let half = 0.5 * lib(distance(gen, &x, &y))?;
            worst = worst
                .max((lib(distance(gen, &x, &z))? - half).abs())
                .max((lib(distance(gen, &y, &z))? - half).abs());
        }
    }
    let neglog: Generator = "neglog".parse().unwrap();
    let m = lib(midpoint(&neglog, &p(&[1.0]), &p(&[4.0])))?[0];
    ensure(
        worst <= 1e-10 && (m - 2.0).abs() <= 1e-12,
        format!("max residual {worst:.1e}, neglog midpoint(1, 4) = {m}"),
    )
}

fn intertwining_and_properties() -> Outcome {
    let (mut inter, mut tower, mut reduce) = (0.0f64, 0.0f64, 0.0f64);
    for (g, gen) in Generator::shipped().iter().enumerate() {
        let mut rng = stream_rng(6, g as u64);
        for _ in 0..1000 {
            let n = rng.random_range(1..=12);
            let space = random_space(n, &mut rng);
            let x = random_vector(gen, n, 2, &mut rng);
            let (fine, coarse) = nested_partitions(n, &mut rng);
            inter = inter.max(lib(intertwining_residual(gen, &space, &x, &fine))?);
            let rep = lib(condexp_properties_check(gen, &space, &x, &fine, &coarse))?;
            tower = tower
                .max(rep.tower)
                .max(rep.measurability)
                .max(rep.monotonicity_violation);

            let mean = lib(d_mean(gen, &space, &x))?;
            let trivial = lib(d_conditional_expectation(gen, &space, &x, &Partition::trivial(n)))?;
            let discrete = lib(d_conditional_expectation(gen, &space, &x, &Partition::discrete(n)))?;
            for (w, v) in x.values().iter().enumerate() {
                for i in 0..v.dim() {
                    reduce = reduce
                        .max(rel(trivial.values()[w][i], mean[i]))
                        .max(rel(discrete.values()[w][i], v[i]));
                }
            }
        }
    }
    ensure(
        inter <= 1e-10 && tower <= 1e-10 && reduce <= 1e-12,
        format!("intertwining {inter:.1e}, tower {tower:.1e}, trivial/discrete reductions {reduce:.1e} (rel)"),
    )
}

fn prediction_ordering() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;
    for (g, gen) in Generator::shipped().iter().enumerate() {
        if gen.kind() == GeneratorKind::Quadratic {
            continue;
        }
        let mut rng = stream_rng(7, g as u64);
        let mut held = 0;
        for _ in 0..1000 {
            let n = rng.random_range(2..=12);
            let space = random_space(n, &mut rng);
            let x = random_vector(gen, n, 1, &mut rng);
            let part = random_partition(n, 4, &mut rng);
            if lib(prediction_error_compare(gen, &space, &x, &part))?.ordering_satisfied {
                held += 1;
            }
        }
        ok &= held == 1000;
        notes.push(format!("{} {held}/1000", gen.name()));
    }
    ensure(ok, format!("ordering held: {}", notes.join(", ")))
}

fn table2() -> Outcome {
    let mut worst = 0.0f64;
    let mut rows = 0;
    for (g, gen) in Generator::shipped().iter().enumerate() {
        let mut rng = stream_rng(8, g as u64);
        for _ in 0..200 {
            let n = rng.random_range(1..=10);
            let space = random_space(n, &mut rng);
            let x = random_vector(gen, n, 2, &mut rng);
            let part = random_partition(n, 4, &mut rng);
            for r in lib(table_reproduction(gen, &space, &x, &part))?.column("rel_residual") {
                worst = worst.max(r);
                rows += 1;
            }
        }
    }
    ensure(
        worst <= 1e-10,
        format!("{rows} rows, max relative residual {worst:.1e}"),
    )
}

fn estimators() -> Outcome {
    let neglog: Generator = "neglog".parse().unwrap();
    let quad: Generator = "quadratic".parse().unwrap();
    let lognormal = Sampler::LogNormal { mu: 0.0, sigma: 1.0 };
    let gaussian = Sampler::Gaussian { mean: 0.0, sd: 1.0 };
    let mut notes = Vec::new();
    let mut ok = true;
    for (gen, s) in [(&neglog, &lognormal), (&quad, &gaussian)] {
        let v = lib(variance_unbiasedness_experiment(gen, s, 10, 10_000, 9))?;
        let z = v.column("z_score")[0];
        ok &= z.abs() <= 3.0;
        notes.push(format!("{} variance z {z:.2}", gen.name()));
        let l = lib(lln_experiment(gen, s, &[100, 1000, 10_000], 200, 9))?;
        let slope = l.column("fitted_slope")[0];
        let errs = l.column("mean_error");
        ok &= (slope + 0.5).abs() <= 0.15 && errs.windows(2).all(|w| w[1] < w[0]);
        notes.push(format!("{} LLN slope {slope:.3}", gen.name()));
    }
    ensure(ok, notes.join(", "))
}

fn asset() -> Outcome {
    let model = AssetModel {
        rho: 0.5,
        ..AssetModel::default()
    };
    let rep = lib(asset_experiment(&model, 100_000, 10, 42))?;
    let all = |name: &str| rep.result.text_column(name).iter().all(|c| c == "true");
    let fits = all("ed_within_3se") && all("e_within_3se") && all("ed_le_e") && rep.pathwise_violations == 0;

    let flat = AssetModel {
        rho: 0.0,
        ..AssetModel::default()
    };
    let rep0 = lib(asset_experiment(&flat, 100_000, 10, 42))?;
    let ratios = rep0.result.column("ratio_mc");
    let ratio_ok = rep0.result.text_column("ratio_within_3se").iter().all(|c| c == "true")
        && rep0
            .result
            .column("ratio_closed")
            .iter()
            .all(|r| (r - 0.5f64.exp()).abs() < 1e-12);
    let (lo, hi) = ratios
        .iter()
        .fold((f64::MAX, f64::MIN), |(lo, hi), r| (lo.min(*r), hi.max(*r)));
    ensure(
        fits && ratio_ok,
        format!(
            "rho=0.5 bins within 3 SE with E_d <= E: {fits}; rho=0 ratio in [{lo:.4}, {hi:.4}] vs {:.6}: {ratio_ok}",
            0.5f64.exp()
        ),
    )
}

fn multiplicative() -> Outcome {
    let neglog: Generator = "neglog".parse().unwrap();
    let quad: Generator = "quadratic".parse().unwrap();
    let exps = [-1.0, 0.5, 1.0, 2.0];
    let mut rng = stream_rng(11, 0);
    let mut lin = 0.0f64;
    for _ in 0..50 {
        let n = rng.random_range(1..=10);
        let space = random_space(n, &mut rng);
        let x1 = random_vector(&neglog, n, 2, &mut rng);
        let x2 = random_vector(&neglog, n, 2, &mut rng);
        let part = random_partition(n, 4, &mut rng);
        for a1 in exps {
            for a2 in exps {
                lin = lin.max(lib(multiplicative_linearity_check(&space, &x1, &x2, a1, a2, &part))?);
            }
        }
    }
    let mut group = 0.0f64;
    for gen in [&quad, &neglog] {
        for _ in 0..1000 {
            let x = random_point(gen, 2, &mut rng);
            let y = random_point(gen, 2, &mut rng);
            let v = random_point(gen, 2, &mut rng);
            let r = lib(group_invariance_check(gen, &x, &y, &v))?;
            group = group.max(r.translation_residual).max(r.inverse_norm_residual);
        }
    }
    let spot = lib(group_invariance_check(&neglog, &p(&[1.0]), &p(&[4.0]), &p(&[3.0])))?;
    group = group.max(spot.translation_residual);
    ensure(
        lin <= 1e-10 && group <= 1e-10,
        format!("linearity {lin:.1e}, group invariance {group:.1e}"),
    )
}

fn cli_determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_divgeo");
    let run = |args: &[&str]| -> Result<(i32, Vec<u8>), String> {
        let out = Command::new(bin).args(args).output().map_err(|e| e.to_string())?;
        Ok((out.status.code().unwrap_or(-1), out.stdout))
    };
    let (code, _) = run(&["verify", "--seed", "7"])?;
    let mut notes = vec![format!("verify --seed 7 exit {code}")];
    let mut ok = code == 0;
    let commands: [&[&str]; 5] = [
        &["lln", "--generator", "neglog", "--seed", "5"],
        &["variance", "--generator", "exp", "--seed", "5"],
        &["asset", "--rho", "0.5", "--paths", "100000", "--seed", "42"],
        &["table2", "--seed", "5"],
        &["verify", "--generator", "xlogx", "--seed", "5", "--cases", "50"],
    ];
    for args in commands {
        let (c1, a) = run(args)?;
        let (c2, b) = run(args)?;
        let same = c1 == 0 && c2 == 0 && !a.is_empty() && a == b;
        ok &= same;
        notes.push(format!("{} {}", args[0], if same { "identical" } else { "DIFFERS" }));
    }
    ensure(ok, notes.join(", "))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 12] = [
        ("transform fidelity", transform_fidelity),
        ("geodesic ODE oracle", geodesic_oracle),
        ("divergence vs half squared distance", divergence_vs_distance),
        ("semi-parallelogram law", semi_parallelogram),
        ("geodesic midpoint", midpoints),
        (
            "intertwining and conditional expectation properties",
            intertwining_and_properties,
        ),
        ("prediction error ordering", prediction_ordering),
        ("closed-form conditional expectations", table2),
        ("estimator suite", estimators),
        ("asset prediction", asset),
        ("multiplicative linearity and group invariance", multiplicative),
        ("CLI determinism", cli_determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let (status, detail) = match check() {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("criterion {:>2} {status}: {name}: {detail}", i + 1);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
