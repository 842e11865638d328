//! Small numerical kernels: adaptive Gauss-Kronrod quadrature, a safeguarded
//! Newton solver for increasing functions, and a fixed-step RK4 integrator.

use crate::error::{Error, Result};

// Gauss-Kronrod 7/15 abscissae on [-1, 1] (non-negative half, descending).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
// 7-point Gauss weights at XGK[1], XGK[3], XGK[5] and the centre.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Tolerances and budget for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            abs_tol: 1e-14,
            rel_tol: 1e-12,
            max_intervals: 2000,
        }
    }
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(centre);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(centre - dx) + f(centre + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    let kronrod = kronrod * half;
    let gauss = gauss * half;
    (kronrod, (kronrod - gauss).abs())
}

/// Integrates `f` over `[a, b]` (either orientation) by globally adaptive
/// Gauss-Kronrod 7/15 bisection.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, cfg: QuadratureConfig) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let (est, err) = gk15(&f, lo, hi);
    let mut pieces = vec![(lo, hi, est, err)];
    loop {
        let total: f64 = pieces.iter().map(|p| p.2).sum();
        let total_err: f64 = pieces.iter().map(|p| p.3).sum();
        if !total.is_finite() || !total_err.is_finite() {
            return Err(Error::QuadratureNonConvergence { lower: lo, upper: hi });
        }
        if total_err <= cfg.abs_tol.max(cfg.rel_tol * total.abs()) {
            return Ok(sign * total);
        }
        if pieces.len() >= cfg.max_intervals {
            return Err(Error::QuadratureNonConvergence { lower: lo, upper: hi });
        }
        let worst = pieces
            .iter()
            .enumerate()
            .max_by(|l, r| l.1 .3.total_cmp(&r.1 .3))
            .map(|(i, _)| i)
            .expect("at least one piece");
        let (pa, pb, _, _) = pieces.swap_remove(worst);
        let mid = 0.5 * (pa + pb);
        if mid <= pa || mid >= pb {
            // Interval can no longer be split in floating point.
            return Err(Error::QuadratureNonConvergence { lower: lo, upper: hi });
        }
        let (e1, r1) = gk15(&f, pa, mid);
        let (e2, r2) = gk15(&f, mid, pb);
        pieces.push((pa, mid, e1, r1));
        pieces.push((mid, pb, e2, r2));
    }
}

/// Finds the root of an increasing function `f` inside `[lo, hi]`, given
/// `f(lo) <= 0 <= f(hi)`. Newton steps are taken when they stay inside the
/// current bracket, bisection otherwise.
pub fn safeguarded_newton<F, D>(f: F, df: D, mut lo: f64, mut hi: f64, x_tol: f64, max_iter: usize) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
    D: Fn(f64) -> f64,
{
    let mut x = 0.5 * (lo + hi);
    for _ in 0..max_iter {
        let fx = f(x)?;
        if fx == 0.0 {
            return Ok(x);
        }
        if fx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let slope = df(x);
        let newton = x - fx / slope;
        let next = if slope > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - x).abs() <= x_tol * x.abs().max(1.0) || hi - lo <= x_tol * x.abs().max(1.0) {
            return Ok(next);
        }
        x = next;
    }
    Err(Error::NonConvergence { iterations: max_iter })
}

/// One classical fourth-order Runge-Kutta step for `y' = rhs(y)` (autonomous).
pub fn rk4_step<const N: usize, F>(rhs: &F, y: [f64; N], dt: f64) -> [f64; N]
where
    F: Fn(&[f64; N]) -> [f64; N],
{
    let shift = |base: &[f64; N], k: &[f64; N], s: f64| {
        let mut out = *base;
        for (o, ki) in out.iter_mut().zip(k) {
            *o += s * ki;
        }
        out
    };
    let k1 = rhs(&y);
    let k2 = rhs(&shift(&y, &k1, 0.5 * dt));
    let k3 = rhs(&shift(&y, &k2, 0.5 * dt));
    let k4 = rhs(&shift(&y, &k3, dt));
    let mut out = y;
    for i in 0..N {
        out[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

/// Integrates the autonomous system `y' = rhs(y)` over `[0, span]` with RK4
/// and step-doubling error control: a step is accepted when the two-half-step
/// and one-step results differ by at most `15 tol (1 + |y|)` in every
/// component, and the Richardson-corrected value is kept. Steps that produce
/// states rejected by `admissible` are halved.
pub fn rk4_adaptive<const N: usize, F, A>(
    rhs: F,
    admissible: A,
    mut y: [f64; N],
    span: f64,
    tol: f64,
) -> Result<[f64; N]>
where
    F: Fn(&[f64; N]) -> [f64; N],
    A: Fn(&[f64; N]) -> bool,
{
    const MAX_STEPS: usize = 100_000;
    let mut t = 0.0;
    let mut dt = span;
    for _ in 0..MAX_STEPS {
        if t >= span {
            return Ok(y);
        }
        dt = dt.min(span - t);
        let full = rk4_step(&rhs, y, dt);
        let mid = rk4_step(&rhs, y, 0.5 * dt);
        let halves = rk4_step(&rhs, mid, 0.5 * dt);
        let ok = [full, mid, halves]
            .iter()
            .all(|s| s.iter().all(|v| v.is_finite()) && admissible(s));
        if !ok {
            dt *= 0.5;
            continue;
        }
        let err = (0..N)
            .map(|i| (halves[i] - full[i]).abs() / 15.0 / (1.0 + halves[i].abs()))
            .fold(0.0, f64::max);
        if err <= tol {
            for i in 0..N {
                y[i] = halves[i] + (halves[i] - full[i]) / 15.0;
            }
            t += dt;
            let grow = if err > 0.0 { 0.9 * (tol / err).powf(0.2) } else { 4.0 };
            dt *= grow.clamp(0.2, 4.0);
        } else {
            dt *= (0.9 * (tol / err).powf(0.2)).clamp(0.1, 0.9);
        }
    }
    Err(Error::NonConvergence { iterations: MAX_STEPS })
}

/// Central difference `(f(x + eps) - f(x - eps)) / (2 eps)`.
pub fn central_difference<F: Fn(f64) -> f64>(f: F, x: f64, eps: f64) -> f64 {
    (f(x + eps) - f(x - eps)) / (2.0 * eps)
}
