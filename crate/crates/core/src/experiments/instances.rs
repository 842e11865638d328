//! Seeded random instances for the property suite and the acceptance tests.

use rand::{Rng, RngCore};

use crate::finite_probability::{FiniteProbSpace, Partition, RandomVector};
use crate::generators::Generator;
use crate::point::Point;

/// A value well inside the domain: uniform on `[-3, 3]` for ℝ-valued domains,
/// log-uniform on `[e⁻², e²]` for (0, ∞), mirrored for (−∞, 0).
pub fn random_value<R: RngCore>(gen: &Generator, rng: &mut R) -> f64 {
    let dom = gen.domain();
    match (dom.lower.is_finite(), dom.upper.is_finite()) {
        (true, _) => dom.lower + rng.random_range(-2.0f64..2.0).exp(),
        (false, true) => dom.upper - rng.random_range(-2.0f64..2.0).exp(),
        (false, false) => rng.random_range(-3.0..3.0),
    }
}

pub fn random_point<R: RngCore>(gen: &Generator, dim: usize, rng: &mut R) -> Point {
    (0..dim).map(|_| random_value(gen, rng)).collect()
}

/// A pair `(x, y)` with `x < y` in every coordinate.
pub fn ordered_pair<R: RngCore>(gen: &Generator, dim: usize, rng: &mut R) -> (Point, Point) {
    loop {
        let a = random_point(gen, dim, rng);
        let b = random_point(gen, dim, rng);
        if a.iter().zip(b.iter()).all(|(u, v)| u != v) {
            let lo = a.iter().zip(b.iter()).map(|(u, v)| u.min(*v)).collect();
            let hi = a.iter().zip(b.iter()).map(|(u, v)| u.max(*v)).collect();
            return (lo, hi);
        }
    }
}

/// Strictly positive weights normalised to one.
pub fn random_space<R: RngCore>(n: usize, rng: &mut R) -> FiniteProbSpace {
    let masses: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
    FiniteProbSpace::from_masses(&masses).expect("positive masses")
}

pub fn random_vector<R: RngCore>(gen: &Generator, n: usize, dim: usize, rng: &mut R) -> RandomVector {
    RandomVector::new((0..n).map(|_| random_point(gen, dim, rng)).collect()).expect("non-empty")
}

/// A partition with at most `max_blocks` non-empty blocks.
pub fn random_partition<R: RngCore>(n: usize, max_blocks: usize, rng: &mut R) -> Partition {
    let labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..max_blocks.max(1))).collect();
    Partition::from_labels(&labels).expect("non-empty labels")
}

/// `(fine, coarse)` with `fine` refining `coarse`: the coarse blocks are
/// unions of fine blocks chosen at random.
pub fn nested_partitions<R: RngCore>(n: usize, rng: &mut R) -> (Partition, Partition) {
    let fine = random_partition(n, n.clamp(1, 6), rng);
    let groups = fine.blocks().len();
    let merge: Vec<usize> = (0..groups).map(|_| rng.random_range(0..groups.div_ceil(2))).collect();
    let labels: Vec<usize> = (0..n).map(|w| merge[fine.block_of(w)]).collect();
    let coarse = Partition::from_labels(&labels).expect("non-empty labels");
    (fine, coarse)
}
