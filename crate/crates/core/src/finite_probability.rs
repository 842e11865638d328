//! Finite probability spaces, random vectors on them, and partitions playing
//! the role of sub-σ-algebras. Conditional expectation is block averaging.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generators::Generator;
use crate::point::Point;

const WEIGHT_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct FiniteProbSpace {
    weights: Vec<f64>,
}

impl FiniteProbSpace {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidWeights("no outcomes".into()));
        }
        if let Some((i, w)) = weights.iter().enumerate().find(|(_, w)| !(w.is_finite() && **w >= 0.0)) {
            return Err(Error::InvalidWeights(format!("weights[{i}] = {w}")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidWeights(format!("weights sum to {total}")));
        }
        Ok(FiniteProbSpace { weights })
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidWeights("no outcomes".into()));
        }
        Ok(FiniteProbSpace {
            weights: vec![1.0 / n as f64; n],
        })
    }

    /// Normalises non-negative masses to a probability vector.
    pub fn from_masses(masses: &[f64]) -> Result<Self> {
        let total: f64 = masses.iter().sum();
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::InvalidWeights(format!("masses sum to {total}")));
        }
        FiniteProbSpace::new(masses.iter().map(|m| m / total).collect())
    }

    pub fn n_outcomes(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    fn check_len(&self, n: usize) -> Result<()> {
        if n != self.n_outcomes() {
            return Err(Error::LengthMismatch {
                expected: self.n_outcomes(),
                found: n,
            });
        }
        Ok(())
    }
}

/// An `M`-valued random variable: one point per outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomVector {
    values: Vec<Point>,
}

impl RandomVector {
    pub fn new(values: Vec<Point>) -> Result<Self> {
        let first = values.first().ok_or(Error::LengthMismatch { expected: 1, found: 0 })?;
        let k = first.dim();
        if k == 0 {
            return Err(Error::DimensionMismatch { expected: 1, found: 0 });
        }
        if let Some(p) = values.iter().find(|p| p.dim() != k) {
            return Err(Error::DimensionMismatch {
                expected: k,
                found: p.dim(),
            });
        }
        Ok(RandomVector { values })
    }

    pub fn from_scalars(xs: &[f64]) -> Result<Self> {
        RandomVector::new(xs.iter().map(|&x| Point::scalar(x)).collect())
    }

    pub fn values(&self) -> &[Point] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.values[0].dim()
    }

    /// Values of coordinate `i` across outcomes.
    pub fn coordinate(&self, i: usize) -> Vec<f64> {
        self.values.iter().map(|p| p[i]).collect()
    }

    /// Rebuilds a random vector from per-coordinate columns.
    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let n = columns.first().map_or(0, Vec::len);
        let values = (0..n).map(|w| columns.iter().map(|c| c[w]).collect()).collect();
        RandomVector::new(values)
    }

    pub fn check_on(&self, space: &FiniteProbSpace) -> Result<()> {
        if self.len() != space.n_outcomes() {
            return Err(Error::SpaceMismatch {
                left: space.n_outcomes(),
                right: self.len(),
            });
        }
        Ok(())
    }

    pub fn max_abs_diff(&self, other: &RandomVector) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.max_abs_diff(b))
            .fold(0.0, f64::max)
    }
}

/// A partition of `{0, …, n-1}` into disjoint non-empty blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    blocks: Vec<Vec<usize>>,
    block_of: Vec<usize>,
}

impl Partition {
    pub fn new(n_outcomes: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        let mut block_of = vec![usize::MAX; n_outcomes];
        for (b, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(Error::InvalidPartition(format!("block {b} is empty")));
            }
            for &w in block {
                if w >= n_outcomes {
                    return Err(Error::InvalidPartition(format!(
                        "outcome {w} out of range for {n_outcomes} outcomes"
                    )));
                }
                if block_of[w] != usize::MAX {
                    return Err(Error::InvalidPartition(format!(
                        "outcome {w} appears in more than one block"
                    )));
                }
                block_of[w] = b;
            }
        }
        if let Some(w) = block_of.iter().position(|&b| b == usize::MAX) {
            return Err(Error::InvalidPartition(format!("outcome {w} is not covered")));
        }
        Ok(Partition { blocks, block_of })
    }

    /// Builds a partition from a block label per outcome.
    pub fn from_labels(labels: &[usize]) -> Result<Self> {
        let mut ids: Vec<usize> = labels.to_vec();
        ids.sort_unstable();
        ids.dedup();
        let blocks = ids
            .iter()
            .map(|id| {
                labels
                    .iter()
                    .enumerate()
                    .filter(|(_, l)| *l == id)
                    .map(|(w, _)| w)
                    .collect()
            })
            .collect();
        Partition::new(labels.len(), blocks)
    }

    pub fn trivial(n_outcomes: usize) -> Self {
        Partition {
            blocks: vec![(0..n_outcomes).collect()],
            block_of: vec![0; n_outcomes],
        }
    }

    pub fn discrete(n_outcomes: usize) -> Self {
        Partition {
            blocks: (0..n_outcomes).map(|w| vec![w]).collect(),
            block_of: (0..n_outcomes).collect(),
        }
    }

    pub fn n_outcomes(&self) -> usize {
        self.block_of.len()
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn block_of(&self, outcome: usize) -> usize {
        self.block_of[outcome]
    }

    fn check_on(&self, space: &FiniteProbSpace) -> Result<()> {
        if self.n_outcomes() != space.n_outcomes() {
            return Err(Error::InvalidPartition(format!(
                "partition covers {} outcomes, space has {}",
                self.n_outcomes(),
                space.n_outcomes()
            )));
        }
        Ok(())
    }
}

/// `Σ P(ω) f(ω)`.
pub fn expectation(space: &FiniteProbSpace, f: &[f64]) -> Result<f64> {
    space.check_len(f.len())?;
    Ok(space.weights.iter().zip(f).map(|(w, v)| w * v).sum())
}

/// `E[f | G]` as a per-outcome vector, constant on each block. Blocks of zero
/// probability receive the unconditional mean.
pub fn conditional_expectation_real(space: &FiniteProbSpace, f: &[f64], part: &Partition) -> Result<Vec<f64>> {
    part.check_on(space)?;
    let overall = expectation(space, f)?;
    let mut out = vec![0.0; f.len()];
    for block in &part.blocks {
        let mass: f64 = block.iter().map(|&w| space.weights[w]).sum();
        let value = if mass > 0.0 {
            block.iter().map(|&w| space.weights[w] * f[w]).sum::<f64>() / mass
        } else {
            overall
        };
        for &w in block {
            out[w] = value;
        }
    }
    Ok(out)
}

/// Coordinatewise `E[X | G]` of an ℝᴷ-valued random vector.
pub fn conditional_expectation_vector(
    space: &FiniteProbSpace,
    x: &RandomVector,
    part: &Partition,
) -> Result<RandomVector> {
    x.check_on(space)?;
    let columns = (0..x.dim())
        .map(|i| conditional_expectation_real(space, &x.coordinate(i), part))
        .collect::<Result<Vec<_>>>()?;
    RandomVector::from_columns(&columns)
}

/// True iff every block of `p1` lies inside a block of `p2`.
pub fn refines(p1: &Partition, p2: &Partition) -> Result<bool> {
    if p1.n_outcomes() != p2.n_outcomes() {
        return Err(Error::SpaceMismatch {
            left: p1.n_outcomes(),
            right: p2.n_outcomes(),
        });
    }
    Ok(p1.blocks.iter().all(|block| {
        let target = p2.block_of[block[0]];
        block.iter().all(|&w| p2.block_of[w] == target)
    }))
}

/// Componentwise `h` applied at every outcome.
pub fn map_h(gen: &Generator, x: &RandomVector) -> Result<Vec<Vec<f64>>> {
    x.values.iter().map(|p| gen.h_point("X", p)).collect()
}

/// Componentwise `H` applied at every outcome.
pub fn map_h_inv(gen: &Generator, u: &[Vec<f64>]) -> Result<RandomVector> {
    let values = u
        .iter()
        .map(|row| gen.h_inv_point("h(X)", row))
        .collect::<Result<Vec<_>>>()?;
    RandomVector::new(values)
}

/// JSON payload for a finite space, a random vector on it and an optional
/// partition (0-based outcome indices).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceInput {
    pub weights: Vec<f64>,
    pub values: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partition: Option<Vec<Vec<usize>>>,
}

impl SpaceInput {
    /// Validates the payload; a missing partition means the trivial one.
    pub fn build(&self) -> Result<(FiniteProbSpace, RandomVector, Partition)> {
        let space = FiniteProbSpace::new(self.weights.clone())?;
        let x = RandomVector::new(self.values.iter().cloned().map(Point::from).collect())?;
        x.check_on(&space)?;
        let part = match &self.partition {
            Some(blocks) => Partition::new(space.n_outcomes(), blocks.clone())?,
            None => Partition::trivial(space.n_outcomes()),
        };
        Ok((space, x, part))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    #[test]
    fn expectation_examples() {
        let u2 = FiniteProbSpace::uniform(2).unwrap();
        assert_eq!(expectation(&u2, &[0.0, 2.0]).unwrap(), 1.0);
        let point = FiniteProbSpace::new(vec![1.0, 0.0]).unwrap();
        assert_eq!(expectation(&point, &[3.5, -7.0]).unwrap(), 3.5);
        let s = FiniteProbSpace::new(vec![0.25, 0.75]).unwrap();
        assert_eq!(expectation(&s, &[4.0, 0.0]).unwrap(), 1.0);
        assert!(matches!(expectation(&s, &[1.0]), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn invalid_weights() {
        assert!(FiniteProbSpace::new(vec![0.5, 0.4]).is_err());
        assert!(FiniteProbSpace::new(vec![1.5, -0.5]).is_err());
        assert!(FiniteProbSpace::new(vec![]).is_err());
        assert!(FiniteProbSpace::new(vec![f64::NAN, 1.0]).is_err());
    }

    #[test]
    fn conditional_expectation_examples() {
        let s = FiniteProbSpace::uniform(4).unwrap();
        let f = [1.0, 3.0, 5.0, 7.0];
        let triv = conditional_expectation_real(&s, &f, &Partition::trivial(4)).unwrap();
        assert_eq!(triv, vec![4.0; 4]);
        let disc = conditional_expectation_real(&s, &f, &Partition::discrete(4)).unwrap();
        assert_eq!(disc, f.to_vec());
        let p = Partition::new(4, vec![vec![0, 1], vec![2, 3]]).unwrap();
        let c = conditional_expectation_real(&s, &f, &p).unwrap();
        assert_eq!(c, vec![2.0, 2.0, 6.0, 6.0]);
    }

    #[test]
    fn zero_mass_block_gets_unconditional_mean() {
        let s = FiniteProbSpace::new(vec![0.5, 0.5, 0.0]).unwrap();
        let p = Partition::new(3, vec![vec![0, 1], vec![2]]).unwrap();
        let c = conditional_expectation_real(&s, &[1.0, 3.0, 100.0], &p).unwrap();
        assert_eq!(c, vec![2.0, 2.0, 2.0]);
    }

    #[test]
    fn partition_validation() {
        assert!(Partition::new(3, vec![vec![0, 1], vec![1, 2]]).is_err());
        assert!(Partition::new(3, vec![vec![0, 1]]).is_err());
        assert!(Partition::new(3, vec![vec![0, 1, 2], vec![]]).is_err());
        assert!(Partition::new(3, vec![vec![0, 1, 3]]).is_err());
        let p = Partition::from_labels(&[2, 0, 2, 5]).unwrap();
        assert_eq!(p.blocks(), &[vec![1], vec![0, 2], vec![3]]);
    }

    #[test]
    fn refinement_examples() {
        let n = 3;
        assert!(refines(&Partition::discrete(n), &Partition::trivial(n)).unwrap());
        assert!(!refines(&Partition::trivial(n), &Partition::discrete(n)).unwrap());
        let p1 = Partition::new(3, vec![vec![0], vec![1, 2]]).unwrap();
        assert!(refines(&p1, &Partition::trivial(3)).unwrap());
        assert!(refines(&Partition::trivial(4), &Partition::discrete(3)).is_err());
    }

    #[test]
    fn map_h_examples() {
        let neglog: Generator = "neglog".parse().unwrap();
        let x = RandomVector::from_scalars(&[1.0, E]).unwrap();
        assert_eq!(map_h(&neglog, &x).unwrap(), vec![vec![0.0], vec![1.0]]);
        let quad: Generator = "quadratic".parse().unwrap();
        let y = RandomVector::new(vec![Point::new(vec![-1.0, 2.5])]).unwrap();
        assert_eq!(map_h(&quad, &y).unwrap(), vec![vec![-1.0, 2.5]]);
        let xlogx: Generator = "xlogx".parse().unwrap();
        let z = RandomVector::from_scalars(&[4.0]).unwrap();
        assert_eq!(map_h(&xlogx, &z).unwrap(), vec![vec![4.0]]);
        let back = map_h_inv(&neglog, &map_h(&neglog, &x).unwrap()).unwrap();
        assert!(back.max_abs_diff(&x) < 1e-15);
        assert!(map_h(&neglog, &RandomVector::from_scalars(&[-1.0]).unwrap()).is_err());
    }

    #[test]
    fn json_payload() {
        let input: SpaceInput =
            serde_json::from_str(r#"{"weights":[0.5,0.5],"values":[[1.0],[4.0]],"partition":[[0],[1]]}"#).unwrap();
        let (space, x, part) = input.build().unwrap();
        assert_eq!(space.n_outcomes(), 2);
        assert_eq!(x.dim(), 1);
        assert_eq!(part.blocks().len(), 2);
        let bad: SpaceInput = serde_json::from_str(r#"{"weights":[1.0],"values":[[1.0],[4.0]]}"#).unwrap();
        assert!(matches!(bad.build(), Err(Error::SpaceMismatch { .. })));
    }
}
