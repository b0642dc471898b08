//! Level-indexed ultrametrics.
//!
//! The tree stores, for every unordered pair of points, the integer level at
//! which the pair separates. Values `2 * scale[level]` are derived on demand,
//! so the strong triangle inequality holds exactly whenever the levels have
//! the prefix property, independent of float rounding.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct UltrametricTree {
    points: Vec<usize>,
    // condensed upper triangle, row-major over positions
    levels: Vec<u32>,
    scales: Vec<f64>,
}

fn condensed_index(k: usize, a: usize, b: usize) -> usize {
    let (a, b) = if a < b { (a, b) } else { (b, a) };
    a * (2 * k - a - 1) / 2 + (b - a - 1)
}

impl UltrametricTree {
    /// Builds a tree from an explicit separation-level function over
    /// positions `0..points.len()`. Validates the scales and the prefix property.
    pub fn new(
        points: Vec<usize>,
        scales: Vec<f64>,
        level: impl Fn(usize, usize) -> u32,
    ) -> Result<Self> {
        check_scales(&scales)?;
        let k = points.len();
        let mut levels = Vec::with_capacity(k * k.saturating_sub(1) / 2);
        for a in 0..k {
            for b in (a + 1)..k {
                let l = level(a, b);
                if l as usize >= scales.len() {
                    return Err(Error::InvalidTree(format!(
                        "level {l} of pair ({a},{b}) has no scale"
                    )));
                }
                levels.push(l);
            }
        }
        let tree = Self { points, levels, scales };
        if let Some((x, y, z)) = tree.prefix_violation() {
            return Err(Error::InvalidTree(format!("prefix property fails on ({x},{y},{z})")));
        }
        Ok(tree)
    }

    /// Builds the tree whose separation level of two points is the length of
    /// the longest common prefix of their cluster-id paths.
    pub fn from_paths(points: Vec<usize>, paths: &[Vec<u64>], scales: Vec<f64>) -> Result<Self> {
        check_scales(&scales)?;
        if paths.len() != points.len() {
            return Err(Error::InvalidTree("one path per point required".into()));
        }
        let k = points.len();
        let mut levels = Vec::with_capacity(k * k.saturating_sub(1) / 2);
        for a in 0..k {
            for b in (a + 1)..k {
                let lcp = paths[a].iter().zip(&paths[b]).take_while(|(x, y)| x == y).count();
                if lcp >= scales.len() {
                    return Err(Error::InvalidTree(format!(
                        "points at positions {a} and {b} never separate"
                    )));
                }
                levels.push(lcp as u32);
            }
        }
        // common-prefix lengths satisfy the prefix property by construction
        Ok(Self { points, levels, scales })
    }

    pub fn points(&self) -> &[usize] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn scales(&self) -> &[f64] {
        &self.scales
    }

    /// Separation level of the points at positions `a != b`.
    pub fn level(&self, a: usize, b: usize) -> u32 {
        assert_ne!(a, b, "separation level is defined for distinct points");
        self.levels[condensed_index(self.points.len(), a, b)]
    }

    /// `2 * scale[level(a, b)]`.
    pub fn value(&self, a: usize, b: usize) -> f64 {
        2.0 * self.scales[self.level(a, b) as usize]
    }

    /// Dense value matrix over positions, zero on the diagonal.
    pub fn value_matrix(&self) -> Vec<Vec<f64>> {
        let k = self.points.len();
        (0..k)
            .map(|a| (0..k).map(|b| if a == b { 0.0 } else { self.value(a, b) }).collect())
            .collect()
    }

    /// First triple of positions breaking `level(x,z) >= min(level(x,y), level(y,z))`.
    pub fn prefix_violation(&self) -> Option<(usize, usize, usize)> {
        let k = self.points.len();
        for x in 0..k {
            for y in 0..k {
                for z in 0..k {
                    if x == y || y == z || x == z {
                        continue;
                    }
                    if self.level(x, z) < self.level(x, y).min(self.level(y, z)) {
                        return Some((x, y, z));
                    }
                }
            }
        }
        None
    }

    /// Exhaustive strong-triangle scan over the derived float values.
    pub fn strong_triangle_holds(&self) -> bool {
        let k = self.points.len();
        for x in 0..k {
            for y in 0..k {
                for z in 0..k {
                    if x == y || y == z || x == z {
                        continue;
                    }
                    if self.value(x, z) > self.value(x, y).max(self.value(y, z)) {
                        return false;
                    }
                }
            }
        }
        true
    }
}

fn check_scales(scales: &[f64]) -> Result<()> {
    if scales.is_empty() {
        return Err(Error::InvalidTree("no scales".into()));
    }
    for (i, &s) in scales.iter().enumerate() {
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::InvalidTree(format!("scale {i} is not positive")));
        }
        if i > 0 && s > scales[i - 1] {
            return Err(Error::InvalidTree(format!("scale {i} increases")));
        }
    }
    Ok(())
}
