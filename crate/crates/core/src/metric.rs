//! Validated finite metric spaces.
//!
//! A [`FiniteMetricSpace`] owns a dense symmetric distance matrix together
//! with its cached diameter and smallest positive distance. Construction
//! checks every metric axiom, so downstream code never has to.

use crate::error::{Error, Result};
use crate::tree::UltrametricTree;

/// Relative slack applied to the triangle check, scaled by the diameter.
pub const TRIANGLE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct FiniteMetricSpace {
    n: usize,
    dist: Vec<f64>,
    diameter: f64,
    d_min: f64,
}

impl FiniteMetricSpace {
    /// Builds a space from a square matrix given as rows.
    pub fn new(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::EmptyMatrix);
        }
        let mut flat = Vec::with_capacity(n * n);
        for (row, r) in rows.iter().enumerate() {
            if r.len() != n {
                return Err(Error::NotSquare { row, len: r.len(), expected: n });
            }
            flat.extend_from_slice(r);
        }
        Self::from_flat(n, flat)
    }

    /// Builds a space from a row-major `n × n` buffer.
    pub fn from_flat(n: usize, dist: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyMatrix);
        }
        if dist.len() != n * n {
            return Err(Error::NotSquare { row: dist.len() / n, len: dist.len() % n, expected: n });
        }
        let at = |i: usize, j: usize| dist[i * n + j];
        for i in 0..n {
            for j in 0..n {
                let v = at(i, j);
                if !v.is_finite() {
                    return Err(Error::NonFinite { i, j });
                }
                if v < 0.0 {
                    return Err(Error::NegativeDistance { i, j });
                }
            }
        }
        for i in 0..n {
            if at(i, i) != 0.0 {
                return Err(Error::NonzeroDiagonal { i });
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if at(i, j) != at(j, i) {
                    return Err(Error::NotSymmetric { i, j });
                }
                if at(i, j) == 0.0 {
                    return Err(Error::ZeroOffDiagonal { i, j });
                }
            }
        }
        let (diameter, d_min) = extremes(n, &dist);
        let slack = TRIANGLE_SLACK * diameter;
        for i in 0..n {
            for k in (i + 1)..n {
                let dik = at(i, k);
                for j in 0..n {
                    if j != i && j != k && dik > at(i, j) + at(j, k) + slack {
                        return Err(Error::TriangleViolation { i, j, k });
                    }
                }
            }
        }
        Ok(Self { n, dist, diameter, d_min })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn d(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.dist[i * self.n..(i + 1) * self.n]
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    /// Smallest distance between distinct points; `+inf` for a single point.
    pub fn d_min(&self) -> f64 {
        self.d_min
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| self.row(i).to_vec()).collect()
    }

    /// Closed ball `{y : d(center, y) <= radius}` in increasing index order.
    pub fn ball(&self, center: usize, radius: f64) -> Vec<usize> {
        self.row(center)
            .iter()
            .enumerate()
            .filter(|(_, &d)| d <= radius)
            .map(|(y, _)| y)
            .collect()
    }

    pub fn ball_size(&self, center: usize, radius: f64) -> usize {
        self.row(center).iter().filter(|&&d| d <= radius).count()
    }

    /// Radii at which `|B(center, t)|` jumps, paired with the ball size from
    /// that radius on. The first entry is always `(0, 1)` and the last size is `n`.
    pub fn jump_radii(&self, center: usize) -> Vec<(f64, usize)> {
        let mut ds = self.row(center).to_vec();
        ds.sort_by(f64::total_cmp);
        let mut out: Vec<(f64, usize)> = Vec::new();
        for (idx, &d) in ds.iter().enumerate() {
            match out.last_mut() {
                Some(last) if last.0 == d => last.1 = idx + 1,
                _ => out.push((d, idx + 1)),
            }
        }
        out
    }

    /// Rescales to diameter exactly 2. Returns the rescaled space and the
    /// factor `diameter / 2` that maps it back.
    pub fn normalize(&self) -> Result<(Self, f64)> {
        if self.n < 2 {
            return Err(Error::SinglePoint);
        }
        let diam = self.diameter;
        // (d * 2) / diam keeps the maximal entry at exactly 2.0
        let dist: Vec<f64> = self.dist.iter().map(|&d| (d * 2.0) / diam).collect();
        let (diameter, d_min) = extremes(self.n, &dist);
        Ok((Self { n: self.n, dist, diameter, d_min }, diam / 2.0))
    }

    /// Multiplies every distance by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(Error::Domain(format!("scale factor must be positive, got {factor}")));
        }
        let dist: Vec<f64> = self.dist.iter().map(|&d| d * factor).collect();
        let (diameter, d_min) = extremes(self.n, &dist);
        Ok(Self { n: self.n, dist, diameter, d_min })
    }

    /// Sub-space induced by `subset` (indices are re-numbered in the given order).
    pub fn restrict(&self, subset: &[usize]) -> Result<Self> {
        for &i in subset {
            self.check_index(i)?;
        }
        let k = subset.len();
        if k == 0 {
            return Err(Error::EmptyMatrix);
        }
        let mut dist = Vec::with_capacity(k * k);
        for &i in subset {
            for &j in subset {
                dist.push(self.d(i, j));
            }
        }
        for a in 0..k {
            for b in (a + 1)..k {
                if subset[a] == subset[b] {
                    return Err(Error::ZeroOffDiagonal { i: a, j: b });
                }
            }
        }
        let (diameter, d_min) = extremes(k, &dist);
        Ok(Self { n: k, dist, diameter, d_min })
    }

    pub(crate) fn check_index(&self, index: usize) -> Result<()> {
        if index >= self.n {
            Err(Error::PointOutOfRange { index, n: self.n })
        } else {
            Ok(())
        }
    }
}

fn extremes(n: usize, dist: &[f64]) -> (f64, f64) {
    let mut diameter = 0.0f64;
    let mut d_min = f64::INFINITY;
    for i in 0..n {
        for j in (i + 1)..n {
            let d = dist[i * n + j];
            diameter = diameter.max(d);
            d_min = d_min.min(d);
        }
    }
    (diameter, d_min)
}

/// Ratio of the largest to the smallest expansion `value(x,y) / d(x,y)` over
/// all survivor pairs of `tree`. Fewer than two points give 1.
pub fn distortion(space: &FiniteMetricSpace, tree: &UltrametricTree) -> Result<f64> {
    let points = tree.points();
    for &p in points {
        space.check_index(p)?;
    }
    if points.len() < 2 {
        return Ok(1.0);
    }
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for a in 0..points.len() {
        for b in (a + 1)..points.len() {
            let ratio = tree.value(a, b) / space.d(points[a], points[b]);
            lo = lo.min(ratio);
            hi = hi.max(ratio);
        }
    }
    Ok(hi / lo)
}

/// Whether `rows` is a metric satisfying the strong triangle inequality,
/// compared exactly.
pub fn is_ultrametric_matrix(rows: &[Vec<f64>]) -> Result<bool> {
    let space = FiniteMetricSpace::new(rows)?;
    Ok(is_ultrametric(&space))
}

pub(crate) fn is_ultrametric(space: &FiniteMetricSpace) -> bool {
    let n = space.len();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                if space.d(i, k) > space.d(i, j).max(space.d(j, k)) {
                    return false;
                }
            }
        }
    }
    true
}
