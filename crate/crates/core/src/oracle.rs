//! Exact ground truth for ultrametric embeddability.
//!
//! The subdominant ultrametric `ρ*` of a dissimilarity is the entrywise
//! largest ultrametric below it; `ρ*(x,y)` is the minimax (bottleneck) edge
//! weight over all paths from `x` to `y`, read off a minimum spanning tree.
//!
//! A subset embeds with distortion `D` into some ultrametric `ρ` with
//! `d <= ρ <= D d` iff the subdominant of `D d` still dominates `d`: any
//! such `ρ` lies below `D d`, hence below its subdominant, and the
//! subdominant itself is a valid witness.

use crate::error::{Error, Result};
use crate::metric::FiniteMetricSpace;

/// Relative slack for the `ρ* >= d` comparison.
pub const DOMINANCE_SLACK: f64 = 1e-12;

/// Largest subset size accepted by [`max_subset`].
pub const MAX_EXHAUSTIVE: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct SubdominantResult {
    n: usize,
    matrix: Vec<f64>,
    /// Minimum spanning tree edges `(u, v, weight)`.
    mst: Vec<(usize, usize, f64)>,
}

impl SubdominantResult {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.matrix[i * self.n + j]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| self.matrix[i * self.n..(i + 1) * self.n].to_vec()).collect()
    }

    pub fn mst(&self) -> &[(usize, usize, f64)] {
        &self.mst
    }

    /// Minimax path from `i` to `j`: the unique spanning-tree path, whose
    /// largest edge equals `value(i, j)`.
    pub fn witness_path(&self, i: usize, j: usize) -> Vec<usize> {
        let mut adj = vec![Vec::new(); self.n];
        for &(u, v, _) in &self.mst {
            adj[u].push(v);
            adj[v].push(u);
        }
        let mut parent = vec![usize::MAX; self.n];
        parent[i] = i;
        let mut stack = vec![i];
        while let Some(u) = stack.pop() {
            for &v in &adj[u] {
                if parent[v] == usize::MAX {
                    parent[v] = u;
                    stack.push(v);
                }
            }
        }
        let mut path = vec![j];
        let mut cur = j;
        while cur != i {
            cur = parent[cur];
            path.push(cur);
        }
        path.reverse();
        path
    }
}

/// Subdominant ultrametric of a symmetric dissimilarity given row-major.
fn subdominant_of(n: usize, w: impl Fn(usize, usize) -> f64) -> SubdominantResult {
    // Prim on the complete graph
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    let mut link = vec![0usize; n];
    let mut mst = Vec::with_capacity(n.saturating_sub(1));
    if n > 0 {
        best[0] = 0.0;
    }
    for _ in 0..n {
        let mut u = usize::MAX;
        for v in 0..n {
            if !in_tree[v] && (u == usize::MAX || best[v] < best[u]) {
                u = v;
            }
        }
        in_tree[u] = true;
        if u != 0 {
            mst.push((link[u], u, best[u]));
        }
        for v in 0..n {
            if !in_tree[v] {
                let d = w(u, v);
                if d < best[v] {
                    best[v] = d;
                    link[v] = u;
                }
            }
        }
    }

    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for &(u, v, c) in &mst {
        adj[u].push((v, c));
        adj[v].push((u, c));
    }
    let mut matrix = vec![0.0; n * n];
    for root in 0..n {
        let mut seen = vec![false; n];
        seen[root] = true;
        let mut stack = vec![(root, 0.0f64)];
        while let Some((u, m)) = stack.pop() {
            matrix[root * n + u] = m;
            for &(v, c) in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    stack.push((v, m.max(c)));
                }
            }
        }
    }
    SubdominantResult { n, matrix, mst }
}

pub fn subdominant_ultrametric(space: &FiniteMetricSpace) -> SubdominantResult {
    subdominant_of(space.len(), |i, j| space.d(i, j))
}

/// Whether `subset` embeds into an ultrametric with distortion `D`.
pub fn embeddable(space: &FiniteMetricSpace, subset: &[usize], distortion: f64) -> Result<bool> {
    if !(distortion >= 1.0) {
        return Err(Error::Domain(format!("distortion must be >= 1, got {distortion}")));
    }
    for &x in subset {
        space.check_index(x)?;
    }
    Ok(embeddable_unchecked(space, subset, distortion))
}

fn embeddable_unchecked(space: &FiniteMetricSpace, subset: &[usize], distortion: f64) -> bool {
    let k = subset.len();
    if k < 3 {
        return true;
    }
    let sub = subdominant_of(k, |a, b| distortion * space.d(subset[a], subset[b]));
    for a in 0..k {
        for b in (a + 1)..k {
            let d = space.d(subset[a], subset[b]);
            if sub.value(a, b) < d * (1.0 - DOMINANCE_SLACK) {
                return false;
            }
        }
    }
    true
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaxSubset {
    pub size: usize,
    pub witness: Vec<usize>,
}

/// Largest embeddable subset of size at most `size_cap`, lexicographically
/// first among ties. Exhaustive branch-and-bound over subsets grown in
/// increasing index order; embeddability is hereditary, so every
/// embeddable set is reachable through embeddable prefixes. Failing triples
/// are precomputed and used as pruning cores.
pub fn max_subset(space: &FiniteMetricSpace, distortion: f64, size_cap: usize) -> Result<MaxSubset> {
    let n = space.len();
    if n > MAX_EXHAUSTIVE {
        return Err(Error::TooLarge { n, max: MAX_EXHAUSTIVE });
    }
    if !(distortion >= 1.0) {
        return Err(Error::Domain(format!("distortion must be >= 1, got {distortion}")));
    }
    let cap = size_cap.min(n);
    if cap == 0 {
        return Ok(MaxSubset { size: 0, witness: Vec::new() });
    }

    // bad_with[i][j]: bitmask of k such that {i, j, k} does not embed
    let mut bad_with = vec![vec![0u32; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            for k in (j + 1)..n {
                if !embeddable_unchecked(space, &[i, j, k], distortion) {
                    bad_with[i][j] |= 1 << k;
                    bad_with[j][i] |= 1 << k;
                    bad_with[i][k] |= 1 << j;
                    bad_with[k][i] |= 1 << j;
                    bad_with[j][k] |= 1 << i;
                    bad_with[k][j] |= 1 << i;
                }
            }
        }
    }

    struct Search<'a> {
        space: &'a FiniteMetricSpace,
        distortion: f64,
        bad_with: Vec<Vec<u32>>,
        cap: usize,
        best: Vec<usize>,
    }

    impl Search<'_> {
        fn admits(&self, current: &[usize], mask: u32, c: usize) -> bool {
            if current.iter().any(|&i| self.bad_with[i][c] & mask != 0) {
                return false;
            }
            if current.len() < 3 {
                return true;
            }
            let mut trial = current.to_vec();
            trial.push(c);
            embeddable_unchecked(self.space, &trial, self.distortion)
        }

        fn dfs(&mut self, current: &mut Vec<usize>, mask: u32, next: usize) {
            if current.len() > self.best.len() {
                self.best = current.clone();
            }
            let n = self.space.len();
            if self.best.len() >= self.cap {
                return;
            }
            for c in next..n {
                if current.len() + (n - c) <= self.best.len() {
                    return;
                }
                if self.admits(current, mask, c) {
                    current.push(c);
                    self.dfs(current, mask | (1 << c), c + 1);
                    current.pop();
                    if self.best.len() >= self.cap {
                        return;
                    }
                }
            }
        }
    }

    let mut search = Search { space, distortion, bad_with, cap, best: Vec::new() };
    search.dfs(&mut Vec::new(), 0, 0);
    let witness = search.best;
    Ok(MaxSubset { size: witness.len(), witness })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::is_ultrametric_matrix;

    fn path3() -> FiniteMetricSpace {
        FiniteMetricSpace::new(&[vec![0.0, 1.0, 2.0], vec![1.0, 0.0, 1.0], vec![2.0, 1.0, 0.0]])
            .unwrap()
    }

    fn uniform(n: usize) -> FiniteMetricSpace {
        let rows: Vec<Vec<f64>> =
            (0..n).map(|i| (0..n).map(|j| if i == j { 0.0 } else { 1.0 }).collect()).collect();
        FiniteMetricSpace::new(&rows).unwrap()
    }

    #[test]
    fn subdominant_examples() {
        let p = subdominant_ultrametric(&path3());
        assert_eq!(p.value(0, 1), 1.0);
        assert_eq!(p.value(1, 2), 1.0);
        assert_eq!(p.value(0, 2), 1.0);
        assert_eq!(p.witness_path(0, 2), vec![0, 1, 2]);
        let u = uniform(5);
        assert_eq!(subdominant_ultrametric(&u).to_rows(), u.to_rows());
        let ultra = vec![vec![0.0, 1.0, 2.0], vec![1.0, 0.0, 2.0], vec![2.0, 2.0, 0.0]];
        let s = FiniteMetricSpace::new(&ultra).unwrap();
        let sub = subdominant_ultrametric(&s);
        assert_eq!(sub.to_rows(), ultra);
        assert!(is_ultrametric_matrix(&sub.to_rows()).unwrap());
    }

    #[test]
    fn embeddable_examples() {
        let p = path3();
        assert!(embeddable(&p, &[0, 2], 1.0).unwrap());
        assert!(embeddable(&p, &[0, 1, 2], 2.0).unwrap());
        assert!(!embeddable(&p, &[0, 1, 2], 1.9).unwrap());
        assert!(embeddable(&p, &[0, 1, 2], 0.5).is_err());
        assert!(embeddable(&p, &[0, 9], 2.0).is_err());
    }

    #[test]
    fn max_subset_examples() {
        let p = path3();
        let m = max_subset(&p, 1.5, 20).unwrap();
        assert_eq!(m.size, 2);
        assert_eq!(m.witness, vec![0, 1]);
        assert_eq!(max_subset(&p, 2.0, 20).unwrap().size, 3);
        assert_eq!(max_subset(&p, 2.0, 2).unwrap().size, 2);
        assert_eq!(max_subset(&uniform(7), 1.0, 20).unwrap().size, 7);
        assert!(matches!(max_subset(&uniform(21), 1.0, 30), Err(Error::TooLarge { .. })));
    }
}
