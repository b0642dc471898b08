//! Reproducible metric-space families.
//!
//! Every generated space with at least two points is normalized to diameter
//! exactly 2, the precondition of the fragmentation. Specs have a textual
//! form such as `euclidean:dim=3,n=128,seed=7` or `binary_tree:depth=4`.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::metric::FiniteMetricSpace;

pub const CONNECT_ATTEMPTS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    Uniform,
    Path,
    Cycle,
    Euclidean { dim: usize },
    GnpShortestPath { p: f64 },
    BinaryTree { depth: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorSpec {
    pub family: Family,
    pub n: usize,
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn new(family: Family, n: usize, seed: u64) -> Result<Self> {
        let spec = Self { family, n, seed };
        spec.validate()?;
        Ok(spec)
    }

    /// Complete binary tree of the given depth (`2^{depth+1} - 1` nodes).
    pub fn binary_tree(depth: u32, seed: u64) -> Result<Self> {
        if depth > 20 {
            return Err(Error::BadSpec(format!("binary tree depth {depth} is too large")));
        }
        Self::new(Family::BinaryTree { depth }, (1usize << (depth + 1)) - 1, seed)
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::BadSpec("n must be at least 1".into()));
        }
        match self.family {
            Family::Euclidean { dim: 0 } => {
                Err(Error::BadSpec("euclidean dim must be at least 1".into()))
            }
            Family::GnpShortestPath { p } if !(p > 0.0 && p <= 1.0) => {
                Err(Error::BadSpec(format!("edge probability must lie in (0, 1], got {p}")))
            }
            Family::BinaryTree { depth } if depth > 20 || self.n != (1usize << (depth + 1)) - 1 => {
                Err(Error::BadSpec(format!("binary tree of depth {depth} cannot have {} nodes", self.n)))
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for GeneratorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.family {
            Family::Uniform => write!(f, "uniform:n={},seed={}", self.n, self.seed),
            Family::Path => write!(f, "path:n={},seed={}", self.n, self.seed),
            Family::Cycle => write!(f, "cycle:n={},seed={}", self.n, self.seed),
            Family::Euclidean { dim } => {
                write!(f, "euclidean:dim={dim},n={},seed={}", self.n, self.seed)
            }
            Family::GnpShortestPath { p } => write!(f, "gnp:p={p},n={},seed={}", self.n, self.seed),
            Family::BinaryTree { depth } => {
                write!(f, "binary_tree:depth={depth},seed={}", self.seed)
            }
        }
    }
}

impl FromStr for GeneratorSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, params) = s.split_once(':').unwrap_or((s, ""));
        let mut n: Option<usize> = None;
        let mut seed = 0u64;
        let mut dim: Option<usize> = None;
        let mut p: Option<f64> = None;
        let mut depth: Option<u32> = None;
        for kv in params.split(',').filter(|kv| !kv.is_empty()) {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::BadSpec(format!("expected key=value, got `{kv}`")))?;
            let bad = |_| Error::BadSpec(format!("invalid value `{v}` for `{k}`"));
            match k {
                "n" => n = Some(v.parse().map_err(bad)?),
                "seed" => seed = v.parse().map_err(bad)?,
                "dim" => dim = Some(v.parse().map_err(bad)?),
                "p" => p = Some(v.parse().map_err(|_| Error::BadSpec(format!("invalid p `{v}`")))?),
                "depth" => depth = Some(v.parse().map_err(bad)?),
                _ => return Err(Error::BadSpec(format!("unknown parameter `{k}`"))),
            }
        }
        let need_n = || n.ok_or_else(|| Error::BadSpec(format!("`{name}` needs n=")));
        match name {
            "uniform" => Self::new(Family::Uniform, need_n()?, seed),
            "path" => Self::new(Family::Path, need_n()?, seed),
            "cycle" => Self::new(Family::Cycle, need_n()?, seed),
            "euclidean" => {
                Self::new(Family::Euclidean { dim: dim.unwrap_or(2) }, need_n()?, seed)
            }
            "gnp" | "gnp_shortest_path" => Self::new(
                Family::GnpShortestPath {
                    p: p.ok_or_else(|| Error::BadSpec("gnp needs p=".into()))?,
                },
                need_n()?,
                seed,
            ),
            "binary_tree" | "tree" => {
                let depth = depth.ok_or_else(|| Error::BadSpec("binary_tree needs depth=".into()))?;
                let spec = Self::binary_tree(depth, seed)?;
                match n {
                    Some(n) if n != spec.n => Err(Error::BadSpec(format!(
                        "binary tree of depth {depth} has {} nodes, not {n}",
                        spec.n
                    ))),
                    _ => Ok(spec),
                }
            }
            other => Err(Error::BadSpec(format!("unknown family `{other}`"))),
        }
    }
}

/// Builds the space described by `spec`, normalized to diameter 2.
pub fn generate(spec: &GeneratorSpec) -> Result<FiniteMetricSpace> {
    spec.validate()?;
    let n = spec.n;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let flat: Vec<f64> = match spec.family {
        Family::Uniform => from_fn(n, |_, _| 1.0),
        Family::Path => from_fn(n, |i, j| i.abs_diff(j) as f64),
        Family::Cycle => from_fn(n, |i, j| {
            let k = i.abs_diff(j);
            k.min(n - k) as f64
        }),
        Family::Euclidean { dim } => {
            let pts: Vec<Vec<f64>> =
                (0..n).map(|_| (0..dim).map(|_| rng.random::<f64>()).collect()).collect();
            from_fn(n, |i, j| {
                pts[i].iter().zip(&pts[j]).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
            })
        }
        Family::GnpShortestPath { p } => gnp_distances(n, p, &mut rng)?,
        Family::BinaryTree { .. } => from_fn(n, tree_distance),
    };
    let space = FiniteMetricSpace::from_flat(n, flat)?;
    if n >= 2 {
        Ok(space.normalize()?.0)
    } else {
        Ok(space)
    }
}

fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = f(i, j);
            out[i * n + j] = d;
            out[j * n + i] = d;
        }
    }
    out
}

/// Hop distance in a heap-indexed complete binary tree.
fn tree_distance(i: usize, j: usize) -> f64 {
    let (mut a, mut b) = (i + 1, j + 1);
    let mut hops = 0;
    while a != b {
        if a > b {
            a /= 2;
        } else {
            b /= 2;
        }
        hops += 1;
    }
    hops as f64
}

fn gnp_distances<R: Rng>(n: usize, p: f64, rng: &mut R) -> Result<Vec<f64>> {
    for _ in 0..CONNECT_ATTEMPTS {
        let mut adj = vec![Vec::new(); n];
        for i in 0..n {
            for j in (i + 1)..n {
                if rng.random::<f64>() < p {
                    adj[i].push(j);
                    adj[j].push(i);
                }
            }
        }
        let mut out = vec![0.0; n * n];
        let mut connected = true;
        for s in 0..n {
            let mut hops = vec![usize::MAX; n];
            hops[s] = 0;
            let mut queue = VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                for &v in &adj[u] {
                    if hops[v] == usize::MAX {
                        hops[v] = hops[u] + 1;
                        queue.push_back(v);
                    }
                }
            }
            if hops.contains(&usize::MAX) {
                connected = false;
                break;
            }
            for t in 0..n {
                out[s * n + t] = hops[t] as f64;
            }
        }
        if connected {
            return Ok(out);
        }
    }
    Err(Error::Disconnected { attempts: CONNECT_ATTEMPTS })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_is_all_twos() {
        let s = generate(&"uniform:n=5".parse().unwrap()).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                assert_eq!(s.d(i, j), if i == j { 0.0 } else { 2.0 });
            }
        }
    }

    #[test]
    fn path_three_is_identity_scaling() {
        let s = generate(&"path:n=3".parse().unwrap()).unwrap();
        assert_eq!(s.to_rows(), vec![vec![0.0, 1.0, 2.0], vec![1.0, 0.0, 1.0], vec![2.0, 1.0, 0.0]]);
    }

    #[test]
    fn euclidean_is_valid_and_normalized() {
        let spec: GeneratorSpec = "euclidean:dim=2,n=4,seed=3".parse().unwrap();
        let s = generate(&spec).unwrap();
        assert_eq!(s.diameter(), 2.0);
        assert_eq!(generate(&spec).unwrap(), s);
    }

    #[test]
    fn tree_and_cycle_distances() {
        assert_eq!(tree_distance(0, 1), 1.0);
        assert_eq!(tree_distance(3, 4), 2.0);
        assert_eq!(tree_distance(3, 6), 4.0);
        let s = generate(&GeneratorSpec::binary_tree(2, 0).unwrap()).unwrap();
        assert_eq!(s.len(), 7);
        assert_eq!(s.d(3, 6), 2.0);
        let c = generate(&"cycle:n=6".parse().unwrap()).unwrap();
        assert_eq!(c.d(0, 3), 2.0);
        assert!((c.d(0, 5) - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn gnp_is_connected_metric() {
        let s = generate(&"gnp:p=0.3,n=20,seed=4".parse().unwrap()).unwrap();
        assert_eq!(s.diameter(), 2.0);
        let tiny: GeneratorSpec = "gnp:p=0.0001,n=30,seed=1".parse().unwrap();
        assert_eq!(generate(&tiny), Err(Error::Disconnected { attempts: CONNECT_ATTEMPTS }));
    }

    #[test]
    fn spec_strings() {
        let s: GeneratorSpec = "euclidean:dim=3,n=128,seed=7".parse().unwrap();
        assert_eq!(s.family, Family::Euclidean { dim: 3 });
        assert_eq!((s.n, s.seed), (128, 7));
        assert_eq!(s.to_string().parse::<GeneratorSpec>().unwrap(), s);
        let t: GeneratorSpec = "binary_tree:depth=3".parse().unwrap();
        assert_eq!(t.n, 15);
        assert_eq!(t.to_string().parse::<GeneratorSpec>().unwrap(), t);
        for bad in ["", "uniform", "uniform:n=0", "cube:n=3", "gnp:n=4", "gnp:p=2,n=4",
            "binary_tree:depth=2,n=5", "euclidean:dim=0,n=3", "path:n=x", "path:n"] {
            assert!(bad.parse::<GeneratorSpec>().is_err(), "{bad}");
        }
    }

    #[test]
    fn single_point() {
        let s = generate(&"uniform:n=1".parse().unwrap()).unwrap();
        assert_eq!(s.len(), 1);
    }
}
