//! The finite candidate grid: the discretization of the search space that
//! every surrogate, bound and region operates on.

use serde::{Deserialize, Serialize};

/// Finite set of candidate points, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateGrid {
    dim: usize,
    coords: Vec<f64>,
}

impl CandidateGrid {
    pub fn new(dim: usize, coords: Vec<f64>) -> Self {
        assert!(dim > 0, "grid dimension must be positive");
        assert_eq!(coords.len() % dim, 0, "coordinate buffer must be rectangular");
        CandidateGrid { dim, coords }
    }

    pub fn from_points(points: &[Vec<f64>]) -> Self {
        let dim = points.first().map_or(1, Vec::len);
        let mut coords = Vec::with_capacity(points.len() * dim);
        for p in points {
            assert_eq!(p.len(), dim);
            coords.extend_from_slice(p);
        }
        CandidateGrid { dim, coords }
    }

    /// `n` uniformly spaced points over `[lo, hi]`, endpoints included.
    pub fn linspace_1d(lo: f64, hi: f64, n: usize) -> Self {
        assert!(n >= 2);
        let step = (hi - lo) / (n - 1) as f64;
        let coords = (0..n).map(|i| lo + step * i as f64).collect();
        CandidateGrid { dim: 1, coords }
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim)
    }

    pub fn to_point_vecs(&self) -> Vec<Vec<f64>> {
        self.points().map(<[f64]>::to_vec).collect()
    }
}
