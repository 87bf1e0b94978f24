//! Metric spaces: finite matrices, level trees and strict HSTs, the plane.

pub mod embed;
pub mod plane;
pub mod tree;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Center;
use crate::EPS;

pub use embed::{distortion, embed_ternary_hst, Embedding};
pub use plane::PlaneMetric;
pub use tree::{build_strict_hst, LevelTree, StrictHst, TreeNode};

/// An explicit (pseudo-)metric given as a distance matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiniteMetric {
    pub dist: Vec<Vec<f64>>,
}

impl FiniteMetric {
    /// Wraps a matrix after checking it is a pseudo-metric.
    pub fn new(dist: Vec<Vec<f64>>) -> Result<Self> {
        let v = validate_metric(&dist)?;
        if let Some(first) = v.first() {
            return Err(Error::Structural(format!(
                "not a metric ({} violations, first: {first:?})",
                v.len()
            )));
        }
        Ok(FiniteMetric { dist })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum MetricSpace {
    Finite(FiniteMetric),
    Hst(StrictHst),
    Plane(PlaneMetric),
    /// General level tree (reductions produce these).
    Tree(LevelTree),
}

impl MetricSpace {
    pub fn len(&self) -> usize {
        match self {
            MetricSpace::Finite(m) => m.dist.len(),
            MetricSpace::Hst(h) => h.tree().num_nodes(),
            MetricSpace::Plane(p) => p.coords.len(),
            MetricSpace::Tree(t) => t.num_nodes(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn kind(&self) -> &'static str {
        match self {
            MetricSpace::Finite(_) => "finite",
            MetricSpace::Hst(_) => "hst",
            MetricSpace::Plane(_) => "plane",
            MetricSpace::Tree(_) => "tree",
        }
    }

    pub fn is_plane(&self) -> bool {
        matches!(self, MetricSpace::Plane(_))
    }

    pub fn as_plane(&self) -> Option<&PlaneMetric> {
        match self {
            MetricSpace::Plane(p) => Some(p),
            _ => None,
        }
    }

    pub fn as_tree(&self) -> Option<&LevelTree> {
        match self {
            MetricSpace::Hst(h) => Some(h.tree()),
            MetricSpace::Tree(t) => Some(t),
            _ => None,
        }
    }

    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        match self {
            MetricSpace::Finite(m) => m.dist[i][j],
            MetricSpace::Hst(h) => h.dist(i, j),
            MetricSpace::Plane(p) => p.dist(i, j),
            MetricSpace::Tree(t) => t.dist(i, j),
        }
    }

    /// Distance from a cluster center to point `p`.
    ///
    /// Panics if a free coordinate is used with a non-planar metric.
    #[inline]
    pub fn center_dist(&self, c: &Center, p: usize) -> f64 {
        match (c, self) {
            (Center::Point(z), _) => self.dist(*z, p),
            (Center::Coord(xy), MetricSpace::Plane(m)) => plane::euclid(*xy, m.coords[p]),
            (Center::Coord(_), _) => panic!("coordinate center on a {} metric", self.kind()),
        }
    }

    pub fn contains_center(&self, c: &Center) -> bool {
        match c {
            Center::Point(z) => *z < self.len(),
            Center::Coord(_) => self.is_plane(),
        }
    }

    /// Full distance matrix over all points.
    pub fn to_matrix(&self) -> Vec<Vec<f64>> {
        let n = self.len();
        (0..n).map(|i| (0..n).map(|j| self.dist(i, j)).collect()).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    Diagonal(usize),
    Negative(usize, usize),
    Asymmetric(usize, usize),
    /// `dist[i][k] > dist[i][j] + dist[j][k]`, reported as `(i, j, k)` with `i < k`.
    Triangle(usize, usize, usize),
}

/// Lists every diagonal, sign, symmetry and triangle violation of `dist`.
/// Zero distances between distinct points are allowed.
pub fn validate_metric(dist: &[Vec<f64>]) -> Result<Vec<Violation>> {
    let n = dist.len();
    if let Some((i, row)) = dist.iter().enumerate().find(|(_, r)| r.len() != n) {
        return Err(Error::Structural(format!("row {i} has {} entries, expected {n}", row.len())));
    }
    let tol = |x: f64| EPS * x.abs().max(1.0);
    let mut out = Vec::new();
    for i in 0..n {
        if dist[i][i].abs() > tol(0.0) {
            out.push(Violation::Diagonal(i));
        }
        for j in 0..n {
            if dist[i][j] < -tol(0.0) || dist[i][j].is_nan() {
                out.push(Violation::Negative(i, j));
            }
            if i < j && (dist[i][j] - dist[j][i]).abs() > tol(dist[i][j]) {
                out.push(Violation::Asymmetric(i, j));
            }
        }
    }
    for i in 0..n {
        for k in i + 1..n {
            for j in 0..n {
                let via = dist[i][j] + dist[j][k];
                if dist[i][k] > via + tol(via) {
                    out.push(Violation::Triangle(i, j, k));
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn valid_two_point() {
        assert!(validate_metric(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap().is_empty());
    }

    #[test]
    fn asymmetric() {
        let v = validate_metric(&[vec![0.0, 1.0], vec![2.0, 0.0]]).unwrap();
        assert_eq!(v, vec![Violation::Asymmetric(0, 1)]);
    }

    #[test]
    fn triangle() {
        let d = vec![vec![0.0, 1.0, 5.0], vec![1.0, 0.0, 1.0], vec![5.0, 1.0, 0.0]];
        let v = validate_metric(&d).unwrap();
        assert_eq!(v, vec![Violation::Triangle(0, 1, 2)]);
    }

    #[test]
    fn non_square() {
        assert!(matches!(validate_metric(&[vec![0.0, 1.0]]), Err(Error::Structural(_))));
    }

    #[test]
    fn pseudo_metric_allowed() {
        let d = vec![vec![0.0, 0.0, 1.0], vec![0.0, 0.0, 1.0], vec![1.0, 1.0, 0.0]];
        assert!(validate_metric(&d).unwrap().is_empty());
    }

    #[test]
    fn diagonal_and_negative() {
        let d = vec![vec![1.0, -1.0], vec![-1.0, 0.0]];
        let v = validate_metric(&d).unwrap();
        assert!(v.contains(&Violation::Diagonal(0)));
        assert!(v.contains(&Violation::Negative(0, 1)));
    }

    #[test]
    fn json_kinds() {
        let m: MetricSpace = serde_json::from_str(r#"{"kind":"hst","alpha":2.0,"fanouts":[3]}"#).unwrap();
        assert_eq!(m.len(), 4);
        let m: MetricSpace = serde_json::from_str(r#"{"kind":"plane","coords":[[0,0],[3,4]]}"#).unwrap();
        assert_eq!(m.dist(0, 1), 5.0);
        let m: MetricSpace = serde_json::from_str(r#"{"kind":"finite","dist":[[0,2],[2,0]]}"#).unwrap();
        assert_eq!(m.dist(1, 0), 2.0);
        let back = serde_json::to_string(&m).unwrap();
        assert_eq!(back, r#"{"kind":"finite","dist":[[0.0,2.0],[2.0,0.0]]}"#);
        assert!(serde_json::from_str::<MetricSpace>(r#"{"kind":"hst","alpha":0.5,"fanouts":[3]}"#).is_err());
    }
}
