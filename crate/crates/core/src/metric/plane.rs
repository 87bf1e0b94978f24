use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::approx_le;

pub type Point2 = [f64; 2];

/// Points in the Euclidean plane.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlaneMetric {
    pub coords: Vec<Point2>,
}

impl PlaneMetric {
    pub fn new(coords: Vec<Point2>) -> Self {
        PlaneMetric { coords }
    }

    pub fn dist(&self, i: usize, j: usize) -> f64 {
        euclid(self.coords[i], self.coords[j])
    }
}

#[inline]
pub fn euclid(a: Point2, b: Point2) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Circle {
    pub center: Point2,
    pub radius: f64,
}

impl Circle {
    pub fn contains(&self, p: Point2) -> bool {
        approx_le(euclid(self.center, p), self.radius)
    }

    fn from_two(a: Point2, b: Point2) -> Circle {
        let center = [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0];
        Circle { center, radius: euclid(a, b) / 2.0 }
    }

    fn from_three(a: Point2, b: Point2, c: Point2) -> Option<Circle> {
        let d = 2.0 * (a[0] * (b[1] - c[1]) + b[0] * (c[1] - a[1]) + c[0] * (a[1] - b[1]));
        if d.abs() < 1e-15 {
            return None;
        }
        let a2 = a[0] * a[0] + a[1] * a[1];
        let b2 = b[0] * b[0] + b[1] * b[1];
        let c2 = c[0] * c[0] + c[1] * c[1];
        let ux = (a2 * (b[1] - c[1]) + b2 * (c[1] - a[1]) + c2 * (a[1] - b[1])) / d;
        let uy = (a2 * (c[0] - b[0]) + b2 * (a[0] - c[0]) + c2 * (b[0] - a[0])) / d;
        let center = [ux, uy];
        let radius = euclid(center, a).max(euclid(center, b)).max(euclid(center, c));
        Some(Circle { center, radius })
    }
}

fn circle_from_boundary(boundary: &[Point2]) -> Circle {
    match boundary {
        [] => Circle { center: [0.0, 0.0], radius: 0.0 },
        [a] => Circle { center: *a, radius: 0.0 },
        [a, b] => Circle::from_two(*a, *b),
        [a, b, c] => Circle::from_three(*a, *b, *c).unwrap_or_else(|| {
            // collinear: the widest pair spans the other point
            let cands = [Circle::from_two(*a, *b), Circle::from_two(*a, *c), Circle::from_two(*b, *c)];
            cands
                .into_iter()
                .max_by(|x, y| x.radius.total_cmp(&y.radius))
                .unwrap()
        }),
        _ => unreachable!("boundary holds at most three points"),
    }
}

/// Smallest circle enclosing `points` (Welzl's randomized incremental
/// method, iterative form). The permutation is seeded so results are
/// reproducible. Returns `None` for an empty input.
pub fn minimum_enclosing_circle(points: &[Point2]) -> Option<Circle> {
    if points.is_empty() {
        return None;
    }
    let mut pts = points.to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_c1c1e);
    pts.shuffle(&mut rng);

    let mut c = circle_from_boundary(&pts[..1]);
    for i in 1..pts.len() {
        if c.contains(pts[i]) {
            continue;
        }
        c = circle_from_boundary(&[pts[i]]);
        for j in 0..i {
            if c.contains(pts[j]) {
                continue;
            }
            c = circle_from_boundary(&[pts[i], pts[j]]);
            for k in 0..j {
                if !c.contains(pts[k]) {
                    c = circle_from_boundary(&[pts[i], pts[j], pts[k]]);
                }
            }
        }
    }
    Some(c)
}

/// Intersection points of the two circles of radius `r` around `a` and `b`.
pub fn equal_circle_intersections(a: Point2, b: Point2, r: f64) -> Vec<Point2> {
    let d = euclid(a, b);
    if d == 0.0 || d > 2.0 * r * (1.0 + 1e-12) {
        return Vec::new();
    }
    let mid = [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0];
    let h = (r * r - d * d / 4.0).max(0.0).sqrt();
    if h == 0.0 {
        return vec![mid];
    }
    let ux = -(b[1] - a[1]) / d;
    let uy = (b[0] - a[0]) / d;
    vec![[mid[0] + h * ux, mid[1] + h * uy], [mid[0] - h * ux, mid[1] - h * uy]]
}

/// Centers at which a radius-`r` disk attains every maximal subset of
/// `points` it can cover: the points themselves plus all pairwise
/// intersections of the radius-`r` circles around them.
pub fn critical_centers(points: &[Point2], r: f64) -> Vec<Point2> {
    let mut out: Vec<Point2> = points.to_vec();
    if r > 0.0 {
        for i in 0..points.len() {
            for j in i + 1..points.len() {
                out.extend(equal_circle_intersections(points[i], points[j], r));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn mec_small_cases() {
        assert!(minimum_enclosing_circle(&[]).is_none());
        let c = minimum_enclosing_circle(&[[1.0, 2.0]]).unwrap();
        assert_eq!(c.radius, 0.0);
        let c = minimum_enclosing_circle(&[[0.0, 0.0], [2.0, 0.0]]).unwrap();
        assert_relative_eq!(c.radius, 1.0);
        assert_relative_eq!(c.center[0], 1.0);
    }

    #[test]
    fn mec_unit_triangle_is_circumcircle() {
        let pts = [[0.0, 0.0], [1.0, 0.0], [0.5, 3f64.sqrt() / 2.0]];
        let c = minimum_enclosing_circle(&pts).unwrap();
        assert_relative_eq!(c.radius, 1.0 / 3f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn mec_obtuse_uses_diameter() {
        let pts = [[0.0, 0.0], [4.0, 0.0], [2.0, 0.5]];
        let c = minimum_enclosing_circle(&pts).unwrap();
        assert_relative_eq!(c.radius, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn mec_matches_brute_force() {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let n = rng.gen_range(1..9);
            let pts: Vec<Point2> = (0..n).map(|_| [rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)]).collect();
            let c = minimum_enclosing_circle(&pts).unwrap();
            assert!(pts.iter().all(|&p| c.contains(p)));
            // brute force over all pairs and triples
            let mut best = f64::INFINITY;
            let mut consider = |cand: Circle| {
                if pts.iter().all(|&p| cand.contains(p)) {
                    best = best.min(cand.radius);
                }
            };
            consider(Circle { center: pts[0], radius: 0.0 });
            for i in 0..n {
                for j in i + 1..n {
                    consider(Circle::from_two(pts[i], pts[j]));
                    for k in j + 1..n {
                        if let Some(c3) = Circle::from_three(pts[i], pts[j], pts[k]) {
                            consider(c3);
                        }
                    }
                }
            }
            assert_relative_eq!(c.radius, best, epsilon = 1e-9);
        }
    }

    #[test]
    fn intersections_lie_on_both_circles() {
        let pts = equal_circle_intersections([0.0, 0.0], [1.0, 0.0], 1.0);
        assert_eq!(pts.len(), 2);
        for p in pts {
            assert_relative_eq!(euclid(p, [0.0, 0.0]), 1.0, epsilon = 1e-12);
            assert_relative_eq!(euclid(p, [1.0, 0.0]), 1.0, epsilon = 1e-12);
        }
        assert_eq!(equal_circle_intersections([0.0, 0.0], [2.0, 0.0], 1.0), vec![[1.0, 0.0]]);
        assert!(equal_circle_intersections([0.0, 0.0], [3.0, 0.0], 1.0).is_empty());
    }
}
