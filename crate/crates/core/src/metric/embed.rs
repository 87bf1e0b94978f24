//! Planar embedding of ternary strict α-HSTs with bounded distortion.

use crate::error::{Error, Result};
use crate::metric::plane::{euclid, Point2};
use crate::metric::tree::{build_strict_hst, StrictHst, TreeNode};

/// Node-id indexed planar positions for every node of a tree.
#[derive(Clone, Debug, PartialEq)]
pub struct Embedding {
    pub coords: Vec<Point2>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Dir {
    Left,
    Up,
    Right,
    Down,
}

impl Dir {
    const ALL: [Dir; 4] = [Dir::Left, Dir::Up, Dir::Right, Dir::Down];

    fn opposite(self) -> Dir {
        match self {
            Dir::Left => Dir::Right,
            Dir::Right => Dir::Left,
            Dir::Up => Dir::Down,
            Dir::Down => Dir::Up,
        }
    }

    fn step(self, p: Point2, len: f64) -> Point2 {
        match self {
            Dir::Left => [p[0] - len, p[1]],
            Dir::Right => [p[0] + len, p[1]],
            Dir::Up => [p[0], p[1] + len],
            Dir::Down => [p[0], p[1] - len],
        }
    }
}

/// Upper bound `√2·α/(α−2)` on the distortion of [`embed_ternary_hst`].
pub fn distortion_bound(alpha: f64) -> f64 {
    std::f64::consts::SQRT_2 * alpha / (alpha - 2.0)
}

/// Exact maximum distortion of the embedding for `k`:
/// `2(α^(k+1) − 1) / (√2 (α^(k+1) − 2α^k + 1))`.
pub fn distortion_closed_form(alpha: f64, k: usize) -> f64 {
    let a = alpha.powi(k as i32 + 1);
    let b = alpha.powi(k as i32);
    2.0 * (a - 1.0) / (std::f64::consts::SQRT_2 * (a - 2.0 * b + 1.0))
}

/// Embeds the ternary strict α-HST whose root's children sit at distance
/// `α^k` (so the tree has `k + 1` levels above the leaves and `3^(k+1)`
/// leaves).
///
/// The root goes to the origin and its children to `(−α^k, 0)`, `(0, α^k)`,
/// `(α^k, 0)`. Every other node puts its three children at distance
/// `α^(level−1)` along the three axis directions that do not point back at
/// its own parent.
pub fn embed_ternary_hst(alpha: f64, k: usize) -> Result<(StrictHst, Embedding)> {
    if !(alpha > 2.0 && alpha < 3.0) {
        return Err(Error::Parameter(format!("alpha must lie in (2, 3), got {alpha}")));
    }
    let hst = build_strict_hst(alpha, &vec![3; k + 1])?;
    let tree = hst.tree();
    let mut coords = vec![[0.0, 0.0]; tree.num_nodes()];
    // direction from parent to node; the root is treated as reached moving up
    let mut heading = vec![Dir::Up; tree.num_nodes()];
    let mut stack = vec![tree.root()];
    while let Some(node) = stack.pop() {
        if node.level == 0 {
            continue;
        }
        let id = tree.id(node);
        let len = alpha.powi(node.level as i32 - 1);
        let back = heading[id].opposite();
        let dirs = Dir::ALL.iter().copied().filter(|&d| d != back);
        for (child, dir) in tree.children(node).zip(dirs) {
            let cid = tree.id(child);
            coords[cid] = dir.step(coords[id], len);
            heading[cid] = dir;
            stack.push(child);
        }
    }
    Ok((hst, Embedding { coords }))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DistortionReport {
    /// max over node pairs of `d_T / d_P`
    pub max: f64,
    pub argmax: (TreeNode, TreeNode),
    /// largest `d_P − d_T`; non-positive for a contraction
    pub max_expansion: f64,
}

/// Exhaustive pairwise distortion of `e` against the tree metric of `tree`.
pub fn distortion(tree: &StrictHst, e: &Embedding) -> Result<DistortionReport> {
    let t = tree.tree();
    let n = t.num_nodes();
    if e.coords.len() != n {
        return Err(Error::Structural(format!(
            "embedding covers {} of {} nodes",
            e.coords.len(),
            n
        )));
    }
    let mut best = DistortionReport { max: 1.0, argmax: (t.node(0), t.node(0)), max_expansion: f64::NEG_INFINITY };
    for i in 0..n {
        for j in i + 1..n {
            let dt = t.dist(i, j);
            let dp = euclid(e.coords[i], e.coords[j]);
            best.max_expansion = best.max_expansion.max(dp - dt);
            let ratio = if dp > 0.0 {
                dt / dp
            } else if dt > 0.0 {
                f64::INFINITY
            } else {
                1.0
            };
            if ratio > best.max {
                best.max = ratio;
                best.argmax = (t.node(i), t.node(j));
            }
        }
    }
    Ok(best)
}
