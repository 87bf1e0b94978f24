use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A node of a level-structured tree: leaves are level 0, the root is the
/// top level. `index` counts left to right within the level.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TreeNode {
    pub level: usize,
    pub index: usize,
}

/// Complete rooted tree with uniform fanout and uniform edge length per
/// level.
///
/// `fanouts[l]` is the number of children of each level-`l+1` node and
/// `edges[l]` the length from a level-`l+1` node to each child. Points are
/// numbered level by level starting with the leaves, so leaf `i` is point
/// `i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TreeRepr", into = "TreeRepr")]
pub struct LevelTree {
    fanouts: Vec<usize>,
    edges: Vec<f64>,
    sizes: Vec<usize>,
    offsets: Vec<usize>,
    depth: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct TreeRepr {
    fanouts: Vec<usize>,
    edges: Vec<f64>,
}

impl TryFrom<TreeRepr> for LevelTree {
    type Error = Error;
    fn try_from(s: TreeRepr) -> Result<Self> {
        LevelTree::new(s.fanouts, s.edges)
    }
}

impl From<LevelTree> for TreeRepr {
    fn from(t: LevelTree) -> Self {
        TreeRepr { fanouts: t.fanouts, edges: t.edges }
    }
}

impl LevelTree {
    pub fn new(fanouts: Vec<usize>, edges: Vec<f64>) -> Result<Self> {
        if fanouts.is_empty() {
            return Err(Error::Parameter("tree needs at least one level".into()));
        }
        if fanouts.len() != edges.len() {
            return Err(Error::Parameter(format!(
                "{} fanouts but {} edge lengths",
                fanouts.len(),
                edges.len()
            )));
        }
        if fanouts.iter().any(|&b| b == 0) {
            return Err(Error::Parameter("fanouts must be >= 1".into()));
        }
        if edges.iter().any(|&e| !(e >= 0.0) || !e.is_finite()) {
            return Err(Error::Parameter("edge lengths must be finite and >= 0".into()));
        }
        let height = fanouts.len();
        let mut sizes = vec![1usize; height + 1];
        for l in (0..height).rev() {
            sizes[l] = sizes[l + 1]
                .checked_mul(fanouts[l])
                .ok_or_else(|| Error::Parameter("tree too large".into()))?;
        }
        let mut offsets = vec![0usize; height + 1];
        for l in 1..=height {
            offsets[l] = offsets[l - 1] + sizes[l - 1];
        }
        let mut depth = vec![0.0; height + 1];
        for l in 1..=height {
            depth[l] = depth[l - 1] + edges[l - 1];
        }
        Ok(LevelTree { fanouts, edges, sizes, offsets, depth })
    }

    /// Level of the root.
    pub fn height(&self) -> usize {
        self.fanouts.len()
    }

    pub fn fanouts(&self) -> &[usize] {
        &self.fanouts
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn num_nodes(&self) -> usize {
        self.offsets[self.height()] + 1
    }

    pub fn num_leaves(&self) -> usize {
        self.sizes[0]
    }

    pub fn level_size(&self, level: usize) -> usize {
        self.sizes[level]
    }

    /// Distance from a level-`level` node down to any leaf of its subtree.
    pub fn depth(&self, level: usize) -> f64 {
        self.depth[level]
    }

    pub fn id(&self, node: TreeNode) -> usize {
        self.offsets[node.level] + node.index
    }

    pub fn node(&self, id: usize) -> TreeNode {
        let level = match self.offsets.binary_search(&id) {
            Ok(l) => l,
            Err(l) => l - 1,
        };
        TreeNode { level, index: id - self.offsets[level] }
    }

    pub fn root(&self) -> TreeNode {
        TreeNode { level: self.height(), index: 0 }
    }

    /// Ancestor of `node` at `level >= node.level`.
    pub fn ancestor(&self, node: TreeNode, level: usize) -> TreeNode {
        debug_assert!(level >= node.level && level <= self.height());
        let span = self.sizes[node.level] / self.sizes[level];
        TreeNode { level, index: node.index / span }
    }

    pub fn parent(&self, node: TreeNode) -> Option<TreeNode> {
        (node.level < self.height()).then(|| self.ancestor(node, node.level + 1))
    }

    pub fn children(&self, node: TreeNode) -> impl Iterator<Item = TreeNode> {
        let (level, fan) = if node.level == 0 {
            (0, 0)
        } else {
            (node.level - 1, self.fanouts[node.level - 1])
        };
        (0..fan).map(move |c| TreeNode { level, index: node.index * fan + c })
    }

    /// Leaf index range `[lo, hi)` under `node`.
    pub fn leaf_range(&self, node: TreeNode) -> (usize, usize) {
        let span = self.sizes[0] / self.sizes[node.level];
        (node.index * span, (node.index + 1) * span)
    }

    /// Level of the lowest common ancestor.
    pub fn lca_level(&self, a: TreeNode, b: TreeNode) -> usize {
        let mut m = a.level.max(b.level);
        while self.ancestor(a, m) != self.ancestor(b, m) {
            m += 1;
        }
        m
    }

    pub fn node_dist(&self, a: TreeNode, b: TreeNode) -> f64 {
        if a == b {
            return 0.0;
        }
        let m = self.lca_level(a, b);
        (self.depth[m] - self.depth[a.level]) + (self.depth[m] - self.depth[b.level])
    }

    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.node_dist(self.node(i), self.node(j))
    }
}

/// Strict α-HST: leaf-to-parent distance 1, multiplied by α per level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "HstRepr", into = "HstRepr")]
pub struct StrictHst {
    alpha: f64,
    tree: LevelTree,
}

#[derive(Serialize, Deserialize)]
struct HstRepr {
    alpha: f64,
    fanouts: Vec<usize>,
}

impl TryFrom<HstRepr> for StrictHst {
    type Error = Error;
    fn try_from(s: HstRepr) -> Result<Self> {
        build_strict_hst(s.alpha, &s.fanouts)
    }
}

impl From<StrictHst> for HstRepr {
    fn from(h: StrictHst) -> Self {
        HstRepr { alpha: h.alpha, fanouts: h.tree.fanouts }
    }
}

/// Builds the strict α-HST whose level-`k` nodes have `fanouts[k-1]`
/// children at distance `α^(k-1)`.
pub fn build_strict_hst(alpha: f64, fanouts: &[usize]) -> Result<StrictHst> {
    if !(alpha > 1.0) || !alpha.is_finite() {
        return Err(Error::Parameter(format!("alpha must be > 1, got {alpha}")));
    }
    if fanouts.is_empty() {
        return Err(Error::Parameter("fanouts must be non-empty".into()));
    }
    let edges = (0..fanouts.len()).map(|l| alpha.powi(l as i32)).collect();
    let tree = LevelTree::new(fanouts.to_vec(), edges)?;
    Ok(StrictHst { alpha, tree })
}

impl StrictHst {
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn tree(&self) -> &LevelTree {
        &self.tree
    }

    /// Number of levels above the leaves (the root's level).
    pub fn levels(&self) -> usize {
        self.tree.height()
    }

    /// `(α^k - 1)/(α - 1)`, the distance of a level-`k` node to its nearest leaf.
    pub fn nearest_leaf_dist(&self, level: usize) -> f64 {
        (self.alpha.powi(level as i32) - 1.0) / (self.alpha - 1.0)
    }

    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.tree.dist(i, j)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_level() {
        let h = build_strict_hst(2.0, &[3]).unwrap();
        assert_eq!(h.tree().num_nodes(), 4);
        let root = h.tree().id(h.tree().root());
        assert_eq!(h.dist(0, root), 1.0);
        assert_eq!(h.dist(0, 2), 2.0);
        assert_eq!(h.dist(1, 1), 0.0);
    }

    #[test]
    fn two_levels_nearest_leaf() {
        let h = build_strict_hst(2.0, &[2, 2]).unwrap();
        let t = h.tree();
        let root = t.id(t.root());
        let child = t.id(TreeNode { level: 1, index: 0 });
        assert_eq!(h.dist(root, child), 2.0);
        assert_eq!(h.dist(root, 0), 3.0);
        assert_eq!(h.nearest_leaf_dist(2), 3.0);

        let h = build_strict_hst(2.5, &[2, 2]).unwrap();
        let t = h.tree();
        assert_eq!(h.dist(t.id(t.root()), 3), 3.5);
        assert_eq!(h.nearest_leaf_dist(2), 3.5);
    }

    #[test]
    fn rejects_bad_params() {
        assert!(matches!(build_strict_hst(1.0, &[2]), Err(Error::Parameter(_))));
        assert!(matches!(build_strict_hst(2.0, &[]), Err(Error::Parameter(_))));
        assert!(build_strict_hst(2.0, &[0]).is_err());
    }

    #[test]
    fn node_ids_round_trip() {
        let t = build_strict_hst(3.0, &[3, 2, 2]).unwrap();
        let t = t.tree();
        for id in 0..t.num_nodes() {
            assert_eq!(t.id(t.node(id)), id);
        }
        assert_eq!(t.node(t.num_nodes() - 1), t.root());
        assert_eq!(t.leaf_range(TreeNode { level: 1, index: 1 }), (3, 6));
        let kids: Vec<_> = t.children(TreeNode { level: 2, index: 1 }).collect();
        assert_eq!(kids, vec![TreeNode { level: 1, index: 2 }, TreeNode { level: 1, index: 3 }]);
    }
}
