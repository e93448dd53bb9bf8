use alloc::vec;
use alloc::vec::Vec;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TreeParams {
    pub max_depth: usize,
    /// Nodes with fewer samples become leaves.
    pub min_samples_split: usize,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self {
            max_depth: 12,
            min_samples_split: 2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestParams {
    pub n_trees: usize,
    /// Features tried per split; `None` means `round(√d)`.
    pub max_features: Option<usize>,
    pub bootstrap: bool,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self {
            n_trees: 25,
            max_features: None,
            bootstrap: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum TreeNode {
    /// Training sample count per class index.
    Leaf { counts: Vec<f64> },
    /// `x[feature] <= threshold` goes left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

/// Node 0 is the root.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub nodes: Vec<TreeNode>,
}

impl DecisionTree {
    pub fn leaf_counts(&self, x: &[f64]) -> &[f64] {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                TreeNode::Leaf { counts } => return counts,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if x[*feature] <= *threshold { *left } else { *right },
            }
        }
    }

    /// Class proportions of the leaf reached by `x`.
    pub fn proba(&self, x: &[f64]) -> Vec<f64> {
        let c = self.leaf_counts(x);
        let n: f64 = c.iter().sum();
        c.iter().map(|v| v / n).collect()
    }

    pub fn depth(&self) -> usize {
        fn walk(t: &DecisionTree, i: usize) -> usize {
            match &t.nodes[i] {
                TreeNode::Leaf { .. } => 0,
                TreeNode::Split { left, right, .. } => 1 + walk(t, *left).max(walk(t, *right)),
            }
        }
        walk(self, 0)
    }
}

fn gini(counts: &[f64], n: f64) -> f64 {
    1.0 - counts.iter().map(|c| (c / n) * (c / n)).sum::<f64>()
}

struct Builder<'a> {
    xs: &'a [Vec<f64>],
    ys: &'a [usize],
    classes: usize,
    params: TreeParams,
    max_features: usize,
    rng: ChaCha8Rng,
    nodes: Vec<TreeNode>,
}

impl Builder<'_> {
    fn counts(&self, idx: &[usize]) -> Vec<f64> {
        let mut c = vec![0.0; self.classes];
        for &i in idx {
            c[self.ys[i]] += 1.0;
        }
        c
    }

    fn candidate_features(&mut self) -> Vec<usize> {
        let d = self.xs[0].len();
        if self.max_features >= d {
            (0..d).collect()
        } else {
            let mut f = sample(&mut self.rng, d, self.max_features).into_vec();
            f.sort_unstable();
            f
        }
    }

    /// Lowest weighted Gini split as `(impurity, feature, threshold)`.
    fn best_split(&mut self, idx: &mut [usize], parent: &[f64]) -> Option<(f64, usize, f64)> {
        let n = idx.len() as f64;
        let mut best: Option<(f64, usize, f64)> = None;
        for f in self.candidate_features() {
            let xs = self.xs;
            idx.sort_by(|&a, &b| xs[a][f].total_cmp(&xs[b][f]).then(a.cmp(&b)));
            let mut left = vec![0.0; self.classes];
            let mut right = parent.to_vec();
            for k in 0..idx.len() - 1 {
                let y = self.ys[idx[k]];
                left[y] += 1.0;
                right[y] -= 1.0;
                let (a, b) = (xs[idx[k]][f], xs[idx[k + 1]][f]);
                if a == b {
                    continue;
                }
                let nl = (k + 1) as f64;
                let nr = n - nl;
                let score = (nl * gini(&left, nl) + nr * gini(&right, nr)) / n;
                if best.map_or(true, |(s, _, _)| score < s) {
                    let mid = a + (b - a) / 2.0;
                    let threshold = if mid < b { mid } else { a };
                    best = Some((score, f, threshold));
                }
            }
        }
        best
    }

    fn grow(&mut self, mut idx: Vec<usize>, depth: usize) -> usize {
        let counts = self.counts(&idx);
        let id = self.nodes.len();
        self.nodes.push(TreeNode::Leaf { counts: counts.clone() });
        let n = idx.len() as f64;
        let impurity = gini(&counts, n);
        if depth >= self.params.max_depth || idx.len() < self.params.min_samples_split.max(2) || impurity <= 0.0 {
            return id;
        }
        let Some((score, feature, threshold)) = self.best_split(&mut idx, &counts) else {
            return id;
        };
        if score >= impurity - 1e-12 {
            return id;
        }
        let xs = self.xs;
        let (l, r): (Vec<usize>, Vec<usize>) = idx.iter().partition(|&&i| xs[i][feature] <= threshold);
        let left = self.grow(l, depth + 1);
        let right = self.grow(r, depth + 1);
        self.nodes[id] = TreeNode::Split {
            feature,
            threshold,
            left,
            right,
        };
        id
    }
}

/// Greedy CART tree on class indices `ys ∈ 0..classes` over the samples `idx`.
pub(crate) fn fit_tree(
    xs: &[Vec<f64>],
    ys: &[usize],
    classes: usize,
    idx: Vec<usize>,
    params: TreeParams,
    max_features: usize,
    seed: u64,
) -> DecisionTree {
    let mut b = Builder {
        xs,
        ys,
        classes,
        params,
        max_features,
        rng: ChaCha8Rng::seed_from_u64(seed),
        nodes: Vec::new(),
    };
    b.grow(idx, 0);
    DecisionTree { nodes: b.nodes }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    pub trees: Vec<DecisionTree>,
}

impl RandomForest {
    /// Mean of the trees' leaf proportions.
    pub fn proba(&self, x: &[f64]) -> Vec<f64> {
        let mut acc = self.trees[0].proba(x);
        for t in &self.trees[1..] {
            for (a, p) in acc.iter_mut().zip(t.proba(x)) {
                *a += p;
            }
        }
        let n = self.trees.len() as f64;
        acc.iter_mut().for_each(|a| *a /= n);
        acc
    }
}

pub(crate) fn fit_forest(
    xs: &[Vec<f64>],
    ys: &[usize],
    classes: usize,
    tree: TreeParams,
    forest: ForestParams,
    seed: u64,
) -> RandomForest {
    let d = xs[0].len();
    let m = forest
        .max_features
        .unwrap_or_else(|| libm::round(libm::sqrt(d as f64)) as usize)
        .clamp(1, d);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let trees = (0..forest.n_trees.max(1))
        .map(|_| {
            let idx: Vec<usize> = if forest.bootstrap {
                (0..xs.len()).map(|_| rng.gen_range(0..xs.len())).collect()
            } else {
                (0..xs.len()).collect()
            };
            fit_tree(xs, ys, classes, idx, tree, m, rng.gen())
        })
        .collect();
    RandomForest { trees }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splits_at_midpoint() {
        let xs = vec![vec![0.0], vec![1.0], vec![3.0], vec![4.0]];
        let ys = [0, 0, 1, 1];
        let t = fit_tree(&xs, &ys, 2, (0..4).collect(), TreeParams::default(), 1, 0);
        assert_eq!(t.depth(), 1);
        match &t.nodes[0] {
            TreeNode::Split { feature, threshold, .. } => {
                assert_eq!(*feature, 0);
                assert_eq!(*threshold, 2.0);
            }
            _ => panic!("expected a split"),
        }
        assert_eq!(t.proba(&[1.9]), vec![1.0, 0.0]);
    }

    #[test]
    fn depth_limit() {
        let xs: Vec<Vec<f64>> = (0..8).map(|i| vec![i as f64]).collect();
        let ys: Vec<usize> = (0..8).map(|i| i % 2).collect();
        let params = TreeParams {
            max_depth: 2,
            min_samples_split: 2,
        };
        let t = fit_tree(&xs, &ys, 2, (0..8).collect(), params, 1, 0);
        assert!(t.depth() <= 2);
    }
}
