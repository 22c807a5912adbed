//! Greedy CART regression tree.
//!
//! At every node `m_try` features are drawn without replacement and, for
//! each, all midpoints between consecutive distinct values are scored by the
//! summed squared error of the two children. The lowest score wins; ties go
//! to the lower feature index, then the lower threshold. A node becomes a
//! leaf at `max_depth`, when it cannot give `min_samples_leaf` rows to both
//! children, when all its targets are equal, or when no candidate exists.

use alloc::vec::Vec;

use rand::Rng;

use super::{ForestError, HyperParams};
use crate::dataset::Table;

/// Relative slack under which two split scores count as tied.
pub const TIE_EPS: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Node {
    Split { feature: usize, threshold: f64, left: usize, right: usize },
    Leaf { value: f64 },
}

/// Arena-allocated tree; the root is `nodes[0]`. Rows with
/// `x[feature] <= threshold` go left.
#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    pub fn leaf(value: f64) -> Self {
        Tree { nodes: alloc::vec![Node::Leaf { value }] }
    }

    /// Builds a tree from an arena, checking that child links point forward
    /// and stay in bounds.
    pub fn from_nodes(nodes: Vec<Node>) -> Result<Self, ForestError> {
        if nodes.is_empty() {
            return Err(ForestError::MalformedTree("empty node list"));
        }
        for (i, n) in nodes.iter().enumerate() {
            match *n {
                Node::Split { left, right, threshold, .. } => {
                    if left <= i || right <= i || left >= nodes.len() || right >= nodes.len() || left == right {
                        return Err(ForestError::MalformedTree("bad child index"));
                    }
                    if !threshold.is_finite() {
                        return Err(ForestError::MalformedTree("non-finite threshold"));
                    }
                }
                Node::Leaf { value } => {
                    if !value.is_finite() {
                        return Err(ForestError::MalformedTree("non-finite leaf"));
                    }
                }
            }
        }
        Ok(Tree { nodes })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn root(&self) -> &Node {
        &self.nodes[0]
    }

    pub fn max_feature(&self) -> Option<usize> {
        self.nodes
            .iter()
            .filter_map(|n| match n {
                Node::Split { feature, .. } => Some(*feature),
                Node::Leaf { .. } => None,
            })
            .max()
    }

    pub fn depth(&self) -> usize {
        fn go(nodes: &[Node], i: usize) -> usize {
            match nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + go(nodes, left).max(go(nodes, right)),
            }
        }
        go(&self.nodes, 0)
    }

    /// Prediction where feature `f` has value `value(f)`.
    #[inline]
    pub fn predict_with(&self, value: impl Fn(usize) -> f64) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { value } => return value,
                Node::Split { feature, threshold, left, right } => {
                    i = if value(feature) <= threshold { left } else { right };
                }
            }
        }
    }

    pub fn predict(&self, row: &[f64]) -> f64 {
        self.predict_with(|f| row[f])
    }
}

struct Builder<'a, R> {
    data: &'a Table,
    params: &'a HyperParams,
    rng: &'a mut R,
    nodes: Vec<Node>,
    order: Vec<usize>,
}

#[derive(Clone, Copy)]
struct Best {
    score: f64,
    feature: usize,
    threshold: f64,
}

impl<R: Rng> Builder<'_, R> {
    fn candidate_features(&mut self) -> Vec<usize> {
        let d = self.data.n_features();
        let m = self.params.m_try.min(d);
        let mut feats: Vec<usize> =
            if m == d { (0..d).collect() } else { rand::seq::index::sample(self.rng, d, m).into_vec() };
        feats.sort_unstable();
        feats
    }

    fn best_split(&mut self, rows: &[usize]) -> Option<Best> {
        let min_leaf = self.params.min_samples_leaf;
        let n = rows.len();
        let mut best: Option<Best> = None;
        for feature in self.candidate_features() {
            self.order.clear();
            self.order.extend_from_slice(rows);
            let data = self.data;
            self.order.sort_by(|&a, &b| data.value(a, feature).total_cmp(&data.value(b, feature)));
            let (mut total_sum, mut total_sq) = (0.0, 0.0);
            for &r in &self.order {
                let y = data.target(r);
                total_sum += y;
                total_sq += y * y;
            }
            let (mut sum, mut sq) = (0.0, 0.0);
            for p in 1..n {
                let y = data.target(self.order[p - 1]);
                sum += y;
                sq += y * y;
                if p < min_leaf || n - p < min_leaf {
                    continue;
                }
                let lo = data.value(self.order[p - 1], feature);
                let hi = data.value(self.order[p], feature);
                if !(lo < hi) {
                    continue;
                }
                let (nl, nr) = (p as f64, (n - p) as f64);
                let sse_l = (sq - sum * sum / nl).max(0.0);
                let rs = total_sum - sum;
                let sse_r = ((total_sq - sq) - rs * rs / nr).max(0.0);
                let score = sse_l + sse_r;
                let better = match best {
                    None => true,
                    Some(b) => score < b.score - TIE_EPS * (1.0 + b.score.abs()),
                };
                if better {
                    best = Some(Best { score, feature, threshold: lo + (hi - lo) / 2.0 });
                }
            }
        }
        best
    }

    fn build(&mut self, rows: Vec<usize>, depth: usize) -> usize {
        let id = self.nodes.len();
        let n = rows.len();
        let mean = rows.iter().map(|&r| self.data.target(r)).sum::<f64>() / n as f64;
        self.nodes.push(Node::Leaf { value: mean });

        let first = self.data.target(rows[0]);
        let constant = rows.iter().all(|&r| self.data.target(r) == first);
        if depth >= self.params.max_depth || n < 2 * self.params.min_samples_leaf || constant {
            return id;
        }
        let Some(best) = self.best_split(&rows) else {
            return id;
        };
        let (left, right): (Vec<usize>, Vec<usize>) =
            rows.iter().partition(|&&r| self.data.value(r, best.feature) <= best.threshold);
        drop(rows);
        let l = self.build(left, depth + 1);
        let r = self.build(right, depth + 1);
        self.nodes[id] = Node::Split { feature: best.feature, threshold: best.threshold, left: l, right: r };
        id
    }
}

/// Fits one tree on the rows listed in `rows` (duplicates allowed, as in a
/// bootstrap sample).
pub fn fit_tree<R: Rng>(data: &Table, rows: &[usize], params: &HyperParams, rng: &mut R) -> Result<Tree, ForestError> {
    if rows.is_empty() || data.is_empty() {
        return Err(ForestError::EmptyData);
    }
    params.validate(data.n_features())?;
    let mut b = Builder { data, params, rng, nodes: Vec::new(), order: Vec::with_capacity(rows.len()) };
    b.build(rows.to_vec(), 0);
    Ok(Tree { nodes: b.nodes })
}
