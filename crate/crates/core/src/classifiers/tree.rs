//! CART trees grown over presorted feature columns.
//!
//! A split leaves rows with `x[feature] <= threshold` on the left. Candidate
//! thresholds sit halfway between consecutive distinct values, and a split is
//! kept only when it strictly improves the node score. Among equal gains the
//! lowest feature index, then the lowest threshold, wins.

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::HyperParams;
use crate::error::Result;
use crate::matrix::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum Node {
    Leaf {
        value: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { value } => return value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    i = if row[feature] <= threshold {
                        left
                    } else {
                        right
                    }
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn go(t: &Tree, i: usize) -> usize {
            match t.nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + go(t, left).max(go(t, right)),
            }
        }
        go(self, 0)
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, Node::Leaf { .. }))
            .count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Criterion {
    /// `a` is the weighted label, `b` the row weight; leaves hold `P(churn)`.
    Gini,
    /// `a` is the gradient residual, `b` the hessian; leaves hold `Σa / Σb`.
    Newton,
}

impl Criterion {
    #[inline]
    fn score(self, a: f64, b: f64) -> f64 {
        if b <= 0.0 {
            return 0.0;
        }
        match self {
            Criterion::Gini => (a * a + (b - a) * (b - a)) / b,
            Criterion::Newton => a * a / b,
        }
    }

    fn leaf(self, a: f64, b: f64) -> f64 {
        if b <= 1e-300 {
            return 0.0;
        }
        a / b
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct TreeSpec {
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
    /// Features examined per split; `None` examines all of them.
    pub max_features: Option<usize>,
}

/// Column-major copy of a training matrix with each column's row order.
pub(crate) struct Presorted {
    cols: Vec<Vec<f64>>,
    order: Vec<Vec<u32>>,
}

impl Presorted {
    pub fn new(x: &Matrix) -> Self {
        let cols: Vec<Vec<f64>> = (0..x.cols()).map(|j| x.column(j)).collect();
        let order = cols
            .iter()
            .map(|c| {
                let mut o: Vec<u32> = (0..c.len() as u32).collect();
                o.sort_by(|&i, &j| c[i as usize].total_cmp(&c[j as usize]).then(i.cmp(&j)));
                o
            })
            .collect();
        Presorted { cols, order }
    }

    pub fn n_features(&self) -> usize {
        self.cols.len()
    }
}

struct Best {
    gain: f64,
    feature: usize,
    threshold: f64,
}

/// Grows one tree. Rows with zero count are left out, which is how bootstrap
/// samples are expressed.
pub(crate) fn grow<R: Rng>(
    pre: &Presorted,
    a: &[f64],
    b: &[f64],
    count: &[u32],
    criterion: Criterion,
    spec: &TreeSpec,
    mut rng: Option<&mut R>,
) -> Tree {
    let d = pre.n_features();
    let mut order: Vec<Vec<u32>> = pre
        .order
        .iter()
        .map(|o| {
            o.iter()
                .copied()
                .filter(|&i| count[i as usize] > 0)
                .collect()
        })
        .collect();
    let n = order[0].len();
    let min_leaf = spec.min_leaf.max(1) as u64;
    let mut goes_left = vec![false; count.len()];
    let mut scratch: Vec<u32> = Vec::with_capacity(n);
    let mut nodes = vec![Node::Leaf { value: 0.0 }];
    // (node id, start, end, depth)
    let mut stack = vec![(0usize, 0usize, n, 0usize)];
    let mut feats: Vec<usize> = (0..d).collect();

    while let Some((id, start, end, depth)) = stack.pop() {
        let (mut ta, mut tb, mut tc) = (0.0, 0.0, 0u64);
        for &i in &order[0][start..end] {
            let i = i as usize;
            ta += a[i];
            tb += b[i];
            tc += u64::from(count[i]);
        }
        nodes[id] = Node::Leaf {
            value: criterion.leaf(ta, tb),
        };
        let depth_ok = spec.max_depth.is_none_or(|m| depth < m);
        if !depth_ok || tc < 2 * min_leaf {
            continue;
        }
        let parent = criterion.score(ta, tb);

        if let (Some(m), Some(r)) = (spec.max_features, rng.as_deref_mut()) {
            if m < d {
                feats = sample(r, d, m).into_vec();
                feats.sort_unstable();
            }
        }

        let mut best: Option<Best> = None;
        let tol = 1e-12 * parent.abs().max(1.0);
        for &f in &feats {
            let col = &pre.cols[f];
            let ord = &order[f][start..end];
            let (mut la, mut lb, mut lc) = (0.0, 0.0, 0u64);
            for w in 0..ord.len() - 1 {
                let i = ord[w] as usize;
                la += a[i];
                lb += b[i];
                lc += u64::from(count[i]);
                let (v, next) = (col[i], col[ord[w + 1] as usize]);
                if v == next || lc < min_leaf {
                    continue;
                }
                if tc - lc < min_leaf {
                    break;
                }
                let gain = criterion.score(la, lb) + criterion.score(ta - la, tb - lb) - parent;
                if gain > tol && best.as_ref().is_none_or(|bst| gain > bst.gain) {
                    let mut t = v + (next - v) / 2.0;
                    if t >= next {
                        t = v;
                    }
                    best = Some(Best {
                        gain,
                        feature: f,
                        threshold: t,
                    });
                }
            }
        }
        if spec.max_features.is_some() {
            feats = (0..d).collect();
        }
        let Some(best) = best else { continue };

        let col = &pre.cols[best.feature];
        let mut n_left = 0;
        for &i in &order[0][start..end] {
            let l = col[i as usize] <= best.threshold;
            goes_left[i as usize] = l;
            n_left += usize::from(l);
        }
        for o in order.iter_mut() {
            let seg = &mut o[start..end];
            scratch.clear();
            let mut k = 0;
            for j in 0..seg.len() {
                let i = seg[j];
                if goes_left[i as usize] {
                    seg[k] = i;
                    k += 1;
                } else {
                    scratch.push(i);
                }
            }
            seg[k..].copy_from_slice(&scratch);
        }

        let left = nodes.len();
        nodes.push(Node::Leaf { value: 0.0 });
        nodes.push(Node::Leaf { value: 0.0 });
        nodes[id] = Node::Split {
            feature: best.feature,
            threshold: best.threshold,
            left,
            right: left + 1,
        };
        let mid = start + n_left;
        stack.push((left + 1, mid, end, depth + 1));
        stack.push((left, start, mid, depth + 1));
    }
    Tree { nodes }
}

/// Single CART classifier over every feature, Gini impurity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub tree: Tree,
}

impl DecisionTree {
    pub(crate) fn fit(x: &Matrix, y: &[u8], hp: &HyperParams) -> Result<Self> {
        let spec = TreeSpec {
            max_depth: hp.depth("max_depth"),
            min_leaf: hp.int("min_leaf"),
            max_features: None,
        };
        let pre = Presorted::new(x);
        let a: Vec<f64> = y.iter().map(|&v| f64::from(v)).collect();
        let b = vec![1.0; y.len()];
        let count = vec![1u32; y.len()];
        let tree =
            grow::<rand_chacha::ChaCha8Rng>(&pre, &a, &b, &count, Criterion::Gini, &spec, None);
        Ok(DecisionTree { tree })
    }

    pub(crate) fn scores(&self, x: &Matrix) -> Vec<f64> {
        x.iter_rows().map(|r| self.tree.predict_row(r)).collect()
    }
}
