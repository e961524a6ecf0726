//! Least-squares gradient-boosted regression trees.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GbdtParams {
    pub n_trees: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    /// Fraction of rows drawn (without replacement) for each tree.
    pub subsample: f64,
    pub min_samples_leaf: usize,
    /// A split must reduce the squared error by more than this.
    pub min_split_gain: f64,
    pub seed: u64,
}

impl Default for GbdtParams {
    fn default() -> Self {
        Self {
            n_trees: 200,
            max_depth: 4,
            learning_rate: 0.1,
            subsample: 0.8,
            min_samples_leaf: 2,
            min_split_gain: 1e-12,
            seed: 0,
        }
    }
}

/// Regression tree node; serialized as nested `{feature, threshold, left, right}` or `{value}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: Box<Node>,
        right: Box<Node>,
    },
    Leaf {
        value: f64,
    },
}

impl Node {
    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut node = self;
        loop {
            match node {
                Node::Leaf { value } => return *value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => node = if x[*feature] <= *threshold { left } else { right },
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Node::Leaf { .. } => 0,
            Node::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbdtModel {
    pub base: f64,
    pub learning_rate: f64,
    pub n_features: usize,
    pub trees: Vec<Node>,
}

impl GbdtModel {
    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut y = self.base;
        for t in &self.trees {
            y += self.learning_rate * t.predict(x);
        }
        y
    }
}

/// Per-round training diagnostics.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GbdtTrace {
    /// MSE on all training rows after each round (index 0 is the constant model).
    pub train_mse: Vec<f64>,
    /// MSE on the round's subsample, before and after the round's tree is added.
    pub inbag_mse: Vec<(f64, f64)>,
}

fn mse(y: &[f64], pred: &[f64], rows: &[usize]) -> f64 {
    rows.iter().map(|&i| (y[i] - pred[i]).powi(2)).sum::<f64>() / rows.len() as f64
}

pub fn fit(x: &[Vec<f64>], y: &[f64], params: &GbdtParams) -> Result<(GbdtModel, GbdtTrace)> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.is_empty() {
        return Err(Error::TooFewSamples { needed: 1, got: 0 });
    }
    if !(params.subsample > 0.0 && params.subsample <= 1.0) || params.learning_rate <= 0.0 {
        return Err(Error::InvalidArgument(
            "subsample must be in (0, 1] and learning_rate positive".into(),
        ));
    }
    let n_features = x[0].len();
    if let Some(row) = x.iter().find(|r| r.len() != n_features) {
        return Err(Error::DimensionMismatch {
            expected: n_features,
            found: row.len(),
        });
    }
    let n = y.len();
    let base = y.iter().sum::<f64>() / n as f64;
    let mut pred = vec![base; n];
    let all: Vec<usize> = (0..n).collect();
    let mut trace = GbdtTrace {
        train_mse: vec![mse(y, &pred, &all)],
        inbag_mse: Vec::new(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let bag = ((n as f64 * params.subsample).round() as usize).clamp(1, n);
    let mut trees = Vec::with_capacity(params.n_trees);
    for _ in 0..params.n_trees {
        let mut rows: Vec<usize> = if bag == n {
            all.clone()
        } else {
            sample(&mut rng, n, bag).into_vec()
        };
        rows.sort_unstable();
        let residual: Vec<f64> = y.iter().zip(&pred).map(|(a, b)| a - b).collect();
        let before = mse(y, &pred, &rows);
        let tree = build(x, &residual, &mut rows, 0, params);
        for (p, xi) in pred.iter_mut().zip(x) {
            *p += params.learning_rate * tree.predict(xi);
        }
        rows.sort_unstable();
        trace.inbag_mse.push((before, mse(y, &pred, &rows)));
        trace.train_mse.push(mse(y, &pred, &all));
        trees.push(tree);
    }
    Ok((
        GbdtModel {
            base,
            learning_rate: params.learning_rate,
            n_features,
            trees,
        },
        trace,
    ))
}

fn leaf(residual: &[f64], rows: &[usize]) -> Node {
    Node::Leaf {
        value: rows.iter().map(|&i| residual[i]).sum::<f64>() / rows.len() as f64,
    }
}

/// Greedy exact-split tree on `rows`; ties keep the lowest feature then the lowest threshold.
fn build(x: &[Vec<f64>], residual: &[f64], rows: &mut [usize], depth: usize, params: &GbdtParams) -> Node {
    let count = rows.len();
    if depth >= params.max_depth || count < 2 * params.min_samples_leaf.max(1) {
        return leaf(residual, rows);
    }
    let total: f64 = rows.iter().map(|&i| residual[i]).sum();
    let parent = total * total / count as f64;
    let mut best: Option<(f64, usize, f64)> = None;
    let n_features = x[rows[0]].len();
    for f in 0..n_features {
        rows.sort_by(|&a, &b| x[a][f].total_cmp(&x[b][f]).then(a.cmp(&b)));
        let mut left_sum = 0.0;
        for pos in 0..count - 1 {
            left_sum += residual[rows[pos]];
            let left_n = pos + 1;
            let right_n = count - left_n;
            let (lo, hi) = (x[rows[pos]][f], x[rows[pos + 1]][f]);
            if lo == hi || left_n < params.min_samples_leaf || right_n < params.min_samples_leaf {
                continue;
            }
            let right_sum = total - left_sum;
            let gain = left_sum * left_sum / left_n as f64 + right_sum * right_sum / right_n as f64 - parent;
            if gain > params.min_split_gain && best.is_none_or(|b| gain > b.0) {
                best = Some((gain, f, lo + (hi - lo) / 2.0));
            }
        }
    }
    let Some((_, feature, threshold)) = best else {
        return leaf(residual, rows);
    };
    rows.sort_by(|&a, &b| {
        (x[a][feature] > threshold)
            .cmp(&(x[b][feature] > threshold))
            .then(a.cmp(&b))
    });
    let split = rows.partition_point(|&i| x[i][feature] <= threshold);
    let (l, r) = rows.split_at_mut(split);
    Node::Split {
        feature,
        threshold,
        left: Box::new(build(x, residual, l, depth + 1, params)),
        right: Box::new(build(x, residual, r, depth + 1, params)),
    }
}
