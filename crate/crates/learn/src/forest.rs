//! Random forest of CART trees with Gini impurity.

use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use taxel_core::{seed, GestureClass};

use crate::data::LabeledFeatures;
use crate::error::{LearnError, Result};

const CLASSES: usize = GestureClass::COUNT;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MaxFeatures {
    Sqrt,
    All,
}

impl MaxFeatures {
    pub fn count(self, n_features: usize) -> usize {
        match self {
            MaxFeatures::Sqrt => ((n_features as f64).sqrt().floor() as usize).max(1),
            MaxFeatures::All => n_features,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub max_features: MaxFeatures,
    pub bootstrap: bool,
    pub max_depth: Option<usize>,
    pub seed: u64,
    pub parallel: bool,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self { n_trees: 60, max_features: MaxFeatures::Sqrt, bootstrap: true, max_depth: None, seed: 0, parallel: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "lowercase")]
pub enum Node {
    Leaf { class: usize, counts: [usize; CLASSES] },
    Split { feature: usize, threshold: f64, left: usize, right: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub nodes: Vec<Node>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    pub n_features: usize,
    pub trees: Vec<DecisionTree>,
}

/// Best split found so far, scored by the exact ratio
/// `(SL·nR + SR·nL) / (nL·nR)` where `S = Σ count²` per side. Maximizing it
/// minimizes the weighted Gini impurity.
#[derive(Debug, Clone, Copy)]
struct Candidate {
    feature: usize,
    threshold: f64,
    num: u128,
    den: u128,
}

impl Candidate {
    fn beats(&self, other: &Candidate) -> bool {
        self.num * other.den > other.num * self.den
    }
}

fn sum_sq(counts: &[usize; CLASSES]) -> u128 {
    counts.iter().map(|&c| (c as u128) * (c as u128)).sum()
}

/// Midpoint of two distinct values that still separates them.
pub fn split_threshold(lo: f64, hi: f64) -> f64 {
    let mid = lo + (hi - lo) / 2.0;
    if mid < hi {
        mid
    } else {
        lo
    }
}

fn best_split(x: &[Vec<f64>], y: &[usize], idx: &[usize], features: &[usize]) -> Option<Candidate> {
    let mut total = [0usize; CLASSES];
    for &i in idx {
        total[y[i]] += 1;
    }
    let n = idx.len();
    let mut best: Option<Candidate> = None;
    let mut sorted = idx.to_vec();
    for &f in features {
        sorted.sort_by(|&a, &b| x[a][f].total_cmp(&x[b][f]).then(a.cmp(&b)));
        let mut left = [0usize; CLASSES];
        let mut right = total;
        for pos in 0..n - 1 {
            let c = y[sorted[pos]];
            left[c] += 1;
            right[c] -= 1;
            let (lo, hi) = (x[sorted[pos]][f], x[sorted[pos + 1]][f]);
            if lo >= hi {
                continue;
            }
            let (nl, nr) = ((pos + 1) as u128, (n - pos - 1) as u128);
            let cand = Candidate {
                feature: f,
                threshold: split_threshold(lo, hi),
                num: sum_sq(&left) * nr + sum_sq(&right) * nl,
                den: nl * nr,
            };
            if best.as_ref().is_none_or(|b| cand.beats(b)) {
                best = Some(cand);
            }
        }
    }
    best
}

fn majority(counts: &[usize; CLASSES]) -> usize {
    let mut best = 0;
    for c in 1..CLASSES {
        if counts[c] > counts[best] {
            best = c;
        }
    }
    best
}

struct Builder<'a, R> {
    x: &'a [Vec<f64>],
    y: &'a [usize],
    n_features: usize,
    mtry: usize,
    max_depth: Option<usize>,
    rng: R,
    nodes: Vec<Node>,
}

impl<R: Rng> Builder<'_, R> {
    fn grow(&mut self, idx: Vec<usize>, depth: usize) -> usize {
        let mut counts = [0usize; CLASSES];
        for &i in &idx {
            counts[self.y[i]] += 1;
        }
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf { class: majority(&counts), counts });
        if pure || self.max_depth.is_some_and(|d| depth >= d) {
            return id;
        }
        let mut features = sample(&mut self.rng, self.n_features, self.mtry).into_vec();
        features.sort_unstable();
        let mut split = best_split(self.x, self.y, &idx, &features);
        if split.is_none() && features.len() < self.n_features {
            let all: Vec<usize> = (0..self.n_features).collect();
            split = best_split(self.x, self.y, &idx, &all);
        }
        let Some(split) = split else {
            return id;
        };
        let (l, r): (Vec<usize>, Vec<usize>) =
            idx.into_iter().partition(|&i| self.x[i][split.feature] <= split.threshold);
        let left = self.grow(l, depth + 1);
        let right = self.grow(r, depth + 1);
        self.nodes[id] = Node::Split { feature: split.feature, threshold: split.threshold, left, right };
        id
    }
}

impl DecisionTree {
    pub fn fit<R: Rng>(x: &[Vec<f64>], y: &[usize], idx: Vec<usize>, mtry: usize, max_depth: Option<usize>, rng: R) -> Self {
        let n_features = x.first().map_or(0, Vec::len);
        let mut b = Builder { x, y, n_features, mtry: mtry.min(n_features), max_depth, rng, nodes: Vec::new() };
        b.grow(idx, 0);
        DecisionTree { nodes: b.nodes }
    }

    fn leaf(&self, x: &[f64]) -> usize {
        let mut id = 0;
        loop {
            match &self.nodes[id] {
                Node::Leaf { class, .. } => return *class,
                Node::Split { feature, threshold, left, right } => {
                    id = if x[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }

    pub fn predict(&self, x: &[f64]) -> usize {
        self.leaf(x)
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], id: usize) -> usize {
            match &nodes[id] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

impl RandomForest {
    pub fn fit(data: &LabeledFeatures, config: &ForestConfig) -> Result<Self> {
        if config.n_trees == 0 {
            return Err(LearnError::Config("a forest needs at least one tree".into()));
        }
        if data.is_empty() || data.width() == 0 {
            return Err(LearnError::Config("no training samples".into()));
        }
        let y = data.class_codes();
        let n = data.len();
        let mtry = config.max_features.count(data.width());
        let build = |t: usize| {
            let mut rng = seed::rng(seed::derive(config.seed, &[t as u64]));
            let idx: Vec<usize> = if config.bootstrap {
                (0..n).map(|_| rng.random_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            DecisionTree::fit(&data.rows, &y, idx, mtry, config.max_depth, rng)
        };
        let trees = if config.parallel {
            (0..config.n_trees).into_par_iter().map(build).collect()
        } else {
            (0..config.n_trees).map(build).collect()
        };
        Ok(RandomForest { n_features: data.width(), trees })
    }

    /// Share of tree votes per class.
    pub fn predict_proba(&self, x: &[f64]) -> Vec<f64> {
        let mut votes = vec![0.0; CLASSES];
        for t in &self.trees {
            votes[t.predict(x)] += 1.0;
        }
        let n = self.trees.len() as f64;
        votes.iter_mut().for_each(|v| *v /= n);
        votes
    }

    /// Majority vote; ties go to the lowest class code.
    pub fn predict(&self, x: &[f64]) -> usize {
        let mut votes = [0usize; CLASSES];
        for t in &self.trees {
            votes[t.predict(x)] += 1;
        }
        majority(&votes)
    }
}
