use rand::Rng;
use serde::{Deserialize, Serialize};

/// A tree node; `x[feature] <= threshold` goes left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Node {
    Leaf {
        value: f64,
        samples: usize,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: Box<Node>,
        right: Box<Node>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    root: Node,
    /// Distinct training rows in this tree's sample.
    in_bag: usize,
}

pub(crate) struct Params {
    pub mtry: usize,
    pub min_leaf: usize,
    pub max_depth: Option<usize>,
}

struct Candidate {
    feature: usize,
    threshold: f64,
    gain: f64,
}

impl Tree {
    pub(crate) fn fit(
        x: &[Vec<f64>],
        y: &[f64],
        bootstrap: bool,
        params: &Params,
        rng: &mut impl Rng,
    ) -> Tree {
        let n = x.len();
        let mut rows: Vec<u32> = if bootstrap {
            (0..n).map(|_| rng.gen_range(0..n as u32)).collect()
        } else {
            (0..n as u32).collect()
        };
        let mut seen = vec![false; n];
        for &r in &rows {
            seen[r as usize] = true;
        }
        let in_bag = seen.iter().filter(|&&s| s).count();
        let root = grow(x, y, &mut rows, 0, params, rng);
        Tree { root, in_bag }
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn in_bag(&self) -> usize {
        self.in_bag
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut node = &self.root;
        loop {
            match node {
                Node::Leaf { value, .. } => return *value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if x[*feature] <= *threshold {
                        left
                    } else {
                        right
                    };
                }
            }
        }
    }
}

fn leaf(y: &[f64], rows: &[u32]) -> Node {
    let sum: f64 = rows.iter().map(|&r| y[r as usize]).sum();
    Node::Leaf {
        value: sum / rows.len() as f64,
        samples: rows.len(),
    }
}

fn grow(
    x: &[Vec<f64>],
    y: &[f64],
    rows: &mut [u32],
    depth: usize,
    params: &Params,
    rng: &mut impl Rng,
) -> Node {
    let n = rows.len();
    let first = y[rows[0] as usize];
    let pure = rows.iter().all(|&r| y[r as usize] == first);
    if pure {
        return Node::Leaf {
            value: first,
            samples: n,
        };
    }
    if n < 2 * params.min_leaf || params.max_depth.is_some_and(|d| depth >= d) {
        return leaf(y, rows);
    }

    let p = x[0].len();
    let mut features = rand::seq::index::sample(rng, p, params.mtry).into_vec();
    features.sort_unstable();

    let Some(best) = best_split(x, y, rows, &features, params.min_leaf) else {
        return leaf(y, rows);
    };

    // partition in place: left block first
    let mut split = 0;
    for i in 0..n {
        if x[rows[i] as usize][best.feature] <= best.threshold {
            rows.swap(i, split);
            split += 1;
        }
    }
    let (l, r) = rows.split_at_mut(split);
    let left = grow(x, y, l, depth + 1, params, rng);
    let right = grow(x, y, r, depth + 1, params, rng);
    Node::Split {
        feature: best.feature,
        threshold: best.threshold,
        left: Box::new(left),
        right: Box::new(right),
    }
}

/// Largest variance reduction over the candidate features; ties keep the
/// lowest feature, then the lowest threshold.
fn best_split(
    x: &[Vec<f64>],
    y: &[f64],
    rows: &[u32],
    features: &[usize],
    min_leaf: usize,
) -> Option<Candidate> {
    let n = rows.len();
    let total: f64 = rows.iter().map(|&r| y[r as usize]).sum();
    let parent = total * total / n as f64;
    let mut best: Option<Candidate> = None;
    let mut pairs: Vec<(f64, f64)> = Vec::with_capacity(n);

    for &f in features {
        pairs.clear();
        pairs.extend(rows.iter().map(|&r| (x[r as usize][f], y[r as usize])));
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut left_sum = 0.0;
        for i in 1..n {
            left_sum += pairs[i - 1].1;
            if i < min_leaf || n - i < min_leaf || pairs[i - 1].0 == pairs[i].0 {
                continue;
            }
            let right_sum = total - left_sum;
            // SSE(parent) − SSE(children), up to the shared Σy² term
            let gain =
                left_sum * left_sum / i as f64 + right_sum * right_sum / (n - i) as f64 - parent;
            if gain > 1e-12 && best.as_ref().is_none_or(|b| gain > b.gain) {
                let (lo, hi) = (pairs[i - 1].0, pairs[i].0);
                let mut threshold = lo + (hi - lo) / 2.0;
                if threshold >= hi {
                    threshold = lo;
                }
                best = Some(Candidate {
                    feature: f,
                    threshold,
                    gain,
                });
            }
        }
    }
    best
}
