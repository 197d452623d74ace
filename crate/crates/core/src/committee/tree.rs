//! Binary CART decision tree: axis-aligned threshold splits chosen by
//! weighted Gini impurity, candidate thresholds at midpoints of sorted
//! distinct feature values. Growth stops at the depth limit, at purity, or
//! below two samples; leaves predict the majority label (ties toward +1).

use super::{FeatureVector, Sample};

#[derive(Clone, Debug)]
enum Node {
    Leaf(i8),
    Split { feature: usize, threshold: f64, left: usize, right: usize },
}

#[derive(Clone, Debug)]
pub struct TreeModel {
    nodes: Vec<Node>,
    max_depth: usize,
}

fn gini(counts: (usize, usize)) -> f64 {
    let n = (counts.0 + counts.1) as f64;
    if n == 0.0 {
        return 0.0;
    }
    let p = counts.0 as f64 / n;
    2.0 * p * (1.0 - p)
}

fn label_counts(samples: &[Sample]) -> (usize, usize) {
    let plus = samples.iter().filter(|s| s.y > 0).count();
    (plus, samples.len() - plus)
}

fn majority(samples: &[Sample]) -> i8 {
    let (plus, minus) = label_counts(samples);
    if plus >= minus {
        1
    } else {
        -1
    }
}

fn feature(s: &Sample, k: usize) -> f64 {
    match k {
        0 => s.f.f1,
        _ => s.f.f2,
    }
}

impl TreeModel {
    pub fn fit(samples: &[Sample], max_depth: usize) -> TreeModel {
        assert!(!samples.is_empty(), "tree needs data");
        let mut tree = TreeModel { nodes: Vec::new(), max_depth };
        tree.grow(samples.to_vec(), 0);
        tree
    }

    fn grow(&mut self, samples: Vec<Sample>, depth: usize) -> usize {
        let (plus, minus) = label_counts(&samples);
        if depth >= self.max_depth || samples.len() < 2 || plus == 0 || minus == 0 {
            self.nodes.push(Node::Leaf(majority(&samples)));
            return self.nodes.len() - 1;
        }
        let mut best: Option<(f64, usize, f64)> = None; // (weighted gini, feature, threshold)
        for k in 0..2 {
            let mut values: Vec<f64> = samples.iter().map(|s| feature(s, k)).collect();
            values.sort_by(f64::total_cmp);
            values.dedup();
            for pair in values.windows(2) {
                let threshold = 0.5 * (pair[0] + pair[1]);
                let left: Vec<&Sample> =
                    samples.iter().filter(|s| feature(s, k) < threshold).collect();
                let right_n = samples.len() - left.len();
                let left_counts = {
                    let plus = left.iter().filter(|s| s.y > 0).count();
                    (plus, left.len() - plus)
                };
                let right_counts = (plus - left_counts.0, minus - left_counts.1);
                let weighted = (left.len() as f64 * gini(left_counts)
                    + right_n as f64 * gini(right_counts))
                    / samples.len() as f64;
                if best.is_none() || weighted < best.unwrap().0 - 1e-15 {
                    best = Some((weighted, k, threshold));
                }
            }
        }
        let parent_gini = gini((plus, minus));
        match best {
            Some((weighted, k, threshold)) if weighted < parent_gini - 1e-15 => {
                let (l, r): (Vec<Sample>, Vec<Sample>) =
                    samples.into_iter().partition(|s| feature(s, k) < threshold);
                let slot = self.nodes.len();
                self.nodes.push(Node::Leaf(0)); // placeholder until children exist
                let left = self.grow(l, depth + 1);
                let right = self.grow(r, depth + 1);
                self.nodes[slot] = Node::Split { feature: k, threshold, left, right };
                slot
            }
            _ => {
                self.nodes.push(Node::Leaf(majority(&samples)));
                self.nodes.len() - 1
            }
        }
    }

    pub fn predict(&self, f: &FeatureVector) -> i8 {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Leaf(y) => return y,
                Node::Split { feature, threshold, left, right } => {
                    let v = if feature == 0 { f.f1 } else { f.f2 };
                    at = if v < threshold { left } else { right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match nodes[at] {
                Node::Leaf(_) => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn max_depth(&self) -> usize {
        self.max_depth
    }
}
