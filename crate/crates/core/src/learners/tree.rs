use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Classifier, Hyperparams};
use crate::dataio::DataTable;

/// Arena node. Children are indices into [`DecisionTree::nodes`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        class_counts: Vec<usize>,
    },
}

/// CART classification tree with gini impurity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    nodes: Vec<Node>,
    n_classes: usize,
    n_features: usize,
    hyperparams: Hyperparams,
}

struct SplitCandidate {
    feature: usize,
    threshold: f64,
    /// `sq_left / n_left + sq_right / n_right` as an exact fraction
    /// `(num, den)`; the weighted child gini is `n - score`, so the best split
    /// maximizes it.
    score: (u128, u128),
}

/// `a > b` for fractions with positive denominators.
fn frac_gt(a: (u128, u128), b: (u128, u128)) -> bool {
    a.0 * b.1 > b.0 * a.1
}

/// Reusable per-fit scratch space.
struct Scratch {
    pairs: Vec<(f64, usize)>,
    left: Vec<u64>,
    right: Vec<u64>,
    order: Vec<usize>,
}

impl DecisionTree {
    /// Fits on every row of `table`.
    pub fn fit(table: &DataTable, hp: &Hyperparams, seed: u64) -> Self {
        let rows: Vec<usize> = (0..table.n_rows()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::fit_rows(table, &rows, hp, &mut rng)
    }

    /// Fits on the given rows (repeats allowed, as in a bootstrap sample).
    /// `rng` drives the per-node feature subsets.
    pub fn fit_rows(
        table: &DataTable,
        rows: &[usize],
        hp: &Hyperparams,
        rng: &mut ChaCha8Rng,
    ) -> Self {
        let k = table.n_classes();
        let f = table.n_features();
        let mut nodes = vec![Node::Leaf {
            class_counts: vec![0; k],
        }];
        let mut scratch = Scratch {
            pairs: Vec::with_capacity(rows.len()),
            left: vec![0; k],
            right: vec![0; k],
            order: (0..f).collect(),
        };
        let mut stack = vec![(0usize, rows.to_vec(), 0usize)];
        while let Some((id, node_rows, depth)) = stack.pop() {
            let mut counts = vec![0usize; k];
            for &r in &node_rows {
                counts[table.labels()[r]] += 1;
            }
            let n = node_rows.len();
            let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
            let stop = pure
                || n < hp.min_samples_split
                || hp.max_depth.is_some_and(|d| depth >= d);
            let split = if stop {
                None
            } else {
                best_split(table, &node_rows, hp, rng, &mut scratch)
            };
            match split {
                None => nodes[id] = Node::Leaf {
                    class_counts: counts,
                },
                Some(s) => {
                    let (l, r): (Vec<usize>, Vec<usize>) = node_rows
                        .iter()
                        .partition(|&&row| table.value(row, s.feature) <= s.threshold);
                    let left = nodes.len();
                    let right = left + 1;
                    nodes.push(Node::Leaf { class_counts: vec![] });
                    nodes.push(Node::Leaf { class_counts: vec![] });
                    nodes[id] = Node::Split {
                        feature: s.feature,
                        threshold: s.threshold,
                        left,
                        right,
                    };
                    // right pushed first so the left subtree is built first
                    stack.push((right, r, depth + 1));
                    stack.push((left, l, depth + 1));
                }
            }
        }
        DecisionTree {
            nodes,
            n_classes: k,
            n_features: f,
            hyperparams: hp.clone(),
        }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn hyperparams(&self) -> &Hyperparams {
        &self.hyperparams
    }

    /// Number of edges on the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        let mut max = 0;
        let mut stack = vec![(0usize, 0usize)];
        while let Some((id, d)) = stack.pop() {
            match &self.nodes[id] {
                Node::Leaf { .. } => max = max.max(d),
                Node::Split { left, right, .. } => {
                    stack.push((*left, d + 1));
                    stack.push((*right, d + 1));
                }
            }
        }
        max
    }

    /// Class counts of the leaf `row` lands in.
    pub fn leaf_counts(&self, row: &[f64]) -> &[usize] {
        let mut id = 0;
        loop {
            match &self.nodes[id] {
                Node::Leaf { class_counts } => return class_counts,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    id = if row[*feature] <= *threshold {
                        *left
                    } else {
                        *right
                    };
                }
            }
        }
    }
}

/// Searches features in random order (or in index order when every feature
/// is examined). Features constant within the node are skipped without
/// counting toward `max_features`. Returns `None` when no threshold leaves
/// both children with at least `min_samples_leaf` rows.
fn best_split(
    table: &DataTable,
    rows: &[usize],
    hp: &Hyperparams,
    rng: &mut ChaCha8Rng,
    scratch: &mut Scratch,
) -> Option<SplitCandidate> {
    let f = table.n_features();
    let budget = hp.features_per_split(f);
    let labels = table.labels();
    let n = rows.len();
    let min_leaf = hp.min_samples_leaf;

    let mut order = std::mem::take(&mut scratch.order);
    if budget < f {
        order.shuffle(rng);
    } else {
        order.sort_unstable();
    }

    let mut best: Option<SplitCandidate> = None;
    let mut visited = 0;
    for &feature in &order {
        if visited == budget {
            break;
        }
        let pairs = &mut scratch.pairs;
        pairs.clear();
        pairs.extend(rows.iter().map(|&r| (table.value(r, feature), labels[r])));
        pairs.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        if pairs[0].0 == pairs[n - 1].0 {
            continue;
        }
        visited += 1;

        scratch.left.iter_mut().for_each(|c| *c = 0);
        scratch.right.iter_mut().for_each(|c| *c = 0);
        for &(_, l) in pairs.iter() {
            scratch.right[l] += 1;
        }
        // sums of squared class counts; child gini * n_child = n_child - sq / n_child
        let mut sq_left: u64 = 0;
        let mut sq_right: u64 = scratch.right.iter().map(|c| c * c).sum();
        for i in 0..n - 1 {
            let l = pairs[i].1;
            sq_left += 2 * scratch.left[l] + 1;
            scratch.left[l] += 1;
            sq_right -= 2 * scratch.right[l] - 1;
            scratch.right[l] -= 1;

            let (lo, hi) = (pairs[i].0, pairs[i + 1].0);
            let n_left = i + 1;
            let n_right = n - n_left;
            if lo == hi || n_left < min_leaf || n_right < min_leaf {
                continue;
            }
            let (nl, nr) = (n_left as u128, n_right as u128);
            let score = (u128::from(sq_left) * nr + u128::from(sq_right) * nl, nl * nr);
            if best.as_ref().is_none_or(|b| frac_gt(score, b.score)) {
                let mid = lo + (hi - lo) / 2.0;
                let threshold = if mid < hi { mid } else { lo };
                best = Some(SplitCandidate {
                    feature,
                    threshold,
                    score,
                });
            }
        }
    }
    scratch.order = order;
    best
}

impl Classifier for DecisionTree {
    fn n_classes(&self) -> usize {
        self.n_classes
    }

    fn predict_proba(&self, row: &[f64]) -> Vec<f64> {
        let counts = self.leaf_counts(row);
        let total: usize = counts.iter().sum();
        counts.iter().map(|&c| c as f64 / total as f64).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learners::gini;

    fn names(k: usize) -> Vec<String> {
        (0..k).map(|c| format!("c{c}")).collect()
    }

    fn accuracy(tree: &DecisionTree, t: &DataTable) -> f64 {
        let hits = t
            .rows()
            .zip(t.labels())
            .filter(|(r, &l)| tree.predict(r) == l)
            .count();
        hits as f64 / t.n_rows() as f64
    }

    #[test]
    fn separable_single_split() {
        let xs = [0.1, 0.2, 0.3, 0.7, 0.8, 0.9];
        let rows: Vec<Vec<f64>> = xs.iter().map(|&x| vec![x]).collect();
        let labels = xs.iter().map(|&x| usize::from(x > 0.5)).collect();
        let t = DataTable::from_rows(&["x"], &rows, labels, names(2)).unwrap();
        let tree = DecisionTree::fit(&t, &Hyperparams::tree(), 0);
        assert_eq!(tree.depth(), 1);
        assert_eq!(accuracy(&tree, &t), 1.0);
        match &tree.nodes()[0] {
            Node::Split { threshold, .. } => assert!((threshold - 0.5).abs() < 1e-12),
            _ => panic!("root should split"),
        }
    }

    #[test]
    fn pure_table_is_one_leaf() {
        let t = DataTable::from_rows(&["x"], &[vec![1.0], vec![2.0]], vec![1, 1], names(2))
            .unwrap();
        let tree = DecisionTree::fit(&t, &Hyperparams::tree(), 0);
        assert_eq!(tree.nodes().len(), 1);
        assert_eq!(tree.predict(&[100.0]), 1);
    }

    #[test]
    fn xor_is_shattered() {
        let rows = vec![
            vec![0.0, 0.0],
            vec![0.0, 1.0],
            vec![1.0, 0.0],
            vec![1.0, 1.0],
        ];
        let t = DataTable::from_rows(&["a", "b"], &rows, vec![0, 1, 1, 0], names(2)).unwrap();
        let tree = DecisionTree::fit(&t, &Hyperparams::tree(), 0);
        assert_eq!(accuracy(&tree, &t), 1.0);
        assert_eq!(tree.depth(), 2);
    }

    #[test]
    fn leaf_probabilities_and_ties() {
        let tree = DecisionTree {
            nodes: vec![Node::Leaf {
                class_counts: vec![3, 1],
            }],
            n_classes: 2,
            n_features: 1,
            hyperparams: Hyperparams::tree(),
        };
        assert_eq!(tree.predict_proba(&[0.0]), [0.75, 0.25]);
        assert_eq!(tree.predict(&[0.0]), 0);
        let tie = DecisionTree {
            nodes: vec![Node::Leaf {
                class_counts: vec![2, 2],
            }],
            ..tree
        };
        assert_eq!(tie.predict(&[0.0]), 0);
    }

    #[test]
    fn constraints_are_respected() {
        let rows: Vec<Vec<f64>> = (0..64).map(|i| vec![i as f64, (i * 7 % 13) as f64]).collect();
        let labels = (0..64).map(|i| (i * 5 % 3) as usize).collect();
        let t = DataTable::from_rows(&["a", "b"], &rows, labels, names(3)).unwrap();
        let hp = Hyperparams {
            max_depth: Some(3),
            min_samples_leaf: 4,
            min_samples_split: 10,
            ..Hyperparams::tree()
        };
        let tree = DecisionTree::fit(&t, &hp, 1);
        assert!(tree.depth() <= 3);
        for node in tree.nodes() {
            if let Node::Leaf { class_counts } = node {
                assert!(class_counts.iter().sum::<usize>() >= 4);
            }
        }
    }

    /// Splits never raise the size-weighted gini of their node.
    #[test]
    fn splits_do_not_increase_impurity() {
        let rows: Vec<Vec<f64>> = (0..200)
            .map(|i| vec![((i * 37) % 101) as f64, ((i * 11) % 17) as f64, (i % 5) as f64])
            .collect();
        let labels = (0..200).map(|i| ((i * 13) % 4) as usize).collect();
        let t = DataTable::from_rows(&["a", "b", "c"], &rows, labels, names(4)).unwrap();
        let hp = Hyperparams {
            max_features: Some(1),
            ..Hyperparams::tree()
        };
        let tree = DecisionTree::fit(&t, &hp, 5);
        fn counts(tree: &DecisionTree, id: usize) -> Vec<usize> {
            match &tree.nodes()[id] {
                Node::Leaf { class_counts } => class_counts.clone(),
                Node::Split { left, right, .. } => counts(tree, *left)
                    .iter()
                    .zip(counts(tree, *right))
                    .map(|(a, b)| a + b)
                    .collect(),
            }
        }
        for (id, node) in tree.nodes().iter().enumerate() {
            if let Node::Split { left, right, .. } = node {
                let p = counts(&tree, id);
                let (l, r) = (counts(&tree, *left), counts(&tree, *right));
                let n = p.iter().sum::<usize>() as f64;
                let nl = l.iter().sum::<usize>() as f64;
                let nr = r.iter().sum::<usize>() as f64;
                assert!(nl > 0.0 && nr > 0.0);
                let child = (nl * gini(&l).unwrap() + nr * gini(&r).unwrap()) / n;
                assert!(child <= gini(&p).unwrap() + 1e-12);
            }
        }
        assert_eq!(accuracy(&tree, &t), 1.0);
    }

    #[test]
    fn same_seed_same_tree() {
        let rows: Vec<Vec<f64>> = (0..50).map(|i| vec![i as f64, (50 - i) as f64, (i % 7) as f64]).collect();
        let labels = (0..50).map(|i| (i % 3) as usize).collect();
        let t = DataTable::from_rows(&["a", "b", "c"], &rows, labels, names(3)).unwrap();
        let hp = Hyperparams {
            max_features: Some(1),
            ..Hyperparams::tree()
        };
        assert_eq!(DecisionTree::fit(&t, &hp, 3), DecisionTree::fit(&t, &hp, 3));
    }
}
