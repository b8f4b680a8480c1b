//! Deterministic fixture graphs for tests, benches and demos.

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::GraphDataset;

/// Shape of a ring-of-cliques fixture.
#[derive(Clone, Copy, Debug)]
pub struct RingOfCliques {
    pub num_nodes: usize,
    pub num_classes: usize,
    pub num_features: usize,
    pub clique_size: usize,
    /// Half-width of the uniform jitter around each class centre.
    pub noise: f64,
}

impl Default for RingOfCliques {
    fn default() -> Self {
        RingOfCliques {
            num_nodes: 200,
            num_classes: 3,
            num_features: 10,
            clique_size: 5,
            noise: 0.05,
        }
    }
}

impl RingOfCliques {
    /// Nodes are assigned to classes in contiguous blocks and grouped into
    /// same-class cliques; consecutive cliques are joined by one edge and
    /// the last clique closes the ring. Class `c` has feature `j` centred
    /// at `0.15 + 0.35 * ((c + j) mod 3)`, so the classes are separable.
    pub fn build(&self, seed: u64) -> GraphDataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = self.num_nodes;
        let labels: Vec<usize> = (0..n).map(|i| i * self.num_classes / n).collect();

        let features = Array2::from_shape_fn((n, self.num_features), |(i, j)| {
            let centre = 0.15 + 0.35 * ((labels[i] + j) % 3) as f64;
            centre + rng.random_range(-self.noise..=self.noise)
        });

        let mut cliques: Vec<Vec<usize>> = Vec::new();
        for class in 0..self.num_classes {
            let members: Vec<usize> = (0..n).filter(|&i| labels[i] == class).collect();
            cliques.extend(members.chunks(self.clique_size).map(<[usize]>::to_vec));
        }
        let mut edges = Vec::new();
        for clique in &cliques {
            for (a, &u) in clique.iter().enumerate() {
                for &v in &clique[a + 1..] {
                    edges.push((u as i64, v as i64));
                }
            }
        }
        if cliques.len() > 1 {
            for w in 0..cliques.len() {
                let next = &cliques[(w + 1) % cliques.len()];
                let last = *cliques[w].last().expect("cliques are non-empty");
                if last != next[0] {
                    edges.push((last as i64, next[0] as i64));
                }
            }
        }

        let ids = (0..n as i64).collect();
        GraphDataset::new(ids, features, labels, &edges)
            .expect("fixture is well formed")
            .0
    }
}

/// Randomly permutes the labels of `graph`, keeping class sizes.
pub fn shuffle_labels(graph: &GraphDataset, seed: u64) -> GraphDataset {
    let mut labels = graph.labels().to_vec();
    labels.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    graph.with_labels(labels).expect("same number of labels")
}
