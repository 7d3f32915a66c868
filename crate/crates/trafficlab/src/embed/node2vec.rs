//! Second-order biased random walks and skip-gram training.
//!
//! Each walk's random stream derives from `(seed, node, walk_index)`, so walk
//! generation can be partitioned across workers without changing the corpus.
//! Skip-gram training is a single sequential pass (stochastic updates do not
//! commute), deterministic given the seed.

use rand::Rng;

use crate::graph::Graph;
use crate::par;
use crate::rng::derive_rng;

use super::{EmbedError, EmbeddingMatrix, EmbeddingMethod};
use ndarray::Array2;

#[derive(Debug, Clone)]
pub struct Node2VecParams {
    /// Return parameter: weight 1/p for stepping back to the previous node.
    pub p: f64,
    /// In-out parameter: weight 1/q for stepping outside the previous
    /// node's neighborhood.
    pub q: f64,
    pub walk_length: usize,
    pub walks_per_node: usize,
    pub window: usize,
    pub dim: usize,
    pub negatives: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub seed: u64,
}

impl Default for Node2VecParams {
    fn default() -> Self {
        Node2VecParams {
            p: 1.0,
            q: 1.0,
            walk_length: 80,
            walks_per_node: 10,
            window: 5,
            dim: 64,
            negatives: 5,
            epochs: 3,
            learning_rate: 0.025,
            seed: 0,
        }
    }
}

impl Node2VecParams {
    pub fn fingerprint(&self) -> String {
        format!(
            "node2vec(p={},q={},l={},r={},w={},d={},k={},epochs={},lr={},seed={})",
            self.p,
            self.q,
            self.walk_length,
            self.walks_per_node,
            self.window,
            self.dim,
            self.negatives,
            self.epochs,
            self.learning_rate,
            self.seed
        )
    }

    fn validate(&self) {
        assert!(self.p > 0.0 && self.q > 0.0, "p and q must be positive");
        assert!(self.walk_length >= 2, "walk_length must be at least 2");
        assert!(self.walks_per_node >= 1, "walks_per_node must be at least 1");
        assert!(self.window >= 1 && self.negatives >= 1 && self.dim >= 1);
        assert!(self.learning_rate > 0.0);
    }
}

/// Walks over the graph, one entry per `(walk_index, node)` pair in that
/// order. Isolated start nodes yield the singleton walk `[u]`.
#[derive(Debug, Clone)]
pub struct WalkCorpus {
    pub walks: Vec<Vec<usize>>,
    pub seed: u64,
}

/// Generate `walks_per_node` biased walks from every node.
pub fn walks(g: &Graph, params: &Node2VecParams) -> WalkCorpus {
    params.validate();
    let n = g.n_nodes();
    let r = params.walks_per_node;
    let walks = par::map_indexed(n * r, |unit| {
        let walk_index = unit / n;
        let start = unit % n;
        single_walk(g, params, start, walk_index)
    });
    WalkCorpus {
        walks,
        seed: params.seed,
    }
}

fn single_walk(g: &Graph, params: &Node2VecParams, start: usize, walk_index: usize) -> Vec<usize> {
    let mut rng = derive_rng(
        params.seed,
        "node2vec-walk",
        &[start as u64, walk_index as u64],
    );
    let mut walk = Vec::with_capacity(params.walk_length);
    walk.push(start);
    let first = g.neighbors(start);
    if first.is_empty() {
        return walk;
    }
    walk.push(first[rng.gen_range(0..first.len())]);
    while walk.len() < params.walk_length {
        let cur = walk[walk.len() - 1];
        let prev = walk[walk.len() - 2];
        let neighbors = g.neighbors(cur);
        if neighbors.is_empty() {
            break;
        }
        let mut total = 0.0;
        let mut cumulative = Vec::with_capacity(neighbors.len());
        for &x in neighbors {
            let w = if x == prev {
                1.0 / params.p
            } else if g.has_edge(prev, x) {
                1.0
            } else {
                1.0 / params.q
            };
            total += w;
            cumulative.push(total);
        }
        let draw = rng.gen::<f64>() * total;
        let pick = cumulative.partition_point(|&c| c <= draw).min(neighbors.len() - 1);
        walk.push(neighbors[pick]);
    }
    walk
}

/// Skip-gram with negative sampling over the walk corpus.
///
/// Negatives come from the walk-token unigram distribution raised to 0.75.
/// Rows of nodes never visited stay at their random initialization.
pub fn embed(corpus: &WalkCorpus, g: &Graph, params: &Node2VecParams) -> Result<EmbeddingMatrix, EmbedError> {
    params.validate();
    if corpus.walks.is_empty() {
        return Err(EmbedError::EmptyCorpus);
    }
    let n = g.n_nodes();
    let d = params.dim;
    for walk in &corpus.walks {
        if let Some(&bad) = walk.iter().find(|&&v| v >= n) {
            return Err(EmbedError::CorpusGraphMismatch(bad));
        }
    }

    // Input vectors: small random init; output vectors: zero (word2vec style).
    let mut init_rng = derive_rng(params.seed, "node2vec-init", &[]);
    let span = 0.5 / d as f64;
    let mut input = vec![0.0f64; n * d];
    for v in input.iter_mut() {
        *v = init_rng.gen_range(-span..span);
    }
    let mut output = vec![0.0f64; n * d];

    // Unigram^0.75 cumulative table over corpus tokens.
    let mut freq = vec![0u64; n];
    for walk in &corpus.walks {
        for &v in walk {
            freq[v] += 1;
        }
    }
    let mut cum = Vec::with_capacity(n);
    let mut mass = 0.0f64;
    for &f in &freq {
        mass += (f as f64).powf(0.75);
        cum.push(mass);
    }

    let pairs_per_epoch: usize = corpus
        .walks
        .iter()
        .map(|walk| {
            let len = walk.len();
            (0..len)
                .map(|i| {
                    let lo = i.saturating_sub(params.window);
                    let hi = (i + params.window).min(len - 1);
                    hi - lo
                })
                .sum::<usize>()
        })
        .sum();
    let total_updates = (pairs_per_epoch * params.epochs).max(1);
    if pairs_per_epoch == 0 {
        // Singleton-only corpus: nothing to train on.
        let rows = Array2::from_shape_vec((n, d), input).expect("n*d values");
        return Ok(EmbeddingMatrix {
            method: EmbeddingMethod::Node2Vec,
            dim: d,
            rows,
            params_fingerprint: params.fingerprint(),
        });
    }

    let mut train_rng = derive_rng(params.seed, "node2vec-train", &[]);
    let mut processed = 0usize;
    let mut accum = vec![0.0f64; d];
    for _ in 0..params.epochs {
        for walk in &corpus.walks {
            let len = walk.len();
            for i in 0..len {
                let center = walk[i];
                let lo = i.saturating_sub(params.window);
                let hi = (i + params.window).min(len - 1);
                for j in lo..=hi {
                    if j == i {
                        continue;
                    }
                    let context = walk[j];
                    let lr = params.learning_rate
                        * (1.0 - processed as f64 / total_updates as f64).max(1e-4);
                    processed += 1;

                    let center_row = &mut input[center * d..(center + 1) * d];
                    accum.iter_mut().for_each(|a| *a = 0.0);
                    // Positive target, then k negatives from the table.
                    for sample in 0..=params.negatives {
                        let (target, label) = if sample == 0 {
                            (context, 1.0)
                        } else {
                            let draw = train_rng.gen::<f64>() * mass;
                            let pick = cum.partition_point(|&c| c <= draw).min(n - 1);
                            if pick == context {
                                continue;
                            }
                            (pick, 0.0)
                        };
                        let out_row = &mut output[target * d..(target + 1) * d];
                        let dot: f64 = center_row
                            .iter()
                            .zip(out_row.iter())
                            .map(|(a, b)| a * b)
                            .sum();
                        let pred = 1.0 / (1.0 + (-dot).exp());
                        let g = lr * (label - pred);
                        for k in 0..d {
                            accum[k] += g * out_row[k];
                            out_row[k] += g * center_row[k];
                        }
                    }
                    for k in 0..d {
                        center_row[k] += accum[k];
                    }
                }
            }
        }
    }

    let rows = Array2::from_shape_vec((n, d), input).expect("n*d values");
    Ok(EmbeddingMatrix {
        method: EmbeddingMethod::Node2Vec,
        dim: d,
        rows,
        params_fingerprint: params.fingerprint(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    fn path3() -> Graph {
        let ids: Vec<String> = (0..3).map(|i| i.to_string()).collect();
        let edges = vec![
            ("0".to_string(), "1".to_string()),
            ("1".to_string(), "2".to_string()),
        ];
        Graph::build(&edges, &ids).unwrap()
    }

    fn triangle() -> Graph {
        let ids: Vec<String> = (0..3).map(|i| i.to_string()).collect();
        let edges = vec![
            ("0".to_string(), "1".to_string()),
            ("1".to_string(), "2".to_string()),
            ("0".to_string(), "2".to_string()),
        ];
        Graph::build(&edges, &ids).unwrap()
    }

    fn transition_frequency(
        g: &Graph,
        p: f64,
        q: f64,
        prev: usize,
        cur: usize,
    ) -> HashMap<usize, f64> {
        let params = Node2VecParams {
            p,
            q,
            walk_length: 60,
            walks_per_node: 400,
            seed: 99,
            ..Node2VecParams::default()
        };
        let corpus = walks(g, &params);
        let mut counts: HashMap<usize, u64> = HashMap::new();
        let mut total = 0u64;
        for walk in &corpus.walks {
            for win in walk.windows(3) {
                if win[0] == prev && win[1] == cur {
                    *counts.entry(win[2]).or_default() += 1;
                    total += 1;
                }
            }
        }
        assert!(total > 3000, "need enough visits, got {total}");
        counts
            .into_iter()
            .map(|(k, v)| (k, v as f64 / total as f64))
            .collect()
    }

    #[test]
    fn corpus_shape_and_edges() {
        let g = path3();
        let params = Node2VecParams {
            walk_length: 10,
            walks_per_node: 4,
            seed: 1,
            ..Node2VecParams::default()
        };
        let corpus = walks(&g, &params);
        assert_eq!(corpus.walks.len(), 12);
        for walk in &corpus.walks {
            assert_eq!(walk.len(), 10);
            for win in walk.windows(2) {
                assert!(g.has_edge(win[0], win[1]));
            }
        }
    }

    #[test]
    fn isolated_node_yields_singleton() {
        let ids: Vec<String> = (0..3).map(|i| i.to_string()).collect();
        let g = Graph::build(&[("0".to_string(), "1".to_string())], &ids).unwrap();
        let params = Node2VecParams {
            walk_length: 5,
            walks_per_node: 2,
            seed: 3,
            ..Node2VecParams::default()
        };
        let corpus = walks(&g, &params);
        let singletons = corpus.walks.iter().filter(|w| w.len() == 1).count();
        assert_eq!(singletons, 2);
        assert!(corpus.walks.iter().filter(|w| w.len() == 1).all(|w| w[0] == 2));
    }

    #[test]
    fn uniform_when_p_and_q_are_one() {
        let g = triangle();
        let freq = transition_frequency(&g, 1.0, 1.0, 0, 1);
        assert!((freq[&0] - 0.5).abs() < 0.02);
        assert!((freq[&2] - 0.5).abs() < 0.02);
    }

    #[test]
    fn path_return_bias() {
        // At 1 from 0 with p=0.5, q=2: P(back)=0.8, P(forward)=0.2.
        let g = path3();
        let freq = transition_frequency(&g, 0.5, 2.0, 0, 1);
        assert!((freq[&0] - 0.8).abs() < 0.02, "back {:?}", freq);
        assert!((freq[&2] - 0.2).abs() < 0.02, "fwd {:?}", freq);
    }

    #[test]
    fn triangle_distance_one_case() {
        // In a triangle the third node is adjacent to the previous node, so
        // a huge q changes nothing: both moves keep weight 1 vs 1/p=1.
        let g = triangle();
        let freq = transition_frequency(&g, 1.0, 1e9, 0, 1);
        assert!((freq[&0] - 0.5).abs() < 0.02);
        assert!((freq[&2] - 0.5).abs() < 0.02);
    }

    #[test]
    fn walks_deterministic_for_seed() {
        let g = triangle();
        let params = Node2VecParams {
            walk_length: 12,
            walks_per_node: 3,
            seed: 7,
            ..Node2VecParams::default()
        };
        assert_eq!(walks(&g, &params).walks, walks(&g, &params).walks);
    }

    #[test]
    fn embedding_deterministic_for_seed() {
        let g = triangle();
        let params = Node2VecParams {
            walk_length: 10,
            walks_per_node: 3,
            dim: 8,
            epochs: 1,
            seed: 11,
            ..Node2VecParams::default()
        };
        let corpus = walks(&g, &params);
        let a = embed(&corpus, &g, &params).unwrap();
        let b = embed(&corpus, &g, &params).unwrap();
        assert_eq!(a.rows, b.rows);
    }

    #[test]
    fn singleton_corpus_keeps_initialization() {
        let ids: Vec<String> = (0..4).map(|i| i.to_string()).collect();
        let g = Graph::build(&[], &ids).unwrap();
        let params = Node2VecParams {
            walk_length: 5,
            walks_per_node: 2,
            dim: 6,
            seed: 5,
            ..Node2VecParams::default()
        };
        let corpus = walks(&g, &params);
        let emb = embed(&corpus, &g, &params).unwrap();
        let bound = 0.5 / 6.0;
        assert!(emb.rows.iter().all(|x| x.abs() <= bound));
        assert!(emb.rows.iter().any(|x| *x != 0.0));
    }

    #[test]
    fn empty_corpus_is_error() {
        let g = triangle();
        let corpus = WalkCorpus {
            walks: Vec::new(),
            seed: 0,
        };
        assert!(matches!(
            embed(&corpus, &g, &Node2VecParams::default()),
            Err(EmbedError::EmptyCorpus)
        ));
    }

    #[test]
    fn cliques_separate_in_cosine_similarity() {
        // Two 4-cliques, no connection: intra-clique similarity must beat
        // inter-clique similarity after training.
        let ids: Vec<String> = (0..8).map(|i| i.to_string()).collect();
        let mut edges = Vec::new();
        for block in 0..2 {
            for i in 0..4 {
                for j in (i + 1)..4 {
                    edges.push((
                        (block * 4 + i).to_string(),
                        (block * 4 + j).to_string(),
                    ));
                }
            }
        }
        let g = Graph::build(&edges, &ids).unwrap();
        let params = Node2VecParams {
            walk_length: 20,
            walks_per_node: 20,
            dim: 16,
            epochs: 4,
            seed: 13,
            ..Node2VecParams::default()
        };
        let corpus = walks(&g, &params);
        let emb = embed(&corpus, &g, &params).unwrap();
        let cosine = |a: usize, b: usize| {
            let ra = emb.rows.row(a);
            let rb = emb.rows.row(b);
            ra.dot(&rb) / (ra.dot(&ra).sqrt() * rb.dot(&rb).sqrt())
        };
        let mut intra = Vec::new();
        let mut inter = Vec::new();
        for a in 0..8 {
            for b in (a + 1)..8 {
                if a / 4 == b / 4 {
                    intra.push(cosine(a, b));
                } else {
                    inter.push(cosine(a, b));
                }
            }
        }
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        assert!(
            mean(&intra) > mean(&inter),
            "intra {} vs inter {}",
            mean(&intra),
            mean(&inter)
        );
    }
}
