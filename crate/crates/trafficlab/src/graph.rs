//! Immutable undirected sensor graph.
//!
//! External sensor ids are arbitrary strings; all math runs on dense indices
//! `0..n`. The graph is simple and unweighted: duplicate edges are dropped
//! silently, self-loops are rejected.

use std::collections::HashMap;

use ndarray::Array2;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GraphError {
    #[error("unknown sensor id `{0}` in edge list")]
    UnknownSensorId(String),
    #[error("self-loop on sensor id `{0}`")]
    SelfLoop(String),
    #[error("duplicate sensor id `{0}`")]
    DuplicateSensorId(String),
}

/// Undirected unweighted graph over sensor nodes.
///
/// Immutable after construction; safe to share across threads.
#[derive(Debug, Clone)]
pub struct Graph {
    ids: Vec<String>,
    index: HashMap<String, usize>,
    adjacency: Vec<Vec<usize>>,
    n_edges: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphStats {
    pub n_nodes: usize,
    pub n_edges: usize,
    pub avg_degree: f64,
    pub n_components: usize,
}

impl Graph {
    /// Build a graph from an edge list over the given node ids.
    ///
    /// Node indices follow the order of `sensor_ids`. Duplicate edges are
    /// deduplicated; an edge naming an unlisted id or joining a node to
    /// itself is an error.
    pub fn build(edge_list: &[(String, String)], sensor_ids: &[String]) -> Result<Self, GraphError> {
        let mut index = HashMap::with_capacity(sensor_ids.len());
        for (i, id) in sensor_ids.iter().enumerate() {
            if index.insert(id.clone(), i).is_some() {
                return Err(GraphError::DuplicateSensorId(id.clone()));
            }
        }
        let mut adjacency = vec![Vec::new(); sensor_ids.len()];
        let mut n_edges = 0;
        for (a, b) in edge_list {
            let i = *index
                .get(a)
                .ok_or_else(|| GraphError::UnknownSensorId(a.clone()))?;
            let j = *index
                .get(b)
                .ok_or_else(|| GraphError::UnknownSensorId(b.clone()))?;
            if i == j {
                return Err(GraphError::SelfLoop(a.clone()));
            }
            // Sorted insert keeps neighbor lists ordered and makes the
            // duplicate check a binary search.
            match adjacency[i].binary_search(&j) {
                Ok(_) => continue,
                Err(pos) => adjacency[i].insert(pos, j),
            }
            let pos = adjacency[j].binary_search(&i).unwrap_err();
            adjacency[j].insert(pos, i);
            n_edges += 1;
        }
        Ok(Graph {
            ids: sensor_ids.to_vec(),
            index,
            adjacency,
            n_edges,
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.ids.len()
    }

    pub fn n_edges(&self) -> usize {
        self.n_edges
    }

    /// Sorted neighbor list of node `i`.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adjacency[i].binary_search(&j).is_ok()
    }

    /// External id of dense index `i`.
    pub fn id_of(&self, i: usize) -> &str {
        &self.ids[i]
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    /// Edges as dense index pairs with `i < j`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(i, adj)| adj.iter().filter(move |&&j| i < j).map(move |&j| (i, j)))
    }

    /// Dense 0/1 adjacency matrix.
    pub fn adjacency_matrix(&self) -> Array2<f64> {
        let n = self.n_nodes();
        let mut a = Array2::zeros((n, n));
        for (i, j) in self.edges() {
            a[[i, j]] = 1.0;
            a[[j, i]] = 1.0;
        }
        a
    }

    /// Unnormalized Laplacian: degree matrix minus adjacency.
    pub fn laplacian(&self) -> Array2<f64> {
        let n = self.n_nodes();
        let mut l = Array2::zeros((n, n));
        for i in 0..n {
            l[[i, i]] = self.degree(i) as f64;
        }
        for (i, j) in self.edges() {
            l[[i, j]] = -1.0;
            l[[j, i]] = -1.0;
        }
        l
    }

    /// Node count, edge count, average degree, and component count.
    pub fn stats(&self) -> GraphStats {
        let n = self.n_nodes();
        let avg_degree = if n == 0 {
            0.0
        } else {
            2.0 * self.n_edges as f64 / n as f64
        };
        GraphStats {
            n_nodes: n,
            n_edges: self.n_edges,
            avg_degree,
            n_components: self.component_labels().1,
        }
    }

    /// Per-node component label plus the number of components (BFS).
    pub fn component_labels(&self) -> (Vec<usize>, usize) {
        let n = self.n_nodes();
        let mut label = vec![usize::MAX; n];
        let mut n_components = 0;
        let mut queue = std::collections::VecDeque::new();
        for start in 0..n {
            if label[start] != usize::MAX {
                continue;
            }
            label[start] = n_components;
            queue.push_back(start);
            while let Some(v) = queue.pop_front() {
                for &w in self.neighbors(v) {
                    if label[w] == usize::MAX {
                        label[w] = n_components;
                        queue.push_back(w);
                    }
                }
            }
            n_components += 1;
        }
        (label, n_components)
    }
}
