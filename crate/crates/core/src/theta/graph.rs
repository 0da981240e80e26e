use std::collections::BTreeSet;
use std::fmt::Write as _;

use nalgebra::DMatrix;

use crate::channel::{CQChannel, ClassicalChannel};
use crate::divergence::affinity_matrix;
use crate::error::{Error, Result};

/// Undirected simple graph on inputs; an edge joins two confusable inputs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfusabilityGraph {
    n: usize,
    edges: BTreeSet<(usize, usize)>,
}

impl ConfusabilityGraph {
    /// Edges are unordered; each is stored as (min, max).
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Empty { what: "graph" });
        }
        let mut set = BTreeSet::new();
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::InvalidArgument(format!("edge ({u},{v}) outside {n} vertices")));
            }
            if u == v {
                return Err(Error::InvalidArgument(format!("self-loop at vertex {u}")));
            }
            set.insert((u.min(v), u.max(v)));
        }
        Ok(ConfusabilityGraph { n, edges: set })
    }

    pub fn cycle(n: usize) -> Self {
        Self::new(n, (0..n).map(|x| (x, (x + 1) % n))).expect("cycle on at least three vertices")
    }

    pub fn complete(n: usize) -> Self {
        Self::new(n, (0..n).flat_map(|x| (x + 1..n).map(move |y| (x, y)))).expect("valid vertices")
    }

    pub fn empty(n: usize) -> Self {
        Self::new(n, []).expect("no edges")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edges.contains(&(u.min(v), u.max(v)))
    }

    pub fn complement(&self) -> Self {
        let n = self.n;
        Self::new(n, (0..n).flat_map(|x| (x + 1..n).map(move |y| (x, y))).filter(|&(x, y)| !self.has_edge(x, y)))
            .expect("valid vertices")
    }

    /// Affinity-style bounds: 1 on edges and the diagonal, 0 elsewhere.
    pub fn indicator(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |x, y| if x == y || self.has_edge(x, y) { 1.0 } else { 0.0 })
    }

    /// Parses `n` on the first content line, then one `u v` pair per line.
    /// Blank lines and lines starting with `#` are skipped.
    pub fn from_edge_list(text: &str) -> Result<Self> {
        let mut n: Option<usize> = None;
        let mut edges = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parse_err = |message: String| Error::Parse { line: i + 1, message };
            let fields: Vec<&str> = line.split_whitespace().collect();
            let num = |s: &str| s.parse::<usize>().map_err(|_| parse_err(format!("not a vertex index: {s:?}")));
            match (n, fields.as_slice()) {
                (None, [count]) => n = Some(num(count)?),
                (None, _) => return Err(parse_err("expected the vertex count".into())),
                (Some(count), [u, v]) => {
                    let (u, v) = (num(u)?, num(v)?);
                    if u >= count || v >= count || u == v {
                        return Err(parse_err(format!("invalid edge {u} {v} for {count} vertices")));
                    }
                    edges.push((u, v));
                }
                (Some(_), _) => return Err(parse_err("expected two vertex indices".into())),
            }
        }
        let n = n.ok_or(Error::Parse { line: 0, message: "missing vertex count".into() })?;
        Self::new(n, edges)
    }

    pub fn to_edge_list(&self) -> String {
        let mut s = format!("{}\n", self.n);
        for (u, v) in self.edges() {
            writeln!(s, "{u} {v}").expect("writing to a string");
        }
        s
    }
}

/// Edge between x and x' unless their supports are orthogonal.
pub fn confusability_graph(channel: &CQChannel) -> ConfusabilityGraph {
    let g = affinity_matrix(channel);
    let n = channel.inputs();
    ConfusabilityGraph::new(n, (0..n).flat_map(|x| (x + 1..n).map(move |y| (x, y))).filter(|&(x, y)| g[(x, y)] > 0.0))
        .expect("valid vertices")
}

/// Edge between two inputs sharing an output of positive probability.
pub fn classical_confusability_graph(w: &ClassicalChannel) -> ConfusabilityGraph {
    let n = w.inputs();
    let shares = |x: usize, y: usize| (0..w.outputs()).any(|o| w.prob(x, o) > 0.0 && w.prob(y, o) > 0.0);
    ConfusabilityGraph::new(n, (0..n).flat_map(|x| (x + 1..n).map(move |y| (x, y))).filter(|&(x, y)| shares(x, y)))
        .expect("valid vertices")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::classical_embed;

    #[test]
    fn channel_graphs() {
        let noiseless = classical_embed(&ClassicalChannel::noiseless(2));
        assert_eq!(confusability_graph(&noiseless).edge_count(), 0);
        let bsc = ClassicalChannel::bsc(0.1);
        assert_eq!(confusability_graph(&classical_embed(&bsc)).edge_count(), 1);
        let tw = ClassicalChannel::noisy_typewriter(5, 0.5);
        assert_eq!(confusability_graph(&classical_embed(&tw)), ConfusabilityGraph::cycle(5));
        assert_eq!(classical_confusability_graph(&tw), ConfusabilityGraph::cycle(5));
    }

    #[test]
    fn edge_list_round_trip() {
        let text = "# pentagon\n5\n0 1\n1 2\n\n2 3\n3 4\n4 0\n";
        let g = ConfusabilityGraph::from_edge_list(text).unwrap();
        assert_eq!(g.n(), 5);
        assert_eq!(g.edge_count(), 5);
        assert_eq!(ConfusabilityGraph::from_edge_list(&g.to_edge_list()).unwrap(), g);
    }

    #[test]
    fn edge_list_errors_name_the_line() {
        match ConfusabilityGraph::from_edge_list("3\n0 1\n1 3\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        assert!(ConfusabilityGraph::from_edge_list("3\n1 1\n").is_err());
        assert!(ConfusabilityGraph::from_edge_list("# nothing\n").is_err());
    }

    #[test]
    fn complement_of_pentagon_is_pentagon() {
        let c = ConfusabilityGraph::cycle(5).complement();
        assert_eq!(c.edge_count(), 5);
        assert!(c.has_edge(0, 2));
    }
}
