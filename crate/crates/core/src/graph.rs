//! Weighted undirected networks, their incidence and Laplacian matrices, and
//! edge-change scenarios.
//!
//! Nodes are 0-based in the API and 1-based in the text format. An edge keeps
//! its orientation (tail, head) because the incidence matrix depends on it,
//! but at most one edge may join any unordered pair of nodes.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest node count stored densely; bigger Laplacians use triplet form.
pub const DENSE_MAX_NODES: usize = 200;

/// Unordered node pair, stored with `lo < hi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodePair {
    lo: usize,
    hi: usize,
}

impl NodePair {
    pub fn new(a: usize, b: usize) -> Self {
        NodePair {
            lo: a.min(b),
            hi: a.max(b),
        }
    }

    pub fn lo(&self) -> usize {
        self.lo
    }

    pub fn hi(&self) -> usize {
        self.hi
    }

    pub fn is_loop(&self) -> bool {
        self.lo == self.hi
    }
}

impl fmt::Display for NodePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.lo + 1, self.hi + 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub tail: usize,
    pub head: usize,
    pub weight: f64,
}

impl Edge {
    pub fn new(tail: usize, head: usize, weight: f64) -> Self {
        Edge { tail, head, weight }
    }

    pub fn pair(&self) -> NodePair {
        NodePair::new(self.tail, self.head)
    }
}

/// A weighted undirected graph without self-loops or parallel edges.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    n: usize,
    edges: Vec<Edge>,
    index: BTreeMap<NodePair, usize>,
}

impl Network {
    pub fn new(n: usize, edges: Vec<Edge>) -> Result<Self> {
        let mut index = BTreeMap::new();
        for (k, e) in edges.iter().enumerate() {
            if e.tail >= n || e.head >= n {
                return Err(Error::InvalidNetwork(format!(
                    "edge {} references node outside 1..={}",
                    k + 1,
                    n
                )));
            }
            if e.tail == e.head {
                return Err(Error::InvalidNetwork(format!(
                    "self-loop at node {}",
                    e.tail + 1
                )));
            }
            if !(e.weight > 0.0 && e.weight.is_finite()) {
                return Err(Error::InvalidNetwork(format!(
                    "edge {} has non-positive weight {}",
                    e.pair(),
                    e.weight
                )));
            }
            if index.insert(e.pair(), k).is_some() {
                return Err(Error::InvalidNetwork(format!(
                    "duplicate edge {}",
                    e.pair()
                )));
            }
        }
        Ok(Network { n, edges, index })
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, pair: NodePair) -> Option<&Edge> {
        self.index.get(&pair).map(|&k| &self.edges[k])
    }

    pub fn contains(&self, pair: NodePair) -> bool {
        self.index.contains_key(&pair)
    }

    /// Signed m×n incidence matrix: −1 at the tail, +1 at the head.
    pub fn incidence_matrix(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.edges.len(), self.n);
        for (k, e) in self.edges.iter().enumerate() {
            a[(k, e.tail)] = -1.0;
            a[(k, e.head)] = 1.0;
        }
        a
    }

    pub fn weight_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_iterator(
            self.edges.len(),
            self.edges.iter().map(|e| e.weight),
        ))
    }

    /// Entrywise assembly: off-diagonals are negated edge weights, diagonals
    /// the weighted degree.
    pub fn laplacian(&self) -> Laplacian {
        let mut m = SymMatrix::zeros(self.n);
        for e in &self.edges {
            m.add(e.tail, e.head, -e.weight);
            m.add(e.tail, e.tail, e.weight);
            m.add(e.head, e.head, e.weight);
        }
        Laplacian(m)
    }

    /// Dense `AᵀCA`. Independent of [`Network::laplacian`]; the two must agree.
    pub fn laplacian_via_incidence(&self) -> DMatrix<f64> {
        let a = self.incidence_matrix();
        a.transpose() * self.weight_matrix() * a
    }

    /// Edge flows `w = C A u`, so that `Aᵀ w = L u`.
    pub fn edge_flows(&self, u: &[f64]) -> Result<Vec<f64>> {
        if u.len() != self.n {
            return Err(Error::dim("node potentials", self.n, u.len()));
        }
        Ok(self
            .edges
            .iter()
            .map(|e| e.weight * (u[e.head] - u[e.tail]))
            .collect())
    }

    /// Net flow into each node from edge flows, i.e. `Aᵀ w`.
    pub fn injections_from_flows(&self, w: &[f64]) -> Result<Vec<f64>> {
        if w.len() != self.edges.len() {
            return Err(Error::dim("edge flows", self.edges.len(), w.len()));
        }
        let mut f = vec![0.0; self.n];
        for (e, &flow) in self.edges.iter().zip(w) {
            f[e.tail] -= flow;
            f[e.head] += flow;
        }
        Ok(f)
    }

    /// Applies removals and additions, returning the changed network together
    /// with its Laplacian and the difference `L₁ − L₀`.
    pub fn apply_changes(&self, changes: &EdgeChangeSet) -> Result<(Network, Laplacian, SymMatrix)> {
        changes.validate_against(self)?;
        let mut edges: Vec<Edge> = self
            .edges
            .iter()
            .filter(|e| !changes.removed.contains(&e.pair()))
            .copied()
            .collect();
        for (pair, &w) in &changes.added {
            edges.push(Edge::new(pair.lo, pair.hi, w));
        }
        let changed = Network::new(self.n, edges)?;
        let l1 = changed.laplacian();
        let delta = l1.as_sym().sub(self.laplacian().as_sym());
        Ok((changed, l1, delta))
    }

    /// Edge-list text: a `# nodes N` directive then one `tail head weight`
    /// line per edge, 1-based.
    pub fn to_edge_list(&self) -> String {
        let mut s = format!("# nodes {}\n", self.n);
        for e in &self.edges {
            s.push_str(&format!("{} {} {}\n", e.tail + 1, e.head + 1, e.weight));
        }
        s
    }

    pub fn parse_edge_list(text: &str) -> Result<Self> {
        let mut declared: Option<usize> = None;
        let mut edges = Vec::new();
        let mut max_node = 0usize;
        for (lineno, raw) in text.lines().enumerate() {
            let line = lineno + 1;
            let trimmed = raw.trim();
            if let Some(comment) = trimmed.strip_prefix('#') {
                let mut words = comment.split_whitespace();
                if words.next() == Some("nodes") {
                    let n = words
                        .next()
                        .and_then(|w| w.parse::<usize>().ok())
                        .ok_or_else(|| Error::Parse {
                            line,
                            msg: "malformed `# nodes` directive".into(),
                        })?;
                    declared = Some(n);
                }
                continue;
            }
            let code = trimmed.split('#').next().unwrap_or("").trim();
            if code.is_empty() {
                continue;
            }
            let fields: Vec<&str> = code.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(Error::Parse {
                    line,
                    msg: format!("expected `tail head weight`, found {} fields", fields.len()),
                });
            }
            let node = |s: &str| -> Result<usize> {
                match s.parse::<usize>() {
                    Ok(v) if v >= 1 => Ok(v),
                    _ => Err(Error::Parse {
                        line,
                        msg: format!("bad node index `{s}`"),
                    }),
                }
            };
            let tail = node(fields[0])?;
            let head = node(fields[1])?;
            let weight: f64 = fields[2].parse().map_err(|_| Error::Parse {
                line,
                msg: format!("bad weight `{}`", fields[2]),
            })?;
            max_node = max_node.max(tail).max(head);
            edges.push(Edge::new(tail - 1, head - 1, weight));
        }
        let n = declared.unwrap_or(max_node);
        Network::new(n, edges)
    }
}

/// Edge removals and additions relative to a reference network.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EdgeChangeSet {
    pub removed: BTreeSet<NodePair>,
    pub added: BTreeMap<NodePair, f64>,
}

impl EdgeChangeSet {
    pub fn removals<I: IntoIterator<Item = NodePair>>(pairs: I) -> Self {
        EdgeChangeSet {
            removed: pairs.into_iter().collect(),
            added: BTreeMap::new(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.removed.is_empty() && self.added.is_empty()
    }

    pub fn is_removal_only(&self) -> bool {
        self.added.is_empty()
    }

    pub fn validate_against(&self, net: &Network) -> Result<()> {
        for &p in &self.removed {
            if !net.contains(p) {
                return Err(Error::MissingEdge(p));
            }
        }
        for (&p, &w) in &self.added {
            if net.contains(p) || self.removed.contains(&p) {
                return Err(Error::DuplicateEdge(p));
            }
            if p.is_loop() || p.hi >= net.node_count() {
                return Err(Error::InvalidArgument(format!("cannot add edge {p}")));
            }
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "added edge {p} has non-positive weight {w}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Storage {
    Dense(DMatrix<f64>),
    /// Lower-triangular entries keyed `(row, col)` with `row >= col`.
    Triplet(BTreeMap<(usize, usize), f64>),
}

/// Real symmetric n×n matrix, dense up to [`DENSE_MAX_NODES`] and triplet
/// form beyond.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    n: usize,
    storage: Storage,
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        let storage = if n <= DENSE_MAX_NODES {
            Storage::Dense(DMatrix::zeros(n, n))
        } else {
            Storage::Triplet(BTreeMap::new())
        };
        SymMatrix { n, storage }
    }

    /// Symmetric part of a dense square matrix, taken from its lower triangle.
    pub fn from_dense_lower(m: &DMatrix<f64>) -> Self {
        assert_eq!(m.nrows(), m.ncols());
        let mut s = SymMatrix::zeros(m.nrows());
        for j in 0..m.ncols() {
            for i in j..m.nrows() {
                if m[(i, j)] != 0.0 {
                    s.set(i, j, m[(i, j)]);
                }
            }
        }
        s
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match &self.storage {
            Storage::Dense(m) => m[(i, j)],
            Storage::Triplet(t) => t.get(&(i.max(j), i.min(j))).copied().unwrap_or(0.0),
        }
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        match &mut self.storage {
            Storage::Dense(m) => {
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
            Storage::Triplet(t) => {
                let key = (i.max(j), i.min(j));
                if v == 0.0 {
                    t.remove(&key);
                } else {
                    t.insert(key, v);
                }
            }
        }
    }

    /// Adds `v` to entry (i, j) and, off the diagonal, to (j, i).
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let cur = self.get(i, j);
        self.set(i, j, cur + v);
    }

    /// Nonzero entries on and below the diagonal as `(row, col, value)`,
    /// column-major.
    pub fn lower_nonzeros(&self) -> Vec<(usize, usize, f64)> {
        match &self.storage {
            Storage::Dense(m) => {
                let mut out = Vec::new();
                for j in 0..self.n {
                    for i in j..self.n {
                        let v = m[(i, j)];
                        if v != 0.0 {
                            out.push((i, j, v));
                        }
                    }
                }
                out
            }
            Storage::Triplet(t) => {
                let mut out: Vec<_> = t
                    .iter()
                    .filter(|(_, &v)| v != 0.0)
                    .map(|(&(i, j), &v)| (i, j, v))
                    .collect();
                out.sort_by_key(|&(i, j, _)| (j, i));
                out
            }
        }
    }

    pub fn nnz_full(&self) -> usize {
        self.lower_nonzeros()
            .iter()
            .map(|&(i, j, _)| if i == j { 1 } else { 2 })
            .sum()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        match &self.storage {
            Storage::Dense(m) => m.clone(),
            Storage::Triplet(t) => {
                let mut m = DMatrix::zeros(self.n, self.n);
                for (&(i, j), &v) in t {
                    m[(i, j)] = v;
                    m[(j, i)] = v;
                }
                m
            }
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        let mut y = vec![0.0; self.n];
        for (i, j, v) in self.lower_nonzeros() {
            y[i] += v * x[j];
            if i != j {
                y[j] += v * x[i];
            }
        }
        y
    }

    pub fn sub(&self, other: &SymMatrix) -> SymMatrix {
        assert_eq!(self.n, other.n);
        let mut out = self.clone();
        for (i, j, v) in other.lower_nonzeros() {
            out.add(i, j, -v);
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.lower_nonzeros().is_empty()
    }
}

/// Weighted graph Laplacian: symmetric, zero row sums, non-positive
/// off-diagonals.
#[derive(Debug, Clone, PartialEq)]
pub struct Laplacian(SymMatrix);

impl Laplacian {
    /// Checks the Laplacian invariants to tolerance `tol` before wrapping.
    pub fn from_sym(m: SymMatrix, tol: f64) -> Result<Self> {
        let n = m.dim();
        let mut row_sums = vec![0.0; n];
        for (i, j, v) in m.lower_nonzeros() {
            if i != j && v > tol {
                return Err(Error::InvalidNetwork(format!(
                    "positive off-diagonal at ({},{})",
                    i + 1,
                    j + 1
                )));
            }
            row_sums[i] += v;
            if i != j {
                row_sums[j] += v;
            }
        }
        if let Some(i) = row_sums.iter().position(|s| s.abs() > tol) {
            return Err(Error::InvalidNetwork(format!(
                "row {} sums to {}",
                i + 1,
                row_sums[i]
            )));
        }
        Ok(Laplacian(m))
    }

    pub fn as_sym(&self) -> &SymMatrix {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0.get(i, j)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        self.0.to_dense()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        self.0.mul_vec(x)
    }

    /// Undirected edges implied by the off-diagonal sparsity pattern.
    pub fn edge_pairs(&self) -> Vec<NodePair> {
        self.0
            .lower_nonzeros()
            .into_iter()
            .filter(|&(i, j, _)| i != j)
            .map(|(i, j, _)| NodePair::new(i, j))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn two_node(c: f64) -> Network {
        Network::new(2, vec![Edge::new(0, 1, c)]).unwrap()
    }

    fn random_network(rng: &mut ChaCha8Rng, n: usize, density: f64) -> Network {
        let mut edges = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                if rng.random::<f64>() < density {
                    let w = rng.random_range(0.01..2.0);
                    if rng.random::<bool>() {
                        edges.push(Edge::new(i, j, w));
                    } else {
                        edges.push(Edge::new(j, i, w));
                    }
                }
            }
        }
        Network::new(n, edges).unwrap()
    }

    /// Row reduction with partial pivoting; rank by counting pivots.
    fn brute_rank(m: &DMatrix<f64>) -> usize {
        let mut a = m.clone();
        let (rows, cols) = a.shape();
        let mut rank = 0;
        for c in 0..cols {
            let Some(p) = (rank..rows).max_by(|&x, &y| a[(x, c)].abs().total_cmp(&a[(y, c)].abs())) else {
                break;
            };
            if a[(p, c)].abs() < 1e-12 {
                continue;
            }
            a.swap_rows(rank, p);
            for r in 0..rows {
                if r != rank {
                    let f = a[(r, c)] / a[(rank, c)];
                    for k in 0..cols {
                        a[(r, k)] -= f * a[(rank, k)];
                    }
                }
            }
            rank += 1;
        }
        rank
    }

    #[test]
    fn incidence_of_single_edge() {
        let a = two_node(1.0).incidence_matrix();
        assert_eq!(a, DMatrix::from_row_slice(1, 2, &[-1.0, 1.0]));
    }

    #[test]
    fn three_cycle_incidence_has_rank_two() {
        let net = Network::new(
            3,
            vec![Edge::new(0, 1, 1.0), Edge::new(1, 2, 1.0), Edge::new(2, 0, 1.0)],
        )
        .unwrap();
        let a = net.incidence_matrix();
        assert_eq!(brute_rank(&a), 2);
        for r in 0..3 {
            assert_eq!(a.row(r).sum(), 0.0);
        }
    }

    #[test]
    fn two_node_laplacian() {
        let l = two_node(2.5).laplacian().to_dense();
        assert_eq!(l, DMatrix::from_row_slice(2, 2, &[2.5, -2.5, -2.5, 2.5]));
    }

    #[test]
    fn missing_pair_is_zero() {
        let net = Network::new(3, vec![Edge::new(0, 1, 1.0), Edge::new(1, 2, 1.0)]).unwrap();
        assert_eq!(net.laplacian().get(0, 2), 0.0);
        assert_eq!(net.laplacian().get(2, 0), 0.0);
    }

    #[test]
    fn random_tree_dual_path() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let edges = (1..6)
            .map(|k| Edge::new(rng.random_range(0..k), k, rng.random_range(1e-3..2.0)))
            .collect();
        let net = Network::new(6, edges).unwrap();
        let diff = net.laplacian().to_dense() - net.laplacian_via_incidence();
        assert!(diff.amax() < 1e-12);
    }

    #[test]
    fn dual_path_and_invariants_on_random_networks() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let n = rng.random_range(1..=20);
            let net = random_network(&mut rng, n, 0.3);
            let l = net.laplacian();
            let dense = l.to_dense();
            assert!((&dense - net.laplacian_via_incidence()).amax() < 1e-12);
            assert!((&dense - dense.transpose()).amax() < 1e-12);
            for i in 0..n {
                assert!(dense.row(i).sum().abs() < 1e-12);
            }
            let a = net.incidence_matrix();
            for r in 0..a.nrows() {
                assert_eq!(a.row(r).sum(), 0.0);
            }
            Laplacian::from_sym(l.as_sym().clone(), 1e-12).unwrap();
        }
    }

    #[test]
    fn flows_conserve() {
        let net = two_node(1.0);
        let w = net.edge_flows(&[1.0, 0.0]).unwrap();
        assert_eq!(w, vec![-1.0]);
        assert_eq!(net.injections_from_flows(&w).unwrap(), vec![1.0, -1.0]);
        assert_eq!(net.laplacian().mul_vec(&[1.0, 0.0]), vec![1.0, -1.0]);
        // Orientation only flips the sign of w; Aᵀw is orientation free.
        let flipped = Network::new(2, vec![Edge::new(1, 0, 1.0)]).unwrap();
        let wf = flipped.edge_flows(&[1.0, 0.0]).unwrap();
        assert_eq!(wf, vec![1.0]);
        assert_eq!(flipped.injections_from_flows(&wf).unwrap(), vec![1.0, -1.0]);
    }

    #[test]
    fn flows_match_laplacian_on_random_networks() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let n = rng.random_range(2..=15);
            let net = random_network(&mut rng, n, 0.4);
            let u: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let w = net.edge_flows(&u).unwrap();
            let lhs = net.injections_from_flows(&w).unwrap();
            let rhs = net.laplacian().mul_vec(&u);
            for (a, b) in lhs.iter().zip(&rhs) {
                assert!((a - b).abs() < 1e-12);
            }
        }
        let zero = net_zero_flows();
        assert!(zero.iter().all(|&w| w == 0.0));
    }

    fn net_zero_flows() -> Vec<f64> {
        let net = Network::new(3, vec![Edge::new(0, 1, 1.0), Edge::new(2, 1, 3.0)]).unwrap();
        net.edge_flows(&[0.0; 3]).unwrap()
    }

    #[test]
    fn flow_dimension_mismatch() {
        assert!(matches!(
            two_node(1.0).edge_flows(&[1.0]),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn removal_delta() {
        let c = 1.7;
        let net = two_node(c);
        let (after, l1, delta) = net
            .apply_changes(&EdgeChangeSet::removals([NodePair::new(0, 1)]))
            .unwrap();
        assert_eq!(after.edge_count(), 0);
        assert!(l1.as_sym().is_zero());
        assert_eq!(
            delta.to_dense(),
            DMatrix::from_row_slice(2, 2, &[-c, c, c, -c])
        );
    }

    #[test]
    fn empty_change_is_identity() {
        let net = two_node(1.0);
        let (after, _, delta) = net.apply_changes(&EdgeChangeSet::default()).unwrap();
        assert_eq!(after, net);
        assert!(delta.is_zero());
    }

    #[test]
    fn addition_delta() {
        let net = Network::new(3, vec![Edge::new(0, 1, 1.0)]).unwrap();
        let mut changes = EdgeChangeSet::default();
        changes.added.insert(NodePair::new(1, 2), 0.5);
        let (_, _, delta) = net.apply_changes(&changes).unwrap();
        assert_eq!(delta.get(2, 1), -0.5);
        assert_eq!(delta.get(1, 1), 0.5);
        assert_eq!(delta.get(2, 2), 0.5);
        assert_eq!(delta.get(1, 0), 0.0);
    }

    #[test]
    fn invalid_changes_name_the_pair() {
        let net = two_node(1.0);
        let err = net
            .apply_changes(&EdgeChangeSet::removals([NodePair::new(0, 0)]))
            .unwrap_err();
        assert!(err.to_string().contains("(1,1)"));
        let mut add = EdgeChangeSet::default();
        add.added.insert(NodePair::new(1, 0), 1.0);
        let err = net.apply_changes(&add).unwrap_err();
        assert!(matches!(err, Error::DuplicateEdge(p) if p == NodePair::new(0, 1)));
    }

    #[test]
    fn delta_support_matches_changed_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..30 {
            let net = random_network(&mut rng, 12, 0.4);
            let removed: BTreeSet<NodePair> = net
                .edges()
                .iter()
                .filter(|_| rng.random::<f64>() < 0.2)
                .map(|e| e.pair())
                .collect();
            let changes = EdgeChangeSet {
                removed: removed.clone(),
                added: BTreeMap::new(),
            };
            let (_, _, delta) = net.apply_changes(&changes).unwrap();
            let off: BTreeSet<NodePair> = delta
                .lower_nonzeros()
                .into_iter()
                .filter(|&(i, j, _)| i != j)
                .map(|(i, j, _)| NodePair::new(i, j))
                .collect();
            assert_eq!(off, removed);
        }
    }

    #[test]
    fn rejects_bad_networks() {
        assert!(Network::new(2, vec![Edge::new(0, 0, 1.0)]).is_err());
        assert!(Network::new(2, vec![Edge::new(0, 1, 0.0)]).is_err());
        assert!(Network::new(2, vec![Edge::new(0, 1, 1.0), Edge::new(1, 0, 2.0)]).is_err());
        assert!(Network::new(2, vec![Edge::new(0, 2, 1.0)]).is_err());
    }

    #[test]
    fn sparse_storage_beyond_threshold() {
        let n = DENSE_MAX_NODES + 5;
        let edges = (1..n).map(|k| Edge::new(k - 1, k, 1.0 + k as f64)).collect();
        let net = Network::new(n, edges).unwrap();
        let l = net.laplacian();
        assert!(matches!(l.as_sym().storage, Storage::Triplet(_)));
        assert!((l.to_dense() - net.laplacian_via_incidence()).amax() < 1e-12);
        assert_eq!(l.edge_pairs().len(), n - 1);
    }

    #[test]
    fn edge_list_round_trip() {
        let net = Network::new(
            5,
            vec![Edge::new(0, 1, 1.0), Edge::new(3, 1, 0.1 + 0.2), Edge::new(2, 0, 1e-7)],
        )
        .unwrap();
        let text = net.to_edge_list();
        let back = Network::parse_edge_list(&text).unwrap();
        assert_eq!(back, net);
        assert_eq!(back.to_edge_list(), text);
    }

    #[test]
    fn edge_list_comments_and_errors() {
        let net = Network::parse_edge_list("# a comment\n1 2 1.5  # trailing\n\n2 3 2\n").unwrap();
        assert_eq!(net.node_count(), 3);
        assert_eq!(net.edge_count(), 2);
        let err = Network::parse_edge_list("1 2\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        let err = Network::parse_edge_list("1 2 1\n0 1 1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }
}
