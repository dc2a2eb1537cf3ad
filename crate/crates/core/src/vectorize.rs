//! Vectorized form of the errors-in-variables model.
//!
//! `Vec` stacks columns; `Vech` stacks the lower triangle (diagonal included)
//! column by column. The regression design is `X = (Ũᵀ ⊗ Iₙ) D`, response
//! `y = Vec(F̃)` and offset `β₀ = Vech(L₀)`. Column `k` of `X` corresponds to
//! Vech position `k`, i.e. node pair `(i, j)` with `i ≥ j`, and has nonzeros
//! only in rows `t·n + i` (value `ũ_j(t)`) and `t·n + j` (value `ũ_i(t)`).
//! That structure lets large systems run without materializing `X`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::graph::{Laplacian, SymMatrix};
use crate::simulate::MeasurementSet;

/// Dense materialization limit for `X`, in entries. Column access on the
/// Kronecker form costs `O(T)` against `O(nT)` dense, so only small systems
/// are materialized.
pub const DENSE_DESIGN_MAX_ENTRIES: usize = 100_000;

pub fn vech_len(n: usize) -> usize {
    n * (n + 1) / 2
}

/// Bijection between Vech positions and lower-triangular pairs `(i, j)`,
/// `i ≥ j`, in column-major order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VechIndexMap {
    n: usize,
    pairs: Vec<(usize, usize)>,
}

impl VechIndexMap {
    pub fn new(n: usize) -> Self {
        let mut pairs = Vec::with_capacity(vech_len(n));
        for j in 0..n {
            for i in j..n {
                pairs.push((i, j));
            }
        }
        VechIndexMap { n, pairs }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Position of the unordered pair `{a, b}`.
    pub fn index(&self, a: usize, b: usize) -> usize {
        let (i, j) = (a.max(b), a.min(b));
        debug_assert!(i < self.n);
        j * (2 * self.n - j + 1) / 2 + (i - j)
    }

    /// `(row, col)` with `row ≥ col` at Vech position `k`.
    pub fn pair(&self, k: usize) -> (usize, usize) {
        self.pairs[k]
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }
}

pub fn vec_of(m: &DMatrix<f64>) -> DVector<f64> {
    DVector::from_column_slice(m.as_slice())
}

pub fn vech_of(m: &DMatrix<f64>) -> DVector<f64> {
    assert_eq!(m.nrows(), m.ncols(), "vech needs a square matrix");
    let map = VechIndexMap::new(m.nrows());
    DVector::from_iterator(map.len(), map.pairs().iter().map(|&(i, j)| m[(i, j)]))
}

pub fn vech_sym(m: &SymMatrix) -> DVector<f64> {
    let map = VechIndexMap::new(m.dim());
    let mut v = DVector::zeros(map.len());
    for (i, j, x) in m.lower_nonzeros() {
        v[map.index(i, j)] = x;
    }
    v
}

/// Symmetric matrix whose lower triangle is `v`.
pub fn unvech(v: &[f64], n: usize) -> Result<DMatrix<f64>> {
    let map = VechIndexMap::new(n);
    if v.len() != map.len() {
        return Err(Error::dim("half-vectorized matrix", map.len(), v.len()));
    }
    let mut m = DMatrix::zeros(n, n);
    for (&(i, j), &x) in map.pairs().iter().zip(v) {
        m[(i, j)] = x;
        m[(j, i)] = x;
    }
    Ok(m)
}

/// Duplication matrix `D` (n² × n(n+1)/2) as a row → column index map.
#[derive(Debug, Clone)]
pub struct DuplicationMatrix {
    n: usize,
    col_of_row: Vec<usize>,
}

impl DuplicationMatrix {
    pub fn new(n: usize) -> Self {
        let map = VechIndexMap::new(n);
        let mut col_of_row = vec![0; n * n];
        for j in 0..n {
            for i in 0..n {
                col_of_row[j * n + i] = map.index(i, j);
            }
        }
        DuplicationMatrix { n, col_of_row }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.n * self.n, vech_len(self.n))
    }

    /// `D · v`, turning a Vech vector into the Vec of its symmetric matrix.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), vech_len(self.n));
        self.col_of_row.iter().map(|&c| v[c]).collect()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let (r, c) = self.shape();
        let mut d = DMatrix::zeros(r, c);
        for (row, &col) in self.col_of_row.iter().enumerate() {
            d[(row, col)] = 1.0;
        }
        d
    }
}

/// Elimination matrix `E` (n(n+1)/2 × n²) as a row → column index map.
#[derive(Debug, Clone)]
pub struct EliminationMatrix {
    n: usize,
    col_of_row: Vec<usize>,
}

impl EliminationMatrix {
    pub fn new(n: usize) -> Self {
        let map = VechIndexMap::new(n);
        let col_of_row = map.pairs().iter().map(|&(i, j)| j * n + i).collect();
        EliminationMatrix { n, col_of_row }
    }

    pub fn shape(&self) -> (usize, usize) {
        (vech_len(self.n), self.n * self.n)
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.n * self.n);
        self.col_of_row.iter().map(|&c| v[c]).collect()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let (r, c) = self.shape();
        let mut e = DMatrix::zeros(r, c);
        for (row, &col) in self.col_of_row.iter().enumerate() {
            e[(row, col)] = 1.0;
        }
        e
    }
}

/// `(Ũᵀ ⊗ Iₙ) D` restricted to a list of Vech columns, never materialized.
#[derive(Debug, Clone)]
pub struct KronDesign {
    n: usize,
    horizon: usize,
    /// Column-major n×T potentials, so entry `(i, t)` sits at `t·n + i`,
    /// the same offset as the matching row of `X`.
    u: Vec<f64>,
    pairs: Vec<(usize, usize)>,
}

impl KronDesign {
    fn new(u: &DMatrix<f64>, pairs: Vec<(usize, usize)>) -> Self {
        KronDesign {
            n: u.nrows(),
            horizon: u.ncols(),
            u: u.as_slice().to_vec(),
            pairs,
        }
    }

    #[inline]
    fn col_dot(&self, k: usize, r: &[f64]) -> f64 {
        let (i, j) = self.pairs[k];
        let n = self.n;
        let mut s = 0.0;
        if i == j {
            for t in 0..self.horizon {
                let o = t * n;
                s += self.u[o + i] * r[o + i];
            }
        } else {
            for t in 0..self.horizon {
                let o = t * n;
                s += self.u[o + j] * r[o + i] + self.u[o + i] * r[o + j];
            }
        }
        s
    }

    #[inline]
    fn col_axpy(&self, k: usize, a: f64, r: &mut [f64]) {
        let (i, j) = self.pairs[k];
        let n = self.n;
        if i == j {
            for t in 0..self.horizon {
                let o = t * n;
                r[o + i] += a * self.u[o + i];
            }
        } else {
            for t in 0..self.horizon {
                let o = t * n;
                r[o + i] += a * self.u[o + j];
                r[o + j] += a * self.u[o + i];
            }
        }
    }

    fn col_norm_sq(&self, k: usize) -> f64 {
        let (i, j) = self.pairs[k];
        let n = self.n;
        (0..self.horizon)
            .map(|t| {
                let o = t * n;
                if i == j {
                    self.u[o + i].powi(2)
                } else {
                    self.u[o + i].powi(2) + self.u[o + j].powi(2)
                }
            })
            .sum()
    }
}

/// Design matrix storage: materialized, or applied from its Kronecker
/// structure.
#[derive(Debug, Clone)]
pub enum DesignMatrix {
    Dense(DMatrix<f64>),
    Kron(KronDesign),
}

impl DesignMatrix {
    pub fn nrows(&self) -> usize {
        match self {
            DesignMatrix::Dense(m) => m.nrows(),
            DesignMatrix::Kron(k) => k.n * k.horizon,
        }
    }

    pub fn ncols(&self) -> usize {
        match self {
            DesignMatrix::Dense(m) => m.ncols(),
            DesignMatrix::Kron(k) => k.pairs.len(),
        }
    }

    pub fn is_dense(&self) -> bool {
        matches!(self, DesignMatrix::Dense(_))
    }

    /// `x_kᵀ r`.
    #[inline]
    pub fn col_dot(&self, k: usize, r: &[f64]) -> f64 {
        match self {
            DesignMatrix::Dense(m) => {
                let c = &m.as_slice()[k * m.nrows()..(k + 1) * m.nrows()];
                c.iter().zip(r).map(|(a, b)| a * b).sum()
            }
            DesignMatrix::Kron(kd) => kd.col_dot(k, r),
        }
    }

    /// `r += a · x_k`.
    #[inline]
    pub fn col_axpy(&self, k: usize, a: f64, r: &mut [f64]) {
        match self {
            DesignMatrix::Dense(m) => {
                let c = &m.as_slice()[k * m.nrows()..(k + 1) * m.nrows()];
                for (ri, ci) in r.iter_mut().zip(c) {
                    *ri += a * ci;
                }
            }
            DesignMatrix::Kron(kd) => kd.col_axpy(k, a, r),
        }
    }

    pub fn col_norm_sq(&self, k: usize) -> f64 {
        match self {
            DesignMatrix::Dense(m) => m.column(k).norm_squared(),
            DesignMatrix::Kron(kd) => kd.col_norm_sq(k),
        }
    }

    pub fn matvec(&self, v: &[f64]) -> DVector<f64> {
        assert_eq!(v.len(), self.ncols());
        match self {
            DesignMatrix::Dense(m) => m * DVector::from_column_slice(v),
            DesignMatrix::Kron(_) => {
                let mut out = vec![0.0; self.nrows()];
                for (k, &a) in v.iter().enumerate() {
                    if a != 0.0 {
                        self.col_axpy(k, a, &mut out);
                    }
                }
                DVector::from_vec(out)
            }
        }
    }

    pub fn rmatvec(&self, r: &[f64]) -> DVector<f64> {
        assert_eq!(r.len(), self.nrows());
        match self {
            DesignMatrix::Dense(m) => m.tr_mul(&DVector::from_column_slice(r)),
            DesignMatrix::Kron(_) => {
                DVector::from_iterator(self.ncols(), (0..self.ncols()).map(|k| self.col_dot(k, r)))
            }
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        match self {
            DesignMatrix::Dense(m) => m.clone(),
            DesignMatrix::Kron(kd) => {
                let mut m = DMatrix::zeros(self.nrows(), self.ncols());
                for k in 0..kd.pairs.len() {
                    let mut col = vec![0.0; self.nrows()];
                    kd.col_axpy(k, 1.0, &mut col);
                    m.set_column(k, &DVector::from_vec(col));
                }
                m
            }
        }
    }

    fn select_columns(&self, cols: &[usize]) -> DesignMatrix {
        match self {
            DesignMatrix::Dense(m) => DesignMatrix::Dense(m.select_columns(cols)),
            DesignMatrix::Kron(kd) => DesignMatrix::Kron(KronDesign {
                n: kd.n,
                horizon: kd.horizon,
                u: kd.u.clone(),
                pairs: cols.iter().map(|&c| kd.pairs[c]).collect(),
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DesignMode {
    /// Dense when `nT · p` is at most [`DENSE_DESIGN_MAX_ENTRIES`].
    #[default]
    Auto,
    Dense,
    Operator,
}

/// Regression objects `X`, `y`, `β₀` plus the Vech bookkeeping needed to map
/// coefficients back to node pairs.
#[derive(Debug, Clone)]
pub struct DesignSystem {
    pub x: DesignMatrix,
    pub y: DVector<f64>,
    pub beta0: DVector<f64>,
    index_map: VechIndexMap,
    /// Vech position of each column when the system is support-reduced.
    support: Option<Vec<usize>>,
    horizon: usize,
}

pub fn build_design(ms: &MeasurementSet, l0: &Laplacian) -> Result<DesignSystem> {
    build_design_with(ms, l0, DesignMode::Auto)
}

pub fn build_design_with(ms: &MeasurementSet, l0: &Laplacian, mode: DesignMode) -> Result<DesignSystem> {
    let n = ms.nodes();
    if l0.dim() != n {
        return Err(Error::dim("reference Laplacian order", n, l0.dim()));
    }
    if ms.f_noisy.shape() != ms.u_noisy.shape() {
        return Err(Error::dim("injection columns", ms.u_noisy.ncols(), ms.f_noisy.ncols()));
    }
    let horizon = ms.horizon();
    let index_map = VechIndexMap::new(n);
    let p = index_map.len();
    let dense = match mode {
        DesignMode::Dense => true,
        DesignMode::Operator => false,
        DesignMode::Auto => n * horizon * p <= DENSE_DESIGN_MAX_ENTRIES,
    };
    let op = KronDesign::new(&ms.u_noisy, index_map.pairs().to_vec());
    let x = if dense {
        DesignMatrix::Dense(DesignMatrix::Kron(op).to_dense())
    } else {
        DesignMatrix::Kron(op)
    };
    Ok(DesignSystem {
        x,
        y: vec_of(&ms.f_noisy),
        beta0: vech_sym(l0.as_sym()),
        index_map,
        support: None,
        horizon,
    })
}

/// Keeps only the columns at Vech positions where `L₀` is nonzero: every
/// edge and every diagonal entry, `m + n` columns in total.
pub fn support_reduce(ds: &DesignSystem, l0: &Laplacian) -> Result<DesignSystem> {
    if ds.is_reduced() {
        return Err(Error::InvalidArgument("design system is already reduced".into()));
    }
    let n = ds.nodes();
    if l0.dim() != n {
        return Err(Error::dim("reference Laplacian order", n, l0.dim()));
    }
    let mut support: Vec<usize> = l0
        .as_sym()
        .lower_nonzeros()
        .into_iter()
        .map(|(i, j, _)| ds.index_map.index(i, j))
        .collect();
    // Isolated nodes have a zero diagonal but still belong to the support.
    for i in 0..n {
        support.push(ds.index_map.index(i, i));
    }
    support.sort_unstable();
    support.dedup();
    Ok(DesignSystem {
        x: ds.x.select_columns(&support),
        y: ds.y.clone(),
        beta0: DVector::from_iterator(support.len(), support.iter().map(|&k| ds.beta0[k])),
        index_map: ds.index_map.clone(),
        support: Some(support),
        horizon: ds.horizon,
    })
}

impl DesignSystem {
    pub fn nodes(&self) -> usize {
        self.index_map.n()
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn nrows(&self) -> usize {
        self.x.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.x.ncols()
    }

    pub fn index_map(&self) -> &VechIndexMap {
        &self.index_map
    }

    pub fn is_reduced(&self) -> bool {
        self.support.is_some()
    }

    pub fn support(&self) -> Option<&[usize]> {
        self.support.as_deref()
    }

    /// Vech position of design column `k`.
    pub fn vech_index(&self, k: usize) -> usize {
        match &self.support {
            Some(s) => s[k],
            None => k,
        }
    }

    /// Node pair `(i, j)`, `i ≥ j`, of design column `k`.
    pub fn column_pair(&self, k: usize) -> (usize, usize) {
        self.index_map.pair(self.vech_index(k))
    }

    /// `y − X β₀`.
    pub fn base_residual(&self) -> DVector<f64> {
        &self.y - self.x.matvec(self.beta0.as_slice())
    }

    /// Restricts a full-length Vech vector to the design columns.
    pub fn restrict(&self, full: &DVector<f64>) -> DVector<f64> {
        match &self.support {
            Some(s) => DVector::from_iterator(s.len(), s.iter().map(|&k| full[k])),
            None => full.clone(),
        }
    }

    /// Pads a column-space vector back to full Vech length with zeros.
    pub fn expand(&self, beta: &DVector<f64>) -> DVector<f64> {
        match &self.support {
            Some(s) => {
                let mut full = DVector::zeros(self.index_map.len());
                for (&k, &v) in s.iter().zip(beta.iter()) {
                    full[k] = v;
                }
                full
            }
            None => beta.clone(),
        }
    }

    /// Same system with every column outside `keep` (Vech positions) zeroed.
    /// Only meaningful for unreduced systems; used to check reduction.
    pub fn with_columns_zeroed_except(&self, keep: &[usize]) -> DesignSystem {
        let mut dense = self.x.to_dense();
        let keep: std::collections::BTreeSet<usize> = keep.iter().copied().collect();
        for k in 0..dense.ncols() {
            if !keep.contains(&self.vech_index(k)) {
                dense.column_mut(k).fill(0.0);
            }
        }
        DesignSystem {
            x: DesignMatrix::Dense(dense),
            ..self.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Edge, Network};
    use crate::simulate::simulate;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_symmetric(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
        let a = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        &a + a.transpose()
    }

    /// Vech by direct double loop, independent of `VechIndexMap`.
    fn vech_oracle(m: &DMatrix<f64>) -> Vec<f64> {
        let n = m.nrows();
        let mut out = Vec::new();
        for j in 0..n {
            for i in j..n {
                out.push(m[(i, j)]);
            }
        }
        out
    }

    #[test]
    fn index_map_round_trips() {
        for n in 1..=15 {
            let map = VechIndexMap::new(n);
            assert_eq!(map.len(), vech_len(n));
            for k in 0..map.len() {
                let (i, j) = map.pair(k);
                assert!(i >= j);
                assert_eq!(map.index(i, j), k);
                assert_eq!(map.index(j, i), k);
            }
        }
    }

    #[test]
    fn small_duplication_matrices() {
        assert_eq!(DuplicationMatrix::new(1).to_dense(), DMatrix::from_element(1, 1, 1.0));
        let d = DuplicationMatrix::new(2);
        assert_eq!(d.apply(&[1.0, 2.0, 3.0]), vec![1.0, 2.0, 2.0, 3.0]);
        assert_eq!(d.shape(), (4, 3));
        assert_eq!(DuplicationMatrix::new(8).shape(), (64, 36));
        let dd = DuplicationMatrix::new(5).to_dense();
        for r in 0..dd.nrows() {
            assert_eq!(dd.row(r).sum(), 1.0);
        }
    }

    #[test]
    fn elimination_inverts_duplication() {
        let e = EliminationMatrix::new(2).to_dense();
        let d = DuplicationMatrix::new(2).to_dense();
        assert_eq!(e * d, DMatrix::identity(3, 3));
        let e12 = EliminationMatrix::new(12).to_dense();
        let d12 = DuplicationMatrix::new(12).to_dense();
        assert_eq!(e12 * d12, DMatrix::identity(78, 78));
    }

    #[test]
    fn elimination_picks_lower_triangle() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let m = random_symmetric(&mut rng, 5);
        let got = EliminationMatrix::new(5).apply(vec_of(&m).as_slice());
        assert_eq!(got, vech_oracle(&m));
        assert_eq!(vech_of(&m).as_slice(), vech_oracle(&m).as_slice());
    }

    #[test]
    fn unvech_round_trips() {
        assert_eq!(unvech(&[0.0; 6], 3).unwrap(), DMatrix::zeros(3, 3));
        let net = Network::new(3, vec![Edge::new(0, 1, 2.0), Edge::new(2, 1, 0.5)]).unwrap();
        let l0 = net.laplacian();
        let back = unvech(vech_sym(l0.as_sym()).as_slice(), 3).unwrap();
        assert_eq!(back, l0.to_dense());
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let v: Vec<f64> = (0..21).map(|_| rng.random()).collect();
        assert_eq!(vech_of(&unvech(&v, 6).unwrap()).as_slice(), &v[..]);
        assert!(unvech(&v, 5).is_err());
    }

    fn small_system(mode: DesignMode, noise: f64) -> (Network, MeasurementSet, DesignSystem) {
        let net = Network::new(
            4,
            vec![Edge::new(0, 1, 1.0), Edge::new(1, 2, 2.0), Edge::new(2, 3, 0.5), Edge::new(3, 0, 1.5)],
        )
        .unwrap();
        let l = net.laplacian();
        let ms = simulate(&l, 6, noise, 4).unwrap();
        let ds = build_design_with(&ms, &l, mode).unwrap();
        (net, ms, ds)
    }

    #[test]
    fn design_matches_explicit_kronecker() {
        for mode in [DesignMode::Dense, DesignMode::Operator] {
            let (_, ms, ds) = small_system(mode, 0.1);
            let explicit =
                ms.u_noisy.transpose().kronecker(&DMatrix::<f64>::identity(4, 4)) * DuplicationMatrix::new(4).to_dense();
            assert!((ds.x.to_dense() - explicit).amax() < 1e-14);
            assert_eq!(ds.nrows(), 24);
            assert_eq!(ds.ncols(), 10);
        }
    }

    #[test]
    fn design_applies_symmetric_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for mode in [DesignMode::Dense, DesignMode::Operator] {
            let (_, ms, ds) = small_system(mode, 0.1);
            for _ in 0..20 {
                let m = random_symmetric(&mut rng, 4);
                let lhs = ds.x.matvec(vech_of(&m).as_slice());
                let rhs = vec_of(&(&m * &ms.u_noisy));
                assert!((lhs - rhs).amax() < 1e-10);
            }
        }
    }

    #[test]
    fn operator_and_dense_agree() {
        let (_, _, dense) = small_system(DesignMode::Dense, 0.1);
        let (_, _, op) = small_system(DesignMode::Operator, 0.1);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let v: Vec<f64> = (0..10).map(|_| rng.random_range(-1.0..1.0)).collect();
        let r: Vec<f64> = (0..24).map(|_| rng.random_range(-1.0..1.0)).collect();
        assert!((dense.x.matvec(&v) - op.x.matvec(&v)).amax() < 1e-12);
        assert!((dense.x.rmatvec(&r) - op.x.rmatvec(&r)).amax() < 1e-12);
        for k in 0..10 {
            assert!((dense.x.col_norm_sq(k) - op.x.col_norm_sq(k)).abs() < 1e-12);
        }
    }

    #[test]
    fn noiseless_model_is_consistent() {
        let (net, ms, ds) = small_system(DesignMode::Auto, 0.0);
        let l1 = net.laplacian();
        let pred = ds.x.matvec(vech_sym(l1.as_sym()).as_slice());
        assert!((pred - &ds.y).amax() < 1e-10);
        assert!(ds.base_residual().amax() < 1e-10);
        assert_eq!(ms.horizon(), ds.horizon());
    }

    #[test]
    fn reduction_keeps_edges_and_diagonals() {
        let (net, _, ds) = small_system(DesignMode::Auto, 0.1);
        let l0 = net.laplacian();
        let red = support_reduce(&ds, &l0).unwrap();
        assert_eq!(red.ncols(), net.edge_count() + net.node_count());
        assert!(red.beta0.iter().all(|&b| b != 0.0));
        assert!(support_reduce(&red, &l0).is_err());
        for k in 0..red.ncols() {
            let (i, j) = red.column_pair(k);
            assert!(i == j || net.contains(crate::graph::NodePair::new(i, j)));
        }
        let full = ds.x.to_dense();
        let sub = red.x.to_dense();
        for (k, &v) in red.support().unwrap().iter().enumerate() {
            assert_eq!(sub.column(k), full.column(v));
        }
    }

    #[test]
    fn edgeless_reference_reduces_to_diagonals() {
        let net = Network::new(5, vec![]).unwrap();
        let l0 = net.laplacian();
        let ms = simulate(&l0, 3, 0.1, 0).unwrap();
        let ds = build_design(&ms, &l0).unwrap();
        assert_eq!(support_reduce(&ds, &l0).unwrap().ncols(), 5);
    }

    #[test]
    fn design_dimension_mismatch() {
        let (_, ms, _) = small_system(DesignMode::Auto, 0.1);
        let other = Network::new(3, vec![]).unwrap().laplacian();
        assert!(build_design(&ms, &other).is_err());
    }

    #[test]
    fn expand_and_restrict_are_inverse_on_support() {
        let (net, _, ds) = small_system(DesignMode::Auto, 0.1);
        let red = support_reduce(&ds, &net.laplacian()).unwrap();
        let beta = DVector::from_iterator(red.ncols(), (0..red.ncols()).map(|k| k as f64 + 1.0));
        assert_eq!(red.restrict(&red.expand(&beta)), beta);
    }
}
