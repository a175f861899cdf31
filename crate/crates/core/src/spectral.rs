//! Partial trace, block decomposition and a cyclic Jacobi eigensolver for the
//! truncated (bitstring x Fock) density matrices.
//!
//! Every accelerated state built in this crate is exactly block-sparse: the
//! channel only couples Fock level `n` to `n + 1`, so the connected components
//! of the sparsity graph have at most `2^{N-1} + 1` members. Diagonalising
//! those components independently is what makes Fock cutoffs in the hundreds
//! cheap even for five qubits.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::{DenseMatrix, SparseSymMatrix};

/// Eigenvalues in `(-EPS_PSD, 0)` are clamped to zero, below that they are an error.
pub const EPS_PSD: f64 = 1e-12;

/// Trace deficit above which a truncated matrix is flagged.
pub const DEFAULT_TRACE_TOLERANCE: f64 = 1e-8;

/// Jacobi stops once the off-diagonal Frobenius norm drops below this
/// fraction of the full Frobenius norm.
pub const JACOBI_OFF_NORM_TOL: f64 = 1e-14;
pub const JACOBI_MAX_SWEEPS: usize = 100;

/// Default sparsity threshold: only exact zeros are treated as structural.
pub const DEFAULT_EPS_SPARSE: f64 = 0.0;

const PARALLEL_BLOCK_THRESHOLD: usize = 256;

/// One basis vector `|bits> (x) |fock>`; `bits` encodes the inertial qubits
/// with qubit 0 as the most significant bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasisLabel {
    pub bits: usize,
    pub fock: usize,
}

impl BasisLabel {
    /// Renders as e.g. `|01,3>` for two inertial qubits.
    pub fn render(&self, inertial_qubits: usize) -> String {
        if inertial_qubits == 0 {
            return format!("|{}>", self.fock);
        }
        format!(
            "|{:0width$b},{}>",
            self.bits,
            self.fock,
            width = inertial_qubits
        )
    }
}

/// Density matrix on `(inertial bitstring) x (Fock level 0..fock_dim)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedDensityMatrix {
    matrix: SparseSymMatrix,
    inertial_qubits: usize,
    fock_dim: usize,
    trace_deficit: f64,
    deficit_warning: bool,
}

impl TruncatedDensityMatrix {
    /// Wraps `matrix`, recording `1 - trace` and flagging it when it exceeds `tolerance`.
    pub fn new(
        matrix: SparseSymMatrix,
        inertial_qubits: usize,
        fock_dim: usize,
        tolerance: f64,
    ) -> Self {
        assert_eq!(
            matrix.dim(),
            (1usize << inertial_qubits) * fock_dim,
            "matrix dimension does not match basis"
        );
        let deficit = (1.0 - matrix.trace()).max(0.0);
        Self::with_deficit(matrix, inertial_qubits, fock_dim, deficit, deficit >= tolerance)
    }

    fn with_deficit(
        matrix: SparseSymMatrix,
        inertial_qubits: usize,
        fock_dim: usize,
        trace_deficit: f64,
        deficit_warning: bool,
    ) -> Self {
        Self {
            matrix,
            inertial_qubits,
            fock_dim,
            trace_deficit,
            deficit_warning,
        }
    }

    pub fn matrix(&self) -> &SparseSymMatrix {
        &self.matrix
    }

    pub fn inertial_qubits(&self) -> usize {
        self.inertial_qubits
    }

    pub fn fock_dim(&self) -> usize {
        self.fock_dim
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn trace_deficit(&self) -> f64 {
        self.trace_deficit
    }

    /// Set when the trace deficit reached the tolerance given at construction.
    pub fn deficit_warning(&self) -> bool {
        self.deficit_warning
    }

    #[inline]
    pub fn index(&self, bits: usize, fock: usize) -> usize {
        debug_assert!(bits < (1 << self.inertial_qubits) && fock < self.fock_dim);
        bits * self.fock_dim + fock
    }

    pub fn label(&self, index: usize) -> BasisLabel {
        BasisLabel {
            bits: index / self.fock_dim,
            fock: index % self.fock_dim,
        }
    }

    pub fn basis(&self) -> Vec<BasisLabel> {
        (0..self.dim()).map(|i| self.label(i)).collect()
    }

    /// `<bits_a, n_a| rho |bits_b, n_b>`; zero outside the truncated basis.
    pub fn entry(&self, row: (usize, usize), col: (usize, usize)) -> f64 {
        if row.1 >= self.fock_dim || col.1 >= self.fock_dim {
            return 0.0;
        }
        self.matrix
            .get(self.index(row.0, row.1), self.index(col.0, col.1))
    }

    pub fn to_dense(&self) -> DenseMatrix {
        self.matrix.to_dense()
    }
}

/// Traces out every inertial qubit, leaving the accelerated observer's
/// region-I Fock state. The trace deficit is carried over unchanged.
pub fn partial_trace_inertial(rho: &TruncatedDensityMatrix) -> TruncatedDensityMatrix {
    let fd = rho.fock_dim;
    let mut reduced = SparseSymMatrix::new(fd);
    for (i, j, v) in rho.matrix.upper_entries() {
        if i / fd == j / fd {
            reduced.add(i % fd, j % fd, v);
        }
    }
    TruncatedDensityMatrix::with_deficit(
        reduced,
        0,
        fd,
        rho.trace_deficit,
        rho.deficit_warning,
    )
}

/// Connected components of the off-diagonal sparsity graph, each with its
/// dense principal submatrix.
#[derive(Debug, Clone)]
pub struct BlockDecomposition {
    pub blocks: Vec<Vec<usize>>,
    pub submatrices: Vec<DenseMatrix>,
}

impl BlockDecomposition {
    /// Block sizes in decreasing order.
    pub fn sizes(&self) -> Vec<usize> {
        let mut s: Vec<usize> = self.blocks.iter().map(Vec::len).collect();
        s.sort_unstable_by(|a, b| b.cmp(a));
        s
    }
}

struct DisjointSet {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
    }
}

/// Splits `matrix` into blocks connected by entries with `|a_ij| > eps_sparse`.
///
/// Blocks are ordered by their smallest index and each block's indices are
/// ascending, so the decomposition is deterministic.
pub fn block_decompose(matrix: &SparseSymMatrix, eps_sparse: f64) -> BlockDecomposition {
    let n = matrix.dim();
    let mut sets = DisjointSet::new(n);
    for (i, j, v) in matrix.upper_entries() {
        if i != j && v.abs() > eps_sparse {
            sets.union(i, j);
        }
    }
    let mut block_of_root = vec![usize::MAX; n];
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    for i in 0..n {
        let root = sets.find(i);
        if block_of_root[root] == usize::MAX {
            block_of_root[root] = blocks.len();
            blocks.push(Vec::new());
        }
        blocks[block_of_root[root]].push(i);
    }
    let submatrices = blocks.iter().map(|b| matrix.submatrix(b)).collect();
    BlockDecomposition {
        blocks,
        submatrices,
    }
}

/// Cyclic Jacobi eigenvalues of a real symmetric matrix, unsorted.
pub fn jacobi_eigenvalues(matrix: &DenseMatrix) -> Result<Vec<f64>> {
    let n = matrix.dim();
    if n == 0 {
        return Ok(Vec::new());
    }
    if n == 1 {
        return Ok(vec![matrix.get(0, 0)]);
    }
    let mut a: Vec<f64> = (0..n * n).map(|k| matrix.get(k / n, k % n)).collect();
    let frob = a.iter().map(|v| v * v).sum::<f64>().sqrt();
    if frob == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let threshold = JACOBI_OFF_NORM_TOL * frob;
    let off_norm = |a: &[f64]| -> f64 {
        let mut s = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                s += 2.0 * a[p * n + q] * a[p * n + q];
            }
        }
        s.sqrt()
    };

    for _sweep in 0..JACOBI_MAX_SWEEPS {
        if off_norm(&a) <= threshold {
            return Ok((0..n).map(|i| a[i * n + i]).collect());
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                a[p * n + p] = app - t * apq;
                a[q * n + q] = aqq + t * apq;
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for r in 0..n {
                    if r == p || r == q {
                        continue;
                    }
                    let arp = a[r * n + p];
                    let arq = a[r * n + q];
                    let new_rp = c * arp - s * arq;
                    let new_rq = s * arp + c * arq;
                    a[r * n + p] = new_rp;
                    a[p * n + r] = new_rp;
                    a[r * n + q] = new_rq;
                    a[q * n + r] = new_rq;
                }
            }
        }
    }
    let off = off_norm(&a);
    if off <= threshold {
        return Ok((0..n).map(|i| a[i * n + i]).collect());
    }
    Err(Error::NoConvergence {
        sweeps: JACOBI_MAX_SWEEPS,
        off_norm: off,
    })
}

fn sort_descending(values: &mut [f64]) {
    values.sort_unstable_by(|a, b| b.total_cmp(a));
}

/// All eigenvalues of a dense symmetric matrix, sorted descending.
pub fn spectrum_dense(matrix: &DenseMatrix) -> Result<Vec<f64>> {
    let mut eigs = jacobi_eigenvalues(matrix)?;
    sort_descending(&mut eigs);
    Ok(eigs)
}

/// Eigenvalues of one diagonal block: singletons are read off directly.
///
/// With `rank_cut`, eigenvalues of a multi-element block with
/// `|v| <= dim * eps * ||B||_F` are set to zero, below Jacobi's resolution.
fn block_eigenvalues(sub: &DenseMatrix, rank_cut: bool) -> Result<Vec<f64>> {
    let n = sub.dim();
    if n == 1 {
        return Ok(vec![sub.get(0, 0)]);
    }
    let mut eigs = jacobi_eigenvalues(sub)?;
    if rank_cut {
        let frob = (0..n * n).map(|k| sub.get(k / n, k % n).powi(2)).sum::<f64>().sqrt();
        let floor = n as f64 * f64::EPSILON * frob;
        for v in eigs.iter_mut().filter(|v| v.abs() <= floor) {
            *v = 0.0;
        }
    }
    Ok(eigs)
}

fn blocked(matrix: &SparseSymMatrix, eps_sparse: f64, rank_cut: bool) -> Result<Vec<f64>> {
    let decomposition = block_decompose(matrix, eps_sparse);
    let solve = |sub: &DenseMatrix| block_eigenvalues(sub, rank_cut);
    let per_block: Vec<Vec<f64>> = if decomposition.submatrices.len() >= PARALLEL_BLOCK_THRESHOLD {
        decomposition.submatrices.par_iter().map(solve).collect::<Result<_>>()?
    } else {
        decomposition.submatrices.iter().map(solve).collect::<Result<_>>()?
    };
    let mut eigs: Vec<f64> = per_block.into_iter().flatten().collect();
    sort_descending(&mut eigs);
    Ok(eigs)
}

/// All eigenvalues of a sparse symmetric matrix via its block decomposition,
/// sorted descending.
pub fn spectrum_blocked(matrix: &SparseSymMatrix, eps_sparse: f64) -> Result<Vec<f64>> {
    blocked(matrix, eps_sparse, false)
}

/// Clamps tiny negative eigenvalues to zero and rejects anything below `-EPS_PSD`.
pub fn enforce_psd(mut eigs: Vec<f64>) -> Result<Vec<f64>> {
    for v in eigs.iter_mut() {
        if *v < -EPS_PSD || v.is_nan() {
            return Err(Error::PsdViolation { value: *v });
        }
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    Ok(eigs)
}

/// Eigenvalues of a density matrix, sorted descending, via block
/// decomposition with exact-zero sparsity. Round-off eigenvalues of
/// rank-deficient blocks are zeroed and PSD is enforced.
pub fn eigenvalues_sym(matrix: &SparseSymMatrix) -> Result<Vec<f64>> {
    enforce_psd(blocked(matrix, DEFAULT_EPS_SPARSE, true)?)
}
