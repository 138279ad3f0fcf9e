//! Block matrices, Hermitian absolute values, block comparison matrices and
//! membership tests for the block matrix classes Z, Ẑ, D, M and H.
//!
//! A [`BlockMatrix`] is an `m × m` grid of dense `k × k` complex blocks stored
//! contiguously as one `km × km` matrix. Block indices are 0-based.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type Dense = DMatrix<C64>;

/// Relative tolerance for accepting a block as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Relative threshold used by the class tests when calling [`is_positive_definite`].
pub const PD_TOL: f64 = 1e-12;
/// Largest block dimension for which grid search is attempted.
pub const GRID_SEARCH_MAX_M: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct BlockMatrix {
    m: usize,
    k: usize,
    data: Dense,
}

impl BlockMatrix {
    pub fn zeros(m: usize, k: usize) -> Self {
        assert!(m >= 1 && k >= 1, "block matrix needs m, k >= 1");
        Self { m, k, data: Dense::zeros(m * k, m * k) }
    }

    pub fn identity(m: usize, k: usize) -> Self {
        assert!(m >= 1 && k >= 1, "block matrix needs m, k >= 1");
        Self { m, k, data: Dense::identity(m * k, m * k) }
    }

    /// Wraps a dense `km × km` matrix, partitioning rows and columns into
    /// contiguous groups of `k`.
    pub fn from_dense(data: Dense, m: usize, k: usize) -> Result<Self> {
        if m == 0 || k == 0 {
            return Err(Error::DimensionMismatch(format!("m={m}, k={k} must both be >= 1")));
        }
        if data.nrows() != m * k || data.ncols() != m * k {
            return Err(Error::DimensionMismatch(format!(
                "expected {0}x{0} for m={m}, k={k}, got {1}x{2}",
                m * k,
                data.nrows(),
                data.ncols()
            )));
        }
        Ok(Self { m, k, data })
    }

    /// Builds a real matrix from row-major entries.
    pub fn from_real_rows(m: usize, k: usize, rows: &[f64]) -> Result<Self> {
        let n = m * k;
        if rows.len() != n * n {
            return Err(Error::DimensionMismatch(format!(
                "expected {} entries, got {}",
                n * n,
                rows.len()
            )));
        }
        let data = Dense::from_fn(n, n, |i, j| C64::new(rows[i * n + j], 0.0));
        Self::from_dense(data, m, k)
    }

    /// Assembles a block matrix from a block-valued closure; `None` means a zero block.
    pub fn from_blocks<F>(m: usize, k: usize, mut f: F) -> Self
    where
        F: FnMut(usize, usize) -> Option<Dense>,
    {
        let mut out = Self::zeros(m, k);
        for i in 0..m {
            for j in 0..m {
                if let Some(b) = f(i, j) {
                    out.set_block(i, j, &b);
                }
            }
        }
        out
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Total scalar dimension `km`.
    pub fn dim(&self) -> usize {
        self.m * self.k
    }

    pub fn as_dense(&self) -> &Dense {
        &self.data
    }

    pub fn into_dense(self) -> Dense {
        self.data
    }

    pub fn block(&self, i: usize, j: usize) -> Dense {
        let k = self.k;
        self.data.view((i * k, j * k), (k, k)).into_owned()
    }

    pub fn set_block(&mut self, i: usize, j: usize, b: &Dense) {
        let k = self.k;
        assert_eq!(b.shape(), (k, k), "block must be {k}x{k}");
        self.data.view_mut((i * k, j * k), (k, k)).copy_from(b);
    }

    pub fn zero_block(&mut self, i: usize, j: usize) {
        let k = self.k;
        self.data.view_mut((i * k, j * k), (k, k)).fill(C64::new(0.0, 0.0));
    }

    pub fn block_is_zero(&self, i: usize, j: usize) -> bool {
        let k = self.k;
        self.data.view((i * k, j * k), (k, k)).iter().all(|z| *z == C64::new(0.0, 0.0))
    }

    /// Keeps only the blocks selected by `keep`, zeroing the rest.
    pub fn masked<F: Fn(usize, usize) -> bool>(&self, keep: F) -> Self {
        let mut out = self.clone();
        for i in 0..self.m {
            for j in 0..self.m {
                if !keep(i, j) {
                    out.zero_block(i, j);
                }
            }
        }
        out
    }

    pub fn block_diagonal(&self) -> Self {
        self.masked(|i, j| i == j)
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.m == other.m && self.k == other.k
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_shape(other)?;
        Ok(Self { m: self.m, k: self.k, data: &self.data - &other.data })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_shape(other)?;
        Ok(Self { m: self.m, k: self.k, data: &self.data + &other.data })
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { m: self.m, k: self.k, data: &self.data * C64::new(s, 0.0) }
    }

    pub fn matvec(&self, x: &BlockVector) -> Result<BlockVector> {
        if x.m != self.m || x.k != self.k {
            return Err(Error::DimensionMismatch(format!(
                "matrix ({}x{} blocks of {}) vs vector ({} segments of {})",
                self.m, self.m, self.k, x.m, x.k
            )));
        }
        Ok(BlockVector { m: self.m, k: self.k, data: &self.data * &x.data })
    }

    /// Symmetric block permutation: block `(i, j)` of the result is block
    /// `(perm_inv(i), perm_inv(j))` of `self`, i.e. old block `i` moves to `perm[i]`.
    pub fn permute_blocks(&self, perm: &[usize]) -> Self {
        let mut out = Self::zeros(self.m, self.k);
        for i in 0..self.m {
            for j in 0..self.m {
                out.set_block(perm[i], perm[j], &self.block(i, j));
            }
        }
        out
    }

    /// Regroups the same scalar matrix with a block size that is a multiple
    /// or divisor of the current one.
    pub fn reblock(&self, k: usize) -> Result<Self> {
        let n = self.dim();
        if k == 0 || n % k != 0 {
            return Err(Error::DimensionMismatch(format!("cannot reblock dimension {n} into k={k}")));
        }
        Self::from_dense(self.data.clone(), n / k, k)
    }

    fn check_shape(&self, other: &Self) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(Error::DimensionMismatch(format!(
                "block shapes ({}, {}) and ({}, {})",
                self.m, self.k, other.m, other.k
            )))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockVector {
    m: usize,
    k: usize,
    data: DVector<C64>,
}

impl BlockVector {
    pub fn zeros(m: usize, k: usize) -> Self {
        Self { m, k, data: DVector::zeros(m * k) }
    }

    pub fn ones(m: usize, k: usize) -> Self {
        Self { m, k, data: DVector::from_element(m * k, C64::new(1.0, 0.0)) }
    }

    pub fn from_dense(data: DVector<C64>, m: usize, k: usize) -> Result<Self> {
        if data.len() != m * k {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} does not match m={m}, k={k}",
                data.len()
            )));
        }
        Ok(Self { m, k, data })
    }

    pub fn from_real(values: &[f64], m: usize, k: usize) -> Result<Self> {
        Self::from_dense(DVector::from_iterator(values.len(), values.iter().map(|&v| C64::new(v, 0.0))), m, k)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_dense(&self) -> &DVector<C64> {
        &self.data
    }

    pub fn as_mut_dense(&mut self) -> &mut DVector<C64> {
        &mut self.data
    }

    pub fn into_dense(self) -> DVector<C64> {
        self.data
    }

    pub fn segment(&self, i: usize) -> DVector<C64> {
        self.data.rows(i * self.k, self.k).into_owned()
    }

    pub fn norm2(&self) -> f64 {
        self.data.norm()
    }

    pub fn dist2(&self, other: &Self) -> f64 {
        (&self.data - &other.data).norm()
    }
}

fn hermitian_defect(h: &Dense) -> f64 {
    let scale = h.norm();
    if scale == 0.0 {
        return 0.0;
    }
    (h - h.adjoint()).norm() / scale
}

fn check_hermitian(h: &Dense, row: usize, col: usize) -> Result<()> {
    if !h.is_square() {
        return Err(Error::DimensionMismatch(format!("block {}x{} is not square", h.nrows(), h.ncols())));
    }
    let defect = hermitian_defect(h);
    if defect > HERMITIAN_TOL {
        return Err(Error::NonHermitian { row, col, defect });
    }
    Ok(())
}

fn symmetrized(h: &Dense) -> Dense {
    (h + h.adjoint()) * C64::new(0.5, 0.0)
}

/// Eigenvalues (ascending) and eigenvectors of a Hermitian matrix.
pub fn hermitian_eigen(h: &Dense) -> Result<(Vec<f64>, Dense)> {
    check_hermitian(h, 0, 0)?;
    let eig = SymmetricEigen::new(symmetrized(h));
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let n = h.nrows();
    let vectors = Dense::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok((values, vectors))
}

/// Ascending eigenvalues of a Hermitian matrix.
pub fn hermitian_eigenvalues(h: &Dense) -> Result<Vec<f64>> {
    hermitian_eigen(h).map(|(values, _)| values)
}

/// `|H| = sqrt(H H)` computed as `V |Λ| Vᴴ`.
pub fn hermitian_abs(h: &Dense) -> Result<Dense> {
    check_hermitian(h, 0, 0)?;
    let eig = SymmetricEigen::new(symmetrized(h));
    let v = &eig.eigenvectors;
    let abs_diag = Dense::from_diagonal(&eig.eigenvalues.map(|l| C64::new(l.abs(), 0.0)));
    let out = v * abs_diag * v.adjoint();
    Ok(symmetrized(&out))
}

/// True iff `λ_min(H) > tol · max(1, λ_max(H))`.
pub fn is_positive_definite(h: &Dense, tol: f64) -> Result<bool> {
    let ev = hermitian_eigenvalues(h)?;
    let (lo, hi) = (ev[0], ev[ev.len() - 1]);
    Ok(lo > tol * hi.max(1.0))
}

fn is_negative_semidefinite(h: &Dense) -> Result<bool> {
    let ev = hermitian_eigenvalues(h)?;
    let hi = ev[ev.len() - 1];
    let scale = ev.iter().fold(1.0f64, |acc, l| acc.max(l.abs()));
    Ok(hi <= PD_TOL * scale)
}

fn all_blocks_hermitian(a: &BlockMatrix) -> Result<()> {
    for i in 0..a.m() {
        for j in 0..a.m() {
            check_hermitian(&a.block(i, j), i, j)?;
        }
    }
    Ok(())
}

fn diagonal_pd(a: &BlockMatrix) -> std::result::Result<(), String> {
    for i in 0..a.m() {
        match is_positive_definite(&a.block(i, i), PD_TOL) {
            Ok(true) => {}
            Ok(false) => return Err(format!("diagonal block {i} is not positive definite")),
            Err(e) => return Err(e.to_string()),
        }
    }
    Ok(())
}

/// Membership in D: every block Hermitian, diagonal blocks positive definite.
pub fn check_in_d(a: &BlockMatrix) -> Result<()> {
    all_blocks_hermitian(a).map_err(|e| Error::NotInD(e.to_string()))?;
    diagonal_pd(a).map_err(Error::NotInD)
}

/// Membership in Z: every block Hermitian, off-diagonal blocks negative semidefinite.
pub fn is_in_z(a: &BlockMatrix) -> bool {
    if all_blocks_hermitian(a).is_err() {
        return false;
    }
    (0..a.m()).all(|i| {
        (0..a.m()).filter(|&j| j != i).all(|j| {
            a.block_is_zero(i, j) || is_negative_semidefinite(&a.block(i, j)).unwrap_or(false)
        })
    })
}

/// Membership in Ẑ: Z with positive definite diagonal blocks.
pub fn check_in_zhat(a: &BlockMatrix) -> Result<()> {
    if !is_in_z(a) {
        return Err(Error::NotInZhat("matrix is not in Z (off-diagonal blocks must be Hermitian and <= 0)".into()));
    }
    diagonal_pd(a).map_err(Error::NotInZhat)
}

/// Block comparison matrix: `|A_ii|` on the diagonal, `-|A_ij|` elsewhere.
pub fn comparison_matrix(a: &BlockMatrix) -> Result<BlockMatrix> {
    check_in_d(a)?;
    let mut out = BlockMatrix::zeros(a.m(), a.k());
    for i in 0..a.m() {
        for j in 0..a.m() {
            if i != j && a.block_is_zero(i, j) {
                continue;
            }
            let abs = hermitian_abs(&a.block(i, j))?;
            let b = if i == j { abs } else { -abs };
            out.set_block(i, j, &b);
        }
    }
    Ok(out)
}

/// Σ_j u_j A_ij for block row `i`.
fn weighted_row_sum(a: &BlockMatrix, u: &[f64], i: usize) -> Dense {
    let k = a.k();
    let mut acc = Dense::zeros(k, k);
    for (j, &uj) in u.iter().enumerate() {
        acc += a.block(i, j) * C64::new(uj, 0.0);
    }
    acc
}

/// Smallest over block rows of `λ_min(Σ_j u_j A_ij)`, normalized by the row scale.
fn certificate_margin(a: &BlockMatrix, u: &[f64]) -> f64 {
    (0..a.m())
        .map(|i| {
            let row = weighted_row_sum(a, u, i);
            match hermitian_eigenvalues(&row) {
                Ok(ev) => ev[0] / ev[ev.len() - 1].abs().max(1e-300),
                Err(_) => f64::NEG_INFINITY,
            }
        })
        .fold(f64::INFINITY, f64::min)
}

fn check_positive(u: &[f64]) -> Result<()> {
    for (index, &value) in u.iter().enumerate() {
        if !(value > 0.0) || !value.is_finite() {
            return Err(Error::NotPositiveVector { index, value });
        }
    }
    Ok(())
}

/// Checks the generalized M-matrix condition `Σ_j u_j A_ij ≻ 0` for every block row.
pub fn verify_m_certificate(a: &BlockMatrix, u: &[f64]) -> Result<bool> {
    if u.len() != a.m() {
        return Err(Error::DimensionMismatch(format!("certificate has {} entries, m = {}", u.len(), a.m())));
    }
    check_positive(u)?;
    check_in_zhat(a)?;
    for i in 0..a.m() {
        if !is_positive_definite(&weighted_row_sum(a, u, i), PD_TOL)? {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CertificateStrategy {
    /// Solve the scalar M-matrix system built from block eigenvalue bounds.
    ScalarReduction,
    /// Exhaustive logarithmic grid over `u` (only for `m <= 8`).
    GridSearch,
    /// Supergradient ascent of the smallest row-sum eigenvalue over the simplex.
    ConcaveAscent,
    /// Try the strategies above in order.
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CertificateMethod {
    ScalarReduction,
    GridSearch,
    ConcaveAscent,
    UserSupplied,
}

/// Searches for a positive `u` certifying `a ∈ M`. The search is sufficient
/// only: `None` means "unknown", not "not an M-matrix".
pub fn find_m_certificate(a: &BlockMatrix, strategy: CertificateStrategy) -> Option<Vec<f64>> {
    find_m_certificate_with_method(a, strategy).map(|(u, _)| u)
}

pub fn find_m_certificate_with_method(
    a: &BlockMatrix,
    strategy: CertificateStrategy,
) -> Option<(Vec<f64>, CertificateMethod)> {
    if check_in_zhat(a).is_err() {
        return None;
    }
    let accept = |u: Vec<f64>, method| match verify_m_certificate(a, &u) {
        Ok(true) => Some((u, method)),
        _ => None,
    };
    match strategy {
        CertificateStrategy::ScalarReduction => {
            scalar_reduction(a).and_then(|u| accept(u, CertificateMethod::ScalarReduction))
        }
        CertificateStrategy::GridSearch => grid_search(a).and_then(|u| accept(u, CertificateMethod::GridSearch)),
        CertificateStrategy::ConcaveAscent => {
            concave_ascent(a).and_then(|u| accept(u, CertificateMethod::ConcaveAscent))
        }
        CertificateStrategy::Auto => [
            CertificateStrategy::ScalarReduction,
            CertificateStrategy::GridSearch,
            CertificateStrategy::ConcaveAscent,
        ]
        .into_iter()
        .find_map(|s| find_m_certificate_with_method(a, s)),
    }
}

fn scalar_reduction(a: &BlockMatrix) -> Option<Vec<f64>> {
    let m = a.m();
    let mut s = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            let ev = hermitian_eigenvalues(&hermitian_abs(&a.block(i, j)).ok()?).ok()?;
            s[(i, j)] = if i == j { ev[0] } else { -ev[ev.len() - 1] };
        }
    }
    let u = s.lu().solve(&DVector::from_element(m, 1.0))?;
    if u.iter().all(|&x| x > 0.0 && x.is_finite()) {
        Some(u.iter().copied().collect())
    } else {
        None
    }
}

fn grid_search(a: &BlockMatrix) -> Option<Vec<f64>> {
    let m = a.m();
    if m > GRID_SEARCH_MAX_M {
        return None;
    }
    if m == 1 {
        return Some(vec![1.0]);
    }
    // u_0 = 1 by scale invariance; the remaining m-1 coordinates span [1e-2, 1e2].
    let free = m - 1;
    let points = ((50_000f64).powf(1.0 / free as f64).floor() as usize).clamp(3, 81);
    let grid: Vec<f64> = (0..points)
        .map(|t| 10f64.powf(-2.0 + 4.0 * t as f64 / (points - 1) as f64))
        .collect();
    let mut idx = vec![0usize; free];
    let mut u = vec![1.0; m];
    loop {
        for (c, &g) in idx.iter().enumerate() {
            u[c + 1] = grid[g];
        }
        if certificate_margin(a, &u) > PD_TOL {
            return Some(u);
        }
        // odometer increment
        let mut c = 0;
        loop {
            if c == free {
                return None;
            }
            idx[c] += 1;
            if idx[c] < points {
                break;
            }
            idx[c] = 0;
            c += 1;
        }
    }
}

/// Maximizes the concave function `u ↦ min_i λ_min(Σ_j u_j A_ij)` over the
/// probability simplex with exponentiated supergradient steps.
fn concave_ascent(a: &BlockMatrix) -> Option<Vec<f64>> {
    const MAX_STEPS: usize = 4000;
    let m = a.m();
    let mut u = vec![1.0 / m as f64; m];
    for step in 0..MAX_STEPS {
        let mut worst = (f64::INFINITY, 0usize, Dense::zeros(0, 0));
        for i in 0..m {
            let (ev, vecs) = hermitian_eigen(&weighted_row_sum(a, &u, i)).ok()?;
            if ev[0] < worst.0 {
                worst = (ev[0], i, vecs);
            }
        }
        let (lam, i, vecs) = worst;
        if lam > 0.0 && certificate_margin(a, &u) > PD_TOL {
            return Some(u);
        }
        let v = vecs.column(0);
        let grad: Vec<f64> = (0..m).map(|j| (v.adjoint() * a.block(i, j) * v)[(0, 0)].re).collect();
        let gmax = grad.iter().fold(0.0f64, |acc, g| acc.max(g.abs()));
        if gmax == 0.0 {
            return None;
        }
        let eta = 0.5 / ((step + 1) as f64).sqrt();
        for (uj, gj) in u.iter_mut().zip(&grad) {
            *uj *= (eta * gj / gmax).exp();
        }
        let total: f64 = u.iter().sum();
        u.iter_mut().for_each(|x| *x /= total);
    }
    None
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ClassReport {
    pub in_z: bool,
    pub in_zhat: bool,
    pub in_d: bool,
    /// Certificate that `A` itself is a generalized M-matrix.
    pub m_certificate: Option<Vec<f64>>,
    /// Certificate that `μ(A)` is a generalized M-matrix, i.e. `A ∈ H`.
    pub h_certificate: Option<Vec<f64>>,
    pub method: Option<CertificateMethod>,
}

impl ClassReport {
    pub fn is_certified_h(&self) -> bool {
        self.h_certificate.is_some()
    }
}

pub fn classify(a: &BlockMatrix) -> ClassReport {
    let in_z = is_in_z(a);
    let in_zhat = in_z && check_in_zhat(a).is_ok();
    let in_d = check_in_d(a).is_ok();

    let m_found = if in_zhat { find_m_certificate_with_method(a, CertificateStrategy::Auto) } else { None };
    let h_found = if in_d {
        comparison_matrix(a)
            .ok()
            .and_then(|mu| find_m_certificate_with_method(&mu, CertificateStrategy::Auto))
    } else {
        None
    };
    let method = h_found.as_ref().or(m_found.as_ref()).map(|(_, method)| *method);
    ClassReport {
        in_z,
        in_zhat,
        in_d,
        m_certificate: m_found.map(|(u, _)| u),
        h_certificate: h_found.map(|(u, _)| u),
        method,
    }
}

/// Classification with a caller-provided scaling vector for `μ(A)`.
pub fn classify_with_certificate(a: &BlockMatrix, u: &[f64]) -> Result<ClassReport> {
    let mut report = classify(a);
    let mu = comparison_matrix(a)?;
    if verify_m_certificate(&mu, u)? {
        report.h_certificate = Some(u.to_vec());
        report.method = Some(CertificateMethod::UserSupplied);
    }
    Ok(report)
}

pub(crate) fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

pub(crate) fn dense_from_real(n: usize, rows: &[f64]) -> Dense {
    Dense::from_fn(n, n, |i, j| real(rows[i * n + j]))
}
