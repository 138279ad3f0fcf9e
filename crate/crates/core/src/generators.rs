//! Test matrices: the explicit 6×6 example, the block tridiagonal family
//! arising from flux-split Euler discretizations, the 5-point elliptic
//! family with its two-way overlapping multisplitting, and random
//! generalized H-matrices for property checks.

use std::collections::BTreeSet;

use rand::Rng;

use crate::blockcore::{classify, dense_from_real, hermitian_eigenvalues, real, BlockMatrix, BlockVector, ClassReport, Dense, C64};
use crate::error::{Error, Result};
use crate::splitting::{
    gaor_from_parts, multisplit_from_index_sets, BlockWeights, IndexSetSplit, Multisplitting, Pair, TripleSplit,
};

#[rustfmt::skip]
const EXAMPLE_51: [f64; 36] = [
      3.0,  -2.0,   2.0,  -1.0,   1.0,  -1.0,
     -2.0,   3.0,  -1.0,   2.0,  -1.0,   1.0,
     40.0, -35.0, 100.0, -80.0, -50.0,  40.0,
    -35.0,  40.0, -80.0,  90.0,  40.0, -40.0,
      3.0,  -3.0,  -6.0,   4.0,  10.0,  -8.0,
     -3.0,   3.0,   4.0,  -5.0,  -8.0,   9.0,
];

/// The 6×6 system with `m = 3`, `k = 2` and its three-way multisplitting:
/// `M_1` keeps the block upper triangle, `M_2` the block lower triangle and
/// `M_3` only the block diagonal.
///
/// Weights: `(1/2, 1/6, 1/3)` on `M_1`, `(1/6, 1/3, 1/2)` on `M_2` and
/// `(1/3, 1/2, 1/6)` on `M_3`. This assignment yields `ρ(T) = 0.89868`.
pub fn example_5_1() -> (BlockMatrix, Multisplitting) {
    let a = BlockMatrix::from_real_rows(3, 2, &EXAMPLE_51).expect("static 6x6 matrix");
    let m1 = a.masked(|i, j| i <= j);
    let m2 = a.masked(|i, j| i >= j);
    let m3 = a.block_diagonal();
    let w = |v: [f64; 3]| BlockWeights::new(v.to_vec()).expect("nonnegative");
    let ms = Multisplitting::from_m(
        &a,
        vec![
            (m1, w([1.0 / 2.0, 1.0 / 6.0, 1.0 / 3.0])),
            (m2, w([1.0 / 6.0, 1.0 / 3.0, 1.0 / 2.0])),
            (m3, w([1.0 / 3.0, 1.0 / 2.0, 1.0 / 6.0])),
        ],
    )
    .expect("example multisplitting is valid");
    (a, ms)
}

/// Index sets and weights equivalent to [`example_5_1`].
pub fn example_5_1_index_sets() -> (Vec<IndexSetSplit>, Vec<BlockWeights>) {
    let qs = vec![
        IndexSetSplit::new(3, crate::splitting::strict_upper_pairs(3)).expect("valid pairs"),
        IndexSetSplit::new(3, crate::splitting::strict_lower_pairs(3)).expect("valid pairs"),
        IndexSetSplit::block_diagonal(),
    ];
    let (_, ms) = example_5_1();
    let ws = ms.parts().iter().map(|p| p.weights.clone()).collect();
    (qs, ws)
}

/// Parameters of the block tridiagonal Euler-equation family.
#[derive(Debug, Clone, PartialEq)]
pub struct EulerParams {
    /// Outer block-tridiagonal dimension.
    pub p: usize,
    /// Inner block-tridiagonal dimension of `T`.
    pub r_inner: usize,
    pub k: usize,
    pub a_plus: Dense,
    pub a_minus: Dense,
    pub b_plus: Dense,
    pub b_minus: Dense,
}

impl EulerParams {
    pub fn validate(&self) -> Result<()> {
        if self.p == 0 || self.r_inner == 0 || self.k == 0 {
            return Err(Error::BadParams("p, r and k must be positive".into()));
        }
        for (name, h) in [("A+", &self.a_plus), ("A-", &self.a_minus), ("B+", &self.b_plus), ("B-", &self.b_minus)] {
            if h.shape() != (self.k, self.k) {
                return Err(Error::BadParams(format!("{name} must be {0}x{0}", self.k)));
            }
            let ev = hermitian_eigenvalues(h).map_err(|e| Error::BadParams(format!("{name}: {e}")))?;
            let scale = ev.iter().fold(1.0f64, |acc, l| acc.max(l.abs()));
            if ev[0] < -1e-12 * scale {
                return Err(Error::BadParams(format!("{name} is not positive semidefinite")));
            }
        }
        // N(A) ∩ N(B) = {0}  ⇔  rank [A; B] = k
        let a = &self.a_plus - &self.a_minus;
        let b = &self.b_plus - &self.b_minus;
        let mut stacked = Dense::zeros(2 * self.k, self.k);
        stacked.view_mut((0, 0), (self.k, self.k)).copy_from(&a);
        stacked.view_mut((self.k, 0), (self.k, self.k)).copy_from(&b);
        let sv = stacked.singular_values();
        let smax = sv.iter().fold(0.0f64, |acc, &s| acc.max(s));
        let rank = sv.iter().filter(|&&s| s > 1e-12 * smax.max(1.0)).count();
        if rank < self.k {
            return Err(Error::BadParams(format!("null spaces of A and B intersect (rank [A; B] = {rank} < {})", self.k)));
        }
        Ok(())
    }

    /// `C = A⁺ + A⁻ + B⁺ + B⁻`.
    pub fn c(&self) -> Dense {
        &self.a_plus + &self.a_minus + &self.b_plus + &self.b_minus
    }
}

/// `T`, `S_1`, `S_2` of the Euler family, each an `r × r` block matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct EulerSystem {
    pub p: usize,
    pub t: BlockMatrix,
    pub s1: BlockMatrix,
    pub s2: BlockMatrix,
}

impl EulerSystem {
    pub fn new(params: &EulerParams) -> Result<Self> {
        params.validate()?;
        let r = params.r_inner;
        let c = params.c();
        let t = BlockMatrix::from_blocks(r, params.k, |i, j| {
            if i == j {
                Some(c.clone())
            } else if j == i + 1 {
                Some(-params.a_minus.clone())
            } else if i == j + 1 {
                Some(-params.a_plus.clone())
            } else {
                None
            }
        });
        let s1 = BlockMatrix::from_blocks(r, params.k, |i, j| (i == j).then(|| -params.b_minus.clone()));
        let s2 = BlockMatrix::from_blocks(r, params.k, |i, j| (i == j).then(|| -params.b_plus.clone()));
        Ok(Self { p: params.p, t, s1, s2 })
    }

    pub fn matrix(&self) -> BlockMatrix {
        outer_tridiagonal(self.p, &self.t, Some(&self.s1), Some(&self.s2))
    }

    /// Lifts splittings `T = M_s − N_s` to `M = P_s − Q_s` with
    /// `P_s = blockdiag(M_s, …, M_s)` and `Q_s` carrying `N_s` on the
    /// diagonal, `−S_1` above and `−S_2` below.
    pub fn lift_splitting(&self, t_parts: &[(BlockMatrix, BlockMatrix)]) -> Result<Vec<(BlockMatrix, BlockMatrix)>> {
        let neg_s1 = self.s1.scale(-1.0);
        let neg_s2 = self.s2.scale(-1.0);
        t_parts
            .iter()
            .map(|(m, n)| {
                self.check_inner(m)?;
                self.check_inner(n)?;
                let p_s = outer_tridiagonal(self.p, m, None, None);
                let q_s = outer_tridiagonal(self.p, n, Some(&neg_s1), Some(&neg_s2));
                Ok((p_s, q_s))
            })
            .collect()
    }

    /// Lifts `T = D' − L' − U'` to `M = D − L − U` with `L` carrying `−S_2`
    /// below the diagonal and `U` carrying `−S_1` above it.
    pub fn lift_triangular(&self, d: &BlockMatrix, l: &BlockMatrix, u: &BlockMatrix) -> Result<(BlockMatrix, BlockMatrix, BlockMatrix)> {
        for x in [d, l, u] {
            self.check_inner(x)?;
        }
        let neg_s1 = self.s1.scale(-1.0);
        let neg_s2 = self.s2.scale(-1.0);
        Ok((
            outer_tridiagonal(self.p, d, None, None),
            outer_tridiagonal(self.p, l, None, Some(&neg_s2)),
            outer_tridiagonal(self.p, u, Some(&neg_s1), None),
        ))
    }

    fn check_inner(&self, x: &BlockMatrix) -> Result<()> {
        if x.same_shape(&self.t) {
            Ok(())
        } else {
            Err(Error::DimensionMismatch(format!(
                "inner matrix has ({}, {}) blocks, T has ({}, {})",
                x.m(),
                x.k(),
                self.t.m(),
                self.t.k()
            )))
        }
    }
}

/// `p × p` outer block tridiagonal matrix with `diag` repeated on the
/// diagonal and `sup`/`sub` on the off-diagonals; the result keeps the inner
/// block size.
fn outer_tridiagonal(p: usize, diag: &BlockMatrix, sup: Option<&BlockMatrix>, sub: Option<&BlockMatrix>) -> BlockMatrix {
    let r = diag.m();
    let n = diag.dim();
    let mut out = BlockMatrix::zeros(p * r, diag.k());
    let mut dense = out.as_dense().clone();
    for o in 0..p {
        dense.view_mut((o * n, o * n), (n, n)).copy_from(diag.as_dense());
        if o + 1 < p {
            if let Some(s) = sup {
                dense.view_mut((o * n, (o + 1) * n), (n, n)).copy_from(s.as_dense());
            }
            if let Some(s) = sub {
                dense.view_mut(((o + 1) * n, o * n), (n, n)).copy_from(s.as_dense());
            }
        }
    }
    out = BlockMatrix::from_dense(dense, p * r, diag.k()).expect("consistent shape");
    out
}

pub fn euler_matrix(params: &EulerParams) -> Result<BlockMatrix> {
    Ok(EulerSystem::new(params)?.matrix())
}

pub fn lift_splitting(system: &EulerSystem, t_parts: &[(BlockMatrix, BlockMatrix)]) -> Result<Vec<(BlockMatrix, BlockMatrix)>> {
    system.lift_splitting(t_parts)
}

pub fn lift_triangular(
    system: &EulerSystem,
    t_triple: &(BlockMatrix, BlockMatrix, BlockMatrix),
) -> Result<(BlockMatrix, BlockMatrix, BlockMatrix)> {
    system.lift_triangular(&t_triple.0, &t_triple.1, &t_triple.2)
}

pub fn example_5_2_params() -> EulerParams {
    let apm = dense_from_real(2, &[2.0, -1.0, -1.0, 2.0]);
    EulerParams {
        p: 4,
        r_inner: 3,
        k: 2,
        a_plus: apm.clone(),
        a_minus: apm,
        b_plus: dense_from_real(2, &[2.0, 2.0, 2.0, 2.0]),
        b_minus: dense_from_real(2, &[2.0, -2.0, -2.0, 2.0]),
    }
}

pub const EXAMPLE_52_RHS: [f64; 24] = [
    1.0, 3.0, 1.0, 2.0, 5.0, 3.0, 2.0, 1.0, 7.0, 5.0, 9.0, 0.0, 2.0, 0.0, 1.0, 2.0, 1.0, 0.0, 1.0, 3.0, 1.2, 4.0, 6.0, 8.0,
];

/// Inner couplings of `T` retained by each of the six splittings `M_1 … M_6`,
/// as 0-based block positions in the 3×3 inner grid.
const EXAMPLE_52_PATTERNS: [&[Pair]; 6] = [
    &[(1, 0), (2, 1)],
    &[(0, 1), (1, 2)],
    &[(1, 0), (1, 2)],
    &[(0, 1), (2, 1)],
    &[(0, 1), (1, 0)],
    &[(1, 2), (2, 1)],
];

pub fn example_5_2_system() -> EulerSystem {
    EulerSystem::new(&example_5_2_params()).expect("valid Euler parameters")
}

/// The 24×24 Euler matrix (as 12×12 blocks of size 2), its right-hand side
/// and the six splittings `T = M_s − N_s` of the inner matrix.
pub fn example_5_2() -> (BlockMatrix, BlockVector, Vec<(BlockMatrix, BlockMatrix)>) {
    let sys = example_5_2_system();
    let m = sys.matrix();
    let b = BlockVector::from_real(&EXAMPLE_52_RHS, m.m(), m.k()).expect("24 entries");
    let parts = EXAMPLE_52_PATTERNS
        .iter()
        .map(|keep| {
            let ms = sys.t.masked(|i, j| i == j || keep.contains(&(i, j)));
            let ns = ms.sub(&sys.t).expect("same shape");
            (ms, ns)
        })
        .collect();
    (m, b, parts)
}

/// The lifted splittings `P_s` as index sets on the 12×12 block grid.
pub fn example_5_2_index_sets(r: usize) -> Vec<IndexSetSplit> {
    EXAMPLE_52_PATTERNS[..r.min(6)]
        .iter()
        .map(|keep| {
            let pairs = (0..4).flat_map(|o| keep.iter().map(move |&(i, j)| (3 * o + i, 3 * o + j)));
            IndexSetSplit::new(12, pairs).expect("valid pairs")
        })
        .collect()
}

/// Multisplitting of the Euler example from the first `r` lifted splittings.
pub fn example_5_2_multisplitting(r: usize, ws: Vec<BlockWeights>) -> Result<Multisplitting> {
    if !(1..=6).contains(&r) || ws.len() != r {
        return Err(Error::BadParams(format!("need 1 <= r <= 6 with r weight vectors (r = {r}, {} given)", ws.len())));
    }
    let sys = example_5_2_system();
    let (m, _, parts) = example_5_2();
    let lifted = sys.lift_splitting(&parts[..r])?;
    let parts = lifted.into_iter().zip(ws).map(|((p, q), w)| (p, q, w)).collect();
    Multisplitting::from_explicit(&m, parts)
}

/// `E_s = I / r` at the 12-block resolution.
pub fn table_5_1_weights(r: usize) -> Vec<BlockWeights> {
    vec![BlockWeights::uniform(12, 1.0 / r as f64); r]
}

/// Weighting matrices of the second table, given per outer block row
/// (`I_6` granularity) and refined to the 12-block resolution.
pub fn table_5_2_weights(r: usize) -> Vec<BlockWeights> {
    let outer: Vec<[f64; 4]> = match r {
        1 => vec![[1.0, 1.0, 1.0, 1.0]],
        2 => vec![[1.0, 0.0, 1.0, 0.0], [0.0, 1.0, 0.0, 1.0]],
        3 => vec![[1.0, 0.0, 1.0, 0.0], [0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 0.0, 1.0]],
        4 => vec![[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, 1.0]],
        5 => vec![
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, 0.5],
            [0.0, 0.0, 0.0, 0.5],
        ],
        6 => vec![
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 0.5, 0.0],
            [0.0, 0.0, 0.0, 0.5],
            [0.0, 0.0, 0.0, 0.5],
            [0.0, 0.0, 0.5, 0.0],
        ],
        _ => panic!("the second table covers r = 1..6"),
    };
    outer
        .into_iter()
        .map(|w| BlockWeights::new(w.to_vec()).expect("nonnegative").refine(3))
        .collect()
}

/// Lifted BGAOR setup on the Euler example: `D'_s = M_s`, `L'_s = 0`,
/// `U'_s = N_s` for `s = 1..4`, uniform weights `1/4` and common `(γ, ω)`.
pub fn example_5_2_bgaor_parts() -> Vec<(BlockMatrix, BlockMatrix, BlockMatrix)> {
    let sys = example_5_2_system();
    let (_, _, parts) = example_5_2();
    let zero = BlockMatrix::zeros(sys.t.m(), sys.t.k());
    parts[..4]
        .iter()
        .map(|(m, n)| sys.lift_triangular(m, &zero, n).expect("inner shapes agree"))
        .collect()
}

pub fn example_5_2_bgaor(gamma: f64, omega: f64) -> Result<Multisplitting> {
    let (m, _, _) = example_5_2();
    let parts = example_5_2_bgaor_parts();
    let params = vec![(gamma, omega); parts.len()];
    let ws = vec![BlockWeights::uniform(m.m(), 0.25); parts.len()];
    gaor_from_parts(&m, &parts, &params, &ws)
}

/// The same setup expressed as index-set triples on the 12×12 block grid:
/// `R_s` holds the retained inner couplings of every outer block, `S_s` the
/// outer sub-diagonal couplings and `T_s` everything else.
pub fn example_5_2_bgaor_triples(gamma: f64, omega: f64) -> Result<Vec<TripleSplit>> {
    let r_inner = 3;
    let p = 4;
    let m = r_inner * p;
    EXAMPLE_52_PATTERNS[..4]
        .iter()
        .map(|keep| {
            let r_set: BTreeSet<Pair> = (0..p)
                .flat_map(|o| keep.iter().map(move |&(i, j)| (o * r_inner + i, o * r_inner + j)))
                .collect();
            let s_set: BTreeSet<Pair> = (1..p)
                .flat_map(|o| (0..r_inner).map(move |i| (o * r_inner + i, (o - 1) * r_inner + i)))
                .collect();
            TripleSplit::with_complement(m, r_set, s_set, gamma, omega)
        })
        .collect()
}

/// Parameters of the elliptic family: `n × n` blocks of size `m`, split rows `m_1`, `m_2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EllipticParams {
    pub m_dim: usize,
    pub n_dim: usize,
    pub m1: usize,
    pub m2: usize,
}

/// The two choices of `(m_1, m_2)` used with the elliptic family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EllipticCase {
    /// `m_1 = ⌊3n/4⌋`, `m_2 = ⌊n/4⌋`
    Quarter,
    /// `m_1 = ⌊5n/6⌋`, `m_2 = ⌊n/6⌋`
    Sixth,
}

impl EllipticParams {
    /// Requires `m2 < m1 <= n_dim`. `m2 = 0` is accepted: it arises from
    /// `⌊n/6⌋` for `n < 6` and simply leaves the first weight band empty.
    pub fn new(m_dim: usize, n_dim: usize, m1: usize, m2: usize) -> Result<Self> {
        if m_dim == 0 || n_dim == 0 {
            return Err(Error::BadParams("grid dimensions must be positive".into()));
        }
        if !(m2 < m1 && m1 <= n_dim) {
            return Err(Error::BadParams(format!("need m2 < m1 <= n (m1 = {m1}, m2 = {m2}, n = {n_dim})")));
        }
        Ok(Self { m_dim, n_dim, m1, m2 })
    }

    pub fn case(m_dim: usize, n_dim: usize, case: EllipticCase) -> Result<Self> {
        let (m1, m2) = match case {
            EllipticCase::Quarter => (3 * n_dim / 4, n_dim / 4),
            EllipticCase::Sixth => (5 * n_dim / 6, n_dim / 6),
        };
        Self::new(m_dim, n_dim, m1, m2)
    }
}

fn tridiag_b(m: usize) -> Dense {
    Dense::from_fn(m, m, |i, j| {
        if i == j {
            real(4.0)
        } else if i.abs_diff(j) == 1 {
            real(-1.0)
        } else {
            real(0.0)
        }
    })
}

/// Block tridiagonal `tridiag(−I, B, −I)` with `B = tridiag(−1, 4, −1)`.
pub fn elliptic_matrix(params: &EllipticParams) -> Result<BlockMatrix> {
    if params.m_dim == 0 || params.n_dim == 0 {
        return Err(Error::BadParams("grid dimensions must be positive".into()));
    }
    let b = tridiag_b(params.m_dim);
    let neg_i = -Dense::identity(params.m_dim, params.m_dim);
    Ok(BlockMatrix::from_blocks(params.n_dim, params.m_dim, |i, j| {
        if i == j {
            Some(b.clone())
        } else if i.abs_diff(j) == 1 {
            Some(neg_i.clone())
        } else {
            None
        }
    }))
}

/// Block positions (0-based) for `L_s` and `U_s`; rows are 1-based in the
/// defining formulas and converted here.
fn elliptic_pair_sets(params: &EllipticParams) -> [(BTreeSet<Pair>, BTreeSet<Pair>); 2] {
    let n = params.n_dim;
    let sub = |lo: usize, hi: usize| -> BTreeSet<Pair> { (lo.max(2)..=hi).map(|i| (i - 1, i - 2)).collect() };
    let sup: BTreeSet<Pair> = (1..n).map(|i| (i - 1, i)).collect();
    let l1 = sub(2, params.m1);
    let u1: BTreeSet<Pair> = sub(params.m1 + 1, n).union(&sup).copied().collect();
    let l2 = sub(params.m2, n);
    let u2: BTreeSet<Pair> = sub(2, params.m2.saturating_sub(1)).union(&sup).copied().collect();
    [(l1, u1), (l2, u2)]
}

/// Block weights: `1` on rows `1..m_2`, `1/2` on `m_2+1..m_1−1`, `0` from `m_1`
/// for the first splitting; the complement for the second.
pub fn elliptic_weights(params: &EllipticParams) -> [BlockWeights; 2] {
    let e1: Vec<f64> = (1..=params.n_dim)
        .map(|i| {
            if i <= params.m2 {
                1.0
            } else if i < params.m1 {
                0.5
            } else {
                0.0
            }
        })
        .collect();
    let e2: Vec<f64> = e1.iter().map(|w| 1.0 - w).collect();
    [BlockWeights::new(e1).expect("nonnegative"), BlockWeights::new(e2).expect("nonnegative")]
}

/// Triples `(R = ∅, S = L-pattern, T = U-pattern)` for the two splittings.
pub fn elliptic_triples(params: &EllipticParams, gamma: f64, omega: f64) -> Result<[TripleSplit; 2]> {
    let [(l1, u1), (l2, u2)] = elliptic_pair_sets(params);
    let n = params.n_dim;
    let full = |s: BTreeSet<Pair>, t: BTreeSet<Pair>| -> Result<TripleSplit> {
        // the zero blocks of A (|i − j| > 1) are assigned to T; they do not change U
        let rest: BTreeSet<Pair> = crate::splitting::off_diagonal_pairs(n)
            .into_iter()
            .filter(|p| !s.contains(p) && !t.contains(p))
            .collect();
        TripleSplit::new(n, BTreeSet::new(), s, t.union(&rest).copied().collect(), gamma, omega)
    };
    Ok([full(l1, u1)?, full(l2, u2)?])
}

/// `(D, L_s, U_s)` for `s = 1, 2` and the two weight vectors.
pub fn elliptic_two_splitting(
    params: &EllipticParams,
) -> Result<(Vec<(BlockMatrix, BlockMatrix, BlockMatrix)>, [BlockWeights; 2])> {
    let a = elliptic_matrix(params)?;
    let triples = elliptic_triples(params, 1.0, 1.0)?;
    let parts = triples.iter().map(|t| t.parts(&a)).collect();
    Ok((parts, elliptic_weights(params)))
}

/// Two-way BGAOR multisplitting of the elliptic matrix with common `(γ, ω)`.
pub fn elliptic_multisplitting(params: &EllipticParams, gamma: f64, omega: f64) -> Result<Multisplitting> {
    let a = elliptic_matrix(params)?;
    let (parts, ws) = elliptic_two_splitting(params)?;
    gaor_from_parts(&a, &parts, &[(gamma, omega); 2], &ws)
}

fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, k: usize, complex: bool) -> Dense {
    let mut h = Dense::zeros(k, k);
    for i in 0..k {
        h[(i, i)] = real(rng.random_range(-1.0..1.0));
        for j in i + 1..k {
            let im = if complex { rng.random_range(-1.0..1.0) } else { 0.0 };
            let z = C64::new(rng.random_range(-1.0..1.0), im);
            h[(i, j)] = z;
            h[(j, i)] = z.conj();
        }
    }
    h
}

fn spectral_norm_hermitian(h: &Dense) -> f64 {
    hermitian_eigenvalues(h).map(|ev| ev[0].abs().max(ev[ev.len() - 1].abs())).unwrap_or(0.0)
}

/// Random `m × m` block matrix with Hermitian `k × k` blocks whose diagonal
/// blocks dominate their row by a random factor in `[lo, hi]`. Diagonal
/// blocks are positive definite; membership in H is left to [`classify`].
pub fn random_block_hermitian<R: Rng + ?Sized>(rng: &mut R, m: usize, k: usize, lo: f64, hi: f64, complex: bool) -> BlockMatrix {
    let mut a = BlockMatrix::zeros(m, k);
    for i in 0..m {
        let mut off = 0.0;
        for j in 0..m {
            if i != j && rng.random_bool(0.8) {
                let h = random_hermitian(rng, k, complex);
                off += spectral_norm_hermitian(&h);
                a.set_block(i, j, &h);
            }
        }
        let x = random_hermitian(rng, k, complex);
        let gram = &x * x.adjoint();
        let floor = (off * rng.random_range(lo..hi)).max(0.1);
        let diag = gram * real(0.2) + Dense::identity(k, k) * real(floor);
        a.set_block(i, i, &diag);
    }
    a
}

/// Draws random block Hermitian matrices until one is certified as a
/// generalized H-matrix.
pub fn random_h_matrix<R: Rng + ?Sized>(rng: &mut R, m: usize, k: usize) -> (BlockMatrix, ClassReport) {
    loop {
        let complex = rng.random_bool(0.5);
        let a = random_block_hermitian(rng, m, k, 0.7, 1.6, complex);
        let report = classify(&a);
        if report.is_certified_h() {
            return (a, report);
        }
    }
}

/// Random nonnegative weights with `Σ_s e_s^i = 1` on every block row; some
/// entries are exactly zero.
pub fn random_weights<R: Rng + ?Sized>(rng: &mut R, m: usize, r: usize) -> Vec<BlockWeights> {
    let mut cols = vec![vec![0.0; m]; r];
    for i in 0..m {
        let mut w: Vec<f64> = (0..r).map(|_| if rng.random_bool(0.25) { 0.0 } else { rng.random_range(0.05..1.0) }).collect();
        if w.iter().all(|&x| x == 0.0) {
            w[rng.random_range(0..r)] = 1.0;
        }
        let total: f64 = w.iter().sum();
        for (s, x) in w.iter().enumerate() {
            cols[s][i] = x / total;
        }
        // absorb rounding into the last nonzero entry so the sum is 1 to machine precision
        let sum: f64 = (0..r).map(|s| cols[s][i]).sum();
        if let Some(s) = (0..r).rev().find(|&s| cols[s][i] > 0.0) {
            cols[s][i] += 1.0 - sum;
        }
    }
    cols.into_iter().map(|c| BlockWeights::new(c).expect("nonnegative")).collect()
}

pub fn random_index_sets<R: Rng + ?Sized>(rng: &mut R, m: usize, r: usize) -> Vec<IndexSetSplit> {
    (0..r)
        .map(|_| {
            let pairs: Vec<Pair> = crate::splitting::off_diagonal_pairs(m).into_iter().filter(|_| rng.random_bool(0.5)).collect();
            IndexSetSplit::new(m, pairs).expect("off-diagonal pairs")
        })
        .collect()
}

pub fn random_index_multisplitting<R: Rng + ?Sized>(rng: &mut R, a: &BlockMatrix, r: usize) -> Result<Multisplitting> {
    let qs = random_index_sets(rng, a.m(), r);
    let ws = random_weights(rng, a.m(), r);
    multisplit_from_index_sets(a, &qs, &ws)
}

/// Random disjoint covers of `P(m)` with `0 ≤ γ ≤ ω ≤ 1` and `ω ≥ omega_min`.
pub fn random_triples<R: Rng + ?Sized>(rng: &mut R, m: usize, r: usize, omega_min: f64) -> Vec<TripleSplit> {
    (0..r)
        .map(|_| {
            let mut r_set = BTreeSet::new();
            let mut s_set = BTreeSet::new();
            let mut t_set = BTreeSet::new();
            for p in crate::splitting::off_diagonal_pairs(m) {
                match rng.random_range(0..3) {
                    0 => r_set.insert(p),
                    1 => s_set.insert(p),
                    _ => t_set.insert(p),
                };
            }
            let omega = rng.random_range(omega_min..=1.0);
            let gamma = rng.random_range(0.0..=omega);
            TripleSplit::new(m, r_set, s_set, t_set, gamma, omega).expect("valid triple")
        })
        .collect()
}
