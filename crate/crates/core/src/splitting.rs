//! Multisplittings `A = M_s − N_s` with block weighting matrices `E_s`.
//!
//! Two constructions are provided: index-set splittings, where `M_s` keeps
//! the diagonal blocks plus the off-diagonal pairs in `Q_s`, and the
//! generalized AOR family `M_s = (D_s − γ_s L_s) / ω_s` built from a
//! disjoint triple `(R_s, S_s, T_s)` of off-diagonal pairs. In both cases
//! `N_s` is formed as `M_s − A`, so the splitting identity holds exactly.
//!
//! Sign convention throughout: `A = D − L − U`, so `L` and `U` hold the
//! *negated* blocks of `A`.

use std::collections::BTreeSet;

use nalgebra::{DVector, Dyn, LU};

use crate::blockcore::{BlockMatrix, Dense, C64};
use crate::error::{Error, Result};

/// Tolerance on `Σ_s e_s^i = 1`.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;
/// Relative pivot threshold deciding whether `M_s` is singular.
pub const PIVOT_TOL: f64 = 1e-13;

pub type Pair = (usize, usize);

fn check_pairs(m: usize, pairs: &BTreeSet<Pair>) -> Result<()> {
    for &(i, j) in pairs {
        if i >= m || j >= m || i == j {
            return Err(Error::BadParams(format!(
                "pair ({}, {}) is not an off-diagonal block position for m = {m}",
                i + 1,
                j + 1
            )));
        }
    }
    Ok(())
}

/// All off-diagonal block positions `P(m)`.
pub fn off_diagonal_pairs(m: usize) -> BTreeSet<Pair> {
    (0..m).flat_map(|i| (0..m).filter(move |&j| j != i).map(move |j| (i, j))).collect()
}

pub fn strict_lower_pairs(m: usize) -> BTreeSet<Pair> {
    off_diagonal_pairs(m).into_iter().filter(|&(i, j)| i > j).collect()
}

pub fn strict_upper_pairs(m: usize) -> BTreeSet<Pair> {
    off_diagonal_pairs(m).into_iter().filter(|&(i, j)| i < j).collect()
}

/// Off-diagonal block positions `Q_s` retained in `M_s` (0-based).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct IndexSetSplit {
    pairs: BTreeSet<Pair>,
}

impl IndexSetSplit {
    pub fn new(m: usize, pairs: impl IntoIterator<Item = Pair>) -> Result<Self> {
        let pairs: BTreeSet<Pair> = pairs.into_iter().collect();
        check_pairs(m, &pairs)?;
        Ok(Self { pairs })
    }

    /// `Q = ∅`: block Jacobi.
    pub fn block_diagonal() -> Self {
        Self::default()
    }

    /// `Q = P(m)`: `M = A`.
    pub fn full(m: usize) -> Self {
        Self { pairs: off_diagonal_pairs(m) }
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        i == j || self.pairs.contains(&(i, j))
    }

    pub fn pairs(&self) -> &BTreeSet<Pair> {
        &self.pairs
    }

    pub fn permuted(&self, perm: &[usize]) -> Self {
        Self { pairs: self.pairs.iter().map(|&(i, j)| (perm[i], perm[j])).collect() }
    }
}

/// Disjoint cover `R ∪ S ∪ T = P(m)` with acceleration `γ` and relaxation `ω`.
#[derive(Debug, Clone, PartialEq)]
pub struct TripleSplit {
    pub r_set: BTreeSet<Pair>,
    pub s_set: BTreeSet<Pair>,
    pub t_set: BTreeSet<Pair>,
    pub gamma: f64,
    pub omega: f64,
}

impl TripleSplit {
    pub fn new(
        m: usize,
        r_set: BTreeSet<Pair>,
        s_set: BTreeSet<Pair>,
        t_set: BTreeSet<Pair>,
        gamma: f64,
        omega: f64,
    ) -> Result<Self> {
        for set in [&r_set, &s_set, &t_set] {
            check_pairs(m, set)?;
        }
        if !r_set.is_disjoint(&s_set) || !r_set.is_disjoint(&t_set) || !s_set.is_disjoint(&t_set) {
            return Err(Error::BadParams("R, S and T must be pairwise disjoint".into()));
        }
        let covered = r_set.len() + s_set.len() + t_set.len();
        if covered != m * (m - 1) {
            return Err(Error::BadParams(format!(
                "R, S and T cover {covered} of the {} off-diagonal positions",
                m * (m - 1)
            )));
        }
        let out = Self { r_set, s_set, t_set, gamma, omega };
        out.check_params()?;
        Ok(out)
    }

    /// `T` is taken as the complement of `R ∪ S`.
    pub fn with_complement(m: usize, r_set: BTreeSet<Pair>, s_set: BTreeSet<Pair>, gamma: f64, omega: f64) -> Result<Self> {
        let t_set = off_diagonal_pairs(m)
            .into_iter()
            .filter(|p| !r_set.contains(p) && !s_set.contains(p))
            .collect();
        Self::new(m, r_set, s_set, t_set, gamma, omega)
    }

    /// Standard block decomposition: `R = ∅`, `S` strictly lower, `T` strictly upper.
    pub fn standard(m: usize, gamma: f64, omega: f64) -> Result<Self> {
        Self::new(m, BTreeSet::new(), strict_lower_pairs(m), strict_upper_pairs(m), gamma, omega)
    }

    fn check_params(&self) -> Result<()> {
        if !(self.omega > 0.0) || !self.omega.is_finite() {
            return Err(Error::BadParams(format!("omega must be positive, got {}", self.omega)));
        }
        if !self.gamma.is_finite() {
            return Err(Error::BadParams(format!("gamma must be finite, got {}", self.gamma)));
        }
        Ok(())
    }

    /// `0 ≤ γ ≤ ω ≤ 1` and `ω > 0`.
    pub fn in_convergence_range(&self) -> bool {
        0.0 <= self.gamma && self.gamma <= self.omega && self.omega <= 1.0 && self.omega > 0.0
    }

    /// `(D_s, L_s, U_s)` with `A = D_s − L_s − U_s`.
    pub fn parts(&self, a: &BlockMatrix) -> (BlockMatrix, BlockMatrix, BlockMatrix) {
        let d = a.masked(|i, j| i == j || self.r_set.contains(&(i, j)));
        let l = a.masked(|i, j| self.s_set.contains(&(i, j))).scale(-1.0);
        let u = a.masked(|i, j| self.t_set.contains(&(i, j))).scale(-1.0);
        (d, l, u)
    }
}

/// Per-block-row weights `e_s^i ≥ 0` realizing `E_s = diag(e_s^1 I_k, …, e_s^m I_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockWeights(Vec<f64>);

impl BlockWeights {
    pub fn new(e: Vec<f64>) -> Result<Self> {
        if let Some((i, &w)) = e.iter().enumerate().find(|(_, w)| !(**w >= 0.0) || !w.is_finite()) {
            return Err(Error::BadParams(format!("weight e^{} = {w} must be nonnegative", i + 1)));
        }
        Ok(Self(e))
    }

    pub fn uniform(m: usize, value: f64) -> Self {
        Self(vec![value; m])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&w| w == 0.0)
    }

    /// Repeats each weight `factor` times, refining the block partition.
    pub fn refine(&self, factor: usize) -> Self {
        Self(self.0.iter().flat_map(|&w| std::iter::repeat_n(w, factor)).collect())
    }

    pub fn permuted(&self, perm: &[usize]) -> Self {
        let mut out = vec![0.0; self.0.len()];
        for (i, &w) in self.0.iter().enumerate() {
            out[perm[i]] = w;
        }
        Self(out)
    }

    /// Diagonal of `E_s` at scalar resolution.
    pub fn scalar_diagonal(&self, k: usize) -> DVector<f64> {
        DVector::from_iterator(self.0.len() * k, self.0.iter().flat_map(|&w| std::iter::repeat_n(w, k)))
    }
}

/// Largest deviation of `Σ_s e_s^i` from one, with the offending row.
pub fn weight_sum_deviation(ws: &[BlockWeights], m: usize) -> (usize, f64, f64) {
    (0..m)
        .map(|i| {
            let sum: f64 = ws.iter().map(|w| w.0[i]).sum();
            (i, sum, (sum - 1.0).abs())
        })
        .fold((0, 1.0, 0.0), |acc, x| if x.2 > acc.2 { x } else { acc })
}

fn check_weights(ws: &[BlockWeights], m: usize) -> Result<()> {
    if let Some(w) = ws.iter().find(|w| w.len() != m) {
        return Err(Error::DimensionMismatch(format!("weight vector of length {} for m = {m}", w.len())));
    }
    let (row, sum, dev) = weight_sum_deviation(ws, m);
    if dev > WEIGHT_SUM_TOL {
        return Err(Error::WeightSum { row: row + 1, sum });
    }
    Ok(())
}

fn factorize(m: &BlockMatrix, index: usize) -> Result<LU<C64, Dyn, Dyn>> {
    let lu = m.as_dense().clone().lu();
    let scale = m.as_dense().norm();
    let u = lu.u();
    let min_pivot = u.diagonal().iter().fold(f64::INFINITY, |acc, z| acc.min(z.norm()));
    if !(min_pivot > PIVOT_TOL * scale) {
        return Err(Error::SingularM { index });
    }
    Ok(lu)
}

/// One splitting `(M_s, N_s, E_s)` with the cached LU factors of `M_s`.
#[derive(Debug, Clone)]
pub struct SplitPart {
    pub m: BlockMatrix,
    pub n: BlockMatrix,
    pub weights: BlockWeights,
    lu: LU<C64, Dyn, Dyn>,
    scalar_weights: DVector<f64>,
}

impl SplitPart {
    /// `M_s⁻¹ rhs` via the cached factorization.
    pub fn solve_m(&self, rhs: &DVector<C64>) -> DVector<C64> {
        let mut out = rhs.clone();
        // factorization was validated at construction, so this cannot fail
        let ok = self.lu.solve_mut(&mut out);
        debug_assert!(ok);
        out
    }

    /// `M_s⁻¹ Z` for a dense right-hand side.
    pub fn solve_m_dense(&self, rhs: &Dense) -> Dense {
        let mut out = rhs.clone();
        let ok = self.lu.solve_mut(&mut out);
        debug_assert!(ok);
        out
    }

    pub fn scalar_weights(&self) -> &DVector<f64> {
        &self.scalar_weights
    }
}

#[derive(Debug, Clone)]
pub struct Multisplitting {
    a: BlockMatrix,
    parts: Vec<SplitPart>,
}

impl Multisplitting {
    /// Builds the splittings from `M_s`, computing `N_s = M_s − A`.
    pub fn from_m(a: &BlockMatrix, parts: Vec<(BlockMatrix, BlockWeights)>) -> Result<Self> {
        let parts = parts
            .into_iter()
            .map(|(m, w)| {
                let n = m.sub(a)?;
                Ok((m, n, w))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_explicit(a, parts)
    }

    /// Uses caller-provided `N_s` as is. [`validate`] reports any failure of `A = M_s − N_s`.
    pub fn from_explicit(a: &BlockMatrix, parts: Vec<(BlockMatrix, BlockMatrix, BlockWeights)>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::BadParams("a multisplitting needs r >= 1".into()));
        }
        for (m, n, _) in &parts {
            if !m.same_shape(a) || !n.same_shape(a) {
                return Err(Error::DimensionMismatch("splitting blocks do not match A".into()));
            }
        }
        let ws: Vec<BlockWeights> = parts.iter().map(|(_, _, w)| w.clone()).collect();
        check_weights(&ws, a.m())?;
        let parts = parts
            .into_iter()
            .enumerate()
            .map(|(s, (m, n, weights))| {
                let lu = factorize(&m, s + 1)?;
                let scalar_weights = weights.scalar_diagonal(a.k());
                Ok(SplitPart { m, n, weights, lu, scalar_weights })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { a: a.clone(), parts })
    }

    pub fn a(&self) -> &BlockMatrix {
        &self.a
    }

    pub fn r(&self) -> usize {
        self.parts.len()
    }

    pub fn parts(&self) -> &[SplitPart] {
        &self.parts
    }

    pub fn part(&self, s: usize) -> &SplitPart {
        &self.parts[s]
    }

    /// Same splittings with different weights.
    pub fn reweighted(&self, ws: Vec<BlockWeights>) -> Result<Self> {
        if ws.len() != self.r() {
            return Err(Error::DimensionMismatch(format!("{} weight vectors for r = {}", ws.len(), self.r())));
        }
        check_weights(&ws, self.a.m())?;
        let mut out = self.clone();
        for (p, w) in out.parts.iter_mut().zip(ws) {
            p.scalar_weights = w.scalar_diagonal(self.a.k());
            p.weights = w;
        }
        Ok(out)
    }

    /// The first `r` splittings.
    pub fn truncated(&self, r: usize, ws: Vec<BlockWeights>) -> Result<Self> {
        if r == 0 || r > self.r() {
            return Err(Error::BadParams(format!("cannot take {r} of {} splittings", self.r())));
        }
        let parts = self.parts[..r].iter().map(|p| (p.m.clone(), p.n.clone(), p.weights.clone())).collect();
        Self::from_explicit(&self.a, parts)?.reweighted(ws)
    }
}

pub fn multisplit_from_index_sets(a: &BlockMatrix, qs: &[IndexSetSplit], ws: &[BlockWeights]) -> Result<Multisplitting> {
    if qs.len() != ws.len() {
        return Err(Error::DimensionMismatch(format!("{} index sets but {} weight vectors", qs.len(), ws.len())));
    }
    for q in qs {
        check_pairs(a.m(), &q.pairs)?;
    }
    let parts = qs.iter().zip(ws).map(|(q, w)| (a.masked(|i, j| q.contains(i, j)), w.clone())).collect();
    Multisplitting::from_m(a, parts)
}

/// `M_s = (D_s − γ_s L_s)/ω_s` for each triple.
pub fn gaor_multisplitting(a: &BlockMatrix, triples: &[TripleSplit], ws: &[BlockWeights]) -> Result<Multisplitting> {
    if triples.len() != ws.len() {
        return Err(Error::DimensionMismatch(format!("{} triples but {} weight vectors", triples.len(), ws.len())));
    }
    let parts: Vec<_> = triples.iter().map(|t| t.parts(a)).collect();
    let params: Vec<_> = triples.iter().map(|t| (t.gamma, t.omega)).collect();
    gaor_from_parts(a, &parts, &params, ws)
}

/// Generalized AOR multisplitting from explicit `(D_s, L_s, U_s)` with `A = D_s − L_s − U_s`.
pub fn gaor_from_parts(
    a: &BlockMatrix,
    parts: &[(BlockMatrix, BlockMatrix, BlockMatrix)],
    params: &[(f64, f64)],
    ws: &[BlockWeights],
) -> Result<Multisplitting> {
    if parts.len() != params.len() || parts.len() != ws.len() {
        return Err(Error::DimensionMismatch("parts, parameters and weights differ in length".into()));
    }
    let scale = a.as_dense().norm().max(1.0);
    let mut ms = Vec::with_capacity(parts.len());
    for (s, ((d, l, u), &(gamma, omega))) in parts.iter().zip(params).enumerate() {
        if !(omega > 0.0) || !omega.is_finite() || !gamma.is_finite() {
            return Err(Error::BadParams(format!("splitting {}: need omega > 0, got (gamma, omega) = ({gamma}, {omega})", s + 1)));
        }
        let rec = d.sub(l)?.sub(u)?.sub(a)?;
        if rec.as_dense().norm() > 1e-14 * scale {
            return Err(Error::BadParams(format!("splitting {}: A != D - L - U", s + 1)));
        }
        let m = d.sub(&l.scale(gamma))?.scale(1.0 / omega);
        ms.push((m, ws[s].clone()));
    }
    Multisplitting::from_m(a, ms)
}

/// `(D, L, U)` with `D` block diagonal and `L`, `U` the negated strict block triangles.
pub fn standard_triangular_split(a: &BlockMatrix) -> Result<(BlockMatrix, BlockMatrix, BlockMatrix)> {
    for i in 0..a.m() {
        let b = a.block(i, i);
        let scale = b.norm();
        let lu = b.lu();
        let min_pivot = lu.u().diagonal().iter().fold(f64::INFINITY, |acc, z| acc.min(z.norm()));
        if !(min_pivot > PIVOT_TOL * scale) || scale == 0.0 {
            return Err(Error::SingularD { block: i + 1 });
        }
    }
    let d = a.block_diagonal();
    let l = a.masked(|i, j| i > j).scale(-1.0);
    let u = a.masked(|i, j| i < j).scale(-1.0);
    Ok((d, l, u))
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Diagnostics {
    pub r: usize,
    /// `max_s ‖A − (M_s − N_s)‖_F`.
    pub max_reconstruction_error: f64,
    /// `max_i |Σ_s e_s^i − 1|`.
    pub max_weight_deviation: f64,
    /// 1-norm condition number estimate of each `M_s`.
    pub condition_estimates: Vec<f64>,
}

impl Diagnostics {
    pub fn passes(&self) -> bool {
        self.max_reconstruction_error == 0.0 && self.max_weight_deviation <= WEIGHT_SUM_TOL
    }
}

fn norm1(m: &Dense) -> f64 {
    (0..m.ncols()).map(|j| m.column(j).iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

pub fn validate(ms: &Multisplitting) -> Diagnostics {
    let a = ms.a();
    let max_reconstruction_error = ms
        .parts()
        .iter()
        .map(|p| (a.as_dense() - (p.m.as_dense() - p.n.as_dense())).norm())
        .fold(0.0, f64::max);
    let ws: Vec<BlockWeights> = ms.parts().iter().map(|p| p.weights.clone()).collect();
    let (_, _, max_weight_deviation) = weight_sum_deviation(&ws, a.m());
    let condition_estimates = ms
        .parts()
        .iter()
        .map(|p| {
            let inv = p.solve_m_dense(&Dense::identity(a.dim(), a.dim()));
            norm1(p.m.as_dense()) * norm1(&inv)
        })
        .collect();
    Diagnostics { r: ms.r(), max_reconstruction_error, max_weight_deviation, condition_estimates }
}
