//! Iteration matrices, spectral radii and the lifted hat splitting.

use nalgebra::{DVector, Schur};

use crate::blockcore::{Dense, C64};
use crate::error::{Error, Result};
use crate::solver::SolveReport;
use crate::splitting::Multisplitting;

#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    Multi,
    Extrapolated(f64),
    Bgaor { gammas: Vec<f64>, omegas: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationMatrix {
    pub t: Dense,
    pub source: Source,
}

impl IterationMatrix {
    pub fn spectral_radius(&self) -> Result<f64> {
        spectral_radius(&self.t)
    }

    /// `τT + (1 − τ)I`.
    pub fn extrapolated(&self, tau: f64) -> Self {
        let n = self.t.nrows();
        let t = &self.t * C64::new(tau, 0.0) + Dense::identity(n, n) * C64::new(1.0 - tau, 0.0);
        Self { t, source: Source::Extrapolated(tau) }
    }
}

/// `T = Σ_s E_s M_s⁻¹ N_s`, accumulated in ascending `s`.
pub fn iteration_matrix(ms: &Multisplitting) -> IterationMatrix {
    let n = ms.a().dim();
    let mut t = Dense::zeros(n, n);
    for part in ms.parts() {
        if part.weights.is_zero() {
            continue;
        }
        let z = part.solve_m_dense(part.n.as_dense());
        for (row, &w) in part.scalar_weights().iter().enumerate() {
            if w != 0.0 {
                let scaled = z.row(row) * C64::new(w, 0.0);
                let mut target = t.row_mut(row);
                target += scaled;
            }
        }
    }
    IterationMatrix { t, source: Source::Multi }
}

/// Iteration matrix tagged with the BGAOR parameters that produced `ms`.
pub fn bgaor_iteration_matrix(ms: &Multisplitting, gammas: Vec<f64>, omegas: Vec<f64>) -> IterationMatrix {
    IterationMatrix { source: Source::Bgaor { gammas, omegas }, ..iteration_matrix(ms) }
}

/// All eigenvalues from a complex Schur decomposition.
pub fn eigenvalues(mat: &Dense) -> Result<Vec<C64>> {
    if !mat.is_square() {
        return Err(Error::DimensionMismatch(format!("{}x{} is not square", mat.nrows(), mat.ncols())));
    }
    if mat.nrows() == 0 {
        return Ok(Vec::new());
    }
    if let Some(schur) = Schur::try_new(mat.clone(), f64::EPSILON, 10_000) {
        return Ok(schur.unpack().1.diagonal().iter().copied().collect());
    }
    // QR without exceptional shifts can cycle on spectra symmetric about 0 (block Jacobi), so retry on T + σI
    let scale = mat.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    for sigma in [C64::new(0.137, 0.0), C64::new(0.0, 0.291), C64::new(-0.413, 0.173)] {
        let sigma = sigma * scale;
        let mut shifted = mat.clone();
        for i in 0..shifted.nrows() {
            shifted[(i, i)] += sigma;
        }
        if let Some(schur) = Schur::try_new(shifted, f64::EPSILON, 10_000) {
            return Ok(schur.unpack().1.diagonal().iter().map(|&z| z - sigma).collect());
        }
    }
    Err(Error::EigFailure)
}

/// `max |λ|` over the full spectrum.
pub fn spectral_radius(mat: &Dense) -> Result<f64> {
    Ok(eigenvalues(mat)?.iter().map(|z| z.norm()).fold(0.0, f64::max))
}

/// Power-iteration estimate of the spectral radius for matrices too large
/// for the dense eigensolver. Converges slowly when the dominant eigenvalues
/// are close in modulus; returns the geometric-mean growth over the last
/// `window` steps.
pub fn spectral_radius_power(mat: &Dense, iters: usize) -> Result<f64> {
    if !mat.is_square() {
        return Err(Error::DimensionMismatch("power method needs a square matrix".into()));
    }
    let n = mat.nrows();
    let mut x = DVector::<C64>::from_fn(n, |i, _| C64::new(1.0 + (i as f64 * 0.618).fract(), 0.0));
    x /= C64::new(x.norm(), 0.0);
    let window = (iters / 4).max(1);
    let mut log_growth = Vec::with_capacity(iters);
    for _ in 0..iters {
        let y = mat * &x;
        let g = y.norm();
        if g == 0.0 {
            return Ok(0.0);
        }
        log_growth.push(g.ln());
        x = y / C64::new(g, 0.0);
    }
    let tail = &log_growth[log_growth.len().saturating_sub(window)..];
    Ok((tail.iter().sum::<f64>() / tail.len() as f64).exp())
}

/// `M̂ = blockdiag(M_1, …, M_r)` and `N̂` with `(s, t)` block `N_s E_t`.
pub fn hat_pair(ms: &Multisplitting) -> (Dense, Dense) {
    let n = ms.a().dim();
    let r = ms.r();
    let mut m_hat = Dense::zeros(r * n, r * n);
    let mut n_hat = Dense::zeros(r * n, r * n);
    for (s, ps) in ms.parts().iter().enumerate() {
        m_hat.view_mut((s * n, s * n), (n, n)).copy_from(ps.m.as_dense());
        for (t, pt) in ms.parts().iter().enumerate() {
            let e = pt.scalar_weights();
            let block = Dense::from_fn(n, n, |i, j| ps.n.as_dense()[(i, j)] * e[j]);
            n_hat.view_mut((s * n, t * n), (n, n)).copy_from(&block);
        }
    }
    (m_hat, n_hat)
}

/// `ρ(M̂⁻¹N̂)` with a fresh factorization of the assembled `M̂`.
pub fn hat_spectral_radius(ms: &Multisplitting) -> Result<f64> {
    let (m_hat, n_hat) = hat_pair(ms);
    let g = m_hat.lu().solve(&n_hat).ok_or(Error::SingularM { index: 0 })?;
    spectral_radius(&g)
}

/// Open interval `(0, 2/(1+ρ))` of extrapolation parameters with guaranteed convergence.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct OpenInterval {
    pub lo: f64,
    pub hi: f64,
}

impl OpenInterval {
    pub fn contains(&self, x: f64) -> bool {
        self.lo < x && x < self.hi
    }
}

pub fn extrapolation_interval(rho: f64) -> Result<OpenInterval> {
    if !(rho >= 0.0) || !rho.is_finite() {
        return Err(Error::BadParams(format!("spectral radius must be a nonnegative number, got {rho}")));
    }
    Ok(OpenInterval { lo: 0.0, hi: 2.0 / (1.0 + rho) })
}

/// Minimum recorded norms for [`asymptotic_rate`].
pub const MIN_RATE_NORMS: usize = 10;

/// Geometric mean of the last `max(5, ⌈20%⌉)` successive ratios of a norm history.
pub fn asymptotic_rate_of(norms: &[f64]) -> Result<f64> {
    if norms.len() < MIN_RATE_NORMS {
        return Err(Error::TooFewIterations { needed: MIN_RATE_NORMS, got: norms.len() });
    }
    let ratios: Vec<f64> = norms.windows(2).map(|w| w[1] / w[0]).collect();
    let count = 5usize.max((norms.len() as f64 * 0.2).ceil() as usize).min(ratios.len());
    let tail = &ratios[ratios.len() - count..];
    Ok((tail.iter().map(|r| r.ln()).sum::<f64>() / count as f64).exp())
}

pub fn asymptotic_rate(report: &SolveReport) -> Result<f64> {
    asymptotic_rate_of(&report.norms)
}
