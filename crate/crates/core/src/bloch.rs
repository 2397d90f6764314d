//! Bloch decomposition of 1D periodic operators.
//!
//! Two realizations are provided:
//!
//! * continuum Schrödinger operators `-d²/dx² + V` with period 1, whose
//!   fiber at quasi-momentum `k` is written in the plane-wave basis
//!   `exp(i(2πm + k)x)`, `|m| <= N`;
//! * nearest-neighbour chains with `q` sites per cell on a ring of `M`
//!   cells, together with the finite Bloch transform that block-diagonalizes
//!   them exactly.

use std::f64::consts::{PI, TAU};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::assembly::{branch_intervals, BandSet, MIN_MERGE_TOL};
use crate::model::{
    eigenvalues, grid_1d, uniform_k_points, FourierPotential, HermitianMatrix, QuasiMomentum,
    SpectrumSample,
};
use crate::{Error, Result};

pub const DEFAULT_CUTOFF: usize = 32;
pub const DEFAULT_BANDS: usize = 8;
pub const DEFAULT_K_POINTS: usize = 101;

/// Cutoff increment and stopping threshold used by [`converged_fiber_spectrum`].
pub const CUTOFF_STEP: usize = 8;
pub const CUTOFF_CONVERGENCE_TOL: f64 = 1e-9;
const MAX_CUTOFF: usize = 2048;

/// Plane-wave cutoff `N`; the fiber basis has `2N + 1` frequencies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FiberTruncation(usize);

impl FiberTruncation {
    pub fn new(cutoff: usize) -> Result<Self> {
        if cutoff == 0 {
            return Err(Error::InvalidArgument("plane-wave cutoff must be positive".into()));
        }
        Ok(Self(cutoff))
    }

    pub fn cutoff(&self) -> usize {
        self.0
    }

    pub fn basis_size(&self) -> usize {
        2 * self.0 + 1
    }
}

impl Default for FiberTruncation {
    fn default() -> Self {
        Self(DEFAULT_CUTOFF)
    }
}

/// Fiber operator at `k` in the plane-wave basis:
/// `H[m][n] = δ(m,n)·(2πm + k)² + v[m - n]`, `m, n ∈ -N..=N`.
pub fn build_fiber_matrix(
    potential: &FourierPotential,
    k: &QuasiMomentum,
    trunc: FiberTruncation,
) -> Result<HermitianMatrix> {
    k.expect_dim(1)?;
    let max_frequency = potential.max_frequency();
    if trunc.cutoff() < max_frequency {
        return Err(Error::CutoffTooSmall { cutoff: trunc.cutoff(), max_frequency });
    }
    let k = k.components()[0];
    let n = trunc.cutoff() as i64;
    let dim = trunc.basis_size();
    let mut h = DMatrix::<Complex64>::zeros(dim, dim);
    for (freq, v) in potential.modes() {
        for m in -n..=n {
            let col = m - freq;
            if (-n..=n).contains(&col) {
                h[((m + n) as usize, (col + n) as usize)] += v;
            }
        }
    }
    for m in -n..=n {
        let kinetic = TAU * m as f64 + k;
        h[((m + n) as usize, (m + n) as usize)] += kinetic * kinetic;
    }
    HermitianMatrix::new(h)
}

/// The `bands` lowest fiber eigenvalues at `k`.
pub fn fiber_spectrum(
    potential: &FourierPotential,
    k: &QuasiMomentum,
    trunc: FiberTruncation,
    bands: usize,
) -> Result<SpectrumSample> {
    if bands > trunc.basis_size() {
        return Err(Error::InvalidArgument(format!(
            "{bands} bands requested but the basis has only {} states",
            trunc.basis_size()
        )));
    }
    let mut eigenvalues = eigenvalues(&build_fiber_matrix(potential, k, trunc)?)
        .map_err(|e| e.context(format!("fiber at k = {:?}", k.components())))?;
    eigenvalues.truncate(bands);
    Ok(SpectrumSample { k: k.clone(), eigenvalues })
}

/// Fiber spectra on the uniform `k_points` grid, in grid order.
pub fn band_sweep(
    potential: &FourierPotential,
    trunc: FiberTruncation,
    bands: usize,
    k_points: usize,
) -> Result<Vec<SpectrumSample>> {
    if k_points == 0 {
        return Err(Error::InvalidArgument("k-grid must have at least one point".into()));
    }
    grid_1d(k_points)
        .par_iter()
        .map(|k| fiber_spectrum(potential, k, trunc, bands))
        .collect()
}

/// Band set of the continuum operator from a [`band_sweep`]. In one
/// dimension every band edge is a fiber eigenvalue at `k = 0` or `k = π`, so
/// each branch range is widened by the fiber at `π` (which an odd grid
/// misses) and branches are then joined only where they touch. Grid-jump
/// tolerances would swallow the narrow higher gaps of steep bands.
pub fn continuum_bands(
    potential: &FourierPotential,
    trunc: FiberTruncation,
    samples: &[SpectrumSample],
) -> Result<BandSet> {
    let bands = samples.iter().map(|s| s.eigenvalues.len()).min().unwrap_or(0);
    let edge = fiber_spectrum(potential, &QuasiMomentum::one(PI)?, trunc, bands)?;
    let raw = branch_intervals(samples)
        .into_iter()
        .zip(&edge.eigenvalues)
        .map(|((lo, hi), &e)| (lo.min(e), hi.max(e)))
        .collect();
    BandSet::from_intervals(raw, MIN_MERGE_TOL)
}

/// Raises the cutoff from `start` in steps of [`CUTOFF_STEP`] until the
/// lowest `bands` eigenvalues move by less than [`CUTOFF_CONVERGENCE_TOL`].
/// Returns the converged sample and the cutoff it was taken at.
pub fn converged_fiber_spectrum(
    potential: &FourierPotential,
    k: &QuasiMomentum,
    start: FiberTruncation,
    bands: usize,
) -> Result<(SpectrumSample, FiberTruncation)> {
    let mut trunc = FiberTruncation::new(start.cutoff().max(potential.max_frequency()).max(1))?;
    let mut previous = fiber_spectrum(potential, k, trunc, bands)?;
    while trunc.cutoff() < MAX_CUTOFF {
        let next_trunc = FiberTruncation(trunc.cutoff() + CUTOFF_STEP);
        let next = fiber_spectrum(potential, k, next_trunc, bands)?;
        let change = previous
            .eigenvalues
            .iter()
            .zip(&next.eigenvalues)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        previous = next;
        trunc = next_trunc;
        if change < CUTOFF_CONVERGENCE_TOL {
            return Ok((previous, trunc));
        }
    }
    Err(Error::InvalidArgument(format!("cutoff did not converge below N = {MAX_CUTOFF}")))
}

/// Period-`q` nearest-neighbour chain on a ring of `M` cells with unit
/// hopping and the given on-site energies.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteCell {
    onsite: Vec<f64>,
    cells: usize,
}

impl DiscreteCell {
    pub fn new(onsite: Vec<f64>, cells: usize) -> Result<Self> {
        if onsite.is_empty() || cells == 0 {
            return Err(Error::InvalidArgument("a discrete cell needs q >= 1 sites and M >= 1 cells".into()));
        }
        Ok(Self { onsite, cells })
    }

    pub fn period(&self) -> usize {
        self.onsite.len()
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn onsite(&self) -> &[f64] {
        &self.onsite
    }

    pub fn sites(&self) -> usize {
        self.period() * self.cells
    }
}

/// `q x q` fiber of a [`DiscreteCell`] at quasi-momentum `k`.
///
/// The bond leaving the cell picks up `exp(ik)`; couplings are accumulated,
/// so `q = 1` gives `onsite + 2cos k` and `q = 2` gives `1 + exp(-ik)` off
/// the diagonal.
pub fn discrete_fiber_matrix(cell: &DiscreteCell, k: f64) -> HermitianMatrix {
    let q = cell.period();
    let mut h = DMatrix::<Complex64>::zeros(q, q);
    for (j, &e) in cell.onsite.iter().enumerate() {
        h[(j, j)] += e;
    }
    for j in 0..q - 1 {
        h[(j, j + 1)] += 1.0;
        h[(j + 1, j)] += 1.0;
    }
    let phase = Complex64::from_polar(1.0, k);
    h[(q - 1, 0)] += phase;
    h[(0, q - 1)] += phase.conj();
    HermitianMatrix::new(h).expect("fiber matrix is Hermitian by construction")
}

/// The full `qM x qM` operator with periodic boundary conditions.
pub fn periodic_operator(cell: &DiscreteCell) -> HermitianMatrix {
    let n = cell.sites();
    let q = cell.period();
    let mut h = DMatrix::<f64>::zeros(n, n);
    for site in 0..n {
        h[(site, site)] += cell.onsite[site % q];
        let next = (site + 1) % n;
        h[(site, next)] += 1.0;
        h[(next, site)] += 1.0;
    }
    HermitianMatrix::from_real(h).expect("symmetric by construction")
}

/// Ascending spectrum of [`periodic_operator`] by direct diagonalization.
pub fn periodic_truncation_spectrum(cell: &DiscreteCell) -> Result<Vec<f64>> {
    eigenvalues(&periodic_operator(cell))
}

/// Fiber spectra at `k = 2πm/M`, `m = 0..M`.
pub fn fiber_samples(cell: &DiscreteCell) -> Result<Vec<SpectrumSample>> {
    uniform_k_points(cell.cells)
        .into_iter()
        .map(|k| {
            Ok(SpectrumSample {
                k: QuasiMomentum::one(k)?,
                eigenvalues: eigenvalues(&discrete_fiber_matrix(cell, k))?,
            })
        })
        .collect()
}

/// Sorted multiset union of the fiber spectra on the `M`-point grid.
pub fn fiber_union_spectrum(cell: &DiscreteCell) -> Result<Vec<f64>> {
    let mut all: Vec<f64> = fiber_samples(cell)?.into_iter().flat_map(|s| s.eigenvalues).collect();
    all.sort_by(f64::total_cmp);
    Ok(all)
}

/// Finite Bloch transform over the cell-shift group `Z_M`.
///
/// Block `m`, entry `j` is
/// `M^{-1/2} Σ_γ exp(2πi·m·γ/M) f[(j - qγ) mod qM]`; the map is unitary.
pub fn discrete_bloch_transform(f: &[Complex64], cell: &DiscreteCell) -> Result<Vec<Vec<Complex64>>> {
    let (q, cells, len) = (cell.period(), cell.cells, cell.sites());
    if f.len() != len {
        return Err(Error::LengthMismatch { expected: len, got: f.len() });
    }
    let norm = (cells as f64).sqrt().recip();
    let blocks = (0..cells)
        .map(|m| {
            (0..q)
                .map(|j| {
                    (0..cells)
                        .map(|g| {
                            let phase = Complex64::from_polar(1.0, TAU * ((m * g) % cells) as f64 / cells as f64);
                            let site = (j + len - (q * g) % len) % len;
                            phase * f[site]
                        })
                        .sum::<Complex64>()
                        * norm
                })
                .collect()
        })
        .collect();
    Ok(blocks)
}

/// Inverse of [`discrete_bloch_transform`].
pub fn inverse_discrete_bloch_transform(blocks: &[Vec<Complex64>], cell: &DiscreteCell) -> Result<Vec<Complex64>> {
    let (q, cells, len) = (cell.period(), cell.cells, cell.sites());
    if blocks.len() != cells {
        return Err(Error::LengthMismatch { expected: cells, got: blocks.len() });
    }
    if let Some(b) = blocks.iter().find(|b| b.len() != q) {
        return Err(Error::LengthMismatch { expected: q, got: b.len() });
    }
    let norm = (cells as f64).sqrt().recip();
    let mut f = vec![Complex64::new(0.0, 0.0); len];
    for (g, chunk) in (0..cells).map(|g| (g, (cells - g) % cells)) {
        // f[j - qγ] = f[j + q·chunk]
        for j in 0..q {
            let value: Complex64 = blocks
                .iter()
                .enumerate()
                .map(|(m, block)| {
                    Complex64::from_polar(1.0, -TAU * ((m * g) % cells) as f64 / cells as f64) * block[j]
                })
                .sum();
            f[j + q * chunk] = value * norm;
        }
    }
    Ok(f)
}
