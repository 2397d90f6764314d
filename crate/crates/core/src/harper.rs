//! Harper (almost-Mathieu) operator at rational flux and Hofstadter
//! butterflies.
//!
//! At flux `p/q` the magnetic translations commute on the `q`-fold enlarged
//! cell, so the operator fibers over a two-torus of quasi-momenta into
//! `q x q` Bloch matrices (Landau gauge): `k2` enters the on-site cosine and
//! `k1` the phase of the bond that closes the cell.

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::assembly::{branch_intervals, merge_branches, merge_tolerance, BandSet};
use crate::farey::reduced_fractions;
use crate::model::{eig_hermitian, eigenvalues, grid_2d, HermitianMatrix, QuasiMomentum, RationalFlux, SpectrumSample};
use crate::{Error, Result};

pub const DEFAULT_GRID: usize = 64;

/// Flux, coupling `λ` (λ = 1 is the Hofstadter case) and phase offset `θ`.
///
/// `θ` only affects the direct-space operator; in the Bloch matrices it is a
/// shift of `k2` and drops out of the union over the zone.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HarperParams {
    pub flux: RationalFlux,
    pub lambda: f64,
    pub theta: f64,
}

impl HarperParams {
    pub fn new(flux: RationalFlux, lambda: f64) -> Result<Self> {
        Self::with_theta(flux, lambda, 0.0)
    }

    pub fn with_theta(flux: RationalFlux, lambda: f64, theta: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidArgument(format!("lambda must be positive, got {lambda}")));
        }
        if !(0.0..TAU).contains(&theta) {
            return Err(Error::InvalidArgument(format!("theta must lie in [0, 2π), got {theta}")));
        }
        Ok(Self { flux, lambda, theta })
    }
}

/// Uniform `n1 x n2` grid over the magnetic Brillouin zone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct KGrid {
    pub n1: usize,
    pub n2: usize,
}

impl KGrid {
    pub fn new(n1: usize, n2: usize) -> Result<Self> {
        if n1 == 0 || n2 == 0 {
            return Err(Error::InvalidArgument("k-grid sizes must be at least 1".into()));
        }
        Ok(Self { n1, n2 })
    }

    pub fn square(n: usize) -> Result<Self> {
        Self::new(n, n)
    }

    pub fn points(&self) -> Vec<QuasiMomentum> {
        grid_2d(self.n1, self.n2)
    }

    pub fn len(&self) -> usize {
        self.n1 * self.n2
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl Default for KGrid {
    fn default() -> Self {
        Self { n1: DEFAULT_GRID, n2: DEFAULT_GRID }
    }
}

/// `q x q` Bloch matrix: diagonal `2λ·cos(k2 + 2πjp/q)`, unit hopping, and
/// `exp(∓ik1)` on the corners. Couplings add up, so `q = 1` yields
/// `2cos k1 + 2λ cos k2`.
pub fn harper_bloch_matrix(params: &HarperParams, k: &QuasiMomentum) -> Result<HermitianMatrix> {
    k.expect_dim(2)?;
    let (k1, k2) = (k.components()[0], k.components()[1]);
    let q = params.flux.q() as usize;
    let alpha = params.flux.value();
    let mut h = DMatrix::<Complex64>::zeros(q, q);
    for j in 0..q {
        h[(j, j)] += 2.0 * params.lambda * (k2 + TAU * j as f64 * alpha).cos();
    }
    for j in 0..q - 1 {
        h[(j, j + 1)] += 1.0;
        h[(j + 1, j)] += 1.0;
    }
    let phase = Complex64::from_polar(1.0, k1);
    h[(0, q - 1)] += phase.conj();
    h[(q - 1, 0)] += phase;
    HermitianMatrix::new(h)
}

/// Everything computed on one k-grid sweep at fixed parameters.
#[derive(Debug, Clone)]
pub struct HarperSweep {
    pub params: HarperParams,
    pub grid: KGrid,
    /// Row-major in `(k1, k2)`.
    pub samples: Vec<SpectrumSample>,
    /// Per-branch `[min, max]` over the grid, `q` entries.
    pub branches: Vec<(f64, f64)>,
    /// Largest change of each branch between grid neighbours.
    pub jumps: Vec<f64>,
    pub max_jump: f64,
    /// Tolerance implied by `max_jump`; an upper bound on the per-branch
    /// tolerances actually used for merging.
    pub merge_tol: f64,
    pub bands: BandSet,
}

/// Diagonalizes every Bloch matrix on the grid and merges the branches.
pub fn sweep(params: &HarperParams, grid: KGrid) -> Result<HarperSweep> {
    KGrid::new(grid.n1, grid.n2)?;
    let samples = grid
        .points()
        .into_par_iter()
        .map(|k| {
            let eigenvalues = eigenvalues(&harper_bloch_matrix(params, &k)?)
                .map_err(|e| e.context(format!("flux {} at k = {:?}", params.flux, k.components())))?;
            Ok(SpectrumSample { k, eigenvalues })
        })
        .collect::<Result<Vec<_>>>()?;
    let jumps = grid_jumps(&samples, grid);
    let branches = branch_intervals(&samples);
    let bands = merge_branches(&branches, &jumps)?;
    let max_jump = jumps.iter().copied().fold(0.0, f64::max);
    let merge_tol = merge_tolerance(max_jump);
    Ok(HarperSweep { params: *params, grid, samples, branches, jumps, max_jump, merge_tol, bands })
}

/// Largest change of each branch between neighbours along either grid axis,
/// with periodic wrap-around.
fn grid_jumps(samples: &[SpectrumSample], grid: KGrid) -> Vec<f64> {
    let at = |i1: usize, i2: usize| &samples[i1 * grid.n2 + i2].eigenvalues;
    let mut jumps = vec![0.0_f64; samples.first().map_or(0, |s| s.eigenvalues.len())];
    for i1 in 0..grid.n1 {
        for i2 in 0..grid.n2 {
            let here = at(i1, i2);
            for other in [at((i1 + 1) % grid.n1, i2), at(i1, (i2 + 1) % grid.n2)] {
                for ((jump, a), b) in jumps.iter_mut().zip(here).zip(other) {
                    *jump = jump.max((a - b).abs());
                }
            }
        }
    }
    jumps
}

/// Union of the Bloch spectra over the grid.
pub fn harper_spectrum(params: &HarperParams, grid: KGrid) -> Result<BandSet> {
    sweep(params, grid).map(|s| s.bands)
}

/// Direct-space spectrum of the open chain, split into bulk and edge modes.
#[derive(Debug, Clone)]
pub struct DirectSpectrum {
    /// All `L` eigenvalues, ascending.
    pub eigenvalues: Vec<f64>,
    /// Eigenvalues whose eigenvector keeps at least half its weight away
    /// from the outer `2q` sites at either end.
    pub bulk: Vec<f64>,
    pub edge: Vec<f64>,
}

/// `L x L` tridiagonal Harper matrix with diagonal `2λ·cos(2πnp/q + θ)`,
/// unit off-diagonal and open ends.
pub fn direct_space_matrix(params: &HarperParams, sites: usize, theta: f64) -> HermitianMatrix {
    let alpha = params.flux.value();
    let mut h = DMatrix::<f64>::zeros(sites, sites);
    for n in 0..sites {
        h[(n, n)] = 2.0 * params.lambda * (TAU * n as f64 * alpha + theta).cos();
        if n + 1 < sites {
            h[(n, n + 1)] = 1.0;
            h[(n + 1, n)] = 1.0;
        }
    }
    HermitianMatrix::from_real(h).expect("symmetric by construction")
}

/// Ascending eigenvalues of [`direct_space_matrix`].
pub fn direct_space_harper(params: &HarperParams, sites: usize, theta: f64) -> Result<Vec<f64>> {
    check_sites(params, sites)?;
    eigenvalues(&direct_space_matrix(params, sites, theta))
}

/// [`direct_space_harper`] with edge states separated out: an eigenvector
/// with more than half its weight in the outer `2q` sites at either end
/// counts as an edge mode.
pub fn direct_space_harper_bulk(params: &HarperParams, sites: usize, theta: f64) -> Result<DirectSpectrum> {
    check_sites(params, sites)?;
    let eig = eig_hermitian(&direct_space_matrix(params, sites, theta), true)?;
    let vectors = eig.vectors.expect("vectors requested");
    let outer = (2 * params.flux.q() as usize).min(sites);
    let (mut bulk, mut edge) = (Vec::new(), Vec::new());
    for (i, &value) in eig.values.iter().enumerate() {
        let col = vectors.column(i);
        let edge_weight: f64 = (0..sites)
            .filter(|&n| n < outer || n >= sites - outer)
            .map(|n| col[n].norm_sqr())
            .sum();
        if edge_weight > 0.5 {
            edge.push(value);
        } else {
            bulk.push(value);
        }
    }
    Ok(DirectSpectrum { eigenvalues: eig.values, bulk, edge })
}

fn check_sites(params: &HarperParams, sites: usize) -> Result<()> {
    if sites < params.flux.q() as usize {
        return Err(Error::InvalidArgument(format!("need L >= q = {}, got L = {sites}", params.flux.q())));
    }
    Ok(())
}

/// One flux of a butterfly.
#[derive(Debug, Clone, Serialize)]
pub struct ButterflyRow {
    pub flux: RationalFlux,
    /// Merged spectrum.
    pub bands: BandSet,
    /// Per-branch `[min, max]`, one per Bloch eigenvalue.
    pub branches: Vec<[f64; 2]>,
    pub merge_tol: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ButterflyData {
    pub lambda: f64,
    pub grid: KGrid,
    pub rows: Vec<ButterflyRow>,
}

impl ButterflyData {
    pub fn row(&self, flux: RationalFlux) -> Option<&ButterflyRow> {
        self.rows.iter().find(|r| r.flux == flux)
    }
}

/// Spectra for every reduced `p/q` in `[0, 1)` with `q <= max_q`, ascending
/// in flux.
pub fn butterfly(max_q: u64, lambda: f64, grid: KGrid) -> Result<ButterflyData> {
    if max_q == 0 {
        return Err(Error::InvalidArgument("max q must be at least 1".into()));
    }
    let rows = reduced_fractions(max_q)
        .into_par_iter()
        .map(|flux| {
            let s = sweep(&HarperParams::new(flux, lambda)?, grid)?;
            Ok(ButterflyRow {
                flux,
                bands: s.bands,
                branches: s.branches.iter().map(|&(a, b)| [a, b]).collect(),
                merge_tol: s.merge_tol,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ButterflyData { lambda, grid, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::SQRT_2;

    fn flux(p: u64, q: u64) -> RationalFlux {
        RationalFlux::new(p, q).unwrap()
    }

    #[test]
    fn trivial_flux_is_scalar() {
        let params = HarperParams::new(RationalFlux::zero(), 1.0).unwrap();
        let h = harper_bloch_matrix(&params, &QuasiMomentum::two(0.0, 0.0).unwrap()).unwrap();
        assert_eq!(h.dim(), 1);
        assert_eq!(h.as_matrix()[(0, 0)].re, 4.0);
        let (k1, k2) = (0.7, 2.1);
        let params = HarperParams::new(RationalFlux::zero(), 0.3).unwrap();
        let h = harper_bloch_matrix(&params, &QuasiMomentum::two(k1, k2).unwrap()).unwrap();
        assert!((h.as_matrix()[(0, 0)].re - (2.0 * k1.cos() + 0.6 * k2.cos())).abs() < 1e-15);
    }

    #[test]
    fn half_flux_closed_form() {
        let params = HarperParams::new(flux(1, 2), 1.0).unwrap();
        for (k1, k2) in [(0.0, 0.0), (0.4, 1.3), (3.0, 5.5)] {
            let vals = eigenvalues(&harper_bloch_matrix(&params, &QuasiMomentum::two(k1, k2).unwrap()).unwrap()).unwrap();
            let e = (4.0 * k2.cos().powi(2) + 2.0 + 2.0 * k1.cos()).sqrt();
            assert!((vals[0] + e).abs() < 1e-12 && (vals[1] - e).abs() < 1e-12);
        }
    }

    #[test]
    fn parameter_validation() {
        assert!(HarperParams::new(RationalFlux::zero(), 0.0).is_err());
        assert!(HarperParams::new(RationalFlux::zero(), f64::NAN).is_err());
        assert!(HarperParams::with_theta(RationalFlux::zero(), 1.0, TAU).is_err());
        assert!(KGrid::new(0, 4).is_err());
        let p = HarperParams::new(flux(1, 3), 1.0).unwrap();
        assert!(direct_space_harper(&p, 2, 0.0).is_err());
        assert!(harper_bloch_matrix(&p, &QuasiMomentum::one(0.0).unwrap()).is_err());
        assert!(butterfly(0, 1.0, KGrid::default()).is_err());
    }

    #[test]
    fn free_chain_limit() {
        let p = HarperParams::new(RationalFlux::zero(), 1e-8).unwrap();
        let vals = direct_space_harper(&p, 200, 0.0).unwrap();
        assert!(vals[0] >= -2.0 - 1e-6 && vals[199] <= 2.0 + 1e-6);
    }

    #[test]
    fn half_flux_bands_touch() {
        let s = sweep(&HarperParams::new(flux(1, 2), 1.0).unwrap(), KGrid::default()).unwrap();
        assert_eq!(s.bands.len(), 1);
        let (lo, hi) = s.bands.hull().unwrap();
        assert!((lo + 2.0 * SQRT_2).abs() < 1e-6 && (hi - 2.0 * SQRT_2).abs() < 1e-6);
        assert!(s.branches[0].1.abs() < 1e-6 && s.branches[1].0.abs() < 1e-6);
    }
}
