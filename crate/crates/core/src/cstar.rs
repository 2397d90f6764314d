//! Finite-dimensional checks of the rotation-algebra structure behind the
//! Harper model.
//!
//! At flux `p/q` the algebra generated by `U`, `V` with `UV = ωVU`,
//! `ω = exp(2πip/q)`, has the `q`-dimensional clock and shift
//! representation. Elements are then matrix-valued functions on the
//! Brillouin zone and the canonical trace is the zone average of the
//! normalized matrix trace. Spectral projections onto energies below a gap
//! have integer rank at every `k`, so their trace lands on `Z/q`: a nonzero
//! projection has trace at least `1/q`, which bounds the number of bands
//! by `q`.

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::assembly::tie_tolerance;
use crate::harper::{harper_bloch_matrix, sweep, HarperParams, HarperSweep, KGrid};
use crate::model::{HermitianMatrix, RationalFlux};
use crate::{Error, Result};

/// Allowed distance of a gap projection trace from `Z/q`.
pub const KADISON_TOL: f64 = 1e-6;

/// Unitaries `U`, `V` with `UV = ω·VU`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectivePair {
    pub u: DMatrix<Complex64>,
    pub v: DMatrix<Complex64>,
    pub omega: Complex64,
}

impl ProjectivePair {
    pub fn dim(&self) -> usize {
        self.u.nrows()
    }

    /// `‖UV − ωVU‖` (Frobenius).
    pub fn relation_residual(&self) -> f64 {
        (&self.u * &self.v - (&self.v * &self.u) * self.omega).norm()
    }

    /// `max(‖UU* − I‖, ‖VV* − I‖)` (Frobenius).
    pub fn unitarity_residual(&self) -> f64 {
        let n = self.dim();
        let id = DMatrix::<Complex64>::identity(n, n);
        let ru = (&self.u * self.u.adjoint() - &id).norm();
        let rv = (&self.v * self.v.adjoint() - &id).norm();
        ru.max(rv)
    }
}

/// Clock `U = diag(1, ω, …, ω^{q−1})` and shift `V e_j = e_{j+1 mod q}`.
pub fn clock_shift(flux: RationalFlux) -> ProjectivePair {
    let q = flux.q() as usize;
    let omega = flux.omega();
    // reduce jp mod q before exponentiating so ω^j carries no accumulated phase error
    let power = |j: usize| {
        let r = (j as u64 * flux.p()) % flux.q();
        Complex64::from_polar(1.0, TAU * r as f64 / flux.q() as f64)
    };
    let u = DMatrix::from_fn(q, q, |i, j| if i == j { power(j) } else { Complex64::new(0.0, 0.0) });
    let v = DMatrix::from_fn(q, q, |i, j| {
        if i == (j + 1) % q {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    ProjectivePair { u, v, omega }
}

/// `(1/q)·mean_k tr a(k)` for an element given on a k-grid.
pub fn canonical_trace(element: &[HermitianMatrix]) -> Result<f64> {
    let q = element
        .first()
        .ok_or_else(|| Error::InvalidArgument("canonical trace needs a nonempty grid".into()))?
        .dim();
    if let Some(m) = element.iter().find(|m| m.dim() != q) {
        return Err(Error::LengthMismatch { expected: q, got: m.dim() });
    }
    let sum: f64 = element.iter().map(HermitianMatrix::trace).sum();
    Ok(sum / (q as f64 * element.len() as f64))
}

/// The Harper Hamiltonian as an element: its Bloch matrices on the grid.
pub fn harper_element(params: &HarperParams, grid: KGrid) -> Result<Vec<HermitianMatrix>> {
    grid.points().par_iter().map(|k| harper_bloch_matrix(params, k)).collect()
}

/// Trace of the spectral projection below `energy`, which must lie in a gap
/// (or outside the spectrum).
pub fn spectral_projection_trace(params: &HarperParams, energy: f64, grid: KGrid) -> Result<f64> {
    projection_trace_from_sweep(&sweep(params, grid)?, energy)
}

/// As [`spectral_projection_trace`] on an existing sweep; counts per k.
pub fn projection_trace_from_sweep(sweep: &HarperSweep, energy: f64) -> Result<f64> {
    if let Some((lo, hi)) = sweep.bands.band_containing(energy) {
        return Err(Error::EnergyInBand { energy, lo, hi });
    }
    let tol = tie_tolerance(energy);
    let q = sweep.params.flux.q() as f64;
    let total: f64 = sweep
        .samples
        .iter()
        .map(|s| {
            s.eigenvalues
                .iter()
                .map(|&e| if e < energy - tol { 1.0 } else if e <= energy + tol { 0.5 } else { 0.0 })
                .sum::<f64>()
        })
        .sum();
    Ok(total / (q * sweep.samples.len() as f64))
}

/// Largest number of bands compatible with trace quantization: `q`.
pub fn kadison_band_bound(flux: RationalFlux) -> u64 {
    flux.q()
}

/// Distance of `value` from the nearest multiple of `1/q`.
pub fn distance_from_lattice(value: f64, q: u64) -> f64 {
    let scaled = value * q as f64;
    (scaled - scaled.round()).abs() / q as f64
}

/// Trace of the projection in one gap.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapTrace {
    pub gap: (f64, f64),
    pub energy: f64,
    pub trace: f64,
    pub lattice_distance: f64,
}

/// Quantization report for every gap inside the spectral hull.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KadisonReport {
    pub flux: RationalFlux,
    pub band_count: usize,
    pub band_bound: u64,
    pub gaps: Vec<GapTrace>,
}

impl KadisonReport {
    pub fn holds(&self, tol: f64) -> bool {
        self.band_count as u64 <= self.band_bound && self.gaps.iter().all(|g| g.lattice_distance <= tol)
    }
}

/// Evaluates the projection trace at the midpoint of every internal gap.
pub fn kadison_report(sweep: &HarperSweep) -> Result<KadisonReport> {
    let q = sweep.params.flux.q();
    let gaps = sweep
        .bands
        .intervals()
        .windows(2)
        .map(|w| {
            let gap = (w[0].1, w[1].0);
            let energy = 0.5 * (gap.0 + gap.1);
            let trace = projection_trace_from_sweep(sweep, energy)?;
            Ok(GapTrace { gap, energy, trace, lattice_distance: distance_from_lattice(trace, q) })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(KadisonReport { flux: sweep.params.flux, band_count: sweep.bands.len(), band_bound: kadison_band_bound(sweep.params.flux), gaps })
}
