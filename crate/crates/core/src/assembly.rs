//! Band sets, gaps, integrated density of states and band-measure sequences
//! assembled from sampled fiber spectra.

use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};

use crate::harper::{sweep, HarperParams, KGrid};
use crate::model::{RationalFlux, SpectrumSample};
use crate::{Error, Result};

/// Smallest merge tolerance, used when the sampled branches are flat.
pub const MIN_MERGE_TOL: f64 = 1e-9;
/// Merge tolerance as a multiple of the largest adjacent-k eigenvalue jump.
pub const MERGE_JUMP_FACTOR: f64 = 3.0;
pub const DEFAULT_IDS_POINTS: usize = 512;
/// Fraction of the spectral hull added on each side of the default IDS grid.
pub const IDS_PADDING: f64 = 0.05;

/// Finite union of sorted, strictly disjoint closed intervals.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BandSet {
    intervals: Vec<(f64, f64)>,
}

impl BandSet {
    /// Validates already-merged intervals: `a <= b` and `b_i < a_{i+1}`.
    pub fn new(intervals: Vec<(f64, f64)>) -> Result<Self> {
        if intervals.iter().any(|&(a, b)| !(a <= b) || !a.is_finite() || !b.is_finite()) {
            return Err(Error::InvalidArgument("band intervals need finite a <= b".into()));
        }
        if intervals.windows(2).any(|w| !(w[0].1 < w[1].0)) {
            return Err(Error::InvalidArgument("band intervals must be sorted and disjoint".into()));
        }
        Ok(Self { intervals })
    }

    /// Unions arbitrary closed intervals, coalescing any two whose distance
    /// is at most `eps`.
    pub fn from_intervals(mut raw: Vec<(f64, f64)>, eps: f64) -> Result<Self> {
        if !(eps > 0.0) {
            return Err(Error::InvalidArgument(format!("merge tolerance must be positive, got {eps}")));
        }
        for iv in &mut raw {
            if iv.0 > iv.1 {
                *iv = (iv.1, iv.0);
            }
        }
        raw.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(raw.len());
        for (a, b) in raw {
            match merged.last_mut() {
                Some(last) if a <= last.1 + eps => last.1 = last.1.max(b),
                _ => merged.push((a, b)),
            }
        }
        Self::new(merged)
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// `(min, max)` of the set, if nonempty.
    pub fn hull(&self) -> Option<(f64, f64)> {
        Some((self.intervals.first()?.0, self.intervals.last()?.1))
    }

    /// The band containing `energy`, if any.
    pub fn band_containing(&self, energy: f64) -> Option<(f64, f64)> {
        let i = self.intervals.partition_point(|&(_, b)| b < energy);
        self.intervals.get(i).copied().filter(|&(a, _)| a <= energy)
    }

    /// Distance from `energy` to the nearest band (0 inside a band).
    pub fn distance_to(&self, energy: f64) -> f64 {
        self.intervals
            .iter()
            .map(|&(a, b)| if energy < a { a - energy } else if energy > b { energy - b } else { 0.0 })
            .fold(f64::INFINITY, f64::min)
    }

    /// Image under `E -> -E`.
    pub fn negated(&self) -> Self {
        Self { intervals: self.intervals.iter().rev().map(|&(a, b)| (-b, -a)).collect() }
    }

    /// Same number of bands and every endpoint within `tol`.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.len() == other.len()
            && self
                .intervals
                .iter()
                .zip(&other.intervals)
                .all(|(x, y)| (x.0 - y.0).abs() <= tol && (x.1 - y.1).abs() <= tol)
    }
}

impl Serialize for BandSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.intervals.len()))?;
        for &(a, b) in &self.intervals {
            seq.serialize_element(&[a, b])?;
        }
        seq.end()
    }
}

/// Number of branches shared by every sample.
fn branch_count(samples: &[SpectrumSample]) -> usize {
    samples.iter().map(|s| s.eigenvalues.len()).min().unwrap_or(0)
}

/// `[min_k λ_i(k), max_k λ_i(k)]` for each branch `i`.
pub fn branch_intervals(samples: &[SpectrumSample]) -> Vec<(f64, f64)> {
    (0..branch_count(samples))
        .map(|i| {
            samples.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| {
                (lo.min(s.eigenvalues[i]), hi.max(s.eigenvalues[i]))
            })
        })
        .collect()
}

/// Discretized union over `k`: branch extrema, then coalescing within `eps`.
pub fn merge_intervals(samples: &[SpectrumSample], eps: f64) -> Result<BandSet> {
    if samples.is_empty() {
        return Err(Error::InvalidArgument("cannot merge an empty sample list".into()));
    }
    BandSet::from_intervals(branch_intervals(samples), eps)
}

/// Largest change of any branch between cyclically adjacent samples of a 1D
/// k-grid given in grid order.
pub fn max_adjacent_jump(samples: &[SpectrumSample]) -> f64 {
    let n = samples.len();
    if n < 2 {
        return 0.0;
    }
    let branches = branch_count(samples);
    (0..n)
        .flat_map(|i| {
            let (x, y) = (&samples[i].eigenvalues, &samples[(i + 1) % n].eigenvalues);
            (0..branches).map(move |b| (x[b] - y[b]).abs())
        })
        .fold(0.0, f64::max)
}

/// Per-branch version of [`max_adjacent_jump`].
pub fn branch_jumps(samples: &[SpectrumSample]) -> Vec<f64> {
    let n = samples.len();
    let mut jumps = vec![0.0_f64; branch_count(samples)];
    if n < 2 {
        return jumps;
    }
    for i in 0..n {
        let (x, y) = (&samples[i].eigenvalues, &samples[(i + 1) % n].eigenvalues);
        for (b, jump) in jumps.iter_mut().enumerate() {
            *jump = jump.max((x[b] - y[b]).abs());
        }
    }
    jumps
}

/// `max(3·jump, 1e-9)`.
pub fn merge_tolerance(max_jump: f64) -> f64 {
    (MERGE_JUMP_FACTOR * max_jump).max(MIN_MERGE_TOL)
}

/// Unions ordered branch ranges. Consecutive branches `i`, `i + 1` coalesce
/// when the gap between them is at most
/// `merge_tolerance(max(jump_i, jump_{i+1}))`, so a steep branch elsewhere in
/// the spectrum cannot close a gap between two flat ones.
pub fn merge_branches(branches: &[(f64, f64)], jumps: &[f64]) -> Result<BandSet> {
    if branches.is_empty() {
        return Err(Error::InvalidArgument("cannot merge an empty branch list".into()));
    }
    if branches.len() != jumps.len() {
        return Err(Error::LengthMismatch { expected: branches.len(), got: jumps.len() });
    }
    let mut merged: Vec<(f64, f64)> = Vec::new();
    let mut last_jump = 0.0;
    for (&(a, b), &jump) in branches.iter().zip(jumps) {
        match merged.last_mut() {
            Some(last) if a <= last.1 + merge_tolerance(jump.max(last_jump)) => {
                last.0 = last.0.min(a);
                last.1 = last.1.max(b);
            }
            _ => merged.push((a, b)),
        }
        last_jump = jump;
    }
    // branch ranges from a continuous family are ordered; fall back to a
    // plain union if they are not
    BandSet::new(merged.clone()).or_else(|_| BandSet::from_intervals(merged, MIN_MERGE_TOL))
}

/// Band set of a 1D k-sweep given in grid order, with per-branch merge
/// tolerances.
pub fn assemble_1d(samples: &[SpectrumSample]) -> Result<BandSet> {
    merge_branches(&branch_intervals(samples), &branch_jumps(samples))
}

/// Maximal open subintervals of `[lo, hi]` that miss every band.
pub fn gaps(bands: &BandSet, window: (f64, f64)) -> Result<Vec<(f64, f64)>> {
    let (lo, hi) = window;
    if !(lo < hi) {
        return Err(Error::InvalidArgument(format!("empty window [{lo}, {hi}]")));
    }
    let mut out = Vec::new();
    let mut cursor = lo;
    for &(a, b) in bands.intervals() {
        if b < lo {
            continue;
        }
        if a > hi {
            break;
        }
        if a > cursor {
            out.push((cursor, a));
        }
        cursor = cursor.max(b);
    }
    if cursor < hi {
        out.push((cursor, hi));
    }
    Ok(out)
}

pub fn lebesgue_measure(bands: &BandSet) -> f64 {
    bands.intervals().iter().map(|(a, b)| b - a).sum()
}

/// Eigenvalues closer than this to the counting energy get weight 1/2.
pub(crate) fn tie_tolerance(energy: f64) -> f64 {
    1e-9 * (1.0 + energy.abs())
}

/// Integrated density of states on an energy grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdsCurve {
    pub energies: Vec<f64>,
    pub values: Vec<f64>,
}

impl IdsCurve {
    pub fn value_at(&self, energy: f64) -> Option<f64> {
        self.energies.iter().position(|&e| e == energy).map(|i| self.values[i])
    }
}

/// `IDS(E) = #{eigenvalues <= E} / (q · #k)` from pooled fiber spectra.
pub fn ids_from_samples(samples: &[SpectrumSample], states_per_k: usize, energies: &[f64]) -> Result<IdsCurve> {
    if samples.is_empty() || energies.is_empty() || states_per_k == 0 {
        return Err(Error::InvalidArgument("IDS needs nonempty k- and energy grids".into()));
    }
    if energies.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidArgument("IDS energies must be strictly ascending".into()));
    }
    let mut pooled: Vec<f64> = samples.iter().flat_map(|s| s.eigenvalues.iter().copied()).collect();
    pooled.sort_by(f64::total_cmp);
    let total = (states_per_k * samples.len()) as f64;
    let values = energies
        .iter()
        .map(|&e| {
            let tol = tie_tolerance(e);
            let below = pooled.partition_point(|&x| x < e - tol);
            let through = pooled.partition_point(|&x| x <= e + tol);
            (below as f64 + 0.5 * (through - below) as f64) / total
        })
        .collect();
    Ok(IdsCurve { energies: energies.to_vec(), values })
}

/// `points` uniform energies over the hull of `bands` padded by 5% per side.
pub fn default_energy_grid(bands: &BandSet, points: usize) -> Result<Vec<f64>> {
    let (lo, hi) = bands.hull().ok_or_else(|| Error::InvalidArgument("empty band set".into()))?;
    if points < 2 {
        return Err(Error::InvalidArgument("energy grid needs at least 2 points".into()));
    }
    let pad = IDS_PADDING * (hi - lo).max(1e-12);
    let (lo, hi) = (lo - pad, hi + pad);
    Ok((0..points).map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64).collect())
}

/// IDS of the Harper operator; `energies = None` uses [`default_energy_grid`].
pub fn ids(params: &HarperParams, energies: Option<&[f64]>, grid: KGrid) -> Result<IdsCurve> {
    let sweep = sweep(params, grid)?;
    let default;
    let energies = match energies {
        Some(e) => e,
        None => {
            default = default_energy_grid(&sweep.bands, DEFAULT_IDS_POINTS)?;
            &default
        }
    };
    ids_from_samples(&sweep.samples, params.flux.q() as usize, energies)
}

/// Total band measure at one rational approximant.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasurePoint {
    pub flux: RationalFlux,
    pub measure: f64,
    pub bands: usize,
}

/// Band measure of the Harper spectrum along approximants of increasing `q`.
pub fn cantor_proxy(approximants: &[RationalFlux], lambda: f64, grid: KGrid) -> Result<Vec<MeasurePoint>> {
    if approximants.windows(2).any(|w| w[0].q() >= w[1].q()) {
        return Err(Error::InvalidArgument("approximants must have strictly increasing denominators".into()));
    }
    approximants
        .iter()
        .map(|&flux| {
            let sweep = sweep(&HarperParams::new(flux, lambda)?, grid)?;
            Ok(MeasurePoint { flux, measure: lebesgue_measure(&sweep.bands), bands: sweep.bands.len() })
        })
        .collect()
}
