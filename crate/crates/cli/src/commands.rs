use bandscope::assembly::{
    branch_intervals, cantor_proxy, default_energy_grid, gaps, ids_from_samples, BandSet,
    MeasurePoint,
};
use bandscope::bloch::{
    band_sweep, continuum_bands, discrete_bloch_transform, fiber_union_spectrum, periodic_truncation_spectrum, DiscreteCell,
    FiberTruncation,
};
use bandscope::cstar::{
    canonical_trace, clock_shift, harper_element, kadison_report, projection_trace_from_sweep, GapTrace,
    KADISON_TOL,
};
use bandscope::farey::fibonacci_approximants;
use bandscope::harper::{butterfly, direct_space_harper_bulk, sweep, HarperParams, KGrid};
use bandscope::model::{HermitianMatrix, RationalFlux};
use bandscope::Result;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{AlgebraArgs, BandsArgs, ButterflyArgs, CantorArgs, Command, IdsArgs, OracleArgs};

pub const UNITARITY_TOL: f64 = 1e-12;
pub const UNION_TOL: f64 = 1e-10;
pub const DIRECT_SPACE_TOL: f64 = 1e-2;
pub const DIRECT_SPACE_FRACTION: f64 = 0.99;

#[derive(Debug, Serialize)]
#[serde(untagged)]
pub enum Report {
    Bands(BandsReport),
    Butterfly(ButterflyReport),
    Ids(IdsReport),
    Algebra(AlgebraReport),
    Oracle(OracleReport),
    Cantor(CantorReport),
}

impl Report {
    /// Whether every check carried by the report passed.
    pub fn passed(&self) -> bool {
        match self {
            Report::Butterfly(r) => r.checks.all_passed,
            Report::Algebra(r) => r.passed,
            Report::Oracle(r) => r.passed,
            _ => true,
        }
    }
}

pub fn run(command: &Command, seed: u64) -> Result<Report> {
    Ok(match command {
        Command::Bands(args) => Report::Bands(bands(args)?),
        Command::Butterfly(args) => Report::Butterfly(butterfly_report(args)?),
        Command::Ids(args) => Report::Ids(ids(args)?),
        Command::AlgebraCheck(args) => Report::Algebra(algebra(args)?),
        Command::OracleCheck(args) => Report::Oracle(oracle(args, seed)?),
        Command::Cantor(args) => Report::Cantor(cantor(args)?),
    })
}

#[derive(Debug, Serialize)]
pub struct BandSample {
    pub k: f64,
    pub energies: Vec<f64>,
}

#[derive(Debug, Serialize)]
pub struct BandsReport {
    pub bands: BandSet,
    pub gaps: Vec<[f64; 2]>,
    pub branches: Vec<[f64; 2]>,
    pub samples: Vec<BandSample>,
}

fn bands(args: &BandsArgs) -> Result<BandsReport> {
    let trunc = FiberTruncation::new(args.cutoff)?;
    let samples = band_sweep(&args.potential.potential, trunc, args.bands, args.kpoints)?;
    let bands = continuum_bands(&args.potential.potential, trunc, &samples)?;
    let gap_list = match bands.hull() {
        Some(hull) if hull.0 < hull.1 => gaps(&bands, hull)?,
        _ => Vec::new(),
    };
    Ok(BandsReport {
        gaps: gap_list.into_iter().map(|(a, b)| [a, b]).collect(),
        branches: branch_intervals(&samples).into_iter().map(|(a, b)| [a, b]).collect(),
        samples: samples
            .into_iter()
            .map(|s| BandSample { k: s.k.components()[0], energies: s.eigenvalues })
            .collect(),
        bands,
    })
}

#[derive(Debug, Serialize)]
pub struct ButterflyRowReport {
    pub flux: RationalFlux,
    pub alpha: f64,
    pub bands: BandSet,
    pub branches: Vec<[f64; 2]>,
    pub merge_tol: f64,
    pub band_bound: u64,
    pub negation_symmetric: bool,
    pub reflection_symmetric: bool,
}

#[derive(Debug, Serialize)]
pub struct ButterflyChecks {
    pub band_count_within_bound: bool,
    pub negation_symmetric: bool,
    pub reflection_symmetric: bool,
    pub all_passed: bool,
}

#[derive(Debug, Serialize)]
pub struct ButterflyReport {
    pub lambda: f64,
    pub kgrid: usize,
    pub rows: Vec<ButterflyRowReport>,
    pub checks: ButterflyChecks,
}

fn butterfly_report(args: &ButterflyArgs) -> Result<ButterflyReport> {
    let data = butterfly(args.max_q, args.lambda, KGrid::square(args.kgrid)?)?;
    let rows: Vec<ButterflyRowReport> = data
        .rows
        .iter()
        .map(|row| {
            let mirror = data.row(row.flux.reflected()).expect("reflected flux has the same denominator");
            ButterflyRowReport {
                flux: row.flux,
                alpha: row.flux.value(),
                bands: row.bands.clone(),
                branches: row.branches.clone(),
                merge_tol: row.merge_tol,
                band_bound: row.flux.q(),
                negation_symmetric: row.bands.approx_eq(&row.bands.negated(), row.merge_tol),
                reflection_symmetric: row.bands.approx_eq(&mirror.bands, row.merge_tol.max(mirror.merge_tol)),
            }
        })
        .collect();
    let band_count_within_bound = rows.iter().all(|r| r.bands.len() as u64 <= r.band_bound);
    let negation_symmetric = rows.iter().all(|r| r.negation_symmetric);
    let reflection_symmetric = rows.iter().all(|r| r.reflection_symmetric);
    Ok(ButterflyReport {
        lambda: args.lambda,
        kgrid: args.kgrid,
        rows,
        checks: ButterflyChecks {
            band_count_within_bound,
            negation_symmetric,
            reflection_symmetric,
            all_passed: band_count_within_bound && negation_symmetric && reflection_symmetric,
        },
    })
}

#[derive(Debug, Serialize)]
pub struct IdsGap {
    pub lo: f64,
    pub hi: f64,
    pub trace: f64,
}

#[derive(Debug, Serialize)]
pub struct IdsReport {
    pub flux: RationalFlux,
    pub bands: BandSet,
    pub energies: Vec<f64>,
    pub values: Vec<f64>,
    pub gaps: Vec<IdsGap>,
}

fn ids(args: &IdsArgs) -> Result<IdsReport> {
    let params = HarperParams::new(args.flux, args.lambda)?;
    let s = sweep(&params, KGrid::square(args.kgrid)?)?;
    let energies = default_energy_grid(&s.bands, args.points)?;
    let curve = ids_from_samples(&s.samples, args.flux.q() as usize, &energies)?;
    let gaps = s
        .bands
        .intervals()
        .windows(2)
        .map(|w| {
            let trace = projection_trace_from_sweep(&s, 0.5 * (w[0].1 + w[1].0))?;
            Ok(IdsGap { lo: w[0].1, hi: w[1].0, trace })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(IdsReport { flux: args.flux, bands: s.bands, energies: curve.energies, values: curve.values, gaps })
}

#[derive(Debug, Serialize)]
pub struct AlgebraReport {
    pub flux: RationalFlux,
    pub q: u64,
    pub omega: [f64; 2],
    pub relation_residual: f64,
    pub unitarity_residual: f64,
    pub trace_identity: f64,
    pub trace_harper: f64,
    pub trace_harper_squared: f64,
    pub band_count: usize,
    pub band_bound: u64,
    pub gap_traces: Vec<GapTrace>,
    pub kadison_tol: f64,
    pub passed: bool,
}

fn algebra(args: &AlgebraArgs) -> Result<AlgebraReport> {
    let pair = clock_shift(args.flux);
    let grid = KGrid::square(args.kgrid)?;
    let params = HarperParams::new(args.flux, args.lambda)?;
    let element = harper_element(&params, grid)?;
    let squared: Vec<HermitianMatrix> = element.iter().map(HermitianMatrix::square).collect();
    let identity = vec![HermitianMatrix::identity(args.flux.q() as usize); grid.len()];
    let report = kadison_report(&sweep(&params, grid)?)?;
    let relation_residual = pair.relation_residual();
    let unitarity_residual = pair.unitarity_residual();
    let passed = relation_residual <= 1e-12 && unitarity_residual <= 1e-12 && report.holds(KADISON_TOL);
    Ok(AlgebraReport {
        flux: args.flux,
        q: args.flux.q(),
        omega: [pair.omega.re, pair.omega.im],
        relation_residual,
        unitarity_residual,
        trace_identity: canonical_trace(&identity)?,
        trace_harper: canonical_trace(&element)?,
        trace_harper_squared: canonical_trace(&squared)?,
        band_count: report.band_count,
        band_bound: report.band_bound,
        gap_traces: report.gaps,
        kadison_tol: KADISON_TOL,
        passed,
    })
}

#[derive(Debug, Serialize)]
pub struct CheckResult {
    pub max_error: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Serialize)]
pub struct DirectSpaceResult {
    pub flux: RationalFlux,
    pub sites: usize,
    pub bulk: usize,
    pub edge: usize,
    pub within: usize,
    pub fraction: f64,
    pub distance_tol: f64,
    pub required_fraction: f64,
    pub passed: bool,
}

#[derive(Debug, Serialize)]
pub struct OracleReport {
    pub trials: usize,
    pub unitarity: CheckResult,
    pub fiber_union: CheckResult,
    pub direct_space: DirectSpaceResult,
    pub passed: bool,
}

fn oracle(args: &OracleArgs, seed: u64) -> Result<OracleReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut unitarity_error = 0.0_f64;
    for _ in 0..args.trials {
        let cell = DiscreteCell::new(vec![0.0; rng.random_range(1..=4)], rng.random_range(1..=16))?;
        let f: Vec<Complex64> = (0..cell.sites())
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let norm: f64 = f.iter().map(|z| z.norm_sqr()).sum();
        let transformed: f64 = discrete_bloch_transform(&f, &cell)?.iter().flatten().map(|z| z.norm_sqr()).sum();
        unitarity_error = unitarity_error.max((norm - transformed).abs() / norm.max(1.0));
    }

    let mut union_error = 0.0_f64;
    for _ in 0..args.trials {
        let q = rng.random_range(1..=4);
        let onsite = (0..q).map(|_| rng.random_range(-2.0..2.0)).collect();
        let cell = DiscreteCell::new(onsite, rng.random_range(1..=12))?;
        let direct = periodic_truncation_spectrum(&cell)?;
        let union = fiber_union_spectrum(&cell)?;
        for (a, b) in direct.iter().zip(&union) {
            union_error = union_error.max((a - b).abs());
        }
    }

    let params = HarperParams::new(args.flux, args.lambda)?;
    let bands = sweep(&params, KGrid::square(args.kgrid)?)?.bands;
    let direct = direct_space_harper_bulk(&params, args.sites, 0.0)?;
    let within = direct.bulk.iter().filter(|&&e| bands.distance_to(e) <= DIRECT_SPACE_TOL).count();
    let fraction = within as f64 / direct.bulk.len().max(1) as f64;

    let unitarity = CheckResult {
        max_error: unitarity_error,
        tolerance: UNITARITY_TOL,
        passed: unitarity_error <= UNITARITY_TOL,
    };
    let fiber_union = CheckResult { max_error: union_error, tolerance: UNION_TOL, passed: union_error <= UNION_TOL };
    let direct_space = DirectSpaceResult {
        flux: args.flux,
        sites: args.sites,
        bulk: direct.bulk.len(),
        edge: direct.edge.len(),
        within,
        fraction,
        distance_tol: DIRECT_SPACE_TOL,
        required_fraction: DIRECT_SPACE_FRACTION,
        passed: fraction >= DIRECT_SPACE_FRACTION,
    };
    let passed = unitarity.passed && fiber_union.passed && direct_space.passed;
    Ok(OracleReport { trials: args.trials, unitarity, fiber_union, direct_space, passed })
}

#[derive(Debug, Serialize)]
pub struct CantorReport {
    pub lambda: f64,
    pub kgrid: usize,
    pub points: Vec<MeasurePoint>,
}

fn cantor(args: &CantorArgs) -> Result<CantorReport> {
    let approximants = match args.fibonacci {
        Some(n) => fibonacci_approximants(n),
        None if args.approximants.is_empty() => fibonacci_approximants(6),
        None => args.approximants.clone(),
    };
    let points = cantor_proxy(&approximants, args.lambda, KGrid::square(args.kgrid)?)?;
    Ok(CantorReport { lambda: args.lambda, kgrid: args.kgrid, points })
}
