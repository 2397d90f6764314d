use std::path::PathBuf;

use bandscope::model::{FourierPotential, RationalFlux};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Serialize, Serializer};

/// Spectra of periodic and magnetic lattice operators.
#[derive(Debug, Parser, Serialize)]
#[command(name = "bandscope", version)]
pub struct RunConfig {
    #[command(subcommand)]
    #[serde(flatten)]
    pub command: Command,

    /// Output file; standard output when omitted.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,

    #[arg(long, short, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Seed for randomized checks.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Band structure of a 1D periodic Schrödinger operator.
    Bands(BandsArgs),
    /// Harper spectra for every reduced flux p/q with q <= max-q.
    Butterfly(ButterflyArgs),
    /// Integrated density of states of the Harper operator.
    Ids(IdsArgs),
    /// Clock/shift relations, canonical trace and gap-trace quantization.
    AlgebraCheck(AlgebraArgs),
    /// Randomized Bloch-decomposition and direct-space oracles.
    OracleCheck(OracleArgs),
    /// Band measure along rational approximants.
    Cantor(CantorArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct BandsArgs {
    /// Fourier modes as comma-separated `n:re[,im]` pairs.
    #[arg(long, value_parser = parse_potential, default_value = "")]
    #[serde(serialize_with = "display")]
    pub potential: PotentialArg,

    /// Plane-wave cutoff N (basis size 2N + 1).
    #[arg(long, default_value_t = bandscope::bloch::DEFAULT_CUTOFF)]
    pub cutoff: usize,

    #[arg(long, default_value_t = bandscope::bloch::DEFAULT_K_POINTS)]
    pub kpoints: usize,

    #[arg(long, default_value_t = bandscope::bloch::DEFAULT_BANDS)]
    pub bands: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct ButterflyArgs {
    #[arg(long, default_value_t = 20)]
    pub max_q: u64,

    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,

    /// Points per axis of the magnetic Brillouin zone grid.
    #[arg(long, default_value_t = bandscope::harper::DEFAULT_GRID)]
    pub kgrid: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct IdsArgs {
    #[arg(long, value_parser = parse_flux)]
    pub flux: RationalFlux,

    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,

    #[arg(long, default_value_t = bandscope::harper::DEFAULT_GRID)]
    pub kgrid: usize,

    /// Number of energies in the padded spectral hull.
    #[arg(long, default_value_t = bandscope::assembly::DEFAULT_IDS_POINTS)]
    pub points: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct AlgebraArgs {
    #[arg(long, value_parser = parse_flux)]
    pub flux: RationalFlux,

    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,

    #[arg(long, default_value_t = bandscope::harper::DEFAULT_GRID)]
    pub kgrid: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct OracleArgs {
    /// Random vectors and random operators per check.
    #[arg(long, default_value_t = 20)]
    pub trials: usize,

    /// Flux of the direct-space comparison.
    #[arg(long, value_parser = parse_flux, default_value = "1/3")]
    pub flux: RationalFlux,

    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,

    /// Chain length of the direct-space comparison.
    #[arg(long, default_value_t = 600)]
    pub sites: usize,

    #[arg(long, default_value_t = bandscope::harper::DEFAULT_GRID)]
    pub kgrid: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct CantorArgs {
    /// Comma-separated fluxes with increasing denominators.
    #[arg(long, value_parser = parse_flux, value_delimiter = ',', conflicts_with = "fibonacci")]
    pub approximants: Vec<RationalFlux>,

    /// Use the first N Fibonacci approximants 1/2, 2/3, 3/5, ...
    #[arg(long)]
    pub fibonacci: Option<usize>,

    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,

    #[arg(long, default_value_t = 128)]
    pub kgrid: usize,
}

/// Keeps the user's spelling for the config echo next to the parsed value.
#[derive(Debug, Clone)]
pub struct PotentialArg {
    pub text: String,
    pub potential: FourierPotential,
}

impl std::fmt::Display for PotentialArg {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.text)
    }
}

fn parse_potential(s: &str) -> Result<PotentialArg, String> {
    let potential = s.parse().map_err(|e: bandscope::Error| e.to_string())?;
    Ok(PotentialArg { text: s.to_owned(), potential })
}

fn parse_flux(s: &str) -> Result<RationalFlux, String> {
    s.parse().map_err(|e: bandscope::Error| e.to_string())
}

fn display<T: std::fmt::Display, S: Serializer>(value: &T, serializer: S) -> Result<S::Ok, S::Error> {
    serializer.collect_str(value)
}
