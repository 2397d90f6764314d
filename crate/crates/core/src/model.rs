//! Domain types shared across the crate and the dense Hermitian eigensolver.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Serialize, Serializer};

use crate::{Error, Result};

/// Allowed deviation from Hermiticity, relative to the largest entry.
pub const HERMITICITY_TOL: f64 = 1e-12;

/// Relative accuracy promised by [`eig_hermitian`] for residuals and
/// orthonormality.
pub const EIG_TOL: f64 = 1e-10;

/// Real periodic potential (period 1) given by finitely many Fourier modes.
///
/// Only the Hermitian-symmetric form is representable: `v[-n] == conj(v[n])`
/// for every stored frequency, so the potential is real-valued.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FourierPotential {
    coefficients: BTreeMap<i64, Complex64>,
}

impl FourierPotential {
    pub fn zero() -> Self {
        Self::default()
    }

    /// Builds a potential from `(n, v_n)` pairs. Missing negative
    /// frequencies are filled in by conjugation; pairs given for both `n`
    /// and `-n` must already be conjugate.
    pub fn from_modes(modes: impl IntoIterator<Item = (i64, Complex64)>) -> Result<Self> {
        let mut coefficients = BTreeMap::new();
        for (n, v) in modes {
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::InvalidPotential(format!("amplitude for n = {n} is not finite")));
            }
            if coefficients.insert(n, v).is_some() {
                return Err(Error::InvalidPotential(format!("frequency {n} given twice")));
            }
        }
        let given: Vec<(i64, Complex64)> = coefficients.iter().map(|(&n, &v)| (n, v)).collect();
        for (n, v) in given {
            match coefficients.get(&-n) {
                Some(w) => {
                    let tol = 1e-14 * (1.0 + v.norm());
                    if (*w - v.conj()).norm() > tol {
                        return Err(Error::InvalidPotential(format!(
                            "v[{}] = {w} is not the conjugate of v[{n}] = {v}",
                            -n
                        )));
                    }
                }
                None => {
                    coefficients.insert(-n, v.conj());
                }
            }
        }
        // keep the map free of explicit zeros so `max_frequency` is honest
        coefficients.retain(|_, v| *v != Complex64::new(0.0, 0.0));
        Ok(Self { coefficients })
    }

    /// The cosine potential `2·a·cos(2π·n·x)`.
    pub fn cosine(n: i64, a: f64) -> Self {
        Self::from_modes([(n, Complex64::new(a, 0.0))]).expect("cosine potential is Hermitian")
    }

    pub fn coefficient(&self, n: i64) -> Complex64 {
        self.coefficients.get(&n).copied().unwrap_or_default()
    }

    /// Largest `|n|` with a nonzero amplitude (0 for the zero potential).
    pub fn max_frequency(&self) -> usize {
        self.coefficients.keys().map(|n| n.unsigned_abs() as usize).max().unwrap_or(0)
    }

    pub fn modes(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        self.coefficients.iter().map(|(&n, &v)| (n, v))
    }

    pub fn evaluate(&self, x: f64) -> f64 {
        self.modes()
            .map(|(n, v)| (v * Complex64::from_polar(1.0, TAU * n as f64 * x)).re)
            .sum()
    }
}

/// Parses comma-separated `n:re[,im]` pairs, e.g. `1:1` or `1:0.5,0.25,2:1`.
/// A token without `:` is the imaginary part of the preceding pair.
impl FromStr for FourierPotential {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |msg: String| Error::InvalidPotential(msg);
        let mut modes: Vec<(i64, Complex64, bool)> = Vec::new();
        for token in s.split(',').map(str::trim) {
            if token.is_empty() {
                if s.trim().is_empty() {
                    break;
                }
                return Err(bad(format!("empty token in `{s}`")));
            }
            match token.split_once(':') {
                Some((n, re)) => {
                    let n: i64 = n.trim().parse().map_err(|_| bad(format!("bad frequency `{n}`")))?;
                    let re: f64 = re.trim().parse().map_err(|_| bad(format!("bad amplitude `{re}`")))?;
                    modes.push((n, Complex64::new(re, 0.0), false));
                }
                None => {
                    let im: f64 = token.parse().map_err(|_| bad(format!("bad imaginary part `{token}`")))?;
                    match modes.last_mut() {
                        Some((_, v, has_im)) if !*has_im => {
                            v.im = im;
                            *has_im = true;
                        }
                        _ => return Err(bad(format!("stray imaginary part `{token}`"))),
                    }
                }
            }
        }
        if let Some((n, v, _)) = modes.iter().find(|(n, v, _)| *n == 0 && v.im != 0.0) {
            return Err(bad(format!("v[{n}] = {v} must be real")));
        }
        Self::from_modes(modes.into_iter().map(|(n, v, _)| (n, v)))
    }
}

/// Point of the Brillouin zone `[0, 2π)^d`, `d ∈ {1, 2}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuasiMomentum(Vec<f64>);

impl QuasiMomentum {
    pub fn new(components: Vec<f64>) -> Result<Self> {
        if !(1..=2).contains(&components.len()) {
            return Err(Error::InvalidArgument(format!(
                "quasi-momentum dimension must be 1 or 2, got {}",
                components.len()
            )));
        }
        if let Some(&value) = components.iter().find(|k| !(0.0..TAU).contains(*k)) {
            return Err(Error::QuasiMomentumOutOfRange { value });
        }
        Ok(Self(components))
    }

    pub fn one(k: f64) -> Result<Self> {
        Self::new(vec![k])
    }

    pub fn two(k1: f64, k2: f64) -> Result<Self> {
        Self::new(vec![k1, k2])
    }

    pub fn components(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub(crate) fn expect_dim(&self, expected: usize) -> Result<()> {
        if self.dim() == expected {
            Ok(())
        } else {
            Err(Error::QuasiMomentumDimension { got: self.dim(), expected })
        }
    }
}

/// `n` uniform points `2π·m/n`, `m = 0..n`: 0 included, 2π excluded.
pub fn uniform_k_points(n: usize) -> Vec<f64> {
    (0..n).map(|m| TAU * m as f64 / n as f64).collect()
}

/// Uniform 1D grid of quasi-momenta.
pub fn grid_1d(n: usize) -> Vec<QuasiMomentum> {
    uniform_k_points(n).into_iter().map(|k| QuasiMomentum(vec![k])).collect()
}

/// Uniform `n1 x n2` grid, row-major in `(k1, k2)`.
pub fn grid_2d(n1: usize, n2: usize) -> Vec<QuasiMomentum> {
    let k2s = uniform_k_points(n2);
    uniform_k_points(n1)
        .into_iter()
        .flat_map(|k1| k2s.iter().map(move |&k2| QuasiMomentum(vec![k1, k2])))
        .collect()
}

/// Magnetic flux per unit cell as a reduced fraction `p/q` in `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RationalFlux {
    p: u64,
    q: u64,
}

impl RationalFlux {
    pub fn new(p: u64, q: u64) -> Result<Self> {
        if q == 0 || p >= q || gcd(p, q) != 1 {
            return Err(Error::InvalidFlux { p, q });
        }
        Ok(Self { p, q })
    }

    pub fn zero() -> Self {
        Self { p: 0, q: 1 }
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn value(&self) -> f64 {
        self.p as f64 / self.q as f64
    }

    /// `exp(2πi·p/q)`.
    pub fn omega(&self) -> Complex64 {
        Complex64::from_polar(1.0, TAU * self.value())
    }

    /// `(q - p)/q`, the flux with the opposite orientation (mod 1).
    pub fn reflected(&self) -> Self {
        if self.p == 0 {
            *self
        } else {
            Self { p: self.q - self.p, q: self.q }
        }
    }
}

pub(crate) fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl PartialOrd for RationalFlux {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for RationalFlux {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.p as u128 * other.q as u128).cmp(&(other.p as u128 * self.q as u128))
    }
}

impl fmt::Display for RationalFlux {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.p, self.q)
    }
}

/// Strict: unreduced fractions are rejected rather than reduced.
impl FromStr for RationalFlux {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let syntax = || Error::FluxSyntax(s.to_owned());
        let (p, q) = s.trim().split_once('/').ok_or_else(syntax)?;
        let p = p.trim().parse().map_err(|_| syntax())?;
        let q = q.trim().parse().map_err(|_| syntax())?;
        Self::new(p, q)
    }
}

impl Serialize for RationalFlux {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// Dense complex matrix that passed the Hermiticity check.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix(DMatrix<Complex64>);

impl HermitianMatrix {
    pub fn new(matrix: DMatrix<Complex64>) -> Result<Self> {
        let (rows, cols) = matrix.shape();
        if rows != cols {
            return Err(Error::NotSquare { rows, cols });
        }
        let scale = matrix.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let tolerance = HERMITICITY_TOL * scale;
        let mut deviation = 0.0_f64;
        for i in 0..rows {
            for j in i..cols {
                deviation = deviation.max((matrix[(i, j)] - matrix[(j, i)].conj()).norm());
            }
        }
        if deviation > tolerance || deviation.is_nan() {
            return Err(Error::NotHermitian { deviation, tolerance });
        }
        Ok(Self(matrix))
    }

    pub fn from_real(matrix: DMatrix<f64>) -> Result<Self> {
        Self::new(matrix.map(|x| Complex64::new(x, 0.0)))
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    /// `self · self`, which stays Hermitian.
    pub fn square(&self) -> Self {
        let m = &self.0 * &self.0;
        Self(hermitian_part(m))
    }
}

pub(crate) fn hermitian_part(m: DMatrix<Complex64>) -> DMatrix<Complex64> {
    (&m + m.adjoint()).scale(0.5)
}

/// Eigenvalues (ascending) of one fiber at quasi-momentum `k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumSample {
    pub k: QuasiMomentum,
    pub eigenvalues: Vec<f64>,
}

/// Result of [`eig_hermitian`]; column `i` of `vectors` pairs with `values[i]`.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: Option<DMatrix<Complex64>>,
}

/// Diagonalizes a Hermitian matrix.
///
/// Eigenvalues are sorted ascending with ties kept in solver order; when
/// `with_vectors` is set the returned columns are orthonormal and reordered
/// the same way.
pub fn eig_hermitian(a: &HermitianMatrix, with_vectors: bool) -> Result<HermitianEigen> {
    let n = a.dim();
    if n == 0 {
        return Ok(HermitianEigen { values: Vec::new(), vectors: with_vectors.then(|| DMatrix::zeros(0, 0)) });
    }
    let eig = SymmetricEigen::try_new(a.0.clone(), f64::EPSILON, 1000 * n.max(8))
        .ok_or(Error::NoConvergence { dim: n })?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = with_vectors.then(|| DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]));
    Ok(HermitianEigen { values, vectors })
}

/// Ascending eigenvalues only.
pub fn eigenvalues(a: &HermitianMatrix) -> Result<Vec<f64>> {
    eig_hermitian(a, false).map(|e| e.values)
}
