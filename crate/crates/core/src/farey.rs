//! Enumeration of reduced fractions by Farey sequence.

use crate::model::RationalFlux;

/// All reduced fractions `p/q` in `[0, 1)` with `q <= max_q`, ascending.
///
/// Walks the Farey sequence of order `max_q` with the neighbour recurrence
/// `(a/b, c/d) -> (c/d, e/f)`, `k = (n + b) / d`, `e = k·c - a`, `f = k·d - b`,
/// so every fraction comes out already reduced.
pub fn reduced_fractions(max_q: u64) -> Vec<RationalFlux> {
    if max_q == 0 {
        return Vec::new();
    }
    let n = max_q;
    let (mut a, mut b, mut c, mut d) = (0u64, 1u64, 1u64, n);
    let mut out = vec![RationalFlux::zero()];
    while c < d {
        out.push(RationalFlux::new(c, d).expect("Farey neighbours are reduced"));
        let k = (n + b) / d;
        (a, b, c, d) = (c, d, k * c - a, k * d - b);
    }
    out
}

/// Continued-fraction convergents `F(i)/F(i+1)` of the inverse golden mean,
/// starting at `1/2`.
pub fn fibonacci_approximants(count: usize) -> Vec<RationalFlux> {
    let (mut p, mut q) = (1u64, 2u64);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        out.push(RationalFlux::new(p, q).expect("consecutive Fibonacci numbers are coprime"));
        (p, q) = (q, p + q);
    }
    out
}
