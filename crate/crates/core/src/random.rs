//! Seeded random instances: Haar unitaries, states, observables with
//! optional degenerate branches, and mixed states.

use nalgebra::DMatrix;
use rand::seq::index::sample;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::observable::Observable;
use crate::state::{c, DensityMatrix, Operator, StateVector, C64};

/// Which eigenspace structure a random observable should have.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spectrum {
    /// One rank-1 branch per basis vector.
    NonDegenerate,
    /// At least one branch of rank ≥ 2 (falls back to a single branch in dimension 1).
    Degenerate,
    /// Any number of branches from 1 to the dimension.
    Any,
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c(re, im)
}

/// Matrix of i.i.d. standard complex normals.
pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> DMatrix<C64> {
    DMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

/// Haar-distributed unitary (QR of a Ginibre matrix with phase correction).
pub fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<C64> {
    let qr = ginibre(n, n, rng).qr();
    let (mut q, r) = qr.unpack();
    for k in 0..n {
        let d = r[(k, k)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { c(1.0, 0.0) };
        for x in q.column_mut(k).iter_mut() {
            *x *= phase;
        }
    }
    q
}

pub fn random_unitary<R: Rng + ?Sized>(dims: Vec<usize>, rng: &mut R) -> Result<Operator> {
    let n = dims.iter().product();
    Operator::new(dims, haar_unitary(n, rng))
}

pub fn random_state<R: Rng + ?Sized>(dims: Vec<usize>, rng: &mut R) -> Result<StateVector> {
    let n: usize = dims.iter().product();
    StateVector::normalize(dims, ginibre(n, 1, rng).column(0).into_owned())
}

/// GUE-like Hermitian operator `(G + G†)/2`.
pub fn random_hermitian<R: Rng + ?Sized>(dims: Vec<usize>, rng: &mut R) -> Result<Operator> {
    let n = dims.iter().product();
    let g = ginibre(n, n, rng);
    Operator::new(dims, (&g + g.adjoint()).unscale(2.0))
}

/// Random composition of `n` into `k` positive parts.
fn composition<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Vec<usize> {
    let mut cuts: Vec<usize> = sample(rng, n - 1, k - 1).into_iter().map(|x| x + 1).collect();
    cuts.sort_unstable();
    cuts.push(n);
    let mut prev = 0;
    cuts.into_iter()
        .map(|cut| {
            let part = cut - prev;
            prev = cut;
            part
        })
        .collect()
}

/// Observable with Haar-random eigenbasis and the requested branch structure.
/// Eigenvalues are distinct integers in `[-2n, 2n]`.
pub fn random_observable<R: Rng + ?Sized>(
    dims: Vec<usize>,
    spectrum: Spectrum,
    rng: &mut R,
) -> Result<Observable> {
    let n: usize = dims.iter().product();
    let k = match spectrum {
        Spectrum::NonDegenerate => n,
        Spectrum::Degenerate if n >= 2 => rng.random_range(1..n),
        Spectrum::Degenerate => 1,
        Spectrum::Any => rng.random_range(1..=n),
    };
    let sizes = composition(n, k, rng);
    let mut values: Vec<f64> = sample(rng, 4 * n + 1, k)
        .into_iter()
        .map(|v| v as f64 - 2.0 * n as f64)
        .collect();
    values.sort_by(f64::total_cmp);

    let basis = haar_unitary(n, rng);
    let mut start = 0;
    let groups: Vec<(f64, Vec<usize>)> = sizes
        .iter()
        .zip(values)
        .map(|(&size, value)| {
            let cols = (start..start + size).collect();
            start += size;
            (value, cols)
        })
        .collect();
    Observable::from_basis_groups(dims, &basis, &groups)
}

/// Mixed state `GG†/Tr(GG†)` with `G` of random rank in `1..=n`.
pub fn random_density<R: Rng + ?Sized>(dims: Vec<usize>, rng: &mut R) -> Result<DensityMatrix> {
    let n: usize = dims.iter().product();
    let rank = rng.random_range(1..=n);
    let g = ginibre(n, rank, rng);
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    let mut rho = m.unscale(tr);
    // exact Hermitian symmetry before validation
    rho = (&rho + rho.adjoint()).unscale(2.0);
    DensityMatrix::new(dims, rho)
}
