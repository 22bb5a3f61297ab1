//! Dense complex linear algebra for composite finite-dimensional systems.
//!
//! Composite bases are ordered row-major with subsystem 0 varying slowest, so
//! the amplitude of `|i₀ i₁ … i_{k-1}⟩` sits at
//! `((i₀·d₁ + i₁)·d₂ + …)`. Every constructor that hands a value back to the
//! caller checks the invariants of its type; raw matrix-vector products are
//! returned as plain [`DVector`]s and never masquerade as states.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Tolerance on `∑|amp|² = 1` and `Tr ρ = 1`.
pub const NORM_TOL: f64 = 1e-10;
/// Tolerance on `max |H - H†|`.
pub const HERM_TOL: f64 = 1e-10;
/// Smallest eigenvalue a density matrix may have before it is rejected.
pub const PSD_TOL: f64 = 1e-10;

pub(crate) fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn check_dims(dims: &[usize]) -> Result<usize> {
    if dims.is_empty() {
        return Err(Error::invalid("subsystem dimension list is empty"));
    }
    if let Some(pos) = dims.iter().position(|&d| d == 0) {
        return Err(Error::invalid(format!("subsystem {pos} has dimension 0")));
    }
    Ok(dims.iter().product())
}

/// Splits a composite index into per-subsystem indices.
pub fn decode_index(mut index: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for (slot, &d) in out.iter_mut().zip(dims).rev() {
        *slot = index % d;
        index /= d;
    }
    out
}

/// Inverse of [`decode_index`].
pub fn encode_index(digits: &[usize], dims: &[usize]) -> usize {
    digits
        .iter()
        .zip(dims)
        .fold(0, |acc, (&digit, &d)| acc * d + digit)
}

fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// A normalized pure state over a composite basis.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    dims: Vec<usize>,
    amps: DVector<C64>,
}

impl StateVector {
    /// Wraps already-normalized amplitudes.
    pub fn new(dims: Vec<usize>, amps: Vec<C64>) -> Result<Self> {
        Self::from_vector(dims, DVector::from_vec(amps))
    }

    pub fn from_vector(dims: Vec<usize>, amps: DVector<C64>) -> Result<Self> {
        let total = check_dims(&dims)?;
        if amps.len() != total {
            return Err(Error::invalid(format!(
                "{} amplitudes for composite dimension {total}",
                amps.len()
            )));
        }
        if amps.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::invalid("non-finite amplitude"));
        }
        let norm_sq = amps.norm_squared();
        if (norm_sq - 1.0).abs() > NORM_TOL {
            return Err(Error::invalid(format!(
                "state is not normalized (norm² = {norm_sq})"
            )));
        }
        Ok(Self { dims, amps })
    }

    /// Normalizes an arbitrary nonzero vector.
    pub fn normalize(dims: Vec<usize>, amps: DVector<C64>) -> Result<Self> {
        let norm = amps.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::invalid("cannot normalize a zero or non-finite vector"));
        }
        Self::from_vector(dims, amps.unscale(norm))
    }

    /// Real amplitudes, normalized on the way in.
    pub fn from_real(dims: Vec<usize>, amps: &[f64]) -> Result<Self> {
        let v = DVector::from_iterator(amps.len(), amps.iter().map(|&x| c(x, 0.0)));
        Self::normalize(dims, v)
    }

    pub fn basis(dims: Vec<usize>, index: usize) -> Result<Self> {
        let total = check_dims(&dims)?;
        if index >= total {
            return Err(Error::invalid(format!(
                "basis index {index} out of range for dimension {total}"
            )));
        }
        let mut amps = DVector::zeros(total);
        amps[index] = c(1.0, 0.0);
        Ok(Self { dims, amps })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amps(&self) -> &DVector<C64> {
        &self.amps
    }

    pub fn amp(&self, index: usize) -> C64 {
        self.amps[index]
    }

    /// Reorders subsystems: subsystem `k` of the result is subsystem
    /// `order[k]` of `self`.
    pub fn permute_subsystems(&self, order: &[usize]) -> Result<Self> {
        let n = self.dims.len();
        let mut seen = vec![false; n];
        if order.len() != n {
            return Err(Error::invalid("permutation length does not match subsystem count"));
        }
        for &o in order {
            if o >= n || seen[o] {
                return Err(Error::invalid(format!("{order:?} is not a permutation")));
            }
            seen[o] = true;
        }
        let new_dims: Vec<usize> = order.iter().map(|&o| self.dims[o]).collect();
        let mut amps = DVector::zeros(self.dim());
        for (index, &a) in self.amps.iter().enumerate() {
            let digits = decode_index(index, &self.dims);
            let permuted: Vec<usize> = order.iter().map(|&o| digits[o]).collect();
            amps[encode_index(&permuted, &new_dims)] = a;
        }
        Ok(Self { dims: new_dims, amps })
    }

    /// `max |a_k - b_k|` over amplitudes; `None` on dimension mismatch.
    pub fn max_amp_deviation(&self, other: &StateVector) -> Option<f64> {
        if self.dims != other.dims {
            return None;
        }
        Some(
            self.amps
                .iter()
                .zip(other.amps.iter())
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max),
        )
    }
}

/// Tensor product of normalized factors, first factor slowest.
pub fn tensor(factors: &[StateVector]) -> Result<StateVector> {
    let (first, rest) = factors
        .split_first()
        .ok_or_else(|| Error::invalid("tensor product of an empty factor list"))?;
    let mut dims = first.dims.clone();
    let mut amps = first.amps.clone();
    for f in rest {
        dims.extend_from_slice(&f.dims);
        amps = amps.kronecker(&f.amps);
    }
    StateVector::from_vector(dims, amps)
}

/// `⟨a|b⟩`, conjugate-linear in `a`.
pub fn inner(a: &StateVector, b: &StateVector) -> Result<C64> {
    if a.dims != b.dims {
        return Err(Error::invalid(format!(
            "inner product of dims {:?} and {:?}",
            a.dims, b.dims
        )));
    }
    Ok(a.amps.dotc(&b.amps))
}

/// Matrix-vector product. The result is not renormalized.
pub fn apply(op: &Operator, s: &StateVector) -> Result<DVector<C64>> {
    if op.dims != s.dims {
        return Err(Error::invalid(format!(
            "operator dims {:?} do not match state dims {:?}",
            op.dims, s.dims
        )));
    }
    Ok(&op.mat * &s.amps)
}

/// A square complex matrix acting on a composite space.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    dims: Vec<usize>,
    mat: DMatrix<C64>,
}

impl Operator {
    pub fn new(dims: Vec<usize>, mat: DMatrix<C64>) -> Result<Self> {
        let total = check_dims(&dims)?;
        if mat.nrows() != mat.ncols() {
            return Err(Error::invalid(format!(
                "operator is {}x{}, not square",
                mat.nrows(),
                mat.ncols()
            )));
        }
        if mat.nrows() != total {
            return Err(Error::invalid(format!(
                "operator side {} does not match composite dimension {total}",
                mat.nrows()
            )));
        }
        if mat.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::invalid("non-finite operator entry"));
        }
        Ok(Self { dims, mat })
    }

    /// Single-subsystem operator from its matrix.
    pub fn from_matrix(mat: DMatrix<C64>) -> Result<Self> {
        let d = mat.nrows();
        Self::new(vec![d], mat)
    }

    pub fn identity(dims: Vec<usize>) -> Result<Self> {
        let total = check_dims(&dims)?;
        Ok(Self { dims, mat: DMatrix::identity(total, total) })
    }

    pub fn zeros(dims: Vec<usize>) -> Result<Self> {
        let total = check_dims(&dims)?;
        Ok(Self { dims, mat: DMatrix::zeros(total, total) })
    }

    pub fn diagonal(values: &[f64]) -> Result<Self> {
        let d = DVector::from_iterator(values.len(), values.iter().map(|&x| c(x, 0.0)));
        Self::from_matrix(DMatrix::from_diagonal(&d))
    }

    /// `|v⟩⟨v|` for a normalized state.
    pub fn projector_onto(v: &StateVector) -> Self {
        Self {
            dims: v.dims.clone(),
            mat: &v.amps * v.amps.adjoint(),
        }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.mat
    }

    pub fn adjoint(&self) -> Self {
        Self { dims: self.dims.clone(), mat: self.mat.adjoint() }
    }

    /// `self · other`.
    pub fn compose(&self, other: &Operator) -> Result<Self> {
        if self.dims != other.dims {
            return Err(Error::invalid(format!(
                "cannot compose operators on {:?} and {:?}",
                self.dims, other.dims
            )));
        }
        Ok(Self { dims: self.dims.clone(), mat: &self.mat * &other.mat })
    }

    pub fn add(&self, other: &Operator) -> Result<Self> {
        if self.dims != other.dims {
            return Err(Error::invalid(format!(
                "cannot add operators on {:?} and {:?}",
                self.dims, other.dims
            )));
        }
        Ok(Self { dims: self.dims.clone(), mat: &self.mat + &other.mat })
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self { dims: self.dims.clone(), mat: self.mat.map(|z| z * factor) }
    }

    /// Kronecker product; `self` occupies the slower subsystems.
    pub fn kron(&self, other: &Operator) -> Self {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Self { dims, mat: self.mat.kronecker(&other.mat) }
    }

    /// Lifts `self` into `1 ⊗ … ⊗ self ⊗ … ⊗ 1` acting on `dims`, occupying
    /// the contiguous subsystems starting at `position`.
    pub fn embed(&self, dims: &[usize], position: usize) -> Result<Self> {
        let k = self.dims.len();
        if position + k > dims.len() || dims[position..position + k] != self.dims[..] {
            return Err(Error::invalid(format!(
                "operator on {:?} does not fit at position {position} of {dims:?}",
                self.dims
            )));
        }
        let before: usize = dims[..position].iter().product();
        let after: usize = dims[position + k..].iter().product();
        let mat = DMatrix::<C64>::identity(before, before)
            .kronecker(&self.mat)
            .kronecker(&DMatrix::<C64>::identity(after, after));
        Ok(Self { dims: dims.to_vec(), mat })
    }

    pub fn trace(&self) -> C64 {
        self.mat.trace()
    }

    /// `max |A - A†|`.
    pub fn hermitian_deviation(&self) -> f64 {
        max_abs(&(&self.mat - self.mat.adjoint()))
    }

    /// `max |A†A - 1|`.
    pub fn unitary_deviation(&self) -> f64 {
        let n = self.dim();
        max_abs(&(self.mat.adjoint() * &self.mat - DMatrix::<C64>::identity(n, n)))
    }

    /// `max |A - B|`; `None` on dimension mismatch.
    pub fn max_deviation(&self, other: &Operator) -> Option<f64> {
        (self.dims == other.dims).then(|| max_abs(&(&self.mat - &other.mat)))
    }

    pub fn check_unitary(&self, tol: f64) -> Result<()> {
        let dev = self.unitary_deviation();
        if dev > tol {
            return Err(Error::NotUnitary(dev));
        }
        Ok(())
    }
}

/// Orthonormal basis whose first column is exactly `v`.
fn basis_starting_with(v: &DVector<C64>) -> DMatrix<C64> {
    let n = v.len();
    let mut m = DMatrix::<C64>::zeros(n, n + 1);
    m.set_column(0, v);
    for k in 0..n {
        m[(k, k + 1)] = c(1.0, 0.0);
    }
    let qr = m.qr();
    let r00 = qr.r()[(0, 0)];
    let mut q = qr.q();
    for x in q.column_mut(0).iter_mut() {
        *x *= r00;
    }
    q
}

/// A unitary `U` with `U|from⟩ = |to⟩`.
pub fn unitary_taking(from: &StateVector, to: &StateVector) -> Result<Operator> {
    if from.dims != to.dims {
        return Err(Error::invalid("states live on different spaces"));
    }
    let a = basis_starting_with(&from.amps);
    let b = basis_starting_with(&to.amps);
    Operator::new(from.dims.clone(), b * a.adjoint())
}

/// A Hermitian, unit-trace, positive semi-definite matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    dims: Vec<usize>,
    mat: DMatrix<C64>,
}

impl DensityMatrix {
    pub fn new(dims: Vec<usize>, mat: DMatrix<C64>) -> Result<Self> {
        let op = Operator::new(dims, mat).map_err(|e| match e {
            Error::InvalidInput(m) => Error::InvalidDensity(m),
            other => other,
        })?;
        let herm = op.hermitian_deviation();
        if herm > HERM_TOL {
            return Err(Error::InvalidDensity(format!(
                "not Hermitian (deviation {herm:.3e})"
            )));
        }
        let rho = Self { dims: op.dims, mat: op.mat };
        let tr = rho.trace();
        if (tr - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidDensity(format!("trace is {tr}, not 1")));
        }
        let min = rho.eigenvalues().iter().copied().fold(f64::INFINITY, f64::min);
        if min < -PSD_TOL {
            return Err(Error::InvalidDensity(format!(
                "negative eigenvalue {min:.3e}"
            )));
        }
        Ok(rho)
    }

    /// For matrices built by trace-preserving maps of valid inputs.
    pub(crate) fn from_trusted(dims: Vec<usize>, mat: DMatrix<C64>) -> Self {
        Self { dims, mat }
    }

    pub fn maximally_mixed(dims: Vec<usize>) -> Result<Self> {
        let total = check_dims(&dims)?;
        let mat = DMatrix::<C64>::identity(total, total).unscale(total as f64);
        Ok(Self { dims, mat })
    }

    /// Convex combination `∑ wₖ ρₖ`; weights must be nonnegative and sum to 1.
    pub fn mixture(members: &[(f64, DensityMatrix)]) -> Result<Self> {
        let (_, first) = members
            .first()
            .ok_or_else(|| Error::invalid("empty mixture"))?;
        let mut mat = DMatrix::zeros(first.dim(), first.dim());
        for (w, rho) in members {
            if rho.dims != first.dims {
                return Err(Error::invalid("mixture members have different dims"));
            }
            if *w < 0.0 {
                return Err(Error::invalid(format!("negative mixture weight {w}")));
            }
            mat += rho.mat.map(|z| z * *w);
        }
        Self::new(first.dims.clone(), mat)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.mat
    }

    pub fn trace(&self) -> f64 {
        self.mat.trace().re
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.mat.clone())
            .eigenvalues
            .iter()
            .copied()
            .collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// `Tr ρ²`.
    pub fn purity(&self) -> f64 {
        (&self.mat * &self.mat).trace().re
    }

    pub fn max_deviation(&self, other: &DensityMatrix) -> Option<f64> {
        (self.dims == other.dims).then(|| max_abs(&(&self.mat - &other.mat)))
    }

    /// `Tr(Aρ)`.
    pub fn expectation(&self, op: &Operator) -> Result<C64> {
        if op.dims() != self.dims() {
            return Err(Error::invalid("operator and density dims differ"));
        }
        Ok((op.matrix() * &self.mat).trace())
    }
}

/// `|s⟩⟨s|`.
pub fn density_from_pure(s: &StateVector) -> DensityMatrix {
    DensityMatrix::from_trusted(s.dims.clone(), &s.amps * s.amps.adjoint())
}

/// Traces out every subsystem not listed in `keep`. The kept subsystems
/// appear in increasing index order regardless of the order in `keep`.
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let n = rho.dims.len();
    if keep.is_empty() {
        return Err(Error::invalid("partial trace must keep at least one subsystem"));
    }
    if let Some(&bad) = keep.iter().find(|&&k| k >= n) {
        return Err(Error::invalid(format!(
            "subsystem {bad} out of range for {n} subsystems"
        )));
    }
    let mut kept_mask = vec![false; n];
    for &k in keep {
        if kept_mask[k] {
            return Err(Error::invalid(format!("subsystem {k} listed twice")));
        }
        kept_mask[k] = true;
    }
    let kept_dims: Vec<usize> = (0..n).filter(|&k| kept_mask[k]).map(|k| rho.dims[k]).collect();
    let traced_dims: Vec<usize> = (0..n).filter(|&k| !kept_mask[k]).map(|k| rho.dims[k]).collect();
    let kept_total: usize = kept_dims.iter().product();

    // (kept index, traced index) for every composite index
    let split: Vec<(usize, usize)> = (0..rho.dim())
        .map(|index| {
            let digits = decode_index(index, &rho.dims);
            let (mut kd, mut td) = (Vec::new(), Vec::new());
            for (k, &digit) in digits.iter().enumerate() {
                if kept_mask[k] {
                    kd.push(digit);
                } else {
                    td.push(digit);
                }
            }
            (encode_index(&kd, &kept_dims), encode_index(&td, &traced_dims))
        })
        .collect();

    let mut out = DMatrix::zeros(kept_total, kept_total);
    for (r, &(kr, tr)) in split.iter().enumerate() {
        for (col, &(kc, tc)) in split.iter().enumerate() {
            if tr == tc {
                out[(kr, kc)] += rho.mat[(r, col)];
            }
        }
    }
    Ok(DensityMatrix::from_trusted(kept_dims, out))
}

/// Von Neumann entropy in bits.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    let mut s = 0.0;
    for lambda in rho.eigenvalues() {
        if lambda < -PSD_TOL {
            return Err(Error::InvalidDensity(format!(
                "negative eigenvalue {lambda:.3e}"
            )));
        }
        if lambda > 0.0 {
            s -= lambda * lambda.log2();
        }
    }
    Ok(s.max(0.0))
}
