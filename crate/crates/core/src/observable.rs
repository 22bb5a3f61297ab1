//! Discrete-spectrum observables stored as families of orthogonal projectors.
//!
//! An [`Observable`] is an ordered list of branches `(aᵢ, P̂ᵢ)` with strictly
//! increasing eigenvalues. The projectors are Hermitian, idempotent, mutually
//! orthogonal and resolve the identity. Eigenvectors inside a degenerate
//! eigenspace are never exposed; only the projector is kept.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::state::{c, Operator, C64, HERM_TOL};

/// Tolerance on every projector-family invariant.
pub const PROJ_TOL: f64 = 1e-10;

/// Default gap below which neighbouring eigenvalues share a branch.
pub const DEFAULT_DEGENERACY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub eigenvalue: f64,
    pub projector: Operator,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    dims: Vec<usize>,
    branches: Vec<Branch>,
}

fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn family_error(msg: impl Into<String>) -> Error {
    Error::InvalidProjectorFamily(msg.into())
}

/// Eigendecomposes a Hermitian operator and groups eigenvalues whose
/// neighbour gap is below `degeneracy_tol` (single linkage on the sorted
/// spectrum). Each branch is labelled by the mean of its cluster.
pub fn observable_from_matrix(h: &Operator, degeneracy_tol: f64) -> Result<Observable> {
    let dev = h.hermitian_deviation();
    if dev > HERM_TOL {
        return Err(Error::NotHermitian(dev));
    }
    if !(degeneracy_tol >= 0.0) {
        return Err(Error::invalid(format!("degeneracy tolerance {degeneracy_tol}")));
    }
    // symmetrize so the solver sees an exactly Hermitian matrix
    let herm = (h.matrix() + h.matrix().adjoint()).unscale(2.0);
    let eig = SymmetricEigen::new(herm);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for &k in &order {
        match clusters.last_mut() {
            Some(cluster)
                if eig.eigenvalues[k] - eig.eigenvalues[*cluster.last().unwrap()] < degeneracy_tol =>
            {
                cluster.push(k)
            }
            _ => clusters.push(vec![k]),
        }
    }

    let n = h.dim();
    let branches = clusters
        .into_iter()
        .map(|cluster| {
            let mean = cluster.iter().map(|&k| eig.eigenvalues[k]).sum::<f64>() / cluster.len() as f64;
            let mut p = DMatrix::<C64>::zeros(n, n);
            for &k in &cluster {
                let v = eig.eigenvectors.column(k);
                p += v * v.adjoint();
            }
            Ok(Branch {
                eigenvalue: mean,
                projector: Operator::new(h.dims().to_vec(), p)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    observable_from_branches(branches)
}

/// Validates a projector family and sorts it by eigenvalue.
pub fn observable_from_branches(mut branches: Vec<Branch>) -> Result<Observable> {
    let first = branches
        .first()
        .ok_or_else(|| family_error("no branches"))?;
    let dims = first.projector.dims().to_vec();
    let n = first.projector.dim();

    for (i, b) in branches.iter().enumerate() {
        if b.projector.dims() != dims.as_slice() {
            return Err(family_error(format!(
                "branch {i} acts on {:?}, expected {dims:?}",
                b.projector.dims()
            )));
        }
        if !b.eigenvalue.is_finite() {
            return Err(family_error(format!("branch {i} has eigenvalue {}", b.eigenvalue)));
        }
        let p = b.projector.matrix();
        let herm = b.projector.hermitian_deviation();
        if herm > PROJ_TOL {
            return Err(family_error(format!("branch {i} projector not Hermitian ({herm:.3e})")));
        }
        let idem = max_abs(&(p * p - p));
        if idem > PROJ_TOL {
            return Err(family_error(format!("branch {i} projector not idempotent ({idem:.3e})")));
        }
        if b.projector.trace().re < 0.5 {
            return Err(family_error(format!("branch {i} projector is zero")));
        }
    }
    for i in 0..branches.len() {
        for j in (i + 1)..branches.len() {
            let overlap = max_abs(&(branches[i].projector.matrix() * branches[j].projector.matrix()));
            if overlap > PROJ_TOL {
                return Err(family_error(format!(
                    "branches {i} and {j} are not orthogonal ({overlap:.3e})"
                )));
            }
        }
    }
    let mut sum = DMatrix::<C64>::zeros(n, n);
    for b in &branches {
        sum += b.projector.matrix();
    }
    let completeness = max_abs(&(sum - DMatrix::<C64>::identity(n, n)));
    if completeness > PROJ_TOL {
        return Err(family_error(format!(
            "projectors do not sum to identity ({completeness:.3e})"
        )));
    }

    branches.sort_by(|a, b| a.eigenvalue.total_cmp(&b.eigenvalue));
    if let Some(w) = branches.windows(2).find(|w| w[0].eigenvalue >= w[1].eigenvalue) {
        return Err(family_error(format!("eigenvalue {} repeated", w[0].eigenvalue)));
    }
    Ok(Observable { dims, branches })
}

impl Observable {
    pub fn from_matrix(h: &Operator) -> Result<Self> {
        observable_from_matrix(h, DEFAULT_DEGENERACY_TOL)
    }

    /// Builds an observable whose branches are the given disjoint groups of
    /// orthonormal basis vectors (columns of `basis`).
    pub fn from_basis_groups(
        dims: Vec<usize>,
        basis: &DMatrix<C64>,
        groups: &[(f64, Vec<usize>)],
    ) -> Result<Self> {
        let n = basis.nrows();
        let branches = groups
            .iter()
            .map(|(value, cols)| {
                let mut p = DMatrix::<C64>::zeros(n, n);
                for &k in cols {
                    let v = basis.column(k);
                    p += v * v.adjoint();
                }
                Ok(Branch { eigenvalue: *value, projector: Operator::new(dims.clone(), p)? })
            })
            .collect::<Result<Vec<_>>>()?;
        observable_from_branches(branches)
    }

    pub fn sigma_x() -> Self {
        Self::from_matrix(&pauli_x()).expect("σx is Hermitian")
    }

    pub fn sigma_y() -> Self {
        Self::from_matrix(&pauli_y()).expect("σy is Hermitian")
    }

    pub fn sigma_z() -> Self {
        Self::from_matrix(&pauli_z()).expect("σz is Hermitian")
    }

    /// `S_z` for spin `s` (in units of ħ), dimension `2s + 1`.
    pub fn spin_z(twice_spin: usize) -> Self {
        let values: Vec<f64> = (0..=twice_spin)
            .map(|k| twice_spin as f64 / 2.0 - k as f64)
            .collect();
        Self::from_matrix(&Operator::diagonal(&values).expect("nonempty diagonal"))
            .expect("diagonal is Hermitian")
    }

    /// Single-branch observable `(value, 1)`.
    pub fn trivial(dims: Vec<usize>, value: f64) -> Result<Self> {
        observable_from_branches(vec![Branch { eigenvalue: value, projector: Operator::identity(dims)? }])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    pub fn branch_count(&self) -> usize {
        self.branches.len()
    }

    pub fn projector(&self, i: usize) -> Result<&Operator> {
        self.branch(i).map(|b| &b.projector)
    }

    pub fn eigenvalue(&self, i: usize) -> Result<f64> {
        self.branch(i).map(|b| b.eigenvalue)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.branches.iter().map(|b| b.eigenvalue).collect()
    }

    /// Dimension of the i-th eigenspace (rounded projector trace).
    pub fn rank(&self, i: usize) -> Result<usize> {
        self.projector(i).map(|p| p.trace().re.round() as usize)
    }

    fn branch(&self, i: usize) -> Result<&Branch> {
        self.branches.get(i).ok_or_else(|| {
            Error::invalid(format!(
                "branch {i} out of range for {} branches",
                self.branches.len()
            ))
        })
    }

    /// `∑ᵢ aᵢ P̂ᵢ`.
    pub fn reconstruct(&self) -> Operator {
        let mut acc = DMatrix::<C64>::zeros(self.dim(), self.dim());
        for b in &self.branches {
            acc += b.projector.matrix().map(|z| z * b.eigenvalue);
        }
        Operator::new(self.dims.clone(), acc).expect("dims already validated")
    }

    /// The same observable acting on subsystems `position..` of a larger
    /// composite system, i.e. with projectors `1 ⊗ P̂ᵢ ⊗ 1`.
    pub fn embed(&self, dims: &[usize], position: usize) -> Result<Self> {
        let branches = self
            .branches
            .iter()
            .map(|b| {
                Ok(Branch {
                    eigenvalue: b.eigenvalue,
                    projector: b.projector.embed(dims, position)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { dims: dims.to_vec(), branches })
    }
}

pub fn pauli_x() -> Operator {
    let m = DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
    Operator::from_matrix(m).expect("2x2")
}

pub fn pauli_y() -> Operator {
    let m = DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)]);
    Operator::from_matrix(m).expect("2x2")
}

pub fn pauli_z() -> Operator {
    Operator::diagonal(&[1.0, -1.0]).expect("2x2")
}
