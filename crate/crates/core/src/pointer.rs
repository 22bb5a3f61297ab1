//! Sequential measurement of two observables through pointer registers.
//!
//! In the two-pointer scheme the small system `ψ₀` is coupled to pointer-1
//! by `Û_A = ∑ᵢ P̂ᵢ ⊗ Sⁱ ⊗ 1` and then to pointer-2 by
//! `Û_B = ∑ⱼ R̂ⱼ ⊗ 1 ⊗ Sʲ`, where `S` is the cyclic shift `|n⟩ ↦ |n+1 mod N⟩`.
//! Both pointers start in `|0⟩` and are read out together at the end, so the
//! joint outcome `(i, j)` is a single Born measurement of two commuting
//! pointer observables. The one-pointer scheme drops pointer-2 and measures
//! `B̂` on the small system directly.
//!
//! Pointer index `n` reads branch `n` of the coupled observable; outcome
//! labels are branch indices throughout.

use nalgebra::DMatrix;

use crate::distribution::OutcomeDistribution;
use crate::error::{Error, Result};
use crate::observable::Observable;
use crate::rules::{project_update, rule_probabilities, ProbabilityRule, ZERO_PROB_TOL};
use crate::state::{apply, c, decode_index, tensor, Operator, StateVector, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeMode {
    TwoPointer,
    OnePointer,
}

#[derive(Debug, Clone)]
pub struct PointerSchemeSetup {
    small_state: StateVector,
    obs_a: Observable,
    obs_b: Observable,
    n_pointer1: usize,
    m_pointer2: Option<usize>,
    mode: SchemeMode,
}

impl PointerSchemeSetup {
    /// Two-pointer setup with minimal pointer sizes `N = #branches(Â)`,
    /// `M = #branches(B̂)`.
    pub fn two_pointer(small_state: StateVector, obs_a: Observable, obs_b: Observable) -> Result<Self> {
        let (n, m) = (obs_a.branch_count(), obs_b.branch_count());
        Self::build(small_state, obs_a, obs_b, n, Some(m), SchemeMode::TwoPointer)
    }

    pub fn one_pointer(small_state: StateVector, obs_a: Observable, obs_b: Observable) -> Result<Self> {
        let n = obs_a.branch_count();
        Self::build(small_state, obs_a, obs_b, n, None, SchemeMode::OnePointer)
    }

    /// Enlarges the pointer registers. `m` is ignored in one-pointer mode.
    pub fn with_pointer_dims(self, n: usize, m: Option<usize>) -> Result<Self> {
        let m = match self.mode {
            SchemeMode::TwoPointer => Some(m.unwrap_or(self.obs_b.branch_count())),
            SchemeMode::OnePointer => None,
        };
        Self::build(self.small_state, self.obs_a, self.obs_b, n, m, self.mode)
    }

    /// Same system and observables in the other mode, keeping `N`.
    pub fn in_mode(&self, mode: SchemeMode) -> Result<Self> {
        let m = match mode {
            SchemeMode::TwoPointer => Some(self.m_pointer2.unwrap_or(self.obs_b.branch_count())),
            SchemeMode::OnePointer => None,
        };
        Self::build(
            self.small_state.clone(),
            self.obs_a.clone(),
            self.obs_b.clone(),
            self.n_pointer1,
            m,
            mode,
        )
    }

    fn build(
        small_state: StateVector,
        obs_a: Observable,
        obs_b: Observable,
        n: usize,
        m: Option<usize>,
        mode: SchemeMode,
    ) -> Result<Self> {
        if obs_a.dims() != small_state.dims() || obs_b.dims() != small_state.dims() {
            return Err(Error::invalid(format!(
                "observables on {:?} / {:?} do not match small system {:?}",
                obs_a.dims(),
                obs_b.dims(),
                small_state.dims()
            )));
        }
        if n < obs_a.branch_count() {
            return Err(Error::invalid(format!(
                "pointer-1 has {n} states but A has {} branches",
                obs_a.branch_count()
            )));
        }
        if let Some(m) = m {
            if m < obs_b.branch_count() {
                return Err(Error::invalid(format!(
                    "pointer-2 has {m} states but B has {} branches",
                    obs_b.branch_count()
                )));
            }
        }
        Ok(Self { small_state, obs_a, obs_b, n_pointer1: n, m_pointer2: m, mode })
    }

    pub fn small_state(&self) -> &StateVector {
        &self.small_state
    }

    pub fn obs_a(&self) -> &Observable {
        &self.obs_a
    }

    pub fn obs_b(&self) -> &Observable {
        &self.obs_b
    }

    pub fn n_pointer1(&self) -> usize {
        self.n_pointer1
    }

    pub fn m_pointer2(&self) -> Option<usize> {
        self.m_pointer2
    }

    pub fn mode(&self) -> SchemeMode {
        self.mode
    }

    /// Small-system dims followed by the pointer dims.
    pub fn composite_dims(&self) -> Vec<usize> {
        let mut dims = self.small_state.dims().to_vec();
        dims.push(self.n_pointer1);
        dims.extend(self.m_pointer2);
        dims
    }

    pub fn total_dim(&self) -> usize {
        self.composite_dims().iter().product()
    }

    fn small_count(&self) -> usize {
        self.small_state.dims().len()
    }

    /// `ψ₀ ⊗ |α₀⟩ (⊗ |β₀⟩)`.
    pub fn initial_state(&self) -> Result<StateVector> {
        let mut factors = vec![self.small_state.clone(), StateVector::basis(vec![self.n_pointer1], 0)?];
        if let Some(m) = self.m_pointer2 {
            factors.push(StateVector::basis(vec![m], 0)?);
        }
        tensor(&factors)
    }
}

/// `Sᵏ` on `ℤ_n`: `|m⟩ ↦ |m + k mod n⟩`.
pub fn shift_matrix(n: usize, k: usize) -> DMatrix<C64> {
    let mut s = DMatrix::zeros(n, n);
    for m in 0..n {
        s[((m + k) % n, m)] = c(1.0, 0.0);
    }
    s
}

fn pointer_projector(n: usize, index: usize) -> Result<Operator> {
    let mut m = DMatrix::zeros(n, n);
    m[(index, index)] = c(1.0, 0.0);
    Operator::new(vec![n], m)
}

/// Controlled shift of pointer-1 by the branch index of `Â`.
pub fn shift_unitary_a(setup: &PointerSchemeSetup) -> Result<Operator> {
    let n = setup.n_pointer1;
    if n < setup.obs_a.branch_count() {
        return Err(Error::invalid("pointer-1 smaller than the number of A branches"));
    }
    let dims = setup.composite_dims();
    let tail = match setup.m_pointer2 {
        Some(m) => Some(Operator::identity(vec![m])?),
        None => None,
    };
    let mut acc = Operator::zeros(dims)?;
    for (i, branch) in setup.obs_a.branches().iter().enumerate() {
        let mut term = branch.projector.kron(&Operator::new(vec![n], shift_matrix(n, i))?);
        if let Some(t) = &tail {
            term = term.kron(t);
        }
        acc = acc.add(&term)?;
    }
    Ok(acc)
}

/// Controlled shift of pointer-2 by the branch index of `B̂`; pointer-1 is
/// left alone. Two-pointer mode only.
pub fn shift_unitary_b(setup: &PointerSchemeSetup) -> Result<Operator> {
    let m = setup
        .m_pointer2
        .ok_or_else(|| Error::invalid("one-pointer setup has no pointer-2"))?;
    if m < setup.obs_b.branch_count() {
        return Err(Error::invalid("pointer-2 smaller than the number of B branches"));
    }
    let middle = Operator::identity(vec![setup.n_pointer1])?;
    let mut acc = Operator::zeros(setup.composite_dims())?;
    for (j, branch) in setup.obs_b.branches().iter().enumerate() {
        let term = branch
            .projector
            .kron(&middle)
            .kron(&Operator::new(vec![m], shift_matrix(m, j))?);
        acc = acc.add(&term)?;
    }
    Ok(acc)
}

/// `p(i, j)` over branches of `Â` × branches of `B̂`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    p: DMatrix<f64>,
}

impl JointDistribution {
    pub fn new(p: DMatrix<f64>) -> Result<Self> {
        if p.iter().any(|&x| !x.is_finite() || x < -1e-12) {
            return Err(Error::invalid("joint distribution has a negative or non-finite entry"));
        }
        let total = p.sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::invalid(format!("joint distribution sums to {total}")));
        }
        Ok(Self { p: p.map(|x| x.max(0.0)) })
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.p[(i, j)]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.p
    }

    pub fn a_count(&self) -> usize {
        self.p.nrows()
    }

    pub fn b_count(&self) -> usize {
        self.p.ncols()
    }

    pub fn max_abs_deviation(&self, other: &JointDistribution) -> Option<f64> {
        (self.p.shape() == other.p.shape())
            .then(|| (&self.p - &other.p).iter().map(|x| x.abs()).fold(0.0, f64::max))
    }
}

#[derive(Debug, Clone)]
pub struct SchemeOutcome {
    pub final_state: StateVector,
    pub joint: JointDistribution,
}

fn require_mode(setup: &PointerSchemeSetup, mode: SchemeMode) -> Result<()> {
    if setup.mode != mode {
        return Err(Error::invalid(format!("setup is {:?}, expected {mode:?}", setup.mode)));
    }
    Ok(())
}

/// `Û_B Û_A |Ψ₀⟩`, with the joint read out by projecting onto pointer states.
pub fn run_two_pointer(setup: &PointerSchemeSetup) -> Result<SchemeOutcome> {
    require_mode(setup, SchemeMode::TwoPointer)?;
    let dims = setup.composite_dims();
    let psi = setup.initial_state()?;
    let after_a = StateVector::normalize(dims.clone(), apply(&shift_unitary_a(setup)?, &psi)?)?;
    let final_state = StateVector::normalize(dims.clone(), apply(&shift_unitary_b(setup)?, &after_a)?)?;

    let k = setup.small_count();
    let m = setup.m_pointer2.expect("two-pointer");
    let (na, nb) = (setup.obs_a.branch_count(), setup.obs_b.branch_count());
    let mut p = DMatrix::zeros(na, nb);
    for i in 0..na {
        let alpha = pointer_projector(setup.n_pointer1, i)?.embed(&dims, k)?;
        let on_alpha = alpha.matrix() * final_state.amps();
        for j in 0..nb {
            let beta = pointer_projector(m, j)?.embed(&dims, k + 1)?;
            p[(i, j)] = (beta.matrix() * &on_alpha).norm_squared();
        }
    }
    Ok(SchemeOutcome { final_state, joint: JointDistribution::new(p)? })
}

/// `Û_A (ψ₀ ⊗ |α₀⟩)`, with the joint read out as pointer-1 together with a
/// direct measurement of `B̂` on the small system.
pub fn run_one_pointer(setup: &PointerSchemeSetup) -> Result<SchemeOutcome> {
    require_mode(setup, SchemeMode::OnePointer)?;
    let dims = setup.composite_dims();
    let psi = setup.initial_state()?;
    let final_state = StateVector::normalize(dims.clone(), apply(&shift_unitary_a(setup)?, &psi)?)?;

    let (na, nb) = (setup.obs_a.branch_count(), setup.obs_b.branch_count());
    let mut p = DMatrix::zeros(na, nb);
    for i in 0..na {
        let alpha = pointer_projector(setup.n_pointer1, i)?;
        for j in 0..nb {
            let readout = setup.obs_b.projector(j)?.kron(&alpha);
            p[(i, j)] = apply(&readout, &final_state)?.norm_squared();
        }
    }
    Ok(SchemeOutcome { final_state, joint: JointDistribution::new(p)? })
}

/// Runs whichever scheme the setup is configured for.
pub fn run_scheme(setup: &PointerSchemeSetup) -> Result<SchemeOutcome> {
    match setup.mode {
        SchemeMode::TwoPointer => run_two_pointer(setup),
        SchemeMode::OnePointer => run_one_pointer(setup),
    }
}

/// `pᵢ = ∑ⱼ p_ij`.
pub fn marginal_a(joint: &JointDistribution) -> OutcomeDistribution {
    let probs = joint.p.row_iter().map(|row| row.sum()).collect();
    OutcomeDistribution::indexed(probs).expect("rows of a valid joint")
}

/// `pⱼ = ∑ᵢ p_ij`.
pub fn marginal_b(joint: &JointDistribution) -> OutcomeDistribution {
    let probs = joint.p.column_iter().map(|col| col.sum()).collect();
    OutcomeDistribution::indexed(probs).expect("columns of a valid joint")
}

/// `p_{j|i} = p_ij / pᵢ`.
pub fn conditional_b_given_a(joint: &JointDistribution, i: usize) -> Result<OutcomeDistribution> {
    if i >= joint.a_count() {
        return Err(Error::invalid(format!("branch {i} out of range")));
    }
    let row = joint.p.row(i);
    let pi = row.sum();
    if pi <= ZERO_PROB_TOL {
        return Err(Error::ZeroProbabilityBranch { branch: i, probability: pi });
    }
    OutcomeDistribution::indexed(row.iter().map(|x| x / pi).collect())
}

/// Worst `|p_{j|i} − Born_B(P̂ᵢψ₀/‖P̂ᵢψ₀‖)ⱼ|` over possible branches `i`.
pub fn projection_equivalence_report(setup: &PointerSchemeSetup) -> Result<f64> {
    let outcome = run_scheme(setup)?;
    let marginal = marginal_a(&outcome.joint);
    let mut worst: f64 = 0.0;
    for (i, pi) in marginal.iter() {
        if pi <= ZERO_PROB_TOL {
            continue;
        }
        let conditional = conditional_b_given_a(&outcome.joint, i)?;
        let collapsed = project_update(&setup.small_state, &setup.obs_a, i)?;
        let born = rule_probabilities(ProbabilityRule::Born, &collapsed, &setup.obs_b)?;
        worst = worst.max(conditional.max_abs_deviation(&born)?);
    }
    Ok(worst)
}

/// Independent readout: Born probability of every composite basis state of
/// the final two-pointer state, binned by the two pointer digits.
pub fn brute_force_joint(setup: &PointerSchemeSetup) -> Result<JointDistribution> {
    require_mode(setup, SchemeMode::TwoPointer)?;
    let outcome = run_two_pointer(setup)?;
    let dims = setup.composite_dims();
    let k = setup.small_count();
    let (na, nb) = (setup.obs_a.branch_count(), setup.obs_b.branch_count());
    let mut p = DMatrix::zeros(na, nb);
    for (index, amp) in outcome.final_state.amps().iter().enumerate() {
        let digits = decode_index(index, &dims);
        let (alpha, beta) = (digits[k], digits[k + 1]);
        let prob = amp.norm_sqr();
        if alpha < na && beta < nb {
            p[(alpha, beta)] += prob;
        } else if prob > ZERO_PROB_TOL {
            return Err(Error::invalid(format!(
                "pointer reading ({alpha}, {beta}) does not name a branch"
            )));
        }
    }
    JointDistribution::new(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{density_from_pure, partial_trace};

    fn up() -> StateVector {
        StateVector::basis(vec![2], 0).unwrap()
    }

    #[test]
    fn shift_is_cyclic() {
        let s = shift_matrix(3, 2);
        assert_eq!(s[(2, 0)], c(1.0, 0.0));
        assert_eq!(s[(0, 1)], c(1.0, 0.0));
        assert_eq!(s[(1, 2)], c(1.0, 0.0));
    }

    #[test]
    fn single_branch_a_is_product_shift() {
        let psi = StateVector::from_real(vec![3], &[1.0, 2.0, 2.0]).unwrap();
        let a = Observable::trivial(vec![3], 4.0).unwrap();
        let b = Observable::spin_z(2);
        let setup = PointerSchemeSetup::two_pointer(psi, a, b).unwrap().with_pointer_dims(3, None).unwrap();
        let ua = shift_unitary_a(&setup).unwrap();
        let expected = Operator::identity(vec![3])
            .unwrap()
            .kron(&Operator::new(vec![3], shift_matrix(3, 0)).unwrap())
            .kron(&Operator::identity(vec![3]).unwrap());
        assert_eq!(ua, expected);
    }

    #[test]
    fn conditional_not_for_sigma_z() {
        let psi = StateVector::from_real(vec![2], &[1.0, -1.0]).unwrap();
        let setup = PointerSchemeSetup::one_pointer(psi, Observable::sigma_z(), Observable::sigma_x()).unwrap();
        let ua = shift_unitary_a(&setup).unwrap();
        // flips the pointer when the small system is |↑⟩ = |0⟩
        // |00⟩↔|01⟩, |1x⟩ fixed
        let mut expected = DMatrix::zeros(4, 4);
        expected[(1, 0)] = c(1.0, 0.0);
        expected[(0, 1)] = c(1.0, 0.0);
        expected[(2, 2)] = c(1.0, 0.0);
        expected[(3, 3)] = c(1.0, 0.0);
        assert_eq!(ua.matrix(), &expected);
    }

    #[test]
    fn too_small_pointer_is_rejected() {
        let res = PointerSchemeSetup::two_pointer(up(), Observable::sigma_z(), Observable::sigma_x())
            .unwrap()
            .with_pointer_dims(1, None);
        assert!(matches!(res, Err(Error::InvalidInput(_))));
        let mismatched = PointerSchemeSetup::two_pointer(up(), Observable::spin_z(2), Observable::sigma_x());
        assert!(mismatched.is_err());
    }

    #[test]
    fn repeated_measurement_is_consistent() {
        let setup = PointerSchemeSetup::two_pointer(up(), Observable::sigma_z(), Observable::sigma_z()).unwrap();
        let out = run_two_pointer(&setup).unwrap();
        assert!((out.joint.get(1, 1) - 1.0).abs() < 1e-15);
        assert_eq!(out.joint.matrix().sum(), 1.0);
        let cond = conditional_b_given_a(&out.joint, 1).unwrap();
        assert_eq!(cond.probs(), &[0.0, 1.0]);
        assert!(matches!(
            conditional_b_given_a(&out.joint, 0),
            Err(Error::ZeroProbabilityBranch { .. })
        ));
    }

    #[test]
    fn sigma_z_then_sigma_x_on_up() {
        let setup = PointerSchemeSetup::two_pointer(up(), Observable::sigma_z(), Observable::sigma_x()).unwrap();
        let out = run_two_pointer(&setup).unwrap();
        // p_ij = ⟨ψ|PᵢRⱼPᵢ|ψ⟩ by hand: i = +1 branch only, |⟨±|0⟩|² = 1/2
        assert!(out.joint.get(0, 0).abs() < 1e-15);
        assert!(out.joint.get(0, 1).abs() < 1e-15);
        assert!((out.joint.get(1, 0) - 0.5).abs() < 1e-12);
        assert!((out.joint.get(1, 1) - 0.5).abs() < 1e-12);

        let one = run_one_pointer(&setup.in_mode(SchemeMode::OnePointer).unwrap()).unwrap();
        assert!(one.joint.max_abs_deviation(&out.joint).unwrap() < 1e-12);
        let brute = brute_force_joint(&setup).unwrap();
        assert!(brute.max_abs_deviation(&out.joint).unwrap() < 1e-12);
    }

    #[test]
    fn unitary_b_leaves_pointer_one_alone() {
        let psi = StateVector::from_real(vec![2], &[0.6, 0.8]).unwrap();
        let setup = PointerSchemeSetup::two_pointer(psi, Observable::sigma_x(), Observable::sigma_z()).unwrap();
        let dims = setup.composite_dims();
        let after_a = StateVector::normalize(
            dims.clone(),
            apply(&shift_unitary_a(&setup).unwrap(), &setup.initial_state().unwrap()).unwrap(),
        )
        .unwrap();
        let after_b =
            StateVector::normalize(dims, apply(&shift_unitary_b(&setup).unwrap(), &after_a).unwrap()).unwrap();
        let before = partial_trace(&density_from_pure(&after_a), &[1]).unwrap();
        let after = partial_trace(&density_from_pure(&after_b), &[1]).unwrap();
        assert!(before.max_deviation(&after).unwrap() < 1e-12);
    }

    #[test]
    fn single_branch_b_is_pure_shift() {
        let setup = PointerSchemeSetup::two_pointer(up(), Observable::sigma_x(), Observable::trivial(vec![2], 0.0).unwrap())
            .unwrap()
            .with_pointer_dims(2, Some(2))
            .unwrap();
        let ub = shift_unitary_b(&setup).unwrap();
        let expected = Operator::identity(vec![2, 2]).unwrap().kron(&Operator::new(vec![2], shift_matrix(2, 0)).unwrap());
        assert_eq!(ub, expected);
        assert!(ub.unitary_deviation() < 1e-12);
    }

    #[test]
    fn larger_pointers_keep_the_joint() {
        let psi = StateVector::from_real(vec![2], &[0.6, 0.8]).unwrap();
        let base = PointerSchemeSetup::two_pointer(psi, Observable::sigma_x(), Observable::sigma_z()).unwrap();
        let big = base.clone().with_pointer_dims(5, Some(4)).unwrap();
        let a = run_two_pointer(&base).unwrap().joint;
        let b = run_two_pointer(&big).unwrap().joint;
        assert!(a.max_abs_deviation(&b).unwrap() < 1e-12);
        assert!(brute_force_joint(&big).unwrap().max_abs_deviation(&b).unwrap() < 1e-12);
    }

    #[test]
    fn mode_mismatch_is_rejected() {
        let setup = PointerSchemeSetup::one_pointer(up(), Observable::sigma_z(), Observable::sigma_x()).unwrap();
        assert!(run_two_pointer(&setup).is_err());
        assert!(brute_force_joint(&setup).is_err());
        assert!(shift_unitary_b(&setup).is_err());
    }
}
