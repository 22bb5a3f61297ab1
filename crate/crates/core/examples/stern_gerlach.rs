// Spin sub-beams that each pick up a phase e^{-iω_m δt}. The outcome
// probabilities are those of the plain measurement and every post-state is
// the collapsed state up to that phase.

use std::error::Error;

use qmeasure::observable::Observable;
use qmeasure::rules::{ll_channel, project_update, rule_probabilities, ProbabilityRule};
use qmeasure::state::{inner, Operator, StateVector, C64};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let sz = Observable::spin_z(2);
    let psi = StateVector::normalize(
        vec![3],
        vec![C64::new(1.0, 0.0), C64::new(1.0, 1.0), C64::new(-1.0, 0.0)].into(),
    )?;
    let (omega0, dt) = (2.0, 0.35);
    let unitaries: Vec<Operator> = sz
        .eigenvalues()
        .iter()
        .map(|m| Operator::identity(vec![3]).map(|id| id.scale(C64::from_polar(1.0, -omega0 * m * dt))))
        .collect::<Result<_, _>>()?;

    let born = rule_probabilities(ProbabilityRule::Born, &psi, &sz)?;
    for rec in ll_channel(&psi, &sz, &unitaries)? {
        let collapsed = project_update(&psi, &sz, rec.branch_index)?;
        let overlap = inner(&collapsed, &rec.post_state)?;
        println!(
            "m={:+}: p={:.4} (Born {:.4})  ⟨Ψ_m|φ_m⟩ = {:.4} e^{{i·{:+.4}}}",
            rec.eigenvalue,
            rec.probability,
            born.probs()[rec.branch_index],
            overlap.norm(),
            overlap.arg()
        );
        assert!((overlap.norm() - 1.0).abs() < 1e-12);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
