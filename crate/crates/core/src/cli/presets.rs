//! Built-in scenario files and the named states and observables the parser knows.

use std::fmt::Write;

pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    pub text: &'static str,
}

macro_rules! preset {
    ($name:literal, $description:literal) => {
        Preset {
            name: $name,
            description: $description,
            text: include_str!(concat!("../../scenarios/", $name, ".scn")),
        }
    };
}

pub const PRESETS: &[Preset] = &[
    preset!("epr_bohm", "spin copied onto a spin pointer by a controlled-NOT gives the singlet"),
    preset!("two_pointer", "σz then σx read out by two shift-coupled pointers"),
    preset!("two_pointer_degenerate", "qutrit, degenerate first observable, pointers larger than needed"),
    preset!("one_pointer", "σz recorded on a pointer, σx measured directly afterwards"),
    preset!("stern_gerlach", "spin-1 sub-beams that differ only by a phase"),
    preset!("ll_prepare", "result-dependent unitaries preparing one fixed state"),
    preset!("ll_random", "random post-measurement unitaries leave probabilities unchanged"),
    preset!("telepathy_born", "Born-rule Bob: zero signaling gap"),
    preset!("telepathy_nonborn", "exponent-rule Bob (q = 2) on √0.36|00⟩ + √0.64|11⟩: nonzero gap"),
    preset!("telepathy_bell", "maximally entangled pair with Born marginals (1/2, 1/2)"),
    preset!("entropy_demo", "entropy before and after nonselective and selective measurement"),
];

pub const STATES: &[(&str, &str)] = &[
    ("epr_bohm", "(|↑⟩ − |↓⟩)/√2 on one qubit"),
    ("singlet", "(|↑↓⟩ − |↓↑⟩)/√2"),
    ("bell", "(|00⟩ + |11⟩)/√2"),
    ("asymmetric(p)", "√p|00⟩ + √(1−p)|11⟩"),
    ("up, down", "|↑⟩ = |0⟩, |↓⟩ = |1⟩"),
    ("plus, minus", "(|0⟩ ± |1⟩)/√2"),
    ("basis(k)", "computational basis state k of the given dims"),
    ("[a, b, ...]", "amplitude list, normalized on load"),
];

pub const OBSERVABLES: &[(&str, &str)] = &[
    ("sigma_x, sigma_y, sigma_z", "Pauli matrices"),
    ("spin_z(j)", "S_z for spin j, dimension 2j + 1"),
    ("identity(d)", "single-branch observable on dimension d"),
    ("[a, b; c, d]", "Hermitian matrix, rows split by `;`"),
    ("v0: [..] | v1: [..]", "explicit eigenvalue: projector branches"),
];

pub fn find_preset(name: &str) -> Option<&'static Preset> {
    PRESETS.iter().find(|p| p.name == name)
}

pub fn list_presets() -> String {
    let mut out = String::from("scenarios:\n");
    for p in PRESETS {
        let _ = writeln!(out, "  {:<24} {}", p.name, p.description);
    }
    out.push_str("states:\n");
    for (name, description) in STATES {
        let _ = writeln!(out, "  {name:<24} {description}");
    }
    out.push_str("observables:\n");
    for (name, description) in OBSERVABLES {
        let _ = writeln!(out, "  {name:<24} {description}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::scenario::parse_scenario;

    #[test]
    fn listing_names_the_main_scenarios() {
        let listing = list_presets();
        for name in ["epr_bohm", "stern_gerlach", "telepathy"] {
            assert!(listing.contains(name), "{name}");
        }
    }

    #[test]
    fn every_preset_parses() {
        for p in PRESETS {
            parse_scenario(p.text).unwrap_or_else(|e| panic!("{}: {e}", p.name));
        }
    }
}
