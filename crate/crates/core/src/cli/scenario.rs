//! Scenario file format.
//!
//! One `key = value` pair per line, `#` starts a comment. Values are scalars,
//! preset names, bracketed lists (`[0.6, 0+0.8i]`), matrices with rows split
//! by `;` (`[1, 0; 0, -1]`), or projector families
//! (`0: [1, 0; 0, 0] | 1: [0, 0; 0, 1]`). Complex numbers are written
//! `re+imi`, `re-imi`, `imi` or `re`.

use std::collections::BTreeMap;

use crate::error::Error;
use crate::rules::ProbabilityRule;
use crate::state::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioKind {
    TwoPointer,
    OnePointer,
    Epr,
    SternGerlach,
    LlScheme,
    Telepathy,
    EntropyDemo,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 7] = [
        ScenarioKind::TwoPointer,
        ScenarioKind::OnePointer,
        ScenarioKind::Epr,
        ScenarioKind::SternGerlach,
        ScenarioKind::LlScheme,
        ScenarioKind::Telepathy,
        ScenarioKind::EntropyDemo,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::TwoPointer => "two_pointer",
            ScenarioKind::OnePointer => "one_pointer",
            ScenarioKind::Epr => "epr",
            ScenarioKind::SternGerlach => "stern_gerlach",
            ScenarioKind::LlScheme => "ll_scheme",
            ScenarioKind::Telepathy => "telepathy",
            ScenarioKind::EntropyDemo => "entropy_demo",
        }
    }

    fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }

    /// Fields accepted in addition to `kind`, `id` and `seed`.
    fn fields(self) -> &'static [&'static str] {
        match self {
            ScenarioKind::TwoPointer => &["state", "dims", "obs_a", "obs_b", "pointer_n", "pointer_m"],
            ScenarioKind::OnePointer => &["state", "dims", "obs_a", "obs_b", "pointer_n"],
            ScenarioKind::Epr => &["state", "obs_b"],
            ScenarioKind::SternGerlach => &["state", "dims", "obs_a", "omega", "dt"],
            ScenarioKind::LlScheme => &["state", "dims", "obs_a", "ll_unitaries", "target"],
            ScenarioKind::Telepathy => &["state", "dims", "obs_a", "obs_b", "rule", "q", "shots"],
            ScenarioKind::EntropyDemo => &["state", "dims", "obs_a", "noise"],
        }
    }
}

const COMMON_FIELDS: [&str; 3] = ["kind", "id", "seed"];
const ALL_FIELDS: [&str; 17] = [
    "kind", "id", "seed", "state", "dims", "obs_a", "obs_b", "pointer_n", "pointer_m", "omega", "dt",
    "ll_unitaries", "target", "rule", "q", "shots", "noise",
];

#[derive(Debug, Clone, PartialEq)]
pub enum StateSpec {
    /// `(|↑⟩ − |↓⟩)/√2`
    EprBohm,
    /// `(|↑↓⟩ − |↓↑⟩)/√2`
    Singlet,
    /// `(|00⟩ + |11⟩)/√2`
    Bell,
    /// `√p|00⟩ + √(1−p)|11⟩`
    Asymmetric(f64),
    Up,
    Down,
    Plus,
    Minus,
    /// Computational basis state `k` (needs `dims`).
    Basis(usize),
    Amplitudes(Vec<C64>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum ObservableSpec {
    SigmaX,
    SigmaY,
    SigmaZ,
    /// `S_z` for spin `twice_spin / 2`.
    SpinZ(usize),
    Identity(usize),
    Matrix(Vec<Vec<C64>>),
    Branches(Vec<(f64, Vec<Vec<C64>>)>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LlUnitaries {
    Identity,
    Prepare,
    Random,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioFile {
    pub kind: ScenarioKind,
    pub id: Option<String>,
    pub seed: Option<u64>,
    pub state: Option<StateSpec>,
    pub dims: Option<Vec<usize>>,
    pub obs_a: Option<ObservableSpec>,
    pub obs_b: Option<ObservableSpec>,
    pub pointer_n: Option<usize>,
    pub pointer_m: Option<usize>,
    pub omega: Option<Vec<f64>>,
    pub dt: Option<f64>,
    pub ll_unitaries: Option<LlUnitaries>,
    pub target: Option<StateSpec>,
    pub rule: ProbabilityRule,
    pub shots: Option<u64>,
    pub noise: Option<f64>,
}

fn perr(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

/// Parses `a`, `a+bi`, `a-bi`, `bi`, `i`, `-i`.
pub fn parse_complex(text: &str) -> Option<C64> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return None;
    }
    let Some(body) = s.strip_suffix('i') else {
        return s.parse::<f64>().ok().filter(|x| x.is_finite()).map(|re| C64::new(re, 0.0));
    };
    let bytes = body.as_bytes();
    // split before the last sign that is not an exponent sign
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let coeff = |t: &str| -> Option<f64> {
        match t {
            "" | "+" => Some(1.0),
            "-" => Some(-1.0),
            _ => t.parse::<f64>().ok().filter(|x| x.is_finite()),
        }
    };
    match split {
        Some(k) => {
            let re = body[..k].parse::<f64>().ok().filter(|x| x.is_finite())?;
            Some(C64::new(re, coeff(&body[k..])?))
        }
        None => Some(C64::new(0.0, coeff(body)?)),
    }
}

fn strip_brackets(text: &str) -> &str {
    let t = text.trim();
    t.strip_prefix('[')
        .and_then(|t| t.strip_suffix(']'))
        .unwrap_or(t)
        .trim()
}

fn split_items(text: &str) -> impl Iterator<Item = &str> {
    text.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty())
}

fn parse_complex_list(line: usize, text: &str) -> Result<Vec<C64>, Error> {
    // whitespace inside a number like "0.6 + 0.8i" is not supported; commas
    // separate entries when present
    let inner = strip_brackets(text);
    let items: Vec<&str> = if inner.contains(',') {
        inner.split(',').map(str::trim).filter(|t| !t.is_empty()).collect()
    } else {
        inner.split_whitespace().collect()
    };
    if items.is_empty() {
        return Err(perr(line, "empty list"));
    }
    items
        .iter()
        .map(|t| parse_complex(t).ok_or_else(|| perr(line, format!("`{t}` is not a complex number"))))
        .collect()
}

fn parse_real_list(line: usize, text: &str) -> Result<Vec<f64>, Error> {
    let items: Vec<&str> = split_items(strip_brackets(text)).collect();
    if items.is_empty() {
        return Err(perr(line, "empty list"));
    }
    items.iter().map(|t| parse_real(line, t)).collect()
}

fn parse_real(line: usize, text: &str) -> Result<f64, Error> {
    text.trim()
        .parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| perr(line, format!("`{}` is not a finite number", text.trim())))
}

fn parse_uint<T: std::str::FromStr>(line: usize, text: &str) -> Result<T, Error> {
    text.trim()
        .parse::<T>()
        .map_err(|_| perr(line, format!("`{}` is not a nonnegative integer", text.trim())))
}

fn parse_matrix(line: usize, text: &str) -> Result<Vec<Vec<C64>>, Error> {
    let inner = strip_brackets(text);
    let rows: Vec<Vec<C64>> = inner
        .split(';')
        .map(|row| parse_complex_list(line, row))
        .collect::<Result<_, _>>()?;
    let n = rows.len();
    if let Some(bad) = rows.iter().position(|r| r.len() != n) {
        return Err(perr(line, format!("matrix row {bad} has {} entries, expected {n}", rows[bad].len())));
    }
    Ok(rows)
}

/// `name(arg)` → `Some(("name", "arg"))`.
fn call_syntax(text: &str) -> Option<(&str, &str)> {
    let (name, rest) = text.split_once('(')?;
    let arg = rest.strip_suffix(')')?;
    Some((name.trim(), arg.trim()))
}

fn parse_state(line: usize, text: &str) -> Result<StateSpec, Error> {
    let t = text.trim();
    if t.starts_with('[') {
        return parse_complex_list(line, t).map(StateSpec::Amplitudes);
    }
    if let Some((name, arg)) = call_syntax(t) {
        return match name {
            "asymmetric" => {
                let p = parse_real(line, arg)?;
                if !(0.0..=1.0).contains(&p) {
                    return Err(perr(line, format!("asymmetric weight {p} outside [0, 1]")));
                }
                Ok(StateSpec::Asymmetric(p))
            }
            "basis" => parse_uint(line, arg).map(StateSpec::Basis),
            other => Err(perr(line, format!("unknown state preset `{other}`"))),
        };
    }
    match t {
        "epr_bohm" => Ok(StateSpec::EprBohm),
        "singlet" => Ok(StateSpec::Singlet),
        "bell" => Ok(StateSpec::Bell),
        "up" => Ok(StateSpec::Up),
        "down" => Ok(StateSpec::Down),
        "plus" => Ok(StateSpec::Plus),
        "minus" => Ok(StateSpec::Minus),
        other => Err(perr(line, format!("unknown state preset `{other}`"))),
    }
}

fn parse_observable(line: usize, text: &str) -> Result<ObservableSpec, Error> {
    let t = text.trim();
    if t.contains(':') {
        let branches = t
            .split('|')
            .map(|part| {
                let (value, matrix) = part
                    .split_once(':')
                    .ok_or_else(|| perr(line, "projector branch must be `eigenvalue: [matrix]`"))?;
                Ok((parse_real(line, value)?, parse_matrix(line, matrix)?))
            })
            .collect::<Result<Vec<_>, Error>>()?;
        return Ok(ObservableSpec::Branches(branches));
    }
    if t.starts_with('[') {
        return parse_matrix(line, t).map(ObservableSpec::Matrix);
    }
    if let Some((name, arg)) = call_syntax(t) {
        return match name {
            "spin_z" => {
                let j = parse_real(line, arg)?;
                let twice = (2.0 * j).round();
                if twice < 1.0 || (2.0 * j - twice).abs() > 1e-12 {
                    return Err(perr(line, format!("spin {j} is not a positive half-integer")));
                }
                Ok(ObservableSpec::SpinZ(twice as usize))
            }
            "identity" => {
                let d: usize = parse_uint(line, arg)?;
                if d == 0 {
                    return Err(perr(line, "identity dimension must be positive"));
                }
                Ok(ObservableSpec::Identity(d))
            }
            other => Err(perr(line, format!("unknown observable preset `{other}`"))),
        };
    }
    match t {
        "sigma_x" => Ok(ObservableSpec::SigmaX),
        "sigma_y" => Ok(ObservableSpec::SigmaY),
        "sigma_z" => Ok(ObservableSpec::SigmaZ),
        other => Err(perr(line, format!("unknown observable preset `{other}`"))),
    }
}

/// Parses the text of a scenario file.
pub fn parse_scenario(text: &str) -> Result<ScenarioFile, Error> {
    let mut fields: BTreeMap<&str, (usize, &str)> = BTreeMap::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| perr(line, "expected `key = value`"))?;
        let (key, value) = (key.trim(), value.trim());
        if !ALL_FIELDS.contains(&key) {
            return Err(perr(line, format!("unknown field `{key}`")));
        }
        if value.is_empty() {
            return Err(perr(line, format!("field `{key}` has no value")));
        }
        if let Some((first, _)) = fields.insert(key, (line, value)) {
            return Err(perr(line, format!("field `{key}` already set on line {first}")));
        }
    }

    let &(kind_line, kind_text) = fields
        .get("kind")
        .ok_or_else(|| perr(0, "missing required field `kind`"))?;
    let kind = ScenarioKind::from_name(kind_text)
        .ok_or_else(|| perr(kind_line, format!("unknown kind `{kind_text}`")))?;
    for (key, (line, _)) in &fields {
        if !COMMON_FIELDS.contains(key) && !kind.fields().contains(key) {
            return Err(perr(*line, format!("field `{key}` does not apply to kind {}", kind.name())));
        }
    }

    let get = |key: &str| fields.get(key).copied();
    let rule = match (get("rule"), get("q")) {
        (None, None) => ProbabilityRule::Born,
        (Some((_, "born")), None) => ProbabilityRule::Born,
        (Some((line, "born")), Some(_)) => return Err(perr(line, "`q` only applies to rule nonborn_exponent")),
        (Some((line, "nonborn_exponent")), q) => {
            let (qline, qtext) = q.ok_or_else(|| perr(line, "rule nonborn_exponent needs `q`"))?;
            let q = parse_real(qline, qtext)?;
            ProbabilityRule::nonborn_exponent(q).map_err(|_| perr(qline, format!("exponent q = {q} must be positive")))?
        }
        (Some((line, other)), _) => return Err(perr(line, format!("unknown rule `{other}`"))),
        (None, Some((line, _))) => return Err(perr(line, "`q` given without `rule = nonborn_exponent`")),
    };

    let positive = |key: &str| -> Result<Option<usize>, Error> {
        get(key)
            .map(|(line, v)| {
                let n: usize = parse_uint(line, v)?;
                if n == 0 {
                    return Err(perr(line, format!("`{key}` must be at least 1")));
                }
                Ok(n)
            })
            .transpose()
    };

    Ok(ScenarioFile {
        kind,
        id: get("id").map(|(_, v)| v.to_string()),
        seed: get("seed").map(|(l, v)| parse_uint(l, v)).transpose()?,
        state: get("state").map(|(l, v)| parse_state(l, v)).transpose()?,
        dims: get("dims")
            .map(|(l, v)| {
                let dims = split_items(strip_brackets(v))
                    .map(|t| parse_uint::<usize>(l, t))
                    .collect::<Result<Vec<_>, _>>()?;
                if dims.is_empty() || dims.contains(&0) {
                    return Err(perr(l, "dims must be a nonempty list of positive integers"));
                }
                Ok(dims)
            })
            .transpose()?,
        obs_a: get("obs_a").map(|(l, v)| parse_observable(l, v)).transpose()?,
        obs_b: get("obs_b").map(|(l, v)| parse_observable(l, v)).transpose()?,
        pointer_n: positive("pointer_n")?,
        pointer_m: positive("pointer_m")?,
        omega: get("omega").map(|(l, v)| parse_real_list(l, v)).transpose()?,
        dt: get("dt").map(|(l, v)| parse_real(l, v)).transpose()?,
        ll_unitaries: get("ll_unitaries")
            .map(|(l, v)| match v {
                "identity" => Ok(LlUnitaries::Identity),
                "prepare" => Ok(LlUnitaries::Prepare),
                "random" => Ok(LlUnitaries::Random),
                other => Err(perr(l, format!("unknown ll_unitaries `{other}`"))),
            })
            .transpose()?,
        target: get("target").map(|(l, v)| parse_state(l, v)).transpose()?,
        rule,
        shots: get("shots").map(|(l, v)| parse_uint(l, v)).transpose()?,
        noise: get("noise")
            .map(|(l, v)| {
                let x = parse_real(l, v)?;
                if !(0.0..=1.0).contains(&x) {
                    return Err(perr(l, format!("noise {x} outside [0, 1]")));
                }
                Ok(x)
            })
            .transpose()?,
    })
}
