//! Parsing of the named input sets and machines accepted on the command line.

use std::fmt;
use std::str::FromStr;

use clonebench::cloners::{ancilla_pqcm, economic_pqcm, optimal_n_cloner, uqcm, Cloner, Machine};
use clonebench::states::{
    bb84, equatorial_pair, equatorial_ring, equatorial_trio, six_state, tetrahedron, InputSet,
};

/// Default `|a|` for `pqcm-ancilla` without an explicit value.
pub const DEFAULT_ANCILLA_A: f64 = 0.5;

/// An input set given by name, `equator:<count>`, `pair:<degrees>`, an
/// inline JSON object, or a path to a JSON file.
#[derive(Clone, Debug)]
pub struct SetSpec {
    pub text: String,
    pub set: InputSet,
}

impl FromStr for SetSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let set = parse_set(s.trim())?;
        Ok(Self {
            text: s.to_string(),
            set,
        })
    }
}

impl fmt::Display for SetSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

fn parse_set(s: &str) -> Result<InputSet, String> {
    if s.starts_with('{') {
        return InputSet::from_json(s).map_err(|e| format!("inline set: {e}"));
    }
    if s.ends_with(".json") {
        let text = std::fs::read_to_string(s).map_err(|e| format!("{s}: {e}"))?;
        return InputSet::from_json(&text).map_err(|e| format!("{s}: {e}"));
    }
    match s {
        "trio" => return Ok(equatorial_trio()),
        "bb84" => return Ok(bb84()),
        "six-state" => return Ok(six_state()),
        "tetrahedron" => return Ok(tetrahedron()),
        _ => {}
    }
    if let Some(count) = s.strip_prefix("equator:") {
        let n: usize = count
            .parse()
            .map_err(|_| format!("bad state count in '{s}'"))?;
        return equatorial_ring(n).map_err(|e| e.to_string());
    }
    if let Some(deg) = s.strip_prefix("pair:") {
        let d: f64 = deg.parse().map_err(|_| format!("bad angle in '{s}'"))?;
        return equatorial_pair(d.to_radians()).map_err(|e| e.to_string());
    }
    Err(format!(
        "unknown set '{s}' (expected trio, bb84, six-state, tetrahedron, equator:<count>, \
         pair:<degrees>, inline JSON or a .json file)"
    ))
}

/// Which known machine to verify.
#[derive(Clone, Debug, PartialEq)]
pub enum MachineSpec {
    PqcmEconomic,
    PqcmAncilla(f64),
    Uqcm,
    NClone(usize),
}

impl FromStr for MachineSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim() {
            "pqcm-economic" => return Ok(Self::PqcmEconomic),
            "pqcm-ancilla" => return Ok(Self::PqcmAncilla(DEFAULT_ANCILLA_A)),
            "uqcm" => return Ok(Self::Uqcm),
            _ => {}
        }
        if let Some(a) = s.strip_prefix("pqcm-ancilla:") {
            let a: f64 = a.parse().map_err(|_| format!("bad |a| in '{s}'"))?;
            if !(0.0..=1.0).contains(&a) {
                return Err(format!("|a| = {a} outside [0, 1]"));
            }
            return Ok(Self::PqcmAncilla(a));
        }
        if let Some(n) = s.strip_prefix("nclone:") {
            let n: usize = n.parse().map_err(|_| format!("bad copy number in '{s}'"))?;
            if !(1..=10).contains(&n) {
                return Err(format!("nclone:{n} outside 1..=10"));
            }
            return Ok(Self::NClone(n));
        }
        Err(format!(
            "unknown machine '{s}' (expected pqcm-economic, pqcm-ancilla[:<|a|>], uqcm, nclone:<n>)"
        ))
    }
}

impl fmt::Display for MachineSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::PqcmEconomic => f.write_str("pqcm-economic"),
            Self::PqcmAncilla(a) => write!(f, "pqcm-ancilla:{a}"),
            Self::Uqcm => f.write_str("uqcm"),
            Self::NClone(n) => write!(f, "nclone:{n}"),
        }
    }
}

impl MachineSpec {
    pub fn build(&self) -> Machine {
        match self {
            Self::PqcmEconomic => Machine::Economic(economic_pqcm()),
            Self::PqcmAncilla(a) => Machine::Ancilla(ancilla_pqcm(*a).expect("checked range")),
            Self::Uqcm => Machine::Ancilla(uqcm()),
            Self::NClone(n) => Machine::SymmetricN(optimal_n_cloner(*n).expect("checked range")),
        }
    }

    /// True when the machine is built to be optimal for every equatorial input.
    pub fn is_phase_covariant(&self) -> bool {
        !matches!(self, Self::Uqcm)
    }

    pub fn is_universal(&self) -> bool {
        matches!(self, Self::Uqcm)
    }

    pub fn isometry(&self) -> clonebench::cloners::CloneIsometry {
        self.build()
            .to_isometry()
            .expect("known machines are valid")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn named_sets() {
        for (name, len) in [
            ("trio", 3),
            ("bb84", 4),
            ("six-state", 6),
            ("tetrahedron", 4),
            ("equator:5", 5),
            ("pair:90", 2),
        ] {
            assert_eq!(name.parse::<SetSpec>().unwrap().set.len(), len, "{name}");
        }
        assert!("equator:0".parse::<SetSpec>().is_err());
        assert!("pair:0".parse::<SetSpec>().is_err());
        assert!("pair:x".parse::<SetSpec>().is_err());
        assert!("cube".parse::<SetSpec>().is_err());
    }

    #[test]
    fn inline_json_set() {
        let s: SetSpec =
            r#"{"label":"two","points":[{"theta":0.0,"phi":0.0},{"theta":1.0,"phi":2.0}]}"#
                .parse()
                .unwrap();
        assert_eq!(s.set.len(), 2);
        assert!(r#"{"label":"bad","points":[{"theta":4.0,"phi":0.0}]}"#
            .parse::<SetSpec>()
            .is_err());
    }

    #[test]
    fn machine_names() {
        assert_eq!("uqcm".parse::<MachineSpec>().unwrap(), MachineSpec::Uqcm);
        assert_eq!(
            "nclone:4".parse::<MachineSpec>().unwrap(),
            MachineSpec::NClone(4)
        );
        assert_eq!(
            "pqcm-ancilla:0.3".parse::<MachineSpec>().unwrap(),
            MachineSpec::PqcmAncilla(0.3)
        );
        assert!("pqcm-ancilla:1.5".parse::<MachineSpec>().is_err());
        assert!("nclone:0".parse::<MachineSpec>().is_err());
        assert!("cloner".parse::<MachineSpec>().is_err());
    }
}
