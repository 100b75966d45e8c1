use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Observable;
use crate::state::{resolve, StateSpec};

/// An input state with the desired final-time outputs.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainingPair {
    /// Catalogue name or ket expression the input was built from.
    pub label: String,
    pub input: StateSpec,
    pub targets: Vec<(Observable, f64)>,
}

impl TrainingPair {
    pub fn new(label: impl Into<String>, input: StateSpec, targets: Vec<(Observable, f64)>) -> Result<Self> {
        let label = label.into();
        for (i, (obs, t)) in targets.iter().enumerate() {
            if !(0.0..=1.0).contains(t) {
                return Err(Error::InvalidDataset(format!(
                    "{label}: target {obs} = {t} is outside [0, 1]"
                )));
            }
            if targets[..i].iter().any(|(o, _)| o == obs) {
                return Err(Error::InvalidDataset(format!("{label}: duplicate target {obs}")));
            }
        }
        if targets.is_empty() {
            return Err(Error::InvalidDataset(format!("{label}: no targets")));
        }
        Ok(TrainingPair { label, input, targets })
    }

    pub fn from_label(label: &str, targets: Vec<(Observable, f64)>) -> Result<Self> {
        TrainingPair::new(label, resolve(label)?, targets)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub name: String,
    pub pairs: Vec<TrainingPair>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DatasetFile {
    name: String,
    pairs: Vec<PairFile>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PairFile {
    state: String,
    targets: BTreeMap<Observable, f64>,
}

impl Dataset {
    pub fn output_count(&self) -> usize {
        self.pairs.iter().map(|p| p.targets.len()).sum()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: DatasetFile = serde_json::from_str(text)?;
        let pairs = file
            .pairs
            .into_iter()
            .map(|p| TrainingPair::from_label(&p.state, p.targets.into_iter().collect()))
            .collect::<Result<Vec<_>>>()?;
        if pairs.is_empty() {
            return Err(Error::InvalidDataset("dataset has no pairs".into()));
        }
        Ok(Dataset { name: file.name, pairs })
    }

    /// One pair per line, targets in observable order.
    pub fn to_json(&self) -> String {
        let mut s = String::new();
        s.push_str("{\n");
        let _ = writeln!(s, "  \"name\": {},", serde_json::to_string(&self.name).unwrap());
        s.push_str("  \"pairs\": [\n");
        for (i, p) in self.pairs.iter().enumerate() {
            let mut targets = p.targets.clone();
            targets.sort_by_key(|(o, _)| *o);
            let t: Vec<String> = targets.iter().map(|(o, v)| format!("\"{o}\": {v:?}")).collect();
            let sep = if i + 1 < self.pairs.len() { "," } else { "" };
            let _ = writeln!(
                s,
                "    {{\"state\": {}, \"targets\": {{{}}}}}{sep}",
                serde_json::to_string(&p.label).unwrap(),
                t.join(", ")
            );
        }
        s.push_str("  ]\n}\n");
        s
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Dataset::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }
}

/// Training sets shipped with the crate.
pub mod bundled {
    use super::Dataset;

    pub const SET1_JSON: &str = include_str!("../../data/set1.json");
    pub const SET2_JSON: &str = include_str!("../../data/set2.json");

    pub fn json(name: &str) -> Option<&'static str> {
        match name {
            "set1" => Some(SET1_JSON),
            "set2" => Some(SET2_JSON),
            _ => None,
        }
    }

    pub fn get(name: &str) -> Option<Dataset> {
        json(name).map(|j| Dataset::from_json(j).expect("bundled dataset is valid"))
    }

    /// Twelve pairwise pairs, targets on AB, AC and BC.
    pub fn set1() -> Dataset {
        get("set1").unwrap()
    }

    /// The twelve pairwise pairs plus `GHZ_minus`, targets on all four
    /// observables.
    pub fn set2() -> Dataset {
        get("set2").unwrap()
    }
}
