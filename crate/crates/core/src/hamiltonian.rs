//! The parameterized three-qubit Hamiltonian and its piecewise-constant
//! schedule.
//!
//! All parameters are in MHz. [`UnitConvention`] turns MHz into rad/ns so that
//! the built matrix is `H/hbar` and the equation of motion reads
//! `d rho/dt = -i [H/hbar, rho]` with time in ns.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::ops::Add;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{embed_pauli, ComplexMatrix, PauliAxis, Qubit, DIM};

/// Parameters per chunk.
pub const PARAMS_PER_CHUNK: usize = 9;

pub const PARAM_NAMES: [&str; PARAMS_PER_CHUNK] = [
    "K_A", "K_B", "K_C", "eps_A", "eps_B", "eps_C", "zeta_AB", "zeta_AC", "zeta_BC",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum UnitConvention {
    /// `H/hbar = 2*pi*f`: the MHz values are ordinary frequencies.
    Angular,
    /// `H/hbar = f`: the MHz values are already angular frequencies. This is
    /// the convention the bundled schedules reproduce.
    #[default]
    Plain,
}

impl UnitConvention {
    pub const BOTH: [UnitConvention; 2] = [UnitConvention::Angular, UnitConvention::Plain];

    /// rad/ns per MHz.
    pub fn omega_per_mhz(self) -> f64 {
        match self {
            UnitConvention::Angular => 2.0 * PI * 1e-3,
            UnitConvention::Plain => 1e-3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            UnitConvention::Angular => "angular",
            UnitConvention::Plain => "plain",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "angular" => Some(UnitConvention::Angular),
            "plain" => Some(UnitConvention::Plain),
            _ => None,
        }
    }
}

/// Tunnelling amplitudes, biases and couplings for one time chunk, in MHz.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct ParameterSet {
    /// `K_A, K_B, K_C`
    pub tunneling: [f64; 3],
    /// `eps_A, eps_B, eps_C`
    pub bias: [f64; 3],
    /// `zeta_AB, zeta_AC, zeta_BC`
    pub coupling: [f64; 3],
}

impl ParameterSet {
    pub fn from_array(v: [f64; PARAMS_PER_CHUNK]) -> Self {
        ParameterSet {
            tunneling: [v[0], v[1], v[2]],
            bias: [v[3], v[4], v[5]],
            coupling: [v[6], v[7], v[8]],
        }
    }

    pub fn to_array(&self) -> [f64; PARAMS_PER_CHUNK] {
        let [ka, kb, kc] = self.tunneling;
        let [ea, eb, ec] = self.bias;
        let [zab, zac, zbc] = self.coupling;
        [ka, kb, kc, ea, eb, ec, zab, zac, zbc]
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|x| x.is_finite())
    }
}

impl Add for ParameterSet {
    type Output = ParameterSet;
    fn add(self, rhs: ParameterSet) -> ParameterSet {
        let (a, b) = (self.to_array(), rhs.to_array());
        ParameterSet::from_array(std::array::from_fn(|i| a[i] + b[i]))
    }
}

/// Operator multiplying each parameter, as a real row-major 8x8 matrix:
/// `sigma_x` embeddings for the tunnelling terms, `sigma_z` for the biases and
/// `sigma_z sigma_z` products for the couplings.
pub fn generators() -> [[f64; DIM * DIM]; PARAMS_PER_CHUNK] {
    let mut out = [[0.0; DIM * DIM]; PARAMS_PER_CHUNK];
    let real = |m: &ComplexMatrix| -> [f64; DIM * DIM] {
        std::array::from_fn(|i| m.as_slice()[i].re)
    };
    for (i, q) in Qubit::ALL.into_iter().enumerate() {
        out[i] = real(&embed_pauli(PauliAxis::X, q));
        out[3 + i] = real(&embed_pauli(PauliAxis::Z, q));
    }
    let pairs = [(Qubit::A, Qubit::B), (Qubit::A, Qubit::C), (Qubit::B, Qubit::C)];
    for (i, (p, q)) in pairs.into_iter().enumerate() {
        out[6 + i] = real(&(&embed_pauli(PauliAxis::Z, p) * &embed_pauli(PauliAxis::Z, q)));
    }
    out
}

/// `H/hbar` in rad/ns as a real symmetric row-major array.
pub fn hamiltonian_real(p: &ParameterSet, u: UnitConvention) -> [f64; DIM * DIM] {
    let gens = generators();
    let omega = u.omega_per_mhz();
    let mut h = [0.0; DIM * DIM];
    for (g, coef) in gens.iter().zip(p.to_array()) {
        for (x, gi) in h.iter_mut().zip(g) {
            *x += coef * gi;
        }
    }
    for x in h.iter_mut() {
        *x *= omega;
    }
    h
}

/// `H/hbar` in rad/ns.
pub fn build_hamiltonian(p: &ParameterSet, u: UnitConvention) -> ComplexMatrix {
    ComplexMatrix::from_real_row_major(&hamiltonian_real(p, u))
}

/// Piecewise-constant parameters: chunk `k` covers `[k*d, (k+1)*d)`, and the
/// final instant belongs to the last chunk.
#[derive(Clone, Debug, PartialEq)]
pub struct Schedule {
    pub chunks: Vec<ParameterSet>,
    pub chunk_duration: f64,
    pub convention: UnitConvention,
}

pub const DEFAULT_CHUNK_NS: f64 = 75.0;
pub const DEFAULT_CHUNKS: usize = 4;

impl Schedule {
    pub fn new(chunks: Vec<ParameterSet>, chunk_duration: f64, convention: UnitConvention) -> Result<Self> {
        if chunks.is_empty() {
            return Err(Error::InvalidSchedule("schedule has no chunks".into()));
        }
        if !(chunk_duration > 0.0) || !chunk_duration.is_finite() {
            return Err(Error::InvalidSchedule(format!(
                "chunk duration {chunk_duration} ns must be positive"
            )));
        }
        if let Some(i) = chunks.iter().position(|c| !c.is_finite()) {
            return Err(Error::InvalidSchedule(format!("chunk {i} has a non-finite value")));
        }
        Ok(Schedule {
            chunks,
            chunk_duration,
            convention,
        })
    }

    /// Four equal chunks of 75 ns.
    pub fn uniform(p: ParameterSet, convention: UnitConvention) -> Self {
        Schedule {
            chunks: vec![p; DEFAULT_CHUNKS],
            chunk_duration: DEFAULT_CHUNK_NS,
            convention,
        }
    }

    pub fn total_time(&self) -> f64 {
        self.chunks.len() as f64 * self.chunk_duration
    }

    pub fn chunk_index(&self, t: f64) -> Result<usize> {
        let t_final = self.total_time();
        if !(0.0..=t_final + 1e-12).contains(&t) {
            return Err(Error::OutOfRange { t, t_final });
        }
        let k = (t / self.chunk_duration).floor() as usize;
        Ok(k.min(self.chunks.len() - 1))
    }

    pub fn params_at(&self, t: f64) -> Result<&ParameterSet> {
        Ok(&self.chunks[self.chunk_index(t)?])
    }

    /// Chunk-major, `(K_A, K_B, K_C, eps_A, eps_B, eps_C, zeta_AB, zeta_AC, zeta_BC)`
    /// within each chunk.
    pub fn flatten(&self) -> Vec<f64> {
        self.chunks.iter().flat_map(|c| c.to_array()).collect()
    }

    pub fn unflatten(values: &[f64], chunk_duration: f64, convention: UnitConvention) -> Result<Self> {
        if values.len() % PARAMS_PER_CHUNK != 0 {
            return Err(Error::InvalidSchedule(format!(
                "{} values is not a multiple of {PARAMS_PER_CHUNK}",
                values.len()
            )));
        }
        let chunks = values
            .chunks_exact(PARAMS_PER_CHUNK)
            .map(|c| ParameterSet::from_array(c.try_into().expect("exact chunk")))
            .collect();
        Schedule::new(chunks, chunk_duration, convention)
    }

    pub fn with_values(&self, values: &[f64]) -> Result<Self> {
        Schedule::unflatten(values, self.chunk_duration, self.convention)
    }

    /// Negated Hamiltonian with the chunk order reversed: integrating it forward
    /// undoes the original evolution.
    pub fn time_reversed(&self) -> Self {
        let chunks = self
            .chunks
            .iter()
            .rev()
            .map(|c| ParameterSet::from_array(c.to_array().map(|x| -x)))
            .collect();
        Schedule {
            chunks,
            chunk_duration: self.chunk_duration,
            convention: self.convention,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ScheduleFile = serde_json::from_str(text)?;
        let chunks = file.chunks.into_iter().map(ParameterSet::from_array).collect();
        Schedule::new(chunks, file.chunk_duration_ns, file.convention)
    }

    /// One chunk per line; numbers use the shortest exact representation.
    pub fn to_json(&self) -> String {
        let mut s = String::new();
        s.push_str("{\n");
        let _ = writeln!(s, "  \"chunk_duration_ns\": {:?},", self.chunk_duration);
        let _ = writeln!(s, "  \"convention\": \"{}\",", self.convention.name());
        s.push_str("  \"chunks\": [\n");
        for (i, c) in self.chunks.iter().enumerate() {
            let nums: Vec<String> = c.to_array().iter().map(|x| format!("{x:?}")).collect();
            let sep = if i + 1 < self.chunks.len() { "," } else { "" };
            let _ = writeln!(s, "    [{}]{sep}", nums.join(", "));
        }
        s.push_str("  ]\n}\n");
        s
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Schedule::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScheduleFile {
    chunk_duration_ns: f64,
    convention: UnitConvention,
    chunks: Vec<[f64; PARAMS_PER_CHUNK]>,
}

/// Published parameter tables shipped with the crate.
pub mod bundled {
    use super::Schedule;

    pub const INITIAL_JSON: &str = include_str!("../data/initial.json");
    pub const SET1_JSON: &str = include_str!("../data/params_set1.json");
    pub const SET2_JSON: &str = include_str!("../data/params_set2.json");

    pub const NAMES: [&str; 3] = ["initial", "set1", "set2"];

    pub fn json(name: &str) -> Option<&'static str> {
        match name {
            "initial" => Some(INITIAL_JSON),
            "set1" => Some(SET1_JSON),
            "set2" => Some(SET2_JSON),
            _ => None,
        }
    }

    pub fn get(name: &str) -> Option<Schedule> {
        json(name).map(|j| Schedule::from_json(j).expect("bundled schedule is valid"))
    }

    pub fn initial() -> Schedule {
        get("initial").unwrap()
    }

    pub fn set1() -> Schedule {
        get("set1").unwrap()
    }

    pub fn set2() -> Schedule {
        get("set2").unwrap()
    }
}
