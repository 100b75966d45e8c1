//! Simulation and training of a three-qubit "quantum neural network" whose
//! Hamiltonian parameters are learned so that final-time spin correlations
//! witness pairwise and three-way entanglement.
//!
//! The pieces, bottom-up:
//!
//! - [`linalg`]: dense complex matrices, Pauli embeddings, the measured
//!   correlation observables.
//! - [`state`]: kets, density matrices, mixtures, the named state catalogue
//!   and a ket-expression parser.
//! - [`hamiltonian`]: the nine-parameter Hamiltonian and its
//!   piecewise-constant schedule.
//! - [`propagator`]: fixed-step RK4 integration of the Liouville-von Neumann
//!   equation.
//! - [`learning`]: loss, exact reverse-mode gradients through the integrator,
//!   finite-difference checks and the training loop.
//! - [`witness`]: evaluation of arbitrary states with a trained schedule,
//!   unit-convention calibration and parameter sweeps.

pub mod error;
pub mod hamiltonian;
pub mod learning;
pub mod linalg;
pub mod propagator;
pub mod state;
pub mod witness;

pub use error::{Error, Result};
pub use hamiltonian::{ParameterSet, Schedule, UnitConvention};
pub use learning::{Dataset, GradientEngine, GradientVector, LossReport, TrainConfig, TrainingPair};
pub use linalg::{ComplexMatrix, Observable, Qubit, C64};
pub use propagator::{evolve, evolve_expm, IntegratorConfig, Recording, Trajectory};
pub use state::{DensityMatrix, Ket, StateSpec};
pub use witness::{Family, Label, SweepGrid, WitnessReport};
