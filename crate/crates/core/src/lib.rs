//! Two-species optical lattice simulator: Fock bases, the two-mode
//! Bose-Hubbard Hamiltonian, exact propagation, logical gate extraction and
//! the gate protocols built on top of them.

pub mod error;
pub mod evolve;
pub mod fock;
pub mod gates;
pub mod hamiltonian;
pub mod linalg;
pub mod physics;
pub mod protocols;

pub use error::{Error, Result};
pub use evolve::{
    evolve_schedule, evolve_state, expm_propagator, Evolver, Propagator, StateEvolution, StepControl,
};
pub use fock::{
    annihilation, build_basis, creation, number_operator, transfer, BasisSet, FockState,
    LadderOperator, Mode, Operator,
};
pub use gates::{
    compensate_toward, compensation_phases, gate_fidelity, process_fidelity, project_to_logical,
    target_gate, Compensation, FidelityMode, GateReport, LogicalMap, TargetGate,
};
pub use hamiltonian::{
    assemble, couplings_at, schedule_integrals, CouplingSet, Multipliers, PulseSchedule, PulseShape,
    Segment,
};
pub use linalg::{CMatrix, CVector, C64};
pub use protocols::{CouplingConvention, Evaluation, ProtocolKind, ProtocolSpec};
