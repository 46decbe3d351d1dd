//! Gate recipes: schedules plus the analytic prediction each one is
//! designed to meet.
//!
//! Phase conventions: every predicted `target` is the logical gate realized
//! by `exp(-i H t)`, while `Prediction::phase` keeps the sign of the usual
//! conditional-phase formula, so the realized gate of a phase protocol is
//! `diag(1, 1, 1, exp(-i phase))`.

mod adiabatic;
mod fast;
mod models;
mod noise;
mod raman;
mod toffoli;

use std::sync::Arc;

pub use adiabatic::{
    adiabatic_exchange, adiabatic_phase, effective_exchange_coupling, exchange_couplings,
    factorization_residual, phase_gate_schedule,
};
pub use fast::{
    fast_exchange, fast_exchange_coupling, fast_exchange_gate, fast_phase, fast_phase_coupling,
    fast_phase_duration, fast_phase_prediction,
};
pub use models::{h1_model, h2_model, phase_sector_gate, SmallModel};
pub use noise::{epsilon_grid, noise_sweep, NoiseReport};
pub use raman::{hadamard, raman_rotation};
pub use toffoli::{toffoli_protocol, toffoli_pulse, TOFFOLI_MAX_J_OVER_U};

use crate::error::Result;
use crate::evolve::{Evolver, Propagator, StepControl};
use crate::fock::{build_basis, BasisSet};
use crate::gates::{
    compensate_toward, compensation_phases, process_fidelity, project_to_logical, Compensation,
    GateReport, LogicalMap,
};
use crate::hamiltonian::{CouplingSet, PulseSchedule};
use crate::linalg::CMatrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProtocolKind {
    AdiabaticPhase,
    AdiabaticExchange { action: f64 },
    FastPhase { m: u32, n: u32 },
    FastExchange { m: u32, n: u32 },
    Toffoli { kappa: f64, n: u32 },
    Raman { theta: f64, lambda: f64 },
    Hadamard,
}

/// Which coupling the closed-form timing formulas of the fast gates are
/// read in terms of.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CouplingConvention {
    /// The formula's J is the lattice tunneling amplitude.
    Literal,
    /// The formula's J is the V-system coupling `sqrt(2) J`.
    EffectiveCoupling,
    /// Timing conditions re-solved with the exact bosonic level gaps.
    Bosonic,
}

impl CouplingConvention {
    pub const ALL: [CouplingConvention; 3] = [
        CouplingConvention::Literal,
        CouplingConvention::EffectiveCoupling,
        CouplingConvention::Bosonic,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            CouplingConvention::Literal => "literal",
            CouplingConvention::EffectiveCoupling => "effective_sqrt2",
            CouplingConvention::Bosonic => "bosonic",
        }
    }
}

/// One candidate timing of a fast gate with its measured return leakage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimingCandidate {
    pub convention: CouplingConvention,
    pub tunneling: f64,
    pub duration: f64,
    pub leakage: f64,
}

/// Analytic predictions, filled in by the constructors only.
#[derive(Debug, Clone)]
pub struct Prediction {
    pub(crate) phase: Option<f64>,
    pub(crate) action: Option<f64>,
    pub(crate) duration: f64,
    pub(crate) effective_coupling: Option<f64>,
    pub(crate) tunneling: Option<f64>,
    pub(crate) target: CMatrix,
    pub(crate) local_phases: Option<Vec<f64>>,
    pub(crate) convention: Option<CouplingConvention>,
    pub(crate) candidates: Vec<TimingCandidate>,
}

impl Prediction {
    fn new(duration: f64, target: CMatrix) -> Self {
        Self {
            phase: None,
            action: None,
            duration,
            effective_coupling: None,
            tunneling: None,
            target,
            local_phases: None,
            convention: None,
            candidates: Vec::new(),
        }
    }

    /// Conditional phase in the sign of `2 int (J^2/U_ab - 2 J^2/U_bb) dt`
    /// and `pi n [1 + (U_bb - 2 U_ab)/Omega]`.
    pub fn phase(&self) -> Option<f64> {
        self.phase
    }

    pub fn action(&self) -> Option<f64> {
        self.action
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    /// Effective exchange coupling `I`.
    pub fn effective_coupling(&self) -> Option<f64> {
        self.effective_coupling
    }

    /// Peak tunneling amplitude the schedule uses.
    pub fn tunneling(&self) -> Option<f64> {
        self.tunneling
    }

    /// Ideal logical gate, up to single-qubit z-rotations.
    pub fn target(&self) -> &CMatrix {
        &self.target
    }

    /// Predicted phase of `|1>` relative to `|0>` per qubit.
    pub fn local_phases(&self) -> Option<&[f64]> {
        self.local_phases.as_deref()
    }

    pub fn convention(&self) -> Option<CouplingConvention> {
        self.convention
    }

    pub fn candidates(&self) -> &[TimingCandidate] {
        &self.candidates
    }
}

#[derive(Debug, Clone)]
pub struct ProtocolSpec {
    kind: ProtocolKind,
    couplings: CouplingSet,
    schedule: PulseSchedule,
    qubit_sites: Vec<usize>,
    predicted: Prediction,
}

/// A protocol run scored against its prediction.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub report: GateReport,
    pub compensation: Compensation,
    /// Process fidelity with the target before any compensation.
    pub raw_fidelity: f64,
    /// Process fidelity after the best virtual z-rotations.
    pub compensated_fidelity: f64,
    pub compensated: CMatrix,
}

impl ProtocolSpec {
    pub(crate) fn new(
        kind: ProtocolKind,
        couplings: CouplingSet,
        schedule: PulseSchedule,
        qubit_sites: Vec<usize>,
        predicted: Prediction,
    ) -> Self {
        Self {
            kind,
            couplings,
            schedule,
            qubit_sites,
            predicted,
        }
    }

    pub fn kind(&self) -> ProtocolKind {
        self.kind
    }

    pub fn couplings(&self) -> &CouplingSet {
        &self.couplings
    }

    pub fn schedule(&self) -> &PulseSchedule {
        &self.schedule
    }

    pub fn predicted(&self) -> &Prediction {
        &self.predicted
    }

    pub fn qubit_sites(&self) -> &[usize] {
        &self.qubit_sites
    }

    pub fn qubits(&self) -> usize {
        self.qubit_sites.len()
    }

    /// Same recipe with different base couplings (e.g. perturbed amplitudes).
    pub fn with_couplings(&self, couplings: CouplingSet) -> ProtocolSpec {
        ProtocolSpec {
            couplings,
            ..self.clone()
        }
    }

    /// Basis with one atom per qubit and a per-mode cap equal to the atom
    /// number.
    pub fn basis(&self) -> Result<Arc<BasisSet>> {
        let k = self.qubits();
        Ok(Arc::new(build_basis(self.couplings.sites, k, k)?))
    }

    pub fn logical_map(&self, basis: &Arc<BasisSet>) -> Result<LogicalMap> {
        LogicalMap::new(basis, self.qubit_sites.clone())
    }

    pub fn propagator(&self, steps: StepControl) -> Result<Propagator> {
        let basis = self.basis()?;
        Evolver::new(&basis)?.propagator(&self.couplings, &self.schedule, steps)
    }

    pub fn report(&self, steps: StepControl) -> Result<GateReport> {
        let prop = self.propagator(steps)?;
        project_to_logical(&prop, &self.logical_map(prop.basis())?)
    }

    pub fn evaluate(&self, steps: StepControl) -> Result<Evaluation> {
        let report = self.report(steps)?;
        self.score(report)
    }

    /// Scores an already extracted report against the prediction.
    pub fn score(&self, report: GateReport) -> Result<Evaluation> {
        let target = &self.predicted.target;
        let raw_fidelity = process_fidelity(&report.logical_matrix, target);
        let (compensated, compensated_fidelity) = compensate_toward(&report, target)?;
        let compensation = compensation_phases(&report);
        Ok(Evaluation {
            report: report.with_fidelity(compensated_fidelity),
            compensation,
            raw_fidelity,
            compensated_fidelity,
            compensated,
        })
    }
}
