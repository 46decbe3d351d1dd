//! Three-site controlled-controlled phase from a single `b`-tunneling pulse
//! with nearest-neighbor coupling `J` and next-nearest coupling `kappa J`.
//!
//! Pulse conditions (square pulse, `U_ab >> U_bb`):
//! `J^2 T / U_bb = 2 pi n` and `12 kappa J^3 T / U_bb^2 = pi`, so
//! `J = U_bb / (24 kappa n)` and `T = 2 pi n U_bb / J^2`.

use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::gates::{target_gate, TargetGate};
use crate::hamiltonian::{CouplingSet, Multipliers, PulseSchedule, PulseShape};

use super::{Prediction, ProtocolKind, ProtocolSpec};

/// Largest `J / U_bb` accepted before perturbation theory is hopeless.
pub const TOFFOLI_MAX_J_OVER_U: f64 = 0.2;
const WARN_U_RATIO: f64 = 10.0;

fn pulse_multipliers() -> Multipliers {
    Multipliers {
        j_b: 1.0,
        j_nnn_b: 1.0,
        ..Multipliers::NONE
    }
}

/// A three-site `b`-tunneling pulse with explicit amplitude and duration.
pub fn toffoli_pulse(j: f64, kappa: f64, duration: f64, u_bb: f64, u_ab: f64) -> Result<ProtocolSpec> {
    if !(u_bb > 0.0 && u_ab > 0.0) {
        return Err(Error::InvalidArgument("U_bb and U_ab must be > 0".into()));
    }
    if !(0.0..=1.0).contains(&kappa) {
        return Err(Error::InvalidArgument(format!("kappa = {kappa} outside [0, 1]")));
    }
    let couplings = CouplingSet::uniform(3, 0.0, j, u_bb, u_ab, u_bb).with_nnn_b(kappa * j);
    let schedule = PulseSchedule::single(duration, PulseShape::Square, pulse_multipliers())?;
    let mut predicted = Prediction::new(duration, target_gate(&TargetGate::C2P));
    predicted.tunneling = Some(j);
    Ok(ProtocolSpec::new(
        ProtocolKind::Toffoli { kappa, n: 0 },
        couplings,
        schedule,
        vec![0, 1, 2],
        predicted,
    ))
}

/// C2P protocol from the two pulse conditions.
pub fn toffoli_protocol(kappa: f64, n: u32, u_bb: f64, u_ab: f64) -> Result<ProtocolSpec> {
    if !(kappa > 0.0 && kappa <= 1.0) {
        return Err(Error::InvalidArgument(format!("kappa = {kappa} outside (0, 1]")));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("n must be >= 1".into()));
    }
    if !(u_bb > 0.0 && u_ab > 0.0) {
        return Err(Error::InvalidArgument("U_bb and U_ab must be > 0".into()));
    }
    let j = u_bb / (24.0 * kappa * n as f64);
    if j / u_bb > TOFFOLI_MAX_J_OVER_U {
        return Err(Error::Constraint(format!(
            "J/U_bb = {:.3} exceeds {TOFFOLI_MAX_J_OVER_U}; increase n or kappa",
            j / u_bb
        )));
    }
    if u_ab / u_bb < WARN_U_RATIO {
        log::warn!("U_ab/U_bb = {:.1} is not large; the C2P phases will be off", u_ab / u_bb);
    }
    let duration = TAU * n as f64 * u_bb / (j * j);
    let mut spec = toffoli_pulse(j, kappa, duration, u_bb, u_ab)?;
    spec.kind = ProtocolKind::Toffoli { kappa, n };
    Ok(spec)
}
