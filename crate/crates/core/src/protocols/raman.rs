//! Single-qubit rotations by on-site Raman coupling `J_R = Omega e^{i lambda}`.
//!
//! With tunneling off each addressed site evolves under
//! `-(J_R a^+ b + h.c.) = -Omega (cos(lambda) X - sin(lambda) Y)`, so a pulse
//! of area `int |J_R| dt = theta/2` gives
//! `cos(theta/2) + i sin(theta/2) (cos(lambda) X - sin(lambda) Y)`.

use crate::error::{Error, Result};
use crate::gates::{on_qubit, target_gate, TargetGate};
use crate::hamiltonian::{CouplingSet, Multipliers, PulseSchedule, PulseShape, Segment};
use crate::linalg::{CMatrix, C64};

use super::{Prediction, ProtocolKind, ProtocolSpec};

fn addressed(base: &CouplingSet, site: usize, broadcast: bool) -> Result<Vec<usize>> {
    base.validate()?;
    if site >= base.sites {
        return Err(Error::SiteOutOfRange {
            site,
            sites: base.sites,
        });
    }
    let tunneling = base
        .j_a
        .iter()
        .chain(&base.j_b)
        .chain(&base.j_nnn_b)
        .any(|j| *j != 0.0);
    if tunneling {
        return Err(Error::Constraint(
            "Raman pulses require all tunneling off".into(),
        ));
    }
    Ok(if broadcast {
        (site..base.sites).collect()
    } else {
        vec![site]
    })
}

fn with_raman(base: &CouplingSet, sites: &[usize], omega: f64) -> CouplingSet {
    let mut c = base.clone();
    c.j_r.fill(C64::new(0.0, 0.0));
    for &s in sites {
        c.j_r[s] = C64::new(omega, 0.0);
    }
    c
}

fn local_gate(g: &CMatrix, qubits: usize, sites: &[usize]) -> CMatrix {
    let mut m = CMatrix::identity(1 << qubits, 1 << qubits);
    for &s in sites {
        m = on_qubit(g, qubits, s + 1) * m;
    }
    m
}

fn segment(theta: f64, lambda: f64, omega: f64) -> Segment {
    Segment {
        duration: 0.5 * theta / omega,
        shape: PulseShape::Square,
        multipliers: Multipliers::raman(C64::from_polar(1.0, lambda)),
    }
}

fn check_omega(omega: f64) -> Result<()> {
    if !(omega.is_finite() && omega > 0.0) {
        return Err(Error::InvalidArgument(format!("Raman amplitude {omega} must be > 0")));
    }
    Ok(())
}

/// Rotation `R(theta, lambda)` on `site`, or on every site from `site` to
/// the right end of the lattice when `broadcast` is set. Every site of
/// `base` carries one qubit.
pub fn raman_rotation(
    base: &CouplingSet,
    site: usize,
    theta: f64,
    lambda: f64,
    omega: f64,
    broadcast: bool,
) -> Result<ProtocolSpec> {
    check_omega(omega)?;
    if !(theta.is_finite() && theta >= 0.0) {
        return Err(Error::InvalidArgument(format!("theta = {theta} must be >= 0")));
    }
    let sites = addressed(base, site, broadcast)?;
    let couplings = with_raman(base, &sites, omega);
    let schedule = if theta == 0.0 {
        PulseSchedule::idle()
    } else {
        PulseSchedule::new(vec![segment(theta, lambda, omega)])?
    };
    let rotation = target_gate(&TargetGate::RamanRotation { theta, lambda });
    let target = local_gate(&rotation, base.sites, &sites);
    let predicted = Prediction::new(schedule.total_duration(), target);
    Ok(ProtocolSpec::new(
        ProtocolKind::Raman { theta, lambda },
        couplings,
        schedule,
        (0..base.sites).collect(),
        predicted,
    ))
}

/// Hadamard (up to a global phase) as `R_x(pi) R_y(pi/2)`: a `theta = pi/2`
/// pulse at `lambda = pi/2` followed by a `theta = pi` pulse at `lambda = pi`.
pub fn hadamard(base: &CouplingSet, site: usize, omega: f64, broadcast: bool) -> Result<ProtocolSpec> {
    check_omega(omega)?;
    let sites = addressed(base, site, broadcast)?;
    let couplings = with_raman(base, &sites, omega);
    let pi = std::f64::consts::PI;
    let schedule = PulseSchedule::new(vec![
        segment(0.5 * pi, 0.5 * pi, omega),
        segment(pi, pi, omega),
    ])?;
    let target = local_gate(&crate::gates::hadamard(), base.sites, &sites);
    let predicted = Prediction::new(schedule.total_duration(), target);
    Ok(ProtocolSpec::new(
        ProtocolKind::Hadamard,
        couplings,
        schedule,
        (0..base.sites).collect(),
        predicted,
    ))
}
