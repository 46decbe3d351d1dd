//! Adiabatic protocols: tunneling weak against the collision energies, so
//! double occupancy is only virtually populated.

use crate::error::{Error, Result};
use crate::gates::{target_gate, TargetGate};
use crate::hamiltonian::{schedule_integrals, CouplingSet, Multipliers, PulseSchedule, PulseShape};

use super::{Prediction, ProtocolKind, ProtocolSpec};

/// Above this `J_eff / U_bb` the second-order picture is questionable.
const ADIABATIC_WARN_RATIO: f64 = 0.05;
const FACTORIZATION_TOL: f64 = 1e-12;

/// `I = 2 J_a J_b / U_ab`.
pub fn effective_exchange_coupling(j_a: f64, j_b: f64, u_ab: f64) -> Result<f64> {
    if !(u_ab.is_finite() && u_ab > 0.0) {
        return Err(Error::InvalidArgument(format!("U_ab = {u_ab} must be > 0")));
    }
    Ok(2.0 * j_a * j_b / u_ab)
}

/// Relative residual of the condition `2 (J_a^2/U_aa + J_b^2/U_bb) =
/// (J_a^2 + J_b^2)/U_ab` on bond 0. The factor 2 on the left is the
/// bosonic enhancement of the same-species double occupancy.
pub fn factorization_residual(c: &CouplingSet) -> f64 {
    let (ja2, jb2) = (c.j_a[0].powi(2), c.j_b[0].powi(2));
    let lhs = 2.0 * (ja2 / c.u_aa + jb2 / c.u_bb);
    let rhs = (ja2 + jb2) / c.u_ab;
    let scale = lhs.abs().max(rhs.abs());
    if scale == 0.0 {
        0.0
    } else {
        (lhs - rhs).abs() / scale
    }
}

/// Two-site couplings with `J_a = J_b = (J/U) U_ab` and the collision
/// energies solved from the factorization condition (`U_aa = U_bb = 2 U_ab`).
pub fn exchange_couplings(u_ab: f64, j_over_u: f64) -> CouplingSet {
    let j = j_over_u * u_ab;
    CouplingSet::uniform(2, j, j, 2.0 * u_ab, u_ab, 2.0 * u_ab)
}

fn check_two_sites(c: &CouplingSet) -> Result<()> {
    c.validate()?;
    if c.sites != 2 {
        return Err(Error::InvalidArgument(format!(
            "two-qubit protocol needs 2 sites, got {}",
            c.sites
        )));
    }
    Ok(())
}

/// Exchange gate `exp(i A/2 (|01><10| + h.c.))` by simultaneous `a` and
/// `b` tunneling for a duration set by the accumulated action
/// `A = 2 int I dt`.
pub fn adiabatic_exchange(base: &CouplingSet, action: f64, shape: PulseShape) -> Result<ProtocolSpec> {
    check_two_sites(base)?;
    if !(action.is_finite() && action >= 0.0) {
        return Err(Error::InvalidArgument(format!("action {action} must be >= 0")));
    }
    let (ja, jb) = (base.j_a[0], base.j_b[0]);
    let i_eff = effective_exchange_coupling(ja, jb, base.u_ab)?;
    if i_eff == 0.0 && action > 0.0 {
        return Err(Error::Constraint("exchange needs both J_a and J_b nonzero".into()));
    }
    if base.u_aa <= 0.0 || base.u_bb <= 0.0 {
        return Err(Error::Constraint("U_aa and U_bb must be > 0".into()));
    }
    let residual = factorization_residual(base);
    if residual > FACTORIZATION_TOL {
        return Err(Error::Constraint(format!(
            "factorization condition violated: relative residual {residual:e} \
             (2(Ja^2/Uaa + Jb^2/Ubb) must equal (Ja^2 + Jb^2)/Uab)"
        )));
    }
    let ratio = ja.abs().max(jb.abs()) / base.u_ab;
    if ratio > ADIABATIC_WARN_RATIO {
        log::warn!("J/U_ab = {ratio:.3} is not small; adiabatic elimination is inaccurate");
    }

    // I ~ J_a J_b follows the envelope squared
    let g2 = shape.moment_factors()[1];
    let duration = action / (2.0 * i_eff.abs() * g2);
    let schedule = if action == 0.0 {
        PulseSchedule::idle()
    } else {
        PulseSchedule::single(duration, shape, Multipliers::tunneling_only())?
    };
    // realized exchange angle carries the sign of I
    let signed_action = action * i_eff.signum();
    let mut predicted = Prediction::new(duration, target_gate(&TargetGate::Exchange(signed_action)));
    predicted.action = Some(action);
    predicted.effective_coupling = Some(i_eff);
    predicted.tunneling = Some(ja.abs().max(jb.abs()));
    // E00 - E11 = -4 (Ja^2/Uaa - Jb^2/Ubb); each qubit's |1> gains
    // -2 (Ja^2/Uaa - Jb^2/Ubb) int env^2 dt relative to |0>
    let tau = duration * g2;
    let local = -2.0 * (ja * ja / base.u_aa - jb * jb / base.u_bb) * tau;
    predicted.local_phases = Some(vec![local, local]);
    Ok(ProtocolSpec::new(
        ProtocolKind::AdiabaticExchange { action },
        base.clone(),
        schedule,
        vec![0, 1],
        predicted,
    ))
}

/// Conditional phase by `b`-mode tunneling alone.
///
/// The prediction is `phi = 2 int (J_b^2/U_ab - J_eff^2/U_bb) dt` with the
/// V-system coupling `J_eff = sqrt(2) J_b`.
pub fn adiabatic_phase(base: &CouplingSet, schedule: &PulseSchedule) -> Result<ProtocolSpec> {
    check_two_sites(base)?;
    if base.u_ab <= 0.0 || base.u_bb <= 0.0 {
        return Err(Error::Constraint("U_ab and U_bb must be > 0".into()));
    }
    for (i, seg) in schedule.segments().iter().enumerate() {
        if seg.multipliers.j_a * base.j_a[0] != 0.0 {
            return Err(Error::Constraint(format!(
                "segment {i} activates mode-a tunneling; the phase gate uses b only"
            )));
        }
        let raman = base.j_r.iter().any(|j| (j * seg.multipliers.j_r).norm() != 0.0);
        if raman {
            return Err(Error::Constraint(format!("segment {i} activates a Raman coupling")));
        }
    }
    let peak = schedule
        .segments()
        .iter()
        .map(|s| (s.multipliers.j_b * base.j_b[0]).abs())
        .fold(0.0, f64::max);
    let ratio = 2f64.sqrt() * peak / base.u_bb;
    if ratio > ADIABATIC_WARN_RATIO {
        log::warn!("J_eff/U_bb = {ratio:.3} is not small; adiabatic elimination is inaccurate");
    }

    let m2 = schedule_integrals(schedule, base).j_b[0].second;
    let phi = 2.0 * (m2 / base.u_ab - 2.0 * m2 / base.u_bb);
    let mut predicted = Prediction::new(
        schedule.total_duration(),
        target_gate(&TargetGate::Phase(-phi)),
    );
    predicted.phase = Some(phi);
    predicted.tunneling = Some(peak);
    predicted.local_phases = Some(vec![m2 / base.u_ab, m2 / base.u_ab]);
    Ok(ProtocolSpec::new(
        ProtocolKind::AdiabaticPhase,
        base.clone(),
        schedule.clone(),
        vec![0, 1],
        predicted,
    ))
}

/// Single `b`-tunneling pulse whose predicted phase is `phi` (mod 2 pi).
pub fn phase_gate_schedule(base: &CouplingSet, phi: f64, shape: PulseShape) -> Result<PulseSchedule> {
    check_two_sites(base)?;
    let jb = base.j_b[0];
    if base.u_ab <= 0.0 || base.u_bb <= 0.0 {
        return Err(Error::Constraint("U_ab and U_bb must be > 0".into()));
    }
    let rate = 2.0 * jb * jb * (1.0 / base.u_ab - 2.0 / base.u_bb) * shape.moment_factors()[1];
    if rate == 0.0 {
        return Err(Error::Constraint(
            "no conditional phase: J_b = 0 or U_bb = 2 U_ab".into(),
        ));
    }
    let period = std::f64::consts::TAU / rate.abs();
    let mut t = phi / rate;
    if t < 0.0 {
        t += period * (-t / period).ceil();
    }
    if t == 0.0 {
        return Ok(PulseSchedule::idle());
    }
    let multipliers = Multipliers {
        j_b: 1.0,
        ..Multipliers::NONE
    };
    PulseSchedule::single(t, shape, multipliers)
}
