//! Fast gates: strong tunneling with the pulse timed so that every
//! transiently populated double occupancy returns exactly.

use std::f64::consts::{PI, SQRT_2, TAU};

use crate::error::{Error, Result};
use crate::evolve::StepControl;
use crate::gates::{target_gate, TargetGate};
use crate::hamiltonian::{CouplingSet, Multipliers, PulseSchedule, PulseShape};
use crate::linalg::{CMatrix, C64};

use super::{CouplingConvention, Prediction, ProtocolKind, ProtocolSpec, TimingCandidate};

/// Largest non-logical population a selected timing may leave behind.
pub const RETURN_LEAKAGE_TOL: f64 = 1e-6;

fn check_mn(m: u32, n: u32) -> Result<f64> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidArgument(format!("m = {m} and n = {n} must be positive")));
    }
    Ok(m as f64 / n as f64)
}

/// Coupling entering the level gaps of the timing formulas.
fn displayed(j: f64, convention: CouplingConvention) -> f64 {
    match convention {
        CouplingConvention::Literal => j,
        CouplingConvention::EffectiveCoupling | CouplingConvention::Bosonic => SQRT_2 * j,
    }
}

/// Tunneling amplitude `J_b` of the fast phase gate.
pub fn fast_phase_coupling(
    m: u32,
    n: u32,
    u_ab: f64,
    u_bb: f64,
    convention: CouplingConvention,
) -> Result<f64> {
    let r = check_mn(m, n)?;
    if 2.0 * r * r <= 1.0 {
        return Err(Error::Constraint(format!("m > n/sqrt(2) violated (m = {m}, n = {n})")));
    }
    let num = u_ab * u_ab - r * r * u_bb * u_bb;
    if num <= 0.0 {
        return Err(Error::Constraint(format!(
            "U_ab > (m/n) U_bb violated ({u_ab} <= {})",
            r * u_bb
        )));
    }
    let literal = num.sqrt() / (2.0 * (2.0 * r * r - 1.0).sqrt());
    Ok(match convention {
        CouplingConvention::Literal => literal,
        CouplingConvention::EffectiveCoupling => literal / SQRT_2,
        CouplingConvention::Bosonic => (num / (4.0 * (4.0 * r * r - 1.0))).sqrt(),
    })
}

fn v_gap(j_b: f64, u_bb: f64, convention: CouplingConvention) -> f64 {
    let jd = displayed(j_b, convention);
    (u_bb * u_bb + 8.0 * jd * jd).sqrt()
}

/// `T_n = 2 pi n / sqrt(U_bb^2 + 8 J^2)` with `J` per the convention.
pub fn fast_phase_duration(n: u32, j_b: f64, u_bb: f64, convention: CouplingConvention) -> f64 {
    TAU * n as f64 / v_gap(j_b, u_bb, convention)
}

/// `phi = pi n [1 + (U_bb - 2 U_ab) / sqrt(U_bb^2 + 8 J^2)]`.
pub fn fast_phase_prediction(
    n: u32,
    j_b: f64,
    u_ab: f64,
    u_bb: f64,
    convention: CouplingConvention,
) -> f64 {
    PI * n as f64 * (1.0 + (u_bb - 2.0 * u_ab) / v_gap(j_b, u_bb, convention))
}

fn b_only() -> Multipliers {
    Multipliers {
        j_b: 1.0,
        ..Multipliers::NONE
    }
}

fn select(
    candidates: &[(CouplingConvention, CouplingSet, f64)],
    kind: ProtocolKind,
    make: impl Fn(&CouplingSet, f64) -> Result<PulseSchedule>,
) -> Result<(usize, Vec<TimingCandidate>)> {
    let mut measured = Vec::with_capacity(candidates.len());
    let mut chosen = None;
    for (i, (conv, couplings, duration)) in candidates.iter().enumerate() {
        let schedule = make(couplings, *duration)?;
        let probe = ProtocolSpec::new(
            kind,
            couplings.clone(),
            schedule,
            vec![0, 1],
            Prediction::new(*duration, CMatrix::identity(4, 4)),
        );
        let leakage = probe.report(StepControl::default())?.leakage;
        log::debug!("{} timing: leakage {leakage:e}", conv.name());
        measured.push(TimingCandidate {
            convention: *conv,
            tunneling: couplings.j_b[0],
            duration: *duration,
            leakage,
        });
        if chosen.is_none() && leakage <= RETURN_LEAKAGE_TOL {
            chosen = Some(i);
        }
    }
    match chosen {
        Some(i) => Ok((i, measured)),
        None => {
            let summary: Vec<String> = measured
                .iter()
                .map(|c| format!("{}: {:.3e}", c.convention.name(), c.leakage))
                .collect();
            Err(Error::Constraint(format!(
                "no timing convention returns the population (leakage {})",
                summary.join(", ")
            )))
        }
    }
}

/// Fast conditional phase gate by a single strong `b`-tunneling pulse.
///
/// Each coupling convention yields a candidate `(J_b, T_n)`; all are
/// simulated on the two-site system and the first whose return leakage is
/// below [`RETURN_LEAKAGE_TOL`] is used.
pub fn fast_phase(m: u32, n: u32, u_ab: f64, u_bb: f64) -> Result<ProtocolSpec> {
    if !(u_bb > 0.0 && u_ab > 0.0) {
        return Err(Error::InvalidArgument("U_ab and U_bb must be > 0".into()));
    }
    let mut candidates = Vec::new();
    for conv in CouplingConvention::ALL {
        let jb = fast_phase_coupling(m, n, u_ab, u_bb, conv)?;
        let couplings = CouplingSet::uniform(2, 0.0, jb, u_bb, u_ab, u_bb);
        candidates.push((conv, couplings, fast_phase_duration(n, jb, u_bb, conv)));
    }
    let kind = ProtocolKind::FastPhase { m, n };
    let make = |_: &CouplingSet, t: f64| PulseSchedule::single(t, PulseShape::Square, b_only());
    let (i, measured) = select(&candidates, kind, make)?;
    let (conv, couplings, duration) = candidates.swap_remove(i);
    let jb = couplings.j_b[0];
    let phi = fast_phase_prediction(n, jb, u_ab, u_bb, conv);

    let mut predicted = Prediction::new(duration, target_gate(&TargetGate::Phase(-phi)));
    predicted.phase = Some(phi);
    predicted.tunneling = Some(jb);
    predicted.convention = Some(conv);
    predicted.candidates = measured;
    let schedule = make(&couplings, duration)?;
    Ok(ProtocolSpec::new(kind, couplings, schedule, vec![0, 1], predicted))
}

/// Symmetric tunneling `J = J_a = J_b` of the fast exchange gate, with
/// `U = U_aa = U_bb`. Zero at the boundary `U = (m/n) U_ab`.
pub fn fast_exchange_coupling(
    m: u32,
    n: u32,
    u: f64,
    u_ab: f64,
    convention: CouplingConvention,
) -> Result<f64> {
    let r = check_mn(m, n)?;
    let num = u * u - r * r * u_ab * u_ab;
    if num < 0.0 {
        return Err(Error::Constraint(format!(
            "U > (m/n) U_ab violated ({u} < {})",
            r * u_ab
        )));
    }
    let j = match convention {
        CouplingConvention::Literal | CouplingConvention::EffectiveCoupling => {
            let den = 4.0 * r * r - 2.0;
            if den <= 0.0 {
                return Err(Error::Constraint(format!("4 m^2/n^2 > 2 violated (m = {m}, n = {n})")));
            }
            let literal = num.sqrt() / (2.0 * den.sqrt());
            if convention == CouplingConvention::Literal {
                literal
            } else {
                literal / SQRT_2
            }
        }
        CouplingConvention::Bosonic => {
            let den = 16.0 * (r * r - 1.0);
            if num == 0.0 {
                0.0
            } else if den <= 0.0 {
                return Err(Error::Constraint(format!(
                    "m > n needed with exact level gaps (m = {m}, n = {n})"
                )));
            } else {
                (num / den).sqrt()
            }
        }
    };
    Ok(j)
}

fn exchange_duration(n: u32, j: f64, u_ab: f64, convention: CouplingConvention) -> f64 {
    let jd = match convention {
        CouplingConvention::EffectiveCoupling => SQRT_2 * j,
        _ => j,
    };
    TAU * n as f64 / (u_ab * u_ab + 16.0 * jd * jd).sqrt()
}

/// Closed-form logical gate of the fast exchange protocol at `t = T_n`:
///
/// ```text
/// G = (-1)^m e^{-i U T/2} (|00><00| + |11><11|)
///   + 1/2 [1 + (-1)^n e^{-i U_ab T/2}] (|01><01| + |10><10|)
///   + 1/2 [-1 + (-1)^n e^{-i U_ab T/2}] (|01><10| + |10><01|)
/// ```
pub fn fast_exchange_gate(m: u32, n: u32, u: f64, u_ab: f64, t_n: f64) -> CMatrix {
    let sign = |k: u32| if k % 2 == 0 { 1.0 } else { -1.0 };
    let outer = C64::from_polar(sign(m), -0.5 * u * t_n);
    let inner = C64::from_polar(sign(n), -0.5 * u_ab * t_n);
    let one = C64::new(1.0, 0.0);
    let diag = 0.5 * (one + inner);
    let off = 0.5 * (inner - one);
    let mut g = CMatrix::zeros(4, 4);
    g[(0, 0)] = outer;
    g[(3, 3)] = outer;
    g[(1, 1)] = diag;
    g[(2, 2)] = diag;
    g[(1, 2)] = off;
    g[(2, 1)] = off;
    g
}

/// Fast exchange gate with symmetric couplings, `m` even.
pub fn fast_exchange(m: u32, n: u32, u: f64, u_ab: f64) -> Result<ProtocolSpec> {
    check_mn(m, n)?;
    if m % 2 != 0 {
        return Err(Error::Constraint(format!(
            "m = {m} must be even for |00> and |11> to return without a sign"
        )));
    }
    if !(u > 0.0 && u_ab > 0.0) {
        return Err(Error::InvalidArgument("U and U_ab must be > 0".into()));
    }
    if (u - 2.0 * u_ab).abs() > 1e-12 * u {
        log::warn!("U = {u} differs from 2 U_ab = {}", 2.0 * u_ab);
    }
    let r = m as f64 / n as f64;
    if u <= r * u_ab {
        return Err(Error::Constraint(format!(
            "U > (m/n) U_ab violated ({u} <= {})",
            r * u_ab
        )));
    }
    let mut candidates = Vec::new();
    for conv in CouplingConvention::ALL {
        match fast_exchange_coupling(m, n, u, u_ab, conv) {
            Ok(j) => {
                let couplings = CouplingSet::uniform(2, j, j, u, u_ab, u);
                candidates.push((conv, couplings, exchange_duration(n, j, u_ab, conv)));
            }
            Err(e) => log::debug!("{} timing unavailable: {e}", conv.name()),
        }
    }
    let kind = ProtocolKind::FastExchange { m, n };
    let make = |_: &CouplingSet, t: f64| {
        PulseSchedule::single(t, PulseShape::Square, Multipliers::tunneling_only())
    };
    let (i, measured) = select(&candidates, kind, make)?;
    let (conv, couplings, duration) = candidates.swap_remove(i);
    let mut predicted = Prediction::new(duration, fast_exchange_gate(m, n, u, u_ab, duration));
    predicted.tunneling = Some(couplings.j_a[0]);
    predicted.convention = Some(conv);
    predicted.candidates = measured;
    let schedule = make(&couplings, duration)?;
    Ok(ProtocolSpec::new(kind, couplings, schedule, vec![0, 1], predicted))
}
