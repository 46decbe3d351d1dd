//! Physical lattice parameters to model couplings.
//!
//! Units: every energy is an angular frequency in rad/s with hbar = 1, so a
//! coupling quoted as `f` kHz is `2 pi f 1e3` here and times come out in
//! seconds. Lengths only enter through ratios and may use any one unit.
//! The closed forms are harmonic-approximation estimates and good to an
//! order of magnitude.

use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};

/// 1D superfluid to Mott insulator threshold on `U/J`.
pub const MOTT_CRITICAL_RATIO: f64 = 11.6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    /// s-wave scattering length.
    pub a_s: f64,
    /// Lattice depth `V0 / E_R`.
    pub depth: f64,
    /// Recoil energy.
    pub e_r: f64,
    /// Lattice laser wavelength.
    pub wavelength: f64,
    /// Transverse Gaussian width of the trapping mode.
    pub waist: f64,
    pub omega_a: f64,
    pub omega_b: f64,
    /// Raman detuning.
    pub detuning: f64,
}

impl PhysicalParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("wavelength", self.wavelength),
            ("waist", self.waist),
            ("e_r", self.e_r),
            ("depth", self.depth),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidArgument(format!("{name} = {v} must be > 0")));
            }
        }
        let non_negative = [
            ("a_s", self.a_s),
            ("omega_a", self.omega_a),
            ("omega_b", self.omega_b),
        ];
        for (name, v) in non_negative {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidArgument(format!("{name} = {v} must be >= 0")));
            }
        }
        if !self.detuning.is_finite() {
            return Err(Error::InvalidArgument("detuning must be finite".into()));
        }
        Ok(())
    }

    /// Same parameters at another lattice depth.
    pub fn at_depth(&self, depth: f64) -> Self {
        Self { depth, ..*self }
    }
}

/// On-site collision energy `U = 4 a_s V0^{3/4} E_R^{1/4} / sqrt(lambda L)`.
///
/// With `V0 = s E_R` this is `4 (a_s / sqrt(lambda L)) s^{3/4} E_R`; the
/// length ratio is dimensionless so `U` carries the unit of `E_R`.
#[allow(non_snake_case)]
pub fn collisional_U(p: &PhysicalParams) -> Result<f64> {
    p.validate()?;
    Ok(4.0 * p.a_s / (p.wavelength * p.waist).sqrt() * p.depth.powf(0.75) * p.e_r)
}

/// Tunneling rate `J = (E_R/2) exp(-pi^2/4 sqrt(s)) (sqrt(s) + sqrt(s)^3)`
/// for depth `s = V0 / E_R`.
#[allow(non_snake_case)]
pub fn tunneling_J(depth: f64, e_r: f64) -> Result<f64> {
    if !(depth.is_finite() && depth >= 0.0) {
        return Err(Error::InvalidArgument(format!("depth {depth} must be >= 0")));
    }
    let r = depth.sqrt();
    Ok(0.5 * e_r * (-0.25 * PI * PI * r).exp() * (r + r * r * r))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Superfluid,
    Mott,
}

/// Phase at ratio `U/J` and the margin `U/J - 11.6`. `J = 0` is deep Mott
/// with infinite margin.
pub fn mott_criterion(u: f64, j: f64) -> Result<(Phase, f64)> {
    if !(u.is_finite() && u >= 0.0 && j.is_finite() && j >= 0.0) {
        return Err(Error::InvalidArgument(format!("U = {u}, J = {j} must be finite and >= 0")));
    }
    if j == 0.0 {
        return Ok((Phase::Mott, f64::INFINITY));
    }
    let margin = u / j - MOTT_CRITICAL_RATIO;
    let phase = if margin >= 0.0 { Phase::Mott } else { Phase::Superfluid };
    Ok((phase, margin))
}

fn ratio_at(p: &PhysicalParams, depth: f64) -> Result<f64> {
    let q = p.at_depth(depth);
    Ok(collisional_U(&q)? / tunneling_J(depth, q.e_r)?)
}

/// Smallest depth `V0/E_R` in `(0, max_depth]` at which `U/J` reaches the
/// Mott threshold, by a coarse scan followed by bisection.
pub fn critical_depth(p: &PhysicalParams, max_depth: f64) -> Result<f64> {
    p.validate()?;
    const SCAN: usize = 4000;
    let mut lo = 1e-6;
    if ratio_at(p, lo)? >= MOTT_CRITICAL_RATIO {
        return Ok(lo);
    }
    let mut hi = None;
    for i in 1..=SCAN {
        let s = max_depth * i as f64 / SCAN as f64;
        if ratio_at(p, s)? >= MOTT_CRITICAL_RATIO {
            hi = Some(s);
            break;
        }
        lo = s;
    }
    let mut hi = hi.ok_or_else(|| {
        Error::Constraint(format!("U/J stays below {MOTT_CRITICAL_RATIO} up to depth {max_depth}"))
    })?;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if ratio_at(p, mid)? >= MOTT_CRITICAL_RATIO {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo < 1e-13 * hi {
            break;
        }
    }
    Ok(hi)
}

/// Converts a frequency in kHz to angular units.
pub fn khz(f: f64) -> f64 {
    TAU * 1e3 * f
}

/// Gate families with a closed-form duration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GateKind {
    /// Square-pulse pi-phase gate with tunneling on `b` only and
    /// `U_ab = ratio U_bb`: `T = pi / (2 |J^2/U_ab - J^2/U_bb|)`.
    AdiabaticPhase { u_ab_over_u_bb: f64 },
    /// Square-pulse swap with `J_a = J_b = J` over `U_ab = U`:
    /// `T = pi / (2 I)`, `I = 2 J^2 / U`.
    AdiabaticSwap,
    /// Single-period fast phase gate, `T = 2 pi / sqrt(U^2 + 16 J^2)`.
    FastPhase,
    /// C2P pulse with `n = 1`, `T = 2 pi U / J^2`.
    Toffoli,
}

/// Gate duration in seconds for collision energy `u_khz` (kHz, converted
/// with the `2 pi` of [`khz`]) and tunneling `J = j_over_u U`.
pub fn gate_time_estimate(u_khz: f64, j_over_u: f64, kind: GateKind) -> Result<f64> {
    if !(u_khz.is_finite() && u_khz > 0.0) {
        return Err(Error::InvalidArgument(format!("U = {u_khz} kHz must be > 0")));
    }
    if !(j_over_u.is_finite() && j_over_u >= 0.0) {
        return Err(Error::InvalidArgument(format!("J/U = {j_over_u} must be >= 0")));
    }
    if j_over_u == 0.0 {
        return Err(Error::Constraint("J = 0: the gate never completes".into()));
    }
    let u = khz(u_khz);
    let j = j_over_u * u;
    let t = match kind {
        GateKind::AdiabaticPhase { u_ab_over_u_bb } => {
            if !(u_ab_over_u_bb.is_finite() && u_ab_over_u_bb > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "U_ab/U_bb = {u_ab_over_u_bb} must be > 0"
                )));
            }
            let rate = j * j / (u_ab_over_u_bb * u) - j * j / u;
            if rate == 0.0 {
                return Err(Error::Constraint(
                    "U_ab = U_bb: no conditional phase accumulates".into(),
                ));
            }
            PI / (2.0 * rate.abs())
        }
        GateKind::AdiabaticSwap => PI / (2.0 * 2.0 * j * j / u),
        GateKind::FastPhase => TAU / (u * u + 16.0 * j * j).sqrt(),
        GateKind::Toffoli => TAU * u / (j * j),
    };
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rb() -> PhysicalParams {
        PhysicalParams {
            a_s: 5.3e-9,
            depth: 20.0,
            e_r: TAU * 3.5e3,
            wavelength: 830e-9,
            waist: 30e-6,
            omega_a: 0.0,
            omega_b: 0.0,
            detuning: 0.0,
        }
    }

    #[test]
    fn collisional_scaling() {
        let p = rb();
        let u = collisional_U(&p).unwrap();
        assert!((collisional_U(&p.at_depth(16.0 * p.depth)).unwrap() / u - 8.0).abs() < 1e-12);
        let wide = PhysicalParams { waist: 4.0 * p.waist, ..p };
        assert!((collisional_U(&wide).unwrap() / u - 0.5).abs() < 1e-12);
        assert_eq!(collisional_U(&PhysicalParams { a_s: 0.0, ..p }).unwrap(), 0.0);
        assert!(collisional_U(&PhysicalParams { waist: 0.0, ..p }).is_err());
    }

    #[test]
    fn tunneling_vanishes_at_zero_and_deep_lattice() {
        assert_eq!(tunneling_J(0.0, 1.0).unwrap(), 0.0);
        assert!(tunneling_J(40.0, 1.0).unwrap() < 1e-3);
        assert!(tunneling_J(-1.0, 1.0).is_err());
    }

    #[test]
    fn tunneling_has_single_interior_maximum() {
        let js: Vec<f64> = (0..=4000).map(|i| tunneling_J(i as f64 * 0.01, 1.0).unwrap()).collect();
        let turns = js.windows(3).filter(|w| w[1] > w[0] && w[1] > w[2]).count();
        assert_eq!(turns, 1);
        let last = js.windows(2).rposition(|w| w[1] > w[0]).unwrap();
        assert!(last > 0 && last < js.len() - 2);
    }

    #[test]
    fn mott_boundary() {
        assert_eq!(mott_criterion(11.6, 1.0).unwrap(), (Phase::Mott, 0.0));
        assert_eq!(mott_criterion(5.0, 1.0).unwrap().0, Phase::Superfluid);
        assert_eq!(mott_criterion(1.0, 0.0).unwrap(), (Phase::Mott, f64::INFINITY));
    }

    #[test]
    fn critical_depth_regression() {
        let s = critical_depth(&rb(), 60.0).unwrap();
        let p = rb().at_depth(s);
        let ratio = collisional_U(&p).unwrap() / tunneling_J(s, p.e_r).unwrap();
        assert!((ratio - MOTT_CRITICAL_RATIO).abs() < 1e-9);
        assert!(s > 5.0 && s < 30.0, "{s}");
    }

    #[test]
    fn gate_time_scaling() {
        let kind = GateKind::AdiabaticPhase { u_ab_over_u_bb: 2.0 };
        let t = gate_time_estimate(1.0, 1e-2, kind).unwrap();
        let t2 = gate_time_estimate(1.0, 2e-2, kind).unwrap();
        assert!((t / t2 - 4.0).abs() < 1e-12);
        // the closed form under the 2 pi kHz convention
        assert!((t - PI / (2.0 * 0.5 * 1e-4 * khz(1.0))).abs() < 1e-12 * t);
        assert!(gate_time_estimate(1.0, 0.0, kind).is_err());
        assert!(gate_time_estimate(1.0, 1e-2, GateKind::AdiabaticPhase { u_ab_over_u_bb: 1.0 }).is_err());
    }

    #[test]
    fn rescaling_energies_divides_times() {
        for kind in [GateKind::AdiabaticSwap, GateKind::FastPhase, GateKind::Toffoli] {
            let t = gate_time_estimate(1.0, 0.05, kind).unwrap();
            let t3 = gate_time_estimate(3.0, 0.05, kind).unwrap();
            assert!((t / t3 - 3.0).abs() < 1e-12);
        }
        let p = rb();
        let q = PhysicalParams { e_r: 3.0 * p.e_r, ..p };
        assert!((collisional_U(&q).unwrap() / collisional_U(&p).unwrap() - 3.0).abs() < 1e-12);
    }
}
