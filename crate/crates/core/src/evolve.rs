//! Propagators for constant and scheduled Hamiltonians.
//!
//! Constant pieces are exponentiated exactly through the eigendecomposition
//! of the Hermitian matrix. Ramps are sliced into equal steps with the
//! couplings frozen at each step midpoint (second order in the step).

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fock::{BasisSet, Operator};
use crate::hamiltonian::{CouplingSet, HamiltonianParts, Multipliers, PulseSchedule};
use crate::linalg::{max_abs_diff, max_abs_diff_vec, unitarity_defect, CMatrix, CVector, Spectral};

/// Tolerance on `|U^dagger U - 1|` that every propagator must meet.
pub const UNITARITY_TOL: f64 = 1e-10;
/// Tolerance on the norm of an initial state.
pub const NORM_TOL: f64 = 1e-8;
pub const DEFAULT_SAMPLES: usize = 512;

#[derive(Debug, Clone)]
pub struct Propagator {
    basis: Arc<BasisSet>,
    matrix: CMatrix,
    elapsed: f64,
}

impl Propagator {
    pub fn identity(basis: Arc<BasisSet>) -> Self {
        let d = basis.dim();
        Self {
            basis,
            matrix: CMatrix::identity(d, d),
            elapsed: 0.0,
        }
    }

    /// Wraps an externally computed matrix after checking it is unitary.
    pub fn from_matrix(basis: Arc<BasisSet>, matrix: CMatrix, elapsed: f64) -> Result<Self> {
        let d = basis.dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: matrix.nrows(),
            });
        }
        let defect = unitarity_defect(&matrix);
        if defect > UNITARITY_TOL {
            return Err(Error::InvalidArgument(format!(
                "matrix is not unitary (defect {defect:e})"
            )));
        }
        Ok(Self {
            basis,
            matrix,
            elapsed,
        })
    }

    pub fn basis(&self) -> &Arc<BasisSet> {
        &self.basis
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn elapsed(&self) -> f64 {
        self.elapsed
    }

    /// `later * self`: evolve with `self` first, then `later`.
    pub fn then(&self, later: &Propagator) -> Result<Propagator> {
        if self.basis != later.basis {
            return Err(Error::DimensionMismatch {
                expected: self.basis.dim(),
                found: later.basis.dim(),
            });
        }
        Ok(Propagator {
            basis: self.basis.clone(),
            matrix: &later.matrix * &self.matrix,
            elapsed: self.elapsed + later.elapsed,
        })
    }
}

/// `exp(-i H t)` for a Hermitian operator.
pub fn expm_propagator(h: &Operator, t: f64) -> Result<Propagator> {
    if !h.is_hermitian() {
        return Err(Error::NotHermitian(crate::linalg::hermiticity_defect(h.matrix())));
    }
    let matrix = Spectral::of_hermitian(h.matrix()).propagator(t);
    Ok(Propagator {
        basis: h.basis().clone(),
        matrix,
        elapsed: t,
    })
}

/// Number of midpoint steps used on each ramp of a smooth segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepControl {
    Fixed(usize),
    /// Doubles the step count from `initial` until two successive results
    /// differ by less than `tolerance` (max element), failing past `max`.
    Adaptive {
        initial: usize,
        tolerance: f64,
        max: usize,
    },
}

impl Default for StepControl {
    fn default() -> Self {
        StepControl::Adaptive {
            initial: 256,
            tolerance: 1e-9,
            max: 1 << 14,
        }
    }
}

/// A time interval with constant couplings.
#[derive(Debug, Clone, Copy)]
struct Piece {
    start: f64,
    duration: f64,
    multipliers: Multipliers,
}

fn slice(schedule: &PulseSchedule, steps: usize) -> Vec<Piece> {
    let mut pieces = Vec::new();
    let mut start = 0.0;
    for seg in schedule.segments() {
        let d = seg.duration;
        if seg.shape.is_flat() {
            pieces.push(Piece {
                start,
                duration: d,
                multipliers: seg.multipliers,
            });
        } else {
            let r = seg.shape.ramp_fraction();
            let ramp = r * d;
            let h = ramp / steps as f64;
            let ramp_steps = |offset: f64, out: &mut Vec<Piece>| {
                for k in 0..steps {
                    let t0 = offset + k as f64 * h;
                    let env = seg.shape.envelope((t0 + 0.5 * h) / d);
                    out.push(Piece {
                        start: start + t0,
                        duration: h,
                        multipliers: seg.multipliers.scaled(env),
                    });
                }
            };
            ramp_steps(0.0, &mut pieces);
            let plateau = d - 2.0 * ramp;
            if plateau > 0.0 {
                pieces.push(Piece {
                    start: start + ramp,
                    duration: plateau,
                    multipliers: seg.multipliers,
                });
            }
            ramp_steps(d - ramp, &mut pieces);
        }
        start += d;
    }
    pieces
}

fn needs_stepping(schedule: &PulseSchedule) -> bool {
    schedule.segments().iter().any(|s| !s.shape.is_flat())
}

/// Reusable evolution engine over one basis.
#[derive(Debug, Clone)]
pub struct Evolver {
    parts: HamiltonianParts,
}

/// Final state plus optional samples `(t, psi(t))`.
#[derive(Debug, Clone)]
pub struct StateEvolution {
    pub final_state: CVector,
    pub trajectory: Vec<(f64, CVector)>,
    /// Ramp step count that was used.
    pub steps: usize,
}

impl Evolver {
    pub fn new(basis: &Arc<BasisSet>) -> Result<Self> {
        Ok(Self {
            parts: HamiltonianParts::new(basis)?,
        })
    }

    pub fn basis(&self) -> &Arc<BasisSet> {
        self.parts.basis()
    }

    pub fn parts(&self) -> &HamiltonianParts {
        &self.parts
    }

    fn spectral(&self, base: &CouplingSet, m: &Multipliers) -> Result<Spectral> {
        Ok(Spectral::of_hermitian(&self.parts.matrix(&base.scaled(m))?))
    }

    fn product(&self, base: &CouplingSet, schedule: &PulseSchedule, steps: usize) -> Result<CMatrix> {
        let d = self.basis().dim();
        let mut u = CMatrix::identity(d, d);
        for piece in slice(schedule, steps) {
            let p = self.spectral(base, &piece.multipliers)?.propagator(piece.duration);
            u = p * u;
        }
        Ok(u)
    }

    pub fn propagator(
        &self,
        base: &CouplingSet,
        schedule: &PulseSchedule,
        steps: StepControl,
    ) -> Result<Propagator> {
        if base.sites != self.basis().sites() {
            return Err(Error::DimensionMismatch {
                expected: self.basis().sites(),
                found: base.sites,
            });
        }
        let matrix = match steps {
            StepControl::Fixed(n) => {
                if n == 0 {
                    return Err(Error::InvalidArgument("steps per ramp must be >= 1".into()));
                }
                self.product(base, schedule, n)?
            }
            StepControl::Adaptive { .. } if !needs_stepping(schedule) => {
                self.product(base, schedule, 1)?
            }
            StepControl::Adaptive {
                initial,
                tolerance,
                max,
            } => {
                let mut n = initial.max(1);
                let mut coarse = self.product(base, schedule, n)?;
                let mut change = f64::INFINITY;
                loop {
                    if 2 * n > max {
                        return Err(Error::Convergence { steps: n, change });
                    }
                    let fine = self.product(base, schedule, 2 * n)?;
                    change = max_abs_diff(&coarse, &fine);
                    n *= 2;
                    log::debug!("ramp steps {n}: change {change:e}");
                    if change < tolerance {
                        break fine;
                    }
                    coarse = fine;
                }
            }
        };
        Ok(Propagator {
            basis: self.basis().clone(),
            matrix,
            elapsed: schedule.total_duration(),
        })
    }

    fn run_state(
        &self,
        initial: &CVector,
        base: &CouplingSet,
        schedule: &PulseSchedule,
        steps: usize,
        samples: usize,
    ) -> Result<(CVector, Vec<(f64, CVector)>)> {
        let total = schedule.total_duration();
        let times: Vec<f64> = match samples {
            0 => Vec::new(),
            1 => vec![total],
            n => (0..n).map(|k| total * k as f64 / (n - 1) as f64).collect(),
        };
        let mut trajectory = Vec::with_capacity(times.len());
        let mut next = 0;
        let mut psi = initial.clone();
        while next < times.len() && times[next] <= 0.0 {
            trajectory.push((times[next], psi.clone()));
            next += 1;
        }
        let pieces = slice(schedule, steps);
        let last = pieces.len().saturating_sub(1);
        for (i, piece) in pieces.iter().enumerate() {
            let spec = self.spectral(base, &piece.multipliers)?;
            let end = piece.start + piece.duration;
            while next < times.len() && (times[next] <= end || i == last) {
                let local = (times[next] - piece.start).clamp(0.0, piece.duration);
                trajectory.push((times[next], spec.apply(local, &psi)));
                next += 1;
            }
            psi = spec.apply(piece.duration, &psi);
        }
        Ok((psi, trajectory))
    }

    pub fn state(
        &self,
        initial: &CVector,
        base: &CouplingSet,
        schedule: &PulseSchedule,
        steps: StepControl,
        samples: usize,
    ) -> Result<StateEvolution> {
        let d = self.basis().dim();
        if initial.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: initial.len(),
            });
        }
        let norm = initial.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(norm));
        }
        let n = match steps {
            StepControl::Fixed(0) => {
                return Err(Error::InvalidArgument("steps per ramp must be >= 1".into()))
            }
            StepControl::Fixed(n) => n,
            StepControl::Adaptive { .. } if !needs_stepping(schedule) => 1,
            StepControl::Adaptive {
                initial: n0,
                tolerance,
                max,
            } => {
                let mut n = n0.max(1);
                let mut coarse = self.run_state(initial, base, schedule, n, 0)?.0;
                let mut change = f64::INFINITY;
                loop {
                    if 2 * n > max {
                        return Err(Error::Convergence { steps: n, change });
                    }
                    let fine = self.run_state(initial, base, schedule, 2 * n, 0)?.0;
                    change = max_abs_diff_vec(&coarse, &fine);
                    n *= 2;
                    if change < tolerance {
                        break n;
                    }
                    coarse = fine;
                }
            }
        };
        let (final_state, trajectory) = self.run_state(initial, base, schedule, n, samples)?;
        Ok(StateEvolution {
            final_state,
            trajectory,
            steps: n,
        })
    }
}

/// Full propagator of `schedule` applied to `base` on `basis`.
pub fn evolve_schedule(
    base: &CouplingSet,
    schedule: &PulseSchedule,
    basis: &Arc<BasisSet>,
    steps: StepControl,
) -> Result<Propagator> {
    Evolver::new(basis)?.propagator(base, schedule, steps)
}

/// Evolves a normalized state, sampling `samples` equally spaced instants
/// over the schedule (both ends included; 0 disables sampling).
pub fn evolve_state(
    initial: &CVector,
    base: &CouplingSet,
    schedule: &PulseSchedule,
    basis: &Arc<BasisSet>,
    steps: StepControl,
    samples: usize,
) -> Result<StateEvolution> {
    Evolver::new(basis)?.state(initial, base, schedule, steps, samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::build_basis;
    use crate::hamiltonian::{assemble, PulseShape, Segment};
    use crate::linalg::{C64, ONE, ZERO};
    use proptest::prelude::*;

    fn basis(l: usize, n: usize) -> Arc<BasisSet> {
        Arc::new(build_basis(l, n, n).unwrap())
    }

    fn unit(d: usize, k: usize) -> CVector {
        let mut v = CVector::zeros(d);
        v[k] = ONE;
        v
    }

    #[test]
    fn zero_hamiltonian_is_identity() {
        let b = basis(2, 2);
        let h = assemble(&CouplingSet::zeros(2), &b).unwrap();
        let u = expm_propagator(&h, 3.7).unwrap();
        assert_eq!(max_abs_diff(u.matrix(), &CMatrix::identity(10, 10)), 0.0);
        assert_eq!(u.elapsed(), 3.7);
    }

    #[test]
    fn non_hermitian_input_rejected() {
        let b = basis(1, 1);
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 1)] = ONE;
        let op = Operator::new(b, m).unwrap();
        assert!(matches!(expm_propagator(&op, 1.0), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn rabi_flopping_two_level() {
        // one atom, one site: Raman coupling gives H = -J sigma_x
        let b = basis(1, 1);
        let j = 0.37;
        let mut c = CouplingSet::zeros(1);
        c.j_r[0] = C64::new(j, 0.0);
        let h = assemble(&c, &b).unwrap();
        for t in [0.0, 0.4, 1.3, 5.0] {
            let u = expm_propagator(&h, t).unwrap();
            let p_stay = u.matrix()[(0, 0)].norm_sqr();
            let p_flip = u.matrix()[(1, 0)].norm_sqr();
            assert!((p_stay - (j * t).cos().powi(2)).abs() < 1e-14);
            assert!((p_flip - (j * t).sin().powi(2)).abs() < 1e-14);
        }
    }

    #[test]
    fn v_system_return_period() {
        let b = basis(2, 2);
        let (jb, ubb) = (0.05, 1.0);
        let c = CouplingSet::uniform(2, 0.0, jb, 1.0, 3.0, ubb);
        let h = assemble(&c, &b).unwrap();
        let j_eff = 2f64.sqrt() * jb;
        let period = 2.0 * std::f64::consts::PI / (ubb * ubb + 8.0 * j_eff * j_eff).sqrt();
        let i11 = b.find(&[0, 1, 0, 1]).unwrap();
        let u = expm_propagator(&h, period).unwrap();
        assert!((u.matrix()[(i11, i11)].norm_sqr() - 1.0).abs() < 1e-12);
        let u = expm_propagator(&h, 0.5 * period).unwrap();
        assert!(u.matrix()[(i11, i11)].norm_sqr() < 1.0 - 1e-3);
    }

    #[test]
    fn split_square_segments_compose() {
        let b = basis(2, 2);
        let base = CouplingSet::uniform(2, 0.1, 0.07, 2.0, 1.0, 2.0);
        let seg = |d: f64| Segment {
            duration: d,
            shape: PulseShape::Square,
            multipliers: Multipliers::ALL,
        };
        let one = PulseSchedule::new(vec![seg(5.0)]).unwrap();
        let two = PulseSchedule::new(vec![seg(2.0), seg(3.0)]).unwrap();
        let halves = PulseSchedule::new(vec![seg(2.5), seg(2.5)]).unwrap();
        let u1 = evolve_schedule(&base, &one, &b, StepControl::default()).unwrap();
        let u2 = evolve_schedule(&base, &two, &b, StepControl::default()).unwrap();
        let u3 = evolve_schedule(&base, &halves, &b, StepControl::default()).unwrap();
        assert!(max_abs_diff(u1.matrix(), u2.matrix()) < 1e-12);
        assert!(max_abs_diff(u1.matrix(), u3.matrix()) < 1e-11);
    }

    #[test]
    fn collisions_only_give_diagonal_phases() {
        let b = basis(2, 2);
        let base = CouplingSet::uniform(2, 0.3, 0.3, 1.1, 0.7, 1.9);
        let sch = PulseSchedule::single(2.0, PulseShape::Square, Multipliers::NONE).unwrap();
        let u = evolve_schedule(&base, &sch, &b, StepControl::default()).unwrap();
        for (k, s) in b.states().iter().enumerate() {
            let mut e = 0.0;
            for i in 0..2 {
                let na = s.occupation(i, crate::fock::Mode::A) as f64;
                let nb = s.occupation(i, crate::fock::Mode::B) as f64;
                e += 1.1 * na * (na - 1.0) / 2.0 + 0.7 * na * nb + 1.9 * nb * (nb - 1.0) / 2.0;
            }
            assert!((u.matrix()[(k, k)] - C64::from_polar(1.0, -e * 2.0)).norm() < 1e-13);
        }
        let off: f64 = (0..10)
            .flat_map(|r| (0..10).map(move |c| (r, c)))
            .filter(|(r, c)| r != c)
            .map(|(r, c)| u.matrix()[(r, c)].norm())
            .fold(0.0, f64::max);
        assert!(off < 1e-13);
    }

    #[test]
    fn midpoint_ramp_is_second_order() {
        let b = basis(2, 2);
        let base = CouplingSet::uniform(2, 0.2, 0.15, 2.0, 1.0, 2.0);
        let shape = PulseShape::SmoothRamp { ramp_fraction: 0.5 };
        let sch = PulseSchedule::single(12.0, shape, Multipliers::ALL).unwrap();
        let ev = Evolver::new(&b).unwrap();
        let u = |n| ev.propagator(&base, &sch, StepControl::Fixed(n)).unwrap();
        let (u1, u2, u4) = (u(16), u(32), u(64));
        let e1 = max_abs_diff(u1.matrix(), u2.matrix());
        let e2 = max_abs_diff(u2.matrix(), u4.matrix());
        let order = (e1 / e2).log2();
        assert!(order >= 1.9, "observed order {order}");
    }

    #[test]
    fn adaptive_converges_and_reports_failure() {
        let b = basis(2, 2);
        let base = CouplingSet::uniform(2, 0.01, 0.01, 2.0, 1.0, 2.0);
        let shape = PulseShape::SmoothRamp { ramp_fraction: 0.1 };
        let sch = PulseSchedule::single(200.0, shape, Multipliers::ALL).unwrap();
        let u = evolve_schedule(&base, &sch, &b, StepControl::default()).unwrap();
        assert!(unitarity_defect(u.matrix()) < UNITARITY_TOL);
        let tight = StepControl::Adaptive {
            initial: 2,
            tolerance: 1e-30,
            max: 16,
        };
        assert!(matches!(
            evolve_schedule(&base, &sch, &b, tight),
            Err(Error::Convergence { steps: 16, .. })
        ));
    }

    #[test]
    fn state_evolution_matches_propagator() {
        let b = basis(2, 2);
        let base = CouplingSet::uniform(2, 0.05, 0.08, 2.0, 1.0, 2.0);
        let sq = Segment {
            duration: 3.0,
            shape: PulseShape::Square,
            multipliers: Multipliers::ALL,
        };
        let ramped = Segment {
            duration: 4.0,
            shape: PulseShape::SmoothRamp { ramp_fraction: 0.25 },
            multipliers: Multipliers::ALL.scaled(0.5),
        };
        let sch = PulseSchedule::new(vec![sq, ramped]).unwrap();
        let psi0 = unit(10, 4);
        let steps = StepControl::Fixed(64);
        let u = evolve_schedule(&base, &sch, &b, steps).unwrap();
        let ev = evolve_state(&psi0, &base, &sch, &b, steps, 15).unwrap();
        assert!(max_abs_diff_vec(&ev.final_state, &(u.matrix() * &psi0)) < 1e-12);
        assert_eq!(ev.trajectory.len(), 15);
        assert_eq!(ev.trajectory[0].0, 0.0);
        assert_eq!(max_abs_diff_vec(&ev.trajectory[0].1, &psi0), 0.0);
        let (t_last, psi_last) = ev.trajectory.last().unwrap();
        assert_eq!(*t_last, 7.0);
        assert!(max_abs_diff_vec(psi_last, &ev.final_state) < 1e-12);
        for (_, psi) in &ev.trajectory {
            assert!((psi.norm() - 1.0).abs() < 1e-10);
        }
        // a sample in the middle of the square segment is an exact sub-evolution
        let half = PulseSchedule::single(1.5, PulseShape::Square, Multipliers::ALL).unwrap();
        let ev_half = evolve_state(&psi0, &base, &half, &b, steps, 0).unwrap();
        let at = ev.trajectory.iter().find(|(t, _)| (*t - 1.5).abs() < 1e-12).unwrap();
        assert!(max_abs_diff_vec(&at.1, &ev_half.final_state) < 1e-12);
    }

    #[test]
    fn eigenstate_stays_put_and_bad_input_rejected() {
        let b = basis(2, 2);
        let base = CouplingSet::uniform(2, 0.05, 0.08, 2.0, 1.0, 2.0);
        let h = assemble(&base, &b).unwrap();
        let spec = Spectral::of_hermitian(h.matrix());
        let v: CVector = spec.vectors.column(3).into_owned();
        let sch = PulseSchedule::single(9.0, PulseShape::Square, Multipliers::ALL).unwrap();
        let out = evolve_state(&v, &base, &sch, &b, StepControl::default(), 0).unwrap();
        let overlap = v.dotc(&out.final_state);
        assert!((overlap.norm() - 1.0).abs() < 1e-12);

        let unnormalized = unit(10, 0) * C64::new(1.1, 0.0);
        assert!(matches!(
            evolve_state(&unnormalized, &base, &sch, &b, StepControl::default(), 0),
            Err(Error::NotNormalized(_))
        ));
        let short = CVector::from_vec(vec![ONE, ZERO]);
        assert!(evolve_state(&short, &base, &sch, &b, StepControl::default(), 0).is_err());
    }

    #[test]
    fn energy_is_conserved_under_constant_h() {
        let b = basis(2, 2);
        let base = CouplingSet::uniform(2, 0.3, 0.2, 2.0, 1.0, 1.5);
        let h = assemble(&base, &b).unwrap();
        let mut psi = CVector::from_fn(10, |k, _| C64::new(1.0 + k as f64, 0.5 * k as f64));
        psi /= C64::new(psi.norm(), 0.0);
        let e0 = psi.dotc(&(h.matrix() * &psi)).re;
        let sch = PulseSchedule::single(50.0, PulseShape::Square, Multipliers::ALL).unwrap();
        let ev = evolve_state(&psi, &base, &sch, &b, StepControl::default(), 17).unwrap();
        for (_, phi) in &ev.trajectory {
            let e = phi.dotc(&(h.matrix() * phi)).re;
            assert!((e - e0).abs() <= 1e-10 * e0.abs().max(1.0));
        }
    }

    fn random_hermitian(d: usize, entries: &[f64]) -> CMatrix {
        let mut m = CMatrix::zeros(d, d);
        let mut k = 0;
        for r in 0..d {
            for c in r..d {
                let z = if r == c {
                    C64::new(entries[k], 0.0)
                } else {
                    C64::new(entries[k], entries[k + 1])
                };
                k += 2;
                m[(r, c)] = z;
                m[(c, r)] = z.conj();
            }
        }
        m
    }

    proptest! {
        #[test]
        fn propagators_are_unitary(
            entries in proptest::collection::vec(-5.0f64..5.0, 2 * 10 * 11 / 2),
            t in -50.0f64..50.0,
        ) {
            let b = basis(2, 2);
            let h = Operator::hermitian(b, random_hermitian(10, &entries)).unwrap();
            let u = expm_propagator(&h, t).unwrap();
            prop_assert!(unitarity_defect(u.matrix()) <= UNITARITY_TOL);
        }

        #[test]
        fn scheduled_propagators_are_unitary(
            ja in -0.5f64..0.5, jb in -0.5f64..0.5, jr in 0.0f64..0.5,
            uaa in 0.0f64..3.0, uab in 0.0f64..3.0, ubb in 0.0f64..3.0,
            r in 0.0f64..0.5, d in 0.1f64..20.0,
        ) {
            let b = basis(2, 2);
            let mut base = CouplingSet::uniform(2, ja, jb, uaa, uab, ubb);
            base.j_r[1] = C64::new(jr, 0.2);
            let sch = PulseSchedule::single(
                d, PulseShape::SmoothRamp { ramp_fraction: r }, Multipliers::ALL).unwrap();
            let u = evolve_schedule(&base, &sch, &b, StepControl::Fixed(8)).unwrap();
            prop_assert!(unitarity_defect(u.matrix()) <= UNITARITY_TOL);
        }
    }
}
