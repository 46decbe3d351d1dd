//! The two-mode Bose-Hubbard Hamiltonian and laser pulse schedules.
//!
//! ```text
//! H = - sum_i (J^a_i a_i^+ a_{i+1} + J^b_i b_i^+ b_{i+1} + J^R_i a_i^+ b_i + h.c.)
//!     - sum_i (J^nnn_i b_i^+ b_{i+2} + h.c.)
//!     + U_aa/2 sum_i a_i^+2 a_i^2 + U_ab sum_i n^a_i n^b_i + U_bb/2 sum_i b_i^+2 b_i^2
//! ```
//!
//! Units: hbar = 1, every coupling is an angular frequency and time is its
//! inverse. Matrix elements are the exact bosonic ones, so for example
//! `<02;00|H|01;01> = -sqrt(2) J^b`.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fock::{transfer, BasisSet, Mode, Operator};
use crate::linalg::{CMatrix, C64};

/// Coupling constants of the lattice Hamiltonian.
///
/// `j_a[i]`, `j_b[i]` act on the bond `(i, i+1)`, `j_nnn_b[i]` on `(i, i+2)`
/// and `j_r[i]` is the on-site Raman coupling, complex to carry a laser phase.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingSet {
    pub sites: usize,
    pub j_a: Vec<f64>,
    pub j_b: Vec<f64>,
    pub j_nnn_b: Vec<f64>,
    pub j_r: Vec<C64>,
    pub u_aa: f64,
    pub u_ab: f64,
    pub u_bb: f64,
}

impl CouplingSet {
    /// All tunneling off, given collision energies.
    pub fn collisions(sites: usize, u_aa: f64, u_ab: f64, u_bb: f64) -> Self {
        Self {
            sites,
            j_a: vec![0.0; sites.saturating_sub(1)],
            j_b: vec![0.0; sites.saturating_sub(1)],
            j_nnn_b: vec![0.0; sites.saturating_sub(2)],
            j_r: vec![C64::new(0.0, 0.0); sites],
            u_aa,
            u_ab,
            u_bb,
        }
    }

    pub fn zeros(sites: usize) -> Self {
        Self::collisions(sites, 0.0, 0.0, 0.0)
    }

    /// Same tunneling on every bond.
    pub fn uniform(sites: usize, j_a: f64, j_b: f64, u_aa: f64, u_ab: f64, u_bb: f64) -> Self {
        let mut c = Self::collisions(sites, u_aa, u_ab, u_bb);
        c.j_a.fill(j_a);
        c.j_b.fill(j_b);
        c
    }

    pub fn with_nnn_b(mut self, j: f64) -> Self {
        self.j_nnn_b.fill(j);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.sites == 0 {
            return Err(Error::InvalidArgument("coupling set needs at least one site".into()));
        }
        let bonds = self.sites - 1;
        let nnn = self.sites.saturating_sub(2);
        let lengths = [
            ("j_a", self.j_a.len(), bonds),
            ("j_b", self.j_b.len(), bonds),
            ("j_nnn_b", self.j_nnn_b.len(), nnn),
            ("j_r", self.j_r.len(), self.sites),
        ];
        for (name, found, expected) in lengths {
            if found != expected {
                return Err(Error::InvalidArgument(format!(
                    "{name} has {found} entries, expected {expected} for {} sites",
                    self.sites
                )));
            }
        }
        for (name, u) in [("u_aa", self.u_aa), ("u_ab", self.u_ab), ("u_bb", self.u_bb)] {
            if !u.is_finite() || u < 0.0 {
                return Err(Error::InvalidArgument(format!("{name} = {u} must be finite and >= 0")));
            }
        }
        let tunneling_finite = self
            .j_a
            .iter()
            .chain(&self.j_b)
            .chain(&self.j_nnn_b)
            .all(|j| j.is_finite())
            && self.j_r.iter().all(|j| j.re.is_finite() && j.im.is_finite());
        if !tunneling_finite {
            return Err(Error::InvalidArgument("tunneling couplings must be finite".into()));
        }
        Ok(())
    }

    /// Couplings with every tunneling term scaled by the given multipliers.
    pub fn scaled(&self, m: &Multipliers) -> CouplingSet {
        CouplingSet {
            sites: self.sites,
            j_a: self.j_a.iter().map(|j| j * m.j_a).collect(),
            j_b: self.j_b.iter().map(|j| j * m.j_b).collect(),
            j_nnn_b: self.j_nnn_b.iter().map(|j| j * m.j_nnn_b).collect(),
            j_r: self.j_r.iter().map(|j| j * m.j_r).collect(),
            u_aa: self.u_aa,
            u_ab: self.u_ab,
            u_bb: self.u_bb,
        }
    }

    /// Multiplies every tunneling amplitude (J^a, J^b, J^nnn, J^R) by `factor`.
    pub fn scale_tunneling(&self, factor: f64) -> CouplingSet {
        self.scaled(&Multipliers {
            j_a: factor,
            j_b: factor,
            j_nnn_b: factor,
            j_r: C64::new(factor, 0.0),
        })
    }
}

/// Precomputed term matrices over one basis; reassembling `H` for new
/// couplings is then a handful of scaled additions.
#[derive(Debug, Clone)]
pub struct HamiltonianParts {
    basis: Arc<BasisSet>,
    hop_a: Vec<CMatrix>,
    hop_b: Vec<CMatrix>,
    hop_nnn_b: Vec<CMatrix>,
    /// `a_i^+ b_i` per site (not Hermitian on its own).
    raman: Vec<CMatrix>,
    diag_aa: Vec<f64>,
    diag_ab: Vec<f64>,
    diag_bb: Vec<f64>,
}

impl HamiltonianParts {
    pub fn new(basis: &Arc<BasisSet>) -> Result<Self> {
        let l = basis.sites();
        let hop = |mode: Mode, range: usize| -> Result<Vec<CMatrix>> {
            (0..l.saturating_sub(range))
                .map(|i| {
                    let fwd = transfer(basis, (i, mode), (i + range, mode))?.into_matrix();
                    Ok(&fwd + fwd.adjoint())
                })
                .collect()
        };
        let hop_a = hop(Mode::A, 1)?;
        let hop_b = hop(Mode::B, 1)?;
        let hop_nnn_b = hop(Mode::B, 2)?;
        let raman = (0..l)
            .map(|i| transfer(basis, (i, Mode::A), (i, Mode::B)).map(Operator::into_matrix))
            .collect::<Result<Vec<_>>>()?;

        let mut diag_aa = Vec::with_capacity(basis.dim());
        let mut diag_ab = Vec::with_capacity(basis.dim());
        let mut diag_bb = Vec::with_capacity(basis.dim());
        for s in basis.states() {
            let (mut aa, mut ab, mut bb) = (0.0, 0.0, 0.0);
            for i in 0..l {
                let na = s.occupation(i, Mode::A) as f64;
                let nb = s.occupation(i, Mode::B) as f64;
                aa += 0.5 * na * (na - 1.0);
                ab += na * nb;
                bb += 0.5 * nb * (nb - 1.0);
            }
            diag_aa.push(aa);
            diag_ab.push(ab);
            diag_bb.push(bb);
        }
        Ok(Self {
            basis: basis.clone(),
            hop_a,
            hop_b,
            hop_nnn_b,
            raman,
            diag_aa,
            diag_ab,
            diag_bb,
        })
    }

    pub fn basis(&self) -> &Arc<BasisSet> {
        &self.basis
    }

    /// Raw Hermitian matrix of `H` for the given couplings.
    pub fn matrix(&self, c: &CouplingSet) -> Result<CMatrix> {
        c.validate()?;
        if c.sites != self.basis.sites() {
            return Err(Error::DimensionMismatch {
                expected: self.basis.sites(),
                found: c.sites,
            });
        }
        let d = self.basis.dim();
        let mut h = CMatrix::zeros(d, d);
        for k in 0..d {
            h[(k, k)] = C64::new(
                c.u_aa * self.diag_aa[k] + c.u_ab * self.diag_ab[k] + c.u_bb * self.diag_bb[k],
                0.0,
            );
        }
        let terms = self
            .hop_a
            .iter()
            .zip(&c.j_a)
            .chain(self.hop_b.iter().zip(&c.j_b))
            .chain(self.hop_nnn_b.iter().zip(&c.j_nnn_b));
        for (m, &j) in terms {
            if j != 0.0 {
                h.zip_apply(m, |x, y| *x -= y * j);
            }
        }
        for (m, &j) in self.raman.iter().zip(&c.j_r) {
            if j != C64::new(0.0, 0.0) {
                let fwd = m * j;
                h -= &fwd + fwd.adjoint();
            }
        }
        Ok(h)
    }

    pub fn assemble(&self, c: &CouplingSet) -> Result<Operator> {
        Operator::hermitian(self.basis.clone(), self.matrix(c)?)
    }
}

/// Builds `H` for `couplings` on `basis`, flagged and validated Hermitian.
pub fn assemble(couplings: &CouplingSet, basis: &Arc<BasisSet>) -> Result<Operator> {
    HamiltonianParts::new(basis)?.assemble(couplings)
}

/// Time profile of a segment's tunneling multipliers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PulseShape {
    Square,
    /// Flat top with `sin^2` switch-on and switch-off, each lasting
    /// `ramp_fraction` of the segment.
    SmoothRamp { ramp_fraction: f64 },
}

impl PulseShape {
    /// Envelope at fractional position `s` in `[0, 1]` of the segment.
    pub fn envelope(&self, s: f64) -> f64 {
        match *self {
            PulseShape::Square => 1.0,
            PulseShape::SmoothRamp { ramp_fraction: r } => {
                if r <= 0.0 {
                    1.0
                } else if s < r {
                    (0.5 * PI * s / r).sin().powi(2)
                } else if s > 1.0 - r {
                    (0.5 * PI * (1.0 - s) / r).sin().powi(2)
                } else {
                    1.0
                }
            }
        }
    }

    /// `(1/D) int env^k dt` for `k = 1, 2, 3`.
    pub fn moment_factors(&self) -> [f64; 3] {
        match *self {
            PulseShape::Square => [1.0, 1.0, 1.0],
            // sin^2, sin^4 and sin^6 average to 1/2, 3/8 and 5/16 over a ramp
            PulseShape::SmoothRamp { ramp_fraction: r } => {
                [1.0 - r, 1.0 - 1.25 * r, 1.0 - 11.0 / 8.0 * r]
            }
        }
    }

    pub fn ramp_fraction(&self) -> f64 {
        match *self {
            PulseShape::Square => 0.0,
            PulseShape::SmoothRamp { ramp_fraction } => ramp_fraction,
        }
    }

    /// True when the envelope is constant over the segment.
    pub fn is_flat(&self) -> bool {
        self.ramp_fraction() <= 0.0
    }
}

/// Per-family scale factors applied to a base [`CouplingSet`]. The Raman
/// factor is complex so a segment can set the laser phase. Collision
/// energies have no multiplier: they are not switched by the lasers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Multipliers {
    pub j_a: f64,
    pub j_b: f64,
    pub j_nnn_b: f64,
    pub j_r: C64,
}

impl Multipliers {
    pub const ALL: Multipliers = Multipliers {
        j_a: 1.0,
        j_b: 1.0,
        j_nnn_b: 1.0,
        j_r: C64::new(1.0, 0.0),
    };
    pub const NONE: Multipliers = Multipliers {
        j_a: 0.0,
        j_b: 0.0,
        j_nnn_b: 0.0,
        j_r: C64::new(0.0, 0.0),
    };

    pub fn tunneling_only() -> Self {
        Multipliers {
            j_r: C64::new(0.0, 0.0),
            ..Self::ALL
        }
    }

    pub fn raman(phase_factor: C64) -> Self {
        Multipliers {
            j_r: phase_factor,
            ..Self::NONE
        }
    }

    pub fn scaled(&self, f: f64) -> Self {
        Multipliers {
            j_a: self.j_a * f,
            j_b: self.j_b * f,
            j_nnn_b: self.j_nnn_b * f,
            j_r: self.j_r * f,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub duration: f64,
    pub shape: PulseShape,
    pub multipliers: Multipliers,
}

/// Ordered list of pulse segments. An empty schedule is the identity
/// operation of zero duration.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PulseSchedule {
    segments: Vec<Segment>,
}

impl PulseSchedule {
    pub fn new(segments: Vec<Segment>) -> Result<Self> {
        for (i, s) in segments.iter().enumerate() {
            if !(s.duration.is_finite() && s.duration > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "segment {i}: duration {} must be finite and > 0",
                    s.duration
                )));
            }
            if let PulseShape::SmoothRamp { ramp_fraction } = s.shape {
                if !(0.0..=0.5).contains(&ramp_fraction) {
                    return Err(Error::InvalidArgument(format!(
                        "segment {i}: ramp fraction {ramp_fraction} outside [0, 0.5]"
                    )));
                }
            }
        }
        Ok(Self { segments })
    }

    pub fn idle() -> Self {
        Self::default()
    }

    pub fn single(duration: f64, shape: PulseShape, multipliers: Multipliers) -> Result<Self> {
        Self::new(vec![Segment {
            duration,
            shape,
            multipliers,
        }])
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn total_duration(&self) -> f64 {
        self.segments.iter().map(|s| s.duration).sum()
    }

    /// Concatenation: `self` first, then `other`.
    pub fn then(&self, other: &PulseSchedule) -> PulseSchedule {
        let mut segments = self.segments.clone();
        segments.extend_from_slice(&other.segments);
        PulseSchedule { segments }
    }

    /// Effective multipliers at time `t`, including the envelope.
    pub fn multipliers_at(&self, t: f64) -> Result<Multipliers> {
        let total = self.total_duration();
        if !(0.0..=total).contains(&t) || self.segments.is_empty() {
            return Err(Error::TimeOutOfRange { t, total });
        }
        let mut start = 0.0;
        for (i, seg) in self.segments.iter().enumerate() {
            let end = start + seg.duration;
            if t <= end || i + 1 == self.segments.len() {
                let s = ((t - start) / seg.duration).clamp(0.0, 1.0);
                return Ok(seg.multipliers.scaled(seg.shape.envelope(s)));
            }
            start = end;
        }
        unreachable!("schedule is non-empty")
    }
}

/// Couplings in effect at time `t`: the base set scaled by the active
/// segment's multipliers and envelope. A boundary instant belongs to the
/// earlier segment.
pub fn couplings_at(schedule: &PulseSchedule, base: &CouplingSet, t: f64) -> Result<CouplingSet> {
    Ok(base.scaled(&schedule.multipliers_at(t)?))
}

/// `int J dt`, `int J^2 dt`, `int J^3 dt` for one coupling.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Moments {
    pub first: f64,
    pub second: f64,
    pub third: f64,
}

impl Moments {
    fn add(&mut self, value: f64, duration: f64, g: [f64; 3]) {
        self.first += value * duration * g[0];
        self.second += value.powi(2) * duration * g[1];
        self.third += value.powi(3) * duration * g[2];
    }
}

/// Per-coupling moments over a whole schedule. Raman entries use `|J^R|`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleIntegrals {
    pub j_a: Vec<Moments>,
    pub j_b: Vec<Moments>,
    pub j_nnn_b: Vec<Moments>,
    pub j_r: Vec<Moments>,
}

/// Closed-form integrals of every coupling over the schedule.
pub fn schedule_integrals(schedule: &PulseSchedule, base: &CouplingSet) -> ScheduleIntegrals {
    let mut out = ScheduleIntegrals {
        j_a: vec![Moments::default(); base.j_a.len()],
        j_b: vec![Moments::default(); base.j_b.len()],
        j_nnn_b: vec![Moments::default(); base.j_nnn_b.len()],
        j_r: vec![Moments::default(); base.j_r.len()],
    };
    for seg in schedule.segments() {
        let g = seg.shape.moment_factors();
        let d = seg.duration;
        let m = &seg.multipliers;
        for (acc, j) in out.j_a.iter_mut().zip(&base.j_a) {
            acc.add(j * m.j_a, d, g);
        }
        for (acc, j) in out.j_b.iter_mut().zip(&base.j_b) {
            acc.add(j * m.j_b, d, g);
        }
        for (acc, j) in out.j_nnn_b.iter_mut().zip(&base.j_nnn_b) {
            acc.add(j * m.j_nnn_b, d, g);
        }
        for (acc, j) in out.j_r.iter_mut().zip(&base.j_r) {
            acc.add((j * m.j_r).norm(), d, g);
        }
    }
    out
}
