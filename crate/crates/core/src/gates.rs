//! Logical qubit encoding, gate extraction and gate scoring.
//!
//! A qubit lives on one site holding one atom: `|0> = (n_a, n_b) = (1, 0)`
//! and `|1> = (0, 1)`. Bitstrings are read with qubit 1 as the most
//! significant bit, so for two sites `|01>` is `|10;01>`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::evolve::Propagator;
use crate::fock::BasisSet;
use crate::linalg::{kron, wrap_phase, CMatrix, CVector, C64, I, ONE, ZERO};

#[derive(Debug, Clone)]
pub struct LogicalMap {
    basis: Arc<BasisSet>,
    qubit_sites: Vec<usize>,
    logical_indices: Vec<usize>,
}

impl LogicalMap {
    /// Qubits on `qubit_sites` (in order: the first is the most significant
    /// bit). The basis must hold exactly one atom per qubit site.
    pub fn new(basis: &Arc<BasisSet>, qubit_sites: Vec<usize>) -> Result<Self> {
        let k = qubit_sites.len();
        if k == 0 {
            return Err(Error::InvalidArgument("need at least one qubit site".into()));
        }
        for (i, &s) in qubit_sites.iter().enumerate() {
            if s >= basis.sites() {
                return Err(Error::SiteOutOfRange {
                    site: s,
                    sites: basis.sites(),
                });
            }
            if qubit_sites[..i].contains(&s) {
                return Err(Error::InvalidArgument(format!("site {s} listed twice")));
            }
        }
        if basis.total_atoms() != k {
            return Err(Error::InvalidArgument(format!(
                "{k} qubits need a basis with {k} atoms, got {}",
                basis.total_atoms()
            )));
        }
        let mut logical_indices = Vec::with_capacity(1 << k);
        for x in 0..(1usize << k) {
            let mut occ = vec![0u32; 2 * basis.sites()];
            for (j, &site) in qubit_sites.iter().enumerate() {
                let bit = (x >> (k - 1 - j)) & 1;
                occ[2 * site + bit] = 1;
            }
            let idx = basis.find(&occ).ok_or_else(|| {
                Error::InvalidArgument(format!("logical state {x:0k$b} is not in the basis"))
            })?;
            logical_indices.push(idx);
        }
        Ok(Self {
            basis: basis.clone(),
            qubit_sites,
            logical_indices,
        })
    }

    /// One qubit on every site of the lattice.
    pub fn all_sites(basis: &Arc<BasisSet>) -> Result<Self> {
        Self::new(basis, (0..basis.sites()).collect())
    }

    pub fn basis(&self) -> &Arc<BasisSet> {
        &self.basis
    }

    pub fn qubit_sites(&self) -> &[usize] {
        &self.qubit_sites
    }

    pub fn qubits(&self) -> usize {
        self.qubit_sites.len()
    }

    pub fn dim(&self) -> usize {
        self.logical_indices.len()
    }

    /// Full-basis index of logical bitstring `x`.
    pub fn index(&self, x: usize) -> usize {
        self.logical_indices[x]
    }

    pub fn indices(&self) -> &[usize] {
        &self.logical_indices
    }

    /// Full-space vector of the logical basis state `x`.
    pub fn state(&self, x: usize) -> CVector {
        let mut v = CVector::zeros(self.basis.dim());
        v[self.index(x)] = ONE;
        v
    }

    /// Embeds a logical-space vector into the full basis.
    pub fn embed(&self, logical: &CVector) -> Result<CVector> {
        if logical.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: logical.len(),
            });
        }
        let mut v = CVector::zeros(self.basis.dim());
        for (x, &idx) in self.logical_indices.iter().enumerate() {
            v[idx] = logical[x];
        }
        Ok(v)
    }

    /// Population outside the logical subspace.
    pub fn leakage_of(&self, psi: &CVector) -> f64 {
        let inside: f64 = self.logical_indices.iter().map(|&i| psi[i].norm_sqr()).sum();
        (psi.norm_squared() - inside).clamp(0.0, 1.0)
    }
}

/// Logical gate extracted from a propagator.
#[derive(Debug, Clone)]
pub struct GateReport {
    /// `<r|U|c>` over logical states, with the global phase removed.
    pub logical_matrix: CMatrix,
    /// Worst column leakage.
    pub leakage: f64,
    pub column_leakage: Vec<f64>,
    /// Phase divided out so the largest diagonal element is real positive.
    pub global_phase_removed: f64,
    pub fidelity: Option<f64>,
    /// `arg` of each diagonal element after the global phase fix.
    pub diagonal_phases: Vec<f64>,
}

impl GateReport {
    /// Builds a report from a matrix that is already logical.
    pub fn from_logical(matrix: CMatrix) -> Result<Self> {
        let n = matrix.nrows();
        if n != matrix.ncols() || n == 0 || !n.is_power_of_two() {
            return Err(Error::DimensionMismatch {
                expected: n.next_power_of_two().max(1),
                found: matrix.ncols(),
            });
        }
        let column_leakage: Vec<f64> = matrix
            .column_iter()
            .map(|c| (1.0 - c.norm_squared()).clamp(0.0, 1.0))
            .collect();
        let leakage = column_leakage.iter().cloned().fold(0.0, f64::max);

        let mut best = 0;
        for k in 1..n {
            if matrix[(k, k)].norm() > matrix[(best, best)].norm() {
                best = k;
            }
        }
        let global = if matrix[(best, best)].norm() > 0.0 {
            matrix[(best, best)].arg()
        } else {
            0.0
        };
        let logical_matrix = matrix * C64::from_polar(1.0, -global);
        let diagonal_phases = (0..n).map(|k| logical_matrix[(k, k)].arg()).collect();
        Ok(Self {
            logical_matrix,
            leakage,
            column_leakage,
            global_phase_removed: global,
            fidelity: None,
            diagonal_phases,
        })
    }

    pub fn qubits(&self) -> usize {
        self.logical_matrix.nrows().trailing_zeros() as usize
    }

    pub fn with_fidelity(mut self, f: f64) -> Self {
        self.fidelity = Some(f);
        self
    }
}

/// Projects a propagator onto the logical subspace.
pub fn project_to_logical(prop: &Propagator, map: &LogicalMap) -> Result<GateReport> {
    if **prop.basis() != **map.basis() || prop.basis().dim() != map.basis().dim() {
        return Err(Error::DimensionMismatch {
            expected: map.basis().dim(),
            found: prop.basis().dim(),
        });
    }
    let n = map.dim();
    let u = prop.matrix();
    let m = CMatrix::from_fn(n, n, |r, c| u[(map.index(r), map.index(c))]);
    GateReport::from_logical(m)
}

/// Named target gates.
#[derive(Debug, Clone, PartialEq)]
pub enum TargetGate {
    Identity(usize),
    /// `diag(1, 1, 1, e^{i phi})`.
    Phase(f64),
    Swap,
    SqrtSwap,
    /// `exp(i A/2 (|01><10| + |10><01|))`; `A = pi` is SWAP up to local
    /// phases and `A = pi/2` is the square root of iSWAP.
    Exchange(f64),
    C2P,
    Toffoli,
    /// Hadamard on qubit `target` (1-based) of `qubits`.
    HadamardOn { qubits: usize, target: usize },
    /// `cos(theta/2) + i sin(theta/2) (cos(lambda) X - sin(lambda) Y)`.
    RamanRotation { theta: f64, lambda: f64 },
}

impl TargetGate {
    pub fn qubits(&self) -> usize {
        match self {
            TargetGate::Identity(k) => *k,
            TargetGate::Phase(_)
            | TargetGate::Swap
            | TargetGate::SqrtSwap
            | TargetGate::Exchange(_) => 2,
            TargetGate::C2P | TargetGate::Toffoli => 3,
            TargetGate::HadamardOn { qubits, .. } => *qubits,
            TargetGate::RamanRotation { .. } => 1,
        }
    }

    pub fn matrix(&self) -> CMatrix {
        target_gate(self)
    }
}

impl fmt::Display for TargetGate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TargetGate::Identity(k) => write!(f, "identity({k})"),
            TargetGate::Phase(p) => write!(f, "phase({p})"),
            TargetGate::Swap => write!(f, "swap"),
            TargetGate::SqrtSwap => write!(f, "sqrt_swap"),
            TargetGate::Exchange(a) => write!(f, "exchange({a})"),
            TargetGate::C2P => write!(f, "c2p"),
            TargetGate::Toffoli => write!(f, "toffoli"),
            TargetGate::HadamardOn { qubits, target } => write!(f, "hadamard_on({target}, {qubits})"),
            TargetGate::RamanRotation { theta, lambda } => {
                write!(f, "raman_rotation({theta}, {lambda})")
            }
        }
    }
}

/// Parses an angle: a number, or `[c*]pi[/d]` such as `pi/2` or `3*pi/4`.
pub fn parse_angle(text: &str) -> Option<f64> {
    let t = text.trim();
    if let Ok(v) = t.parse::<f64>() {
        return Some(v);
    }
    let (sign, t) = match t.strip_prefix('-') {
        Some(rest) => (-1.0, rest.trim()),
        None => (1.0, t),
    };
    let (numer, denom) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim().parse::<f64>().ok()?),
        None => (t, 1.0),
    };
    let coeff = match numer.split_once('*') {
        Some((c, p)) if p.trim() == "pi" => c.trim().parse::<f64>().ok()?,
        None if numer == "pi" => 1.0,
        _ => return None,
    };
    Some(sign * coeff * PI / denom)
}

impl FromStr for TargetGate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let unknown = || Error::UnknownGate(s.to_string());
        let s = s.trim();
        let (name, args) = match s.split_once('(') {
            Some((n, rest)) => {
                let inner = rest.strip_suffix(')').ok_or_else(unknown)?;
                let args: Vec<&str> = inner.split(',').map(str::trim).filter(|a| !a.is_empty()).collect();
                (n.trim(), args)
            }
            None => (s, Vec::new()),
        };
        let angle = |i: usize| args.get(i).and_then(|a| parse_angle(a)).ok_or_else(unknown);
        let count = |i: usize| {
            args.get(i)
                .and_then(|a| a.parse::<usize>().ok())
                .ok_or_else(unknown)
        };
        let gate = match (name, args.len()) {
            ("identity", 1) => TargetGate::Identity(count(0)?),
            ("phase", 1) => TargetGate::Phase(angle(0)?),
            ("swap", 0) => TargetGate::Swap,
            ("sqrt_swap", 0) => TargetGate::SqrtSwap,
            ("exchange", 1) => TargetGate::Exchange(angle(0)?),
            ("c2p", 0) => TargetGate::C2P,
            ("toffoli", 0) => TargetGate::Toffoli,
            ("hadamard_on", 1) => TargetGate::HadamardOn {
                qubits: 3,
                target: count(0)?,
            },
            ("hadamard_on", 2) => TargetGate::HadamardOn {
                target: count(0)?,
                qubits: count(1)?,
            },
            ("raman_rotation", 2) => TargetGate::RamanRotation {
                theta: angle(0)?,
                lambda: angle(1)?,
            },
            _ => return Err(unknown()),
        };
        if let TargetGate::HadamardOn { qubits, target } = gate {
            if target == 0 || target > qubits || qubits > 10 {
                return Err(unknown());
            }
        }
        if let TargetGate::Identity(k) = gate {
            if k == 0 || k > 10 {
                return Err(unknown());
            }
        }
        Ok(gate)
    }
}

fn diag(entries: &[C64]) -> CMatrix {
    CMatrix::from_diagonal(&CVector::from_column_slice(entries))
}

pub fn hadamard() -> CMatrix {
    let h = C64::new(FRAC_1_SQRT_2, 0.0);
    CMatrix::from_row_slice(2, 2, &[h, h, h, -h])
}

/// Single-qubit gate `g` on qubit `target` (1-based) of `qubits`.
pub fn on_qubit(g: &CMatrix, qubits: usize, target: usize) -> CMatrix {
    let mut m = CMatrix::identity(1, 1);
    for q in 1..=qubits {
        let factor = if q == target {
            g.clone()
        } else {
            CMatrix::identity(2, 2)
        };
        m = kron(&m, &factor);
    }
    m
}

/// Unitary matrix of a named gate.
pub fn target_gate(gate: &TargetGate) -> CMatrix {
    match *gate {
        TargetGate::Identity(k) => CMatrix::identity(1 << k, 1 << k),
        TargetGate::Phase(phi) => diag(&[ONE, ONE, ONE, C64::from_polar(1.0, phi)]),
        TargetGate::Swap => {
            let mut m = CMatrix::zeros(4, 4);
            m[(0, 0)] = ONE;
            m[(1, 2)] = ONE;
            m[(2, 1)] = ONE;
            m[(3, 3)] = ONE;
            m
        }
        TargetGate::SqrtSwap => {
            let p = C64::new(0.5, 0.5);
            let q = C64::new(0.5, -0.5);
            let mut m = CMatrix::identity(4, 4);
            m[(1, 1)] = p;
            m[(2, 2)] = p;
            m[(1, 2)] = q;
            m[(2, 1)] = q;
            m
        }
        TargetGate::Exchange(a) => {
            let mut m = CMatrix::identity(4, 4);
            let c = C64::new((0.5 * a).cos(), 0.0);
            let s = I * (0.5 * a).sin();
            m[(1, 1)] = c;
            m[(2, 2)] = c;
            m[(1, 2)] = s;
            m[(2, 1)] = s;
            m
        }
        TargetGate::C2P => {
            let mut m = CMatrix::identity(8, 8);
            m[(7, 7)] = -ONE;
            m
        }
        TargetGate::Toffoli => {
            let h = on_qubit(&hadamard(), 3, 3);
            &h * target_gate(&TargetGate::C2P) * &h
        }
        TargetGate::HadamardOn { qubits, target } => on_qubit(&hadamard(), qubits, target),
        TargetGate::RamanRotation { theta, lambda } => {
            let c = C64::new((0.5 * theta).cos(), 0.0);
            let s = I * (0.5 * theta).sin();
            // n.sigma with n = (cos lambda, -sin lambda, 0)
            let off_01 = C64::from_polar(1.0, lambda);
            CMatrix::from_row_slice(2, 2, &[c, s * off_01, s * off_01.conj(), c])
        }
    }
}

/// How [`gate_fidelity`] compares a report with a target.
#[derive(Debug, Clone, PartialEq)]
pub enum FidelityMode {
    /// `|tr(T^dagger M) / 2^k|^2`.
    Process,
    /// `|<T psi | M psi>|^2` for a logical input `psi`.
    State(CVector),
    /// Starting from logical state `input`, overlap with the best
    /// `(|input> + e^{i alpha} |partner>)/sqrt(2)` over `alpha`. The target
    /// matrix only fixes the dimension.
    BellMaxPhase { input: usize, partner: usize },
}

pub fn gate_fidelity(report: &GateReport, target: &CMatrix, mode: &FidelityMode) -> Result<f64> {
    let m = &report.logical_matrix;
    let n = m.nrows();
    if target.nrows() != n || target.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: target.nrows(),
        });
    }
    let f = match mode {
        FidelityMode::Process => process_fidelity(m, target),
        FidelityMode::State(psi) => {
            if psi.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: psi.len(),
                });
            }
            let want = target * psi;
            let got = m * psi;
            want.dotc(&got).norm_sqr() / (want.norm_squared() * psi.norm_squared()).max(f64::MIN_POSITIVE)
        }
        FidelityMode::BellMaxPhase { input, partner } => {
            if *input >= n || *partner >= n || input == partner {
                return Err(Error::InvalidArgument(format!(
                    "Bell fidelity needs two distinct logical indices below {n}"
                )));
            }
            0.5 * (m[(*input, *input)].norm() + m[(*partner, *input)].norm()).powi(2)
        }
    };
    Ok(f.clamp(0.0, 1.0))
}

pub fn process_fidelity(m: &CMatrix, target: &CMatrix) -> f64 {
    let n = m.nrows() as f64;
    (target.adjoint() * m).trace().norm_sqr() / (n * n)
}

/// Virtual z-rotations fitted to the diagonal phases of a logical gate.
///
/// The diagonal phases are modelled as `phi(x) = global + sum_j angles[j] x_j`
/// plus a residual; `entangling_phase` is the gauge-invariant alternating
/// sum `sum_x (-1)^(k - |x|) phi(x)`, which single-qubit z-rotations cannot
/// change.
#[derive(Debug, Clone, PartialEq)]
pub struct Compensation {
    pub global: f64,
    /// Phase of `|1>` relative to `|0>` per qubit (qubit 1 first).
    pub angles: Vec<f64>,
    pub entangling_phase: f64,
    /// Wrapped `phi(x) - model(x)` per bitstring.
    pub residuals: Vec<f64>,
}

impl Compensation {
    fn model(&self, x: usize) -> f64 {
        let k = self.angles.len();
        self.global
            + (0..k)
                .filter(|j| (x >> (k - 1 - j)) & 1 == 1)
                .map(|j| self.angles[j])
                .sum::<f64>()
    }

    /// Removes the fitted z-rotations (and global phase) from `m`.
    pub fn apply(&self, m: &CMatrix) -> CMatrix {
        let mut out = m.clone();
        for (x, mut row) in out.row_iter_mut().enumerate() {
            row *= C64::from_polar(1.0, -self.model(x));
        }
        out
    }
}

fn bit(x: usize, j: usize, k: usize) -> f64 {
    ((x >> (k - 1 - j)) & 1) as f64
}

/// Fits single-qubit z-rotations to the diagonal phases of `report`.
pub fn compensation_phases(report: &GateReport) -> Compensation {
    let phases = &report.diagonal_phases;
    let n = phases.len();
    let k = n.trailing_zeros() as usize;

    // corner gauge: |0..0> and the single-excitation states
    let global = phases[0];
    let angles: Vec<f64> = (0..k)
        .map(|j| wrap_phase(phases[1 << (k - 1 - j)] - global))
        .collect();
    let mut comp = Compensation {
        global,
        angles,
        entangling_phase: 0.0,
        residuals: Vec::new(),
    };

    // least-squares refinement on the wrapped residual
    let design = nalgebra::DMatrix::from_fn(n, k + 1, |x, c| if c == 0 { 1.0 } else { bit(x, c - 1, k) });
    let resid = nalgebra::DVector::from_fn(n, |x, _| wrap_phase(phases[x] - comp.model(x)));
    if let Ok(delta) = design.clone().svd(true, true).solve(&resid, 1e-12) {
        comp.global = wrap_phase(comp.global + delta[0]);
        for j in 0..k {
            comp.angles[j] = wrap_phase(comp.angles[j] + delta[j + 1]);
        }
    }
    comp.residuals = (0..n).map(|x| wrap_phase(phases[x] - comp.model(x))).collect();
    comp.entangling_phase = if k < 2 {
        0.0
    } else {
        let sum: f64 = (0..n)
            .map(|x| {
                let sign = if (k - x.count_ones() as usize) % 2 == 0 { 1.0 } else { -1.0 };
                sign * phases[x]
            })
            .sum();
        wrap_phase(sum)
    };
    comp
}

/// Best fidelity with `target` over virtual z-rotations applied after the
/// gate. Returns the compensated matrix (global phase convention applied)
/// and its process fidelity.
pub fn compensate_toward(report: &GateReport, target: &CMatrix) -> Result<(CMatrix, f64)> {
    let m = &report.logical_matrix;
    let n = m.nrows();
    if target.nrows() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: target.nrows(),
        });
    }
    let k = n.trailing_zeros() as usize;
    // row-wise overlaps: tr(T^dagger D M) = sum_x d_x w_x
    let w: Vec<C64> = (0..n)
        .map(|x| (0..n).map(|y| target[(x, y)].conj() * m[(x, y)]).sum())
        .collect();
    let mut angles = compensation_phases(report).angles;
    let total = |angles: &[f64]| -> C64 {
        (0..n)
            .map(|x| {
                let th: f64 = (0..k).map(|j| bit(x, j, k) * angles[j]).sum();
                w[x] * C64::from_polar(1.0, -th)
            })
            .sum()
    };
    let start = total(&angles).norm();
    if total(&vec![0.0; k]).norm() > start {
        angles = vec![0.0; k];
    }
    for _ in 0..200 {
        let before = total(&angles).norm();
        for j in 0..k {
            let (mut s0, mut s1) = (ZERO, ZERO);
            for x in 0..n {
                let th: f64 = (0..k).filter(|&i| i != j).map(|i| bit(x, i, k) * angles[i]).sum();
                let term = w[x] * C64::from_polar(1.0, -th);
                if bit(x, j, k) == 1.0 {
                    s1 += term;
                } else {
                    s0 += term;
                }
            }
            if s1.norm() > 0.0 && s0.norm() > 0.0 {
                angles[j] = wrap_phase(s1.arg() - s0.arg());
            }
        }
        if total(&angles).norm() - before < 1e-15 {
            break;
        }
    }
    let comp = Compensation {
        global: 0.0,
        angles: angles.clone(),
        entangling_phase: 0.0,
        residuals: Vec::new(),
    };
    let fixed = GateReport::from_logical(comp.apply(m))?;
    let f = (total(&angles).norm() / n as f64).powi(2);
    Ok((fixed.logical_matrix, f.clamp(0.0, 1.0)))
}
