//! Truncated two-mode bosonic Fock spaces on a 1D lattice.
//!
//! Occupations are laid out per site as `(n_a, n_b)`, so a state on `L`
//! sites is the vector `(n_a^1, n_b^1, n_a^2, n_b^2, ...)` of length `2L`.
//! A [`BasisSet`] holds every such vector with a fixed total atom number and
//! a per-mode cap, ordered lexicographically descending.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{hermiticity_defect, CMatrix, C64};

/// Tolerance on `max |M - M^dagger|` for operators flagged Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Internal state of the atom trapped in a lattice site.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    A,
    B,
}

impl Mode {
    fn offset(self) -> usize {
        match self {
            Mode::A => 0,
            Mode::B => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FockState {
    occupations: Vec<u32>,
    total: u32,
}

impl FockState {
    pub fn new(occupations: Vec<u32>) -> Result<Self> {
        if occupations.is_empty() || occupations.len() % 2 != 0 {
            return Err(Error::InvalidArgument(format!(
                "occupation vector must have even nonzero length, got {}",
                occupations.len()
            )));
        }
        let total = occupations.iter().sum();
        Ok(Self { occupations, total })
    }

    pub fn occupations(&self) -> &[u32] {
        &self.occupations
    }

    pub fn occupation(&self, site: usize, mode: Mode) -> u32 {
        self.occupations[2 * site + mode.offset()]
    }

    pub fn sites(&self) -> usize {
        self.occupations.len() / 2
    }

    pub fn total(&self) -> u32 {
        self.total
    }

    fn with_shift(&self, slot: usize, delta: i64) -> Option<FockState> {
        let n = self.occupations[slot] as i64 + delta;
        if n < 0 {
            return None;
        }
        let mut occupations = self.occupations.clone();
        occupations[slot] = n as u32;
        let total = (self.total as i64 + delta) as u32;
        Some(FockState { occupations, total })
    }
}

impl fmt::Display for FockState {
    /// Renders as `|n_a n_b; n_a n_b; ...>`, e.g. `|01;10>`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|")?;
        for (i, pair) in self.occupations.chunks(2).enumerate() {
            if i > 0 {
                write!(f, ";")?;
            }
            write!(f, "{}{}", pair[0], pair[1])?;
        }
        write!(f, ">")
    }
}

impl std::str::FromStr for FockState {
    type Err = Error;

    /// Parses the display form. Sites holding ten or more atoms in one mode
    /// can be written with a comma, as in `|10,2;01>`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("cannot parse Fock state `{s}`"));
        let inner = s
            .trim()
            .strip_prefix('|')
            .and_then(|r| r.strip_suffix('>'))
            .ok_or_else(bad)?;
        let mut occupations = Vec::new();
        for site in inner.split(';') {
            let site = site.trim();
            let pair: Vec<&str> = if site.contains(',') {
                site.split(',').map(str::trim).collect()
            } else if site.len() == 2 && site.is_ascii() {
                vec![&site[..1], &site[1..]]
            } else {
                return Err(bad());
            };
            if pair.len() != 2 {
                return Err(bad());
            }
            for n in pair {
                occupations.push(n.parse::<u32>().map_err(|_| bad())?);
            }
        }
        FockState::new(occupations)
    }
}

/// All occupation vectors on `sites x 2` modes with a fixed atom number and
/// per-mode cap, in lexicographically descending order.
#[derive(Debug, Clone)]
pub struct BasisSet {
    sites: usize,
    total_atoms: usize,
    max_per_mode: usize,
    states: Vec<FockState>,
    index: HashMap<FockState, usize>,
}

impl PartialEq for BasisSet {
    fn eq(&self, other: &Self) -> bool {
        self.sites == other.sites
            && self.total_atoms == other.total_atoms
            && self.max_per_mode == other.max_per_mode
    }
}

impl BasisSet {
    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn total_atoms(&self) -> usize {
        self.total_atoms
    }

    pub fn max_per_mode(&self) -> usize {
        self.max_per_mode
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[FockState] {
        &self.states
    }

    pub fn state(&self, i: usize) -> &FockState {
        &self.states[i]
    }

    pub fn index_of(&self, state: &FockState) -> Option<usize> {
        self.index.get(state).copied()
    }

    /// Index of the state with the given occupation vector.
    pub fn find(&self, occupations: &[u32]) -> Option<usize> {
        FockState::new(occupations.to_vec())
            .ok()
            .and_then(|s| self.index_of(&s))
    }

    fn check_site(&self, site: usize) -> Result<()> {
        if site >= self.sites {
            Err(Error::SiteOutOfRange {
                site,
                sites: self.sites,
            })
        } else {
            Ok(())
        }
    }

    /// Basis with one atom more or fewer, same lattice and cap.
    fn neighbor_sector(&self, delta: i64) -> Result<Arc<BasisSet>> {
        let atoms = self.total_atoms as i64 + delta;
        if atoms < 0 {
            return Err(Error::InvalidArgument(
                "cannot remove an atom from the vacuum sector".into(),
            ));
        }
        build_basis(self.sites, atoms as usize, self.max_per_mode).map(Arc::new)
    }
}

/// Enumerates the capped compositions of `total_atoms` into `2 * sites` modes.
pub fn build_basis(sites: usize, total_atoms: usize, max_per_mode: usize) -> Result<BasisSet> {
    if sites == 0 {
        return Err(Error::InvalidArgument("lattice needs at least one site".into()));
    }
    if max_per_mode == 0 {
        return Err(Error::InvalidArgument("max_per_mode must be at least 1".into()));
    }
    let modes = 2 * sites;
    if total_atoms > modes * max_per_mode {
        return Err(Error::EmptyBasis {
            sites,
            atoms: total_atoms,
            cap: max_per_mode,
        });
    }

    let mut states = Vec::new();
    let mut current = vec![0u32; modes];
    enumerate(&mut current, 0, total_atoms, max_per_mode, &mut states);

    let index = states
        .iter()
        .enumerate()
        .map(|(i, s)| (s.clone(), i))
        .collect();
    Ok(BasisSet {
        sites,
        total_atoms,
        max_per_mode,
        states,
        index,
    })
}

fn enumerate(
    current: &mut [u32],
    slot: usize,
    remaining: usize,
    cap: usize,
    out: &mut Vec<FockState>,
) {
    let modes_left = current.len() - slot;
    if modes_left == 1 {
        current[slot] = remaining as u32;
        out.push(FockState {
            occupations: current.to_vec(),
            total: current.iter().sum(),
        });
        return;
    }
    let max_here = remaining.min(cap);
    // the tail must still be able to absorb what is left
    let min_here = remaining.saturating_sub(cap * (modes_left - 1));
    for n in (min_here..=max_here).rev() {
        current[slot] = n as u32;
        enumerate(current, slot + 1, remaining - n, cap, out);
    }
    current[slot] = 0;
}

/// Dense square operator on a fixed-atom-number basis.
#[derive(Debug, Clone)]
pub struct Operator {
    basis: Arc<BasisSet>,
    matrix: CMatrix,
    hermitian: bool,
}

impl Operator {
    /// General (not necessarily Hermitian) operator.
    pub fn new(basis: Arc<BasisSet>, matrix: CMatrix) -> Result<Self> {
        check_square(&basis, &matrix)?;
        Ok(Self {
            basis,
            matrix,
            hermitian: false,
        })
    }

    /// Operator flagged Hermitian; validated to [`HERMITIAN_TOL`].
    pub fn hermitian(basis: Arc<BasisSet>, matrix: CMatrix) -> Result<Self> {
        check_square(&basis, &matrix)?;
        let defect = hermiticity_defect(&matrix);
        if defect > HERMITIAN_TOL {
            return Err(Error::NotHermitian(defect));
        }
        Ok(Self {
            basis,
            matrix,
            hermitian: true,
        })
    }

    pub fn basis(&self) -> &Arc<BasisSet> {
        &self.basis
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn adjoint(&self) -> Operator {
        Operator {
            basis: self.basis.clone(),
            matrix: self.matrix.adjoint(),
            hermitian: self.hermitian,
        }
    }

    /// `[self, other]`.
    pub fn commutator(&self, other: &Operator) -> Result<Operator> {
        self.same_basis(other)?;
        let m = &self.matrix * &other.matrix - &other.matrix * &self.matrix;
        Operator::new(self.basis.clone(), m)
    }

    pub fn same_basis(&self, other: &Operator) -> Result<()> {
        if self.basis != other.basis {
            return Err(Error::DimensionMismatch {
                expected: self.basis.dim(),
                found: other.basis.dim(),
            });
        }
        Ok(())
    }
}

fn check_square(basis: &BasisSet, matrix: &CMatrix) -> Result<()> {
    let d = basis.dim();
    if matrix.nrows() != d || matrix.ncols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: matrix.nrows().max(matrix.ncols()),
        });
    }
    Ok(())
}

/// Creation or annihilation operator. These change the atom number, so they
/// map between two neighboring fixed-`N` sectors rather than acting within
/// one basis.
#[derive(Debug, Clone)]
pub struct LadderOperator {
    source: Arc<BasisSet>,
    target: Arc<BasisSet>,
    matrix: CMatrix,
}

impl LadderOperator {
    pub fn source(&self) -> &Arc<BasisSet> {
        &self.source
    }

    pub fn target(&self) -> &Arc<BasisSet> {
        &self.target
    }

    /// Matrix with rows indexed by `target` and columns by `source`.
    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn adjoint(&self) -> LadderOperator {
        LadderOperator {
            source: self.target.clone(),
            target: self.source.clone(),
            matrix: self.matrix.adjoint(),
        }
    }

    /// `self * right`, i.e. `right` acts first. Returns a square operator
    /// when the composition starts and ends in the same sector.
    pub fn then_from(&self, right: &LadderOperator) -> Result<Operator> {
        if *right.target != *self.source || *right.source != *self.target {
            return Err(Error::DimensionMismatch {
                expected: self.source.dim(),
                found: right.target.dim(),
            });
        }
        Operator::new(self.target.clone(), &self.matrix * &right.matrix)
    }
}

fn ladder(basis: &Arc<BasisSet>, site: usize, mode: Mode, delta: i64) -> Result<LadderOperator> {
    basis.check_site(site)?;
    let target = basis.neighbor_sector(delta)?;
    let slot = 2 * site + mode.offset();
    let mut matrix = CMatrix::zeros(target.dim(), basis.dim());
    for (col, state) in basis.states().iter().enumerate() {
        let n = state.occupations[slot] as f64;
        let amplitude = if delta < 0 { n.sqrt() } else { (n + 1.0).sqrt() };
        if let Some(image) = state.with_shift(slot, delta) {
            // images beyond the cap are not in the target basis: truncated
            if let Some(row) = target.index_of(&image) {
                matrix[(row, col)] = C64::new(amplitude, 0.0);
            }
        }
    }
    Ok(LadderOperator {
        source: basis.clone(),
        target,
        matrix,
    })
}

/// `c_{site,mode}` from the `N` sector of `basis` into the `N - 1` sector.
pub fn annihilation(basis: &Arc<BasisSet>, site: usize, mode: Mode) -> Result<LadderOperator> {
    ladder(basis, site, mode, -1)
}

/// `c_{site,mode}^dagger` from the `N` sector of `basis` into the `N + 1`
/// sector; components that would exceed the cap are dropped.
pub fn creation(basis: &Arc<BasisSet>, site: usize, mode: Mode) -> Result<LadderOperator> {
    ladder(basis, site, mode, 1)
}

/// Diagonal occupation operator `n_{site,mode}`.
pub fn number_operator(basis: &Arc<BasisSet>, site: usize, mode: Mode) -> Result<Operator> {
    basis.check_site(site)?;
    let d = basis.dim();
    let mut matrix = CMatrix::zeros(d, d);
    for (i, s) in basis.states().iter().enumerate() {
        matrix[(i, i)] = C64::new(s.occupation(site, mode) as f64, 0.0);
    }
    Operator::hermitian(basis.clone(), matrix)
}

/// Number-conserving transfer `c_{to}^dagger c_{from}` within one sector.
pub fn transfer(
    basis: &Arc<BasisSet>,
    to: (usize, Mode),
    from: (usize, Mode),
) -> Result<Operator> {
    basis.check_site(to.0)?;
    basis.check_site(from.0)?;
    let d = basis.dim();
    let src = 2 * from.0 + from.1.offset();
    let dst = 2 * to.0 + to.1.offset();
    let mut matrix = CMatrix::zeros(d, d);
    for (col, state) in basis.states().iter().enumerate() {
        let n_src = state.occupations[src];
        if n_src == 0 {
            continue;
        }
        let mut occ = state.occupations.clone();
        let mut amp = (n_src as f64).sqrt();
        occ[src] -= 1;
        amp *= (occ[dst] as f64 + 1.0).sqrt();
        occ[dst] += 1;
        let image = FockState {
            occupations: occ,
            total: state.total,
        };
        if let Some(row) = basis.index_of(&image) {
            matrix[(row, col)] += C64::new(amp, 0.0);
        }
    }
    Operator::new(basis.clone(), matrix)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;

    /// Brute-force count of capped compositions by walking the full grid.
    fn brute_force_dimension(sites: usize, total: usize, cap: usize) -> usize {
        let modes = 2 * sites;
        let mut count = 0;
        let mut digits = vec![0usize; modes];
        loop {
            if digits.iter().sum::<usize>() == total {
                count += 1;
            }
            let mut k = 0;
            loop {
                if k == modes {
                    return count;
                }
                digits[k] += 1;
                if digits[k] <= cap {
                    break;
                }
                digits[k] = 0;
                k += 1;
            }
        }
    }

    fn basis(sites: usize, total: usize, cap: usize) -> Arc<BasisSet> {
        Arc::new(build_basis(sites, total, cap).unwrap())
    }

    #[test]
    fn single_site_single_atom() {
        let b = basis(1, 1, 2);
        assert_eq!(b.dim(), 2);
        assert_eq!(b.state(0).occupations(), &[1, 0]);
        assert_eq!(b.state(1).occupations(), &[0, 1]);
        assert_eq!(b.state(0).to_string(), "|10>");
    }

    #[test]
    fn dimensions_match_enumeration() {
        assert_eq!(brute_force_dimension(2, 2, 2), 10);
        assert_eq!(brute_force_dimension(3, 3, 3), 56);
        assert_eq!(basis(2, 2, 2).dim(), 10);
        assert_eq!(basis(3, 3, 3).dim(), 56);
        for (l, n, cap) in [(1, 3, 2), (2, 4, 1), (2, 3, 2), (3, 2, 1), (4, 4, 4), (2, 8, 2)] {
            assert_eq!(basis(l, n, cap).dim(), brute_force_dimension(l, n, cap), "{l} {n} {cap}");
        }
    }

    #[test]
    fn ordering_is_descending_and_index_inverts() {
        let b = basis(3, 3, 2);
        for w in b.states().windows(2) {
            assert!(w[0].occupations() > w[1].occupations());
        }
        for (i, s) in b.states().iter().enumerate() {
            assert_eq!(b.index_of(s), Some(i));
            assert_eq!(s.total(), 3);
            assert!(s.occupations().iter().all(|&n| n <= 2));
        }
    }

    #[test]
    fn rejects_zero_sites_and_unsatisfiable_cap() {
        assert!(matches!(build_basis(0, 1, 1), Err(Error::InvalidArgument(_))));
        assert!(matches!(build_basis(1, 3, 1), Err(Error::EmptyBasis { .. })));
        assert!(matches!(build_basis(1, 1, 0), Err(Error::InvalidArgument(_))));
        assert_eq!(build_basis(2, 0, 1).unwrap().dim(), 1);
    }

    #[test]
    fn annihilation_matrix_elements() {
        let b = basis(1, 2, 2);
        let a = annihilation(&b, 0, Mode::A).unwrap();
        let two = b.find(&[2, 0]).unwrap();
        let one = a.target().find(&[1, 0]).unwrap();
        assert!((a.matrix()[(one, two)] - C64::new(2f64.sqrt(), 0.0)).norm() < 1e-15);
        // vacuum in mode a gives a zero column
        let vac = b.find(&[0, 2]).unwrap();
        assert!(a.matrix().column(vac).iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn creation_matrix_elements_and_truncation() {
        let b = basis(1, 1, 2);
        let c = creation(&b, 0, Mode::A).unwrap();
        let one = b.find(&[1, 0]).unwrap();
        let two = c.target().find(&[2, 0]).unwrap();
        assert!((c.matrix()[(two, one)] - C64::new(2f64.sqrt(), 0.0)).norm() < 1e-15);

        // at the cap the would-be image is not representable
        let capped = basis(1, 2, 2);
        let c = creation(&capped, 0, Mode::B).unwrap();
        let full = capped.find(&[0, 2]).unwrap();
        assert!(c.matrix().column(full).iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn creation_is_adjoint_of_annihilation() {
        let b = basis(2, 2, 2);
        let lower = basis(2, 1, 2);
        for site in 0..2 {
            for mode in [Mode::A, Mode::B] {
                let a = annihilation(&b, site, mode).unwrap();
                let c = creation(&lower, site, mode).unwrap();
                assert_eq!(max_abs_diff(c.matrix(), &a.matrix().adjoint()), 0.0);
            }
        }
    }

    #[test]
    fn creation_times_annihilation_is_number() {
        let b = basis(2, 3, 3);
        let lower = basis(2, 2, 3);
        for site in 0..2 {
            for mode in [Mode::A, Mode::B] {
                let a = annihilation(&b, site, mode).unwrap();
                let c = creation(&lower, site, mode).unwrap();
                let n = c.then_from(&a).unwrap();
                for (i, s) in b.states().iter().enumerate() {
                    let expected = s.occupation(site, mode) as f64;
                    assert!((n.matrix()[(i, i)].re - expected).abs() < 1e-12);
                }
                let direct = number_operator(&b, site, mode).unwrap();
                assert!(max_abs_diff(n.matrix(), direct.matrix()) < 1e-12);
            }
        }
    }

    #[test]
    fn bosonic_commutator_holds_below_cap() {
        let cap = 2;
        let b = basis(2, 2, cap);
        let up = basis(2, 3, cap);
        let down = basis(2, 1, cap);
        for site in 0..2 {
            for mode in [Mode::A, Mode::B] {
                let a_dag_n = creation(&b, site, mode).unwrap();
                let a_up = annihilation(&up, site, mode).unwrap();
                let aa_dag = a_up.then_from(&a_dag_n).unwrap();
                let a_n = annihilation(&b, site, mode).unwrap();
                let a_dag_down = creation(&down, site, mode).unwrap();
                let a_dag_a = a_dag_down.then_from(&a_n).unwrap();
                for (i, s) in b.states().iter().enumerate() {
                    let comm = aa_dag.matrix()[(i, i)] - a_dag_a.matrix()[(i, i)];
                    let n = s.occupation(site, mode) as usize;
                    if n < cap {
                        assert!((comm.re - 1.0).abs() < 1e-12, "state {s}");
                    } else {
                        assert!((comm.re + n as f64).abs() < 1e-12, "state {s}");
                    }
                }
            }
        }
    }

    #[test]
    fn number_operators() {
        let b = basis(2, 3, 3);
        let mut sum = CMatrix::zeros(b.dim(), b.dim());
        for site in 0..2 {
            for mode in [Mode::A, Mode::B] {
                let n = number_operator(&b, site, mode).unwrap();
                let trace: f64 = n.matrix().trace().re;
                let direct: u32 = b.states().iter().map(|s| s.occupation(site, mode)).sum();
                assert_eq!(trace, direct as f64);
                sum += n.matrix();
            }
        }
        let expected = CMatrix::identity(b.dim(), b.dim()) * C64::new(3.0, 0.0);
        assert_eq!(max_abs_diff(&sum, &expected), 0.0);

        let n0 = number_operator(&b, 0, Mode::A).unwrap();
        let n1 = number_operator(&b, 1, Mode::A).unwrap();
        let comm = n0.commutator(&n1).unwrap();
        assert!(comm.matrix().iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn hopping_conserves_total_number() {
        let b = basis(3, 3, 3);
        let mut total = CMatrix::zeros(b.dim(), b.dim());
        for site in 0..3 {
            for mode in [Mode::A, Mode::B] {
                total += number_operator(&b, site, mode).unwrap().matrix();
            }
        }
        let total = Operator::hermitian(b.clone(), total).unwrap();
        for mode in [Mode::A, Mode::B] {
            let hop = transfer(&b, (0, mode), (1, mode)).unwrap();
            let comm = hop.commutator(&total).unwrap();
            assert!(comm.matrix().iter().all(|z| z.norm() < 1e-12));
        }
    }

    #[test]
    fn transfer_matches_ladder_product() {
        let b = basis(2, 2, 2);
        let lower = basis(2, 1, 2);
        let a1 = annihilation(&b, 1, Mode::B).unwrap();
        let c0 = creation(&lower, 0, Mode::B).unwrap();
        let product = c0.then_from(&a1).unwrap();
        let direct = transfer(&b, (0, Mode::B), (1, Mode::B)).unwrap();
        assert!(max_abs_diff(product.matrix(), direct.matrix()) < 1e-14);
    }

    #[test]
    fn out_of_range_site() {
        let b = basis(2, 2, 2);
        assert!(matches!(
            annihilation(&b, 2, Mode::A),
            Err(Error::SiteOutOfRange { site: 2, sites: 2 })
        ));
        assert!(creation(&b, 5, Mode::B).is_err());
        assert!(number_operator(&b, 2, Mode::A).is_err());
    }

    #[test]
    fn hermitian_flag_is_validated() {
        let b = basis(1, 1, 1);
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 1)] = C64::new(1.0, 0.0);
        assert!(matches!(
            Operator::hermitian(b.clone(), m.clone()),
            Err(Error::NotHermitian(_))
        ));
        assert!(!Operator::new(b.clone(), m).unwrap().is_hermitian());
        assert!(Operator::new(b, CMatrix::zeros(3, 3)).is_err());
    }

    #[test]
    fn display_form_parses_back() {
        let b = build_basis(3, 3, 3).unwrap();
        for st in b.states() {
            assert_eq!(st.to_string().parse::<FockState>().unwrap(), *st);
        }
        assert_eq!("|12,0;01>".parse::<FockState>().unwrap().occupations(), &[12, 0, 0, 1]);
        for bad in ["10;01", "|1;01>", "|ab;01>", "|>"] {
            assert!(bad.parse::<FockState>().is_err(), "{bad}");
        }
    }
}
