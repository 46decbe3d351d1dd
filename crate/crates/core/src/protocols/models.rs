//! Few-level models of the two-site dynamics, used as oracles against the
//! full-space simulation.

use std::f64::consts::SQRT_2;

use crate::linalg::{CMatrix, Spectral, C64};

/// Small Hermitian matrix with basis labels.
#[derive(Debug, Clone)]
pub struct SmallModel {
    pub labels: Vec<&'static str>,
    pub matrix: CMatrix,
}

fn real(n: usize, entries: &[f64]) -> CMatrix {
    CMatrix::from_row_slice(n, n, &entries.iter().map(|&x| C64::new(x, 0.0)).collect::<Vec<_>>())
}

/// V-system of `|01;01>` coupled to `|02;00>` and `|00;02>`:
///
/// ```text
/// [ 0   -J   -J ]
/// [ -J  U_bb  0 ]
/// [ -J  0   U_bb]
/// ```
///
/// With lattice tunneling `J_b` the exact coupling is `J = sqrt(2) J_b`.
pub fn h1_model(j: f64, u_bb: f64) -> SmallModel {
    SmallModel {
        labels: vec!["|01;01>", "|02;00>", "|00;02>"],
        matrix: real(3, &[0.0, -j, -j, -j, u_bb, 0.0, -j, 0.0, u_bb]),
    }
}

/// Exchange block on `|00;11>, |10;01>, |01;10>, |11;00>`.
pub fn h2_model(j_a: f64, j_b: f64, u_ab: f64) -> SmallModel {
    SmallModel {
        labels: vec!["|00;11>", "|10;01>", "|01;10>", "|11;00>"],
        matrix: real(
            4,
            &[
                u_ab, -j_a, -j_b, 0.0, //
                -j_a, 0.0, 0.0, -j_b, //
                -j_b, 0.0, 0.0, -j_a, //
                0.0, -j_b, -j_a, u_ab,
            ],
        ),
    }
}

/// Logical gate of `b`-only tunneling on two sites, from the exact sector
/// models: `|00>` is inert, `|01>` and `|10>` each form a two-level system
/// with a doubly occupied `ab` site, and `|11>` is the V-system. Returns the
/// 4x4 logical amplitudes and the worst return leakage.
pub fn phase_sector_gate(j_b: f64, u_ab: f64, u_bb: f64, t: f64) -> (CMatrix, f64) {
    let v = Spectral::of_hermitian(&h1_model(SQRT_2 * j_b, u_bb).matrix).propagator(t);
    let two = Spectral::of_hermitian(&real(2, &[0.0, -j_b, -j_b, u_ab])).propagator(t);
    let amps = [C64::new(1.0, 0.0), two[(0, 0)], two[(0, 0)], v[(0, 0)]];
    let leakage = amps.iter().map(|a| 1.0 - a.norm_sqr()).fold(0.0, f64::max).max(0.0);
    let g = CMatrix::from_diagonal(&crate::linalg::CVector::from_column_slice(&amps));
    (g, leakage)
}
