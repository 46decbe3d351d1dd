//! Sensitivity of a protocol to a relative error on every tunneling
//! amplitude, as from laser intensity fluctuations.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::evolve::StepControl;
use crate::linalg::CMatrix;

use super::ProtocolSpec;

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseReport {
    pub epsilons: Vec<f64>,
    /// `1 - |tr(U_0^+ U_eps) / 2^k|^2` for each grid point.
    pub added_infidelity: Vec<f64>,
    pub worst: f64,
    pub mean: f64,
}

fn overlap_infidelity(reference: &CMatrix, perturbed: &CMatrix) -> f64 {
    let d = reference.nrows() as f64;
    let tr = (reference.adjoint() * perturbed).trace() / d;
    (1.0 - tr.norm_sqr()).max(0.0)
}

/// Epsilon grid with `samples` evenly spaced points on
/// `[-relative_error, relative_error]`; one sample means just zero.
pub fn epsilon_grid(relative_error: f64, samples: usize) -> Vec<f64> {
    if samples == 1 {
        return vec![0.0];
    }
    let step = 2.0 * relative_error / (samples - 1) as f64;
    (0..samples).map(|i| -relative_error + step * i as f64).collect()
}

/// Reruns `spec` with all tunneling and Raman amplitudes multiplied by
/// `1 + eps` over a deterministic grid and compares each logical gate with
/// the unperturbed one.
pub fn noise_sweep(
    spec: &ProtocolSpec,
    relative_error: f64,
    samples: usize,
    steps: StepControl,
) -> Result<NoiseReport> {
    if samples == 0 {
        return Err(Error::InvalidArgument("noise sweep needs at least one sample".into()));
    }
    if !(relative_error.is_finite() && (0.0..1.0).contains(&relative_error)) {
        return Err(Error::InvalidArgument(format!(
            "relative error {relative_error} outside [0, 1)"
        )));
    }
    let reference = spec.report(steps)?.logical_matrix;
    let epsilons = epsilon_grid(relative_error, samples);
    let added_infidelity = epsilons
        .par_iter()
        .map(|&eps| {
            if eps == 0.0 {
                return Ok(0.0);
            }
            let perturbed = spec.with_couplings(spec.couplings().scale_tunneling(1.0 + eps));
            Ok(overlap_infidelity(&reference, &perturbed.report(steps)?.logical_matrix))
        })
        .collect::<Result<Vec<f64>>>()?;
    let worst = added_infidelity.iter().cloned().fold(0.0, f64::max);
    let mean = added_infidelity.iter().sum::<f64>() / samples as f64;
    Ok(NoiseReport {
        epsilons,
        added_infidelity,
        worst,
        mean,
    })
}
