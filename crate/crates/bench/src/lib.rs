//! Shared fixtures for the benchmarks.

use std::sync::Arc;

use latgate_cli::ExperimentConfig;
use latgate_core::{build_basis, BasisSet, CouplingSet};

/// Generic couplings with every term switched on.
pub fn couplings(sites: usize) -> CouplingSet {
    let mut c = CouplingSet::uniform(sites, 0.07, 0.05, 1.1, 0.6, 0.9).with_nnn_b(0.02);
    c.j_r.iter_mut().for_each(|z| *z = latgate_core::C64::new(0.03, 0.01));
    c
}

/// One atom per site with the per-mode cap equal to the atom number.
pub fn basis(sites: usize) -> Arc<BasisSet> {
    Arc::new(build_basis(sites, sites, sites).expect("basis"))
}

/// A `u_over_j` sweep of the exchange gate with `points` points.
pub fn exchange_sweep(points: usize) -> ExperimentConfig {
    let text = format!(
        "kind = \"sweep\"\n[sweep]\nparameter = \"u_over_j\"\nfrom = 20.0\nto = 200.0\npoints = {points}\n"
    );
    ExperimentConfig::parse(&text).expect("sweep config")
}
