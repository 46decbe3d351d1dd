//! Config-driven experiment runner for the lattice gate simulator.

pub mod config;
pub mod error;
pub mod run;
pub mod table;

pub use config::{ExperimentConfig, ExperimentKind, Format};
pub use error::{CliError, CliResult};
pub use run::{build_protocol, emit, run, Output};
pub use table::ResultTable;

/// Shipped experiment templates by name.
pub const TEMPLATES: &[(&str, &str)] = &[
    ("defaults", include_str!("../templates/defaults.toml")),
    ("figure3", include_str!("../templates/figure3.toml")),
    ("figure4", include_str!("../templates/figure4.toml")),
    ("toffoli", include_str!("../templates/toffoli.toml")),
];

pub fn template(name: &str) -> Option<&'static str> {
    TEMPLATES.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}
