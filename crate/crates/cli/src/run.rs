//! Runs a validated experiment and collects its result tables.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::path::PathBuf;
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use latgate_core::gates::on_qubit;
use latgate_core::protocols::{
    adiabatic_exchange, adiabatic_phase, exchange_couplings, fast_exchange, fast_phase, hadamard,
    noise_sweep, phase_gate_schedule, raman_rotation, toffoli_protocol,
};
use latgate_core::{
    build_basis, gate_fidelity, process_fidelity, target_gate, CouplingSet, Evaluation, Evolver,
    FidelityMode, FockState, Multipliers, ProtocolSpec, PulseSchedule, PulseShape, TargetGate,
};
use rayon::prelude::*;

use crate::config::{ExperimentConfig, ExperimentKind, Format, ProtocolName};
use crate::error::CliResult;
use crate::table::ResultTable;

/// Columns shared by every single-gate summary.
pub const GATE_COLUMNS: [&str; 6] = [
    "duration",
    "leakage",
    "raw_fidelity",
    "compensated_fidelity",
    "entangling_phase",
    "predicted_phase",
];

pub const FIGURE4_COLUMNS: [&str; 6] = ["u_over_j", "pop_01", "pop_10", "fidelity_state", "fidelity_process", "leakage"];

/// A result table and the suffix of its file name (empty for the main one).
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub suffix: String,
    pub table: ResultTable,
}

impl Output {
    fn main(table: ResultTable) -> Self {
        Self {
            suffix: String::new(),
            table,
        }
    }

    fn extra(suffix: &str, table: ResultTable) -> Self {
        Self {
            suffix: suffix.to_string(),
            table,
        }
    }
}

const DEFAULT_J_OVER_U: f64 = 1e-2;

/// Builds the protocol named in `[protocol]`.
pub fn build_protocol(cfg: &ExperimentConfig) -> CliResult<ProtocolSpec> {
    let p = &cfg.protocol;
    let m = &cfg.model;
    let spec = match p.name {
        ProtocolName::AdiabaticExchange => adiabatic_exchange(&cfg.exchange_base(), p.action, p.shape)?,
        ProtocolName::AdiabaticPhase => {
            let base = match p.j_over_u {
                // J/U is read as the V-system coupling sqrt(2) J_b over U_bb
                Some(r) => CouplingSet::uniform(2, 0.0, r * m.u_bb * FRAC_1_SQRT_2, m.u_aa, m.u_ab, m.u_bb),
                None => m.couplings(),
            };
            let schedule = phase_gate_schedule(&base, p.phase, p.shape)?;
            adiabatic_phase(&base, &schedule)?
        }
        ProtocolName::FastPhase => fast_phase(p.m.unwrap_or(1), p.n.unwrap_or(1), m.u_ab, m.u_bb)?,
        ProtocolName::FastExchange => fast_exchange(p.m.unwrap_or(4), p.n.unwrap_or(3), m.u_bb, m.u_ab)?,
        ProtocolName::Toffoli => toffoli_protocol(p.kappa, p.n.unwrap_or(3), m.u_bb, m.u_ab)?,
        ProtocolName::Raman => {
            let idle = CouplingSet::collisions(m.sites, m.u_aa, m.u_ab, m.u_bb);
            raman_rotation(&idle, p.site, p.theta, p.lambda, p.omega, p.broadcast)?
        }
        ProtocolName::Hadamard => {
            let idle = CouplingSet::collisions(m.sites, m.u_aa, m.u_ab, m.u_bb);
            hadamard(&idle, p.site, p.omega, p.broadcast)?
        }
    };
    Ok(spec)
}

fn gate_row(spec: &ProtocolSpec, eval: &Evaluation) -> Vec<f64> {
    vec![
        spec.schedule().total_duration(),
        eval.report.leakage,
        eval.raw_fidelity,
        eval.compensated_fidelity,
        eval.compensation.entangling_phase,
        spec.predicted().phase().unwrap_or(f64::NAN),
    ]
}

fn j_over_u_meaning(name: ProtocolName) -> &'static str {
    match name {
        ProtocolName::AdiabaticExchange => "J/U_ab with J_a = J_b and U_aa = U_bb = 2 U_ab",
        ProtocolName::AdiabaticPhase => "sqrt(2) J_b / U_bb",
        _ => "unused",
    }
}

fn describe(spec: &ProtocolSpec, table: &mut ResultTable) {
    table.set_meta("protocol", format!("{:?}", spec.kind()));
    if let Some(c) = spec.predicted().convention() {
        table.set_meta("coupling_convention", c.name());
    }
}

/// Fraction of the exchange action accumulated at fraction `s` of a
/// single segment, i.e. the normalized integral of the squared envelope.
fn action_fraction(shape: PulseShape, s: f64) -> f64 {
    let PulseShape::SmoothRamp { ramp_fraction: r } = shape else {
        return s;
    };
    if r <= 0.0 {
        return s;
    }
    // int_0^u sin^4
    let f = |u: f64| 3.0 * u / 8.0 - (2.0 * u).sin() / 4.0 + (4.0 * u).sin() / 32.0;
    let ramp = |s: f64| 2.0 * r / PI * f(0.5 * PI * s / r);
    let full = 3.0 * r / 8.0;
    let total = 2.0 * full + (1.0 - 2.0 * r);
    let w = if s < r {
        ramp(s)
    } else if s > 1.0 - r {
        full + (1.0 - 2.0 * r) + full - ramp(1.0 - s)
    } else {
        full + (s - r)
    };
    w / total
}

fn evolve(cfg: &ExperimentConfig) -> CliResult<Vec<Output>> {
    let initial: FockState = cfg.evolve.initial.parse()?;
    let atoms = initial.total() as usize;
    let basis = Arc::new(build_basis(cfg.model.sites, atoms, cfg.model.cap.unwrap_or(atoms))?);
    let index = basis.index_of(&initial).ok_or_else(|| {
        latgate_core::Error::InvalidArgument(format!("{initial} exceeds the per-mode cap"))
    })?;
    let mut psi = latgate_core::CVector::zeros(basis.dim());
    psi[index] = latgate_core::C64::new(1.0, 0.0);
    let schedule = if cfg.evolve.duration > 0.0 {
        PulseSchedule::single(cfg.evolve.duration, cfg.protocol.shape, Multipliers::ALL)?
    } else {
        PulseSchedule::idle()
    };
    let run = Evolver::new(&basis)?.state(&psi, &cfg.model.couplings(), &schedule, cfg.steps, cfg.evolve.samples)?;
    let mut columns = vec!["time".to_string()];
    for s in basis.states() {
        let label: Vec<String> = s.occupations().chunks(2).map(|p| format!("{}{}", p[0], p[1])).collect();
        columns.push(format!("p_{}", label.join("_")));
    }
    let mut table = ResultTable::new(columns);
    for (t, psi) in &run.trajectory {
        let mut row = vec![*t];
        row.extend(psi.iter().map(|z| z.norm_sqr()));
        table.push(row);
    }
    table.set_meta("basis_dim", basis.dim().to_string());
    table.set_meta("steps_per_ramp", run.steps.to_string());
    Ok(vec![Output::main(table)])
}

fn gate(cfg: &ExperimentConfig) -> CliResult<Vec<Output>> {
    let spec = build_protocol(cfg)?;
    let eval = spec.evaluate(cfg.steps)?;
    let mut summary = ResultTable::new(GATE_COLUMNS);
    summary.push(gate_row(&spec, &eval));
    describe(&spec, &mut summary);
    Ok(vec![Output::main(summary), Output::extra("matrix", matrix_table(&eval))])
}

fn matrix_table(eval: &Evaluation) -> ResultTable {
    let m = &eval.report.logical_matrix;
    let c = &eval.compensated;
    let mut t = ResultTable::new(["row", "col", "re", "im", "compensated_re", "compensated_im"]);
    for r in 0..m.nrows() {
        for k in 0..m.ncols() {
            t.push(vec![r as f64, k as f64, m[(r, k)].re, m[(r, k)].im, c[(r, k)].re, c[(r, k)].im]);
        }
    }
    t
}

fn sweep(cfg: &ExperimentConfig) -> CliResult<Vec<Output>> {
    let name = cfg.sweep.parameter.clone();
    let rows = cfg
        .sweep
        .values()
        .into_par_iter()
        .map(|v| {
            let point = cfg.with_parameter(&name, v).expect("validated parameter");
            let spec = build_protocol(&point)?;
            let eval = spec.evaluate(point.steps)?;
            let mut row = vec![v];
            row.extend(gate_row(&spec, &eval));
            Ok(row)
        })
        .collect::<CliResult<Vec<_>>>()?;
    let mut columns = vec![name];
    columns.extend(GATE_COLUMNS.iter().map(|c| c.to_string()));
    let mut table = ResultTable::new(columns);
    rows.into_iter().for_each(|r| table.push(r));
    Ok(vec![Output::main(table)])
}

fn figure3(cfg: &ExperimentConfig) -> CliResult<Vec<Output>> {
    let r = cfg.protocol.j_over_u.unwrap_or(DEFAULT_J_OVER_U);
    let base = exchange_couplings(cfg.model.u_ab, r);
    let mut table = ResultTable::new([
        "final_action", "action", "time", "pop_00", "pop_01", "pop_10", "pop_11", "leakage",
    ]);
    for &a in &cfg.protocol.actions {
        let spec = adiabatic_exchange(&base, a, cfg.protocol.shape)?;
        let basis = spec.basis()?;
        let map = spec.logical_map(&basis)?;
        let total = spec.schedule().total_duration();
        let samples = if total > 0.0 { cfg.evolve.samples } else { 1 };
        let run = Evolver::new(&basis)?.state(&map.state(1), spec.couplings(), spec.schedule(), cfg.steps, samples)?;
        for (t, psi) in &run.trajectory {
            let s = if total > 0.0 { t / total } else { 1.0 };
            let mut row = vec![a, a * action_fraction(cfg.protocol.shape, s), *t];
            row.extend((0..4).map(|x| psi[map.index(x)].norm_sqr()));
            row.push(map.leakage_of(psi));
            table.push(row);
        }
    }
    table.set_meta("initial", "|01>");
    table.set_meta("j_over_u", format!("{r:e} ({})", j_over_u_meaning(ProtocolName::AdiabaticExchange)));
    Ok(vec![Output::main(table)])
}

fn figure4(cfg: &ExperimentConfig) -> CliResult<Vec<Output>> {
    let bell = FidelityMode::BellMaxPhase { input: 1, partner: 2 };
    let rows = cfg
        .sweep
        .values()
        .into_par_iter()
        .map(|u_over_j| {
            let base = exchange_couplings(cfg.model.u_ab, 1.0 / u_over_j);
            let spec = adiabatic_exchange(&base, cfg.protocol.action, cfg.protocol.shape)?;
            let eval = spec.evaluate(cfg.steps)?;
            let m = &eval.report.logical_matrix;
            let state = gate_fidelity(&eval.report, spec.predicted().target(), &bell)?;
            Ok(vec![
                u_over_j,
                m[(1, 1)].norm_sqr(),
                m[(2, 1)].norm_sqr(),
                state,
                eval.compensated_fidelity,
                eval.report.leakage,
            ])
        })
        .collect::<CliResult<Vec<_>>>()?;
    let mut table = ResultTable::new(FIGURE4_COLUMNS);
    rows.into_iter().for_each(|r| table.push(r));
    table.set_meta("initial", "|01>");
    table.set_meta("fidelity_state", "|<01|U|01> + e^{ia}<10|U|01>|^2 / 2 maximized over a");
    table.set_meta("fidelity_process", "process fidelity after single-qubit z compensation");
    table.set_meta("u_over_j_range", "repo convention; the axis range is approximate");
    table.set_meta("j_over_u", j_over_u_meaning(ProtocolName::AdiabaticExchange));
    Ok(vec![Output::main(table)])
}

fn toffoli(cfg: &ExperimentConfig) -> CliResult<Vec<Output>> {
    let m = &cfg.model;
    let spec = toffoli_protocol(cfg.protocol.kappa, cfg.protocol.n.unwrap_or(3), m.u_bb, m.u_ab)?;
    let eval = spec.evaluate(cfg.steps)?;
    // Hadamard on the target qubit turns C2P into Toffoli
    let idle = CouplingSet::collisions(3, m.u_aa, m.u_ab, m.u_bb);
    let h = hadamard(&idle, 2, cfg.protocol.omega, true)?.report(cfg.steps)?.logical_matrix;
    let composed = &h * &eval.compensated * &h;
    let toffoli_fidelity = process_fidelity(&composed, &target_gate(&TargetGate::Toffoli));
    let ideal = on_qubit(&latgate_core::gates::hadamard(), 3, 3);
    let mut columns: Vec<&str> = GATE_COLUMNS.to_vec();
    columns.push("toffoli_fidelity");
    let mut summary = ResultTable::new(columns);
    let mut row = gate_row(&spec, &eval);
    row.push(toffoli_fidelity);
    summary.push(row);
    describe(&spec, &mut summary);
    summary.set_meta(
        "hadamard_error",
        format!("{:e}", 1.0 - process_fidelity(&h, &ideal)),
    );
    let mut diag = ResultTable::new(["index", "re", "im", "compensated_re", "compensated_im", "sign"]);
    let reference = eval.compensated[(0, 0)].conj();
    for k in 0..8 {
        let z = eval.report.logical_matrix[(k, k)];
        let c = eval.compensated[(k, k)];
        diag.push(vec![k as f64, z.re, z.im, c.re, c.im, (c * reference).re.signum()]);
    }
    Ok(vec![Output::main(summary), Output::extra("diagonal", diag)])
}

fn noise(cfg: &ExperimentConfig) -> CliResult<Vec<Output>> {
    let spec = build_protocol(cfg)?;
    let r = noise_sweep(&spec, cfg.noise.relative_error, cfg.noise.samples, cfg.steps)?;
    let mut table = ResultTable::new(["epsilon", "added_infidelity"]);
    for (e, i) in r.epsilons.iter().zip(&r.added_infidelity) {
        table.push(vec![*e, *i]);
    }
    describe(&spec, &mut table);
    table.set_meta("worst", format!("{:.16e}", r.worst));
    table.set_meta("mean", format!("{:.16e}", r.mean));
    Ok(vec![Output::main(table)])
}

/// Runs the experiment; every table carries the common metadata block.
pub fn run(cfg: &ExperimentConfig) -> CliResult<Vec<Output>> {
    let mut outputs = match cfg.kind {
        ExperimentKind::Evolve => evolve(cfg)?,
        ExperimentKind::Gate => gate(cfg)?,
        ExperimentKind::Sweep => sweep(cfg)?,
        ExperimentKind::Figure3 => figure3(cfg)?,
        ExperimentKind::Figure4 => figure4(cfg)?,
        ExperimentKind::Toffoli => toffoli(cfg)?,
        ExperimentKind::Noise => noise(cfg)?,
    };
    for out in &mut outputs {
        let own = out.table.take_metadata();
        let t = &mut out.table;
        t.set_meta("tool", "latgate");
        t.set_meta("version", env!("CARGO_PKG_VERSION"));
        t.set_meta("kind", cfg.kind.name());
        if matches!(cfg.kind, ExperimentKind::Gate | ExperimentKind::Sweep | ExperimentKind::Noise) {
            t.set_meta("j_over_u_meaning", j_over_u_meaning(cfg.protocol.name));
        }
        for (k, v) in own {
            t.set_meta(k, v);
        }
        t.set_meta("config", cfg.echo().trim_end());
    }
    Ok(outputs)
}

/// Writes each table to `<dir>/<name>[_<suffix>].<ext>` and returns the paths.
pub fn emit(cfg: &ExperimentConfig, outputs: &[Output]) -> CliResult<Vec<PathBuf>> {
    let format: Format = cfg.output.format;
    let stamp = cfg.output.timestamp.then(|| {
        let secs = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        format!("unix:{secs}")
    });
    let mut paths = Vec::new();
    for out in outputs {
        let stem = if out.suffix.is_empty() {
            cfg.output.name.clone()
        } else {
            format!("{}_{}", cfg.output.name, out.suffix)
        };
        let path = cfg.output.dir.join(format!("{stem}.{}", format.extension()));
        let mut table = out.table.clone();
        if let Some(s) = &stamp {
            table.set_meta("timestamp", s.clone());
        }
        table.write(&path, format)?;
        paths.push(path);
    }
    Ok(paths)
}
