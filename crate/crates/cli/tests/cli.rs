use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;

use latgate_cli::config::{default_table, Origin};
use latgate_cli::run::{FIGURE4_COLUMNS, GATE_COLUMNS};
use latgate_cli::{run, template, ExperimentConfig, Format, ResultTable};
use proptest::prelude::*;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_latgate"))
}

fn config(text: &str) -> ExperimentConfig {
    ExperimentConfig::parse(text).unwrap_or_else(|e| panic!("{e}"))
}

fn main_table(cfg: &ExperimentConfig) -> ResultTable {
    run(cfg).unwrap().remove(0).table
}

#[test]
fn defaults_template_matches_schema() {
    let shipped: toml::Table = template("defaults").unwrap().parse().unwrap();
    assert_eq!(shipped, default_table());
}

#[test]
fn templates_parse() {
    for name in ["figure3", "figure4", "toffoli"] {
        let c = config(template(name).unwrap());
        assert_eq!(c.kind.name(), name);
    }
}

#[test]
fn figure4_template_spans_20_to_200() {
    let c = config(template("figure4").unwrap());
    assert_eq!(c.sweep.parameter, "u_over_j");
    assert_eq!((c.sweep.from, c.sweep.to), (20.0, 200.0));
    let v = c.sweep.values();
    assert_eq!(v.first(), Some(&20.0));
    assert_eq!(v.last(), Some(&200.0));
}

#[test]
fn misspelled_key_reports_line_and_nearest_name() {
    let e = ExperimentConfig::parse("kind = \"gate\"\n\n[protocol]\nacton = \"pi\"\n").unwrap_err();
    assert_eq!(e.0.len(), 1);
    assert_eq!(e.0[0].origin, Origin::Line(4));
    let msg = e.to_string();
    assert!(msg.contains("protocol.acton") && msg.contains("`action`"), "{msg}");
}

#[test]
fn metadata_echoes_the_config() {
    let c = config("kind = \"gate\"\n[model]\nu_ab = 1.5\nu_aa = 3.0\nu_bb = 3.0\n");
    let t = main_table(&c);
    let echo: toml::Table = t.meta("config").unwrap().parse().unwrap();
    assert_eq!(&echo, c.resolved());
    assert_eq!(echo["model"]["u_ab"].as_float(), Some(1.5));
    let back = ResultTable::parse(&t.render(Format::Csv)).unwrap();
    assert_eq!(back.metadata(), t.metadata());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tables_round_trip_bit_exactly(
        cols in 1usize..5,
        raw in prop::collection::vec(any::<u64>(), 0..40),
        note in "[ -~]{0,30}",
    ) {
        let mut t = ResultTable::new((0..cols).map(|i| format!("c{i}")));
        t.set_meta("note", note);
        for chunk in raw.chunks_exact(cols) {
            t.push(chunk.iter().map(|&b| f64::from_bits(b)).collect());
        }
        for f in [Format::Csv, Format::Plot] {
            let back = ResultTable::parse(&t.render(f)).unwrap();
            prop_assert_eq!(back.columns(), t.columns());
            prop_assert_eq!(back.metadata(), t.metadata());
            for (a, b) in back.rows().iter().flatten().zip(t.rows().iter().flatten()) {
                // NaN payloads are not representable in text
                prop_assert!(a.to_bits() == b.to_bits() || (a.is_nan() && b.is_nan()));
            }
            prop_assert_eq!(back.rows().len(), t.rows().len());
        }
    }
}

const SWEEP: &str = r#"
kind = "sweep"
[protocol]
name = "adiabatic_exchange"
[sweep]
parameter = "u_over_j"
from = 20.0
to = 120.0
points = 6
"#;

#[test]
fn parallel_sweep_equals_serial() {
    let c = config(SWEEP);
    let serial = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(|| main_table(&c));
    let parallel = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap().install(|| main_table(&c));
    assert_eq!(serial.render(Format::Csv), parallel.render(Format::Csv));
    assert_eq!(serial.rows().len(), 6);
}

#[test]
fn single_point_sweep_is_a_gate_run() {
    let sweep = config(&format!("{SWEEP}\n").replace("points = 6", "points = 1"));
    let gate = config("kind = \"gate\"\n[protocol]\nj_over_u = 0.05\n");
    let s = main_table(&sweep);
    let g = main_table(&gate);
    assert_eq!(s.rows().len(), 1);
    assert_eq!(&s.columns()[1..], g.columns());
    assert_eq!(g.columns(), GATE_COLUMNS);
    let bits = |r: &[f64]| -> Vec<u64> { r.iter().map(|x| x.to_bits()).collect() };
    assert_eq!(bits(&s.rows()[0][1..]), bits(&g.rows()[0]));
}

#[test]
fn figure3_swaps_at_pi_and_splits_at_half_pi() {
    let t = main_table(&config(template("figure3").unwrap()));
    let rows = t.rows();
    let last_of = |a: f64| rows.iter().rev().find(|r| (r[0] - a).abs() < 1e-12).unwrap().clone();
    let pi = last_of(PI);
    let (p01, p10) = (pi[4], pi[5]);
    assert!((p10 - 1.0).abs() <= 1e-3 && p01 <= 1e-3, "{p01} {p10}");
    let half = last_of(PI / 2.0);
    assert!((half[4] - 0.5).abs() <= 1e-3 && (half[5] - 0.5).abs() <= 1e-3);
    assert!((half[1] - PI / 2.0).abs() < 1e-12);
    let zero = last_of(0.0);
    assert_eq!(zero[4], 1.0);
}

#[test]
fn figure4_fidelity_at_large_u_over_j() {
    let t = main_table(&config(template("figure4").unwrap()));
    assert_eq!(t.columns(), FIGURE4_COLUMNS);
    assert_eq!(t.rows().len(), 37);
    for r in t.rows().iter().filter(|r| r[0] >= 100.0) {
        assert!(1.0 - r[3] <= 4e-4, "U/J = {}: 1 - F = {}", r[0], 1.0 - r[3]);
        assert!((r[1] + r[2] - 1.0).abs() <= 1e-3);
    }
    assert!(t.meta("u_over_j_range").is_some());
}

fn run_bin(args: &[&str], dir: &Path) -> (i32, String) {
    let out = bin().args(args).arg("--out").arg(dir).output().unwrap();
    (out.status.code().unwrap(), String::from_utf8_lossy(&out.stderr).into_owned())
}

#[test]
fn reruns_are_byte_identical_without_timestamp() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for d in [&a, &b] {
        assert_eq!(run_bin(&["toffoli", "--no-timestamp"], d).0, 0);
    }
    // `--out` differs between the runs, so compare with it masked
    let read = |d: &Path| std::fs::read_to_string(d.join("toffoli.csv")).unwrap().replace(&d.display().to_string(), "DIR");
    assert_eq!(read(&a), read(&b));
    assert!(!read(&a).contains("# timestamp:"));

    let c = tmp.path().join("c");
    assert_eq!(run_bin(&["toffoli"], &c).0, 0);
    let stamped = std::fs::read_to_string(c.join("toffoli.csv")).unwrap();
    assert!(stamped.contains("# timestamp: unix:"));
}

#[test]
fn identical_invocations_write_identical_files() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("gate.toml");
    std::fs::write(&cfg, "kind = \"gate\"\n[output]\ndir = \"res\"\n").unwrap();
    let mut files = Vec::new();
    for _ in 0..2 {
        let st = bin().current_dir(tmp.path()).args(["simulate", "gate.toml", "--no-timestamp"]).output().unwrap().status;
        assert!(st.success());
        files.push(std::fs::read(tmp.path().join("res/gate_matrix.csv")).unwrap());
    }
    assert_eq!(files[0], files[1]);
}

#[test]
fn plot_format_writes_dat_files() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(run_bin(&["figure3", "--format", "plot", "evolve.samples=5"], tmp.path()).0, 0);
    let text = std::fs::read_to_string(tmp.path().join("figure3.dat")).unwrap();
    let t = ResultTable::parse(&text).unwrap();
    assert_eq!(t.rows().len(), 1 + 5 + 5);
    assert!(text.contains("# columns: final_action action time"));
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let p = tmp.path();
    let write = |name: &str, text: &str| {
        let f = p.join(name);
        std::fs::write(&f, text).unwrap();
        f.display().to_string()
    };

    let bad = write("bad.toml", "kind = \"gate\"\n[model]\nuab = 1\n");
    let (code, err) = run_bin(&["simulate", &bad], p);
    assert_eq!(code, 2);
    assert!(err.contains("line 3") && err.contains("`u_ab`"), "{err}");

    let (code, _) = run_bin(&["figure4", "sweep.to=10"], p);
    assert_eq!(code, 2);

    let odd = write("odd.toml", "kind = \"gate\"\n[protocol]\nname = \"fast_exchange\"\nm = 3\n");
    assert_eq!(run_bin(&["simulate", &odd], p).0, 3);

    let slow = write(
        "slow.toml",
        "kind = \"gate\"\n[protocol]\nshape = \"smooth\"\nj_over_u = 0.01\n[numerics]\nmax_steps = 8\n",
    );
    let (code, err) = run_bin(&["simulate", &slow], p);
    assert_eq!(code, 4, "{err}");

    let missing = p.join("nope.toml").display().to_string();
    assert_eq!(run_bin(&["simulate", &missing], p).0, 1);

    let ok = write("ok.toml", "kind = \"gate\"\n");
    assert_eq!(run_bin(&["simulate", &ok, "--no-timestamp"], p).0, 0);
}

#[test]
fn template_command_prints_the_shipped_text() {
    let out = bin().args(["template", "figure4"]).output().unwrap();
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap(), template("figure4").unwrap());
}
