use std::f64::consts::PI;

use latgate_core::evolve::Evolver;
use latgate_core::protocols::*;
use latgate_core::*;

fn fit_exponent(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = xs.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

#[test]
fn exchange_infidelity_falls_as_j_over_u_squared() {
    let ratios = [0.05, 0.02, 0.01, 0.005];
    let infid: Vec<f64> = ratios
        .iter()
        .map(|&r| {
            let spec = adiabatic_exchange(&exchange_couplings(1.0, r), PI / 2.0, PulseShape::Square).unwrap();
            1.0 - spec.evaluate(StepControl::default()).unwrap().compensated_fidelity
        })
        .collect();
    let p = fit_exponent(&ratios, &infid);
    assert!(p >= 1.8, "exponent {p}, infidelities {infid:?}");
}

fn worst_trajectory_leakage(spec: &ProtocolSpec) -> f64 {
    let basis = spec.basis().unwrap();
    let map = spec.logical_map(&basis).unwrap();
    let ev = Evolver::new(&basis).unwrap();
    let mut worst = 0.0f64;
    for x in 0..map.dim() {
        let run = ev
            .state(&map.state(x), spec.couplings(), spec.schedule(), StepControl::default(), 200)
            .unwrap();
        for (_, psi) in &run.trajectory {
            worst = worst.max(map.leakage_of(psi));
        }
    }
    worst
}

#[test]
fn adiabatic_protocols_stay_singly_occupied() {
    let exchange = adiabatic_exchange(&exchange_couplings(1.0, 1e-2), PI / 2.0, PulseShape::Square).unwrap();
    assert!(worst_trajectory_leakage(&exchange) <= 1e-3);

    // J/U for the phase gate is the V-system coupling sqrt(2) J_b over U_bb
    let base = CouplingSet::uniform(2, 0.0, 1e-2 / 2f64.sqrt(), 1.0, 2.0, 1.0);
    let schedule = phase_gate_schedule(&base, PI, PulseShape::Square).unwrap();
    let phase = adiabatic_phase(&base, &schedule).unwrap();
    let worst = worst_trajectory_leakage(&phase);
    assert!(worst <= 1e-3, "{worst}");
}

#[test]
fn fast_gates_return_and_transiently_leave() {
    for spec in [fast_phase(1, 1, 2.0, 1.0).unwrap(), fast_exchange(4, 3, 2.0, 1.0).unwrap()] {
        let r = spec.report(StepControl::default()).unwrap();
        assert!(r.leakage <= 1e-6, "{:?}: {}", spec.kind(), r.leakage);
        let t = spec.schedule().total_duration();
        let seg = spec.schedule().segments()[0];
        let halfway = PulseSchedule::single(0.5 * t, seg.shape, seg.multipliers).unwrap();
        let basis = spec.basis().unwrap();
        let map = spec.logical_map(&basis).unwrap();
        let u = evolve_schedule(spec.couplings(), &halfway, &basis, StepControl::default()).unwrap();
        let mid = project_to_logical(&u, &map).unwrap();
        assert!(mid.leakage > 0.0);
    }
}

#[test]
fn constructors_are_deterministic() {
    let a = fast_phase(2, 1, 3.0, 1.0).unwrap();
    let b = fast_phase(2, 1, 3.0, 1.0).unwrap();
    assert_eq!(a.schedule(), b.schedule());
    assert_eq!(a.couplings(), b.couplings());
    assert_eq!(a.predicted().target(), b.predicted().target());
    let a = toffoli_protocol(1.0, 3, 1.0, 1000.0).unwrap();
    let b = toffoli_protocol(1.0, 3, 1.0, 1000.0).unwrap();
    assert_eq!(a.schedule(), b.schedule());
    assert_eq!(a.couplings(), b.couplings());
}

#[test]
fn toffoli_from_c2p_and_hadamards() {
    let c2p = toffoli_protocol(1.0, 3, 1.0, 1000.0).unwrap();
    let eval = c2p.evaluate(StepControl::default()).unwrap();
    let d = &eval.compensated;
    let signs: Vec<f64> = (0..8).map(|k| (d[(k, k)] * d[(0, 0)].conj()).re.signum()).collect();
    assert_eq!(signs, vec![1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, -1.0]);
    assert!(1.0 - eval.compensated_fidelity <= 1e-2, "{}", eval.compensated_fidelity);

    let idle = CouplingSet::collisions(3, 1.0, 1000.0, 1.0);
    let h = hadamard(&idle, 2, 1.0, false).unwrap();
    let hm = h.report(StepControl::default()).unwrap().logical_matrix;
    let toffoli = &hm * d * &hm;
    let f = process_fidelity(&toffoli, &target_gate(&TargetGate::Toffoli));
    assert!(1.0 - f <= 1e-2, "{f}");
}
