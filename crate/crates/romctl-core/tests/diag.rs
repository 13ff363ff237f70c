//! temporary diagnostics
use romctl_core::pipeline::*;
use romctl_core::systems::benchmarks::*;
use romctl_core::Config;

#[test]
#[ignore]
fn diag_nominal_and_drift() {
    let (descriptor, spec) = heat_benchmark(60, 2, 10);
    let plant = spec.build().unwrap();
    let bundle = run_design(&descriptor, &plant, &Config::default(), 42, None)
        .map_err(|f| format!("{} ({:?})", f.error, f.trace.escalations)).unwrap();
    println!("method {:?} r={} eps={:.4} freq={:?} kappa={:.3e}",
        bundle.selection.rom_method, bundle.model.r(), bundle.rom_report.eps_l2,
        bundle.rom_report.freq_mismatch, bundle.model.estimator_kappa);
    let cfg = Config::default();
    let scenarios = default_scenarios(&bundle, &spec, &cfg);
    let run = run_adaptive(&bundle, &spec, &scenarios[0], &cfg).unwrap();
    for w in run.window_history.iter().rev().take(8) {
        println!("nominal w@{}: e={:.4} rho={:.4} s={:.3} lam={:.4} stale={}", w.step, w.e_avg, w.rho_avg, w.s_avg, w.lambda_max, w.lambda_stale);
    }
    // drift run
    let t_s = bundle.model.t_s;
    let steps = 30 * cfg.window;
    let drift_step = steps / 3;
    let scenario = Scenario {
        name: "drift".into(),
        reference: ReferenceSpec::Step { at_s: 2.0 * t_s * cfg.window as f64, level: feasible_reference(&bundle.model, 1.0) },
        drift: vec![DriftEvent { param: "diffusivity".into(), factor: 1.2, at_step: drift_step, ramp_steps: 0 }],
        disturbance: None, noise: None, bounds_override: None,
        steps, estimator: EstimatorMode::OutputFeedback, adaptation: true, seed: 5,
    };
    let run = run_adaptive(&bundle, &spec, &scenario, &cfg).unwrap();
    for w in run.window_history.iter() {
        if w.step + 200 > drift_step && w.step < drift_step + 400 {
            println!("drift w@{}: e={:.4} rho={:.4} lam={:.4}", w.step, w.e_avg, w.rho_avg, w.lambda_max);
        }
    }
    println!("verdicts: {:?}", run.verdicts.iter().filter(|(s,_)| *s+100 > drift_step).take(25).collect::<Vec<_>>());
    println!("adapt: {:?}", run.adaptation_steps);
    for msg in run.trace.messages.iter() {
        if let TraceMessage::EvalAdapt(m) = msg {
            if m.timestamp > (drift_step as f64 - 60.0) * t_s && m.timestamp < (drift_step as f64 + 400.0) * t_s {
                println!("eval@{:.0}: {} rho={:.3} e={:.3} rank={} (nom {}) theta={:.1} pers={}",
                    m.timestamp / t_s, m.condition_triggered, m.diagnostics.rho_avg,
                    m.diagnostics.e_avg, m.diagnostics.rank_recent, m.diagnostics.rank_nominal,
                    m.diagnostics.subspace_angle_deg, m.diagnostics.persistence_windows);
            }
        }
    }
}

#[test]
#[ignore]
fn diag_cubic_tiny_k3() {
    // near-zero cubic: the nonlinear propagation should match the linear ROM
    let (descriptor, spec) = cubic_chain_benchmark(25, 3, 8);
    let spec = match spec {
        PlantSpec::SpringChain(mut c) => {
            c.cubic_coeff = 1e-12;
            PlantSpec::SpringChain(c)
        }
        _ => unreachable!(),
    };
    let plant = spec.build().unwrap();
    match run_design(&descriptor, &plant, &Config::default(), 7, None) {
        Ok(b) => println!("TINY method {:?} r={} eps={:.4} escal={:?}", b.selection.rom_method, b.model.r(), b.rom_report.eps_l2, b.trace.escalations),
        Err(f) => println!("TINY FAILED {} escal={:?}", f.error, f.trace.escalations),
    }
}

#[test]
#[ignore]
fn diag_cubic() {
    let (descriptor, spec) = cubic_chain_benchmark(60, 3, 18);
    let plant = spec.build().unwrap();
    match run_design(&descriptor, &plant, &Config::default(), 7, None) {
        Ok(b) => println!("method {:?} r={} eps={:.4} escal={:?}", b.selection.rom_method, b.model.r(), b.rom_report.eps_l2, b.trace.escalations),
        Err(f) => println!("FAILED {} escal={:?}", f.error, f.trace.escalations),
    }
}

#[test]
#[ignore]
fn diag_building() {
    let (descriptor, spec) = building_benchmark(24, 2, 8);
    let plant = spec.build().unwrap();
    match run_design(&descriptor, &plant, &Config::default(), 11, None) {
        Ok(b) => println!("method {:?} r={} eps={:.4} freq={:?} escal={:?}", b.selection.rom_method, b.model.r(), b.rom_report.eps_l2, b.rom_report.freq_mismatch, b.trace.escalations),
        Err(f) => println!("FAILED {} escal={:?}", f.error, f.trace.escalations),
    }
}
