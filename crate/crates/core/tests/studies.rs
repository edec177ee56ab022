use scalelab::config::RunConfig;
use scalelab::experiments::*;
use scalelab::families::{random_stream_velocity, TimeProfile};
use scalelab::fluid::{acceleration, fluid_source};
use scalelab::heat::{eta_derivative, ScaleStack};
use scalelab::io::read_checkpoint;
use scalelab::spectral::{laplacian, make_grid};

#[test]
fn filter_source_and_closure_suites_pass() {
    for report in [filter_suite(5, 1e-12).unwrap(), source_suite().unwrap(), closure_suite(5).unwrap()] {
        assert!(report.passed, "{}: {:?}", report.suite, report.failures());
    }
}

#[test]
fn defect_converges_at_second_order() {
    for kind in [FamilyKind::TaylorGreen, FamilyKind::Multimode, FamilyKind::Burgers] {
        let s = defect_convergence(kind, 2, 0.1, &defect_steps(0.005)).unwrap();
        assert!(s.min_order() >= 1.9, "{}: {:?}", s.name, s.rows);
    }
}

#[test]
fn acceleration_transport_matches_source() {
    // filtered multimode velocity: (∂_η − △)a = s with a = v_t + v·∇v
    let g = make_grid(2, 32).unwrap();
    let profile = TimeProfile {
        c0: 0.5,
        c1: 1.0,
        omega: 1.1,
        phase: 0.0,
    };
    let fam = random_stream_velocity(8, 6, 3, 1.0, profile, |k| k);
    let eta = 0.1;
    let err = |h: f64| {
        let a = ScaleStack::from_fn(eta - 2.0 * h, h, 5, |e| {
            acceleration(&fam.field(&g, 0.2, e), &fam.time_derivative(&g, 0.2, e))
        })
        .unwrap();
        let lhs = &eta_derivative(&a, 2, 1).unwrap() - &laplacian(a.field(2));
        let s = fluid_source(&fam.field(&g, 0.2, eta)).unwrap().slice(0..2);
        lhs.max_abs_diff(&s)
    };
    let data: Vec<(f64, f64)> = [0.02, 0.01, 0.005].iter().map(|&h| (h, err(h))).collect();
    let study = ConvergenceStudy::from_errors("acceleration", &data);
    assert!(study.min_order() >= 1.9, "{:?}", study.rows);
}

#[test]
fn frechet_identity_holds_to_second_order() {
    for kind in [FamilyKind::Multimode, FamilyKind::Burgers] {
        let s = frechet_study(kind, 3, 0.1, &defect_steps(0.005)).unwrap();
        assert!(s.finest().error <= 0.05, "{:?}", s.rows);
        assert!(s.min_order() >= 1.9, "{:?}", s.rows);
    }
}

#[test]
fn closure_bound_on_manufactured_and_burgers_residuals() {
    let r = manufactured_residual_stack(|e| e * (-2.0 * e).exp(), 0.005, 0.5, 33).unwrap();
    let b = BoundStudy::from_stack("manufactured", &r).unwrap();
    assert!(b.worst_ratio(1e-12) <= 1.10);
    // closed form lhs = 2η e^{−2η}; the centered difference errs by at most
    // step²/6 · max|∂³r| ≤ 2 step²
    let step = r.step();
    for row in &b.rows {
        let exact = 2.0 * row.eta * (-2.0 * row.eta).exp();
        assert!((row.lhs - exact).abs() <= 2.5 * step * step, "{row:?}");
    }
    let setup = BurgersSetup::new(1024, 64, 0.3).unwrap();
    let r = burgers_residual_stack(&setup, 1e-3, 0.05, 33).unwrap();
    let b = BoundStudy::from_stack("burgers", &r).unwrap();
    assert_eq!(b.rows.len(), 31);
    assert!(b.worst_ratio(1e-12) <= 1.10, "{:?}", b.rows);
}

#[test]
fn duhamel_reconstruction_and_deviation_bound() {
    for (name, fam) in duhamel_families(1).unwrap() {
        let d = duhamel_study(&name, &fam, 0.01, 0.3, &[9, 17, 33]).unwrap();
        assert!(d.convergence.min_order() >= 1.5, "{name}: {:?}", d.convergence.rows);
        assert!(d.worst_bound_ratio <= 1.05, "{name}: {}", d.worst_bound_ratio);
    }
}

#[test]
fn evolution_suite_passes() {
    let (report, studies) = evolution_suite(3).unwrap();
    assert!(report.passed, "{:?}", report.failures());
    assert_eq!(studies.len(), 2);
}

#[test]
fn run_simulation_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let config: RunConfig = serde_json::from_str(
        r#"{"eta": 0.05, "t_end": 0.1, "grid_size": 16,
            "psi": {"enabled": true, "initial": {"kind": "mode", "k": [1, 1], "amplitude": 0.2}},
            "output": {"every": 2}}"#,
    )
    .unwrap();
    let run = config.prepare().unwrap();
    let out = scalelab::config::run_simulation(&run, dir.path(), "cafe").unwrap();
    let text = std::fs::read_to_string(&out.csv_path).unwrap();
    assert!(text.starts_with("# config_hash=cafe\nt,energy,"));
    assert_eq!(text.lines().count(), 2 + out.records.len());
    let ck = read_checkpoint(&out.checkpoint_path).unwrap();
    assert_eq!(ck.field.ncomp(), 4);
    assert_eq!(ck.core, "fluid");
    assert!((ck.field.t() - 0.1).abs() < 1e-14);
    assert_eq!(ck.field.slice(0..2).values(), out.state.v.values());

    // restart from the checkpoint reproduces the velocity
    let restart: RunConfig = serde_json::from_value(serde_json::json!({
        "eta": 0.05, "t_end": 0.0, "grid_size": 16,
        "initial": {"kind": "checkpoint", "path": out.checkpoint_path},
    }))
    .unwrap();
    let r = restart.prepare().unwrap();
    assert!(r.initial.v.max_abs_diff(&out.state.v) < 1e-13);
}
