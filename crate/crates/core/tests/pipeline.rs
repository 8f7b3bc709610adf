use bolab::fit::{fit, FitOptions};
use bolab::flow::{evolve, FlowConfig};
use bolab::io::read_snapshot;
use bolab::lax::assemble;
use bolab::multisoliton::profile;
use bolab::{Grid, NormSpec, SolitonConfig};

fn grid() -> Grid {
    Grid::new(128.0, 1024).unwrap()
}

#[test]
fn exported_snapshots_reload_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = SolitonConfig::single(-0.5, -10.0).unwrap();
    let flow = FlowConfig { t_end: 0.5, monitor_stride: 250, kappa_monitor: None, ..FlowConfig::default() };
    let traj = evolve(&profile(&cfg, &grid(), 0.0), &flow).unwrap();
    let files = traj.export(dir.path()).unwrap();
    assert_eq!(files.len(), 4);
    let (last, t) = read_snapshot(&dir.path().join("u_00002.bof")).unwrap();
    assert_eq!(t, 0.5);
    assert_eq!(&last, traj.final_state());
    let monitors = std::fs::read_to_string(dir.path().join("monitors.csv")).unwrap();
    assert_eq!(monitors.lines().next(), Some("t,E0,E1,beta"));
    assert_eq!(monitors.lines().count(), 4);
}

#[test]
fn fitted_center_follows_the_soliton() {
    let cfg = SolitonConfig::single(-0.75, -5.0).unwrap();
    let flow = FlowConfig { t_end: 2.0, monitor_stride: 2000, kappa_monitor: None, ..FlowConfig::default() };
    let traj = evolve(&profile(&cfg, &grid(), 0.0), &flow).unwrap();
    let r = fit(traj.final_state(), cfg.lambdas(), NormSpec::H_MINUS_QUARTER, FitOptions::default()).unwrap();
    assert!(r.converged);
    // Speed 2|λ| = 1.5 over t = 2.
    assert!((r.centers[0] - (-2.0)).abs() < 1e-3, "{:?}", r.centers);
}

#[test]
fn evolved_state_has_the_same_lax_spectrum() {
    let cfg = SolitonConfig::new(vec![-1.0, -0.5], vec![-12.0, 12.0]).unwrap();
    let g = Grid::new(256.0, 2048).unwrap();
    let flow = FlowConfig { t_end: 1.0, monitor_stride: 1000, kappa_monitor: None, ..FlowConfig::default() };
    let traj = evolve(&profile(&cfg, &g, 0.0), &flow).unwrap();
    let before = assemble(&traj.snapshots[0], 512).unwrap();
    let after = assemble(traj.final_state(), 512).unwrap();
    let e0 = before.eigensolve().unwrap().negative_eigenvalues(-0.05);
    let e1 = after.eigensolve().unwrap().negative_eigenvalues(-0.05);
    assert_eq!(e0.len(), 2);
    // On this coarse grid the eigenvalues sit ~2e-4 from their exact values;
    // the flow must move them far less than that.
    for (a, b) in e0.iter().zip(&e1) {
        assert!((a - b).abs() < 1e-5, "{a} vs {b}");
    }
    let (b0, b1) = (before.beta(3.0).unwrap(), after.beta(3.0).unwrap());
    assert!((b0 - b1).abs() < 1e-6 * b0, "{b0} vs {b1}");
}
