use poro_core::edema::*;
use poro_core::Error;

fn coarse() -> EdemaConfig {
    EdemaConfig {
        geometry: EdemaGeometry::Annulus(AnnulusSpec {
            n_radial: 6,
            n_angular: 32,
            ..AnnulusSpec::default()
        }),
        lesion: LesionRegion::Disc {
            center: [41.0, 0.0],
            radius: 8.0,
        },
        dt: 10.0,
        final_time: 60.0,
        ..EdemaConfig::default()
    }
}

#[test]
fn matched_pressures_give_uniform_equilibrium() {
    let mut c = coarse();
    c.p_sas = 1100.0;
    let r = run_normal_brain(&c).unwrap();
    for &p in &r.terminal.p {
        assert!((p - 1100.0).abs() <= 1e-6, "{p}");
    }
    assert!((r.tissue_wall_mean_pressure - 1100.0).abs() <= 1e-6);
}

#[test]
fn normal_brain_pressure_lies_between_boundary_values() {
    let r = run_normal_brain(&coarse()).unwrap();
    let (lo, hi) = r.pressure_range;
    assert!(lo >= 1070.0 - 1e-6 && hi <= 1100.0 + 1e-6, "{lo} {hi}");
    assert_eq!(r.times, vec![0.0]);
}

#[test]
fn stronger_absorption_pulls_wall_pressure_down() {
    let c = coarse();
    let mut d = c.clone();
    d.conductance *= 2.0;
    let a = run_normal_brain(&c).unwrap().tissue_wall_mean_pressure;
    let b = run_normal_brain(&d).unwrap().tissue_wall_mean_pressure;
    assert!(b < a && b > c.p_sas, "{a} {b}");
}

#[test]
fn injury_without_source_stays_at_equilibrium() {
    let mut c = coarse();
    c.source = 0.0;
    let rest = run_normal_brain(&c).unwrap();
    let r = run_injury(&c).unwrap();
    assert_eq!(r.times.len(), 7);
    for (a, b) in r.terminal.p.iter().zip(&rest.terminal.p) {
        assert!((a - b).abs() <= 1e-6 * b.abs(), "{a} {b}");
    }
    for (a, b) in r.terminal.u.iter().zip(&rest.terminal.u) {
        assert!((a - b).abs() <= 1e-9, "{a} {b}");
    }
}

#[test]
fn injury_raises_pressure_and_displacement() {
    let r = run_injury(&coarse()).unwrap();
    assert!(r.p_max.iter().all(|v| v.is_finite()) && r.u_max.iter().all(|v| v.is_finite()));
    assert!(r.p_max.windows(2).all(|w| w[1] >= w[0]));
    assert!(r.u_max.windows(2).all(|w| w[1] >= w[0]));
    assert!(r.p_max[6] > r.p_max[0] + 100.0);
    assert!(r.plateau_time <= 60.0);
}

#[test]
fn hydrostatic_balance_leaves_tissue_at_rest() {
    // default mesh, matched pressures, traction -p_SAS n
    let mut c = EdemaConfig::default();
    c.ventricle_pressure = c.p_sas;
    let r = run_normal_brain(&c).unwrap();
    assert!(r.u_max[0] < 1e-3, "{}", r.u_max[0]);
}

#[test]
fn coupled_traction_matches_constant_when_wall_pressure_is_prescribed() {
    let c = coarse();
    let mut d = c.clone();
    d.traction = VentricleTraction::Coupled;
    let a = run_normal_brain(&c).unwrap();
    let b = run_normal_brain(&d).unwrap();
    let scale = a.terminal.u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for (x, y) in a.terminal.u.iter().zip(&b.terminal.u) {
        assert!((x - y).abs() <= 1e-8 * scale);
    }
}

#[test]
fn repeated_runs_are_bit_identical() {
    let a = run_injury(&coarse()).unwrap();
    let b = run_injury(&coarse()).unwrap();
    assert_eq!(a.p_max, b.p_max);
    assert_eq!(a.u_max, b.u_max);
}

#[test]
fn incompressible_poisson_ratio_rejected() {
    let mut c = coarse();
    c.poisson = 0.5;
    assert!(matches!(run_normal_brain(&c), Err(Error::PoissonRatio(_))));
    assert!(parameter_sweep(&coarse(), SweepParameter::Poisson, &[0.3, 0.6]).is_err());
}

#[test]
fn sweep_rows_recompute_lame_constants() {
    let mut c = coarse();
    c.final_time = 20.0;
    let rows = parameter_sweep(&c, SweepParameter::Young, &[0.5, 1.0]).unwrap();
    assert_eq!(rows.len(), 2);
    assert!((rows[0].mu * 2.0 - rows[1].mu).abs() < 1e-9);
    assert!((rows[0].inv_lambda - 2.0 * rows[1].inv_lambda).abs() < 1e-15);
    assert!(rows[0].u_max > rows[1].u_max);
}
