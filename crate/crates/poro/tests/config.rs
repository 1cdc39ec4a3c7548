use poro::config::{format_config, parse_config, Command, ConfigError, ProblemName, RunConfig, SolverKind};
use poro_core::edema::{LesionRegion, SweepParameter};
use poro_core::verification::TimeStepRule;
use proptest::prelude::*;

fn ov(pairs: &[(&'static str, &str)]) -> Vec<(&'static str, String)> {
    pairs.iter().map(|(k, v)| (*k, v.to_string())).collect()
}

#[test]
fn empty_file_gets_documented_defaults() {
    let cfg = parse_config("", &ov(&[("command", "convergence"), ("problem", "example1")])).unwrap();
    assert_eq!(cfg.command, Command::Convergence);
    assert_eq!(cfg.theta, 1);
    assert_eq!(cfg.dt, TimeStepRule::HSquared);
    assert_eq!(cfg.mesh_sizes(), vec![0.5, 0.25, 0.125, 0.0625]);
    let echo = format_config(&cfg);
    assert!(echo.contains("h_max = 1/2\n"));
    assert!(echo.contains("dt = h^2\n"));
    assert!(echo.contains("theta = 1\n"));
}

#[test]
fn example3_defaults_follow_its_study() {
    let cfg = parse_config("command = convergence\nproblem = example3\n", &[]).unwrap();
    assert_eq!(cfg.dt, TimeStepRule::Fraction(5));
    assert_eq!(cfg.mesh_sizes(), vec![1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0, 1.0 / 128.0]);
}

#[test]
fn theta_outside_zero_one_names_valid_set_and_line() {
    let e = parse_config("command = run\nproblem = example1\n\ntheta = 2\n", &[]).unwrap_err();
    assert_eq!(e.line(), Some(4));
    let msg = e.to_string();
    assert!(msg.contains("{0, 1}") && msg.contains("line 4"), "{msg}");
}

#[test]
fn unknown_key_names_line() {
    let e = parse_config("# study\ncommand = run\nproblem = example1\nthetta = 1\n", &[]).unwrap_err();
    assert!(matches!(&e, ConfigError::UnknownKey { key, .. } if key == "thetta"));
    assert_eq!(e.line(), Some(4));
}

#[test]
fn type_mismatch_names_line() {
    let e = parse_config("command = convergence\nproblem = example1\nlevels = four\n", &[]).unwrap_err();
    assert!(matches!(e, ConfigError::Type { .. }));
    assert_eq!(e.line(), Some(3));
    let e = parse_config("command = sweep\nsweep.values = 1, x\n", &[]).unwrap_err();
    assert_eq!(e.line(), Some(2));
}

#[test]
fn missing_keys_reported() {
    let e = parse_config("theta = 0\n", &[]).unwrap_err();
    assert!(matches!(&e, ConfigError::Missing { key, .. } if key == "command"));
    let e = parse_config("\ncommand = run\n", &[]).unwrap_err();
    assert!(matches!(&e, ConfigError::Missing { key, .. } if key == "problem"));
    assert!(e.to_string().contains("line 2"), "{e}");
}

#[test]
fn syntax_and_duplicates_rejected() {
    let e = parse_config("command run\n", &[]).unwrap_err();
    assert_eq!(e.line(), Some(1));
    let e = parse_config("command = run\nproblem = example1\ncommand = edema\n", &[]).unwrap_err();
    assert!(matches!(e, ConfigError::Duplicate { .. }));
    assert_eq!(e.line(), Some(3));
}

#[test]
fn overrides_replace_file_values() {
    let cfg = parse_config("command = convergence\nproblem = example1\ntheta = 1\n", &ov(&[("theta", "0")])).unwrap();
    assert_eq!(cfg.theta, 0);
}

#[test]
fn command_and_problem_must_fit() {
    let e = parse_config("command = edema\nproblem = example1\n", &[]).unwrap_err();
    assert_eq!(e.line(), Some(2));
    assert!(parse_config("command = sweep\nsweep.param = nu\nsweep.values = 0.3, 0.5\n", &[]).is_err());
    assert!(parse_config("command = edema\nedema.poisson = 0.5\n", &[]).is_err());
}

#[test]
fn comments_and_blank_lines_ignored() {
    let text = "# header\n\ncommand = edema   # trailing\nedema.lesion = disc 30 5 2.5\nedema.traction = coupled\n";
    let cfg = parse_config(text, &[]).unwrap();
    assert_eq!(cfg.problem, ProblemName::Edema);
    assert_eq!(
        cfg.edema.lesion,
        LesionRegion::Disc {
            center: [30.0, 5.0],
            radius: 2.5
        }
    );
}

fn round_trip(cfg: &RunConfig) -> RunConfig {
    parse_config(&format_config(cfg), &[]).unwrap()
}

#[test]
fn normalized_echo_round_trips_for_every_command() {
    for (c, p) in [
        ("convergence", "example2"),
        ("run", "exactness"),
        ("edema", "edema"),
        ("sweep", "edema"),
    ] {
        let cfg = parse_config(&format!("command = {c}\nproblem = {p}\n"), &[]).unwrap();
        let back = round_trip(&cfg);
        assert_eq!(back, cfg);
        assert_eq!(format_config(&back), format_config(&cfg));
    }
}

proptest! {
    #[test]
    fn parse_emit_parse_is_identity(
        theta in 0u8..2,
        k in 0u32..6,
        levels in 1usize..7,
        dt in prop_oneof![Just(TimeStepRule::HSquared), (1usize..50).prop_map(TimeStepRule::Fraction), (1e-6f64..1.0).prop_map(TimeStepRule::Fixed)],
        gmres in any::<bool>(),
        tol in 1e-14f64..1e-3,
        young in 1.0f64..1e5,
        poisson in 0.0f64..0.49,
        source in 0.0f64..1.0,
        radius in 0.1f64..30.0,
        values in prop::collection::vec(0.01f64..100.0, 1..5),
        param in prop_oneof![Just(SweepParameter::Young), Just(SweepParameter::Permeability)],
        seed in any::<u64>(),
    ) {
        let mut cfg = RunConfig::defaults(Command::Convergence, ProblemName::Example1);
        cfg.theta = theta;
        cfg.h_max = 1.0 / (1u64 << k) as f64;
        cfg.levels = levels;
        cfg.h = 0.3 + tol;
        cfg.dt = dt;
        cfg.solver = if gmres { SolverKind::Gmres } else { SolverKind::Direct };
        cfg.tol = tol;
        cfg.seed = seed;
        cfg.edema.young = young;
        cfg.edema.poisson = poisson;
        cfg.edema.source = source;
        cfg.edema.lesion = LesionRegion::Disc { center: [41.0, -radius], radius };
        cfg.sweep_param = param;
        cfg.sweep_values = values;
        let text = format_config(&cfg);
        let back = parse_config(&text, &[]).unwrap();
        prop_assert_eq!(&back, &cfg);
        prop_assert_eq!(format_config(&back), text);
    }
}
