use std::path::PathBuf;

use bandit_core::harness::figures::{self, Fig2Params, Fig3Params, Fig4Params, Overrides};
use bandit_core::harness::{
    decomposition_check, replay_k_armed, run_episode, to_csv, to_json, to_svg, write_all, EnvSpec,
    Environment, ExperimentConfig, ExperimentResult, PolicySpec,
};
use bandit_core::mab::FixedArm;
use bandit_core::rng::{RngStream, StreamRole};
use bandit_core::{run_experiment, ArmModel, BanditError, KArmedEnv};
use proptest::prelude::*;

fn configs_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn small(o: Overrides) -> Overrides {
    Overrides {
        replications: Some(o.replications.unwrap_or(4)),
        horizon: Some(o.horizon.unwrap_or(300)),
        ..o
    }
}

fn fig2_small(jobs: usize) -> ExperimentConfig {
    let o = small(Overrides {
        seed: Some(7),
        jobs: Some(jobs),
        ..Default::default()
    });
    figures::fig2(
        &o,
        &Fig2Params {
            etc_m: 30,
            ..Default::default()
        },
    )
}

fn assert_curves_monotone(result: &ExperimentResult) {
    for p in &result.policies {
        assert!(p.mean_regret[0] >= 0.0, "{}", p.name);
        for w in p.mean_regret.windows(2) {
            assert!(w[1] >= w[0], "{} not monotone", p.name);
        }
    }
}

#[test]
fn shipped_configs_parse() {
    let mut n = 0;
    for entry in std::fs::read_dir(configs_dir()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            ExperimentConfig::from_file(&path)
                .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            n += 1;
        }
    }
    assert!(n >= 4);
}

#[test]
fn fig2_toml_matches_builtin() {
    let from_file = ExperimentConfig::from_file(&configs_dir().join("fig2.toml")).unwrap();
    let builtin = figures::fig2(&Overrides::default(), &Fig2Params::default());
    assert_eq!(from_file, builtin);
}

#[test]
fn jobs_do_not_change_output() {
    let a = run_experiment(&fig2_small(1)).unwrap();
    let b = run_experiment(&fig2_small(3)).unwrap();
    assert_eq!(to_csv(&a).unwrap(), to_csv(&b).unwrap());
    assert_eq!(to_json(&a).unwrap(), to_json(&b).unwrap());
    assert_eq!(to_svg(&a).unwrap(), to_svg(&b).unwrap());
}

#[test]
fn single_replication_equals_run_episode() {
    let mut cfg = fig2_small(1);
    cfg.experiment.replications = 1;
    let result = run_experiment(&cfg).unwrap();
    let env = cfg.environment.instantiate(7, 0).unwrap();
    for (idx, spec) in cfg.policies.iter().enumerate() {
        let mut p = spec.build(&env, cfg.experiment.horizon).unwrap();
        let mut e = RngStream::substream(7, 0, StreamRole::Environment);
        let mut r = RngStream::substream(7, 0, StreamRole::Custom(idx as u16));
        let curve = run_episode(&env, &mut p, cfg.experiment.horizon, &mut e, &mut r).unwrap();
        assert_eq!(curve.cumulative, result.policies[idx].mean_regret);
        assert!(result.policies[idx].stderr.iter().all(|&s| s == 0.0));
    }
}

#[test]
fn decomposition_and_sweep_hold_on_every_episode() {
    let mut cfg = fig2_small(1);
    cfg.experiment.record_actions = true;
    let result = run_experiment(&cfg).unwrap();
    let EnvSpec::KArmed { arms } = &cfg.environment else {
        unreachable!()
    };
    let env = KArmedEnv::new(arms.clone()).unwrap();
    assert_curves_monotone(&result);
    for (spec, p) in cfg.policies.iter().zip(&result.policies) {
        assert_eq!(p.decomposition_ok, Some(true));
        for (actions, &fin) in p.actions.as_ref().unwrap().iter().zip(&p.final_regret) {
            let replay = replay_k_armed(&env, actions).unwrap();
            assert!((replay.last().unwrap() - fin).abs() < 1e-9);
            if spec.needs_sweep() {
                let mut first: Vec<usize> = actions[..3].to_vec();
                first.sort();
                assert_eq!(first, vec![0, 1, 2], "{}", spec.name());
            }
        }
    }
}

#[test]
fn etc_slope_is_constant_after_exploration() {
    let env = KArmedEnv::gaussian(&[0.5, 0.6, 0.8], 1.0).unwrap();
    let wrapped = Environment::KArmed(env.clone());
    let spec = PolicySpec::Etc { m: 20 };
    for rep in 0..10 {
        let mut p = spec.build(&wrapped, 400).unwrap();
        let mut e = RngStream::substream(1, rep, StreamRole::Environment);
        let mut r = RngStream::substream(1, rep, StreamRole::Policy);
        let c = run_episode(&wrapped, &mut p, 400, &mut e, &mut r).unwrap();
        let committed = c.actions[60];
        assert!(c.actions[60..].iter().all(|&a| a == committed));
        let slope = env.gap(committed).unwrap();
        for w in c.cumulative[60..].windows(2) {
            assert!((w[1] - w[0] - slope).abs() < 1e-12);
        }
    }
}

#[test]
fn single_arm_regret_is_zero() {
    let env = Environment::KArmed(KArmedEnv::gaussian(&[0.3], 1.0).unwrap());
    let mut p = bandit_core::harness::Policy::Arm(Box::new(FixedArm::new(1, 0).unwrap()));
    let mut e = RngStream::new(0);
    let mut r = RngStream::new(1);
    let c = run_episode(&env, &mut p, 50, &mut e, &mut r).unwrap();
    assert!(c.cumulative.iter().all(|&v| v == 0.0));
}

#[test]
fn linear_and_gp_curves_are_monotone() {
    let o = small(Overrides {
        replications: Some(3),
        ..Default::default()
    });
    let f3 = run_experiment(&figures::fig3(
        &o,
        &Fig3Params {
            disjoint_alpha: Some(1.0),
            ..Default::default()
        },
    ))
    .unwrap();
    assert_curves_monotone(&f3);
    let o4 = Overrides {
        replications: Some(3),
        horizon: Some(15),
        ..Default::default()
    };
    let f4 = run_experiment(&figures::fig4(
        &o4,
        &Fig4Params {
            grid: 50,
            ..Default::default()
        },
    ))
    .unwrap();
    assert_curves_monotone(&f4);
    assert!(f4.policies.iter().all(|p| p.decomposition_ok.is_none()));
}

#[test]
fn csv_shape_and_reexport() {
    let result = run_experiment(&fig2_small(1)).unwrap();
    let csv = to_csv(&result).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "round,policy,mean_regret,stderr");
    assert_eq!(lines.len(), 300 * 5 + 1);
    assert!(lines[1].starts_with("1,etc,"));
    assert!(lines.last().unwrap().starts_with("300,mots,"));

    let dir = tempfile::tempdir().unwrap();
    let first = write_all(&result, dir.path(), "a").unwrap();
    let second = write_all(&result, dir.path(), "b").unwrap();
    for (a, b) in first.iter().zip(&second) {
        assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
    }
    let svg = std::fs::read_to_string(&first[2]).unwrap();
    assert!(svg.contains(">round<") && svg.contains(">cumulative regret<"));
    assert_eq!(svg.matches("<polyline").count(), 5);
}

#[test]
fn export_errors() {
    let mut result = run_experiment(&fig2_small(1)).unwrap();
    let file = tempfile::NamedTempFile::new().unwrap();
    // A regular file cannot be used as the output directory.
    let err = write_all(&result, &file.path().join("sub"), "x").unwrap_err();
    assert!(matches!(err, BanditError::Io { .. }));
    result.policies.clear();
    assert!(to_csv(&result).is_err());
    assert!(to_svg(&result).is_err());
    assert!(to_json(&result).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn random_envs_satisfy_identities(
        means in prop::collection::vec(-1.0f64..1.0, 2..6),
        seed in any::<u64>(),
        horizon in 10u64..200,
    ) {
        let k = means.len();
        let cfg = ExperimentConfig {
            experiment: bandit_core::harness::ExperimentSection {
                name: "prop".into(),
                horizon,
                replications: 2,
                seed,
                jobs: 1,
                record_actions: true,
            },
            environment: EnvSpec::KArmed {
                arms: means.iter().map(|&mean| ArmModel::Gaussian { mean, sd: 1.0 }).collect(),
            },
            policies: vec![
                PolicySpec::Etc { m: (horizon / (2 * k as u64)).max(1) },
                PolicySpec::Ucb { delta: None },
                PolicySpec::Moss,
                PolicySpec::TsGaussian,
                PolicySpec::Mots { rho: 0.8, alpha: 1.5 },
            ],
        };
        let result = run_experiment(&cfg).unwrap();
        let env = KArmedEnv::new(match &cfg.environment { EnvSpec::KArmed { arms } => arms.clone(), _ => unreachable!() }).unwrap();
        for p in &result.policies {
            prop_assert_eq!(p.decomposition_ok, Some(true));
            for w in p.mean_regret.windows(2) {
                prop_assert!(w[1] >= w[0]);
            }
            for actions in p.actions.as_ref().unwrap() {
                let curve = bandit_core::RegretCurve {
                    cumulative: replay_k_armed(&env, actions).unwrap(),
                    pulls: Some((0..k).map(|a| actions.iter().filter(|&&x| x == a).count() as u64).collect()),
                    actions: actions.clone(),
                };
                prop_assert!(decomposition_check(&curve, &env).unwrap());
            }
        }
    }
}
