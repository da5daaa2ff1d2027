use mmsched::netmodel::{evaluate_schedule, validate_schedule};
use mmsched::scenario::{generate, ScenarioConfig};
use mmsched::solve::{run, Algorithm, Guarantee, SolveOptions};
use mmsched::{DirectedNetwork, Error, ModelFlags, Role};

fn scenario(flags: &str, seed: u64) -> (DirectedNetwork, ModelFlags) {
    let cfg = ScenarioConfig {
        grid: 3,
        seed,
        flags: flags.parse().unwrap(),
        ..ScenarioConfig::default()
    };
    (generate(&cfg).unwrap(), cfg.flags)
}

#[test]
fn every_algorithm_runs_on_a_generated_network() {
    let (net, flags) = scenario("HD-NI-MAX", 3);
    let opts = SolveOptions::default();
    let exact = run::<f64>(Algorithm::OptHdUniform, &net, &flags, &opts).unwrap().theta;
    for algo in [Algorithm::Pds, Algorithm::F3wcFao, Algorithm::F3wcLslo] {
        let out = run::<f64>(algo, &net, &flags, &opts).unwrap();
        assert!(validate_schedule(&net, &out.schedule, &flags).is_empty());
        assert!(out.theta <= exact + 1e-9, "{algo} beats the optimum");
        let bound = exact / out.guarantee.unwrap().divisor();
        assert!(out.theta >= bound - 1e-9, "{algo}: {} < {bound}", out.theta);
    }
}

#[test]
fn ec_reports_its_factor() {
    let (net, flags) = scenario("FD-NI-MAX", 1);
    let out = run::<f64>(Algorithm::Ec, &net, &flags, &SolveOptions::default()).unwrap();
    let Some(Guarantee::EcFactor(f)) = out.guarantee else { panic!("missing factor") };
    assert!(out.theta > f * out.relaxed_theta.unwrap());
    assert!(out.kappa.unwrap() >= 1);
    let report = evaluate_schedule(&net, &out.schedule).unwrap();
    assert!((report.maxmin - out.theta).abs() < 1e-9);
}

#[test]
fn model_mismatches_are_reported() {
    let (net, flags) = scenario("FD-PI-MAX", 0);
    let opts = SolveOptions::default();
    for algo in [Algorithm::Ec, Algorithm::OptFd, Algorithm::Pds] {
        let err = run::<f64>(algo, &net, &flags, &opts).unwrap_err();
        assert!(matches!(err, Error::ModelMismatch { .. }), "{algo}: {err}");
    }
    let skewed = DirectedNetwork::from_parts(
        &[Role::Macro, Role::Relay, Role::Relay],
        &[2, 2, 1],
        &[(0, 1, &[4.0, 4.0]), (1, 2, &[3.0])],
    )
    .unwrap();
    let hd: ModelFlags = "HD-NI-MAX".parse().unwrap();
    let err = run::<f64>(Algorithm::OptHdUniform, &skewed, &hd, &opts).unwrap_err();
    assert!(matches!(err, Error::NotUniformOrthogonal(_)), "{err}");
}

#[test]
fn unreachable_relays_are_rejected() {
    let net = DirectedNetwork::from_parts(
        &[Role::Macro, Role::Relay, Role::Relay],
        &[1, 1, 1],
        &[(0, 1, &[2.0])],
    )
    .unwrap();
    assert_eq!(net.normalize_downlink().unwrap_err(), Error::UnreachableRelay(2));
}
