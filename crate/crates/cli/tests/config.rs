use uplink_cli::config::{Engine, Points, SweepAxis};
use uplink_cli::{load_config, parse_config, ConfigError, ExperimentConfig};
use uplink_core::{PhyConfig, RateMode, Scheme};

fn invalid_key(text: &str) -> String {
    match parse_config(text) {
        Err(ConfigError::Invalid { key, .. }) => key,
        other => panic!("expected a validation error, got {other:?}"),
    }
}

#[test]
fn empty_file_gives_defaults() {
    let config = parse_config("").unwrap();
    assert_eq!(config, ExperimentConfig::default());
    assert_eq!(config.traffic.device_rate, 1.0 / 600.0);
    assert_eq!(config.phy, PhyConfig::default());
    assert_eq!(config.phy.payload_bytes, 50);
    assert_eq!(config.phy.channel_count, 8);
    assert_eq!(config.phy.preamble_symbols, 12);
    assert_eq!(config.phy.coding_rate, 1);
    assert_eq!(config.traffic.sweep, SweepAxis::Devices);
    assert_eq!(config.traffic.rate_mode, RateMode::Total);
    assert_eq!(config.points().first(), Some(&250.0));
    assert_eq!(config.points().last(), Some(&4000.0));
    assert_eq!(config.points().len(), 16);
}

#[test]
fn duty_cycle_violation_names_the_key() {
    let err = parse_config("[traffic]\ndevice_rate = 1.0\n").unwrap_err();
    let text = err.to_string();
    assert!(matches!(err, ConfigError::Invalid { ref key, .. } if key == "traffic.device_rate"));
    assert!(text.contains("duty cycle"), "{text}");
    // just under the SF12 limit 0.01 / 2.12992 is accepted
    parse_config("[traffic]\ndevice_rate = 0.0046\n").unwrap();
    parse_config("[traffic]\ndevice_rate = 0.0047\n").unwrap_err();
}

#[test]
fn per_channel_rate_mode_scales_duty_cycle_check() {
    let text = "[traffic]\nrate_mode = \"per-channel\"\ndevice_rate = 0.001\n";
    assert_eq!(invalid_key(text), "traffic.device_rate");
}

#[test]
fn unknown_keys_are_rejected() {
    for text in ["foo = 1\n", "[phy]\nfoo = 1\n", "[traffic]\nfoo = 1\n", "[simulation]\nfoo = 1\n", "[output]\nfoo = 1\n"] {
        let err = parse_config(text).unwrap_err();
        assert!(matches!(err, ConfigError::Parse(ref m) if m.contains("foo")), "{text}: {err}");
    }
}

#[test]
fn parse_errors_carry_line_context() {
    let err = parse_config("schemes = [\"distance\"]\n\n[phy]\ncoding_rate = \"four\"\n").unwrap_err();
    let text = err.to_string();
    assert!(text.contains("line 4"), "{text}");
}

#[test]
fn validation_errors_name_the_key() {
    assert_eq!(invalid_key("[phy]\ncoding_rate = 7\n"), "phy.coding_rate");
    assert_eq!(invalid_key("[phy]\nchannel_count = 0\n"), "phy.channel_count");
    assert_eq!(invalid_key("[simulation]\nreplications = 0\n"), "simulation.replications");
    assert_eq!(invalid_key("[simulation]\nduration = -1.0\n"), "simulation.duration");
    assert_eq!(invalid_key("schemes = []\n"), "schemes");
    assert_eq!(invalid_key("[traffic]\ndevices = [10.5]\n"), "traffic.devices");
    assert_eq!(invalid_key("[traffic]\ndevices = { start = 10, stop = 20, step = 0 }\n"), "traffic.devices.step");
    assert_eq!(invalid_key("[traffic]\nsweep = \"rate\"\nrates = [-1.0]\n"), "traffic.rates");
}

#[test]
fn full_schema_round() {
    let text = r#"
schemes = ["uniform", "distance", "eqload"]
engine = "both"

[phy]
payload_bytes = 20
path_loss_exponent = 3.5
cell_radius = 900.0

[traffic]
sweep = "rate"
rates = [0.5, 1.0, 2.0]

[simulation]
duration = 500.0
replications = 3
seed = 99
fading = "none"
capture = "symbol-case"
trace = true

[output]
dir = "out/x"
summary = false
"#;
    let c = parse_config(text).unwrap();
    assert_eq!(c.schemes, vec![Scheme::Uniform, Scheme::Distance, Scheme::EqLoad]);
    assert_eq!(c.engine, Engine::Both);
    assert_eq!(c.phy.cell_radius, Some(900.0));
    assert_eq!(c.traffic.rates, Points::List(vec![0.5, 1.0, 2.0]));
    assert_eq!(c.points(), vec![0.5, 1.0, 2.0]);
    assert!(c.simulation.trace && !c.output.summary);
}

#[test]
fn committed_defaults_file_loads() {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/reference.toml");
    let c = load_config(&path).unwrap();
    assert_eq!(c.phy, PhyConfig::default());
    assert_eq!(c.traffic.device_rate, 1.0 / 600.0);
    assert_eq!(c.engine, Engine::Both);
    assert_eq!(c.schemes, vec![Scheme::Distance]);
    assert_eq!(c.points(), (1..=16).map(|i| 250.0 * f64::from(i)).collect::<Vec<_>>());
    assert_eq!(c.simulation.replications, 20);
    assert_eq!(c.simulation.duration, 1e4);
}

#[test]
fn missing_file_is_an_io_error() {
    assert!(matches!(load_config(std::path::Path::new("/nonexistent/x.toml")), Err(ConfigError::Io { .. })));
}
