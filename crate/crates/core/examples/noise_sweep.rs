//! A small Monte-Carlo comparison of both strategies over the reverberation
//! proxy, printed as CSV.

use avcal::experiment::{metrics_csv, sweep, ExperimentConfig, Strategy};
use avcal::sim::ScenarioConfig;

fn main() -> avcal::Result<()> {
    let cfg = ExperimentConfig {
        scenario: ScenarioConfig {
            num_stops: 60,
            ..ScenarioConfig::default()
        },
        strategies: vec![Strategy::Rbt, Strategy::RbtOracleScale, Strategy::Joint],
        t60_list: vec![0.0, 250.0, 500.0],
        trials: 3,
        seed: 9,
        ..ExperimentConfig::default()
    };
    print!("{}", metrics_csv(&sweep(&cfg)?));
    Ok(())
}
