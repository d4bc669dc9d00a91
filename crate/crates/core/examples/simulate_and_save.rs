//! Simulates one noisy recording session, writes the scenario and the
//! observations as text and reads them back.

use avcal::calib::Mode;
use avcal::sim::{
    corrupt_acoustic, corrupt_visual, generate_scenario, parse_observations, parse_scenario, true_doas,
    write_observations, write_scenario, AcousticNoiseModel, ScenarioConfig, VisualHmmModel,
};

fn main() -> avcal::Result<()> {
    let scenario = generate_scenario(&ScenarioConfig::default(), 2024)?;
    let visual = VisualHmmModel::default();
    let clean = true_doas(&scenario, visual.fov_half_angle_deg);
    let acoustic = corrupt_acoustic(&clean, &AcousticNoiseModel::default().with_t60(300.0), 1)?;
    let obs = corrupt_visual(&acoustic.observations, &scenario, &visual, 2)?;
    println!(
        "{} stops, {} acoustic readings ({} outliers), {} visual readings",
        scenario.trajectory.len(),
        obs.count_observed(Mode::Relative),
        acoustic.outliers.len(),
        obs.count_observed(Mode::Joint) - obs.count_observed(Mode::Relative)
    );

    let dir = tempfile::tempdir()?;
    let scenario_path = dir.path().join("scenario.txt");
    let obs_path = dir.path().join("observations.txt");
    std::fs::write(&scenario_path, write_scenario(&scenario))?;
    std::fs::write(&obs_path, write_observations(&obs))?;

    let text = std::fs::read_to_string(&obs_path)?;
    for line in text.lines().take(8) {
        println!("  {line}");
    }
    let back = parse_observations(&text)?;
    let back_scenario = parse_scenario(&std::fs::read_to_string(&scenario_path)?)?;
    println!(
        "read back {} readings and {} stops",
        back.count_observed(Mode::Joint),
        back_scenario.trajectory.len()
    );
    Ok(())
}
