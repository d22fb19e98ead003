//! Drives the CSV and JSON writers from an inline TOML configuration, as
//! the `bai` subcommands do from a file.

use bayes_bai::experiment::{ebi_probe, regret_curve, ExperimentConfig};

const CONFIG: &str = r#"
policies = ["uniform", "successive-rejects", "bayes-optimal"]
horizons = [6, 30]
reps = 2000
seed = 42
instance = [0.0, 0.2, 0.5]

[[states]]
label = "near tie"
means = [0.1, 0.0]
counts = [1, 1]
budget = 3
"#;

fn main() -> bayes_bai::Result<()> {
    let cfg = ExperimentConfig::from_toml_str(CONFIG)?;
    print!("{}", regret_curve(&cfg)?);
    println!("{}", ebi_probe(&cfg)?);
    Ok(())
}
