use std::path::Path;

use cfmm_privacy_core::scenario::ScenarioConfig;

use crate::{HarnessError, Result};

/// Parses and validates a TOML scenario.
///
/// ```toml
/// schema_version = 1
/// trials = 100
/// master_seed = 7
///
/// [pool]
/// reserves = [1000.0, 2500.0]
/// fee = 0.997
/// spec = { family = "constant_product" }
///
/// [mitigation]
/// kind = "noise"
/// sigma = 0.01
/// ```
pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    let config: ScenarioConfig = toml::from_str(text)?;
    config.validate()?;
    Ok(config)
}

pub fn load_config(path: &Path) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    parse_config(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use cfmm_privacy_core::scenario::Mitigation;

    const BASE: &str = r#"
schema_version = 1
trials = 3
master_seed = 11

[pool]
reserves = [4.0, 9.0]
spec = { family = "constant_product" }
"#;

    #[test]
    fn minimal_config() {
        let cfg = parse_config(BASE).unwrap();
        assert_eq!(cfg.trials, 3);
        assert_eq!(cfg.pool.fee(), 1.0);
        assert_eq!(cfg.mitigation, Mitigation::None);
        assert_eq!(cfg.eve.probe_size, 1.0);
    }

    #[test]
    fn mitigations_and_weights() {
        let text = r#"
schema_version = 1
trials = 1
master_seed = 0

[pool]
reserves = [10.0, 20.0]
fee = 0.997
spec = { family = "constant_mean", weights = [0.8, 0.2] }

[eve]
query_budget = 5000

[mitigation]
kind = "noise"
sigma = 0.1
"#;
        let cfg = parse_config(text).unwrap();
        assert_eq!(cfg.mitigation, Mitigation::Noise { sigma: 0.1 });
        assert_eq!(cfg.eve.query_budget, Some(5000));
        let batch = BASE.to_string() + "\n[mitigation]\nkind = \"batch\"\ndecoy_count = 4\n";
        let cfg = parse_config(&batch).unwrap();
        assert!(matches!(cfg.mitigation, Mitigation::Batch(b) if b.decoy_count == 4 && b.max_fraction == 0.5));
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(parse_config(&BASE.replace("schema_version = 1", "schema_version = 2")).is_err());
        assert!(parse_config(&BASE.replace("trials = 3", "trials = 0")).is_err());
        assert!(parse_config(&BASE.replace("trials = 3", "trials = 3\nsurprise = true")).is_err());
        assert!(parse_config(&(BASE.to_string() + "liquidity = 5\n")).is_err());
        assert!(parse_config(&BASE.replace("[4.0, 9.0]", "[4.0, -9.0]")).is_err());
    }
}
