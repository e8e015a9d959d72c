use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn default_pocket_size() -> f64 {
    12.0
}
fn default_edge_prob() -> f64 {
    0.6
}
fn default_zipf() -> f64 {
    1.0
}
fn default_visibility() -> f64 {
    0.5
}

/// Generator settings, normally read from TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorConfig {
    pub nodes: usize,
    /// Target mean degree; total edges = `nodes * mean_degree / 2`.
    pub mean_degree: f64,
    /// Mean pocket size (Poisson), used by types without their own.
    #[serde(default = "default_pocket_size")]
    pub pocket_size: f64,
    /// Within-pocket edge probability, used by types without their own.
    #[serde(default = "default_edge_prob")]
    pub edge_prob: f64,
    #[serde(default)]
    pub seed: u64,
    pub types: Vec<TypeConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TypeConfig {
    pub name: String,
    /// Vocabulary size.
    pub labels: usize,
    /// Zipf exponent of label popularity.
    #[serde(default = "default_zipf")]
    pub zipf: f64,
    /// Share of the total edge budget whose reason is this type.
    pub edge_fraction: f64,
    /// Probability that a node's label of this type is observed.
    #[serde(default = "default_visibility")]
    pub visibility: f64,
    /// Pocket members get near-equal ages (school cohorts).
    #[serde(default)]
    pub school: bool,
    pub pocket_size: Option<f64>,
    pub edge_prob: Option<f64>,
    /// Earlier type this one is correlated with: with probability
    /// `follow_prob` a node takes the label tied to its label of `follows`.
    pub follows: Option<String>,
    #[serde(default)]
    pub follow_prob: f64,
}

impl TypeConfig {
    pub fn new(name: &str, labels: usize, edge_fraction: f64) -> Self {
        TypeConfig {
            name: name.to_string(),
            labels,
            zipf: default_zipf(),
            edge_fraction,
            visibility: default_visibility(),
            school: false,
            pocket_size: None,
            edge_prob: None,
            follows: None,
            follow_prob: 0.0,
        }
    }
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        let mut types = vec![
            TypeConfig::new("hometown", 200, 0.3),
            TypeConfig::new("current_city", 150, 0.25),
            TypeConfig::new("high_school", 400, 0.2),
            TypeConfig::new("college", 300, 0.15),
            TypeConfig::new("employer", 600, 0.1),
        ];
        types[2].school = true;
        types[3].school = true;
        GeneratorConfig {
            nodes: 2000,
            mean_degree: 12.0,
            pocket_size: default_pocket_size(),
            edge_prob: default_edge_prob(),
            seed: 0,
            types,
        }
    }
}

impl GeneratorConfig {
    pub fn from_toml_str(s: &str) -> std::result::Result<Self, String> {
        let cfg: GeneratorConfig = toml::from_str(s).map_err(|e| e.to_string())?;
        cfg.validate().map_err(|e| e.to_string())?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|msg| Error::Config {
            path: path.to_path_buf(),
            msg,
        })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn pocket_size_of(&self, t: usize) -> f64 {
        self.types[t].pocket_size.unwrap_or(self.pocket_size)
    }

    pub fn edge_prob_of(&self, t: usize) -> f64 {
        self.types[t].edge_prob.unwrap_or(self.edge_prob)
    }

    pub fn total_edges(&self) -> usize {
        (self.nodes as f64 * self.mean_degree / 2.0).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParam(m));
        if self.nodes == 0 {
            return bad("nodes must be positive".into());
        }
        if !(self.mean_degree > 0.0 && self.mean_degree.is_finite()) {
            return bad(format!("mean_degree must be positive, got {}", self.mean_degree));
        }
        if self.types.is_empty() {
            return bad("at least one label type is required".into());
        }
        let mut seen = HashSet::new();
        let mut fraction_sum = 0.0;
        for (i, t) in self.types.iter().enumerate() {
            if !seen.insert(t.name.as_str()) {
                return bad(format!("duplicate type {:?}", t.name));
            }
            if t.name.is_empty() || t.name.contains(['\t', '\n']) {
                return bad(format!("invalid type name {:?}", t.name));
            }
            if t.labels == 0 {
                return bad(format!("{}: labels must be positive", t.name));
            }
            if !(t.zipf >= 0.0 && t.zipf.is_finite()) {
                return bad(format!("{}: zipf exponent must be >= 0", t.name));
            }
            if !(0.0..=1.0).contains(&t.edge_fraction) {
                return bad(format!("{}: edge_fraction must be in [0, 1]", t.name));
            }
            if !(0.0..=1.0).contains(&t.visibility) {
                return bad(format!("{}: visibility must be in [0, 1]", t.name));
            }
            let ps = self.pocket_size_of(i);
            if !(ps >= 2.0 && ps.is_finite()) {
                return bad(format!("{}: pocket size must be >= 2, got {ps}", t.name));
            }
            let p = self.edge_prob_of(i);
            if !(p > 0.0 && p <= 1.0) {
                return bad(format!("{}: edge probability must be in (0, 1], got {p}", t.name));
            }
            if !(0.0..=1.0).contains(&t.follow_prob) {
                return bad(format!("{}: follow_prob must be in [0, 1]", t.name));
            }
            if let Some(anchor) = &t.follows {
                if !self.types[..i].iter().any(|o| &o.name == anchor) {
                    return bad(format!("{}: follows {anchor:?}, which is not an earlier type", t.name));
                }
            }
            fraction_sum += t.edge_fraction;
        }
        if (fraction_sum - 1.0).abs() > 1e-9 {
            return bad(format!("edge fractions must sum to 1, got {fraction_sum}"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_valid_and_round_trips_through_toml() {
        let cfg = GeneratorConfig::default();
        cfg.validate().unwrap();
        let back = GeneratorConfig::from_toml_str(&cfg.to_toml_string()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn parses_minimal_toml() {
        let cfg = GeneratorConfig::from_toml_str(
            r#"
            nodes = 100
            mean_degree = 4
            [[types]]
            name = "college"
            labels = 10
            edge_fraction = 1.0
            "#,
        )
        .unwrap();
        assert_eq!(cfg.pocket_size, 12.0);
        assert_eq!(cfg.types[0].visibility, 0.5);
    }

    #[test]
    fn rejects_bad_configs() {
        let mut cfg = GeneratorConfig::default();
        cfg.types[0].edge_fraction = 0.5;
        assert!(cfg.validate().is_err());

        let mut cfg = GeneratorConfig::default();
        cfg.types[1].follows = Some("employer".into());
        assert!(cfg.validate().is_err());

        let cfg = GeneratorConfig {
            pocket_size: 1.0,
            ..GeneratorConfig::default()
        };
        assert!(cfg.validate().is_err());

        assert!(GeneratorConfig::from_toml_str("nodes = 1\nmean_degree = 1\ntypes = []\nbogus = 3").is_err());
    }
}
