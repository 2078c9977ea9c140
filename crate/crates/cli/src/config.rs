//! The experiment config grammar, strict key auditing, and conversion
//! into core types.
//!
//! Parsing is two-pass. The raw TOML tree is audited against the closed
//! key set first, so a misspelled or extra key fails with its full path
//! even inside `kind`-tagged tables that serde's `deny_unknown_fields`
//! cannot police. Only then is the tree deserialized and validated.
//!
//! Grammar sketch (see `configs/` for complete files). Scalar keys come
//! first; TOML attaches anything after a table header to that table.
//!
//! ```toml
//! n_grid = [1, 2, 4]
//! eps_grid = [0.5, 0.25]
//! sample_n = 2048            # alias: N
//! seed = 7                   # required unless enumerate = true
//! estimator = "greedy"       # exact
//!
//! [system]
//! kind = "cyclic_rotation"   # torus_rotation | bernoulli_shift |
//! q = 257                    # substitution_shift | product
//! step = 1
//!
//! [semimetric]
//! kind = "cut"               # arc | hamming_word | weighted_sum
//! [semimetric.labeling]
//! kind = "torus_intervals"   # word_prefix
//! breaks = [0.5]
//! ```

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use scalent_core::{cut_semimetric, weighted_sum_semimetric, Estimator, Labeling, Semimetric, SystemSpec};

/// Distance declaration, one `kind` table per node. Mirrors the core
/// semimetric constructors; orbit-averaging kinds are not part of the
/// grammar because the runner applies averaging itself.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SemimetricSpec {
    Arc,
    Cut { labeling: LabelingSpec },
    HammingWord,
    WeightedSum { components: Vec<WeightedComponentSpec> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LabelingSpec {
    TorusIntervals { breaks: Vec<f64> },
    WordPrefix { len: usize },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeightedComponentSpec {
    pub weight: f64,
    pub semimetric: SemimetricSpec,
}

impl SemimetricSpec {
    pub fn build(&self) -> Result<Semimetric> {
        match self {
            SemimetricSpec::Arc => Ok(Semimetric::Arc),
            SemimetricSpec::HammingWord => Ok(Semimetric::HammingWord),
            SemimetricSpec::Cut { labeling } => Ok(cut_semimetric(labeling.build())?),
            SemimetricSpec::WeightedSum { components } => {
                let mut parts = Vec::with_capacity(components.len());
                for c in components {
                    parts.push((c.weight, c.semimetric.build()?));
                }
                Ok(weighted_sum_semimetric(parts)?)
            }
        }
    }
}

impl LabelingSpec {
    fn build(&self) -> Labeling {
        match self {
            LabelingSpec::TorusIntervals { breaks } => Labeling::TorusIntervals {
                breaks: breaks.clone(),
            },
            LabelingSpec::WordPrefix { len } => Labeling::WordPrefix { len: *len },
        }
    }
}

/// Output file names, resolved relative to the output directory.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputPaths {
    pub csv: Option<String>,
    pub json: Option<String>,
    pub stability: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub system: SystemSpec,
    pub semimetric: SemimetricSpec,
    pub n_grid: Vec<usize>,
    pub eps_grid: Vec<f64>,
    #[serde(alias = "N")]
    pub sample_n: usize,
    pub seed: Option<u64>,
    pub estimator: Estimator,
    #[serde(default)]
    pub enumerate: bool,
    pub oracle_limit: Option<usize>,
    #[serde(alias = "C_max")]
    pub c_max: Option<f64>,
    pub ratio_cap: Option<f64>,
    #[serde(default)]
    pub output: OutputPaths,
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    parse_config(&text).with_context(|| format!("config {}", path.display()))
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let tree: toml::Value = text.parse().context("parsing TOML")?;
    audit_root(&tree)?;
    let config: ExperimentConfig = tree.try_into().context("reading fields")?;
    config.validate()?;
    Ok(config)
}

impl ExperimentConfig {
    /// Structural checks beyond types, reported with field paths.
    fn validate(&self) -> Result<()> {
        if self.n_grid.is_empty() {
            bail!("n_grid: must be nonempty");
        }
        for (i, &n) in self.n_grid.iter().enumerate() {
            if n == 0 {
                bail!("n_grid[{i}]: depths start at 1");
            }
            if i > 0 && self.n_grid[i - 1] >= n {
                bail!(
                    "n_grid[{i}]: must be strictly increasing, got {} after {}",
                    n,
                    self.n_grid[i - 1]
                );
            }
        }
        if self.eps_grid.is_empty() {
            bail!("eps_grid: must be nonempty");
        }
        for (i, &e) in self.eps_grid.iter().enumerate() {
            if !(e.is_finite() && e > 0.0) {
                bail!("eps_grid[{i}]: must be finite and positive, got {e}");
            }
            if i > 0 && self.eps_grid[i - 1] <= e {
                bail!(
                    "eps_grid[{i}]: must be strictly decreasing, got {} after {}",
                    e,
                    self.eps_grid[i - 1]
                );
            }
        }
        if self.sample_n == 0 {
            bail!("sample_n: must be at least 1");
        }
        if self.seed.is_none() && !self.enumerate {
            bail!("seed: required whenever sampling (set enumerate = true to drop it)");
        }
        if let Some(limit) = self.oracle_limit {
            if limit == 0 {
                bail!("oracle_limit: must be at least 1");
            }
        }
        if let Some(c) = self.c_max {
            if !(c.is_finite() && c >= 1.0) {
                bail!("c_max: must be finite and at least 1, got {c}");
            }
        }
        if let Some(r) = self.ratio_cap {
            if !(r.is_finite() && r > 1.0) {
                bail!("ratio_cap: must be finite and above 1, got {r}");
            }
        }
        self.system
            .validate()
            .map_err(|e| anyhow::anyhow!("system: {e}"))?;
        self.semimetric
            .build()
            .map_err(|e| anyhow::anyhow!("semimetric: {e}"))?;
        Ok(())
    }

}

fn audit_root(tree: &toml::Value) -> Result<()> {
    let table = expect_table(tree, "config")?;
    check_keys(
        "config",
        table,
        &[
            "system",
            "semimetric",
            "n_grid",
            "eps_grid",
            "sample_n",
            "N",
            "seed",
            "estimator",
            "enumerate",
            "oracle_limit",
            "c_max",
            "C_max",
            "ratio_cap",
            "output",
        ],
    )?;
    if let Some(v) = table.get("system") {
        audit_system("system", v)?;
    }
    if let Some(v) = table.get("semimetric") {
        audit_semimetric("semimetric", v)?;
    }
    if let Some(v) = table.get("output") {
        let t = expect_table(v, "output")?;
        check_keys("output", t, &["csv", "json", "stability"])?;
    }
    Ok(())
}

fn audit_system(path: &str, v: &toml::Value) -> Result<()> {
    let table = expect_table(v, path)?;
    // An absent or mistyped tag falls through to serde, which names the
    // admissible kinds; the audit only polices keys of known kinds.
    let Some(kind) = table.get("kind").and_then(|k| k.as_str()) else {
        return Ok(());
    };
    match kind {
        "cyclic_rotation" => check_keys(path, table, &["kind", "q", "step"]),
        "torus_rotation" => check_keys(path, table, &["kind", "alpha"]),
        "bernoulli_shift" => check_keys(
            path,
            table,
            &["kind", "alphabet", "probs", "word_len", "cyclic"],
        ),
        "substitution_shift" => check_keys(path, table, &["kind", "rules", "word_len"]),
        "product" => {
            check_keys(path, table, &["kind", "components"])?;
            if let Some(toml::Value::Array(cs)) = table.get("components") {
                for (i, c) in cs.iter().enumerate() {
                    audit_system(&format!("{path}.components[{i}]"), c)?;
                }
            }
            Ok(())
        }
        _ => Ok(()),
    }
}

fn audit_semimetric(path: &str, v: &toml::Value) -> Result<()> {
    let table = expect_table(v, path)?;
    let Some(kind) = table.get("kind").and_then(|k| k.as_str()) else {
        return Ok(());
    };
    match kind {
        "arc" | "hamming_word" => check_keys(path, table, &["kind"]),
        "cut" => {
            check_keys(path, table, &["kind", "labeling"])?;
            if let Some(l) = table.get("labeling") {
                audit_labeling(&format!("{path}.labeling"), l)?;
            }
            Ok(())
        }
        "weighted_sum" => {
            check_keys(path, table, &["kind", "components"])?;
            if let Some(toml::Value::Array(cs)) = table.get("components") {
                for (i, c) in cs.iter().enumerate() {
                    let cpath = format!("{path}.components[{i}]");
                    let ct = expect_table(c, &cpath)?;
                    check_keys(&cpath, ct, &["weight", "semimetric"])?;
                    if let Some(s) = ct.get("semimetric") {
                        audit_semimetric(&format!("{cpath}.semimetric"), s)?;
                    }
                }
            }
            Ok(())
        }
        _ => Ok(()),
    }
}

fn audit_labeling(path: &str, v: &toml::Value) -> Result<()> {
    let table = expect_table(v, path)?;
    let Some(kind) = table.get("kind").and_then(|k| k.as_str()) else {
        return Ok(());
    };
    match kind {
        "torus_intervals" => check_keys(path, table, &["kind", "breaks"]),
        "word_prefix" => check_keys(path, table, &["kind", "len"]),
        _ => Ok(()),
    }
}

fn expect_table<'a>(v: &'a toml::Value, path: &str) -> Result<&'a toml::value::Table> {
    v.as_table()
        .with_context(|| format!("{path}: expected a table"))
}

fn check_keys(path: &str, table: &toml::value::Table, allowed: &[&str]) -> Result<()> {
    for key in table.keys() {
        if !allowed.contains(&key.as_str()) {
            bail!(
                "{path}.{key}: unknown key (allowed: {})",
                allowed.join(", ")
            );
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
        n_grid = [1, 2]
        eps_grid = [0.5, 0.25]
        sample_n = 5
        estimator = "exact"
        enumerate = true

        [system]
        kind = "cyclic_rotation"
        q = 5
        step = 1

        [semimetric]
        kind = "arc"
    "#;

    #[test]
    fn minimal_config_parses() {
        let cfg = parse_config(MINIMAL).unwrap();
        assert_eq!(cfg.estimator, Estimator::Exact);
        assert!(cfg.enumerate);
        assert_eq!(cfg.seed, None);
    }

    #[test]
    fn unknown_root_key_names_path() {
        let text = format!("n_gird = [1]\n{MINIMAL}");
        let err = parse_config(&text).unwrap_err().to_string();
        assert!(err.contains("config.n_gird"), "{err}");
    }

    #[test]
    fn unknown_key_inside_tagged_table_names_path() {
        let text = MINIMAL.replace("step = 1", "step = 1\nstep2 = 9");
        let err = parse_config(&text).unwrap_err().to_string();
        assert!(err.contains("system.step2"), "{err}");
    }

    #[test]
    fn missing_seed_for_sampling_rejected() {
        let text = MINIMAL.replace("enumerate = true", "enumerate = false");
        let err = parse_config(&text).unwrap_err().to_string();
        assert!(err.contains("seed"), "{err}");
    }

    #[test]
    fn nested_weighted_sum_parses_and_builds() {
        let text = r#"
            n_grid = [1, 2, 4]
            eps_grid = [0.5, 0.25]
            sample_n = 32
            estimator = "exact"
            enumerate = true

            [system]
            kind = "product"
            [[system.components]]
            kind = "cyclic_rotation"
            q = 4
            step = 1
            [[system.components]]
            kind = "bernoulli_shift"
            alphabet = 2
            probs = [0.5, 0.5]
            word_len = 3
            cyclic = true

            [semimetric]
            kind = "weighted_sum"
            [[semimetric.components]]
            weight = 0.5
            [semimetric.components.semimetric]
            kind = "arc"
            [[semimetric.components]]
            weight = 0.25
            [semimetric.components.semimetric]
            kind = "cut"
            [semimetric.components.semimetric.labeling]
            kind = "word_prefix"
            len = 1
        "#;
        let cfg = parse_config(text).unwrap();
        let rho = cfg.semimetric.build().unwrap();
        assert_eq!(rho.kind(), "weighted-sum");
        assert!((rho.bound() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn misordered_grids_name_the_index() {
        let text = MINIMAL.replace("n_grid = [1, 2]", "n_grid = [2, 2]");
        let err = parse_config(&text).unwrap_err().to_string();
        assert!(err.contains("n_grid[1]"), "{err}");
        let text = MINIMAL.replace("eps_grid = [0.5, 0.25]", "eps_grid = [0.25, 0.5]");
        let err = parse_config(&text).unwrap_err().to_string();
        assert!(err.contains("eps_grid[1]"), "{err}");
    }
}
