//! Versioned TOML experiment configuration.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use cremona_core::cremona::{MonomialMatrix, RationalMap};
use cremona_core::exactpoly::DEFAULT_DEGREE_CAP;
use cremona_core::families::{self, FamilyTag, Generator};
use cremona_core::parse::{parse_rational, parse_univariate};
use cremona_core::walk::{Atom, Backend, Measure, WalkConfig};
use num_rational::BigRational;
use serde::Deserialize;
use thiserror::Error;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Syntax(String),
    #[error("schema_version {0} is not supported (expected {SCHEMA_VERSION})")]
    Schema(u32),
    #[error("{field}: {message}")]
    Invalid { field: String, message: String },
}

fn invalid(field: impl Into<String>, message: impl ToString) -> ConfigError {
    ConfigError::Invalid {
        field: field.into(),
        message: message.to_string(),
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub generators: Vec<GeneratorDecl>,
    pub measure: MeasureDecl,
    pub walk: WalkDecl,
    #[serde(default)]
    pub outputs: OutputsDecl,
    #[serde(default)]
    pub thresholds: ThresholdsDecl,
}

/// One declaration may define several generators (a Hénon map and its
/// inverse, or the four letters of an arithmetic pair).
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum GeneratorDecl {
    Henon {
        name: String,
        p: String,
    },
    Jonquiere {
        name: String,
        #[serde(default = "one_str")]
        a: String,
        #[serde(default = "zero_str")]
        b: String,
        alpha: String,
        beta: String,
        gamma: String,
        delta: String,
    },
    Monomial {
        name: String,
        matrix: [[i64; 2]; 2],
        tag: FamilyTag,
    },
    Linear {
        name: String,
        matrix: [[String; 3]; 3],
    },
    Arithmetic {
        names: [String; 2],
        p1: String,
        p2: String,
    },
    Map {
        name: String,
        map: String,
        tag: FamilyTag,
        lambda: Option<String>,
        inverse: Option<String>,
    },
}

fn one_str() -> String {
    "1".into()
}

fn zero_str() -> String {
    "0".into()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureDecl {
    pub atoms: Vec<AtomDecl>,
    #[serde(default)]
    pub free_basis: bool,
    pub group_type: Option<FamilyTag>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomDecl {
    pub name: String,
    /// Exact rational such as `"1/2"` or `"0.7"`.
    pub weight: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WalkDecl {
    pub length: usize,
    pub checkpoints: Option<Vec<usize>>,
    pub trials: u64,
    pub seed: u64,
    #[serde(default)]
    pub backend: Backend,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputsDecl {
    pub csv: Option<PathBuf>,
    pub summary: Option<PathBuf>,
    pub histogram: Option<PathBuf>,
    #[serde(default = "default_bins")]
    pub histogram_bins: usize,
}

impl Default for OutputsDecl {
    fn default() -> Self {
        OutputsDecl {
            csv: None,
            summary: None,
            histogram: None,
            histogram_bins: default_bins(),
        }
    }
}

fn default_bins() -> usize {
    40
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdsDecl {
    #[serde(default = "default_ks")]
    pub ks: f64,
    #[serde(default = "default_cap")]
    pub degree_cap: u32,
}

impl Default for ThresholdsDecl {
    fn default() -> Self {
        ThresholdsDecl {
            ks: default_ks(),
            degree_cap: default_cap(),
        }
    }
}

fn default_ks() -> f64 {
    0.05
}

fn default_cap() -> u32 {
    DEFAULT_DEGREE_CAP
}

/// Command-line replacements for configuration values.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub trials: Option<u64>,
    pub length: Option<usize>,
    pub backend: Option<Backend>,
    /// Directory receiving `walk.csv`, `summary.txt` and `histogram.csv`.
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct Outputs {
    pub csv: Option<PathBuf>,
    pub summary: Option<PathBuf>,
    pub histogram: Option<PathBuf>,
    pub histogram_bins: usize,
}

/// A validated, fully built experiment.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub walk: WalkConfig,
    pub outputs: Outputs,
    pub ks_threshold: f64,
}

impl ExperimentConfig {
    pub fn from_toml(src: &str) -> Result<Self, ConfigError> {
        let cfg: ExperimentConfig =
            toml::from_str(src).map_err(|e| ConfigError::Syntax(e.to_string()))?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(ConfigError::Schema(cfg.schema_version));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let src = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&src)
    }

    pub fn generators(&self) -> Result<BTreeMap<String, Generator>, ConfigError> {
        let mut out = BTreeMap::new();
        for (i, decl) in self.generators.iter().enumerate() {
            let field = format!("generators[{i}]");
            for g in build_generator(decl, &field)? {
                if out.contains_key(&g.name) {
                    return Err(invalid(
                        field,
                        format!("duplicate generator name '{}'", g.name),
                    ));
                }
                out.insert(g.name.clone(), g);
            }
        }
        Ok(out)
    }

    pub fn measure(&self) -> Result<Measure, ConfigError> {
        let gens = self.generators()?;
        let mut atoms = Vec::with_capacity(self.measure.atoms.len());
        for (i, a) in self.measure.atoms.iter().enumerate() {
            let field = format!("measure.atoms[{i}]");
            let generator = gens.get(&a.name).cloned().ok_or_else(|| {
                invalid(
                    format!("{field}.name"),
                    format!("unknown generator '{}'", a.name),
                )
            })?;
            let weight =
                parse_rational(&a.weight).map_err(|e| invalid(format!("{field}.weight"), e))?;
            atoms.push(Atom { generator, weight });
        }
        Measure::new(atoms, self.measure.free_basis, self.measure.group_type)
            .map_err(|e| invalid("measure", e))
    }

    pub fn build(&self, overrides: &Overrides) -> Result<Experiment, ConfigError> {
        let measure = self.measure()?;
        let length = overrides.length.unwrap_or(self.walk.length);
        let checkpoints = match (&self.walk.checkpoints, overrides.length) {
            (Some(cps), None) => cps.clone(),
            (Some(cps), Some(n)) => {
                let mut kept: Vec<usize> = cps.iter().copied().filter(|&c| c < n).collect();
                kept.push(n);
                kept
            }
            (None, _) => vec![length],
        };
        let mut walk = WalkConfig::new(
            measure,
            length,
            overrides.trials.unwrap_or(self.walk.trials),
            overrides.seed.unwrap_or(self.walk.seed),
            overrides.backend.unwrap_or(self.walk.backend),
        );
        walk.checkpoints = checkpoints;
        walk.degree_cap = self.thresholds.degree_cap;
        walk.validate()
            .map_err(|e| invalid("walk.checkpoints", e))?;
        if !(self.thresholds.ks > 0.0 && self.thresholds.ks <= 1.0) {
            return Err(invalid("thresholds.ks", "must lie in (0, 1]"));
        }
        let outputs = match &overrides.out {
            Some(dir) => Outputs {
                csv: Some(dir.join("walk.csv")),
                summary: Some(dir.join("summary.txt")),
                histogram: Some(dir.join("histogram.csv")),
                histogram_bins: self.outputs.histogram_bins,
            },
            None => Outputs {
                csv: self.outputs.csv.clone(),
                summary: self.outputs.summary.clone(),
                histogram: self.outputs.histogram.clone(),
                histogram_bins: self.outputs.histogram_bins,
            },
        };
        if outputs.histogram_bins == 0 {
            return Err(invalid("outputs.histogram_bins", "must be positive"));
        }
        Ok(Experiment {
            walk,
            outputs,
            ks_threshold: self.thresholds.ks,
        })
    }
}

fn rational(field: &str, key: &str, src: &str) -> Result<BigRational, ConfigError> {
    parse_rational(src).map_err(|e| invalid(format!("{field}.{key}"), e))
}

fn build_generator(decl: &GeneratorDecl, field: &str) -> Result<Vec<Generator>, ConfigError> {
    let poly = |key: &str, src: &str| {
        parse_univariate(src).map_err(|e| invalid(format!("{field}.{key}"), e))
    };
    let fam = |e: families::FamilyError| invalid(field, e);
    Ok(match decl {
        GeneratorDecl::Henon { name, p } => {
            let (h, hi) = families::henon(name, &poly("p", p)?).map_err(fam)?;
            vec![h, hi]
        }
        GeneratorDecl::Jonquiere {
            name,
            a,
            b,
            alpha,
            beta,
            gamma,
            delta,
        } => {
            let c = [
                poly("alpha", alpha)?,
                poly("beta", beta)?,
                poly("gamma", gamma)?,
                poly("delta", delta)?,
            ];
            let g = families::jonquiere(
                name,
                &rational(field, "a", a)?,
                &rational(field, "b", b)?,
                [&c[0], &c[1], &c[2], &c[3]],
            )
            .map_err(fam)?;
            vec![g]
        }
        GeneratorDecl::Monomial { name, matrix, tag } => {
            vec![families::monomial(name, &MonomialMatrix::from_i64(*matrix), *tag).map_err(fam)?]
        }
        GeneratorDecl::Linear { name, matrix } => {
            let mut a: [[BigRational; 3]; 3] = Default::default();
            for (i, row) in matrix.iter().enumerate() {
                for (j, s) in row.iter().enumerate() {
                    a[i][j] = rational(field, &format!("matrix[{i}][{j}]"), s)?;
                }
            }
            vec![families::linear(name, &a).map_err(fam)?]
        }
        GeneratorDecl::Arithmetic { names, p1, p2 } => {
            let pair = families::arithmetic_pair(
                [names[0].as_str(), names[1].as_str()],
                &poly("p1", p1)?,
                &poly("p2", p2)?,
            )
            .map_err(fam)?;
            pair.to_vec()
        }
        GeneratorDecl::Map {
            name,
            map,
            tag,
            lambda,
            inverse,
        } => {
            let m = RationalMap::parse(map).map_err(|e| invalid(format!("{field}.map"), e))?;
            let mut g = Generator::new(name.clone(), m, *tag);
            if let Some(l) = lambda {
                g.lambda = Some(rational(field, "lambda", l)?);
            }
            g.inverse = inverse.clone();
            vec![g]
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const HENON: &str = r#"
schema_version = 1

[[generators]]
family = "henon"
name = "h"
p = "x^2"

[measure]
atoms = [{ name = "h", weight = "1/2" }, { name = "h^-1", weight = "1/2" }]
free_basis = true

[walk]
length = 100
checkpoints = [10, 100]
trials = 20
seed = 7
backend = "fast"
"#;

    #[test]
    fn parses_and_builds() {
        let cfg = ExperimentConfig::from_toml(HENON).unwrap();
        let e = cfg.build(&Overrides::default()).unwrap();
        assert_eq!(e.walk.length, 100);
        assert_eq!(e.walk.checkpoints, vec![10, 100]);
        assert_eq!(e.walk.measure.len(), 2);
        assert_eq!(e.ks_threshold, 0.05);
        assert!(e.outputs.csv.is_none());
    }

    #[test]
    fn overrides_apply() {
        let cfg = ExperimentConfig::from_toml(HENON).unwrap();
        let o = Overrides {
            seed: Some(1),
            trials: Some(3),
            length: Some(50),
            backend: Some(Backend::Symbolic),
            out: Some(PathBuf::from("res")),
        };
        let e = cfg.build(&o).unwrap();
        assert_eq!(e.walk.checkpoints, vec![10, 50]);
        assert_eq!((e.walk.seed, e.walk.trials), (1, 3));
        assert_eq!(e.walk.backend, Backend::Symbolic);
        assert_eq!(e.outputs.summary, Some(PathBuf::from("res/summary.txt")));
    }

    #[test]
    fn errors_name_the_field() {
        let bad = HENON.replace("seed = 7", "seed = 7\nsed = 3");
        let err = ExperimentConfig::from_toml(&bad).unwrap_err().to_string();
        assert!(err.contains("sed"), "{err}");

        let bad = HENON.replace("p = \"x^2\"", "p = \"x^\"");
        let err = ExperimentConfig::from_toml(&bad)
            .unwrap()
            .build(&Overrides::default())
            .unwrap_err()
            .to_string();
        assert!(err.starts_with("generators[0].p"), "{err}");

        let bad = HENON.replace("name = \"h^-1\"", "name = \"g\"");
        let err = ExperimentConfig::from_toml(&bad)
            .unwrap()
            .build(&Overrides::default())
            .unwrap_err()
            .to_string();
        assert!(err.contains("measure.atoms[1].name"), "{err}");

        let bad = HENON.replace("weight = \"1/2\" }]", "weight = \"1/3\" }]");
        let err = ExperimentConfig::from_toml(&bad)
            .unwrap()
            .build(&Overrides::default())
            .unwrap_err()
            .to_string();
        assert!(err.starts_with("measure"), "{err}");

        let bad = HENON.replace("schema_version = 1", "schema_version = 2");
        assert!(matches!(
            ExperimentConfig::from_toml(&bad),
            Err(ConfigError::Schema(2))
        ));

        let bad = HENON.replace("family = \"henon\"", "family = \"henon\"\nq = \"x\"");
        let err = ExperimentConfig::from_toml(&bad).unwrap_err().to_string();
        assert!(err.contains('q'), "{err}");
    }

    #[test]
    fn every_family_builds() {
        let src = r#"
schema_version = 1

[[generators]]
family = "jonquiere"
name = "j"
alpha = "x"
beta = "1"
gamma = "1"
delta = "x^2"

[[generators]]
family = "monomial"
name = "m"
matrix = [[1, 1], [1, 0]]
tag = "lineal"

[[generators]]
family = "linear"
name = "l"
matrix = [["1", "2", "0"], ["0", "1", "0"], ["0", "0", "1/3"]]

[[generators]]
family = "arithmetic"
names = ["F", "G"]
p1 = "x^2"
p2 = "x^2 + x"

[[generators]]
family = "map"
name = "s"
map = "[Y : X : Z]"
tag = "elliptic"

[measure]
atoms = [{ name = "F", weight = "1/2" }, { name = "G", weight = "1/2" }]

[walk]
length = 5
trials = 1
seed = 0
"#;
        let cfg = ExperimentConfig::from_toml(src).unwrap();
        let gens = cfg.generators().unwrap();
        let names: Vec<&str> = gens.keys().map(String::as_str).collect();
        assert_eq!(names, ["F", "F^-1", "G", "G^-1", "j", "l", "m", "s"]);
        assert_eq!(
            cfg.build(&Overrides::default()).unwrap().walk.backend,
            Backend::Auto
        );
    }
}
