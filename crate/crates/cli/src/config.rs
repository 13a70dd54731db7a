use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

pub const DEFAULT_CAP: u64 = hyperfree_core::covering::DEFAULT_CAP;

/// One experiment run, read from TOML. `kind` selects the variant; the
/// remaining keys are that kind's parameters, all optional.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(flatten)]
    pub experiment: Experiment,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default = "default_cap")]
    pub cap: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

fn default_cap() -> u64 {
    DEFAULT_CAP
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Experiment {
    FreeSetSpectrum(FreeSetParams),
    PrMinColors(PrMinColorsParams),
    Z4VsOracle(Z4Params),
    RefinementFrontier(FrontierParams),
    F2aPipeline(F2aParams),
    ModularModelAudit(AuditParams),
}

pub const KINDS: [(&str, &str); 6] = [
    ("free-set-spectrum", "largest free set of seeded random set mappings"),
    ("pr-min-colors", "least palette admitting a Pr coloring, with witness"),
    ("z4-vs-oracle", "palette demand of the stratified construction against min_colors"),
    ("refinement-frontier", "least support budget of seeded monotone patterns"),
    ("f2a-pipeline", "possibility, budgeted refinements and derived set mapping of the modular family"),
    ("modular-model-audit", "m-freeness and complete witness tuples of the modular model"),
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FreeSetParams {
    pub grounds: Vec<usize>,
    pub arity: usize,
    pub bounds: Vec<usize>,
    pub samples: usize,
}

impl Default for FreeSetParams {
    fn default() -> Self {
        FreeSetParams {
            grounds: vec![5, 6, 7],
            arity: 2,
            bounds: vec![1, 2],
            samples: 3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PrMinColorsParams {
    pub n: usize,
    pub k: usize,
    pub grounds: Vec<usize>,
    pub thetas: Vec<usize>,
}

impl Default for PrMinColorsParams {
    fn default() -> Self {
        PrMinColorsParams {
            n: 3,
            k: 2,
            grounds: vec![3, 4, 5],
            thetas: vec![3, 4],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Z4Params {
    pub k: usize,
    pub grounds: Vec<usize>,
    pub theta: usize,
    pub mu: usize,
    /// Points with a larger ground skip the min_colors comparison.
    pub oracle_max_ground: usize,
}

impl Default for Z4Params {
    fn default() -> Self {
        Z4Params {
            k: 2,
            grounds: vec![4, 5, 6],
            theta: 3,
            mu: 64,
            oracle_max_ground: 6,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FrontierParams {
    pub lambdas: Vec<usize>,
    /// `[A, mu]` pairs.
    pub shapes: Vec<[usize; 2]>,
    pub samples: usize,
}

impl Default for FrontierParams {
    fn default() -> Self {
        FrontierParams {
            lambdas: vec![2, 3],
            shapes: vec![[2, 2], [3, 2]],
            samples: 3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct F2aParams {
    pub q: usize,
    pub n: usize,
    pub k: usize,
    pub budget: usize,
    pub mu: usize,
}

impl Default for F2aParams {
    fn default() -> Self {
        F2aParams {
            q: 3,
            n: 3,
            k: 2,
            budget: 1,
            mu: 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AuditParams {
    pub qs: Vec<usize>,
    pub ns: Vec<usize>,
}

impl Default for AuditParams {
    fn default() -> Self {
        AuditParams {
            qs: vec![4],
            ns: vec![3],
        }
    }
}

impl Experiment {
    pub fn kind(&self) -> &'static str {
        match self {
            Experiment::FreeSetSpectrum(_) => "free-set-spectrum",
            Experiment::PrMinColors(_) => "pr-min-colors",
            Experiment::Z4VsOracle(_) => "z4-vs-oracle",
            Experiment::RefinementFrontier(_) => "refinement-frontier",
            Experiment::F2aPipeline(_) => "f2a-pipeline",
            Experiment::ModularModelAudit(_) => "modular-model-audit",
        }
    }

    pub fn randomized(&self) -> bool {
        matches!(
            self,
            Experiment::FreeSetSpectrum(_) | Experiment::RefinementFrontier(_)
        )
    }

    /// Default parameters for `kind`.
    pub fn default_for(kind: &str) -> Result<Self> {
        Ok(match kind {
            "free-set-spectrum" => Experiment::FreeSetSpectrum(Default::default()),
            "pr-min-colors" => Experiment::PrMinColors(Default::default()),
            "z4-vs-oracle" => Experiment::Z4VsOracle(Default::default()),
            "refinement-frontier" => Experiment::RefinementFrontier(Default::default()),
            "f2a-pipeline" => Experiment::F2aPipeline(Default::default()),
            "modular-model-audit" => Experiment::ModularModelAudit(Default::default()),
            other => bail!("unknown experiment kind {other:?}"),
        })
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).context("parsing experiment config")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml(&text)
    }

    /// Default parameters for `kind`, with a fixed seed for randomized kinds.
    pub fn defaults(kind: &str) -> Result<Self> {
        let experiment = Experiment::default_for(kind)?;
        let seed = experiment.randomized().then_some(1);
        Ok(ExperimentConfig {
            experiment,
            seed,
            cap: DEFAULT_CAP,
            out: None,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.cap == 0 {
            bail!("cap must be positive");
        }
        if self.experiment.randomized() && self.seed.is_none() {
            bail!("{} is randomized and needs a seed", self.experiment.kind());
        }
        match &self.experiment {
            Experiment::FreeSetSpectrum(p) => {
                if p.arity == 0 || p.samples == 0 {
                    bail!("arity and samples must be positive");
                }
                if p.grounds.iter().any(|&l| l > 12) {
                    bail!("grounds above 12 are out of desk scale");
                }
            }
            Experiment::PrMinColors(p) => {
                if p.k < 2 || p.n <= p.k {
                    bail!("need n > k >= 2");
                }
            }
            Experiment::Z4VsOracle(p) => {
                if p.k < 2 || p.mu == 0 {
                    bail!("need k >= 2 and a nonempty palette");
                }
            }
            Experiment::RefinementFrontier(p) => {
                if p.samples == 0 || p.lambdas.iter().any(|&l| l == 0 || l > 6) {
                    bail!("lambdas must lie in 1..=6 and samples must be positive");
                }
                if p.shapes.iter().any(|&[a, mu]| mu < 1 || (mu as f64).powi(a as i32) > 4096.0) {
                    bail!("algebra shapes must have between 1 and 4096 atoms");
                }
            }
            Experiment::F2aPipeline(p) => {
                if p.mu < 2 {
                    bail!("mu must be at least 2");
                }
                if p.n != p.k + 1 {
                    bail!("the modular family needs n = k + 1");
                }
            }
            Experiment::ModularModelAudit(p) => {
                if p.ns.iter().any(|&n| n < 3) {
                    bail!("n must be at least 3");
                }
            }
        }
        Ok(())
    }
}
