use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use hitstat::estimators::EstimationPlan;
use hitstat::source::{MarkovSpec, MpMode, MpParams, ShiftMode, SourceSpec};
use hitstat::symbolic::Pattern;
use hitstat::thermo::default_q_grid;

use crate::CliError;

/// One experiment: a source, a seed, and a parameter block per command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    pub source: SourceConfig,
    #[serde(default)]
    pub generate: GenerateConfig,
    #[serde(default)]
    pub spectrum: SpectrumConfig,
    #[serde(default)]
    pub fluctuations: FluctuationConfig,
    #[serde(default)]
    pub mp: MpConfig,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("hitstat-out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum SourceConfig {
    Markov {
        #[serde(default)]
        order: usize,
        /// One row of next-symbol probabilities per context.
        rows: Vec<Vec<f64>>,
        #[serde(default = "default_shift_mode")]
        mode: ShiftMode,
    },
    Mp {
        alpha: f64,
        #[serde(default)]
        mode: MpMode,
        #[serde(default = "default_burn_in")]
        burn_in: u64,
    },
}

fn default_shift_mode() -> ShiftMode {
    ShiftMode::Full
}

fn default_burn_in() -> u64 {
    1000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenerateConfig {
    pub length: u64,
    pub file: String,
}

impl Default for GenerateConfig {
    fn default() -> Self {
        GenerateConfig {
            length: 1_000_000,
            file: "stream.txt".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumConfig {
    pub n_grid: Vec<usize>,
    pub q_grid: Vec<f64>,
    pub samples: usize,
    pub budget: u64,
    /// Also estimate both return-time spectra.
    pub returns: bool,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        SpectrumConfig {
            n_grid: vec![8, 12, 16],
            q_grid: default_q_grid(),
            samples: 20_000,
            budget: 1_000_000,
            returns: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FluctuationConfig {
    pub n_grid: Vec<usize>,
    pub samples: usize,
    pub budget: u64,
    pub epsilon: f64,
    /// Pattern of the Kac check and the exponential-law fit.
    pub pattern: String,
    pub kac_returns: usize,
    pub fit_samples: usize,
    pub fit_budget: u64,
    pub lil_n_min: usize,
    pub lil_n_max: usize,
    pub lil_budget: u64,
    pub ks_max: f64,
    pub variance_tolerance: f64,
    pub violation_max: f64,
    pub kac_tolerance: f64,
}

impl Default for FluctuationConfig {
    fn default() -> Self {
        FluctuationConfig {
            n_grid: vec![40],
            samples: 1000,
            budget: 1 << 31,
            epsilon: 3.0,
            pattern: "01".into(),
            kac_returns: 100_000,
            fit_samples: 10_000,
            fit_budget: 1_000_000,
            lil_n_min: 10,
            lil_n_max: 200,
            lil_budget: 1 << 32,
            ks_max: 0.08,
            variance_tolerance: 0.25,
            violation_max: 0.05,
            kac_tolerance: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MpConfig {
    pub q: Vec<f64>,
    pub base: u64,
    pub doublings: u32,
    pub tail_budget: u64,
    pub growth_min: f64,
    pub stable_change_max: f64,
}

impl Default for MpConfig {
    fn default() -> Self {
        MpConfig {
            q: vec![2.5, 1.0],
            base: 1 << 24,
            doublings: 4,
            tail_budget: 10_000_000,
            growth_min: 1.2,
            stable_change_max: 0.05,
        }
    }
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| bad(format!("cannot read {}: {e}", path.display())))?;
        let config: RunConfig = toml::from_str(&text).map_err(|e| bad(format!("{}: {e}", path.display())))?;
        config.validate()?;
        Ok(config)
    }

    /// Every check that can fail before any sampling starts.
    pub fn validate(&self) -> Result<(), CliError> {
        self.source_spec()?;
        let s = &self.spectrum;
        self.spectrum_plan()?;
        if s.q_grid.is_empty() {
            return Err(bad("spectrum.q_grid must not be empty"));
        }
        let f = &self.fluctuations;
        if matches!(self.source, SourceConfig::Markov { .. }) {
            self.plan(&f.n_grid, f.samples, f.budget)?;
            Pattern::from_digits(&f.pattern).map_err(|e| bad(e.to_string()))?;
            if f.epsilon.is_nan() || f.epsilon <= 1.0 {
                return Err(bad(format!("epsilon = {} must exceed 1", f.epsilon)));
            }
            if f.fit_samples < 1000 {
                return Err(bad("fit_samples must be at least 1000"));
            }
            if f.lil_n_min < 3 || f.lil_n_max < f.lil_n_min {
                return Err(bad("need 3 <= lil_n_min <= lil_n_max"));
            }
        }
        let m = &self.mp;
        if m.base < 10_000 || m.doublings == 0 || m.doublings > 20 {
            return Err(bad("mp: need base >= 10^4 and 1 <= doublings <= 20"));
        }
        if m.q.iter().any(|q| !q.is_finite()) || m.tail_budget < 10_000 {
            return Err(bad("mp: q must be finite and tail_budget >= 10^4"));
        }
        if self.generate.file.is_empty() {
            return Err(bad("generate.file must not be empty"));
        }
        Ok(())
    }

    pub fn source_spec(&self) -> Result<SourceSpec, CliError> {
        match &self.source {
            SourceConfig::Markov { order, rows, mode } => {
                let alphabet = rows.first().map_or(0, Vec::len);
                let spec = MarkovSpec::new(alphabet, *order, rows.clone(), *mode)
                    .map_err(|e| bad(e.to_string()))?;
                Ok(SourceSpec::markov(spec, self.seed))
            }
            SourceConfig::Mp { .. } => Ok(SourceSpec::mp(self.mp_params()?, self.seed)),
        }
    }

    pub fn mp_params(&self) -> Result<MpParams, CliError> {
        match &self.source {
            SourceConfig::Mp { alpha, mode, burn_in } => {
                let params = MpParams {
                    alpha: *alpha,
                    mode: *mode,
                    burn_in: *burn_in,
                };
                params.validate().map_err(|e| bad(e.to_string()))?;
                Ok(params)
            }
            SourceConfig::Markov { .. } => Err(bad("this command needs a [source] with kind = \"mp\"")),
        }
    }

    pub fn spectrum_plan(&self) -> Result<EstimationPlan, CliError> {
        let s = &self.spectrum;
        let mut plan = EstimationPlan::new(self.source_spec()?, s.n_grid.clone(), s.samples, s.budget);
        plan.q_grid = s.q_grid.clone();
        plan.validate().map_err(|e| bad(e.to_string()))?;
        Ok(plan)
    }

    pub fn plan(&self, n_grid: &[usize], samples: usize, budget: u64) -> Result<EstimationPlan, CliError> {
        let plan = EstimationPlan::new(self.source_spec()?, n_grid.to_vec(), samples, budget);
        plan.validate().map_err(|e| bad(e.to_string()))?;
        Ok(plan)
    }
}
