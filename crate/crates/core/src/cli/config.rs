//! Experiment configuration files (TOML).
//!
//! ```toml
//! seed = 7
//!
//! [spectrum]
//! kind = "polynomial"      # polynomial | polylog | plateau | regime_switch | explicit
//! b = 2.0
//! p = 500
//!
//! [problem]
//! r = 0.5
//! sigma = 0.1
//!
//! [filter]
//! kind = "tikhonov"        # tikhonov | spectral_cutoff | landweber | iterated_tikhonov
//!
//! [rates]
//! n_grid = [128, 256, 512]
//! replicates = 50
//! ```
//!
//! Every table rejects unknown keys, and keys that do not apply to the
//! selected `kind` are rejected as well.

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::filters::{FilterFamily, FilterKind};
use crate::mercer::{Basis, MercerProblem, NoiseModel, SourceParams};
use crate::rates::ModelParams;
use crate::spectrum::{SpectrumKind, SpectrumProfile};

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub spectrum: SpectrumSection,
    #[serde(default)]
    pub problem: ProblemSection,
    #[serde(default)]
    pub filter: FilterSection,
    pub rates: Option<RatesSection>,
    pub fit: Option<FitSection>,
    pub lowerbound: Option<LowerBoundSection>,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumSection {
    pub kind: String,
    pub p: Option<usize>,
    pub j0: Option<usize>,
    pub nu_upper: Option<f64>,
    pub nu_lower: Option<f64>,
    pub b: Option<f64>,
    pub c: Option<f64>,
    pub d: Option<f64>,
    pub levels: Option<Vec<(f64, usize)>>,
    pub breakpoints: Option<Vec<(usize, f64)>>,
    pub values: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    #[serde(default = "default_basis")]
    pub basis: String,
    #[serde(default = "default_half")]
    pub r: f64,
    #[serde(default = "default_one")]
    pub radius: f64,
    /// Norm index for error reporting in `rates`.
    #[serde(default = "default_half")]
    pub s: f64,
    #[serde(default)]
    pub rho: f64,
    #[serde(default = "default_noise")]
    pub noise: String,
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    /// Class `sigma` for the lambda rule when it differs from the data noise.
    pub class_sigma: Option<f64>,
}

impl Default for ProblemSection {
    fn default() -> Self {
        Self {
            basis: default_basis(),
            r: 0.5,
            radius: 1.0,
            s: 0.5,
            rho: 0.0,
            noise: default_noise(),
            sigma: default_sigma(),
            class_sigma: None,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterSection {
    #[serde(default = "default_filter")]
    pub kind: String,
    pub step: Option<f64>,
    pub m: Option<u32>,
    #[serde(default = "default_grid")]
    pub grid_size: usize,
    #[serde(default = "default_qualification")]
    pub qualification: Vec<f64>,
}

impl Default for FilterSection {
    fn default() -> Self {
        Self {
            kind: default_filter(),
            step: None,
            m: None,
            grid_size: default_grid(),
            qualification: default_qualification(),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RatesSection {
    pub n_grid: Vec<usize>,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitSection {
    pub n: Option<usize>,
    pub lambda: Option<f64>,
    #[serde(default)]
    pub jitter: bool,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LowerBoundSection {
    pub n: usize,
    #[serde(default = "default_lower_s")]
    pub s: Vec<f64>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<String>,
}

fn default_basis() -> String {
    "fourier".into()
}
fn default_noise() -> String {
    "gaussian".into()
}
fn default_filter() -> String {
    "tikhonov".into()
}
fn default_half() -> f64 {
    0.5
}
fn default_one() -> f64 {
    1.0
}
fn default_sigma() -> f64 {
    0.1
}
fn default_grid() -> usize {
    crate::filters::MIN_GRID
}
fn default_qualification() -> Vec<f64> {
    vec![1.0, 2.0, 4.0]
}
fn default_replicates() -> usize {
    50
}
fn default_lower_s() -> Vec<f64> {
    vec![0.0, 0.5]
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

/// Maps a library error raised while interpreting configuration values to a
/// configuration error.
fn as_config(e: Error) -> Error {
    match e {
        Error::Domain(m) | Error::Shape(m) | Error::Construction(m) => Error::Config(m),
        Error::Range { index, len } => Error::Config(format!("index {index} out of range 1..={len}")),
        other => other,
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| config_err(e.to_string()))
    }

    pub fn profile(&self) -> Result<SpectrumProfile> {
        self.spectrum.build()
    }

    pub fn filter(&self) -> Result<FilterFamily> {
        self.filter.build()
    }

    pub fn problem(&self) -> Result<MercerProblem> {
        let pr = &self.problem;
        let basis = match pr.basis.as_str() {
            "fourier" => Basis::FourierUnitInterval,
            "abstract" => Basis::AbstractOrthonormal,
            other => return Err(config_err(format!("unknown basis '{other}' (fourier | abstract)"))),
        };
        let noise = match pr.noise.as_str() {
            "gaussian" => NoiseModel::Gaussian { sigma: pr.sigma },
            "uniform" => NoiseModel::BoundedUniform { half_width: pr.sigma * 3f64.sqrt() },
            other => return Err(config_err(format!("unknown noise '{other}' (gaussian | uniform)"))),
        };
        let source = SourceParams::new(pr.r, pr.radius, pr.s).map_err(as_config)?;
        MercerProblem::edge_of_class(self.profile()?, basis, source, pr.rho, noise).map_err(as_config)
    }

    /// Class parameters for the lambda rule: `class_sigma` when given, else
    /// the data noise level.
    pub fn model_params(&self, problem: &MercerProblem) -> Result<ModelParams> {
        let sigma = self.problem.class_sigma.unwrap_or(problem.noise().sigma());
        if sigma <= 0.0 {
            return Err(config_err("noiseless data needs problem.class_sigma > 0 for the lambda rule"));
        }
        let m = if self.problem.class_sigma.is_some() { sigma } else { problem.noise().bernstein_m() };
        ModelParams::new(m, sigma, self.problem.radius, self.problem.r, problem.profile().clone()).map_err(as_config)
    }
}

impl SpectrumSection {
    fn allow(&self, allowed: &[&str]) -> Result<()> {
        let present = [
            ("b", self.b.is_some()),
            ("c", self.c.is_some()),
            ("d", self.d.is_some()),
            ("levels", self.levels.is_some()),
            ("breakpoints", self.breakpoints.is_some()),
            ("values", self.values.is_some()),
        ];
        for (key, set) in present {
            if set && !allowed.contains(&key) {
                return Err(config_err(format!("key '{key}' does not apply to spectrum kind '{}'", self.kind)));
            }
        }
        Ok(())
    }

    fn need<T: Clone>(&self, value: &Option<T>, key: &str) -> Result<T> {
        value
            .clone()
            .ok_or_else(|| config_err(format!("spectrum kind '{}' requires key '{key}'", self.kind)))
    }

    pub fn build(&self) -> Result<SpectrumProfile> {
        let kind = match self.kind.as_str() {
            "polynomial" => {
                self.allow(&["b"])?;
                SpectrumKind::Polynomial { b: self.need(&self.b, "b")? }
            }
            "polylog" => {
                self.allow(&["b", "c", "d"])?;
                SpectrumKind::Polylog {
                    b: self.need(&self.b, "b")?,
                    c: self.c.unwrap_or(0.0),
                    d: self.d.unwrap_or(0.0),
                }
            }
            "plateau" => {
                self.allow(&["levels"])?;
                SpectrumKind::Plateau { levels: self.need(&self.levels, "levels")? }
            }
            "regime_switch" => {
                self.allow(&["breakpoints"])?;
                SpectrumKind::RegimeSwitch { breakpoints: self.need(&self.breakpoints, "breakpoints")? }
            }
            "explicit" => {
                self.allow(&["values"])?;
                SpectrumKind::Explicit { values: self.need(&self.values, "values")? }
            }
            other => {
                return Err(config_err(format!(
                    "unknown spectrum kind '{other}' (polynomial | polylog | plateau | regime_switch | explicit)"
                )))
            }
        };
        let default_nu = match &kind {
            SpectrumKind::Polynomial { b } | SpectrumKind::Polylog { b, .. } => b.max(1.0),
            _ => 1.0,
        };
        let nu_upper = self.nu_upper.unwrap_or(default_nu);
        let nu_lower = self.nu_lower.unwrap_or(nu_upper.max(default_nu));
        SpectrumProfile::new(kind, self.p, self.j0.unwrap_or(1), nu_upper, nu_lower).map_err(as_config)
    }
}

impl FilterSection {
    pub fn build(&self) -> Result<FilterFamily> {
        let check = |allowed_step: bool, allowed_m: bool| -> Result<()> {
            if self.step.is_some() && !allowed_step {
                return Err(config_err(format!("key 'step' does not apply to filter '{}'", self.kind)));
            }
            if self.m.is_some() && !allowed_m {
                return Err(config_err(format!("key 'm' does not apply to filter '{}'", self.kind)));
            }
            Ok(())
        };
        let kind = match self.kind.as_str() {
            "tikhonov" => {
                check(false, false)?;
                FilterKind::Tikhonov
            }
            "spectral_cutoff" => {
                check(false, false)?;
                FilterKind::SpectralCutoff
            }
            "landweber" => {
                check(true, false)?;
                FilterKind::Landweber { step: self.step.unwrap_or(1.0) }
            }
            "iterated_tikhonov" => {
                check(false, true)?;
                FilterKind::IteratedTikhonov { m: self.m.unwrap_or(2) }
            }
            other => {
                return Err(config_err(format!(
                    "unknown filter '{other}' (tikhonov | spectral_cutoff | landweber | iterated_tikhonov)"
                )))
            }
        };
        FilterFamily::with_default_constants(kind).map_err(as_config)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = "seed = 3\n[spectrum]\nkind = \"polynomial\"\nb = 2.0\np = 50\n";

    #[test]
    fn minimal_config() {
        let cfg = ExperimentConfig::parse(BASE).unwrap();
        assert_eq!(cfg.seed, 3);
        let prof = cfg.profile().unwrap();
        assert_eq!(prof.p(), 50);
        assert_eq!(prof.nu_upper(), 2.0);
        assert_eq!(cfg.filter().unwrap(), FilterFamily::tikhonov());
        let problem = cfg.problem().unwrap();
        assert_eq!(cfg.model_params(&problem).unwrap().sigma, 0.1);
    }

    #[test]
    fn seed_is_mandatory() {
        let text = BASE.replace("seed = 3\n", "");
        assert!(matches!(ExperimentConfig::parse(&text), Err(Error::Config(_))));
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(ExperimentConfig::parse(&format!("{BASE}bogus = 1\n")).is_err());
        assert!(ExperimentConfig::parse(&format!("{BASE}[extra]\nx = 1\n")).is_err());
        let cfg = ExperimentConfig::parse(&format!("{BASE}values = [1.0]\n")).unwrap();
        assert!(matches!(cfg.profile(), Err(Error::Config(_))));
        let cfg = ExperimentConfig::parse(&format!("{BASE}[filter]\nkind = \"tikhonov\"\nstep = 0.5\n")).unwrap();
        assert!(matches!(cfg.filter(), Err(Error::Config(_))));
    }

    #[test]
    fn all_kinds_parse() {
        let text = "seed = 1\n[spectrum]\nkind = \"plateau\"\nlevels = [[1.0, 2], [0.5, 3]]\n";
        assert_eq!(ExperimentConfig::parse(text).unwrap().profile().unwrap().p(), 5);
        let text = "seed = 1\n[spectrum]\nkind = \"regime_switch\"\np = 40\nbreakpoints = [[1, 1.0], [10, 3.0]]\nnu_lower = 3.0\n";
        assert_eq!(ExperimentConfig::parse(text).unwrap().profile().unwrap().p(), 40);
        let text = "seed = 1\n[spectrum]\nkind = \"explicit\"\nvalues = [1.0, 0.5]\n[filter]\nkind = \"landweber\"\nstep = 0.5\n";
        let cfg = ExperimentConfig::parse(text).unwrap();
        assert_eq!(cfg.filter().unwrap().kind(), FilterKind::Landweber { step: 0.5 });
    }

    #[test]
    fn noiseless_needs_class_sigma() {
        let cfg = ExperimentConfig::parse(&format!("{BASE}[problem]\nsigma = 0.0\n")).unwrap();
        let problem = cfg.problem().unwrap();
        assert!(matches!(cfg.model_params(&problem), Err(Error::Config(_))));
        let cfg = ExperimentConfig::parse(&format!("{BASE}[problem]\nsigma = 0.0\nclass_sigma = 0.2\n")).unwrap();
        let problem = cfg.problem().unwrap();
        assert_eq!(cfg.model_params(&problem).unwrap().sigma, 0.2);
    }
}
