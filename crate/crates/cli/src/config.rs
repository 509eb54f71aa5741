//! Run configuration: a TOML file of flat sections. Every key has a default,
//! unknown keys are rejected, and the parsed values are revalidated against
//! the library constructors before any run starts.

use landau::kernel::{CollisionKernel, Weight};
use landau::nonlinear::{EvolveConfig, StepSize};
use landau::vgrid::VelocityGrid;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// Grid size used by `--quick`.
pub const QUICK_N: usize = 12;

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

impl From<landau::Error> for ConfigError {
    fn from(e: landau::Error) -> Self {
        ConfigError(e.to_string())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KernelSection {
    pub gamma: f64,
}

impl Default for KernelSection {
    fn default() -> Self {
        Self { gamma: 1.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub n: usize,
    pub vmax: f64,
}

impl GridSection {
    pub fn build(&self) -> Result<VelocityGrid, ConfigError> {
        Ok(VelocityGrid::new(self.n, self.vmax)?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumSection {
    pub n: usize,
    pub vmax: f64,
    /// Second resolution for the drift check; `0` disables it.
    pub compare_n: usize,
    /// Eigenvalues written to the CSV table.
    pub leading: usize,
}

impl Default for SpectrumSection {
    fn default() -> Self {
        Self { n: 16, vmax: 6.0, compare_n: 0, leading: 20 }
    }
}

/// A weight entry. `m0` is `exp(r⟨v⟩²)` with `p = 2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightSpec {
    Polynomial { k: f64, p: f64 },
    StretchedExp { r: f64, s: f64, p: f64 },
    M0 { r: f64 },
}

impl WeightSpec {
    pub fn build(&self, kernel: &CollisionKernel) -> Result<Weight, ConfigError> {
        let w = match *self {
            WeightSpec::Polynomial { k, p } => Weight::polynomial(k, p, kernel),
            WeightSpec::StretchedExp { r, s, p } => Weight::stretched_exp(r, s, p, kernel),
            WeightSpec::M0 { r } => Weight::m0(r),
        };
        w.map_err(|e| ConfigError(format!("weight {self:?}: {e}")))
    }

    pub fn label(&self) -> String {
        match *self {
            WeightSpec::Polynomial { k, p } => format!("poly_k{k}_p{p}"),
            WeightSpec::StretchedExp { r, s, p } => format!("exp_r{r}_s{s}_p{p}"),
            WeightSpec::M0 { r } => format!("m0_r{r}"),
        }
    }
}

/// `"auto"` or a number.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AutoOr {
    Value(f64),
    Auto(AutoTag),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AutoTag {
    Auto,
}

impl AutoOr {
    pub const AUTO: AutoOr = AutoOr::Auto(AutoTag::Auto);

    pub fn value(&self) -> Option<f64> {
        match self {
            AutoOr::Value(x) => Some(*x),
            AutoOr::Auto(_) => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SplitSection {
    /// Target `a < 0` of `φ − Mχ_R ≤ a`; `auto` uses the library default.
    pub target: AutoOr,
}

impl Default for SplitSection {
    fn default() -> Self {
        Self { target: AutoOr::Value(-1.0) }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DissipativitySection {
    pub n: usize,
    pub vmax: f64,
    pub t_end: f64,
    pub outputs: usize,
    /// Random initial data for the envelope check.
    pub samples: usize,
    /// Allowed slack in `‖S_B(t)f‖ ≤ slack·e^{at}‖f‖`.
    pub slack: f64,
}

impl Default for DissipativitySection {
    fn default() -> Self {
        Self { n: 12, vmax: 6.0, t_end: 2.0, outputs: 40, samples: 10, slack: 1.02 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialKind {
    Maxwellian,
    /// Gaussian with temperatures `(t1, t2, t2)`, `t2 = (3 − t1)/2`.
    Anisotropic,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvolveSection {
    pub t_end: f64,
    pub dt: AutoOr,
    pub outputs: usize,
    pub conserve_project: bool,
    pub floor: f64,
    pub initial: InitialKind,
    pub t1: f64,
    pub snapshots: bool,
}

impl Default for EvolveSection {
    fn default() -> Self {
        Self {
            t_end: 0.25,
            dt: AutoOr::AUTO,
            outputs: 50,
            conserve_project: true,
            floor: 1e-30,
            initial: InitialKind::Anisotropic,
            t1: 2.0,
            snapshots: false,
        }
    }
}

impl EvolveSection {
    pub fn evolve_config(&self) -> Result<EvolveConfig, ConfigError> {
        let cfg = EvolveConfig {
            t_end: self.t_end,
            dt: match self.dt.value() {
                Some(dt) => StepSize::Fixed(dt),
                None => StepSize::Auto,
            },
            conserve_project: self.conserve_project,
            floor: self.floor,
            outputs: self.outputs,
            keep_snapshots: self.snapshots,
            ..EvolveConfig::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DecaySection {
    /// Reference gap; `auto` takes it from the spectrum report in the output
    /// directory, computing it when absent.
    pub lambda0: AutoOr,
    /// Start of the fit window as a fraction of `t_end`.
    pub window_start: f64,
}

impl Default for DecaySection {
    fn default() -> Self {
        Self { lambda0: AutoOr::AUTO, window_start: 0.4 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BootstrapSection {
    pub ell: f64,
    pub k: f64,
    pub threshold: f64,
}

impl Default for BootstrapSection {
    fn default() -> Self {
        Self { ell: 5.0, k: 5.0, threshold: 0.05 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub seed: u64,
    pub out: PathBuf,
    pub kernel: KernelSection,
    pub grid: GridSection,
    pub spectrum: SpectrumSection,
    pub weights: Vec<WeightSpec>,
    pub split: SplitSection,
    pub dissipativity: DissipativitySection,
    pub evolve: EvolveSection,
    pub decay: DecaySection,
    pub bootstrap: BootstrapSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            out: PathBuf::from("out"),
            kernel: KernelSection::default(),
            grid: GridSection { n: 32, vmax: 8.0 },
            spectrum: SpectrumSection::default(),
            weights: vec![WeightSpec::Polynomial { k: 5.0, p: 1.0 }, WeightSpec::M0 { r: 0.1 }],
            split: SplitSection::default(),
            dissipativity: DissipativitySection::default(),
            evolve: EvolveSection::default(),
            decay: DecaySection::default(),
            bootstrap: BootstrapSection::default(),
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| ConfigError(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn dump(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Shrinks every grid to `n = 12` and shortens the long runs.
    pub fn quick(mut self) -> Self {
        self.grid.n = QUICK_N;
        self.grid.vmax = self.grid.vmax.min(6.0);
        self.spectrum.n = QUICK_N;
        if self.spectrum.compare_n != 0 {
            self.spectrum.compare_n = 14;
        }
        self.dissipativity.n = QUICK_N;
        self.dissipativity.samples = self.dissipativity.samples.min(3);
        self
    }

    pub fn kernel(&self) -> Result<CollisionKernel, ConfigError> {
        Ok(CollisionKernel::new(self.kernel.gamma)?)
    }

    pub fn weights(&self) -> Result<Vec<Weight>, ConfigError> {
        let k = self.kernel()?;
        self.weights.iter().map(|w| w.build(&k)).collect()
    }

    /// Rebuilds every library object the config describes.
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.kernel()?;
        self.grid.build()?;
        VelocityGrid::new(self.spectrum.n, self.spectrum.vmax)?;
        if self.spectrum.compare_n != 0 {
            VelocityGrid::new(self.spectrum.compare_n, self.spectrum.vmax)?;
        }
        VelocityGrid::new(self.dissipativity.n, self.dissipativity.vmax)?;
        self.weights()?;
        if let Some(a) = self.split.target.value() {
            if !(a < 0.0) {
                return Err(ConfigError(format!("split target a = {a} must be negative")));
            }
        }
        let d = &self.dissipativity;
        if !(d.t_end > 0.0) || d.outputs == 0 || !(d.slack >= 1.0) {
            return Err(ConfigError("dissipativity needs t_end > 0, outputs >= 1, slack >= 1".into()));
        }
        self.evolve.evolve_config()?;
        if self.evolve.initial == InitialKind::Anisotropic && !(self.evolve.t1 > 0.0 && self.evolve.t1 < 3.0) {
            return Err(ConfigError(format!("anisotropic start needs t1 in (0, 3), got {}", self.evolve.t1)));
        }
        if let Some(l) = self.decay.lambda0.value() {
            if !(l > 0.0) {
                return Err(ConfigError(format!("lambda0 = {l} must be positive")));
            }
        }
        if !(0.0..1.0).contains(&self.decay.window_start) {
            return Err(ConfigError("decay.window_start must lie in [0, 1)".into()));
        }
        let b = &self.bootstrap;
        if !(b.threshold > 0.0 && b.ell >= 0.0 && b.k >= 0.0) {
            return Err(ConfigError("bootstrap needs threshold > 0 and ell, k >= 0".into()));
        }
        Ok(())
    }
}
