//! Experiment configuration: JSON schema, dotted-path overrides, schema
//! validation, and assembly of the runtime objects (kernels, weights,
//! profiles, frames, operator specs, grids).

use serde::{Deserialize, Serialize};

use crate::error::{MzError, Result};
use crate::grid::Grid;
use crate::kernels::{
    identity_profile, power_profile, RadialWeight, RoughKernel, SurfaceProfile,
};
use crate::littlewood_paley::{
    build_partition, EtaProfile, FrameFlavor, LacunarySequence, LPFrame, TLParams,
};
use crate::marcinkiewicz::{OperatorSpec, TGrid};

fn default_n() -> usize {
    256
}
fn default_l() -> f64 {
    std::f64::consts::PI
}
fn default_q_samples() -> usize {
    256
}
fn default_one() -> f64 {
    1.0
}
fn default_tl_q() -> f64 {
    2.0
}
fn default_t_min() -> f64 {
    0.015625 // 2^-6
}
fn default_t_max() -> f64 {
    64.0
}
fn default_per_octave() -> usize {
    8
}
fn default_eta_order() -> u32 {
    1
}
fn default_seed() -> u64 {
    42
}
fn default_per_scale() -> usize {
    20
}
fn default_octaves() -> usize {
    7
}
fn default_band_lo() -> f64 {
    1.0
}
fn default_band_hi() -> f64 {
    1.99
}
fn default_j_span() -> i64 {
    8
}
fn default_betas() -> Vec<f64> {
    vec![0.2, 0.5, 0.8]
}
fn default_ratio_spread() -> f64 {
    10.0
}
fn default_bound_spread() -> f64 {
    3.0
}
fn default_delta_min() -> f64 {
    0.02
}
fn default_cb() -> f64 {
    4.0
}
fn default_exp_values() -> Vec<f64> {
    vec![2.0, 3.0, 4.0]
}
fn default_gamma() -> f64 {
    8.0
}
fn default_beta() -> f64 {
    0.5
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridCfg {
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_l")]
    pub l: f64,
}

impl Default for GridCfg {
    fn default() -> Self {
        Self {
            n: default_n(),
            l: default_l(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelCfg {
    Constant {
        #[serde(default = "default_q_samples")]
        q: usize,
    },
    Cosine {
        #[serde(default = "default_q_samples")]
        q: usize,
    },
    SgnPower {
        r: f64,
        #[serde(default = "default_q_samples")]
        q: usize,
    },
    BoundedStep {
        #[serde(default = "default_q_samples")]
        q: usize,
    },
    Samples {
        values: Vec<f64>,
    },
}

impl Default for KernelCfg {
    fn default() -> Self {
        KernelCfg::Cosine {
            q: default_q_samples(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightCfg {
    Constant {
        #[serde(default = "default_one")]
        value: f64,
    },
    Step {
        cutoff: f64,
    },
    Power {
        exponent: f64,
    },
}

impl Default for WeightCfg {
    fn default() -> Self {
        WeightCfg::Constant {
            value: default_one(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProfileCfg {
    Identity,
    Power { p: f64 },
}

impl Default for ProfileCfg {
    fn default() -> Self {
        ProfileCfg::Identity
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorCfg {
    #[serde(default = "default_one")]
    pub rho: f64,
    #[serde(default)]
    pub alpha: f64,
    #[serde(default = "default_tl_q")]
    pub q: f64,
}

impl Default for OperatorCfg {
    fn default() -> Self {
        Self {
            rho: 1.0,
            alpha: 0.0,
            q: 2.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TlCfg {
    #[serde(default)]
    pub alpha: f64,
    #[serde(default = "default_tl_q")]
    pub p: f64,
    #[serde(default = "default_tl_q")]
    pub q: f64,
}

impl Default for TlCfg {
    fn default() -> Self {
        Self {
            alpha: 0.0,
            p: 2.0,
            q: 2.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TGridCfg {
    #[serde(default = "default_t_min")]
    pub t_min: f64,
    #[serde(default = "default_t_max")]
    pub t_max: f64,
    #[serde(default = "default_per_octave")]
    pub per_octave: usize,
}

impl Default for TGridCfg {
    fn default() -> Self {
        Self {
            t_min: default_t_min(),
            t_max: default_t_max(),
            per_octave: default_per_octave(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SequenceCfg {
    Dyadic { k_min: i64, k_max: i64 },
    Geometric { base: f64, k_min: i64, k_max: i64 },
    Power2Square { k_max: i64 },
    /// a_j = 1/phi(2^-j), coupled to the configured profile
    Profile { j_min: i64, j_max: i64 },
}

impl Default for SequenceCfg {
    fn default() -> Self {
        SequenceCfg::Dyadic {
            k_min: -4,
            k_max: 9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlavorCfg {
    Adapted,
    LowerBump,
    UpperBump,
    Classical,
}

impl Default for FlavorCfg {
    fn default() -> Self {
        FlavorCfg::Adapted
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameCfg {
    #[serde(default)]
    pub sequence: SequenceCfg,
    #[serde(default = "default_eta_order")]
    pub eta_order: u32,
    #[serde(default)]
    pub flavor: FlavorCfg,
}

impl Default for FrameCfg {
    fn default() -> Self {
        Self {
            sequence: SequenceCfg::default(),
            eta_order: default_eta_order(),
            flavor: FlavorCfg::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Thresholds {
    /// equivalence verdict: bounded-ratio when max/min stays below this
    #[serde(default = "default_ratio_spread")]
    pub ratio_spread_max: f64,
    /// boundedness verdict: ratio max/min across the family
    #[serde(default = "default_bound_spread")]
    pub bound_spread_max: f64,
    /// positive-decay verdict on the fitted slope
    #[serde(default = "default_delta_min")]
    pub decay_delta_min: f64,
    /// calibrated constant for the oscillatory decay bound
    #[serde(default = "default_cb")]
    pub osc_cb: f64,
    /// calibrated constant for the W-form block bound
    #[serde(default = "default_cb")]
    pub block_c: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            ratio_spread_max: default_ratio_spread(),
            bound_spread_max: default_bound_spread(),
            decay_delta_min: default_delta_min(),
            osc_cb: default_cb(),
            block_c: default_cb(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentCfg {
    #[serde(default = "default_per_scale")]
    pub per_scale: usize,
    #[serde(default = "default_octaves")]
    pub octaves: usize,
    #[serde(default = "default_band_lo")]
    pub band_lo: f64,
    #[serde(default = "default_band_hi")]
    pub band_hi: f64,
    #[serde(default = "default_j_span")]
    pub j_span: i64,
    #[serde(default = "default_betas")]
    pub betas: Vec<f64>,
    #[serde(default)]
    pub thresholds: Thresholds,
}

impl Default for ExperimentCfg {
    fn default() -> Self {
        Self {
            per_scale: default_per_scale(),
            octaves: default_octaves(),
            band_lo: default_band_lo(),
            band_hi: default_band_hi(),
            j_span: default_j_span(),
            betas: default_betas(),
            thresholds: Thresholds::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExponentsCfg {
    #[serde(default = "default_exp_values")]
    pub p_values: Vec<f64>,
    #[serde(default = "default_exp_values")]
    pub q_values: Vec<f64>,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default = "default_beta")]
    pub beta: f64,
}

impl Default for ExponentsCfg {
    fn default() -> Self {
        Self {
            p_values: default_exp_values(),
            q_values: default_exp_values(),
            gamma: default_gamma(),
            beta: default_beta(),
        }
    }
}

/// The full experiment configuration (JSON on disk).
#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub grid: GridCfg,
    #[serde(default)]
    pub kernel: KernelCfg,
    #[serde(default)]
    pub radial_weight: WeightCfg,
    #[serde(default)]
    pub profile: ProfileCfg,
    #[serde(default)]
    pub operator: OperatorCfg,
    #[serde(default)]
    pub tl: TlCfg,
    #[serde(default)]
    pub tgrid: TGridCfg,
    #[serde(default)]
    pub frame: FrameCfg,
    #[serde(default)]
    pub experiment: ExperimentCfg,
    #[serde(default)]
    pub exponents: ExponentsCfg,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

impl ExperimentConfig {
    /// Parse a JSON document (schema errors name the offending key).
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| MzError::Config(e.to_string()))
    }

    /// Parse with `--set key=value` dotted-path overrides applied first.
    pub fn from_json_with_overrides(text: &str, overrides: &[(String, String)]) -> Result<Self> {
        let mut value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| MzError::Config(e.to_string()))?;
        for (path, raw) in overrides {
            apply_override(&mut value, path, raw)?;
        }
        serde_json::from_value(value).map_err(|e| MzError::Config(e.to_string()))
    }

    /// Schema-level and cross-field consistency diagnostics (no work run).
    pub fn validate(&self) -> Vec<String> {
        let mut diags = Vec::new();
        if self.grid.n < 16 || !self.grid.n.is_power_of_two() {
            diags.push(format!(
                "grid.n = {} must be a power of two >= 16",
                self.grid.n
            ));
        }
        if !(self.grid.l > 0.0) {
            diags.push(format!("grid.l = {} must be positive", self.grid.l));
        }
        if let KernelCfg::SgnPower { r, .. } = self.kernel {
            if r <= 1.0 {
                diags.push(format!("kernel.r = {r} must exceed 1 for integrability"));
            }
        }
        if !(self.operator.rho > 0.0) {
            diags.push(format!("operator.rho = {} must be positive", self.operator.rho));
        }
        for (name, v) in [
            ("operator.q", self.operator.q),
            ("tl.p", self.tl.p),
            ("tl.q", self.tl.q),
        ] {
            if !(v > 1.0 && v.is_finite()) {
                diags.push(format!("{name} = {v} must lie in (1, inf)"));
            }
        }
        if !(self.tgrid.t_min > 0.0 && self.tgrid.t_max > self.tgrid.t_min) {
            diags.push("tgrid must satisfy 0 < t_min < t_max".into());
        }
        if self.tgrid.per_octave < 4 {
            diags.push(format!(
                "tgrid.per_octave = {} must be >= 4",
                self.tgrid.per_octave
            ));
        }
        if matches!(self.frame.sequence, SequenceCfg::Profile { .. })
            && matches!(self.profile, ProfileCfg::Identity)
        {
            // legal (identity is a profile) but the coupling must exist;
            // a missing profile section is unrepresentable by schema
        }
        // Delta-class constraint for the full-generality theorems
        let pt = self.tl.p.max(self.tl.p / (self.tl.p - 1.0));
        let qt = self.tl.q.max(self.tl.q / (self.tl.q - 1.0));
        if self.tl.p > 1.0 && self.tl.q > 1.0 && self.exponents.gamma <= 0.5 * pt.max(qt) {
            diags.push(format!(
                "exponents.gamma = {} violates gamma > max(p~, q~)/2 = {} (Delta-class constraint)",
                self.exponents.gamma,
                0.5 * pt.max(qt)
            ));
        }
        if !(0.0 < self.exponents.beta && self.exponents.beta <= 1.0) {
            diags.push(format!(
                "exponents.beta = {} must lie in (0, 1]",
                self.exponents.beta
            ));
        }
        for b in &self.experiment.betas {
            if !(0.0 < *b && *b <= 1.0) {
                diags.push(format!("experiment.betas entry {b} must lie in (0, 1]"));
            }
        }
        if self.experiment.band_hi * 2f64.powi(self.experiment.octaves.saturating_sub(1) as i32)
            >= self.grid.n as f64 / 2.0 * std::f64::consts::PI / self.grid.l
        {
            diags.push(
                "experiment band at the top octave reaches the Nyquist bound; \
                 shrink band/octaves or enlarge grid.n"
                    .into(),
            );
        }
        diags
    }

    // ---- object assembly -------------------------------------------------

    pub fn build_grid(&self) -> Result<Grid> {
        Grid::new(self.grid.n, self.grid.l)
    }

    pub fn build_kernel(&self) -> Result<RoughKernel> {
        match &self.kernel {
            KernelCfg::Constant { q } => RoughKernel::constant(*q),
            KernelCfg::Cosine { q } => RoughKernel::cosine(*q),
            KernelCfg::SgnPower { r, q } => RoughKernel::sgn_power(*r, *q),
            KernelCfg::BoundedStep { q } => RoughKernel::bounded_step(*q),
            KernelCfg::Samples { values } => RoughKernel::from_samples(values.clone()),
        }
    }

    pub fn build_weight(&self) -> RadialWeight {
        match &self.radial_weight {
            WeightCfg::Constant { value } => RadialWeight::constant(*value),
            WeightCfg::Step { cutoff } => RadialWeight::step(*cutoff),
            WeightCfg::Power { exponent } => RadialWeight::power(*exponent),
        }
    }

    pub fn build_profile(&self) -> Result<SurfaceProfile> {
        match &self.profile {
            ProfileCfg::Identity => identity_profile(),
            ProfileCfg::Power { p } => power_profile(*p),
        }
    }

    pub fn build_operator_spec(&self) -> Result<OperatorSpec> {
        OperatorSpec::new(
            self.build_kernel()?,
            self.build_weight(),
            self.build_profile()?,
            self.operator.rho,
            self.operator.alpha,
            self.operator.q,
        )
    }

    pub fn build_tl_params(&self) -> Result<TLParams> {
        TLParams::new(self.tl.alpha, self.tl.p, self.tl.q)
    }

    pub fn build_tgrid(&self) -> Result<TGrid> {
        TGrid::new(self.tgrid.t_min, self.tgrid.t_max, self.tgrid.per_octave)
    }

    pub fn build_sequence(&self, profile: &SurfaceProfile) -> Result<LacunarySequence> {
        match self.frame.sequence {
            SequenceCfg::Dyadic { k_min, k_max } => LacunarySequence::dyadic(k_min, k_max),
            SequenceCfg::Geometric { base, k_min, k_max } => {
                LacunarySequence::geometric(base, k_min, k_max)
            }
            SequenceCfg::Power2Square { k_max } => LacunarySequence::power2_square(k_max),
            SequenceCfg::Profile { j_min, j_max } => {
                LacunarySequence::profile_induced(profile, j_min, j_max)
            }
        }
    }

    pub fn build_frame(&self, profile: &SurfaceProfile) -> Result<LPFrame> {
        self.build_frame_with_order(profile, self.frame.eta_order)
    }

    pub fn build_frame_with_order(
        &self,
        profile: &SurfaceProfile,
        eta_order: u32,
    ) -> Result<LPFrame> {
        let seq = self.build_sequence(profile)?;
        let eta = EtaProfile::new(seq.lower_ratio(), eta_order)?;
        let flavor = match self.frame.flavor {
            FlavorCfg::Adapted => FrameFlavor::Adapted,
            FlavorCfg::LowerBump => FrameFlavor::LowerBump,
            FlavorCfg::UpperBump => FrameFlavor::UpperBump,
            FlavorCfg::Classical => FrameFlavor::Classical,
        };
        build_partition(seq, eta, flavor)
    }
}

/// Apply one `--set path=value` override onto the JSON tree. The value is
/// parsed as JSON when possible, falling back to a string.
pub fn apply_override(root: &mut serde_json::Value, path: &str, raw: &str) -> Result<()> {
    if path.is_empty() {
        return Err(MzError::Config("empty override path".into()));
    }
    let parsed: serde_json::Value = match serde_json::from_str(raw) {
        Ok(v) => v,
        Err(_) => serde_json::Value::String(raw.to_string()),
    };
    let mut cursor = root;
    let parts: Vec<&str> = path.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        if part.is_empty() {
            return Err(MzError::Config(format!("override path '{path}' has an empty segment")));
        }
        if i == parts.len() - 1 {
            match cursor {
                serde_json::Value::Object(map) => {
                    map.insert(part.to_string(), parsed);
                    return Ok(());
                }
                _ => {
                    return Err(MzError::Config(format!(
                        "override path '{path}' descends into a non-object"
                    )))
                }
            }
        }
        cursor = match cursor {
            serde_json::Value::Object(map) => map
                .entry(part.to_string())
                .or_insert_with(|| serde_json::Value::Object(Default::default())),
            _ => {
                return Err(MzError::Config(format!(
                    "override path '{path}' descends into a non-object"
                )))
            }
        };
    }
    Ok(())
}

/// `key=value` splitter for CLI --set arguments.
pub fn parse_set_argument(arg: &str) -> Result<(String, String)> {
    match arg.split_once('=') {
        Some((k, v)) if !k.is_empty() => Ok((k.to_string(), v.to_string())),
        _ => Err(MzError::Config(format!(
            "--set expects key=value, got '{arg}'"
        ))),
    }
}
