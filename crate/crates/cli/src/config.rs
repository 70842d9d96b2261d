//! JSON run configuration. See `configs/SCHEMA.md` for the field reference.

use molring::coupling::{CrNiParams, Linker, LinkerRatio, SweepGrid};
use molring::oracle::ZConvention;
use molring::protocols::{Branch, RatioAnchor};
use molring::ring::{BondVariant, RingSpec};
use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkConfig {
    pub mode: Mode,
    pub effective: Option<EffectiveBlock>,
    pub microscopic: Option<MicroscopicBlock>,
    #[serde(default)]
    pub protocol: ProtocolBlock,
}

#[derive(Debug, Deserialize, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Effective,
    Microscopic,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EffectiveBlock {
    pub gammas: Vec<f64>,
    pub deltas: Option<Vec<f64>>,
    /// Common product; anisotropies are derived from it.
    pub c: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MicroscopicBlock {
    pub center: RingConfig,
    pub circumjacent: Vec<CircumjacentConfig>,
    pub gamma_scale: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircumjacentConfig {
    pub ring: RingConfig,
    pub linkers: Vec<LinkerConfig>,
}

#[derive(Debug, Deserialize, Clone, PartialEq)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum RingConfig {
    CrNi(CrNiConfig),
    General(GeneralRing),
}

#[derive(Debug, Deserialize, Clone, Copy, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct CrNiConfig {
    pub chromium: usize,
    pub j: f64,
    pub a: f64,
    pub d: f64,
    pub variant: VariantConfig,
}

#[derive(Debug, Deserialize, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum VariantConfig {
    Literal,
    Symmetric,
}

#[derive(Debug, Deserialize, Clone, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GeneralRing {
    pub spins: Vec<f64>,
    pub bonds: Vec<f64>,
    pub crystal_fields: Vec<f64>,
}

#[derive(Debug, Deserialize, Clone, Copy)]
#[serde(deny_unknown_fields)]
pub struct LinkerConfig {
    pub circumjacent_site: usize,
    pub central_site: usize,
    pub exchange: f64,
}

/// Either an explicit point list or `points` evenly spaced values.
#[derive(Debug, Deserialize, Clone)]
#[serde(untagged)]
pub enum GridConfig {
    Points(Vec<f64>),
    Range { start: f64, stop: f64, points: usize },
}

#[derive(Debug, Deserialize, Clone, Copy, PartialEq, Eq)]
#[serde(untagged)]
pub enum SourceConfig {
    Site(usize),
    Named(CenterTag),
}

#[derive(Debug, Deserialize, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum CenterTag {
    Center,
}

#[derive(Debug, Deserialize, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum BranchConfig {
    Plus,
    Minus,
}

#[derive(Debug, Deserialize, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum AnchorConfig {
    Source,
    Others,
}

#[derive(Debug, Deserialize, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum ZConfig {
    Halfspin,
    Pauli,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ProtocolBlock {
    pub source: Option<SourceConfig>,
    pub k: Option<u32>,
    pub branch: Option<BranchConfig>,
    pub anchor: Option<AnchorConfig>,
    pub t_grid: Option<GridConfig>,
    pub delta_grid: Option<GridConfig>,
    pub fluctuating_site: Option<usize>,
    pub z_convention: Option<ZConfig>,
    pub transfer: Option<TransferConfig>,
    pub anisotropy: Option<AnisotropyConfig>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransferConfig {
    pub l: usize,
    /// Shorthand for `amplitudes = [sin(alpha), cos(alpha)]` when `l = 2`.
    pub alpha: Option<f64>,
    pub amplitudes: Option<Vec<f64>>,
    pub gamma_scale: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnisotropyConfig {
    pub grid: AnisotropyGrid,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum AnisotropyGrid {
    RingParameters {
        a: GridConfig,
        d: GridConfig,
    },
    LinkerRatio {
        scaled: usize,
        reference: usize,
        b: GridConfig,
    },
}

pub fn parse(text: &str) -> Result<NetworkConfig, CliError> {
    let config: NetworkConfig = serde_json::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
    config.check_mode()?;
    Ok(config)
}

impl NetworkConfig {
    fn check_mode(&self) -> Result<(), CliError> {
        match (self.mode, self.effective.is_some(), self.microscopic.is_some()) {
            (Mode::Effective, true, false) | (Mode::Microscopic, false, true) => Ok(()),
            (_, true, true) => Err(CliError::Validation(
                "exactly one of `effective` and `microscopic` may be populated".into(),
            )),
            (mode, _, _) => Err(CliError::Validation(format!(
                "mode is {mode:?} but the matching block is missing"
            ))),
        }
    }
}

impl GridConfig {
    pub fn values(&self, name: &str) -> Result<Vec<f64>, CliError> {
        let values = match *self {
            GridConfig::Points(ref p) => p.clone(),
            GridConfig::Range { start, stop, points } => match points {
                0 => Vec::new(),
                1 => vec![start],
                n => (0..n)
                    .map(|j| {
                        if j == n - 1 {
                            stop
                        } else {
                            start + (stop - start) * j as f64 / (n - 1) as f64
                        }
                    })
                    .collect(),
            },
        };
        if values.is_empty() {
            return Err(CliError::Validation(format!("`{name}` is empty")));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(CliError::Validation(format!("`{name}` has non-finite values")));
        }
        if values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(CliError::Validation(format!("`{name}` must be strictly increasing")));
        }
        Ok(values)
    }
}

impl RingConfig {
    pub fn spec(&self) -> Result<RingSpec, CliError> {
        Ok(match self {
            RingConfig::CrNi(p) => p.params().spec()?,
            RingConfig::General(g) => RingSpec::new(&g.spins, g.bonds.clone(), g.crystal_fields.clone())?,
        })
    }
}

impl CrNiConfig {
    pub fn params(&self) -> CrNiParams {
        CrNiParams {
            chromium: self.chromium,
            j: self.j,
            a: self.a,
            d: self.d,
            variant: match self.variant {
                VariantConfig::Literal => BondVariant::Literal,
                VariantConfig::Symmetric => BondVariant::Symmetric,
            },
        }
    }
}

impl LinkerConfig {
    pub fn linker(&self) -> Linker {
        Linker::new(self.circumjacent_site, self.central_site, self.exchange)
    }
}

impl From<BranchConfig> for Branch {
    fn from(b: BranchConfig) -> Self {
        match b {
            BranchConfig::Plus => Branch::Plus,
            BranchConfig::Minus => Branch::Minus,
        }
    }
}

impl From<AnchorConfig> for RatioAnchor {
    fn from(a: AnchorConfig) -> Self {
        match a {
            AnchorConfig::Source => RatioAnchor::Source,
            AnchorConfig::Others => RatioAnchor::Others,
        }
    }
}

impl From<ZConfig> for ZConvention {
    fn from(z: ZConfig) -> Self {
        match z {
            ZConfig::Halfspin => ZConvention::HalfSpin,
            ZConfig::Pauli => ZConvention::Pauli,
        }
    }
}

impl AnisotropyGrid {
    pub fn sweep_grid(&self) -> Result<(SweepGrid, Option<LinkerRatio>), CliError> {
        Ok(match self {
            AnisotropyGrid::RingParameters { a, d } => (
                SweepGrid::ring_product(&a.values("anisotropy.grid.a")?, &d.values("anisotropy.grid.d")?),
                None,
            ),
            AnisotropyGrid::LinkerRatio { scaled, reference, b } => (
                SweepGrid::LinkerRatio(b.values("anisotropy.grid.b")?),
                Some(LinkerRatio {
                    scaled: *scaled,
                    reference: *reference,
                }),
            ),
        })
    }
}
