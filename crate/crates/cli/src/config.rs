//! Run configuration: one TOML document, overridable from the command line.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use subradiant::analysis::BranchSelector;
use subradiant::dispersion::SymmetryPoint;
use subradiant::geometry::{LatticeDescriptor, LatticeKind, PolarizationTag};
use subradiant::spectrum::Irrep;

use crate::RunError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Spectrum,
    Modes,
    Dispersion,
    DispersionMap,
    FlatBand,
    Scaling,
    OptimizePeriod,
    Scatter,
    Deform,
    CornerAsymptotics,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Modes => "modes",
            Command::Dispersion => "dispersion",
            Command::DispersionMap => "dispersion-map",
            Command::FlatBand => "flat-band",
            Command::Scaling => "scaling",
            Command::OptimizePeriod => "optimize-period",
            Command::Scatter => "scatter",
            Command::Deform => "deform",
            Command::CornerAsymptotics => "corner-asymptotics",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    pub output_dir: PathBuf,
    pub geometry: String,
    pub n: usize,
    pub n_y: Option<usize>,
    pub period: f64,
    pub period_y: Option<f64>,
    pub polarization: String,
    /// Also write the effective Hamiltonian as CSV.
    pub dump_matrix: bool,
    pub modes: ModesConfig,
    pub dispersion: DispersionConfig,
    pub flat_band: FlatBandConfig,
    pub sweep: SweepConfig,
    pub scatter: ScatterConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            command: Command::Spectrum,
            output_dir: PathBuf::from("out"),
            geometry: "square".into(),
            n: 12,
            n_y: None,
            period: 0.4,
            period_y: None,
            polarization: "z".into(),
            dump_matrix: false,
            modes: ModesConfig::default(),
            dispersion: DispersionConfig::default(),
            flat_band: FlatBandConfig::default(),
            sweep: SweepConfig::default(),
            scatter: ScatterConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModesConfig {
    /// Keep only this irrep.
    pub irrep: Option<String>,
    pub max_decay: Option<f64>,
    /// Keep at most this many states, most subradiant first.
    pub limit: usize,
}

impl Default for ModesConfig {
    fn default() -> Self {
        Self { irrep: None, max_decay: None, limit: 10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DispersionConfig {
    /// High-symmetry path, e.g. `GXMG`.
    pub path: String,
    /// Total samples along the path.
    pub samples: usize,
    /// Use the damped direct sum for every polarization.
    pub direct: bool,
    /// Points per axis of the Brillouin-zone map.
    pub grid: usize,
}

impl Default for DispersionConfig {
    fn default() -> Self {
        Self { path: "GXMG".into(), samples: 200, direct: false, grid: 41 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlatBandConfig {
    pub range: [f64; 2],
    pub scan_step: f64,
}

impl Default for FlatBandConfig {
    fn default() -> Self {
        Self { range: [0.15, 0.45], scan_step: 0.01 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub sizes: Vec<usize>,
    /// `any`, `checkerboard`, `edge-antisymmetric`, or irreps joined by `/`.
    pub branch: String,
    /// `fixed` (uses `period`) or `optimized` (searches `range`).
    pub period_mode: String,
    pub range: [f64; 2],
    pub ratio_range: [f64; 2],
    /// Samples per side of the square point for `deform`, along the range for sweeps.
    pub samples: usize,
    pub threshold: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            sizes: vec![8, 10, 12, 14, 16, 18, 20],
            branch: "any".into(),
            period_mode: "fixed".into(),
            range: [0.24, 0.42],
            ratio_range: [0.97, 1.03],
            samples: 30,
            threshold: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScatterConfig {
    pub l: i32,
    pub s: i32,
    pub na: f64,
    pub beta: f64,
    /// `lo:hi:count`.
    pub detunings: String,
    /// Modal columns written, ranked by peak height.
    pub top_k: usize,
    /// Modes narrower than this get extra grid points around their resonance.
    pub narrow: f64,
}

impl Default for ScatterConfig {
    fn default() -> Self {
        Self { l: 9, s: 1, na: 1.0, beta: 0.5, detunings: "-2:2:801".into(), top_k: 5, narrow: 0.1 }
    }
}

fn invalid(field: &str, message: impl std::fmt::Display) -> RunError {
    RunError::Config { field: field.to_string(), message: message.to_string() }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, RunError> {
        toml::from_str(text).map_err(|e| invalid("<file>", e.message()))
    }

    pub fn load(path: &Path) -> Result<Self, RunError> {
        let text = std::fs::read_to_string(path).map_err(|e| invalid("<file>", format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("run config is always serializable")
    }

    pub fn lattice_kind(&self) -> Result<LatticeKind, RunError> {
        LatticeKind::from_str(&self.geometry).map_err(|e| invalid("geometry", e))
    }

    pub fn polarization_tag(&self) -> Result<PolarizationTag, RunError> {
        PolarizationTag::from_str(&self.polarization).map_err(|e| invalid("polarization", e))
    }

    pub fn descriptor(&self) -> Result<LatticeDescriptor, RunError> {
        let kind = self.lattice_kind()?;
        let d = match kind {
            LatticeKind::Rectangular => {
                LatticeDescriptor::rectangular(self.n, self.n_y.unwrap_or(self.n), self.period, self.period_y.unwrap_or(self.period))
            }
            _ => {
                if self.n_y.is_some() || self.period_y.is_some() {
                    return Err(invalid("n_y", "n_y and period_y only apply to rectangular arrays"));
                }
                LatticeDescriptor::new(kind, self.n, self.period)
            }
        };
        d.validate().map_err(|e| invalid("period", e))?;
        Ok(d)
    }

    pub fn path_points(&self) -> Result<Vec<SymmetryPoint>, RunError> {
        let pts: Vec<SymmetryPoint> = self
            .dispersion
            .path
            .chars()
            .map(|c| SymmetryPoint::from_str(&c.to_string()).map_err(|e| invalid("dispersion.path", e)))
            .collect::<Result<_, _>>()?;
        if pts.len() < 2 {
            return Err(invalid("dispersion.path", "needs at least two symmetry points"));
        }
        Ok(pts)
    }

    pub fn branch_selector(&self, n: usize) -> Result<BranchSelector, RunError> {
        parse_branch(&self.sweep.branch, n).map_err(|e| invalid("sweep.branch", e))
    }

    pub fn irrep_filter(&self) -> Result<Option<Irrep>, RunError> {
        self.modes.irrep.as_deref().map(|s| Irrep::from_str(s).map_err(|e| invalid("modes.irrep", e))).transpose()
    }

    pub fn detuning_range(&self) -> Result<(f64, f64, usize), RunError> {
        parse_range(&self.scatter.detunings).map_err(|e| invalid("scatter.detunings", e))
    }

    pub fn period_mode(&self) -> Result<bool, RunError> {
        match self.sweep.period_mode.as_str() {
            "fixed" => Ok(false),
            "optimized" => Ok(true),
            other => Err(invalid("sweep.period_mode", format!("expected `fixed` or `optimized`, got `{other}`"))),
        }
    }
}

/// `any`, `checkerboard`, `edge-antisymmetric`, or irreps such as `A2/B1`.
pub fn parse_branch(text: &str, n: usize) -> Result<BranchSelector, String> {
    match text.trim().to_ascii_lowercase().as_str() {
        "any" => Ok(BranchSelector::any()),
        "checkerboard" => Ok(BranchSelector::checkerboard(n)),
        "edge-antisymmetric" => {
            if n < 3 {
                return Err("edge-antisymmetric needs N >= 3".into());
            }
            Ok(BranchSelector::edge_antisymmetric(n))
        }
        _ => {
            let irreps = text.split('/').map(|s| Irrep::from_str(s.trim())).collect::<Result<Vec<_>, _>>()?;
            Ok(BranchSelector::irreps(&irreps))
        }
    }
}

/// `lo:hi:count` with `lo < hi` and `count >= 2`.
pub fn parse_range(text: &str) -> Result<(f64, f64, usize), String> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("expected lo:hi:count, got `{text}`"));
    }
    let lo: f64 = parts[0].trim().parse().map_err(|e| format!("lower bound: {e}"))?;
    let hi: f64 = parts[1].trim().parse().map_err(|e| format!("upper bound: {e}"))?;
    let count: usize = parts[2].trim().parse().map_err(|e| format!("count: {e}"))?;
    if !(lo < hi) || count < 2 {
        return Err(format!("need lo < hi and count >= 2, got `{text}`"));
    }
    Ok((lo, hi, count))
}

/// `l=9,s=1` with optional `na=` and `beta=`.
pub fn parse_beam(text: &str, into: &mut ScatterConfig) -> Result<(), String> {
    for part in text.split(',').filter(|p| !p.trim().is_empty()) {
        let (key, value) = part.split_once('=').ok_or_else(|| format!("expected key=value, got `{part}`"))?;
        let value = value.trim();
        match key.trim() {
            "l" | "m" => into.l = value.parse().map_err(|e| format!("l: {e}"))?,
            "s" => into.s = value.parse().map_err(|e| format!("s: {e}"))?,
            "na" => into.na = value.parse().map_err(|e| format!("na: {e}"))?,
            "beta" => into.beta = value.parse().map_err(|e| format!("beta: {e}"))?,
            other => return Err(format!("unknown beam key `{other}`")),
        }
    }
    Ok(())
}
