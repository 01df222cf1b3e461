//! TOML run configuration. Every section and key is optional; omitted values
//! fall back to the standard figure parameters.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use bellturb::channel::parse_samples;
use bellturb::chsh::AngleSettings;
use bellturb::estimation::ProbeConfig;
use bellturb::figures::{linspace, logspace, Fig2Params, Fig3Params, PdcFigureParams};
use bellturb::{DetectionMode, DetectorBank, DetectorParams, Pdtc};
use serde::Deserialize;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Optional guard: when set, must match the subcommand.
    pub experiment: Option<String>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    #[serde(default)]
    pub detectors: DetectorsSection,
    #[serde(default)]
    pub pdtc: PdtcSection,
    #[serde(default)]
    pub source: SourceSection,
    #[serde(default)]
    pub angles: AnglesSection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub probe: ProbeSection,
    #[serde(default)]
    pub fig2: Fig2Section,
    #[serde(default)]
    pub fig3: Fig3Section,
    #[serde(default)]
    pub fig4: PdcFigSection,
    #[serde(default)]
    pub fig5: PdcFigSection,
    #[serde(default)]
    pub oracle_check: OracleCheckSection,
    /// Directory of the config file, used to resolve relative paths.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeName {
    Pnr,
    Onoff,
}

impl From<ModeName> for DetectionMode {
    fn from(m: ModeName) -> Self {
        match m {
            ModeName::Pnr => DetectionMode::Pnr,
            ModeName::Onoff => DetectionMode::OnOff,
        }
    }
}

pub fn mode_name(mode: DetectionMode) -> &'static str {
    match mode {
        DetectionMode::Pnr => "pnr",
        DetectionMode::OnOff => "onoff",
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorEntry {
    pub eta: f64,
    pub noise: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectorsSection {
    pub mode: ModeName,
    pub eta: f64,
    pub noise: f64,
    pub t_a: Option<DetectorEntry>,
    pub r_a: Option<DetectorEntry>,
    pub t_b: Option<DetectorEntry>,
    pub r_b: Option<DetectorEntry>,
}

impl Default for DetectorsSection {
    fn default() -> Self {
        Self {
            mode: ModeName::Pnr,
            eta: 0.25,
            noise: 1e-6,
            t_a: None,
            r_a: None,
            t_b: None,
            r_b: None,
        }
    }
}

impl DetectorsSection {
    pub fn bank(&self) -> Result<DetectorBank> {
        let pick = |slot: Option<DetectorEntry>, name: &str| -> Result<DetectorParams> {
            let e = slot.unwrap_or(DetectorEntry {
                eta: self.eta,
                noise: self.noise,
            });
            DetectorParams::new(e.eta, e.noise).with_context(|| format!("detectors.{name}"))
        };
        Ok(DetectorBank {
            t_a: pick(self.t_a, "t_a")?,
            r_a: pick(self.r_a, "r_a")?,
            t_b: pick(self.t_b, "t_b")?,
            r_b: pick(self.r_b, "r_b")?,
            mode: self.mode.into(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PdtcKind {
    Dirac,
    Lognormal,
    Empirical,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PdtcSection {
    pub kind: PdtcKind,
    pub theta_bar: f64,
    pub sigma: f64,
    pub correlated: bool,
    pub eta_a: f64,
    pub eta_b: f64,
    pub samples_path: Option<PathBuf>,
}

impl Default for PdtcSection {
    fn default() -> Self {
        Self {
            kind: PdtcKind::Lognormal,
            theta_bar: 7.7,
            sigma: 1.0,
            correlated: true,
            eta_a: 1.0,
            eta_b: 1.0,
            samples_path: None,
        }
    }
}

impl PdtcSection {
    pub fn build(&self, base_dir: &Path) -> Result<Pdtc> {
        Ok(match self.kind {
            PdtcKind::Dirac => Pdtc::dirac(self.eta_a, self.eta_b)?,
            PdtcKind::Lognormal => Pdtc::log_normal(self.theta_bar, self.sigma, self.correlated)?,
            PdtcKind::Empirical => {
                let Some(rel) = &self.samples_path else {
                    bail!("pdtc.samples_path is required for kind = \"empirical\"");
                };
                let path = base_dir.join(rel);
                let text = std::fs::read_to_string(&path)
                    .with_context(|| format!("reading {}", path.display()))?;
                Pdtc::empirical(
                    parse_samples(&text).with_context(|| format!("parsing {}", path.display()))?,
                )?
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceKindName {
    Bell,
    Pdc,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SourceSection {
    pub kind: SourceKindName,
    pub tanh_chi: f64,
    pub phi: f64,
}

impl Default for SourceSection {
    fn default() -> Self {
        Self {
            kind: SourceKindName::Bell,
            tanh_chi: 0.1,
            phi: std::f64::consts::PI,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnglesSection {
    pub a1: f64,
    pub b1: f64,
    pub a2: f64,
    pub b2: f64,
}

impl Default for AnglesSection {
    fn default() -> Self {
        let s = AngleSettings::standard();
        Self {
            a1: s.a1,
            b1: s.b1,
            a2: s.a2,
            b2: s.b2,
        }
    }
}

impl AnglesSection {
    pub fn settings(&self) -> AngleSettings {
        AngleSettings::new(self.a1, self.b1, self.a2, self.b2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    TanhChi,
    Phi,
    Noise,
    Eta,
    ThetaBar,
    Sigma,
}

impl SweepParameter {
    pub fn name(self) -> &'static str {
        match self {
            SweepParameter::TanhChi => "tanh_chi",
            SweepParameter::Phi => "phi",
            SweepParameter::Noise => "noise",
            SweepParameter::Eta => "eta",
            SweepParameter::ThetaBar => "theta_bar",
            SweepParameter::Sigma => "sigma",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    Linear,
    Log,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub parameter: SweepParameter,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    pub scale: Scale,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            parameter: SweepParameter::Phi,
            start: 0.0,
            stop: std::f64::consts::PI,
            points: 21,
            scale: Scale::Linear,
        }
    }
}

impl SweepSection {
    pub fn grid(&self) -> Result<Vec<f64>> {
        if self.points == 0 {
            bail!("sweep.points must be at least 1");
        }
        Ok(match self.scale {
            Scale::Linear => linspace(self.start, self.stop, self.points)?,
            Scale::Log => logspace(self.start, self.stop, self.points)?,
        })
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeSection {
    pub alpha_a_sq: Option<f64>,
    pub alpha_b_sq: Option<f64>,
    /// Sizes both probes so that the mean count per shot is this value.
    pub mean_counts: f64,
    pub eta_c: f64,
    pub shots: usize,
}

impl Default for ProbeSection {
    fn default() -> Self {
        Self {
            alpha_a_sq: None,
            alpha_b_sq: None,
            mean_counts: 50.0,
            eta_c: 0.25,
            shots: 1_000_000,
        }
    }
}

impl ProbeSection {
    /// Explicit probe intensities win; otherwise they follow from
    /// `mean_counts` and the channel's first moments.
    pub fn build(&self, pdtc: &Pdtc, seed: u64) -> Result<ProbeConfig> {
        let size = |explicit: Option<f64>, mean_eta: f64| {
            explicit.unwrap_or(self.mean_counts / (self.eta_c * mean_eta))
        };
        let a = size(self.alpha_a_sq, pdtc.moment(1, 0)?);
        let b = size(self.alpha_b_sq, pdtc.moment(0, 1)?);
        Ok(ProbeConfig::new(a, b, self.eta_c, self.shots, seed)?)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Fig2Section {
    pub contrasts: Vec<f64>,
    pub points: usize,
}

impl Default for Fig2Section {
    fn default() -> Self {
        let d = Fig2Params::default();
        Self {
            contrasts: d.contrasts,
            points: d.points,
        }
    }
}

impl Fig2Section {
    pub fn params(&self) -> Fig2Params {
        Fig2Params {
            contrasts: self.contrasts.clone(),
            points: self.points,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Fig3Section {
    pub eta_c: f64,
    pub theta_bar: f64,
    pub sigmas: Vec<f64>,
    pub noise_min: f64,
    pub noise_max: f64,
    pub points: usize,
    pub mode: ModeName,
}

impl Default for Fig3Section {
    fn default() -> Self {
        let d = Fig3Params::default();
        Self {
            eta_c: d.eta_c,
            theta_bar: d.theta_bar,
            sigmas: d.sigmas,
            noise_min: d.noise_min,
            noise_max: d.noise_max,
            points: d.points,
            mode: ModeName::Pnr,
        }
    }
}

impl Fig3Section {
    pub fn params(&self) -> Fig3Params {
        Fig3Params {
            eta_c: self.eta_c,
            theta_bar: self.theta_bar,
            sigmas: self.sigmas.clone(),
            noise_min: self.noise_min,
            noise_max: self.noise_max,
            points: self.points,
            mode: self.mode.into(),
        }
    }
}

/// Overrides for the down-conversion figures; the detection mode is fixed
/// by the subcommand.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PdcFigSection {
    pub theta_bar: Option<f64>,
    pub sigmas: Option<Vec<f64>>,
    pub noise: Option<f64>,
    pub eta_c: Option<f64>,
    pub tanh_min: Option<f64>,
    pub tanh_max: Option<f64>,
    pub points: Option<usize>,
    pub phi: Option<f64>,
}

impl PdcFigSection {
    pub fn params(&self, mode: DetectionMode) -> PdcFigureParams {
        let d = PdcFigureParams::standard(mode);
        PdcFigureParams {
            theta_bar: self.theta_bar.unwrap_or(d.theta_bar),
            sigmas: self.sigmas.clone().unwrap_or(d.sigmas),
            noise: self.noise.unwrap_or(d.noise),
            eta_c: self.eta_c.unwrap_or(d.eta_c),
            tanh_min: self.tanh_min.unwrap_or(d.tanh_min),
            tanh_max: self.tanh_max.unwrap_or(d.tanh_max),
            points: self.points.unwrap_or(d.points),
            mode,
            phi: self.phi.unwrap_or(d.phi),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleCheckSection {
    pub bell_tuples: usize,
    pub pdc_tuples: usize,
    /// Added to one analytical probability; nonzero values must fail.
    pub perturbation: f64,
}

impl Default for OracleCheckSection {
    fn default() -> Self {
        Self {
            bell_tuples: 50,
            pdc_tuples: 20,
            perturbation: 0.0,
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg: RunConfig = toml::from_str(text)?;
        cfg.base_dir = base_dir.to_path_buf();
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse(&text, &base).with_context(|| format!("parsing {}", path.display()))
    }
}
