//! Curve generators for the standard figures.

use rayon::prelude::*;

use crate::bellstate::{correlation_equal, mixture_weights, s_parameter, visibility};
use crate::channel::Pdtc;
use crate::chsh::{maximize_bell, try_maximize_bell};
use crate::detector::{DetectionMode, DetectorBank, DetectorParams};
use crate::error::{invalid, Result};
use crate::pdc::{self, SqueezingParam};

/// One labelled curve sampled on the figure's x grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub label: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FigureData {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub x: Vec<f64>,
    pub curves: Vec<Curve>,
}

pub fn linspace(start: f64, stop: f64, points: usize) -> Result<Vec<f64>> {
    if points == 0 {
        return Err(invalid("points", "grid must be nonempty"));
    }
    if points == 1 {
        return Ok(vec![start]);
    }
    let step = (stop - start) / (points - 1) as f64;
    Ok((0..points)
        .map(|i| {
            if i + 1 == points {
                stop
            } else {
                start + step * i as f64
            }
        })
        .collect())
}

pub fn logspace(start: f64, stop: f64, points: usize) -> Result<Vec<f64>> {
    if !(start > 0.0 && stop > 0.0) {
        return Err(invalid("grid", "log grid bounds must be positive"));
    }
    Ok(linspace(start.log10(), stop.log10(), points)?
        .into_iter()
        .map(|e| 10f64.powf(e))
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fig2Params {
    pub contrasts: Vec<f64>,
    pub points: usize,
}

impl Default for Fig2Params {
    fn default() -> Self {
        Self {
            contrasts: vec![1.0, 0.9, 0.8],
            points: 201,
        }
    }
}

/// Maximal Bell parameter against the cosine of the source phase.
pub fn fig2(p: &Fig2Params) -> Result<FigureData> {
    let x = linspace(-1.0, 1.0, p.points)?;
    let curves = p
        .contrasts
        .iter()
        .map(|&s| {
            let values = x
                .par_iter()
                .map(|&c| {
                    let phi = c.clamp(-1.0, 1.0).acos();
                    maximize_bell(move |a, b| correlation_equal(a, b, phi, s)).value
                })
                .collect();
            Curve {
                label: format!("S={s}"),
                values,
            }
        })
        .collect();
    Ok(FigureData {
        title: "Maximal Bell parameter vs cos(phi)".into(),
        x_label: "cos(phi)".into(),
        y_label: "B_max".into(),
        log_x: false,
        x,
        curves,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fig3Params {
    pub eta_c: f64,
    pub theta_bar: f64,
    pub sigmas: Vec<f64>,
    pub noise_min: f64,
    pub noise_max: f64,
    pub points: usize,
    pub mode: DetectionMode,
}

impl Default for Fig3Params {
    fn default() -> Self {
        Self {
            eta_c: 0.25,
            theta_bar: 7.7,
            sigmas: vec![0.1, 1.0, 2.0],
            noise_min: 1e-8,
            noise_max: 1e-4,
            points: 50,
            mode: DetectionMode::Pnr,
        }
    }
}

/// Maximal visibility against mean noise counts for a correlated
/// log-normal channel.
pub fn fig3(p: &Fig3Params) -> Result<FigureData> {
    let x = logspace(p.noise_min, p.noise_max, p.points)?;
    let mut curves = Vec::with_capacity(p.sigmas.len());
    for &sigma in &p.sigmas {
        let w = mixture_weights(&Pdtc::log_normal(p.theta_bar, sigma, true)?)?;
        let values = x
            .iter()
            .map(|&n| Ok(visibility(s_parameter(&w, p.eta_c, n, p.mode)?, 0.0)))
            .collect::<Result<Vec<f64>>>()?;
        curves.push(Curve {
            label: format!("sigma={sigma}"),
            values,
        });
    }
    Ok(FigureData {
        title: format!(
            "Visibility vs noise counts (eta_c={}, theta_bar={})",
            p.eta_c, p.theta_bar
        ),
        x_label: "N_nc".into(),
        y_label: "V+".into(),
        log_x: true,
        x,
        curves,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PdcFigureParams {
    pub theta_bar: f64,
    pub sigmas: Vec<f64>,
    pub noise: f64,
    /// Detector efficiency; the channel carries the remaining loss.
    pub eta_c: f64,
    pub tanh_min: f64,
    pub tanh_max: f64,
    pub points: usize,
    pub mode: DetectionMode,
    pub phi: f64,
}

impl PdcFigureParams {
    pub fn standard(mode: DetectionMode) -> Self {
        Self {
            theta_bar: 9.1,
            sigmas: vec![0.1, 2.0, 3.0],
            noise: 0.5e-6,
            eta_c: 1.0,
            tanh_min: 0.005,
            tanh_max: 0.5,
            points: 101,
            mode,
            phi: std::f64::consts::PI,
        }
    }
}

/// Maximal Bell parameter of one down-conversion configuration.
pub fn pdc_bell_max(
    bank: &DetectorBank,
    pdtc: &Pdtc,
    tanh_chi: SqueezingParam,
    phi: f64,
) -> Result<f64> {
    Ok(try_maximize_bell(|a, b| pdc::correlation(bank, pdtc, tanh_chi, a, b, phi))?.value)
}

/// Maximal Bell parameter against `tanh chi` for several turbulence
/// strengths.
pub fn pdc_figure(p: &PdcFigureParams) -> Result<FigureData> {
    let x = linspace(p.tanh_min, p.tanh_max, p.points)?;
    let bank = DetectorBank::equal(DetectorParams::new(p.eta_c, p.noise)?, p.mode);
    let mut curves = Vec::with_capacity(p.sigmas.len());
    for &sigma in &p.sigmas {
        let pdtc = Pdtc::log_normal(p.theta_bar, sigma, true)?;
        let values = x
            .par_iter()
            .map(|&t| pdc_bell_max(&bank, &pdtc, SqueezingParam::new(t)?, p.phi))
            .collect::<Result<Vec<f64>>>()?;
        curves.push(Curve {
            label: format!("sigma={sigma}"),
            values,
        });
    }
    let kind = match p.mode {
        DetectionMode::Pnr => "PNR",
        DetectionMode::OnOff => "on/off",
    };
    Ok(FigureData {
        title: format!(
            "Maximal Bell parameter vs tanh(chi), {kind} detectors (theta_bar={}, N_nc={})",
            p.theta_bar, p.noise
        ),
        x_label: "tanh(chi)".into(),
        y_label: "B_max".into(),
        log_x: false,
        x,
        curves,
    })
}
