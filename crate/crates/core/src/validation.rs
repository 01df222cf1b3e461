//! Equivalence matrix between the analytical models and the Fock-space
//! oracle at fixed (Dirac) channel transmissions.

use std::f64::consts::PI;

use rand::Rng;
use rayon::prelude::*;

use crate::bellstate::{self, MixtureWeights};
use crate::channel::{Pdtc, TransmissionSample};
use crate::chsh::CoincidenceTable;
use crate::detector::{DetectionMode, DetectorBank, DetectorParams};
use crate::error::{invalid, Result};
use crate::oracle::{fixed_channel_table, SourceSpec};
use crate::pdc::{self, SqueezingParam};
use crate::rng::stream_rng;

/// Absolute agreement required for the two-photon source.
pub const BELL_TOLERANCE: f64 = 1e-10;
/// Absolute agreement required for the down-conversion source.
pub const PDC_TOLERANCE: f64 = 1e-6;
/// Photons per site kept by the oracle for the down-conversion source.
pub const PDC_TRUNCATION: usize = 14;
pub const MAX_TANH_CHI: f64 = 0.3;

const ETA_RANGE: (f64, f64) = (0.05, 1.0);
const NOISE_MAX: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceKind {
    Bell,
    Pdc,
}

impl SourceKind {
    pub fn name(self) -> &'static str {
        match self {
            SourceKind::Bell => "bell",
            SourceKind::Pdc => "pdc",
        }
    }

    pub fn tolerance(self) -> f64 {
        match self {
            SourceKind::Bell => BELL_TOLERANCE,
            SourceKind::Pdc => PDC_TOLERANCE,
        }
    }
}

/// One cell of the equivalence matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquivalenceCase {
    pub source: SourceKind,
    pub mode: DetectionMode,
    /// Draw one detector for all four positions instead of four.
    pub equal_detectors: bool,
    pub tuples: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CaseReport {
    pub case: EquivalenceCase,
    pub max_deviation: f64,
    pub threshold: f64,
}

impl CaseReport {
    pub fn passed(&self) -> bool {
        self.max_deviation <= self.threshold
    }
}

/// Randomized parameters of one comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tuple {
    pub bank: DetectorBank,
    pub sample: TransmissionSample,
    pub theta_a: f64,
    pub theta_b: f64,
    pub phi: f64,
    pub tanh_chi: f64,
}

/// Both sources, both modes, equal and unequal detectors.
pub fn standard_matrix(bell_tuples: usize, pdc_tuples: usize) -> Vec<EquivalenceCase> {
    let mut out = Vec::new();
    for (source, tuples) in [
        (SourceKind::Bell, bell_tuples),
        (SourceKind::Pdc, pdc_tuples),
    ] {
        for mode in [DetectionMode::Pnr, DetectionMode::OnOff] {
            for equal_detectors in [true, false] {
                out.push(EquivalenceCase {
                    source,
                    mode,
                    equal_detectors,
                    tuples,
                });
            }
        }
    }
    out
}

fn random_detector<R: Rng + ?Sized>(rng: &mut R) -> DetectorParams {
    let eta = rng.random_range(ETA_RANGE.0..=ETA_RANGE.1);
    let noise = rng.random_range(0.0..=NOISE_MAX);
    DetectorParams::new(eta, noise).expect("sampled inside the valid range")
}

/// Draws a tuple. Equal-detector down-conversion tuples use a common
/// transmission and the singlet phase so that the one-scalar path is hit.
pub fn random_tuple<R: Rng + ?Sized>(rng: &mut R, case: &EquivalenceCase) -> Tuple {
    let bank = if case.equal_detectors {
        DetectorBank::equal(random_detector(rng), case.mode)
    } else {
        DetectorBank {
            t_a: random_detector(rng),
            r_a: random_detector(rng),
            t_b: random_detector(rng),
            r_b: random_detector(rng),
            mode: case.mode,
        }
    };
    let eta_a = rng.random_range(ETA_RANGE.0..=ETA_RANGE.1);
    let eta_b = rng.random_range(ETA_RANGE.0..=ETA_RANGE.1);
    let theta_a = rng.random_range(0.0..PI);
    let theta_b = rng.random_range(0.0..PI);
    let phi = rng.random_range(0.0..2.0 * PI);
    let tanh_chi = rng.random_range(0.0..=MAX_TANH_CHI);
    let singlet = case.source == SourceKind::Pdc && case.equal_detectors;
    Tuple {
        bank,
        sample: if singlet {
            TransmissionSample::new(eta_a, eta_a)
        } else {
            TransmissionSample::new(eta_a, eta_b)
        }
        .expect("sampled inside [0, 1]"),
        theta_a,
        theta_b,
        phi: if singlet { PI } else { phi },
        tanh_chi,
    }
}

/// Analytical table for a tuple.
pub fn analytical_table(source: SourceKind, t: &Tuple) -> Result<CoincidenceTable> {
    match source {
        SourceKind::Bell => Ok(bellstate::coincidence_table(
            &t.bank,
            &MixtureWeights::at(t.sample.eta_a, t.sample.eta_b),
            t.theta_a,
            t.theta_b,
            t.phi,
        )),
        SourceKind::Pdc => pdc::coincidence_table(
            &t.bank,
            &Pdtc::Dirac(t.sample),
            SqueezingParam::new(t.tanh_chi)?,
            t.theta_a,
            t.theta_b,
            t.phi,
        ),
    }
}

/// Oracle table for a tuple.
pub fn oracle_table(source: SourceKind, t: &Tuple) -> Result<CoincidenceTable> {
    let src = match source {
        SourceKind::Bell => SourceSpec::Bell { phi: t.phi },
        SourceKind::Pdc => SourceSpec::Pdc {
            tanh_chi: t.tanh_chi,
            phi: t.phi,
            n_max: PDC_TRUNCATION,
        },
    };
    fixed_channel_table(&src, &t.bank, t.sample, t.theta_a, t.theta_b)
}

/// Runs one cell. `perturbation` is added to the analytical (T, T)
/// probability and exists to confirm that the check can fail.
pub fn run_case(
    case: &EquivalenceCase,
    seed: u64,
    stream: u64,
    perturbation: f64,
) -> Result<CaseReport> {
    if case.tuples == 0 {
        return Err(invalid("tuples", "must be at least 1"));
    }
    let mut rng = stream_rng(seed, stream);
    let tuples: Vec<Tuple> = (0..case.tuples)
        .map(|_| random_tuple(&mut rng, case))
        .collect();
    let deviations = tuples
        .par_iter()
        .map(|t| {
            let mut analytical = analytical_table(case.source, t)?.to_array();
            analytical[0] += perturbation;
            let oracle = oracle_table(case.source, t)?;
            Ok(CoincidenceTable::from_array(analytical).max_abs_diff(&oracle))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(CaseReport {
        case: *case,
        max_deviation: deviations.into_iter().fold(0.0, f64::max),
        threshold: case.source.tolerance(),
    })
}

/// Runs every cell, each on its own generator stream.
pub fn run_matrix(
    cases: &[EquivalenceCase],
    seed: u64,
    perturbation: f64,
) -> Result<Vec<CaseReport>> {
    cases
        .iter()
        .enumerate()
        .map(|(i, c)| run_case(c, seed, i as u64, perturbation))
        .collect()
}
