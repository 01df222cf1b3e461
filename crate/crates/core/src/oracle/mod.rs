//! Brute-force reference computation in a truncated four-mode Fock space.
//!
//! Two routes are provided. The density route applies Kraus loss, the
//! analyzer unitaries and the detector POVM to a dense density matrix; it
//! is used for states with few photons. The pure route rotates the pure
//! source state and folds the per-site loss into the diagonal POVM by
//! binomial thinning, which is exact because equal loss on both
//! polarizations commutes with the analyzer. It handles the down-conversion
//! state at high truncation.

pub mod density;
pub mod fock;
pub mod povm;

use rayon::prelude::*;

use crate::channel::{Pdtc, TransmissionSample};
use crate::chsh::CoincidenceTable;
use crate::detector::DetectorBank;
use crate::error::{invalid, Result};
use crate::rng::{chunks, stream_rng};

pub use density::DensityMatrix;
pub use fock::{build_bell_state, build_pdc_state, pdc_tail_bound, FockState4, Mode, Site};
pub use povm::{click_probability, click_probability_pure, povm_completeness, povm_element};

/// Source to be simulated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SourceSpec {
    Bell {
        phi: f64,
    },
    Pdc {
        tanh_chi: f64,
        phi: f64,
        n_max: usize,
    },
}

impl SourceSpec {
    pub fn build(&self) -> Result<FockState4> {
        match *self {
            SourceSpec::Bell { phi } => build_bell_state(phi, 1),
            SourceSpec::Pdc {
                tanh_chi,
                phi,
                n_max,
            } => build_pdc_state(tanh_chi, phi, n_max),
        }
    }
}

/// Coincidence table for one fixed transmission via the pure route.
pub fn fixed_channel_table(
    source: &SourceSpec,
    bank: &DetectorBank,
    sample: TransmissionSample,
    theta_a: f64,
    theta_b: f64,
) -> Result<CoincidenceTable> {
    let rotated = source.build()?.rotated(theta_a, theta_b);
    Ok(povm::table_from_pure(
        &rotated,
        bank,
        sample.eta_a,
        sample.eta_b,
    ))
}

/// Coincidence table for one fixed transmission via explicit density-matrix
/// evolution.
pub fn density_route_table(
    state: &FockState4,
    bank: &DetectorBank,
    sample: TransmissionSample,
    theta_a: f64,
    theta_b: f64,
) -> Result<CoincidenceTable> {
    let rho = DensityMatrix::from_pure(state)
        .apply_site_losses(sample.eta_a, sample.eta_b)?
        .rotated(theta_a, theta_b);
    Ok(povm::table_from_density(&rho, bank))
}

/// Monte Carlo estimate with its standard errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AveragedStatistics {
    pub table: CoincidenceTable,
    pub std_error: CoincidenceTable,
    pub samples: usize,
}

#[derive(Debug, Clone, Copy)]
struct Moments {
    count: f64,
    mean: [f64; 4],
    m2: [f64; 4],
}

impl Moments {
    fn empty() -> Self {
        Self {
            count: 0.0,
            mean: [0.0; 4],
            m2: [0.0; 4],
        }
    }

    fn push(&mut self, x: [f64; 4]) {
        self.count += 1.0;
        for (k, xk) in x.into_iter().enumerate() {
            let delta = xk - self.mean[k];
            self.mean[k] += delta / self.count;
            self.m2[k] += delta * (xk - self.mean[k]);
        }
    }

    fn merge(self, other: Self) -> Self {
        if other.count == 0.0 {
            return self;
        }
        if self.count == 0.0 {
            return other;
        }
        let count = self.count + other.count;
        let mut out = Self {
            count,
            ..Self::empty()
        };
        for k in 0..4 {
            let delta = other.mean[k] - self.mean[k];
            out.mean[k] = self.mean[k] + delta * other.count / count;
            out.m2[k] = self.m2[k] + other.m2[k] + delta * delta * self.count * other.count / count;
        }
        out
    }
}

/// Averages the fixed-channel oracle over PDTC draws. Draws are split into
/// chunks with independent generator streams and merged in chunk order, so
/// the result depends only on `seed`.
pub fn averaged_statistics(
    source: &SourceSpec,
    bank: &DetectorBank,
    pdtc: &Pdtc,
    theta_a: f64,
    theta_b: f64,
    n_samples: usize,
    seed: u64,
) -> Result<AveragedStatistics> {
    if n_samples == 0 {
        return Err(invalid("n_samples", "must be at least 1"));
    }
    let rotated = source.build()?.rotated(theta_a, theta_b);
    let parts: Vec<(u64, usize)> = chunks(n_samples).collect();
    let partial: Vec<Moments> = parts
        .par_iter()
        .map(|&(stream, len)| {
            let mut rng = stream_rng(seed, stream);
            let mut m = Moments::empty();
            for _ in 0..len {
                let s = pdtc.sample(&mut rng);
                m.push(povm::table_from_pure(&rotated, bank, s.eta_a, s.eta_b).to_array());
            }
            m
        })
        .collect();
    let total = partial.into_iter().fold(Moments::empty(), Moments::merge);
    let n = total.count;
    let se = total.m2.map(|m2| {
        if n > 1.0 {
            (m2 / (n - 1.0) / n).sqrt()
        } else {
            0.0
        }
    });
    Ok(AveragedStatistics {
        table: CoincidenceTable::from_array(total.mean),
        std_error: CoincidenceTable::from_array(se),
        samples: n_samples,
    })
}
