//! Reconstruction of transmission moments from coherent-probe photocounts.
//!
//! A coherent probe with mean photon number `alpha^2` yields Poisson counts
//! with mean `eta_c * eta * alpha^2` for each channel realization, so the
//! falling-factorial moments of the counts equal scaled moments of the
//! transmission.

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;

use crate::channel::Pdtc;
use crate::error::{invalid, Error, Result};
use crate::rng::{chunks, stream_rng};

/// Expected total counts per arm below which inversion is flagged.
pub const MIN_EXPECTED_COUNTS: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeConfig {
    pub alpha_a_sq: f64,
    pub alpha_b_sq: f64,
    pub eta_c: f64,
    pub shots: usize,
    pub seed: u64,
}

impl ProbeConfig {
    pub fn new(
        alpha_a_sq: f64,
        alpha_b_sq: f64,
        eta_c: f64,
        shots: usize,
        seed: u64,
    ) -> Result<Self> {
        for (name, v) in [("alpha_a_sq", alpha_a_sq), ("alpha_b_sq", alpha_b_sq)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(invalid(name, format!("{v} must be finite and >= 0")));
            }
        }
        if !(0.0..=1.0).contains(&eta_c) {
            return Err(invalid("eta_c", format!("{eta_c} is outside [0, 1]")));
        }
        if shots == 0 {
            return Err(invalid("shots", "must be at least 1"));
        }
        Ok(Self {
            alpha_a_sq,
            alpha_b_sq,
            eta_c,
            shots,
            seed,
        })
    }

    /// Count rate per unit transmission on each arm.
    pub fn scales(&self) -> (f64, f64) {
        (self.eta_c * self.alpha_a_sq, self.eta_c * self.alpha_b_sq)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CountRecord {
    pub n_a: u64,
    pub n_b: u64,
}

fn poisson_draw<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean)
        .expect("finite positive mean")
        .sample(rng) as u64
}

pub fn simulate_photocounts(probe: &ProbeConfig, pdtc: &Pdtc) -> Vec<CountRecord> {
    let (scale_a, scale_b) = probe.scales();
    let parts: Vec<(u64, usize)> = chunks(probe.shots).collect();
    parts
        .par_iter()
        .map(|&(stream, len)| {
            let mut rng = stream_rng(probe.seed, stream);
            (0..len)
                .map(|_| {
                    let s = pdtc.sample(&mut rng);
                    let n_a = poisson_draw(scale_a * s.eta_a, &mut rng);
                    let n_b = poisson_draw(scale_b * s.eta_b, &mut rng);
                    CountRecord { n_a, n_b }
                })
                .collect::<Vec<_>>()
        })
        .collect::<Vec<_>>()
        .concat()
}

/// Sample mean of `n_a^n * n_b^m`.
pub fn count_moments(records: &[CountRecord], n: u32, m: u32) -> Result<f64> {
    mean_of(records, |r| {
        (r.n_a as f64).powi(n as i32) * (r.n_b as f64).powi(m as i32)
    })
}

fn falling(x: u64, k: u32) -> f64 {
    (0..k as u64).map(|i| x.saturating_sub(i) as f64).product()
}

/// Sample mean of `(n_a)_n (n_b)_m` with `(x)_k = x (x-1) ... (x-k+1)`.
pub fn factorial_moment(records: &[CountRecord], n: u32, m: u32) -> Result<f64> {
    mean_of(records, |r| falling(r.n_a, n) * falling(r.n_b, m))
}

fn mean_of(records: &[CountRecord], f: impl Fn(&CountRecord) -> f64) -> Result<f64> {
    if records.is_empty() {
        return Err(Error::Empty("count records"));
    }
    Ok(crate::quadrature::neumaier_sum(records.iter().map(f)) / records.len() as f64)
}

/// Count moments entering the first- and second-order inversion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawCountMoments {
    pub a: f64,
    pub b: f64,
    pub ab: f64,
    pub a2: f64,
    pub b2: f64,
}

impl RawCountMoments {
    pub fn from_records(records: &[CountRecord]) -> Result<Self> {
        Ok(Self {
            a: count_moments(records, 1, 0)?,
            b: count_moments(records, 0, 1)?,
            ab: count_moments(records, 1, 1)?,
            a2: count_moments(records, 2, 0)?,
            b2: count_moments(records, 0, 2)?,
        })
    }

    /// Infinite-shot values for a Poisson mixture over `pdtc`.
    pub fn exact(probe: &ProbeConfig, pdtc: &Pdtc) -> Result<Self> {
        let (la, lb) = probe.scales();
        let [ea, eb, eab, ea2, eb2] = pdtc.average_vec(|s| {
            [
                s.eta_a,
                s.eta_b,
                s.eta_a * s.eta_b,
                s.eta_a * s.eta_a,
                s.eta_b * s.eta_b,
            ]
        })?;
        Ok(Self {
            a: la * ea,
            b: lb * eb,
            ab: la * lb * eab,
            a2: la * la * ea2 + la * ea,
            b2: lb * lb * eb2 + lb * eb,
        })
    }
}

/// Reconstructed transmission moments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentEstimates {
    pub eta_a: f64,
    pub eta_b: f64,
    pub eta_ab: f64,
    pub eta_a2: f64,
    pub eta_b2: f64,
    /// Too few expected counts on arm A for a stable inversion.
    pub ill_conditioned_a: bool,
    pub ill_conditioned_b: bool,
}

fn positive_scales(probe: &ProbeConfig) -> Result<(f64, f64)> {
    let (la, lb) = probe.scales();
    if !(la > 0.0 && lb > 0.0) {
        return Err(invalid(
            "probe",
            "both arms need eta_c * alpha^2 > 0 to invert count moments",
        ));
    }
    Ok((la, lb))
}

/// Inverts count moments into transmission moments.
pub fn invert(raw: &RawCountMoments, probe: &ProbeConfig) -> Result<MomentEstimates> {
    let (la, lb) = positive_scales(probe)?;
    let shots = probe.shots as f64;
    Ok(MomentEstimates {
        eta_a: raw.a / la,
        eta_b: raw.b / lb,
        eta_ab: raw.ab / (la * lb),
        eta_a2: (raw.a2 - raw.a) / (la * la),
        eta_b2: (raw.b2 - raw.b) / (lb * lb),
        ill_conditioned_a: raw.a * shots < MIN_EXPECTED_COUNTS,
        ill_conditioned_b: raw.b * shots < MIN_EXPECTED_COUNTS,
    })
}

pub fn pdtc_moments_from_counts(
    records: &[CountRecord],
    probe: &ProbeConfig,
) -> Result<MomentEstimates> {
    invert(&RawCountMoments::from_records(records)?, probe)
}

/// Estimate of `<eta_a^n eta_b^m>` of any order from factorial moments.
pub fn estimate_moment(
    records: &[CountRecord],
    probe: &ProbeConfig,
    n: u32,
    m: u32,
) -> Result<f64> {
    let (la, lb) = positive_scales(probe)?;
    Ok(factorial_moment(records, n, m)? / (la.powi(n as i32) * lb.powi(m as i32)))
}
