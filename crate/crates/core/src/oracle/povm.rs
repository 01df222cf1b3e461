use super::density::DensityMatrix;
use super::fock::{binomial, factorial, FockState4};
use crate::chsh::CoincidenceTable;
use crate::detector::{DetectionMode, DetectorBank, DetectorParams, Pair};

/// Cumulative Poisson tail below which noise sums are cut.
const POISSON_TAIL: f64 = 1e-15;

pub fn poisson_pmf(k: usize, mean: f64) -> f64 {
    if mean == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    (-mean + k as f64 * mean.ln() - ln_factorial(k)).exp()
}

fn ln_factorial(k: usize) -> f64 {
    if k < 30 {
        factorial(k).ln()
    } else {
        (1..=k).map(|i| (i as f64).ln()).sum()
    }
}

/// Diagonal element `<n| Pi^(m) |n>`: `m` counts from `n` photons, each
/// detected with the detector efficiency, plus Poisson noise.
pub fn povm_element(n: usize, m: usize, det: DetectorParams) -> f64 {
    let eta = det.eta();
    (0..=n.min(m))
        .map(|k| {
            binomial(n, k)
                * eta.powi(k as i32)
                * (1.0 - eta).powi((n - k) as i32)
                * poisson_pmf(m - k, det.noise())
        })
        .sum()
}

/// `sum_m <n|Pi^(m)|n>`, continued until the Poisson tail is negligible.
pub fn povm_completeness(n: usize, det: DetectorParams) -> f64 {
    let mut total = 0.0;
    let mut noise_mass = 0.0;
    let mut m = 0;
    loop {
        total += povm_element(n, m, det);
        if m >= n {
            noise_mass += poisson_pmf(m - n, det.noise());
            if 1.0 - noise_mass < POISSON_TAIL {
                return total;
            }
        }
        m += 1;
        if m > n + 10_000 {
            return total;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Click,
    Silent,
}

/// Probability of the outcome given `n` photons at the detector.
pub fn outcome_weight(n: usize, det: DetectorParams, mode: DetectionMode, outcome: Outcome) -> f64 {
    match (outcome, mode) {
        (Outcome::Silent, _) => povm_element(n, 0, det),
        (Outcome::Click, DetectionMode::Pnr) => povm_element(n, 1, det),
        (Outcome::Click, DetectionMode::OnOff) => {
            let eta = det.eta();
            if n > 0 && eta == 1.0 {
                return 1.0;
            }
            let log_silent = n as f64 * (-eta).ln_1p() - det.noise();
            -log_silent.exp_m1()
        }
    }
}

/// Outcome weight after the photons first pass a pure-loss channel of
/// transmissivity `channel` (binomial thinning).
pub fn thinned_weight(
    n: usize,
    channel: f64,
    det: DetectorParams,
    mode: DetectionMode,
    outcome: Outcome,
) -> f64 {
    (0..=n)
        .map(|k| {
            binomial(n, k)
                * channel.powi(k as i32)
                * (1.0 - channel).powi((n - k) as i32)
                * outcome_weight(k, det, mode, outcome)
        })
        .sum()
}

fn outcomes(pair: Pair) -> [Outcome; 4] {
    let click = |on: bool| if on { Outcome::Click } else { Outcome::Silent };
    [
        click(pair.a.index() == 0),
        click(pair.a.index() == 1),
        click(pair.b.index() == 0),
        click(pair.b.index() == 1),
    ]
}

/// Postselected coincidence probability from a density operator already in
/// the analyzer `(T_A, R_A, T_B, R_B)` basis.
pub fn click_probability(rho: &DensityMatrix, bank: &DetectorBank, pair: Pair) -> f64 {
    let dets = bank.as_array();
    let out = outcomes(pair);
    let tables = weight_tables(rho.cap(), |d, n| {
        outcome_weight(n, dets[d], bank.mode, out[d])
    });
    rho.populations()
        .map(|(n, p)| p * (0..4).map(|d| tables[d][n[d]]).product::<f64>())
        .sum()
}

/// Same probability for a pure analyzer-basis state sent through fixed
/// per-site channels.
pub fn click_probability_pure(
    state: &FockState4,
    bank: &DetectorBank,
    pair: Pair,
    eta_a: f64,
    eta_b: f64,
) -> f64 {
    let dets = bank.as_array();
    let out = outcomes(pair);
    let channel = [eta_a, eta_a, eta_b, eta_b];
    let tables = weight_tables(state.cap(), |d, n| {
        thinned_weight(n, channel[d], dets[d], bank.mode, out[d])
    });
    state
        .amplitudes()
        .iter()
        .enumerate()
        .filter(|(_, a)| a.norm_sqr() != 0.0)
        .map(|(i, a)| {
            let n = state.occupations(i);
            a.norm_sqr() * (0..4).map(|d| tables[d][n[d]]).product::<f64>()
        })
        .sum()
}

fn weight_tables(cap: usize, f: impl Fn(usize, usize) -> f64) -> [Vec<f64>; 4] {
    std::array::from_fn(|d| (0..=cap).map(|n| f(d, n)).collect())
}

pub fn table_from_density(rho: &DensityMatrix, bank: &DetectorBank) -> CoincidenceTable {
    CoincidenceTable::from_array(Pair::ALL.map(|p| click_probability(rho, bank, p)))
}

pub fn table_from_pure(
    state: &FockState4,
    bank: &DetectorBank,
    eta_a: f64,
    eta_b: f64,
) -> CoincidenceTable {
    CoincidenceTable::from_array(
        Pair::ALL.map(|p| click_probability_pure(state, bank, p, eta_a, eta_b)),
    )
}
