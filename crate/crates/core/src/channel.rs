//! Distributions of the channel power transmission and averages over them.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{invalid, Error, Result};
use crate::quadrature::{neumaier_sum, Integrator};

/// Half-width of the quadrature window in units of sigma.
const WINDOW_SIGMAS: f64 = 12.0;

/// Power transmissions of the two channels for one realization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransmissionSample {
    pub eta_a: f64,
    pub eta_b: f64,
}

impl TransmissionSample {
    pub fn new(eta_a: f64, eta_b: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta_a) {
            return Err(invalid("eta_a", format!("{eta_a} is outside [0, 1]")));
        }
        if !(0.0..=1.0).contains(&eta_b) {
            return Err(invalid("eta_b", format!("{eta_b} is outside [0, 1]")));
        }
        Ok(Self { eta_a, eta_b })
    }

    /// Both channels share the same transmission.
    pub fn common(eta: f64) -> Result<Self> {
        Self::new(eta, eta)
    }

    pub fn swapped(self) -> Self {
        Self {
            eta_a: self.eta_b,
            eta_b: self.eta_a,
        }
    }
}

/// Parses whitespace- or comma-separated two-column text, one sample per line.
/// Blank lines and lines starting with `#` are skipped.
pub fn parse_samples(text: &str) -> Result<Vec<TransmissionSample>> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .collect();
        if fields.len() != 2 {
            return Err(invalid(
                "samples",
                format!(
                    "line {}: expected two columns, found {}",
                    lineno + 1,
                    fields.len()
                ),
            ));
        }
        let parse = |s: &str| {
            s.parse::<f64>()
                .map_err(|e| invalid("samples", format!("line {}: {e}", lineno + 1)))
        };
        out.push(TransmissionSample::new(
            parse(fields[0])?,
            parse(fields[1])?,
        )?);
    }
    Ok(out)
}

/// Log-normal transmission, normally distributed in `theta = -ln eta`,
/// truncated to `eta <= 1` and renormalized.
#[derive(Debug, Clone, PartialEq)]
pub struct LogNormal {
    theta_bar: f64,
    sigma: f64,
    correlated: bool,
    lo: f64,
    hi: f64,
    /// Integral of the unnormalized Gaussian weight over `[lo, hi]`.
    mass: f64,
}

impl LogNormal {
    pub fn new(theta_bar: f64, sigma: f64, correlated: bool) -> Result<Self> {
        if !(theta_bar > 0.0 && theta_bar.is_finite()) {
            return Err(invalid(
                "theta_bar",
                format!("{theta_bar} must be finite and > 0"),
            ));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(invalid("sigma", format!("{sigma} must be finite and > 0")));
        }
        let lo = (theta_bar - WINDOW_SIGMAS * sigma).max(0.0);
        let hi = theta_bar + WINDOW_SIGMAS * sigma;
        let mut ln = Self {
            theta_bar,
            sigma,
            correlated,
            lo,
            hi,
            mass: 1.0,
        };
        let [mass] = Integrator::new(1e-13).integrate(|t| [ln.weight(t)], lo, hi)?;
        ln.mass = mass;
        Ok(ln)
    }

    pub fn theta_bar(&self) -> f64 {
        self.theta_bar
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn correlated(&self) -> bool {
        self.correlated
    }

    /// Integration window in theta.
    pub fn window(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    fn weight(&self, theta: f64) -> f64 {
        let z = (theta - self.theta_bar) / self.sigma;
        (-0.5 * z * z).exp()
    }

    /// Normalized density of `theta` on the truncated support.
    pub fn theta_density(&self, theta: f64) -> f64 {
        if theta < 0.0 {
            0.0
        } else {
            self.weight(theta) / self.mass
        }
    }

    fn sample_eta<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let normal = Normal::new(self.theta_bar, self.sigma).expect("validated sigma");
        loop {
            let theta: f64 = normal.sample(rng);
            if theta >= 0.0 {
                return (-theta).exp();
            }
        }
    }

    fn average<const K: usize, F>(&self, q: &Integrator, f: &F) -> Result<[f64; K]>
    where
        F: Fn(TransmissionSample) -> Result<[f64; K]>,
    {
        let raw = if self.correlated {
            q.try_integrate(
                |theta| {
                    let eta = (-theta).exp();
                    let w = self.weight(theta);
                    let v = f(TransmissionSample {
                        eta_a: eta,
                        eta_b: eta,
                    })?;
                    Ok(v.map(|x| w * x))
                },
                self.lo,
                self.hi,
            )?
        } else {
            q.try_integrate(
                |theta_a| {
                    let eta_a = (-theta_a).exp();
                    let inner = q.try_integrate(
                        |theta_b| {
                            let eta_b = (-theta_b).exp();
                            let w = self.weight(theta_b);
                            Ok(f(TransmissionSample { eta_a, eta_b })?.map(|x| w * x))
                        },
                        self.lo,
                        self.hi,
                    )?;
                    let w = self.weight(theta_a) / self.mass;
                    Ok(inner.map(|x| w * x))
                },
                self.lo,
                self.hi,
            )?
        };
        Ok(raw.map(|x| x / self.mass))
    }
}

/// Log-normal density of the transmission itself, untruncated.
pub fn log_normal_density(eta: f64, theta_bar: f64, sigma: f64) -> Result<f64> {
    if !(eta > 0.0) {
        return Err(invalid("eta", format!("density needs eta > 0, got {eta}")));
    }
    if !(sigma > 0.0) {
        return Err(invalid(
            "sigma",
            format!("density needs sigma > 0, got {sigma}"),
        ));
    }
    let z = (eta.ln() + theta_bar) / sigma;
    Ok((-0.5 * z * z).exp() / ((2.0 * std::f64::consts::PI).sqrt() * sigma * eta))
}

/// Probability distribution of the transmission coefficients.
#[derive(Debug, Clone, PartialEq)]
pub enum Pdtc {
    /// Non-fluctuating loss.
    Dirac(TransmissionSample),
    LogNormal(LogNormal),
    /// Equally weighted sample points.
    Empirical(Vec<TransmissionSample>),
}

impl Pdtc {
    pub fn dirac(eta_a: f64, eta_b: f64) -> Result<Self> {
        Ok(Pdtc::Dirac(TransmissionSample::new(eta_a, eta_b)?))
    }

    pub fn log_normal(theta_bar: f64, sigma: f64, correlated: bool) -> Result<Self> {
        Ok(Pdtc::LogNormal(LogNormal::new(
            theta_bar, sigma, correlated,
        )?))
    }

    pub fn empirical(samples: Vec<TransmissionSample>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Empty("empirical transmission samples"));
        }
        for s in &samples {
            TransmissionSample::new(s.eta_a, s.eta_b)?;
        }
        Ok(Pdtc::Empirical(samples))
    }

    /// True when both channels always carry the same transmission.
    pub fn is_correlated(&self) -> bool {
        match self {
            Pdtc::Dirac(s) => s.eta_a == s.eta_b,
            Pdtc::LogNormal(ln) => ln.correlated,
            Pdtc::Empirical(v) => v.iter().all(|s| s.eta_a == s.eta_b),
        }
    }

    pub fn average<F>(&self, f: F) -> Result<f64>
    where
        F: Fn(TransmissionSample) -> f64,
    {
        let [v] = self.average_vec(|s| [f(s)])?;
        Ok(v)
    }

    /// Averages several functionals on one shared discretization.
    pub fn average_vec<const K: usize, F>(&self, f: F) -> Result<[f64; K]>
    where
        F: Fn(TransmissionSample) -> [f64; K],
    {
        self.try_average_vec(|s| Ok(f(s)))
    }

    pub fn try_average_vec<const K: usize, F>(&self, f: F) -> Result<[f64; K]>
    where
        F: Fn(TransmissionSample) -> Result<[f64; K]>,
    {
        self.try_average_vec_with(&Integrator::default(), f)
    }

    pub fn try_average_vec_with<const K: usize, F>(&self, q: &Integrator, f: F) -> Result<[f64; K]>
    where
        F: Fn(TransmissionSample) -> Result<[f64; K]>,
    {
        match self {
            Pdtc::Dirac(s) => f(*s),
            Pdtc::LogNormal(ln) => ln.average(q, &f),
            Pdtc::Empirical(samples) => {
                let values = samples.iter().map(|s| f(*s)).collect::<Result<Vec<_>>>()?;
                let n = values.len() as f64;
                Ok(std::array::from_fn(|k| {
                    neumaier_sum(values.iter().map(|v| v[k])) / n
                }))
            }
        }
    }

    /// The mixed moment of the two transmissions.
    pub fn moment(&self, n: u32, m: u32) -> Result<f64> {
        if n == 0 && m == 0 {
            return Ok(1.0);
        }
        self.average(|s| s.eta_a.powi(n as i32) * s.eta_b.powi(m as i32))
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> TransmissionSample {
        match self {
            Pdtc::Dirac(s) => *s,
            Pdtc::LogNormal(ln) => {
                let eta_a = ln.sample_eta(rng);
                let eta_b = if ln.correlated {
                    eta_a
                } else {
                    ln.sample_eta(rng)
                };
                TransmissionSample { eta_a, eta_b }
            }
            Pdtc::Empirical(samples) => samples[rng.random_range(0..samples.len())],
        }
    }

    /// The same distribution with the channel labels exchanged.
    pub fn swapped(&self) -> Self {
        match self {
            Pdtc::Dirac(s) => Pdtc::Dirac(s.swapped()),
            Pdtc::LogNormal(ln) => Pdtc::LogNormal(ln.clone()),
            Pdtc::Empirical(v) => Pdtc::Empirical(v.iter().map(|s| s.swapped()).collect()),
        }
    }
}

/// Free-function form of [`Pdtc::moment`].
pub fn pdtc_moment(pdtc: &Pdtc, n: u32, m: u32) -> Result<f64> {
    pdtc.moment(n, m)
}
