//! Closed-form statistics of an ideal two-photon Bell source after
//! fluctuating loss.
//!
//! Loss turns the Bell state into a mixture of vacuum, one-photon states at
//! either site and the surviving Bell state. For each component the
//! postselected coincidence statistics factor into per-site detector
//! responses, collected in [`SiteResponse`]. The contrast (`e_*`) and total
//! (`p_*`) coefficients below are built from those responses.

use crate::channel::Pdtc;
use crate::chsh::{CoincidenceTable, NO_SIGNAL_THRESHOLD};
use crate::detector::{Arm, DetectionMode, DetectorBank, DetectorParams, Pair};
use crate::error::{Error, Result};

/// Weights of the loss-decomposed mixture.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixtureWeights {
    pub p0: f64,
    pub p_ha: f64,
    pub p_va: f64,
    pub p_hb: f64,
    pub p_vb: f64,
    pub p_bell: f64,
}

impl MixtureWeights {
    /// Weights for one fixed pair of transmissions.
    pub fn at(eta_a: f64, eta_b: f64) -> Self {
        let one_a = 0.5 * eta_a * (1.0 - eta_b);
        let one_b = 0.5 * eta_b * (1.0 - eta_a);
        Self {
            p0: (1.0 - eta_a) * (1.0 - eta_b),
            p_ha: one_a,
            p_va: one_a,
            p_hb: one_b,
            p_vb: one_b,
            p_bell: eta_a * eta_b,
        }
    }

    /// Total weight of the single-photon components.
    pub fn p_single(&self) -> f64 {
        self.p_ha + self.p_va + self.p_hb + self.p_vb
    }

    pub fn sum(&self) -> f64 {
        self.p0 + self.p_single() + self.p_bell
    }
}

pub fn mixture_weights(pdtc: &Pdtc) -> Result<MixtureWeights> {
    let [p0, one_a, one_b, p_bell] = pdtc.average_vec(|s| {
        [
            (1.0 - s.eta_a) * (1.0 - s.eta_b),
            0.5 * s.eta_a * (1.0 - s.eta_b),
            0.5 * s.eta_b * (1.0 - s.eta_a),
            s.eta_a * s.eta_b,
        ]
    })?;
    Ok(MixtureWeights {
        p0,
        p_ha: one_a,
        p_va: one_a,
        p_hb: one_b,
        p_vb: one_b,
        p_bell,
    })
}

/// Probabilities that exactly one of the two detectors at a site registers a
/// click while the other stays silent, for each photon content of the site.
/// Index 0 is the transmitted detector, index 1 the reflected one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SiteResponse {
    pub vacuum: [f64; 2],
    pub photon_t: [f64; 2],
    pub photon_r: [f64; 2],
}

impl SiteResponse {
    pub fn new(t: DetectorParams, r: DetectorParams, mode: DetectionMode) -> Self {
        let (et, er) = (t.eta(), r.eta());
        let (nt, nr) = (t.noise(), r.noise());
        let (silent_t, silent_r) = ((-nt).exp(), (-nr).exp());
        match mode {
            DetectionMode::Pnr => {
                let one_t = nt * silent_t;
                let one_r = nr * silent_r;
                Self {
                    vacuum: [one_t * silent_r, one_r * silent_t],
                    photon_t: [
                        (et + (1.0 - et) * nt) * silent_t * silent_r,
                        one_r * (1.0 - et) * silent_t,
                    ],
                    photon_r: [
                        one_t * (1.0 - er) * silent_r,
                        (er + (1.0 - er) * nr) * silent_r * silent_t,
                    ],
                }
            }
            DetectionMode::OnOff => {
                let fire_t = -(-nt).exp_m1();
                let fire_r = -(-nr).exp_m1();
                Self {
                    vacuum: [fire_t * silent_r, fire_r * silent_t],
                    photon_t: [
                        (1.0 - (1.0 - et) * silent_t) * silent_r,
                        fire_r * (1.0 - et) * silent_t,
                    ],
                    photon_r: [
                        fire_t * (1.0 - er) * silent_r,
                        (1.0 - (1.0 - er) * silent_r) * silent_t,
                    ],
                }
            }
        }
    }

    pub fn site_a(bank: &DetectorBank) -> Self {
        Self::new(bank.t_a, bank.r_a, bank.mode)
    }

    pub fn site_b(bank: &DetectorBank) -> Self {
        Self::new(bank.t_b, bank.r_b, bank.mode)
    }

    /// Response to a single photon sent to the transmitted port with
    /// probability `cos2` and to the reflected port with `sin2`.
    fn single_photon(&self, cos2: f64, sin2: f64) -> [f64; 2] {
        [
            cos2 * self.photon_t[0] + sin2 * self.photon_r[0],
            cos2 * self.photon_t[1] + sin2 * self.photon_r[1],
        ]
    }

    fn noise_contrast(&self) -> f64 {
        self.vacuum[0] - self.vacuum[1]
    }

    fn noise_total(&self) -> f64 {
        self.vacuum[0] + self.vacuum[1]
    }

    /// Contrast for a photon in the transmitted mode.
    fn contrast_t(&self) -> f64 {
        self.photon_t[0] - self.photon_t[1]
    }

    /// Minus the contrast for a photon in the reflected mode.
    fn contrast_r(&self) -> f64 {
        self.photon_r[1] - self.photon_r[0]
    }

    fn total_t(&self) -> f64 {
        self.photon_t[0] + self.photon_t[1]
    }

    fn total_r(&self) -> f64 {
        self.photon_r[0] + self.photon_r[1]
    }
}

/// Angle-dependent squares entering the coefficients.
#[derive(Debug, Clone, Copy)]
struct Trig {
    ca2: f64,
    sa2: f64,
    cb2: f64,
    sb2: f64,
    /// `sin 2theta_A sin 2theta_B cos phi`.
    interference: f64,
}

impl Trig {
    fn new(theta_a: f64, theta_b: f64, phi: f64) -> Self {
        let (sa, ca) = theta_a.sin_cos();
        let (sb, cb) = theta_b.sin_cos();
        Self {
            ca2: ca * ca,
            sa2: sa * sa,
            cb2: cb * cb,
            sb2: sb * sb,
            interference: (2.0 * theta_a).sin() * (2.0 * theta_b).sin() * phi.cos(),
        }
    }
}

/// Contrast and total coefficients of every mixture component at one
/// angle pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coefficients {
    pub e_vacuum: f64,
    pub p_vacuum: f64,
    pub e_h_a: f64,
    pub p_h_a: f64,
    pub e_v_a: f64,
    pub p_v_a: f64,
    pub e_h_b: f64,
    pub p_h_b: f64,
    pub e_v_b: f64,
    pub p_v_b: f64,
    pub e_bell: f64,
    pub p_bell: f64,
}

pub fn e_vacuum(a: &SiteResponse, b: &SiteResponse) -> f64 {
    a.noise_contrast() * b.noise_contrast()
}

pub fn p_vacuum(a: &SiteResponse, b: &SiteResponse) -> f64 {
    a.noise_total() * b.noise_total()
}

/// One photon at the measured site split `c2 : s2` between T and R, vacuum at the other.
fn e_one_photon(site: &SiteResponse, other: &SiteResponse, c2: f64, s2: f64) -> f64 {
    other.noise_contrast() * (c2 * site.contrast_t() - s2 * site.contrast_r())
}

fn p_one_photon(site: &SiteResponse, other: &SiteResponse, c2: f64, s2: f64) -> f64 {
    other.noise_total() * (c2 * site.total_t() + s2 * site.total_r())
}

pub fn e_h_a(a: &SiteResponse, b: &SiteResponse, theta_a: f64) -> f64 {
    let (s, c) = theta_a.sin_cos();
    e_one_photon(a, b, c * c, s * s)
}

pub fn e_v_a(a: &SiteResponse, b: &SiteResponse, theta_a: f64) -> f64 {
    let (s, c) = theta_a.sin_cos();
    e_one_photon(a, b, s * s, c * c)
}

pub fn p_h_a(a: &SiteResponse, b: &SiteResponse, theta_a: f64) -> f64 {
    let (s, c) = theta_a.sin_cos();
    p_one_photon(a, b, c * c, s * s)
}

pub fn p_v_a(a: &SiteResponse, b: &SiteResponse, theta_a: f64) -> f64 {
    let (s, c) = theta_a.sin_cos();
    p_one_photon(a, b, s * s, c * c)
}

pub fn e_h_b(a: &SiteResponse, b: &SiteResponse, theta_b: f64) -> f64 {
    e_h_a(b, a, theta_b)
}

pub fn e_v_b(a: &SiteResponse, b: &SiteResponse, theta_b: f64) -> f64 {
    e_v_a(b, a, theta_b)
}

pub fn p_h_b(a: &SiteResponse, b: &SiteResponse, theta_b: f64) -> f64 {
    p_h_a(b, a, theta_b)
}

pub fn p_v_b(a: &SiteResponse, b: &SiteResponse, theta_b: f64) -> f64 {
    p_v_a(b, a, theta_b)
}

pub fn e_bell(a: &SiteResponse, b: &SiteResponse, theta_a: f64, theta_b: f64, phi: f64) -> f64 {
    let t = Trig::new(theta_a, theta_b, phi);
    let (ht_a, hr_a) = (a.contrast_t(), a.contrast_r());
    let (ht_b, hr_b) = (b.contrast_t(), b.contrast_r());
    0.5 * ((t.ca2 * ht_a - t.sa2 * hr_a) * (t.sb2 * ht_b - t.cb2 * hr_b)
        + (t.sa2 * ht_a - t.ca2 * hr_a) * (t.cb2 * ht_b - t.sb2 * hr_b)
        + 0.5 * t.interference * (ht_a + hr_a) * (ht_b + hr_b))
}

pub fn p_bell(a: &SiteResponse, b: &SiteResponse, theta_a: f64, theta_b: f64, phi: f64) -> f64 {
    let t = Trig::new(theta_a, theta_b, phi);
    let (kt_a, kr_a) = (a.total_t(), a.total_r());
    let (kt_b, kr_b) = (b.total_t(), b.total_r());
    0.5 * ((t.ca2 * kt_a + t.sa2 * kr_a) * (t.sb2 * kt_b + t.cb2 * kr_b)
        + (t.sa2 * kt_a + t.ca2 * kr_a) * (t.cb2 * kt_b + t.sb2 * kr_b)
        + 0.5 * t.interference * (kt_a - kr_a) * (kt_b - kr_b))
}

pub fn coefficients(bank: &DetectorBank, theta_a: f64, theta_b: f64, phi: f64) -> Coefficients {
    let a = SiteResponse::site_a(bank);
    let b = SiteResponse::site_b(bank);
    Coefficients {
        e_vacuum: e_vacuum(&a, &b),
        p_vacuum: p_vacuum(&a, &b),
        e_h_a: e_h_a(&a, &b, theta_a),
        p_h_a: p_h_a(&a, &b, theta_a),
        e_v_a: e_v_a(&a, &b, theta_a),
        p_v_a: p_v_a(&a, &b, theta_a),
        e_h_b: e_h_b(&a, &b, theta_b),
        p_h_b: p_h_b(&a, &b, theta_b),
        e_v_b: e_v_b(&a, &b, theta_b),
        p_v_b: p_v_b(&a, &b, theta_b),
        e_bell: e_bell(&a, &b, theta_a, theta_b, phi),
        p_bell: p_bell(&a, &b, theta_a, theta_b, phi),
    }
}

impl Coefficients {
    /// Weighted contrast and weighted total.
    pub fn weighted(&self, w: &MixtureWeights) -> (f64, f64) {
        let num = w.p0 * self.e_vacuum
            + w.p_ha * self.e_h_a
            + w.p_va * self.e_v_a
            + w.p_hb * self.e_h_b
            + w.p_vb * self.e_v_b
            + w.p_bell * self.e_bell;
        let den = w.p0 * self.p_vacuum
            + w.p_ha * self.p_h_a
            + w.p_va * self.p_v_a
            + w.p_hb * self.p_h_b
            + w.p_vb * self.p_v_b
            + w.p_bell * self.p_bell;
        (num, den)
    }
}

/// Correlation coefficient for arbitrary detectors, together with the total
/// postselected coincidence probability.
pub fn general_correlation(
    bank: &DetectorBank,
    weights: &MixtureWeights,
    theta_a: f64,
    theta_b: f64,
    phi: f64,
) -> Result<(f64, f64)> {
    let (num, den) = coefficients(bank, theta_a, theta_b, phi).weighted(weights);
    if !(den >= NO_SIGNAL_THRESHOLD) {
        return Err(Error::NoSignal(den));
    }
    Ok((num / den, den))
}

/// The four postselected coincidence probabilities of the Bell mixture.
pub fn coincidence_table(
    bank: &DetectorBank,
    weights: &MixtureWeights,
    theta_a: f64,
    theta_b: f64,
    phi: f64,
) -> CoincidenceTable {
    let a = SiteResponse::site_a(bank);
    let b = SiteResponse::site_b(bank);
    let t = Trig::new(theta_a, theta_b, phi);
    let ha = a.single_photon(t.ca2, t.sa2);
    let va = a.single_photon(t.sa2, t.ca2);
    let hb = b.single_photon(t.cb2, t.sb2);
    let vb = b.single_photon(t.sb2, t.cb2);
    // Two-photon amplitudes squared for (T,T)/(R,R) and (T,R)/(R,T).
    let same = 0.5 * (t.ca2 * t.sb2 + t.sa2 * t.cb2 + 0.5 * t.interference);
    let diff = 0.5 * (t.ca2 * t.cb2 + t.sa2 * t.sb2 - 0.5 * t.interference);
    let photon = |r: &SiteResponse, arm: Arm, i: usize| match arm {
        Arm::Transmitted => r.photon_t[i],
        Arm::Reflected => r.photon_r[i],
    };
    let cell = |pair: Pair| {
        let (i, j) = (pair.a.index(), pair.b.index());
        let mut bell = 0.0;
        for x in Arm::BOTH {
            for y in Arm::BOTH {
                let amp = if x == y { same } else { diff };
                bell += amp * photon(&a, x, i) * photon(&b, y, j);
            }
        }
        weights.p0 * a.vacuum[i] * b.vacuum[j]
            + (weights.p_ha * ha[i] + weights.p_va * va[i]) * b.vacuum[j]
            + (weights.p_hb * hb[j] + weights.p_vb * vb[j]) * a.vacuum[i]
            + weights.p_bell * bell
    };
    CoincidenceTable::from_array(Pair::ALL.map(cell))
}

/// Contrast factor multiplying the ideal angular pattern for four identical
/// detectors.
pub fn s_parameter(
    weights: &MixtureWeights,
    eta_c: f64,
    n_nc: f64,
    mode: DetectionMode,
) -> Result<f64> {
    let det = DetectorParams::new(eta_c, n_nc)?;
    let site = SiteResponse::new(det, det, mode);
    // With identical detectors the per-site response is symmetric in T/R.
    let h = site.contrast_t();
    let k = site.total_t();
    let s = site.noise_total();
    let num = weights.p_bell * h * h;
    let den = weights.p_bell * k * k + weights.p_single() * s * k + weights.p0 * s * s;
    if !(den >= NO_SIGNAL_THRESHOLD) {
        return Err(Error::NoSignal(den));
    }
    Ok(num / den)
}

/// Correlation coefficient for identical detectors.
pub fn correlation_equal(theta_a: f64, theta_b: f64, phi: f64, s: f64) -> f64 {
    s * (-(2.0 * theta_a).cos() * (2.0 * theta_b).cos()
        + phi.cos() * (2.0 * theta_a).sin() * (2.0 * theta_b).sin())
}

pub fn visibility(s: f64, phi: f64) -> f64 {
    s * phi.cos()
}
