use num_complex::Complex64;

use crate::error::{invalid, Result};

/// Factorials as `f64`, exact up to 22! and correctly rounded beyond.
pub(crate) fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Mode order shared by every four-mode object: `(H_A, V_A, H_B, V_B)`
/// before the analyzers and `(T_A, R_A, T_B, R_B)` after them.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    HA = 0,
    VA = 1,
    HB = 2,
    VB = 3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Site {
    A,
    B,
}

/// Pure state on four modes, each truncated at `cap` photons.
#[derive(Debug, Clone, PartialEq)]
pub struct FockState4 {
    cap: usize,
    amps: Vec<Complex64>,
}

impl FockState4 {
    pub fn vacuum(cap: usize) -> Result<Self> {
        let mut s = Self::zeros(cap)?;
        s.amps[0] = Complex64::new(1.0, 0.0);
        Ok(s)
    }

    pub fn zeros(cap: usize) -> Result<Self> {
        if cap < 1 {
            return Err(invalid("n_max", "must be at least 1"));
        }
        Ok(Self {
            cap,
            amps: vec![Complex64::new(0.0, 0.0); (cap + 1).pow(4)],
        })
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn index(&self, n: [usize; 4]) -> usize {
        let c = self.cap + 1;
        ((n[0] * c + n[1]) * c + n[2]) * c + n[3]
    }

    pub fn occupations(&self, idx: usize) -> [usize; 4] {
        occupations(self.cap, idx)
    }

    pub fn amp(&self, n: [usize; 4]) -> Complex64 {
        self.amps[self.index(n)]
    }

    pub fn set(&mut self, n: [usize; 4], v: Complex64) {
        let i = self.index(n);
        self.amps[i] = v;
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Applies the polarization analyzer at one site, mapping the `(H, V)`
    /// mode pair onto `(T, R)`. Components whose rotated photon numbers
    /// exceed the cap are dropped, so the map is unitary only on states with
    /// at most `cap` photons per site.
    pub fn rotate_site(&self, site: Site, theta: f64) -> Self {
        let cap = self.cap;
        let blocks: Vec<Vec<f64>> = (0..=2 * cap).map(|n| site_rotation(n, theta)).collect();
        let mut out = Self {
            cap,
            amps: vec![Complex64::new(0.0, 0.0); self.amps.len()],
        };
        for (idx, amp) in self.amps.iter().enumerate() {
            if amp.norm_sqr() == 0.0 {
                continue;
            }
            let n = self.occupations(idx);
            let (h, v) = match site {
                Site::A => (n[0], n[1]),
                Site::B => (n[2], n[3]),
            };
            let total = h + v;
            let block = &blocks[total];
            for t in 0..=total.min(cap) {
                let r = total - t;
                if r > cap {
                    continue;
                }
                let u = block[t * (total + 1) + h];
                if u == 0.0 {
                    continue;
                }
                let mut m = n;
                match site {
                    Site::A => {
                        m[0] = t;
                        m[1] = r;
                    }
                    Site::B => {
                        m[2] = t;
                        m[3] = r;
                    }
                }
                let j = out.index(m);
                out.amps[j] += amp * u;
            }
        }
        out
    }

    pub fn rotated(&self, theta_a: f64, theta_b: f64) -> Self {
        self.rotate_site(Site::A, theta_a)
            .rotate_site(Site::B, theta_b)
    }
}

pub(crate) fn occupations(cap: usize, mut idx: usize) -> [usize; 4] {
    let c = cap + 1;
    let mut n = [0; 4];
    for slot in n.iter_mut().rev() {
        *slot = idx % c;
        idx /= c;
    }
    n
}

/// Matrix of the analyzer on the `n`-photon subspace of one site, row-major
/// with entry `[t][h]` the amplitude of `|t, n-t>_{TR}` in the image of
/// `|h, n-h>_{HV}`. Uses `a_H^† = cos T^† - sin R^†`, `a_V^† = sin T^† + cos R^†`.
pub fn site_rotation(n: usize, theta: f64) -> Vec<f64> {
    let (s, c) = theta.sin_cos();
    let mut m = vec![0.0; (n + 1) * (n + 1)];
    for h in 0..=n {
        let v = n - h;
        let norm = 1.0 / (factorial(h) * factorial(v)).sqrt();
        for i in 0..=h {
            // i transmitted photons from H, j from V.
            let from_h = binomial(h, i) * c.powi(i as i32) * (-s).powi((h - i) as i32);
            for j in 0..=v {
                let from_v = binomial(v, j) * s.powi(j as i32) * c.powi((v - j) as i32);
                let t = i + j;
                let bosonic = (factorial(t) * factorial(n - t)).sqrt();
                m[t * (n + 1) + h] += from_h * from_v * bosonic * norm;
            }
        }
    }
    m
}

/// `(|1001> + e^{i phi}|0110>)/sqrt 2`.
pub fn build_bell_state(phi: f64, n_max: usize) -> Result<FockState4> {
    let mut s = FockState4::zeros(n_max)?;
    let r = std::f64::consts::FRAC_1_SQRT_2;
    s.set([1, 0, 0, 1], Complex64::new(r, 0.0));
    s.set([0, 1, 1, 0], Complex64::from_polar(r, phi));
    Ok(s)
}

/// Two independent two-mode squeezed vacua on `(H_A, V_B)` and `(V_A, H_B)`,
/// truncated at `n_max` photons per site.
pub fn build_pdc_state(tanh_chi: f64, phi: f64, n_max: usize) -> Result<FockState4> {
    if !(0.0..1.0).contains(&tanh_chi) {
        return Err(invalid("tanh_chi", format!("{tanh_chi} is outside [0, 1)")));
    }
    let mut s = FockState4::zeros(n_max)?;
    let lead = 1.0 - tanh_chi * tanh_chi;
    for n in 0..=n_max {
        let mag = lead * tanh_chi.powi(n as i32);
        for m in 0..=n {
            s.set(
                [n - m, m, m, n - m],
                Complex64::from_polar(mag, phi * m as f64),
            );
        }
    }
    Ok(s)
}

/// Probability mass of the down-conversion state above `n_max` photons per
/// site.
pub fn pdc_tail_bound(tanh_chi: f64, n_max: usize) -> f64 {
    let x = tanh_chi * tanh_chi;
    let n = n_max as f64;
    let xn1 = x.powi(n_max as i32 + 1);
    (n + 2.0) * xn1 - (n + 1.0) * xn1 * x
}
