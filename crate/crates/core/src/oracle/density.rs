use num_complex::Complex64;

use super::fock::{binomial, occupations, FockState4, Mode, Site};
use crate::error::{invalid, Result};

/// Dense density operator over the four-mode truncated Fock basis.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    cap: usize,
    dim: usize,
    data: Vec<Complex64>,
}

impl DensityMatrix {
    pub fn from_pure(state: &FockState4) -> Self {
        let dim = state.dim();
        let a = state.amplitudes();
        let mut data = vec![Complex64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            if a[i].norm_sqr() == 0.0 {
                continue;
            }
            for j in 0..dim {
                data[i * dim + j] = a[i] * a[j].conj();
            }
        }
        Self {
            cap: state.cap(),
            dim,
            data,
        }
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.dim + j]
    }

    pub fn occupations(&self, idx: usize) -> [usize; 4] {
        occupations(self.cap, idx)
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i).re).sum()
    }

    /// `Tr rho^2`, using Hermiticity.
    pub fn purity(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn populations(&self) -> impl Iterator<Item = ([usize; 4], f64)> + '_ {
        (0..self.dim).map(move |i| (self.occupations(i), self.get(i, i).re))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Pure-loss channel of power transmissivity `eta` on one mode, applied
    /// through its Kraus operators
    /// `K_k |n> = sqrt(C(n,k) eta^(n-k) (1-eta)^k) |n-k>`.
    pub fn apply_loss(&self, mode: Mode, eta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(invalid("eta", format!("{eta} is outside [0, 1]")));
        }
        let m = mode as usize;
        let stride = (self.cap + 1).pow(3 - m as u32);
        let mut out = vec![Complex64::new(0.0, 0.0); self.data.len()];
        let amp = |n: usize, k: usize| -> f64 {
            (binomial(n, k) * eta.powi((n - k) as i32) * (1.0 - eta).powi(k as i32)).sqrt()
        };
        for i in 0..self.dim {
            let ni = self.occupations(i)[m];
            for j in 0..self.dim {
                let z = self.data[i * self.dim + j];
                if z.norm_sqr() == 0.0 {
                    continue;
                }
                let nj = self.occupations(j)[m];
                for k in 0..=ni.min(nj) {
                    let w = amp(ni, k) * amp(nj, k);
                    if w == 0.0 {
                        continue;
                    }
                    let (ii, jj) = (i - k * stride, j - k * stride);
                    out[ii * self.dim + jj] += z * w;
                }
            }
        }
        Ok(Self {
            cap: self.cap,
            dim: self.dim,
            data: out,
        })
    }

    /// Equal loss on both polarization modes of each site.
    pub fn apply_site_losses(&self, eta_a: f64, eta_b: f64) -> Result<Self> {
        self.apply_loss(Mode::HA, eta_a)?
            .apply_loss(Mode::VA, eta_a)?
            .apply_loss(Mode::HB, eta_b)?
            .apply_loss(Mode::VB, eta_b)
    }

    /// Conjugates by the analyzer unitary of one site.
    pub fn rotate_analyzer(&self, site: Site, theta: f64) -> Self {
        let dim = self.dim;
        // Columns of U are images of basis states.
        let mut u = vec![Complex64::new(0.0, 0.0); dim * dim];
        let mut basis = FockState4::zeros(self.cap).expect("cap already validated");
        for j in 0..dim {
            basis.set(basis.occupations(j), Complex64::new(1.0, 0.0));
            let img = basis.rotate_site(site, theta);
            for (i, a) in img.amplitudes().iter().enumerate() {
                u[i * dim + j] = *a;
            }
            basis.set(basis.occupations(j), Complex64::new(0.0, 0.0));
        }
        let ur = matmul(&u, &self.data, dim, false);
        let data = matmul(&ur, &u, dim, true);
        Self {
            cap: self.cap,
            dim,
            data,
        }
    }

    pub fn rotated(&self, theta_a: f64, theta_b: f64) -> Self {
        self.rotate_analyzer(Site::A, theta_a)
            .rotate_analyzer(Site::B, theta_b)
    }
}

/// `a * b` or `a * b^†`.
fn matmul(a: &[Complex64], b: &[Complex64], n: usize, adjoint_b: bool) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for k in 0..n {
            let x = a[i * n + k];
            if x.norm_sqr() == 0.0 {
                continue;
            }
            for j in 0..n {
                let y = if adjoint_b {
                    b[j * n + k].conj()
                } else {
                    b[k * n + j]
                };
                out[i * n + j] += x * y;
            }
        }
    }
    out
}
