//! Adaptive Gauss–Legendre quadrature for vector-valued integrands.
//!
//! Every component of the integrand shares one subdivision of the interval,
//! so ratios such as `∫w·f / ∫w` are formed from identically discretised
//! sums. Refinement is global: the panel with the largest error estimate
//! (relative to the current tolerance) is bisected until the summed error of
//! every component is within `max(rel_tol·|I|, abs_tol)`.

use crate::error::{Error, Result};

/// Nodes and weights of an `n`-point Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Builds the rule by Newton iteration on the Legendre polynomial.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "a Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            // Tricomi's initial guess for the i-th root from the top.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Applies the rule on `[a, b]`.
    pub fn apply<const K: usize, F>(&self, f: &mut F, a: f64, b: f64) -> Result<[f64; K]>
    where
        F: FnMut(f64) -> Result<[f64; K]>,
    {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = [0.0; K];
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            let v = f(mid + half * x)?;
            for k in 0..K {
                acc[k] += w * v[k];
            }
        }
        for a in acc.iter_mut() {
            *a *= half;
        }
        Ok(acc)
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

#[derive(Debug, Clone, Copy)]
struct Panel<const K: usize> {
    a: f64,
    b: f64,
    /// Rule applied to the whole panel.
    coarse: [f64; K],
    /// Sum of the rule applied to both halves; the accepted estimate.
    fine: [f64; K],
    left: [f64; K],
    right: [f64; K],
    err: [f64; K],
}

/// Adaptive integrator with a fixed Gauss–Legendre panel rule.
#[derive(Debug, Clone)]
pub struct Integrator {
    rule: GaussLegendre,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
    initial_panels: usize,
}

impl Default for Integrator {
    fn default() -> Self {
        Self::new(1e-10)
    }
}

impl Integrator {
    pub fn new(rel_tol: f64) -> Self {
        Self {
            rule: GaussLegendre::new(15),
            rel_tol,
            abs_tol: 1e-300,
            max_subdivisions: 4000,
            initial_panels: 4,
        }
    }

    pub fn with_abs_tol(mut self, abs_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self
    }

    pub fn with_initial_panels(mut self, panels: usize) -> Self {
        self.initial_panels = panels.max(1);
        self
    }

    /// Integrates an infallible integrand.
    pub fn integrate<const K: usize, F>(&self, mut f: F, a: f64, b: f64) -> Result<[f64; K]>
    where
        F: FnMut(f64) -> [f64; K],
    {
        self.try_integrate(|x| Ok(f(x)), a, b)
    }

    /// Integrates a fallible integrand; the first integrand error aborts.
    pub fn try_integrate<const K: usize, F>(&self, mut f: F, a: f64, b: f64) -> Result<[f64; K]>
    where
        F: FnMut(f64) -> Result<[f64; K]>,
    {
        if a == b {
            return Ok([0.0; K]);
        }
        let mut panels = Vec::with_capacity(64);
        let step = (b - a) / self.initial_panels as f64;
        for i in 0..self.initial_panels {
            let lo = a + step * i as f64;
            let hi = if i + 1 == self.initial_panels {
                b
            } else {
                a + step * (i + 1) as f64
            };
            let coarse = self.rule.apply(&mut f, lo, hi)?;
            panels.push(self.refine(&mut f, lo, hi, coarse)?);
        }

        let mut subdivisions = 0;
        loop {
            let (total, err) = totals(&panels);
            let tol: [f64; K] =
                std::array::from_fn(|k| (self.rel_tol * total[k].abs()).max(self.abs_tol));
            if (0..K).all(|k| err[k] <= tol[k]) {
                return Ok(total);
            }
            if subdivisions >= self.max_subdivisions {
                let k = (0..K)
                    .max_by(|&i, &j| (err[i] / tol[i]).total_cmp(&(err[j] / tol[j])))
                    .unwrap_or(0);
                return Err(Error::NoConvergence {
                    error: err[k],
                    tolerance: tol[k],
                    subdivisions,
                });
            }
            let worst = panels
                .iter()
                .enumerate()
                .map(|(i, p)| {
                    let score = (0..K).map(|k| p.err[k] / tol[k]).fold(0.0, f64::max);
                    (i, score)
                })
                .max_by(|x, y| x.1.total_cmp(&y.1))
                .map(|(i, _)| i)
                .unwrap_or(0);
            let p = panels.swap_remove(worst);
            let mid = 0.5 * (p.a + p.b);
            if mid <= p.a || mid >= p.b {
                // Panel width at machine resolution; nothing left to refine.
                return Err(Error::NoConvergence {
                    error: err.iter().cloned().fold(0.0, f64::max),
                    tolerance: tol.iter().cloned().fold(f64::INFINITY, f64::min),
                    subdivisions,
                });
            }
            panels.push(self.refine(&mut f, p.a, mid, p.left)?);
            panels.push(self.refine(&mut f, mid, p.b, p.right)?);
            subdivisions += 1;
        }
    }

    fn refine<const K: usize, F>(
        &self,
        f: &mut F,
        a: f64,
        b: f64,
        coarse: [f64; K],
    ) -> Result<Panel<K>>
    where
        F: FnMut(f64) -> Result<[f64; K]>,
    {
        let mid = 0.5 * (a + b);
        let left = self.rule.apply(f, a, mid)?;
        let right = self.rule.apply(f, mid, b)?;
        let fine: [f64; K] = std::array::from_fn(|k| left[k] + right[k]);
        let err: [f64; K] = std::array::from_fn(|k| (fine[k] - coarse[k]).abs());
        Ok(Panel {
            a,
            b,
            coarse,
            fine,
            left,
            right,
            err,
        })
    }
}

fn totals<const K: usize>(panels: &[Panel<K>]) -> ([f64; K], [f64; K]) {
    let mut total = [0.0; K];
    let mut err = [0.0; K];
    for k in 0..K {
        total[k] = neumaier_sum(panels.iter().map(|p| p.fine[k]));
        err[k] = panels.iter().map(|p| p.err[k]).sum();
    }
    // Keep the coarse estimate alive for debugging output only.
    debug_assert!(panels.iter().all(|p| p.coarse.iter().all(|c| !c.is_nan())));
    (total, err)
}

/// Compensated (Neumaier) summation.
pub fn neumaier_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            c += (sum - t) + v;
        } else {
            c += (v - t) + sum;
        }
        sum = t;
    }
    sum + c
}
