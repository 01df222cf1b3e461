//! Correlation coefficients, the CHSH combination and its maximization over
//! analyzer angles.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Denominators below this are treated as "no coincidences observed".
pub const NO_SIGNAL_THRESHOLD: f64 = 1e-30;

const GRID: usize = 16;
const SEARCH_HALF_WIDTH: f64 = PI / 16.0;
const MIN_SWEEPS: usize = 3;
const MAX_SWEEPS: usize = 200;
const SWEEP_TOLERANCE: f64 = 1e-8;
const GOLDEN_ITERATIONS: usize = 48;

/// Reduces an angle into `[0, pi)`.
pub fn reduce_angle(theta: f64) -> f64 {
    let r = theta.rem_euclid(PI);
    if r >= PI {
        0.0
    } else {
        r
    }
}

/// Analyzer angles `(a1, b1, a2, b2)` for the two CHSH settings per site.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleSettings {
    pub a1: f64,
    pub b1: f64,
    pub a2: f64,
    pub b2: f64,
}

impl AngleSettings {
    pub fn new(a1: f64, b1: f64, a2: f64, b2: f64) -> Self {
        Self {
            a1: reduce_angle(a1),
            b1: reduce_angle(b1),
            a2: reduce_angle(a2),
            b2: reduce_angle(b2),
        }
    }

    /// `(0, pi/8, pi/4, 3pi/8)`.
    pub fn standard() -> Self {
        Self::new(0.0, PI / 8.0, PI / 4.0, 3.0 * PI / 8.0)
    }

    /// The four angle pairs in the order `(a1,b1), (a1,b2), (a2,b1), (a2,b2)`.
    pub fn pairs(&self) -> [(f64, f64); 4] {
        [
            (self.a1, self.b1),
            (self.a1, self.b2),
            (self.a2, self.b1),
            (self.a2, self.b2),
        ]
    }

    fn get(&self, i: usize) -> f64 {
        [self.a1, self.b1, self.a2, self.b2][i]
    }

    fn set(&mut self, i: usize, v: f64) {
        match i {
            0 => self.a1 = v,
            1 => self.b1 = v,
            2 => self.a2 = v,
            _ => self.b2 = v,
        }
    }
}

/// Coincidence probabilities for the four detector pairs at one angle pair.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CoincidenceTable {
    pub p_tt: f64,
    pub p_rr: f64,
    pub p_tr: f64,
    pub p_rt: f64,
}

impl CoincidenceTable {
    pub fn from_array([p_tt, p_rr, p_tr, p_rt]: [f64; 4]) -> Self {
        Self {
            p_tt,
            p_rr,
            p_tr,
            p_rt,
        }
    }

    /// Entries in `TT, RR, TR, RT` order.
    pub fn to_array(&self) -> [f64; 4] {
        [self.p_tt, self.p_rr, self.p_tr, self.p_rt]
    }

    pub fn same(&self) -> f64 {
        self.p_tt + self.p_rr
    }

    pub fn different(&self) -> f64 {
        self.p_tr + self.p_rt
    }

    pub fn total(&self) -> f64 {
        self.same() + self.different()
    }

    pub fn max_abs_diff(&self, other: &CoincidenceTable) -> f64 {
        self.to_array()
            .iter()
            .zip(other.to_array())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Normalized contrast between equal-arm and different-arm coincidences.
pub fn correlation(table: &CoincidenceTable) -> Result<f64> {
    let total = table.total();
    if !(total >= NO_SIGNAL_THRESHOLD) {
        return Err(Error::NoSignal(total));
    }
    Ok((table.same() - table.different()) / total)
}

/// CHSH combination of four correlation values ordered as in
/// [`AngleSettings::pairs`].
pub fn bell_from_correlations([e11, e12, e21, e22]: [f64; 4]) -> f64 {
    (e11 - e12).abs() + (e22 + e21).abs()
}

pub fn bell_parameter(tables: &[CoincidenceTable; 4]) -> Result<f64> {
    let mut e = [0.0; 4];
    for (slot, t) in e.iter_mut().zip(tables) {
        *slot = correlation(t)?;
    }
    Ok(bell_from_correlations(e))
}

/// Evaluates the CHSH parameter of a correlation model at fixed settings.
pub fn bell_at<F>(model: F, settings: &AngleSettings) -> Result<f64>
where
    F: Fn(f64, f64) -> Result<f64>,
{
    let mut e = [0.0; 4];
    for (slot, (a, b)) in e.iter_mut().zip(settings.pairs()) {
        *slot = model(a, b)?;
    }
    Ok(bell_from_correlations(e))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BellOptimum {
    pub value: f64,
    pub settings: AngleSettings,
    /// Best value found on the coarse grid before refinement.
    pub coarse_value: f64,
    pub sweeps: usize,
}

/// Maximizes the CHSH parameter of an infallible correlation model.
pub fn maximize_bell<F>(model: F) -> BellOptimum
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    match try_maximize_bell(|a, b| Ok(model(a, b))) {
        Ok(opt) => opt,
        Err(_) => unreachable!("infallible model"),
    }
}

/// Grid search on a 16x16 cached grid of angle pairs followed by golden-section
/// coordinate descent.
pub fn try_maximize_bell<F>(model: F) -> Result<BellOptimum>
where
    F: Fn(f64, f64) -> Result<f64> + Sync,
{
    let step = PI / GRID as f64;
    let cache: Vec<f64> = (0..GRID * GRID)
        .into_par_iter()
        .map(|k| model((k / GRID) as f64 * step, (k % GRID) as f64 * step))
        .collect::<Result<_>>()?;
    let e = |i: usize, j: usize| cache[i * GRID + j];

    // Equal or orthogonal settings at one site cannot violate the bound and
    // form ridges that coordinate moves do not leave.
    let commuting = |i: usize, j: usize| (i + GRID - j).is_multiple_of(GRID / 2);
    let mut best = (f64::NEG_INFINITY, [0usize; 4]);
    for a1 in 0..GRID {
        for a2 in (0..GRID).filter(|&a2| !commuting(a1, a2)) {
            for b1 in 0..GRID {
                let (e11, e21) = (e(a1, b1), e(a2, b1));
                for b2 in (0..GRID).filter(|&b2| !commuting(b1, b2)) {
                    let v = bell_from_correlations([e11, e(a1, b2), e21, e(a2, b2)]);
                    if v > best.0 {
                        best = (v, [a1, b1, a2, b2]);
                    }
                }
            }
        }
    }
    let coarse_value = best.0;
    let [a1, b1, a2, b2] = best.1.map(|i| i as f64 * step);
    let mut settings = AngleSettings { a1, b1, a2, b2 };
    let mut value = coarse_value;

    let mut sweeps = 0;
    while sweeps < MAX_SWEEPS {
        let before = value;
        for coord in 0..4 {
            let objective = |x: f64| {
                let mut s = settings;
                s.set(coord, x);
                bell_at(&model, &s)
            };
            let (x, v) = golden_max(objective, settings.get(coord), SEARCH_HALF_WIDTH)?;
            if v > value {
                value = v;
                settings.set(coord, x);
            }
        }
        sweeps += 1;
        if sweeps >= MIN_SWEEPS && value - before < SWEEP_TOLERANCE {
            break;
        }
    }
    Ok(BellOptimum {
        value,
        settings: AngleSettings::new(settings.a1, settings.b1, settings.a2, settings.b2),
        coarse_value,
        sweeps,
    })
}

fn golden_max<F>(f: F, center: f64, half_width: f64) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<f64>,
{
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (center - half_width, center + half_width);
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    for _ in 0..GOLDEN_ITERATIONS {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2)?;
        }
    }
    Ok(if f1 >= f2 { (x1, f1) } else { (x2, f2) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn family(s: f64, k: f64) -> impl Fn(f64, f64) -> f64 + Sync {
        move |a: f64, b: f64| {
            s * (-(2.0 * a).cos() * (2.0 * b).cos() + k * (2.0 * a).sin() * (2.0 * b).sin())
        }
    }

    #[test]
    fn correlation_examples() {
        let t = CoincidenceTable::from_array;
        assert_eq!(correlation(&t([0.5, 0.5, 0.0, 0.0])).unwrap(), 1.0);
        assert_eq!(correlation(&t([0.0, 0.0, 0.25, 0.25])).unwrap(), -1.0);
        assert_relative_eq!(
            correlation(&t([0.3, 0.3, 0.2, 0.2])).unwrap(),
            0.2,
            epsilon = 1e-15
        );
        assert!(matches!(
            correlation(&t([0.0, 0.0, 1e-31, 0.0])),
            Err(Error::NoSignal(_))
        ));
    }

    #[test]
    fn bell_parameter_of_zero_correlations() {
        let t = CoincidenceTable::from_array([0.25; 4]);
        assert_eq!(bell_parameter(&[t; 4]).unwrap(), 0.0);
    }

    #[test]
    fn standard_settings_reach_tsirelson_bound() {
        let b = bell_at(
            |a, b| Ok(family(1.0, -1.0)(a, b)),
            &AngleSettings::standard(),
        )
        .unwrap();
        assert_relative_eq!(b, 2.0 * 2f64.sqrt(), epsilon = 1e-12);
        let b = bell_at(
            |a, b| Ok(family(0.8, -1.0)(a, b)),
            &AngleSettings::standard(),
        )
        .unwrap();
        assert_relative_eq!(b, 0.8 * 2.0 * 2f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn maximizer_examples() {
        assert_relative_eq!(
            maximize_bell(family(1.0, -1.0)).value,
            2.0 * 2f64.sqrt(),
            epsilon = 1e-9
        );
        assert_relative_eq!(maximize_bell(family(1.0, 0.0)).value, 2.0, epsilon = 1e-9);
        assert_eq!(maximize_bell(|_, _| 0.0).value, 0.0);
    }

    #[test]
    fn maximizer_matches_closed_form_family() {
        for s in [0.5, 0.8, 0.9, 1.0] {
            for k in [-1.0, -0.5, 0.0, 0.5, 1.0] {
                let opt = maximize_bell(family(s, k));
                let exact = 2.0 * s * (1.0f64 + k * k).sqrt();
                assert!(
                    (opt.value - exact).abs() < 1e-6,
                    "s={s} k={k}: {} vs {exact}",
                    opt.value
                );
                assert!(opt.value >= opt.coarse_value);
            }
        }
    }

    #[test]
    fn maximizer_escapes_near_degenerate_phases() {
        for i in 0..=100 {
            let k = -1.0 + 0.02 * i as f64;
            let exact = 2.0 * (1.0f64 + k * k).sqrt();
            let v = maximize_bell(family(1.0, k)).value;
            assert!((v - exact).abs() < 1e-6, "k={k}: {v} vs {exact}");
        }
    }

    #[test]
    fn dense_grid_brute_force_agrees_at_one_tuple() {
        // 256 points per angle; correlations tabulated once.
        let model = family(0.9, 0.5);
        let n = 256;
        let step = PI / n as f64;
        let table: Vec<f64> = (0..n * n)
            .map(|k| model((k / n) as f64 * step, (k % n) as f64 * step))
            .collect();
        let e = |i: usize, j: usize| table[i * n + j];
        let best = (0..n)
            .into_par_iter()
            .map(|a1| {
                let mut best = f64::NEG_INFINITY;
                for a2 in 0..n {
                    for b1 in 0..n {
                        for b2 in 0..n {
                            let v = bell_from_correlations([
                                e(a1, b1),
                                e(a1, b2),
                                e(a2, b1),
                                e(a2, b2),
                            ]);
                            best = best.max(v);
                        }
                    }
                }
                best
            })
            .reduce(|| f64::NEG_INFINITY, f64::max);
        let opt = maximize_bell(model);
        assert!(opt.value >= best - 1e-12);
        assert!(opt.value - best < 1e-3);
    }

    #[test]
    fn angle_reduction() {
        assert_relative_eq!(reduce_angle(-PI / 4.0), 3.0 * PI / 4.0, epsilon = 1e-15);
        assert_eq!(reduce_angle(PI), 0.0);
        let s = AngleSettings::new(PI + 0.1, 0.0, 0.0, 0.0);
        assert_relative_eq!(s.a1, 0.1, epsilon = 1e-15);
    }

    proptest! {
        #[test]
        fn bell_parameter_invariant_under_global_shift(
            s in 0.1f64..1.0, k in -1.0f64..1.0, c in -3.0f64..3.0,
            a1 in 0.0f64..PI, b1 in 0.0f64..PI, a2 in 0.0f64..PI, b2 in 0.0f64..PI,
        ) {
            // For |k| = 1 the family depends on the angles only through
            // their difference or sum; shifting A and B together (or A
            // forward, B backward) leaves every correlation unchanged.
            let kk = if k >= 0.0 { 1.0 } else { -1.0 };
            let m = |a, b| Ok(family(s, kk)(a, b));
            let base = bell_at(m, &AngleSettings { a1, b1, a2, b2 }).unwrap();
            let cb = if kk < 0.0 { c } else { -c };
            let shifted = bell_at(m, &AngleSettings { a1: a1 + c, b1: b1 + cb, a2: a2 + c, b2: b2 + cb }).unwrap();
            prop_assert!((base - shifted).abs() < 1e-12);
        }

        #[test]
        fn correlation_is_bounded(p in proptest::array::uniform4(0.0f64..1.0)) {
            let t = CoincidenceTable::from_array(p);
            if let Ok(e) = correlation(&t) {
                prop_assert!(e.abs() <= 1.0);
            }
        }
    }
}
