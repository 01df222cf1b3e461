//! Coincidence probabilities for a parametric down-conversion source.
//!
//! The source emits two independent two-mode squeezed vacua, `(H_A, V_B)`
//! and `(V_A, H_B)`, the second carrying the relative phase. After loss and
//! the analyzers the normally ordered generating function of the four
//! detector photon numbers is `(1 - t^2)^4 / C0`, where `t = tanh chi` and
//! `C0` is multilinear in the effective efficiencies `Omega`. Derivatives of
//! `C0` give the single-detector (`C_i`) and pair (`C_ij`) coefficients used
//! by the coincidence brackets.

use num_complex::Complex64;

use crate::channel::{Pdtc, TransmissionSample};
use crate::chsh::CoincidenceTable;
use crate::detector::{Arm, DetectionMode, DetectorBank, Pair};
use crate::error::{invalid, Error, Result};
use crate::quadrature::neumaier_sum;

/// `tanh chi` of the down-conversion source.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct SqueezingParam(f64);

impl SqueezingParam {
    pub fn new(tanh_chi: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&tanh_chi) {
            return Err(invalid("tanh_chi", format!("{tanh_chi} is outside [0, 1)")));
        }
        Ok(Self(tanh_chi))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Detector efficiency times channel transmission for each detector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Omegas {
    pub ta: f64,
    pub ra: f64,
    pub tb: f64,
    pub rb: f64,
}

impl Omegas {
    pub fn uniform(w: f64) -> Self {
        Self {
            ta: w,
            ra: w,
            tb: w,
            rb: w,
        }
    }

    fn as_array(&self) -> [f64; 4] {
        [self.ta, self.ra, self.tb, self.rb]
    }
}

pub fn omegas(bank: &DetectorBank, t: TransmissionSample) -> Omegas {
    Omegas {
        ta: bank.t_a.eta() * t.eta_a,
        ra: bank.r_a.eta() * t.eta_a,
        tb: bank.t_b.eta() * t.eta_b,
        rb: bank.r_b.eta() * t.eta_b,
    }
}

/// Two-photon interference terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DCoefficients {
    pub tt: f64,
    pub tr: f64,
    pub rr: f64,
    pub rt: f64,
    pub d0: f64,
}

pub fn d_coefficients(
    om: &Omegas,
    theta_a: f64,
    theta_b: f64,
    phi: f64,
    tanh_chi: f64,
) -> DCoefficients {
    let t2 = tanh_chi * tanh_chi;
    let e = Complex64::from_polar(1.0, -phi);
    let (sa, ca) = theta_a.sin_cos();
    let (sb, cb) = theta_b.sin_cos();
    DCoefficients {
        tt: om.ra * om.rb * t2 * (e * sa * cb + ca * sb).norm_sqr(),
        tr: om.ra * om.tb * t2 * (e * sa * sb - ca * cb).norm_sqr(),
        rr: om.ta * om.tb * t2 * (-e * ca * sb - sa * cb).norm_sqr(),
        rt: om.ta * om.rb * t2 * (-e * ca * cb + sa * sb).norm_sqr(),
        d0: om.ta * om.ra * om.tb * om.rb * t2 * t2,
    }
}

/// Coefficient set for one transmission realization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PdcCoefficients {
    pub omegas: Omegas,
    pub d: DCoefficients,
    pub c0: f64,
    pub c_ta: f64,
    pub c_ra: f64,
    pub c_tb: f64,
    pub c_rb: f64,
    pub c_tt: f64,
    pub c_tr: f64,
    pub c_rt: f64,
    pub c_rr: f64,
}

impl PdcCoefficients {
    pub fn single_a(&self, arm: Arm) -> f64 {
        match arm {
            Arm::Transmitted => self.c_ta,
            Arm::Reflected => self.c_ra,
        }
    }

    pub fn single_b(&self, arm: Arm) -> f64 {
        match arm {
            Arm::Transmitted => self.c_tb,
            Arm::Reflected => self.c_rb,
        }
    }

    pub fn pair(&self, pair: Pair) -> f64 {
        match (pair.a, pair.b) {
            (Arm::Transmitted, Arm::Transmitted) => self.c_tt,
            (Arm::Transmitted, Arm::Reflected) => self.c_tr,
            (Arm::Reflected, Arm::Transmitted) => self.c_rt,
            (Arm::Reflected, Arm::Reflected) => self.c_rr,
        }
    }
}

pub fn c_coefficients_general(om: &Omegas, d: &DCoefficients, tanh_chi: f64) -> PdcCoefficients {
    let t2 = tanh_chi * tanh_chi;
    let t4 = t2 * t2;
    let [bta, bra, btb, brb] = om.as_array().map(|w| 1.0 + (w - 1.0) * t2);
    let (ota, ora, otb, orb) = (om.ta, om.ra, om.tb, om.rb);
    let DCoefficients {
        tt: dtt,
        tr: dtr,
        rr: drr,
        rt: drt,
        d0,
    } = *d;
    let c0 = bta * bra * btb * brb
        - bta * btb * dtt
        - bta * brb * dtr
        - bra * brb * drr
        - bra * btb * drt
        + d0;
    let c_ta = -ota * t2 * bra * btb * brb
        + ota * t2 * btb * dtt
        + ota * t2 * brb * dtr
        + bra * brb * drr
        + bra * btb * drt
        - d0;
    let c_ra = -ora * t2 * bta * btb * brb
        + bta * btb * dtt
        + bta * brb * dtr
        + ora * t2 * brb * drr
        + ora * t2 * btb * drt
        - d0;
    let c_tb = -otb * t2 * bta * bra * brb
        + otb * t2 * bta * dtt
        + bta * brb * dtr
        + bra * brb * drr
        + otb * t2 * bra * drt
        - d0;
    let c_rb = -orb * t2 * bta * bra * btb
        + bta * btb * dtt
        + orb * t2 * bta * dtr
        + orb * t2 * bra * drr
        + bra * btb * drt
        - d0;
    let c_tt = ota * otb * t4 * bra * brb
        - ota * otb * t4 * dtt
        - ota * t2 * brb * dtr
        - bra * brb * drr
        - otb * t2 * bra * drt
        + d0;
    let c_tr = ota * orb * t4 * bra * btb
        - ota * t2 * btb * dtt
        - ota * orb * t4 * dtr
        - orb * t2 * bra * drr
        - bra * btb * drt
        + d0;
    let c_rt = ora * otb * t4 * bta * brb
        - otb * t2 * bta * dtt
        - bta * brb * dtr
        - ora * t2 * brb * drr
        - ora * otb * t4 * drt
        + d0;
    let c_rr = ora * orb * t4 * bta * btb
        - bta * btb * dtt
        - orb * t2 * bta * dtr
        - ora * orb * t4 * drr
        - ora * t2 * btb * drt
        + d0;
    PdcCoefficients {
        omegas: *om,
        d: *d,
        c0,
        c_ta,
        c_ra,
        c_tb,
        c_rb,
        c_tt,
        c_tr,
        c_rt,
        c_rr,
    }
}

/// Coefficients for four identical effective efficiencies and a
/// singlet-like source phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelatedCoefficients {
    pub c0: f64,
    /// Every single-detector coefficient.
    pub c_single: f64,
    /// `C_TT = C_RR`.
    pub c_same: f64,
    /// `C_TR = C_RT`.
    pub c_diff: f64,
}

impl CorrelatedCoefficients {
    pub fn pair(&self, pair: Pair) -> f64 {
        if pair.is_same() {
            self.c_same
        } else {
            self.c_diff
        }
    }
}

pub fn c_coefficients_correlated(
    eta: f64,
    theta_a: f64,
    theta_b: f64,
    tanh_chi: f64,
) -> CorrelatedCoefficients {
    let t2 = tanh_chi * tanh_chi;
    let bracket = 1.0 + (eta - 1.0) * t2;
    let f = eta * eta * t2 - bracket * bracket;
    let lead = eta * eta * t2 * (1.0 - t2) * (1.0 - t2);
    let loss = (1.0 - eta) * (1.0 - eta) * t2;
    let delta = theta_a - theta_b;
    let (sd, cd) = delta.sin_cos();
    CorrelatedCoefficients {
        c0: f * f,
        c_single: eta * (1.0 - eta) * (1.0 - t2) * t2 * f,
        c_same: lead * (loss - sd * sd),
        c_diff: lead * (loss - cd * cd),
    }
}

/// PNR bracket for one detector pair.
pub fn pnr_bracket(c0: f64, c_a: f64, c_b: f64, c_ab: f64, n_a: f64, n_b: f64) -> f64 {
    let c0_2 = c0 * c0;
    2.0 * c_a * c_b / (c0_2 * c0) - c_ab / c0_2 - n_a * c_b / c0_2 - n_b * c_a / c0_2
        + n_a * n_b / c0
}

/// On/off bracket for one detector pair, rearranged so that the O(1) terms
/// cancel analytically.
pub fn on_off_bracket(c0: f64, c_a: f64, c_b: f64, c_ab: f64, n_a: f64, n_b: f64) -> f64 {
    let a = c0;
    let b = c0 + c_a;
    let c = c0 + c_b;
    let d = neumaier_sum([c0, c_a, c_b, c_ab]);
    let (x_a, x_b) = (n_a.exp_m1(), n_b.exp_m1());
    let q = 2.0 * c0 * c_b + c0 * c_ab + c_a * c_b + c_b * c_b + c_b * c_ab;
    c_a * q / (a * b * c * d)
        - c_ab / (c * d)
        - x_a * (c_b + c_ab) / (b * d)
        - x_b * (c_a + c_ab) / (c * d)
        + x_a * x_b / d
}

fn bracket(mode: DetectionMode, c0: f64, c_a: f64, c_b: f64, c_ab: f64, n_a: f64, n_b: f64) -> f64 {
    match mode {
        DetectionMode::Pnr => pnr_bracket(c0, c_a, c_b, c_ab, n_a, n_b),
        DetectionMode::OnOff => on_off_bracket(c0, c_a, c_b, c_ab, n_a, n_b),
    }
}

fn check_c0(c0: f64) -> Result<()> {
    if c0 > 0.0 && c0.is_finite() {
        Ok(())
    } else {
        Err(Error::Unphysical(format!("C0 = {c0} is not positive")))
    }
}

fn is_singlet_phase(phi: f64) -> bool {
    let r = (phi - std::f64::consts::PI).rem_euclid(2.0 * std::f64::consts::PI);
    r < 1e-12 || 2.0 * std::f64::consts::PI - r < 1e-12
}

/// Whether the one-scalar specialization applies.
pub fn uses_correlated_path(bank: &DetectorBank, pdtc: &Pdtc, phi: f64) -> bool {
    bank.is_equal() && pdtc.is_correlated() && is_singlet_phase(phi)
}

/// Brackets for the four pairs in table order at one transmission sample.
pub fn brackets_at(
    bank: &DetectorBank,
    sample: TransmissionSample,
    tanh_chi: f64,
    theta_a: f64,
    theta_b: f64,
    phi: f64,
) -> Result<[f64; 4]> {
    let om = omegas(bank, sample);
    let d = d_coefficients(&om, theta_a, theta_b, phi, tanh_chi);
    let c = c_coefficients_general(&om, &d, tanh_chi);
    check_c0(c.c0)?;
    Ok(Pair::ALL.map(|p| {
        bracket(
            bank.mode,
            c.c0,
            c.single_a(p.a),
            c.single_b(p.b),
            c.pair(p),
            bank.site_a(p.a).noise(),
            bank.site_b(p.b).noise(),
        )
    }))
}

fn correlated_brackets_at(
    bank: &DetectorBank,
    eta_channel: f64,
    tanh_chi: f64,
    theta_a: f64,
    theta_b: f64,
) -> Result<[f64; 4]> {
    let det = bank.t_a;
    let c = c_coefficients_correlated(det.eta() * eta_channel, theta_a, theta_b, tanh_chi);
    check_c0(c.c0)?;
    let n = det.noise();
    Ok(Pair::ALL.map(|p| bracket(bank.mode, c.c0, c.c_single, c.c_single, c.pair(p), n, n)))
}

/// All four coincidence probabilities at one angle pair.
pub fn coincidence_table(
    bank: &DetectorBank,
    pdtc: &Pdtc,
    tanh_chi: SqueezingParam,
    theta_a: f64,
    theta_b: f64,
    phi: f64,
) -> Result<CoincidenceTable> {
    let t = tanh_chi.value();
    let t2 = t * t;
    let prefactor = (1.0 - t2).powi(4) * (-bank.total_noise()).exp();
    let averaged = if uses_correlated_path(bank, pdtc, phi) {
        pdtc.try_average_vec(|s| correlated_brackets_at(bank, s.eta_a, t, theta_a, theta_b))?
    } else {
        pdtc.try_average_vec(|s| brackets_at(bank, s, t, theta_a, theta_b, phi))?
    };
    Ok(CoincidenceTable::from_array(
        averaged.map(|v| prefactor * v),
    ))
}

/// Coincidence probability for one detector pair.
pub fn coincidence_probability(
    bank: &DetectorBank,
    pdtc: &Pdtc,
    tanh_chi: SqueezingParam,
    theta_a: f64,
    theta_b: f64,
    phi: f64,
    pair: Pair,
) -> Result<f64> {
    let table = coincidence_table(bank, pdtc, tanh_chi, theta_a, theta_b, phi)?;
    let idx = Pair::ALL
        .iter()
        .position(|p| *p == pair)
        .expect("pair listed in Pair::ALL");
    Ok(table.to_array()[idx])
}

/// Correlation coefficient of the down-conversion source.
pub fn correlation(
    bank: &DetectorBank,
    pdtc: &Pdtc,
    tanh_chi: SqueezingParam,
    theta_a: f64,
    theta_b: f64,
    phi: f64,
) -> Result<f64> {
    crate::chsh::correlation(&coincidence_table(
        bank, pdtc, tanh_chi, theta_a, theta_b, phi,
    )?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detector::DetectorParams;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn det(eta: f64, n: f64) -> DetectorParams {
        DetectorParams::new(eta, n).unwrap()
    }

    fn general(om: Omegas, ta: f64, tb: f64, phi: f64, t: f64) -> PdcCoefficients {
        c_coefficients_general(&om, &d_coefficients(&om, ta, tb, phi, t), t)
    }

    /// `C0` as an explicit function of the four efficiencies, for finite
    /// differences.
    fn c0_of(om: [f64; 4], ta: f64, tb: f64, phi: f64, t: f64) -> f64 {
        let om = Omegas {
            ta: om[0],
            ra: om[1],
            tb: om[2],
            rb: om[3],
        };
        general(om, ta, tb, phi, t).c0
    }

    #[test]
    fn omega_examples() {
        let bank = DetectorBank::equal(DetectorParams::ideal(), DetectionMode::Pnr);
        assert_eq!(
            omegas(&bank, TransmissionSample::common(1.0).unwrap()),
            Omegas::uniform(1.0)
        );
        let bank = DetectorBank::equal(det(0.25, 0.0), DetectionMode::Pnr);
        let e = (-9.1f64).exp();
        assert_eq!(
            omegas(&bank, TransmissionSample::common(e).unwrap()),
            Omegas::uniform(0.25 * e)
        );
        let bank = DetectorBank {
            t_a: det(0.2, 0.0),
            r_a: det(0.3, 0.0),
            t_b: det(0.3, 0.0),
            r_b: det(0.3, 0.0),
            mode: DetectionMode::Pnr,
        };
        let o = omegas(&bank, TransmissionSample::new(0.5, 0.4).unwrap());
        for (x, y) in o.as_array().iter().zip([0.1, 0.15, 0.12, 0.12]) {
            assert_relative_eq!(*x, y, epsilon = 1e-15);
        }
    }

    #[test]
    fn vacuum_source_coefficients() {
        let om = Omegas {
            ta: 0.3,
            ra: 0.5,
            tb: 0.7,
            rb: 0.9,
        };
        let d = d_coefficients(&om, 0.4, 1.2, 2.0, 0.0);
        assert_eq!([d.tt, d.tr, d.rr, d.rt, d.d0], [0.0; 5]);
        let c = c_coefficients_general(&om, &d, 0.0);
        assert_eq!(c.c0, 1.0);
        for v in [
            c.c_ta, c.c_ra, c.c_tb, c.c_rb, c.c_tt, c.c_tr, c.c_rt, c.c_rr,
        ] {
            assert_eq!(v, 0.0);
        }
        let cc = c_coefficients_correlated(0.4, 0.3, 0.1, 0.0);
        assert_eq!(
            (cc.c0, cc.c_single, cc.c_same, cc.c_diff),
            (1.0, 0.0, 0.0, 0.0)
        );
    }

    #[test]
    fn d_example_at_diagonal_angles() {
        let t = 0.37;
        let d = d_coefficients(&Omegas::uniform(1.0), PI / 4.0, PI / 4.0, 0.0, t);
        assert_relative_eq!(d.tt, t * t, epsilon = 1e-15);
    }

    #[test]
    fn lossless_correlated_example() {
        let (t, ta, tb) = (0.3, 0.2, 1.0);
        let c = c_coefficients_correlated(1.0, ta, tb, t);
        assert_eq!(c.c_single, 0.0);
        let t2 = t * t;
        let expect = t2 * (1.0 - t2) * (1.0 - t2) * -(ta - tb).sin().powi(2);
        assert_relative_eq!(c.c_same, expect, epsilon = 1e-15);
    }

    #[test]
    fn correlated_form_needs_singlet_phase() {
        let (eta, ta, tb, t) = (0.6, 0.3, 1.4, 0.4);
        let cc = c_coefficients_correlated(eta, ta, tb, t);
        let g = general(Omegas::uniform(eta), ta, tb, PI, t);
        assert_relative_eq!(cc.c_same, g.c_tt, epsilon = 1e-14);
        let g0 = general(Omegas::uniform(eta), ta, tb, 0.0, t);
        assert!((cc.c_same - g0.c_tt).abs() > 1e-4);
    }

    #[test]
    fn coefficients_are_derivatives_of_c0() {
        let om = [0.31, 0.58, 0.77, 0.42];
        let (ta, tb, phi, t) = (0.7, 2.1, 0.9, 0.45);
        let c = general(
            Omegas {
                ta: om[0],
                ra: om[1],
                tb: om[2],
                rb: om[3],
            },
            ta,
            tb,
            phi,
            t,
        );
        // C0 is multilinear in each Omega, so differences are exact up to
        // rounding: -Omega_i dC0/dOmega_i = C0(Omega) - C0(Omega_i = 0).
        let zeroed = |i: usize| {
            let mut o = om;
            o[i] = 0.0;
            c0_of(o, ta, tb, phi, t)
        };
        let singles = [c.c_ta, c.c_ra, c.c_tb, c.c_rb];
        for (i, ci) in singles.iter().enumerate() {
            assert_relative_eq!(c.c0 + ci, zeroed(i), epsilon = 1e-14);
        }
        let both = |i: usize, j: usize| {
            let mut o = om;
            o[i] = 0.0;
            o[j] = 0.0;
            c0_of(o, ta, tb, phi, t)
        };
        let pairs = [
            (0, 2, c.c_tt),
            (0, 3, c.c_tr),
            (1, 2, c.c_rt),
            (1, 3, c.c_rr),
        ];
        for (i, j, cij) in pairs {
            // Mixed second difference of a bilinear function.
            let mixed = c.c0 - zeroed(i) - zeroed(j) + both(i, j);
            assert_relative_eq!(cij, mixed, epsilon = 1e-14);
        }
    }

    #[test]
    fn vacuum_source_gives_noise_only_coincidences() {
        let pdtc = Pdtc::dirac(0.4, 0.7).unwrap();
        let zero = SqueezingParam::new(0.0).unwrap();
        for mode in [DetectionMode::Pnr, DetectionMode::OnOff] {
            let bank = DetectorBank::equal(det(0.25, 0.0), mode);
            let t = coincidence_table(&bank, &pdtc, zero, 0.1, 0.2, PI).unwrap();
            assert_eq!(t.to_array(), [0.0; 4]);
        }
        let n = 1e-4;
        let bank = DetectorBank::equal(det(0.25, n), DetectionMode::Pnr);
        let p = coincidence_probability(&bank, &pdtc, zero, 0.1, 0.2, PI, Pair::TR).unwrap();
        assert_relative_eq!(p, (-4.0 * n).exp() * n * n, max_relative = 1e-14);
    }

    #[test]
    fn bracket_rearrangement_matches_direct_form() {
        let cases: [(f64, f64, f64, f64, f64, f64); 3] = [
            (1.1, 0.05, -0.03, 0.02, 1e-3, 4e-3),
            (0.7, -0.08, 0.04, -0.01, 0.0, 2e-2),
            (1.3, 0.0, 0.0, 0.0, 5e-3, 5e-3),
        ];
        for (c0, ca, cb, cab, na, nb) in cases {
            let naive = (na + nb).exp() / (c0 + ca + cb + cab)
                - nb.exp() / (c0 + cb)
                - na.exp() / (c0 + ca)
                + 1.0 / c0;
            let stable = on_off_bracket(c0, ca, cb, cab, na, nb);
            assert_relative_eq!(stable, naive, epsilon = 1e-13);
        }
    }

    #[test]
    fn squeezing_range() {
        assert!(SqueezingParam::new(1.0).is_err());
        assert!(SqueezingParam::new(-0.1).is_err());
        assert!(SqueezingParam::new(0.999).is_ok());
    }

    #[test]
    fn fast_path_matches_general_path() {
        let bank = DetectorBank::equal(det(0.6, 1e-5), DetectionMode::OnOff);
        let pdtc = Pdtc::log_normal(1.5, 0.5, true).unwrap();
        let t = SqueezingParam::new(0.2).unwrap();
        assert!(uses_correlated_path(&bank, &pdtc, PI));
        let fast = coincidence_table(&bank, &pdtc, t, 0.3, 0.9, PI).unwrap();
        // Nudge one detector by a representable amount to force the general path.
        let mut nudged = bank;
        nudged.r_b = det(0.6, 1e-5 * (1.0 + f64::EPSILON));
        let slow = coincidence_table(&nudged, &pdtc, t, 0.3, 0.9, PI).unwrap();
        for (a, b) in fast.to_array().iter().zip(slow.to_array()) {
            assert_relative_eq!(*a, b, max_relative = 1e-9);
        }
    }

    fn om_strategy() -> impl Strategy<Value = Omegas> {
        proptest::array::uniform4(0.0f64..1.0).prop_map(|o| Omegas {
            ta: o[0],
            ra: o[1],
            tb: o[2],
            rb: o[3],
        })
    }

    proptest! {
        #[test]
        fn d_modulus_matches_expanded_form(
            om in om_strategy(), ta in 0.0f64..PI, tb in 0.0f64..PI, phi in 0.0f64..(2.0 * PI), t in 0.0f64..0.99,
        ) {
            let d = d_coefficients(&om, ta, tb, phi, t);
            let (sa, ca, sb, cb) = (ta.sin(), ta.cos(), tb.sin(), tb.cos());
            let expanded = sa * sa * cb * cb + ca * ca * sb * sb + 2.0 * phi.cos() * sa * ca * sb * cb;
            prop_assert!((d.tt - om.ra * om.rb * t * t * expanded).abs() < 1e-14);
            prop_assert!(d.tt >= 0.0 && d.tr >= 0.0 && d.rr >= 0.0 && d.rt >= 0.0 && d.d0 >= 0.0);
        }

        #[test]
        fn equal_efficiencies_give_site_symmetric_singles(
            w in 0.0f64..1.0, theta in 0.0f64..PI, phi in 0.0f64..(2.0 * PI), t in 0.0f64..0.9,
        ) {
            let c = general(Omegas::uniform(w), theta, theta, phi, t);
            prop_assert!((c.c_ta - c.c_tb).abs() < 1e-12);
            prop_assert!((c.c_ra - c.c_rb).abs() < 1e-12);
        }

        #[test]
        fn site_swap_symmetry(
            om in om_strategy(), ta in 0.0f64..PI, tb in 0.0f64..PI, phi in 0.0f64..(2.0 * PI), t in 0.0f64..0.9,
        ) {
            let c = general(om, ta, tb, phi, t);
            let swapped = Omegas { ta: om.tb, ra: om.rb, tb: om.ta, rb: om.ra };
            let s = general(swapped, tb, ta, -phi, t);
            prop_assert!((c.c_tt - s.c_tt).abs() < 1e-12);
            prop_assert!((c.c_rr - s.c_rr).abs() < 1e-12);
            prop_assert!((c.c_tr - s.c_rt).abs() < 1e-12);
            prop_assert!((c.c_rt - s.c_tr).abs() < 1e-12);
        }

        #[test]
        fn correlated_specialization_matches_general(
            eta in 0.0f64..1.0, ta in 0.0f64..PI, tb in 0.0f64..PI, t in 0.0f64..0.9,
        ) {
            let cc = c_coefficients_correlated(eta, ta, tb, t);
            let g = general(Omegas::uniform(eta), ta, tb, PI, t);
            prop_assert!((cc.c0 - g.c0).abs() < 1e-12);
            for single in [g.c_ta, g.c_ra, g.c_tb, g.c_rb] {
                prop_assert!((cc.c_single - single).abs() < 1e-12);
            }
            prop_assert!((cc.c_same - g.c_tt).abs() < 1e-12 && (cc.c_same - g.c_rr).abs() < 1e-12);
            prop_assert!((cc.c_diff - g.c_tr).abs() < 1e-12 && (cc.c_diff - g.c_rt).abs() < 1e-12);
        }

        #[test]
        fn probabilities_periodic_in_analyzer_angle(
            e in proptest::array::uniform4(0.05f64..1.0), n in 0.0f64..1e-3, onoff: bool,
            ea in 0.0f64..1.0, eb in 0.0f64..1.0, ta in 0.0f64..PI, tb in 0.0f64..PI,
            phi in 0.0f64..(2.0 * PI), t in 0.0f64..0.5,
        ) {
            let mode = if onoff { DetectionMode::OnOff } else { DetectionMode::Pnr };
            let bank = DetectorBank { t_a: det(e[0], n), r_a: det(e[1], n), t_b: det(e[2], n), r_b: det(e[3], n), mode };
            let s = TransmissionSample::new(ea, eb).unwrap();
            let base = brackets_at(&bank, s, t, ta, tb, phi).unwrap();
            let shifted = brackets_at(&bank, s, t, ta + PI, tb - PI, phi).unwrap();
            for (x, y) in base.iter().zip(shifted) {
                prop_assert!((x - y).abs() <= 1e-12 * x.abs().max(1e-12));
            }
        }
    }
}
