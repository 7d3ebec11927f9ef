//! Predictability, detector quality, distinguishability and visibility.
//!
//! For a pure initial detector state the quantities obey
//! `(1 − P²)Q² + P² + V² = 1` and `D² = (1 − P²)Q² + P² = 1 − V²`; for mixed
//! states the left-hand side is bounded by one.

use serde::{Deserialize, Serialize};

use crate::branch::{
    branch_images, branch_overlap, branch_weights, coherence_term, BranchImage, JcParams, Order,
    EPS_WEIGHT,
};
use crate::error::{Error, Result};
use crate::fock::CavityState;

/// All duality quantities for one (state, parameters) configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualityReport {
    pub w_plus: f64,
    pub w_minus: f64,
    #[serde(rename = "P")]
    pub p: f64,
    /// `2|⟨S a C⟩|`.
    #[serde(rename = "V")]
    pub v: f64,
    /// `2|⟨C†ψ|a†Sψ⟩|`; equals `v` on resonance.
    #[serde(rename = "V_internal")]
    pub v_internal: f64,
    #[serde(rename = "Q")]
    pub q: f64,
    #[serde(rename = "D")]
    pub d: f64,
    /// `|(1 − P²)Q² + P² + V_internal² − 1|`, pure states only.
    pub residual_eq3: Option<f64>,
    /// `|D² − (1 − V_internal²)|`, pure states only.
    pub residual_dqp: Option<f64>,
    /// `(1 − P²)Q² + P² + V_internal²`.
    pub lhs_eq2: f64,
}

impl DualityReport {
    /// Left-hand side of the complementarity relation, `(1 − P²)Q² + P² + V_internal²`.
    pub fn complementarity_lhs(&self) -> f64 {
        (1.0 - self.p * self.p) * self.q * self.q
            + self.p * self.p
            + self.v_internal * self.v_internal
    }
}

pub fn predictability(w_plus: f64, w_minus: f64) -> f64 {
    (w_plus - w_minus).abs()
}

/// `(V, V_internal)`.
pub fn visibility(state: &CavityState, params: JcParams) -> (f64, f64) {
    let v = 2.0 * coherence_term(state, params).norm();
    let v_internal = match branch_overlap(state, params) {
        Ok(overlap) => 2.0 * overlap.norm(),
        Err(_) => 0.0,
    };
    (v, v_internal)
}

/// Direction of a branch: its image, or the θ-derivative of the image when
/// the branch weight vanishes at this θ.
fn branch_direction(
    image: BranchImage,
    state: &CavityState,
    params: JcParams,
    upper: bool,
) -> Result<BranchImage> {
    if image.norm_sqr() >= EPS_WEIGHT {
        return Ok(image);
    }
    let (plus, minus) = branch_images(state, params, Order::ThetaDerivative);
    let limit = if upper { plus } else { minus };
    if limit.norm_sqr() < EPS_WEIGHT {
        return Err(Error::Undefined(format!(
            "{} branch vanishes to second order at theta = {}",
            if upper { "upper" } else { "lower" },
            params.theta
        )));
    }
    Ok(limit)
}

/// Trace distance between the normalized conditional detector states.
///
/// When exactly one branch weight falls below [`EPS_WEIGHT`] the vanishing
/// conditional state is replaced by its limit along `θ`.
pub fn quality(state: &CavityState, params: JcParams) -> Result<f64> {
    let (plus, minus) = branch_images(state, params, Order::Value);
    let (w_plus, w_minus) = (plus.norm_sqr(), minus.norm_sqr());
    if w_plus < EPS_WEIGHT && w_minus < EPS_WEIGHT {
        return Err(Error::Undefined("both branch weights vanish".into()));
    }
    let plus = branch_direction(plus, state, params, true)?;
    let minus = branch_direction(minus, state, params, false)?;
    let q = match (plus, minus) {
        (BranchImage::Pure(u), BranchImage::Pure(v)) => {
            let overlap: num_complex::Complex64 = u.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
            let norms = u.iter().map(|z| z.norm_sqr()).sum::<f64>()
                * v.iter().map(|z| z.norm_sqr()).sum::<f64>();
            (1.0 - overlap.norm_sqr() / norms).max(0.0).sqrt()
        }
        (BranchImage::Diagonal(p), BranchImage::Diagonal(r)) => {
            let (np, nr) = (p.iter().sum::<f64>(), r.iter().sum::<f64>());
            0.5 * p
                .iter()
                .zip(&r)
                .map(|(a, b)| (a / np - b / nr).abs())
                .sum::<f64>()
        }
        _ => unreachable!("branch images share the input representation"),
    };
    Ok(q.min(1.0))
}

/// Trace norm of `w₊ρ₊ − w₋ρ₋`.
pub fn distinguishability(state: &CavityState, params: JcParams) -> f64 {
    let d = match branch_images(state, params, Order::Value) {
        (BranchImage::Pure(u), BranchImage::Pure(v)) => {
            let (wp, wm) = (
                u.iter().map(|z| z.norm_sqr()).sum::<f64>(),
                v.iter().map(|z| z.norm_sqr()).sum::<f64>(),
            );
            let overlap: num_complex::Complex64 = u.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
            ((wp + wm).powi(2) - 4.0 * overlap.norm_sqr())
                .max(0.0)
                .sqrt()
        }
        (BranchImage::Diagonal(p), BranchImage::Diagonal(r)) => {
            p.iter().zip(&r).map(|(a, b)| (a - b).abs()).sum()
        }
        _ => unreachable!("branch images share the input representation"),
    };
    d.min(1.0)
}

pub fn duality_report(state: &CavityState, params: JcParams) -> Result<DualityReport> {
    let (w_plus, w_minus) = branch_weights(state, params);
    let p = predictability(w_plus, w_minus);
    let (v, v_internal) = visibility(state, params);
    let q = quality(state, params)?;
    let d = distinguishability(state, params);
    let lhs_eq2 = (1.0 - p * p) * q * q + p * p + v_internal * v_internal;
    let (residual_eq3, residual_dqp) = if state.is_pure() {
        (
            Some((lhs_eq2 - 1.0).abs()),
            Some((d * d - (1.0 - v_internal * v_internal)).abs()),
        )
    } else {
        (None, None)
    };
    Ok(DualityReport {
        w_plus,
        w_minus,
        p,
        v,
        v_internal,
        q,
        d,
        residual_eq3,
        residual_dqp,
        lhs_eq2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{coherent_state, fock_state, thermal_state, DEFAULT_EPS_TRUNC as EPS};
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    #[test]
    fn predictability_values() {
        assert_eq!(predictability(0.5, 0.5), 0.0);
        assert_eq!(predictability(0.0, 1.0), 1.0);
        assert!((predictability(0.7, 0.3) - 0.4).abs() < 1e-15);
    }

    #[test]
    fn fock_states_show_no_fringes() {
        for n in 0..6 {
            let (v, vi) = visibility(&fock_state(n, 10).unwrap(), JcParams::resonant(0.9));
            assert_eq!((v, vi), (0.0, 0.0));
        }
    }

    #[test]
    fn vacuum_symmetric_point() {
        let vac = coherent_state(0.0, EPS).unwrap();
        let r = duality_report(&vac, JcParams::resonant(FRAC_PI_4)).unwrap();
        assert!(r.p < 1e-12 && r.v < 1e-12);
        assert!((r.q - 1.0).abs() < 1e-12 && (r.d - 1.0).abs() < 1e-12);
        assert!(r.residual_eq3.unwrap() <= 1e-12);
    }

    #[test]
    fn vacuum_pi_pulse_uses_the_limit_direction() {
        let vac = coherent_state(0.0, EPS).unwrap();
        let params = JcParams::resonant(FRAC_PI_2);
        assert!((quality(&vac, params).unwrap() - 1.0).abs() < 1e-12);
        let r = duality_report(&vac, params).unwrap();
        assert!((r.p - 1.0).abs() < 1e-12 && (r.d - 1.0).abs() < 1e-12);
        assert!((r.w_minus - 1.0).abs() < 1e-12 && r.v < 1e-12);
    }

    #[test]
    fn limit_direction_at_zero_theta() {
        // û₋ → a†ψ/|a†ψ| as θ → 0, so Q² = 1 − |⟨ψ|a†ψ⟩|²/⟨aa†⟩ = 1/(n̄ + 1) for a real coherent state.
        let state = coherent_state(3.0, EPS).unwrap();
        let q = quality(&state, JcParams::resonant(0.0)).unwrap();
        assert!((q * q - 0.25).abs() < 1e-10);
        let q_near = quality(&state, JcParams::resonant(1e-5)).unwrap();
        assert!((q - q_near).abs() < 1e-6);
    }

    #[test]
    fn quality_vanishes_at_high_intensity() {
        let mut last = f64::INFINITY;
        for nbar in [1.0, 10.0, 100.0] {
            let state = coherent_state(nbar, EPS).unwrap();
            let theta = crate::calibrate::calibrate_symmetric(&state, 0.0)
                .unwrap()
                .theta_star;
            let q = quality(&state, JcParams::resonant(theta)).unwrap();
            assert!(q < last);
            last = q;
        }
        assert!(last < 0.15);
    }

    #[test]
    fn coherent_identity_and_thermal_inequality() {
        let coh = coherent_state(5.0, EPS).unwrap();
        let r = duality_report(&coh, JcParams::resonant(1.0)).unwrap();
        assert!(r.residual_eq3.unwrap() <= 1e-8);
        assert!((r.v - r.v_internal).abs() < 1e-12);

        let th = thermal_state(1.0, EPS).unwrap();
        let r = duality_report(&th, JcParams::resonant(1.0)).unwrap();
        assert!(r.lhs_eq2 <= 1.0 + 1e-10);
        assert_eq!(r.v, 0.0);
        assert!(r.residual_eq3.is_none() && r.residual_dqp.is_none());
        assert!(r.d >= r.p - 1e-10);
    }

    #[test]
    fn json_nulls_for_mixed_residuals() {
        let th = thermal_state(1.0, EPS).unwrap();
        let r = duality_report(&th, JcParams::resonant(1.0)).unwrap();
        let v = serde_json::to_value(&r).unwrap();
        assert!(v["residual_eq3"].is_null() && v["residual_dqp"].is_null());
        for key in [
            "w_plus",
            "w_minus",
            "P",
            "V",
            "V_internal",
            "Q",
            "D",
            "lhs_eq2",
        ] {
            assert!(v[key].is_number(), "{key}");
        }
    }

    #[test]
    fn thermal_against_dense_populations() {
        let th = thermal_state(0.8, 1e-12).unwrap();
        let params = JcParams::new(1.1, 0.3).unwrap();
        let oracle = crate::oracle::DenseBranchOracle::new(params, th.dim());
        let (pp, pm) = oracle.branch_populations(&th);
        let d: f64 = pp.iter().zip(&pm).map(|(a, b)| (a - b).abs()).sum();
        assert!((distinguishability(&th, params) - d).abs() < 1e-10);
        let (np, nm) = (pp.iter().sum::<f64>(), pm.iter().sum::<f64>());
        let q = 0.5
            * pp.iter()
                .zip(&pm)
                .map(|(a, b)| (a / np - b / nm).abs())
                .sum::<f64>();
        assert!((quality(&th, params).unwrap() - q).abs() < 1e-10);
    }

    proptest! {
        #[test]
        fn pure_identities(nbar in 0.0f64..50.0, theta in 1e-3f64..PI, lambda in -1.0f64..1.0) {
            let state = coherent_state(nbar, EPS).unwrap();
            let r = duality_report(&state, JcParams::new(theta, lambda).unwrap()).unwrap();
            prop_assert!(r.residual_eq3.unwrap() <= 1e-8);
            prop_assert!(r.residual_dqp.unwrap() <= 1e-8);
            prop_assert!(r.d >= r.p - 1e-10);
            prop_assert!(r.d >= (r.q * (1.0 - r.p * r.p).sqrt()).max(r.p) - 1e-8);
            for x in [r.p, r.v, r.v_internal, r.q, r.d] {
                prop_assert!((0.0..=1.0 + 1e-10).contains(&x));
            }
            if lambda == 0.0 {
                prop_assert!((r.v - r.v_internal).abs() < 1e-12);
            }
        }

        #[test]
        fn resonant_conventions_agree(nbar in 0.0f64..50.0, theta in 0.0f64..PI) {
            let state = coherent_state(nbar, EPS).unwrap();
            let (v, vi) = visibility(&state, JcParams::resonant(theta));
            prop_assert!((v - vi).abs() < 1e-12);
        }

        #[test]
        fn mixed_inequality(nbar in 0.0f64..12.0, theta in 1e-3f64..6.0, lambda in -1.0f64..1.0) {
            let state = thermal_state(nbar, EPS).unwrap();
            let r = duality_report(&state, JcParams::new(theta, lambda).unwrap()).unwrap();
            prop_assert!(r.lhs_eq2 <= 1.0 + 1e-10);
            prop_assert!(r.d >= r.p - 1e-10);
        }
    }
}
