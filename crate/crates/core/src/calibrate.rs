//! Per-state tuning of the Rabi phase `θ` for symmetric (`P = 0`) and
//! maximally asymmetric beam splitting, and the sweeps built on it.

use std::cell::Cell;
use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::branch::{branch_weights, JcParams};
use crate::duality::duality_report;
use crate::error::{Error, Result};
use crate::fock::{coherent_state, CavityState};
use crate::format::csv_table;

/// Upper end of the θ search window.
pub const THETA_MAX: f64 = TAU;

/// Coarse steps used to bracket the symmetric root.
pub const SCAN_STEPS: usize = 4096;

/// Coarse grid size for the asymmetric search; a multiple of [`SCAN_STEPS`]
/// so every point of the coarser grid is also visited.
pub const ASYMMETRIC_GRID: usize = 2 * SCAN_STEPS;

const ROOT_TOL: f64 = 1e-12;
const THETA_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    Symmetric,
    MaxAsymmetric,
}

impl std::str::FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "symmetric" | "sym" => Ok(Regime::Symmetric),
            "asymmetric" | "max-asymmetric" | "maxasymmetric" | "asym" => Ok(Regime::MaxAsymmetric),
            other => Err(Error::Config(format!("unknown regime {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResult {
    pub theta_star: f64,
    #[serde(rename = "achieved_P")]
    pub achieved_p: f64,
    pub target: Regime,
    /// `|w₊ − w₋|` for the symmetric target, `1 − P` for the asymmetric one.
    pub residual: f64,
    pub evaluations: usize,
}

/// `g(θ) = w₊(θ) − w₋(θ)` with an evaluation counter.
struct Asymmetry<'a> {
    state: &'a CavityState,
    lambda: f64,
    calls: Cell<usize>,
}

impl<'a> Asymmetry<'a> {
    fn new(state: &'a CavityState, lambda: f64) -> Self {
        Self {
            state,
            lambda,
            calls: Cell::new(0),
        }
    }

    fn at(&self, theta: f64) -> f64 {
        self.calls.set(self.calls.get() + 1);
        let (wp, wm) = branch_weights(
            self.state,
            JcParams {
                theta,
                lambda: self.lambda,
            },
        );
        wp - wm
    }
}

/// Golden-section search for the maximum of `f` on `[a, b]`.
pub fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while b - a > tol {
        // ties keep the lower half
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Bisection on a sign change of `g` in `[lo, hi]`.
fn bisect(g: &Asymmetry, mut lo: f64, mut hi: f64, mut g_lo: f64) -> (f64, f64) {
    let (mut best, mut g_best) = (lo, g_lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let g_mid = g.at(mid);
        if g_mid.abs() < g_best.abs() {
            (best, g_best) = (mid, g_mid);
        }
        if g_mid.abs() <= ROOT_TOL {
            break;
        }
        if (g_mid > 0.0) == (g_lo > 0.0) {
            (lo, g_lo) = (mid, g_mid);
        } else {
            hi = mid;
        }
    }
    (best, g_best)
}

/// Smallest `θ > 0` with `w₊(θ) = w₋(θ)`.
///
/// The coarse scan stops at the first bracket that either changes sign or
/// holds a local minimum of `|g|` that golden-section refinement drives to
/// zero (a tangential root, e.g. the detuned vacuum).
pub fn calibrate_symmetric(state: &CavityState, lambda: f64) -> Result<CalibrationResult> {
    let g = Asymmetry::new(state, lambda);
    let step = THETA_MAX / SCAN_STEPS as f64;
    let mut prev2: Option<(f64, f64)> = None;
    let mut prev = (0.0, g.at(0.0));
    let mut root = None;
    for k in 1..=SCAN_STEPS {
        let theta = k as f64 * step;
        let gk = g.at(theta);
        if gk.abs() <= ROOT_TOL {
            root = Some((theta, gk));
            break;
        }
        if (gk > 0.0) != (prev.1 > 0.0) {
            root = Some(bisect(&g, prev.0, theta, prev.1));
            break;
        }
        if let Some((t2, g2)) = prev2 {
            if prev.1.abs() < g2.abs() && prev.1.abs() <= gk.abs() {
                let (tm, neg_abs) = golden_max(|t| -g.at(t).abs(), t2, theta, THETA_TOL);
                if -neg_abs <= ROOT_TOL {
                    root = Some((tm, g.at(tm)));
                    break;
                }
            }
        }
        prev2 = Some(prev);
        prev = (theta, gk);
    }
    let (theta_star, g_star) = root.ok_or_else(|| {
        Error::Calibration(format!(
            "no symmetric operating point for theta in (0, {THETA_MAX}]"
        ))
    })?;
    Ok(CalibrationResult {
        theta_star,
        achieved_p: g_star.abs(),
        target: Regime::Symmetric,
        residual: g_star.abs(),
        evaluations: g.calls.get(),
    })
}

/// θ grid and window used by [`calibrate_asymmetric`]: the points `k·θ_max/N`
/// from the first local minimum of `P` onwards. The initial descending lobe
/// of `P` is the no-interaction limit `θ → 0`, where `P → 1` without any beam
/// splitting, and is excluded.
pub fn asymmetric_window(state: &CavityState, lambda: f64) -> (usize, Vec<f64>) {
    let g = Asymmetry::new(state, lambda);
    asymmetric_grid(&g)
}

fn asymmetric_grid(g: &Asymmetry) -> (usize, Vec<f64>) {
    let step = THETA_MAX / ASYMMETRIC_GRID as f64;
    // index 0 is θ = 0
    let p: Vec<f64> = (0..=ASYMMETRIC_GRID)
        .map(|k| g.at(k as f64 * step).abs())
        .collect();
    let start = (1..ASYMMETRIC_GRID)
        .find(|&k| p[k] <= p[k - 1] && p[k] <= p[k + 1])
        .unwrap_or(1);
    (start, p)
}

/// `θ` maximizing `P = |w₊ − w₋|` past the no-interaction lobe.
pub fn calibrate_asymmetric(state: &CavityState, lambda: f64) -> Result<CalibrationResult> {
    let g = Asymmetry::new(state, lambda);
    let step = THETA_MAX / ASYMMETRIC_GRID as f64;
    let (start, p) = asymmetric_grid(&g);
    let mut best = start;
    for k in start..=ASYMMETRIC_GRID {
        if p[k] > p[best] {
            best = k;
        }
    }
    let lo = best.saturating_sub(1).max(start) as f64 * step;
    let hi = (best + 1).min(ASYMMETRIC_GRID) as f64 * step;
    let (theta_g, p_g) = golden_max(|t| g.at(t).abs(), lo, hi, THETA_TOL);
    let theta_grid = best as f64 * step;
    let (theta_star, achieved_p) = if p_g > p[best] || (p_g == p[best] && theta_g < theta_grid) {
        (theta_g, p_g)
    } else {
        (theta_grid, p[best])
    };
    Ok(CalibrationResult {
        theta_star,
        achieved_p,
        target: Regime::MaxAsymmetric,
        residual: 1.0 - achieved_p,
        evaluations: g.calls.get(),
    })
}

pub fn calibrate(state: &CavityState, lambda: f64, regime: Regime) -> Result<CalibrationResult> {
    match regime {
        Regime::Symmetric => calibrate_symmetric(state, lambda),
        Regime::MaxAsymmetric => calibrate_asymmetric(state, lambda),
    }
}

/// One row of a regime sweep over coherent-state intensities.
///
/// `V2` is the squared visibility `2|⟨S a C⟩|`; `lhs_eq2` uses the branch
/// overlap visibility. Both agree on resonance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub nbar: f64,
    pub theta: f64,
    #[serde(rename = "achieved_P")]
    pub achieved_p: f64,
    #[serde(rename = "P2")]
    pub p2: f64,
    #[serde(rename = "Q2")]
    pub q2: f64,
    #[serde(rename = "D2")]
    pub d2: f64,
    #[serde(rename = "V2")]
    pub v2: f64,
    pub lhs_eq2: f64,
    /// Set when calibration or evaluation failed; numeric fields are then NaN.
    pub error: Option<String>,
}

impl SweepRow {
    fn failed(nbar: f64, err: Error) -> Self {
        let nan = f64::NAN;
        Self {
            nbar,
            theta: nan,
            achieved_p: nan,
            p2: nan,
            q2: nan,
            d2: nan,
            v2: nan,
            lhs_eq2: nan,
            error: Some(err.to_string()),
        }
    }

    pub fn is_ok(&self) -> bool {
        self.error.is_none()
    }
}

fn sweep_row(regime: Regime, nbar: f64, lambda: f64, eps_trunc: f64) -> Result<SweepRow> {
    let state = coherent_state(nbar, eps_trunc)?;
    let cal = calibrate(&state, lambda, regime)?;
    let r = duality_report(
        &state,
        JcParams {
            theta: cal.theta_star,
            lambda,
        },
    )?;
    Ok(SweepRow {
        nbar,
        theta: cal.theta_star,
        achieved_p: cal.achieved_p,
        p2: r.p * r.p,
        q2: r.q * r.q,
        d2: r.d * r.d,
        v2: r.v * r.v,
        lhs_eq2: r.lhs_eq2,
        error: None,
    })
}

/// Calibrate and report each coherent intensity in `nbar_grid`; rows keep the
/// grid order and failures are recorded per row.
pub fn sweep_regime(
    regime: Regime,
    nbar_grid: &[f64],
    lambda: f64,
    eps_trunc: f64,
) -> Vec<SweepRow> {
    nbar_grid
        .par_iter()
        .map(|&nbar| {
            sweep_row(regime, nbar, lambda, eps_trunc).unwrap_or_else(|e| SweepRow::failed(nbar, e))
        })
        .collect()
}

/// CSV with header `nbar,theta,P2,Q2,D2,V2,lhs_eq2`.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let data: Vec<[f64; 7]> = rows
        .iter()
        .map(|r| [r.nbar, r.theta, r.p2, r.q2, r.d2, r.v2, r.lhs_eq2])
        .collect();
    csv_table(
        &["nbar", "theta", "P2", "Q2", "D2", "V2", "lhs_eq2"],
        data.iter().map(|r| r.as_slice()),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{fock_state, thermal_state, DEFAULT_EPS_TRUNC as EPS};
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, SQRT_2};

    fn vacuum() -> CavityState {
        coherent_state(0.0, EPS).unwrap()
    }

    #[test]
    fn vacuum_symmetric_root_is_quarter_pi() {
        let cal = calibrate_symmetric(&vacuum(), 0.0).unwrap();
        assert!((cal.theta_star - FRAC_PI_4).abs() < 1e-10);
        assert!(cal.achieved_p <= 1e-10);
    }

    #[test]
    fn detuned_vacuum_tangential_root_matches_brute_force() {
        // g(θ) = cos²(θ√2) never changes sign; locate its first zero by brute force
        let g = |t: f64| {
            let (wp, wm) = branch_weights(
                &vacuum(),
                JcParams {
                    theta: t,
                    lambda: 1.0,
                },
            );
            wp - wm
        };
        let n = 1_000_000;
        let h = THETA_MAX / n as f64;
        let brute = (1..n)
            .map(|k| k as f64 * h)
            .find(|&t| g(t).abs() <= g(t - h).abs() && g(t).abs() <= g(t + h).abs())
            .unwrap();
        assert!((brute - FRAC_PI_2 / SQRT_2).abs() < h);

        let cal = calibrate_symmetric(&vacuum(), 1.0).unwrap();
        assert!((cal.theta_star - brute).abs() < h);
        assert!(cal.achieved_p <= 1e-10);
    }

    #[test]
    fn symmetric_root_is_genuine_and_smallest() {
        for nbar in [0.5, 3.0, 20.0, 100.0] {
            let state = coherent_state(nbar, EPS).unwrap();
            let cal = calibrate_symmetric(&state, 0.0).unwrap();
            assert!(cal.achieved_p <= 1e-10, "nbar {nbar}");
            let g = |t: f64| {
                let (wp, wm) = branch_weights(&state, JcParams::resonant(t));
                wp - wm
            };
            let d = 1e-6;
            assert!(g(cal.theta_star - d) > 0.0 && g(cal.theta_star + d) < 0.0);
            let step = THETA_MAX / SCAN_STEPS as f64;
            let mut k = 1;
            while (k as f64) * step < cal.theta_star {
                assert!(g(k as f64 * step) > 0.0);
                k += 1;
            }
        }
    }

    #[test]
    fn vacuum_asymmetric_point_is_pi_pulse() {
        let cal = calibrate_asymmetric(&vacuum(), 0.0).unwrap();
        assert!((cal.theta_star - FRAC_PI_2).abs() < 1e-8);
        assert!((cal.achieved_p - 1.0).abs() < 1e-15);
    }

    #[test]
    fn asymmetric_optimum_dominates_the_window() {
        for nbar in [1.0, 5.0, 40.0] {
            let state = coherent_state(nbar, EPS).unwrap();
            let cal = calibrate_asymmetric(&state, 0.0).unwrap();
            assert!(cal.achieved_p < 1.0);
            let (start, p) = asymmetric_window(&state, 0.0);
            let theta_start = start as f64 * THETA_MAX / ASYMMETRIC_GRID as f64;
            for k in 1..=SCAN_STEPS {
                let theta = k as f64 * THETA_MAX / SCAN_STEPS as f64;
                if theta >= theta_start {
                    assert!(cal.achieved_p >= p[2 * k] - 1e-9);
                }
            }
            let sym = calibrate_symmetric(&state, 0.0).unwrap();
            assert!(cal.achieved_p >= sym.achieved_p);
            // window opens at the first symmetric root on resonance
            assert!((theta_start - sym.theta_star).abs() <= THETA_MAX / ASYMMETRIC_GRID as f64);
        }
    }

    #[test]
    fn deterministic() {
        let state = coherent_state(7.3, EPS).unwrap();
        let a = calibrate_symmetric(&state, 0.2).unwrap();
        let b = calibrate_symmetric(&state, 0.2).unwrap();
        assert_eq!(a.theta_star.to_bits(), b.theta_star.to_bits());
        let a = calibrate_asymmetric(&state, 0.2).unwrap();
        let b = calibrate_asymmetric(&state, 0.2).unwrap();
        assert_eq!(a.theta_star.to_bits(), b.theta_star.to_bits());
        assert!(a.evaluations > ASYMMETRIC_GRID);
    }

    #[test]
    fn fock_and_thermal_states_calibrate() {
        let cal = calibrate_symmetric(&fock_state(3, 10).unwrap(), 0.0).unwrap();
        assert!((cal.theta_star - FRAC_PI_4 / 2.0).abs() < 1e-10);
        let cal = calibrate_symmetric(&thermal_state(1.0, EPS).unwrap(), 0.0).unwrap();
        assert!(cal.achieved_p <= 1e-10);
    }

    #[test]
    fn unreachable_symmetry_is_reported() {
        // strong detuning keeps w₋ ≤ 1/(1+λ²) < 1/2
        let err = calibrate_symmetric(&vacuum(), 3.0).unwrap_err();
        assert!(matches!(err, Error::Calibration(_)));
    }

    #[test]
    fn sweep_rows_in_order_with_flagged_failures() {
        let rows = sweep_regime(Regime::Symmetric, &[0.0, 0.5, 1.0], 3.0, EPS);
        assert_eq!(rows.len(), 3);
        assert!(rows.iter().all(|r| !r.is_ok()));
        assert!(rows[0].q2.is_nan());

        let rows = sweep_regime(Regime::Symmetric, &[0.0, 1.0, 10.0, 100.0], 0.0, EPS);
        assert_eq!(
            rows.iter().map(|r| r.nbar).collect::<Vec<_>>(),
            vec![0.0, 1.0, 10.0, 100.0]
        );
        let r0 = &rows[0];
        assert!((r0.theta - FRAC_PI_4).abs() < 1e-10);
        assert!(r0.p2 < 1e-20 && (r0.q2 - 1.0).abs() < 1e-12 && (r0.d2 - 1.0).abs() < 1e-12);
        assert!(r0.v2 < 1e-20 && (r0.lhs_eq2 - 1.0).abs() < 1e-12);
        assert!(rows.windows(2).skip(1).all(|w| w[1].v2 > w[0].v2));
    }

    #[test]
    fn asymmetric_sweep_vacuum_row() {
        let rows = sweep_regime(Regime::MaxAsymmetric, &[0.0], 0.0, EPS);
        let r = &rows[0];
        assert!((r.p2 - 1.0).abs() < 1e-12 && (r.q2 - 1.0).abs() < 1e-12);
        assert!((r.d2 - 1.0).abs() < 1e-12 && r.v2 < 1e-12);
    }

    #[test]
    fn sweep_csv_header_and_json_fields() {
        let rows = sweep_regime(Regime::Symmetric, &[0.0, 2.0], 0.0, EPS);
        let csv = sweep_csv(&rows);
        assert!(csv.starts_with("nbar,theta,P2,Q2,D2,V2,lhs_eq2\n"));
        let v = serde_json::to_value(&rows).unwrap();
        assert!(v[0]["Q2"].is_number() && v[0]["error"].is_null());
    }

    #[test]
    fn golden_section_finds_interior_max() {
        let (x, fx) = golden_max(|x| -(x - 0.3).powi(2), 0.0, 1.0, 1e-12);
        assert!((x - 0.3).abs() < 1e-6 && fx <= 0.0);
    }
}
