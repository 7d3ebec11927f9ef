//! Full interferometer: JC beam splitter, Stark phase shifter, classical π/2
//! beam merger and state-selective detection of the atom.
//!
//! The output probability is computed from the composite atom-cavity state,
//! never from the closed-form visibility, so a fringe scan is an independent
//! check of `V`.

use std::f64::consts::{FRAC_1_SQRT_2, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::branch::{branch_coefficients, branch_images, BranchImage, JcParams, Order};
use crate::error::{Error, Result};
use crate::fock::CavityState;
use crate::format::csv_table;

/// Composite state `|a⟩⊗upper + |b⟩⊗lower` right after the beam splitter.
enum Composite {
    Pure {
        upper: Vec<Complex64>,
        lower: Vec<Complex64>,
    },
    /// Fock components `(p_n, c̄_n, s_n √(n+1))`, each a pure two-branch state
    /// whose branches sit on orthogonal levels `n` and `n + 1`.
    Mixture(Vec<(f64, Complex64, f64)>),
}

impl Composite {
    fn new(state: &CavityState, params: JcParams) -> Self {
        if state.is_pure() {
            let (BranchImage::Pure(upper), BranchImage::Pure(lower)) =
                branch_images(state, params, Order::Value)
            else {
                unreachable!("pure input gives pure branch images")
            };
            Composite::Pure { upper, lower }
        } else {
            let bc = branch_coefficients(params, state.dim());
            let components = state
                .photon_distribution()
                .into_iter()
                .enumerate()
                .filter(|(_, p)| *p > 0.0)
                .map(|(n, p)| (p, bc.c[n].conj(), bc.s[n] * (n as f64 + 1.0).sqrt()))
                .collect();
            Composite::Mixture(components)
        }
    }

    /// `(p_a, p_b)` after phase shifter and beam merger.
    fn detect(&self, phi: f64) -> (f64, f64) {
        let up = Complex64::from_polar(1.0, 0.5 * phi);
        let down = Complex64::from_polar(1.0, -0.5 * phi);
        let i = Complex64::i();
        // |a⟩ → (|a⟩ + i|b⟩)/√2, |b⟩ → (i|a⟩ + |b⟩)/√2
        let merge = |x: Complex64, y: Complex64| {
            let (x, y) = (up * x, down * y);
            (
                ((x + i * y) * FRAC_1_SQRT_2).norm_sqr(),
                ((i * x + y) * FRAC_1_SQRT_2).norm_sqr(),
            )
        };
        match self {
            Composite::Pure { upper, lower } => upper
                .iter()
                .zip(lower)
                .map(|(x, y)| merge(*x, *y))
                .fold((0.0, 0.0), |(a, b), (pa, pb)| (a + pa, b + pb)),
            Composite::Mixture(components) => components
                .iter()
                .map(|&(p, upper, lower)| {
                    // levels n and n + 1 do not interfere
                    let (a0, b0) = merge(upper, Complex64::new(0.0, 0.0));
                    let (a1, b1) = merge(Complex64::new(0.0, 0.0), Complex64::new(lower, 0.0));
                    (p * (a0 + a1), p * (b0 + b1))
                })
                .fold((0.0, 0.0), |(a, b), (pa, pb)| (a + pa, b + pb)),
        }
    }
}

/// Probability of detecting the atom in `|a⟩` at Ramsey phase `phi`.
pub fn fringe_probability(state: &CavityState, params: JcParams, phi: f64) -> f64 {
    Composite::new(state, params).detect(phi).0
}

/// `(p_a, p_b)` at phase `phi`.
pub fn output_probabilities(state: &CavityState, params: JcParams, phi: f64) -> (f64, f64) {
    Composite::new(state, params).detect(phi)
}

/// Output probability sampled over one fringe period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FringeScan {
    pub phi_values: Vec<f64>,
    pub p_a: Vec<f64>,
    pub extracted_visibility: f64,
    pub extracted_phase: f64,
}

impl FringeScan {
    fn from_samples(phi_values: Vec<f64>, p_a: Vec<f64>) -> Self {
        let (mut imax, mut min) = (0, f64::INFINITY);
        for (k, &p) in p_a.iter().enumerate() {
            if p > p_a[imax] {
                imax = k;
            }
            min = min.min(p);
        }
        let max = p_a[imax];
        let extracted_visibility = if max + min > 0.0 {
            (max - min) / (max + min)
        } else {
            0.0
        };
        Self {
            extracted_phase: phi_values[imax],
            phi_values,
            p_a,
            extracted_visibility,
        }
    }

    /// Grid average over one period; the closing point at `2π` repeats `φ = 0`
    /// and is left out (periodic trapezoid rule).
    pub fn mean_probability(&self) -> f64 {
        let m = self.p_a.len() - 1;
        self.p_a[..m].iter().sum::<f64>() / m as f64
    }

    /// CSV with header `phi,p_a`.
    pub fn to_csv(&self) -> String {
        let rows: Vec<[f64; 2]> = self
            .phi_values
            .iter()
            .zip(&self.p_a)
            .map(|(&phi, &p)| [phi, p])
            .collect();
        csv_table(&["phi", "p_a"], rows.iter().map(|r| r.as_slice()))
    }
}

/// Scan on the closed grid `φ_k = 2πk/(n − 1)`, `k = 0..n`.
pub fn fringe_scan(state: &CavityState, params: JcParams, n_points: usize) -> Result<FringeScan> {
    fringe_scan_shifted(state, params, n_points, 0.0)
}

/// Like [`fringe_scan`] but with the phase shifter offset by `shift`: sample
/// `k` records `p_a(φ_k + shift)` against the nominal `φ_k`.
pub fn fringe_scan_shifted(
    state: &CavityState,
    params: JcParams,
    n_points: usize,
    shift: f64,
) -> Result<FringeScan> {
    if n_points < 3 {
        return Err(Error::Domain(format!(
            "fringe scan needs at least 3 points, got {n_points}"
        )));
    }
    let composite = Composite::new(state, params);
    let step = TAU / (n_points - 1) as f64;
    let phi_values: Vec<f64> = (0..n_points).map(|k| k as f64 * step).collect();
    let p_a = phi_values
        .iter()
        .map(|phi| composite.detect(phi + shift).0)
        .collect();
    Ok(FringeScan::from_samples(phi_values, p_a))
}
