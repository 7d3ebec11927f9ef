//! Jaynes-Cummings beam-splitter branches.
//!
//! With the atom entering in its upper level, the cavity interaction leaves
//! the detector in `C†|ψ⟩` (upper way) or `a†S|ψ⟩` (lower way, one photon
//! added), where
//!
//! ```text
//! S = sin(θ √(aa† + λ²)) / √(aa† + λ²),   C = cos(θ √(aa† + λ²)) + iλS.
//! ```
//!
//! `S` and `C` are functions of `aa† = N + 1`, hence diagonal in the Fock
//! basis, and every quantity below reduces to sums over length-`dim` arrays.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::CavityState;

/// Branch weight below which a conditional detector state is not formed.
pub const EPS_WEIGHT: f64 = 1e-12;

/// Interaction parameters: vacuum Rabi phase `θ = Ωτ` and detuning `λ`
/// (normalized to twice the Rabi frequency).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JcParams {
    pub theta: f64,
    pub lambda: f64,
}

impl JcParams {
    pub fn new(theta: f64, lambda: f64) -> Result<Self> {
        if !theta.is_finite() || theta < 0.0 {
            return Err(Error::Domain(format!(
                "theta must be finite and >= 0, got {theta}"
            )));
        }
        if !lambda.is_finite() {
            return Err(Error::Domain(format!(
                "lambda must be finite, got {lambda}"
            )));
        }
        Ok(Self { theta, lambda })
    }

    /// Resonant interaction (`λ = 0`).
    pub fn resonant(theta: f64) -> Self {
        Self { theta, lambda: 0.0 }
    }

    pub fn with_theta(self, theta: f64) -> Self {
        Self { theta, ..self }
    }

    /// Dressed frequency factor `√(n + 1 + λ²)` for Fock level `n`.
    #[inline]
    fn dressed(&self, n: usize) -> f64 {
        (n as f64 + 1.0 + self.lambda * self.lambda).sqrt()
    }
}

/// Eigenvalues of `S` and `C` on Fock levels `0..dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchCoefficients {
    pub s: Vec<f64>,
    pub c: Vec<Complex64>,
}

pub fn branch_coefficients(params: JcParams, dim: usize) -> BranchCoefficients {
    let (s, c) = (0..dim)
        .map(|n| {
            let x = params.dressed(n);
            let (sin, cos) = (params.theta * x).sin_cos();
            let s = sin / x;
            (s, Complex64::new(cos, params.lambda * s))
        })
        .unzip();
    BranchCoefficients { s, c }
}

/// θ-derivatives of the coefficients: `dS/dθ = cos(θx)`, `dC/dθ = −x sin(θx) + iλ cos(θx)`.
fn branch_coefficient_derivatives(params: JcParams, dim: usize) -> BranchCoefficients {
    let (s, c) = (0..dim)
        .map(|n| {
            let x = params.dressed(n);
            let (sin, cos) = (params.theta * x).sin_cos();
            (cos, Complex64::new(-x * sin, params.lambda * cos))
        })
        .unzip();
    BranchCoefficients { s, c }
}

/// Branch coefficients together with the resulting way probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchData {
    pub s: Vec<f64>,
    pub c: Vec<Complex64>,
    pub w_plus: f64,
    pub w_minus: f64,
}

impl BranchData {
    pub fn new(state: &CavityState, params: JcParams) -> Self {
        let BranchCoefficients { s, c } = branch_coefficients(params, state.dim());
        let (w_plus, w_minus) = weights_from(&state.photon_distribution(), &s, &c);
        Self {
            s,
            c,
            w_plus,
            w_minus,
        }
    }
}

fn weights_from(p: &[f64], s: &[f64], c: &[Complex64]) -> (f64, f64) {
    p.iter().enumerate().fold((0.0, 0.0), |(wp, wm), (n, &pn)| {
        (
            wp + pn * c[n].norm_sqr(),
            wm + pn * s[n] * s[n] * (n as f64 + 1.0),
        )
    })
}

/// Probabilities `(w₊, w₋) = (⟨C†C⟩, ⟨S² aa†⟩)` of the upper and lower way.
pub fn branch_weights(state: &CavityState, params: JcParams) -> (f64, f64) {
    let BranchCoefficients { s, c } = branch_coefficients(params, state.dim());
    weights_from(&state.photon_distribution(), &s, &c)
}

/// `⟨S a C⟩` in the initial cavity state; zero for diagonal mixtures.
pub fn coherence_term(state: &CavityState, params: JcParams) -> Complex64 {
    let Some(psi) = state.amplitudes() else {
        return Complex64::new(0.0, 0.0);
    };
    let BranchCoefficients { s, c } = branch_coefficients(params, psi.len());
    (1..psi.len())
        .map(|n| psi[n - 1].conj() * psi[n] * c[n] * ((n as f64).sqrt() * s[n - 1]))
        .sum()
}

/// Inner product `⟨C†ψ | a†Sψ⟩` of the two unnormalized branch vectors.
pub fn branch_overlap(state: &CavityState, params: JcParams) -> Result<Complex64> {
    let psi = state
        .amplitudes()
        .ok_or_else(|| Error::Unsupported("branch overlap needs a pure state".into()))?;
    let BranchCoefficients { s, c } = branch_coefficients(params, psi.len());
    Ok((0..psi.len().saturating_sub(1))
        .map(|n| c[n + 1] * psi[n + 1].conj() * psi[n] * (s[n] * (n as f64 + 1.0).sqrt()))
        .sum())
}

/// Unnormalized image of the initial state under one branch map, on `dim + 1` levels.
#[derive(Debug, Clone, PartialEq)]
pub(crate) enum BranchImage {
    Pure(Vec<Complex64>),
    Diagonal(Vec<f64>),
}

impl BranchImage {
    pub(crate) fn norm_sqr(&self) -> f64 {
        match self {
            BranchImage::Pure(v) => v.iter().map(|z| z.norm_sqr()).sum(),
            BranchImage::Diagonal(p) => p.iter().sum(),
        }
    }

    pub(crate) fn normalized(self) -> Result<CavityState> {
        match self {
            BranchImage::Pure(v) => CavityState::pure_normalized(v),
            BranchImage::Diagonal(p) => CavityState::diagonal_normalized(p),
        }
    }
}

/// Which Taylor order of the branch maps in `θ` to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Order {
    Value,
    ThetaDerivative,
}

/// Images `(B₊ψ, B₋ψ)` with `B₊ = C†` and `B₋ = a†S`.
pub(crate) fn branch_images(
    state: &CavityState,
    params: JcParams,
    order: Order,
) -> (BranchImage, BranchImage) {
    let dim = state.dim();
    let BranchCoefficients { s, c } = match order {
        Order::Value => branch_coefficients(params, dim),
        Order::ThetaDerivative => branch_coefficient_derivatives(params, dim),
    };
    let shift = |n: usize| s[n] * (n as f64 + 1.0).sqrt();
    if let Some(psi) = state.amplitudes() {
        let mut plus = vec![Complex64::new(0.0, 0.0); dim + 1];
        let mut minus = vec![Complex64::new(0.0, 0.0); dim + 1];
        for (n, &a) in psi.iter().enumerate() {
            plus[n] = c[n].conj() * a;
            minus[n + 1] = a * shift(n);
        }
        (BranchImage::Pure(plus), BranchImage::Pure(minus))
    } else {
        let p = state.photon_distribution();
        let mut plus = vec![0.0; dim + 1];
        let mut minus = vec![0.0; dim + 1];
        for (n, &pn) in p.iter().enumerate() {
            plus[n] = c[n].norm_sqr() * pn;
            minus[n + 1] = shift(n).powi(2) * pn;
        }
        (BranchImage::Diagonal(plus), BranchImage::Diagonal(minus))
    }
}

/// A normalized conditional detector state, or the weight that was too small to form one.
#[derive(Debug, Clone, PartialEq)]
pub enum Conditional {
    Defined(CavityState),
    Undefined { weight: f64 },
}

impl Conditional {
    pub fn state(&self) -> Option<&CavityState> {
        match self {
            Conditional::Defined(s) => Some(s),
            Conditional::Undefined { .. } => None,
        }
    }
}

/// Detector states conditioned on the upper (`plus`) and lower (`minus`) way.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalStates {
    pub plus: Conditional,
    pub minus: Conditional,
    pub w_plus: f64,
    pub w_minus: f64,
}

pub fn conditional_states(state: &CavityState, params: JcParams) -> Result<ConditionalStates> {
    let (plus, minus) = branch_images(state, params, Order::Value);
    let (w_plus, w_minus) = (plus.norm_sqr(), minus.norm_sqr());
    let condition = |image: BranchImage, weight: f64| -> Result<Conditional> {
        Ok(if weight < EPS_WEIGHT {
            Conditional::Undefined { weight }
        } else {
            Conditional::Defined(image.normalized()?)
        })
    };
    Ok(ConditionalStates {
        plus: condition(plus, w_plus)?,
        minus: condition(minus, w_minus)?,
        w_plus,
        w_minus,
    })
}
