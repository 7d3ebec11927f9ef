//! Truncated Fock-space representations of the initial cavity field.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default truncation tolerance for the photon-number tail.
pub const DEFAULT_EPS_TRUNC: f64 = 1e-12;

/// Normalization tolerance checked on every constructed state.
pub const NORM_TOL: f64 = 1e-10;

/// Smallest truncation ever chosen by [`auto_dim`].
pub const MIN_DIM: usize = 8;

const MAX_DIM: usize = 1 << 22;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StateKind {
    Pure,
    DiagonalMixed,
}

#[derive(Debug, Clone, PartialEq)]
enum Repr {
    Pure(Vec<Complex64>),
    DiagonalMixed(Vec<f64>),
}

/// Initial state of the cavity mode over Fock levels `0..dim`.
///
/// Either a pure state (amplitudes `⟨n|ψ⟩`) or a mixture diagonal in the
/// photon-number basis (populations `⟨n|ρ|n⟩`). Immutable once built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StateWire", into = "StateWire")]
pub struct CavityState {
    repr: Repr,
}

impl CavityState {
    /// Pure state from amplitudes; the squared norm must be 1 within [`NORM_TOL`].
    pub fn pure(amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidState("empty amplitude vector".into()));
        }
        if amplitudes
            .iter()
            .any(|a| !a.re.is_finite() || !a.im.is_finite())
        {
            return Err(Error::InvalidState("non-finite amplitude".into()));
        }
        let norm_sqr: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sqr - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidState(format!(
                "amplitudes have squared norm {norm_sqr}, expected 1"
            )));
        }
        Ok(Self {
            repr: Repr::Pure(amplitudes),
        })
    }

    /// Pure state proportional to `vector`, rescaled to unit norm.
    pub fn pure_normalized(mut vector: Vec<Complex64>) -> Result<Self> {
        let norm = vector.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::InvalidState("cannot normalize a zero vector".into()));
        }
        vector.iter_mut().for_each(|a| *a /= norm);
        Self::pure(vector)
    }

    /// Diagonal mixture; populations must be nonnegative and sum to 1.
    pub fn diagonal(populations: Vec<f64>) -> Result<Self> {
        if populations.is_empty() {
            return Err(Error::InvalidState("empty population vector".into()));
        }
        if populations.iter().any(|&p| !p.is_finite() || p < 0.0) {
            return Err(Error::InvalidState(
                "populations must be finite and nonnegative".into(),
            ));
        }
        let total: f64 = populations.iter().sum();
        if (total - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidState(format!(
                "populations sum to {total}, expected 1"
            )));
        }
        Ok(Self {
            repr: Repr::DiagonalMixed(populations),
        })
    }

    /// Diagonal mixture proportional to `weights`.
    pub fn diagonal_normalized(mut weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::InvalidState(
                "cannot normalize zero populations".into(),
            ));
        }
        weights.iter_mut().for_each(|p| *p /= total);
        Self::diagonal(weights)
    }

    pub fn kind(&self) -> StateKind {
        match self.repr {
            Repr::Pure(_) => StateKind::Pure,
            Repr::DiagonalMixed(_) => StateKind::DiagonalMixed,
        }
    }

    pub fn is_pure(&self) -> bool {
        matches!(self.repr, Repr::Pure(_))
    }

    /// Truncation dimension.
    pub fn dim(&self) -> usize {
        match &self.repr {
            Repr::Pure(a) => a.len(),
            Repr::DiagonalMixed(p) => p.len(),
        }
    }

    pub fn amplitudes(&self) -> Option<&[Complex64]> {
        match &self.repr {
            Repr::Pure(a) => Some(a),
            Repr::DiagonalMixed(_) => None,
        }
    }

    pub fn populations(&self) -> Option<&[f64]> {
        match &self.repr {
            Repr::Pure(_) => None,
            Repr::DiagonalMixed(p) => Some(p),
        }
    }

    /// Photon-number distribution `p_n` for either representation.
    pub fn photon_distribution(&self) -> Vec<f64> {
        match &self.repr {
            Repr::Pure(a) => a.iter().map(|z| z.norm_sqr()).collect(),
            Repr::DiagonalMixed(p) => p.clone(),
        }
    }

    pub fn mean_photon_number(&self) -> f64 {
        self.photon_distribution()
            .iter()
            .enumerate()
            .map(|(n, p)| n as f64 * p)
            .sum()
    }

    /// Same state embedded in a larger truncation (zero padded).
    pub fn padded(&self, dim: usize) -> Result<Self> {
        if dim < self.dim() {
            return Err(Error::Domain(format!(
                "cannot pad a dim-{} state down to {dim}",
                self.dim()
            )));
        }
        Ok(match &self.repr {
            Repr::Pure(a) => {
                let mut v = a.clone();
                v.resize(dim, Complex64::new(0.0, 0.0));
                Self {
                    repr: Repr::Pure(v),
                }
            }
            Repr::DiagonalMixed(p) => {
                let mut v = p.clone();
                v.resize(dim, 0.0);
                Self {
                    repr: Repr::DiagonalMixed(v),
                }
            }
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct StateWire {
    kind: StateKind,
    dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    re: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    im: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    p: Option<Vec<f64>>,
}

impl From<CavityState> for StateWire {
    fn from(state: CavityState) -> Self {
        let dim = state.dim();
        match state.repr {
            Repr::Pure(a) => StateWire {
                kind: StateKind::Pure,
                dim,
                re: Some(a.iter().map(|z| z.re).collect()),
                im: Some(a.iter().map(|z| z.im).collect()),
                p: None,
            },
            Repr::DiagonalMixed(p) => StateWire {
                kind: StateKind::DiagonalMixed,
                dim,
                re: None,
                im: None,
                p: Some(p),
            },
        }
    }
}

impl TryFrom<StateWire> for CavityState {
    type Error = Error;

    fn try_from(wire: StateWire) -> Result<Self> {
        let state = match wire.kind {
            StateKind::Pure => {
                let (Some(re), Some(im)) = (wire.re, wire.im) else {
                    return Err(Error::InvalidState(
                        "pure state needs \"re\" and \"im\"".into(),
                    ));
                };
                if re.len() != im.len() {
                    return Err(Error::InvalidState(
                        "\"re\" and \"im\" lengths differ".into(),
                    ));
                }
                let amps = re
                    .into_iter()
                    .zip(im)
                    .map(|(r, i)| Complex64::new(r, i))
                    .collect();
                CavityState::pure(amps)?
            }
            StateKind::DiagonalMixed => {
                let Some(p) = wire.p else {
                    return Err(Error::InvalidState("diagonal state needs \"p\"".into()));
                };
                CavityState::diagonal(p)?
            }
        };
        if state.dim() != wire.dim {
            return Err(Error::InvalidState(format!(
                "declared dim {} but {} entries given",
                wire.dim,
                state.dim()
            )));
        }
        Ok(state)
    }
}

fn check_nbar(nbar: f64) -> Result<()> {
    if !nbar.is_finite() || nbar < 0.0 {
        return Err(Error::Domain(format!(
            "mean photon number must be finite and >= 0, got {nbar}"
        )));
    }
    Ok(())
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Domain(format!(
            "truncation tolerance must lie in (0, 1), got {eps}"
        )));
    }
    Ok(())
}

/// Natural log of the Poisson weight `e^{-nbar} nbar^n / n!`, by recurrence.
fn poisson_log_weights(nbar: f64) -> impl Iterator<Item = f64> {
    let mut log_p = -nbar;
    (0usize..).map(move |n| {
        if n > 0 {
            log_p += if nbar > 0.0 {
                (nbar / n as f64).ln()
            } else {
                f64::NEG_INFINITY
            };
        }
        log_p
    })
}

fn thermal_weights(nbar: f64) -> impl Iterator<Item = f64> {
    let ratio = nbar / (1.0 + nbar);
    let mut p = 1.0 / (1.0 + nbar);
    (0usize..).map(move |n| {
        if n > 0 {
            p *= ratio;
        }
        p
    })
}

/// Smallest `dim` whose tail mass beyond `dim - 1` drops below `eps`,
/// plus one headroom level, floored at [`MIN_DIM`].
fn support_dim(weights: impl Iterator<Item = f64>, mean: f64, eps: f64) -> usize {
    let mut cumulative = 0.0;
    let mut dim = 0;
    for w in weights {
        cumulative += w;
        dim += 1;
        if 1.0 - cumulative < eps || dim >= MAX_DIM {
            break;
        }
        // roundoff floor: the remaining tail is below resolution
        if dim as f64 > mean && w == 0.0 {
            break;
        }
    }
    (dim + 1).max(MIN_DIM)
}

/// Truncation dimension for a coherent state of mean photon number `nbar`.
pub fn auto_dim(nbar: f64, eps_trunc: f64) -> usize {
    support_dim(poisson_log_weights(nbar).map(f64::exp), nbar, eps_trunc)
}

fn thermal_dim(nbar: f64, eps_trunc: f64) -> usize {
    support_dim(thermal_weights(nbar), nbar, eps_trunc)
}

/// Coherent state `|α⟩` with real `α = √nbar`, truncated by [`auto_dim`].
pub fn coherent_state(nbar: f64, eps_trunc: f64) -> Result<CavityState> {
    check_nbar(nbar)?;
    check_eps(eps_trunc)?;
    coherent_amplitudes(nbar, auto_dim(nbar, eps_trunc))
}

/// Coherent state on an explicit truncation. Fails if the top level still
/// carries weight above [`DEFAULT_EPS_TRUNC`].
pub fn coherent_state_with_dim(nbar: f64, dim: usize) -> Result<CavityState> {
    check_nbar(nbar)?;
    if dim == 0 {
        return Err(Error::Domain("dim must be positive".into()));
    }
    let top = poisson_log_weights(nbar)
        .nth(dim - 1)
        .map(f64::exp)
        .unwrap_or(0.0);
    if dim > 1 && top >= DEFAULT_EPS_TRUNC {
        return Err(Error::Domain(format!(
            "dim {dim} truncates nbar {nbar}: top level weight {top:e}"
        )));
    }
    coherent_amplitudes(nbar, dim)
}

fn coherent_amplitudes(nbar: f64, dim: usize) -> Result<CavityState> {
    let amps = poisson_log_weights(nbar)
        .take(dim)
        .map(|log_p| Complex64::new((0.5 * log_p).exp(), 0.0))
        .collect();
    CavityState::pure_normalized(amps)
}

/// Photon-number eigenstate `|n⟩` in a `dim`-level truncation.
pub fn fock_state(n: usize, dim: usize) -> Result<CavityState> {
    if n >= dim {
        return Err(Error::Domain(format!(
            "Fock level {n} outside truncation dim {dim}"
        )));
    }
    let mut amps = vec![Complex64::new(0.0, 0.0); dim];
    amps[n] = Complex64::new(1.0, 0.0);
    CavityState::pure(amps)
}

/// Thermal (Bose-Einstein) mixture with mean photon number `nbar`.
pub fn thermal_state(nbar: f64, eps_trunc: f64) -> Result<CavityState> {
    check_nbar(nbar)?;
    check_eps(eps_trunc)?;
    let dim = thermal_dim(nbar, eps_trunc);
    CavityState::diagonal_normalized(thermal_weights(nbar).take(dim).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn factorial(n: u32) -> f64 {
        (1..=n).map(f64::from).product()
    }

    #[test]
    fn vacuum_coherent_state() {
        let s = coherent_state(0.0, DEFAULT_EPS_TRUNC).unwrap();
        let a = s.amplitudes().unwrap();
        assert_eq!(a[0], Complex64::new(1.0, 0.0));
        assert!(a[1..].iter().all(|z| z.norm() == 0.0));
        assert_eq!(s.dim(), MIN_DIM);
    }

    #[test]
    fn coherent_amplitudes_match_factorial_form() {
        let nbar: f64 = 1.0;
        let s = coherent_state(nbar, DEFAULT_EPS_TRUNC).unwrap();
        let a = s.amplitudes().unwrap();
        assert!((a[0].re - 0.606_530_659_712_633_4).abs() < 1e-12);
        assert!((a[1].re - 0.606_530_659_712_633_4).abs() < 1e-12);
        for n in 0..=20u32.min(s.dim() as u32 - 1) {
            let direct = (-nbar / 2.0).exp() * nbar.powf(n as f64 / 2.0) / factorial(n).sqrt();
            assert!((a[n as usize].re - direct).abs() < 1e-12, "n = {n}");
            assert_eq!(a[n as usize].im, 0.0);
        }
        let s3 = coherent_state(3.7, DEFAULT_EPS_TRUNC).unwrap();
        for (n, z) in s3.amplitudes().unwrap().iter().enumerate().take(21) {
            let direct =
                (-3.7f64 / 2.0).exp() * 3.7f64.powf(n as f64 / 2.0) / factorial(n as u32).sqrt();
            assert!((z.re - direct).abs() < 1e-12, "n = {n}");
        }
    }

    #[test]
    fn large_coherent_state_is_normalized() {
        let s = coherent_state(100.0, DEFAULT_EPS_TRUNC).unwrap();
        let norm: f64 = s.photon_distribution().iter().sum();
        assert!((norm - 1.0).abs() < 1e-10);
        assert!(s.dim() >= 100);
    }

    #[test]
    fn negative_nbar_is_a_domain_error() {
        assert!(matches!(coherent_state(-0.1, 1e-12), Err(Error::Domain(_))));
        assert!(matches!(thermal_state(-1.0, 1e-12), Err(Error::Domain(_))));
        assert!(matches!(coherent_state(1.0, 0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn fock_states() {
        let s = fock_state(0, 4).unwrap();
        assert_eq!(s.photon_distribution(), vec![1.0, 0.0, 0.0, 0.0]);
        let s = fock_state(1, 4).unwrap();
        assert_eq!(s.photon_distribution(), vec![0.0, 1.0, 0.0, 0.0]);
        assert!(matches!(fock_state(4, 4), Err(Error::Domain(_))));
    }

    #[test]
    fn thermal_populations() {
        let s = thermal_state(0.0, DEFAULT_EPS_TRUNC).unwrap();
        let p = s.populations().unwrap();
        assert_eq!(p[0], 1.0);
        assert!(p[1..].iter().all(|&x| x == 0.0));

        let s = thermal_state(1.0, DEFAULT_EPS_TRUNC).unwrap();
        let p = s.populations().unwrap();
        assert!((p[0] - 0.5).abs() < 1e-12);
        assert!((p[1] - 0.25).abs() < 1e-12);
        for nbar in [0.1, 1.0, 10.0, 55.0] {
            let s = thermal_state(nbar, DEFAULT_EPS_TRUNC).unwrap();
            let total: f64 = s.populations().unwrap().iter().sum();
            assert!((total - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn auto_dim_cases() {
        assert_eq!(auto_dim(0.0, 1e-12), 8);
        assert!(auto_dim(100.0, 1e-12) >= 140);
        let mut last = 0;
        for k in 0..=400 {
            let d = auto_dim(k as f64 * 0.5, 1e-12);
            assert!(
                d >= last,
                "auto_dim not monotone at nbar = {}",
                k as f64 * 0.5
            );
            last = d;
        }
    }

    #[test]
    fn auto_dim_tail_matches_independent_poisson_tail() {
        // tail summed from the top of a long explicit pmf, independent of the forward scan
        for nbar in [2.0f64, 17.0, 100.0] {
            let d = auto_dim(nbar, 1e-12);
            let pmf: Vec<f64> = (0..2000u32)
                .map(|n| (-nbar + n as f64 * nbar.ln() - ln_factorial(n)).exp())
                .collect();
            let tail_from = |k: usize| pmf[k..].iter().rev().sum::<f64>();
            // one headroom level is included in d
            assert!(tail_from(d - 1) < 1e-12, "nbar {nbar}");
            assert!(
                tail_from(d - 2) >= 1e-12 * 0.99 || d == MIN_DIM,
                "nbar {nbar}"
            );
        }
    }

    fn ln_factorial(n: u32) -> f64 {
        (1..=n).map(|k| (k as f64).ln()).sum()
    }

    #[test]
    fn explicit_dim_rejects_heavy_tail() {
        assert!(coherent_state_with_dim(5.0, 6).is_err());
        assert!(coherent_state_with_dim(5.0, 32).is_ok());
    }

    #[test]
    fn json_round_trip_and_shape() {
        let s = coherent_state(2.0, DEFAULT_EPS_TRUNC).unwrap();
        let text = serde_json::to_string(&s).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["kind"], "Pure");
        assert_eq!(v["dim"], s.dim());
        assert!(v.get("p").is_none());
        let back: CavityState = serde_json::from_str(&text).unwrap();
        assert_eq!(back, s);

        let t = thermal_state(1.0, DEFAULT_EPS_TRUNC).unwrap();
        let v = serde_json::to_value(&t).unwrap();
        assert_eq!(v["kind"], "DiagonalMixed");
        assert!(v["p"].is_array());
    }

    #[test]
    fn json_rejects_unnormalized_and_bad_dim() {
        let bad = r#"{"kind":"Pure","dim":2,"re":[1.0,1.0],"im":[0.0,0.0]}"#;
        assert!(serde_json::from_str::<CavityState>(bad).is_err());
        let bad_dim = r#"{"kind":"DiagonalMixed","dim":3,"p":[0.5,0.5]}"#;
        assert!(serde_json::from_str::<CavityState>(bad_dim).is_err());
    }

    proptest! {
        #[test]
        fn coherent_mean_and_norm(nbar in 0.0f64..200.0) {
            let s = coherent_state(nbar, DEFAULT_EPS_TRUNC).unwrap();
            let norm: f64 = s.photon_distribution().iter().sum();
            prop_assert!((norm - 1.0).abs() < 1e-10);
            let tol = (1e-8f64).max(DEFAULT_EPS_TRUNC * nbar * 10.0);
            prop_assert!((s.mean_photon_number() - nbar).abs() <= tol,
                "mean {} vs {}", s.mean_photon_number(), nbar);
            let top = s.photon_distribution()[s.dim() - 1];
            prop_assert!(top < DEFAULT_EPS_TRUNC);
        }

        #[test]
        fn thermal_mean(nbar in 0.0f64..30.0) {
            let s = thermal_state(nbar, DEFAULT_EPS_TRUNC).unwrap();
            prop_assert!((s.mean_photon_number() - nbar).abs() < 1e-8 * (1.0 + nbar));
        }
    }
}
