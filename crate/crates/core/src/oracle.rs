//! Dense-matrix reference route for the branch operators.
//!
//! Builds `a`, `a†`, `S` and `C` as literal matrices on a padded Fock space
//! and evaluates every branch quantity by matrix algebra. `S` and `C` are
//! obtained as matrix functions through an eigendecomposition of
//! `aa† + λ²`, so nothing here relies on the diagonal structure the fast
//! path in [`crate::branch`] exploits. Cost is cubic in `dim`; meant for
//! `dim ≲ 64` and for cross-checking only.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::branch::JcParams;
use crate::fock::CavityState;

pub struct DenseBranchOracle {
    dim: usize,
    a: DMatrix<Complex64>,
    s: DMatrix<Complex64>,
    c: DMatrix<Complex64>,
}

fn to_complex(m: &DMatrix<f64>) -> DMatrix<Complex64> {
    m.map(|x| Complex64::new(x, 0.0))
}

impl DenseBranchOracle {
    /// Operators for states of truncation `dim`; two spare levels keep the
    /// truncated `aa†` exact wherever the states can reach.
    pub fn new(params: JcParams, dim: usize) -> Self {
        let big = dim + 2;
        let mut a = DMatrix::<f64>::zeros(big, big);
        for n in 1..big {
            a[(n - 1, n)] = (n as f64).sqrt();
        }
        let generator = &a * a.transpose() + DMatrix::identity(big, big) * params.lambda.powi(2);
        let eig = SymmetricEigen::new(generator);
        let theta = params.theta;
        let sinc = |x: f64| {
            if x == 0.0 {
                theta
            } else {
                (theta * x).sin() / x
            }
        };
        let freqs = eig.eigenvalues.map(|e| e.max(0.0).sqrt());
        let v = &eig.eigenvectors;
        let s = v * DMatrix::from_diagonal(&freqs.map(sinc)) * v.transpose();
        let cos = v * DMatrix::from_diagonal(&freqs.map(|x| (theta * x).cos())) * v.transpose();
        let s = to_complex(&s);
        let c = to_complex(&cos) + &s * Complex64::new(0.0, params.lambda);
        Self {
            dim,
            a: to_complex(&a),
            s,
            c,
        }
    }

    fn embed(&self, amplitudes: &[Complex64]) -> DVector<Complex64> {
        let mut v = DVector::zeros(self.dim + 2);
        for (n, z) in amplitudes.iter().enumerate() {
            v[n] = *z;
        }
        v
    }

    fn expectation(&self, state: &CavityState, op: &DMatrix<Complex64>) -> Complex64 {
        match state.amplitudes() {
            Some(psi) => {
                let v = self.embed(psi);
                v.dotc(&(op * &v))
            }
            None => state
                .photon_distribution()
                .iter()
                .enumerate()
                .map(|(n, p)| op[(n, n)] * *p)
                .sum(),
        }
    }

    /// `(⟨C†C⟩, ⟨S S a a†⟩)`.
    pub fn weights(&self, state: &CavityState) -> (f64, f64) {
        let plus = self.c.adjoint() * &self.c;
        let minus = &self.s * &self.s * &self.a * self.a.adjoint();
        (
            self.expectation(state, &plus).re,
            self.expectation(state, &minus).re,
        )
    }

    /// `⟨S a C⟩`.
    pub fn coherence_term(&self, state: &CavityState) -> Complex64 {
        self.expectation(state, &(&self.s * &self.a * &self.c))
    }

    /// `⟨ψ| C a† S |ψ⟩ = ⟨C†ψ | a†Sψ⟩`.
    pub fn branch_overlap(&self, state: &CavityState) -> Complex64 {
        self.expectation(state, &(&self.c * self.a.adjoint() * &self.s))
    }

    /// Unnormalized `(C†ψ, a†Sψ)` on `dim + 1` levels. Pure states only.
    pub fn branch_vectors(&self, state: &CavityState) -> (Vec<Complex64>, Vec<Complex64>) {
        let psi = self.embed(state.amplitudes().expect("pure state"));
        let plus = self.c.adjoint() * &psi;
        let minus = self.a.adjoint() * &self.s * &psi;
        let cut = |v: DVector<Complex64>| v.iter().take(self.dim + 1).copied().collect();
        (cut(plus), cut(minus))
    }

    /// Unnormalized diagonals of `C†ρC` and `a†SρSa` on `dim + 1` levels.
    pub fn branch_populations(&self, state: &CavityState) -> (Vec<f64>, Vec<f64>) {
        let big = self.dim + 2;
        let mut rho = DMatrix::<Complex64>::zeros(big, big);
        match state.amplitudes() {
            Some(psi) => {
                let v = self.embed(psi);
                rho = &v * v.adjoint();
            }
            None => {
                for (n, p) in state.photon_distribution().iter().enumerate() {
                    rho[(n, n)] = Complex64::new(*p, 0.0);
                }
            }
        }
        let plus = self.c.adjoint() * &rho * &self.c;
        let lower = self.a.adjoint() * &self.s;
        let minus = &lower * &rho * lower.adjoint();
        let diag = |m: DMatrix<Complex64>| (0..=self.dim).map(|n| m[(n, n)].re).collect();
        (diag(plus), diag(minus))
    }
}
