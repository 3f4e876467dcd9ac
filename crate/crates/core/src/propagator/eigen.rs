use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::Evolver;
use crate::lattice::HamiltonianMatrix;
use crate::{Result, C64};

/// Exact propagation through a full eigendecomposition of the (real
/// symmetric) Hamiltonian.
#[derive(Debug, Clone)]
pub struct EigenPropagator {
    values: DVector<f64>,
    vectors: DMatrix<f64>,
}

impl EigenPropagator {
    pub fn new(h: &HamiltonianMatrix) -> Self {
        let eig = SymmetricEigen::new(h.to_dense());
        EigenPropagator { values: eig.eigenvalues, vectors: eig.eigenvectors }
    }

    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.values
    }

    /// Eigenbasis coefficients `V^T psi`.
    fn project(&self, psi: &[C64]) -> Vec<C64> {
        let d = self.values.len();
        let mut c = vec![C64::new(0.0, 0.0); d];
        for (k, ck) in c.iter_mut().enumerate() {
            let col = self.vectors.column(k);
            *ck = col.iter().zip(psi).map(|(v, p)| p * *v).sum();
        }
        c
    }

    /// `V diag(exp(-i lambda t)) c`.
    fn reconstruct(&self, c: &[C64], t: f64, out: &mut [C64]) {
        out.iter_mut().for_each(|o| *o = C64::new(0.0, 0.0));
        for (k, ck) in c.iter().enumerate() {
            let phase = C64::from_polar(1.0, -self.values[k] * t) * ck;
            for (o, v) in out.iter_mut().zip(self.vectors.column(k).iter()) {
                *o += phase * *v;
            }
        }
    }

    /// `e^{-iHt} psi`; `t` may be negative.
    pub fn evolve(&self, psi: &[C64], t: f64) -> Vec<C64> {
        let c = self.project(psi);
        let mut out = vec![C64::new(0.0, 0.0); psi.len()];
        self.reconstruct(&c, t, &mut out);
        out
    }

    /// Stepper that evaluates every frame directly from the initial
    /// coefficients, so no error accumulates between frames.
    pub fn stepper(self, initial: &[C64], dt: f64) -> EigenStepper {
        let c0 = self.project(initial);
        EigenStepper { prop: self, c0, dt, step: 0 }
    }
}

pub struct EigenStepper {
    prop: EigenPropagator,
    c0: Vec<C64>,
    dt: f64,
    step: usize,
}

impl Evolver for EigenStepper {
    fn advance(&mut self, psi: &mut [C64]) -> Result<()> {
        self.step += 1;
        self.prop.reconstruct(&self.c0, self.step as f64 * self.dt, psi);
        Ok(())
    }
}
