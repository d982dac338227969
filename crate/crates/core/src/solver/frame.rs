//! Whitening frame of the Gram matrix Λ.
//!
//! With `Λ = V D V†`, the frame is `W = V (D⁺ + f)^{1/2}` where
//! `f = 8 d ε λ_max` covers the rounding in Λ and in its eigendecomposition.
//! Both the solver and the verifier work with `Λ' = W W†` in place of Λ.
//! `Λ'` dominates every Gram matrix within rounding of the stored one, so
//! the problem only gets looser, and in the whitened coordinates
//! `H = W⁻¹ G W⁻†` it is exactly the identity.
//!
//! Dual certificates are stored in these coordinates: the residual
//! multiplier `z` stands for `Z = W⁻† z W⁻¹`, which in the original
//! coordinates has entries of order `1/ε` for weak coherent states.

use nalgebra::SymmetricEigen;

use crate::linalg::{c, hermitian_part, CMatrix};
use crate::sdp_model::{Functional, SdpProblem};

#[derive(Debug, Clone)]
pub(crate) struct Frame {
    pub w: CMatrix,
    pub w_inv: CMatrix,
    /// Λ in the frame: the identity, or Λ itself for the identity frame.
    pub lambda: CMatrix,
}

impl Frame {
    /// `None` when Λ has no positive eigenvalue.
    pub fn new(lambda: &CMatrix) -> Option<Frame> {
        let d = lambda.nrows();
        let eig = SymmetricEigen::new(hermitian_part(lambda));
        let top = eig.eigenvalues.iter().fold(0.0f64, |a, v| a.max(*v));
        if !(top > 0.0) {
            return None;
        }
        let pad = 8.0 * d as f64 * f64::EPSILON * top;
        let mut w = CMatrix::zeros(d, d);
        let mut w_inv = CMatrix::zeros(d, d);
        for k in 0..d {
            let root = (eig.eigenvalues[k].max(0.0) + pad).sqrt();
            let v = eig.eigenvectors.column(k);
            w.set_column(k, &(v * c(root, 0.0)));
            w_inv.set_row(k, &(v.adjoint() * c(1.0 / root, 0.0)));
        }
        Some(Frame { w, w_inv, lambda: CMatrix::identity(d, d) })
    }

    /// The identity frame, for Λ without positive eigenvalues.
    pub fn identity(lambda: &CMatrix) -> Frame {
        let d = lambda.nrows();
        Frame { w: CMatrix::identity(d, d), w_inv: CMatrix::identity(d, d), lambda: lambda.clone() }
    }

    /// `W† m W`.
    pub fn congruence(&self, m: &CMatrix) -> CMatrix {
        hermitian_part(&(self.w.adjoint() * m * &self.w))
    }

    fn whiten_functional(&self, f: &Functional) -> Functional {
        Functional { plus: self.congruence(&f.plus), minus: self.congruence(&f.minus), scale: f.scale }
    }

    /// The problem in `H = W⁻¹ G W⁻†` coordinates.
    pub fn whiten(&self, p: &SdpProblem) -> SdpProblem {
        let mut q = p.clone();
        q.lambda = self.lambda.clone();
        q.objective = self.whiten_functional(&p.objective);
        for e in &mut q.equalities {
            e.functional = self.whiten_functional(&e.functional);
        }
        for iv in &mut q.intervals {
            iv.functional = self.whiten_functional(&iv.functional);
        }
        q
    }

    /// `G = W H W†`.
    pub fn lift_primal(&self, h: &CMatrix) -> CMatrix {
        hermitian_part(&(&self.w * h * self.w.adjoint()))
    }

    /// `H = W⁻¹ G W⁻†`.
    pub fn whiten_primal(&self, g: &CMatrix) -> CMatrix {
        hermitian_part(&(&self.w_inv * g * self.w_inv.adjoint()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hermitian_inner, min_eigenvalue};

    fn sample() -> CMatrix {
        let a = CMatrix::from_fn(3, 3, |i, j| c((i + 2 * j) as f64 * 0.3, (i as f64 - j as f64) * 0.2));
        let mut l = &a * a.adjoint();
        l[(0, 0)] += c(1e-6, 0.0);
        l
    }

    #[test]
    fn frame_factorises_lambda() {
        let l = sample();
        let f = Frame::new(&l).unwrap();
        assert!((&f.w * f.w.adjoint() - &l).norm() < 1e-10);
        assert!((&f.w_inv * &f.w - CMatrix::identity(3, 3)).norm() < 1e-8);
        // The padded Λ' dominates Λ.
        assert!(min_eigenvalue(&(&f.w * f.w.adjoint() - &l)) > 0.0);
    }

    #[test]
    fn inner_products_survive_whitening() {
        let l = sample();
        let f = Frame::new(&l).unwrap();
        let h = CMatrix::from_fn(3, 3, |i, j| c((i * j) as f64 + 1.0, 0.0));
        let cm = hermitian_part(&CMatrix::from_fn(3, 3, |i, j| c(i as f64 - j as f64, (i + j) as f64)));
        let g = f.lift_primal(&h);
        assert!((hermitian_inner(&cm, &g) - hermitian_inner(&f.congruence(&cm), &h)).abs() < 1e-9);
        assert!((f.whiten_primal(&g) - h).norm() < 1e-8);
    }

    #[test]
    fn singular_lambda_stays_invertible() {
        let v = CMatrix::from_column_slice(3, 1, &[c(1.0, 0.0), c(0.0, 1.0), c(1.0, 0.0)]);
        let l = &v * v.adjoint();
        let f = Frame::new(&l).unwrap();
        assert!((&f.w_inv * &f.w - CMatrix::identity(3, 3)).norm() < 1e-6);
        assert!(Frame::new(&CMatrix::zeros(2, 2)).is_none());
    }
}
