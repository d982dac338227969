//! Independent check of dual certificates.
//!
//! For multipliers `Z` (residual cone), `y` (equalities), `p`, `q`
//! (lower/upper sides of intervals) and `τ` (objective cap), every feasible
//! point satisfies
//!
//! ```text
//! objective <= (1-τ) c0 + τ cap + Σ y_i b_i - Σ p_j l_j + Σ q_j u_j
//!              - <S+, G+> - <S-, G-> + σ s - <Z, R>
//! S± = Z + Σ y_i A_i± - Σ (p_j - q_j) B_j± - (1-τ) C±
//! σ  = (1-τ) c_s - Σ y_i a_i + Σ (p_j - q_j) β_j + <Z, Λ>
//! ```
//!
//! where `R = sΛ - G+ - G-`. Everything is evaluated in the whitening frame
//! `W` of Λ, which the verifier recomputes from Λ: functionals become
//! `W†CW`, Λ is replaced by the slightly larger `Λ' = WW†` (the identity in
//! the frame), and `Z` is given there directly. The bound therefore holds
//! for every Gram matrix within rounding of the stored one. With
//! `S±, Z ⪰ 0` the three inner products drop out; otherwise each is bounded
//! by `|λ_min| · s_max · d`, since all three whitened cones are dominated by
//! `sI`. The `σ s` term is maximised
//! over the scale interval. Scalar multipliers are projected onto `[0, ∞)`
//! first, so the bound is valid for any input.

use crate::error::{Error, Result};
use super::frame::Frame;
use crate::linalg::{c, hermitian_inner, min_eigenvalue, trace_re, CMatrix};
use crate::sdp_model::SdpProblem;

#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    /// Multiplier of the residual cone `sΛ - G+ - G- ⪰ 0`, in the
    /// whitening frame of Λ.
    pub z: CMatrix,
    pub equality: Vec<f64>,
    /// Multipliers of the lower sides of intervals (zero where absent).
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Multiplier of the objective cap.
    pub cap: f64,
}

impl Certificate {
    pub fn zero(p: &SdpProblem) -> Self {
        let d = p.dim();
        Certificate {
            z: CMatrix::zeros(d, d),
            equality: vec![0.0; p.equalities.len()],
            lower: vec![0.0; p.intervals.len()],
            upper: vec![0.0; p.intervals.len()],
            cap: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertificateResiduals {
    /// Slack eigenvalues, measured in the whitening frame of Λ.
    pub min_eig_plus: f64,
    pub min_eig_minus: f64,
    pub min_eig_residual: f64,
    /// Most negative scalar multiplier before projection (0 if none).
    pub min_scalar_multiplier: f64,
    /// `|<S+, G+>| + |<S-, G->| + |<Z, R>|` at the primal point, when known.
    pub complementarity: f64,
}

impl CertificateResiduals {
    pub fn min_eigenvalue(&self) -> f64 {
        self.min_eig_plus.min(self.min_eig_minus).min(self.min_eig_residual)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationResult {
    pub passed: bool,
    /// Lagrangian bound without eigenvalue inflation.
    pub dual_value: f64,
    /// Added for negative slack eigenvalues.
    pub inflation: f64,
    /// Sound upper bound on the optimum: `dual_value + inflation`.
    pub certified_bound: f64,
    pub residuals: CertificateResiduals,
}

struct Slacks {
    s_plus: CMatrix,
    s_minus: CMatrix,
    sigma: f64,
    constant: f64,
}

fn frame(p: &SdpProblem) -> Frame {
    // Λ without positive eigenvalues admits only G = 0; any frame will do.
    Frame::new(&p.lambda).unwrap_or_else(|| Frame::identity(&p.lambda))
}

fn whitened(p: &SdpProblem) -> SdpProblem {
    frame(p).whiten(p)
}

fn slacks(p: &SdpProblem, cert: &Certificate) -> Slacks {
    let tau = cert.cap.max(0.0);
    let one_minus_tau = if p.cap.is_some() { 1.0 - tau } else { 1.0 };
    let mut s_plus = &cert.z - &p.objective.plus * c(one_minus_tau, 0.0);
    let mut s_minus = &cert.z - &p.objective.minus * c(one_minus_tau, 0.0);
    let mut sigma = one_minus_tau * p.objective.scale + hermitian_inner(&cert.z, &p.lambda);
    let mut constant = one_minus_tau * p.objective_constant;
    if let Some(cap) = p.cap {
        constant += tau * cap;
    }
    for (e, &y) in p.equalities.iter().zip(&cert.equality) {
        s_plus += &e.functional.plus * c(y, 0.0);
        s_minus += &e.functional.minus * c(y, 0.0);
        sigma -= y * e.functional.scale;
        constant += y * e.value;
    }
    for ((iv, &pl), &qu) in p.intervals.iter().zip(&cert.lower).zip(&cert.upper) {
        let pl = if iv.lower.is_some() { pl.max(0.0) } else { 0.0 };
        let qu = if iv.upper.is_some() { qu.max(0.0) } else { 0.0 };
        let w = pl - qu;
        s_plus -= &iv.functional.plus * c(w, 0.0);
        s_minus -= &iv.functional.minus * c(w, 0.0);
        sigma += w * iv.functional.scale;
        if let Some(l) = iv.lower {
            constant -= pl * l;
        }
        if let Some(u) = iv.upper {
            constant += qu * u;
        }
    }
    Slacks { s_plus, s_minus, sigma, constant }
}

/// Recomputes the dual bound of `cert` from the problem data alone.
pub fn verify_certificate(p: &SdpProblem, cert: &Certificate, tol: f64) -> Result<VerificationResult> {
    let d = p.dim();
    if cert.z.shape() != (d, d)
        || cert.equality.len() != p.equalities.len()
        || cert.lower.len() != p.intervals.len()
        || cert.upper.len() != p.intervals.len()
    {
        return Err(Error::MissingCertificate);
    }
    let scalars = cert.equality.iter().chain(&cert.lower).chain(&cert.upper).chain(std::iter::once(&cert.cap));
    if scalars.clone().any(|v| !v.is_finite()) || cert.z.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Ok(VerificationResult {
            passed: false,
            dual_value: f64::INFINITY,
            inflation: f64::INFINITY,
            certified_bound: f64::INFINITY,
            residuals: CertificateResiduals {
                min_eig_plus: f64::NEG_INFINITY,
                min_eig_minus: f64::NEG_INFINITY,
                min_eig_residual: f64::NEG_INFINITY,
                min_scalar_multiplier: f64::NEG_INFINITY,
                complementarity: f64::NAN,
            },
        });
    }
    let min_scalar = cert
        .lower
        .iter()
        .chain(&cert.upper)
        .chain(if p.cap.is_some() { Some(&cert.cap) } else { None })
        .fold(0.0f64, |a, v| a.min(*v));

    let q = whitened(p);
    let sl = slacks(&q, cert);
    let (s_lo, s_hi) = p.scale_bounds;
    let dual_value = sl.constant + (sl.sigma * s_lo).max(sl.sigma * s_hi);
    let min_eig_plus = min_eigenvalue(&sl.s_plus);
    let min_eig_minus = min_eigenvalue(&sl.s_minus);
    let min_eig_residual = min_eigenvalue(&cert.z);
    let trace_bound = s_hi * trace_re(&q.lambda).max(0.0);
    let inflation: f64 =
        [min_eig_plus, min_eig_minus, min_eig_residual].iter().map(|e| (-e).max(0.0) * trace_bound).sum();
    let passed = min_eig_plus >= -tol && min_eig_minus >= -tol && min_eig_residual >= -tol && min_scalar >= -tol;
    Ok(VerificationResult {
        passed,
        dual_value,
        inflation,
        certified_bound: dual_value + inflation,
        residuals: CertificateResiduals {
            min_eig_plus,
            min_eig_minus,
            min_eig_residual,
            min_scalar_multiplier: min_scalar,
            complementarity: 0.0,
        },
    })
}

/// Complementarity of a certificate against a primal point.
pub(crate) fn complementarity(p: &SdpProblem, cert: &Certificate, g_plus: &CMatrix, g_minus: &CMatrix, s: f64) -> f64 {
    let f = frame(p);
    let q = f.whiten(p);
    let sl = slacks(&q, cert);
    let (h_plus, h_minus) = (f.whiten_primal(g_plus), f.whiten_primal(g_minus));
    let r = &q.lambda * c(s, 0.0) - &h_plus - &h_minus;
    hermitian_inner(&sl.s_plus, &h_plus).abs()
        + hermitian_inner(&sl.s_minus, &h_minus).abs()
        + hermitian_inner(&cert.z, &r).abs()
}
