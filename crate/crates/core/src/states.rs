//! Pure code states, the four protocol families and the overlap matrix `Λ`.
//!
//! A code state is a tensor product of coherent modes and qubits. Overlaps
//! factorise over modes, so every entry of `Λ` is available in closed form.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::linalg::{c, CMatrix, I};

const QUBIT_NORM_TOL: f64 = 1e-12;

/// One tensor factor of a code state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StateFactor {
    Coherent(Complex64),
    Qubit([Complex64; 2]),
}

impl StateFactor {
    pub fn qubit(a0: Complex64, a1: Complex64) -> Result<Self> {
        let norm = a0.norm_sqr() + a1.norm_sqr();
        if (norm - 1.0).abs() > QUBIT_NORM_TOL {
            return Err(invalid(format!("qubit amplitudes have squared norm {norm}")));
        }
        Ok(StateFactor::Qubit([a0, a1]))
    }

    pub fn vacuum() -> Self {
        StateFactor::Coherent(Complex64::new(0.0, 0.0))
    }

    fn same_kind(&self, other: &Self) -> bool {
        matches!(
            (self, other),
            (StateFactor::Coherent(_), StateFactor::Coherent(_)) | (StateFactor::Qubit(_), StateFactor::Qubit(_))
        )
    }

    pub fn overlap(&self, other: &Self) -> Result<Complex64> {
        match (self, other) {
            (StateFactor::Coherent(a), StateFactor::Coherent(b)) => Ok(coherent_overlap(*a, *b)),
            (StateFactor::Qubit(a), StateFactor::Qubit(b)) => Ok(a[0].conj() * b[0] + a[1].conj() * b[1]),
            _ => Err(Error::LayoutMismatch("coherent factor paired with qubit factor".into())),
        }
    }
}

/// `<alpha|beta>` for coherent states.
pub fn coherent_overlap(alpha: Complex64, beta: Complex64) -> Complex64 {
    (Complex64::new(-0.5 * (alpha.norm_sqr() + beta.norm_sqr()), 0.0) + alpha.conj() * beta).exp()
}

/// Tensor product of factors; mode labels are implicit by position.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    pub factors: Vec<StateFactor>,
}

impl PureState {
    pub fn new(factors: Vec<StateFactor>) -> Self {
        PureState { factors }
    }

    pub fn layout_matches(&self, other: &PureState) -> bool {
        self.factors.len() == other.factors.len()
            && self.factors.iter().zip(&other.factors).all(|(a, b)| a.same_kind(b))
    }

    /// Amplitude of the first coherent factor, if any.
    pub fn signal_amplitude(&self) -> Option<Complex64> {
        self.factors.iter().find_map(|f| match f {
            StateFactor::Coherent(a) => Some(*a),
            _ => None,
        })
    }

    pub fn is_coherent_only(&self) -> bool {
        self.factors.iter().all(|f| matches!(f, StateFactor::Coherent(_)))
    }
}

pub fn state_overlap(s: &PureState, t: &PureState) -> Result<Complex64> {
    if !s.layout_matches(t) {
        return Err(Error::LayoutMismatch(format!(
            "{} factors vs {} factors",
            s.factors.len(),
            t.factors.len()
        )));
    }
    s.factors
        .iter()
        .zip(&t.factors)
        .try_fold(Complex64::new(1.0, 0.0), |acc, (a, b)| Ok(acc * a.overlap(b)?))
}

/// Physical encoding, which fixes the measurement-node conventions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Encoding {
    /// Single-mode phase encoding read out by one beam splitter.
    Phase,
    /// Time-bin qubits read out by a two-mode Bell-state analyser.
    TimeBin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Announcement {
    PsiPlus,
    PsiMinus,
    Fail,
}

impl Announcement {
    pub const CONCLUSIVE: [Announcement; 2] = [Announcement::PsiPlus, Announcement::PsiMinus];
}

/// Protocol families the toolkit can build.
#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    /// `|(-1)^a e^{i x pi/M} sqrt(mu)>` with `M` bases and one intensity.
    PhaseEncoding { bases: usize, mu: f64 },
    /// Phase encoding with a Trojan-horse reflection of intensity `nu`
    /// carrying the same modulation.
    PhaseEncodingTrojan { bases: usize, mu: f64, nu: f64 },
    /// Single-photon time-bin BB84 states leaking through two Trojan modes.
    DecoySinglePhoton { nu: f64 },
    /// Phase encoding with one intensity per basis.
    PhaseMatching { intensities: Vec<f64> },
}

/// Joint index `(x, a, y, b)` of an input pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct JointIndex {
    pub x: usize,
    pub a: usize,
    pub y: usize,
    pub b: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolSpec {
    pub family: Family,
    pub encoding: Encoding,
    pub num_bases: usize,
    pub key_basis: usize,
    /// Indexed by `2 * x + a`.
    pub alice_states: Vec<PureState>,
    pub bob_states: Vec<PureState>,
    /// `f_gamma` for each basis pair `(x, y)`, row-major `M x M`.
    pub basis_prior: Vec<f64>,
    /// `P(a, b | x = y)`.
    pub bit_prior: [[f64; 2]; 2],
    pub announcements: Vec<Announcement>,
    pub intensities: Vec<f64>,
    pub trojan_intensity: f64,
}

impl ProtocolSpec {
    pub fn alice(&self, x: usize, a: usize) -> &PureState {
        &self.alice_states[2 * x + a]
    }

    pub fn bob(&self, y: usize, b: usize) -> &PureState {
        &self.bob_states[2 * y + b]
    }

    /// All joint indices in the fixed lexicographic `(x, a, y, b)` order.
    pub fn joint_indices(&self) -> Vec<JointIndex> {
        let m = self.num_bases;
        let mut out = Vec::with_capacity(4 * m * m);
        for x in 0..m {
            for a in 0..2 {
                for y in 0..m {
                    for b in 0..2 {
                        out.push(JointIndex { x, a, y, b });
                    }
                }
            }
        }
        out
    }

    /// Joint indices with matching bases, `(x, a, x, b)`, in the same order.
    pub fn matched_indices(&self) -> Vec<JointIndex> {
        self.joint_indices().into_iter().filter(|j| j.x == j.y).collect()
    }

    /// Whether Bob flips his bit after announcement `z` when both used basis `x`.
    pub fn flips_bit(&self, x: usize, z: Announcement) -> bool {
        match (self.encoding, z) {
            (_, Announcement::Fail) => false,
            (Encoding::Phase, Announcement::PsiPlus) => false,
            (Encoding::Phase, Announcement::PsiMinus) => true,
            // Both Z-basis outcomes are anticorrelated in time.
            (Encoding::TimeBin, Announcement::PsiPlus) => x == self.key_basis,
            (Encoding::TimeBin, Announcement::PsiMinus) => true,
        }
    }

    pub fn is_coherent_only(&self) -> bool {
        self.alice_states.iter().chain(&self.bob_states).all(PureState::is_coherent_only)
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_bases == 0 {
            return Err(invalid("at least one basis is required"));
        }
        if self.key_basis >= self.num_bases {
            return Err(invalid("key basis out of range"));
        }
        if self.alice_states.len() != 2 * self.num_bases || self.bob_states.len() != 2 * self.num_bases {
            return Err(invalid("two states per basis are required for each party"));
        }
        let reference = &self.alice_states[0];
        for s in self.alice_states.iter() {
            if !s.layout_matches(reference) {
                return Err(Error::LayoutMismatch("Alice's states differ in layout".into()));
            }
        }
        let reference = &self.bob_states[0];
        for s in self.bob_states.iter() {
            if !s.layout_matches(reference) {
                return Err(Error::LayoutMismatch("Bob's states differ in layout".into()));
            }
        }
        if self.intensities.iter().any(|m| !(*m >= 0.0)) || !(self.trojan_intensity >= 0.0) {
            return Err(invalid("intensities must be nonnegative"));
        }
        let fsum: f64 = self.basis_prior.iter().sum();
        let psum: f64 = self.bit_prior.iter().flatten().sum();
        if (fsum - 1.0).abs() > 1e-12 || (psum - 1.0).abs() > 1e-12 {
            return Err(invalid("priors must sum to one"));
        }
        Ok(())
    }
}

fn check_intensity(name: &str, v: f64) -> Result<()> {
    if !(v >= 0.0) || !v.is_finite() {
        return Err(invalid(format!("{name} must be a finite nonnegative intensity, got {v}")));
    }
    Ok(())
}

fn phase(x: usize, m: usize) -> Complex64 {
    Complex64::from_polar(1.0, x as f64 * PI / m as f64)
}

fn sign(a: usize) -> f64 {
    if a == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Builds a protocol with symmetric Alice/Bob families and uniform priors.
pub fn build_protocol(family: Family) -> Result<ProtocolSpec> {
    let (encoding, num_bases, states, intensities, nu) = match &family {
        Family::PhaseEncoding { bases, mu } => {
            check_intensity("mu", *mu)?;
            let m = *bases;
            if m == 0 {
                return Err(invalid("at least one basis is required"));
            }
            let mut states = Vec::with_capacity(2 * m);
            for x in 0..m {
                for a in 0..2 {
                    let amp = phase(x, m) * sign(a) * mu.sqrt();
                    states.push(PureState::new(vec![StateFactor::Coherent(amp)]));
                }
            }
            (Encoding::Phase, m, states, vec![*mu; m], 0.0)
        }
        Family::PhaseEncodingTrojan { bases, mu, nu } => {
            check_intensity("mu", *mu)?;
            check_intensity("nu", *nu)?;
            let m = *bases;
            if m == 0 {
                return Err(invalid("at least one basis is required"));
            }
            let mut states = Vec::with_capacity(2 * m);
            for x in 0..m {
                for a in 0..2 {
                    let ph = phase(x, m) * sign(a);
                    states.push(PureState::new(vec![
                        StateFactor::Coherent(ph * mu.sqrt()),
                        StateFactor::Coherent(ph * nu.sqrt()),
                    ]));
                }
            }
            (Encoding::Phase, m, states, vec![*mu; m], *nu)
        }
        Family::DecoySinglePhoton { nu } => {
            check_intensity("nu", *nu)?;
            let r = std::f64::consts::FRAC_1_SQRT_2;
            let one = c(1.0, 0.0);
            let zero = c(0.0, 0.0);
            let t = c(nu.sqrt(), 0.0);
            let h = c((nu / 2.0).sqrt(), 0.0);
            let states = vec![
                PureState::new(vec![StateFactor::qubit(one, zero)?, StateFactor::Coherent(t), StateFactor::vacuum()]),
                PureState::new(vec![StateFactor::qubit(zero, one)?, StateFactor::vacuum(), StateFactor::Coherent(t)]),
                PureState::new(vec![
                    StateFactor::qubit(c(r, 0.0), c(r, 0.0))?,
                    StateFactor::Coherent(h),
                    StateFactor::Coherent(h),
                ]),
                PureState::new(vec![
                    StateFactor::qubit(c(r, 0.0), c(-r, 0.0))?,
                    StateFactor::Coherent(h),
                    StateFactor::Coherent(-h),
                ]),
            ];
            (Encoding::TimeBin, 2, states, Vec::new(), *nu)
        }
        Family::PhaseMatching { intensities } => {
            let m = intensities.len();
            if m == 0 {
                return Err(invalid("at least one basis is required"));
            }
            for (x, mu) in intensities.iter().enumerate() {
                check_intensity(&format!("mu_{x}"), *mu)?;
            }
            let mut states = Vec::with_capacity(2 * m);
            for (x, mu) in intensities.iter().enumerate() {
                for a in 0..2 {
                    let amp = phase(x, m) * sign(a) * mu.sqrt();
                    states.push(PureState::new(vec![StateFactor::Coherent(amp)]));
                }
            }
            (Encoding::Phase, m, states, intensities.clone(), 0.0)
        }
    };
    let spec = ProtocolSpec {
        family,
        encoding,
        num_bases,
        key_basis: 0,
        bob_states: states.clone(),
        alice_states: states,
        basis_prior: vec![1.0 / (num_bases * num_bases) as f64; num_bases * num_bases],
        bit_prior: [[0.25; 2]; 2],
        announcements: vec![Announcement::PsiPlus, Announcement::PsiMinus, Announcement::Fail],
        intensities,
        trojan_intensity: nu,
    };
    spec.validate()?;
    Ok(spec)
}

/// Overlap matrix of joint inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaMatrix {
    pub entries: CMatrix,
    pub index: Vec<JointIndex>,
}

impl LambdaMatrix {
    pub fn dim(&self) -> usize {
        self.index.len()
    }

    pub fn position(&self, j: JointIndex) -> Option<usize> {
        self.index.iter().position(|k| *k == j)
    }
}

/// `Λ` over all joint inputs, rows in lexicographic `(x, a, y, b)` order.
pub fn lambda_matrix(p: &ProtocolSpec) -> Result<LambdaMatrix> {
    lambda_on(p, p.joint_indices())
}

/// `Λ` restricted to the given joint inputs, in the given order.
pub fn lambda_on(p: &ProtocolSpec, index: Vec<JointIndex>) -> Result<LambdaMatrix> {
    let d = index.len();
    let mut entries = CMatrix::zeros(d, d);
    for (r, i) in index.iter().enumerate() {
        entries[(r, r)] = c(1.0, 0.0);
        for (s, j) in index.iter().enumerate().skip(r + 1) {
            let v = state_overlap(p.alice(i.x, i.a), p.alice(j.x, j.a))? * state_overlap(p.bob(i.y, i.b), p.bob(j.y, j.b))?;
            entries[(r, s)] = v;
            entries[(s, r)] = v.conj();
        }
    }
    Ok(LambdaMatrix { entries, index })
}

/// Single-qubit states used as labels of the virtual entangled source.
pub mod qubit {
    use super::*;

    pub fn zero() -> [Complex64; 2] {
        [c(1.0, 0.0), c(0.0, 0.0)]
    }
    pub fn one() -> [Complex64; 2] {
        [c(0.0, 0.0), c(1.0, 0.0)]
    }
    pub fn plus() -> [Complex64; 2] {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        [c(r, 0.0), c(r, 0.0)]
    }
    pub fn minus() -> [Complex64; 2] {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        [c(r, 0.0), c(-r, 0.0)]
    }
    pub fn plus_i() -> [Complex64; 2] {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        [c(r, 0.0), I * r]
    }
    pub fn minus_i() -> [Complex64; 2] {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        [c(r, 0.0), -I * r]
    }
    pub fn inner(a: &[Complex64; 2], b: &[Complex64; 2]) -> Complex64 {
        a[0].conj() * b[0] + a[1].conj() * b[1]
    }
}
