//! Assembly of the worst-case phase-error SDP.
//!
//! Variables are the two conclusive Gram blocks `G+` (announcement Ψ+) and
//! `G-` (Ψ-) together with a nonnegative scale `s`. The failed announcement
//! is eliminated through the residual cone `sΛ - G+ - G- ⪰ 0`. With exact
//! statistics `s` is pinned to 1. With interval statistics the blocks are
//! normalised by the unknown key-basis pass probability, which turns the
//! ratio objective into a linear one and moves the pass bounds onto `s`.
//!
//! Functionals use `<C, G> = Σ conj(C_ij) G_ij`, real for Hermitian `C`, `G`.

use std::fmt::Write as _;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::linalg::{c, hermitian_inner, is_hermitian, min_eigenvalue, CMatrix};
use crate::states::{lambda_on, qubit, Announcement, Encoding, JointIndex, LambdaMatrix, ProtocolSpec};

const HERMITIAN_TOL: f64 = 1e-12;

type Qubit = [Complex64; 2];
type Operator = [[Complex64; 2]; 2];

/// Linear functional `<plus, G+> + <minus, G-> + scale * s`.
#[derive(Debug, Clone, PartialEq)]
pub struct Functional {
    pub plus: CMatrix,
    pub minus: CMatrix,
    pub scale: f64,
}

impl Functional {
    pub fn zeros(d: usize) -> Self {
        Functional { plus: CMatrix::zeros(d, d), minus: CMatrix::zeros(d, d), scale: 0.0 }
    }

    pub fn dim(&self) -> usize {
        self.plus.nrows()
    }

    pub fn block(&self, z: Announcement) -> Option<&CMatrix> {
        match z {
            Announcement::PsiPlus => Some(&self.plus),
            Announcement::PsiMinus => Some(&self.minus),
            Announcement::Fail => None,
        }
    }

    fn block_mut(&mut self, z: Announcement) -> &mut CMatrix {
        match z {
            Announcement::PsiPlus => &mut self.plus,
            Announcement::PsiMinus => &mut self.minus,
            Announcement::Fail => unreachable!("no block for the failed announcement"),
        }
    }

    pub fn eval(&self, g_plus: &CMatrix, g_minus: &CMatrix, s: f64) -> f64 {
        hermitian_inner(&self.plus, g_plus) + hermitian_inner(&self.minus, g_minus) + self.scale * s
    }

    pub fn is_hermitian(&self) -> bool {
        is_hermitian(&self.plus, HERMITIAN_TOL) && is_hermitian(&self.minus, HERMITIAN_TOL)
    }

    pub fn scaled(&self, k: f64) -> Functional {
        let k_c = c(k, 0.0);
        Functional { plus: &self.plus * k_c, minus: &self.minus * k_c, scale: self.scale * k }
    }

    /// `self + k * other`.
    pub fn add_scaled(&self, other: &Functional, k: f64) -> Functional {
        let k_c = c(k, 0.0);
        Functional {
            plus: &self.plus + &other.plus * k_c,
            minus: &self.minus + &other.minus * k_c,
            scale: self.scale + k * other.scale,
        }
    }

    pub fn with_scale(mut self, scale: f64) -> Functional {
        self.scale = scale;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Equality {
    pub label: String,
    pub functional: Functional,
    pub value: f64,
}

/// `lower <= functional <= upper`; a missing side is unconstrained.
#[derive(Debug, Clone, PartialEq)]
pub struct Interval {
    pub label: String,
    pub functional: Functional,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
}

/// Maximise `objective + objective_constant`.
#[derive(Debug, Clone, PartialEq)]
pub struct SdpProblem {
    pub lambda: CMatrix,
    pub objective: Functional,
    pub objective_constant: f64,
    pub equalities: Vec<Equality>,
    pub intervals: Vec<Interval>,
    /// Upper limit on the objective value (1/2 for phase errors).
    pub cap: Option<f64>,
    /// Bounds on `s`; equal bounds pin it.
    pub scale_bounds: (f64, f64),
}

impl SdpProblem {
    pub fn dim(&self) -> usize {
        self.lambda.nrows()
    }

    pub fn objective_is_constant(&self) -> bool {
        self.objective.plus.iter().chain(self.objective.minus.iter()).all(|z| *z == c(0.0, 0.0))
            && self.objective.scale == 0.0
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.dim();
        if !self.lambda.is_square() || !is_hermitian(&self.lambda, HERMITIAN_TOL) {
            return Err(invalid("Λ must be square and Hermitian"));
        }
        let (lo, hi) = self.scale_bounds;
        if !(lo >= 0.0) || !(hi >= lo) || !hi.is_finite() {
            return Err(invalid(format!("scale bounds ({lo}, {hi}) are not a finite nonnegative range")));
        }
        let functionals = std::iter::once(&self.objective)
            .chain(self.equalities.iter().map(|e| &e.functional))
            .chain(self.intervals.iter().map(|i| &i.functional));
        for f in functionals {
            if f.dim() != d || f.minus.nrows() != d || !f.plus.is_square() || !f.minus.is_square() {
                return Err(invalid("functional dimension does not match Λ"));
            }
            if !f.is_hermitian() {
                return Err(invalid("functional coefficients must be Hermitian"));
            }
        }
        for i in &self.intervals {
            if let (Some(l), Some(u)) = (i.lower, i.upper) {
                if l > u {
                    return Err(invalid(format!("interval '{}' has lower bound above upper bound", i.label)));
                }
            }
        }
        Ok(())
    }

    /// Objective value at a candidate point (including the constant).
    pub fn objective_value(&self, g_plus: &CMatrix, g_minus: &CMatrix, s: f64) -> f64 {
        self.objective.eval(g_plus, g_minus, s) + self.objective_constant
    }

    /// Largest violation of any constraint at a candidate point, including
    /// negative eigenvalues of the three cones.
    pub fn max_violation(&self, g_plus: &CMatrix, g_minus: &CMatrix, s: f64) -> f64 {
        let mut worst = 0.0f64;
        for e in &self.equalities {
            worst = worst.max((e.functional.eval(g_plus, g_minus, s) - e.value).abs());
        }
        for i in &self.intervals {
            let v = i.functional.eval(g_plus, g_minus, s);
            if let Some(l) = i.lower {
                worst = worst.max(l - v);
            }
            if let Some(u) = i.upper {
                worst = worst.max(v - u);
            }
        }
        if let Some(cap) = self.cap {
            worst = worst.max(self.objective_value(g_plus, g_minus, s) - cap);
        }
        worst = worst.max(self.scale_bounds.0 - s).max(s - self.scale_bounds.1);
        let residual = &self.lambda * c(s, 0.0) - g_plus - g_minus;
        for m in [g_plus, g_minus, &residual] {
            worst = worst.max(-min_eigenvalue(m));
        }
        worst
    }
}

/// Virtual-protocol conventions: key-bit labels of the entangled source,
/// the conjugate observable and Bob's correction per announcement. The
/// target state is the `+1` eigenstate of `observable ⊗ observable`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrectionConvention {
    pub key_labels: [Qubit; 2],
    pub observable: Operator,
    pub correction_plus: Operator,
    pub correction_minus: Operator,
}

fn op(m: [[f64; 2]; 2]) -> Operator {
    [[c(m[0][0], 0.0), c(m[0][1], 0.0)], [c(m[1][0], 0.0), c(m[1][1], 0.0)]]
}

fn pauli_y() -> Operator {
    [[c(0.0, 0.0), c(0.0, -1.0)], [c(0.0, 1.0), c(0.0, 0.0)]]
}

fn matmul(a: &Operator, b: &Operator) -> Operator {
    let mut out = [[c(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

fn adjoint(a: &Operator) -> Operator {
    [[a[0][0].conj(), a[1][0].conj()], [a[0][1].conj(), a[1][1].conj()]]
}

/// `<u| A |v>`.
fn sandwich(u: &Qubit, a: &Operator, v: &Qubit) -> Complex64 {
    let av = [a[0][0] * v[0] + a[0][1] * v[1], a[1][0] * v[0] + a[1][1] * v[1]];
    qubit::inner(u, &av)
}

impl CorrectionConvention {
    /// Phase encoding: key bits labelled `|+>`, `|->`, Y measured on both
    /// sides, Bob applies Z after Ψ-.
    pub fn phase_encoding() -> Self {
        CorrectionConvention {
            key_labels: [qubit::plus(), qubit::minus()],
            observable: pauli_y(),
            correction_plus: op([[1.0, 0.0], [0.0, 1.0]]),
            correction_minus: op([[1.0, 0.0], [0.0, -1.0]]),
        }
    }

    /// Time-bin single photons: key bits labelled `|0>`, `|1>`, X measured
    /// on both sides, Bob applies X after Ψ+ and ZX after Ψ-.
    pub fn time_bin() -> Self {
        let x = op([[0.0, 1.0], [1.0, 0.0]]);
        let z = op([[1.0, 0.0], [0.0, -1.0]]);
        CorrectionConvention {
            key_labels: [qubit::zero(), qubit::one()],
            observable: x,
            correction_plus: x,
            correction_minus: matmul(&z, &x),
        }
    }

    pub fn for_encoding(e: Encoding) -> Self {
        match e {
            Encoding::Phase => Self::phase_encoding(),
            Encoding::TimeBin => Self::time_bin(),
        }
    }

    fn correction(&self, z: Announcement) -> &Operator {
        match z {
            Announcement::PsiMinus => &self.correction_minus,
            _ => &self.correction_plus,
        }
    }
}

/// Phase-error rate as `constant + <plus, G+> + <minus, G->`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseErrorFunctional {
    pub constant: f64,
    pub functional: Functional,
    /// Pass probability folded into the coefficients.
    pub normalization: f64,
}

impl PhaseErrorFunctional {
    pub fn eval(&self, g_plus: &CMatrix, g_minus: &CMatrix) -> f64 {
        self.constant + self.functional.eval(g_plus, g_minus, 0.0)
    }
}

/// Which joint inputs index the Gram blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InputSet {
    /// Only `x = y` inputs. Every functional lives on these rows and a
    /// feasible sub-Gram always extends, so the optimum is unchanged.
    #[default]
    Matched,
    /// All `(2M)^2` joint inputs.
    Full,
}

impl InputSet {
    pub fn indices(self, p: &ProtocolSpec) -> Vec<JointIndex> {
        match self {
            InputSet::Matched => p.matched_indices(),
            InputSet::Full => p.joint_indices(),
        }
    }
}

fn position(index: &[JointIndex], j: JointIndex) -> Result<usize> {
    index
        .iter()
        .position(|k| *k == j)
        .ok_or_else(|| Error::LayoutMismatch(format!("joint input {j:?} is not part of the block index")))
}

/// Phase-error functional for the key basis, derived from the virtual
/// protocol: `e_ph = (1 - <O⊗O>)/2` after Bob's correction, with
/// `<O⊗O> = (1/4P) Σ_z Σ <l_a'|O|l_a><l_b'|U_z† O U_z|l_b> G^z_{a'b',ab}`.
pub fn phase_error_functional_on(
    p: &ProtocolSpec,
    convention: &CorrectionConvention,
    index: &[JointIndex],
    pass_probability: f64,
) -> Result<PhaseErrorFunctional> {
    if p.key_basis >= p.num_bases {
        return Err(invalid("protocol has no valid key basis"));
    }
    if !(pass_probability > 0.0) {
        return Err(invalid("phase-error functional needs a positive pass probability"));
    }
    let k = p.key_basis;
    let mut f = Functional::zeros(index.len());
    let labels = &convention.key_labels;
    let o = &convention.observable;
    for z in Announcement::CONCLUSIVE {
        let u = convention.correction(z);
        let o_bob = matmul(&adjoint(u), &matmul(o, u));
        let block = f.block_mut(z);
        for a1 in 0..2 {
            for b1 in 0..2 {
                let i = position(index, JointIndex { x: k, a: a1, y: k, b: b1 })?;
                for a in 0..2 {
                    for b in 0..2 {
                        let j = position(index, JointIndex { x: k, a, y: k, b })?;
                        let kij = sandwich(&labels[a1], o, &labels[a]) * sandwich(&labels[b1], &o_bob, &labels[b]);
                        block[(i, j)] = -kij.conj() / (8.0 * pass_probability);
                    }
                }
            }
        }
    }
    Ok(PhaseErrorFunctional { constant: 0.5, functional: f, normalization: pass_probability })
}

/// Phase-error functional over the matched-basis block index.
pub fn phase_error_functional(
    p: &ProtocolSpec,
    convention: &CorrectionConvention,
    pass_probability: f64,
) -> Result<PhaseErrorFunctional> {
    phase_error_functional_on(p, convention, &p.matched_indices(), pass_probability)
}

/// Pass-probability and error-mass functionals of one basis.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisFunctionals {
    pub basis: usize,
    pub pass: Functional,
    pub error_mass: Functional,
}

/// Error event for bits `(a, b)` in basis `x` after announcement `z`.
pub fn is_error(p: &ProtocolSpec, x: usize, a: usize, b: usize, z: Announcement) -> bool {
    let b_final = b ^ usize::from(p.flips_bit(x, z));
    a != b_final
}

pub fn statistics_functionals_on(p: &ProtocolSpec, index: &[JointIndex]) -> Result<Vec<BasisFunctionals>> {
    let d = index.len();
    let mut out = Vec::with_capacity(p.num_bases);
    for x in 0..p.num_bases {
        let mut pass = Functional::zeros(d);
        let mut error_mass = Functional::zeros(d);
        for a in 0..2 {
            for b in 0..2 {
                let i = position(index, JointIndex { x, a, y: x, b })?;
                let w = c(p.bit_prior[a][b], 0.0);
                for z in Announcement::CONCLUSIVE {
                    pass.block_mut(z)[(i, i)] = w;
                    if is_error(p, x, a, b, z) {
                        error_mass.block_mut(z)[(i, i)] = w;
                    }
                }
            }
        }
        out.push(BasisFunctionals { basis: x, pass, error_mass });
    }
    Ok(out)
}

pub fn statistics_functionals(p: &ProtocolSpec) -> Result<Vec<BasisFunctionals>> {
    statistics_functionals_on(p, &p.matched_indices())
}

/// Exact bit-error rates below this are relaxed to `[0, ERROR_RATE_FLOOR]`.
/// An error mass pinned at zero forces whole rows of the Gram blocks to
/// vanish, the optimal multipliers are then not attained and no finite
/// certificate reaches the bound. The relaxation only enlarges the feasible
/// set.
pub const ERROR_RATE_FLOOR: f64 = 1e-6;

/// What was observed in one basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BasisObservation {
    /// Exact pass probability and bit-error rate.
    Exact { pass: f64, e_bit: f64 },
    /// Bounds on the pass probability and on the error mass `e_bit * pass`.
    Bounded { pass: (f64, f64), error_mass: (f64, f64) },
}

impl BasisObservation {
    fn validate(&self, x: usize) -> Result<()> {
        let unit = |v: f64| (0.0..=1.0).contains(&v);
        match *self {
            BasisObservation::Exact { pass, e_bit } => {
                if !unit(pass) {
                    return Err(Error::InconsistentStatistics(format!("basis {x}: pass probability {pass} outside [0, 1]")));
                }
                if !unit(e_bit) {
                    return Err(Error::InconsistentStatistics(format!("basis {x}: bit-error rate {e_bit} outside [0, 1]")));
                }
            }
            BasisObservation::Bounded { pass, error_mass } => {
                for (name, (l, u)) in [("pass", pass), ("error mass", error_mass)] {
                    if !unit(l) || !unit(u) || l > u {
                        return Err(Error::InconsistentStatistics(format!("basis {x}: {name} interval [{l}, {u}] invalid")));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Observations per basis; `None` leaves a basis unconstrained.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservedStats {
    pub bases: Vec<Option<BasisObservation>>,
}

impl ObservedStats {
    pub fn exact(pairs: &[(f64, f64)]) -> Self {
        ObservedStats {
            bases: pairs.iter().map(|&(pass, e_bit)| Some(BasisObservation::Exact { pass, e_bit })).collect(),
        }
    }
}

/// Builds the SDP over the matched-basis block index.
pub fn assemble_sdp(p: &ProtocolSpec, observed: &ObservedStats) -> Result<SdpProblem> {
    assemble_sdp_with(p, observed, InputSet::Matched)
}

pub fn assemble_sdp_with(p: &ProtocolSpec, observed: &ObservedStats, inputs: InputSet) -> Result<SdpProblem> {
    p.validate()?;
    if observed.bases.len() != p.num_bases {
        return Err(Error::InconsistentStatistics(format!(
            "{} basis observations for a {}-basis protocol",
            observed.bases.len(),
            p.num_bases
        )));
    }
    for (x, o) in observed.bases.iter().enumerate() {
        if let Some(o) = o {
            o.validate(x)?;
        }
    }
    let key = observed.bases[p.key_basis]
        .ok_or_else(|| Error::InconsistentStatistics("the key basis must be observed".into()))?;
    let index = inputs.indices(p);
    let LambdaMatrix { entries: lambda, index } = lambda_on(p, index)?;
    let stats = statistics_functionals_on(p, &index)?;
    let convention = CorrectionConvention::for_encoding(p.encoding);
    let d = index.len();
    let homogenized = observed.bases.iter().flatten().any(|o| matches!(o, BasisObservation::Bounded { .. }));

    let mut equalities = Vec::new();
    let mut intervals = Vec::new();

    let key_pass_lower = match key {
        BasisObservation::Exact { pass, .. } => pass,
        BasisObservation::Bounded { pass, .. } => pass.0,
    };

    // No conclusive events can be certified: the cap binds.
    let (objective, scale_bounds) = if key_pass_lower <= 0.0 {
        (Functional::zeros(d), (1.0, 1.0))
    } else if homogenized {
        let (l, u) = match key {
            BasisObservation::Exact { pass, .. } => (pass, pass),
            BasisObservation::Bounded { pass, .. } => pass,
        };
        let e = phase_error_functional_on(p, &convention, &index, 1.0)?;
        (e.functional, (1.0 / u, 1.0 / l))
    } else {
        let e = phase_error_functional_on(p, &convention, &index, key_pass_lower)?;
        (e.functional, (1.0, 1.0))
    };
    let degenerate = key_pass_lower <= 0.0;

    for (x, obs) in observed.bases.iter().enumerate() {
        let Some(obs) = obs else { continue };
        let f = &stats[x];
        match (*obs, homogenized && !degenerate) {
            (BasisObservation::Exact { pass, e_bit }, false) => {
                equalities.push(Equality { label: format!("pass[{x}]"), functional: f.pass.clone(), value: pass });
                if e_bit < ERROR_RATE_FLOOR {
                    intervals.push(Interval {
                        label: format!("error_mass[{x}]"),
                        functional: f.error_mass.clone(),
                        lower: Some(0.0),
                        upper: Some(ERROR_RATE_FLOOR * pass),
                    });
                } else {
                    equalities.push(Equality {
                        label: format!("error_mass[{x}]"),
                        functional: f.error_mass.clone(),
                        value: e_bit * pass,
                    });
                }
            }
            (BasisObservation::Exact { pass, e_bit }, true) => {
                if x == p.key_basis {
                    equalities.push(Equality { label: format!("pass[{x}]"), functional: f.pass.clone(), value: 1.0 });
                } else {
                    equalities.push(Equality {
                        label: format!("pass[{x}]"),
                        functional: f.pass.clone().with_scale(-pass),
                        value: 0.0,
                    });
                }
                if e_bit < ERROR_RATE_FLOOR {
                    push_homogeneous(&mut intervals, format!("error_mass[{x}]"), &f.error_mass, (0.0, ERROR_RATE_FLOOR * pass));
                } else {
                    equalities.push(Equality {
                        label: format!("error_mass[{x}]"),
                        functional: f.error_mass.clone().with_scale(-e_bit * pass),
                        value: 0.0,
                    });
                }
            }
            (BasisObservation::Bounded { pass, error_mass }, false) => {
                intervals.push(Interval {
                    label: format!("pass[{x}]"),
                    functional: f.pass.clone(),
                    lower: Some(pass.0),
                    upper: Some(pass.1),
                });
                intervals.push(Interval {
                    label: format!("error_mass[{x}]"),
                    functional: f.error_mass.clone(),
                    lower: Some(error_mass.0),
                    upper: Some(error_mass.1),
                });
            }
            (BasisObservation::Bounded { pass, error_mass }, true) => {
                if x == p.key_basis {
                    equalities.push(Equality { label: format!("pass[{x}]"), functional: f.pass.clone(), value: 1.0 });
                } else {
                    push_homogeneous(&mut intervals, format!("pass[{x}]"), &f.pass, pass);
                }
                push_homogeneous(&mut intervals, format!("error_mass[{x}]"), &f.error_mass, error_mass);
            }
        }
    }

    let problem = SdpProblem {
        lambda,
        objective,
        objective_constant: 0.5,
        equalities,
        intervals,
        cap: Some(0.5),
        scale_bounds,
    };
    problem.validate()?;
    Ok(problem)
}

/// `l * s <= F <= u * s` as two one-sided constraints.
fn push_homogeneous(out: &mut Vec<Interval>, label: String, f: &Functional, (l, u): (f64, f64)) {
    if l > 0.0 {
        out.push(Interval { label: format!("{label}.lower"), functional: f.clone().with_scale(-l), lower: Some(0.0), upper: None });
    }
    out.push(Interval { label: format!("{label}.upper"), functional: f.clone().with_scale(-u), lower: None, upper: Some(0.0) });
}

// ---------------------------------------------------------------------------
// Plain-text serialisation.
//
//   mdiqkd-sdp 1
//   dim <d>
//   equalities <n>
//   intervals <n>
//   cap <value | none>
//   scale_bounds <lo> <hi>
//   objective_constant <value>
//   lambda
//   <d rows of d "re im" pairs>
//   objective <scale>
//   <plus block rows> <minus block rows>
//   equality <value> <label>          followed by "functional <scale>" and blocks
//   interval <lower|none> <upper|none> <label>   likewise
//
// Numbers are written with 17 significant digits.
// ---------------------------------------------------------------------------

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_else(|| "none".into())
}

fn write_matrix(out: &mut String, m: &CMatrix) {
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| format!("{} {}", num(m[(i, j)].re), num(m[(i, j)].im))).collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
}

fn write_functional(out: &mut String, f: &Functional) {
    let _ = writeln!(out, "functional {}", num(f.scale));
    write_matrix(out, &f.plus);
    write_matrix(out, &f.minus);
}

pub fn to_text(p: &SdpProblem) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "mdiqkd-sdp 1");
    let _ = writeln!(out, "dim {}", p.dim());
    let _ = writeln!(out, "equalities {}", p.equalities.len());
    let _ = writeln!(out, "intervals {}", p.intervals.len());
    let _ = writeln!(out, "cap {}", opt_num(p.cap));
    let _ = writeln!(out, "scale_bounds {} {}", num(p.scale_bounds.0), num(p.scale_bounds.1));
    let _ = writeln!(out, "objective_constant {}", num(p.objective_constant));
    let _ = writeln!(out, "lambda");
    write_matrix(&mut out, &p.lambda);
    let _ = writeln!(out, "objective");
    write_functional(&mut out, &p.objective);
    for e in &p.equalities {
        let _ = writeln!(out, "equality {} {}", num(e.value), e.label);
        write_functional(&mut out, &e.functional);
    }
    for i in &p.intervals {
        let _ = writeln!(out, "interval {} {} {}", opt_num(i.lower), opt_num(i.upper), i.label);
        write_functional(&mut out, &i.functional);
    }
    out
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    line: usize,
}

impl<'a> Lines<'a> {
    fn err(&self, message: impl Into<String>) -> Error {
        Error::Parse { line: self.line, message: message.into() }
    }

    fn next(&mut self) -> Result<&'a str> {
        loop {
            let (n, l) = self.inner.next().ok_or_else(|| Error::Parse { line: self.line + 1, message: "unexpected end of input".into() })?;
            self.line = n + 1;
            let t = l.trim();
            if !t.is_empty() && !t.starts_with('#') {
                return Ok(t);
            }
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<Vec<&'a str>> {
        let l = self.next()?;
        let mut parts = l.split_whitespace();
        if parts.next() != Some(kw) {
            return Err(self.err(format!("expected '{kw}'")));
        }
        Ok(parts.collect())
    }

    fn float(&self, s: &str) -> Result<f64> {
        s.parse::<f64>().map_err(|_| self.err(format!("invalid number '{s}'")))
    }

    fn opt_float(&self, s: &str) -> Result<Option<f64>> {
        if s == "none" {
            Ok(None)
        } else {
            self.float(s).map(Some)
        }
    }

    fn usize_field(&mut self, kw: &str) -> Result<usize> {
        let f = self.keyword(kw)?;
        match f.as_slice() {
            [v] => v.parse().map_err(|_| self.err(format!("invalid count '{v}'"))),
            _ => Err(self.err(format!("'{kw}' takes one value"))),
        }
    }

    fn matrix(&mut self, d: usize) -> Result<CMatrix> {
        let mut m = CMatrix::zeros(d, d);
        for i in 0..d {
            let l = self.next()?;
            let vals: Vec<&str> = l.split_whitespace().collect();
            if vals.len() != 2 * d {
                return Err(self.err(format!("expected {} numbers, found {}", 2 * d, vals.len())));
            }
            for j in 0..d {
                m[(i, j)] = c(self.float(vals[2 * j])?, self.float(vals[2 * j + 1])?);
            }
        }
        Ok(m)
    }

    fn functional(&mut self, d: usize) -> Result<Functional> {
        let f = self.keyword("functional")?;
        let scale = match f.as_slice() {
            [v] => self.float(v)?,
            _ => return Err(self.err("'functional' takes one value")),
        };
        let plus = self.matrix(d)?;
        let minus = self.matrix(d)?;
        Ok(Functional { plus, minus, scale })
    }
}

fn label_of(parts: &[&str], skip: usize) -> String {
    parts[skip..].join(" ")
}

pub fn from_text(text: &str) -> Result<SdpProblem> {
    let mut r = Lines { inner: text.lines().enumerate(), line: 0 };
    let header = r.keyword("mdiqkd-sdp")?;
    if header != ["1"] {
        return Err(r.err("unsupported format version"));
    }
    let d = r.usize_field("dim")?;
    let n_eq = r.usize_field("equalities")?;
    let n_iv = r.usize_field("intervals")?;
    let cap = match r.keyword("cap")?.as_slice() {
        [v] => r.opt_float(v)?,
        _ => return Err(r.err("'cap' takes one value")),
    };
    let scale_bounds = match r.keyword("scale_bounds")?.as_slice() {
        [lo, hi] => (r.float(lo)?, r.float(hi)?),
        _ => return Err(r.err("'scale_bounds' takes two values")),
    };
    let objective_constant = match r.keyword("objective_constant")?.as_slice() {
        [v] => r.float(v)?,
        _ => return Err(r.err("'objective_constant' takes one value")),
    };
    r.keyword("lambda")?;
    let lambda = r.matrix(d)?;
    r.keyword("objective")?;
    let objective = r.functional(d)?;
    let mut equalities = Vec::with_capacity(n_eq);
    for _ in 0..n_eq {
        let parts = r.keyword("equality")?;
        if parts.is_empty() {
            return Err(r.err("equality needs a value"));
        }
        let value = r.float(parts[0])?;
        let label = label_of(&parts, 1);
        equalities.push(Equality { label, functional: r.functional(d)?, value });
    }
    let mut intervals = Vec::with_capacity(n_iv);
    for _ in 0..n_iv {
        let parts = r.keyword("interval")?;
        if parts.len() < 2 {
            return Err(r.err("interval needs lower and upper bounds"));
        }
        let lower = r.opt_float(parts[0])?;
        let upper = r.opt_float(parts[1])?;
        let label = label_of(&parts, 2);
        intervals.push(Interval { label, functional: r.functional(d)?, lower, upper });
    }
    let p = SdpProblem { lambda, objective, objective_constant, equalities, intervals, cap, scale_bounds };
    p.validate()?;
    Ok(p)
}
