//! Exact symbolic algebra of q-Weyl exponential monomials.
//!
//! Monomials are phase * exp(L) where L is a rational linear form over the
//! canonical units
//!
//! ```text
//!   pi b x_i   (positions u, v, w)
//!   i b d_i    (momenta Du, Dv, Dw)
//!   pi b nu_k  (central parameters n1, n2)
//! ```
//!
//! and the phase lives in the ring e^{pi i (c0 + c2 b^2 + cm2 b^-2)} with
//! rational c0, c2, cm2 (so q = e^{pi i b^2} has (0, 1, 0)). With [x, d] = -1
//! the commutator of two linear forms is central:
//!
//!   [L1, L2] = pi i b^2 * sigma(L1, L2),
//!   sigma = sum_k (mom1_k pos2_k - pos1_k mom2_k),
//!
//! so products of monomials close with an exact q^{sigma/2} factor and all of
//! the paper-level manipulations stay inside exact rational arithmetic; b is
//! never evaluated numerically here.
//!
//! Text form (used in fixtures and reports): `q^{r} * exp(c*sym + ...)` with
//! symbols u, v, w, Du, Dv, Dw, n1, n2; a general phase prints as
//! `ph[c0,c2,cm2] * exp(...)`.

use crate::error::{Error, Result};
use num_rational::Rational64;
use num_traits::{Signed, Zero};
use std::collections::BTreeMap;
use std::fmt;

pub type Rat = Rational64;

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(n, d)
}

/// Phase e^{pi i (c0 + c2 b^2 + cm2 b^-2)}, canonicalized to c0 in [0, 2).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PhaseScalar {
    pub c0: Rat,
    pub c2: Rat,
    pub cm2: Rat,
}

impl fmt::Debug for PhaseScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ph[{},{},{}]", self.c0, self.c2, self.cm2)
    }
}

fn mod2(x: Rat) -> Rat {
    let two = rat(2, 1);
    let mut r = x - (x / two).floor() * two;
    if r < Rat::zero() {
        r += two;
    }
    if r >= two {
        r -= two;
    }
    r
}

impl PhaseScalar {
    pub fn new(c0: Rat, c2: Rat, cm2: Rat) -> Self {
        PhaseScalar {
            c0: mod2(c0),
            c2,
            cm2,
        }
    }

    pub fn one() -> Self {
        PhaseScalar::new(Rat::zero(), Rat::zero(), Rat::zero())
    }

    /// q^r = e^{pi i r b^2}.
    pub fn q_pow(r: Rat) -> Self {
        PhaseScalar::new(Rat::zero(), r, Rat::zero())
    }

    /// e^{pi i c0}.
    pub fn unit_pow(c0: Rat) -> Self {
        PhaseScalar::new(c0, Rat::zero(), Rat::zero())
    }

    pub fn is_one(&self) -> bool {
        self.c0.is_zero() && self.c2.is_zero() && self.cm2.is_zero()
    }

    pub fn mul(&self, other: &PhaseScalar) -> PhaseScalar {
        PhaseScalar::new(self.c0 + other.c0, self.c2 + other.c2, self.cm2 + other.cm2)
    }

    pub fn inv(&self) -> PhaseScalar {
        PhaseScalar::new(-self.c0, -self.c2, -self.cm2)
    }

    pub fn conj(&self) -> PhaseScalar {
        self.inv()
    }
}

pub const POS_NAMES: [&str; 3] = ["u", "v", "w"];
pub const MOM_NAMES: [&str; 3] = ["Du", "Dv", "Dw"];
pub const NU_NAMES: [&str; 2] = ["n1", "n2"];

/// Rational linear form over the canonical units.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct LinForm {
    pub pos: [Rat; 3],
    pub mom: [Rat; 3],
    pub nu: [Rat; 2],
}

impl fmt::Debug for LinForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}

impl LinForm {
    pub fn zero() -> Self {
        LinForm::default()
    }

    pub fn is_zero(&self) -> bool {
        self.pos.iter().all(Rat::is_zero)
            && self.mom.iter().all(Rat::is_zero)
            && self.nu.iter().all(Rat::is_zero)
    }

    pub fn add(&self, o: &LinForm) -> LinForm {
        let mut r = self.clone();
        for i in 0..3 {
            r.pos[i] += o.pos[i];
            r.mom[i] += o.mom[i];
        }
        for k in 0..2 {
            r.nu[k] += o.nu[k];
        }
        r
    }

    pub fn neg(&self) -> LinForm {
        self.scale(rat(-1, 1))
    }

    pub fn scale(&self, c: Rat) -> LinForm {
        let mut r = self.clone();
        for i in 0..3 {
            r.pos[i] *= c;
            r.mom[i] *= c;
        }
        for k in 0..2 {
            r.nu[k] *= c;
        }
        r
    }

    /// sigma with [L1, L2] = pi i b^2 sigma.
    pub fn symplectic(&self, o: &LinForm) -> Rat {
        let mut s = Rat::zero();
        for k in 0..3 {
            s += self.mom[k] * o.pos[k] - self.pos[k] * o.mom[k];
        }
        s
    }

    /// Apply a transposition of position/momentum pairs.
    pub fn permuted(&self, p: Transposition) -> LinForm {
        let (a, b) = p.indices();
        let mut r = self.clone();
        r.pos.swap(a, b);
        r.mom.swap(a, b);
        r
    }

    fn render(&self) -> String {
        let mut parts = Vec::new();
        let mut push = |c: &Rat, name: &str| {
            if !c.is_zero() {
                parts.push(format!("{c}*{name}"));
            }
        };
        for i in 0..3 {
            push(&self.pos[i], POS_NAMES[i]);
        }
        for i in 0..3 {
            push(&self.mom[i], MOM_NAMES[i]);
        }
        for k in 0..2 {
            push(&self.nu[k], NU_NAMES[k]);
        }
        if parts.is_empty() {
            "0".into()
        } else {
            parts.join(" + ")
        }
    }
}

/// Builder helpers for readable construction of linear forms; the argument
/// is the coefficient in the canonical unit.
pub fn lin(terms: &[(&str, Rat)]) -> LinForm {
    let mut l = LinForm::zero();
    for (name, c) in terms {
        match POS_NAMES.iter().position(|n| n == name) {
            Some(i) => l.pos[i] += *c,
            None => match MOM_NAMES.iter().position(|n| n == name) {
                Some(i) => l.mom[i] += *c,
                None => match NU_NAMES.iter().position(|n| n == name) {
                    Some(k) => l.nu[k] += *c,
                    None => panic!("unknown symbol {name}"),
                },
            },
        }
    }
    l
}

/// Exponential monomial: phase * e^{L}.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExpMonomial {
    pub phase: PhaseScalar,
    pub lin: LinForm,
}

impl fmt::Debug for ExpMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}

impl ExpMonomial {
    pub fn new(phase: PhaseScalar, lin: LinForm) -> Self {
        ExpMonomial { phase, lin }
    }

    pub fn from_lin(lin: LinForm) -> Self {
        ExpMonomial {
            phase: PhaseScalar::one(),
            lin,
        }
    }

    pub fn unit() -> Self {
        ExpMonomial {
            phase: PhaseScalar::one(),
            lin: LinForm::zero(),
        }
    }

    pub fn is_unit(&self) -> bool {
        self.phase.is_one() && self.lin.is_zero()
    }

    /// Positive-type: trivial phase (set by the representation formulas).
    pub fn is_positive_type(&self) -> bool {
        self.phase.is_one()
    }

    /// Fold a product of exponential factors written left to right, with an
    /// overall q^{r} prefactor, into a single monomial (exact BCH).
    pub fn from_factored(q_pow: Rat, parts: &[LinForm]) -> Self {
        let mut m = ExpMonomial::new(PhaseScalar::q_pow(q_pow), LinForm::zero());
        for p in parts {
            m = m.mul(&ExpMonomial::from_lin(p.clone()));
        }
        m
    }

    /// e^{A} e^{B} = e^{[A,B]/2} e^{A+B}: phases multiply with q^{sigma/2}.
    pub fn mul(&self, o: &ExpMonomial) -> ExpMonomial {
        let sigma = self.lin.symplectic(&o.lin);
        let bch = PhaseScalar::q_pow(sigma / rat(2, 1));
        ExpMonomial {
            phase: self.phase.mul(&o.phase).mul(&bch),
            lin: self.lin.add(&o.lin),
        }
    }

    pub fn inv(&self) -> ExpMonomial {
        ExpMonomial {
            phase: self.phase.inv(),
            lin: self.lin.neg(),
        }
    }

    /// Hermitian adjoint: conjugate phase, same (formally self-adjoint) form.
    pub fn adjoint(&self) -> ExpMonomial {
        ExpMonomial {
            phase: self.phase.conj(),
            lin: self.lin.clone(),
        }
    }

    /// phi with a b = phi (b a); always exists since the commutator is
    /// central: phi = q^{sigma(a, b)}.
    pub fn qcommute(&self, o: &ExpMonomial) -> PhaseScalar {
        PhaseScalar::q_pow(self.lin.symplectic(&o.lin))
    }

    pub fn scale_phase(&self, p: &PhaseScalar) -> ExpMonomial {
        ExpMonomial {
            phase: self.phase.mul(p),
            lin: self.lin.clone(),
        }
    }

    pub fn permuted(&self, p: Transposition) -> ExpMonomial {
        ExpMonomial {
            phase: self.phase.clone(),
            lin: self.lin.permuted(p),
        }
    }

    pub fn render(&self) -> String {
        let e = format!("exp({})", self.lin.render());
        if self.phase.is_one() {
            e
        } else if self.phase.c0.is_zero() && self.phase.cm2.is_zero() {
            format!("q^{{{}}} * {}", self.phase.c2, e)
        } else {
            format!(
                "ph[{},{},{}] * {}",
                self.phase.c0, self.phase.c2, self.phase.cm2, e
            )
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        parse_monomial(s)
    }
}

/// Variable transpositions used by the intertwiner words.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash)]
pub enum Transposition {
    UV,
    VW,
    UW,
}

impl Transposition {
    pub fn indices(self) -> (usize, usize) {
        match self {
            Transposition::UV => (0, 1),
            Transposition::VW => (1, 2),
            Transposition::UW => (0, 2),
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "(uv)" | "uv" => Ok(Transposition::UV),
            "(vw)" | "vw" => Ok(Transposition::VW),
            "(uw)" | "uw" => Ok(Transposition::UW),
            other => Err(Error::FixtureParse(format!("unknown transposition {other}"))),
        }
    }

    pub fn render(self) -> &'static str {
        match self {
            Transposition::UV => "(uv)",
            Transposition::VW => "(vw)",
            Transposition::UW => "(uw)",
        }
    }
}

// ---------------------------------------------------------------------------
// Monomial sums
// ---------------------------------------------------------------------------

/// Integer combination of phases: the coefficient ring of MonomialSum.
/// Keys are canonicalized with c0 in [0,1) by folding e^{pi i} = -1 into the
/// integer multiplicity.
#[derive(Clone, PartialEq, Eq, Default, Debug)]
pub struct PhaseCombo(pub BTreeMap<PhaseScalar, i64>);

impl PhaseCombo {
    pub fn zero() -> Self {
        PhaseCombo::default()
    }

    pub fn from_phase(p: &PhaseScalar, mult: i64) -> Self {
        let mut c = PhaseCombo::zero();
        c.add_phase(p, mult);
        c
    }

    pub fn add_phase(&mut self, p: &PhaseScalar, mult: i64) {
        let mut key = p.clone();
        let mut m = mult;
        if key.c0 >= rat(1, 1) {
            key.c0 -= rat(1, 1);
            m = -m;
        }
        let e = self.0.entry(key).or_insert(0);
        *e += m;
        if *e == 0 {
            let dead: Vec<_> = self
                .0
                .iter()
                .filter(|(_, v)| **v == 0)
                .map(|(k, _)| k.clone())
                .collect();
            for k in dead {
                self.0.remove(&k);
            }
        }
    }

    pub fn add(&mut self, o: &PhaseCombo) {
        for (p, m) in &o.0 {
            self.add_phase(p, *m);
        }
    }

    pub fn mul_phase(&self, p: &PhaseScalar) -> PhaseCombo {
        let mut r = PhaseCombo::zero();
        for (k, m) in &self.0 {
            r.add_phase(&k.mul(p), *m);
        }
        r
    }

    pub fn negated(&self) -> PhaseCombo {
        PhaseCombo(self.0.iter().map(|(k, m)| (k.clone(), -m)).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }
}

/// Sum of exponential monomials with PhaseCombo coefficients, in canonical
/// order (BTreeMap keyed by the linear form).
#[derive(Clone, PartialEq, Eq, Default, Debug)]
pub struct MonomialSum {
    pub terms: BTreeMap<LinForm, PhaseCombo>,
}

impl MonomialSum {
    pub fn zero() -> Self {
        MonomialSum::default()
    }

    pub fn unit() -> Self {
        MonomialSum::from_monomial(&ExpMonomial::unit())
    }

    pub fn from_monomial(m: &ExpMonomial) -> Self {
        let mut s = MonomialSum::zero();
        s.add_monomial(m, 1);
        s
    }

    pub fn from_monomials(ms: &[ExpMonomial]) -> Self {
        let mut s = MonomialSum::zero();
        for m in ms {
            s.add_monomial(m, 1);
        }
        s
    }

    pub fn add_monomial(&mut self, m: &ExpMonomial, mult: i64) {
        let entry = self.terms.entry(m.lin.clone()).or_default();
        entry.add_phase(&m.phase, mult);
        if entry.is_zero() {
            self.terms.remove(&m.lin);
        }
    }

    pub fn add(&self, o: &MonomialSum) -> MonomialSum {
        let mut r = self.clone();
        for (l, c) in &o.terms {
            let e = r.terms.entry(l.clone()).or_default();
            e.add(c);
            if e.is_zero() {
                r.terms.remove(l);
            }
        }
        r
    }

    pub fn negated(&self) -> MonomialSum {
        MonomialSum {
            terms: self
                .terms
                .iter()
                .map(|(l, c)| (l.clone(), c.negated()))
                .collect(),
        }
    }

    pub fn sub(&self, o: &MonomialSum) -> MonomialSum {
        self.add(&o.negated())
    }

    pub fn scale_phase(&self, p: &PhaseScalar) -> MonomialSum {
        MonomialSum {
            terms: self
                .terms
                .iter()
                .map(|(l, c)| (l.clone(), c.mul_phase(p)))
                .collect(),
        }
    }

    /// Distributed product with exact BCH phases, like terms combined.
    pub fn mul(&self, o: &MonomialSum) -> MonomialSum {
        let mut r = MonomialSum::zero();
        for (l1, c1) in &self.terms {
            for (l2, c2) in &o.terms {
                let sigma = l1.symplectic(l2);
                let bch = PhaseScalar::q_pow(sigma / rat(2, 1));
                let lin = l1.add(l2);
                for (p1, m1) in &c1.0 {
                    for (p2, m2) in &c2.0 {
                        let phase = p1.mul(p2).mul(&bch);
                        let entry = r.terms.entry(lin.clone()).or_default();
                        entry.add_phase(&phase, m1 * m2);
                    }
                }
            }
        }
        r.terms.retain(|_, c| !c.is_zero());
        r
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    /// Commutator [A, B] = AB - BA.
    pub fn commutator(&self, o: &MonomialSum) -> MonomialSum {
        self.mul(o).sub(&o.mul(self))
    }

    pub fn render(&self) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut parts = Vec::new();
        for (l, c) in &self.terms {
            for (p, m) in &c.0 {
                let mono = ExpMonomial::new(p.clone(), l.clone());
                parts.push(format!("{m:+} {}", mono.render()));
            }
        }
        parts.join("  ")
    }
}

// ---------------------------------------------------------------------------
// Quadratic exponentials
// ---------------------------------------------------------------------------

/// Exponential of a quadratic (plus linear-central) expression:
///
///   e^{ pi i x^T XX x  +  sum XD_ij x_i d_j  +  (-i/4pi) d^T DD d
///       + pi i sum NUX_ki nu_k x_i + sum NUD_kj nu_k d_j + CONST }
///
/// times a PhaseScalar. XX and DD are symmetric. The adjoint action on
/// linear forms must be nilpotent; this is checked on construction.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct QuadExp {
    pub xx: [[Rat; 3]; 3],
    pub xd: [[Rat; 3]; 3],
    pub dd: [[Rat; 3]; 3],
    pub nux: [[Rat; 3]; 2],
    pub nud: [[Rat; 3]; 2],
    pub const_real: Rat,
    pub phase: PhaseScalar,
}

impl Default for QuadExp {
    fn default() -> Self {
        QuadExp {
            xx: Default::default(),
            xd: Default::default(),
            dd: Default::default(),
            nux: Default::default(),
            nud: Default::default(),
            const_real: Rat::zero(),
            phase: PhaseScalar::one(),
        }
    }
}

impl QuadExp {
    pub fn identity() -> Self {
        QuadExp::default()
    }

    /// Checked constructor: rejects quadratics whose adjoint action on the
    /// linear forms fails to terminate (e.g. mixed xx+dd rotations).
    pub fn checked(self) -> Result<Self> {
        // probe every basis generator
        for i in 0..3 {
            let mut probe = LinForm::zero();
            probe.pos[i] = rat(1, 1);
            self.exp_ad(&probe)?;
            let mut probe = LinForm::zero();
            probe.mom[i] = rat(1, 1);
            self.exp_ad(&probe)?;
        }
        Ok(self)
    }

    /// Shift-type quad e^{c * x_a d_b} (a != b).
    pub fn shift(a: usize, b: usize, c: Rat) -> Self {
        assert_ne!(a, b, "diagonal x d dilations not supported");
        let mut q = QuadExp::default();
        q.xd[a][b] = c;
        q
    }

    /// e^{pi i c x_a^2} (c rational; e^{-pi i u^2/2} has c = -1/2).
    pub fn gaussian_x(a: usize, c: Rat) -> Self {
        let mut q = QuadExp::default();
        q.xx[a][a] = c;
        q
    }

    /// e^{pi i c nu_k x_a}.
    pub fn nu_x(k: usize, a: usize, c: Rat) -> Self {
        let mut q = QuadExp::default();
        q.nux[k][a] = c;
        q
    }

    /// e^{c nu_k d_a}.
    pub fn nu_shift(k: usize, a: usize, c: Rat) -> Self {
        let mut q = QuadExp::default();
        q.nud[k][a] = c;
        q
    }

    /// The inversion quad e^{eps * pi i L^2 / (4 pi^2 b^2)} for a nu-free
    /// self-adjoint linear form L = pi b p + i b d, normal-ordered exactly:
    ///
    ///   eps [ pi i (p p)/4 - (p d)/2 x-before-d - i/(4 pi) (d d)
    ///         - (p . d)/4 ]
    pub fn inversion_square(l: &LinForm, eps: i64) -> Result<Self> {
        if l.nu.iter().any(|c| !c.is_zero()) {
            return Err(Error::InvalidParameter(
                "inversion quad requires a nu-free linear form".into(),
            ));
        }
        let e = rat(eps, 1);
        let mut q = QuadExp::default();
        let quarter = rat(1, 4);
        let half = rat(1, 2);
        let mut trace = Rat::zero();
        for i in 0..3 {
            for j in 0..3 {
                q.xx[i][j] = e * quarter * l.pos[i] * l.pos[j];
                q.xd[i][j] = -e * half * l.pos[i] * l.mom[j];
                q.dd[i][j] = e * l.mom[i] * l.mom[j];
            }
            trace += l.pos[i] * l.mom[i];
        }
        q.const_real = -e * quarter * trace;
        q.checked()
    }

    pub fn is_identity(&self) -> bool {
        *self == QuadExp::default()
    }

    pub fn negated_exponent(&self) -> QuadExp {
        let negm = |m: &[[Rat; 3]; 3]| {
            let mut r = *m;
            for row in r.iter_mut() {
                for c in row.iter_mut() {
                    *c = -*c;
                }
            }
            r
        };
        let negn = |m: &[[Rat; 3]; 2]| {
            let mut r = *m;
            for row in r.iter_mut() {
                for c in row.iter_mut() {
                    *c = -*c;
                }
            }
            r
        };
        QuadExp {
            xx: negm(&self.xx),
            xd: negm(&self.xd),
            dd: negm(&self.dd),
            nux: negn(&self.nux),
            nud: negn(&self.nud),
            const_real: -self.const_real,
            phase: self.phase.inv(),
        }
    }

    /// Hermitian adjoint. All quadratic units are anti-self-adjoint except
    /// for the diagonal x_i d_i reordering constant.
    pub fn adjoint(&self) -> QuadExp {
        let mut r = self.negated_exponent();
        r.phase = self.phase.conj();
        let mut trace = Rat::zero();
        for i in 0..3 {
            trace += self.xd[i][i];
        }
        r.const_real = self.const_real - trace;
        r
    }

    /// One adjoint step [Q, L] (a linear form again).
    fn ad(&self, l: &LinForm) -> LinForm {
        let mut r = LinForm::zero();
        for i in 0..3 {
            // xx against momenta: pos_i += 2 sum_j XX_ij mom_j
            let mut acc = Rat::zero();
            for j in 0..3 {
                acc += self.xx[i][j] * l.mom[j];
            }
            r.pos[i] += rat(2, 1) * acc;
            // xd against positions: pos_i += sum_j XD_ij pos_j
            let mut acc = Rat::zero();
            for j in 0..3 {
                acc += self.xd[i][j] * l.pos[j];
            }
            r.pos[i] += acc;
        }
        for j in 0..3 {
            // xd against momenta: mom_j -= sum_i XD_ij mom_i
            let mut acc = Rat::zero();
            for i in 0..3 {
                acc += self.xd[i][j] * l.mom[i];
            }
            r.mom[j] -= acc;
            // dd against positions: mom_j -= (1/2) sum_m DD_mj pos_m
            let mut acc = Rat::zero();
            for m in 0..3 {
                acc += self.dd[m][j] * l.pos[m];
            }
            r.mom[j] -= acc / rat(2, 1);
        }
        for k in 0..2 {
            // nux against momenta, nud against positions
            let mut acc = Rat::zero();
            for i in 0..3 {
                acc += self.nux[k][i] * l.mom[i];
                acc += self.nud[k][i] * l.pos[i];
            }
            r.nu[k] += acc;
        }
        r
    }

    /// exp(ad_Q)(L), exact; errors if the series does not terminate.
    pub fn exp_ad(&self, l: &LinForm) -> Result<LinForm> {
        let mut total = l.clone();
        let mut cur = l.clone();
        let mut factorial = 1i64;
        for depth in 1..=8 {
            cur = self.ad(&cur);
            if cur.is_zero() {
                return Ok(total);
            }
            factorial *= depth;
            total = total.add(&cur.scale(rat(1, factorial)));
        }
        Err(Error::NonNilpotent)
    }

    /// Conjugate a monomial: e^{Q} m e^{-Q} = phase * e^{exp(ad_Q) L}.
    pub fn conj_monomial(&self, m: &ExpMonomial) -> Result<ExpMonomial> {
        Ok(ExpMonomial {
            phase: m.phase.clone(),
            lin: self.exp_ad(&m.lin)?,
        })
    }

    pub fn permuted(&self, p: Transposition) -> QuadExp {
        let (a, b) = p.indices();
        let permm = |m: &[[Rat; 3]; 3]| {
            let mut r = *m;
            r.swap(a, b);
            for row in r.iter_mut() {
                row.swap(a, b);
            }
            r
        };
        let permn = |m: &[[Rat; 3]; 2]| {
            let mut r = *m;
            for row in r.iter_mut() {
                row.swap(a, b);
            }
            r
        };
        QuadExp {
            xx: permm(&self.xx),
            xd: permm(&self.xd),
            dd: permm(&self.dd),
            nux: permn(&self.nux),
            nud: permn(&self.nud),
            const_real: self.const_real,
            phase: self.phase.clone(),
        }
    }

    /// Merge with another quad under the assumption that the exponents
    /// commute; verified by checking that the combined ad action equals the
    /// sum of the individual ones on all basis generators.
    pub fn merge_commuting(&self, o: &QuadExp) -> Result<QuadExp> {
        let sum = QuadExp {
            xx: add_m(&self.xx, &o.xx),
            xd: add_m(&self.xd, &o.xd),
            dd: add_m(&self.dd, &o.dd),
            nux: add_n(&self.nux, &o.nux),
            nud: add_n(&self.nud, &o.nud),
            const_real: self.const_real + o.const_real,
            phase: self.phase.mul(&o.phase),
        };
        // commutation check: ad_a ad_b == ad_b ad_a on basis generators
        for i in 0..6 {
            let mut probe = LinForm::zero();
            if i < 3 {
                probe.pos[i] = rat(1, 1);
            } else {
                probe.mom[i - 3] = rat(1, 1);
            }
            let ab = self.ad(&o.ad(&probe));
            let ba = o.ad(&self.ad(&probe));
            if ab != ba {
                return Err(Error::SideCondition(
                    "quadratic exponents do not commute".into(),
                ));
            }
        }
        sum.checked()
    }
}

fn add_m(a: &[[Rat; 3]; 3], b: &[[Rat; 3]; 3]) -> [[Rat; 3]; 3] {
    let mut r = *a;
    for i in 0..3 {
        for j in 0..3 {
            r[i][j] += b[i][j];
        }
    }
    r
}

fn add_n(a: &[[Rat; 3]; 2], b: &[[Rat; 3]; 2]) -> [[Rat; 3]; 2] {
    let mut r = *a;
    for i in 0..2 {
        for j in 0..3 {
            r[i][j] += b[i][j];
        }
    }
    r
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

pub fn parse_rat(s: &str) -> Result<Rat> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: i64 = num
        .parse()
        .map_err(|_| Error::FixtureParse(format!("bad rational {s}")))?;
    let d: i64 = den
        .parse()
        .map_err(|_| Error::FixtureParse(format!("bad rational {s}")))?;
    if d == 0 {
        return Err(Error::FixtureParse(format!("zero denominator in {s}")));
    }
    Ok(rat(n, d))
}

fn parse_linform(s: &str) -> Result<LinForm> {
    let s = s.trim();
    let mut l = LinForm::zero();
    if s == "0" || s.is_empty() {
        return Ok(l);
    }
    // split on + and - keeping signs
    let normalized = s.replace(" - ", " + -").replace("- ", "-");
    for part in normalized.split('+') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let (coeff, sym) = match part.split_once('*') {
            Some((c, sym)) => (parse_rat(c)?, sym.trim()),
            None => {
                // bare symbol or -symbol
                if let Some(stripped) = part.strip_prefix('-') {
                    (rat(-1, 1), stripped.trim())
                } else {
                    (rat(1, 1), part)
                }
            }
        };
        let mut found = false;
        for (i, n) in POS_NAMES.iter().enumerate() {
            if sym == *n {
                l.pos[i] += coeff;
                found = true;
            }
        }
        for (i, n) in MOM_NAMES.iter().enumerate() {
            if sym == *n {
                l.mom[i] += coeff;
                found = true;
            }
        }
        for (k, n) in NU_NAMES.iter().enumerate() {
            if sym == *n {
                l.nu[k] += coeff;
                found = true;
            }
        }
        if !found {
            return Err(Error::FixtureParse(format!("unknown symbol in term {part}")));
        }
    }
    Ok(l)
}

pub fn parse_monomial(s: &str) -> Result<ExpMonomial> {
    let s = s.trim();
    let (phase, rest) = if let Some(r) = s.strip_prefix("q^{") {
        let (pw, rest) = r
            .split_once('}')
            .ok_or_else(|| Error::FixtureParse(format!("unterminated q power in {s}")))?;
        let rest = rest
            .trim()
            .strip_prefix('*')
            .ok_or_else(|| Error::FixtureParse(format!("missing * after q power in {s}")))?;
        (PhaseScalar::q_pow(parse_rat(pw)?), rest.trim())
    } else if let Some(r) = s.strip_prefix("ph[") {
        let (ph, rest) = r
            .split_once(']')
            .ok_or_else(|| Error::FixtureParse(format!("unterminated phase in {s}")))?;
        let cs: Vec<&str> = ph.split(',').collect();
        if cs.len() != 3 {
            return Err(Error::FixtureParse(format!("phase needs 3 entries: {s}")));
        }
        let rest = rest
            .trim()
            .strip_prefix('*')
            .ok_or_else(|| Error::FixtureParse(format!("missing * after phase in {s}")))?;
        (
            PhaseScalar::new(parse_rat(cs[0])?, parse_rat(cs[1])?, parse_rat(cs[2])?),
            rest.trim(),
        )
    } else {
        (PhaseScalar::one(), s)
    };
    let inner = rest
        .strip_prefix("exp(")
        .and_then(|r| r.strip_suffix(')'))
        .ok_or_else(|| Error::FixtureParse(format!("expected exp(...) in {s}")))?;
    Ok(ExpMonomial::new(phase, parse_linform(inner)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn q2() -> PhaseScalar {
        PhaseScalar::q_pow(rat(2, 1))
    }

    // Lemma 4.1, E1 factors: U = e^{pi b w - i b Dw}, V = e^{-pi b w - i b Dw}
    #[test]
    fn e1_factors_q_commute() {
        let u = ExpMonomial::from_lin(lin(&[("w", rat(1, 1)), ("Dw", rat(-1, 1))]));
        let v = ExpMonomial::from_lin(lin(&[("w", rat(-1, 1)), ("Dw", rat(-1, 1))]));
        assert_eq!(u.qcommute(&v), q2());
        // and UV = q^2 VU as full monomials
        let uv = u.mul(&v);
        let vu = v.mul(&u).scale_phase(&q2());
        assert_eq!(uv, vu);
    }

    #[test]
    fn qcommute_of_equal_monomials_is_one() {
        let a = ExpMonomial::from_lin(lin(&[("u", rat(3, 2)), ("Dv", rat(1, 1))]));
        assert!(a.qcommute(&a).is_one());
    }

    #[test]
    fn lemma31_qu_inv_v_is_positive_monomial() {
        // sl2 E case: U = e^{pi b nu + pi b u - i b Du}, V = e^{-...-i b Du};
        // q U^-1 V must come out phase-free as e^{-2pi b nu - 2pi b u}.
        let u = ExpMonomial::from_lin(lin(&[
            ("n1", rat(1, 1)),
            ("u", rat(1, 1)),
            ("Du", rat(-1, 1)),
        ]));
        let v = ExpMonomial::from_lin(lin(&[
            ("n1", rat(-1, 1)),
            ("u", rat(-1, 1)),
            ("Du", rat(-1, 1)),
        ]));
        let m = u.inv().mul(&v).scale_phase(&PhaseScalar::q_pow(rat(1, 1)));
        assert_eq!(
            m,
            ExpMonomial::from_lin(lin(&[("n1", rat(-2, 1)), ("u", rat(-2, 1))]))
        );
        assert!(m.is_positive_type());
    }

    #[test]
    fn lemma41_e2_qu1_inv_u2() {
        // q U1^-1 U2 = e^{pi b u - pi b v + pi b w - i b Du + i b Dw}
        let u1 = ExpMonomial::from_lin(lin(&[
            ("v", rat(1, 1)),
            ("w", rat(-1, 1)),
            ("Dv", rat(-1, 1)),
        ]));
        let u2 = ExpMonomial::from_lin(lin(&[
            ("u", rat(1, 1)),
            ("Du", rat(-1, 1)),
            ("Dv", rat(-1, 1)),
            ("Dw", rat(1, 1)),
        ]));
        let m = u1.inv().mul(&u2).scale_phase(&PhaseScalar::q_pow(rat(1, 1)));
        let expect = ExpMonomial::from_lin(lin(&[
            ("u", rat(1, 1)),
            ("v", rat(-1, 1)),
            ("w", rat(1, 1)),
            ("Du", rat(-1, 1)),
            ("Dw", rat(1, 1)),
        ]));
        assert_eq!(m, expect);
    }

    #[test]
    fn inverse_examples() {
        let a = ExpMonomial::from_lin(lin(&[("u", rat(1, 1))]));
        assert_eq!(a.inv(), ExpMonomial::from_lin(lin(&[("u", rat(-1, 1))])));
        let b = ExpMonomial::new(
            PhaseScalar::q_pow(rat(1, 2)),
            lin(&[("v", rat(2, 1)), ("Du", rat(1, 1))]),
        );
        assert_eq!(b.inv().phase, PhaseScalar::q_pow(rat(-1, 2)));
        assert!(a.mul(&a.inv()).is_unit());
        assert!(b.mul(&b.inv()).is_unit());
    }

    fn random_monomial(rng: &mut ChaCha8Rng) -> ExpMonomial {
        let mut l = LinForm::zero();
        for i in 0..3 {
            l.pos[i] = rat(rng.gen_range(-3..=3), rng.gen_range(1..=2));
            l.mom[i] = rat(rng.gen_range(-3..=3), rng.gen_range(1..=2));
        }
        for k in 0..2 {
            l.nu[k] = rat(rng.gen_range(-2..=2), 1);
        }
        ExpMonomial::new(
            PhaseScalar::new(
                rat(rng.gen_range(-2..=2), 2),
                rat(rng.gen_range(-4..=4), 2),
                rat(rng.gen_range(-2..=2), 2),
            ),
            l,
        )
    }

    #[test]
    fn double_inverse_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let m = random_monomial(&mut rng);
            assert_eq!(m.inv().inv(), m);
        }
    }

    #[test]
    fn associativity_on_random_triples() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let a = random_monomial(&mut rng);
            let b = random_monomial(&mut rng);
            let c = random_monomial(&mut rng);
            assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
        }
    }

    #[test]
    fn qcommute_relates_both_orders() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..50 {
            let a = random_monomial(&mut rng);
            let b = random_monomial(&mut rng);
            let phi = a.qcommute(&b);
            assert_eq!(a.mul(&b), b.mul(&a).scale_phase(&phi));
        }
    }

    #[test]
    fn conj_by_shift_quad_matches_paper_push() {
        // e^{-w Du} conjugation: e^{pi b u} -> e^{pi b u - pi b w}
        let q = QuadExp::shift(2, 0, rat(-1, 1));
        let m = ExpMonomial::from_lin(lin(&[("u", rat(1, 1))]));
        let out = q.conj_monomial(&m).unwrap();
        assert_eq!(
            out,
            ExpMonomial::from_lin(lin(&[("u", rat(1, 1)), ("w", rat(-1, 1))]))
        );
    }

    #[test]
    fn conj_by_identity_quad_is_identity() {
        let q = QuadExp::identity();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..10 {
            let m = random_monomial(&mut rng);
            assert_eq!(q.conj_monomial(&m).unwrap(), m);
        }
    }

    #[test]
    fn conj_by_gaussian_quad_matches_f_rule() {
        // e^{-pi i w^2/2} e^{i b Dw} e^{pi i w^2/2} = e^{i b Dw - pi b w},
        // the f(A - 2 c alpha B) rule applied once by hand.
        let q = QuadExp::gaussian_x(2, rat(-1, 2));
        let m = ExpMonomial::from_lin(lin(&[("Dw", rat(1, 1))]));
        let out = q.conj_monomial(&m).unwrap();
        assert_eq!(
            out,
            ExpMonomial::from_lin(lin(&[("Dw", rat(1, 1)), ("w", rat(-1, 1))]))
        );
    }

    #[test]
    fn perm_examples() {
        let m = ExpMonomial::from_lin(lin(&[("u", rat(1, 1))]));
        assert_eq!(
            m.permuted(Transposition::UV),
            ExpMonomial::from_lin(lin(&[("v", rat(1, 1))]))
        );
        // E2 endgame: conjugation by (uv)(vw), innermost (vw) first
        let m = ExpMonomial::from_lin(lin(&[("v", rat(-2, 1))]));
        let step1 = m.permuted(Transposition::VW);
        let step2 = step1.permuted(Transposition::UV);
        assert_eq!(step2, ExpMonomial::from_lin(lin(&[("w", rat(-2, 1))])));
    }

    #[test]
    fn perm_is_involution() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for _ in 0..10 {
            let m = random_monomial(&mut rng);
            for p in [Transposition::UV, Transposition::VW, Transposition::UW] {
                assert_eq!(m.permuted(p).permuted(p), m);
            }
        }
    }

    #[test]
    fn conj_by_quad_is_automorphism() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let quads = [
            QuadExp::shift(2, 0, rat(-1, 1)),
            QuadExp::gaussian_x(0, rat(-1, 2)),
            QuadExp::inversion_square(
                &lin(&[
                    ("u", rat(1, 1)),
                    ("v", rat(-1, 1)),
                    ("w", rat(1, 1)),
                    ("Du", rat(-1, 1)),
                    ("Dw", rat(1, 1)),
                ]),
                -1,
            )
            .unwrap(),
        ];
        for q in &quads {
            for _ in 0..10 {
                let a = random_monomial(&mut rng);
                let b = random_monomial(&mut rng);
                let lhs = q.conj_monomial(&a.mul(&b)).unwrap();
                let rhs = q.conj_monomial(&a).unwrap().mul(&q.conj_monomial(&b).unwrap());
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn inversion_quad_push_matches_prop44_args() {
        // L = pi b(u - v + w) + i b(-Du + Dw); pushing e^{-pi i L^2/(4pi^2b^2)}
        // through g_b(e^{-2 pi b w}) turns the argument into
        // e^{-pi b u + pi b v - 3 pi b w + i b Du - i b Dw}.
        let l = lin(&[
            ("u", rat(1, 1)),
            ("v", rat(-1, 1)),
            ("w", rat(1, 1)),
            ("Du", rat(-1, 1)),
            ("Dw", rat(1, 1)),
        ]);
        let q = QuadExp::inversion_square(&l, -1).unwrap();
        let arg = ExpMonomial::from_lin(lin(&[("w", rat(-2, 1))]));
        let out = q.conj_monomial(&arg).unwrap();
        let expect = ExpMonomial::from_lin(lin(&[
            ("u", rat(-1, 1)),
            ("v", rat(1, 1)),
            ("w", rat(-3, 1)),
            ("Du", rat(1, 1)),
            ("Dw", rat(-1, 1)),
        ]));
        assert_eq!(out, expect);
        // and through the slot core e^{pi b w - i b Dw}: core + L
        let core = ExpMonomial::from_lin(lin(&[("w", rat(1, 1)), ("Dw", rat(-1, 1))]));
        let out = q.conj_monomial(&core).unwrap();
        let expect = ExpMonomial::from_lin(lin(&[
            ("u", rat(1, 1)),
            ("v", rat(-1, 1)),
            ("w", rat(2, 1)),
            ("Du", rat(-1, 1)),
        ]));
        assert_eq!(out, expect);
    }

    #[test]
    fn non_nilpotent_quad_rejected() {
        // xx + dd together generate a rotation: must be refused
        let mut q = QuadExp::gaussian_x(0, rat(1, 1));
        q.dd[0][0] = rat(1, 1);
        assert!(matches!(q.checked(), Err(Error::NonNilpotent)));
    }

    #[test]
    fn monomial_sum_unit_and_cancellation() {
        let a = ExpMonomial::from_lin(lin(&[("u", rat(1, 1))]));
        let s = MonomialSum::from_monomial(&a);
        assert_eq!(s.mul(&MonomialSum::unit()), s);
        assert!(s.sub(&s).is_zero());
    }

    #[test]
    fn serialization_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for _ in 0..40 {
            let m = random_monomial(&mut rng);
            let s = m.render();
            let back = ExpMonomial::parse(&s).unwrap();
            assert_eq!(m, back, "roundtrip failed for {s}");
        }
        // the documented spellings
        let m = ExpMonomial::parse("q^{2} * exp(1*u - 1*Dv)").unwrap();
        assert_eq!(m.phase, PhaseScalar::q_pow(rat(2, 1)));
        let m = ExpMonomial::parse("exp(-2*n1 + 1/2*w)").unwrap();
        assert!(m.phase.is_one());
        assert_eq!(m.lin.nu[0], rat(-2, 1));
    }
}
