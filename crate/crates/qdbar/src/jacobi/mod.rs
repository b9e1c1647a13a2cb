//! Jacobi-type difference operators on weighted ℓ² spaces.
//!
//! For weights `a`, `a′` and coefficients `0 < |c_n| ≤ 1`
//!
//! ```text
//! (A f)_n = a_n  (f_n − c_{n−1} f_{n−1})      dom ⊂ ℓ²_{a′} → ℓ²_a
//! (Ā f)_n = a′_n (f_n − c̄_n f_{n+1})          dom ⊂ ℓ²_a  → ℓ²_{a′}
//! ```
//!
//! with `‖f‖²_a = Σ |f_n|²/a_n`.
//!
//! # Finite windows
//!
//! Every vector lives on the window `[lo, hi]` of its [`JacobiData`]. A
//! windowed vector stands for the sequence that continues outside the window
//! as a solution of the homogeneous equation of the operator it is fed to.
//! Rows whose stencil leaves the window (row `hi` of `Ā`, row `lo` of `A`
//! on the annulus) therefore evaluate to zero. Parametrix inputs are
//! zero outside the window. Test vectors are supported away from the edges,
//! where both readings agree.
//!
//! Semi-infinite products such as `Ω⁺_n = ∏_{i≥n} c̄_i` use the exact
//! logarithmic tails carried by the data. Sums of `1/a` beyond the window
//! enter only through the certified tail bounds.

mod checks;
mod ops;

pub use checks::*;
pub use ops::*;

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::weight_model::{self, DomainKind, Enclosure, WeightError, WeightSequence};

pub type C64 = Complex64;

#[derive(Debug, Error)]
pub enum JacobiError {
    #[error("window mismatch: {0}")]
    WindowMismatch(String),
    #[error("space mismatch: expected a vector of {expected}, got {got}")]
    SpaceMismatch { expected: WeightRef, got: WeightRef },
    #[error("invalid variant: {0}")]
    InvalidVariant(String),
    #[error("not in domain: {0}")]
    NotInDomain(String),
    #[error("invalid jacobi data: {0}")]
    InvalidData(String),
    #[error(transparent)]
    Weights(#[from] WeightError),
}

/// Identifies the weight sequence defining a vector's norm.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum WeightRef {
    /// `a⁽ⁿ⁾` of Fourier mode `n`
    Mode(usize),
    Named(&'static str),
}

impl fmt::Display for WeightRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightRef::Mode(n) => write!(f, "l2 with weight a({n})"),
            WeightRef::Named(s) => write!(f, "l2 with weight {s}"),
        }
    }
}

/// A finitely supported element of a weighted ℓ² space.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeqVec {
    pub lo: i64,
    pub values: Vec<C64>,
    pub weight_ref: WeightRef,
}

impl SeqVec {
    pub fn zeros(lo: i64, len: usize, weight_ref: WeightRef) -> Self {
        Self {
            lo,
            values: vec![C64::new(0.0, 0.0); len],
            weight_ref,
        }
    }
    pub fn from_fn(
        lo: i64,
        len: usize,
        weight_ref: WeightRef,
        mut f: impl FnMut(i64) -> C64,
    ) -> Self {
        Self {
            lo,
            values: (0..len).map(|i| f(lo + i as i64)).collect(),
            weight_ref,
        }
    }
    pub fn delta(lo: i64, len: usize, weight_ref: WeightRef, at: i64, value: C64) -> Self {
        let mut v = Self::zeros(lo, len, weight_ref);
        v.set(at, value);
        v
    }
    pub fn len(&self) -> usize {
        self.values.len()
    }
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
    pub fn hi(&self) -> i64 {
        self.lo + self.values.len() as i64 - 1
    }
    /// Zero outside the window.
    pub fn get(&self, k: i64) -> C64 {
        if k < self.lo || k > self.hi() {
            C64::new(0.0, 0.0)
        } else {
            self.values[(k - self.lo) as usize]
        }
    }
    pub fn set(&mut self, k: i64, v: C64) {
        let i = (k - self.lo) as usize;
        self.values[i] = v;
    }
    pub fn scaled(&self, s: C64) -> Self {
        Self {
            lo: self.lo,
            values: self.values.iter().map(|v| v * s).collect(),
            weight_ref: self.weight_ref,
        }
    }
    /// `self + s·other`; windows and spaces must agree.
    pub fn axpy(&self, s: C64, other: &SeqVec) -> Self {
        debug_assert_eq!(self.lo, other.lo);
        debug_assert_eq!(self.len(), other.len());
        Self {
            lo: self.lo,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(x, y)| x + s * y)
                .collect(),
            weight_ref: self.weight_ref,
        }
    }
    pub fn sub(&self, other: &SeqVec) -> Self {
        self.axpy(C64::new(-1.0, 0.0), other)
    }
    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
    /// Copy onto another window; entries outside the old window are zero.
    pub fn rewindow(&self, lo: i64, len: usize) -> Self {
        Self::from_fn(lo, len, self.weight_ref, |k| self.get(k))
    }
    pub fn with_ref(mut self, r: WeightRef) -> Self {
        self.weight_ref = r;
        self
    }
}

/// Weighted inner product `Σ conj(x_k) y_k / w_k` over the common window.
pub fn weighted_inner(x: &SeqVec, y: &SeqVec, w: &[f64]) -> C64 {
    x.values
        .iter()
        .zip(&y.values)
        .zip(w)
        .map(|((a, b), wk)| a.conj() * b / wk)
        .sum()
}

pub fn weighted_norm_sq(x: &SeqVec, w: &[f64]) -> f64 {
    x.values
        .iter()
        .zip(w)
        .map(|(a, wk)| a.norm_sqr() / wk)
        .sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Op {
    A,
    Abar,
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Op::A => write!(f, "A"),
            Op::Abar => write!(f, "Abar"),
        }
    }
}

/// Vanishing conditions imposed at infinity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryVariant {
    Full,
    /// `f_{+∞} = 0`
    ZeroPlus,
    /// `f_{−∞} = 0`, annulus only
    ZeroMinus,
    /// both limits vanish, annulus only
    ZeroBoth,
}

impl BoundaryVariant {
    pub fn vanishes_plus(self) -> bool {
        matches!(self, BoundaryVariant::ZeroPlus | BoundaryVariant::ZeroBoth)
    }
    pub fn vanishes_minus(self) -> bool {
        matches!(self, BoundaryVariant::ZeroMinus | BoundaryVariant::ZeroBoth)
    }
    pub fn from_conditions(plus: bool, minus: bool) -> Self {
        match (plus, minus) {
            (false, false) => BoundaryVariant::Full,
            (true, false) => BoundaryVariant::ZeroPlus,
            (false, true) => BoundaryVariant::ZeroMinus,
            (true, true) => BoundaryVariant::ZeroBoth,
        }
    }
    /// Subscript used in the operator names `A₀, A₁, A₂`.
    pub fn subscript(self) -> &'static str {
        match self {
            BoundaryVariant::Full => "",
            BoundaryVariant::ZeroPlus => "0",
            BoundaryVariant::ZeroMinus => "1",
            BoundaryVariant::ZeroBoth => "2",
        }
    }
    pub fn check(self, domain: DomainKind) -> Result<(), JacobiError> {
        if domain == DomainKind::Disk && self.vanishes_minus() {
            return Err(JacobiError::InvalidVariant(format!(
                "{self:?} needs the bilateral index set"
            )));
        }
        Ok(())
    }
    pub const ALL: [BoundaryVariant; 4] = [
        BoundaryVariant::Full,
        BoundaryVariant::ZeroPlus,
        BoundaryVariant::ZeroMinus,
        BoundaryVariant::ZeroBoth,
    ];
    pub fn all_for(domain: DomainKind) -> &'static [BoundaryVariant] {
        match domain {
            DomainKind::Disk => &Self::ALL[..2],
            DomainKind::Annulus => &Self::ALL,
        }
    }
}

/// Operator name such as `Abar_0`.
pub fn variant_name(op: Op, v: BoundaryVariant) -> String {
    match v {
        BoundaryVariant::Full => op.to_string(),
        _ => format!("{op}_{}", v.subscript()),
    }
}

/// Explicit parametrices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Parametrix {
    T,
    Tbar,
    T0,
    T1,
    T2,
    Tbar0,
    Tbar1,
    Tbar2,
}

impl Parametrix {
    /// The parametrix of `op` with vanishing conditions `v`.
    pub fn of(op: Op, v: BoundaryVariant) -> Self {
        use BoundaryVariant::*;
        match (op, v) {
            (Op::A, Full) => Parametrix::T,
            (Op::A, ZeroPlus) => Parametrix::T0,
            (Op::A, ZeroMinus) => Parametrix::T1,
            (Op::A, ZeroBoth) => Parametrix::T2,
            (Op::Abar, Full) => Parametrix::Tbar,
            (Op::Abar, ZeroPlus) => Parametrix::Tbar0,
            (Op::Abar, ZeroMinus) => Parametrix::Tbar1,
            (Op::Abar, ZeroBoth) => Parametrix::Tbar2,
        }
    }
    pub fn operator(self) -> (Op, BoundaryVariant) {
        use BoundaryVariant::*;
        match self {
            Parametrix::T => (Op::A, Full),
            Parametrix::T0 => (Op::A, ZeroPlus),
            Parametrix::T1 => (Op::A, ZeroMinus),
            Parametrix::T2 => (Op::A, ZeroBoth),
            Parametrix::Tbar => (Op::Abar, Full),
            Parametrix::Tbar0 => (Op::Abar, ZeroPlus),
            Parametrix::Tbar1 => (Op::Abar, ZeroMinus),
            Parametrix::Tbar2 => (Op::Abar, ZeroBoth),
        }
    }
    pub const ALL: [Parametrix; 8] = [
        Parametrix::T,
        Parametrix::Tbar,
        Parametrix::T0,
        Parametrix::T1,
        Parametrix::T2,
        Parametrix::Tbar0,
        Parametrix::Tbar1,
        Parametrix::Tbar2,
    ];
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Functional {
    L,
    Alpha,
    Beta,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum End {
    Plus,
    Minus,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum KernelSide {
    /// `Ω⁺_n = ∏_{i≥n} c̄_i`, kernel of `Ā` on ℤ
    OmegaPlus,
    /// `Ω⁻_n = ∏_{i<n} c_i`, kernel of `A` on ℤ
    OmegaMinus,
    /// `Ω_n = ∏_{i≥n} c̄_i`, kernel of `Ā` on ℕ
    OmegaUnilateral,
}

#[derive(Clone, Debug)]
pub struct KernelVector {
    pub omega: SeqVec,
    pub side: KernelSide,
    /// squared norm in the space of `omega`, window part plus tail
    pub norm_sq: Enclosure,
}

/// Tail bounds for `Σ 1/w` outside the window.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Tails {
    pub plus: f64,
    pub minus: f64,
}

impl Tails {
    pub fn total(&self) -> f64 {
        self.plus + self.minus
    }
}

/// Coefficients `(a, a′, c)` of one operator pair on the window `[lo, hi]`.
#[derive(Clone, Debug)]
pub struct JacobiData {
    pub domain: DomainKind,
    pub lo: i64,
    pub hi: i64,
    a: Vec<f64>,
    a_prime: Vec<f64>,
    c: Vec<C64>,
    /// `cum[i] = Σ_{j<i} log c_{lo+j}`
    cum: Vec<C64>,
    /// `Σ_{k>hi} log c_k`
    pub log_tail_plus: C64,
    /// `Σ_{k<lo} log c_k`
    pub log_tail_minus: C64,
    pub a_tails: Tails,
    pub a_prime_tails: Tails,
    pub a_ref: WeightRef,
    pub a_prime_ref: WeightRef,
}

/// Tail information for [`JacobiData::new`].
#[derive(Clone, Copy, Debug, Default)]
pub struct DataTails {
    pub log_c_plus: C64,
    pub log_c_minus: C64,
    pub a: Tails,
    pub a_prime: Tails,
}

impl JacobiData {
    /// Generic constructor. The tails describe everything outside `[lo, lo+len)`.
    pub fn new(
        domain: DomainKind,
        lo: i64,
        a: Vec<f64>,
        a_prime: Vec<f64>,
        c: Vec<C64>,
        tails: DataTails,
    ) -> Result<Self, JacobiError> {
        let n = a.len();
        if n < 2 || a_prime.len() != n || c.len() != n {
            return Err(JacobiError::InvalidData(format!(
                "need equal lengths >= 2, got a={}, a'={}, c={}",
                n,
                a_prime.len(),
                c.len()
            )));
        }
        if domain == DomainKind::Disk && lo != 0 {
            return Err(JacobiError::InvalidData("disk windows start at 0".into()));
        }
        if let Some(k) = a
            .iter()
            .chain(&a_prime)
            .position(|x| !(x.is_finite() && *x > 0.0))
        {
            return Err(JacobiError::InvalidData(format!(
                "weights must be positive (entry {k})"
            )));
        }
        if let Some(k) = c
            .iter()
            .position(|x| !(x.norm() > 0.0 && x.norm() <= 1.0 + 1e-15))
        {
            return Err(JacobiError::InvalidData(format!(
                "need 0 < |c| <= 1 (k = {})",
                lo + k as i64
            )));
        }
        let mut cum = Vec::with_capacity(n + 1);
        let mut acc = C64::new(0.0, 0.0);
        cum.push(acc);
        for ck in &c {
            acc += ck.ln();
            cum.push(acc);
        }
        Ok(Self {
            domain,
            lo,
            hi: lo + n as i64 - 1,
            a,
            a_prime,
            c,
            cum,
            log_tail_plus: tails.log_c_plus,
            log_tail_minus: if domain == DomainKind::Disk {
                C64::new(0.0, 0.0)
            } else {
                tails.log_c_minus
            },
            a_tails: tails.a,
            a_prime_tails: tails.a_prime,
            a_ref: WeightRef::Named("a"),
            a_prime_ref: WeightRef::Named("a'"),
        })
    }

    /// Data of Fourier mode `n`: `(a⁽ⁿ⁾, a⁽ⁿ⁺¹⁾, c⁽ⁿ⁾)` on the largest window.
    pub fn for_mode(ws: &WeightSequence, n: usize) -> Result<Self, JacobiError> {
        let top = ws.hi - n as i64 - 1;
        Self::for_mode_on(ws, n, ws.lo, top)
    }

    /// Mode `n` data restricted to `[lo, hi]`.
    pub fn for_mode_on(
        ws: &WeightSequence,
        n: usize,
        lo: i64,
        hi: i64,
    ) -> Result<Self, JacobiError> {
        let ni = n as i64;
        if lo < ws.lo || hi > ws.hi - ni - 1 || hi - lo + 1 < 2 {
            return Err(JacobiError::Weights(WeightError::WindowTooSmall {
                n,
                lo: ws.lo,
                hi: ws.hi,
            }));
        }
        let a_of = |m: i64, k: i64| 1.0 / (ws.s(k) * ws.s(k + m)).sqrt();
        let a: Vec<f64> = (lo..=hi).map(|k| a_of(ni, k)).collect();
        let a_prime: Vec<f64> = (lo..=hi).map(|k| a_of(ni + 1, k)).collect();
        let c: Vec<C64> = (lo..=hi)
            .map(|k| C64::new(ws.ln_ratio(k, ni + 1).exp(), 0.0))
            .collect();
        let mut cum = Vec::with_capacity(c.len() + 1);
        let mut acc = 0.0;
        cum.push(C64::new(0.0, 0.0));
        for k in lo..=hi {
            acc += ws.ln_ratio(k, ni + 1);
            cum.push(C64::new(acc, 0.0));
        }
        let lower = |m: i64| -> f64 {
            if ws.domain == DomainKind::Disk {
                0.0
            } else {
                weight_model::lower_tail(ws, lo, m)
            }
        };
        Ok(Self {
            domain: ws.domain,
            lo,
            hi,
            a,
            a_prime,
            c,
            cum,
            log_tail_plus: C64::new(weight_model::ln_c_tail_plus(ws, hi, ni), 0.0),
            log_tail_minus: C64::new(weight_model::ln_c_tail_minus(ws, lo, ni), 0.0),
            a_tails: Tails {
                plus: weight_model::upper_tail(ws, hi, ni),
                minus: lower(ni),
            },
            a_prime_tails: Tails {
                plus: weight_model::upper_tail(ws, hi, ni + 1),
                minus: lower(ni + 1),
            },
            a_ref: WeightRef::Mode(n),
            a_prime_ref: WeightRef::Mode(n + 1),
        })
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }
    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }
    fn idx(&self, k: i64) -> usize {
        (k - self.lo) as usize
    }
    pub fn a(&self) -> &[f64] {
        &self.a
    }
    pub fn a_prime(&self) -> &[f64] {
        &self.a_prime
    }
    pub fn c(&self) -> &[C64] {
        &self.c
    }
    pub fn a_at(&self, k: i64) -> f64 {
        self.a[self.idx(k)]
    }
    pub fn a_prime_at(&self, k: i64) -> f64 {
        self.a_prime[self.idx(k)]
    }
    pub fn c_at(&self, k: i64) -> C64 {
        self.c[self.idx(k)]
    }

    /// `C = Σ 1/a_k`
    pub fn c_const(&self) -> Enclosure {
        Enclosure::new(self.a.iter().map(|x| 1.0 / x).sum(), self.a_tails.total())
    }
    /// `C′ = Σ 1/a′_k`
    pub fn c_prime_const(&self) -> Enclosure {
        Enclosure::new(
            self.a_prime.iter().map(|x| 1.0 / x).sum(),
            self.a_prime_tails.total(),
        )
    }
    /// `K = ∏ 1/|c_k|`, exact given the logarithmic tails.
    pub fn k_const(&self) -> f64 {
        (-self.log_c_total().re).exp()
    }
    fn log_c_total(&self) -> C64 {
        self.log_tail_minus + self.cum[self.len()] + self.log_tail_plus
    }
    /// `∏_{j=i}^{n−1} c_j` for `lo ≤ i ≤ n ≤ hi + 1`.
    pub fn prod_c(&self, i: i64, n: i64) -> C64 {
        (self.cum[self.idx(n)] - self.cum[self.idx(i)]).exp()
    }
    /// `∏_{j≥n} c_j` for `lo ≤ n ≤ hi + 1`.
    pub fn prod_c_from(&self, n: i64) -> C64 {
        (self.cum[self.len()] - self.cum[self.idx(n)] + self.log_tail_plus).exp()
    }
    /// `∏_{j<n} c_j` for `lo ≤ n ≤ hi + 1`.
    pub fn prod_c_below(&self, n: i64) -> C64 {
        (self.log_tail_minus + self.cum[self.idx(n)]).exp()
    }
    /// `∏_{j∈𝕊} c_j`
    pub fn prod_c_all(&self) -> C64 {
        self.log_c_total().exp()
    }

    /// Weights of the space a vector with this ref belongs to.
    pub fn weights_of(&self, r: WeightRef) -> Result<&[f64], JacobiError> {
        if r == self.a_ref {
            Ok(&self.a)
        } else if r == self.a_prime_ref {
            Ok(&self.a_prime)
        } else {
            Err(JacobiError::SpaceMismatch {
                expected: self.a_ref,
                got: r,
            })
        }
    }
    pub fn tails_of(&self, r: WeightRef) -> Tails {
        if r == self.a_ref {
            self.a_tails
        } else {
            self.a_prime_tails
        }
    }
    pub fn norm_sq(&self, f: &SeqVec) -> Result<f64, JacobiError> {
        self.check_window(f)?;
        Ok(weighted_norm_sq(f, self.weights_of(f.weight_ref)?))
    }
    pub fn norm(&self, f: &SeqVec) -> Result<f64, JacobiError> {
        self.norm_sq(f).map(f64::sqrt)
    }
    /// Inner product in the space shared by `f` and `g`.
    pub fn inner(&self, f: &SeqVec, g: &SeqVec) -> Result<C64, JacobiError> {
        self.check_window(f)?;
        self.check_window(g)?;
        if f.weight_ref != g.weight_ref {
            return Err(JacobiError::SpaceMismatch {
                expected: f.weight_ref,
                got: g.weight_ref,
            });
        }
        Ok(weighted_inner(f, g, self.weights_of(f.weight_ref)?))
    }

    pub(crate) fn check_window(&self, f: &SeqVec) -> Result<(), JacobiError> {
        if f.lo != self.lo || f.len() != self.len() {
            return Err(JacobiError::WindowMismatch(format!(
                "vector on [{}, {}], data on [{}, {}]",
                f.lo,
                f.hi(),
                self.lo,
                self.hi
            )));
        }
        Ok(())
    }
    pub(crate) fn check_space(&self, f: &SeqVec, expected: WeightRef) -> Result<(), JacobiError> {
        self.check_window(f)?;
        if f.weight_ref != expected {
            return Err(JacobiError::SpaceMismatch {
                expected,
                got: f.weight_ref,
            });
        }
        Ok(())
    }

    pub fn zeros(&self, r: WeightRef) -> SeqVec {
        SeqVec::zeros(self.lo, self.len(), r)
    }

    /// First-order bound on the effect of truncating `Σ 1/a`, `Σ 1/a′`
    /// on unit-normalized identity checks.
    pub fn tail_budget(&self) -> f64 {
        let k = self.k_const();
        let c = self.c_const().lo.min(self.c_prime_const().lo);
        k * k * (self.a_tails.total() + self.a_prime_tails.total()) / c
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weight_model::{eval_weights, WeightFamily};

    pub(crate) fn geo_ws(k: usize) -> WeightSequence {
        eval_weights(
            &WeightFamily::GeometricDisk {
                rho_plus: 1.0,
                q: 0.5,
            },
            DomainKind::Disk,
            k,
        )
        .unwrap()
    }
    pub(crate) fn sig_ws(k: usize) -> WeightSequence {
        eval_weights(
            &WeightFamily::SigmoidAnnulus {
                rho_minus: 1.0,
                rho_plus: 2.0,
                q: 2.0,
            },
            DomainKind::Annulus,
            k,
        )
        .unwrap()
    }

    #[test]
    fn mode_data_constants() {
        let d = JacobiData::for_mode(&geo_ws(200), 0).unwrap();
        assert!(d.c_const().contains(1.0, 1e-13));
        assert!(d.c_prime_const().contains(0.5f64.sqrt(), 1e-13));
        assert!((d.k_const() - 2f64.sqrt()).abs() < 1e-13);
        let d = JacobiData::for_mode(&sig_ws(100), 1).unwrap();
        assert!((d.k_const() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn products() {
        let d = JacobiData::for_mode(&geo_ws(40), 2).unwrap();
        let direct: C64 = (3..10).map(|k| d.c_at(k)).product();
        assert!((d.prod_c(3, 10) - direct).norm() < 1e-15);
        assert!((d.prod_c(5, 5) - 1.0).norm() == 0.0);
        assert!((d.prod_c_from(d.lo) - d.prod_c_all()).norm() < 1e-15);
    }

    #[test]
    fn rejects_bad_data() {
        let c = vec![C64::new(1.5, 0.0); 3];
        let r = JacobiData::new(
            DomainKind::Disk,
            0,
            vec![1.0; 3],
            vec![1.0; 3],
            c,
            DataTails::default(),
        );
        assert!(matches!(r, Err(JacobiError::InvalidData(_))));
        assert!(BoundaryVariant::ZeroMinus.check(DomainKind::Disk).is_err());
    }

    #[test]
    fn c_tends_to_one() {
        for ws in [geo_ws(120), sig_ws(120)] {
            let d = JacobiData::for_mode(&ws, 1).unwrap();
            // envelope: |1 − c_k| ≤ 1 − ∏_{j≥k} c_j
            for k in d.lo..=d.hi {
                let env = 1.0 - d.prod_c_from(k).re;
                assert!((1.0 - d.c_at(k).re) <= env + 1e-15);
            }
            assert!((1.0 - d.c_at(d.hi).re) < 1e-30);
        }
    }
}
