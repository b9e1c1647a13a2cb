//! APS boundary conditions, the operators `D_N`, `D_{M,N}` and their parametrices.
//!
//! Holomorphic band `m` carries boundary frequency `+m`, antiholomorphic band
//! `n` frequency `−n`. On the disk a band must vanish at `+∞` when its
//! frequency exceeds `N`. On the annulus it must also vanish at `−∞` when its
//! frequency is below `−M`. Each mode block of `D` is then one of the four
//! variants of `Ā⁽ᵐ⁾` or `A⁽ⁿ⁻¹⁾`, and the blocks move disjoint bands, so
//! kernels, cokernels and the index add up block by block.

use std::collections::HashMap;
use std::fmt;
use std::sync::Mutex;

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fourier::{FourierError, FourierSpace, HilbertElement};
use crate::jacobi::{
    adjoint_variant, power_norm, variant_dims, variant_name, weighted_inner, weighted_norm_sq,
    BoundaryVariant, End, JacobiData, JacobiError, Op, Parametrix, SeqVec, WeightRef, C64,
};
use crate::oracle::{oracle_window, variant_dims_numeric, OracleError};
use crate::weight_model::DomainKind;

const ZERO: C64 = C64::new(0.0, 0.0);

#[derive(Debug, Error)]
pub enum ApsError {
    #[error("window too small: {0}")]
    WindowTooSmall(String),
    #[error("band {band}: {source}")]
    NotInDomain { band: i64, source: JacobiError },
    #[error(transparent)]
    Fourier(#[from] FourierError),
    #[error(transparent)]
    Jacobi(#[from] JacobiError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ApsParams {
    pub domain: DomainKind,
    pub n: i64,
    /// ignored on the disk
    #[serde(default)]
    pub m: i64,
}

impl ApsParams {
    pub fn disk(n: i64) -> Self {
        Self {
            domain: DomainKind::Disk,
            n,
            m: 0,
        }
    }
    pub fn annulus(m: i64, n: i64) -> Self {
        Self {
            domain: DomainKind::Annulus,
            n,
            m,
        }
    }
    pub fn analytic_index(&self) -> i64 {
        match self.domain {
            DomainKind::Disk => self.n + 1,
            DomainKind::Annulus => self.m + self.n + 1,
        }
    }
    /// Modes from here on all use index-zero tail variants.
    pub fn cutoff(&self) -> usize {
        let m = if self.domain == DomainKind::Annulus {
            self.m.abs()
        } else {
            0
        };
        (self.n.abs().max(m) + 2) as usize
    }
}

impl fmt::Display for ApsParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.domain {
            DomainKind::Disk => write!(f, "disk N={}", self.n),
            DomainKind::Annulus => write!(f, "annulus M={} N={}", self.m, self.n),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ApsCase {
    DiskNonNegative,
    DiskNegative,
    Case1a,
    Case1b,
    Case1c,
    Case2a,
    Case2b,
    Case2c,
}

impl ApsCase {
    pub fn select(p: &ApsParams) -> Self {
        let (m, n) = (p.m, p.n);
        match p.domain {
            DomainKind::Disk if n >= 0 => ApsCase::DiskNonNegative,
            DomainKind::Disk => ApsCase::DiskNegative,
            DomainKind::Annulus if m + n >= 0 => {
                if n >= 0 && m > 0 {
                    ApsCase::Case1a
                } else if n < 0 {
                    ApsCase::Case1b
                } else {
                    ApsCase::Case1c
                }
            }
            DomainKind::Annulus => {
                if n < 0 && m <= 0 {
                    ApsCase::Case2a
                } else if n < 0 {
                    ApsCase::Case2b
                } else {
                    ApsCase::Case2c
                }
            }
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ApsCase::DiskNonNegative => "N >= 0",
            ApsCase::DiskNegative => "N < 0",
            ApsCase::Case1a => "Case 1(a)",
            ApsCase::Case1b => "Case 1(b)",
            ApsCase::Case1c => "Case 1(c)",
            ApsCase::Case2a => "Case 2(a)",
            ApsCase::Case2b => "Case 2(b)",
            ApsCase::Case2c => "Case 2(c)",
        }
    }

    pub const ANNULUS: [ApsCase; 6] = [
        ApsCase::Case1a,
        ApsCase::Case1b,
        ApsCase::Case1c,
        ApsCase::Case2a,
        ApsCase::Case2b,
        ApsCase::Case2c,
    ];
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Holo,
    Anti,
}

/// One displayed term of a case table: variant on a mode range, `None` = ∞.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Term {
    pub side: Side,
    pub variant: BoundaryVariant,
    pub start: i64,
    pub end: Option<i64>,
}

impl Term {
    pub fn is_empty(&self) -> bool {
        matches!(self.end, Some(e) if e < self.start)
    }
    pub fn contains(&self, j: i64) -> bool {
        j >= self.start && self.end.is_none_or(|e| j <= e)
    }
}

/// The displayed terms of `D` for a case, before dropping empty ranges.
///
/// Case 2(c) runs `Ā₁` up to `m = N` and `Ā₂` from `N + 1`, the layout
/// implied by the vanishing conditions.
pub fn case_terms(case: ApsCase, p: &ApsParams) -> Vec<Term> {
    use BoundaryVariant::*;
    use Side::*;
    let (m, n) = (p.m, p.n);
    let t = |side, variant, start, end: Option<i64>| Term {
        side,
        variant,
        start,
        end,
    };
    match case {
        ApsCase::DiskNonNegative => vec![
            t(Holo, Full, 0, Some(n)),
            t(Holo, ZeroPlus, n + 1, None),
            t(Anti, Full, 1, None),
        ],
        ApsCase::DiskNegative => vec![
            t(Holo, ZeroPlus, 0, None),
            t(Anti, ZeroPlus, 1, Some(-n - 1)),
            t(Anti, Full, -n, None),
        ],
        ApsCase::Case1a => vec![
            t(Holo, Full, 0, Some(n)),
            t(Holo, ZeroPlus, n + 1, None),
            t(Anti, Full, 1, Some(m)),
            t(Anti, ZeroMinus, m + 1, None),
        ],
        ApsCase::Case1b => vec![
            t(Holo, ZeroPlus, 0, None),
            t(Anti, ZeroPlus, 1, Some(-n - 1)),
            t(Anti, Full, -n, Some(m)),
            t(Anti, ZeroMinus, m + 1, None),
        ],
        ApsCase::Case1c => vec![
            t(Holo, ZeroMinus, 0, Some(-m - 1)),
            t(Holo, Full, -m, Some(n)),
            t(Holo, ZeroPlus, n + 1, None),
            t(Anti, ZeroMinus, 1, None),
        ],
        ApsCase::Case2a => vec![
            t(Holo, ZeroBoth, 0, Some(-m - 1)),
            t(Holo, ZeroPlus, -m, None),
            t(Anti, ZeroBoth, 1, Some(-n - 1)),
            t(Anti, ZeroMinus, -n, None),
        ],
        ApsCase::Case2b => vec![
            t(Holo, ZeroPlus, 0, None),
            t(Anti, ZeroPlus, 1, Some(m)),
            t(Anti, ZeroBoth, m + 1, Some(-n - 1)),
            t(Anti, ZeroMinus, -n, None),
        ],
        ApsCase::Case2c => vec![
            t(Holo, ZeroMinus, 0, Some(n)),
            t(Holo, ZeroBoth, n + 1, Some(-m - 1)),
            t(Holo, ZeroPlus, -m, None),
            t(Anti, ZeroMinus, 1, None),
        ],
    }
}

/// Variant forced by the boundary condition on one band.
pub fn band_variant(p: &ApsParams, side: Side, j: i64) -> BoundaryVariant {
    let freq = match side {
        Side::Holo => j,
        Side::Anti => -j,
    };
    let plus = freq > p.n;
    let minus = p.domain == DomainKind::Annulus && freq < -p.m;
    BoundaryVariant::from_conditions(plus, minus)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ModeEntry {
    pub side: Side,
    /// `m` for holomorphic blocks, `n` for antiholomorphic ones
    pub mode: usize,
    pub op: Op,
    pub variant: BoundaryVariant,
    pub adjoint: (Op, BoundaryVariant),
    pub parametrix: Parametrix,
    /// Jacobi data index: `m`, or `n − 1`
    pub data_mode: usize,
    pub src_band: i64,
    pub dst_band: i64,
}

impl ModeEntry {
    pub fn new(p: &ApsParams, side: Side, mode: usize) -> Self {
        let variant = band_variant(p, side, mode as i64);
        let (op, data_mode, src, dst) = match side {
            Side::Holo => (Op::Abar, mode, mode as i64, mode as i64 + 1),
            Side::Anti => (Op::A, mode - 1, -(mode as i64), -(mode as i64) + 1),
        };
        Self {
            side,
            mode,
            op,
            variant,
            adjoint: adjoint_variant(p.domain, op, variant).expect("variant matches domain"),
            parametrix: Parametrix::of(op, variant),
            data_mode,
            src_band: src,
            dst_band: dst,
        }
    }

    /// e.g. `-Abar_0^(3) W^(3)`
    pub fn operator_label(&self) -> String {
        let k = self.data_mode;
        match self.side {
            Side::Holo => format!("-{}^({k}) W^({k})", variant_name(self.op, self.variant)),
            Side::Anti => format!("W^({k}) {}^({k})", variant_name(self.op, self.variant)),
        }
    }
    pub fn adjoint_label(&self) -> String {
        let k = self.data_mode;
        let (op, v) = self.adjoint;
        match self.side {
            Side::Holo => format!("-W^({k}) {}^({k})", variant_name(op, v)),
            Side::Anti => format!("{}^({k}) W^({k})", variant_name(op, v)),
        }
    }
    pub fn parametrix_label(&self) -> String {
        let k = self.data_mode;
        match self.side {
            Side::Holo => format!("-V^({k}) {:?}^({k})", self.parametrix),
            Side::Anti => format!("{:?}^({k}) V^({k})", self.parametrix),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ModeAssembly {
    pub params: ApsParams,
    pub case: ApsCase,
    /// displayed terms with nonempty ranges
    pub terms: Vec<Term>,
    /// displayed terms whose range is empty for these parameters
    pub omitted: Vec<Term>,
    /// holomorphic `m = 0..cutoff`, then antiholomorphic `n = 1..=cutoff`
    pub entries: Vec<ModeEntry>,
}

pub fn mode_assembly(p: &ApsParams) -> ModeAssembly {
    let case = ApsCase::select(p);
    let (omitted, terms): (Vec<Term>, Vec<Term>) =
        case_terms(case, p).into_iter().partition(|t| t.is_empty());
    let cut = p.cutoff();
    let entries = (0..cut)
        .map(|m| ModeEntry::new(p, Side::Holo, m))
        .chain((1..=cut).map(|n| ModeEntry::new(p, Side::Anti, n)))
        .collect();
    ModeAssembly {
        params: *p,
        case,
        terms,
        omitted,
        entries,
    }
}

impl ModeAssembly {
    /// Human-readable layout of `D`, `D*` and `Q`, one term per line.
    pub fn describe(&self) -> String {
        let mut s = format!("{}: {}\n", self.params, self.case.label());
        let p = &self.params;
        let lines = |which: usize| -> Vec<String> {
            self.terms
                .iter()
                .map(|t| {
                    let e = ModeEntry::new(
                        p,
                        t.side,
                        t.start.max(if t.side == Side::Anti { 1 } else { 0 }) as usize,
                    );
                    let label = match which {
                        0 => e.operator_label(),
                        1 => e.adjoint_label(),
                        _ => e.parametrix_label(),
                    };
                    let var = match t.side {
                        Side::Holo => "m",
                        Side::Anti => "n",
                    };
                    let end = t.end.map_or("inf".to_string(), |e| e.to_string());
                    format!("  ({})_{{{var}={}..{end}}}", generic_label(&label), t.start)
                })
                .collect()
        };
        for (i, name) in ["D", "D*", "Q"].iter().enumerate() {
            s.push_str(&format!("{name}:\n"));
            for l in lines(i) {
                s.push_str(&l);
                s.push('\n');
            }
        }
        for t in &self.omitted {
            let var = if t.side == Side::Holo { "m" } else { "n" };
            s.push_str(&format!(
                "omitted: {} term on {var}={}..{} (empty range)\n",
                variant_name(
                    if t.side == Side::Holo {
                        Op::Abar
                    } else {
                        Op::A
                    },
                    t.variant
                ),
                t.start,
                t.end.unwrap_or(i64::MAX)
            ));
        }
        s
    }
}

// replace concrete mode numbers by the running index
fn generic_label(label: &str) -> String {
    let mut out = String::new();
    let mut rest = label;
    while let Some(i) = rest.find("^(") {
        out.push_str(&rest[..i]);
        let j = rest[i..].find(')').map(|j| i + j + 1).unwrap_or(rest.len());
        out.push_str("^(k)");
        rest = &rest[j..];
    }
    out.push_str(rest);
    out
}

/// Which form of the parametrix to use.
///
/// `Displayed` composes `V⁽ᵐ⁾` with the Jacobi parametrices exactly as
/// written in the case tables; its compositions with `D` subtract oblique
/// projections. `Orthogonal` is `(I − P_Ker) Q (I − P_Coker)` and gives the
/// orthogonal projections and `Ker Q = Coker D`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum QForm {
    Displayed,
    #[default]
    Orthogonal,
}

#[derive(Clone, Debug)]
struct Block {
    entry: ModeEntry,
    /// kernel vectors on the source band
    ker: Vec<SeqVec>,
    /// cokernel vectors on the target band
    coker: Vec<SeqVec>,
    /// range of `I − DQ` for the displayed form
    coker_displayed: Vec<SeqVec>,
}

/// `D_N` or `D_{M,N}` on a Fourier space, truncated at `m_max` modes.
#[derive(Clone, Debug)]
pub struct ApsSystem {
    pub space: FourierSpace,
    pub assembly: ModeAssembly,
    blocks: Vec<Block>,
}

/// Holomorphic blocks for `m < m_max`, antiholomorphic for `n ≤ m_max`.
fn all_entries(p: &ApsParams, m_max: usize) -> Vec<ModeEntry> {
    (0..m_max)
        .map(|m| ModeEntry::new(p, Side::Holo, m))
        .chain((1..=m_max).map(|n| ModeEntry::new(p, Side::Anti, n)))
        .collect()
}

impl ApsSystem {
    pub fn new(space: &FourierSpace, p: ApsParams) -> Result<Self, ApsError> {
        if space.domain() != p.domain {
            return Err(ApsError::WindowTooSmall(format!(
                "weights are on the {}, parameters on the {}",
                space.domain(),
                p.domain
            )));
        }
        let need = p.cutoff() + 2;
        if space.m_max < need {
            return Err(ApsError::WindowTooSmall(format!(
                "m_max = {} but {p} needs at least {need}",
                space.m_max
            )));
        }
        let mut sys = Self {
            space: space.clone(),
            assembly: mode_assembly(&p),
            blocks: Vec::new(),
        };
        let blocks = all_entries(&p, space.m_max)
            .into_iter()
            .map(|e| sys.make_block(e))
            .collect::<Result<Vec<_>, _>>()?;
        sys.blocks = blocks;
        Ok(sys)
    }

    pub fn params(&self) -> ApsParams {
        self.assembly.params
    }

    fn data(&self, e: &ModeEntry) -> &JacobiData {
        self.space.mode(e.data_mode)
    }

    fn band_ref(b: i64) -> WeightRef {
        WeightRef::Mode(b.unsigned_abs() as usize)
    }

    fn band_len(&self, b: i64) -> usize {
        (self.space.hi() - b.abs() - self.space.lo() + 1) as usize
    }

    fn to_band(&self, v: &SeqVec, b: i64) -> SeqVec {
        v.rewindow(self.space.lo(), self.band_len(b))
            .with_ref(Self::band_ref(b))
    }

    fn to_data(&self, v: &SeqVec, d: &JacobiData, r: WeightRef) -> SeqVec {
        v.rewindow(d.lo, d.len()).with_ref(r)
    }

    fn scale_w(&self, v: &SeqVec, m: usize, inverse: bool) -> SeqVec {
        let w = self.space.w_shift(m, v.len());
        let mut out = v.clone();
        for (x, s) in out.values.iter_mut().zip(&w) {
            *x *= if inverse { 1.0 / s } else { *s };
        }
        out
    }

    fn make_block(&self, e: ModeEntry) -> Result<Block, ApsError> {
        let d = self.data(&e);
        let k = e.data_mode;
        let ker_raw = d.kernel_basis(e.op, e.variant)?;
        let coker_raw = d.cokernel_basis(e.op, e.variant)?;
        let (ker, coker, coker_displayed) = match e.side {
            Side::Holo => (
                ker_raw
                    .iter()
                    .map(|kv| self.to_band(&self.scale_w(&kv.omega, k, true), e.src_band))
                    .collect(),
                coker_raw
                    .iter()
                    .map(|kv| self.to_band(&kv.omega, e.dst_band))
                    .collect(),
                coker_raw
                    .iter()
                    .map(|kv| self.to_band(&kv.omega, e.dst_band))
                    .collect(),
            ),
            Side::Anti => (
                ker_raw
                    .iter()
                    .map(|kv| self.to_band(&kv.omega, e.src_band))
                    .collect(),
                coker_raw
                    .iter()
                    .map(|kv| self.to_band(&self.scale_w(&kv.omega, k, true), e.dst_band))
                    .collect(),
                coker_raw
                    .iter()
                    .map(|kv| self.to_band(&self.scale_w(&kv.omega, k, false), e.dst_band))
                    .collect(),
            ),
        };
        Ok(Block {
            entry: e,
            ker,
            coker,
            coker_displayed,
        })
    }

    fn block_apply(&self, e: &ModeEntry, x: &SeqVec) -> Result<SeqVec, ApsError> {
        let d = self.data(e);
        let k = e.data_mode;
        let out = match e.side {
            Side::Holo => {
                let wf = self.to_data(&self.scale_w(x, k, false), d, d.a_ref);
                d.apply_abar(&wf)?.scaled(C64::new(-1.0, 0.0))
            }
            Side::Anti => {
                let g = self.to_data(x, d, d.a_prime_ref);
                self.scale_w(&d.apply_a(&g)?, k, false)
            }
        };
        Ok(self.to_band(&out, e.dst_band))
    }

    fn block_parametrix(&self, e: &ModeEntry, y: &SeqVec) -> Result<SeqVec, ApsError> {
        let d = self.data(e);
        let k = e.data_mode;
        let out = match e.side {
            Side::Holo => {
                let g = self.to_data(y, d, d.a_prime_ref);
                self.scale_w(&d.apply_parametrix(e.parametrix, &g)?, k, true)
                    .scaled(C64::new(-1.0, 0.0))
            }
            Side::Anti => {
                let g = self.to_data(&self.scale_w(y, k, true), d, d.a_ref);
                d.apply_parametrix(e.parametrix, &g)?
            }
        };
        Ok(self.to_band(&out, e.src_band))
    }

    /// Bands `D` reads; the top holomorphic band has no block.
    pub fn input_bands(&self) -> Vec<i64> {
        self.blocks.iter().map(|b| b.entry.src_band).collect()
    }
    pub fn output_bands(&self) -> Vec<i64> {
        self.blocks.iter().map(|b| b.entry.dst_band).collect()
    }

    /// `D x`. The vanishing conditions restrict the domain only.
    pub fn apply(&self, x: &HilbertElement) -> Result<HilbertElement, ApsError> {
        self.space.check(x)?;
        let mut out = self.space.zeros();
        for b in &self.blocks {
            *out.band_mut(b.entry.dst_band) =
                self.block_apply(&b.entry, x.band(b.entry.src_band))?;
        }
        Ok(out)
    }

    pub fn apply_parametrix(
        &self,
        y: &HilbertElement,
        form: QForm,
    ) -> Result<HilbertElement, ApsError> {
        self.space.check(y)?;
        let mut out = self.space.zeros();
        for b in &self.blocks {
            let mut yb = y.band(b.entry.dst_band).clone();
            if form == QForm::Orthogonal {
                yb = self.project_off(&yb, b.entry.dst_band, &b.coker);
            }
            let mut q = self.block_parametrix(&b.entry, &yb)?;
            if form == QForm::Orthogonal {
                q = self.project_off(&q, b.entry.src_band, &b.ker);
            }
            *out.band_mut(b.entry.src_band) = q;
        }
        Ok(out)
    }

    fn single_band_element(&self, b: i64, v: SeqVec) -> HilbertElement {
        let mut x = self.space.zeros();
        *x.band_mut(b) = v;
        x
    }

    pub fn kernel_basis(&self) -> Vec<HilbertElement> {
        self.blocks
            .iter()
            .flat_map(|b| {
                b.ker
                    .iter()
                    .map(move |v| self.single_band_element(b.entry.src_band, v.clone()))
            })
            .collect()
    }

    pub fn cokernel_basis(&self) -> Vec<HilbertElement> {
        self.blocks
            .iter()
            .flat_map(|b| {
                b.coker
                    .iter()
                    .map(move |v| self.single_band_element(b.entry.dst_band, v.clone()))
            })
            .collect()
    }

    /// `(dim Ker, dim Coker)` counted over the modes below the cutoff.
    pub fn analytic_dims(&self) -> Result<Vec<ModeIndex>, ApsError> {
        self.assembly
            .entries
            .iter()
            .map(|e| {
                let (k, c) = variant_dims(self.params().domain, e.op, e.variant)?;
                Ok(ModeIndex {
                    side: e.side,
                    mode: e.mode,
                    operator: e.operator_label(),
                    dim_ker: k,
                    dim_coker: c,
                })
            })
            .collect()
    }

    fn project_off(&self, v: &SeqVec, band: i64, basis: &[SeqVec]) -> SeqVec {
        let w = self.space.weights(band);
        let mut out = v.clone();
        let ortho = gram_schmidt(basis, w);
        for q in &ortho {
            out = out.axpy(-weighted_inner(q, &out, w), q);
        }
        out
    }

    fn band_norm(&self, v: &SeqVec, band: i64, rows: Option<(i64, i64)>) -> f64 {
        let w = self.space.weights(band);
        match rows {
            None => weighted_norm_sq(v, w).sqrt(),
            Some((lo, hi)) => (lo..=hi)
                .map(|k| {
                    let i = (k - v.lo) as usize;
                    v.values[i].norm_sqr() / w[i]
                })
                .sum::<f64>()
                .sqrt(),
        }
    }

    fn normalized(&self, v: SeqVec, band: i64) -> SeqVec {
        let n = self.band_norm(&v, band, None);
        if n > 0.0 {
            v.scaled(C64::new(1.0 / n, 0.0))
        } else {
            v
        }
    }

    /// Random element of the domain: per block a compact part plus the limit
    /// carriers its vanishing conditions allow, scaled to unit norm.
    pub fn random_domain_element<R: Rng>(&self, rng: &mut R) -> Result<HilbertElement, ApsError> {
        let mut x = self.space.zeros();
        for b in &self.blocks {
            let e = &b.entry;
            let d = self.data(e);
            let mut v = d.random_supported(d.domain_ref(e.op), rng);
            let ends: &[End] = match self.space.domain() {
                DomainKind::Disk => &[End::Plus],
                DomainKind::Annulus => &[End::Plus, End::Minus],
            };
            for &end in ends {
                let allowed = match end {
                    End::Plus => !e.variant.vanishes_plus(),
                    End::Minus => !e.variant.vanishes_minus(),
                };
                if allowed {
                    let z = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                    v = v.axpy(z, &d.limit_carrier(e.op, end)?);
                }
            }
            let v = match e.side {
                Side::Holo => self.scale_w(&v, e.data_mode, true),
                Side::Anti => v,
            };
            *x.band_mut(e.src_band) = self.normalized(self.to_band(&v, e.src_band), e.src_band);
        }
        Ok(x)
    }

    /// Random compactly supported element of the target bands.
    pub fn random_range_element<R: Rng>(&self, rng: &mut R) -> Result<HilbertElement, ApsError> {
        let mut y = self.space.zeros();
        for b in &self.blocks {
            let e = &b.entry;
            let d = self.data(e);
            let v = d.random_supported(d.range_ref(e.op), rng);
            *y.band_mut(e.dst_band) = self.normalized(self.to_band(&v, e.dst_band), e.dst_band);
        }
        Ok(y)
    }

    // rows of the target band where the block stencil stays inside the window
    fn interior(&self, e: &ModeEntry) -> (i64, i64) {
        self.data(e).interior_rows(e.op)
    }

    /// Worst relative residuals of the composition identities over random elements.
    pub fn residuals<R: Rng>(
        &self,
        trials: usize,
        form: QForm,
        rng: &mut R,
    ) -> Result<ResidualReport, ApsError> {
        let mut qd = 0.0f64;
        let mut dq = 0.0f64;
        for _ in 0..trials {
            let x = self.random_domain_element(rng)?;
            let qdx = self.apply_parametrix(&self.apply(&x)?, form)?;
            let mut num = 0.0;
            let mut den = 0.0;
            for b in &self.blocks {
                let band = b.entry.src_band;
                let xb = x.band(band);
                let diff = qdx.band(band).sub(xb);
                let r = match form {
                    // Q D x = (I − P_Ker) x
                    QForm::Orthogonal => diff.axpy(
                        C64::new(1.0, 0.0),
                        &xb.sub(&self.project_off(xb, band, &b.ker)),
                    ),
                    // Q D x − x ∈ Ker D
                    QForm::Displayed => self.project_off(&diff, band, &b.ker),
                };
                num += self.band_norm(&r, band, None).powi(2);
                den += self.band_norm(xb, band, None).powi(2);
            }
            if den > 0.0 {
                qd = qd.max((num / den).sqrt());
            }

            let y = self.random_range_element(rng)?;
            let qy = self.apply_parametrix(&y, form)?;
            let dqy = self.apply(&qy)?;
            // D sums terms far larger than its result where a is large, so
            // each row is compared with the size of those terms
            let stencil = self.space.stencil_scale(&qy, false)?;
            for b in &self.blocks {
                let band = b.entry.dst_band;
                let yb = y.band(band);
                let diff = dqy.band(band).sub(yb);
                let r = match form {
                    QForm::Orthogonal => diff.axpy(
                        C64::new(1.0, 0.0),
                        &yb.sub(&self.project_off(yb, band, &b.coker)),
                    ),
                    QForm::Displayed => self.project_off(&diff, band, &b.coker_displayed),
                };
                let floor = yb.max_abs();
                let (lo, hi) = self.interior(&b.entry);
                for k in lo..=hi {
                    let s = stencil.get(band, k).re.max(floor);
                    if s > 0.0 {
                        dq = dq.max(r.get(k).norm() / s);
                    }
                }
            }
        }
        let mut killed = 0.0f64;
        for b in &self.blocks {
            let annihilated = match form {
                QForm::Orthogonal => &b.coker,
                QForm::Displayed => &b.coker_displayed,
            };
            for v in annihilated {
                let y = self.single_band_element(b.entry.dst_band, v.clone());
                let qy = self.apply_parametrix(&y, form)?;
                let q = qy.band(b.entry.src_band);
                let rel = self.band_norm(q, b.entry.src_band, None)
                    / self.band_norm(v, b.entry.dst_band, None);
                killed = killed.max(rel);
            }
        }
        let tail = self
            .blocks
            .iter()
            .map(|b| self.data(&b.entry).tail_budget())
            .fold(0.0, f64::max);
        Ok(ResidualReport {
            form,
            trials,
            residual_qd: qd,
            residual_dq: dq,
            q_on_cokernel: killed,
            tail,
        })
    }

    /// Boundary values of every band: `f_m(±∞)` at frequency `m`, `g_n(±∞)` at `−n`.
    pub fn restrict_boundary(&self, x: &HilbertElement) -> Result<BoundarySymbol, ApsError> {
        restrict_boundary(&self.space, x)
    }

    /// Largest symbol entry at a frequency the boundary condition excludes.
    pub fn aps_violation(&self, sym: &BoundarySymbol) -> f64 {
        let p = self.params();
        let plus = sym
            .plus
            .iter()
            .filter(|(f, _)| *f > p.n)
            .map(|(_, v)| v.norm());
        let minus = sym
            .minus
            .iter()
            .flatten()
            .filter(|(f, _)| *f < -p.m)
            .map(|(_, v)| v.norm());
        plus.chain(minus).fold(0.0, f64::max)
    }
}

fn gram_schmidt(basis: &[SeqVec], w: &[f64]) -> Vec<SeqVec> {
    let mut out: Vec<SeqVec> = Vec::new();
    for v in basis {
        let mut u = v.clone();
        for q in &out {
            u = u.axpy(-weighted_inner(q, &u, w), q);
        }
        let n = weighted_norm_sq(&u, w).sqrt();
        if n > 0.0 {
            out.push(u.scaled(C64::new(1.0 / n, 0.0)));
        }
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundarySymbol {
    /// `(frequency, value)` at `+∞`
    pub plus: Vec<(i64, C64)>,
    /// at `−∞`, annulus only
    pub minus: Option<Vec<(i64, C64)>>,
    pub tail: f64,
}

impl BoundarySymbol {
    pub fn at(&self, end: End, freq: i64) -> C64 {
        let list = match end {
            End::Plus => Some(&self.plus),
            End::Minus => self.minus.as_ref(),
        };
        list.and_then(|l| l.iter().find(|(f, _)| *f == freq).map(|(_, v)| *v))
            .unwrap_or(ZERO)
    }
}

pub fn restrict_boundary(
    space: &FourierSpace,
    x: &HilbertElement,
) -> Result<BoundarySymbol, ApsError> {
    space.check(x)?;
    let ws = &space.ws;
    let ends: Vec<End> = match space.domain() {
        DomainKind::Disk => vec![End::Plus],
        DomainKind::Annulus => vec![End::Plus, End::Minus],
    };
    let mut plus = Vec::new();
    let mut minus = Vec::new();
    let mut tail = 0.0f64;
    for b in x.bands() {
        let v = x.band(b);
        if v.max_abs() == 0.0 {
            continue;
        }
        for &end in &ends {
            let (value, t) = if b >= 0 {
                let m = b as usize;
                let d = space.mode(m);
                let w = space.w_shift(m, v.len());
                let wf = SeqVec::from_fn(v.lo, v.len(), d.a_ref, |k| {
                    v.get(k) * w[(k - v.lo) as usize]
                });
                let wf = wf.rewindow(d.lo, d.len());
                let c = d
                    .limit_certified(Op::Abar, &wf, end)
                    .map_err(|e| ApsError::NotInDomain { band: b, source: e })?;
                let w_end = match end {
                    End::Plus => ws.w_plus,
                    End::Minus => ws.w_minus.unwrap_or(ws.w_plus),
                };
                (c.value / w_end, c.tail / w_end)
            } else {
                let n = (-b) as usize;
                let d = space.mode(n - 1);
                let g = v.rewindow(d.lo, d.len()).with_ref(d.a_prime_ref);
                let c = d
                    .limit_certified(Op::A, &g, end)
                    .map_err(|e| ApsError::NotInDomain { band: b, source: e })?;
                (c.value, c.tail)
            };
            tail = tail.max(t);
            match end {
                End::Plus => plus.push((b, value)),
                End::Minus => minus.push((b, value)),
            }
        }
    }
    Ok(BoundarySymbol {
        plus,
        minus: (space.domain() == DomainKind::Annulus).then_some(minus),
        tail,
    })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ResidualReport {
    pub form: QForm,
    pub trials: usize,
    /// `‖QDx − (I − P)x‖/‖x‖` in the weighted norm
    pub residual_qd: f64,
    /// worst row of `DQy − (I − P)y` relative to the stencil of `D` at that row
    pub residual_dq: f64,
    /// `max ‖Q κ‖/‖κ‖` over the vectors `Q` should annihilate
    pub q_on_cokernel: f64,
    pub tail: f64,
}

impl ResidualReport {
    pub fn max(&self) -> f64 {
        self.residual_qd
            .max(self.residual_dq)
            .max(self.q_on_cokernel)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ModeIndex {
    pub side: Side,
    pub mode: usize,
    pub operator: String,
    pub dim_ker: usize,
    pub dim_coker: usize,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct OracleIndex {
    pub window: usize,
    pub dim_ker: usize,
    pub dim_coker: usize,
    pub index: i64,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct BlockNorm {
    pub n: usize,
    pub parametrix: Parametrix,
    /// `(1/inf w)` times the kernel bound of the block's parametrix
    pub bound: f64,
    /// `(1/w₀)√(C⁽ⁿ⁻¹⁾C⁽ⁿ⁾)`
    pub stated_bound: f64,
    pub measured: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct IndexReport {
    pub schema: u32,
    pub params: ApsParams,
    pub case: String,
    pub modes: Vec<ModeIndex>,
    pub dim_ker: usize,
    pub dim_coker: usize,
    pub total_index: i64,
    pub analytic_index: i64,
    pub oracle: Vec<OracleIndex>,
    pub oracle_agreement: bool,
    pub residuals: Option<ResidualReport>,
    pub block_norm_decay: Vec<BlockNorm>,
}

impl IndexReport {
    pub fn agrees(&self) -> bool {
        self.total_index == self.analytic_index && self.oracle_agreement
    }
}

type CacheKey = (String, usize, Op, BoundaryVariant, usize);

/// Memoized oracle dimensions keyed by weights, mode, operator, variant and window.
#[derive(Default)]
pub struct OracleCache {
    map: Mutex<HashMap<CacheKey, (usize, usize)>>,
}

impl OracleCache {
    pub fn dims(
        &self,
        space: &FourierSpace,
        mode: usize,
        op: Op,
        v: BoundaryVariant,
        window: usize,
    ) -> Result<(usize, usize), ApsError> {
        let ws = &space.ws;
        let key = (
            format!("{:?}|{}|{}|{}", ws.family, ws.domain, ws.lo, ws.hi),
            mode,
            op,
            v,
            window,
        );
        if let Some(d) = self.map.lock().expect("cache lock").get(&key) {
            return Ok(*d);
        }
        let (lo, hi) = oracle_window(space.domain(), window);
        if lo < space.lo() || hi > space.hi() - mode as i64 - 1 {
            return Err(ApsError::WindowTooSmall(format!(
                "oracle window {window} does not fit mode {mode} on [{}, {}]",
                space.lo(),
                space.hi()
            )));
        }
        let data = JacobiData::for_mode_on(&space.ws, mode, lo, hi)?;
        let d = variant_dims_numeric(&data, op, v)?;
        self.map.lock().expect("cache lock").insert(key, d);
        Ok(d)
    }
}

#[derive(Clone, Debug, Default)]
pub struct IndexOptions {
    /// oracle window lengths; empty skips the oracle
    pub oracle_windows: Vec<usize>,
    /// random trials for the residuals; 0 skips them
    pub trials: usize,
    pub seed: u64,
    /// modes in the block-norm table; 0 skips it
    pub n_max: usize,
}

pub fn index(
    sys: &ApsSystem,
    opts: &IndexOptions,
    cache: &OracleCache,
) -> Result<IndexReport, ApsError> {
    let p = sys.params();
    let modes = sys.analytic_dims()?;
    let dim_ker: usize = modes.iter().map(|m| m.dim_ker).sum();
    let dim_coker: usize = modes.iter().map(|m| m.dim_coker).sum();
    let mut oracle = Vec::new();
    for &w in &opts.oracle_windows {
        let mut k = 0;
        let mut c = 0;
        for e in &sys.assembly.entries {
            let (dk, dc) = cache.dims(&sys.space, e.data_mode, e.op, e.variant, w)?;
            k += dk;
            c += dc;
        }
        oracle.push(OracleIndex {
            window: w,
            dim_ker: k,
            dim_coker: c,
            index: k as i64 - c as i64,
        });
    }
    let oracle_agreement = oracle
        .iter()
        .all(|o| o.dim_ker == dim_ker && o.dim_coker == dim_coker);
    let residuals = if opts.trials > 0 {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(opts.seed);
        Some(sys.residuals(opts.trials, QForm::Orthogonal, &mut rng)?)
    } else {
        None
    };
    let block_norm_decay = if opts.n_max > 0 {
        compactness_evidence(sys, opts.n_max)?
    } else {
        Vec::new()
    };
    Ok(IndexReport {
        schema: 1,
        params: p,
        case: sys.assembly.case.label().to_string(),
        modes,
        dim_ker,
        dim_coker,
        total_index: dim_ker as i64 - dim_coker as i64,
        analytic_index: p.analytic_index(),
        oracle,
        oracle_agreement,
        residuals,
        block_norm_decay,
    })
}

/// Norms of the antiholomorphic parametrix blocks `T⁽ⁿ⁻¹⁾V⁽ⁿ⁻¹⁾`, `n = 1..=n_max`.
pub fn compactness_evidence(sys: &ApsSystem, n_max: usize) -> Result<Vec<BlockNorm>, ApsError> {
    if n_max > sys.space.m_max {
        return Err(ApsError::WindowTooSmall(format!(
            "n_max = {n_max} exceeds m_max = {}",
            sys.space.m_max
        )));
    }
    let ws = &sys.space.ws;
    let w_inf = match ws.domain {
        DomainKind::Disk => ws.w(0),
        DomainKind::Annulus => ws.w_minus.unwrap_or(ws.w(ws.lo)),
    };
    let w0 = match ws.domain {
        DomainKind::Disk => ws.w(0),
        DomainKind::Annulus => w_inf,
    };
    let mut out = Vec::new();
    for b in sys
        .blocks
        .iter()
        .filter(|b| b.entry.side == Side::Anti && b.entry.mode <= n_max)
    {
        let e = &b.entry;
        let d = sys.data(e);
        let in_band = e.dst_band;
        let out_band = e.src_band;
        let w_in = sys.space.weights(in_band);
        let w_out = sys.space.weights(out_band);
        let n = d.len();
        let mut m = DMatrix::<C64>::zeros(n, n);
        for j in 0..n {
            let mut y = SeqVec::zeros(sys.space.lo(), w_in.len(), ApsSystem::band_ref(in_band));
            y.values[j] = C64::new(w_in[j].sqrt(), 0.0);
            let q = sys.block_parametrix(e, &y)?;
            for i in 0..n {
                m[(i, j)] = q.values[i] / w_out[i].sqrt();
            }
        }
        let s = (d.c_const().hi * d.c_prime_const().hi).sqrt();
        let factor = match (ws.domain, e.parametrix) {
            (DomainKind::Annulus, Parametrix::T0) => d.k_const(),
            _ => 1.0,
        };
        out.push(BlockNorm {
            n: e.mode,
            parametrix: e.parametrix,
            bound: factor * s / w_inf,
            stated_bound: s / w0,
            measured: power_norm(&m),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weight_model::{eval_weights, WeightFamily};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn geo(k: usize, m: usize) -> FourierSpace {
        let ws = eval_weights(
            &WeightFamily::GeometricDisk {
                rho_plus: 1.0,
                q: 0.5,
            },
            DomainKind::Disk,
            k,
        )
        .unwrap();
        FourierSpace::new(&ws, m).unwrap()
    }
    fn sig(k: usize, m: usize) -> FourierSpace {
        let ws = eval_weights(
            &WeightFamily::SigmoidAnnulus {
                rho_minus: 1.0,
                rho_plus: 2.0,
                q: 2.0,
            },
            DomainKind::Annulus,
            k,
        )
        .unwrap();
        FourierSpace::new(&ws, m).unwrap()
    }

    #[test]
    fn case_selection_total() {
        let mut seen = std::collections::HashSet::new();
        for m in -6..=6 {
            for n in -6..=6 {
                let p = ApsParams::annulus(m, n);
                let c = ApsCase::select(&p);
                seen.insert(c);
                // the table and the frequency rule agree on every mode
                let terms = case_terms(c, &p);
                for j in 0..20i64 {
                    for side in [Side::Holo, Side::Anti] {
                        if side == Side::Anti && j == 0 {
                            continue;
                        }
                        let hits: Vec<_> = terms
                            .iter()
                            .filter(|t| t.side == side && t.contains(j))
                            .collect();
                        assert_eq!(hits.len(), 1, "M={m} N={n} {side:?} {j}");
                        assert_eq!(
                            hits[0].variant,
                            band_variant(&p, side, j),
                            "M={m} N={n} {side:?} {j}"
                        );
                    }
                }
            }
        }
        assert_eq!(seen.len(), 6);
        for n in -6..=6 {
            let p = ApsParams::disk(n);
            let terms = case_terms(ApsCase::select(&p), &p);
            for j in 0..20i64 {
                for side in [Side::Holo, Side::Anti] {
                    if side == Side::Anti && j == 0 {
                        continue;
                    }
                    let hits: Vec<_> = terms
                        .iter()
                        .filter(|t| t.side == side && t.contains(j))
                        .collect();
                    assert_eq!(hits.len(), 1);
                    assert_eq!(hits[0].variant, band_variant(&p, side, j));
                }
            }
        }
    }

    #[test]
    fn assembly_examples() {
        let a = mode_assembly(&ApsParams::disk(2));
        for e in &a.entries {
            let want = match (e.side, e.mode) {
                (Side::Holo, m) if m <= 2 => BoundaryVariant::Full,
                (Side::Holo, _) => BoundaryVariant::ZeroPlus,
                (Side::Anti, _) => BoundaryVariant::Full,
            };
            assert_eq!(e.variant, want);
        }
        assert_eq!(
            mode_assembly(&ApsParams::annulus(1, 1)).case,
            ApsCase::Case1a
        );
        let a = mode_assembly(&ApsParams::annulus(0, -1));
        assert_eq!(a.case, ApsCase::Case2a);
        assert_eq!(a.omitted.len(), 2);
        assert!(a
            .omitted
            .iter()
            .all(|t| t.variant == BoundaryVariant::ZeroBoth));
        let a = mode_assembly(&ApsParams::annulus(1, -1));
        assert_eq!(a.case, ApsCase::Case1b);
        assert_eq!(a.omitted.len(), 1);
        let a = mode_assembly(&ApsParams::annulus(0, 2));
        assert_eq!(a.case, ApsCase::Case1c);
        assert_eq!(a.omitted[0].variant, BoundaryVariant::ZeroMinus);
        let a = mode_assembly(&ApsParams::annulus(1, -2));
        assert_eq!(a.case, ApsCase::Case2b);
        assert!(a.describe().contains("Case 2(b)"));
        // 2(c) with N = 0: the Ā₁ term covers m = 0
        let a = mode_assembly(&ApsParams::annulus(-2, 0));
        assert_eq!(a.case, ApsCase::Case2c);
        assert_eq!(a.entries[0].variant, BoundaryVariant::ZeroMinus);
        assert_eq!(a.entries[1].variant, BoundaryVariant::ZeroBoth);
    }

    #[test]
    fn index_disk_and_annulus() {
        let sp = geo(80, 10);
        let cache = OracleCache::default();
        for n in -4..=4 {
            let sys = ApsSystem::new(&sp, ApsParams::disk(n)).unwrap();
            let r = index(&sys, &IndexOptions::default(), &cache).unwrap();
            assert_eq!(r.total_index, n + 1);
            if n >= 0 {
                assert_eq!(r.dim_coker, 0);
            } else {
                assert_eq!(r.dim_ker, 0);
            }
        }
        let sp = sig(40, 10);
        for m in -3..=3 {
            for n in -3..=3 {
                let sys = ApsSystem::new(&sp, ApsParams::annulus(m, n)).unwrap();
                let r = index(&sys, &IndexOptions::default(), &cache).unwrap();
                assert_eq!(r.total_index, m + n + 1);
                if m + n >= 0 {
                    assert_eq!(r.dim_coker, 0);
                } else {
                    assert_eq!(r.dim_ker, 0);
                }
            }
        }
        let sys = ApsSystem::new(&sp, ApsParams::annulus(1, -2)).unwrap();
        let r = index(&sys, &IndexOptions::default(), &cache).unwrap();
        assert_eq!((r.dim_ker, r.dim_coker), (0, 0));
    }

    #[test]
    fn oracle_agrees() {
        let sp = geo(100, 8);
        let cache = OracleCache::default();
        let opts = IndexOptions {
            oracle_windows: vec![40],
            ..Default::default()
        };
        for n in [-2, 0, 2] {
            let sys = ApsSystem::new(&sp, ApsParams::disk(n)).unwrap();
            assert!(index(&sys, &opts, &cache).unwrap().agrees());
        }
        // the same cache serves a different weight sequence
        let sp = sig(60, 8);
        for (m, n) in [(1, 1), (-1, -2)] {
            let sys = ApsSystem::new(&sp, ApsParams::annulus(m, n)).unwrap();
            assert!(index(&sys, &opts, &cache).unwrap().agrees());
        }
    }

    #[test]
    fn residuals_small() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let sp = geo(60, 8);
        for n in [-2, -1, 0, 2] {
            let sys = ApsSystem::new(&sp, ApsParams::disk(n)).unwrap();
            for form in [QForm::Orthogonal, QForm::Displayed] {
                let r = sys.residuals(5, form, &mut rng).unwrap();
                assert!(r.max() < 1e-8 + r.tail, "{n} {form:?} {r:?}");
            }
        }
        let sp = sig(30, 8);
        for (m, n) in [(0, 1), (1, 1), (1, -2), (-2, 0), (0, -1), (-1, -1)] {
            let sys = ApsSystem::new(&sp, ApsParams::annulus(m, n)).unwrap();
            for form in [QForm::Orthogonal, QForm::Displayed] {
                let r = sys.residuals(5, form, &mut rng).unwrap();
                assert!(r.max() < 1e-8 + r.tail, "M={m} N={n} {form:?} {r:?}");
            }
        }
    }

    #[test]
    fn boundary_symbols() {
        let sp = geo(120, 6);
        let sys = ApsSystem::new(&sp, ApsParams::disk(0)).unwrap();
        let s = sys.restrict_boundary(&sp.u_power(1)).unwrap();
        assert!((s.at(End::Plus, 1) - C64::new(1.0, 0.0)).norm() < 1e-9);
        let mut x = sp.zeros();
        x.band_mut(2).set(5, C64::new(1.0, 0.0));
        x.band_mut(-3).set(7, C64::new(0.0, 2.0));
        let s = sys.restrict_boundary(&x).unwrap();
        assert!(s.plus.iter().all(|(_, v)| v.norm() < 1e-12));
        let mut x = sp.zeros();
        *x.band_mut(3) = sp
            .mode(3)
            .omega_plus()
            .rewindow(0, x.band(3).len())
            .with_ref(WeightRef::Mode(3));
        let s = sys.restrict_boundary(&x).unwrap();
        assert!((s.at(End::Plus, 3) - C64::new(1.0, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn kernels_satisfy_aps() {
        let sp = geo(120, 8);
        for n in 0..=3 {
            let sys = ApsSystem::new(&sp, ApsParams::disk(n)).unwrap();
            let ker = sys.kernel_basis();
            assert_eq!(ker.len() as i64, n + 1);
            for k in &ker {
                let s = sys.restrict_boundary(k).unwrap();
                assert!(sys.aps_violation(&s) < 1e-12);
            }
        }
        let sp = sig(60, 8);
        for (m, n) in [(1, 1), (0, 2), (2, -1)] {
            let sys = ApsSystem::new(&sp, ApsParams::annulus(m, n)).unwrap();
            for k in &sys.kernel_basis() {
                let s = sys.restrict_boundary(k).unwrap();
                assert!(sys.aps_violation(&s) < 1e-9, "{s:?}");
            }
        }
    }

    #[test]
    fn block_norms_decay() {
        let sp = geo(120, 14);
        let sys = ApsSystem::new(&sp, ApsParams::disk(0)).unwrap();
        let bn = compactness_evidence(&sys, 12).unwrap();
        let w0 = sp.ws.w(0);
        for b in &bn {
            let closed = 2f64.powf(-(2.0 * b.n as f64 - 1.0) / 4.0) / w0;
            assert!((b.stated_bound - closed).abs() < 1e-12, "{b:?}");
            assert!(b.measured <= b.bound + 1e-12);
        }
        assert!(bn.windows(2).all(|w| w[1].bound < w[0].bound));
        assert!(bn[0].measured > bn[8].measured);
    }

    #[test]
    fn window_too_small() {
        let sp = geo(40, 4);
        assert!(matches!(
            ApsSystem::new(&sp, ApsParams::disk(3)),
            Err(ApsError::WindowTooSmall(_))
        ));
    }
}
