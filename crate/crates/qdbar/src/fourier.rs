//! Fourier decomposition of the Hilbert space of the quantum domain.
//!
//! An element `Σ_m U^m f_m(K) + Σ_n g_n(K)(U*)^n` is stored band by band.
//! Band `b ≥ 0` holds `f_b`, band `−n` holds `g_n`; band 0 is stored once.
//! Band `b` lives on `[lo, hi − |b|]` and carries the weight `a⁽|b|⁾`.
//!
//! `D` moves band `m ≥ 0` to `m + 1` through `−Ā⁽ᵐ⁾W⁽ᵐ⁾` and band `−n` to
//! `−(n − 1)` through `W⁽ⁿ⁻¹⁾A⁽ⁿ⁻¹⁾`. `D̄` moves band `m ≥ 1` to `m − 1`
//! through `−W⁽ᵐ⁻¹⁾A⁽ᵐ⁻¹⁾` and band `−n ≤ 0` to `−(n + 1)` through
//! `Ā⁽ⁿ⁾W⁽ⁿ⁾`.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::jacobi::{JacobiData, JacobiError, SeqVec, WeightRef, C64};
use crate::weight_model::{DomainKind, WeightError, WeightSequence};

const ZERO: C64 = C64::new(0.0, 0.0);

#[derive(Debug, Error)]
pub enum FourierError {
    #[error("weight ref mismatch: {0}")]
    WeightRefMismatch(String),
    #[error("window mismatch: {0}")]
    WindowMismatch(String),
    #[error("matrix dimension {dim} exceeds the window size {max}")]
    DimTooLarge { dim: usize, max: usize },
    #[error(transparent)]
    Jacobi(#[from] JacobiError),
    #[error(transparent)]
    Weights(#[from] WeightError),
    #[error("bad element json: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Clone, Debug, PartialEq)]
pub struct HilbertElement {
    pub lo: i64,
    pub hi: i64,
    pub m_max: usize,
    /// `f_m`, `m = 0..=m_max`; `f_0` doubles as `g_0`
    pub holo: Vec<SeqVec>,
    /// `g_n`, `n = 1..=m_max`, stored at `n − 1`
    pub anti: Vec<SeqVec>,
}

fn band_len(lo: i64, hi: i64, b: i64) -> usize {
    (hi - b.abs() - lo + 1) as usize
}

impl HilbertElement {
    pub fn zeros(lo: i64, hi: i64, m_max: usize) -> Self {
        let mk = |m: usize| SeqVec::zeros(lo, band_len(lo, hi, m as i64), WeightRef::Mode(m));
        Self {
            lo,
            hi,
            m_max,
            holo: (0..=m_max).map(mk).collect(),
            anti: (1..=m_max).map(mk).collect(),
        }
    }

    pub fn bands(&self) -> std::ops::RangeInclusive<i64> {
        -(self.m_max as i64)..=self.m_max as i64
    }

    pub fn band(&self, b: i64) -> &SeqVec {
        if b >= 0 {
            &self.holo[b as usize]
        } else {
            &self.anti[(-b - 1) as usize]
        }
    }

    pub fn band_mut(&mut self, b: i64) -> &mut SeqVec {
        if b >= 0 {
            &mut self.holo[b as usize]
        } else {
            &mut self.anti[(-b - 1) as usize]
        }
    }

    /// Band `b` at `k`, zero outside its window.
    pub fn get(&self, b: i64, k: i64) -> C64 {
        if b.unsigned_abs() as usize > self.m_max {
            return ZERO;
        }
        self.band(b).get(k)
    }

    pub fn map_bands(&self, mut f: impl FnMut(i64, &SeqVec) -> SeqVec) -> Self {
        let mut out = self.clone();
        for b in self.bands() {
            *out.band_mut(b) = f(b, self.band(b));
        }
        out
    }

    pub fn axpy(&self, s: C64, other: &HilbertElement) -> Self {
        self.map_bands(|b, v| v.axpy(s, other.band(b)))
    }

    pub fn sub(&self, other: &HilbertElement) -> Self {
        self.axpy(C64::new(-1.0, 0.0), other)
    }

    pub fn scaled(&self, s: C64) -> Self {
        self.map_bands(|_, v| v.scaled(s))
    }

    pub fn max_abs(&self) -> f64 {
        self.bands()
            .map(|b| self.band(b).max_abs())
            .fold(0.0, f64::max)
    }

    /// Bands with a nonzero entry.
    pub fn support(&self) -> Vec<i64> {
        self.bands()
            .filter(|&b| self.band(b).max_abs() > 0.0)
            .collect()
    }

    pub fn to_json(&self) -> Result<String, FourierError> {
        let doc = ElementJson {
            lo: self.lo,
            hi: self.hi,
            m_max: self.m_max,
            bands: self
                .bands()
                .map(|b| BandJson {
                    band: b,
                    entries: (self.lo..)
                        .zip(&self.band(b).values)
                        .filter(|(_, v)| v.re != 0.0 || v.im != 0.0)
                        .map(|(k, v)| (k, v.re, v.im))
                        .collect(),
                })
                .collect(),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_json(text: &str) -> Result<Self, FourierError> {
        let doc: ElementJson = serde_json::from_str(text)?;
        let mut x = HilbertElement::zeros(doc.lo, doc.hi, doc.m_max);
        for band in doc.bands {
            if band.band.unsigned_abs() as usize > doc.m_max {
                return Err(FourierError::WindowMismatch(format!(
                    "band {} beyond m_max",
                    band.band
                )));
            }
            let v = x.band_mut(band.band);
            for (k, re, im) in band.entries {
                if k < v.lo || k > v.hi() {
                    return Err(FourierError::WindowMismatch(format!(
                        "index {k} outside band {}",
                        band.band
                    )));
                }
                v.set(k, C64::new(re, im));
            }
        }
        Ok(x)
    }
}

#[derive(Serialize, Deserialize)]
struct BandJson {
    band: i64,
    entries: Vec<(i64, f64, f64)>,
}

#[derive(Serialize, Deserialize)]
struct ElementJson {
    lo: i64,
    hi: i64,
    m_max: usize,
    bands: Vec<BandJson>,
}

/// Square truncation of an element; row and column `i` stand for `e_{lo+i}`.
#[derive(Clone, Debug)]
pub struct TruncatedMatrix {
    pub lo: i64,
    pub entries: DMatrix<C64>,
}

impl TruncatedMatrix {
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }
}

/// The weights of every band plus the Jacobi data of every mode.
#[derive(Clone, Debug)]
pub struct FourierSpace {
    pub ws: WeightSequence,
    pub m_max: usize,
    /// `a⁽ᵐ⁾` on band windows, `m = 0..=m_max`
    band_weights: Vec<Vec<f64>>,
    /// mode `n` data, `n = 0..=m_max`
    modes: Vec<JacobiData>,
}

impl FourierSpace {
    pub fn new(ws: &WeightSequence, m_max: usize) -> Result<Self, FourierError> {
        let modes = (0..=m_max)
            .map(|n| JacobiData::for_mode(ws, n))
            .collect::<Result<Vec<_>, _>>()?;
        let band_weights = (0..=m_max as i64)
            .map(|m| {
                (ws.lo..=ws.hi - m)
                    .map(|k| 1.0 / (ws.s(k) * ws.s(k + m)).sqrt())
                    .collect()
            })
            .collect();
        Ok(Self {
            ws: ws.clone(),
            m_max,
            band_weights,
            modes,
        })
    }

    pub fn lo(&self) -> i64 {
        self.ws.lo
    }
    pub fn hi(&self) -> i64 {
        self.ws.hi
    }
    pub fn domain(&self) -> DomainKind {
        self.ws.domain
    }

    /// `a⁽|b|⁾` on the window of band `b`.
    pub fn weights(&self, b: i64) -> &[f64] {
        &self.band_weights[b.unsigned_abs() as usize]
    }

    pub fn mode(&self, n: usize) -> &JacobiData {
        &self.modes[n]
    }

    /// `W⁽ᵐ⁾` on `[lo, lo+len)`.
    pub fn w_shift(&self, m: usize, len: usize) -> Vec<f64> {
        (0..len as i64)
            .map(|i| self.ws.w(self.lo() + i + m as i64))
            .collect()
    }

    pub fn zeros(&self) -> HilbertElement {
        HilbertElement::zeros(self.lo(), self.hi(), self.m_max)
    }

    pub fn from_fn(&self, mut f: impl FnMut(i64, i64) -> C64) -> HilbertElement {
        let mut x = self.zeros();
        for b in x.bands() {
            let v = x.band_mut(b);
            for i in 0..v.len() {
                v.values[i] = f(b, v.lo + i as i64);
            }
        }
        x
    }

    fn single_band(&self, b: i64, f: impl Fn(i64) -> C64) -> HilbertElement {
        self.from_fn(|bb, k| if bb == b { f(k) } else { ZERO })
    }

    /// The unit `1 = f₀(K)` with `f₀ ≡ 1`.
    pub fn identity(&self) -> HilbertElement {
        self.single_band(0, |_| C64::new(1.0, 0.0))
    }
    /// `U^m` for `m ≥ 0`, `(U*)^{−m}` for `m < 0`.
    pub fn u_power(&self, m: i64) -> HilbertElement {
        self.single_band(m, |_| C64::new(1.0, 0.0))
    }
    /// `U_W^n = (U W(K))^n`, i.e. `f_n(k) = ∏_{j<n} w_{k+j}`.
    pub fn uw_power(&self, n: usize) -> HilbertElement {
        self.single_band(n as i64, |k| {
            C64::new((0..n as i64).map(|j| self.ws.w(k + j)).product(), 0.0)
        })
    }
    /// `U_W* = W(K) U*`, i.e. `g_1(k) = w_k`.
    pub fn uw_star(&self) -> HilbertElement {
        self.single_band(-1, |k| C64::new(self.ws.w(k), 0.0))
    }

    pub fn check(&self, x: &HilbertElement) -> Result<(), FourierError> {
        if x.lo != self.lo() || x.hi != self.hi() || x.m_max != self.m_max {
            return Err(FourierError::WindowMismatch(format!(
                "element on [{}, {}] with m_max {}, space on [{}, {}] with m_max {}",
                x.lo,
                x.hi,
                x.m_max,
                self.lo(),
                self.hi(),
                self.m_max
            )));
        }
        for b in x.bands() {
            let v = x.band(b);
            let want = WeightRef::Mode(b.unsigned_abs() as usize);
            if v.weight_ref != want {
                return Err(FourierError::WeightRefMismatch(format!(
                    "band {b} carries {}, expected {want}",
                    v.weight_ref
                )));
            }
            if v.lo != self.lo() || v.len() != band_len(self.lo(), self.hi(), b) {
                return Err(FourierError::WindowMismatch(format!(
                    "band {b} has the wrong window"
                )));
            }
        }
        Ok(())
    }

    /// `‖x‖²_ℋ = Σ_b ‖x_b‖²_{a⁽|b|⁾}`
    pub fn norm_h_sq(&self, x: &HilbertElement) -> Result<f64, FourierError> {
        self.check(x)?;
        Ok(x.bands()
            .map(|b| crate::jacobi::weighted_norm_sq(x.band(b), self.weights(b)))
            .sum())
    }

    pub fn norm_h(&self, x: &HilbertElement) -> Result<f64, FourierError> {
        self.norm_h_sq(x).map(f64::sqrt)
    }

    /// `⟨x, y⟩_S` from the Fourier side, antilinear in `x`.
    pub fn inner(&self, x: &HilbertElement, y: &HilbertElement) -> Result<C64, FourierError> {
        self.check(x)?;
        self.check(y)?;
        Ok(x.bands()
            .map(|b| crate::jacobi::weighted_inner(x.band(b), y.band(b), self.weights(b)))
            .sum())
    }

    pub fn max_dim(&self) -> usize {
        (self.hi() - self.lo() + 1) as usize
    }

    /// `X[i][j] = f_{i−j}(lo+j)` below the diagonal, `g_{j−i}(lo+i)` above.
    pub fn to_matrix(
        &self,
        x: &HilbertElement,
        dim: usize,
    ) -> Result<TruncatedMatrix, FourierError> {
        self.check(x)?;
        if dim > self.max_dim() {
            return Err(FourierError::DimTooLarge {
                dim,
                max: self.max_dim(),
            });
        }
        let lo = self.lo();
        let mm = self.m_max as i64;
        let m = DMatrix::from_fn(dim, dim, |i, j| {
            let d = i as i64 - j as i64;
            if d > mm || -d > mm {
                ZERO
            } else if d >= 0 {
                x.get(d, lo + j as i64)
            } else {
                x.get(d, lo + i as i64)
            }
        });
        Ok(TruncatedMatrix { lo, entries: m })
    }

    /// Inverse of [`Self::to_matrix`] on the truncated index set; bands beyond
    /// `m_max` are dropped.
    pub fn from_matrix(&self, mat: &TruncatedMatrix) -> Result<HilbertElement, FourierError> {
        if mat.dim() > self.max_dim() {
            return Err(FourierError::DimTooLarge {
                dim: mat.dim(),
                max: self.max_dim(),
            });
        }
        if mat.lo != self.lo() {
            return Err(FourierError::WindowMismatch(format!(
                "matrix starts at {}, space at {}",
                mat.lo,
                self.lo()
            )));
        }
        let n = mat.dim() as i64;
        Ok(self.from_fn(|b, k| {
            let i = k - self.lo();
            let (r, c) = if b >= 0 { (i + b, i) } else { (i, i - b) };
            if r < n && c < n {
                mat.entries[(r as usize, c as usize)]
            } else {
                ZERO
            }
        }))
    }

    /// `⟨x, y⟩_S = tr(S^{1/2} Y S^{1/2} X*)` on a `dim × dim` truncation.
    pub fn inner_trace(
        &self,
        x: &HilbertElement,
        y: &HilbertElement,
        dim: usize,
    ) -> Result<C64, FourierError> {
        let xm = self.to_matrix(x, dim)?;
        let ym = self.to_matrix(y, dim)?;
        let rs: Vec<f64> = (0..dim as i64)
            .map(|i| self.ws.s(self.lo() + i).sqrt())
            .collect();
        let mut acc = ZERO;
        for j in 0..dim {
            for i in 0..dim {
                let yv = ym.entries[(i, j)];
                if yv != ZERO {
                    acc += rs[i] * rs[j] * yv * xm.entries[(i, j)].conj();
                }
            }
        }
        Ok(acc)
    }

    fn pad_to_band(&self, v: SeqVec, b: i64) -> SeqVec {
        v.rewindow(self.lo(), band_len(self.lo(), self.hi(), b))
            .with_ref(WeightRef::Mode(b.unsigned_abs() as usize))
    }

    fn times_w(&self, v: &SeqVec, m: usize) -> SeqVec {
        let w = self.w_shift(m, v.len());
        let mut out = v.clone();
        for (x, s) in out.values.iter_mut().zip(&w) {
            *x *= *s;
        }
        out
    }

    fn assemble(&self, parts: Vec<(i64, SeqVec)>) -> HilbertElement {
        let mut out = self.zeros();
        for (b, v) in parts {
            *out.band_mut(b) = v;
        }
        out
    }

    /// `Dx`, assembled mode by mode.
    pub fn apply_d(&self, x: &HilbertElement) -> Result<HilbertElement, FourierError> {
        self.check(x)?;
        let mm = self.m_max as i64;
        // (source band, target band)
        let jobs: Vec<(i64, i64)> = (0..mm)
            .map(|m| (m, m + 1))
            .chain((1..=mm).map(|n| (-n, -n + 1)))
            .collect();
        let parts = jobs
            .par_iter()
            .map(|&(src, dst)| -> Result<(i64, SeqVec), FourierError> {
                let v = x.band(src);
                let out = if src >= 0 {
                    let m = src as usize;
                    let d = self.mode(m);
                    let wf = self.times_w(v, m).rewindow(d.lo, d.len()).with_ref(d.a_ref);
                    d.apply_abar(&wf)?.scaled(C64::new(-1.0, 0.0))
                } else {
                    let n = (-src) as usize;
                    let d = self.mode(n - 1);
                    let g = v.rewindow(d.lo, d.len()).with_ref(d.a_prime_ref);
                    self.times_w(&d.apply_a(&g)?, n - 1)
                };
                Ok((dst, self.pad_to_band(out, dst)))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(self.assemble(parts))
    }

    /// `D̄x`, assembled mode by mode.
    pub fn apply_dbar(&self, x: &HilbertElement) -> Result<HilbertElement, FourierError> {
        self.check(x)?;
        let mm = self.m_max as i64;
        let jobs: Vec<(i64, i64)> = (1..=mm)
            .map(|m| (m, m - 1))
            .chain((0..mm).map(|n| (-n, -n - 1)))
            .collect();
        let parts = jobs
            .par_iter()
            .map(|&(src, dst)| -> Result<(i64, SeqVec), FourierError> {
                let v = x.band(src);
                let out = if src > 0 {
                    let m = src as usize;
                    let d = self.mode(m - 1);
                    let f = v.rewindow(d.lo, d.len()).with_ref(d.a_prime_ref);
                    self.times_w(&d.apply_a(&f)?, m - 1)
                        .scaled(C64::new(-1.0, 0.0))
                } else {
                    let n = (-src) as usize;
                    let d = self.mode(n);
                    let wg = self.times_w(v, n).rewindow(d.lo, d.len()).with_ref(d.a_ref);
                    d.apply_abar(&wg)?
                };
                Ok((dst, self.pad_to_band(out, dst)))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(self.assemble(parts))
    }

    /// Size of the terms entering each entry of `Dx` (or `D̄x`) before they
    /// cancel; rounding errors are relative to this.
    pub fn stencil_scale(
        &self,
        x: &HilbertElement,
        bar: bool,
    ) -> Result<HilbertElement, FourierError> {
        let abs = x.map_bands(|_, v| SeqVec {
            lo: v.lo,
            values: v.values.iter().map(|z| C64::new(z.norm(), 0.0)).collect(),
            weight_ref: v.weight_ref,
        });
        // the stencils are f(k) − c f(k±1) with 0 < c ≤ 1, so |f|(k) + |f|(k±1) bounds both terms
        let spread = abs.map_bands(|_, v| {
            SeqVec::from_fn(v.lo, v.len(), v.weight_ref, |k| {
                v.get(k - 1) + v.get(k) + v.get(k + 1)
            })
        });
        let image = if bar {
            self.dbar_abs(&spread)?
        } else {
            self.d_abs(&spread)?
        };
        Ok(image)
    }

    // |D| applied to a nonnegative element: the operators with the minus sign dropped
    fn d_abs(&self, x: &HilbertElement) -> Result<HilbertElement, FourierError> {
        let mut out = self.zeros();
        for m in 0..self.m_max {
            let v = x.band(m as i64);
            let dst = out.band_mut(m as i64 + 1);
            for k in dst.lo..=dst.hi() {
                let a = 1.0 / (self.ws.s(k) * self.ws.s(k + m as i64 + 1)).sqrt();
                dst.set(k, C64::new(a * self.ws.w(k + m as i64) * v.get(k).re, 0.0));
            }
        }
        for n in 1..=self.m_max as i64 {
            let v = x.band(-n);
            let dst = out.band_mut(-n + 1);
            for k in dst.lo..=dst.hi() {
                let a = 1.0 / (self.ws.s(k) * self.ws.s(k + n - 1)).sqrt();
                dst.set(k, C64::new(a * self.ws.w(k + n - 1) * v.get(k).re, 0.0));
            }
        }
        Ok(out)
    }

    fn dbar_abs(&self, x: &HilbertElement) -> Result<HilbertElement, FourierError> {
        let mut out = self.zeros();
        for m in 1..=self.m_max as i64 {
            let v = x.band(m);
            let dst = out.band_mut(m - 1);
            for k in dst.lo..=dst.hi() {
                let a = 1.0 / (self.ws.s(k) * self.ws.s(k + m - 1)).sqrt();
                dst.set(k, C64::new(a * self.ws.w(k + m - 1) * v.get(k).re, 0.0));
            }
        }
        for n in 0..self.m_max as i64 {
            let v = x.band(-n);
            let dst = out.band_mut(-n - 1);
            for k in dst.lo..=dst.hi() {
                let a = 1.0 / (self.ws.s(k) * self.ws.s(k + n + 1)).sqrt();
                dst.set(k, C64::new(a * self.ws.w(k + n + 1) * v.get(k).re, 0.0));
            }
        }
        Ok(out)
    }

    /// `U_W` truncated: `e_k ↦ w_k e_{k+1}`.
    pub fn uw_matrix(&self, dim: usize) -> DMatrix<C64> {
        DMatrix::from_fn(dim, dim, |i, j| {
            if i == j + 1 {
                C64::new(self.ws.w(self.lo() + j as i64), 0.0)
            } else {
                ZERO
            }
        })
    }

    fn s_inv_sqrt(&self, dim: usize) -> Vec<f64> {
        (0..dim as i64)
            .map(|i| 1.0 / self.ws.s(self.lo() + i).sqrt())
            .collect()
    }

    fn conjugate_s(&self, mut m: DMatrix<C64>) -> DMatrix<C64> {
        let r = self.s_inv_sqrt(m.nrows());
        for j in 0..m.ncols() {
            for i in 0..m.nrows() {
                m[(i, j)] *= r[i] * r[j];
            }
        }
        m
    }

    /// `S^{−1/2}[X, U_W]S^{−1/2}` on a `dim × dim` truncation.
    pub fn d_matrix(&self, x: &HilbertElement, dim: usize) -> Result<HilbertElement, FourierError> {
        let xm = self.to_matrix(x, dim)?.entries;
        let u = self.uw_matrix(dim);
        let c = self.conjugate_s(&xm * &u - &u * &xm);
        self.from_matrix(&TruncatedMatrix {
            lo: self.lo(),
            entries: c,
        })
    }

    /// `S^{−1/2}[X, W(K)U*]S^{−1/2}` on a `dim × dim` truncation.
    pub fn dbar_matrix(
        &self,
        x: &HilbertElement,
        dim: usize,
    ) -> Result<HilbertElement, FourierError> {
        let xm = self.to_matrix(x, dim)?.entries;
        let u = self.uw_matrix(dim).adjoint();
        let c = self.conjugate_s(&xm * &u - &u * &xm);
        self.from_matrix(&TruncatedMatrix {
            lo: self.lo(),
            entries: c,
        })
    }

    /// Largest `|x − y| / max(1, scale)` over entries at least `margin` away from
    /// both ends of each band and from the top of the `dim × dim` truncation.
    pub fn interior_diff(
        &self,
        x: &HilbertElement,
        y: &HilbertElement,
        scale: Option<&HilbertElement>,
        margin: usize,
        dim: usize,
    ) -> f64 {
        let m = margin as i64;
        let top = self.lo() + dim as i64 - 1;
        let mut worst = 0.0f64;
        for b in x.bands() {
            let v = x.band(b);
            let hi = (v.hi()).min(top - b.abs()) - m;
            for k in v.lo + m..=hi {
                let s = scale.map(|s| s.get(b, k).re).unwrap_or(0.0).max(1.0);
                worst = worst.max((x.get(b, k) - y.get(b, k)).norm() / s);
            }
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weight_model::{eval_weights, trace_s, WeightFamily};
    use rand::{Rng, SeedableRng};
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

    fn random(sp: &FourierSpace, rng: &mut ChaCha8Rng, margin: i64) -> HilbertElement {
        sp.from_fn(|b, k| {
            if k >= sp.lo() + margin && k <= sp.hi() - b.abs() - margin {
                C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            } else {
                ZERO
            }
        })
    }

    #[test]
    fn norms() {
        let sp = geo(120, 6);
        let one = sp.identity();
        let n1 = sp.norm_h_sq(&one).unwrap();
        assert!((n1 - trace_s(&sp.ws)).abs() < 1e-12);
        let u = sp.u_power(1);
        assert!((sp.norm_h_sq(&u).unwrap() - 0.5f64.sqrt()).abs() < 1e-12);
        assert_eq!(sp.norm_h_sq(&sp.zeros()).unwrap(), 0.0);
    }

    #[test]
    fn trace_side() {
        let sp = geo(60, 4);
        let dim = sp.max_dim();
        let one = sp.identity();
        let t = sp.inner_trace(&one, &one, dim).unwrap();
        assert!((t.re - sp.norm_h_sq(&one).unwrap()).abs() < 1e-14);
        let u = sp.u_power(1);
        let us = sp.u_power(-1);
        assert_eq!(sp.inner_trace(&u, &us, dim).unwrap(), ZERO);
        assert!((sp.inner_trace(&u, &u, dim).unwrap().re - 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn isometry_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for sp in [geo(50, 5), sig(25, 5)] {
            for _ in 0..10 {
                let x = random(&sp, &mut rng, 0);
                let f = sp.norm_h_sq(&x).unwrap();
                let t = sp.inner_trace(&x, &x, sp.max_dim()).unwrap();
                assert!((f - t.re).abs() <= 1e-12 * f && t.im.abs() <= 1e-12 * f);
            }
        }
    }

    #[test]
    fn matrix_round_trip() {
        let sp = sig(20, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let x = random(&sp, &mut rng, 0);
            let m = sp.to_matrix(&x, sp.max_dim()).unwrap();
            assert_eq!(sp.from_matrix(&m).unwrap(), x);
        }
        // U^m δ_l(K) is the single entry (l+m, l)
        let mut x = sp.zeros();
        x.band_mut(2).set(-3, C64::new(1.0, 0.0));
        let m = sp.to_matrix(&x, sp.max_dim()).unwrap();
        let nz: Vec<_> = (0..m.dim())
            .flat_map(|i| (0..m.dim()).map(move |j| (i, j)))
            .filter(|&(i, j)| m.entries[(i, j)] != ZERO)
            .collect();
        let l = (-3 - sp.lo()) as usize;
        assert_eq!(nz, vec![(l + 2, l)]);
        assert!(matches!(
            sp.to_matrix(&x, sp.max_dim() + 1),
            Err(FourierError::DimTooLarge { .. })
        ));
        let z = sp.to_matrix(&sp.zeros(), 10).unwrap();
        assert!(z.entries.iter().all(|v| *v == ZERO));
    }

    #[test]
    fn d_identities() {
        for sp in [geo(60, 8), sig(30, 8)] {
            let dim = sp.max_dim();
            let margin = sp.m_max;
            let x = sp.uw_star();
            let dx = sp.apply_d(&x).unwrap();
            let sc = sp.stencil_scale(&x, false).unwrap();
            assert!(sp.interior_diff(&dx, &sp.identity(), Some(&sc), margin, dim) < 1e-12);
            let dm = sp.d_matrix(&x, dim).unwrap();
            assert!(sp.interior_diff(&dx, &dm, Some(&sc), margin, dim) < 1e-12);
            for n in 0..=6 {
                let x = sp.uw_power(n);
                let dx = sp.apply_d(&x).unwrap();
                let sc = sp.stencil_scale(&x, false).unwrap();
                assert!(
                    sp.interior_diff(&dx, &sp.zeros(), Some(&sc), margin, dim) < 1e-12,
                    "n={n}"
                );
                let dm = sp.d_matrix(&x, dim).unwrap();
                assert!(
                    sp.interior_diff(&dm, &sp.zeros(), Some(&sc), margin, dim) < 1e-12,
                    "n={n}"
                );
            }
        }
    }

    #[test]
    fn d_matches_matrix_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for sp in [geo(40, 5), sig(20, 5)] {
            let dim = sp.max_dim();
            for _ in 0..5 {
                let x = random(&sp, &mut rng, 0);
                for bar in [false, true] {
                    let (a, b) = if bar {
                        (sp.apply_dbar(&x).unwrap(), sp.dbar_matrix(&x, dim).unwrap())
                    } else {
                        (sp.apply_d(&x).unwrap(), sp.d_matrix(&x, dim).unwrap())
                    };
                    let sc = sp.stencil_scale(&x, bar).unwrap();
                    let e = sp.interior_diff(&a, &b, Some(&sc), sp.m_max, dim);
                    assert!(e < 1e-12, "bar={bar}: {e}");
                }
            }
        }
    }

    #[test]
    fn dbar_bands() {
        let sp = geo(40, 6);
        let du = sp.apply_dbar(&sp.u_power(1)).unwrap();
        assert_eq!(du.support(), vec![0]);
        for n in 1..=4 {
            let d = sp.apply_dbar(&sp.u_power(-n)).unwrap();
            assert_eq!(d.support(), vec![-n - 1]);
        }
        assert_eq!(sp.apply_dbar(&sp.zeros()).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn commutation_bookkeeping() {
        // f(K)U = U f(K+1) on the truncation
        let dim = 20;
        let f: Vec<f64> = (0..dim).map(|i| (i as f64 * 0.7).sin() + 2.0).collect();
        let fk = DMatrix::from_fn(
            dim,
            dim,
            |i, j| if i == j { C64::new(f[i], 0.0) } else { ZERO },
        );
        let fk1 = DMatrix::from_fn(dim, dim, |i, j| {
            if i == j && i + 1 < dim {
                C64::new(f[i + 1], 0.0)
            } else {
                ZERO
            }
        });
        let u = DMatrix::from_fn(
            dim,
            dim,
            |i, j| if i == j + 1 { C64::new(1.0, 0.0) } else { ZERO },
        );
        let lhs = &fk * &u;
        let rhs = &u * &fk1;
        assert!((lhs - rhs).norm() < 1e-15);
    }

    #[test]
    fn pairing_duality() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for sp in [geo(50, 5), sig(25, 5)] {
            for _ in 0..10 {
                let x = random(&sp, &mut rng, 3).map_bands(|b, v| {
                    if b == 5 {
                        v.scaled(ZERO)
                    } else {
                        v.clone()
                    }
                });
                let y = random(&sp, &mut rng, 3).map_bands(|b, v| {
                    if b == -5 {
                        v.scaled(ZERO)
                    } else {
                        v.clone()
                    }
                });
                let l = sp.inner(&sp.apply_d(&x).unwrap(), &y).unwrap();
                let r = sp.inner(&x, &sp.apply_dbar(&y).unwrap()).unwrap();
                assert!((l - r).norm() < 1e-9 * (1.0 + l.norm()), "{l} vs {r}");
            }
        }
    }

    #[test]
    fn json_round_trip_and_mismatch() {
        let sp = geo(20, 3);
        let x = sp.uw_power(2);
        let back = HilbertElement::from_json(&x.to_json().unwrap()).unwrap();
        assert_eq!(back, x);
        let mut bad = x.clone();
        bad.holo[1].weight_ref = WeightRef::Mode(2);
        assert!(matches!(
            sp.norm_h(&bad),
            Err(FourierError::WeightRefMismatch(_))
        ));
    }
}
