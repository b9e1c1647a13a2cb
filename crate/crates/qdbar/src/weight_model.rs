//! Weight families for the weighted shift `U_W e_k = w_k e_{k+1}` and the
//! sequences derived from them.
//!
//! A [`WeightSequence`] stores `w_k` on a finite window together with the
//! quantities needed to bound everything that lives outside it: the gaps
//! `(w⁺)² − w_k²` and `w_k² − (w⁻)²` are evaluated from closed forms so that
//! tails of `Σ s_k` and of `Σ log c_k` telescope without cancellation.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum WeightError {
    #[error("invalid family parameters: {0}")]
    InvalidFamilyParams(String),
    #[error("window too small: mode {n} needs more than the window [{lo}, {hi}]")]
    WindowTooSmall { n: usize, lo: i64, hi: i64 },
    #[error("weight conditions fail: {0}")]
    ConditionsFailed(String),
    #[error("custom weight table: {0}")]
    Table(String),
    #[error("io error reading {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainKind {
    /// Index set ℕ, unilateral shift.
    Disk,
    /// Index set ℤ, bilateral shift.
    Annulus,
}

impl fmt::Display for DomainKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DomainKind::Disk => write!(f, "disk"),
            DomainKind::Annulus => write!(f, "annulus"),
        }
    }
}

/// Tabulated weights. `values[i]` is `w_{first + i}`.
///
/// On the annulus the first entry plays the role of `w_{lo−1}` and the
/// window starts one index later.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CustomWeights {
    pub first: i64,
    pub values: Vec<f64>,
    pub w_plus: f64,
    pub w_minus: Option<f64>,
    pub eps: Option<f64>,
}

impl CustomWeights {
    /// Reads a two-column `k,w_k` CSV (header optional).
    pub fn from_csv(
        path: &Path,
        w_plus: f64,
        w_minus: Option<f64>,
        eps: Option<f64>,
    ) -> Result<Self, WeightError> {
        let file = std::fs::File::open(path).map_err(|source| WeightError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(file);
        let mut rows: Vec<(i64, f64)> = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| WeightError::Table(e.to_string()))?;
            if rec.len() < 2 {
                return Err(WeightError::Table(format!(
                    "expected 2 columns, got {}",
                    rec.len()
                )));
            }
            let (Ok(k), Ok(w)) = (rec[0].parse::<i64>(), rec[1].parse::<f64>()) else {
                if rows.is_empty() {
                    continue; // header line
                }
                return Err(WeightError::Table(format!("unparsable row {:?}", rec)));
            };
            rows.push((k, w));
        }
        Self::from_pairs(&rows, w_plus, w_minus, eps)
    }

    pub fn from_pairs(
        rows: &[(i64, f64)],
        w_plus: f64,
        w_minus: Option<f64>,
        eps: Option<f64>,
    ) -> Result<Self, WeightError> {
        let Some(&(first, _)) = rows.first() else {
            return Err(WeightError::Table("empty table".into()));
        };
        for (i, &(k, _)) in rows.iter().enumerate() {
            if k != first + i as i64 {
                return Err(WeightError::Table(format!(
                    "indices must be consecutive, found {k}"
                )));
            }
        }
        Ok(Self {
            first,
            values: rows.iter().map(|r| r.1).collect(),
            w_plus,
            w_minus,
            eps,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightFamily {
    /// `w_k² = ρ₊²(1 − q^{k+1})`, `0 < q < 1`.
    GeometricDisk {
        rho_plus: f64,
        q: f64,
    },
    /// `w_k² = ρ₋² + (ρ₊² − ρ₋²)·q^k/(1 + q^k)`, `q > 1`.
    SigmoidAnnulus {
        rho_minus: f64,
        rho_plus: f64,
        q: f64,
    },
    Custom(CustomWeights),
}

/// Serialized form of a family; custom families point at a CSV file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FamilySpec {
    GeometricDisk {
        rho_plus: f64,
        q: f64,
    },
    SigmoidAnnulus {
        rho_minus: f64,
        rho_plus: f64,
        q: f64,
    },
    Custom {
        csv: PathBuf,
        w_plus: f64,
        #[serde(default)]
        w_minus: Option<f64>,
        #[serde(default)]
        eps: Option<f64>,
    },
}

impl FamilySpec {
    /// Relative CSV paths are resolved against `base`.
    pub fn resolve(&self, base: &Path) -> Result<WeightFamily, WeightError> {
        Ok(match self {
            FamilySpec::GeometricDisk { rho_plus, q } => WeightFamily::GeometricDisk {
                rho_plus: *rho_plus,
                q: *q,
            },
            FamilySpec::SigmoidAnnulus {
                rho_minus,
                rho_plus,
                q,
            } => WeightFamily::SigmoidAnnulus {
                rho_minus: *rho_minus,
                rho_plus: *rho_plus,
                q: *q,
            },
            FamilySpec::Custom {
                csv,
                w_plus,
                w_minus,
                eps,
            } => {
                let path = if csv.is_absolute() {
                    csv.clone()
                } else {
                    base.join(csv)
                };
                WeightFamily::Custom(CustomWeights::from_csv(&path, *w_plus, *w_minus, *eps)?)
            }
        })
    }
}

impl WeightFamily {
    pub fn label(&self) -> String {
        match self {
            WeightFamily::GeometricDisk { rho_plus, q } => {
                format!("geometric_disk(rho_plus={rho_plus}, q={q})")
            }
            WeightFamily::SigmoidAnnulus {
                rho_minus,
                rho_plus,
                q,
            } => {
                format!("sigmoid_annulus(rho_minus={rho_minus}, rho_plus={rho_plus}, q={q})")
            }
            WeightFamily::Custom(c) => {
                format!("custom({} values from k={})", c.values.len(), c.first)
            }
        }
    }

    fn check(&self, domain: DomainKind) -> Result<(), WeightError> {
        let bad = |m: String| Err(WeightError::InvalidFamilyParams(m));
        match *self {
            WeightFamily::GeometricDisk { rho_plus, q } => {
                if !(rho_plus > 0.0 && rho_plus.is_finite()) {
                    return bad(format!("rho_plus must be positive, got {rho_plus}"));
                }
                if !(q > 0.0 && q < 1.0) {
                    return bad(format!("q must lie in (0,1), got {q}"));
                }
                if domain == DomainKind::Annulus {
                    return bad("geometric_disk is only defined on the disk".into());
                }
            }
            WeightFamily::SigmoidAnnulus {
                rho_minus,
                rho_plus,
                q,
            } => {
                if !(rho_minus > 0.0 && rho_minus.is_finite()) {
                    return bad(format!("rho_minus must be positive, got {rho_minus}"));
                }
                if !(rho_plus > rho_minus && rho_plus.is_finite()) {
                    return bad(format!(
                        "need rho_plus > rho_minus, got {rho_plus} <= {rho_minus}"
                    ));
                }
                if !(q > 1.0 && q.is_finite()) {
                    return bad(format!("q must exceed 1, got {q}"));
                }
            }
            WeightFamily::Custom(ref c) => {
                if !(c.w_plus > 0.0 && c.w_plus.is_finite()) {
                    return bad("custom families must declare a positive w_plus".into());
                }
                if domain == DomainKind::Annulus {
                    match c.w_minus {
                        Some(m) if m > 0.0 && m <= c.w_plus => {}
                        _ => {
                            return bad(
                                "custom annulus families must declare 0 < w_minus <= w_plus".into(),
                            )
                        }
                    }
                }
                if c.values.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
                    return bad("custom weights must be finite and positive".into());
                }
            }
        }
        Ok(())
    }
}

/// Per-index data produced by a family.
struct Sample {
    w: f64,
    /// `(w⁺)² − w_k²`
    deficit: f64,
    /// `w_k² − (w⁻)²`, zero on the disk
    excess: f64,
}

fn sample(family: &WeightFamily, k: i64) -> Sample {
    match *family {
        WeightFamily::GeometricDisk { rho_plus, q } => {
            let r2 = rho_plus * rho_plus;
            let deficit = r2 * q.powf((k + 1) as f64);
            Sample {
                w: (r2 - deficit).sqrt(),
                deficit,
                excess: 0.0,
            }
        }
        WeightFamily::SigmoidAnnulus {
            rho_minus,
            rho_plus,
            q,
        } => {
            let delta = rho_plus * rho_plus - rho_minus * rho_minus;
            // q^k/(1+q^k) and 1/(1+q^k) written to avoid overflow for large |k|
            let qk = q.powf(k as f64);
            let upper = delta / (1.0 + qk);
            let lower = delta / (1.0 + 1.0 / qk);
            let w2 = if k >= 0 {
                rho_plus * rho_plus - upper
            } else {
                rho_minus * rho_minus + lower
            };
            Sample {
                w: w2.sqrt(),
                deficit: upper,
                excess: lower,
            }
        }
        WeightFamily::Custom(ref c) => {
            let w = c.values[(k - c.first) as usize];
            let m = c.w_minus.unwrap_or(0.0);
            Sample {
                w,
                deficit: c.w_plus * c.w_plus - w * w,
                excess: w * w - m * m,
            }
        }
    }
}

fn sigmoid_s(delta: f64, q: f64, k: i64) -> f64 {
    // Δ(q−1)t/((1+t)(q+t)), t = q^k, in terms of u = q^{-|k|}
    let u = q.powf(-(k.abs() as f64));
    if k >= 0 {
        delta * (q - 1.0) * u / ((1.0 + u) * (1.0 + q * u))
    } else {
        delta * (q - 1.0) * u / ((1.0 + u) * (q + u))
    }
}

/// An enclosure `[lo, hi]` for a quantity whose finite part was summed on a
/// window and whose remainder is bounded analytically.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Enclosure {
    pub lo: f64,
    pub hi: f64,
}

impl Enclosure {
    pub fn new(window_sum: f64, tail: f64) -> Self {
        Self {
            lo: window_sum,
            hi: window_sum + tail,
        }
    }
    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
    pub fn contains(&self, x: f64, tol: f64) -> bool {
        x >= self.lo - tol && x <= self.hi + tol
    }
}

#[derive(Clone, Debug)]
pub struct WeightSequence {
    pub domain: DomainKind,
    pub family: WeightFamily,
    /// first index of the window
    pub lo: i64,
    /// last index of the window
    pub hi: i64,
    w: Vec<f64>,
    s: Vec<f64>,
    deficit: Vec<f64>,
    excess: Vec<f64>,
    /// `w_{lo−1}` (zero on the disk)
    pub w_below: f64,
    excess_below: f64,
    pub eps: f64,
    pub w_plus: f64,
    /// `None` on the disk.
    pub w_minus: Option<f64>,
}

/// Evaluates a family on `[0, k_max]` (disk) or `[−k_max, k_max]` (annulus).
///
/// Custom tables are clipped to that window.
pub fn eval_weights(
    family: &WeightFamily,
    domain: DomainKind,
    k_max: usize,
) -> Result<WeightSequence, WeightError> {
    if k_max < 4 {
        return Err(WeightError::InvalidFamilyParams(format!(
            "k_max must be at least 4, got {k_max}"
        )));
    }
    family.check(domain)?;
    let k_max = k_max as i64;
    let (mut lo, mut hi) = match domain {
        DomainKind::Disk => (0, k_max),
        DomainKind::Annulus => (-k_max, k_max),
    };
    if let WeightFamily::Custom(c) = family {
        let first_usable = match domain {
            DomainKind::Disk => c.first,
            DomainKind::Annulus => c.first + 1,
        };
        let last = c.first + c.values.len() as i64 - 1;
        if domain == DomainKind::Disk && c.first != 0 {
            return Err(WeightError::Table("disk tables must start at k = 0".into()));
        }
        lo = lo.max(first_usable);
        hi = hi.min(last);
        if hi - lo + 1 < 2 {
            return Err(WeightError::Table(
                "table too short for a window of length 2".into(),
            ));
        }
    }
    let samples: Vec<Sample> = (lo..=hi).map(|k| sample(family, k)).collect();
    let (w_below, excess_below) = match domain {
        DomainKind::Disk => (0.0, 0.0),
        DomainKind::Annulus => {
            let b = sample(family, lo - 1);
            (b.w, b.excess)
        }
    };
    let w: Vec<f64> = samples.iter().map(|x| x.w).collect();
    let s: Vec<f64> = match *family {
        WeightFamily::GeometricDisk { rho_plus, q } => (lo..=hi)
            .map(|k| rho_plus * rho_plus * (1.0 - q) * q.powf(k as f64))
            .collect(),
        WeightFamily::SigmoidAnnulus {
            rho_minus,
            rho_plus,
            q,
        } => {
            let delta = rho_plus * rho_plus - rho_minus * rho_minus;
            (lo..=hi).map(|k| sigmoid_s(delta, q, k)).collect()
        }
        WeightFamily::Custom(_) => {
            let mut prev = w_below;
            w.iter()
                .map(|&x| {
                    let d = x * x - prev * prev;
                    prev = x;
                    d
                })
                .collect()
        }
    };
    let (w_plus, w_minus, eps) = match family {
        WeightFamily::GeometricDisk { rho_plus, .. } => (*rho_plus, None, w[0]),
        WeightFamily::SigmoidAnnulus {
            rho_minus,
            rho_plus,
            ..
        } => match domain {
            DomainKind::Disk => (*rho_plus, None, w[0]),
            DomainKind::Annulus => (*rho_plus, Some(*rho_minus), *rho_minus),
        },
        WeightFamily::Custom(c) => {
            let wm = if domain == DomainKind::Annulus {
                c.w_minus
            } else {
                None
            };
            let min_w = w.iter().cloned().fold(f64::INFINITY, f64::min);
            let eps = c.eps.or(wm).unwrap_or(min_w);
            (c.w_plus, wm, eps)
        }
    };
    Ok(WeightSequence {
        domain,
        family: family.clone(),
        lo,
        hi,
        deficit: samples.iter().map(|x| x.deficit).collect(),
        excess: samples.iter().map(|x| x.excess).collect(),
        w,
        s,
        w_below,
        excess_below,
        eps,
        w_plus,
        w_minus,
    })
}

impl WeightSequence {
    pub fn len(&self) -> usize {
        self.w.len()
    }
    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }
    fn idx(&self, k: i64) -> usize {
        assert!(
            k >= self.lo && k <= self.hi,
            "index {k} outside [{}, {}]",
            self.lo,
            self.hi
        );
        (k - self.lo) as usize
    }
    /// `w_k`; on the disk `w(−1) = 0`.
    pub fn w(&self, k: i64) -> f64 {
        if k == self.lo - 1 {
            return self.w_below;
        }
        self.w[self.idx(k)]
    }
    pub fn s(&self, k: i64) -> f64 {
        self.s[self.idx(k)]
    }
    pub fn weights(&self) -> &[f64] {
        &self.w
    }
    pub fn s_values(&self) -> &[f64] {
        &self.s
    }
    /// `(w⁺)² − w_k²`, evaluated from the closed form where one exists.
    pub fn deficit(&self, k: i64) -> f64 {
        self.deficit[self.idx(k)]
    }
    /// `w_k² − (w⁻)²`; `k = lo − 1` is allowed.
    pub fn excess(&self, k: i64) -> f64 {
        if k == self.lo - 1 {
            return self.excess_below;
        }
        self.excess[self.idx(k)]
    }
    /// `ln(w_k / w⁺)` without cancellation.
    pub fn ln_rel_plus(&self, k: i64) -> f64 {
        0.5 * (-self.deficit(k) / (self.w_plus * self.w_plus)).ln_1p()
    }
    /// `ln(w_k / w⁻)`; annulus only.
    pub fn ln_rel_minus(&self, k: i64) -> f64 {
        let m = self
            .w_minus
            .expect("w_minus is only defined on the annulus");
        0.5 * (self.excess(k) / (m * m)).ln_1p()
    }
    /// `ln(w_k / w_{k+d})`, picking the side whose limit is closer.
    pub fn ln_ratio(&self, k: i64, d: i64) -> f64 {
        if self.domain == DomainKind::Annulus && k + d <= 0 {
            self.ln_rel_minus(k) - self.ln_rel_minus(k + d)
        } else {
            self.ln_rel_plus(k) - self.ln_rel_plus(k + d)
        }
    }
    /// `inf_k w_k`: `w_0` on the disk, `w⁻` on the annulus.
    pub fn w_inf(&self) -> f64 {
        match self.domain {
            DomainKind::Disk => self.w[0],
            DomainKind::Annulus => self.w_minus.unwrap_or(self.eps),
        }
    }

    /// The same sequence on the smaller window `[0, k_max]` or `[−k_max, k_max]`.
    pub fn restrict(&self, k_max: usize) -> Result<WeightSequence, WeightError> {
        let k_max = k_max as i64;
        let (lo, hi) = match self.domain {
            DomainKind::Disk => (0, k_max.min(self.hi)),
            DomainKind::Annulus => ((-k_max).max(self.lo), k_max.min(self.hi)),
        };
        if hi - lo + 1 < 2 {
            return Err(WeightError::WindowTooSmall { n: 0, lo, hi });
        }
        let a = (lo - self.lo) as usize;
        let b = (hi - self.lo) as usize + 1;
        let (w_below, excess_below) = if lo == self.lo {
            (self.w_below, self.excess_below)
        } else {
            (self.w(lo - 1), self.excess(lo - 1))
        };
        Ok(WeightSequence {
            domain: self.domain,
            family: self.family.clone(),
            lo,
            hi,
            w: self.w[a..b].to_vec(),
            s: self.s[a..b].to_vec(),
            deficit: self.deficit[a..b].to_vec(),
            excess: self.excess[a..b].to_vec(),
            w_below,
            excess_below,
            eps: self.eps,
            w_plus: self.w_plus,
            w_minus: self.w_minus,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionResult {
    pub pass: bool,
    /// first violating index
    pub witness: Option<i64>,
}

impl ConditionResult {
    fn from_first(witness: Option<i64>) -> Self {
        Self {
            pass: witness.is_none(),
            witness,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub window: (i64, i64),
    pub eps: f64,
    /// `w_k ≥ ε > 0`
    pub condition_1: ConditionResult,
    /// `s_k ≥ 0`
    pub condition_2: ConditionResult,
    /// `s_k > 0`
    pub condition_3: ConditionResult,
    /// `w_k ≤ w⁺`, and `w_k ≥ w⁻` on the annulus
    pub limits: ConditionResult,
}

impl ValidationReport {
    pub fn all_pass(&self) -> bool {
        self.condition_1.pass && self.condition_2.pass && self.condition_3.pass && self.limits.pass
    }
    pub fn failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (name, c) in [
            ("Condition 1", &self.condition_1),
            ("Condition 2", &self.condition_2),
            ("Condition 3", &self.condition_3),
            ("limits", &self.limits),
        ] {
            if !c.pass {
                out.push(format!(
                    "{name} fails at k = {}",
                    c.witness.unwrap_or_default()
                ));
            }
        }
        out
    }
}

pub fn validate_conditions(ws: &WeightSequence) -> ValidationReport {
    let ks = || ws.lo..=ws.hi;
    let c1 = ks().find(|&k| !(ws.eps > 0.0 && ws.w(k) >= ws.eps));
    let c2 = ks().find(|&k| ws.s(k) < 0.0);
    let c3 = ks().find(|&k| ws.s(k) <= 0.0);
    let lim = ks().find(|&k| {
        let w = ws.w(k);
        w > ws.w_plus || ws.w_minus.is_some_and(|m| w < m)
    });
    ValidationReport {
        window: (ws.lo, ws.hi),
        eps: ws.eps,
        condition_1: ConditionResult::from_first(c1),
        condition_2: ConditionResult::from_first(c2),
        condition_3: ConditionResult::from_first(c3),
        limits: ConditionResult::from_first(lim),
    }
}

/// `a⁽ⁿ⁾`, `c⁽ⁿ⁾` and the constants `C⁽ⁿ⁾`, `K⁽ⁿ⁾` for one Fourier mode.
#[derive(Clone, Debug)]
pub struct ModeData {
    pub n: usize,
    pub domain: DomainKind,
    pub lo: i64,
    /// `a_n` lives on `[lo, a_hi]`
    pub a_hi: i64,
    /// `c_n` lives on `[lo, c_hi]`, `c_hi = a_hi − 1`
    pub c_hi: i64,
    pub a: Vec<f64>,
    pub c: Vec<f64>,
    pub ln_c: Vec<f64>,
    /// `Σ 1/a⁽ⁿ⁾(k)` over ℕ or ℤ
    pub c_sum: Enclosure,
    /// `∏ 1/c⁽ⁿ⁾(k)`, exact by telescoping
    pub k_const: f64,
    /// `Σ_{k > c_hi} ln c⁽ⁿ⁾(k)`
    pub ln_c_tail_plus: f64,
    /// `Σ_{k < lo} ln c⁽ⁿ⁾(k)`, zero on the disk
    pub ln_c_tail_minus: f64,
}

impl ModeData {
    pub fn a_at(&self, k: i64) -> f64 {
        self.a[(k - self.lo) as usize]
    }
    pub fn c_at(&self, k: i64) -> f64 {
        self.c[(k - self.lo) as usize]
    }
}

/// Upper bound for `Σ_{k>top} √(s_k s_{k+n})` by Cauchy–Schwarz and telescoping.
pub(crate) fn upper_tail(ws: &WeightSequence, top: i64, n: i64) -> f64 {
    (ws.deficit(top) * ws.deficit(top + n)).max(0.0).sqrt()
}

/// Upper bound for `Σ_{k<bottom} √(s_k s_{k+n})`.
pub(crate) fn lower_tail(ws: &WeightSequence, bottom: i64, n: i64) -> f64 {
    match ws.domain {
        DomainKind::Disk => 0.0,
        DomainKind::Annulus => (ws.excess(bottom - 1) * ws.excess(bottom + n - 1))
            .max(0.0)
            .sqrt(),
    }
}

/// `Σ_{k>top} ln(w_k/w_{k+n+1})`, exact.
pub(crate) fn ln_c_tail_plus(ws: &WeightSequence, top: i64, n: i64) -> f64 {
    (top + 1..=top + n + 1).map(|k| ws.ln_rel_plus(k)).sum()
}

/// `Σ_{k<bottom} ln(w_k/w_{k+n+1})`, exact.
pub(crate) fn ln_c_tail_minus(ws: &WeightSequence, bottom: i64, n: i64) -> f64 {
    match ws.domain {
        DomainKind::Disk => 0.0,
        DomainKind::Annulus => -(bottom..=bottom + n)
            .map(|k| ws.ln_rel_minus(k))
            .sum::<f64>(),
    }
}

pub fn mode_data(ws: &WeightSequence, n: usize) -> Result<ModeData, WeightError> {
    let ni = n as i64;
    let a_hi = ws.hi - ni;
    let c_hi = a_hi - 1;
    if c_hi < ws.lo + 1 {
        return Err(WeightError::WindowTooSmall {
            n,
            lo: ws.lo,
            hi: ws.hi,
        });
    }
    let a: Vec<f64> = (ws.lo..=a_hi)
        .map(|k| 1.0 / (ws.s(k) * ws.s(k + ni)).sqrt())
        .collect();
    let ln_c: Vec<f64> = (ws.lo..=c_hi).map(|k| ws.ln_ratio(k, ni + 1)).collect();
    let c: Vec<f64> = (ws.lo..=c_hi).map(|k| ws.w(k) / ws.w(k + ni + 1)).collect();
    let window_sum: f64 = a.iter().map(|x| 1.0 / x).sum();
    let tail = upper_tail(ws, a_hi, ni) + lower_tail(ws, ws.lo, ni);
    let k_const = match ws.domain {
        DomainKind::Disk => (-(0..=ni).map(|k| ws.ln_rel_plus(k)).sum::<f64>()).exp(),
        DomainKind::Annulus => {
            let m = ws.w_minus.expect("annulus sequences carry w_minus");
            (ws.w_plus / m).powi(ni as i32 + 1)
        }
    };
    Ok(ModeData {
        n,
        domain: ws.domain,
        lo: ws.lo,
        a_hi,
        c_hi,
        a,
        c,
        ln_c,
        c_sum: Enclosure::new(window_sum, tail),
        k_const,
        ln_c_tail_plus: ln_c_tail_plus(ws, c_hi, ni),
        ln_c_tail_minus: ln_c_tail_minus(ws, ws.lo, ni),
    })
}

/// `tr S` as window sum plus closed-form tails.
///
/// Telescoping gives `(w⁺)²` on the disk and `(w⁺)² − (w⁻)²` on the annulus.
pub fn trace_s(ws: &WeightSequence) -> f64 {
    if ws.is_empty() {
        return 0.0;
    }
    let window: f64 = ws.s.iter().sum();
    let upper = ws.deficit(ws.hi);
    let lower = match ws.domain {
        DomainKind::Disk => 0.0,
        DomainKind::Annulus => ws.excess(ws.lo - 1),
    };
    window + upper + lower
}

/// Smallest `n₀ ≤ n_max` with `C⁽ⁿ⁾ < C⁽⁰⁾/2` for every `n₀ ≤ n ≤ n_max`.
pub fn decay_onset(ws: &WeightSequence, n_max: usize) -> Result<Option<usize>, WeightError> {
    let c0 = mode_data(ws, 0)?.c_sum.hi;
    let mut onset = None;
    for n in 0..=n_max {
        let cn = mode_data(ws, n)?.c_sum.hi;
        if cn < 0.5 * c0 {
            onset.get_or_insert(n);
        } else {
            onset = None;
        }
    }
    Ok(onset)
}
