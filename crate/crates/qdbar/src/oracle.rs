//! Dense ground truth for the analytic machinery.
//!
//! Operators are realized column by column on a window, ranks come from an
//! SVD with a guarded threshold. Boundary variants are densified by appending
//! the truncated limit functionals as extra rows, so `dim_ker = cols − rank`
//! and `dim_coker = rows − rank` hold for every variant.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use thiserror::Error;

use crate::jacobi::{BoundaryVariant, End, JacobiData, JacobiError, Op, SeqVec, C64};
use crate::weight_model::DomainKind;

/// Relative rank threshold.
pub const DEFAULT_TAU: f64 = 1e-8;
/// Minimum accepted ratio across the rank threshold.
pub const MIN_GAP: f64 = 1e2;
/// Condition numbers above this are refused by [`lsq_solve`].
pub const MAX_COND: f64 = 1e12;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("window mismatch: {0}")]
    WindowMismatch(String),
    #[error("no spectral gap at the rank threshold (ratio {ratio:.3e} at rank {rank})")]
    NoSpectralGap { rank: usize, ratio: f64 },
    #[error("ill-conditioned system (condition estimate {cond:.3e})")]
    IllConditioned { cond: f64 },
    #[error("non-finite entries in {0}")]
    NonFinite(String),
    #[error(transparent)]
    Jacobi(#[from] JacobiError),
}

#[derive(Clone, Debug)]
pub struct DenseBlock {
    pub rows: usize,
    pub cols: usize,
    pub entries: DMatrix<C64>,
    pub source: String,
    /// trailing rows holding limit functionals
    pub constraint_rows: usize,
}

impl DenseBlock {
    pub fn new(entries: DMatrix<C64>, source: impl Into<String>) -> Self {
        Self {
            rows: entries.nrows(),
            cols: entries.ncols(),
            entries,
            source: source.into(),
            constraint_rows: 0,
        }
    }

    /// Diagonal block, e.g. `W⁽ᵐ⁾` or `V⁽ᵐ⁾`.
    pub fn diagonal(values: &[f64], source: impl Into<String>) -> Self {
        let d = DVector::from_iterator(values.len(), values.iter().map(|&v| C64::new(v, 0.0)));
        Self::new(DMatrix::from_diagonal(&d), source)
    }

    /// Column `j` is `f(j)`.
    pub fn from_columns(
        rows: usize,
        cols: usize,
        source: impl Into<String>,
        mut f: impl FnMut(usize) -> Vec<C64>,
    ) -> Self {
        let mut m = DMatrix::zeros(rows, cols);
        for j in 0..cols {
            let col = f(j);
            assert_eq!(col.len(), rows, "column {j} has the wrong length");
            for (i, v) in col.into_iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        Self::new(m, source)
    }

    pub fn mul(&self, other: &DenseBlock) -> Result<DenseBlock, OracleError> {
        if self.cols != other.rows {
            return Err(OracleError::WindowMismatch(format!(
                "{} has {} columns, {} has {} rows",
                self.source, self.cols, other.source, other.rows
            )));
        }
        Ok(DenseBlock::new(
            &self.entries * &other.entries,
            format!("{}*{}", self.source, other.source),
        ))
    }

    /// Rows scaled to unit length; zero rows stay zero. Ranks are unchanged.
    pub fn equilibrated(&self) -> (DMatrix<C64>, Vec<f64>) {
        let mut m = self.entries.clone();
        let mut scale = vec![1.0; self.rows];
        for (i, sc) in scale.iter_mut().enumerate() {
            let n = m.row(i).norm();
            if n > 0.0 {
                *sc = 1.0 / n;
                m.row_mut(i).scale_mut(1.0 / n);
            }
        }
        (m, scale)
    }

    fn check_finite(&self) -> Result<(), OracleError> {
        if self
            .entries
            .iter()
            .all(|v| v.re.is_finite() && v.im.is_finite())
        {
            Ok(())
        } else {
            Err(OracleError::NonFinite(self.source.clone()))
        }
    }
}

/// Matrix of `op` on the whole window, with the rows that leave the window set to zero.
pub fn densify(data: &JacobiData, op: Op) -> Result<DenseBlock, OracleError> {
    let n = data.len();
    let r = data.domain_ref(op);
    let mut err = None;
    let block = DenseBlock::from_columns(n, n, op.to_string(), |j| {
        let e = SeqVec::delta(data.lo, n, r, data.lo + j as i64, C64::new(1.0, 0.0));
        match data.apply(op, &e) {
            Ok(v) => v.values,
            Err(e) => {
                err.get_or_insert(e);
                vec![C64::new(0.0, 0.0); n]
            }
        }
    });
    match err {
        Some(e) => Err(e.into()),
        None => Ok(block),
    }
}

/// Interior rows of `op`, followed by one unit-length row per imposed
/// vanishing condition, multiplied by `row_weight`.
pub fn densify_variant(
    data: &JacobiData,
    op: Op,
    v: BoundaryVariant,
    row_weight: f64,
) -> Result<DenseBlock, OracleError> {
    v.check(data.domain)?;
    let full = densify(data, op)?;
    let (r_lo, r_hi) = data.interior_rows(op);
    let first = (r_lo - data.lo) as usize;
    let count = (r_hi - r_lo + 1) as usize;
    let mut ends = Vec::new();
    if v.vanishes_plus() {
        ends.push(End::Plus);
    }
    if v.vanishes_minus() {
        ends.push(End::Minus);
    }
    let n = data.len();
    let mut m = DMatrix::zeros(count + ends.len(), n);
    m.rows_mut(0, count)
        .copy_from(&full.entries.rows(first, count));
    let r = data.domain_ref(op);
    for (e, end) in ends.iter().enumerate() {
        let mut row = vec![C64::new(0.0, 0.0); n];
        for (j, x) in row.iter_mut().enumerate() {
            let d = SeqVec::delta(data.lo, n, r, data.lo + j as i64, C64::new(1.0, 0.0));
            *x = limit_row_entry(data, op, &d, *end)?;
        }
        let nrm = row.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        for (j, x) in row.into_iter().enumerate() {
            m[(count + e, j)] = x * (row_weight / nrm);
        }
    }
    Ok(DenseBlock {
        rows: m.nrows(),
        cols: n,
        entries: m,
        source: crate::jacobi::variant_name(op, v),
        constraint_rows: ends.len(),
    })
}

// A single δ is usually outside the certified domain, so the raw closed form
// is used here; it is linear in the input.
fn limit_row_entry(data: &JacobiData, op: Op, d: &SeqVec, end: End) -> Result<C64, OracleError> {
    match data.limit_certified(op, d, end) {
        Ok(c) => Ok(c.value),
        Err(JacobiError::NotInDomain(_)) => Ok(uncertified_limit(data, op, d, end)?),
        Err(e) => Err(e.into()),
    }
}

fn uncertified_limit(data: &JacobiData, op: Op, d: &SeqVec, end: End) -> Result<C64, JacobiError> {
    // rebuild the data without tails; the closed form is then exact on the window
    let mut bare = data.clone();
    bare.a_tails = Default::default();
    bare.a_prime_tails = Default::default();
    bare.limit_certified(op, d, end).map(|c| c.value)
}

#[derive(Clone, Debug, Serialize)]
pub struct SvdSummary {
    pub singular_values: Vec<f64>,
    pub tau: f64,
    pub rank: usize,
    pub dim_ker: usize,
    pub dim_coker: usize,
    /// `σ_rank / σ_{rank+1}` (1-based); infinite when nothing falls below the threshold
    pub gap_ratio: f64,
}

/// Numerical kernel and cokernel dimensions at threshold `tau·σ_max`.
pub fn svd_dims(block: &DenseBlock, tau: f64) -> Result<SvdSummary, OracleError> {
    block.check_finite()?;
    let (m, _) = block.equilibrated();
    let mut sv: Vec<f64> = if m.nrows() == 0 || m.ncols() == 0 {
        Vec::new()
    } else {
        m.singular_values().iter().copied().collect()
    };
    sv.sort_by(|a, b| b.total_cmp(a));
    let smax = sv.first().copied().unwrap_or(0.0);
    let cut = tau * smax;
    let rank = sv.iter().filter(|&&s| s > cut).count();
    let gap_ratio = if rank == 0 || rank == sv.len() {
        f64::INFINITY
    } else {
        sv[rank - 1] / sv[rank].max(f64::MIN_POSITIVE)
    };
    if gap_ratio < MIN_GAP {
        return Err(OracleError::NoSpectralGap {
            rank,
            ratio: gap_ratio,
        });
    }
    Ok(SvdSummary {
        singular_values: sv,
        tau,
        rank,
        dim_ker: block.cols - rank,
        dim_coker: block.rows - rank,
        gap_ratio,
    })
}

/// Minimum-norm least-squares solution. With `col_weights`, the norm
/// minimized is `Σ |x_j|²/w_j`.
pub fn lsq_solve(
    block: &DenseBlock,
    rhs: &[C64],
    col_weights: Option<&[f64]>,
) -> Result<Vec<C64>, OracleError> {
    block.check_finite()?;
    if rhs.len() != block.rows {
        return Err(OracleError::WindowMismatch(format!(
            "rhs has {} entries, {} has {} rows",
            rhs.len(),
            block.source,
            block.rows
        )));
    }
    let (eq, scale) = block.equilibrated();
    let n = block.cols;
    // pad wide systems to square so the SVD exposes the whole null space
    let rows = block.rows.max(n);
    let mut m = DMatrix::zeros(rows, n);
    m.rows_mut(0, block.rows).copy_from(&eq);
    let mut b = DVector::zeros(rows);
    for (i, (v, s)) in rhs.iter().zip(&scale).enumerate() {
        b[i] = v * *s;
    }
    let svd = m.svd(true, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    if smax == 0.0 {
        return Ok(vec![C64::new(0.0, 0.0); n]);
    }
    let cut = DEFAULT_TAU * smax;
    // singular values just below the cut make the rank, and so the solution, ambiguous
    let ambiguous = svd
        .singular_values
        .iter()
        .copied()
        .filter(|&s| s <= cut)
        .fold(0.0, f64::max);
    if ambiguous * MAX_COND > smax {
        return Err(OracleError::IllConditioned {
            cond: smax / ambiguous,
        });
    }
    let x = svd
        .solve(&b, cut)
        .map_err(|e| OracleError::NonFinite(e.to_string()))?;
    let Some(w) = col_weights else {
        return Ok(x.iter().copied().collect());
    };
    // remove the null-space component in the weighted inner product
    let v_t = svd.v_t.as_ref().expect("computed with v");
    let null: Vec<DVector<C64>> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s <= cut)
        .map(|(i, _)| v_t.row(i).adjoint())
        .collect();
    if null.is_empty() {
        return Ok(x.iter().copied().collect());
    }
    let k = null.len();
    let winv = DVector::from_iterator(n, w.iter().map(|&x| C64::new(1.0 / x, 0.0)));
    let ip = |u: &DVector<C64>, v: &DVector<C64>| {
        u.iter()
            .zip(v.iter())
            .zip(winv.iter())
            .map(|((a, b), c)| a.conj() * b * c)
            .sum::<C64>()
    };
    let gram = DMatrix::from_fn(k, k, |i, j| ip(&null[i], &null[j]));
    let rhs_g = DVector::from_fn(k, |i, _| ip(&null[i], &x));
    let coef = gram.lu().solve(&rhs_g).ok_or(OracleError::IllConditioned {
        cond: f64::INFINITY,
    })?;
    let mut out = x;
    for (i, v) in null.iter().enumerate() {
        out -= v * coef[i];
    }
    Ok(out.iter().copied().collect())
}

/// `(dim Ker, dim Coker)` of a variant read from the dense realization.
pub fn variant_dims_numeric(
    data: &JacobiData,
    op: Op,
    v: BoundaryVariant,
) -> Result<(usize, usize), OracleError> {
    let s = svd_dims(&densify_variant(data, op, v, 1.0)?, DEFAULT_TAU)?;
    Ok((s.dim_ker, s.dim_coker))
}

/// Windows of the given length for the oracle: `[0, len)` on the disk,
/// centred on 0 for the annulus.
pub fn oracle_window(domain: DomainKind, len: usize) -> (i64, i64) {
    match domain {
        DomainKind::Disk => (0, len as i64 - 1),
        DomainKind::Annulus => {
            let h = len as i64 / 2;
            (-h, len as i64 - h - 1)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jacobi::{variant_dims, Parametrix};
    use crate::weight_model::{eval_weights, WeightFamily};

    fn geo(k: usize) -> crate::weight_model::WeightSequence {
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
    fn sig(k: usize) -> crate::weight_model::WeightSequence {
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
    fn bidiagonal_structure() {
        let d = JacobiData::for_mode(&geo(30), 0).unwrap();
        let b = densify(&d, Op::A).unwrap();
        for i in 0..b.rows {
            for j in 0..b.cols {
                let v = b.entries[(i, j)];
                let k = i as i64;
                if i == j {
                    assert!((v.re - d.a_at(k)).abs() < 1e-12 * d.a_at(k));
                } else if i == j + 1 {
                    assert!((v - (-d.a_at(k) * d.c_at(k - 1))).norm() < 1e-12 * d.a_at(k));
                } else {
                    assert_eq!(v, C64::new(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn dims_match_table() {
        let ws_d = geo(200);
        let ws_a = sig(120);
        for len in [40usize, 80] {
            for ws in [&ws_d, &ws_a] {
                let (lo, hi) = oracle_window(ws.domain, len);
                for n in [0usize, 1, 3] {
                    let d = JacobiData::for_mode_on(ws, n, lo, hi).unwrap();
                    for op in [Op::A, Op::Abar] {
                        for &v in BoundaryVariant::all_for(ws.domain) {
                            let num = variant_dims_numeric(&d, op, v).unwrap();
                            let ana = variant_dims(ws.domain, op, v).unwrap();
                            assert_eq!(num, ana, "{:?} {op} {v:?} len {len} mode {n}", ws.domain);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn dims_insensitive_to_row_weight() {
        let ws = sig(60);
        let d = JacobiData::for_mode_on(&ws, 1, -20, 19).unwrap();
        for w in [1e-2, 1.0, 1e2] {
            for &v in BoundaryVariant::all_for(DomainKind::Annulus) {
                let s = svd_dims(&densify_variant(&d, Op::A, v, w).unwrap(), DEFAULT_TAU).unwrap();
                assert_eq!(
                    (s.dim_ker, s.dim_coker),
                    variant_dims(DomainKind::Annulus, Op::A, v).unwrap()
                );
            }
        }
    }

    #[test]
    fn identity_dims() {
        let b = DenseBlock::diagonal(&[1.0; 5], "I");
        let s = svd_dims(&b, DEFAULT_TAU).unwrap();
        assert_eq!((s.dim_ker, s.dim_coker), (0, 0));
    }

    #[test]
    fn limit_rows_match_closed_form() {
        let d = JacobiData::for_mode_on(&geo(200), 0, 0, 59).unwrap();
        let b = densify_variant(&d, Op::Abar, BoundaryVariant::ZeroPlus, 1.0).unwrap();
        let omega = d.omega_plus();
        let row = b.entries.row(b.rows - 1);
        let via_row: C64 = omega
            .values
            .iter()
            .enumerate()
            .map(|(j, x)| row[j] * x)
            .sum();
        // Ω has limit 1; the row is the limit functional up to its normalization
        let scale: C64 = (0..b.cols)
            .map(|j| {
                let e = SeqVec::delta(0, b.cols, d.a_ref, j as i64, C64::new(1.0, 0.0));
                uncertified_limit(&d, Op::Abar, &e, End::Plus)
                    .unwrap()
                    .norm_sqr()
            })
            .sum::<f64>()
            .sqrt()
            .into();
        assert!((via_row * scale - C64::new(1.0, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn solve_matches_t_column() {
        let d = JacobiData::for_mode_on(&geo(200), 0, 0, 59).unwrap();
        let b = densify(&d, Op::A).unwrap();
        let mut rhs = vec![C64::new(0.0, 0.0); b.rows];
        rhs[0] = C64::new(d.a_at(0), 0.0);
        let x = lsq_solve(&b, &rhs, Some(d.a_prime())).unwrap();
        let g = SeqVec::delta(0, d.len(), d.a_ref, 0, C64::new(d.a_at(0), 0.0));
        let t = d.apply_parametrix(Parametrix::T, &g).unwrap();
        for (u, v) in x.iter().zip(&t.values) {
            assert!((u - v).norm() < 1e-9);
        }
        let zero = lsq_solve(&b, &vec![C64::new(0.0, 0.0); b.rows], None).unwrap();
        assert!(zero.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn bilateral_solve_residual() {
        let ws = sig(60);
        let d = JacobiData::for_mode_on(&ws, 0, -20, 19).unwrap();
        let b = densify_variant(&d, Op::A, BoundaryVariant::Full, 1.0).unwrap();
        let rhs: Vec<C64> = (0..b.rows)
            .map(|i| C64::new((i as f64).sin(), (i as f64 * 0.3).cos()))
            .collect();
        let x = lsq_solve(&b, &rhs, Some(d.a_prime())).unwrap();
        let xv = DVector::from_vec(x);
        let r = &b.entries * xv - DVector::from_vec(rhs.clone());
        let (_, scale) = b.equilibrated();
        let rel = r
            .iter()
            .zip(&scale)
            .map(|(v, s)| (v * *s).norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!(rel < 1e-10, "{rel}");
    }

    #[test]
    fn composition_is_matrix_product() {
        let ws = geo(200);
        let d = JacobiData::for_mode_on(&ws, 2, 0, 39).unwrap();
        let n = d.len();
        let v: Vec<f64> = (0..n as i64).map(|k| 1.0 / ws.w(k + 2)).collect();
        let vb = DenseBlock::diagonal(&v, "V");
        let tb = DenseBlock::from_columns(n, n, "Tbar", |j| {
            let e = SeqVec::delta(0, n, d.a_prime_ref, j as i64, C64::new(1.0, 0.0));
            d.apply_parametrix(Parametrix::Tbar, &e).unwrap().values
        });
        let prod = vb.mul(&tb).unwrap();
        let direct = DenseBlock::from_columns(n, n, "VTbar", |j| {
            let e = SeqVec::delta(0, n, d.a_prime_ref, j as i64, C64::new(1.0, 0.0));
            let t = d.apply_parametrix(Parametrix::Tbar, &e).unwrap();
            t.values.iter().zip(&v).map(|(x, s)| x * *s).collect()
        });
        let diff = (&prod.entries - &direct.entries).norm() / direct.entries.norm();
        assert!(diff < 1e-13);
    }
}
