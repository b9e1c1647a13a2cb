use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::Serialize;

use super::*;

fn rand_c<R: Rng>(rng: &mut R) -> C64 {
    C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

impl JacobiData {
    /// Entries uniform in the unit square on `[lo+margin, hi−margin]`.
    pub fn random_compact<R: Rng>(&self, r: WeightRef, margin: usize, rng: &mut R) -> SeqVec {
        let m = margin as i64;
        SeqVec::from_fn(self.lo, self.len(), r, |k| {
            if k >= self.lo + m && k <= self.hi - m {
                rand_c(rng)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    /// Random unit vector in the weighted norm, supported away from the edges.
    pub fn random_unit<R: Rng>(
        &self,
        r: WeightRef,
        margin: usize,
        rng: &mut R,
    ) -> Result<SeqVec, JacobiError> {
        let w = self.weights_of(r)?.to_vec();
        let mut v = self.random_compact(r, margin, rng);
        for (x, wk) in v.values.iter_mut().zip(&w) {
            *x *= wk.sqrt();
        }
        let n = weighted_norm_sq(&v, &w).sqrt();
        Ok(v.scaled(C64::new(1.0 / n, 0.0)))
    }

    /// Random vector with O(1) entries on `[lo + 2, lo + RANDOM_SUPPORT]`, or on
    /// `[−RANDOM_SUPPORT/2, RANDOM_SUPPORT/2]` on the annulus. Further out the
    /// weights lose relative precision and telescoping sums carry the loss back.
    pub fn random_supported<R: Rng>(&self, r: WeightRef, rng: &mut R) -> SeqVec {
        let (bottom, top) = match self.domain {
            DomainKind::Disk => (self.lo, self.lo + RANDOM_SUPPORT),
            DomainKind::Annulus => (-RANDOM_SUPPORT / 2, RANDOM_SUPPORT / 2),
        };
        let (bottom, top) = (bottom.max(self.lo + 2), top.min(self.hi - 2));
        SeqVec::from_fn(self.lo, self.len(), r, |k| {
            if (bottom..=top).contains(&k) {
                rand_c(rng)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    /// Per row of `op h`, the size of the two terms before they cancel.
    pub fn stencil_abs(&self, op: Op, h: &SeqVec) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| match op {
                Op::A => {
                    self.a[i]
                        * (h.values[i].norm() + if i > 0 { h.values[i - 1].norm() } else { 0.0 })
                }
                Op::Abar => {
                    self.a_prime[i]
                        * (h.values[i].norm()
                            + if i + 1 < n {
                                h.values[i + 1].norm()
                            } else {
                                0.0
                            })
                }
            })
            .collect()
    }

    /// A vector in `dom(op)` whose limit at `end` is nonzero and whose other
    /// limit vanishes (on the disk the `+∞` carrier of `Ā` is `Ω`).
    pub fn limit_carrier(&self, op: Op, end: End) -> Result<SeqVec, JacobiError> {
        if self.domain == DomainKind::Disk && end == End::Minus {
            return Err(JacobiError::InvalidVariant("the disk has no −∞ end".into()));
        }
        let mid = self.lo + self.len() as i64 / 2;
        let delta =
            |r: WeightRef, w: f64| SeqVec::delta(self.lo, self.len(), r, mid, C64::new(w, 0.0));
        Ok(match (op, end, self.domain) {
            (Op::A, End::Plus, _) => self.apply_parametrix(
                Parametrix::T1.min_for(self.domain),
                &delta(self.a_ref, self.a_at(mid)),
            )?,
            (Op::A, End::Minus, _) => {
                self.apply_parametrix(Parametrix::T0, &delta(self.a_ref, self.a_at(mid)))?
            }
            (Op::Abar, End::Plus, DomainKind::Disk) => self.omega_plus(),
            (Op::Abar, End::Plus, DomainKind::Annulus) => self.apply_parametrix(
                Parametrix::Tbar1,
                &delta(self.a_prime_ref, self.a_prime_at(mid)),
            )?,
            (Op::Abar, End::Minus, _) => self.apply_parametrix(
                Parametrix::Tbar0,
                &delta(self.a_prime_ref, self.a_prime_at(mid)),
            )?,
        })
    }

    /// Random element of `dom(op_v)`: compact part plus, for every end where
    /// `v` allows it, a multiple of the limit carrier. Entries are O(1).
    pub fn random_domain_vector<R: Rng>(
        &self,
        op: Op,
        v: BoundaryVariant,
        margin: usize,
        rng: &mut R,
    ) -> Result<SeqVec, JacobiError> {
        v.check(self.domain)?;
        let mut f = self.random_compact(self.domain_ref(op), margin, rng);
        if !v.vanishes_plus() {
            f = f.axpy(rand_c(rng), &self.limit_carrier(op, End::Plus)?);
        }
        if self.domain == DomainKind::Annulus && !v.vanishes_minus() {
            f = f.axpy(rand_c(rng), &self.limit_carrier(op, End::Minus)?);
        }
        Ok(f)
    }
}

impl Parametrix {
    // the forward sum without correction is T on ℕ and T₁ on ℤ
    fn min_for(self, domain: DomainKind) -> Parametrix {
        match domain {
            DomainKind::Disk => Parametrix::T,
            DomainKind::Annulus => self,
        }
    }
}

/// Random test vectors are supported on this many indices.
pub const RANDOM_SUPPORT: i64 = 40;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct PairingReport {
    /// `⟨Af, g⟩_a − ⟨f, Āg⟩_{a′}`
    pub lhs: C64,
    /// `f̄_∞ g_∞ − f̄_{−∞} g_{−∞}` from the closed-form limits
    pub boundary: C64,
    pub residual: C64,
    pub tail: f64,
}

/// Integration by parts for `f ∈ dom(A)`, `g ∈ dom(Ā)`.
pub fn pairing_residual(
    data: &JacobiData,
    f: &SeqVec,
    g: &SeqVec,
) -> Result<PairingReport, JacobiError> {
    let af = data.apply_a(f)?;
    let abg = data.apply_abar(g)?;
    let lhs = weighted_inner(&af, g, data.a()) - weighted_inner(f, &abg, data.a_prime());
    let fp = data.limit_certified(Op::A, f, End::Plus)?;
    let gp = data.limit_certified(Op::Abar, g, End::Plus)?;
    let mut boundary = fp.value.conj() * gp.value;
    let mut tail = fp.tail * gp.value.norm() + gp.tail * fp.value.norm() + fp.tail * gp.tail;
    if data.domain == DomainKind::Annulus {
        let fm = data.limit_certified(Op::A, f, End::Minus)?;
        let gm = data.limit_certified(Op::Abar, g, End::Minus)?;
        boundary -= fm.value.conj() * gm.value;
        tail += fm.tail * gm.value.norm() + gm.tail * fm.value.norm() + fm.tail * gm.tail;
    }
    Ok(PairingReport {
        lhs,
        boundary,
        residual: lhs - boundary,
        tail,
    })
}

/// The claimed adjoint pairs: every variant of `A` and `Ā` with its adjoint.
pub fn adjoint_pairs(domain: DomainKind) -> Vec<((Op, BoundaryVariant), (Op, BoundaryVariant))> {
    let mut out = Vec::new();
    for op in [Op::A, Op::Abar] {
        for &v in BoundaryVariant::all_for(domain) {
            let adj = adjoint_variant(domain, op, v).expect("valid variant");
            out.push(((op, v), adj));
        }
    }
    out
}

/// `max |⟨Xf, g⟩ − ⟨f, X*g⟩|` over random `f ∈ dom(X)`, `g ∈ dom(X*)`.
pub fn adjoint_check<R: Rng>(
    data: &JacobiData,
    x: (Op, BoundaryVariant),
    trials: usize,
    rng: &mut R,
) -> Result<f64, JacobiError> {
    let (op, v) = x;
    let (adj, w) = adjoint_variant(data.domain, op, v)?;
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let f = data.random_domain_vector(op, v, 2, rng)?;
        let g = data.random_domain_vector(adj, w, 2, rng)?;
        let xf = data.apply(op, &f)?;
        let yg = data.apply(adj, &g)?;
        let r = data.inner(&xf, &g)? - data.inner(&f, &yg)?;
        worst = worst.max(r.norm());
    }
    Ok(worst)
}

/// Matrix of a parametrix in orthonormal bases of its input and output spaces.
pub fn parametrix_matrix(data: &JacobiData, p: Parametrix) -> Result<DMatrix<C64>, JacobiError> {
    let in_ref = data.parametrix_input_ref(p);
    let w_in = data.weights_of(in_ref)?.to_vec();
    let n = data.len();
    let mut m = DMatrix::<C64>::zeros(n, n);
    let mut w_out: Option<Vec<f64>> = None;
    for j in 0..n {
        let e = SeqVec::delta(
            data.lo,
            n,
            in_ref,
            data.lo + j as i64,
            C64::new(w_in[j].sqrt(), 0.0),
        );
        let col = data.apply_parametrix(p, &e)?;
        let wo = w_out.get_or_insert_with(|| data.weights_of(col.weight_ref).unwrap().to_vec());
        for i in 0..n {
            m[(i, j)] = col.values[i] / wo[i].sqrt();
        }
    }
    Ok(m)
}

/// Largest singular value by power iteration on `M*M`.
pub fn power_norm(m: &DMatrix<C64>) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    let mut x = DVector::<C64>::from_element(m.ncols(), C64::new(1.0, 0.0));
    let mut est = 0.0;
    for _ in 0..2000 {
        let y = m * &x;
        let z = m.adjoint() * &y;
        let nz = z.norm();
        if nz == 0.0 {
            return 0.0;
        }
        let new = (y.norm() / x.norm()).max(est);
        x = z / C64::new(nz, 0.0);
        if (new - est).abs() <= 1e-15 * new {
            est = new;
            break;
        }
        est = new;
    }
    est
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct NormEstimate {
    pub parametrix: Parametrix,
    pub frobenius: f64,
    pub operator: f64,
    /// bound on both norms from the kernel estimate
    pub bound: f64,
    /// `√(CC′) + K√(CC′)` for the kernel-corrected parametrices, otherwise `bound`
    pub operator_bound_stated: f64,
}

pub fn hs_norm(data: &JacobiData, p: Parametrix) -> Result<NormEstimate, JacobiError> {
    let m = parametrix_matrix(data, p)?;
    let s = (data.c_const().hi * data.c_prime_const().hi).sqrt();
    let k = data.k_const();
    let bilateral = data.domain == DomainKind::Annulus;
    let bound = match p {
        Parametrix::T0 | Parametrix::Tbar1 if bilateral => k * s,
        _ => s,
    };
    let stated = match p {
        Parametrix::Tbar => s + k * s,
        Parametrix::T if bilateral => s + k * s,
        _ => bound,
    };
    Ok(NormEstimate {
        parametrix: p,
        frobenius: m.norm(),
        operator: power_norm(&m),
        bound,
        operator_bound_stated: stated,
    })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct IdentityReport {
    pub op: Op,
    pub variant: BoundaryVariant,
    /// `max ‖P X f − (I − Π_Ker) f‖ / ‖f‖`
    pub left: f64,
    /// worst interior row of `X P g − (I − Π_Coker) g`, relative to the stencil of `X`
    pub right: f64,
    /// `‖P κ‖ / ‖κ‖` over cokernel vectors
    pub cokernel_annihilated: f64,
    pub tail: f64,
}

impl IdentityReport {
    pub fn max(&self) -> f64 {
        self.left.max(self.right).max(self.cokernel_annihilated)
    }
}

fn project_off(
    data: &JacobiData,
    basis: &[KernelVector],
    f: &SeqVec,
) -> Result<SeqVec, JacobiError> {
    let mut out = f.clone();
    for kv in basis {
        let coef = data.inner(&kv.omega, f)? / data.norm_sq(&kv.omega)?;
        out = out.axpy(-coef, &kv.omega);
    }
    Ok(out)
}

/// Composition identities of a variant and its parametrix on random vectors.
pub fn identity_residuals<R: Rng>(
    data: &JacobiData,
    op: Op,
    v: BoundaryVariant,
    trials: usize,
    rng: &mut R,
) -> Result<IdentityReport, JacobiError> {
    let p = Parametrix::of(op, v);
    let ker = data.kernel_basis(op, v)?;
    let coker = data.cokernel_basis(op, v)?;
    let dom = data.domain_ref(op);
    let ran = data.range_ref(op);
    let w_dom = data.weights_of(dom)?.to_vec();

    let (r_lo, r_hi) = data.interior_rows(op);
    let mut left = 0.0f64;
    let mut right = 0.0f64;
    for _ in 0..trials {
        // f ∈ dom(X_v): compact part, allowed limit carriers, kernel
        let mut f = data.random_supported(dom, rng);
        let ends: &[End] = match data.domain {
            DomainKind::Disk => &[End::Plus],
            DomainKind::Annulus => &[End::Plus, End::Minus],
        };
        for &end in ends {
            let allowed = match end {
                End::Plus => !v.vanishes_plus(),
                End::Minus => !v.vanishes_minus(),
            };
            if allowed {
                f = f.axpy(rand_c(rng), &data.limit_carrier(op, end)?);
            }
        }
        for kv in &ker {
            let nk = kv.norm_sq.lo.sqrt();
            f = f.axpy(rand_c(rng) * data.norm(&f)? / nk, &kv.omega);
        }
        let nf = data.norm(&f)?;
        let pxf = data.apply_parametrix(p, &data.apply(op, &f)?)?;
        let expect = project_off(data, &ker, &f)?;
        left = left.max(weighted_norm_sq(&pxf.sub(&expect), &w_dom).sqrt() / nf);

        let g = data.random_supported(ran, rng);
        let pg = data.apply_parametrix(p, &g)?;
        let xpg = data.apply(op, &pg)?;
        let expect = project_off(data, &coker, &g)?;
        let diff = xpg.sub(&expect);
        let stencil = data.stencil_abs(op, &pg);
        let floor = g.max_abs();
        for k in r_lo..=r_hi {
            let i = (k - data.lo) as usize;
            right = right.max(diff.values[i].norm() / stencil[i].max(floor));
        }
    }
    let mut annihilated = 0.0f64;
    for kv in &coker {
        let pk = data.apply_parametrix(p, &kv.omega)?;
        annihilated = annihilated.max(data.norm(&pk)? / data.norm(&kv.omega)?);
    }
    Ok(IdentityReport {
        op,
        variant: v,
        left,
        right,
        cokernel_annihilated: annihilated,
        tail: data.tail_budget(),
    })
}

/// Dense matrix as `row,col,re,im` lines.
pub fn write_dense_csv<W: Write>(m: &DMatrix<C64>, out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["row", "col", "re", "im"])?;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let v = m[(i, j)];
            if v.re != 0.0 || v.im != 0.0 {
                w.write_record(&[
                    i.to_string(),
                    j.to_string(),
                    format!("{:e}", v.re),
                    format!("{:e}", v.im),
                ])?;
            }
        }
    }
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::super::tests::{geo_ws, sig_ws};
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(7)
    }

    #[test]
    fn identities_disk() {
        let d = JacobiData::for_mode(&geo_ws(40), 0).unwrap();
        let mut r = rng();
        for op in [Op::A, Op::Abar] {
            for &v in BoundaryVariant::all_for(DomainKind::Disk) {
                let rep = identity_residuals(&d, op, v, 20, &mut r).unwrap();
                assert!(rep.max() < 1e-8, "{op} {v:?}: {rep:?}");
            }
        }
    }

    #[test]
    fn identities_annulus() {
        let d = JacobiData::for_mode(&sig_ws(30), 1).unwrap();
        let mut r = rng();
        for op in [Op::A, Op::Abar] {
            for &v in BoundaryVariant::all_for(DomainKind::Annulus) {
                let rep = identity_residuals(&d, op, v, 20, &mut r).unwrap();
                assert!(rep.max() < 1e-8, "{op} {v:?}: {rep:?}");
            }
        }
    }

    #[test]
    fn pairing_compact_and_limits() {
        let mut r = rng();
        for d in [
            JacobiData::for_mode(&geo_ws(80), 1).unwrap(),
            JacobiData::for_mode(&sig_ws(60), 0).unwrap(),
        ] {
            let f = d.random_compact(d.a_prime_ref, 2, &mut r);
            let g = d.random_compact(d.a_ref, 2, &mut r);
            let rep = pairing_residual(&d, &f, &g).unwrap();
            assert!(rep.residual.norm() < 1e-12, "{rep:?}");
            let f = d
                .random_domain_vector(Op::A, BoundaryVariant::Full, 2, &mut r)
                .unwrap();
            let g = d
                .random_domain_vector(Op::Abar, BoundaryVariant::Full, 2, &mut r)
                .unwrap();
            let rep = pairing_residual(&d, &f, &g).unwrap();
            assert!(rep.boundary.norm() > 1e-3);
            assert!(
                rep.residual.norm() < 1e-10 * rep.boundary.norm().max(1.0),
                "{rep:?}"
            );
        }
    }

    #[test]
    fn adjoints() {
        let mut r = rng();
        for d in [
            JacobiData::for_mode(&geo_ws(60), 0).unwrap(),
            JacobiData::for_mode(&sig_ws(50), 2).unwrap(),
        ] {
            for (x, _) in adjoint_pairs(d.domain) {
                let res = adjoint_check(&d, x, 10, &mut r).unwrap();
                assert!(res < 1e-10, "{x:?}: {res}");
            }
        }
    }

    #[test]
    fn norms_below_bounds() {
        let d = JacobiData::for_mode(&geo_ws(100), 0).unwrap();
        let e = hs_norm(&d, Parametrix::T).unwrap();
        assert!(e.frobenius <= (0.5f64.sqrt()).sqrt() + 1e-8);
        assert!(e.operator <= e.frobenius + 1e-12);
        let svd = parametrix_matrix(&d, Parametrix::T)
            .unwrap()
            .singular_values();
        assert!((svd[0] - e.operator).abs() < 1e-8 * svd[0]);
        for p in [Parametrix::Tbar, Parametrix::T0, Parametrix::Tbar0] {
            let e = hs_norm(&d, p).unwrap();
            assert!(
                e.frobenius <= e.bound + 1e-8 && e.operator <= e.operator_bound_stated + 1e-8,
                "{e:?}"
            );
        }
        let d = JacobiData::for_mode(&sig_ws(40), 0).unwrap();
        for p in Parametrix::ALL {
            let e = hs_norm(&d, p).unwrap();
            assert!(e.frobenius <= e.bound + 1e-8, "{e:?}");
        }
    }

    #[test]
    fn hs_monotone_in_window() {
        let mut last = 0.0;
        for k in [25, 50, 100, 200] {
            let d = JacobiData::for_mode(&geo_ws(k), 0).unwrap();
            let e = hs_norm(&d, Parametrix::T).unwrap().frobenius;
            assert!(e + 1e-15 >= last);
            last = e;
        }
    }

    #[test]
    fn l_bound() {
        let d = JacobiData::for_mode(&geo_ws(60), 0).unwrap();
        let mut r = rng();
        let k = d.k_const();
        for _ in 0..50 {
            let f = d.random_unit(d.a_prime_ref, 2, &mut r).unwrap();
            let l = d.functional(Functional::L, &f).unwrap().norm();
            assert!(l <= k * d.c_prime_const().hi.sqrt() + 1e-12);
            assert!(l <= k * d.c_const().hi.sqrt() + 1e-12);
        }
    }

    #[test]
    fn csv_dump() {
        let d = JacobiData::for_mode(&geo_ws(10), 0).unwrap();
        let m = parametrix_matrix(&d, Parametrix::T).unwrap();
        let mut buf = Vec::new();
        write_dense_csv(&m, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("row,col,re,im\n0,0,"));
    }
}
