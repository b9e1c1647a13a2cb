use num_complex::Complex64;

use super::*;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Relative size of the truncation error on a limit beyond which the vector
/// is not resolved by the window.
pub const DOMAIN_BUDGET: f64 = 1e-6;

/// A value with a bound on the error committed by truncating at the window.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Certified {
    pub value: C64,
    pub tail: f64,
}

impl JacobiData {
    /// `(Af)_n = a_n (f_n − c_{n−1} f_{n−1})`, with `f_{−1} = 0` on the disk.
    pub fn apply_a(&self, f: &SeqVec) -> Result<SeqVec, JacobiError> {
        self.check_space(f, self.a_prime_ref)?;
        let mut out = self.zeros(self.a_ref);
        for k in self.lo..=self.hi {
            let i = (k - self.lo) as usize;
            let v = if k == self.lo {
                match self.domain {
                    DomainKind::Disk => self.a[i] * f.values[i],
                    DomainKind::Annulus => ZERO,
                }
            } else {
                self.a[i] * (f.values[i] - self.c[i - 1] * f.values[i - 1])
            };
            out.values[i] = v;
        }
        Ok(out)
    }

    /// `(Āf)_n = a′_n (f_n − c̄_n f_{n+1})`.
    pub fn apply_abar(&self, f: &SeqVec) -> Result<SeqVec, JacobiError> {
        self.check_space(f, self.a_ref)?;
        let mut out = self.zeros(self.a_prime_ref);
        for i in 0..self.len() - 1 {
            out.values[i] = self.a_prime[i] * (f.values[i] - self.c[i].conj() * f.values[i + 1]);
        }
        Ok(out)
    }

    pub fn apply(&self, op: Op, f: &SeqVec) -> Result<SeqVec, JacobiError> {
        match op {
            Op::A => self.apply_a(f),
            Op::Abar => self.apply_abar(f),
        }
    }

    /// Domain space of `op`.
    pub fn domain_ref(&self, op: Op) -> WeightRef {
        match op {
            Op::A => self.a_prime_ref,
            Op::Abar => self.a_ref,
        }
    }
    /// Target space of `op`.
    pub fn range_ref(&self, op: Op) -> WeightRef {
        match op {
            Op::A => self.a_ref,
            Op::Abar => self.a_prime_ref,
        }
    }

    /// Rows of `op` whose stencil stays inside the window.
    pub fn interior_rows(&self, op: Op) -> (i64, i64) {
        match (op, self.domain) {
            (Op::A, DomainKind::Disk) => (self.lo, self.hi),
            (Op::A, DomainKind::Annulus) => (self.lo + 1, self.hi),
            (Op::Abar, _) => (self.lo, self.hi - 1),
        }
    }

    /// `Ω⁺_n = ∏_{i≥n} c̄_i` (also the unilateral `Ω`).
    pub fn omega_plus(&self) -> SeqVec {
        SeqVec::from_fn(self.lo, self.len(), self.a_ref, |k| {
            self.prod_c_from(k).conj()
        })
    }
    /// `Ω⁻_n = ∏_{i<n} c_i`.
    pub fn omega_minus(&self) -> SeqVec {
        SeqVec::from_fn(self.lo, self.len(), self.a_prime_ref, |k| {
            self.prod_c_below(k)
        })
    }

    fn omega_plus_norm(&self) -> Enclosure {
        let o = self.omega_plus();
        Enclosure::new(weighted_norm_sq(&o, &self.a), self.a_tails.total())
    }
    fn omega_minus_norm(&self) -> Enclosure {
        let o = self.omega_minus();
        Enclosure::new(
            weighted_norm_sq(&o, &self.a_prime),
            self.a_prime_tails.total(),
        )
    }

    pub fn kernel_basis(
        &self,
        op: Op,
        variant: BoundaryVariant,
    ) -> Result<Vec<KernelVector>, JacobiError> {
        variant.check(self.domain)?;
        if variant != BoundaryVariant::Full {
            return Ok(Vec::new());
        }
        Ok(match (op, self.domain) {
            (Op::A, DomainKind::Disk) => Vec::new(),
            (Op::Abar, DomainKind::Disk) => vec![KernelVector {
                omega: self.omega_plus(),
                side: KernelSide::OmegaUnilateral,
                norm_sq: self.omega_plus_norm(),
            }],
            (Op::Abar, DomainKind::Annulus) => vec![KernelVector {
                omega: self.omega_plus(),
                side: KernelSide::OmegaPlus,
                norm_sq: self.omega_plus_norm(),
            }],
            (Op::A, DomainKind::Annulus) => vec![KernelVector {
                omega: self.omega_minus(),
                side: KernelSide::OmegaMinus,
                norm_sq: self.omega_minus_norm(),
            }],
        })
    }

    /// Basis of the cokernel, taken as the kernel of the adjoint variant.
    pub fn cokernel_basis(
        &self,
        op: Op,
        variant: BoundaryVariant,
    ) -> Result<Vec<KernelVector>, JacobiError> {
        let (adj, v) = adjoint_variant(self.domain, op, variant)?;
        self.kernel_basis(adj, v)
    }

    // Raw sums. Inputs are zero outside the window.

    /// `Σ_{i≤n} (1/a_i) ∏_{j=i}^{n−1} c_j g_i`
    fn sum_forward(&self, g: &SeqVec) -> SeqVec {
        let mut out = self.zeros(self.a_prime_ref);
        let mut t = ZERO;
        for i in 0..self.len() {
            if i > 0 {
                t *= self.c[i - 1];
            }
            t += g.values[i] / self.a[i];
            out.values[i] = t;
        }
        out
    }

    /// `Σ_{i≥n} (1/a′_i) ∏_{j=n}^{i−1} c̄_j g_i`
    fn sum_backward(&self, g: &SeqVec) -> SeqVec {
        let mut out = self.zeros(self.a_ref);
        let mut t = ZERO;
        for i in (0..self.len()).rev() {
            t = self.c[i].conj() * t + g.values[i] / self.a_prime[i];
            out.values[i] = t;
        }
        out
    }

    /// `−Σ_{i>n} (1/a_i) (∏_{j=n}^{i−1} c_j)^{−1} g_i`
    fn sum_forward_inverse(&self, g: &SeqVec) -> SeqVec {
        let mut out = self.zeros(self.a_prime_ref);
        let mut t = ZERO;
        for i in (0..self.len() - 1).rev() {
            t = (t - g.values[i + 1] / self.a[i + 1]) / self.c[i];
            out.values[i] = t;
        }
        out
    }

    /// `−Σ_{i<n} (1/a′_i) (∏_{j=i}^{n−1} c̄_j)^{−1} g_i`
    fn sum_backward_inverse(&self, g: &SeqVec) -> SeqVec {
        let mut out = self.zeros(self.a_ref);
        let mut t = ZERO;
        for i in 1..self.len() {
            t = (t - g.values[i - 1] / self.a_prime[i - 1]) / self.c[i - 1].conj();
            out.values[i] = t;
        }
        out
    }

    /// `g − ⟨κ, g⟩/‖κ‖² κ`, in the space of `κ`.
    fn project_out(&self, kappa: &SeqVec, g: &SeqVec) -> SeqVec {
        let w = if kappa.weight_ref == self.a_ref {
            &self.a
        } else {
            &self.a_prime
        };
        let coef = weighted_inner(kappa, g, w) / weighted_norm_sq(kappa, w);
        g.axpy(-coef, kappa)
    }

    pub fn functional(&self, which: Functional, g: &SeqVec) -> Result<C64, JacobiError> {
        Ok(self.functional_certified(which, g)?.value)
    }

    /// `L(g) = ⟨Ω, T̄₀g⟩_a/‖Ω‖²_a` (disk), `β` is the same quotient on ℤ,
    /// `α(g) = ⟨Ω⁻, T₁g⟩_{a′}/‖Ω⁻‖²_{a′}`.
    pub fn functional_certified(
        &self,
        which: Functional,
        g: &SeqVec,
    ) -> Result<Certified, JacobiError> {
        match (which, self.domain) {
            (Functional::L, DomainKind::Disk) | (Functional::Beta, DomainKind::Annulus) => {
                self.check_space(g, self.a_prime_ref)?;
                let t = self.sum_backward(g);
                let om = self.omega_plus();
                let nrm = self.omega_plus_norm();
                let value = weighted_inner(&om, &t, &self.a) / nrm.lo;
                // below the window T̄₀g continues as a multiple of Ω⁺
                let below = t.values[0].norm() * self.k_const() * self.a_tails.minus;
                let tail = (below + value.norm() * nrm.width()) / nrm.lo;
                Ok(Certified { value, tail })
            }
            (Functional::Alpha, DomainKind::Annulus) => {
                self.check_space(g, self.a_ref)?;
                let t = self.sum_forward(g);
                let om = self.omega_minus();
                let nrm = self.omega_minus_norm();
                let value = weighted_inner(&om, &t, &self.a_prime) / nrm.lo;
                let above = t.values[self.len() - 1].norm() * self.a_prime_tails.plus;
                let tail = (above + value.norm() * nrm.width()) / nrm.lo;
                Ok(Certified { value, tail })
            }
            _ => Err(JacobiError::InvalidVariant(format!(
                "functional {which:?} is not defined on the {}",
                self.domain
            ))),
        }
    }

    fn check_parametrix(&self, p: Parametrix) -> Result<(), JacobiError> {
        let (_, v) = p.operator();
        v.check(self.domain)
    }

    /// Input space of a parametrix (the target space of its operator).
    pub fn parametrix_input_ref(&self, p: Parametrix) -> WeightRef {
        self.range_ref(p.operator().0)
    }

    pub fn apply_parametrix(&self, p: Parametrix, g: &SeqVec) -> Result<SeqVec, JacobiError> {
        self.check_parametrix(p)?;
        self.check_space(g, self.parametrix_input_ref(p))?;
        let disk = self.domain == DomainKind::Disk;
        Ok(match p {
            Parametrix::T if disk => self.sum_forward(g),
            Parametrix::T | Parametrix::T1 => {
                let t = self.sum_forward(g);
                if p == Parametrix::T1 {
                    t
                } else {
                    let alpha = self.functional(Functional::Alpha, g)?;
                    t.axpy(-alpha, &self.omega_minus())
                }
            }
            Parametrix::Tbar0 => self.sum_backward(g),
            Parametrix::Tbar => {
                let which = if disk {
                    Functional::L
                } else {
                    Functional::Beta
                };
                let l = self.functional(which, g)?;
                self.sum_backward(g).axpy(-l, &self.omega_plus())
            }
            // parametrix of A₀ on ℕ: T(I − P_Ω)
            Parametrix::T0 if disk => self.sum_forward(&self.project_out(&self.omega_plus(), g)),
            Parametrix::T0 => self.sum_forward_inverse(g),
            Parametrix::Tbar1 => self.sum_backward_inverse(g),
            Parametrix::T2 => self.sum_forward(&self.project_out(&self.omega_plus(), g)),
            Parametrix::Tbar2 => self.sum_backward(&self.project_out(&self.omega_minus(), g)),
        })
    }

    /// Closed-form limit `f_{±∞}` of `f ∈ dom(op)`.
    pub fn limit_at_infinity(&self, op: Op, f: &SeqVec, end: End) -> Result<C64, JacobiError> {
        Ok(self.limit_certified(op, f, end)?.value)
    }

    pub fn limit_certified(&self, op: Op, f: &SeqVec, end: End) -> Result<Certified, JacobiError> {
        self.check_space(f, self.domain_ref(op))?;
        if self.domain == DomainKind::Disk && end == End::Minus {
            return Err(JacobiError::InvalidVariant("the disk has no −∞ end".into()));
        }
        let k = self.k_const();
        let n = self.len();
        let edge_mass = |tails: Tails| {
            (f.values[n - 1].norm() * tails.plus + f.values[0].norm() * tails.minus) * k
        };
        let out = match (op, self.domain) {
            (Op::A, DomainKind::Disk) => {
                let af = self.apply_a(f)?;
                Certified {
                    value: self.forward_limit(&af),
                    tail: 0.0,
                }
            }
            (Op::Abar, DomainKind::Disk) => {
                let om = self.omega_plus();
                let nrm = self.omega_plus_norm();
                let mu = weighted_inner(&om, f, &self.a) / nrm.lo;
                let l = self.functional_certified(Functional::L, &self.apply_abar(f)?)?;
                Certified {
                    value: mu - l.value,
                    tail: edge_mass(self.a_tails) / nrm.lo
                        + mu.norm() * nrm.width() / nrm.lo
                        + l.tail,
                }
            }
            (Op::A, DomainKind::Annulus) => {
                let om = self.omega_minus();
                let nrm = self.omega_minus_norm();
                let mu = weighted_inner(&om, f, &self.a_prime) / nrm.lo;
                let af = self.apply_a(f)?;
                let alpha = self.functional_certified(Functional::Alpha, &af)?;
                let tail = edge_mass(self.a_prime_tails) / nrm.lo
                    + mu.norm() * nrm.width() / nrm.lo
                    + alpha.tail;
                let minus = mu - alpha.value;
                match end {
                    End::Minus => Certified { value: minus, tail },
                    End::Plus => Certified {
                        value: self.forward_limit(&af) + minus * self.prod_c_all(),
                        tail,
                    },
                }
            }
            (Op::Abar, DomainKind::Annulus) => {
                let om = self.omega_plus();
                let nrm = self.omega_plus_norm();
                let nu = weighted_inner(&om, f, &self.a) / nrm.lo;
                let abf = self.apply_abar(f)?;
                let beta = self.functional_certified(Functional::Beta, &abf)?;
                let tail =
                    edge_mass(self.a_tails) / nrm.lo + nu.norm() * nrm.width() / nrm.lo + beta.tail;
                let plus = nu - beta.value;
                match end {
                    End::Plus => Certified { value: plus, tail },
                    End::Minus => Certified {
                        value: self.backward_limit(&abf) + plus * self.prod_c_all().conj(),
                        tail,
                    },
                }
            }
        };
        if out.tail > DOMAIN_BUDGET * out.value.norm().max(1.0) {
            return Err(JacobiError::NotInDomain(format!(
                "truncation error {:.3e} on the limit exceeds the budget",
                out.tail
            )));
        }
        Ok(out)
    }

    /// `Σ_i (1/a_i)(∏_{j≥i} c_j) g_i`, the `+∞` limit of the forward sum.
    fn forward_limit(&self, g: &SeqVec) -> C64 {
        (self.lo..=self.hi)
            .map(|k| g.get(k) / self.a_at(k) * self.prod_c_from(k))
            .sum()
    }

    /// `Σ_i (1/a′_i)(∏_{j<i} c̄_j) g_i`, the `−∞` limit of the backward sum.
    fn backward_limit(&self, g: &SeqVec) -> C64 {
        (self.lo..=self.hi)
            .map(|k| g.get(k) / self.a_prime_at(k) * self.prod_c_below(k).conj())
            .sum()
    }

    /// Value the harmonic continuation of `f` reaches at `±∞`.
    pub fn continued_limit(&self, op: Op, f: &SeqVec, end: End) -> C64 {
        let n = self.len();
        match (op, end) {
            (Op::A, End::Plus) => f.values[n - 1] * self.prod_c_from(self.hi),
            (Op::A, End::Minus) => f.values[0] / self.prod_c_below(self.lo),
            (Op::Abar, End::Plus) => f.values[n - 1] / self.prod_c_from(self.hi).conj(),
            (Op::Abar, End::Minus) => f.values[0] * self.prod_c_below(self.lo).conj(),
        }
    }
}

/// Adjoint of `op` with vanishing conditions `v`.
///
/// On ℕ: `A* = Ā₀`, `A₀* = Ā`. On ℤ: `A* = Ā₂`, `A₀* = Ā₁`, `A₁* = Ā₀`,
/// `A₂* = Ā`, and symmetrically for `Ā`.
pub fn adjoint_variant(
    domain: DomainKind,
    op: Op,
    v: BoundaryVariant,
) -> Result<(Op, BoundaryVariant), JacobiError> {
    use BoundaryVariant::*;
    v.check(domain)?;
    let other = match op {
        Op::A => Op::Abar,
        Op::Abar => Op::A,
    };
    let w = match domain {
        DomainKind::Disk => match v {
            Full => ZeroPlus,
            _ => Full,
        },
        DomainKind::Annulus => match v {
            Full => ZeroBoth,
            ZeroPlus => ZeroMinus,
            ZeroMinus => ZeroPlus,
            ZeroBoth => Full,
        },
    };
    Ok((other, w))
}

/// `(dim Ker, dim Coker)` of a variant, read off the kernel formulas.
pub fn variant_dims(
    domain: DomainKind,
    op: Op,
    v: BoundaryVariant,
) -> Result<(usize, usize), JacobiError> {
    let ker = |op: Op, v: BoundaryVariant| -> usize {
        match (domain, op, v) {
            (_, _, BoundaryVariant::Full) => match (domain, op) {
                (DomainKind::Disk, Op::A) => 0,
                _ => 1,
            },
            _ => 0,
        }
    };
    let (adj, w) = adjoint_variant(domain, op, v)?;
    Ok((ker(op, v), ker(adj, w)))
}
