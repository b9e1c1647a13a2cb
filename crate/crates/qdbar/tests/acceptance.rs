//! Acceptance run: one line per criterion, nonzero exit if any fails.

use std::collections::HashSet;
use std::time::{Duration, Instant};

use qdbar::aps::{
    compactness_evidence, index, ApsCase, ApsParams, ApsSystem, IndexOptions, OracleCache, QForm,
};
use qdbar::fourier::FourierSpace;
use qdbar::jacobi::{
    hs_norm, identity_residuals, pairing_residual, variant_name, BoundaryVariant, End, JacobiData,
    Op, Parametrix, C64,
};
use qdbar::weight_model::{eval_weights, DomainKind, WeightFamily, WeightSequence};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const M_MAX: usize = 16;

fn disk() -> WeightSequence {
    eval_weights(
        &WeightFamily::GeometricDisk {
            rho_plus: 1.0,
            q: 0.5,
        },
        DomainKind::Disk,
        200,
    )
    .unwrap()
}

fn annulus() -> WeightSequence {
    eval_weights(
        &WeightFamily::SigmoidAnnulus {
            rho_minus: 1.0,
            rho_plus: 2.0,
            q: 2.0,
        },
        DomainKind::Annulus,
        120,
    )
    .unwrap()
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn index_disk() -> Outcome {
    let start = Instant::now();
    let sp = FourierSpace::new(&disk(), M_MAX).unwrap();
    let cache = OracleCache::default();
    let opts = IndexOptions {
        oracle_windows: vec![40, 80],
        ..Default::default()
    };
    let mut bad = Vec::new();
    for n in -4..=4 {
        let r = index(
            &ApsSystem::new(&sp, ApsParams::disk(n)).unwrap(),
            &opts,
            &cache,
        )
        .unwrap();
        if r.total_index != n + 1
            || !r.oracle_agreement
            || r.oracle.iter().any(|o| o.index != n + 1)
        {
            bad.push(n);
        }
    }
    let t = start.elapsed();
    outcome(
        bad.is_empty() && t < Duration::from_secs(30),
        format!("N = -4..4, disagreements {bad:?}, {:.2}s", t.as_secs_f64()),
    )
}

fn index_annulus() -> Outcome {
    let start = Instant::now();
    let sp = FourierSpace::new(&annulus(), M_MAX).unwrap();
    let cache = OracleCache::default();
    let opts = IndexOptions {
        oracle_windows: vec![40, 80],
        ..Default::default()
    };
    let mut bad = Vec::new();
    let mut cases = HashSet::new();
    for m in -3..=3 {
        for n in -3..=3 {
            let sys = ApsSystem::new(&sp, ApsParams::annulus(m, n)).unwrap();
            cases.insert(sys.assembly.case);
            let r = index(&sys, &opts, &cache).unwrap();
            if r.total_index != m + n + 1 || !r.oracle_agreement {
                bad.push((m, n));
            }
        }
    }
    let all_cases = ApsCase::ANNULUS.iter().all(|c| cases.contains(c));
    let t = start.elapsed();
    outcome(
        bad.is_empty() && all_cases && t < Duration::from_secs(120),
        format!(
            "49 points, disagreements {bad:?}, {} of 6 cases hit, {:.2}s",
            cases.len(),
            t.as_secs_f64()
        ),
    )
}

fn parametrix_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let mut worst = (0.0f64, String::new());
    let mut pass = true;
    for ws in [disk(), annulus()] {
        for mode in [0, 2, 5] {
            let data = JacobiData::for_mode(&ws, mode).unwrap();
            for op in [Op::A, Op::Abar] {
                for &v in BoundaryVariant::all_for(ws.domain) {
                    let r = identity_residuals(&data, op, v, 100, &mut rng).unwrap();
                    pass &= r.max() <= 1e-8 + r.tail;
                    if r.max() > worst.0 {
                        worst = (
                            r.max(),
                            format!("{} {} mode {mode}", ws.domain, variant_name(op, v)),
                        );
                    }
                }
            }
        }
    }
    // the assembled operator in both forms
    for (ws, params) in [
        (
            disk(),
            vec![ApsParams::disk(-2), ApsParams::disk(0), ApsParams::disk(3)],
        ),
        (
            annulus(),
            vec![
                ApsParams::annulus(1, -3),
                ApsParams::annulus(-2, 1),
                ApsParams::annulus(2, 2),
            ],
        ),
    ] {
        let sp = FourierSpace::new(&ws, M_MAX).unwrap();
        for p in params {
            let sys = ApsSystem::new(&sp, p).unwrap();
            for form in [QForm::Orthogonal, QForm::Displayed] {
                let r = sys.residuals(20, form, &mut rng).unwrap();
                pass &= r.max() <= 1e-8 + r.tail && r.q_on_cokernel <= 1e-9;
                if r.max() > worst.0 {
                    worst = (r.max(), format!("{p} {form:?}"));
                }
            }
        }
    }
    outcome(
        pass,
        format!("worst residual {:.2e} ({})", worst.0, worst.1),
    )
}

fn norm_bounds() -> Outcome {
    let mut pass = true;
    let mut margin = f64::INFINITY;
    for ws in [disk(), annulus()] {
        for mode in [0, 1, 4] {
            let data = JacobiData::for_mode(&ws, mode).unwrap();
            for op in [Op::A, Op::Abar] {
                for &v in BoundaryVariant::all_for(ws.domain) {
                    let p = Parametrix::of(op, v);
                    let e = hs_norm(&data, p).unwrap();
                    let ok = e.operator <= e.bound + 1e-8
                        && e.frobenius <= e.bound + 1e-8
                        && e.operator <= e.operator_bound_stated + 1e-8;
                    pass &= ok;
                    margin = margin.min(e.bound - e.frobenius);
                    if matches!(p, Parametrix::Tbar) {
                        let s = (data.c_const().hi * data.c_prime_const().hi).sqrt();
                        pass &= e.operator <= s + data.k_const() * s + 1e-8;
                    }
                }
            }
        }
    }
    outcome(
        pass,
        format!("smallest gap bound - ||T||_HS = {margin:.3e}"),
    )
}

fn block_norm_decay() -> Outcome {
    let ws = disk();
    let sp = FourierSpace::new(&ws, M_MAX).unwrap();
    let sys = ApsSystem::new(&sp, ApsParams::disk(0)).unwrap();
    let norms = compactness_evidence(&sys, 12).unwrap();
    let w0 = ws.w(0);
    let mut pass = norms.len() == 12;
    let mut closed_err = 0.0f64;
    for b in &norms {
        let closed = 2f64.powf(-(2.0 * b.n as f64 - 1.0) / 4.0) / w0;
        closed_err = closed_err.max((b.stated_bound - closed).abs());
        pass &= b.measured <= b.stated_bound + 1e-12;
    }
    pass &= closed_err <= 1e-12;
    pass &= norms
        .windows(2)
        .all(|w| w[1].stated_bound < w[0].stated_bound);
    outcome(
        pass,
        format!(
            "n = 1..12, closed form error {closed_err:.1e}, measured {:.3e} -> {:.3e}",
            norms[0].measured,
            norms[norms.len() - 1].measured
        ),
    )
}

fn algebraic_identities() -> Outcome {
    let mut worst = 0.0f64;
    for ws in [disk(), annulus()] {
        let sp = FourierSpace::new(&ws, 8).unwrap();
        let dim = sp.max_dim().min(120);
        let margin = sp.m_max;
        let x = sp.uw_star();
        let sc = sp.stencil_scale(&x, false).unwrap();
        let dx = sp.apply_d(&x).unwrap();
        let dm = sp.d_matrix(&x, dim).unwrap();
        worst = worst
            .max(sp.interior_diff(&dx, &sp.identity(), Some(&sc), margin, dim))
            .max(sp.interior_diff(&dm, &sp.identity(), Some(&sc), margin, dim))
            .max(sp.interior_diff(&dx, &dm, Some(&sc), margin, dim));
        for n in 0..=6 {
            let x = sp.uw_power(n);
            let sc = sp.stencil_scale(&x, false).unwrap();
            let dx = sp.apply_d(&x).unwrap();
            let dm = sp.d_matrix(&x, dim).unwrap();
            worst = worst
                .max(sp.interior_diff(&dx, &sp.zeros(), Some(&sc), margin, dim))
                .max(sp.interior_diff(&dm, &sp.zeros(), Some(&sc), margin, dim));
        }
    }
    outcome(worst <= 1e-10, format!("worst deviation {worst:.2e}"))
}

fn isometry() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut worst = 0.0f64;
    let mut pass = true;
    for ws in [disk(), annulus()] {
        let sp = FourierSpace::new(&ws, 8).unwrap();
        let dim = sp.max_dim();
        let (lo, hi) = match ws.domain {
            DomainKind::Disk => (0, 40),
            DomainKind::Annulus => (-20, 20),
        };
        for _ in 0..50 {
            let x = sp.from_fn(|b, k| {
                if k >= lo && k <= hi - b.abs() {
                    C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
                } else {
                    C64::new(0.0, 0.0)
                }
            });
            let n = sp.norm_h_sq(&x).unwrap();
            let x = x.scaled(C64::new(1.0 / n.sqrt(), 0.0));
            let gap = (sp.norm_h_sq(&x).unwrap() - sp.inner_trace(&x, &x, dim).unwrap()).norm();
            worst = worst.max(gap);
            pass &= gap <= 1e-10;
        }
    }
    outcome(pass, format!("100 unit elements, worst gap {worst:.2e}"))
}

fn integration_by_parts() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut compact = 0.0f64;
    let mut boundary = 0.0f64;
    let mut pass = true;
    for ws in [disk(), annulus()] {
        for mode in [0, 3] {
            let data = JacobiData::for_mode(&ws, mode).unwrap();
            for _ in 0..50 {
                let f = data.random_supported(data.domain_ref(Op::A), &mut rng);
                let g = data.random_supported(data.domain_ref(Op::Abar), &mut rng);
                let r = pairing_residual(&data, &f, &g).unwrap();
                compact = compact.max(r.residual.norm());
                pass &= r.residual.norm() <= 1e-10;

                let mut f = f;
                let mut g = g;
                let ends: &[End] = match ws.domain {
                    DomainKind::Disk => &[End::Plus],
                    DomainKind::Annulus => &[End::Plus, End::Minus],
                };
                for &end in ends {
                    let z = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                    f = f.axpy(z, &data.limit_carrier(Op::A, end).unwrap());
                    let z = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                    g = g.axpy(z, &data.limit_carrier(Op::Abar, end).unwrap());
                }
                let r = pairing_residual(&data, &f, &g).unwrap();
                boundary = boundary.max(r.residual.norm());
                pass &= r.boundary.norm() > 0.0 && r.residual.norm() <= 1e-8 + r.tail;
            }
        }
    }
    outcome(
        pass,
        format!("compact pairs {compact:.2e}, pairs with limits {boundary:.2e}"),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 8] = [
        ("index on the disk", index_disk),
        ("index on the annulus", index_annulus),
        ("parametrix identities", parametrix_identities),
        ("norm bounds", norm_bounds),
        ("block norm decay", block_norm_decay),
        ("D on U_W* and U_W^n", algebraic_identities),
        ("trace isometry", isometry),
        ("integration by parts", integration_by_parts),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = run();
        if !o.pass {
            failed += 1;
        }
        println!(
            "criterion {} {:<24} {}  {} [{:.2}s]",
            i + 1,
            name,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            start.elapsed().as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} of {} criteria failed", criteria.len());
        std::process::exit(1);
    }
}
