//! Dense oracle: kernel and cokernel dimensions of every variant by SVD, and
//! a parametrix column recovered by least squares.

use qdbar::jacobi::variant_dims;
use qdbar::jacobi::{variant_name, BoundaryVariant, JacobiData, Op, Parametrix, SeqVec, C64};
use qdbar::oracle::{
    densify, densify_variant, lsq_solve, oracle_window, svd_dims, variant_dims_numeric, DEFAULT_TAU,
};
use qdbar::weight_model::{eval_weights, DomainKind, WeightFamily};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let runs = [
        (
            DomainKind::Disk,
            WeightFamily::GeometricDisk {
                rho_plus: 1.0,
                q: 0.5,
            },
            200,
        ),
        (
            DomainKind::Annulus,
            WeightFamily::SigmoidAnnulus {
                rho_minus: 1.0,
                rho_plus: 2.0,
                q: 2.0,
            },
            120,
        ),
    ];
    for (domain, family, k_max) in runs {
        let ws = eval_weights(&family, domain, k_max)?;
        for window in [40, 80] {
            let (lo, hi) = oracle_window(domain, window);
            let data = JacobiData::for_mode_on(&ws, 0, lo, hi)?;
            println!("{} on the {domain}, window [{lo}, {hi}]", family.label());
            for op in [Op::A, Op::Abar] {
                for &v in BoundaryVariant::all_for(domain) {
                    let block = densify_variant(&data, op, v, 1.0)?;
                    let s = svd_dims(&block, DEFAULT_TAU)?;
                    let analytic = variant_dims(domain, op, v)?;
                    println!(
                        "  {:<8} ker {} coker {}  analytic {:?}  gap {:.1e}",
                        variant_name(op, v),
                        s.dim_ker,
                        s.dim_coker,
                        analytic,
                        s.gap_ratio
                    );
                    assert_eq!(variant_dims_numeric(&data, op, v)?, analytic);
                }
            }
        }
    }

    // A x = a₀ δ₀ on the disk: the minimum-norm solution is column 0 of T
    let ws = eval_weights(
        &WeightFamily::GeometricDisk {
            rho_plus: 1.0,
            q: 0.5,
        },
        DomainKind::Disk,
        60,
    )?;
    let data = JacobiData::for_mode_on(&ws, 0, 0, 39)?;
    let block = densify(&data, Op::A)?;
    let rhs = SeqVec::delta(
        data.lo,
        data.len(),
        data.a_ref,
        0,
        C64::new(data.a_at(0), 0.0),
    );
    let x = lsq_solve(&block, &rhs.values, None)?;
    let t = data.apply_parametrix(Parametrix::T, &rhs)?;
    let err = x
        .iter()
        .zip(&t.values)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    println!("least squares vs T column 0: max difference {err:.2e}");
    Ok(())
}
