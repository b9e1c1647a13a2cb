//! Hilbert–Schmidt and operator norms of every parametrix against the kernel bounds.

use qdbar::jacobi::{hs_norm, JacobiData, Parametrix};
use qdbar::weight_model::{eval_weights, DomainKind, WeightFamily};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let runs = [
        (
            DomainKind::Disk,
            WeightFamily::GeometricDisk {
                rho_plus: 1.0,
                q: 0.5,
            },
            vec![
                Parametrix::T,
                Parametrix::T0,
                Parametrix::Tbar,
                Parametrix::Tbar0,
            ],
        ),
        (
            DomainKind::Annulus,
            WeightFamily::SigmoidAnnulus {
                rho_minus: 1.0,
                rho_plus: 2.0,
                q: 2.0,
            },
            vec![
                Parametrix::T,
                Parametrix::T0,
                Parametrix::T1,
                Parametrix::T2,
                Parametrix::Tbar,
                Parametrix::Tbar0,
                Parametrix::Tbar1,
                Parametrix::Tbar2,
            ],
        ),
    ];
    for (domain, family, ps) in runs {
        let ws = eval_weights(&family, domain, 80)?;
        let data = JacobiData::for_mode(&ws, 1)?;
        println!("{} on the {domain}, mode 1", family.label());
        println!(
            "  {:>6} {:>12} {:>12} {:>12} {:>12}",
            "Q", "||Q||_HS", "||Q||_2", "bound", "stated"
        );
        for p in ps {
            let e = hs_norm(&data, p)?;
            println!(
                "  {:>6} {:>12.6e} {:>12.6e} {:>12.6e} {:>12.6e}",
                format!("{p:?}"),
                e.frobenius,
                e.operator,
                e.bound,
                e.operator_bound_stated
            );
        }
    }
    Ok(())
}
