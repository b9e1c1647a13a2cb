//! Index of `D_N` on the disk and `D_{M,N}` on the annulus, mode by mode and
//! by dense SVD.

use qdbar::aps::{index, ApsParams, ApsSystem, IndexOptions, OracleCache};
use qdbar::fourier::FourierSpace;
use qdbar::weight_model::{eval_weights, DomainKind, WeightFamily};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let opts = IndexOptions {
        oracle_windows: vec![40, 80],
        ..Default::default()
    };
    let cache = OracleCache::default();

    let ws = eval_weights(
        &WeightFamily::GeometricDisk {
            rho_plus: 1.0,
            q: 0.5,
        },
        DomainKind::Disk,
        200,
    )?;
    let sp = FourierSpace::new(&ws, 16)?;
    println!(
        "{:>4} {:>6} {:>6} {:>6} {:>6}",
        "N", "ker", "coker", "index", "oracle"
    );
    for n in -4..=4 {
        let r = index(&ApsSystem::new(&sp, ApsParams::disk(n))?, &opts, &cache)?;
        println!(
            "{n:>4} {:>6} {:>6} {:>6} {:>6}",
            r.dim_ker,
            r.dim_coker,
            r.total_index,
            r.oracle
                .iter()
                .map(|o| o.index.to_string())
                .collect::<Vec<_>>()
                .join("/")
        );
    }

    let ws = eval_weights(
        &WeightFamily::SigmoidAnnulus {
            rho_minus: 1.0,
            rho_plus: 2.0,
            q: 2.0,
        },
        DomainKind::Annulus,
        120,
    )?;
    let sp = FourierSpace::new(&ws, 16)?;
    println!("\nannulus index M + N + 1 (rows M = -3..3, columns N = -3..3)");
    for m in -3..=3 {
        let mut row = String::new();
        for n in -3..=3 {
            let r = index(
                &ApsSystem::new(&sp, ApsParams::annulus(m, n))?,
                &opts,
                &cache,
            )?;
            assert!(r.agrees());
            row.push_str(&format!("{:>4}", r.total_index));
        }
        println!("M={m:>2} {row}");
    }
    Ok(())
}
