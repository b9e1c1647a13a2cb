//! Weight families, their conditions and the per-mode constants `C⁽ⁿ⁾`, `K⁽ⁿ⁾`.

use qdbar::weight_model::{
    decay_onset, eval_weights, mode_data, trace_s, validate_conditions, CustomWeights, DomainKind,
    WeightFamily,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let families = [
        (
            DomainKind::Disk,
            WeightFamily::GeometricDisk {
                rho_plus: 1.0,
                q: 0.5,
            },
        ),
        (
            DomainKind::Annulus,
            WeightFamily::SigmoidAnnulus {
                rho_minus: 1.0,
                rho_plus: 2.0,
                q: 2.0,
            },
        ),
    ];
    for (domain, family) in families {
        let ws = eval_weights(&family, domain, 120)?;
        let report = validate_conditions(&ws);
        println!("{} on the {domain}", family.label());
        println!("  conditions hold: {}", report.all_pass());
        println!("  tr S = {:.12}", trace_s(&ws));
        println!("  {:>3} {:>14} {:>14} {:>12}", "n", "C lo", "C hi", "K");
        for n in [0, 1, 2, 4, 8] {
            let md = mode_data(&ws, n)?;
            println!(
                "  {n:>3} {:>14.6e} {:>14.6e} {:>12.6}",
                md.c_sum.lo, md.c_sum.hi, md.k_const
            );
        }
        println!("  C halves from mode {:?}", decay_onset(&ws, 12)?);
    }

    // constant weights: s_k vanishes from k = 1 on
    let flat: Vec<(i64, f64)> = (0..40).map(|k| (k, 1.0)).collect();
    let custom = WeightFamily::Custom(CustomWeights::from_pairs(&flat, 1.0, None, None)?);
    let ws = eval_weights(&custom, DomainKind::Disk, 39)?;
    for f in validate_conditions(&ws).failures() {
        println!("constant weights: {f}");
    }
    Ok(())
}
