//! The six boundary-condition layouts on the annulus and the two on the disk.

use qdbar::aps::{mode_assembly, ApsParams};

fn main() {
    let points = [
        ApsParams::disk(2),
        ApsParams::disk(-1),
        ApsParams::annulus(2, 1),
        ApsParams::annulus(1, -1),
        ApsParams::annulus(0, 2),
        ApsParams::annulus(-1, -2),
        ApsParams::annulus(1, -2),
        ApsParams::annulus(-3, 1),
    ];
    for p in points {
        println!("{}", mode_assembly(&p).describe());
    }
}
