//! Total variation: certified enclosures, partition lower bounds, and the
//! divergence flag for oscillations that never settle.
//!
//! Run with: cargo run --example variation

use std::f64::consts::{FRAC_PI_2, PI};

use stieltjes::expr::Expr;
use stieltjes::repfunc::RepFunc;
use stieltjes::variation::{partition_sum, total_variation, Partition};

fn main() {
    // a unit jump has variation exactly 1, carried by the jump records
    let h = RepFunc::unit_jump(0.0, 1.0, 0.5).unwrap();
    let tv = total_variation(&h).unwrap();
    println!("step: variation = {} (jump part {}, continuous part {})", tv.value, tv.jump_part, tv.cont_part);

    // a full sine period folds to 4 via closed-form extrema of the catalogue
    let s = RepFunc::from_expr(0.0, 2.0 * PI, Expr::Sin { amp: 1.0, omega: 1.0, phase: 0.0 });
    let tv = total_variation(&s).unwrap();
    println!("sine on [0, 2pi]: variation = {:.12} in [{:.12}, {:.12}]", tv.value, tv.lo, tv.hi);

    // partition sums are certified lower bounds that grow under refinement
    let coarse = Partition::uniform((0.0, 2.0 * PI), 4);
    let fine = coarse.refine(&[FRAC_PI_2, 1.5 * PI, 2.5, 4.0]);
    println!(
        "partition sums: coarse {:.6} <= fine {:.6} <= variation {:.6}",
        partition_sum(&s, &coarse).unwrap(),
        partition_sum(&s, &fine).unwrap(),
        tv.value
    );

    // t * cos(pi / (2 t)) oscillates too fast near 0 for finite variation:
    // the harmonic lower bounds grow without settling and the result is a
    // flag, never a number
    let wild = RepFunc::from_expr(0.0, 1.0, Expr::OscRecip { amp: 1.0, coef: FRAC_PI_2 });
    let tv = total_variation(&wild).unwrap();
    println!(
        "oscillating fixture: infinite_suspected = {}, last certified lower bound {:.3}",
        tv.infinite_suspected, tv.lo
    );
}
