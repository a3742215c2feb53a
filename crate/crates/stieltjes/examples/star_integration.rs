//! The jump-aware integral: it exists where the classical one refuses,
//! weights every atom of the integrator by the integrand's value at the
//! point, and its running version obeys an exact jump law.
//!
//! Run with: cargo run --example star_integration

use stieltjes::expr::Expr;
use stieltjes::repfunc::{JumpRecord, Loc, RepFunc, SmoothPiece};
use stieltjes::rs::{rs_exists_check, ExistsCheck};
use stieltjes::star::{star_by_parts_residual, star_indefinite, star_integral};

fn two_jump(dom: (f64, f64), c0: f64, slope: f64, jumps: &[(f64, f64, f64)]) -> RepFunc {
    RepFunc::new(
        dom,
        c0,
        vec![SmoothPiece { lo: dom.0, hi: dom.1, expr: Expr::Poly(vec![0.0, slope]) }],
        jumps
            .iter()
            .map(|&(t, left, right)| JumpRecord { loc: Loc::from_value(t), left, right })
            .collect(),
        vec![],
        vec![],
        1e-12,
    )
    .unwrap()
}

fn main() {
    // both functions jump at 0.5 - classically hopeless, here routine
    let f = RepFunc::unit_jump(0.0, 1.0, 0.5).unwrap();
    let g = two_jump((0.0, 1.0), 0.0, 1.0, &[(0.5, 0.0, 1.0)]);
    match rs_exists_check(&f, &g) {
        ExistsCheck::Ok => println!("unexpected"),
        _ => println!("classical integral of the pair does not exist (shared jump at 0.5)"),
    }
    let res = star_integral(&f, &g, 1e-9).unwrap();
    println!(
        "jump-aware value = {} (smooth part {}, interior jump sum {})",
        res.value, res.rs_part, res.interior_sum
    );

    // the running integral jumps exactly by f(t) times the parts of g
    let x = two_jump((0.0, 1.0), 0.2, 0.5, &[(0.3, 0.5, 0.25)]);
    let w = two_jump((0.0, 1.0), 0.0, 1.0, &[(0.3, 0.2, -0.3), (0.7, 0.8, 0.1)]);
    let phi = star_indefinite(&x, &w).unwrap();
    for t in [0.3, 0.7] {
        let lp = phi.limits_and_jumps(t).unwrap();
        let lw = w.limits_and_jumps(t).unwrap();
        let xv = x.eval(t).unwrap();
        println!(
            "at {t}: running-integral parts ({:.4}, {:.4}) = x(t) * weight parts ({:.4}, {:.4})",
            lp.sig_minus,
            lp.sig_plus,
            xv * lw.sig_minus,
            xv * lw.sig_plus
        );
    }

    // by parts holds with a correction for the shared jumps
    let (residual, bound) = star_by_parts_residual(&x, &w, 1e-10).unwrap();
    println!("by-parts residual {residual:.2e} within bound {bound:.2e}");
}
