//! Weighted mean inequalities over jumpy weights, and the norm of the
//! integration functional with an explicit extremal witness.
//!
//! Run with: cargo run --example inequalities_and_norms

use stieltjes::expr::Expr;
use stieltjes::repfunc::{JumpRecord, Loc, RepFunc, SmoothPiece};
use stieltjes::star::{functional_norm_witness, holder_check, minkowski_check, star_integral};
use stieltjes::variation::total_variation;

fn main() {
    let x = RepFunc::from_expr(0.0, 1.0, Expr::Poly(vec![0.2, 1.0]));
    let y = RepFunc::from_expr(0.0, 1.0, Expr::Sin { amp: 0.8, omega: 2.0, phase: 0.1 });
    // an increasing weight with an atom at 0.6
    let g = RepFunc::new(
        (0.0, 1.0),
        0.0,
        vec![SmoothPiece { lo: 0.0, hi: 1.0, expr: Expr::Poly(vec![0.0, 1.0]) }],
        vec![JumpRecord { loc: Loc::from_token("0.6").unwrap(), left: 0.0, right: 0.5 }],
        vec![],
        vec![],
        1e-12,
    )
    .unwrap();

    let hc = holder_check(&x, &y, &g, 2.0, 1e-9).unwrap();
    println!("two-exponent mean bound:   {:.9} <= {:.9}", hc.lhs, hc.rhs);
    let mc = minkowski_check(&x, &y, &g, 2.0, 1e-9).unwrap();
    println!("triangle bound for means:  {:.9} <= {:.9}", mc.lhs, mc.rhs);

    // equality case: the same function on both slots with dual exponents
    let he = holder_check(&x, &x, &g, 2.0, 1e-10).unwrap();
    println!("equality case gap: {:.2e}", (he.lhs - he.rhs).abs());

    // the integration functional x -> int x dg over unit-sup test functions
    // with x(a) = 0 attains the total variation of the weight; the witness
    // is a concrete sign-pattern step function
    let g0 = RepFunc::new(
        (0.0, 1.0),
        0.0,
        vec![SmoothPiece { lo: 0.0, hi: 1.0, expr: Expr::Poly(vec![0.0, 1.0]) }],
        vec![JumpRecord { loc: Loc::from_token("0.5").unwrap(), left: -2.0, right: 0.0 }],
        vec![],
        vec![],
        1e-12,
    )
    .unwrap();
    let tv = total_variation(&g0).unwrap();
    let w = functional_norm_witness(&g0, 1e-3, 1e-9).unwrap();
    println!(
        "norm estimate {:.6} vs total variation {:.6} (witness has {} jumps)",
        w.norm_est,
        tv.value,
        w.witness.0.jumps().len()
    );
    let check = star_integral(&w.witness.0, &g0, 1e-9).unwrap();
    println!("integral against the witness reproduces the estimate: {:.6}", check.value);
}
