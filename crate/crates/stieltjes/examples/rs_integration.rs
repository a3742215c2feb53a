//! Classical Riemann-Stieltjes integration with Darboux certificates, the
//! existence pre-check, and integration by parts.
//!
//! Run with: cargo run --example rs_integration

use stieltjes::expr::Expr;
use stieltjes::repfunc::{Loc, OverridePt, RepFunc, SmoothPiece};
use stieltjes::rs::{rs_by_parts, rs_exists_check, rs_integral, ExistsCheck};

fn main() {
    // integrating t^2 against a unit step at 0.5 samples the integrand
    // exactly at the jump: the answer is 0.25 with a two-sided certificate
    let f = RepFunc::from_expr(0.0, 1.0, Expr::Poly(vec![0.0, 0.0, 1.0]));
    let g = RepFunc::unit_jump(0.0, 1.0, 0.5).unwrap();
    let enc = rs_integral(&f, &g, 1e-9, 24).unwrap();
    println!(
        "int t^2 d(step at 0.5) = {} in [{:.12}, {:.12}], {} partition points",
        enc.value,
        enc.lo,
        enc.hi,
        enc.points.len()
    );

    // when integrand and integrator share a discontinuity, no refinement
    // can settle the tagged sums; the pre-check names the location
    let bad_f = RepFunc::new(
        (0.0, 1.0),
        0.0,
        vec![SmoothPiece { lo: 0.0, hi: 1.0, expr: Expr::Poly(vec![0.0, 1.0]) }],
        vec![],
        vec![],
        vec![OverridePt { loc: Loc::from_token("0.5").unwrap(), value: 7.0 }],
        1e-12,
    )
    .unwrap();
    match rs_exists_check(&bad_f, &g) {
        ExistsCheck::Ok => println!("unexpected: pair accepted"),
        ExistsCheck::CommonDiscontinuity(loc) => println!("refused: shared discontinuity at {loc}"),
        ExistsCheck::MeasureFail(loc) => {
            println!("refused: integrand override sits on integrator mass at {loc}")
        }
    }
    println!("rs_integral error: {}", rs_integral(&bad_f, &g, 1e-9, 24).unwrap_err());

    // by parts: int f dg + int g df against the boundary bracket
    let u = RepFunc::from_expr(0.0, 1.0, Expr::Sin { amp: 1.0, omega: 2.0, phase: 0.0 });
    let v = RepFunc::from_expr(0.0, 1.0, Expr::Poly(vec![0.3, -0.5, 1.0]));
    let bp = rs_by_parts(&u, &v, 1e-10, 24).unwrap();
    println!(
        "by parts: pair sum {:.12} vs bracket {:.12} (residual {:.2e})",
        bp.lhs,
        bp.rhs,
        (bp.lhs - bp.rhs).abs()
    );
}
