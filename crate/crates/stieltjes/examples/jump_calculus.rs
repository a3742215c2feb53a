//! Building and probing functions with jump discontinuities.
//!
//! Run with: cargo run --example jump_calculus

use stieltjes::expr::Expr;
use stieltjes::repfunc::{step_approx, JumpRecord, Loc, RepFunc, SmoothPiece};

fn main() {
    // A function is a continuous catalogue part plus explicit jump records:
    // here 0.5 t, a jump at 0.3 (left part 0.5, right part 0.25), and a
    // second mixed jump at 0.7.
    let f = RepFunc::new(
        (0.0, 1.0),
        0.2,
        vec![SmoothPiece { lo: 0.0, hi: 1.0, expr: Expr::Poly(vec![0.0, 0.5]) }],
        vec![
            JumpRecord { loc: Loc::from_token("0.3").unwrap(), left: 0.5, right: 0.25 },
            JumpRecord { loc: Loc::from_token("0.7").unwrap(), left: -0.4, right: 0.6 },
        ],
        vec![],
        vec![],
        1e-12,
    )
    .unwrap();

    println!("values across the first jump:");
    for t in [0.25, 0.3, 0.35] {
        println!("  f({t}) = {}", f.eval(t).unwrap());
    }

    let lim = f.limits_and_jumps(0.3).unwrap();
    println!(
        "one-sided limits at 0.3: left {}, right {}, parts ({}, {})",
        lim.left, lim.right, lim.sig_minus, lim.sig_plus
    );

    // split into jump content and continuous content
    let (cont, jumpy) = f.decompose();
    println!(
        "decompose at t = 0.5: continuous {} + jumps {} = {}",
        cont.eval(0.5).unwrap(),
        jumpy.eval(0.5).unwrap(),
        f.eval(0.5).unwrap()
    );

    // left-continuous / right-continuous split (used by the averaging code)
    let (plus, minus) = f.rl_split();
    println!(
        "rl_split at t = 0.5: {} + {} = {}",
        plus.eval(0.5).unwrap(),
        minus.eval(0.5).unwrap(),
        f.eval(0.5).unwrap()
    );

    // a certified step-function approximation within 0.05
    let (step, achieved) = step_approx(&f, 0.05).unwrap();
    println!(
        "step approximation: {} cells, certified sup deviation {achieved:.4}",
        step.values.len()
    );
}
