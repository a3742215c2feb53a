//! JSON document format for represented functions.
//!
//! A function document looks like
//!
//! ```json
//! {
//!   "domain": [0.0, 1.0],
//!   "c0": 0.0,
//!   "continuous": [ { "on": [0.0, 1.0], "expr": { "kind": "poly", "coeffs": [0.0, 1.0] } } ],
//!   "jumps": [ { "t": "0.5", "left": 0.0, "right": 1.0 } ],
//!   "series": { "kind": "geometric", "side": "right", "c": 0.5, "r": 0.5, "A": 1.0, "q": 0.5 },
//!   "overrides": [ { "t": "0.25", "value": 3.0 } ]
//! }
//! ```
//!
//! Jump and override locations are decimal strings and are compared exactly
//! after normalization.  Expression nodes are tagged by `kind`: `poly`,
//! `exp`, `sin`, `cos`, `sum`, `prod`, `scale`, `affine_compose`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::repfunc::{
    JumpRecord, JumpSeries, Loc, OverridePt, RepFunc, SeriesSide, SmoothPiece,
};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FuncDoc {
    pub domain: [f64; 2],
    #[serde(default)]
    pub c0: f64,
    #[serde(default)]
    pub continuous: Vec<PieceDoc>,
    #[serde(default)]
    pub jumps: Vec<JumpDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub series: Option<SeriesDoc>,
    #[serde(default)]
    pub overrides: Vec<OverrideDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PieceDoc {
    pub on: [f64; 2],
    pub expr: ExprNode,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JumpDoc {
    pub t: String,
    #[serde(default)]
    pub left: f64,
    #[serde(default)]
    pub right: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesDoc {
    pub kind: String,
    pub side: String,
    pub c: f64,
    pub r: f64,
    #[serde(rename = "A")]
    pub amp: f64,
    pub q: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OverrideDoc {
    pub t: String,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExprNode {
    Poly { coeffs: Vec<f64> },
    Exp { alpha: f64, beta: f64 },
    Sin { amp: f64, omega: f64, phase: f64 },
    Cos { amp: f64, omega: f64, phase: f64 },
    Sum { args: Vec<ExprNode> },
    Prod { args: Vec<ExprNode> },
    Scale { c: f64, arg: Box<ExprNode> },
    AffineCompose { a: f64, b: f64, arg: Box<ExprNode> },
}

impl ExprNode {
    pub fn to_expr(&self) -> Expr {
        match self {
            ExprNode::Poly { coeffs } => Expr::Poly(coeffs.clone()),
            ExprNode::Exp { alpha, beta } => Expr::Exp { alpha: *alpha, beta: *beta },
            ExprNode::Sin { amp, omega, phase } => {
                Expr::Sin { amp: *amp, omega: *omega, phase: *phase }
            }
            ExprNode::Cos { amp, omega, phase } => {
                Expr::Cos { amp: *amp, omega: *omega, phase: *phase }
            }
            ExprNode::Sum { args } => Expr::Sum(args.iter().map(|n| n.to_expr()).collect()),
            ExprNode::Prod { args } => Expr::Prod(args.iter().map(|n| n.to_expr()).collect()),
            ExprNode::Scale { c, arg } => Expr::Scale { c: *c, arg: Box::new(arg.to_expr()) },
            ExprNode::AffineCompose { a, b, arg } => {
                Expr::Affine { a: *a, b: *b, arg: Box::new(arg.to_expr()) }
            }
        }
    }

    /// Inverse of `to_expr` where the expression uses only document node
    /// kinds; engine-internal nodes have no document form.
    pub fn from_expr(e: &Expr) -> Option<ExprNode> {
        match e {
            Expr::Poly(c) => Some(ExprNode::Poly { coeffs: c.clone() }),
            Expr::Exp { alpha, beta } => Some(ExprNode::Exp { alpha: *alpha, beta: *beta }),
            Expr::Sin { amp, omega, phase } => {
                Some(ExprNode::Sin { amp: *amp, omega: *omega, phase: *phase })
            }
            Expr::Cos { amp, omega, phase } => {
                Some(ExprNode::Cos { amp: *amp, omega: *omega, phase: *phase })
            }
            Expr::Sum(args) => {
                let args: Option<Vec<ExprNode>> = args.iter().map(ExprNode::from_expr).collect();
                Some(ExprNode::Sum { args: args? })
            }
            Expr::Prod(args) => {
                let args: Option<Vec<ExprNode>> = args.iter().map(ExprNode::from_expr).collect();
                Some(ExprNode::Prod { args: args? })
            }
            Expr::Scale { c, arg } => {
                Some(ExprNode::Scale { c: *c, arg: Box::new(ExprNode::from_expr(arg)?) })
            }
            Expr::Affine { a, b, arg } => Some(ExprNode::AffineCompose {
                a: *a,
                b: *b,
                arg: Box::new(ExprNode::from_expr(arg)?),
            }),
            _ => None,
        }
    }
}

/// Parse a JSON string into a function document.
pub fn parse_func_doc(json: &str) -> Result<FuncDoc> {
    serde_json::from_str(json).map_err(|e| Error::Schema(e.to_string()))
}

/// Build a represented function from a document, validating all structural
/// invariants.  `series_tol` bounds the unmaterialized jump mass of series.
pub fn make_func(doc: &FuncDoc, series_tol: f64) -> Result<RepFunc> {
    let pieces: Vec<SmoothPiece> = doc
        .continuous
        .iter()
        .map(|p| SmoothPiece { lo: p.on[0], hi: p.on[1], expr: p.expr.to_expr() })
        .collect();

    let mut jumps = Vec::with_capacity(doc.jumps.len());
    for (i, j) in doc.jumps.iter().enumerate() {
        let loc = Loc::from_token(&j.t).ok_or_else(|| {
            Error::invariant(format!("/jumps/{i}/t"), format!("not a decimal string: {:?}", j.t))
        })?;
        jumps.push(JumpRecord { loc, left: j.left, right: j.right });
    }

    let mut series = Vec::new();
    if let Some(s) = &doc.series {
        if s.kind != "geometric" {
            return Err(Error::invariant("/series/kind", format!("unknown series kind {:?}", s.kind)));
        }
        let side = match s.side.as_str() {
            "left" => SeriesSide::Left,
            "right" => SeriesSide::Right,
            other => {
                return Err(Error::invariant(
                    "/series/side",
                    format!("side must be \"left\" or \"right\", got {other:?}"),
                ))
            }
        };
        series.push(JumpSeries { side, c: s.c, r: s.r, amp: s.amp, q: s.q });
    }

    let mut overrides = Vec::with_capacity(doc.overrides.len());
    for (i, ov) in doc.overrides.iter().enumerate() {
        let loc = Loc::from_token(&ov.t).ok_or_else(|| {
            Error::invariant(format!("/overrides/{i}/t"), format!("not a decimal string: {:?}", ov.t))
        })?;
        overrides.push(OverridePt { loc, value: ov.value });
    }

    RepFunc::new(
        (doc.domain[0], doc.domain[1]),
        doc.c0,
        pieces,
        jumps,
        series,
        overrides,
        series_tol,
    )
}

pub fn make_func_from_str(json: &str, series_tol: f64) -> Result<RepFunc> {
    make_func(&parse_func_doc(json)?, series_tol)
}

/// Serialize a function back to document form.  Fails when a continuous
/// piece uses an engine-internal expression node with no document
/// counterpart, or when the function carries more than one jump series.
pub fn func_to_doc(f: &RepFunc) -> Result<FuncDoc> {
    let (a, b) = f.domain();
    let mut continuous = Vec::new();
    for p in f.pieces() {
        let node = ExprNode::from_expr(&p.expr).ok_or_else(|| {
            Error::Schema("function contains expression nodes with no document form".into())
        })?;
        continuous.push(PieceDoc { on: [p.lo, p.hi], expr: node });
    }

    let jumps = f
        .explicit_jumps()
        .iter()
        .map(|j| JumpDoc {
            t: j.loc.token().map(str::to_string).unwrap_or_else(|| format!("{}", j.loc.t)),
            left: j.left,
            right: j.right,
        })
        .collect();

    let series = match f.series() {
        [] => None,
        [s] => Some(SeriesDoc {
            kind: "geometric".into(),
            side: match s.side {
                SeriesSide::Left => "left".into(),
                SeriesSide::Right => "right".into(),
            },
            c: s.c,
            r: s.r,
            amp: s.amp,
            q: s.q,
        }),
        _ => {
            return Err(Error::Schema(
                "function carries several jump series; the document form holds at most one".into(),
            ))
        }
    };

    let overrides = f
        .overrides()
        .iter()
        .map(|ov| OverrideDoc {
            t: ov.loc.token().map(str::to_string).unwrap_or_else(|| format!("{}", ov.loc.t)),
            value: ov.value,
        })
        .collect();

    Ok(FuncDoc { domain: [a, b], c0: f.c0(), continuous, jumps, series, overrides })
}

// ---- auxiliary documents used by the command line tools --------------------

/// Cauchy problem document: n-th order equation with coefficient functions
/// p[0] .. p[n] (the forcing term is p[n]) and initial vector gamma.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OdeDoc {
    pub n: usize,
    pub domain: [f64; 2],
    pub p: Vec<FuncDoc>,
    pub gamma: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
}

pub fn parse_ode_doc(json: &str) -> Result<OdeDoc> {
    serde_json::from_str(json).map_err(|e| Error::Schema(e.to_string()))
}

/// Separable kernel document for iterated-integral checks: K(s, t) =
/// sum of u_i(s) v_i(t).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelDoc {
    pub terms: Vec<KernelTermDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelTermDoc {
    pub u: FuncDoc,
    pub v: FuncDoc,
}

pub fn parse_kernel_doc(json: &str) -> Result<KernelDoc> {
    serde_json::from_str(json).map_err(|e| Error::Schema(e.to_string()))
}
