//! Command-line front end: parses function/ODE documents, dispatches to the
//! library engines, and prints one JSON report per invocation.
//!
//! Exit codes: 0 success, 2 nonexistent integral, 3 validation error,
//! 4 budget exhaustion.  CSV goes to `--out` (trajectories and convergence
//! tables); everything else is the JSON report on standard output.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use serde_json::{json, Value};

use stieltjes::error::{Error, Result};
use stieltjes::mollify::{mollify, mollify_convergence_report};
use stieltjes::qde::{self, CoefficientSet, Side};
use stieltjes::repfunc::{step_approx, RepFunc};
use stieltjes::rs::{self, ExistsCheck, Status};
use stieltjes::schema::{self, FuncDoc};
use stieltjes::star::{self, SeparableKernel};
use stieltjes::variation::{total_variation_with, MAGNITUDE_BUDGET};

#[derive(Parser)]
#[command(name = "stieltjes", version, about = "Stieltjes calculus for functions with jumps")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Total variation of --f with a certified enclosure
    Variation(Opts),
    /// Riemann-Stieltjes integral of --f against --g with existence checks
    RsInt(Opts),
    /// Jump-aware integral of --f against --g (boundary and interior atoms)
    StarInt(Opts),
    /// Residual of the integration-by-parts identity for the pair (--f, --g)
    ByPartsCheck(Opts),
    /// Both iterated integrals of a separable kernel (--spec) against --f and --g
    FubiniCheck(Opts),
    /// Weighted Holder inequality for (--f, --spec) against increasing --g
    Holder(Opts),
    /// Weighted Minkowski inequality for (--f, --spec) against increasing --g
    Minkowski(Opts),
    /// Norm estimate of the functional induced by --f, with extremal witness
    NormWitness(Opts),
    /// Sliding backward/forward average of --f with width --eps
    Mollify(Opts),
    /// Convergence table of averaged pairs (--f, --g) along --eps-grid
    MollifyReport(Opts),
    /// Solve the measure-coefficient Cauchy problem in --spec
    OdeSolve(Opts),
    /// Compare the measure solution with averaged-coefficient solutions
    DeltaCorrect(Opts),
    /// Uniform step-function approximation of --f within --eps
    StepApprox(Opts),
}

impl Cmd {
    fn name(&self) -> &'static str {
        match self {
            Cmd::Variation(_) => "variation",
            Cmd::RsInt(_) => "rs-int",
            Cmd::StarInt(_) => "star-int",
            Cmd::ByPartsCheck(_) => "by-parts-check",
            Cmd::FubiniCheck(_) => "fubini-check",
            Cmd::Holder(_) => "holder",
            Cmd::Minkowski(_) => "minkowski",
            Cmd::NormWitness(_) => "norm-witness",
            Cmd::Mollify(_) => "mollify",
            Cmd::MollifyReport(_) => "mollify-report",
            Cmd::OdeSolve(_) => "ode-solve",
            Cmd::DeltaCorrect(_) => "delta-correct",
            Cmd::StepApprox(_) => "step-approx",
        }
    }

    fn opts(&self) -> &Opts {
        match self {
            Cmd::Variation(o)
            | Cmd::RsInt(o)
            | Cmd::StarInt(o)
            | Cmd::ByPartsCheck(o)
            | Cmd::FubiniCheck(o)
            | Cmd::Holder(o)
            | Cmd::Minkowski(o)
            | Cmd::NormWitness(o)
            | Cmd::Mollify(o)
            | Cmd::MollifyReport(o)
            | Cmd::OdeSolve(o)
            | Cmd::DeltaCorrect(o)
            | Cmd::StepApprox(o) => o,
        }
    }
}

#[derive(Args)]
struct Opts {
    /// Function document (first operand)
    #[arg(long)]
    f: Option<PathBuf>,
    /// Function document (integrator / weight)
    #[arg(long)]
    g: Option<PathBuf>,
    /// Problem document (second operand, kernel, or ODE spec)
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Target accuracy
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Unrepresented jump-series mass allowed when parsing documents
    #[arg(long, default_value_t = 1e-12)]
    series_tol: f64,
    /// Refinement depth cap
    #[arg(long, default_value_t = 24)]
    max_depth: u32,
    /// Averaging / approximation width
    #[arg(long)]
    eps: Option<f64>,
    /// Comma-separated strictly decreasing widths
    #[arg(long)]
    eps_grid: Option<String>,
    /// Exponent for the inequality subcommands
    #[arg(long)]
    p: Option<f64>,
    /// Side-channel output file (JSON function/step documents, CSV tables)
    #[arg(long)]
    out: Option<PathBuf>,
}

/// One report per run.  `value` is a number or an array; any result either
/// carries an `error_bound` or a `status` flag.
#[derive(serde::Serialize)]
struct Report {
    command: String,
    inputs: BTreeMap<String, String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    value: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error_bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    status: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    loc: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    message: Option<String>,
    diagnostics: BTreeMap<String, Value>,
}

impl Report {
    fn new(command: &str, inputs: BTreeMap<String, String>) -> Report {
        Report {
            command: command.to_string(),
            inputs,
            value: None,
            error_bound: None,
            status: None,
            loc: None,
            message: None,
            diagnostics: BTreeMap::new(),
        }
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // --help/--version print through clap; real usage errors are
            // validation failures, not the nonexistence code clap defaults to
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let name = cli.cmd.name();
    let mut ctx = Ctx::default();
    let (report, code) = match dispatch(&cli.cmd, &mut ctx) {
        Ok((report, code)) => (report, code),
        Err(e) => {
            let mut report = Report::new(name, ctx.inputs.clone());
            let code = match &e {
                Error::Nonexistent { loc, .. } => {
                    report.status = Some("NONEXISTENT".into());
                    report.loc = Some(fmt_loc(*loc));
                    2
                }
                Error::Budget(_) | Error::StepFailure(_) => {
                    report.status = Some("BUDGET".into());
                    4
                }
                _ => 3,
            };
            report.message = Some(e.to_string());
            (report, code)
        }
    };
    let text = serde_json::to_string_pretty(&report).expect("report serializes");
    use std::io::Write;
    let _ = writeln!(std::io::stdout(), "{text}");
    std::process::exit(code);
}

/// Input files already read, keyed by path with content digests.
#[derive(Default)]
struct Ctx {
    inputs: BTreeMap<String, String>,
}

impl Ctx {
    fn load(&mut self, path: &Path) -> Result<String> {
        let bytes = std::fs::read(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        self.inputs.insert(path.display().to_string(), fnv1a_hex(&bytes));
        String::from_utf8(bytes).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
    }

    fn func(&mut self, path: &Path, series_tol: f64) -> Result<RepFunc> {
        schema::make_func_from_str(&self.load(path)?, series_tol)
    }
}

fn fnv1a_hex(bytes: &[u8]) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("{h:016x}")
}

fn req<'a, T>(o: &'a Option<T>, flag: &str) -> Result<&'a T> {
    o.as_ref()
        .ok_or_else(|| Error::invariant(format!("/{flag}"), format!("--{flag} is required here")))
}

fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null)
}

fn vec_num(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| num(x)).collect())
}

fn fmt_loc(t: f64) -> String {
    if t.fract() == 0.0 && t.abs() < 1e15 {
        format!("{}", t as i64)
    } else {
        format!("{t}")
    }
}

fn parse_eps_grid(s: &str) -> Result<Vec<f64>> {
    let grid: Vec<f64> = s
        .split(',')
        .map(|tok| {
            tok.trim()
                .parse::<f64>()
                .map_err(|_| Error::invariant("/eps_grid", format!("not a number: {tok:?}")))
        })
        .collect::<Result<_>>()?;
    if grid.is_empty() {
        return Err(Error::invariant("/eps_grid", "at least one width is required"));
    }
    Ok(grid)
}

fn write_out(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct KernelDoc {
    terms: Vec<KernelTerm>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct KernelTerm {
    u: FuncDoc,
    v: FuncDoc,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct OdeDoc {
    n: usize,
    domain: [f64; 2],
    p: Vec<FuncDoc>,
    gamma: Vec<f64>,
    #[serde(default)]
    tol: Option<f64>,
}

fn parse_ode(ctx: &mut Ctx, opts: &Opts) -> Result<(CoefficientSet, Vec<f64>, f64)> {
    let text = ctx.load(req(&opts.spec, "spec")?)?;
    let doc: OdeDoc =
        serde_json::from_str(&text).map_err(|e| Error::Schema(e.to_string()))?;
    let mut p = Vec::with_capacity(doc.p.len());
    for (i, pd) in doc.p.iter().enumerate() {
        if pd.domain != doc.domain {
            return Err(Error::invariant(
                format!("/p/{i}/domain"),
                "antiderivative domain must match the problem domain",
            ));
        }
        p.push(schema::make_func(pd, opts.series_tol)?);
    }
    let coeffs = CoefficientSet::new(doc.n, p)?;
    if doc.gamma.len() != doc.n {
        return Err(Error::invariant("/gamma", "need one initial value per derivative order"));
    }
    Ok((coeffs, doc.gamma, doc.tol.unwrap_or(opts.tol)))
}

fn trajectory_csv(tra: &qde::Trajectory, n: usize) -> String {
    let mut head = String::from("t");
    for i in 1..=n {
        head.push_str(&format!(",y{i}"));
    }
    head.push_str(",x");
    for i in 1..n {
        head.push_str(&format!(",x{i}"));
    }
    head.push_str(",side");
    let mut rows = vec![head];
    for (i, &t) in tra.grid.iter().enumerate() {
        let mut row = format!("{t}");
        for v in &tra.y[i] {
            row.push_str(&format!(",{v}"));
        }
        for v in &tra.x_derivs[i] {
            row.push_str(&format!(",{v}"));
        }
        row.push(',');
        match tra.sides[i] {
            Some(Side::Left) => row.push('-'),
            Some(Side::Right) => row.push('+'),
            None => {}
        }
        rows.push(row);
    }
    rows.push(String::new());
    rows.join("\n")
}

fn dispatch(cmd: &Cmd, ctx: &mut Ctx) -> Result<(Report, i32)> {
    let opts = cmd.opts();
    let report = |ctx: &Ctx| Report::new(cmd.name(), ctx.inputs.clone());
    match cmd {
        Cmd::Variation(_) => {
            let f = ctx.func(req(&opts.f, "f")?, opts.series_tol)?;
            let tv = total_variation_with(&f, opts.tol.min(1e-9), MAGNITUDE_BUDGET)?;
            let mut r = report(ctx);
            r.diagnostics.insert("continuous_part".into(), num(tv.cont_part));
            r.diagnostics.insert("jump_part".into(), num(tv.jump_part));
            r.diagnostics.insert("lo".into(), num(tv.lo));
            r.diagnostics.insert("hi".into(), num(tv.hi));
            if tv.infinite_suspected {
                r.status = Some("INFINITE_SUSPECTED".into());
            } else {
                r.value = Some(num(tv.value));
                r.error_bound = Some((tv.hi - tv.value).max(tv.value - tv.lo).max(0.0));
            }
            Ok((r, 0))
        }
        Cmd::RsInt(_) => {
            let f = ctx.func(req(&opts.f, "f")?, opts.series_tol)?;
            let g = ctx.func(req(&opts.g, "g")?, opts.series_tol)?;
            let mut r = report(ctx);
            match rs::rs_exists_check(&f, &g) {
                ExistsCheck::Ok => {}
                ExistsCheck::CommonDiscontinuity(loc) | ExistsCheck::MeasureFail(loc) => {
                    r.status = Some("NONEXISTENT".into());
                    r.loc = Some(fmt_loc(loc));
                    return Ok((r, 2));
                }
            }
            let enc = rs::rs_integral(&f, &g, opts.tol, opts.max_depth)?;
            r.diagnostics.insert("darboux_lo".into(), num(enc.lo));
            r.diagnostics.insert("darboux_hi".into(), num(enc.hi));
            r.diagnostics.insert("depth".into(), json!(enc.depth));
            r.diagnostics.insert("partition_points".into(), json!(enc.points.len()));
            match enc.status {
                Status::Nonexistent => {
                    r.status = Some("NONEXISTENT".into());
                    Ok((r, 2))
                }
                Status::Certified => {
                    r.value = Some(num(enc.value));
                    r.error_bound = Some(enc.error_bound);
                    Ok((r, 0))
                }
                Status::Budget => {
                    r.value = Some(num(enc.value));
                    r.error_bound = Some(enc.error_bound);
                    r.status = Some("BUDGET".into());
                    // the refinement certificate ran out, but the value can
                    // still be good; fail only when the bound misses the ask
                    Ok(if enc.error_bound > opts.tol { (r, 4) } else { (r, 0) })
                }
            }
        }
        Cmd::StarInt(_) => {
            let f = ctx.func(req(&opts.f, "f")?, opts.series_tol)?;
            let g = ctx.func(req(&opts.g, "g")?, opts.series_tol)?;
            let res = star::star_integral(&f, &g, opts.tol)?;
            let mut r = report(ctx);
            r.value = Some(num(res.value));
            r.error_bound = Some(res.error_bound);
            r.diagnostics.insert("continuous_part".into(), num(res.rs_part));
            r.diagnostics.insert("boundary_left".into(), num(res.boundary_left));
            r.diagnostics.insert("interior_jump_sum".into(), num(res.interior_sum));
            r.diagnostics.insert("boundary_right".into(), num(res.boundary_right));
            Ok((r, 0))
        }
        Cmd::ByPartsCheck(_) => {
            let f = ctx.func(req(&opts.f, "f")?, opts.series_tol)?;
            let g = ctx.func(req(&opts.g, "g")?, opts.series_tol)?;
            let (residual, bound) = star::star_by_parts_residual(&f, &g, opts.tol)?;
            let mut r = report(ctx);
            r.value = Some(num(residual));
            r.error_bound = Some(bound);
            r.diagnostics.insert("identity_holds".into(), json!(residual.abs() <= bound));
            Ok((r, 0))
        }
        Cmd::FubiniCheck(_) => {
            let text = ctx.load(req(&opts.spec, "spec")?)?;
            let doc: KernelDoc =
                serde_json::from_str(&text).map_err(|e| Error::Schema(e.to_string()))?;
            let mut terms = Vec::with_capacity(doc.terms.len());
            for term in &doc.terms {
                terms.push((
                    schema::make_func(&term.u, opts.series_tol)?,
                    schema::make_func(&term.v, opts.series_tol)?,
                ));
            }
            let kernel = SeparableKernel { terms };
            let f = ctx.func(req(&opts.f, "f")?, opts.series_tol)?;
            let g = ctx.func(req(&opts.g, "g")?, opts.series_tol)?;
            let chk = star::star_fubini(&kernel, &f, &g, opts.tol)?;
            let mut r = report(ctx);
            r.value = Some(num(chk.lhs - chk.rhs));
            r.error_bound = Some(chk.error_bound);
            r.diagnostics.insert("lhs".into(), num(chk.lhs));
            r.diagnostics.insert("rhs".into(), num(chk.rhs));
            r.diagnostics
                .insert("orders_agree".into(), json!((chk.lhs - chk.rhs).abs() <= chk.error_bound));
            Ok((r, 0))
        }
        Cmd::Holder(_) | Cmd::Minkowski(_) => {
            let x = ctx.func(req(&opts.f, "f")?, opts.series_tol)?;
            let y = ctx.func(req(&opts.spec, "spec")?, opts.series_tol)?;
            let g = ctx.func(req(&opts.g, "g")?, opts.series_tol)?;
            let p = *req(&opts.p, "p")?;
            let chk = match cmd {
                Cmd::Holder(_) => star::holder_check(&x, &y, &g, p, opts.tol)?,
                _ => star::minkowski_check(&x, &y, &g, p, opts.tol)?,
            };
            let mut r = report(ctx);
            r.value = Some(vec_num(&[chk.lhs, chk.rhs]));
            r.error_bound = Some(chk.error_bound);
            r.diagnostics
                .insert("inequality_holds".into(), json!(chk.lhs <= chk.rhs + chk.error_bound));
            r.diagnostics.insert("slack".into(), num(chk.rhs - chk.lhs));
            Ok((r, 0))
        }
        Cmd::NormWitness(_) => {
            let g0 = ctx.func(req(&opts.f, "f")?, opts.series_tol)?;
            let eps = opts.eps.unwrap_or(1e-3);
            let w = star::functional_norm_witness(&g0, eps, opts.tol)?;
            let mut r = report(ctx);
            r.value = Some(num(w.norm_est));
            r.error_bound = Some(w.error_bound);
            r.diagnostics.insert("eps".into(), num(eps));
            r.diagnostics.insert("witness_jumps".into(), json!(w.witness.0.jumps().len()));
            if let Some(out) = &opts.out {
                let doc = schema::func_to_doc(&w.witness.0)?;
                let text = serde_json::to_string_pretty(&doc)
                    .map_err(|e| Error::Schema(e.to_string()))?;
                write_out(out, &text)?;
                r.diagnostics.insert("witness_file".into(), json!(out.display().to_string()));
            }
            Ok((r, 0))
        }
        Cmd::Mollify(_) => {
            let y = ctx.func(req(&opts.f, "f")?, opts.series_tol)?;
            let eps = *req(&opts.eps, "eps")?;
            let dropped = !y.overrides().is_empty();
            let smooth = mollify(&y, eps)?;
            let tv = total_variation_with(&smooth, opts.tol.min(1e-9), MAGNITUDE_BUDGET)?;
            let mut r = report(ctx);
            r.value = Some(num(tv.value));
            r.error_bound = Some((tv.hi - tv.lo).max(0.0));
            r.diagnostics.insert("eps".into(), num(eps));
            r.diagnostics.insert("overrides_dropped".into(), json!(dropped));
            r.diagnostics.insert("pieces".into(), json!(smooth.pieces().len()));
            if let Some(out) = &opts.out {
                let doc = schema::func_to_doc(&smooth)?;
                let text = serde_json::to_string_pretty(&doc)
                    .map_err(|e| Error::Schema(e.to_string()))?;
                write_out(out, &text)?;
                r.diagnostics.insert("averaged_file".into(), json!(out.display().to_string()));
            }
            Ok((r, 0))
        }
        Cmd::MollifyReport(_) => {
            let x = ctx.func(req(&opts.f, "f")?, opts.series_tol)?;
            let g = ctx.func(req(&opts.g, "g")?, opts.series_tol)?;
            let grid = parse_eps_grid(req(&opts.eps_grid, "eps-grid")?)?;
            let rep = mollify_convergence_report(&x, &g, &grid, opts.tol)?;
            let mut r = report(ctx);
            r.value = Some(vec_num(&rep.int_dev));
            r.error_bound = Some(opts.tol);
            r.diagnostics.insert("eps_grid".into(), vec_num(&rep.eps_grid));
            r.diagnostics.insert("sup_dev".into(), vec_num(&rep.sup_dev));
            r.diagnostics.insert("var_dev".into(), vec_num(&rep.var_dev));
            r.diagnostics.insert("overrides_dropped".into(), json!(rep.overrides_dropped));
            if let Some(out) = &opts.out {
                let mut csv = String::from("eps,sup_dev,var_dev,int_dev\n");
                for i in 0..rep.eps_grid.len() {
                    csv.push_str(&format!(
                        "{},{},{},{}\n",
                        rep.eps_grid[i], rep.sup_dev[i], rep.var_dev[i], rep.int_dev[i]
                    ));
                }
                write_out(out, &csv)?;
                r.diagnostics.insert("table_file".into(), json!(out.display().to_string()));
            }
            Ok((r, 0))
        }
        Cmd::OdeSolve(_) => {
            let (coeffs, gamma, tol) = parse_ode(ctx, opts)?;
            let sys = qde::reduce(&coeffs, &gamma)?;
            let tra = qde::solve_cauchy(&sys, tol)?;
            let mut r = report(ctx);
            let last = tra.x_derivs.last().expect("trajectory is nonempty");
            r.value = Some(num(last[0]));
            r.error_bound = Some(tol);
            r.diagnostics.insert("n".into(), json!(coeffs.n()));
            r.diagnostics.insert("rows".into(), json!(tra.grid.len()));
            r.diagnostics.insert("events".into(), vec_num(&tra.events));
            r.diagnostics.insert("final_state".into(), vec_num(last));
            if let Some(out) = &opts.out {
                write_out(out, &trajectory_csv(&tra, coeffs.n()))?;
                r.diagnostics.insert("trajectory_file".into(), json!(out.display().to_string()));
            }
            Ok((r, 0))
        }
        Cmd::DeltaCorrect(_) => {
            let (coeffs, gamma, tol) = parse_ode(ctx, opts)?;
            let grid = parse_eps_grid(req(&opts.eps_grid, "eps-grid")?)?;
            let rep = qde::delta_correctness(&coeffs, &gamma, &grid, tol)?;
            let mut r = report(ctx);
            r.value = Some(vec_num(&rep.dev));
            r.error_bound = Some(tol);
            r.diagnostics.insert("eps_grid".into(), vec_num(&rep.eps_grid));
            r.diagnostics.insert("events".into(), vec_num(&rep.events));
            let decreasing = rep.dev.windows(2).all(|w| w[1] < w[0]);
            r.diagnostics.insert("strictly_decreasing".into(), json!(decreasing));
            if let Some(out) = &opts.out {
                let mut csv = String::from("eps,deviation\n");
                for (e, d) in rep.eps_grid.iter().zip(&rep.dev) {
                    csv.push_str(&format!("{e},{d}\n"));
                }
                write_out(out, &csv)?;
                r.diagnostics.insert("table_file".into(), json!(out.display().to_string()));
            }
            Ok((r, 0))
        }
        Cmd::StepApprox(_) => {
            let f = ctx.func(req(&opts.f, "f")?, opts.series_tol)?;
            let eps = *req(&opts.eps, "eps")?;
            let (step, achieved) = step_approx(&f, eps)?;
            let mut r = report(ctx);
            r.value = Some(num(achieved));
            r.error_bound = Some(achieved);
            r.diagnostics.insert("eps".into(), num(eps));
            r.diagnostics.insert("cells".into(), json!(step.values.len()));
            if let Some(out) = &opts.out {
                let doc = json!({
                    "breakpoints": step.breakpoints,
                    "values": step.values,
                    "node_values": step.node_values,
                });
                let text = serde_json::to_string_pretty(&doc)
                    .map_err(|e| Error::Schema(e.to_string()))?;
                write_out(out, &text)?;
                r.diagnostics.insert("step_file".into(), json!(out.display().to_string()));
            }
            Ok((r, 0))
        }
    }
}
