//! Command execution. Nothing here touches the process: output text and
//! the exit code are returned to the caller.

use std::path::{Path, PathBuf};

use koenigs_core::autoconjugate::{self, CurvePair};
use koenigs_core::conics::{self, Seed, TouchingInstance, SEED_PARAMETERS};
use koenigs_core::grid::{self, VERIFY_BOUND};
use koenigs_core::inscribed::{self, BuildOptions, Split};
use koenigs_core::quadric::SubQuadric;
use koenigs_core::{fixtures, qnet, Error, QNet, Quadric, Subspace, Tolerance};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::cli::{Check, Cli, Command, ExportArgs, Format, GenArgs, GenKind, SplitArg, VerifyArgs};
use crate::exit::{CliError, CliResult, Code};
use crate::mesh::{Chart, Mesh};
use crate::schema::{read_json, to_text, InstanceJson, NetJson, PairJson, QuadricJson};

/// What a command produced.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub code: Code,
    pub stdout: String,
    pub stderr: String,
}

struct Ctx {
    tol: Tolerance,
    seed: u64,
    out: Option<PathBuf>,
}

impl Ctx {
    /// Writes `text` to `--out`, or returns it for standard output.
    fn emit(&self, text: String) -> CliResult<String> {
        match &self.out {
            Some(path) => {
                std::fs::write(path, text).map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))?;
                Ok(String::new())
            }
            None => Ok(text),
        }
    }
}

/// Runs a parsed command line. Errors become the matching exit code with
/// the message on standard error.
pub fn run(cli: &Cli) -> Outcome {
    let result = Tolerance::new(cli.global.rank_tol, cli.global.residual_tol)
        .map_err(CliError::from)
        .and_then(|tol| {
            let ctx = Ctx { tol, seed: cli.global.seed, out: cli.global.out.clone() };
            match &cli.command {
                Command::Gen(a) => gen(&ctx, a),
                Command::Verify(a) => verify(&ctx, a),
                Command::Export(a) => export(&ctx, a),
            }
        });
    result.unwrap_or_else(|e| Outcome {
        code: e.code,
        stdout: String::new(),
        stderr: format!("error: {}\n", e.message),
    })
}

fn required<T: Clone>(v: &Option<T>, flag: &str) -> CliResult<T> {
    v.clone().ok_or_else(|| CliError::invalid(format!("--{flag} is required")))
}

fn log_line(v: Value) -> String {
    format!("{v}\n")
}

fn gen(ctx: &Ctx, a: &GenArgs) -> CliResult<Outcome> {
    let tol = &ctx.tol;
    let (text, log) = match a.kind {
        GenKind::TangentGrid => {
            let (rows, cols) = (required(&a.rows, "rows")?, required(&a.cols, "cols")?);
            if rows < 2 || cols < 2 {
                return Err(CliError::invalid("a tangent grid needs at least 2 rows and 2 columns"));
            }
            let net = fixtures::tangent_grid(cols, rows, ctx.seed)?;
            let k = conics::is_koenigs(&net, tol)?;
            let log = json!({"generated": "tangent-grid", "is_koenigs": k.is_koenigs(), "closure_residual": k.closure_residual});
            (to_text(&NetJson::from_net(&net, Some(1)))?, log)
        }
        GenKind::Autoconjugate => {
            let (d, len) = (required(&a.d, "d")?, required(&a.len, "len")?);
            if d == 0 {
                return Err(CliError::invalid("--d must be positive"));
            }
            if len < 2 * d + 2 {
                return Err(CliError::invalid(format!("curves for d = {d} need --len ≥ {}", 2 * d + 2)));
            }
            let pair = autoconjugate::generate_pair(d, len, ctx.seed, tol)?;
            let log = json!({
                "generated": "autoconjugate",
                "sigma_autoconjugacy_residual": autoconjugate::autoconjugacy_residual(&pair.sigma, &pair.quadric, d, tol)?,
                "tau_autoconjugacy_residual": autoconjugate::autoconjugacy_residual(&pair.tau, &pair.quadric, d, tol)?,
                "generic_pair": autoconjugate::is_generic_pair(&pair.sigma, &pair.tau, tol).ok(),
            });
            (to_text(&PairJson::from_pair(&pair))?, log)
        }
        GenKind::GridFromCurves => {
            let pair = read_json::<PairJson>(&required(&a.pair, "pair")?)?.to_pair()?;
            let net = autoconjugate::curves_to_grid(&pair, tol)?;
            let generic = grid::is_generic_grid(&net, pair.d, tol).map(|g| g.is_generic).ok();
            let log = json!({
                "generated": "grid-from-curves",
                "is_dgrid": grid::check_dgrid(&net, pair.d, tol).is_dgrid,
                "generic": generic,
            });
            (to_text(&NetJson::from_net(&net, Some(pair.d)))?, log)
        }
        GenKind::SpecialGrid => {
            let (d, len) = (required(&a.d, "d")?, required(&a.len, "len")?);
            if d < 2 {
                return Err(CliError::invalid("special grids need d ≥ 2"));
            }
            let (_, net) = fixtures::special_grid(d, len, ctx.seed, tol)?;
            let log = json!({
                "generated": "special-grid",
                "special": grid::is_special_grid(&net, d, tol)?.special,
                "is_koenigs": conics::is_koenigs(&net, tol)?.is_koenigs(),
                "is_dgrid": grid::check_dgrid(&net, d, tol).is_dgrid,
            });
            (to_text(&NetJson::from_net(&net, Some(d)))?, log)
        }
    };
    Ok(Outcome { code: Code::Pass, stdout: ctx.emit(text)?, stderr: log_line(log) })
}

fn read_net(path: &Option<PathBuf>) -> CliResult<(QNet, Option<usize>)> {
    let j = read_json::<NetJson>(&required(path, "net")?)?;
    Ok((j.to_net()?, j.d))
}

fn grid_order(flag: Option<usize>, file: Option<usize>) -> CliResult<usize> {
    match flag.or(file) {
        Some(0) => Err(CliError::invalid("grid order must be positive")),
        Some(d) => Ok(d),
        None => Err(CliError::invalid("grid order unknown: pass --d or use a grid file")),
    }
}

/// `special`, a number `t`, or an instance file; `t = 0.37` by default.
fn resolve_instance(ctx: &Ctx, net: &QNet, spec: Option<&str>, d: Option<usize>) -> CliResult<TouchingInstance> {
    let tol = &ctx.tol;
    let spec = spec.unwrap_or("");
    if spec == "special" {
        let d = grid_order(d, None)?;
        return Ok(grid::special_structure(net, d, tol)?.instance);
    }
    if spec.is_empty() {
        return Ok(conics::propagate(net, &Seed::Parameter { face: (0, 0), t: SEED_PARAMETERS[0] }, tol)?);
    }
    if let Ok(t) = spec.parse::<f64>() {
        if !t.is_finite() {
            return Err(CliError::invalid("instance parameter must be finite"));
        }
        return Ok(conics::propagate(net, &Seed::Parameter { face: (0, 0), t }, tol)?);
    }
    let j = read_json::<InstanceJson>(Path::new(spec))?;
    j.check()?;
    let inst = conics::propagate(net, &j.seed.to_seed(net.ambient_dim())?, tol)?;
    let (s, t) = (j.s.to_net()?, j.t.to_net()?);
    let mismatch = inst.s.distance(&s).max(inst.t.distance(&t));
    if mismatch > VERIFY_BOUND {
        return Err(CliError::invalid(format!("instance file does not belong to the net (deviation {mismatch:e})")));
    }
    Ok(inst)
}

fn report(check: &str, pass: bool, body: Value) -> CliResult<Outcome> {
    let mut v = json!({"check": check, "pass": pass});
    if let (Value::Object(m), Value::Object(extra)) = (&mut v, body) {
        m.extend(extra);
    }
    Ok(Outcome { code: if pass { Code::Pass } else { Code::Fail }, stdout: to_text(&v)?, stderr: String::new() })
}

fn verify(ctx: &Ctx, a: &VerifyArgs) -> CliResult<Outcome> {
    let tol = &ctx.tol;
    match a.check {
        Check::Koenigs => {
            let (net, _) = read_net(&a.net)?;
            let k = conics::is_koenigs(&net, tol)?;
            let runs: Vec<_> = SEED_PARAMETERS
                .par_iter()
                .map(|&t| (t, conics::propagate(&net, &Seed::Parameter { face: (0, 0), t }, tol)))
                .collect();
            let sweep: Vec<Value> = runs
                .iter()
                .map(|(t, r)| match r {
                    Ok(inst) => json!({"t": t, "closure_residual": inst.closure_residual}),
                    Err(e) => json!({"t": t, "error": e.to_string()}),
                })
                .collect();
            // The instance of the first usable seed goes to --out.
            if let Some(inst) = runs.iter().find_map(|(_, r)| r.as_ref().ok()) {
                if ctx.out.is_some() {
                    ctx.emit(to_text(&InstanceJson::from_instance(inst))?)?;
                }
            }
            report(
                "koenigs",
                k.is_koenigs(),
                json!({
                    "closure_residual": k.closure_residual,
                    "propagation_closure": k.propagation_closure,
                    "worst_face": [k.worst_face.0, k.worst_face.1],
                    "vertex_coplanarity": k.vertex_coplanarity,
                    "coplanarity_residual": k.coplanarity_residual,
                    "seeds": sweep,
                }),
            )
        }
        Check::Binet => {
            let (net, d) = read_net(&a.net)?;
            let inst = resolve_instance(ctx, &net, a.instance.as_deref(), a.d.or(d))?;
            let b = conics::binet_check(&inst.s, &inst.t, tol)?;
            report(
                "binet",
                b.max() <= VERIFY_BOUND,
                json!({"max_residual": b.max(), "max_hs_kt": b.max_hs_kt, "max_ht_ks": b.max_ht_ks, "compared": b.compared}),
            )
        }
        Check::Inscribed => verify_inscribed(ctx, a),
        Check::Grid => {
            let (net, file_d) = read_net(&a.net)?;
            let d = grid_order(a.d, file_d)?;
            let dgrid = grid::check_dgrid(&net, d, tol);
            let generic = grid::is_generic_grid(&net, d, tol)?;
            let special = grid::is_special_grid(&net, d, tol)?;
            let mut body = json!({
                "d": d,
                "is_dgrid": dgrid.is_dgrid,
                "offending": dgrid.offending.map(|(dir, index, dim)| json!({
                    "direction": format!("{dir:?}").to_lowercase(),
                    "index": index,
                    "dim": dim,
                })),
                "generic": generic.is_generic,
                "pd_degenerate": generic.pd_degenerate,
                "pmd_degenerate": generic.pmd_degenerate,
                "special": special.special,
            });
            let mut pass = dgrid.is_dgrid && generic.is_generic;
            if generic.is_generic {
                let plus = grid::intersection_formula(&net, d, tol)?;
                let minus = grid::intersection_formula(&net.transpose(), d, tol)?;
                let st = grid::special_structure(&net, d, tol)?;
                pass &= plus.residual.max(minus.residual) <= VERIFY_BOUND
                    && st.formula_residual <= VERIFY_BOUND
                    && st.report.passes(VERIFY_BOUND);
                let extra = json!({
                    "intersection_formula_residual": plus.residual.max(minus.residual),
                    "special_contact_residual": st.formula_residual,
                    "special_quadric_residual": st.report.max(),
                    "special_quadric": QuadricJson::from_quadric(&st.quadric),
                });
                if let (Value::Object(m), Value::Object(e)) = (&mut body, extra) {
                    m.extend(e);
                }
            }
            report("grid", pass, body)
        }
        Check::Incidence => {
            let (net, file_d) = read_net(&a.net)?;
            let d = grid_order(a.d, file_d)?;
            match grid::incidence_check(&net, d, tol) {
                Ok(r) => report(
                    "incidence",
                    r.holds,
                    json!({"closure_residual": r.closure_residual, "final_conic_residual": r.final_conic_residual, "is_koenigs": r.koenigs.is_koenigs()}),
                ),
                Err(Error::HypothesisFailed(why)) => report("incidence", false, json!({"hypothesis_failed": why})),
                Err(e) => Err(e.into()),
            }
        }
        Check::Roundtrip => {
            let pair: CurvePair = read_json::<PairJson>(&required(&a.pair, "pair")?)?.to_pair()?;
            let rt = autoconjugate::roundtrip(&pair, tol)?;
            let r = &rt.recovered;
            let worst = rt
                .curves_deviation
                .max(rt.grid_deviation)
                .max(r.dd_tau_residual)
                .max(r.dmd_sigma_residual)
                .max(r.conjugacy_residual);
            report(
                "roundtrip",
                worst <= VERIFY_BOUND && r.autoconjugate && r.generic_pair != Some(false),
                json!({
                    "curves_deviation": rt.curves_deviation,
                    "grid_deviation": rt.grid_deviation,
                    "compared_points": rt.compared_points,
                    "dd_tau_residual": r.dd_tau_residual,
                    "dmd_sigma_residual": r.dmd_sigma_residual,
                    "conjugacy_residual": r.conjugacy_residual,
                    "generic_pair": r.generic_pair,
                    "autoconjugate": r.autoconjugate,
                }),
            )
        }
        Check::DiagCorollary => {
            let (net, file_d) = read_net(&a.net)?;
            let d = grid_order(a.d, file_d)?;
            let st = grid::special_structure(&net, d, tol)?;
            let q = SubQuadric::new(Subspace::full(net.ambient_dim()), st.quadric.matrix().clone())?;
            let diag = inscribed::diagonal_corollary_check(&net, &st.instance, &q, a.k.unwrap_or(d), tol)?;
            let doliwa = match inscribed::doliwa_conics(&net, &q, tol) {
                Ok(cs) => Some(cs.iter().map(|c| c.max()).fold(0.0, f64::max)),
                Err(Error::StencilOutOfRange) => None,
                Err(e) => return Err(e.into()),
            };
            let pass = diag.isotropy_residual.max(diag.contact_residual).max(doliwa.unwrap_or(0.0)) <= VERIFY_BOUND;
            report(
                "diag-corollary",
                pass,
                json!({
                    "orders": diag.orders,
                    "isotropy_residual": diag.isotropy_residual,
                    "contact_residual": diag.contact_residual,
                    "doliwa_residual": doliwa,
                }),
            )
        }
    }
}

fn verify_inscribed(ctx: &Ctx, a: &VerifyArgs) -> CliResult<Outcome> {
    let tol = &ctx.tol;
    let (net, d) = read_net(&a.net)?;
    let inst = resolve_instance(ctx, &net, a.instance.as_deref(), a.d.or(d))?;
    let (quadric, steps) = match &a.quadric {
        Some(path) => {
            let q = read_json::<QuadricJson>(path)?.to_quadric()?;
            (SubQuadric::new(Subspace::full(q.ambient_dim()), q.matrix().clone())?, None)
        }
        // A whole grid is not extensive; its special quadric comes from a
        // Σ_{d,d} window.
        None if a.instance.as_deref() == Some("special") && !qnet::is_extensive(&net, tol) => {
            let q = grid::special_structure(&net, grid_order(a.d, d)?, tol)?.quadric;
            (SubQuadric::new(Subspace::full(q.ambient_dim()), q.matrix().clone())?, None)
        }
        None => {
            let opts = BuildOptions {
                first_split: a.split.map(|s| match s {
                    SplitArg::Rows => Split::Rows,
                    SplitArg::Cols => Split::Cols,
                }),
                seed: ctx.seed,
            };
            let built = inscribed::build(&net, &inst, opts, tol)?;
            (built.quadric, Some(built.base_locus_steps))
        }
    };
    let r = inscribed::verify(&net, &inst, &quadric, tol)?;
    let sig = quadric.signature(tol);
    let ambient: Quadric = inscribed::Inscribed { quadric: quadric.clone(), base_locus_steps: 0 }.ambient()?;
    let out = report(
        "inscribed",
        r.passes(VERIFY_BOUND),
        json!({
            "conic_residual": r.conic_residual,
            "isotropy_residual": r.isotropy_residual,
            "tangency_residual": r.tangency_residual,
            "all_tangent": r.all_tangent,
            "signature_on_join": [sig.plus, sig.minus, sig.zero],
            "base_locus_steps": steps,
        }),
    )?;
    if ctx.out.is_some() {
        ctx.emit(to_text(&QuadricJson::from_quadric(&ambient))?)?;
    }
    Ok(out)
}

fn export(ctx: &Ctx, a: &ExportArgs) -> CliResult<Outcome> {
    let tol = &ctx.tol;
    let mut mesh = Mesh::default();
    let mut chart_dim = None;
    if let Some(path) = &a.net {
        let net = read_net(&Some(path.clone()))?.0;
        let chart = Chart::parse(&a.chart, net.ambient_dim(), a.clip)?;
        mesh.add_net(&net, &chart)?;
        if let Some(ipath) = &a.instance {
            let j = read_json::<InstanceJson>(ipath)?;
            j.check()?;
            let inst = conics::propagate(&net, &j.seed.to_seed(net.ambient_dim())?, tol)?;
            mesh.add_conics(&inst.conics, &chart, tol)?;
        }
        chart_dim = Some(net.ambient_dim());
    } else if a.instance.is_some() {
        return Err(CliError::invalid("--instance needs --net"));
    }
    if let Some(path) = &a.quadric {
        let q = read_json::<QuadricJson>(path)?.to_quadric()?;
        if chart_dim.is_some_and(|n| n != q.ambient_dim()) {
            return Err(CliError::invalid("net and quadric live in different spaces"));
        }
        let chart = Chart::parse(&a.chart, q.ambient_dim(), a.clip)?;
        mesh.add_quadric(&q, &chart, a.density, tol)?;
    }
    if a.net.is_none() && a.quadric.is_none() {
        return Err(CliError::invalid("nothing to export: pass --net or --quadric"));
    }
    let text = match a.format {
        Format::Obj => mesh.to_obj(),
        Format::Json => to_text(&json!({"schema": "koenigs-mesh/1", "chart": a.chart, "mesh": mesh}))?,
    };
    Ok(Outcome { code: Code::Pass, stdout: ctx.emit(text)?, stderr: String::new() })
}
