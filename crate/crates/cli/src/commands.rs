use std::path::{Path, PathBuf};

use ncjoin_core::algebra::is_trivial;
use ncjoin_core::gns_modular::default_modular_report;
use ncjoin_core::joining::{
    check_intertwining, fixed_space_p, gns_of_functional, intertwining_residual, invariance_residual,
    is_omega_line, product_joining, verify_joining_with_tol, INTERTWINING_TOL,
};
use ncjoin_core::mirror::{deviation_at, is_product, mirror_joining, nondisjointness_witness, witness_report, Witness};
use ncjoin_core::numerics::CMatrix;
use ncjoin_core::solver::{
    build_problem, feasible_interval, find_joining, verify_found, verify_thm37, AveragingSchedule, FailureReason,
    Pin, SearchOptions, SearchOutcome,
};
use ncjoin_core::system::{fixed_points, is_ergodic, DynamicalSystem, Group};
use serde_json::json;

use crate::files::{load_system, load_valid, read_json, write_json, JoiningFile, Loaded, LoadedSystem, SystemFile};
use crate::names::resolve;
use crate::{CliError, Context, Report};

fn group_summary(g: &Group) -> serde_json::Value {
    match g {
        Group::Finite(fg) => json!({"kind": "finite", "order": fg.order()}),
        Group::Integers => json!({"kind": "z"}),
    }
}

fn core_err(e: ncjoin_core::Error) -> CliError {
    match e {
        ncjoin_core::Error::GroupMismatch => CliError::Usage(e.to_string()),
        other => CliError::Parse(other.to_string()),
    }
}

pub fn validate(path: &Path, args: &[String], ctx: &Context) -> Result<Report, CliError> {
    let mut report = Report::new("validate", args);
    match load_system(path, ctx.tol)? {
        Loaded::Valid(loaded) => {
            let sys = &loaded.sys;
            report.add_checks(loaded.report.clone());
            report.add_checks(default_modular_report(sys).map_err(core_err)?);
            report.artifact("hilbert_dim", sys.algebra.hilbert_dim());
            report.artifact("algebra_dim", sys.algebra.dim());
            report.artifact("group", group_summary(sys.action.group()));
            report.line(format!(
                "valid system: d = {}, dim A = {}",
                sys.algebra.hilbert_dim(),
                sys.algebra.dim()
            ));
        }
        Loaded::Invalid(checks) => {
            if let Some(c) = checks.first_failure() {
                report.line(format!("invalid system: {} (residual {:.3e})", c.name, c.residual));
            }
            report.add_checks(checks);
        }
    }
    Ok(report)
}

pub fn ergodic(path: &Path, args: &[String], ctx: &Context) -> Result<Report, CliError> {
    let loaded = load_valid(path, ctx.tol)?;
    let mut report = Report::new("ergodic", args);
    report.add_checks(loaded.report.clone());
    let fixed = fixed_points(&loaded.sys).map_err(core_err)?;
    let ergodic = is_trivial(&fixed);
    report.artifact("ergodic", ergodic);
    report.artifact("fixed_point_dim", fixed.dim());
    report.line(format!("ergodic: {ergodic}, dim A_alpha = {}", fixed.dim()));
    Ok(report)
}

fn unit_name(i: usize, j: usize, d: usize) -> String {
    if d <= 9 {
        format!("E{}{}", i + 1, j + 1)
    } else {
        format!("E{},{}", i + 1, j + 1)
    }
}

pub fn mirror(path: &Path, emit: Option<&Path>, args: &[String], ctx: &Context) -> Result<Report, CliError> {
    let loaded = load_valid(path, ctx.tol)?;
    let sys = &loaded.sys;
    let mut report = Report::new("mirror", args);
    report.add_checks(loaded.report.clone());
    let witness = nondisjointness_witness(sys).map_err(core_err)?;
    let Witness::NonProduct { mirror: md, unit_probe, .. } = witness else {
        report.artifact("ergodic", true);
        report.artifact("witness", serde_json::Value::Null);
        report.line("ergodic: no witness constructed");
        return Ok(report);
    };
    report.artifact("ergodic", false);
    report.artifact("fixed_point_dim", md.factor.source.algebra.dim());

    // B is emitted through σ of the matrix units lying in F, then σ of the F basis.
    let fa = &md.factor.source.algebra;
    let d = fa.hilbert_dim();
    let units: Vec<(usize, usize)> = (0..d)
        .flat_map(|i| (0..d).map(move |j| (i, j)))
        .filter(|&(i, j)| fa.residual(&CMatrix::unit(d, i, j)) <= ncjoin_core::numerics::DEFAULT_TOL)
        .collect();
    let mut gens: Vec<CMatrix> = units.iter().map(|&(i, j)| md.sigma(&CMatrix::unit(d, i, j))).collect();
    gens.extend(md.sigma_images.iter().cloned());
    let group = md.b_sys.action.group();
    let db = md.b_sys.algebra.hilbert_dim();
    let trivial_units: Vec<(usize, CMatrix)> = match group {
        Group::Finite(g) => g.generators().iter().map(|&k| (k, CMatrix::identity(db))).collect(),
        Group::Integers => vec![(1, CMatrix::identity(db))],
    };
    let file_b = SystemFile::from_unitaries(
        &gens,
        md.b_sys.state.rho(),
        group,
        &trivial_units,
        Some("mirror identity system in the commutant".into()),
    );
    let b_loaded = match file_b.load(ctx.tol)? {
        Loaded::Valid(b) => b,
        Loaded::Invalid(checks) => {
            report.flag("mirror emitted system valid", false, 0.0, None);
            report.artifact("system_b", &file_b);
            report.add_checks(checks);
            return Ok(report);
        }
    };
    report.flag("mirror emitted system valid", true, 0.0, None);
    let mut md = *md;
    md.b_sys = b_loaded.sys.clone();
    let joining = mirror_joining(sys, &md).map_err(core_err)?;
    report.add_checks(witness_report(sys, &md, &joining));
    let nonproduct = !is_product(&joining, sys, &md.b_sys);
    report.flag("witness non-product", nonproduct, 0.0, None);

    let (dev, p, r) = joining.product_deviation(sys, &md.b_sys);
    report.artifact("max_basis_deviation", json!({"value": dev, "a": format!("b{p}"), "b": format!("b{r}")}));
    if let Some(probe) = unit_probe {
        let k = units.iter().position(|&u| u == (probe.i, probe.j)).expect("probe is a unit of F");
        let e = CMatrix::unit(d, probe.i, probe.j);
        let a_el = md.factor.embed(&e);
        let b_el = &gens[k];
        let value = joining.eval(sys, &md.b_sys, &a_el, b_el);
        let product = sys.state.eval(&a_el) * md.b_sys.state.eval(b_el);
        let deviation = deviation_at(&joining, sys, &md.b_sys, &a_el, b_el);
        let name = unit_name(probe.i, probe.j, d);
        report.artifact(
            "probe",
            json!({
                "a": name,
                "b": format!("g{k}"),
                "omega": [value.re, value.im],
                "product": [product.re, product.im],
                "deviation": deviation,
            }),
        );
        report.line(format!(
            "witness: identity system B (dim B = {}), non-product joining, deviation {deviation:.6} at ({name}, sigma({name})) = (a: {name}, b: g{k})",
            md.b_sys.algebra.dim()
        ));
    } else {
        report.line(format!(
            "witness: identity system B (dim B = {}), non-product joining, max basis deviation {dev:.6}",
            md.b_sys.algebra.dim()
        ));
    }
    let joining_file = JoiningFile::from_functional(&joining);
    report.artifact("system_b", &file_b);
    report.artifact("joining", &joining_file);
    if let Some(dir) = emit {
        let dir = ctx.path(dir);
        std::fs::create_dir_all(&dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        write_json(&dir.join("system_b.json"), &file_b)?;
        write_json(&dir.join("joining.json"), &joining_file)?;
    }
    Ok(report)
}

pub struct SearchArgs {
    pub pins: Vec<(String, String, String)>,
    pub probes: Vec<(String, String)>,
    pub grid: usize,
    pub opts: SearchOptions,
    pub emit: Option<PathBuf>,
}

fn reason_text(r: &FailureReason) -> String {
    match r {
        FailureReason::AffineInconsistent { residual } => {
            format!("linear conditions inconsistent (residual {residual:.3e})")
        }
        FailureReason::Stagnated => "no progress over the stagnation window (heuristic, not a certificate)".into(),
        FailureReason::IterationCap => "iteration cap reached (heuristic, not a certificate)".into(),
    }
}

pub fn join_search(
    a_path: &Path,
    b_path: &Path,
    search: &SearchArgs,
    args: &[String],
    ctx: &Context,
) -> Result<Report, CliError> {
    let a = load_valid(a_path, ctx.tol)?;
    let b = load_valid(b_path, ctx.tol)?;
    let mut report = Report::new("join-search", args);
    let problem = build_problem(&a.sys, &b.sys).map_err(core_err)?;
    let product = product_joining(&a.sys, &b.sys).map_err(core_err)?;
    let base = verify_joining_with_tol(&product, &a.sys, &b.sys, ctx.tol);
    let residual = problem.affine_residual(problem.product_vector());
    report.flag(
        "product joining feasible",
        base.passed() && residual <= 1e-10,
        residual,
        None,
    );
    report.artifact("product_joining", JoiningFile::from_functional(&product));

    if !search.pins.is_empty() {
        let mut pinned = problem.clone();
        let mut resolved = Vec::new();
        for (an, bn, t) in &search.pins {
            let value: f64 = t
                .parse()
                .map_err(|_| CliError::Usage(format!("--pin value {t:?} is not a number")))?;
            let x = resolve(an, &a)?;
            let y = resolve(bn, &b)?;
            pinned
                .pin(&Pin {
                    a_coords: a.sys.algebra.coords(&x),
                    b_coords: b.sys.algebra.coords(&y),
                    value,
                })
                .map_err(core_err)?;
            resolved.push((x, y, value));
        }
        match find_joining(&pinned, &search.opts).map_err(core_err)? {
            SearchOutcome::Found {
                joining,
                iterations,
                distance,
            } => {
                report.flag("search feasible", true, distance, None);
                report.add_checks(verify_found(&pinned, &joining, search.opts.tol.max(ctx.tol)));
                let pin_res = resolved
                    .iter()
                    .map(|(x, y, v)| (joining.eval(&a.sys, &b.sys, x, y).re - v).abs())
                    .fold(0.0, f64::max);
                report.flag("search pins satisfied", pin_res <= 1e-8, pin_res, None);
                report.artifact("search", json!({"found": true, "iterations": iterations, "distance": distance}));
                let file = JoiningFile::from_functional(&joining);
                report.artifact("joining", &file);
                report.line(format!("pinned joining found after {iterations} iterations"));
                if let Some(path) = &search.emit {
                    write_json(&ctx.path(path), &file)?;
                }
            }
            SearchOutcome::Failed(f) => {
                let why = reason_text(&f.reason);
                let residual = match f.reason {
                    FailureReason::AffineInconsistent { residual } => residual,
                    _ => f.best_distance,
                };
                report.flag("search feasible", false, residual, Some(why.clone()));
                report.artifact(
                    "search",
                    json!({
                        "found": false,
                        "reason": why,
                        "iterations": f.iterations,
                        "best_distance": if f.best_distance.is_finite() { json!(f.best_distance) } else { json!(null) },
                    }),
                );
                report.line(format!("pins infeasible: {why}"));
            }
        }
    }

    let mut probes = Vec::new();
    for (an, bn) in &search.probes {
        let x = resolve(an, &a)?;
        let y = resolve(bn, &b)?;
        let iv = feasible_interval(&a.sys, &b.sys, &x, &y, search.grid, &search.opts).map_err(core_err)?;
        report.line(format!(
            "max deviation at ({an}, {bn}): {:.4} (Re omega feasible in [{:.4}, {:.4}], product {:.4}, resolution {})",
            iv.max_deviation(),
            iv.lower,
            iv.upper,
            iv.product_value,
            iv.resolution
        ));
        probes.push(json!({
            "a": an,
            "b": bn,
            "product_value": iv.product_value,
            "lower": iv.lower,
            "upper": iv.upper,
            "max_deviation": iv.max_deviation(),
            "resolution": iv.resolution,
        }));
    }
    if !probes.is_empty() {
        report.artifact("max_deviation", probes);
    }
    if search.pins.is_empty() && search.probes.is_empty() {
        report.line("product joining is a feasible baseline");
    }
    Ok(report)
}

pub struct VerifyFlags {
    pub prop24: bool,
    pub prop36: bool,
    pub thm37: bool,
    pub horizon: usize,
}

fn load_joining(path: &Path, a: &DynamicalSystem, b: &DynamicalSystem) -> Result<ncjoin_core::joining::JoiningFunctional, CliError> {
    let file: JoiningFile = read_json(path)?;
    let w = file.to_functional()?;
    let want = (a.algebra.dim(), b.algebra.dim());
    if w.dims() != want {
        return Err(CliError::Parse(format!(
            "{}: joining table is {}x{}, systems need {}x{}",
            path.display(),
            w.dims().0,
            w.dims().1,
            want.0,
            want.1
        )));
    }
    Ok(w)
}

pub fn verify(
    a_path: &Path,
    b_path: &Path,
    joining_path: &Path,
    flags: &VerifyFlags,
    args: &[String],
    ctx: &Context,
) -> Result<Report, CliError> {
    let a: LoadedSystem = load_valid(a_path, ctx.tol)?;
    let b: LoadedSystem = load_valid(b_path, ctx.tol)?;
    let w = load_joining(joining_path, &a.sys, &b.sys)?;
    let mut report = Report::new("verify", args);
    report.add_checks(verify_joining_with_tol(&w, &a.sys, &b.sys, ctx.tol));

    let needs_gns = flags.prop24 || flags.prop36;
    let ce = if needs_gns {
        match gns_of_functional(&w, &a.sys, &b.sys) {
            Ok(ce) => Some(ce),
            Err(e) => {
                report.flag("gns of joining", false, 0.0, Some(e.to_string()));
                None
            }
        }
    } else {
        None
    };

    if flags.prop24 {
        if let Some(ce) = &ce {
            report.add_checks(ce.report(ctx.tol));
            let inter = intertwining_residual(ce);
            let inv = invariance_residual(&w, &a.sys, &b.sys).map_err(core_err)?;
            report.flag("prop24 intertwining", check_intertwining(ce), inter, None);
            let agree = (inv <= INTERTWINING_TOL) == check_intertwining(ce);
            report.flag(
                "prop24 invariance iff intertwining",
                agree,
                0.0,
                Some(format!("invariance residual {inv:.3e}, intertwining residual {inter:.3e}")),
            );
            report.artifact("intertwining_residual", inter);
            report.artifact("invariance_residual", inv);
        }
    }
    if flags.prop36 {
        let ergodic = is_ergodic(&a.sys).unwrap_or(false);
        report.flag("prop36 A ergodic", ergodic, 0.0, None);
        report.flag("prop36 B identity system", b.sys.is_identity_system(), 0.0, None);
        if let Some(ce) = &ce {
            let frame = fixed_space_p(ce).map_err(core_err)?;
            let line = is_omega_line(&frame, &ce.omega);
            report.flag(
                "prop36 fixed space is C omega",
                line,
                0.0,
                Some(format!("fixed space dimension {}", frame.len())),
            );
            report.artifact("fixed_space_dim", frame.len());
            report.line(format!("fixed space of P_omega has dimension {}", frame.len()));
        }
    }
    if flags.thm37 {
        let sched = AveragingSchedule::for_group(a.sys.action.group(), flags.horizon);
        let t = verify_thm37(&a.sys, &b.sys, &w, &sched, 1e-6).map_err(core_err)?;
        report.add_checks(t.report);
        report.artifact("product_deviation", t.deviation);
        report.artifact("average_norms", &t.average_norms);
        report.artifact("profile", &t.profile);
        report.line(format!("deviation from product {:.3e}", t.deviation));
    }
    Ok(report)
}
