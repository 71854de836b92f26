use std::path::Path;

use anyhow::Result;
use rnls::experiments::{
    concentration_sweep, level_bounds, norm_equivalence_audit, scan_c_xi, verify_scaling_law, XiScan,
};
use rnls::field::write_field;
use rnls::functionals::condition_c_check;
use rnls::solver::{oracle_d, solve_ground_state, OracleD};
use rnls::{Grid, ProblemSpec};
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::output::{num, point, CsvOut};
use crate::{Command, Report, Verdict};

fn xi_scan(cfg: &RunConfig) -> XiScan {
    XiScan { span: cfg.cxi.span, points: cfg.cxi.points }
}

fn run_oracle(cfg: &RunConfig) -> Result<OracleD> {
    let p = &cfg.problem;
    Ok(oracle_d(p.alpha, p.p, p.dim(), &cfg.oracle.ladder, cfg.assembly.quadrature, cfg.oracle.order, &cfg.solver)?)
}

/// `D` from the config, or from the oracle ladder when absent.
fn reference_d(cfg: &RunConfig, report: &mut Report) -> Result<f64> {
    if let Some(d) = cfg.oracle.d {
        report.results.insert("d_source".into(), json!("config"));
        return Ok(d);
    }
    let od = run_oracle(cfg)?;
    report.count_iterations(od.rungs.iter().map(|r| r.iterations).sum());
    report.results.insert("d_source".into(), json!("oracle"));
    report.results.insert("d_error_estimate".into(), json!(od.error_estimate));
    Ok(od.d)
}

pub(crate) fn run(cmd: Command, cfg: &RunConfig, out: &Path, report: &mut Report) -> Result<()> {
    match cmd {
        Command::Solve => solve(cfg, out, report),
        Command::SweepEps => sweep(cfg, out, report),
        Command::VerifyScaling => scaling(cfg, out, report),
        Command::ScanCxi => cxi(cfg, out, report),
        Command::CheckNorm => norm(cfg, out, report),
        Command::OracleD => oracle(cfg, out, report),
    }
}

fn solve(cfg: &RunConfig, out: &Path, report: &mut Report) -> Result<()> {
    let spec = &cfg.problem;
    let form = spec.assemble(cfg.assembly, cfg.tail_correction)?;
    let cond = condition_c_check(&spec.coeffs, spec.alpha, spec.p, spec.dim(), cfg.cxi.span, cfg.cxi.points);
    let mut opts = cfg.solver.clone();
    // the condition (C) argmin, in the frame of the problem
    let start: Vec<f64> = match spec.frame {
        rnls::Frame::Original => cond.argmin.clone(),
        rnls::Frame::Rescaled => cond.argmin.iter().map(|x| x / spec.epsilon).collect(),
    };
    opts.centers.insert(0, start);
    let gs = solve_ground_state(&spec.nodal(), &form, &opts)?;
    report.count_iterations(gs.iterations);
    write_field(&gs.u, out.join("ground_state.rsfld"))?;
    let mut csv = CsvOut::create(out.join("solve.csv"), &["iter", "quotient", "level", "grad_norm", "step"])?;
    for r in &gs.history {
        csv.row(&[r.iter.to_string(), num(r.quotient), num(r.level), num(r.grad_norm), num(r.step)])?;
    }
    csv.finish()?;
    let min = gs.u.values().iter().cloned().fold(f64::INFINITY, f64::min);
    report.results.insert("level".into(), json!(gs.level));
    report.results.insert("gradient_norm".into(), json!(gs.gradient_norm));
    report.results.insert("nehari_residual".into(), json!(gs.nehari_residual));
    report.results.insert("iterations".into(), json!(gs.iterations));
    report.results.insert("restart_index".into(), json!(gs.restart_index));
    report.verdict("converged", gs.converged, format!("gradient norm {} after {} iterations", num(gs.gradient_norm), gs.iterations));
    report.verdict("level_positive", gs.level > 0.0, format!("level {}", num(gs.level)));
    report.verdict("nonnegative", min >= 0.0, format!("min node value {}", num(min)));
    Ok(())
}

fn sweep(cfg: &RunConfig, out: &Path, report: &mut Report) -> Result<()> {
    let spec = &cfg.problem;
    let w = &cfg.sweep;
    rnls::solver::check_epsilons(&w.epsilons)?;
    let rep = concentration_sweep(spec, &w.epsilons, &w.radii, w.localization_radius, xi_scan(cfg), cfg.assembly, &cfg.solver)?;
    report.count_iterations(rep.rows.iter().map(|r| r.iterations).sum());
    let d = reference_d(cfg, report)?;
    let min_c = rep.condition.min_ratio * d;
    let mut header = vec!["epsilon".to_string(), "level".into(), "mass_center".into(), "eps_times_center".into()];
    header.extend((1..=w.radii.len()).map(|k| format!("frac_r{k}")));
    header.push("localization_R".into());
    let mut csv = CsvOut::create(out.join("sweep.csv"), &header.iter().map(String::as_str).collect::<Vec<_>>())?;
    for r in &rep.rows {
        let mut row = vec![num(r.epsilon), num(r.level), point(&r.mass_center), point(&r.eps_times_center)];
        row.extend(r.fractions.iter().map(|f| num(*f)));
        row.push(num(r.localization));
        csv.row(&row)?;
    }
    csv.finish()?;

    let last = rep.rows.last().expect("validated nonempty");
    let h = spec.grid.spacing();
    report.results.insert("xi_star".into(), json!(rep.xi_star));
    report.results.insert("condition_margin".into(), json!(rep.condition.margin));
    report.results.insert("d".into(), json!(d));
    report.results.insert("min_c_xi".into(), json!(min_c));
    let failed: Vec<String> = rep.rows.iter().filter_map(|r| r.error.clone()).collect();
    report.verdict(
        "all_converged",
        failed.is_empty() && rep.rows.iter().all(|r| r.converged),
        if failed.is_empty() { "every ε solved".into() } else { failed.join("; ") },
    );
    let fr: Vec<String> = rep.rows.iter().map(|r| num(r.fractions[0])).collect();
    report.verdict("fraction_increasing", rep.increasing[0], format!("fraction in B(ξ*, {}) along the sweep: {}", w.radii[0], fr.join(", ")));
    report.verdict(
        "fraction_nondecreasing_all_radii",
        rep.nondecreasing.iter().all(|b| *b),
        format!("per radius {:?}", rep.nondecreasing),
    );
    report.verdict(
        "final_fraction",
        last.fractions[0] > w.min_final_fraction,
        format!("{} > {} at ε = {}", num(last.fractions[0]), w.min_final_fraction, last.epsilon),
    );
    let dist = last.eps_times_center.iter().zip(&rep.xi_star).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    report.verdict("center_within_h", dist <= h, format!("|ε y_ε - ξ*| = {} vs h = {}", num(dist), num(h)));
    if last.error.is_none() {
        let lb = level_bounds(spec, last, min_c, w.lower_tol, w.upper_tol, cfg.assembly, &cfg.solver)?;
        report.results.insert("comparison_level".into(), json!(lb.lower));
        report.verdict(
            "level_lower_bound",
            lb.lower_ok,
            format!("C(ρ0,a1,a2) = {}; C_ρε = {}; tolerance {}", num(lb.lower), num(lb.level), w.lower_tol),
        );
        report.verdict(
            "level_upper_bound",
            lb.upper_ok,
            format!("C_ρε = {}; min c_of_xi = {}; tolerance {}", num(lb.level), num(lb.upper), w.upper_tol),
        );
    }
    Ok(())
}

fn scaling_grid(cfg: &RunConfig) -> Result<Grid> {
    Ok(Grid::new(cfg.problem.dim(), cfg.scaling.half_width, cfg.scaling.points)?)
}

fn scaling(cfg: &RunConfig, out: &Path, report: &mut Report) -> Result<()> {
    let d = reference_d(cfg, report)?;
    let p = &cfg.problem;
    let rep = verify_scaling_law(p.alpha, p.p, scaling_grid(cfg)?, &cfg.scaling.pairs, cfg.assembly.quadrature, d, &cfg.solver)?;
    let mut csv = CsvOut::create(out.join("scaling.csv"), &["Q", "K", "computed_level", "predicted_level", "rel_error"])?;
    for r in &rep.rows {
        csv.row(&[num(r.q), num(r.k), num(r.computed_level), num(r.predicted_level), num(r.rel_error)])?;
    }
    csv.finish()?;
    report.results.insert("d".into(), json!(d));
    report.results.insert("max_rel_error".into(), json!(rep.max_rel_error));
    report.verdict(
        "scaling_law",
        rep.max_rel_error <= cfg.scaling.tolerance,
        format!("max relative error {} (tolerance {})", num(rep.max_rel_error), cfg.scaling.tolerance),
    );
    Ok(())
}

fn cxi(cfg: &RunConfig, out: &Path, report: &mut Report) -> Result<()> {
    let d = reference_d(cfg, report)?;
    let p = &cfg.problem;
    let t = scan_c_xi(&p.coeffs, p.alpha, p.p, p.dim(), xi_scan(cfg), d, &cfg.cxi.spots, scaling_grid(cfg)?, cfg.assembly.quadrature, &cfg.solver)?;
    let mut csv = CsvOut::create(out.join("cxi.csv"), &["xi", "C_analytic", "C_spotcheck", "rel_error"])?;
    for r in &t.rows {
        csv.row(&[
            point(&r.xi),
            num(r.c_analytic),
            r.c_spotcheck.map(num).unwrap_or_default(),
            r.rel_error.map(num).unwrap_or_default(),
        ])?;
    }
    csv.finish()?;
    report.results.insert("d".into(), json!(d));
    report.results.insert("argmin".into(), json!(t.argmin));
    report.results.insert("min".into(), json!(t.min));
    if let Some(e) = t.max_spot_error {
        report.verdict("spot_checks", e <= cfg.cxi.tolerance, format!("max deviation {} (tolerance {})", num(e), cfg.cxi.tolerance));
    }
    Ok(())
}

fn norm(cfg: &RunConfig, out: &Path, report: &mut Report) -> Result<()> {
    let grid = Grid::new(cfg.problem.dim(), cfg.audit.half_width, cfg.audit.points)?;
    let spec = ProblemSpec { grid, ..cfg.problem.clone() };
    let rep = norm_equivalence_audit(&spec, cfg.audit.samples, cfg.solver.seed, cfg.assembly)?;
    let mut csv = CsvOut::create(out.join("norm.csv"), &["sample", "lhs", "rhs", "ratio", "holds"])?;
    for r in &rep.rows {
        csv.row(&[r.sample.to_string(), num(r.lhs), num(r.rhs), num(r.ratio), r.holds.to_string()])?;
    }
    csv.finish()?;
    report.results.insert("constant".into(), json!(rep.constant));
    report.results.insert("worst_ratio".into(), json!(rep.worst_ratio));
    report.results.insert("violations".into(), json!(rep.violations));
    report.verdict(
        "norm_equivalence",
        rep.violations == 0,
        format!("{} violations in {} samples, worst ratio {}", rep.violations, rep.rows.len(), num(rep.worst_ratio)),
    );
    Ok(())
}

fn oracle(cfg: &RunConfig, out: &Path, report: &mut Report) -> Result<()> {
    let od = run_oracle(cfg)?;
    report.count_iterations(od.rungs.iter().map(|r| r.iterations).sum());
    let mut csv = CsvOut::create(out.join("oracle.csv"), &["half_width", "points", "spacing", "level", "iterations"])?;
    for r in &od.rungs {
        csv.row(&[num(r.half_width), r.points.to_string(), num(r.spacing), num(r.level), r.iterations.to_string()])?;
    }
    csv.finish()?;
    report.results.insert("d".into(), json!(od.d));
    report.results.insert("error_estimate".into(), json!(od.error_estimate));
    report.results.insert("order".into(), json!(od.order));
    report.results.insert("observed_order".into(), od.observed_order.map(Value::from).unwrap_or(Value::Null));
    let m = od.rungs.len();
    let step = (od.rungs[m - 1].level - od.rungs[m - 2].level).abs();
    report.verdict(
        "extrapolation_consistent",
        step > od.error_estimate,
        format!("|level(N_fine) - level(N_coarse)| = {} vs error estimate {}", num(step), num(od.error_estimate)),
    );
    Ok(())
}

impl Verdict {
    pub fn new(name: &str, pass: bool, detail: String) -> Self {
        Self { name: name.into(), pass, detail }
    }
}
