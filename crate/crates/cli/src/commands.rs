use num_complex::Complex64;
use serde_json::{json, Value};

use tadpole::analysis::{
    cycle_expansion, decay_scan, perturbation_experiment, scale_invariance_check, tadpole_band, InitialCondition,
};
use tadpole::propagator::{evolve, evolve_neumann_halfline};
use tadpole::reference::{evolve_reference, FdScheme};
use tadpole::resolvent::{
    coefficients_closed_form, coefficients_oracle, kernel_continuous, kernel_difference, kernel_full, kernel_point,
};
use tadpole::spectral::k_max_for;
use tadpole::{Edge, Frequency, GraphFunction, GraphPoint, GridSpec, HalfLineFunction};

use crate::output::{complex_json, num, Emitter, Table};
use crate::{CliError, Command, EdgeArg, PartArg, RunConfig};

pub fn execute(command: &Command, cfg: &RunConfig) -> Result<(), CliError> {
    let out = Emitter { output: cfg.output.clone(), summary: cfg.summary.clone() };
    match *command {
        Command::Coeffs { z_re, z_im } => coeffs(cfg, &out, Frequency::new(z_re, z_im)),
        Command::Kernel { x_edge, x, y_edge, y, z_re, z_im, part } => {
            kernel(cfg, &out, point(x_edge, x), point(y_edge, y), Frequency::new(z_re, z_im), part)
        }
        Command::Evolve => evolve_cmd(cfg, &out),
        Command::EvolveHalfline => evolve_halfline(cfg, &out),
        Command::Decay => decay(cfg, &out),
        Command::Perturbation => perturbation(cfg, &out),
        Command::OracleCompare => oracle_compare(cfg, &out),
        Command::ScaleCheck => scale_check(cfg, &out),
        Command::Cycles { x, y, mu, terms } => cycles(cfg, &out, x, y, mu, terms),
    }
}

fn point(edge: EdgeArg, s: f64) -> GraphPoint {
    match edge {
        EdgeArg::Queue => GraphPoint::queue(s),
        EdgeArg::Head => GraphPoint::head(s),
    }
}

fn edge_name(e: Edge) -> &'static str {
    match e {
        Edge::Queue => "queue",
        Edge::Head => "head",
    }
}

fn grid_json(g: &GridSpec) -> Value {
    json!({ "x_max": g.x_max, "n_queue": g.n_queue, "n_head": g.n_head })
}

fn queue_data(cfg: &RunConfig, grid: &GridSpec) -> Result<HalfLineFunction, CliError> {
    if matches!(cfg.initial, InitialCondition::Eigen { .. }) {
        return Err(CliError::Usage("half-line experiments need queue data (gaussian or bump)".into()));
    }
    let ic = cfg.initial;
    Ok(HalfLineFunction::from_fn(grid.x_max, grid.n_queue, |x| Complex64::new(ic.queue_profile(x), 0.0)))
}

fn coeffs(cfg: &RunConfig, out: &Emitter, z: Frequency) -> Result<(), CliError> {
    let c = coefficients_closed_form(z, cfg.length, cfg.mode)?;
    let oracle = coefficients_oracle(z, cfg.length, cfg.mode.kirchhoff_sign())?;
    let oracle_gap = c
        .as_array()
        .iter()
        .zip(oracle.as_array().iter())
        .map(|((_, a), (_, b))| (a - b).norm())
        .fold(0.0, f64::max);
    let coefficients: serde_json::Map<String, Value> =
        c.as_array().iter().map(|(name, v)| (name.to_string(), complex_json(*v))).collect();
    out.emit(
        None,
        &json!({
            "command": "coeffs",
            "z": complex_json(z.z()),
            "omega": complex_json(z.omega()),
            "phase_factor": complex_json(z.phase_factor(cfg.length)),
            "coefficients": coefficients,
            "system_residual": c.max_system_residual(z, cfg.length, cfg.mode.kirchhoff_sign()),
            "oracle_gap": oracle_gap,
            "symmetry_defect": c.symmetry_defect(),
            "config": cfg.to_json(),
        }),
    )
}

fn kernel(cfg: &RunConfig, out: &Emitter, x: GraphPoint, y: GraphPoint, z: Frequency, part: PartArg) -> Result<(), CliError> {
    let geo = cfg.geometry()?;
    x.validate(&geo)?;
    y.validate(&geo)?;
    let value = match part {
        PartArg::Full => kernel_full(x, y, z, cfg.length, cfg.mode)?,
        PartArg::Continuous => kernel_continuous(x, y, z, cfg.length, cfg.mode)?,
        PartArg::Point => kernel_point(x, y, z, cfg.length)?,
    };
    let name = match part {
        PartArg::Full => "full",
        PartArg::Continuous => "continuous",
        PartArg::Point => "point",
    };
    out.emit(
        None,
        &json!({
            "command": "kernel",
            "part": name,
            "x": { "edge": edge_name(x.edge), "s": x.s },
            "y": { "edge": edge_name(y.edge), "s": y.s },
            "z": complex_json(z.z()),
            "value": complex_json(value),
            "config": cfg.to_json(),
        }),
    )
}

fn state_table(u: &GraphFunction) -> Table {
    let mut t = Table::new("edge,s,re,im");
    for (i, v) in u.queue.iter().enumerate() {
        t.row(["queue".into(), num(u.grid.queue_x(i)), num(v.re), num(v.im)]);
    }
    for (i, v) in u.head.iter().enumerate() {
        t.row(["head".into(), num(u.grid.head_s(i, &u.geometry)), num(v.re), num(v.im)]);
    }
    t
}

fn evolve_cmd(cfg: &RunConfig, out: &Emitter) -> Result<(), CliError> {
    let t = cfg.t.unwrap_or(1.0);
    let geo = cfg.geometry()?;
    let grid = cfg.grid(t.abs())?;
    let band = tadpole_band(&cfg.band)?;
    let f = cfg.initial.sample(geo, grid)?;
    let k_max = k_max_for(&geo, band.b().sqrt());
    let u = evolve(&f, &band, t, &cfg.quad, cfg.mode, k_max)?;
    let norms = u.norms();
    let tr = u.transmission_residuals()?;
    out.emit(
        Some(&state_table(&u)),
        &json!({
            "command": "evolve",
            "t": t,
            "grid": grid_json(&grid),
            "k_max": k_max,
            "sup_norm": norms.linf,
            "l2_norm": norms.l2,
            "continuity_residual": tr.continuity,
            "kirchhoff_residual": tr.kirchhoff,
            "config": cfg.to_json(),
        }),
    )
}

fn evolve_halfline(cfg: &RunConfig, out: &Emitter) -> Result<(), CliError> {
    let t = cfg.t.unwrap_or(1.0);
    let grid = cfg.grid(t.abs())?;
    let u0 = queue_data(cfg, &grid)?;
    let u = evolve_neumann_halfline(&u0, &cfg.band, t, &cfg.quad)?;
    let mut table = Table::new("x,re,im");
    for (i, v) in u.values.iter().enumerate() {
        table.row([num(u.x(i)), num(v.re), num(v.im)]);
    }
    out.emit(
        Some(&table),
        &json!({
            "command": "evolve-halfline",
            "t": t,
            "x_max": grid.x_max,
            "n": grid.n_queue,
            "sup_norm": u.sup_norm(),
            "l2_norm": u.l2_norm(),
            "config": cfg.to_json(),
        }),
    )
}

fn max_time(cfg: &RunConfig) -> f64 {
    cfg.times.iter().fold(0.0, |m, t| m.max(t.abs()))
}

fn decay(cfg: &RunConfig, out: &Emitter) -> Result<(), CliError> {
    let geo = cfg.geometry()?;
    let grid = cfg.grid(max_time(cfg))?;
    let u0 = cfg.initial.sample(geo, grid)?;
    let scan = decay_scan(&u0, &cfg.band, &cfg.times, &cfg.quad, cfg.mode)?;
    let mut table = Table::new("t,sup_norm,scaled");
    for r in &scan.rows {
        table.row([num(r.t), num(r.sup_norm), num(r.scaled)]);
    }
    out.emit(
        Some(&table),
        &json!({
            "command": "decay",
            "grid": grid_json(&grid),
            "fitted_exponent": scan.fitted_exponent,
            "fitted_constant": scan.fitted_constant,
            "fit_intercept": scan.fit.intercept,
            "fit_residual": scan.fit.residual,
            "scaled_spread": scan.scaled_spread(),
            "config": cfg.to_json(),
        }),
    )
}

fn perturbation(cfg: &RunConfig, out: &Emitter) -> Result<(), CliError> {
    let grid = cfg.grid(max_time(cfg))?;
    let u0 = queue_data(cfg, &grid)?;
    let report = perturbation_experiment(&u0, &cfg.band, &cfg.lengths, &cfg.times, &cfg.quad)?;
    let mut table = Table::new("L,t,measured,bound,ratio");
    for r in &report.rows {
        table.row([num(r.length), num(r.t), num(r.measured), num(r.bound), num(r.ratio)]);
    }
    let slopes: Vec<Value> = report.slopes.iter().map(|(t, s)| json!({ "t": t, "slope": s })).collect();
    let gaps: Vec<f64> = report.rows.iter().map(|r| r.path_gap).collect();
    out.emit(
        Some(&table),
        &json!({
            "command": "perturbation",
            "x_max": grid.x_max,
            "n_queue": grid.n_queue,
            "l1_norm": u0.l1_norm(),
            "slopes": slopes,
            "path_gaps": gaps,
            "max_relative_gap": report.max_relative_gap,
            "floor_substitution_error": report.floor_substitution_error,
            "config": cfg.to_json(),
        }),
    )
}

fn oracle_compare(cfg: &RunConfig, out: &Emitter) -> Result<(), CliError> {
    let t = cfg.t.unwrap_or(2.0);
    if t.is_nan() || t < 0.0 {
        return Err(CliError::Usage(format!("the reference solver runs forward in time, got t = {t}")));
    }
    let geo = cfg.geometry()?;
    let grid = cfg.grid(t)?;
    let band = tadpole_band(&cfg.band)?;
    let k_max = k_max_for(&geo, band.b().sqrt());
    let f = cfg.initial.sample(geo, grid)?;
    let filtered = evolve(&f, &band, 0.0, &cfg.quad, cfg.mode, k_max)?;
    let spectral = evolve(&filtered, &band, t, &cfg.quad, cfg.mode, k_max)?;
    let reference = evolve_reference(&filtered, &FdScheme::new(geo, grid, t)?)?;
    let rel = spectral.relative_l2_distance(&reference.state)?;
    out.emit(
        None,
        &json!({
            "command": "oracle-compare",
            "t": t,
            "grid": grid_json(&grid),
            "relative_l2": rel,
            "steps": reference.steps,
            "dt": reference.dt,
            "far_end_peak": reference.far_end_peak,
            "norm_drift": reference.norm_drift,
            "warnings": reference.warnings,
            "config": cfg.to_json(),
        }),
    )
}

fn scale_check(cfg: &RunConfig, out: &Emitter) -> Result<(), CliError> {
    let t = cfg.t.unwrap_or(1.0);
    let geo = cfg.geometry()?;
    let grid = cfg.grid(t.abs())?;
    let u0 = cfg.initial.sample(geo, grid)?;
    let r = scale_invariance_check(&u0, &cfg.band, t, &cfg.quad, cfg.mode)?;
    out.emit(
        None,
        &json!({
            "command": "scale-check",
            "t": t,
            "grid": grid_json(&grid),
            "discrepancy": r.discrepancy,
            "sup_original": r.sup_original,
            "sup_rescaled": r.sup_rescaled,
            "l1_original": r.l1_original,
            "l1_rescaled": r.l1_rescaled,
            "config": cfg.to_json(),
        }),
    )
}

fn cycles(cfg: &RunConfig, out: &Emitter, x: f64, y: f64, mu: f64, terms: usize) -> Result<(), CliError> {
    if x < 0.0 || y < 0.0 {
        return Err(CliError::Usage("queue coordinates must be non-negative".into()));
    }
    let exp = cycle_expansion(x, y, mu, cfg.length, terms)?;
    let direct = kernel_difference(x, y, mu, cfg.length, cfg.mode)?;
    let mut table = Table::new("k,partial_re,partial_im,remainder");
    for (k, (s, r)) in exp.partial_sums.iter().zip(&exp.remainder_bounds).enumerate() {
        table.row([k.to_string(), num(s.re), num(s.im), num(*r)]);
    }
    let last = exp.partial_sums.last().copied().unwrap_or_default();
    out.emit(
        Some(&table),
        &json!({
            "command": "cycles",
            "x": x,
            "y": y,
            "mu": mu,
            "terms": terms,
            "limit": complex_json(exp.limit),
            "kernel_difference": complex_json(direct),
            "truncation_error": (last - direct).norm(),
            "config": cfg.to_json(),
        }),
    )
}
