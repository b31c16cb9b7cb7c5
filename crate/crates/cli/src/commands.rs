//! The four subcommands: spectral sweep, benchmark simulation, convergence
//! study, and scheme-vs-HHT comparison. Everything emits deterministic CSV.

use crate::config::FileConfig;
use crate::output::CsvSink;
use crate::{CompareArgs, ConvergenceArgs, Problem, SimulateArgs, SpectralArgs};
use faer::Col;
use padetime::pade::MAX_DENOMINATOR_ORDER;
use padetime::problems::{
    self, build_bimaterial_rod, build_rod, build_scalar_wave, build_three_dof, cfl_to_dt,
    MeshedModel, RodGrading,
};
use padetime::spectral::{log_grid, rho_infty_to_alpha, sweep, SweepTarget};
use padetime::stepper::{
    hht_integrate, integrate, HistoryRecord, StepperConfig, StepperError,
};
use padetime::system::LoadModel;
use padetime::MixedPadeScheme;
use std::f64::consts::PI;
use std::sync::Arc;

pub enum CliError {
    Usage(String),
    Divergence { step: usize },
}

impl From<crate::config::ConfigError> for CliError {
    fn from(e: crate::config::ConfigError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Usage(format!("io error: {e}"))
    }
}

impl From<StepperError> for CliError {
    fn from(e: StepperError) -> Self {
        match e {
            StepperError::Divergence { step } => CliError::Divergence { step },
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<problems::ProblemError> for CliError {
    fn from(e: problems::ProblemError) -> Self {
        CliError::Usage(e.to_string())
    }
}

fn usage<T>(msg: impl Into<String>) -> Result<T, CliError> {
    Err(CliError::Usage(msg.into()))
}

fn validate_order(order: usize) -> Result<(), CliError> {
    if !(1..=MAX_DENOMINATOR_ORDER).contains(&order) {
        return usage(format!("--M must be in 1..={MAX_DENOMINATOR_ORDER}, got {order}"));
    }
    Ok(())
}

fn validate_rho(rho: f64) -> Result<(), CliError> {
    if !(0.0..=1.0).contains(&rho) {
        return usage(format!("--rho-inf must be in [0, 1], got {rho}"));
    }
    Ok(())
}

fn validate_alpha(alpha: f64) -> Result<(), CliError> {
    if !(-1.0 / 3.0..=0.0).contains(&alpha) {
        return usage(format!("--hht-alpha must be in [-1/3, 0], got {alpha}"));
    }
    Ok(())
}

pub fn run_spectral(args: &SpectralArgs) -> Result<(), CliError> {
    let file = FileConfig::load(args.config.as_deref())?;
    let order = file
        .merge(args.order, "M")?
        .ok_or_else(|| CliError::Usage("--M is required for the spectral sweep".into()))?;
    let rho_inf = file.merge(args.rho_inf, "rho-inf")?.unwrap_or(1.0);
    let hht_alpha = file.merge(args.hht_alpha, "hht-alpha")?;
    let x_min = file.merge(args.x_min, "x-min")?.unwrap_or(1e-3);
    let x_max = file.merge(args.x_max, "x-max")?.unwrap_or(1e3);
    let points = file.merge(args.points, "points")?.unwrap_or(400);
    let out = file.merge(args.out.clone(), "out")?.unwrap_or_else(|| "-".into());

    validate_order(order)?;
    validate_rho(rho_inf)?;
    if let Some(alpha) = hht_alpha {
        validate_alpha(alpha)?;
    }
    if !(x_min > 0.0) || !(x_max > x_min) {
        return usage(format!("need 0 < x-min < x-max, got {x_min} .. {x_max}"));
    }
    if points < 2 {
        return usage(format!("--points must be at least 2, got {points}"));
    }

    let scheme = MixedPadeScheme::new(order, rho_inf, 0)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let grid = log_grid(x_min, x_max, points);
    let rows = sweep(SweepTarget::Scheme(&scheme), &grid);
    let hht_rows = hht_alpha.map(|alpha| sweep(SweepTarget::Hht { alpha }, &grid));

    let mut sink = CsvSink::open(&out)?;
    if hht_rows.is_some() {
        sink.header(&[
            "x",
            "rho",
            "phase",
            "period_error",
            "damping_ratio",
            "hht_rho",
            "hht_phase",
            "hht_period_error",
            "hht_damping_ratio",
        ])?;
    } else {
        sink.header(&["x", "rho", "phase", "period_error", "damping_ratio"])?;
    }
    for (i, row) in rows.iter().enumerate() {
        let mut cells = vec![row.x, row.rho, row.phase, row.period_error, row.damping_ratio];
        if let Some(hht) = &hht_rows {
            let h = &hht[i];
            cells.extend([h.rho, h.phase, h.period_error, h.damping_ratio]);
        }
        sink.row(&cells)?;
    }
    sink.finish()?;
    Ok(())
}

/// Everything needed to run one benchmark: the model plus the resolved
/// stepping parameters.
struct ResolvedProblem {
    model: MeshedModel,
    dt: f64,
    duration: f64,
    rho_inf: f64,
    probes: Vec<usize>,
    /// element size and wave speed used for CFL conversions (mesh problems)
    cfl_basis: Option<(f64, f64)>,
}

#[allow(clippy::too_many_arguments)]
fn resolve_problem(
    file: &FileConfig,
    problem: Option<Problem>,
    elements: Option<usize>,
    order_flag: Option<usize>,
    rho_flag: Option<f64>,
    dt_flag: Option<f64>,
    cfl_flag: Option<f64>,
    duration_flag: Option<f64>,
    probe_flags: &[usize],
    force_order: Option<usize>,
) -> Result<(ResolvedProblem, StepperConfig), CliError> {
    let problem = match problem {
        Some(p) => p,
        None => match file.merge::<String>(None, "problem")? {
            Some(name) => name.parse()?,
            None => return usage("--problem is required"),
        },
    };
    let elements = file.merge(elements, "elements")?;
    let dt_flag = file.merge(dt_flag, "dt")?;
    let cfl_flag = file.merge(cfl_flag, "cfl")?;
    let duration_flag = file.merge(duration_flag, "duration")?;
    let probes_flag = file.merge_probes(probe_flags, "probe")?;
    let force_order = file.merge(force_order, "pf")?;

    if dt_flag.is_some() && cfl_flag.is_some() {
        return usage("give exactly one of --dt and --cfl");
    }

    let is_mesh = !matches!(problem, Problem::ThreeDof);
    let order = file
        .merge(order_flag, "M")?
        .unwrap_or(if is_mesh { 2 } else { 3 });
    validate_order(order)?;
    let rho_inf = file
        .merge(rho_flag, "rho-inf")?
        .unwrap_or(if is_mesh { 0.8 } else { 0.0 });
    validate_rho(rho_inf)?;

    let (model, cfl_basis, default_duration) = match problem {
        Problem::ThreeDof => {
            if cfl_flag.is_some() {
                return usage("--cfl applies to meshed problems; use --dt for three-dof");
            }
            (build_three_dof(), None, Some(5000.0))
        }
        Problem::Rod => {
            let n = elements.unwrap_or(1000);
            let model = build_rod(n, RodGrading::Uniform)?;
            let c = problems::wave_speed(problems::ROD_YOUNG, problems::ROD_DENSITY);
            let dx = problems::ROD_LENGTH / n as f64;
            (model, Some((dx, c)), Some(0.02))
        }
        Problem::RodNonuniform => {
            let n = elements.unwrap_or(2000);
            let model = build_rod(n, RodGrading::Sinusoidal)?;
            let c = problems::wave_speed(problems::ROD_YOUNG, problems::ROD_DENSITY);
            // the largest elements bound the resolvable frequencies, so the
            // CFL number is taken against them
            let coords = problems::rod_node_coordinates(n, RodGrading::Sinusoidal, problems::ROD_LENGTH);
            let dx_max = coords.windows(2).map(|w| w[1] - w[0]).fold(0.0f64, f64::max);
            (model, Some((dx_max, c)), Some(0.02))
        }
        Problem::Bimaterial => {
            let n = elements.unwrap_or(1000);
            let model = build_bimaterial_rod(n)?;
            // time step from the slower segment
            let c = problems::bimat_wave_speed_right();
            let dx = problems::BIMAT_SEGMENT_LENGTH / n as f64;
            (model, Some((dx, c)), None)
        }
        Problem::ScalarWave => {
            let n = elements.unwrap_or(64);
            let model = build_scalar_wave(n)?;
            let dx = problems::WAVE_SIDE / n as f64;
            (model, Some((dx, problems::WAVE_SPEED)), Some(1.0))
        }
    };

    let dt = match (dt_flag, cfl_flag, cfl_basis) {
        (Some(_), Some(_), _) => unreachable!("rejected above"),
        (Some(dt), None, _) => {
            if !(dt > 0.0) {
                return usage(format!("--dt must be positive, got {dt}"));
            }
            dt
        }
        (None, Some(cfl), Some((dx, c))) => {
            if !(cfl > 0.0) {
                return usage(format!("--cfl must be positive, got {cfl}"));
            }
            cfl_to_dt(cfl, c, dx)
        }
        (None, Some(_), None) => unreachable!("cfl rejected for non-mesh problems above"),
        (None, None, Some((dx, c))) => {
            // paper guidance: CFL = 10 L for the order (L = M-1, M) scheme
            let cfl = 10.0 * (order.saturating_sub(1).max(1)) as f64;
            cfl_to_dt(cfl, c, dx)
        }
        (None, None, None) => 0.14,
    };

    let duration = match duration_flag.or(default_duration) {
        Some(d) if d > 0.0 => d,
        Some(d) => return usage(format!("--duration must be positive, got {d}")),
        None => return usage("--duration is required for this problem"),
    };

    let probes = match probes_flag {
        Some(p) => {
            for &dof in &p {
                if dof >= model.system.n_dof() {
                    return usage(format!(
                        "probe DOF {dof} out of range (n_dof = {})",
                        model.system.n_dof()
                    ));
                }
            }
            p
        }
        None => model.probes.clone(),
    };

    let n_steps = StepperConfig::steps_for_duration(duration, dt);
    let mut cfg = StepperConfig::new(order, rho_inf, dt, n_steps);
    cfg.force_order = force_order;

    Ok((ResolvedProblem { model, dt, duration, rho_inf, probes, cfl_basis }, cfg))
}

pub fn run_simulate(args: &SimulateArgs) -> Result<(), CliError> {
    let file = FileConfig::load(args.config.as_deref())?;
    let out = file.merge(args.out.clone(), "out")?.unwrap_or_else(|| "-".into());
    let (resolved, cfg) = resolve_problem(
        &file,
        args.problem,
        args.elements,
        args.order,
        args.rho_inf,
        args.dt,
        args.cfl,
        args.duration,
        &args.probe,
        args.force_order,
    )?;

    let model = &resolved.model;
    let history = integrate(&model.system, &cfg, &model.initial_u, &model.initial_v)?;

    let with_reference = args.reference && model.reference.is_some();
    let mut columns: Vec<String> = vec!["t".into()];
    for &dof in &resolved.probes {
        columns.push(format!("d{dof}_u"));
        columns.push(format!("d{dof}_v"));
        columns.push(format!("d{dof}_a"));
    }
    if with_reference {
        for &dof in &resolved.probes {
            columns.push(format!("d{dof}_ref_u"));
            columns.push(format!("d{dof}_ref_v"));
        }
    }

    let mut sink = CsvSink::open(&out)?;
    let names: Vec<&str> = columns.iter().map(String::as_str).collect();
    sink.header(&names)?;
    for rec in &history {
        let mut cells = vec![rec.t];
        for &dof in &resolved.probes {
            cells.extend([rec.u[dof], rec.v[dof], rec.a[dof]]);
        }
        if with_reference {
            let reference = model.reference.as_ref().unwrap();
            for &dof in &resolved.probes {
                let (u, v) = reference.eval_dof(dof, &model.coords, rec.t);
                cells.extend([u, v]);
            }
        }
        sink.row(&cells)?;
    }
    sink.finish()?;
    Ok(())
}

/// Exact response of the convergence-study oscillator: unit mass, period 1,
/// load sin(3t), at rest initially.
fn convergence_exact(t: f64) -> f64 {
    let w = 2.0 * PI;
    ((3.0 * t).sin() - 3.0 / w * (w * t).sin()) / (w * w - 9.0)
}

pub fn run_convergence(args: &ConvergenceArgs) -> Result<(), CliError> {
    let file = FileConfig::load(args.config.as_deref())?;
    let order = file
        .merge(args.order, "M")?
        .ok_or_else(|| CliError::Usage("--M is required for the convergence study".into()))?;
    let rho_inf = file.merge(args.rho_inf, "rho-inf")?.unwrap_or(1.0);
    let levels = file.merge(args.levels, "levels")?.unwrap_or(5);
    let force_order = file.merge(args.force_order, "pf")?;
    let out = file.merge(args.out.clone(), "out")?.unwrap_or_else(|| "-".into());
    validate_order(order)?;
    validate_rho(rho_inf)?;
    if !(2..=8).contains(&levels) {
        return usage(format!("--levels must be in 2..=8, got {levels}"));
    }

    let load = LoadModel::zero()
        .with_term(Col::from_fn(1, |_| 1.0), Arc::new(|t: f64| (3.0 * t).sin()));
    let sys = padetime::system::sdof_system(1.0, 0.0, 4.0 * PI * PI, load)
        .map_err(|e| CliError::Usage(e.to_string()))?;

    let mut rows: Vec<(f64, f64)> = Vec::new();
    for level in 0..levels {
        let dt = 1.0 / (20.0 * 2.0f64.powi(level as i32));
        let n_steps = StepperConfig::steps_for_duration(1.0, dt);
        let mut cfg = StepperConfig::new(order, rho_inf, dt, n_steps);
        cfg.force_order = force_order;
        let history = integrate(&sys, &cfg, &Col::zeros(1), &Col::zeros(1))?;
        let mut err = 0.0f64;
        let mut scale = 0.0f64;
        for rec in &history {
            err = err.max((rec.u[0] - convergence_exact(rec.t)).abs());
            scale = scale.max(convergence_exact(rec.t).abs());
        }
        rows.push((dt, err / scale));
    }

    let mut sink = CsvSink::open(&out)?;
    sink.header(&["dt", "error", "order_estimate"])?;
    for (i, &(dt, err)) in rows.iter().enumerate() {
        let estimate = if i == 0 {
            f64::NAN
        } else {
            (rows[i - 1].1 / err).log2()
        };
        sink.row(&[dt, err, estimate])?;
    }
    sink.finish()?;
    Ok(())
}

pub fn run_compare(args: &CompareArgs) -> Result<(), CliError> {
    let file = FileConfig::load(args.config.as_deref())?;
    let out = file.merge(args.out.clone(), "out")?.unwrap_or_else(|| "-".into());
    if file.merge(args.duration, "duration")?.is_none() {
        return usage("--duration is required for compare");
    }
    let (resolved, cfg) = resolve_problem(
        &file,
        args.problem,
        args.elements,
        args.order,
        args.rho_inf.or(Some(0.8)),
        args.dt,
        args.cfl,
        args.duration,
        &args.probe,
        args.force_order,
    )?;

    let alpha = match file.merge(args.hht_alpha, "hht-alpha")? {
        Some(a) => a,
        None => rho_infty_to_alpha(resolved.rho_inf),
    };
    if !(-1.0 / 3.0..=0.0).contains(&alpha) {
        return usage(format!(
            "HHT alpha {alpha:.4} (from rho_inf {}) outside [-1/3, 0]; pass --hht-alpha explicitly",
            resolved.rho_inf
        ));
    }

    // the reference method runs at CFL = 1 on meshed problems (same dt on
    // the unmeshed one), then its rows are matched to the coarser grid by
    // nearest step; the hht_t column records which instant was used
    let hht_cfl = file.merge(args.hht_cfl, "hht-cfl")?.unwrap_or(1.0);
    let hht_dt = match resolved.cfl_basis {
        Some((dx, c)) => cfl_to_dt(hht_cfl, c, dx),
        None => resolved.dt,
    };

    let model = &resolved.model;
    let pade_history = integrate(&model.system, &cfg, &model.initial_u, &model.initial_v)?;
    let hht_steps = StepperConfig::steps_for_duration(resolved.duration, hht_dt);
    let hht_history = hht_integrate(
        &model.system,
        alpha,
        hht_dt,
        hht_steps,
        &model.initial_u,
        &model.initial_v,
    )?;

    let mut columns: Vec<String> = vec!["t".into()];
    for &dof in &resolved.probes {
        columns.push(format!("pade_d{dof}_u"));
        columns.push(format!("pade_d{dof}_v"));
        columns.push(format!("pade_d{dof}_a"));
    }
    columns.push("hht_t".into());
    for &dof in &resolved.probes {
        columns.push(format!("hht_d{dof}_u"));
        columns.push(format!("hht_d{dof}_v"));
        columns.push(format!("hht_d{dof}_a"));
    }

    let mut sink = CsvSink::open(&out)?;
    let names: Vec<&str> = columns.iter().map(String::as_str).collect();
    sink.header(&names)?;
    for rec in &pade_history {
        let mut cells = vec![rec.t];
        for &dof in &resolved.probes {
            cells.extend([rec.u[dof], rec.v[dof], rec.a[dof]]);
        }
        let idx = ((rec.t / hht_dt).round() as usize).clamp(1, hht_history.len()) - 1;
        let hht_rec: &HistoryRecord = &hht_history[idx];
        cells.push(hht_rec.t);
        for &dof in &resolved.probes {
            cells.extend([hht_rec.u[dof], hht_rec.v[dof], hht_rec.a[dof]]);
        }
        sink.row(&cells)?;
    }
    sink.finish()?;
    Ok(())
}
