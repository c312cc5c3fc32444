use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use acmhd::diagnostics::{energy_balance_residual, wave_residual_strided, DiagRecord, WaveField};
use acmhd::harness::{
    epsilon_sweep, local_decay_probe, DtPolicy, NamedFit, ProbeSpec, RunStatus, Sponge, SweepSpec,
};
use acmhd::io::{
    parse_config, read_checkpoint, write_checkpoint, write_csv, write_report, Report, RunConfig,
};
use acmhd::solver::{
    make_initial_data, AcSolver, AcState, DataKind, IncState, InitialData, ReferenceSolver, Trajectory,
};
use acmhd::{Error, Grid3, Result};
use serde_json::json;

use crate::Common;

fn load(common: &Common) -> Result<RunConfig> {
    let text = fs::read_to_string(&common.config)?;
    let mut cfg = parse_config(&text)?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &common.out {
        cfg.out_dir = out.clone();
    }
    Ok(cfg)
}

fn run_dir(cfg: &RunConfig) -> Result<PathBuf> {
    let dir = cfg.out_dir.join(&cfg.name);
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn grid(cfg: &RunConfig) -> Result<Grid3> {
    Grid3::new(cfg.n, cfg.box_length)
}

fn initial(cfg: &RunConfig, g: &Grid3) -> Result<AcState> {
    let kind = match cfg.data {
        DataKind::WellPrepared => InitialData::WellPrepared,
        DataKind::IllPrepared => InitialData::IllPrepared,
        DataKind::Custom => return Err(Error::Parameter("custom data needs the library API".into())),
    };
    make_initial_data(&kind, cfg.epsilon, cfg.mu, g, cfg.seed)
}

/// Fixed step from the config, or the CFL step for the initial speed;
/// either way shrunk so that an integer number of steps reaches `T`.
fn steps(cfg: &RunConfig, speed: f64, spacing: f64) -> (f64, usize) {
    let raw = match cfg.dt {
        Some(dt) => dt,
        None if speed > 0.0 => cfg.cfl * spacing / speed,
        None => cfg.horizon,
    };
    let n = (cfg.horizon / raw - 1e-9).ceil().max(1.0) as usize;
    (cfg.horizon / n as f64, n)
}

fn write_series(dir: &Path, records: &[DiagRecord]) -> Result<()> {
    write_csv(fs::File::create(dir.join("series.csv"))?, records)
}

pub fn run(common: &Common, linear: bool, checkpoints: bool) -> Result<ExitCode> {
    let cfg = load(common)?;
    let g = grid(&cfg)?;
    let init = initial(&cfg, &g)?;
    let speed = init.u().max_magnitude().max(init.b().max_magnitude());
    let (dt, n) = steps(&cfg, speed, g.spacing());
    let dir = run_dir(&cfg)?;
    let solver = AcSolver {
        nonlinear: !linear,
        cfl: cfg.cfl,
        ..AcSolver::default()
    };
    let mut traj: Trajectory<AcState> = Trajectory::new(dt, cfg.cadence, cfg.mu, solver.resistivity, solver.nonlinear);
    let mut series = Vec::new();
    let outcome = solver.integrate(&init, dt, n, |k, s| {
        let r = DiagRecord::of_ac(s)?;
        traj.records.push(r);
        if k % cfg.cadence == 0 || k == n {
            series.push(r);
            if checkpoints {
                write_checkpoint(s, &dir.join(format!("chk_{k:06}.bin")))?;
            }
        }
        Ok(())
    });
    write_series(&dir, &series)?;
    let (status, last) = match &outcome {
        Ok(s) => {
            write_checkpoint(s, &dir.join("final.bin"))?;
            ("completed".to_string(), s.time())
        }
        Err(e) => (format!("aborted: {e}"), traj.records.last().map_or(0.0, |r| r.time)),
    };
    let results = json!({
        "status": status,
        "dt": dt,
        "steps": n,
        "final_time": last,
        "nonlinear": !linear,
        "energy_balance_residual": energy_balance_residual(&traj).ok(),
        "max_div_u": traj.records.iter().map(|r| r.div_u).fold(0.0, f64::max),
        "max_div_b": traj.records.iter().map(|r| r.div_b).fold(0.0, f64::max),
    });
    write_report(&dir.join("report.json"), &Report::new("run", &cfg.to_string(), vec![], results))?;
    outcome?;
    println!("run {}: {n} steps of {dt:e}, output in {}", cfg.name, dir.display());
    Ok(ExitCode::SUCCESS)
}

pub fn sweep(common: &Common, mut epsilons: Vec<f64>, linear: bool) -> Result<ExitCode> {
    let cfg = load(common)?;
    let g = grid(&cfg)?;
    epsilons.sort_by(|a, b| b.total_cmp(a));
    if epsilons.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Parameter("epsilons must be distinct".into()));
    }
    let dt = match cfg.dt {
        Some(dt) => DtPolicy::Fixed(dt),
        None => DtPolicy::Cfl(cfg.cfl),
    };
    let mut spec = SweepSpec::new(epsilons, g.clone(), cfg.horizon, dt, cfg.data, cfg.seed);
    spec.mu = cfg.mu;
    spec.nonlinear = !linear;
    spec.sample_every = cfg.cadence;
    spec.validate()?;
    let init = initial(&RunConfig { epsilon: spec.epsilons[0], ..cfg.clone() }, &g)?;
    let (step, _) = spec.resolve_dt(&init)?;
    let spacing = step * spec.sample_every as f64;
    spec.modulus_shifts = (1..=7)
        .map(|k| cfg.horizon * 0.5f64.powi(k))
        .filter(|h| {
            let m = h / spacing;
            m >= 1.0 - 1e-9 && (m - m.round()).abs() < 1e-9
        })
        .collect();
    let report = epsilon_sweep(&spec)?;

    let dir = run_dir(&cfg)?;
    let mut aborted = false;
    let mut runs = Vec::new();
    for (i, r) in report.runs.iter().enumerate() {
        let sub = dir.join(format!("eps_{i}"));
        fs::create_dir_all(&sub)?;
        write_series(&sub, &r.records)?;
        let one = RunConfig {
            epsilon: r.epsilon,
            name: format!("{}_eps_{i}", cfg.name),
            ..cfg.clone()
        };
        let mut summary = serde_json::to_value(r)?;
        if let Some(obj) = summary.as_object_mut() {
            obj.remove("records");
        }
        let fits = r
            .modulus_fit
            .clone()
            .map(|f| NamedFit {
                name: "pb_time_modulus".into(),
                fit: Some(f),
                note: None,
            })
            .into_iter()
            .collect();
        write_report(&sub.join("report.json"), &Report::new("run", &one.to_string(), fits, summary.clone()))?;
        aborted |= r.status != RunStatus::Completed;
        runs.push(summary);
    }
    let cauchy = report.self_convergence().ok();
    let results = json!({
        "dt": report.dt,
        "steps": report.steps,
        "sample_spacing": report.sample_spacing,
        "runs": runs,
        "self_convergence": cauchy,
    });
    write_report(
        &dir.join("report.json"),
        &Report::new("sweep", &cfg.to_string(), report.fits.clone(), results),
    )?;
    println!("sweep {}: {} runs, output in {}", cfg.name, report.runs.len(), dir.display());
    for f in &report.fits {
        match (&f.fit, &f.note) {
            (Some(fit), _) => println!("  {}: exponent {:.4} (r² {:.4})", f.name, fit.exponent, fit.r_squared),
            (None, Some(note)) => println!("  {}: {note}", f.name),
            (None, None) => println!("  {}: no fit", f.name),
        }
    }
    if aborted {
        eprintln!("error: at least one epsilon aborted; see report.json");
        return Ok(ExitCode::from(2));
    }
    Ok(ExitCode::SUCCESS)
}

pub fn reference(common: &Common) -> Result<ExitCode> {
    let cfg = load(common)?;
    let g = grid(&cfg)?;
    let init = initial(&cfg, &g)?;
    let init = IncState::new(init.u().clone(), init.b().clone(), 0.0)?;
    let speed = init.u().max_magnitude().max(init.b().max_magnitude());
    let (dt, n) = steps(&cfg, speed, g.spacing());
    let solver = ReferenceSolver {
        viscosity: cfg.mu,
        cfl: cfg.cfl,
        ..ReferenceSolver::default()
    };
    let dir = run_dir(&cfg)?;
    let mut traj: Trajectory<IncState> = Trajectory::new(dt, cfg.cadence, solver.viscosity, solver.resistivity, true);
    let mut series = Vec::new();
    let outcome = solver.integrate(&init, dt, n, |k, s| {
        let r = DiagRecord::of_inc(s);
        traj.records.push(r);
        if k % cfg.cadence == 0 || k == n {
            series.push(r);
        }
        Ok(())
    });
    write_series(&dir, &series)?;
    let status = match &outcome {
        Ok(_) => "completed".to_string(),
        Err(e) => format!("aborted: {e}"),
    };
    let results = json!({
        "status": status,
        "dt": dt,
        "steps": n,
        "energy_balance_residual": energy_balance_residual(&traj).ok(),
    });
    write_report(&dir.join("report.json"), &Report::new("reference", &cfg.to_string(), vec![], results))?;
    outcome?;
    println!("reference {}: {n} steps of {dt:e}, output in {}", cfg.name, dir.display());
    Ok(ExitCode::SUCCESS)
}

pub fn diag(common: &Common, paths: &[PathBuf], linear: bool) -> Result<ExitCode> {
    let cfg = load(common)?;
    let g = grid(&cfg)?;
    if paths.len() < 3 {
        return Err(Error::Parameter("diag needs at least three checkpoints".into()));
    }
    let states = paths
        .iter()
        .map(|p| read_checkpoint(p, Some(&g))?.to_state())
        .collect::<Result<Vec<_>>>()?;
    let spacing = states[1].time() - states[0].time();
    if !(spacing > 0.0) {
        return Err(Error::Parameter("checkpoints must be in increasing time order".into()));
    }
    let first = &states[0];
    let mut traj: Trajectory<AcState> = Trajectory::new(spacing, 1, first.mu(), 1.0, !linear);
    for (s, p) in states.iter().zip(paths) {
        if s.epsilon() != first.epsilon() || s.mu() != first.mu() {
            return Err(Error::Parameter(format!("{} comes from a different run", p.display())));
        }
        traj.records.push(DiagRecord::of_ac(s)?);
        traj.push_snapshot(s.time(), s.clone())?;
    }
    traj.sample_spacing()?;

    let dir = run_dir(&cfg)?;
    let mut rows = Vec::new();
    let mut stride = 1;
    while (states.len() - 1) / stride >= 2 {
        let p = wave_residual_strided(&traj, WaveField::Pressure, stride)?;
        let phi = wave_residual_strided(&traj, WaveField::Potential, stride)?;
        rows.push((stride, spacing * stride as f64, p, phi));
        stride *= 2;
    }
    let mut table = String::from("stride,spacing,pressure,potential\n");
    for (s, h, p, phi) in &rows {
        table.push_str(&format!("{s},{h:.16e},{p:.16e},{phi:.16e}\n"));
    }
    fs::write(dir.join("wave_residual.csv"), &table)?;
    write_series(&dir, &traj.records)?;
    let results = json!({
        "checkpoints": paths,
        "epsilon": first.epsilon(),
        "spacing": spacing,
        "nonlinear": !linear,
        "wave_residual": rows
            .iter()
            .map(|(s, h, p, phi)| json!({"stride": s, "spacing": h, "pressure": p, "potential": phi}))
            .collect::<Vec<_>>(),
    });
    write_report(&dir.join("report.json"), &Report::new("diag", &cfg.to_string(), vec![], results))?;
    print!("{table}");
    Ok(ExitCode::SUCCESS)
}

pub fn probe(common: &Common) -> Result<ExitCode> {
    let cfg = load(common)?;
    let g = grid(&cfg)?;
    let run = |sponge: Option<Sponge>| {
        let mut spec = ProbeSpec::new(g.clone(), sponge);
        spec.epsilon = cfg.epsilon;
        if let Some(dt) = cfg.dt {
            spec.dt = dt;
        }
        spec.tau0 = cfg.horizon / 2f64.powi(spec.doublings as i32);
        local_decay_probe(&spec)
    };
    let on = run(Some(Sponge::default()))?;
    let off = run(None)?;
    let dir = run_dir(&cfg)?;
    let mut table = String::from("tau,sponge,control\n");
    for (a, b) in on.averages.iter().zip(&off.averages) {
        table.push_str(&format!("{:.16e},{:.16e},{:.16e}\n", a.0, a.1, b.1));
    }
    fs::write(dir.join("probe.csv"), &table)?;
    let results = json!({
        "sponge": on,
        "control": off,
        "sponge_final_doubling_ratio": on.final_doubling_ratio(),
        "control_final_doubling_ratio": off.final_doubling_ratio(),
    });
    write_report(&dir.join("report.json"), &Report::new("probe", &cfg.to_string(), vec![], results))?;
    print!("{table}");
    Ok(ExitCode::SUCCESS)
}
