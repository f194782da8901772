//! Run orchestration behind the command line: initial data construction,
//! the flow pipeline with checkpoint and CSV emission, verdict lines, and
//! the oracle, variational and report entry points.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::abelian::{sample_ha_data, u1_direct_solution, u1_zds_solution};
use crate::checkpoint::{Checkpoint, FieldKind};
use crate::config::{
    config_hash, emit_config, parse_config, InitKind, ObservableKind, RunConfig, RunMode,
};
use crate::dec::Calculus;
use crate::error::{Error, Result};
use crate::fields::{gauge_transform, Field};
use crate::flow::{
    epsilon_family, recover_solution, run_flow_with_sink, uniform_times, FlowState, RunRecord,
};
use crate::grid::{Bc, FormDegree};
use crate::lie::GroupKind;
use crate::observables as obs;
use crate::spectral::SpectralPlan;
use crate::synth::{smooth_connection, smooth_form, smooth_gauge, SmoothSpec};
use crate::variational::{integrate_variational, VariationalRecord};

/// Honor `YMFLOW_THREADS` before any parallel work happens.  Unset means
/// the default worker count; a set value must be a positive integer.
pub fn init_threads() -> Result<()> {
    match std::env::var("YMFLOW_THREADS") {
        Err(_) => Ok(()),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
                Ok(())
            }
            _ => Err(Error::invalid(format!(
                "YMFLOW_THREADS must be a positive integer, got `{v}`"
            ))),
        },
    }
}

/// Single mode of the abelian spectral basis placed in one component.
fn u1_mode_field(cfg: &RunConfig) -> Result<Field> {
    let grid = cfg.grid.build()?;
    let comp = cfg.initial.comp;
    let plan = SpectralPlan::for_component(grid, cfg.bc, FormDegree::One, comp)?;
    let counts = plan.mode_counts();
    for ax in 0..3 {
        if cfg.initial.wave[ax] >= counts[ax] {
            return Err(Error::invalid(format!(
                "initial_data.wave: index {} exceeds the {} modes of axis {ax}",
                cfg.initial.wave[ax], counts[ax]
            )));
        }
    }
    let [k0, k1, k2] = cfg.initial.wave;
    let flat = k0 + counts[0] * (k1 + counts[1] * k2);
    let mut coeffs = vec![0.0; plan.coeff_len()];
    coeffs[flat] = cfg.initial.amplitude;
    let nodal = plan.inverse(&coeffs);
    let mut out = Field::zero(grid, cfg.bc, FormDegree::One, GroupKind::U1)?;
    out.comp_slice_mut(0, comp).copy_from_slice(&nodal);
    out.apply_mask();
    Ok(out)
}

/// Initial connection for a run, across every `initial_data.kind`.
pub fn build_initial_field(cfg: &RunConfig) -> Result<Field> {
    let grid = cfg.grid.build()?;
    let init = &cfg.initial;
    match init.kind {
        InitKind::Zero => Field::zero(grid, cfg.bc, FormDegree::One, cfg.group),
        InitKind::Smooth => smooth_connection(
            grid,
            cfg.bc,
            cfg.group,
            SmoothSpec::new(init.seed, init.amplitude),
        ),
        InitKind::PureGauge => {
            let g = smooth_gauge(grid, cfg.group, SmoothSpec::new(init.seed, init.amplitude))?;
            let zero = Field::zero(grid, cfg.bc, FormDegree::One, cfg.group)?;
            gauge_transform(&zero, &g)
        }
        InitKind::U1Mode => u1_mode_field(cfg),
        InitKind::HaSample => sample_ha_data(grid, cfg.bc, init.a, init.amplitude, init.seed),
        InitKind::Checkpoint => {
            let path = init
                .checkpoint
                .as_ref()
                .ok_or_else(|| Error::invalid("initial_data.checkpoint is missing"))?;
            let ck = Checkpoint::read(path)?;
            let a = ck.connection()?;
            if a.grid != grid || a.bc != cfg.bc || a.group != cfg.group {
                return Err(Error::structural(
                    "checkpoint initial data does not match the configured grid, bc or group",
                ));
            }
            Ok(a)
        }
    }
}

/// Snapshot stops: a uniform eighth grid of `[0, t_end]`, the epsilon
/// shifts, and a doubling early-time ladder when the small-time monitor is
/// enabled.  Purely a function of the config, so a resumed run rebuilds
/// the same stop set and continues bit-for-bit.
pub fn snapshot_schedule(cfg: &RunConfig) -> Vec<f64> {
    let t_end = cfg.stepper.t_end;
    let mut stops = uniform_times(t_end, 8);
    stops.push(t_end);
    stops.extend_from_slice(&cfg.observables.epsilon);
    if cfg.observables.list.contains(&ObservableKind::SmallTime) {
        let mut t = t_end / 1024.0;
        while t < t_end {
            stops.push(t);
            t *= 2.0;
        }
    }
    stops.sort_by(|a, b| a.partial_cmp(b).unwrap());
    stops.dedup();
    stops
}

#[derive(Debug, Clone)]
pub struct Verdict {
    pub name: String,
    pub value: f64,
    pub tol: f64,
}

impl Verdict {
    pub fn new(name: impl Into<String>, value: f64, tol: f64) -> Verdict {
        Verdict {
            name: name.into(),
            value,
            tol,
        }
    }

    #[must_use]
    pub fn pass(&self) -> bool {
        self.value.is_finite() && self.value <= self.tol
    }

    #[must_use]
    pub fn line(&self) -> String {
        format!(
            "{} {} value {:.6e} tol {:.6e}",
            if self.pass() { "PASS" } else { "FAIL" },
            self.name,
            self.value,
            self.tol
        )
    }
}

#[derive(Debug)]
pub struct RunOutcome {
    pub config: RunConfig,
    pub record: RunRecord,
    pub verdicts: Vec<Verdict>,
    pub out_dir: PathBuf,
    pub final_checkpoint: PathBuf,
}

impl RunOutcome {
    #[must_use]
    pub fn all_pass(&self) -> bool {
        self.verdicts.iter().all(Verdict::pass)
    }
}

/// One `t,value` series with 17-significant-digit decimal floats, enough
/// to reparse every f64 exactly.
pub fn write_series(path: &Path, rows: &[(f64, f64)]) -> Result<()> {
    let mut text = String::from("t,value\n");
    for &(t, v) in rows {
        let _ = writeln!(text, "{t:.16e},{v:.16e}");
    }
    fs::write(path, text)?;
    Ok(())
}

/// Parse a series written by `write_series`.
pub fn read_series(path: &Path) -> Result<Vec<(f64, f64)>> {
    let text = fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if lineno == 0 {
            if line != "t,value" {
                return Err(Error::invalid(format!(
                    "{}: missing t,value header",
                    path.display()
                )));
            }
            continue;
        }
        let bad = || Error::invalid(format!("{}:{}: bad row", path.display(), lineno + 1));
        let (ts, vs) = line.split_once(',').ok_or_else(bad)?;
        out.push((
            ts.parse::<f64>().map_err(|_| bad())?,
            vs.parse::<f64>().map_err(|_| bad())?,
        ));
    }
    Ok(out)
}

fn loop_file_stem(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

fn emit_observables(
    cfg: &RunConfig,
    calc: &Calculus,
    record: &RunRecord,
    out_dir: &Path,
) -> Result<Vec<Verdict>> {
    let mut verdicts = Vec::new();
    let mut worst_nonfinite = 0.0f64;
    let mut note_series = |rows: &[(f64, f64)]| {
        for (t, v) in rows {
            if !(t.is_finite() && v.is_finite()) {
                worst_nonfinite += 1.0;
            }
        }
    };
    let recovered = recover_solution(record)?;
    for kind in &cfg.observables.list {
        match kind {
            ObservableKind::Energy => {
                let rows = record.energy_series();
                note_series(&rows);
                write_series(&out_dir.join("energy.csv"), &rows)?;
                if cfg.mode == RunMode::Direct && rows.len() >= 2 {
                    let e0 = rows[0].1;
                    let worst = rows
                        .windows(2)
                        .map(|w| w[1].1 - w[0].1)
                        .fold(f64::NEG_INFINITY, f64::max);
                    verdicts.push(Verdict::new("energy_monotone", worst, 1e-8 * (1.0 + e0)));
                }
            }
            ObservableKind::Dissipation => {
                let rows: Vec<(f64, f64)> = record.series.iter().map(|r| (r.0, r.2)).collect();
                note_series(&rows);
                write_series(&out_dir.join("dissipation.csv"), &rows)?;
            }
            ObservableKind::SupCurvature => {
                let raw: Vec<(f64, f64)> = record.series.iter().map(|r| (r.0, r.3)).collect();
                note_series(&raw);
                write_series(&out_dir.join("sup_curvature.csv"), &raw)?;
                let report = obs::sup_curvature_monitor(record)?;
                write_series(
                    &out_dir.join("sup_curvature_weighted.csv"),
                    report.series.samples(),
                )?;
            }
            ObservableKind::AAction => {
                let energy = obs::ObservableSeries::from_samples("energy", &record.energy_series())?;
                let running = obs::a_action_series(&energy, cfg.observables.a)?;
                note_series(running.samples());
                write_series(&out_dir.join("a_action.csv"), running.samples())?;
            }
            ObservableKind::Wilson => {
                let path = cfg
                    .observables
                    .loops
                    .as_ref()
                    .ok_or_else(|| Error::invalid("observables.loops is missing"))?;
                let loops = obs::parse_loops(&fs::read_to_string(path)?)?;
                let mut worst_excess = f64::NEG_INFINITY;
                let dim = cfg.group.matrix_dim() as f64;
                for gamma in &loops {
                    gamma.validate_in(&calc.grid)?;
                    let mut re_rows = Vec::new();
                    let mut im_rows = Vec::new();
                    for (t, a) in &recovered {
                        let (re, im) = obs::wilson_loop(a, gamma)?;
                        worst_excess = worst_excess.max(re.hypot(im) - dim);
                        re_rows.push((*t, re));
                        im_rows.push((*t, im));
                    }
                    note_series(&re_rows);
                    note_series(&im_rows);
                    let stem = loop_file_stem(&gamma.name);
                    write_series(&out_dir.join(format!("wilson_{stem}_re.csv")), &re_rows)?;
                    write_series(&out_dir.join(format!("wilson_{stem}_im.csv")), &im_rows)?;
                }
                if worst_excess.is_finite() {
                    verdicts.push(Verdict::new("wilson_bounded", worst_excess, 1e-9));
                }
            }
            ObservableKind::SmallTime => {
                let report = obs::small_time_monitor(&recovered, calc)?;
                for series in [
                    &report.t32_aprime,
                    &report.int_s32_bprime,
                    &report.t12_b,
                    &report.b_sq,
                ] {
                    note_series(series.samples());
                    write_series(
                        &out_dir.join(format!("{}.csv", series.name())),
                        series.samples(),
                    )?;
                }
            }
            ObservableKind::EpsilonFamily => {
                for (i, &eps) in cfg.observables.epsilon.iter().enumerate() {
                    let family = epsilon_family(record, eps)?;
                    let start = recovered.len() - family.len();
                    let mut rows = Vec::new();
                    for (j, (t, a_eps)) in family.iter().enumerate() {
                        let gap = a_eps.sub(&recovered[start + j].1)?.l2_norm();
                        rows.push((*t, gap));
                    }
                    note_series(&rows);
                    write_series(&out_dir.join(format!("epsilon_gap_{i}.csv")), &rows)?;
                }
            }
            ObservableKind::Boundary => {
                let mut marini = Vec::new();
                let mut dirichlet = Vec::new();
                for (t, a) in &recovered {
                    marini.push((*t, obs::marini_residual(a)?));
                    dirichlet.push((*t, obs::dirichlet_b_residual(a)?));
                }
                note_series(&marini);
                note_series(&dirichlet);
                write_series(&out_dir.join("boundary_marini.csv"), &marini)?;
                write_series(&out_dir.join("boundary_dirichlet.csv"), &dirichlet)?;
                if cfg.bc == Bc::Dirichlet {
                    let scale = record.series.iter().map(|r| r.3).fold(0.0f64, f64::max);
                    let worst = dirichlet.iter().map(|r| r.1).fold(0.0f64, f64::max);
                    verdicts.push(Verdict::new("dirichlet_trace", worst, 1e-9 * (1.0 + scale)));
                }
            }
            ObservableKind::Bianchi => {
                let mut rows = Vec::new();
                for (t, a) in &recovered {
                    rows.push((*t, obs::bianchi_residual(a, calc)?));
                }
                note_series(&rows);
                write_series(&out_dir.join("bianchi.csv"), &rows)?;
                if cfg.group == GroupKind::U1 {
                    let scale = record.series.iter().map(|r| r.1.sqrt()).fold(0.0f64, f64::max);
                    let worst = rows.iter().map(|r| r.1).fold(0.0f64, f64::max);
                    verdicts.push(Verdict::new("bianchi_abelian", worst, 1e-10 * (1.0 + scale)));
                }
            }
        }
    }
    if cfg.mode != RunMode::Direct {
        let residual = record
            .snapshots
            .last()
            .and_then(|s| s.gauge.as_ref())
            .map(|g| g.max_unitarity_residual())
            .unwrap_or(0.0);
        verdicts.push(Verdict::new("gauge_unitary", residual, 1e-9));
    }
    verdicts.push(Verdict::new("series_finite", worst_nonfinite, 0.5));
    Ok(verdicts)
}

fn finish_run(
    cfg: &RunConfig,
    canonical: &str,
    calc: &Calculus,
    state: &FlowState,
    record: RunRecord,
    out_dir: PathBuf,
) -> Result<RunOutcome> {
    let final_checkpoint = out_dir.join("checkpoint_final.ymfc");
    Checkpoint::of_state(canonical, state)?.write(&final_checkpoint)?;
    let verdicts = emit_observables(cfg, calc, &record, &out_dir)?;
    let mut text = String::new();
    for v in &verdicts {
        let _ = writeln!(text, "{}", v.line());
    }
    fs::write(out_dir.join("verdicts.txt"), text)?;
    Ok(RunOutcome {
        config: cfg.clone(),
        record,
        verdicts,
        out_dir,
        final_checkpoint,
    })
}

fn drive(
    state: &mut FlowState,
    calc: &Calculus,
    cfg: &RunConfig,
    stops: &[f64],
    canonical: &str,
    out_dir: &Path,
) -> Result<RunRecord> {
    let every = cfg.output.checkpoint_every;
    run_flow_with_sink(state, calc, &cfg.stepper, stops, |s| {
        if every > 0 && s.steps % every == 0 {
            let name = format!("checkpoint_step{:08}.ymfc", s.steps);
            Checkpoint::of_state(canonical, s)?.write(out_dir.join(name))?;
        }
        Ok(())
    })
}

/// The `run` pipeline: build data, flow, observables, verdicts.
pub fn run_from_config(cfg: &RunConfig) -> Result<RunOutcome> {
    let canonical = emit_config(cfg);
    let grid = cfg.grid.build()?;
    let calc = Calculus::new(grid, cfg.bc)?;
    let a0 = build_initial_field(cfg)?;
    let mut state = FlowState::new(cfg.mode.flow_mode(), a0)?;
    let out_dir = PathBuf::from(&cfg.output.dir);
    fs::create_dir_all(&out_dir)?;
    let stops = snapshot_schedule(cfg);
    let record = drive(&mut state, &calc, cfg, &stops, &canonical, &out_dir)?;
    finish_run(cfg, &canonical, &calc, &state, record, out_dir)
}

/// Continue a checkpointed run, by default to its configured end time.
/// The embedded canonical config must reparse to the stored hash unless
/// `force` waives the check.
pub fn resume_run(path: &Path, until: Option<f64>, force: bool) -> Result<RunOutcome> {
    let ck = Checkpoint::read(path)?;
    let mut cfg = parse_config(&ck.config_text)?;
    if config_hash(&cfg) != ck.config_hash && !force {
        return Err(Error::Checkpoint(
            "embedded config no longer reparses to its stored hash; pass --force to resume anyway"
                .into(),
        ));
    }
    let mut stops = snapshot_schedule(&cfg);
    if let Some(u) = until {
        if !(u.is_finite() && u >= ck.t) {
            return Err(Error::invalid(format!(
                "--until {u} is before the checkpoint time {}",
                ck.t
            )));
        }
        cfg.stepper.t_end = u;
        stops.retain(|t| *t <= u);
    }
    if ck.t > cfg.stepper.t_end {
        return Err(Error::invalid(format!(
            "checkpoint time {} is already past the end time {}",
            ck.t, cfg.stepper.t_end
        )));
    }
    let canonical = emit_config(&cfg);
    let grid = cfg.grid.build()?;
    let calc = Calculus::new(grid, cfg.bc)?;
    let mut state = ck.to_state()?;
    let out_dir = PathBuf::from(&cfg.output.dir);
    fs::create_dir_all(&out_dir)?;
    let record = drive(&mut state, &calc, &cfg, &stops, &canonical, &out_dir)?;
    finish_run(&cfg, &canonical, &calc, &state, record, out_dir)
}

/// Wilson traces of every loop in a file against a checkpointed
/// connection; returns `(name, re, im)` rows.
pub fn wilson_report(ckpt: &Path, loops_path: &Path) -> Result<Vec<(String, f64, f64)>> {
    let ck = Checkpoint::read(ckpt)?;
    let a = ck.connection()?;
    let loops = obs::parse_loops(&fs::read_to_string(loops_path)?)?;
    if loops.is_empty() {
        return Err(Error::invalid("loop file holds no loops"));
    }
    let mut out = Vec::new();
    for gamma in &loops {
        gamma.validate_in(&a.grid)?;
        let (re, im) = obs::wilson_loop(&a, gamma)?;
        out.push((gamma.name.clone(), re, im));
    }
    Ok(out)
}

/// Run the configured abelian flow and compare the end state against the
/// exact spectral solution.  Direct and smoothing trajectories are checked
/// against their own closed forms; a recovered solution is checked against
/// the direct flow it reproduces, which only holds to stepping accuracy.
pub fn compare_oracle(cfg: &RunConfig) -> Result<Verdict> {
    if cfg.group != GroupKind::U1 {
        return Err(Error::invalid("the exact oracle is abelian; group must be u1"));
    }
    let grid = cfg.grid.build()?;
    let calc = Calculus::new(grid, cfg.bc)?;
    let a0 = build_initial_field(cfg)?;
    let mut state = FlowState::new(cfg.mode.flow_mode(), a0.clone())?;
    crate::flow::run_flow(&mut state, &calc, &cfg.stepper, &[])?;
    let t = state.t;
    let (got, want, name, tol) = match cfg.mode {
        RunMode::Direct => (
            state.field.clone(),
            u1_direct_solution(&a0, t)?,
            "oracle_direct",
            1e-6,
        ),
        RunMode::Zds => (
            state.field.clone(),
            u1_zds_solution(&a0, t)?,
            "oracle_zds",
            1e-6,
        ),
        RunMode::ZdsRecovered => (
            state.connection()?,
            u1_direct_solution(&a0, t)?,
            "oracle_recovered",
            1e-3,
        ),
    };
    let gap = got.sub(&want)?.l2_norm() / (1.0 + want.l2_norm());
    Ok(Verdict::new(name, gap, tol))
}

#[derive(Debug)]
pub struct VariationalOutcome {
    pub record: VariationalRecord,
    pub out_dir: PathBuf,
    pub final_checkpoint: PathBuf,
}

fn parse_v0(spec: &str, template: &Field) -> Result<Field> {
    if spec == "zero" {
        return Field::zero(template.grid, template.bc, FormDegree::One, template.group);
    }
    if let Some(rest) = spec.strip_prefix("smooth:") {
        let (seed_s, amp_s) = rest
            .split_once(':')
            .ok_or_else(|| Error::invalid("--v0 smooth form is smooth:<seed>:<amplitude>"))?;
        let seed = seed_s
            .parse::<u64>()
            .map_err(|_| Error::invalid(format!("--v0: bad seed `{seed_s}`")))?;
        let amp = amp_s
            .parse::<f64>()
            .map_err(|_| Error::invalid(format!("--v0: bad amplitude `{amp_s}`")))?;
        return smooth_form(
            template.grid,
            template.bc,
            FormDegree::One,
            template.group,
            SmoothSpec::new(seed, amp),
        );
    }
    let ck = Checkpoint::read(spec)?;
    if ck.kind != FieldKind::Tangent {
        return Err(Error::invalid("--v0 checkpoint must hold a tangent field"));
    }
    let v = ck.field;
    if v.grid != template.grid || v.bc != template.bc || v.group != template.group {
        return Err(Error::structural(
            "--v0 tangent does not match the configured grid, bc or group",
        ));
    }
    Ok(v)
}

/// Integrate the linearized flow along the configured base trajectory.
/// The base is stored at every step, so interpolation adds nothing; the
/// linearization is of the direct flow, hence the mode restriction.
pub fn run_variational(cfg: &RunConfig, v0_spec: &str) -> Result<VariationalOutcome> {
    if cfg.mode != RunMode::Direct {
        return Err(Error::invalid("variational runs linearize the direct flow; mode must be direct"));
    }
    let canonical = emit_config(cfg);
    let grid = cfg.grid.build()?;
    let calc = Calculus::new(grid, cfg.bc)?;
    let a0 = build_initial_field(cfg)?;
    let v0 = parse_v0(v0_spec, &a0)?;
    let mut state = FlowState::new(cfg.mode.flow_mode(), a0.clone())?;
    let mut stamps = vec![(0.0, a0)];
    run_flow_with_sink(&mut state, &calc, &cfg.stepper, &[], |s| {
        stamps.push((s.t, s.field.clone()));
        Ok(())
    })?;
    let dt = cfg.stepper.dt_init.min(cfg.stepper.cfl * grid.h * grid.h);
    let record = integrate_variational(&v0, &stamps, dt, &calc)?;
    let out_dir = PathBuf::from(&cfg.output.dir);
    fs::create_dir_all(&out_dir)?;
    write_series(&out_dir.join("tangent_norm_sq.csv"), &record.norm_sq)?;
    let final_checkpoint = out_dir.join("tangent_final.ymfc");
    Checkpoint::of_tangent(&canonical, cfg.stepper.t_end, record.steps, &record.final_tangent)
        .write(&final_checkpoint)?;
    Ok(VariationalOutcome {
        record,
        out_dir,
        final_checkpoint,
    })
}

/// Aggregate a run directory: every series file is summarized and stored
/// verdict lines are replayed.  Returns the report text and whether every
/// verdict passed.
pub fn report_dir(dir: &Path) -> Result<(String, bool)> {
    let mut names: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .collect();
    names.sort();
    let mut text = String::new();
    let mut all_pass = true;
    let mut found = 0usize;
    for path in &names {
        let stem = path.file_name().and_then(|s| s.to_str()).unwrap_or("");
        if stem.ends_with(".csv") {
            let rows = read_series(path)?;
            found += 1;
            let last = rows.last().copied().unwrap_or((f64::NAN, f64::NAN));
            let _ = writeln!(
                text,
                "series {} rows {} last {:.6e} at t {:.6e}",
                stem.trim_end_matches(".csv"),
                rows.len(),
                last.1,
                last.0
            );
        } else if stem == "verdicts.txt" {
            found += 1;
            for line in fs::read_to_string(path)?.lines() {
                if line.starts_with("FAIL") {
                    all_pass = false;
                }
                let _ = writeln!(text, "{line}");
            }
        }
    }
    if found == 0 {
        return Err(Error::invalid(format!(
            "no series found in {}",
            dir.display()
        )));
    }
    Ok((text, all_pass))
}
