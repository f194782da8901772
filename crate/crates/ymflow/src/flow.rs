//! Time integration of the curvature flows.
//!
//! Two modes share one classical RK4 stepper:
//!
//! * `Direct`: `dA/dt = -d*_A B_A`, the gradient flow of `|B|^2`.  The
//!   semi-discrete energy identity `dE/dt = -2 |dA/dt|^2` is exact here
//!   because the spatial operators are exact adjoints, so any measured
//!   energy increase is a time-step artifact; the optional backtracking
//!   control halves the step until monotonicity returns.
//! * `Smoothing`: `dC/dt = -d*_C B_C - d_C d* C`, the divergence-damped
//!   flow, parabolic even for rough data.  A sitewise gauge map `g` with
//!   `(dg/dt) g^-1 = d* C` is advanced alongside (midpoint exponential
//!   update); `C` transformed by `g` recovers a solution of the direct
//!   flow up to discretization error.
//!
//! Step sizes follow `min(dt_init, cfl h^2)` and are clipped to land
//! exactly on requested output times, which keeps interrupted-and-resumed
//! runs bitwise identical to uninterrupted ones.

use crate::dec::Calculus;
use crate::error::{Error, Result};
use crate::fields::{
    codiff_plain, covariant_codiff, covariant_d, curvature, gauge_transform, Field, GaugeField,
};
use crate::grid::FormDegree;
use crate::lie::{expm, AlgebraElement};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlowMode {
    Direct,
    Smoothing,
}

impl FlowMode {
    #[must_use]
    pub fn name(self) -> &'static str {
        match self {
            FlowMode::Direct => "direct",
            FlowMode::Smoothing => "smoothing",
        }
    }

    pub fn from_name(s: &str) -> Result<FlowMode> {
        match s {
            "direct" => Ok(FlowMode::Direct),
            "smoothing" => Ok(FlowMode::Smoothing),
            other => Err(Error::invalid(format!("unknown flow mode '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepperConfig {
    pub dt_init: f64,
    /// Parabolic step bound: `dt <= cfl * h^2`.
    pub cfl: f64,
    pub t_end: f64,
    /// Direct mode only: halve the step (at most 20 times) whenever a step
    /// raises the energy beyond rounding.
    pub energy_backtrack: bool,
    /// Smoothing mode: renormalize the gauge map every this many steps.
    pub reproject_every: usize,
}

impl StepperConfig {
    pub fn validate(&self) -> Result<()> {
        let mut bad = Vec::new();
        if !(self.dt_init.is_finite() && self.dt_init > 0.0) {
            bad.push("dt_init must be positive");
        }
        if !(self.cfl > 0.0 && self.cfl <= 0.25) {
            bad.push("cfl must lie in (0, 0.25]");
        }
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            bad.push("t_end must be finite and nonnegative");
        }
        if self.reproject_every == 0 {
            bad.push("reproject_every must be at least 1");
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::invalid(bad.join("; ")))
        }
    }
}

impl Default for StepperConfig {
    fn default() -> StepperConfig {
        StepperConfig {
            dt_init: 1e-3,
            cfl: 0.1,
            t_end: 1.0,
            energy_backtrack: false,
            reproject_every: 16,
        }
    }
}

/// Evolving state: the primary field (connection, or the smoothed field in
/// smoothing mode) plus the accumulated gauge map in smoothing mode.
#[derive(Debug, Clone)]
pub struct FlowState {
    pub mode: FlowMode,
    pub t: f64,
    pub field: Field,
    pub gauge: Option<GaugeField>,
    pub steps: u64,
}

impl FlowState {
    pub fn new(mode: FlowMode, field: Field) -> Result<FlowState> {
        if field.degree != FormDegree::One {
            return Err(Error::structural("flow state needs a one-form"));
        }
        let gauge = match mode {
            FlowMode::Direct => None,
            FlowMode::Smoothing => Some(GaugeField::identity(field.grid, field.group)),
        };
        Ok(FlowState {
            mode,
            t: 0.0,
            field,
            gauge,
            steps: 0,
        })
    }

    /// The connection this state represents: the field itself in direct
    /// mode, the gauge-recovered transform in smoothing mode.
    pub fn connection(&self) -> Result<Field> {
        match (&self.mode, &self.gauge) {
            (FlowMode::Direct, _) => Ok(self.field.clone()),
            (FlowMode::Smoothing, Some(g)) => gauge_transform(&self.field, g),
            (FlowMode::Smoothing, None) => Err(Error::structural("smoothing state lost its gauge")),
        }
    }
}

/// `-d*_A B_A`.
pub fn ym_rhs(a: &Field, calc: &Calculus) -> Result<Field> {
    let b = curvature(a, calc)?;
    let mut r = covariant_codiff(a, &b, calc)?;
    r.scale_in_place(-1.0);
    Ok(r)
}

/// `-d*_C B_C - d_C d* C`.
pub fn smoothing_rhs(c: &Field, calc: &Calculus) -> Result<Field> {
    let b = curvature(c, calc)?;
    let mut r = covariant_codiff(c, &b, calc)?;
    let div = codiff_plain(c, calc)?;
    let grad = covariant_d(c, &div, calc)?;
    r.axpy(1.0, &grad)?;
    r.scale_in_place(-1.0);
    Ok(r)
}

fn rhs(mode: FlowMode, y: &Field, calc: &Calculus) -> Result<Field> {
    match mode {
        FlowMode::Direct => ym_rhs(y, calc),
        FlowMode::Smoothing => smoothing_rhs(y, calc),
    }
}

/// One RK4 stage combination starting from `y` with precomputed `k1`.
fn rk4(mode: FlowMode, y: &Field, k1: &Field, dt: f64, calc: &Calculus) -> Result<Field> {
    let mut stage = y.clone();
    stage.axpy(0.5 * dt, k1)?;
    let k2 = rhs(mode, &stage, calc)?;
    let mut stage = y.clone();
    stage.axpy(0.5 * dt, &k2)?;
    let k3 = rhs(mode, &stage, calc)?;
    let mut stage = y.clone();
    stage.axpy(dt, &k3)?;
    let k4 = rhs(mode, &stage, calc)?;
    let mut out = y.clone();
    out.axpy(dt / 6.0, k1)?;
    out.axpy(dt / 3.0, &k2)?;
    out.axpy(dt / 3.0, &k3)?;
    out.axpy(dt / 6.0, &k4)?;
    Ok(out)
}

/// Outcome bookkeeping for a single accepted step.
#[derive(Debug, Clone, Copy)]
pub struct StepReport {
    pub dt_used: f64,
    pub halvings: u32,
}

/// Advance one step of size at most `dt`, honoring energy backtracking in
/// direct mode and the gauge co-evolution in smoothing mode.  `k1` must be
/// the rhs at the current state (reused for the dense series).
pub fn advance(
    state: &mut FlowState,
    calc: &Calculus,
    cfg: &StepperConfig,
    dt: f64,
    k1: &Field,
) -> Result<StepReport> {
    let backtrack = cfg.energy_backtrack && state.mode == FlowMode::Direct;
    let e_old = if backtrack {
        curvature(&state.field, calc)?.l2_norm_sq()
    } else {
        0.0
    };
    let mut dt_try = dt;
    let mut halvings = 0u32;
    loop {
        let candidate = rk4(state.mode, &state.field, k1, dt_try, calc)?;
        if backtrack {
            let e_new = curvature(&candidate, calc)?.l2_norm_sq();
            if e_new > e_old + 1e-8 * (1.0 + e_old) {
                halvings += 1;
                if halvings > 20 {
                    return Err(Error::StepFailure {
                        t: state.t,
                        dt: dt_try,
                        reason: "energy still increasing after 20 halvings".into(),
                    });
                }
                dt_try *= 0.5;
                continue;
            }
        }
        if state.mode == FlowMode::Smoothing {
            let mut mid = state.field.clone();
            mid.axpy(1.0, &candidate)?;
            mid.scale_in_place(0.5);
            let phi = codiff_plain(&mid, calc)?;
            let gauge = state
                .gauge
                .as_mut()
                .ok_or_else(|| Error::structural("smoothing state lost its gauge"))?;
            for site in 0..phi.sites() {
                let mut x = AlgebraElement::zero(phi.group);
                for alg in 0..phi.alg_dim() {
                    x.coeffs[alg] = dt_try * phi.comp_slice(alg, 0)[site];
                }
                let rot = expm(&x);
                let g = rot.mul(&gauge.get(site))?;
                gauge.set(site, &g);
            }
            if (state.steps + 1) % cfg.reproject_every as u64 == 0 {
                gauge.project()?;
            }
        }
        state.field = candidate;
        state.steps += 1;
        return Ok(StepReport {
            dt_used: dt_try,
            halvings,
        });
    }
}

/// Dense per-step scalar traces plus field snapshots at requested times.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub snapshot_times: Vec<f64>,
    pub snapshots: Vec<FlowState>,
    /// `(t, energy, dissipation, sup_curvature)` at the start of every
    /// step and at the final time.
    pub series: Vec<(f64, f64, f64, f64)>,
    pub total_steps: u64,
    pub total_halvings: u64,
}

impl RunRecord {
    #[must_use]
    pub fn energy_series(&self) -> Vec<(f64, f64)> {
        self.series.iter().map(|r| (r.0, r.1)).collect()
    }

    #[must_use]
    pub fn dissipation_series(&self) -> Vec<(f64, f64)> {
        self.series.iter().map(|r| (r.0, r.2)).collect()
    }

    #[must_use]
    pub fn sup_curvature_series(&self) -> Vec<(f64, f64)> {
        self.series.iter().map(|r| (r.0, r.3)).collect()
    }
}

/// Strictly increasing output times inside `(0, t_end)`, plus both ends.
pub fn normalize_times(t_end: f64, requested: &[f64]) -> Result<Vec<f64>> {
    if !(t_end.is_finite() && t_end >= 0.0) {
        return Err(Error::invalid("t_end must be finite and nonnegative"));
    }
    let mut out = vec![0.0];
    for &t in requested {
        if !t.is_finite() || t < 0.0 || t > t_end {
            return Err(Error::invalid(format!("output time {t} outside [0, {t_end}]")));
        }
        out.push(t);
    }
    out.push(t_end);
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    out.dedup();
    Ok(out)
}

/// Doubling ladder `eps, 2 eps, 4 eps, ...` capped at `t_end`.
pub fn geometric_times(eps: f64, t_end: f64) -> Result<Vec<f64>> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::invalid("geometric schedule needs eps > 0"));
    }
    let mut out = Vec::new();
    let mut t = eps;
    while t < t_end {
        out.push(t);
        t *= 2.0;
    }
    Ok(out)
}

/// Equispaced interior times `t_end k / count`.
#[must_use]
pub fn uniform_times(t_end: f64, count: usize) -> Vec<f64> {
    (1..count).map(|k| t_end * k as f64 / count as f64).collect()
}

/// Integrate from the state's current time to `cfg.t_end`, snapshotting at
/// `requested` times (normalized, deduplicated, endpoints included).
pub fn run_flow(
    state: &mut FlowState,
    calc: &Calculus,
    cfg: &StepperConfig,
    requested: &[f64],
) -> Result<RunRecord> {
    run_flow_with_sink(state, calc, cfg, requested, |_| Ok(()))
}

/// `run_flow` with a hook that fires after every accepted step, e.g. for
/// step-cadenced checkpoint writing.
pub fn run_flow_with_sink(
    state: &mut FlowState,
    calc: &Calculus,
    cfg: &StepperConfig,
    requested: &[f64],
    mut sink: impl FnMut(&FlowState) -> Result<()>,
) -> Result<RunRecord> {
    cfg.validate()?;
    state.field.grid.check_same(&calc.grid)?;
    let times = normalize_times(cfg.t_end, requested)?;
    let base_dt = cfg.dt_init.min(cfg.cfl * calc.grid.h * calc.grid.h);
    let tiny = 1e-12 * (1.0 + cfg.t_end.abs());
    let mut record = RunRecord {
        snapshot_times: Vec::new(),
        snapshots: Vec::new(),
        series: Vec::new(),
        total_steps: 0,
        total_halvings: 0,
    };
    let mut snap_iter = times.iter().copied().peekable();
    // Snapshots at or before the current time (resume case) are dropped.
    while let Some(&t) = snap_iter.peek() {
        if t <= state.t + tiny {
            snap_iter.next();
            if (t - state.t).abs() <= tiny {
                record.snapshot_times.push(state.t);
                record.snapshots.push(state.clone());
            }
        } else {
            break;
        }
    }
    loop {
        let k1 = rhs(state.mode, &state.field, calc)?;
        let b = curvature(&state.field, calc)?;
        record
            .series
            .push((state.t, b.l2_norm_sq(), k1.l2_norm_sq(), b.linf_norm()));
        if state.t + tiny >= cfg.t_end {
            break;
        }
        let next_stop = snap_iter.peek().copied().unwrap_or(cfg.t_end);
        let dt = base_dt.min(next_stop - state.t);
        let report = advance(state, calc, cfg, dt, &k1)?;
        record.total_steps += 1;
        record.total_halvings += u64::from(report.halvings);
        if report.halvings == 0 && state.t + dt + tiny >= next_stop {
            state.t = next_stop;
        } else {
            state.t += report.dt_used;
        }
        while let Some(&t) = snap_iter.peek() {
            if t <= state.t + tiny {
                snap_iter.next();
                record.snapshot_times.push(state.t);
                record.snapshots.push(state.clone());
            } else {
                break;
            }
        }
        sink(state)?;
    }
    Ok(record)
}

/// Gauge-recovered connection at every stored snapshot of a record.
pub fn recover_solution(record: &RunRecord) -> Result<Vec<(f64, Field)>> {
    record
        .snapshot_times
        .iter()
        .zip(&record.snapshots)
        .map(|(t, s)| Ok((*t, s.connection()?)))
        .collect()
}

/// Solution seeded from the smoothed representative at `eps`: the gauge
/// flow restarts from the identity there, and because the gauge update is
/// a left multiplication the restarted map is exactly `g(t) g(eps)^{-1}`.
/// The whole family therefore reads off one stored smoothing trajectory:
///
/// ```text
///     A_eps(t) = C(t)^(g(t) g(eps)^-1),   t >= eps,   A_eps(eps) = C(eps).
/// ```
///
/// `eps` must be one of the stored snapshot times.
pub fn epsilon_family(record: &RunRecord, eps: f64) -> Result<Vec<(f64, Field)>> {
    if !(eps.is_finite() && eps >= 0.0) {
        return Err(Error::invalid("epsilon must be nonnegative"));
    }
    let tol = 1e-12 * (1.0 + eps);
    let start = record
        .snapshot_times
        .iter()
        .position(|t| (t - eps).abs() <= tol)
        .ok_or_else(|| {
            Error::invalid(format!("epsilon {eps} is not a stored snapshot time"))
        })?;
    let needs_gauge =
        || Error::structural("epsilon family needs a smoothing-mode trajectory");
    let g_eps_inv = record.snapshots[start]
        .gauge
        .as_ref()
        .ok_or_else(needs_gauge)?
        .inverse();
    let mut out = Vec::with_capacity(record.snapshots.len() - start);
    for (t, s) in record
        .snapshot_times
        .iter()
        .zip(&record.snapshots)
        .skip(start)
    {
        let g = s.gauge.as_ref().ok_or_else(needs_gauge)?;
        let mut shift = g.compose(&g_eps_inv)?;
        shift.project()?;
        out.push((*t, gauge_transform(&s.field, &shift)?));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abelian::{sample_ha_data, u1_direct_solution, u1_zds_solution};
    use crate::grid::{Bc, Domain, Grid};
    use crate::lie::GroupKind;
    use crate::synth::{smooth_connection, SmoothSpec};

    fn small_cfg(t_end: f64) -> StepperConfig {
        StepperConfig {
            dt_init: 1e-3,
            cfl: 0.1,
            t_end,
            energy_backtrack: false,
            reproject_every: 16,
        }
    }

    #[test]
    fn direct_u1_matches_oracle() {
        let grid = Grid::new([6, 6, 6], 0.25, Domain::Torus).unwrap();
        let calc = Calculus::new(grid, Bc::Periodic).unwrap();
        let a0 = smooth_connection(grid, Bc::Periodic, GroupKind::U1, SmoothSpec::new(2, 1.0))
            .unwrap();
        let mut state = FlowState::new(FlowMode::Direct, a0.clone()).unwrap();
        let cfg = small_cfg(0.25);
        run_flow(&mut state, &calc, &cfg, &[]).unwrap();
        let want = u1_direct_solution(&a0, 0.25).unwrap();
        let err = state.field.sub(&want).unwrap().max_abs();
        assert!(err <= 1e-9, "direct flow vs oracle: {err}");
    }

    #[test]
    fn smoothing_u1_matches_oracle() {
        let grid = Grid::new([6, 6, 6], 0.2, Domain::Box3).unwrap();
        for bc in [Bc::Neumann, Bc::Dirichlet] {
            let calc = Calculus::new(grid, bc).unwrap();
            let a0 = smooth_connection(grid, bc, GroupKind::U1, SmoothSpec::new(3, 1.0)).unwrap();
            let mut state = FlowState::new(FlowMode::Smoothing, a0.clone()).unwrap();
            let cfg = small_cfg(0.2);
            run_flow(&mut state, &calc, &cfg, &[]).unwrap();
            let want = u1_zds_solution(&a0, 0.2).unwrap();
            let err = state.field.sub(&want).unwrap().max_abs();
            assert!(err <= 1e-9, "{bc:?} smoothing vs oracle: {err}");
        }
    }

    #[test]
    fn direct_su2_energy_monotone_and_masked() {
        let grid = Grid::new([6, 6, 6], 0.2, Domain::Box3).unwrap();
        let calc = Calculus::new(grid, Bc::Neumann).unwrap();
        let a0 = smooth_connection(grid, Bc::Neumann, GroupKind::Su2, SmoothSpec::new(4, 1.2))
            .unwrap();
        let mut state = FlowState::new(FlowMode::Direct, a0).unwrap();
        let mut cfg = small_cfg(0.1);
        cfg.energy_backtrack = true;
        let record = run_flow(&mut state, &calc, &cfg, &[]).unwrap();
        let energies: Vec<f64> = record.series.iter().map(|r| r.1).collect();
        for pair in energies.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-8 * (1.0 + pair[0]), "energy rose: {pair:?}");
        }
        assert_eq!(state.field.mask_violation(), 0.0);
        assert!(record.total_halvings == 0, "smooth data should not backtrack");
    }

    #[test]
    fn smoothing_su2_recovers_direct_solution() {
        // The recovered connection shadows the direct flow of the same
        // continuum datum to second order in h (the gauge covariance of
        // the stencil operators and the one-sided boundary stencils both
        // contribute O(h^2)); check the refinement ratio, not an absolute.
        let t_end = 0.1;
        let mismatch = |n: usize| -> f64 {
            let grid = Grid::new([n, n, n], 1.0 / (n as f64 - 1.0), Domain::Box3).unwrap();
            let calc = Calculus::new(grid, Bc::Neumann).unwrap();
            let a0 =
                smooth_connection(grid, Bc::Neumann, GroupKind::Su2, SmoothSpec::new(5, 0.8))
                    .unwrap();
            let mut direct = FlowState::new(FlowMode::Direct, a0.clone()).unwrap();
            run_flow(&mut direct, &calc, &small_cfg(t_end), &[]).unwrap();
            let mut smooth = FlowState::new(FlowMode::Smoothing, a0).unwrap();
            run_flow(&mut smooth, &calc, &small_cfg(t_end), &[]).unwrap();
            assert!(smooth.gauge.as_ref().unwrap().max_unitarity_residual() <= 1e-9);
            let recovered = smooth.connection().unwrap();
            recovered.sub(&direct.field).unwrap().l2_norm() / direct.field.l2_norm().max(1.0)
        };
        let coarse = mismatch(6);
        let fine = mismatch(11);
        assert!(coarse <= 0.5, "coarse recovery mismatch {coarse}");
        let ratio = coarse / fine.max(1e-14);
        assert!(ratio >= 2.5, "recovery not refining: {coarse} -> {fine} (ratio {ratio})");
    }

    #[test]
    fn step_clipping_hits_snapshots_exactly() {
        let grid = Grid::new([5, 5, 5], 0.25, Domain::Torus).unwrap();
        let calc = Calculus::new(grid, Bc::Periodic).unwrap();
        let a0 = sample_ha_data(grid, Bc::Periodic, 1.0, 0.5, 8).unwrap();
        let mut state = FlowState::new(FlowMode::Smoothing, a0).unwrap();
        let cfg = small_cfg(0.02);
        let record = run_flow(&mut state, &calc, &cfg, &[0.007, 0.0131]).unwrap();
        assert_eq!(record.snapshot_times, vec![0.0, 0.007, 0.0131, 0.02]);
        assert_eq!(state.t, 0.02);
        // dense series starts at t=0 and ends at t_end
        assert_eq!(record.series.first().unwrap().0, 0.0);
        assert_eq!(record.series.last().unwrap().0, 0.02);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let cfg = StepperConfig {
            cfl: 0.3,
            ..StepperConfig::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = StepperConfig {
            dt_init: 0.0,
            ..StepperConfig::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = StepperConfig {
            reproject_every: 0,
            ..StepperConfig::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn geometric_schedule_doubles() {
        let t = geometric_times(0.01, 0.1).unwrap();
        assert_eq!(t, vec![0.01, 0.02, 0.04, 0.08]);
        assert!(geometric_times(0.0, 1.0).is_err());
    }

    #[test]
    fn epsilon_family_zero_length_member_is_the_smoothed_field() {
        let grid = Grid::new([6, 6, 6], 0.25, Domain::Torus).unwrap();
        let calc = Calculus::new(grid, Bc::Periodic).unwrap();
        let a0 = sample_ha_data(grid, Bc::Periodic, 0.75, 1.0, 13).unwrap();
        let t_eval = 0.008;
        let mut state = FlowState::new(FlowMode::Smoothing, a0).unwrap();
        let record = run_flow(&mut state, &calc, &small_cfg(t_eval), &[]).unwrap();
        let fam = epsilon_family(&record, t_eval).unwrap();
        assert_eq!(fam.len(), 1);
        let err = fam[0].1.sub(&state.field).unwrap().max_abs();
        assert!(err <= 1e-10, "zero-length member off by {err}");
        assert!(epsilon_family(&record, 0.37).is_err());
    }

    #[test]
    fn epsilon_family_matches_restarted_recovery() {
        let grid = Grid::new([6, 6, 6], 0.25, Domain::Torus).unwrap();
        let calc = Calculus::new(grid, Bc::Periodic).unwrap();
        let a0 = sample_ha_data(grid, Bc::Periodic, 0.75, 1.0, 29).unwrap();
        let (eps, t_eval) = (0.004, 0.01);
        let mut state = FlowState::new(FlowMode::Smoothing, a0.clone()).unwrap();
        let record = run_flow(&mut state, &calc, &small_cfg(t_eval), &[eps]).unwrap();
        let fam = epsilon_family(&record, eps).unwrap();
        let (t_last, a_eps) = fam.last().unwrap();
        assert!((t_last - t_eval).abs() <= 1e-12);

        // Brute force: rerun the smoothing flow from C(eps) and recover.
        let mut first = FlowState::new(FlowMode::Smoothing, a0).unwrap();
        run_flow(&mut first, &calc, &small_cfg(eps), &[]).unwrap();
        let mut second = FlowState::new(FlowMode::Smoothing, first.field).unwrap();
        run_flow(&mut second, &calc, &small_cfg(t_eval - eps), &[]).unwrap();
        let brute = second.connection().unwrap();
        let err = a_eps.sub(&brute).unwrap().max_abs();
        assert!(err <= 1e-11, "restart mismatch {err}");
    }

    #[test]
    fn epsilon_family_gaps_shrink_toward_zero() {
        let grid = Grid::new([8, 8, 8], 0.25, Domain::Torus).unwrap();
        let calc = Calculus::new(grid, Bc::Periodic).unwrap();
        let a0 = sample_ha_data(grid, Bc::Periodic, 0.5, 1.0, 7).unwrap();
        let t_eval = 0.01;
        let stamps = [5e-4, 1e-3, 2e-3];
        let mut state = FlowState::new(FlowMode::Smoothing, a0).unwrap();
        let record = run_flow(&mut state, &calc, &small_cfg(t_eval), &stamps).unwrap();
        let at_end = |eps: f64| {
            let fam = epsilon_family(&record, eps).unwrap();
            fam.last().unwrap().1.clone()
        };
        let (a1, a2, a3) = (at_end(stamps[0]), at_end(stamps[1]), at_end(stamps[2]));
        let d12 = a1.sub(&a2).unwrap().l2_norm();
        let d23 = a2.sub(&a3).unwrap().l2_norm();
        assert!(d12 > 0.0 && d23 > 0.0);
        assert!(d12 < d23, "gaps not shrinking: {d12} vs {d23}");
    }
}
