//! Measurement suite over connections and flow trajectories: curvature
//! norms, weighted time integrals, holonomies and Wilson traces, boundary
//! and identity residuals, and the small-time monitors.

use crate::dec::{Calculus, Csr};
use crate::error::{Error, Result};
use crate::fields::{
    covariant_codiff, covariant_d, curvature, pure_gauge, w1a_norm, Field, GaugeField,
};
use crate::flow::{ym_rhs, RunRecord};
use crate::grid::{Bc, Domain, FormDegree, Grid};
use crate::lie::{expm, project_to_group, AlgebraElement, GroupElement, GroupKind};
use crate::spectral::ha_norm;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Named scalar time series with strictly increasing sample times.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableSeries {
    name: String,
    samples: Vec<(f64, f64)>,
}

impl ObservableSeries {
    pub fn new(name: impl Into<String>) -> ObservableSeries {
        ObservableSeries {
            name: name.into(),
            samples: Vec::new(),
        }
    }

    pub fn from_samples(name: impl Into<String>, samples: &[(f64, f64)]) -> Result<ObservableSeries> {
        let mut out = ObservableSeries::new(name);
        for &(t, v) in samples {
            out.push(t, v)?;
        }
        Ok(out)
    }

    pub fn push(&mut self, t: f64, v: f64) -> Result<()> {
        if !t.is_finite() || !v.is_finite() {
            return Err(Error::invalid(format!(
                "series {}: non-finite sample ({t}, {v})",
                self.name
            )));
        }
        if let Some(&(last, _)) = self.samples.last() {
            if t <= last {
                return Err(Error::invalid(format!(
                    "series {}: time {t} does not increase past {last}",
                    self.name
                )));
            }
        }
        self.samples.push((t, v));
        Ok(())
    }

    #[must_use]
    pub fn name(&self) -> &str {
        &self.name
    }

    #[must_use]
    pub fn samples(&self) -> &[(f64, f64)] {
        &self.samples
    }

    #[must_use]
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    #[must_use]
    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    #[must_use]
    pub fn max_value(&self) -> Option<f64> {
        self.samples.iter().map(|s| s.1).fold(None, |m, v| {
            Some(m.map_or(v, |m: f64| m.max(v)))
        })
    }
}

/// Complex-valued counterpart, sample layout `(t, re, im)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSeries {
    name: String,
    samples: Vec<(f64, f64, f64)>,
}

impl ComplexSeries {
    pub fn new(name: impl Into<String>) -> ComplexSeries {
        ComplexSeries {
            name: name.into(),
            samples: Vec::new(),
        }
    }

    pub fn push(&mut self, t: f64, re: f64, im: f64) -> Result<()> {
        if !t.is_finite() || !re.is_finite() || !im.is_finite() {
            return Err(Error::invalid(format!("series {}: non-finite sample", self.name)));
        }
        if let Some(&(last, _, _)) = self.samples.last() {
            if t <= last {
                return Err(Error::invalid(format!(
                    "series {}: time {t} does not increase past {last}",
                    self.name
                )));
            }
        }
        self.samples.push((t, re, im));
        Ok(())
    }

    #[must_use]
    pub fn name(&self) -> &str {
        &self.name
    }

    #[must_use]
    pub fn samples(&self) -> &[(f64, f64, f64)] {
        &self.samples
    }
}

/// Total curvature energy of a connection.
pub fn energy(a: &Field, calc: &Calculus) -> Result<f64> {
    Ok(curvature(a, calc)?.l2_norm_sq())
}

/// Integral of `s^p f(s)` over `[0, t_last]` against the piecewise-linear
/// interpolant of the samples; each panel is integrated in closed form, so
/// only the interpolation error remains.  A leading gap `[0, t_0]` uses
/// constant extrapolation of the first value.  Requires `p > -1`.
pub fn power_weighted_integral(samples: &[(f64, f64)], p: f64) -> Result<f64> {
    Ok(power_weighted_cumulative(samples, p)?
        .last()
        .map_or(0.0, |s| s.1))
}

/// Running values of the same integral at each sample time.
pub fn power_weighted_cumulative(samples: &[(f64, f64)], p: f64) -> Result<Vec<(f64, f64)>> {
    if !(p.is_finite() && p > -1.0) {
        return Err(Error::invalid(format!("weight exponent {p} must exceed -1")));
    }
    if samples.is_empty() {
        return Err(Error::invalid("weighted integral of an empty series"));
    }
    let mut prev_t = -1.0;
    for &(t, v) in samples {
        if !t.is_finite() || !v.is_finite() || t < 0.0 {
            return Err(Error::invalid("weighted integral: bad sample"));
        }
        if t <= prev_t {
            return Err(Error::invalid("weighted integral: times must increase"));
        }
        prev_t = t;
    }
    let mut out = Vec::with_capacity(samples.len());
    let (t0, v0) = samples[0];
    let mut acc = v0 * t0.powf(p + 1.0) / (p + 1.0);
    out.push((t0, acc));
    for w in samples.windows(2) {
        let (s0, f0) = w[0];
        let (s1, f1) = w[1];
        let beta = (f1 - f0) / (s1 - s0);
        let alpha = f0 - beta * s0;
        acc += alpha * (s1.powf(p + 1.0) - s0.powf(p + 1.0)) / (p + 1.0)
            + beta * (s1.powf(p + 2.0) - s0.powf(p + 2.0)) / (p + 2.0);
        out.push((s1, acc));
    }
    Ok(out)
}

/// Weighted action integral of an energy series with weight `s^-a`,
/// admissible for `a` in `[1/2, 1)`.
pub fn a_action(series: &ObservableSeries, a: f64) -> Result<f64> {
    check_action_exponent(a)?;
    power_weighted_integral(series.samples(), -a)
}

/// Running a-action evaluated at every stored time.
pub fn a_action_series(series: &ObservableSeries, a: f64) -> Result<ObservableSeries> {
    check_action_exponent(a)?;
    let cum = power_weighted_cumulative(series.samples(), -a)?;
    ObservableSeries::from_samples(format!("{}_action", series.name()), &cum)
}

fn check_action_exponent(a: f64) -> Result<()> {
    if !(0.5..1.0).contains(&a) {
        return Err(Error::invalid(format!(
            "action exponent {a} outside the admissible range [1/2, 1)"
        )));
    }
    Ok(())
}

/// Weighted sup-curvature diagnostic of a recorded trajectory.
#[derive(Debug, Clone)]
pub struct SupCurvatureReport {
    /// `t^{3/4} |B(t)|_inf / |B_0|_2` at every recorded step.
    pub series: ObservableSeries,
    pub sup: f64,
    pub b0_l2: f64,
}

pub fn sup_curvature_monitor(record: &RunRecord) -> Result<SupCurvatureReport> {
    if record.series.is_empty() {
        return Err(Error::invalid("sup-curvature monitor needs a recorded trajectory"));
    }
    let b0 = record.series[0].1.sqrt();
    let mut series = ObservableSeries::new("sup_curvature");
    for &(t, _, _, sup) in &record.series {
        let v = if b0 > 0.0 { t.powf(0.75) * sup / b0 } else { 0.0 };
        series.push(t, v)?;
    }
    let sup = series.max_value().unwrap_or(0.0);
    Ok(SupCurvatureReport {
        series,
        sup,
        b0_l2: b0,
    })
}

/// Closed piecewise-linear path with a sub-segment length for transport.
#[derive(Debug, Clone, PartialEq)]
pub struct Loop {
    pub name: String,
    vertices: Vec<[f64; 3]>,
    subdiv: f64,
}

impl Loop {
    pub fn new(name: impl Into<String>, vertices: Vec<[f64; 3]>, subdiv: f64) -> Result<Loop> {
        let name = name.into();
        if vertices.len() < 2 {
            return Err(Error::invalid(format!("loop {name}: needs at least two vertices")));
        }
        if !(subdiv.is_finite() && subdiv > 0.0) {
            return Err(Error::invalid(format!("loop {name}: subdivision must be positive")));
        }
        for v in &vertices {
            if v.iter().any(|c| !c.is_finite()) {
                return Err(Error::invalid(format!("loop {name}: non-finite vertex")));
            }
        }
        let first = vertices[0];
        let last = vertices[vertices.len() - 1];
        let scale = first.iter().map(|c| c.abs()).fold(1.0, f64::max);
        let gap = (0..3).map(|i| (first[i] - last[i]).abs()).fold(0.0, f64::max);
        if gap > 1e-9 * scale {
            return Err(Error::invalid(format!("loop {name}: endpoints do not close")));
        }
        Ok(Loop {
            name,
            vertices,
            subdiv,
        })
    }

    /// Axis-aligned rectangle in the `(i, j)` coordinate plane, traversed
    /// with increasing `i` first.
    pub fn rectangle(
        name: impl Into<String>,
        axes: (usize, usize),
        corner: [f64; 3],
        sides: (f64, f64),
        subdiv: f64,
    ) -> Result<Loop> {
        let (i, j) = axes;
        if i > 2 || j > 2 || i == j {
            return Err(Error::invalid("rectangle axes must be two distinct coordinates"));
        }
        let mut p1 = corner;
        p1[i] += sides.0;
        let mut p2 = p1;
        p2[j] += sides.1;
        let mut p3 = corner;
        p3[j] += sides.1;
        Loop::new(name, vec![corner, p1, p2, p3, corner], subdiv)
    }

    #[must_use]
    pub fn vertices(&self) -> &[[f64; 3]] {
        &self.vertices
    }

    #[must_use]
    pub fn subdiv(&self) -> f64 {
        self.subdiv
    }

    /// Total polyline length.
    #[must_use]
    pub fn length(&self) -> f64 {
        self.vertices
            .windows(2)
            .map(|w| {
                (0..3)
                    .map(|i| (w[1][i] - w[0][i]).powi(2))
                    .sum::<f64>()
                    .sqrt()
            })
            .sum()
    }

    /// Containment in the domain closure plus the `subdiv <= h` transport
    /// precondition.  Segments between valid vertices stay inside by
    /// convexity; torus positions wrap and are always valid.
    pub fn validate_in(&self, grid: &Grid) -> Result<()> {
        if self.subdiv > grid.h * (1.0 + 1e-12) {
            return Err(Error::invalid(format!(
                "loop {}: subdivision {} exceeds grid spacing {}",
                self.name, self.subdiv, grid.h
            )));
        }
        if grid.domain == Domain::Box3 {
            for v in &self.vertices {
                for axis in 0..3 {
                    let l = grid.length(axis);
                    if v[axis] < -1e-9 * (1.0 + l) || v[axis] > l * (1.0 + 1e-9) {
                        return Err(Error::invalid(format!(
                            "loop {}: vertex leaves the domain on axis {axis}",
                            self.name
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// One loop per nonempty line: `name delta x0 y0 z0 x1 y1 z1 ...`;
/// `#` starts a comment.
pub fn parse_loops(text: &str) -> Result<Vec<Loop>> {
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut toks = line.split_whitespace();
        let name = toks.next().unwrap().to_string();
        let bad = |what: &str| {
            Error::invalid(format!("loops file line {}: {what}", lineno + 1))
        };
        let subdiv: f64 = toks
            .next()
            .ok_or_else(|| bad("missing subdivision"))?
            .parse()
            .map_err(|_| bad("unreadable subdivision"))?;
        let coords: Vec<f64> = toks
            .map(|t| t.parse::<f64>().map_err(|_| bad("unreadable coordinate")))
            .collect::<Result<_>>()?;
        if coords.is_empty() || coords.len() % 3 != 0 {
            return Err(bad("vertex list must be a multiple of three numbers"));
        }
        let vertices: Vec<[f64; 3]> = coords
            .chunks(3)
            .map(|c| [c[0], c[1], c[2]])
            .collect();
        out.push(Loop::new(name, vertices, subdiv).map_err(|e| match e {
            Error::InvalidArgument(m) => bad(&m),
            other => other,
        })?);
    }
    if out.is_empty() {
        return Err(Error::invalid("loops file defines no loops"));
    }
    Ok(out)
}

/// Holonomy of `a` around the loop: the ordered product of midpoint
/// exponentials over sub-segments, following `g^-1 dg/ds = A<dgamma/ds>`.
/// Projected back onto the group at the end.
pub fn parallel_transport(a: &Field, gamma: &Loop) -> Result<GroupElement> {
    if a.degree != FormDegree::One {
        return Err(Error::structural("parallel transport expects a one-form"));
    }
    gamma.validate_in(&a.grid)?;
    let mut g = GroupElement::identity(a.group);
    for seg in gamma.vertices.windows(2) {
        let (p, q) = (seg[0], seg[1]);
        let dvec = [q[0] - p[0], q[1] - p[1], q[2] - p[2]];
        let len = dvec.iter().map(|d| d * d).sum::<f64>().sqrt();
        if len == 0.0 {
            continue;
        }
        let pieces = (len / gamma.subdiv).ceil().max(1.0) as usize;
        let inv = 1.0 / pieces as f64;
        let step = [dvec[0] * inv, dvec[1] * inv, dvec[2] * inv];
        for k in 0..pieces {
            let frac = (k as f64 + 0.5) * inv;
            let mid = [
                p[0] + frac * dvec[0],
                p[1] + frac * dvec[1],
                p[2] + frac * dvec[2],
            ];
            let mut x = AlgebraElement::zero(a.group);
            for comp in 0..3 {
                if step[comp] != 0.0 {
                    let av = a.sample_at(mid, comp);
                    for (xc, ac) in x.coeffs.iter_mut().zip(av.coeffs.iter()) {
                        *xc += step[comp] * ac;
                    }
                }
            }
            g = g.mul(&expm(&x))?;
        }
    }
    project_to_group(&g)
}

/// Trace of the holonomy in the defining representation, `(re, im)`.
pub fn wilson_loop(a: &Field, gamma: &Loop) -> Result<(f64, f64)> {
    Ok(parallel_transport(a, gamma)?.trace())
}

/// Wilson trace history and Cauchy increments of one loop.
#[derive(Debug, Clone)]
pub struct LoopHistory {
    pub name: String,
    pub traces: ComplexSeries,
    /// `|W(t_{j+1}) - W(t_j)|` stamped at `t_{j+1}`.
    pub increments: ObservableSeries,
    /// Nonincreasing (within roundoff slack) over the last four increments.
    pub tail_decreasing: bool,
}

#[derive(Debug, Clone)]
pub struct LongTimeReport {
    pub loops: Vec<LoopHistory>,
    pub all_tails_decreasing: bool,
}

/// Wilson-trace stabilization diagnostic over stored `(t, connection)`
/// snapshots, normally taken on a doubling time ladder.
pub fn long_time_wilson(snapshots: &[(f64, Field)], loops: &[Loop]) -> Result<LongTimeReport> {
    if snapshots.len() < 2 {
        return Err(Error::invalid("long-time diagnostic needs at least two snapshots"));
    }
    if loops.is_empty() {
        return Err(Error::invalid("long-time diagnostic needs at least one loop"));
    }
    let mut out = Vec::with_capacity(loops.len());
    let mut all = true;
    for gamma in loops {
        let mut traces = ComplexSeries::new(format!("wilson_{}", gamma.name));
        let mut increments = ObservableSeries::new(format!("wilson_increment_{}", gamma.name));
        let mut prev: Option<(f64, f64)> = None;
        for (t, a) in snapshots {
            let w = wilson_loop(a, gamma)?;
            traces.push(*t, w.0, w.1)?;
            if let Some(p) = prev {
                let inc = ((w.0 - p.0).powi(2) + (w.1 - p.1).powi(2)).sqrt();
                increments.push(*t, inc)?;
            }
            prev = Some(w);
        }
        let vals: Vec<f64> = increments.samples().iter().map(|s| s.1).collect();
        let tail = &vals[vals.len().saturating_sub(4)..];
        let slack = 1e-12 * (1.0 + vals.iter().cloned().fold(0.0, f64::max));
        let tail_decreasing = tail.windows(2).all(|w| w[1] <= w[0] + slack);
        all &= tail_decreasing;
        out.push(LoopHistory {
            name: gamma.name.clone(),
            traces,
            increments,
            tail_decreasing,
        });
    }
    Ok(LongTimeReport {
        loops: out,
        all_tails_decreasing: all,
    })
}

/// Norm of the covariant derivative of the curvature; vanishes in the
/// continuum for every connection, so the discrete value is a pure
/// truncation residual.
pub fn bianchi_residual(a: &Field, calc: &Calculus) -> Result<f64> {
    let b = curvature(a, calc)?;
    Ok(covariant_d(a, &b, calc)?.l2_norm())
}

/// Frozen constants of the curvature-dependent coercivity bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaffneyConstants {
    pub lambda_m: f64,
    pub gamma2: f64,
}

/// Signed slack of
/// `|d_A w|^2 + |d*_A w|^2 + (lambda_M + gamma2 |B|_2^4) |w|^2 - (1/2) |w|_{W1A}^2`;
/// nonnegative when the bound holds.
pub fn gaffney_slack(
    a: &Field,
    omega: &Field,
    k: &GaffneyConstants,
    calc: &Calculus,
) -> Result<f64> {
    if omega.degree != FormDegree::One && omega.degree != FormDegree::Two {
        return Err(Error::structural("coercivity slack expects a one- or two-form"));
    }
    let b = curvature(a, calc)?;
    let d_sq = covariant_d(a, omega, calc)?.l2_norm_sq();
    let ds_sq = covariant_codiff(a, omega, calc)?.l2_norm_sq();
    let w1a = w1a_norm(a, omega)?;
    let lam = k.lambda_m + k.gamma2 * b.l2_norm_sq().powi(2);
    Ok(d_sq + ds_sq + lam * omega.l2_norm_sq() - 0.5 * w1a * w1a)
}

/// Deterministic `(A, omega)` draw for calibration and verification; the
/// connection amplitude sweeps `[0.2, 3.0]` so the curvature term of the
/// bound is exercised.
pub fn gaffney_pair(
    grid: Grid,
    bc: Bc,
    group: GroupKind,
    degree: FormDegree,
    seed: u64,
    index: u64,
) -> Result<(Field, Field)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let amp = 0.2 + 2.8 * rng.gen::<f64>();
    let a = Field::random(grid, bc, FormDegree::One, group, amp, &mut rng)?;
    let omega = Field::random(grid, bc, degree, group, 1.0, &mut rng)?;
    Ok((a, omega))
}

/// Fit `(lambda_M, gamma2)` so the slack is nonnegative on a seeded family,
/// with a 30 percent margin on both constants.  The fitted values are meant
/// to be frozen per grid and mask family, then reused on fresh draws.
pub fn calibrate_gaffney(
    calc: &Calculus,
    group: GroupKind,
    degree: FormDegree,
    pairs: usize,
    seed: u64,
) -> Result<GaffneyConstants> {
    if pairs < 8 {
        return Err(Error::invalid("calibration needs at least 8 pairs"));
    }
    let mut pts = Vec::with_capacity(pairs);
    for i in 0..pairs {
        let (a, omega) = gaffney_pair(calc.grid, calc.bc, group, degree, seed, i as u64)?;
        let b = curvature(&a, calc)?;
        let d_sq = covariant_d(&a, &omega, calc)?.l2_norm_sq();
        let ds_sq = covariant_codiff(&a, &omega, calc)?.l2_norm_sq();
        let w1a = w1a_norm(&a, &omega)?;
        let needed = 0.5 * w1a * w1a - d_sq - ds_sq;
        let x = b.l2_norm_sq().powi(2);
        let u = needed / omega.l2_norm_sq();
        pts.push((x, u));
    }
    pts.sort_by(|p, q| p.0.partial_cmp(&q.0).unwrap());
    let third = (pairs / 3).max(1);
    let low = pts[..third]
        .iter()
        .map(|p| p.1)
        .fold(f64::NEG_INFINITY, f64::max);
    let lambda_m = 1.3 * low.max(0.0) + 0.1;
    let slope = pts
        .iter()
        .filter(|p| p.0 > 0.0)
        .map(|p| (p.1 - lambda_m) / p.0)
        .fold(0.0, f64::max);
    Ok(GaffneyConstants {
        lambda_m,
        gamma2: 1.3 * slope,
    })
}

/// Second-order axis derivative that ignores parity closures: centered in
/// the interior, one-sided at box faces, wrapped on the torus.  Used to
/// probe boundary values the masked calculus pins to zero by construction.
fn onesided_diff(grid: &Grid, axis: usize) -> Csr {
    let n = grid.dims[axis];
    let inv2h = 1.0 / (2.0 * grid.h);
    let sites = grid.sites();
    let mut triplets = Vec::with_capacity(3 * sites);
    grid.for_each_line(axis, |base, stride| {
        for l in 0..n {
            let row = base + l * stride;
            if l > 0 && l + 1 < n {
                triplets.push((row, row + stride, inv2h));
                triplets.push((row, row - stride, -inv2h));
            } else if grid.domain == Domain::Torus {
                let up = base + ((l + 1) % n) * stride;
                let dn = base + ((l + n - 1) % n) * stride;
                triplets.push((row, up, inv2h));
                triplets.push((row, dn, -inv2h));
            } else if l == 0 {
                triplets.push((row, base, -3.0 * inv2h));
                triplets.push((row, base + stride, 4.0 * inv2h));
                triplets.push((row, base + 2 * stride, -inv2h));
            } else {
                triplets.push((row, row, 3.0 * inv2h));
                triplets.push((row, row - stride, -4.0 * inv2h));
                triplets.push((row, row - 2 * stride, inv2h));
            }
        }
    });
    Csr::from_triplets(sites, sites, &mut triplets)
}

/// Curvature with closure-free stencils and no output mask, so boundary
/// rows report what the data actually does there.
fn onesided_curvature(a: &Field) -> Result<Field> {
    if a.degree != FormDegree::One {
        return Err(Error::structural("curvature expects a one-form"));
    }
    let grid = a.grid;
    let d = [
        onesided_diff(&grid, 0),
        onesided_diff(&grid, 1),
        onesided_diff(&grid, 2),
    ];
    let mut out = Field::zero(grid, a.bc, FormDegree::Two, a.group)?;
    for alg in 0..a.alg_dim() {
        for m in 0..3 {
            let j = (m + 1) % 3;
            let k = (m + 2) % 3;
            let dj = d[j].apply_vec(a.comp_slice(alg, k));
            let dk = d[k].apply_vec(a.comp_slice(alg, j));
            let slot = out.comp_slice_mut(alg, m);
            for (s, (x, y)) in slot.iter_mut().zip(dj.iter().zip(dk.iter())) {
                *s = x - y;
            }
        }
    }
    if a.group != GroupKind::U1 {
        let br = crate::fields::bracket_cross(a, a, FormDegree::Two)?;
        out.axpy(0.5, &br)?;
    }
    Ok(out)
}

/// Face-quadrature norm over the box boundary of the components selected
/// by `keep(component, face_normal_axis)`; zero on the torus.
fn boundary_trace_norm(f: &Field, keep: impl Fn(usize, usize) -> bool) -> f64 {
    if f.grid.domain == Domain::Torus {
        return 0.0;
    }
    let grid = f.grid;
    let mut acc = 0.0;
    for axis in 0..3 {
        let n = grid.dims[axis];
        for side in [0, n - 1] {
            for site in 0..grid.sites() {
                let idx = grid.site_coords(site);
                if idx[axis] != side {
                    continue;
                }
                let mut w = 1.0;
                for t in 0..3 {
                    if t == axis {
                        continue;
                    }
                    let edge = idx[t] == 0 || idx[t] + 1 == grid.dims[t];
                    w *= grid.h * if edge { 0.5 } else { 1.0 };
                }
                for comp in 0..f.comp_count() {
                    if keep(comp, axis) {
                        let v = f.get(site, comp);
                        acc += w * v.coeffs.iter().map(|c| c * c).sum::<f64>();
                    }
                }
            }
        }
    }
    acc.sqrt()
}

/// Norm of the normal curvature trace on the boundary; the bare
/// gauge-invariant boundary condition, reported for any connection.
pub fn marini_residual(a: &Field) -> Result<f64> {
    let b = onesided_curvature(a)?;
    Ok(boundary_trace_norm(&b, |comp, axis| comp != axis))
}

/// Normal curvature trace on the boundary, the curvature half of the
/// absolute boundary conditions.  Same quantity as `marini_residual`.
pub fn neumann_b_residual(a: &Field) -> Result<f64> {
    marini_residual(a)
}

/// Tangential curvature trace on the boundary, the curvature half of the
/// relative boundary conditions.
pub fn dirichlet_b_residual(a: &Field) -> Result<f64> {
    let b = onesided_curvature(a)?;
    Ok(boundary_trace_norm(&b, |comp, axis| comp == axis))
}

/// Per-interval logarithmic growth rates of a squared gap, divided by the
/// supplied envelope; entries where the gap sits below `floor` are
/// skipped.  A contraction bound with constant `c` holds when every ratio
/// is at most `c`.
pub fn log_contraction_ratios(
    times: &[f64],
    gap_sq: &[f64],
    env: &[f64],
    floor: f64,
) -> Result<Vec<f64>> {
    if times.len() != gap_sq.len() || times.len() != env.len() {
        return Err(Error::invalid("contraction ratios: mismatched series lengths"));
    }
    if times.len() < 2 {
        return Err(Error::invalid("contraction ratios: need at least two samples"));
    }
    let mut out = Vec::new();
    for k in 0..times.len() - 1 {
        let dt = times[k + 1] - times[k];
        if dt <= 0.0 {
            return Err(Error::invalid("contraction ratios: times must increase"));
        }
        if gap_sq[k] <= floor || gap_sq[k + 1] <= floor {
            continue;
        }
        let e = env[k].max(env[k + 1]);
        if e <= 0.0 {
            continue;
        }
        let rate = (gap_sq[k + 1].ln() - gap_sq[k].ln()) / dt;
        out.push(rate / e);
    }
    Ok(out)
}

/// Smallest nonnegative constant dominating all observed ratios.
#[must_use]
pub fn gronwall_fit(ratios: &[f64]) -> f64 {
    ratios.iter().cloned().fold(0.0, f64::max)
}

/// The three weighted small-time series of a stored trajectory, plus the
/// raw energy for contrast.
#[derive(Debug, Clone)]
pub struct SmallTimeReport {
    /// `t^{3/2} |A'(t)|_2^2`.
    pub t32_aprime: ObservableSeries,
    /// Running `int_0^t s^{3/2} |B'(s)|_2^2 ds` with `B' = d_A A'`.
    pub int_s32_bprime: ObservableSeries,
    /// `t^{1/2} |B(t)|_2^2`.
    pub t12_b: ObservableSeries,
    /// Unweighted `|B(t)|_2^2`.
    pub b_sq: ObservableSeries,
}

pub fn small_time_monitor(snapshots: &[(f64, Field)], calc: &Calculus) -> Result<SmallTimeReport> {
    if snapshots.is_empty() {
        return Err(Error::invalid("small-time monitor needs snapshots"));
    }
    let mut t32_aprime = ObservableSeries::new("t32_aprime_sq");
    let mut t12_b = ObservableSeries::new("t12_b_sq");
    let mut b_sq = ObservableSeries::new("b_sq");
    let mut bprime_samples = Vec::with_capacity(snapshots.len());
    for (t, a) in snapshots {
        let aprime = ym_rhs(a, calc)?;
        let b = curvature(a, calc)?;
        let bprime = covariant_d(a, &aprime, calc)?;
        t32_aprime.push(*t, t.powf(1.5) * aprime.l2_norm_sq())?;
        t12_b.push(*t, t.sqrt() * b.l2_norm_sq())?;
        b_sq.push(*t, b.l2_norm_sq())?;
        bprime_samples.push((*t, bprime.l2_norm_sq()));
    }
    let cum = power_weighted_cumulative(&bprime_samples, 1.5)?;
    let int_s32_bprime = ObservableSeries::from_samples("int_s32_bprime_sq", &cum)?;
    Ok(SmallTimeReport {
        t32_aprime,
        int_s32_bprime,
        t12_b,
        b_sq,
    })
}

/// Metric on gauge fields: fractional Sobolev distance of the logarithmic
/// derivatives plus the quadrature Frobenius distance of the maps.
pub fn gauge_distance(g: &GaugeField, h: &GaugeField, a: f64, bc: Bc) -> Result<f64> {
    let pg = pure_gauge(g, bc)?;
    let ph = pure_gauge(h, bc)?;
    let diff = pg.sub(&ph)?;
    Ok(ha_norm(&diff, a)? + g.l2_distance(h)?)
}
