//! Seeded smooth initial data, independent of grid resolution.
//!
//! Every generator draws a fixed, grid-independent set of low-mode
//! coefficients from a counter RNG and evaluates the same continuum
//! function at whatever nodes the target grid has.  Refinement studies can
//! therefore compare runs across resolutions against one underlying field.
//! Mode shapes respect the boundary behavior of each component (odd sine
//! factors along axes where the component must vanish, even cosine factors
//! elsewhere, full Fourier factors on the torus), so sampled fields satisfy
//! the boundary masks up to rounding; the masked slots are then zeroed
//! outright.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::fields::{Field, GaugeField};
use crate::grid::{component_parity, Bc, Domain, FormDegree, Grid, Parity};
use crate::lie::{expm, AlgebraElement, GroupKind};

/// Cutoff for per-axis wavenumbers; fixed so the coefficient count (and
/// hence the RNG stream) never depends on the grid.
const MAX_WAVE: usize = 2;

#[derive(Debug, Clone, Copy)]
pub struct SmoothSpec {
    pub seed: u64,
    pub amplitude: f64,
}

impl SmoothSpec {
    #[must_use]
    pub fn new(seed: u64, amplitude: f64) -> SmoothSpec {
        SmoothSpec { seed, amplitude }
    }
}

/// One separable factor along an axis, identified by a small integer.
#[derive(Debug, Clone, Copy)]
enum AxisMode {
    One,
    Cos(usize),
    Sin(usize),
    /// `cos(2 pi k u)` on the torus.
    FourierCos(usize),
    /// `sin(2 pi k u)` on the torus.
    FourierSin(usize),
}

impl AxisMode {
    fn eval(self, u: f64) -> f64 {
        use std::f64::consts::PI;
        match self {
            AxisMode::One => 1.0,
            AxisMode::Cos(k) => (PI * k as f64 * u).cos(),
            AxisMode::Sin(k) => (PI * k as f64 * u).sin(),
            AxisMode::FourierCos(k) => (2.0 * PI * k as f64 * u).cos(),
            AxisMode::FourierSin(k) => (2.0 * PI * k as f64 * u).sin(),
        }
    }

    fn wave(self) -> usize {
        match self {
            AxisMode::One => 0,
            AxisMode::Cos(k) | AxisMode::Sin(k) => k,
            AxisMode::FourierCos(k) | AxisMode::FourierSin(k) => k,
        }
    }
}

/// All per-axis factors available for a component with the given parity
/// (`None` means periodic).
fn axis_modes(parity: Option<Parity>) -> Vec<AxisMode> {
    let mut out = Vec::new();
    match parity {
        None => {
            out.push(AxisMode::One);
            for k in 1..=MAX_WAVE {
                out.push(AxisMode::FourierCos(k));
                out.push(AxisMode::FourierSin(k));
            }
        }
        Some(Parity::Even) => {
            for k in 0..=MAX_WAVE {
                out.push(AxisMode::Cos(k));
            }
        }
        Some(Parity::Odd) => {
            for k in 1..=MAX_WAVE {
                out.push(AxisMode::Sin(k));
            }
        }
    }
    out
}

struct Mode {
    factors: [AxisMode; 3],
    coeff: f64,
}

/// Draw the full fixed mode set for one (component, algebra direction).
fn draw_modes(
    rng: &mut ChaCha8Rng,
    amplitude: f64,
    parities: [Option<Parity>; 3],
) -> Vec<Mode> {
    let per_axis: Vec<Vec<AxisMode>> = parities.iter().map(|p| axis_modes(*p)).collect();
    let mut out = Vec::new();
    for &f0 in &per_axis[0] {
        for &f1 in &per_axis[1] {
            for &f2 in &per_axis[2] {
                let s2 = (f0.wave().pow(2) + f1.wave().pow(2) + f2.wave().pow(2)) as f64;
                let z: f64 = rng.sample(rand_distr::StandardNormal);
                out.push(Mode {
                    factors: [f0, f1, f2],
                    coeff: amplitude * z / (1.0 + s2),
                });
            }
        }
    }
    out
}

fn eval_modes(modes: &[Mode], u: [f64; 3]) -> f64 {
    let mut acc = 0.0;
    for m in modes {
        acc += m.coeff
            * m.factors[0].eval(u[0])
            * m.factors[1].eval(u[1])
            * m.factors[2].eval(u[2]);
    }
    acc
}

fn parities_for(grid: &Grid, bc: Bc, degree: FormDegree, comp: usize) -> [Option<Parity>; 3] {
    let mut p = [None; 3];
    if grid.domain == Domain::Box3 {
        for (axis, slot) in p.iter_mut().enumerate() {
            *slot = component_parity(degree, bc, comp, axis);
        }
    }
    p
}

/// Smooth seeded form field of any degree.  The same `(seed, amplitude)`
/// pair produces samples of one continuum field on every resolution.
pub fn smooth_form(
    grid: Grid,
    bc: Bc,
    degree: FormDegree,
    group: GroupKind,
    spec: SmoothSpec,
) -> Result<Field> {
    grid.check_bc(bc)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut out = Field::zero(grid, bc, degree, group)?;
    let lens = [grid.length(0), grid.length(1), grid.length(2)];
    for comp in 0..degree.comp_count() {
        let parities = parities_for(&grid, bc, degree, comp);
        for alg in 0..group.algebra_dim() {
            let modes = draw_modes(&mut rng, spec.amplitude, parities);
            let slice = out.comp_slice_mut(alg, comp);
            for (site, slot) in slice.iter_mut().enumerate() {
                let c = grid.site_coords(site);
                let pos = grid.position(c);
                let u = [pos[0] / lens[0], pos[1] / lens[1], pos[2] / lens[2]];
                *slot = eval_modes(&modes, u);
            }
        }
    }
    out.apply_mask();
    Ok(out)
}

/// Smooth seeded connection (one-form); the workhorse initial datum.
pub fn smooth_connection(grid: Grid, bc: Bc, group: GroupKind, spec: SmoothSpec) -> Result<Field> {
    smooth_form(grid, bc, FormDegree::One, group, spec)
}

/// Smooth gauge map `g = exp(X)` with `X` an even (cosine-type) algebra
/// valued scalar on the box, full Fourier on the torus.
pub fn smooth_gauge(grid: Grid, group: GroupKind, spec: SmoothSpec) -> Result<GaugeField> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let parities = match grid.domain {
        Domain::Torus => [None; 3],
        Domain::Box3 => [Some(Parity::Even); 3],
    };
    let lens = [grid.length(0), grid.length(1), grid.length(2)];
    let mode_sets: Vec<Vec<Mode>> = (0..group.algebra_dim())
        .map(|_| draw_modes(&mut rng, spec.amplitude, parities))
        .collect();
    let mut out = GaugeField::identity(grid, group);
    for site in 0..grid.sites() {
        let pos = grid.position(grid.site_coords(site));
        let u = [pos[0] / lens[0], pos[1] / lens[1], pos[2] / lens[2]];
        let mut x = AlgebraElement::zero(group);
        for (alg, modes) in mode_sets.iter().enumerate() {
            x.coeffs[alg] = eval_modes(modes, u);
        }
        out.set(site, &expm(&x));
    }
    Ok(out)
}
