//! Closed-form abelian reference solutions and rough-data tooling.
//!
//! For a U(1) connection the flows are linear and diagonalize in the
//! per-component spectral plans: the full Hodge Laplacian acts mode by
//! mode with eigenvalue `sum_i sin(theta_i)^2 / h^2`, matching the
//! assembled stencil operators to rounding.  That gives independent
//! references for the time integrator at machine-level spatial agreement.
//!
//! The kernel constant estimated here uses the classical 3-point symbol
//! `4 sin(theta/2)^2 / h^2` instead: it measures how well lattice heat
//! spreading matches the continuum `t^{-3/4}` smoothing rate, and the
//! wide-stencil symbol's spurious high-frequency null modes have no place
//! in that question.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dec::Calculus;
use crate::error::{Error, Result};
use crate::fields::{codiff_plain, d_plain, Field};
use crate::grid::{Bc, FormDegree, Grid};
use crate::lie::GroupKind;
use crate::spectral::{component_plans, SpectralPlan};

/// Relative threshold below which an eigenvalue counts as a null mode.
const NULL_EIG_REL: f64 = 1e-12;

fn require_u1_one_form(a: &Field, what: &str) -> Result<()> {
    if a.group != GroupKind::U1 {
        Err(Error::invalid(format!("{what}: abelian solution needs a U(1) field")))
    } else if a.degree != FormDegree::One {
        Err(Error::invalid(format!("{what}: expected a one-form")))
    } else {
        Ok(())
    }
}

fn check_time(t: f64, what: &str) -> Result<()> {
    if !t.is_finite() || t < 0.0 {
        Err(Error::invalid(format!("{what}: time must be finite and nonnegative")))
    } else {
        Ok(())
    }
}

/// Heat semigroup `e^{-t Lap}` applied per component through the plans.
fn heat_all_components(a: &Field, t: f64, plans: &[SpectralPlan]) -> Field {
    let mut out = a.clone();
    for (comp, plan) in plans.iter().enumerate() {
        let lam = plan.eigenvalues();
        let mut coeffs = plan.forward(a.comp_slice(0, comp));
        for (c, l) in coeffs.iter_mut().zip(lam.iter()) {
            *c *= (-l * t).exp();
        }
        out.comp_slice_mut(0, comp).copy_from_slice(&plan.inverse(&coeffs));
    }
    out.apply_mask();
    out
}

/// Exact solution of the abelian smoothing flow
/// `dC/dt = -(d* d + d d*) C`: plain componentwise heat decay.
pub fn u1_zds_solution(a0: &Field, t: f64) -> Result<Field> {
    require_u1_one_form(a0, "u1_zds_solution")?;
    check_time(t, "u1_zds_solution")?;
    let plans = component_plans(a0.grid, a0.bc, FormDegree::One)?;
    Ok(heat_all_components(a0, t, &plans))
}

/// Exact solution of the abelian direct flow `dA/dt = -d* dA`.
///
/// The gradient-plus-null part of the datum is a fixed point; the
/// remainder decays by the heat semigroup.  The split is computed by
/// solving the scalar Poisson problem `Lap q = d*A` in mode space and
/// subtracting `dq`.
pub fn u1_direct_solution(a0: &Field, t: f64) -> Result<Field> {
    require_u1_one_form(a0, "u1_direct_solution")?;
    check_time(t, "u1_direct_solution")?;
    let calc = Calculus::new(a0.grid, a0.bc)?;
    let grad = gradient_part(a0, &calc)?;
    let mut dynamic = a0.sub(&grad)?;
    let plans = component_plans(a0.grid, a0.bc, FormDegree::One)?;
    dynamic = heat_all_components(&dynamic, t, &plans);
    grad.add(&dynamic)
}

/// Projection of a U(1) one-form onto exact gradients (including nothing
/// from the scalar null modes, whose image under `d` vanishes anyway).
pub fn gradient_part(a0: &Field, calc: &Calculus) -> Result<Field> {
    require_u1_one_form(a0, "gradient_part")?;
    let div = codiff_plain(a0, calc)?;
    let plan = SpectralPlan::for_component(a0.grid, a0.bc, FormDegree::Zero, 0)?;
    let lam = plan.eigenvalues();
    let lam_max = lam.iter().fold(0.0f64, |m, &l| m.max(l));
    let mut coeffs = plan.forward(div.comp_slice(0, 0));
    let scale = coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    for (c, l) in coeffs.iter_mut().zip(lam.iter()) {
        if *l <= NULL_EIG_REL * lam_max {
            // d* of a one-form is orthogonal to the null modes; anything
            // here is rounding noise and must not be divided by ~0.
            debug_assert!(c.abs() <= 1e-10 * scale.max(1.0), "inconsistent null mode");
            *c = 0.0;
        } else {
            *c /= *l;
        }
    }
    let mut q = Field::zero(a0.grid, a0.bc, FormDegree::Zero, GroupKind::U1)?;
    q.comp_slice_mut(0, 0).copy_from_slice(&plan.inverse(&coeffs));
    q.apply_mask();
    d_plain(&q, calc)
}

/// Random U(1) one-form whose per-mode standard deviation is
/// `amplitude (1 + lambda_k)^{-(a + 3/2)/2}`.
///
/// The exponent places the sample exactly at regularity `a`: with mode
/// density `~ sqrt(lambda)` per unit volume, the expected squared
/// Sobolev-`b` norm is a sum over modes of `(1+lambda)^{b-a-3/2}`, which
/// stays bounded under refinement for `b < a` and grows without bound for
/// `b > a`.
pub fn sample_ha_data(grid: Grid, bc: Bc, a: f64, amplitude: f64, seed: u64) -> Result<Field> {
    if !a.is_finite() || a < 0.0 {
        return Err(Error::invalid("sample_ha_data: regularity must be finite and >= 0"));
    }
    if !amplitude.is_finite() || amplitude <= 0.0 {
        return Err(Error::invalid("sample_ha_data: amplitude must be positive"));
    }
    let mut out = Field::zero(grid, bc, FormDegree::One, GroupKind::U1)?;
    let plans = component_plans(grid, bc, FormDegree::One)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q = 0.5 * (a + 1.5);
    for (comp, plan) in plans.iter().enumerate() {
        let lam = plan.eigenvalues();
        let mut coeffs = vec![0.0; plan.coeff_len()];
        for (c, l) in coeffs.iter_mut().zip(lam.iter()) {
            let z: f64 = rng.sample(rand_distr::StandardNormal);
            *c = amplitude * (1.0 + l).powf(-q) * z;
        }
        out.comp_slice_mut(0, comp).copy_from_slice(&plan.inverse(&coeffs));
    }
    out.apply_mask();
    Ok(out)
}

/// `t^{3/4} sup_x sqrt(K_{2t}(x, x))` for the classical lattice heat
/// kernel, maximized over the scalar plan and the three one-form
/// component plans so the bound covers connections as well.
pub fn kernel_sup_factor(grid: Grid, bc: Bc, t: f64) -> Result<f64> {
    check_time(t, "kernel_sup_factor")?;
    let mut plans = vec![SpectralPlan::for_component(grid, bc, FormDegree::Zero, 0)?];
    plans.extend(component_plans(grid, bc, FormDegree::One)?);
    let mut worst = 0.0f64;
    for plan in &plans {
        // The diagonal is separable, so the sup is the product of per-axis
        // sups of `sum_k e^{-2 lambda_k t} phi_k(j)^2`.
        let mut s = 1.0;
        for axis in &plan.axes {
            let mut axis_sup = 0.0f64;
            for j in 0..axis.n {
                let mut acc = 0.0;
                for m in 0..axis.modes {
                    let phi = axis.basis[m * axis.n + j];
                    acc += (-2.0 * axis.eig_classical[m] * t).exp() * phi * phi;
                }
                axis_sup = axis_sup.max(acc);
            }
            s *= axis_sup;
        }
        worst = worst.max(t.powf(0.75) * s.sqrt() / grid.h.powf(1.5));
    }
    Ok(worst)
}

/// Smoothing constant `c_N` of the Neumann box, in
/// `|e^{t Lap} f|_inf <= c_N t^{-3/4} |f|_2`.  Other boundary types have
/// their own constants; ask `kernel_sup_factor` directly for those.
pub fn estimate_cn(grid: Grid, bc: Bc) -> Result<f64> {
    if bc != Bc::Neumann {
        return Err(Error::invalid(
            "estimate_cn covers the Neumann box only; use kernel_sup_factor elsewhere",
        ));
    }
    kernel_sup_envelope(grid, bc)
}

/// Sup of `kernel_sup_factor` over a fixed logarithmic time grid in
/// `[1e-4, 1]`, any boundary type.
pub(crate) fn kernel_sup_envelope(grid: Grid, bc: Bc) -> Result<f64> {
    let (t_min, t_max, steps) = (1e-4, 1.0, 60usize);
    let ratio = (t_max / t_min as f64).powf(1.0 / (steps - 1) as f64);
    let mut worst = 0.0f64;
    let mut t = t_min;
    for _ in 0..steps {
        worst = worst.max(kernel_sup_factor(grid, bc, t)?);
        t *= ratio;
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::covariant_codiff;
    use crate::grid::Domain;

    fn hodge_laplacian(a: &Field, calc: &Calculus) -> Field {
        let up = d_plain(a, calc).unwrap();
        let mut out = covariant_codiff(&zero_conn(a), &up, calc).unwrap();
        if a.degree == FormDegree::One {
            let div = codiff_plain(a, calc).unwrap();
            let grad = d_plain(&div, calc).unwrap();
            out.axpy(1.0, &grad).unwrap();
        }
        out
    }

    fn zero_conn(a: &Field) -> Field {
        Field::zero(a.grid, a.bc, FormDegree::One, a.group).unwrap()
    }

    #[test]
    fn plans_diagonalize_the_assembled_laplacian() {
        // For a pure tensor mode the masked stencil Laplacian returns
        // exactly lambda times the mode, on every boundary type.
        let cases = [
            (Grid::new([6, 5, 4], 0.3, Domain::Torus).unwrap(), Bc::Periodic),
            (Grid::new([6, 6, 6], 0.2, Domain::Box3).unwrap(), Bc::Neumann),
            (Grid::new([6, 6, 6], 0.2, Domain::Box3).unwrap(), Bc::Dirichlet),
        ];
        for (grid, bc) in cases {
            let calc = Calculus::new(grid, bc).unwrap();
            let plans = component_plans(grid, bc, FormDegree::One).unwrap();
            for comp in 0..3 {
                let plan = &plans[comp];
                let lam = plan.eigenvalues();
                for flat in [1usize, plan.coeff_len() / 2, plan.coeff_len() - 1] {
                    let mut coeffs = vec![0.0; plan.coeff_len()];
                    coeffs[flat] = 1.0;
                    let mut a =
                        Field::zero(grid, bc, FormDegree::One, GroupKind::U1).unwrap();
                    a.comp_slice_mut(0, comp).copy_from_slice(&plan.inverse(&coeffs));
                    a.apply_mask();
                    let lap = hodge_laplacian(&a, &calc);
                    let mut diff = lap.clone();
                    diff.axpy(-lam[flat], &a).unwrap();
                    assert!(
                        diff.max_abs() <= 1e-10 * (1.0 + lam[flat]),
                        "{bc:?} comp {comp} mode {flat}: residual {}",
                        diff.max_abs()
                    );
                }
            }
        }
    }

    #[test]
    fn zds_solution_semigroup_and_rate() {
        let grid = Grid::new([6, 6, 6], 0.2, Domain::Box3).unwrap();
        let a0 = sample_ha_data(grid, Bc::Neumann, 1.0, 1.0, 77).unwrap();
        let t0 = u1_zds_solution(&a0, 0.0).unwrap();
        assert!(t0.sub(&a0).unwrap().max_abs() <= 1e-13);
        let c1 = u1_zds_solution(&a0, 0.03).unwrap();
        let c2 = u1_zds_solution(&c1, 0.05).unwrap();
        let c12 = u1_zds_solution(&a0, 0.08).unwrap();
        assert!(c2.sub(&c12).unwrap().max_abs() <= 1e-12);
        // time derivative matches the masked Laplacian
        let calc = Calculus::new(grid, Bc::Neumann).unwrap();
        let eps = 1e-5;
        let up = u1_zds_solution(&a0, 0.1 + eps).unwrap();
        let dn = u1_zds_solution(&a0, 0.1 - eps).unwrap();
        let mut fd = up.sub(&dn).unwrap();
        fd.scale_in_place(1.0 / (2.0 * eps));
        let mid = u1_zds_solution(&a0, 0.1).unwrap();
        let mut want = hodge_laplacian(&mid, &calc);
        want.scale_in_place(-1.0);
        let err = fd.sub(&want).unwrap().max_abs();
        assert!(err <= 1e-6, "flow rate residual {err}");
    }

    #[test]
    fn direct_solution_freezes_gradients() {
        let grid = Grid::new([6, 6, 6], 0.2, Domain::Box3).unwrap();
        for bc in [Bc::Neumann, Bc::Dirichlet] {
            let calc = Calculus::new(grid, bc).unwrap();
            let q = crate::synth::smooth_form(
                grid,
                bc,
                FormDegree::Zero,
                GroupKind::U1,
                crate::synth::SmoothSpec::new(31, 1.0),
            )
            .unwrap();
            let a0 = d_plain(&q, &calc).unwrap();
            let later = u1_direct_solution(&a0, 0.7).unwrap();
            let drift = later.sub(&a0).unwrap().max_abs();
            assert!(drift <= 1e-10, "{bc:?}: gradient drifted {drift}");
        }
    }

    #[test]
    fn direct_solution_rate_matches_its_flow() {
        let grid = Grid::new([5, 6, 7], 0.3, Domain::Torus).unwrap();
        let a0 = sample_ha_data(grid, Bc::Periodic, 1.5, 1.0, 5).unwrap();
        let calc = Calculus::new(grid, Bc::Periodic).unwrap();
        let eps = 1e-5;
        let t = 0.05;
        let up = u1_direct_solution(&a0, t + eps).unwrap();
        let dn = u1_direct_solution(&a0, t - eps).unwrap();
        let mut fd = up.sub(&dn).unwrap();
        fd.scale_in_place(1.0 / (2.0 * eps));
        let mid = u1_direct_solution(&a0, t).unwrap();
        let b = d_plain(&mid, &calc).unwrap();
        let mut want = covariant_codiff(&zero_conn(&a0), &b, &calc).unwrap();
        want.scale_in_place(-1.0);
        let err = fd.sub(&want).unwrap().max_abs();
        assert!(err <= 1e-6, "direct rate residual {err}");
    }

    #[test]
    fn sample_is_deterministic_and_scales() {
        let grid = Grid::new([8, 8, 8], 0.125, Domain::Torus).unwrap();
        let a = sample_ha_data(grid, Bc::Periodic, 0.5, 1.0, 9).unwrap();
        let b = sample_ha_data(grid, Bc::Periodic, 0.5, 1.0, 9).unwrap();
        assert_eq!(a.data, b.data);
        let c = sample_ha_data(grid, Bc::Periodic, 0.5, 2.0, 9).unwrap();
        let mut twice = a.clone();
        twice.scale_in_place(2.0);
        assert!(twice.sub(&c).unwrap().max_abs() <= 1e-12);
        assert!(sample_ha_data(grid, Bc::Periodic, -0.5, 1.0, 9).is_err());
        assert!(sample_ha_data(grid, Bc::Periodic, 0.5, 0.0, 9).is_err());
    }

    #[test]
    fn cn_estimate_matches_continuum_unit_box() {
        // Unit Neumann box: the late-time plateau forces c -> 1 (constant
        // mode), and near t ~ 0.02 the corner value sits near the halfspace
        // reflection constant (2 pi)^{-3/4} ~ 0.2516.
        let n = 17;
        let grid = Grid::new([n, n, n], 1.0 / (n as f64 - 1.0), Domain::Box3).unwrap();
        let c = estimate_cn(grid, Bc::Neumann).unwrap();
        assert!((c - 1.0).abs() <= 0.05, "c_N = {c}");
        let corner = kernel_sup_factor(grid, Bc::Neumann, 0.02).unwrap();
        let want = (2.0 * std::f64::consts::PI).powf(-0.75);
        assert!(
            (corner - want).abs() <= 0.15 * want,
            "corner plateau {corner} vs {want}"
        );
    }

    #[test]
    fn cn_estimate_torus_unit_volume() {
        let n = 16;
        let grid = Grid::new([n, n, n], 1.0 / n as f64, Domain::Torus).unwrap();
        assert!(estimate_cn(grid, Bc::Periodic).is_err());
        let c = kernel_sup_envelope(grid, Bc::Periodic).unwrap();
        assert!((c - 1.0).abs() <= 0.05, "c = {c}");
    }
}
