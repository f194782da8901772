//! Orthogonal per-axis transforms diagonalizing the discrete Laplacians.
//!
//! Each axis carries one of three real orthonormal bases on its nodes:
//! cosine type (even reflection), sine type (odd reflection) or Fourier
//! type (periodic).  They are orthonormal under the trapezoidal counting
//! weights, and the parity-extended modes are eigenvectors of every
//! symmetric translation-invariant stencil, in particular of both
//!
//! * the assembled Hodge Laplacian `d*d + dd*`, whose per-axis symbol is
//!   `sin(theta)^2 / h^2` (centered differences applied twice), and
//! * the classical 3-point Laplacian with symbol `4 sin(theta/2)^2 / h^2`.
//!
//! Plans store both eigenvalue families; flow-facing code (abelian
//! solutions, `H_a` norms, rough-data sampling) uses the assembled symbol
//! so that transforms and stencil operators agree to machine precision.
//!
//! At the grid sizes this crate targets the transforms are applied as
//! dense matrix products per axis, which keeps them exactly consistent
//! with their definition and costs microseconds.

use crate::error::{Error, Result};
use crate::fields::Field;
use crate::grid::{component_parity, Bc, Domain, FormDegree, Grid, Parity};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxisKind {
    Periodic,
    Cosine,
    Sine,
}

/// One axis of a plan: `basis` is `modes x n` row-major, orthonormal under
/// `weight`, with per-mode eigenvalues for both Laplacian stencils.
#[derive(Debug, Clone)]
pub struct AxisTable {
    pub kind: AxisKind,
    pub n: usize,
    pub modes: usize,
    pub basis: Vec<f64>,
    pub weight: Vec<f64>,
    pub eig_assembled: Vec<f64>,
    pub eig_classical: Vec<f64>,
}

impl AxisTable {
    #[must_use]
    pub fn new(kind: AxisKind, n: usize, h: f64) -> AxisTable {
        let mut basis = Vec::new();
        let mut thetas = Vec::new();
        let mut weight = vec![1.0; n];
        match kind {
            AxisKind::Periodic => {
                let nf = n as f64;
                // constant, (cos, sin) pairs, and the alternating mode for
                // even n.
                thetas.push(0.0);
                basis.extend((0..n).map(|_| (1.0 / nf).sqrt()));
                let kmax = (n - 1) / 2;
                for k in 1..=kmax {
                    let th = 2.0 * std::f64::consts::PI * k as f64 / nf;
                    thetas.push(th);
                    basis.extend((0..n).map(|j| (2.0 / nf).sqrt() * (th * j as f64).cos()));
                    thetas.push(th);
                    basis.extend((0..n).map(|j| (2.0 / nf).sqrt() * (th * j as f64).sin()));
                }
                if n % 2 == 0 {
                    thetas.push(std::f64::consts::PI);
                    basis.extend((0..n).map(|j| {
                        if j % 2 == 0 {
                            (1.0 / nf).sqrt()
                        } else {
                            -(1.0 / nf).sqrt()
                        }
                    }));
                }
            }
            AxisKind::Cosine => {
                let nn = (n - 1) as f64;
                weight[0] = 0.5;
                weight[n - 1] = 0.5;
                for m in 0..n {
                    let th = std::f64::consts::PI * m as f64 / nn;
                    thetas.push(th);
                    let c = if m == 0 || m == n - 1 {
                        (1.0 / nn).sqrt()
                    } else {
                        (2.0 / nn).sqrt()
                    };
                    basis.extend((0..n).map(|j| c * (th * j as f64).cos()));
                }
            }
            AxisKind::Sine => {
                let nn = (n - 1) as f64;
                weight[0] = 0.5;
                weight[n - 1] = 0.5;
                for m in 1..n - 1 {
                    let th = std::f64::consts::PI * m as f64 / nn;
                    thetas.push(th);
                    let c = (2.0 / nn).sqrt();
                    basis.extend((0..n).map(|j| c * (th * j as f64).sin()));
                }
            }
        }
        let modes = thetas.len();
        let eig_assembled = thetas
            .iter()
            .map(|th| {
                let s = th.sin() / h;
                s * s
            })
            .collect();
        let eig_classical = thetas
            .iter()
            .map(|th| {
                let s = 2.0 * (0.5 * th).sin() / h;
                s * s
            })
            .collect();
        AxisTable {
            kind,
            n,
            modes,
            basis,
            weight,
            eig_assembled,
            eig_classical,
        }
    }
}

/// Tensor-product plan for one scalar lattice component.
#[derive(Debug, Clone)]
pub struct SpectralPlan {
    pub grid: Grid,
    pub axes: [AxisTable; 3],
}

fn axis_kind(parity: Option<Parity>) -> AxisKind {
    match parity {
        None => AxisKind::Periodic,
        Some(Parity::Even) => AxisKind::Cosine,
        Some(Parity::Odd) => AxisKind::Sine,
    }
}

impl SpectralPlan {
    /// Plan for a scalar lattice with explicit per-axis kinds.
    #[must_use]
    pub fn new(grid: Grid, kinds: [AxisKind; 3]) -> SpectralPlan {
        let axes = [
            AxisTable::new(kinds[0], grid.dims[0], grid.h),
            AxisTable::new(kinds[1], grid.dims[1], grid.h),
            AxisTable::new(kinds[2], grid.dims[2], grid.h),
        ];
        SpectralPlan { grid, axes }
    }

    /// Plan for component `comp` of a `degree`-form under `bc`.
    pub fn for_component(grid: Grid, bc: Bc, degree: FormDegree, comp: usize) -> Result<SpectralPlan> {
        grid.check_bc(bc)?;
        let kind = |axis: usize| match grid.domain {
            Domain::Torus => AxisKind::Periodic,
            Domain::Box3 => axis_kind(component_parity(degree, bc, comp, axis)),
        };
        Ok(SpectralPlan::new(grid, [kind(0), kind(1), kind(2)]))
    }

    #[must_use]
    pub fn mode_counts(&self) -> [usize; 3] {
        [self.axes[0].modes, self.axes[1].modes, self.axes[2].modes]
    }

    #[must_use]
    pub fn coeff_len(&self) -> usize {
        self.axes.iter().map(|a| a.modes).product()
    }

    /// Eigenvalue of the assembled Hodge Laplacian at a mode triple.
    #[must_use]
    pub fn eigenvalue(&self, mode: [usize; 3]) -> f64 {
        (0..3).map(|a| self.axes[a].eig_assembled[mode[a]]).sum()
    }

    /// Assembled eigenvalues in flat coefficient order (axis 0 fastest).
    #[must_use]
    pub fn eigenvalues(&self) -> Vec<f64> {
        let m = self.mode_counts();
        let mut out = Vec::with_capacity(self.coeff_len());
        for k2 in 0..m[2] {
            for k1 in 0..m[1] {
                for k0 in 0..m[0] {
                    out.push(self.eigenvalue([k0, k1, k2]));
                }
            }
        }
        out
    }

    /// Nodal values to orthonormal coefficients.
    #[must_use]
    pub fn forward(&self, nodal: &[f64]) -> Vec<f64> {
        debug_assert_eq!(nodal.len(), self.grid.sites());
        let mut data = nodal.to_vec();
        let mut shape = self.grid.dims;
        for a in 0..3 {
            let t = &self.axes[a];
            data = transform_axis(&data, shape, a, &t.basis, t.modes, t.n, Some(&t.weight));
            shape[a] = t.modes;
        }
        data
    }

    /// Orthonormal coefficients back to nodal values.
    #[must_use]
    pub fn inverse(&self, coeffs: &[f64]) -> Vec<f64> {
        debug_assert_eq!(coeffs.len(), self.coeff_len());
        let mut data = coeffs.to_vec();
        let mut shape = self.mode_counts();
        for a in 0..3 {
            let t = &self.axes[a];
            // Transpose of the forward matrix, no weights.
            let mut bt = vec![0.0; t.n * t.modes];
            for m in 0..t.modes {
                for j in 0..t.n {
                    bt[j * t.modes + m] = t.basis[m * t.n + j];
                }
            }
            data = transform_axis(&data, shape, a, &bt, t.n, t.modes, None);
            shape[a] = t.n;
        }
        data
    }
}

/// Apply `mat` (`nrows x ncols`) along `axis` of `data` with `shape`
/// (axis 0 fastest in memory), optionally folding per-entry weights into
/// the input line.
fn transform_axis(
    data: &[f64],
    shape: [usize; 3],
    axis: usize,
    mat: &[f64],
    nrows: usize,
    ncols: usize,
    w: Option<&[f64]>,
) -> Vec<f64> {
    debug_assert_eq!(shape[axis], ncols);
    let mut out_shape = shape;
    out_shape[axis] = nrows;
    let mut out = vec![0.0; out_shape[0] * out_shape[1] * out_shape[2]];
    let (oa, ob) = match axis {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    };
    let stride_of = |sh: [usize; 3], a: usize| -> usize {
        match a {
            0 => 1,
            1 => sh[0],
            _ => sh[0] * sh[1],
        }
    };
    let in_stride = stride_of(shape, axis);
    let out_stride = stride_of(out_shape, axis);
    let mut line = vec![0.0; ncols];
    for b in 0..shape[ob] {
        for a in 0..shape[oa] {
            let mut idx_in = [0usize; 3];
            idx_in[oa] = a;
            idx_in[ob] = b;
            let base_in =
                idx_in[0] * stride_of(shape, 0) + idx_in[1] * stride_of(shape, 1) + idx_in[2] * stride_of(shape, 2);
            let base_out = idx_in[0] * stride_of(out_shape, 0)
                + idx_in[1] * stride_of(out_shape, 1)
                + idx_in[2] * stride_of(out_shape, 2);
            for (l, slot) in line.iter_mut().enumerate() {
                *slot = data[base_in + l * in_stride];
            }
            if let Some(w) = w {
                for (slot, wj) in line.iter_mut().zip(w.iter()) {
                    *slot *= wj;
                }
            }
            for r in 0..nrows {
                let row = &mat[r * ncols..(r + 1) * ncols];
                let mut acc = 0.0;
                for (m, x) in row.iter().zip(line.iter()) {
                    acc += m * x;
                }
                out[base_out + r * out_stride] = acc;
            }
        }
    }
    out
}

/// Per-component plans for every component of a form field.
pub fn component_plans(grid: Grid, bc: Bc, degree: FormDegree) -> Result<Vec<SpectralPlan>> {
    (0..degree.comp_count())
        .map(|c| SpectralPlan::for_component(grid, bc, degree, c))
        .collect()
}

/// Sobolev-type norm `(h^3 sum_k (1 + lambda_k)^a |c_k|^2)^(1/2)` over all
/// components and algebra directions, with `lambda` the assembled Hodge
/// eigenvalues.  `a = 0` reproduces the quadrature L2 norm exactly.
pub fn ha_norm(field: &Field, a: f64) -> Result<f64> {
    if !a.is_finite() {
        return Err(Error::invalid("ha_norm: exponent must be finite"));
    }
    let plans = component_plans(field.grid, field.bc, field.degree)?;
    let vol = field.grid.h.powi(3);
    let mut total = 0.0;
    for (comp, plan) in plans.iter().enumerate() {
        let lam = plan.eigenvalues();
        for alg in 0..field.group.algebra_dim() {
            let coeffs = plan.forward(field.comp_slice(alg, comp));
            for (c, l) in coeffs.iter().zip(lam.iter()) {
                total += (1.0 + l).powf(a) * c * c;
            }
        }
    }
    Ok((vol * total).sqrt())
}
