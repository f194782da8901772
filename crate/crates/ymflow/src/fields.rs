//! Lattice fields: algebra-valued differential forms and gauge maps.
//!
//! A `Field` stores one algebra coefficient array per (algebra direction,
//! component) pair, each laid out site-contiguously so the sparse calculus
//! operators apply per algebra slice.  A `GaugeField` stores one group
//! element per site, site-major.
//!
//! The covariant operators here are built so that `covariant_codiff` is the
//! exact quadrature adjoint of `covariant_d` for every connection, not just
//! up to discretization error; all bracket terms reduce to the same cyclic
//! kernel `[X x Y]_i = [X_{i+1}, Y_{i+2}] - [X_{i+2}, Y_{i+1}]`.

use rand::Rng;
use rayon::prelude::*;

use crate::dec::{axis_diff_matrix, Calculus};
use crate::error::{Error, Result};
use crate::grid::{component_parity, masked_axes, Bc, Domain, FormDegree, Grid};
use crate::lie::{adjoint_action, su2, AlgebraElement, GroupElement, GroupKind};

/// Sites below this count are processed sequentially; parallel splits are
/// over disjoint site ranges only, so results are bit-identical either way.
const PAR_MIN_SITES: usize = 32 * 32 * 32;

/// Algebra-valued `degree`-form on `grid` with layout
/// `data[(alg * comps + comp) * sites + site]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub grid: Grid,
    pub bc: Bc,
    pub degree: FormDegree,
    pub group: GroupKind,
    pub data: Vec<f64>,
}

impl Field {
    pub fn zero(grid: Grid, bc: Bc, degree: FormDegree, group: GroupKind) -> Result<Field> {
        grid.check_bc(bc)?;
        let len = group.algebra_dim() * degree.comp_count() * grid.sites();
        Ok(Field {
            grid,
            bc,
            degree,
            group,
            data: vec![0.0; len],
        })
    }

    /// Fill from a pointwise closure of (position, component).
    pub fn from_fn<F>(grid: Grid, bc: Bc, degree: FormDegree, group: GroupKind, f: F) -> Result<Field>
    where
        F: Fn([f64; 3], usize) -> AlgebraElement,
    {
        let mut out = Field::zero(grid, bc, degree, group)?;
        for site in 0..grid.sites() {
            let pos = grid.position(grid.site_coords(site));
            for comp in 0..degree.comp_count() {
                let v = f(pos, comp);
                if v.kind != group {
                    return Err(Error::structural("from_fn closure returned wrong group"));
                }
                out.set(site, comp, &v);
            }
        }
        Ok(out)
    }

    /// Independent standard normals (times `scale`) in every retained slot;
    /// masked boundary slots are zeroed.
    pub fn random<R: Rng>(
        grid: Grid,
        bc: Bc,
        degree: FormDegree,
        group: GroupKind,
        scale: f64,
        rng: &mut R,
    ) -> Result<Field> {
        let mut out = Field::zero(grid, bc, degree, group)?;
        for v in out.data.iter_mut() {
            let z: f64 = rng.sample(rand_distr::StandardNormal);
            *v = scale * z;
        }
        out.apply_mask();
        Ok(out)
    }

    #[must_use]
    pub fn sites(&self) -> usize {
        self.grid.sites()
    }

    #[must_use]
    pub fn comp_count(&self) -> usize {
        self.degree.comp_count()
    }

    #[must_use]
    pub fn alg_dim(&self) -> usize {
        self.group.algebra_dim()
    }

    #[must_use]
    pub fn comp_slice(&self, alg: usize, comp: usize) -> &[f64] {
        let s = self.sites();
        let base = (alg * self.comp_count() + comp) * s;
        &self.data[base..base + s]
    }

    pub fn comp_slice_mut(&mut self, alg: usize, comp: usize) -> &mut [f64] {
        let s = self.sites();
        let base = (alg * self.comp_count() + comp) * s;
        &mut self.data[base..base + s]
    }

    /// All components of one algebra direction, component-major.
    #[must_use]
    pub fn alg_slice(&self, alg: usize) -> &[f64] {
        let s = self.sites() * self.comp_count();
        &self.data[alg * s..(alg + 1) * s]
    }

    pub fn alg_slice_mut(&mut self, alg: usize) -> &mut [f64] {
        let s = self.sites() * self.comp_count();
        &mut self.data[alg * s..(alg + 1) * s]
    }

    #[must_use]
    pub fn get(&self, site: usize, comp: usize) -> AlgebraElement {
        let mut v = AlgebraElement::zero(self.group);
        let stride = self.comp_count() * self.sites();
        for a in 0..self.alg_dim() {
            v.coeffs[a] = self.data[a * stride + comp * self.sites() + site];
        }
        v
    }

    pub fn set(&mut self, site: usize, comp: usize, v: &AlgebraElement) {
        debug_assert_eq!(v.kind, self.group);
        let sites = self.sites();
        let stride = self.comp_count() * sites;
        for a in 0..self.alg_dim() {
            self.data[a * stride + comp * sites + site] = v.coeffs[a];
        }
    }

    pub fn check_compatible(&self, other: &Field) -> Result<()> {
        self.grid.check_same(&other.grid)?;
        if self.bc != other.bc || self.degree != other.degree || self.group != other.group {
            return Err(Error::structural("incompatible fields"));
        }
        Ok(())
    }

    pub fn scale_in_place(&mut self, s: f64) {
        for v in self.data.iter_mut() {
            *v *= s;
        }
    }

    /// `self += s * other`.
    pub fn axpy(&mut self, s: f64, other: &Field) -> Result<()> {
        self.check_compatible(other)?;
        for (a, b) in self.data.iter_mut().zip(other.data.iter()) {
            *a += s * b;
        }
        Ok(())
    }

    pub fn add(&self, other: &Field) -> Result<Field> {
        let mut out = self.clone();
        out.axpy(1.0, other)?;
        Ok(out)
    }

    pub fn sub(&self, other: &Field) -> Result<Field> {
        let mut out = self.clone();
        out.axpy(-1.0, other)?;
        Ok(out)
    }

    /// Zero every slot this form's boundary conditions pin to zero.
    pub fn apply_mask(&mut self) {
        if self.grid.domain == Domain::Torus {
            return;
        }
        let grid = self.grid;
        let dims = grid.dims;
        for comp in 0..self.comp_count() {
            let masked = masked_axes(self.degree, self.bc, comp);
            if !masked.iter().any(|&m| m) {
                continue;
            }
            for alg in 0..self.alg_dim() {
                let slice = self.comp_slice_mut(alg, comp);
                for site in 0..slice.len() {
                    let c = grid.site_coords(site);
                    let on_face =
                        (0..3).any(|ax| masked[ax] && (c[ax] == 0 || c[ax] == dims[ax] - 1));
                    if on_face {
                        slice[site] = 0.0;
                    }
                }
            }
        }
    }

    /// Largest magnitude sitting in a slot the mask would zero.
    #[must_use]
    pub fn mask_violation(&self) -> f64 {
        if self.grid.domain == Domain::Torus {
            return 0.0;
        }
        let grid = self.grid;
        let dims = grid.dims;
        let mut worst = 0.0f64;
        for comp in 0..self.comp_count() {
            let masked = masked_axes(self.degree, self.bc, comp);
            if !masked.iter().any(|&m| m) {
                continue;
            }
            for alg in 0..self.alg_dim() {
                let slice = self.comp_slice(alg, comp);
                for (site, v) in slice.iter().enumerate() {
                    let c = grid.site_coords(site);
                    let on_face =
                        (0..3).any(|ax| masked[ax] && (c[ax] == 0 || c[ax] == dims[ax] - 1));
                    if on_face {
                        worst = worst.max(v.abs());
                    }
                }
            }
        }
        worst
    }

    /// Squared pointwise magnitude summed over components and algebra
    /// directions.
    #[must_use]
    pub fn pointwise_sq(&self, site: usize) -> f64 {
        let sites = self.sites();
        let mut acc = 0.0;
        for comp in 0..self.comp_count() {
            for alg in 0..self.alg_dim() {
                let v = self.data[(alg * self.comp_count() + comp) * sites + site];
                acc += v * v;
            }
        }
        acc
    }

    /// Quadrature inner product (trapezoidal weights, cell volume included).
    pub fn dot(&self, other: &Field) -> Result<f64> {
        self.check_compatible(other)?;
        let w = self.grid.quadrature_weights();
        let sites = self.sites();
        let mut acc = 0.0;
        for block in 0..self.comp_count() * self.alg_dim() {
            let base = block * sites;
            for site in 0..sites {
                acc += w[site] * self.data[base + site] * other.data[base + site];
            }
        }
        Ok(acc)
    }

    #[must_use]
    pub fn l2_norm_sq(&self) -> f64 {
        let w = self.grid.quadrature_weights();
        let mut acc = 0.0;
        for (site, wi) in w.iter().enumerate() {
            acc += wi * self.pointwise_sq(site);
        }
        acc
    }

    #[must_use]
    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sq().sqrt()
    }

    /// `L^p` quadrature norm of the pointwise magnitude, `p` even.
    #[must_use]
    pub fn lp_norm(&self, p: u32) -> f64 {
        assert!(p >= 2 && p % 2 == 0, "lp_norm expects even p");
        let w = self.grid.quadrature_weights();
        let half = (p / 2) as i32;
        let mut acc = 0.0;
        for (site, wi) in w.iter().enumerate() {
            acc += wi * self.pointwise_sq(site).powi(half);
        }
        acc.powf(1.0 / f64::from(p))
    }

    /// Max over sites of the pointwise magnitude.
    #[must_use]
    pub fn linf_norm(&self) -> f64 {
        let mut worst = 0.0f64;
        for site in 0..self.sites() {
            worst = worst.max(self.pointwise_sq(site));
        }
        worst.sqrt()
    }

    #[must_use]
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Trilinear interpolation of one component at a physical position.
    /// Positions wrap on the torus and clamp to the closed box otherwise.
    #[must_use]
    pub fn sample_at(&self, pos: [f64; 3], comp: usize) -> AlgebraElement {
        let g = &self.grid;
        let mut i0 = [0usize; 3];
        let mut i1 = [0usize; 3];
        let mut fr = [0.0f64; 3];
        for ax in 0..3 {
            let n = g.dims[ax];
            let u = pos[ax] / g.h;
            match g.domain {
                Domain::Torus => {
                    let nf = n as f64;
                    let mut w = u % nf;
                    if w < 0.0 {
                        w += nf;
                    }
                    let base = w.floor();
                    i0[ax] = (base as usize) % n;
                    i1[ax] = (i0[ax] + 1) % n;
                    fr[ax] = w - base;
                }
                Domain::Box3 => {
                    let top = (n - 1) as f64;
                    let w = u.clamp(0.0, top);
                    let mut base = w.floor();
                    if base >= top {
                        base = top - 1.0;
                    }
                    i0[ax] = base as usize;
                    i1[ax] = i0[ax] + 1;
                    fr[ax] = w - base;
                }
            }
        }
        let mut out = AlgebraElement::zero(self.group);
        for corner in 0..8usize {
            let mut idx = [0usize; 3];
            let mut weight = 1.0;
            for ax in 0..3 {
                if corner >> ax & 1 == 1 {
                    idx[ax] = i1[ax];
                    weight *= fr[ax];
                } else {
                    idx[ax] = i0[ax];
                    weight *= 1.0 - fr[ax];
                }
            }
            if weight == 0.0 {
                continue;
            }
            let site = g.site(idx[0], idx[1], idx[2]);
            let sites = self.sites();
            for a in 0..self.alg_dim() {
                out.coeffs[a] +=
                    weight * self.data[(a * self.comp_count() + comp) * sites + site];
            }
        }
        out
    }
}

/// `out_m = [x_{m+1}, y_{m+2}] - [x_{m+2}, y_{m+1}]`, the shared kernel of
/// the wedge bracket on one-forms, its adjoint on two-forms, and the
/// contraction of a one-form against a two-form.  `out_degree` only tags
/// the result.  Identically zero for an abelian group.
pub fn bracket_cross(x: &Field, y: &Field, out_degree: FormDegree) -> Result<Field> {
    x.grid.check_same(&y.grid)?;
    if x.group != y.group || x.bc != y.bc {
        return Err(Error::structural("bracket_cross: mismatched fields"));
    }
    if x.comp_count() != 3 || y.comp_count() != 3 || out_degree.comp_count() != 3 {
        return Err(Error::structural("bracket_cross needs three-component fields"));
    }
    let mut out = Field::zero(x.grid, x.bc, out_degree, x.group)?;
    if x.group == GroupKind::U1 {
        return Ok(out);
    }
    let sites = x.sites();
    let xd = &x.data;
    let yd = &y.data;
    let kernel = |site: usize, slot: &mut [f64]| {
        // slot is the 9 outputs for this site ordered [alg * 3 + comp].
        let mut xv = [[0.0f64; 3]; 3];
        let mut yv = [[0.0f64; 3]; 3];
        for a in 0..3 {
            for c in 0..3 {
                xv[c][a] = xd[(a * 3 + c) * sites + site];
                yv[c][a] = yd[(a * 3 + c) * sites + site];
            }
        }
        for m in 0..3 {
            let j = (m + 1) % 3;
            let k = (m + 2) % 3;
            let mut b1 = [0.0; 3];
            let mut b2 = [0.0; 3];
            su2::bracket(&xv[j], &yv[k], &mut b1);
            su2::bracket(&xv[k], &yv[j], &mut b2);
            for a in 0..3 {
                slot[a * 3 + m] = b1[a] - b2[a];
            }
        }
    };
    let mut scratch = vec![0.0f64; sites * 9];
    if sites >= PAR_MIN_SITES {
        scratch
            .par_chunks_mut(9)
            .enumerate()
            .for_each(|(site, slot)| kernel(site, slot));
    } else {
        for (site, slot) in scratch.chunks_mut(9).enumerate() {
            kernel(site, slot);
        }
    }
    // Scatter back to slice layout.
    for site in 0..sites {
        for a in 0..3 {
            for c in 0..3 {
                out.data[(a * 3 + c) * sites + site] = scratch[site * 9 + a * 3 + c];
            }
        }
    }
    Ok(out)
}

/// Curvature `B = dA + (1/2)[A wedge A]`, component `m` holding
/// `D_{m+1} A_{m+2} - D_{m+2} A_{m+1} + [A_{m+1}, A_{m+2}]`.
pub fn curvature(a: &Field, calc: &Calculus) -> Result<Field> {
    if a.degree != FormDegree::One {
        return Err(Error::structural("curvature expects a one-form"));
    }
    a.grid.check_same(&calc.grid)?;
    if a.bc != calc.bc {
        return Err(Error::structural("curvature: calculus has different bc"));
    }
    let mut out = Field::zero(a.grid, a.bc, FormDegree::Two, a.group)?;
    for alg in 0..a.alg_dim() {
        let img = calc.d[1].apply_vec(a.alg_slice(alg));
        out.alg_slice_mut(alg).copy_from_slice(&img);
    }
    if a.group != GroupKind::U1 {
        let br = bracket_cross(a, a, FormDegree::Two)?;
        out.axpy(0.5, &br)?;
    }
    Ok(out)
}

/// Covariant exterior derivative of a zero-, one- or two-form.
pub fn covariant_d(a: &Field, omega: &Field, calc: &Calculus) -> Result<Field> {
    a.grid.check_same(&omega.grid)?;
    if a.degree != FormDegree::One || a.group != omega.group || a.bc != omega.bc {
        return Err(Error::structural("covariant_d: mismatched inputs"));
    }
    match omega.degree {
        FormDegree::Zero => {
            let mut out = Field::zero(a.grid, a.bc, FormDegree::One, a.group)?;
            for alg in 0..a.alg_dim() {
                let img = calc.d[0].apply_vec(omega.alg_slice(alg));
                out.alg_slice_mut(alg).copy_from_slice(&img);
            }
            if a.group == GroupKind::Su2 {
                let sites = a.sites();
                for site in 0..sites {
                    let f = omega.get(site, 0);
                    for comp in 0..3 {
                        let mut br = [0.0; 3];
                        let av = a.get(site, comp);
                        su2::bracket(
                            av.coeffs.as_slice().try_into().unwrap(),
                            f.coeffs.as_slice().try_into().unwrap(),
                            &mut br,
                        );
                        for alg in 0..3 {
                            out.data[(alg * 3 + comp) * sites + site] += br[alg];
                        }
                    }
                }
            }
            Ok(out)
        }
        FormDegree::One => {
            let mut out = Field::zero(a.grid, a.bc, FormDegree::Two, a.group)?;
            for alg in 0..a.alg_dim() {
                let img = calc.d[1].apply_vec(omega.alg_slice(alg));
                out.alg_slice_mut(alg).copy_from_slice(&img);
            }
            if a.group == GroupKind::Su2 {
                let br = bracket_cross(a, omega, FormDegree::Two)?;
                out.axpy(1.0, &br)?;
            }
            Ok(out)
        }
        FormDegree::Two => {
            // Dual components: the single output slot is
            // sum_m (D_m eta_m + [A_m, eta_m]).
            let mut out = Field::zero(a.grid, a.bc, FormDegree::Three, a.group)?;
            for alg in 0..a.alg_dim() {
                let img = calc.d[2].apply_vec(omega.alg_slice(alg));
                out.alg_slice_mut(alg).copy_from_slice(&img);
            }
            if a.group == GroupKind::Su2 {
                let sites = a.sites();
                for site in 0..sites {
                    let mut acc = [0.0f64; 3];
                    for comp in 0..3 {
                        let av = a.get(site, comp);
                        let ev = omega.get(site, comp);
                        let mut br = [0.0; 3];
                        su2::bracket(
                            av.coeffs.as_slice().try_into().unwrap(),
                            ev.coeffs.as_slice().try_into().unwrap(),
                            &mut br,
                        );
                        for alg in 0..3 {
                            acc[alg] += br[alg];
                        }
                    }
                    for alg in 0..3 {
                        out.data[alg * sites + site] += acc[alg];
                    }
                }
            }
            out.apply_mask();
            Ok(out)
        }
        _ => Err(Error::structural("covariant_d handles degrees 0, 1 and 2")),
    }
}

/// Covariant codifferential of a one- or two-form; the exact quadrature
/// adjoint of `covariant_d` at the same connection, restricted to the
/// subspace of fields honoring the boundary masks.  The raw weighted
/// transpose can leave stray values in slots the boundary conditions pin
/// to zero, so the result is projected back onto the masked class; the
/// pairing identity is unchanged there because the projector is
/// quadrature-orthogonal.
pub fn covariant_codiff(a: &Field, eta: &Field, calc: &Calculus) -> Result<Field> {
    a.grid.check_same(&eta.grid)?;
    if a.degree != FormDegree::One || a.group != eta.group || a.bc != eta.bc {
        return Err(Error::structural("covariant_codiff: mismatched inputs"));
    }
    match eta.degree {
        FormDegree::Two => {
            let mut out = Field::zero(a.grid, a.bc, FormDegree::One, a.group)?;
            for alg in 0..a.alg_dim() {
                let img = calc.codiff[1].apply_vec(eta.alg_slice(alg));
                out.alg_slice_mut(alg).copy_from_slice(&img);
            }
            if a.group == GroupKind::Su2 {
                let br = bracket_cross(a, eta, FormDegree::One)?;
                out.axpy(1.0, &br)?;
            }
            out.apply_mask();
            Ok(out)
        }
        FormDegree::One => {
            let mut out = Field::zero(a.grid, a.bc, FormDegree::Zero, a.group)?;
            for alg in 0..a.alg_dim() {
                let img = calc.codiff[0].apply_vec(eta.alg_slice(alg));
                out.alg_slice_mut(alg).copy_from_slice(&img);
            }
            if a.group == GroupKind::Su2 {
                let sites = a.sites();
                for site in 0..sites {
                    let mut acc = [0.0f64; 3];
                    for comp in 0..3 {
                        let av = a.get(site, comp);
                        let ev = eta.get(site, comp);
                        let mut br = [0.0; 3];
                        su2::bracket(
                            av.coeffs.as_slice().try_into().unwrap(),
                            ev.coeffs.as_slice().try_into().unwrap(),
                            &mut br,
                        );
                        for alg in 0..3 {
                            acc[alg] += br[alg];
                        }
                    }
                    for alg in 0..3 {
                        out.data[alg * sites + site] -= acc[alg];
                    }
                }
            }
            out.apply_mask();
            Ok(out)
        }
        _ => Err(Error::structural("covariant_codiff handles degrees 1 and 2")),
    }
}

/// Plain exterior derivative with the output projected onto the masked
/// class (the image of an in-class field already satisfies the masks, so
/// the projection only guards against out-of-class inputs).
pub fn d_plain(omega: &Field, calc: &Calculus) -> Result<Field> {
    omega.grid.check_same(&calc.grid)?;
    if omega.bc != calc.bc {
        return Err(Error::structural("d_plain: calculus has different bc"));
    }
    if omega.degree == FormDegree::Three {
        return Err(Error::structural("d_plain: no derivative above top degree"));
    }
    let out_degree = FormDegree::from_u8(omega.degree.as_u8() + 1)?;
    let mut out = Field::zero(omega.grid, omega.bc, out_degree, omega.group)?;
    for alg in 0..omega.alg_dim() {
        let img = calc.d[omega.degree.as_u8() as usize].apply_vec(omega.alg_slice(alg));
        out.alg_slice_mut(alg).copy_from_slice(&img);
    }
    out.apply_mask();
    Ok(out)
}

/// Plain codifferential, masked like `covariant_codiff`.
pub fn codiff_plain(eta: &Field, calc: &Calculus) -> Result<Field> {
    eta.grid.check_same(&calc.grid)?;
    if eta.bc != calc.bc {
        return Err(Error::structural("codiff_plain: calculus has different bc"));
    }
    if eta.degree == FormDegree::Zero {
        return Err(Error::structural("codiff_plain: no codifferential below degree 1"));
    }
    let out_degree = FormDegree::from_u8(eta.degree.as_u8() - 1)?;
    let mut out = Field::zero(eta.grid, eta.bc, out_degree, eta.group)?;
    for alg in 0..eta.alg_dim() {
        let img = calc.codiff[out_degree.as_u8() as usize].apply_vec(eta.alg_slice(alg));
        out.alg_slice_mut(alg).copy_from_slice(&img);
    }
    out.apply_mask();
    Ok(out)
}

/// Plain Sobolev norm `sqrt(|grad f|^2 + |f|^2)` with per-component
/// parity-closed difference stencils.
#[must_use]
pub fn w1_norm(f: &Field) -> f64 {
    (gradient_sq(f, None) + f.l2_norm_sq()).sqrt()
}

/// Covariant Sobolev norm `sqrt(|grad_A f|^2 + |f|^2)`; reduces exactly to
/// `w1_norm` at `A = 0` or for an abelian group.
pub fn w1a_norm(a: &Field, f: &Field) -> Result<f64> {
    a.grid.check_same(&f.grid)?;
    if a.degree != FormDegree::One || a.group != f.group || a.bc != f.bc {
        return Err(Error::structural("w1a_norm: mismatched inputs"));
    }
    Ok((gradient_sq(f, Some(a)) + f.l2_norm_sq()).sqrt())
}

fn gradient_sq(f: &Field, a: Option<&Field>) -> f64 {
    let grid = f.grid;
    let w = grid.quadrature_weights();
    let sites = grid.sites();
    let mut acc = 0.0;
    for axis in 0..3 {
        for comp in 0..f.comp_count() {
            let parity = match grid.domain {
                Domain::Torus => None,
                Domain::Box3 => component_parity(f.degree, f.bc, comp, axis),
            };
            let d = axis_diff_matrix(&grid, axis, parity);
            let mut grads: Vec<Vec<f64>> = (0..f.alg_dim())
                .map(|alg| d.apply_vec(f.comp_slice(alg, comp)))
                .collect();
            if let (Some(a), GroupKind::Su2) = (a, f.group) {
                for site in 0..sites {
                    let av = a.get(site, axis);
                    let fv = f.get(site, comp);
                    let mut br = [0.0; 3];
                    su2::bracket(
                        av.coeffs.as_slice().try_into().unwrap(),
                        fv.coeffs.as_slice().try_into().unwrap(),
                        &mut br,
                    );
                    for alg in 0..3 {
                        grads[alg][site] += br[alg];
                    }
                }
            }
            for alg_grad in &grads {
                for site in 0..sites {
                    acc += w[site] * alg_grad[site] * alg_grad[site];
                }
            }
        }
    }
    acc
}

/// Group-valued map on the grid, one element per site (site-major).
#[derive(Debug, Clone, PartialEq)]
pub struct GaugeField {
    pub grid: Grid,
    pub group: GroupKind,
    pub data: Vec<f64>,
}

impl GaugeField {
    #[must_use]
    pub fn identity(grid: Grid, group: GroupKind) -> GaugeField {
        let gc = group.group_comps();
        let mut data = vec![0.0; gc * grid.sites()];
        for site in 0..grid.sites() {
            data[site * gc] = 1.0;
        }
        GaugeField { grid, group, data }
    }

    pub fn from_fn<F>(grid: Grid, group: GroupKind, f: F) -> Result<GaugeField>
    where
        F: Fn([f64; 3]) -> GroupElement,
    {
        let mut out = GaugeField::identity(grid, group);
        for site in 0..grid.sites() {
            let g = f(grid.position(grid.site_coords(site)));
            if g.kind != group {
                return Err(Error::structural("from_fn closure returned wrong group"));
            }
            out.set(site, &g);
        }
        Ok(out)
    }

    /// Exponential of a sitewise random algebra element of size `scale`.
    pub fn random<R: Rng>(grid: Grid, group: GroupKind, scale: f64, rng: &mut R) -> GaugeField {
        let mut out = GaugeField::identity(grid, group);
        for site in 0..grid.sites() {
            let x = crate::lie::random_algebra(group, scale, rng);
            out.set(site, &crate::lie::expm(&x));
        }
        out
    }

    #[must_use]
    pub fn gcomp(&self) -> usize {
        self.group.group_comps()
    }

    #[must_use]
    pub fn get(&self, site: usize) -> GroupElement {
        let gc = self.gcomp();
        let mut data = [0.0f64; 4];
        data[..gc].copy_from_slice(&self.data[site * gc..site * gc + gc]);
        GroupElement {
            kind: self.group,
            data,
        }
    }

    pub fn set(&mut self, site: usize, g: &GroupElement) {
        debug_assert_eq!(g.kind, self.group);
        let gc = self.gcomp();
        self.data[site * gc..site * gc + gc].copy_from_slice(&g.data[..gc]);
    }

    /// Pointwise product `self * other`.
    pub fn compose(&self, other: &GaugeField) -> Result<GaugeField> {
        self.grid.check_same(&other.grid)?;
        if self.group != other.group {
            return Err(Error::structural("compose: mixed groups"));
        }
        let mut out = GaugeField::identity(self.grid, self.group);
        for site in 0..self.grid.sites() {
            let g = self.get(site).mul(&other.get(site))?;
            out.set(site, &g);
        }
        Ok(out)
    }

    #[must_use]
    pub fn inverse(&self) -> GaugeField {
        let mut out = GaugeField::identity(self.grid, self.group);
        for site in 0..self.grid.sites() {
            out.set(site, &self.get(site).inverse());
        }
        out
    }

    #[must_use]
    pub fn max_unitarity_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for site in 0..self.grid.sites() {
            worst = worst.max(self.get(site).unitarity_residual());
        }
        worst
    }

    /// Snap every site back onto the group; fails on a degenerate element.
    pub fn project(&mut self) -> Result<()> {
        for site in 0..self.grid.sites() {
            let g = crate::lie::project_to_group(&self.get(site))?;
            self.set(site, &g);
        }
        Ok(())
    }

    /// Quadrature `L^2` distance of the matrix difference.
    pub fn l2_distance(&self, other: &GaugeField) -> Result<f64> {
        self.grid.check_same(&other.grid)?;
        if self.group != other.group {
            return Err(Error::structural("l2_distance: mixed groups"));
        }
        let w = self.grid.quadrature_weights();
        let mut acc = 0.0;
        for site in 0..self.grid.sites() {
            let d = self.get(site).frobenius_distance(&other.get(site));
            acc += w[site] * d * d;
        }
        Ok(acc.sqrt())
    }
}

/// Maurer-Cartan form `g^-1 dg` projected to the algebra, component by
/// component.  Centered differences inside; second order one-sided stencils
/// on box faces; wrap-around on the torus.
pub fn pure_gauge(g: &GaugeField, bc: Bc) -> Result<Field> {
    g.grid.check_bc(bc)?;
    let grid = g.grid;
    let mut out = Field::zero(grid, bc, FormDegree::One, g.group)?;
    let gc = g.gcomp();
    let inv2h = 1.0 / (2.0 * grid.h);
    let sites = grid.sites();
    for axis in 0..3 {
        let n = grid.dims[axis];
        grid.for_each_line(axis, |base, stride| {
            for l in 0..n {
                let site = base + l * stride;
                // Difference of raw group coordinates along the line.
                let mut delta = [0.0f64; 4];
                let mut stencil = |node: usize, wgt: f64| {
                    let src = base + node * stride;
                    for c in 0..gc {
                        delta[c] += wgt * g.data[src * gc + c];
                    }
                };
                match grid.domain {
                    Domain::Torus => {
                        stencil((l + 1) % n, inv2h);
                        stencil((l + n - 1) % n, -inv2h);
                    }
                    Domain::Box3 => {
                        if l == 0 {
                            stencil(0, -3.0 * inv2h);
                            stencil(1, 4.0 * inv2h);
                            stencil(2, -inv2h);
                        } else if l == n - 1 {
                            stencil(n - 1, 3.0 * inv2h);
                            stencil(n - 2, -4.0 * inv2h);
                            stencil(n - 3, inv2h);
                        } else {
                            stencil(l + 1, inv2h);
                            stencil(l - 1, -inv2h);
                        }
                    }
                }
                let gd = &g.data[site * gc..site * gc + gc];
                match g.group {
                    GroupKind::U1 => {
                        // Im(conj(g) * delta)
                        let p = gd[0] * delta[1] - gd[1] * delta[0];
                        out.data[axis * sites + site] = p;
                    }
                    GroupKind::Su2 => {
                        let q = [gd[0], gd[1], gd[2], gd[3]];
                        let prod = su2::mul(su2::conj(q), delta);
                        let mut coeffs = [0.0; 3];
                        su2::project_algebra(prod, &mut coeffs);
                        for alg in 0..3 {
                            out.data[(alg * 3 + axis) * sites + site] = coeffs[alg];
                        }
                    }
                }
            }
        });
    }
    Ok(out)
}

/// Gauge transform `A^g = g^-1 dg + Ad_{g^-1} A`, projected back onto the
/// masked class.  For a class-compatible gauge the discarded boundary slots
/// hold only truncation error, and keeping them would let the recovered
/// connection drift out of the state space the flows evolve in.
pub fn gauge_transform(a: &Field, g: &GaugeField) -> Result<Field> {
    a.grid.check_same(&g.grid)?;
    if a.degree != FormDegree::One || a.group != g.group {
        return Err(Error::structural("gauge_transform expects a matching one-form"));
    }
    let mut out = pure_gauge(g, a.bc)?;
    for site in 0..a.sites() {
        let ge = g.get(site);
        for comp in 0..3 {
            let ad = adjoint_action(&ge, &a.get(site, comp))?;
            let sites = a.sites();
            for alg in 0..a.alg_dim() {
                out.data[(alg * 3 + comp) * sites + site] += ad.coeffs[alg];
            }
        }
    }
    out.apply_mask();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Parity;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn torus(n: usize) -> Grid {
        Grid::new([n, n, n], 0.25, Domain::Torus).unwrap()
    }

    fn boxgrid(n: usize) -> Grid {
        Grid::new([n, n, n], 1.0 / (n as f64 - 1.0), Domain::Box3).unwrap()
    }

    #[test]
    fn slices_and_get_set_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut f = Field::random(
            torus(4),
            Bc::Periodic,
            FormDegree::One,
            GroupKind::Su2,
            1.0,
            &mut rng,
        )
        .unwrap();
        let v = f.get(7, 2);
        assert_eq!(v.coeffs[1], f.comp_slice(1, 2)[7]);
        let mut w = v.clone();
        w.coeffs[0] = 9.5;
        f.set(7, 2, &w);
        assert_eq!(f.comp_slice(0, 2)[7], 9.5);
    }

    #[test]
    fn mask_pins_odd_components() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let grid = boxgrid(5);
        let mut f = Field::zero(grid, Bc::Neumann, FormDegree::One, GroupKind::U1).unwrap();
        for v in f.data.iter_mut() {
            *v = rng.gen_range(0.5..1.0);
        }
        assert!(f.mask_violation() > 0.0);
        f.apply_mask();
        assert_eq!(f.mask_violation(), 0.0);
        // Component 0 must vanish on the x faces and nowhere else.
        let n = grid.dims[0];
        for site in 0..grid.sites() {
            let c = grid.site_coords(site);
            let v = f.comp_slice(0, 0)[site];
            if c[0] == 0 || c[0] == n - 1 {
                assert_eq!(v, 0.0);
            } else {
                assert!(v != 0.0);
            }
        }
    }

    #[test]
    fn l2_matches_dot() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = Field::random(
            boxgrid(5),
            Bc::Dirichlet,
            FormDegree::Two,
            GroupKind::Su2,
            0.7,
            &mut rng,
        )
        .unwrap();
        let a = f.l2_norm_sq();
        let b = f.dot(&f).unwrap();
        assert!((a - b).abs() <= 1e-12 * a.max(1.0));
    }

    #[test]
    fn constant_field_norms() {
        // |c| over the unit box: L2 = |c|, L6 = |c|, Linf = |c|.
        let grid = boxgrid(6);
        let f = Field::from_fn(grid, Bc::Neumann, FormDegree::Zero, GroupKind::U1, |_, _| {
            AlgebraElement::from_coeffs(GroupKind::U1, &[3.0]).unwrap()
        })
        .unwrap();
        assert!((f.l2_norm() - 3.0).abs() <= 1e-12);
        assert!((f.lp_norm(6) - 3.0).abs() <= 1e-12);
        assert!((f.linf_norm() - 3.0).abs() <= 1e-12);
        assert!((w1_norm(&f) - 3.0).abs() <= 1e-12);
    }

    #[test]
    fn bracket_cross_matches_pointwise_definition() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let grid = torus(4);
        let x = Field::random(grid, Bc::Periodic, FormDegree::One, GroupKind::Su2, 1.0, &mut rng)
            .unwrap();
        let y = Field::random(grid, Bc::Periodic, FormDegree::Two, GroupKind::Su2, 1.0, &mut rng)
            .unwrap();
        let z = bracket_cross(&x, &y, FormDegree::One).unwrap();
        for site in [0usize, 17, 63] {
            for m in 0..3 {
                let j = (m + 1) % 3;
                let k = (m + 2) % 3;
                let want = crate::lie::bracket(&x.get(site, j), &y.get(site, k))
                    .unwrap()
                    .coeffs
                    .iter()
                    .zip(
                        crate::lie::bracket(&x.get(site, k), &y.get(site, j))
                            .unwrap()
                            .coeffs
                            .iter(),
                    )
                    .map(|(a, b)| a - b)
                    .collect::<Vec<_>>();
                let got = z.get(site, m);
                for (a, b) in got.coeffs.iter().zip(want.iter()) {
                    assert!((a - b).abs() <= 1e-13);
                }
            }
        }
    }

    #[test]
    fn covariant_pairs_are_adjoint() {
        // <d_A w, e> == <w, d*_A e> to machine precision, all degrees, both
        // box conditions and the torus.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let cases = [
            (torus(4), Bc::Periodic),
            (boxgrid(5), Bc::Neumann),
            (boxgrid(5), Bc::Dirichlet),
        ];
        for (grid, bc) in cases {
            let calc = Calculus::new(grid, bc).unwrap();
            for group in [GroupKind::U1, GroupKind::Su2] {
                let a =
                    Field::random(grid, bc, FormDegree::One, group, 0.8, &mut rng).unwrap();
                for low in [FormDegree::Zero, FormDegree::One] {
                    let high = FormDegree::from_u8(low.as_u8() + 1).unwrap();
                    let w = Field::random(grid, bc, low, group, 1.0, &mut rng).unwrap();
                    let e = Field::random(grid, bc, high, group, 1.0, &mut rng).unwrap();
                    let dw = covariant_d(&a, &w, &calc).unwrap();
                    let de = covariant_codiff(&a, &e, &calc).unwrap();
                    let lhs = dw.dot(&e).unwrap();
                    let rhs = w.dot(&de).unwrap();
                    let scale = lhs.abs().max(rhs.abs()).max(1.0);
                    assert!(
                        (lhs - rhs).abs() <= 1e-12 * scale,
                        "{bc:?} {group:?} {low:?}: {lhs} vs {rhs}"
                    );
                }
            }
        }
    }

    #[test]
    fn curvature_of_constant_commuting_connection_vanishes() {
        let grid = torus(5);
        let a = Field::from_fn(grid, Bc::Periodic, FormDegree::One, GroupKind::Su2, |_, _| {
            AlgebraElement::from_coeffs(GroupKind::Su2, &[0.3, 0.0, 0.0]).unwrap()
        })
        .unwrap();
        let calc = Calculus::new(grid, Bc::Periodic).unwrap();
        let b = curvature(&a, &calc).unwrap();
        assert!(b.max_abs() <= 1e-13);
    }

    #[test]
    fn curvature_constant_noncommuting_connection() {
        // A_1 = e1, A_2 = e2 constant: B_3(dual comp 2) = [e1, e2] = e3.
        let grid = torus(5);
        let a = Field::from_fn(grid, Bc::Periodic, FormDegree::One, GroupKind::Su2, |_, c| {
            let mut v = AlgebraElement::zero(GroupKind::Su2);
            if c < 2 {
                v.coeffs[c] = 1.0;
            }
            v
        })
        .unwrap();
        let calc = Calculus::new(grid, Bc::Periodic).unwrap();
        let b = curvature(&a, &calc).unwrap();
        for site in 0..grid.sites() {
            let dual = b.get(site, 2);
            assert!((dual.coeffs[2] - 1.0).abs() <= 1e-13, "{dual:?}");
            assert!(dual.coeffs[0].abs() <= 1e-13);
            let o1 = b.get(site, 0);
            let o2 = b.get(site, 1);
            assert!(o1.norm() <= 1e-13 && o2.norm() <= 1e-13);
        }
    }

    #[test]
    fn bracket_terms_preserve_parity_masks() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let grid = boxgrid(6);
        for bc in [Bc::Neumann, Bc::Dirichlet] {
            let calc = Calculus::new(grid, bc).unwrap();
            let a = Field::random(grid, bc, FormDegree::One, GroupKind::Su2, 1.0, &mut rng)
                .unwrap();
            let b = curvature(&a, &calc).unwrap();
            assert_eq!(b.mask_violation(), 0.0, "{bc:?}");
            let r = covariant_codiff(&a, &b, &calc).unwrap();
            assert_eq!(r.mask_violation(), 0.0, "{bc:?}");
        }
    }

    #[test]
    fn w1a_reduces_to_w1() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let grid = boxgrid(5);
        let zero = Field::zero(grid, Bc::Neumann, FormDegree::One, GroupKind::Su2).unwrap();
        let f = Field::random(grid, Bc::Neumann, FormDegree::One, GroupKind::Su2, 1.0, &mut rng)
            .unwrap();
        let a = w1a_norm(&zero, &f).unwrap();
        let b = w1_norm(&f);
        assert_eq!(a, b);
        // U(1) brackets vanish, so any abelian connection gives W1 too.
        let g = Field::random(grid, Bc::Neumann, FormDegree::One, GroupKind::U1, 1.0, &mut rng)
            .unwrap();
        let au = Field::random(grid, Bc::Neumann, FormDegree::One, GroupKind::U1, 2.0, &mut rng)
            .unwrap();
        assert_eq!(w1a_norm(&au, &g).unwrap(), w1_norm(&g));
    }

    #[test]
    fn pure_gauge_constant_is_zero() {
        let grid = boxgrid(5);
        let x = crate::lie::AlgebraElement::from_coeffs(GroupKind::Su2, &[0.4, -0.2, 0.9]).unwrap();
        let g = GaugeField::from_fn(grid, GroupKind::Su2, |_| crate::lie::expm(&x)).unwrap();
        let p = pure_gauge(&g, Bc::Neumann).unwrap();
        assert!(p.max_abs() <= 1e-13);
    }

    #[test]
    fn pure_gauge_linear_u1_phase() {
        // g = exp(i k x) on the torus circle: g^-1 dg = i k, exactly once
        // the phase advance per step is resolved by the centered stencil.
        let n = 8;
        let h = 0.25;
        let grid = Grid::new([n, n, n], h, Domain::Torus).unwrap();
        let k = 2.0 * std::f64::consts::PI / (n as f64 * h);
        let g = GaugeField::from_fn(grid, GroupKind::U1, |p| {
            let th = k * p[0];
            GroupElement {
                kind: GroupKind::U1,
                data: [th.cos(), th.sin(), 0.0, 0.0],
            }
        })
        .unwrap();
        let p = pure_gauge(&g, Bc::Periodic).unwrap();
        // centered difference of a pure phase resolves k as sin(kh)/h
        let want = (k * h).sin() / h;
        for site in 0..grid.sites() {
            let v = p.get(site, 0);
            assert!((v.coeffs[0] - want).abs() <= 1e-12, "{v:?}");
            assert!(p.get(site, 1).norm() <= 1e-13);
            assert!(p.get(site, 2).norm() <= 1e-13);
        }
    }

    #[test]
    fn gauge_transform_constant_cocycle_exact() {
        // For constant g the transform is pointwise conjugation, and
        // (A^g)^h = A^(gh) holds to rounding.
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let grid = torus(4);
        let a = Field::random(grid, Bc::Periodic, FormDegree::One, GroupKind::Su2, 1.0, &mut rng)
            .unwrap();
        let gx = crate::lie::expm(&crate::lie::random_algebra(GroupKind::Su2, 1.0, &mut rng));
        let hx = crate::lie::expm(&crate::lie::random_algebra(GroupKind::Su2, 1.0, &mut rng));
        let g = GaugeField::from_fn(grid, GroupKind::Su2, |_| gx.clone()).unwrap();
        let h = GaugeField::from_fn(grid, GroupKind::Su2, |_| hx.clone()).unwrap();
        let gh = g.compose(&h).unwrap();
        let lhs = gauge_transform(&gauge_transform(&a, &g).unwrap(), &h).unwrap();
        let rhs = gauge_transform(&a, &gh).unwrap();
        let diff = lhs.sub(&rhs).unwrap();
        assert!(diff.max_abs() <= 1e-13, "{}", diff.max_abs());
        // and the transform preserves the pointwise norm (Ad is isometric)
        let na = a.l2_norm();
        let ng = gauge_transform(&a, &g).unwrap().l2_norm();
        assert!((na - ng).abs() <= 1e-12 * na);
    }

    #[test]
    fn gauge_field_compose_project_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let grid = torus(4);
        let g = GaugeField::random(grid, GroupKind::Su2, 0.8, &mut rng);
        let gi = g.inverse();
        let id = g.compose(&gi).unwrap();
        assert!(id.l2_distance(&GaugeField::identity(grid, GroupKind::Su2)).unwrap() <= 1e-12);
        let mut drifted = g.clone();
        for v in drifted.data.iter_mut() {
            *v *= 1.0 + 1e-3;
        }
        assert!(drifted.max_unitarity_residual() > 1e-4);
        drifted.project().unwrap();
        assert!(drifted.max_unitarity_residual() <= 1e-12);
        assert!(drifted.l2_distance(&g).unwrap() <= 1e-12);
    }

    #[test]
    fn sample_at_reproduces_nodes_and_midpoints() {
        let grid = boxgrid(5);
        // f(x) = 2 x0 - x2 is reproduced exactly by trilinear interpolation
        let f = Field::from_fn(grid, Bc::Neumann, FormDegree::Zero, GroupKind::U1, |p, _| {
            AlgebraElement::from_coeffs(GroupKind::U1, &[2.0 * p[0] - p[2]]).unwrap()
        })
        .unwrap();
        for probe in [
            [0.0, 0.0, 0.0],
            [1.0, 1.0, 1.0],
            [0.125, 0.6, 0.99],
            [0.5, 0.25, 0.75],
        ] {
            let got = f.sample_at(probe, 0).coeffs[0];
            let want = 2.0 * probe[0] - probe[2];
            assert!((got - want).abs() <= 1e-13, "{probe:?}: {got} vs {want}");
        }
    }

    #[test]
    fn sample_at_wraps_on_torus() {
        let grid = torus(4);
        let f = Field::from_fn(grid, Bc::Periodic, FormDegree::Zero, GroupKind::U1, |p, _| {
            AlgebraElement::from_coeffs(GroupKind::U1, &[p[1]]).unwrap()
        })
        .unwrap();
        let l = grid.length(1);
        let inside = f.sample_at([0.1, 0.3, 0.2], 0).coeffs[0];
        let wrapped = f.sample_at([0.1, 0.3 + l, 0.2], 0).coeffs[0];
        let negative = f.sample_at([0.1, 0.3 - l, 0.2], 0).coeffs[0];
        assert!((inside - wrapped).abs() <= 1e-13);
        assert!((inside - negative).abs() <= 1e-13);
    }

    #[test]
    fn parity_helper_consistency() {
        // gradient_sq uses the same parity table as the calculus assembly;
        // spot-check the mapping here so a table edit cannot silently skew
        // the Sobolev norms.
        assert_eq!(
            component_parity(FormDegree::One, Bc::Neumann, 0, 0),
            Some(Parity::Odd)
        );
        assert_eq!(
            component_parity(FormDegree::One, Bc::Dirichlet, 0, 0),
            Some(Parity::Even)
        );
    }
}
