//! Linearized flow along a frozen base trajectory: the tangent right-hand
//! side, time integration over an interpolated background, and the
//! vertical solutions generated by infinitesimal gauge directions.

use crate::dec::Calculus;
use crate::error::{Error, Result};
use crate::fields::{bracket_cross, covariant_codiff, covariant_d, curvature, Field};
use crate::flow::ym_rhs;
use crate::grid::FormDegree;
use crate::lie::{su2, GroupKind};

/// Tangent vectors are stored exactly like connections and carry the same
/// boundary masks as the base trajectory.
pub type TangentField = Field;

/// Right-hand side of the linearized flow at a frozen background: the
/// derivative of `-d*_A B_A` in the direction `v`,
///
/// ```text
///     v' = -( d*_A d_A v + [v -| B] ),
/// ```
///
/// where the contraction shares its kernel with the wedge bracket.
pub fn variational_rhs(v: &Field, a: &Field, b: &Field, calc: &Calculus) -> Result<Field> {
    if v.degree != FormDegree::One || b.degree != FormDegree::Two {
        return Err(Error::structural("variational rhs expects (one, one, two)-forms"));
    }
    v.check_compatible(a)?;
    let dv = covariant_d(a, v, calc)?;
    let mut out = covariant_codiff(a, &dv, calc)?;
    let contraction = bracket_cross(v, b, FormDegree::One)?;
    out.axpy(1.0, &contraction)?;
    out.scale_in_place(-1.0);
    Ok(out)
}

/// Scalar history and final tangent of one linearized integration.
#[derive(Debug, Clone)]
pub struct VariationalRecord {
    /// `(t, <v, v>)` at every accepted step plus the final time.
    pub norm_sq: Vec<(f64, f64)>,
    pub final_tangent: TangentField,
    pub steps: u64,
}

/// Piecewise-linear background lookup over `(t, A)` stamps, with the
/// curvature interpolated the same way from per-stamp values.
struct Background<'a> {
    base: &'a [(f64, Field)],
    curvatures: Vec<Field>,
}

impl<'a> Background<'a> {
    fn new(base: &'a [(f64, Field)], calc: &Calculus) -> Result<Background<'a>> {
        if base.len() < 2 {
            return Err(Error::invalid("background needs at least two stamps"));
        }
        for w in base.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(Error::invalid("background stamps must increase in time"));
            }
        }
        let curvatures = base
            .iter()
            .map(|(_, a)| curvature(a, calc))
            .collect::<Result<Vec<_>>>()?;
        Ok(Background { base, curvatures })
    }

    fn t0(&self) -> f64 {
        self.base[0].0
    }

    fn t1(&self) -> f64 {
        self.base[self.base.len() - 1].0
    }

    /// `(A(t), B(t))` by linear interpolation; `t` is clamped to the
    /// stored range to absorb roundoff at the ends.
    fn at(&self, t: f64) -> Result<(Field, Field)> {
        let seg = match self.base.iter().rposition(|(s, _)| *s <= t) {
            None => 0,
            Some(j) if j + 1 == self.base.len() => j - 1,
            Some(j) => j,
        };
        let (ta, fa) = &self.base[seg];
        let (tb, fb) = &self.base[seg + 1];
        let w = ((t - ta) / (tb - ta)).clamp(0.0, 1.0);
        let mut a = fa.clone();
        a.scale_in_place(1.0 - w);
        a.axpy(w, fb)?;
        let mut b = self.curvatures[seg].clone();
        b.scale_in_place(1.0 - w);
        b.axpy(w, &self.curvatures[seg + 1])?;
        Ok((a, b))
    }
}

/// March the tangent across the stored background with RK4, sampling the
/// interpolated `(A, B)` at the stage times.  `dt` must respect the
/// parabolic step bound `dt <= h^2 / 4`.
pub fn integrate_variational(
    v0: &TangentField,
    base: &[(f64, Field)],
    dt: f64,
    calc: &Calculus,
) -> Result<VariationalRecord> {
    if v0.degree != FormDegree::One {
        return Err(Error::structural("tangent must be a one-form"));
    }
    let h = calc.grid.h;
    if !(dt.is_finite() && dt > 0.0 && dt <= 0.25 * h * h) {
        return Err(Error::invalid(format!(
            "tangent step {dt} violates the parabolic bound {}",
            0.25 * h * h
        )));
    }
    let bg = Background::new(base, calc)?;
    v0.check_compatible(&base[0].1)?;
    let mut v = v0.clone();
    let mut t = bg.t0();
    let t_end = bg.t1();
    let tiny = 1e-12 * (1.0 + t_end.abs());
    let mut record = VariationalRecord {
        norm_sq: Vec::new(),
        final_tangent: v.clone(),
        steps: 0,
    };
    loop {
        record.norm_sq.push((t, v.l2_norm_sq()));
        if t + tiny >= t_end {
            break;
        }
        let step = dt.min(t_end - t);
        let stage = |vv: &Field, s: f64| -> Result<Field> {
            let (a, b) = bg.at(s)?;
            variational_rhs(vv, &a, &b, calc)
        };
        let k1 = stage(&v, t)?;
        let mut y = v.clone();
        y.axpy(0.5 * step, &k1)?;
        let k2 = stage(&y, t + 0.5 * step)?;
        let mut y = v.clone();
        y.axpy(0.5 * step, &k2)?;
        let k3 = stage(&y, t + 0.5 * step)?;
        let mut y = v.clone();
        y.axpy(step, &k3)?;
        let k4 = stage(&y, t + step)?;
        v.axpy(step / 6.0, &k1)?;
        v.axpy(step / 3.0, &k2)?;
        v.axpy(step / 3.0, &k3)?;
        v.axpy(step / 6.0, &k4)?;
        record.steps += 1;
        t = if t + step + tiny >= t_end { t_end } else { t + step };
    }
    record.final_tangent = v;
    Ok(record)
}

/// Pointwise bracket of a one-form against a zero-form, `out_i = [x_i, s]`.
fn bracket_with_scalar(x: &Field, s: &Field) -> Result<Field> {
    if x.degree != FormDegree::One || s.degree != FormDegree::Zero {
        return Err(Error::structural("bracket_with_scalar expects (one, zero)-forms"));
    }
    x.grid.check_same(&s.grid)?;
    let mut out = Field::zero(x.grid, x.bc, FormDegree::One, x.group)?;
    if x.group == GroupKind::U1 {
        return Ok(out);
    }
    let sites = x.sites();
    for site in 0..sites {
        let mut sv = [0.0f64; 3];
        for alg in 0..3 {
            sv[alg] = s.data[alg * sites + site];
        }
        for comp in 0..3 {
            let mut xv = [0.0f64; 3];
            for alg in 0..3 {
                xv[alg] = x.data[(alg * 3 + comp) * sites + site];
            }
            let mut br = [0.0f64; 3];
            su2::bracket(&xv, &sv, &mut br);
            for alg in 0..3 {
                out.data[(alg * 3 + comp) * sites + site] = br[alg];
            }
        }
    }
    out.apply_mask();
    Ok(out)
}

/// Vertical family `v(t) = d_{A(t)} alpha` evaluated on the stamps of a
/// base trajectory, with the residual of the linearized equation along it.
#[derive(Debug, Clone)]
pub struct VerticalRecord {
    pub times: Vec<f64>,
    pub tangents: Vec<TangentField>,
    /// `(t, |v' - rhs(v)|_2)` with the exact time derivative
    /// `v'_i = [A'_i, alpha]`, `A' = -d*_A B`.
    pub residuals: Vec<(f64, f64)>,
}

pub fn vertical_solution(
    alpha: &Field,
    base: &[(f64, Field)],
    calc: &Calculus,
) -> Result<VerticalRecord> {
    if alpha.degree != FormDegree::Zero {
        return Err(Error::structural("vertical direction must be a zero-form"));
    }
    if base.is_empty() {
        return Err(Error::invalid("vertical solution needs at least one stamp"));
    }
    let mut times = Vec::with_capacity(base.len());
    let mut tangents = Vec::with_capacity(base.len());
    let mut residuals = Vec::with_capacity(base.len());
    for (t, a) in base {
        alpha.grid.check_same(&a.grid)?;
        if alpha.bc != a.bc || alpha.group != a.group {
            return Err(Error::structural("vertical direction incompatible with base"));
        }
        let v = covariant_d(a, alpha, calc)?;
        let aprime = ym_rhs(a, calc)?;
        let b = curvature(a, calc)?;
        let vprime = bracket_with_scalar(&aprime, alpha)?;
        let rhs = variational_rhs(&v, a, &b, calc)?;
        let res = vprime.sub(&rhs)?.l2_norm();
        times.push(*t);
        tangents.push(v);
        residuals.push((*t, res));
    }
    Ok(VerticalRecord {
        times,
        tangents,
        residuals,
    })
}
