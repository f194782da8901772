//! Grids, boundary condition families and reflection parities.
//!
//! Fields are stored on collocated nodes, `site = i + n0*(j + n1*k)`.
//! A box with `n` nodes per axis spans `[0, (n-1) h]` including both
//! boundary layers; a torus with `n` nodes spans `[0, n h)`.
//!
//! On a box every form component carries a reflection parity along every
//! axis, which fixes both the ghost-node closure of centered stencils and
//! the zero mask on boundary nodes:
//!
//! * Neumann family (normal part of the form vanishes): a 1-form component
//!   is odd along its own axis, even along the others; 0-forms are even
//!   everywhere; 2-form dual components transpose the 1-form table;
//!   3-forms are odd everywhere.
//! * Dirichlet family (tangential part vanishes): the transposed
//!   assignment throughout.
//!
//! Centered differences map each parity class into the correct image class,
//! so the flows preserve their boundary conditions without penalty terms.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Domain {
    Box3,
    Torus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Bc {
    Neumann,
    Dirichlet,
    Periodic,
}

impl Bc {
    #[must_use]
    pub fn name(self) -> &'static str {
        match self {
            Bc::Neumann => "neumann",
            Bc::Dirichlet => "dirichlet",
            Bc::Periodic => "periodic",
        }
    }

    pub fn from_name(s: &str) -> Result<Self> {
        match s {
            "neumann" => Ok(Bc::Neumann),
            "dirichlet" => Ok(Bc::Dirichlet),
            "periodic" => Ok(Bc::Periodic),
            other => Err(Error::invalid(format!("unknown bc '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FormDegree {
    Zero,
    One,
    Two,
    Three,
}

impl FormDegree {
    /// Independent components: 2-forms are stored through their dual index,
    /// components (23), (31), (12).
    #[must_use]
    pub fn comp_count(self) -> usize {
        match self {
            FormDegree::Zero | FormDegree::Three => 1,
            FormDegree::One | FormDegree::Two => 3,
        }
    }

    #[must_use]
    pub fn as_u8(self) -> u8 {
        match self {
            FormDegree::Zero => 0,
            FormDegree::One => 1,
            FormDegree::Two => 2,
            FormDegree::Three => 3,
        }
    }

    pub fn from_u8(v: u8) -> Result<Self> {
        match v {
            0 => Ok(FormDegree::Zero),
            1 => Ok(FormDegree::One),
            2 => Ok(FormDegree::Two),
            3 => Ok(FormDegree::Three),
            other => Err(Error::invalid(format!("bad form degree {other}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub dims: [usize; 3],
    pub h: f64,
    pub domain: Domain,
}

impl Grid {
    pub fn new(dims: [usize; 3], h: f64, domain: Domain) -> Result<Self> {
        if dims.iter().any(|n| *n < 4) {
            return Err(Error::invalid(format!(
                "grid dims {dims:?}: every axis needs at least 4 nodes"
            )));
        }
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::invalid(format!("grid spacing h = {h} must be positive")));
        }
        Ok(Grid { dims, h, domain })
    }

    #[must_use]
    pub fn sites(&self) -> usize {
        self.dims[0] * self.dims[1] * self.dims[2]
    }

    #[inline]
    #[must_use]
    pub fn site(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.dims[0] * (j + self.dims[1] * k)
    }

    #[inline]
    #[must_use]
    pub fn site_coords(&self, s: usize) -> [usize; 3] {
        let i = s % self.dims[0];
        let r = s / self.dims[0];
        [i, r % self.dims[1], r / self.dims[1]]
    }

    /// Physical extent along `axis`.
    #[must_use]
    pub fn length(&self, axis: usize) -> f64 {
        match self.domain {
            Domain::Box3 => (self.dims[axis] - 1) as f64 * self.h,
            Domain::Torus => self.dims[axis] as f64 * self.h,
        }
    }

    #[must_use]
    pub fn position(&self, idx: [usize; 3]) -> [f64; 3] {
        [
            idx[0] as f64 * self.h,
            idx[1] as f64 * self.h,
            idx[2] as f64 * self.h,
        ]
    }

    /// Memory stride of a unit step along `axis`.
    #[inline]
    #[must_use]
    pub fn stride(&self, axis: usize) -> usize {
        match axis {
            0 => 1,
            1 => self.dims[0],
            _ => self.dims[0] * self.dims[1],
        }
    }

    pub fn check_bc(&self, bc: Bc) -> Result<()> {
        match (self.domain, bc) {
            (Domain::Torus, Bc::Periodic) => Ok(()),
            (Domain::Box3, Bc::Neumann) | (Domain::Box3, Bc::Dirichlet) => Ok(()),
            (d, b) => Err(Error::invalid(format!(
                "bc '{}' is not available on domain {:?}",
                b.name(),
                d
            ))),
        }
    }

    pub fn check_same(&self, other: &Grid) -> Result<()> {
        if self != other {
            return Err(Error::structural("grids differ"));
        }
        Ok(())
    }

    /// Trapezoidal quadrature weight of a node (without the `h^3` factor):
    /// product over axes of 1/2 at box boundary layers, 1 elsewhere.
    #[must_use]
    pub fn node_weight(&self, idx: [usize; 3]) -> f64 {
        match self.domain {
            Domain::Torus => 1.0,
            Domain::Box3 => {
                let mut w = 1.0;
                for a in 0..3 {
                    if idx[a] == 0 || idx[a] == self.dims[a] - 1 {
                        w *= 0.5;
                    }
                }
                w
            }
        }
    }

    /// Per-site quadrature weights including the `h^3` volume factor.
    #[must_use]
    pub fn quadrature_weights(&self) -> Vec<f64> {
        let vol = self.h * self.h * self.h;
        let mut w = vec![0.0; self.sites()];
        for s in 0..self.sites() {
            w[s] = vol * self.node_weight(self.site_coords(s));
        }
        w
    }

    /// Visit every 1D line along `axis` as `(base_site, stride)`.
    pub fn for_each_line(&self, axis: usize, mut f: impl FnMut(usize, usize)) {
        let stride = self.stride(axis);
        let n = self.dims[axis];
        let (oa, ob) = match axis {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        };
        for b in 0..self.dims[ob] {
            for a in 0..self.dims[oa] {
                let mut idx = [0usize; 3];
                idx[oa] = a;
                idx[ob] = b;
                let base = self.site(idx[0], idx[1], idx[2]);
                debug_assert!(base + (n - 1) * stride < self.sites());
                f(base, stride);
            }
        }
    }
}

/// Reflection parity of component `comp` of a `degree`-form along `axis`;
/// `None` on periodic axes.
#[must_use]
pub fn component_parity(degree: FormDegree, bc: Bc, comp: usize, axis: usize) -> Option<Parity> {
    let own = comp == axis;
    match bc {
        Bc::Periodic => None,
        Bc::Neumann => Some(match degree {
            FormDegree::Zero => Parity::Even,
            FormDegree::One => {
                if own {
                    Parity::Odd
                } else {
                    Parity::Even
                }
            }
            FormDegree::Two => {
                if own {
                    Parity::Even
                } else {
                    Parity::Odd
                }
            }
            FormDegree::Three => Parity::Odd,
        }),
        Bc::Dirichlet => Some(match degree {
            FormDegree::Zero => Parity::Odd,
            FormDegree::One => {
                if own {
                    Parity::Even
                } else {
                    Parity::Odd
                }
            }
            FormDegree::Two => {
                if own {
                    Parity::Odd
                } else {
                    Parity::Even
                }
            }
            FormDegree::Three => Parity::Even,
        }),
    }
}

/// Axes along which `comp` must vanish on the boundary layers.
#[must_use]
pub fn masked_axes(degree: FormDegree, bc: Bc, comp: usize) -> [bool; 3] {
    let mut m = [false; 3];
    for (axis, slot) in m.iter_mut().enumerate() {
        *slot = component_parity(degree, bc, comp, axis) == Some(Parity::Odd);
    }
    m
}
