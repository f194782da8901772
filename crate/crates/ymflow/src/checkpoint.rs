//! Versioned binary checkpoints.  A file embeds the canonical config text
//! with its hash, the structural header, and exact little-endian float
//! payloads, so a resumed run continues bit-for-bit.
//!
//! Layout (integers little-endian):
//!   magic b"YMFC", u32 version,
//!   u64 config hash, u32 config byte length, config text,
//!   u8 field kind (0 connection, 1 smoothed, 2 tangent),
//!   u8 domain (0 box, 1 torus), u8 bc (0 periodic, 1 neumann, 2 dirichlet),
//!   u8 group id (0 u1, 1 su2), u8 matrix dim, u8 algebra dim,
//!   u8 form degree, u8 reserved,
//!   u64 dims[3], f64 h, f64 t, u64 steps,
//!   f64 field payload, site-major with components per site and algebra
//!   coordinates innermost,
//!   then for smoothed states the gauge payload, site-major.

use std::path::Path;

use crate::config::fnv1a;
use crate::error::{Error, Result};
use crate::fields::{Field, GaugeField};
use crate::flow::{FlowMode, FlowState};
use crate::grid::{Bc, Domain, FormDegree, Grid};
use crate::lie::GroupKind;

pub const MAGIC: [u8; 4] = *b"YMFC";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldKind {
    /// A direct-flow connection.
    Connection,
    /// A smoothed field; the gauge map rides along.
    Smoothed,
    /// A variational tangent; carries no flow semantics.
    Tangent,
}

impl FieldKind {
    fn as_u8(self) -> u8 {
        match self {
            FieldKind::Connection => 0,
            FieldKind::Smoothed => 1,
            FieldKind::Tangent => 2,
        }
    }

    fn from_u8(v: u8) -> Result<FieldKind> {
        match v {
            0 => Ok(FieldKind::Connection),
            1 => Ok(FieldKind::Smoothed),
            2 => Ok(FieldKind::Tangent),
            other => Err(Error::Checkpoint(format!("bad field kind {other}"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Checkpoint {
    pub config_text: String,
    pub config_hash: u64,
    pub kind: FieldKind,
    pub t: f64,
    pub steps: u64,
    pub field: Field,
    pub gauge: Option<GaugeField>,
}

impl Checkpoint {
    /// Snapshot a flow state under the run's canonical config text.
    pub fn of_state(config_text: &str, state: &FlowState) -> Result<Checkpoint> {
        let (kind, gauge) = match state.mode {
            FlowMode::Direct => (FieldKind::Connection, None),
            FlowMode::Smoothing => {
                let g = state
                    .gauge
                    .clone()
                    .ok_or_else(|| Error::structural("smoothing state lost its gauge"))?;
                (FieldKind::Smoothed, Some(g))
            }
        };
        Ok(Checkpoint {
            config_text: config_text.to_string(),
            config_hash: fnv1a(config_text.as_bytes()),
            kind,
            t: state.t,
            steps: state.steps,
            field: state.field.clone(),
            gauge,
        })
    }

    /// Snapshot a variational tangent.
    pub fn of_tangent(config_text: &str, t: f64, steps: u64, v: &Field) -> Checkpoint {
        Checkpoint {
            config_text: config_text.to_string(),
            config_hash: fnv1a(config_text.as_bytes()),
            kind: FieldKind::Tangent,
            t,
            steps,
            field: v.clone(),
            gauge: None,
        }
    }

    /// Rebuild the flow state this file froze.  Tangent files have no flow
    /// semantics and refuse.
    pub fn to_state(&self) -> Result<FlowState> {
        let mode = match self.kind {
            FieldKind::Connection => FlowMode::Direct,
            FieldKind::Smoothed => FlowMode::Smoothing,
            FieldKind::Tangent => {
                return Err(Error::Checkpoint(
                    "tangent checkpoints cannot seed a flow".into(),
                ))
            }
        };
        if self.kind == FieldKind::Smoothed && self.gauge.is_none() {
            return Err(Error::Checkpoint("smoothed checkpoint lost its gauge".into()));
        }
        Ok(FlowState {
            mode,
            t: self.t,
            field: self.field.clone(),
            gauge: self.gauge.clone(),
            steps: self.steps,
        })
    }

    /// The connection the file represents, across all kinds.
    pub fn connection(&self) -> Result<Field> {
        match self.kind {
            FieldKind::Connection | FieldKind::Tangent => Ok(self.field.clone()),
            FieldKind::Smoothed => self.to_state()?.connection(),
        }
    }

    #[must_use]
    pub fn to_bytes(&self) -> Vec<u8> {
        let f = &self.field;
        let grid = f.grid;
        let mut out = Vec::new();
        out.extend_from_slice(&MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&self.config_hash.to_le_bytes());
        out.extend_from_slice(&(self.config_text.len() as u32).to_le_bytes());
        out.extend_from_slice(self.config_text.as_bytes());
        out.push(self.kind.as_u8());
        out.push(match grid.domain {
            Domain::Box3 => 0,
            Domain::Torus => 1,
        });
        out.push(match f.bc {
            Bc::Periodic => 0,
            Bc::Neumann => 1,
            Bc::Dirichlet => 2,
        });
        out.push(match f.group {
            GroupKind::U1 => 0,
            GroupKind::Su2 => 1,
        });
        out.push(f.group.matrix_dim() as u8);
        out.push(f.group.algebra_dim() as u8);
        out.push(f.degree.as_u8());
        out.push(0);
        for d in grid.dims {
            out.extend_from_slice(&(d as u64).to_le_bytes());
        }
        out.extend_from_slice(&grid.h.to_le_bytes());
        out.extend_from_slice(&self.t.to_le_bytes());
        out.extend_from_slice(&self.steps.to_le_bytes());
        for site in 0..f.sites() {
            for comp in 0..f.comp_count() {
                let v = f.get(site, comp);
                for c in v.coeffs {
                    out.extend_from_slice(&c.to_le_bytes());
                }
            }
        }
        if let Some(g) = &self.gauge {
            out.extend_from_slice(
                &g.data
                    .iter()
                    .flat_map(|x| x.to_le_bytes())
                    .collect::<Vec<u8>>(),
            );
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Checkpoint> {
        let mut cur = Cursor { bytes, at: 0 };
        if cur.take(4)? != MAGIC {
            return Err(Error::Checkpoint("bad magic".into()));
        }
        let version = cur.u32()?;
        if version != VERSION {
            return Err(Error::Checkpoint(format!(
                "format version {version} is not {VERSION}"
            )));
        }
        let config_hash = cur.u64()?;
        let clen = cur.u32()? as usize;
        let config_text = String::from_utf8(cur.take(clen)?.to_vec())
            .map_err(|_| Error::Checkpoint("config text is not utf-8".into()))?;
        if fnv1a(config_text.as_bytes()) != config_hash {
            return Err(Error::Checkpoint(
                "embedded config does not match its stored hash".into(),
            ));
        }
        let kind = FieldKind::from_u8(cur.u8()?)?;
        let domain = match cur.u8()? {
            0 => Domain::Box3,
            1 => Domain::Torus,
            other => return Err(Error::Checkpoint(format!("bad domain tag {other}"))),
        };
        let bc = match cur.u8()? {
            0 => Bc::Periodic,
            1 => Bc::Neumann,
            2 => Bc::Dirichlet,
            other => return Err(Error::Checkpoint(format!("bad bc tag {other}"))),
        };
        let group = match cur.u8()? {
            0 => GroupKind::U1,
            1 => GroupKind::Su2,
            other => return Err(Error::Checkpoint(format!("bad group tag {other}"))),
        };
        let mdim = cur.u8()? as usize;
        let adim = cur.u8()? as usize;
        if mdim != group.matrix_dim() || adim != group.algebra_dim() {
            return Err(Error::Checkpoint(format!(
                "group dims {mdim}x{adim} do not match the group tag"
            )));
        }
        let degree = FormDegree::from_u8(cur.u8()?)
            .map_err(|e| Error::Checkpoint(e.to_string()))?;
        cur.u8()?;
        let mut dims = [0usize; 3];
        for d in &mut dims {
            *d = cur.u64()? as usize;
        }
        let h = cur.f64()?;
        let grid = Grid::new(dims, h, domain).map_err(|e| Error::Checkpoint(e.to_string()))?;
        let t = cur.f64()?;
        let steps = cur.u64()?;
        let mut field =
            Field::zero(grid, bc, degree, group).map_err(|e| Error::Checkpoint(e.to_string()))?;
        for site in 0..field.sites() {
            for comp in 0..field.comp_count() {
                let mut v = crate::lie::AlgebraElement::zero(group);
                for c in v.coeffs.iter_mut() {
                    *c = cur.f64()?;
                }
                field.set(site, comp, &v);
            }
        }
        let gauge = if kind == FieldKind::Smoothed {
            let mut g = GaugeField::identity(grid, group);
            for x in g.data.iter_mut() {
                *x = cur.f64()?;
            }
            Some(g)
        } else {
            None
        };
        if cur.at != bytes.len() {
            return Err(Error::Checkpoint(format!(
                "{} trailing bytes after the payload",
                bytes.len() - cur.at
            )));
        }
        Ok(Checkpoint {
            config_text,
            config_hash,
            kind,
            t,
            steps,
            field,
            gauge,
        })
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Checkpoint> {
        let bytes = std::fs::read(path.as_ref())?;
        Checkpoint::from_bytes(&bytes)
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl Cursor<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8]> {
        if self.at + n > self.bytes.len() {
            return Err(Error::Checkpoint("truncated file".into()));
        }
        let s = &self.bytes[self.at..self.at + n];
        self.at += n;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sample_state(mode: FlowMode) -> FlowState {
        let grid = Grid::new([5, 4, 6], 0.3, Domain::Box3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let field = Field::random(grid, Bc::Neumann, FormDegree::One, GroupKind::Su2, 0.7, &mut rng)
            .unwrap();
        let mut state = FlowState::new(mode, field).unwrap();
        state.t = 0.125;
        state.steps = 40;
        if let Some(g) = state.gauge.as_mut() {
            for x in g.data.iter_mut() {
                *x += 1e-3;
            }
        }
        state
    }

    #[test]
    fn connection_round_trip_is_bit_exact() {
        let state = sample_state(FlowMode::Direct);
        let ck = Checkpoint::of_state("fake = 1\n", &state).unwrap();
        let bytes = ck.to_bytes();
        let back = Checkpoint::from_bytes(&bytes).unwrap();
        assert_eq!(back.to_bytes(), bytes);
        assert_eq!(back.field.data, state.field.data);
        assert_eq!(back.t, state.t);
        assert_eq!(back.steps, state.steps);
        assert!(back.gauge.is_none());
        let re = back.to_state().unwrap();
        assert_eq!(re.mode, FlowMode::Direct);
        assert_eq!(re.field.data, state.field.data);
    }

    #[test]
    fn smoothed_round_trip_keeps_the_gauge() {
        let state = sample_state(FlowMode::Smoothing);
        let ck = Checkpoint::of_state("fake = 1\n", &state).unwrap();
        let back = Checkpoint::from_bytes(&ck.to_bytes()).unwrap();
        assert_eq!(back.kind, FieldKind::Smoothed);
        assert_eq!(
            back.gauge.as_ref().unwrap().data,
            state.gauge.as_ref().unwrap().data
        );
        let re = back.to_state().unwrap();
        assert_eq!(re.mode, FlowMode::Smoothing);
        assert_eq!(re.steps, state.steps);
    }

    #[test]
    fn corruption_and_version_skew_are_refused() {
        let state = sample_state(FlowMode::Direct);
        let ck = Checkpoint::of_state("k = v\n", &state).unwrap();
        let good = ck.to_bytes();

        let mut bad = good.clone();
        bad[0] = b'X';
        assert!(Checkpoint::from_bytes(&bad).is_err());

        let mut bad = good.clone();
        bad[4] = 99;
        assert!(Checkpoint::from_bytes(&bad).is_err());

        // Flip a byte inside the embedded config text: hash check trips.
        let mut bad = good.clone();
        bad[20] ^= 0x40;
        assert!(Checkpoint::from_bytes(&bad).is_err());

        assert!(Checkpoint::from_bytes(&good[..good.len() - 3]).is_err());

        let mut bad = good.clone();
        bad.push(0);
        assert!(Checkpoint::from_bytes(&bad).is_err());
    }

    #[test]
    fn tangent_kind_has_no_flow_state() {
        let state = sample_state(FlowMode::Direct);
        let ck = Checkpoint::of_tangent("k = v\n", 0.5, 7, &state.field);
        let back = Checkpoint::from_bytes(&ck.to_bytes()).unwrap();
        assert_eq!(back.kind, FieldKind::Tangent);
        assert!(back.to_state().is_err());
        assert_eq!(back.connection().unwrap().data, state.field.data);
    }
}
