//! `DHM1` field files.
//!
//! Little-endian throughout. Header (80 bytes):
//!
//! | offset | size | content                                           |
//! |--------|------|---------------------------------------------------|
//! | 0      | 4    | magic `DHM1`                                      |
//! | 4      | 2    | format version (u16, currently 1)                 |
//! | 6      | 1    | topology: 0 torus, 1 disk                         |
//! | 7      | 1    | field kind: 0 map, 1 spinor                       |
//! | 8      | 1    | target: 0 sphere, 1 flat                          |
//! | 9      | 3    | reserved, zero                                    |
//! | 12     | 4    | n (u32)                                           |
//! | 16     | 8    | side (f64)                                        |
//! | 24     | 8    | interior window radius (f64, 0 for none)          |
//! | 32     | 4    | ambient dimension K (u32)                         |
//! | 36     | 4    | components per node: K for maps, 4K for spinors   |
//! | 40     | 8    | payload length in bytes (u64)                     |
//! | 48     | 32   | SHA-256 of the payload                            |
//!
//! The payload is `n² × components` f64 values, node-major with rows of
//! constant `y` outermost. A spinor node stores `(Re f, Im f, Re g, Im g)` for
//! each ambient component in turn.

use std::path::Path;
use std::sync::Arc;

use dhm_core::spinor::Spinor;
use dhm_core::{DomainChart, MapField, TargetGeometry, Topology, TwistedSpinorField};
use sha2::{Digest, Sha256};

pub const MAGIC: &[u8; 4] = b"DHM1";
pub const VERSION: u16 = 1;
pub const HEADER_LEN: usize = 80;

#[derive(Debug, thiserror::Error)]
pub enum FieldFileError {
    #[error("file shorter than the {HEADER_LEN}-byte header ({0} bytes)")]
    Truncated(usize),
    #[error("bad magic {0:?}")]
    BadMagic([u8; 4]),
    #[error("unsupported format version {0}")]
    UnsupportedVersion(u16),
    #[error("unknown topology code {0}")]
    BadTopology(u8),
    #[error("unknown field kind code {0}")]
    BadKind(u8),
    #[error("unknown target code {0}")]
    BadTarget(u8),
    #[error("invalid header: {0}")]
    BadHeader(String),
    #[error("{components} components per node do not match K = {k} for a {kind}")]
    BadLayout { kind: &'static str, k: u32, components: u32 },
    #[error("payload is {actual} bytes, header declares {declared}, layout needs {expected}")]
    LengthMismatch { declared: u64, actual: usize, expected: u64 },
    #[error("payload checksum mismatch")]
    ChecksumMismatch,
    #[error("field rejected: {0}")]
    Field(#[from] dhm_core::DhmError),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl FieldFileError {
    /// Stable code per failure class.
    pub fn code(&self) -> &'static str {
        match self {
            Self::Truncated(_) => "E_TRUNCATED",
            Self::BadMagic(_) => "E_MAGIC",
            Self::UnsupportedVersion(_) => "E_VERSION",
            Self::BadTopology(_) => "E_TOPOLOGY",
            Self::BadKind(_) => "E_KIND",
            Self::BadTarget(_) => "E_TARGET",
            Self::BadHeader(_) => "E_HEADER",
            Self::BadLayout { .. } => "E_LAYOUT",
            Self::LengthMismatch { .. } => "E_LENGTH",
            Self::ChecksumMismatch => "E_CHECKSUM",
            Self::Field(_) => "E_FIELD",
            Self::Io(_) => "E_IO",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldKind {
    Map,
    Spinor,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Header {
    pub topology: Topology,
    pub kind: FieldKind,
    pub target: TargetGeometry,
    pub n: usize,
    pub side: f64,
    pub window: Option<f64>,
    pub k: usize,
}

impl Header {
    pub fn components(&self) -> usize {
        match self.kind {
            FieldKind::Map => self.k,
            FieldKind::Spinor => 4 * self.k,
        }
    }

    pub fn chart(&self) -> Result<DomainChart, FieldFileError> {
        let chart = match self.topology {
            Topology::Torus => DomainChart::torus(self.n, self.side)?,
            Topology::Disk => DomainChart::disk(self.n)?,
        };
        Ok(match self.window {
            Some(w) => chart.with_window(w)?,
            None => chart,
        })
    }

    fn of_chart(chart: &DomainChart, kind: FieldKind, target: TargetGeometry, k: usize) -> Self {
        Self {
            topology: chart.topology(),
            kind,
            target,
            n: chart.n(),
            side: chart.grid().side(),
            window: chart.window(),
            k,
        }
    }
}

/// A decoded file: header plus raw payload values.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldFile {
    pub header: Header,
    pub payload: Vec<f64>,
}

impl FieldFile {
    pub fn from_map(phi: &MapField) -> Self {
        let header = Header::of_chart(phi.chart(), FieldKind::Map, phi.target(), phi.k());
        let mut payload = Vec::with_capacity(phi.chart().len() * phi.k());
        for idx in 0..phi.chart().len() {
            payload.extend(phi.comps().iter().map(|c| c[idx]));
        }
        Self { header, payload }
    }

    /// The target is recorded so that the pair can be rebuilt from files.
    pub fn from_spinor(psi: &TwistedSpinorField, target: TargetGeometry) -> Self {
        let header = Header::of_chart(psi.chart(), FieldKind::Spinor, target, psi.k());
        let mut payload = Vec::with_capacity(psi.chart().len() * 4 * psi.k());
        for idx in 0..psi.chart().len() {
            for c in psi.comps() {
                payload.extend(c[idx].parts());
            }
        }
        Self { header, payload }
    }

    pub fn to_map(&self, chart: Arc<DomainChart>) -> Result<MapField, FieldFileError> {
        self.expect_kind(FieldKind::Map)?;
        let k = self.header.k;
        let comps = (0..k).map(|i| self.payload.iter().skip(i).step_by(k).copied().collect()).collect();
        Ok(MapField::new(chart, self.header.target, comps)?)
    }

    pub fn to_spinor(&self, chart: Arc<DomainChart>) -> Result<TwistedSpinorField, FieldFileError> {
        self.expect_kind(FieldKind::Spinor)?;
        let k = self.header.k;
        let comps = (0..k)
            .map(|i| {
                self.payload
                    .chunks_exact(4 * k)
                    .map(|node| {
                        let p = &node[4 * i..4 * i + 4];
                        Spinor::from_parts(p[0], p[1], p[2], p[3])
                    })
                    .collect()
            })
            .collect();
        Ok(TwistedSpinorField::new(chart, comps)?)
    }

    fn expect_kind(&self, kind: FieldKind) -> Result<(), FieldFileError> {
        if self.header.kind == kind {
            Ok(())
        } else {
            Err(FieldFileError::BadHeader(format!("expected a {kind:?} file, found {:?}", self.header.kind)))
        }
    }

    pub fn encode(&self) -> Vec<u8> {
        let h = &self.header;
        let mut body = Vec::with_capacity(self.payload.len() * 8);
        for v in &self.payload {
            body.extend_from_slice(&v.to_le_bytes());
        }
        let mut out = Vec::with_capacity(HEADER_LEN + body.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.push(match h.topology {
            Topology::Torus => 0,
            Topology::Disk => 1,
        });
        out.push(match h.kind {
            FieldKind::Map => 0,
            FieldKind::Spinor => 1,
        });
        out.push(if h.target.is_sphere() { 0 } else { 1 });
        out.extend_from_slice(&[0; 3]);
        out.extend_from_slice(&(h.n as u32).to_le_bytes());
        out.extend_from_slice(&h.side.to_le_bytes());
        out.extend_from_slice(&h.window.unwrap_or(0.0).to_le_bytes());
        out.extend_from_slice(&(h.k as u32).to_le_bytes());
        out.extend_from_slice(&(h.components() as u32).to_le_bytes());
        out.extend_from_slice(&(body.len() as u64).to_le_bytes());
        out.extend_from_slice(&Sha256::digest(&body));
        out.extend_from_slice(&body);
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, FieldFileError> {
        if bytes.len() < HEADER_LEN {
            return Err(FieldFileError::Truncated(bytes.len()));
        }
        let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
        let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
        let magic: [u8; 4] = bytes[0..4].try_into().unwrap();
        if &magic != MAGIC {
            return Err(FieldFileError::BadMagic(magic));
        }
        let version = u16::from_le_bytes([bytes[4], bytes[5]]);
        if version != VERSION {
            return Err(FieldFileError::UnsupportedVersion(version));
        }
        let topology = match bytes[6] {
            0 => Topology::Torus,
            1 => Topology::Disk,
            t => return Err(FieldFileError::BadTopology(t)),
        };
        let kind = match bytes[7] {
            0 => FieldKind::Map,
            1 => FieldKind::Spinor,
            t => return Err(FieldFileError::BadKind(t)),
        };
        if bytes[8] > 1 {
            return Err(FieldFileError::BadTarget(bytes[8]));
        }
        if bytes[9..12] != [0; 3] {
            return Err(FieldFileError::BadHeader("reserved bytes are not zero".into()));
        }
        let n = u32_at(12) as usize;
        let side = f64_at(16);
        let window = f64_at(24);
        let k = u32_at(32);
        let components = u32_at(36);
        let declared = u64::from_le_bytes(bytes[40..48].try_into().unwrap());
        if n < 8 || !(side.is_finite() && side > 0.0) || !(window.is_finite() && window >= 0.0) {
            return Err(FieldFileError::BadHeader(format!("n = {n}, side = {side}, window = {window}")));
        }
        if k == 0 || (bytes[8] == 0 && k < 2) {
            return Err(FieldFileError::BadHeader(format!("ambient dimension {k}")));
        }
        let k_us = k as usize;
        let target = if bytes[8] == 0 { TargetGeometry::sphere(k_us - 1) } else { TargetGeometry::flat(k_us) };
        let header = Header { topology, kind, target, n, side, window: (window > 0.0).then_some(window), k: k_us };
        if components as usize != header.components() {
            let kind = if kind == FieldKind::Map { "map" } else { "spinor" };
            return Err(FieldFileError::BadLayout { kind, k, components });
        }
        let body = &bytes[HEADER_LEN..];
        let expected = (n as u64) * (n as u64) * components as u64 * 8;
        if declared != expected || body.len() as u64 != expected {
            return Err(FieldFileError::LengthMismatch { declared, actual: body.len(), expected });
        }
        if Sha256::digest(body).as_slice() != &bytes[48..80] {
            return Err(FieldFileError::ChecksumMismatch);
        }
        let payload = body.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
        Ok(Self { header, payload })
    }

    pub fn write(&self, path: &Path) -> Result<(), FieldFileError> {
        std::fs::write(path, self.encode())?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self, FieldFileError> {
        Self::decode(&std::fs::read(path)?)
    }
}

/// Reads a map/spinor pair written by [`write_pair`] and checks that both
/// live on the same chart.
pub fn read_pair(phi: &Path, psi: &Path) -> Result<(MapField, TwistedSpinorField), FieldFileError> {
    let a = FieldFile::read(phi)?;
    let b = FieldFile::read(psi)?;
    let (ha, hb) = (&a.header, &b.header);
    if (ha.topology, ha.n, ha.side, ha.window, ha.k, ha.target) != (hb.topology, hb.n, hb.side, hb.window, hb.k, hb.target) {
        return Err(FieldFileError::BadHeader("map and spinor files describe different charts".into()));
    }
    let chart = Arc::new(ha.chart()?);
    let map = a.to_map(chart.clone())?;
    let spinor = b.to_spinor(chart)?;
    Ok((map, spinor))
}

pub fn write_pair(dir: &Path, phi: &MapField, psi: &TwistedSpinorField) -> Result<(), FieldFileError> {
    std::fs::create_dir_all(dir)?;
    FieldFile::from_map(phi).write(&dir.join("phi.dhm"))?;
    FieldFile::from_spinor(psi, phi.target()).write(&dir.join("psi.dhm"))
}
