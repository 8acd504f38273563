//! Field snapshots and CSV output.
//!
//! Snapshot layout, all little-endian:
//!
//! ```text
//! "LLGF" | version u16 | p u16 | dims p×u32 | spacing p×f64 | origin p×f64
//!        | kind u8 (0 = spin, 1 = rotation) | payload f64, row-major
//! ```
//!
//! Spin payloads hold 3 numbers per cell, rotation payloads 9 (the matrix in
//! row-major order).

use std::fs;
use std::io::{Cursor, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use thiserror::Error;

use crate::error::Result;
use crate::field::{RotationField, SpinField, DEFAULT_LAYER};
use crate::grid::Grid;
use crate::integrator::Sink;
use crate::momenta::MomentumReport;
use crate::so3::{Mat3, Vec3};

pub const MAGIC: &[u8; 4] = b"LLGF";
pub const VERSION: u16 = 1;

#[derive(Debug, Error, PartialEq)]
pub enum SnapshotError {
    #[error("bad magic: expected \"LLGF\", found {0:?}")]
    BadMagic([u8; 4]),
    #[error("unsupported version {found} (this build reads version {VERSION})")]
    UnsupportedVersion { found: u16 },
    #[error("truncated {section}: expected {expected} bytes, found {found}")]
    Truncated {
        section: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("non-finite payload value at index {index}")]
    NonFinite { index: usize },
    #[error("unknown payload kind {0}")]
    BadKind(u8),
    #[error("wrong payload kind: expected {expected}, found {found}")]
    WrongKind {
        expected: &'static str,
        found: &'static str,
    },
    #[error("{0} trailing bytes after payload")]
    TrailingBytes(usize),
    #[error("bad header: {0}")]
    BadHeader(String),
}

/// Contents of a snapshot file.
#[derive(Clone, Debug, PartialEq)]
pub enum Snapshot {
    Spin(SpinField),
    Rotation(RotationField),
}

impl Snapshot {
    pub fn grid(&self) -> &Grid {
        match self {
            Snapshot::Spin(f) => f.grid(),
            Snapshot::Rotation(f) => f.grid(),
        }
    }

    fn kind_name(&self) -> &'static str {
        match self {
            Snapshot::Spin(_) => "spin",
            Snapshot::Rotation(_) => "rotation",
        }
    }

    pub fn into_spin(self) -> Result<SpinField> {
        match self {
            Snapshot::Spin(f) => Ok(f),
            other => Err(SnapshotError::WrongKind {
                expected: "spin",
                found: other.kind_name(),
            }
            .into()),
        }
    }

    pub fn into_rotation(self) -> Result<RotationField> {
        match self {
            Snapshot::Rotation(f) => Ok(f),
            other => Err(SnapshotError::WrongKind {
                expected: "rotation",
                found: other.kind_name(),
            }
            .into()),
        }
    }
}

impl From<SpinField> for Snapshot {
    fn from(f: SpinField) -> Self {
        Snapshot::Spin(f)
    }
}

impl From<RotationField> for Snapshot {
    fn from(f: RotationField) -> Self {
        Snapshot::Rotation(f)
    }
}

pub fn encode(snap: &Snapshot) -> Vec<u8> {
    let grid = snap.grid();
    let p = grid.p();
    let (kind, width) = match snap {
        Snapshot::Spin(_) => (0u8, 3),
        Snapshot::Rotation(_) => (1u8, 9),
    };
    let mut out = Vec::with_capacity(9 + p * 20 + grid.len() * width * 8);
    out.extend_from_slice(MAGIC);
    // Writes into a Vec cannot fail.
    out.write_u16::<LittleEndian>(VERSION).unwrap();
    out.write_u16::<LittleEndian>(p as u16).unwrap();
    for &d in grid.dims() {
        out.write_u32::<LittleEndian>(d as u32).unwrap();
    }
    for &h in grid.spacing().iter().chain(grid.origin()) {
        out.write_f64::<LittleEndian>(h).unwrap();
    }
    out.push(kind);
    match snap {
        Snapshot::Spin(f) => {
            for v in f.values() {
                for c in v.iter() {
                    out.write_f64::<LittleEndian>(*c).unwrap();
                }
            }
        }
        Snapshot::Rotation(f) => {
            for m in f.values() {
                for r in 0..3 {
                    for c in 0..3 {
                        out.write_f64::<LittleEndian>(m[(r, c)]).unwrap();
                    }
                }
            }
        }
    }
    out
}

fn need(cur: &Cursor<&[u8]>, section: &'static str, bytes: usize) -> std::result::Result<(), SnapshotError> {
    let left = cur.get_ref().len() - cur.position() as usize;
    if left < bytes {
        Err(SnapshotError::Truncated {
            section,
            expected: bytes,
            found: left,
        })
    } else {
        Ok(())
    }
}

/// Parses snapshot bytes. Spin fields come back decaying when their boundary
/// layer (default thickness) is exactly −𝐤; rotation fields must be the
/// identity there.
pub fn decode(bytes: &[u8]) -> Result<Snapshot> {
    let mut cur = Cursor::new(bytes);
    need(&cur, "header", 8)?;
    let mut magic = [0u8; 4];
    cur.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(SnapshotError::BadMagic(magic).into());
    }
    let version = cur.read_u16::<LittleEndian>()?;
    if version != VERSION {
        return Err(SnapshotError::UnsupportedVersion { found: version }.into());
    }
    let p = cur.read_u16::<LittleEndian>()? as usize;
    if !(1..=3).contains(&p) {
        return Err(SnapshotError::BadHeader(format!("p = {p} not in 1..=3")).into());
    }
    need(&cur, "header", p * 20 + 1)?;
    let dims: Vec<usize> = (0..p)
        .map(|_| cur.read_u32::<LittleEndian>().map(|d| d as usize))
        .collect::<std::io::Result<_>>()?;
    let spacing: Vec<f64> = (0..p)
        .map(|_| cur.read_f64::<LittleEndian>())
        .collect::<std::io::Result<_>>()?;
    let origin: Vec<f64> = (0..p)
        .map(|_| cur.read_f64::<LittleEndian>())
        .collect::<std::io::Result<_>>()?;
    let kind = cur.read_u8()?;
    let width = match kind {
        0 => 3,
        1 => 9,
        k => return Err(SnapshotError::BadKind(k).into()),
    };
    let grid = Grid::new(&dims, &spacing, &origin)
        .map_err(|e| SnapshotError::BadHeader(e.to_string()))?;
    let count = grid.len() * width;
    need(&cur, "payload", count * 8)?;
    let mut data = vec![0.0; count];
    cur.read_f64_into::<LittleEndian>(&mut data)?;
    let rest = bytes.len() - cur.position() as usize;
    if rest != 0 {
        return Err(SnapshotError::TrailingBytes(rest).into());
    }
    if let Some(index) = data.iter().position(|v| !v.is_finite()) {
        return Err(SnapshotError::NonFinite { index }.into());
    }
    Ok(match kind {
        0 => {
            let vals = data.chunks_exact(3).map(Vec3::from_column_slice).collect();
            Snapshot::Spin(SpinField::non_decaying(grid, vals, DEFAULT_LAYER)?)
        }
        _ => {
            let vals = data.chunks_exact(9).map(Mat3::from_row_slice).collect();
            Snapshot::Rotation(RotationField::new(grid, vals, DEFAULT_LAYER)?)
        }
    })
}

/// Prefixes an io error with the offending path.
pub(crate) fn with_path(path: &Path) -> impl FnOnce(std::io::Error) -> std::io::Error + '_ {
    move |e| std::io::Error::new(e.kind(), format!("`{}`: {e}", path.display()))
}

pub fn write_snapshot(snap: &Snapshot, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode(snap)).map_err(with_path(path))?;
    Ok(())
}

pub fn read_snapshot(path: impl AsRef<Path>) -> Result<Snapshot> {
    let path = path.as_ref();
    decode(&fs::read(path).map_err(with_path(path))?)
}

/// One CSV row per cell: coordinates, then the field components.
pub fn write_field_csv(snap: &Snapshot, mut w: impl Write) -> Result<()> {
    let grid = snap.grid();
    let mut head: Vec<String> = (1..=grid.p()).map(|i| format!("x{i}")).collect();
    match snap {
        Snapshot::Spin(_) => head.extend(["n1", "n2", "n3"].map(String::from)),
        Snapshot::Rotation(_) => {
            head.extend((1..=3).flat_map(|r| (1..=3).map(move |c| format!("r{r}{c}"))))
        }
    }
    writeln!(w, "{}", head.join(","))?;
    for i in 0..grid.len() {
        let x = grid.cell_center(i);
        let mut row: Vec<f64> = (0..grid.p()).map(|a| x[a]).collect();
        match snap {
            Snapshot::Spin(f) => row.extend(f.values()[i].iter()),
            Snapshot::Rotation(f) => {
                let m = f.values()[i];
                row.extend((0..3).flat_map(|r| (0..3).map(move |c| m[(r, c)])));
            }
        }
        writeln!(w, "{}", format_row(&row))?;
    }
    Ok(())
}

/// Comma-joined floats with 17 significant digits.
pub fn format_row(vals: &[f64]) -> String {
    vals.iter()
        .map(|v| format!("{v:.16e}"))
        .collect::<Vec<_>>()
        .join(",")
}

/// Time-series CSV sink: header on construction, one row per report.
pub struct CsvSink<W: Write> {
    out: W,
}

impl<W: Write> CsvSink<W> {
    pub fn new(mut out: W, p: usize) -> Result<Self> {
        writeln!(out, "{}", MomentumReport::header(p).join(","))?;
        Ok(Self { out })
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}

impl<W: Write> Sink for CsvSink<W> {
    fn report(&mut self, r: &MomentumReport) -> Result<()> {
        writeln!(self.out, "{}", format_row(&r.values()))?;
        Ok(())
    }

    fn finish(&mut self, _final_state: &SpinField) -> Result<()> {
        self.out.flush()?;
        Ok(())
    }
}

/// Writes the final state of a simulation to a snapshot file.
pub struct SnapshotSink {
    pub path: std::path::PathBuf,
}

impl Sink for SnapshotSink {
    fn report(&mut self, _r: &MomentumReport) -> Result<()> {
        Ok(())
    }

    fn finish(&mut self, final_state: &SpinField) -> Result<()> {
        write_snapshot(&Snapshot::Spin(final_state.clone()), &self.path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::field::k_axis;
    use crate::generators::{make_bp_soliton, make_constant};

    fn bp() -> SpinField {
        make_bp_soliton(&Grid::cube(2, 32, 8.0).unwrap(), 1, 1.0, 5.0).unwrap()
    }

    fn snap_err(bytes: &[u8]) -> SnapshotError {
        match decode(bytes) {
            Err(Error::Snapshot(e)) => e,
            other => panic!("expected snapshot error, got {other:?}"),
        }
    }

    #[test]
    fn round_trip_is_byte_identical() {
        let s = Snapshot::Spin(bp());
        let b = encode(&s);
        let back = decode(&b).unwrap();
        assert_eq!(back, s);
        assert_eq!(encode(&back), b);
        let r = Snapshot::Rotation(RotationField::identity(&Grid::cube(3, 8, 1.0).unwrap(), 2));
        let b = encode(&r);
        assert_eq!(decode(&b).unwrap(), r);
    }

    #[test]
    fn non_decaying_survives() {
        let n = make_constant(&Grid::cube(2, 8, 1.0).unwrap(), k_axis()).unwrap();
        let back = decode(&encode(&Snapshot::Spin(n.clone()))).unwrap().into_spin().unwrap();
        assert!(!back.is_decaying());
        assert_eq!(back, n);
    }

    #[test]
    fn distinct_errors() {
        let b = encode(&Snapshot::Spin(bp()));
        let mut bad = b.clone();
        bad[0] = b'X';
        assert!(matches!(snap_err(&bad), SnapshotError::BadMagic(_)));
        let mut fut = b.clone();
        fut[4] = 9;
        assert_eq!(snap_err(&fut), SnapshotError::UnsupportedVersion { found: 9 });
        let cut = &b[..b.len() - 5];
        match snap_err(cut) {
            SnapshotError::Truncated { section, expected, found } => {
                assert_eq!(section, "payload");
                assert_eq!(expected, 32 * 32 * 24);
                assert_eq!(found, 32 * 32 * 24 - 5);
            }
            e => panic!("{e:?}"),
        }
        let msg = Error::from(snap_err(cut)).to_string();
        assert!(msg.contains("truncated payload"), "{msg}");
        let mut nan = b.clone();
        let off = b.len() - 8;
        nan[off..].copy_from_slice(&f64::NAN.to_le_bytes());
        assert!(matches!(snap_err(&nan), SnapshotError::NonFinite { .. }));
        let mut kind = b.clone();
        kind[8 + 2 * 20] = 7;
        assert_eq!(snap_err(&kind), SnapshotError::BadKind(7));
        let mut long = b.clone();
        long.push(0);
        assert_eq!(snap_err(&long), SnapshotError::TrailingBytes(1));
        assert!(matches!(snap_err(&b[..3]), SnapshotError::Truncated { section: "header", .. }));
    }

    #[test]
    fn wrong_kind() {
        let r = Snapshot::Rotation(RotationField::identity(&Grid::cube(2, 8, 1.0).unwrap(), 2));
        assert!(r.into_spin().is_err());
    }

    #[test]
    fn field_csv_shape() {
        let n = make_constant(&Grid::cube(2, 8, 1.0).unwrap(), -k_axis()).unwrap();
        let mut buf = Vec::new();
        write_field_csv(&Snapshot::Spin(n), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "x1,x2,n1,n2,n3");
        assert_eq!(lines.len(), 65);
        assert_eq!(lines[1].split(',').count(), 5);
    }

    #[test]
    fn floats_round_trip_through_text() {
        let v = [0.1, -1.0 / 3.0, 6.02214076e23, 5e-324];
        let s = format_row(&v);
        let back: Vec<f64> = s.split(',').map(|t| t.parse().unwrap()).collect();
        assert_eq!(back, v);
    }
}
