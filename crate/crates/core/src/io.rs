//! Checkpoint files and CSV diagnostics.
//!
//! Checkpoint layout (all little-endian):
//!
//! | bytes | content |
//! |---|---|
//! | 8 | magic `SCALECKP` |
//! | 4 | format version (u32) |
//! | 4 | dim (u32) |
//! | 4 | grid size (u32) |
//! | 4 | number of components (u32) |
//! | 8 | t (f64) |
//! | 8 | eta (f64) |
//! | 4 + n | core name (u32 length, UTF-8) |
//! | 4 + n | config hash (u32 length, UTF-8) |
//! | 8·N·points | values, component-major, flat index `ix + size·iy` |

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::evolve::DiagnosticsRecord;
use crate::field::Field;
use crate::spectral::make_grid;

pub const CHECKPOINT_MAGIC: &[u8; 8] = b"SCALECKP";
pub const CHECKPOINT_VERSION: u32 = 1;

/// Decoded checkpoint.
#[derive(Clone, Debug)]
pub struct Checkpoint {
    pub field: Field,
    pub core: String,
    pub config_hash: String,
}

pub fn encode_checkpoint(field: &Field, core: &str, config_hash: &str) -> Vec<u8> {
    let g = field.grid();
    let mut out = Vec::with_capacity(64 + 8 * field.values().len());
    out.extend_from_slice(CHECKPOINT_MAGIC);
    for v in [CHECKPOINT_VERSION, g.dim() as u32, g.size() as u32, field.ncomp() as u32] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out.extend_from_slice(&field.t().to_le_bytes());
    out.extend_from_slice(&field.eta().to_le_bytes());
    for s in [core, config_hash] {
        out.extend_from_slice(&(s.len() as u32).to_le_bytes());
        out.extend_from_slice(s.as_bytes());
    }
    for v in field.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| Error::Format(format!("truncated while reading {what}")))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn f64(&mut self, what: &str) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }

    fn string(&mut self, what: &str) -> Result<String> {
        let n = self.u32(what)? as usize;
        String::from_utf8(self.take(n, what)?.to_vec()).map_err(|_| Error::Format(format!("{what} is not UTF-8")))
    }
}

pub fn decode_checkpoint(bytes: &[u8]) -> Result<Checkpoint> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(8, "magic")? != CHECKPOINT_MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let version = r.u32("version")?;
    if version != CHECKPOINT_VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let dim = r.u32("dim")? as usize;
    let size = r.u32("size")? as usize;
    let ncomp = r.u32("ncomp")? as usize;
    let t = r.f64("t")?;
    let eta = r.f64("eta")?;
    let core = r.string("core name")?;
    let config_hash = r.string("config hash")?;
    let grid = make_grid(dim, size).map_err(|e| Error::Format(e.to_string()))?;
    let count = ncomp * grid.num_points();
    let data = r.take(8 * count, "values")?;
    if r.pos != bytes.len() {
        return Err(Error::Format("trailing bytes".into()));
    }
    let values = data.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    let field = Field::new(&grid, ncomp, values, t, eta).map_err(|e| Error::Format(e.to_string()))?;
    Ok(Checkpoint {
        field,
        core,
        config_hash,
    })
}

pub fn write_checkpoint(path: &Path, field: &Field, core: &str, config_hash: &str) -> Result<()> {
    fs::write(path, encode_checkpoint(field, core, config_hash))?;
    Ok(())
}

pub fn read_checkpoint(path: &Path) -> Result<Checkpoint> {
    decode_checkpoint(&fs::read(path)?)
}

/// CSV text: a `# config_hash=` comment, the header row, then one row per
/// record with every value printed in round-trip `{:.17e}` form.
pub fn diagnostics_csv(config_hash: &str, records: &[DiagnosticsRecord]) -> String {
    let mut out = format!("# config_hash={config_hash}\n");
    out.push_str(&DiagnosticsRecord::COLUMNS.join(","));
    out.push('\n');
    for r in records {
        let row: Vec<String> = r.values().iter().map(|v| format!("{v:.17e}")).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn write_diagnostics_csv(path: &Path, config_hash: &str, records: &[DiagnosticsRecord]) -> Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(diagnostics_csv(config_hash, records).as_bytes())?;
    Ok(())
}

/// Generic CSV table with the same comment header convention.
pub fn table_csv(config_hash: &str, columns: &[&str], rows: &[Vec<f64>]) -> String {
    let mut out = format!("# config_hash={config_hash}\n{}\n", columns.join(","));
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.17e}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}
