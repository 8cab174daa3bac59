//! Binary symbol-table files for cross-run caching of sigma_t tables.
//!
//! Layout (little-endian):
//!   bytes 0..8    magic "MZSYMTB1"
//!   bytes 8..12   u32 grid size N (power of two, 16 <= N <= 16384)
//!   bytes 12..20  f64 grid half-width L
//!   bytes 20..28  f64 shell parameter t
//!   bytes 28..    N*N complex samples, row-major, (f64 re, f64 im) pairs

use num_complex::Complex64;

use crate::error::{MzError, Result};
use crate::grid::Grid;
use crate::marcinkiewicz::SymbolTable;

pub const MAGIC: &[u8; 8] = b"MZSYMTB1";
const HEADER_LEN: usize = 28;
const MAX_N: u32 = 16384;

pub fn encode(table: &SymbolTable) -> Vec<u8> {
    let n = table.grid.size();
    let mut out = Vec::with_capacity(HEADER_LEN + 16 * n * n);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(n as u32).to_le_bytes());
    out.extend_from_slice(&table.grid.half_width().to_le_bytes());
    out.extend_from_slice(&table.t.to_le_bytes());
    for v in &table.values {
        out.extend_from_slice(&v.re.to_le_bytes());
        out.extend_from_slice(&v.im.to_le_bytes());
    }
    out
}

pub fn decode(bytes: &[u8]) -> Result<SymbolTable> {
    if bytes.len() < HEADER_LEN {
        return Err(MzError::SymbolTable(format!(
            "truncated header: {} bytes, need {HEADER_LEN}",
            bytes.len()
        )));
    }
    if &bytes[0..8] != MAGIC {
        return Err(MzError::SymbolTable("bad magic".into()));
    }
    let n = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
    if n < 16 || n > MAX_N || !n.is_power_of_two() {
        return Err(MzError::SymbolTable(format!(
            "grid size {n} out of range or not a power of two"
        )));
    }
    let l = f64::from_le_bytes(bytes[12..20].try_into().unwrap());
    if !(l > 0.0) || !l.is_finite() {
        return Err(MzError::SymbolTable(format!("bad half-width {l}")));
    }
    let t = f64::from_le_bytes(bytes[20..28].try_into().unwrap());
    if !(t > 0.0) || !t.is_finite() {
        return Err(MzError::SymbolTable(format!("bad shell parameter {t}")));
    }
    let count = n as usize * n as usize;
    let want = HEADER_LEN + 16 * count;
    if bytes.len() != want {
        return Err(MzError::SymbolTable(format!(
            "payload length {} does not match N = {n} (want {want})",
            bytes.len()
        )));
    }
    let mut values = Vec::with_capacity(count);
    let mut off = HEADER_LEN;
    for _ in 0..count {
        let re = f64::from_le_bytes(bytes[off..off + 8].try_into().unwrap());
        let im = f64::from_le_bytes(bytes[off + 8..off + 16].try_into().unwrap());
        if !re.is_finite() || !im.is_finite() {
            return Err(MzError::SymbolTable("non-finite sample".into()));
        }
        values.push(Complex64::new(re, im));
        off += 16;
    }
    Ok(SymbolTable {
        t,
        grid: Grid::new(n as usize, l)?,
        values,
    })
}
