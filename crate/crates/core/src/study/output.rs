//! CSV writers and the binary reference-solution format.
//!
//! Reference file: little-endian `u64` value count, then that many
//! `(f64 re, f64 im)` pairs, little-endian.

use super::{DiagnosticsRow, SweepRow};
use crate::ddm::HistoryEntry;
use crate::error::{Error, Result};
use crate::C64;
use std::io::{Read, Write};
use std::path::Path;

/// Columns `iteration,relative_error,th_residual`.
pub fn write_history_csv(mut w: impl Write, history: &[HistoryEntry]) -> Result<()> {
    writeln!(w, "iteration,relative_error,th_residual")?;
    for h in history {
        writeln!(w, "{},{:e},{:e}", h.iteration, h.relative_error, h.residual)?;
    }
    Ok(())
}

/// Columns `axis,value,impedance,solver,iterations,converged,final_error`.
pub fn write_summary_csv(mut w: impl Write, rows: &[SweepRow]) -> Result<()> {
    writeln!(w, "axis,value,impedance,solver,iterations,converged,final_error")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{:e}",
            r.axis, r.value, r.impedance, r.solver, r.iterations, r.converged, r.final_error
        )?;
    }
    Ok(())
}

/// Columns `impedance,gamma,lambda_minus,lambda_plus,rate_bound`.
pub fn write_diagnostics_csv(mut w: impl Write, rows: &[DiagnosticsRow]) -> Result<()> {
    writeln!(w, "impedance,gamma,lambda_minus,lambda_plus,rate_bound")?;
    for r in rows {
        writeln!(w, "{},{:e},{:e},{:e},{:e}", r.impedance, r.gamma, r.lambda_minus, r.lambda_plus, r.rate_bound)?;
    }
    Ok(())
}

pub fn encode_reference(values: &[C64]) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + 16 * values.len());
    out.extend_from_slice(&(values.len() as u64).to_le_bytes());
    for v in values {
        out.extend_from_slice(&v.re.to_le_bytes());
        out.extend_from_slice(&v.im.to_le_bytes());
    }
    out
}

pub fn decode_reference(mut bytes: &[u8]) -> Result<Vec<C64>> {
    let mut word = [0u8; 8];
    bytes.read_exact(&mut word).map_err(|_| Error::Parse { line: 0, msg: "reference file lacks its header".into() })?;
    let n = u64::from_le_bytes(word) as usize;
    if bytes.len() != 16 * n {
        return Err(Error::Parse {
            line: 0,
            msg: format!("reference header announces {n} values but {} bytes follow", bytes.len()),
        });
    }
    Ok(bytes
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().unwrap());
            let im = f64::from_le_bytes(c[8..].try_into().unwrap());
            C64::new(re, im)
        })
        .collect())
}

pub fn write_reference(path: &Path, values: &[C64]) -> Result<()> {
    std::fs::write(path, encode_reference(values))?;
    Ok(())
}

pub fn read_reference(path: &Path) -> Result<Vec<C64>> {
    decode_reference(&std::fs::read(path)?)
}
