//! Trace export: CSV with a fixed header, or a flat little-endian binary dump
//! of 11 `f64` per row in the same column order.

use std::io::{self, Read, Write};

use super::{AugmentedState, Trace};
use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "x,m1,m2,m3,n1,n2,n3,b1,b2,b3,psi";

fn row(s: &AugmentedState) -> [f64; 11] {
    let f = &s.frame;
    [
        f.x, f.m[0], f.m[1], f.m[2], f.n[0], f.n[1], f.n[2], f.b[0], f.b[1], f.b[2], s.psi,
    ]
}

/// Abscissae `0, Δ, 2Δ, …` up to and including `x_max`.
fn grid(x_max: f64, spacing: f64) -> Result<Vec<f64>> {
    if !(spacing > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "sample spacing must be positive, got {spacing}"
        )));
    }
    let n = (x_max / spacing).floor() as usize;
    let mut xs: Vec<f64> = (0..=n).map(|i| (i as f64 * spacing).min(x_max)).collect();
    if *xs.last().unwrap() < x_max {
        xs.push(x_max);
    }
    xs.dedup();
    Ok(xs)
}

/// Interpolated rows at the requested spacing.
pub fn sampled_rows(trace: &Trace, spacing: f64) -> Result<Vec<[f64; 11]>> {
    grid(trace.x_max, spacing)?
        .into_iter()
        .map(|x| trace.frame_at(x).map(|s| row(&s)))
        .collect()
}

pub fn write_csv<W: Write>(trace: &Trace, spacing: f64, mut out: W) -> Result<()> {
    let rows = sampled_rows(trace, spacing)?;
    let io_err = |e: io::Error| Error::InvalidParameter(format!("write failed: {e}"));
    writeln!(out, "{CSV_HEADER}").map_err(io_err)?;
    for r in rows {
        let line: Vec<String> = r.iter().map(|v| format!("{v:.16e}")).collect();
        writeln!(out, "{}", line.join(",")).map_err(io_err)?;
    }
    Ok(())
}

pub fn write_binary<W: Write>(trace: &Trace, spacing: f64, mut out: W) -> Result<()> {
    let rows = sampled_rows(trace, spacing)?;
    let io_err = |e: io::Error| Error::InvalidParameter(format!("write failed: {e}"));
    for r in rows {
        for v in r {
            out.write_all(&v.to_le_bytes()).map_err(io_err)?;
        }
    }
    Ok(())
}

pub fn read_binary<R: Read>(mut input: R) -> io::Result<Vec<[f64; 11]>> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    if bytes.len() % 88 != 0 {
        return Err(io::Error::new(
            io::ErrorKind::InvalidData,
            "length is not a multiple of 88 bytes",
        ));
    }
    Ok(bytes
        .chunks_exact(88)
        .map(|chunk| {
            let mut r = [0.0; 11];
            for (i, v) in r.iter_mut().enumerate() {
                let mut b = [0u8; 8];
                b.copy_from_slice(&chunk[8 * i..8 * i + 8]);
                *v = f64::from_le_bytes(b);
            }
            r
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_includes_endpoint() {
        let g = grid(1.0, 0.3).unwrap();
        assert_eq!(g.first(), Some(&0.0));
        assert_eq!(g.last(), Some(&1.0));
        assert!(g.windows(2).all(|w| w[1] > w[0]));
        assert!(grid(1.0, 0.0).is_err());
    }
}
