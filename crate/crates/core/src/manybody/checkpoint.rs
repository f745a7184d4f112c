use std::io::{Read, Write};

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::grid::LatticeGrid;
use crate::scalar::Real;

use super::marginal::MarginalKernel;
use super::wavefunction::WaveFunction;

pub const MAGIC: &[u8; 4] = b"GPHL";
pub const VERSION: u32 = 1;
/// Magic, version, `N`, `d`, points per axis, box length, time.
pub const HEADER_BYTES: usize = 4 + 4 * 4 + 8 + 8;

/// Header followed by little-endian `f32` (re, im) pairs in row-major particle-then-axis order.
///
/// Amplitudes are stored in single precision, so a round trip is lossy at about `1e-7` relative.
pub fn write_checkpoint<T: Real, W: Write>(psi: &WaveFunction<T>, out: &mut W) -> Result<()> {
    let mut head = Vec::with_capacity(HEADER_BYTES);
    head.extend_from_slice(MAGIC);
    head.extend_from_slice(&VERSION.to_le_bytes());
    for v in [psi.n, psi.grid.d, psi.grid.points_per_axis] {
        head.extend_from_slice(&(v as u32).to_le_bytes());
    }
    head.extend_from_slice(&psi.grid.box_length.to_f64_lossy().to_le_bytes());
    head.extend_from_slice(&psi.time.to_f64_lossy().to_le_bytes());
    out.write_all(&head)?;
    let mut body = Vec::with_capacity(psi.amplitudes.len() * 8);
    for z in &psi.amplitudes {
        body.extend_from_slice(&(z.re.to_f64_lossy() as f32).to_le_bytes());
        body.extend_from_slice(&(z.im.to_f64_lossy() as f32).to_le_bytes());
    }
    out.write_all(&body)?;
    Ok(())
}

fn u32_at(b: &[u8], off: usize) -> u32 {
    u32::from_le_bytes(b[off..off + 4].try_into().expect("slice of 4"))
}

fn f64_at(b: &[u8], off: usize) -> f64 {
    f64::from_le_bytes(b[off..off + 8].try_into().expect("slice of 8"))
}

pub fn read_checkpoint<T: Real, R: Read>(input: &mut R) -> Result<WaveFunction<T>> {
    let mut head = [0u8; HEADER_BYTES];
    input.read_exact(&mut head)?;
    if &head[..4] != MAGIC {
        return Err(Error::Format("bad magic, not a wavefunction checkpoint".into()));
    }
    let version = u32_at(&head, 4);
    if version != VERSION {
        return Err(Error::Format(format!("unsupported checkpoint version {version}")));
    }
    let n = u32_at(&head, 8) as usize;
    let d = u32_at(&head, 12) as usize;
    let points = u32_at(&head, 16) as usize;
    let grid = LatticeGrid::with_any_even(d, points, T::lit(f64_at(&head, 20)))?;
    let time = T::lit(f64_at(&head, 28));
    let count = grid.sites(n);
    let mut body = vec![0u8; count * 8];
    input.read_exact(&mut body)?;
    let amplitudes = body
        .chunks_exact(8)
        .map(|c| {
            let re = f32::from_le_bytes(c[..4].try_into().expect("slice of 4"));
            let im = f32::from_le_bytes(c[4..].try_into().expect("slice of 4"));
            Complex::new(T::lit(re as f64), T::lit(im as f64))
        })
        .collect();
    Ok(WaveFunction {
        n,
        grid,
        amplitudes,
        time,
    })
}

/// Kernel as CSV rows `index,re,im` over the flattened `(x; x′)` index.
pub fn write_kernel_csv<T: Real, W: Write>(kernel: &MarginalKernel<T>, out: &mut W) -> Result<()> {
    writeln!(out, "index,re,im")?;
    for (i, z) in kernel.data.iter().enumerate() {
        writeln!(out, "{i},{:e},{:e}", z.re.to_f64_lossy(), z.im.to_f64_lossy())?;
    }
    Ok(())
}
