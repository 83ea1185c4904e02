//! Domain-coloring phase portraits on the square `[-0.98, 0.98]^2`.
//!
//! Hue is `arg(value) / 2pi` (saturation and value 1); grid points with
//! `|z| >= 0.98` are black. Output is binary PPM (`P6`, maxval 255).

use std::f64::consts::TAU;
use std::io::Write;

use num_complex::Complex64;

use crate::charpoly::log_product;
use crate::error::{Error, Result};
use crate::ewens::CycleType;
use crate::limit_field::LimitFieldSample;

/// Half-width of the sampled square and radius of the blacked-out circle.
pub const EXTENT: f64 = 0.98;

pub const MIN_GRID: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhasePortrait {
    size: usize,
    rgb: Vec<u8>,
}

/// Grid point at column `col`, row `row`; row 0 is the top edge `Im z = 0.98`.
pub fn grid_point(col: usize, row: usize, grid: usize) -> Complex64 {
    let step = 2.0 * EXTENT / (grid - 1) as f64;
    Complex64::new(-EXTENT + col as f64 * step, EXTENT - row as f64 * step)
}

fn check_grid(grid: usize) -> Result<()> {
    if grid < MIN_GRID {
        Err(Error::Domain(format!("grid must be at least {MIN_GRID}, got {grid}")))
    } else {
        Ok(())
    }
}

/// HSV (h, 1, 1) to 8-bit RGB, with `h` in turns.
pub fn hue_to_rgb(hue: f64) -> [u8; 3] {
    let h = hue.rem_euclid(1.0) * 6.0;
    let sector = (h.floor() as usize).min(5);
    let f = h - sector as f64;
    let (r, g, b) = match sector {
        0 => (1.0, f, 0.0),
        1 => (1.0 - f, 1.0, 0.0),
        2 => (0.0, 1.0, f),
        3 => (0.0, 1.0 - f, 1.0),
        4 => (f, 0.0, 1.0),
        _ => (1.0, 0.0, 1.0 - f),
    };
    let q = |x: f64| (x * 255.0).round() as u8;
    [q(r), q(g), q(b)]
}

impl PhasePortrait {
    /// Colors each grid point by `phase(z)`, an argument in radians.
    pub fn render<F>(grid: usize, phase: F) -> Result<Self>
    where
        F: Fn(Complex64) -> f64 + Sync,
    {
        check_grid(grid)?;
        let mut rgb = vec![0u8; grid * grid * 3];
        let fill_row = |(row, line): (usize, &mut [u8])| {
            for col in 0..grid {
                let z = grid_point(col, row, grid);
                if z.norm() >= EXTENT {
                    continue;
                }
                let px = hue_to_rgb(phase(z) / TAU);
                line[col * 3..col * 3 + 3].copy_from_slice(&px);
            }
        };
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            rgb.par_chunks_mut(grid * 3).enumerate().for_each(fill_row);
        }
        #[cfg(not(feature = "parallel"))]
        rgb.chunks_mut(grid * 3).enumerate().for_each(fill_row);
        Ok(Self { size: grid, rgb })
    }

    /// Portrait of `prod_k (1 - z^k)^{c_k}` for a factor list `(k, c_k)`.
    pub fn of_factors(factors: &[(usize, u64)], grid: usize) -> Result<Self> {
        Self::render(grid, |z| log_product(factors.iter().copied(), z).im)
    }

    /// Portrait of `p_n` for one cycle type.
    pub fn of_charpoly(ct: &CycleType, grid: usize) -> Result<Self> {
        Self::of_factors(&ct.factors(), grid)
    }

    /// Portrait of the limit field `F` for one sample; needs `delta >= 0.98`.
    pub fn of_limit(sample: &LimitFieldSample, grid: usize) -> Result<Self> {
        if sample.delta < EXTENT {
            return Err(Error::Domain(format!(
                "limit sample valid on |z| <= {} but the portrait needs {EXTENT}",
                sample.delta
            )));
        }
        Self::of_factors(&sample.factors(), grid)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn rgb(&self) -> &[u8] {
        &self.rgb
    }

    /// RGBA bytes (opaque), the layout a canvas `ImageData` expects.
    pub fn rgba(&self) -> Vec<u8> {
        self.rgb.chunks_exact(3).flat_map(|p| [p[0], p[1], p[2], 255]).collect()
    }

    pub fn to_ppm(&self) -> Vec<u8> {
        let mut out = format!("P6\n{} {}\n255\n", self.size, self.size).into_bytes();
        out.extend_from_slice(&self.rgb);
        out
    }

    pub fn write_ppm<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        w.write_all(&self.to_ppm())
    }
}

/// Parsed header of a binary PPM.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PpmHeader {
    pub width: usize,
    pub height: usize,
    pub maxval: u16,
    /// Byte offset of the pixel payload.
    pub data_offset: usize,
}

/// Validates a `P6` file: magic, dimensions, maxval and payload length.
pub fn validate_ppm(bytes: &[u8]) -> Result<PpmHeader> {
    let bad = |m: &str| Error::Parse(format!("invalid PPM: {m}"));
    if !bytes.starts_with(b"P6") {
        return Err(bad("missing P6 magic"));
    }
    let mut pos = 2;
    let mut fields = [0usize; 3];
    for field in fields.iter_mut() {
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&b| b != b'\n') {
                        pos += 1;
                    }
                }
                _ => break,
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        if start == pos {
            return Err(bad("truncated header"));
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| bad("bad header number"))?;
    }
    if !bytes.get(pos).is_some_and(u8::is_ascii_whitespace) {
        return Err(bad("no separator after maxval"));
    }
    pos += 1;
    let [width, height, maxval] = fields;
    if maxval == 0 || maxval > 255 {
        return Err(bad("only 8-bit maxval is supported"));
    }
    if bytes.len() - pos != width * height * 3 {
        return Err(bad("payload size does not match dimensions"));
    }
    Ok(PpmHeader {
        width,
        height,
        maxval: maxval as u16,
        data_offset: pos,
    })
}

/// `(z, value)` on the grid for points with `|z| < 0.98`, row-major.
pub fn grid_values<F>(grid: usize, f: F) -> Result<Vec<(Complex64, Complex64)>>
where
    F: Fn(Complex64) -> Complex64,
{
    check_grid(grid)?;
    let mut out = Vec::new();
    for row in 0..grid {
        for col in 0..grid {
            let z = grid_point(col, row, grid);
            if z.norm() < EXTENT {
                out.push((z, f(z)));
            }
        }
    }
    Ok(out)
}
