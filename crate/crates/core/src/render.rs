//! Runtime deep-field images: machine indices laid out along a Peano curve,
//! each pixel coloured by how the machine ended.
//!
//! The curve is the classic base-3 construction. Read `t` as base-9 digits,
//! least significant first; digit `b` at level `l` selects the sub-square
//! `(bx, by)` of a 3x3 serpentine walked column by column (`bx = b / 3`,
//! `by = b % 3` on even columns and `2 - b % 3` on odd ones). The sub-curve
//! below it is reflected in `y` when `bx` is odd and in `x` when `by` is odd.
//! `x` is the image column and `y` the image row, row 0 at the top.
//!
//! Colours: white for censored machines, red for the longest runtime of the
//! rendered segment, otherwise gray `floor(225 * (R - steps) / R) + 15` with
//! `R` that longest runtime. Cells past the end of the segment are (250,250,250).

use std::io::{BufRead, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::runner::RunRecord;

/// Largest level accepted for rendering (side 19,683).
pub const MAX_RENDER_LEVEL: u32 = 9;
/// Largest level accepted by [`peano_xy`].
pub const MAX_CURVE_LEVEL: u32 = 20;

pub type Rgb = [u8; 3];

/// Square grid of side `3^k` addressed along the Peano curve.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeanoGrid {
    level: u32,
}

impl PeanoGrid {
    pub fn new(level: u32) -> Result<Self> {
        if !(1..=MAX_CURVE_LEVEL).contains(&level) {
            return Err(Error::range("Peano level", level, 1, MAX_CURVE_LEVEL + 1));
        }
        Ok(PeanoGrid { level })
    }

    /// Smallest level whose capacity holds `cells` cells (at least 1).
    pub fn minimal_for(cells: u128) -> u32 {
        let mut k = 1;
        while 9u128.pow(k) < cells {
            k += 1;
        }
        k
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn side(&self) -> u64 {
        3u64.pow(self.level)
    }

    pub fn capacity(&self) -> u64 {
        9u64.pow(self.level)
    }

    pub fn xy(&self, t: u64) -> Result<(u64, u64)> {
        peano_xy(t, self.level)
    }
}

/// Cell of the `t`-th step of the level-`k` Peano curve.
pub fn peano_xy(t: u64, k: u32) -> Result<(u64, u64)> {
    let grid = PeanoGrid::new(k)?;
    if t >= grid.capacity() {
        return Err(Error::range("curve index", t, 0, grid.capacity()));
    }
    let (mut x, mut y) = (0u64, 0u64);
    let mut n = 1u64;
    let mut rest = t;
    for _ in 0..k {
        let b = rest % 9;
        rest /= 9;
        let bx = b / 3;
        let by = if bx % 2 == 0 { b % 3 } else { 2 - b % 3 };
        if bx % 2 == 1 {
            y = n - 1 - y;
        }
        if by % 2 == 1 {
            x = n - 1 - x;
        }
        x += bx * n;
        y += by * n;
        n *= 3;
    }
    Ok((x, y))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuntimePalette {
    pub nonhalting: Rgb,
    pub busy_beaver: Rgb,
    pub background: Rgb,
    /// Lightest-to-darkest gray span added on top of `gray_floor`.
    pub gray_span: u8,
    pub gray_floor: u8,
}

impl Default for RuntimePalette {
    fn default() -> Self {
        RuntimePalette {
            nonhalting: [255, 255, 255],
            busy_beaver: [255, 0, 0],
            background: [250, 250, 250],
            gray_span: 225,
            gray_floor: 15,
        }
    }
}

impl RuntimePalette {
    /// Gray level for a halting machine that ran `steps` of at most `max_steps`.
    pub fn gray(&self, steps: u64, max_steps: u64) -> u8 {
        debug_assert!(steps <= max_steps && max_steps > 0);
        let g = u128::from(self.gray_span) * u128::from(max_steps - steps) / u128::from(max_steps);
        g as u8 + self.gray_floor
    }

    pub fn color(&self, halted: bool, steps: u64, max_steps: u64) -> Rgb {
        if !halted {
            self.nonhalting
        } else if steps == max_steps {
            self.busy_beaver
        } else {
            let g = self.gray(steps, max_steps);
            [g, g, g]
        }
    }
}

/// 8-bit RGB raster, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Image {
    width: usize,
    height: usize,
    pixels: Vec<Rgb>,
}

impl Image {
    pub fn new(width: usize, height: usize, fill: Rgb) -> Self {
        Image {
            width,
            height,
            pixels: vec![fill; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[Rgb] {
        &self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> Rgb {
        self.pixels[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, c: Rgb) {
        self.pixels[y * self.width + x] = c;
    }

    pub fn to_ppm_bytes(&self) -> Vec<u8> {
        self.to_ppm_bytes_with(None)
    }

    /// P6 bytes, optionally with a `# comment` line after the magic number.
    pub fn to_ppm_bytes_with(&self, comment: Option<&str>) -> Vec<u8> {
        let mut out = Vec::with_capacity(32 + self.pixels.len() * 3);
        out.extend_from_slice(b"P6\n");
        if let Some(c) = comment {
            for line in c.lines() {
                out.extend_from_slice(format!("# {line}\n").as_bytes());
            }
        }
        out.extend_from_slice(format!("{} {}\n255\n", self.width, self.height).as_bytes());
        for p in &self.pixels {
            out.extend_from_slice(p);
        }
        out
    }

    pub fn write_ppm<W: Write>(&self, mut w: W, comment: Option<&str>) -> std::io::Result<()> {
        w.write_all(&self.to_ppm_bytes_with(comment))
    }

    pub fn save_ppm(&self, path: &Path, comment: Option<&str>) -> Result<()> {
        std::fs::write(path, self.to_ppm_bytes_with(comment)).map_err(|e| Error::io(path, e))
    }

    /// Parse a binary P6 image with max value 255; comments are skipped.
    pub fn parse_ppm(bytes: &[u8]) -> Result<Image> {
        let mut pos = 0;
        let mut fields = Vec::with_capacity(4);
        while fields.len() < 4 {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if pos < bytes.len() && bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
                continue;
            }
            let start = pos;
            while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if start == pos {
                return Err(Error::parse(0, "truncated PPM header"));
            }
            fields.push(String::from_utf8_lossy(&bytes[start..pos]).into_owned());
        }
        // exactly one whitespace byte separates the header from the raster
        pos += 1;
        if fields[0] != "P6" {
            return Err(Error::parse(0, format!("expected P6 magic, found {:?}", fields[0])));
        }
        let num = |s: &str, what: &str| {
            s.parse::<usize>()
                .map_err(|_| Error::parse(0, format!("bad PPM {what} {s:?}")))
        };
        let width = num(&fields[1], "width")?;
        let height = num(&fields[2], "height")?;
        if num(&fields[3], "max value")? != 255 {
            return Err(Error::parse(0, "only max value 255 is supported"));
        }
        let raster = bytes.get(pos..).unwrap_or(&[]);
        if raster.len() != width * height * 3 {
            return Err(Error::parse(
                0,
                format!("PPM raster has {} bytes, expected {}", raster.len(), width * height * 3),
            ));
        }
        Ok(Image {
            width,
            height,
            pixels: raster.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect(),
        })
    }

    pub fn load_ppm(path: &Path) -> Result<Image> {
        let mut bytes = Vec::new();
        std::fs::File::open(path)
            .and_then(|mut f| f.read_to_end(&mut bytes))
            .map_err(|e| Error::io(path, e))?;
        Image::parse_ppm(&bytes).map_err(|e| e.with_path(path))
    }
}

/// One rendered machine.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PixelRecord {
    pub index: u128,
    pub x: u64,
    pub y: u64,
    pub steps: u64,
    pub halted: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Render {
    pub image: Image,
    pub grid: PeanoGrid,
    /// Longest runtime among halting machines of the segment (0 if none halt).
    pub max_steps: u64,
    pub pixels: Vec<PixelRecord>,
}

impl Render {
    /// Sidecar CSV `index,x,y,steps,halted` in index order.
    pub fn write_sidecar<W: Write>(&self, mut w: W, provenance: Option<&str>) -> std::io::Result<()> {
        if let Some(p) = provenance {
            writeln!(w, "# {p}")?;
        }
        writeln!(w, "index,x,y,steps,halted")?;
        for p in &self.pixels {
            writeln!(w, "{},{},{},{},{}", p.index, p.x, p.y, p.steps, p.halted)?;
        }
        Ok(())
    }
}

/// Read a sidecar written by [`Render::write_sidecar`].
pub fn read_sidecar<R: BufRead>(r: R) -> Result<Vec<PixelRecord>> {
    let mut out = Vec::new();
    let mut header_seen = false;
    for (n, line) in r.lines().enumerate() {
        let line = line.map_err(|e| Error::parse(n + 1, e.to_string()))?;
        if line.starts_with('#') || line.is_empty() {
            continue;
        }
        if !header_seen {
            if line != "index,x,y,steps,halted" {
                return Err(Error::parse(n + 1, format!("unexpected sidecar header {line:?}")));
            }
            header_seen = true;
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 5 {
            return Err(Error::parse(n + 1, format!("expected 5 fields, found {}", f.len())));
        }
        let bad = |what: &str| Error::parse(n + 1, format!("bad {what}"));
        out.push(PixelRecord {
            index: f[0].parse().map_err(|_| bad("index"))?,
            x: f[1].parse().map_err(|_| bad("x"))?,
            y: f[2].parse().map_err(|_| bad("y"))?,
            steps: f[3].parse().map_err(|_| bad("steps"))?,
            halted: f[4].parse().map_err(|_| bad("halted flag"))?,
        });
    }
    Ok(out)
}

/// Render a contiguous, ascending segment of run records at level `k`.
pub fn render_field(records: &[RunRecord], k: u32, palette: &RuntimePalette) -> Result<Render> {
    if !(1..=MAX_RENDER_LEVEL).contains(&k) {
        return Err(Error::range("render level", k, 1, MAX_RENDER_LEVEL + 1));
    }
    let grid = PeanoGrid::new(k)?;
    let needed = records.len() as u128;
    if needed > u128::from(grid.capacity()) {
        return Err(Error::Capacity {
            needed,
            capacity: u128::from(grid.capacity()),
            level: k,
            suggested: PeanoGrid::minimal_for(needed),
        });
    }
    if let Some(first) = records.first() {
        for (i, r) in records.iter().enumerate() {
            if r.rule_index != first.rule_index + i as u128 {
                return Err(Error::Validation(format!(
                    "records must be a contiguous ascending range; position {i} holds index {} after start {}",
                    r.rule_index, first.rule_index
                )));
            }
            if r.space != first.space || r.budget != first.budget {
                return Err(Error::Consistency(format!(
                    "record {} comes from {} / budget {}, expected {} / budget {}",
                    r.rule_index, r.space, r.budget, first.space, first.budget
                )));
            }
        }
    }
    let max_steps = records.iter().filter(|r| r.halted).map(|r| r.steps).max().unwrap_or(0);
    let side = grid.side() as usize;
    let mut image = Image::new(side, side, palette.background);
    let mut pixels = Vec::with_capacity(records.len());
    for (t, r) in records.iter().enumerate() {
        let (x, y) = peano_xy(t as u64, k)?;
        image.set(x as usize, y as usize, palette.color(r.halted, r.steps, max_steps));
        pixels.push(PixelRecord {
            index: r.rule_index,
            x,
            y,
            steps: r.steps,
            halted: r.halted,
        });
    }
    Ok(Render {
        image,
        grid,
        max_steps,
        pixels,
    })
}
