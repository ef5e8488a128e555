//! The `.dppx` record: just enough noisy statistics to redraw a pixelized
//! image.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! offset  size  field
//! 0       4     magic "DPPX"
//! 4       2     version (1)
//! 6       1     mode (1 = uniform, 2 = adaptive)
//! 7       1     reserved (0)
//! 8       4     rows M
//! 12      4     cols N
//! 16      2     grid side b
//! 18      2     subgrid factor n
//! 20      ...   payload
//! end-4   4     CRC-32 (IEEE) of every preceding byte
//! ```
//!
//! Uniform payload: `G_R·G_C` mean bytes. Adaptive payload: `G_R·G_C`
//! binary32 mask means, a u32 simple-grid count, the simple means, then the
//! complex submeans. Which grids are simple is recomputed from the mask
//! means on decode.
//!
//! ε, m and the noise seed are never stored; the seed in particular would
//! let anyone subtract the noise back out.

use crate::adaptive::{reassemble, AdaptiveMeans, RegionClassification};
use crate::error::{Error, Result};
use crate::image::{grid_dims, GrayImage};
use crate::uniform::{broadcast_means, GridMeans};

pub const MAGIC: [u8; 4] = *b"DPPX";
pub const VERSION: u16 = 1;
pub const HEADER_LEN: usize = 20;
pub const CRC_LEN: usize = 4;

const MODE_UNIFORM: u8 = 1;
const MODE_ADAPTIVE: u8 = 2;

#[derive(Clone, Debug, PartialEq)]
pub enum Payload {
    Uniform(GridMeans),
    Adaptive(AdaptiveMeans),
}

#[derive(Clone, Debug, PartialEq)]
pub struct PixelRecord {
    rows: usize,
    cols: usize,
    payload: Payload,
}

impl PixelRecord {
    pub fn uniform(rows: usize, cols: usize, means: GridMeans) -> Result<Self> {
        Self::new(rows, cols, Payload::Uniform(means))
    }

    pub fn adaptive(rows: usize, cols: usize, means: AdaptiveMeans) -> Result<Self> {
        Self::new(rows, cols, Payload::Adaptive(means))
    }

    fn new(rows: usize, cols: usize, payload: Payload) -> Result<Self> {
        let geom = match &payload {
            Payload::Uniform(m) => *m.geometry(),
            Payload::Adaptive(m) => *m.geometry(),
        };
        if grid_dims(rows, cols, geom.side())? != geom {
            return Err(Error::invalid(format!(
                "means for a {}x{} image cannot describe a {rows}x{cols} image",
                geom.rows(),
                geom.cols()
            )));
        }
        if rows > u32::MAX as usize || cols > u32::MAX as usize {
            return Err(Error::invalid(format!("{rows}x{cols} exceeds the record's u32 dimensions")));
        }
        if geom.side() > u16::MAX as usize {
            return Err(Error::invalid(format!("grid side {} exceeds u16", geom.side())));
        }
        Ok(Self { rows, cols, payload })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn side(&self) -> usize {
        match &self.payload {
            Payload::Uniform(m) => m.geometry().side(),
            Payload::Adaptive(m) => m.geometry().side(),
        }
    }

    pub fn subgrid_factor(&self) -> usize {
        match &self.payload {
            Payload::Uniform(_) => 1,
            Payload::Adaptive(m) => m.subgrid_factor(),
        }
    }

    pub fn payload(&self) -> &Payload {
        &self.payload
    }

    pub fn is_adaptive(&self) -> bool {
        matches!(self.payload, Payload::Adaptive(_))
    }

    /// Number of bytes [`encode`] produces for this record.
    pub fn encoded_len(&self) -> usize {
        let body = match &self.payload {
            Payload::Uniform(m) => m.values().len(),
            Payload::Adaptive(m) => {
                4 * m.classification().mask_means().len()
                    + 4
                    + m.simple_means().len()
                    + m.complex_submeans().len()
            }
        };
        HEADER_LEN + body + CRC_LEN
    }
}

pub fn encode(record: &PixelRecord) -> Vec<u8> {
    let mut out = Vec::with_capacity(record.encoded_len());
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.push(match record.payload {
        Payload::Uniform(_) => MODE_UNIFORM,
        Payload::Adaptive(_) => MODE_ADAPTIVE,
    });
    out.push(0);
    out.extend_from_slice(&(record.rows as u32).to_le_bytes());
    out.extend_from_slice(&(record.cols as u32).to_le_bytes());
    out.extend_from_slice(&(record.side() as u16).to_le_bytes());
    out.extend_from_slice(&(record.subgrid_factor() as u16).to_le_bytes());
    match &record.payload {
        Payload::Uniform(means) => out.extend_from_slice(means.values()),
        Payload::Adaptive(means) => {
            for m in means.classification().mask_means() {
                out.extend_from_slice(&m.to_le_bytes());
            }
            out.extend_from_slice(&(means.simple_means().len() as u32).to_le_bytes());
            out.extend_from_slice(means.simple_means());
            out.extend_from_slice(means.complex_submeans());
        }
    }
    let crc = crc32fast::hash(&out);
    out.extend_from_slice(&crc.to_le_bytes());
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
}

impl<'a> Reader<'a> {
    fn take(&mut self, len: usize, what: &str) -> Result<&'a [u8]> {
        if self.bytes.len() < len {
            return Err(Error::corrupt(format!(
                "truncated {what}: need {len} bytes, {} left",
                self.bytes.len()
            )));
        }
        let (head, rest) = self.bytes.split_at(len);
        self.bytes = rest;
        Ok(head)
    }

    fn array<const N: usize>(&mut self, what: &str) -> Result<[u8; N]> {
        Ok(self.take(N, what)?.try_into().expect("length checked"))
    }
}

pub fn decode(bytes: &[u8]) -> Result<PixelRecord> {
    if bytes.len() >= MAGIC.len() && bytes[..4] != MAGIC {
        return Err(Error::NotARecord);
    }
    if bytes.len() < HEADER_LEN + CRC_LEN {
        return Err(Error::corrupt(format!(
            "{} bytes is shorter than the {}-byte minimum",
            bytes.len(),
            HEADER_LEN + CRC_LEN
        )));
    }
    let (body, trailer) = bytes.split_at(bytes.len() - CRC_LEN);
    let stored = u32::from_le_bytes(trailer.try_into().expect("4-byte trailer"));
    let computed = crc32fast::hash(body);
    if stored != computed {
        return Err(Error::Checksum { stored, computed });
    }

    let mut r = Reader { bytes: &body[4..] };
    let version = u16::from_le_bytes(r.array("version")?);
    if version > VERSION || version == 0 {
        return Err(Error::UnsupportedVersion(version));
    }
    let [mode, _reserved] = r.array("mode")?;
    let rows = u32::from_le_bytes(r.array("rows")?) as usize;
    let cols = u32::from_le_bytes(r.array("cols")?) as usize;
    let side = u16::from_le_bytes(r.array("grid side")?) as usize;
    let factor = u16::from_le_bytes(r.array("subgrid factor")?) as usize;
    let geom = grid_dims(rows, cols, side).map_err(|e| Error::corrupt(format!("bad geometry: {e}")))?;
    let grids = geom.grid_count();

    let payload = match mode {
        MODE_UNIFORM => {
            if factor != 1 {
                return Err(Error::corrupt(format!("uniform record with subgrid factor {factor}")));
            }
            let values = r.take(grids, "grid means")?.to_vec();
            Payload::Uniform(GridMeans::new(geom, values)?)
        }
        MODE_ADAPTIVE => {
            let raw = r.take(4 * grids, "mask means")?;
            let mask_means = raw
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes(c.try_into().expect("4-byte chunk")))
                .collect();
            let classification = RegionClassification::from_mask_means(geom, mask_means)
                .map_err(|e| Error::corrupt(e.to_string()))?;
            let simple = u32::from_le_bytes(r.array("simple count")?) as usize;
            if simple != classification.simple_count() {
                return Err(Error::corrupt(format!(
                    "header claims {simple} simple grids, mask means give {}",
                    classification.simple_count()
                )));
            }
            if factor == 0 || !side.is_multiple_of(factor) {
                return Err(Error::corrupt(format!("subgrid factor {factor} does not divide {side}")));
            }
            let simple_means = r.take(simple, "simple means")?.to_vec();
            let complex_len = classification.complex_count() * factor * factor;
            let complex = r.take(complex_len, "complex submeans")?.to_vec();
            Payload::Adaptive(AdaptiveMeans::new(classification, factor, simple_means, complex)?)
        }
        other => return Err(Error::corrupt(format!("unknown mode {other}"))),
    };
    if !r.bytes.is_empty() {
        return Err(Error::corrupt(format!("{} trailing bytes after payload", r.bytes.len())));
    }
    PixelRecord::new(rows, cols, payload)
}

/// Redraws the pixelized image a record was produced from.
pub fn reconstruct(record: &PixelRecord) -> Result<GrayImage> {
    match &record.payload {
        Payload::Uniform(means) => broadcast_means(means, record.rows, record.cols),
        Payload::Adaptive(means) => reassemble(means, record.rows, record.cols),
    }
}
