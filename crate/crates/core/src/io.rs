//! Field snapshots: flat little-endian binary of 64-bit floats behind a
//! small header, plus a JSON sidecar carrying the same metadata with exact
//! rational weights.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponents::DilationStructure;
use crate::grid::{GridFunction, GridSpec};
use crate::rational::{format_rational, parse_rational};

const MAGIC: &[u8; 4] = b"GNGS";
const VERSION: u32 = 1;

/// Sidecar metadata mirroring the binary header.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FieldSidecar {
    pub dims: usize,
    pub points: Vec<usize>,
    pub half_lengths: Vec<f64>,
    pub weights: Vec<String>,
    pub len: usize,
}

/// Writes `<path>` (binary) and `<path>.json` (sidecar).
pub fn save_field(path: &Path, u: &GridFunction, weights: &DilationStructure) -> Result<()> {
    let spec = u.spec();
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(spec.dims() as u32).to_le_bytes())?;
    for &n in spec.points() {
        w.write_all(&(n as u64).to_le_bytes())?;
    }
    for &l in spec.half_lengths() {
        w.write_all(&l.to_le_bytes())?;
    }
    w.write_all(&(weights.dims() as u32).to_le_bytes())?;
    for wt in weights.weights_f64() {
        w.write_all(&wt.to_le_bytes())?;
    }
    for v in u.values() {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;

    let sidecar = FieldSidecar {
        dims: spec.dims(),
        points: spec.points().to_vec(),
        half_lengths: spec.half_lengths().to_vec(),
        weights: weights.weights().iter().map(format_rational).collect(),
        len: spec.len(),
    };
    let json = serde_json::to_string_pretty(&sidecar)
        .map_err(|e| Error::Format(format!("sidecar encode: {e}")))?;
    std::fs::write(sidecar_path(path), json)?;
    Ok(())
}

pub fn sidecar_path(path: &Path) -> std::path::PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    std::path::PathBuf::from(s)
}

/// Reads a field snapshot; rejects mismatched lengths between header,
/// payload and sidecar.
pub fn load_field(path: &Path) -> Result<(GridFunction, DilationStructure)> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("bad magic in field snapshot".into()));
    }
    let version = read_u32(&mut r)?;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported snapshot version {version}")));
    }
    let dims = read_u32(&mut r)? as usize;
    if !(1..=3).contains(&dims) {
        return Err(Error::Format(format!("bad dims {dims} in snapshot")));
    }
    let mut points = Vec::with_capacity(dims);
    for _ in 0..dims {
        points.push(read_u64(&mut r)? as usize);
    }
    let mut half_lengths = Vec::with_capacity(dims);
    for _ in 0..dims {
        half_lengths.push(read_f64(&mut r)?);
    }
    let wdims = read_u32(&mut r)? as usize;
    if wdims != dims {
        return Err(Error::Format(format!(
            "weight count {wdims} does not match dims {dims}"
        )));
    }
    let mut wf = Vec::with_capacity(wdims);
    for _ in 0..wdims {
        wf.push(read_f64(&mut r)?);
    }
    let spec = GridSpec::new(points, half_lengths)?;
    let mut values = vec![0.0; spec.len()];
    let mut buf = [0u8; 8];
    for v in &mut values {
        r.read_exact(&mut buf)
            .map_err(|_| Error::Format("snapshot payload shorter than header length".into()))?;
        *v = f64::from_le_bytes(buf);
    }
    if r.read(&mut buf)? != 0 {
        return Err(Error::Format("snapshot payload longer than header length".into()));
    }

    // Prefer the exact rationals from the sidecar when present.
    let weights = match std::fs::read_to_string(sidecar_path(path)) {
        Ok(json) => {
            let sc: FieldSidecar = serde_json::from_str(&json)
                .map_err(|e| Error::Format(format!("sidecar decode: {e}")))?;
            if sc.len != spec.len() || sc.points != spec.points() {
                return Err(Error::Format("sidecar metadata disagrees with header".into()));
            }
            DilationStructure::new(
                sc.weights
                    .iter()
                    .map(|s| parse_rational(s))
                    .collect::<Result<_>>()?,
            )?
        }
        Err(_) => DilationStructure::new(
            wf.iter()
                .map(|w| {
                    crate::rational::parse_rational(&format!("{w}"))
                        .or_else(|_| approximate_rational(*w))
                })
                .collect::<Result<_>>()?,
        )?,
    };

    Ok((GridFunction::from_values(&spec, values)?, weights))
}

fn approximate_rational(w: f64) -> Result<crate::rational::Rat> {
    // weights are small rationals; a denominator scan recovers them exactly
    for den in 1..=64i64 {
        let num = (w * den as f64).round();
        if (num / den as f64 - w).abs() < 1e-12 {
            return Ok(crate::rational::Rat::new(num as i64, den));
        }
    }
    Err(Error::Format(format!("weight {w} is not a small rational")))
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64(r: &mut impl Read) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64(r: &mut impl Read) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    #[test]
    fn snapshot_round_trip() {
        let dir = std::env::temp_dir().join("gngs_io_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("phi.bin");

        let weights = DilationStructure::new(vec![rat(1, 1), rat(2, 1)]).unwrap();
        let spec = GridSpec::new(vec![16, 8], vec![1.5, 3.0]).unwrap();
        let u = GridFunction::sample(&spec, |x| (x[0] - 0.3 * x[1]).cos());
        save_field(&path, &u, &weights).unwrap();

        let (v, w2) = load_field(&path).unwrap();
        assert_eq!(u.values(), v.values());
        assert_eq!(u.spec(), v.spec());
        assert_eq!(w2.weights(), weights.weights());
    }

    #[test]
    fn snapshot_rejects_truncation() {
        let dir = std::env::temp_dir().join("gngs_io_test_trunc");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("phi.bin");
        let weights = DilationStructure::isotropic(1);
        let spec = GridSpec::line(16, 1.0).unwrap();
        let u = GridFunction::sample(&spec, |x| x[0]);
        save_field(&path, &u, &weights).unwrap();

        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() - 8]).unwrap();
        assert!(load_field(&path).is_err());

        let mut longer = bytes.clone();
        longer.extend_from_slice(&[0u8; 8]);
        std::fs::write(&path, &longer).unwrap();
        assert!(load_field(&path).is_err());
    }
}
