use std::fs::File;
use std::io::{BufReader, Read, Write};
use std::path::Path;

use num_complex::Complex;

use super::{Domain, GridSpec, Lattice, WavePacket};
use crate::error::{Error, Result};
use crate::real::Real;

pub const BINARY_MAGIC: &[u8; 8] = b"NLSPKT01";

/// Position-space CSV: one row per grid point, coordinates then Re φ, Im φ.
pub fn write_csv<T: Real, W: Write>(packet: &WavePacket<T>, mut out: W) -> Result<()> {
    let p = packet.to_position();
    let lat = p.lattice();
    let dim = lat.dim();
    let header: Vec<String> = match dim {
        1 => vec!["x".into()],
        _ => (0..dim).map(|a| format!("x{a}")).collect(),
    };
    writeln!(out, "{},re,im", header.join(","))?;
    for (idx, v) in p.values().iter().enumerate() {
        for axis in 0..dim {
            write!(out, "{:.16e},", lat.position(idx, axis).as_f64())?;
        }
        writeln!(out, "{:.16e},{:.16e}", v.re.as_f64(), v.im.as_f64())?;
    }
    Ok(())
}

/// Raw dump: magic, dim (u64), points per dim (u64), L (f64), then
/// little-endian f64 (re, im) pairs in position representation.
pub fn write_binary<T: Real, W: Write>(packet: &WavePacket<T>, mut out: W) -> Result<()> {
    let p = packet.to_position();
    let spec = p.lattice().spec();
    out.write_all(BINARY_MAGIC)?;
    out.write_all(&(spec.dim as u64).to_le_bytes())?;
    out.write_all(&(spec.points_per_dim as u64).to_le_bytes())?;
    out.write_all(&spec.half_length.as_f64().to_le_bytes())?;
    for v in p.values() {
        out.write_all(&v.re.as_f64().to_le_bytes())?;
        out.write_all(&v.im.as_f64().to_le_bytes())?;
    }
    Ok(())
}

fn read_word<R: Read>(input: &mut R) -> Result<[u8; 8]> {
    let mut buf = [0u8; 8];
    input
        .read_exact(&mut buf)
        .map_err(|e| Error::Format(format!("truncated packet file: {e}")))?;
    Ok(buf)
}

pub fn read_binary<T: Real, R: Read>(mut input: R) -> Result<WavePacket<T>> {
    if &read_word(&mut input)? != BINARY_MAGIC {
        return Err(Error::Format("not a packet file (bad magic)".into()));
    }
    let dim = u64::from_le_bytes(read_word(&mut input)?);
    let points = u64::from_le_bytes(read_word(&mut input)?);
    let half_length = f64::from_le_bytes(read_word(&mut input)?);
    let spec = GridSpec::new(
        usize::try_from(dim).map_err(|_| Error::Format("dim out of range".into()))?,
        usize::try_from(points).map_err(|_| Error::Format("points out of range".into()))?,
        T::from_f64(half_length).ok_or_else(|| Error::Format("half length out of range".into()))?,
    )
    .map_err(|e| Error::Format(format!("bad header: {e}")))?;
    let lattice = Lattice::new(spec)?;
    let mut values = Vec::with_capacity(lattice.len());
    for _ in 0..lattice.len() {
        let re = f64::from_le_bytes(read_word(&mut input)?);
        let im = f64::from_le_bytes(read_word(&mut input)?);
        values.push(Complex::new(T::lit(re), T::lit(im)));
    }
    let mut rest = [0u8; 1];
    if input.read(&mut rest)? != 0 {
        return Err(Error::Format("trailing bytes after packet data".into()));
    }
    WavePacket::from_values(lattice, values, Domain::Position)
}

pub fn load_binary<T: Real>(path: impl AsRef<Path>) -> Result<WavePacket<T>> {
    read_binary(BufReader::new(File::open(path)?))
}
