use std::fmt::Write as _;

use super::SurfaceRecord;
use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"PKTSREC\0";
const VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// Port energy fell below the decay threshold after this many steps.
    Decayed {
        step: usize,
    },
    StepLimit,
}

impl Termination {
    pub fn decayed(&self) -> bool {
        matches!(self, Termination::Decayed { .. })
    }
}

/// Port time series. Sample `n` of `v` is taken at `(n + v_offset) * dt`,
/// sample `n` of `i` at `(n + i_offset) * dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeriesRecord {
    pub dt: f64,
    pub v_offset: f64,
    pub i_offset: f64,
    pub v: Vec<f64>,
    pub i: Vec<f64>,
    pub z_ref: f64,
    pub termination: Termination,
    pub surfaces: Vec<SurfaceRecord>,
}

impl TimeSeriesRecord {
    pub fn steps(&self) -> usize {
        self.v.len()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("t_v_s,v_volt,t_i_s,i_amp\n");
        for (n, (v, i)) in self.v.iter().zip(&self.i).enumerate() {
            let _ = writeln!(
                out,
                "{:e},{:e},{:e},{:e}",
                (n as f64 + self.v_offset) * self.dt,
                v,
                (n as f64 + self.i_offset) * self.dt,
                i
            );
        }
        out
    }
}

/// Little-endian binary form: magic, version, dt, step count, then the
/// offsets, reference impedance, termination and both channels. Surface
/// spectra are not stored.
pub fn write_record(r: &TimeSeriesRecord) -> Vec<u8> {
    let mut b = Vec::with_capacity(64 + 16 * r.v.len());
    b.extend_from_slice(MAGIC);
    b.extend_from_slice(&VERSION.to_le_bytes());
    b.extend_from_slice(&r.dt.to_le_bytes());
    b.extend_from_slice(&(r.v.len() as u64).to_le_bytes());
    b.extend_from_slice(&r.v_offset.to_le_bytes());
    b.extend_from_slice(&r.i_offset.to_le_bytes());
    b.extend_from_slice(&r.z_ref.to_le_bytes());
    let term = match r.termination {
        Termination::Decayed { step } => step as u64,
        Termination::StepLimit => u64::MAX,
    };
    b.extend_from_slice(&term.to_le_bytes());
    for x in r.v.iter().chain(&r.i) {
        b.extend_from_slice(&x.to_le_bytes());
    }
    b
}

struct Reader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take<const N: usize>(&mut self) -> Result<[u8; N]> {
        let end = self.pos + N;
        let s = self
            .data
            .get(self.pos..end)
            .ok_or_else(|| Error::Format("record truncated".into()))?;
        self.pos = end;
        Ok(s.try_into().expect("length checked"))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take()?))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take()?))
    }
}

pub fn read_record(data: &[u8]) -> Result<TimeSeriesRecord> {
    let mut r = Reader { data, pos: 0 };
    if &r.take::<8>()? != MAGIC {
        return Err(Error::Format("not a patchkit time-series record".into()));
    }
    let version = u32::from_le_bytes(r.take()?);
    if version != VERSION {
        return Err(Error::Format(format!(
            "unsupported record version {version}"
        )));
    }
    let dt = r.f64()?;
    let steps = r.u64()? as usize;
    if data.len() != 8 + 4 + 8 * 6 + 16 * steps {
        return Err(Error::Format(
            "record length does not match its step count".into(),
        ));
    }
    let v_offset = r.f64()?;
    let i_offset = r.f64()?;
    let z_ref = r.f64()?;
    let termination = match r.u64()? {
        u64::MAX => Termination::StepLimit,
        s => Termination::Decayed { step: s as usize },
    };
    let v = (0..steps).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
    let i = (0..steps).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
    Ok(TimeSeriesRecord {
        dt,
        v_offset,
        i_offset,
        v,
        i,
        z_ref,
        termination,
        surfaces: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_round_trip() {
        let r = TimeSeriesRecord {
            dt: 1.25e-12,
            v_offset: 1.0,
            i_offset: 0.5,
            v: vec![0.0, 1.5, -2.25, f64::MIN_POSITIVE],
            i: vec![0.1, 0.2, 0.3, 0.4],
            z_ref: 50.0,
            termination: Termination::Decayed { step: 4 },
            surfaces: Vec::new(),
        };
        let bytes = write_record(&r);
        assert_eq!(&bytes[..8], MAGIC);
        assert_eq!(read_record(&bytes).unwrap(), r);
        assert!(read_record(&bytes[..bytes.len() - 1]).is_err());
        let mut bad = bytes.clone();
        bad[8] = 9;
        assert!(matches!(read_record(&bad), Err(Error::Format(_))));
    }
}
