//! Sample columns on disk: one JSON header line followed by little-endian f64
//! values (complex draws as `re, im` pairs), and a CSV form for plotting.

use std::io::{BufRead, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{SampleVector, Samples, StableError, StableSpec};
use crate::spaces::ScalarField;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleHeader {
    pub r: f64,
    pub scale: f64,
    pub field: ScalarField,
    pub n: usize,
    pub seed: u64,
    pub stream_id: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub calibration: Option<f64>,
}

impl SampleVector {
    pub fn header(&self) -> SampleHeader {
        SampleHeader {
            r: self.spec.r(),
            scale: self.spec.scale(),
            field: self.spec.field(),
            n: self.len(),
            seed: self.seed,
            stream_id: self.stream_id,
            calibration: self.calibration,
        }
    }

    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<(), StableError> {
        let header = serde_json::to_string(&self.header()).map_err(|e| StableError::Format(e.to_string()))?;
        writeln!(w, "{header}")?;
        match &self.samples {
            Samples::Real(v) => {
                for x in v {
                    w.write_all(&x.to_le_bytes())?;
                }
            }
            Samples::Complex(v) => {
                for z in v {
                    w.write_all(&z.re.to_le_bytes())?;
                    w.write_all(&z.im.to_le_bytes())?;
                }
            }
        }
        Ok(())
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<(), StableError> {
        match &self.samples {
            Samples::Real(v) => {
                writeln!(w, "index,value")?;
                for (i, x) in v.iter().enumerate() {
                    writeln!(w, "{i},{x}")?;
                }
            }
            Samples::Complex(v) => {
                writeln!(w, "index,re,im")?;
                for (i, z) in v.iter().enumerate() {
                    writeln!(w, "{i},{},{}", z.re, z.im)?;
                }
            }
        }
        Ok(())
    }
}

/// Reads a column written by [`SampleVector::write_binary`].
pub fn read_binary<R: BufRead>(mut r: R) -> Result<SampleVector, StableError> {
    let mut line = String::new();
    r.read_line(&mut line)?;
    let header: SampleHeader = serde_json::from_str(line.trim_end()).map_err(|e| StableError::Format(e.to_string()))?;
    let spec = StableSpec::new(header.r, header.scale, header.field)?;
    let width = match header.field {
        ScalarField::Real => 1,
        ScalarField::Complex => 2,
    };
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() != header.n * width * 8 {
        return Err(StableError::Format(format!("expected {} values, found {} bytes", header.n * width, bytes.len())));
    }
    let floats: Vec<f64> =
        bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8"))).collect();
    let samples = match header.field {
        ScalarField::Real => Samples::Real(floats),
        ScalarField::Complex => Samples::Complex(floats.chunks_exact(2).map(|c| Complex64::new(c[0], c[1])).collect()),
    };
    Ok(SampleVector { spec, seed: header.seed, stream_id: header.stream_id, samples, calibration: header.calibration })
}
