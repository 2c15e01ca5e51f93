//! Versioned binary checkpoints for networks and optimizer state.
//!
//! Layout (all integers and floats little-endian):
//! magic "MFNC", format version u32, omega0 f64, layer count u32, then
//! per layer: out u32, in u32, activation tag u8, row-major weights and
//! bias as f64; an optimizer-presence flag, optionally the Adam scalars
//! and moment arrays; finally a sorted string metadata map.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use ndarray::{Array1, Array2};

use super::adam::AdamState;
use super::net::{Activation, DenseNet, Gradients, Layer};
use crate::{Error, Result};

const MAGIC: &[u8; 4] = b"MFNC";
const VERSION: u32 = 1;

/// A network plus optional optimizer state and free-form metadata
/// (seed, config hash, training provenance).
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub net: DenseNet,
    pub adam: Option<AdamState>,
    pub metadata: BTreeMap<String, String>,
}

/// Serializes a checkpoint; the write is atomic-enough for our purposes
/// (full buffer flushed once).
pub fn save_checkpoint(path: &Path, ckpt: &Checkpoint) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&ckpt.net.omega0.to_le_bytes())?;
    w.write_all(&(ckpt.net.layers.len() as u32).to_le_bytes())?;
    for layer in &ckpt.net.layers {
        w.write_all(&(layer.out_dim() as u32).to_le_bytes())?;
        w.write_all(&(layer.in_dim() as u32).to_le_bytes())?;
        w.write_all(&[layer.activation.tag()])?;
        write_floats(&mut w, layer.weights.iter())?;
        write_floats(&mut w, layer.bias.iter())?;
    }
    match &ckpt.adam {
        None => w.write_all(&[0u8])?,
        Some(adam) => {
            w.write_all(&[1u8])?;
            w.write_all(&adam.step.to_le_bytes())?;
            for s in [adam.learning_rate, adam.beta1, adam.beta2, adam.epsilon] {
                w.write_all(&s.to_le_bytes())?;
            }
            for grads in [&adam.m, &adam.v] {
                for arr in &grads.weights {
                    write_floats(&mut w, arr.iter())?;
                }
                for arr in &grads.biases {
                    write_floats(&mut w, arr.iter())?;
                }
            }
        }
    }
    w.write_all(&(ckpt.metadata.len() as u32).to_le_bytes())?;
    for (k, v) in &ckpt.metadata {
        for s in [k, v] {
            w.write_all(&(s.len() as u32).to_le_bytes())?;
            w.write_all(s.as_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Loads a checkpoint written by [`save_checkpoint`]. Forward passes of
/// the restored network match the original bitwise.
pub fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    let mut bytes = Vec::new();
    File::open(path)?.read_to_end(&mut bytes)?;
    let mut r = Cursor {
        bytes: &bytes,
        pos: 0,
        path: path.display().to_string(),
    };

    let magic = r.take(4)?;
    if magic != MAGIC {
        return Err(r.fail("not a checkpoint file (bad magic)"));
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(r.fail(format!(
            "unsupported checkpoint version {version}, expected {VERSION}"
        )));
    }
    let omega0 = r.f64()?;
    let n_layers = r.u32()? as usize;
    if n_layers == 0 || n_layers > 1024 {
        return Err(r.fail(format!("implausible layer count {n_layers}")));
    }
    let mut layers = Vec::with_capacity(n_layers);
    for _ in 0..n_layers {
        let out = r.u32()? as usize;
        let inp = r.u32()? as usize;
        let act = Activation::from_tag(r.u8()?)
            .ok_or_else(|| r.err("unknown activation tag"))?;
        let weights = Array2::from_shape_vec((out, inp), r.f64s(out * inp)?)
            .expect("shape matches length");
        let bias = Array1::from_vec(r.f64s(out)?);
        layers.push(Layer {
            weights,
            bias,
            activation: act,
        });
    }
    let net = DenseNet::new(layers, omega0)
        .map_err(|e| r.err(format!("invalid network in file: {e}")))?;

    let adam = match r.u8()? {
        0 => None,
        1 => {
            let step = r.u64()?;
            let learning_rate = r.f64()?;
            let beta1 = r.f64()?;
            let beta2 = r.f64()?;
            let epsilon = r.f64()?;
            let mut moments = Vec::with_capacity(2);
            for _ in 0..2 {
                let mut g = Gradients::zeros_like(&net);
                for arr in &mut g.weights {
                    let vals = r.f64s(arr.len())?;
                    arr.assign(
                        &Array2::from_shape_vec(arr.raw_dim(), vals).expect("shape"),
                    );
                }
                for arr in &mut g.biases {
                    arr.assign(&Array1::from_vec(r.f64s(arr.len())?));
                }
                moments.push(g);
            }
            let v = moments.pop().expect("two moments");
            let m = moments.pop().expect("two moments");
            Some(AdamState {
                m,
                v,
                step,
                learning_rate,
                beta1,
                beta2,
                epsilon,
            })
        }
        other => return Err(r.fail(format!("bad optimizer flag {other}"))),
    };

    let n_meta = r.u32()? as usize;
    let mut metadata = BTreeMap::new();
    for _ in 0..n_meta {
        let key = r.string()?;
        let val = r.string()?;
        metadata.insert(key, val);
    }
    if r.pos != bytes.len() {
        return Err(r.fail("trailing bytes after checkpoint payload"));
    }
    Ok(Checkpoint {
        net,
        adam,
        metadata,
    })
}

fn write_floats<'a, W: Write>(w: &mut W, vals: impl Iterator<Item = &'a f64>) -> Result<()> {
    for v in vals {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
    path: String,
}

impl<'a> Cursor<'a> {
    fn err(&self, reason: impl Into<String>) -> Error {
        Error::Format {
            path: self.path.clone(),
            reason: reason.into(),
        }
    }

    fn fail(&self, reason: impl Into<String>) -> Error {
        self.err(reason)
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.bytes.len() {
            return Err(self.err(format!(
                "unexpected end of file at byte {} (wanted {n} more)",
                self.pos
            )));
        }
        let slice = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(slice)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        let raw = self.take(8 * n)?;
        Ok(raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect())
    }

    fn string(&mut self) -> Result<String> {
        let len = self.u32()? as usize;
        let raw = self.take(len)?;
        String::from_utf8(raw.to_vec()).map_err(|_| self.err("metadata is not valid utf-8"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{siren_init, Gradients};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sample_checkpoint() -> Checkpoint {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut net = siren_init(&[6, 32, 32, 3], 30.0, &mut rng).unwrap();
        let mut adam = AdamState::new(&net, 1e-4);
        let mut g = Gradients::zeros_like(&net);
        g.weights[0][[0, 0]] = 0.25;
        g.biases[2][1] = -0.5;
        for _ in 0..3 {
            adam.step(&mut net, &g);
        }
        let mut metadata = BTreeMap::new();
        metadata.insert("seed".to_string(), "12345".to_string());
        metadata.insert("config_hash".to_string(), "deadbeef".to_string());
        Checkpoint {
            net,
            adam: Some(adam),
            metadata,
        }
    }

    #[test]
    fn round_trip_is_bitwise() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("net.ckpt");
        let ckpt = sample_checkpoint();
        save_checkpoint(&path, &ckpt).unwrap();
        let back = load_checkpoint(&path).unwrap();
        assert_eq!(ckpt, back);

        let x = [0.1, -0.4, 0.9, 0.0, 2.0, -1.5];
        let y0 = ckpt.net.forward(&x).unwrap();
        let y1 = back.net.forward(&x).unwrap();
        assert_eq!(y0, y1); // bitwise, not approximate
    }

    #[test]
    fn truncated_file_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("net.ckpt");
        save_checkpoint(&path, &sample_checkpoint()).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        let cut = path.with_extension("cut");
        std::fs::write(&cut, &bytes[..bytes.len() / 2]).unwrap();
        assert!(load_checkpoint(&cut).is_err());
    }

    #[test]
    fn version_mismatch_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("net.ckpt");
        save_checkpoint(&path, &sample_checkpoint()).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        bytes[4] = 99; // bump the version field
        std::fs::write(&path, &bytes).unwrap();
        let err = load_checkpoint(&path).unwrap_err();
        assert!(err.to_string().contains("version"));
    }

    #[test]
    fn metadata_preserved_verbatim() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("net.ckpt");
        let ckpt = sample_checkpoint();
        save_checkpoint(&path, &ckpt).unwrap();
        let back = load_checkpoint(&path).unwrap();
        assert_eq!(back.metadata.get("seed").unwrap(), "12345");
        assert_eq!(back.metadata.get("config_hash").unwrap(), "deadbeef");
    }

    #[test]
    fn checkpoint_without_optimizer() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("net.ckpt");
        let mut ckpt = sample_checkpoint();
        ckpt.adam = None;
        save_checkpoint(&path, &ckpt).unwrap();
        assert_eq!(load_checkpoint(&path).unwrap(), ckpt);
    }
}
