//! Binary checkpoint format (all integers and floats little-endian):
//!
//! ```text
//! "A2DQ"            magic
//! u16               format version
//! u32               network tensor count
//! tensor record*    layers.{i}.weight, layers.{i}.bias, then dropout_rate (rank 0)
//! u64               adam step count
//! f32 x 4           lr, beta1, beta2, eps
//! u32               moment tensor count
//! tensor record*    adam.m.layers.{i}.{weight,bias}, then adam.v.layers.{i}.{weight,bias}
//! [u8; 32]          SHA-256 digest of every preceding byte
//!
//! tensor record := u32 name_len, name bytes, u32 rank, u32 dims[rank], f32 values[prod(dims)]
//! ```

use std::path::Path;

use sha2::{Digest, Sha256};

use super::adam::AdamState;
use super::network::{Dense, QNetwork};
use super::tensor::Tensor;
use crate::error::{Error, Result};

pub const CHECKPOINT_MAGIC: &[u8; 4] = b"A2DQ";
pub const CHECKPOINT_VERSION: u16 = 1;
const DIGEST_LEN: usize = 32;

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub net: QNetwork,
    pub adam: AdamState,
}

impl Checkpoint {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(CHECKPOINT_MAGIC);
        out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());

        let layers = self.net.layers();
        put_u32(&mut out, (layers.len() * 2 + 1) as u32);
        for (i, l) in layers.iter().enumerate() {
            put_tensor(&mut out, &format!("layers.{i}.weight"), &l.weights);
            put_tensor(&mut out, &format!("layers.{i}.bias"), &l.biases);
        }
        let dropout = Tensor::new(vec![], vec![self.net.dropout_rate()]).expect("scalar tensor");
        put_tensor(&mut out, "dropout_rate", &dropout);

        let a = &self.adam;
        out.extend_from_slice(&a.step_count.to_le_bytes());
        for v in [a.lr, a.beta1, a.beta2, a.eps] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        put_u32(&mut out, (layers.len() * 4) as u32);
        for (tag, moments) in [("m", &a.first_moment), ("v", &a.second_moment)] {
            for (i, l) in moments.iter().enumerate() {
                put_tensor(&mut out, &format!("adam.{tag}.layers.{i}.weight"), &l.weights);
                put_tensor(&mut out, &format!("adam.{tag}.layers.{i}.bias"), &l.biases);
            }
        }
        let digest = Sha256::digest(&out);
        out.extend_from_slice(&digest);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < CHECKPOINT_MAGIC.len() + 2 + DIGEST_LEN {
            return Err(corrupt("file too short"));
        }
        let (body, digest) = bytes.split_at(bytes.len() - DIGEST_LEN);
        let mut r = Reader { buf: body, pos: 0 };
        if r.take(4)? != CHECKPOINT_MAGIC {
            return Err(corrupt("bad magic"));
        }
        let version = u16::from_le_bytes(r.array()?);
        if version != CHECKPOINT_VERSION {
            return Err(corrupt(&format!("unsupported version {version}")));
        }
        if Sha256::digest(body).as_slice() != digest {
            return Err(corrupt("digest mismatch (truncated or corrupted file)"));
        }

        let count = r.u32()? as usize;
        if count < 3 || count.is_multiple_of(2) {
            return Err(corrupt("bad network tensor count"));
        }
        let n_layers = (count - 1) / 2;
        let layers = read_layers(&mut r, "", n_layers)?;
        let dropout = r.tensor("dropout_rate")?;
        if !dropout.shape().is_empty() {
            return Err(corrupt("dropout_rate must be a scalar"));
        }
        let net = QNetwork::from_layers(layers, dropout.data()[0])?;

        let step_count = u64::from_le_bytes(r.array()?);
        let [lr, beta1, beta2, eps] = [r.f32()?, r.f32()?, r.f32()?, r.f32()?];
        if r.u32()? as usize != n_layers * 4 {
            return Err(corrupt("bad moment tensor count"));
        }
        let first_moment = read_layers(&mut r, "adam.m.", n_layers)?;
        let second_moment = read_layers(&mut r, "adam.v.", n_layers)?;
        if r.pos != body.len() {
            return Err(corrupt("trailing bytes"));
        }
        let adam = AdamState {
            first_moment,
            second_moment,
            step_count,
            lr,
            beta1,
            beta2,
            eps,
        };
        if !adam.matches(&net) {
            return Err(corrupt("optimizer moments do not match network shape"));
        }
        Ok(Checkpoint { net, adam })
    }
}

pub fn save_checkpoint(net: &QNetwork, adam: &AdamState, path: &Path) -> Result<()> {
    let bytes = Checkpoint {
        net: net.clone(),
        adam: adam.clone(),
    }
    .to_bytes();
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Checkpoint::from_bytes(&bytes)
}

fn corrupt(msg: &str) -> Error {
    Error::Checkpoint(msg.to_string())
}

fn put_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn put_tensor(out: &mut Vec<u8>, name: &str, t: &Tensor) {
    put_u32(out, name.len() as u32);
    out.extend_from_slice(name.as_bytes());
    put_u32(out, t.shape().len() as u32);
    for d in t.shape() {
        put_u32(out, *d as u32);
    }
    for v in t.data() {
        out.extend_from_slice(&v.to_le_bytes());
    }
}

fn read_layers(r: &mut Reader<'_>, prefix: &str, n: usize) -> Result<Vec<Dense>> {
    (0..n)
        .map(|i| {
            let w = r.tensor(&format!("{prefix}layers.{i}.weight"))?;
            let b = r.tensor(&format!("{prefix}layers.{i}.bias"))?;
            Dense::new(w, b)
        })
        .collect()
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|e| *e <= self.buf.len());
        let end = end.ok_or_else(|| corrupt("unexpected end of file"))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn array<const N: usize>(&mut self) -> Result<[u8; N]> {
        Ok(self.take(N)?.try_into().expect("exact length"))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.array()?))
    }

    fn f32(&mut self) -> Result<f32> {
        Ok(f32::from_le_bytes(self.array()?))
    }

    fn tensor(&mut self, expected_name: &str) -> Result<Tensor> {
        let len = self.u32()? as usize;
        let name = self.take(len)?;
        if name != expected_name.as_bytes() {
            return Err(corrupt(&format!(
                "expected tensor '{expected_name}', found '{}'",
                String::from_utf8_lossy(name)
            )));
        }
        let rank = self.u32()? as usize;
        if rank > 2 {
            return Err(corrupt("tensor rank above 2"));
        }
        let dims = (0..rank)
            .map(|_| self.u32().map(|d| d as usize))
            .collect::<Result<Vec<_>>>()?;
        let n: usize = dims.iter().product();
        let raw = self.take(n.checked_mul(4).ok_or_else(|| corrupt("tensor too large"))?)?;
        let data = raw
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")))
            .collect();
        Tensor::new(dims, data)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{adam_step, mse_loss_and_grad, NetworkConfig};
    use crate::rng::{stream, Stream};

    fn trained_checkpoint(input: usize) -> Checkpoint {
        let cfg = NetworkConfig {
            hidden: vec![6, 5],
            dropout: 0.2,
        };
        let mut net = QNetwork::new(input, &cfg, 7, &mut stream(3, Stream::Init)).unwrap();
        let mut adam = AdamState::new(&net, 0.01);
        let x = Tensor::new(vec![2, input], (0..2 * input).map(|i| i as f32 * 0.01).collect()).unwrap();
        let (_, g) = mse_loss_and_grad(&net, &x, &[1, 6], &[1.0, -1.0], None).unwrap();
        adam_step(&mut net, &g, &mut adam).unwrap();
        Checkpoint { net, adam }
    }

    #[test]
    fn roundtrip_is_bit_exact() {
        let ck = trained_checkpoint(11);
        let bytes = ck.to_bytes();
        assert_eq!(&bytes[..4], b"A2DQ");
        assert_eq!(u16::from_le_bytes([bytes[4], bytes[5]]), CHECKPOINT_VERSION);
        let back = Checkpoint::from_bytes(&bytes).unwrap();
        assert_eq!(back.to_bytes(), bytes);
        assert_eq!(back, ck);
    }

    #[test]
    fn truncated_and_corrupted_rejected() {
        let bytes = trained_checkpoint(5).to_bytes();
        for cut in [0, 3, 10, bytes.len() / 2, bytes.len() - 1] {
            assert!(Checkpoint::from_bytes(&bytes[..cut]).is_err(), "cut at {cut}");
        }
        let mut flipped = bytes.clone();
        flipped[40] ^= 0x01;
        assert!(Checkpoint::from_bytes(&flipped).is_err());
        let mut wrong_version = bytes.clone();
        wrong_version[4] = 9;
        assert!(matches!(
            Checkpoint::from_bytes(&wrong_version),
            Err(Error::Checkpoint(_))
        ));
    }

    #[test]
    fn file_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("net.a2dq");
        let ck = trained_checkpoint(8);
        save_checkpoint(&ck.net, &ck.adam, &path).unwrap();
        assert_eq!(load_checkpoint(&path).unwrap(), ck);
    }
}
