//! Versioned binary checkpoints: run configuration, vocabulary and every
//! parameter tensor with its shape. Numbers are little-endian.
//!
//! ```text
//! magic "PTRPCKPT" | version u32 | config text | words | tags | labels
//! | tensor count u64 | per tensor: name, rank u64, dims u64*, data f64*
//! ```
//! Strings and string lists are length-prefixed with a u64.

use std::io::{Read, Write};
use std::path::Path;

use ptrparse_core::config::RunConfig;
use ptrparse_core::scorer::{Params, ScorerModel, VocabSizes, TENSOR_NAMES};
use ptrparse_core::vocab::{Interner, Vocabulary};
use thiserror::Error;

pub const MAGIC: &[u8; 8] = b"PTRPCKPT";
pub const VERSION: u32 = 1;

// guards against absurd allocations from a corrupt length field
const MAX_LEN: u64 = 1 << 32;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("not a checkpoint file (bad magic bytes)")]
    BadMagic,
    #[error("checkpoint version {found} is not supported (expected {expected})")]
    Version { found: u32, expected: u32 },
    #[error("corrupt checkpoint: {0}")]
    Corrupt(String),
    #[error("checkpoint configuration: {0}")]
    Config(String),
    #[error("tensor {index}: expected {expected:?}, found {found:?}")]
    TensorName {
        index: usize,
        expected: &'static str,
        found: String,
    },
    #[error("tensor {name}: expected shape {expected:?}, found {found:?}")]
    Shape {
        name: &'static str,
        expected: Vec<usize>,
        found: Vec<usize>,
    },
}

/// A trained model with everything needed to parse new text.
#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub config: RunConfig,
    pub vocab: Vocabulary,
    pub model: ScorerModel,
}

impl Checkpoint {
    pub fn save(&self, path: &Path) -> Result<(), CheckpointError> {
        let mut bytes = Vec::new();
        self.write_to(&mut bytes)?;
        std::fs::write(path, bytes)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, CheckpointError> {
        let bytes = std::fs::read(path)?;
        Checkpoint::read_from(&mut bytes.as_slice())
    }

    pub fn write_to<W: Write>(&self, out: &mut W) -> Result<(), CheckpointError> {
        out.write_all(MAGIC)?;
        out.write_all(&VERSION.to_le_bytes())?;
        write_str(out, &self.config.to_text())?;
        for table in [&self.vocab.words, &self.vocab.tags, &self.vocab.labels] {
            write_u64(out, table.len() as u64)?;
            for item in table.items() {
                write_str(out, item)?;
            }
        }
        let tensors = self.model.params.tensors();
        write_u64(out, tensors.len() as u64)?;
        for (name, t) in TENSOR_NAMES.iter().zip(tensors) {
            write_str(out, name)?;
            write_u64(out, t.shape.len() as u64)?;
            for &d in &t.shape {
                write_u64(out, d as u64)?;
            }
            for &v in &t.data {
                out.write_all(&v.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_from<R: Read>(input: &mut R) -> Result<Self, CheckpointError> {
        let mut magic = [0u8; 8];
        read_exact(input, &mut magic)?;
        if &magic != MAGIC {
            return Err(CheckpointError::BadMagic);
        }
        let version = read_u32(input)?;
        if version != VERSION {
            return Err(CheckpointError::Version {
                found: version,
                expected: VERSION,
            });
        }
        let config = RunConfig::from_text(&read_str(input)?).map_err(|e| CheckpointError::Config(e.to_string()))?;
        let mut tables = Vec::with_capacity(3);
        for _ in 0..3 {
            let count = read_len(input)?;
            let mut items = Vec::with_capacity(count.min(1 << 16));
            for _ in 0..count {
                items.push(read_str(input)?);
            }
            tables.push(Interner::from_items(items));
        }
        let labels = tables.pop().expect("three tables");
        let tags = tables.pop().expect("three tables");
        let words = tables.pop().expect("three tables");
        let vocab = Vocabulary {
            words,
            tags,
            labels,
            word_freq: Default::default(),
        };

        let sizes = VocabSizes::of(&vocab);
        let mut params: Params = ScorerModel::zeros(config.dims, sizes).params;
        let count = read_len(input)?;
        if count != TENSOR_NAMES.len() {
            return Err(CheckpointError::Corrupt(format!(
                "{} tensors, expected {}",
                count,
                TENSOR_NAMES.len()
            )));
        }
        for (index, (name, tensor)) in TENSOR_NAMES.iter().zip(params.tensors_mut()).enumerate() {
            let found = read_str(input)?;
            if found != *name {
                return Err(CheckpointError::TensorName {
                    index,
                    expected: name,
                    found,
                });
            }
            let rank = read_len(input)?;
            let mut shape = Vec::with_capacity(rank.min(8));
            for _ in 0..rank {
                shape.push(read_len(input)?);
            }
            if shape != tensor.shape {
                return Err(CheckpointError::Shape {
                    name,
                    expected: tensor.shape.clone(),
                    found: shape,
                });
            }
            let mut buf = [0u8; 8];
            for v in tensor.data.iter_mut() {
                read_exact(input, &mut buf)?;
                *v = f64::from_le_bytes(buf);
            }
        }
        let mut rest = Vec::new();
        input.read_to_end(&mut rest)?;
        if !rest.is_empty() {
            return Err(CheckpointError::Corrupt(format!("{} trailing bytes", rest.len())));
        }
        let model = ScorerModel::from_params(config.dims, sizes, params)
            .map_err(|e| CheckpointError::Corrupt(e.to_string()))?;
        Ok(Checkpoint { config, vocab, model })
    }
}

fn write_u64<W: Write>(out: &mut W, v: u64) -> std::io::Result<()> {
    out.write_all(&v.to_le_bytes())
}

fn write_str<W: Write>(out: &mut W, s: &str) -> std::io::Result<()> {
    write_u64(out, s.len() as u64)?;
    out.write_all(s.as_bytes())
}

fn read_exact<R: Read>(input: &mut R, buf: &mut [u8]) -> Result<(), CheckpointError> {
    input.read_exact(buf).map_err(|e| {
        if e.kind() == std::io::ErrorKind::UnexpectedEof {
            CheckpointError::Corrupt("truncated file".into())
        } else {
            CheckpointError::Io(e)
        }
    })
}

fn read_u32<R: Read>(input: &mut R) -> Result<u32, CheckpointError> {
    let mut b = [0u8; 4];
    read_exact(input, &mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_len<R: Read>(input: &mut R) -> Result<usize, CheckpointError> {
    let mut b = [0u8; 8];
    read_exact(input, &mut b)?;
    let v = u64::from_le_bytes(b);
    if v > MAX_LEN {
        return Err(CheckpointError::Corrupt(format!("length field {} is too large", v)));
    }
    Ok(v as usize)
}

fn read_str<R: Read>(input: &mut R) -> Result<String, CheckpointError> {
    let len = read_len(input)?;
    let mut buf = vec![0u8; len];
    read_exact(input, &mut buf)?;
    String::from_utf8(buf).map_err(|_| CheckpointError::Corrupt("string is not UTF-8".into()))
}
