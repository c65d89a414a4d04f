//! `LENM` checkpoints: magic, kind byte, u32 tensor count, then per tensor
//! u32 rank, u32 dims and an f32 payload, all little-endian.
//!
//! Tensor 0 holds `[layers, relations, damping, pr_tol, pr_max_iters]`; PPR
//! models store their restart set as tensor 1; parameters follow.

use std::fs;
use std::path::Path;

use ndarray::Array2;

use super::{ModelKind, TrainedModel};
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"LENM";

fn put_tensor(buf: &mut Vec<u8>, dims: &[usize], values: impl Iterator<Item = f64>) {
    buf.extend_from_slice(&(dims.len() as u32).to_le_bytes());
    for &d in dims {
        buf.extend_from_slice(&(d as u32).to_le_bytes());
    }
    for v in values {
        buf.extend_from_slice(&(v as f32).to_le_bytes());
    }
}

pub fn write_checkpoint(path: impl AsRef<Path>, model: &TrainedModel) -> Result<()> {
    let path = path.as_ref();
    let mut buf = Vec::new();
    buf.extend_from_slice(MAGIC);
    buf.push(model.kind.code());
    let has_restart = model.kind == ModelKind::Ppr;
    let count = 1 + usize::from(has_restart) + model.params.len();
    buf.extend_from_slice(&(count as u32).to_le_bytes());
    let meta = [
        model.layers as f64,
        model.num_relations as f64,
        model.damping,
        model.pr_tol,
        model.pr_max_iters as f64,
    ];
    put_tensor(&mut buf, &[meta.len()], meta.into_iter());
    if has_restart {
        put_tensor(&mut buf, &[model.restart.len()], model.restart.iter().map(|&v| v as f64));
    }
    for p in &model.params {
        put_tensor(&mut buf, &[p.nrows(), p.ncols()], p.iter().copied());
    }
    fs::write(path, buf).map_err(|e| Error::io(path, e))
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8]> {
        let end = self.pos + n;
        let s = self
            .bytes
            .get(self.pos..end)
            .ok_or_else(|| Error::Format("truncated LENM checkpoint".into()))?;
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<usize> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()) as usize)
    }

    fn tensor(&mut self) -> Result<(Vec<usize>, Vec<f64>)> {
        let rank = self.u32()?;
        let dims = (0..rank).map(|_| self.u32()).collect::<Result<Vec<_>>>()?;
        let len: usize = dims.iter().product();
        let values = self
            .take(len * 4)?
            .chunks_exact(4)
            .map(|c| f64::from(f32::from_le_bytes(c.try_into().unwrap())))
            .collect();
        Ok((dims, values))
    }
}

pub fn read_checkpoint(path: impl AsRef<Path>) -> Result<TrainedModel> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let mut r = Reader { bytes: &bytes, pos: 0 };
    if r.take(4)? != MAGIC {
        return Err(Error::Format(format!("{} is not a LENM checkpoint", path.display())));
    }
    let kind = ModelKind::from_code(r.take(1)?[0])
        .ok_or_else(|| Error::Format("unknown model kind byte".into()))?;
    let count = r.u32()?;
    let (_, meta) = r.tensor()?;
    if meta.len() != 5 {
        return Err(Error::Format("malformed checkpoint metadata".into()));
    }
    let mut model = TrainedModel {
        kind,
        params: Vec::new(),
        loss_trace: Vec::new(),
        layers: meta[0] as usize,
        num_relations: meta[1] as usize,
        damping: meta[2],
        pr_tol: meta[3],
        pr_max_iters: meta[4] as usize,
        restart: Vec::new(),
        notes: Vec::new(),
    };
    let mut remaining = count.saturating_sub(1);
    if kind == ModelKind::Ppr {
        model.restart = r.tensor()?.1.into_iter().map(|v| v as usize).collect();
        remaining = remaining.saturating_sub(1);
    }
    for _ in 0..remaining {
        let (dims, values) = r.tensor()?;
        if dims.len() != 2 {
            return Err(Error::Format("parameter tensors must have rank 2".into()));
        }
        model.params.push(
            Array2::from_shape_vec((dims[0], dims[1]), values)
                .map_err(|e| Error::Format(e.to_string()))?,
        );
    }
    if r.pos != bytes.len() {
        return Err(Error::Format("trailing bytes after last tensor".into()));
    }
    Ok(model)
}
