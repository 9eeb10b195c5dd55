//! JSON model files: a dimension header, the toy configuration and named
//! row-major tensors.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{anyhow, bail, ensure, Context, Result};
use serde::{Deserialize, Serialize};
use stylekv_core::decoder::{DecoderWeights, LayerWeights};
use stylekv_core::embedding::EncoderWeights;
use stylekv_core::numerics::Matrix;
use stylekv_core::toymodel::{ToyConfig, ToyModel};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Header {
    pub layers: usize,
    pub d_model: usize,
    pub vocab: usize,
    pub max_len: usize,
    pub style_len: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tensor {
    pub name: String,
    pub shape: Vec<usize>,
    pub data: Vec<f32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightsFile {
    pub format_version: u32,
    pub header: Header,
    pub toy: ToyConfig,
    pub tensors: Vec<Tensor>,
}

fn matrix(name: String, m: &Matrix) -> Tensor {
    Tensor {
        name,
        shape: vec![m.rows(), m.cols()],
        data: m.as_slice().to_vec(),
    }
}

fn vector(name: String, v: &[f32]) -> Tensor {
    Tensor {
        name,
        shape: vec![v.len()],
        data: v.to_vec(),
    }
}

impl WeightsFile {
    pub fn from_model(model: &ToyModel) -> Self {
        let dec = &model.decoder;
        let dims = dec.dims();
        let mut tensors = vec![
            matrix("decoder.token_embedding".into(), &dec.token_embedding),
            matrix("decoder.text_embedding".into(), &dec.text_embedding),
            vector("decoder.start_embedding".into(), &dec.start_embedding),
            matrix("decoder.positional".into(), &dec.positional),
            matrix("decoder.head".into(), &dec.head),
        ];
        for (l, layer) in dec.layers.iter().enumerate() {
            let p = |field: &str| format!("decoder.layers.{l}.{field}");
            for (field, m) in [
                ("self_q", &layer.self_q),
                ("self_k", &layer.self_k),
                ("self_v", &layer.self_v),
                ("self_o", &layer.self_o),
                ("cross_q", &layer.cross_q),
                ("cross_k", &layer.cross_k),
                ("cross_v", &layer.cross_v),
                ("cross_o", &layer.cross_o),
                ("ff_in", &layer.ff_in),
                ("ff_out", &layer.ff_out),
            ] {
                tensors.push(matrix(p(field), m));
            }
            tensors.push(vector(p("ff_in_bias"), &layer.ff_in_bias));
            tensors.push(vector(p("ff_out_bias"), &layer.ff_out_bias));
        }
        let enc = &model.encoder;
        for (field, m) in [
            ("token_embedding", &enc.token_embedding),
            ("wq", &enc.wq),
            ("wk", &enc.wk),
            ("wv", &enc.wv),
            ("wo", &enc.wo),
        ] {
            tensors.push(matrix(format!("encoder.{field}"), m));
        }
        Self {
            format_version: FORMAT_VERSION,
            header: Header {
                layers: dims.layers,
                d_model: dims.d_model,
                vocab: dims.vocab,
                max_len: dims.max_len,
                style_len: model.config.style_len,
            },
            toy: model.config,
            tensors,
        }
    }

    pub fn into_model(self) -> Result<ToyModel> {
        ensure!(
            self.format_version == FORMAT_VERSION,
            "unsupported weights format version {} (expected {FORMAT_VERSION})",
            self.format_version
        );
        let mut named = BTreeMap::new();
        for t in self.tensors {
            let count: usize = t.shape.iter().product();
            ensure!(
                count == t.data.len(),
                "tensor {} declares shape {:?} ({count} elements) but holds {}",
                t.name,
                t.shape,
                t.data.len()
            );
            if named.insert(t.name.clone(), t).is_some() {
                bail!("duplicate tensor name");
            }
        }
        let mut take = |name: String| named.remove(&name).ok_or_else(|| anyhow!("missing tensor {name}"));
        let mut mat = |name: String| -> Result<Matrix> {
            let t = take(name.clone())?;
            ensure!(t.shape.len() == 2, "tensor {name} must be 2-dimensional");
            Ok(Matrix::new(t.shape[0], t.shape[1], t.data)?)
        };
        let token_embedding = mat("decoder.token_embedding".into())?;
        let text_embedding = mat("decoder.text_embedding".into())?;
        let positional = mat("decoder.positional".into())?;
        let head = mat("decoder.head".into())?;
        let mut layers = Vec::with_capacity(self.header.layers);
        for l in 0..self.header.layers {
            let p = |field: &str| format!("decoder.layers.{l}.{field}");
            layers.push(LayerWeights {
                self_q: mat(p("self_q"))?,
                self_k: mat(p("self_k"))?,
                self_v: mat(p("self_v"))?,
                self_o: mat(p("self_o"))?,
                cross_q: mat(p("cross_q"))?,
                cross_k: mat(p("cross_k"))?,
                cross_v: mat(p("cross_v"))?,
                cross_o: mat(p("cross_o"))?,
                ff_in: mat(p("ff_in"))?,
                ff_in_bias: Vec::new(),
                ff_out: mat(p("ff_out"))?,
                ff_out_bias: Vec::new(),
            });
        }
        let encoder = EncoderWeights {
            token_embedding: mat("encoder.token_embedding".into())?,
            wq: mat("encoder.wq".into())?,
            wk: mat("encoder.wk".into())?,
            wv: mat("encoder.wv".into())?,
            wo: mat("encoder.wo".into())?,
        };
        let mut vec = |name: String| -> Result<Vec<f32>> {
            let t = take(name.clone())?;
            ensure!(t.shape.len() == 1, "tensor {name} must be 1-dimensional");
            Ok(t.data)
        };
        let start_embedding = vec("decoder.start_embedding".into())?;
        for (l, layer) in layers.iter_mut().enumerate() {
            layer.ff_in_bias = vec(format!("decoder.layers.{l}.ff_in_bias"))?;
            layer.ff_out_bias = vec(format!("decoder.layers.{l}.ff_out_bias"))?;
        }
        if let Some(extra) = named.keys().next() {
            bail!("unexpected tensor {extra}");
        }
        let decoder = DecoderWeights {
            layers,
            token_embedding,
            text_embedding,
            start_embedding,
            positional,
            head,
        };
        decoder.validate()?;
        encoder.validate()?;
        self.toy.validate()?;
        let dims = decoder.dims();
        let header = Header {
            layers: dims.layers,
            d_model: dims.d_model,
            vocab: dims.vocab,
            max_len: dims.max_len,
            style_len: self.toy.style_len,
        };
        ensure!(header == self.header, "tensor shapes disagree with header {:?}", self.header);
        ensure!(dims == self.toy.dims(), "tensor shapes disagree with the toy configuration");
        Ok(ToyModel {
            config: self.toy,
            decoder,
            encoder,
        })
    }
}

pub fn to_json(model: &ToyModel) -> Result<String> {
    Ok(serde_json::to_string(&WeightsFile::from_model(model))?)
}

pub fn from_json(text: &str) -> Result<ToyModel> {
    let file: WeightsFile = serde_json::from_str(text).context("parsing weights file")?;
    file.into_model()
}

pub fn load(path: &Path) -> Result<ToyModel> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    from_json(&text).with_context(|| format!("loading model {}", path.display()))
}
