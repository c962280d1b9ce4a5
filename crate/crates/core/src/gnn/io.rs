// SPDX-License-Identifier: Apache-2.0

//! Versioned text container for trained models.

use std::fs;
use std::io::Write;
use std::path::Path;

use ndarray::{Array1, Array2};

use crate::features::{ZNorm, NODE_FEATURES};

use super::model::{param_names, param_shapes, ModelWeights, LAYERS};
use super::{GnnError, ModelKind};

pub const FORMAT_VERSION: u32 = 1;
const MAGIC: &str = "reveal-gnn";

fn join(v: impl IntoIterator<Item = f64>) -> String {
    v.into_iter().map(|x| format!("{x:e}")).collect::<Vec<_>>().join(" ")
}

/// Serializes `w`; see `docs/model-format.md`.
pub fn write_model(w: &ModelWeights) -> String {
    let mut s = String::new();
    let mut line = |l: String| {
        s.push_str(&l);
        s.push('\n');
    };
    line(format!("{MAGIC} {FORMAT_VERSION}"));
    line(format!("kind {}", w.kind));
    line(format!("hidden {}", w.hidden));
    line(format!("layers {LAYERS}"));
    line(format!("node_features {NODE_FEATURES}"));
    line(format!("alpha {:e}", w.alpha));
    line(format!("scalar_mean {}", join(w.norm.mean.iter().copied())));
    line(format!("scalar_std {}", join(w.norm.std.iter().copied())));
    line(format!("bn_running_mean {}", join(w.bn_running_mean.iter().copied())));
    line(format!("bn_running_var {}", join(w.bn_running_var.iter().copied())));
    line(format!("tensors {}", w.params.len()));
    for (name, t) in param_names(w.kind).iter().zip(&w.params) {
        line(format!("tensor {name} {} {}", t.nrows(), t.ncols()));
        for r in t.rows() {
            line(join(r.iter().copied()));
        }
    }
    line("end".into());
    s
}

pub fn save_model(w: &ModelWeights, path: &Path) -> Result<(), GnnError> {
    let mut f = fs::File::create(path)?;
    f.write_all(write_model(w).as_bytes())?;
    Ok(())
}

pub fn load_model(path: &Path) -> Result<ModelWeights, GnnError> {
    read_model(&fs::read_to_string(path)?)
}

struct Lines<'a> {
    it: std::iter::Enumerate<std::str::Lines<'a>>,
    at: usize,
}

impl<'a> Lines<'a> {
    fn err(&self, msg: impl Into<String>) -> GnnError {
        GnnError::Format {
            line: self.at,
            msg: msg.into(),
        }
    }

    fn next(&mut self) -> Result<&'a str, GnnError> {
        match self.it.next() {
            Some((i, l)) => {
                self.at = i + 1;
                Ok(l)
            }
            None => {
                self.at += 1;
                Err(self.err("unexpected end of file"))
            }
        }
    }

    /// The words after `key` on the next line.
    fn keyed(&mut self, key: &str) -> Result<Vec<&'a str>, GnnError> {
        let l = self.next()?;
        let mut words = l.split_whitespace();
        if words.next() != Some(key) {
            return Err(self.err(format!("expected `{key}`")));
        }
        Ok(words.collect())
    }

    fn single<T: std::str::FromStr>(&mut self, key: &str) -> Result<T, GnnError> {
        let w = self.keyed(key)?;
        match w.as_slice() {
            [v] => v.parse().map_err(|_| self.err(format!("bad value for `{key}`"))),
            _ => Err(self.err(format!("`{key}` takes one value"))),
        }
    }

    fn floats(&self, words: &[&str], len: usize) -> Result<Vec<f64>, GnnError> {
        if words.len() != len {
            return Err(self.err(format!("expected {len} values, found {}", words.len())));
        }
        words
            .iter()
            .map(|w| w.parse::<f64>().map_err(|_| self.err(format!("bad number `{w}`"))))
            .collect()
    }

    fn vector(&mut self, key: &str, len: usize) -> Result<Vec<f64>, GnnError> {
        let w = self.keyed(key)?;
        self.floats(&w, len)
    }
}

/// Parses a model; any truncation or shape mismatch is an error.
pub fn read_model(text: &str) -> Result<ModelWeights, GnnError> {
    let mut r = Lines {
        it: text.lines().enumerate(),
        at: 0,
    };
    let version: u32 = r.single(MAGIC)?;
    if version != FORMAT_VERSION {
        return Err(GnnError::Version {
            found: version,
            expected: FORMAT_VERSION,
        });
    }
    let kind: ModelKind = {
        let k: String = r.single("kind")?;
        k.parse().map_err(|e: String| r.err(e))?
    };
    let hidden: usize = r.single("hidden")?;
    if hidden == 0 {
        return Err(r.err("hidden width must be positive"));
    }
    let layers: usize = r.single("layers")?;
    let features: usize = r.single("node_features")?;
    if layers != LAYERS || features != NODE_FEATURES {
        return Err(r.err(format!(
            "model has {layers} layers over {features} node features, expected {LAYERS} over {NODE_FEATURES}"
        )));
    }
    let alpha: f64 = r.single("alpha")?;
    let d = kind.num_scalars();
    let norm = ZNorm {
        mean: r.vector("scalar_mean", d)?,
        std: r.vector("scalar_std", d)?,
    };
    let bn_running_mean = Array1::from(r.vector("bn_running_mean", 2 * hidden)?);
    let bn_running_var = Array1::from(r.vector("bn_running_var", 2 * hidden)?);
    let names = param_names(kind);
    let shapes = param_shapes(kind, hidden);
    let count: usize = r.single("tensors")?;
    if count != names.len() {
        return Err(r.err(format!("expected {} tensors, found {count}", names.len())));
    }
    let mut params = Vec::with_capacity(count);
    for (name, &(rows, cols)) in names.iter().zip(&shapes) {
        let head = r.keyed("tensor")?;
        let found = match head.as_slice() {
            [n, a, b] if n == name => (
                a.parse().map_err(|_| r.err("bad row count"))?,
                b.parse().map_err(|_| r.err("bad column count"))?,
            ),
            _ => return Err(r.err(format!("expected tensor `{name}`"))),
        };
        if found != (rows, cols) {
            return Err(GnnError::TensorShape {
                name: name.clone(),
                expected: (rows, cols),
                found,
            });
        }
        let mut data = Vec::with_capacity(rows * cols);
        for _ in 0..rows {
            let l = r.next()?;
            let words: Vec<&str> = l.split_whitespace().collect();
            data.extend(r.floats(&words, cols)?);
        }
        params.push(Array2::from_shape_vec((rows, cols), data).expect("sizes checked"));
    }
    if r.next()? != "end" {
        return Err(r.err("expected `end`"));
    }
    Ok(ModelWeights {
        kind,
        hidden,
        params,
        bn_running_mean,
        bn_running_var,
        norm,
        alpha,
    })
}
