//! Shared numeric building blocks: softmax, affine maps, and multi-head
//! cross attention.

use alloc::format;
use alloc::vec::Vec;

use super::params::{LinearParams, MhcaParams};
use super::scalar::Scalar;
use super::tensor::Tensor;
use super::ModelError;

/// Softmax along `axis` with max-subtraction stabilization.
///
/// The subtracted maximum is treated as a constant; softmax is shift
/// invariant, so neither the value nor the gradient changes.
pub fn softmax<S: Scalar>(logits: &Tensor<S>, axis: usize) -> Tensor<S> {
    let shape = logits.shape();
    assert!(axis < shape.len(), "softmax axis out of range");
    let lanes = shape[axis];
    let inner: usize = shape[axis + 1..].iter().product();
    let outer: usize = shape[..axis].iter().product();
    let data = logits.data();
    let mut out: Vec<S> = Vec::with_capacity(data.len());
    out.extend_from_slice(data);
    for o in 0..outer {
        for i in 0..inner {
            let index = |k: usize| (o * lanes + k) * inner + i;
            let mut max = f64::NEG_INFINITY;
            for k in 0..lanes {
                max = max.max(data[index(k)].val());
            }
            let mut exps: Vec<S> = Vec::with_capacity(lanes);
            for k in 0..lanes {
                exps.push(data[index(k)].add_const(-max).exp());
            }
            let mut sum = exps[0];
            for &e in &exps[1..] {
                sum = sum + e;
            }
            for k in 0..lanes {
                out[index(k)] = exps[k] / sum;
            }
        }
    }
    Tensor::new(shape.to_vec(), out)
}

/// `y = x W + b` for `x: [rows, inputs]`.
pub fn linear<S: Scalar>(x: &Tensor<S>, params: &LinearParams<S>) -> Result<Tensor<S>, ModelError> {
    if x.rank() != 2 || x.shape()[1] != params.inputs() {
        return Err(ModelError::ShapeMismatch {
            detail: format!(
                "linear: input {:?} incompatible with weight {:?}",
                x.shape(),
                params.weight.shape()
            ),
        });
    }
    let rows = x.shape()[0];
    let (inputs, outputs) = (params.inputs(), params.outputs());
    let mut data: Vec<S> = Vec::with_capacity(rows * outputs);
    for r in 0..rows {
        for o in 0..outputs {
            let mut acc = params.bias.data()[o];
            for i in 0..inputs {
                acc = acc + x.data()[r * inputs + i] * params.weight.data()[i * outputs + o];
            }
            data.push(acc);
        }
    }
    Ok(Tensor::new(alloc::vec![rows, outputs], data))
}

/// Multi-head scaled dot-product cross attention.
///
/// `query: [Lq, q_in]`, `key`/`value`: `[Lk, kv_in]`. Returns the
/// output-projected context `[Lq, dim]` and the attention weights
/// `[heads, Lq, Lk]` for tracing.
pub fn mhca<S: Scalar>(
    params: &MhcaParams<S>,
    query: &Tensor<S>,
    key: &Tensor<S>,
    value: &Tensor<S>,
) -> Result<(Tensor<S>, Tensor<S>), ModelError> {
    if key.shape() != value.shape() {
        return Err(ModelError::ShapeMismatch {
            detail: format!(
                "mhca: key {:?} and value {:?} must agree",
                key.shape(),
                value.shape()
            ),
        });
    }
    let dim = params.model_dim();
    let heads = params.heads;
    assert!(
        heads > 0 && dim.is_multiple_of(heads),
        "validated by config"
    );
    let head_dim = dim / heads;
    let q = linear(query, &params.query)?;
    let k = linear(key, &params.key)?;
    let v = linear(value, &params.value)?;
    let lq = q.shape()[0];
    let lk = k.shape()[0];
    if lk == 0 {
        return Err(ModelError::ShapeMismatch {
            detail: alloc::string::String::from("mhca: empty key/value sequence"),
        });
    }
    let scale = 1.0 / (head_dim as f64).sqrt();

    let mut scores: Vec<S> = Vec::with_capacity(heads * lq * lk);
    for h in 0..heads {
        let base = h * head_dim;
        for i in 0..lq {
            for j in 0..lk {
                let mut dot = q.data()[i * dim + base] * k.data()[j * dim + base];
                for d in 1..head_dim {
                    dot = dot + q.data()[i * dim + base + d] * k.data()[j * dim + base + d];
                }
                scores.push(dot.mul_const(scale));
            }
        }
    }
    let scores = Tensor::new(alloc::vec![heads, lq, lk], scores);
    let attn = softmax(&scores, 2);

    let mut context: Vec<S> = Vec::with_capacity(lq * dim);
    for i in 0..lq {
        for h in 0..heads {
            let base = h * head_dim;
            for d in 0..head_dim {
                let mut acc = attn.at(&[h, i, 0]) * v.data()[base + d];
                for j in 1..lk {
                    acc = acc + attn.at(&[h, i, j]) * v.data()[j * dim + base + d];
                }
                context.push(acc);
            }
        }
    }
    let context = Tensor::new(alloc::vec![lq, dim], context);
    let out = linear(&context, &params.output)?;
    Ok((out, attn))
}
