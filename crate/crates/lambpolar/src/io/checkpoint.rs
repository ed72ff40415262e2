//! Network checkpoints: a text header (architecture, label scaling, one
//! line per layer) followed by a little-endian f64 blob holding every
//! parameter array in declaration order.

use std::path::Path;

use lambpolar_core::nn::layers::Activation;
use lambpolar_core::nn::train::MinMax;
use lambpolar_core::nn::{LayerSpec, Network, NetworkSpec};

use crate::error::{AppError, IoContext, Result};
use crate::learn::Task;

const MAGIC: &str = "lambpolar-checkpoint 1";

#[derive(Clone, Debug)]
pub struct Checkpoint {
    pub task: Task,
    pub net: Network,
    pub normalizer: Option<MinMax>,
}

fn activation(s: &str) -> Option<Activation> {
    match s {
        "linear" => Some(Activation::Linear),
        "relu" => Some(Activation::Relu),
        "softmax" => Some(Activation::Softmax),
        _ => None,
    }
}

fn layer_token(l: &LayerSpec) -> String {
    match l {
        LayerSpec::Conv { filters, activation } => format!("conv:{filters}:{}", activation.tag()),
        LayerSpec::BatchNorm => "batch_norm".into(),
        LayerSpec::MaxPool => "max_pool".into(),
        LayerSpec::Flatten => "flatten".into(),
        LayerSpec::Dense { units, activation } => format!("dense:{units}:{}", activation.tag()),
        LayerSpec::Dropout { rate } => format!("dropout:{rate}"),
    }
}

fn parse_layer(tok: &str) -> Option<LayerSpec> {
    let p: Vec<&str> = tok.split(':').collect();
    Some(match p[..] {
        ["conv", f, a] => LayerSpec::Conv { filters: f.parse().ok()?, activation: activation(a)? },
        ["batch_norm"] => LayerSpec::BatchNorm,
        ["max_pool"] => LayerSpec::MaxPool,
        ["flatten"] => LayerSpec::Flatten,
        ["dense", u, a] => LayerSpec::Dense { units: u.parse().ok()?, activation: activation(a)? },
        ["dropout", r] => LayerSpec::Dropout { rate: r.parse().ok()? },
        _ => return None,
    })
}

fn join(v: &[f64]) -> String {
    v.iter().map(f64::to_string).collect::<Vec<_>>().join(",")
}

pub fn encode(ck: &mut Checkpoint) -> Vec<u8> {
    let spec = ck.net.spec.clone();
    let mut h = String::new();
    h += &format!("{MAGIC}\ntask {}\n", ck.task.tag());
    h += &format!("input {} {} {}\nseed {}\n", spec.input[0], spec.input[1], spec.input[2], spec.seed);
    for b in &spec.branches {
        h += &format!("branch {}\n", b.iter().map(layer_token).collect::<Vec<_>>().join(" "));
    }
    h += &format!("head {}\n", spec.head.iter().map(layer_token).collect::<Vec<_>>().join(" "));
    match &ck.normalizer {
        Some(m) => h += &format!("normalizer {} {}\n", join(&m.lo), join(&m.hi)),
        None => h += "normalizer none\n",
    }
    for r in ck.net.param_table() {
        let shape = r.output.iter().map(usize::to_string).collect::<Vec<_>>().join("x");
        h += &format!("layer {} {} {} {} {}\n", r.name, r.kind, shape, r.trainable, r.non_trainable);
    }
    let arrays = ck.net.export();
    let total: usize = arrays.iter().map(Vec::len).sum();
    h += &format!("arrays {} {}\n", arrays.iter().map(|a| a.len().to_string()).collect::<Vec<_>>().join(","), total);
    h += "data\n";
    let mut out = h.into_bytes();
    out.reserve(total * 8);
    for a in &arrays {
        for v in a {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

pub fn decode(bytes: &[u8], path: &Path) -> Result<Checkpoint> {
    let bad = |m: String| AppError::format(path, m);
    let mut pos = 0;
    let mut lines = Vec::new();
    loop {
        let end = bytes[pos..].iter().position(|&b| b == b'\n').ok_or_else(|| bad("header is not terminated".into()))?;
        let line = std::str::from_utf8(&bytes[pos..pos + end]).map_err(|_| bad("header is not UTF-8".into()))?;
        pos += end + 1;
        if line == "data" {
            break;
        }
        lines.push(line);
    }
    if lines.first() != Some(&MAGIC) {
        return Err(bad("not a lambpolar checkpoint".into()));
    }
    let (mut task, mut input, mut seed, mut normalizer, mut arrays) = (None, None, None, None, None);
    let (mut branches, mut head, mut layers) = (Vec::new(), None, Vec::new());
    for line in &lines[1..] {
        let (k, rest) = line.split_once(' ').unwrap_or((line, ""));
        let layer_list = |rest: &str| -> Result<Vec<LayerSpec>> {
            rest.split_whitespace().map(|t| parse_layer(t).ok_or_else(|| bad(format!("bad layer token {t:?}")))).collect()
        };
        match k {
            "task" => task = Some(Task::parse(rest).ok_or_else(|| bad(format!("unknown task {rest:?}")))?),
            "input" => {
                let v: Vec<usize> = rest.split(' ').filter_map(|s| s.parse().ok()).collect();
                let [c, h, w] = v[..] else { return Err(bad(format!("bad input line {line:?}"))) };
                input = Some([c, h, w]);
            }
            "seed" => seed = Some(rest.parse::<u64>().map_err(|_| bad(format!("bad seed {rest:?}")))?),
            "branch" => branches.push(layer_list(rest)?),
            "head" => head = Some(layer_list(rest)?),
            "normalizer" if rest == "none" => normalizer = Some(None),
            "normalizer" => {
                let parse = |s: &str| -> Result<Vec<f64>> {
                    s.split(',').map(|x| x.parse().map_err(|_| bad(format!("bad normalizer value {x:?}")))).collect()
                };
                let (lo, hi) = rest.split_once(' ').ok_or_else(|| bad("normalizer needs lo and hi".into()))?;
                normalizer = Some(Some(MinMax { lo: parse(lo)?, hi: parse(hi)? }));
            }
            "layer" => layers.push(rest.to_string()),
            "arrays" => {
                let (lens, _) = rest.split_once(' ').ok_or_else(|| bad("bad arrays line".into()))?;
                let lens: Vec<usize> = lens.split(',').map(|s| s.parse().map_err(|_| bad("bad array length".into()))).collect::<Result<_>>()?;
                arrays = Some(lens);
            }
            _ => return Err(bad(format!("unexpected header line {line:?}"))),
        }
    }
    let missing = |what: &str| bad(format!("header has no {what} line"));
    let spec = NetworkSpec {
        input: input.ok_or_else(|| missing("input"))?,
        branches,
        head: head.ok_or_else(|| missing("head"))?,
        seed: seed.ok_or_else(|| missing("seed"))?,
    };
    let mut net = Network::build(&spec)?;
    let expect: Vec<String> = net
        .param_table()
        .iter()
        .map(|r| {
            let shape = r.output.iter().map(usize::to_string).collect::<Vec<_>>().join("x");
            format!("{} {} {} {} {}", r.name, r.kind, shape, r.trainable, r.non_trainable)
        })
        .collect();
    if expect != layers {
        return Err(bad("layer table does not match the architecture".into()));
    }
    let lens = arrays.ok_or_else(|| missing("arrays"))?;
    let total: usize = lens.iter().sum();
    let blob = &bytes[pos..];
    if blob.len() != total * 8 {
        return Err(bad(format!("expected {} parameter bytes, found {}", total * 8, blob.len())));
    }
    let mut vals = blob.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")));
    let data: Vec<Vec<f64>> = lens.iter().map(|&n| vals.by_ref().take(n).collect()).collect();
    net.import(&data)?;
    Ok(Checkpoint { task: task.ok_or_else(|| missing("task"))?, net, normalizer: normalizer.ok_or_else(|| missing("normalizer"))? })
}

pub fn write(path: &Path, ck: &mut Checkpoint) -> Result<()> {
    std::fs::write(path, encode(ck)).at(path)
}

pub fn read(path: &Path) -> Result<Checkpoint> {
    let bytes = std::fs::read(path).at(path)?;
    decode(&bytes, path)
}
