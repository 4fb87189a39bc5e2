//! The `.tgbm` model file.
//!
//! Layout, little-endian throughout:
//!
//! ```text
//! header   magic "TGBM" | version u8 = 1 | flags u8 = 0 | n_features u16
//!          | n_trees u16 | learning_rate f32 | base_score f32          (18 B)
//! scaler   (min f32, max f32) per feature, then the target          (8 B each)
//! tree     node_count u16, then node_count records of
//!          feature u16 (0xFFFF = leaf) | threshold-or-value f32
//!          | left u16 | right u16                                  (10 B each)
//! ```
//!
//! Serialization is canonical: equal ensembles give equal bytes.

use thiserror::Error;

use crate::gbrt::{Ensemble, Tree, TreeDefect, TreeNode, MAX_NODES};
use crate::preprocess::{MinMax, ScalerParams};

pub const MAGIC: [u8; 4] = *b"TGBM";
pub const VERSION: u8 = 1;
pub const HEADER_LEN: usize = 18;
pub const NODE_LEN: usize = 10;
pub const SCALER_ENTRY_LEN: usize = 8;

#[derive(Debug, Error, PartialEq)]
pub enum FormatError {
    #[error("not a model file (bad magic {0:02x?})")]
    BadMagic([u8; 4]),
    #[error("unsupported model format version {0}")]
    Version(u8),
    #[error("unsupported header flags {0:#04x}")]
    Flags(u8),
    #[error("truncated model file in {}", .tree.map_or_else(|| "header or scaler block".to_string(), |t| format!("tree {t}")))]
    Truncated { tree: Option<usize> },
    #[error("tree {tree}, node {node}: child index out of range")]
    ChildOutOfRange { tree: usize, node: usize },
    #[error("tree {tree}: {defect:?}")]
    BadTree { tree: usize, defect: TreeDefect },
    #[error("{0} trailing bytes after the last tree")]
    TrailingBytes(usize),
    #[error("tree {tree} has {nodes} nodes; the format allows at most {MAX_NODES}")]
    TooManyNodes { tree: usize, nodes: usize },
    #[error("{what} = {value} does not fit in 16 bits")]
    TooMany { what: &'static str, value: usize },
    #[error("scaler covers {scaler} features but the model has {model}")]
    ScalerWidth { scaler: usize, model: usize },
}

fn u16_field(what: &'static str, value: usize) -> Result<u16, FormatError> {
    u16::try_from(value).map_err(|_| FormatError::TooMany { what, value })
}

/// Exact byte length of the serialized form.
pub fn serialized_len(model: &Ensemble) -> usize {
    HEADER_LEN
        + SCALER_ENTRY_LEN * (model.n_features + 1)
        + model
            .trees
            .iter()
            .map(|t| 2 + NODE_LEN * t.nodes.len())
            .sum::<usize>()
}

pub fn serialize(model: &Ensemble) -> Result<Vec<u8>, FormatError> {
    let n_features = u16_field("n_features", model.n_features)?;
    let n_trees = u16_field("n_trees", model.trees.len())?;
    if model.scaler.n_features() != model.n_features {
        return Err(FormatError::ScalerWidth {
            scaler: model.scaler.n_features(),
            model: model.n_features,
        });
    }

    let mut out = Vec::with_capacity(serialized_len(model));
    out.extend_from_slice(&MAGIC);
    out.push(VERSION);
    out.push(0);
    out.extend_from_slice(&n_features.to_le_bytes());
    out.extend_from_slice(&n_trees.to_le_bytes());
    out.extend_from_slice(&model.learning_rate.to_le_bytes());
    out.extend_from_slice(&model.base_score.to_le_bytes());

    for mm in model.scaler.features.iter().chain([&model.scaler.target]) {
        out.extend_from_slice(&(mm.min as f32).to_le_bytes());
        out.extend_from_slice(&(mm.max as f32).to_le_bytes());
    }

    for (t, tree) in model.trees.iter().enumerate() {
        if tree.nodes.len() > MAX_NODES {
            return Err(FormatError::TooManyNodes {
                tree: t,
                nodes: tree.nodes.len(),
            });
        }
        out.extend_from_slice(&(tree.nodes.len() as u16).to_le_bytes());
        for node in &tree.nodes {
            out.extend_from_slice(&node.feature.to_le_bytes());
            out.extend_from_slice(&node.value.to_le_bytes());
            out.extend_from_slice(&node.left.to_le_bytes());
            out.extend_from_slice(&node.right.to_le_bytes());
        }
    }
    debug_assert_eq!(out.len(), serialized_len(model));
    Ok(out)
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
    tree: Option<usize>,
}

impl<'a> Reader<'a> {
    fn take<const N: usize>(&mut self) -> Result<[u8; N], FormatError> {
        let end = self.pos + N;
        let chunk = self
            .bytes
            .get(self.pos..end)
            .ok_or(FormatError::Truncated { tree: self.tree })?;
        self.pos = end;
        Ok(chunk.try_into().expect("length checked"))
    }

    fn u8(&mut self) -> Result<u8, FormatError> {
        Ok(self.take::<1>()?[0])
    }

    fn u16(&mut self) -> Result<u16, FormatError> {
        Ok(u16::from_le_bytes(self.take()?))
    }

    fn f32(&mut self) -> Result<f32, FormatError> {
        Ok(f32::from_le_bytes(self.take()?))
    }
}

pub fn deserialize(bytes: &[u8]) -> Result<Ensemble, FormatError> {
    let mut r = Reader {
        bytes,
        pos: 0,
        tree: None,
    };
    let magic: [u8; 4] = r.take()?;
    if magic != MAGIC {
        return Err(FormatError::BadMagic(magic));
    }
    let version = r.u8()?;
    if version != VERSION {
        return Err(FormatError::Version(version));
    }
    let flags = r.u8()?;
    if flags != 0 {
        return Err(FormatError::Flags(flags));
    }
    let n_features = r.u16()? as usize;
    let n_trees = r.u16()? as usize;
    let learning_rate = r.f32()?;
    let base_score = r.f32()?;

    let mut ranges = Vec::with_capacity(n_features + 1);
    for _ in 0..=n_features {
        let min = f64::from(r.f32()?);
        let max = f64::from(r.f32()?);
        ranges.push(MinMax { min, max });
    }
    let target = ranges.pop().expect("at least the target range");

    let mut trees = Vec::with_capacity(n_trees);
    for t in 0..n_trees {
        r.tree = Some(t);
        let count = r.u16()? as usize;
        let mut nodes = Vec::with_capacity(count);
        for _ in 0..count {
            let feature = r.u16()?;
            let value = r.f32()?;
            let left = r.u16()?;
            let right = r.u16()?;
            nodes.push(TreeNode {
                feature,
                value,
                left,
                right,
            });
        }
        let tree = Tree { nodes };
        tree.validate(n_features).map_err(|defect| match defect {
            TreeDefect::ChildOutOfRange { node } => FormatError::ChildOutOfRange { tree: t, node },
            defect => FormatError::BadTree { tree: t, defect },
        })?;
        trees.push(tree);
    }
    if r.pos != bytes.len() {
        return Err(FormatError::TrailingBytes(bytes.len() - r.pos));
    }

    Ok(Ensemble {
        base_score,
        learning_rate,
        n_features,
        trees,
        scaler: ScalerParams {
            features: ranges,
            target,
        },
    })
}

/// File size in kilobytes, `bytes / 1024`.
pub fn model_size_kb(bytes: &[u8]) -> f64 {
    bytes.len() as f64 / 1024.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gbrt::{train, ModelConfig};
    use ndarray::{Array1, Array2};
    use proptest::prelude::*;

    fn single_leaf(n_features: usize) -> Ensemble {
        Ensemble {
            base_score: 0.5,
            learning_rate: 0.3,
            n_features,
            trees: vec![Tree {
                nodes: vec![TreeNode::leaf(0.25)],
            }],
            scaler: ScalerParams::identity(n_features),
        }
    }

    fn trained(seed: u64) -> Ensemble {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let x = Array2::from_shape_fn((200, 3), |_| rng.gen::<f64>());
        let y = Array1::from_shape_fn(200, |i| (x[[i, 0]] * 3.0).sin().abs() * 0.5 + 0.3 * x[[i, 2]]);
        let cfg = ModelConfig {
            n_trees: 8,
            max_depth: 4,
            ..crate::gbrt::full_config()
        };
        let scaler = ScalerParams {
            features: vec![
                MinMax { min: 0.1, max: 9.7 },
                MinMax { min: -3.0, max: 3.0 },
                MinMax { min: 0.0, max: 1.0 },
            ],
            target: MinMax { min: 0.3, max: 11.9 },
        };
        train(x.view(), y.view(), &cfg).unwrap().with_scaler(&scaler)
    }

    #[test]
    fn single_leaf_size() {
        let bytes = serialize(&single_leaf(2)).unwrap();
        assert_eq!(bytes.len(), HEADER_LEN + 3 * SCALER_ENTRY_LEN + 2 + NODE_LEN);
        assert_eq!(&bytes[..4], b"TGBM");
        assert_eq!(bytes[4], 1);
        assert_eq!(bytes[5], 0);
        assert_eq!(u16::from_le_bytes([bytes[6], bytes[7]]), 2);
        assert_eq!(u16::from_le_bytes([bytes[8], bytes[9]]), 1);
        assert_eq!(f32::from_le_bytes(bytes[10..14].try_into().unwrap()), 0.3);
        assert_eq!(f32::from_le_bytes(bytes[14..18].try_into().unwrap()), 0.5);
        let node = &bytes[bytes.len() - NODE_LEN..];
        assert_eq!(node[..2], [0xFF, 0xFF]);
        assert_eq!(f32::from_le_bytes(node[2..6].try_into().unwrap()), 0.25);
    }

    #[test]
    fn round_trip_is_canonical() {
        let m = trained(3);
        let bytes = serialize(&m).unwrap();
        assert_eq!(bytes.len(), serialized_len(&m));
        let back = deserialize(&bytes).unwrap();
        assert_eq!(back, m);
        assert_eq!(serialize(&back).unwrap(), bytes);
    }

    #[test]
    fn corrupted_magic() {
        let mut bytes = serialize(&single_leaf(1)).unwrap();
        bytes[0] = b'X';
        assert!(matches!(deserialize(&bytes), Err(FormatError::BadMagic(_))));
    }

    #[test]
    fn version_and_flags() {
        let mut bytes = serialize(&single_leaf(1)).unwrap();
        bytes[4] = 2;
        assert_eq!(deserialize(&bytes).unwrap_err(), FormatError::Version(2));
        let mut bytes = serialize(&single_leaf(1)).unwrap();
        bytes[5] = 1;
        assert_eq!(deserialize(&bytes).unwrap_err(), FormatError::Flags(1));
    }

    #[test]
    fn truncation_names_the_tree() {
        let m = trained(5);
        let bytes = serialize(&m).unwrap();
        let second_tree = HEADER_LEN + SCALER_ENTRY_LEN * 4 + 2 + NODE_LEN * m.trees[0].nodes.len();
        let cut = &bytes[..second_tree + 7];
        assert_eq!(
            deserialize(cut).unwrap_err(),
            FormatError::Truncated { tree: Some(1) }
        );
        assert_eq!(
            deserialize(&bytes[..10]).unwrap_err(),
            FormatError::Truncated { tree: None }
        );
        let msg = deserialize(cut).unwrap_err().to_string();
        assert!(msg.contains("tree 1"), "{msg}");
    }

    #[test]
    fn child_out_of_range() {
        let mut m = single_leaf(1);
        m.trees[0].nodes = vec![
            TreeNode {
                feature: 0,
                value: 0.5,
                left: 1,
                right: 2,
            },
            TreeNode::leaf(1.0),
            TreeNode::leaf(2.0),
        ];
        let mut bytes = serialize(&m).unwrap();
        let root = HEADER_LEN + SCALER_ENTRY_LEN * 2 + 2;
        bytes[root + 8..root + 10].copy_from_slice(&7u16.to_le_bytes());
        assert_eq!(
            deserialize(&bytes).unwrap_err(),
            FormatError::ChildOutOfRange { tree: 0, node: 0 }
        );
    }

    #[test]
    fn trailing_bytes() {
        let mut bytes = serialize(&single_leaf(1)).unwrap();
        bytes.push(0);
        assert_eq!(deserialize(&bytes).unwrap_err(), FormatError::TrailingBytes(1));
    }

    #[test]
    fn oversized_tree_is_rejected() {
        let mut m = single_leaf(1);
        m.trees[0].nodes = vec![TreeNode::leaf(0.0); MAX_NODES + 1];
        assert!(matches!(serialize(&m), Err(FormatError::TooManyNodes { tree: 0, .. })));
    }

    #[test]
    fn size_in_kb() {
        assert_eq!(model_size_kb(&[0u8; 1024]), 1.0);
        assert_eq!(model_size_kb(&[]), 0.0);
        assert_eq!(model_size_kb(&[0u8; 512]), 0.5);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn reloaded_model_predicts_identically(seed in 0u64..1000, rows in proptest::collection::vec(
            proptest::collection::vec(-0.5f64..1.5, 3), 1..200)) {
            let m = trained(seed);
            let back = deserialize(&serialize(&m).unwrap()).unwrap();
            let x = Array2::from_shape_fn((rows.len(), 3), |(r, c)| rows[r][c]);
            let a = m.predict(x.view()).unwrap();
            let b = back.predict(x.view()).unwrap();
            for (p, q) in a.iter().zip(b.iter()) {
                prop_assert_eq!(p.to_bits(), q.to_bits());
            }
        }
    }
}
