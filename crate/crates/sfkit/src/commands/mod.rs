pub mod caratheodory;
pub mod concentration;
pub mod constraints;
pub mod envelope;
pub mod figure1;
pub mod geometry;
pub mod sf;
pub mod solve;

use serde::Deserialize;
use sfkit_core::geometry::PointSet;

/// A list of point sets, or one set on its own.
#[derive(Deserialize)]
#[serde(untagged)]
pub(crate) enum SetList {
    Many(Vec<PointSet>),
    One(PointSet),
}

impl SetList {
    pub(crate) fn into_vec(self) -> Vec<PointSet> {
        match self {
            SetList::Many(v) => v,
            SetList::One(s) => vec![s],
        }
    }
}

/// Vectors, or scalars read as 1-vectors.
#[derive(Deserialize)]
#[serde(untagged)]
pub(crate) enum Vectors {
    Rows(Vec<Vec<f64>>),
    Scalars(Vec<f64>),
}

impl Vectors {
    pub(crate) fn into_rows(self) -> Vec<Vec<f64>> {
        match self {
            Vectors::Rows(v) => v,
            Vectors::Scalars(v) => v.into_iter().map(|x| vec![x]).collect(),
        }
    }
}

pub(crate) fn same_set(a: &[Vec<f64>], b: &[Vec<f64>]) -> bool {
    let key = |v: &[Vec<f64>]| {
        let mut k: Vec<Vec<u64>> = v.iter().map(|p| p.iter().map(|x| x.to_bits()).collect()).collect();
        k.sort();
        k.dedup();
        k
    };
    key(a) == key(b)
}
