//! Fixtures shared by the benchmarks.

use hyperprop::dataset::synthetic_blobs;
use hyperprop::hypergraph::{build_knn_hypergraph, hypergraph_operator};
use hyperprop::labels::{encode_labels, inject_noise, LabelScheme};
use hyperprop::{DenseMatrix, ImageDataset, LabelMatrix, Normalization, PropagationOperator};

pub struct Fixture {
    pub dataset: ImageDataset,
    pub sym: PropagationOperator,
    pub pm1: LabelMatrix,
    pub onehot: LabelMatrix,
}

/// Ten Gaussian blobs in `dim` dimensions with the sym kNN hypergraph (k = 5).
pub fn fixture(n: usize, dim: usize) -> Fixture {
    let dataset = synthetic_blobs(n, 10, dim, 1.0, 7).expect("valid blob parameters");
    let hg = build_knn_hypergraph(dataset.features(), 5, true).expect("hypergraph");
    let sym = hypergraph_operator(&hg, Normalization::Sym).expect("operator");
    let split = inject_noise(&dataset, 0.3, 1).expect("noise");
    let pm1 = encode_labels(&split, dataset.train_indices(), 10, LabelScheme::Pm1).expect("labels");
    let onehot = encode_labels(&split, dataset.train_indices(), 10, LabelScheme::OneHot).expect("labels");
    Fixture { dataset, sym, pm1, onehot }
}

pub fn features(f: &Fixture) -> &DenseMatrix {
    f.dataset.features()
}
