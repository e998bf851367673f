pub mod dataset;
pub mod error;
pub mod experiment;
pub mod hypergraph;
pub mod labels;
pub mod linalg;
pub mod nn;
pub mod oracle;
pub mod preprocess;
pub mod rng;
pub mod ssl;

pub use dataset::ImageDataset;
pub use error::{Error, Result};
pub use hypergraph::{Hypergraph, Normalization, PropagationOperator};
pub use labels::{LabelMatrix, LabelScheme, NoisySplit};
pub use linalg::{DenseMatrix, SparseMatrix};
pub use nn::{TrainConfig, TwoLayerParams};
pub use preprocess::PcaModel;
pub use ssl::PropagationConfig;
