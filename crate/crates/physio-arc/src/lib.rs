//! Activity recognition chain for shoulder physiotherapy exercises captured
//! as 6-axis smartwatch inertial logs.
//!
//! The pipeline stages — ingestion, energy-based annotation, sliding-window
//! segmentation, feature extraction, Gini-importance feature selection,
//! classification (k-NN, random forest, RBF-kernel SVM, and a small
//! convolutional-recurrent network), and leakage-free cross-validated
//! evaluation — are each exposed as a module, and the `examples/` directory
//! contains one runnable program per capability. A thin `physio-arc` binary
//! wires the same stages into subcommands.
//!
//! Everything is deterministic given a seed: random state comes from
//! counter-based streams, parallel loops collect in fixed order, and reports
//! exclude wall-clock times from their canonical JSON.

pub mod annotate;
pub mod container;
pub mod data;
pub mod error;
pub mod eval;
pub mod features;
pub mod pipeline;
pub mod plot;
pub mod report;
pub mod knn;
pub mod nn;
pub mod rng;
pub mod segment;
pub mod select;
pub mod svm;
pub mod synth;
pub mod trees;

pub use data::{ExerciseClass, Interval, Manifest, ManifestEntry, Recording, SensorSample, Side};
pub use error::{Error, Result};
pub use features::FeatureMatrix;
pub use segment::{SegmentationSpec, WindowTensor};
pub use synth::SynthConfig;
