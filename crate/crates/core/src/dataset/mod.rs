//! Recording formats, dataset manifests and synthetic data.

mod io;
mod manifest;
mod planted;
mod synth;

pub use io::{
    load_recording, read_annotations, read_csv_signal, read_rawbin, save_recording,
    write_annotations, write_csv_signal, write_rawbin, LoadOptions, RawSignal, SignalFormat,
};
pub use manifest::{DatasetManifest, RecordingEntry, SubjectEntry};
pub use planted::PlantedFeatures;
pub use synth::{generate_synthetic, synthesize_subject, ArtifactSpec, Effect, SynthSpec};
