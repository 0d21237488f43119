//! Data model, file formats, context masking and synthetic data.
//!
//! | file               | contents                                                     |
//! |--------------------|--------------------------------------------------------------|
//! | `embeddings.jsonl` | `{"runner","rp","mode","logits":[400 numbers]}` per line     |
//! | `embeddings.bin`   | optional little-endian `f32` sidecar with the same records    |
//! | `splits.csv`       | `runner,rp,seconds`                                          |
//! | `detections.jsonl` | `{"frame","bbox":[cx,cy,w,h],"conf","feat":[F numbers]}`     |
//! | `rpinfo.csv`       | recording point table                                        |
//! | `tracks.jsonl`     | `{"frame","id","bbox","source"}` (written by the tracker)     |

mod detections;
mod embeddings;
mod frame;
mod numfmt;
mod rpinfo;
mod splits;
pub mod synth;
mod tracks;
mod types;

pub use detections::{load_detections, write_detections, DEFAULT_FEATURE_DIM};
pub use embeddings::{
    load_embeddings, load_logits_sidecar, parse_embeddings, write_embeddings,
    write_logits_sidecar,
};
pub use frame::{mask_context, FrameBuffer};
pub use numfmt::format_sig9;
pub use rpinfo::{load_rpinfo, tgc_recording_points, write_rpinfo, RpInfo};
pub use splits::{load_split_times, parse_split_times, validate_splits, write_split_times};
pub use synth::{generate_synthetic, SynthConfig, SynthData};
pub use tracks::{load_tracks, write_tracks, TrackRow, TrackSource};
pub use types::{ClipRecord, ContextMode, Detection, SplitRecord};
