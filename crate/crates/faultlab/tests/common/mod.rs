#![allow(dead_code)]

use std::path::Path;
use std::process::{Command, Output};

/// A run config small enough for a full pipeline in seconds. Paths are relative, so runs
/// land in the working directory.
pub const TINY_CONFIG: &str = r#"
seed = 5

[data]
normal_only = 3000
mixed = 6000

[sim]
fault_rate = 0.05

[cascade.detector.autoencoder]
window = 16
encoder_hidden = 3
decoder_hidden = 4
max_train_windows = 192
max_val_windows = 16

[cascade.detector.autoencoder.train]
max_epochs = 10

[cascade.segclass.forest]
n_trees = 5

[cascade.task2]
hidden = [4, 4]
chunk_len = 32
max_chunks = 12
augment = 1

[cascade.task2.train]
max_epochs = 3
batch_size = 4

[cascade.task3]
hidden = [4, 4]
chunk_len = 32
max_chunks = 12
augment = 1

[cascade.task3.train]
max_epochs = 3
batch_size = 4

[eval]
folds = 3
"#;

pub fn faultlab(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_faultlab"))
        .args(args)
        .current_dir(dir)
        .env_remove("FAULTLAB_SEED")
        .env_remove("RUST_LOG")
        .output()
        .expect("faultlab binary runs")
}

pub fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

pub fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

pub fn write_tiny_config(dir: &Path) {
    std::fs::write(dir.join("run.toml"), TINY_CONFIG).unwrap();
}
