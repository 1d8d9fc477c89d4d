//! Writes the bundled synthetic corpus to `data/oracle/`.

use std::path::Path;

use singable::dataprep::synthetic::{corpus, to_tsv, BUNDLED_SEED, BUNDLED_TEST, BUNDLED_TRAIN};

fn main() -> std::io::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/oracle");
    let (train, test) = corpus(BUNDLED_SEED, BUNDLED_TRAIN, BUNDLED_TEST);
    std::fs::write(dir.join("train.tsv"), to_tsv(&train))?;
    std::fs::write(dir.join("test.tsv"), to_tsv(&test))?;
    Ok(())
}
