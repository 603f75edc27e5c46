//! One module per pipeline stage, plus shared file helpers.

pub mod evaluate;
pub mod pos_model;
pub mod predict;
pub mod score;
pub mod sweep;
pub mod synth;
pub mod train;

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use semshift::{resolve_target_key, Corpus, EmbeddingModel, Epoch, TargetSpec, TokenKey};

pub fn read_corpus(path: &Path, epoch: Epoch) -> Result<Corpus> {
    let file =
        File::open(path).with_context(|| format!("opening corpus file {}", path.display()))?;
    Corpus::from_reader(BufReader::new(file), epoch)
        .with_context(|| format!("parsing corpus {}", path.display()))
}

pub fn load_model(path: &Path, epoch: Epoch) -> Result<EmbeddingModel> {
    let file =
        File::open(path).with_context(|| format!("opening embeddings file {}", path.display()))?;
    EmbeddingModel::read_word2vec(BufReader::new(file), epoch)
        .with_context(|| format!("loading embeddings {}", path.display()))
}

pub fn read_targets(path: &Path) -> Result<Vec<TargetSpec>> {
    let file =
        File::open(path).with_context(|| format!("opening targets file {}", path.display()))?;
    let targets = semshift::parse_targets(BufReader::new(file))
        .with_context(|| format!("parsing targets file {}", path.display()))?;
    if targets.is_empty() {
        bail!("targets file {} lists no targets", path.display());
    }
    Ok(targets)
}

/// Creates the output directory if needed and opens `name` inside it.
pub fn create_output(out_dir: &Path, name: &str) -> Result<(PathBuf, BufWriter<File>)> {
    std::fs::create_dir_all(out_dir)
        .with_context(|| format!("creating output directory {}", out_dir.display()))?;
    let path = out_dir.join(name);
    let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    Ok((path, BufWriter::new(file)))
}

pub fn finish(mut writer: BufWriter<File>, path: &Path) -> Result<()> {
    writer
        .flush()
        .with_context(|| format!("writing {}", path.display()))
}

/// Maps target lemmas onto vocabulary keys. Targets without an explicit
/// POS need the corpora to infer the most frequent tag.
pub fn resolve_keys(
    targets: &[TargetSpec],
    corpora: Option<(&Corpus, &Corpus)>,
) -> Result<Vec<(String, TokenKey)>> {
    targets
        .iter()
        .map(|spec| {
            let key = match (&spec.pos, corpora) {
                (Some(pos), _) => TokenKey::new(&spec.lemma, pos)?,
                (None, Some((t0, t1))) => resolve_target_key(&spec.lemma, None, t0, t1)?,
                (None, None) => bail!(
                    "target {:?} has no POS in the targets file; pass --t0/--t1 \
                     so it can be inferred from the corpora",
                    spec.lemma
                ),
            };
            Ok((spec.lemma.clone(), key))
        })
        .collect()
}
