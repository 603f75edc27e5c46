//! Time-sliced corpus parsing, token keys, vocabularies and POS counts.
//!
//! A corpus file is UTF-8 text with one token per line as
//! `form<TAB>pos<TAB>lemma`. An empty line ends a sentence and lines
//! starting with `#` are skipped.

use std::collections::HashMap;
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use crate::error::{Error, Result};

/// The two time slices a corpus can belong to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Epoch {
    T0,
    T1,
}

impl Epoch {
    pub fn as_str(self) -> &'static str {
        match self {
            Epoch::T0 => "T0",
            Epoch::T1 => "T1",
        }
    }
}

impl fmt::Display for Epoch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Epoch {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "T0" | "t0" => Ok(Epoch::T0),
            "T1" | "t1" => Ok(Epoch::T1),
            other => Err(Error::InvalidArgument(format!(
                "unknown epoch {other:?}, expected T0 or T1"
            ))),
        }
    }
}

/// One annotated token: surface form, POS tag and lemma.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    form: String,
    pos: String,
    lemma: String,
}

impl Token {
    /// All three fields must be non-empty and the POS tag must not
    /// contain whitespace.
    pub fn new(
        form: impl Into<String>,
        pos: impl Into<String>,
        lemma: impl Into<String>,
    ) -> Result<Self> {
        let (form, pos, lemma) = (form.into(), pos.into(), lemma.into());
        if form.is_empty() || pos.is_empty() || lemma.is_empty() {
            return Err(Error::InvalidArgument(
                "token fields must be non-empty".into(),
            ));
        }
        if pos.chars().any(char::is_whitespace) {
            return Err(Error::InvalidArgument(format!(
                "POS tag {pos:?} contains whitespace"
            )));
        }
        Ok(Token { form, pos, lemma })
    }

    pub fn form(&self) -> &str {
        &self.form
    }

    pub fn pos(&self) -> &str {
        &self.pos
    }

    pub fn lemma(&self) -> &str {
        &self.lemma
    }

    /// The embedding vocabulary unit for this token.
    pub fn key(&self) -> TokenKey {
        // Fields are validated on construction, so this cannot fail.
        TokenKey::new(&self.form, &self.pos).expect("token fields validated")
    }
}

pub type Sentence = Vec<Token>;

/// A parsed epoch corpus: an ordered list of non-empty sentences.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    epoch: Epoch,
    sentences: Vec<Sentence>,
}

impl Corpus {
    pub fn new(epoch: Epoch, sentences: Vec<Sentence>) -> Result<Self> {
        if sentences.iter().any(Vec::is_empty) {
            return Err(Error::InvalidArgument(
                "corpus contains an empty sentence".into(),
            ));
        }
        Ok(Corpus { epoch, sentences })
    }

    /// Parses the line format described in the module docs.
    pub fn from_reader<R: BufRead>(mut reader: R, epoch: Epoch) -> Result<Self> {
        let mut sentences = Vec::new();
        let mut current: Sentence = Vec::new();
        let mut buf = Vec::new();
        let mut line_no = 0usize;

        loop {
            buf.clear();
            let read = reader.read_until(b'\n', &mut buf)?;
            if read == 0 {
                break;
            }
            line_no += 1;
            if buf.last() == Some(&b'\n') {
                buf.pop();
            }
            if buf.last() == Some(&b'\r') {
                buf.pop();
            }
            let line = std::str::from_utf8(&buf).map_err(|_| Error::Encoding { line: line_no })?;

            if line.is_empty() {
                if !current.is_empty() {
                    sentences.push(std::mem::take(&mut current));
                }
                continue;
            }
            if line.starts_with('#') {
                continue;
            }

            let mut fields = line.split('\t');
            let (form, pos, lemma) = match (fields.next(), fields.next(), fields.next(), fields.next()) {
                (Some(form), Some(pos), Some(lemma), None) => (form, pos, lemma),
                _ => {
                    return Err(Error::Parse {
                        line: line_no,
                        msg: format!(
                            "expected 3 tab-separated fields, got {}",
                            line.split('\t').count()
                        ),
                    })
                }
            };
            let token = Token::new(form, pos, lemma).map_err(|e| Error::Parse {
                line: line_no,
                msg: e.to_string(),
            })?;
            current.push(token);
        }
        if !current.is_empty() {
            sentences.push(current);
        }
        Ok(Corpus { epoch, sentences })
    }

    /// Writes the corpus back in the file format, one blank line after
    /// each sentence. Tokens that the format cannot represent (embedded
    /// tabs or newlines, a form starting with `#`) are rejected.
    pub fn write_to<W: Write>(&self, mut writer: W) -> Result<()> {
        for sentence in &self.sentences {
            for token in sentence {
                for field in [token.form(), token.pos(), token.lemma()] {
                    if field.contains(['\t', '\n', '\r']) {
                        return Err(Error::InvalidArgument(format!(
                            "field {field:?} cannot be written to the corpus format"
                        )));
                    }
                }
                if token.form().starts_with('#') {
                    return Err(Error::InvalidArgument(format!(
                        "form {:?} would be read back as a comment line",
                        token.form()
                    )));
                }
                writeln!(writer, "{}\t{}\t{}", token.form(), token.pos(), token.lemma())?;
            }
            writeln!(writer)?;
        }
        Ok(())
    }

    pub fn epoch(&self) -> Epoch {
        self.epoch
    }

    pub fn sentences(&self) -> &[Sentence] {
        &self.sentences
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn token_count(&self) -> usize {
        self.sentences.iter().map(Vec::len).sum()
    }

    pub fn tokens(&self) -> impl Iterator<Item = &Token> {
        self.sentences.iter().flatten()
    }
}

/// Embedding vocabulary unit: `lowercase(form)` joined to the POS tag by
/// a single `_`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TokenKey(String);

impl TokenKey {
    pub fn new(form: &str, pos: &str) -> Result<Self> {
        if form.is_empty() || pos.is_empty() {
            return Err(Error::InvalidArgument(
                "form and pos must be non-empty".into(),
            ));
        }
        Ok(TokenKey(format!("{}_{}", form.to_lowercase(), pos)))
    }

    /// Accepts a key string as stored in an embeddings file.
    pub fn parse(s: &str) -> Result<Self> {
        if s.is_empty() || s.chars().any(char::is_whitespace) {
            return Err(Error::InvalidArgument(format!("invalid token key {s:?}")));
        }
        Ok(TokenKey(s.to_string()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for TokenKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Token keys of one corpus with their occurrence counts, pruned at a
/// minimum count.
#[derive(Debug, Clone)]
pub struct Vocabulary {
    entries: HashMap<TokenKey, u64>,
    min_count: u64,
}

impl Vocabulary {
    pub fn from_corpus(corpus: &Corpus, min_count: u64) -> Result<Self> {
        if min_count < 1 {
            return Err(Error::InvalidArgument("min_count must be >= 1".into()));
        }
        let mut entries: HashMap<TokenKey, u64> = HashMap::new();
        for token in corpus.tokens() {
            *entries.entry(token.key()).or_insert(0) += 1;
        }
        entries.retain(|_, count| *count >= min_count);
        Ok(Vocabulary { entries, min_count })
    }

    pub fn count(&self, key: &TokenKey) -> u64 {
        self.entries.get(key).copied().unwrap_or(0)
    }

    pub fn contains(&self, key: &TokenKey) -> bool {
        self.entries.contains_key(key)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Sum of all retained counts.
    pub fn total(&self) -> u64 {
        self.entries.values().sum()
    }

    pub fn min_count(&self) -> u64 {
        self.min_count
    }

    pub fn iter(&self) -> impl Iterator<Item = (&TokenKey, u64)> {
        self.entries.iter().map(|(k, &c)| (k, c))
    }
}

/// The four POS categories retained by the POS model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PosCategory {
    Adj,
    Noun,
    Propn,
    Verb,
}

impl PosCategory {
    pub const ALL: [PosCategory; 4] = [
        PosCategory::Adj,
        PosCategory::Noun,
        PosCategory::Propn,
        PosCategory::Verb,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            PosCategory::Adj => "ADJ",
            PosCategory::Noun => "NOUN",
            PosCategory::Propn => "PROPN",
            PosCategory::Verb => "VERB",
        }
    }

    /// Exact tag match; anything else is outside the retained categories.
    pub fn from_tag(tag: &str) -> Option<Self> {
        match tag {
            "ADJ" => Some(PosCategory::Adj),
            "NOUN" => Some(PosCategory::Noun),
            "PROPN" => Some(PosCategory::Propn),
            "VERB" => Some(PosCategory::Verb),
            _ => None,
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for PosCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for PosCategory {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PosCategory::from_tag(&s.to_uppercase())
            .ok_or_else(|| Error::InvalidArgument(format!("unknown POS category {s:?}")))
    }
}

/// Per-category occurrence counts of one target lemma in one epoch.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PosCounts {
    target: String,
    epoch: Epoch,
    counts: [u64; 4],
}

impl PosCounts {
    pub fn new(target: impl Into<String>, epoch: Epoch, counts: [u64; 4]) -> Self {
        PosCounts {
            target: target.into(),
            epoch,
            counts,
        }
    }

    pub fn target(&self) -> &str {
        &self.target
    }

    pub fn epoch(&self) -> Epoch {
        self.epoch
    }

    pub fn count(&self, category: PosCategory) -> u64 {
        self.counts[category.index()]
    }

    pub fn counts(&self) -> [u64; 4] {
        self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Counts occurrences of `target_lemma` (matched case-insensitively
/// against the lemma column) grouped by the four retained categories.
/// Occurrences with any other POS tag are ignored.
pub fn pos_counts(corpus: &Corpus, target_lemma: &str) -> Result<PosCounts> {
    if target_lemma.is_empty() {
        return Err(Error::InvalidArgument("target lemma is empty".into()));
    }
    let needle = target_lemma.to_lowercase();
    let mut counts = [0u64; 4];
    for token in corpus.tokens() {
        if token.lemma().to_lowercase() != needle {
            continue;
        }
        if let Some(category) = PosCategory::from_tag(token.pos()) {
            counts[category.index()] += 1;
        }
    }
    Ok(PosCounts::new(target_lemma, corpus.epoch(), counts))
}

/// One line of a targets file: a lemma and an optional POS tag.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TargetSpec {
    pub lemma: String,
    pub pos: Option<String>,
}

/// Reads a targets file: one lemma per line, optional second
/// tab-separated field holding the POS tag. Blank lines and `#` comments
/// are skipped.
pub fn parse_targets<R: BufRead>(reader: R) -> Result<Vec<TargetSpec>> {
    let mut targets = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split('\t');
        let lemma = fields.next().unwrap_or("").trim();
        let pos = fields.next().map(str::trim).filter(|p| !p.is_empty());
        if lemma.is_empty() {
            return Err(Error::Parse {
                line: idx + 1,
                msg: "empty target lemma".into(),
            });
        }
        if fields.next().is_some() {
            return Err(Error::Parse {
                line: idx + 1,
                msg: "expected at most 2 tab-separated fields".into(),
            });
        }
        targets.push(TargetSpec {
            lemma: lemma.to_string(),
            pos: pos.map(str::to_string),
        });
    }
    Ok(targets)
}

/// Maps a target lemma onto its vocabulary key. When `pos` is absent the
/// most frequent POS tag of that lemma across both corpora is used, ties
/// broken lexicographically.
pub fn resolve_target_key(
    lemma: &str,
    pos: Option<&str>,
    t0: &Corpus,
    t1: &Corpus,
) -> Result<TokenKey> {
    if let Some(pos) = pos {
        return TokenKey::new(lemma, pos);
    }
    let needle = lemma.to_lowercase();
    let mut by_pos: HashMap<&str, u64> = HashMap::new();
    for token in t0.tokens().chain(t1.tokens()) {
        if token.lemma().to_lowercase() == needle {
            *by_pos.entry(token.pos()).or_insert(0) += 1;
        }
    }
    let best = by_pos
        .into_iter()
        .max_by(|(pa, ca), (pb, cb)| ca.cmp(cb).then_with(|| pb.cmp(pa)))
        .ok_or_else(|| Error::UnresolvedTarget(lemma.to_string()))?;
    TokenKey::new(lemma, best.0)
}
