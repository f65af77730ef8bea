//! Column-format corpora and the shared vocabulary.
//!
//! Corpora use the CoNLL layout: one token per line, whitespace-separated
//! columns, and a blank line after every sentence. CoNLL-2000 chunking files
//! carry `word POS chunk`; CCG files `word supertag`; derived keystroke
//! corpora `word label`.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaggedSentence {
    pub tokens: Vec<String>,
    pub labels: Vec<String>,
    pub task_id: String,
}

/// Raw rows of a column file grouped into sentences. All rows must have the
/// same column count.
pub fn read_rows<R: BufRead>(reader: R) -> Result<Vec<Vec<Vec<String>>>> {
    let mut sentences = Vec::new();
    let mut current: Vec<Vec<String>> = Vec::new();
    let mut width: Option<usize> = None;
    let mut last_line = 0;
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        last_line = lineno;
        let line = line?;
        let cols: Vec<String> = line.split_whitespace().map(str::to_string).collect();
        if cols.is_empty() {
            if !current.is_empty() {
                sentences.push(std::mem::take(&mut current));
            }
            continue;
        }
        match width {
            None => width = Some(cols.len()),
            Some(w) if w != cols.len() => {
                return Err(Error::parse(
                    lineno,
                    format!("expected {w} columns, found {}", cols.len()),
                ))
            }
            Some(_) => {}
        }
        current.push(cols);
    }
    if !current.is_empty() {
        sentences.push(current);
    }
    if sentences.is_empty() {
        return Err(Error::parse(last_line.max(1), "empty corpus"));
    }
    Ok(sentences)
}

pub fn read_column_corpus<R: BufRead>(
    reader: R,
    token_col: usize,
    label_col: usize,
    task_id: &str,
) -> Result<Vec<TaggedSentence>> {
    let rows = read_rows(reader)?;
    let width = rows[0][0].len();
    if token_col >= width || label_col >= width {
        return Err(Error::parse(
            1,
            format!(
                "column {} requested from a {width}-column corpus",
                token_col.max(label_col)
            ),
        ));
    }
    Ok(rows
        .into_iter()
        .map(|sentence| {
            let (tokens, labels) = sentence
                .into_iter()
                .map(|mut row| {
                    let label = std::mem::take(&mut row[label_col]);
                    (std::mem::take(&mut row[token_col]), label)
                })
                .unzip();
            TaggedSentence {
                tokens,
                labels,
                task_id: task_id.to_string(),
            }
        })
        .collect())
}

/// Token sequences only, from the given column.
pub fn read_tokens<R: BufRead>(reader: R, token_col: usize) -> Result<Vec<Vec<String>>> {
    let rows = read_rows(reader)?;
    if token_col >= rows[0][0].len() {
        return Err(Error::parse(1, format!("no column {token_col}")));
    }
    Ok(rows
        .into_iter()
        .map(|s| {
            s.into_iter()
                .map(|mut row| std::mem::take(&mut row[token_col]))
                .collect()
        })
        .collect())
}

/// Writes `token<TAB>label` lines with a blank line after every sentence.
pub fn write_column_corpus<W: Write>(sentences: &[TaggedSentence], mut out: W) -> Result<()> {
    for sentence in sentences {
        for (token, label) in sentence.tokens.iter().zip(&sentence.labels) {
            writeln!(out, "{token}\t{label}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Dense string ids in first-occurrence order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Interner {
    items: Vec<String>,
    index: HashMap<String, usize>,
}

impl Interner {
    pub fn from_items(items: Vec<String>) -> Self {
        let index = items
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i))
            .collect();
        Interner { items, index }
    }

    pub fn intern(&mut self, item: &str) -> usize {
        if let Some(&id) = self.index.get(item) {
            return id;
        }
        self.items.push(item.to_string());
        self.index.insert(item.to_string(), self.items.len() - 1);
        self.items.len() - 1
    }

    pub fn get(&self, item: &str) -> Option<usize> {
        self.index.get(item).copied()
    }

    pub fn name(&self, id: usize) -> &str {
        &self.items[id]
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn items(&self) -> &[String] {
        &self.items
    }
}

pub const UNK: &str = "<UNK>";
pub const UNK_ID: usize = 0;

/// Word, character and per-task label inventories. Word and character id 0
/// is reserved for unknown items; lookups never fail.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "VocabRepr", into = "VocabRepr")]
pub struct Vocabulary {
    words: Interner,
    chars: Interner,
    tasks: Vec<(String, Interner)>,
}

#[derive(Serialize, Deserialize)]
struct VocabRepr {
    words: Vec<String>,
    chars: Vec<String>,
    labels: Vec<(String, Vec<String>)>,
}

impl From<VocabRepr> for Vocabulary {
    fn from(r: VocabRepr) -> Self {
        Vocabulary {
            words: Interner::from_items(r.words),
            chars: Interner::from_items(r.chars),
            tasks: r
                .labels
                .into_iter()
                .map(|(task, labels)| (task, Interner::from_items(labels)))
                .collect(),
        }
    }
}

impl From<Vocabulary> for VocabRepr {
    fn from(v: Vocabulary) -> Self {
        VocabRepr {
            words: v.words.items,
            chars: v.chars.items,
            labels: v.tasks.into_iter().map(|(t, l)| (t, l.items)).collect(),
        }
    }
}

impl Vocabulary {
    /// Builds the vocabulary over all training corpora of all tasks.
    pub fn build<'a, I>(corpora: I) -> Self
    where
        I: IntoIterator<Item = &'a [TaggedSentence]>,
    {
        let mut words = Interner::default();
        let mut chars = Interner::default();
        words.intern(UNK);
        chars.intern(UNK);
        let mut tasks: Vec<(String, Interner)> = Vec::new();
        for corpus in corpora {
            for sentence in corpus {
                let slot = match tasks.iter().position(|(t, _)| *t == sentence.task_id) {
                    Some(i) => i,
                    None => {
                        tasks.push((sentence.task_id.clone(), Interner::default()));
                        tasks.len() - 1
                    }
                };
                for (token, label) in sentence.tokens.iter().zip(&sentence.labels) {
                    words.intern(token);
                    for c in token.chars() {
                        chars.intern(c.encode_utf8(&mut [0; 4]));
                    }
                    tasks[slot].1.intern(label);
                }
            }
        }
        Vocabulary {
            words,
            chars,
            tasks,
        }
    }

    pub fn word_id(&self, word: &str) -> usize {
        self.words.get(word).unwrap_or(UNK_ID)
    }

    pub fn char_ids(&self, word: &str) -> Vec<usize> {
        word.chars()
            .map(|c| self.chars.get(c.encode_utf8(&mut [0; 4])).unwrap_or(UNK_ID))
            .collect()
    }

    pub fn n_words(&self) -> usize {
        self.words.len()
    }

    pub fn n_chars(&self) -> usize {
        self.chars.len()
    }

    pub fn words(&self) -> &Interner {
        &self.words
    }

    pub fn task_ids(&self) -> impl Iterator<Item = &str> {
        self.tasks.iter().map(|(t, _)| t.as_str())
    }

    pub fn labels(&self, task: &str) -> Option<&Interner> {
        self.tasks.iter().find(|(t, _)| t == task).map(|(_, l)| l)
    }

    /// Registers a task with an explicit label inventory (used when a task
    /// has no training sentences yet, e.g. in tests).
    pub fn add_task(&mut self, task: &str, labels: &[&str]) {
        let mut interner = Interner::default();
        for l in labels {
            interner.intern(l);
        }
        self.tasks.push((task.to_string(), interner));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sentence(tokens: &[&str], labels: &[&str], task: &str) -> TaggedSentence {
        TaggedSentence {
            tokens: tokens.iter().map(|s| s.to_string()).collect(),
            labels: labels.iter().map(|s| s.to_string()).collect(),
            task_id: task.into(),
        }
    }

    #[test]
    fn reads_two_line_sentence() {
        let out = read_column_corpus("the B-NP\ndog I-NP\n\n".as_bytes(), 0, 1, "chunk").unwrap();
        assert_eq!(
            out,
            vec![sentence(&["the", "dog"], &["B-NP", "I-NP"], "chunk")]
        );
    }

    #[test]
    fn reads_conll2000_columns() {
        let text = "He PRP B-NP\nruns VBZ B-VP\n\nOk UH B-INTJ\n";
        let out = read_column_corpus(text.as_bytes(), 0, 2, "chunk").unwrap();
        assert_eq!(out.len(), 2);
        assert_eq!(out[0].labels, ["B-NP", "B-VP"]);
        assert_eq!(out[1].tokens, ["Ok"]);
    }

    #[test]
    fn ragged_rows_are_rejected() {
        let text = "He PRP B-NP\nruns B-VP\n";
        let err = read_column_corpus(text.as_bytes(), 0, 2, "chunk").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
    }

    #[test]
    fn empty_file_is_rejected() {
        assert!(read_column_corpus("".as_bytes(), 0, 1, "t").is_err());
        assert!(read_column_corpus("\n\n".as_bytes(), 0, 1, "t").is_err());
    }

    #[test]
    fn missing_label_column_is_rejected() {
        assert!(read_column_corpus("a B\n".as_bytes(), 0, 2, "t").is_err());
    }

    #[test]
    fn writes_blocks() {
        let mut out = Vec::new();
        write_column_corpus(&[], &mut out).unwrap();
        assert!(out.is_empty());
        write_column_corpus(&[sentence(&["a", "b"], &["X", "Y"], "t")], &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "a\tX\nb\tY\n\n");
    }

    #[test]
    fn vocabulary_is_a_union_with_per_task_labels() {
        let main = vec![sentence(&["the", "dog"], &["B-NP", "I-NP"], "chunk")];
        let aux = vec![sentence(&["the", "cat"], &["B-<m", "I-<m"], "keystroke")];
        let vocab = Vocabulary::build([main.as_slice(), aux.as_slice()]);
        assert_eq!(vocab.words().items(), [UNK, "the", "dog", "cat"]);
        assert_eq!(vocab.word_id("giraffe"), UNK_ID);
        assert_eq!(vocab.word_id("cat"), 3);
        let chunk = vocab.labels("chunk").unwrap();
        assert_eq!(chunk.items(), ["B-NP", "I-NP"]);
        assert!(chunk.get("B-<m").is_none());
        assert_eq!(vocab.char_ids("tz"), vec![1, UNK_ID]);
    }

    #[test]
    fn vocabulary_serializes() {
        let main = vec![sentence(&["é", "dog"], &["B-NP", "I-NP"], "chunk")];
        let vocab = Vocabulary::build([main.as_slice()]);
        let json = serde_json::to_string(&vocab).unwrap();
        let back: Vocabulary = serde_json::from_str(&json).unwrap();
        assert_eq!(back, vocab);
        assert_eq!(back.word_id("dog"), 2);
    }
}
