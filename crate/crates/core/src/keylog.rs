//! Keystroke event logs and pre-word pauses.
//!
//! A log is a tab-separated text file with one key event per line:
//!
//! ```text
//! # user  session  key  press_ms  release_ms
//! u1  s1  a      100  150
//! u1  s1  SPACE  210  260
//! ```
//!
//! Lines starting with `#` and blank lines are ignored. Keys are either a
//! single produced character or a named key (`SPACE`, `ENTER`, `TAB`,
//! `BACKSPACE`, `SHIFT`, ...). Within one (user, session) stream, press times
//! must be non-decreasing.

use std::collections::HashMap;
use std::fmt;
use std::io::BufRead;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeystrokeEvent {
    pub key: String,
    pub press_ms: u64,
    pub release_ms: u64,
    pub user_id: String,
    pub session_id: String,
}

/// All events of one (user, session) pair, in input order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Session {
    pub user_id: String,
    pub session_id: String,
    pub events: Vec<KeystrokeEvent>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PausedToken {
    pub text: String,
    pub pre_pause_ms: u64,
    pub is_punct: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PausedSentence {
    pub tokens: Vec<PausedToken>,
    pub user_id: String,
    pub session_id: String,
}

/// How the pause before a key is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum PauseMode {
    /// Previous key's release to this key's press.
    #[default]
    ReleaseToPress,
    /// Previous key's press to this key's press.
    PressToPress,
}

impl FromStr for PauseMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "release-to-press" => Ok(PauseMode::ReleaseToPress),
            "press-to-press" => Ok(PauseMode::PressToPress),
            other => Err(Error::Config(format!(
                "unknown pause mode {other:?} (expected release-to-press or press-to-press)"
            ))),
        }
    }
}

impl fmt::Display for PauseMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PauseMode::ReleaseToPress => "release-to-press",
            PauseMode::PressToPress => "press-to-press",
        })
    }
}

/// Parses an event log, grouping events by (user, session) in order of first
/// appearance.
pub fn parse_keylog<R: BufRead>(reader: R) -> Result<Vec<Session>> {
    let mut sessions: Vec<Session> = Vec::new();
    let mut index: HashMap<(String, String), usize> = HashMap::new();

    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line?;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 5 {
            return Err(Error::parse(
                lineno,
                format!("expected 5 tab-separated columns, found {}", cols.len()),
            ));
        }
        let press_ms = parse_ms(cols[3], "press_ms", lineno)?;
        let release_ms = parse_ms(cols[4], "release_ms", lineno)?;
        if release_ms < press_ms {
            return Err(Error::parse(lineno, "release before press"));
        }
        if cols[2].is_empty() {
            return Err(Error::parse(lineno, "empty key"));
        }
        let event = KeystrokeEvent {
            key: cols[2].to_string(),
            press_ms,
            release_ms,
            user_id: cols[0].to_string(),
            session_id: cols[1].to_string(),
        };

        let slot = *index
            .entry((event.user_id.clone(), event.session_id.clone()))
            .or_insert_with(|| {
                sessions.push(Session {
                    user_id: event.user_id.clone(),
                    session_id: event.session_id.clone(),
                    events: Vec::new(),
                });
                sessions.len() - 1
            });
        let session = &mut sessions[slot];
        if let Some(last) = session.events.last() {
            if event.press_ms < last.press_ms {
                return Err(Error::parse(lineno, "out-of-order event"));
            }
        }
        session.events.push(event);
    }
    Ok(sessions)
}

fn parse_ms(field: &str, name: &str, lineno: usize) -> Result<u64> {
    field
        .trim()
        .parse::<u64>()
        .map_err(|_| Error::parse(lineno, format!("non-integer {name} {field:?}")))
}

/// Pause between two consecutive events, clamped at zero.
pub fn compute_pause(prev: &KeystrokeEvent, cur: &KeystrokeEvent, mode: PauseMode) -> u64 {
    let from = match mode {
        PauseMode::ReleaseToPress => prev.release_ms,
        PauseMode::PressToPress => prev.press_ms,
    };
    cur.press_ms.saturating_sub(from)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenizerConfig {
    /// Tokens made only of these characters close a sentence.
    pub boundary_punct: Vec<char>,
}

impl Default for TokenizerConfig {
    fn default() -> Self {
        TokenizerConfig {
            boundary_punct: vec!['.', '!', '?'],
        }
    }
}

impl TokenizerConfig {
    pub fn with_boundary_punct(set: &str) -> Self {
        TokenizerConfig {
            boundary_punct: set.chars().filter(|c| !c.is_whitespace()).collect(),
        }
    }

    pub fn is_boundary(&self, c: char) -> bool {
        self.boundary_punct.contains(&c)
    }

    fn is_boundary_token(&self, text: &str) -> bool {
        !text.is_empty() && text.chars().all(|c| self.is_boundary(c))
    }
}

/// True when every character of `text` is ASCII punctuation.
pub fn is_punct(text: &str) -> bool {
    !text.is_empty() && text.chars().all(|c| c.is_ascii_punctuation())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum KeyKind {
    Char(char),
    Whitespace,
    Backspace,
    Ignored,
}

fn classify(key: &str) -> KeyKind {
    let mut chars = key.chars();
    match (chars.next(), chars.next()) {
        (Some(c), None) if c.is_whitespace() => KeyKind::Whitespace,
        (Some(c), None) => KeyKind::Char(c),
        _ => match key.to_ascii_uppercase().as_str() {
            "SPACE" | "ENTER" | "RETURN" | "TAB" => KeyKind::Whitespace,
            "BACKSPACE" => KeyKind::Backspace,
            _ => KeyKind::Ignored,
        },
    }
}

#[derive(Debug, Clone, Copy)]
enum Slot {
    /// A produced character and the index of the event that produced it.
    Char(char, usize),
    Space,
}

/// Replays the stream into the reconstruction buffer, resolving backspaces.
fn replay(events: &[KeystrokeEvent]) -> Vec<Slot> {
    let mut buffer = Vec::new();
    for (idx, event) in events.iter().enumerate() {
        match classify(&event.key) {
            KeyKind::Char(c) => buffer.push(Slot::Char(c, idx)),
            KeyKind::Whitespace => buffer.push(Slot::Space),
            KeyKind::Backspace => {
                buffer.pop();
            }
            KeyKind::Ignored => {}
        }
    }
    buffer
}

/// The typed text after backspace resolution, with every whitespace key
/// rendered as a single space.
pub fn typed_text(events: &[KeystrokeEvent]) -> String {
    replay(events)
        .into_iter()
        .map(|slot| match slot {
            Slot::Char(c, _) => c,
            Slot::Space => ' ',
        })
        .collect()
}

/// Reconstructs the sentences typed in one (user, session) stream.
///
/// Whitespace keys delimit tokens. A trailing run of sentence-boundary
/// characters is split off its word ("Hi!" gives "Hi" and "!"), and a token
/// consisting only of boundary characters closes the sentence. The pause of
/// a token is measured from the physical event right before its first
/// surviving character; the first token of the session gets 0.
pub fn tokenize_with_pauses(
    events: &[KeystrokeEvent],
    mode: PauseMode,
    config: &TokenizerConfig,
) -> Vec<PausedSentence> {
    let Some(first) = events.first() else {
        return Vec::new();
    };

    // Each raw token keeps the producing event index of every character.
    let mut raw: Vec<Vec<(char, usize)>> = Vec::new();
    let mut current: Vec<(char, usize)> = Vec::new();
    for slot in replay(events) {
        match slot {
            Slot::Char(c, idx) => current.push((c, idx)),
            Slot::Space if !current.is_empty() => raw.push(std::mem::take(&mut current)),
            Slot::Space => {}
        }
    }
    if !current.is_empty() {
        raw.push(current);
    }

    let mut pieces: Vec<(String, usize)> = Vec::new();
    for chars in raw {
        let split = chars
            .iter()
            .rposition(|&(c, _)| !config.is_boundary(c))
            .map_or(0, |p| p + 1);
        let text = |part: &[(char, usize)]| part.iter().map(|&(c, _)| c).collect::<String>();
        if split > 0 && split < chars.len() {
            pieces.push((text(&chars[..split]), chars[0].1));
            pieces.push((text(&chars[split..]), chars[split].1));
        } else {
            pieces.push((text(&chars), chars[0].1));
        }
    }

    let mut sentences = Vec::new();
    let mut tokens = Vec::new();
    for (n, (text, idx)) in pieces.into_iter().enumerate() {
        let pre_pause_ms = if n == 0 || idx == 0 {
            0
        } else {
            compute_pause(&events[idx - 1], &events[idx], mode)
        };
        let closes = config.is_boundary_token(&text);
        tokens.push(PausedToken {
            is_punct: is_punct(&text),
            text,
            pre_pause_ms,
        });
        if closes {
            sentences.push(std::mem::take(&mut tokens));
        }
    }
    if !tokens.is_empty() {
        sentences.push(tokens);
    }

    sentences
        .into_iter()
        .map(|tokens| PausedSentence {
            tokens,
            user_id: first.user_id.clone(),
            session_id: first.session_id.clone(),
        })
        .collect()
}

/// Tokenizes every session, returning sentences ordered by (user, session).
pub fn tokenize_sessions(
    sessions: &[Session],
    mode: PauseMode,
    config: &TokenizerConfig,
) -> Vec<PausedSentence> {
    let mut order: Vec<&Session> = sessions.iter().collect();
    order.sort_by(|a, b| (&a.user_id, &a.session_id).cmp(&(&b.user_id, &b.session_id)));
    order
        .par_iter()
        .map(|s| tokenize_with_pauses(&s.events, mode, config))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(key: &str, press: u64, release: u64) -> KeystrokeEvent {
        KeystrokeEvent {
            key: key.into(),
            press_ms: press,
            release_ms: release,
            user_id: "u1".into(),
            session_id: "s1".into(),
        }
    }

    fn texts(s: &PausedSentence) -> Vec<&str> {
        s.tokens.iter().map(|t| t.text.as_str()).collect()
    }

    fn pauses(s: &PausedSentence) -> Vec<u64> {
        s.tokens.iter().map(|t| t.pre_pause_ms).collect()
    }

    #[test]
    fn parses_single_line() {
        let sessions = parse_keylog("u1\ts1\ta\t100\t150\n".as_bytes()).unwrap();
        assert_eq!(sessions.len(), 1);
        assert_eq!(sessions[0].events, vec![ev("a", 100, 150)]);
    }

    #[test]
    fn release_before_press_is_rejected() {
        let err = parse_keylog("u1\ts1\ta\t100\t90\n".as_bytes()).unwrap_err();
        assert_eq!(err.to_string(), "release before press at line 1");
    }

    #[test]
    fn out_of_order_is_rejected() {
        let log = "u1\ts1\ta\t200\t250\nu1\ts1\tb\t100\t150\n";
        let err = parse_keylog(log.as_bytes()).unwrap_err();
        assert_eq!(err.to_string(), "out-of-order event at line 2");
    }

    #[test]
    fn malformed_lines_name_the_line() {
        let err = parse_keylog("# header\nu1\ts1\ta\t100\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        let err = parse_keylog("u1\ts1\ta\tx\t100\n".as_bytes()).unwrap_err();
        assert!(err.to_string().contains("non-integer press_ms"), "{err}");
    }

    #[test]
    fn interleaved_streams_are_grouped() {
        let log = "u1\ts1\ta\t200\t250\nu2\ts1\tb\t100\t150\nu1\ts1\tc\t300\t350\n";
        let sessions = parse_keylog(log.as_bytes()).unwrap();
        assert_eq!(sessions.len(), 2);
        assert_eq!(sessions[0].events.len(), 2);
        assert_eq!(sessions[1].user_id, "u2");
    }

    #[test]
    fn pause_modes() {
        let prev = ev("a", 100, 100);
        let cur = ev("b", 150, 160);
        assert_eq!(compute_pause(&prev, &cur, PauseMode::ReleaseToPress), 50);
        let prev = ev("a", 100, 200);
        assert_eq!(compute_pause(&prev, &cur, PauseMode::ReleaseToPress), 0);
        let cur = ev("b", 400, 410);
        assert_eq!(
            compute_pause(&ev("a", 100, 120), &cur, PauseMode::PressToPress),
            300
        );
    }

    #[test]
    fn tokenizes_is_a_dot() {
        // i s SPACE a SPACE .
        let events = vec![
            ev("i", 0, 50),
            ev("s", 100, 150),
            ev("SPACE", 200, 240),
            ev("a", 400, 450),
            ev("SPACE", 500, 530),
            ev(".", 900, 950),
        ];
        let out = tokenize_with_pauses(&events, PauseMode::ReleaseToPress, &Default::default());
        assert_eq!(out.len(), 1);
        assert_eq!(texts(&out[0]), ["is", "a", "."]);
        assert_eq!(pauses(&out[0]), [0, 160, 370]);
        assert!(out[0].tokens[2].is_punct);

        let out = tokenize_with_pauses(&events, PauseMode::PressToPress, &Default::default());
        assert_eq!(pauses(&out[0]), [0, 200, 400]);
    }

    #[test]
    fn attached_boundary_punct_is_split() {
        let keys = ["H", "i", "!", "SPACE", "O", "k", "!"];
        let events: Vec<_> = keys
            .iter()
            .enumerate()
            .map(|(i, k)| ev(k, i as u64 * 100, i as u64 * 100 + 30))
            .collect();
        let out = tokenize_with_pauses(&events, PauseMode::ReleaseToPress, &Default::default());
        assert_eq!(out.len(), 2);
        assert_eq!(texts(&out[0]), ["Hi", "!"]);
        assert_eq!(texts(&out[1]), ["Ok", "!"]);
        // "!" follows "i" directly: 200 - 130
        assert_eq!(pauses(&out[0]), [0, 70]);
        assert_eq!(pauses(&out[1]), [70, 70]);
    }

    #[test]
    fn empty_stream() {
        assert!(
            tokenize_with_pauses(&[], PauseMode::ReleaseToPress, &Default::default()).is_empty()
        );
    }

    #[test]
    fn backspace_removes_characters_but_not_time() {
        // "ab" BACKSPACE "c" SPACE SHIFT "d"
        let events = vec![
            ev("a", 0, 10),
            ev("b", 100, 110),
            ev("BACKSPACE", 200, 210),
            ev("c", 300, 310),
            ev("SPACE", 400, 410),
            ev("SHIFT", 500, 900),
            ev("D", 950, 960),
        ];
        let out = tokenize_with_pauses(&events, PauseMode::ReleaseToPress, &Default::default());
        assert_eq!(texts(&out[0]), ["ac", "D"]);
        // measured from SHIFT release, the physical event right before "D"
        assert_eq!(pauses(&out[0]), [0, 50]);
        assert_eq!(typed_text(&events), "ac D");
    }

    #[test]
    fn backspace_over_space_joins_tokens() {
        let events = vec![
            ev("a", 0, 10),
            ev("SPACE", 100, 110),
            ev("BACKSPACE", 200, 210),
            ev("b", 300, 310),
        ];
        let out = tokenize_with_pauses(&events, PauseMode::ReleaseToPress, &Default::default());
        assert_eq!(texts(&out[0]), ["ab"]);
    }

    #[test]
    fn custom_boundary_set() {
        let keys = ["a", ";", "SPACE", "b", "."];
        let events: Vec<_> = keys
            .iter()
            .enumerate()
            .map(|(i, k)| ev(k, i as u64 * 100, i as u64 * 100 + 30))
            .collect();
        let config = TokenizerConfig::with_boundary_punct(";");
        let out = tokenize_with_pauses(&events, PauseMode::ReleaseToPress, &config);
        assert_eq!(out.len(), 2);
        assert_eq!(texts(&out[0]), ["a", ";"]);
        assert_eq!(texts(&out[1]), ["b."]);
        assert!(!out[1].tokens[0].is_punct);
    }

    #[test]
    fn is_punct_requires_all_punctuation() {
        assert!(is_punct("..."));
        assert!(is_punct(","));
        assert!(!is_punct("a."));
        assert!(!is_punct(""));
    }
}
