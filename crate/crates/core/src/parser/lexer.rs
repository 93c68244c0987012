//! Bracket-aware splitting of a match line into compound terms and of a
//! term's argument string into raw value tokens.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LexError {
    #[error("unbalanced `{found}` at offset {offset}")]
    Unbalanced { offset: usize, found: char },
    #[error("unclosed `{open}` opened at offset {offset}")]
    Unclosed { offset: usize, open: char },
    #[error("expected a term name at offset {offset}")]
    ExpectedName { offset: usize },
    #[error("unexpected `{found}` at offset {offset}")]
    Unexpected { offset: usize, found: char },
}

impl LexError {
    pub fn offset(&self) -> usize {
        match self {
            LexError::Unbalanced { offset, .. }
            | LexError::Unclosed { offset, .. }
            | LexError::ExpectedName { offset }
            | LexError::Unexpected { offset, .. } => *offset,
        }
    }

    pub fn is_bracket_error(&self) -> bool {
        matches!(self, LexError::Unbalanced { .. } | LexError::Unclosed { .. })
    }

    fn shifted(self, by: usize) -> Self {
        match self {
            LexError::Unbalanced { offset, found } => LexError::Unbalanced {
                offset: offset + by,
                found,
            },
            LexError::Unclosed { offset, open } => LexError::Unclosed {
                offset: offset + by,
                open,
            },
            LexError::ExpectedName { offset } => LexError::ExpectedName { offset: offset + by },
            LexError::Unexpected { offset, found } => LexError::Unexpected {
                offset: offset + by,
                found,
            },
        }
    }
}

/// `name` or `name(args)`; `args` excludes the parentheses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Term<'a> {
    pub name: &'a str,
    pub args: Option<&'a str>,
    /// Byte offset of `args` within the text handed to [`split_terms`].
    pub args_offset: usize,
}

fn closing(open: char) -> char {
    match open {
        '(' => ')',
        '[' => ']',
        _ => unreachable!(),
    }
}

/// Byte offset of the bracket closing the one at `start`.
fn matching_close(text: &str, start: usize) -> Result<usize, LexError> {
    let mut stack: Vec<(char, usize)> = Vec::new();
    for (i, c) in text[start..].char_indices() {
        let at = start + i;
        match c {
            '(' | '[' => stack.push((c, at)),
            ')' | ']' => match stack.pop() {
                Some((open, _)) if closing(open) == c => {
                    if stack.is_empty() {
                        return Ok(at);
                    }
                }
                _ => return Err(LexError::Unbalanced { offset: at, found: c }),
            },
            _ => {}
        }
    }
    let (open, offset) = stack[0];
    Err(LexError::Unclosed { offset, open })
}

/// Splits `snote(...)-note(...)` into its `-`-joined terms.
pub fn split_terms(text: &str) -> Result<Vec<Term<'_>>, LexError> {
    let mut terms = Vec::new();
    let mut pos = 0;
    loop {
        let rest = &text[pos..];
        let name_len = rest
            .char_indices()
            .find(|(_, c)| !(c.is_ascii_alphanumeric() || *c == '_'))
            .map_or(rest.len(), |(i, _)| i);
        if name_len == 0 || !rest.as_bytes()[0].is_ascii_alphabetic() {
            return Err(LexError::ExpectedName { offset: pos });
        }
        let name = &rest[..name_len];
        pos += name_len;
        let mut term = Term {
            name,
            args: None,
            args_offset: pos,
        };
        if text[pos..].starts_with('(') {
            let close = matching_close(text, pos)?;
            term.args = Some(&text[pos + 1..close]);
            term.args_offset = pos + 1;
            pos = close + 1;
        }
        terms.push(term);
        match text[pos..].chars().next() {
            None => return Ok(terms),
            Some('-') => pos += 1,
            Some(c) => return Err(LexError::Unexpected { offset: pos, found: c }),
        }
    }
}

/// Splits on top-level commas. Tokens keep interior (and surrounding)
/// whitespace; an empty argument string yields no tokens.
pub fn value_lexer(raw_args: &str) -> Result<Vec<&str>, LexError> {
    if raw_args.is_empty() {
        return Ok(Vec::new());
    }
    let mut tokens = Vec::new();
    let mut stack: Vec<(char, usize)> = Vec::new();
    let mut start = 0;
    for (i, c) in raw_args.char_indices() {
        match c {
            '(' | '[' => stack.push((c, i)),
            ')' | ']' => match stack.pop() {
                Some((open, _)) if closing(open) == c => {}
                _ => return Err(LexError::Unbalanced { offset: i, found: c }),
            },
            ',' if stack.is_empty() => {
                tokens.push(&raw_args[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    if let Some(&(open, offset)) = stack.first() {
        return Err(LexError::Unclosed { offset, open });
    }
    tokens.push(&raw_args[start..]);
    Ok(tokens)
}

/// Items of a `[a,b,c]` list token, or `None` if the token is not a list.
pub fn list_items(token: &str) -> Option<Result<Vec<&str>, LexError>> {
    let inner = token.strip_prefix('[')?.strip_suffix(']')?;
    Some(value_lexer(inner).map_err(|e| e.shifted(1)))
}

/// Byte offset of `part` inside `whole`; `part` must be a subslice.
pub(crate) fn offset_in(whole: &str, part: &str) -> usize {
    let start = whole.as_ptr() as usize;
    let at = part.as_ptr() as usize;
    debug_assert!(at >= start && at <= start + whole.len());
    at.saturating_sub(start)
}
