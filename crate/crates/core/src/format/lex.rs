//! Line-level tokenizer shared by the text formats.

use crate::error::Error;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    Int(i64),
    Plus,
    Minus,
    Colon,
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Token {
    pub tok: Tok,
    /// 1-based column.
    pub col: usize,
}

pub(crate) fn parse_error(line: usize, col: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column: col,
        message: message.into(),
    }
}

pub(crate) fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

pub(crate) fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '.'
}

pub(crate) fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    chars.next().is_some_and(is_ident_start) && chars.all(is_ident_char)
}

/// Strips a trailing `#` comment.
pub(crate) fn strip_comment(line: &str) -> &str {
    line.split_once('#').map_or(line, |(code, _)| code)
}

/// Whitespace-separated words with their 1-based columns.
pub(crate) fn words(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in line.char_indices() {
        match (c.is_whitespace(), start) {
            (true, Some(s)) => {
                out.push((s + 1, &line[s..i]));
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s + 1, &line[s..]));
    }
    out
}

pub(crate) fn tokenize(line: &str, lineno: usize) -> Result<Vec<Token>, Error> {
    let chars: Vec<char> = line.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let (tok, len) = match c {
            '+' => (Tok::Plus, 1),
            '-' => (Tok::Minus, 1),
            ':' => (Tok::Colon, 1),
            '=' => (Tok::Eq, if chars.get(i + 1) == Some(&'=') { 2 } else { 1 }),
            '<' | '>' => {
                if chars.get(i + 1) != Some(&'=') {
                    return Err(parse_error(lineno, col, format!("expected `{c}=`")));
                }
                (if c == '<' { Tok::Le } else { Tok::Ge }, 2)
            }
            c if c.is_ascii_digit() => {
                let end = (i..chars.len())
                    .find(|&j| !chars[j].is_ascii_digit())
                    .unwrap_or(chars.len());
                if chars.get(end).is_some_and(|&c| is_ident_start(c)) {
                    return Err(parse_error(
                        lineno,
                        end + 1,
                        "separate coefficients from names with a space",
                    ));
                }
                let text: String = chars[i..end].iter().collect();
                let value = text.parse().map_err(|_| {
                    parse_error(lineno, col, format!("integer `{text}` is out of range"))
                })?;
                (Tok::Int(value), end - i)
            }
            c if is_ident_start(c) => {
                let end = (i..chars.len())
                    .find(|&j| !is_ident_char(chars[j]))
                    .unwrap_or(chars.len());
                (Tok::Ident(chars[i..end].iter().collect()), end - i)
            }
            other => {
                return Err(parse_error(
                    lineno,
                    col,
                    format!("unexpected character `{other}`"),
                ))
            }
        };
        out.push(Token { tok, col });
        i += len;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokens_and_columns() {
        let toks = tokenize("c0: x - 2 n_even <= -10", 1).unwrap();
        let kinds: Vec<Tok> = toks.iter().map(|t| t.tok.clone()).collect();
        assert_eq!(
            kinds,
            vec![
                Tok::Ident("c0".into()),
                Tok::Colon,
                Tok::Ident("x".into()),
                Tok::Minus,
                Tok::Int(2),
                Tok::Ident("n_even".into()),
                Tok::Le,
                Tok::Minus,
                Tok::Int(10),
            ]
        );
        assert_eq!(toks[5].col, 11);
    }

    #[test]
    fn bad_characters_report_position() {
        assert_eq!(
            tokenize("x < 3", 4),
            Err(parse_error(4, 3, "expected `<=`"))
        );
        assert!(matches!(
            tokenize("x $", 1),
            Err(Error::Parse { column: 3, .. })
        ));
        assert!(tokenize("2x <= 1", 1).is_err());
    }

    #[test]
    fn word_columns() {
        assert_eq!(
            words("  even  1 require"),
            vec![(3, "even"), (9, "1"), (11, "require")]
        );
        assert_eq!(strip_comment("x int 0 1 # note"), "x int 0 1 ");
    }
}
