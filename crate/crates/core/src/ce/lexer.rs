use super::CeError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenKind {
    Word(String),
    Quoted(String),
    Tilde,
    Period,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub line: usize,
    pub column: usize,
}

impl Token {
    pub fn word(&self) -> Option<&str> {
        match &self.kind {
            TokenKind::Word(w) => Some(w),
            _ => None,
        }
    }

    /// Case-insensitive keyword test.
    pub fn is(&self, keyword: &str) -> bool {
        self.word().is_some_and(|w| w.eq_ignore_ascii_case(keyword))
    }

    pub fn describe(&self) -> String {
        match &self.kind {
            TokenKind::Word(w) => format!("'{w}'"),
            TokenKind::Quoted(q) => format!("quoted '{q}'"),
            TokenKind::Tilde => "'~'".to_string(),
            TokenKind::Period => "'.'".to_string(),
        }
    }
}

/// Splits CE text into tokens. `--` starts a comment running to end of line;
/// quoted values open with ` or ' and close with an unescaped '.
pub fn tokenize(text: &str) -> Result<Vec<Token>, CeError> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);

    let advance = |c: char, line: &mut usize, col: &mut usize| {
        if c == '\n' {
            *line += 1;
            *col = 1;
        } else {
            *col += 1;
        }
    };

    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            advance(c, &mut line, &mut col);
            i += 1;
            continue;
        }
        if c == '-' && chars.get(i + 1) == Some(&'-') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
                col += 1;
            }
            continue;
        }
        let (tl, tc) = (line, col);
        match c {
            '~' => {
                tokens.push(Token { kind: TokenKind::Tilde, line: tl, column: tc });
                advance(c, &mut line, &mut col);
                i += 1;
            }
            '.' => {
                tokens.push(Token { kind: TokenKind::Period, line: tl, column: tc });
                advance(c, &mut line, &mut col);
                i += 1;
            }
            '`' | '\'' | '\u{2018}' => {
                advance(c, &mut line, &mut col);
                i += 1;
                let mut value = String::new();
                let mut closed = false;
                while i < chars.len() {
                    let d = chars[i];
                    advance(d, &mut line, &mut col);
                    i += 1;
                    match d {
                        '\\' if i < chars.len() => {
                            let e = chars[i];
                            advance(e, &mut line, &mut col);
                            i += 1;
                            value.push(e);
                        }
                        '\'' | '\u{2019}' => {
                            closed = true;
                            break;
                        }
                        _ => value.push(d),
                    }
                }
                if !closed {
                    return Err(CeError::new(tl, tc, "unterminated quoted value"));
                }
                tokens.push(Token { kind: TokenKind::Quoted(value), line: tl, column: tc });
            }
            _ => {
                let mut word = String::new();
                while i < chars.len() {
                    let d = chars[i];
                    if d.is_whitespace() || d == '~' {
                        break;
                    }
                    // a period ends the sentence when followed by space or end
                    if d == '.'
                        && chars
                            .get(i + 1)
                            .is_none_or(|n| n.is_whitespace() || *n == '-')
                    {
                        break;
                    }
                    word.push(d);
                    advance(d, &mut line, &mut col);
                    i += 1;
                }
                tokens.push(Token { kind: TokenKind::Word(word), line: tl, column: tc });
            }
        }
    }
    Ok(tokens)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(text: &str) -> Vec<TokenKind> {
        tokenize(text).unwrap().into_iter().map(|t| t.kind).collect()
    }

    #[test]
    fn both_quote_styles() {
        assert_eq!(
            kinds("`car' 'sports car'"),
            vec![
                TokenKind::Quoted("car".into()),
                TokenKind::Quoted("sports car".into())
            ]
        );
    }

    #[test]
    fn escapes_and_comments() {
        assert_eq!(
            kinds("'it\\'s' -- trailing remark\nnamed x."),
            vec![
                TokenKind::Quoted("it's".into()),
                TokenKind::Word("named".into()),
                TokenKind::Word("x".into()),
                TokenKind::Period,
            ]
        );
    }

    #[test]
    fn inner_periods_stay_in_words() {
        assert_eq!(
            kinds("has 3.5 as size."),
            vec![
                TokenKind::Word("has".into()),
                TokenKind::Word("3.5".into()),
                TokenKind::Word("as".into()),
                TokenKind::Word("size".into()),
                TokenKind::Period,
            ]
        );
    }

    #[test]
    fn location_of_unterminated_quote() {
        let err = tokenize("there is\n  a 'broken").unwrap_err();
        assert_eq!((err.line, err.column), (2, 5));
    }
}
