use serde::{Deserialize, Serialize};

/// Where a piece of text came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Segment {
    Title,
    Body,
    Question,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub text: String,
    pub lower: String,
    pub index: usize,
    pub segment: Segment,
    /// True for tokens made only of punctuation or symbols.
    pub punct: bool,
}

impl Token {
    pub fn new(text: impl Into<String>, index: usize, segment: Segment) -> Self {
        let text = text.into();
        let lower = text.to_lowercase();
        let punct = !text.chars().any(char::is_alphanumeric);
        Token {
            text,
            lower,
            index,
            segment,
            punct,
        }
    }

    /// First character is an uppercase letter.
    pub fn is_capitalized(&self) -> bool {
        self.text.chars().next().is_some_and(char::is_uppercase)
    }
}

fn joins_word(c: char, prev: Option<char>, next: Option<char>) -> bool {
    let (Some(p), Some(n)) = (prev, next) else {
        return false;
    };
    match c {
        '\'' | '\u{2019}' | '-' | '.' | '&' => p.is_alphanumeric() && n.is_alphanumeric(),
        ',' => p.is_ascii_digit() && n.is_ascii_digit(),
        _ => false,
    }
}

/// Splits on whitespace and punctuation. Words are runs of alphanumerics, with internal
/// apostrophes, hyphens, periods and ampersands kept (`david's`, `spider-man`, `3.5`) and
/// digit-group commas kept (`1,300`). Every other non-space character becomes its own token.
pub fn tokenize(text: &str, segment: Segment) -> Vec<Token> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut word = String::new();
    let flush = |word: &mut String, tokens: &mut Vec<Token>| {
        if !word.is_empty() {
            let index = tokens.len();
            tokens.push(Token::new(std::mem::take(word), index, segment));
        }
    };
    for (i, &c) in chars.iter().enumerate() {
        if c.is_whitespace() {
            flush(&mut word, &mut tokens);
        } else if c.is_alphanumeric()
            || (!word.is_empty()
                && joins_word(
                    c,
                    i.checked_sub(1).map(|j| chars[j]),
                    chars.get(i + 1).copied(),
                ))
        {
            word.push(c);
        } else {
            flush(&mut word, &mut tokens);
            let index = tokens.len();
            tokens.push(Token::new(c.to_string(), index, segment));
        }
    }
    flush(&mut word, &mut tokens);
    tokens
}

/// Canonical form used for every answer comparison: lowercased tokens joined by one space.
pub fn match_key(text: &str) -> String {
    let tokens = tokenize(text, Segment::Question);
    let mut out = String::with_capacity(text.len());
    for (i, t) in tokens.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push_str(&t.lower);
    }
    out
}

/// Four digits in [1000, 2099].
pub fn is_year(token: &str) -> bool {
    token.len() == 4
        && token.bytes().all(|b| b.is_ascii_digit())
        && token
            .parse::<u32>()
            .is_ok_and(|y| (1000..=2099).contains(&y))
}
