use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    Dot,
    Colon,
    Comma,
    Semi,
    Bar,
    BarBar,
    Amp,
    Tilde,
    Bang,
    Plus,
    Minus,
    Arrow,
    Leads,
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Unknown(char),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Dot => f.write_str("`.`"),
            Tok::Colon => f.write_str("`:`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Semi => f.write_str("`;`"),
            Tok::Bar => f.write_str("`|`"),
            Tok::BarBar => f.write_str("`||`"),
            Tok::Amp => f.write_str("`&`"),
            Tok::Tilde => f.write_str("`~`"),
            Tok::Bang => f.write_str("`!`"),
            Tok::Plus => f.write_str("`+`"),
            Tok::Minus => f.write_str("`-`"),
            Tok::Arrow => f.write_str("`<-`"),
            Tok::Leads => f.write_str("`~>`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::LBracket => f.write_str("`[`"),
            Tok::RBracket => f.write_str("`]`"),
            Tok::LBrace => f.write_str("`{`"),
            Tok::RBrace => f.write_str("`}`"),
            Tok::Unknown(c) => write!(f, "`{}`", c.escape_default()),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Pos {
    pub line: usize,
    pub col: usize,
}

#[derive(Debug, Clone)]
pub(crate) struct Spanned {
    pub tok: Tok,
    pub pos: Pos,
}

/// Never fails: unexpected characters become `Tok::Unknown` and are reported
/// by the parser with their position.
pub(crate) fn tokenize(src: &str) -> Vec<Spanned> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let mut line = 1;
    let mut col = 1;

    macro_rules! bump {
        () => {{
            if chars[i] == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            i += 1;
        }};
    }

    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            bump!();
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                bump!();
            }
            continue;
        }
        let pos = Pos { line, col };
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                bump!();
            }
            let mut word: String = chars[start..i].iter().collect();
            // `assert-not` is the only hyphenated keyword.
            if word == "assert" && chars[i..].starts_with(&['-', 'n', 'o', 't']) {
                let next = chars.get(i + 4).copied();
                if !next.is_some_and(|n| n.is_ascii_alphanumeric() || n == '_') {
                    for _ in 0..4 {
                        bump!();
                    }
                    word.push_str("-not");
                }
            }
            out.push(Spanned {
                tok: Tok::Ident(word),
                pos,
            });
            continue;
        }
        let next = chars.get(i + 1).copied();
        let (tok, width) = match (c, next) {
            ('|', Some('|')) => (Tok::BarBar, 2),
            ('<', Some('-')) => (Tok::Arrow, 2),
            ('~', Some('>')) => (Tok::Leads, 2),
            ('|', _) => (Tok::Bar, 1),
            ('.', _) => (Tok::Dot, 1),
            (':', _) => (Tok::Colon, 1),
            (',', _) => (Tok::Comma, 1),
            (';', _) => (Tok::Semi, 1),
            ('&', _) => (Tok::Amp, 1),
            ('~', _) => (Tok::Tilde, 1),
            ('!', _) => (Tok::Bang, 1),
            ('+', _) => (Tok::Plus, 1),
            ('-', _) => (Tok::Minus, 1),
            ('(', _) => (Tok::LParen, 1),
            (')', _) => (Tok::RParen, 1),
            ('[', _) => (Tok::LBracket, 1),
            (']', _) => (Tok::RBracket, 1),
            ('{', _) => (Tok::LBrace, 1),
            ('}', _) => (Tok::RBrace, 1),
            (other, _) => (Tok::Unknown(other), 1),
        };
        for _ in 0..width {
            bump!();
        }
        out.push(Spanned { tok, pos });
    }
    out.push(Spanned {
        tok: Tok::Eof,
        pos: Pos { line, col },
    });
    out
}
