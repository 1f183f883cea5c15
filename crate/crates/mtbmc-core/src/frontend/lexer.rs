//! Hand-rolled lexer for MTC source text.

use super::ast::Span;
use super::ParseError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tok {
    Ident,
    IntLit,
    KwInt,
    KwBool,
    KwMutex,
    KwCond,
    KwThread,
    KwMain,
    KwIf,
    KwElse,
    KwWhile,
    KwAssert,
    KwAssume,
    KwAtomic,
    KwTrue,
    KwFalse,
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Semi,
    Comma,
    Assign,
    Plus,
    Minus,
    Star,
    Slash,
    Percent,
    EqEq,
    NotEq,
    Lt,
    Le,
    Gt,
    Ge,
    AndAnd,
    OrOr,
    Not,
    Amp,
    Pipe,
    Caret,
    Tilde,
    Shl,
    Shr,
    Eof,
}

impl Tok {
    pub fn describe(self) -> &'static str {
        match self {
            Tok::Ident => "identifier",
            Tok::IntLit => "integer literal",
            Tok::KwInt => "`int`",
            Tok::KwBool => "`bool`",
            Tok::KwMutex => "`mutex`",
            Tok::KwCond => "`cond`",
            Tok::KwThread => "`thread`",
            Tok::KwMain => "`main`",
            Tok::KwIf => "`if`",
            Tok::KwElse => "`else`",
            Tok::KwWhile => "`while`",
            Tok::KwAssert => "`assert`",
            Tok::KwAssume => "`assume`",
            Tok::KwAtomic => "`atomic`",
            Tok::KwTrue => "`true`",
            Tok::KwFalse => "`false`",
            Tok::LParen => "`(`",
            Tok::RParen => "`)`",
            Tok::LBrace => "`{`",
            Tok::RBrace => "`}`",
            Tok::LBracket => "`[`",
            Tok::RBracket => "`]`",
            Tok::Semi => "`;`",
            Tok::Comma => "`,`",
            Tok::Assign => "`=`",
            Tok::Plus => "`+`",
            Tok::Minus => "`-`",
            Tok::Star => "`*`",
            Tok::Slash => "`/`",
            Tok::Percent => "`%`",
            Tok::EqEq => "`==`",
            Tok::NotEq => "`!=`",
            Tok::Lt => "`<`",
            Tok::Le => "`<=`",
            Tok::Gt => "`>`",
            Tok::Ge => "`>=`",
            Tok::AndAnd => "`&&`",
            Tok::OrOr => "`||`",
            Tok::Not => "`!`",
            Tok::Amp => "`&`",
            Tok::Pipe => "`|`",
            Tok::Caret => "`^`",
            Tok::Tilde => "`~`",
            Tok::Shl => "`<<`",
            Tok::Shr => "`>>`",
            Tok::Eof => "end of input",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub text: String,
    pub span: Span,
}

pub fn lex(src: &str) -> Result<Vec<Token>, ParseError> {
    let bytes = src.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0usize;
    let mut line = 1u32;
    let mut col = 1u32;

    macro_rules! push {
        ($tok:expr, $start:expr, $len:expr, $line:expr, $col:expr) => {
            toks.push(Token {
                tok: $tok,
                text: src[$start..$start + $len].to_string(),
                span: Span::new($start, $len, $line, $col),
            })
        };
    }

    while i < bytes.len() {
        let c = bytes[i];
        match c {
            b' ' | b'\t' | b'\r' => {
                i += 1;
                col += 1;
            }
            b'\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            b'/' if i + 1 < bytes.len() && bytes[i + 1] == b'/' => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            }
            b'/' if i + 1 < bytes.len() && bytes[i + 1] == b'*' => {
                let (sl, sc) = (line, col);
                i += 2;
                col += 2;
                loop {
                    if i + 1 >= bytes.len() {
                        return Err(ParseError::new(
                            Span::new(i, 0, sl, sc),
                            "unterminated block comment".into(),
                            vec![],
                        ));
                    }
                    if bytes[i] == b'*' && bytes[i + 1] == b'/' {
                        i += 2;
                        col += 2;
                        break;
                    }
                    if bytes[i] == b'\n' {
                        line += 1;
                        col = 1;
                    } else {
                        col += 1;
                    }
                    i += 1;
                }
            }
            b'0'..=b'9' => {
                let start = i;
                let (sl, sc) = (line, col);
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                    col += 1;
                }
                push!(Tok::IntLit, start, i - start, sl, sc);
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                let start = i;
                let (sl, sc) = (line, col);
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                    col += 1;
                }
                let text = &src[start..i];
                let tok = match text {
                    "int" => Tok::KwInt,
                    "bool" => Tok::KwBool,
                    "mutex" => Tok::KwMutex,
                    "cond" => Tok::KwCond,
                    "thread" => Tok::KwThread,
                    "main" => Tok::KwMain,
                    "if" => Tok::KwIf,
                    "else" => Tok::KwElse,
                    "while" => Tok::KwWhile,
                    "assert" => Tok::KwAssert,
                    "assume" => Tok::KwAssume,
                    "atomic" => Tok::KwAtomic,
                    "true" => Tok::KwTrue,
                    "false" => Tok::KwFalse,
                    _ => Tok::Ident,
                };
                push!(tok, start, i - start, sl, sc);
            }
            _ => {
                let start = i;
                let (sl, sc) = (line, col);
                let two = if i + 1 < bytes.len() { &src[i..i + 2] } else { "" };
                let (tok, len) = match two {
                    "==" => (Tok::EqEq, 2),
                    "!=" => (Tok::NotEq, 2),
                    "<=" => (Tok::Le, 2),
                    ">=" => (Tok::Ge, 2),
                    "&&" => (Tok::AndAnd, 2),
                    "||" => (Tok::OrOr, 2),
                    "<<" => (Tok::Shl, 2),
                    ">>" => (Tok::Shr, 2),
                    _ => match c {
                        b'(' => (Tok::LParen, 1),
                        b')' => (Tok::RParen, 1),
                        b'{' => (Tok::LBrace, 1),
                        b'}' => (Tok::RBrace, 1),
                        b'[' => (Tok::LBracket, 1),
                        b']' => (Tok::RBracket, 1),
                        b';' => (Tok::Semi, 1),
                        b',' => (Tok::Comma, 1),
                        b'=' => (Tok::Assign, 1),
                        b'+' => (Tok::Plus, 1),
                        b'-' => (Tok::Minus, 1),
                        b'*' => (Tok::Star, 1),
                        b'/' => (Tok::Slash, 1),
                        b'%' => (Tok::Percent, 1),
                        b'<' => (Tok::Lt, 1),
                        b'>' => (Tok::Gt, 1),
                        b'!' => (Tok::Not, 1),
                        b'&' => (Tok::Amp, 1),
                        b'|' => (Tok::Pipe, 1),
                        b'^' => (Tok::Caret, 1),
                        b'~' => (Tok::Tilde, 1),
                        _ => {
                            return Err(ParseError::new(
                                Span::new(i, 1, line, col),
                                format!("unexpected character `{}`", c as char),
                                vec![],
                            ))
                        }
                    },
                };
                i += len;
                col += len as u32;
                push!(tok, start, len, sl, sc);
            }
        }
    }
    toks.push(Token {
        tok: Tok::Eof,
        text: String::new(),
        span: Span::new(src.len(), 0, line, col),
    });
    Ok(toks)
}
