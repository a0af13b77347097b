use super::ast::Span;
use super::Diagnostic;

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Ident(String),
    Str(String),
    Int(i64),
    Float(f64),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Assign,
    Minus,
    /// Any other operator or punctuation; rejected by the parser with a
    /// construct-specific message.
    Op(String),
    Newline,
    /// Leading whitespace on a statement line.
    Indent,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => s.clone(),
            Tok::Str(s) => format!("{s:?}"),
            Tok::Int(i) => i.to_string(),
            Tok::Float(x) => x.to_string(),
            Tok::LParen => "(".into(),
            Tok::RParen => ")".into(),
            Tok::LBracket => "[".into(),
            Tok::RBracket => "]".into(),
            Tok::Comma => ",".into(),
            Tok::Assign => "=".into(),
            Tok::Minus => "-".into(),
            Tok::Op(s) => s.clone(),
            Tok::Newline => "end of line".into(),
            Tok::Indent => "indentation".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

struct Lexer {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    col: usize,
    depth: usize,
    out: Vec<Token>,
}

impl Lexer {
    fn peek(&self, k: usize) -> Option<char> {
        self.chars.get(self.pos + k).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.get(self.pos).copied()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn span(&self) -> Span {
        Span { line: self.line, column: self.col }
    }

    fn push(&mut self, tok: Tok, span: Span) {
        self.out.push(Token { tok, span });
    }

    fn at_line_start(&self) -> bool {
        matches!(self.out.last(), None | Some(Token { tok: Tok::Newline, .. }))
    }

    fn string(&mut self, quote: char, span: Span) -> Result<(), Diagnostic> {
        self.bump();
        let mut s = String::new();
        loop {
            match self.bump() {
                None | Some('\n') => {
                    return Err(Diagnostic::error("syntax", "unterminated string literal", span));
                }
                Some(c) if c == quote => break,
                Some('\\') => match self.bump() {
                    Some('n') => s.push('\n'),
                    Some('t') => s.push('\t'),
                    Some('r') => s.push('\r'),
                    Some('\\') => s.push('\\'),
                    Some('\'') => s.push('\''),
                    Some('"') => s.push('"'),
                    Some('\n') => {}
                    Some(c) => {
                        s.push('\\');
                        s.push(c);
                    }
                    None => return Err(Diagnostic::error("syntax", "unterminated string literal", span)),
                },
                Some(c) => s.push(c),
            }
        }
        self.push(Tok::Str(s), span);
        Ok(())
    }

    fn number(&mut self, span: Span) -> Result<(), Diagnostic> {
        let mut text = String::new();
        let mut is_float = false;
        while let Some(c) = self.peek(0) {
            if c.is_ascii_digit() || c == '_' {
                text.push(c);
            } else if c == '.' && !is_float {
                is_float = true;
                text.push(c);
            } else if (c == 'e' || c == 'E')
                && (self.peek(1).is_some_and(|d| d.is_ascii_digit())
                    || (matches!(self.peek(1), Some('+' | '-')) && self.peek(2).is_some_and(|d| d.is_ascii_digit())))
            {
                is_float = true;
                text.push(c);
                self.bump();
                text.push(self.bump().expect("peeked"));
                continue;
            } else {
                break;
            }
            self.bump();
        }
        let clean = text.replace('_', "");
        let tok = if is_float {
            clean.parse::<f64>().map(Tok::Float).ok()
        } else {
            clean.parse::<i64>().map(Tok::Int).ok()
        };
        match tok {
            Some(t) => {
                self.push(t, span);
                Ok(())
            }
            None => Err(Diagnostic::error("syntax", format!("invalid number literal {text:?}"), span).with_token(&text)),
        }
    }

    fn run(mut self) -> Result<Vec<Token>, Diagnostic> {
        while let Some(c) = self.peek(0) {
            let span = self.span();
            match c {
                '#' => {
                    while self.peek(0).is_some_and(|c| c != '\n') {
                        self.bump();
                    }
                }
                '\n' => {
                    self.bump();
                    if self.depth == 0 && !self.at_line_start() {
                        self.push(Tok::Newline, span);
                    }
                }
                '\\' if self.peek(1) == Some('\n') => {
                    self.bump();
                    self.bump();
                }
                ' ' | '\t' | '\r' => {
                    let start_of_line = self.col == 1;
                    while matches!(self.peek(0), Some(' ' | '\t' | '\r')) {
                        self.bump();
                    }
                    let blank = matches!(self.peek(0), None | Some('\n' | '#'));
                    if start_of_line && self.depth == 0 && self.at_line_start() && !blank {
                        self.push(Tok::Indent, span);
                    }
                }
                '"' | '\'' => self.string(c, span)?,
                c if c.is_ascii_digit() => self.number(span)?,
                '.' if self.peek(1).is_some_and(|d| d.is_ascii_digit()) => self.number(span)?,
                c if c.is_alphabetic() || c == '_' => {
                    let mut s = String::new();
                    while self.peek(0).is_some_and(|c| c.is_alphanumeric() || c == '_') {
                        s.push(self.bump().expect("peeked"));
                    }
                    // String prefixes such as f"..." or r'...'.
                    if matches!(self.peek(0), Some('"' | '\'')) && s.len() <= 2 {
                        return Err(Diagnostic::error("syntax", format!("string prefix {s:?} is not supported"), span)
                            .with_token(&s));
                    }
                    self.push(Tok::Ident(s), span);
                }
                '(' | '[' => {
                    self.bump();
                    self.depth += 1;
                    self.push(if c == '(' { Tok::LParen } else { Tok::LBracket }, span);
                }
                ')' | ']' => {
                    self.bump();
                    self.depth = self.depth.saturating_sub(1);
                    self.push(if c == ')' { Tok::RParen } else { Tok::RBracket }, span);
                }
                ',' => {
                    self.bump();
                    self.push(Tok::Comma, span);
                }
                '=' if self.peek(1) != Some('=') => {
                    self.bump();
                    self.push(Tok::Assign, span);
                }
                '-' if self.peek(1) != Some('=') => {
                    self.bump();
                    self.push(Tok::Minus, span);
                }
                _ => {
                    let mut op = String::new();
                    op.push(self.bump().expect("peeked"));
                    if let Some(n) = self.peek(0) {
                        if "=*/<>".contains(n) && "=*/<>!+-%&|^".contains(c) {
                            op.push(n);
                            self.bump();
                        }
                    }
                    self.push(Tok::Op(op), span);
                }
            }
        }
        let span = self.span();
        if !self.at_line_start() {
            self.push(Tok::Newline, span);
        }
        self.push(Tok::Eof, span);
        Ok(self.out)
    }
}

pub fn tokenize(src: &str) -> Result<Vec<Token>, Diagnostic> {
    Lexer { chars: src.chars().collect(), pos: 0, line: 1, col: 1, depth: 0, out: Vec::new() }.run()
}
