//! Full-fidelity lexer for the supported C++ subset.
//!
//! Concatenating the `text` of every token reproduces the input byte for
//! byte. Whitespace, comments and preprocessor lines are tokens in their
//! own right so that edits can be expressed as exact byte spans.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Identifier,
    Keyword,
    Punct,
    Literal,
    Comment,
    Whitespace,
    /// A whole preprocessor line (continuations included, newline excluded).
    Preproc,
}

#[derive(Debug, Clone)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    /// Byte offset of the first byte of the token.
    pub offset: usize,
    /// 1-based line of the first byte.
    pub line: u32,
    /// 1-based column of the first byte.
    pub column: u32,
}

impl Token {
    pub fn end(&self) -> usize {
        self.offset + self.text.len()
    }

    pub fn is_significant(&self) -> bool {
        !matches!(
            self.kind,
            TokenKind::Whitespace | TokenKind::Comment | TokenKind::Preproc
        )
    }

    pub fn is(&self, text: &str) -> bool {
        self.text == text
    }
}

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
pub enum LexError {
    #[error("unterminated string literal at line {line}, column {column}")]
    UnterminatedString { line: u32, column: u32 },
    #[error("unterminated block comment at line {line}, column {column}")]
    UnterminatedComment { line: u32, column: u32 },
}

/// Keywords of the accepted subset. `final` and `override` are contextual
/// and therefore lexed as identifiers.
const KEYWORDS: &[&str] = &[
    "auto", "bool", "break", "case", "catch", "char", "class", "const",
    "continue", "decltype", "default", "delete", "do", "double", "else",
    "enum", "explicit", "extern", "false", "float", "for", "friend", "if",
    "inline", "int", "long", "mutable", "namespace", "new", "operator",
    "private", "protected", "public", "return", "short", "signed", "sizeof",
    "static", "struct", "switch", "template", "this", "throw", "true", "try",
    "typedef", "typename", "union", "unsigned", "using", "virtual", "void",
    "while",
];

/// Multi-character punctuators, longest first for maximal munch.
/// `[[` / `]]` are handled separately because they are contextual.
const PUNCTS: &[&str] = &[
    "<<=", ">>=", "->*", "...", "::", "->", "<<", ">>", "<=", ">=", "==",
    "!=", "&&", "||", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "++",
    "--", "##",
];

pub struct LexOutput {
    pub tokens: Vec<Token>,
    pub errors: Vec<LexError>,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    line: u32,
    column: u32,
    tokens: Vec<Token>,
    errors: Vec<LexError>,
    /// Depth of currently open `[[ ... ]]` attribute brackets.
    attr_depth: u32,
}

pub fn tokenize(src: &[u8]) -> LexOutput {
    let mut lx = Lexer {
        src,
        pos: 0,
        line: 1,
        column: 1,
        tokens: Vec::new(),
        errors: Vec::new(),
        attr_depth: 0,
    };
    lx.run();
    LexOutput {
        tokens: lx.tokens,
        errors: lx.errors,
    }
}

impl<'a> Lexer<'a> {
    fn peek(&self, ahead: usize) -> Option<u8> {
        self.src.get(self.pos + ahead).copied()
    }

    fn at_line_start(&self) -> bool {
        // Only whitespace between the last newline and the current position.
        let mut i = self.pos;
        while i > 0 {
            let b = self.src[i - 1];
            if b == b'\n' {
                return true;
            }
            if b != b' ' && b != b'\t' && b != b'\r' {
                return false;
            }
            i -= 1;
        }
        true
    }

    fn last_significant(&self) -> Option<&Token> {
        self.tokens.iter().rev().find(|t| t.is_significant())
    }

    fn push(&mut self, kind: TokenKind, start: usize, start_line: u32, start_col: u32) {
        let text = String::from_utf8_lossy(&self.src[start..self.pos]).into_owned();
        debug_assert_eq!(text.len(), self.pos - start, "non-ASCII input must round-trip");
        self.tokens.push(Token {
            kind,
            text,
            offset: start,
            line: start_line,
            column: start_col,
        });
    }

    fn bump(&mut self) {
        if self.src[self.pos] == b'\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        self.pos += 1;
    }

    fn run(&mut self) {
        while self.pos < self.src.len() {
            let (start, line, col) = (self.pos, self.line, self.column);
            let b = self.src[self.pos];
            match b {
                b' ' | b'\t' | b'\r' | b'\n' => {
                    while matches!(self.peek(0), Some(b' ' | b'\t' | b'\r' | b'\n')) {
                        self.bump();
                    }
                    self.push(TokenKind::Whitespace, start, line, col);
                }
                b'/' if self.peek(1) == Some(b'/') => {
                    while self.peek(0).is_some_and(|c| c != b'\n') {
                        self.bump();
                    }
                    self.push(TokenKind::Comment, start, line, col);
                }
                b'/' if self.peek(1) == Some(b'*') => {
                    self.bump();
                    self.bump();
                    let mut closed = false;
                    while self.peek(0).is_some() {
                        if self.peek(0) == Some(b'*') && self.peek(1) == Some(b'/') {
                            self.bump();
                            self.bump();
                            closed = true;
                            break;
                        }
                        self.bump();
                    }
                    if !closed {
                        self.errors.push(LexError::UnterminatedComment { line, column: col });
                    }
                    self.push(TokenKind::Comment, start, line, col);
                }
                b'#' if self.at_line_start() => {
                    // Consume the directive up to an unescaped newline.
                    loop {
                        match self.peek(0) {
                            None => break,
                            Some(b'\n') => break,
                            Some(b'\\') if self.peek(1) == Some(b'\n') => {
                                self.bump();
                                self.bump();
                            }
                            Some(b'\\') if self.peek(1) == Some(b'\r') && self.peek(2) == Some(b'\n') => {
                                self.bump();
                                self.bump();
                                self.bump();
                            }
                            Some(_) => self.bump(),
                        }
                    }
                    self.push(TokenKind::Preproc, start, line, col);
                }
                b'"' | b'\'' => {
                    let quote = b;
                    self.bump();
                    let mut closed = false;
                    while let Some(c) = self.peek(0) {
                        if c == b'\\' && self.peek(1).is_some() {
                            self.bump();
                            self.bump();
                        } else if c == quote {
                            self.bump();
                            closed = true;
                            break;
                        } else if c == b'\n' {
                            break;
                        } else {
                            self.bump();
                        }
                    }
                    if !closed {
                        self.errors.push(LexError::UnterminatedString { line, column: col });
                        // Remainder of the file is kept as one opaque literal.
                        while self.peek(0).is_some() {
                            self.bump();
                        }
                    }
                    self.push(TokenKind::Literal, start, line, col);
                }
                b'0'..=b'9' => {
                    self.lex_number();
                    self.push(TokenKind::Literal, start, line, col);
                }
                b'.' if matches!(self.peek(1), Some(b'0'..=b'9')) => {
                    self.lex_number();
                    self.push(TokenKind::Literal, start, line, col);
                }
                b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                    while matches!(self.peek(0), Some(b'a'..=b'z' | b'A'..=b'Z' | b'0'..=b'9' | b'_')) {
                        self.bump();
                    }
                    let word = &self.src[start..self.pos];
                    let kind = if KEYWORDS.iter().any(|k| k.as_bytes() == word) {
                        TokenKind::Keyword
                    } else {
                        TokenKind::Identifier
                    };
                    self.push(kind, start, line, col);
                }
                b'[' if self.peek(1) == Some(b'[') && self.attr_may_start() => {
                    self.bump();
                    self.bump();
                    self.attr_depth += 1;
                    self.push(TokenKind::Punct, start, line, col);
                }
                b']' if self.peek(1) == Some(b']') && self.attr_depth > 0 => {
                    self.bump();
                    self.bump();
                    self.attr_depth -= 1;
                    self.push(TokenKind::Punct, start, line, col);
                }
                _ => {
                    let rest = &self.src[self.pos..];
                    let multi = PUNCTS.iter().find(|p| rest.starts_with(p.as_bytes()));
                    if let Some(p) = multi {
                        for _ in 0..p.len() {
                            self.bump();
                        }
                    } else {
                        self.bump();
                    }
                    self.push(TokenKind::Punct, start, line, col);
                }
            }
        }
    }

    /// `[[` opens an attribute unless the preceding significant token ends a
    /// primary expression (then it is a subscript of a subscript).
    fn attr_may_start(&self) -> bool {
        match self.last_significant() {
            None => true,
            Some(t) => !(t.kind == TokenKind::Identifier
                || t.kind == TokenKind::Literal
                || t.is(")")
                || t.is("]")
                || t.is("this")),
        }
    }

    fn lex_number(&mut self) {
        // pp-number style: digits, dots, identifier chars, exponent signs.
        while let Some(c) = self.peek(0) {
            match c {
                b'0'..=b'9' | b'.' | b'a'..=b'd' | b'f'..=b'z' | b'A'..=b'D' | b'F'..=b'Z' | b'_' => {
                    self.bump()
                }
                b'e' | b'E' => {
                    self.bump();
                    if matches!(self.peek(0), Some(b'+' | b'-')) {
                        self.bump();
                    }
                }
                _ => break,
            }
        }
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

/// Reassemble the original text from a token list.
pub fn join_tokens(tokens: &[Token]) -> String {
    tokens.iter().map(|t| t.text.as_str()).collect()
}
