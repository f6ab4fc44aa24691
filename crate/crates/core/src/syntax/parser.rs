//! Recursive-descent parser for the supported C++ subset.
//!
//! The tree is deliberately shallow: every node records token index ranges
//! into the lexed token vector, and expression-level analysis happens on
//! token slices on demand. Anything outside the subset becomes an `Opaque`
//! node covering its exact balanced region, so parsing never fails on
//! brace-balanced input.

use super::lexer::{Token, TokenKind};

#[derive(Debug, Clone, thiserror::Error)]
pub enum ParseError {
    #[error("unbalanced braces near line {line}")]
    UnbalancedBraces { line: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassKey {
    Class,
    Struct,
    Union,
}

#[derive(Debug, Clone)]
pub enum IncludeKind {
    Quoted(String),
    Angle(String),
}

#[derive(Debug, Clone)]
pub enum Item {
    Directive { tok: usize, include: Option<IncludeKind> },
    Namespace { name: Option<String>, items: Vec<Item>, lbrace: usize, rbrace: usize },
    Class(ClassDecl),
    Function(FunctionDecl),
    Var(VarDecl),
    Typedef { toks: (usize, usize) },
    UsingAlias(AliasDecl),
    UsingImport { toks: (usize, usize) },
    /// A bare statement at file scope (common in illustrative snippets).
    TopStmt(Stmt),
    Opaque { toks: (usize, usize) },
}

#[derive(Debug, Clone)]
pub struct AliasDecl {
    pub name: String,
    pub name_tok: usize,
    /// `template<...>` header when this is an alias template.
    pub template_toks: Option<(usize, usize)>,
    pub eq_tok: usize,
    pub target_toks: (usize, usize),
    pub semi_tok: usize,
    pub first_tok: usize,
}

#[derive(Debug, Clone)]
pub struct ClassDecl {
    pub keyword: ClassKey,
    pub name: String,
    pub name_tok: usize,
    pub is_template: bool,
    pub first_tok: usize,
    pub final_tok: Option<usize>,
    pub lbrace: usize,
    pub rbrace: usize,
    pub semi_tok: Option<usize>,
    pub members: Vec<Member>,
}

#[derive(Debug, Clone)]
pub enum Member {
    Access { tok: usize },
    Field(FieldDecl),
    Ctor(CtorDecl),
    Method(MethodDecl),
    Opaque { toks: (usize, usize) },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitKind {
    Equals,
    Brace,
    Paren,
}

#[derive(Debug, Clone)]
pub struct MemberInitializer {
    pub kind: InitKind,
    /// From the `=` / `{` through the last token before `,` or `;`.
    pub toks: (usize, usize),
    /// The initializer expression itself.
    pub expr_toks: (usize, usize),
}

#[derive(Debug, Clone)]
pub struct FieldDeclarator {
    pub name: String,
    pub name_tok: usize,
    pub stars: u32,
    pub is_ref: bool,
    pub array_toks: Option<(usize, usize)>,
    pub init: Option<MemberInitializer>,
}

#[derive(Debug, Clone)]
pub struct FieldDecl {
    pub first_tok: usize,
    pub type_toks: (usize, usize),
    pub declarators: Vec<FieldDeclarator>,
    pub semi_tok: usize,
}

#[derive(Debug, Clone)]
pub struct CtorInitEntry {
    pub name: String,
    pub name_tok: usize,
    pub args_toks: (usize, usize),
    pub end_tok: usize,
}

#[derive(Debug, Clone)]
pub struct CtorDecl {
    pub first_tok: usize,
    pub name_tok: usize,
    pub params_toks: (usize, usize),
    pub params: Vec<Param>,
    pub init_colon: Option<usize>,
    pub inits: Vec<CtorInitEntry>,
    pub body_toks: Option<(usize, usize)>,
    pub body: Option<Box<Stmt>>,
    pub end_tok: usize,
}

#[derive(Debug, Clone)]
pub struct MethodDecl {
    pub first_tok: usize,
    pub name: String,
    pub is_virtual: bool,
    pub is_template: bool,
    pub ret_toks: (usize, usize),
    pub params_toks: (usize, usize),
    pub params: Vec<Param>,
    /// Contextual `override` / `final` tokens after the declarator.
    pub modifier_toks: Vec<usize>,
    pub body_toks: Option<(usize, usize)>,
    pub body: Option<Box<Stmt>>,
    pub end_tok: usize,
}

#[derive(Debug, Clone)]
pub struct Param {
    pub type_toks: (usize, usize),
    pub stars: u32,
    pub is_ref: bool,
    pub name: Option<String>,
    pub name_tok: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct TrailingReturn {
    pub arrow_tok: usize,
    pub end_tok: usize,
    pub kind: TrailingKind,
}

#[derive(Debug, Clone)]
pub enum TrailingKind {
    /// `-> decltype(param)`
    DecltypeParam { name: String },
    /// `-> T`
    Named { toks: (usize, usize) },
}

#[derive(Debug, Clone)]
pub struct FunctionDecl {
    pub first_tok: usize,
    pub name: String,
    pub name_tok: usize,
    pub is_template: bool,
    pub ret_toks: (usize, usize),
    pub auto_ret: bool,
    pub trailing: Option<TrailingReturn>,
    pub params_toks: (usize, usize),
    pub params: Vec<Param>,
    pub body_toks: Option<(usize, usize)>,
    pub body: Option<Box<Stmt>>,
    pub end_tok: usize,
}

#[derive(Debug, Clone)]
pub struct VarDeclarator {
    pub stars: u32,
    pub is_ref: bool,
    pub name: String,
    pub name_tok: usize,
    pub array_toks: Option<(usize, usize)>,
    pub init: Option<VarInit>,
}

#[derive(Debug, Clone)]
pub struct VarInit {
    pub kind: InitKind,
    pub expr_toks: (usize, usize),
}

#[derive(Debug, Clone)]
pub struct VarDecl {
    pub first_tok: usize,
    pub semi_tok: usize,
    pub is_auto: bool,
    pub base_const: bool,
    pub base_toks: (usize, usize),
    pub declarators: Vec<VarDeclarator>,
}

#[derive(Debug, Clone)]
pub struct RangeFor {
    pub for_tok: usize,
    pub lparen: usize,
    pub decl_toks: (usize, usize),
    pub colon_tok: usize,
    pub range_toks: (usize, usize),
    pub rparen: usize,
    pub body: Box<Stmt>,
}

#[derive(Debug, Clone)]
pub enum Stmt {
    Compound { lbrace: usize, rbrace: usize, stmts: Vec<Stmt> },
    Expr { toks: (usize, usize) },
    Return { toks: (usize, usize), expr: Option<(usize, usize)> },
    Decl(VarDecl),
    LocalClass(ClassDecl),
    RangeFor(RangeFor),
    For { for_tok: usize, header: (usize, usize), body: Box<Stmt> },
    /// if / while / switch / do with recursively parsed bodies.
    Control {
        kw_tok: usize,
        header: Option<(usize, usize)>,
        body: Box<Stmt>,
        else_body: Option<Box<Stmt>>,
        end_tok: usize,
    },
    Directive { tok: usize },
    Opaque { toks: (usize, usize) },
}

impl Stmt {
    pub fn tok_range(&self) -> (usize, usize) {
        match self {
            Stmt::Compound { lbrace, rbrace, .. } => (*lbrace, *rbrace),
            Stmt::Expr { toks } | Stmt::Opaque { toks } => *toks,
            Stmt::Return { toks, .. } => *toks,
            Stmt::Decl(d) => (d.first_tok, d.semi_tok),
            Stmt::LocalClass(c) => (c.first_tok, c.semi_tok.unwrap_or(c.rbrace)),
            Stmt::RangeFor(r) => {
                let (_, end) = r.body.tok_range();
                (r.for_tok, end)
            }
            Stmt::For { for_tok, body, .. } => (*for_tok, body.tok_range().1),
            Stmt::Control { kw_tok, end_tok, .. } => (*kw_tok, *end_tok),
            Stmt::Directive { tok } => (*tok, *tok),
        }
    }
}

#[derive(Debug)]
pub struct SyntaxTree {
    pub tokens: Vec<Token>,
    pub items: Vec<Item>,
}

impl SyntaxTree {
    pub fn byte_span(&self, toks: (usize, usize)) -> (usize, usize) {
        (self.tokens[toks.0].offset, self.tokens[toks.1].end())
    }

    /// Source text covered by an inclusive token range.
    pub fn text(&self, toks: (usize, usize)) -> String {
        self.tokens[toks.0..=toks.1]
            .iter()
            .map(|t| t.text.as_str())
            .collect()
    }

    /// Significant-token text joined with single spaces.
    pub fn sig_text(&self, toks: (usize, usize)) -> String {
        self.tokens[toks.0..=toks.1]
            .iter()
            .filter(|t| t.is_significant())
            .map(|t| t.text.as_str())
            .collect::<Vec<_>>()
            .join(" ")
    }
}

pub fn parse(tokens: Vec<Token>) -> Result<SyntaxTree, ParseError> {
    check_balance(&tokens)?;
    let mut p = Parser { toks: &tokens, pos: 0 };
    let items = p.parse_items(None);
    Ok(SyntaxTree { tokens, items })
}

fn check_balance(tokens: &[Token]) -> Result<(), ParseError> {
    let mut stack: Vec<(&str, u32)> = Vec::new();
    for t in tokens {
        if t.kind != TokenKind::Punct {
            continue;
        }
        match t.text.as_str() {
            "{" | "(" => stack.push((t.text.as_str(), t.line)),
            "}" => {
                if stack.pop().map(|s| s.0) != Some("{") {
                    return Err(ParseError::UnbalancedBraces { line: t.line });
                }
            }
            ")" => {
                if stack.pop().map(|s| s.0) != Some("(") {
                    return Err(ParseError::UnbalancedBraces { line: t.line });
                }
            }
            _ => {}
        }
    }
    if let Some((_, line)) = stack.pop() {
        return Err(ParseError::UnbalancedBraces { line });
    }
    Ok(())
}

const TYPE_KEYWORDS: &[&str] = &[
    "void", "bool", "char", "int", "unsigned", "signed", "long", "short",
    "float", "double", "auto",
];

const SPEC_KEYWORDS: &[&str] = &[
    "const", "static", "inline", "extern", "mutable", "typename", "explicit",
    "virtual", "friend",
];

struct Parser<'a> {
    toks: &'a [Token],
    pos: usize,
}

impl<'a> Parser<'a> {
    // ---- cursor helpers -------------------------------------------------

    fn sig_from(&self, mut i: usize) -> Option<usize> {
        while i < self.toks.len() {
            if self.toks[i].is_significant() {
                return Some(i);
            }
            i += 1;
        }
        None
    }

    fn peek(&self) -> Option<usize> {
        self.sig_from(self.pos)
    }

    /// Like `peek`, but also stops at preprocessor lines; used at the heads
    /// of the item / member / statement loops so directives become nodes
    /// instead of being skipped as trivia.
    fn peek_with_preproc(&self) -> Option<usize> {
        let mut i = self.pos;
        while i < self.toks.len() {
            let t = &self.toks[i];
            if t.is_significant() || t.kind == TokenKind::Preproc {
                return Some(i);
            }
            i += 1;
        }
        None
    }

    fn tok(&self, i: usize) -> &'a Token {
        &self.toks[i]
    }

    fn next_sig(&self, i: usize) -> Option<usize> {
        self.sig_from(i + 1)
    }

    fn prev_sig(&self, i: usize) -> Option<usize> {
        (0..i).rev().find(|&j| self.toks[j].is_significant())
    }

    /// Index of the matching close token for the open token at `i`
    /// (one of `(`, `{`, `[`). Balances all three bracket kinds.
    fn matching(&self, i: usize) -> Option<usize> {
        let mut depth = 0i32;
        let open = self.toks[i].text.as_str();
        let close = match open {
            "(" => ")",
            "{" => "}",
            "[" => "]",
            _ => return None,
        };
        for j in i..self.toks.len() {
            let t = &self.toks[j];
            if t.kind != TokenKind::Punct {
                continue;
            }
            if t.text == open {
                depth += 1;
            } else if t.text == close {
                depth -= 1;
                if depth == 0 {
                    return Some(j);
                }
            }
        }
        None
    }

    /// Matching `>` for a `<` at `i`; a `>>` token closes two levels.
    fn matching_angle(&self, i: usize) -> Option<usize> {
        let mut depth = 0i32;
        let mut j = i;
        while j < self.toks.len() {
            let t = &self.toks[j];
            if t.kind == TokenKind::Punct {
                match t.text.as_str() {
                    "<" => depth += 1,
                    ">" => {
                        depth -= 1;
                        if depth == 0 {
                            return Some(j);
                        }
                    }
                    ">>" => {
                        depth -= 2;
                        if depth <= 0 {
                            return Some(j);
                        }
                    }
                    ";" | "{" | "}" => return None,
                    _ => {}
                }
            }
            j += 1;
        }
        None
    }

    /// Consume tokens until a `;` at bracket depth zero (inclusive), or a
    /// balanced `{...}` block (with optional trailing `;`). Returns the
    /// inclusive token range.
    fn consume_opaque(&mut self, start: usize) -> (usize, usize) {
        let mut i = start;
        let mut depth = 0i32;
        let mut last = start;
        while i < self.toks.len() {
            let t = &self.toks[i];
            if t.kind == TokenKind::Punct {
                match t.text.as_str() {
                    "(" | "[" => depth += 1,
                    ")" | "]" => depth -= 1,
                    "{" => {
                        if depth == 0 {
                            let close = self.matching(i).unwrap_or(self.toks.len() - 1);
                            // Optional trailing `;` (class/struct definitions).
                            if let Some(n) = self.sig_from(close + 1) {
                                if self.tok(n).is(";") {
                                    self.pos = n + 1;
                                    return (start, n);
                                }
                            }
                            self.pos = close + 1;
                            return (start, close);
                        }
                        depth += 1;
                    }
                    "}" => {
                        if depth == 0 {
                            // Do not run past the enclosing block.
                            self.pos = i;
                            return (start, last);
                        }
                        depth -= 1;
                    }
                    ";" if depth == 0 => {
                        self.pos = i + 1;
                        return (start, i);
                    }
                    _ => {}
                }
            }
            if t.is_significant() {
                last = i;
            }
            i += 1;
        }
        self.pos = self.toks.len();
        (start, last)
    }

    // ---- top level ------------------------------------------------------

    /// Parse items until `end_rbrace` (exclusive) or EOF.
    fn parse_items(&mut self, end_rbrace: Option<usize>) -> Vec<Item> {
        let mut items = Vec::new();
        loop {
            let i = match self.peek_with_preproc() {
                Some(i) => i,
                None => break,
            };
            if let Some(end) = end_rbrace {
                if i >= end {
                    break;
                }
            }
            let t = self.tok(i);
            match (t.kind, t.text.as_str()) {
                (TokenKind::Preproc, _) => {
                    self.pos = i + 1;
                    items.push(Item::Directive { tok: i, include: parse_include(&t.text) });
                }
                (TokenKind::Keyword, "namespace") => items.push(self.parse_namespace(i)),
                (TokenKind::Keyword, "template") => items.push(self.parse_template(i)),
                (TokenKind::Keyword, "using") => items.push(self.parse_using(i, None)),
                (TokenKind::Keyword, "typedef") => {
                    let range = self.consume_opaque(i);
                    items.push(Item::Typedef { toks: range });
                }
                (TokenKind::Keyword, "class" | "struct" | "union") => {
                    match self.parse_class(i, i, false) {
                        Some(c) => items.push(Item::Class(c)),
                        None => items.push(Item::Opaque { toks: self.consume_opaque(i) }),
                    }
                }
                (TokenKind::Keyword, "for" | "if" | "while" | "switch" | "do") => {
                    let s = self.parse_stmt(i);
                    items.push(Item::TopStmt(s));
                }
                _ => match self.parse_declaration(i, false) {
                    Some(DeclOrFn::Fn(f)) => items.push(Item::Function(f)),
                    Some(DeclOrFn::Var(v)) => items.push(Item::Var(v)),
                    None => items.push(Item::Opaque { toks: self.consume_opaque(i) }),
                },
            }
        }
        items
    }

    fn parse_namespace(&mut self, kw: usize) -> Item {
        let mut i = kw;
        let mut name = None;
        if let Some(n) = self.next_sig(i) {
            if self.tok(n).kind == TokenKind::Identifier {
                name = Some(self.tok(n).text.clone());
                i = n;
            }
        }
        let lbrace = match self.next_sig(i) {
            Some(n) if self.tok(n).is("{") => n,
            _ => {
                return Item::Opaque { toks: self.consume_opaque(kw) };
            }
        };
        let rbrace = self.matching(lbrace).unwrap_or(self.toks.len() - 1);
        self.pos = lbrace + 1;
        let items = self.parse_items(Some(rbrace));
        self.pos = rbrace + 1;
        Item::Namespace { name, items, lbrace, rbrace }
    }

    fn parse_template(&mut self, kw: usize) -> Item {
        let lt = match self.next_sig(kw) {
            Some(n) if self.tok(n).is("<") => n,
            _ => return Item::Opaque { toks: self.consume_opaque(kw) },
        };
        let gt = match self.matching_angle(lt) {
            Some(g) => g,
            None => return Item::Opaque { toks: self.consume_opaque(kw) },
        };
        let next = match self.sig_from(gt + 1) {
            Some(n) => n,
            None => return Item::Opaque { toks: self.consume_opaque(kw) },
        };
        let t = self.tok(next);
        match (t.kind, t.text.as_str()) {
            (TokenKind::Keyword, "class" | "struct" | "union") => {
                // Distinguish a class template from `template<class T> using`.
                match self.parse_class(kw, next, true) {
                    Some(c) => Item::Class(c),
                    None => Item::Opaque { toks: self.consume_opaque(kw) },
                }
            }
            (TokenKind::Keyword, "using") => self.parse_using(next, Some((kw, gt))),
            _ => match self.parse_declaration_from(kw, next, true) {
                Some(DeclOrFn::Fn(f)) => Item::Function(f),
                _ => Item::Opaque { toks: self.consume_opaque(kw) },
            },
        }
    }

    fn parse_using(&mut self, kw: usize, template_toks: Option<(usize, usize)>) -> Item {
        let first = template_toks.map(|t| t.0).unwrap_or(kw);
        // `using N = target ;` is an alias; anything else is a symbol import.
        if let Some(name_tok) = self.next_sig(kw) {
            if self.tok(name_tok).kind == TokenKind::Identifier {
                if let Some(eq) = self.next_sig(name_tok) {
                    if self.tok(eq).is("=") {
                        let (range_start, _) = match self.sig_from(eq + 1) {
                            Some(s) => (s, s),
                            None => {
                                return Item::Opaque { toks: self.consume_opaque(first) };
                            }
                        };
                        let (_, end) = self.consume_opaque(range_start);
                        // `consume_opaque` stops at the `;`.
                        let semi = end;
                        let target_end = self.prev_sig(semi).unwrap_or(range_start);
                        return Item::UsingAlias(AliasDecl {
                            name: self.tok(name_tok).text.clone(),
                            name_tok,
                            template_toks,
                            eq_tok: eq,
                            target_toks: (range_start, target_end),
                            semi_tok: semi,
                            first_tok: first,
                        });
                    }
                }
            }
        }
        let toks = self.consume_opaque(first);
        Item::UsingImport { toks }
    }

    // ---- classes --------------------------------------------------------

    fn parse_class(&mut self, first: usize, kw: usize, is_template: bool) -> Option<ClassDecl> {
        let keyword = match self.tok(kw).text.as_str() {
            "class" => ClassKey::Class,
            "struct" => ClassKey::Struct,
            _ => ClassKey::Union,
        };
        let name_tok = self.next_sig(kw)?;
        if self.tok(name_tok).kind != TokenKind::Identifier {
            return None;
        }
        let name = self.tok(name_tok).text.clone();
        let mut i = name_tok;
        let mut final_tok = None;
        let mut next = self.next_sig(i)?;
        if self.tok(next).is("final") {
            final_tok = Some(next);
            i = next;
            next = self.next_sig(i)?;
        }
        if self.tok(next).is(":") {
            // Base clause: scan to the `{`.
            i = next;
            loop {
                next = self.next_sig(i)?;
                if self.tok(next).is("{") {
                    break;
                }
                if self.tok(next).is(";") {
                    return None;
                }
                i = next;
            }
        }
        if !self.tok(next).is("{") {
            return None;
        }
        let lbrace = next;
        let rbrace = self.matching(lbrace)?;
        self.pos = lbrace + 1;
        let members = self.parse_members(&name, rbrace);
        let semi_tok = match self.sig_from(rbrace + 1) {
            Some(s) if self.tok(s).is(";") => {
                self.pos = s + 1;
                Some(s)
            }
            _ => {
                self.pos = rbrace + 1;
                None
            }
        };
        Some(ClassDecl {
            keyword,
            name,
            name_tok,
            is_template,
            first_tok: first,
            final_tok,
            lbrace,
            rbrace,
            semi_tok,
            members,
        })
    }

    fn parse_members(&mut self, class_name: &str, rbrace: usize) -> Vec<Member> {
        let mut members = Vec::new();
        loop {
            let i = match self.peek_with_preproc() {
                Some(i) if i < rbrace => i,
                _ => break,
            };
            let t = self.tok(i);
            match (t.kind, t.text.as_str()) {
                (TokenKind::Keyword, "public" | "private" | "protected") => {
                    members.push(Member::Access { tok: i });
                    // Skip the `:` as well.
                    let colon = self.next_sig(i).unwrap_or(i);
                    self.pos = colon + 1;
                }
                (TokenKind::Preproc, _) => {
                    self.pos = i + 1;
                    members.push(Member::Opaque { toks: (i, i) });
                }
                _ => match self.parse_member(class_name, i, rbrace) {
                    Some(m) => members.push(m),
                    None => {
                        let toks = self.consume_opaque(i);
                        members.push(Member::Opaque { toks });
                    }
                },
            }
        }
        self.pos = rbrace + 1;
        members
    }

    fn parse_member(&mut self, class_name: &str, start: usize, rbrace: usize) -> Option<Member> {
        let mut i = start;
        let mut is_virtual = false;
        let mut is_template = false;

        if self.tok(i).is("template") {
            let lt = self.next_sig(i)?;
            if !self.tok(lt).is("<") {
                return None;
            }
            i = self.sig_from(self.matching_angle(lt)? + 1)?;
            is_template = true;
        }

        // Leading specifiers.
        let mut spec_end = None;
        let mut j = i;
        loop {
            let t = self.tok(j);
            let is_spec = t.kind == TokenKind::Keyword
                && (SPEC_KEYWORDS.contains(&t.text.as_str()));
            if is_spec {
                if t.is("virtual") {
                    is_virtual = true;
                }
                spec_end = Some(j);
                j = self.next_sig(j)?;
            } else {
                break;
            }
        }
        let _ = spec_end;

        // Constructor / destructor: name matches the class.
        let t = self.tok(j);
        if t.kind == TokenKind::Identifier && t.text == class_name {
            if let Some(lp) = self.next_sig(j) {
                if self.tok(lp).is("(") {
                    return self.parse_ctor(start, j, lp);
                }
            }
        }
        if t.is("~") {
            // Destructor: treat as a method named ~Class.
            let name_tok = self.next_sig(j)?;
            let lp = self.next_sig(name_tok)?;
            if self.tok(lp).is("(") {
                return self.parse_method(
                    start,
                    format!("~{}", self.tok(name_tok).text),
                    (start, j),
                    lp,
                    is_virtual,
                    is_template,
                    rbrace,
                );
            }
            return None;
        }

        // Type then declarator.
        let ty = self.parse_type_ref(j)?;
        let mut k = self.sig_from(ty.1 + 1)?;
        let type_end = ty.1;

        // operator() methods (present in generated functors).
        if self.tok(k).is("operator") {
            let mut name = String::from("operator");
            let mut n = self.next_sig(k)?;
            if self.tok(n).is("(") {
                let close = self.next_sig(n)?;
                if !self.tok(close).is(")") {
                    return None;
                }
                name.push_str("()");
                n = self.next_sig(close)?;
            } else {
                while self.tok(n).kind == TokenKind::Punct && !self.tok(n).is("(") {
                    name.push_str(&self.tok(n).text);
                    n = self.next_sig(n)?;
                }
            }
            if !self.tok(n).is("(") {
                return None;
            }
            return self.parse_method(start, name, (start, type_end), n, is_virtual, is_template, rbrace);
        }

        // Declarator prefix.
        let mut stars = 0u32;
        let mut is_ref = false;
        while self.tok(k).kind == TokenKind::Punct {
            match self.tok(k).text.as_str() {
                "*" => stars += 1,
                "&" => is_ref = true,
                _ => break,
            }
            k = self.next_sig(k)?;
        }
        if self.tok(k).kind != TokenKind::Identifier {
            return None;
        }
        let name_tok = k;
        let after = self.next_sig(k)?;
        if self.tok(after).is("(") {
            let ret_end = self.prev_sig(name_tok).unwrap_or(type_end);
            return self.parse_method(
                start,
                self.tok(name_tok).text.clone(),
                (start, ret_end),
                after,
                is_virtual,
                is_template,
                rbrace,
            );
        }

        // Field declaration, possibly multiple declarators.
        self.parse_field(start, (i, type_end), name_tok, stars, is_ref)
    }

    fn parse_field(
        &mut self,
        first: usize,
        type_toks: (usize, usize),
        first_name: usize,
        first_stars: u32,
        first_ref: bool,
    ) -> Option<Member> {
        let mut declarators = Vec::new();
        let mut name_tok = first_name;
        let mut stars = first_stars;
        let mut is_ref = first_ref;
        loop {
            let mut i = self.next_sig(name_tok)?;
            let mut array_toks = None;
            if self.tok(i).is("[") {
                let close = self.matching(i)?;
                array_toks = Some((i, close));
                i = self.next_sig(close)?;
            }
            let mut init = None;
            match self.tok(i).text.as_str() {
                "=" => {
                    let expr_start = self.next_sig(i)?;
                    let mut j = expr_start;
                    let mut depth = 0i32;
                    let mut last = expr_start;
                    loop {
                        let t = self.tok(j);
                        if t.kind == TokenKind::Punct {
                            match t.text.as_str() {
                                "(" | "[" | "{" => depth += 1,
                                ")" | "]" | "}" => depth -= 1,
                                "," | ";" if depth == 0 => break,
                                _ => {}
                            }
                        }
                        if t.is_significant() {
                            last = j;
                        }
                        j += 1;
                        if j >= self.toks.len() {
                            return None;
                        }
                    }
                    init = Some(MemberInitializer {
                        kind: InitKind::Equals,
                        toks: (i, last),
                        expr_toks: (expr_start, last),
                    });
                    i = self.sig_from(last + 1)?;
                }
                "{" => {
                    let close = self.matching(i)?;
                    let expr_start = self.next_sig(i)?;
                    let expr_end = self.prev_sig(close)?;
                    if expr_start > close {
                        return None;
                    }
                    init = Some(MemberInitializer {
                        kind: InitKind::Brace,
                        toks: (i, close),
                        expr_toks: (expr_start, expr_end),
                    });
                    i = self.next_sig(close)?;
                }
                _ => {}
            }
            declarators.push(FieldDeclarator {
                name: self.tok(name_tok).text.clone(),
                name_tok,
                stars,
                is_ref,
                array_toks,
                init,
            });
            match self.tok(i).text.as_str() {
                ";" => {
                    self.pos = i + 1;
                    return Some(Member::Field(FieldDecl {
                        first_tok: first,
                        type_toks,
                        declarators,
                        semi_tok: i,
                    }));
                }
                "," => {
                    let mut n = self.next_sig(i)?;
                    stars = 0;
                    is_ref = false;
                    while self.tok(n).kind == TokenKind::Punct {
                        match self.tok(n).text.as_str() {
                            "*" => stars += 1,
                            "&" => is_ref = true,
                            _ => return None,
                        }
                        n = self.next_sig(n)?;
                    }
                    if self.tok(n).kind != TokenKind::Identifier {
                        return None;
                    }
                    name_tok = n;
                }
                _ => return None,
            }
        }
    }

    fn parse_ctor(&mut self, first: usize, name_tok: usize, lparen: usize) -> Option<Member> {
        let rparen = self.matching(lparen)?;
        let params = self.parse_params(lparen, rparen);
        let mut init_colon = None;
        let mut inits = Vec::new();
        let mut i = self.sig_from(rparen + 1)?;
        if self.tok(i).is(":") {
            init_colon = Some(i);
            loop {
                let name = self.next_sig(i)?;
                if self.tok(name).kind != TokenKind::Identifier {
                    return None;
                }
                let open = self.next_sig(name)?;
                if !(self.tok(open).is("(") || self.tok(open).is("{")) {
                    return None;
                }
                let close = self.matching(open)?;
                inits.push(CtorInitEntry {
                    name: self.tok(name).text.clone(),
                    name_tok: name,
                    args_toks: (open, close),
                    end_tok: close,
                });
                i = self.next_sig(close)?;
                if self.tok(i).is(",") {
                    continue;
                }
                break;
            }
        }
        match self.tok(i).text.as_str() {
            "{" => {
                let close = self.matching(i)?;
                self.pos = i + 1;
                let stmts = self.parse_stmts(close);
                self.pos = close + 1;
                Some(Member::Ctor(CtorDecl {
                    first_tok: first,
                    name_tok,
                    params_toks: (lparen, rparen),
                    params,
                    init_colon,
                    inits,
                    body_toks: Some((i, close)),
                    body: Some(Box::new(Stmt::Compound { lbrace: i, rbrace: close, stmts })),
                    end_tok: close,
                }))
            }
            ";" => {
                self.pos = i + 1;
                Some(Member::Ctor(CtorDecl {
                    first_tok: first,
                    name_tok,
                    params_toks: (lparen, rparen),
                    params,
                    init_colon,
                    inits,
                    body_toks: None,
                    body: None,
                    end_tok: i,
                }))
            }
            _ => None,
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn parse_method(
        &mut self,
        first: usize,
        name: String,
        ret_toks: (usize, usize),
        lparen: usize,
        is_virtual: bool,
        is_template: bool,
        _rbrace: usize,
    ) -> Option<Member> {
        let rparen = self.matching(lparen)?;
        let params = self.parse_params(lparen, rparen);
        let mut modifier_toks = Vec::new();
        let mut i = self.sig_from(rparen + 1)?;
        // cv-qualifiers then contextual modifiers, in any order.
        loop {
            let t = self.tok(i);
            if t.is("const") || t.is("volatile") {
                i = self.next_sig(i)?;
            } else if t.is("override") || t.is("final") {
                modifier_toks.push(i);
                i = self.next_sig(i)?;
            } else {
                break;
            }
        }
        // `= 0` pure specifier.
        if self.tok(i).is("=") {
            let v = self.next_sig(i)?;
            i = self.next_sig(v)?;
        }
        match self.tok(i).text.as_str() {
            "{" => {
                let close = self.matching(i)?;
                self.pos = i + 1;
                let stmts = self.parse_stmts(close);
                self.pos = close + 1;
                Some(Member::Method(MethodDecl {
                    first_tok: first,
                    name,
                    is_virtual,
                    is_template,
                    ret_toks,
                    params_toks: (lparen, rparen),
                    params,
                    modifier_toks,
                    body_toks: Some((i, close)),
                    body: Some(Box::new(Stmt::Compound { lbrace: i, rbrace: close, stmts })),
                    end_tok: close,
                }))
            }
            ";" => {
                self.pos = i + 1;
                Some(Member::Method(MethodDecl {
                    first_tok: first,
                    name,
                    is_virtual,
                    is_template,
                    ret_toks,
                    params_toks: (lparen, rparen),
                    params,
                    modifier_toks,
                    body_toks: None,
                    body: None,
                    end_tok: i,
                }))
            }
            _ => None,
        }
    }

    // ---- declarations and functions ------------------------------------

    fn parse_declaration(&mut self, start: usize, is_template: bool) -> Option<DeclOrFn> {
        self.parse_declaration_from(start, start, is_template)
    }

    /// Parse a declaration whose specifiers begin at `spec_start`; `first`
    /// is the very first token of the construct (e.g. `template`).
    fn parse_declaration_from(
        &mut self,
        first: usize,
        spec_start: usize,
        is_template: bool,
    ) -> Option<DeclOrFn> {
        let saved = self.pos;
        let result = self.try_declaration(first, spec_start, is_template);
        if result.is_none() {
            self.pos = saved;
        }
        result
    }

    fn try_declaration(
        &mut self,
        first: usize,
        spec_start: usize,
        is_template: bool,
    ) -> Option<DeclOrFn> {
        let mut i = spec_start;
        let mut base_const = false;
        // Storage/cv specifiers.
        loop {
            let t = self.tok(i);
            if t.kind == TokenKind::Keyword && SPEC_KEYWORDS.contains(&t.text.as_str()) {
                if t.is("const") {
                    base_const = true;
                }
                i = self.next_sig(i)?;
            } else {
                break;
            }
        }
        let ty = self.parse_type_ref(i)?;
        let is_auto = self.tok(ty.0).is("auto") && ty.0 == ty.1;
        let base_toks = (spec_start, ty.1);
        let mut k = self.sig_from(ty.1 + 1)?;
        // `const` may also follow the type.
        if self.tok(k).is("const") {
            base_const = true;
            k = self.next_sig(k)?;
        }

        let mut stars = 0u32;
        let mut is_ref = false;
        while self.tok(k).kind == TokenKind::Punct {
            match self.tok(k).text.as_str() {
                "*" => stars += 1,
                "&" => is_ref = true,
                _ => return None,
            }
            k = self.next_sig(k)?;
        }
        if self.tok(k).kind != TokenKind::Identifier {
            return None;
        }
        let name_tok = k;
        let after = self.next_sig(k)?;

        if self.tok(after).is("(") && self.looks_like_params(after) {
            let ret_end = self.prev_sig(name_tok).unwrap_or(base_toks.1);
            return self.finish_function(
                first,
                (base_toks.0, ret_end),
                is_auto,
                name_tok,
                after,
                is_template,
            );
        }

        // Variable declaration.
        let mut declarators = Vec::new();
        let mut cur_name = name_tok;
        let mut cur_stars = stars;
        let mut cur_ref = is_ref;
        loop {
            let mut i = self.next_sig(cur_name)?;
            let mut array_toks = None;
            if self.tok(i).is("[") {
                let close = self.matching(i)?;
                array_toks = Some((i, close));
                i = self.next_sig(close)?;
            }
            let mut init = None;
            match self.tok(i).text.as_str() {
                "=" => {
                    let expr_start = self.next_sig(i)?;
                    let (last, next) = self.scan_expr_until_comma_or_semi(expr_start)?;
                    init = Some(VarInit { kind: InitKind::Equals, expr_toks: (expr_start, last) });
                    i = next;
                }
                "(" => {
                    let close = self.matching(i)?;
                    let es = self.next_sig(i)?;
                    if es > close {
                        return None;
                    }
                    let ee = self.prev_sig(close)?;
                    if ee < es {
                        return None;
                    }
                    init = Some(VarInit { kind: InitKind::Paren, expr_toks: (es, ee) });
                    i = self.next_sig(close)?;
                }
                "{" => {
                    let close = self.matching(i)?;
                    let es = self.next_sig(i)?;
                    if es <= close {
                        if let Some(ee) = self.prev_sig(close) {
                            if ee >= es {
                                init = Some(VarInit { kind: InitKind::Brace, expr_toks: (es, ee) });
                            }
                        }
                    }
                    i = self.next_sig(close)?;
                }
                _ => {}
            }
            declarators.push(VarDeclarator {
                stars: cur_stars,
                is_ref: cur_ref,
                name: self.tok(cur_name).text.clone(),
                name_tok: cur_name,
                array_toks,
                init,
            });
            match self.tok(i).text.as_str() {
                ";" => {
                    self.pos = i + 1;
                    return Some(DeclOrFn::Var(VarDecl {
                        first_tok: first,
                        semi_tok: i,
                        is_auto,
                        base_const,
                        base_toks,
                        declarators,
                    }));
                }
                "," => {
                    let mut n = self.next_sig(i)?;
                    cur_stars = 0;
                    cur_ref = false;
                    while self.tok(n).kind == TokenKind::Punct {
                        match self.tok(n).text.as_str() {
                            "*" => cur_stars += 1,
                            "&" => cur_ref = true,
                            _ => return None,
                        }
                        n = self.next_sig(n)?;
                    }
                    if self.tok(n).kind != TokenKind::Identifier {
                        return None;
                    }
                    cur_name = n;
                }
                _ => return None,
            }
        }
    }

    /// Scan an initializer expression: stop before a top-level `,` or `;`.
    /// Returns (last expr token, index of the stopping token).
    fn scan_expr_until_comma_or_semi(&self, start: usize) -> Option<(usize, usize)> {
        let mut j = start;
        let mut depth = 0i32;
        let mut last = start;
        while j < self.toks.len() {
            let t = self.tok(j);
            if t.kind == TokenKind::Punct {
                match t.text.as_str() {
                    "(" | "[" | "{" => depth += 1,
                    ")" | "]" | "}" => {
                        if depth == 0 {
                            return None;
                        }
                        depth -= 1;
                    }
                    "," | ";" if depth == 0 => return Some((last, j)),
                    _ => {}
                }
            }
            if t.is_significant() {
                last = j;
            }
            j += 1;
        }
        None
    }

    fn looks_like_params(&self, lparen: usize) -> bool {
        let rparen = match self.matching(lparen) {
            Some(r) => r,
            None => return false,
        };
        let first = match self.sig_from(lparen + 1) {
            Some(f) => f,
            None => return false,
        };
        if first >= rparen {
            return true; // `()`: empty parameter list
        }
        let t = self.tok(first);
        if t.kind == TokenKind::Keyword
            && (TYPE_KEYWORDS.contains(&t.text.as_str()) || SPEC_KEYWORDS.contains(&t.text.as_str()))
        {
            return true;
        }
        if t.kind == TokenKind::Identifier {
            // `Foo x`, `Foo *x`, `Foo &x`, `Foo::Bar x`, `Foo<...> x` look
            // like a parameter; a lone identifier or literal is an argument.
            if let Some(n) = self.next_sig(first) {
                let nt = self.tok(n);
                return nt.kind == TokenKind::Identifier
                    || nt.is("*")
                    || nt.is("&")
                    || nt.is("::")
                    || nt.is("<");
            }
        }
        false
    }

    fn finish_function(
        &mut self,
        first: usize,
        ret_toks: (usize, usize),
        auto_ret: bool,
        name_tok: usize,
        lparen: usize,
        is_template: bool,
    ) -> Option<DeclOrFn> {
        let rparen = self.matching(lparen)?;
        let params = self.parse_params(lparen, rparen);
        let mut i = self.sig_from(rparen + 1)?;
        let mut trailing = None;
        if self.tok(i).is("->") {
            let arrow = i;
            let n = self.next_sig(i)?;
            if self.tok(n).is("decltype") {
                let lp = self.next_sig(n)?;
                if !self.tok(lp).is("(") {
                    return None;
                }
                let rp = self.matching(lp)?;
                let id = self.next_sig(lp)?;
                let name = self.tok(id).text.clone();
                trailing = Some(TrailingReturn {
                    arrow_tok: arrow,
                    end_tok: rp,
                    kind: TrailingKind::DecltypeParam { name },
                });
                i = self.next_sig(rp)?;
            } else {
                // Named trailing type: tokens up to `{` or `;`.
                let start = n;
                let mut j = n;
                let mut last = n;
                loop {
                    let t = self.tok(j);
                    if t.is("{") || t.is(";") {
                        break;
                    }
                    if t.is_significant() {
                        last = j;
                    }
                    j = self.next_sig(j)? + 0;
                    if j >= self.toks.len() {
                        return None;
                    }
                    if self.tok(j).is("{") || self.tok(j).is(";") {
                        break;
                    }
                }
                trailing = Some(TrailingReturn {
                    arrow_tok: arrow,
                    end_tok: last,
                    kind: TrailingKind::Named { toks: (start, last) },
                });
                i = self.sig_from(last + 1)?;
            }
        }
        match self.tok(i).text.as_str() {
            "{" => {
                let close = self.matching(i)?;
                self.pos = i + 1;
                let stmts = self.parse_stmts(close);
                self.pos = close + 1;
                Some(DeclOrFn::Fn(FunctionDecl {
                    first_tok: first,
                    name: self.tok(name_tok).text.clone(),
                    name_tok,
                    is_template,
                    ret_toks,
                    auto_ret,
                    trailing,
                    params_toks: (lparen, rparen),
                    params,
                    body_toks: Some((i, close)),
                    body: Some(Box::new(Stmt::Compound { lbrace: i, rbrace: close, stmts })),
                    end_tok: close,
                }))
            }
            ";" => {
                self.pos = i + 1;
                Some(DeclOrFn::Fn(FunctionDecl {
                    first_tok: first,
                    name: self.tok(name_tok).text.clone(),
                    name_tok,
                    is_template,
                    ret_toks,
                    auto_ret,
                    trailing,
                    params_toks: (lparen, rparen),
                    params,
                    body_toks: None,
                    body: None,
                    end_tok: i,
                }))
            }
            _ => None,
        }
    }

    fn parse_params(&self, lparen: usize, rparen: usize) -> Vec<Param> {
        let mut params = Vec::new();
        let mut i = match self.sig_from(lparen + 1) {
            Some(i) => i,
            None => return params,
        };
        if i >= rparen {
            return params;
        }
        loop {
            // One parameter: specifier/type tokens, then declarator symbols,
            // then an optional name.
            let type_start = i;
            let mut type_end = i;
            let mut stars = 0u32;
            let mut is_ref = false;
            let mut name = None;
            let mut name_tok = None;
            let mut j = i;
            while j < rparen {
                let t = self.tok(j);
                if t.is(",") {
                    break;
                }
                match t.text.as_str() {
                    "*" => {
                        stars += 1;
                        j = match self.next_sig(j) {
                            Some(n) => n,
                            None => break,
                        };
                        continue;
                    }
                    "&" => {
                        is_ref = true;
                        j = match self.next_sig(j) {
                            Some(n) => n,
                            None => break,
                        };
                        continue;
                    }
                    "<" => {
                        if let Some(g) = self.matching_angle(j) {
                            type_end = g;
                            j = match self.next_sig(g) {
                                Some(n) => n,
                                None => break,
                            };
                            continue;
                        }
                    }
                    "=" => {
                        // Default argument: skip to `,` or rparen.
                        while j < rparen && !self.tok(j).is(",") {
                            j += 1;
                        }
                        break;
                    }
                    _ => {}
                }
                if t.kind == TokenKind::Identifier && stars == 0 && !is_ref {
                    // May be part of the type (e.g. `std::string`) or the name.
                    let next = self.next_sig(j);
                    let is_name = match next {
                        Some(n) if n < rparen => {
                            let nt = self.tok(n);
                            nt.is(",") || nt.is("=") || nt.is("[")
                        }
                        _ => true,
                    };
                    if is_name && type_end != j && j != type_start {
                        name = Some(t.text.clone());
                        name_tok = Some(j);
                    } else if is_name && j == type_start {
                        // A lone identifier is the type (unnamed param).
                        type_end = j;
                    } else {
                        type_end = j;
                    }
                } else if t.kind == TokenKind::Identifier {
                    name = Some(t.text.clone());
                    name_tok = Some(j);
                } else if t.is_significant() && !t.is("[") && !t.is("]") {
                    type_end = j;
                }
                j = match self.next_sig(j) {
                    Some(n) if n <= rparen => n,
                    _ => break,
                };
                if j >= rparen {
                    break;
                }
            }
            params.push(Param { type_toks: (type_start, type_end), stars, is_ref, name, name_tok });
            // Advance past the `,`.
            while i < rparen && !self.tok(i).is(",") {
                i = match self.next_sig(i) {
                    Some(n) => n,
                    None => return params,
                };
                if i >= rparen {
                    return params;
                }
                if self.tok(i).is("(") || self.tok(i).is("[") || self.tok(i).is("{") {
                    i = match self.matching(i) {
                        Some(m) => m,
                        None => return params,
                    };
                }
                if self.tok(i).is("<") {
                    if let Some(g) = self.matching_angle(i) {
                        i = g;
                    }
                }
            }
            if i >= rparen {
                return params;
            }
            i = match self.sig_from(i + 1) {
                Some(n) if n < rparen => n,
                _ => return params,
            };
        }
    }

    /// A type reference: fundamental keyword run, or (qualified) identifier
    /// with optional template arguments. Returns its token range.
    fn parse_type_ref(&self, start: usize) -> Option<(usize, usize)> {
        let t = self.tok(start);
        if t.kind == TokenKind::Keyword && TYPE_KEYWORDS.contains(&t.text.as_str()) {
            let mut end = start;
            let mut i = start;
            // Multi-keyword fundamentals: `unsigned long`, `long long`, ...
            while let Some(n) = self.next_sig(i) {
                let nt = self.tok(n);
                if nt.kind == TokenKind::Keyword
                    && ["unsigned", "signed", "long", "short", "int", "char", "double"]
                        .contains(&nt.text.as_str())
                    && !t.is("auto")
                {
                    end = n;
                    i = n;
                } else {
                    break;
                }
            }
            return Some((start, end));
        }
        if t.kind == TokenKind::Identifier {
            let mut end = start;
            let mut i = start;
            loop {
                let n = match self.next_sig(i) {
                    Some(n) => n,
                    None => break,
                };
                if self.tok(n).is("::") {
                    let id = self.next_sig(n)?;
                    if self.tok(id).kind != TokenKind::Identifier {
                        return None;
                    }
                    end = id;
                    i = id;
                } else if self.tok(n).is("<") {
                    let g = self.matching_angle(n)?;
                    end = g;
                    // Allow `Foo<T>::type`.
                    if let Some(c) = self.next_sig(g) {
                        if self.tok(c).is("::") {
                            let id = self.next_sig(c)?;
                            if self.tok(id).kind == TokenKind::Identifier {
                                end = id;
                                i = id;
                                continue;
                            }
                        }
                    }
                    break;
                } else {
                    break;
                }
            }
            return Some((start, end));
        }
        None
    }

    // ---- statements -----------------------------------------------------

    fn parse_stmts(&mut self, rbrace: usize) -> Vec<Stmt> {
        let mut stmts = Vec::new();
        loop {
            let i = match self.peek_with_preproc() {
                Some(i) if i < rbrace => i,
                _ => break,
            };
            stmts.push(self.parse_stmt(i));
        }
        self.pos = rbrace + 1;
        stmts
    }

    fn parse_stmt(&mut self, start: usize) -> Stmt {
        let t = self.tok(start);
        match (t.kind, t.text.as_str()) {
            (TokenKind::Preproc, _) => {
                self.pos = start + 1;
                Stmt::Directive { tok: start }
            }
            (_, "{") => {
                let close = self.matching(start).unwrap_or(start);
                self.pos = start + 1;
                let stmts = self.parse_stmts(close);
                self.pos = close + 1;
                Stmt::Compound { lbrace: start, rbrace: close, stmts }
            }
            (TokenKind::Keyword, "return") => {
                let (s, e) = self.consume_opaque(start);
                let expr = if self.tok(e).is(";") {
                    match self.sig_from(s + 1) {
                        Some(x) if x < e => Some((x, self.prev_sig(e).unwrap_or(x))),
                        _ => None,
                    }
                } else {
                    None
                };
                Stmt::Return { toks: (s, e), expr }
            }
            (TokenKind::Keyword, "for") => self.parse_for(start),
            (TokenKind::Keyword, "if" | "while" | "switch") => self.parse_control(start),
            (TokenKind::Keyword, "do") => {
                self.pos = start + 1;
                let body_start = match self.peek() {
                    Some(b) => b,
                    None => return Stmt::Opaque { toks: (start, start) },
                };
                let body = Box::new(self.parse_stmt(body_start));
                // `while (...) ;`
                let (_, end) = self.consume_opaque(self.peek().unwrap_or(body_start));
                Stmt::Control { kw_tok: start, header: None, body, else_body: None, end_tok: end }
            }
            (TokenKind::Keyword, "class" | "struct" | "union") => {
                let saved = self.pos;
                match self.parse_class(start, start, false) {
                    Some(c) => Stmt::LocalClass(c),
                    None => {
                        self.pos = saved;
                        Stmt::Opaque { toks: self.consume_opaque(start) }
                    }
                }
            }
            _ => {
                // Try a declaration; otherwise it is an expression statement.
                if self.starts_declaration(start) {
                    if let Some(DeclOrFn::Var(v)) = self.parse_declaration(start, false) {
                        return Stmt::Decl(v);
                    }
                }
                let toks = self.consume_opaque(start);
                if self.tok(toks.1).is(";") {
                    Stmt::Expr { toks }
                } else {
                    Stmt::Opaque { toks }
                }
            }
        }
    }

    fn starts_declaration(&self, start: usize) -> bool {
        let t = self.tok(start);
        if t.kind == TokenKind::Keyword
            && (TYPE_KEYWORDS.contains(&t.text.as_str()) || SPEC_KEYWORDS.contains(&t.text.as_str()))
        {
            return true;
        }
        if t.kind == TokenKind::Identifier {
            // `Foo x`, `Foo *x = ...`, `Foo::Bar x`, `Foo<T> x`
            if let Some((_, end)) = self.parse_type_ref(start) {
                if let Some(n) = self.sig_from(end + 1) {
                    let nt = self.tok(n);
                    if nt.kind == TokenKind::Identifier {
                        return true;
                    }
                    if nt.is("*") || nt.is("&") {
                        // Could be multiplication / address-of; require an
                        // identifier right after and then `=`, `;` or `,`.
                        if let Some(m) = self.next_sig(n) {
                            if self.tok(m).kind == TokenKind::Identifier {
                                if let Some(x) = self.next_sig(m) {
                                    let xt = self.tok(x);
                                    return xt.is("=") || xt.is(";") || xt.is(",") || xt.is("[");
                                }
                            }
                        }
                    }
                }
            }
        }
        false
    }

    fn parse_for(&mut self, for_tok: usize) -> Stmt {
        let lparen = match self.next_sig(for_tok) {
            Some(l) if self.tok(l).is("(") => l,
            _ => return Stmt::Opaque { toks: self.consume_opaque(for_tok) },
        };
        let rparen = match self.matching(lparen) {
            Some(r) => r,
            None => return Stmt::Opaque { toks: self.consume_opaque(for_tok) },
        };
        // A top-level `:` inside the parens marks a range-for.
        let mut colon = None;
        let mut depth = 0i32;
        for j in lparen + 1..rparen {
            let t = self.tok(j);
            if t.kind != TokenKind::Punct {
                continue;
            }
            match t.text.as_str() {
                "(" | "[" | "{" | "<" => depth += 1,
                ")" | "]" | "}" | ">" => depth -= 1,
                ":" if depth == 0 => {
                    colon = Some(j);
                    break;
                }
                _ => {}
            }
        }
        self.pos = rparen + 1;
        let body_start = match self.peek() {
            Some(b) => b,
            None => return Stmt::Opaque { toks: (for_tok, rparen) },
        };
        let body = Box::new(self.parse_stmt(body_start));
        match colon {
            Some(c) => {
                let decl_start = self.sig_from(lparen + 1).unwrap_or(c);
                let decl_end = self.prev_sig(c).unwrap_or(decl_start);
                let range_start = self.sig_from(c + 1).unwrap_or(rparen);
                let range_end = self.prev_sig(rparen).unwrap_or(range_start);
                Stmt::RangeFor(RangeFor {
                    for_tok,
                    lparen,
                    decl_toks: (decl_start, decl_end),
                    colon_tok: c,
                    range_toks: (range_start, range_end),
                    rparen,
                    body,
                })
            }
            None => Stmt::For { for_tok, header: (lparen, rparen), body },
        }
    }

    fn parse_control(&mut self, kw: usize) -> Stmt {
        let lparen = match self.next_sig(kw) {
            Some(l) if self.tok(l).is("(") => l,
            _ => return Stmt::Opaque { toks: self.consume_opaque(kw) },
        };
        let rparen = match self.matching(lparen) {
            Some(r) => r,
            None => return Stmt::Opaque { toks: self.consume_opaque(kw) },
        };
        self.pos = rparen + 1;
        let body_start = match self.peek() {
            Some(b) => b,
            None => return Stmt::Opaque { toks: (kw, rparen) },
        };
        let body = Box::new(self.parse_stmt(body_start));
        let mut end_tok = body.tok_range().1;
        let mut else_body = None;
        if self.tok(kw).is("if") {
            if let Some(e) = self.peek() {
                if self.tok(e).is("else") {
                    self.pos = e + 1;
                    if let Some(eb) = self.peek() {
                        let eb_stmt = self.parse_stmt(eb);
                        end_tok = eb_stmt.tok_range().1;
                        else_body = Some(Box::new(eb_stmt));
                    }
                }
            }
        }
        Stmt::Control { kw_tok: kw, header: Some((lparen, rparen)), body, else_body, end_tok }
    }
}

enum DeclOrFn {
    Fn(FunctionDecl),
    Var(VarDecl),
}

/// Parse a parenthesized parameter list outside of a full parse; `lparen`
/// and `rparen` are the indices of the surrounding tokens.
pub fn parse_param_list(tokens: &[Token], lparen: usize, rparen: usize) -> Vec<Param> {
    let p = Parser { toks: tokens, pos: 0 };
    p.parse_params(lparen, rparen)
}

/// Matching `>` for the `<` at `i`, treating `>>` as two closers.
pub fn matching_angle_tok(tokens: &[Token], i: usize) -> Option<usize> {
    let p = Parser { toks: tokens, pos: 0 };
    p.matching_angle(i)
}

fn parse_include(line: &str) -> Option<IncludeKind> {
    let rest = line.trim_start().strip_prefix('#')?.trim_start();
    let rest = rest.strip_prefix("include")?.trim_start();
    if let Some(stripped) = rest.strip_prefix('"') {
        let end = stripped.find('"')?;
        return Some(IncludeKind::Quoted(stripped[..end].to_string()));
    }
    if let Some(stripped) = rest.strip_prefix('<') {
        let end = stripped.find('>')?;
        return Some(IncludeKind::Angle(stripped[..end].to_string()));
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::lexer::tokenize;

    fn parse_src(src: &str) -> SyntaxTree {
        let out = tokenize(src.as_bytes());
        assert!(out.errors.is_empty(), "lex errors: {:?}", out.errors);
        parse(out.tokens).expect("parse")
    }

    #[test]
    fn parses_simple_class_with_member_init() {
        let tree = parse_src("struct A {\n  int a { 3 };\n  std::string s = \"s\";\n};\n");
        let Item::Class(c) = &tree.items[0] else { panic!() };
        assert_eq!(c.name, "A");
        assert_eq!(c.keyword, ClassKey::Struct);
        let fields: Vec<_> = c
            .members
            .iter()
            .filter_map(|m| match m {
                Member::Field(f) => Some(f),
                _ => None,
            })
            .collect();
        assert_eq!(fields.len(), 2);
        let init = fields[0].declarators[0].init.as_ref().unwrap();
        assert_eq!(init.kind, InitKind::Brace);
        assert_eq!(tree.sig_text(init.expr_toks), "3");
        let init = fields[1].declarators[0].init.as_ref().unwrap();
        assert_eq!(init.kind, InitKind::Equals);
    }

    #[test]
    fn parses_ctor_with_init_list() {
        let tree = parse_src("class C {\npublic:\n  C(int _b) : b(_b) {\n  }\nprivate:\n  int a = 1;\n  int b = 2;\n};\n");
        let Item::Class(c) = &tree.items[0] else { panic!() };
        let ctor = c
            .members
            .iter()
            .find_map(|m| match m {
                Member::Ctor(ct) => Some(ct),
                _ => None,
            })
            .unwrap();
        assert_eq!(ctor.inits.len(), 1);
        assert_eq!(ctor.inits[0].name, "b");
    }

    #[test]
    fn parses_lambda_statement_as_expr() {
        let src = "void f() {\n  std::for_each(v.begin(), v.end(), [&inc](int &n) { n += inc; });\n}\n";
        let tree = parse_src(src);
        let Item::Function(f) = &tree.items[0] else { panic!() };
        let Stmt::Compound { stmts, .. } = f.body.as_deref().unwrap() else { panic!() };
        assert!(matches!(stmts[0], Stmt::Expr { .. }));
    }

    #[test]
    fn parses_template_function_flag() {
        let tree = parse_src("template<class T> void f(T t) { auto x = t; }\n");
        let Item::Function(f) = &tree.items[0] else { panic!() };
        assert!(f.is_template);
        assert!(f.body.is_some());
    }

    #[test]
    fn include_directive_is_captured() {
        let tree = parse_src("#include \"a.h\"\nint a;\n");
        let Item::Directive { include, .. } = &tree.items[0] else { panic!() };
        assert!(matches!(include, Some(IncludeKind::Quoted(p)) if p == "a.h"));
    }

    #[test]
    fn range_for_is_recognized() {
        let src = "void f() {\n  int array[4] = {1,2,3,0};\n  for (auto &k : array) {\n    k = 1;\n  }\n}\n";
        let tree = parse_src(src);
        let Item::Function(f) = &tree.items[0] else { panic!() };
        let Stmt::Compound { stmts, .. } = f.body.as_deref().unwrap() else { panic!() };
        assert!(matches!(stmts[0], Stmt::Decl(_)));
        let Stmt::RangeFor(r) = &stmts[1] else { panic!("{:?}", stmts[1]) };
        assert_eq!(tree.sig_text(r.range_toks), "array");
        assert_eq!(tree.sig_text(r.decl_toks), "auto & k");
    }

    #[test]
    fn trailing_return_decltype() {
        let tree = parse_src("auto foo(int a) -> decltype(a) {\n  return a;\n}\n");
        let Item::Function(f) = &tree.items[0] else { panic!() };
        assert!(f.auto_ret);
        let tr = f.trailing.as_ref().unwrap();
        assert!(matches!(&tr.kind, TrailingKind::DecltypeParam { name } if name == "a"));
    }

    #[test]
    fn unbalanced_braces_error() {
        let out = tokenize(b"int f() { {\n");
        assert!(parse(out.tokens).is_err());
    }

    #[test]
    fn unknown_construct_becomes_opaque() {
        let tree = parse_src("extern \"C\" void f();\nint a;\n");
        assert!(matches!(tree.items[0], Item::Opaque { .. }));
        assert!(matches!(tree.items[1], Item::Var(_)));
    }

    #[test]
    fn using_alias_and_import() {
        let tree = parse_src("using ul = unsigned long;\nusing std::vector;\n");
        let Item::UsingAlias(a) = &tree.items[0] else { panic!() };
        assert_eq!(a.name, "ul");
        assert_eq!(tree.sig_text(a.target_toks), "unsigned long");
        assert!(matches!(tree.items[1], Item::UsingImport { .. }));
    }

    #[test]
    fn template_using_alias() {
        let tree = parse_src("template<class T>\nusing mapVec = std::map<T, Vec<T> >;\n");
        let Item::UsingAlias(a) = &tree.items[0] else { panic!() };
        assert_eq!(a.name, "mapVec");
        assert!(a.template_toks.is_some());
    }

    #[test]
    fn final_and_override_modifiers() {
        let tree = parse_src("class B final : public A {\n  void b() override final;\n};\n");
        let Item::Class(c) = &tree.items[0] else { panic!() };
        assert!(c.final_tok.is_some());
        let m = c
            .members
            .iter()
            .find_map(|m| match m {
                Member::Method(md) => Some(md),
                _ => None,
            })
            .unwrap();
        assert_eq!(m.modifier_toks.len(), 2);
    }

    #[test]
    fn multi_declarator_auto() {
        let tree = parse_src("auto xp = &a, yp = xp;\n");
        let Item::Var(v) = &tree.items[0] else { panic!() };
        assert!(v.is_auto);
        assert_eq!(v.declarators.len(), 2);
        assert_eq!(v.declarators[0].name, "xp");
        assert_eq!(v.declarators[1].name, "yp");
    }

    #[test]
    fn var_with_paren_init_is_not_function() {
        let tree = parse_src("std::vector<int> v(6);\nint x();\n");
        assert!(matches!(tree.items[0], Item::Var(_)));
        assert!(matches!(tree.items[1], Item::Function(_)));
    }
}
