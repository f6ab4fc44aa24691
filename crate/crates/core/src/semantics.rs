//! Scopes and a structural type model.
//!
//! The model is deliberately small: it covers exactly what is needed to
//! deduce types for `auto` declarations, `decltype(param)` trailing
//! returns, and range-for element types. Anything outside that subset
//! reports an error and the caller skips the transformation for that
//! declaration instead of failing the whole unit.

use std::collections::HashMap;
use std::fmt;

use crate::syntax::lexer::TokenKind;
use crate::syntax::parser::{
    ClassDecl, FunctionDecl, Item, Member, Param, SyntaxTree, TrailingKind,
};

#[derive(Debug, Clone, thiserror::Error)]
pub enum SemanticError {
    #[error("unresolved identifier `{name}` at line {line}")]
    UnresolvedIdentifier { name: String, line: u32 },
    #[error("unsupported expression at line {line}")]
    UnsupportedExpression { line: u32 },
    #[error("deduction mismatch at line {line}")]
    DeductionMismatch { line: u32 },
    #[error("unsupported decltype operand at line {line}")]
    UnsupportedDecltypeOperand { line: u32 },
    #[error("no usable range protocol at line {line}")]
    NoRangeProtocol { line: u32 },
}

/// Structural representation of a C++ type.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TypeRepr {
    Fundamental(String),
    Named { name: String, args: Vec<TypeRepr> },
    Pointer(Box<TypeRepr>),
    Reference(Box<TypeRepr>),
    Function { params: Vec<TypeRepr>, ret: Box<TypeRepr> },
    Array { elem: Box<TypeRepr>, extent: u64 },
    Const(Box<TypeRepr>),
}

impl TypeRepr {
    pub fn fundamental(name: &str) -> Self {
        TypeRepr::Fundamental(name.to_string())
    }

    pub fn named(name: &str) -> Self {
        TypeRepr::Named { name: name.to_string(), args: Vec::new() }
    }

    pub fn pointer(inner: TypeRepr) -> Self {
        TypeRepr::Pointer(Box::new(inner))
    }

    /// Reference constructor; collapses reference-to-reference.
    pub fn reference(inner: TypeRepr) -> Self {
        match inner {
            TypeRepr::Reference(t) => TypeRepr::Reference(t),
            other => TypeRepr::Reference(Box::new(other)),
        }
    }

    /// Const constructor; never wraps const directly in const.
    pub fn const_(inner: TypeRepr) -> Self {
        match inner {
            TypeRepr::Const(t) => TypeRepr::Const(t),
            other => TypeRepr::Const(Box::new(other)),
        }
    }

    /// Strip a top-level reference, if any.
    pub fn deref_ref(self) -> TypeRepr {
        match self {
            TypeRepr::Reference(t) => *t,
            other => other,
        }
    }

    /// Strip top-level const, if any.
    pub fn strip_const(self) -> TypeRepr {
        match self {
            TypeRepr::Const(t) => *t,
            other => other,
        }
    }

    /// Template-argument-style decay: strip reference, then const, then
    /// apply array-to-pointer and function-to-pointer decay.
    pub fn decay(self) -> TypeRepr {
        let t = self.deref_ref().strip_const();
        match t {
            TypeRepr::Array { elem, .. } => TypeRepr::Pointer(elem),
            f @ TypeRepr::Function { .. } => TypeRepr::pointer(f),
            other => other,
        }
    }

    /// Render a declarator: the type with `name` in declarator position.
    /// A function type renders in function-pointer form.
    pub fn render(&self, name: &str) -> String {
        match self {
            TypeRepr::Fundamental(b) => join_base(b, name),
            TypeRepr::Named { name: n, args } => {
                let mut base = n.clone();
                if !args.is_empty() {
                    let inner = args
                        .iter()
                        .map(|a| a.render(""))
                        .collect::<Vec<_>>()
                        .join(", ");
                    // C++03 requires a space before a closing `>>`.
                    let sep = if inner.ends_with('>') { " " } else { "" };
                    base = format!("{}<{}{}>", base, inner, sep);
                }
                join_base(&base, name)
            }
            TypeRepr::Pointer(inner) => inner.render(&format!("*{}", name)),
            TypeRepr::Reference(inner) => inner.render(&format!("&{}", name)),
            TypeRepr::Const(inner) => match inner.as_ref() {
                TypeRepr::Fundamental(_) | TypeRepr::Named { .. } => {
                    format!("const {}", inner.render(name))
                }
                // e.g. int *const p
                _ => inner.render(&format!("const {}", name)),
            },
            TypeRepr::Function { params, ret } => {
                let plist = params
                    .iter()
                    .map(|p| p.render(""))
                    .collect::<Vec<_>>()
                    .join(", ");
                ret.render(&format!("({})({})", paren_name(name), plist))
            }
            TypeRepr::Array { elem, extent } => {
                elem.render(&format!("{}[{}]", name, extent))
            }
        }
    }

    /// The type by itself, e.g. `int *` or `std::vector<int>`.
    pub fn text(&self) -> String {
        self.render("").trim_end().to_string()
    }
}

fn join_base(base: &str, name: &str) -> String {
    if name.is_empty() {
        base.to_string()
    } else {
        format!("{} {}", base, name)
    }
}

/// A function declarator needs the pointer star inside the parens.
fn paren_name(name: &str) -> String {
    if name.starts_with('*') || name.starts_with('&') {
        name.to_string()
    } else {
        format!("*{}", name)
    }
}

impl fmt::Display for TypeRepr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text())
    }
}

// ---------------------------------------------------------------------------
// Scopes

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScopeKind {
    Global,
    Namespace,
    Class,
    Function,
    Block,
}

#[derive(Debug)]
struct Frame {
    kind: ScopeKind,
    bindings: HashMap<String, TypeRepr>,
}

/// A stack of lexical scopes; lookup resolves innermost-first.
#[derive(Debug)]
pub struct Scope {
    frames: Vec<Frame>,
}

impl Scope {
    pub fn new() -> Self {
        Scope { frames: vec![Frame { kind: ScopeKind::Global, bindings: HashMap::new() }] }
    }

    pub fn push(&mut self, kind: ScopeKind) {
        self.frames.push(Frame { kind, bindings: HashMap::new() });
    }

    pub fn pop(&mut self) {
        debug_assert!(self.frames.len() > 1);
        self.frames.pop();
    }

    pub fn bind(&mut self, name: &str, ty: TypeRepr) {
        self.frames
            .last_mut()
            .expect("scope stack is never empty")
            .bindings
            .insert(name.to_string(), ty);
    }

    pub fn lookup(&self, name: &str) -> Option<&TypeRepr> {
        self.frames.iter().rev().find_map(|f| f.bindings.get(name))
    }

    pub fn kind(&self) -> ScopeKind {
        self.frames.last().expect("scope stack is never empty").kind
    }

    pub fn depth(&self) -> usize {
        self.frames.len()
    }
}

impl Default for Scope {
    fn default() -> Self {
        Self::new()
    }
}

// ---------------------------------------------------------------------------
// Per-unit type context

#[derive(Debug, Clone)]
pub struct ClassInfo {
    pub name: String,
    /// Declared return type of `begin()`, when the class declares one.
    pub begin_ret: Option<TypeRepr>,
    pub end_ret: Option<TypeRepr>,
}

/// Declared names visible in a translation unit: classes with their
/// iteration protocol and type aliases.
#[derive(Debug, Default)]
pub struct TypeContext {
    pub classes: HashMap<String, ClassInfo>,
    pub aliases: HashMap<String, TypeRepr>,
}

impl TypeContext {
    pub fn build(tree: &SyntaxTree) -> TypeContext {
        let mut ctx = TypeContext::default();
        collect_items(tree, &tree.items, &mut ctx);
        ctx
    }

    /// Resolve a named type through (non-template) aliases.
    pub fn resolve(&self, ty: TypeRepr) -> TypeRepr {
        if let TypeRepr::Named { name, args } = &ty {
            if args.is_empty() {
                if let Some(t) = self.aliases.get(name) {
                    return t.clone();
                }
            }
        }
        ty
    }
}

fn collect_items(tree: &SyntaxTree, items: &[Item], ctx: &mut TypeContext) {
    for item in items {
        match item {
            Item::Class(c) => {
                ctx.classes.insert(c.name.clone(), class_info(tree, c));
            }
            Item::Namespace { items, .. } => collect_items(tree, items, ctx),
            Item::UsingAlias(a) => {
                if a.template_toks.is_none() {
                    if let Some(t) = type_from_tokens(tree, a.target_toks) {
                        ctx.aliases.insert(a.name.clone(), t);
                    }
                }
            }
            _ => {}
        }
    }
}

fn class_info(tree: &SyntaxTree, c: &ClassDecl) -> ClassInfo {
    let mut begin_ret = None;
    let mut end_ret = None;
    for m in &c.members {
        if let Member::Method(md) = m {
            if md.name == "begin" {
                begin_ret = type_from_tokens(tree, md.ret_toks);
            } else if md.name == "end" {
                end_ret = type_from_tokens(tree, md.ret_toks);
            }
        }
    }
    ClassInfo { name: c.name.clone(), begin_ret, end_ret }
}

// ---------------------------------------------------------------------------
// Building TypeRepr from source tokens

/// Build a type from the significant tokens of a declaration's type part,
/// including any trailing `*` / `&` present in the range.
pub fn type_from_tokens(tree: &SyntaxTree, toks: (usize, usize)) -> Option<TypeRepr> {
    let sig: Vec<usize> = (toks.0..=toks.1)
        .filter(|&i| tree.tokens[i].is_significant())
        .collect();
    let mut pos = 0usize;
    let ty = parse_type_at(tree, &sig, &mut pos)?;
    if pos < sig.len() {
        return None;
    }
    Some(ty)
}

fn parse_type_at(tree: &SyntaxTree, sig: &[usize], pos: &mut usize) -> Option<TypeRepr> {
    let mut is_const = false;
    // Leading qualifiers/specifiers.
    loop {
        let t = &tree.tokens[*sig.get(*pos)?];
        match t.text.as_str() {
            "const" => {
                is_const = true;
                *pos += 1;
            }
            "typename" | "static" | "inline" | "mutable" | "virtual" => *pos += 1,
            _ => break,
        }
    }
    let t = &tree.tokens[sig[*pos]];
    let mut base = match t.kind {
        TokenKind::Keyword => {
            const FUND: &[&str] = &[
                "void", "bool", "char", "int", "unsigned", "signed", "long", "short",
                "float", "double",
            ];
            if !FUND.contains(&t.text.as_str()) {
                return None;
            }
            let mut words = vec![t.text.clone()];
            *pos += 1;
            while let Some(&i) = sig.get(*pos) {
                let n = &tree.tokens[i];
                if n.kind == TokenKind::Keyword && FUND.contains(&n.text.as_str()) {
                    words.push(n.text.clone());
                    *pos += 1;
                } else {
                    break;
                }
            }
            TypeRepr::Fundamental(words.join(" "))
        }
        TokenKind::Identifier => {
            let mut name = t.text.clone();
            *pos += 1;
            let mut args = Vec::new();
            loop {
                match sig.get(*pos).map(|&i| tree.tokens[i].text.as_str()) {
                    Some("::") => {
                        let id = sig.get(*pos + 1)?;
                        if tree.tokens[*id].kind != TokenKind::Identifier {
                            return None;
                        }
                        name.push_str("::");
                        name.push_str(&tree.tokens[*id].text);
                        *pos += 2;
                    }
                    Some("<") => {
                        *pos += 1;
                        loop {
                            let arg = parse_type_at(tree, sig, pos)?;
                            args.push(arg);
                            match sig.get(*pos).map(|&i| tree.tokens[i].text.as_str()) {
                                Some(",") => *pos += 1,
                                Some(">") => {
                                    *pos += 1;
                                    break;
                                }
                                Some(">>") => {
                                    // Closes this level and the outer one;
                                    // rewrite by leaving a synthetic `>`.
                                    // Simplest handling: treat as done and
                                    // let the caller consume it too.
                                    *pos += 1;
                                    return Some(finish_named(name, args, is_const));
                                }
                                _ => return None,
                            }
                        }
                        // Allow `Foo<T>::type`.
                        if sig.get(*pos).map(|&i| tree.tokens[i].text.as_str()) == Some("::") {
                            let id = sig.get(*pos + 1)?;
                            if tree.tokens[*id].kind != TokenKind::Identifier {
                                return None;
                            }
                            let inner = args
                                .iter()
                                .map(|a| a.text())
                                .collect::<Vec<_>>()
                                .join(", ");
                            let sep = if inner.ends_with('>') { " " } else { "" };
                            name = format!("{}<{}{}>::{}", name, inner, sep, tree.tokens[*id].text);
                            args = Vec::new();
                            *pos += 2;
                        }
                        break;
                    }
                    _ => break,
                }
            }
            finish_named_base(name, args)
        }
        _ => return None,
    };
    // `const` may trail the base as well.
    if sig.get(*pos).map(|&i| tree.tokens[i].text.as_str()) == Some("const") {
        is_const = true;
        *pos += 1;
    }
    if is_const {
        base = TypeRepr::const_(base);
    }
    // Declarator suffixes within the type range.
    while let Some(&i) = sig.get(*pos) {
        match tree.tokens[i].text.as_str() {
            "*" => {
                base = TypeRepr::pointer(base);
                *pos += 1;
            }
            "&" => {
                base = TypeRepr::reference(base);
                *pos += 1;
            }
            _ => break,
        }
    }
    Some(base)
}

fn finish_named_base(name: String, args: Vec<TypeRepr>) -> TypeRepr {
    TypeRepr::Named { name, args }
}

fn finish_named(name: String, args: Vec<TypeRepr>, is_const: bool) -> TypeRepr {
    let base = finish_named_base(name, args);
    if is_const {
        TypeRepr::const_(base)
    } else {
        base
    }
}

/// Type of a declared parameter.
pub fn param_type(tree: &SyntaxTree, p: &Param) -> Option<TypeRepr> {
    let mut ty = type_from_tokens(tree, p.type_toks)?;
    for _ in 0..p.stars {
        ty = TypeRepr::pointer(ty);
    }
    if p.is_ref {
        ty = TypeRepr::reference(ty);
    }
    Some(ty)
}

/// Declared type of a function as a value: function(params, return).
pub fn function_type(tree: &SyntaxTree, f: &FunctionDecl) -> Option<TypeRepr> {
    let ret = if f.auto_ret {
        deduce_trailing_return(tree, f).ok()?
    } else {
        type_from_tokens(tree, f.ret_toks)?
    };
    let params = f
        .params
        .iter()
        .map(|p| param_type(tree, p))
        .collect::<Option<Vec<_>>>()?;
    Some(TypeRepr::Function { params, ret: Box::new(ret) })
}

// ---------------------------------------------------------------------------
// Expression typing

/// Type of a restricted expression: literals, identifiers, address-of,
/// dereference, `new T(...)`, calls to known functions, parenthesization.
pub fn type_of_expr(
    tree: &SyntaxTree,
    toks: (usize, usize),
    scope: &Scope,
) -> Result<TypeRepr, SemanticError> {
    let sig: Vec<usize> = (toks.0..=toks.1)
        .filter(|&i| tree.tokens[i].is_significant())
        .collect();
    let line = tree.tokens[toks.0].line;
    if sig.is_empty() {
        return Err(SemanticError::UnsupportedExpression { line });
    }
    let mut pos = 0usize;
    let ty = binary_at(tree, &sig, &mut pos, scope)?;
    if pos != sig.len() {
        return Err(SemanticError::UnsupportedExpression { line });
    }
    Ok(ty)
}

/// Full expression level: unary operands joined by binary operators and
/// the conditional operator. Precedence is irrelevant for typing because
/// arithmetic combination ranks types and comparisons yield bool.
fn binary_at(
    tree: &SyntaxTree,
    sig: &[usize],
    pos: &mut usize,
    scope: &Scope,
) -> Result<TypeRepr, SemanticError> {
    let mut lhs = expr_at(tree, sig, pos, scope)?;
    loop {
        let Some(&i) = sig.get(*pos) else { break };
        let t = &tree.tokens[i];
        if t.kind != TokenKind::Punct {
            break;
        }
        match t.text.as_str() {
            "+" | "-" | "*" | "/" | "%" | "&" | "|" | "^" | "<<" | ">>" => {
                *pos += 1;
                let rhs = expr_at(tree, sig, pos, scope)?;
                lhs = arith_combine(&lhs, &rhs);
            }
            "<" | ">" | "<=" | ">=" | "==" | "!=" | "&&" | "||" => {
                *pos += 1;
                expr_at(tree, sig, pos, scope)?;
                lhs = TypeRepr::fundamental("bool");
            }
            "?" => {
                *pos += 1;
                let then_ty = binary_at(tree, sig, pos, scope)?;
                match sig.get(*pos).map(|&j| tree.tokens[j].text.as_str()) {
                    Some(":") => *pos += 1,
                    _ => return Err(SemanticError::UnsupportedExpression { line: t.line }),
                }
                binary_at(tree, sig, pos, scope)?;
                lhs = then_ty.decay();
            }
            _ => break,
        }
    }
    Ok(lhs)
}

/// Usual arithmetic conversions, approximated by a rank order; pointer
/// arithmetic keeps the pointer side, pointer difference is long.
fn arith_combine(lhs: &TypeRepr, rhs: &TypeRepr) -> TypeRepr {
    let l = lhs.clone().decay().strip_const();
    let r = rhs.clone().decay().strip_const();
    let lp = matches!(l, TypeRepr::Pointer(_));
    let rp = matches!(r, TypeRepr::Pointer(_));
    if lp && rp {
        return TypeRepr::fundamental("long");
    }
    if lp {
        return l;
    }
    if rp {
        return r;
    }
    let rank = |t: &TypeRepr| match t.text().as_str() {
        "long double" => 8,
        "double" => 7,
        "float" => 6,
        "unsigned long" => 5,
        "long" => 4,
        "unsigned" | "unsigned int" => 3,
        "int" | "short" | "char" | "bool" | "unsigned short" | "unsigned char" => 2,
        _ => 9,
    };
    let (lr, rr) = (rank(&l), rank(&r));
    // Class operands (rank 9) keep the left-hand side, matching the
    // common operator-overload pattern of returning the class type.
    let winner = if lr >= rr { l } else { r };
    if rank(&winner) == 2 {
        TypeRepr::fundamental("int")
    } else {
        winner
    }
}

fn expr_at(
    tree: &SyntaxTree,
    sig: &[usize],
    pos: &mut usize,
    scope: &Scope,
) -> Result<TypeRepr, SemanticError> {
    let i = *sig
        .get(*pos)
        .ok_or(SemanticError::UnsupportedExpression { line: 0 })?;
    let t = &tree.tokens[i];
    let line = t.line;
    match (t.kind, t.text.as_str()) {
        (TokenKind::Punct, "&") => {
            *pos += 1;
            let inner = expr_at(tree, sig, pos, scope)?;
            Ok(TypeRepr::pointer(inner.deref_ref()))
        }
        (TokenKind::Punct, "*") => {
            *pos += 1;
            let inner = expr_at(tree, sig, pos, scope)?.deref_ref().strip_const();
            match inner {
                TypeRepr::Pointer(p) => Ok(TypeRepr::reference(*p)),
                TypeRepr::Array { elem, .. } => Ok(TypeRepr::reference(*elem)),
                _ => Err(SemanticError::UnsupportedExpression { line }),
            }
        }
        (TokenKind::Punct, "(") => {
            *pos += 1;
            let inner = binary_at(tree, sig, pos, scope)?;
            match sig.get(*pos).map(|&j| tree.tokens[j].text.as_str()) {
                Some(")") => {
                    *pos += 1;
                    Ok(inner)
                }
                _ => Err(SemanticError::UnsupportedExpression { line }),
            }
        }
        (TokenKind::Punct, "-" | "+") => {
            *pos += 1;
            let inner = expr_at(tree, sig, pos, scope)?;
            Ok(arith_combine(&inner, &TypeRepr::fundamental("int")))
        }
        (TokenKind::Punct, "!") => {
            *pos += 1;
            expr_at(tree, sig, pos, scope)?;
            Ok(TypeRepr::fundamental("bool"))
        }
        (TokenKind::Punct, "~") => {
            *pos += 1;
            expr_at(tree, sig, pos, scope)?;
            Ok(TypeRepr::fundamental("int"))
        }
        (TokenKind::Keyword, "new") => {
            *pos += 1;
            // `new T(args)` / `new T`: parse the type, skip the args.
            let ty = parse_type_at(tree, sig, pos)
                .ok_or(SemanticError::UnsupportedExpression { line })?;
            if sig.get(*pos).map(|&j| tree.tokens[j].text.as_str()) == Some("(") {
                skip_balanced(tree, sig, pos, "(", ")")?;
            }
            Ok(TypeRepr::pointer(ty))
        }
        (TokenKind::Keyword, "true" | "false") => {
            *pos += 1;
            Ok(TypeRepr::fundamental("bool"))
        }
        (TokenKind::Literal, _) => {
            *pos += 1;
            Ok(literal_type(&t.text))
        }
        (TokenKind::Identifier, _) => {
            // Qualified name, then optional call.
            let mut name = t.text.clone();
            *pos += 1;
            while sig.get(*pos).map(|&j| tree.tokens[j].text.as_str()) == Some("::") {
                let id = sig
                    .get(*pos + 1)
                    .ok_or(SemanticError::UnsupportedExpression { line })?;
                name.push_str("::");
                name.push_str(&tree.tokens[*id].text);
                *pos += 2;
            }
            let ty = scope
                .lookup(&name)
                .cloned()
                .ok_or(SemanticError::UnresolvedIdentifier { name: name.clone(), line })?;
            if sig.get(*pos).map(|&j| tree.tokens[j].text.as_str()) == Some("(") {
                skip_balanced(tree, sig, pos, "(", ")")?;
                match ty {
                    TypeRepr::Function { ret, .. } => Ok(*ret),
                    _ => Err(SemanticError::UnsupportedExpression { line }),
                }
            } else {
                Ok(ty)
            }
        }
        _ => Err(SemanticError::UnsupportedExpression { line }),
    }
}

fn skip_balanced(
    tree: &SyntaxTree,
    sig: &[usize],
    pos: &mut usize,
    open: &str,
    close: &str,
) -> Result<(), SemanticError> {
    let line = tree.tokens[sig[*pos]].line;
    let mut depth = 0i32;
    while let Some(&i) = sig.get(*pos) {
        let txt = tree.tokens[i].text.as_str();
        if txt == open {
            depth += 1;
        } else if txt == close {
            depth -= 1;
            if depth == 0 {
                *pos += 1;
                return Ok(());
            }
        }
        *pos += 1;
    }
    Err(SemanticError::UnsupportedExpression { line })
}

fn literal_type(text: &str) -> TypeRepr {
    if text.starts_with('"') {
        // Array of const char including the terminator.
        let body = &text[1..text.len().saturating_sub(1)];
        let extent = unescaped_len(body) as u64 + 1;
        return TypeRepr::Array {
            elem: Box::new(TypeRepr::const_(TypeRepr::fundamental("char"))),
            extent,
        };
    }
    if text.starts_with('\'') {
        return TypeRepr::fundamental("char");
    }
    let lower = text.to_ascii_lowercase();
    if lower.ends_with('f') && lower.contains('.') {
        return TypeRepr::fundamental("float");
    }
    if lower.contains('.') || (lower.contains('e') && !lower.starts_with("0x")) {
        return TypeRepr::fundamental("double");
    }
    if lower.ends_with("ul") || lower.ends_with("lu") {
        return TypeRepr::fundamental("unsigned long");
    }
    if lower.ends_with('u') {
        return TypeRepr::fundamental("unsigned");
    }
    if lower.ends_with('l') {
        return TypeRepr::fundamental("long");
    }
    TypeRepr::fundamental("int")
}

fn unescaped_len(body: &str) -> usize {
    let mut n = 0usize;
    let mut chars = body.chars();
    while let Some(c) = chars.next() {
        if c == '\\' {
            chars.next();
        }
        n += 1;
    }
    n
}

// ---------------------------------------------------------------------------
// Auto deduction

/// The declarator shape next to `auto`.
#[derive(Debug, Clone, Copy, Default)]
pub struct AutoShape {
    pub stars: u32,
    pub is_ref: bool,
    pub is_const: bool,
}

/// Deduce the full declared type of a variable from its shape and the
/// initializer type, following template-argument deduction.
pub fn deduce_auto(shape: AutoShape, init: &TypeRepr, line: u32) -> Result<TypeRepr, SemanticError> {
    let binding = auto_binding(shape, init, line)?;
    let mut ty = binding;
    for _ in 0..shape.stars {
        ty = TypeRepr::pointer(ty);
    }
    if shape.is_const {
        ty = match ty {
            TypeRepr::Pointer(_) => TypeRepr::const_(ty),
            other => TypeRepr::const_(other),
        };
    }
    if shape.is_ref {
        ty = TypeRepr::reference(ty);
    }
    Ok(ty)
}

/// The type bound to the `auto` placeholder itself; this is what replaces
/// the `auto` token in the source text.
pub fn auto_binding(
    shape: AutoShape,
    init: &TypeRepr,
    line: u32,
) -> Result<TypeRepr, SemanticError> {
    if shape.is_ref {
        // auto& / const auto&: bind to the initializer without decay,
        // keeping its const.
        let t = init.clone().deref_ref();
        let t = if shape.is_const { t.strip_const() } else { t };
        return Ok(t);
    }
    let mut t = init.clone().decay();
    for _ in 0..shape.stars {
        t = match t {
            TypeRepr::Pointer(p) => *p,
            _ => return Err(SemanticError::DeductionMismatch { line }),
        };
    }
    if shape.is_const {
        t = t.strip_const();
    }
    Ok(t)
}

// ---------------------------------------------------------------------------
// Trailing return deduction

/// Return type for `auto f(...) -> decltype(param)` or `auto f(...) -> T`.
pub fn deduce_trailing_return(
    tree: &SyntaxTree,
    f: &FunctionDecl,
) -> Result<TypeRepr, SemanticError> {
    let line = tree.tokens[f.name_tok].line;
    let trailing = f
        .trailing
        .as_ref()
        .ok_or(SemanticError::UnsupportedDecltypeOperand { line })?;
    match &trailing.kind {
        TrailingKind::DecltypeParam { name } => {
            let p = f
                .params
                .iter()
                .find(|p| p.name.as_deref() == Some(name.as_str()))
                .ok_or(SemanticError::UnsupportedDecltypeOperand { line })?;
            param_type(tree, p).ok_or(SemanticError::UnsupportedDecltypeOperand { line })
        }
        TrailingKind::Named { toks } => {
            type_from_tokens(tree, *toks)
                .ok_or(SemanticError::UnsupportedDecltypeOperand { line })
        }
    }
}

// ---------------------------------------------------------------------------
// Range-for lowering support

#[derive(Debug, Clone)]
pub struct IterationPlan {
    /// Expression text for the begin iterator initializer.
    pub begin: String,
    /// Expression text for the end iterator initializer.
    pub end: String,
    pub iter_type: TypeRepr,
}

/// Element type and iteration plan for a range expression.
pub fn range_element_type(
    tree: &SyntaxTree,
    range_toks: (usize, usize),
    scope: &Scope,
    ctx: &TypeContext,
) -> Result<(TypeRepr, IterationPlan), SemanticError> {
    let line = tree.tokens[range_toks.0].line;
    let expr_text = tree.sig_text(range_toks);
    let range_ty = type_of_expr(tree, range_toks, scope)?;
    let range_ty = ctx.resolve(range_ty.deref_ref());

    if let TypeRepr::Array { elem, extent } = &range_ty {
        return Ok((
            (**elem).clone(),
            IterationPlan {
                begin: format!("({})", expr_text),
                end: format!("({})+{}", expr_text, extent),
                iter_type: TypeRepr::pointer((**elem).clone()),
            },
        ));
    }

    if let TypeRepr::Named { name, args } = &range_ty {
        // Member begin()/end() on a known class.
        let base_name = name.split('<').next().unwrap_or(name);
        if let Some(info) = ctx.classes.get(base_name).or_else(|| ctx.classes.get(name.as_str())) {
            if let (Some(begin_ret), Some(_)) = (&info.begin_ret, &info.end_ret) {
                let elem = element_from_iterator(begin_ret, args)
                    .ok_or(SemanticError::NoRangeProtocol { line })?;
                return Ok((
                    elem,
                    IterationPlan {
                        begin: format!("({}).begin()", expr_text),
                        end: format!("({}).end()", expr_text),
                        iter_type: begin_ret.clone(),
                    },
                ));
            }
        }
        // Free begin(x)/end(x) declared in scope.
        if let (Some(TypeRepr::Function { ret: bret, .. }), Some(TypeRepr::Function { .. })) =
            (scope.lookup("begin"), scope.lookup("end"))
        {
            let elem = element_from_iterator(bret, args)
                .ok_or(SemanticError::NoRangeProtocol { line })?;
            return Ok((
                elem,
                IterationPlan {
                    begin: format!("begin({})", expr_text),
                    end: format!("end({})", expr_text),
                    iter_type: (**bret).clone(),
                },
            ));
        }
    }

    Err(SemanticError::NoRangeProtocol { line })
}

/// Element type reachable through an iterator: pointee for pointer
/// iterators, otherwise the container's first template argument.
fn element_from_iterator(iter: &TypeRepr, container_args: &[TypeRepr]) -> Option<TypeRepr> {
    match iter {
        TypeRepr::Pointer(p) => Some((**p).clone()),
        _ => container_args.first().cloned(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse, tokenize};

    fn tree_of(src: &str) -> SyntaxTree {
        parse(tokenize(src.as_bytes()).tokens).expect("parse")
    }

    #[test]
    fn render_fundamentals_and_pointers() {
        assert_eq!(TypeRepr::fundamental("int").render("a"), "int a");
        let pp = TypeRepr::pointer(TypeRepr::pointer(TypeRepr::fundamental("int")));
        assert_eq!(pp.render("b"), "int **b");
        assert_eq!(TypeRepr::pointer(TypeRepr::fundamental("int")).text(), "int *");
    }

    #[test]
    fn render_function_pointer() {
        let f = TypeRepr::Function {
            params: vec![TypeRepr::fundamental("int")],
            ret: Box::new(TypeRepr::fundamental("int")),
        };
        assert_eq!(f.render("fp"), "int (*fp)(int)");
    }

    #[test]
    fn render_const_reference() {
        let ty = TypeRepr::reference(TypeRepr::const_(TypeRepr::fundamental("int")));
        assert_eq!(ty.render("y"), "const int &y");
    }

    #[test]
    fn render_nested_template_keeps_space() {
        let vec_t = TypeRepr::Named {
            name: "Vec".into(),
            args: vec![TypeRepr::fundamental("int")],
        };
        let map = TypeRepr::Named {
            name: "std::map".into(),
            args: vec![TypeRepr::fundamental("int"), vec_t],
        };
        assert_eq!(map.text(), "std::map<int, Vec<int> >");
    }

    #[test]
    fn type_of_int_literal() {
        let tree = tree_of("32;\n");
        let scope = Scope::new();
        let toks = (0, 0);
        let ty = type_of_expr(&tree, toks, &scope).unwrap();
        assert_eq!(ty, TypeRepr::fundamental("int"));
    }

    #[test]
    fn type_of_address_of() {
        let tree = tree_of("&a;\n");
        let mut scope = Scope::new();
        scope.bind("a", TypeRepr::fundamental("int"));
        let ty = type_of_expr(&tree, (0, 1), &scope).unwrap();
        assert_eq!(ty, TypeRepr::pointer(TypeRepr::fundamental("int")));
    }

    #[test]
    fn function_name_as_value() {
        let tree = tree_of("foo;\n");
        let mut scope = Scope::new();
        scope.bind(
            "foo",
            TypeRepr::Function {
                params: vec![TypeRepr::fundamental("int")],
                ret: Box::new(TypeRepr::fundamental("int")),
            },
        );
        let ty = type_of_expr(&tree, (0, 0), &scope).unwrap();
        let bound = auto_binding(AutoShape::default(), &ty, 1).unwrap();
        assert_eq!(bound.render("fp"), "int (*fp)(int)");
    }

    #[test]
    fn unresolved_identifier_error() {
        let tree = tree_of("mystery;\n");
        let scope = Scope::new();
        let err = type_of_expr(&tree, (0, 0), &scope).unwrap_err();
        assert!(matches!(err, SemanticError::UnresolvedIdentifier { .. }));
    }

    #[test]
    fn new_auto_shape_deduction() {
        // auto *b = new auto(&a); with a: int gives b: int **
        let inner = TypeRepr::pointer(TypeRepr::fundamental("int"));
        let init = TypeRepr::pointer(inner.clone());
        let shape = AutoShape { stars: 1, ..Default::default() };
        let full = deduce_auto(shape, &init, 1).unwrap();
        assert_eq!(full.render("b"), "int **b");
        let bound = auto_binding(shape, &init, 1).unwrap();
        assert_eq!(bound.text(), "int *");
    }

    #[test]
    fn plain_auto_strips_const_ref() {
        // Deduction oracle: template<class T> void f(T x) called with a
        // `const int&` argument deduces T = int (checked against the
        // template deduction rule; g++ accepts `f<int>` for that call).
        let init = TypeRepr::reference(TypeRepr::const_(TypeRepr::fundamental("int")));
        let bound = auto_binding(AutoShape::default(), &init, 1).unwrap();
        assert_eq!(bound, TypeRepr::fundamental("int"));
    }

    #[test]
    fn auto_ref_keeps_const() {
        let init = TypeRepr::const_(TypeRepr::fundamental("int"));
        let shape = AutoShape { is_ref: true, ..Default::default() };
        let bound = auto_binding(shape, &init, 1).unwrap();
        let full = deduce_auto(shape, &init, 1).unwrap();
        assert_eq!(bound, TypeRepr::const_(TypeRepr::fundamental("int")));
        assert_eq!(full.render("r"), "const int &r");
    }

    #[test]
    fn auto_star_requires_pointer() {
        let shape = AutoShape { stars: 1, ..Default::default() };
        let err = auto_binding(shape, &TypeRepr::fundamental("int"), 3).unwrap_err();
        assert!(matches!(err, SemanticError::DeductionMismatch { line: 3 }));
    }

    #[test]
    fn string_literal_decays_to_const_char_pointer() {
        let lit = literal_type("\"x\"");
        assert!(matches!(lit, TypeRepr::Array { extent: 2, .. }));
        let bound = auto_binding(AutoShape::default(), &lit, 1).unwrap();
        assert_eq!(bound.text(), "const char *");
    }

    #[test]
    fn trailing_return_from_param() {
        let tree = tree_of("auto foo(int a) -> decltype(a) {\n  return a;\n}\n");
        let Item::Function(f) = &tree.items[0] else { panic!() };
        let ty = deduce_trailing_return(&tree, f).unwrap();
        assert_eq!(ty, TypeRepr::fundamental("int"));
    }

    #[test]
    fn range_plan_for_array() {
        let tree = tree_of("array;\n");
        let mut scope = Scope::new();
        scope.bind(
            "array",
            TypeRepr::Array { elem: Box::new(TypeRepr::fundamental("int")), extent: 4 },
        );
        let ctx = TypeContext::default();
        let (elem, plan) = range_element_type(&tree, (0, 0), &scope, &ctx).unwrap();
        assert_eq!(elem, TypeRepr::fundamental("int"));
        assert_eq!(plan.begin, "(array)");
        assert_eq!(plan.end, "(array)+4");
        assert_eq!(plan.iter_type.text(), "int *");
    }

    #[test]
    fn range_plan_for_class_with_begin_end() {
        // Oracle for the lowered form: a hand-written C++03 loop over a
        // vector-like class using the declared iterator compiles and
        // yields the same traversal; the plan must reproduce that shape.
        let src = "class IntVec {\npublic:\n  int * begin();\n  int * end();\n};\n";
        let tree = tree_of(src);
        let ctx = TypeContext::build(&tree);
        let expr_tree = tree_of("v;\n");
        let mut scope = Scope::new();
        scope.bind("v", TypeRepr::named("IntVec"));
        let (elem, plan) = range_element_type(&expr_tree, (0, 0), &scope, &ctx).unwrap();
        assert_eq!(elem, TypeRepr::fundamental("int"));
        assert_eq!(plan.begin, "(v).begin()");
        assert_eq!(plan.end, "(v).end()");
        assert_eq!(plan.iter_type.text(), "int *");
    }

    #[test]
    fn alias_resolution_in_context() {
        let tree = tree_of("using ul = unsigned long;\n");
        let ctx = TypeContext::build(&tree);
        let resolved = ctx.resolve(TypeRepr::named("ul"));
        assert_eq!(resolved, TypeRepr::fundamental("unsigned long"));
    }

    #[test]
    fn type_from_tokens_roundtrip_is_fixpoint() {
        for src in ["int", "unsigned long", "std::vector<int>", "int *", "const char *"] {
            let text = format!("{} x;\n", src);
            let tree = tree_of(&text);
            let Item::Var(v) = &tree.items[0] else { panic!("{}", src) };
            let mut ty = type_from_tokens(&tree, v.base_toks).unwrap();
            for _ in 0..v.declarators[0].stars {
                ty = TypeRepr::pointer(ty);
            }
            let rendered = ty.text();
            let tree2 = tree_of(&format!("{} y;\n", rendered));
            let Item::Var(v2) = &tree2.items[0] else { panic!("{}", rendered) };
            let mut ty2 = type_from_tokens(&tree2, v2.base_toks).unwrap();
            for _ in 0..v2.declarators[0].stars {
                ty2 = TypeRepr::pointer(ty2);
            }
            assert_eq!(ty, ty2, "fixpoint failed for {}", src);
        }
    }
}
