//! The transformation catalog and its phase driver.
//!
//! Each pass is a pure function from a syntax tree to a set of span edits
//! plus warnings. The driver applies phases in a fixed order, rewriting
//! and re-parsing the unit text between phases.

pub mod attributes;
pub mod auto_type;
pub mod delegation;
pub mod final_override;
pub mod lambda;
pub mod member_init;
pub mod range_for;
pub mod type_alias;

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use crate::semantics::{self, Scope, TypeContext, TypeRepr};
use crate::syntax::edit::{apply_edits, Edit, Feature, SegmentMap};
use crate::syntax::lexer::{tokenize, Token, TokenKind};
use crate::syntax::parser::{self, ClassDecl, Item, Member, Stmt, SyntaxTree};

pub use attributes::strip_attributes;
pub use auto_type::transform_auto;
pub use delegation::inline_delegation;
pub use final_override::strip_final_override;
pub use lambda::transform_lambda;
pub use member_init::transform_member_init;
pub use range_for::lower_range_for;
pub use type_alias::rewrite_type_alias;

/// The set of C++11 features present in a unit.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FeatureSet {
    flags: BTreeSet<Feature>,
}

impl FeatureSet {
    pub fn insert(&mut self, f: Feature) {
        self.flags.insert(f);
    }

    pub fn contains(&self, f: Feature) -> bool {
        self.flags.contains(&f)
    }

    pub fn is_empty(&self) -> bool {
        self.flags.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = Feature> + '_ {
        self.flags.iter().copied()
    }
}

#[derive(Debug, Clone)]
pub struct Warning {
    pub line: u32,
    pub reason: String,
}

impl Warning {
    pub fn new(line: u32, reason: impl Into<String>) -> Self {
        Warning { line, reason: reason.into() }
    }
}

/// Output of a single transformation pass.
#[derive(Debug, Default)]
pub struct TransformResult {
    pub edits: Vec<Edit>,
    pub warnings: Vec<Warning>,
    pub untransformable: bool,
}

impl TransformResult {
    pub fn warn(&mut self, line: u32, reason: impl Into<String>) {
        self.warnings.push(Warning::new(line, reason));
    }
}

// ---------------------------------------------------------------------------
// Token helpers shared by the passes

pub(crate) fn next_sig(tokens: &[Token], i: usize) -> Option<usize> {
    ((i + 1)..tokens.len()).find(|&j| tokens[j].is_significant())
}

pub(crate) fn prev_sig(tokens: &[Token], i: usize) -> Option<usize> {
    (0..i).rev().find(|&j| tokens[j].is_significant())
}

/// Matching close bracket for `(`, `{` or `[` at `i`.
pub(crate) fn matching_tok(tokens: &[Token], i: usize) -> Option<usize> {
    let close = match tokens[i].text.as_str() {
        "(" => ")",
        "{" => "}",
        "[" => "]",
        _ => return None,
    };
    let open = tokens[i].text.as_str();
    let mut depth = 0i32;
    for (j, t) in tokens.iter().enumerate().skip(i) {
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

/// Byte offset where the whitespace run immediately before token `i`
/// starts; the token's own offset if there is none.
pub(crate) fn ws_run_start(tokens: &[Token], i: usize) -> usize {
    let mut j = i;
    while j > 0 && tokens[j - 1].kind == TokenKind::Whitespace {
        j -= 1;
    }
    tokens[j].offset
}

/// Byte offset where the whitespace run immediately after token `i` ends;
/// the token's own end if there is none.
pub(crate) fn ws_run_end(tokens: &[Token], i: usize) -> usize {
    let mut j = i;
    while j + 1 < tokens.len() && tokens[j + 1].kind == TokenKind::Whitespace {
        j += 1;
    }
    tokens[j].end()
}

/// True when the `[` at `i` introduces a lambda.
pub(crate) fn is_lambda_intro(tokens: &[Token], i: usize) -> bool {
    let t = &tokens[i];
    if t.kind != TokenKind::Punct || t.text != "[" {
        return false;
    }
    if let Some(p) = prev_sig(tokens, i) {
        let pt = &tokens[p];
        if pt.kind == TokenKind::Identifier
            || pt.kind == TokenKind::Literal
            || pt.is(")")
            || pt.is("]")
            || pt.is("this")
        {
            return false;
        }
    }
    let close = match matching_tok(tokens, i) {
        Some(c) => c,
        None => return false,
    };
    match next_sig(tokens, close) {
        Some(n) => tokens[n].is("(") || tokens[n].is("{"),
        None => false,
    }
}

// ---------------------------------------------------------------------------
// Tree walking helpers

/// All class declarations in the unit, with a flag for template context.
pub(crate) fn collect_classes(tree: &SyntaxTree) -> Vec<(&ClassDecl, bool)> {
    let mut out = Vec::new();
    fn visit_items<'a>(items: &'a [Item], out: &mut Vec<(&'a ClassDecl, bool)>) {
        for item in items {
            match item {
                Item::Class(c) => {
                    out.push((c, c.is_template));
                    visit_class(c, out);
                }
                Item::Namespace { items, .. } => visit_items(items, out),
                Item::Function(f) => {
                    if let Some(b) = f.body.as_deref() {
                        visit_stmt(b, f.is_template, out);
                    }
                }
                _ => {}
            }
        }
    }
    fn visit_class<'a>(c: &'a ClassDecl, out: &mut Vec<(&'a ClassDecl, bool)>) {
        for m in &c.members {
            let body = match m {
                Member::Ctor(ct) => ct.body.as_deref(),
                Member::Method(md) => md.body.as_deref(),
                _ => None,
            };
            if let Some(b) = body {
                visit_stmt(b, c.is_template, out);
            }
        }
    }
    fn visit_stmt<'a>(s: &'a Stmt, in_template: bool, out: &mut Vec<(&'a ClassDecl, bool)>) {
        match s {
            Stmt::Compound { stmts, .. } => {
                for st in stmts {
                    visit_stmt(st, in_template, out);
                }
            }
            Stmt::LocalClass(c) => {
                out.push((c, in_template || c.is_template));
                visit_class(c, out);
            }
            Stmt::RangeFor(r) => visit_stmt(&r.body, in_template, out),
            Stmt::For { body, .. } => visit_stmt(body, in_template, out),
            Stmt::Control { body, else_body, .. } => {
                visit_stmt(body, in_template, out);
                if let Some(e) = else_body {
                    visit_stmt(e, in_template, out);
                }
            }
            _ => {}
        }
    }
    visit_items(&tree.items, &mut out);
    out
}

/// Visit every statement in every function, method, and constructor body.
pub(crate) fn for_each_stmt<'a>(tree: &'a SyntaxTree, f: &mut impl FnMut(&'a Stmt)) {
    fn visit_stmt<'a>(s: &'a Stmt, f: &mut impl FnMut(&'a Stmt)) {
        f(s);
        match s {
            Stmt::Compound { stmts, .. } => {
                for st in stmts {
                    visit_stmt(st, f);
                }
            }
            Stmt::RangeFor(r) => visit_stmt(&r.body, f),
            Stmt::For { body, .. } => visit_stmt(body, f),
            Stmt::Control { body, else_body, .. } => {
                visit_stmt(body, f);
                if let Some(e) = else_body {
                    visit_stmt(e, f);
                }
            }
            Stmt::LocalClass(c) => {
                for m in &c.members {
                    let body = match m {
                        Member::Ctor(ct) => ct.body.as_deref(),
                        Member::Method(md) => md.body.as_deref(),
                        _ => None,
                    };
                    if let Some(b) = body {
                        visit_stmt(b, f);
                    }
                }
            }
            _ => {}
        }
    }
    fn visit_items<'a>(items: &'a [Item], f: &mut impl FnMut(&'a Stmt)) {
        for item in items {
            match item {
                Item::TopStmt(s) => visit_stmt(s, f),
                Item::Function(fun) => {
                    if let Some(b) = fun.body.as_deref() {
                        visit_stmt(b, f);
                    }
                }
                Item::Class(c) => {
                    for m in &c.members {
                        let body = match m {
                            Member::Ctor(ct) => ct.body.as_deref(),
                            Member::Method(md) => md.body.as_deref(),
                            _ => None,
                        };
                        if let Some(b) = body {
                            visit_stmt(b, f);
                        }
                    }
                }
                Item::Namespace { items, .. } => visit_items(items, f),
                _ => {}
            }
        }
    }
    visit_items(&tree.items, f);
}

/// Integer extent of a `[N]` array declarator part.
pub(crate) fn array_extent(tree: &SyntaxTree, toks: (usize, usize)) -> Option<u64> {
    let inner: Vec<&Token> = tree.tokens[toks.0 + 1..toks.1]
        .iter()
        .filter(|t| t.is_significant())
        .collect();
    match inner.as_slice() {
        [t] if t.kind == TokenKind::Literal => t.text.parse().ok(),
        [] => Some(0),
        _ => None,
    }
}

/// Declared type of one declarator of a (non-auto) variable declaration.
pub(crate) fn declared_var_type(
    tree: &SyntaxTree,
    v: &parser::VarDecl,
    d: &parser::VarDeclarator,
) -> Option<TypeRepr> {
    let mut ty = semantics::type_from_tokens(tree, v.base_toks)?;
    for _ in 0..d.stars {
        ty = TypeRepr::pointer(ty);
    }
    if let Some(arr) = d.array_toks {
        let extent = array_extent(tree, arr).or_else(|| {
            // Extent inferred from a braced initializer list.
            d.init.as_ref().and_then(|init| {
                if init.kind == parser::InitKind::Brace {
                    Some(count_top_level_commas(tree, init.expr_toks) + 1)
                } else {
                    None
                }
            })
        })?;
        ty = TypeRepr::Array { elem: Box::new(ty), extent };
    }
    if d.is_ref {
        ty = TypeRepr::reference(ty);
    }
    Some(ty)
}

pub(crate) fn count_top_level_commas(tree: &SyntaxTree, toks: (usize, usize)) -> u64 {
    let mut depth = 0i32;
    let mut commas = 0u64;
    for t in &tree.tokens[toks.0..=toks.1] {
        if t.kind != TokenKind::Punct {
            continue;
        }
        match t.text.as_str() {
            "(" | "[" | "{" => depth += 1,
            ")" | "]" | "}" => depth -= 1,
            "," if depth == 0 => commas += 1,
            _ => {}
        }
    }
    commas
}

/// Scope with the unit's global declarations (functions and variables),
/// in declaration order. Later transforms extend it per function.
pub(crate) fn global_scope(tree: &SyntaxTree, ctx: &TypeContext) -> Scope {
    let mut scope = Scope::new();
    bind_items(tree, &tree.items, ctx, &mut scope);
    scope
}

fn bind_items(tree: &SyntaxTree, items: &[Item], ctx: &TypeContext, scope: &mut Scope) {
    for item in items {
        match item {
            Item::Function(f) => {
                if let Some(ty) = semantics::function_type(tree, f) {
                    scope.bind(&f.name, ty);
                }
            }
            Item::Var(v) => {
                for d in &v.declarators {
                    if v.is_auto {
                        if let Some(ty) = auto_type::deduced_var_type(tree, v, d, scope, ctx) {
                            scope.bind(&d.name, ty);
                        }
                    } else if let Some(ty) = declared_var_type(tree, v, d) {
                        scope.bind(&d.name, ctx.resolve(ty));
                    }
                }
            }
            Item::Namespace { items, .. } => bind_items(tree, items, ctx, scope),
            _ => {}
        }
    }
}

// ---------------------------------------------------------------------------
// Feature finder

/// Purely syntactic detection of the eight features.
pub fn find_features(tree: &SyntaxTree) -> FeatureSet {
    let mut set = FeatureSet::default();
    for (i, t) in tree.tokens.iter().enumerate() {
        match (t.kind, t.text.as_str()) {
            (TokenKind::Keyword, "auto") => set.insert(Feature::Auto),
            (TokenKind::Punct, "[[") => set.insert(Feature::Attribute),
            (TokenKind::Punct, "[") => {
                if is_lambda_intro(&tree.tokens, i) {
                    set.insert(Feature::Lambda);
                }
            }
            _ => {}
        }
    }
    for (class, _) in collect_classes(tree) {
        if class.final_tok.is_some() {
            set.insert(Feature::FinalOverride);
        }
        for m in &class.members {
            match m {
                Member::Field(fd) => {
                    if fd.declarators.iter().any(|d| d.init.is_some()) {
                        set.insert(Feature::MemberInit);
                    }
                }
                Member::Method(md) => {
                    if !md.modifier_toks.is_empty() {
                        set.insert(Feature::FinalOverride);
                    }
                }
                Member::Ctor(ct) => {
                    if ct.inits.len() == 1 && ct.inits[0].name == class.name {
                        set.insert(Feature::CtorDelegation);
                    }
                }
                _ => {}
            }
        }
    }
    fn aliases_in(items: &[Item], set: &mut FeatureSet) {
        for item in items {
            match item {
                Item::UsingAlias(_) => set.insert(Feature::TypeAlias),
                Item::Namespace { items, .. } => aliases_in(items, set),
                _ => {}
            }
        }
    }
    aliases_in(&tree.items, &mut set);
    for_each_stmt(tree, &mut |s| {
        if matches!(s, Stmt::RangeFor(_)) {
            set.insert(Feature::RangeFor);
        }
    });
    set
}

// ---------------------------------------------------------------------------
// Syntax check and phase driver

/// Post-transform validation: the text must lex, parse, and contain no
/// remaining feature markers.
pub fn check_syntax(text: &[u8]) -> Vec<String> {
    let mut diags = Vec::new();
    let out = tokenize(text);
    for e in &out.errors {
        diags.push(format!("lex error: {}", e));
    }
    match parser::parse(out.tokens) {
        Err(e) => diags.push(format!("parse error: {}", e)),
        Ok(tree) => {
            for f in find_features(&tree).iter() {
                diags.push(format!("feature marker remains: {}", f.name()));
            }
        }
    }
    diags
}

#[derive(Debug, Clone)]
pub struct PhaseRecord {
    pub phase: &'static str,
    pub edits: usize,
    pub millis: u128,
}

/// Result of running all phases over one unit's text.
#[derive(Debug)]
pub struct UnitOutcome {
    pub text: Vec<u8>,
    pub phases: Vec<PhaseRecord>,
    pub warnings: Vec<Warning>,
    pub diagnostics: Vec<String>,
    pub untransformable: bool,
    /// One segment map per applied edit batch, in application order.
    pub maps: Vec<SegmentMap>,
    /// Applied edits per feature, across all phases.
    pub feature_edits: BTreeMap<Feature, usize>,
}

pub const PHASE_FEATURE_FINDER: &str = "FeatureFinder";
pub const PHASE_REPLACE_LAMBDA: &str = "ReplaceLambda";
pub const PHASE_MULTIPLE: &str = "MultipleTransforms";
pub const PHASE_AUTO_DELEGATION: &str = "RemoveAutoDelegation";
pub const PHASE_SYNTAX_CHECK: &str = "Syntax check";

const LAMBDA_FIXPOINT_CAP: usize = 10;

/// Execute the phase pipeline over one translation unit.
pub fn run_phases(src: &[u8]) -> UnitOutcome {
    let mut outcome = UnitOutcome {
        text: src.to_vec(),
        phases: Vec::new(),
        warnings: Vec::new(),
        diagnostics: Vec::new(),
        untransformable: false,
        maps: Vec::new(),
        feature_edits: BTreeMap::new(),
    };

    let started = Instant::now();
    let mut tree = match parse_text(&outcome.text) {
        Ok(t) => t,
        Err(d) => {
            outcome.diagnostics.push(d);
            outcome.untransformable = true;
            return outcome;
        }
    };
    let features = find_features(&tree);
    outcome.phases.push(PhaseRecord {
        phase: PHASE_FEATURE_FINDER,
        edits: 0,
        millis: started.elapsed().as_millis(),
    });

    if features.contains(Feature::Lambda) {
        for _ in 0..LAMBDA_FIXPOINT_CAP {
            let started = Instant::now();
            let ctx = TypeContext::build(&tree);
            let r = transform_lambda(&tree, &ctx);
            let n = r.edits.len();
            if !apply_batch(&mut outcome, &mut tree, r, PHASE_REPLACE_LAMBDA, started) {
                return outcome;
            }
            if n == 0 {
                break;
            }
        }
    }

    let multiple: &[(Feature, fn(&SyntaxTree, &TypeContext) -> TransformResult)] = &[
        (Feature::Attribute, |t, _| strip_attributes(t)),
        (Feature::FinalOverride, |t, _| strip_final_override(t)),
        (Feature::RangeFor, lower_range_for),
        (Feature::TypeAlias, |t, _| rewrite_type_alias(t)),
        (Feature::MemberInit, |t, _| transform_member_init(t)),
    ];
    if multiple.iter().any(|(f, _)| features.contains(*f)) {
        let started = Instant::now();
        let ctx = TypeContext::build(&tree);
        let mut combined = TransformResult::default();
        for (f, pass) in multiple {
            if features.contains(*f) {
                let r = pass(&tree, &ctx);
                combined.edits.extend(r.edits);
                combined.warnings.extend(r.warnings);
                combined.untransformable |= r.untransformable;
            }
        }
        if !apply_batch(&mut outcome, &mut tree, combined, PHASE_MULTIPLE, started) {
            return outcome;
        }
    }

    if features.contains(Feature::Auto) || features.contains(Feature::CtorDelegation) {
        let started = Instant::now();
        let ctx = TypeContext::build(&tree);
        let mut combined = TransformResult::default();
        if features.contains(Feature::Auto) {
            let r = transform_auto(&tree, &ctx);
            combined.edits.extend(r.edits);
            combined.warnings.extend(r.warnings);
            combined.untransformable |= r.untransformable;
        }
        if features.contains(Feature::CtorDelegation) {
            let r = inline_delegation(&tree);
            combined.edits.extend(r.edits);
            combined.warnings.extend(r.warnings);
            combined.untransformable |= r.untransformable;
        }
        if !apply_batch(&mut outcome, &mut tree, combined, PHASE_AUTO_DELEGATION, started) {
            return outcome;
        }
    }

    let started = Instant::now();
    let diags = check_syntax(&outcome.text);
    outcome.phases.push(PhaseRecord {
        phase: PHASE_SYNTAX_CHECK,
        edits: 0,
        millis: started.elapsed().as_millis(),
    });
    for d in diags {
        let structural = d.starts_with("lex error") || d.starts_with("parse error");
        // Leftover feature markers are acceptable when a pass explicitly
        // skipped something; structural problems never are.
        if structural || outcome.warnings.is_empty() {
            outcome.untransformable = true;
        }
        outcome.diagnostics.push(d);
    }
    outcome
}

fn parse_text(text: &[u8]) -> Result<SyntaxTree, String> {
    let out = tokenize(text);
    if let Some(e) = out.errors.first() {
        return Err(format!("lex error: {}", e));
    }
    parser::parse(out.tokens).map_err(|e| format!("parse error: {}", e))
}

/// Apply one batch of edits, record the phase, and re-parse.
/// Returns false when the unit became untransformable.
fn apply_batch(
    outcome: &mut UnitOutcome,
    tree: &mut SyntaxTree,
    r: TransformResult,
    phase: &'static str,
    started: Instant,
) -> bool {
    outcome.warnings.extend(r.warnings);
    let n = r.edits.len();
    if r.untransformable {
        outcome.phases.push(PhaseRecord { phase, edits: 0, millis: started.elapsed().as_millis() });
        outcome.untransformable = true;
        return false;
    }
    if n > 0 {
        match apply_edits(&outcome.text, &r.edits) {
            Ok((new_text, map)) => {
                outcome.text = new_text;
                outcome.maps.push(map);
                for e in &r.edits {
                    *outcome.feature_edits.entry(e.feature).or_insert(0) += 1;
                }
            }
            Err(e) => {
                outcome.diagnostics.push(format!("edit application failed: {}", e));
                outcome.untransformable = true;
                outcome.phases.push(PhaseRecord {
                    phase,
                    edits: n,
                    millis: started.elapsed().as_millis(),
                });
                return false;
            }
        }
        match parse_text(&outcome.text) {
            Ok(t) => *tree = t,
            Err(d) => {
                outcome.diagnostics.push(d);
                outcome.untransformable = true;
                outcome.phases.push(PhaseRecord {
                    phase,
                    edits: n,
                    millis: started.elapsed().as_millis(),
                });
                return false;
            }
        }
    }
    outcome.phases.push(PhaseRecord { phase, edits: n, millis: started.elapsed().as_millis() });
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tree_of(src: &str) -> SyntaxTree {
        parser::parse(tokenize(src.as_bytes()).tokens).expect("parse")
    }

    #[test]
    fn features_empty_for_cpp03() {
        let tree = tree_of("int main() {\n  int a = 0;\n  return a;\n}\n");
        assert!(find_features(&tree).is_empty());
    }

    #[test]
    fn detects_lambda_feature() {
        let tree = tree_of(
            "void f() {\n  std::for_each(v.begin(), v.end(), [&inc](int &n) { n += inc; });\n}\n",
        );
        let set = find_features(&tree);
        assert!(set.contains(Feature::Lambda));
        assert!(!set.contains(Feature::Attribute));
    }

    #[test]
    fn detects_delegation_and_member_init_together() {
        let src = "class A {\n  A() {}\n  A(int x) : A() {\n  }\n  int a = 1;\n};\n";
        let tree = tree_of(src);
        let set = find_features(&tree);
        assert!(set.contains(Feature::CtorDelegation));
        assert!(set.contains(Feature::MemberInit));
    }

    #[test]
    fn subscript_is_not_lambda_or_attribute() {
        let tree = tree_of("void f() {\n  a[b[i]] = 0;\n}\n");
        assert!(find_features(&tree).is_empty());
    }

    #[test]
    fn pure_cpp03_unit_runs_only_bookkeeping_phases() {
        let out = run_phases(b"int main() {\n  return 0;\n}\n");
        assert!(!out.untransformable);
        let names: Vec<_> = out.phases.iter().map(|p| p.phase).collect();
        assert_eq!(names, vec![PHASE_FEATURE_FINDER, PHASE_SYNTAX_CHECK]);
        assert!(out.phases.iter().all(|p| p.edits == 0));
    }

    #[test]
    fn check_syntax_reports_leftover_features() {
        let diags = check_syntax(b"auto x = 1;\n");
        assert!(diags.iter().any(|d| d.contains("auto")));
    }
}
