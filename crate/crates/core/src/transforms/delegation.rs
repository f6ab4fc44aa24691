//! Constructor delegation inlined into the calling constructor.
//!
//! The target's initialization list is copied into the caller (ordered by
//! member declaration order) and the target's body is prepended to the
//! caller's body inside its own block.

use std::collections::HashSet;

use crate::syntax::edit::{Edit, Feature};
use crate::syntax::lexer::{tokenize, TokenKind};
use crate::syntax::parser::{ClassDecl, CtorDecl, Member, SyntaxTree};

use super::{collect_classes, next_sig, prev_sig, TransformResult};

pub fn inline_delegation(tree: &SyntaxTree) -> TransformResult {
    let mut result = TransformResult::default();
    for (class, in_template) in collect_classes(tree) {
        transform_class(tree, class, in_template, &mut result);
    }
    result
}

/// A constructor's effective initialization list and body, with the
/// whole delegation chain already folded in.
struct Resolved {
    /// `(member name, argument text)` pairs.
    inits: Vec<(String, String)>,
    /// Body text without the outer braces; empty for `{}`.
    body: String,
}

fn transform_class(
    tree: &SyntaxTree,
    class: &ClassDecl,
    in_template: bool,
    result: &mut TransformResult,
) {
    let ctors: Vec<&CtorDecl> = class
        .members
        .iter()
        .filter_map(|m| match m {
            Member::Ctor(c) => Some(c),
            _ => None,
        })
        .collect();
    let delegating: Vec<&CtorDecl> = ctors
        .iter()
        .copied()
        .filter(|c| is_delegating(c, class))
        .collect();
    if delegating.is_empty() {
        return;
    }
    if in_template {
        for c in &delegating {
            result.warn(
                tree.tokens[c.name_tok].line,
                "constructor delegation in template class left in place",
            );
        }
        return;
    }
    let order = member_order(class);
    for c in delegating {
        let line = tree.tokens[c.name_tok].line;
        let Some(body_toks) = c.body_toks else {
            result.warn(line, "delegating constructor without in-class body");
            continue;
        };
        let entry = &c.inits[0];
        let mut visiting = HashSet::new();
        visiting.insert(c.first_tok);
        let target = match find_target(tree, class, &ctors, c) {
            Ok(t) => t,
            Err(reason) => {
                result.warn(line, reason);
                continue;
            }
        };
        let resolved = match resolve(tree, class, &ctors, target, &mut visiting) {
            Ok(r) => r,
            Err(reason) => {
                if reason.contains("cycle") {
                    result.untransformable = true;
                }
                result.warn(line, reason);
                continue;
            }
        };
        let subst = subst_map(tree, target, c);
        let mut inits: Vec<(String, String)> = resolved
            .inits
            .iter()
            .map(|(n, a)| (n.clone(), subst_text(a, &subst)))
            .collect();
        inits.sort_by_key(|(n, _)| order.iter().position(|o| o == n).unwrap_or(usize::MAX));
        let body = subst_text(&resolved.body, &subst);

        let colon = c.init_colon.expect("delegating constructor has an init list");
        let span = (tree.tokens[colon].offset, tree.tokens[entry.end_tok].end());
        let replacement = if inits.is_empty() {
            String::new()
        } else {
            let list = inits
                .iter()
                .map(|(n, a)| format!("{}({})", n, a))
                .collect::<Vec<_>>()
                .join(", ");
            format!(": {}", list)
        };
        result.edits.push(Edit::new(span, replacement, Feature::CtorDelegation));
        if !body.trim().is_empty() {
            let at = tree.tokens[body_toks.0].end();
            result.edits.push(Edit::new(
                (at, at),
                format!("\n{{ {} }}", body.trim()),
                Feature::CtorDelegation,
            ));
        }
    }
}

fn is_delegating(c: &CtorDecl, class: &ClassDecl) -> bool {
    c.inits.len() == 1 && c.inits[0].name == class.name
}

/// Member names in declaration order, one entry per declarator.
fn member_order(class: &ClassDecl) -> Vec<String> {
    let mut out = Vec::new();
    for m in &class.members {
        if let Member::Field(f) = m {
            for d in &f.declarators {
                out.push(d.name.clone());
            }
        }
    }
    out
}

fn find_target<'a>(
    tree: &SyntaxTree,
    class: &ClassDecl,
    ctors: &[&'a CtorDecl],
    caller: &CtorDecl,
) -> Result<&'a CtorDecl, String> {
    let arity = arg_count(tree, caller.inits[0].args_toks);
    let matches: Vec<&CtorDecl> = ctors
        .iter()
        .copied()
        .filter(|t| t.first_tok != caller.first_tok && t.params.len() == arity)
        .collect();
    match matches.as_slice() {
        [one] => Ok(*one),
        [] => Err(format!(
            "no {}-argument constructor of `{}` to delegate to",
            arity, class.name
        )),
        _ => Err(format!(
            "ambiguous delegation target with {} arguments in `{}`",
            arity, class.name
        )),
    }
}

fn resolve(
    tree: &SyntaxTree,
    class: &ClassDecl,
    ctors: &[&CtorDecl],
    c: &CtorDecl,
    visiting: &mut HashSet<usize>,
) -> Result<Resolved, String> {
    if !visiting.insert(c.first_tok) {
        return Err("constructor delegation cycle".to_string());
    }
    let body_toks = c
        .body_toks
        .ok_or_else(|| "delegation target has no in-class body".to_string())?;
    let own_body = inner_text(tree, body_toks);
    if !is_delegating(c, class) {
        let inits = c
            .inits
            .iter()
            .map(|e| (e.name.clone(), inner_text(tree, e.args_toks)))
            .collect();
        return Ok(Resolved { inits, body: own_body });
    }
    let target = find_target(tree, class, ctors, c)?;
    let inner = resolve(tree, class, ctors, target, visiting)?;
    let subst = subst_map(tree, target, c);
    let inits = inner
        .inits
        .iter()
        .map(|(n, a)| (n.clone(), subst_text(a, &subst)))
        .collect();
    let target_body = subst_text(&inner.body, &subst);
    let body = if target_body.trim().is_empty() {
        own_body
    } else {
        format!("{{ {} }}\n{}", target_body.trim(), own_body)
    };
    Ok(Resolved { inits, body })
}

/// Text between two bracket tokens, excluding the brackets themselves.
fn inner_text(tree: &SyntaxTree, brackets: (usize, usize)) -> String {
    if brackets.1 <= brackets.0 + 1 {
        return String::new();
    }
    tree.text((brackets.0 + 1, brackets.1 - 1)).trim().to_string()
}

fn arg_count(tree: &SyntaxTree, args_toks: (usize, usize)) -> usize {
    let has_any = (args_toks.0 + 1..args_toks.1).any(|i| tree.tokens[i].is_significant());
    if !has_any {
        return 0;
    }
    let mut depth = 0i32;
    let mut commas = 0usize;
    for t in &tree.tokens[args_toks.0 + 1..args_toks.1] {
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
    commas + 1
}

/// Map from target parameter names to the caller's argument texts.
fn subst_map(
    tree: &SyntaxTree,
    target: &CtorDecl,
    caller: &CtorDecl,
) -> Vec<(String, String)> {
    let args = split_args(tree, caller.inits[0].args_toks);
    target
        .params
        .iter()
        .zip(args)
        .filter_map(|(p, a)| p.name.clone().map(|n| (n, a)))
        .collect()
}

fn split_args(tree: &SyntaxTree, args_toks: (usize, usize)) -> Vec<String> {
    let mut out = Vec::new();
    let mut start = next_sig(&tree.tokens, args_toks.0);
    let mut depth = 0i32;
    for i in args_toks.0 + 1..args_toks.1 {
        let t = &tree.tokens[i];
        if t.kind != TokenKind::Punct {
            continue;
        }
        match t.text.as_str() {
            "(" | "[" | "{" => depth += 1,
            ")" | "]" | "}" => depth -= 1,
            "," if depth == 0 => {
                if let (Some(s), Some(e)) = (start, prev_sig(&tree.tokens, i)) {
                    if s <= e {
                        out.push(wrap_arg(tree.sig_text((s, e))));
                    }
                }
                start = next_sig(&tree.tokens, i);
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        if let Some(e) = prev_sig(&tree.tokens, args_toks.1) {
            if s <= e && s < args_toks.1 {
                out.push(wrap_arg(tree.sig_text((s, e))));
            }
        }
    }
    out
}

/// Compound argument expressions are parenthesized before substitution.
fn wrap_arg(text: String) -> String {
    let toks = tokenize(text.as_bytes());
    let sig = toks.tokens.iter().filter(|t| t.is_significant()).count();
    if sig <= 1 {
        text
    } else {
        format!("({})", text)
    }
}

/// Replace identifiers from the map inside a source fragment.
fn subst_text(text: &str, map: &[(String, String)]) -> String {
    if map.is_empty() || text.is_empty() {
        return text.to_string();
    }
    let toks = tokenize(text.as_bytes());
    let mut out = String::new();
    for t in &toks.tokens {
        if t.kind == TokenKind::Identifier {
            if let Some((_, r)) = map.iter().find(|(n, _)| *n == t.text) {
                out.push_str(r);
                continue;
            }
        }
        out.push_str(&t.text);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::edit::apply_edits;
    use crate::syntax::parse;

    fn transformed(src: &str) -> (String, TransformResult) {
        let tree = parse(tokenize(src.as_bytes()).tokens).unwrap();
        let r = inline_delegation(&tree);
        let (out, _) = apply_edits(src.as_bytes(), &r.edits).unwrap();
        (String::from_utf8(out).unwrap(), TransformResult { edits: Vec::new(), ..r })
    }

    fn sig_tokens(src: &str) -> Vec<String> {
        tokenize(src.as_bytes())
            .tokens
            .into_iter()
            .filter(|t| t.is_significant())
            .map(|t| t.text)
            .collect()
    }

    #[test]
    fn caller_receives_sorted_init_list_and_wrapped_body() {
        // The state after the in-class member initializers have already
        // been moved into the constructors.
        let src = "class A {\n  A() : a(1) {}\n  A(string str) : s(str),\n                  a(1) {\n    t = \"hello\";\n  }\n  A(string str, int dbl)\n    : A(str) {\n\n    a = dbl;\n  }\n  int a;\n  string s;\n  string t;\n};\n";
        let (out, r) = transformed(src);
        assert!(r.warnings.is_empty());
        let expected = "class A {\n  A() : a(1) {}\n  A(string str) : s(str),\n                  a(1) {\n    t = \"hello\";\n  }\n  A(string str, int dbl)\n      : a(1), s(str) {\n    { t = \"hello\"; }\n    a = dbl;\n  }\n  int a;\n  string s;\n  string t;\n};\n";
        assert_eq!(sig_tokens(&out), sig_tokens(expected), "output was:\n{}", out);
    }

    #[test]
    fn empty_target_list_removes_callers_list() {
        let src = "class B {\n  B() {}\n  B(int x) : B() {\n    v = x;\n  }\n  int v;\n};\n";
        let (out, r) = transformed(src);
        assert!(r.warnings.is_empty());
        let expected = "class B {\n  B() {}\n  B(int x) {\n    v = x;\n  }\n  int v;\n};\n";
        assert_eq!(sig_tokens(&out), sig_tokens(expected), "output was:\n{}", out);
    }

    #[test]
    fn delegation_chain_is_folded() {
        let src = "class C {\n  C() : a(1) {\n    b = 2;\n  }\n  C(int x) : C() {\n    c = x;\n  }\n  C(int x, int y) : C(x) {\n    d = y;\n  }\n  int a; int b; int c; int d;\n};\n";
        let (out, r) = transformed(src);
        assert!(r.warnings.is_empty(), "warnings: {:?}", r.warnings);
        assert!(out.contains("C(int x) : a(1) {"));
        assert!(out.contains("C(int x, int y) : a(1) {"));
        let chained = out.matches("b = 2;").count();
        assert_eq!(chained, 3);
    }

    #[test]
    fn argument_expressions_are_substituted() {
        let src = "class D {\n  D(int n) : a(n) {\n    b = n;\n  }\n  D() : D(7) {\n  }\n  int a; int b;\n};\n";
        let (out, r) = transformed(src);
        assert!(r.warnings.is_empty());
        assert!(out.contains("D() : a(7) {"));
        assert!(out.contains("{ b = 7; }"));
    }

    #[test]
    fn cycle_is_rejected() {
        let src = "class E {\n  E() : E(1) {\n  }\n  E(int x) : E() {\n  }\n};\n";
        let (_, r) = transformed(src);
        assert!(r.untransformable);
    }

    #[test]
    fn template_class_is_skipped_with_warning() {
        let src = "template<class T>\nclass F {\n  F() {}\n  F(T t) : F() {\n  }\n};\n";
        let (out, r) = transformed(src);
        assert_eq!(out, src);
        assert_eq!(r.warnings.len(), 1);
    }
}
