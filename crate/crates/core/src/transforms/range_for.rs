//! Range-based for loops lowered to explicit iterator loops.
//!
//! Each loop becomes a pair of `__beginN`/`__endN` declarations placed
//! before the statement, a classic three-part `for` header, and an
//! element declaration at the top of the body.

use crate::semantics::{
    deduce_auto, function_type, param_type, range_element_type, type_from_tokens, AutoShape,
    Scope, ScopeKind, TypeContext, TypeRepr,
};
use crate::syntax::edit::{Edit, Feature};
use crate::syntax::lexer::TokenKind;
use crate::syntax::parser::{ClassDecl, Item, Member, RangeFor, Stmt, SyntaxTree};

use super::{declared_var_type, global_scope, TransformResult};

pub fn lower_range_for(tree: &SyntaxTree, ctx: &TypeContext) -> TransformResult {
    let mut pass = RangePass {
        tree,
        ctx,
        result: TransformResult::default(),
        scope: global_scope(tree, ctx),
    };
    pass.walk_items(&tree.items);
    pass.result
}

struct RangePass<'a> {
    tree: &'a SyntaxTree,
    ctx: &'a TypeContext,
    result: TransformResult,
    scope: Scope,
}

impl<'a> RangePass<'a> {
    fn walk_items(&mut self, items: &'a [Item]) {
        // Bare statements at file scope share one loop counter.
        let mut top_counter = 0usize;
        for item in items {
            match item {
                Item::TopStmt(s) => self.walk_stmt(s, &mut top_counter),
                Item::Function(f) => {
                    let Some(body) = f.body.as_deref() else { continue };
                    if f.is_template {
                        self.warn_template_loops(body);
                        continue;
                    }
                    if let Some(ty) = function_type(self.tree, f) {
                        self.scope.bind(&f.name, ty);
                    }
                    self.scope.push(ScopeKind::Function);
                    for p in &f.params {
                        if let (Some(name), Some(ty)) = (&p.name, param_type(self.tree, p)) {
                            self.scope.bind(name, self.ctx.resolve(ty));
                        }
                    }
                    let mut counter = 0usize;
                    self.walk_stmt(body, &mut counter);
                    self.scope.pop();
                }
                Item::Class(c) => self.walk_class(c),
                Item::Namespace { items, .. } => self.walk_items(items),
                _ => {}
            }
        }
    }

    fn walk_class(&mut self, class: &'a ClassDecl) {
        for m in &class.members {
            let (body, params) = match m {
                Member::Ctor(c) => (c.body.as_deref(), &c.params),
                Member::Method(md) => (md.body.as_deref(), &md.params),
                _ => continue,
            };
            let Some(body) = body else { continue };
            if class.is_template {
                self.warn_template_loops(body);
                continue;
            }
            self.scope.push(ScopeKind::Class);
            for fm in &class.members {
                if let Member::Field(fd) = fm {
                    for d in &fd.declarators {
                        if let Some(mut ty) = type_from_tokens(self.tree, fd.type_toks) {
                            for _ in 0..d.stars {
                                ty = TypeRepr::pointer(ty);
                            }
                            if let Some(arr) = d.array_toks {
                                if let Some(extent) = super::array_extent(self.tree, arr) {
                                    ty = TypeRepr::Array { elem: Box::new(ty), extent };
                                }
                            }
                            self.scope.bind(&d.name, self.ctx.resolve(ty));
                        }
                    }
                }
            }
            self.scope.push(ScopeKind::Function);
            for p in params {
                if let (Some(name), Some(ty)) = (&p.name, param_type(self.tree, p)) {
                    self.scope.bind(name, self.ctx.resolve(ty));
                }
            }
            let mut counter = 0usize;
            self.walk_stmt(body, &mut counter);
            self.scope.pop();
            self.scope.pop();
        }
    }

    fn warn_template_loops(&mut self, body: &'a Stmt) {
        let mut lines = Vec::new();
        collect_loops(body, &mut lines, self.tree);
        for line in lines {
            self.result.warn(line, "range-for in template context not lowered");
        }
    }

    fn walk_stmt(&mut self, s: &'a Stmt, counter: &mut usize) {
        match s {
            Stmt::Compound { stmts, .. } => {
                self.scope.push(ScopeKind::Block);
                for st in stmts {
                    self.walk_stmt(st, counter);
                }
                self.scope.pop();
            }
            Stmt::Decl(v) => {
                for d in &v.declarators {
                    let ty = if v.is_auto {
                        super::auto_type::deduced_var_type(self.tree, v, d, &self.scope, self.ctx)
                    } else {
                        declared_var_type(self.tree, v, d).map(|t| self.ctx.resolve(t))
                    };
                    if let Some(ty) = ty {
                        self.scope.bind(&d.name, ty);
                    }
                }
            }
            Stmt::RangeFor(r) => self.handle_loop(r, counter),
            Stmt::For { body, .. } => self.walk_stmt(body, counter),
            Stmt::Control { body, else_body, .. } => {
                self.walk_stmt(body, counter);
                if let Some(e) = else_body {
                    self.walk_stmt(e, counter);
                }
            }
            _ => {}
        }
    }

    fn handle_loop(&mut self, r: &'a RangeFor, counter: &mut usize) {
        let toks = &self.tree.tokens;
        let line = toks[r.for_tok].line;
        let (elem, plan) = match range_element_type(self.tree, r.range_toks, &self.scope, self.ctx)
        {
            Ok(p) => p,
            Err(e) => {
                self.result.warn(line, format!("range-for not lowered: {}", e));
                self.scope.push(ScopeKind::Block);
                self.walk_stmt(&r.body, counter);
                self.scope.pop();
                return;
            }
        };
        *counter += 1;
        let b = format!("__begin{}", counter);
        let e = format!("__end{}", counter);

        let head = format!(
            "{} = {};\n{} = {};\n",
            plan.iter_type.render(&b),
            plan.begin,
            plan.iter_type.render(&e),
            plan.end
        );
        let at = toks[r.for_tok].offset;
        self.result.edits.push(Edit::new((at, at), head, Feature::RangeFor));

        let header = format!("(;{b} != {e}; ++{b})");
        self.result.edits.push(Edit::new(
            (toks[r.lparen].offset, toks[r.rparen].end()),
            header,
            Feature::RangeFor,
        ));

        let var_name = last_identifier(self.tree, r.decl_toks);
        let decl_text = match &var_name {
            Some(name) if decl_is_auto(self.tree, r.decl_toks) => {
                let shape = decl_shape(self.tree, r.decl_toks);
                match deduce_auto(shape, &elem, line) {
                    Ok(full) => full.render(name),
                    Err(err) => {
                        self.result.warn(line, format!("loop variable not deduced: {}", err));
                        *counter -= 1;
                        self.scope.push(ScopeKind::Block);
                        self.walk_stmt(&r.body, counter);
                        self.scope.pop();
                        return;
                    }
                }
            }
            _ => self.tree.sig_text(r.decl_toks),
        };
        let var_stmt = format!("{} = *{};", decl_text, b);
        match r.body.as_ref() {
            Stmt::Compound { lbrace, .. } => {
                let at = toks[*lbrace].end();
                self.result
                    .edits
                    .push(Edit::new((at, at), format!("\n{}", var_stmt), Feature::RangeFor));
            }
            other => {
                let (s, end) = other.tok_range();
                let open = toks[s].offset;
                self.result
                    .edits
                    .push(Edit::new((open, open), format!("{{\n{}\n", var_stmt), Feature::RangeFor));
                let close = toks[end].end();
                self.result
                    .edits
                    .push(Edit::new((close, close), "\n}".to_string(), Feature::RangeFor));
            }
        }

        self.scope.push(ScopeKind::Block);
        self.scope.bind(&b, plan.iter_type.clone());
        self.scope.bind(&e, plan.iter_type.clone());
        if let Some(name) = var_name {
            self.scope.bind(&name, elem);
        }
        self.walk_stmt(&r.body, counter);
        self.scope.pop();
    }
}

fn decl_is_auto(tree: &SyntaxTree, toks: (usize, usize)) -> bool {
    tree.tokens[toks.0..=toks.1].iter().any(|t| t.is("auto"))
}

fn decl_shape(tree: &SyntaxTree, toks: (usize, usize)) -> AutoShape {
    let mut shape = AutoShape { stars: 0, is_ref: false, is_const: false };
    for t in &tree.tokens[toks.0..=toks.1] {
        match t.text.as_str() {
            "*" => shape.stars += 1,
            "&" => shape.is_ref = true,
            "const" => shape.is_const = true,
            _ => {}
        }
    }
    shape
}

fn last_identifier(tree: &SyntaxTree, toks: (usize, usize)) -> Option<String> {
    tree.tokens[toks.0..=toks.1]
        .iter()
        .rev()
        .find(|t| t.kind == TokenKind::Identifier)
        .map(|t| t.text.clone())
}

fn collect_loops(s: &Stmt, lines: &mut Vec<u32>, tree: &SyntaxTree) {
    match s {
        Stmt::Compound { stmts, .. } => {
            for st in stmts {
                collect_loops(st, lines, tree);
            }
        }
        Stmt::RangeFor(r) => {
            lines.push(tree.tokens[r.for_tok].line);
            collect_loops(&r.body, lines, tree);
        }
        Stmt::For { body, .. } => collect_loops(body, lines, tree),
        Stmt::Control { body, else_body, .. } => {
            collect_loops(body, lines, tree);
            if let Some(e) = else_body {
                collect_loops(e, lines, tree);
            }
        }
        _ => {}
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::edit::apply_edits;
    use crate::syntax::{parse, tokenize};

    fn transformed(src: &str) -> (String, Vec<String>) {
        let tree = parse(tokenize(src.as_bytes()).tokens).unwrap();
        let ctx = TypeContext::build(&tree);
        let r = lower_range_for(&tree, &ctx);
        let (out, _) = apply_edits(src.as_bytes(), &r.edits).unwrap();
        (
            String::from_utf8(out).unwrap(),
            r.warnings.into_iter().map(|w| w.reason).collect(),
        )
    }

    fn sig_tokens(src: &str) -> Vec<String> {
        tokenize(src.as_bytes())
            .tokens
            .into_iter()
            .filter(|t| t.is_significant())
            .map(|t| t.text)
            .collect()
    }

    fn assert_tokens(src: &str, expected: &str) {
        let (out, warnings) = transformed(src);
        assert!(warnings.is_empty(), "warnings: {:?}", warnings);
        assert_eq!(sig_tokens(&out), sig_tokens(expected), "output was:\n{}", out);
    }

    #[test]
    fn array_loop_by_reference() {
        let src = "void f() {\n  int array[4] = { 5, 2, 9, 7 };\n  for (int &k : array) {\n    k = 1;\n  }\n}\n";
        let expected = "void f() {\n  int array[4] = { 5, 2, 9, 7 };\n  int * __begin1 = (array);\n  int * __end1 = (array)+4;\n  for(;__begin1 != __end1;\n      ++__begin1) {\n    int &k = *__begin1;\n    k = 1;\n  }\n}\n";
        assert_tokens(src, expected);
    }

    #[test]
    fn auto_loop_variable_over_array() {
        let src = "void f() {\n  int a[2] = { 1, 2 };\n  for (auto &v : a) {\n    v = 0;\n  }\n}\n";
        let expected = "void f() {\n  int a[2] = { 1, 2 };\n  int * __begin1 = (a);\n  int * __end1 = (a)+2;\n  for (;__begin1 != __end1; ++__begin1) {\n    int &v = *__begin1;\n    v = 0;\n  }\n}\n";
        assert_tokens(src, expected);
    }

    #[test]
    fn sequential_loops_get_distinct_names() {
        let src = "void f() {\n  int a[2] = { 1, 2 };\n  for (int v : a) {\n    v++;\n  }\n  for (int w : a) {\n    w++;\n  }\n}\n";
        let (out, warnings) = transformed(src);
        assert!(warnings.is_empty(), "warnings: {:?}", warnings);
        assert!(out.contains("__begin1"));
        assert!(out.contains("__begin2"));
    }

    #[test]
    fn non_compound_body_is_braced() {
        let src = "void f() {\n  int a[2] = { 1, 2 };\n  for (int v : a)\n    v++;\n}\n";
        let (out, warnings) = transformed(src);
        assert!(warnings.is_empty(), "warnings: {:?}", warnings);
        assert!(out.contains("int v = *__begin1;"));
        assert!(sig_tokens(&out).contains(&"{".to_string()));
    }

    #[test]
    fn unknown_range_warns_and_keeps_loop() {
        let src = "void f(Widget w) {\n  for (int v : w) {\n    v++;\n  }\n}\n";
        let (out, warnings) = transformed(src);
        assert_eq!(out, src);
        assert!(!warnings.is_empty());
    }
}
