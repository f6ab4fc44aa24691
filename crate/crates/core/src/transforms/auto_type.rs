//! Replacement of `auto` with compiler-style deduced types, including
//! trailing-return functions.

use std::collections::HashSet;

use crate::semantics::{
    auto_binding, deduce_auto, deduce_trailing_return, function_type, param_type, type_of_expr,
    AutoShape, Scope, ScopeKind, TypeContext, TypeRepr,
};
use crate::syntax::edit::{Edit, Feature};
use crate::syntax::lexer::TokenKind;
use crate::syntax::parser::{
    ClassDecl, FunctionDecl, Item, Member, Stmt, SyntaxTree, VarDecl, VarDeclarator,
};

use super::{declared_var_type, next_sig, ws_run_start, TransformResult};

pub fn transform_auto(tree: &SyntaxTree, ctx: &TypeContext) -> TransformResult {
    let mut t = AutoPass {
        tree,
        ctx,
        result: TransformResult::default(),
        covered: HashSet::new(),
        scope: Scope::new(),
    };
    t.walk_items(&tree.items, true);
    t.sweep_uncovered();
    t.result
}

/// Deduced full type of one declarator of an `auto` declaration; `None`
/// when the initializer cannot be typed.
pub fn deduced_var_type(
    tree: &SyntaxTree,
    v: &VarDecl,
    d: &VarDeclarator,
    scope: &Scope,
    ctx: &TypeContext,
) -> Option<TypeRepr> {
    let (init_ty, _) = auto_init_type(tree, v, d, scope, ctx)?;
    let shape = AutoShape { stars: d.stars, is_ref: d.is_ref, is_const: v.base_const };
    deduce_auto(shape, &init_ty, tree.tokens[d.name_tok].line).ok()
}

/// Initializer type for an auto declarator; also reports the token index
/// of the inner `auto` for `new auto(expr)` initializers.
fn auto_init_type(
    tree: &SyntaxTree,
    _v: &VarDecl,
    d: &VarDeclarator,
    scope: &Scope,
    ctx: &TypeContext,
) -> Option<(TypeRepr, Option<(usize, TypeRepr)>)> {
    let init = d.init.as_ref()?;
    let toks = init.expr_toks;
    let sig: Vec<usize> = (toks.0..=toks.1)
        .filter(|&i| tree.tokens[i].is_significant())
        .collect();
    // `new auto ( expr )` deduces the allocated type from the argument.
    if sig.len() >= 3
        && tree.tokens[sig[0]].is("new")
        && tree.tokens[sig[1]].is("auto")
        && tree.tokens[sig[2]].is("(")
    {
        let close = super::matching_tok(&tree.tokens, sig[2])?;
        let es = next_sig(&tree.tokens, sig[2])?;
        let ee = super::prev_sig(&tree.tokens, close)?;
        if es > ee {
            return None;
        }
        let inner = type_of_expr(tree, (es, ee), scope).ok()?;
        let inner = ctx.resolve(inner.decay());
        return Some((TypeRepr::pointer(inner.clone()), Some((sig[1], inner))));
    }
    let ty = type_of_expr(tree, toks, scope).ok()?;
    Some((ctx.resolve(ty), None))
}

fn pointer_depth(ty: &TypeRepr) -> (TypeRepr, u32) {
    let mut t = ty.clone();
    let mut depth = 0u32;
    while let TypeRepr::Pointer(inner) = t {
        t = *inner;
        depth += 1;
    }
    (t, depth)
}

struct AutoPass<'a> {
    tree: &'a SyntaxTree,
    ctx: &'a TypeContext,
    result: TransformResult,
    /// Byte offsets of `auto` tokens that were edited or warned about.
    covered: HashSet<usize>,
    scope: Scope,
}

impl<'a> AutoPass<'a> {
    fn walk_items(&mut self, items: &'a [Item], global: bool) {
        for item in items {
            match item {
                Item::Function(f) => self.handle_function(f),
                Item::Var(v) => self.handle_decl(v),
                Item::TopStmt(s) => self.walk_stmt(s),
                Item::Namespace { items, .. } => self.walk_items(items, global),
                Item::Class(c) => self.handle_class(c),
                _ => {}
            }
        }
    }

    fn handle_class(&mut self, class: &'a ClassDecl) {
        // Bind the class name as a constructor-like callable so that
        // `Name(args)` expressions type as an instance.
        self.scope.bind(
            &class.name,
            TypeRepr::Function {
                params: Vec::new(),
                ret: Box::new(TypeRepr::named(&class.name)),
            },
        );
        if class.is_template {
            return;
        }
        for m in &class.members {
            let (body, params) = match m {
                Member::Ctor(c) => (c.body.as_deref(), &c.params),
                Member::Method(md) => (md.body.as_deref(), &md.params),
                _ => continue,
            };
            let Some(body) = body else { continue };
            self.scope.push(ScopeKind::Class);
            // Fields visible inside member bodies.
            for fm in &class.members {
                if let Member::Field(fd) = fm {
                    for d in &fd.declarators {
                        let base = crate::semantics::type_from_tokens(self.tree, fd.type_toks);
                        if let Some(mut ty) = base {
                            for _ in 0..d.stars {
                                ty = TypeRepr::pointer(ty);
                            }
                            if d.is_ref {
                                ty = TypeRepr::reference(ty);
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
            self.walk_stmt(body);
            self.scope.pop();
            self.scope.pop();
        }
    }

    fn handle_function(&mut self, f: &'a FunctionDecl) {
        if f.is_template {
            // Paper limitation: auto in template functions is left alone.
            if let Some(body) = f.body_toks {
                for i in body.0..=body.1 {
                    if self.tree.tokens[i].is("auto") {
                        self.covered.insert(self.tree.tokens[i].offset);
                        self.result.warn(
                            self.tree.tokens[i].line,
                            "auto in template function not transformed",
                        );
                    }
                }
            }
            if f.auto_ret {
                let at = find_auto_tok(self.tree, f.ret_toks);
                if let Some(a) = at {
                    self.covered.insert(self.tree.tokens[a].offset);
                }
                self.result.warn(
                    self.tree.tokens[f.name_tok].line,
                    "trailing return in template function not transformed",
                );
            }
            return;
        }
        if f.auto_ret {
            self.rewrite_trailing_return(f);
        }
        if let Some(ty) = function_type(self.tree, f) {
            self.scope.bind(&f.name, ty);
        }
        if let Some(body) = f.body.as_deref() {
            self.scope.push(ScopeKind::Function);
            for p in &f.params {
                if let (Some(name), Some(ty)) = (&p.name, param_type(self.tree, p)) {
                    self.scope.bind(name, self.ctx.resolve(ty));
                }
            }
            self.walk_stmt(body);
            self.scope.pop();
        }
    }

    fn rewrite_trailing_return(&mut self, f: &'a FunctionDecl) {
        let line = self.tree.tokens[f.name_tok].line;
        let auto_tok = match find_auto_tok(self.tree, f.ret_toks) {
            Some(a) => a,
            None => return,
        };
        self.covered.insert(self.tree.tokens[auto_tok].offset);
        let Some(trailing) = &f.trailing else {
            self.result.warn(line, "auto return type without trailing return clause");
            return;
        };
        match deduce_trailing_return(self.tree, f) {
            Ok(ty) => {
                let span = (
                    self.tree.tokens[auto_tok].offset,
                    self.tree.tokens[auto_tok].end(),
                );
                self.result.edits.push(Edit::new(span, ty.text(), Feature::Auto));
                let start = ws_run_start(&self.tree.tokens, trailing.arrow_tok);
                let end = self.tree.tokens[trailing.end_tok].end();
                self.result.edits.push(Edit::new((start, end), String::new(), Feature::Auto));
            }
            Err(e) => self.result.warn(line, format!("trailing return not deduced: {}", e)),
        }
    }

    fn walk_stmt(&mut self, s: &'a Stmt) {
        match s {
            Stmt::Compound { stmts, .. } => {
                self.scope.push(ScopeKind::Block);
                for st in stmts {
                    self.walk_stmt(st);
                }
                self.scope.pop();
            }
            Stmt::Decl(v) => self.handle_decl(v),
            Stmt::LocalClass(c) => self.handle_class(c),
            Stmt::RangeFor(r) => {
                self.scope.push(ScopeKind::Block);
                self.bind_range_var(r);
                self.walk_stmt(&r.body);
                self.scope.pop();
            }
            Stmt::For { body, .. } => self.walk_stmt(body),
            Stmt::Control { body, else_body, .. } => {
                self.walk_stmt(body);
                if let Some(e) = else_body {
                    self.walk_stmt(e);
                }
            }
            _ => {}
        }
    }

    fn bind_range_var(&mut self, r: &'a crate::syntax::parser::RangeFor) {
        // Best-effort: bind an explicitly typed loop variable so that the
        // body can reference it. An `auto` variable here means the loop
        // itself was skipped by the range-for pass; the sweep will warn.
        let Some((name, name_tok)) = last_identifier(self.tree, r.decl_toks) else {
            return;
        };
        let _ = name_tok;
        if let Some(ty) = crate::semantics::type_from_tokens(
            self.tree,
            (r.decl_toks.0, r.decl_toks.1),
        ) {
            self.scope.bind(&name, self.ctx.resolve(ty));
        }
    }

    fn handle_decl(&mut self, v: &'a VarDecl) {
        if !v.is_auto {
            for d in &v.declarators {
                if let Some(ty) = declared_var_type(self.tree, v, d) {
                    self.scope.bind(&d.name, self.ctx.resolve(ty));
                }
            }
            return;
        }
        let auto_tok = match find_auto_tok(self.tree, v.base_toks) {
            Some(a) => a,
            None => return,
        };
        let line = self.tree.tokens[auto_tok].line;
        self.covered.insert(self.tree.tokens[auto_tok].offset);
        let mut bindings: Vec<TypeRepr> = Vec::new();
        let mut new_auto: Vec<(usize, TypeRepr)> = Vec::new();
        for d in &v.declarators {
            let Some((init_ty, inner)) = auto_init_type(self.tree, v, d, &self.scope, self.ctx)
            else {
                self.result.warn(line, format!("initializer of `{}` not deduced", d.name));
                return;
            };
            if let Some(na) = &inner {
                self.covered.insert(self.tree.tokens[na.0].offset);
            }
            let shape = AutoShape { stars: d.stars, is_ref: d.is_ref, is_const: v.base_const };
            let b = match auto_binding(shape, &init_ty, line) {
                Ok(b) => b,
                Err(e) => {
                    self.result.warn(line, format!("deduction failed for `{}`: {}", d.name, e));
                    return;
                }
            };
            let full = match deduce_auto(shape, &init_ty, line) {
                Ok(f) => f,
                Err(e) => {
                    self.result.warn(line, format!("deduction failed for `{}`: {}", d.name, e));
                    return;
                }
            };
            bindings.push(b);
            // Bind right away: a later declarator may refer to this one,
            // as in `auto xp = &a, yp = xp;`.
            self.scope.bind(&d.name, full);
            if let Some(na) = inner {
                new_auto.push(na);
            }
        }
        if bindings.windows(2).any(|w| w[0] != w[1]) {
            self.result.warn(line, "conflicting deductions in one declaration");
            return;
        }
        let binding = bindings.remove(0);

        let (core, depth) = pointer_depth(&binding);
        if matches!(core, TypeRepr::Function { .. }) {
            // Function pointers keep the whole declarator in one piece:
            // `int (*fp)(int)`.
            let d = &v.declarators[0];
            if v.declarators.len() > 1 || d.stars > 0 || d.is_ref {
                self.result.warn(line, "unsupported function-type deduction shape");
                return;
            }
            let span = (
                self.tree.tokens[auto_tok].offset,
                self.tree.tokens[d.name_tok].end(),
            );
            self.result
                .edits
                .push(Edit::new(span, binding.render(&d.name), Feature::Auto));
            self.scope.bind(&d.name, binding);
            return;
        }

        let span = (
            self.tree.tokens[auto_tok].offset,
            self.tree.tokens[auto_tok].end(),
        );
        self.result.edits.push(Edit::new(span, core.text(), Feature::Auto));
        if depth > 0 {
            for d in &v.declarators {
                // Insert the deduced pointer levels ahead of any stars the
                // declarator already carries.
                let at = first_declarator_tok(self.tree, d);
                let pos = self.tree.tokens[at].offset;
                let stars = format!("{} ", "*".repeat(depth as usize));
                self.result.edits.push(Edit::new((pos, pos), stars, Feature::Auto));
            }
        }
        for (tok, inner) in new_auto {
            let span = (self.tree.tokens[tok].offset, self.tree.tokens[tok].end());
            self.result.edits.push(Edit::new(span, inner.text(), Feature::Auto));
        }
    }

    /// Warn about `auto` tokens no pass looked at (opaque regions, loop
    /// headers, and similar unsupported positions).
    fn sweep_uncovered(&mut self) {
        for t in &self.tree.tokens {
            if t.is("auto")
                && t.kind == TokenKind::Keyword
                && !self.covered.contains(&t.offset)
            {
                self.result.warn(t.line, "auto in unsupported context not transformed");
            }
        }
    }
}

fn find_auto_tok(tree: &SyntaxTree, toks: (usize, usize)) -> Option<usize> {
    (toks.0..=toks.1).find(|&i| tree.tokens[i].is("auto"))
}

fn first_declarator_tok(tree: &SyntaxTree, d: &VarDeclarator) -> usize {
    let mut i = d.name_tok;
    while let Some(p) = super::prev_sig(&tree.tokens, i) {
        if tree.tokens[p].is("*") || tree.tokens[p].is("&") {
            i = p;
        } else {
            break;
        }
    }
    i
}

fn last_identifier(tree: &SyntaxTree, toks: (usize, usize)) -> Option<(String, usize)> {
    (toks.0..=toks.1)
        .rev()
        .find(|&i| tree.tokens[i].kind == TokenKind::Identifier)
        .map(|i| (tree.tokens[i].text.clone(), i))
}
