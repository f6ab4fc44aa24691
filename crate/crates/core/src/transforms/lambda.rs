//! Lambda expressions converted to named function objects.
//!
//! Each pass converts the innermost lambdas only; the phase driver keeps
//! invoking it until no edits are produced, so nesting unwinds from the
//! inside out. The generated class is inserted before the statement that
//! holds the lambda and the lambda itself becomes a constructor call.

use std::collections::{BTreeMap, HashMap, HashSet};

use crate::semantics::{param_type, type_of_expr, Scope, ScopeKind, TypeContext, TypeRepr};
use crate::syntax::edit::{Edit, Feature};
use crate::syntax::lexer::TokenKind;
use crate::syntax::parser::{
    parse_param_list, ClassDecl, Item, Member, Stmt, SyntaxTree,
};

use super::{
    declared_var_type, is_lambda_intro, matching_tok, next_sig, prev_sig, TransformResult,
};

const NAME_PREFIX: &str = "LambdaFunctor__";

pub fn transform_lambda(tree: &SyntaxTree, ctx: &TypeContext) -> TransformResult {
    let mut intros: Vec<usize> = Vec::new();
    for i in 0..tree.tokens.len() {
        if is_lambda_intro(&tree.tokens, i) {
            intros.push(i);
        }
    }
    let mut pass = LambdaPass {
        tree,
        ctx,
        result: TransformResult::default(),
        scope: Scope::new(),
        parsed: intros
            .iter()
            .map(|&i| (i, parse_lambda(tree, i)))
            .collect(),
        intros,
        claimed: HashSet::new(),
        inserts: BTreeMap::new(),
        name_seq: existing_names(tree),
    };
    pass.walk_items(&tree.items);
    for (offset, text) in std::mem::take(&mut pass.inserts) {
        pass.result
            .edits
            .push(Edit::new((offset, offset), text, Feature::Lambda));
    }
    pass.result
}

struct LambdaExpr {
    intro: usize,
    captures: Vec<Capture>,
    default: Option<char>,
    params_toks: Option<(usize, usize)>,
    /// Significant token range of an explicit trailing return type.
    ret_toks: Option<(usize, usize)>,
    body: (usize, usize),
}

struct Capture {
    by_ref: bool,
    name: String,
}

/// Highest sequence number already used per line by earlier runs, so the
/// generated names stay unique under repeated transformation.
fn existing_names(tree: &SyntaxTree) -> HashMap<u32, u32> {
    let mut map = HashMap::new();
    for t in &tree.tokens {
        if t.kind != TokenKind::Identifier {
            continue;
        }
        let Some(rest) = t.text.strip_prefix(NAME_PREFIX) else { continue };
        let Some((line, seq)) = rest.split_once('_') else { continue };
        if let (Ok(line), Ok(seq)) = (line.parse::<u32>(), seq.parse::<u32>()) {
            let e = map.entry(line).or_insert(0);
            *e = (*e).max(seq);
        }
    }
    map
}

fn parse_lambda(tree: &SyntaxTree, intro: usize) -> Result<LambdaExpr, String> {
    let toks = &tree.tokens;
    let close = matching_tok(toks, intro).ok_or("unterminated capture list")?;

    let mut captures = Vec::new();
    let mut default = None;
    let mut i = next_sig(toks, intro).ok_or("unterminated capture list")?;
    while i < close {
        let t = &toks[i];
        if t.is("this") || t.is("*") {
            return Err("capture of `this` is not supported".to_string());
        }
        if t.is("=") {
            default = Some('=');
        } else if t.is("&") {
            let n = next_sig(toks, i).ok_or("unterminated capture list")?;
            if n >= close || toks[n].is(",") {
                default = Some('&');
            } else if toks[n].kind == TokenKind::Identifier {
                captures.push(Capture { by_ref: true, name: toks[n].text.clone() });
                i = n;
            } else {
                return Err("unsupported capture form".to_string());
            }
        } else if t.kind == TokenKind::Identifier {
            let n = next_sig(toks, i).unwrap_or(close);
            if n < close && !toks[n].is(",") {
                return Err("init captures are not supported".to_string());
            }
            captures.push(Capture { by_ref: false, name: t.text.clone() });
        } else if !t.is(",") {
            return Err("unsupported capture form".to_string());
        }
        i = next_sig(toks, i).ok_or("unterminated capture list")?;
    }

    let mut cur = next_sig(toks, close).ok_or("lambda body missing")?;
    let params_toks = if toks[cur].is("(") {
        let rp = matching_tok(toks, cur).ok_or("unbalanced parameter list")?;
        let lp = cur;
        cur = next_sig(toks, rp).ok_or("lambda body missing")?;
        Some((lp, rp))
    } else {
        None
    };

    let mut ret_toks = None;
    while !toks[cur].is("{") {
        if toks[cur].is("->") {
            let start = next_sig(toks, cur).ok_or("missing return type")?;
            let mut end = start;
            let mut j = start;
            while !toks[j].is("{") {
                end = j;
                j = next_sig(toks, j).ok_or("lambda body missing")?;
            }
            ret_toks = Some((start, end));
            cur = j;
            break;
        }
        if toks[cur].is("mutable") {
            cur = next_sig(toks, cur).ok_or("lambda body missing")?;
            continue;
        }
        return Err(format!("unsupported lambda specifier `{}`", toks[cur].text));
    }
    let rb = matching_tok(toks, cur).ok_or("unterminated lambda body")?;
    Ok(LambdaExpr { intro, captures, default, params_toks, ret_toks, body: (cur, rb) })
}

struct LambdaPass<'a> {
    tree: &'a SyntaxTree,
    ctx: &'a TypeContext,
    result: TransformResult,
    scope: Scope,
    intros: Vec<usize>,
    parsed: HashMap<usize, Result<LambdaExpr, String>>,
    claimed: HashSet<usize>,
    /// Functor class text per insertion offset, grouped so each anchor
    /// receives one edit.
    inserts: BTreeMap<usize, String>,
    name_seq: HashMap<u32, u32>,
}

impl<'a> LambdaPass<'a> {
    fn walk_items(&mut self, items: &'a [Item]) {
        for item in items {
            match item {
                Item::Function(f) => {
                    if let Some(ty) = crate::semantics::function_type(self.tree, f) {
                        self.scope.bind(&f.name, ty);
                    }
                    if let Some(body) = f.body.as_deref() {
                        if f.is_template {
                            self.skip_range(
                                body_range(body),
                                "lambda in template function not transformed",
                            );
                        } else {
                            self.scope.push(ScopeKind::Function);
                            for p in &f.params {
                                if let (Some(n), Some(ty)) = (&p.name, param_type(self.tree, p)) {
                                    self.scope.bind(n, self.ctx.resolve(ty));
                                }
                            }
                            let anchor = self.stmt_offset(body);
                            self.visit_stmt(body, anchor);
                            self.scope.pop();
                        }
                    }
                }
                Item::Var(v) => {
                    let anchor = self.tree.tokens[v.first_tok].offset;
                    self.process_range((v.first_tok, v.semi_tok), anchor);
                    for d in &v.declarators {
                        if !v.is_auto {
                            if let Some(ty) = declared_var_type(self.tree, v, d) {
                                self.scope.bind(&d.name, self.ctx.resolve(ty));
                            }
                        }
                    }
                }
                Item::Class(c) => self.walk_class(c),
                Item::TopStmt(s) => {
                    let anchor = self.stmt_offset(s);
                    self.visit_stmt(s, anchor);
                }
                Item::Namespace { items, .. } => self.walk_items(items),
                _ => {}
            }
            if let Some(range) = item_range(item) {
                let anchor = self.tree.tokens[range.0].offset;
                self.process_range(range, anchor);
            }
        }
    }

    fn walk_class(&mut self, class: &'a ClassDecl) {
        self.scope.bind(
            &class.name,
            TypeRepr::Function {
                params: Vec::new(),
                ret: Box::new(TypeRepr::named(&class.name)),
            },
        );
        if class.is_template {
            self.skip_range(
                (class.first_tok, class.semi_tok.unwrap_or(class.rbrace)),
                "lambda in template class not transformed",
            );
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
            for fm in &class.members {
                if let Member::Field(fd) = fm {
                    for d in &fd.declarators {
                        if let Some(mut ty) =
                            crate::semantics::type_from_tokens(self.tree, fd.type_toks)
                        {
                            for _ in 0..d.stars {
                                ty = TypeRepr::pointer(ty);
                            }
                            self.scope.bind(&d.name, self.ctx.resolve(ty));
                        }
                    }
                }
            }
            self.scope.push(ScopeKind::Function);
            for p in params {
                if let (Some(n), Some(ty)) = (&p.name, param_type(self.tree, p)) {
                    self.scope.bind(n, self.ctx.resolve(ty));
                }
            }
            let anchor = self.stmt_offset(body);
            self.visit_stmt(body, anchor);
            self.scope.pop();
            self.scope.pop();
        }
    }

    fn stmt_offset(&self, s: &Stmt) -> usize {
        self.tree.tokens[s.tok_range().0].offset
    }

    fn visit_stmt(&mut self, s: &'a Stmt, anchor: usize) {
        match s {
            Stmt::Compound { stmts, .. } => {
                self.scope.push(ScopeKind::Block);
                for st in stmts {
                    let a = self.stmt_offset(st);
                    self.visit_stmt(st, a);
                }
                self.scope.pop();
            }
            Stmt::Decl(v) => {
                self.process_range((v.first_tok, v.semi_tok), anchor);
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
            Stmt::Expr { toks } | Stmt::Return { toks, .. } => {
                self.process_range(*toks, anchor)
            }
            Stmt::RangeFor(r) => {
                self.visit_stmt(&r.body, anchor);
                self.process_range((r.for_tok, r.rparen), anchor);
            }
            Stmt::For { body, .. } => {
                self.visit_stmt(body, anchor);
                self.process_range(s.tok_range(), anchor);
            }
            Stmt::Control { body, else_body, .. } => {
                self.visit_stmt(body, anchor);
                if let Some(e) = else_body {
                    self.visit_stmt(e, anchor);
                }
                self.process_range(s.tok_range(), anchor);
            }
            Stmt::LocalClass(c) => self.walk_class(c),
            _ => self.process_range(s.tok_range(), anchor),
        }
    }

    fn skip_range(&mut self, range: (usize, usize), reason: &str) {
        let intros: Vec<usize> = self
            .intros
            .iter()
            .copied()
            .filter(|&i| range.0 <= i && i <= range.1 && !self.claimed.contains(&i))
            .collect();
        for i in intros {
            self.claimed.insert(i);
            self.result.warn(self.tree.tokens[i].line, reason);
        }
    }

    fn process_range(&mut self, range: (usize, usize), anchor: usize) {
        let intros: Vec<usize> = self
            .intros
            .iter()
            .copied()
            .filter(|&i| range.0 <= i && i <= range.1 && !self.claimed.contains(&i))
            .collect();
        for i in intros {
            self.claimed.insert(i);
            let verdict = match self.parsed.get(&i) {
                Some(Err(e)) => Some(e.clone()),
                Some(Ok(l)) => {
                    // Only innermost lambdas convert in one pass; outer
                    // ones wait for the next driver iteration.
                    let nested = self
                        .intros
                        .iter()
                        .any(|&j| j != i && l.body.0 < j && j < l.body.1);
                    if nested {
                        continue;
                    }
                    None
                }
                None => continue,
            };
            match verdict {
                Some(e) => self.result.warn(self.tree.tokens[i].line, e),
                None => {
                    if let Err(e) = self.convert(i, anchor) {
                        self.result.warn(self.tree.tokens[i].line, e);
                    }
                }
            }
        }
    }

    fn convert(&mut self, intro: usize, anchor: usize) -> Result<(), String> {
        let Some(Ok(l)) = self.parsed.remove(&intro) else {
            return Ok(());
        };
        let toks = &self.tree.tokens;
        let line = toks[l.intro].line;

        // Parameters of enclosing lambdas are visible at the call site,
        // so they may be captured even though the generated class is
        // hoisted out.
        let mut pushed = 0usize;
        for &j in &self.intros {
            if j == intro {
                continue;
            }
            if let Some(Ok(outer)) = self.parsed.get(&j) {
                if outer.body.0 < intro && intro < outer.body.1 {
                    self.scope.push(ScopeKind::Function);
                    pushed += 1;
                    if let Some((lp, rp)) = outer.params_toks {
                        for p in parse_param_list(toks, lp, rp) {
                            if let (Some(n), Some(ty)) = (&p.name, param_type(self.tree, &p)) {
                                let ty = self.ctx.resolve(ty);
                                self.scope.bind(n, ty);
                            }
                        }
                    }
                }
            }
        }
        let out = self.build_functor(&l, line);
        for _ in 0..pushed {
            self.scope.pop();
        }
        let (functor, replacement, span) = out?;
        self.inserts.entry(anchor).or_default().push_str(&functor);
        self.result.edits.push(Edit::new(span, replacement, Feature::Lambda));
        Ok(())
    }

    fn build_functor(
        &mut self,
        l: &LambdaExpr,
        line: u32,
    ) -> Result<(String, String, (usize, usize)), String> {
        let toks = &self.tree.tokens;
        let params: Vec<_> = match l.params_toks {
            Some((lp, rp)) => parse_param_list(toks, lp, rp),
            None => Vec::new(),
        };

        let mut caps: Vec<Capture> = Vec::new();
        let mut seen: HashSet<String> = HashSet::new();
        for c in &l.captures {
            if seen.insert(c.name.clone()) {
                caps.push(Capture { by_ref: c.by_ref, name: c.name.clone() });
            }
        }
        if let Some(d) = l.default {
            for name in self.free_identifiers(l, &params) {
                if seen.insert(name.clone()) {
                    caps.push(Capture { by_ref: d == '&', name });
                }
            }
        }

        let mut members = Vec::new();
        let mut ctor_params = Vec::new();
        let mut inits = Vec::new();
        let mut args = Vec::new();
        for c in &caps {
            let ty = self
                .scope
                .lookup(&c.name)
                .cloned()
                .ok_or_else(|| format!("captured variable `{}` has unknown type", c.name))?;
            if matches!(ty, TypeRepr::Function { .. }) {
                return Err(format!("capture of function `{}` is not supported", c.name));
            }
            let ty = ty.deref_ref();
            let decl = if c.by_ref {
                TypeRepr::reference(ty).render(&c.name)
            } else {
                ty.render(&c.name)
            };
            members.push(format!("  {};", decl));
            ctor_params.push(decl);
            inits.push(format!("{}({})", c.name, c.name));
            args.push(c.name.clone());
        }

        let ret = match l.ret_toks {
            Some(r) => self.tree.sig_text(r),
            None => self.deduce_return(l, &params)?,
        };

        let name = self.fresh_name(line);
        let params_text = match l.params_toks {
            Some(p) => self.tree.text(p),
            None => "()".to_string(),
        };
        let body_text = self.tree.text(l.body);

        let mut s = format!("class {}{{\n", name);
        for m in &members {
            s.push_str(m);
            s.push('\n');
        }
        s.push_str("public:\n");
        if ctor_params.is_empty() {
            s.push_str(&format!("  {}() {{}}\n", name));
        } else {
            s.push_str(&format!(
                "  {}(\n    {}) : {} {{}}\n",
                name,
                ctor_params.join(",\n    "),
                inits.join(", ")
            ));
        }
        s.push_str(&format!("  {} operator(){}{}\n", ret, params_text, body_text));
        s.push_str("};\n");

        // `(T())` before a call argument list reads as a cast to a function
        // type, so the outer parentheses are only safe with constructor args.
        let replacement = if args.is_empty() {
            format!("{}()", name)
        } else {
            format!("({}({}))", name, args.join(", "))
        };
        let span = (toks[l.intro].offset, toks[l.body.1].end());
        Ok((s, replacement, span))
    }

    fn fresh_name(&mut self, line: u32) -> String {
        let seq = self.name_seq.entry(line).or_insert(0);
        *seq += 1;
        format!("{}{}_{}", NAME_PREFIX, line, seq)
    }

    /// Identifiers referenced in the body that resolve outside of it, in
    /// first-occurrence order; used to expand a default capture.
    fn free_identifiers(&self, l: &LambdaExpr, params: &[crate::syntax::parser::Param]) -> Vec<String> {
        let toks = &self.tree.tokens;
        let param_names: HashSet<&str> = params
            .iter()
            .filter_map(|p| p.name.as_deref())
            .collect();
        let mut out = Vec::new();
        let mut seen = HashSet::new();
        for i in l.body.0 + 1..l.body.1 {
            let t = &toks[i];
            if t.kind != TokenKind::Identifier || param_names.contains(t.text.as_str()) {
                continue;
            }
            if let Some(p) = prev_sig(toks, i) {
                if toks[p].is(".") || toks[p].is("->") || toks[p].is("::") {
                    continue;
                }
            }
            if let Some(n) = next_sig(toks, i) {
                if toks[n].is("(") {
                    continue;
                }
            }
            let Some(ty) = self.scope.lookup(&t.text) else { continue };
            if matches!(ty, TypeRepr::Function { .. }) {
                continue;
            }
            if seen.insert(t.text.clone()) {
                out.push(t.text.clone());
            }
        }
        out
    }

    /// Type of the first `return expr;`, with the body's own locals bound
    /// along the way. The body is re-parsed as a free function so locals
    /// declared before the return are visible.
    fn deduce_return(
        &mut self,
        l: &LambdaExpr,
        params: &[crate::syntax::parser::Param],
    ) -> Result<String, String> {
        let src = self.tree.text((l.body.0, l.body.1));
        let wrapped = format!("void __lambda_body__() {}", src);
        let toks = crate::syntax::tokenize(wrapped.as_bytes());
        let tree2 = crate::syntax::parser::parse(toks.tokens)
            .map_err(|e| format!("lambda return type not deduced: {}", e))?;
        let body = tree2.items.iter().find_map(|it| match it {
            Item::Function(f) => f.body.as_deref(),
            _ => None,
        });
        let Some(body) = body else {
            return Ok("void".to_string());
        };
        self.scope.push(ScopeKind::Function);
        for p in params {
            if let (Some(n), Some(ty)) = (&p.name, param_type(self.tree, p)) {
                self.scope.bind(n, self.ctx.resolve(ty));
            }
        }
        let res = first_return_type(&tree2, body, &mut self.scope, self.ctx);
        self.scope.pop();
        match res {
            None => Ok("void".to_string()),
            Some(Ok(t)) => Ok(t.decay().text()),
            Some(Err(e)) => Err(format!("lambda return type not deduced: {}", e)),
        }
    }
}

/// Depth-first scan for the first value-returning statement, binding
/// declarations and local classes encountered on the way.
fn first_return_type(
    tree: &SyntaxTree,
    s: &Stmt,
    scope: &mut Scope,
    ctx: &TypeContext,
) -> Option<Result<TypeRepr, crate::semantics::SemanticError>> {
    match s {
        Stmt::Return { expr: Some(r), .. } => Some(type_of_expr(tree, *r, scope)),
        Stmt::Decl(v) => {
            for d in &v.declarators {
                if v.is_auto {
                    if let Some(ty) = super::auto_type::deduced_var_type(tree, v, d, scope, ctx) {
                        scope.bind(&d.name, ty);
                    }
                } else if let Some(ty) = declared_var_type(tree, v, d) {
                    scope.bind(&d.name, ctx.resolve(ty));
                }
            }
            None
        }
        Stmt::LocalClass(c) => {
            scope.bind(
                &c.name,
                TypeRepr::Function {
                    params: Vec::new(),
                    ret: Box::new(TypeRepr::named(&c.name)),
                },
            );
            None
        }
        Stmt::Compound { stmts, .. } => stmts
            .iter()
            .find_map(|st| first_return_type(tree, st, scope, ctx)),
        Stmt::RangeFor(r) => first_return_type(tree, &r.body, scope, ctx),
        Stmt::For { body, .. } => first_return_type(tree, body, scope, ctx),
        Stmt::Control { body, else_body, .. } => {
            first_return_type(tree, body, scope, ctx).or_else(|| {
                else_body
                    .as_deref()
                    .and_then(|e| first_return_type(tree, e, scope, ctx))
            })
        }
        _ => None,
    }
}

fn body_range(s: &Stmt) -> (usize, usize) {
    s.tok_range()
}

fn item_range(item: &Item) -> Option<(usize, usize)> {
    match item {
        Item::Class(c) => Some((c.first_tok, c.semi_tok.unwrap_or(c.rbrace))),
        Item::Function(f) => Some((f.first_tok, f.end_tok)),
        Item::Var(v) => Some((v.first_tok, v.semi_tok)),
        Item::Typedef { toks }
        | Item::UsingImport { toks }
        | Item::Opaque { toks } => Some(*toks),
        Item::UsingAlias(a) => Some((a.first_tok, a.semi_tok)),
        _ => None,
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
        let r = transform_lambda(&tree, &ctx);
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

    #[test]
    fn reference_capture_functor() {
        let src = "void run() {\n  std::vector<int> v(6);\n  int inc = 7;\n\n\n\n\n\n  std::for_each(\n    v.begin(),\n    v.end(),\n    [&inc](int &n) {\n      n += inc;\n    }\n  );\n}\n";
        let (out, warnings) = transformed(src);
        assert!(warnings.is_empty(), "warnings: {:?}", warnings);
        let expected = "void run() {\n  std::vector<int> v(6);\n  int inc = 7;\nclass LambdaFunctor__12_1{\n  int& inc;\npublic:\n  LambdaFunctor__12_1(\n    int& inc) : inc(inc) {}\n  void operator()(int & n){\n    n += inc;\n  }\n};\n  std::for_each(\n    v.begin(),\n    v.end(),\n    (LambdaFunctor__12_1(inc))\n  );\n}\n";
        assert_eq!(sig_tokens(&out), sig_tokens(expected), "output was:\n{}", out);
    }

    #[test]
    fn captureless_lambda_called_in_place() {
        let src = "void f() {\n  int r = [](int a) { return a; }(5);\n}\n";
        let (out, warnings) = transformed(src);
        assert!(warnings.is_empty(), "warnings: {:?}", warnings);
        assert!(out.contains("class LambdaFunctor__2_1{"));
        assert!(out.contains("LambdaFunctor__2_1() {}"));
        assert!(out.contains("int operator()(int a){ return a; }"));
        assert!(out.contains("int r = LambdaFunctor__2_1()(5);"));
    }

    #[test]
    fn value_default_capture_is_expanded() {
        let src = "void f() {\n  int x = 1;\n  int y = [=]() { return x; }();\n}\n";
        let (out, warnings) = transformed(src);
        assert!(warnings.is_empty(), "warnings: {:?}", warnings);
        assert!(out.contains("int x;"));
        assert!(out.contains(": x(x) {}"));
        assert!(out.contains("(LambdaFunctor__3_1(x))()"));
    }

    #[test]
    fn unknown_capture_warns_and_keeps_lambda() {
        let src = "void f() {\n  g([&q](int n) { n += q; });\n}\n";
        let (out, warnings) = transformed(src);
        assert_eq!(out, src);
        assert!(!warnings.is_empty());
    }

    #[test]
    fn only_inner_lambda_converts_in_one_pass() {
        let src = "void f() {\n  g([](int b) {\n    return [&b]() { return b; };\n  });\n}\n";
        let (out, warnings) = transformed(src);
        assert!(warnings.is_empty(), "warnings: {:?}", warnings);
        assert!(out.contains("class LambdaFunctor__3_1{"));
        assert!(out.contains("(LambdaFunctor__3_1(b))"));
        assert!(out.contains("[](int b)"));
    }

    #[test]
    fn explicit_return_type_is_used() {
        let src = "void f() {\n  double d = [](int a) -> double { return a; }(3);\n}\n";
        let (out, warnings) = transformed(src);
        assert!(warnings.is_empty(), "warnings: {:?}", warnings);
        assert!(out.contains("double operator()(int a)"));
    }
}
