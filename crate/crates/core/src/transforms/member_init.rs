//! In-class member initializers moved into constructors.

use crate::syntax::edit::{Edit, Feature};
use crate::syntax::parser::{ClassDecl, ClassKey, Member, SyntaxTree};

use super::{collect_classes, TransformResult};

struct MovedInit {
    name: String,
    args: String,
    /// Position of the member in declaration order.
    order: usize,
}

pub fn transform_member_init(tree: &SyntaxTree) -> TransformResult {
    let mut result = TransformResult::default();
    for (class, in_template) in collect_classes(tree) {
        transform_class(tree, class, in_template, &mut result);
    }
    result
}

fn transform_class(
    tree: &SyntaxTree,
    class: &ClassDecl,
    in_template: bool,
    result: &mut TransformResult,
) {
    let mut moved: Vec<MovedInit> = Vec::new();
    let mut removals: Vec<Edit> = Vec::new();
    let mut member_order = 0usize;
    let mut has_init = false;

    for m in &class.members {
        let f = match m {
            Member::Field(f) => f,
            _ => continue,
        };
        let any_init = f.declarators.iter().any(|d| d.init.is_some());
        has_init |= any_init;
        if !any_init {
            member_order += f.declarators.len();
            continue;
        }
        if in_template {
            result.warn(
                tree.tokens[f.first_tok].line,
                "member initializer in template class left in place",
            );
            member_order += f.declarators.len();
            continue;
        }
        if f.declarators.len() > 1 {
            result.warn(
                tree.tokens[f.first_tok].line,
                "member initializer in multi-declarator declaration left in place",
            );
            member_order += f.declarators.len();
            continue;
        }
        let d = &f.declarators[0];
        if d.array_toks.is_some() {
            result.warn(
                tree.tokens[d.name_tok].line,
                "array member initializer left in place",
            );
            member_order += 1;
            continue;
        }
        let init = d.init.as_ref().expect("declarator has an initializer");
        let args = tree.text(init.expr_toks);
        let (_, init_end) = tree.byte_span(init.toks);
        let name_end = tree.tokens[d.name_tok].end();
        removals.push(Edit::new((name_end, init_end), String::new(), Feature::MemberInit));
        moved.push(MovedInit { name: d.name.clone(), args, order: member_order });
        member_order += 1;
    }

    if !has_init || moved.is_empty() {
        return;
    }

    let ctors: Vec<_> = class
        .members
        .iter()
        .filter_map(|m| match m {
            Member::Ctor(c) => Some(c),
            _ => None,
        })
        .collect();

    if ctors.is_empty() {
        // Generate a public default constructor after the last member.
        let last_end = class
            .members
            .iter()
            .map(|m| member_end(tree, m))
            .max()
            .unwrap_or(tree.tokens[class.lbrace].end());
        let inits: Vec<&MovedInit> = match class.keyword {
            ClassKey::Union => {
                if moved.len() > 1 {
                    result.warn(
                        tree.tokens[class.name_tok].line,
                        "union has several member initializers; only the first is kept",
                    );
                }
                moved.iter().take(1).collect()
            }
            _ => moved.iter().collect(),
        };
        let list = inits
            .iter()
            .map(|mv| format!("{}({})", mv.name, mv.args))
            .collect::<Vec<_>>()
            .join(", ");
        let text = format!("\npublic: {}() : {} {{}}", class.name, list);
        removals.push(Edit::new((last_end, last_end), text, Feature::MemberInit));
        result.edits.append(&mut removals);
        return;
    }

    // Constructors defined elsewhere cannot receive the initializers.
    for c in &ctors {
        let delegating = c.inits.len() == 1 && c.inits[0].name == class.name;
        if c.body.is_none() && !delegating {
            result.warn(
                tree.tokens[c.name_tok].line,
                "constructor without in-class body; member initializers left in place",
            );
            return;
        }
    }

    for c in &ctors {
        if c.inits.len() == 1 && c.inits[0].name == class.name {
            // Delegating constructors receive the initializers through
            // their target when delegation is inlined.
            continue;
        }
        let existing: Vec<&str> = c.inits.iter().map(|e| e.name.as_str()).collect();
        let mut to_add: Vec<&MovedInit> = moved
            .iter()
            .filter(|mv| !existing.contains(&mv.name.as_str()))
            .collect();
        to_add.sort_by_key(|mv| mv.order);
        if to_add.is_empty() {
            continue;
        }
        let appended = to_add
            .iter()
            .map(|mv| format!("{}({})", mv.name, mv.args))
            .collect::<Vec<_>>()
            .join(", ");
        let edit = if let Some(last) = c.inits.last() {
            let at = tree.tokens[last.end_tok].end();
            Edit::new((at, at), format!(", {}", appended), Feature::MemberInit)
        } else {
            let at = tree.tokens[c.params_toks.1].end();
            Edit::new((at, at), format!(" : {}", appended), Feature::MemberInit)
        };
        removals.push(edit);
    }
    result.edits.append(&mut removals);
}

fn member_end(tree: &SyntaxTree, m: &Member) -> usize {
    let tok = match m {
        Member::Access { tok } => *tok + 1,
        Member::Field(f) => f.semi_tok,
        Member::Ctor(c) => c.end_tok,
        Member::Method(md) => md.end_tok,
        Member::Opaque { toks } => toks.1,
    };
    tree.tokens[tok.min(tree.tokens.len() - 1)].end()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::edit::apply_edits;
    use crate::syntax::{parse, tokenize};

    fn transformed(src: &str) -> (String, TransformResult) {
        let tree = parse(tokenize(src.as_bytes()).tokens).unwrap();
        let r = transform_member_init(&tree);
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
    fn generates_default_ctor_after_last_member() {
        let src = "struct A {\n  int a { 3 };\n  std::string s = \"s\";\n};\n";
        let (out, _) = transformed(src);
        let expected =
            "struct A {\n  int a;\n  std::string s;\npublic: A() : a(3), s(\"s\") {}\n};\n";
        assert_eq!(sig_tokens(&out), sig_tokens(expected));
    }

    #[test]
    fn union_keeps_single_initializer() {
        let src = "union B {\n  double a = 3.5;\n  int b;\n};\n";
        let (out, _) = transformed(src);
        let expected = "union B {\n  double a;\n  int b;\npublic: B() : a(3.5) {}\n};\n";
        assert_eq!(sig_tokens(&out), sig_tokens(expected));
    }

    #[test]
    fn appends_to_existing_ctor_init_list() {
        let src = "class C {\npublic:\n  C(int _b) : b(_b) {\n  }\nprivate:\n  int a = 1;\n  int b = 2;\n};\n";
        let (out, _) = transformed(src);
        let expected = "class C {\npublic:\n  C(int _b) : b(_b), a(1) {\n  }\nprivate:\n  int a;\n  int b;\n};\n";
        assert_eq!(sig_tokens(&out), sig_tokens(expected));
    }

    #[test]
    fn array_member_is_skipped_with_warning() {
        let src = "class A {\n  int a[3] = { 2, 3, 5 };\n};\n";
        let (out, r) = transformed(src);
        assert_eq!(out, src);
        assert_eq!(r.warnings.len(), 1);
    }

    #[test]
    fn multi_declarator_member_is_skipped_with_warning() {
        let src = "class A {\n  int b = 1, c = 2;\n};\n";
        let (out, r) = transformed(src);
        assert_eq!(out, src);
        assert_eq!(r.warnings.len(), 1);
    }

    #[test]
    fn delegating_ctor_is_not_extended() {
        let src = "class A {\n  A() {}\n  A(int x) : A() {\n  }\n  int a = 1;\n};\n";
        let (out, _) = transformed(src);
        let expected = "class A {\n  A() : a(1) {}\n  A(int x) : A() {\n  }\n  int a;\n};\n";
        assert_eq!(sig_tokens(&out), sig_tokens(expected));
    }
}
