//! Attribute removal: `[[ ... ]]` regions have no C++03 equivalent and
//! are simply discarded.

use crate::syntax::edit::{Edit, Feature};
use crate::syntax::lexer::TokenKind;
use crate::syntax::parser::SyntaxTree;

use super::{ws_run_end, ws_run_start, TransformResult};

pub fn strip_attributes(tree: &SyntaxTree) -> TransformResult {
    let mut result = TransformResult::default();
    let toks = &tree.tokens;
    let mut i = 0usize;
    while i < toks.len() {
        if toks[i].kind == TokenKind::Punct && toks[i].text == "[[" {
            // Attributes do not nest; the first `]]` closes the region.
            let close = (i + 1..toks.len())
                .find(|&j| toks[j].kind == TokenKind::Punct && toks[j].text == "]]");
            match close {
                Some(c) => {
                    // Delete one adjacent whitespace run along with the
                    // region, preferring the run that follows it.
                    let end = ws_run_end(toks, c);
                    let start = if end > toks[c].end() {
                        toks[i].offset
                    } else {
                        ws_run_start(toks, i)
                    };
                    result
                        .edits
                        .push(Edit::new((start, end), String::new(), Feature::Attribute));
                    i = c + 1;
                    continue;
                }
                None => {
                    result.warn(toks[i].line, "unterminated attribute region");
                }
            }
        }
        i += 1;
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::edit::apply_edits;
    use crate::syntax::{parse, tokenize};

    fn transformed(src: &str) -> String {
        let tree = parse(tokenize(src.as_bytes()).tokens).unwrap();
        let r = strip_attributes(&tree);
        assert!(!r.untransformable);
        let (out, _) = apply_edits(src.as_bytes(), &r.edits).unwrap();
        String::from_utf8(out).unwrap()
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
    fn deletes_attribute_list_before_declaration() {
        let out = transformed("[[attr1, attr2, attr3(args)]] int f();\n");
        assert_eq!(sig_tokens(&out), sig_tokens("int f();\n"));
    }

    #[test]
    fn deletes_namespaced_attribute() {
        let out = transformed("[[namespace::attr(args)]]\nint g();\n");
        assert_eq!(sig_tokens(&out), sig_tokens("int g();\n"));
    }

    #[test]
    fn leaves_subscripts_alone() {
        let src = "void f() {\n  a[b[i]] = 0;\n}\n";
        assert_eq!(transformed(src), src);
    }

    #[test]
    fn edits_confined_to_attribute_spans() {
        let src = "int before;\n[[nodiscard]] int f();\nint after;\n";
        let out = transformed(src);
        assert!(out.contains("int before;"));
        assert!(out.contains("int after;"));
        assert!(!out.contains("nodiscard"));
    }
}
