//! `using` type aliases rewritten as typedefs; alias templates become a
//! wrapper struct with a nested `type` typedef, and every use gains the
//! `::type` suffix.

use crate::syntax::edit::{Edit, Feature};
use crate::syntax::lexer::TokenKind;
use crate::syntax::parser::{matching_angle_tok, AliasDecl, Item, SyntaxTree};

use super::{next_sig, TransformResult};

pub fn rewrite_type_alias(tree: &SyntaxTree) -> TransformResult {
    let mut result = TransformResult::default();
    let mut aliases = Vec::new();
    let mut imports = Vec::new();
    let mut template_ranges = Vec::new();
    collect(&tree.items, &mut aliases, &mut imports, &mut template_ranges);
    for alias in aliases {
        rewrite_one(tree, alias, &imports, &template_ranges, &mut result);
    }
    result
}

fn collect<'a>(
    items: &'a [Item],
    aliases: &mut Vec<&'a AliasDecl>,
    imports: &mut Vec<(usize, usize)>,
    template_ranges: &mut Vec<(usize, usize)>,
) {
    for item in items {
        match item {
            Item::UsingAlias(a) => {
                aliases.push(a);
                if a.template_toks.is_some() {
                    template_ranges.push((a.first_tok, a.semi_tok));
                }
            }
            Item::UsingImport { toks } => imports.push(*toks),
            Item::Namespace { items, .. } => {
                collect(items, aliases, imports, template_ranges)
            }
            Item::Function(f) if f.is_template => {
                template_ranges.push((f.first_tok, f.end_tok));
            }
            Item::Class(c) if c.is_template => {
                template_ranges.push((c.first_tok, c.semi_tok.unwrap_or(c.rbrace)));
            }
            _ => {}
        }
    }
}

fn rewrite_one(
    tree: &SyntaxTree,
    alias: &AliasDecl,
    imports: &[(usize, usize)],
    template_ranges: &[(usize, usize)],
    result: &mut TransformResult,
) {
    let toks = &tree.tokens;
    let line = toks[alias.name_tok].line;
    let imported = imports.iter().any(|&(s, e)| {
        (s..=e).any(|i| toks[i].kind == TokenKind::Identifier && toks[i].text == alias.name)
    });
    if imported {
        result.warn(line, format!("alias `{}` shadows a using-import", alias.name));
        return;
    }

    let own = (alias.first_tok, alias.semi_tok);
    let uses: Vec<usize> = (0..toks.len())
        .filter(|&i| {
            toks[i].kind == TokenKind::Identifier
                && toks[i].text == alias.name
                && !(own.0 <= i && i <= own.1)
        })
        .collect();

    // Validate every use before touching anything so a problematic one
    // does not leave the unit half rewritten.
    let mut suffix_at = Vec::new();
    if alias.template_toks.is_some() {
        for &u in &uses {
            if template_ranges
                .iter()
                .any(|&(s, e)| s <= u && u <= e && !(s == own.0 && e == own.1))
            {
                result.warn(
                    toks[u].line,
                    format!("use of alias template `{}` in a template needs typename", alias.name),
                );
                return;
            }
            let Some(lt) = next_sig(toks, u).filter(|&n| toks[n].is("<")) else {
                result.warn(
                    toks[u].line,
                    format!("alias template `{}` used without arguments", alias.name),
                );
                return;
            };
            let Some(gt) = matching_angle_tok(toks, lt) else {
                result.warn(toks[u].line, "unbalanced template argument list");
                return;
            };
            if toks[gt].text == ">>" {
                result.warn(
                    toks[u].line,
                    "alias use closed by `>>` cannot take the ::type suffix",
                );
                return;
            }
            suffix_at.push(toks[gt].end());
        }
    }

    let (start, end) = (toks[alias.first_tok].offset, toks[alias.semi_tok].end());
    let target = tree.text(alias.target_toks);
    let replacement = match alias.template_toks {
        Some(hdr) => format!(
            "{}\nstruct {} {{\n  typedef {} type;\n}};",
            tree.text(hdr),
            alias.name,
            target
        ),
        None => format!("typedef {} {};", target, alias.name),
    };
    result.edits.push(Edit::new((start, end), replacement, Feature::TypeAlias));
    for at in suffix_at {
        result
            .edits
            .push(Edit::new((at, at), "::type".to_string(), Feature::TypeAlias));
    }
}
