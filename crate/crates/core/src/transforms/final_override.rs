//! Removal of the contextual `final` and `override` modifiers.
//!
//! They are identified positionally (after a class head or a member
//! function declarator), so identifiers with the same spelling elsewhere
//! are left untouched.

use crate::syntax::edit::{Edit, Feature};
use crate::syntax::parser::{Member, SyntaxTree};

use super::{collect_classes, ws_run_start, TransformResult};

pub fn strip_final_override(tree: &SyntaxTree) -> TransformResult {
    let mut result = TransformResult::default();
    for (class, _) in collect_classes(tree) {
        if let Some(ft) = class.final_tok {
            result.edits.push(delete_modifier(tree, ft));
        }
        for m in &class.members {
            if let Member::Method(md) = m {
                for &t in &md.modifier_toks {
                    result.edits.push(delete_modifier(tree, t));
                }
            }
        }
    }
    result
}

fn delete_modifier(tree: &SyntaxTree, tok: usize) -> Edit {
    let start = ws_run_start(&tree.tokens, tok);
    Edit::new((start, tree.tokens[tok].end()), String::new(), Feature::FinalOverride)
}
