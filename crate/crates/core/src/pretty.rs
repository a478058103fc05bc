//! Pretty-printer for terms.
//!
//! Output re-parses to an alpha-equal term: `parse_term(pretty_print(t))`
//! is alpha-equal to `t` for every well-formed term. Record field order is
//! preserved. Comprehension chains of the same kind are printed with the
//! multi-generator sugar.

use std::fmt::Write;

use crate::ast::{Const, Term};

// Precedence levels, loosest first. Comprehensions and conditionals extend
// to the right and are parenthesized in any operand position.
const P_TOP: u8 = 0;
const P_OR: u8 = 0;
const P_AND: u8 = 1;
const P_NOT: u8 = 2;
const P_CMP: u8 = 3;
const P_UNION: u8 = 4;
const P_PREFIX: u8 = 5;
const P_PROJECT: u8 = 6;
const P_ATOM: u8 = 7;

pub fn pretty_print(t: &Term) -> String {
    let mut out = String::new();
    write_term(&mut out, t, P_TOP);
    out
}

fn prec_of(t: &Term) -> u8 {
    match t {
        Term::Const(Const::Or, args) if args.len() == 2 => P_OR,
        Term::Const(Const::And, args) if args.len() == 2 => P_AND,
        Term::Const(Const::Not, args) if args.len() == 1 => P_NOT,
        Term::Const(Const::Eq | Const::Ne | Const::Lt, args) if args.len() == 2 => P_CMP,
        Term::Union(..) | Term::BagUnion(..) => P_UNION,
        Term::Dedup(_) | Term::Promote(_) => P_PREFIX,
        Term::Project(..) => P_PROJECT,
        Term::SetComp { .. } | Term::BagComp { .. } | Term::WhereSet(..) | Term::WhereBag(..) => {
            P_TOP
        }
        // annotated empties are delimited by their type, but parenthesizing
        // them in operand position keeps the annotation visually attached
        Term::EmptySet(Some(_)) | Term::EmptyBag(Some(_)) => P_TOP,
        _ => P_ATOM,
    }
}

fn write_term(out: &mut String, t: &Term, min: u8) {
    let this = prec_of(t);
    let parens = this < min;
    if parens {
        out.push('(');
    }
    match t {
        Term::Var(x) => out.push_str(x),
        Term::Const(c, args) => write_const(out, c, args),
        Term::Record(fields) => {
            out.push('<');
            for (i, (l, v)) in fields.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write!(out, "{l} = ").unwrap();
                write_term(out, v, P_AND);
            }
            out.push('>');
        }
        Term::Project(base, l) => {
            write_term(out, base, P_PROJECT);
            write!(out, ".{l}").unwrap();
        }
        Term::WhereSet(c, b) | Term::WhereBag(c, b) => {
            let kind = if matches!(t, Term::WhereSet(..)) { "set" } else { "bag" };
            write!(out, "where {kind} ").unwrap();
            write_term(out, c, P_AND);
            out.push_str(" do ");
            write_term(out, b, P_TOP);
        }
        Term::EmptySet(ann) => match ann {
            None => out.push_str("empty"),
            Some(elem) => write!(out, "empty : {{{elem}}}").unwrap(),
        },
        Term::EmptyBag(ann) => match ann {
            None => out.push_str("emptybag"),
            Some(elem) => write!(out, "emptybag : {{|{elem}|}}").unwrap(),
        },
        Term::SingletonSet(m) => {
            out.push('{');
            write_term(out, m, P_TOP);
            out.push('}');
        }
        Term::SingletonBag(m) => {
            out.push_str("{|");
            write_term(out, m, P_TOP);
            out.push_str("|}");
        }
        Term::Union(a, b) | Term::BagUnion(a, b) => {
            let op = if matches!(t, Term::Union(..)) { "union" } else { "unionall" };
            write_term(out, a, P_UNION);
            write!(out, " {op} ").unwrap();
            write_term(out, b, P_UNION + 1);
        }
        Term::SetComp { .. } | Term::BagComp { .. } => write_comp(out, t),
        Term::Dedup(m) => {
            out.push_str("delta ");
            write_term(out, m, P_PREFIX);
        }
        Term::Promote(m) => {
            out.push_str("iota ");
            write_term(out, m, P_PREFIX);
        }
    }
    if parens {
        out.push(')');
    }
}

fn write_comp(out: &mut String, t: &Term) {
    let is_set = matches!(t, Term::SetComp { .. });
    out.push_str("for ");
    let mut cur = t;
    let mut first = true;
    loop {
        match cur {
            Term::SetComp { body, var, source } if is_set => {
                if !first {
                    out.push_str(", ");
                }
                write!(out, "{var} in ").unwrap();
                write_term(out, source, P_AND);
                first = false;
                cur = body;
            }
            Term::BagComp { body, var, source } if !is_set => {
                if !first {
                    out.push_str(", ");
                }
                write!(out, "{var} in ").unwrap();
                write_term(out, source, P_AND);
                first = false;
                cur = body;
            }
            _ => break,
        }
    }
    write!(out, " yield {} ", if is_set { "set" } else { "bag" }).unwrap();
    write_term(out, cur, P_TOP);
}

fn write_const(out: &mut String, c: &Const, args: &[Term]) {
    match (c, args) {
        (Const::Bool(b), []) => write!(out, "{b}").unwrap(),
        (Const::Int(n), []) => write!(out, "{n}").unwrap(),
        (Const::Str(s), []) => write_string(out, s),
        (Const::Eq, [a, b]) | (Const::Ne, [a, b]) | (Const::Lt, [a, b]) => {
            let op = match c {
                Const::Eq => "=",
                Const::Ne => "<>",
                _ => "<",
            };
            write_term(out, a, P_UNION);
            write!(out, " {op} ").unwrap();
            write_term(out, b, P_UNION);
        }
        (Const::And, [a, b]) => {
            write_term(out, a, P_AND);
            out.push_str(" and ");
            write_term(out, b, P_AND + 1);
        }
        (Const::Or, [a, b]) => {
            write_term(out, a, P_OR);
            out.push_str(" or ");
            write_term(out, b, P_OR + 1);
        }
        (Const::Not, [a]) => {
            out.push_str("not ");
            write_term(out, a, P_NOT);
        }
        // constants are built with fixed arities by every constructor in
        // this crate
        _ => unreachable!("constant {:?} applied to {} arguments", c, args.len()),
    }
}

fn write_string(out: &mut String, s: &str) {
    out.push('"');
    for ch in s.chars() {
        match ch {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out.push('"');
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::Term;
    use crate::binding::alpha_eq;
    use crate::parse::parse_term;

    fn roundtrips(t: &Term) {
        let text = pretty_print(t);
        let back = parse_term(&text).unwrap_or_else(|e| panic!("reparse of `{text}`: {e}"));
        assert!(alpha_eq(&back, t), "`{text}` reparsed to a different term");
    }

    #[test]
    fn dedup_of_empty_bag() {
        let t = Term::dedup(Term::EmptyBag(None));
        assert_eq!(pretty_print(&t), "delta emptybag");
        roundtrips(&t);
    }

    #[test]
    fn record_field_order_preserved() {
        let t = Term::record(vec![("b", Term::int(2)), ("a", Term::int(1))]);
        assert_eq!(pretty_print(&t), "<b = 2, a = 1>");
    }

    #[test]
    fn comp_as_union_operand_is_parenthesized() {
        let comp = Term::set_comp(Term::singleton_set(Term::var("x")), "x", Term::var("T"));
        let t = Term::union(comp.clone(), Term::var("U"));
        assert_eq!(
            pretty_print(&t),
            "(for x in T yield set {x}) union U"
        );
        roundtrips(&t);
        roundtrips(&Term::union(Term::var("U"), comp));
    }

    #[test]
    fn generator_sugar() {
        let t = Term::bag_comp(
            Term::bag_comp(Term::singleton_bag(Term::var("y")), "y", Term::var("U")),
            "x",
            Term::var("T"),
        );
        assert_eq!(pretty_print(&t), "for x in T, y in U yield bag {|y|}");
        roundtrips(&t);
    }

    #[test]
    fn operator_precedence_roundtrips() {
        let t = Term::or(
            Term::and(Term::var("a"), Term::not(Term::var("b"))),
            Term::eq(Term::project(Term::var("x"), "f"), Term::int(-3)),
        );
        assert_eq!(pretty_print(&t), "a and not b or x.f = -3");
        roundtrips(&t);
    }

    #[test]
    fn projection_of_prefix_needs_parens() {
        let t = Term::project(Term::dedup(Term::var("T")), "l");
        assert_eq!(pretty_print(&t), "(delta T).l");
        roundtrips(&t);
    }

    #[test]
    fn annotated_empties() {
        let t = Term::promote(Term::EmptySet(Some(crate::ast::Type::record(vec![(
            "Id",
            crate::ast::Type::Atom(crate::ast::AtomType::Int),
        )]))));
        assert_eq!(pretty_print(&t), "iota (empty : {<Id: Int>})");
        roundtrips(&t);
    }

    #[test]
    fn string_escapes() {
        let t = Term::str("a\"b\\c\nd");
        roundtrips(&t);
    }
}
