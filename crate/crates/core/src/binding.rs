//! Binding-aware term utilities: free variables, capture-avoiding
//! substitution, alpha-equivalence.

use std::collections::BTreeSet;

use crate::ast::Term;

/// Variables occurring free in `t` (not bound by an enclosing comprehension).
pub fn free_vars(t: &Term) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    collect_free(t, &mut Vec::new(), &mut out);
    out
}

fn collect_free(t: &Term, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
    match t {
        Term::Var(x) => {
            if !bound.iter().any(|b| b == x) {
                out.insert(x.clone());
            }
        }
        Term::SetComp { body, var, source } | Term::BagComp { body, var, source } => {
            collect_free(source, bound, out);
            bound.push(var.clone());
            collect_free(body, bound, out);
            bound.pop();
        }
        _ => {
            for c in t.children() {
                collect_free(c, bound, out);
            }
        }
    }
}

/// Every identifier mentioned anywhere in `t`, free or bound, including
/// binders. Used to pick fresh names that collide with nothing.
pub fn all_names(t: &Term, out: &mut BTreeSet<String>) {
    match t {
        Term::Var(x) => {
            out.insert(x.clone());
        }
        Term::SetComp { body, var, source } | Term::BagComp { body, var, source } => {
            out.insert(var.clone());
            all_names(source, out);
            all_names(body, out);
        }
        _ => {
            for c in t.children() {
                all_names(c, out);
            }
        }
    }
}

/// Deterministic fresh name: `base` with the smallest numeric suffix that
/// avoids every name in `avoid`.
pub fn fresh_name(base: &str, avoid: &BTreeSet<String>) -> String {
    let mut n = 1u64;
    loop {
        let cand = format!("{base}{n}");
        if !avoid.contains(&cand) {
            return cand;
        }
        n += 1;
    }
}

/// Capture-avoiding substitution of `replacement` for free occurrences of
/// `x` in `t`. Binders that would capture a free variable of the
/// replacement are renamed first, using the deterministic fresh-name
/// scheme.
pub fn subst(t: &Term, x: &str, replacement: &Term) -> Term {
    let repl_free = free_vars(replacement);
    subst_in(t, x, replacement, &repl_free)
}

fn subst_in(t: &Term, x: &str, repl: &Term, repl_free: &BTreeSet<String>) -> Term {
    match t {
        Term::Var(y) => {
            if y == x {
                repl.clone()
            } else {
                t.clone()
            }
        }
        Term::SetComp { body, var, source } | Term::BagComp { body, var, source } => {
            let is_set = matches!(t, Term::SetComp { .. });
            let new_source = subst_in(source, x, repl, repl_free);
            let (new_var, new_body) = if var == x {
                (var.clone(), (**body).clone())
            } else if repl_free.contains(var) && free_vars(body).contains(x) {
                // The binder would capture a free variable of the
                // replacement; rename it before substituting.
                let mut avoid = BTreeSet::new();
                all_names(body, &mut avoid);
                all_names(repl, &mut avoid);
                avoid.insert(x.to_string());
                let fresh = fresh_name(var, &avoid);
                let renamed = subst(body, var, &Term::Var(fresh.clone()));
                (fresh, subst_in(&renamed, x, repl, repl_free))
            } else {
                (var.clone(), subst_in(body, x, repl, repl_free))
            };
            if is_set {
                Term::set_comp(new_body, &new_var, new_source)
            } else {
                Term::bag_comp(new_body, &new_var, new_source)
            }
        }
        Term::Const(c, args) => Term::Const(
            c.clone(),
            args.iter().map(|a| subst_in(a, x, repl, repl_free)).collect(),
        ),
        Term::Record(fields) => Term::Record(
            fields
                .iter()
                .map(|(l, v)| (l.clone(), subst_in(v, x, repl, repl_free)))
                .collect(),
        ),
        Term::Project(inner, l) => {
            Term::Project(Box::new(subst_in(inner, x, repl, repl_free)), l.clone())
        }
        Term::WhereSet(c, b) => Term::WhereSet(
            Box::new(subst_in(c, x, repl, repl_free)),
            Box::new(subst_in(b, x, repl, repl_free)),
        ),
        Term::WhereBag(c, b) => Term::WhereBag(
            Box::new(subst_in(c, x, repl, repl_free)),
            Box::new(subst_in(b, x, repl, repl_free)),
        ),
        Term::EmptySet(_) | Term::EmptyBag(_) => t.clone(),
        Term::SingletonSet(m) => Term::singleton_set(subst_in(m, x, repl, repl_free)),
        Term::SingletonBag(m) => Term::singleton_bag(subst_in(m, x, repl, repl_free)),
        Term::Union(a, b) => Term::union(
            subst_in(a, x, repl, repl_free),
            subst_in(b, x, repl, repl_free),
        ),
        Term::BagUnion(a, b) => Term::bag_union(
            subst_in(a, x, repl, repl_free),
            subst_in(b, x, repl, repl_free),
        ),
        Term::Dedup(m) => Term::dedup(subst_in(m, x, repl, repl_free)),
        Term::Promote(m) => Term::promote(subst_in(m, x, repl, repl_free)),
    }
}

/// Alpha-equivalence: identical up to consistent renaming of bound
/// variables. Record literals are compared label-wise, so field order does
/// not matter, but everything else is strictly syntactic.
pub fn alpha_eq(a: &Term, b: &Term) -> bool {
    alpha_eq_in(a, b, &mut Vec::new())
}

fn alpha_eq_in(a: &Term, b: &Term, scope: &mut Vec<(String, String)>) -> bool {
    match (a, b) {
        (Term::Var(x), Term::Var(y)) => {
            for (bx, by) in scope.iter().rev() {
                let hit_a = bx == x;
                let hit_b = by == y;
                if hit_a || hit_b {
                    return hit_a && hit_b;
                }
            }
            x == y
        }
        (
            Term::SetComp { body: ba, var: va, source: sa },
            Term::SetComp { body: bb, var: vb, source: sb },
        )
        | (
            Term::BagComp { body: ba, var: va, source: sa },
            Term::BagComp { body: bb, var: vb, source: sb },
        ) => {
            if std::mem::discriminant(a) != std::mem::discriminant(b) {
                return false;
            }
            if !alpha_eq_in(sa, sb, scope) {
                return false;
            }
            scope.push((va.clone(), vb.clone()));
            let ok = alpha_eq_in(ba, bb, scope);
            scope.pop();
            ok
        }
        (Term::Const(ca, aa), Term::Const(cb, ab)) => {
            ca == cb
                && aa.len() == ab.len()
                && aa.iter().zip(ab).all(|(x, y)| alpha_eq_in(x, y, scope))
        }
        (Term::Record(fa), Term::Record(fb)) => {
            if fa.len() != fb.len() {
                return false;
            }
            let mut sa: Vec<_> = fa.iter().collect();
            let mut sb: Vec<_> = fb.iter().collect();
            sa.sort_by(|x, y| x.0.cmp(&y.0));
            sb.sort_by(|x, y| x.0.cmp(&y.0));
            sa.iter()
                .zip(&sb)
                .all(|((la, ta), (lb, tb))| la == lb && alpha_eq_in(ta, tb, scope))
        }
        (Term::Project(ta, la), Term::Project(tb, lb)) => la == lb && alpha_eq_in(ta, tb, scope),
        (Term::WhereSet(ca, ba), Term::WhereSet(cb, bb))
        | (Term::WhereBag(ca, ba), Term::WhereBag(cb, bb)) => {
            alpha_eq_in(ca, cb, scope) && alpha_eq_in(ba, bb, scope)
        }
        (Term::EmptySet(ta), Term::EmptySet(tb)) | (Term::EmptyBag(ta), Term::EmptyBag(tb)) => {
            ta == tb
        }
        (Term::SingletonSet(ma), Term::SingletonSet(mb))
        | (Term::SingletonBag(ma), Term::SingletonBag(mb))
        | (Term::Dedup(ma), Term::Dedup(mb))
        | (Term::Promote(ma), Term::Promote(mb)) => alpha_eq_in(ma, mb, scope),
        (Term::Union(xa, ya), Term::Union(xb, yb))
        | (Term::BagUnion(xa, ya), Term::BagUnion(xb, yb)) => {
            alpha_eq_in(xa, xb, scope) && alpha_eq_in(ya, yb, scope)
        }
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::Term;

    #[test]
    fn free_vars_base_and_binder() {
        assert_eq!(free_vars(&Term::var("x")), ["x".to_string()].into());
        // binder removes x, source variable stays free
        let t = Term::set_comp(Term::singleton_set(Term::var("x")), "x", Term::var("t"));
        assert_eq!(free_vars(&t), ["t".to_string()].into());
    }

    #[test]
    fn free_vars_join_generator() {
        // iota (delta U union delta V)
        let t = Term::promote(Term::union(
            Term::dedup(Term::var("U")),
            Term::dedup(Term::var("V")),
        ));
        assert_eq!(free_vars(&t), ["U".to_string(), "V".to_string()].into());
    }

    #[test]
    fn subst_base_and_shadowing() {
        let rec = Term::record(vec![("l", Term::int(1))]);
        assert_eq!(subst(&Term::var("x"), "x", &rec), rec);

        let shadowed = Term::set_comp(Term::singleton_set(Term::var("x")), "x", Term::var("y"));
        assert_eq!(subst(&shadowed, "x", &rec), shadowed);
    }

    #[test]
    fn subst_renames_capturing_binder() {
        // for y in T yield set {<a = x, b = y>}, substituting y for x
        let t = Term::set_comp(
            Term::singleton_set(Term::record(vec![("a", Term::var("x")), ("b", Term::var("y"))])),
            "y",
            Term::var("T"),
        );
        let out = subst(&t, "x", &Term::var("y"));
        match &out {
            Term::SetComp { body, var, .. } => {
                assert_ne!(var, "y");
                let expected = Term::singleton_set(Term::record(vec![
                    ("a", Term::var("y")),
                    ("b", Term::var(var)),
                ]));
                assert_eq!(**body, expected);
            }
            _ => panic!("expected comprehension"),
        }
        // the result is alpha-equal regardless of the fresh name chosen
        let reference = Term::set_comp(
            Term::singleton_set(Term::record(vec![("a", Term::var("y")), ("b", Term::var("z"))])),
            "z",
            Term::var("T"),
        );
        assert!(alpha_eq(&out, &reference));
    }

    #[test]
    fn alpha_eq_examples() {
        let a = Term::set_comp(Term::singleton_set(Term::var("x")), "x", Term::var("T"));
        let b = Term::set_comp(Term::singleton_set(Term::var("y")), "y", Term::var("T"));
        assert!(alpha_eq(&a, &b));

        let r1 = Term::singleton_set(Term::record(vec![("a", Term::int(1)), ("b", Term::int(2))]));
        let r2 = Term::singleton_set(Term::record(vec![("b", Term::int(2)), ("a", Term::int(1))]));
        assert!(alpha_eq(&r1, &r2));

        let u1 = Term::union(Term::var("A"), Term::var("B"));
        let u2 = Term::union(Term::var("B"), Term::var("A"));
        assert!(!alpha_eq(&u1, &u2));
    }

    #[test]
    fn alpha_eq_distinguishes_bound_from_free() {
        // for x in T yield set {x}  vs  for y in T yield set {x}
        let a = Term::set_comp(Term::singleton_set(Term::var("x")), "x", Term::var("T"));
        let b = Term::set_comp(Term::singleton_set(Term::var("x")), "y", Term::var("T"));
        assert!(!alpha_eq(&a, &b));
    }
}
