//! Abstract syntax for the set/bag query calculus.
//!
//! Terms and types are plain immutable trees. Collection types come in two
//! flavours, sets `{T}` and bags `{|T|}`, connected by the coercions `delta`
//! (bag to set, duplicate elimination) and `iota` (set to bag, multiplicity 1).

use std::fmt;

/// Atomic types. `Bool` doubles as the type of `where` conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum AtomType {
    Bool,
    Int,
    String,
}

impl fmt::Display for AtomType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AtomType::Bool => write!(f, "Bool"),
            AtomType::Int => write!(f, "Int"),
            AtomType::String => write!(f, "String"),
        }
    }
}

/// Types: atoms, records with named fields, sets and bags.
///
/// Record types are equal iff they denote the same label-to-type mapping;
/// the written field order is preserved for display but ignored by `==`.
#[derive(Debug, Clone, Eq)]
pub enum Type {
    Atom(AtomType),
    Record(Vec<(String, Type)>),
    SetOf(Box<Type>),
    BagOf(Box<Type>),
}

impl PartialEq for Type {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Type::Atom(a), Type::Atom(b)) => a == b,
            (Type::Record(fs), Type::Record(gs)) => {
                fs.len() == gs.len()
                    && fs.iter().all(|(l, t)| {
                        gs.iter().any(|(m, u)| l == m && t == u)
                    })
            }
            (Type::SetOf(a), Type::SetOf(b)) => a == b,
            (Type::BagOf(a), Type::BagOf(b)) => a == b,
            _ => false,
        }
    }
}

impl Type {
    pub fn set_of(t: Type) -> Type {
        Type::SetOf(Box::new(t))
    }

    pub fn bag_of(t: Type) -> Type {
        Type::BagOf(Box::new(t))
    }

    pub fn record(fields: Vec<(&str, Type)>) -> Type {
        Type::Record(fields.into_iter().map(|(l, t)| (l.to_string(), t)).collect())
    }

    /// Element type of a set or bag type.
    pub fn element(&self) -> Option<&Type> {
        match self {
            Type::SetOf(t) | Type::BagOf(t) => Some(t),
            _ => None,
        }
    }

    /// A flat collection: a set or bag whose elements are atoms or records
    /// of atoms. This is the shape of an SQL table.
    pub fn is_flat_collection(&self) -> bool {
        match self {
            Type::SetOf(t) | Type::BagOf(t) => match &**t {
                Type::Atom(_) => true,
                Type::Record(fs) => fs.iter().all(|(_, t)| matches!(t, Type::Atom(_))),
                _ => false,
            },
            _ => false,
        }
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Type::Atom(a) => write!(f, "{a}"),
            Type::Record(fields) => {
                write!(f, "<")?;
                for (i, (l, t)) in fields.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{l}: {t}")?;
                }
                write!(f, ">")
            }
            Type::SetOf(t) => write!(f, "{{{t}}}"),
            Type::BagOf(t) => write!(f, "{{|{t}|}}"),
        }
    }
}

/// The constant language: literals plus a fixed set of operators over atoms.
///
/// Constants consume and produce atoms only; there are no collection-typed
/// constants.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Const {
    Bool(bool),
    Int(i64),
    Str(String),
    Eq,
    Ne,
    Lt,
    And,
    Or,
    Not,
}

impl Const {
    pub fn name(&self) -> String {
        match self {
            Const::Bool(b) => b.to_string(),
            Const::Int(n) => n.to_string(),
            Const::Str(s) => format!("{s:?}"),
            Const::Eq => "=".into(),
            Const::Ne => "<>".into(),
            Const::Lt => "<".into(),
            Const::And => "and".into(),
            Const::Or => "or".into(),
            Const::Not => "not".into(),
        }
    }

    pub fn arity(&self) -> usize {
        match self {
            Const::Bool(_) | Const::Int(_) | Const::Str(_) => 0,
            Const::Not => 1,
            _ => 2,
        }
    }
}

/// Signature of a constant: argument and result types, all atomic.
///
/// The comparison operators are polymorphic over the atomic type of their
/// operands; `args` of `SamePair` stands for two operands of one shared
/// atomic type.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstSig {
    pub name: String,
    pub args: ConstArgs,
    pub result: AtomType,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConstArgs {
    Exact(Vec<AtomType>),
    /// Two arguments of the same atomic type.
    SamePair,
}

impl Const {
    pub fn sig(&self) -> ConstSig {
        let (args, result) = match self {
            Const::Bool(_) => (ConstArgs::Exact(vec![]), AtomType::Bool),
            Const::Int(_) => (ConstArgs::Exact(vec![]), AtomType::Int),
            Const::Str(_) => (ConstArgs::Exact(vec![]), AtomType::String),
            Const::Eq | Const::Ne | Const::Lt => (ConstArgs::SamePair, AtomType::Bool),
            Const::And | Const::Or => {
                (ConstArgs::Exact(vec![AtomType::Bool, AtomType::Bool]), AtomType::Bool)
            }
            Const::Not => (ConstArgs::Exact(vec![AtomType::Bool]), AtomType::Bool),
        };
        ConstSig { name: self.name(), args, result }
    }
}

/// Terms of the calculus.
///
/// Comprehensions bind exactly one variable; multi-generator comprehensions
/// in the surface syntax are sugar for nested single-binder ones. Empty
/// collections carry an optional element-type annotation used when the
/// checker cannot recover the type from context.
#[derive(Debug, Clone, PartialEq)]
pub enum Term {
    Var(String),
    Const(Const, Vec<Term>),
    Record(Vec<(String, Term)>),
    Project(Box<Term>, String),
    /// `where set c do b` — set-typed conditional.
    WhereSet(Box<Term>, Box<Term>),
    /// `where bag c do b` — bag-typed conditional.
    WhereBag(Box<Term>, Box<Term>),
    EmptySet(Option<Type>),
    SingletonSet(Box<Term>),
    Union(Box<Term>, Box<Term>),
    /// `for x in source yield set body`.
    SetComp { body: Box<Term>, var: String, source: Box<Term> },
    EmptyBag(Option<Type>),
    SingletonBag(Box<Term>),
    BagUnion(Box<Term>, Box<Term>),
    /// `for x in source yield bag body`.
    BagComp { body: Box<Term>, var: String, source: Box<Term> },
    /// `delta m` — duplicate elimination, bag to set.
    Dedup(Box<Term>),
    /// `iota m` — promotion, set to bag with multiplicity 1.
    Promote(Box<Term>),
}

impl Term {
    pub fn var(x: &str) -> Term {
        Term::Var(x.to_string())
    }

    pub fn bool(b: bool) -> Term {
        Term::Const(Const::Bool(b), vec![])
    }

    pub fn int(n: i64) -> Term {
        Term::Const(Const::Int(n), vec![])
    }

    pub fn str(s: &str) -> Term {
        Term::Const(Const::Str(s.to_string()), vec![])
    }

    pub fn record(fields: Vec<(&str, Term)>) -> Term {
        Term::Record(fields.into_iter().map(|(l, t)| (l.to_string(), t)).collect())
    }

    pub fn project(t: Term, label: &str) -> Term {
        Term::Project(Box::new(t), label.to_string())
    }

    pub fn where_set(cond: Term, body: Term) -> Term {
        Term::WhereSet(Box::new(cond), Box::new(body))
    }

    pub fn where_bag(cond: Term, body: Term) -> Term {
        Term::WhereBag(Box::new(cond), Box::new(body))
    }

    pub fn singleton_set(t: Term) -> Term {
        Term::SingletonSet(Box::new(t))
    }

    pub fn singleton_bag(t: Term) -> Term {
        Term::SingletonBag(Box::new(t))
    }

    pub fn union(a: Term, b: Term) -> Term {
        Term::Union(Box::new(a), Box::new(b))
    }

    pub fn bag_union(a: Term, b: Term) -> Term {
        Term::BagUnion(Box::new(a), Box::new(b))
    }

    pub fn set_comp(body: Term, var: &str, source: Term) -> Term {
        Term::SetComp { body: Box::new(body), var: var.to_string(), source: Box::new(source) }
    }

    pub fn bag_comp(body: Term, var: &str, source: Term) -> Term {
        Term::BagComp { body: Box::new(body), var: var.to_string(), source: Box::new(source) }
    }

    pub fn dedup(t: Term) -> Term {
        Term::Dedup(Box::new(t))
    }

    pub fn promote(t: Term) -> Term {
        Term::Promote(Box::new(t))
    }

    pub fn eq(a: Term, b: Term) -> Term {
        Term::Const(Const::Eq, vec![a, b])
    }

    pub fn and(a: Term, b: Term) -> Term {
        Term::Const(Const::And, vec![a, b])
    }

    pub fn or(a: Term, b: Term) -> Term {
        Term::Const(Const::Or, vec![a, b])
    }

    pub fn not(a: Term) -> Term {
        Term::Const(Const::Not, vec![a])
    }

    /// Immediate subterms, in the fixed traversal order used for rewrite
    /// positions: comprehension sources before bodies, conditions before
    /// branches, record fields and constant arguments left to right.
    pub fn children(&self) -> Vec<&Term> {
        match self {
            Term::Var(_) | Term::EmptySet(_) | Term::EmptyBag(_) => vec![],
            Term::Const(_, args) => args.iter().collect(),
            Term::Record(fields) => fields.iter().map(|(_, t)| t).collect(),
            Term::Project(t, _) => vec![t],
            Term::WhereSet(c, b) | Term::WhereBag(c, b) => vec![c, b],
            Term::SingletonSet(t) | Term::SingletonBag(t) => vec![t],
            Term::Union(a, b) | Term::BagUnion(a, b) => vec![a, b],
            Term::SetComp { body, source, .. } | Term::BagComp { body, source, .. } => {
                vec![source, body]
            }
            Term::Dedup(t) | Term::Promote(t) => vec![t],
        }
    }

    pub fn children_mut(&mut self) -> Vec<&mut Term> {
        match self {
            Term::Var(_) | Term::EmptySet(_) | Term::EmptyBag(_) => vec![],
            Term::Const(_, args) => args.iter_mut().collect(),
            Term::Record(fields) => fields.iter_mut().map(|(_, t)| t).collect(),
            Term::Project(t, _) => vec![t],
            Term::WhereSet(c, b) | Term::WhereBag(c, b) => vec![c, b],
            Term::SingletonSet(t) | Term::SingletonBag(t) => vec![t],
            Term::Union(a, b) | Term::BagUnion(a, b) => vec![a, b],
            Term::SetComp { body, source, .. } | Term::BagComp { body, source, .. } => {
                vec![source, body]
            }
            Term::Dedup(t) | Term::Promote(t) => vec![t],
        }
    }

    /// Subterm at a child-index path, if the path is valid.
    pub fn subterm_at(&self, path: &[usize]) -> Option<&Term> {
        let mut cur = self;
        for &i in path {
            cur = *cur.children().get(i)?;
        }
        Some(cur)
    }

    /// Copy of `self` with the subterm at `path` replaced.
    pub fn replace_at(&self, path: &[usize], new: Term) -> Option<Term> {
        if path.is_empty() {
            return Some(new);
        }
        let mut out = self.clone();
        {
            let mut cur = &mut out;
            for &i in &path[..path.len() - 1] {
                let kids = cur.children_mut();
                cur = kids.into_iter().nth(i)?;
            }
            let kids = cur.children_mut();
            let slot = kids.into_iter().nth(*path.last().unwrap())?;
            *slot = new;
        }
        Some(out)
    }

    /// Number of nodes, used by shrinking and size limits.
    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|c| c.size()).sum::<usize>()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn record_type_equality_ignores_field_order() {
        let a = Type::record(vec![("a", Type::Atom(AtomType::Int)), ("b", Type::Atom(AtomType::Bool))]);
        let b = Type::record(vec![("b", Type::Atom(AtomType::Bool)), ("a", Type::Atom(AtomType::Int))]);
        assert_eq!(a, b);
        let c = Type::record(vec![("a", Type::Atom(AtomType::Bool)), ("b", Type::Atom(AtomType::Int))]);
        assert_ne!(a, c);
    }

    #[test]
    fn flatness() {
        let flat = Type::bag_of(Type::record(vec![("Id", Type::Atom(AtomType::Int))]));
        assert!(flat.is_flat_collection());
        let nested = Type::set_of(Type::set_of(Type::Atom(AtomType::Int)));
        assert!(!nested.is_flat_collection());
        let nested_field = Type::bag_of(Type::record(vec![(
            "a",
            Type::set_of(Type::Atom(AtomType::Int)),
        )]));
        assert!(!nested_field.is_flat_collection());
        assert!(Type::set_of(Type::Atom(AtomType::Int)).is_flat_collection());
    }

    #[test]
    fn replace_at_roundtrip() {
        let t = Term::union(Term::singleton_set(Term::int(1)), Term::EmptySet(None));
        let sub = t.subterm_at(&[0, 0]).unwrap().clone();
        assert_eq!(sub, Term::int(1));
        let t2 = t.replace_at(&[0, 0], Term::int(2)).unwrap();
        assert_eq!(t2.subterm_at(&[0, 0]), Some(&Term::int(2)));
    }
}
