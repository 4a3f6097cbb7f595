//! Compound entropy expressions over the comma / colon / bar grammar.
//!
//! Precedence from tightest to loosest is `,` then `:` then `|`; all three
//! are left-associative. Expansion maps an expression to a region of the
//! Boolean algebra generated by its variables (comma = union, colon =
//! intersection, bar = difference) and writes the measure of that region as
//! an integer combination of joint entropies of unions.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};

/// Expansion enumerates `3^n` subset pairs; this keeps it instantaneous.
pub const MAX_VARIABLES: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EntropyExpr {
    Atom(String),
    Comma(Box<EntropyExpr>, Box<EntropyExpr>),
    Colon(Box<EntropyExpr>, Box<EntropyExpr>),
    Bar(Box<EntropyExpr>, Box<EntropyExpr>),
}

impl EntropyExpr {
    pub fn atom(name: &str) -> Self {
        EntropyExpr::Atom(name.to_string())
    }

    /// Comma-joined list of atoms.
    pub fn joint<S: AsRef<str>>(names: &[S]) -> Result<Self> {
        let mut it = names.iter();
        let first = it.next().ok_or(Error::EmptyExpression)?;
        Ok(it.fold(Self::atom(first.as_ref()), |acc, n| {
            EntropyExpr::Comma(Box::new(acc), Box::new(Self::atom(n.as_ref())))
        }))
    }

    /// Distinct atom names in sorted order.
    pub fn variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect(&mut out);
        out
    }

    fn collect(&self, out: &mut BTreeSet<String>) {
        match self {
            EntropyExpr::Atom(a) => {
                out.insert(a.clone());
            }
            EntropyExpr::Comma(l, r) | EntropyExpr::Colon(l, r) | EntropyExpr::Bar(l, r) => {
                l.collect(out);
                r.collect(out);
            }
        }
    }

    /// Membership of the atom region labelled by `inside` (the variables
    /// whose sets contain the region) in the region denoted by `self`.
    fn contains(&self, inside: &dyn Fn(&str) -> bool) -> bool {
        match self {
            EntropyExpr::Atom(a) => inside(a),
            EntropyExpr::Comma(l, r) => l.contains(inside) || r.contains(inside),
            EntropyExpr::Colon(l, r) => l.contains(inside) && r.contains(inside),
            EntropyExpr::Bar(l, r) => l.contains(inside) && !r.contains(inside),
        }
    }
}

impl fmt::Display for EntropyExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EntropyExpr::Atom(a) => write!(f, "{a}"),
            EntropyExpr::Comma(l, r) => write!(f, "({l},{r})"),
            EntropyExpr::Colon(l, r) => write!(f, "({l}:{r})"),
            EntropyExpr::Bar(l, r) => write!(f, "({l}|{r})"),
        }
    }
}

pub fn parse(text: &str) -> Result<EntropyExpr> {
    if text.trim().is_empty() {
        return Err(Error::EmptyExpression);
    }
    let mut p = Parser { chars: text.char_indices().collect(), pos: 0, len: text.len() };
    let e = p.bar()?;
    p.skip_ws();
    if let Some(&(at, ch)) = p.chars.get(p.pos) {
        return Err(Error::Syntax { pos: at, msg: format!("unexpected `{ch}`") });
    }
    Ok(e)
}

struct Parser {
    chars: Vec<(usize, char)>,
    pos: usize,
    len: usize,
}

impl Parser {
    fn skip_ws(&mut self) {
        while self.chars.get(self.pos).is_some_and(|&(_, c)| c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn offset(&self) -> usize {
        self.chars.get(self.pos).map_or(self.len, |&(at, _)| at)
    }

    fn eat(&mut self, want: char) -> bool {
        self.skip_ws();
        if self.chars.get(self.pos).is_some_and(|&(_, c)| c == want) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn bar(&mut self) -> Result<EntropyExpr> {
        let mut left = self.colon()?;
        while self.eat('|') {
            let right = self.colon()?;
            left = EntropyExpr::Bar(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn colon(&mut self) -> Result<EntropyExpr> {
        let mut left = self.comma()?;
        while self.eat(':') {
            let right = self.comma()?;
            left = EntropyExpr::Colon(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn comma(&mut self) -> Result<EntropyExpr> {
        let mut left = self.primary()?;
        while self.eat(',') {
            let right = self.primary()?;
            left = EntropyExpr::Comma(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn primary(&mut self) -> Result<EntropyExpr> {
        self.skip_ws();
        let at = self.offset();
        if self.eat('(') {
            let inner = self.bar()?;
            if !self.eat(')') {
                return Err(Error::Syntax { pos: self.offset(), msg: "expected `)`".into() });
            }
            return Ok(inner);
        }
        let start = self.pos;
        while let Some(&(_, c)) = self.chars.get(self.pos) {
            let ok = if self.pos == start { c.is_alphabetic() || c == '_' } else { is_ident_char(c) };
            if !ok {
                break;
            }
            self.pos += 1;
        }
        if self.pos == start {
            let msg = match self.chars.get(self.pos) {
                Some(&(_, c)) => format!("expected a variable name, found `{c}`"),
                None => "expected a variable name, found end of input".into(),
            };
            return Err(Error::Syntax { pos: at, msg });
        }
        Ok(EntropyExpr::Atom(self.chars[start..self.pos].iter().map(|&(_, c)| c).collect()))
    }
}

/// Characters allowed after the first character of a variable name.
pub fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\''
}

/// `Σ coefficient · H(set)` with merged, nonzero terms in canonical order
/// (by set size, then lexicographically).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SignedJointSum {
    pub terms: Vec<(i64, BTreeSet<String>)>,
}

impl SignedJointSum {
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn from_map(map: BTreeMap<(usize, Vec<String>), i64>) -> Self {
        let terms = map
            .into_iter()
            .filter(|(_, c)| *c != 0)
            .map(|((_, v), c)| (c, v.into_iter().collect()))
            .collect();
        SignedJointSum { terms }
    }
}

impl fmt::Display for SignedJointSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (c, set)) in self.terms.iter().enumerate() {
            let sign = if *c < 0 { "-" } else if k > 0 { "+" } else { "" };
            let mag = c.abs();
            let names: Vec<&str> = set.iter().map(String::as_str).collect();
            if mag == 1 {
                write!(f, "{sign}H({})", names.join(","))?;
            } else {
                write!(f, "{sign}{mag}H({})", names.join(","))?;
            }
        }
        Ok(())
    }
}

/// Expands an expression into joint-entropy terms.
///
/// Atom regions are indexed by the nonempty subset `T` of variables whose
/// sets contain them. With `V` the full variable set, the measure of the
/// region `T` is `-Σ_{U ⊆ T} (-1)^{|T|-|U|} H(V \ U)` (Möbius inversion of
/// `H(V) - H(V \ U) = Σ_{∅≠T ⊆ U} m(T)`), with `H(∅) = 0`.
pub fn expand(expr: &EntropyExpr) -> Result<SignedJointSum> {
    let vars: Vec<String> = expr.variables().into_iter().collect();
    let n = vars.len();
    if n == 0 {
        return Err(Error::EmptyExpression);
    }
    if n > MAX_VARIABLES {
        return Err(Error::TooManyVariables(n));
    }
    let full: u32 = (1u32 << n) - 1;
    let mut coeff: Vec<i64> = vec![0; 1 << n];
    for t in 1..=full {
        let inside = |name: &str| {
            let k = vars.binary_search_by(|v| v.as_str().cmp(name)).unwrap();
            t & (1 << k) != 0
        };
        if !expr.contains(&inside) {
            continue;
        }
        let tsize = t.count_ones();
        // iterate over all subsets u of t
        let mut u = t;
        loop {
            let sign = if (tsize - u.count_ones()) % 2 == 0 { 1 } else { -1 };
            let joint = full & !u;
            if joint != 0 {
                coeff[joint as usize] -= sign;
            }
            if u == 0 {
                break;
            }
            u = (u - 1) & t;
        }
    }
    let mut map = BTreeMap::new();
    for (mask, &c) in coeff.iter().enumerate() {
        if c == 0 {
            continue;
        }
        let set: Vec<String> =
            (0..n).filter(|k| mask & (1 << k) != 0).map(|k| vars[k].clone()).collect();
        map.insert((set.len(), set), c);
    }
    Ok(SignedJointSum::from_map(map))
}

pub fn evaluate<E>(
    sum: &SignedJointSum,
    mut joint: impl FnMut(&BTreeSet<String>) -> std::result::Result<f64, E>,
) -> std::result::Result<f64, E> {
    let mut total = 0.0;
    for (c, set) in &sum.terms {
        total += *c as f64 * joint(set)?;
    }
    Ok(total)
}

/// `-p log2 p - (1-p) log2 (1-p)`.
pub fn binary_entropy(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(p));
    }
    Ok(shannon_entropy(&[p, 1.0 - p]))
}

/// Entropy in bits of a probability vector, `0 log 0 = 0`.
pub fn shannon_entropy(p: &[f64]) -> f64 {
    p.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.log2()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(s: &str) -> Box<EntropyExpr> {
        Box::new(EntropyExpr::atom(s))
    }

    fn show(e: &str) -> String {
        expand(&parse(e).unwrap()).unwrap().to_string()
    }

    #[test]
    fn precedence() {
        assert_eq!(
            parse("a:b,c").unwrap(),
            EntropyExpr::Colon(a("a"), Box::new(EntropyExpr::Comma(a("b"), a("c"))))
        );
        assert_eq!(parse("a:b,c").unwrap(), parse("a:(b,c)").unwrap());
        assert_eq!(
            parse("(a:b)|c").unwrap(),
            EntropyExpr::Bar(Box::new(EntropyExpr::Colon(a("a"), a("b"))), a("c"))
        );
        assert_eq!(parse("a").unwrap(), EntropyExpr::atom("a"));
        assert_eq!(
            parse("a|b|c").unwrap(),
            EntropyExpr::Bar(Box::new(EntropyExpr::Bar(a("a"), a("b"))), a("c"))
        );
    }

    #[test]
    fn syntax_errors_have_positions() {
        assert_eq!(parse("a,,b").unwrap_err(), Error::Syntax { pos: 2, msg: "expected a variable name, found `,`".into() });
        assert!(matches!(parse("(a:b"), Err(Error::Syntax { pos: 4, .. })));
        assert!(matches!(parse("a b"), Err(Error::Syntax { pos: 2, .. })));
        assert!(matches!(parse("()"), Err(Error::Syntax { pos: 1, .. })));
        assert_eq!(parse("   "), Err(Error::EmptyExpression));
    }

    #[test]
    fn names_with_marks_and_underscores() {
        assert_eq!(parse("q_f:j'").unwrap().variables().len(), 2);
    }

    #[test]
    fn expansions() {
        assert_eq!(show("(a:b)|c"), "-H(c)+H(a,c)+H(b,c)-H(a,b,c)");
        assert_eq!(show("a|b"), "-H(b)+H(a,b)");
        assert_eq!(show("a:a"), "H(a)");
        assert_eq!(show("a:b"), "H(a)+H(b)-H(a,b)");
        assert_eq!(show("a|a"), "0");
        assert_eq!(expand(&parse("a,a,b").unwrap()), expand(&parse("a,b").unwrap()));
    }

    #[test]
    fn evaluate_arithmetic() {
        let s = expand(&parse("a|b").unwrap()).unwrap();
        let v: f64 = evaluate(&s, |set| -> std::result::Result<f64, ()> {
            Ok(if set.len() == 2 { 2.0 } else { 1.0 })
        })
        .unwrap();
        assert_eq!(v, 1.0);
    }

    #[test]
    fn binary_entropy_values() {
        assert_eq!(binary_entropy(0.5).unwrap(), 1.0);
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        assert!((binary_entropy(0.25).unwrap() - 0.8112781244591328).abs() < 1e-15);
        assert!(matches!(binary_entropy(1.5), Err(Error::Domain(_))));
        assert!(binary_entropy(-0.1).is_err());
    }
}
