//! Reduction recipes: `trace(a,b); esum(c); project(d=1)` applied left to right to μ.

use std::fmt;
use std::str::FromStr;

use crate::density::{meta_state, DensityMatrix, PurifiedState};
use crate::entexpr::is_ident_char;
use crate::error::{Error, Result};
use crate::netcore::QbNet;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Step {
    Trace(Vec<String>),
    Esum(Vec<String>),
    Project(String, usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Recipe {
    pub steps: Vec<Step>,
}

impl Recipe {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn trace(mut self, names: &[&str]) -> Self {
        self.steps.push(Step::Trace(names.iter().map(|s| s.to_string()).collect()));
        self
    }

    pub fn esum(mut self, names: &[&str]) -> Self {
        self.steps.push(Step::Esum(names.iter().map(|s| s.to_string()).collect()));
        self
    }

    pub fn project(mut self, name: &str, k: usize) -> Self {
        self.steps.push(Step::Project(name.to_string(), k));
        self
    }

    /// Reduces the meta state of `net`.
    pub fn apply(&self, net: &QbNet) -> Result<DensityMatrix> {
        let mut state = meta_state(net)?.reducer();
        self.apply_to(&mut state)?;
        state.density()
    }

    pub fn apply_to(&self, state: &mut PurifiedState) -> Result<()> {
        for step in &self.steps {
            match step {
                Step::Trace(ns) => state.trace(&refs(ns))?,
                Step::Esum(ns) => state.esum(&refs(ns))?,
                Step::Project(n, k) => state.project_basis(n, *k)?,
            }
        }
        Ok(())
    }

    pub fn apply_dense(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        let mut out = rho.clone();
        for step in &self.steps {
            out = match step {
                Step::Trace(ns) => out.partial_trace(&refs(ns))?,
                Step::Esum(ns) => out.esum(&refs(ns))?,
                Step::Project(n, k) => out.project_basis(n, *k)?,
            };
        }
        Ok(out)
    }
}

fn refs(v: &[String]) -> Vec<&str> {
    v.iter().map(String::as_str).collect()
}

impl fmt::Display for Recipe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .steps
            .iter()
            .map(|s| match s {
                Step::Trace(ns) => format!("trace({})", ns.join(",")),
                Step::Esum(ns) => format!("esum({})", ns.join(",")),
                Step::Project(n, k) => format!("project({n}={k})"),
            })
            .collect();
        write!(f, "{}", parts.join(";"))
    }
}

impl FromStr for Recipe {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut steps = Vec::new();
        let mut offset = 0;
        for raw in text.split(';') {
            let start = offset + (raw.len() - raw.trim_start().len());
            offset += raw.len() + 1;
            let part = raw.trim();
            if part.is_empty() {
                continue;
            }
            steps.push(parse_step(part, start)?);
        }
        Ok(Recipe { steps })
    }
}

fn parse_step(part: &str, at: usize) -> Result<Step> {
    let err = |pos: usize, msg: &str| Error::Syntax { pos: at + pos, msg: msg.to_string() };
    let open = part.find('(').ok_or_else(|| err(0, "expected `name(...)`"))?;
    if !part.ends_with(')') {
        return Err(err(part.len(), "expected `)`"));
    }
    let op = part[..open].trim();
    let body = &part[open + 1..part.len() - 1];
    let names = |body: &str| -> Result<Vec<String>> {
        let mut out = Vec::new();
        let mut pos = open + 1;
        for n in body.split(',') {
            let t = n.trim();
            if t.is_empty() || !t.chars().all(is_ident_char) {
                return Err(err(pos, "expected a node name"));
            }
            out.push(t.to_string());
            pos += n.len() + 1;
        }
        Ok(out)
    };
    match op {
        "trace" => Ok(Step::Trace(names(body)?)),
        "esum" => Ok(Step::Esum(names(body)?)),
        "project" => {
            let (n, k) = body.split_once('=').ok_or_else(|| err(open + 1, "expected `node=state`"))?;
            let n = n.trim();
            if n.is_empty() || !n.chars().all(is_ident_char) {
                return Err(err(open + 1, "expected a node name"));
            }
            let k = k.trim().parse::<usize>().map_err(|_| err(open + 1 + n.len() + 1, "expected a state index"))?;
            Ok(Step::Project(n.to_string(), k))
        }
        _ => Err(err(0, "unknown step; expected trace, esum or project")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_display() {
        let r: Recipe = "trace(b, c); esum(e);project(f=2)".parse().unwrap();
        assert_eq!(
            r,
            Recipe::new().trace(&["b", "c"]).esum(&["e"]).project("f", 2)
        );
        assert_eq!(r.to_string(), "trace(b,c);esum(e);project(f=2)");
    }

    #[test]
    fn parse_errors() {
        assert!(matches!("swap(a)".parse::<Recipe>(), Err(Error::Syntax { pos: 0, .. })));
        assert!(matches!("esum(a); project(b)".parse::<Recipe>(), Err(Error::Syntax { pos: 17, .. })));
        assert!(matches!("trace(a,)".parse::<Recipe>(), Err(Error::Syntax { .. })));
        assert!("".parse::<Recipe>().unwrap().steps.is_empty());
    }
}
