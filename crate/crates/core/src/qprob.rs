//! Probability families of a net: `P[(x.)_Γ]` from the reduced meta state and
//! `P_ρ` from the diagonal of a density matrix.

use crate::density::{self, meta_state, Axis, DensityMatrix};
use crate::entexpr::{self, EntropyExpr};
use crate::error::{Error, Result};
use crate::netcore::{CbNet, QbNet};

/// Conditioning events with probability below this are rejected.
pub const DENOMINATOR_CUTOFF: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct ProbTable {
    pub variables: Vec<String>,
    pub dims: Vec<usize>,
    pub values: Vec<f64>,
}

impl ProbTable {
    pub fn new(variables: Vec<String>, dims: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        if variables.len() != dims.len() || dims.iter().product::<usize>() != values.len() {
            return Err(Error::DimensionMismatch("table shape".into()));
        }
        Ok(ProbTable { variables, dims, values })
    }

    fn axes(&self) -> Vec<Axis> {
        self.variables.iter().zip(&self.dims).map(|(n, &d)| Axis::new(n, d)).collect()
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn get(&self, assignment: &[usize]) -> f64 {
        let k = assignment.iter().zip(&self.dims).fold(0, |acc, (x, d)| acc * d + x);
        self.values[k]
    }

    /// Assignment tuple of a flat index.
    pub fn assignment(&self, mut k: usize) -> Vec<usize> {
        let mut out = vec![0; self.dims.len()];
        for (slot, &d) in out.iter_mut().zip(&self.dims).rev() {
            *slot = k % d;
            k /= d;
        }
        out
    }

    /// Marginal over the listed variables, kept in table order.
    pub fn marginal(&self, names: &[&str]) -> Result<ProbTable> {
        let axes = self.axes();
        let values = density::marginal(&axes, &self.values, names)
            .map_err(|e| match e {
                Error::UnknownAxis(n) => Error::UnknownNode(n),
                other => other,
            })?;
        let (variables, dims) = axes
            .into_iter()
            .filter(|a| names.contains(&a.name.as_str()))
            .map(|a| (a.name, a.dim))
            .unzip();
        Ok(ProbTable { variables, dims, values })
    }

    pub fn entropy(&self) -> f64 {
        entexpr::shannon_entropy(&self.values)
    }

    /// Classical entropy of a compound expression over the table's variables.
    pub fn h(&self, expr: &EntropyExpr) -> Result<f64> {
        let sum = entexpr::expand(expr)?;
        entexpr::evaluate(&sum, |set| {
            let names: Vec<&str> = set.iter().map(String::as_str).collect();
            Ok(self.marginal(&names)?.entropy())
        })
    }

    pub fn h_str(&self, expr: &str) -> Result<f64> {
        self.h(&entexpr::parse(expr)?)
    }

    /// `P[x1 | x2]` as a table over `g1 − g2`.
    pub fn condition(&self, g1: &[&str], g2: &[&str], x2: &[usize]) -> Result<ProbTable> {
        if g2.len() != x2.len() {
            return Err(Error::DimensionMismatch("conditioning assignment length".into()));
        }
        let g1: Vec<&str> = g1.iter().copied().filter(|n| !g2.contains(n)).collect();
        if g1.is_empty() || g2.is_empty() {
            return Err(Error::EmptyGamma);
        }
        let mut all = g1.clone();
        all.extend_from_slice(g2);
        let joint = self.marginal(&all)?;
        let free: Vec<usize> = (0..joint.variables.len())
            .filter(|&k| g1.contains(&joint.variables[k].as_str()))
            .collect();
        let mut fixed = vec![None; joint.variables.len()];
        for (n, &x) in g2.iter().zip(x2) {
            let k = joint.variables.iter().position(|v| v == n).unwrap();
            if x >= joint.dims[k] {
                return Err(Error::DimensionMismatch(format!("state {x} out of range for `{n}`")));
            }
            fixed[k] = Some(x);
        }
        let dims: Vec<usize> = free.iter().map(|&k| joint.dims[k]).collect();
        let count: usize = dims.iter().product();
        let mut values = Vec::with_capacity(count);
        for k in 0..count {
            let mut full = vec![0; joint.variables.len()];
            let mut rest = k;
            for (j, &slot) in free.iter().enumerate().rev() {
                full[slot] = rest % dims[j];
                rest /= dims[j];
            }
            for (slot, x) in fixed.iter().enumerate() {
                if let Some(x) = x {
                    full[slot] = *x;
                }
            }
            values.push(joint.get(&full));
        }
        let denom: f64 = values.iter().sum();
        if denom < DENOMINATOR_CUTOFF {
            return Err(Error::ZeroDenominator(denom));
        }
        values.iter_mut().for_each(|v| *v /= denom);
        let variables = free.iter().map(|&k| joint.variables[k].clone()).collect();
        Ok(ProbTable { variables, dims, values })
    }

    /// Header line with the variable names, then one line per assignment.
    pub fn to_tsv(&self) -> String {
        let mut s = self.variables.join("\t");
        s.push_str("\tP\n");
        for (k, v) in self.values.iter().enumerate() {
            for x in self.assignment(k) {
                s.push_str(&format!("{x}\t"));
            }
            s.push_str(&density::fmt9(*v));
            s.push('\n');
        }
        s
    }
}

/// `P[(x.)_Γ]`: trace externals outside Γ, e-sum internals outside Γ, take
/// the diagonal.
pub fn p_gamma<S: AsRef<str>>(net: &QbNet, gamma: &[S]) -> Result<ProbTable> {
    let dag = net.dag();
    let g = dag.resolve(gamma)?;
    if g.is_empty() {
        return Err(Error::EmptyGamma);
    }
    let (internal, external) = dag.classify_nodes();
    let outside = |v: &Vec<usize>| dag.names(&v.iter().copied().filter(|i| !g.contains(i)).collect::<Vec<_>>());
    let tr = outside(&external);
    let es = outside(&internal);
    let mut state = meta_state(net)?.reducer();
    if !tr.is_empty() {
        state.trace(&tr.iter().map(String::as_str).collect::<Vec<_>>())?;
    }
    state.esum(&es.iter().map(String::as_str).collect::<Vec<_>>())?;
    let values = state.diagonal();
    let dims = g.iter().map(|&i| dag.node(i).dim()).collect();
    ProbTable::new(dag.names(&g), dims, values)
}

/// `P[x_{g1} | x_{g2}]`, with overlapping nodes dropped from `g1`.
pub fn p_gamma_cond<S: AsRef<str>>(net: &QbNet, g1: &[S], g2: &[S], x2: &[usize]) -> Result<ProbTable> {
    let g2n: Vec<&str> = g2.iter().map(|s| s.as_ref()).collect();
    let g1n: Vec<&str> = g1.iter().map(|s| s.as_ref()).filter(|n| !g2n.contains(n)).collect();
    if g1n.is_empty() || g2n.is_empty() {
        return Err(Error::EmptyGamma);
    }
    let mut all = g1n.clone();
    all.extend_from_slice(&g2n);
    p_gamma(net, &all)?.condition(&g1n, &g2n, x2)
}

/// Diagonal of ρ traced down to Γ.
pub fn p_rho<S: AsRef<str>>(rho: &DensityMatrix, gamma: &[S]) -> Result<ProbTable> {
    if gamma.is_empty() {
        return Err(Error::EmptyGamma);
    }
    let names: Vec<&str> = gamma.iter().map(|s| s.as_ref()).collect();
    let values = density::marginal(rho.axes(), &rho.diagonal(), &names)?;
    let (variables, dims) = rho
        .axes()
        .iter()
        .filter(|a| names.contains(&a.name.as_str()))
        .map(|a| (a.name.clone(), a.dim))
        .unzip();
    ProbTable::new(variables, dims, values)
}

pub fn p_rho_cond<S: AsRef<str>>(rho: &DensityMatrix, g1: &[S], g2: &[S], x2: &[usize]) -> Result<ProbTable> {
    let g1n: Vec<&str> = g1.iter().map(|s| s.as_ref()).collect();
    let g2n: Vec<&str> = g2.iter().map(|s| s.as_ref()).collect();
    let all: Vec<&str> = rho.axis_names();
    let table = p_rho(rho, &all)?;
    table.condition(&g1n, &g2n, x2)
}

/// Joint distribution of a CB net over all nodes, by story enumeration.
pub fn cb_joint(net: &CbNet) -> Result<ProbTable> {
    let dag = net.dag();
    let dims = dag.dims();
    let mut values = vec![0.0; dims.iter().product()];
    net.for_each_nonzero_story(|s, p| {
        let k = s.iter().zip(&dims).fold(0, |acc, (x, d)| acc * d + x);
        values[k] += p;
    })?;
    ProbTable::new(dag.names(&(0..dag.len()).collect::<Vec<_>>()), dims, values)
}

#[derive(Debug, Clone, Default)]
pub struct ClosureReport {
    /// Worst `|Σ_{Γ'} P[Γ ∪ Γ'] − P[Γ]|` for the net-level family.
    pub p_residual: f64,
    /// The same for the family read off the diagonal of μ.
    pub p_mu_residual: f64,
    /// Worst difference between `P_μ[Γ]` and the parent CB net marginal.
    pub p_mu_vs_cb: f64,
    /// Pairs skipped because a reduction had zero probability.
    pub skipped: usize,
}

/// Marginalization closure of both families over all disjoint pairs of
/// nonempty node sets. Intended for small nets.
pub fn closure_check(net: &QbNet) -> Result<ClosureReport> {
    let dag = net.dag();
    let n = dag.len();
    let mut report = ClosureReport::default();
    let names = |mask: usize| -> Vec<String> {
        (0..n).filter(|k| mask & (1 << k) != 0).map(|k| dag.name(k).to_string()).collect()
    };
    let mut cache: Vec<Option<Option<ProbTable>>> = vec![None; 1 << n];
    let mut family = |mask: usize| -> Result<Option<ProbTable>> {
        if cache[mask].is_none() {
            let t = match p_gamma(net, &names(mask)) {
                Ok(t) => Some(t),
                Err(Error::ZeroProbability(_)) => None,
                Err(e) => return Err(e),
            };
            cache[mask] = Some(t);
        }
        Ok(cache[mask].clone().unwrap())
    };

    let ms = meta_state(net)?;
    let mu_diag: Vec<f64> = ms.amplitudes().iter().map(|a| a.norm_sqr()).collect();
    let mu_table = ProbTable::new(names((1 << n) - 1), dag.dims(), mu_diag)?;
    let cb = cb_joint(&crate::netcore::parent_cb_net(net))?;

    for g in 1..(1usize << n) {
        let gn = names(g);
        let gr: Vec<&str> = gn.iter().map(String::as_str).collect();
        let mu_g = mu_table.marginal(&gr)?;
        let cb_g = cb.marginal(&gr)?;
        for (a, b) in mu_g.values.iter().zip(&cb_g.values) {
            report.p_mu_vs_cb = report.p_mu_vs_cb.max((a - b).abs());
        }
        let rest = ((1 << n) - 1) & !g;
        let mut h = rest;
        while h != 0 {
            let un = names(g | h);
            let ur: Vec<&str> = un.iter().map(String::as_str).collect();
            let mu_u = mu_table.marginal(&ur)?.marginal(&gr)?;
            for (a, b) in mu_u.values.iter().zip(&mu_g.values) {
                report.p_mu_residual = report.p_mu_residual.max((a - b).abs());
            }
            match (family(g | h)?, family(g)?) {
                (Some(pu), Some(pg)) => {
                    let m = pu.marginal(&gr)?;
                    for (a, b) in m.values.iter().zip(&pg.values) {
                        report.p_residual = report.p_residual.max((a - b).abs());
                    }
                }
                _ => report.skipped += 1,
            }
            h = (h - 1) & rest;
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conditioning_and_tsv() {
        let t = ProbTable::new(
            vec!["a".into(), "b".into()],
            vec![2, 2],
            vec![0.1, 0.2, 0.3, 0.4],
        )
        .unwrap();
        let c = t.condition(&["a"], &["b"], &[1]).unwrap();
        assert!((c.values[0] - 0.2 / 0.6).abs() < 1e-15);
        assert_eq!(c.variables, vec!["a"]);
        let overlap = t.condition(&["a", "b"], &["b"], &[1]).unwrap();
        assert_eq!(overlap, c);
        assert_eq!(t.to_tsv().lines().next(), Some("a\tb\tP"));
        assert_eq!(t.to_tsv().lines().nth(2), Some("0\t1\t0.200000000"));
        let z = ProbTable::new(vec!["a".into()], vec![2], vec![1.0, 0.0]).unwrap();
        let zz = ProbTable::new(vec!["b".into()], vec![2], vec![0.5, 0.5]).unwrap();
        let mut v = Vec::new();
        for a in &z.values {
            for b in &zz.values {
                v.push(a * b);
            }
        }
        let j = ProbTable::new(vec!["a".into(), "b".into()], vec![2, 2], v).unwrap();
        assert!(matches!(j.condition(&["b"], &["a"], &[1]), Err(Error::ZeroDenominator(_))));
        assert!(matches!(j.condition(&["a"], &["a"], &[1]), Err(Error::EmptyGamma)));
    }
}
