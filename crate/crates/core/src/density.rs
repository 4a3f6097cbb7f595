//! Labelled density matrices, the meta state of a QB net, the trace /
//! projection / entry-sum reductions and the entropies built on them.
//!
//! Reductions of a net's meta density matrix never materialize μ: the meta
//! state is kept as a vector together with the set of axes traced so far
//! ([`PurifiedState`]), and the reduced matrix is formed only at the end.
//! Projections and traces on distinct axes commute, so this is exact.

use std::collections::BTreeSet;

use num_complex::Complex64;

use crate::entexpr::{self, EntropyExpr};
use crate::error::{Error, Result};
use crate::linalg::{self, eigh, CMat, CVec, Eigh, C0, C1, HERMITIAN_TOL};
use crate::netcore::{deterministic, root_matrix, NetBuilder, QbNet};

/// Normalization constants below this are treated as zero probability.
pub const ZERO_PROB: f64 = 1e-12;
/// Largest dimension for which a dense density matrix is formed.
pub const MAX_DENSE_DIM: usize = 2048;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Axis {
    pub name: String,
    pub dim: usize,
}

impl Axis {
    pub fn new(name: &str, dim: usize) -> Self {
        Axis { name: name.to_string(), dim }
    }
}

fn total_dim(axes: &[Axis]) -> usize {
    axes.iter().map(|a| a.dim).product()
}

fn strides(axes: &[Axis]) -> Vec<usize> {
    let mut s = vec![1; axes.len()];
    for k in (0..axes.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * axes[k + 1].dim;
    }
    s
}

fn axis_position(axes: &[Axis], name: &str) -> Result<usize> {
    axes.iter().position(|a| a.name == name).ok_or_else(|| Error::UnknownAxis(name.to_string()))
}

/// Flat offsets (into the full index) of every multi-index over the selected
/// axes, enumerated row-major in axis order.
fn offsets(axes: &[Axis], selected: &[usize]) -> Vec<usize> {
    let st = strides(axes);
    let mut out = vec![0usize];
    for &k in selected {
        let mut next = Vec::with_capacity(out.len() * axes[k].dim);
        for &o in &out {
            for x in 0..axes[k].dim {
                next.push(o + x * st[k]);
            }
        }
        out = next;
    }
    out
}

fn check_unique(names: &[&str]) -> Result<()> {
    let mut seen = BTreeSet::new();
    for n in names {
        if !seen.insert(*n) {
            return Err(Error::DimensionMismatch(format!("axis `{n}` listed twice")));
        }
    }
    Ok(())
}

/// Formats a number with nine decimals, printing rounding noise as zero.
pub fn fmt9(x: f64) -> String {
    if x.abs() < 5e-10 {
        "0.000000000".to_string()
    } else {
        format!("{x:.9}")
    }
}

#[derive(Debug, Clone)]
pub struct DensityMatrix {
    axes: Vec<Axis>,
    m: CMat,
}

impl DensityMatrix {
    /// Validates shape, Hermiticity, unit trace and non-negativity.
    pub fn new(axes: Vec<Axis>, m: CMat) -> Result<Self> {
        let n = total_dim(&axes);
        if axes.is_empty() || m.nrows() != n || m.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "matrix is {}x{} but axes have total dimension {}",
                m.nrows(),
                m.ncols(),
                n
            )));
        }
        let names: Vec<&str> = axes.iter().map(|a| a.name.as_str()).collect();
        check_unique(&names)?;
        let e = eigh(&m)?;
        let tr: f64 = e.values.iter().sum();
        if (tr - 1.0).abs() > HERMITIAN_TOL {
            return Err(Error::NotNormalized(tr));
        }
        if let Some(&low) = e.values.last() {
            if low < -HERMITIAN_TOL {
                return Err(Error::NotPositive(low));
            }
        }
        Ok(DensityMatrix { axes, m })
    }

    pub(crate) fn from_parts(axes: Vec<Axis>, m: CMat) -> Self {
        DensityMatrix { axes, m }
    }

    /// Density matrix on a single axis.
    pub fn single(name: &str, m: CMat) -> Result<Self> {
        let d = m.nrows();
        Self::new(vec![Axis::new(name, d)], m)
    }

    /// `|ψ⟩⟨ψ|` for a normalized vector.
    pub fn pure(axes: Vec<Axis>, psi: &CVec) -> Result<Self> {
        let norm = psi.norm();
        if (norm - 1.0).abs() > HERMITIAN_TOL {
            return Err(Error::NotNormalized(norm));
        }
        if psi.len() != total_dim(&axes) {
            return Err(Error::DimensionMismatch("vector length does not match axes".into()));
        }
        Ok(DensityMatrix { axes, m: linalg::outer(psi) })
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn axis_names(&self) -> Vec<&str> {
        self.axes.iter().map(|a| a.name.as_str()).collect()
    }

    pub fn matrix(&self) -> &CMat {
        &self.m
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn trace(&self) -> f64 {
        linalg::trace(&self.m).re
    }

    /// Diagonal entries (real parts), i.e. P_ρ over all axes.
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.m[(i, i)].re).collect()
    }

    fn positions(&self, names: &[&str]) -> Result<Vec<usize>> {
        check_unique(names)?;
        let mut out = names.iter().map(|n| axis_position(&self.axes, n)).collect::<Result<Vec<_>>>()?;
        out.sort_unstable();
        Ok(out)
    }

    pub fn partial_trace(&self, names: &[&str]) -> Result<DensityMatrix> {
        let traced = self.positions(names)?;
        if traced.len() == self.axes.len() {
            return Err(Error::EmptyResult);
        }
        let keep: Vec<usize> = (0..self.axes.len()).filter(|k| !traced.contains(k)).collect();
        let ok = offsets(&self.axes, &keep);
        let ot = offsets(&self.axes, &traced);
        let n = ok.len();
        let mut out = CMat::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let mut s = C0;
                for &t in &ot {
                    s += self.m[(ok[i] + t, ok[j] + t)];
                }
                out[(i, j)] = s;
            }
        }
        let axes = keep.iter().map(|&k| self.axes[k].clone()).collect();
        Ok(DensityMatrix { axes, m: out })
    }

    /// Traces out every axis not listed in `keep`.
    pub fn reduce_to(&self, keep: &[&str]) -> Result<DensityMatrix> {
        if keep.is_empty() {
            return Err(Error::EmptyResult);
        }
        let pos = self.positions(keep)?;
        let drop: Vec<&str> = (0..self.axes.len())
            .filter(|k| !pos.contains(k))
            .map(|k| self.axes[k].name.as_str())
            .collect();
        if drop.is_empty() {
            return Ok(self.clone());
        }
        self.partial_trace(&drop)
    }

    /// `⟨α|ρ|α⟩` over the remaining axes, without normalization.
    pub fn sandwich(&self, name: &str, alpha: &[Complex64]) -> Result<(Vec<Axis>, CMat)> {
        let k = axis_position(&self.axes, name)?;
        if alpha.len() != self.axes[k].dim {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} for axis `{}` of dimension {}",
                alpha.len(),
                name,
                self.axes[k].dim
            )));
        }
        let keep: Vec<usize> = (0..self.axes.len()).filter(|&j| j != k).collect();
        let ok = offsets(&self.axes, &keep);
        let stride = strides(&self.axes)[k];
        let n = ok.len();
        let mut out = CMat::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let mut s = C0;
                for (x, ax) in alpha.iter().enumerate() {
                    if *ax == C0 {
                        continue;
                    }
                    for (y, ay) in alpha.iter().enumerate() {
                        if *ay == C0 {
                            continue;
                        }
                        s += ax.conj() * self.m[(ok[i] + x * stride, ok[j] + y * stride)] * ay;
                    }
                }
                out[(i, j)] = s;
            }
        }
        Ok((keep.iter().map(|&j| self.axes[j].clone()).collect(), out))
    }

    /// Normalized `⟨α|ρ|α⟩ / K`.
    pub fn project_reduce(&self, name: &str, alpha: &[Complex64]) -> Result<DensityMatrix> {
        if self.axes.len() == 1 {
            axis_position(&self.axes, name)?;
            return Err(Error::EmptyResult);
        }
        let (axes, m) = self.sandwich(name, alpha)?;
        let k = linalg::trace(&m).re;
        if k < ZERO_PROB {
            return Err(Error::ZeroProbability(k));
        }
        Ok(DensityMatrix { axes, m: m.unscale(k) })
    }

    /// Projection onto the basis state `|k⟩` of an axis.
    pub fn project_basis(&self, name: &str, k: usize) -> Result<DensityMatrix> {
        let d = self.axes[axis_position(&self.axes, name)?].dim;
        self.project_reduce(name, &basis_vector(d, k)?)
    }

    /// Sequential projections onto the average-basis vector of each axis.
    pub fn esum(&self, names: &[&str]) -> Result<DensityMatrix> {
        check_unique(names)?;
        let mut out = self.clone();
        for n in names {
            let d = out.axes[axis_position(&out.axes, n)?].dim;
            out = out.project_reduce(n, &average_vector(d))?;
        }
        Ok(out)
    }

    pub fn eig(&self) -> Result<Eigh> {
        eigh(&self.m)
    }

    pub fn von_neumann_entropy(&self) -> Result<f64> {
        linalg::entropy_of_spectrum(&self.eig()?.values)
    }

    fn check_expr_axes(&self, expr: &EntropyExpr) -> Result<()> {
        for v in expr.variables() {
            axis_position(&self.axes, &v)?;
        }
        Ok(())
    }

    /// Quantum entropy of a compound expression.
    pub fn s_entropy(&self, expr: &EntropyExpr) -> Result<f64> {
        self.check_expr_axes(expr)?;
        let sum = entexpr::expand(expr)?;
        entexpr::evaluate(&sum, |set| {
            let names: Vec<&str> = set.iter().map(String::as_str).collect();
            self.reduce_to(&names)?.von_neumann_entropy()
        })
    }

    /// Classical entropy of the diagonal distribution for a compound expression.
    pub fn h_rho(&self, expr: &EntropyExpr) -> Result<f64> {
        self.check_expr_axes(expr)?;
        let sum = entexpr::expand(expr)?;
        let diag = self.diagonal();
        entexpr::evaluate(&sum, |set| {
            let names: Vec<&str> = set.iter().map(String::as_str).collect();
            Ok(entexpr::shannon_entropy(&marginal(&self.axes, &diag, &names)?))
        })
    }

    pub fn s(&self, expr: &str) -> Result<f64> {
        self.s_entropy(&entexpr::parse(expr)?)
    }

    pub fn h(&self, expr: &str) -> Result<f64> {
        self.h_rho(&entexpr::parse(expr)?)
    }

    /// `H_ρ(X) − S_ρ(X)` for the joint node collection X.
    pub fn coherence(&self, names: &[&str]) -> Result<f64> {
        let e = EntropyExpr::joint(names)?;
        Ok(self.h_rho(&e)? - self.s_entropy(&e)?)
    }

    /// `U ρ U†` for a unitary on the full space.
    pub fn conjugate(&self, u: &CMat) -> Result<DensityMatrix> {
        if u.nrows() != self.dim() || u.ncols() != self.dim() {
            return Err(Error::DimensionMismatch("unitary dimension".into()));
        }
        Ok(DensityMatrix { axes: self.axes.clone(), m: u * &self.m * u.adjoint() })
    }

    /// Tensor product with axes concatenated.
    pub fn tensor(&self, other: &DensityMatrix) -> Result<DensityMatrix> {
        let mut axes = self.axes.clone();
        axes.extend(other.axes.iter().cloned());
        let names: Vec<&str> = axes.iter().map(|a| a.name.as_str()).collect();
        check_unique(&names)?;
        Ok(DensityMatrix { axes, m: linalg::kron(&self.m, &other.m) })
    }

    /// Matrix dump: one `row col re im` line per entry, row-major.
    pub fn to_tsv(&self) -> String {
        matrix_to_tsv(&self.m)
    }
}

pub fn matrix_to_tsv(m: &CMat) -> String {
    let mut s = String::new();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let z = m[(i, j)];
            s.push_str(&format!("{i}\t{j}\t{}\t{}\n", fmt9(z.re), fmt9(z.im)));
        }
    }
    s
}

/// Marginal of a distribution over `axes` onto the listed axes (in axis order).
pub(crate) fn marginal(axes: &[Axis], p: &[f64], names: &[&str]) -> Result<Vec<f64>> {
    let mut keep = names.iter().map(|n| axis_position(axes, n)).collect::<Result<Vec<_>>>()?;
    keep.sort_unstable();
    keep.dedup();
    let rest: Vec<usize> = (0..axes.len()).filter(|k| !keep.contains(k)).collect();
    let ok = offsets(axes, &keep);
    let or = offsets(axes, &rest);
    Ok(ok.iter().map(|&i| or.iter().map(|&t| p[i + t]).sum()).collect())
}

pub fn basis_vector(d: usize, k: usize) -> Result<Vec<Complex64>> {
    if k >= d {
        return Err(Error::DimensionMismatch(format!("basis index {k} out of range {d}")));
    }
    let mut v = vec![C0; d];
    v[k] = C1;
    Ok(v)
}

/// `(1/√N) Σ |a⟩`.
pub fn average_vector(d: usize) -> Vec<Complex64> {
    vec![Complex64::new(1.0 / (d as f64).sqrt(), 0.0); d]
}

/// The vector of all story amplitudes of a net.
#[derive(Debug, Clone)]
pub struct MetaState {
    axes: Vec<Axis>,
    amplitudes: Vec<Complex64>,
}

impl MetaState {
    pub fn new(axes: Vec<Axis>, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != total_dim(&axes) {
            return Err(Error::DimensionMismatch("amplitude vector length".into()));
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > HERMITIAN_TOL {
            return Err(Error::NotNormalized(norm));
        }
        Ok(MetaState { axes, amplitudes })
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// `|ψ⟩⟨ψ|` as a dense matrix.
    pub fn density(&self) -> Result<DensityMatrix> {
        let n = self.amplitudes.len();
        if n > MAX_DENSE_DIM {
            return Err(Error::TooLarge(n));
        }
        let v = CVec::from_column_slice(&self.amplitudes);
        Ok(DensityMatrix::from_parts(self.axes.clone(), linalg::outer(&v)))
    }

    pub fn reducer(&self) -> PurifiedState {
        PurifiedState {
            axes: self.axes.clone(),
            psi: self.amplitudes.clone(),
            traced: vec![false; self.axes.len()],
        }
    }
}

pub fn meta_state(net: &QbNet) -> Result<MetaState> {
    let dag = net.dag();
    dag.check_story_cap()?;
    let axes: Vec<Axis> = dag.nodes().iter().map(|n| Axis::new(&n.name, n.dim())).collect();
    let st = strides(&axes);
    let mut amps = vec![C0; total_dim(&axes)];
    net.for_each_nonzero_story(|s, a| {
        let k: usize = s.iter().zip(&st).map(|(x, w)| x * w).sum();
        amps[k] = a;
    })?;
    MetaState::new(axes, amps)
}

pub fn meta_density(net: &QbNet) -> Result<DensityMatrix> {
    meta_state(net)?.density()
}

/// A state `tr_T |ψ⟩⟨ψ|` held as the vector ψ plus the traced axis set T.
#[derive(Debug, Clone)]
pub struct PurifiedState {
    axes: Vec<Axis>,
    psi: Vec<Complex64>,
    traced: Vec<bool>,
}

impl PurifiedState {
    /// Axes still present in the reduced state.
    pub fn live_axes(&self) -> Vec<Axis> {
        self.axes.iter().zip(&self.traced).filter(|(_, t)| !**t).map(|(a, _)| a.clone()).collect()
    }

    fn live_position(&self, name: &str) -> Result<usize> {
        let k = axis_position(&self.axes, name)?;
        if self.traced[k] {
            return Err(Error::UnknownAxis(name.to_string()));
        }
        Ok(k)
    }

    fn live_count(&self) -> usize {
        self.traced.iter().filter(|t| !**t).count()
    }

    pub fn trace(&mut self, names: &[&str]) -> Result<()> {
        check_unique(names)?;
        let ks = names.iter().map(|n| self.live_position(n)).collect::<Result<Vec<_>>>()?;
        if ks.len() == self.live_count() {
            return Err(Error::EmptyResult);
        }
        for k in ks {
            self.traced[k] = true;
        }
        Ok(())
    }

    /// Contracts one live axis with `⟨α|` and renormalizes.
    pub fn project(&mut self, name: &str, alpha: &[Complex64]) -> Result<()> {
        let k = self.live_position(name)?;
        if self.live_count() == 1 {
            return Err(Error::EmptyResult);
        }
        if alpha.len() != self.axes[k].dim {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} for axis `{}` of dimension {}",
                alpha.len(),
                name,
                self.axes[k].dim
            )));
        }
        let keep: Vec<usize> = (0..self.axes.len()).filter(|&j| j != k).collect();
        let ok = offsets(&self.axes, &keep);
        let stride = strides(&self.axes)[k];
        let mut out = vec![C0; ok.len()];
        for (slot, &o) in out.iter_mut().zip(&ok) {
            let mut s = C0;
            for (x, ax) in alpha.iter().enumerate() {
                if *ax != C0 {
                    s += ax.conj() * self.psi[o + x * stride];
                }
            }
            *slot = s;
        }
        let norm2: f64 = out.iter().map(|z| z.norm_sqr()).sum();
        if norm2 < ZERO_PROB {
            return Err(Error::ZeroProbability(norm2));
        }
        let scale = 1.0 / norm2.sqrt();
        out.iter_mut().for_each(|z| *z *= scale);
        self.psi = out;
        self.axes.remove(k);
        self.traced.remove(k);
        Ok(())
    }

    pub fn project_basis(&mut self, name: &str, k: usize) -> Result<()> {
        let d = self.axes[self.live_position(name)?].dim;
        self.project(name, &basis_vector(d, k)?)
    }

    pub fn esum(&mut self, names: &[&str]) -> Result<()> {
        check_unique(names)?;
        for n in names {
            let d = self.axes[self.live_position(n)?].dim;
            self.project(n, &average_vector(d))?;
        }
        Ok(())
    }

    fn split(&self) -> (Vec<usize>, Vec<usize>) {
        (0..self.axes.len()).partition(|&k| !self.traced[k])
    }

    /// Diagonal of the reduced state, without forming the matrix.
    pub fn diagonal(&self) -> Vec<f64> {
        let (keep, gone) = self.split();
        let ok = offsets(&self.axes, &keep);
        let ot = offsets(&self.axes, &gone);
        ok.iter().map(|&i| ot.iter().map(|&t| self.psi[i + t].norm_sqr()).sum()).collect()
    }

    pub fn density(&self) -> Result<DensityMatrix> {
        let (keep, gone) = self.split();
        let ok = offsets(&self.axes, &keep);
        if ok.len() > MAX_DENSE_DIM {
            return Err(Error::TooLarge(ok.len()));
        }
        let ot = offsets(&self.axes, &gone);
        let m = CMat::from_fn(ok.len(), ot.len(), |i, t| self.psi[ok[i] + ot[t]]);
        let axes = keep.iter().map(|&k| self.axes[k].clone()).collect();
        Ok(DensityMatrix::from_parts(axes, &m * m.adjoint()))
    }
}

/// e-sum of μ over every internal node: a pure state on the external nodes.
pub fn rho_out(net: &QbNet) -> Result<DensityMatrix> {
    let (internal, external) = net.dag().classify_nodes();
    if external.is_empty() {
        return Err(Error::EmptyResult);
    }
    let mut r = meta_state(net)?.reducer();
    let names = net.dag().names(&internal);
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    r.esum(&refs)?;
    r.density()
}

pub fn hermitian_eig(rho: &DensityMatrix) -> Result<Eigh> {
    rho.eig()
}

pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    rho.von_neumann_entropy()
}

pub fn s_entropy(rho: &DensityMatrix, expr: &EntropyExpr) -> Result<f64> {
    rho.s_entropy(expr)
}

pub fn h_rho(rho: &DensityMatrix, expr: &EntropyExpr) -> Result<f64> {
    rho.h_rho(expr)
}

pub fn coherence(rho: &DensityMatrix, names: &[&str]) -> Result<f64> {
    rho.coherence(names)
}

/// Eigenvalues at or below this count as zero in relative entropy.
const SPECTRUM_CUTOFF: f64 = 1e-14;

/// `−tr ρ (log2 ρ − log2 σ)`; `-inf` when the support of ρ is not inside that of σ.
pub fn neg_relative_entropy(rho: &CMat, sigma: &CMat) -> Result<f64> {
    let a = eigh(rho)?;
    let b = eigh(sigma)?;
    let overlap = a.vectors.adjoint() * &b.vectors;
    let mut s = 0.0;
    for (i, &p) in a.values.iter().enumerate() {
        if p <= SPECTRUM_CUTOFF {
            continue;
        }
        s += p * p.log2();
        for (j, &q) in b.values.iter().enumerate() {
            let w = overlap[(i, j)].norm_sqr();
            if q <= SPECTRUM_CUTOFF {
                if w > 1e-10 {
                    return Ok(f64::NEG_INFINITY);
                }
                continue;
            }
            s -= p * w * q.log2();
        }
    }
    Ok(-s)
}

/// `α = U √Γ` for `β = U Γ U†`: `β = α α†`, with one column per eigenvalue.
pub fn purification_amplitudes(beta: &CMat) -> Result<CMat> {
    let e = eigh(beta)?;
    if let Some(&low) = e.values.last() {
        if low < -HERMITIAN_TOL {
            return Err(Error::NotPositive(low));
        }
    }
    let d = beta.nrows();
    Ok(CMat::from_fn(d, d, |q, r| e.vectors[(q, r)] * e.values[r].max(0.0).sqrt()))
}

/// As [`purification_amplitudes`] but keeping only the columns of nonzero
/// eigenvalues (at least one).
pub fn compact_purification_amplitudes(beta: &CMat) -> Result<CMat> {
    let a = purification_amplitudes(beta)?;
    let e = eigh(beta)?;
    let rank = e.values.iter().filter(|&&l| l > ZERO_PROB).count().max(1);
    Ok(a.columns(0, rank).into_owned())
}

/// Pure state over `axes(ρ)` plus an ancilla axis of full dimension whose
/// partial trace over the ancilla is ρ.
pub fn purify(rho: &DensityMatrix) -> Result<MetaState> {
    let alpha = purification_amplitudes(rho.matrix())?;
    let mut name = String::from("anc");
    while rho.axes.iter().any(|a| a.name == name) {
        name.push('\'');
    }
    let d = rho.dim();
    let mut axes = rho.axes.clone();
    axes.push(Axis::new(&name, d));
    let amps = (0..d * d).map(|k| alpha[(k / d, k % d)]).collect();
    MetaState::new(axes, amps)
}

/// Net j → (q, r) with root amplitudes `α_{qr}` (j = (q, r)) and deterministic
/// children `q = j1`, `r = j2`; `tr_r esum_j μ = β`.
pub fn mixed_state_net(beta: &CMat) -> Result<QbNet> {
    let d = beta.nrows();
    DensityMatrix::single("q", beta.clone())?;
    let alpha = purification_amplitudes(beta)?;
    let amps: Vec<Complex64> = (0..d * d).map(|k| alpha[(k / d, k % d)]).collect();
    NetBuilder::new()
        .node("j", &[d, d], &[], root_matrix(&amps))
        .node("q", &[d], &["j"], deterministic(d, d * d, |c| c / d))
        .node("r", &[d], &["j"], deterministic(d, d * d, |c| c % d))
        .build()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, max_abs_diff, re};

    fn epr_rho() -> DensityMatrix {
        let h = 0.5;
        let m = CMat::from_row_slice(
            4,
            4,
            &[
                C0, C0, C0, C0, C0, re(h), re(-h), C0, C0, re(-h), re(h), C0, C0, C0, C0, C0,
            ],
        );
        DensityMatrix::new(vec![Axis::new("x", 2), Axis::new("y", 2)], m).unwrap()
    }

    #[test]
    fn epr_reductions() {
        let rho = epr_rho();
        let tx = rho.partial_trace(&["x"]).unwrap();
        assert!(max_abs_diff(tx.matrix(), &CMat::identity(2, 2).scale(0.5)) < 1e-15);
        assert_eq!(tx.axis_names(), vec!["y"]);
        let p = rho.project_basis("y", 1).unwrap();
        assert!(max_abs_diff(p.matrix(), &CMat::from_row_slice(2, 2, &[C1, C0, C0, C0])) < 1e-15);
        assert!((rho.s("x:y").unwrap() - 2.0).abs() < 1e-12);
        assert!((rho.s("x|y").unwrap() + 1.0).abs() < 1e-12);
        assert!((rho.h("x,y").unwrap() - 1.0).abs() < 1e-12);
        assert!(rho.coherence(&["x"]).unwrap().abs() < 1e-12);
        let e = rho.eig().unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-14 && e.values[1].abs() < 1e-14);
    }

    #[test]
    fn reduction_errors() {
        let rho = epr_rho();
        assert_eq!(rho.partial_trace(&["x", "y"]).unwrap_err(), Error::EmptyResult);
        assert!(matches!(rho.partial_trace(&["z"]), Err(Error::UnknownAxis(_))));
        assert!(matches!(rho.s("x:z"), Err(Error::UnknownAxis(_))));
        let p = rho.project_basis("y", 1).unwrap();
        // x is now |0><0|; projecting onto |1> has zero probability
        let q = p.tensor(&DensityMatrix::single("z", CMat::identity(2, 2).scale(0.5)).unwrap()).unwrap();
        assert!(matches!(q.project_basis("x", 1), Err(Error::ZeroProbability(_))));
    }

    #[test]
    fn entropy_basics() {
        let half = DensityMatrix::single("a", CMat::identity(2, 2).scale(0.5)).unwrap();
        assert!((half.von_neumann_entropy().unwrap() - 1.0).abs() < 1e-14);
        let p = 0.3;
        let u = crate::random::unitary(&mut crate::random::seeded(5), 2);
        let d = CMat::from_diagonal(&CVec::from_vec(vec![re(p), re(1.0 - p)]));
        let rho = DensityMatrix::single("a", &u * d * u.adjoint()).unwrap();
        let h = crate::entexpr::binary_entropy(p).unwrap();
        assert!((rho.von_neumann_entropy().unwrap() - h).abs() < 1e-12);
    }

    #[test]
    fn validation_of_new() {
        let m = CMat::from_row_slice(2, 2, &[re(1.5), C0, C0, re(-0.5)]);
        assert!(matches!(DensityMatrix::single("a", m), Err(Error::NotPositive(_))));
        let m = CMat::from_row_slice(2, 2, &[re(1.0), C0, C0, re(1.0)]);
        assert!(matches!(DensityMatrix::single("a", m), Err(Error::NotNormalized(_))));
        let m = CMat::from_row_slice(2, 2, &[re(0.5), c(0.0, 0.1), c(0.0, 0.1), re(0.5)]);
        assert!(matches!(DensityMatrix::single("a", m), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn purify_maximally_mixed() {
        let half = DensityMatrix::single("q", CMat::identity(2, 2).scale(0.5)).unwrap();
        let psi = purify(&half).unwrap();
        let back = psi.density().unwrap().partial_trace(&["anc"]).unwrap();
        assert!(max_abs_diff(back.matrix(), half.matrix()) < 1e-12);
        assert!((psi.density().unwrap().s("anc").unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn purified_matches_dense() {
        let mut rng = crate::random::seeded(11);
        let beta = crate::random::density_matrix(&mut rng, 3, 3);
        let net = mixed_state_net(&beta).unwrap();
        let ms = meta_state(&net).unwrap();
        let dense = ms.density().unwrap().esum(&["j"]).unwrap().partial_trace(&["r"]).unwrap();
        let mut lazy = ms.reducer();
        lazy.trace(&["r"]).unwrap();
        lazy.esum(&["j"]).unwrap();
        let lazy = lazy.density().unwrap();
        assert!(max_abs_diff(dense.matrix(), lazy.matrix()) < 1e-13);
        assert!(max_abs_diff(lazy.matrix(), &beta) < 1e-12);
        assert_eq!(lazy.axis_names(), vec!["q"]);
    }
}
