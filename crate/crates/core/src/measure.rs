//! POMs: validation, classification, outcome probabilities and unitary
//! dilations realized as QB nets.

use num_complex::Complex64;

use crate::density::{meta_state, DensityMatrix};
use crate::error::{Error, Result};
use crate::linalg::{self, eigh, CMat, CVec, C0, C1};
use crate::netcore::{deterministic, root_matrix, NetBuilder, QbNet};
use crate::qprob::ProbTable;

pub use crate::linalg::sqrt_psd;

/// Tolerance for POM validity (Hermiticity, positivity, completeness).
pub const POM_TOL: f64 = 1e-9;
/// Gram-Schmidt candidates with a smaller residual norm are skipped.
pub const COMPLETION_CUTOFF: f64 = 1e-10;

/// Node names added by [`pom_net`].
pub const POINTER: &str = "b";
pub const RECORD: &str = "x";
pub const INTERACTION: &str = "t";
pub const SYSTEM_OUT: &str = "q_f";
pub const POINTER_OUT: &str = "b_f";
pub const RECORD_OUT: &str = "x_f";

#[derive(Debug, Clone)]
pub struct Pom {
    dim: usize,
    elements: Vec<CMat>,
}

impl Pom {
    /// Checks shapes only; see [`validate_pom`] for the POM conditions.
    pub fn from_elements(elements: Vec<CMat>) -> Result<Self> {
        let first = elements.first().ok_or_else(|| Error::InvalidPom("no elements".into()))?;
        let dim = first.nrows();
        if elements.iter().any(|f| f.nrows() != dim || f.ncols() != dim) {
            return Err(Error::InvalidPom("elements must be square of a common dimension".into()));
        }
        Ok(Pom { dim, elements })
    }

    /// Shape checks plus Hermiticity, non-negativity and completeness.
    pub fn new(elements: Vec<CMat>) -> Result<Self> {
        let p = Self::from_elements(elements)?;
        let r = validate_pom(&p);
        if !r.is_valid() {
            return Err(Error::InvalidPom(format!(
                "hermitian residual {:.3e}, min eigenvalue {:.3e}, completeness residual {:.3e}",
                r.hermitian_residual, r.min_eigenvalue, r.completeness_residual
            )));
        }
        Ok(p)
    }

    /// Projectors onto the computational basis.
    pub fn basis(d: usize) -> Self {
        let elements = (0..d)
            .map(|b| {
                let mut m = CMat::zeros(d, d);
                m[(b, b)] = C1;
                m
            })
            .collect();
        Pom { dim: d, elements }
    }

    /// `F_b = |v_b⟩⟨v_b|`.
    pub fn from_vectors(vectors: &[CVec]) -> Result<Self> {
        Self::new(vectors.iter().map(linalg::outer).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn outcomes(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[CMat] {
        &self.elements
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PomReport {
    pub hermitian_residual: f64,
    pub min_eigenvalue: f64,
    pub completeness_residual: f64,
}

impl PomReport {
    pub fn is_valid(&self) -> bool {
        self.hermitian_residual <= POM_TOL
            && self.min_eigenvalue >= -POM_TOL
            && self.completeness_residual <= POM_TOL
    }
}

pub fn validate_pom(p: &Pom) -> PomReport {
    let mut herm = 0.0f64;
    let mut low = f64::INFINITY;
    let mut sum = CMat::zeros(p.dim, p.dim);
    for f in &p.elements {
        herm = herm.max(linalg::hermitian_residual(f));
        let sym = (f + f.adjoint()).scale(0.5);
        if let Ok(e) = eigh(&sym) {
            low = low.min(*e.values.last().unwrap());
        }
        sum += f;
    }
    PomReport {
        hermitian_residual: herm,
        min_eigenvalue: low,
        completeness_residual: linalg::identity_residual(&sum),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PomClass {
    pub orthogonal: bool,
    pub pure: bool,
    pub von_neumann: bool,
}

/// Orthogonal: `F_b F_b' = 0` for `b ≠ b'`. Pure: every element is a rank-1
/// projector.
pub fn classify_pom(p: &Pom) -> PomClass {
    let n = p.elements.len();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                worst = worst.max((&p.elements[i] * &p.elements[j]).norm());
            }
        }
    }
    let orthogonal = worst < POM_TOL;
    let pure = p.elements.iter().all(|f| {
        let square = linalg::max_abs_diff(&(f * f), f) < POM_TOL;
        let rank_one = (linalg::trace(f).re - 1.0).abs() < POM_TOL;
        square && rank_one
    });
    PomClass { orthogonal, pure, von_neumann: orthogonal && pure }
}

/// Whether every element is a projector (`F² = F`).
pub fn is_projective(p: &Pom) -> bool {
    p.elements.iter().all(|f| linalg::max_abs_diff(&(f * f), f) < POM_TOL)
}

/// `P(b) = tr(ρ F_b)` for a density matrix on one axis.
pub fn measure_probs(rho: &DensityMatrix, p: &Pom) -> Result<ProbTable> {
    if rho.axes().len() != 1 || rho.dim() != p.dim {
        return Err(Error::DimensionMismatch(format!(
            "POM of dimension {} applied to a state of dimension {} over {} axes",
            p.dim,
            rho.dim(),
            rho.axes().len()
        )));
    }
    let values = outcome_probabilities(rho.matrix(), p);
    ProbTable::new(vec![POINTER.into()], vec![p.outcomes()], values)
}

pub(crate) fn outcome_probabilities(rho: &CMat, p: &Pom) -> Vec<f64> {
    p.elements.iter().map(|f| linalg::trace(&(rho * f)).re).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DilationVariant {
    /// `U|φ⟩|0⟩ = Σ_b (√F_b φ)|b⟩` on `q ⊗ b`.
    OrthogonalProjector,
    /// `U|φ⟩|0⟩|0⟩ = Σ_b (√F_b φ)|b⟩|b⟩` on `q ⊗ b ⊗ x`.
    General,
}

impl DilationVariant {
    fn registers(self) -> usize {
        match self {
            DilationVariant::OrthogonalProjector => 1,
            DilationVariant::General => 2,
        }
    }
}

/// Dimension of the space the dilation acts on.
pub fn dilation_dim(p: &Pom, variant: DilationVariant) -> usize {
    p.dim * p.outcomes().pow(variant.registers() as u32)
}

/// Flat index of `(q, b[, b])`, first register slowest.
fn dilated_index(m: usize, variant: DilationVariant, q: usize, b: usize) -> usize {
    match variant {
        DilationVariant::OrthogonalProjector => q * m + b,
        DilationVariant::General => (q * m + b) * m + b,
    }
}

/// A unitary satisfying the dilation constraint. The columns with all
/// ancilla inputs at 0 are fixed by the constraint; the rest come from
/// Gram-Schmidt on canonical vectors.
pub fn dilation_unitary(p: &Pom, variant: DilationVariant) -> Result<CMat> {
    let d = p.dim;
    let m = p.outcomes();
    let n = dilation_dim(p, variant);
    let block = n / d;
    let roots = p.elements.iter().map(sqrt_psd).collect::<Result<Vec<_>>>()?;
    let fixed: Vec<CVec> = (0..d)
        .map(|q| {
            let mut v = CVec::zeros(n);
            for (b, r) in roots.iter().enumerate() {
                for qo in 0..d {
                    v[dilated_index(m, variant, qo, b)] = r[(qo, q)];
                }
            }
            v
        })
        .collect();
    for v in &fixed {
        let norm = v.norm();
        if (norm - 1.0).abs() > POM_TOL {
            return Err(Error::InvalidPom(format!("constrained column has norm {norm}")));
        }
    }
    let rest = linalg::complete_basis(&fixed, n, COMPLETION_CUTOFF)?;
    let mut u = CMat::zeros(n, n);
    let mut rest_iter = rest.into_iter();
    for col in 0..n {
        let v = if col % block == 0 { fixed[col / block].clone() } else { rest_iter.next().unwrap() };
        u.set_column(col, &v);
    }
    Ok(u)
}

/// Largest deviation from the dilation constraint over the input basis
/// `|q⟩|0⟩[|0⟩]`.
pub fn dilation_residual(p: &Pom, variant: DilationVariant, u: &CMat) -> Result<f64> {
    let d = p.dim;
    let m = p.outcomes();
    let n = dilation_dim(p, variant);
    if u.nrows() != n || u.ncols() != n {
        return Err(Error::DimensionMismatch("dilation size".into()));
    }
    let roots = p.elements.iter().map(sqrt_psd).collect::<Result<Vec<_>>>()?;
    let mut worst = 0.0f64;
    for q in 0..d {
        let mut input = CVec::zeros(n);
        input[q * (n / d)] = C1;
        let out = u * input;
        let mut expected = CVec::zeros(n);
        for (b, r) in roots.iter().enumerate() {
            for qo in 0..d {
                expected[dilated_index(m, variant, qo, b)] = r[(qo, q)];
            }
        }
        worst = worst.max((out - expected).camax());
    }
    Ok(worst)
}

/// A preparation net extended by the pointer, record and interaction nodes.
#[derive(Debug, Clone)]
pub struct PomNet {
    pub net: QbNet,
    pub variant: DilationVariant,
}

impl PomNet {
    /// Trace every external node except `b_f`, e-sum every internal node.
    pub fn outcome_density(&self) -> Result<DensityMatrix> {
        let dag = self.net.dag();
        let (internal, external) = dag.classify_nodes();
        let mut state = meta_state(&self.net)?.reducer();
        let tr: Vec<String> =
            dag.names(&external).into_iter().filter(|n| n != POINTER_OUT).collect();
        if !tr.is_empty() {
            state.trace(&tr.iter().map(String::as_str).collect::<Vec<_>>())?;
        }
        let es = dag.names(&internal);
        state.esum(&es.iter().map(String::as_str).collect::<Vec<_>>())?;
        state.density()
    }
}

/// State on node `name` of a net: trace the other externals, e-sum the other internals.
pub fn node_state(net: &QbNet, name: &str) -> Result<DensityMatrix> {
    let dag = net.dag();
    let target = dag.index_of(name)?;
    let mut state = meta_state(net)?.reducer();
    let tr: Vec<String> = (0..dag.len())
        .filter(|&i| i != target && !dag.is_internal(i))
        .map(|i| dag.name(i).to_string())
        .collect();
    if !tr.is_empty() {
        state.trace(&tr.iter().map(String::as_str).collect::<Vec<_>>())?;
    }
    let es: Vec<String> = (0..dag.len())
        .filter(|&i| i != target && dag.is_internal(i))
        .map(|i| dag.name(i).to_string())
        .collect();
    state.esum(&es.iter().map(String::as_str).collect::<Vec<_>>())?;
    state.density()
}

/// Appends `b = δ(b,0)` [, `x = δ(x,0)`], `t = U(t|q,b[,x])` and the
/// deterministic outputs `q_f`, `b_f` [, `x_f`] to a net with a node `q`.
pub fn extend_with_measurement(
    builder: NetBuilder<Complex64>,
    q_name: &str,
    d: usize,
    p: &Pom,
    variant: DilationVariant,
    names: [&str; 6],
) -> Result<NetBuilder<Complex64>> {
    let [b, x, t, qf, bf, xf] = names;
    let m = p.outcomes();
    let u = dilation_unitary(p, variant)?;
    let n = u.nrows();
    let mut zero = vec![C0; m];
    zero[0] = C1;
    let mut builder = builder.node(b, &[m], &[], root_matrix(&zero));
    match variant {
        DilationVariant::OrthogonalProjector => {
            builder = builder
                .node(t, &[d, m], &[q_name, b], u)
                .node(qf, &[d], &[t], deterministic(d, n, |c| c / m))
                .node(bf, &[m], &[t], deterministic(m, n, |c| c % m));
        }
        DilationVariant::General => {
            builder = builder
                .node(x, &[m], &[], root_matrix(&zero))
                .node(t, &[d, m, m], &[q_name, b, x], u)
                .node(qf, &[d], &[t], deterministic(d, n, |c| c / (m * m)))
                .node(bf, &[m], &[t], deterministic(m, n, |c| (c / m) % m))
                .node(xf, &[m], &[t], deterministic(m, n, |c| c % m));
        }
    }
    Ok(builder)
}

/// Measurement net on top of `prep`, which must contain a node `q` of the
/// POM's dimension.
pub fn pom_net(p: &Pom, prep: &QbNet, variant: DilationVariant) -> Result<PomNet> {
    let q = prep.dag().index_of("q")?;
    let d = prep.dag().node(q).dim();
    if d != p.dim {
        return Err(Error::DimensionMismatch(format!(
            "node q has dimension {d}, POM has dimension {}",
            p.dim
        )));
    }
    let names = [POINTER, RECORD, INTERACTION, SYSTEM_OUT, POINTER_OUT, RECORD_OUT];
    for n in names {
        if prep.dag().index_of(n).is_ok() {
            return Err(Error::DuplicateNode(n.to_string()));
        }
    }
    let builder = extend_with_measurement(NetBuilder::from(prep), "q", d, p, variant, names)?;
    Ok(PomNet { net: builder.build()?, variant })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::re;

    #[test]
    fn singleton_identity() {
        let p = Pom::new(vec![CMat::identity(2, 2)]).unwrap();
        assert!(validate_pom(&p).is_valid());
        let u = dilation_unitary(&p, DilationVariant::OrthogonalProjector).unwrap();
        assert!(linalg::identity_residual(&u) < 1e-15);
        let bad = Pom::from_elements(vec![CMat::identity(2, 2).scale(2.0)]).unwrap();
        let r = validate_pom(&bad);
        assert!(!r.is_valid());
        assert!((r.completeness_residual - 1.0).abs() < 1e-15);
    }

    #[test]
    fn classes() {
        let c = classify_pom(&Pom::basis(3));
        assert!(c.orthogonal && c.pure && c.von_neumann);
        let half = Pom::new(vec![CMat::identity(2, 2).scale(0.5), CMat::identity(2, 2).scale(0.5)]).unwrap();
        let c = classify_pom(&half);
        assert!(!c.orthogonal && !c.pure && !c.von_neumann);
    }

    #[test]
    fn basis_dilation_copies() {
        let p = Pom::basis(2);
        let u = dilation_unitary(&p, DilationVariant::OrthogonalProjector).unwrap();
        assert!(linalg::unitarity_residual(&u) < 1e-14);
        // |q>|0> -> |q>|q>
        assert_eq!(u[(0, 0)], re(1.0));
        assert_eq!(u[(3, 2)], re(1.0));
        assert!(dilation_residual(&p, DilationVariant::OrthogonalProjector, &u).unwrap() < 1e-15);
    }

    #[test]
    fn probabilities() {
        let rho = DensityMatrix::single("q", CMat::identity(2, 2).scale(0.5)).unwrap();
        let t = measure_probs(&rho, &Pom::basis(2)).unwrap();
        assert_eq!(t.values, vec![0.5, 0.5]);
        assert!(matches!(measure_probs(&rho, &Pom::basis(3)), Err(Error::DimensionMismatch(_))));
    }
}
