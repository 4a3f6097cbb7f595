//! Builders for the worked examples: small CB nets and Markov chains, a
//! system meeting its environment, two interacting mixtures, the EPR pair,
//! the quantum eraser, teleportation and dense coding.
//!
//! Every QB example is returned as a [`ProtocolFixture`]: the net, a list of
//! named reductions and the values they must reproduce.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::density::{basis_vector, rho_out, Axis, DensityMatrix};
use crate::entexpr::shannon_entropy;
use crate::error::{Error, Result};
use crate::linalg::{self, c, re, CMat, CVec, C0};
use crate::netcore::{deterministic, root_matrix, CbNet, NetBuilder, QbNet};
use crate::qprob::{cb_joint, ProbTable};
use crate::random::{self, Rng};
use crate::recipe::Recipe;

/// Tolerance for the entropy tables of the EPR, eraser, teleportation and
/// dense-coding fixtures.
pub const TABLE_TOL: f64 = 1e-9;
/// Tolerance for the system-environment and two-mixture relations.
pub const INEQ_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Eq,
    Le,
    Ge,
}

impl Relation {
    /// How far `actual` is from satisfying `actual REL target`.
    pub fn violation(self, actual: f64, target: f64) -> f64 {
        match self {
            Relation::Eq => (actual - target).abs(),
            Relation::Le => (actual - target).max(0.0),
            Relation::Ge => (target - actual).max(0.0),
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Eq => "=",
            Relation::Le => "<=",
            Relation::Ge => ">=",
        }
    }
}

pub type Probe = Arc<dyn Fn(&Evaluated) -> Result<f64> + Send + Sync>;

#[derive(Clone)]
pub enum Quantity {
    S(String),
    H(String),
    Coherence(Vec<String>),
    Probe(Probe),
}

impl fmt::Debug for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Quantity::S(e) => write!(f, "S({e})"),
            Quantity::H(e) => write!(f, "H({e})"),
            Quantity::Coherence(n) => write!(f, "coherence({})", n.join(",")),
            Quantity::Probe(_) => write!(f, "probe"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Expectation {
    pub label: String,
    /// Reduction the quantity is evaluated on; probes may use several.
    pub state: Option<String>,
    pub quantity: Quantity,
    pub relation: Relation,
    pub value: f64,
    pub tol: f64,
}

#[derive(Debug, Clone)]
pub enum Source {
    /// A recipe applied to the fixture's net.
    Net(Recipe),
    /// A recipe applied to another net, usually a sub-net.
    Subnet(QbNet, Recipe),
    /// A recipe applied to an earlier reduction.
    Derived(String, Recipe),
}

#[derive(Debug, Clone)]
pub struct Reduction {
    pub name: String,
    pub source: Source,
}

#[derive(Debug, Clone)]
pub struct ProtocolFixture {
    pub name: String,
    pub net: QbNet,
    pub reductions: Vec<Reduction>,
    pub expected: Vec<Expectation>,
}

/// The reductions of a fixture, computed once.
pub struct Evaluated<'a> {
    pub net: &'a QbNet,
    states: BTreeMap<String, DensityMatrix>,
}

impl Evaluated<'_> {
    pub fn state(&self, name: &str) -> Result<&DensityMatrix> {
        self.states.get(name).ok_or_else(|| Error::UnknownNode(name.to_string()))
    }

    pub fn s(&self, state: &str, expr: &str) -> Result<f64> {
        self.state(state)?.s(expr)
    }

    pub fn h(&self, state: &str, expr: &str) -> Result<f64> {
        self.state(state)?.h(expr)
    }
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub label: String,
    pub relation: Relation,
    pub expected: f64,
    pub actual: f64,
    pub tol: f64,
}

impl Outcome {
    pub fn residual(&self) -> f64 {
        self.relation.violation(self.actual, self.expected)
    }

    pub fn pass(&self) -> bool {
        self.residual() <= self.tol
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}\t{}\t{}\t{} {}",
            if self.pass() { "PASS" } else { "FAIL" },
            self.label,
            crate::density::fmt9(self.actual),
            self.relation.symbol(),
            crate::density::fmt9(self.expected)
        )
    }
}

impl ProtocolFixture {
    pub fn new(name: &str, net: QbNet) -> Self {
        ProtocolFixture { name: name.to_string(), net, reductions: Vec::new(), expected: Vec::new() }
    }

    pub fn reduce(&mut self, name: &str, recipe: Recipe) -> &mut Self {
        self.reductions.push(Reduction { name: name.to_string(), source: Source::Net(recipe) });
        self
    }

    pub fn reduce_subnet(&mut self, name: &str, net: QbNet, recipe: Recipe) -> &mut Self {
        self.reductions.push(Reduction { name: name.to_string(), source: Source::Subnet(net, recipe) });
        self
    }

    pub fn derive(&mut self, name: &str, from: &str, recipe: Recipe) -> &mut Self {
        self.reductions
            .push(Reduction { name: name.to_string(), source: Source::Derived(from.to_string(), recipe) });
        self
    }

    pub fn expect_s(&mut self, state: &str, expr: &str, value: f64, tol: f64) -> &mut Self {
        self.expected.push(Expectation {
            label: format!("S_{state}({expr})"),
            state: Some(state.to_string()),
            quantity: Quantity::S(expr.to_string()),
            relation: Relation::Eq,
            value,
            tol,
        });
        self
    }

    pub fn expect_h(&mut self, state: &str, expr: &str, value: f64, tol: f64) -> &mut Self {
        self.expected.push(Expectation {
            label: format!("H_{state}({expr})"),
            state: Some(state.to_string()),
            quantity: Quantity::H(expr.to_string()),
            relation: Relation::Eq,
            value,
            tol,
        });
        self
    }

    pub fn expect_coherence(&mut self, state: &str, names: &[&str], value: f64, tol: f64) -> &mut Self {
        self.expected.push(Expectation {
            label: format!("coherence_{state}({})", names.join(",")),
            state: Some(state.to_string()),
            quantity: Quantity::Coherence(names.iter().map(|s| s.to_string()).collect()),
            relation: Relation::Eq,
            value,
            tol,
        });
        self
    }

    pub fn expect_probe(
        &mut self,
        label: &str,
        relation: Relation,
        value: f64,
        tol: f64,
        probe: impl Fn(&Evaluated) -> Result<f64> + Send + Sync + 'static,
    ) -> &mut Self {
        self.expected.push(Expectation {
            label: label.to_string(),
            state: None,
            quantity: Quantity::Probe(Arc::new(probe)),
            relation,
            value,
            tol,
        });
        self
    }

    /// Rows `(expr, S, H)` of an entropy table on one reduction.
    pub fn expect_table(&mut self, state: &str, rows: &[(&str, f64, f64)], tol: f64) -> &mut Self {
        for &(expr, s, h) in rows {
            self.expect_s(state, expr, s, tol);
            self.expect_h(state, expr, h, tol);
        }
        self
    }

    /// `Σ coef · S_state(expr) REL value`.
    pub fn expect_linear(&mut self, terms: &[(f64, &str, &str)], relation: Relation, value: f64, tol: f64) -> &mut Self {
        let label = linear_label(terms);
        let terms: Vec<(f64, String, String)> =
            terms.iter().map(|&(k, s, e)| (k, s.to_string(), e.to_string())).collect();
        self.expect_probe(&label, relation, value, tol, move |ev| {
            terms.iter().try_fold(0.0, |acc, (k, s, e)| Ok(acc + k * ev.s(s, e)?))
        })
    }

    pub fn evaluate(&self) -> Result<Evaluated<'_>> {
        let mut states = BTreeMap::new();
        for r in &self.reductions {
            let rho = match &r.source {
                Source::Net(recipe) => recipe.apply(&self.net)?,
                Source::Subnet(net, recipe) => recipe.apply(net)?,
                Source::Derived(from, recipe) => {
                    let base = states.get(from).ok_or_else(|| Error::UnknownNode(from.clone()))?;
                    recipe.apply_dense(base)?
                }
            };
            states.insert(r.name.clone(), rho);
        }
        Ok(Evaluated { net: &self.net, states })
    }

    pub fn check(&self) -> Result<Vec<Outcome>> {
        let ev = self.evaluate()?;
        self.expected
            .iter()
            .map(|e| {
                let state = || e.state.as_deref().ok_or_else(|| Error::UnknownNode(e.label.clone()));
                let actual = match &e.quantity {
                    Quantity::S(expr) => ev.s(state()?, expr)?,
                    Quantity::H(expr) => ev.h(state()?, expr)?,
                    Quantity::Coherence(names) => {
                        let names: Vec<&str> = names.iter().map(String::as_str).collect();
                        ev.state(state()?)?.coherence(&names)?
                    }
                    Quantity::Probe(p) => p(&ev)?,
                };
                Ok(Outcome {
                    label: e.label.clone(),
                    relation: e.relation,
                    expected: e.value,
                    actual,
                    tol: e.tol,
                })
            })
            .collect()
    }

    pub fn passes(&self) -> Result<bool> {
        Ok(self.check()?.iter().all(Outcome::pass))
    }
}

fn linear_label(terms: &[(f64, &str, &str)]) -> String {
    let mut out = String::new();
    for (i, &(k, s, e)) in terms.iter().enumerate() {
        let sign = if k < 0.0 { "-" } else if i > 0 { "+" } else { "" };
        let mag = if (k.abs() - 1.0).abs() < 1e-15 { String::new() } else { format!("{}*", k.abs()) };
        out.push_str(&format!("{sign}{mag}S_{s}({e})"));
    }
    out
}

fn matrix_probe(state: &str, expected: CMat) -> impl Fn(&Evaluated) -> Result<f64> + Send + Sync + 'static {
    let state = state.to_string();
    move |ev| Ok(linalg::max_abs_diff(ev.state(&state)?.matrix(), &expected))
}

fn check_amplitudes(alpha: &[Complex64], len: usize) -> Result<()> {
    if alpha.len() != len {
        return Err(Error::DimensionMismatch(format!("expected {len} amplitudes, got {}", alpha.len())));
    }
    let n: f64 = alpha.iter().map(|z| z.norm_sqr()).sum();
    if (n - 1.0).abs() > 1e-9 {
        return Err(Error::NotNormalized(n));
    }
    Ok(())
}

fn check_unitary(u: &CMat, n: usize) -> Result<()> {
    if u.nrows() != n || u.ncols() != n {
        return Err(Error::DimensionMismatch(format!("expected a {n}x{n} unitary, got {}x{}", u.nrows(), u.ncols())));
    }
    let r = linalg::unitarity_residual(u);
    if r > 1e-9 {
        return Err(Error::NotUnitary(r));
    }
    Ok(())
}

fn sign(bits: usize) -> f64 {
    if bits % 2 == 0 { 1.0 } else { -1.0 }
}

// ---------------------------------------------------------------------------
// EPR pair and quantum eraser

/// `ψ(e) = (δ(e,01) − δ(e,10))/√2` over `e = (e1, e2)`.
pub fn psi_epr() -> Vec<Complex64> {
    vec![C0, re(FRAC_1_SQRT_2), re(-FRAC_1_SQRT_2), C0]
}

/// Nodes `e`, `x = e1`, `y = e2`.
fn epr_builder() -> NetBuilder<Complex64> {
    NetBuilder::new()
        .node("e", &[2, 2], &[], root_matrix(&psi_epr()))
        .node("x", &[2], &["e"], deterministic(2, 4, |c| c / 2))
        .node("y", &[2], &["e"], deterministic(2, 4, |c| c % 2))
}

fn pure_matrix(v: &[f64]) -> CMat {
    linalg::outer(&CVec::from_iterator(v.len(), v.iter().map(|&x| re(x))))
}

pub fn epr_net() -> ProtocolFixture {
    let net = epr_builder().build().expect("EPR net");
    let mut fx = ProtocolFixture::new("epr", net);
    fx.reduce("rho", Recipe::new().esum(&["e"]))
        .derive("rho_y0", "rho", Recipe::new().project("y", 0))
        .derive("rho_y1", "rho", Recipe::new().project("y", 1));
    let t = TABLE_TOL;
    fx.expect_table(
        "rho",
        &[
            ("x", 1.0, 1.0),
            ("y", 1.0, 1.0),
            ("x,y", 0.0, 1.0),
            ("x|y", -1.0, 0.0),
            ("y|x", -1.0, 0.0),
            ("x:y", 2.0, 1.0),
        ],
        t,
    );
    fx.expect_coherence("rho", &["x"], 0.0, t)
        .expect_coherence("rho", &["y"], 0.0, t)
        .expect_probe("rho matrix", Relation::Eq, 0.0, t, {
            let h = FRAC_1_SQRT_2;
            matrix_probe("rho", pure_matrix(&[0.0, h, -h, 0.0]))
        });
    for (state, k) in [("rho_y0", 1.0), ("rho_y1", 0.0)] {
        fx.expect_s(state, "x", 0.0, t).expect_h(state, "x", 0.0, t).expect_probe(
            &format!("{state} = |{k}><{k}|"),
            Relation::Eq,
            0.0,
            t,
            matrix_probe(state, if k == 1.0 { pure_matrix(&[0.0, 1.0]) } else { pure_matrix(&[1.0, 0.0]) }),
        );
    }
    fx
}

/// `U(r|y) = (−1)^{yr}/√2`.
pub fn hadamard() -> CMat {
    let h = FRAC_1_SQRT_2;
    CMat::from_row_slice(2, 2, &[re(h), re(h), re(h), re(-h)])
}

pub fn eraser_net() -> ProtocolFixture {
    let net = epr_builder().node("r", &[2], &["y"], hadamard()).build().expect("eraser net");
    let epr = epr_builder().build().expect("EPR net");
    let mut fx = ProtocolFixture::new("eraser", net);
    fx.reduce_subnet("rho0", epr, Recipe::new().esum(&["e"]))
        .reduce("rho", Recipe::new().esum(&["e", "y"]))
        .derive("rho_r0", "rho", Recipe::new().project("r", 0))
        .derive("rho_r1", "rho", Recipe::new().project("r", 1));
    let t = TABLE_TOL;
    fx.expect_s("rho0", "x", 1.0, t).expect_h("rho0", "x", 1.0, t);
    fx.expect_table(
        "rho",
        &[
            ("x", 1.0, 1.0),
            ("r", 1.0, 1.0),
            ("x,r", 0.0, 2.0),
            ("x|r", -1.0, 1.0),
            ("r|x", -1.0, 1.0),
            ("x:r", 2.0, 0.0),
        ],
        t,
    );
    fx.expect_coherence("rho", &["x", "r"], 2.0, t).expect_probe(
        "rho matrix",
        Relation::Eq,
        0.0,
        t,
        matrix_probe("rho", pure_matrix(&[0.5, -0.5, -0.5, -0.5])),
    );
    let h = FRAC_1_SQRT_2;
    for (state, v) in [("rho_r0", [h, -h]), ("rho_r1", [h, h])] {
        fx.expect_s(state, "x", 0.0, t)
            .expect_h(state, "x", 1.0, t)
            .expect_coherence(state, &["x"], 1.0, t)
            .expect_probe(&format!("{state} matrix"), Relation::Eq, 0.0, t, matrix_probe(state, pure_matrix(&v)));
    }
    fx.expect_probe("2<r|rho|r> vs normalized projection", Relation::Eq, 0.0, 1e-12, |ev| {
        let rho = ev.state("rho")?;
        let mut worst: f64 = 0.0;
        for k in 0..2 {
            let (_, m) = rho.sandwich("r", &basis_vector(2, k)?)?;
            let p = rho.project_basis("r", k)?;
            worst = worst.max(linalg::max_abs_diff(&m.scale(2.0), p.matrix()));
        }
        Ok(worst)
    });
    fx.expect_probe("<x|<r|rho|r>|x> - <r|<x|rho|x>|r>", Relation::Eq, 0.0, 1e-12, |ev| {
        let rho = ev.state("rho")?;
        let mut worst: f64 = 0.0;
        for x in 0..2 {
            for r in 0..2 {
                let (_, after_r) = rho.sandwich("r", &basis_vector(2, r)?)?;
                let (_, after_x) = rho.sandwich("x", &basis_vector(2, x)?)?;
                worst = worst.max((after_r[(x, x)] - after_x[(r, r)]).norm());
            }
        }
        Ok(worst)
    });
    fx
}

// ---------------------------------------------------------------------------
// Teleportation and dense coding

/// Bell-basis matrix `U(f|a,x) = ⟨Ψ(f)|a,x⟩`, rows `f = (f1, f2)`, columns `(a, x)`.
pub fn bell_u() -> CMat {
    let h = FRAC_1_SQRT_2;
    CMat::from_fn(4, 4, |f, col| {
        let (f1, f2) = (f / 2, f % 2);
        let (a, x) = (col / 2, col % 2);
        let mut v = 0.0;
        if a == 0 && x == f1 {
            v += h;
        }
        if a == 1 && x == 1 - f1 {
            v += sign(f2) * h;
        }
        re(v)
    })
}

/// `R(b|f,y) = U(f|b,ȳ) (−1)^ȳ (−1)^{f1 f2} √2`, rows `b`, columns `(f, y)`.
pub fn teleport_r() -> CMat {
    let u = bell_u();
    CMat::from_fn(2, 8, |b, col| {
        let (f, y) = (col / 2, col % 2);
        let yb = 1 - y;
        u[(f, b * 2 + yb)] * sign(yb) * sign((f / 2) * (f % 2)) * SQRT_2
    })
}

/// `R(t|a,x) = U(a|t,x̄) (−1)^x √2`, rows `t`, columns `(a, x)` with `a = (a1, a2)`.
pub fn dense_coding_r() -> CMat {
    let u = bell_u();
    CMat::from_fn(2, 8, |t, col| {
        let (a, x) = (col / 2, col % 2);
        u[(a, t * 2 + (1 - x))] * sign(x) * SQRT_2
    })
}

fn column_norm_residual(m: &CMat) -> f64 {
    m.column_iter().map(|col| (col.norm_squared() - 1.0).abs()).fold(0.0, f64::max)
}

/// `K(x,y,a,f,b) = R(b|f,y) U(f|a,x) ψ(x,y)`, indexed `[x][y][a][f][b]` flattened.
fn teleport_k() -> Vec<Complex64> {
    let (u, r, psi) = (bell_u(), teleport_r(), psi_epr());
    let mut k = vec![C0; 2 * 2 * 2 * 4 * 2];
    for x in 0..2 {
        for y in 0..2 {
            for a in 0..2 {
                for f in 0..4 {
                    for b in 0..2 {
                        k[(((x * 2 + y) * 2 + a) * 4 + f) * 2 + b] = r[(b, f * 2 + y)] * u[(f, a * 2 + x)] * psi[x * 2 + y];
                    }
                }
            }
        }
    }
    k
}

/// Teleports `α` from node `a` to node `b` through an EPR pair `e`.
pub fn teleport_net(alpha: &[Complex64]) -> Result<ProtocolFixture> {
    check_amplitudes(alpha, 2)?;
    let net = epr_builder()
        .node("a", &[2], &[], root_matrix(alpha))
        .node("f", &[2, 2], &["a", "x"], bell_u())
        .node("b", &[2], &["f", "y"], teleport_r())
        .build()?;
    let hin = shannon_entropy(&alpha.iter().map(|z| z.norm_sqr()).collect::<Vec<_>>());
    let alpha: Vec<Complex64> = alpha.to_vec();
    let mut fx = ProtocolFixture::new("teleport", net);
    fx.reduce("sigma", Recipe::new().esum(&["e", "x", "y"]))
        .derive("rho_a", "sigma", Recipe::new().trace(&["b"]))
        .derive("rho_b", "sigma", Recipe::new().project("f", 0));
    let t = TABLE_TOL;

    fx.expect_probe("column norms of U and R", Relation::Eq, 0.0, 1e-12, |_| {
        Ok(linalg::unitarity_residual(&bell_u()).max(column_norm_residual(&teleport_r())))
    });
    let k = Arc::new(teleport_k());
    let at = |x: usize, y: usize, a: usize, f: usize, b: usize| (((x * 2 + y) * 2 + a) * 4 + f) * 2 + b;
    {
        let k = k.clone();
        fx.expect_probe("sum_xy K - (-1)^(f1 f2)/2 delta(a,b)", Relation::Eq, 0.0, 1e-12, move |_| {
            let mut worst: f64 = 0.0;
            for a in 0..2 {
                for f in 0..4 {
                    for b in 0..2 {
                        let s: Complex64 = (0..4).map(|xy| k[at(xy / 2, xy % 2, a, f, b)]).sum();
                        let want = if a == b { sign((f / 2) * (f % 2)) / 2.0 } else { 0.0 };
                        worst = worst.max((s - want).norm());
                    }
                }
            }
            Ok(worst)
        });
    }
    {
        let k = k.clone();
        fx.expect_probe("sum_xyf K - delta(a,b)", Relation::Eq, 0.0, 1e-12, move |_| {
            let mut worst: f64 = 0.0;
            for a in 0..2 {
                for b in 0..2 {
                    let s: Complex64 = (0..16).map(|i| k[at(i / 8, (i / 4) % 2, a, i % 4, b)]).sum();
                    worst = worst.max((s - if a == b { 1.0 } else { 0.0 }).norm());
                }
            }
            Ok(worst)
        });
    }
    {
        let k = k.clone();
        fx.expect_probe("sum_xy |K|^2 - delta(a,b)/4", Relation::Eq, 0.0, 1e-12, move |_| {
            let mut worst: f64 = 0.0;
            for a in 0..2 {
                for f in 0..4 {
                    for b in 0..2 {
                        let s: f64 = (0..4).map(|xy| k[at(xy / 2, xy % 2, a, f, b)].norm_sqr()).sum();
                        worst = worst.max((s - if a == b { 0.25 } else { 0.0 }).abs());
                    }
                }
            }
            Ok(worst)
        });
    }
    {
        let k = k.clone();
        fx.expect_probe("sum_xyf |K|^2 - delta(a,b)", Relation::Eq, 0.0, 1e-12, move |_| {
            let mut worst: f64 = 0.0;
            for a in 0..2 {
                for b in 0..2 {
                    let s: f64 = (0..16).map(|i| k[at(i / 8, (i / 4) % 2, a, i % 4, b)].norm_sqr()).sum();
                    worst = worst.max((s - if a == b { 1.0 } else { 0.0 }).abs());
                }
            }
            Ok(worst)
        });
    }
    {
        let (k, alpha) = (k.clone(), alpha.clone());
        fx.expect_probe("psi_out(f) - (-1)^(f1 f2) psi'_in", Relation::Eq, 0.0, 1e-10, move |_| {
            let mut worst: f64 = 0.0;
            for f in 0..4 {
                for b in 0..2 {
                    let s: Complex64 = (0..8)
                        .map(|i| k[at(i / 4, (i / 2) % 2, i % 2, f, b)] * alpha[i % 2])
                        .sum::<Complex64>()
                        * 2.0;
                    worst = worst.max((s - alpha[b] * sign((f / 2) * (f % 2))).norm());
                }
            }
            Ok(worst)
        });
    }
    {
        let (k, alpha) = (k.clone(), alpha.clone());
        fx.expect_probe("psi_out - psi'_in", Relation::Eq, 0.0, 1e-10, move |ev| {
            let mut worst: f64 = 0.0;
            for b in 0..2 {
                let s: Complex64 = (0..32).map(|i| k[at(i / 16, (i / 8) % 2, (i / 4) % 2, i % 4, b)] * alpha[(i / 4) % 2]).sum();
                worst = worst.max((s - alpha[b]).norm());
            }
            let out = rho_out(ev.net)?;
            let want = linalg::outer(&CVec::from_vec(alpha.clone()));
            Ok(worst.max(linalg::max_abs_diff(out.matrix(), &want)))
        });
    }
    // σ = |φ_ab⟩⟨φ_ab| ⊗ |φ_f⟩⟨φ_f| on axes (a, f, b).
    let mut phi = vec![C0; 16];
    for a in 0..2 {
        for f in 0..4 {
            phi[(a * 4 + f) * 2 + a] = alpha[a] * sign((f / 2) * (f % 2)) * 0.5;
        }
    }
    fx.expect_probe("sigma factorization", Relation::Eq, 0.0, 1e-10, matrix_probe("sigma", linalg::outer(&CVec::from_vec(phi))));

    fx.expect_table(
        "rho_a",
        &[
            ("a", hin, hin),
            ("f", 0.0, 2.0),
            ("a,f", hin, hin + 2.0),
            ("a|f", hin, hin),
            ("f|a", 0.0, 2.0),
            ("a:f", 0.0, 0.0),
        ],
        t,
    );
    fx.expect_table(
        "rho_b",
        &[
            ("a", hin, hin),
            ("b", hin, hin),
            ("a,b", 0.0, hin),
            ("a|b", -hin, 0.0),
            ("b|a", -hin, 0.0),
            ("a:b", 2.0 * hin, hin),
        ],
        t,
    );
    let mut phi_ab = vec![C0; 4];
    for a in 0..2 {
        phi_ab[a * 2 + a] = alpha[a];
    }
    let phi_ab = linalg::outer(&CVec::from_vec(phi_ab));
    fx.expect_probe("project, trace and esum over f agree", Relation::Eq, 0.0, 1e-10, move |ev| {
        let sigma = ev.state("sigma")?;
        let mut reduced = vec![sigma.partial_trace(&["f"])?, sigma.esum(&["f"])?];
        for k in 0..4 {
            reduced.push(sigma.project_basis("f", k)?);
        }
        Ok(reduced.iter().map(|r| linalg::max_abs_diff(r.matrix(), &phi_ab)).fold(0.0, f64::max))
    });
    Ok(fx)
}

/// `K(x,y,a,t,b) = U(b|t,y) R(t|a,x) ψ(x,y)`, indexed `[x][y][a][t][b]` flattened.
fn dense_coding_k() -> Vec<Complex64> {
    let (u, r, psi) = (bell_u(), dense_coding_r(), psi_epr());
    let mut k = vec![C0; 2 * 2 * 4 * 2 * 4];
    for x in 0..2 {
        for y in 0..2 {
            for a in 0..4 {
                for t in 0..2 {
                    for b in 0..4 {
                        k[(((x * 2 + y) * 4 + a) * 2 + t) * 4 + b] = u[(b, t * 2 + y)] * r[(t, a * 2 + x)] * psi[x * 2 + y];
                    }
                }
            }
        }
    }
    k
}

/// Two classical bits' worth of amplitudes `α_a`, `a = (a1, a2)`, sent
/// through one qubit `t` and an EPR pair.
pub fn dense_coding_net(alpha: &[Complex64]) -> Result<ProtocolFixture> {
    check_amplitudes(alpha, 4)?;
    let net = epr_builder()
        .node("a", &[2, 2], &[], root_matrix(alpha))
        .node("t", &[2], &["a", "x"], dense_coding_r())
        .node("b", &[2, 2], &["t", "y"], bell_u())
        .build()?;
    let probs: Vec<f64> = alpha.iter().map(|z| z.norm_sqr()).collect();
    let hin = shannon_entropy(&probs);
    let h1 = shannon_entropy(&[probs[0] + probs[1], probs[2] + probs[3]]);
    let alpha: Vec<Complex64> = alpha.to_vec();
    let mut fx = ProtocolFixture::new("densecode", net);
    fx.reduce("sigma", Recipe::new().esum(&["e", "x", "y"]))
        .derive("rho_a", "sigma", Recipe::new().trace(&["b"]))
        .derive("rho_b", "sigma", Recipe::new().esum(&["t"]));
    let t = TABLE_TOL;

    fx.expect_probe("column norms of U and R", Relation::Eq, 0.0, 1e-12, |_| {
        Ok(linalg::unitarity_residual(&bell_u()).max(column_norm_residual(&dense_coding_r())))
    });
    let k = Arc::new(dense_coding_k());
    let at = |x: usize, y: usize, a: usize, t: usize, b: usize| (((x * 2 + y) * 4 + a) * 2 + t) * 4 + b;
    {
        let k = k.clone();
        fx.expect_probe("K identities", Relation::Eq, 0.0, 1e-12, move |_| {
            let mut worst: f64 = 0.0;
            for a in 0..4 {
                let mut total = 0.0;
                for b in 0..4 {
                    let same1 = a / 2 == b / 2;
                    let mut sum_t = C0;
                    for tt in 0..2 {
                        let s: Complex64 = (0..4).map(|xy| k[at(xy / 2, xy % 2, a, tt, b)]).sum();
                        let want = if !same1 {
                            0.0
                        } else if tt == 0 {
                            0.5
                        } else {
                            0.5 * sign(a % 2 + b % 2)
                        };
                        worst = worst.max((s - want).norm());
                        sum_t += s;
                        let sq: f64 = (0..4).map(|xy| k[at(xy / 2, xy % 2, a, tt, b)].norm_sqr()).sum();
                        worst = worst.max((sq - if same1 { 0.25 } else { 0.0 }).abs());
                        total += sq;
                    }
                    worst = worst.max((sum_t - if a == b { 1.0 } else { 0.0 }).norm());
                }
                worst = worst.max((total - 1.0).abs());
            }
            Ok(worst)
        });
    }
    {
        let (k, alpha) = (k.clone(), alpha.clone());
        fx.expect_probe("psi_out - psi'_in", Relation::Eq, 0.0, 1e-10, move |ev| {
            let mut worst: f64 = 0.0;
            for b in 0..4 {
                let mut s = C0;
                for x in 0..2 {
                    for y in 0..2 {
                        for a in 0..4 {
                            for tt in 0..2 {
                                s += k[at(x, y, a, tt, b)] * alpha[a];
                            }
                        }
                    }
                }
                worst = worst.max((s - alpha[b]).norm());
            }
            let out = rho_out(ev.net)?;
            let want = linalg::outer(&CVec::from_vec(alpha.clone()));
            Ok(worst.max(linalg::max_abs_diff(out.matrix(), &want)))
        });
    }
    // σ = |φ_atb⟩⟨φ_atb| on axes (a, t, b).
    let mut phi = vec![C0; 32];
    for a in 0..4 {
        for tt in 0..2 {
            for b in 0..4 {
                if a / 2 != b / 2 {
                    continue;
                }
                let f = if tt == 0 { 1.0 } else { sign(a % 2 + b % 2) };
                phi[(a * 2 + tt) * 4 + b] = alpha[a] * 0.5 * f;
            }
        }
    }
    fx.expect_probe("sigma = |phi_atb><phi_atb|", Relation::Eq, 0.0, 1e-10, matrix_probe("sigma", linalg::outer(&CVec::from_vec(phi))));

    fx.expect_table(
        "rho_a",
        &[
            ("a", hin, hin),
            ("t", 1.0, 1.0),
            ("a,t", 1.0 + h1, 1.0 + hin),
            ("a|t", h1, hin),
            ("t|a", 1.0 + h1 - hin, 1.0),
            ("a:t", hin - h1, 0.0),
        ],
        t,
    );
    fx.expect_table(
        "rho_b",
        &[
            ("a", hin, hin),
            ("b", hin, hin),
            ("a,b", 0.0, hin),
            ("a|b", -hin, 0.0),
            ("b|a", -hin, 0.0),
            ("a:b", 2.0 * hin, hin),
        ],
        t,
    );
    Ok(fx)
}

// ---------------------------------------------------------------------------
// System and environment, two mixtures

/// Inputs of the system-environment net: the joint amplitude `α(q, r)`
/// (`dq x dr`), one environment state `β_λ` and one unitary `U_λ` on
/// `(q, e)` per interaction.
#[derive(Debug, Clone)]
pub struct SysEnvParams {
    pub alpha: CMat,
    pub betas: Vec<CVec>,
    pub unitaries: Vec<CMat>,
}

impl SysEnvParams {
    pub fn random(rng: &mut Rng, steps: usize, dq: usize, dr: usize, de: usize) -> Self {
        let alpha = random::pure_state(rng, dq * dr);
        SysEnvParams {
            alpha: CMat::from_row_slice(dq, dr, alpha.as_slice()),
            betas: (0..steps).map(|_| random::pure_state(rng, de)).collect(),
            unitaries: (0..steps).map(|_| random::unitary(rng, dq * de)).collect(),
        }
    }

    pub fn steps(&self) -> usize {
        self.betas.len()
    }
}

fn flatten_rows(m: &CMat) -> Vec<Complex64> {
    let mut v = Vec::with_capacity(m.len());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            v.push(m[(i, j)]);
        }
    }
    v
}

/// `j = α` (shape `[dq, dr]`), `q = j1`, `r = j2`.
fn mixture_nodes(b: NetBuilder<Complex64>, names: [&str; 3], alpha: &CMat) -> NetBuilder<Complex64> {
    let (dq, dr) = (alpha.nrows(), alpha.ncols());
    let [j, q, r] = names;
    b.node(j, &[dq, dr], &[], root_matrix(&flatten_rows(alpha)))
        .node(q, &[dq], &[j], deterministic(dq, dq * dr, |c| c / dr))
        .node(r, &[dr], &[j], deterministic(dr, dq * dr, |c| c % dr))
}

/// `e = β`, `t = U(t|q,e)`, `q_f = t1`, `e_f = t2`.
fn interaction_nodes(
    b: NetBuilder<Complex64>,
    names: [&str; 5],
    dq: usize,
    beta: &CVec,
    u: &CMat,
) -> NetBuilder<Complex64> {
    let de = beta.len();
    let [q, e, t, qf, ef] = names;
    b.node(e, &[de], &[], root_matrix(beta.as_slice()))
        .node(t, &[dq, de], &[q, e], u.clone())
        .node(qf, &[dq], &[t], deterministic(dq, dq * de, |c| c / de))
        .node(ef, &[de], &[t], deterministic(de, dq * de, |c| c % de))
}

fn check_sys_env(steps: usize, p: &SysEnvParams) -> Result<()> {
    if !(1..=2).contains(&steps) || p.betas.len() != steps || p.unitaries.len() != steps {
        return Err(Error::DimensionMismatch(format!(
            "{steps} interactions need as many environment states and unitaries ({} and {} given)",
            p.betas.len(),
            p.unitaries.len()
        )));
    }
    check_amplitudes(&flatten_rows(&p.alpha), p.alpha.len())?;
    for (beta, u) in p.betas.iter().zip(&p.unitaries) {
        check_amplitudes(beta.as_slice(), beta.len())?;
        check_unitary(u, p.alpha.nrows() * beta.len())?;
    }
    Ok(())
}

/// A system `q` entangled with a reference `r`, meeting a fresh
/// environment once (`steps = 1`) or twice (`steps = 2`).
pub fn sys_env_net(steps: usize, params: &SysEnvParams) -> Result<ProtocolFixture> {
    check_sys_env(steps, params)?;
    let dq = params.alpha.nrows();
    let tol = INEQ_TOL;
    if steps == 1 {
        let b0 = mixture_nodes(NetBuilder::new(), ["j", "q", "r"], &params.alpha);
        let net0 = b0.clone().build()?;
        let net = interaction_nodes(b0, ["q", "e", "t", "q_f", "e_f"], dq, &params.betas[0], &params.unitaries[0]).build()?;
        let mut fx = ProtocolFixture::new("sysenv1", net);
        fx.reduce_subnet("rho0", net0, Recipe::new().esum(&["j"]))
            .reduce("rho", Recipe::new().esum(&["j", "q", "e", "t"]));
        fx.expect_s("rho0", "q,r", 0.0, tol)
            .expect_s("rho", "r,q_f,e_f", 0.0, tol)
            .expect_linear(&[(1.0, "rho", "r"), (-1.0, "rho0", "r")], Relation::Eq, 0.0, tol)
            .expect_linear(&[(1.0, "rho0", "r"), (-1.0, "rho0", "q")], Relation::Eq, 0.0, tol)
            .expect_linear(&[(1.0, "rho", "r,e_f"), (-1.0, "rho", "q_f")], Relation::Eq, 0.0, tol)
            .expect_linear(&[(1.0, "rho", "r|e_f"), (-1.0, "rho", "r")], Relation::Le, 0.0, tol)
            .expect_linear(
                &[(1.0, "rho", "q_f"), (-1.0, "rho", "e_f"), (-1.0, "rho0", "q")],
                Relation::Le,
                0.0,
                tol,
            );
        return Ok(fx);
    }
    let b0 = mixture_nodes(NetBuilder::new(), ["j", "q1", "r"], &params.alpha);
    let net0 = b0.clone().build()?;
    let b1 = interaction_nodes(b0, ["q1", "e1", "t1", "q2", "e1f"], dq, &params.betas[0], &params.unitaries[0]);
    let net1 = b1.clone().build()?;
    let net = interaction_nodes(b1, ["q2", "e2", "t2", "q3", "e2f"], dq, &params.betas[1], &params.unitaries[1]).build()?;
    let mut fx = ProtocolFixture::new("sysenv2", net);
    fx.reduce_subnet("rho0", net0, Recipe::new().esum(&["j"]))
        .reduce_subnet("rho1", net1.clone(), Recipe::new().esum(&["j", "q1", "e1", "t1"]))
        .reduce("rho2", Recipe::new().esum(&["j", "q1", "e1", "t1", "q2", "e2", "t2"]))
        .reduce_subnet("sigma1", net1, Recipe::new().esum(&["j", "e1", "t1"]))
        .reduce("sigma2", Recipe::new().esum(&["j", "e1", "t1", "e2", "t2"]));
    fx.expect_s("rho0", "r,q1", 0.0, tol)
        .expect_s("rho1", "r,e1f,q2", 0.0, tol)
        .expect_s("rho2", "r,e1f,e2f,q3", 0.0, tol)
        .expect_linear(&[(1.0, "rho2", "r|e1f,e2f"), (-1.0, "rho2", "r|e1f")], Relation::Le, 0.0, tol)
        .expect_linear(&[(1.0, "rho2", "r|e1f"), (-1.0, "rho2", "r")], Relation::Le, 0.0, tol)
        .expect_linear(
            &[(1.0, "rho2", "q3"), (-1.0, "rho2", "e1f,e2f"), (-1.0, "rho1", "q2"), (1.0, "rho1", "e1f")],
            Relation::Le,
            0.0,
            tol,
        )
        .expect_linear(&[(1.0, "rho1", "q2"), (-1.0, "rho1", "e1f"), (-1.0, "rho0", "q1")], Relation::Le, 0.0, tol)
        .expect_s("rho0", "q1|q1", 0.0, tol)
        .expect_linear(&[(1.0, "sigma1", "q1|q2"), (-1.0, "sigma2", "q1|q3")], Relation::Le, 0.0, tol);
    Ok(fx)
}

/// Inputs of the two-mixture net: `α_λ(q_λ, r_λ)` for each mixture and the
/// scattering unitary `U(t|q1,q2)`.
#[derive(Debug, Clone)]
pub struct TwoMixParams {
    pub alphas: [CMat; 2],
    pub u: CMat,
}

impl TwoMixParams {
    pub fn random(rng: &mut Rng, d: [usize; 2], dr: [usize; 2]) -> Self {
        let mut alpha = |k: usize| {
            let v = random::pure_state(rng, d[k] * dr[k]);
            CMat::from_row_slice(d[k], dr[k], v.as_slice())
        };
        let alphas = [alpha(0), alpha(1)];
        TwoMixParams { alphas, u: random::unitary(rng, d[0] * d[1]) }
    }
}

/// Two purified mixtures `(q_λ, r_λ)` scattering once off each other.
pub fn two_mixtures_net(params: &TwoMixParams) -> Result<ProtocolFixture> {
    let [a1, a2] = &params.alphas;
    check_amplitudes(&flatten_rows(a1), a1.len())?;
    check_amplitudes(&flatten_rows(a2), a2.len())?;
    let (d1, d2) = (a1.nrows(), a2.nrows());
    check_unitary(&params.u, d1 * d2)?;
    let net1 = mixture_nodes(NetBuilder::new(), ["j1", "q1", "r1"], a1).build()?;
    let net2 = mixture_nodes(NetBuilder::new(), ["j2", "q2", "r2"], a2).build()?;
    let b = mixture_nodes(NetBuilder::new(), ["j1", "q1", "r1"], a1);
    let net = mixture_nodes(b, ["j2", "q2", "r2"], a2)
        .node("t", &[d1, d2], &["q1", "q2"], params.u.clone())
        .node("q1f", &[d1], &["t"], deterministic(d1, d1 * d2, |c| c / d2))
        .node("q2f", &[d2], &["t"], deterministic(d2, d1 * d2, |c| c % d2))
        .build()?;
    let tol = INEQ_TOL;
    let mut fx = ProtocolFixture::new("twomix", net);
    fx.reduce_subnet("rho1", net1, Recipe::new().esum(&["j1"]))
        .reduce_subnet("rho2", net2, Recipe::new().esum(&["j2"]))
        .reduce("rho", Recipe::new().esum(&["j1", "q1", "j2", "q2", "t"]));
    fx.expect_s("rho1", "q1,r1", 0.0, tol)
        .expect_s("rho2", "q2,r2", 0.0, tol)
        .expect_s("rho", "r1,r2,q1f,q2f", 0.0, tol)
        .expect_linear(&[(1.0, "rho", "q1f,r1"), (-1.0, "rho", "q2f,r2")], Relation::Eq, 0.0, 1e-9);
    for (sub, q, r, qf) in [("rho1", "q1", "r1", "q1f"), ("rho2", "q2", "r2", "q2f")] {
        fx.expect_linear(&[(1.0, "rho", r), (-1.0, sub, r)], Relation::Eq, 0.0, tol)
            .expect_linear(&[(1.0, sub, r), (-1.0, sub, q)], Relation::Eq, 0.0, tol)
            .expect_linear(&[(1.0, "rho", "q1f,r1"), (-1.0, "rho", qf), (-1.0, sub, q)], Relation::Le, 0.0, tol);
        let (sub, q, qf) = (sub.to_string(), q.to_string(), qf.to_string());
        fx.expect_probe(
            &format!("|S_rho({qf})-S_{sub}({q})|-S_rho(q1f,r1)"),
            Relation::Le,
            0.0,
            tol,
            move |ev| Ok((ev.s("rho", &qf)? - ev.s(&sub, &q)?).abs() - ev.s("rho", "q1f,r1")?),
        );
    }
    Ok(fx)
}

// ---------------------------------------------------------------------------
// Classical nets

/// Column-stochastic matrix with random columns.
pub fn random_cpt(rng: &mut Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(rows, cols);
    for j in 0..cols {
        for (i, p) in random::probability_vector(rng, rows).into_iter().enumerate() {
            m[(i, j)] = p;
        }
    }
    m
}

/// A small CB net and a linear combination of entropies that must vanish.
#[derive(Debug, Clone)]
pub struct CbExample {
    pub name: &'static str,
    pub net: CbNet,
    /// `Σ coef · H(expr) = 0`.
    pub terms: Vec<(f64, String)>,
}

impl CbExample {
    pub fn value(&self) -> Result<f64> {
        let joint = cb_joint(&self.net)?;
        self.terms.iter().try_fold(0.0, |acc, (k, e)| Ok(acc + k * joint.h_str(e)?))
    }
}

/// The two- and three-node graphs with one random parameterization each.
pub fn cb_examples(rng: &mut Rng) -> Vec<CbExample> {
    let mut dim = || 2 + random::below(rng, 2);
    let (na, nb, nc) = (dim(), dim(), dim());
    let mut cpt = |rows: usize, cols: usize| random_cpt(rng, rows, cols);
    let build = |b: NetBuilder<f64>| b.build().expect("example net");
    let terms = |t: &[(f64, &str)]| t.iter().map(|&(k, e)| (k, e.to_string())).collect();
    vec![
        CbExample {
            name: "two nodes",
            net: build(NetBuilder::new().node("a", &[na], &[], cpt(na, 1)).node("b", &[nb], &["a"], cpt(nb, na))),
            terms: terms(&[(1.0, "a,b"), (-1.0, "a"), (-1.0, "b|a")]),
        },
        CbExample {
            name: "diverging",
            net: build(
                NetBuilder::new()
                    .node("b", &[nb], &[], cpt(nb, 1))
                    .node("a", &[na], &["b"], cpt(na, nb))
                    .node("c", &[nc], &["b"], cpt(nc, nb)),
            ),
            terms: terms(&[(1.0, "a:c|b")]),
        },
        CbExample {
            name: "converging",
            net: build(
                NetBuilder::new()
                    .node("a", &[na], &[], cpt(na, 1))
                    .node("c", &[nc], &[], cpt(nc, 1))
                    .node("b", &[nb], &["a", "c"], cpt(nb, na * nc)),
            ),
            terms: terms(&[(1.0, "a:c")]),
        },
        CbExample {
            name: "markov chain",
            net: build(
                NetBuilder::new()
                    .node("a", &[na], &[], cpt(na, 1))
                    .node("b", &[nb], &["a"], cpt(nb, na))
                    .node("c", &[nc], &["b"], cpt(nc, nb)),
            ),
            terms: terms(&[(1.0, "a:c|b")]),
        },
        CbExample {
            name: "fully connected",
            net: build(
                NetBuilder::new()
                    .node("a", &[na], &[], cpt(na, 1))
                    .node("b", &[nb], &["a"], cpt(nb, na))
                    .node("c", &[nc], &["a", "b"], cpt(nc, na * nb)),
            ),
            terms: terms(&[(1.0, "a,b,c"), (-1.0, "c|a,b"), (-1.0, "b|a"), (-1.0, "a")]),
        },
    ]
}

/// Markov chain `q1 → q2 → … → q_len` with random state counts in
/// `2..=max_states` and random transition matrices.
pub fn random_markov_chain(rng: &mut Rng, len: usize, max_states: usize) -> CbNet {
    let dims: Vec<usize> = (0..len).map(|_| 2 + random::below(rng, max_states.max(2) - 1)).collect();
    let mut b = NetBuilder::new();
    for i in 0..len {
        let name = format!("q{}", i + 1);
        if i == 0 {
            b = b.node(&name, &[dims[0]], &[], random_cpt(rng, dims[0], 1));
        } else {
            let parent = format!("q{i}");
            b = b.node(&name, &[dims[i]], &[&parent], random_cpt(rng, dims[i], dims[i - 1]));
        }
    }
    b.build().expect("chain")
}

/// Node names of a Markov chain from root to leaf.
fn chain_order(net: &CbNet) -> Result<Vec<String>> {
    let dag = net.dag();
    let order = net.topo().to_vec();
    for (k, &i) in order.iter().enumerate() {
        let want: &[usize] = if k == 0 { &[] } else { &order[k - 1..k] };
        if dag.nodes()[i].shape.len() != 1 || dag.parents_of(i) != want {
            return Err(Error::NotAChain(format!("node `{}` breaks the chain", dag.name(i))));
        }
    }
    Ok(order.iter().map(|&i| dag.name(i).to_string()).collect())
}

/// `P(x|y)` as a column-stochastic matrix from a joint over (at least) x and y;
/// columns with `P(y) = 0` are uniform.
fn conditional(joint: &ProbTable, x: &str, y: &str) -> Result<DMatrix<f64>> {
    let m = joint.marginal(&[x, y])?;
    let (dx, dy) = (m.dims[0], m.dims[1]);
    // The marginal keeps the table's variable order.
    let x_first = m.variables[0] == x;
    let (dx, dy) = if x_first { (dx, dy) } else { (dy, dx) };
    let mut c = DMatrix::zeros(dx, dy);
    for j in 0..dy {
        let col: Vec<f64> = (0..dx).map(|i| if x_first { m.get(&[i, j]) } else { m.get(&[j, i]) }).collect();
        let s: f64 = col.iter().sum();
        for i in 0..dx {
            c[(i, j)] = if s > crate::qprob::DENOMINATOR_CUTOFF { col[i] / s } else { 1.0 / dx as f64 };
        }
    }
    Ok(c)
}

/// Extends the chain `x → y → z` (given by its joint) to
/// `x → y → z → y' → x'` with `P(y'|z) = P(y|z)` and `P(x'|y') = P(x|y)`.
pub fn time_reversed_chain(joint: &ProbTable, names: [&str; 3]) -> Result<CbNet> {
    let [x, y, z] = names;
    let px = joint.marginal(&[x])?;
    let (yr, xr) = (format!("{y}'"), format!("{x}'"));
    let dims = |n: &str| -> Result<usize> { Ok(joint.marginal(&[n])?.dims[0]) };
    let (dx, dy, dz) = (dims(x)?, dims(y)?, dims(z)?);
    NetBuilder::new()
        .node(x, &[dx], &[], DMatrix::from_column_slice(dx, 1, &px.values))
        .node(y, &[dy], &[x], conditional(joint, y, x)?)
        .node(z, &[dz], &[y], conditional(joint, z, y)?)
        .node(&yr, &[dy], &[z], conditional(joint, y, z)?)
        .node(&xr, &[dx], &[&yr], conditional(joint, x, y)?)
        .build()
}

#[derive(Debug, Clone)]
pub struct DpCheck {
    pub label: String,
    pub lhs: f64,
    pub relation: Relation,
    pub rhs: f64,
}

impl DpCheck {
    pub fn violation(&self) -> f64 {
        self.relation.violation(self.lhs, self.rhs)
    }
}

#[derive(Debug, Clone, Default)]
pub struct DpReport {
    pub checks: Vec<DpCheck>,
}

impl DpReport {
    pub fn worst(&self) -> f64 {
        self.checks.iter().map(DpCheck::violation).fold(0.0, f64::max)
    }

    pub fn holds(&self, tol: f64) -> bool {
        self.worst() <= tol
    }
}

fn push(report: &mut DpReport, joint: &ProbTable, lhs: &str, rel: Relation, rhs: &str) -> Result<()> {
    report.checks.push(DpCheck {
        label: format!("H({lhs}) {} H({rhs})", rel.symbol()),
        lhs: joint.h_str(lhs)?,
        relation: rel,
        rhs: joint.h_str(rhs)?,
    });
    Ok(())
}

fn triple_checks(report: &mut DpReport, joint: &ProbTable, [x, y, z]: [&str; 3]) -> Result<()> {
    use Relation::*;
    push(report, joint, &format!("{x}|{x}"), Le, &format!("{x}|{y}"))?;
    push(report, joint, &format!("{x}|{y}"), Le, &format!("{x}|{z}"))?;
    push(report, joint, &format!("{x}:{x}"), Ge, &format!("{x}:{y}"))?;
    push(report, joint, &format!("{x}:{y}"), Ge, &format!("{x}:{z}"))?;
    push(report, joint, &format!("{z}|{y}"), Le, &format!("{z}|{x}"))?;
    push(report, joint, &format!("{z}:{y}"), Ge, &format!("{z}:{x}"))?;
    push(report, joint, &format!("{x}|{y},{z}"), Eq, &format!("{x}|{y}"))?;
    push(report, joint, &format!("{z}|{y},{x}"), Eq, &format!("{z}|{y}"))?;

    let rev = cb_joint(&time_reversed_chain(joint, [x, y, z])?)?;
    let (yr, xr) = (format!("{y}'"), format!("{x}'"));
    let mut add = |label: String, lhs: f64, relation: Relation, rhs: f64| {
        report.checks.push(DpCheck { label, lhs, relation, rhs });
    };
    add(format!("H({z}:{yr}) = H({z}:{y})"), rev.h_str(&format!("{z}:{yr}"))?, Eq, joint.h_str(&format!("{z}:{y}"))?);
    add(format!("H({z}:{xr}) = H({z}:{x})"), rev.h_str(&format!("{z}:{xr}"))?, Eq, joint.h_str(&format!("{z}:{x}"))?);
    add(format!("H({z}:{yr}) >= H({z}:{xr})"), rev.h_str(&format!("{z}:{yr}"))?, Ge, rev.h_str(&format!("{z}:{xr}"))?);
    Ok(())
}

/// Data-processing inequalities of a Markov chain of length 3 or 4,
/// including the time-reversal construction on every ordered triple.
pub fn dp_inequality_check(chain: &CbNet) -> Result<DpReport> {
    let names = chain_order(chain)?;
    if !(3..=4).contains(&names.len()) {
        return Err(Error::NotAChain(format!("length {} (expected 3 or 4)", names.len())));
    }
    let joint = cb_joint(chain)?;
    let n: Vec<&str> = names.iter().map(String::as_str).collect();
    let mut report = DpReport::default();
    for i in 0..n.len() {
        for j in i + 1..n.len() {
            for k in j + 1..n.len() {
                triple_checks(&mut report, &joint, [n[i], n[j], n[k]])?;
            }
        }
    }
    if n.len() == 4 {
        use Relation::*;
        let (q1, q2, q3, q4) = (n[0], n[1], n[2], n[3]);
        push(&mut report, &joint, &format!("{q1}:{q4}"), Le, &format!("{q1}:{q3}"))?;
        push(&mut report, &joint, &format!("{q1}:{q3}"), Le, &format!("{q2}:{q3}"))?;
        push(&mut report, &joint, &format!("{q1}:{q4}"), Le, &format!("{q2}:{q4}"))?;
        push(&mut report, &joint, &format!("{q2}:{q4}"), Le, &format!("{q2}:{q3}"))?;
        push(&mut report, &joint, &format!("{q1}:{q4}"), Le, &format!("{q2}:{q3}"))?;
    }
    Ok(report)
}

/// Markov chain `a → b → c` with `a = |0⟩` and Hadamard transitions. With
/// `b` summed coherently, `c = |0⟩`; with `b` kept, `c` is uniform.
pub fn interference_witness() -> QbNet {
    NetBuilder::new()
        .node("a", &[2], &[], root_matrix(&[re(1.0), C0]))
        .node("b", &[2], &["a"], hadamard())
        .node("c", &[2], &["b"], hadamard())
        .build()
        .expect("witness net")
}

/// Fixed amplitudes used by the demos and the fixture suite.
pub fn demo_alpha2() -> Vec<Complex64> {
    vec![c(0.6, 0.0), c(0.0, 0.8)]
}

pub fn demo_alpha4() -> Vec<Complex64> {
    vec![c(0.5, 0.1), c(-0.3, 0.4), c(0.2, -0.5), c(0.0, (1.0f64 - 0.26 - 0.25 - 0.29).sqrt())]
}

/// Axes of a reduction, for display.
pub fn axis_names(axes: &[Axis]) -> String {
    axes.iter().map(|a| a.name.as_str()).collect::<Vec<_>>().join(",")
}
