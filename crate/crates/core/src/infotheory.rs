//! Signal ensembles, Holevo information and accessible information.

use num_complex::Complex64;
use rand::RngCore;
use rayon::prelude::*;

use crate::density::{compact_purification_amplitudes, meta_state, Axis, DensityMatrix};
use crate::entexpr::shannon_entropy;
use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat, CVec, C0, C1};
use crate::measure::{self, extend_with_measurement, DilationVariant, Pom};
use crate::netcore::{deterministic, root_matrix, NetBuilder, QbNet};
use crate::qprob::ProbTable;
use crate::random;

pub const WEIGHT_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct Ensemble {
    weights: Vec<f64>,
    signals: Vec<CMat>,
}

impl Ensemble {
    pub fn new(weights: Vec<f64>, signals: Vec<CMat>) -> Result<Self> {
        if weights.is_empty() || weights.len() != signals.len() {
            return Err(Error::InvalidEnsemble(format!(
                "{} weights for {} signals",
                weights.len(),
                signals.len()
            )));
        }
        if weights.iter().any(|&w| !(w >= 0.0)) {
            return Err(Error::InvalidEnsemble("negative weight".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_TOL {
            return Err(Error::InvalidEnsemble(format!("weights sum to {total}")));
        }
        let d = signals[0].nrows();
        for s in &signals {
            if s.nrows() != d {
                return Err(Error::InvalidEnsemble("signals of different dimensions".into()));
            }
            DensityMatrix::single("q", s.clone())?;
        }
        Ok(Ensemble { weights, signals })
    }

    /// Pure signals `|ψ_a⟩⟨ψ_a|`.
    pub fn pure(weights: Vec<f64>, states: &[CVec]) -> Result<Self> {
        Self::new(weights, states.iter().map(linalg::outer).collect())
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn signals(&self) -> &[CMat] {
        &self.signals
    }

    pub fn dim(&self) -> usize {
        self.signals[0].nrows()
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    fn average(&self) -> CMat {
        self.weights.iter().zip(&self.signals).fold(CMat::zeros(self.dim(), self.dim()), |acc, (w, s)| acc + s.scale(*w))
    }
}

/// `ρ = Σ w_a ρ_a` on an axis named `q`.
pub fn ensemble_avg(e: &Ensemble) -> DensityMatrix {
    DensityMatrix::single("q", e.average()).expect("mixture of density matrices")
}

fn entropy(m: &CMat) -> Result<f64> {
    linalg::entropy_of_spectrum(&linalg::eigh(m)?.values)
}

/// `χ = S(Σ w_a ρ_a) − Σ w_a S(ρ_a)`.
pub fn holevo(e: &Ensemble) -> Result<f64> {
    let mut chi = entropy(&e.average())?;
    for (w, s) in e.weights.iter().zip(&e.signals) {
        chi -= w * entropy(s)?;
    }
    Ok(chi)
}

/// Prior `P(a) = w_a` and conditional `P(b|a) = tr(F_b ρ_a)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelTable {
    pub prior: Vec<f64>,
    /// `cond[a][b]`.
    pub cond: Vec<Vec<f64>>,
}

impl ChannelTable {
    pub fn joint(&self) -> ProbTable {
        let nb = self.cond[0].len();
        let values = self
            .prior
            .iter()
            .zip(&self.cond)
            .flat_map(|(w, row)| row.iter().map(move |p| w * p))
            .collect();
        ProbTable::new(vec!["a".into(), "b".into()], vec![self.prior.len(), nb], values)
            .expect("consistent shape")
    }

    /// `P(a|b)` by Bayes' rule; `None` if the outcome has zero probability.
    pub fn posterior(&self, b: usize) -> Option<Vec<f64>> {
        let joint: Vec<f64> = self.prior.iter().zip(&self.cond).map(|(w, row)| w * row[b]).collect();
        let pb: f64 = joint.iter().sum();
        if pb < crate::qprob::DENOMINATOR_CUTOFF {
            return None;
        }
        Some(joint.iter().map(|x| x / pb).collect())
    }
}

pub fn channel(e: &Ensemble, p: &Pom) -> Result<ChannelTable> {
    if p.dim() != e.dim() {
        return Err(Error::DimensionMismatch(format!(
            "POM dimension {} for signals of dimension {}",
            p.dim(),
            e.dim()
        )));
    }
    let cond = e.signals.iter().map(|s| measure::outcome_probabilities(s, p)).collect();
    Ok(ChannelTable { prior: e.weights.clone(), cond })
}

/// `H(a:b)` of the joint distribution, via the expression engine.
pub fn mutual_info(t: &ChannelTable) -> f64 {
    t.joint().h_str("a:b").expect("a and b are table variables")
}

fn ancilla_dim(e: &Ensemble) -> Result<(Vec<CMat>, usize)> {
    let alphas = e.signals.iter().map(compact_purification_amplitudes).collect::<Result<Vec<_>>>()?;
    let k = alphas.iter().map(|a| a.ncols()).max().unwrap_or(1);
    Ok((alphas, k))
}

/// Node matrix `α(j|a)`: column `a` holds the purification of `ρ_a`, j = (q, r).
fn signal_matrix(alphas: &[CMat], d: usize, k: usize) -> CMat {
    let mut m = CMat::zeros(d * k, alphas.len());
    for (a, alpha) in alphas.iter().enumerate() {
        for q in 0..d {
            for r in 0..alpha.ncols() {
                m[(q * k + r, a)] = alpha[(q, r)];
            }
        }
    }
    m
}

/// `a` (amplitudes `√w_a`) → `j = α(j|a)` → `q = j1`, `r = j2`.
/// `tr_{a,r} esum_j μ = Σ w_a ρ_a`.
pub fn scalar_weight_net(e: &Ensemble) -> Result<QbNet> {
    let d = e.dim();
    let n = e.len();
    let (alphas, k) = ancilla_dim(e)?;
    let amps: Vec<Complex64> = e.weights.iter().map(|w| c(w.sqrt(), 0.0)).collect();
    NetBuilder::new()
        .node("a", &[n], &[], root_matrix(&amps))
        .node("j", &[d, k], &["a"], signal_matrix(&alphas, d, k))
        .node("q", &[d], &["j"], deterministic(d, d * k, |c| c / k))
        .node("r", &[k], &["j"], deterministic(k, d * k, |c| c % k))
        .build()
}

fn orthogonal_builder(e: &Ensemble) -> Result<NetBuilder<Complex64>> {
    let d = e.dim();
    let n = e.len();
    let (alphas, k) = ancilla_dim(e)?;
    let mut jw = vec![C0; n * n];
    for (a, w) in e.weights.iter().enumerate() {
        jw[a * n + a] = c(w.sqrt(), 0.0);
    }
    Ok(NetBuilder::new()
        .node("jw", &[n, n], &[], root_matrix(&jw))
        .node("a", &[n], &["jw"], deterministic(n, n * n, |c| c / n))
        .node("rw", &[n], &["jw"], deterministic(n, n * n, |c| c % n))
        .node("j", &[d, k], &["a"], signal_matrix(&alphas, d, k))
        .node("q", &[d], &["j"], deterministic(d, d * k, |c| c / k))
        .node("r", &[k], &["j"], deterministic(k, d * k, |c| c % k)))
}

/// `jw = √w_{j1} δ(j1,j2)` → `a = jw1`, `rw = jw2`; `a` → `j` → `q`, `r`.
/// `tr_{rw,r} esum_{jw,j} μ = Σ w_a |a⟩⟨a| ⊗ ρ_a`.
pub fn orthogonal_weight_net(e: &Ensemble) -> Result<QbNet> {
    orthogonal_builder(e)?.build()
}

pub fn scalar_weight_state(net: &QbNet) -> Result<DensityMatrix> {
    let mut s = meta_state(net)?.reducer();
    s.trace(&["a", "r"])?;
    s.esum(&["j"])?;
    s.density()
}

pub fn orthogonal_weight_state(net: &QbNet) -> Result<DensityMatrix> {
    let mut s = meta_state(net)?.reducer();
    s.trace(&["rw", "r"])?;
    s.esum(&["jw", "j"])?;
    s.density()
}

/// `Σ w_a |a⟩⟨a| ⊗ ρ_a` on axes `(a, q)`, built directly.
pub fn classical_quantum_state(e: &Ensemble) -> DensityMatrix {
    let n = e.len();
    let blocks = e.weights.iter().zip(&e.signals).enumerate().fold(
        CMat::zeros(n * e.dim(), n * e.dim()),
        |acc, (a, (w, s))| {
            let mut proj = CMat::zeros(n, n);
            proj[(a, a)] = C1;
            acc + linalg::kron(&proj, s).scale(*w)
        },
    );
    DensityMatrix::new(vec![Axis::new("a", n), Axis::new("q", e.dim())], blocks)
        .expect("block-diagonal mixture")
}

/// The three real unit vectors at 120° spacing, starting from `|0⟩`.
pub fn trine_states() -> Vec<CVec> {
    (0..3)
        .map(|a| {
            let t = std::f64::consts::TAU * a as f64 / 3.0;
            CVec::from_vec(vec![c(t.cos(), 0.0), c(t.sin(), 0.0)])
        })
        .collect()
}

/// Equal-weight ensemble of the trine states.
pub fn trine_ensemble() -> Ensemble {
    Ensemble::pure(vec![1.0 / 3.0; 3], &trine_states()).expect("trine ensemble")
}

/// `F_b = (2/3)(1 − |φ_b⟩⟨φ_b|)`.
pub fn trine_pom() -> Pom {
    let elements = trine_states()
        .iter()
        .map(|v| (CMat::identity(2, 2) - linalg::outer(v)).scale(2.0 / 3.0))
        .collect();
    Pom::new(elements).expect("trine POM")
}

/// Equal-weight ensemble of `|φ_a⟩ ⊗ |φ_a⟩`.
pub fn double_trine_ensemble() -> Ensemble {
    let states: Vec<CVec> = trine_states().iter().map(|v| v.kronecker(v)).collect();
    Ensemble::pure(vec![1.0 / 3.0; 3], &states).expect("double trine ensemble")
}

/// The trine POM applied to each factor: nine outcomes `F_{b1} ⊗ F_{b2}`.
pub fn product_trine_pom() -> Pom {
    let t = trine_pom();
    let mut elements = Vec::with_capacity(9);
    for f1 in t.elements() {
        for f2 in t.elements() {
            elements.push(linalg::kron(f1, f2));
        }
    }
    Pom::new(elements).expect("product POM")
}

/// Square-root measurement `F_a = ρ^{-1/2} w_a ρ_a ρ^{-1/2}` on the support
/// of `ρ = Σ w_a ρ_a`, plus the projector onto the kernel when it is nonzero.
pub fn square_root_pom(e: &Ensemble) -> Result<Pom> {
    let d = e.dim();
    let eig = linalg::eigh(&e.average())?;
    let cutoff = 1e-12;
    let inv_sqrt = eig.map(|x| if x > cutoff { 1.0 / x.sqrt() } else { 0.0 });
    let kernel = eig.map(|x| if x > cutoff { 0.0 } else { 1.0 });
    let mut elements: Vec<CMat> = e
        .weights
        .iter()
        .zip(&e.signals)
        .map(|(w, s)| {
            let f = (&inv_sqrt * s * &inv_sqrt).scale(*w);
            (&f + f.adjoint()).scale(0.5)
        })
        .collect();
    if kernel.iter().any(|z| z.norm() > 1e-9) {
        elements.push(kernel);
    }
    if elements.iter().any(|f| f.nrows() != d) {
        return Err(Error::DimensionMismatch("square-root POM".into()));
    }
    Pom::new(elements)
}

/// Search budget of [`maximize_accessible_info`].
#[derive(Debug, Clone, Copy)]
pub struct SearchOptions {
    pub sweeps: usize,
    pub golden_steps: usize,
    pub initial_window: f64,
    pub window_decay: f64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions { sweeps: 12, golden_steps: 18, initial_window: std::f64::consts::FRAC_PI_2, window_decay: 0.6 }
    }
}

/// Pure POMs `F_b = W† P_b W` where `W` is the first `d` columns of a
/// product of Givens rotations on `C^{m·k}` and `P_b` projects onto the
/// `k` coordinates of block `b`.
struct Parameterization {
    d: usize,
    m: usize,
    k: usize,
    pairs: Vec<(usize, usize)>,
}

impl Parameterization {
    fn new(d: usize, m: usize) -> Self {
        let k = d.div_ceil(m).max(1);
        let n = m * k;
        let pairs = (0..n).flat_map(|p| ((p + 1)..n).map(move |q| (p, q))).collect();
        Parameterization { d, m, k, pairs }
    }

    fn n(&self) -> usize {
        self.m * self.k
    }

    fn len(&self) -> usize {
        2 * self.pairs.len()
    }

    fn isometry(&self, params: &[f64]) -> CMat {
        let n = self.n();
        let mut w = CMat::from_fn(n, self.d, |i, j| if i == j { C1 } else { C0 });
        for (g, &(p, q)) in self.pairs.iter().enumerate().rev() {
            let (s, cs) = params[2 * g].sin_cos();
            let ph = Complex64::from_polar(1.0, params[2 * g + 1]);
            for j in 0..self.d {
                let wp = w[(p, j)];
                let wq = w[(q, j)];
                w[(p, j)] = wp * cs - ph * wq * s;
                w[(q, j)] = ph.conj() * wp * s + wq * cs;
            }
        }
        w
    }

    fn pom(&self, params: &[f64]) -> Pom {
        let w = self.isometry(params);
        let elements = (0..self.m)
            .map(|b| {
                let rows = w.rows(b * self.k, self.k);
                let f = rows.adjoint() * rows;
                (&f + f.adjoint()).scale(0.5)
            })
            .collect();
        Pom::from_elements(elements).expect("common dimension")
    }

    fn value(&self, params: &[f64], e: &Ensemble) -> f64 {
        let w = self.isometry(params);
        let mut joint = vec![0.0; e.len() * self.m];
        for (a, (wa, s)) in e.weights.iter().zip(&e.signals).enumerate() {
            let ws = &w * s;
            for b in 0..self.m {
                let mut p = 0.0;
                for i in b * self.k..(b + 1) * self.k {
                    for j in 0..self.d {
                        p += (ws[(i, j)] * w[(i, j)].conj()).re;
                    }
                }
                joint[a * self.m + b] = wa * p.max(0.0);
            }
        }
        mutual_information_of_joint(&joint, e.len(), self.m)
    }
}

fn mutual_information_of_joint(joint: &[f64], na: usize, nb: usize) -> f64 {
    let pa: Vec<f64> = (0..na).map(|a| joint[a * nb..(a + 1) * nb].iter().sum()).collect();
    let pb: Vec<f64> = (0..nb).map(|b| (0..na).map(|a| joint[a * nb + b]).sum()).collect();
    shannon_entropy(&pa) + shannon_entropy(&pb) - shannon_entropy(joint)
}

const INV_PHI: f64 = 0.618_033_988_749_894_8;

fn golden_max(f: &mut impl FnMut(f64) -> f64, lo: f64, hi: f64, steps: usize) -> (f64, f64) {
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..steps {
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
    }
    if f1 >= f2 { (x1, f1) } else { (x2, f2) }
}

fn local_search(par: &Parameterization, e: &Ensemble, seed: u64, opts: &SearchOptions) -> (f64, Vec<f64>) {
    let mut rng = random::seeded(seed);
    let mut params: Vec<f64> = (0..par.len())
        .map(|i| {
            let u = random::uniform(&mut rng);
            if i % 2 == 0 { u * std::f64::consts::PI } else { u * std::f64::consts::TAU }
        })
        .collect();
    let mut best = par.value(&params, e);
    let mut window = opts.initial_window;
    for _ in 0..opts.sweeps {
        let before = best;
        for i in 0..params.len() {
            let x0 = params[i];
            let mut trial = params.clone();
            let mut f = |x: f64| {
                trial[i] = x;
                par.value(&trial, e)
            };
            let (x, v) = golden_max(&mut f, x0 - window, x0 + window, opts.golden_steps);
            if v > best {
                best = v;
                params[i] = x;
            }
        }
        window = (window * opts.window_decay).max(1e-6);
        if best - before < 1e-13 && window < 1e-3 {
            break;
        }
    }
    (best, params)
}

/// Result of the accessible-information search.
#[derive(Debug, Clone)]
pub struct AccessibleInfo {
    pub pom: Pom,
    pub value: f64,
    /// Best value found by the search itself, before comparing baselines.
    pub search_value: f64,
    /// Best value over the first `i + 1` restarts.
    pub best_by_restart: Vec<f64>,
}

/// Random-restart coordinate search over pure POMs with `m` outcomes
/// (`m = d²` when `None`). Deterministic for a given seed.
pub fn maximize_accessible_info(e: &Ensemble, m: Option<usize>, restarts: usize, seed: u64) -> Result<(Pom, f64)> {
    let r = maximize_accessible_info_with(e, m, restarts, seed, &[], &SearchOptions::default())?;
    Ok((r.pom, r.value))
}

pub fn maximize_accessible_info_with(
    e: &Ensemble,
    m: Option<usize>,
    restarts: usize,
    seed: u64,
    baselines: &[Pom],
    opts: &SearchOptions,
) -> Result<AccessibleInfo> {
    let d = e.dim();
    let m = m.unwrap_or(d * d);
    if m == 0 {
        return Err(Error::InvalidPom("zero outcomes".into()));
    }
    let par = Parameterization::new(d, m);
    let mut master = random::seeded(seed);
    let seeds: Vec<u64> = (0..restarts.max(1)).map(|_| master.next_u64()).collect();
    let runs: Vec<(f64, Vec<f64>)> = seeds.par_iter().map(|&s| local_search(&par, e, s, opts)).collect();

    let mut best_idx = 0;
    let mut best_by_restart = Vec::with_capacity(runs.len());
    for (i, (v, _)) in runs.iter().enumerate() {
        if *v > runs[best_idx].0 {
            best_idx = i;
        }
        best_by_restart.push(runs[best_idx].0);
    }
    let search_pom = par.pom(&runs[best_idx].1);
    let search_value = mutual_info(&channel(e, &search_pom)?);
    let mut pom = search_pom;
    let mut value = search_value;
    for b in baselines {
        let v = mutual_info(&channel(e, b)?);
        if v > value {
            value = v;
            pom = b.clone();
        }
    }
    Ok(AccessibleInfo { pom, value, search_value, best_by_restart })
}

/// Quantities checked on the Holevo-proof net: the orthogonal-weight net
/// followed by the general dilation of the POM acting on `q`.
#[derive(Debug, Clone)]
pub struct HolevoNetReport {
    pub chi: f64,
    /// `S_σ(a:q)` of the orthogonal-weight state before the measurement.
    pub s_a_q_initial: f64,
    /// `S_ρf(a:(b_f,q_f,x_f))`.
    pub s_a_all_final: f64,
    /// `S_ρf(a:b_f)`.
    pub s_a_b_final: f64,
    /// `H_ρf(a:b_f)`.
    pub h_a_b_final: f64,
    /// `H(a:b)` of the channel table.
    pub channel_info: f64,
    /// Largest entry of `tr_{q_f,x_f} ρf − Σ P(a,b)|a,b⟩⟨a,b|`.
    pub joint_residual: f64,
}

impl HolevoNetReport {
    pub fn holds(&self, tol: f64) -> bool {
        (self.s_a_q_initial - self.chi).abs() <= tol
            && (self.s_a_all_final - self.chi).abs() <= tol
            && self.s_a_b_final <= self.s_a_all_final + tol
            && (self.h_a_b_final - self.s_a_b_final).abs() <= tol
            && (self.h_a_b_final - self.channel_info).abs() <= tol
            && self.joint_residual <= tol
    }
}

/// Net for the Holevo inequality argument: signals prepared on `q` with
/// orthogonal weights, then measured with the general dilation.
pub fn holevo_net(e: &Ensemble, p: &Pom) -> Result<QbNet> {
    if p.dim() != e.dim() {
        return Err(Error::DimensionMismatch("POM and ensemble dimensions".into()));
    }
    extend_with_measurement(
        orthogonal_builder(e)?,
        "q",
        e.dim(),
        p,
        DilationVariant::General,
        ["b", "x", "t", "q_f", "b_f", "x_f"],
    )?
    .build()
}

pub fn holevo_net_check(e: &Ensemble, p: &Pom) -> Result<HolevoNetReport> {
    let chi = holevo(e)?;
    let sigma = orthogonal_weight_state(&orthogonal_weight_net(e)?)?;
    let s_a_q_initial = sigma.s("a:q")?;

    let net = holevo_net(e, p)?;
    let mut s = meta_state(&net)?.reducer();
    s.trace(&["rw", "r"])?;
    s.esum(&["jw", "j", "q", "b", "x", "t"])?;
    let rho_f = s.density()?;
    let s_a_all_final = rho_f.s("a:(b_f,q_f,x_f)")?;
    let s_a_b_final = rho_f.s("a:b_f")?;
    let h_a_b_final = rho_f.h("a:b_f")?;
    let table = channel(e, p)?;
    let channel_info = mutual_info(&table);

    let ab = rho_f.reduce_to(&["a", "b_f"])?;
    let joint = table.joint();
    let expected = CMat::from_diagonal(&CVec::from_iterator(
        joint.values.len(),
        joint.values.iter().map(|&v| c(v, 0.0)),
    ));
    let joint_residual = linalg::max_abs_diff(ab.matrix(), &expected);
    Ok(HolevoNetReport {
        chi,
        s_a_q_initial,
        s_a_all_final,
        s_a_b_final,
        h_a_b_final,
        channel_info,
        joint_residual,
    })
}
