//! Seeded property suites: the entropy identities and inequalities for
//! classical joints and density matrices, the data-processing inequalities
//! of Markov chains, and every protocol fixture.

use std::fmt;

use num_complex::Complex64;

use crate::density::{neg_relative_entropy, Axis, DensityMatrix};
use crate::entexpr::shannon_entropy;
use crate::error::Result;
use crate::linalg::{self, CMat, CVec};
use crate::netcore::{deterministic, CbNet, NetBuilder, QbNet};
use crate::protocols::{self, random_cpt, Relation, SysEnvParams, TwoMixParams};
use crate::qprob::{cb_joint, p_gamma, ProbTable};
use crate::random::{self, Rng};

pub const CLASSICAL_TOL: f64 = 1e-9;
pub const QUANTUM_TOL: f64 = 1e-8;
pub const DP_TOL: f64 = 1e-10;

/// Worst violation of one property over all trials.
#[derive(Debug, Clone, PartialEq)]
pub struct PropertyResult {
    pub name: String,
    pub trials: usize,
    pub worst: f64,
    pub tol: f64,
}

impl PropertyResult {
    pub fn pass(&self) -> bool {
        self.worst <= self.tol
    }
}

impl fmt::Display for PropertyResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}\t{}\ttrials={}\tworst={:.3e}\ttol={:.0e}",
            if self.pass() { "PASS" } else { "FAIL" },
            self.name,
            self.trials,
            self.worst,
            self.tol
        )
    }
}

#[derive(Debug, Default)]
struct Tally {
    rows: Vec<PropertyResult>,
}

impl Tally {
    fn record(&mut self, name: &str, tol: f64, violation: f64) {
        let v = if violation.is_nan() { f64::INFINITY } else { violation };
        match self.rows.iter_mut().find(|r| r.name == name) {
            Some(r) => {
                r.trials += 1;
                r.worst = r.worst.max(v);
            }
            None => self.rows.push(PropertyResult { name: name.to_string(), trials: 1, worst: v, tol }),
        }
    }

    fn le(&mut self, name: &str, tol: f64, lhs: f64, rhs: f64) {
        self.record(name, tol, Relation::Le.violation(lhs, rhs));
    }

    fn eq(&mut self, name: &str, tol: f64, a: f64, b: f64) {
        self.record(name, tol, Relation::Eq.violation(a, b));
    }
}

/// Random DAG on 3 or 4 nodes `a, b, c, d` with 2 or 3 states each; every
/// earlier node is a parent with probability 1/2.
pub fn random_cb_net(rng: &mut Rng) -> CbNet {
    let names = ["a", "b", "c", "d"];
    let n = 3 + random::below(rng, 2);
    let dims: Vec<usize> = (0..n).map(|_| 2 + random::below(rng, 2)).collect();
    let mut b = NetBuilder::new();
    for i in 0..n {
        let parents: Vec<usize> = (0..i).filter(|_| random::uniform(rng) < 0.5).collect();
        let cols: usize = parents.iter().map(|&p| dims[p]).product();
        let pnames: Vec<&str> = parents.iter().map(|&p| names[p]).collect();
        b = b.node(names[i], &[dims[i]], &pnames, random_cpt(rng, dims[i], cols));
    }
    b.build().expect("random DAG")
}

/// QB version of [`random_cb_net`]: every column is a random unit vector.
pub fn random_qb_net(rng: &mut Rng) -> QbNet {
    let names = ["a", "b", "c", "d"];
    let n = 3 + random::below(rng, 2);
    let dims: Vec<usize> = (0..n).map(|_| 2 + random::below(rng, 2)).collect();
    let mut b = NetBuilder::new();
    for i in 0..n {
        let parents: Vec<usize> = (0..i).filter(|_| random::uniform(rng) < 0.5).collect();
        let cols: usize = parents.iter().map(|&p| dims[p]).product();
        let mut m = CMat::zeros(dims[i], cols);
        for c in 0..cols {
            m.set_column(c, &random::pure_state(rng, dims[i]));
        }
        let pnames: Vec<&str> = parents.iter().map(|&p| names[p]).collect();
        b = b.node(names[i], &[dims[i]], &pnames, m);
    }
    b.build().expect("random DAG")
}

/// Splits the variables into three nonempty disjoint groups.
fn three_groups(rng: &mut Rng, vars: &[String]) -> [Vec<String>; 3] {
    let mut v = vars.to_vec();
    for i in (1..v.len()).rev() {
        v.swap(i, random::below(rng, i + 1));
    }
    let mut groups: [Vec<String>; 3] = Default::default();
    for (k, name) in v.into_iter().enumerate() {
        groups[if k < 3 { k } else { random::below(rng, 3) }].push(name);
    }
    groups
}

fn group_expr(g: &[String]) -> String {
    if g.len() == 1 { g[0].clone() } else { format!("({})", g.join(",")) }
}

fn refs(g: &[String]) -> Vec<&str> {
    g.iter().map(String::as_str).collect()
}

fn union(parts: &[&[String]]) -> Vec<String> {
    parts.iter().flat_map(|p| p.iter().cloned()).collect()
}

/// Identities and inequalities for a classical joint and three groups.
fn classical_checks(t: &mut Tally, prefix: &str, joint: &ProbTable, [x, y, z]: &[Vec<String>; 3]) -> Result<()> {
    let tol = CLASSICAL_TOL;
    let h = |g: &[String]| -> Result<f64> { Ok(joint.marginal(&refs(g))?.entropy()) };
    let (ex, ey, ez) = (group_expr(x), group_expr(y), group_expr(z));
    let e = |s: String| joint.h_str(&s);
    let name = |s: &str| format!("{prefix}{s}");

    let (hx, hy, hxy) = (h(x)?, h(y)?, h(&union(&[x, y]))?);
    t.eq(&name("H(X|Y) = H(X,Y) - H(Y)"), tol, e(format!("{ex}|{ey}"))?, hxy - hy);
    t.eq(&name("H(X:Y) = H(X) + H(Y) - H(X,Y)"), tol, e(format!("{ex}:{ey}"))?, hx + hy - hxy);
    t.eq(
        &name("H((X,Y):Z) = H((X:Z),(Y:Z))"),
        tol,
        e(format!("({ex},{ey}):{ez}"))?,
        e(format!("({ex}:{ez}),({ey}:{ez})"))?,
    );
    t.eq(
        &name("H((X:Y),Z) = H((X,Z):(Y,Z))"),
        tol,
        e(format!("({ex}:{ey}),{ez}"))?,
        e(format!("({ex},{ez}):({ey},{ez})"))?,
    );
    let nx: usize = joint.marginal(&refs(x))?.dims.iter().product();
    t.le(&name("0 <= H(X)"), tol, 0.0, hx);
    t.le(&name("H(X) <= log2 N_X"), tol, hx, (nx as f64).log2());
    t.le(&name("H(Y) <= H(X,Y)"), tol, hy, hxy);
    t.le(&name("0 <= H(X|Y)"), tol, 0.0, e(format!("{ex}|{ey}"))?);
    t.le(&name("H(X,Y) <= H(X) + H(Y)"), tol, hxy, hx + hy);
    t.le(&name("H(X|Y) <= H(X)"), tol, e(format!("{ex}|{ey}"))?, hx);
    t.le(&name("0 <= H(X:Y)"), tol, 0.0, e(format!("{ex}:{ey}"))?);
    t.le(&name("H(X|(Y,Z)) <= H(X|Y)"), tol, e(format!("{ex}|({ey},{ez})"))?, e(format!("{ex}|{ey}"))?);
    Ok(())
}

fn gibbs(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .filter(|(p, _)| **p > 0.0)
        .map(|(p, q)| if *q > 0.0 { p * (q / p).log2() } else { f64::NEG_INFINITY })
        .sum()
}

/// Distribution-level rows: Gibbs, concavity and the grouping bound.
fn distribution_checks(t: &mut Tally, rng: &mut Rng) {
    let tol = CLASSICAL_TOL;
    let n = 2 + random::below(rng, 5);
    let p = random::probability_vector(rng, n);
    let q = random::probability_vector(rng, n);
    t.le("sum p log2(q/p) <= 0", tol, gibbs(&p, &q), 0.0);
    t.eq("sum p log2(p/p) = 0", tol, gibbs(&p, &p), 0.0);

    let k = 2 + random::below(rng, 3);
    let w = random::probability_vector(rng, k);
    let ps: Vec<Vec<f64>> = (0..k).map(|_| random::probability_vector(rng, n)).collect();
    let mix: Vec<f64> = (0..n).map(|i| w.iter().zip(&ps).map(|(w, p)| w * p[i]).sum()).collect();
    let avg: f64 = w.iter().zip(&ps).map(|(w, p)| w * shannon_entropy(p)).sum();
    t.le("sum w H(p_a) <= H(sum w p_a)", tol, avg, shannon_entropy(&mix));
    t.le("H(sum w p_a) <= sum w H(p_a) + H(w)", tol, shannon_entropy(&mix), avg + shannon_entropy(&w));

    // Disjoint supports reach the grouping bound.
    let blocks: Vec<Vec<f64>> = (0..k).map(|_| random::probability_vector(rng, 2)).collect();
    let mut joined = Vec::new();
    for (w, b) in w.iter().zip(&blocks) {
        joined.extend(b.iter().map(|x| w * x));
    }
    let avg: f64 = w.iter().zip(&blocks).map(|(w, b)| w * shannon_entropy(b)).sum();
    t.eq("grouping: disjoint supports give equality", tol, shannon_entropy(&joined), avg + shannon_entropy(&w));
}

/// Classical rows on `trials` random CB nets (3–4 nodes, 2–3 states).
pub fn table1_classical(trials: usize, seed: u64) -> Result<Vec<PropertyResult>> {
    let mut rng = random::seeded(seed);
    let mut t = Tally::default();
    for _ in 0..trials {
        let net = random_cb_net(&mut rng);
        let joint = cb_joint(&net)?;
        let groups = three_groups(&mut rng, &joint.variables);
        classical_checks(&mut t, "", &joint, &groups)?;
        distribution_checks(&mut t, &mut rng);
    }
    Ok(t.rows)
}

fn random_state(rng: &mut Rng, names: &[&str], dims: &[usize]) -> DensityMatrix {
    let n: usize = dims.iter().product();
    let rank = 1 + random::below(rng, n);
    let axes = names.iter().zip(dims).map(|(a, &d)| Axis::new(a, d)).collect();
    DensityMatrix::new(axes, random::density_matrix(rng, n, rank)).expect("random state")
}

/// Quantum rows on `trials` random density matrices over 2 or 3 qubit axes.
pub fn table1_quantum(trials: usize, seed: u64) -> Result<Vec<PropertyResult>> {
    let mut rng = random::seeded(seed);
    let mut t = Tally::default();
    let tol = QUANTUM_TOL;
    for _ in 0..trials {
        let k = 2 + random::below(&mut rng, 2);
        let names = &["x", "y", "z"][..k];
        let rho = random_state(&mut rng, names, &vec![2; k]);

        for n in names {
            let (s, h) = (rho.s(n)?, rho.h(n)?);
            t.le("0 <= S(X)", tol, 0.0, s);
            t.le("S(X) <= H_rho(X)", tol, s, h);
            t.le("H_rho(X) <= log2 N_X", tol, h, 1.0);
        }
        for (i, a) in names.iter().enumerate() {
            for b in &names[i + 1..] {
                let (sa, sb, sab) = (rho.s(a)?, rho.s(b)?, rho.s(&format!("{a},{b}"))?);
                t.le("|S(X) - S(Y)| <= S(X,Y)", tol, (sa - sb).abs(), sab);
                t.le("S(X,Y) <= S(X) + S(Y)", tol, sab, sa + sb);
                t.le("0 <= S(X:Y)", tol, 0.0, rho.s(&format!("{a}:{b}"))?);
                t.eq("S(X|Y) = S(X,Y) - S(Y)", tol, rho.s(&format!("{a}|{b}"))?, sab - sb);
            }
        }
        if k == 3 {
            for (x, y, z) in [("x", "y", "z"), ("y", "z", "x"), ("z", "x", "y")] {
                t.le("S(X|(Y,Z)) <= S(X|Y)", tol, rho.s(&format!("{x}|({y},{z})"))?, rho.s(&format!("{x}|{y}"))?);
            }
            t.eq("S((X,Y):Z) = S((X:Z),(Y:Z))", tol, rho.s("(x,y):z")?, rho.s("(x:z),(y:z)")?);
            t.eq("S((X:Y),Z) = S((X,Z):(Y,Z))", tol, rho.s("(x:y),z")?, rho.s("(x,z):(y,z)")?);
        }

        let all = names.join(",");
        let n = rho.dim();
        let u = random::unitary(&mut rng, n);
        t.eq("S(U rho U+) = S(rho)", tol, rho.conjugate(&u)?.s(&all)?, rho.s(&all)?);

        // Non-orthogonal mixtures of pure states, and orthonormal ones.
        let m = 2 + random::below(&mut rng, 3);
        let p = random::probability_vector(&mut rng, m);
        let vecs: Vec<CVec> = (0..m).map(|_| random::pure_state(&mut rng, n)).collect();
        let mix = |vs: &[CVec]| {
            vs.iter().zip(&p).fold(CMat::zeros(n, n), |acc, (v, w)| acc + linalg::outer(v).scale(*w))
        };
        let s_mix = DensityMatrix::single("q", mix(&vecs))?.von_neumann_entropy()?;
        t.le("S(sum p_j |j><j|) <= H(p)", tol, s_mix, shannon_entropy(&p));
        let on: Vec<CVec> = (0..m.min(n)).map(|j| u.column(j).into_owned()).collect();
        let p_on = &p[..on.len()];
        let total: f64 = p_on.iter().sum();
        if total > 1e-9 {
            let pn: Vec<f64> = p_on.iter().map(|x| x / total).collect();
            let m_on = on.iter().zip(&pn).fold(CMat::zeros(n, n), |acc, (v, w)| acc + linalg::outer(v).scale(*w));
            t.eq(
                "S(sum p_j |j><j|) = H(p) for orthonormal |j>",
                tol,
                DensityMatrix::single("q", m_on)?.von_neumann_entropy()?,
                shannon_entropy(&pn),
            );
        }

        let sigma = random::density_matrix(&mut rng, n, n);
        t.le("-tr(rho (log rho - log sigma)) <= 0", tol, neg_relative_entropy(rho.matrix(), &sigma)?, 0.0);
        t.eq("-tr(rho (log rho - log rho)) = 0", tol, neg_relative_entropy(rho.matrix(), rho.matrix())?, 0.0);

        let kk = 2 + random::below(&mut rng, 3);
        let w = random::probability_vector(&mut rng, kk);
        let parts: Vec<CMat> = (0..kk)
            .map(|_| {
                let rank = 1 + random::below(&mut rng, n);
                random::density_matrix(&mut rng, n, rank)
            })
            .collect();
        let total = parts.iter().zip(&w).fold(CMat::zeros(n, n), |acc, (r, w)| acc + r.scale(*w));
        let s_total = DensityMatrix::single("q", total)?.von_neumann_entropy()?;
        let avg = parts.iter().zip(&w).try_fold(0.0, |acc, (r, w)| -> Result<f64> {
            Ok(acc + w * DensityMatrix::single("q", r.clone())?.von_neumann_entropy()?)
        })?;
        t.le("sum w S(rho_a) <= S(sum w rho_a)", tol, avg, s_total);
        t.le("S(sum w rho_a) <= sum w S(rho_a) + H(w)", tol, s_total, avg + shannon_entropy(&w));

        // Orthogonal supports reach the Lanford-Robinson bound.
        let blocks: Vec<CMat> = (0..2).map(|_| random::density_matrix(&mut rng, 2, 2)).collect();
        let w2 = random::probability_vector(&mut rng, 2);
        let mut direct = CMat::zeros(4, 4);
        for (b, (blk, wb)) in blocks.iter().zip(&w2).enumerate() {
            direct.view_mut((2 * b, 2 * b), (2, 2)).copy_from(&blk.scale(*wb));
        }
        let avg = blocks.iter().zip(&w2).try_fold(0.0, |acc, (r, w)| -> Result<f64> {
            Ok(acc + w * DensityMatrix::single("q", r.clone())?.von_neumann_entropy()?)
        })?;
        t.eq(
            "Lanford-Robinson equality for orthogonal supports",
            tol,
            DensityMatrix::single("q", direct)?.von_neumann_entropy()?,
            avg + shannon_entropy(&w2),
        );

        let diag = ProbTable::new(
            names.iter().map(|s| s.to_string()).collect(),
            vec![2; k],
            rho.diagonal(),
        )?;
        if k == 3 {
            let groups = [vec!["x".to_string()], vec!["y".to_string()], vec!["z".to_string()]];
            classical_checks(&mut t, "H_rho: ", &diag, &groups)?;
        }
    }
    Ok(t.rows)
}

/// Deterministic copy chain: every node equals the root.
pub fn copy_chain(len: usize, root: &[f64]) -> CbNet {
    let d = root.len();
    let mut b = NetBuilder::new().node("q1", &[d], &[], nalgebra::DMatrix::from_column_slice(d, 1, root));
    for i in 1..len {
        b = b.node(&format!("q{}", i + 1), &[d], &[&format!("q{i}")], deterministic(d, d, |c| c));
    }
    b.build().expect("copy chain")
}

/// DP inequalities on random 3- and 4-node chains plus the copy-chain
/// equality case.
pub fn dp_suite(trials3: usize, trials4: usize, seed: u64) -> Result<Vec<PropertyResult>> {
    let mut rng = random::seeded(seed);
    let mut t = Tally::default();
    for (len, trials) in [(3, trials3), (4, trials4)] {
        for _ in 0..trials {
            let chain = protocols::random_markov_chain(&mut rng, len, 3);
            for c in protocols::dp_inequality_check(&chain)?.checks {
                t.record(&format!("{len}-chain: {}", c.label), DP_TOL, c.violation());
            }
        }
    }
    let root = random::probability_vector(&mut rng, 3);
    let chain = copy_chain(3, &root);
    let joint = cb_joint(&chain)?;
    let h1 = joint.h_str("q1")?;
    for e in ["q1:q2", "q1:q3", "q2:q3"] {
        t.eq("copy chain: H(qi:qj) = H(q1)", DP_TOL, joint.h_str(e)?, h1);
    }
    Ok(t.rows)
}

fn record_fixture(t: &mut Tally, fx: &protocols::ProtocolFixture) -> Result<()> {
    for o in fx.check()? {
        t.record(&format!("{}: {}", fx.name, o.label), o.tol, o.residual());
    }
    Ok(())
}

fn random_amplitudes(rng: &mut Rng, n: usize) -> Vec<Complex64> {
    random::pure_state(rng, n).as_slice().to_vec()
}

/// Every fixture: the fixed EPR and eraser nets, `instances` random
/// teleportation / dense-coding inputs, `5 * instances` random
/// system-environment and two-mixture nets, and the CB examples.
pub fn protocol_suite(instances: usize, seed: u64) -> Result<Vec<PropertyResult>> {
    let mut rng = random::seeded(seed);
    let mut t = Tally::default();
    record_fixture(&mut t, &protocols::epr_net())?;
    record_fixture(&mut t, &protocols::eraser_net())?;

    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    record_fixture(&mut t, &protocols::teleport_net(&[one, zero])?)?;
    record_fixture(&mut t, &protocols::dense_coding_net(&[Complex64::new(0.5, 0.0); 4])?)?;
    for _ in 0..instances {
        record_fixture(&mut t, &protocols::teleport_net(&random_amplitudes(&mut rng, 2))?)?;
        record_fixture(&mut t, &protocols::dense_coding_net(&random_amplitudes(&mut rng, 4))?)?;
    }
    for i in 0..5 * instances {
        let (dq, dr, de) = (2 + i % 2, 1 + i % 3, 2 + (i / 2) % 2);
        record_fixture(&mut t, &protocols::sys_env_net(1, &SysEnvParams::random(&mut rng, 1, dq, dr, de))?)?;
        record_fixture(&mut t, &protocols::sys_env_net(2, &SysEnvParams::random(&mut rng, 2, 2, 1 + i % 2, 2))?)?;
        let p = TwoMixParams::random(&mut rng, [2, 2 + i % 2], [1 + i % 2, 2]);
        record_fixture(&mut t, &protocols::two_mixtures_net(&p)?)?;
    }
    for _ in 0..(5 * instances / 2).max(1) {
        for ex in protocols::cb_examples(&mut rng) {
            t.record(&format!("cb {}: constraint = 0", ex.name), DP_TOL, ex.value()?.abs());
        }
    }
    let w = protocols::interference_witness();
    let pbc = p_gamma(&w, &["b", "c"])?;
    let pc = p_gamma(&w, &["c"])?;
    let residual = (0..2)
        .map(|c| ((0..2).map(|b| pbc.get(&[b, c])).sum::<f64>() - pc.get(&[c])).abs())
        .fold(0.0, f64::max);
    t.record("witness: |sum_b P(b,c) - P(c)| > 0.01", 0.0, Relation::Ge.violation(residual, 0.01));
    Ok(t.rows)
}
