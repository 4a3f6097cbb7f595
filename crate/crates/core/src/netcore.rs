//! Graph structure, node matrices, stories and validation for QB and CB nets.

use std::collections::HashMap;
use std::fmt::Debug;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Maximum number of stories (product of all node dimensions).
pub const STORY_CAP: u64 = 1 << 20;
/// Tolerance for the norm conditions checked by [`validate`].
pub const NORM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct NodeSpec {
    pub name: String,
    pub shape: Vec<usize>,
    pub parents: Vec<String>,
}

impl NodeSpec {
    pub fn new(name: &str, shape: &[usize], parents: &[&str]) -> Self {
        NodeSpec {
            name: name.to_string(),
            shape: shape.to_vec(),
            parents: parents.iter().map(|p| p.to_string()).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.shape.iter().product()
    }

    /// Flat index of a composite state, first component slowest.
    pub fn flatten(&self, components: &[usize]) -> Result<usize> {
        if components.len() != self.shape.len() {
            return Err(Error::DimensionMismatch(format!(
                "node `{}` has {} components, got {}",
                self.name,
                self.shape.len(),
                components.len()
            )));
        }
        let mut idx = 0;
        for (&x, &d) in components.iter().zip(&self.shape) {
            if x >= d {
                return Err(Error::DimensionMismatch(format!(
                    "state component {} out of range {} for node `{}`",
                    x, d, self.name
                )));
            }
            idx = idx * d + x;
        }
        Ok(idx)
    }

    pub fn unflatten(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.shape.len()];
        for (slot, &d) in out.iter_mut().zip(&self.shape).rev() {
            *slot = idx % d;
            idx /= d;
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDag {
    nodes: Vec<NodeSpec>,
    index: HashMap<String, usize>,
    parents: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
}

impl LabeledDag {
    /// Checks names, parent references and shapes. Acyclicity is checked by
    /// [`LabeledDag::topological_order`].
    pub fn new(nodes: Vec<NodeSpec>) -> Result<Self> {
        let mut index = HashMap::new();
        for (i, n) in nodes.iter().enumerate() {
            if n.shape.is_empty() || n.shape.contains(&0) {
                return Err(Error::EmptyShape(n.name.clone()));
            }
            if index.insert(n.name.clone(), i).is_some() {
                return Err(Error::DuplicateNode(n.name.clone()));
            }
        }
        let mut parents = vec![Vec::new(); nodes.len()];
        let mut children = vec![Vec::new(); nodes.len()];
        for (i, n) in nodes.iter().enumerate() {
            for p in &n.parents {
                let j = *index.get(p).ok_or_else(|| Error::UnknownNode(p.clone()))?;
                if j == i {
                    return Err(Error::SelfParent(n.name.clone()));
                }
                if parents[i].contains(&j) {
                    return Err(Error::DimensionMismatch(format!(
                        "node `{}` lists parent `{}` twice",
                        n.name, p
                    )));
                }
                parents[i].push(j);
                children[j].push(i);
            }
        }
        Ok(LabeledDag { nodes, index, parents, children })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[NodeSpec] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> &NodeSpec {
        &self.nodes[i]
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.index.get(name).copied().ok_or_else(|| Error::UnknownNode(name.to_string()))
    }

    pub fn name(&self, i: usize) -> &str {
        &self.nodes[i].name
    }

    pub fn dims(&self) -> Vec<usize> {
        self.nodes.iter().map(NodeSpec::dim).collect()
    }

    pub fn parents_of(&self, i: usize) -> &[usize] {
        &self.parents[i]
    }

    pub fn children_of(&self, i: usize) -> &[usize] {
        &self.children[i]
    }

    pub fn is_internal(&self, i: usize) -> bool {
        !self.children[i].is_empty()
    }

    /// Number of columns of the node matrix: product of parent dimensions.
    pub fn column_count(&self, i: usize) -> usize {
        self.parents[i].iter().map(|&p| self.nodes[p].dim()).product()
    }

    /// Column of node `i` selected by the parent states in `story`
    /// (lexicographic, first parent slowest).
    pub fn column_index(&self, i: usize, story: &[usize]) -> usize {
        self.parents[i]
            .iter()
            .fold(0, |acc, &p| acc * self.nodes[p].dim() + story[p])
    }

    pub fn story_count(&self) -> u128 {
        self.nodes.iter().map(|n| n.dim() as u128).product()
    }

    pub fn check_story_cap(&self) -> Result<()> {
        let stories = self.story_count();
        if stories > STORY_CAP as u128 {
            return Err(Error::StoryCapExceeded { stories, cap: STORY_CAP });
        }
        Ok(())
    }

    /// Kahn's algorithm, always releasing the lowest declaration index first.
    pub fn topological_order(&self) -> Result<Vec<usize>> {
        let n = self.nodes.len();
        let mut indegree: Vec<usize> = self.parents.iter().map(Vec::len).collect();
        let mut ready: std::collections::BTreeSet<usize> =
            (0..n).filter(|&i| indegree[i] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(i) = ready.pop_first() {
            order.push(i);
            for &ch in &self.children[i] {
                indegree[ch] -= 1;
                if indegree[ch] == 0 {
                    ready.insert(ch);
                }
            }
        }
        if order.len() != n {
            let stuck = (0..n).find(|&i| indegree[i] > 0).unwrap();
            return Err(Error::CycleDetected(self.nodes[stuck].name.clone()));
        }
        Ok(order)
    }

    /// `(internal, external)` node indices in declaration order.
    pub fn classify_nodes(&self) -> (Vec<usize>, Vec<usize>) {
        (0..self.len()).partition(|&i| self.is_internal(i))
    }

    pub fn names(&self, idx: &[usize]) -> Vec<String> {
        idx.iter().map(|&i| self.nodes[i].name.clone()).collect()
    }

    /// Resolves names to indices, sorted by declaration order, duplicates removed.
    pub fn resolve<S: AsRef<str>>(&self, names: &[S]) -> Result<Vec<usize>> {
        let mut out = Vec::with_capacity(names.len());
        for n in names {
            out.push(self.index_of(n.as_ref())?);
        }
        out.sort_unstable();
        out.dedup();
        Ok(out)
    }
}

pub fn topological_order(dag: &LabeledDag) -> Result<Vec<String>> {
    Ok(dag.names(&dag.topological_order()?))
}

pub fn classify_nodes(dag: &LabeledDag) -> (Vec<String>, Vec<String>) {
    let (i, e) = dag.classify_nodes();
    (dag.names(&i), dag.names(&e))
}

/// One state index per node (flat index for composite nodes), in declaration order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Story(pub Vec<usize>);

/// Scalar type of a node matrix: complex amplitudes or real probabilities.
pub trait Entry: Copy + PartialEq + Debug + Send + Sync + 'static {
    fn zero() -> Self;
    fn one() -> Self;
    fn mul(self, other: Self) -> Self;
    fn add(self, other: Self) -> Self;
    /// Contribution of this entry to a probability: `|A|²` or `P`.
    fn weight(self) -> f64;
    /// Column normalization residual and, for CB entries, the most negative entry.
    fn column_check(col: &[Self]) -> (f64, f64);
    fn is_quantum() -> bool;
}

impl Entry for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn mul(self, other: Self) -> Self {
        self * other
    }
    fn add(self, other: Self) -> Self {
        self + other
    }
    fn weight(self) -> f64 {
        self.norm_sqr()
    }
    fn column_check(col: &[Self]) -> (f64, f64) {
        let s: f64 = col.iter().map(|a| a.norm_sqr()).sum();
        ((s - 1.0).abs(), 0.0)
    }
    fn is_quantum() -> bool {
        true
    }
}

impl Entry for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn mul(self, other: Self) -> Self {
        self * other
    }
    fn add(self, other: Self) -> Self {
        self + other
    }
    fn weight(self) -> f64 {
        self
    }
    fn column_check(col: &[Self]) -> (f64, f64) {
        let s: f64 = col.iter().sum();
        let low = col.iter().copied().fold(0.0, f64::min);
        ((s - 1.0).abs(), low)
    }
    fn is_quantum() -> bool {
        false
    }
}

/// A labelled DAG with one node matrix per node. Rows of a node matrix are
/// the node's states, columns the parent-state tuples.
#[derive(Debug, Clone)]
pub struct Net<T: Entry> {
    dag: LabeledDag,
    matrices: Vec<DMatrix<T>>,
    topo: Vec<usize>,
}

pub type QbNet = Net<Complex64>;
pub type CbNet = Net<f64>;

impl<T: Entry> Net<T> {
    pub fn new(dag: LabeledDag, matrices: Vec<DMatrix<T>>) -> Result<Self> {
        if matrices.len() != dag.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} nodes but {} matrices",
                dag.len(),
                matrices.len()
            )));
        }
        for (i, m) in matrices.iter().enumerate() {
            let want = (dag.node(i).dim(), dag.column_count(i));
            if m.shape() != want {
                return Err(Error::DimensionMismatch(format!(
                    "node `{}` matrix is {}x{}, expected {}x{}",
                    dag.name(i),
                    m.nrows(),
                    m.ncols(),
                    want.0,
                    want.1
                )));
            }
        }
        let topo = dag.topological_order()?;
        Ok(Net { dag, matrices, topo })
    }

    pub fn dag(&self) -> &LabeledDag {
        &self.dag
    }

    pub fn topo(&self) -> &[usize] {
        &self.topo
    }

    pub fn matrices(&self) -> &[DMatrix<T>] {
        &self.matrices
    }

    pub fn matrix_at(&self, i: usize) -> &DMatrix<T> {
        &self.matrices[i]
    }

    pub fn matrix(&self, name: &str) -> Result<&DMatrix<T>> {
        Ok(&self.matrices[self.dag.index_of(name)?])
    }

    pub fn node_entry(&self, i: usize, story: &[usize]) -> T {
        self.matrices[i][(story[i], self.dag.column_index(i, story))]
    }

    fn check_story(&self, s: &Story) -> Result<()> {
        if s.0.len() != self.dag.len() {
            return Err(Error::DimensionMismatch(format!(
                "story has {} entries for {} nodes",
                s.0.len(),
                self.dag.len()
            )));
        }
        for (i, &x) in s.0.iter().enumerate() {
            if x >= self.dag.node(i).dim() {
                return Err(Error::DimensionMismatch(format!(
                    "state {} out of range for node `{}`",
                    x,
                    self.dag.name(i)
                )));
            }
        }
        Ok(())
    }

    /// Product of all node matrix entries along the story.
    pub fn story_value(&self, s: &Story) -> Result<T> {
        self.check_story(s)?;
        Ok((0..self.dag.len()).fold(T::one(), |acc, i| acc.mul(self.node_entry(i, &s.0))))
    }

    /// Visits every story with a nonzero value. Nodes are assigned in
    /// topological order and branches with a zero factor are pruned.
    pub fn for_each_nonzero_story(&self, mut f: impl FnMut(&[usize], T)) -> Result<()> {
        self.dag.check_story_cap()?;
        let mut story = vec![0usize; self.dag.len()];
        self.descend(0, T::one(), &mut story, &mut f);
        Ok(())
    }

    fn descend(&self, depth: usize, acc: T, story: &mut Vec<usize>, f: &mut impl FnMut(&[usize], T)) {
        if depth == self.topo.len() {
            f(story, acc);
            return;
        }
        let i = self.topo[depth];
        let col = self.dag.column_index(i, story);
        let m = &self.matrices[i];
        for x in 0..m.nrows() {
            let a = m[(x, col)];
            if a == T::zero() {
                continue;
            }
            story[i] = x;
            self.descend(depth + 1, acc.mul(a), story, f);
        }
        story[i] = 0;
    }

    /// Entrywise map of every node matrix, keeping the graph.
    pub fn map<U: Entry>(&self, f: impl Fn(T) -> U) -> Net<U> {
        Net {
            dag: self.dag.clone(),
            matrices: self.matrices.iter().map(|m| m.map(&f)).collect(),
            topo: self.topo.clone(),
        }
    }
}

impl QbNet {
    pub fn story_amplitude(&self, s: &Story) -> Result<Complex64> {
        self.story_value(s)
    }
}

impl CbNet {
    pub fn story_probability(&self, s: &Story) -> Result<f64> {
        self.story_value(s)
    }
}

/// Every entry replaced by its squared magnitude.
pub fn parent_cb_net(net: &QbNet) -> CbNet {
    net.map(|a| a.norm_sqr())
}

/// All stories in declaration order, last node fastest.
pub fn stories(dag: &LabeledDag) -> Result<impl Iterator<Item = Story>> {
    dag.check_story_cap()?;
    let dims = dag.dims();
    let total: usize = dims.iter().product();
    Ok((0..total).map(move |mut k| {
        let mut s = vec![0; dims.len()];
        for (slot, &d) in s.iter_mut().zip(&dims).rev() {
            *slot = k % d;
            k /= d;
        }
        Story(s)
    }))
}

/// Assembles a net node by node.
#[derive(Debug, Clone)]
pub struct NetBuilder<T: Entry> {
    specs: Vec<NodeSpec>,
    matrices: Vec<DMatrix<T>>,
}

impl<T: Entry> Default for NetBuilder<T> {
    fn default() -> Self {
        NetBuilder { specs: Vec::new(), matrices: Vec::new() }
    }
}

impl<T: Entry> NetBuilder<T> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn node(mut self, name: &str, shape: &[usize], parents: &[&str], m: DMatrix<T>) -> Self {
        self.specs.push(NodeSpec::new(name, shape, parents));
        self.matrices.push(m);
        self
    }

    pub fn push(&mut self, spec: NodeSpec, m: DMatrix<T>) {
        self.specs.push(spec);
        self.matrices.push(m);
    }

    pub fn build(self) -> Result<Net<T>> {
        Net::new(LabeledDag::new(self.specs)?, self.matrices)
    }
}

impl<T: Entry> From<&Net<T>> for NetBuilder<T> {
    fn from(net: &Net<T>) -> Self {
        NetBuilder { specs: net.dag.nodes().to_vec(), matrices: net.matrices.clone() }
    }
}

/// Root node matrix: a single column.
pub fn root_matrix<T: Entry>(values: &[T]) -> DMatrix<T> {
    DMatrix::from_column_slice(values.len(), 1, values)
}

/// Deterministic node matrix with a one at `(f(col), col)`.
pub fn deterministic<T: Entry>(rows: usize, cols: usize, f: impl Fn(usize) -> usize) -> DMatrix<T> {
    let mut m = DMatrix::from_element(rows, cols, T::zero());
    for col in 0..cols {
        m[(f(col), col)] = T::one();
    }
    m
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    /// A column is not normalized (unit 2-norm for QB, unit sum for CB).
    ColumnNorm,
    /// A CB entry is negative.
    NegativeEntry,
    /// `Σ |A(x.)|²` over all stories differs from 1.
    TotalNorm,
    /// `Σ_ex |Σ_in A|²` differs from 1.
    ExternalNorm,
    /// Too many stories to enumerate.
    StoryCap,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub node: Option<String>,
    pub kind: ViolationKind,
    pub column: Option<usize>,
    pub residual: f64,
}

#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for v in &self.violations {
            let node = v.node.as_deref().unwrap_or("<net>");
            match v.column {
                Some(c) => writeln!(f, "{:?}\t{}\tcolumn {}\t{:.3e}", v.kind, node, c, v.residual)?,
                None => writeln!(f, "{:?}\t{}\t-\t{:.3e}", v.kind, node, v.residual)?,
            }
        }
        Ok(())
    }
}

/// Checks every norm condition a QB or CB net must satisfy, reporting the
/// worst column per node and the two whole-net conditions.
pub fn validate<T: Entry>(net: &Net<T>) -> ValidationReport {
    let mut report = ValidationReport::default();
    let dag = net.dag();
    for i in 0..dag.len() {
        let m = net.matrix_at(i);
        let mut worst: Option<(usize, f64)> = None;
        let mut lowest: Option<(usize, f64)> = None;
        for col in 0..m.ncols() {
            let entries: Vec<T> = m.column(col).iter().copied().collect();
            let (res, low) = T::column_check(&entries);
            if res > NORM_TOL && worst.is_none_or(|(_, w)| res > w) {
                worst = Some((col, res));
            }
            if low < 0.0 && lowest.is_none_or(|(_, l)| low < l) {
                lowest = Some((col, low));
            }
        }
        if let Some((col, res)) = worst {
            report.violations.push(Violation {
                node: Some(dag.name(i).to_string()),
                kind: ViolationKind::ColumnNorm,
                column: Some(col),
                residual: res,
            });
        }
        if let Some((col, low)) = lowest {
            report.violations.push(Violation {
                node: Some(dag.name(i).to_string()),
                kind: ViolationKind::NegativeEntry,
                column: Some(col),
                residual: -low,
            });
        }
    }

    if let Err(Error::StoryCapExceeded { stories, .. }) = dag.check_story_cap() {
        report.violations.push(Violation {
            node: None,
            kind: ViolationKind::StoryCap,
            column: None,
            residual: stories as f64,
        });
        return report;
    }

    let (_, external) = dag.classify_nodes();
    let ext_dims: Vec<usize> = external.iter().map(|&i| dag.node(i).dim()).collect();
    let mut ext_sums = vec![T::zero(); ext_dims.iter().product()];
    let mut total = 0.0;
    net.for_each_nonzero_story(|s, a| {
        total += a.weight();
        let k = external.iter().fold(0, |acc, &i| acc * dag.node(i).dim() + s[i]);
        ext_sums[k] = ext_sums[k].add(a);
    })
    .expect("story cap checked above");
    if (total - 1.0).abs() > NORM_TOL {
        report.violations.push(Violation {
            node: None,
            kind: ViolationKind::TotalNorm,
            column: None,
            residual: (total - 1.0).abs(),
        });
    }
    if T::is_quantum() {
        // weight of a summed amplitude is |Σ_in A|²
        let ext: f64 = ext_sums.iter().map(|a| a.weight()).sum();
        if (ext - 1.0).abs() > NORM_TOL {
            report.violations.push(Violation {
                node: None,
                kind: ViolationKind::ExternalNorm,
                column: None,
                residual: (ext - 1.0).abs(),
            });
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, re};

    fn chain() -> LabeledDag {
        LabeledDag::new(vec![
            NodeSpec::new("a", &[2], &[]),
            NodeSpec::new("b", &[2], &["a"]),
            NodeSpec::new("c", &[2], &["b"]),
        ])
        .unwrap()
    }

    #[test]
    fn chain_order() {
        assert_eq!(topological_order(&chain()).unwrap(), vec!["a", "b", "c"]);
    }

    #[test]
    fn order_breaks_ties_by_declaration() {
        let dag = LabeledDag::new(vec![
            NodeSpec::new("c", &[2], &["a"]),
            NodeSpec::new("a", &[2], &[]),
            NodeSpec::new("b", &[2], &["a"]),
        ])
        .unwrap();
        assert_eq!(topological_order(&dag).unwrap(), vec!["a", "c", "b"]);
    }

    #[test]
    fn cycle_rejected() {
        let dag = LabeledDag::new(vec![
            NodeSpec::new("a", &[2], &["b"]),
            NodeSpec::new("b", &[2], &["a"]),
        ])
        .unwrap();
        assert!(matches!(dag.topological_order(), Err(Error::CycleDetected(_))));
    }

    #[test]
    fn structural_errors() {
        assert!(matches!(
            LabeledDag::new(vec![NodeSpec::new("a", &[2], &["a"])]),
            Err(Error::SelfParent(_))
        ));
        assert!(matches!(
            LabeledDag::new(vec![NodeSpec::new("a", &[2], &["z"])]),
            Err(Error::UnknownNode(_))
        ));
        assert!(matches!(
            LabeledDag::new(vec![NodeSpec::new("a", &[2], &[]), NodeSpec::new("a", &[2], &[])]),
            Err(Error::DuplicateNode(_))
        ));
        assert!(matches!(
            LabeledDag::new(vec![NodeSpec::new("a", &[0], &[])]),
            Err(Error::EmptyShape(_))
        ));
    }

    #[test]
    fn classify() {
        let (i, e) = classify_nodes(&chain());
        assert_eq!(i, vec!["a", "b"]);
        assert_eq!(e, vec!["c"]);
        let single = LabeledDag::new(vec![NodeSpec::new("z", &[3], &[])]).unwrap();
        let (i, e) = classify_nodes(&single);
        assert!(i.is_empty());
        assert_eq!(e, vec!["z"]);
    }

    #[test]
    fn composite_flattening() {
        let n = NodeSpec::new("t", &[2, 3], &[]);
        assert_eq!(n.flatten(&[1, 2]).unwrap(), 5);
        assert_eq!(n.unflatten(5), vec![1, 2]);
        assert!(n.flatten(&[2, 0]).is_err());
    }

    #[test]
    fn deterministic_two_node() {
        let net: QbNet = NetBuilder::new()
            .node("a", &[2], &[], root_matrix(&[re(1.0), re(0.0)]))
            .node("b", &[2], &["a"], deterministic(2, 2, |c| c))
            .build()
            .unwrap();
        assert_eq!(net.story_amplitude(&Story(vec![0, 0])).unwrap(), re(1.0));
        assert_eq!(net.story_amplitude(&Story(vec![0, 1])).unwrap(), re(0.0));
        assert!(validate(&net).is_valid());
        assert!(net.story_amplitude(&Story(vec![0])).is_err());
    }

    #[test]
    fn scaled_column_is_reported() {
        let mut m = deterministic::<Complex64>(2, 2, |c| c);
        m[(1, 1)] = re(2.0);
        let net: QbNet = NetBuilder::new()
            .node("a", &[2], &[], root_matrix(&[re(0.6), c(0.0, 0.8)]))
            .node("b", &[2], &["a"], m)
            .build()
            .unwrap();
        let r = validate(&net);
        assert_eq!(r.violations[0].node.as_deref(), Some("b"));
        assert_eq!(r.violations[0].kind, ViolationKind::ColumnNorm);
        assert_eq!(r.violations[0].column, Some(1));
    }

    #[test]
    fn negative_probability_is_reported() {
        let net: CbNet = NetBuilder::new()
            .node("a", &[2], &[], root_matrix(&[1.5, -0.5]))
            .build()
            .unwrap();
        let r = validate(&net);
        assert!(r.violations.iter().any(|v| v.kind == ViolationKind::NegativeEntry));
    }

    #[test]
    fn matrix_shape_checked() {
        let r: Result<QbNet> = NetBuilder::new()
            .node("a", &[2], &[], root_matrix(&[re(1.0), re(0.0)]))
            .node("b", &[3], &["a"], deterministic(2, 2, |c| c))
            .build();
        assert!(matches!(r, Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn uniform_root_cb() {
        let net: CbNet = NetBuilder::new().node("a", &[4], &[], root_matrix(&[0.25; 4])).build().unwrap();
        for s in stories(net.dag()).unwrap() {
            assert_eq!(net.story_probability(&s).unwrap(), 0.25);
        }
    }

    #[test]
    fn story_cap() {
        let net: CbNet = NetBuilder::new()
            .node("a", &[1 << 11], &[], root_matrix(&vec![1.0 / 2048.0; 1 << 11]))
            .node("b", &[1 << 10], &[], root_matrix(&vec![1.0 / 1024.0; 1 << 10]))
            .build()
            .unwrap();
        assert!(matches!(stories(net.dag()), Err(Error::StoryCapExceeded { .. })));
        assert!(validate(&net).violations.iter().any(|v| v.kind == ViolationKind::StoryCap));
    }
}
