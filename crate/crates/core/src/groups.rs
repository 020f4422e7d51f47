//! Finite groups bundled with a complete set of unitary irreducible representations.
//!
//! Elements are dense indices `0..|G|`. Built-in families put the identity at index 0;
//! groups loaded from file may place it anywhere. Every group is validated eagerly at
//! construction, so downstream code can assume a Latin-square Cayley table, unitary
//! homomorphic irreps and a complete irrep set.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{c, cr, kron, CMatrix, C64};

/// Tolerance for unitarity, homomorphism and orthogonality checks.
pub const GROUP_TOL: f64 = 1e-10;
/// Largest group order accepted (associativity is checked exhaustively).
pub const MAX_ORDER: usize = 64;
/// Largest accepted group-definition file.
pub const MAX_FILE_BYTES: u64 = 1 << 20;

#[derive(Debug, Clone, PartialEq)]
pub struct Irrep {
    pub label: usize,
    pub dim: usize,
    /// One `dim × dim` unitary per group element, indexed by element.
    pub matrices: Vec<CMatrix>,
}

impl Irrep {
    pub fn character(&self) -> Vec<C64> {
        self.matrices.iter().map(CMatrix::trace).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupWithIrreps {
    name: String,
    element_names: Vec<String>,
    cayley: Vec<Vec<usize>>,
    identity: usize,
    inverses: Vec<usize>,
    irreps: Vec<Irrep>,
    classes: Vec<Vec<usize>>,
}

impl GroupWithIrreps {
    /// Assembles and validates a group. Conjugacy classes and inverses are derived
    /// from the Cayley table.
    pub fn new(
        name: impl Into<String>,
        element_names: Option<Vec<String>>,
        cayley: Vec<Vec<usize>>,
        identity: usize,
        mut irreps: Vec<Irrep>,
    ) -> Result<Self> {
        let order = cayley.len();
        if order == 0 || order > MAX_ORDER {
            return Err(Error::InvalidOrder(format!("order {order} outside 1..={MAX_ORDER}")));
        }
        check_cayley(&cayley, identity)?;
        let inverses = (0..order)
            .map(|g| (0..order).find(|&h| cayley[g][h] == identity).expect("Latin square has inverses"))
            .collect::<Vec<_>>();
        let element_names = match element_names {
            Some(n) if n.len() == order => n,
            Some(n) => return Err(Error::CountMismatch { expected: order, found: n.len() }),
            None => (0..order).map(|i| format!("g{i}")).collect(),
        };
        irreps.sort_by_key(|r| r.label);
        let classes = conjugacy_classes(&cayley, &inverses);
        let group = Self { name: name.into(), element_names, cayley, identity, inverses, irreps, classes };
        group.validate_irreps()?;
        Ok(group)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn order(&self) -> usize {
        self.cayley.len()
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn element_name(&self, g: usize) -> &str {
        &self.element_names[g]
    }

    pub fn element_names(&self) -> &[String] {
        &self.element_names
    }

    pub fn element_by_name(&self, name: &str) -> Option<usize> {
        self.element_names.iter().position(|n| n == name)
    }

    pub fn cayley(&self) -> &[Vec<usize>] {
        &self.cayley
    }

    /// Index of `g·h`.
    pub fn mul(&self, g: usize, h: usize) -> usize {
        self.cayley[g][h]
    }

    pub fn inverse(&self, g: usize) -> usize {
        self.inverses[g]
    }

    pub fn irreps(&self) -> &[Irrep] {
        &self.irreps
    }

    pub fn irrep(&self, label: usize) -> Option<&Irrep> {
        self.irreps.iter().find(|r| r.label == label)
    }

    pub fn labels(&self) -> Vec<usize> {
        self.irreps.iter().map(|r| r.label).collect()
    }

    pub fn conjugacy_classes(&self) -> &[Vec<usize>] {
        &self.classes
    }

    pub fn class_of(&self, g: usize) -> usize {
        self.classes.iter().position(|cl| cl.contains(&g)).expect("every element has a class")
    }

    /// Character table: one row per irrep (label order), one column per class.
    pub fn character_table(&self) -> Vec<Vec<C64>> {
        self.irreps
            .iter()
            .map(|r| self.classes.iter().map(|cl| r.matrices[cl[0]].trace()).collect())
            .collect()
    }

    /// Same carrier structure: equal orders, identity and Cayley table.
    pub fn same_group(&self, other: &GroupWithIrreps) -> bool {
        std::ptr::eq(self, other) || (self.identity == other.identity && self.cayley == other.cayley)
    }

    fn validate_irreps(&self) -> Result<()> {
        let order = self.order();
        let mut seen = BTreeSet::new();
        for r in &self.irreps {
            if !seen.insert(r.label) {
                return Err(Error::Validation(format!("duplicate irrep label {}", r.label)));
            }
            if r.dim == 0 || r.matrices.len() != order {
                return Err(Error::Validation(format!(
                    "irrep {} needs {order} matrices of positive dimension",
                    r.label
                )));
            }
            for (g, m) in r.matrices.iter().enumerate() {
                if m.rows() != r.dim || m.cols() != r.dim || !m.is_finite() {
                    return Err(Error::Validation(format!("irrep {} matrix {g} has wrong shape", r.label)));
                }
                let err = m.unitarity_error();
                if err > GROUP_TOL {
                    return Err(Error::Validation(format!(
                        "non-unitary irrep {} at element {g} (error {err:e})",
                        r.label
                    )));
                }
            }
            check_homomorphism(self, &r.matrices).map_err(|e| {
                Error::Validation(format!("homomorphism failure in irrep {}: {e}", r.label))
            })?;
            let norm: f64 = r.character().iter().map(|z| z.norm_sqr()).sum::<f64>() / order as f64;
            if (norm - 1.0).abs() > GROUP_TOL {
                return Err(Error::Validation(format!(
                    "irrep {} is reducible (character norm {norm})",
                    r.label
                )));
            }
        }
        let dim_sq: usize = self.irreps.iter().map(|r| r.dim * r.dim).sum();
        if dim_sq != order {
            return Err(Error::Validation(format!(
                "incomplete irrep set: sum of squared dimensions {dim_sq} != order {order}"
            )));
        }
        let chars: Vec<Vec<C64>> = self.irreps.iter().map(Irrep::character).collect();
        for (i, ci) in chars.iter().enumerate() {
            for (j, cj) in chars.iter().enumerate().skip(i + 1) {
                let ip: C64 = ci.iter().zip(cj).map(|(a, b)| a * b.conj()).sum::<C64>() / order as f64;
                if ip.norm() > GROUP_TOL {
                    return Err(Error::Validation(format!(
                        "characters of irreps {} and {} are not orthogonal ({ip})",
                        self.irreps[i].label, self.irreps[j].label
                    )));
                }
            }
        }
        Ok(())
    }

    /// Serializable form in the group-definition file schema.
    pub fn to_file(&self) -> GroupFile {
        GroupFile {
            name: self.name.clone(),
            order: self.order(),
            identity: self.identity,
            cayley: self.cayley.clone(),
            irreps: self
                .irreps
                .iter()
                .map(|r| IrrepFile {
                    label: r.label,
                    dim: r.dim,
                    matrices: r
                        .matrices
                        .iter()
                        .map(|m| (0..m.rows()).map(|i| m.row(i).iter().map(|z| [z.re, z.im]).collect()).collect())
                        .collect(),
                })
                .collect(),
        }
    }
}

fn check_cayley(cayley: &[Vec<usize>], identity: usize) -> Result<()> {
    let n = cayley.len();
    if identity >= n {
        return Err(Error::Validation(format!("identity index {identity} out of range")));
    }
    for (g, row) in cayley.iter().enumerate() {
        if row.len() != n {
            return Err(Error::Validation(format!("Cayley row {g} has length {}", row.len())));
        }
        if row.iter().any(|&x| x >= n) {
            return Err(Error::Validation(format!("Cayley row {g} has an out-of-range entry")));
        }
    }
    for (g, entries) in cayley.iter().enumerate() {
        let row: BTreeSet<usize> = entries.iter().copied().collect();
        let col: BTreeSet<usize> = (0..n).map(|h| cayley[h][g]).collect();
        if row.len() != n || col.len() != n {
            return Err(Error::Validation("Cayley table is not a Latin square".into()));
        }
    }
    if (0..n).any(|g| cayley[identity][g] != g || cayley[g][identity] != g) {
        return Err(Error::Validation(format!("element {identity} does not act as identity")));
    }
    for a in 0..n {
        for b in 0..n {
            let ab = cayley[a][b];
            for x in 0..n {
                if cayley[ab][x] != cayley[a][cayley[b][x]] {
                    return Err(Error::Validation(format!("associativity fails for ({a}, {b}, {x})")));
                }
            }
        }
    }
    Ok(())
}

/// Classes ordered by their smallest element index.
fn conjugacy_classes(cayley: &[Vec<usize>], inverses: &[usize]) -> Vec<Vec<usize>> {
    let n = cayley.len();
    let mut assigned = vec![false; n];
    let mut classes = Vec::new();
    for g in 0..n {
        if assigned[g] {
            continue;
        }
        let class: BTreeSet<usize> = (0..n).map(|h| cayley[cayley[h][g]][inverses[h]]).collect();
        for &x in &class {
            assigned[x] = true;
        }
        classes.push(class.into_iter().collect());
    }
    classes
}

/// Max deviation of `M(g)M(h) − M(gh)` over all pairs.
pub fn homomorphism_error(group: &GroupWithIrreps, matrices: &[CMatrix]) -> f64 {
    let n = group.order();
    let mut worst = 0.0f64;
    for g in 0..n {
        for h in 0..n {
            let prod = &matrices[g] * &matrices[h];
            worst = worst.max(prod.max_abs_diff(&matrices[group.mul(g, h)]));
        }
    }
    worst
}

fn check_homomorphism(group: &GroupWithIrreps, matrices: &[CMatrix]) -> Result<()> {
    let err = homomorphism_error(group, matrices);
    if err > GROUP_TOL {
        return Err(Error::Validation(format!("M(g)M(h) != M(gh), error {err:e}")));
    }
    Ok(())
}

/// Cyclic group `C_n = {a^k}` with the `n` one-dimensional irreps
/// `Γ_p(a^k) = exp(2πi·pk/n)`, labelled `0..n`.
pub fn cyclic_group(n: usize) -> Result<GroupWithIrreps> {
    if n < 2 {
        return Err(Error::InvalidOrder(format!("cyclic group needs n >= 2, got {n}")));
    }
    if n > MAX_ORDER {
        return Err(Error::InvalidOrder(format!("order {n} exceeds {MAX_ORDER}")));
    }
    let cayley = (0..n).map(|i| (0..n).map(|j| (i + j) % n).collect()).collect();
    let names = (0..n)
        .map(|k| match k {
            0 => "e".to_string(),
            1 => "a".to_string(),
            _ => format!("a{k}"),
        })
        .collect();
    let irreps = (0..n)
        .map(|p| Irrep {
            label: p,
            dim: 1,
            matrices: (0..n)
                .map(|k| {
                    let phase = 2.0 * PI * ((p * k) % n) as f64 / n as f64;
                    CMatrix::diag(&[C64::from_polar(1.0, phase)])
                })
                .collect(),
        })
        .collect();
    GroupWithIrreps::new(format!("C{n}"), Some(names), cayley, 0, irreps)
}

/// Dihedral group `D_n` for odd `n ≥ 3`: elements `r^k` (index `k`) and `r^k s`
/// (index `n + k`). Irreps: trivial (label 1), sign (label 2) and the two-dimensional
/// irreps with rotation angle `2πk/n` (label `2 + k`, `k = 1..=(n−1)/2`) and
/// reflection `diag(1, −1)`.
pub fn dihedral_group(n: usize) -> Result<GroupWithIrreps> {
    if n < 3 || n.is_multiple_of(2) {
        return Err(Error::InvalidOrder(format!("dihedral builder needs odd n >= 3, got {n}")));
    }
    if 2 * n > MAX_ORDER {
        return Err(Error::InvalidOrder(format!("order {} exceeds {MAX_ORDER}", 2 * n)));
    }
    let order = 2 * n;
    // (rotation k, flip x) <-> index k + n·x
    let decode = |i: usize| (i % n, i / n);
    let encode = |k: usize, x: usize| k + n * x;
    let cayley = (0..order)
        .map(|i| {
            (0..order)
                .map(|j| {
                    let (a, x) = decode(i);
                    let (b, y) = decode(j);
                    // r^a s^x r^b s^y = r^(a ± b) s^(x + y)
                    let k = if x == 0 { (a + b) % n } else { (a + n - b) % n };
                    encode(k, (x + y) % 2)
                })
                .collect()
        })
        .collect();
    let rot_name = |k: usize| match k {
        0 => String::new(),
        1 => "r".to_string(),
        _ => format!("r{k}"),
    };
    let names = (0..order)
        .map(|i| {
            let (k, x) = decode(i);
            match (k, x) {
                (0, 0) => "e".to_string(),
                (_, 0) => rot_name(k),
                (_, _) => format!("{}s", rot_name(k)),
            }
        })
        .collect();

    let mut irreps = vec![
        Irrep { label: 1, dim: 1, matrices: vec![CMatrix::identity(1); order] },
        Irrep {
            label: 2,
            dim: 1,
            matrices: (0..order)
                .map(|i| CMatrix::diag_real(&[if decode(i).1 == 0 { 1.0 } else { -1.0 }]))
                .collect(),
        },
    ];
    let reflection = CMatrix::diag_real(&[1.0, -1.0]);
    for k in 1..=(n - 1) / 2 {
        let matrices = (0..order)
            .map(|i| {
                let (j, x) = decode(i);
                let theta = 2.0 * PI * ((j * k) % n) as f64 / n as f64;
                let (s, co) = theta.sin_cos();
                let rot = CMatrix::from_rows(&[vec![cr(co), cr(-s)], vec![cr(s), cr(co)]])
                    .expect("2x2 rotation");
                if x == 0 {
                    rot
                } else {
                    &rot * &reflection
                }
            })
            .collect();
        irreps.push(Irrep { label: 2 + k, dim: 2, matrices });
    }
    GroupWithIrreps::new(format!("D{n}"), Some(names), cayley, 0, irreps)
}

/// On-disk group definition.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupFile {
    pub name: String,
    pub order: usize,
    pub identity: usize,
    pub cayley: Vec<Vec<usize>>,
    pub irreps: Vec<IrrepFile>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IrrepFile {
    pub label: usize,
    pub dim: usize,
    pub matrices: Vec<Vec<Vec<[f64; 2]>>>,
}

impl GroupFile {
    pub fn into_group(self) -> Result<GroupWithIrreps> {
        if self.order == 0 || self.order > MAX_ORDER {
            return Err(Error::InvalidOrder(format!("order {} outside 1..={MAX_ORDER}", self.order)));
        }
        if self.cayley.len() != self.order {
            return Err(Error::Validation(format!(
                "Cayley table has {} rows, expected {}",
                self.cayley.len(),
                self.order
            )));
        }
        let mut irreps = Vec::with_capacity(self.irreps.len());
        for ir in self.irreps {
            if ir.matrices.len() != self.order {
                return Err(Error::Validation(format!(
                    "irrep {} has {} matrices, expected {}",
                    ir.label,
                    ir.matrices.len(),
                    self.order
                )));
            }
            let mut mats = Vec::with_capacity(self.order);
            for (g, m) in ir.matrices.iter().enumerate() {
                if m.len() != ir.dim || m.iter().any(|row| row.len() != ir.dim) {
                    return Err(Error::Validation(format!(
                        "irrep {} matrix {g} is not {}x{}",
                        ir.label, ir.dim, ir.dim
                    )));
                }
                let rows: Vec<Vec<C64>> =
                    m.iter().map(|row| row.iter().map(|&[re, im]| c(re, im)).collect()).collect();
                mats.push(CMatrix::from_rows(&rows).map_err(|e| Error::Validation(e.to_string()))?);
            }
            irreps.push(Irrep { label: ir.label, dim: ir.dim, matrices: mats });
        }
        GroupWithIrreps::new(self.name, None, self.cayley, self.identity, irreps)
    }
}

pub fn parse_group(json: &str) -> Result<GroupWithIrreps> {
    let file: GroupFile = serde_json::from_str(json).map_err(|e| Error::Parse(e.to_string()))?;
    file.into_group()
}

/// Loads and validates a group-definition file (JSON, at most 1 MiB, order at most 64).
pub fn load_group(path: impl AsRef<Path>) -> Result<GroupWithIrreps> {
    let path = path.as_ref();
    let meta = std::fs::metadata(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    if meta.len() > MAX_FILE_BYTES {
        return Err(Error::Parse(format!("{} exceeds {MAX_FILE_BYTES} bytes", path.display())));
    }
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_group(&text)
}

/// A unitary representation of a group, optionally tagged with its irrep content
/// when it was assembled as a direct sum.
#[derive(Debug, Clone)]
pub struct Representation {
    group: Arc<GroupWithIrreps>,
    dim: usize,
    matrices: Vec<CMatrix>,
    irrep_content: Vec<usize>,
}

impl Representation {
    /// Validated representation from explicit matrices (unitarity and homomorphism).
    pub fn from_matrices(group: Arc<GroupWithIrreps>, matrices: Vec<CMatrix>) -> Result<Self> {
        if matrices.len() != group.order() {
            return Err(Error::CountMismatch { expected: group.order(), found: matrices.len() });
        }
        let dim = matrices[0].rows();
        for (g, m) in matrices.iter().enumerate() {
            if m.rows() != dim || m.cols() != dim {
                return Err(Error::Validation(format!("matrix {g} is not {dim}x{dim}")));
            }
            let err = m.unitarity_error();
            if err > GROUP_TOL {
                return Err(Error::Validation(format!("non-unitary matrix at element {g} (error {err:e})")));
            }
        }
        check_homomorphism(&group, &matrices)?;
        Ok(Self { group, dim, matrices, irrep_content: Vec::new() })
    }

    pub fn irrep(group: Arc<GroupWithIrreps>, label: usize) -> Result<Self> {
        direct_sum_rep(group, &[label])
    }

    pub fn group(&self) -> &Arc<GroupWithIrreps> {
        &self.group
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self, g: usize) -> &CMatrix {
        &self.matrices[g]
    }

    pub fn matrices(&self) -> &[CMatrix] {
        &self.matrices
    }

    /// Irrep labels in block order, or empty when unknown.
    pub fn irrep_content(&self) -> &[usize] {
        &self.irrep_content
    }

    pub fn character(&self) -> Vec<C64> {
        self.matrices.iter().map(CMatrix::trace).collect()
    }

    /// Block-diagonal sum of arbitrary representations of the same group.
    pub fn block_sum(parts: &[&Representation]) -> Result<Self> {
        let first = parts.first().ok_or_else(|| Error::InvalidInput("empty direct sum".into()))?;
        if parts.iter().any(|r| !r.group.same_group(&first.group)) {
            return Err(Error::GroupMismatch);
        }
        let order = first.group.order();
        let matrices = (0..order)
            .map(|g| {
                let blocks: Vec<&CMatrix> = parts.iter().map(|r| &r.matrices[g]).collect();
                CMatrix::block_diag(&blocks)
            })
            .collect();
        let irrep_content = if parts.iter().all(|r| !r.irrep_content.is_empty()) {
            parts.iter().flat_map(|r| r.irrep_content.iter().copied()).collect()
        } else {
            Vec::new()
        };
        Ok(Self {
            group: first.group.clone(),
            dim: parts.iter().map(|r| r.dim).sum(),
            matrices,
            irrep_content,
        })
    }
}

/// Direct sum `⊕ Γ_p` over distinct labels, in the given order.
pub fn direct_sum_rep(group: Arc<GroupWithIrreps>, labels: &[usize]) -> Result<Representation> {
    if labels.is_empty() {
        return Err(Error::InvalidInput("direct sum needs at least one irrep".into()));
    }
    let mut seen = BTreeSet::new();
    let repeated: BTreeSet<usize> = labels.iter().copied().filter(|&l| !seen.insert(l)).collect();
    if !repeated.is_empty() {
        return Err(Error::RepeatedIrrep(repeated.into_iter().collect()));
    }
    let irreps = labels
        .iter()
        .map(|&l| group.irrep(l).ok_or_else(|| Error::InvalidInput(format!("unknown irrep label {l}"))))
        .collect::<Result<Vec<_>>>()?;
    let matrices = (0..group.order())
        .map(|g| {
            let blocks: Vec<&CMatrix> = irreps.iter().map(|r| &r.matrices[g]).collect();
            CMatrix::block_diag(&blocks)
        })
        .collect();
    Ok(Representation {
        dim: irreps.iter().map(|r| r.dim).sum(),
        group,
        matrices,
        irrep_content: labels.to_vec(),
    })
}

/// Elementwise Kronecker product `U₁(g) ⊗ U₂(g)`; irrep content is left unknown.
pub fn tensor_product_rep(r1: &Representation, r2: &Representation) -> Result<Representation> {
    if !r1.group.same_group(&r2.group) {
        return Err(Error::GroupMismatch);
    }
    let matrices = r1.matrices.iter().zip(&r2.matrices).map(|(a, b)| kron(a, b)).collect();
    Ok(Representation {
        group: r1.group.clone(),
        dim: r1.dim * r2.dim,
        matrices,
        irrep_content: Vec::new(),
    })
}
