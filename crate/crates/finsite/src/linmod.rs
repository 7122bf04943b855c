//! Modules over RG for small finite coefficient rings, module-valued
//! presheaves on the group sites, structure sheaves, and the verifier for
//! the linear half of the equivalence.
//!
//! Rings are F_p and Z/n, so every module value is a finite set and the
//! sheaf condition delegates, below a size cap, to the set-level checker.
//! Fixed submodules are kernels computed through an integer Smith normal
//! form, which covers prime and non-prime moduli uniformly.

use crate::fincat::{CatError, FinCat, Presheaf};
use crate::group::{FiniteGroup, GSet, GroupError, Subgroup};
use crate::grpsites::{BundleError, CatExtension};
use crate::sites::{is_sheaf, SheafCheckMode, Site, SiteError};
use crate::Budgets;
use serde::{Deserialize, Serialize};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModuleError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("modulus must be at least 2, got {0}")]
    BadModulus(u64),
    #[error("action table must assign one {rank}x{rank} matrix per group element")]
    BadActionShape { rank: usize },
    #[error("identity element does not act as the identity matrix")]
    IdentityNotIdentity,
    #[error("matrices do not respect the group law at ({g},{h})")]
    NotAGroupAction { g: usize, h: usize },
    #[error("matrix dimensions do not match: {rows}x{cols} expected {erows}x{ecols}")]
    BadDimensions { rows: usize, cols: usize, erows: usize, ecols: usize },
    #[error("value shape at object {object} has an invalid generator order {order}")]
    BadOrder { object: usize, order: u64 },
    #[error("restriction map for morphism {mor} is not well-defined modulo the generator orders")]
    MapNotWellDefined { mor: usize },
    #[error("restriction map for the identity of object {object} is not the identity")]
    MapNotIdentity { object: usize },
    #[error("module presheaf is not functorial at the pair ({f},{g})")]
    MapNotFunctorial { f: usize, g: usize },
    #[error("value set at object {object} has {size} elements, above the cap {cap}")]
    ValueCapExceeded { object: usize, size: u128, cap: u64 },
    #[error("value at object {object} is not free, which this operation requires")]
    ValueNotFree { object: usize },
    #[error("comparison bijection is not additive at morphism {mor}")]
    NotLinear { mor: usize },
    #[error("the matrix is not invertible over the ring")]
    NotInvertible,
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Cat(#[from] CatError),
    #[error(transparent)]
    Site(#[from] SiteError),
    #[error(transparent)]
    Bundle(#[from] Box<BundleError>),
}

impl ModuleError {
    pub fn is_budget(&self) -> bool {
        match self {
            ModuleError::Cat(CatError::Budget(_)) => true,
            ModuleError::Site(e) => e.is_budget(),
            ModuleError::Bundle(e) => e.is_budget(),
            _ => false,
        }
    }
}

/// A small commutative coefficient ring: a prime field or the integers
/// modulo n. Elements are residues 0..modulus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FiniteRing {
    PrimeField(u64),
    ModN(u64),
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

impl FiniteRing {
    pub fn prime_field(p: u64) -> Result<Self, ModuleError> {
        if !is_prime(p) {
            return Err(ModuleError::NotPrime(p));
        }
        Ok(FiniteRing::PrimeField(p))
    }

    pub fn mod_n(n: u64) -> Result<Self, ModuleError> {
        if n < 2 {
            return Err(ModuleError::BadModulus(n));
        }
        Ok(FiniteRing::ModN(n))
    }

    pub fn modulus(&self) -> u64 {
        match *self {
            FiniteRing::PrimeField(p) => p,
            FiniteRing::ModN(n) => n,
        }
    }

    pub fn is_field(&self) -> bool {
        matches!(self, FiniteRing::PrimeField(_))
    }

    pub fn add(&self, a: u64, b: u64) -> u64 {
        (a + b) % self.modulus()
    }

    pub fn neg(&self, a: u64) -> u64 {
        (self.modulus() - a % self.modulus()) % self.modulus()
    }

    pub fn mul(&self, a: u64, b: u64) -> u64 {
        (a * b) % self.modulus()
    }

    /// Multiplicative units of the ring.
    pub fn units(&self) -> Vec<u64> {
        let n = self.modulus();
        (1..n).filter(|&a| gcd(a as i128, n as i128) == 1).collect()
    }

    pub fn label(&self) -> String {
        match *self {
            FiniteRing::PrimeField(p) => format!("F{p}"),
            FiniteRing::ModN(n) => format!("Z/{n}"),
        }
    }
}

fn gcd(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Extended gcd: returns (g, x, y) with a x + b y = g.
fn egcd(a: i128, b: i128) -> (i128, i128, i128) {
    if b == 0 {
        let s = if a < 0 { -1 } else { 1 };
        return (a.abs(), s, 0);
    }
    let (g, x, y) = egcd(b, a % b);
    (g, y, x - (a / b) * y)
}

fn mod_inverse(a: i128, m: i128) -> Option<i128> {
    let (g, x, _) = egcd(a.rem_euclid(m), m);
    (g == 1).then(|| x.rem_euclid(m))
}

/// A dense matrix over a finite ring, row-major. Row vectors act on the
/// left: `v . M`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<u64>,
}

impl Mat {
    pub fn zero(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zero(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<u64>>, cols: usize) -> Self {
        let r = rows.len();
        let mut data = Vec::with_capacity(r * cols);
        for row in rows {
            assert_eq!(row.len(), cols);
            data.extend(row);
        }
        Mat { rows: r, cols, data }
    }

    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: u64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[u64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn mul(&self, other: &Mat, ring: &FiniteRing) -> Mat {
        assert_eq!(self.cols, other.rows);
        let n = ring.modulus();
        let mut out = Mat::zero(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                for j in 0..other.cols {
                    let cur = out.get(i, j);
                    out.set(i, j, (cur + a * other.get(k, j)) % n);
                }
            }
        }
        out
    }

    /// v . M for a row vector v.
    pub fn apply_row(&self, v: &[u64], ring: &FiniteRing) -> Vec<u64> {
        assert_eq!(v.len(), self.rows);
        let n = ring.modulus();
        let mut out = vec![0u64; self.cols];
        for (i, &a) in v.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for j in 0..self.cols {
                out[j] = (out[j] + a * self.get(i, j)) % n;
            }
        }
        out
    }

    pub fn is_identity(&self, ring: &FiniteRing) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| {
                (0..self.cols).all(|j| self.get(i, j) % ring.modulus() == u64::from(i == j))
            })
    }
}

// ---------------------------------------------------------------------------
// Integer Smith normal form. S = U * A * V with U, V unimodular. Matrices
// here are tiny (rank <= |G|), so entry growth is not a concern at i128.
// ---------------------------------------------------------------------------

struct Snf {
    u: Vec<Vec<i128>>,
    s: Vec<Vec<i128>>,
    v: Vec<Vec<i128>>,
}

fn smith(mut a: Vec<Vec<i128>>) -> Snf {
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    let mut u: Vec<Vec<i128>> = (0..rows).map(|i| (0..rows).map(|j| i128::from(i == j)).collect()).collect();
    let mut v: Vec<Vec<i128>> = (0..cols).map(|i| (0..cols).map(|j| i128::from(i == j)).collect()).collect();
    let mut k = 0;
    while k < rows.min(cols) {
        // pivot: smallest nonzero absolute value in the remaining block
        let mut pivot: Option<(usize, usize)> = None;
        for i in k..rows {
            for j in k..cols {
                if a[i][j] != 0 && pivot.map_or(true, |(pi, pj)| a[i][j].abs() < a[pi][pj].abs()) {
                    pivot = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = pivot else { break };
        a.swap(k, pi);
        u.swap(k, pi);
        for row in a.iter_mut() {
            row.swap(k, pj);
        }
        for row in v.iter_mut() {
            row.swap(k, pj);
        }
        // eliminate below and to the right of the pivot
        let mut dirty = false;
        for i in k + 1..rows {
            if a[i][k] != 0 {
                let q = a[i][k].div_euclid(a[k][k]);
                for j in 0..cols {
                    a[i][j] -= q * a[k][j];
                }
                for j in 0..rows {
                    u[i][j] -= q * u[k][j];
                }
                if a[i][k] != 0 {
                    dirty = true;
                }
            }
        }
        for j in k + 1..cols {
            if a[k][j] != 0 {
                let q = a[k][j].div_euclid(a[k][k]);
                for row in a.iter_mut() {
                    row[j] -= q * row[k];
                }
                for row in v.iter_mut() {
                    row[j] -= q * row[k];
                }
                if a[k][j] != 0 {
                    dirty = true;
                }
            }
        }
        if dirty {
            continue;
        }
        // enforce divisibility of the rest of the block by the pivot
        let mut fixed = true;
        'scan: for i in k + 1..rows {
            for j in k + 1..cols {
                if a[i][j] % a[k][k] != 0 {
                    for jj in 0..cols {
                        a[k][jj] += a[i][jj];
                    }
                    for jj in 0..rows {
                        u[k][jj] += u[i][jj];
                    }
                    fixed = false;
                    break 'scan;
                }
            }
        }
        if !fixed {
            continue;
        }
        if a[k][k] < 0 {
            for j in 0..cols {
                a[k][j] = -a[k][j];
            }
            for j in 0..rows {
                u[k][j] = -u[k][j];
            }
        }
        k += 1;
    }
    Snf { u, s: a, v }
}

/// Generators of {v : v A = 0 (mod n)} as rows, with the additive order of
/// each generator. The coordinates-to-element map is a bijection from
/// products of Z/order onto the solution submodule.
fn left_kernel_mod(a: &[Vec<i128>], rows: usize, n: u64) -> (Vec<Vec<u64>>, Vec<u64>) {
    let n_i = n as i128;
    if a.is_empty() || a[0].is_empty() {
        // no constraints: the whole space
        let gens = (0..rows)
            .map(|i| (0..rows).map(|j| u64::from(i == j)).collect())
            .collect();
        return (gens, vec![n; rows]);
    }
    let snf = smith(a.to_vec());
    let cols = a[0].len();
    let mut gens = Vec::new();
    let mut orders = Vec::new();
    for i in 0..rows {
        let s = if i < rows.min(cols) { snf.s[i][i] } else { 0 };
        // gcd(0, n) = n, covering the rows past the diagonal rank
        let d = gcd(s, n_i);
        if d <= 1 {
            continue;
        }
        let scale = n_i / d;
        let row: Vec<u64> = (0..rows).map(|j| ((scale * snf.u[i][j]).rem_euclid(n_i)) as u64).collect();
        gens.push(row);
        orders.push(d as u64);
    }
    (gens, orders)
}

/// Solves c E = w (mod n) for a row vector c, if possible.
fn solve_in_span(e: &[Vec<u64>], w: &[u64], n: u64) -> Option<Vec<u64>> {
    let k = e.len();
    let n_i = n as i128;
    if k == 0 {
        return w.iter().all(|&x| x % n == 0).then(Vec::new);
    }
    let d = e[0].len();
    let lifted: Vec<Vec<i128>> = e.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let snf = smith(lifted);
    // z S = w V (mod n), c = z U
    let wv: Vec<i128> = (0..d)
        .map(|j| (0..d).map(|i| (w[i] as i128) * snf.v[i][j]).sum::<i128>().rem_euclid(n_i))
        .collect();
    let mut z = vec![0i128; k];
    for j in 0..d {
        let s = if j < k.min(d) { snf.s[j][j] } else { 0 };
        if s == 0 {
            if wv[j] % n_i != 0 {
                return None;
            }
            continue;
        }
        let g = gcd(s, n_i);
        if wv[j] % g != 0 {
            return None;
        }
        let m = n_i / g;
        let inv = mod_inverse((s / g).rem_euclid(m), m)?;
        z[j] = ((wv[j] / g).rem_euclid(m) * inv).rem_euclid(m);
    }
    let c: Vec<u64> = (0..k)
        .map(|j| (0..k).map(|i| z[i] * snf.u[i][j]).sum::<i128>().rem_euclid(n_i) as u64)
        .collect();
    Some(c)
}

/// Whether `w` lies in the row span of `e` modulo n.
fn in_span(e: &[Vec<u64>], w: &[u64], n: u64) -> bool {
    solve_in_span(e, w, n).is_some()
}

/// A right RG-module on a free carrier: one matrix per group element, with
/// matrix(g h) = matrix(g) matrix(h).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RGModule {
    ring: FiniteRing,
    rank: usize,
    action: Vec<Mat>,
}

impl RGModule {
    pub fn new(ring: FiniteRing, group: &FiniteGroup, rank: usize, action: Vec<Mat>) -> Result<Self, ModuleError> {
        if action.len() != group.order() {
            return Err(ModuleError::BadActionShape { rank });
        }
        for m in &action {
            if m.rows != rank || m.cols != rank {
                return Err(ModuleError::BadDimensions { rows: m.rows, cols: m.cols, erows: rank, ecols: rank });
            }
        }
        let action: Vec<Mat> = action.iter().map(|m| normalize(m, &ring)).collect();
        if !action[group.identity()].is_identity(&ring) {
            return Err(ModuleError::IdentityNotIdentity);
        }
        for g in group.elements() {
            for h in group.elements() {
                let gh = group.mul(g, h);
                if action[g].mul(&action[h], &ring) != action[gh] {
                    return Err(ModuleError::NotAGroupAction { g, h });
                }
            }
        }
        Ok(RGModule { ring, rank, action })
    }

    pub fn zero(ring: FiniteRing, group: &FiniteGroup) -> Self {
        RGModule { ring, rank: 0, action: vec![Mat::zero(0, 0); group.order()] }
    }

    pub fn trivial(ring: FiniteRing, group: &FiniteGroup) -> Self {
        RGModule { ring, rank: 1, action: vec![Mat::identity(1); group.order()] }
    }

    /// Permutation module on a G-set: basis vectors are carrier points.
    pub fn permutation(ring: FiniteRing, group: &FiniteGroup, m: &GSet) -> Self {
        let rank = m.size();
        let action = group
            .elements()
            .map(|g| {
                let mut mat = Mat::zero(rank, rank);
                for x in 0..rank {
                    mat.set(x, m.apply(x, g), 1);
                }
                mat
            })
            .collect();
        RGModule { ring, rank, action }
    }

    pub fn regular(ring: FiniteRing, group: &FiniteGroup) -> Self {
        Self::permutation(ring, group, &GSet::regular(group))
    }

    /// One-dimensional module from a multiplicative character.
    pub fn character(ring: FiniteRing, group: &FiniteGroup, values: Vec<u64>) -> Result<Self, ModuleError> {
        let action: Vec<Mat> =
            values.iter().map(|&v| Mat { rows: 1, cols: 1, data: vec![v % ring.modulus()] }).collect();
        Self::new(ring, group, 1, action)
    }

    pub fn direct_sum(&self, other: &RGModule, group: &FiniteGroup) -> RGModule {
        assert_eq!(self.ring, other.ring);
        let rank = self.rank + other.rank;
        let action = group
            .elements()
            .map(|g| {
                let mut m = Mat::zero(rank, rank);
                for i in 0..self.rank {
                    for j in 0..self.rank {
                        m.set(i, j, self.action[g].get(i, j));
                    }
                }
                for i in 0..other.rank {
                    for j in 0..other.rank {
                        m.set(self.rank + i, self.rank + j, other.action[g].get(i, j));
                    }
                }
                m
            })
            .collect();
        RGModule { ring: self.ring, rank, action }
    }

    /// Base change by an invertible matrix: g acts by Q matrix(g) Q^-1.
    pub fn conjugate(&self, group: &FiniteGroup, q: &Mat, q_inv: &Mat) -> Result<RGModule, ModuleError> {
        if !q.mul(q_inv, &self.ring).is_identity(&self.ring) {
            return Err(ModuleError::NotInvertible);
        }
        let action = group
            .elements()
            .map(|g| q.mul(&self.action[g], &self.ring).mul(q_inv, &self.ring))
            .collect();
        Ok(RGModule { ring: self.ring, rank: self.rank, action })
    }

    pub fn ring(&self) -> FiniteRing {
        self.ring
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn matrix(&self, g: usize) -> &Mat {
        &self.action[g]
    }
}

fn normalize(m: &Mat, ring: &FiniteRing) -> Mat {
    Mat { rows: m.rows, cols: m.cols, data: m.data.iter().map(|&x| x % ring.modulus()).collect() }
}

/// All one-dimensional characters G -> units(R), by exhaustive search over
/// value assignments (the search space is |units|^|G|, which is tiny for the
/// rings used here).
pub fn all_characters(ring: FiniteRing, group: &FiniteGroup) -> Vec<RGModule> {
    let units = ring.units();
    let n = group.order();
    let mut out = Vec::new();
    let mut values = vec![0u64; n];
    fn rec(
        ring: FiniteRing,
        group: &FiniteGroup,
        units: &[u64],
        values: &mut Vec<u64>,
        next: usize,
        out: &mut Vec<RGModule>,
    ) {
        let n = group.order();
        if next == n {
            if let Ok(m) = RGModule::character(ring, group, values.clone()) {
                out.push(m);
            }
            return;
        }
        if next == group.identity() {
            values[next] = 1;
            rec(ring, group, units, values, next + 1, out);
            return;
        }
        for &u in units {
            values[next] = u;
            // prune: products with already-assigned elements must agree
            let consistent = (0..next).all(|g| {
                let gh = group.mul(g, next);
                gh >= next || values[gh] == ring.mul(values[g], values[next])
            }) && (0..next).all(|g| {
                let hg = group.mul(next, g);
                hg >= next || values[hg] == ring.mul(values[next], values[g])
            });
            if consistent {
                rec(ring, group, units, values, next + 1, out);
            }
        }
    }
    rec(ring, group, &units, &mut values, 0, &mut out);
    out
}

/// A fixed submodule presented by generator rows in the ambient coordinates
/// and the additive order of each generator. Coordinates modulo the orders
/// biject onto the submodule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixedModule {
    pub generators: Vec<Vec<u64>>,
    pub orders: Vec<u64>,
}

impl FixedModule {
    /// Number of generators; over a field this is the dimension.
    pub fn rank(&self) -> usize {
        self.generators.len()
    }

    pub fn cardinality(&self) -> u128 {
        self.orders.iter().map(|&o| o as u128).product()
    }
}

/// The solution space of { v : v (matrix(h) - I) = 0 for all h in H }.
pub fn fixed_submodule(m: &RGModule, group: &FiniteGroup, h: &Subgroup) -> FixedModule {
    let n = m.ring().modulus();
    let d = m.rank();
    let others: Vec<usize> = h.members().iter().copied().filter(|&x| x != group.identity()).collect();
    if others.is_empty() || d == 0 {
        let (generators, orders) = left_kernel_mod(&[], d, n);
        return FixedModule { generators, orders };
    }
    // stack (matrix(h) - I) horizontally
    let cols = d * others.len();
    let mut a = vec![vec![0i128; cols]; d];
    for (bi, &g) in others.iter().enumerate() {
        let mat = m.matrix(g);
        for i in 0..d {
            for j in 0..d {
                let mut v = mat.get(i, j) as i128;
                if i == j {
                    v -= 1;
                }
                a[i][bi * d + j] = v;
            }
        }
    }
    let (generators, orders) = left_kernel_mod(&a, d, n);
    FixedModule { generators, orders }
}

/// A presheaf of finite R-modules: per object a finite module presented as a
/// direct sum of cyclic groups Z/order (order = modulus means a free
/// generator), per morphism an R-linear map in generator coordinates. The
/// structure-sheaf action is plain scalar multiplication, which every value
/// carries by construction.
#[derive(Debug, Clone)]
pub struct ModulePresheaf {
    cat: Arc<FinCat>,
    ring: FiniteRing,
    shapes: Vec<Vec<u64>>,
    maps: Vec<Mat>,
}

impl ModulePresheaf {
    pub fn new(
        cat: Arc<FinCat>,
        ring: FiniteRing,
        shapes: Vec<Vec<u64>>,
        maps: Vec<Mat>,
    ) -> Result<Self, ModuleError> {
        let n = ring.modulus();
        for (object, shape) in shapes.iter().enumerate() {
            for &o in shape {
                if o < 2 || n % o != 0 {
                    return Err(ModuleError::BadOrder { object, order: o });
                }
            }
        }
        if maps.len() != cat.n_morphisms() || shapes.len() != cat.n_objects() {
            return Err(ModuleError::BadDimensions { rows: maps.len(), cols: shapes.len(), erows: cat.n_morphisms(), ecols: cat.n_objects() });
        }
        let f = ModulePresheaf { cat: cat.clone(), ring, shapes, maps };
        for mor in 0..cat.n_morphisms() {
            let (src, dst) = (f.shape(cat.cod(mor)), f.shape(cat.dom(mor)));
            let m = &f.maps[mor];
            if m.rows != src.len() || m.cols != dst.len() {
                return Err(ModuleError::BadDimensions { rows: m.rows, cols: m.cols, erows: src.len(), ecols: dst.len() });
            }
            // o_i * T_ij must vanish modulo the target order
            for i in 0..src.len() {
                for j in 0..dst.len() {
                    if (src[i] * m.get(i, j)) % dst[j] != 0 {
                        return Err(ModuleError::MapNotWellDefined { mor });
                    }
                }
            }
        }
        for x in 0..cat.n_objects() {
            let id = cat.identity(x);
            let shape = f.shape(x);
            for i in 0..shape.len() {
                for j in 0..shape.len() {
                    let expected = u64::from(i == j);
                    if f.maps[id].get(i, j) % shape[j] != expected % shape[j] {
                        return Err(ModuleError::MapNotIdentity { object: x });
                    }
                }
            }
        }
        for a in 0..cat.n_morphisms() {
            for &b in cat.morphisms_into(cat.dom(a)) {
                let ab = cat.compose(a, b).expect("composable");
                // value maps: first F(a), then F(b)
                let composite = f.maps[a].mul(&f.maps[b], &ring);
                let direct = &f.maps[ab];
                let dst = f.shape(cat.dom(b));
                for i in 0..composite.rows {
                    for j in 0..composite.cols {
                        if composite.get(i, j) % dst[j] != direct.get(i, j) % dst[j] {
                            return Err(ModuleError::MapNotFunctorial { f: a, g: b });
                        }
                    }
                }
            }
        }
        Ok(f)
    }

    pub fn cat(&self) -> &Arc<FinCat> {
        &self.cat
    }

    pub fn ring(&self) -> FiniteRing {
        self.ring
    }

    pub fn shape(&self, x: usize) -> &[u64] {
        &self.shapes[x]
    }

    pub fn map(&self, mor: usize) -> &Mat {
        &self.maps[mor]
    }

    /// Constant free presheaf of a given rank with identity maps.
    pub fn constant_free(cat: Arc<FinCat>, ring: FiniteRing, rank: usize) -> Self {
        let n = ring.modulus();
        let shapes = vec![vec![n; rank]; cat.n_objects()];
        let maps = (0..cat.n_morphisms()).map(|_| Mat::identity(rank)).collect();
        ModulePresheaf { cat, ring, shapes, maps }
    }

    pub fn value_cardinality(&self, x: usize) -> u128 {
        self.shapes[x].iter().map(|&o| o as u128).product()
    }

    fn reduce(&self, x: usize, v: &mut [u64]) {
        for (c, &o) in v.iter_mut().zip(self.shape(x)) {
            *c %= o;
        }
    }

    fn encode(&self, x: usize, v: &[u64]) -> usize {
        let mut idx = 0usize;
        let mut stride = 1usize;
        for (&c, &o) in v.iter().zip(self.shape(x)) {
            idx += (c as usize) * stride;
            stride *= o as usize;
        }
        idx
    }

    fn decode(&self, x: usize, mut idx: usize) -> Vec<u64> {
        self.shape(x)
            .iter()
            .map(|&o| {
                let c = (idx % o as usize) as u64;
                idx /= o as usize;
                c
            })
            .collect()
    }

    fn tuple_add(&self, x: usize, a: &[u64], b: &[u64]) -> Vec<u64> {
        a.iter().zip(b).zip(self.shape(x)).map(|((&p, &q), &o)| (p + q) % o).collect()
    }

    /// Materializes the underlying presheaf of finite sets. Fails above the
    /// value cap.
    pub fn to_set_presheaf(&self, budgets: &Budgets) -> Result<Presheaf, ModuleError> {
        for x in 0..self.cat.n_objects() {
            let size = self.value_cardinality(x);
            if size > budgets.value_cap as u128 {
                return Err(ModuleError::ValueCapExceeded { object: x, size, cap: budgets.value_cap });
            }
        }
        let sizes: Vec<usize> = (0..self.cat.n_objects()).map(|x| self.value_cardinality(x) as usize).collect();
        let maps: Vec<Vec<usize>> = (0..self.cat.n_morphisms())
            .map(|mor| {
                let (x, y) = (self.cat.dom(mor), self.cat.cod(mor));
                (0..sizes[y])
                    .map(|idx| {
                        let v = self.decode(y, idx);
                        let mut w = self.maps[mor].apply_row(&v, &self.ring);
                        self.reduce(x, &mut w);
                        self.encode(x, &w)
                    })
                    .collect()
            })
            .collect();
        Ok(Presheaf::new(self.cat.clone(), sizes, maps)?)
    }
}

/// A sheaf of rings used as the structure sheaf of a ringed site: the
/// constant rank-one free presheaf, validated to satisfy the sheaf
/// condition on the given site.
pub struct StructureSheaf {
    pub presheaf: ModulePresheaf,
}

impl StructureSheaf {
    pub fn new(site: &Site, ring: FiniteRing, budgets: &Budgets) -> Result<Self, ModuleError> {
        let presheaf = ModulePresheaf::constant_free(site.cat().clone(), ring, 1);
        let sets = presheaf.to_set_presheaf(budgets)?;
        let report = is_sheaf(&sets, site, SheafCheckMode::Auto, budgets)?;
        if !report.is_sheaf {
            return Err(ModuleError::Site(SiteError::SheafificationFailed {
                object: report.witness.map(|w| w.object).unwrap_or(0),
            }));
        }
        Ok(StructureSheaf { presheaf })
    }
}

/// The fixed-point module sheaf of an RG-module with its per-object
/// embeddings back into the ambient module.
pub struct ModuleSheaf {
    pub presheaf: ModulePresheaf,
    /// Per object: generator rows in ambient coordinates.
    pub embeddings: Vec<FixedModule>,
}

/// x maps to M^{K(x)}, with restriction maps induced by the module action of
/// coset representatives.
pub fn module_fixed_point_sheaf(m: &RGModule, ext: &CatExtension) -> Result<ModuleSheaf, ModuleError> {
    let group = ext.transporter.group();
    let ring = m.ring();
    let n = ring.modulus();
    let cat = ext.cat().clone();
    let embeddings: Vec<FixedModule> = (0..cat.n_objects())
        .map(|x| {
            let k = Subgroup::new(group, ext.kernels()[x].to_vec())?;
            Ok(fixed_submodule(m, group, &k))
        })
        .collect::<Result<_, ModuleError>>()?;
    let shapes: Vec<Vec<u64>> = embeddings.iter().map(|e| e.orders.clone()).collect();
    let maps: Vec<Mat> = (0..cat.n_morphisms())
        .map(|mor| {
            let (x, y, ref coset) = *ext.decode(mor);
            let g = coset[0];
            let rows: Vec<Vec<u64>> = embeddings[y]
                .generators
                .iter()
                .map(|gen| {
                    let image = m.matrix(g).apply_row(gen, &ring);
                    solve_in_span(&embeddings[x].generators, &image, n)
                        .expect("restriction of a fixed vector is fixed")
                })
                .collect();
            Mat::from_rows(rows, embeddings[x].generators.len())
        })
        .collect();
    let presheaf = ModulePresheaf::new(cat, ring, shapes, maps)?;
    Ok(ModuleSheaf { presheaf, embeddings })
}

/// Extracts the RG-module structure carried by the value at the initial
/// object, which must be free with a trivial kernel.
pub fn module_at_x0(f: &ModulePresheaf, ext: &CatExtension) -> Result<RGModule, ModuleError> {
    let x0 = ext.initial_object().ok_or_else(|| ModuleError::Bundle(Box::new(BundleError::NoInitialObject)))?;
    if ext.kernels()[x0].len() != 1 {
        return Err(ModuleError::Bundle(Box::new(BundleError::KernelAtInitialNotTrivial)));
    }
    let n = f.ring().modulus();
    if f.shape(x0).iter().any(|&o| o != n) {
        return Err(ModuleError::ValueNotFree { object: x0 });
    }
    let group = ext.transporter.group();
    let action: Vec<Mat> = group
        .elements()
        .map(|g| {
            let mor = ext.morphism(x0, x0, g).expect("initial object is fixed");
            f.map(mor).clone()
        })
        .collect();
    RGModule::new(f.ring(), group, f.shape(x0).len(), action)
}

#[derive(Debug, Clone, Serialize)]
pub struct ModuleSheafReport {
    pub is_sheaf: bool,
    pub witness: Option<String>,
    pub used_linear_fallback: bool,
}

/// Sheaf test for a module presheaf: materializes the underlying sets and
/// delegates to the set-level checker, additionally asserting the comparison
/// bijections are additive. Above the value cap it falls back to a linear
/// criterion on sites with unique minimal covers: the canonical map from
/// F(x) into the kernel-fixed part of F(x0) must be an isomorphism.
pub fn is_module_sheaf(
    f: &ModulePresheaf,
    site: &Site,
    ext: Option<&CatExtension>,
    budgets: &Budgets,
) -> Result<ModuleSheafReport, ModuleError> {
    match f.to_set_presheaf(budgets) {
        Ok(sets) => {
            // additivity of restriction maps at the set level: materialized
            // maps must commute with tuple addition
            for mor in 0..f.cat().n_morphisms() {
                let y = f.cat().cod(mor);
                let size = sets.size(y);
                for a in 0..size.min(32) {
                    for b in 0..size.min(32) {
                        let va = f.decode(y, a);
                        let vb = f.decode(y, b);
                        let sum = f.encode(y, &f.tuple_add(y, &va, &vb));
                        let x = f.cat().dom(mor);
                        let lhs = sets.apply(mor, sum);
                        let rhs = f.encode(
                            x,
                            &f.tuple_add(
                                x,
                                &f.decode(x, sets.apply(mor, a)),
                                &f.decode(x, sets.apply(mor, b)),
                            ),
                        );
                        if lhs != rhs {
                            return Err(ModuleError::NotLinear { mor });
                        }
                    }
                }
            }
            let report = is_sheaf(&sets, site, SheafCheckMode::Auto, budgets)?;
            Ok(ModuleSheafReport {
                is_sheaf: report.is_sheaf,
                witness: report.witness.map(|w| format!("object {} fails: {:?}", w.object, w.failure)),
                used_linear_fallback: false,
            })
        }
        Err(e @ ModuleError::ValueCapExceeded { .. }) => match ext {
            Some(ext) => linear_sheaf_criterion(f, ext),
            None => Err(e),
        },
        Err(e) => Err(e),
    }
}

fn linear_sheaf_criterion(f: &ModulePresheaf, ext: &CatExtension) -> Result<ModuleSheafReport, ModuleError> {
    let x0 = ext.initial_object().ok_or_else(|| ModuleError::Bundle(Box::new(BundleError::NoInitialObject)))?;
    let n = f.ring().modulus();
    if f.shape(x0).iter().any(|&o| o != n) {
        return Err(ModuleError::ValueNotFree { object: x0 });
    }
    let m0 = module_at_x0(f, ext)?;
    let group = ext.transporter.group();
    for x in 0..f.cat().n_objects() {
        let e = group.identity();
        let mor = ext.morphism(x0, x, e).expect("initial object maps everywhere");
        let t = f.map(mor);
        // injectivity of the value map
        if !value_map_injective(f, x, x0, t) {
            return Ok(ModuleSheafReport {
                is_sheaf: false,
                witness: Some(format!("canonical map at object {x} is not injective")),
                used_linear_fallback: true,
            });
        }
        // image must equal the kernel-fixed submodule of the value at x0
        let k = Subgroup::new(group, ext.kernels()[x].to_vec())?;
        let fixed = fixed_submodule(&m0, group, &k);
        let image_rows: Vec<Vec<u64>> = (0..f.shape(x).len()).map(|i| t.row(i).to_vec()).collect();
        let image_ok = image_rows.iter().all(|r| in_span(&fixed.generators, r, n))
            && fixed.generators.iter().all(|r| in_span(&image_rows, r, n));
        let sizes_match = f.value_cardinality(x) == fixed.cardinality();
        if !(image_ok && sizes_match) {
            return Ok(ModuleSheafReport {
                is_sheaf: false,
                witness: Some(format!("canonical image at object {x} is not the fixed submodule")),
                used_linear_fallback: true,
            });
        }
    }
    Ok(ModuleSheafReport { is_sheaf: true, witness: None, used_linear_fallback: true })
}

/// Whether the value map given by `t` from the value at `src` to the value
/// at `dst` has trivial kernel.
fn value_map_injective(f: &ModulePresheaf, src: usize, dst: usize, t: &Mat) -> bool {
    let n = f.ring().modulus() as i128;
    let src_shape = f.shape(src);
    let dst_shape = f.shape(dst);
    let k = src_shape.len();
    let j = dst_shape.len();
    if k == 0 {
        return true;
    }
    // kernel of the value map: c T + y diag(dst orders) = 0; stack and take
    // the left kernel, then project onto the c block
    let rows = k + j;
    let mut a = vec![vec![0i128; j]; rows];
    for i in 0..k {
        for c in 0..j {
            a[i][c] = t.get(i, c) as i128;
        }
    }
    for i in 0..j {
        a[k + i][i] = dst_shape[i] as i128;
    }
    let (gens, _) = left_kernel_mod(&a, rows, n as u64);
    gens.iter().all(|g| g[..k].iter().zip(src_shape).all(|(&c, &o)| c % o == 0))
}

/// A natural R-linear isomorphism between two module presheaves on the same
/// quotient site, constructed through the canonical maps to the initial
/// object. Returns None when the presheaves are not isomorphic this way.
pub fn module_sheaf_isomorphism(
    f: &ModulePresheaf,
    g: &ModuleSheaf,
    ext: &CatExtension,
) -> Result<Option<Vec<Mat>>, ModuleError> {
    let n = f.ring().modulus();
    let x0 = ext.initial_object().ok_or_else(|| ModuleError::Bundle(Box::new(BundleError::NoInitialObject)))?;
    let group = ext.transporter.group();
    let e = group.identity();
    let cat = f.cat();
    let mut components = Vec::with_capacity(cat.n_objects());
    for x in 0..cat.n_objects() {
        if f.value_cardinality(x) != g.presheaf.value_cardinality(x) {
            return Ok(None);
        }
        let mor = ext.morphism(x0, x, e).expect("initial object maps everywhere");
        let t = f.map(mor);
        // component rows: express each f-generator's image inside the
        // embedded fixed submodule of g
        let mut rows = Vec::with_capacity(f.shape(x).len());
        for i in 0..f.shape(x).len() {
            let w = t.row(i);
            let Some(c) = solve_in_span(&g.embeddings[x].generators, w, n) else {
                return Ok(None);
            };
            rows.push(c);
        }
        components.push(Mat::from_rows(rows, g.presheaf.shape(x).len()));
    }
    // verify each component is injective (hence bijective by cardinality)
    for x in 0..cat.n_objects() {
        let comp = &components[x];
        if !value_map_injective_between(f.shape(x), g.presheaf.shape(x), comp, n) {
            return Ok(None);
        }
    }
    // naturality: F(u) then phi_dom equals phi_cod then G(u)
    for u in 0..cat.n_morphisms() {
        let (x, y) = (cat.dom(u), cat.cod(u));
        let lhs = f.map(u).mul(&components[x], &f.ring());
        let rhs = components[y].mul(g.presheaf.map(u), &f.ring());
        let dst = g.presheaf.shape(x);
        for i in 0..lhs.rows {
            for j in 0..lhs.cols {
                if lhs.get(i, j) % dst[j] != rhs.get(i, j) % dst[j] {
                    return Ok(None);
                }
            }
        }
    }
    Ok(Some(components))
}

fn value_map_injective_between(src: &[u64], dst: &[u64], t: &Mat, n: u64) -> bool {
    let k = src.len();
    let j = dst.len();
    if k == 0 {
        return true;
    }
    let rows = k + j;
    let mut a = vec![vec![0i128; j]; rows];
    for i in 0..k {
        for c in 0..j {
            a[i][c] = t.get(i, c) as i128;
        }
    }
    for i in 0..j {
        a[k + i][i] = dst[i] as i128;
    }
    let (gens, _) = left_kernel_mod(&a, rows, n);
    gens.iter().all(|g| g[..k].iter().zip(src).all(|(&c, &o)| c % o == 0))
}

#[derive(Debug, Clone, Serialize)]
pub struct ModuleCase {
    pub name: String,
    pub rank: usize,
    pub image_is_sheaf: bool,
    pub roundtrip_ok: bool,
    pub resheaf_ok: bool,
    pub value_ranks: Vec<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ModuleEquivReport {
    pub passed: bool,
    pub seed: u64,
    pub ring: String,
    pub rank_bound: usize,
    pub cases: Vec<ModuleCase>,
}

/// Verifies the module-level equivalence on a corpus of RG-modules: the
/// fixed-point module sheaf of each corpus module is a module sheaf, the
/// value at the initial object recovers the module by an explicit
/// equivariant isomorphism, and rebuilding the sheaf from that value gives
/// a naturally isomorphic module presheaf.
pub fn verify_module_equivalence(
    bundle: &crate::grpsites::GroupSiteBundle,
    ring: FiniteRing,
    rank_bound: usize,
    seed: u64,
    budgets: &Budgets,
) -> Result<ModuleEquivReport, ModuleError> {
    use rand::{Rng, SeedableRng};
    let group = &bundle.group;
    let ext = &bundle.extension;
    let mut corpus: Vec<(String, RGModule)> = vec![
        ("zero".into(), RGModule::zero(ring, group)),
        ("trivial".into(), RGModule::trivial(ring, group)),
    ];
    for (i, chi) in all_characters(ring, group).into_iter().enumerate() {
        corpus.push((format!("character-{i}"), chi));
    }
    for h in crate::grpsites::subgroup_classes(group) {
        let m = crate::group::coset_gset(group, &h);
        if m.size() <= rank_bound {
            corpus.push((format!("permutation-{:?}", h.members()), RGModule::permutation(ring, group, &m)));
        }
    }
    // seeded random base changes of permutation modules
    let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
    let classes = crate::grpsites::subgroup_classes(group);
    for i in 0..4 {
        let h = &classes[rng.random_range(0..classes.len())];
        let m = crate::group::coset_gset(group, h);
        if m.size() == 0 || m.size() > rank_bound {
            continue;
        }
        let base = RGModule::permutation(ring, group, &m);
        let (q, q_inv) = random_invertible(ring, m.size(), &mut rng);
        corpus.push((format!("conjugated-{i}"), base.conjugate(group, &q, &q_inv)?));
    }
    let mut cases = Vec::new();
    for (name, m) in corpus {
        if m.rank() > rank_bound {
            continue;
        }
        let sheaf = module_fixed_point_sheaf(&m, ext)?;
        let sheaf_report = is_module_sheaf(&sheaf.presheaf, &bundle.site_c, Some(ext), budgets)?;
        // roundtrip: the value at the initial object with its automorphism
        // action is the original module, up to the explicit embedding
        let roundtrip_ok = {
            let x0 = bundle.x0;
            let free = sheaf.presheaf.shape(x0).iter().all(|&o| o == ring.modulus());
            let emb = &sheaf.embeddings[x0];
            let square = emb.generators.len() == m.rank();
            if free && square {
                let recovered = module_at_x0(&sheaf.presheaf, ext)?;
                let e_mat = Mat::from_rows(emb.generators.clone(), m.rank());
                // intertwining: T_g E = E rho(g), and E invertible
                let invertible = (0..m.rank()).all(|i| {
                    let unit_row: Vec<u64> = (0..m.rank()).map(|j| u64::from(i == j)).collect();
                    solve_in_span(&emb.generators, &unit_row, ring.modulus()).is_some()
                });
                invertible
                    && group.elements().all(|g| {
                        let lhs = recovered.matrix(g).mul(&e_mat, &ring);
                        let rhs = e_mat.mul(m.matrix(g), &ring);
                        lhs == rhs
                    })
            } else {
                false
            }
        };
        // rebuild from the recovered module and compare naturally
        let resheaf_ok = {
            let recovered = module_at_x0(&sheaf.presheaf, ext)?;
            let rebuilt = module_fixed_point_sheaf(&recovered, ext)?;
            module_sheaf_isomorphism(&sheaf.presheaf, &rebuilt, ext)?.is_some()
        };
        let value_ranks = (0..sheaf.presheaf.cat().n_objects())
            .map(|x| sheaf.embeddings[x].rank())
            .collect();
        cases.push(ModuleCase {
            name,
            rank: m.rank(),
            image_is_sheaf: sheaf_report.is_sheaf,
            roundtrip_ok,
            resheaf_ok,
            value_ranks,
        });
    }
    let passed = cases.iter().all(|c| c.image_is_sheaf && c.roundtrip_ok && c.resheaf_ok);
    Ok(ModuleEquivReport { passed, seed, ring: ring.label(), rank_bound, cases })
}

/// Random invertible matrix with its inverse: a product of elementary
/// operations, each trivially invertible.
pub fn random_invertible(ring: FiniteRing, n: usize, rng: &mut impl rand::Rng) -> (Mat, Mat) {
    let mut q = Mat::identity(n);
    let mut q_inv = Mat::identity(n);
    if n == 0 {
        return (q, q_inv);
    }
    for _ in 0..(2 * n + 2) {
        let i = rng.random_range(0..n);
        let j = rng.random_range(0..n);
        if i == j {
            continue;
        }
        let c = rng.random_range(0..ring.modulus());
        // q := E q where E adds c * row j to row i; q_inv := q_inv E^{-1}
        for col in 0..n {
            let v = (q.get(i, col) + c * q.get(j, col)) % ring.modulus();
            q.set(i, col, v);
        }
        for row in 0..n {
            let v = (q_inv.get(row, j) + (ring.modulus() - c % ring.modulus()) % ring.modulus() * q_inv.get(row, i)) % ring.modulus();
            q_inv.set(row, j, v);
        }
    }
    (q, q_inv)
}

/// Per-object generator counts and orders: at this scale every value is
/// finitely generated, so the report documents the generating data rather
/// than flagging anything.
#[derive(Debug, Clone, Serialize)]
pub struct CoherentReport {
    pub generator_counts: Vec<usize>,
    pub orders: Vec<Vec<u64>>,
}

pub fn coherent_check(f: &ModulePresheaf) -> CoherentReport {
    CoherentReport {
        generator_counts: (0..f.cat().n_objects()).map(|x| f.shape(x).len()).collect(),
        orders: (0..f.cat().n_objects()).map(|x| f.shape(x).to_vec()).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{coset_gset, enumerate_subgroups};
    use crate::grpsites::{GroupSiteBundle, PosetKind, QuotientKind};

    fn f2() -> FiniteRing {
        FiniteRing::prime_field(2).unwrap()
    }

    fn f3() -> FiniteRing {
        FiniteRing::prime_field(3).unwrap()
    }

    fn z4() -> FiniteRing {
        FiniteRing::mod_n(4).unwrap()
    }

    fn z2_bundle() -> GroupSiteBundle {
        GroupSiteBundle::build(&FiniteGroup::cyclic(2), PosetKind::AllSubgroups, QuotientKind::Orbit)
            .unwrap()
    }

    #[test]
    fn ring_constructors_validate() {
        assert!(FiniteRing::prime_field(4).is_err());
        assert!(FiniteRing::mod_n(1).is_err());
        assert_eq!(z4().units(), vec![1, 3]);
    }

    #[test]
    fn fixed_submodule_of_trivial_subgroup_is_everything() {
        let g = FiniteGroup::symmetric(3);
        let m = RGModule::regular(f2(), &g);
        let fixed = fixed_submodule(&m, &g, &Subgroup::trivial(&g));
        assert_eq!(fixed.rank(), 6);
        assert!(fixed.orders.iter().all(|&o| o == 2));
    }

    #[test]
    fn regular_module_fixed_ranks_match_orbit_sum_oracle() {
        for ring in [f2(), f3(), z4()] {
            let g = FiniteGroup::symmetric(3);
            let m = RGModule::regular(ring, &g);
            for h in enumerate_subgroups(&g) {
                let fixed = fixed_submodule(&m, &g, &h);
                // oracle: orbit sums of the right-multiplication action form
                // a free basis of the fixed submodule
                let mut orbit_sums: Vec<Vec<u64>> = Vec::new();
                let mut seen = vec![false; g.order()];
                for x in g.elements() {
                    if seen[x] {
                        continue;
                    }
                    let mut row = vec![0u64; g.order()];
                    for &hh in h.members() {
                        let y = g.mul(x, hh);
                        seen[y] = true;
                        row[y] = 1;
                    }
                    orbit_sums.push(row);
                }
                assert_eq!(fixed.rank(), orbit_sums.len(), "H={:?}", h.members());
                assert_eq!(fixed.rank(), g.order() / h.len());
                // every orbit sum is fixed and spans: mutual containment
                let n = ring.modulus();
                for row in &orbit_sums {
                    for &hh in h.members() {
                        let moved = m.matrix(hh).apply_row(row, &ring);
                        assert_eq!(&moved, row);
                    }
                    assert!(in_span(&fixed.generators, row, n));
                }
                for gen in &fixed.generators {
                    assert!(in_span(&orbit_sums, gen, n));
                }
            }
        }
    }

    #[test]
    fn z2_regular_over_f2_has_fixed_rank_one() {
        let g = FiniteGroup::cyclic(2);
        let m = RGModule::regular(f2(), &g);
        let fixed = fixed_submodule(&m, &g, &Subgroup::full(&g));
        assert_eq!(fixed.rank(), 1);
        assert_eq!(fixed.generators, vec![vec![1, 1]]);
    }

    #[test]
    fn sign_module_over_z4_has_two_torsion_fixed_part() {
        let g = FiniteGroup::cyclic(2);
        // character sending the generator to -1 = 3 mod 4
        let m = RGModule::character(z4(), &g, vec![1, 3]).unwrap();
        let fixed = fixed_submodule(&m, &g, &Subgroup::full(&g));
        assert_eq!(fixed.orders, vec![2]);
        assert_eq!(fixed.generators, vec![vec![2]]);
    }

    #[test]
    fn character_enumeration() {
        let g = FiniteGroup::cyclic(2);
        assert_eq!(all_characters(f3(), &g).len(), 2);
        assert_eq!(all_characters(f2(), &g).len(), 1);
        let s3 = FiniteGroup::symmetric(3);
        // trivial and sign
        assert_eq!(all_characters(f3(), &s3).len(), 2);
    }

    #[test]
    fn module_sheaf_values_for_the_regular_module_over_s3() {
        let g = FiniteGroup::symmetric(3);
        let bundle = GroupSiteBundle::build(&g, PosetKind::AllSubgroups, QuotientKind::Orbit).unwrap();
        let m = RGModule::regular(f2(), &g);
        let sheaf = module_fixed_point_sheaf(&m, &bundle.extension).unwrap();
        let ranks: Vec<usize> = (0..6).map(|x| sheaf.embeddings[x].rank()).collect();
        assert_eq!(ranks, vec![6, 3, 3, 3, 2, 1]);
        let coherent = coherent_check(&sheaf.presheaf);
        assert_eq!(coherent.generator_counts, vec![6, 3, 3, 3, 2, 1]);
    }

    #[test]
    fn fixed_point_module_sheaf_is_a_sheaf() {
        let budgets = Budgets::default();
        let b = z2_bundle();
        for ring in [f2(), f3(), z4()] {
            for m in [
                RGModule::zero(ring, &b.group),
                RGModule::trivial(ring, &b.group),
                RGModule::regular(ring, &b.group),
            ] {
                let sheaf = module_fixed_point_sheaf(&m, &b.extension).unwrap();
                let report = is_module_sheaf(&sheaf.presheaf, &b.site_c, Some(&b.extension), &budgets).unwrap();
                assert!(report.is_sheaf, "{:?} {:?}", ring, report.witness);
            }
        }
    }

    #[test]
    fn rank_mismatch_presheaf_is_not_a_sheaf() {
        let budgets = Budgets::default();
        let b = z2_bundle();
        let cat = b.extension.cat().clone();
        let ring = f2();
        // trivial rank 1 at the bottom, rank 2 at the top
        let arrow = (0..cat.n_morphisms()).find(|&m| cat.dom(m) == 0 && cat.cod(m) == 1).unwrap();
        let shapes = vec![vec![2], vec![2, 2]];
        let mut maps: Vec<Mat> = (0..cat.n_morphisms()).map(|_| Mat::identity(1)).collect();
        maps[cat.identity(1)] = Mat::identity(2);
        maps[arrow] = Mat::from_rows(vec![vec![1], vec![0]], 1);
        let f = ModulePresheaf::new(cat, ring, shapes, maps).unwrap();
        let report = is_module_sheaf(&f, &b.site_c, Some(&b.extension), &budgets).unwrap();
        assert!(!report.is_sheaf);
        assert!(report.witness.unwrap().contains("object 1"));
    }

    #[test]
    fn zero_presheaf_is_a_sheaf() {
        let budgets = Budgets::default();
        let b = z2_bundle();
        let f = ModulePresheaf::constant_free(b.extension.cat().clone(), f2(), 0);
        let report = is_module_sheaf(&f, &b.site_c, Some(&b.extension), &budgets).unwrap();
        assert!(report.is_sheaf);
    }

    #[test]
    fn structure_sheaf_passes_on_all_three_sites() {
        let budgets = Budgets::default();
        let b = z2_bundle();
        for site in [&b.one_object.site, &b.site_pg, &b.site_c] {
            let s = StructureSheaf::new(site, f3(), &budgets).unwrap();
            assert_eq!(s.presheaf.shape(0), &[3]);
        }
    }

    #[test]
    fn linear_fallback_agrees_with_set_path() {
        let b = z2_bundle();
        let m = RGModule::regular(f3(), &b.group);
        let sheaf = module_fixed_point_sheaf(&m, &b.extension).unwrap();
        let set_report =
            is_module_sheaf(&sheaf.presheaf, &b.site_c, Some(&b.extension), &Budgets::default()).unwrap();
        let tiny = Budgets { value_cap: 1, ..Budgets::default() };
        let linear_report = is_module_sheaf(&sheaf.presheaf, &b.site_c, Some(&b.extension), &tiny).unwrap();
        assert!(linear_report.used_linear_fallback);
        assert_eq!(set_report.is_sheaf, linear_report.is_sheaf);
        // and on a non-sheaf
        let cat = b.extension.cat().clone();
        let arrow = (0..cat.n_morphisms()).find(|&m| cat.dom(m) == 0 && cat.cod(m) == 1).unwrap();
        let shapes = vec![vec![3], vec![3, 3]];
        let mut maps: Vec<Mat> = (0..cat.n_morphisms()).map(|_| Mat::identity(1)).collect();
        maps[cat.identity(1)] = Mat::identity(2);
        maps[arrow] = Mat::from_rows(vec![vec![1], vec![0]], 1);
        let bad = ModulePresheaf::new(cat, f3(), shapes, maps).unwrap();
        let linear_bad = is_module_sheaf(&bad, &b.site_c, Some(&b.extension), &tiny).unwrap();
        assert!(!linear_bad.is_sheaf);
    }

    #[test]
    fn verify_module_equivalence_on_z2_over_f3() {
        let budgets = Budgets::default();
        let b = z2_bundle();
        let report = verify_module_equivalence(&b, f3(), 2, 7, &budgets).unwrap();
        assert!(report.passed, "{:?}", report);
        // both one-dimensional characters are in the corpus
        assert!(report.cases.iter().filter(|c| c.name.starts_with("character")).count() >= 2);
    }

    #[test]
    fn verify_module_equivalence_regular_s3_over_f2() {
        let budgets = Budgets::default();
        let g = FiniteGroup::symmetric(3);
        let bundle = GroupSiteBundle::build(&g, PosetKind::AllSubgroups, QuotientKind::Orbit).unwrap();
        let report = verify_module_equivalence(&bundle, f2(), 6, 3, &budgets).unwrap();
        assert!(report.passed, "{:?}", report);
        let regular = report
            .cases
            .iter()
            .find(|c| c.rank == 6 && c.name.starts_with("permutation"))
            .expect("regular module in corpus");
        assert_eq!(regular.value_ranks, vec![6, 3, 3, 3, 2, 1]);
    }

    #[test]
    fn permutation_fixed_rank_equals_orbit_count_not_fixed_points() {
        // the set-level fixed points undercount whenever an orbit is not a
        // singleton; the linear rank counts orbits
        let g = FiniteGroup::symmetric(3);
        let subs = enumerate_subgroups(&g);
        for ring in [f2(), f3(), z4()] {
            for h in &subs {
                for k in &subs {
                    let m = coset_gset(&g, k);
                    let module = RGModule::permutation(ring, &g, &m);
                    let rank = fixed_submodule(&module, &g, h).rank();
                    let orbit_count = {
                        let mut seen = vec![false; m.size()];
                        let mut c = 0;
                        for x in 0..m.size() {
                            if !seen[x] {
                                c += 1;
                                for &hh in h.members() {
                                    let mut y = x;
                                    loop {
                                        seen[y] = true;
                                        y = m.apply(y, hh);
                                        if y == x {
                                            break;
                                        }
                                    }
                                }
                            }
                        }
                        c
                    };
                    assert_eq!(rank, orbit_count, "H={:?} K={:?}", h.members(), k.members());
                }
            }
        }
    }

    #[test]
    fn random_invertible_is_invertible() {
        use rand::SeedableRng;
        let mut rng = rand::rngs::StdRng::seed_from_u64(3);
        for ring in [f2(), z4()] {
            let (q, q_inv) = random_invertible(ring, 4, &mut rng);
            assert!(q.mul(&q_inv, &ring).is_identity(&ring));
            assert!(q_inv.mul(&q, &ring).is_identity(&ring));
        }
    }
}
