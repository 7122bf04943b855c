//! Finite groups, subgroups, G-sets and G-posets as validated lookup tables.
//!
//! Everything downstream (transporter categories, fixed-point sheaves, module
//! actions) consumes these types, so construction is strict: a value that
//! exists has passed its exhaustive axiom checks.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GroupError {
    #[error("multiplication table is not square: row {row} has length {len}, expected {order}")]
    RaggedTable { row: usize, len: usize, order: usize },
    #[error("table entry out of range at ({i},{j}): {value} >= {order}")]
    EntryOutOfRange { i: usize, j: usize, value: usize, order: usize },
    #[error("no two-sided identity element found")]
    NoIdentity,
    #[error("associativity fails at ({a},{b},{c}): (ab)c = {left}, a(bc) = {right}")]
    NotAssociative { a: usize, b: usize, c: usize, left: usize, right: usize },
    #[error("element {element} has no two-sided inverse")]
    NoInverse { element: usize },
    #[error("label list has length {len}, expected {order}")]
    BadLabels { len: usize, order: usize },
    #[error("generator {index} is not a permutation of 0..{degree}")]
    BadGenerator { index: usize, degree: usize },
    #[error("subgroup member {member} out of range for group of order {order}")]
    MemberOutOfRange { member: usize, order: usize },
    #[error("subgroup does not contain the identity")]
    SubgroupMissingIdentity,
    #[error("subgroup not closed: {a} * {b} = {product} is not a member")]
    SubgroupNotClosed { a: usize, b: usize, product: usize },
    #[error("{p} is not prime")]
    NotPrime { p: usize },
    #[error("action table has {rows} rows, expected carrier size {size}")]
    BadActionRows { rows: usize, size: usize },
    #[error("action row {row} has length {len}, expected group order {order}")]
    BadActionRow { row: usize, len: usize, order: usize },
    #[error("action value out of range at ({x},{g}): {value} >= {size}")]
    ActionOutOfRange { x: usize, g: usize, value: usize, size: usize },
    #[error("identity does not act trivially: {x} . e = {image}")]
    IdentityActs { x: usize, image: usize },
    #[error("action not compatible at ({x},{g},{h}): (x.g).h = {left}, x.(gh) = {right}")]
    ActionIncompatible { x: usize, g: usize, h: usize, left: usize, right: usize },
    #[error("map is not equivariant at ({x},{g}): f(x.g) = {left}, f(x).g = {right}")]
    NotEquivariant { x: usize, g: usize, left: usize, right: usize },
    #[error("map value {value} out of range for target of size {size}")]
    MapOutOfRange { value: usize, size: usize },
    #[error("order relation is not reflexive at {x}")]
    NotReflexive { x: usize },
    #[error("order relation is not antisymmetric at ({x},{y})")]
    NotAntisymmetric { x: usize, y: usize },
    #[error("order relation is not transitive at ({x},{y},{z})")]
    NotTransitive { x: usize, y: usize, z: usize },
    #[error("action does not preserve order: {x} <= {y} but {x}.{g} <= {y}.{g} fails")]
    OrderNotPreserved { x: usize, y: usize, g: usize },
    #[error("le table has wrong shape")]
    BadLeTable,
}

/// A finite group as a validated Cayley table.
///
/// Elements are the indices `0..order`. The table, identity and inverse
/// vector are checked exhaustively at construction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteGroup {
    order: usize,
    mul: Vec<Vec<usize>>,
    identity: usize,
    inv: Vec<usize>,
    labels: Vec<String>,
}

impl FiniteGroup {
    /// Builds a group from a raw multiplication table, checking every axiom.
    pub fn from_table(mul: Vec<Vec<usize>>, labels: Option<Vec<String>>) -> Result<Self, GroupError> {
        let order = mul.len();
        for (row, r) in mul.iter().enumerate() {
            if r.len() != order {
                return Err(GroupError::RaggedTable { row, len: r.len(), order });
            }
            for (j, &v) in r.iter().enumerate() {
                if v >= order {
                    return Err(GroupError::EntryOutOfRange { i: row, j, value: v, order });
                }
            }
        }
        if order == 0 {
            return Err(GroupError::NoIdentity);
        }
        let identity = (0..order)
            .find(|&e| (0..order).all(|a| mul[e][a] == a && mul[a][e] == a))
            .ok_or(GroupError::NoIdentity)?;
        for a in 0..order {
            for b in 0..order {
                for c in 0..order {
                    let left = mul[mul[a][b]][c];
                    let right = mul[a][mul[b][c]];
                    if left != right {
                        return Err(GroupError::NotAssociative { a, b, c, left, right });
                    }
                }
            }
        }
        let mut inv = vec![0usize; order];
        for a in 0..order {
            let i = (0..order)
                .find(|&b| mul[a][b] == identity && mul[b][a] == identity)
                .ok_or(GroupError::NoInverse { element: a })?;
            inv[a] = i;
        }
        let labels = match labels {
            Some(l) => {
                if l.len() != order {
                    return Err(GroupError::BadLabels { len: l.len(), order });
                }
                l
            }
            None => (0..order).map(|i| format!("g{i}")).collect(),
        };
        Ok(FiniteGroup { order, mul, identity, inv, labels })
    }

    /// Builds a group from permutation generators on `0..degree` by closing
    /// under composition. Elements are labelled by cycle notation.
    pub fn from_permutations(degree: usize, generators: &[Vec<usize>]) -> Result<Self, GroupError> {
        for (index, g) in generators.iter().enumerate() {
            let mut seen = vec![false; degree];
            if g.len() != degree {
                return Err(GroupError::BadGenerator { index, degree });
            }
            for &v in g {
                if v >= degree || seen[v] {
                    return Err(GroupError::BadGenerator { index, degree });
                }
                seen[v] = true;
            }
        }
        let id: Vec<usize> = (0..degree).collect();
        let mut elements: Vec<Vec<usize>> = vec![id];
        let mut frontier = vec![0usize];
        while let Some(i) = frontier.pop() {
            let base = elements[i].clone();
            for g in generators {
                // right-to-left: (base then g), i.e. apply base first
                let prod: Vec<usize> = base.iter().map(|&x| g[x]).collect();
                if !elements.contains(&prod) {
                    elements.push(prod);
                    frontier.push(elements.len() - 1);
                }
            }
        }
        elements.sort();
        // keep identity at index 0 for readability
        let id_pos = elements.iter().position(|p| *p == (0..degree).collect::<Vec<_>>()).unwrap();
        elements.swap(0, id_pos);
        let order = elements.len();
        let mut mul = vec![vec![0usize; order]; order];
        for (a, pa) in elements.iter().enumerate() {
            for (b, pb) in elements.iter().enumerate() {
                // x . (ab) = (x . a) . b with permutations acting on the right
                let prod: Vec<usize> = pa.iter().map(|&x| pb[x]).collect();
                mul[a][b] = elements.iter().position(|p| *p == prod).unwrap();
            }
        }
        let labels = elements.iter().map(|p| cycle_notation(p)).collect();
        Self::from_table(mul, Some(labels))
    }

    /// Cyclic group of order `n`.
    pub fn cyclic(n: usize) -> Self {
        let mul = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
        let labels = (0..n).map(|i| if i == 0 { "e".to_string() } else { format!("r{i}") }).collect();
        Self::from_table(mul, Some(labels)).expect("cyclic table is a group")
    }

    /// Dihedral group of order `2n` (symmetries of the regular n-gon), as permutations.
    pub fn dihedral(n: usize) -> Self {
        assert!(n >= 2);
        let rot: Vec<usize> = (0..n).map(|i| (i + 1) % n).collect();
        let refl: Vec<usize> = (0..n).map(|i| (n - i) % n).collect();
        Self::from_permutations(n, &[rot, refl]).expect("dihedral generators are permutations")
    }

    /// Symmetric group on `n` letters, as permutations. Intended for small `n`.
    pub fn symmetric(n: usize) -> Self {
        assert!(n >= 1);
        if n == 1 {
            return Self::trivial();
        }
        let transposition: Vec<usize> = {
            let mut p: Vec<usize> = (0..n).collect();
            p.swap(0, 1);
            p
        };
        let cycle: Vec<usize> = (0..n).map(|i| (i + 1) % n).collect();
        Self::from_permutations(n, &[transposition, cycle]).expect("valid generators")
    }

    pub fn trivial() -> Self {
        Self::from_table(vec![vec![0]], Some(vec!["e".to_string()])).unwrap()
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a][b]
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inv[a]
    }

    pub fn label(&self, a: usize) -> &str {
        &self.labels[a]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn mul_table(&self) -> &[Vec<usize>] {
        &self.mul
    }

    pub fn elements(&self) -> impl Iterator<Item = usize> {
        0..self.order
    }

    /// The conjugate g h g^-1.
    pub fn conj(&self, g: usize, h: usize) -> usize {
        self.mul(self.mul(g, h), self.inv(g))
    }
}

fn cycle_notation(perm: &[usize]) -> String {
    let n = perm.len();
    let mut seen = vec![false; n];
    let mut out = String::new();
    for start in 0..n {
        if seen[start] || perm[start] == start {
            seen[start] = true;
            continue;
        }
        let mut cycle = vec![start];
        seen[start] = true;
        let mut x = perm[start];
        while x != start {
            seen[x] = true;
            cycle.push(x);
            x = perm[x];
        }
        out.push('(');
        out.push_str(&cycle.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(""));
        out.push(')');
    }
    if out.is_empty() {
        out.push_str("e");
    }
    out
}

/// A subgroup, stored as its sorted member set. Operations take the parent
/// group explicitly; the constructor validates closure against it.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Subgroup {
    members: Vec<usize>,
}

impl Subgroup {
    pub fn new(group: &FiniteGroup, mut members: Vec<usize>) -> Result<Self, GroupError> {
        members.sort_unstable();
        members.dedup();
        for &m in &members {
            if m >= group.order() {
                return Err(GroupError::MemberOutOfRange { member: m, order: group.order() });
            }
        }
        if !members.contains(&group.identity()) {
            return Err(GroupError::SubgroupMissingIdentity);
        }
        for &a in &members {
            for &b in &members {
                let p = group.mul(a, b);
                if members.binary_search(&p).is_err() {
                    return Err(GroupError::SubgroupNotClosed { a, b, product: p });
                }
            }
        }
        // closure + finiteness gives inverses, but check anyway
        for &a in &members {
            let i = group.inv(a);
            if members.binary_search(&i).is_err() {
                return Err(GroupError::SubgroupNotClosed { a, b: i, product: group.identity() });
            }
        }
        Ok(Subgroup { members })
    }

    pub fn trivial(group: &FiniteGroup) -> Self {
        Subgroup { members: vec![group.identity()] }
    }

    pub fn full(group: &FiniteGroup) -> Self {
        Subgroup { members: group.elements().collect() }
    }

    /// Closure of a generating set.
    pub fn generated(group: &FiniteGroup, generators: &[usize]) -> Result<Self, GroupError> {
        for &m in generators {
            if m >= group.order() {
                return Err(GroupError::MemberOutOfRange { member: m, order: group.order() });
            }
        }
        let mut members = vec![group.identity()];
        let mut frontier: Vec<usize> = vec![group.identity()];
        while let Some(a) = frontier.pop() {
            for &g in generators {
                let p = group.mul(a, g);
                if !members.contains(&p) {
                    members.push(p);
                    frontier.push(p);
                }
            }
        }
        // generators with products closed on the left by induction; close fully
        loop {
            let mut added = false;
            let snapshot = members.clone();
            for &a in &snapshot {
                for &b in &snapshot {
                    let p = group.mul(a, b);
                    if !members.contains(&p) {
                        members.push(p);
                        added = true;
                    }
                }
            }
            if !added {
                break;
            }
        }
        members.sort_unstable();
        Ok(Subgroup { members })
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, g: usize) -> bool {
        self.members.binary_search(&g).is_ok()
    }

    pub fn is_subset_of(&self, other: &Subgroup) -> bool {
        self.members.iter().all(|&m| other.contains(m))
    }
}

/// All subgroups of `group`, each exactly once, sorted by (size, member set).
///
/// Breadth-first closure over generated subsets; fine for the desk scale
/// |G| <= 24 this crate targets.
pub fn enumerate_subgroups(group: &FiniteGroup) -> Vec<Subgroup> {
    let mut found: Vec<Subgroup> = vec![Subgroup::trivial(group)];
    let mut frontier: Vec<Subgroup> = found.clone();
    while let Some(h) = frontier.pop() {
        for g in group.elements() {
            if h.contains(g) {
                continue;
            }
            let mut gens = h.members().to_vec();
            gens.push(g);
            let k = Subgroup::generated(group, &gens).expect("members are in range");
            if !found.contains(&k) {
                found.push(k.clone());
                frontier.push(k);
            }
        }
    }
    found.sort_by(|a, b| (a.len(), a.members()).cmp(&(b.len(), b.members())));
    found
}

fn is_prime(p: usize) -> bool {
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

fn is_power_of(mut n: usize, p: usize) -> bool {
    while n % p == 0 {
        n /= p;
    }
    n == 1
}

/// Subgroups of p-power order, including the trivial subgroup (order p^0),
/// so the resulting poset keeps its initial object.
pub fn p_subgroups(group: &FiniteGroup, p: usize) -> Result<Vec<Subgroup>, GroupError> {
    if !is_prime(p) {
        return Err(GroupError::NotPrime { p });
    }
    Ok(enumerate_subgroups(group)
        .into_iter()
        .filter(|h| h.len() == 1 || is_power_of(h.len(), p))
        .collect())
}

/// The conjugate subgroup g H g^-1.
pub fn conjugate_subgroup(group: &FiniteGroup, h: &Subgroup, g: usize) -> Subgroup {
    let mut members: Vec<usize> = h.members().iter().map(|&m| group.conj(g, m)).collect();
    members.sort_unstable();
    Subgroup { members }
}

/// Canonical representative of the conjugacy class of `h`: the minimal
/// conjugate in member-set order.
pub fn conjugacy_class_rep(group: &FiniteGroup, h: &Subgroup) -> Subgroup {
    group
        .elements()
        .map(|g| conjugate_subgroup(group, h, g))
        .min_by(|a, b| a.members().cmp(b.members()))
        .expect("group is nonempty")
}

/// A finite right G-set as a validated action table: `act[x][g] = x . g`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GSet {
    size: usize,
    act: Vec<Vec<usize>>,
}

impl GSet {
    pub fn new(group: &FiniteGroup, act: Vec<Vec<usize>>) -> Result<Self, GroupError> {
        let size = act.len();
        let order = group.order();
        for (row, r) in act.iter().enumerate() {
            if r.len() != order {
                return Err(GroupError::BadActionRow { row, len: r.len(), order });
            }
            for (g, &v) in r.iter().enumerate() {
                if v >= size {
                    return Err(GroupError::ActionOutOfRange { x: row, g, value: v, size });
                }
            }
        }
        for x in 0..size {
            let image = act[x][group.identity()];
            if image != x {
                return Err(GroupError::IdentityActs { x, image });
            }
        }
        for x in 0..size {
            for g in group.elements() {
                for h in group.elements() {
                    let left = act[act[x][g]][h];
                    let right = act[x][group.mul(g, h)];
                    if left != right {
                        return Err(GroupError::ActionIncompatible { x, g, h, left, right });
                    }
                }
            }
        }
        Ok(GSet { size, act })
    }

    pub fn empty() -> Self {
        GSet { size: 0, act: Vec::new() }
    }

    pub fn point(group: &FiniteGroup) -> Self {
        GSet { size: 1, act: vec![vec![0; group.order()]] }
    }

    /// The regular G-set: carrier G, acting by right multiplication.
    pub fn regular(group: &FiniteGroup) -> Self {
        let act = group.elements().map(|x| group.elements().map(|g| group.mul(x, g)).collect()).collect();
        GSet { size: group.order(), act }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn apply(&self, x: usize, g: usize) -> usize {
        self.act[x][g]
    }

    pub fn act_table(&self) -> &[Vec<usize>] {
        &self.act
    }

    /// Disjoint union of two G-sets over the same group.
    pub fn disjoint_union(&self, other: &GSet) -> GSet {
        let mut act = self.act.clone();
        for row in &other.act {
            act.push(row.iter().map(|&v| v + self.size).collect());
        }
        GSet { size: self.size + other.size, act }
    }
}

/// An equivariant map of G-sets, validated at construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GMap {
    map: Vec<usize>,
}

impl GMap {
    pub fn new(group: &FiniteGroup, source: &GSet, target: &GSet, map: Vec<usize>) -> Result<Self, GroupError> {
        if map.len() != source.size() {
            return Err(GroupError::BadActionRows { rows: map.len(), size: source.size() });
        }
        for &v in &map {
            if v >= target.size() {
                return Err(GroupError::MapOutOfRange { value: v, size: target.size() });
            }
        }
        for x in 0..source.size() {
            for g in group.elements() {
                let left = map[source.apply(x, g)];
                let right = target.apply(map[x], g);
                if left != right {
                    return Err(GroupError::NotEquivariant { x, g, left, right });
                }
            }
        }
        Ok(GMap { map })
    }

    pub fn apply(&self, x: usize) -> usize {
        self.map[x]
    }

    pub fn table(&self) -> &[usize] {
        &self.map
    }
}

/// Cosets of a subgroup together with the coset G-set they carry.
#[derive(Debug, Clone)]
pub struct Cosets {
    /// Minimal element of each coset, in carrier order.
    pub reps: Vec<usize>,
    /// Coset index of each group element.
    pub index_of: Vec<usize>,
    pub gset: GSet,
}

/// Right cosets Hg with the action Hg . g' = H(gg').
///
/// Cosets are ordered by their minimal element, so the carrier is canonical.
pub fn cosets(group: &FiniteGroup, h: &Subgroup) -> Cosets {
    let order = group.order();
    let mut index_of = vec![usize::MAX; order];
    let mut reps = Vec::new();
    for g in group.elements() {
        if index_of[g] != usize::MAX {
            continue;
        }
        let idx = reps.len();
        reps.push(g);
        for &m in h.members() {
            index_of[group.mul(m, g)] = idx;
        }
    }
    let size = reps.len();
    let act: Vec<Vec<usize>> = (0..size)
        .map(|c| group.elements().map(|g| index_of[group.mul(reps[c], g)]).collect())
        .collect();
    Cosets { reps, index_of, gset: GSet { size, act } }
}

/// The coset G-set H\G.
pub fn coset_gset(group: &FiniteGroup, h: &Subgroup) -> GSet {
    cosets(group, h).gset
}

/// The H-fixed points of a G-set, as sorted carrier indices.
pub fn fixed_points(m: &GSet, h: &Subgroup) -> Vec<usize> {
    (0..m.size()).filter(|&x| h.members().iter().all(|&g| m.apply(x, g) == x)).collect()
}

/// One orbit of a G-set with its point stabilizer data.
#[derive(Debug, Clone)]
pub struct Orbit {
    /// Sorted points of the orbit.
    pub points: Vec<usize>,
    /// Stabilizer of the minimal point.
    pub stabilizer: Subgroup,
    /// Canonical representative of the stabilizer's conjugacy class; the
    /// orbit type tag used by isomorphism tests.
    pub stabilizer_class: Subgroup,
}

/// Orbit partition with stabilizer-class tags, ordered by minimal point.
pub fn orbits(group: &FiniteGroup, m: &GSet) -> Vec<Orbit> {
    let mut seen = vec![false; m.size()];
    let mut out = Vec::new();
    for x in 0..m.size() {
        if seen[x] {
            continue;
        }
        let mut points: Vec<usize> = group.elements().map(|g| m.apply(x, g)).collect();
        points.sort_unstable();
        points.dedup();
        for &p in &points {
            seen[p] = true;
        }
        let stab_members: Vec<usize> = group.elements().filter(|&g| m.apply(x, g) == x).collect();
        let stabilizer = Subgroup::new(group, stab_members).expect("stabilizers are subgroups");
        let stabilizer_class = conjugacy_class_rep(group, &stabilizer);
        out.push(Orbit { points, stabilizer, stabilizer_class });
    }
    out
}

/// Sorted multiset of orbit-type tags (stabilizer class representatives).
pub fn orbit_type_multiset(group: &FiniteGroup, m: &GSet) -> Vec<Subgroup> {
    let mut tags: Vec<Subgroup> = orbits(group, m).into_iter().map(|o| o.stabilizer_class).collect();
    tags.sort();
    tags
}

/// G-set isomorphism via orbit-type multisets. Equivalent to the existence of
/// an equivariant bijection; the brute-force bijection search is kept as a
/// test oracle in [`crate::oracle`].
pub fn gsets_isomorphic(group: &FiniteGroup, m: &GSet, n: &GSet) -> bool {
    if m.size() != n.size() {
        return false;
    }
    orbit_type_multiset(group, m) == orbit_type_multiset(group, n)
}

/// A G-poset: a G-set carrier with a compatible partial order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GPoset {
    gset: GSet,
    le: Vec<Vec<bool>>,
}

impl GPoset {
    pub fn new(group: &FiniteGroup, gset: GSet, le: Vec<Vec<bool>>) -> Result<Self, GroupError> {
        let size = gset.size();
        if le.len() != size || le.iter().any(|r| r.len() != size) {
            return Err(GroupError::BadLeTable);
        }
        for x in 0..size {
            if !le[x][x] {
                return Err(GroupError::NotReflexive { x });
            }
        }
        for x in 0..size {
            for y in 0..size {
                if x != y && le[x][y] && le[y][x] {
                    return Err(GroupError::NotAntisymmetric { x, y });
                }
            }
        }
        for x in 0..size {
            for y in 0..size {
                if !le[x][y] {
                    continue;
                }
                for z in 0..size {
                    if le[y][z] && !le[x][z] {
                        return Err(GroupError::NotTransitive { x, y, z });
                    }
                }
            }
        }
        for x in 0..size {
            for y in 0..size {
                if !le[x][y] {
                    continue;
                }
                for g in group.elements() {
                    if !le[gset.apply(x, g)][gset.apply(y, g)] {
                        return Err(GroupError::OrderNotPreserved { x, y, g });
                    }
                }
            }
        }
        Ok(GPoset { gset, le })
    }

    /// The poset of the given subgroups under inclusion, with G acting by
    /// conjugation (right action H . g = g^-1 H g). The subgroup list must be
    /// closed under conjugation.
    pub fn of_subgroups(group: &FiniteGroup, subgroups: &[Subgroup]) -> Result<Self, GroupError> {
        let size = subgroups.len();
        let mut act = vec![vec![0usize; group.order()]; size];
        for (i, h) in subgroups.iter().enumerate() {
            for g in group.elements() {
                let image = conjugate_subgroup(group, h, group.inv(g));
                let j = subgroups
                    .iter()
                    .position(|k| *k == image)
                    .ok_or(GroupError::SubgroupNotClosed { a: i, b: g, product: 0 })?;
                act[i][g] = j;
            }
        }
        let gset = GSet::new(group, act)?;
        let le: Vec<Vec<bool>> = subgroups
            .iter()
            .map(|h| subgroups.iter().map(|k| h.is_subset_of(k)).collect())
            .collect();
        Self::new(group, gset, le)
    }

    /// Discrete order (antichain) on an arbitrary G-set.
    pub fn discrete(group: &FiniteGroup, gset: GSet) -> Self {
        let size = gset.size();
        let le = (0..size).map(|x| (0..size).map(|y| x == y).collect()).collect();
        GPoset::new(group, gset, le).expect("discrete order is valid")
    }

    pub fn size(&self) -> usize {
        self.gset.size()
    }

    pub fn gset(&self) -> &GSet {
        &self.gset
    }

    pub fn le(&self, x: usize, y: usize) -> bool {
        self.le[x][y]
    }

    /// The unique minimum element, if one exists.
    pub fn initial_object(&self) -> Option<usize> {
        (0..self.size()).find(|&x| (0..self.size()).all(|y| self.le[x][y]))
    }

    /// Left action g . x = x . g^-1, the direction transporter morphisms use.
    pub fn left_act(&self, group: &FiniteGroup, g: usize, x: usize) -> usize {
        self.gset.apply(x, group.inv(g))
    }

    pub fn opposite(&self) -> GPoset {
        let size = self.size();
        let le = (0..size).map(|x| (0..size).map(|y| self.le[y][x]).collect()).collect();
        GPoset { gset: self.gset.clone(), le }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;
    use proptest::prelude::*;

    fn s3() -> FiniteGroup {
        FiniteGroup::symmetric(3)
    }

    fn d4() -> FiniteGroup {
        FiniteGroup::dihedral(4)
    }

    #[test]
    fn cyclic_groups_are_valid() {
        for n in 1..=6 {
            let g = FiniteGroup::cyclic(n);
            assert_eq!(g.order(), n);
        }
    }

    #[test]
    fn symmetric_3_has_order_six() {
        let g = s3();
        assert_eq!(g.order(), 6);
        assert_eq!(g.label(g.identity()), "e");
    }

    #[test]
    fn dihedral_4_has_order_eight() {
        assert_eq!(d4().order(), 8);
    }

    #[test]
    fn from_table_rejects_non_associative() {
        // z4's table with one entry corrupted
        let mut mul: Vec<Vec<usize>> = (0..4).map(|a| (0..4).map(|b| (a + b) % 4).collect()).collect();
        mul[2][2] = 1;
        let err = FiniteGroup::from_table(mul, None).unwrap_err();
        assert!(matches!(err, GroupError::NotAssociative { .. } | GroupError::NoInverse { .. }));
    }

    #[test]
    fn subgroup_counts_match_bruteforce_oracle() {
        // expected counts: z2 -> 2, s3 -> 6, d4 -> 10
        for (g, expected) in [(FiniteGroup::cyclic(2), 2), (s3(), 6), (d4(), 10)] {
            let subs = enumerate_subgroups(&g);
            assert_eq!(subs.len(), expected);
            let oracle_subs = oracle::all_subgroups_bruteforce(&g);
            assert_eq!(subs, oracle_subs);
            // sorted by (size, members)
            for w in subs.windows(2) {
                assert!((w[0].len(), w[0].members()) < (w[1].len(), w[1].members()));
            }
        }
    }

    #[test]
    fn p_subgroup_counts() {
        let g = s3();
        assert_eq!(p_subgroups(&g, 2).unwrap().len(), 4);
        assert_eq!(p_subgroups(&g, 3).unwrap().len(), 2);
        let z2 = FiniteGroup::cyclic(2);
        assert_eq!(p_subgroups(&z2, 3).unwrap().len(), 1);
        assert_eq!(p_subgroups(&z2, 4), Err(GroupError::NotPrime { p: 4 }));
    }

    #[test]
    fn conjugation_moves_reflections_of_s3() {
        let g = s3();
        let find = |label: &str| g.elements().find(|&i| g.label(i) == label).unwrap();
        let t12 = find("(12)");
        let t23 = find("(23)");
        let c123 = find("(123)");
        let h = Subgroup::generated(&g, &[t12]).unwrap();
        let conj = conjugate_subgroup(&g, &h, c123);
        let expected = Subgroup::generated(&g, &[t23]).unwrap();
        assert_eq!(conj, expected);
        // G is normal in itself; the trivial subgroup is central
        assert_eq!(conjugate_subgroup(&g, &Subgroup::full(&g), c123), Subgroup::full(&g));
        assert_eq!(conjugate_subgroup(&g, &Subgroup::trivial(&g), t12), Subgroup::trivial(&g));
    }

    #[test]
    fn coset_gsets() {
        let g = s3();
        assert_eq!(coset_gset(&g, &Subgroup::trivial(&g)).size(), 6);
        assert_eq!(coset_gset(&g, &Subgroup::full(&g)).size(), 1);
        let h = enumerate_subgroups(&g).into_iter().find(|h| h.len() == 2).unwrap();
        let m = coset_gset(&g, &h);
        assert_eq!(m.size(), 3);
        assert_eq!(orbits(&g, &m).len(), 1);
    }

    #[test]
    fn fixed_point_counts_match_transporter_formula() {
        for g in [FiniteGroup::cyclic(2), s3(), d4()] {
            let subs = enumerate_subgroups(&g);
            for h in &subs {
                for k in &subs {
                    let fp = fixed_points(&coset_gset(&g, k), h);
                    let transporter =
                        g.elements().filter(|&x| conjugate_subgroup(&g, h, x).is_subset_of(k)).count();
                    assert_eq!(fp.len(), transporter / k.len(), "H={:?} K={:?}", h, k);
                }
            }
        }
    }

    #[test]
    fn fixed_points_of_free_action_are_empty() {
        let g = FiniteGroup::cyclic(2);
        let m = GSet::regular(&g);
        assert!(fixed_points(&m, &Subgroup::full(&g)).is_empty());
        let p = GSet::point(&g);
        assert_eq!(fixed_points(&p, &Subgroup::full(&g)), vec![0]);
    }

    #[test]
    fn orbit_decomposition() {
        let g = FiniteGroup::cyclic(2);
        let m = GSet::regular(&g).disjoint_union(&GSet::point(&g));
        let os = orbits(&g, &m);
        assert_eq!(os.len(), 2);
        assert_eq!(os[0].stabilizer, Subgroup::trivial(&g));
        assert_eq!(os[1].stabilizer, Subgroup::full(&g));
        // sum over orbits of [G : stabilizer] equals the carrier size
        let total: usize = os.iter().map(|o| g.order() / o.stabilizer.len()).sum();
        assert_eq!(total, m.size());
    }

    #[test]
    fn orbit_of_coset_set_tagged_by_conjugacy_class() {
        let g = s3();
        let h = enumerate_subgroups(&g).into_iter().find(|h| h.len() == 2).unwrap();
        let m = coset_gset(&g, &h);
        let os = orbits(&g, &m);
        assert_eq!(os.len(), 1);
        assert_eq!(os[0].stabilizer_class, conjugacy_class_rep(&g, &h));
        assert_eq!(os[0].stabilizer.len(), 2);
    }

    #[test]
    fn isomorphism_agrees_with_bijection_oracle() {
        let g = s3();
        let subs = enumerate_subgroups(&g);
        let mut corpus: Vec<GSet> = vec![GSet::empty(), GSet::point(&g), GSet::regular(&g)];
        for h in &subs {
            corpus.push(coset_gset(&g, h));
        }
        corpus.push(corpus[1].disjoint_union(&corpus[1]));
        for m in &corpus {
            for n in &corpus {
                let fast = gsets_isomorphic(&g, m, n);
                let slow = oracle::equivariant_bijection(&g, m, n).is_some();
                assert_eq!(fast, slow);
            }
        }
    }

    #[test]
    fn two_coset_enumerations_of_conjugates_are_isomorphic() {
        let g = s3();
        let subs: Vec<Subgroup> = enumerate_subgroups(&g).into_iter().filter(|h| h.len() == 2).collect();
        for a in &subs {
            for b in &subs {
                assert!(gsets_isomorphic(&g, &coset_gset(&g, a), &coset_gset(&g, b)));
            }
        }
        // different fixed-point counts distinguish
        let z2 = FiniteGroup::cyclic(2);
        let two_fixed = GSet::point(&z2).disjoint_union(&GSet::point(&z2));
        assert!(!gsets_isomorphic(&z2, &GSet::regular(&z2), &two_fixed));
    }

    #[test]
    fn subgroup_poset_has_initial_object() {
        let g = d4();
        let p = GPoset::of_subgroups(&g, &enumerate_subgroups(&g)).unwrap();
        assert_eq!(p.initial_object(), Some(0));
        assert_eq!(p.size(), 10);
    }

    #[test]
    fn poset_opposite_flips_initial_and_terminal() {
        let g = FiniteGroup::cyclic(2);
        let p = GPoset::of_subgroups(&g, &enumerate_subgroups(&g)).unwrap();
        let op = p.opposite();
        assert_eq!(op.initial_object(), Some(1));
    }

    proptest! {
        // relabelling the carrier must not change the isomorphism type
        #[test]
        fn isomorphism_stable_under_relabelling(seed in 0u64..64) {
            use rand::{SeedableRng, seq::SliceRandom};
            let g = s3();
            let subs = enumerate_subgroups(&g);
            let h = &subs[(seed as usize) % subs.len()];
            let m = coset_gset(&g, h).disjoint_union(&GSet::point(&g));
            let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
            let mut perm: Vec<usize> = (0..m.size()).collect();
            perm.shuffle(&mut rng);
            let mut inv = vec![0usize; m.size()];
            for (i, &p) in perm.iter().enumerate() { inv[p] = i; }
            let act: Vec<Vec<usize>> = (0..m.size())
                .map(|x| g.elements().map(|gg| perm[m.apply(inv[x], gg)]).collect())
                .collect();
            let relabelled = GSet::new(&g, act).unwrap();
            prop_assert!(gsets_isomorphic(&g, &m, &relabelled));
        }

        #[test]
        fn orbit_index_sum_is_carrier_size(seed in 0u64..64) {
            let g = d4();
            let subs = enumerate_subgroups(&g);
            let a = &subs[(seed as usize) % subs.len()];
            let b = &subs[(seed as usize / 7) % subs.len()];
            let m = coset_gset(&g, a).disjoint_union(&coset_gset(&g, b));
            let total: usize = orbits(&g, &m).iter().map(|o| g.order() / o.stabilizer.len()).sum();
            prop_assert_eq!(total, m.size());
        }
    }
}
