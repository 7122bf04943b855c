//! Finite categories, functors, presheaves, natural transformations,
//! comma categories, (co)limits and pointwise Kan extensions.
//!
//! Categories are dense tables: morphisms are global indices, composition is
//! a lookup. All higher operations (naturality search, limits, Kan
//! extensions) reduce to either union-find or enumeration of solutions of a
//! functional constraint network, so they are deterministic and budgeted.

use crate::{BudgetExceeded, Budgets};
use std::collections::HashMap;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CatError {
    #[error("identity list has length {len}, expected {objects} objects")]
    BadIdentityList { len: usize, objects: usize },
    #[error("morphism {mor} has endpoint out of range")]
    BadEndpoints { mor: usize },
    #[error("identity morphism of object {object} is not an endomorphism")]
    BadIdentity { object: usize },
    #[error("composite of {f} o {g} missing although cod(g) = dom(f)")]
    MissingComposite { f: usize, g: usize },
    #[error("composite defined for non-composable pair ({f},{g})")]
    SpuriousComposite { f: usize, g: usize },
    #[error("composite of ({f},{g}) has wrong endpoints")]
    CompositeEndpoints { f: usize, g: usize },
    #[error("identity is not neutral for morphism {mor}")]
    IdentityNotNeutral { mor: usize },
    #[error("associativity fails at ({f},{g},{h})")]
    NotAssociative { f: usize, g: usize, h: usize },
    #[error("functor data has wrong length")]
    BadFunctorData,
    #[error("functor does not preserve endpoints of morphism {mor}")]
    FunctorEndpoints { mor: usize },
    #[error("functor does not preserve the identity of object {object}")]
    FunctorIdentity { object: usize },
    #[error("functor does not preserve the composite of ({f},{g})")]
    FunctorComposition { f: usize, g: usize },
    #[error("presheaf map for morphism {mor} has wrong length or range")]
    BadPresheafMap { mor: usize },
    #[error("presheaf does not send the identity of object {object} to the identity")]
    PresheafIdentity { object: usize },
    #[error("presheaf is not functorial at the pair ({f},{g})")]
    PresheafComposition { f: usize, g: usize },
    #[error("presheaves live on different categories")]
    CategoryMismatch,
    #[error("natural transformation components have wrong shape")]
    BadComponents,
    #[error("naturality square fails at morphism {mor}, element {element}")]
    NotNatural { mor: usize, element: usize },
    #[error(transparent)]
    Budget(#[from] BudgetExceeded),
}

/// A finite category with a dense composition table.
///
/// `compose(f, g)` is `f o g`, defined exactly when `cod(g) = dom(f)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FinCat {
    n_objects: usize,
    dom: Vec<usize>,
    cod: Vec<usize>,
    identity: Vec<usize>,
    comp: Vec<u32>, // f * n_mor + g, u32::MAX when undefined
    hom: Vec<Vec<usize>>, // x * n_objects + y, sorted morphism indices
    into: Vec<Vec<usize>>,
    out_of: Vec<Vec<usize>>,
}

const NO_COMP: u32 = u32::MAX;

impl FinCat {
    /// Builds and validates a category, computing composites with `compose`.
    pub fn build(
        n_objects: usize,
        morphisms: Vec<(usize, usize)>,
        identity: Vec<usize>,
        mut compose: impl FnMut(usize, usize) -> Option<usize>,
    ) -> Result<Self, CatError> {
        let n_mor = morphisms.len();
        let mut comp = vec![NO_COMP; n_mor * n_mor];
        for f in 0..n_mor {
            for g in 0..n_mor {
                if morphisms[g].1 == morphisms[f].0 {
                    let fg = compose(f, g).ok_or(CatError::MissingComposite { f, g })?;
                    comp[f * n_mor + g] = fg as u32;
                }
            }
        }
        Self::from_table(n_objects, morphisms, identity, comp)
    }

    /// Builds from an explicit sparse list of composition triples (f, g, f o g).
    pub fn from_sparse(
        n_objects: usize,
        morphisms: Vec<(usize, usize)>,
        identity: Vec<usize>,
        triples: &[(usize, usize, usize)],
    ) -> Result<Self, CatError> {
        let n_mor = morphisms.len();
        let mut comp = vec![NO_COMP; n_mor * n_mor];
        for &(f, g, fg) in triples {
            if f >= n_mor || g >= n_mor || fg >= n_mor {
                return Err(CatError::BadEndpoints { mor: f.max(g).max(fg) });
            }
            comp[f * n_mor + g] = fg as u32;
        }
        Self::from_table(n_objects, morphisms, identity, comp)
    }

    fn from_table(
        n_objects: usize,
        morphisms: Vec<(usize, usize)>,
        identity: Vec<usize>,
        comp: Vec<u32>,
    ) -> Result<Self, CatError> {
        let n_mor = morphisms.len();
        if identity.len() != n_objects {
            return Err(CatError::BadIdentityList { len: identity.len(), objects: n_objects });
        }
        for (m, &(d, c)) in morphisms.iter().enumerate() {
            if d >= n_objects || c >= n_objects {
                return Err(CatError::BadEndpoints { mor: m });
            }
        }
        for (x, &i) in identity.iter().enumerate() {
            if i >= n_mor || morphisms[i] != (x, x) {
                return Err(CatError::BadIdentity { object: x });
            }
        }
        let dom: Vec<usize> = morphisms.iter().map(|m| m.0).collect();
        let cod: Vec<usize> = morphisms.iter().map(|m| m.1).collect();
        // composition defined exactly for composable pairs, with the right endpoints
        for f in 0..n_mor {
            for g in 0..n_mor {
                let entry = comp[f * n_mor + g];
                if cod[g] == dom[f] {
                    if entry == NO_COMP {
                        return Err(CatError::MissingComposite { f, g });
                    }
                    let fg = entry as usize;
                    if fg >= n_mor || dom[fg] != dom[g] || cod[fg] != cod[f] {
                        return Err(CatError::CompositeEndpoints { f, g });
                    }
                } else if entry != NO_COMP {
                    return Err(CatError::SpuriousComposite { f, g });
                }
            }
        }
        for f in 0..n_mor {
            if comp[f * n_mor + identity[dom[f]]] as usize != f
                || comp[identity[cod[f]] * n_mor + f] as usize != f
            {
                return Err(CatError::IdentityNotNeutral { mor: f });
            }
        }
        let mut into: Vec<Vec<usize>> = vec![Vec::new(); n_objects];
        let mut out_of: Vec<Vec<usize>> = vec![Vec::new(); n_objects];
        let mut hom: Vec<Vec<usize>> = vec![Vec::new(); n_objects * n_objects];
        for m in 0..n_mor {
            into[cod[m]].push(m);
            out_of[dom[m]].push(m);
            hom[dom[m] * n_objects + cod[m]].push(m);
        }
        let cat = FinCat { n_objects, dom, cod, identity, comp, hom, into, out_of };
        // associativity over composable triples only
        for f in 0..n_mor {
            for &g in &cat.into[cat.dom[f]] {
                let fg = cat.comp[f * n_mor + g] as usize;
                for &h in &cat.into[cat.dom[g]] {
                    let gh = cat.comp[g * n_mor + h] as usize;
                    if cat.comp[fg * n_mor + h] != cat.comp[f * n_mor + gh] {
                        return Err(CatError::NotAssociative { f, g, h });
                    }
                }
            }
        }
        Ok(cat)
    }

    /// Discrete category on `n` objects.
    pub fn discrete(n: usize) -> Self {
        let morphisms: Vec<(usize, usize)> = (0..n).map(|x| (x, x)).collect();
        let identity: Vec<usize> = (0..n).collect();
        Self::build(n, morphisms, identity, |f, _| Some(f)).expect("discrete category is valid")
    }

    /// The category of a finite preorder: one morphism x -> y when le[x][y].
    pub fn from_preorder(le: &[Vec<bool>]) -> Result<Self, CatError> {
        let n = le.len();
        let mut morphisms = Vec::new();
        let mut index = vec![vec![usize::MAX; n]; n];
        for x in 0..n {
            for y in 0..n {
                if le[x][y] {
                    index[x][y] = morphisms.len();
                    morphisms.push((x, y));
                }
            }
        }
        let identity: Vec<usize> = (0..n).map(|x| index[x][x]).collect();
        let idx = index.clone();
        let morphs = morphisms.clone();
        Self::build(n, morphisms, identity, move |f, g| {
            let (d, _) = morphs[g];
            let (_, c) = morphs[f];
            let m = idx[d][c];
            (m != usize::MAX).then_some(m)
        })
    }

    pub fn n_objects(&self) -> usize {
        self.n_objects
    }

    pub fn n_morphisms(&self) -> usize {
        self.dom.len()
    }

    pub fn dom(&self, f: usize) -> usize {
        self.dom[f]
    }

    pub fn cod(&self, f: usize) -> usize {
        self.cod[f]
    }

    pub fn identity(&self, x: usize) -> usize {
        self.identity[x]
    }

    pub fn compose(&self, f: usize, g: usize) -> Option<usize> {
        let e = self.comp[f * self.dom.len() + g];
        (e != NO_COMP).then_some(e as usize)
    }

    pub fn hom(&self, x: usize, y: usize) -> &[usize] {
        &self.hom[x * self.n_objects + y]
    }

    pub fn morphisms_into(&self, x: usize) -> &[usize] {
        &self.into[x]
    }

    pub fn morphisms_out_of(&self, x: usize) -> &[usize] {
        &self.out_of[x]
    }

    /// The opposite category; morphism indices are unchanged.
    pub fn opposite(&self) -> FinCat {
        let n_mor = self.dom.len();
        let mut comp = vec![NO_COMP; n_mor * n_mor];
        for f in 0..n_mor {
            for g in 0..n_mor {
                let e = self.comp[g * n_mor + f];
                if e != NO_COMP {
                    comp[f * n_mor + g] = e;
                }
            }
        }
        let morphisms: Vec<(usize, usize)> = (0..n_mor).map(|m| (self.cod[m], self.dom[m])).collect();
        Self::from_table(self.n_objects, morphisms, self.identity.clone(), comp)
            .expect("opposite of a valid category is valid")
    }

    /// Nonempty, every pair of objects has a cocone, and every parallel pair
    /// of morphisms is coequalized by some morphism.
    pub fn is_filtered(&self) -> bool {
        if self.n_objects == 0 {
            return false;
        }
        for x in 0..self.n_objects {
            for y in 0..self.n_objects {
                let has_cocone = (0..self.n_objects)
                    .any(|z| !self.hom(x, z).is_empty() && !self.hom(y, z).is_empty());
                if !has_cocone {
                    return false;
                }
            }
        }
        for x in 0..self.n_objects {
            for y in 0..self.n_objects {
                let par = self.hom(x, y);
                for (i, &u) in par.iter().enumerate() {
                    for &v in &par[i + 1..] {
                        let coeq = self
                            .out_of[y]
                            .iter()
                            .any(|&w| self.compose(w, u) == self.compose(w, v));
                        if !coeq {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }
}

/// A covariant functor between finite categories, validated at construction.
#[derive(Debug, Clone)]
pub struct CFunctor {
    source: Arc<FinCat>,
    target: Arc<FinCat>,
    obj_map: Vec<usize>,
    mor_map: Vec<usize>,
}

impl CFunctor {
    pub fn new(
        source: Arc<FinCat>,
        target: Arc<FinCat>,
        obj_map: Vec<usize>,
        mor_map: Vec<usize>,
    ) -> Result<Self, CatError> {
        if obj_map.len() != source.n_objects() || mor_map.len() != source.n_morphisms() {
            return Err(CatError::BadFunctorData);
        }
        for m in 0..source.n_morphisms() {
            let fm = mor_map[m];
            if fm >= target.n_morphisms()
                || target.dom(fm) != obj_map[source.dom(m)]
                || target.cod(fm) != obj_map[source.cod(m)]
            {
                return Err(CatError::FunctorEndpoints { mor: m });
            }
        }
        for x in 0..source.n_objects() {
            if mor_map[source.identity(x)] != target.identity(obj_map[x]) {
                return Err(CatError::FunctorIdentity { object: x });
            }
        }
        for f in 0..source.n_morphisms() {
            for &g in source.morphisms_into(source.dom(f)) {
                let fg = source.compose(f, g).expect("composable");
                let lhs = mor_map[fg];
                let rhs = target.compose(mor_map[f], mor_map[g]).expect("images composable");
                if lhs != rhs {
                    return Err(CatError::FunctorComposition { f, g });
                }
            }
        }
        Ok(CFunctor { source, target, obj_map, mor_map })
    }

    pub fn identity(cat: Arc<FinCat>) -> Self {
        let obj_map = (0..cat.n_objects()).collect();
        let mor_map = (0..cat.n_morphisms()).collect();
        CFunctor { source: cat.clone(), target: cat, obj_map, mor_map }
    }

    pub fn source(&self) -> &Arc<FinCat> {
        &self.source
    }

    pub fn target(&self) -> &Arc<FinCat> {
        &self.target
    }

    pub fn on_object(&self, x: usize) -> usize {
        self.obj_map[x]
    }

    pub fn on_morphism(&self, m: usize) -> usize {
        self.mor_map[m]
    }
}

/// A presheaf of finite sets: contravariant, with `map(u)` going from
/// `F(cod u)` to `F(dom u)`. Elements of `F(x)` are `0..size(x)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Presheaf {
    cat: Arc<FinCat>,
    sizes: Vec<usize>,
    maps: Vec<Vec<usize>>,
}

impl Presheaf {
    pub fn new(cat: Arc<FinCat>, sizes: Vec<usize>, maps: Vec<Vec<usize>>) -> Result<Self, CatError> {
        if sizes.len() != cat.n_objects() || maps.len() != cat.n_morphisms() {
            return Err(CatError::BadPresheafMap { mor: maps.len() });
        }
        for m in 0..cat.n_morphisms() {
            if maps[m].len() != sizes[cat.cod(m)] || maps[m].iter().any(|&v| v >= sizes[cat.dom(m)]) {
                return Err(CatError::BadPresheafMap { mor: m });
            }
        }
        for x in 0..cat.n_objects() {
            let id = cat.identity(x);
            if maps[id].iter().enumerate().any(|(a, &b)| a != b) {
                return Err(CatError::PresheafIdentity { object: x });
            }
        }
        for f in 0..cat.n_morphisms() {
            for &g in cat.morphisms_into(cat.dom(f)) {
                let fg = cat.compose(f, g).expect("composable");
                for a in 0..sizes[cat.cod(f)] {
                    if maps[fg][a] != maps[g][maps[f][a]] {
                        return Err(CatError::PresheafComposition { f, g });
                    }
                }
            }
        }
        Ok(Presheaf { cat, sizes, maps })
    }

    /// Constant presheaf with `k` elements and identity restriction maps.
    pub fn constant(cat: Arc<FinCat>, k: usize) -> Self {
        let sizes = vec![k; cat.n_objects()];
        let maps = (0..cat.n_morphisms()).map(|_| (0..k).collect()).collect();
        Presheaf { cat, sizes, maps }
    }

    pub fn empty(cat: Arc<FinCat>) -> Self {
        Self::constant(cat, 0)
    }

    pub fn cat(&self) -> &Arc<FinCat> {
        &self.cat
    }

    pub fn size(&self, x: usize) -> usize {
        self.sizes[x]
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn apply(&self, u: usize, a: usize) -> usize {
        self.maps[u][a]
    }

    pub fn map(&self, u: usize) -> &[usize] {
        &self.maps[u]
    }

    pub fn total_elements(&self) -> usize {
        self.sizes.iter().sum()
    }

    /// Objectwise disjoint union.
    pub fn coproduct(&self, other: &Presheaf) -> Result<Presheaf, CatError> {
        if !Arc::ptr_eq(&self.cat, &other.cat) && self.cat != other.cat {
            return Err(CatError::CategoryMismatch);
        }
        let cat = self.cat.clone();
        let sizes: Vec<usize> = (0..cat.n_objects()).map(|x| self.sizes[x] + other.sizes[x]).collect();
        let maps: Vec<Vec<usize>> = (0..cat.n_morphisms())
            .map(|m| {
                let shift = self.sizes[cat.dom(m)];
                self.maps[m]
                    .iter()
                    .copied()
                    .chain(other.maps[m].iter().map(|&v| v + shift))
                    .collect()
            })
            .collect();
        Ok(Presheaf { cat, sizes, maps })
    }
}

/// The representable presheaf Hom(-, x); elements of the value at `y` are
/// positions in the canonical hom list `cat.hom(y, x)`.
pub fn representable(cat: &Arc<FinCat>, x: usize) -> Presheaf {
    let sizes: Vec<usize> = (0..cat.n_objects()).map(|y| cat.hom(y, x).len()).collect();
    let maps: Vec<Vec<usize>> = (0..cat.n_morphisms())
        .map(|u| {
            let (y, z) = (cat.dom(u), cat.cod(u));
            cat.hom(z, x)
                .iter()
                .map(|&w| {
                    let wu = cat.compose(w, u).expect("composable");
                    cat.hom(y, x).binary_search(&wu).expect("hom lists are sorted")
                })
                .collect()
        })
        .collect();
    Presheaf { cat: cat.clone(), sizes, maps }
}

/// A natural transformation, stored as per-object component functions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NatTrans {
    pub components: Vec<Vec<usize>>,
}

impl NatTrans {
    /// Checks shape and naturality of explicit components from `f` to `h`.
    pub fn new(f: &Presheaf, h: &Presheaf, components: Vec<Vec<usize>>) -> Result<Self, CatError> {
        let cat = f.cat();
        if components.len() != cat.n_objects() {
            return Err(CatError::BadComponents);
        }
        for x in 0..cat.n_objects() {
            if components[x].len() != f.size(x) || components[x].iter().any(|&v| v >= h.size(x)) {
                return Err(CatError::BadComponents);
            }
        }
        for u in 0..cat.n_morphisms() {
            let (x, y) = (cat.dom(u), cat.cod(u));
            for a in 0..f.size(y) {
                if components[x][f.apply(u, a)] != h.apply(u, components[y][a]) {
                    return Err(CatError::NotNatural { mor: u, element: a });
                }
            }
        }
        Ok(NatTrans { components })
    }

    pub fn is_bijective(&self, f: &Presheaf, h: &Presheaf) -> bool {
        self.components.iter().enumerate().all(|(x, c)| {
            if f.size(x) != h.size(x) {
                return false;
            }
            let mut seen = vec![false; h.size(x)];
            c.iter().all(|&v| !std::mem::replace(&mut seen[v], true))
        })
    }

    pub fn identity(f: &Presheaf) -> Self {
        NatTrans { components: f.sizes().iter().map(|&s| (0..s).collect()).collect() }
    }

    /// Vertical composite `other . self` (apply `self` first).
    pub fn then(&self, other: &NatTrans) -> NatTrans {
        let components = self
            .components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| a.iter().map(|&v| b[v]).collect())
            .collect();
        NatTrans { components }
    }
}

/// The Yoneda transformation Hom(-, x) -> F determined by `a` in `F(x)`.
pub fn yoneda_nat(f: &Presheaf, x: usize, a: usize) -> NatTrans {
    let cat = f.cat();
    let components = (0..cat.n_objects())
        .map(|y| cat.hom(y, x).iter().map(|&u| f.apply(u, a)).collect())
        .collect();
    NatTrans { components }
}

// ---------------------------------------------------------------------------
// Functional constraint networks.
//
// A network has variables with finite domains and directed constraints
// "v[j] = table(v[i])". Natural-transformation sets, limits and pointwise
// right Kan extensions are all solution sets of such networks. Enumeration is
// depth-first with forced-value propagation, which makes Yoneda-style
// instances (where one choice determines a whole orbit) cheap.
// ---------------------------------------------------------------------------

pub(crate) struct Network {
    domains: Vec<usize>,
    edges: Vec<Vec<(usize, Vec<usize>)>>, // per source var: (target var, value table)
}

impl Network {
    pub(crate) fn new(domains: Vec<usize>) -> Self {
        let n = domains.len();
        Network { domains, edges: vec![Vec::new(); n] }
    }

    pub(crate) fn add_edge(&mut self, from: usize, to: usize, table: Vec<usize>) {
        debug_assert_eq!(table.len(), self.domains[from]);
        debug_assert!(table.iter().all(|&v| v < self.domains[to]));
        self.edges[from].push((to, table));
    }

    /// All solutions, in lexicographic order of the assignment vector,
    /// exploring at most `budget` assignments.
    pub(crate) fn enumerate(&self, budget: u64, context: &'static str) -> Result<Vec<Vec<usize>>, BudgetExceeded> {
        let n = self.domains.len();
        if self.domains.iter().any(|&d| d == 0) {
            return Ok(Vec::new());
        }
        let mut assign: Vec<i64> = vec![-1; n];
        let mut out = Vec::new();
        let mut nodes: u64 = 0;
        self.dfs(&mut assign, 0, &mut nodes, budget, context, &mut out)?;
        Ok(out)
    }

    fn propagate(
        &self,
        assign: &mut [i64],
        start: usize,
        trail: &mut Vec<usize>,
        nodes: &mut u64,
        budget: u64,
        context: &'static str,
    ) -> Result<bool, BudgetExceeded> {
        let mut queue = vec![start];
        while let Some(i) = queue.pop() {
            let v = assign[i] as usize;
            for (j, table) in &self.edges[i] {
                let w = table[v] as i64;
                if assign[*j] == -1 {
                    *nodes += 1;
                    if *nodes > budget {
                        return Err(BudgetExceeded { context, limit: budget, nodes: *nodes });
                    }
                    assign[*j] = w;
                    trail.push(*j);
                    queue.push(*j);
                } else if assign[*j] != w {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    fn dfs(
        &self,
        assign: &mut Vec<i64>,
        hint: usize,
        nodes: &mut u64,
        budget: u64,
        context: &'static str,
        out: &mut Vec<Vec<usize>>,
    ) -> Result<(), BudgetExceeded> {
        let next = (hint..assign.len()).find(|&i| assign[i] == -1);
        let Some(i) = next else {
            out.push(assign.iter().map(|&v| v as usize).collect());
            return Ok(());
        };
        for v in 0..self.domains[i] {
            *nodes += 1;
            if *nodes > budget {
                return Err(BudgetExceeded { context, limit: budget, nodes: *nodes });
            }
            let mut trail = vec![i];
            assign[i] = v as i64;
            let consistent = self.propagate(assign, i, &mut trail, nodes, budget, context)?;
            if consistent {
                self.dfs(assign, i + 1, nodes, budget, context, out)?;
            }
            for t in trail {
                assign[t] = -1;
            }
        }
        Ok(())
    }
}

/// All natural transformations from `f` to `h`, in canonical order.
///
/// Enumerated element-by-element with naturality propagation; exceeding the
/// node budget is an explicit error, never a silent truncation.
pub fn nat_set(f: &Presheaf, h: &Presheaf, budgets: &Budgets) -> Result<Vec<NatTrans>, CatError> {
    if f.cat().as_ref() != h.cat().as_ref() {
        return Err(CatError::CategoryMismatch);
    }
    let cat = f.cat();
    let n_obj = cat.n_objects();
    let mut offset = vec![0usize; n_obj + 1];
    for x in 0..n_obj {
        offset[x + 1] = offset[x] + f.size(x);
    }
    let mut domains = Vec::with_capacity(offset[n_obj]);
    for x in 0..n_obj {
        domains.extend(std::iter::repeat(h.size(x)).take(f.size(x)));
    }
    let mut net = Network::new(domains);
    for u in 0..cat.n_morphisms() {
        let (x, y) = (cat.dom(u), cat.cod(u));
        for a in 0..f.size(y) {
            let from = offset[y] + a;
            let to = offset[x] + f.apply(u, a);
            net.add_edge(from, to, h.map(u).to_vec());
        }
    }
    let solutions = net.enumerate(budgets.nat_nodes, "natural-transformation search")?;
    Ok(solutions
        .into_iter()
        .map(|sol| {
            let components = (0..n_obj).map(|x| sol[offset[x]..offset[x + 1]].to_vec()).collect();
            NatTrans { components }
        })
        .collect())
}

/// Searches for a natural isomorphism, returning the first one in canonical
/// order if any exists.
pub fn natural_isomorphism(f: &Presheaf, h: &Presheaf, budgets: &Budgets) -> Result<Option<NatTrans>, CatError> {
    if f.sizes() != h.sizes() {
        return Ok(None);
    }
    Ok(nat_set(f, h, budgets)?.into_iter().find(|t| t.is_bijective(f, h)))
}

/// A comma category together with its object decode table and the projection
/// functor to the functor's source.
pub struct Comma {
    pub cat: Arc<FinCat>,
    /// Per comma object: (morphism in the target category, source object).
    pub objects: Vec<(usize, usize)>,
    pub projection: CFunctor,
}

/// The category under `d`: objects are pairs (t: d -> alpha(x), x); a
/// morphism (t, x) -> (t', x') is u: x -> x' with t' = alpha(u) o t.
pub fn comma_under(alpha: &CFunctor, d: usize) -> Comma {
    let src = alpha.source().clone();
    let tgt = alpha.target();
    let mut objects = Vec::new();
    let mut obj_index: HashMap<(usize, usize), usize> = HashMap::new();
    for x in 0..src.n_objects() {
        for &t in tgt.hom(d, alpha.on_object(x)) {
            obj_index.insert((t, x), objects.len());
            objects.push((t, x));
        }
    }
    // a comma morphism is determined by (u, t) with dom(u) = x
    let mut morphisms = Vec::new();
    let mut decode = Vec::new();
    let mut mor_index: HashMap<(usize, usize), usize> = HashMap::new();
    for u in 0..src.n_morphisms() {
        let (x, x1) = (src.dom(u), src.cod(u));
        for &t in tgt.hom(d, alpha.on_object(x)) {
            let t1 = tgt.compose(alpha.on_morphism(u), t).expect("composable");
            let a = obj_index[&(t, x)];
            let b = obj_index[&(t1, x1)];
            mor_index.insert((u, t), morphisms.len());
            morphisms.push((a, b));
            decode.push((u, t));
        }
    }
    let identity: Vec<usize> =
        objects.iter().map(|&(t, x)| mor_index[&(src.identity(x), t)]).collect();
    let decode_for_comp = decode.clone();
    let src_for_comp = src.clone();
    let mor_index_for_comp = mor_index.clone();
    let cat = FinCat::build(objects.len(), morphisms, identity, move |f, g| {
        let (uf, _tf) = decode_for_comp[f];
        let (ug, tg) = decode_for_comp[g];
        let u = src_for_comp.compose(uf, ug)?;
        mor_index_for_comp.get(&(u, tg)).copied()
    })
    .expect("comma construction yields a valid category");
    let cat = Arc::new(cat);
    let obj_map: Vec<usize> = objects.iter().map(|&(_, x)| x).collect();
    let mor_map: Vec<usize> = decode.iter().map(|&(u, _)| u).collect();
    let projection = CFunctor::new(cat.clone(), src, obj_map, mor_map)
        .expect("comma projection is a functor");
    Comma { cat, objects, projection }
}

/// The category over `d`: objects are pairs (t: alpha(x) -> d, x); a
/// morphism (t, x) -> (t', x') is u: x -> x' with t = t' o alpha(u).
pub fn comma_over(alpha: &CFunctor, d: usize) -> Comma {
    let src = alpha.source().clone();
    let tgt = alpha.target();
    let mut objects = Vec::new();
    let mut obj_index: HashMap<(usize, usize), usize> = HashMap::new();
    for x in 0..src.n_objects() {
        for &t in tgt.hom(alpha.on_object(x), d) {
            obj_index.insert((t, x), objects.len());
            objects.push((t, x));
        }
    }
    // a comma morphism is determined by (u, t') with cod(u) = x'
    let mut morphisms = Vec::new();
    let mut decode = Vec::new();
    let mut mor_index: HashMap<(usize, usize), usize> = HashMap::new();
    for u in 0..src.n_morphisms() {
        let (x, x1) = (src.dom(u), src.cod(u));
        for &t1 in tgt.hom(alpha.on_object(x1), d) {
            let t = tgt.compose(t1, alpha.on_morphism(u)).expect("composable");
            let a = obj_index[&(t, x)];
            let b = obj_index[&(t1, x1)];
            mor_index.insert((u, t1), morphisms.len());
            morphisms.push((a, b));
            decode.push((u, t1));
        }
    }
    let identity: Vec<usize> =
        objects.iter().map(|&(t, x)| mor_index[&(src.identity(x), t)]).collect();
    let decode_for_comp = decode.clone();
    let src_for_comp = src.clone();
    let mor_index_for_comp = mor_index.clone();
    let cat = FinCat::build(objects.len(), morphisms, identity, move |f, g| {
        let (uf, tf) = decode_for_comp[f];
        let (ug, _tg) = decode_for_comp[g];
        let u = src_for_comp.compose(uf, ug)?;
        mor_index_for_comp.get(&(u, tf)).copied()
    })
    .expect("comma construction yields a valid category");
    let cat = Arc::new(cat);
    let obj_map: Vec<usize> = objects.iter().map(|&(_, x)| x).collect();
    let mor_map: Vec<usize> = decode.iter().map(|&(u, _)| u).collect();
    let projection = CFunctor::new(cat.clone(), src, obj_map, mor_map)
        .expect("comma projection is a functor");
    Comma { cat, objects, projection }
}

/// Colimit of a presheaf: the disjoint union of all values modulo the span
/// relation generated by the restriction maps.
pub struct Colimit {
    pub size: usize,
    /// Per object, the cocone map F(x) -> colimit.
    pub cocone: Vec<Vec<usize>>,
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, x: usize) -> usize {
        if self.parent[x] != x {
            let root = self.find(self.parent[x]);
            self.parent[x] = root;
        }
        self.parent[x]
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        // keep the smaller index as root so class numbering is canonical
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi] = lo;
        true
    }
}

pub fn colimit(f: &Presheaf) -> Colimit {
    let cat = f.cat();
    let n_obj = cat.n_objects();
    let mut offset = vec![0usize; n_obj + 1];
    for x in 0..n_obj {
        offset[x + 1] = offset[x] + f.size(x);
    }
    let total = offset[n_obj];
    let mut uf = UnionFind::new(total);
    for u in 0..cat.n_morphisms() {
        let (x, y) = (cat.dom(u), cat.cod(u));
        for a in 0..f.size(y) {
            uf.union(offset[y] + a, offset[x] + f.apply(u, a));
        }
    }
    let mut class_of = vec![usize::MAX; total];
    let mut size = 0;
    for i in 0..total {
        let r = uf.find(i);
        if class_of[r] == usize::MAX {
            class_of[r] = size;
            size += 1;
        }
        class_of[i] = class_of[r];
    }
    let cocone = (0..n_obj)
        .map(|x| (0..f.size(x)).map(|a| class_of[offset[x] + a]).collect())
        .collect();
    Colimit { size, cocone }
}

/// Limit of a presheaf: all object-indexed families compatible under every
/// restriction map, in canonical order.
pub struct Limit {
    /// Each element is a choice vector indexed by object.
    pub elements: Vec<Vec<usize>>,
}

pub fn limit(f: &Presheaf, budgets: &Budgets) -> Result<Limit, CatError> {
    let cat = f.cat();
    let mut net = Network::new(f.sizes().to_vec());
    for u in 0..cat.n_morphisms() {
        // the value at cod determines the value at dom
        net.add_edge(cat.cod(u), cat.dom(u), f.map(u).to_vec());
    }
    let elements = net.enumerate(budgets.nat_nodes, "limit enumeration")?;
    Ok(Limit { elements })
}

/// Restriction (precomposition) of a presheaf along a functor.
pub fn restrict(alpha: &CFunctor, f: &Presheaf) -> Result<Presheaf, CatError> {
    if f.cat().as_ref() != alpha.target().as_ref() {
        return Err(CatError::CategoryMismatch);
    }
    let src = alpha.source().clone();
    let sizes: Vec<usize> = (0..src.n_objects()).map(|x| f.size(alpha.on_object(x))).collect();
    let maps: Vec<Vec<usize>> =
        (0..src.n_morphisms()).map(|u| f.map(alpha.on_morphism(u)).to_vec()).collect();
    Presheaf::new(src, sizes, maps)
}

/// A left Kan extension with its adjunction unit.
pub struct LeftKan {
    pub extension: Presheaf,
    /// Unit components F(x) -> LK(alpha(x)).
    pub unit: Vec<Vec<usize>>,
}

/// Pointwise left Kan extension along `alpha`, computed as a colimit over
/// the under-comma category of each target object.
pub fn left_kan(alpha: &CFunctor, f: &Presheaf) -> Result<LeftKan, CatError> {
    if f.cat().as_ref() != alpha.source().as_ref() {
        return Err(CatError::CategoryMismatch);
    }
    let tgt = alpha.target().clone();
    let src = alpha.source();
    // per target object: comma data and element classes
    let mut commas = Vec::with_capacity(tgt.n_objects());
    for d in 0..tgt.n_objects() {
        let comma = comma_under(alpha, d);
        // diagram over the comma category: (t, x) has value set F(x)
        let n = comma.objects.len();
        let mut offset = vec![0usize; n + 1];
        for (i, &(_, x)) in comma.objects.iter().enumerate() {
            offset[i + 1] = offset[i] + f.size(x);
        }
        let mut uf = UnionFind::new(offset[n]);
        for m in 0..comma.cat.n_morphisms() {
            let (i, j) = (comma.cat.dom(m), comma.cat.cod(m));
            let u = comma.projection.on_morphism(m);
            // a' in F at cod is identified with F(u)(a') at dom
            let size_cod = f.size(comma.objects[j].1);
            for a in 0..size_cod {
                uf.union(offset[j] + a, offset[i] + f.apply(u, a));
            }
        }
        let total = offset[n];
        let mut class_of = vec![usize::MAX; total];
        let mut size = 0;
        for i in 0..total {
            let r = uf.find(i);
            if class_of[r] == usize::MAX {
                class_of[r] = size;
                size += 1;
            }
            class_of[i] = class_of[r];
        }
        let mut obj_index: HashMap<(usize, usize), usize> = HashMap::new();
        for (i, &ob) in comma.objects.iter().enumerate() {
            obj_index.insert(ob, i);
        }
        commas.push((comma, offset, class_of, size, obj_index));
    }
    let sizes: Vec<usize> = commas.iter().map(|c| c.3).collect();
    // restriction along v: d' -> d reindexes (t, x) to (t o v, x)
    let maps: Vec<Vec<usize>> = (0..tgt.n_morphisms())
        .map(|v| {
            let (d1, d) = (tgt.dom(v), tgt.cod(v));
            let (comma_d, offset_d, class_d, size_d, _) = &commas[d];
            let (_, offset_d1, class_d1, _, index_d1) = &commas[d1];
            let mut table = vec![usize::MAX; *size_d];
            for (i, &(t, x)) in comma_d.objects.iter().enumerate() {
                let tv = tgt.compose(t, v).expect("composable");
                let i1 = index_d1[&(tv, x)];
                for a in 0..f.size(x) {
                    let from = class_d[offset_d[i] + a];
                    let to = class_d1[offset_d1[i1] + a];
                    debug_assert!(table[from] == usize::MAX || table[from] == to);
                    table[from] = to;
                }
            }
            debug_assert!(table.iter().all(|&v| v != usize::MAX));
            table
        })
        .collect();
    let extension = Presheaf::new(tgt, sizes, maps)?;
    let unit: Vec<Vec<usize>> = (0..src.n_objects())
        .map(|x| {
            let d = alpha.on_object(x);
            let (_, offset, class_of, _, index) = &commas[d];
            let i = index[&(alpha.target().identity(d), x)];
            (0..f.size(x)).map(|a| class_of[offset[i] + a]).collect()
        })
        .collect();
    Ok(LeftKan { extension, unit })
}

/// A right Kan extension with its adjunction counit.
pub struct RightKan {
    pub extension: Presheaf,
    /// Counit components RK(alpha(x)) -> F(x).
    pub counit: Vec<Vec<usize>>,
}

/// Pointwise right Kan extension along `alpha`, computed as a limit over the
/// over-comma category of each target object.
pub fn right_kan(alpha: &CFunctor, f: &Presheaf, budgets: &Budgets) -> Result<RightKan, CatError> {
    if f.cat().as_ref() != alpha.source().as_ref() {
        return Err(CatError::CategoryMismatch);
    }
    let tgt = alpha.target().clone();
    let src = alpha.source();
    struct PerObject {
        comma: Comma,
        families: Vec<Vec<usize>>,
        family_index: HashMap<Vec<usize>, usize>,
        obj_index: HashMap<(usize, usize), usize>,
    }
    let mut per = Vec::with_capacity(tgt.n_objects());
    for d in 0..tgt.n_objects() {
        let comma = comma_over(alpha, d);
        let domains: Vec<usize> = comma.objects.iter().map(|&(_, x)| f.size(x)).collect();
        let mut net = Network::new(domains);
        for m in 0..comma.cat.n_morphisms() {
            let (i, j) = (comma.cat.dom(m), comma.cat.cod(m));
            let u = comma.projection.on_morphism(m);
            // the value at cod determines the value at dom through F(u)
            net.add_edge(j, i, f.map(u).to_vec());
        }
        let families = net.enumerate(budgets.nat_nodes, "right Kan extension")?;
        let family_index: HashMap<Vec<usize>, usize> =
            families.iter().cloned().enumerate().map(|(i, fam)| (fam, i)).collect();
        let obj_index: HashMap<(usize, usize), usize> =
            comma.objects.iter().copied().enumerate().map(|(i, ob)| (ob, i)).collect();
        per.push(PerObject { comma, families, family_index, obj_index });
    }
    let sizes: Vec<usize> = per.iter().map(|p| p.families.len()).collect();
    let maps: Vec<Vec<usize>> = (0..tgt.n_morphisms())
        .map(|v| {
            let (d1, d) = (tgt.dom(v), tgt.cod(v));
            per[d]
                .families
                .iter()
                .map(|fam| {
                    let restricted: Vec<usize> = per[d1]
                        .comma
                        .objects
                        .iter()
                        .map(|&(t, x)| {
                            let vt = tgt.compose(v, t).expect("composable");
                            fam[per[d].obj_index[&(vt, x)]]
                        })
                        .collect();
                    *per[d1]
                        .family_index
                        .get(&restricted)
                        .expect("restriction of a compatible family is compatible")
                })
                .collect()
        })
        .collect();
    let extension = Presheaf::new(tgt.clone(), sizes, maps)?;
    let counit: Vec<Vec<usize>> = (0..src.n_objects())
        .map(|x| {
            let d = alpha.on_object(x);
            let i = per[d].obj_index[&(tgt.identity(d), x)];
            per[d].families.iter().map(|fam| fam[i]).collect()
        })
        .collect();
    Ok(RightKan { extension, counit })
}

/// Seeded random presheaf: a random quotient of a random finite coproduct of
/// representables. Every presheaf arises this way, so the corpus generator
/// covers sheaves and non-sheaves alike.
pub fn random_presheaf(cat: &Arc<FinCat>, rng: &mut impl rand::Rng, max_generators: usize, glue_pairs: usize) -> Presheaf {
    let k = rng.random_range(0..=max_generators);
    let mut f = Presheaf::empty(cat.clone());
    for _ in 0..k {
        let x = rng.random_range(0..cat.n_objects());
        f = f.coproduct(&representable(cat, x)).expect("same category");
    }
    if f.total_elements() == 0 {
        return f;
    }
    let n_obj = cat.n_objects();
    let mut offset = vec![0usize; n_obj + 1];
    for x in 0..n_obj {
        offset[x + 1] = offset[x] + f.size(x);
    }
    let total = offset[n_obj];
    let mut uf = UnionFind::new(total);
    let mut pending: Vec<(usize, usize, usize)> = Vec::new();
    for _ in 0..glue_pairs {
        let x = rng.random_range(0..n_obj);
        if f.size(x) == 0 {
            continue;
        }
        let a = rng.random_range(0..f.size(x));
        let b = rng.random_range(0..f.size(x));
        pending.push((x, a, b));
    }
    // close the relation under all restriction maps
    while let Some((y, a, b)) = pending.pop() {
        if !uf.union(offset[y] + a, offset[y] + b) {
            continue;
        }
        for &u in cat.morphisms_into(y) {
            pending.push((cat.dom(u), f.apply(u, a), f.apply(u, b)));
        }
    }
    let mut class_of = vec![usize::MAX; total];
    let mut next = vec![0usize; n_obj];
    for x in 0..n_obj {
        for a in 0..f.size(x) {
            let r = uf.find(offset[x] + a);
            if class_of[r] == usize::MAX {
                class_of[r] = next[x];
                next[x] += 1;
            }
            class_of[offset[x] + a] = class_of[r];
        }
    }
    let sizes: Vec<usize> = next;
    let maps: Vec<Vec<usize>> = (0..cat.n_morphisms())
        .map(|u| {
            let (x, y) = (cat.dom(u), cat.cod(u));
            let mut table = vec![usize::MAX; sizes[y]];
            for a in 0..f.size(y) {
                table[class_of[offset[y] + a]] = class_of[offset[x] + f.apply(u, a)];
            }
            table
        })
        .collect();
    Presheaf::new(cat.clone(), sizes, maps).expect("quotient of a presheaf is a presheaf")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Budgets;
    use rand::SeedableRng;

    fn group_cat(n: usize) -> Arc<FinCat> {
        // one object, morphisms = Z/n under addition
        let morphisms = vec![(0usize, 0usize); n];
        let identity = vec![0usize];
        Arc::new(FinCat::build(1, morphisms, identity, |f, g| Some((f + g) % n)).unwrap())
    }

    fn chain_two() -> Arc<FinCat> {
        // poset 0 < 1
        Arc::new(FinCat::from_preorder(&[vec![true, true], vec![false, true]]).unwrap())
    }

    #[test]
    fn representable_on_group_category() {
        let cat = group_cat(2);
        let r = representable(&cat, 0);
        assert_eq!(r.size(0), 2);
    }

    #[test]
    fn representable_on_discrete_category() {
        let cat = Arc::new(FinCat::discrete(3));
        let r = representable(&cat, 1);
        assert_eq!(r.sizes(), &[0, 1, 0]);
    }

    #[test]
    fn yoneda_counts_hold_exhaustively() {
        let budgets = Budgets::default();
        for cat in [group_cat(3), chain_two(), Arc::new(FinCat::discrete(2))] {
            let mut rng = rand::rngs::StdRng::seed_from_u64(7);
            let f = random_presheaf(&cat, &mut rng, 3, 4);
            for x in 0..cat.n_objects() {
                let r = representable(&cat, x);
                let nats = nat_set(&r, &f, &budgets).unwrap();
                assert_eq!(nats.len(), f.size(x), "Yoneda at object {x}");
                // and the Yoneda transformations are exactly those
                for a in 0..f.size(x) {
                    let y = yoneda_nat(&f, x, a);
                    assert!(nats.contains(&y));
                }
            }
        }
    }

    #[test]
    fn nat_set_contains_identity_and_respects_budget() {
        let cat = group_cat(2);
        let f = representable(&cat, 0);
        let nats = nat_set(&f, &f, &Budgets::default()).unwrap();
        assert!(nats.contains(&NatTrans::identity(&f)));
        let tiny = Budgets { nat_nodes: 1, ..Budgets::default() };
        let err = nat_set(&f, &f, &tiny).unwrap_err();
        assert!(matches!(err, CatError::Budget(_)));
    }

    #[test]
    fn comma_under_identity_is_undercategory() {
        let cat = chain_two();
        let id = CFunctor::identity(cat.clone());
        let comma = comma_under(&id, 0);
        // objects: (0 -> 0, 0) and (0 -> 1, 1)
        assert_eq!(comma.objects.len(), 2);
        let comma1 = comma_under(&id, 1);
        assert_eq!(comma1.objects.len(), 1);
    }

    #[test]
    fn comma_under_constant_functor_to_terminal_recovers_source() {
        let cat = chain_two();
        let point = Arc::new(FinCat::discrete(1));
        let alpha = CFunctor::new(
            cat.clone(),
            point.clone(),
            vec![0, 0],
            vec![0, 0, 0],
        )
        .unwrap();
        let comma = comma_under(&alpha, 0);
        assert_eq!(comma.objects.len(), cat.n_objects());
        assert_eq!(comma.cat.n_morphisms(), cat.n_morphisms());
    }

    #[test]
    fn filtered_checks() {
        // terminal object means filtered
        assert!(chain_two().is_filtered());
        // two disconnected objects are not
        assert!(!FinCat::discrete(2).is_filtered());
        assert!(group_cat(1).is_filtered());
    }

    #[test]
    fn colimit_and_limit_of_constant_singleton() {
        let cat = chain_two();
        let f = Presheaf::constant(cat, 1);
        assert_eq!(colimit(&f).size, 1);
        assert_eq!(limit(&f, &Budgets::default()).unwrap().elements.len(), 1);
    }

    #[test]
    fn colimit_and_limit_on_antichain() {
        let cat = Arc::new(FinCat::discrete(2));
        // value {a} at 0 and {b} at 1: coproduct has 2 elements, product 1
        let f = Presheaf::new(cat.clone(), vec![1, 1], vec![vec![0], vec![0]]).unwrap();
        assert_eq!(colimit(&f).size, 2);
        assert_eq!(limit(&f, &Budgets::default()).unwrap().elements.len(), 1);
    }

    #[test]
    fn kan_extensions_along_identity_are_isomorphic_to_input() {
        let cat = chain_two();
        let id = CFunctor::identity(cat.clone());
        let budgets = Budgets::default();
        let mut rng = rand::rngs::StdRng::seed_from_u64(11);
        for _ in 0..5 {
            let f = random_presheaf(&cat, &mut rng, 2, 3);
            let lk = left_kan(&id, &f).unwrap();
            assert!(natural_isomorphism(&lk.extension, &f, &budgets).unwrap().is_some());
            let rk = right_kan(&id, &f, &budgets).unwrap();
            assert!(natural_isomorphism(&rk.extension, &f, &budgets).unwrap().is_some());
        }
    }

    #[test]
    fn adjunction_counts_on_samples() {
        // alpha: chain -> group Z2 collapsing the chain
        let chain = chain_two();
        let z2 = group_cat(2);
        let alpha = CFunctor::new(chain.clone(), z2.clone(), vec![0, 0], vec![0, 0, 0]).unwrap();
        let budgets = Budgets::default();
        let mut rng = rand::rngs::StdRng::seed_from_u64(3);
        for _ in 0..4 {
            let f = random_presheaf(&chain, &mut rng, 2, 2);
            let h = random_presheaf(&z2, &mut rng, 2, 2);
            let lk = left_kan(&alpha, &f).unwrap();
            let res = restrict(&alpha, &h).unwrap();
            let left = nat_set(&lk.extension, &h, &budgets).unwrap().len();
            let right = nat_set(&f, &res, &budgets).unwrap().len();
            assert_eq!(left, right, "left adjunction count");
            let rk = right_kan(&alpha, &f, &budgets).unwrap();
            let left = nat_set(&res, &f, &budgets).unwrap().len();
            let right = nat_set(&h, &rk.extension, &budgets).unwrap().len();
            assert_eq!(left, right, "right adjunction count");
        }
    }

    #[test]
    fn restriction_along_identity_is_identity() {
        let cat = chain_two();
        let id = CFunctor::identity(cat.clone());
        let mut rng = rand::rngs::StdRng::seed_from_u64(5);
        let f = random_presheaf(&cat, &mut rng, 2, 2);
        assert_eq!(restrict(&id, &f).unwrap(), f);
    }

    #[test]
    fn opposite_is_involutive() {
        for cat in [group_cat(3), chain_two()] {
            let opop = cat.opposite().opposite();
            assert_eq!(*cat, opop);
        }
        // terminal becomes initial
        let cat = chain_two();
        let op = cat.opposite();
        assert_eq!(op.hom(1, 0).len(), 1);
        assert_eq!(op.hom(0, 1).len(), 0);
    }

    #[test]
    fn colimit_invariant_under_isomorphism_of_categories() {
        // relabel the chain 0<1 as 1<0 and compare colimit sizes
        let cat = chain_two();
        let swapped = Arc::new(
            FinCat::from_preorder(&[vec![true, false], vec![true, true]]).unwrap(),
        );
        let mut rng = rand::rngs::StdRng::seed_from_u64(9);
        let f = random_presheaf(&cat, &mut rng, 3, 2);
        let g = Presheaf::new(
            swapped.clone(),
            vec![f.size(1), f.size(0)],
            {
                // morphisms of swapped: sorted by (dom, cod): (0,0), (1,0), (1,1)
                let m_id0 = f.map(cat.identity(1)).to_vec();
                let m_id1 = f.map(cat.identity(0)).to_vec();
                let arrow = f
                    .map((0..cat.n_morphisms()).find(|&m| cat.dom(m) == 0 && cat.cod(m) == 1).unwrap())
                    .to_vec();
                vec![m_id0, arrow, m_id1]
            },
        )
        .unwrap();
        assert_eq!(colimit(&f).size, colimit(&g).size);
        let budgets = Budgets::default();
        assert_eq!(
            limit(&f, &budgets).unwrap().elements.len(),
            limit(&g, &budgets).unwrap().elements.len()
        );
    }

    #[test]
    fn nat_set_closed_under_composition_with_isos() {
        let cat = group_cat(2);
        let f = representable(&cat, 0);
        let budgets = Budgets::default();
        let nats = nat_set(&f, &f, &budgets).unwrap();
        for a in &nats {
            for b in &nats {
                if b.is_bijective(&f, &f) {
                    let c = a.then(b);
                    assert!(nats.contains(&c));
                }
            }
        }
    }
}
