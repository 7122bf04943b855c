//! Sites built from a finite group: the one-object site, transporter
//! categories over G-posets with an initial object, and their quotients by
//! per-object automorphism kernels (orbit-type categories). Also the two
//! functors connecting them, continuity/cocontinuity checkers, fixed-point
//! sheaves, and the verifier for the equivalence between sheaves on the
//! quotient site and G-sets.

use crate::fincat::{
    left_kan, natural_isomorphism, random_presheaf, restrict, right_kan, CatError, CFunctor,
    FinCat, Network, Presheaf,
};
use crate::group::{
    conjugate_subgroup, conjugacy_class_rep, coset_gset, enumerate_subgroups, fixed_points,
    gsets_isomorphic, p_subgroups, FiniteGroup, GPoset, GSet, GroupError, Subgroup,
};
use crate::sites::{
    is_sheaf, ore_condition, plus_construction, sheafify, SheafCheckMode, Site, SiteError,
};
use crate::Budgets;
use rand::Rng;
use serde::Serialize;
use std::collections::HashMap;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BundleError {
    #[error("the poset has no initial object, so minimal covering sieves are not guaranteed")]
    NoInitialObject,
    #[error("the Ore condition fails on the constructed category (cospan witness {u}, {w})")]
    OreViolated { u: usize, w: usize },
    #[error("kernel at object {object} is not a subgroup of the stabilizer: element {element}")]
    BadKernel { object: usize, element: usize },
    #[error(
        "kernel family is not a congruence: morphism {morphism} conjugates kernel element {kernel_element} outside the target kernel"
    )]
    NotACongruence { morphism: usize, kernel_element: usize },
    #[error("kernel at the initial object is nontrivial; the value there carries no canonical group action")]
    KernelAtInitialNotTrivial,
    #[error("expected a presheaf on the bundle's category")]
    WrongCategory,
    #[error("orbit kernels require a poset whose elements are subgroups")]
    OrbitKernelsNeedSubgroups,
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Cat(#[from] CatError),
    #[error(transparent)]
    Site(#[from] SiteError),
    #[error(transparent)]
    Budget(#[from] crate::BudgetExceeded),
}

impl BundleError {
    pub fn is_budget(&self) -> bool {
        match self {
            BundleError::Cat(CatError::Budget(_)) | BundleError::Budget(_) => true,
            BundleError::Site(e) => e.is_budget(),
            _ => false,
        }
    }
}

/// The transporter category of a G-poset: objects are poset elements and a
/// morphism x -> y is a group element g with g.x <= y (left action),
/// composing by (g1)(g2) = g1 g2.
#[derive(Debug, Clone)]
pub struct TransporterCat {
    cat: Arc<FinCat>,
    group: FiniteGroup,
    poset: GPoset,
    decode: Vec<(usize, usize, usize)>,
    index: HashMap<(usize, usize, usize), usize>,
}

impl TransporterCat {
    pub fn new(group: &FiniteGroup, poset: &GPoset) -> Result<Self, BundleError> {
        let n = poset.size();
        let mut decode = Vec::new();
        let mut index = HashMap::new();
        for x in 0..n {
            for y in 0..n {
                for g in group.elements() {
                    if poset.le(poset.left_act(group, g, x), y) {
                        index.insert((x, y, g), decode.len());
                        decode.push((x, y, g));
                    }
                }
            }
        }
        let morphisms: Vec<(usize, usize)> = decode.iter().map(|&(x, y, _)| (x, y)).collect();
        let identity: Vec<usize> = (0..n).map(|x| index[&(x, x, group.identity())]).collect();
        let decode2 = decode.clone();
        let index2 = index.clone();
        let group2 = group.clone();
        let cat = FinCat::build(n, morphisms, identity, move |f, g| {
            let (_, z, g1) = decode2[f];
            let (x, _, g2) = decode2[g];
            index2.get(&(x, z, group2.mul(g1, g2))).copied()
        })?;
        Ok(TransporterCat { cat: Arc::new(cat), group: group.clone(), poset: poset.clone(), decode, index })
    }

    pub fn cat(&self) -> &Arc<FinCat> {
        &self.cat
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn poset(&self) -> &GPoset {
        &self.poset
    }

    /// (dom, cod, group element) of a morphism.
    pub fn decode(&self, m: usize) -> (usize, usize, usize) {
        self.decode[m]
    }

    pub fn morphism(&self, x: usize, y: usize, g: usize) -> Option<usize> {
        self.index.get(&(x, y, g)).copied()
    }

    pub fn initial_object(&self) -> Option<usize> {
        self.poset.initial_object()
    }
}

/// The atomic site of a transporter category whose poset has an initial
/// object. The Ore condition is verified rather than assumed.
pub fn transporter_site(t: &TransporterCat) -> Result<Site, BundleError> {
    if t.initial_object().is_none() {
        return Err(BundleError::NoInitialObject);
    }
    let ore = ore_condition(t.cat());
    if let Some((u, w)) = (!ore.holds).then(|| ore.witness.unwrap()) {
        return Err(BundleError::OreViolated { u, w });
    }
    Ok(Site::atomic(t.cat().clone()))
}

/// The transporter morphism set {g : g H g^-1 <= K}, before any quotient.
pub fn hom_transporter(group: &FiniteGroup, h: &Subgroup, k: &Subgroup) -> Vec<usize> {
    group.elements().filter(|&g| conjugate_subgroup(group, h, g).is_subset_of(k)).collect()
}

/// The one-object site of a group: one object, |G| morphisms composing by
/// multiplication, with the atomic (= trivial) topology.
pub struct OneObjectSite {
    pub cat: Arc<FinCat>,
    pub site: Site,
}

pub fn one_object_site(group: &FiniteGroup) -> OneObjectSite {
    let n = group.order();
    let morphisms = vec![(0usize, 0usize); n];
    let identity = vec![group.identity()];
    let g2 = group.clone();
    let cat = Arc::new(
        FinCat::build(1, morphisms, identity, move |f, g| Some(g2.mul(f, g)))
            .expect("group table is a category"),
    );
    OneObjectSite { site: Site::atomic(cat.clone()), cat }
}

/// A right G-set as a presheaf on the one-object category (morphism index =
/// group element index).
pub fn gset_presheaf(cat_g: &Arc<FinCat>, group: &FiniteGroup, m: &GSet) -> Presheaf {
    let sizes = vec![m.size()];
    let maps: Vec<Vec<usize>> =
        group.elements().map(|g| (0..m.size()).map(|x| m.apply(x, g)).collect()).collect();
    Presheaf::new(cat_g.clone(), sizes, maps).expect("a right action is a presheaf on the one-object category")
}

/// Reads a presheaf on the one-object category back as a G-set.
pub fn presheaf_gset(group: &FiniteGroup, f: &Presheaf) -> Result<GSet, BundleError> {
    if f.cat().n_objects() != 1 || f.cat().n_morphisms() != group.order() {
        return Err(BundleError::WrongCategory);
    }
    let size = f.size(0);
    let act: Vec<Vec<usize>> =
        (0..size).map(|x| group.elements().map(|g| f.apply(g, x)).collect()).collect();
    Ok(GSet::new(group, act)?)
}

/// A quotient of a transporter category by a kernel family: the functor rho
/// is the identity on objects and collapses each hom set to left
/// K(cod)-cosets.
#[derive(Debug, Clone)]
pub struct CatExtension {
    pub transporter: TransporterCat,
    cat: Arc<FinCat>,
    rho: CFunctor,
    kernels: Vec<Vec<usize>>,
    /// Per quotient morphism: (dom, cod, sorted coset elements).
    decode: Vec<(usize, usize, Vec<usize>)>,
    index: HashMap<(usize, usize, usize), usize>,
}

impl CatExtension {
    pub fn cat(&self) -> &Arc<FinCat> {
        &self.cat
    }

    pub fn rho(&self) -> &CFunctor {
        &self.rho
    }

    pub fn kernels(&self) -> &[Vec<usize>] {
        &self.kernels
    }

    pub fn decode(&self, m: usize) -> &(usize, usize, Vec<usize>) {
        &self.decode[m]
    }

    /// The quotient morphism x -> y containing the group element g.
    pub fn morphism(&self, x: usize, y: usize, g: usize) -> Option<usize> {
        self.index.get(&(x, y, g)).copied()
    }

    pub fn initial_object(&self) -> Option<usize> {
        self.transporter.initial_object()
    }
}

/// Quotients a transporter category by per-object kernels K(x), which must
/// be subgroups of the stabilizer of x. The induced relation must be a
/// categorical congruence; this is verified exhaustively, with a composable
/// pair as witness on failure.
pub fn orbit_quotient(t: &TransporterCat, kernels: Vec<Vec<usize>>) -> Result<CatExtension, BundleError> {
    let group = t.group().clone();
    let poset = t.poset();
    let n = poset.size();
    let mut sorted_kernels = Vec::with_capacity(n);
    for (x, raw) in kernels.into_iter().enumerate() {
        let k = Subgroup::new(&group, raw).map_err(BundleError::Group)?;
        for &g in k.members() {
            if poset.left_act(&group, g, x) != x {
                return Err(BundleError::BadKernel { object: x, element: g });
            }
        }
        sorted_kernels.push(k.members().to_vec());
    }
    // congruence: every morphism must conjugate the kernel at its domain into
    // the kernel at its codomain
    for m in 0..t.cat().n_morphisms() {
        let (y, z, g) = t.decode(m);
        for &k in &sorted_kernels[y] {
            let conj = group.conj(g, k);
            if !sorted_kernels[z].contains(&conj) {
                return Err(BundleError::NotACongruence { morphism: m, kernel_element: k });
            }
        }
    }
    // quotient morphisms: left K(cod)-cosets of each hom set
    let mut decode: Vec<(usize, usize, Vec<usize>)> = Vec::new();
    let mut index: HashMap<(usize, usize, usize), usize> = HashMap::new();
    for x in 0..n {
        for y in 0..n {
            let mut seen: Vec<usize> = Vec::new();
            for g in group.elements() {
                if t.morphism(x, y, g).is_none() || seen.contains(&g) {
                    continue;
                }
                let mut coset: Vec<usize> =
                    sorted_kernels[y].iter().map(|&k| group.mul(k, g)).collect();
                coset.sort_unstable();
                for &c in &coset {
                    seen.push(c);
                }
                let id = decode.len();
                for &c in &coset {
                    index.insert((x, y, c), id);
                }
                decode.push((x, y, coset));
            }
        }
    }
    let morphisms: Vec<(usize, usize)> = decode.iter().map(|d| (d.0, d.1)).collect();
    let identity: Vec<usize> = (0..n).map(|x| index[&(x, x, group.identity())]).collect();
    let decode2 = decode.clone();
    let index2 = index.clone();
    let group2 = group.clone();
    let cat = FinCat::build(n, morphisms, identity, move |f, g| {
        let (_, z, ref c1) = decode2[f];
        let (x, _, ref c2) = decode2[g];
        index2.get(&(x, z, group2.mul(c1[0], c2[0]))).copied()
    })?;
    let cat = Arc::new(cat);
    let obj_map: Vec<usize> = (0..n).collect();
    let mor_map: Vec<usize> = (0..t.cat().n_morphisms())
        .map(|m| {
            let (x, y, g) = t.decode(m);
            index[&(x, y, g)]
        })
        .collect();
    let rho = CFunctor::new(t.cat().clone(), cat.clone(), obj_map, mor_map)?;
    Ok(CatExtension { transporter: t.clone(), cat, rho, kernels: sorted_kernels, decode, index })
}

/// Trivial kernels: the quotient is the transporter category itself.
pub fn trivial_kernels(t: &TransporterCat) -> Vec<Vec<usize>> {
    vec![vec![t.group().identity()]; t.poset().size()]
}

/// The functor collapsing a transporter category onto the one-object
/// category of its group: every object to the point, every morphism to its
/// group element.
pub fn pi_functor(t: &TransporterCat, g_cat: &Arc<FinCat>) -> Result<CFunctor, BundleError> {
    let obj_map = vec![0usize; t.cat().n_objects()];
    let mor_map: Vec<usize> = (0..t.cat().n_morphisms()).map(|m| t.decode(m).2).collect();
    Ok(CFunctor::new(t.cat().clone(), g_cat.clone(), obj_map, mor_map)?)
}

/// Which poset to build a bundle on.
#[derive(Debug, Clone)]
pub enum PosetKind {
    AllSubgroups,
    PSubgroups(usize),
    Custom(GPoset),
}

/// Which per-object kernels to quotient by.
#[derive(Debug, Clone)]
pub enum QuotientKind {
    /// Trivial kernels: the quotient site equals the transporter site.
    Transporter,
    /// Each subgroup-object is its own kernel (the orbit-type quotient).
    Orbit,
    /// Explicit kernels, one element list per object.
    Custom(Vec<Vec<usize>>),
}

/// The three sites built from one group and poset, with the functors
/// connecting them.
pub struct GroupSiteBundle {
    pub group: FiniteGroup,
    pub poset: GPoset,
    /// The subgroup each poset element stands for, when built from subgroups.
    pub poset_subgroups: Option<Vec<Subgroup>>,
    pub x0: usize,
    pub extension: CatExtension,
    pub one_object: OneObjectSite,
    pub site_pg: Site,
    pub site_c: Site,
    pub pi: CFunctor,
}

impl GroupSiteBundle {
    pub fn build(group: &FiniteGroup, poset_kind: PosetKind, quotient: QuotientKind) -> Result<Self, BundleError> {
        let (poset, poset_subgroups) = match poset_kind {
            PosetKind::AllSubgroups => {
                let subs = enumerate_subgroups(group);
                (GPoset::of_subgroups(group, &subs)?, Some(subs))
            }
            PosetKind::PSubgroups(p) => {
                let subs = p_subgroups(group, p)?;
                (GPoset::of_subgroups(group, &subs)?, Some(subs))
            }
            PosetKind::Custom(p) => (p, None),
        };
        let x0 = poset.initial_object().ok_or(BundleError::NoInitialObject)?;
        let transporter = TransporterCat::new(group, &poset)?;
        let site_pg = transporter_site(&transporter)?;
        let kernels = match quotient {
            QuotientKind::Transporter => trivial_kernels(&transporter),
            QuotientKind::Orbit => {
                let subs = poset_subgroups.as_ref().ok_or(BundleError::OrbitKernelsNeedSubgroups)?;
                subs.iter().map(|h| h.members().to_vec()).collect()
            }
            QuotientKind::Custom(k) => k,
        };
        let extension = orbit_quotient(&transporter, kernels)?;
        let site_c = {
            let ore = ore_condition(extension.cat());
            if let Some((u, w)) = (!ore.holds).then(|| ore.witness.unwrap()) {
                return Err(BundleError::OreViolated { u, w });
            }
            Site::atomic(extension.cat().clone())
        };
        let one_object = one_object_site(group);
        let pi = pi_functor(&transporter, &one_object.cat)?;
        Ok(GroupSiteBundle {
            group: group.clone(),
            poset,
            poset_subgroups,
            x0,
            extension,
            one_object,
            site_pg,
            site_c,
            pi,
        })
    }
}

/// The fixed-point sheaf of a G-set on a quotient site: the value at x is
/// M^{K(x)}, restricted along a morphism through the action of any coset
/// representative.
pub fn fixed_point_sheaf(m: &GSet, ext: &CatExtension) -> Presheaf {
    let group = ext.transporter.group();
    let cat = ext.cat().clone();
    let fixed: Vec<Vec<usize>> = (0..cat.n_objects())
        .map(|x| {
            let k = Subgroup::new(group, ext.kernels()[x].clone()).expect("kernels are subgroups");
            fixed_points(m, &k)
        })
        .collect();
    let sizes: Vec<usize> = fixed.iter().map(|f| f.len()).collect();
    let maps: Vec<Vec<usize>> = (0..cat.n_morphisms())
        .map(|mor| {
            let (x, y, ref coset) = *ext.decode(mor);
            let g = coset[0];
            fixed[y]
                .iter()
                .map(|&p| {
                    let image = m.apply(p, g);
                    fixed[x].binary_search(&image).expect("image is fixed by the domain kernel")
                })
                .collect()
        })
        .collect();
    Presheaf::new(cat, sizes, maps).expect("fixed points form a presheaf")
}

/// Reads the value of a presheaf at the initial object as a G-set, acting
/// through the automorphisms of the initial object. Requires the kernel
/// there to be trivial, otherwise the action is not determined.
pub fn evaluate_at_x0(f: &Presheaf, ext: &CatExtension) -> Result<GSet, BundleError> {
    let x0 = ext.initial_object().ok_or(BundleError::NoInitialObject)?;
    if ext.kernels()[x0].len() != 1 {
        return Err(BundleError::KernelAtInitialNotTrivial);
    }
    if f.cat().as_ref() != ext.cat().as_ref() {
        return Err(BundleError::WrongCategory);
    }
    let group = ext.transporter.group();
    let size = f.size(x0);
    let act: Vec<Vec<usize>> = (0..size)
        .map(|a| {
            group
                .elements()
                .map(|g| {
                    let m = ext.morphism(x0, x0, g).expect("initial object is fixed by the action");
                    f.apply(m, a)
                })
                .collect()
        })
        .collect();
    Ok(GSet::new(group, act)?)
}

/// Same as [`evaluate_at_x0`] but for presheaves on the transporter site.
pub fn evaluate_at_x0_transporter(f: &Presheaf, t: &TransporterCat) -> Result<GSet, BundleError> {
    let x0 = t.initial_object().ok_or(BundleError::NoInitialObject)?;
    if f.cat().as_ref() != t.cat().as_ref() {
        return Err(BundleError::WrongCategory);
    }
    let group = t.group();
    let act: Vec<Vec<usize>> = (0..f.size(x0))
        .map(|a| {
            group
                .elements()
                .map(|g| {
                    let m = t.morphism(x0, x0, g).expect("initial object is fixed by the action");
                    f.apply(m, a)
                })
                .collect()
        })
        .collect();
    Ok(GSet::new(group, act)?)
}

/// The presheaf concentrated at the initial object: M there, empty
/// elsewhere. Its sheafification is the fixed-point sheaf of M.
pub fn concentrated_presheaf(m: &GSet, ext: &CatExtension) -> Presheaf {
    let cat = ext.cat().clone();
    let x0 = ext.initial_object().expect("bundle posets have an initial object");
    let sizes: Vec<usize> = (0..cat.n_objects()).map(|x| if x == x0 { m.size() } else { 0 }).collect();
    let maps: Vec<Vec<usize>> = (0..cat.n_morphisms())
        .map(|mor| {
            let (x, y, ref coset) = *ext.decode(mor);
            if y == x0 && x == x0 {
                (0..m.size()).map(|p| m.apply(p, coset[0])).collect()
            } else {
                Vec::new()
            }
        })
        .collect();
    Presheaf::new(cat, sizes, maps).expect("concentrated values form a presheaf")
}

/// The direct image half of the equivalence: a G-set to a sheaf on the
/// quotient site, computed as the right Kan extension along rho of the
/// constant presheaf obtained by restricting along pi.
pub fn upsilon_star(bundle: &GroupSiteBundle, m: &GSet, budgets: &Budgets) -> Result<Presheaf, BundleError> {
    let as_presheaf = gset_presheaf(&bundle.one_object.cat, &bundle.group, m);
    let kappa = restrict(&bundle.pi, &as_presheaf)?;
    Ok(right_kan(bundle.extension.rho(), &kappa, budgets)?.extension)
}

/// The inverse image half: a sheaf on the quotient site back to a G-set,
/// computed as the left Kan extension along pi of the sheafified restriction
/// along rho.
pub fn upsilon_inverse(bundle: &GroupSiteBundle, f: &Presheaf, budgets: &Budgets) -> Result<GSet, BundleError> {
    let restricted = restrict(bundle.extension.rho(), f)?;
    let sheafified = sheafify(&restricted, &bundle.site_pg, budgets)?;
    let lk = left_kan(&bundle.pi, &sheafified.sheaf)?;
    presheaf_gset(&bundle.group, &lk.extension)
}

/// Compatible families over the poset alone (restriction maps along the
/// order morphisms with trivial group element), used as the independent
/// second route for the right Kan extension along pi.
pub fn limit_over_poset(t: &TransporterCat, f: &Presheaf, budgets: &Budgets) -> Result<Vec<Vec<usize>>, BundleError> {
    if f.cat().as_ref() != t.cat().as_ref() {
        return Err(BundleError::WrongCategory);
    }
    let e = t.group().identity();
    let n = t.poset().size();
    let mut net = Network::new(f.sizes().to_vec());
    for x in 0..n {
        for y in 0..n {
            if t.poset().le(x, y) {
                let m = t.morphism(x, y, e).expect("order morphism exists");
                net.add_edge(y, x, f.map(m).to_vec());
            }
        }
    }
    Ok(net.enumerate(budgets.nat_nodes, "limit over the poset")?)
}

/// Continuity report for a functor between sites.
#[derive(Debug, Clone, Serialize)]
pub struct ContinuityReport {
    pub cover_preserving: bool,
    pub flat: bool,
    pub continuous: bool,
    pub witness: Option<String>,
}

/// Checks that images of covering sieves generate covering sieves and that
/// every opposite under-comma category is filtered.
pub fn is_continuous(
    alpha: &CFunctor,
    source: &Site,
    target: &Site,
    budgets: &Budgets,
) -> Result<ContinuityReport, BundleError> {
    let mut cover_preserving = true;
    let mut witness = None;
    'outer: for x in 0..source.cat().n_objects() {
        for s in source.covering_sieves(x, budgets)? {
            let image: Vec<usize> = s.arrows().into_iter().map(|u| alpha.on_morphism(u)).collect();
            let generated = if image.is_empty() {
                crate::sites::Sieve::empty(target.cat().clone(), alpha.on_object(x))
            } else {
                crate::sites::generate_sieve(target.cat(), &image)?
            };
            if !target.is_covering(&generated) {
                cover_preserving = false;
                witness = Some(format!("image of a covering sieve on object {x} does not cover"));
                break 'outer;
            }
        }
    }
    let mut flat = true;
    for d in 0..target.cat().n_objects() {
        let comma = crate::fincat::comma_under(alpha, d);
        if !comma.cat.opposite().is_filtered() {
            flat = false;
            witness = Some(format!("opposite under-comma category at object {d} is not filtered"));
            break;
        }
    }
    Ok(ContinuityReport { cover_preserving, flat, continuous: cover_preserving && flat, witness })
}

#[derive(Debug, Clone, Serialize)]
pub struct CocontinuityReport {
    pub holds: bool,
    pub witness: Option<String>,
}

/// Checks cover reflection: for every covering sieve on beta(x), the set of
/// morphisms into x whose image lands in it must cover x.
pub fn is_cocontinuous(
    beta: &CFunctor,
    source: &Site,
    target: &Site,
    budgets: &Budgets,
) -> Result<CocontinuityReport, BundleError> {
    for x in 0..source.cat().n_objects() {
        let bx = beta.on_object(x);
        for s in target.covering_sieves(bx, budgets)? {
            let members: Vec<bool> = (0..source.cat().n_morphisms())
                .map(|u| source.cat().cod(u) == x && s.contains(beta.on_morphism(u)))
                .collect();
            let reflected = crate::sites::Sieve::new(source.cat().clone(), x, members)?;
            if !source.is_covering(&reflected) {
                return Ok(CocontinuityReport {
                    holds: false,
                    witness: Some(format!(
                        "covering sieve on the image of object {x} reflects to a non-covering sieve"
                    )),
                });
            }
        }
    }
    Ok(CocontinuityReport { holds: true, witness: None })
}

/// Sorted representatives of the conjugacy classes of subgroups.
pub fn subgroup_classes(group: &FiniteGroup) -> Vec<Subgroup> {
    let mut reps: Vec<Subgroup> =
        enumerate_subgroups(group).iter().map(|h| conjugacy_class_rep(group, h)).collect();
    reps.sort_by(|a, b| (a.len(), a.members()).cmp(&(b.len(), b.members())));
    reps.dedup();
    reps
}

/// All isomorphism classes of G-sets of size at most `bound`, each given as
/// a sorted multiset of subgroup-class indices (one per orbit).
pub fn gset_iso_classes(group: &FiniteGroup, bound: usize) -> Vec<Vec<usize>> {
    let classes = subgroup_classes(group);
    let orbit_sizes: Vec<usize> = classes.iter().map(|h| group.order() / h.len()).collect();
    let mut out = Vec::new();
    let mut current = Vec::new();
    fn rec(
        classes: usize,
        orbit_sizes: &[usize],
        start: usize,
        remaining: usize,
        current: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        out.push(current.clone());
        for c in start..classes {
            if orbit_sizes[c] <= remaining {
                current.push(c);
                rec(classes, orbit_sizes, c, remaining - orbit_sizes[c], current, out);
                current.pop();
            }
        }
    }
    rec(classes.len(), &orbit_sizes, 0, bound, &mut current, &mut out);
    out
}

/// Builds the G-set with one orbit per entry of a class multiset.
pub fn gset_from_classes(group: &FiniteGroup, classes: &[Subgroup], multiset: &[usize]) -> GSet {
    let mut m = GSet::empty();
    for &c in multiset {
        m = m.disjoint_union(&coset_gset(group, &classes[c]));
    }
    m
}

/// Seeded random G-set: a random multiset of transitive G-sets.
pub fn random_gset(group: &FiniteGroup, rng: &mut impl Rng, max_size: usize) -> GSet {
    let classes = subgroup_classes(group);
    let mut m = GSet::empty();
    while m.size() < max_size && rng.random_bool(0.7) {
        let c = rng.random_range(0..classes.len());
        let orbit = coset_gset(group, &classes[c]);
        if m.size() + orbit.size() > max_size {
            break;
        }
        m = m.disjoint_union(&orbit);
    }
    m
}

/// One G-set roundtrip case in the verification report.
#[derive(Debug, Clone, Serialize)]
pub struct GSetCase {
    pub orbit_classes: Vec<String>,
    pub size: usize,
    pub image_is_sheaf: bool,
    pub agrees_with_fixed_point_sheaf: bool,
    pub roundtrip_isomorphic: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ArtinReport {
    pub passed: bool,
    pub seed: u64,
    pub size_bound: usize,
    pub gset_cases: Vec<GSetCase>,
    pub sheaf_roundtrips_checked: usize,
    pub sheaf_roundtrip_failures: Vec<usize>,
    pub sheafification_cases_checked: usize,
    pub sheafification_failures: Vec<usize>,
}

/// Verifies the equivalence between G-sets and sheaves on the quotient site:
/// (a) every isomorphism class of G-sets up to `size_bound` maps to a sheaf,
/// agrees with the fixed-point sheaf, and roundtrips to an isomorphic G-set;
/// (b) seeded corpus sheaves roundtrip objectwise with a natural bijection;
/// (c) sheafification of seeded random presheaves is naturally isomorphic to
/// the fixed-point sheaf of the value at the initial object, and one plus
/// application is idempotent.
pub fn verify_artin(
    bundle: &GroupSiteBundle,
    size_bound: usize,
    seed: u64,
    corpus_size: usize,
    budgets: &Budgets,
) -> Result<ArtinReport, BundleError> {
    use rand::SeedableRng;
    let group = &bundle.group;
    let classes = subgroup_classes(group);
    let mut gset_cases = Vec::new();
    for multiset in gset_iso_classes(group, size_bound) {
        let m = gset_from_classes(group, &classes, &multiset);
        let image = upsilon_star(bundle, &m, budgets)?;
        let image_is_sheaf = is_sheaf(&image, &bundle.site_c, SheafCheckMode::Auto, budgets)?.is_sheaf;
        let fp = fixed_point_sheaf(&m, &bundle.extension);
        let agrees = natural_isomorphism(&image, &fp, budgets)?.is_some();
        let back = upsilon_inverse(bundle, &image, budgets)?;
        let roundtrip = gsets_isomorphic(group, &m, &back);
        gset_cases.push(GSetCase {
            orbit_classes: multiset
                .iter()
                .map(|&c| format!("{:?}", classes[c].members()))
                .collect(),
            size: m.size(),
            image_is_sheaf,
            agrees_with_fixed_point_sheaf: agrees,
            roundtrip_isomorphic: roundtrip,
        });
    }
    let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
    let cat_c = bundle.extension.cat();
    let mut sheaf_roundtrip_failures = Vec::new();
    let mut sheafification_failures = Vec::new();
    for i in 0..corpus_size {
        // clause (b): start from a sheaf obtained by sheafifying a random
        // presheaf mixed with a concentrated component
        let base = random_presheaf(cat_c, &mut rng, 2, 3);
        let concentrated = concentrated_presheaf(&random_gset(group, &mut rng, group.order()), &bundle.extension);
        let mixed = base.coproduct(&concentrated)?;
        let sheaf = sheafify(&mixed, &bundle.site_c, budgets)?.sheaf;
        let back = upsilon_inverse(bundle, &sheaf, budgets)?;
        let forward = upsilon_star(bundle, &back, budgets)?;
        if natural_isomorphism(&sheaf, &forward, budgets)?.is_none() {
            sheaf_roundtrip_failures.push(i);
        }
        // clause (c): sheafification equals the fixed-point sheaf of the
        // value at the initial object, and one plus application suffices
        let probe = random_presheaf(cat_c, &mut rng, 2, 4);
        let value_at_x0 = evaluate_at_x0(&probe, &bundle.extension)?;
        let expected = fixed_point_sheaf(&value_at_x0, &bundle.extension);
        let sharp = sheafify(&probe, &bundle.site_c, budgets)?.sheaf;
        let plus_once = plus_construction(&probe, &bundle.site_c, budgets)?.presheaf;
        let plus_twice = plus_construction(&plus_once, &bundle.site_c, budgets)?.presheaf;
        let ok = natural_isomorphism(&sharp, &expected, budgets)?.is_some()
            && natural_isomorphism(&plus_once, &plus_twice, budgets)?.is_some();
        if !ok {
            sheafification_failures.push(i);
        }
    }
    let passed = gset_cases
        .iter()
        .all(|c| c.image_is_sheaf && c.agrees_with_fixed_point_sheaf && c.roundtrip_isomorphic)
        && sheaf_roundtrip_failures.is_empty()
        && sheafification_failures.is_empty();
    Ok(ArtinReport {
        passed,
        seed,
        size_bound,
        gset_cases,
        sheaf_roundtrips_checked: corpus_size,
        sheaf_roundtrip_failures,
        sheafification_cases_checked: corpus_size,
        sheafification_failures,
    })
}
