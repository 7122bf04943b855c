//! JSON schemas for groups, G-sets, categories, sites, presheaves, modules
//! and bundle descriptors, plus DOT export of category graphs. All output
//! documents carry a "schema" tag; inputs may omit it.

use crate::fincat::{FinCat, Presheaf};
use crate::group::{FiniteGroup, GPoset, GSet};
use crate::grpsites::{PosetKind, QuotientKind};
use crate::linmod::{FiniteRing, Mat, RGModule};
use crate::sites::{Sieve, Site, Topology};
use serde::{Deserialize, Serialize};
use std::path::Path;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("file {path}: {source}")]
    File {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid input: {0}")]
    Schema(String),
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, IoError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| IoError::File { path: path.display().to_string(), source })?;
    Ok(serde_json::from_str(&text)?)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), IoError> {
    let text = serde_json::to_string_pretty(value).map_err(IoError::Json)?;
    std::fs::write(path, text + "\n")
        .map_err(|source| IoError::File { path: path.display().to_string(), source })
}

/// A finite group, either as a full multiplication table or as permutation
/// generators.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GroupJson {
    Table {
        #[serde(skip_serializing_if = "Option::is_none", default)]
        schema: Option<String>,
        order: usize,
        mul: Vec<Vec<usize>>,
        #[serde(skip_serializing_if = "Option::is_none", default)]
        labels: Option<Vec<String>>,
    },
    Perms {
        #[serde(skip_serializing_if = "Option::is_none", default)]
        schema: Option<String>,
        degree: usize,
        generators: Vec<Vec<usize>>,
    },
}

pub fn group_from_json(json: &GroupJson) -> Result<FiniteGroup, crate::Error> {
    match json {
        GroupJson::Table { order, mul, labels, .. } => {
            if mul.len() != *order {
                return Err(IoError::Schema(format!(
                    "mul table has {} rows, expected order {}",
                    mul.len(),
                    order
                ))
                .into());
            }
            Ok(FiniteGroup::from_table(mul.clone(), labels.clone())?)
        }
        GroupJson::Perms { degree, generators, .. } => {
            Ok(FiniteGroup::from_permutations(*degree, generators)?)
        }
    }
}

pub fn group_to_json(group: &FiniteGroup) -> GroupJson {
    GroupJson::Table {
        schema: Some("finsite/group/1".into()),
        order: group.order(),
        mul: group.mul_table().to_vec(),
        labels: Some(group.labels().to_vec()),
    }
}

/// Well-known groups by name: `trivial`, `zN`, `sN`, `dN` (dihedral of
/// order 2N).
pub fn builtin_group(name: &str) -> Option<FiniteGroup> {
    let lower = name.to_lowercase();
    if lower == "trivial" || lower == "z1" {
        return Some(FiniteGroup::trivial());
    }
    if let Some(n) = lower.strip_prefix('z').and_then(|s| s.parse::<usize>().ok()) {
        return (n >= 1 && n <= 24).then(|| FiniteGroup::cyclic(n));
    }
    if let Some(n) = lower.strip_prefix('s').and_then(|s| s.parse::<usize>().ok()) {
        return (1..=4).contains(&n).then(|| FiniteGroup::symmetric(n));
    }
    if let Some(n) = lower.strip_prefix('d').and_then(|s| s.parse::<usize>().ok()) {
        return (2..=12).contains(&n).then(|| FiniteGroup::dihedral(n));
    }
    None
}

/// Loads a group from a builtin name or a JSON file path.
pub fn load_group(spec: &str) -> Result<FiniteGroup, crate::Error> {
    if let Some(g) = builtin_group(spec) {
        return Ok(g);
    }
    let json: GroupJson = read_json(Path::new(spec))?;
    group_from_json(&json)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GSetJson {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub schema: Option<String>,
    pub size: usize,
    pub act: Vec<Vec<usize>>,
}

pub fn gset_from_json(group: &FiniteGroup, json: &GSetJson) -> Result<GSet, crate::Error> {
    if json.act.len() != json.size {
        return Err(IoError::Schema("action table length does not match size".into()).into());
    }
    Ok(GSet::new(group, json.act.clone())?)
}

pub fn gset_to_json(m: &GSet) -> GSetJson {
    GSetJson { schema: Some("finsite/gset/1".into()), size: m.size(), act: m.act_table().to_vec() }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MorphismJson {
    pub dom: usize,
    pub cod: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CategoryJson {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub schema: Option<String>,
    pub objects: usize,
    pub morphisms: Vec<MorphismJson>,
    pub identity: Vec<usize>,
    /// Sparse triple list (f, g, f o g).
    pub comp: Vec<(usize, usize, usize)>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub object_labels: Option<Vec<String>>,
}

pub fn category_from_json(json: &CategoryJson) -> Result<Arc<FinCat>, crate::Error> {
    let morphisms: Vec<(usize, usize)> = json.morphisms.iter().map(|m| (m.dom, m.cod)).collect();
    Ok(Arc::new(FinCat::from_sparse(json.objects, morphisms, json.identity.clone(), &json.comp)?))
}

pub fn category_to_json(cat: &FinCat, object_labels: Option<Vec<String>>) -> CategoryJson {
    let mut comp = Vec::new();
    for f in 0..cat.n_morphisms() {
        for g in 0..cat.n_morphisms() {
            if let Some(fg) = cat.compose(f, g) {
                comp.push((f, g, fg));
            }
        }
    }
    CategoryJson {
        schema: Some("finsite/category/1".into()),
        objects: cat.n_objects(),
        morphisms: (0..cat.n_morphisms())
            .map(|m| MorphismJson { dom: cat.dom(m), cod: cat.cod(m) })
            .collect(),
        identity: (0..cat.n_objects()).map(|x| cat.identity(x)).collect(),
        comp,
        object_labels,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TopologyJson {
    Trivial,
    Atomic,
    Explicit {
        /// Per object, each covering sieve as its sorted arrow list.
        covers: Vec<Vec<Vec<usize>>>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SiteJson {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub schema: Option<String>,
    pub category: CategoryJson,
    pub topology: TopologyJson,
}

pub fn site_from_json(json: &SiteJson) -> Result<Site, crate::Error> {
    let cat = category_from_json(&json.category)?;
    let topology = match &json.topology {
        TopologyJson::Trivial => Topology::Trivial,
        TopologyJson::Atomic => Topology::Atomic,
        TopologyJson::Explicit { covers } => {
            if covers.len() != cat.n_objects() {
                return Err(IoError::Schema("explicit covers must list every object".into()).into());
            }
            let mut family = Vec::with_capacity(covers.len());
            for (x, sieves) in covers.iter().enumerate() {
                let mut list = Vec::with_capacity(sieves.len());
                for arrows in sieves {
                    let mut members = vec![false; cat.n_morphisms()];
                    for &a in arrows {
                        if a >= cat.n_morphisms() {
                            return Err(IoError::Schema(format!("arrow {a} out of range")).into());
                        }
                        members[a] = true;
                    }
                    list.push(Sieve::new(cat.clone(), x, members)?);
                }
                family.push(list);
            }
            Topology::Explicit(family)
        }
    };
    Ok(Site::new(cat, topology)?)
}

pub fn site_to_json(site: &Site, object_labels: Option<Vec<String>>) -> SiteJson {
    let topology = match site.topology() {
        Topology::Trivial => TopologyJson::Trivial,
        Topology::Atomic => TopologyJson::Atomic,
        Topology::Explicit(family) => TopologyJson::Explicit {
            covers: family.iter().map(|sieves| sieves.iter().map(|s| s.arrows()).collect()).collect(),
        },
    };
    SiteJson {
        schema: Some("finsite/site/1".into()),
        category: category_to_json(site.cat(), object_labels),
        topology,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PresheafJson {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub schema: Option<String>,
    pub sizes: Vec<usize>,
    /// Per morphism, the table F(cod) -> F(dom).
    pub maps: Vec<Vec<usize>>,
}

pub fn presheaf_from_json(cat: &Arc<FinCat>, json: &PresheafJson) -> Result<Presheaf, crate::Error> {
    Ok(Presheaf::new(cat.clone(), json.sizes.clone(), json.maps.clone())?)
}

pub fn presheaf_to_json(f: &Presheaf) -> PresheafJson {
    PresheafJson {
        schema: Some("finsite/presheaf/1".into()),
        sizes: f.sizes().to_vec(),
        maps: (0..f.cat().n_morphisms()).map(|m| f.map(m).to_vec()).collect(),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RingJson {
    Prime { p: u64 },
    Mod {
        #[serde(rename = "mod")]
        modulus: u64,
    },
}

pub fn ring_from_json(json: &RingJson) -> Result<FiniteRing, crate::Error> {
    Ok(match json {
        RingJson::Prime { p } => FiniteRing::prime_field(*p)?,
        RingJson::Mod { modulus } => FiniteRing::mod_n(*modulus)?,
    })
}

/// Ring tokens used on the command line: `F2`, `F3`, ... or `Z4`, `Z6`, ...
pub fn ring_from_token(token: &str) -> Result<FiniteRing, crate::Error> {
    let lower = token.to_lowercase();
    if let Some(p) = lower.strip_prefix('f').and_then(|s| s.parse::<u64>().ok()) {
        return Ok(FiniteRing::prime_field(p)?);
    }
    if let Some(n) = lower.strip_prefix('z').and_then(|s| s.parse::<u64>().ok()) {
        return Ok(FiniteRing::mod_n(n)?);
    }
    Err(IoError::Schema(format!("unknown ring token: {token}")).into())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModuleJson {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub schema: Option<String>,
    pub ring: RingJson,
    pub rank: usize,
    /// Matrices keyed by group element index.
    pub action: std::collections::BTreeMap<String, Vec<Vec<u64>>>,
}

pub fn module_from_json(group: &FiniteGroup, json: &ModuleJson) -> Result<RGModule, crate::Error> {
    let ring = ring_from_json(&json.ring)?;
    let mut action = vec![Mat::identity(json.rank); group.order()];
    let mut provided = vec![false; group.order()];
    for (key, rows) in &json.action {
        let g: usize = key
            .parse()
            .map_err(|_| IoError::Schema(format!("action key {key} is not an element index")))?;
        if g >= group.order() {
            return Err(IoError::Schema(format!("element index {g} out of range")).into());
        }
        if rows.len() != json.rank || rows.iter().any(|r| r.len() != json.rank) {
            return Err(IoError::Schema(format!("matrix for element {g} is not {0}x{0}", json.rank)).into());
        }
        action[g] = Mat::from_rows(rows.clone(), json.rank);
        provided[g] = true;
    }
    for g in group.elements() {
        if !provided[g] && g != group.identity() {
            return Err(IoError::Schema(format!("missing action matrix for element {g}")).into());
        }
    }
    Ok(RGModule::new(ring, group, json.rank, action)?)
}

/// Poset selector in a bundle descriptor.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PosetJson {
    Named(String),
    PSubgroups {
        #[serde(rename = "p-subgroups")]
        p: usize,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GPosetJson {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub schema: Option<String>,
    pub gset: GSetJson,
    pub le: Vec<Vec<bool>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BundleJson {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub schema: Option<String>,
    /// Builtin group name or path to a group JSON file.
    pub group: String,
    pub poset: PosetJson,
    /// "transporter" or "orbit".
    pub quotient: String,
}

pub fn poset_kind_from_json(group: &FiniteGroup, json: &PosetJson) -> Result<PosetKind, crate::Error> {
    match json {
        PosetJson::Named(s) if s == "all-subgroups" => Ok(PosetKind::AllSubgroups),
        PosetJson::Named(path) => {
            let parsed: GPosetJson = read_json(Path::new(path))?;
            let gset = gset_from_json(group, &parsed.gset)?;
            Ok(PosetKind::Custom(GPoset::new(group, gset, parsed.le.clone())?))
        }
        PosetJson::PSubgroups { p } => Ok(PosetKind::PSubgroups(*p)),
    }
}

pub fn quotient_kind_from_json(token: &str) -> Result<QuotientKind, crate::Error> {
    match token {
        "transporter" => Ok(QuotientKind::Transporter),
        "orbit" => Ok(QuotientKind::Orbit),
        other => Err(IoError::Schema(format!("unknown quotient kind: {other}")).into()),
    }
}

/// DOT rendering of the underlying graph of a category (identity loops are
/// omitted).
pub fn category_dot(cat: &FinCat, object_labels: Option<&[String]>) -> String {
    let mut out = String::from("digraph category {\n");
    for x in 0..cat.n_objects() {
        let label = object_labels
            .and_then(|l| l.get(x).cloned())
            .unwrap_or_else(|| format!("x{x}"));
        out.push_str(&format!("  n{x} [label=\"{label}\"];\n"));
    }
    for m in 0..cat.n_morphisms() {
        if (0..cat.n_objects()).any(|x| cat.identity(x) == m) {
            continue;
        }
        out.push_str(&format!("  n{} -> n{} [label=\"m{}\"];\n", cat.dom(m), cat.cod(m), m));
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn group_json_roundtrip() {
        let g = FiniteGroup::symmetric(3);
        let json = group_to_json(&g);
        let back = group_from_json(&json).unwrap();
        assert_eq!(g, back);
    }

    #[test]
    fn permutation_group_json() {
        let text = r#"{"degree": 2, "generators": [[1, 0]]}"#;
        let json: GroupJson = serde_json::from_str(text).unwrap();
        let g = group_from_json(&json).unwrap();
        assert_eq!(g.order(), 2);
    }

    #[test]
    fn builtin_groups() {
        assert_eq!(builtin_group("z2").unwrap().order(), 2);
        assert_eq!(builtin_group("Z4").unwrap().order(), 4);
        assert_eq!(builtin_group("s3").unwrap().order(), 6);
        assert_eq!(builtin_group("d4").unwrap().order(), 8);
        assert!(builtin_group("q8").is_none());
    }

    #[test]
    fn category_json_roundtrip() {
        let g = FiniteGroup::cyclic(3);
        let s = crate::grpsites::one_object_site(&g);
        let json = category_to_json(&s.cat, None);
        let back = category_from_json(&json).unwrap();
        assert_eq!(*s.cat, *back);
    }

    #[test]
    fn bad_comp_table_is_rejected() {
        let json = CategoryJson {
            schema: None,
            objects: 1,
            morphisms: vec![MorphismJson { dom: 0, cod: 0 }],
            identity: vec![0],
            comp: vec![],
        object_labels: None,
        };
        assert!(category_from_json(&json).is_err());
    }

    #[test]
    fn ring_tokens() {
        assert!(ring_from_token("F2").is_ok());
        assert!(ring_from_token("Z4").is_ok());
        assert!(ring_from_token("F4").is_err());
        assert!(ring_from_token("gl2").is_err());
    }

    #[test]
    fn module_json_loads() {
        let g = FiniteGroup::cyclic(2);
        let text = r#"{
            "ring": {"p": 3},
            "rank": 1,
            "action": {"0": [[1]], "1": [[2]]}
        }"#;
        let json: ModuleJson = serde_json::from_str(text).unwrap();
        let m = module_from_json(&g, &json).unwrap();
        assert_eq!(m.rank(), 1);
        assert_eq!(m.matrix(1).get(0, 0), 2);
    }

    #[test]
    fn dot_export_mentions_every_object() {
        let g = FiniteGroup::cyclic(2);
        let s = crate::grpsites::one_object_site(&g);
        let dot = category_dot(&s.cat, None);
        assert!(dot.contains("n0"));
        assert!(dot.starts_with("digraph"));
    }
}
