//! Brute-force reference implementations used as independent oracles by the
//! test suites. Nothing here is called by the production code paths; keep it
//! that way so cross-checks stay meaningful.

use crate::fincat::FinCat;
use crate::group::{FiniteGroup, GSet, Subgroup};

/// Every subgroup, found by testing all subsets. Exponential; only for
/// groups of order <= 16.
pub fn all_subgroups_bruteforce(group: &FiniteGroup) -> Vec<Subgroup> {
    let n = group.order();
    assert!(n <= 16, "brute-force subgroup enumeration is capped at order 16");
    let mut out = Vec::new();
    for mask in 0u32..(1 << n) {
        let members: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) != 0).collect();
        if members.is_empty() {
            continue;
        }
        if let Ok(h) = Subgroup::new(group, members) {
            out.push(h);
        }
    }
    out.sort_by(|a, b| (a.len(), a.members()).cmp(&(b.len(), b.members())));
    out.dedup();
    out
}

/// Searches for an equivariant bijection between two G-sets by backtracking.
pub fn equivariant_bijection(group: &FiniteGroup, m: &GSet, n: &GSet) -> Option<Vec<usize>> {
    if m.size() != n.size() {
        return None;
    }
    let mut map = vec![usize::MAX; m.size()];
    let mut used = vec![false; n.size()];
    fn extend(
        group: &FiniteGroup,
        m: &GSet,
        n: &GSet,
        map: &mut Vec<usize>,
        used: &mut Vec<bool>,
    ) -> bool {
        let Some(x) = (0..m.size()).find(|&x| map[x] == usize::MAX) else {
            return true;
        };
        'candidates: for y in 0..n.size() {
            if used[y] {
                continue;
            }
            // propagate along the orbit of x and check consistency
            let mut assigned = Vec::new();
            map[x] = y;
            used[y] = true;
            assigned.push((x, y));
            let mut queue = vec![x];
            while let Some(p) = queue.pop() {
                for g in group.elements() {
                    let q = m.apply(p, g);
                    let target = n.apply(map[p], g);
                    if map[q] == usize::MAX {
                        if used[target] {
                            for &(a, b) in &assigned {
                                map[a] = usize::MAX;
                                used[b] = false;
                            }
                            continue 'candidates;
                        }
                        map[q] = target;
                        used[target] = true;
                        assigned.push((q, target));
                        queue.push(q);
                    } else if map[q] != target {
                        for &(a, b) in &assigned {
                            map[a] = usize::MAX;
                            used[b] = false;
                        }
                        continue 'candidates;
                    }
                }
            }
            if extend(group, m, n, map, used) {
                return true;
            }
            for &(a, b) in &assigned {
                map[a] = usize::MAX;
                used[b] = false;
            }
        }
        false
    }
    extend(group, m, n, &mut map, &mut used).then_some(map)
}

/// Searches for an isomorphism of categories (bijective on objects and
/// morphisms, strictly preserving composition). Backtracking over object
/// images, then over hom-set bijections; intended for tiny categories.
pub fn find_category_isomorphism(c: &FinCat, d: &FinCat) -> Option<(Vec<usize>, Vec<usize>)> {
    if c.n_objects() != d.n_objects() || c.n_morphisms() != d.n_morphisms() {
        return None;
    }
    let n = c.n_objects();
    let mut obj_map = vec![usize::MAX; n];
    let mut used_obj = vec![false; n];

    fn try_objects(
        c: &FinCat,
        d: &FinCat,
        obj_map: &mut Vec<usize>,
        used_obj: &mut Vec<bool>,
        next: usize,
    ) -> Option<Vec<usize>> {
        let n = c.n_objects();
        if next == n {
            return try_morphisms(c, d, obj_map);
        }
        for y in 0..n {
            if used_obj[y] {
                continue;
            }
            // hom-size profile must match
            let compatible = (0..next).all(|x| {
                c.hom(x, next).len() == d.hom(obj_map[x], y).len()
                    && c.hom(next, x).len() == d.hom(y, obj_map[x]).len()
            }) && c.hom(next, next).len() == d.hom(y, y).len();
            if !compatible {
                continue;
            }
            obj_map[next] = y;
            used_obj[y] = true;
            if let Some(mor_map) = try_objects(c, d, obj_map, used_obj, next + 1) {
                return Some(mor_map);
            }
            obj_map[next] = usize::MAX;
            used_obj[y] = false;
        }
        None
    }

    fn try_morphisms(c: &FinCat, d: &FinCat, obj_map: &[usize]) -> Option<Vec<usize>> {
        let n_mor = c.n_morphisms();
        let mut mor_map = vec![usize::MAX; n_mor];
        let mut used = vec![false; n_mor];
        for x in 0..c.n_objects() {
            let i = c.identity(x);
            let j = d.identity(obj_map[x]);
            mor_map[i] = j;
            used[j] = true;
        }
        fn assign(
            c: &FinCat,
            d: &FinCat,
            obj_map: &[usize],
            mor_map: &mut Vec<usize>,
            used: &mut Vec<bool>,
        ) -> bool {
            let Some(f) = (0..c.n_morphisms()).find(|&f| mor_map[f] == usize::MAX) else {
                // full check of composition preservation
                for f in 0..c.n_morphisms() {
                    for g in 0..c.n_morphisms() {
                        match (c.compose(f, g), d.compose(mor_map[f], mor_map[g])) {
                            (Some(fg), Some(img)) if mor_map[fg] == img => {}
                            (None, None) => {}
                            _ => return false,
                        }
                    }
                }
                return true;
            };
            let candidates: Vec<usize> = d
                .hom(obj_map[c.dom(f)], obj_map[c.cod(f)])
                .iter()
                .copied()
                .filter(|&m| !used[m])
                .collect();
            for m in candidates {
                mor_map[f] = m;
                used[m] = true;
                // partial composition consistency against already-assigned
                let consistent = (0..c.n_morphisms()).all(|g| {
                    if mor_map[g] == usize::MAX {
                        return true;
                    }
                    let ok1 = match c.compose(f, g) {
                        Some(fg) => {
                            let img = d.compose(mor_map[f], mor_map[g]);
                            mor_map[fg] == usize::MAX || img == Some(mor_map[fg])
                        }
                        None => true,
                    };
                    let ok2 = match c.compose(g, f) {
                        Some(gf) => {
                            let img = d.compose(mor_map[g], mor_map[f]);
                            mor_map[gf] == usize::MAX || img == Some(mor_map[gf])
                        }
                        None => true,
                    };
                    ok1 && ok2
                });
                if consistent && assign(c, d, obj_map, mor_map, used) {
                    return true;
                }
                mor_map[f] = usize::MAX;
                used[m] = false;
            }
            false
        }
        assign(c, d, obj_map, &mut mor_map, &mut used).then_some(mor_map)
    }

    let mor_map = try_objects(c, d, &mut obj_map, &mut used_obj, 0)?;
    Some((obj_map, mor_map))
}
