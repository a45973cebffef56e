//! Skeletal finite groupoids and functors between them.
//!
//! Everything downstream (contexts, families, fibration structure) is built
//! from this representation, so it is deliberately concrete: objects are
//! `0..n_obj`, arrows are globally indexed, and composition is a table.
//! Structural equality of two `Gpd` values is plain data equality, which is
//! what makes the strictness laws of the contextual models hold on the nose.

use serde::{Deserialize, Serialize};

/// A finite groupoid presented by tables.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Gpd {
    pub n_obj: usize,
    /// Source object of each arrow.
    pub src: Vec<usize>,
    /// Target object of each arrow.
    pub tgt: Vec<usize>,
    /// Identity arrow of each object.
    pub id: Vec<usize>,
    /// `comp[g * n_arr + f]` is `g ∘ f` when `tgt[f] == src[g]`, else `usize::MAX`.
    pub comp: Vec<usize>,
    /// Inverse of each arrow.
    pub inv: Vec<usize>,
}

pub const NONE: usize = usize::MAX;

impl Gpd {
    pub fn n_arr(&self) -> usize {
        self.src.len()
    }

    /// The discrete groupoid on `n` objects (identities only).
    pub fn discrete(n: usize) -> Gpd {
        let id: Vec<usize> = (0..n).collect();
        let mut comp = vec![NONE; n * n];
        for i in 0..n {
            comp[i * n + i] = i;
        }
        Gpd { n_obj: n, src: id.clone(), tgt: id.clone(), id: id.clone(), comp, inv: id }
    }

    /// The connected groupoid on `k` objects whose vertex group is given by a
    /// multiplication table (`group[a][b]` = `a · b`, identity element 0).
    /// Arrows are triples (from, to, group element), ordered lexicographically.
    pub fn connected(k: usize, group: &[Vec<usize>]) -> Gpd {
        let g = group.len();
        assert!(g > 0 && k > 0);
        let n_arr = k * k * g;
        let idx = |i: usize, j: usize, e: usize| (i * k + j) * g + e;
        let mut src = vec![0; n_arr];
        let mut tgt = vec![0; n_arr];
        for i in 0..k {
            for j in 0..k {
                for e in 0..g {
                    src[idx(i, j, e)] = i;
                    tgt[idx(i, j, e)] = j;
                }
            }
        }
        let id: Vec<usize> = (0..k).map(|i| idx(i, i, 0)).collect();
        let mut comp = vec![NONE; n_arr * n_arr];
        for i in 0..k {
            for j in 0..k {
                for e in 0..g {
                    for j2 in 0..k {
                        for e2 in 0..g {
                            // (j -> j2, e2) ∘ (i -> j, e) = (i -> j2, e2·e)
                            comp[idx(j, j2, e2) * n_arr + idx(i, j, e)] = idx(i, j2, group[e2][e]);
                        }
                    }
                }
            }
        }
        let mut ginv = vec![0; g];
        for a in 0..g {
            ginv[a] = (0..g).find(|&b| group[a][b] == 0 && group[b][a] == 0).expect("group table");
        }
        let mut inv = vec![0; n_arr];
        for i in 0..k {
            for j in 0..k {
                for e in 0..g {
                    inv[idx(i, j, e)] = idx(j, i, ginv[e]);
                }
            }
        }
        Gpd { n_obj: k, src, tgt, id, comp, inv }
    }

    /// Multiplication table of the trivial group.
    pub fn group_trivial() -> Vec<Vec<usize>> {
        vec![vec![0]]
    }

    /// Multiplication table of the cyclic group of order 2.
    pub fn group_z2() -> Vec<Vec<usize>> {
        vec![vec![0, 1], vec![1, 0]]
    }

    /// Multiplication table of the cyclic group of order `n`.
    pub fn group_cyclic(n: usize) -> Vec<Vec<usize>> {
        (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect()
    }

    pub fn compose(&self, g: usize, f: usize) -> usize {
        let c = self.comp[g * self.n_arr() + f];
        debug_assert!(c != NONE, "non-composable arrows");
        c
    }

    pub fn hom(&self, a: usize, b: usize) -> Vec<usize> {
        (0..self.n_arr()).filter(|&m| self.src[m] == a && self.tgt[m] == b).collect()
    }

    /// Checks all groupoid axioms on the tables.
    pub fn validate(&self) -> Result<(), String> {
        let n = self.n_arr();
        if self.tgt.len() != n || self.comp.len() != n * n || self.inv.len() != n {
            return Err("table sizes inconsistent".into());
        }
        if self.id.len() != self.n_obj {
            return Err("identity table size".into());
        }
        for o in 0..self.n_obj {
            let i = self.id[o];
            if i >= n || self.src[i] != o || self.tgt[i] != o {
                return Err(format!("bad identity for object {o}"));
            }
        }
        for f in 0..n {
            if self.src[f] >= self.n_obj || self.tgt[f] >= self.n_obj {
                return Err(format!("arrow {f} endpoints out of range"));
            }
            for g in 0..n {
                let c = self.comp[g * n + f];
                if self.tgt[f] != self.src[g] {
                    if c != NONE {
                        return Err(format!("composite defined for non-composable {g}∘{f}"));
                    }
                    continue;
                }
                if c == NONE || c >= n {
                    return Err(format!("missing composite {g}∘{f}"));
                }
                if self.src[c] != self.src[f] || self.tgt[c] != self.tgt[g] {
                    return Err(format!("composite {g}∘{f} has wrong endpoints"));
                }
            }
            if self.comp[f * n + self.id[self.src[f]]] != f
                || self.comp[self.id[self.tgt[f]] * n + f] != f
            {
                return Err(format!("unit law fails at arrow {f}"));
            }
            let i = self.inv[f];
            if i >= n
                || self.src[i] != self.tgt[f]
                || self.tgt[i] != self.src[f]
                || self.comp[i * n + f] != self.id[self.src[f]]
                || self.comp[f * n + i] != self.id[self.tgt[f]]
            {
                return Err(format!("inverse law fails at arrow {f}"));
            }
        }
        // associativity
        for f in 0..n {
            for g in 0..n {
                if self.tgt[f] != self.src[g] {
                    continue;
                }
                let gf = self.comp[g * n + f];
                for h in 0..n {
                    if self.tgt[g] != self.src[h] {
                        continue;
                    }
                    let hg = self.comp[h * n + g];
                    if self.comp[h * n + gf] != self.comp[hg * n + f] {
                        return Err(format!("associativity fails at ({h},{g},{f})"));
                    }
                }
            }
        }
        Ok(())
    }

    /// Connected components; returns (component index per object, bases).
    pub fn components(&self) -> (Vec<usize>, Vec<usize>) {
        let mut comp = vec![NONE; self.n_obj];
        let mut bases = Vec::new();
        for o in 0..self.n_obj {
            if comp[o] != NONE {
                continue;
            }
            let c = bases.len();
            bases.push(o);
            comp[o] = c;
            let mut stack = vec![o];
            while let Some(x) = stack.pop() {
                for m in 0..self.n_arr() {
                    let (s, t) = (self.src[m], self.tgt[m]);
                    if s == x && comp[t] == NONE {
                        comp[t] = c;
                        stack.push(t);
                    }
                    if t == x && comp[s] == NONE {
                        comp[s] = c;
                        stack.push(s);
                    }
                }
            }
        }
        (comp, bases)
    }

    /// For each object, an arrow from its component base to it (identity at bases).
    pub fn tree_arrows(&self) -> Vec<usize> {
        let (comp, bases) = self.components();
        let mut tree = vec![NONE; self.n_obj];
        for (c, &b) in bases.iter().enumerate() {
            tree[b] = self.id[b];
            let mut frontier = vec![b];
            while let Some(x) = frontier.pop() {
                for m in 0..self.n_arr() {
                    if self.src[m] == x && tree[self.tgt[m]] == NONE && comp[self.tgt[m]] == c {
                        tree[self.tgt[m]] = self.compose(m, tree[x]);
                        frontier.push(self.tgt[m]);
                    }
                    if self.tgt[m] == x && tree[self.src[m]] == NONE && comp[self.src[m]] == c {
                        tree[self.src[m]] = self.compose(self.inv[m], tree[x]);
                        frontier.push(self.src[m]);
                    }
                }
            }
        }
        tree
    }

    /// Disjoint union; returns the union and the object/arrow offsets of `other`.
    pub fn disjoint_union(&self, other: &Gpd) -> Gpd {
        let (n1, a1) = (self.n_obj, self.n_arr());
        let (n2, a2) = (other.n_obj, other.n_arr());
        let mut src = self.src.clone();
        src.extend(other.src.iter().map(|&s| s + n1));
        let mut tgt = self.tgt.clone();
        tgt.extend(other.tgt.iter().map(|&t| t + n1));
        let mut id = self.id.clone();
        id.extend(other.id.iter().map(|&i| i + a1));
        let mut inv = self.inv.clone();
        inv.extend(other.inv.iter().map(|&i| i + a1));
        let n_arr = a1 + a2;
        let mut comp = vec![NONE; n_arr * n_arr];
        for g in 0..a1 {
            for f in 0..a1 {
                comp[g * n_arr + f] = self.comp[g * a1 + f];
            }
        }
        for g in 0..a2 {
            for f in 0..a2 {
                let c = other.comp[g * a2 + f];
                comp[(g + a1) * n_arr + (f + a1)] = if c == NONE { NONE } else { c + a1 };
            }
        }
        Gpd { n_obj: n1 + n2, src, tgt, id, comp, inv }
    }

    /// Full subgroupoid on the given (sorted, deduplicated) objects, reindexed.
    /// Returns the subgroupoid together with the arrow reindexing
    /// (old arrow -> new arrow, `NONE` for arrows not in the subgroupoid).
    pub fn full_sub(&self, objects: &[usize]) -> (Gpd, Vec<usize>, Vec<usize>) {
        let mut obj_new = vec![NONE; self.n_obj];
        for (i, &o) in objects.iter().enumerate() {
            obj_new[o] = i;
        }
        let mut arr_new = vec![NONE; self.n_arr()];
        let mut src = Vec::new();
        let mut tgt = Vec::new();
        for m in 0..self.n_arr() {
            if obj_new[self.src[m]] != NONE && obj_new[self.tgt[m]] != NONE {
                arr_new[m] = src.len();
                src.push(obj_new[self.src[m]]);
                tgt.push(obj_new[self.tgt[m]]);
            }
        }
        let n_arr = src.len();
        let mut old_of = vec![NONE; n_arr];
        for m in 0..self.n_arr() {
            if arr_new[m] != NONE {
                old_of[arr_new[m]] = m;
            }
        }
        let id = objects.iter().map(|&o| arr_new[self.id[o]]).collect();
        let inv = old_of.iter().map(|&m| arr_new[self.inv[m]]).collect();
        let mut comp = vec![NONE; n_arr * n_arr];
        for g in 0..n_arr {
            for f in 0..n_arr {
                if tgt[f] == src[g] {
                    comp[g * n_arr + f] = arr_new[self.compose(old_of[g], old_of[f])];
                }
            }
        }
        (Gpd { n_obj: objects.len(), src, tgt, id, comp, inv }, obj_new, arr_new)
    }
}

/// A functor between two groupoids, by object and arrow tables.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GpdFun {
    pub obj: Vec<usize>,
    pub arr: Vec<usize>,
}

impl GpdFun {
    pub fn identity(g: &Gpd) -> GpdFun {
        GpdFun { obj: (0..g.n_obj).collect(), arr: (0..g.n_arr()).collect() }
    }

    pub fn compose(&self, outer: &GpdFun) -> GpdFun {
        GpdFun {
            obj: self.obj.iter().map(|&o| outer.obj[o]).collect(),
            arr: self.arr.iter().map(|&m| outer.arr[m]).collect(),
        }
    }

    pub fn validate(&self, dom: &Gpd, cod: &Gpd) -> Result<(), String> {
        if self.obj.len() != dom.n_obj || self.arr.len() != dom.n_arr() {
            return Err("functor table sizes".into());
        }
        for m in 0..dom.n_arr() {
            let fm = self.arr[m];
            if fm >= cod.n_arr()
                || cod.src[fm] != self.obj[dom.src[m]]
                || cod.tgt[fm] != self.obj[dom.tgt[m]]
            {
                return Err(format!("arrow {m} image has wrong endpoints"));
            }
        }
        for o in 0..dom.n_obj {
            if self.arr[dom.id[o]] != cod.id[self.obj[o]] {
                return Err(format!("identity of {o} not preserved"));
            }
        }
        for f in 0..dom.n_arr() {
            for g in 0..dom.n_arr() {
                if dom.tgt[f] == dom.src[g]
                    && self.arr[dom.compose(g, f)] != cod.compose(self.arr[g], self.arr[f])
                {
                    return Err(format!("composition not preserved at ({g},{f})"));
                }
            }
        }
        Ok(())
    }

    /// Fully faithful and essentially surjective.
    pub fn is_equivalence(&self, dom: &Gpd, cod: &Gpd) -> bool {
        // essentially surjective
        'outer: for b in 0..cod.n_obj {
            for &a in &self.obj {
                if !cod.hom(a, b).is_empty() {
                    continue 'outer;
                }
            }
            return false;
        }
        // fully faithful
        for a in 0..dom.n_obj {
            for b in 0..dom.n_obj {
                let h = dom.hom(a, b);
                let image: Vec<usize> = h.iter().map(|&m| self.arr[m]).collect();
                let mut sorted = image.clone();
                sorted.sort_unstable();
                sorted.dedup();
                if sorted.len() != h.len() {
                    return false;
                }
                if cod.hom(self.obj[a], self.obj[b]).len() != h.len() {
                    return false;
                }
            }
        }
        true
    }
}

/// All functors `dom -> cod`, enumerated deterministically.
///
/// A functor out of a groupoid is determined by the images of a spanning tree
/// of each component and a homomorphism on each vertex group, so the search
/// runs over that generating data instead of over all arrow assignments.
pub fn enumerate_functors(dom: &Gpd, cod: &Gpd) -> Vec<GpdFun> {
    if dom.n_obj == 0 {
        return vec![GpdFun { obj: vec![], arr: vec![] }];
    }
    let (comp, bases) = dom.components();
    let tree = dom.tree_arrows();
    // vertex group arrows at each base
    let vgroups: Vec<Vec<usize>> = bases.iter().map(|&b| dom.hom(b, b)).collect();

    // per component: enumerate (base image object, hom on vertex group, tree images)
    struct CompChoice {
        vmap: Vec<usize>,       // image arrow per vertex-group arrow
        tree_img: Vec<usize>,   // image arrow per dom object of this component
    }
    let mut per_comp: Vec<Vec<CompChoice>> = Vec::new();
    for (c, &b) in bases.iter().enumerate() {
        let objs: Vec<usize> = (0..dom.n_obj).filter(|&o| comp[o] == c).collect();
        let vg = &vgroups[c];
        let mut choices = Vec::new();
        for bi in 0..cod.n_obj {
            // homomorphisms vg -> hom(bi, bi)
            let cod_vg = cod.hom(bi, bi);
            let mut homs: Vec<Vec<usize>> = vec![vec![]];
            for _ in vg {
                let mut next = Vec::new();
                for partial in &homs {
                    for &im in &cod_vg {
                        let mut p = partial.clone();
                        p.push(im);
                        next.push(p);
                    }
                }
                homs = next;
            }
            let pos = |m: usize| vg.iter().position(|&x| x == m).unwrap();
            homs.retain(|h| {
                if h[pos(dom.id[b])] != cod.id[bi] {
                    return false;
                }
                for (i, &x) in vg.iter().enumerate() {
                    for (j, &y) in vg.iter().enumerate() {
                        if h[pos(dom.compose(y, x))] != cod.compose(h[j], h[i]) {
                            return false;
                        }
                    }
                }
                true
            });
            // tree arrow images: for each non-base object o, any arrow bi -> (image of o)
            // enumerate image object + arrow choice per object
            let mut trees: Vec<Vec<usize>> = vec![vec![]];
            for &o in &objs {
                let mut next = Vec::new();
                for partial in &trees {
                    if o == b {
                        let mut p = partial.clone();
                        p.push(cod.id[bi]);
                        next.push(p);
                    } else {
                        for oi in 0..cod.n_obj {
                            for m in cod.hom(bi, oi) {
                                let mut p = partial.clone();
                                p.push(m);
                                next.push(p);
                            }
                        }
                    }
                }
                trees = next;
            }
            for h in &homs {
                for t in &trees {
                    let mut tree_img = vec![NONE; dom.n_obj];
                    for (k, &o) in objs.iter().enumerate() {
                        tree_img[o] = t[k];
                    }
                    choices.push(CompChoice { vmap: h.clone(), tree_img });
                }
            }
            let _ = pos;
        }
        per_comp.push(choices);
    }

    // cartesian product over components
    let mut picks: Vec<Vec<usize>> = vec![vec![]];
    for cs in &per_comp {
        let mut next = Vec::new();
        for p in &picks {
            for i in 0..cs.len() {
                let mut q = p.clone();
                q.push(i);
                next.push(q);
            }
        }
        picks = next;
    }

    let mut out = Vec::new();
    for pick in picks {
        let mut obj = vec![NONE; dom.n_obj];
        let mut arr = vec![NONE; dom.n_arr()];
        for o in 0..dom.n_obj {
            let c = comp[o];
            let ch = &per_comp[c][pick[c]];
            obj[o] = cod.tgt[ch.tree_img[o]];
        }
        let mut ok = true;
        for m in 0..dom.n_arr() {
            // m : x -> y equals tree[y] ∘ v ∘ tree[x]⁻¹ with v in the vertex group
            let (x, y) = (dom.src[m], dom.tgt[m]);
            let c = comp[x];
            let ch = &per_comp[c][pick[c]];
            let v = dom.compose(dom.inv[tree[y]], dom.compose(m, tree[x]));
            let vi = vgroups[c].iter().position(|&a| a == v).unwrap();
            let img =
                cod.compose(ch.tree_img[y], cod.compose(ch.vmap[vi], cod.inv[ch.tree_img[x]]));
            arr[m] = img;
            if cod.src[img] != obj[x] || cod.tgt[img] != obj[y] {
                ok = false;
                break;
            }
        }
        if ok {
            out.push(GpdFun { obj, arr });
        }
    }
    out.sort();
    out.dedup();
    out
}

/// All natural transformations `f ⇒ g` (componentwise; in a groupoid every
/// natural transformation is a natural isomorphism).
pub fn natural_transformations(dom: &Gpd, cod: &Gpd, f: &GpdFun, g: &GpdFun) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut partial = vec![NONE; dom.n_obj];
    fn rec(
        dom: &Gpd,
        cod: &Gpd,
        f: &GpdFun,
        g: &GpdFun,
        partial: &mut Vec<usize>,
        o: usize,
        out: &mut Vec<Vec<usize>>,
    ) {
        if o == dom.n_obj {
            // check naturality on all arrows
            for m in 0..dom.n_arr() {
                let (x, y) = (dom.src[m], dom.tgt[m]);
                if cod.compose(partial[y], f.arr[m]) != cod.compose(g.arr[m], partial[x]) {
                    return;
                }
            }
            out.push(partial.clone());
            return;
        }
        for m in cod.hom(f.obj[o], g.obj[o]) {
            partial[o] = m;
            rec(dom, cod, f, g, partial, o + 1, out);
        }
        partial[o] = NONE;
    }
    rec(dom, cod, f, g, &mut partial, 0, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn discrete_and_connected_validate() {
        for n in 0..4 {
            Gpd::discrete(n).validate().unwrap();
        }
        Gpd::connected(2, &Gpd::group_trivial()).validate().unwrap();
        Gpd::connected(1, &Gpd::group_z2()).validate().unwrap();
        Gpd::connected(3, &Gpd::group_z2()).validate().unwrap();
        Gpd::connected(2, &Gpd::group_cyclic(3)).validate().unwrap();
    }

    #[test]
    fn functor_enumeration_counts() {
        // functions between discrete groupoids
        let d2 = Gpd::discrete(2);
        let d3 = Gpd::discrete(3);
        assert_eq!(enumerate_functors(&d2, &d3).len(), 9);
        assert_eq!(enumerate_functors(&d3, &d2).len(), 8);
        // functors B(Z/2) -> B(Z/2): two group endomorphisms
        let bz2 = Gpd::connected(1, &Gpd::group_z2());
        assert_eq!(enumerate_functors(&bz2, &bz2).len(), 2);
        // functors from the contractible 2-object groupoid to B(Z/2):
        // base image 1 object, hom Z/1 -> Z/2 trivial, tree arrow 2 choices.
        let e = Gpd::connected(2, &Gpd::group_trivial());
        assert_eq!(enumerate_functors(&e, &bz2).len(), 2);
        for f in enumerate_functors(&e, &bz2) {
            f.validate(&e, &bz2).unwrap();
        }
    }

    #[test]
    fn equivalence_detection() {
        let e = Gpd::connected(2, &Gpd::group_trivial());
        let pt = Gpd::discrete(1);
        for f in enumerate_functors(&e, &pt) {
            assert!(f.is_equivalence(&e, &pt));
        }
        let d2 = Gpd::discrete(2);
        for f in enumerate_functors(&d2, &pt) {
            assert!(!f.is_equivalence(&d2, &pt));
        }
        let bz2 = Gpd::connected(1, &Gpd::group_z2());
        let id = GpdFun::identity(&bz2);
        assert!(id.is_equivalence(&bz2, &bz2));
    }

    #[test]
    fn natural_transformation_counts() {
        let bz2 = Gpd::connected(1, &Gpd::group_z2());
        let id = GpdFun::identity(&bz2);
        // natural transformations id ⇒ id = center of Z/2 = 2 elements
        assert_eq!(natural_transformations(&bz2, &bz2, &id, &id).len(), 2);
    }

    #[test]
    fn full_subgroupoid() {
        let g = Gpd::connected(3, &Gpd::group_trivial());
        let (sub, _, _) = g.full_sub(&[0, 2]);
        sub.validate().unwrap();
        assert_eq!(sub.n_obj, 2);
        assert_eq!(sub.n_arr(), 4);
    }
}
