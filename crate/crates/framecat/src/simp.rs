//! Finite, dimension-truncated simplicial sets and the combinatorial
//! categories built from them: joins, slices, nerves, the category of
//! simplices D, its injective-chain subcategory Sd, the free-initial-object
//! augmentation, matching categories, cosieves and 2-out-of-6 closures.
//!
//! Every complex is stored up to an explicit dimension bound with full face
//! and degeneracy tables.  Simplices above the bound are never stored but
//! are recovered where needed (only the join needs them) through
//! degeneracy-normal forms: a simplex is a nondegenerate base together with
//! a monotone surjection, and the face/degeneracy algebra acts on those
//! pairs.  Each operation documents the degrees in which its output is
//! exact: the join is exact up to `dim K + dim L + 1`, the slice up to
//! `dim − 1`.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::cat::FinCategory;
use crate::report::ValidationReport;
use crate::{Error, Result};

/// A simplicial set truncated at `dim`: simplex counts per degree and full
/// face/degeneracy tables on the stored range.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruncatedSSet {
    pub dim: usize,
    /// `counts[n]` simplices in degree `n ≤ dim`.
    pub counts: Vec<usize>,
    /// `faces[n][x][i] = d_i x` for `1 ≤ n ≤ dim`; `faces[0][x]` is empty.
    pub faces: Vec<Vec<Vec<usize>>>,
    /// `degeneracies[n][x][j] = s_j x` for `n < dim`; empty at the top.
    pub degeneracies: Vec<Vec<Vec<usize>>>,
}

impl TruncatedSSet {
    pub fn empty(dim: usize) -> TruncatedSSet {
        TruncatedSSet {
            dim,
            counts: vec![0; dim + 1],
            faces: vec![Vec::new(); dim + 1],
            degeneracies: vec![Vec::new(); dim + 1],
        }
    }

    /// Degeneracy preimage `(y, j)` with `s_j y = x`, if `x` is degenerate.
    pub fn degeneracy_preimage(&self, n: usize, x: usize) -> Option<(usize, usize)> {
        if n == 0 {
            return None;
        }
        for y in 0..self.counts[n - 1] {
            for (j, &img) in self.degeneracies[n - 1][y].iter().enumerate() {
                if img == x {
                    return Some((y, j));
                }
            }
        }
        None
    }

    pub fn is_degenerate(&self, n: usize, x: usize) -> bool {
        self.degeneracy_preimage(n, x).is_some()
    }

    pub fn nondegenerate(&self, n: usize) -> Vec<usize> {
        (0..self.counts[n]).filter(|&x| !self.is_degenerate(n, x)).collect()
    }

    /// The last vertex (vertex `n`) of an `n`-simplex.
    pub fn last_vertex(&self, n: usize, x: usize) -> usize {
        let mut cur = x;
        for k in (1..=n).rev() {
            cur = self.faces[k][cur][0];
        }
        cur
    }

    /// The face restriction of `x` to a strictly increasing vertex list.
    pub fn restrict(&self, n: usize, x: usize, verts: &[usize]) -> usize {
        let keep: BTreeSet<usize> = verts.iter().copied().collect();
        let mut cur = x;
        let mut deg = n;
        for i in (0..=n).rev() {
            if !keep.contains(&i) {
                cur = self.faces[deg][cur][i];
                deg -= 1;
            }
        }
        cur
    }

    /// Drop all degrees above `d`.
    pub fn truncate(&self, d: usize) -> TruncatedSSet {
        let d = d.min(self.dim);
        let mut out = TruncatedSSet {
            dim: d,
            counts: self.counts[..=d].to_vec(),
            faces: self.faces[..=d].to_vec(),
            degeneracies: self.degeneracies[..=d].to_vec(),
        };
        out.degeneracies[d] = vec![Vec::new(); out.counts[d]];
        out
    }

    /// Check the simplicial identities on all stored degrees.
    pub fn validate(&self) -> ValidationReport {
        let mut rep = ValidationReport::new(format!("truncated simplicial set (dim {})", self.dim));
        if self.counts.len() != self.dim + 1
            || self.faces.len() != self.dim + 1
            || self.degeneracies.len() != self.dim + 1
        {
            rep.violation("shape", "table lengths do not match the dimension bound");
            return rep;
        }
        for n in 0..=self.dim {
            if self.faces[n].len() != self.counts[n] || self.degeneracies[n].len() != self.counts[n]
            {
                rep.violation("shape", format!("tables at degree {n} do not match the count"));
                return rep;
            }
            for x in 0..self.counts[n] {
                let want_f = if n == 0 { 0 } else { n + 1 };
                let want_s = if n == self.dim { 0 } else { n + 1 };
                if self.faces[n][x].len() != want_f || self.degeneracies[n][x].len() != want_s {
                    rep.violation("shape", format!("row ({n}, {x}) has the wrong arity"));
                    return rep;
                }
                if n > 0 && self.faces[n][x].iter().any(|&f| f >= self.counts[n - 1]) {
                    rep.violation("range", format!("face of ({n}, {x}) out of range"));
                }
                if n < self.dim && self.degeneracies[n][x].iter().any(|&s| s >= self.counts[n + 1])
                {
                    rep.violation("range", format!("degeneracy of ({n}, {x}) out of range"));
                }
            }
        }
        if !rep.is_valid() {
            return rep;
        }
        for n in 2..=self.dim {
            for x in 0..self.counts[n] {
                for j in 0..=n {
                    for i in 0..j {
                        let a = self.faces[n - 1][self.faces[n][x][j]][i];
                        let b = self.faces[n - 1][self.faces[n][x][i]][j - 1];
                        if a != b {
                            rep.violation(
                                "simplicial",
                                format!("d{i} d{j} ≠ d{} d{i} at ({n}, {x})", j - 1),
                            );
                        } else {
                            rep.tick();
                        }
                    }
                }
            }
        }
        for n in 0..self.dim.saturating_sub(1) {
            for x in 0..self.counts[n] {
                for j in 0..=n {
                    for i in 0..=j {
                        let a = self.degeneracies[n + 1][self.degeneracies[n][x][j]][i];
                        let b = self.degeneracies[n + 1][self.degeneracies[n][x][i]][j + 1];
                        if a != b {
                            rep.violation(
                                "simplicial",
                                format!("s{i} s{j} ≠ s{} s{i} at ({n}, {x})", j + 1),
                            );
                        } else {
                            rep.tick();
                        }
                    }
                }
            }
        }
        for n in 0..self.dim {
            for x in 0..self.counts[n] {
                for j in 0..=n {
                    let sx = self.degeneracies[n][x][j];
                    for i in 0..=n + 1 {
                        let got = self.faces[n + 1][sx][i];
                        let want = if i == j || i == j + 1 {
                            x
                        } else if i < j {
                            self.degeneracies[n - 1][self.faces[n][x][i]][j - 1]
                        } else {
                            self.degeneracies[n - 1][self.faces[n][x][i - 1]][j]
                        };
                        if got != want {
                            rep.violation(
                                "simplicial",
                                format!("d{i} s{j} identity fails at ({n}, {x})"),
                            );
                        } else {
                            rep.tick();
                        }
                    }
                }
            }
        }
        rep
    }
}

/// A simplicial map between truncated complexes, tabulated per degree.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SMap {
    pub maps: Vec<Vec<usize>>,
}

impl SMap {
    pub fn identity(k: &TruncatedSSet) -> SMap {
        SMap { maps: (0..=k.dim).map(|n| (0..k.counts[n]).collect()).collect() }
    }

    /// `g ∘ self`, on the common stored degrees.
    pub fn then(&self, g: &SMap) -> SMap {
        let d = self.maps.len().min(g.maps.len());
        SMap {
            maps: (0..d).map(|n| self.maps[n].iter().map(|&x| g.maps[n][x]).collect()).collect(),
        }
    }

    pub fn validate(&self, dom: &TruncatedSSet, cod: &TruncatedSSet) -> Result<()> {
        if self.maps.len() != dom.dim + 1 || cod.dim < dom.dim {
            return Err(Error::Malformed("simplicial map tables do not match the domain".into()));
        }
        for n in 0..=dom.dim {
            if self.maps[n].len() != dom.counts[n] {
                return Err(Error::Malformed(format!("degree {n} table has the wrong length")));
            }
            for x in 0..dom.counts[n] {
                let z = self.maps[n][x];
                if z >= cod.counts[n] {
                    return Err(Error::Malformed(format!("image of ({n}, {x}) out of range")));
                }
                for i in 0..if n == 0 { 0 } else { n + 1 } {
                    if cod.faces[n][z][i] != self.maps[n - 1][dom.faces[n][x][i]] {
                        return Err(Error::Invalid(format!(
                            "map does not commute with d{i} at ({n}, {x})"
                        )));
                    }
                }
                if n < dom.dim {
                    for j in 0..=n {
                        if cod.degeneracies[n][z][j] != self.maps[n + 1][dom.degeneracies[n][x][j]]
                        {
                            return Err(Error::Invalid(format!(
                                "map does not commute with s{j} at ({n}, {x})"
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn is_injective(&self, dom: &TruncatedSSet) -> bool {
        self.maps
            .iter()
            .take(dom.dim + 1)
            .all(|row| row.iter().collect::<BTreeSet<_>>().len() == row.len())
    }
}

// ---------------------------------------------------------------------------
// Standard complexes
// ---------------------------------------------------------------------------

fn monotone_maps(k: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0usize; k + 1];
    loop {
        out.push(cur.clone());
        let mut i = k;
        loop {
            if cur[i] < n {
                cur[i] += 1;
                for j in i + 1..=k {
                    cur[j] = cur[i];
                }
                break;
            }
            if i == 0 {
                return out;
            }
            i -= 1;
        }
    }
}

fn subcomplex_of_delta(n: usize, dim: usize, pred: impl Fn(&[usize]) -> bool) -> TruncatedSSet {
    let mut levels: Vec<Vec<Vec<usize>>> = Vec::new();
    let mut index: Vec<BTreeMap<Vec<usize>, usize>> = Vec::new();
    for k in 0..=dim {
        let simps: Vec<Vec<usize>> = monotone_maps(k, n).into_iter().filter(|v| pred(v)).collect();
        let idx = simps.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
        levels.push(simps);
        index.push(idx);
    }
    let mut out = TruncatedSSet::empty(dim);
    for k in 0..=dim {
        out.counts[k] = levels[k].len();
        out.faces[k] = levels[k]
            .iter()
            .map(|v| {
                if k == 0 {
                    Vec::new()
                } else {
                    (0..=k)
                        .map(|i| {
                            let mut w = v.clone();
                            w.remove(i);
                            index[k - 1][&w]
                        })
                        .collect()
                }
            })
            .collect();
        out.degeneracies[k] = levels[k]
            .iter()
            .map(|v| {
                if k == dim {
                    Vec::new()
                } else {
                    (0..=k)
                        .map(|j| {
                            let mut w = v.clone();
                            w.insert(j, v[j]);
                            index[k + 1][&w]
                        })
                        .collect()
                }
            })
            .collect();
    }
    out
}

/// The standard simplex Δ[n], truncated at `dim`.
pub fn delta(n: usize, dim: usize) -> TruncatedSSet {
    subcomplex_of_delta(n, dim, |_| true)
}

/// The boundary ∂Δ[n]: simplices missing some vertex.
pub fn boundary(n: usize, dim: usize) -> TruncatedSSet {
    subcomplex_of_delta(n, dim, |v| (0..=n).any(|u| !v.contains(&u)))
}

/// The horn Λᵏ[n]: simplices missing some vertex other than `k`.
pub fn horn(n: usize, k: usize, dim: usize) -> TruncatedSSet {
    subcomplex_of_delta(n, dim, |v| (0..=n).any(|u| u != k && !v.contains(&u)))
}

/// A nerve together with the chain each simplex stands for.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Nerve {
    pub sset: TruncatedSSet,
    /// `chains[n][x] = (first object, the n composable morphisms)`.
    pub chains: Vec<Vec<(usize, Vec<usize>)>>,
}

/// The nerve of a finite category, truncated at `dim`: `n`-simplices are
/// composable chains of `n` morphisms.
pub fn nerve(c: &FinCategory, dim: usize) -> Result<Nerve> {
    let mut chains: Vec<Vec<(usize, Vec<usize>)>> = Vec::new();
    let mut index: Vec<BTreeMap<(usize, Vec<usize>), usize>> = Vec::new();
    for n in 0..=dim {
        let mut level = Vec::new();
        if n == 0 {
            for &o in &c.objects {
                level.push((o, Vec::new()));
            }
        } else {
            for (o, ms) in &chains[n - 1] {
                let end = if ms.is_empty() {
                    *o
                } else {
                    c.mor(*ms.last().unwrap()).expect("tabulated morphism").tgt
                };
                for m in &c.morphisms {
                    if m.src == end {
                        let mut v = ms.clone();
                        v.push(m.id);
                        level.push((*o, v));
                    }
                }
            }
            level.sort();
        }
        index.push(level.iter().cloned().enumerate().map(|(i, k)| (k, i)).collect());
        chains.push(level);
    }
    let compose_chain = |o: usize, ms: &[usize], drop: usize| -> Result<(usize, Vec<usize>)> {
        // face d_drop of the chain
        let n = ms.len();
        let mut v = Vec::with_capacity(n - 1);
        let mut start = o;
        for (i, &m) in ms.iter().enumerate() {
            if drop == 0 && i == 0 {
                start = c.mor(m).unwrap().tgt;
                continue;
            }
            if i + 1 == drop && drop < n {
                let g = ms[i + 1];
                let gf = c
                    .compose(g, m)
                    .ok_or_else(|| Error::Malformed("composition not tabulated".into()))?;
                v.push(gf);
                continue;
            }
            if i == drop && drop < n && drop > 0 {
                continue; // absorbed into the composite above
            }
            if i == n - 1 && drop == n {
                continue;
            }
            v.push(m);
        }
        Ok((start, v))
    };
    let mut sset = TruncatedSSet::empty(dim);
    for n in 0..=dim {
        sset.counts[n] = chains[n].len();
        sset.faces[n] = Vec::with_capacity(chains[n].len());
        sset.degeneracies[n] = Vec::with_capacity(chains[n].len());
        for (o, ms) in &chains[n] {
            let f = if n == 0 {
                Vec::new()
            } else {
                let mut row = Vec::with_capacity(n + 1);
                for i in 0..=n {
                    row.push(index[n - 1][&compose_chain(*o, ms, i)?]);
                }
                row
            };
            sset.faces[n].push(f);
            let s = if n == dim {
                Vec::new()
            } else {
                (0..=n)
                    .map(|j| {
                        let at = if j == 0 {
                            *o
                        } else {
                            c.mor(ms[j - 1]).unwrap().tgt
                        };
                        let mut v = ms.clone();
                        v.insert(j, c.identity_of(at).expect("identity tabulated"));
                        index[n + 1][&(*o, v)]
                    })
                    .collect()
            };
            sset.degeneracies[n].push(s);
        }
    }
    Ok(Nerve { sset, chains })
}

/// The `dim`-truncation of E[1], the nerve of the contractible groupoid on
/// two objects.
pub fn e1(dim: usize) -> Nerve {
    nerve(&FinCategory::from_preorder(2, |_, _| true), dim).expect("total preorder nerve")
}

// ---------------------------------------------------------------------------
// Degeneracy-normal forms and the join
// ---------------------------------------------------------------------------

/// `(base degree, nondegenerate base, monotone surjection)` — the normal
/// form of a simplex, valid in any degree, including above the truncation.
pub type NormalKey = (usize, usize, Vec<usize>);

struct NfView<'a> {
    k: &'a TruncatedSSet,
    /// Per degree: the nondegenerate simplices, in index order.
    nd: Vec<Vec<usize>>,
    nd_pos: Vec<BTreeMap<usize, usize>>,
    /// Faces of nondegenerate simplices, in normal form.
    nd_faces: Vec<Vec<Vec<NormalKey>>>,
}

fn surjections(n: usize, k: usize) -> Vec<Vec<usize>> {
    // monotone surjections [n] ↠ [k]: step sequences of 0/1 summing to k
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut steps = vec![false; n];
    fn rec(steps: &mut Vec<bool>, i: usize, left: usize, out: &mut Vec<Vec<usize>>) {
        let n = steps.len();
        if n - i < left {
            return;
        }
        if i == n {
            let mut v = vec![0usize];
            for &s in steps.iter() {
                v.push(v.last().unwrap() + usize::from(s));
            }
            out.push(v);
            return;
        }
        steps[i] = false;
        rec(steps, i + 1, left, out);
        if left > 0 {
            steps[i] = true;
            rec(steps, i + 1, left - 1, out);
        }
    }
    rec(&mut steps, 0, k, &mut out);
    out.sort();
    out
}

impl<'a> NfView<'a> {
    fn new(k: &'a TruncatedSSet) -> NfView<'a> {
        let nd: Vec<Vec<usize>> = (0..=k.dim).map(|n| k.nondegenerate(n)).collect();
        let nd_pos: Vec<BTreeMap<usize, usize>> = nd
            .iter()
            .map(|v| v.iter().copied().enumerate().map(|(i, x)| (x, i)).collect())
            .collect();
        let mut view = NfView { k, nd, nd_pos, nd_faces: Vec::new() };
        let mut nd_faces = Vec::new();
        for n in 0..=k.dim {
            let rows: Vec<Vec<NormalKey>> = view.nd[n]
                .iter()
                .map(|&x| {
                    if n == 0 {
                        Vec::new()
                    } else {
                        (0..=n).map(|i| view.key_of(n - 1, k.faces[n][x][i])).collect()
                    }
                })
                .collect();
            nd_faces.push(rows);
        }
        view.nd_faces = nd_faces;
        view
    }

    /// Normal form of a stored simplex.
    fn key_of(&self, n: usize, x: usize) -> NormalKey {
        if let Some(&p) = self.nd_pos[n].get(&x) {
            return (n, p, (0..=n).collect());
        }
        let (y, j) = self.k.degeneracy_preimage(n, x).expect("degenerate simplex");
        let (bk, bb, s) = self.key_of(n - 1, y);
        // precompose with the codegeneracy σ_j : [n] → [n−1]
        let t: Vec<usize> = (0..=n).map(|i| s[if i <= j { i } else { i - 1 }]).collect();
        (bk, bb, t)
    }

    /// All simplices of degree `n` (any `n`), in normal form, sorted.
    fn keys_at(&self, n: usize) -> Vec<NormalKey> {
        let mut out = Vec::new();
        for k in 0..=n.min(self.k.dim) {
            for b in 0..self.nd[k].len() {
                for s in surjections(n, k) {
                    out.push((k, b, s));
                }
            }
        }
        out.sort();
        out
    }

    /// `d_i` on normal forms.
    fn face(&self, key: &NormalKey, i: usize) -> NormalKey {
        let (k, b, s) = key;
        let n = s.len() - 1;
        let t: Vec<usize> = (0..n).map(|r| s[if r < i { r } else { r + 1 }]).collect();
        let covers = t.first() == Some(&0) && t.last() == Some(k) && {
            let mut full = true;
            for w in t.windows(2) {
                if w[1] > w[0] + 1 {
                    full = false;
                }
            }
            full
        };
        if covers && !t.is_empty() {
            return (*k, *b, t);
        }
        // exactly the value s[i] is missed; collapse and take that face of
        // the base
        let m = s[i];
        let t2: Vec<usize> = t.iter().map(|&v| if v > m { v - 1 } else { v }).collect();
        let (k2, b2, s2) = &self.nd_faces[*k][*b][m];
        (*k2, *b2, t2.iter().map(|&v| s2[v]).collect())
    }

    /// `s_j` on normal forms.
    fn degeneracy(&self, key: &NormalKey, j: usize) -> NormalKey {
        let (k, b, s) = key;
        let n = s.len() - 1;
        let t: Vec<usize> = (0..=n + 1).map(|i| s[if i <= j { i } else { i - 1 }]).collect();
        (*k, *b, t)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum JoinKey {
    A(NormalKey),
    B(NormalKey),
    Pair(NormalKey, NormalKey),
}

/// The join `K ⋆ L` with the canonical inclusions of both factors.  Exact in
/// all stored degrees (`dim = dim K + dim L + 1`); simplices of the factors
/// above their own truncation are supplied by degeneracy-normal forms.
pub fn join(k: &TruncatedSSet, l: &TruncatedSSet) -> (TruncatedSSet, SMap, SMap) {
    let dim = k.dim + l.dim + 1;
    let kv = NfView::new(k);
    let lv = NfView::new(l);
    let deg_of = |key: &NormalKey| key.2.len() - 1;
    let mut index: Vec<BTreeMap<JoinKey, usize>> = Vec::new();
    let mut levels: Vec<Vec<JoinKey>> = Vec::new();
    for n in 0..=dim {
        let mut level: Vec<JoinKey> = Vec::new();
        for key in kv.keys_at(n) {
            level.push(JoinKey::A(key));
        }
        for key in lv.keys_at(n) {
            level.push(JoinKey::B(key));
        }
        for i in 0..n {
            let j = n - 1 - i;
            for a in kv.keys_at(i) {
                for b in lv.keys_at(j) {
                    level.push(JoinKey::Pair(a.clone(), b.clone()));
                }
            }
        }
        level.sort();
        index.push(level.iter().cloned().enumerate().map(|(p, q)| (q, p)).collect());
        levels.push(level);
    }
    let face = |key: &JoinKey, r: usize| -> JoinKey {
        match key {
            JoinKey::A(a) => JoinKey::A(kv.face(a, r)),
            JoinKey::B(b) => JoinKey::B(lv.face(b, r)),
            JoinKey::Pair(a, b) => {
                let (i, j) = (deg_of(a), deg_of(b));
                if r <= i {
                    if i == 0 {
                        JoinKey::B(b.clone())
                    } else {
                        JoinKey::Pair(kv.face(a, r), b.clone())
                    }
                } else if j == 0 && r == i + j + 1 {
                    JoinKey::A(a.clone())
                } else {
                    JoinKey::Pair(a.clone(), lv.face(b, r - i - 1))
                }
            }
        }
    };
    let degen = |key: &JoinKey, r: usize| -> JoinKey {
        match key {
            JoinKey::A(a) => JoinKey::A(kv.degeneracy(a, r)),
            JoinKey::B(b) => JoinKey::B(lv.degeneracy(b, r)),
            JoinKey::Pair(a, b) => {
                let i = deg_of(a);
                if r <= i {
                    JoinKey::Pair(kv.degeneracy(a, r), b.clone())
                } else {
                    JoinKey::Pair(a.clone(), lv.degeneracy(b, r - i - 1))
                }
            }
        }
    };
    let mut out = TruncatedSSet::empty(dim);
    for n in 0..=dim {
        out.counts[n] = levels[n].len();
        out.faces[n] = levels[n]
            .iter()
            .map(|key| {
                if n == 0 {
                    Vec::new()
                } else {
                    (0..=n).map(|r| index[n - 1][&face(key, r)]).collect()
                }
            })
            .collect();
        out.degeneracies[n] = levels[n]
            .iter()
            .map(|key| {
                if n == dim {
                    Vec::new()
                } else {
                    (0..=n).map(|r| index[n + 1][&degen(key, r)]).collect()
                }
            })
            .collect();
    }
    let incl_k = SMap {
        maps: (0..=k.dim)
            .map(|n| (0..k.counts[n]).map(|x| index[n][&JoinKey::A(kv.key_of(n, x))]).collect())
            .collect(),
    };
    let incl_l = SMap {
        maps: (0..=l.dim)
            .map(|n| (0..l.counts[n]).map(|x| index[n][&JoinKey::B(lv.key_of(n, x))]).collect())
            .collect(),
    };
    (out, incl_k, incl_l)
}

// ---------------------------------------------------------------------------
// Slices and commas
// ---------------------------------------------------------------------------

/// The slice of `c` over the vertex `x`: `n`-simplices are the
/// `(n+1)`-simplices whose last vertex is `x`.  Exact up to `dim c − 1`.
/// Also returns the projection to `c` (forget the cone point).
pub fn slice(c: &TruncatedSSet, x: usize) -> Result<(TruncatedSSet, SMap)> {
    if c.dim == 0 {
        return Err(Error::Unsupported("slice needs at least one stored degree".into()));
    }
    let dim = c.dim - 1;
    let mut members: Vec<Vec<usize>> = Vec::new();
    let mut pos: Vec<BTreeMap<usize, usize>> = Vec::new();
    for n in 0..=dim {
        let level: Vec<usize> =
            (0..c.counts[n + 1]).filter(|&s| c.last_vertex(n + 1, s) == x).collect();
        pos.push(level.iter().copied().enumerate().map(|(i, s)| (s, i)).collect());
        members.push(level);
    }
    let mut out = TruncatedSSet::empty(dim);
    for n in 0..=dim {
        out.counts[n] = members[n].len();
        out.faces[n] = members[n]
            .iter()
            .map(|&s| {
                if n == 0 {
                    Vec::new()
                } else {
                    (0..=n).map(|i| pos[n - 1][&c.faces[n + 1][s][i]]).collect()
                }
            })
            .collect();
        out.degeneracies[n] = members[n]
            .iter()
            .map(|&s| {
                if n == dim {
                    Vec::new()
                } else {
                    (0..=n).map(|j| pos[n + 1][&c.degeneracies[n + 1][s][j]]).collect()
                }
            })
            .collect();
    }
    let proj = SMap {
        maps: (0..=dim).map(|n| members[n].iter().map(|&s| c.faces[n + 1][s][n + 1]).collect()).collect(),
    };
    Ok((out, proj))
}

/// The comma complex of the vertex `x` over `g : K → C`: the pullback of
/// the slice projection along `g`.  Returns the complex and the projections
/// to the slice and to `K`.
pub fn comma(
    c: &TruncatedSSet,
    x: usize,
    k: &TruncatedSSet,
    g: &SMap,
) -> Result<(TruncatedSSet, SMap, SMap)> {
    let (sl, proj) = slice(c, x)?;
    let dim = sl.dim.min(k.dim);
    let mut pairs: Vec<Vec<(usize, usize)>> = Vec::new();
    let mut pos: Vec<BTreeMap<(usize, usize), usize>> = Vec::new();
    for n in 0..=dim {
        let mut level = Vec::new();
        for s in 0..sl.counts[n] {
            for y in 0..k.counts[n] {
                if proj.maps[n][s] == g.maps[n][y] {
                    level.push((s, y));
                }
            }
        }
        pos.push(level.iter().copied().enumerate().map(|(i, p)| (p, i)).collect());
        pairs.push(level);
    }
    let mut out = TruncatedSSet::empty(dim);
    for n in 0..=dim {
        out.counts[n] = pairs[n].len();
        out.faces[n] = pairs[n]
            .iter()
            .map(|&(s, y)| {
                if n == 0 {
                    Vec::new()
                } else {
                    (0..=n)
                        .map(|i| pos[n - 1][&(sl.faces[n][s][i], k.faces[n][y][i])])
                        .collect()
                }
            })
            .collect();
        out.degeneracies[n] = pairs[n]
            .iter()
            .map(|&(s, y)| {
                if n == dim {
                    Vec::new()
                } else {
                    (0..=n)
                        .map(|j| pos[n + 1][&(sl.degeneracies[n][s][j], k.degeneracies[n][y][j])])
                        .collect()
                }
            })
            .collect();
    }
    let to_slice =
        SMap { maps: (0..=dim).map(|n| pairs[n].iter().map(|p| p.0).collect()).collect() };
    let to_k = SMap { maps: (0..=dim).map(|n| pairs[n].iter().map(|p| p.1).collect()).collect() };
    Ok((out, to_slice, to_k))
}

// ---------------------------------------------------------------------------
// Enumerating simplicial maps
// ---------------------------------------------------------------------------

struct MapSearch<'a> {
    dom: &'a TruncatedSSet,
    cod: &'a TruncatedSSet,
    fixed: &'a BTreeMap<(usize, usize), usize>,
    bijective: bool,
    first_only: bool,
    order: Vec<(usize, usize)>,
    preimage: Vec<Vec<Option<(usize, usize)>>>,
    maps: Vec<Vec<usize>>,
    used: Vec<BTreeSet<usize>>,
    found: Vec<SMap>,
}

const NOTHING: usize = usize::MAX;

impl<'a> MapSearch<'a> {
    fn candidate_ok(&self, n: usize, x: usize, z: usize) -> bool {
        if let Some(&f) = self.fixed.get(&(n, x)) {
            if z != f {
                return false;
            }
        }
        if self.bijective && self.used[n].contains(&z) {
            return false;
        }
        if n > 0 {
            for i in 0..=n {
                if self.cod.faces[n][z][i] != self.maps[n - 1][self.dom.faces[n][x][i]] {
                    return false;
                }
            }
        }
        true
    }

    fn run(&mut self, at: usize) {
        if self.first_only && !self.found.is_empty() {
            return;
        }
        if at == self.order.len() {
            self.found.push(SMap { maps: self.maps.clone() });
            return;
        }
        let (n, x) = self.order[at];
        let cands: Vec<usize> = match self.preimage[n][x] {
            Some((y, j)) => {
                let z = self.cod.degeneracies[n - 1][self.maps[n - 1][y]][j];
                if self.candidate_ok(n, x, z) {
                    vec![z]
                } else {
                    Vec::new()
                }
            }
            None => (0..self.cod.counts[n]).filter(|&z| self.candidate_ok(n, x, z)).collect(),
        };
        for z in cands {
            self.maps[n][x] = z;
            if self.bijective {
                self.used[n].insert(z);
            }
            self.run(at + 1);
            if self.bijective {
                self.used[n].remove(&z);
            }
            self.maps[n][x] = NOTHING;
        }
    }
}

fn search_maps(
    dom: &TruncatedSSet,
    cod: &TruncatedSSet,
    fixed: &BTreeMap<(usize, usize), usize>,
    bijective: bool,
    first_only: bool,
) -> Vec<SMap> {
    if bijective && dom.counts != cod.counts {
        return Vec::new();
    }
    let mut order = Vec::new();
    let mut preimage = Vec::new();
    for n in 0..=dom.dim {
        preimage.push((0..dom.counts[n]).map(|x| dom.degeneracy_preimage(n, x)).collect());
        for x in 0..dom.counts[n] {
            order.push((n, x));
        }
    }
    let mut search = MapSearch {
        dom,
        cod,
        fixed,
        bijective,
        first_only,
        order,
        preimage,
        maps: (0..=dom.dim).map(|n| vec![NOTHING; dom.counts[n]]).collect(),
        used: vec![BTreeSet::new(); dom.dim + 1],
        found: Vec::new(),
    };
    search.run(0);
    search.found
}

/// Every simplicial map `dom → cod` (exhaustive).
pub fn simplicial_maps(dom: &TruncatedSSet, cod: &TruncatedSSet) -> Vec<SMap> {
    search_maps(dom, cod, &BTreeMap::new(), false, false)
}

/// Every extension of `f : A → C` along an injective `incl : A → B`.
pub fn extensions(
    incl: &SMap,
    f: &SMap,
    a: &TruncatedSSet,
    b: &TruncatedSSet,
    c: &TruncatedSSet,
) -> Vec<SMap> {
    let mut fixed = BTreeMap::new();
    for n in 0..=a.dim {
        for x in 0..a.counts[n] {
            fixed.insert((n, incl.maps[n][x]), f.maps[n][x]);
        }
    }
    search_maps(b, c, &fixed, false, false)
}

/// A degreewise-bijective simplicial map, if one exists.
pub fn find_iso(k: &TruncatedSSet, l: &TruncatedSSet) -> Option<SMap> {
    if k.dim != l.dim {
        return None;
    }
    search_maps(k, l, &BTreeMap::new(), true, true).into_iter().next()
}

pub fn is_isomorphic(k: &TruncatedSSet, l: &TruncatedSSet) -> bool {
    find_iso(k, l).is_some()
}

// ---------------------------------------------------------------------------
// Homotopical categories, inverse categories, 2-out-of-6 closure
// ---------------------------------------------------------------------------

/// A finite category with a wide marking of weak equivalences closed under
/// composition and 2-out-of-6.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HomotopicalFinCategory {
    pub cat: FinCategory,
    pub weqs: BTreeSet<usize>,
}

impl HomotopicalFinCategory {
    /// Mark only what the axioms force (identities and what 2-out-of-6
    /// generates from them, i.e. the isomorphisms).
    pub fn minimal(cat: FinCategory) -> HomotopicalFinCategory {
        let weqs = two_out_of_six_closure(&cat, &BTreeSet::new());
        HomotopicalFinCategory { cat, weqs }
    }

    pub fn validate(&self) -> ValidationReport {
        let mut rep = ValidationReport::new("homotopical category");
        for &(_, id) in &self.cat.identities {
            if self.weqs.contains(&id) {
                rep.tick();
            } else {
                rep.violation("wide", format!("identity {id} is not marked"));
            }
        }
        let closed = two_out_of_six_closure(&self.cat, &self.weqs);
        if closed == self.weqs {
            rep.tick();
        } else {
            let extra: Vec<usize> = closed.difference(&self.weqs).copied().collect();
            rep.violation("two-out-of-six", format!("marking is not closed; missing {extra:?}"));
        }
        rep
    }
}

/// A homotopical category with a degree function making it inverse:
/// non-identity arrows strictly lower the degree.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InverseCat {
    pub hcat: HomotopicalFinCategory,
    /// Degree of each object, indexed by position in `cat.objects`.
    pub degree: Vec<usize>,
}

impl InverseCat {
    pub fn obj_pos(&self, label: usize) -> usize {
        self.hcat.cat.objects.iter().position(|&o| o == label).expect("object present")
    }

    pub fn validate(&self) -> ValidationReport {
        let mut rep = self.hcat.validate();
        if self.degree.len() != self.hcat.cat.objects.len() {
            rep.violation("degree", "degree table has the wrong length");
            return rep;
        }
        for m in &self.hcat.cat.morphisms {
            if self.hcat.cat.is_identity(m.id) {
                continue;
            }
            let (ds, dt) = (self.degree[self.obj_pos(m.src)], self.degree[self.obj_pos(m.tgt)]);
            if ds > dt {
                rep.tick();
            } else {
                rep.violation(
                    "inverse",
                    format!("arrow {} does not strictly lower degree ({ds} → {dt})", m.id),
                );
            }
        }
        rep
    }
}

/// The opposite of a table-presented category.
pub fn opposite(c: &FinCategory) -> FinCategory {
    FinCategory {
        objects: c.objects.clone(),
        morphisms: c
            .morphisms
            .iter()
            .map(|m| crate::cat::MorRec { id: m.id, src: m.tgt, tgt: m.src })
            .collect(),
        identities: c.identities.clone(),
        composition: c.composition.iter().map(|&(g, f, gf)| (f, g, gf)).collect(),
    }
}

/// The least wide marking containing the generators and closed under
/// composition and the 2-out-of-6 rule.
pub fn two_out_of_six_closure(c: &FinCategory, generators: &BTreeSet<usize>) -> BTreeSet<usize> {
    let mut w: BTreeSet<usize> = generators.clone();
    for &(_, id) in &c.identities {
        w.insert(id);
    }
    // composites indexed by middle morphism: g∘f with the pair recorded
    let mut by_inner: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new(); // f -> [(g, gf)]
    for &(g, f, gf) in &c.composition {
        by_inner.entry(f).or_default().push((g, gf));
    }
    loop {
        let before = w.len();
        for &(g, f, gf) in &c.composition {
            if w.contains(&g) && w.contains(&f) {
                w.insert(gf);
            }
        }
        // 2-out-of-6: for composable f, g, h with gf and hg marked, mark all
        for &(g, f, gf) in &c.composition {
            if !w.contains(&gf) {
                continue;
            }
            if let Some(hs) = by_inner.get(&g) {
                for &(h, hg) in hs {
                    if w.contains(&hg) {
                        w.insert(f);
                        w.insert(g);
                        w.insert(h);
                        if let Some(c3) = c.compose(h, gf) {
                            w.insert(c3);
                        }
                    }
                }
            }
        }
        if w.len() == before {
            return w;
        }
    }
}

// ---------------------------------------------------------------------------
// The categories of simplices: D, Sd, D_a
// ---------------------------------------------------------------------------

/// What an object of a `D`-category stands for.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DLabel {
    /// A functor `[n] → J`: first object and the `n` composable arrows.
    Chain { start: usize, mors: Vec<usize> },
    /// A simplex `(degree, index)` of a truncated complex.
    Simplex { degree: usize, index: usize },
}

/// The (direct) category of simplices of a category or complex: objects of
/// degree `n` are `n`-chains/simplices, morphisms are injective monotone
/// reindexings, and the marking is the class of weak equivalences.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DCat {
    pub cat: FinCategory,
    pub degree: Vec<usize>,
    pub labels: Vec<DLabel>,
    /// For each morphism index: the injective monotone map `[n] → [n′]`.
    pub alpha: Vec<Vec<usize>>,
    pub weqs: BTreeSet<usize>,
}

fn injections(n: usize, m: usize) -> Vec<Vec<usize>> {
    // strictly monotone maps [n] → [m]
    let mut out = Vec::new();
    if n > m {
        return out;
    }
    let mut cur: Vec<usize> = (0..=n).collect();
    loop {
        out.push(cur.clone());
        let mut i = n;
        loop {
            if cur[i] < m - (n - i) {
                cur[i] += 1;
                for j in i + 1..=n {
                    cur[j] = cur[j - 1] + 1;
                }
                break;
            }
            if i == 0 {
                return out;
            }
            i -= 1;
        }
    }
}

fn build_dcat(
    degrees: Vec<Vec<DLabel>>,
    act: impl Fn(&DLabel, &[usize]) -> DLabel,
) -> (FinCategory, Vec<usize>, Vec<DLabel>, Vec<Vec<usize>>, Vec<(usize, usize, Vec<usize>)>) {
    let mut labels = Vec::new();
    let mut degree = Vec::new();
    let mut pos: BTreeMap<DLabel, usize> = BTreeMap::new();
    for (n, level) in degrees.iter().enumerate() {
        for l in level {
            pos.insert(l.clone(), labels.len());
            labels.push(l.clone());
            degree.push(n);
        }
    }
    // morphisms keyed by (target object, α)
    let mut morphisms = Vec::new();
    let mut mor_pos: BTreeMap<(usize, Vec<usize>), usize> = BTreeMap::new();
    let mut alpha = Vec::new();
    let mut recs = Vec::new();
    for (t, lt) in labels.iter().enumerate() {
        let nt = degree[t];
        for n in 0..=nt {
            for a in injections(n, nt) {
                let src_label = act(lt, &a);
                let s = pos[&src_label];
                let id = morphisms.len();
                mor_pos.insert((t, a.clone()), id);
                morphisms.push(crate::cat::MorRec { id, src: s, tgt: t });
                alpha.push(a.clone());
                recs.push((s, t, a));
            }
        }
    }
    let identities: Vec<(usize, usize)> =
        (0..labels.len()).map(|o| (o, mor_pos[&(o, (0..=degree[o]).collect())])).collect();
    let mut composition = Vec::new();
    for g in 0..morphisms.len() {
        let (gs, gt, ga) = (&recs[g].0, recs[g].1, recs[g].2.clone());
        for f in 0..morphisms.len() {
            if recs[f].1 != *gs {
                continue;
            }
            let fa = &recs[f].2;
            let comp: Vec<usize> = fa.iter().map(|&i| ga[i]).collect();
            composition.push((g, f, mor_pos[&(gt, comp)]));
        }
    }
    let cat =
        FinCategory { objects: (0..labels.len()).collect(), morphisms, identities, composition };
    (cat, degree, labels, alpha, recs)
}

/// `D(J)` for a homotopical category `J`, up to chain width `w`: objects are
/// functors `[n] → J` with `n ≤ w`, morphisms are injective monotone
/// reindexings, and a morphism is marked when the comparison arrow of the
/// first vertices is a weak equivalence of `J` (the marking created by
/// evaluation at 0).
pub fn d_of_category(j: &HomotopicalFinCategory, width: usize) -> Result<DCat> {
    let c = &j.cat;
    let mut degrees: Vec<Vec<DLabel>> = Vec::new();
    for n in 0..=width {
        let mut level = Vec::new();
        if n == 0 {
            for &o in &c.objects {
                level.push(DLabel::Chain { start: o, mors: Vec::new() });
            }
        } else {
            for l in &degrees[n - 1] {
                let DLabel::Chain { start, mors } = l else { unreachable!() };
                let end = if mors.is_empty() {
                    *start
                } else {
                    c.mor(*mors.last().unwrap()).unwrap().tgt
                };
                for m in &c.morphisms {
                    if m.src == end {
                        let mut v = mors.clone();
                        v.push(m.id);
                        level.push(DLabel::Chain { start: *start, mors: v });
                    }
                }
            }
        }
        level.sort();
        degrees.push(level);
    }
    // composite of the chain from position a to position b
    let chain_arrow = |start: usize, mors: &[usize], a: usize, b: usize| -> usize {
        let at = if a == 0 { start } else { c.mor(mors[a - 1]).unwrap().tgt };
        let mut cur = c.identity_of(at).unwrap();
        for &m in mors.iter().take(b).skip(a) {
            cur = c.compose(m, cur).expect("composable chain");
        }
        cur
    };
    let act = |lt: &DLabel, a: &[usize]| -> DLabel {
        let DLabel::Chain { start, mors } = lt else { unreachable!() };
        let new_start = if a[0] == 0 {
            *start
        } else {
            c.mor(chain_arrow(*start, mors, 0, a[0])).unwrap().tgt
        };
        let new_mors: Vec<usize> =
            a.windows(2).map(|w| chain_arrow(*start, mors, w[0], w[1])).collect();
        DLabel::Chain { start: new_start, mors: new_mors }
    };
    let (cat, degree, labels, alpha, recs) = build_dcat(degrees, act);
    let mut weqs = BTreeSet::new();
    for (id, (_, t, a)) in recs.iter().enumerate() {
        let DLabel::Chain { start, mors } = &labels[*t] else { unreachable!() };
        if j.weqs.contains(&chain_arrow(*start, mors, 0, a[0])) {
            weqs.insert(id);
        }
    }
    Ok(DCat { cat, degree, labels, alpha, weqs })
}

/// `D(K)` for a truncated complex `K`: objects are the stored simplices,
/// morphisms the injective monotone reindexings acting by iterated faces,
/// and the marking is the 2-out-of-6 closure of the maps whose first-vertex
/// comparison edge is degenerate.
pub fn d_of_sset(k: &TruncatedSSet) -> DCat {
    let degrees: Vec<Vec<DLabel>> = (0..=k.dim)
        .map(|n| (0..k.counts[n]).map(|i| DLabel::Simplex { degree: n, index: i }).collect())
        .collect();
    let act = |lt: &DLabel, a: &[usize]| -> DLabel {
        let DLabel::Simplex { degree, index } = lt else { unreachable!() };
        DLabel::Simplex { degree: a.len() - 1, index: k.restrict(*degree, *index, a) }
    };
    let (cat, degree, labels, alpha, recs) = build_dcat(degrees, act);
    let mut generators = BTreeSet::new();
    for (id, (_, t, a)) in recs.iter().enumerate() {
        let DLabel::Simplex { degree: nt, index } = labels[*t] else { unreachable!() };
        let first = a[0];
        if first == 0 {
            generators.insert(id);
            continue;
        }
        let edge = k.restrict(nt, index, &[0, first]);
        if k.is_degenerate(1, edge) {
            generators.insert(id);
        }
    }
    let weqs = two_out_of_six_closure(&cat, &generators);
    DCat { cat, degree, labels, alpha, weqs }
}

impl DCat {
    /// The opposite, as an inverse category.
    pub fn inverse(&self) -> InverseCat {
        InverseCat {
            hcat: HomotopicalFinCategory { cat: opposite(&self.cat), weqs: self.weqs.clone() },
            degree: self.degree.clone(),
        }
    }

    pub fn object_of(&self, label: &DLabel) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }
}

/// `Sd(J)`: the full subcategory of `D(J)` on the object-injective chains.
pub fn sd(j: &HomotopicalFinCategory, width: usize) -> Result<DCat> {
    let d = d_of_category(j, width)?;
    let keep: Vec<usize> = d
        .labels
        .iter()
        .enumerate()
        .filter(|(_, l)| {
            let DLabel::Chain { start, mors } = l else { unreachable!() };
            let mut objs = vec![*start];
            for &m in mors {
                objs.push(j.cat.mor(m).unwrap().tgt);
            }
            objs.iter().collect::<BTreeSet<_>>().len() == objs.len()
        })
        .map(|(i, _)| i)
        .collect();
    Ok(full_sub_dcat(&d, &keep))
}

/// The full subcategory of a `D`-category on the listed objects,
/// renumbered.
pub fn full_sub_dcat(d: &DCat, keep: &[usize]) -> DCat {
    let obj_map: BTreeMap<usize, usize> =
        keep.iter().copied().enumerate().map(|(new, old)| (old, new)).collect();
    let kept_mor: Vec<usize> = d
        .cat
        .morphisms
        .iter()
        .filter(|m| obj_map.contains_key(&m.src) && obj_map.contains_key(&m.tgt))
        .map(|m| m.id)
        .collect();
    let mor_map: BTreeMap<usize, usize> =
        kept_mor.iter().copied().enumerate().map(|(new, old)| (old, new)).collect();
    let cat = FinCategory {
        objects: (0..keep.len()).collect(),
        morphisms: kept_mor
            .iter()
            .map(|&old| {
                let m = d.cat.mor(old).unwrap();
                crate::cat::MorRec { id: mor_map[&old], src: obj_map[&m.src], tgt: obj_map[&m.tgt] }
            })
            .collect(),
        identities: d
            .cat
            .identities
            .iter()
            .filter(|(o, _)| obj_map.contains_key(o))
            .map(|(o, i)| (obj_map[o], mor_map[i]))
            .collect(),
        composition: d
            .cat
            .composition
            .iter()
            .filter(|(g, f, gf)| {
                mor_map.contains_key(g) && mor_map.contains_key(f) && mor_map.contains_key(gf)
            })
            .map(|(g, f, gf)| (mor_map[g], mor_map[f], mor_map[gf]))
            .collect(),
    };
    DCat {
        cat,
        degree: keep.iter().map(|&o| d.degree[o]).collect(),
        labels: keep.iter().map(|&o| d.labels[o].clone()).collect(),
        alpha: kept_mor.iter().map(|&m| d.alpha[m].clone()).collect(),
        weqs: d.weqs.iter().filter_map(|w| mor_map.get(w).copied()).collect(),
    }
}

/// `D_a(J)`: `D(J)` with a freely adjoined initial object.
pub fn d_a(j: &HomotopicalFinCategory, width: usize) -> Result<DCat> {
    let d = d_of_category(j, width)?;
    let n_obj = d.cat.objects.len();
    let n_mor = d.cat.morphisms.len();
    let init = n_obj;
    let mut morphisms = d.cat.morphisms.clone();
    // one arrow ∅ → x per object, plus the identity of ∅
    for (k, _) in d.cat.objects.iter().enumerate() {
        morphisms.push(crate::cat::MorRec { id: n_mor + k, src: init, tgt: k });
    }
    morphisms.push(crate::cat::MorRec { id: n_mor + n_obj, src: init, tgt: init });
    let mut identities = d.cat.identities.clone();
    identities.push((init, n_mor + n_obj));
    let mut composition = d.cat.composition.clone();
    for m in &d.cat.morphisms {
        composition.push((m.id, n_mor + m.src, n_mor + m.tgt));
    }
    for k in 0..=n_obj {
        composition.push((n_mor + k, n_mor + n_obj, n_mor + k));
    }
    let cat = FinCategory { objects: (0..=n_obj).collect(), morphisms, identities, composition };
    // arrows of the direct category strictly raise degree, and the adjoined
    // initial object maps into everything, so it sits at degree 0 with all
    // chain degrees shifted up by one
    let mut degree: Vec<usize> = d.degree.iter().map(|&n| n + 1).collect();
    degree.push(0);
    let mut labels = d.labels.clone();
    labels.push(DLabel::Chain { start: usize::MAX, mors: Vec::new() });
    let mut alpha = d.alpha.clone();
    for _ in 0..=n_obj {
        alpha.push(Vec::new());
    }
    let mut weqs = d.weqs.clone();
    weqs.insert(n_mor + n_obj);
    Ok(DCat { cat, degree, labels, alpha, weqs })
}

// ---------------------------------------------------------------------------
// Matching categories and cosieves
// ---------------------------------------------------------------------------

/// The matching category of an object `j` of an inverse category: objects
/// are the non-identity arrows out of `j`, morphisms the factorizations.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatchingCategory {
    pub cat: FinCategory,
    /// Per node: the arrow `j → j′` of the inverse category it stands for.
    pub object_mor: Vec<usize>,
    /// Per morphism of `cat`: the underlying arrow `h : j′ → j″`.
    pub edge_mor: Vec<usize>,
}

pub fn matching_category(inv: &InverseCat, j: usize) -> Result<MatchingCategory> {
    let c = &inv.hcat.cat;
    let nodes: Vec<usize> = c
        .morphisms
        .iter()
        .filter(|m| m.src == j && !c.is_identity(m.id))
        .map(|m| m.id)
        .collect();
    let node_pos: BTreeMap<usize, usize> =
        nodes.iter().copied().enumerate().map(|(i, f)| (f, i)).collect();
    let mut morphisms = Vec::new();
    let mut mor_pos: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut edge_mor = Vec::new();
    for (i, &f) in nodes.iter().enumerate() {
        let tf = c.mor(f).unwrap().tgt;
        for h in &c.morphisms {
            if h.src != tf {
                continue;
            }
            let g = c
                .compose(h.id, f)
                .ok_or_else(|| Error::Malformed("matching composite missing".into()))?;
            let Some(&gi) = node_pos.get(&g) else {
                return Err(Error::Invalid(
                    "composite of a non-identity arrow became an identity".into(),
                ));
            };
            let id = morphisms.len();
            mor_pos.insert((i, h.id), id);
            morphisms.push(crate::cat::MorRec { id, src: i, tgt: gi });
            edge_mor.push(h.id);
        }
    }
    let identities: Vec<(usize, usize)> = nodes
        .iter()
        .enumerate()
        .map(|(i, &f)| (i, mor_pos[&(i, c.identity_of(c.mor(f).unwrap().tgt).unwrap())]))
        .collect();
    let mut composition = Vec::new();
    for (&(i, h1), &m1) in &mor_pos {
        let t1 = node_pos[&c.compose(h1, nodes[i]).unwrap()];
        for (&(i2, h2), &m2) in &mor_pos {
            if i2 != t1 {
                continue;
            }
            let h = c
                .compose(h2, h1)
                .ok_or_else(|| Error::Malformed("matching composite missing".into()))?;
            composition.push((m2, m1, mor_pos[&(i, h)]));
        }
    }
    let cat =
        FinCategory { objects: (0..nodes.len()).collect(), morphisms, identities, composition };
    Ok(MatchingCategory { cat, object_mor: nodes, edge_mor })
}

/// Whether the listed objects form a cosieve: closed under arrows out.
pub fn is_cosieve(objects: &BTreeSet<usize>, c: &FinCategory) -> bool {
    c.morphisms.iter().all(|m| !objects.contains(&m.src) || objects.contains(&m.tgt))
}

// ---------------------------------------------------------------------------
// Marked complexes
// ---------------------------------------------------------------------------

/// A complex embedded in the nerve of a homotopical poset, with the edge
/// marking reflected along the inclusion.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MarkedComplex {
    pub complex: TruncatedSSet,
    /// Marked (equivalence) edges of the complex.
    pub marked: BTreeSet<usize>,
    pub poset: HomotopicalFinCategory,
    pub incl: SMap,
}

impl MarkedComplex {
    pub fn validate(&self) -> Result<ValidationReport> {
        let mut rep = ValidationReport::new("marked complex");
        let n = nerve(&self.poset.cat, self.complex.dim)?;
        self.incl.validate(&self.complex, &n.sset)?;
        if !self.incl.is_injective(&self.complex) {
            rep.violation("inclusion", "map into the nerve is not injective");
        }
        if self.complex.dim >= 1 {
            for e in 0..self.complex.counts[1] {
                let (_, mors) = &n.chains[1][self.incl.maps[1][e]];
                let marked_in_nerve = self.poset.weqs.contains(&mors[0]);
                if self.marked.contains(&e) == marked_in_nerve {
                    rep.tick();
                } else {
                    rep.violation("reflection", format!("edge {e} marking disagrees with the nerve"));
                }
            }
        }
        Ok(rep)
    }
}
