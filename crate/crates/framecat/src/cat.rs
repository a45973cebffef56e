//! Finite categories, groupoids and functors presented by raw tables, plus
//! strict finite limits of context diagrams.
//!
//! Unlike [`crate::gpd`], where well-formedness is baked into the
//! constructors, the types here accept arbitrary tables so that the
//! validator can report *every* broken axiom with the offending elements.
//! They also serve as the exchange format: a category is serialized as its
//! object list, its morphism records `{id, src, tgt}`, identity pairs,
//! composition triples and (for groupoids) inverse pairs.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::ctx::{compose as ctx_compose, Ctx, CtxMor};
use crate::gpd::{Gpd, GpdFun, NONE};
use crate::report::ValidationReport;
use crate::{Error, Result};

/// A morphism record. Ids are opaque integers chosen by whoever built the
/// tables; they need not be contiguous.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MorRec {
    pub id: usize,
    pub src: usize,
    pub tgt: usize,
}

/// A finite category presented by tables.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FinCategory {
    pub objects: Vec<usize>,
    pub morphisms: Vec<MorRec>,
    /// `(object, its identity morphism)`.
    pub identities: Vec<(usize, usize)>,
    /// `(g, f, g∘f)` for every composable pair.
    pub composition: Vec<(usize, usize, usize)>,
}

/// A finite groupoid: a category together with an inverse pair per morphism.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FinGroupoid {
    pub cat: FinCategory,
    /// `(f, f⁻¹)` for every morphism.
    pub inverses: Vec<(usize, usize)>,
}

/// A functor between table-presented categories.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FinFunctor {
    pub obj_map: BTreeMap<usize, usize>,
    pub mor_map: BTreeMap<usize, usize>,
}

impl FinCategory {
    /// The terminal category: one object, its identity.
    pub fn terminal() -> FinCategory {
        FinCategory {
            objects: vec![0],
            morphisms: vec![MorRec { id: 0, src: 0, tgt: 0 }],
            identities: vec![(0, 0)],
            composition: vec![(0, 0, 0)],
        }
    }

    /// The discrete category on `n` objects.
    pub fn discrete(n: usize) -> FinCategory {
        FinCategory {
            objects: (0..n).collect(),
            morphisms: (0..n).map(|i| MorRec { id: i, src: i, tgt: i }).collect(),
            identities: (0..n).map(|i| (i, i)).collect(),
            composition: (0..n).map(|i| (i, i, i)).collect(),
        }
    }

    /// The category of a finite preorder: objects `0..n`, one morphism
    /// `a → b` whenever `leq(a, b)`. Morphism ids enumerate the related
    /// pairs in lexicographic order.
    pub fn from_preorder(n: usize, leq: impl Fn(usize, usize) -> bool) -> FinCategory {
        let mut morphisms = Vec::new();
        let mut pair_id = BTreeMap::new();
        for a in 0..n {
            for b in 0..n {
                if leq(a, b) {
                    pair_id.insert((a, b), morphisms.len());
                    morphisms.push(MorRec { id: morphisms.len(), src: a, tgt: b });
                }
            }
        }
        let identities = (0..n).map(|a| (a, pair_id[&(a, a)])).collect();
        let mut composition = Vec::new();
        for g in &morphisms {
            for f in &morphisms {
                if f.tgt == g.src {
                    composition.push((g.id, f.id, pair_id[&(f.src, g.tgt)]));
                }
            }
        }
        FinCategory { objects: (0..n).collect(), morphisms, identities, composition }
    }

    /// A one-object category from a monoid multiplication table
    /// (`table[a][b]` = `a · b`, identity element 0).
    pub fn from_monoid(table: &[Vec<usize>]) -> FinCategory {
        let n = table.len();
        let morphisms = (0..n).map(|i| MorRec { id: i, src: 0, tgt: 0 }).collect();
        let mut composition = Vec::new();
        for g in 0..n {
            for f in 0..n {
                composition.push((g, f, table[g][f]));
            }
        }
        FinCategory { objects: vec![0], morphisms, identities: vec![(0, 0)], composition }
    }

    pub fn mor(&self, id: usize) -> Option<&MorRec> {
        self.morphisms.iter().find(|m| m.id == id)
    }

    /// Composite `g ∘ f`, if tabulated.
    pub fn compose(&self, g: usize, f: usize) -> Option<usize> {
        self.composition.iter().find(|&&(a, b, _)| a == g && b == f).map(|&(_, _, c)| c)
    }

    pub fn identity_of(&self, obj: usize) -> Option<usize> {
        self.identities.iter().find(|&&(o, _)| o == obj).map(|&(_, m)| m)
    }

    pub fn hom(&self, a: usize, b: usize) -> Vec<usize> {
        self.morphisms.iter().filter(|m| m.src == a && m.tgt == b).map(|m| m.id).collect()
    }

    pub fn is_identity(&self, m: usize) -> bool {
        self.identities.iter().any(|&(_, i)| i == m)
    }
}

impl FinGroupoid {
    /// View a skeletal [`Gpd`] as a table-presented groupoid.
    pub fn from_gpd(g: &Gpd) -> FinGroupoid {
        let morphisms = (0..g.n_arr())
            .map(|a| MorRec { id: a, src: g.src[a], tgt: g.tgt[a] })
            .collect();
        let identities = (0..g.n_obj).map(|o| (o, g.id[o])).collect();
        let mut composition = Vec::new();
        for gg in 0..g.n_arr() {
            for f in 0..g.n_arr() {
                if g.tgt[f] == g.src[gg] {
                    composition.push((gg, f, g.compose(gg, f)));
                }
            }
        }
        FinGroupoid {
            cat: FinCategory {
                objects: (0..g.n_obj).collect(),
                morphisms,
                identities,
                composition,
            },
            inverses: (0..g.n_arr()).map(|a| (a, g.inv[a])).collect(),
        }
    }

    pub fn inverse_of(&self, m: usize) -> Option<usize> {
        self.inverses.iter().find(|&&(f, _)| f == m).map(|&(_, i)| i)
    }
}

impl FinFunctor {
    pub fn identity(c: &FinCategory) -> FinFunctor {
        FinFunctor {
            obj_map: c.objects.iter().map(|&o| (o, o)).collect(),
            mor_map: c.morphisms.iter().map(|m| (m.id, m.id)).collect(),
        }
    }

    /// Check functoriality from `dom` to `cod`.
    pub fn validate(&self, dom: &FinCategory, cod: &FinCategory) -> Result<()> {
        for &o in &dom.objects {
            let io = *self
                .obj_map
                .get(&o)
                .ok_or_else(|| Error::Malformed(format!("object {o} has no image")))?;
            if !cod.objects.contains(&io) {
                return Err(Error::Malformed(format!("object image {io} not in codomain")));
            }
        }
        for m in &dom.morphisms {
            let im = *self
                .mor_map
                .get(&m.id)
                .ok_or_else(|| Error::Malformed(format!("morphism {} has no image", m.id)))?;
            let imr = cod
                .mor(im)
                .ok_or_else(|| Error::Malformed(format!("morphism image {im} not in codomain")))?;
            if imr.src != self.obj_map[&m.src] || imr.tgt != self.obj_map[&m.tgt] {
                return Err(Error::Invalid(format!("morphism {} image has wrong endpoints", m.id)));
            }
        }
        for &(o, i) in &dom.identities {
            if self.mor_map[&i] != cod.identity_of(self.obj_map[&o]).unwrap_or(usize::MAX) {
                return Err(Error::Invalid(format!("identity of {o} not preserved")));
            }
        }
        for &(g, f, gf) in &dom.composition {
            match cod.compose(self.mor_map[&g], self.mor_map[&f]) {
                Some(c) if c == self.mor_map[&gf] => {}
                _ => {
                    return Err(Error::Invalid(format!(
                        "composition not preserved on ({g}, {f})"
                    )))
                }
            }
        }
        Ok(())
    }
}

/// Check every axiom of a finite category on the raw tables, reporting each
/// violation with the offending element, pair or triple.
pub fn validate_fin_category(c: &FinCategory) -> ValidationReport {
    let mut rep = ValidationReport::new(format!(
        "finite category: {} objects, {} morphisms",
        c.objects.len(),
        c.morphisms.len()
    ));
    let obj_set: BTreeSet<usize> = c.objects.iter().copied().collect();
    if obj_set.len() != c.objects.len() {
        rep.violation("well-formed", "duplicate object ids".to_string());
    }
    let mut mor_ids = BTreeSet::new();
    for m in &c.morphisms {
        rep.tick();
        if !mor_ids.insert(m.id) {
            rep.violation("well-formed", format!("duplicate morphism id {}", m.id));
        }
        if !obj_set.contains(&m.src) || !obj_set.contains(&m.tgt) {
            rep.violation(
                "well-formed",
                format!("morphism {} has endpoints outside the object set", m.id),
            );
        }
    }
    // Identities: every object has one, and it is a two-sided unit.
    for &o in &c.objects {
        rep.tick();
        match c.identity_of(o) {
            None => rep.violation("identity", format!("object {o} has no identity morphism")),
            Some(i) => {
                match c.mor(i) {
                    Some(m) if m.src == o && m.tgt == o => {}
                    _ => rep.violation(
                        "identity",
                        format!("identity {i} of object {o} is not an endomorphism of {o}"),
                    ),
                }
                for m in &c.morphisms {
                    if m.src == o && c.compose(m.id, i) != Some(m.id) {
                        rep.violation(
                            "unit-right",
                            format!("{} ∘ id_{o} ≠ {} (pair ({}, {i}))", m.id, m.id, m.id),
                        );
                    }
                    if m.tgt == o && c.compose(i, m.id) != Some(m.id) {
                        rep.violation(
                            "unit-left",
                            format!("id_{o} ∘ {} ≠ {} (pair ({i}, {}))", m.id, m.id, m.id),
                        );
                    }
                }
            }
        }
    }
    // Composition: totality on composable pairs, correct endpoints.
    for g in &c.morphisms {
        for f in &c.morphisms {
            if f.tgt != g.src {
                if c.compose(g.id, f.id).is_some() {
                    rep.violation(
                        "composition",
                        format!("non-composable pair ({}, {}) has a composite", g.id, f.id),
                    );
                }
                continue;
            }
            rep.tick();
            match c.compose(g.id, f.id).and_then(|gf| c.mor(gf)) {
                None => rep.violation(
                    "composition",
                    format!("composable pair ({}, {}) has no composite", g.id, f.id),
                ),
                Some(gf) => {
                    if gf.src != f.src || gf.tgt != g.tgt {
                        rep.violation(
                            "composition",
                            format!("composite of ({}, {}) has wrong endpoints", g.id, f.id),
                        );
                    }
                }
            }
        }
    }
    // Associativity on every composable triple.
    for h in &c.morphisms {
        for g in &c.morphisms {
            if g.tgt != h.src {
                continue;
            }
            for f in &c.morphisms {
                if f.tgt != g.src {
                    continue;
                }
                rep.tick();
                let lhs = c.compose(h.id, g.id).and_then(|hg| c.compose(hg, f.id));
                let rhs = c.compose(g.id, f.id).and_then(|gf| c.compose(h.id, gf));
                if lhs.is_none() || lhs != rhs {
                    rep.violation(
                        "associativity",
                        format!("triple ({}, {}, {}) fails", h.id, g.id, f.id),
                    );
                }
            }
        }
    }
    rep
}

/// Validate a groupoid: the underlying category plus inverse laws.
pub fn validate_fin_groupoid(g: &FinGroupoid) -> ValidationReport {
    let mut rep = validate_fin_category(&g.cat);
    for m in &g.cat.morphisms {
        rep.tick();
        match g.inverse_of(m.id).and_then(|i| g.cat.mor(i).map(|r| (i, *r))) {
            None => rep.violation("inverse", format!("morphism {} has no inverse", m.id)),
            Some((i, ir)) => {
                if ir.src != m.tgt || ir.tgt != m.src {
                    rep.violation(
                        "inverse",
                        format!("inverse {i} of {} has wrong endpoints", m.id),
                    );
                    continue;
                }
                let left_ok = g.cat.compose(i, m.id) == g.cat.identity_of(m.src);
                let right_ok = g.cat.compose(m.id, i) == g.cat.identity_of(m.tgt);
                if !left_ok || !right_ok {
                    rep.violation(
                        "inverse",
                        format!("pair ({}, {i}) is not a two-sided inverse", m.id),
                    );
                }
            }
        }
    }
    rep
}

/// Outcome of [`is_groupoid_equivalence`]: a witness when the functor is an
/// equivalence, or the first failing clause with the offending data.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum EquivalenceDecision {
    Equivalence(EquivalenceWitness),
    Not { clause: String, detail: String },
}

impl EquivalenceDecision {
    pub fn holds(&self) -> bool {
        matches!(self, EquivalenceDecision::Equivalence(_))
    }
}

/// Witness data: for each codomain object, a domain object and an
/// isomorphism from its image (essential surjectivity); fullness and
/// faithfulness are recorded as checked hom pairs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquivalenceWitness {
    /// `(codomain object, domain object, iso F(x) → y)`.
    pub surjectivity: Vec<(usize, usize, usize)>,
    /// Hom pairs `(a, b)` on which bijectivity of `F: hom(a,b) → hom(Fa,Fb)`
    /// was verified.
    pub hom_pairs_checked: usize,
}

/// Decide whether `f: dom → cod` is an equivalence of groupoids
/// (essentially surjective and fully faithful), with a witness or the
/// failing clause.
pub fn is_groupoid_equivalence(
    f: &FinFunctor,
    dom: &FinGroupoid,
    cod: &FinGroupoid,
) -> EquivalenceDecision {
    let mut surjectivity = Vec::new();
    'cod_obj: for &y in &cod.cat.objects {
        for &x in &dom.cat.objects {
            let fx = f.obj_map[&x];
            if let Some(&iso) = cod.cat.hom(fx, y).first() {
                surjectivity.push((y, x, iso));
                continue 'cod_obj;
            }
        }
        return EquivalenceDecision::Not {
            clause: "essentially surjective".into(),
            detail: format!("no object maps into the component of {y}"),
        };
    }
    let mut hom_pairs_checked = 0;
    for &a in &dom.cat.objects {
        for &b in &dom.cat.objects {
            hom_pairs_checked += 1;
            let hom = dom.cat.hom(a, b);
            let image: BTreeSet<usize> = hom.iter().map(|m| f.mor_map[m]).collect();
            let target = cod.cat.hom(f.obj_map[&a], f.obj_map[&b]);
            if image.len() < hom.len() {
                return EquivalenceDecision::Not {
                    clause: "faithful".into(),
                    detail: format!("hom({a}, {b}) maps non-injectively"),
                };
            }
            if image.len() < target.len() {
                return EquivalenceDecision::Not {
                    clause: "full".into(),
                    detail: format!(
                        "hom({a}, {b}) has {} elements but its target hom has {}",
                        hom.len(),
                        target.len()
                    ),
                };
            }
        }
    }
    EquivalenceDecision::Equivalence(EquivalenceWitness { surjectivity, hom_pairs_checked })
}

/// A diagram of contexts over a table-presented shape: one context per shape
/// object and one context morphism per shape morphism.
#[derive(Debug, Clone)]
pub struct CtxDiagram {
    pub shape: FinCategory,
    /// Indexed parallel to `shape.objects`.
    pub values: Vec<Ctx>,
    /// Keyed by shape morphism id.
    pub arrows: BTreeMap<usize, CtxMor>,
}

impl CtxDiagram {
    /// The constant diagram at `c`.
    pub fn constant(shape: &FinCategory, c: &Ctx) -> CtxDiagram {
        CtxDiagram {
            shape: shape.clone(),
            values: vec![c.clone(); shape.objects.len()],
            arrows: shape.morphisms.iter().map(|m| (m.id, CtxMor::identity(c))).collect(),
        }
    }

    fn obj_pos(&self, o: usize) -> usize {
        self.shape.objects.iter().position(|&x| x == o).expect("shape object")
    }

    /// Check that values/arrows are well-typed and functorial.
    pub fn validate(&self) -> Result<()> {
        if self.values.len() != self.shape.objects.len() {
            return Err(Error::Malformed("one value per shape object required".into()));
        }
        for m in &self.shape.morphisms {
            let a = self
                .arrows
                .get(&m.id)
                .ok_or_else(|| Error::Malformed(format!("shape morphism {} has no arrow", m.id)))?;
            a.validate()?;
            if a.dom != self.values[self.obj_pos(m.src)] || a.cod != self.values[self.obj_pos(m.tgt)] {
                return Err(Error::Invalid(format!("arrow of {} has wrong endpoints", m.id)));
            }
        }
        for &(_, i) in &self.shape.identities {
            let a = &self.arrows[&i];
            if a.fun != GpdFun::identity(&a.dom.total()?) {
                return Err(Error::Invalid(format!("identity morphism {i} not sent to identity")));
            }
        }
        for &(g, f, gf) in &self.shape.composition {
            let cf = ctx_compose(&self.arrows[&g], &self.arrows[&f]);
            if cf.fun != self.arrows[&gf].fun {
                return Err(Error::Invalid(format!("functoriality fails on pair ({g}, {f})")));
            }
        }
        Ok(())
    }
}

/// A strict limit cone: the apex context (depth ≤ 1), one leg per shape
/// object, and the tuple tables realizing apex elements as compatible
/// families.
#[derive(Debug, Clone)]
pub struct LimitCone {
    pub apex: Ctx,
    /// Indexed parallel to the shape's object list.
    pub legs: Vec<CtxMor>,
    /// `obj_tuples[o][i]` is the component at shape object `i` of apex
    /// object `o` (in total-space coordinates of the diagram values).
    pub obj_tuples: Vec<Vec<usize>>,
    pub arr_tuples: Vec<Vec<usize>>,
}

/// Cap on the number of tuples materialized while computing a limit.
// The limit groupoid stores an `n_arr × n_arr` composition table, so the
// tuple count must stay small enough for that table to be materialized.
pub const MAX_LIMIT_SIZE: usize = 5_000;

/// Compute the strict limit of a context diagram: objects are compatible
/// tuples, arrows are componentwise. The empty shape yields the empty
/// context ⋄ (the terminal object); otherwise the apex is a depth-1 context
/// wrapping the tuple groupoid.
/// All tuples `t` with `t[k] < sizes[k]` satisfying `table[t[src]] == t[tgt]`
/// for every constraint, in lexicographic order.  Constraints are functional,
/// so a choice at a source node propagates; only unconstrained components are
/// searched.
fn compatible_tuples(
    sizes: &[usize],
    constraints: &[(usize, usize, Vec<usize>)],
) -> Result<Vec<Vec<usize>>> {
    fn go(
        sizes: &[usize],
        constraints: &[(usize, usize, Vec<usize>)],
        assign: &mut Vec<Option<usize>>,
        out: &mut Vec<Vec<usize>>,
    ) -> Result<()> {
        let mut set: Vec<usize> = Vec::new();
        loop {
            let mut changed = false;
            for (s, t, f) in constraints {
                match (assign[*s], assign[*t]) {
                    (Some(x), None) => {
                        assign[*t] = Some(f[x]);
                        set.push(*t);
                        changed = true;
                    }
                    (Some(x), Some(y)) if f[x] != y => {
                        for &u in &set {
                            assign[u] = None;
                        }
                        return Ok(());
                    }
                    _ => {}
                }
            }
            if !changed {
                break;
            }
        }
        match assign.iter().position(|a| a.is_none()) {
            None => {
                out.push(assign.iter().map(|a| a.unwrap()).collect());
                if out.len() > MAX_LIMIT_SIZE {
                    return Err(Error::BoundExceeded("limit tuples".into()));
                }
            }
            Some(i) => {
                for v in 0..sizes[i] {
                    assign[i] = Some(v);
                    go(sizes, constraints, assign, out)?;
                }
                assign[i] = None;
            }
        }
        for &u in &set {
            assign[u] = None;
        }
        Ok(())
    }
    if sizes.iter().any(|&s| s == 0) {
        return Ok(Vec::new());
    }
    let mut assign = vec![None; sizes.len()];
    let mut out = Vec::new();
    go(sizes, constraints, &mut assign, &mut out)?;
    out.sort();
    Ok(out)
}

pub fn finite_limit(diag: &CtxDiagram) -> Result<LimitCone> {
    let n = diag.shape.objects.len();
    if n == 0 {
        return Ok(LimitCone {
            apex: Ctx::empty(),
            legs: vec![],
            obj_tuples: vec![vec![]],
            arr_tuples: vec![vec![]],
        });
    }
    let totals: Vec<Gpd> =
        diag.values.iter().map(|c| c.total()).collect::<Result<_>>()?;
    // Non-identity shape morphisms suffice for the compatibility condition;
    // identities impose nothing and composites follow from functoriality.
    let constraints: Vec<&MorRec> = diag
        .shape
        .morphisms
        .iter()
        .filter(|m| !diag.shape.is_identity(m.id))
        .collect();
    let tables = |proj: &dyn Fn(&CtxMor) -> Vec<usize>| -> Vec<(usize, usize, Vec<usize>)> {
        constraints
            .iter()
            .map(|m| {
                (diag.obj_pos(m.src), diag.obj_pos(m.tgt), proj(&diag.arrows[&m.id]))
            })
            .collect()
    };
    let sizes_o: Vec<usize> = totals.iter().map(|t| t.n_obj).collect();
    let obj_tuples = compatible_tuples(&sizes_o, &tables(&|a| a.fun.obj.clone()))?;
    // Endpoints of compatible arrow tuples are themselves compatible,
    // automatically, since the diagram arrows are functors.
    let sizes_a: Vec<usize> = totals.iter().map(|t| t.n_arr()).collect();
    let arr_tuples = compatible_tuples(&sizes_a, &tables(&|a| a.fun.arr.clone()))?;
    let obj_pos: BTreeMap<&Vec<usize>, usize> =
        obj_tuples.iter().enumerate().map(|(i, t)| (t, i)).collect();
    let arr_pos: BTreeMap<&Vec<usize>, usize> =
        arr_tuples.iter().enumerate().map(|(i, t)| (t, i)).collect();
    let n_obj = obj_tuples.len();
    let n_arr = arr_tuples.len();
    let mut src = vec![0; n_arr];
    let mut tgt = vec![0; n_arr];
    for (i, t) in arr_tuples.iter().enumerate() {
        let s: Vec<usize> = t.iter().zip(&totals).map(|(&a, g)| g.src[a]).collect();
        let g: Vec<usize> = t.iter().zip(&totals).map(|(&a, gg)| gg.tgt[a]).collect();
        src[i] = obj_pos[&s];
        tgt[i] = obj_pos[&g];
    }
    let mut id = vec![0; n_obj];
    for (i, t) in obj_tuples.iter().enumerate() {
        let e: Vec<usize> = t.iter().zip(&totals).map(|(&o, g)| g.id[o]).collect();
        id[i] = arr_pos[&e];
    }
    let mut comp = vec![NONE; n_arr * n_arr];
    for g in 0..n_arr {
        for f in 0..n_arr {
            if tgt[f] == src[g] {
                let t: Vec<usize> = (0..n)
                    .map(|k| totals[k].compose(arr_tuples[g][k], arr_tuples[f][k]))
                    .collect();
                comp[g * n_arr + f] = arr_pos[&t];
            }
        }
    }
    let mut inv = vec![0; n_arr];
    for a in 0..n_arr {
        let t: Vec<usize> = (0..n).map(|k| totals[k].inv[arr_tuples[a][k]]).collect();
        inv[a] = arr_pos[&t];
    }
    let lim = Gpd { n_obj, src, tgt, id, comp, inv };
    debug_assert!(lim.validate().is_ok());
    let apex = Ctx::from_gpd(&lim);
    let legs = (0..n)
        .map(|k| CtxMor {
            dom: apex.clone(),
            cod: diag.values[k].clone(),
            fun: GpdFun {
                obj: obj_tuples.iter().map(|t| t[k]).collect(),
                arr: arr_tuples.iter().map(|t| t[k]).collect(),
            },
        })
        .collect();
    Ok(LimitCone { apex, legs, obj_tuples, arr_tuples })
}

/// Factor a competing cone through the limit: given `cone_legs[i]: apex →
/// values[i]` commuting with the diagram, return the unique mediating
/// morphism. Errors if the legs do not form a cone.
pub fn mediate(lim: &LimitCone, diag: &CtxDiagram, cone_apex: &Ctx, cone_legs: &[CtxMor]) -> Result<CtxMor> {
    let n = diag.shape.objects.len();
    if cone_legs.len() != n {
        return Err(Error::Malformed("one cone leg per shape object required".into()));
    }
    for m in &diag.shape.morphisms {
        let via = ctx_compose(&diag.arrows[&m.id], &cone_legs[diag.obj_pos(m.src)]);
        if via.fun != cone_legs[diag.obj_pos(m.tgt)].fun {
            return Err(Error::Invalid(format!("cone does not commute over morphism {}", m.id)));
        }
    }
    let t = cone_apex.total()?;
    if n == 0 {
        return Ok(CtxMor::to_empty(cone_apex));
    }
    let obj_pos: BTreeMap<&Vec<usize>, usize> =
        lim.obj_tuples.iter().enumerate().map(|(i, u)| (u, i)).collect();
    let arr_pos: BTreeMap<&Vec<usize>, usize> =
        lim.arr_tuples.iter().enumerate().map(|(i, u)| (u, i)).collect();
    let mut obj = Vec::with_capacity(t.n_obj);
    for x in 0..t.n_obj {
        let tuple: Vec<usize> = cone_legs.iter().map(|l| l.fun.obj[x]).collect();
        obj.push(*obj_pos.get(&tuple).ok_or_else(|| {
            Error::Invalid(format!("cone object {x} does not land in the limit"))
        })?);
    }
    let mut arr = Vec::with_capacity(t.n_arr());
    for a in 0..t.n_arr() {
        let tuple: Vec<usize> = cone_legs.iter().map(|l| l.fun.arr[a]).collect();
        arr.push(*arr_pos.get(&tuple).ok_or_else(|| {
            Error::Invalid(format!("cone arrow {a} does not land in the limit"))
        })?);
    }
    Ok(CtxMor { dom: cone_apex.clone(), cod: lim.apex.clone(), fun: GpdFun { obj, arr } })
}

/// Certify universality against one competing cone: the mediating morphism
/// exists, commutes with the legs, and is the only morphism doing so
/// (uniqueness holds because the legs of a tuple limit are jointly
/// injective; for the empty shape the apex is terminal).
pub fn certify_universal(
    lim: &LimitCone,
    diag: &CtxDiagram,
    cone_apex: &Ctx,
    cone_legs: &[CtxMor],
) -> Result<CtxMor> {
    let m = mediate(lim, diag, cone_apex, cone_legs)?;
    for (k, leg) in lim.legs.iter().enumerate() {
        let back = ctx_compose(leg, &m);
        if back.fun != cone_legs[k].fun {
            return Err(Error::Invalid(format!("mediating morphism fails at leg {k}")));
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ctx::proj;
    use crate::ctx::Family;
    use crate::gpd::enumerate_functors;

    fn set_ctx(n: usize) -> Ctx {
        Ctx::from_gpd(&Gpd::discrete(n))
    }

    #[test]
    fn terminal_category_valid() {
        let rep = validate_fin_category(&FinCategory::terminal());
        assert!(rep.is_valid());
    }

    #[test]
    fn missing_identity_cited() {
        let mut c = FinCategory::terminal();
        c.identities.clear();
        let rep = validate_fin_category(&c);
        assert!(!rep.is_valid());
        assert!(rep.violations.iter().any(|v| v.axiom == "identity" && v.detail.contains("0")));
    }

    #[test]
    fn transformation_monoid_valid_with_all_triples() {
        // All four self-maps of a 2-element set under composition:
        // 0 = id, 1 = swap, 2 = const 0, 3 = const 1.
        let maps = [[0usize, 1], [1, 0], [0, 0], [1, 1]];
        let mut table = vec![vec![0; 4]; 4];
        for a in 0..4 {
            for b in 0..4 {
                let ab = [maps[a][maps[b][0]], maps[a][maps[b][1]]];
                table[a][b] = maps.iter().position(|m| *m == ab).unwrap();
            }
        }
        let c = FinCategory::from_monoid(&table);
        let rep = validate_fin_category(&c);
        assert!(rep.is_valid());
        // 4 endomorphisms → 64 associativity triples, plus identity,
        // composition-pair and morphism well-formedness checks.
        assert!(rep.checked >= 64);
    }

    #[test]
    fn broken_associativity_cited() {
        let mut table = vec![vec![0usize; 3]; 3];
        for a in 0..3 {
            for b in 0..3 {
                table[a][b] = (a + b) % 3;
            }
        }
        table[1][1] = 0; // now (1·1)·1 = 1 ≠ 0 = 1·(1·1)
        let c = FinCategory::from_monoid(&table);
        let rep = validate_fin_category(&c);
        assert!(rep.violations.iter().any(|v| v.axiom == "associativity"));
    }

    #[test]
    fn groupoid_validation() {
        let g = FinGroupoid::from_gpd(&Gpd::connected(2, &Gpd::group_z2()));
        assert!(validate_fin_groupoid(&g).is_valid());
        let mut bad = g.clone();
        bad.inverses[1].1 = bad.inverses[0].1;
        assert!(validate_fin_groupoid(&bad)
            .violations
            .iter()
            .any(|v| v.axiom == "inverse"));
    }

    #[test]
    fn equivalence_identity_and_inclusion() {
        let contractible = FinGroupoid::from_gpd(&Gpd::connected(2, &Gpd::group_trivial()));
        let id = FinFunctor::identity(&contractible.cat);
        assert!(is_groupoid_equivalence(&id, &contractible, &contractible).holds());

        // Point into the contractible 2-object groupoid: an equivalence.
        let point = FinGroupoid::from_gpd(&Gpd::discrete(1));
        let incl = FinFunctor {
            obj_map: [(0, 0)].into(),
            mor_map: [(0, contractible.cat.identity_of(0).unwrap())].into(),
        };
        incl.validate(&point.cat, &contractible.cat).unwrap();
        assert!(is_groupoid_equivalence(&incl, &point, &contractible).holds());
    }

    #[test]
    fn two_point_collapse_not_full() {
        let two = FinGroupoid::from_gpd(&Gpd::discrete(2));
        let one = FinGroupoid::from_gpd(&Gpd::discrete(1));
        let collapse = FinFunctor {
            obj_map: [(0, 0), (1, 0)].into(),
            mor_map: [(0, 0), (1, 0)].into(),
        };
        collapse.validate(&two.cat, &one.cat).unwrap();
        match is_groupoid_equivalence(&collapse, &two, &one) {
            EquivalenceDecision::Not { clause, .. } => assert_eq!(clause, "full"),
            _ => panic!("collapse should not be an equivalence"),
        }
    }

    #[test]
    fn empty_shape_limit_is_terminal() {
        let diag = CtxDiagram {
            shape: FinCategory::discrete(0),
            values: vec![],
            arrows: BTreeMap::new(),
        };
        let lim = finite_limit(&diag).unwrap();
        assert_eq!(lim.apex, Ctx::empty());
        // Universality: the unique map from any context factors the empty cone.
        let c = set_ctx(3);
        let m = certify_universal(&lim, &diag, &c, &[]).unwrap();
        assert_eq!(m.fun.obj, vec![0, 0, 0]);
    }

    #[test]
    fn cospan_product_has_six_elements() {
        // {0,1} → {*} ← {0,1,2}: the pullback over the point is the product.
        let shape = FinCategory::from_preorder(3, |a, b| a == b || b == 1);
        let star = set_ctx(1);
        let left = set_ctx(2);
        let right = set_ctx(3);
        let bang = |c: &Ctx| CtxMor {
            dom: c.clone(),
            cod: star.clone(),
            fun: GpdFun {
                obj: vec![0; c.total().unwrap().n_obj],
                arr: vec![0; c.total().unwrap().n_arr()],
            },
        };
        let mut arrows = BTreeMap::new();
        for m in &shape.morphisms {
            let val = |o: usize| match o {
                0 => left.clone(),
                1 => star.clone(),
                _ => right.clone(),
            };
            arrows.insert(
                m.id,
                if m.src == m.tgt { CtxMor::identity(&val(m.src)) } else { bang(&val(m.src)) },
            );
        }
        let diag = CtxDiagram { shape, values: vec![left, star, right], arrows };
        diag.validate().unwrap();
        let lim = finite_limit(&diag).unwrap();
        assert_eq!(lim.apex.total().unwrap().n_obj, 6);
    }

    #[test]
    fn constant_diagram_on_two_arrows_gives_product() {
        // Shape with objects {0, 1, 2} and non-identity arrows 1 → 0 and
        // 2 → 0 removed; keeping only two parallel "legs" from nothing:
        // the discrete 2-object shape computes A × A for a constant diagram.
        let shape = FinCategory::discrete(2);
        let a = Ctx::from_gpd(&Gpd::connected(2, &Gpd::group_trivial()));
        let diag = CtxDiagram::constant(&shape, &a);
        diag.validate().unwrap();
        let lim = finite_limit(&diag).unwrap();
        let t = a.total().unwrap();
        assert_eq!(lim.apex.total().unwrap().n_obj, t.n_obj * t.n_obj);
        assert_eq!(lim.apex.total().unwrap().n_arr(), t.n_arr() * t.n_arr());

        // Universality against the diagonal cone.
        let legs = vec![CtxMor::identity(&a), CtxMor::identity(&a)];
        let m = certify_universal(&lim, &diag, &a, &legs).unwrap();
        m.validate().unwrap();
        // Uniqueness, by brute force: exactly one functor into the limit
        // total composes to both identity legs.
        let lt = lim.apex.total().unwrap();
        let count = enumerate_functors(&t, &lt)
            .into_iter()
            .filter(|f| {
                lim.legs.iter().all(|leg| {
                    f.obj.iter().enumerate().all(|(x, &fx)| leg.fun.obj[fx] == x)
                        && f.arr.iter().enumerate().all(|(x, &fx)| leg.fun.arr[fx] == x)
                })
            })
            .count();
        assert_eq!(count, 1);
    }

    #[test]
    fn isomorphic_diagrams_have_isomorphic_apexes() {
        // Products of the same pair of sets taken in the two orders.
        let shape = FinCategory::discrete(2);
        let mk = |values: [usize; 2]| {
            let vals: Vec<Ctx> = values.iter().map(|&n| set_ctx(n)).collect();
            let arrows = (0..2).map(|i| (i, CtxMor::identity(&vals[i]))).collect();
            CtxDiagram { shape: shape.clone(), values: vals, arrows }
        };
        let lim_a = finite_limit(&mk([2, 3])).unwrap();
        let lim_b = finite_limit(&mk([3, 2])).unwrap();
        let ta = lim_a.apex.total().unwrap();
        let tb = lim_b.apex.total().unwrap();
        let iso_exists = enumerate_functors(&ta, &tb).into_iter().any(|f| {
            CtxMor { dom: lim_a.apex.clone(), cod: lim_b.apex.clone(), fun: f }.is_iso()
        });
        assert!(iso_exists);
    }

    #[test]
    fn pullback_of_dependent_projection_matches_reindexing() {
        // Pullback of Γ.A → Γ along a point ⋄ → Γ is the fiber.
        let gamma = set_ctx(2);
        let fam = Family {
            fibers: vec![Gpd::discrete(1), Gpd::discrete(3)],
            transports: vec![GpdFun::identity(&Gpd::discrete(1)), GpdFun::identity(&Gpd::discrete(3))],
        };
        let ga = gamma.extend(fam).unwrap();
        let p = proj(&ga);
        let point = Ctx::empty();
        let pick = CtxMor {
            dom: point.clone(),
            cod: gamma.clone(),
            fun: GpdFun { obj: vec![1], arr: vec![1] },
        };
        // Cospan shape: 0 → 1 ← 2 with values point, Γ, Γ.A.
        let shape = FinCategory::from_preorder(3, |a, b| a == b || b == 1);
        let mut arrows = BTreeMap::new();
        for m in &shape.morphisms {
            if m.src == m.tgt {
                let v = [&point, &gamma, &ga][m.src];
                arrows.insert(m.id, CtxMor::identity(v));
            } else if m.src == 0 {
                arrows.insert(m.id, pick.clone());
            } else {
                arrows.insert(m.id, p.clone());
            }
        }
        let diag = CtxDiagram {
            shape,
            values: vec![point.clone(), gamma.clone(), ga.clone()],
            arrows,
        };
        diag.validate().unwrap();
        let lim = finite_limit(&diag).unwrap();
        assert_eq!(lim.apex.total().unwrap().n_obj, 3);
    }
}
