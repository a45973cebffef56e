//! Diagrams over finite inverse categories with values in the slices of a
//! contextual model.  A diagram is certified by two checks: every marked
//! arrow of the shape must act by a weak equivalence (homotopicality), and
//! every matching map must carry a split cleavage (Reedy fibrancy).  On top
//! of the certification machinery this module builds width-truncated frames
//! of single objects, extends partial frame data along cosieves, transports
//! frames along base-change functors and along an adjunction unit, and
//! decides whether a certified square of frames is a homotopy pullback.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::cat::{finite_limit, mediate, CtxDiagram, FinCategory, LimitCone, MorRec};
use crate::ctx::{
    compose, extend_ctx, pi_single, proj, proj_n, Ctx, CtxMor, Ext, Family,
};
use crate::fib::{
    adjunction_unit, factorize, fibration_witness, pistar_mor, pullback,
    pullback_mor_along_proj, FOb, SliceFun,
};
use crate::gpd::GpdFun;
use crate::model::ContextualModel;
use crate::report::ValidationReport;
use crate::simp::{is_cosieve, matching_category, DCat, DLabel, InverseCat};
use crate::{Error, Result};

// ---------------------------------------------------------------------------
// Diagrams over inverse categories
// ---------------------------------------------------------------------------

/// A diagram over a finite inverse category, valued in the slice of a
/// contextual model over `base` (`Ctx::empty()` for the absolute case).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InverseDiagram {
    pub shape: InverseCat,
    pub model: ContextualModel,
    pub base: Ctx,
    /// Value at each shape object (by position).
    pub values: Vec<FOb>,
    /// Action on each shape morphism (by morphism id).
    pub arrows: BTreeMap<usize, CtxMor>,
}

impl InverseDiagram {
    /// Well-formedness, functoriality and homotopicality: arrow tables lie
    /// over the base, compose as the shape dictates, and marked arrows act
    /// by weak equivalences.
    pub fn validate(&self) -> ValidationReport {
        let mut rep = ValidationReport::new("inverse diagram");
        let cat = &self.shape.hcat.cat;
        if self.values.len() != cat.objects.len() {
            rep.violation("shape", "value table has the wrong length");
            return rep;
        }
        for (o, v) in self.values.iter().enumerate() {
            if v.map.dom != v.total || v.map.cod != self.base {
                rep.violation("base", format!("value {o} does not lie over the base"));
                return rep;
            }
        }
        for m in &cat.morphisms {
            let Some(a) = self.arrows.get(&m.id) else {
                rep.violation("shape", format!("arrow {} has no value", m.id));
                return rep;
            };
            if a.dom != self.values[m.src].total || a.cod != self.values[m.tgt].total {
                rep.violation("shape", format!("arrow {} has the wrong endpoints", m.id));
                return rep;
            }
            if compose(&self.values[m.tgt].map, a).fun != self.values[m.src].map.fun {
                rep.violation("base", format!("arrow {} does not commute with the base", m.id));
            }
        }
        for &(o, id) in &cat.identities {
            if self.arrows[&id].fun == CtxMor::identity(&self.values[o].total).fun {
                rep.tick();
            } else {
                rep.violation("functor", format!("identity of object {o} does not act trivially"));
            }
        }
        for &(g, f, gf) in &cat.composition {
            if compose(&self.arrows[&g], &self.arrows[&f]).fun == self.arrows[&gf].fun {
                rep.tick();
            } else {
                rep.violation("functor", format!("composite {gf} disagrees with {g} ∘ {f}"));
            }
        }
        for m in &cat.morphisms {
            if !self.shape.hcat.weqs.contains(&m.id) {
                continue;
            }
            if self.model.weq_oracle(&self.arrows[&m.id]) {
                rep.tick();
            } else {
                rep.violation(
                    "homotopical",
                    format!("marked arrow {} is not a weak equivalence", m.id),
                );
            }
        }
        rep
    }
}

/// The matching diagram of an object: the limit it induces and the legs
/// needed to mediate cones into it.
struct MatchLim {
    /// Per node: the arrow `j → j′` of the shape it stands for.
    nodes: Vec<usize>,
    lim: Option<(CtxDiagram, LimitCone)>,
    base: Ctx,
}

fn matching_limit(
    shape: &InverseCat,
    j: usize,
    base: &Ctx,
    val: &dyn Fn(usize) -> FOb,
    arr: &dyn Fn(usize) -> CtxMor,
) -> Result<MatchLim> {
    let mc = matching_category(shape, j)?;
    let n = mc.object_mor.len();
    if n == 0 {
        return Ok(MatchLim { nodes: Vec::new(), lim: None, base: base.clone() });
    }
    let cat = &shape.hcat.cat;
    let tgt_of = |k: usize| cat.mor(mc.object_mor[k]).unwrap().tgt;
    // the matching nodes plus one extra vertex holding the base
    let m0 = mc.cat.morphisms.len();
    let mut morphisms: Vec<MorRec> = mc.cat.morphisms.clone();
    for k in 0..n {
        morphisms.push(MorRec { id: m0 + k, src: k, tgt: n });
    }
    let idb = m0 + n;
    morphisms.push(MorRec { id: idb, src: n, tgt: n });
    let mut composition = mc.cat.composition.clone();
    for m in &mc.cat.morphisms {
        composition.push((m0 + m.tgt, m.id, m0 + m.src));
    }
    for k in 0..n {
        composition.push((idb, m0 + k, m0 + k));
    }
    composition.push((idb, idb, idb));
    let mut identities = mc.cat.identities.clone();
    identities.push((n, idb));
    let ext =
        FinCategory { objects: (0..=n).collect(), morphisms, identities, composition };
    let mut values: Vec<Ctx> = (0..n).map(|k| val(tgt_of(k)).total).collect();
    values.push(base.clone());
    let mut arrows: BTreeMap<usize, CtxMor> = BTreeMap::new();
    for m in &mc.cat.morphisms {
        arrows.insert(m.id, arr(mc.edge_mor[m.id]));
    }
    for k in 0..n {
        arrows.insert(m0 + k, val(tgt_of(k)).map);
    }
    arrows.insert(idb, CtxMor::identity(base));
    let diag = CtxDiagram { shape: ext, values, arrows };
    diag.validate()?;
    let lim = finite_limit(&diag)?;
    Ok(MatchLim { nodes: mc.object_mor, lim: Some((diag, lim)), base: base.clone() })
}

impl MatchLim {
    /// The matching object as a slice object.
    fn object(&self) -> FOb {
        match &self.lim {
            None => FOb { total: self.base.clone(), map: CtxMor::identity(&self.base) },
            Some((_, lim)) => FOb {
                total: lim.apex.clone(),
                map: lim.legs.last().unwrap().clone(),
            },
        }
    }

    /// Mediate a cone `(node_legs, base_leg)` into the matching object.
    fn mediate_cone(
        &self,
        apex: &Ctx,
        node_legs: &[CtxMor],
        base_leg: &CtxMor,
    ) -> Result<CtxMor> {
        match &self.lim {
            None => Ok(base_leg.clone()),
            Some((diag, lim)) => {
                let mut legs = node_legs.to_vec();
                legs.push(base_leg.clone());
                mediate(lim, diag, apex, &legs)
            }
        }
    }

    /// The projection of the matching object onto node `k`.
    fn node_leg(&self, k: usize) -> CtxMor {
        self.lim.as_ref().expect("nonempty matching diagram").1.legs[k].clone()
    }
}

/// The matching object of `x` at `j` and the mediated matching map from the
/// value at `j`.
pub fn matching_object(x: &InverseDiagram, j: usize) -> Result<(FOb, CtxMor)> {
    let ml = matching_limit(
        &x.shape,
        j,
        &x.base,
        &|o| x.values[o].clone(),
        &|m| x.arrows[&m].clone(),
    )?;
    let legs: Vec<CtxMor> = ml.nodes.iter().map(|&f| x.arrows[&f].clone()).collect();
    let mmap = ml.mediate_cone(&x.values[j].total, &legs, &x.values[j].map)?;
    Ok((ml.object(), mmap))
}

/// Reedy fibrancy: every matching map must carry a split cleavage.  Returns
/// the matching data alongside the report.
pub fn reedy_check(x: &InverseDiagram) -> Result<(Vec<(FOb, CtxMor)>, ValidationReport)> {
    let mut rep = ValidationReport::new("matching-map fibrancy");
    let mut data = Vec::new();
    for j in 0..x.values.len() {
        let (mob, mmap) = matching_object(x, j)?;
        if fibration_witness(&mmap)?.is_some() {
            rep.tick();
        } else {
            rep.violation("matching", format!("matching map at object {j} is not a fibration"));
        }
        data.push((mob, mmap));
    }
    Ok((data, rep))
}

/// Whether a diagram is certified: homotopical, functorial, and Reedy
/// fibrant.
pub fn certify(x: &InverseDiagram) -> Result<ValidationReport> {
    let mut rep = x.validate();
    if rep.is_valid() {
        rep.absorb(reedy_check(x)?.1);
    }
    Ok(rep)
}

// ---------------------------------------------------------------------------
// Extension along cosieves
// ---------------------------------------------------------------------------

/// Extend a Reedy diagram `x`, given on the cosieve `i` together with a
/// levelwise weak equivalence `w` from the homotopical diagram `y`, to the
/// whole shape of `y`.  Each new value is the mapping path space of the
/// mediated cone into its matching object, so the result is Reedy and the
/// extended comparison stays a levelwise weak equivalence.
pub fn extend_reedy(
    y: &InverseDiagram,
    i: &BTreeSet<usize>,
    x_vals: &BTreeMap<usize, FOb>,
    x_arrs: &BTreeMap<usize, CtxMor>,
    w: &BTreeMap<usize, CtxMor>,
) -> Result<(InverseDiagram, Vec<CtxMor>)> {
    let cat = &y.shape.hcat.cat;
    if !is_cosieve(i, cat) {
        return Err(Error::Invalid("the given objects do not form a cosieve".into()));
    }
    for &o in i {
        if !x_vals.contains_key(&o) || !w.contains_key(&o) {
            return Err(Error::Malformed("missing value or comparison on the cosieve".into()));
        }
    }
    let mut vals: BTreeMap<usize, FOb> = x_vals.clone();
    let mut arrs: BTreeMap<usize, CtxMor> = x_arrs.clone();
    let mut wt: BTreeMap<usize, CtxMor> = w.clone();
    for &o in i {
        let id = cat.identity_of(o).expect("identity");
        arrs.insert(id, CtxMor::identity(&vals[&o].total));
    }
    let mut order: Vec<usize> = (0..y.values.len()).filter(|o| !i.contains(o)).collect();
    order.sort_by_key(|&o| (y.shape.degree[o], o));
    for j in order {
        let ml = {
            let vals = &vals;
            let arrs = &arrs;
            matching_limit(
                &y.shape,
                j,
                &y.base,
                &|o| vals[&o].clone(),
                &|m| arrs[&m].clone(),
            )?
        };
        // cone from the homotopical value through the comparisons built so far
        let legs: Vec<CtxMor> = ml
            .nodes
            .iter()
            .map(|&f| compose(&wt[&cat.mor(f).unwrap().tgt], &y.arrows[&f]))
            .collect();
        let c = ml.mediate_cone(&y.values[j].total, &legs, &y.values[j].map)?;
        // when the cone is already a fibration the trivial factorization
        // avoids inflating the value through the mapping path space; the
        // cleavage search is only affordable on small codomains
        let small = c.cod.total()?.n_arr() <= 512;
        let fac = if small && matches!(fibration_witness(&c), Ok(Some(_))) {
            crate::fib::Factorization {
                mid: y.values[j].total.clone(),
                w: CtxMor::identity(&y.values[j].total),
                p: c,
            }
        } else {
            factorize(&c)?
        };
        let value =
            FOb { total: fac.mid.clone(), map: compose(&ml.object().map, &fac.p) };
        for (k, &f) in ml.nodes.iter().enumerate() {
            arrs.insert(f, compose(&ml.node_leg(k), &fac.p));
        }
        wt.insert(j, fac.w);
        arrs.insert(
            cat.identity_of(j).expect("identity"),
            CtxMor::identity(&value.total),
        );
        vals.insert(j, value);
    }
    for m in &cat.morphisms {
        if !arrs.contains_key(&m.id) {
            return Err(Error::Malformed(format!("arrow {} was never assigned", m.id)));
        }
    }
    let values: Vec<FOb> = (0..y.values.len()).map(|o| vals[&o].clone()).collect();
    let out = InverseDiagram {
        shape: y.shape.clone(),
        model: y.model,
        base: y.base.clone(),
        values,
        arrows: arrs,
    };
    let ws: Vec<CtxMor> = (0..y.values.len()).map(|o| wt[&o].clone()).collect();
    Ok((out, ws))
}

/// Reedy replacement: extend from the empty cosieve.
pub fn reedy_replace(y: &InverseDiagram) -> Result<(InverseDiagram, Vec<CtxMor>)> {
    extend_reedy(y, &BTreeSet::new(), &BTreeMap::new(), &BTreeMap::new(), &BTreeMap::new())
}

// ---------------------------------------------------------------------------
// Frames of single objects
// ---------------------------------------------------------------------------

/// A width-truncated frame: a certified diagram over the opposite of the
/// category of chains of a homotopical poset.
#[derive(Debug, Clone)]
pub struct TruncatedFrame {
    /// The poset whose chains index the diagram.
    pub jcat: FinCategory,
    /// The direct chain category.
    pub dcat: DCat,
    pub diagram: InverseDiagram,
}

/// The morphism of `d` with the given target object and reindexing table.
pub fn dmor(d: &DCat, tgt: usize, alpha: &[usize]) -> Option<usize> {
    d.cat.morphisms.iter().find(|m| m.tgt == tgt && d.alpha[m.id] == alpha).map(|m| m.id)
}

/// The object sequence of a chain label of `D(J)`, resolved against the
/// underlying category `j` (empty for an adjoined initial object).
pub fn chain_objects(j: &FinCategory, l: &DLabel) -> Option<Vec<usize>> {
    let DLabel::Chain { start, mors } = l else { return None };
    if *start == usize::MAX {
        return Some(Vec::new());
    }
    let mut seq = vec![*start];
    for &m in mors {
        seq.push(j.mor(m)?.tgt);
    }
    Some(seq)
}

/// The object of `d` labelled by the chain through the listed objects of
/// `j`.
pub fn chain_object(d: &DCat, j: &FinCategory, objs: &[usize]) -> Option<usize> {
    d.labels.iter().position(|l| chain_objects(j, l).as_deref() == Some(objs))
}

/// The constant homotopical diagram at a slice object.
pub fn constant_diagram(
    shape: &InverseCat,
    model: ContextualModel,
    base: &Ctx,
    a: &FOb,
) -> InverseDiagram {
    let arrows = shape
        .hcat
        .cat
        .morphisms
        .iter()
        .map(|m| (m.id, CtxMor::identity(&a.total)))
        .collect();
    InverseDiagram {
        shape: shape.clone(),
        model,
        base: base.clone(),
        values: vec![a.clone(); shape.hcat.cat.objects.len()],
        arrows,
    }
}

/// The width-truncated frame of a single fibrant object: the Reedy
/// replacement of the constant diagram over the chains of the point.
pub fn frame_of(
    model: ContextualModel,
    base: &Ctx,
    a: &FOb,
    width: usize,
) -> Result<(TruncatedFrame, Vec<CtxMor>)> {
    let hcat = crate::simp::HomotopicalFinCategory::minimal(FinCategory::terminal());
    let dcat = crate::simp::d_of_category(&hcat, width)?;
    let inv = dcat.inverse();
    let y = constant_diagram(&inv, model, base, a);
    let (diagram, ws) = reedy_replace(&y)?;
    Ok((TruncatedFrame { jcat: FinCategory::terminal(), dcat, diagram }, ws))
}

// ---------------------------------------------------------------------------
// Adjunction units and 1-simplex frames
// ---------------------------------------------------------------------------

/// The adjunctions whose units the frame constructions consume.
#[derive(Debug, Clone)]
pub enum Adjunction {
    Identity,
    /// `p* ⊣ Π(Δ, −)` for the dependent projection `Γ.Δ → Γ`.
    PiAlong { gamma: Ctx, delta: Ext },
}

/// Invert an isomorphism of contexts.
fn invert(m: &CtxMor) -> Result<CtxMor> {
    if !m.is_iso() {
        return Err(Error::Invalid("cannot invert a non-isomorphism".into()));
    }
    let d = m.dom.total()?;
    let c = m.cod.total()?;
    let mut obj = vec![0; c.n_obj];
    for o in 0..d.n_obj {
        obj[m.fun.obj[o]] = o;
    }
    let mut arr = vec![0; c.n_arr()];
    for a in 0..d.n_arr() {
        arr[m.fun.arr[a]] = a;
    }
    Ok(CtxMor { dom: m.cod.clone(), cod: m.dom.clone(), fun: GpdFun { obj, arr } })
}

/// Present a slice object as a one-family extension of its base via the
/// split cleavage of its structure map.
fn present(x: &FOb) -> Result<(Family, CtxMor)> {
    let w = fibration_witness(&x.map)?
        .ok_or_else(|| Error::Invalid("slice object has no fibration structure".into()))?;
    Ok((w.family, w.iso))
}

impl Adjunction {
    /// The right-adjoint composite on slice objects over the frame base.
    pub fn gf_ob(&self, x: &FOb) -> Result<FOb> {
        match self {
            Adjunction::Identity => Ok(x.clone()),
            Adjunction::PiAlong { gamma, delta } => {
                let (xi, _) = present(x)?;
                let gd = extend_ctx(gamma, delta)?;
                let xi_p = xi.reindex(&proj_n(&gd, delta.depth()).fun);
                let pi = pi_single(gamma, delta, &xi_p)?;
                let total = gamma.extend(pi)?;
                let map = proj(&total);
                Ok(FOb { total, map })
            }
        }
    }

    /// The right-adjoint composite on slice morphisms.
    pub fn gf_mor(&self, x: &FOb, y: &FOb, u: &CtxMor) -> Result<CtxMor> {
        match self {
            Adjunction::Identity => Ok(u.clone()),
            Adjunction::PiAlong { gamma, delta } => {
                let (xi, ix) = present(x)?;
                let (om, iy) = present(y)?;
                let u2 = compose(&iy, &compose(u, &invert(&ix)?));
                let gd = extend_ctx(gamma, delta)?;
                let pd = proj_n(&gd, delta.depth());
                let xi_p = xi.reindex(&pd.fun);
                let om_p = om.reindex(&pd.fun);
                let pu = pullback_mor_along_proj(
                    gamma,
                    delta,
                    &Ext::single(xi),
                    &Ext::single(om),
                    &u2,
                )?;
                pistar_mor(gamma, delta, &xi_p, &om_p, &pu)
            }
        }
    }

    /// The unit at a slice object.
    pub fn unit(&self, x: &FOb) -> Result<CtxMor> {
        match self {
            Adjunction::Identity => Ok(CtxMor::identity(&x.total)),
            Adjunction::PiAlong { gamma, delta } => {
                let (xi, iso) = present(x)?;
                let eta = adjunction_unit(gamma, delta, &xi)?;
                Ok(compose(&eta, &iso))
            }
        }
    }

    /// The left adjoint as a base-change functor.
    fn left(&self) -> Result<SliceFun> {
        match self {
            Adjunction::Identity => Ok(SliceFun::Identity),
            Adjunction::PiAlong { gamma, delta } => {
                let gd = extend_ctx(gamma, delta)?;
                Ok(SliceFun::Pullback(proj_n(&gd, delta.depth())))
            }
        }
    }

    pub fn f_ob(&self, x: &FOb) -> Result<FOb> {
        self.left()?.apply_ob(x)
    }

    pub fn f_mor(&self, x: &FOb, y: &FOb, u: &CtxMor) -> Result<CtxMor> {
        self.left()?.apply_mor(x, y, u)
    }
}

/// The 1-simplex frame of the unit at a width-1 object frame: the 0-column
/// is the given frame, the 1-column is its image under the right-adjoint
/// composite (the structural equalities hold on the nose), and the mixed
/// object is the mapping path space of the pairing of the identity with the
/// unit.
pub fn unit_1simplex(
    adj: &Adjunction,
    a: &TruncatedFrame,
    base: &Ctx,
) -> Result<TruncatedFrame> {
    let term = FinCategory::terminal();
    let a0_obj = chain_object(&a.dcat, &term, &[0])
        .ok_or_else(|| Error::Malformed("object frame lacks its vertex".into()))?;
    let a00_obj = chain_object(&a.dcat, &term, &[0, 0])
        .ok_or_else(|| Error::Malformed("object frame is not of width one".into()))?;
    let a0 = a.diagram.values[a0_obj].clone();
    let a00 = a.diagram.values[a00_obj].clone();
    let a_edge = |alpha: &[usize]| -> Result<CtxMor> {
        let m = dmor(&a.dcat, a00_obj, alpha)
            .ok_or_else(|| Error::Malformed("object frame lacks a vertex arrow".into()))?;
        Ok(a.diagram.arrows[&m].clone())
    };

    let jcat = FinCategory::from_preorder(2, |x, y| x <= y);
    let hcat = crate::simp::HomotopicalFinCategory::minimal(jcat.clone());
    let dcat = crate::simp::d_of_category(&hcat, 1)?;
    let inv = dcat.inverse();
    let find = |objs: &[usize]| {
        chain_object(&dcat, &jcat, objs)
            .ok_or_else(|| Error::Malformed("missing chain object".into()))
    };
    let o0 = find(&[0])?;
    let o1 = find(&[1])?;
    let o00 = find(&[0, 0])?;
    let o01 = find(&[0, 1])?;
    let o11 = find(&[1, 1])?;

    let gfa0 = adj.gf_ob(&a0)?;
    let gfa00 = adj.gf_ob(&a00)?;
    let sq = pullback(&a0.map, &gfa0.map)?;
    let pairing = sq.mediate_from(&a0.total, &CtxMor::identity(&a0.total), &adj.unit(&a0)?)?;
    let fac = factorize(&pairing)?;
    let x01 = FOb {
        total: fac.mid.clone(),
        map: compose(&compose(&a0.map, &sq.to_left), &fac.p),
    };

    let mut values = vec![FOb { total: base.clone(), map: CtxMor::identity(base) }; 5];
    values[o0] = a0.clone();
    values[o1] = gfa0.clone();
    values[o00] = a00.clone();
    values[o11] = gfa00.clone();
    values[o01] = x01;

    let mut arrows: BTreeMap<usize, CtxMor> = BTreeMap::new();
    for &(o, id) in &dcat.cat.identities {
        arrows.insert(id, CtxMor::identity(&values[o].total));
    }
    let mut put = |tgt: usize, alpha: &[usize], m: CtxMor| -> Result<()> {
        let id = dmor(&dcat, tgt, alpha)
            .ok_or_else(|| Error::Malformed("missing chain morphism".into()))?;
        arrows.insert(id, m);
        Ok(())
    };
    put(o00, &[0], a_edge(&[0])?)?;
    put(o00, &[1], a_edge(&[1])?)?;
    put(o11, &[0], adj.gf_mor(&a00, &a0, &a_edge(&[0])?)?)?;
    put(o11, &[1], adj.gf_mor(&a00, &a0, &a_edge(&[1])?)?)?;
    put(o01, &[0], compose(&sq.to_left, &fac.p))?;
    put(o01, &[1], compose(&sq.to_right, &fac.p))?;

    let diagram = InverseDiagram {
        shape: inv,
        model: a.diagram.model,
        base: base.clone(),
        values,
        arrows,
    };
    Ok(TruncatedFrame { jcat, dcat, diagram })
}

// ---------------------------------------------------------------------------
// Triangle and cube extensions
// ---------------------------------------------------------------------------

/// An edge of frames: a span whose source leg is an acyclic fibration.
#[derive(Debug, Clone)]
pub struct FrameEdge {
    pub mid: FOb,
    pub to_src: CtxMor,
    pub to_tgt: CtxMor,
}

/// The edge carried by a width-1 frame on the chain from `s` to `t`.
pub fn frame_edge(f: &TruncatedFrame, s: usize, t: usize) -> Result<FrameEdge> {
    let o01 = chain_object(&f.dcat, &f.jcat, &[s, t])
        .ok_or_else(|| Error::Malformed("frame lacks the mixed chain".into()))?;
    let m0 = dmor(&f.dcat, o01, &[0])
        .ok_or_else(|| Error::Malformed("frame lacks the source face".into()))?;
    let m1 = dmor(&f.dcat, o01, &[1])
        .ok_or_else(|| Error::Malformed("frame lacks the target face".into()))?;
    Ok(FrameEdge {
        mid: f.diagram.values[o01].clone(),
        to_src: f.diagram.arrows[&m0].clone(),
        to_tgt: f.diagram.arrows[&m1].clone(),
    })
}

/// The outcome of extending two edges out of a common vertex to a triangle.
#[derive(Debug, Clone)]
pub struct InitialityExtension {
    pub apex: FOb,
    pub to_x: CtxMor,
    pub to_y: CtxMor,
    /// The left-adjoint image of the apex.
    pub b_apex: FOb,
    /// The induced comparison out of it.
    pub f1: CtxMor,
    pub report: ValidationReport,
}

/// Extend two unit edges out of a common vertex to a triangle: the apex is
/// the strict pullback of the two source legs, its projections are weak
/// equivalences, the unit is natural on the extension leg, and the induced
/// comparison between the left-adjoint images is a weak equivalence.
pub fn initiality_extension(
    model: &ContextualModel,
    adj: &Adjunction,
    x01: &FrameEdge,
    y02: &FrameEdge,
) -> Result<InitialityExtension> {
    let mut rep = ValidationReport::new("triangle extension from a common vertex");
    if x01.to_src.cod != y02.to_src.cod {
        return Err(Error::Malformed("edges do not share a vertex".into()));
    }
    for leg in [&x01.to_src, &y02.to_src] {
        if fibration_witness(leg)?.is_some() && model.weq_oracle(leg) {
            rep.tick();
        } else {
            rep.violation("acyclic", "a source leg is not an acyclic fibration");
        }
    }
    let sq = pullback(&x01.to_src, &y02.to_src)?;
    let apex = FOb { total: sq.apex.clone(), map: compose(&x01.mid.map, &sq.to_left) };
    for leg in [&sq.to_left, &sq.to_right] {
        if model.weq_oracle(leg) {
            rep.tick();
        } else {
            rep.violation("legs", "a pullback projection is not a weak equivalence");
        }
    }
    // the unit is natural on the extension leg
    let eta_apex = adj.unit(&apex)?;
    let eta_y = adj.unit(&y02.mid)?;
    let lhs = compose(&adj.gf_mor(&apex, &y02.mid, &sq.to_right)?, &eta_apex);
    let rhs = compose(&eta_y, &sq.to_right);
    if lhs.fun == rhs.fun {
        rep.tick();
    } else {
        rep.violation("unit", "the unit is not natural on the extension leg");
    }
    // the left adjoint preserves the acyclic leg
    let b_apex = adj.f_ob(&apex)?;
    let f1 = adj.f_mor(&apex, &y02.mid, &sq.to_right)?;
    if model.weq_oracle(&f1) {
        rep.tick();
    } else {
        rep.violation("comparison", "the induced comparison is not a weak equivalence");
    }
    Ok(InitialityExtension { apex, to_x: sq.to_left, to_y: sq.to_right, b_apex, f1, report: rep })
}

/// The punctured-cube shape on `n + 2` vertices: proper subsets of
/// `{0, …, n+1}` containing 0, ordered by reverse inclusion.
pub fn punctured_cube(n: usize) -> (InverseCat, Vec<BTreeSet<usize>>) {
    let top = n + 2;
    let mut subs: Vec<BTreeSet<usize>> = Vec::new();
    for mask in 0u32..(1 << top) {
        if mask & 1 == 0 || mask == (1 << top) - 1 {
            continue;
        }
        subs.push((0..top).filter(|i| mask >> i & 1 == 1).collect());
    }
    subs.sort_by_key(|s| (s.len(), s.iter().copied().collect::<Vec<_>>()));
    let cat = FinCategory::from_preorder(subs.len(), |a, b| subs[b].is_subset(&subs[a]));
    let degree = subs.iter().map(|s| s.len()).collect();
    let hcat = crate::simp::HomotopicalFinCategory::minimal(cat);
    (InverseCat { hcat, degree }, subs)
}

/// Assemble the punctured cube over a shared vertex from the strict fibered
/// products of the given edges: the face at `S` is the limit of the edges
/// indexed by `S \ {0}` over the vertex, and every inclusion acts by the
/// mediated projection.
pub fn cube_from_edges(
    model: ContextualModel,
    base: &Ctx,
    v: &FOb,
    edges: &[FrameEdge],
) -> Result<(InverseDiagram, usize)> {
    let (shape, subs) = punctured_cube(edges.len().saturating_sub(1));
    if subs.iter().map(|s| s.len()).max() != Some(edges.len()) {
        return Err(Error::Malformed("edge count does not match the cube dimension".into()));
    }
    for e in edges {
        if e.to_src.cod != v.total {
            return Err(Error::Malformed("an edge does not land on the vertex".into()));
        }
    }
    // limit presentation of each face, kept uniform so projections compose
    // strictly
    let mut lims: Vec<(CtxDiagram, LimitCone)> = Vec::new();
    for s in &subs {
        let picks: Vec<usize> = s.iter().copied().filter(|&i| i > 0).collect();
        let k = picks.len();
        let star = FinCategory::from_preorder(k + 1, |a, b| a == b || b == 0);
        let mut values = vec![v.total.clone()];
        let mut arrows: BTreeMap<usize, CtxMor> = BTreeMap::new();
        for &i in &picks {
            values.push(edges[i - 1].mid.total.clone());
        }
        for m in &star.morphisms {
            let a = if m.src == m.tgt {
                CtxMor::identity(&values[m.src])
            } else {
                edges[picks[m.src - 1] - 1].to_src.clone()
            };
            arrows.insert(m.id, a);
        }
        let diag = CtxDiagram { shape: star, values, arrows };
        diag.validate()?;
        let lim = finite_limit(&diag)?;
        lims.push((diag, lim));
    }
    let values: Vec<FOb> = lims
        .iter()
        .map(|(_, lim)| FOb {
            total: lim.apex.clone(),
            map: compose(&v.map, &lim.legs[0]),
        })
        .collect();
    let mut arrows: BTreeMap<usize, CtxMor> = BTreeMap::new();
    for m in &shape.hcat.cat.morphisms {
        let (s, t) = (m.src, m.tgt);
        if s == t {
            arrows.insert(m.id, CtxMor::identity(&values[s].total));
            continue;
        }
        // cone from the face at `s` onto the star of the face at `t`
        let spicks: Vec<usize> = subs[s].iter().copied().filter(|&i| i > 0).collect();
        let tpicks: Vec<usize> = subs[t].iter().copied().filter(|&i| i > 0).collect();
        let mut legs = vec![lims[s].1.legs[0].clone()];
        for &i in &tpicks {
            let pos = spicks.iter().position(|&x| x == i).expect("face inclusion");
            legs.push(lims[s].1.legs[pos + 1].clone());
        }
        arrows.insert(m.id, mediate(&lims[t].1, &lims[t].0, &values[s].total, &legs)?);
    }
    let vertex = subs.iter().position(|s| s.len() == 1).expect("vertex face");
    Ok((InverseDiagram { shape, model, base: base.clone(), values, arrows }, vertex))
}

/// The limit of a whole diagram in the slice over its base, with its legs.
pub fn diagram_limit(x: &InverseDiagram) -> Result<(FOb, Vec<CtxMor>)> {
    let (_, lim, n) = diagram_limit_cone(x)?;
    let apex = FOb { total: lim.apex.clone(), map: lim.legs[n].clone() };
    Ok((apex, lim.legs[..n].to_vec()))
}

fn diagram_limit_cone(x: &InverseDiagram) -> Result<(CtxDiagram, LimitCone, usize)> {
    let cat = &x.shape.hcat.cat;
    let n = cat.objects.len();
    let m0 = cat.morphisms.len();
    let mut morphisms = cat.morphisms.clone();
    for k in 0..n {
        morphisms.push(MorRec { id: m0 + k, src: k, tgt: n });
    }
    let idb = m0 + n;
    morphisms.push(MorRec { id: idb, src: n, tgt: n });
    let mut composition = cat.composition.clone();
    for m in &cat.morphisms {
        composition.push((m0 + m.tgt, m.id, m0 + m.src));
    }
    for k in 0..n {
        composition.push((idb, m0 + k, m0 + k));
    }
    composition.push((idb, idb, idb));
    let mut identities = cat.identities.clone();
    identities.push((n, idb));
    let ext = FinCategory { objects: (0..=n).collect(), morphisms, identities, composition };
    let mut values: Vec<Ctx> = x.values.iter().map(|v| v.total.clone()).collect();
    values.push(x.base.clone());
    let mut arrows = x.arrows.clone();
    for k in 0..n {
        arrows.insert(m0 + k, x.values[k].map.clone());
    }
    arrows.insert(idb, CtxMor::identity(&x.base));
    let diag = CtxDiagram { shape: ext, values, arrows };
    diag.validate()?;
    let lim = finite_limit(&diag)?;
    Ok((diag, lim, n))
}

/// Extend a punctured cube of edges: the apex is the limit over all faces
/// through the shared vertex, and the mediated projection onto the vertex
/// must be an acyclic fibration.
pub fn initiality_extension_n(
    model: &ContextualModel,
    diag: &InverseDiagram,
    vertex: usize,
) -> Result<(FOb, CtxMor, ValidationReport)> {
    let mut rep = ValidationReport::new("cube extension from a common vertex");
    let (apex, legs) = diagram_limit(diag)?;
    let leg = legs[vertex].clone();
    if fibration_witness(&leg)?.is_some() {
        rep.tick();
    } else {
        rep.violation("acyclic", "the projection onto the vertex is not a fibration");
    }
    if model.weq_oracle(&leg) {
        rep.tick();
    } else {
        rep.violation("acyclic", "the projection onto the vertex is not a weak equivalence");
    }
    Ok((apex, leg, rep))
}

// ---------------------------------------------------------------------------
// Restriction and base change
// ---------------------------------------------------------------------------

/// Restrict a diagram to a cosieve of its shape, renumbering objects and
/// morphisms.
pub fn restrict_diagram(x: &InverseDiagram, keep: &[usize]) -> Result<InverseDiagram> {
    let cat = &x.shape.hcat.cat;
    let keepset: BTreeSet<usize> = keep.iter().copied().collect();
    if !is_cosieve(&keepset, cat) {
        return Err(Error::Invalid("restriction target is not a cosieve".into()));
    }
    let omap: BTreeMap<usize, usize> =
        keep.iter().copied().enumerate().map(|(n, o)| (o, n)).collect();
    let mut morphisms = Vec::new();
    let mut mor_map: BTreeMap<usize, usize> = BTreeMap::new();
    for m in &cat.morphisms {
        if omap.contains_key(&m.src) && omap.contains_key(&m.tgt) {
            let id = morphisms.len();
            mor_map.insert(m.id, id);
            morphisms.push(MorRec { id, src: omap[&m.src], tgt: omap[&m.tgt] });
        }
    }
    let identities = cat
        .identities
        .iter()
        .filter(|(o, _)| omap.contains_key(o))
        .map(|&(o, id)| (omap[&o], mor_map[&id]))
        .collect();
    let composition = cat
        .composition
        .iter()
        .filter(|(g, f, _)| mor_map.contains_key(g) && mor_map.contains_key(f))
        .map(|&(g, f, gf)| (mor_map[&g], mor_map[&f], mor_map[&gf]))
        .collect();
    let sub = FinCategory {
        objects: (0..keep.len()).collect(),
        morphisms,
        identities,
        composition,
    };
    let weqs = x
        .shape
        .hcat
        .weqs
        .iter()
        .filter_map(|m| mor_map.get(m).copied())
        .collect();
    let shape = InverseCat {
        hcat: crate::simp::HomotopicalFinCategory { cat: sub, weqs },
        degree: keep.iter().map(|&o| x.shape.degree[o]).collect(),
    };
    let values = keep.iter().map(|&o| x.values[o].clone()).collect();
    let arrows = x
        .arrows
        .iter()
        .filter_map(|(m, a)| mor_map.get(m).map(|&n| (n, a.clone())))
        .collect();
    Ok(InverseDiagram { shape, model: x.model, base: x.base.clone(), values, arrows })
}

/// Transport a certified diagram along a base-change functor: exact functors
/// act pointwise; a pushforward acts pointwise and is then Reedy replaced,
/// with the levelwise comparison returned.
pub fn nf_on_homotopical(
    f: &SliceFun,
    x: &InverseDiagram,
) -> Result<(InverseDiagram, Vec<CtxMor>)> {
    let new_base = match f {
        SliceFun::Identity => x.base.clone(),
        SliceFun::Pullback(g) => g.dom.clone(),
        SliceFun::Pushforward(g) => g.cod.clone(),
    };
    let cat = &x.shape.hcat.cat;
    let values: Vec<FOb> = x.values.iter().map(|v| f.apply_ob(v)).collect::<Result<_>>()?;
    let mut arrows = BTreeMap::new();
    for m in &cat.morphisms {
        arrows.insert(
            m.id,
            f.apply_mor(&x.values[m.src], &x.values[m.tgt], &x.arrows[&m.id])?,
        );
    }
    let y = InverseDiagram {
        shape: x.shape.clone(),
        model: x.model,
        base: new_base,
        values,
        arrows,
    };
    match f {
        SliceFun::Identity | SliceFun::Pullback(_) => {
            let ws = y.values.iter().map(|v| CtxMor::identity(&v.total)).collect();
            Ok((y, ws))
        }
        SliceFun::Pushforward(_) => reedy_replace(&y),
    }
}

/// Extend certified frame data given on a cosieve to the whole shape: each
/// missing value becomes its own matching object with the identity matching
/// map, so the extension is Reedy by construction; homotopicality of the new
/// projections is a property of the input and is reported by `certify`.
pub fn extend_frame(
    model: ContextualModel,
    base: &Ctx,
    shape: &InverseCat,
    given: &BTreeSet<usize>,
    x_vals: &BTreeMap<usize, FOb>,
    x_arrs: &BTreeMap<usize, CtxMor>,
) -> Result<InverseDiagram> {
    let cat = &shape.hcat.cat;
    if !is_cosieve(given, cat) {
        return Err(Error::Invalid("the given objects do not form a cosieve".into()));
    }
    let mut vals = x_vals.clone();
    let mut arrs = x_arrs.clone();
    for &o in given {
        let id = cat.identity_of(o).expect("identity");
        arrs.insert(id, CtxMor::identity(&vals[&o].total));
    }
    let mut order: Vec<usize> =
        (0..cat.objects.len()).filter(|o| !given.contains(o)).collect();
    order.sort_by_key(|&o| (shape.degree[o], o));
    for j in order {
        let ml = {
            let vals = &vals;
            let arrs = &arrs;
            matching_limit(shape, j, base, &|o| vals[&o].clone(), &|m| arrs[&m].clone())?
        };
        let value = ml.object();
        for (k, &f) in ml.nodes.iter().enumerate() {
            arrs.insert(f, ml.node_leg(k));
        }
        arrs.insert(
            cat.identity_of(j).expect("identity"),
            CtxMor::identity(&value.total),
        );
        vals.insert(j, value);
    }
    let values: Vec<FOb> = (0..cat.objects.len()).map(|o| vals[&o].clone()).collect();
    Ok(InverseDiagram { shape: shape.clone(), model, base: base.clone(), values, arrows: arrs })
}

/// Precompose a frame over the chains of `[n+1]` along the embedding of the
/// augmented chain category of `[n]` that appends the top vertex.  Requires
/// the boundary condition on the nose: the values on the constant chains at
/// the top vertex must equal the given object frame.
pub fn slice_map_sa(x: &TruncatedFrame, a: &TruncatedFrame) -> Result<(DCat, InverseDiagram)> {
    let top = x.jcat.objects.len() - 1;
    let width = x.dcat.degree.iter().copied().max().unwrap_or(0);
    if width == 0 {
        return Err(Error::Malformed("frame of width zero".into()));
    }
    let term = FinCategory::terminal();
    for k in 0..=width {
        let xo = chain_object(&x.dcat, &x.jcat, &vec![top; k + 1])
            .ok_or_else(|| Error::Malformed("missing constant chain at the top vertex".into()))?;
        let ao = chain_object(&a.dcat, &term, &vec![0; k + 1])
            .ok_or_else(|| Error::Malformed("object frame is too narrow".into()))?;
        let (xv, av) = (&x.diagram.values[xo], &a.diagram.values[ao]);
        if xv.total != av.total || xv.map.fun != av.map.fun {
            return Err(Error::Invalid(
                "boundary condition fails: the top column is not the given object frame".into(),
            ));
        }
    }
    let sub = FinCategory::from_preorder(top, |p, q| !x.jcat.hom(p, q).is_empty());
    let hcat = crate::simp::HomotopicalFinCategory::minimal(sub.clone());
    let da = crate::simp::d_a(&hcat, width - 1)?;
    let mut emb = Vec::with_capacity(da.cat.objects.len());
    for l in &da.labels {
        let objs = chain_objects(&sub, l)
            .ok_or_else(|| Error::Malformed("augmented shape holds a non-chain label".into()))?;
        let mut extd = objs.clone();
        extd.push(top);
        emb.push(
            chain_object(&x.dcat, &x.jcat, &extd)
                .ok_or_else(|| Error::Invalid("embedded chain is missing from the frame".into()))?,
        );
    }
    let values: Vec<FOb> = emb.iter().map(|&o| x.diagram.values[o].clone()).collect();
    let mut arrows = BTreeMap::new();
    for m in &da.cat.morphisms {
        let mut ea = da.alpha[m.id].clone();
        ea.push(da.degree[m.tgt]);
        let xid = dmor(&x.dcat, emb[m.tgt], &ea)
            .ok_or_else(|| Error::Invalid("embedded chain morphism is missing".into()))?;
        arrows.insert(m.id, x.diagram.arrows[&xid].clone());
    }
    let diagram = InverseDiagram {
        shape: da.inverse(),
        model: x.diagram.model,
        base: x.diagram.base.clone(),
        values,
        arrows,
    };
    Ok((da, diagram))
}

// ---------------------------------------------------------------------------
// Squares and the homotopy-pullback detector
// ---------------------------------------------------------------------------

/// The commuting-square poset: corners of `[1] × [1]`, coded `0..4` with 0
/// initial, 3 final, and 1, 2 incomparable.
pub fn square_poset() -> FinCategory {
    FinCategory::from_preorder(4, |p, q| (p >> 1) <= (q >> 1) && (p & 1) <= (q & 1))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Corner {
    Q,
    Y,
    E,
    A,
    B,
}

fn corner_of(chain: &[usize]) -> Corner {
    if chain[0] == 0 {
        Corner::Q
    } else if chain == [2, 3] {
        Corner::E
    } else if chain[0] == 1 {
        Corner::Y
    } else if chain == [2] {
        Corner::A
    } else {
        Corner::B
    }
}

/// The strict square over a span edge `A ⇇ E → B` and a fibration
/// `Y → B`: the initial corner carries the strict pullback `E ×_B Y`, every
/// chain through it is filled by that pullback, and the bottom edge is the
/// span itself.
pub fn square_strict(
    model: ContextualModel,
    base: &Ctx,
    bottom: &FrameEdge,
    a: &FOb,
    b: &FOb,
    y: &FOb,
    ymap: &CtxMor,
) -> Result<(FinCategory, DCat, InverseDiagram)> {
    if bottom.to_src.cod != a.total
        || bottom.to_tgt.cod != b.total
        || ymap.dom != y.total
        || ymap.cod != b.total
    {
        return Err(Error::Malformed("square data does not assemble into a cospan".into()));
    }
    if compose(&a.map, &bottom.to_src).fun != bottom.mid.map.fun
        || compose(&b.map, &bottom.to_tgt).fun != bottom.mid.map.fun
        || compose(&b.map, ymap).fun != y.map.fun
    {
        return Err(Error::Malformed("square data does not lie over the base".into()));
    }
    let jcat = square_poset();
    let hcat = crate::simp::HomotopicalFinCategory::minimal(jcat.clone());
    let dcat = crate::simp::sd(&hcat, 2)?;
    let sq = pullback(&bottom.to_tgt, ymap)?;
    let q = FOb { total: sq.apex.clone(), map: compose(&y.map, &sq.to_right) };
    let (qe, qy) = (sq.to_left.clone(), sq.to_right.clone());
    let value = |c: Corner| -> FOb {
        match c {
            Corner::Q => q.clone(),
            Corner::Y => y.clone(),
            Corner::E => bottom.mid.clone(),
            Corner::A => a.clone(),
            Corner::B => b.clone(),
        }
    };
    let canon = |from: Corner, to: Corner| -> Result<CtxMor> {
        Ok(match (from, to) {
            (Corner::Q, Corner::Q) => CtxMor::identity(&q.total),
            (Corner::Q, Corner::Y) => qy.clone(),
            (Corner::Q, Corner::E) => qe.clone(),
            (Corner::Q, Corner::A) => compose(&bottom.to_src, &qe),
            (Corner::Q, Corner::B) => compose(ymap, &qy),
            (Corner::Y, Corner::Y) => CtxMor::identity(&y.total),
            (Corner::Y, Corner::B) => ymap.clone(),
            (Corner::E, Corner::E) => CtxMor::identity(&bottom.mid.total),
            (Corner::E, Corner::A) => bottom.to_src.clone(),
            (Corner::E, Corner::B) => bottom.to_tgt.clone(),
            (Corner::A, Corner::A) => CtxMor::identity(&a.total),
            (Corner::B, Corner::B) => CtxMor::identity(&b.total),
            _ => return Err(Error::Invalid("no canonical map between these corners".into())),
        })
    };
    let chains: Vec<Vec<usize>> = dcat
        .labels
        .iter()
        .map(|l| chain_objects(&jcat, l).expect("chain labels"))
        .collect();
    let values: Vec<FOb> = chains.iter().map(|c| value(corner_of(c))).collect();
    let mut arrows = BTreeMap::new();
    for m in &dcat.cat.morphisms {
        // the inverse arrow runs from the longer chain to its subchain
        arrows.insert(m.id, canon(corner_of(&chains[m.tgt]), corner_of(&chains[m.src]))?);
    }
    let diagram =
        InverseDiagram { shape: dcat.inverse(), model, base: base.clone(), values, arrows };
    Ok((jcat, dcat, diagram))
}

/// Certify a strict square by Reedy replacement.
pub fn square_frame(
    jcat: &FinCategory,
    dcat: &DCat,
    strict: &InverseDiagram,
) -> Result<(TruncatedFrame, Vec<CtxMor>)> {
    let (diagram, ws) = reedy_replace(strict)?;
    Ok((TruncatedFrame { jcat: jcat.clone(), dcat: dcat.clone(), diagram }, ws))
}

/// Replace every value at a chain through the initial corner by its product
/// with a two-point set.  The diagram stays functorial and homotopical, but
/// the initial corner no longer fills the square up to weak equivalence.
pub fn double_initial_corner(
    jcat: &FinCategory,
    dcat: &DCat,
    x: &InverseDiagram,
) -> Result<InverseDiagram> {
    let two = Ctx::from_gpd(&crate::gpd::Gpd::discrete(2));
    let chains: Vec<Vec<usize>> = dcat
        .labels
        .iter()
        .map(|l| chain_objects(jcat, l).expect("chain labels"))
        .collect();
    let doubled: Vec<bool> = chains.iter().map(|c| c[0] == 0).collect();
    let mut prods: Vec<Option<(CtxDiagram, LimitCone)>> = vec![None; chains.len()];
    let mut values = x.values.clone();
    for o in 0..chains.len() {
        if !doubled[o] {
            continue;
        }
        let shape = FinCategory::discrete(2);
        let vals = vec![x.values[o].total.clone(), two.clone()];
        let mut arrows = BTreeMap::new();
        for &(ob, id) in &shape.identities {
            arrows.insert(id, CtxMor::identity(&vals[ob]));
        }
        let diag = CtxDiagram { shape, values: vals, arrows };
        let lim = finite_limit(&diag)?;
        values[o] = FOb {
            total: lim.apex.clone(),
            map: compose(&x.values[o].map, &lim.legs[0]),
        };
        prods[o] = Some((diag, lim));
    }
    let mut arrows = BTreeMap::new();
    for m in &x.shape.hcat.cat.morphisms {
        let (s, t) = (m.src, m.tgt);
        let a = &x.arrows[&m.id];
        let new = match (doubled[s], doubled[t]) {
            (false, false) => a.clone(),
            (true, false) => compose(a, &prods[s].as_ref().unwrap().1.legs[0]),
            (true, true) => {
                let fold = prods[s].as_ref().unwrap().1.legs[0].clone();
                let second = prods[s].as_ref().unwrap().1.legs[1].clone();
                let (diag, lim) = prods[t].as_ref().unwrap();
                mediate(lim, diag, &values[s].total, &[compose(a, &fold), second])?
            }
            (false, true) => {
                return Err(Error::Invalid("doubling is not closed under the shape".into()))
            }
        };
        arrows.insert(m.id, new);
    }
    Ok(InverseDiagram {
        shape: x.shape.clone(),
        model: x.model,
        base: x.base.clone(),
        values,
        arrows,
    })
}

/// Whether a certified square is a homotopy pullback: the mediated
/// comparison from the limit of the whole square onto the limit of its
/// cospan restriction (the chains avoiding the initial corner) must be a
/// weak equivalence.
pub fn is_homotopy_pullback(f: &TruncatedFrame) -> Result<bool> {
    let chains: Vec<Vec<usize>> = f
        .dcat
        .labels
        .iter()
        .map(|l| chain_objects(&f.jcat, l).expect("chain labels"))
        .collect();
    let keep: Vec<usize> = (0..chains.len()).filter(|&o| chains[o][0] != 0).collect();
    let sub = restrict_diagram(&f.diagram, &keep)?;
    let (diag, lim, _) = diagram_limit_cone(&sub)?;
    let (whole, legs) = diagram_limit(&f.diagram)?;
    let mut cone: Vec<CtxMor> = keep.iter().map(|&o| legs[o].clone()).collect();
    cone.push(whole.map.clone());
    let c = mediate(&lim, &diag, &whole.total, &cone)?;
    Ok(f.diagram.model.weq_oracle(&c))
}

/// Build and certify the square over a span edge and a fibration into its
/// target, then confirm it against the homotopy-pullback detector.
pub fn comm_square_builder(
    model: ContextualModel,
    base: &Ctx,
    bottom: &FrameEdge,
    a: &FOb,
    b: &FOb,
    y: &FOb,
    ymap: &CtxMor,
) -> Result<(TruncatedFrame, ValidationReport)> {
    let mut rep = ValidationReport::new("commuting square over a span");
    if fibration_witness(&bottom.to_src)?.is_some() && model.weq_oracle(&bottom.to_src) {
        rep.tick();
    } else {
        rep.violation("span", "the source leg is not an acyclic fibration");
    }
    for m in [&bottom.to_tgt, ymap] {
        if fibration_witness(m)?.is_some() {
            rep.tick();
        } else {
            rep.violation("span", "a structure map is not a fibration");
        }
    }
    let (jcat, dcat, strict) = square_strict(model, base, bottom, a, b, y, ymap)?;
    rep.absorb(strict.validate());
    let (frame, _ws) = square_frame(&jcat, &dcat, &strict)?;
    rep.absorb(certify(&frame.diagram)?);
    if is_homotopy_pullback(&frame)? {
        rep.tick();
    } else {
        rep.violation("pullback", "the built square fails the homotopy-pullback detector");
    }
    Ok((frame, rep))
}

// ---------------------------------------------------------------------------
// Enumeration of certified diagrams and shape isomorphisms
// ---------------------------------------------------------------------------

/// A certified diagram found by enumeration, recorded against a value pool.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct EnumeratedDiagram {
    /// Pool index per shape object.
    pub values: Vec<usize>,
    /// Functor tables per shape morphism.
    pub arrows: BTreeMap<usize, GpdFun>,
}

struct Enumerator<'a> {
    shape: &'a InverseCat,
    model: ContextualModel,
    base: &'a Ctx,
    pool: &'a [FOb],
    order: Vec<usize>,
    budget: usize,
    steps: usize,
    vals: BTreeMap<usize, usize>,
    arrs: BTreeMap<usize, CtxMor>,
    out: Vec<EnumeratedDiagram>,
}

impl Enumerator<'_> {
    fn spend(&mut self) -> Result<()> {
        self.steps += 1;
        if self.steps > self.budget {
            return Err(Error::BoundExceeded(format!(
                "diagram enumeration exceeded {} steps",
                self.budget
            )));
        }
        Ok(())
    }

    fn compositions_hold(&self) -> bool {
        self.shape.hcat.cat.composition.iter().all(|&(g, f, gf)| {
            match (self.arrs.get(&g), self.arrs.get(&f), self.arrs.get(&gf)) {
                (Some(ag), Some(af), Some(agf)) => compose(ag, af).fun == agf.fun,
                _ => true,
            }
        })
    }

    fn object(&mut self, pos: usize) -> Result<()> {
        if pos == self.order.len() {
            self.out.push(EnumeratedDiagram {
                values: (0..self.order.len()).map(|o| self.vals[&o]).collect(),
                arrows: self.arrs.iter().map(|(&m, a)| (m, a.fun.clone())).collect(),
            });
            return Ok(());
        }
        let j = self.order[pos];
        let cat = &self.shape.hcat.cat;
        let outgoing: Vec<usize> = cat
            .morphisms
            .iter()
            .filter(|m| m.src == j && !cat.is_identity(m.id))
            .map(|m| m.id)
            .collect();
        let idj = cat.identity_of(j).expect("identity");
        for p in 0..self.pool.len() {
            self.spend()?;
            self.vals.insert(j, p);
            self.arrs.insert(idj, CtxMor::identity(&self.pool[p].total));
            self.arrows(pos, j, &outgoing, 0)?;
            self.arrs.remove(&idj);
        }
        self.vals.remove(&j);
        Ok(())
    }

    fn arrows(&mut self, pos: usize, j: usize, outgoing: &[usize], k: usize) -> Result<()> {
        if k == outgoing.len() {
            // matching-map fibrancy at the freshly assigned object
            let ml = {
                let vals = &self.vals;
                let arrs = &self.arrs;
                let pool = self.pool;
                matching_limit(
                    self.shape,
                    j,
                    self.base,
                    &|o| pool[vals[&o]].clone(),
                    &|m| arrs[&m].clone(),
                )?
            };
            let legs: Vec<CtxMor> =
                ml.nodes.iter().map(|&f| self.arrs[&f].clone()).collect();
            let v = &self.pool[self.vals[&j]];
            let mmap = ml.mediate_cone(&v.total, &legs, &v.map)?;
            if fibration_witness(&mmap)?.is_none() {
                return Ok(());
            }
            return self.object(pos + 1);
        }
        let m = outgoing[k];
        let cat = &self.shape.hcat.cat;
        let tgt = cat.mor(m).expect("morphism").tgt;
        let marked = self.shape.hcat.weqs.contains(&m);
        let (src_ob, tgt_ob) =
            (self.pool[self.vals[&j]].clone(), self.pool[self.vals[&tgt]].clone());
        for cand in crate::fib::slice_homs(&src_ob, &tgt_ob)? {
            self.spend()?;
            if marked && !self.model.weq_oracle(&cand) {
                continue;
            }
            self.arrs.insert(m, cand);
            if self.compositions_hold() {
                self.arrows(pos, j, outgoing, k + 1)?;
            }
            self.arrs.remove(&m);
        }
        Ok(())
    }
}

/// Enumerate every certified diagram on the shape with values drawn from the
/// pool: backtracking in increasing degree, enforcing functoriality,
/// homotopicality of marked arrows, and matching-map fibrancy as each object
/// is assigned.  Exceeding the budget is an error, never a silent
/// truncation.
pub fn enumerate_certified(
    shape: &InverseCat,
    model: ContextualModel,
    base: &Ctx,
    pool: &[FOb],
    budget: usize,
) -> Result<Vec<EnumeratedDiagram>> {
    let mut order: Vec<usize> = (0..shape.hcat.cat.objects.len()).collect();
    order.sort_by_key(|&o| (shape.degree[o], o));
    let mut e = Enumerator {
        shape,
        model,
        base,
        pool,
        order,
        budget,
        steps: 0,
        vals: BTreeMap::new(),
        arrs: BTreeMap::new(),
        out: Vec::new(),
    };
    e.object(0)?;
    let mut out = e.out;
    out.sort();
    Ok(out)
}

/// Search for an isomorphism of marked inverse shapes: bijections on objects
/// and morphisms preserving endpoints, identities, composition, degrees and
/// the marking.  Returns the object and morphism tables.
pub fn marked_iso(a: &InverseCat, b: &InverseCat) -> Option<(Vec<usize>, Vec<usize>)> {
    let (ca, cb) = (&a.hcat.cat, &b.hcat.cat);
    if ca.objects.len() != cb.objects.len() || ca.morphisms.len() != cb.morphisms.len() {
        return None;
    }
    let n = ca.objects.len();
    fn objects(
        a: &InverseCat,
        b: &InverseCat,
        omap: &mut Vec<usize>,
        used: &mut Vec<bool>,
        pos: usize,
    ) -> Option<(Vec<usize>, Vec<usize>)> {
        let (ca, cb) = (&a.hcat.cat, &b.hcat.cat);
        if pos == ca.objects.len() {
            let mut mmap = vec![usize::MAX; ca.morphisms.len()];
            let mut mused = vec![false; cb.morphisms.len()];
            return morphisms(a, b, omap, &mut mmap, &mut mused, 0)
                .then(|| (omap.clone(), mmap));
        }
        for cand in 0..cb.objects.len() {
            if used[cand] || a.degree[pos] != b.degree[cand] {
                continue;
            }
            omap[pos] = cand;
            used[cand] = true;
            if let Some(res) = objects(a, b, omap, used, pos + 1) {
                return Some(res);
            }
            used[cand] = false;
        }
        None
    }
    fn morphisms(
        a: &InverseCat,
        b: &InverseCat,
        omap: &[usize],
        mmap: &mut Vec<usize>,
        mused: &mut Vec<bool>,
        pos: usize,
    ) -> bool {
        let (ca, cb) = (&a.hcat.cat, &b.hcat.cat);
        if pos == ca.morphisms.len() {
            return ca.composition.iter().all(|&(g, f, gf)| {
                cb.compose(mmap[g], mmap[f]) == Some(mmap[gf])
            });
        }
        let m = &ca.morphisms[pos];
        for c in &cb.morphisms {
            if mused[c.id]
                || c.src != omap[m.src]
                || c.tgt != omap[m.tgt]
                || ca.is_identity(m.id) != cb.is_identity(c.id)
                || a.hcat.weqs.contains(&m.id) != b.hcat.weqs.contains(&c.id)
            {
                continue;
            }
            mmap[pos] = c.id;
            mused[c.id] = true;
            if morphisms(a, b, omap, mmap, mused, pos + 1) {
                return true;
            }
            mused[c.id] = false;
        }
        false
    }
    let mut omap = vec![usize::MAX; n];
    let mut used = vec![false; n];
    objects(a, b, &mut omap, &mut used, 0)
}

/// Transport enumerated diagrams along a marked isomorphism of shapes.
pub fn transport_diagrams(
    ds: &[EnumeratedDiagram],
    obj_map: &[usize],
    mor_map: &[usize],
) -> Vec<EnumeratedDiagram> {
    let mut out: Vec<EnumeratedDiagram> = ds
        .iter()
        .map(|d| {
            let mut values = vec![0; d.values.len()];
            for (o, &p) in d.values.iter().enumerate() {
                values[obj_map[o]] = p;
            }
            let arrows =
                d.arrows.iter().map(|(&m, f)| (mor_map[m], f.clone())).collect();
            EnumeratedDiagram { values, arrows }
        })
        .collect();
    out.sort();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gpd::Gpd;
    use crate::model::{fingpd_model, finset_model};

    fn set_ctx(n: usize) -> Ctx {
        Ctx::from_gpd(&Gpd::discrete(n))
    }

    fn interval_ctx() -> Ctx {
        Ctx::from_gpd(&Gpd::connected(2, &Gpd::group_trivial()))
    }

    fn bz2_ctx() -> Ctx {
        Ctx::from_gpd(&Gpd::connected(1, &Gpd::group_z2()))
    }

    #[test]
    fn frame_of_builds_a_path_object() {
        let m = fingpd_model(2, 1).unwrap();
        let base = Ctx::empty();
        let a = FOb::absolute(&interval_ctx());
        let (f, ws) = frame_of(m, &base, &a, 1).unwrap();
        assert!(certify(&f.diagram).unwrap().is_valid());
        // the comparison out of the constant diagram stays levelwise invertible
        for w in &ws {
            assert!(m.weq_oracle(w));
        }
        // the mixed chain is a path object: both faces are acyclic and the
        // matching map onto the product is a fibration
        let term = FinCategory::terminal();
        let o00 = chain_object(&f.dcat, &term, &[0, 0]).unwrap();
        let (_, mmap) = matching_object(&f.diagram, o00).unwrap();
        assert!(fibration_witness(&mmap).unwrap().is_some());
        for alpha in [[0], [1]] {
            let e = dmor(&f.dcat, o00, &alpha).unwrap();
            assert!(m.weq_oracle(&f.diagram.arrows[&e]));
        }
    }

    #[test]
    fn constant_diagram_over_the_interval_fails_the_reedy_check() {
        let m = fingpd_model(2, 1).unwrap();
        let base = Ctx::empty();
        let a = FOb::absolute(&interval_ctx());
        let hcat = crate::simp::HomotopicalFinCategory::minimal(FinCategory::terminal());
        let dcat = crate::simp::d_of_category(&hcat, 1).unwrap();
        let y = constant_diagram(&dcat.inverse(), m, &base, &a);
        assert!(y.validate().is_valid());
        // the matching map is the diagonal of a connected groupoid, which
        // does not lift isomorphisms
        assert!(!certify(&y).unwrap().is_valid());
    }

    #[test]
    fn extend_reedy_keeps_the_cosieve_on_the_nose() {
        let m = finset_model(2, 1).unwrap();
        let base = Ctx::empty();
        let a = FOb::absolute(&set_ctx(2));
        let hcat = crate::simp::HomotopicalFinCategory::minimal(FinCategory::terminal());
        let dcat = crate::simp::d_of_category(&hcat, 1).unwrap();
        let inv = dcat.inverse();
        let y = constant_diagram(&inv, m, &base, &a);
        let term = FinCategory::terminal();
        let o0 = chain_object(&dcat, &term, &[0]).unwrap();
        let given: BTreeSet<usize> = [o0].into_iter().collect();
        let mut vals = BTreeMap::new();
        vals.insert(o0, a.clone());
        let mut arrs = BTreeMap::new();
        arrs.insert(dcat.cat.identity_of(o0).unwrap(), CtxMor::identity(&a.total));
        let mut w = BTreeMap::new();
        w.insert(o0, CtxMor::identity(&a.total));
        let (x, ws) = extend_reedy(&y, &given, &vals, &arrs, &w).unwrap();
        assert!(certify(&x).unwrap().is_valid());
        assert_eq!(x.values[o0], a);
        for wmor in &ws {
            assert!(m.weq_oracle(wmor));
        }
    }

    #[test]
    fn extend_frame_fills_the_mixed_chain_terminally() {
        let m = fingpd_model(2, 1).unwrap();
        let base = Ctx::empty();
        let a = FOb::absolute(&interval_ctx());
        let (af, _) = frame_of(m, &base, &a, 1).unwrap();
        let x = unit_1simplex(&Adjunction::Identity, &af, &base).unwrap();
        assert!(certify(&x.diagram).unwrap().is_valid());
        let o01 = chain_object(&x.dcat, &x.jcat, &[0, 1]).unwrap();
        let given: BTreeSet<usize> =
            (0..x.dcat.cat.objects.len()).filter(|&o| o != o01).collect();
        let mut vals = BTreeMap::new();
        let mut arrs = BTreeMap::new();
        for &o in &given {
            vals.insert(o, x.diagram.values[o].clone());
        }
        for mor in &x.dcat.cat.morphisms {
            if given.contains(&mor.src) && given.contains(&mor.tgt) {
                arrs.insert(mor.id, x.diagram.arrows[&mor.id].clone());
            }
        }
        let shape = x.dcat.inverse();
        let y = extend_frame(m, &base, &shape, &given, &vals, &arrs).unwrap();
        assert!(certify(&y).unwrap().is_valid());
        for &o in &given {
            assert_eq!(y.values[o], x.diagram.values[o]);
        }
        // the filled value is its own matching object on the nose
        let (mo, mmap) = matching_object(&y, o01).unwrap();
        assert_eq!(y.values[o01], mo);
        assert!(mmap.is_iso());
    }

    #[test]
    fn slice_map_precomposes_along_the_top_vertex() {
        let m = finset_model(2, 1).unwrap();
        let base = Ctx::empty();
        let a = FOb::absolute(&set_ctx(2));
        let (af, _) = frame_of(m, &base, &a, 1).unwrap();
        let x = unit_1simplex(&Adjunction::Identity, &af, &base).unwrap();
        let (da, sliced) = slice_map_sa(&x, &af).unwrap();
        assert!(sliced.validate().is_valid());
        assert!(certify(&sliced).unwrap().is_valid());
        // the initial object of the augmented shape lands on the top column
        let init = da
            .labels
            .iter()
            .position(|l| matches!(l, DLabel::Chain { start, .. } if *start == usize::MAX))
            .unwrap();
        let o1 = chain_object(&x.dcat, &x.jcat, &[1]).unwrap();
        assert_eq!(sliced.values[init], x.diagram.values[o1]);
    }

    #[test]
    fn base_change_acts_pointwise_and_pushforward_is_replaced() {
        let m = finset_model(2, 1).unwrap();
        let gamma = set_ctx(2);
        let ext = gamma.extend(Family::constant(&gamma.total().unwrap(), &Gpd::discrete(2))).unwrap();
        let a = FOb { total: ext.clone(), map: proj(&ext) };
        let (f, _) = frame_of(m, &gamma, &a, 1).unwrap();

        // pulling back along a point of the base keeps certification
        let pt = set_ctx(1);
        let point = CtxMor {
            dom: pt.clone(),
            cod: gamma.clone(),
            fun: GpdFun { obj: vec![0], arr: vec![0] },
        };
        let (pulled, ws) = nf_on_homotopical(&SliceFun::Pullback(point), &f.diagram).unwrap();
        assert!(certify(&pulled).unwrap().is_valid());
        for w in &ws {
            assert!(w.is_iso());
        }

        // pushing forward along the projection to the point re-fibers the
        // diagram over the new base, levelwise equivalently
        let to_point = CtxMor {
            dom: gamma.clone(),
            cod: pt.clone(),
            fun: GpdFun { obj: vec![0, 0], arr: vec![0, 0] },
        };
        let (pushed, ws) = nf_on_homotopical(&SliceFun::Pushforward(to_point), &f.diagram).unwrap();
        assert!(certify(&pushed).unwrap().is_valid());
        assert_eq!(pushed.base, pt);
        for w in &ws {
            assert!(m.weq_oracle(w));
        }
    }

    #[test]
    fn unit_1simplex_for_the_identity_repeats_the_object_frame() {
        let m = fingpd_model(2, 1).unwrap();
        let base = Ctx::empty();
        let a = FOb::absolute(&interval_ctx());
        let (af, _) = frame_of(m, &base, &a, 1).unwrap();
        let x = unit_1simplex(&Adjunction::Identity, &af, &base).unwrap();
        assert!(certify(&x.diagram).unwrap().is_valid());
        let term = FinCategory::terminal();
        // both columns carry the object frame on the nose
        for col in 0..=1usize {
            for k in 0..=1usize {
                let xo = chain_object(&x.dcat, &x.jcat, &vec![col; k + 1]).unwrap();
                let ao = chain_object(&af.dcat, &term, &vec![0; k + 1]).unwrap();
                assert_eq!(x.diagram.values[xo], af.diagram.values[ao]);
            }
        }
    }

    #[test]
    fn unit_1simplex_for_a_dependent_product() {
        let m = finset_model(2, 1).unwrap();
        let gamma = Ctx::empty();
        let delta = Ext::single(Family::constant(
            &gamma.total().unwrap(),
            &Gpd::discrete(2),
        ));
        let adj = Adjunction::PiAlong { gamma: gamma.clone(), delta: delta.clone() };
        let ext = gamma
            .extend(Family::constant(&gamma.total().unwrap(), &Gpd::discrete(2)))
            .unwrap();
        let a = FOb { total: ext.clone(), map: proj(&ext) };
        let (af, _) = frame_of(m, &gamma, &a, 1).unwrap();
        let x = unit_1simplex(&adj, &af, &gamma).unwrap();
        assert!(certify(&x.diagram).unwrap().is_valid());
        // the second column is the image of the object frame under the
        // right-adjoint composite, level by level
        let term = FinCategory::terminal();
        for k in 0..=1usize {
            let xo = chain_object(&x.dcat, &x.jcat, &vec![1; k + 1]).unwrap();
            let ao = chain_object(&af.dcat, &term, &vec![0; k + 1]).unwrap();
            let gf = adj.gf_ob(&af.diagram.values[ao]).unwrap();
            assert_eq!(x.diagram.values[xo], gf);
        }
    }

    #[test]
    fn triangle_extension_from_a_shared_vertex() {
        let m = fingpd_model(2, 1).unwrap();
        let base = Ctx::empty();
        let a = FOb::absolute(&interval_ctx());
        let (af, _) = frame_of(m, &base, &a, 1).unwrap();
        let e = frame_edge(&af, 0, 0).unwrap();
        let ext =
            initiality_extension(&m, &Adjunction::Identity, &e, &e).unwrap();
        assert!(ext.report.is_valid());
        assert!(m.weq_oracle(&ext.to_x));
        assert!(m.weq_oracle(&ext.f1));

        // the punctured-cube form of the same triangle agrees, on data whose
        // cleavage search stays within bounds
        let a = FOb::absolute(&bz2_ctx());
        let (af, _) = frame_of(m, &base, &a, 1).unwrap();
        let e = frame_edge(&af, 0, 0).unwrap();
        let (cube, vertex) = cube_from_edges(m, &base, &a, &[e.clone(), e.clone()]).unwrap();
        assert!(cube.validate().is_valid());
        let (_, leg, rep) = initiality_extension_n(&m, &cube, vertex).unwrap();
        assert!(rep.is_valid());
        assert!(m.weq_oracle(&leg));
    }

    #[test]
    fn cube_extension_with_three_edges() {
        let m = finset_model(2, 1).unwrap();
        let base = Ctx::empty();
        let a = FOb::absolute(&set_ctx(2));
        let (af, _) = frame_of(m, &base, &a, 1).unwrap();
        let e = frame_edge(&af, 0, 0).unwrap();
        let (cube, vertex) =
            cube_from_edges(m, &base, &a, &[e.clone(), e.clone(), e.clone()]).unwrap();
        assert!(cube.validate().is_valid());
        let (_, leg, rep) = initiality_extension_n(&m, &cube, vertex).unwrap();
        assert!(rep.is_valid());
        assert!(m.weq_oracle(&leg));
    }

    #[test]
    fn homotopy_pullback_detector_accepts_strict_pullbacks() {
        let m = finset_model(2, 1).unwrap();
        let base = Ctx::empty();
        let b = FOb::absolute(&set_ctx(2));
        let (bf, _) = frame_of(m, &base, &b, 1).unwrap();
        let bottom = frame_edge(&bf, 0, 0).unwrap();
        // a genuine two-to-one fibration into the target corner
        let ext = b
            .total
            .extend(Family::constant(&b.total.total().unwrap(), &Gpd::discrete(2)))
            .unwrap();
        let ymap = proj(&ext);
        let y = FOb { total: ext.clone(), map: compose(&b.map, &ymap) };
        let (frame, rep) =
            comm_square_builder(m, &base, &bottom, &b, &b, &y, &ymap).unwrap();
        assert!(rep.is_valid());
        assert!(is_homotopy_pullback(&frame).unwrap());

        // the all-identities square is a homotopy pullback too
        let idmap = CtxMor::identity(&b.total);
        let (idframe, idrep) =
            comm_square_builder(m, &base, &bottom, &b, &b, &b, &idmap).unwrap();
        assert!(idrep.is_valid());
        assert!(is_homotopy_pullback(&idframe).unwrap());
    }

    #[test]
    fn homotopy_pullback_detector_rejects_a_doubled_corner() {
        let m = finset_model(2, 1).unwrap();
        let base = Ctx::empty();
        let b = FOb::absolute(&set_ctx(2));
        let (bf, _) = frame_of(m, &base, &b, 1).unwrap();
        let bottom = frame_edge(&bf, 0, 0).unwrap();
        let ext = b
            .total
            .extend(Family::constant(&b.total.total().unwrap(), &Gpd::discrete(2)))
            .unwrap();
        let ymap = proj(&ext);
        let y = FOb { total: ext.clone(), map: compose(&b.map, &ymap) };
        let (jcat, dcat, strict) =
            square_strict(m, &base, &bottom, &b, &b, &y, &ymap).unwrap();
        let corrupted = double_initial_corner(&jcat, &dcat, &strict).unwrap();
        assert!(corrupted.validate().is_valid());
        let (frame, _) = square_frame(&jcat, &dcat, &corrupted).unwrap();
        assert!(certify(&frame.diagram).unwrap().is_valid());
        assert!(!is_homotopy_pullback(&frame).unwrap());
    }

    #[test]
    fn square_builder_works_on_the_groupoid_instance() {
        let m = fingpd_model(2, 1).unwrap();
        let base = Ctx::empty();
        // discrete totals keep the replaced square within limit bounds
        let b = FOb::absolute(&set_ctx(2));
        let (bf, _) = frame_of(m, &base, &b, 1).unwrap();
        let bottom = frame_edge(&bf, 0, 0).unwrap();
        let ext = b
            .total
            .extend(Family::constant(&b.total.total().unwrap(), &Gpd::discrete(2)))
            .unwrap();
        let ymap = proj(&ext);
        let y = FOb { total: ext.clone(), map: compose(&b.map, &ymap) };
        let (frame, rep) =
            comm_square_builder(m, &base, &bottom, &b, &b, &y, &ymap).unwrap();
        assert!(rep.is_valid());
        assert!(is_homotopy_pullback(&frame).unwrap());
    }

    #[test]
    fn square_replacement_reports_its_size_bound() {
        // replacing a square whose corners have non-trivial automorphisms
        // inflates the third-degree matching limits past the representable
        // size, and the bound is reported rather than silently truncated
        let m = fingpd_model(2, 1).unwrap();
        let base = Ctx::empty();
        let b = FOb::absolute(&interval_ctx());
        let bottom = FrameEdge {
            mid: b.clone(),
            to_src: CtxMor::identity(&b.total),
            to_tgt: CtxMor::identity(&b.total),
        };
        let idmap = CtxMor::identity(&b.total);
        match comm_square_builder(m, &base, &bottom, &b, &b, &b, &idmap) {
            Err(Error::BoundExceeded(_)) => {}
            other => panic!("expected a size bound, got {other:?}"),
        }
    }

    #[test]
    fn enumeration_transports_along_shape_isomorphisms() {
        let m = finset_model(2, 1).unwrap();
        let base = Ctx::empty();
        let pool = vec![FOb::absolute(&set_ctx(1)), FOb::absolute(&set_ctx(2))];
        let budget = 200_000;

        // the chains of the simplicial interval match the chains of the
        // two-object poset
        let d_sset = crate::simp::d_of_sset(&crate::simp::delta(1, 1));
        let poset = crate::simp::HomotopicalFinCategory::minimal(
            FinCategory::from_preorder(2, |p, q| p <= q),
        );
        let d_cat = crate::simp::d_of_category(&poset, 1).unwrap();
        let (sa, sb) = (d_sset.inverse(), d_cat.inverse());
        assert_eq!(sa.hcat.cat.objects.len(), 5);
        let (om, mm) = marked_iso(&sa, &sb).expect("shapes are isomorphic");
        let ea = enumerate_certified(&sa, m, &base, &pool, budget).unwrap();
        let eb = enumerate_certified(&sb, m, &base, &pool, budget).unwrap();
        assert!(!ea.is_empty());
        assert_eq!(transport_diagrams(&ea, &om, &mm), eb);

        // the boundary of the interval is two disjoint vertices
        let d_bnd = crate::simp::d_of_sset(&crate::simp::boundary(1, 1));
        let two = crate::simp::HomotopicalFinCategory::minimal(FinCategory::discrete(2));
        let d_two = crate::simp::d_of_category(&two, 1).unwrap();
        let (ba, bb) = (d_bnd.inverse(), d_two.inverse());
        assert_eq!(ba.hcat.cat.objects.len(), 4);
        let (om2, mm2) = marked_iso(&ba, &bb).expect("shapes are isomorphic");
        let fa = enumerate_certified(&ba, m, &base, &pool, budget).unwrap();
        let fb = enumerate_certified(&bb, m, &base, &pool, budget).unwrap();
        assert_eq!(transport_diagrams(&fa, &om2, &mm2), fb);

        // diagrams on the boundary are pairs of diagrams on the point
        let point = crate::simp::HomotopicalFinCategory::minimal(FinCategory::terminal());
        let d_pt = crate::simp::d_of_category(&point, 1).unwrap();
        let ep = enumerate_certified(&d_pt.inverse(), m, &base, &pool, budget).unwrap();
        assert_eq!(fa.len(), ep.len() * ep.len());
    }

    #[test]
    fn enumeration_reports_an_exhausted_budget() {
        let m = finset_model(2, 1).unwrap();
        let base = Ctx::empty();
        let pool = vec![FOb::absolute(&set_ctx(2))];
        let point = crate::simp::HomotopicalFinCategory::minimal(FinCategory::terminal());
        let d_pt = crate::simp::d_of_category(&point, 1).unwrap();
        match enumerate_certified(&d_pt.inverse(), m, &base, &pool, 2) {
            Err(Error::BoundExceeded(_)) => {}
            other => panic!("expected a budget error, got {other:?}"),
        }
    }
}
