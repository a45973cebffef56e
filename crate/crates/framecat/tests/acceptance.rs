//! End-to-end acceptance checks, one test per criterion. Each test prints a
//! single pass/fail line so the suite reads as a checklist under
//! `cargo test --test acceptance -- --nocapture`.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use framecat::cat::FinCategory;
use framecat::ctx::{compose, pi_ext, pi_single, proj, Ctx, CtxMor, Ext, Family};
use framecat::fib::{
    akl_structure, factorize, fibration_witness, homotopic_via, homotopy_category,
    path_object, pb_along_we_check, right_homotopic, slice_homs, validate_fibcat, FOb,
    FibCat, Marking,
};
use framecat::frames::{
    certify, comm_square_builder, cube_from_edges, double_initial_corner,
    enumerate_certified, frame_edge, frame_of, initiality_extension,
    initiality_extension_n, is_homotopy_pullback, marked_iso, square_frame,
    square_strict, transport_diagrams, unit_1simplex, Adjunction, FrameEdge,
};
use framecat::gpd::{natural_transformations, Gpd};
use framecat::model::{
    fingpd_model, finset_model, search_bi_invertible, validate_contextual,
    ContextualModel,
};
use framecat::simp::{
    boundary, d_of_category, d_of_sset, delta, find_iso, horn, join, sd,
    HomotopicalFinCategory,
};

fn verdict(number: u32, name: &str, ok: bool) {
    println!("criterion {number:02} ({name}): {}", if ok { "pass" } else { "fail" });
    assert!(ok, "criterion {number:02} ({name}) failed");
}

fn set_ctx(n: usize) -> Ctx {
    Ctx::from_gpd(&Gpd::discrete(n))
}

fn contractible(n: usize) -> Ctx {
    Ctx::from_gpd(&Gpd::connected(n, &Gpd::group_trivial()))
}

#[test]
fn criterion_01_axiom_suites() {
    let mut ok = true;
    for m in [finset_model(3, 2).unwrap(), fingpd_model(3, 2).unwrap()] {
        let start = Instant::now();
        let rc = validate_contextual(&m);
        let rf = validate_fibcat(&akl_structure(&m).unwrap());
        ok &= rc.is_valid() && rc.violations.is_empty();
        ok &= rf.is_valid() && rf.violations.is_empty();
        ok &= start.elapsed() <= Duration::from_secs(60);
    }
    verdict(1, "axiom suites", ok);
}

#[test]
fn criterion_02_bi_invertibility_oracle() {
    let mut ok = true;
    for m in [finset_model(3, 1).unwrap(), fingpd_model(2, 1).unwrap()] {
        let ctxs = m.contexts().unwrap();
        let mut total = 0usize;
        for c in &ctxs {
            for d in &ctxs {
                for f in m.enumerate_morphisms(c, d).unwrap() {
                    total += 1;
                    // the oracle is bijectivity on sets and categorical
                    // equivalence on groupoids
                    ok &= search_bi_invertible(&f).unwrap().is_some() == m.weq_oracle(&f);
                }
            }
        }
        ok &= total > 0;
    }
    verdict(2, "bi-invertibility oracle", ok);
}

#[test]
fn criterion_03_combinatorics() {
    let mut ok = true;
    for m in 0..=4usize {
        for n in 0..=(4 - m) {
            let (j, _, _) = join(&delta(m, m + 1), &delta(n, n + 1));
            ok &= find_iso(&j, &delta(m + 1 + n, j.dim)).is_some();
        }
    }
    for n in 1..=3usize {
        let (cone, _, _) = join(&boundary(n, n + 1), &delta(0, 1));
        ok &= find_iso(&cone, &horn(n + 1, n + 1, cone.dim)).is_some();
    }
    let chain3 = HomotopicalFinCategory::minimal(FinCategory::from_preorder(3, |p, q| p <= q));
    ok &= sd(&chain3, 3).unwrap().cat.objects.len() == 7;
    let square = HomotopicalFinCategory::minimal(FinCategory::from_preorder(4, |p, q| {
        (p >> 1) <= (q >> 1) && (p & 1) <= (q & 1)
    }));
    ok &= sd(&square, 3).unwrap().cat.objects.len() == 11;
    let chain2 = HomotopicalFinCategory::minimal(FinCategory::from_preorder(2, |p, q| p <= q));
    ok &= d_of_category(&chain2, 2).unwrap().cat.objects.len() == 9;
    verdict(3, "combinatorics bit-exactness", ok);
}

#[test]
fn criterion_04_representability() {
    let m = finset_model(2, 1).unwrap();
    let base = Ctx::empty();
    let pool = vec![FOb::absolute(&set_ctx(1)), FOb::absolute(&set_ctx(2))];
    let budget = 200_000;
    let mut ok = true;

    // each simplicial shape against its categorical twin
    let pairs = [
        (delta(0, 1), FinCategory::terminal()),
        (delta(1, 1), FinCategory::from_preorder(2, |p, q| p <= q)),
        (boundary(1, 1), FinCategory::discrete(2)),
    ];
    let mut point_count = 0usize;
    let mut boundary_count = 0usize;
    for (k, cat) in pairs {
        let sa = d_of_sset(&k).inverse();
        let sb = d_of_category(&HomotopicalFinCategory::minimal(cat), 1).unwrap().inverse();
        let (om, mm) = match marked_iso(&sa, &sb) {
            Some(iso) => iso,
            None => {
                ok = false;
                continue;
            }
        };
        let ea = enumerate_certified(&sa, m, &base, &pool, budget).unwrap();
        let eb = enumerate_certified(&sb, m, &base, &pool, budget).unwrap();
        ok &= !ea.is_empty();
        ok &= transport_diagrams(&ea, &om, &mm) == eb;
        if k.counts[0] == 1 && k.dim == 1 && k.counts[1] == 1 {
            point_count = ea.len();
        }
        if k.counts[1] == 2 {
            boundary_count = ea.len();
        }
    }
    // maps out of the two-point boundary are pairs of maps out of the point
    ok &= point_count > 0 && boundary_count == point_count * point_count;
    verdict(4, "representability", ok);
}

#[test]
fn criterion_05_adjunction_suite() {
    let m = finset_model(2, 2).unwrap();
    let (wits, rep) = framecat::fib::lcc_check(&m).unwrap();
    let mut ok = rep.is_valid() && rep.checked > 0 && !wits.is_empty();

    // definitional currying as object equality on every enumerated
    // three-level tower over the empty context
    let gamma = Ctx::empty();
    let gt = gamma.total().unwrap();
    let mut towers = 0usize;
    for dfam in m.families_over(&gt).unwrap() {
        let delta = Ext::single(dfam.clone());
        let gd = gamma.extend(dfam).unwrap();
        for theta in m.families_over(&gd.total().unwrap()).unwrap() {
            let gdt = gd.extend(theta.clone()).unwrap();
            for psi in m.families_over(&gdt.total().unwrap()).unwrap() {
                towers += 1;
                let two = Ext { levels: vec![theta.clone(), psi] };
                let piext = pi_ext(&gamma, &delta, &two).unwrap();
                ok &= piext.levels.len() == 2
                    && piext.levels[0] == pi_single(&gamma, &delta, &theta).unwrap();
            }
        }
    }
    ok &= towers >= 20;
    verdict(5, "adjunction suite", ok);
}

fn seeded_set_family_object(m: &ContextualModel, seed: u64) -> FOb {
    let gamma = Ctx::empty();
    let fam = m.seeded_family(&gamma.total().unwrap(), seed).unwrap();
    let ext = gamma.extend(fam).unwrap();
    FOb { total: ext.clone(), map: proj(&ext) }
}

#[test]
fn criterion_06_unit_and_initiality() {
    let mut ok = true;

    // identity adjunction on both instances
    for (m, totals) in [
        (finset_model(2, 1).unwrap(), vec![set_ctx(1), set_ctx(2)]),
        (fingpd_model(2, 1).unwrap(), vec![contractible(2), Ctx::from_gpd(&Gpd::connected(1, &Gpd::group_z2()))]),
    ] {
        let base = Ctx::empty();
        for t in totals {
            let a = FOb::absolute(&t);
            let (af, _) = frame_of(m, &base, &a, 1).unwrap();
            let x = unit_1simplex(&Adjunction::Identity, &af, &base).unwrap();
            ok &= certify(&x.diagram).unwrap().is_valid();
        }
    }

    // dependent-product adjunction on twenty seeded families
    let m = finset_model(2, 2).unwrap();
    let gamma = Ctx::empty();
    for seed in 0..20u64 {
        let dfam = m.seeded_family(&gamma.total().unwrap(), seed).unwrap();
        let adj = Adjunction::PiAlong { gamma: gamma.clone(), delta: Ext::single(dfam) };
        let a = seeded_set_family_object(&m, seed.wrapping_add(31));
        let (af, _) = frame_of(m, &gamma, &a, 1).unwrap();
        let x = unit_1simplex(&adj, &af, &gamma).unwrap();
        ok &= certify(&x.diagram).unwrap().is_valid();
    }

    // triangle and cube extensions out of a common vertex
    let mg = fingpd_model(2, 1).unwrap();
    let base = Ctx::empty();
    let a = FOb::absolute(&contractible(2));
    let (af, _) = frame_of(mg, &base, &a, 1).unwrap();
    let e = frame_edge(&af, 0, 0).unwrap();
    let ext = initiality_extension(&mg, &Adjunction::Identity, &e, &e).unwrap();
    ok &= ext.report.is_valid() && mg.weq_oracle(&ext.f1);

    let ms = finset_model(2, 1).unwrap();
    for edges in 1..=2usize {
        let a = FOb::absolute(&set_ctx(2));
        let (af, _) = frame_of(ms, &base, &a, 1).unwrap();
        let e = frame_edge(&af, 0, 0).unwrap();
        let (cube, vertex) =
            cube_from_edges(ms, &base, &a, &vec![e.clone(); edges]).unwrap();
        let (_, leg, rep) = initiality_extension_n(&ms, &cube, vertex).unwrap();
        ok &= rep.is_valid() && ms.weq_oracle(&leg);
    }
    verdict(6, "unit and initiality", ok);
}

/// Deterministic strict-pullback-of-fibration data over discrete totals: a
/// corner framed through its path object and a product fibration onto it.
fn seeded_square_data(
    m: ContextualModel,
    seed: u64,
) -> (FrameEdge, FOb, FOb, CtxMor) {
    let base = Ctx::empty();
    let b = FOb::absolute(&set_ctx(1 + (seed as usize % 3)));
    let (bf, _) = frame_of(m, &base, &b, 1).unwrap();
    let bottom = frame_edge(&bf, 0, 0).unwrap();
    let fiber = Gpd::discrete(1 + ((seed / 3) as usize % 2));
    let ext = b
        .total
        .extend(Family::constant(&b.total.total().unwrap(), &fiber))
        .unwrap();
    let ymap = proj(&ext);
    let y = FOb { total: ext, map: compose(&b.map, &ymap) };
    (bottom, b, y, ymap)
}

fn detector_on(
    m: ContextualModel,
    data: &(FrameEdge, FOb, FOb, CtxMor),
    corrupt: bool,
) -> bool {
    let base = Ctx::empty();
    let (bottom, b, y, ymap) = data;
    let (jcat, dcat, strict) = square_strict(m, &base, bottom, b, b, y, ymap).unwrap();
    let strict = if corrupt {
        double_initial_corner(&jcat, &dcat, &strict).unwrap()
    } else {
        strict
    };
    let (frame, _) = square_frame(&jcat, &dcat, &strict).unwrap();
    assert!(certify(&frame.diagram).unwrap().is_valid());
    is_homotopy_pullback(&frame).unwrap()
}

/// Replace the fibration leg by the projection of its mapping path space:
/// every object of the square moves by a weak equivalence.
fn perturbed(data: &(FrameEdge, FOb, FOb, CtxMor)) -> (FrameEdge, FOb, FOb, CtxMor) {
    let (bottom, b, _, ymap) = data;
    let fac = factorize(ymap).unwrap();
    let y2 = FOb { total: fac.mid.clone(), map: compose(&b.map, &fac.p) };
    (bottom.clone(), b.clone(), y2, fac.p)
}

#[test]
fn criterion_07_pullback_detector() {
    let m = fingpd_model(2, 1).unwrap();
    let mut ok = true;
    for seed in 0..20u64 {
        let data = seeded_square_data(m, seed);
        ok &= detector_on(m, &data, false);
        ok &= !detector_on(m, &data, true);
        // levelwise weak-equivalence perturbation must not flip the verdict
        let moved = perturbed(&data);
        ok &= detector_on(m, &moved, false);
        ok &= !detector_on(m, &moved, true);
    }
    verdict(7, "homotopy-pullback detector", ok);
}

#[test]
fn criterion_08_square_builder() {
    let mut ok = true;
    for m in [finset_model(2, 1).unwrap(), fingpd_model(2, 1).unwrap()] {
        let base = Ctx::empty();
        for seed in 0..20u64 {
            let (bottom, b, y, ymap) = seeded_square_data(m, seed);
            let (frame, rep) =
                comm_square_builder(m, &base, &bottom, &b, &b, &y, &ymap).unwrap();
            ok &= rep.is_valid();
            ok &= is_homotopy_pullback(&frame).unwrap();
        }
    }
    verdict(8, "commutative-square builder", ok);
}

/// Brute-force count of classes of slice maps under vertical natural
/// isomorphism, independent of the homotopy-category construction.
fn brute_iso_classes(y: &FOb, ms: &[CtxMor]) -> usize {
    let mut reps: Vec<&CtxMor> = Vec::new();
    'outer: for m in ms {
        for r in &reps {
            let dt = m.dom.total().unwrap();
            let ct = y.total.total().unwrap();
            let bt = y.map.cod.total().unwrap();
            let found = natural_transformations(&dt, &ct, &m.fun, &r.fun)
                .into_iter()
                .any(|tau| {
                    tau.iter().all(|&c| {
                        let im = y.map.fun.arr[c];
                        bt.id[bt.src[im]] == im
                    })
                });
            if found {
                continue 'outer;
            }
        }
        reps.push(m);
    }
    reps.len()
}

#[test]
fn criterion_09_homotopy_category() {
    let m = fingpd_model(2, 1).unwrap();
    let objects: Vec<FOb> = [
        set_ctx(1),
        set_ctx(2),
        contractible(2),
        Ctx::from_gpd(&Gpd::connected(1, &Gpd::group_z2())),
    ]
    .iter()
    .map(FOb::absolute)
    .collect();
    let f = FibCat {
        model: m,
        base: Ctx::empty(),
        objects: objects.clone(),
        marking: Marking::Model,
        truncated: false,
    };
    let ho = homotopy_category(&f).unwrap();
    let mut ok = true;
    for i in 0..objects.len() {
        for j in 0..objects.len() {
            let ms = slice_homs(&objects[i], &objects[j]).unwrap();
            ok &= ho.homs[&(i, j)].len() == brute_iso_classes(&objects[j], &ms);
        }
    }

    // base change along seeded acyclic fibrations
    for seed in 0..5u64 {
        let a = contractible(2 + (seed as usize % 2));
        let at = a.total().unwrap();
        let b = set_ctx(1);
        let f = CtxMor {
            dom: a.clone(),
            cod: b.clone(),
            fun: framecat::gpd::GpdFun {
                obj: vec![0; at.n_obj],
                arr: vec![0; at.n_arr()],
            },
        };
        f.validate().unwrap();
        assert!(fibration_witness(&f).unwrap().is_some() && m.weq_oracle(&f));
        let mut xs = Vec::new();
        for k in 0..2u64 {
            let fam = m.seeded_family(&at, seed.wrapping_mul(17).wrapping_add(k)).unwrap();
            let ext = a.extend(fam).unwrap();
            xs.push(FOb { total: ext.clone(), map: proj(&ext) });
        }
        ok &= pb_along_we_check(&m, &f, &xs).unwrap().is_valid();
    }
    verdict(9, "homotopy-category oracle", ok);
}

#[test]
fn criterion_10_right_homotopy() {
    let mut ok = true;
    let x = FOb::absolute(&contractible(2));
    let y = FOb::absolute(&Ctx::from_gpd(&Gpd::connected(1, &Gpd::group_z2())));
    let pairs: Vec<(FOb, FOb)> = vec![
        (x.clone(), x.clone()),
        (x.clone(), y.clone()),
        (y.clone(), y.clone()),
        (FOb::absolute(&set_ctx(2)), FOb::absolute(&set_ctx(2))),
    ];
    for (src, tgt) in &pairs {
        let ms = slice_homs(src, tgt).unwrap();
        let related = |f: &CtxMor, g: &CtxMor| right_homotopic(tgt, f, g).unwrap().is_some();
        for f in &ms {
            ok &= related(f, f);
            for g in &ms {
                ok &= related(f, g) == related(g, f);
                for h in &ms {
                    if related(f, g) && related(g, h) {
                        ok &= related(f, h);
                    }
                }
            }
        }
        // stability under pre- and postcomposition with endomorphisms
        let pre = slice_homs(src, src).unwrap();
        let post = slice_homs(tgt, tgt).unwrap();
        for f in &ms {
            for g in &ms {
                if !related(f, g) {
                    continue;
                }
                for k in pre.iter().take(3) {
                    ok &= related(&compose(f, k), &compose(g, k));
                }
                for h in post.iter().take(3) {
                    ok &= right_homotopic(tgt, &compose(h, f), &compose(h, g))
                        .unwrap()
                        .is_some();
                }
            }
        }
        // the decision is the same through every constructed path object
        let po = path_object(tgt).unwrap();
        let fac = factorize(&po.diag).unwrap();
        for f in ms.iter().take(4) {
            for g in ms.iter().take(4) {
                let pairing = po.pairing(f, g).unwrap();
                let via_mapping_path = homotopic_via(&fac.p, &pairing).unwrap();
                let via_canonical = homotopic_via(&po.q, &pairing).unwrap();
                ok &= related(f, g) == via_mapping_path;
                ok &= via_mapping_path == via_canonical;
            }
        }
    }
    let mut seen_nontrivial = false;
    let ms = slice_homs(&x, &y).unwrap();
    for f in &ms {
        for g in &ms {
            if f != g && right_homotopic(&y, f, g).unwrap().is_some() {
                seen_nontrivial = true;
            }
        }
    }
    ok &= seen_nontrivial;
    verdict(10, "right-homotopy properties", ok);
}

#[test]
fn criterion_07_corruption_is_visible_in_the_strict_square() {
    // auxiliary sanity for the detector: doubling really changes the data
    let m = finset_model(2, 1).unwrap();
    let base = Ctx::empty();
    let (bottom, b, y, ymap) = seeded_square_data(m, 0);
    let (jcat, dcat, strict) = square_strict(m, &base, &bottom, &b, &b, &y, &ymap).unwrap();
    let doubled = double_initial_corner(&jcat, &dcat, &strict).unwrap();
    let changed: BTreeSet<usize> = (0..strict.values.len())
        .filter(|&o| strict.values[o].total != doubled.values[o].total)
        .collect();
    assert!(!changed.is_empty());
}
