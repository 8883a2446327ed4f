//! Law checks shared by the property-test suite and the acceptance
//! harness. Each function runs one randomized case for one documented
//! invariant and panics on violation.

#![allow(dead_code)]

use coupled_lowrank::cmf::{
    cmf_basic, cmf_objective, cmf_randomized, cmf_rbki, cmf_rsi, cmf_with_plan, relative_errors,
};
use coupled_lowrank::cmtf::{
    cmtf_cp_als, cmtf_tucker, cp_objective, tucker_objective, AlsOptions,
};
use coupled_lowrank::facerec::{classify_cmf, evaluate, synthetic_gallery, RecognitionMode};
use coupled_lowrank::matrix::{hcat, khatri_rao, Matrix};
use coupled_lowrank::sketch::{
    gaussian, joint_basis, rbki_basis, rsi_basis, seeded_rng, simple_basis, thin_qr, SketchPlan,
};
use coupled_lowrank::tensor::{
    cp_reconstruct, fold1, mode_product, unfold1, unfold2, unfold3, Tensor3,
};
use coupled_lowrank::testgen::{self, Instance, InstanceSpec};

use rand::Rng;

type Law = (&'static str, fn(u64));

/// Independent tail-energy oracle: eigenvalues of the Gram matrix
/// `[X Y]ᵀ[X Y]` via the symmetric eigensolver, a different factorization
/// path from the SVD the implementation uses.
pub fn gram_tail_energy(x: &Matrix, y: &Matrix, k: usize) -> f64 {
    let concat = hcat(x, y).unwrap();
    let gram = concat.tr_mul(&concat);
    let mut eig: Vec<f64> = gram.symmetric_eigen().eigenvalues.iter().copied().collect();
    eig.sort_by(|a, b| b.partial_cmp(a).unwrap());
    eig.iter().skip(k).map(|&l| l.max(0.0)).sum()
}

fn dims_from(rng: &mut impl Rng, lo: usize, hi: usize) -> usize {
    rng.random_range(lo..=hi)
}

fn random_tensor(rng: &mut impl Rng, max_dim: usize) -> Tensor3 {
    let d = (
        dims_from(rng, 1, max_dim),
        dims_from(rng, 1, max_dim),
        dims_from(rng, 1, max_dim),
    );
    let mut vals = Vec::new();
    for _ in 0..d.0 * d.1 * d.2 {
        vals.push(rng.random_range(-3.0..3.0));
    }
    Tensor3::new(d, vals).unwrap()
}

// ---- tensor_core laws ----

pub fn law_fold_unfold_roundtrip(seed: u64) {
    let mut rng = seeded_rng(seed);
    let t = random_tensor(&mut rng, 6);
    let back = fold1(&unfold1(&t), t.dims()).unwrap();
    assert_eq!(back, t, "fold1(unfold1(t)) differs");
}

pub fn law_mode_product_matricization(seed: u64) {
    let mut rng = seeded_rng(seed);
    let t = random_tensor(&mut rng, 5);
    let (n1, n2, n3) = t.dims();
    for (mode, dim) in [(1usize, n1), (2, n2), (3, n3)] {
        let rows = dims_from(&mut rng, 1, 4);
        let m = gaussian(rows, dim, &mut rng).unwrap();
        let prod = mode_product(&t, &m, mode).unwrap();
        let lhs = match mode {
            1 => unfold1(&prod),
            2 => unfold2(&prod),
            _ => unfold3(&prod),
        };
        let rhs = &m * match mode {
            1 => unfold1(&t),
            2 => unfold2(&t),
            _ => unfold3(&t),
        };
        assert_eq!(lhs, rhs, "mode-{mode} matricization law broke");
    }
}

pub fn law_mode_commutation(seed: u64) {
    let mut rng = seeded_rng(seed);
    let t = random_tensor(&mut rng, 5);
    let (_, n2, n3) = t.dims();
    let a = gaussian(dims_from(&mut rng, 1, 4), n2, &mut rng).unwrap();
    let b = gaussian(dims_from(&mut rng, 1, 4), n3, &mut rng).unwrap();
    let ab = mode_product(&mode_product(&t, &a, 2).unwrap(), &b, 3).unwrap();
    let ba = mode_product(&mode_product(&t, &b, 3).unwrap(), &a, 2).unwrap();
    let max_diff = ab
        .data()
        .iter()
        .zip(ba.data())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    assert!(
        max_diff <= 1e-13 * ab.norm().max(1.0),
        "commutation violated: {max_diff}"
    );
}

pub fn law_cpmat_identities(seed: u64) {
    let mut rng = seeded_rng(seed);
    let (n1, n2, n3) = (
        dims_from(&mut rng, 2, 6),
        dims_from(&mut rng, 2, 6),
        dims_from(&mut rng, 2, 6),
    );
    let a = gaussian(n1, 3, &mut rng).unwrap();
    let b = gaussian(n2, 3, &mut rng).unwrap();
    let c = gaussian(n3, 3, &mut rng).unwrap();
    let t = cp_reconstruct(&a, &b, &c).unwrap();
    let checks = [
        (unfold1(&t), &a * khatri_rao(&c, &b).unwrap().transpose()),
        (unfold2(&t), &b * khatri_rao(&c, &a).unwrap().transpose()),
        (unfold3(&t), &c * khatri_rao(&b, &a).unwrap().transpose()),
    ];
    for (idx, (got, want)) in checks.iter().enumerate() {
        let rel = (got - want).norm() / want.norm().max(1e-300);
        assert!(rel <= 1e-12, "CP matricization identity {idx} off by {rel}");
    }
}

// ---- sketching laws ----

fn orth_err(q: &Matrix) -> f64 {
    (q.tr_mul(q) - Matrix::identity(q.ncols(), q.ncols())).norm()
}

pub fn law_basis_orthonormal(seed: u64) {
    let mut rng = seeded_rng(seed);
    let m = dims_from(&mut rng, 10, 24);
    let n = dims_from(&mut rng, 6, 12);
    let x = gaussian(m, n, &mut rng).unwrap();
    let k = dims_from(&mut rng, 1, 4);
    let q1 = simple_basis(&x, k, &mut rng).unwrap();
    let q2 = rsi_basis(&x, k, 2, &mut rng).unwrap();
    let q3 = rbki_basis(&x, 1.max(k / 2), 2, &mut rng).unwrap();
    for (name, q) in [("simple", &q1), ("rsi", &q2), ("rbki", &q3)] {
        assert!(orth_err(q) <= 1e-10, "{name} basis lost orthonormality");
    }
    let jb = joint_basis(&q1, &q2, 1e-10).unwrap();
    assert!(orth_err(&jb.q) <= 1e-10, "joint basis lost orthonormality");
    assert!(jb.effective_cols <= q1.ncols() + q2.ncols());
}

pub fn law_joint_basis_symmetry(seed: u64) {
    let mut rng = seeded_rng(seed);
    let m = dims_from(&mut rng, 10, 20);
    let (q1, _) = thin_qr(&gaussian(m, dims_from(&mut rng, 2, 5), &mut rng).unwrap()).unwrap();
    let (q2, _) = thin_qr(&gaussian(m, dims_from(&mut rng, 2, 5), &mut rng).unwrap()).unwrap();
    let a = joint_basis(&q1, &q2, 1e-10).unwrap();
    let b = joint_basis(&q2, &q1, 1e-10).unwrap();
    let pa = &a.q * a.q.transpose();
    let pb = &b.q * b.q.transpose();
    assert!((pa - pb).norm() <= 1e-8, "joint projections disagree");
}

pub fn law_sketch_determinism(seed: u64) {
    let mut rng = seeded_rng(seed);
    let x = gaussian(15, 8, &mut rng).unwrap();
    let a = rbki_basis(&x, 2, 3, &mut seeded_rng(seed ^ 0x5ca1ab1e)).unwrap();
    let b = rbki_basis(&x, 2, 3, &mut seeded_rng(seed ^ 0x5ca1ab1e)).unwrap();
    assert_eq!(a, b, "rbki bases differ across identical streams");
    let c = rsi_basis(&x, 3, 2, &mut seeded_rng(seed)).unwrap();
    let d = rsi_basis(&x, 3, 2, &mut seeded_rng(seed)).unwrap();
    assert_eq!(c, d, "rsi bases differ across identical streams");
}

pub fn law_capture_exact_rank(seed: u64) {
    let mut rng = seeded_rng(seed);
    let m = dims_from(&mut rng, 12, 24);
    let n = dims_from(&mut rng, 8, 16);
    let k = dims_from(&mut rng, 1, 4);
    let x = gaussian(m, k, &mut rng).unwrap() * gaussian(k, n, &mut rng).unwrap();
    let bases = [
        simple_basis(&x, k, &mut rng).unwrap(),
        rsi_basis(&x, k, 2, &mut rng).unwrap(),
        rbki_basis(&x, k, 2, &mut rng).unwrap(),
    ];
    for (name, q) in ["simple", "rsi", "rbki"].iter().zip(&bases) {
        let resid = (&x - q * q.tr_mul(&x)).norm();
        assert!(
            resid <= 1e-9 * x.norm(),
            "{name} failed to capture an exact rank-{k} matrix: {resid}"
        );
    }
}

// ---- cmf laws ----

fn random_pair(rng: &mut impl Rng, m_max: usize) -> (Matrix, Matrix, usize) {
    let m = dims_from(rng, 10, m_max);
    let n1 = dims_from(rng, 6, 12);
    let n2 = dims_from(rng, 6, 12);
    let k = dims_from(rng, 1, n1.min(n2) - 1).min(4);
    let x = gaussian(m, n1, rng).unwrap();
    let y = gaussian(m, n2, rng).unwrap();
    (x, y, k)
}

pub fn law_cmf_optimality_oracle(seed: u64) {
    let mut rng = seeded_rng(seed);
    let (x, y, k) = random_pair(&mut rng, 40);
    let r = cmf_basic(&x, &y, k).unwrap();
    let obj = cmf_objective(&x, &y, &r).unwrap();
    let tail = gram_tail_energy(&x, &y, k);
    assert!(
        (obj - tail).abs() <= 1e-10 * tail.max(1e-12),
        "objective {obj} != tail energy {tail}"
    );
}

pub fn law_cmf_dominance(seed: u64) {
    let mut rng = seeded_rng(seed);
    let (x, y, k) = random_pair(&mut rng, 30);
    let basic = cmf_objective(&x, &y, &cmf_basic(&x, &y, k).unwrap()).unwrap();
    for plan in [
        SketchPlan::simple(k, seed),
        SketchPlan::rsi(k, 2, seed),
        SketchPlan::rbki(k, 1.max(k / 2 + 1), 2, seed),
    ] {
        let obj = cmf_objective(&x, &y, &cmf_with_plan(&x, &y, &plan).unwrap()).unwrap();
        assert!(
            basic <= obj + 1e-10,
            "{:?}: basic {basic} above randomized {obj}",
            plan.strategy
        );
    }
}

pub fn law_cmf_lift_consistency(seed: u64) {
    let mut rng = seeded_rng(seed);
    let (x, y, k) = random_pair(&mut rng, 25);
    for plan in [
        SketchPlan::simple(k, seed ^ 1),
        SketchPlan::rsi(k, 2, seed ^ 2),
        SketchPlan::rbki(k, k, 2, seed ^ 3),
    ] {
        let r = cmf_with_plan(&x, &y, &plan).unwrap();
        let gram = r.u.tr_mul(&r.u);
        assert!(
            (gram - Matrix::identity(k, k)).norm() <= 1e-10,
            "{:?}: lifted factor not orthonormal",
            plan.strategy
        );
    }
}

pub fn law_cmf_determinism(seed: u64) {
    let mut rng = seeded_rng(seed);
    let (x, y, k) = random_pair(&mut rng, 20);
    let plan = SketchPlan::rsi(k, 2, seed);
    let a = cmf_rsi(&x, &y, &plan).unwrap();
    let b = cmf_rsi(&x, &y, &plan).unwrap();
    assert_eq!(a.u, b.u);
    assert_eq!(a.v, b.v);
    assert_eq!(a.w, b.w);
}

pub fn law_cmf_objective_error_identity(seed: u64) {
    let mut rng = seeded_rng(seed);
    let (x, y, k) = random_pair(&mut rng, 25);
    let r = cmf_randomized(&x, &y, &SketchPlan::simple(k, seed)).unwrap();
    let obj = cmf_objective(&x, &y, &r).unwrap();
    let (ex, ey) = relative_errors(&x, &y, &r).unwrap();
    let recon = ex * ex * x.norm_squared() + ey * ey * y.norm_squared();
    assert!(
        (obj - recon).abs() <= 1e-10 * obj.max(1.0),
        "objective {obj} vs error identity {recon}"
    );
}

// ---- cmtf laws ----

fn random_coupled_tensor(rng: &mut impl Rng) -> (Tensor3, Matrix, usize) {
    let m = dims_from(rng, 8, 14);
    let n2 = dims_from(rng, 5, 8);
    let n3 = dims_from(rng, 4, 7);
    let n = dims_from(rng, 5, 9);
    let k = dims_from(rng, 1, 3).min(n2.min(n3).min(n) - 1).max(1);
    let t = random_tensor_dims(rng, (m, n2, n3));
    let mut y = Matrix::zeros(m, n);
    for v in y.iter_mut() {
        *v = rng.random_range(-2.0..2.0);
    }
    (t, y, k)
}

fn random_tensor_dims(rng: &mut impl Rng, dims: (usize, usize, usize)) -> Tensor3 {
    let mut vals = Vec::with_capacity(dims.0 * dims.1 * dims.2);
    for _ in 0..dims.0 * dims.1 * dims.2 {
        vals.push(rng.random_range(-2.0..2.0));
    }
    Tensor3::new(dims, vals).unwrap()
}

pub fn law_cmtf_reduction_identity(seed: u64) {
    let mut rng = seeded_rng(seed);
    let (t, y, k) = random_coupled_tensor(&mut rng);
    let plan = SketchPlan::basic(k);
    let r = cmtf_tucker(&t, &y, &plan).unwrap();
    let obj_t = tucker_objective(&t, &y, &r).unwrap();
    let x1 = unfold1(&t);
    let rc = cmf_with_plan(&x1, &y, &plan).unwrap();
    let obj_m = cmf_objective(&x1, &y, &rc).unwrap();
    assert_eq!(obj_t, obj_m, "reduction identity broke");
}

pub fn law_cmtf_global_optimality(seed: u64) {
    let mut rng = seeded_rng(seed);
    let (t, y, k) = random_coupled_tensor(&mut rng);
    let ft = tucker_objective(&t, &y, &cmtf_tucker(&t, &y, &SketchPlan::basic(k)).unwrap()).unwrap();
    let als = cmtf_cp_als(&t, &y, k, seed, &AlsOptions::default()).unwrap();
    let fa = cp_objective(&t, &y, &als).unwrap();
    assert!(ft <= fa + 1e-10, "tucker {ft} above ALS {fa}");
}

pub fn law_als_descent(seed: u64) {
    let mut rng = seeded_rng(seed);
    let (t, y, k) = random_coupled_tensor(&mut rng);
    let als = cmtf_cp_als(&t, &y, k, seed.wrapping_mul(31), &AlsOptions::default()).unwrap();
    for pair in als.objective_trace.windows(2) {
        assert!(pair[1] <= pair[0] + 1e-12, "trace increased: {pair:?}");
    }
}

pub fn law_als_objective_consistency(seed: u64) {
    let mut rng = seeded_rng(seed);
    let (t, y, k) = random_coupled_tensor(&mut rng);
    let als = cmtf_cp_als(&t, &y, k, seed, &AlsOptions { max_iters: 8, rel_tol: 1e-9 }).unwrap();
    let matricized = cp_objective(&t, &y, &als).unwrap();
    let recon = cp_reconstruct(&als.u, &als.b, &als.c).unwrap();
    let tensor_form: f64 = t
        .data()
        .iter()
        .zip(recon.data())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        + (&y - &als.u * als.w.transpose()).norm_squared();
    assert!(
        (matricized - tensor_form).abs() <= 1e-12 * tensor_form.max(1.0),
        "{matricized} vs {tensor_form}"
    );
}

// ---- testgen laws ----

pub fn law_testgen_determinism(seed: u64) {
    let spec = match seed % 7 {
        0 => InstanceSpec::Synthetic1 { m: 14, n1: 8, n2: 9, r1: 3, r2: 4, seed },
        1 => InstanceSpec::Synthetic2 { n: 12, r: 2, d: 2.0, c: 4, seed },
        2 => InstanceSpec::Synthetic3 { m: 14, n: 10, r: 3, seed },
        3 => InstanceSpec::Synthetic4 { m: 14, n1: 6, n2: 8, r2: 3, seed },
        4 => InstanceSpec::Synthetic5 { m: 14, n1: 8, n2: 7, shared: 3, seed },
        5 => InstanceSpec::TensorTest { n: 10, r: 2, d: 2.0, r1: 2, r2: 4, r3: 3, seed },
        _ => InstanceSpec::PlantedCp { m: 10, n2: 6, n3: 5, n: 7, r: 2, seed },
    };
    let a = spec.generate().unwrap();
    let b = spec.generate().unwrap();
    match (a, b) {
        (Instance::MatrixPair(x1, y1), Instance::MatrixPair(x2, y2)) => {
            assert_eq!(x1, x2);
            assert_eq!(y1, y2);
        }
        (Instance::TensorPair(t1, y1), Instance::TensorPair(t2, y2)) => {
            assert_eq!(t1, t2);
            assert_eq!(y1, y2);
        }
        _ => panic!("family changed shape between runs"),
    }
}

pub fn law_testgen_spectra_readback(seed: u64) {
    // spectra and shared-subspace structure stay verifiable post-hoc
    let (x, _) = testgen::synthetic4(16, 6, 8, 3, seed).unwrap();
    let sv = coupled_lowrank::matrix::singular_values(&x);
    for i in 0..6 {
        let expect = 2f64.powi(-(i as i32 + 1));
        assert!(
            (sv.values()[i] - expect).abs() <= 1e-12,
            "synthetic4 sigma_{i} = {}",
            sv.values()[i]
        );
    }
    let (x2, _) = testgen::synthetic2(14, 3, 2.0, 5, seed).unwrap();
    let sv2 = coupled_lowrank::matrix::singular_values(&x2);
    for i in 0..3 {
        assert!((sv2.values()[i] - 1.0).abs() <= 1e-12);
    }
}

// ---- facerec laws ----

pub fn law_facerec_scale_invariance(seed: u64) {
    let (g, queries) = synthetic_gallery(2, 2, (10, 8), 2, 0.1, 1, seed).unwrap();
    let scale = 2.5;
    let images: Vec<Vec<Matrix>> = (0..2)
        .map(|p| (0..2).map(|i| g.image(p * 2 + i) * scale).collect())
        .collect();
    let g2 = coupled_lowrank::facerec::Gallery::new(g.persons().to_vec(), images).unwrap();
    let plan = SketchPlan::basic(2);
    for (_, q) in &queries {
        let a = classify_cmf(&g, q, &plan).unwrap();
        let b = classify_cmf(&g2, &(q * scale), &plan).unwrap();
        assert_eq!(a.predicted_person, b.predicted_person, "scaling changed the prediction");
    }
}

pub fn law_facerec_determinism(seed: u64) {
    let (g, queries) = synthetic_gallery(2, 2, (10, 8), 2, 0.1, 1, seed).unwrap();
    let plan = SketchPlan::simple(2, seed);
    let a = evaluate(&g, &queries, &plan, RecognitionMode::Cmf, &AlsOptions::default()).unwrap();
    let b = evaluate(&g, &queries, &plan, RecognitionMode::Cmf, &AlsOptions::default()).unwrap();
    assert_eq!(a.total_rate, b.total_rate);
    for (ra, rb) in a.rows.iter().zip(&b.rows) {
        assert_eq!(ra.predicted, rb.predicted);
        assert_eq!(ra.errs, rb.errs);
    }
}

pub fn law_facerec_copy_selection(seed: u64) {
    let (g, queries) = synthetic_gallery(2, 2, (10, 8), 2, 0.15, 1, seed).unwrap();
    let (label, query) = &queries[0];
    let target = g.persons().iter().position(|p| p == label).unwrap();
    let images: Vec<Vec<Matrix>> = (0..2)
        .map(|p| {
            (0..2)
                .map(|i| {
                    if p == target && i == 0 {
                        query.clone()
                    } else {
                        g.image(p * 2 + i).clone()
                    }
                })
                .collect()
        })
        .collect();
    let g2 = coupled_lowrank::facerec::Gallery::new(g.persons().to_vec(), images).unwrap();
    let c = classify_cmf(&g2, query, &SketchPlan::basic(2)).unwrap();
    assert_eq!(c.predicted_person, target, "exact copy did not win");
}

/// Every law with its name, for harnesses that iterate the full set.
pub fn all_laws() -> Vec<Law> {
    vec![
        ("fold_unfold_roundtrip", law_fold_unfold_roundtrip),
        ("mode_product_matricization", law_mode_product_matricization),
        ("mode_commutation", law_mode_commutation),
        ("cpmat_identities", law_cpmat_identities),
        ("basis_orthonormal", law_basis_orthonormal),
        ("joint_basis_symmetry", law_joint_basis_symmetry),
        ("sketch_determinism", law_sketch_determinism),
        ("capture_exact_rank", law_capture_exact_rank),
        ("cmf_optimality_oracle", law_cmf_optimality_oracle),
        ("cmf_dominance", law_cmf_dominance),
        ("cmf_lift_consistency", law_cmf_lift_consistency),
        ("cmf_determinism", law_cmf_determinism),
        ("cmf_objective_error_identity", law_cmf_objective_error_identity),
        ("cmtf_reduction_identity", law_cmtf_reduction_identity),
        ("cmtf_global_optimality", law_cmtf_global_optimality),
        ("als_descent", law_als_descent),
        ("als_objective_consistency", law_als_objective_consistency),
        ("testgen_determinism", law_testgen_determinism),
        ("testgen_spectra_readback", law_testgen_spectra_readback),
        ("facerec_scale_invariance", law_facerec_scale_invariance),
        ("facerec_determinism", law_facerec_determinism),
        ("facerec_copy_selection", law_facerec_copy_selection),
    ]
}
