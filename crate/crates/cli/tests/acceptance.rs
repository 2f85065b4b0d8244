//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use lorentzdyn::approx_stability::{
    as_subspace_ellipsoid, as_subspace_graph, as_subspace_kak, brute_force_directions, lorentz_as_check, spas_subspace,
    BruteForceOptions, DirectionClass,
};
use lorentzdyn::catalog;
use lorentzdyn::cocycles::{
    big_lambda_powers, cocycle, entropy_dichotomy, lyapunov_exponent, QuadraticUnit, TorusAutomorphism,
};
use lorentzdyn::io::{matrix_to_rows, to_json_string, SequenceFile};
use lorentzdyn::model_spaces::torus::{is_hyperbolic_exact, DEFAULT_BUDGET};
use lorentzdyn::model_spaces::{
    ads_form, ads_other_family, ads_pair_orbit, ads_plane_family, ads_second_factor_action, first_factor,
    fixed_isotropic_directions, hopf_trace, integer_isometries, mobius, plus_minus_identity_check, second_factor,
    CircleParam, HopfModel, RationalLorentzForm,
};
use lorentzdyn::projective::{
    classify_elementary, hyperbolic_orbit_limit, limit_set, north_south_certificate, CardinalityClass, LimitSetOptions,
};
use lorentzdyn::sampling::projective_grid;
use lorentzdyn::{lorentz_kak, AsOptions, BoundaryPoint, HyperbolicPoint, MatrixSequence, QuadraticForm, Subspace};
use nalgebra::{dmatrix, dvector, DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn e(d: usize, axes: &[usize]) -> Subspace {
    Subspace::coordinate(d, axes)
}

fn origin(d: usize) -> HyperbolicPoint {
    let mut v = DVector::zeros(d);
    v[0] = 1.0;
    HyperbolicPoint::new(&QuadraticForm::minkowski(d), v).unwrap()
}

fn fundamental_example() -> Outcome {
    let seq = catalog::fundamental_sequence(40);
    let opts = AsOptions::default();
    let start = Instant::now();
    let k = as_subspace_kak(&seq, &opts).map_err(|e| e.to_string())?;
    let el = as_subspace_ellipsoid(&seq, &opts).map_err(|e| e.to_string())?;
    let g = as_subspace_graph(&seq, &opts).map_err(|e| e.to_string())?;
    let spas = spas_subspace(&seq, None, &opts).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed().as_secs_f64();
    let exact = e(3, &[0, 1]);
    let worst_exact = [&k, &el, &g].iter().map(|r| r.subspace.distance(&exact)).fold(0.0, f64::max);
    let worst_pair =
        [k.subspace.distance(&el.subspace), k.subspace.distance(&g.subspace), el.subspace.distance(&g.subspace)]
            .into_iter()
            .fold(0.0, f64::max);
    let spas_err = spas.subspace.distance(&e(3, &[0]));
    ensure(
        worst_exact < 1e-5 && worst_pair < 1e-5 && spas_err < 1e-5 && elapsed < 1.0,
        format!(
            "AS to span(e1,e2) {worst_exact:.2e}, pairwise {worst_pair:.2e}, SPAS to span(e1) {spas_err:.2e}, {elapsed:.3} s"
        ),
    )
}

fn jordan_2d() -> Outcome {
    let seq = catalog::shear_sequence(40);
    let r = as_subspace_kak(&seq, &AsOptions::default()).map_err(|e| e.to_string())?;
    let err = r.subspace.distance(&e(2, &[0]));
    ensure(r.subspace.dim() == 1 && err < 1e-6, format!("AS to span(e1) {err:.2e}"))
}

fn chaos_example() -> Outcome {
    let seq = catalog::chaos_sequence(40);
    let opts = AsOptions::default();
    let form = QuadraticForm::chaos_form();
    let r = as_subspace_kak(&seq, &opts).map_err(|e| e.to_string())?;
    let spas = spas_subspace(&seq, Some(&form), &opts).map_err(|e| e.to_string())?;
    let as_err = r.subspace.distance(&e(3, &[0, 1]));
    let e1 = dvector![1.0, 0.0, 0.0];
    let spas_angle = spas.subspace.angle_to(&e1);
    let growth = (seq.terms().last().unwrap() * &e1).norm();
    ensure(
        as_err < 1e-5 && spas_angle < 1e-5 && growth > 1e3,
        format!("AS to span(e1,e2) {as_err:.2e}, angle(e1, SPAS) {spas_angle:.2e}, |A_40 e1| = {growth} (needs > 1e3)"),
    )
}

fn lorentz_hyperplane() -> Outcome {
    let start = Instant::now();
    let opts = AsOptions::default();
    let mut passed = 0;
    let mut spot = 0;
    let mut failures = Vec::new();
    for trial in 0..100u64 {
        let d = if trial % 2 == 0 { 3 } else { 4 };
        let form = QuadraticForm::minkowski(d);
        let seq = catalog::random_divergent_lorentz(d, 24, &mut ChaCha8Rng::seed_from_u64(trial));
        match lorentz_as_check(&form, &seq, &opts) {
            Ok(rep) if rep.passed() => {
                passed += 1;
                if trial < 10 && brute_spot_check(&seq, &rep.approx_stable.subspace, trial) {
                    spot += 1;
                }
            }
            Ok(rep) => failures.push(format!("seed {trial}: {:?}", rep.violations().first().map(|c| c.name))),
            Err(e) => failures.push(format!("seed {trial}: {e}")),
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    ensure(
        passed == 100 && spot == 10 && elapsed < 30.0,
        format!("lorentz check {passed}/100, brute spot agreement {spot}/10, {elapsed:.1} s {failures:?}"),
    )
}

/// Directions inside `AS` score bounded; its Euclidean normal scores
/// unbounded.
fn brute_spot_check(seq: &MatrixSequence, as_space: &Subspace, seed: u64) -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
    let basis = as_space.basis();
    let mut dirs: Vec<DVector<f64>> = (0..3)
        .map(|_| {
            let c = catalog::random_rotation(basis.ncols(), &mut rng).column(0).into_owned();
            basis * c
        })
        .collect();
    let normal = as_space.euclidean_complement().ray().expect("hyperplane");
    dirs.push(normal);
    let rep = match brute_force_directions(seq, &dirs, &BruteForceOptions::default()) {
        Ok(r) => r,
        Err(_) => return false,
    };
    let classes: Vec<DirectionClass> = rep.scores.iter().map(|s| s.class).collect();
    classes.len() == 4
        && classes[..3].iter().all(|c| *c != DirectionClass::Unbounded)
        && classes[3] == DirectionClass::Unbounded
}

fn kak_pattern() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut worst_rec, mut worst_pattern) = (0.0f64, 0.0f64);
    for k in 0..1000 {
        let d = 3 + k % 3;
        let form = QuadraticForm::minkowski(d);
        let a = catalog::random_lorentz(d, 0.0, 5.0, &mut rng);
        let f = lorentz_kak(&form, &a).map_err(|e| format!("element {k}: {e}"))?;
        worst_rec = worst_rec.max((f.reconstruct() - &a).norm() / a.norm());
        let dd = &f.standard.d;
        let lambda = f.lambda;
        let mut pattern = (dd[0] - lambda).abs().max((dd[d - 1] - 1.0 / lambda).abs() * lambda);
        for s in &dd[1..d - 1] {
            pattern = pattern.max((s - 1.0).abs());
        }
        worst_pattern = worst_pattern.max(pattern);
    }
    ensure(
        worst_rec <= 1e-10 && worst_pattern <= 1e-8,
        format!("worst relative reconstruction {worst_rec:.2e}, worst pattern deviation {worst_pattern:.2e}"),
    )
}

fn north_south() -> Outcome {
    let form = QuadraticForm::minkowski(3);
    let seq = catalog::boost_sequence(3, 0.5, 24);
    let (u, v) = (5f64.to_radians(), 5f64.to_radians());
    let cert = north_south_certificate(&form, &seq, u, v, 2000, &AsOptions::default()).map_err(|e| e.to_string())?;
    // exact data of boost(nt): expanding right singular direction (1, 1, 0)
    // and, for the inverse, (1, −1, 0)
    let s = 0.5f64.sqrt();
    let repelling = Subspace::from_vectors(&[dvector![s, -s, 0.0], dvector![0.0, 0.0, 1.0]]).unwrap();
    let attracting = Subspace::from_vectors(&[dvector![s, s, 0.0], dvector![0.0, 0.0, 1.0]]).unwrap();
    let grid = projective_grid(3, 2000);
    let outside: Vec<&DVector<f64>> = grid.iter().filter(|p| repelling.angle_to(p) > u).collect();
    let mut worst = 0.0f64;
    for a in &seq.terms()[cert.position..] {
        for p in &outside {
            worst = worst.max(attracting.angle_to(&(a * *p)));
        }
    }
    ensure(
        worst <= v && grid.len() == 2000,
        format!(
            "N = {}, {} of {} grid points tested, worst angle {:.3} deg",
            cert.index,
            outside.len(),
            grid.len(),
            worst.to_degrees()
        ),
    )
}

fn limit_set_cardinalities() -> Outcome {
    let mink = QuadraticForm::minkowski(3);
    let chaos = QuadraticForm::chaos_form();
    let chaos_base = HyperbolicPoint::normalize(&chaos, &dvector![1.0, 0.0, -1.0]).unwrap();
    let cases: [(&str, &QuadraticForm, Vec<DMatrix<f64>>, HyperbolicPoint, CardinalityClass); 3] = [
        ("hyperbolic cyclic", &mink, vec![catalog::boost(3, 1, 1.5)], origin(3), CardinalityClass::Two),
        ("unipotent cyclic", &chaos, vec![catalog::chaos_unipotent(10.0)], chaos_base, CardinalityClass::One),
        ("Schottky pair", &mink, catalog::schottky_pair(2.2).to_vec(), origin(3), CardinalityClass::Large),
    ];
    let mut details = Vec::new();
    let mut ok = true;
    for (name, form, gens, base, expected) in &cases {
        let mut got = Vec::new();
        for seed in [0u64, 1, 2] {
            let opts = LimitSetOptions { depth: 8, samples: 2000, seed, ..Default::default() };
            match limit_set(form, gens, base, &opts) {
                Ok(est) => {
                    let _ = classify_elementary(&est);
                    got.push(format!("{:?}", est.cardinality_class));
                    ok &= est.cardinality_class == *expected;
                }
                Err(e) => {
                    got.push(e.to_string());
                    ok = false;
                }
            }
        }
        details.push(format!("{name}: {}", got.join("/")));
    }
    ensure(ok, details.join(", "))
}

fn section_independence() -> Outcome {
    let form = QuadraticForm::minkowski(3);
    let seq = catalog::boost_sequence(3, 0.5, 24);
    let opts = AsOptions::default();
    let base = hyperbolic_orbit_limit(&form, &seq, &origin(3), &opts).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let s = HyperbolicPoint::random(&form, 1.5, &mut rng).unwrap();
        let lim = hyperbolic_orbit_limit(&form, &seq, &s, &opts).map_err(|e| e.to_string())?;
        worst = worst.max(base.angle(&lim));
    }
    ensure(worst < 1e-5, format!("worst angle over 10 sections {worst:.2e}"))
}

fn hopf_cocycle() -> Outcome {
    let model = HopfModel::new(0.5, 2.0).unwrap();
    let mut maxima = Vec::new();
    let mut bounded = true;
    for b in [1.0, 0.1, 0.01] {
        let trace = hopf_trace(&model, [1.0, b], 30).map_err(|e| e.to_string())?;
        let sup = trace.iter().map(|s| s.norm).fold(0.0, f64::max);
        // both image coordinates lie in the unit disc, so |rep| ≤ max(1, 1/b)
        bounded &= sup <= f64::max(1.0, 1.0 / b) * (1.0 + 1e-12);
        maxima.push(sup);
    }
    let monotone = maxima.windows(2).all(|w| w[0] < w[1]);
    let zero = hopf_trace(&model, [1.0, 0.0], 30).map_err(|e| e.to_string())?;
    let norms: Vec<f64> = zero.iter().map(|s| s.norm).collect();
    let diverges = norms.windows(2).all(|w| w[1] > w[0]) && norms[30] >= 2f64.powi(30);
    ensure(
        bounded && monotone && diverges,
        format!("max norms {maxima:?} for b = 1, 0.1, 0.01; b = 0 reaches {:.3e} at n = 30", norms[30]),
    )
}

fn enumerate() -> Vec<DMatrix<i64>> {
    integer_isometries(&RationalLorentzForm::minkowski(3), 3, DEFAULT_BUDGET, false).expect("enumeration")
}

fn integer_isometries_closure() -> Outcome {
    let g = RationalLorentzForm::minkowski(3);
    let elems = enumerate();
    let in_set =
        |m: &DMatrix<i64>| elems.binary_search_by(|x| x.transpose().as_slice().cmp(m.transpose().as_slice())).is_ok();
    let mut closed = true;
    for a in &elems {
        for b in &elems {
            let p = a * b;
            if p.iter().all(|x| x.abs() <= 3) && !in_set(&p) {
                closed = false;
            }
        }
        let inv = lorentzdyn::model_spaces::torus::unimodular_inverse(a).expect("unimodular");
        if !in_set(&inv) || a * &inv != DMatrix::identity(3, 3) {
            closed = false;
        }
    }
    let cone = g.integer_cone(3);
    let preserves = elems.iter().all(|a| cone.iter().all(|v| g.q(&(a * v)) == 0));
    let hyperbolic = elems.iter().filter(|a| is_hyperbolic_exact(a).unwrap()).count();
    ensure(
        closed && preserves && hyperbolic > 0,
        format!("{} elements, closed {closed}, cone preserved {preserves}, {hyperbolic} hyperbolic", elems.len()),
    )
}

fn plus_minus_identity() -> Outcome {
    let form = QuadraticForm::minkowski(3);
    let elems: Vec<DMatrix<f64>> = enumerate().iter().map(|a| a.map(|x| x as f64)).collect();
    let mut pool: Vec<BoundaryPoint> = Vec::new();
    for a in &elems {
        let fixed = fixed_isotropic_directions(&form, std::slice::from_ref(a), 1e-9).map_err(|e| e.to_string())?;
        for r in fixed.rays {
            if !pool.iter().any(|p| p.angle(&r) < 1e-8) {
                pool.push(r);
            }
        }
    }
    let (mut triples, mut failures) = (0usize, 0usize);
    for a in &elems {
        let fixed: Vec<&BoundaryPoint> =
            pool.iter().filter(|r| lorentzdyn::subspace::projective_angle(&(a * r.ray()), r.ray()) < 1e-9).collect();
        for i in 0..fixed.len() {
            for j in i + 1..fixed.len() {
                for k in j + 1..fixed.len() {
                    triples += 1;
                    let t = [fixed[i].clone(), fixed[j].clone(), fixed[k].clone()];
                    if !matches!(plus_minus_identity_check(&form, a, &t, 1e-8), Ok(true)) {
                        failures += 1;
                    }
                }
            }
        }
    }
    ensure(
        triples > 0 && failures == 0,
        format!("{} fixed rays, {triples} fixed triples checked, {failures} failures", pool.len()),
    )
}

fn random_sl2(rng: &mut ChaCha8Rng) -> nalgebra::Matrix2<f64> {
    catalog::random_sl2(rng)
}

fn ads_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let params: Vec<CircleParam> = [-3.0, -1.0, -0.25, 0.0, 0.5, 1.0, 7.0]
        .iter()
        .map(|a| CircleParam::Finite(*a))
        .chain([CircleParam::Infinity])
        .collect();
    let mut planes: Vec<_> = params.iter().map(|p| ads_plane_family(*p)).collect();
    for c in [[1.0, 0.0], [0.0, 1.0], [1.0, 2.0], [-3.0, 1.0]] {
        planes.push(ads_other_family(c).map_err(|e| e.to_string())?);
    }
    let isotropic = planes.iter().all(|p| p.isotropy_defect() < 1e-10);

    let mut fixed_worst = 0.0f64;
    for _ in 0..50 {
        let g = first_factor(&random_sl2(&mut rng));
        for p in &params {
            let plane = ads_plane_family(*p);
            let image = plane.transform(&g).map_err(|e| e.to_string())?;
            fixed_worst = fixed_worst.max(image.subspace().distance(plane.subspace()));
        }
    }

    let pairs = [
        (ads_plane_family(CircleParam::Finite(0.0)), ads_plane_family(CircleParam::Finite(0.0))),
        (ads_plane_family(CircleParam::Finite(0.0)), ads_plane_family(CircleParam::Infinity)),
        (ads_plane_family(CircleParam::Finite(1.0)), ads_other_family([1.0, 2.0]).unwrap()),
    ];
    let mut orbits_constant = true;
    let mut invariants = Vec::new();
    for (p1, p2) in &pairs {
        let before = ads_pair_orbit(p1, p2);
        invariants.push(before);
        for _ in 0..100 {
            let g = first_factor(&random_sl2(&mut rng)) * second_factor(&random_sl2(&mut rng));
            if ads_form().isometry_residual(&g).unwrap() > 1e-9 * g.norm_squared() {
                orbits_constant = false;
            }
            let after = ads_pair_orbit(&p1.transform(&g).unwrap(), &p2.transform(&g).unwrap());
            orbits_constant &= after == before;
        }
    }
    let distinct = invariants.iter().collect::<std::collections::BTreeSet<_>>().len() == 3;

    let (mut mobius_worst, mut compose_worst) = (0.0f64, 0.0f64);
    for _ in 0..100 {
        let (h, k) = (random_sl2(&mut rng), random_sl2(&mut rng));
        for p in &params {
            let direct = ads_second_factor_action(&h, *p).map_err(|e| e.to_string())?;
            mobius_worst = mobius_worst.max(direct.distance(&mobius(&h, *p)));
            let composed = ads_second_factor_action(&(h * k), *p).map_err(|e| e.to_string())?;
            let stepwise = ads_second_factor_action(&h, ads_second_factor_action(&k, *p).unwrap()).unwrap();
            compose_worst = compose_worst.max(composed.distance(&stepwise));
        }
    }
    ensure(
        isotropic && fixed_worst < 1e-10 && orbits_constant && distinct && mobius_worst < 1e-8 && compose_worst < 1e-8,
        format!(
            "isotropic {isotropic}, diagonal fixes {fixed_worst:.1e}, pair invariants {invariants:?} constant {orbits_constant}, mobius {mobius_worst:.1e}, composition {compose_worst:.1e}"
        ),
    )
}

fn cocycle_entropy() -> Outcome {
    let g = RationalLorentzForm::minkowski(3);
    let mut hyperbolic: Vec<TorusAutomorphism> = enumerate()
        .into_iter()
        .filter_map(|a| TorusAutomorphism::new(g.clone(), a).ok())
        .filter(|aut| aut.is_hyperbolic())
        .collect();
    hyperbolic.sort_by(|a, b| a.expansion().unwrap().total_cmp(&b.expansion().unwrap()));
    let aut = hyperbolic.first().ok_or("no hyperbolic element enumerated")?;
    let mu = aut.expansion().map_err(|e| e.to_string())?;
    let mut exact_ok = true;
    let mut s = 0;
    for n in -20i64..=20 {
        for m in -20i64..=20 {
            let (a, b, c) = (cocycle(aut, n), cocycle(aut, m), cocycle(aut, n + m));
            let (Ok(a), Ok(b), Ok(c)) = (a, b, c) else {
                exact_ok = false;
                continue;
            };
            match (a.exact, b.exact, c.exact) {
                (Some(ea), Some(eb), Some(ec)) => {
                    s = ea.0.s;
                    exact_ok &= ea.0.checked_mul(&eb.0) == Some(ec.0) && ea.1.checked_mul(&eb.1) == Some(ec.1);
                    exact_ok &= ea.0.checked_mul(&ea.1) == Some(QuadraticUnit::one(s));
                }
                _ => exact_ok = false,
            }
        }
    }
    let l1 = lyapunov_exponent(aut, 1).map_err(|e| e.to_string())?;
    let l2 = lyapunov_exponent(aut, 2).map_err(|e| e.to_string())?;
    let lyap_ok = (l1 + mu.ln()).abs() < 1e-9 && (l2 - mu.ln()).abs() < 1e-9;

    let exps: Vec<i64> = (-8..=8).collect();
    let lam = big_lambda_powers(aut, &exps, 1.0).map_err(|e| e.to_string())?;
    let at = |n: i64| lam[(n + 8) as usize];
    let mut additivity = 0.0f64;
    for n in -4i64..=4 {
        for m in -4i64..=4 {
            additivity = additivity.max((at(n + m) - at(n) - at(m)).abs());
        }
    }

    let opts = AsOptions::default();
    let hyp = entropy_dichotomy(aut, &opts).map_err(|e| e.to_string())?;
    let swap = TorusAutomorphism::new(g.clone(), dmatrix![-1i64, 0, 0; 0, 0, 1; 0, 1, 0]).unwrap();
    let fin = entropy_dichotomy(&swap, &opts).map_err(|e| e.to_string())?;
    let split = RationalLorentzForm::from_rows(&[vec![0, 0, -1], vec![0, 1, 0], vec![-1, 0, 0]]).unwrap();
    let uni = TorusAutomorphism::new(split, dmatrix![1i64, 2, 2; 0, 1, 2; 0, 0, 1]).unwrap();
    let par = entropy_dichotomy(&uni, &opts).map_err(|e| e.to_string())?;
    let dichotomy_ok = (hyp.entropy - mu.ln()).abs() < 1e-12
        && !hyp.as_equal
        && fin.entropy == 0.0
        && fin.as_equal
        && par.entropy.abs() < 1e-12
        && par.as_equal;
    ensure(
        exact_ok && lyap_ok && additivity < 1e-9 && dichotomy_ok,
        format!(
            "mu = {mu:.6} (Z[rho], s = {s}), cocycle identity exact {exact_ok}, exponents ({l1:.12}, {l2:.12}), \
             Lambda additivity {additivity:.1e}, dichotomy ({:.6}, {}) / ({}, {}) / ({}, {})",
            hyp.entropy, hyp.as_equal, fin.entropy, fin.as_equal, par.entropy, par.as_equal
        ),
    )
}

fn json<T: serde::Serialize>(value: &T) -> String {
    to_json_string(value).unwrap()
}

fn write(dir: &Path, name: &str, text: String) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn cli_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let d = dir.path();
    let fundamental_a = write(d, "a.json", json(&matrix_to_rows(&catalog::jordan_power(3, 1.0))));
    let identity = write(d, "id.json", json(&matrix_to_rows(&DMatrix::identity(3, 3))));
    let fundamental = write(d, "fund.json", json(&SequenceFile::from_sequence(&catalog::fundamental_sequence(40))));
    let chaos = write(d, "chaos.json", json(&SequenceFile::from_sequence(&catalog::chaos_sequence(40))));
    let chaos_form = write(d, "chaos_form.json", json(&matrix_to_rows(QuadraticForm::chaos_form().gram())));
    let boost = write(d, "boost.json", json(&vec![matrix_to_rows(&catalog::boost(3, 1, 1.5))]));
    let unipotent = write(d, "unip.json", json(&vec![matrix_to_rows(&catalog::chaos_unipotent(10.0))]));
    let schottky =
        write(d, "schottky.json", json(&catalog::schottky_pair(2.2).iter().map(matrix_to_rows).collect::<Vec<_>>()));
    let gram = write(d, "g.json", "[[-1,0,0],[0,1,0],[0,0,1]]\n".into());
    let known = write(d, "known.json", "[[3,2,2],[2,1,2],[2,2,1]]\n".into());
    let p = |x: &PathBuf| x.to_str().unwrap().to_string();
    let invocations: Vec<Vec<String>> = vec![
        vec!["kak".into(), p(&fundamental_a)],
        vec!["kak".into(), p(&identity)],
        vec!["as".into(), p(&fundamental), "--oracle".into(), "all".into()],
        vec!["as".into(), p(&chaos), "--form".into(), p(&chaos_form)],
        vec!["limit-set".into(), p(&boost), "--seed".into(), "3".into()],
        vec!["limit-set".into(), p(&unipotent), "--form".into(), p(&chaos_form), "--seed".into(), "3".into()],
        vec!["limit-set".into(), p(&schottky), "--seed".into(), "3".into()],
        vec!["model".into(), "torus-isoms".into(), "--gram".into(), p(&gram), "--height".into(), "3".into()],
        vec!["model".into(), "torus-fixed".into(), "--gram".into(), p(&gram), "--matrix".into(), p(&known)],
        vec![
            "model".into(),
            "hopf".into(),
            "--alpha".into(),
            "0.5".into(),
            "--lambda".into(),
            "2".into(),
            "--point".into(),
            "1,0.1".into(),
            "--n".into(),
            "30".into(),
        ],
        vec!["model".into(), "ads-orbit".into(), "--first".into(), "alpha:1".into(), "--second".into(), "c:1,2".into()],
        vec!["model".into(), "ads-circle".into(), "--h".into(), "0,-1;1,0".into(), "--alpha".into(), "0".into()],
    ];
    let mut identical = 0;
    let mut problems = Vec::new();
    for args in &invocations {
        let run = || Command::new(env!("CARGO_BIN_EXE_lorentzdyn")).args(args).output().unwrap();
        let (a, b) = (run(), run());
        if a.stdout == b.stdout && !a.stdout.is_empty() && a.status.success() == b.status.success() {
            identical += 1;
        } else {
            problems.push(args[..2].join(" "));
        }
    }
    ensure(
        identical == invocations.len(),
        format!("{identical}/{} invocations byte-identical {problems:?}", invocations.len()),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 14] = [
        ("fundamental example", fundamental_example),
        ("2D Jordan case", jordan_2d),
        ("Chaos example", chaos_example),
        ("Lorentz hyperplane property", lorentz_hyperplane),
        ("KAK pattern", kak_pattern),
        ("north-south certificate", north_south),
        ("limit-set cardinalities", limit_set_cardinalities),
        ("section independence", section_independence),
        ("Hopf cocycle", hopf_cocycle),
        ("integer isometries", integer_isometries_closure),
        ("plus/minus identity", plus_minus_identity),
        ("AdS suite", ads_suite),
        ("cocycle and entropy", cocycle_entropy),
        ("CLI determinism", cli_determinism),
    ];
    let mut failed = Vec::new();
    for (k, (name, run)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or(p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default())
        });
        let (tag, detail) = match &outcome {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        println!("criterion {:2} {tag}  {name}: {detail}", k + 1);
        if outcome.is_err() {
            failed.push(k + 1);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all 14 criteria pass");
    } else {
        println!("acceptance: failing criteria {failed:?}");
        std::process::exit(1);
    }
}
