use cliffield::blade::{make_algebra, Blade, Multivector, Signature};
use cliffield::dynamics::{self, ModelKind, ModelParams, QuadraticModel};
use cliffield::grassmann::{self, expand_components, from_components, GrassmannFunction};
use cliffield::linalg::{self, CMatrix, CVector};
use cliffield::weyl::{poisson, PhasePolynomial, SymplecticForm};
use cliffield::witt::{self, Normalization, VacuumSpec, WittScheme};
use num_complex::Complex64;
use proptest::prelude::*;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn sig_strategy() -> impl Strategy<Value = Signature> {
    (0usize..=3, 0usize..=3).prop_filter("non-empty", |(p, q)| p + q > 0).prop_map(|(p, q)| Signature::new(p, q).unwrap())
}

fn int_mv(sig: Signature) -> impl Strategy<Value = Multivector<i64>> {
    let dim = sig.algebra_dim() as u32;
    prop::collection::vec((0..dim, -5i64..=5), 0..8).prop_map(move |t| Multivector::from_terms(sig, t.into_iter().map(|(b, v)| (Blade(b), v))))
}

fn complex_mv(sig: Signature) -> impl Strategy<Value = Multivector> {
    let dim = sig.algebra_dim();
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), dim)
        .prop_map(move |v| Multivector::from_terms(sig, v.into_iter().enumerate().map(|(b, (re, im))| (Blade(b as u32), Complex64::new(re, im)))))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gp_is_associative((a, b, d) in sig_strategy().prop_flat_map(|s| (int_mv(s), int_mv(s), int_mv(s)))) {
        let left = a.gp(&b).unwrap().gp(&d).unwrap();
        let right = a.gp(&b.gp(&d).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn dagger_reverses_products((a, b) in sig_strategy().prop_flat_map(|s| (complex_mv(s), complex_mv(s)))) {
        let lhs = a.gp(&b).unwrap().dagger();
        let rhs = b.dagger().gp(&a.dagger()).unwrap();
        prop_assert!(lhs.distance(&rhs).unwrap() < 1e-12);
        prop_assert!(a.dagger().dagger().distance(&a).unwrap() == 0.0);
    }

    #[test]
    fn dot_plus_wedge_of_vectors(coeffs in prop::collection::vec(-2.0f64..2.0, 8)) {
        let sig = Signature::new(2, 2).unwrap();
        let ctx = make_algebra(sig).unwrap();
        let vec_of = |w: &[f64]| w.iter().enumerate().fold(Multivector::zero(sig), |acc, (i, &x)| &acc + &ctx.generator::<Complex64>(i + 1).unwrap().scale(c(x)));
        let u = vec_of(&coeffs[..4]);
        let v = vec_of(&coeffs[4..]);
        let sum = &u.dot(&v).unwrap() + &u.wedge(&v).unwrap();
        prop_assert!(sum.distance(&u.gp(&v).unwrap()).unwrap() < 1e-12);
    }

    #[test]
    fn grassmann_round_trip(comps in prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0), 8)) {
        let v: Vec<Complex64> = comps.into_iter().map(|(a, b)| Complex64::new(a, b)).collect();
        let f = from_components(3, &v).unwrap();
        prop_assert_eq!(expand_components(&f), v);
    }

    #[test]
    fn graded_leibniz(fc in prop::collection::vec(-2.0f64..2.0, 6), gc in prop::collection::vec(-2.0f64..2.0, 16), mu in 1usize..=4, grade in 1usize..=2) {
        // f homogeneous of the given grade, g arbitrary
        let n = 4;
        let subsets: Vec<u32> = cliffield::graded_lex_subsets(n).into_iter().filter(|s| s.count_ones() as usize == grade).collect();
        let f = subsets.iter().zip(&fc).fold(GrassmannFunction::zero(n), |acc, (&m, &x)| acc.add(&GrassmannFunction::monomial(n, m, c(x))).unwrap());
        let g = from_components(n, &gc.iter().map(|&x| c(x)).collect::<Vec<_>>()).unwrap();
        let lhs = f.gmul(&g).unwrap().d_left(mu).unwrap();
        let sign = if grade % 2 == 0 { 1.0 } else { -1.0 };
        let rhs = f.d_left(mu).unwrap().gmul(&g).unwrap().add(&f.gmul(&g.d_left(mu).unwrap()).unwrap().scale(c(sign))).unwrap();
        prop_assert!(lhs.sub(&rhs).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn berezin_of_derivative_vanishes(hc in prop::collection::vec(-2.0f64..2.0, 8), mu in 1usize..=3) {
        let h = from_components(3, &hc.iter().map(|&x| c(x)).collect::<Vec<_>>()).unwrap();
        let dh = h.d_left(mu).unwrap();
        prop_assert!(grassmann::berezin(&dh, mu).unwrap().is_zero());
        prop_assert_eq!(grassmann::integrate_all(&dh), c(0.0));
    }

    #[test]
    fn poisson_jacobi(coeffs in prop::collection::vec(-1.0f64..1.0, 45)) {
        let n = 2;
        let form = SymplecticForm::minkowski(n);
        let poly = |w: &[f64]| {
            let mut f = PhasePolynomial::constant(n, c(w[0]));
            let mut k = 1;
            for a in 0..4 {
                let za = PhasePolynomial::var(n, a).unwrap();
                f = f.add(&za.scale(c(w[k]))).unwrap();
                k += 1;
                for b in a..4 {
                    let zb = PhasePolynomial::var(n, b).unwrap();
                    f = f.add(&za.mul(&zb).unwrap().scale(c(w[k]))).unwrap();
                    k += 1;
                }
            }
            f
        };
        let (f, g, h) = (poly(&coeffs[..15]), poly(&coeffs[15..30]), poly(&coeffs[30..]));
        let pb = |x: &PhasePolynomial, y: &PhasePolynomial| poisson(x, y, &form).unwrap();
        let total = pb(&f, &pb(&g, &h)).add(&pb(&g, &pb(&h, &f))).unwrap().add(&pb(&h, &pb(&f, &g))).unwrap();
        prop_assert!(total.distance(&PhasePolynomial::zero(n)).unwrap() < 1e-12);
        prop_assert!(pb(&f, &g).add(&pb(&g, &f)).unwrap().distance(&PhasePolynomial::zero(n)).unwrap() < 1e-12);
    }

    #[test]
    fn pairing_holds_for_random_kernels(entries in prop::collection::vec(-1.0f64..1.0, 16), z in prop::collection::vec(-1.0f64..1.0, 4)) {
        let raw = CMatrix::from_fn(4, 4, |i, j| c(entries[4 * i + j]));
        let k = (&raw + raw.transpose()) * c(0.5);
        let m = QuadraticModel::new("random", ModelKind::Custom, SymplecticForm::minkowski(2), k, ModelParams::default()).unwrap();
        let grid = dynamics::uniform_grid(0.0, 2.0, 8);
        let z0 = CVector::from_iterator(4, z.into_iter().map(c));
        let traj = dynamics::trajectory(&m, &z0, &grid).unwrap();
        let frames = dynamics::frames(&m, &grid).unwrap();
        let scale = traj.states.iter().map(linalg::max_abs_vec).fold(1.0, f64::max);
        prop_assert!(dynamics::pairing_invariant(&traj, &frames).unwrap() < 1e-10 * scale * scale);
        for f in &frames {
            prop_assert!(dynamics::symplecticity_deviation(f, &m.form) < 1e-9 * scale * scale);
        }
    }
}

/// matrix_rep is a homomorphism on every ideal of Cl(2,2) and Cl(1,3).
#[test]
fn matrix_rep_homomorphism_all_ideals() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    for ((p, q), scheme) in [((2, 2), WittScheme::Doubled), ((1, 3), WittScheme::Spacetime)] {
        let sig = Signature::new(p, q).unwrap();
        let ctx = make_algebra(sig).unwrap();
        let wb = witt::witt_basis(&ctx, scheme).unwrap();
        let frame = witt::SpinorFrame::new(&wb, Normalization::Unit).unwrap();
        for ib in &frame.ideals {
            for _ in 0..5 {
                let rand_mv = |rng: &mut rand_chacha::ChaCha8Rng| {
                    Multivector::from_terms(sig, (0..16u32).map(|b| (Blade(b), Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))))
                };
                let x = rand_mv(&mut rng);
                let y = rand_mv(&mut rng);
                let lhs = witt::matrix_rep(&x.gp(&y).unwrap(), ib).unwrap();
                let rhs = witt::matrix_rep(&x, ib).unwrap() * witt::matrix_rep(&y, ib).unwrap();
                assert!(linalg::max_diff(&lhs, &rhs) < 1e-10);
            }
        }
    }
}

/// Floating-point version of the Grassmann equivalence with unit-normalized ideals.
#[test]
fn grassmann_equivalence_unit_normalized() {
    for ((p, q), scheme) in [((2, 2), WittScheme::Doubled), ((1, 3), WittScheme::Spacetime), ((4, 2), WittScheme::Doubled)] {
        let ctx = make_algebra(Signature::new(p, q).unwrap()).unwrap();
        let wb = witt::witt_basis(&ctx, scheme).unwrap();
        let n = wb.n();
        let frame = witt::SpinorFrame::new(&wb, Normalization::Unit).unwrap();
        let eta: Vec<i8> = (1..=n).map(|mu| wb.eta(mu)).collect();
        for ib in &frame.ideals {
            let perm = grassmann::ideal_correspondence(&ib.spec, &eta).unwrap().matrix();
            for mu in 1..=n {
                let pairs = [(wb.theta_upper(mu), grassmann::rep_theta(mu)), (wb.theta_bar(mu).clone(), grassmann::rep_theta_bar(mu))];
                for (x, op) in pairs {
                    let abstract_rep = witt::matrix_rep(&x, ib).unwrap();
                    let grass = op.matrix(n).unwrap();
                    let mapped = perm.transpose() * grass * &perm;
                    assert!(linalg::max_diff(&abstract_rep, &mapped) < 1e-12, "Cl({p},{q}) {} mu={mu}", ib.spec);
                }
            }
        }
    }
}

#[test]
fn vacuum_flags_parse() {
    let v: VacuumSpec = "bu".parse().unwrap();
    assert_eq!(v.unbarred(), vec![2]);
    let w: VacuumSpec = "01".parse().unwrap();
    assert_eq!(v, w);
    assert!("bx".parse::<VacuumSpec>().is_err());
}

#[test]
fn bars_sl2_closure_and_flows() {
    assert!(dynamics::bars_closure_residual(&SymplecticForm::minkowski(4)).unwrap() < 1e-14);
    assert!(dynamics::bars_closure_residual(&SymplecticForm::euclidean(2)).unwrap() < 1e-14);
    let m = dynamics::model_factory(ModelKind::Bars, &ModelParams { n: Some(2), a: Some([[0.0, 0.0], [1.0, 0.0]]), ..Default::default() }).unwrap();
    // A = F: ż = −(A⊗I)z, so x stays fixed and p moves by −x τ
    let z0 = CVector::from_vec(vec![c(1.0), c(2.0), c(0.5), c(-0.5)]);
    let z = dynamics::classical_flow(&m, &z0, 2.0).unwrap();
    let want = CVector::from_vec(vec![c(1.0), c(2.0), c(-1.5), c(-4.5)]);
    assert!(linalg::max_abs_vec(&(z - want)) < 1e-12);
}

#[test]
fn superparticle_dirac_quantization() {
    let m = dynamics::model_factory(ModelKind::Massless, &ModelParams { lambda: Some(1.0), ..Default::default() }).unwrap();
    let dq = dynamics::dirac_quantize(&dynamics::SuperModel::new(m, 0.5, 0.0, 0.0)).unwrap();
    assert_eq!(dq.dim(), 16);
    let null = [1.0, 0.0, 0.0, 1.0];
    assert_eq!(dq.square(&null), 0.0);
    assert_eq!(dq.kernel_dim(&null).unwrap(), 8);
    assert_eq!(dq.kernel_dim_barred(&null).unwrap(), 8);
    assert_eq!(dq.kernel_dim(&[2.0, 0.1, 0.2, 0.3]).unwrap(), 0);
    assert_eq!(dq.kernel_dim(&[0.0; 4]).unwrap(), 16);
    let osc = dynamics::model_factory(ModelKind::Oscillator, &ModelParams { omega: Some(1.0), ..Default::default() }).unwrap();
    assert!(dynamics::dirac_quantize(&dynamics::SuperModel::new(osc, 0.0, 0.0, 0.0)).is_err());
}
