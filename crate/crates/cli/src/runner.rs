//! Scenario execution.

use std::collections::BTreeMap;
use std::time::Instant;

use cliffield::blade::{make_algebra, Blade, Multivector, Signature};
use cliffield::dynamics::{self, DiracQuantizer, ModelKind, QuadraticModel, Schedule, SuperModel};
use cliffield::field::{self, FermionAlgebra, FieldModel, Lattice, Sector, VacuumRule};
use cliffield::grassmann::{self, from_components, GrassmannFunction};
use cliffield::linalg::{self, CMatrix, CVector};
use cliffield::weyl::{bracket_correspondence_with, mode_ops, PhasePolynomial, SymplecticForm};
use cliffield::witt::{self, Normalization, VacuumSpec, WittBasis};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::error::{CliError, Result};
use crate::registry::{Invariant, Module, Tolerance, INVARIANTS};
use crate::report::{CheckResult, Report, Status, Timing};
use crate::scenario::{BladeConfig, DynamicsConfig, FieldConfig, GrassmannConfig, Scenario, WeylConfig, WittConfig};

/// Largest random sample count accepted in a scenario.
pub const MAX_SAMPLES: usize = 100_000;
/// Largest τ grid.
pub const MAX_STEPS: usize = 1_000_000;
/// Largest p + q for the ideal-frame based checks (Gram matrix of size 2^{p+q}).
pub const MAX_FRAME_DIM: usize = 8;
/// Largest p + q for random blade products.
pub const MAX_BLADE_DIM: usize = 16;

#[derive(Debug, Clone, Copy)]
pub struct RunOptions {
    pub seed: u64,
    pub tolerance_scale: f64,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { seed: 1, tolerance_scale: 1.0 }
    }
}

/// A finished scenario: deterministic report, artifacts and timing.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: Report,
    /// (file name, contents)
    pub artifacts: Vec<(String, String)>,
    pub timing: Timing,
}

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn invalid(msg: impl Into<String>) -> cliffield::Error {
    cliffield::Error::InvalidParameter(msg.into())
}

fn cap(what: &str, got: usize, max: usize) -> Result<()> {
    if got > max {
        return Err(CliError::ResourceCap(format!("{what} = {got} exceeds {max}")));
    }
    Ok(())
}

/// Independent RNG stream per invariant so results do not depend on check order.
fn rng_for(seed: u64, inv: &Invariant) -> ChaCha8Rng {
    let idx = INVARIANTS.iter().position(|i| i.module == inv.module && i.name == inv.name).unwrap_or(0) as u64;
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(idx);
    r
}

/// What a module runner returns for one check.
struct Measured {
    deviation: f64,
    note: String,
}

fn measured(deviation: f64, note: impl Into<String>) -> Measured {
    Measured { deviation, note: note.into() }
}

struct ModuleOutput {
    results: Vec<(&'static Invariant, Option<f64>, Measured)>,
    data: Value,
    artifacts: Vec<(String, String)>,
}

pub fn run_scenario(sc: &Scenario, opts: &RunOptions) -> Result<Outcome> {
    if !(opts.tolerance_scale > 0.0 && opts.tolerance_scale.is_finite()) {
        return Err(CliError::Usage("--tolerance-scale must be positive".into()));
    }
    let start = Instant::now();
    let checks = sc.resolved_checks();
    let out = match sc.module {
        Module::Blade => run_blade(sc, sc.blade.as_ref().expect("validated"), &checks, opts),
        Module::Witt => run_witt(sc, sc.witt.as_ref().expect("validated"), &checks, opts),
        Module::Grassmann => run_grassmann(sc, sc.grassmann.as_ref().expect("validated"), &checks, opts),
        Module::Weyl => run_weyl(sc, sc.weyl.as_ref().expect("validated"), &checks, opts),
        Module::Dynamics => run_dynamics(sc, sc.dynamics.as_ref().expect("validated"), &checks, opts),
        Module::Field => run_field(sc, sc.field.as_ref().expect("validated"), &checks, opts),
    }?;
    let results: Vec<CheckResult> = out
        .results
        .into_iter()
        .map(|(inv, tol, m)| match inv.tolerance {
            Tolerance::Exact => CheckResult::new(inv.name, m.deviation, 0.0, true, m.note),
            Tolerance::Float(default) => CheckResult::new(inv.name, m.deviation, tol.unwrap_or(default) * opts.tolerance_scale, false, m.note),
        })
        .collect();
    let status = if results.iter().all(|r| r.status == Status::Pass) { Status::Pass } else { Status::Fail };
    let report = Report {
        scenario: sc.name.clone(),
        module: sc.module.name().to_string(),
        topic: sc.topic.clone(),
        seed: opts.seed,
        status,
        checks: results,
        data: out.data,
        artifacts: out.artifacts.iter().map(|(n, _)| n.clone()).collect(),
    };
    Ok(Outcome { report, artifacts: out.artifacts, timing: Timing { scenario: sc.name.clone(), seconds: start.elapsed().as_secs_f64() } })
}

type Checks<'a> = [(&'static Invariant, Option<f64>)];

/// Run each requested check through `f`, collecting kernel errors.
fn measure_all(
    sc: &Scenario,
    checks: &Checks,
    mut f: impl FnMut(&'static Invariant) -> std::result::Result<Measured, CliError>,
) -> Result<Vec<(&'static Invariant, Option<f64>, Measured)>> {
    let mut out = Vec::with_capacity(checks.len());
    for &(inv, tol) in checks {
        let m = f(inv).map_err(|e| match e {
            CliError::Kernel { source, .. } => CliError::Kernel { scenario: format!("{} ({})", sc.name, inv.name), source },
            other => other,
        })?;
        out.push((inv, tol, m));
    }
    Ok(out)
}

// blade

/// Multiply two index words by adjacent swaps and contractions.
pub fn word_product(sig: &Signature, a: &[usize], b: &[usize]) -> (i64, Vec<usize>) {
    let mut w: Vec<usize> = a.iter().chain(b).copied().collect();
    let mut sign = 1i64;
    loop {
        let mut changed = false;
        let mut i = 0;
        while i + 1 < w.len() {
            if w[i] > w[i + 1] {
                w.swap(i, i + 1);
                sign = -sign;
                changed = true;
            } else if w[i] == w[i + 1] {
                sign *= sig.metric(w[i]) as i64;
                w.drain(i..i + 2);
                changed = true;
                continue;
            }
            i += 1;
        }
        if !changed {
            return (sign, w);
        }
    }
}

fn random_int_mv(rng: &mut ChaCha8Rng, sig: Signature, max_terms: usize) -> Multivector<i64> {
    let dim = sig.algebra_dim() as u64;
    let k = rng.gen_range(1..=max_terms.max(1));
    Multivector::from_terms(sig, (0..k).map(|_| (Blade(rng.gen_range(0..dim) as u32), rng.gen_range(-9..=9))))
}

fn random_complex_mv(rng: &mut ChaCha8Rng, sig: Signature, max_terms: usize) -> Multivector {
    let dim = sig.algebra_dim() as u64;
    let k = rng.gen_range(1..=max_terms.max(1));
    Multivector::from_terms(
        sig,
        (0..k).map(|_| (Blade(rng.gen_range(0..dim) as u32), Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))),
    )
}

fn dense_random_mv(rng: &mut ChaCha8Rng, sig: Signature) -> Multivector {
    Multivector::from_terms(
        sig,
        (0..sig.algebra_dim() as u32).map(|b| (Blade(b), Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))),
    )
}

fn run_blade(sc: &Scenario, cfg: &BladeConfig, checks: &Checks, opts: &RunOptions) -> Result<ModuleOutput> {
    cap("pairs", cfg.pairs, MAX_SAMPLES)?;
    let kerr = CliError::kernel(&sc.name);
    let mut sigs = Vec::new();
    for &[p, q] in &cfg.signatures {
        cap("blade dimension p+q", p + q, MAX_BLADE_DIM)?;
        sigs.push(Signature::new(p, q).map_err(&kerr)?);
    }
    if sigs.is_empty() {
        return Err(kerr(invalid("at least one signature is required")));
    }
    let results = measure_all(sc, checks, |inv| {
        let mut rng = rng_for(opts.seed, inv);
        let mut bad = 0usize;
        let mut worst: f64 = 0.0;
        for &sig in &sigs {
            for _ in 0..cfg.pairs {
                match inv.name {
                    "oracle" => {
                        let a = random_int_mv(&mut rng, sig, cfg.max_terms);
                        let b = random_int_mv(&mut rng, sig, cfg.max_terms);
                        let mut oracle: BTreeMap<Vec<usize>, i64> = BTreeMap::new();
                        for (ba, ca) in a.terms() {
                            for (bb, cb) in b.terms() {
                                let (s, w) = word_product(&sig, &ba.indices(), &bb.indices());
                                *oracle.entry(w).or_insert(0) += s * ca * cb;
                            }
                        }
                        oracle.retain(|_, v| *v != 0);
                        let got: BTreeMap<Vec<usize>, i64> =
                            a.gp(&b).map_err(&kerr)?.terms().filter(|(_, v)| *v != 0).map(|(bl, v)| (bl.indices(), v)).collect();
                        bad += usize::from(got != oracle);
                    }
                    "associativity" => {
                        let [a, b, d] = [0; 3].map(|_| random_int_mv(&mut rng, sig, cfg.max_terms));
                        let l = a.gp(&b).and_then(|x| x.gp(&d)).map_err(&kerr)?;
                        let r = b.gp(&d).and_then(|x| a.gp(&x)).map_err(&kerr)?;
                        bad += usize::from(l != r);
                    }
                    "dagger" => {
                        let a = random_complex_mv(&mut rng, sig, cfg.max_terms);
                        let b = random_complex_mv(&mut rng, sig, cfg.max_terms);
                        let lhs = a.gp(&b).map_err(&kerr)?.dagger();
                        let rhs = b.dagger().gp(&a.dagger()).map_err(&kerr)?;
                        worst = worst.max(lhs.distance(&rhs).map_err(&kerr)?);
                    }
                    other => unreachable!("unregistered blade check {other}"),
                }
            }
        }
        let total = sigs.len() * cfg.pairs;
        Ok(match inv.name {
            "dagger" => measured(worst, format!("{total} random pairs")),
            _ => measured(bad as f64, format!("{bad} mismatches in {total} random pairs")),
        })
    })?;
    let data = json!({ "signatures": cfg.signatures, "pairs_per_signature": cfg.pairs });
    Ok(ModuleOutput { results, data, artifacts: Vec::new() })
}

// witt

fn matrix_json(m: &CMatrix) -> Value {
    let rows = |f: fn(&Complex64) -> f64| -> Vec<Vec<f64>> { (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| f(&m[(i, j)])).collect()).collect() };
    json!({ "re": rows(|z| z.re), "im": rows(|z| z.im) })
}

fn subset_indices(s: u32) -> Vec<usize> {
    (0..32).filter(|k| s >> k & 1 == 1).map(|k| k + 1).collect()
}

fn witt_residual(wb: &WittBasis) -> cliffield::Result<f64> {
    let sig = wb.ctx().signature();
    let zero = Multivector::zero(sig);
    let mut worst: f64 = 0.0;
    for mu in 1..=wb.n() {
        for nu in 1..=wb.n() {
            let want = if mu == nu { Multivector::scalar(sig, c(wb.eta(mu) as f64)) } else { zero.clone() };
            worst = worst.max(wb.theta(mu).dot(wb.theta(nu))?.distance(&zero)?);
            worst = worst.max(wb.theta_bar(mu).dot(wb.theta_bar(nu))?.distance(&zero)?);
            worst = worst.max(wb.theta(mu).dot(wb.theta_bar(nu))?.distance(&want)?);
        }
    }
    Ok(worst)
}

fn run_witt(sc: &Scenario, cfg: &WittConfig, checks: &Checks, opts: &RunOptions) -> Result<ModuleOutput> {
    let kerr = CliError::kernel(&sc.name);
    let [p, q] = cfg.signature;
    cap("witt dimension p+q", p + q, MAX_FRAME_DIM)?;
    cap("pairs", cfg.pairs, MAX_SAMPLES)?;
    let sig = Signature::new(p, q).map_err(&kerr)?;
    let ctx = make_algebra(sig).map_err(&kerr)?;
    let wb = witt::witt_basis(&ctx, cfg.scheme).map_err(&kerr)?;
    let n = wb.n();
    let spec: VacuumSpec = match &cfg.vacuum {
        Some(s) => s.parse().map_err(&kerr)?,
        None => VacuumSpec::all_barred(n),
    };
    if spec.n() != n {
        return Err(kerr(cliffield::Error::InvalidVacuum(format!("{} flags given, the Witt basis has n = {n}", spec.n()))));
    }
    let needs_ideal = checks.iter().any(|(i, _)| matches!(i.name, "clifford_relation" | "homomorphism")) || sc.outputs.gammas.is_some();
    let ib = if needs_ideal { Some(witt::ideal_basis_with(&wb, &spec, cfg.normalization).map_err(&kerr)?) } else { None };
    let gammas: Vec<CMatrix> = match &ib {
        Some(ib) => (1..=sig.dim())
            .map(|a| ctx.generator::<Complex64>(a).and_then(|g| witt::matrix_rep(&g, ib)))
            .collect::<cliffield::Result<_>>()
            .map_err(&kerr)?,
        None => Vec::new(),
    };
    let clifford_residual = || {
        let dim = 1usize << n;
        let mut worst: f64 = 0.0;
        for a in 0..gammas.len() {
            for b in 0..gammas.len() {
                let want = if a == b { linalg::identity(dim) * c(2.0 * sig.metric(a + 1) as f64) } else { CMatrix::zeros(dim, dim) };
                worst = worst.max(linalg::max_diff(&linalg::anticommutator(&gammas[a], &gammas[b]), &want));
            }
        }
        worst
    };
    let results = measure_all(sc, checks, |inv| {
        Ok(match inv.name {
            "witt_relations" => measured(witt_residual(&wb).map_err(&kerr)?, format!("3n^2 relations, n = {n}")),
            "ideal_rank" => {
                let iwb = WittBasis::integral(&ctx, cfg.scheme).map_err(&kerr)?;
                let vacua = witt::enumerate_vacua(n);
                let mut shortfall = 0usize;
                for v in &vacua {
                    shortfall += (1usize << n) - witt::ideal_rank_exact(&iwb, std::slice::from_ref(v)).map_err(&kerr)?;
                }
                let total = witt::ideal_rank_exact(&iwb, &vacua).map_err(&kerr)?;
                shortfall += (1usize << (2 * n)) - total;
                measured(shortfall as f64, format!("{} vacua, union rank {total}/{}", vacua.len(), 1usize << (2 * n)))
            }
            "clifford_relation" => measured(clifford_residual(), format!("{} generators on the {spec} ideal", gammas.len())),
            "homomorphism" => {
                let ib = ib.as_ref().expect("built above");
                let mut rng = rng_for(opts.seed, inv);
                let mut worst: f64 = 0.0;
                for _ in 0..cfg.pairs {
                    let x = dense_random_mv(&mut rng, sig);
                    let y = dense_random_mv(&mut rng, sig);
                    let lhs = x.gp(&y).and_then(|xy| witt::matrix_rep(&xy, ib)).map_err(&kerr)?;
                    let rhs = witt::matrix_rep(&x, ib).map_err(&kerr)? * witt::matrix_rep(&y, ib).map_err(&kerr)?;
                    worst = worst.max(linalg::max_diff(&lhs, &rhs));
                }
                measured(worst, format!("{} random pairs", cfg.pairs))
            }
            other => unreachable!("unregistered witt check {other}"),
        })
    })?;
    let basis_order: Vec<Vec<usize>> = cliffield::graded_lex_subsets(n).into_iter().map(subset_indices).collect();
    let data = json!({
        "signature": [p, q],
        "scheme": cfg.scheme.name(),
        "n": n,
        "vacuum": spec.to_string(),
        "normalization": cfg.normalization,
        "basis_order": basis_order,
    });
    let mut artifacts = Vec::new();
    if let Some(name) = &sc.outputs.gammas {
        let doc = json!({
            "signature": [p, q],
            "scheme": cfg.scheme.name(),
            "vacuum": spec.to_string(),
            "normalization": cfg.normalization,
            "metric": (1..=sig.dim()).map(|a| sig.metric(a)).collect::<Vec<_>>(),
            "basis_order": basis_order,
            "gammas": gammas.iter().enumerate().map(|(k, g)| json!({ "generator": k + 1, "matrix": matrix_json(g) })).collect::<Vec<_>>(),
            "clifford_residual": clifford_residual(),
        });
        artifacts.push((name.clone(), serde_json::to_string_pretty(&doc).expect("json") + "\n"));
    }
    Ok(ModuleOutput { results, data, artifacts })
}

// grassmann

fn run_grassmann(sc: &Scenario, cfg: &GrassmannConfig, checks: &Checks, opts: &RunOptions) -> Result<ModuleOutput> {
    let kerr = CliError::kernel(&sc.name);
    let [p, q] = cfg.signature;
    cap("grassmann dimension p+q", p + q, MAX_FRAME_DIM)?;
    cap("samples", cfg.samples, MAX_SAMPLES)?;
    let sig = Signature::new(p, q).map_err(&kerr)?;
    let ctx = make_algebra(sig).map_err(&kerr)?;
    let wb = witt::witt_basis(&ctx, cfg.scheme).map_err(&kerr)?;
    let n = wb.n();
    let eta: Vec<i8> = (1..=n).map(|mu| wb.eta(mu)).collect();
    let random_fn = |rng: &mut ChaCha8Rng| {
        let comps: Vec<Complex64> = (0..1usize << n).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        from_components(n, &comps)
    };
    let results = measure_all(sc, checks, |inv| {
        let mut rng = rng_for(opts.seed, inv);
        Ok(match inv.name {
            "equivalence" => {
                let frame = witt::SpinorFrame::new(&wb, Normalization::Unit).map_err(&kerr)?;
                let mut worst: f64 = 0.0;
                for ib in &frame.ideals {
                    let perm = grassmann::ideal_correspondence(&ib.spec, &eta).map_err(&kerr)?.matrix();
                    for mu in 1..=n {
                        let pairs = [(wb.theta_upper(mu), grassmann::rep_theta(mu)), (wb.theta_bar(mu).clone(), grassmann::rep_theta_bar(mu))];
                        for (x, op) in pairs {
                            let abstract_rep = witt::matrix_rep(&x, ib).map_err(&kerr)?;
                            let mapped = perm.transpose() * op.matrix(n).map_err(&kerr)? * &perm;
                            worst = worst.max(linalg::max_diff(&abstract_rep, &mapped));
                        }
                    }
                }
                measured(worst, format!("{} ideals, θ and θ̄ for n = {n}", frame.ideals.len()))
            }
            "leibniz" => {
                let mut worst: f64 = 0.0;
                for _ in 0..cfg.samples {
                    let grade = rng.gen_range(0..=n);
                    let mut f = GrassmannFunction::zero(n);
                    for m in cliffield::graded_lex_subsets(n).into_iter().filter(|s| s.count_ones() as usize == grade) {
                        f = f.add(&GrassmannFunction::monomial(n, m, c(rng.gen_range(-1.0..1.0)))).map_err(&kerr)?;
                    }
                    let g = random_fn(&mut rng).map_err(&kerr)?;
                    let mu = rng.gen_range(1..=n);
                    let sign = if grade % 2 == 0 { 1.0 } else { -1.0 };
                    let lhs = f.gmul(&g).and_then(|fg| fg.d_left(mu)).map_err(&kerr)?;
                    let rhs = f
                        .d_left(mu)
                        .and_then(|df| df.gmul(&g))
                        .and_then(|a| f.gmul(&g.d_left(mu)?).map(|b| (a, b)))
                        .and_then(|(a, b)| a.add(&b.scale(c(sign))))
                        .map_err(&kerr)?;
                    worst = worst.max(lhs.sub(&rhs).map_err(&kerr)?.max_abs());
                }
                measured(worst, format!("{} random homogeneous products", cfg.samples))
            }
            "berezin" => {
                let mut worst: f64 = 0.0;
                for _ in 0..cfg.samples {
                    let h = random_fn(&mut rng).map_err(&kerr)?;
                    let mu = rng.gen_range(1..=n);
                    let dh = h.d_left(mu).map_err(&kerr)?;
                    worst = worst.max(grassmann::berezin(&dh, mu).map_err(&kerr)?.max_abs());
                    worst = worst.max(grassmann::integrate_all(&dh).norm());
                }
                measured(worst, format!("{} random derivatives", cfg.samples))
            }
            other => unreachable!("unregistered grassmann check {other}"),
        })
    })?;
    let mut perms = Vec::new();
    for spec in witt::enumerate_vacua(n) {
        let perm = grassmann::ideal_correspondence(&spec, &eta).map_err(&kerr)?;
        perms.push(json!({ "vacuum": spec.to_string(), "target": perm.target, "sign": perm.sign }));
    }
    let data = json!({
        "signature": [p, q],
        "scheme": cfg.scheme.name(),
        "n": n,
        "eta": eta,
        "monomial_order": cliffield::graded_lex_subsets(n).into_iter().map(subset_indices).collect::<Vec<_>>(),
        "correspondence": perms,
    });
    Ok(ModuleOutput { results, data, artifacts: Vec::new() })
}

// weyl

/// Random phase polynomial of degree at most two.
pub fn random_poly(rng: &mut ChaCha8Rng, n: usize) -> cliffield::Result<PhasePolynomial> {
    let mut f = PhasePolynomial::constant(n, c(rng.gen_range(-1.0..1.0)));
    for a in 0..2 * n {
        let za = PhasePolynomial::var(n, a)?;
        f = f.add(&za.scale(c(rng.gen_range(-1.0..1.0))))?;
        for b in a..2 * n {
            let zb = PhasePolynomial::var(n, b)?;
            f = f.add(&za.mul(&zb)?.scale(c(rng.gen_range(-1.0..1.0))))?;
        }
    }
    Ok(f)
}

fn run_weyl(sc: &Scenario, cfg: &WeylConfig, checks: &Checks, opts: &RunOptions) -> Result<ModuleOutput> {
    let kerr = CliError::kernel(&sc.name);
    cap("pairs", cfg.pairs, MAX_SAMPLES)?;
    let form = SymplecticForm::new(cfg.metric.clone()).map_err(&kerr)?;
    let ops = mode_ops(&form, cfg.cutoff, cfg.convention).map_err(&kerr)?;
    let results = measure_all(sc, checks, |inv| {
        Ok(match inv.name {
            "bracket_correspondence" => {
                let mut rng = rng_for(opts.seed, inv);
                let mut worst: f64 = 0.0;
                for _ in 0..cfg.pairs {
                    let f = random_poly(&mut rng, form.n()).map_err(&kerr)?;
                    let g = random_poly(&mut rng, form.n()).map_err(&kerr)?;
                    worst = worst.max(bracket_correspondence_with(&f, &g, &ops).map_err(&kerr)?.max_abs_deviation);
                }
                measured(worst, format!("{} random degree-2 pairs, safe dimension {}", cfg.pairs, ops.safe_dim()))
            }
            "canonical" => measured(ops.canonical_deviation(), format!("convention {}", cfg.convention.name())),
            other => unreachable!("unregistered weyl check {other}"),
        })
    })?;
    let k = cfg.convention.constant();
    let data = json!({
        "metric": cfg.metric,
        "cutoff": cfg.cutoff,
        "dim": ops.dim(),
        "safe_dim": ops.safe_dim(),
        "convention": cfg.convention.name(),
        "constant": [k.re, k.im],
    });
    Ok(ModuleOutput { results, data, artifacts: Vec::new() })
}

// dynamics

fn frame_pairing(c_frame: &CMatrix, z0: &CVector, z1: &CVector) -> f64 {
    // zᵀC = z0ᵀ
    linalg::max_abs_vec(&(c_frame.transpose() * z1 - z0))
}

fn run_dynamics(sc: &Scenario, cfg: &DynamicsConfig, checks: &Checks, opts: &RunOptions) -> Result<ModuleOutput> {
    let kerr = CliError::kernel(&sc.name);
    cap("tau steps", cfg.tau.steps, MAX_STEPS)?;
    cap("samples", cfg.samples, MAX_SAMPLES)?;
    if cfg.tau.steps == 0 || !(cfg.tau.end.is_finite() && cfg.tau.start.is_finite()) {
        return Err(kerr(invalid("tau grid needs steps >= 1 and finite bounds")));
    }
    let m = dynamics::model_factory(cfg.model, &cfg.params).map_err(&kerr)?;
    let dim = 2 * m.n();
    let z0 = match &cfg.z0 {
        Some(v) if v.len() != dim => return Err(kerr(cliffield::Error::DimensionMismatch { expected: dim, got: v.len() })),
        Some(v) => CVector::from_iterator(dim, v.iter().map(|&x| c(x))),
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            CVector::from_fn(dim, |_, _| c(rng.gen_range(-1.0..1.0)))
        }
    };
    let grid = dynamics::uniform_grid(cfg.tau.start, cfg.tau.end, cfg.tau.steps);
    let need_traj = sc.outputs.trajectory.is_some()
        || checks.iter().any(|(i, _)| matches!(i.name, "symplecticity" | "pairing" | "energy_conservation"));
    let traj = if need_traj { Some(dynamics::trajectory(&m, &z0, &grid).map_err(&kerr)?) } else { None };
    let frames = if checks.iter().any(|(i, _)| matches!(i.name, "symplecticity" | "pairing")) {
        Some(dynamics::frames(&m, &grid).map_err(&kerr)?)
    } else {
        None
    };
    let schedule = || -> Result<Schedule> {
        if cfg.segments.is_empty() {
            return Err(kerr(invalid("schedule_pairing needs [[dynamics.segments]]")));
        }
        let segments = cfg
            .segments
            .iter()
            .map(|s| dynamics::model_factory(cfg.model, &s.params).map(|sm| (s.duration, sm)))
            .collect::<cliffield::Result<Vec<(f64, QuadraticModel)>>>()
            .map_err(&kerr)?;
        Ok(Schedule { segments })
    };
    let mut table = None;
    let results = measure_all(sc, checks, |inv| {
        Ok(match inv.name {
            "symplecticity" => {
                let worst = frames.as_ref().expect("built").iter().map(|f| dynamics::symplecticity_deviation(f, &m.form)).fold(0.0, f64::max);
                measured(worst, format!("{} frames", grid.len()))
            }
            "pairing" => measured(
                dynamics::pairing_invariant(traj.as_ref().expect("built"), frames.as_ref().expect("built")).map_err(&kerr)?,
                format!("{} grid points", grid.len()),
            ),
            "period_identity" => {
                if m.kind != ModelKind::Oscillator {
                    return Err(kerr(invalid("period_identity applies to the oscillator only")));
                }
                let omega = cfg.params.omega.expect("oscillator has omega");
                let period = 2.0 * std::f64::consts::PI / omega;
                let f = dynamics::heisenberg_flow(&m, period).map_err(&kerr)?;
                measured(linalg::max_diff(&f.c, &linalg::identity(dim)), format!("tau = 2π/ω = {period:.6}"))
            }
            "energy_conservation" => {
                let t = traj.as_ref().expect("built");
                let e0 = m.energy(&z0);
                let worst = t.states.iter().map(|z| (m.energy(z) - e0).norm()).fold(0.0, f64::max);
                measured(worst / e0.norm().max(1.0), "relative to max(1, |H(z0)|)")
            }
            "heisenberg_commutator" => measured(
                dynamics::heisenberg_commutator_check(&m, cfg.cutoff, cfg.convention).map_err(&kerr)?,
                format!("cutoff {}, convention {}", cfg.cutoff, cfg.convention.name()),
            ),
            "bars_closure" => measured(dynamics::bars_closure_residual(&m.form).map_err(&kerr)?, "{Q_A, Q_B} = -Q_[A,B] over the sl(2) basis"),
            "schedule_pairing" => {
                let s = schedule()?;
                let r = s.classical_propagator().map_err(&kerr)?;
                let cf = s.heisenberg_frame().map_err(&kerr)?;
                let z1 = &r * &z0;
                let j = m.j();
                let sympl = linalg::max_diff(&(cf.transpose() * &j * &cf), &j);
                measured(frame_pairing(&cf, &z0, &z1).max(sympl), format!("{} segments, pairing and symplecticity", s.segments.len()))
            }
            "dirac_kernel" => {
                let dq = DiracQuantizer::spacetime().map_err(&kerr)?;
                let mut rng = rng_for(opts.seed, inv);
                let mut bad = 0usize;
                for _ in 0..cfg.samples {
                    let v: [f64; 3] = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
                    let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
                    let s = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                    bad += usize::from(dq.kernel_dim(&[s * r, v[0], v[1], v[2]]).map_err(&kerr)? != 2);
                    let p0 = s * (r * rng.gen_range(1.05..3.0) + 0.05);
                    bad += usize::from(dq.kernel_dim(&[p0, v[0], v[1], v[2]]).map_err(&kerr)? != 0);
                }
                measured(bad as f64, format!("{} null and {} timelike momenta in (1,3)", cfg.samples, cfg.samples))
            }
            "quantization_table" => {
                let t = dynamics::quantize_map(&SuperModel::new(m.clone(), 1.0, 0.0, 0.0)).map_err(&kerr)?;
                let worst = t.checks.iter().filter(|c| c.asserted).map(|c| c.max_abs_deviation).fold(0.0, f64::max);
                let recorded: Vec<String> =
                    t.checks.iter().filter(|c| !c.asserted).map(|c| format!("{} = {:.3e} (recorded)", c.name, c.max_abs_deviation)).collect();
                table = Some(t);
                measured(worst, recorded.join("; "))
            }
            other => unreachable!("unregistered dynamics check {other}"),
        })
    })?;
    let vec_json = |v: &CVector| v.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>();
    let mut data = json!({
        "model": m.label,
        "n": m.n(),
        "metric": m.form.metric(),
        "tau": { "start": cfg.tau.start, "end": cfg.tau.end, "steps": cfg.tau.steps },
        "z0": vec_json(&z0),
        "energy": [m.energy(&z0).re, m.energy(&z0).im],
    });
    if let Some(t) = &traj {
        data["final_state"] = json!(vec_json(t.states.last().expect("non-empty grid")));
    }
    if let Some(t) = &table {
        data["quantization_table"] = serde_json::to_value(t).expect("json");
    }
    let mut artifacts = Vec::new();
    if let Some(name) = &sc.outputs.trajectory {
        artifacts.push((name.clone(), traj.as_ref().expect("built").to_csv()));
    }
    Ok(ModuleOutput { results, data, artifacts })
}

// field

fn run_field(sc: &Scenario, cfg: &FieldConfig, checks: &Checks, _opts: &RunOptions) -> Result<ModuleOutput> {
    let kerr = CliError::kernel(&sc.name);
    cap("census_modes", cfg.census_modes, field::MAX_DENSE_MODES)?;
    let lattice = Lattice::new(cfg.lattice.dims.clone(), cfg.lattice.spacing).map_err(&kerr)?;
    let fm: FieldModel = field::build_model(&lattice, cfg.kind, &cfg.params).map_err(&kerr)?;
    let fermionic = fm.sector == Sector::Fermionic;
    let rules = cfg.vacua.iter().map(|s| s.parse::<VacuumRule>()).collect::<cliffield::Result<Vec<_>>>().map_err(&kerr)?;
    let need_fermionic = |name: &str| -> Result<()> {
        if !fermionic {
            return Err(kerr(invalid(format!("{name} needs a fermionic (dirac) model"))));
        }
        Ok(())
    };
    let need_bosonic = |name: &str| -> Result<()> {
        if fermionic {
            return Err(kerr(invalid(format!("{name} needs a bosonic model"))));
        }
        Ok(())
    };
    let results = measure_all(sc, checks, |inv| {
        Ok(match inv.name {
            "anticommutator" => {
                let mut worst = 0i64;
                let mut pairs = 0usize;
                for d in 1..=cfg.census_modes {
                    let r = FermionAlgebra::new(d).map_err(&kerr)?.anticommutator_check();
                    worst = worst.max(r.max_integer_deviation);
                    pairs += r.pairs_checked;
                }
                measured(worst as f64, format!("{pairs} operator pairs for D = 1..={}", cfg.census_modes))
            }
            "vacuum_census" => {
                let mut bad = 0usize;
                let mut counts = Vec::new();
                for d in 1..=cfg.census_modes {
                    let fa = FermionAlgebra::new(d).map_err(&kerr)?;
                    let vacua = field::enumerate_bare_vacua(&fa).map_err(&kerr)?;
                    bad += usize::from(vacua.len() != 1 << d);
                    for v in &vacua {
                        bad += usize::from(field::fock_rank(&field::fock_basis(&fa, v).map_err(&kerr)?) != 1 << d);
                        bad += usize::from(v.annihilation_residual(&fa) != 0.0);
                    }
                    counts.push(vacua.len());
                }
                measured(bad as f64, format!("vacua per D: {counts:?}"))
            }
            "annihilation" => {
                need_fermionic(inv.name)?;
                let fa = field::fermion_algebra(&fm).map_err(&kerr)?;
                let mut worst: f64 = 0.0;
                for r in &rules {
                    worst = worst.max(field::make_vacuum(&fa, r, Some(&fm)).map_err(&kerr)?.annihilation_residual(&fa));
                }
                measured(worst, format!("{} vacua on D = {}", rules.len(), fm.modes()))
            }
            "energy_oracle" => {
                need_fermionic(inv.name)?;
                let mut worst: f64 = 0.0;
                for r in &rules {
                    let e = field::vacuum_energy(&fm, r).map_err(&kerr)?;
                    worst = worst.max((e.expectation - e.oracle).abs());
                }
                measured(worst, format!("{} vacua", rules.len()))
            }
            "zero_point" => {
                need_fermionic(inv.name)?;
                let led = field::energy_ledger(&fm).map_err(&kerr)?;
                let dev = led.split.expectation.abs().max((led.standard.expectation - led.sea_energy()).abs());
                measured(dev, format!("split {:.3e}, standard {:.12} vs -Σ|ε|/2 = {:.12}", led.split.expectation, led.standard.expectation, led.sea_energy()))
            }
            "brackets" => {
                let (b, mism) = if fermionic { field::fermionic_brackets(&fm) } else { field::bosonic_brackets(&fm) }.map_err(&kerr)?;
                measured(mism as f64, format!("{} of {} entries differ", mism, b.len()))
            }
            "symplecticity" => {
                need_bosonic(inv.name)?;
                let f = field::operator_field_flow(&fm, cfg.flow_time).map_err(&kerr)?;
                measured(dynamics::symplecticity_deviation(&f, &SymplecticForm::euclidean(fm.modes())), format!("tau = {}", cfg.flow_time))
            }
            "boson_witt" => {
                need_bosonic(inv.name)?;
                let r = field::boson_witt(&fm, cfg.cutoff).map_err(&kerr)?.report();
                measured(r.kk.max(r.kbar_k).max(r.symmetry), format!("[k,k] {:.1e}, ½[k̄,k]-δ {:.1e}, symmetry {:.1e}", r.kk, r.kbar_k, r.symmetry))
            }
            other => unreachable!("unregistered field check {other}"),
        })
    })?;
    let mut data = json!({
        "model": format!("{:?}", cfg.kind).to_lowercase(),
        "sector": if fermionic { "fermionic" } else { "bosonic" },
        "lattice": { "dims": lattice.dims, "spacing": lattice.spacing },
        "sites": lattice.sites(),
        "modes": fm.modes(),
    });
    let mut artifacts = Vec::new();
    if fermionic {
        let spectrum = fm.spectrum().map_err(&kerr)?;
        let mut energies = serde_json::Map::new();
        for r in &rules {
            let e = field::vacuum_energy(&fm, r).map_err(&kerr)?;
            energies.insert(e.rule.clone(), json!({ "expectation": e.expectation, "oracle": e.oracle }));
        }
        data["spectrum"] = json!(spectrum);
        data["vacuum_energy"] = Value::Object(energies);
        if let Some(name) = &sc.outputs.spectrum {
            let mut csv = String::from("index,energy\n");
            for (k, e) in spectrum.iter().enumerate() {
                csv.push_str(&format!("{k},{e}\n"));
            }
            artifacts.push((name.clone(), csv));
        }
    } else if sc.outputs.spectrum.is_some() {
        return Err(kerr(invalid("spectrum output needs a fermionic (dirac) model")));
    }
    Ok(ModuleOutput { results, data, artifacts })
}
