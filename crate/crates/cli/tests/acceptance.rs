//! One line per acceptance criterion; exits nonzero if any fails.

mod common;

use std::process::ExitCode;

use ncjoin::files::{load_valid, LoadedSystem};
use ncjoin_core::algebra::{commutant, is_trivial, random_multimatrix, MatrixAlgebra};
use ncjoin_core::gns_modular::{modular_report, standard_form};
use ncjoin_core::joining::{
    fixed_space_p, gns_of_functional, intertwining_residual, invariance_residual, is_omega_line,
    product_joining, verify_joining_with_tol, JoiningFunctional,
};
use ncjoin_core::mirror::{deviation_at, is_product, mirror_joining, mirror_system, nondisjointness_witness, Witness};
use ncjoin_core::numerics::random::{random_density, random_hermitian};
use ncjoin_core::numerics::{hermitian_eig, project_psd, CMatrix};
use ncjoin_core::solver::{
    build_problem, ergodic_average, feasible_interval, find_joining, AveragingSchedule, Pin, SearchOptions,
    SearchOutcome, GRID_RESOLUTION,
};
use ncjoin_core::system::{fixed_point_factor, identity_system, DynamicalSystem, QState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const FIXTURES: [&str; 6] = ["ad_diag", "biased_diag", "classical_2pt", "pauli_twirl", "tracial_m2", "z_rotation"];
const IDENTITY_FIXTURES: [&str; 3] = ["classical_2pt", "tracial_m2", "biased_diag"];

type Criterion = (&'static str, fn() -> (bool, String));

fn load(name: &str, file: &str) -> LoadedSystem {
    load_valid(&common::fixture(name, file), 1e-9).unwrap_or_else(|_| panic!("{name}/{file} loads"))
}

fn sys(name: &str) -> DynamicalSystem {
    load(name, "system.json").sys
}

fn random_blocks(rng: &mut ChaCha8Rng) -> Vec<(usize, usize)> {
    loop {
        let k = rng.gen_range(1..=3);
        let blocks: Vec<(usize, usize)> = (0..k).map(|_| (rng.gen_range(1..=2), rng.gen_range(1..=3))).collect();
        let d: usize = blocks.iter().map(|&(n, m)| n * m).sum();
        let dim: usize = blocks.iter().map(|&(n, _)| n * n).sum();
        if d <= 6 && dim <= 8 {
            return blocks;
        }
    }
}

fn random_systems(count: usize) -> Vec<DynamicalSystem> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    (0..count)
        .map(|_| {
            let a = random_multimatrix(&random_blocks(&mut rng), &mut rng).unwrap();
            let rho = random_density(a.hilbert_dim(), &mut rng);
            identity_system(a, QState::new(rho).unwrap()).unwrap()
        })
        .collect()
}

fn residual(report: &ncjoin_core::ValidationReport, name: &str) -> f64 {
    report.get(name).map_or(f64::INFINITY, |c| c.residual)
}

fn tomita() -> (bool, String) {
    let mut worst_j = 0.0f64;
    let mut worst_other = 0.0f64;
    for s in random_systems(50) {
        let (g, m) = standard_form(&s).unwrap();
        let r = modular_report(&g, &m, &s.action, 1e-9);
        worst_j = worst_j.max(residual(&r, "modular j(M) = M'"));
        for name in ["modular J^2 = 1", "modular J omega = omega", "modular S = J delta^1/2"] {
            worst_other = worst_other.max(residual(&r, name));
        }
    }
    (
        worst_j <= 1e-8 && worst_other <= 1e-9,
        format!("50 random systems, j(M) vs M' {worst_j:.1e}, J/Omega/polar {worst_other:.1e}"),
    )
}

fn mirror_of(name: &str) -> (DynamicalSystem, ncjoin_core::mirror::MirrorData, JoiningFunctional, bool) {
    let a = sys(name);
    let f = fixed_point_factor(&a).unwrap();
    let trivial = is_trivial(&f.source.algebra);
    let md = mirror_system(&a, &f).unwrap();
    let w = mirror_joining(&a, &md).unwrap();
    (a, md, w, trivial)
}

fn mirror_joining_verifies() -> (bool, String) {
    let mut ok = true;
    let mut count = 0;
    for name in FIXTURES {
        let (a, md, w, trivial) = mirror_of(name);
        if trivial {
            continue;
        }
        count += 1;
        ok &= verify_joining_with_tol(&w, &a, &md.b_sys, 1e-9).passed();
    }
    (ok, format!("{count} fixtures with a non-trivial factor verified at 1e-9"))
}

fn product_iff_trivial() -> (bool, String) {
    let mut ok = true;
    for name in FIXTURES {
        let (a, md, w, trivial) = mirror_of(name);
        ok &= is_product(&w, &a, &md.b_sys) == trivial;
    }
    let (a, md, w, _) = mirror_of("ad_diag");
    let e11 = CMatrix::unit(2, 0, 0);
    let dev = deviation_at(&w, &a, &md.b_sys, &e11, &md.sigma(&e11));
    ok &= (dev - 0.25).abs() <= 1e-8;
    (ok, format!("product iff trivial factor on 6 fixtures, ad_diag deviation {dev:.10}"))
}

fn witness() -> (bool, String) {
    let ad = match nondisjointness_witness(&sys("ad_diag")).unwrap() {
        Witness::NonProduct { mirror, joining, .. } => {
            mirror.b_sys.is_identity_system() && !is_product(&joining, &sys("ad_diag"), &mirror.b_sys)
        }
        Witness::Ergodic => false,
    };
    let pauli = matches!(nondisjointness_witness(&sys("pauli_twirl")).unwrap(), Witness::Ergodic);
    (ad && pauli, format!("ad_diag non-product witness {ad}, pauli_twirl ergodic {pauli}"))
}

fn mix(product: &JoiningFunctional, other: &JoiningFunctional, t: f64) -> JoiningFunctional {
    let v = &product.values().scale_real(1.0 - t) + &other.values().scale_real(t);
    JoiningFunctional::new(v).unwrap()
}

fn intertwining_equivalence() -> (bool, String) {
    let a = sys("ad_diag");
    let b = sys("ad_diag");
    let product = product_joining(&a, &b).unwrap();
    let invariant_problem = build_problem(&a, &b).unwrap();
    let a_free = a.with_identity_action(a.action.group().clone());
    let b_free = b.with_identity_action(b.action.group().clone());
    let free_problem = build_problem(&a_free, &b_free).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut seed = 0u64;
    let mut next = |problem: &ncjoin_core::solver::JoiningSearchProblem| loop {
        seed += 1;
        let opts = SearchOptions { seed, ..SearchOptions::default() };
        if let SearchOutcome::Found { joining, .. } = find_joining(problem, &opts).unwrap() {
            return joining;
        }
    };
    let mut states = Vec::new();
    while states.len() < 50 {
        states.push((true, mix(&product, &next(&invariant_problem), rng.gen_range(0.3..0.9))));
    }
    while states.len() < 100 {
        let w = mix(&product, &next(&free_problem), rng.gen_range(0.3..0.9));
        if invariance_residual(&w, &a, &b).unwrap() > 1e-4 {
            states.push((false, w));
        }
    }
    let mut ok = true;
    let mut worst_inv = 0.0f64;
    let mut best_non = f64::INFINITY;
    for (invariant, w) in &states {
        ok &= verify_joining_with_tol(w, &a_free, &b_free, 1e-8).passed();
        let ce = gns_of_functional(w, &a, &b).unwrap();
        let r = intertwining_residual(&ce);
        if *invariant {
            worst_inv = worst_inv.max(r);
        } else {
            best_non = best_non.min(r);
        }
        ok &= (r <= 1e-8) == *invariant;
    }
    (
        ok,
        format!("100 states, invariant max residual {worst_inv:.1e}, non-invariant min residual {best_non:.1e}"),
    )
}

fn fixed_space_is_line() -> (bool, String) {
    let a = sys("pauli_twirl");
    let b = load("pauli_twirl", "system_classical.json").sys;
    let problem = build_problem(&a, &b).unwrap();
    let mut joinings: Vec<(DynamicalSystem, JoiningFunctional)> = Vec::new();
    for seed in 0..5 {
        let opts = SearchOptions { seed, ..SearchOptions::default() };
        if let Some(w) = find_joining(&problem, &opts).unwrap().joining() {
            joinings.push((b.clone(), w.clone()));
        }
    }
    let e11 = CMatrix::unit(2, 0, 0);
    let pinned = problem
        .with_pin(&Pin {
            a_coords: a.algebra.coords(&e11),
            b_coords: b.algebra.coords(&e11),
            value: 0.25,
        })
        .unwrap();
    if let Some(w) = find_joining(&pinned, &SearchOptions::default()).unwrap().joining() {
        joinings.push((b.clone(), w.clone()));
    }
    let (_, md, w, _) = mirror_of("pauli_twirl");
    joinings.push((md.b_sys.clone(), w));
    let ok = joinings.len() == 7
        && joinings.iter().all(|(bs, w)| {
            let ce = gns_of_functional(w, &a, bs).unwrap();
            is_omega_line(&fixed_space_p(&ce).unwrap(), &ce.omega)
        });
    (ok, format!("{} joinings (solver, pinned, mirror), fixed space C.Omega", joinings.len()))
}

fn ergodic_identity_product() -> (bool, String) {
    let a = sys("pauli_twirl");
    let opts = SearchOptions::default();
    let mut worst = 0.0f64;
    let mut probes = 0;
    for name in IDENTITY_FIXTURES {
        let b = sys(name);
        for x in a.algebra.basis() {
            for y in b.algebra.basis() {
                let iv = feasible_interval(&a, &b, x, y, 8, &opts).unwrap();
                worst = worst.max(iv.max_deviation());
                probes += 1;
            }
        }
    }
    let e11 = CMatrix::unit(2, 0, 0);
    let finite = ergodic_average(&a, &e11, &AveragingSchedule::for_group(a.action.group(), 1)).unwrap()[0]
        .frobenius_norm();
    let z = sys("z_rotation");
    let horizon = 64;
    let profile = ergodic_average(&z, &CMatrix::unit(2, 0, 1), &AveragingSchedule::for_group(z.action.group(), horizon))
        .unwrap();
    let c = 2.0 / (ncjoin_core::numerics::C64::new(1.0, 0.0) - ncjoin_core::numerics::C64::from_polar(1.0, 1.0)).norm();
    let cesaro = profile
        .iter()
        .enumerate()
        .all(|(k, e)| e.frobenius_norm() <= c / (k + 1) as f64 + 1e-12);
    (
        worst <= GRID_RESOLUTION && finite <= 1e-12 && cesaro,
        format!(
            "{probes} basis probes max deviation {worst:.1e}, finite e_1 {finite:.1e}, z_rotation within {c:.3}/n to n = {horizon}: {cesaro}"
        ),
    )
}

fn solver_oracle() -> (bool, String) {
    let a = sys("classical_2pt");
    let e11 = CMatrix::unit(2, 0, 0);
    let opts = SearchOptions::default();
    let iv = feasible_interval(&a, &a, &e11, &e11, 8, &opts).unwrap();
    let (lo, hi) = common::transport_range(&[0.5, 0.5], &[0.5, 0.5], 0, 0);
    let problem = build_problem(&a, &a).unwrap();
    let pin = Pin {
        a_coords: a.algebra.coords(&e11),
        b_coords: a.algebra.coords(&e11),
        value: 0.6,
    };
    let infeasible = !find_joining(&problem.with_pin(&pin).unwrap(), &opts).unwrap().is_found();
    let ok = (iv.lower - lo).abs() <= GRID_RESOLUTION && (iv.upper - hi).abs() <= GRID_RESOLUTION && infeasible;
    (
        ok,
        format!(
            "interval [{:.4}, {:.4}] vs LP [{lo}, {hi}], pin 0.6 infeasible {infeasible}",
            iv.lower, iv.upper
        ),
    )
}

fn kernels() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut eig = 0.0f64;
    let mut psd = 0.0f64;
    for n in 1..=16 {
        let h = random_hermitian(n, &mut rng);
        eig = eig.max(hermitian_eig(&h).unwrap().reconstruct().max_abs_diff(&h));
        let p = project_psd(&h).unwrap();
        psd = psd.max(project_psd(&p).unwrap().max_abs_diff(&p));
    }
    let mut algebras: Vec<MatrixAlgebra> = random_systems(50).into_iter().map(|s| s.algebra).collect();
    for name in FIXTURES {
        let (a, md, _, _) = mirror_of(name);
        algebras.push(fixed_point_factor(&a).unwrap().source.algebra);
        algebras.push(a.algebra);
        algebras.push(md.b_sys.algebra);
    }
    let bicomm = algebras
        .iter()
        .map(|a| commutant(&commutant(a).unwrap()).unwrap().span_distance(a))
        .fold(0.0, f64::max);
    (
        eig <= 1e-10 && psd <= 1e-9 && bicomm <= 1e-8,
        format!(
            "eig {eig:.1e}, psd idempotence {psd:.1e}, bicommutant {bicomm:.1e} over {} algebras",
            algebras.len()
        ),
    )
}

fn determinism() -> (bool, String) {
    let dir = common::fixtures();
    let suite = ["--format", "json", "suite", "--fixtures", dir.to_str().unwrap()];
    let first = common::ncjoin(&suite);
    let second = common::ncjoin(&suite);
    let a = common::fixture("classical_2pt", "system.json");
    let a = a.to_str().unwrap();
    let search = ["--format", "json", "join-search", a, a, "--pin", "E11", "E11", "0.3", "--seed", "11"];
    let s1 = common::ncjoin(&search);
    let s2 = common::ncjoin(&search);
    let ok = first.status.success() && first.stdout == second.stdout && s1.stdout == s2.stdout;
    (ok, format!("suite report {} bytes, identical across runs: {ok}", first.stdout.len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("Tomita check", tomita),
        ("mirror joining verifies", mirror_joining_verifies),
        ("product iff trivial factor", product_iff_trivial),
        ("non-disjointness witness", witness),
        ("invariance iff intertwining", intertwining_equivalence),
        ("fixed space of P is C.Omega", fixed_space_is_line),
        ("ergodic vs identity is product", ergodic_identity_product),
        ("solver matches transport LP", solver_oracle),
        ("numerical kernels", kernels),
        ("deterministic reports", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = std::time::Instant::now();
        let (ok, detail) = check();
        if !ok {
            failed += 1;
        }
        println!(
            "criterion {:>2} {} {name}: {detail} ({:.2}s)",
            i + 1,
            if ok { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {}/10 passed", 10 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
