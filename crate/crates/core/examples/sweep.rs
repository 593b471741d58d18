//! Grid-calibration sweep for the acceptance problems: prints the
//! diagnostic residuals of each converged run so box sizes can be chosen
//! against the truncation error they need to beat.

use gngs_core::exponents::DilationStructure;
use gngs_core::functionals::{ProblemSpec, Term};
use gngs_core::grid::GridSpec;
use gngs_core::rational::rat;
use gngs_core::solver::{lambda_derivative_residual, solve_ground_state, SolverOptions};
use gngs_core::symbol::HomogeneousSymbol;

fn frac_1d(n: usize, l: f64) -> ProblemSpec {
    let w = DilationStructure::isotropic(1);
    let sym = HomogeneousSymbol::from_weights(vec![1.0], &w).unwrap();
    ProblemSpec::new(
        vec![
            Term { symbol: sym.clone(), order: rat(2, 5) },
            Term { symbol: sym, order: rat(0, 1) },
        ],
        rat(2, 1),
        rat(3, 1),
        GridSpec::line(n, l).unwrap(),
        w,
    )
    .unwrap()
}

fn aniso_2d(n: (usize, usize), l: (f64, f64)) -> ProblemSpec {
    let w = DilationStructure::new(vec![rat(1, 1), rat(2, 1)]).unwrap();
    let sym = HomogeneousSymbol::from_weights(vec![1.0, 1.0], &w).unwrap();
    ProblemSpec::new(
        vec![
            Term { symbol: sym.clone(), order: rat(1, 1) },
            Term { symbol: sym, order: rat(0, 1) },
        ],
        rat(2, 1),
        rat(4, 1),
        GridSpec::new(vec![n.0, n.1], vec![l.0, l.1]).unwrap(),
        w,
    )
    .unwrap()
}

fn three_term_1d(n: usize, l: f64) -> ProblemSpec {
    let w = DilationStructure::isotropic(1);
    let sym = HomogeneousSymbol::from_weights(vec![1.0], &w).unwrap();
    ProblemSpec::new(
        vec![
            Term { symbol: sym.clone(), order: rat(2, 5) },
            Term { symbol: sym.clone(), order: rat(1, 5) },
            Term { symbol: sym, order: rat(0, 1) },
        ],
        rat(2, 1),
        rat(3, 1),
        GridSpec::line(n, l).unwrap(),
        w,
    )
    .unwrap()
}

fn run(label: &str, ps: &ProblemSpec) {
    run_opts(label, ps, &SolverOptions::default());
}

fn run_opts(label: &str, ps: &ProblemSpec, opts: &SolverOptions) {
    let t0 = std::time::Instant::now();
    let r = solve_ground_state(ps, opts).unwrap();
    let lam = lambda_derivative_residual(ps, &r.phi).unwrap();
    println!(
        "{label}: d={:.10} iters={} el={:.2e} poh={:?} lam={:.3e} bmass={:.2e} conv={} [{:.1}s]",
        r.d,
        r.iterations,
        r.el_residual,
        r.pohozaev_residuals
            .iter()
            .map(|x| format!("{x:.2e}"))
            .collect::<Vec<_>>(),
        lam,
        r.boundary_mass,
        r.converged,
        t0.elapsed().as_secs_f64()
    );
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let what = args.get(1).map(String::as_str).unwrap_or("all");

    if what == "all" || what == "frac" {
        run("frac  N=1024   L=40", &frac_1d(1024, 40.0));
        run("frac  N=65536  L=2560", &frac_1d(65536, 2560.0));
        run("frac  N=131072 L=5120", &frac_1d(131072, 5120.0));
    }
    if what == "all" || what == "aniso" {
        let noclamp = SolverOptions {
            modulus_clamp: Some(false),
            max_iters: 200_000,
            ..Default::default()
        };
        run_opts("aniso N=256^2   L=(15,30)", &aniso_2d((256, 256), (15.0, 30.0)), &noclamp);
        run_opts("aniso N=512^2   L=(15,30)", &aniso_2d((512, 512), (15.0, 30.0)), &noclamp);
        run_opts("aniso N=512x1024 L=(15,30)", &aniso_2d((512, 1024), (15.0, 30.0)), &noclamp);
    }
    if what == "all" || what == "three" {
        run("three N=131072 L=5120 ", &three_term_1d(131072, 5120.0));
        run("three N=262144 L=10240", &three_term_1d(262144, 10240.0));
        run("three N=524288 L=20480", &three_term_1d(524288, 20480.0));
    }
}
