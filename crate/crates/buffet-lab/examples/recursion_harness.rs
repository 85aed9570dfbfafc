//! Exercise the generic recursive-dynamics engine on synthetic
//! processes with known ground truth: stochastic approximation toward
//! a (possibly random) attractor, strict positivity of the rescaled
//! limit, the residual CLT, and the slow-remainder concentration.
//!
//!     cargo run --release --example recursion_harness

use buffet_lab::ensemble::par_replicas;
use buffet_lab::recursion::{
    clt_residuals, concentration_statistic, positivity_fraction, run_recursion, run_sa, Attractor,
    DynamicsForm, Innovation, LimitVariance, MartingaleNoise, RecursionSpec, Remainder, SAProblem,
    StepSize,
};
use buffet_lab::rng::replica_seed;
use buffet_lab::stats::{mean, normality_check, variance};

fn main() {
    // Noiseless stochastic approximation: X_{t+1} = X_t + eta (a - b X).
    let problem = SAProblem {
        eta: StepSize::Harmonic { theta: 1.0 },
        b: 0.5,
        attractor: Attractor::Constant(2.0),
        noise: MartingaleNoise::None,
        remainder: Remainder::Zero,
        x1: 3.5,
    };
    let (path, _) = run_sa(&problem, 1_000_000, &[1_000_000], 1).unwrap();
    println!("noiseless SA: terminal {:.6} (limit a/b = 4)", path.terminal().1);

    // Random attractor, Rademacher noise: X -> A_inf / b per replica.
    let problem = SAProblem {
        attractor: Attractor::RandomShifted { lo: 1.0, hi: 3.0, shift: 1.0 },
        noise: MartingaleNoise::Rademacher { scale: 1.0 },
        ..problem
    };
    let terminals: Vec<f64> = par_replicas(200, |i| {
        run_sa(&problem, 100_000, &[100_000], replica_seed(2, i as u64))
            .unwrap()
            .0
            .terminal()
            .1
    });
    println!(
        "random-attractor SA: ensemble mean {:.4} (E[A]/b = 4)",
        mean(&terminals)
    );

    // Bernoulli innovation: t^(1-delta) X_t has a strictly positive limit.
    let spec = RecursionSpec {
        theta: 1.0,
        delta: 0.5,
        form: DynamicsForm::NonNegative(Innovation::Bernoulli),
        remainder: Remainder::Zero,
        limit_variance: LimitVariance::DeltaTimesLimit,
        x1: 0.5,
    };
    let rescaled: Vec<f64> = par_replicas(500, |i| {
        let p = run_recursion(&spec, 200_000, &[200_000], replica_seed(3, i as u64)).unwrap();
        let (t, x) = p.terminal();
        (t as f64).sqrt() * x
    });
    println!(
        "positivity: fraction of sqrt(t) X below 1e-3 = {:.4} (mean {:.3})",
        positivity_fraction(&rescaled, 1e-3).unwrap(),
        mean(&rescaled)
    );

    // Residual CLT for the same process, standardized per replica.
    let paths: Vec<_> = par_replicas(600, |i| {
        run_recursion(&spec, 1_000_000, &[100_000, 1_000_000], replica_seed(4, i as u64)).unwrap()
    });
    let residuals = clt_residuals(&paths, &spec, 100_000, 1_000_000).unwrap();
    match normality_check(&residuals) {
        Ok(rep) => println!(
            "Bernoulli CLT: variance {:.4}, gate {}",
            variance(&residuals),
            if rep.pass { "pass" } else { "fail" }
        ),
        Err(e) => println!("Bernoulli CLT: {e}"),
    }

    // A slowly decaying remainder shifts the rescaled process by
    // -rho_inf/(delta-rho) instead of producing Gaussian noise.
    let spec = RecursionSpec {
        theta: 1.0,
        delta: 1.0,
        form: DynamicsForm::Signed(MartingaleNoise::Rademacher { scale: 1.0 }),
        remainder: Remainder::Power { rho_inf: 2.0, rho: 0.75 },
        limit_variance: LimitVariance::Constant(1.0),
        x1: 0.0,
    };
    let paths: Vec<_> = par_replicas(300, |i| {
        run_recursion(&spec, 1_000_000, &[10_000, 1_000_000], replica_seed(5, i as u64)).unwrap()
    });
    let stat = concentration_statistic(&paths, &spec, 10_000, 1_000_000).unwrap();
    println!("slow-remainder concentration: {stat:.4} (target -rho_inf/(delta-rho) = -8)");
}
