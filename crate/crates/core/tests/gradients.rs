use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use surco_core::instances::{AssignmentInstance, DeadlineRegime, RouteInstance, ToyInstance};
use surco_core::nn::Mlp;
use surco_core::objectives::{
    normal_cdf, ontime_objective, toy_objective, AssignmentObjective, ObjectiveValue,
};

const H: f64 = 1e-5;

fn central_difference(f: impl Fn(&[f64]) -> f64, x: &[f64]) -> Vec<f64> {
    let mut xp = x.to_vec();
    (0..x.len())
        .map(|i| {
            let orig = xp[i];
            xp[i] = orig + H;
            let up = f(&xp);
            xp[i] = orig - H;
            let down = f(&xp);
            xp[i] = orig;
            (up - down) / (2.0 * H)
        })
        .collect()
}

fn relative_error(fd: &[f64], an: &[f64]) -> f64 {
    let num = fd.iter().zip(an).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    let den = an.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    num / den.max(1e-300)
}

fn check(eval: impl Fn(&[f64]) -> ObjectiveValue, x: &[f64]) -> f64 {
    let an = eval(x).grad;
    let fd = central_difference(|p| eval(p).value, x);
    relative_error(&fd, &an)
}

#[test]
fn ontime_gradient_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for k in 0..100 {
        let regime = DeadlineRegime::ALL[k % 3];
        let inst = RouteInstance::generate(5, 5, regime, k as u64).unwrap();
        let x: Vec<f64> = (0..inst.num_edges()).map(|_| rng.gen_range(0.0..0.3)).collect();
        let err = check(|p| ontime_objective(p, &inst).unwrap(), &x);
        assert!(err <= 1e-5, "point {k}: relative error {err}");
    }
}

#[test]
fn toy_gradient_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for k in 0..100 {
        let inst = ToyInstance::new(rng.gen_range(0.0..std::f64::consts::FRAC_PI_2)).unwrap();
        let x = [rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)];
        let err = check(|p| toy_objective(p, &inst).unwrap(), &x);
        assert!(err <= 1e-5, "point {k}: relative error {err}");
    }
}

#[test]
fn assignment_gradient_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for k in 0..100 {
        let inst = AssignmentInstance::generate(4 + k % 3, 3, k as u64).unwrap();
        let obj = AssignmentObjective::new(&inst);
        let x: Vec<f64> = (0..inst.num_vars()).map(|_| rng.gen_range(0.0..1.0)).collect();
        let err = check(|p| obj.evaluate_unchecked(p).unwrap(), &x);
        assert!(err <= 1e-5, "point {k}: relative error {err}");
    }
}

#[test]
fn mlp_parameter_gradients_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for seed in 0..10 {
        let mlp = Mlp::new(&[3, 8, 8, 1], seed).unwrap();
        let input: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let (_, trace) = mlp.forward(&input).unwrap();
        let mut an = vec![0.0; mlp.num_params()];
        mlp.backward(&trace, &[1.0], &mut an).unwrap();
        let sizes = mlp.sizes().to_vec();
        let fd = central_difference(
            |p| {
                let m = Mlp::from_parts(sizes.clone(), p.to_vec()).unwrap();
                m.forward(&input).unwrap().0[0]
            },
            mlp.params(),
        );
        let err = relative_error(&fd, &an);
        assert!(err <= 1e-5, "seed {seed}: relative error {err}");
    }
}

#[test]
fn normal_cdf_reference_values() {
    // values from an independent double-precision implementation
    let cases = [
        (0.0, 0.5),
        (1.0, 0.8413447460685429),
        (-1.0, 0.15865525393145707),
        (1.96, 0.9750021048517795),
        (-3.0, 0.0013498980316300946),
    ];
    for (z, want) in cases {
        assert!((normal_cdf(z) - want).abs() < 1e-15, "Φ({z})");
    }
}

proptest! {
    #[test]
    fn ontime_value_is_a_probability(seed in 0u64..500, scale in 0.01f64..1.0) {
        let inst = RouteInstance::generate(3, 3, DeadlineRegime::Normal, seed).unwrap();
        let x = vec![scale; inst.num_edges()];
        let v = ontime_objective(&x, &inst).unwrap();
        prop_assert!((0.0..=1.0).contains(&v.value));
        prop_assert!(v.grad.iter().all(|g| g.is_finite()));
    }

    #[test]
    fn toy_value_on_vertices(y in 0.0f64..std::f64::consts::FRAC_PI_2) {
        let inst = ToyInstance::new(y).unwrap();
        let at = |x: [f64; 2]| toy_objective(&x, &inst).unwrap().value;
        prop_assert_eq!(at([0.0, 0.0]), 0.0);
        prop_assert!((at([1.0, 0.0]) - y.cos().powi(2)).abs() < 1e-15);
        prop_assert!((at([0.0, 1.0]) - y.sin().powi(2)).abs() < 1e-15);
    }

    #[test]
    fn assignment_objective_bounds_the_max_load(seed in 0u64..200) {
        let inst = AssignmentInstance::generate(5, 3, seed).unwrap();
        let assign = inst.first_fit_decreasing().unwrap();
        let mut x = vec![0.0; inst.num_vars()];
        for (t, d) in assign.iter().enumerate() {
            x[inst.var(t, *d)] = 1.0;
        }
        let obj = AssignmentObjective::new(&inst);
        let v = obj.evaluate_unchecked(&x).unwrap().value;
        // softmax-weighted mean lies between the mean load and the max load
        let mut loads = vec![0.0; inst.num_devices()];
        let mut counts = vec![1e-9f64; inst.num_devices()];
        for (t, d) in assign.iter().enumerate() {
            loads[*d] += inst.weights()[t];
            counts[*d] += 1.0;
        }
        let loads: Vec<f64> = loads.iter().zip(&counts).map(|(w, c)| w + 0.3 * c.sqrt()).collect();
        let max = loads.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mean = loads.iter().sum::<f64>() / loads.len() as f64;
        prop_assert!(v <= max + 1e-12 && v >= mean - 1e-12);
    }
}
