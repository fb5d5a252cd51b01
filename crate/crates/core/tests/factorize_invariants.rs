use l1mf_core::synth::{self, OutlierMode, ScenarioSpec};
use l1mf_core::{
    factorize_l1, factorize_l1_masked, factorize_l2_als, factorize_l2_als_masked, objective_l1, rel_frob_error,
    DenseMatrix, MaskMatrix, SolverConfig,
};

fn bits(m: &DenseMatrix) -> Vec<u64> {
    m.as_slice().iter().map(|x| x.to_bits()).collect()
}

fn corrupted(d: usize, n: usize, rank: usize, missing: f64, seed: u64) -> synth::SyntheticInstance {
    let spec = ScenarioSpec {
        d,
        n,
        rank,
        outlier_fraction: 0.1,
        outlier_range: 20.0,
        outlier_mode: OutlierMode::Replace,
        missing_fraction: missing,
        seed,
    };
    synth::generate(&spec).unwrap().0
}

#[test]
fn same_seed_same_bits() {
    let inst = corrupted(25, 18, 3, 0.2, 4);
    let cfg = SolverConfig::new(3).with_seed(77).with_max_sweeps(40);
    let (a, da) = factorize_l1_masked(&inst.x_corrupt, &inst.mask, &cfg).unwrap();
    let (b, db) = factorize_l1_masked(&inst.x_corrupt, &inst.mask, &cfg).unwrap();
    assert_eq!(bits(a.u()), bits(b.u()));
    assert_eq!(bits(a.v()), bits(b.v()));
    assert_eq!(da.objective_trace, db.objective_trace);

    let (c, _) = factorize_l1_masked(&inst.x_corrupt, &inst.mask, &cfg.clone().with_seed(78)).unwrap();
    assert_ne!(bits(a.u()), bits(c.u()));
}

#[test]
fn unobserved_values_do_not_matter() {
    let inst = corrupted(20, 16, 2, 0.25, 9);
    let scrambled = DenseMatrix::from_fn(20, 16, |i, j| {
        if inst.mask.is_observed(i, j) {
            inst.x_corrupt.get(i, j)
        } else {
            1e3 * (i as f64 - j as f64)
        }
    })
    .unwrap();
    let cfg = SolverConfig::new(2).with_seed(5).with_max_sweeps(30);
    let (a, _) = factorize_l1_masked(&inst.x_corrupt, &inst.mask, &cfg).unwrap();
    let (b, _) = factorize_l1_masked(&scrambled, &inst.mask, &cfg).unwrap();
    assert_eq!(bits(a.u()), bits(b.u()));
    assert_eq!(bits(a.v()), bits(b.v()));

    let (a, _) = factorize_l2_als_masked(&inst.x_corrupt, &inst.mask, &cfg).unwrap();
    let (b, _) = factorize_l2_als_masked(&scrambled, &inst.mask, &cfg).unwrap();
    assert_eq!(bits(a.u()), bits(b.u()));
}

#[test]
fn all_ones_mask_is_the_full_data_run() {
    let inst = corrupted(14, 11, 2, 0.0, 2);
    let ones = MaskMatrix::ones(14, 11).unwrap();
    let cfg = SolverConfig::new(2).with_seed(3).with_max_sweeps(25);
    let (a, da) = factorize_l1(&inst.x_corrupt, &cfg).unwrap();
    let (b, db) = factorize_l1_masked(&inst.x_corrupt, &ones, &cfg).unwrap();
    assert_eq!(bits(a.u()), bits(b.u()));
    assert_eq!(da.objective_trace, db.objective_trace);
}

#[test]
fn sweep_objectives_never_increase() {
    for seed in 0..20 {
        let inst =
            corrupted(12 + seed as usize, 10, 1 + (seed as usize % 4), if seed % 2 == 0 { 0.0 } else { 0.2 }, seed);
        let cfg = SolverConfig::new(1 + (seed as usize % 4)).with_seed(seed).with_validation(true);
        let (_, diag) = if inst.has_missing() {
            factorize_l1_masked(&inst.x_corrupt, &inst.mask, &cfg).unwrap()
        } else {
            factorize_l1(&inst.x_corrupt, &cfg).unwrap()
        };
        assert!(diag.objective_trace.windows(2).all(|w| w[1] <= w[0] + 1e-9), "seed {seed}");
        assert!(diag.step_objectives.windows(2).all(|w| w[1] <= w[0] + 1e-9), "seed {seed}");
        assert_eq!(diag.step_objectives.len(), 1 + cfg.rank * diag.sweeps_run);
        assert_eq!(diag.final_objective(), diag.objective_trace.last().copied());
    }
}

#[test]
fn exact_low_rank_converges_within_500_sweeps() {
    let mut converged = 0;
    let mut recovered = 0;
    for seed in 0..10 {
        let (x, _) = synth::gen_lowrank(20, 20, 2, seed).unwrap();
        let cfg = SolverConfig::new(2).with_seed(seed + 100).with_max_sweeps(500);
        let (f, diag) = factorize_l1(&x, &cfg).unwrap();
        converged += usize::from(diag.converged);
        // The default tolerance bounds the change in U, which leaves
        // errors around 1e-5 rather than machine precision.
        if rel_frob_error(&x, &f).unwrap() < 1e-3 {
            recovered += 1;
            assert!(objective_l1(&x, &f).unwrap() < 1e-3 * x.l1_norm());
        }
    }
    assert_eq!(converged, 10);
    assert_eq!(recovered, 10);
}

#[test]
fn l1_beats_l2_under_outliers() {
    let inst = corrupted(30, 30, 3, 0.0, 12);
    let cfg = SolverConfig::new(3).with_seed(12);
    let (l1, _) = factorize_l1(&inst.x_corrupt, &cfg).unwrap();
    let (l2, _) = factorize_l2_als(&inst.x_corrupt, &cfg).unwrap();
    let e1 = rel_frob_error(&inst.x_true, &l1).unwrap();
    let e2 = rel_frob_error(&inst.x_true, &l2).unwrap();
    assert!(e2 >= 10.0 * e1, "l1 {e1} l2 {e2}");
}

#[test]
fn invalid_configurations_are_rejected() {
    let (x, _) = synth::gen_lowrank(5, 4, 1, 0).unwrap();
    assert!(factorize_l1(&x, &SolverConfig::new(0)).is_err());
    assert!(factorize_l1(&x, &SolverConfig::new(5)).is_err());
    assert!(factorize_l1(&x, &SolverConfig::new(1).with_tol(-1.0)).is_err());
    assert!(factorize_l1(&x, &SolverConfig::new(1).with_max_sweeps(0)).is_err());
    let w = MaskMatrix::ones(4, 5).unwrap();
    assert!(factorize_l1_masked(&x, &w, &SolverConfig::new(1)).is_err());
}
