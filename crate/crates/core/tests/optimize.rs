use bass_core::data::{generate_phantom_dataset, Phantom, PhantomConfig};
use bass_core::objective::*;
use bass_core::optimize::*;
use bass_core::recon::*;
use bass_core::sampling::*;
use bass_core::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn phantom(n: usize, nc: usize, items: usize, seed: u64) -> Phantom {
    generate_phantom_dataset(&PhantomConfig::new(n, n, 1, nc, items).with_seed(seed)).unwrap()
}

fn zero_fill(ph: &Phantom) -> Box<dyn Reconstructor> {
    build_reconstructor(
        &ReconConfig::new(ReconMethod::ZeroFill),
        &ph.sensitivities,
        &ph.dataset.grid(),
    )
    .unwrap()
}

fn centre(grid: KSpaceGrid, w: usize) -> SamplingPattern {
    let locked = CalibrationRegion::new(w, w).points(&grid);
    SamplingPattern::new(grid, locked.clone(), locked).unwrap()
}

/// All size-`m` supersets of the DC point on a 4×4 grid.
fn exhaustive_optimum(objective: &Objective, grid: KSpaceGrid, m: usize) -> f64 {
    let n = grid.n_points();
    let mut best = f64::INFINITY;
    let mut count = 0;
    for mask in 0u32..(1 << (n - 1)) {
        if mask.count_ones() as usize != m - 1 {
            continue;
        }
        let members = std::iter::once(0).chain((1..n).filter(|k| mask & (1 << (k - 1)) != 0));
        let p = SamplingPattern::new(grid, members, [0]).unwrap();
        best = best.min(objective.evaluate(&p, Criterion::Kspace).unwrap().value);
        count += 1;
    }
    assert_eq!(count, 455);
    best
}

#[test]
fn identity_oracle_keeps_zero_cost() {
    let ph = phantom(8, 2, 2, 1);
    let oracle = ReferenceOracle::new(&ph.dataset);
    let obj = Objective::new(&ph.dataset, &oracle);
    let init = generate(
        &GeneratorConfig::new(GeneratorKind::UniformRandom, 20)
            .with_seed(2)
            .with_calibration(CalibrationRegion::new(2, 2)),
        &ph.dataset.grid(),
    )
    .unwrap();
    let out = bass_run(init, &BassConfig::new(20, 15, 4).with_seed(3), &obj).unwrap();
    assert!(out.trace().iter().all(|r| r.f == 0.0 && r.accepted));
    assert_eq!(out.value, 0.0);
}

#[test]
fn grows_from_locked_centre_in_three_steps() {
    let ph = phantom(16, 1, 2, 4);
    let recon = zero_fill(&ph);
    let obj = Objective::new(&ph.dataset, recon.as_ref());
    let init = centre(ph.dataset.grid(), 2);
    assert_eq!(init.len(), 4);
    let out = bass_run(init, &BassConfig::new(24, 4, 8).with_seed(5), &obj).unwrap();
    let sizes: Vec<usize> = out.trace().iter().map(|r| r.size).collect();
    assert_eq!(sizes, vec![4, 12, 20, 24]);
    assert_eq!(out.pattern.len(), 24);
}

#[test]
fn size_approaches_target_and_stays() {
    let ph = phantom(8, 2, 2, 6);
    let recon = zero_fill(&ph);
    let obj = Objective::new(&ph.dataset, recon.as_ref());
    for (start, m) in [(10, 30), (50, 20)] {
        let init = generate(
            &GeneratorConfig::new(GeneratorKind::VariableDensity, start)
                .with_seed(7)
                .with_calibration(CalibrationRegion::new(2, 2)),
            &ph.dataset.grid(),
        )
        .unwrap();
        let out = bass_run(init, &BassConfig::new(m, 30, 4).with_seed(8), &obj).unwrap();
        let mut current = start;
        for row in out.trace().iter().skip(1) {
            if current != m {
                assert!(row.size.abs_diff(m) < current.abs_diff(m));
                assert!(row.accepted);
            } else {
                assert_eq!(row.size, m);
            }
            if row.accepted {
                current = row.size;
            }
        }
        assert_eq!(current, m);
        assert_eq!(out.pattern.len(), m);
    }
}

#[test]
fn one_call_batch_per_iteration_and_deterministic() {
    let ph = phantom(8, 2, 3, 9);
    let recon = zero_fill(&ph);
    let obj = Objective::new(&ph.dataset, recon.as_ref());
    let init = generate(
        &GeneratorConfig::new(GeneratorKind::PoissonDisk, 16)
            .with_seed(10)
            .with_calibration(CalibrationRegion::new(2, 2)),
        &ph.dataset.grid(),
    )
    .unwrap();
    let cfg = BassConfig::new(16, 25, 3).with_seed(11);
    let a = bass_run(init.clone(), &cfg, &obj).unwrap();
    let b = bass_run(init, &cfg, &obj).unwrap();
    assert_eq!(a.trace(), b.trace());
    assert_eq!(a.pattern, b.pattern);
    for (i, row) in a.trace().iter().enumerate() {
        assert_eq!(row.recon_calls_cum, 3 * (i as u64 + 1));
    }
}

#[test]
fn reaches_exhaustive_optimum_on_toy() {
    let ph = phantom(4, 1, 1, 12);
    let recon = zero_fill(&ph);
    let obj = Objective::new(&ph.dataset, recon.as_ref());
    let grid = ph.dataset.grid();
    let optimum = exhaustive_optimum(&obj, grid, 4);
    let init = SamplingPattern::new(grid, [0], [0]).unwrap();
    let mut cfg = BassConfig::new(4, 300, 2).with_seed(13);
    cfg.alpha = 0.5;
    let out = bass_run(init.clone(), &cfg, &obj).unwrap();
    assert!(
        out.value <= optimum * 1.05 + 1e-15,
        "{} vs {optimum}",
        out.value
    );
    assert!(out.pattern.is_locked(0));

    // head-to-head with the same budget of 300 evaluations
    let poss = poss_run(
        init,
        &PossConfig {
            m: 4,
            iterations: 300,
            seed: 13,
            criterion: Criterion::Kspace,
        },
        &obj,
    )
    .unwrap();
    assert_eq!(poss.recon_calls, 300);
    assert!(poss.value >= out.value);
    assert!(poss.value >= optimum);
}

fn random_dataset(grid: KSpaceGrid, items: usize, seed: u64) -> (Dataset, CoilSensitivities) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = || C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    let items = (0..items)
        .map(|_| {
            MultiCoilKSpace::from_values(
                grid,
                (0..grid.n_points() * grid.nc).map(|_| c()).collect(),
            )
            .unwrap()
        })
        .collect();
    let sens = CoilSensitivities::new(
        grid.nx,
        grid.ny,
        grid.nc,
        (0..grid.nx * grid.ny * grid.nc).map(|_| c()).collect(),
    )
    .unwrap();
    (Dataset::new(items).unwrap(), sens)
}

#[test]
fn greedy_step_matches_brute_force() {
    let grid = KSpaceGrid::new(2, 2, 1, 2).unwrap();
    let (dataset, sens) = random_dataset(grid, 3, 14);
    let recon =
        build_reconstructor(&ReconConfig::new(ReconMethod::ZeroFill), &sens, &grid).unwrap();
    let obj = Objective::new(&dataset, recon.as_ref());
    let init = SamplingPattern::new(grid, [0], []).unwrap();
    let brute = (1..4)
        .map(|k| {
            (
                k,
                obj.evaluate(
                    &SamplingPattern::new(grid, [0, k], []).unwrap(),
                    Criterion::Kspace,
                )
                .unwrap()
                .value,
            )
        })
        .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
        .unwrap();
    for lazy in [false, true] {
        let out = greedy_forward(
            init.clone(),
            &GreedyConfig {
                m: 2,
                lazy,
                criterion: Criterion::Kspace,
                max_recon_calls: None,
            },
            &obj,
        )
        .unwrap();
        assert_eq!(out.pattern.members(), &[0, brute.0]);
        assert_eq!(out.value, Some(brute.1));
    }
}

#[test]
fn greedy_call_accounting() {
    let ph = phantom(4, 1, 2, 15);
    let recon = zero_fill(&ph);
    let obj = Objective::new(&ph.dataset, recon.as_ref());
    let grid = ph.dataset.grid();

    let out = greedy_forward(
        SamplingPattern::empty(grid),
        &GreedyConfig {
            m: 1,
            lazy: false,
            criterion: Criterion::Kspace,
            max_recon_calls: None,
        },
        &obj,
    )
    .unwrap();
    assert_eq!(out.recon_calls, 16 * 2);

    let init = SamplingPattern::new(grid, [0, 5], [0]).unwrap();
    let out = greedy_forward(
        init.clone(),
        &GreedyConfig {
            m: 2,
            lazy: true,
            criterion: Criterion::Kspace,
            max_recon_calls: None,
        },
        &obj,
    )
    .unwrap();
    assert_eq!(out.recon_calls, 0);
    assert_eq!(out.pattern, init);
    assert_eq!(out.value, None);
}

#[test]
fn poss_with_identity_oracle_accepts_everything() {
    let ph = phantom(8, 2, 2, 16);
    let oracle = ReferenceOracle::new(&ph.dataset);
    let obj = Objective::new(&ph.dataset, &oracle);
    let init = generate(
        &GeneratorConfig::new(GeneratorKind::UniformRandom, 16)
            .with_seed(17)
            .with_calibration(CalibrationRegion::new(2, 2)),
        &ph.dataset.grid(),
    )
    .unwrap();
    let out = poss_run(
        init,
        &PossConfig {
            m: 16,
            iterations: 40,
            seed: 18,
            criterion: Criterion::Kspace,
        },
        &obj,
    )
    .unwrap();
    assert_eq!(out.trace.len(), 40);
    for (i, row) in out.trace.iter().enumerate() {
        assert!(row.accepted && row.f == 0.0 && row.size == 16);
        assert_eq!(row.recon_calls_cum, 2 * (i as u64 + 1));
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn step_invariants(seed in 0u64..1000, m in 12usize..40, k in 1usize..6, start in 4usize..50) {
        let ph = phantom(8, 2, 2, seed);
        let recon = zero_fill(&ph);
        let obj = Objective::new(&ph.dataset, recon.as_ref());
        let grid = ph.dataset.grid();
        let gen = GeneratorConfig::new(GeneratorKind::UniformRandom, start).with_seed(seed).with_calibration(CalibrationRegion::new(2, 2));
        let init = generate(&gen, &grid).unwrap();
        let locked: Vec<usize> = init.locked().to_vec();
        let cfg = BassConfig::new(m, 10 + m.abs_diff(start), k).with_seed(seed);
        let mut state = OptimizerState::initialize(init, &cfg, &obj).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut last_at_m: Option<f64> = None;
        for _ in 1..cfg.iterations {
            let before = state.pattern.len();
            bass_step(&mut state, &cfg, &obj, &mut rng).unwrap();
            prop_assert!(locked.iter().all(|&p| state.pattern.contains(p)));
            prop_assert!(state.k >= 1 && state.k <= k);
            if before != m {
                prop_assert!(state.pattern.len().abs_diff(m) < before.abs_diff(m));
            }
            let row = state.trace.last().unwrap();
            if row.accepted && row.size == m {
                if let Some(prev) = last_at_m {
                    prop_assert!(row.f <= prev);
                }
                last_at_m = Some(row.f);
            }
        }
        prop_assert_eq!(state.trace.len(), cfg.iterations);
        let best = state.best.as_ref().unwrap();
        prop_assert_eq!(best.0.len(), m);
        prop_assert!(state.trace.iter().filter(|r| r.size == m).all(|r| r.f >= best.1));
    }
}

#[test]
fn greedy_stops_at_budget() {
    let ph = phantom(4, 1, 2, 19);
    let recon = zero_fill(&ph);
    let obj = Objective::new(&ph.dataset, recon.as_ref());
    let init = SamplingPattern::new(ph.dataset.grid(), [0], [0]).unwrap();
    let cfg = GreedyConfig {
        m: 8,
        lazy: false,
        criterion: Criterion::Kspace,
        max_recon_calls: Some(40),
    };
    let out = greedy_forward(init, &cfg, &obj).unwrap();
    // 15 + 14 candidates at 2 calls each: the budget is crossed during the second step
    assert_eq!(out.trace.len(), 2);
    assert_eq!(out.recon_calls, 58);
    assert_eq!(out.pattern.len(), 3);
}
