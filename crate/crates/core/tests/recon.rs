use bass_core::data::simulate_sensitivities;
use bass_core::recon::*;
use bass_core::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn random_image(rng: &mut ChaCha8Rng, nx: usize, ny: usize, nt: usize) -> ImageVolume {
    let v = (0..nx * ny * nt)
        .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    ImageVolume::from_values(nx, ny, nt, v).unwrap()
}

fn random_pattern(rng: &mut ChaCha8Rng, grid: KSpaceGrid, fraction: f64) -> SamplingPattern {
    let members: Vec<usize> = (0..grid.n_points())
        .filter(|_| rng.random::<f64>() < fraction)
        .chain([0])
        .collect();
    SamplingPattern::new(grid, members, []).unwrap()
}

fn encoder(nx: usize, ny: usize, nt: usize, nc: usize, seed: u64) -> Encoder {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sens = simulate_sensitivities(nx, ny, nc, 0.5, &mut rng).unwrap();
    Encoder::new(sens, nt).unwrap()
}

#[test]
fn general_sensitivities_combine_exactly() {
    let enc = encoder(12, 10, 2, 4, 1);
    let x = random_image(&mut ChaCha8Rng::seed_from_u64(2), 12, 10, 2);
    let back = enc.coil_combine(&enc.forward(&x).unwrap()).unwrap();
    for (a, b) in back.values().iter().zip(x.values()) {
        assert!((a - b).norm() < 1e-8);
    }
}

#[test]
fn gradient_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let enc = encoder(6, 5, 1, 2, 4);
    let grid = enc.grid();
    let pattern = random_pattern(&mut rng, grid, 0.5);
    let data = enc.forward(&random_image(&mut rng, 6, 5, 1)).unwrap();
    let sampled = apply_sampling(&pattern, &data).unwrap();
    let x = random_image(&mut rng, 6, 5, 1);
    let g = data_gradient(&pattern, &sampled, &enc, &x);
    let h = 1e-6;
    for i in 0..x.values().len() {
        for (dir, want) in [
            (c(1.0, 0.0), g.values()[i].re),
            (c(0.0, 1.0), g.values()[i].im),
        ] {
            let mut plus = x.clone();
            plus.values_mut()[i] += dir * h;
            let mut minus = x.clone();
            minus.values_mut()[i] -= dir * h;
            let fd = (data_fidelity(&pattern, &sampled, &enc, &plus)
                - data_fidelity(&pattern, &sampled, &enc, &minus))
                / (2.0 * h);
            assert!(
                (fd - want).abs() < 1e-6 * (1.0 + want.abs()),
                "{i}: {fd} vs {want}"
            );
        }
    }
}

#[test]
fn unregularised_full_sampling_recovers_combined_image() {
    let enc = encoder(8, 8, 1, 3, 5);
    let x = random_image(&mut ChaCha8Rng::seed_from_u64(6), 8, 8, 1);
    let data = enc.forward(&x).unwrap();
    let pattern = SamplingPattern::full(enc.grid());
    let sampled = apply_sampling(&pattern, &data).unwrap();
    let mut cfg = ReconConfig::new(ReconMethod::CsSfd)
        .with_lambda(0.0)
        .with_iterations(200);
    cfg.tolerance = 0.0;
    let out = recon_cs(&pattern, &sampled, &cfg, &enc).unwrap();
    let combined = enc.coil_combine(&data).unwrap();
    for (a, b) in out.image.values().iter().zip(combined.values()) {
        assert!((a - b).norm() < 1e-6);
    }
    assert!(*out.costs.last().unwrap() < 1e-10);
}

#[test]
fn huge_lambda_flattens_each_frame() {
    let enc = encoder(8, 8, 2, 2, 7);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let data = enc.forward(&random_image(&mut rng, 8, 8, 2)).unwrap();
    let pattern = random_pattern(&mut rng, enc.grid(), 0.6);
    let sampled = apply_sampling(&pattern, &data).unwrap();
    let lambda = 1e3 * data.norm_sqr().sqrt();
    let out = recon_cs(
        &pattern,
        &sampled,
        &ReconConfig::new(ReconMethod::CsSfd).with_lambda(lambda),
        &enc,
    )
    .unwrap();
    let scale = out
        .image
        .values()
        .iter()
        .map(|v| v.norm())
        .fold(0.0, f64::max)
        .max(1e-12);
    for t in 0..2 {
        let f = out.image.frame(t);
        let mean = f.iter().sum::<C64>() / f.len() as f64;
        for v in f {
            assert!((v - mean).norm() < 1e-6 * scale, "frame {t}: {v} vs {mean}");
        }
    }
}

/// Naive unitary DFT of an `n × n` single-coil image, index `y * n + x`.
fn dft(x: &[C64], n: usize, sign: f64) -> Vec<C64> {
    let mut out = vec![c(0.0, 0.0); n * n];
    for ky in 0..n {
        for kx in 0..n {
            let mut s = c(0.0, 0.0);
            for y in 0..n {
                for xx in 0..n {
                    let phase = sign * std::f64::consts::TAU * ((kx * xx) as f64 + (ky * y) as f64)
                        / n as f64;
                    s += x[y * n + xx] * C64::from_polar(1.0, phase);
                }
            }
            out[ky * n + kx] = s / n as f64;
        }
    }
    out
}

/// Anisotropic TV, forward differences without wrap-around.
fn tv_pairs(n: usize) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    for y in 0..n {
        for x in 0..n {
            if x + 1 < n {
                pairs.push((y * n + x, y * n + x + 1));
            }
            if y + 1 < n {
                pairs.push((y * n + x, (y + 1) * n + x));
            }
        }
    }
    pairs
}

/// Prox of `θ TV` by plain projected gradient on the dual, run to convergence.
fn tv_prox(v: &[C64], theta: f64, pairs: &[(usize, usize)]) -> Vec<C64> {
    let mut p = vec![c(0.0, 0.0); pairs.len()];
    let primal = |p: &[C64]| {
        let mut x = v.to_vec();
        for (&(a, b), q) in pairs.iter().zip(p) {
            // x = v − θ Tᵀ p with (T x)_e = x_b − x_a
            x[a] += q * theta;
            x[b] -= q * theta;
        }
        x
    };
    for _ in 0..20000 {
        let x = primal(&p);
        for (&(a, b), q) in pairs.iter().zip(p.iter_mut()) {
            let next = *q + (x[b] - x[a]) / (8.0 * theta);
            *q = if next.norm() > 1.0 {
                next / next.norm()
            } else {
                next
            };
        }
    }
    primal(&p)
}

fn toy_cost(x: &[C64], pattern: &[usize], b: &[C64], lambda: f64, pairs: &[(usize, usize)]) -> f64 {
    let k = dft(x, 4, -1.0);
    let fit: f64 = pattern
        .iter()
        .zip(b)
        .map(|(&i, b)| (k[i] - b).norm_sqr())
        .sum();
    fit + lambda
        * pairs
            .iter()
            .map(|&(a, b)| (x[b] - x[a]).norm())
            .sum::<f64>()
}

#[test]
fn toy_cs_sfd_matches_ista_oracle() {
    let n = 4;
    let grid = KSpaceGrid::new(n, n, 1, 1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let truth = random_image(&mut rng, n, n, 1);
    let enc = Encoder::new(CoilSensitivities::uniform(n, n, 1), 1).unwrap();
    let pattern = SamplingPattern::new(grid, [0, 1, 2, 4, 5, 7, 8, 10, 11, 13, 15], []).unwrap();
    let sampled = apply_sampling(&pattern, &enc.forward(&truth).unwrap()).unwrap();
    let lambda = 0.1;

    let mut cfg = ReconConfig::new(ReconMethod::CsSfd)
        .with_lambda(lambda)
        .with_iterations(3000);
    cfg.tolerance = 0.0;
    cfg.inner_iterations = 50;
    let ours = recon_cs(&pattern, &sampled, &cfg, &enc).unwrap();

    // plain ISTA with step 1/2 (the data term has Lipschitz constant 2)
    let pairs = tv_pairs(n);
    let b = sampled.values().to_vec();
    let mut x = vec![c(0.0, 0.0); n * n];
    for _ in 0..1500 {
        let k = dft(&x, n, -1.0);
        let mut r = vec![c(0.0, 0.0); n * n];
        for (&i, b) in pattern.members().iter().zip(&b) {
            r[i] = k[i] - b;
        }
        let grad = dft(&r, n, 1.0);
        let v: Vec<C64> = x.iter().zip(&grad).map(|(x, g)| x - g).collect();
        x = tv_prox(&v, lambda / 2.0, &pairs);
    }

    let want = toy_cost(&x, pattern.members(), &b, lambda, &pairs);
    let got = toy_cost(ours.image.values(), pattern.members(), &b, lambda, &pairs);
    assert!((got - want).abs() < 1e-8 * want.max(1.0), "{got} vs {want}");
    for (a, b) in ours.image.values().iter().zip(&x) {
        assert!((a - b).norm() < 1e-6, "{a} vs {b}");
    }
}

#[test]
fn cs_cost_is_monotone() {
    let enc = encoder(16, 16, 1, 2, 12);
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let data = enc.forward(&random_image(&mut rng, 16, 16, 1)).unwrap();
    let pattern = random_pattern(&mut rng, enc.grid(), 0.3);
    let sampled = apply_sampling(&pattern, &data).unwrap();
    for method in [ReconMethod::CsSfd, ReconMethod::CsLr] {
        let cfg = ReconConfig::new(method)
            .with_lambda(0.05)
            .with_iterations(50);
        let out = recon_cs(&pattern, &sampled, &cfg, &enc).unwrap();
        for w in out.costs.windows(2) {
            assert!(
                w[1] <= w[0] * (1.0 + 1e-9),
                "{method:?}: {} > {}",
                w[1],
                w[0]
            );
        }
    }
}

#[test]
fn cs_output_keeps_estimate_on_sampled_rows() {
    let enc = encoder(8, 8, 1, 2, 14);
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let data = enc.forward(&random_image(&mut rng, 8, 8, 1)).unwrap();
    let pattern = random_pattern(&mut rng, enc.grid(), 0.5);
    let sampled = apply_sampling(&pattern, &data).unwrap();
    let out = recon_cs(
        &pattern,
        &sampled,
        &ReconConfig::new(ReconMethod::CsSfd).with_lambda(0.5),
        &enc,
    )
    .unwrap();
    let re = enc.forward(&out.image).unwrap();
    assert_eq!(re.values(), out.kspace.values());
    let moved = pattern
        .members()
        .iter()
        .any(|&k| (out.kspace.get(k, 0) - data.get(k, 0)).norm() > 1e-9);
    assert!(moved);
}

fn decay_series(nt: usize) -> Vec<f64> {
    (0..nt).map(|t| 10.0 * t as f64).collect()
}

fn single_atom_data(
    enc: &Encoder,
    stamps: &[f64],
    decay: f64,
    seed: u64,
) -> (MultiCoilKSpace, ImageVolume) {
    let (nx, ny, nt) = (enc.grid().nx, enc.grid().ny, enc.grid().nt);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base: Vec<C64> = (0..nx * ny)
        .map(|_| c(rng.random_range(0.2..1.0), rng.random_range(-0.2..0.2)))
        .collect();
    let mut v = Vec::with_capacity(nx * ny * nt);
    for &t in stamps {
        v.extend(base.iter().map(|b| b * (-t / decay).exp()));
    }
    let x = ImageVolume::from_values(nx, ny, nt, v).unwrap();
    (enc.forward(&x).unwrap(), x)
}

#[test]
fn dictionary_recovers_single_atom_support() {
    let stamps = decay_series(8);
    let dcfg = DictionaryConfig::log_spaced(10.0, 200.0, 12, stamps.clone());
    let dict = Dictionary::new(&dcfg).unwrap();
    let truth_atom = 5;
    let decay = dict.decay_constants()[truth_atom];
    let enc = encoder(6, 6, 8, 2, 16);
    let (data, _) = single_atom_data(&enc, &stamps, decay, 17);
    let pattern = SamplingPattern::full(enc.grid());
    let sampled = apply_sampling(&pattern, &data).unwrap();
    let mut cfg = ReconConfig::new(ReconMethod::CsDic)
        .with_lambda(1e-3)
        .with_iterations(5000);
    cfg.tolerance = 0.0;
    let out = recon_dic(&pattern, &sampled, &cfg, &enc, &dict).unwrap();
    let u = out.coefficients.unwrap();
    let plane = 36;
    let mass = |j: usize| {
        u[j * plane..(j + 1) * plane]
            .iter()
            .map(|v| v.norm())
            .sum::<f64>()
    };
    let total: f64 = (0..dict.n_atoms()).map(mass).sum();
    let near: f64 = (truth_atom - 1..=truth_atom + 1).map(mass).sum();
    assert!(near >= 0.99 * total, "{near} of {total}");
}

#[test]
fn dictionary_huge_lambda_is_zero() {
    let stamps = decay_series(4);
    let dict = Dictionary::new(&DictionaryConfig::log_spaced(
        10.0,
        100.0,
        4,
        stamps.clone(),
    ))
    .unwrap();
    let enc = encoder(6, 6, 4, 2, 18);
    let (data, _) = single_atom_data(&enc, &stamps, 30.0, 19);
    let pattern = random_pattern(&mut ChaCha8Rng::seed_from_u64(20), enc.grid(), 0.5);
    let sampled = apply_sampling(&pattern, &data).unwrap();
    let cfg = ReconConfig::new(ReconMethod::CsDic).with_lambda(1e6);
    let out = recon_dic(&pattern, &sampled, &cfg, &enc, &dict).unwrap();
    assert!(out.coefficients.unwrap().iter().all(|v| v.norm() == 0.0));
    assert!(out.image.values().iter().all(|v| v.norm() == 0.0));
}

#[test]
fn square_dictionary_fits_exactly_without_regularisation() {
    let stamps = decay_series(4);
    let dict = Dictionary::new(&DictionaryConfig {
        decay_constants: vec![5.0, 15.0, 40.0, 120.0],
        time_stamps: stamps.clone(),
    })
    .unwrap();
    let enc = encoder(4, 4, 4, 1, 21);
    let x = random_image(&mut ChaCha8Rng::seed_from_u64(22), 4, 4, 4);
    let data = enc.forward(&x).unwrap();
    let pattern = SamplingPattern::full(enc.grid());
    let sampled = apply_sampling(&pattern, &data).unwrap();
    let mut cfg = ReconConfig::new(ReconMethod::CsDic)
        .with_lambda(0.0)
        .with_iterations(200_000);
    cfg.tolerance = 0.0;
    let out = recon_dic(&pattern, &sampled, &cfg, &enc, &dict).unwrap();
    let err = data.sub(&out.kspace).unwrap().norm_sqr().sqrt();
    assert!(err < 1e-6, "{err}");
}

#[test]
fn zero_fill_examples() {
    let enc = encoder(8, 8, 1, 3, 23);
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    let data = enc.forward(&random_image(&mut rng, 8, 8, 1)).unwrap();
    let full = SamplingPattern::full(enc.grid());
    let out = recon_zero_fill(&full, &apply_sampling(&full, &data).unwrap(), &enc).unwrap();
    assert_eq!(out.values(), data.values());

    let pattern = random_pattern(&mut rng, enc.grid(), 0.5);
    let zeros = apply_sampling(&pattern, &MultiCoilKSpace::zeros(enc.grid())).unwrap();
    let out = recon_zero_fill(&pattern, &zeros, &enc).unwrap();
    assert!(out.values().iter().all(|v| v.norm() == 0.0));
}
