use bass_core::data::*;
use bass_core::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

const GOLDEN_DATASET_SHA256: &str =
    "fb5419fd6b7739ce5bda64e4792300fb164f80d5c49e36924cf8d4cfac08c82c";

fn dataset_sha256(config: &PhantomConfig) -> String {
    let ph = generate_phantom_dataset(config).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.kspd");
    write_dataset(&path, &ph.dataset, serde_json::to_value(config).unwrap()).unwrap();
    hex::encode(Sha256::digest(std::fs::read(&path).unwrap()))
}

fn golden_config() -> PhantomConfig {
    let mut c = PhantomConfig::new(16, 12, 3, 2, 3).with_seed(2024);
    c.noise_sigma = 0.01;
    c
}

#[test]
fn fixed_seed_dataset_hash_is_stable() {
    let a = dataset_sha256(&golden_config());
    assert_eq!(a, dataset_sha256(&golden_config()));
    assert_eq!(a, GOLDEN_DATASET_SHA256);
}

#[test]
fn phantom_depends_on_seed() {
    let mut other = golden_config();
    other.seed += 1;
    assert_ne!(dataset_sha256(&golden_config()), dataset_sha256(&other));
}

#[test]
fn split_is_disjoint_and_covers() {
    let ph = generate_phantom_dataset(&PhantomConfig::new(8, 8, 1, 1, 7).with_seed(3)).unwrap();
    let (train, val) = ph.dataset.split(5).unwrap();
    assert_eq!(train.len() + val.len(), 7);
    assert_eq!(train.items(), &ph.dataset.items()[..5]);
    assert_eq!(val.items(), &ph.dataset.items()[5..]);
}

#[test]
fn truncated_and_foreign_files_are_rejected() {
    let ph = generate_phantom_dataset(&PhantomConfig::new(4, 4, 1, 1, 1).with_seed(1)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.kspd");
    write_dataset(&path, &ph.dataset, serde_json::Value::Null).unwrap();
    let bytes = std::fs::read(&path).unwrap();
    let err = decode_kspd(&bytes[..bytes.len() - 3]).unwrap_err();
    assert!(
        matches!(
            err,
            Error::TruncatedPayload {
                expected: 128,
                found: 125
            }
        ),
        "{err}"
    );
    assert!(err.to_string().contains("128") && err.to_string().contains("125"));

    let text = String::from_utf8_lossy(&bytes).replacen("KSPD1", "KSPD2", 1);
    let err = decode_kspd(text.as_bytes()).unwrap_err();
    assert!(err.to_string().starts_with("unrecognized format"), "{err}");
}

fn random_pattern(grid: KSpaceGrid, seed: u64, density: f64) -> SamplingPattern {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let members: Vec<usize> = (0..grid.n_points())
        .filter(|_| rng.random_bool(density))
        .collect();
    let locked: Vec<usize> = members
        .iter()
        .copied()
        .filter(|_| rng.random_bool(0.3))
        .collect();
    SamplingPattern::new(grid, members, locked).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn dataset_round_trip_is_bit_exact(nx in 4usize..9, ny in 4usize..9, nt in 1usize..3, nc in 1usize..3, n in 1usize..4, seed: u64) {
        let grid = KSpaceGrid::new(nx, ny, nt, nc).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // f32-representable values survive the container exactly
        let mut v = || rng.random::<f32>() as f64 * 2.0 - 1.0;
        let items: Vec<MultiCoilKSpace> = (0..n)
            .map(|_| MultiCoilKSpace::from_values(grid, (0..grid.n_points() * nc).map(|_| C64::new(v(), v())).collect()).unwrap())
            .collect();
        let dataset = Dataset::new(items).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.kspd");
        write_dataset(&path, &dataset, serde_json::json!({"seed": seed})).unwrap();
        let back = read_dataset(&path).unwrap();
        prop_assert_eq!(back.items(), dataset.items());
        let file = read_kspd(&path).unwrap();
        prop_assert_eq!(file.header.config, serde_json::json!({"seed": seed}));
        prop_assert_eq!(file.header.dims.n_items, n);
    }

    #[test]
    fn mask_round_trips(nx in 4usize..12, ny in 4usize..12, nt in 1usize..4, seed: u64, density in 0.0f64..1.0) {
        let grid = KSpaceGrid::new(nx, ny, nt, 1).unwrap();
        let p = random_pattern(grid, seed, density);
        prop_assert_eq!(&parse_mask(&render_mask(&p)).unwrap(), &p);

        let frames = mask_to_pgm(&p);
        prop_assert_eq!(frames.len(), nt);
        let mut locked = 0;
        for f in &frames {
            let (w, h, px) = decode_pgm(f).unwrap();
            prop_assert_eq!((w, h, px.len()), (nx, ny, nx * ny));
            locked += px.iter().filter(|&&b| b == 255).count();
        }
        prop_assert_eq!(locked, p.locked().len());
        prop_assert_eq!(&mask_from_pgm(&frames).unwrap(), &p);
    }
}

#[test]
fn mask_rejects_duplicates_and_out_of_range() {
    let header = r#"{"nx":4,"ny":4,"nt":1,"M":2,"locked_count":0,"locked":[]}"#;
    let err = parse_mask(&format!("{header}\n3\n3\n")).unwrap_err();
    assert!(matches!(err, Error::DuplicateIndex(3)));
    let err = parse_mask(&format!("{header}\n3\n16\n")).unwrap_err();
    assert!(matches!(err, Error::IndexOutOfRange { index: 16, len: 16 }));
}
