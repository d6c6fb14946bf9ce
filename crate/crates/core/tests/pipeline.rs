mod common;

use std::path::Path;

use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::Rng;
use sparsedict::denoise::image::{decode_pgm, encode_pgm};
use sparsedict::denoise::patches::cover_counts;
use sparsedict::denoise::{
    add_gaussian_noise, denoise_image, extract_patches, overcomplete_dct, reconstruct_from_patches,
    DenoiseConfig, GrayImage,
};
use sparsedict::io::{self, DATA_MAGIC, DICT_MAGIC};
use sparsedict::metrics::psnr;
use sparsedict::synthesis::SyntheticSpec;
use sparsedict::TrainingSet;

fn random_image(seed: u64, w: usize, h: usize) -> GrayImage {
    let mut r = common::rng(seed);
    GrayImage::from_fn(w, h, |_, _| r.random_range(0.0..255.0)).unwrap()
}

#[test]
fn patch_count_and_cover_map() {
    let img = random_image(1, 256, 256);
    assert_eq!(extract_patches(&img, 8, 1).unwrap().len(), 249 * 249);
    let counts = cover_counts(256, 256, 8, 1).unwrap();
    assert_eq!(counts[100 * 256 + 100], 64);
    assert_eq!(counts[0], 1);
}

#[test]
fn whole_image_patch_is_the_vectorized_image() {
    let img = random_image(2, 5, 5);
    let patches = extract_patches(&img, 5, 1).unwrap();
    assert_eq!(patches.len(), 1);
    for j in 0..5 {
        for i in 0..5 {
            assert_eq!(patches.matrix()[(i + 5 * j, 0)], img.get(i, j));
        }
    }
}

#[test]
fn two_cover_mean() {
    // 3x2 image, 2x2 patches at columns 0 and 1 share the middle column.
    let mut patches = DMatrix::zeros(4, 2);
    patches.column_mut(0).fill(10.0);
    patches.column_mut(1).fill(20.0);
    let img = reconstruct_from_patches(&TrainingSet::new(patches), 3, 2, 2, 1).unwrap();
    assert_eq!(img.get(0, 0), 10.0);
    assert_eq!(img.get(1, 1), 15.0);
    assert_eq!(img.get(0, 2), 20.0);
}

#[test]
fn reconstruction_rejects_grid_mismatch() {
    let patches = TrainingSet::new(DMatrix::zeros(4, 3));
    assert!(reconstruct_from_patches(&patches, 3, 2, 2, 1).is_err());
}

#[test]
fn dct_atom_image_is_its_own_denoising() {
    let d = overcomplete_dct(8, 256).unwrap();
    let atom = d.atom(37);
    let img = GrayImage::from_fn(8, 8, |r, c| 128.0 + 100.0 * atom[r + 8 * c]).unwrap();
    let out = denoise_image(&img, &d, &DenoiseConfig::new(0.0)).unwrap();
    for (a, b) in out.pixels().iter().zip(img.pixels()) {
        assert!((a - b).abs() < 1e-9);
    }
}

#[test]
fn constant_image_gains_ten_db() {
    let clean = GrayImage::filled(64, 64, 128.0).unwrap();
    let noisy = add_gaussian_noise(&clean, 25.0, 3).unwrap();
    let d = overcomplete_dct(8, 256).unwrap();
    let out = denoise_image(&noisy, &d, &DenoiseConfig::new(25.0)).unwrap();
    let (before, after) = (psnr(&clean, &noisy).unwrap(), psnr(&clean, &out).unwrap());
    assert!(after >= before + 10.0, "{before} -> {after}");
}

#[test]
fn noise_psnr_matches_sigma() {
    let clean = random_image(4, 512, 512);
    for (sigma, want) in [(25.0, 20.17), (10.0, 28.13)] {
        let noisy = add_gaussian_noise(&clean, sigma, 9).unwrap();
        let got = psnr(&clean, &noisy).unwrap();
        assert!((got - want).abs() < 0.1, "sigma {sigma}: {got}");
    }
    assert_eq!(add_gaussian_noise(&clean, 0.0, 9).unwrap(), clean);
}

#[test]
fn pgm_payload_and_clamp() {
    let one = GrayImage::filled(1, 1, 128.0).unwrap();
    let bytes = encode_pgm(&one);
    assert_eq!(*bytes.last().unwrap(), 0x80);
    let hot = GrayImage::filled(1, 1, 255.7).unwrap();
    let back = decode_pgm(&encode_pgm(&hot), Path::new("mem")).unwrap();
    assert_eq!(back.get(0, 0), 255.0);
    assert!(decode_pgm(b"P5\n1 1\n65535\n\0\0", Path::new("mem")).is_err());
    assert!(decode_pgm(b"P2\n1 1\n255\n0", Path::new("mem")).is_err());
}

#[test]
fn container_files_round_trip_bit_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let spec = SyntheticSpec {
        dim: 9,
        atoms: 14,
        signals: 50,
        sparsity: 3,
        seed: 5,
    };
    let (d, y, x) = spec.generate().unwrap();
    io::write_dictionary(dir.path().join("d"), &d).unwrap();
    io::write_training_set(dir.path().join("y"), &y).unwrap();
    io::write_codes(dir.path().join("x"), &x).unwrap();
    let d2 = io::read_dictionary(dir.path().join("d")).unwrap();
    let y2 = io::read_training_set(dir.path().join("y")).unwrap();
    assert!(d2.matrix().iter().zip(d.matrix().iter()).all(|(a, b)| a.to_bits() == b.to_bits()));
    assert!(y2.matrix().iter().zip(y.matrix().iter()).all(|(a, b)| a.to_bits() == b.to_bits()));
    assert_eq!(io::read_codes(dir.path().join("x")).unwrap(), x);

    // A data file is not a dictionary.
    assert!(io::read_dictionary(dir.path().join("y")).is_err());
    let err = io::read_dictionary(dir.path().join("missing")).unwrap_err();
    assert!(err.to_string().contains("missing"));
    assert_ne!(DICT_MAGIC, DATA_MAGIC);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn extract_then_reconstruct_is_identity(seed in any::<u64>(), w in 4usize..30, h in 4usize..30, p in 1usize..5, stride in 1usize..5) {
        let stride = stride.min(p);
        let img = random_image(seed, w, h);
        let patches = extract_patches(&img, p, stride).unwrap();
        let back = reconstruct_from_patches(&patches, w, h, p, stride).unwrap();
        for (a, b) in back.pixels().iter().zip(img.pixels()) {
            prop_assert!((a - b).abs() <= 1e-10);
        }
    }

    #[test]
    fn integer_images_survive_pgm(seed in any::<u64>(), w in 1usize..20, h in 1usize..20) {
        let mut r = common::rng(seed);
        let img = GrayImage::from_fn(w, h, |_, _| r.random_range(0u32..256) as f64).unwrap();
        let bytes = encode_pgm(&img);
        prop_assert_eq!(decode_pgm(&bytes, Path::new("mem")).unwrap(), img);
    }
}
