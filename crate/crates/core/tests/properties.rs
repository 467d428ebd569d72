//! Randomized invariants cutting across modules: quantized I/O round trips,
//! patch algebra, selection oracle equivalence and stability, and spectral
//! transfer identities.

use proptest::prelude::*;

use mamsynth::fourier::{forward_spectrum, inverse_spectrum, make_beta_mask, spectral_transfer_values};
use mamsynth::imaging::io::{load_image, save_image, BitDepth};
use mamsynth::imaging::{resample_bilinear, GrayImage, RegionSpec, SaliencyMap};
use mamsynth::region::{select_region, select_region_bruteforce};
use mamsynth::softmask::{blend, SoftMask};

fn gray_image(max_side: usize) -> impl Strategy<Value = GrayImage> {
    (1..=max_side, 1..=max_side)
        .prop_flat_map(|(h, w)| {
            proptest::collection::vec(0.0f32..=1.0, h * w)
                .prop_map(move |px| GrayImage::from_pixels(h, w, px).unwrap())
        })
}

fn saliency_map(max_side: usize) -> impl Strategy<Value = SaliencyMap> {
    (1..=max_side, 1..=max_side)
        .prop_flat_map(|(h, w)| {
            proptest::collection::vec(0.0f32..10.0, h * w)
                .prop_map(move |v| SaliencyMap::from_values(h, w, v).unwrap())
        })
}

/// Strictly positive maps: zero-padding shifts cannot create new ties.
fn positive_map(max_side: usize) -> impl Strategy<Value = SaliencyMap> {
    (4..=max_side, 4..=max_side)
        .prop_flat_map(|(h, w)| {
            proptest::collection::vec(0.01f32..1.0, h * w)
                .prop_map(move |v| SaliencyMap::from_values(h, w, v).unwrap())
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn png_round_trip_stays_within_one_step(img in gray_image(12), sixteen in any::<bool>()) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("img.png");
        let (depth, step) = if sixteen {
            (BitDepth::Sixteen, 1.0 / 65535.0f64)
        } else {
            (BitDepth::Eight, 1.0 / 255.0f64)
        };
        save_image(&img, &path, depth).unwrap();
        let back = load_image(&path).unwrap();
        prop_assert_eq!((back.height(), back.width()), (img.height(), img.width()));
        for (a, b) in img.pixels().iter().zip(back.pixels()) {
            prop_assert!(((*a as f64) - (*b as f64)).abs() <= step + 1e-9);
        }
    }

    #[test]
    fn extract_paste_round_trip_is_identity(
        img in gray_image(16),
        top_frac in 0.0f64..1.0,
        left_frac in 0.0f64..1.0,
        h_frac in 0.0f64..1.0,
        w_frac in 0.0f64..1.0,
    ) {
        let height = 1 + (h_frac * (img.height() - 1) as f64) as usize;
        let width = 1 + (w_frac * (img.width() - 1) as f64) as usize;
        let top = (top_frac * (img.height() - height) as f64) as usize;
        let left = (left_frac * (img.width() - width) as f64) as usize;
        let region = RegionSpec::new(top, left, height, width);
        let patch = img.extract_patch(&region).unwrap();
        let back = img.paste_patch(&patch, top, left).unwrap();
        prop_assert_eq!(back, img);
    }

    #[test]
    fn resample_stays_within_input_extremes(
        map in saliency_map(10),
        new_h in 1usize..24,
        new_w in 1usize..24,
    ) {
        let out = resample_bilinear(&map, new_h, new_w).unwrap();
        let lo = map.values().iter().cloned().fold(f32::INFINITY, f32::min);
        let hi = map.values().iter().cloned().fold(f32::NEG_INFINITY, f32::max);
        for &v in out.values() {
            prop_assert!(v >= lo && v <= hi);
        }
    }

    #[test]
    fn selection_matches_bruteforce(
        map in saliency_map(24),
        rh_frac in 0.0f64..1.0,
        rw_frac in 0.0f64..1.0,
    ) {
        let rh = 1 + (rh_frac * (map.height() - 1) as f64) as usize;
        let rw = 1 + (rw_frac * (map.width() - 1) as f64) as usize;
        let fast = select_region(&map, rh, rw).unwrap();
        let brute = select_region_bruteforce(&map, rh, rw).unwrap();
        prop_assert_eq!((fast.region.top, fast.region.left), (brute.region.top, brute.region.left));
        prop_assert!((fast.score - brute.score).abs() <= 1e-6);
    }

    #[test]
    fn selection_is_stable_under_inside_increase(
        map in saliency_map(16),
        delta in 0.01f32..5.0,
        cell_frac in 0.0f64..1.0,
    ) {
        prop_assume!(map.height() >= 3 && map.width() >= 3);
        let rh = (map.height() / 2).max(1);
        let rw = (map.width() / 2).max(1);
        let before = select_region(&map, rh, rw).unwrap();
        let r = before.region;
        // Raise one cell inside the winning region.
        let cell = (cell_frac * (r.area() - 1) as f64) as usize;
        let (di, dj) = (cell / r.width, cell % r.width);
        let mut values = map.values().to_vec();
        values[(r.top + di) * map.width() + (r.left + dj)] += delta;
        let bumped = SaliencyMap::from_values(map.height(), map.width(), values).unwrap();
        let after = select_region(&bumped, rh, rw).unwrap();
        prop_assert_eq!((after.region.top, after.region.left), (r.top, r.left));
    }

    #[test]
    fn selection_is_translation_equivariant(
        map in positive_map(14),
        di in 0usize..4,
        dj in 0usize..4,
    ) {
        let rh = 3.min(map.height());
        let rw = 3.min(map.width());
        let base = select_region_bruteforce(&map, rh, rw).unwrap();
        // Optimum must stay in bounds after the shift.
        prop_assume!(base.region.top + di + rh <= map.height());
        prop_assume!(base.region.left + dj + rw <= map.width());
        // And it must strictly dominate every other placement.
        let mut second_best = f64::NEG_INFINITY;
        for i in 0..=map.height() - rh {
            for j in 0..=map.width() - rw {
                if (i, j) == (base.region.top, base.region.left) {
                    continue;
                }
                let r = RegionSpec::new(i, j, rh, rw);
                let s = mamsynth::region::region_intensity_naive(&map, &r).unwrap();
                second_best = second_best.max(s);
            }
        }
        prop_assume!(base.score > second_best + 1e-6);

        let (h, w) = (map.height(), map.width());
        let mut shifted = vec![0.0f32; h * w];
        for i in 0..h {
            for j in 0..w {
                if i >= di && j >= dj {
                    shifted[i * w + j] = map.get(i - di, j - dj);
                }
            }
        }
        let shifted = SaliencyMap::from_values(h, w, shifted).unwrap();
        let moved = select_region(&shifted, rh, rw).unwrap();
        prop_assert_eq!(
            (moved.region.top, moved.region.left),
            (base.region.top + di, base.region.left + dj)
        );
    }

    #[test]
    fn spectral_round_trip_is_identity(patch in gray_image(20)) {
        let back = inverse_spectrum(&forward_spectrum(&patch)).unwrap();
        for (a, b) in patch.pixels().iter().zip(back.pixels()) {
            prop_assert!((a - b).abs() <= 1e-5);
        }
    }

    #[test]
    fn spectral_parseval_identity(patch in gray_image(20)) {
        let spec = forward_spectrum(&patch);
        let spatial: f64 = patch.pixels().iter().map(|&p| (p as f64).powi(2)).sum();
        let spectral: f64 = spec.amplitude().iter().map(|&a| a * a).sum::<f64>()
            / (patch.height() * patch.width()) as f64;
        prop_assert!((spatial - spectral).abs() <= 1e-4 * spatial.max(1e-12));
    }

    #[test]
    fn transfer_moves_mean_to_target(
        pair in (2usize..16, 2usize..16).prop_flat_map(|(h, w)| {
            (
                proptest::collection::vec(0.0f32..=1.0, h * w),
                proptest::collection::vec(0.0f32..=1.0, h * w),
                Just(h),
                Just(w),
            )
        }),
        beta in 0.0f64..0.5,
    ) {
        let (src, tgt, h, w) = pair;
        let source = GrayImage::from_pixels(h, w, src).unwrap();
        let target = GrayImage::from_pixels(h, w, tgt).unwrap();
        let mask = make_beta_mask(h, w, beta).unwrap();
        let raw = spectral_transfer_values(&source, &target, &mask).unwrap();
        let mean = raw.iter().sum::<f64>() / raw.len() as f64;
        prop_assert!((mean - target.mean()).abs() <= 1e-4);
    }

    #[test]
    fn blend_is_convex_and_complementary(
        triple in (1usize..10, 1usize..10).prop_flat_map(|(h, w)| {
            (
                proptest::collection::vec(0.0f32..=1.0, h * w),
                proptest::collection::vec(0.0f32..=1.0, h * w),
                proptest::collection::vec(0.0f64..=1.0, h * w),
                Just(h),
                Just(w),
            )
        }),
    ) {
        let (src, tgt, weights, h, w) = triple;
        let source = GrayImage::from_pixels(h, w, src).unwrap();
        let target = GrayImage::from_pixels(h, w, tgt).unwrap();
        let mask = SoftMask::from_weights(h, w, weights).unwrap();
        let ab = blend(&source, &target, &mask).unwrap();
        let ba = blend(&target, &source, &mask).unwrap();
        for k in 0..h * w {
            let (s, t) = (source.pixels()[k], target.pixels()[k]);
            let o = ab.pixels()[k];
            prop_assert!(o >= s.min(t) && o <= s.max(t));
            let sum = ab.pixels()[k] as f64 + ba.pixels()[k] as f64;
            prop_assert!((sum - (s as f64 + t as f64)).abs() <= 1e-6);
        }
    }
}
