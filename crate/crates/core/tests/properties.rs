mod common;

use common::*;
use msibm::codec::{
    decode_pfm_samples, decode_pnm, encode_disparity_pgm, encode_pfm_samples, encode_pgm, Endian,
};
use msibm::cost::LevelCost;
use msibm::matcher::{selective_median, select_with_prior, upsample_prior};
use msibm::pyramid::{gaussian_downsample, level_block, level_d_max};
use msibm::{match_coarsest, refine_level, CostMap, DisparityMap, GrayImage, SignConvention};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn fixture(seed: u64) -> (GrayImage, GrayImage, usize, usize, SignConvention) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = rng.gen_range(8..28);
    let h = rng.gen_range(8..28);
    let half = rng.gen_range(1..=2);
    let d_max = rng.gen_range(1..=8);
    let sign = if rng.gen() { SignConvention::MiddleburyMinus } else { SignConvention::PaperPlus };
    let flat = rng.gen_bool(0.5);
    let left = random_image(&mut rng, w, h, flat);
    let shift = rng.gen_range(0..=d_max);
    let right = shifted_right(&mut rng, &left, shift, sign, 0.2);
    (left, right, half, d_max, sign)
}

fn random_maps(seed: u64, w: usize, h: usize, d_max: usize) -> (DisparityMap, CostMap) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = DisparityMap::new(w, h, (0..w * h).map(|_| rng.gen_range(0..=d_max) as f32).collect()).unwrap();
    let c = CostMap::new(w, h, (0..w * h).map(|_| rng.gen_range(-1.0..=1.0)).collect()).unwrap();
    (d, c)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn refinement_leaves_confident_pixels_alone(seed in any::<u64>(), alpha in 0.05f64..0.95) {
        let (l, r, half, d_max, sign) = fixture(seed);
        let cost = LevelCost::new(&l, &r, half, d_max, sign, 1e-6);
        let (d, c) = random_maps(seed ^ 1, l.width(), l.height(), d_max);
        let (rd, rc) = refine_level(&cost, &d, &c, alpha).unwrap();
        for k in 0..d.as_slice().len() {
            if c.as_slice()[k] > alpha {
                prop_assert_eq!(rd.as_slice()[k].to_bits(), d.as_slice()[k].to_bits());
                prop_assert_eq!(rc.as_slice()[k].to_bits(), c.as_slice()[k].to_bits());
            } else {
                prop_assert!((0.0..=d_max as f32).contains(&rd.as_slice()[k]));
                prop_assert!((-1.0..=1.0).contains(&rc.as_slice()[k]));
            }
        }
    }

    #[test]
    fn median_output_comes_from_the_window(seed in any::<u64>(), alpha in 0.05f64..0.95) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (w, h) = (rng.gen_range(1..14), rng.gen_range(1..14));
        let (d, c) = random_maps(seed, w, h, 9);
        let (out, stats) = selective_median(&d, &c, alpha).unwrap();
        prop_assert_eq!(bits32(out.as_slice()), bits32(&naive_selective_median(&d, &c, alpha)));
        let candidates = c.as_slice().iter().filter(|&&v| v <= alpha).count() as u64;
        prop_assert_eq!(stats.candidates, candidates);
        prop_assert!(stats.changed <= candidates);
    }

    #[test]
    fn trusted_pixels_stay_in_their_window(seed in any::<u64>(), beta in 0.1f64..0.9) {
        let (l, r, half, d_max, sign) = fixture(seed);
        let cost = LevelCost::new(&l, &r, half, d_max, sign, 1e-6);
        let (d_hat, c_hat) = random_maps(seed ^ 2, l.width(), l.height(), d_max);
        let (d, _) = select_with_prior(&cost, &d_hat, &c_hat, beta).unwrap();

        let mut expected = 0u64;
        for k in 0..d.as_slice().len() {
            if c_hat.as_slice()[k] > beta {
                let center = d_hat.as_slice()[k] as i64;
                let lo = (center - 1).max(0);
                let hi = (center + 1).min(d_max as i64);
                expected += (hi - lo + 1) as u64;
                let got = d.as_slice()[k] as i64;
                prop_assert!(got >= lo && got <= hi);
            } else {
                expected += d_max as u64 + 1;
            }
        }
        prop_assert_eq!(cost.evaluations(), expected);
    }

    #[test]
    fn coarse_search_matches_oracle(seed in any::<u64>()) {
        let (l, r, half, d_max, sign) = fixture(seed);
        let cost = LevelCost::new(&l, &r, half, d_max, sign, 1e-6);
        let (d, _) = match_coarsest(&cost);
        let (od, _) = naive_full_search(&l, &r, half, d_max, sign, 1e-6);
        prop_assert_eq!(bits32(d.as_slice()), bits32(&od));
    }

    #[test]
    fn downsampling_halves_and_preserves_constants(w in 2usize..40, h in 2usize..40, v in 0.0f64..1.0) {
        let img = GrayImage::constant(w, h, v).unwrap();
        let out = gaussian_downsample(&img).unwrap();
        prop_assert_eq!(out.dims(), (w.div_ceil(2), h.div_ceil(2)));
        for &x in out.as_slice() {
            prop_assert!((x - v).abs() < 1e-12);
        }
    }

    #[test]
    fn level_schedule_is_valid(d in 1u32..500, b in 1u32..40, k in 0u32..6) {
        let block = 2 * b + 1;
        prop_assert!(level_d_max(d, k) >= 1);
        let bk = level_block(block, k);
        prop_assert!(bk >= 3 && bk % 2 == 1 && bk <= block.max(3));
    }

    #[test]
    fn upsampling_constant_prior(cw in 1usize..12, ch in 1usize..12, dv in 0u32..30, cv in -1.0f64..1.0, odd_w: bool, odd_h: bool) {
        let d = DisparityMap::filled(cw, ch, dv as f32).unwrap();
        let c = CostMap::filled(cw, ch, cv).unwrap();
        let target = (2 * cw - usize::from(odd_w), 2 * ch - usize::from(odd_h));
        let (ud, uc) = upsample_prior(&d, &c, target).unwrap();
        prop_assert_eq!(ud.dims(), target);
        prop_assert!(ud.as_slice().iter().all(|&x| x == 2.0 * dv as f32));
        prop_assert!(uc.as_slice().iter().all(|&x| x == cv));
    }

    #[test]
    fn pfm_roundtrip_both_endians(w in 1usize..20, h in 1usize..20, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v: Vec<f32> = (0..w * h).map(|_| f32::from_bits(rng.gen::<u32>())).collect();
        for endian in [Endian::Little, Endian::Big] {
            let (bw, bh, back) = decode_pfm_samples(&encode_pfm_samples(w, h, &v, endian)).unwrap();
            prop_assert_eq!((bw, bh), (w, h));
            prop_assert_eq!(bits32(&back), bits32(&v));
        }
    }

    #[test]
    fn pgm_roundtrip_quantized(w in 1usize..20, h in 1usize..20, seed in any::<u64>(), wide: bool) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let maxval: u16 = if wide { 65535 } else { 255 };
        let img = GrayImage::from_fn(w, h, |_, _| rng.gen_range(0..=u32::from(maxval)) as f64 / f64::from(maxval)).unwrap();
        prop_assert_eq!(decode_pnm(&encode_pgm(&img, maxval).unwrap()).unwrap(), img);
    }

    #[test]
    fn disparity_preview_scales_to_maxval(w in 1usize..10, h in 1usize..10, d_max in 1u32..100, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = DisparityMap::new(w, h, (0..w * h).map(|_| rng.gen_range(0..=d_max) as f32).collect()).unwrap();
        let back = decode_pnm(&encode_disparity_pgm(&d, d_max, 255).unwrap()).unwrap();
        for (g, &v) in back.as_slice().iter().zip(d.as_slice()) {
            let num = 2 * 255 * v as u64 + u64::from(d_max);
            let want = (num / (2 * u64::from(d_max))) as f64 / 255.0;
            prop_assert!((g - want).abs() < 1e-12);
        }
    }
}
