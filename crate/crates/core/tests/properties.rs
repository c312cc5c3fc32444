use proptest::prelude::*;

use acmhd::calculus::{divergence, leray_p, leray_q};
use acmhd::diagnostics::DiagRecord;
use acmhd::harness::fit_rate;
use acmhd::io::{parse_config, read_csv, write_csv, Checkpoint, RunConfig};
use acmhd::random::{random_vector, rng, Spectrum};
use acmhd::solver::DataKind;
use acmhd::{Field, Grid3};

fn grid() -> Grid3 {
    Grid3::periodic(8).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn projectors_split_any_field(seed in any::<u64>()) {
        let g = grid();
        let v = random_vector(&g, Spectrum::dealiased(&g), &mut rng(seed));
        let n = v.l2_norm();
        let p = leray_p(&v).unwrap();
        let q = leray_q(&v).unwrap();
        prop_assert!(leray_p(&p).unwrap().sub(&p).unwrap().l2_norm() <= 1e-13 * n);
        prop_assert!(leray_q(&p).unwrap().l2_norm() <= 1e-13 * n);
        prop_assert!(p.add(&q).unwrap().sub(&v).unwrap().l2_norm() <= 1e-13 * n);
        prop_assert!(divergence(&p).unwrap().l2_norm() <= 1e-12 * n);
        let pythagoras = p.norm_sq() + q.norm_sq() - v.norm_sq();
        prop_assert!(pythagoras.abs() <= 1e-12 * v.norm_sq());
    }

    #[test]
    fn dealias_is_idempotent(samples in prop::collection::vec(-1.0f64..1.0, 512)) {
        let f = Field::from_physical(&grid(), samples).unwrap().to_spectral().unwrap();
        let once = f.dealias().unwrap();
        let twice = once.dealias().unwrap();
        prop_assert_eq!(once.spectral().unwrap(), twice.spectral().unwrap());
    }

    #[test]
    fn parseval(samples in prop::collection::vec(-10.0f64..10.0, 512)) {
        let g = grid();
        let f = Field::from_physical(&g, samples.clone()).unwrap();
        let direct: f64 = samples.iter().map(|x| x * x).sum::<f64>() * g.cell_volume();
        let spectral = f.to_spectral().unwrap().norm_sq();
        prop_assert!((direct - spectral).abs() <= 1e-12 * direct.max(1.0));
    }

    #[test]
    fn fit_exponent_ignores_units(
        e in -3.0f64..3.0,
        c in 0.01f64..100.0,
        sx in 0.01f64..100.0,
        sy in 0.01f64..100.0,
    ) {
        let pairs: Vec<(f64, f64)> = [1e-3f64, 1e-2, 1e-1, 1.0].iter().map(|&x| (x, c * x.powf(e))).collect();
        let base = fit_rate(&pairs).unwrap();
        let moved: Vec<(f64, f64)> = pairs.iter().map(|&(x, y)| (sx * x, sy * y)).collect();
        let other = fit_rate(&moved).unwrap();
        prop_assert!((base.exponent - e).abs() < 1e-9);
        prop_assert!((other.exponent - e).abs() < 1e-9);
    }

    #[test]
    fn config_print_parse_roundtrip(
        k in 3u32..8,
        box_length in 0.1f64..100.0,
        epsilon in 1e-8f64..10.0,
        mu in 0.0f64..5.0,
        horizon in 1e-3f64..100.0,
        dt in prop::option::of(1e-6f64..1.0),
        cfl in 0.01f64..2.0,
        ill in any::<bool>(),
        seed in any::<u64>(),
        cadence in 1usize..1000,
        name in "[a-z][a-z0-9_]{0,12}",
    ) {
        let c = RunConfig {
            n: 1 << k,
            box_length,
            epsilon,
            mu,
            horizon,
            dt,
            cfl,
            data: if ill { DataKind::IllPrepared } else { DataKind::WellPrepared },
            seed,
            cadence,
            out_dir: format!("out/{name}").into(),
            name,
        };
        prop_assert_eq!(parse_config(&c.to_string()).unwrap(), c);
    }

    #[test]
    fn checkpoint_bytes_roundtrip(
        bits in prop::collection::vec(any::<u64>(), 8 * 512),
        time in -1e6f64..1e6,
    ) {
        let blocks: Vec<Vec<f64>> = bits
            .chunks(512)
            .map(|c| c.iter().map(|b| f64::from_bits(*b)).collect())
            .collect();
        let c = Checkpoint { n: 8, box_length: 1.5, epsilon: 1e-3, mu: 0.0, time, blocks };
        let bytes = c.to_bytes();
        let back = Checkpoint::from_bytes(&bytes).unwrap();
        prop_assert_eq!(back.to_bytes(), bytes);
    }

    #[test]
    fn csv_values_roundtrip(values in prop::collection::vec(any::<f64>().prop_filter("finite", |x| x.is_finite()), 8)) {
        let r = DiagRecord {
            time: values[0],
            energy: values[1],
            enstrophy_u: values[2],
            enstrophy_b: values[3],
            div_u: values[4],
            div_b: values[5],
            q_u_l4: values[6],
            q_b_l4: values[7],
        };
        let mut buf = Vec::new();
        write_csv(&mut buf, &[r]).unwrap();
        let back = read_csv(buf.as_slice()).unwrap();
        prop_assert_eq!(back, vec![r]);
    }
}
