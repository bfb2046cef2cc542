use proptest::prelude::*;
use varifold_atlas::config::{CurveInput, MeshConfig, ToleranceConfig};
use varifold_atlas::pipeline::{arrange, enumerate};
use varifold_atlas::{Config, RunReport};

fn ellipse() -> impl Strategy<Value = CurveInput> {
    (-1.0..1.0f64, -1.0..1.0f64, 0.5..1.5f64, 0.5..1.5f64, 0.0..3.2f64, 16usize..96).prop_map(
        |(x, y, rx, ry, rotation, samples)| CurveInput::Ellipse { center: [x, y], rx, ry, rotation, samples },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn reports_round_trip_byte_for_byte(a in ellipse(), b in ellipse(), t in 1e-3..0.3f64, h in proptest::option::of(0.01..0.1f64)) {
        let cfg = Config {
            curves_a: vec![a],
            curves_b: vec![b],
            t: Some(t),
            mesh: MeshConfig { h, ..MeshConfig::default() },
            tolerances: ToleranceConfig::default(),
        };
        let Ok((arr, mut report)) = arrange(&cfg) else { return Ok(()) };
        enumerate(&arr, &mut report).unwrap();
        let text = report.to_json();
        let back = RunReport::from_json(&text).unwrap();
        prop_assert_eq!(&back, &report);
        prop_assert_eq!(back.to_json(), text);
        prop_assert_eq!(Config::from_json(&cfg.to_json()).unwrap().hash(), cfg.hash());
    }
}

#[test]
fn entry_count_never_exceeds_bound() {
    // Randomized ellipse pairs, seed 42.
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
    for _ in 0..20 {
        let mut e = || CurveInput::Ellipse {
            center: [rng.gen_range(-0.8..0.8), rng.gen_range(-0.8..0.8)],
            rx: rng.gen_range(0.5..1.5),
            ry: rng.gen_range(0.5..1.5),
            rotation: rng.gen_range(0.0..3.0),
            samples: 64,
        };
        let cfg = Config {
            curves_a: vec![e()],
            curves_b: vec![e()],
            t: None,
            mesh: MeshConfig::default(),
            tolerances: ToleranceConfig::default(),
        };
        let Ok((arr, mut report)) = arrange(&cfg) else { continue };
        enumerate(&arr, &mut report).unwrap();
        assert!(report.varifolds.unwrap().len() as u64 <= report.upper_bound);
    }
}
