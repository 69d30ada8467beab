use proptest::prelude::*;
use terrain_core::io::{
    read_obstacles, read_terrain, write_obstacles, write_terrain, ArrayContainer, ArrayData, ArrayEntry,
};
use terrain_core::obstacles::Obstacle;
use terrain_core::{Extent, GridSpec, Terrain};

fn obstacle() -> impl Strategy<Value = Obstacle> {
    (
        (-1e3f64..1e3, -1e3f64..1e3),
        -10.0f64..10.0,
        0.01f64..50.0,
        0.1f64..10.0,
        0.0f64..360.0,
        -45.0f64..45.0,
    )
        .prop_map(|(position, height, width, aspect, yaw_deg, pitch_deg)| Obstacle {
            position,
            height,
            width,
            aspect,
            yaw_deg,
            pitch_deg,
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn terrain_files_round_trip_bit_exact(nx in 2usize..20, ny in 2usize..20, x0 in -100.0f64..100.0, w in 0.5f64..300.0, v in -1e6f64..1e6) {
        let dir = tempfile::tempdir().unwrap();
        let spec = GridSpec::new(Extent::new(x0, x0 + w, -x0, -x0 + w / 2.0), nx, ny).unwrap();
        let t = Terrain::from_fn(spec, |x, y| v * (x * 0.1).sin() + y / 3.0).unwrap();
        let path = dir.path().join("t.atrn");
        write_terrain(&path, &t).unwrap();
        let back = read_terrain(&path).unwrap();
        prop_assert_eq!(back.spec(), t.spec());
        prop_assert_eq!(back.heights(), t.heights());
    }

    #[test]
    fn obstacle_files_round_trip(obs in prop::collection::vec(obstacle(), 1..30)) {
        let dir = tempfile::tempdir().unwrap();
        for name in ["o.atdc", "o.csv"] {
            let path = dir.path().join(name);
            write_obstacles(&path, &obs).unwrap();
            prop_assert_eq!(&read_obstacles(&path).unwrap(), &obs, "{}", name);
        }
    }

    #[test]
    fn containers_round_trip(values in prop::collection::vec(any::<f64>(), 0..50), ints in prop::collection::vec(any::<i64>(), 0..50)) {
        let mut c = ArrayContainer::new();
        c.push(ArrayEntry::vector("f", values.clone())).unwrap();
        c.push(ArrayEntry::new("i", vec![ints.len()], ArrayData::I64(ints.clone())).unwrap()).unwrap();
        let back = ArrayContainer::decode(&c.encode(), "mem".as_ref()).unwrap();
        prop_assert_eq!(back.names(), vec!["f", "i"]);
        let got = back.get("f").unwrap().data.to_f64();
        prop_assert_eq!(got.len(), values.len());
        for (a, b) in got.iter().zip(&values) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
        prop_assert_eq!(&back.get("i").unwrap().data, &ArrayData::I64(ints));
    }

    #[test]
    fn truncated_containers_are_rejected(cut in 0usize..40) {
        let mut c = ArrayContainer::new();
        c.push(ArrayEntry::vector("a", vec![1.0, 2.0, 3.0])).unwrap();
        let bytes = c.encode();
        let cut = cut.min(bytes.len() - 1);
        prop_assert!(ArrayContainer::decode(&bytes[..cut], "mem".as_ref()).is_err());
    }
}

#[test]
fn corrupt_files_name_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.atrn");
    std::fs::write(&path, b"not a terrain").unwrap();
    let err = read_terrain(&path).unwrap_err().to_string();
    assert!(err.contains("bad.atrn"), "{err}");
    assert!(read_terrain(&dir.path().join("missing.atrn")).is_err());
}

#[test]
fn shape_mismatch_is_rejected() {
    assert!(ArrayEntry::new("x", vec![2, 3], ArrayData::F64(vec![0.0; 5])).is_err());
    let mut c = ArrayContainer::new();
    c.push(ArrayEntry::vector("x", vec![])).unwrap();
    assert!(c.push(ArrayEntry::vector("x", vec![])).is_err());
}
