use dcsim_core::nci::{decode_nci, encode_nci, gnb_type_of, GnbType, Ncgi, NciError};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TYPES: [GnbType; 4] = [GnbType::Macro, GnbType::SmallSub6, GnbType::MmWave, GnbType::Reserved];

#[test]
fn hundred_thousand_random_round_trips() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for _ in 0..100_000 {
        let t = TYPES[rng.random_range(0..4)];
        let g = rng.random_range(0..1u32 << 20);
        let c = rng.random_range(0..1u32 << 14);
        let raw = encode_nci(t, g, c).unwrap();
        assert!(raw < 1 << 36);
        let d = decode_nci(raw, 22).unwrap();
        assert_eq!((d.gnb_type, d.gnb_id, d.cell_id), (t, g, c));
        assert_eq!(gnb_type_of(raw), t);
        assert_eq!(d.to_raw(), raw);
    }
}

#[test]
fn field_boundaries() {
    for t in TYPES {
        for (g, c) in [(0, 0), ((1 << 20) - 1, 0), (0, (1 << 14) - 1), ((1 << 20) - 1, (1 << 14) - 1)] {
            let d = decode_nci(encode_nci(t, g, c).unwrap(), 22).unwrap();
            assert_eq!((d.gnb_type, d.gnb_id, d.cell_id), (t, g, c));
        }
    }
    assert_eq!(encode_nci(GnbType::Reserved, (1 << 20) - 1, (1 << 14) - 1).unwrap(), (1 << 36) - 1);
    assert!(matches!(encode_nci(GnbType::Macro, 1 << 20, 0), Err(NciError::Range { .. })));
    assert!(matches!(encode_nci(GnbType::Macro, 0, 1 << 14), Err(NciError::Range { .. })));
    assert!(decode_nci(1 << 36, 22).is_err());
}

#[test]
fn reference_vectors() {
    assert_eq!(encode_nci(GnbType::Macro, 1, 1).unwrap(), 0x0_0000_4001);
    assert_eq!(encode_nci(GnbType::SmallSub6, 0x12345, 0x0ABC).unwrap(), 0x4_48D1_4ABC);
    assert_eq!(encode_nci(GnbType::MmWave, 0xFFFFF, 0x3FFF).unwrap(), 0xB_FFFF_FFFF);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2048))]

    #[test]
    fn changing_one_field_leaves_the_others(
        t in 0u8..4, g in 0u32..1 << 20, c in 0u32..1 << 14,
        t2 in 0u8..4, g2 in 0u32..1 << 20, c2 in 0u32..1 << 14,
    ) {
        let (t, t2) = (GnbType::from_code(t), GnbType::from_code(t2));
        let base = decode_nci(encode_nci(t, g, c).unwrap(), 22).unwrap();
        let a = decode_nci(encode_nci(t2, g, c).unwrap(), 22).unwrap();
        let b = decode_nci(encode_nci(t, g2, c).unwrap(), 22).unwrap();
        let d = decode_nci(encode_nci(t, g, c2).unwrap(), 22).unwrap();
        prop_assert_eq!((a.gnb_id, a.cell_id), (base.gnb_id, base.cell_id));
        prop_assert_eq!((b.gnb_type, b.cell_id), (base.gnb_type, base.cell_id));
        prop_assert_eq!((d.gnb_type, d.gnb_id), (base.gnb_type, base.gnb_id));
    }

    #[test]
    fn text_round_trip(plmn in 0u32..1 << 24, t in 0u8..4, g in 0u32..1 << 20, c in 0u32..1 << 14) {
        let n = Ncgi::typed(plmn, GnbType::from_code(t), g, c).unwrap();
        let back: Ncgi = n.to_string().parse().unwrap();
        prop_assert_eq!(back, n);
    }

    #[test]
    fn wider_gnb_ids_decode_as_reserved(raw in 0u64..1 << 36, bits in 23u8..=32) {
        let d = decode_nci(raw, bits).unwrap();
        prop_assert_eq!(d.gnb_type, GnbType::Reserved);
        prop_assert_eq!(d.to_raw(), raw);
    }
}
