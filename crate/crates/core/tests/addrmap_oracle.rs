//! Bank decoding against naive references, and bank purity of generated
//! attack programs.

use cachedos::addrmap::{
    bank_of_mask, bank_of_xor, AddrError, AddressMapping, BankMask, DramGeometry, PhysAddr,
    XorMapping,
};
use cachedos::workload::{build_program, WorkloadError, WorkloadKind, WorkloadSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

mod common;
use common::naive_mask;

fn random_bits(rng: &mut ChaCha8Rng) -> Vec<u32> {
    let n = rng.gen_range(1..=8);
    let mut bits: Vec<u32> = Vec::new();
    while bits.len() < n {
        let b = rng.gen_range(0..48);
        if !bits.contains(&b) {
            bits.push(b);
        }
    }
    bits.sort_unstable();
    bits
}

#[test]
fn mask_decoding_matches_reference() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..100_000 {
        let bits = random_bits(&mut rng);
        let addr = rng.gen_range(0..1u64 << 48);
        let mask = BankMask::new(bits.clone()).unwrap();
        assert_eq!(
            bank_of_mask(&mask, PhysAddr::new(addr).unwrap()),
            naive_mask(&bits, addr),
            "bits {bits:?} addr {addr:#x}"
        );
    }
}

#[test]
fn xor_decoding_matches_reference() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut checked = 0;
    while checked < 20_000 {
        let funcs: Vec<Vec<u32>> = (0..rng.gen_range(1..=4))
            .map(|_| random_bits(&mut rng))
            .collect();
        // Dependent function sets are rejected by construction; skip them.
        let Ok(xm) = XorMapping::new(&funcs) else {
            continue;
        };
        let addr = rng.gen_range(0..1u64 << 48);
        let expect: u64 = funcs
            .iter()
            .enumerate()
            .map(|(i, f)| (f.iter().map(|&b| (addr >> b) & 1).sum::<u64>() % 2) << i)
            .sum();
        assert_eq!(bank_of_xor(&xm, PhysAddr::new(addr).unwrap()), expect);
        checked += 1;
    }
}

#[test]
fn bank_aware_programs_are_pure() {
    for bits in [&[8u32, 13, 14, 15, 16][..], &[11, 12, 13, 14][..]] {
        let mapping = AddressMapping::from_bits(bits).unwrap();
        let geom = DramGeometry::new(mapping.num_banks(), 2048, 64).unwrap();
        for seed in 0..64u64 {
            let bank = seed % mapping.num_banks();
            for kind in [WorkloadKind::BkPllRead, WorkloadKind::BkPllWrite] {
                let spec = WorkloadSpec::new(kind, 1 << 20)
                    .with_mlp(4)
                    .with_seed(seed)
                    .with_target_bank(bank);
                let p = build_program(&spec, &mapping, &geom).unwrap();
                assert!(!p.is_empty());
                let off = p
                    .accesses()
                    .iter()
                    .filter(|a| naive_mask(bits, a.addr.value()) != bank)
                    .count();
                assert_eq!(off, 0, "bits {bits:?} seed {seed} {kind}");
            }
        }
    }
}

#[test]
fn high_bank_bits_are_not_controllable() {
    for high in 21..48u32 {
        let mapping = AddressMapping::from_bits(&[13, 14, high]).unwrap();
        let geom = DramGeometry::new(8, 8192, 64).unwrap();
        let spec = WorkloadSpec::new(WorkloadKind::BkPllRead, 1 << 20).with_mlp(2);
        match build_program(&spec, &mapping, &geom) {
            Err(WorkloadError::Addr(AddrError::BankBitsNotControllable { bit, .. })) => {
                assert_eq!(bit, high)
            }
            other => panic!("bit {high}: {other:?}"),
        }
    }
    // Bits below the hugepage boundary are fine.
    let mapping = AddressMapping::from_bits(&[13, 14, 20]).unwrap();
    let geom = DramGeometry::new(8, 8192, 64).unwrap();
    assert!(build_program(
        &WorkloadSpec::new(WorkloadKind::BkPllRead, 1 << 20).with_mlp(2),
        &mapping,
        &geom
    )
    .is_ok());
}
