//! Decode addresses with a bit-mask and an XOR bank mapping.

use cachedos::addrmap::{coord_of, AddressMapping, DramGeometry, PhysAddr, XorMapping};

fn main() -> anyhow::Result<()> {
    let mask = AddressMapping::from_bits(&[13, 14, 15])?;
    let xor = AddressMapping::from_xor(XorMapping::new(&[
        vec![13, 16],
        vec![14, 17],
        vec![15, 18],
    ])?)?;
    let geom = DramGeometry::new(8, 2048, 64)?;
    println!("{:>10} {:>12} {:>12}", "addr", "mask", "xor");
    for addr in [0u64, 0x2000, 0x4000, 0x1_0000, 0x1_2000, 0x3_e000] {
        let a = PhysAddr::new(addr)?;
        let m = coord_of(&geom, &mask, a)?;
        let x = coord_of(&geom, &xor, a)?;
        println!(
            "{addr:#10x} {:>5}/{:<6} {:>5}/{:<6}",
            m.bank, m.row, x.bank, x.row
        );
    }
    println!("(bank/row)");
    Ok(())
}
