//! Sends an arm index over the collision channel with both codes, clean and attacked.
//!
//! `cargo run --example codec -- [arm] [K] [h]`

use mpmab::codec::{e_decode, e_encode, r_decode_index_raw, r_encode_index};

fn main() -> mpmab::Result<()> {
    let args: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let arm = args.first().copied().unwrap_or(3);
    let k = args.get(1).copied().unwrap_or(5);
    let h = args.get(2).copied().unwrap_or(3);

    let binary = r_encode_index(arm, k, h)?;
    let one_hot = e_encode(arm, k, h)?;
    println!("arm {arm} of {k}, h = {h}");
    println!("  binary index code: {binary}");
    println!("  one-hot code:      {one_hot}");

    // an attack long enough to cover a whole block
    let burst = |len: usize, from: usize, to: usize| -> Vec<bool> { (0..len).map(|i| (from..to).contains(&i)).collect() };
    let hit_first = burst(binary.len(), 0, h);
    let rx = binary.through_channel(&hit_first)?;
    println!("\nfirst block jammed, binary code reads {} -> arm {} (silent error)", rx, r_decode_index_raw(rx.bits(), k, h)?);

    let other = if arm == 1 { 2 } else { 1 };
    let hit = burst(one_hot.len(), (other - 1) * h, other * h);
    let rx = one_hot.through_channel(&hit)?;
    println!("block {other} jammed, one-hot code reads {} -> candidates {:?} (error detected)", rx, e_decode(rx.bits(), k, h)?);

    let short = burst(one_hot.len(), (other - 1) * h, other * h - 1);
    let rx = one_hot.through_channel(&short)?;
    println!("burst shorter than h, one-hot code reads {} -> {:?}", rx, e_decode(rx.bits(), k, h)?);
    Ok(())
}
