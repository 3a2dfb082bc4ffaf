//! Commit to a string under both schemes, open it, and watch a tampered
//! opening fail.

use concurrent_zk::bits::BitString;
use concurrent_zk::commitments::{binding_params, commit, equivocable_rho_count, hiding_params, verify_open, Expander, ExpanderTag, Group};
use concurrent_zk::seed;

fn main() {
    let mut rng = seed::rng(1);
    let msg = BitString::from_u64(0b1011_0110, 8);

    let binding = binding_params(8, BitString::random(&mut rng, 8 * 3 * 8), ExpanderTag::CircuitFriendly).unwrap();
    let (c, o) = commit(&binding, &msg, &mut rng).unwrap();
    println!("binding: {} payload bits, opens: {}", c.payload.len(), verify_open(&binding, &c, &o));

    let hiding = hiding_params(8, 8, Group::toy61()).unwrap();
    let (c, mut o) = commit(&hiding, &msg, &mut rng).unwrap();
    println!("hiding: payload {}, opens: {}", c.payload.to_hex(), verify_open(&hiding, &c, &o));
    o.message.flip(0);
    println!("hiding, other message under the same exponent: {}", verify_open(&hiding, &c, &o));

    let expander = Expander::new(ExpanderTag::CircuitFriendly, 4).unwrap();
    let bad = equivocable_rho_count(&expander, 4).unwrap();
    println!("k = 4: {bad} of 4096 receiver strings admit an equivocation");
}
