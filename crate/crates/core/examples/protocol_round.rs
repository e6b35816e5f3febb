//! One round of the protocol by hand: deal shares, encode, decode.

use anoncomm::protocol::{self, DesireFlag, Message, SchemeParams, Seed, Transcript};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let params = SchemeParams::new(3, 5, 2)?;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let theta = 2;

    let seed = Seed::random(&params, &mut rng);
    let shares = protocol::deal(&params, &seed)?;
    let messages: Vec<Message> = (0..3).map(|_| Message::random(&params, &mut rng)).collect();
    let flags = DesireFlag::for_round(3, theta);

    let mut signals = Vec::new();
    for (i, share) in shares.iter().enumerate() {
        let x = protocol::encode(i + 1, flags[i], &messages[i], share)?;
        println!("T{}: Z={:?} W={:?} desired={} -> X={:?}", i + 1, share.z.values(), messages[i].w.values(), flags[i].is_desired, x.values());
        signals.push(x);
    }
    let decoded = protocol::decode(&Transcript::new(signals)?)?;
    println!("decoded {:?}, W_{theta} = {:?}", decoded.w.values(), messages[theta - 1].w.values());
    assert_eq!(decoded, messages[theta - 1]);
    Ok(())
}
