//! Reference composition of the full Shabal hash mode on top of the
//! public permutation, for conformance checks against an independent
//! implementation. Deliberately kept outside the crate: the product only
//! ships the keyed permutation, and this mode wrapper exists to prove the
//! permutation right.

use nonceforge::shabal::{block_words, derive_iv, permute, ShabalState};

fn add_message(state: &mut ShabalState, message: &[u32; 16]) {
    for (b, m) in state.b.iter_mut().zip(message) {
        *b = b.wrapping_add(*m);
    }
}

fn sub_message(state: &mut ShabalState, message: &[u32; 16]) {
    for (c, m) in state.c.iter_mut().zip(message) {
        *c = c.wrapping_sub(*m);
    }
}

fn xor_counter(state: &mut ShabalState, counter: u64) {
    state.a[0] ^= counter as u32;
    state.a[1] ^= (counter >> 32) as u32;
}

fn swap_bc(state: &mut ShabalState) {
    std::mem::swap(&mut state.b, &mut state.c);
}

/// Full Shabal-`output_bits` digest of `message`, built from the public
/// permutation, the derived IV, and the documented chaining mode.
pub fn reference_shabal(message: &[u8], output_bits: u32) -> Vec<u8> {
    let mut state = derive_iv(output_bits);

    let mut padded = message.to_vec();
    padded.push(0x80);
    while padded.len() % 64 != 0 {
        padded.push(0);
    }
    let block_count = padded.len() / 64;

    let mut counter = 1u64;
    let mut last = [0u32; 16];
    for (i, block) in padded.chunks_exact(64).enumerate() {
        let words = block_words(block).expect("64-byte block");
        add_message(&mut state, &words);
        xor_counter(&mut state, counter);
        permute(&mut state, &words);
        if i + 1 != block_count {
            sub_message(&mut state, &words);
            swap_bc(&mut state);
            counter += 1;
        }
        last = words;
    }
    for _ in 0..3 {
        swap_bc(&mut state);
        xor_counter(&mut state, counter);
        permute(&mut state, &last);
    }

    let out_bytes = (output_bits / 8) as usize;
    state.serialize_b()[64 - out_bytes..].to_vec()
}
