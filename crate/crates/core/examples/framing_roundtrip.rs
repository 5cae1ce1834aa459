//! Builds a frame, shows its layout and what the receiver reports when bits
//! are corrupted in the payload and in the header.

use rfcosim::framing::{build_frame, crc16, parse_frame, FrameError, OVERHEAD_BITS, PREAMBLE_BITS};
use rfcosim::ModulationCode;

pub fn run() -> Result<(), FrameError> {
    let payload = b"bias-tunable receiver";
    let frame = build_frame(payload, ModulationCode::Qpsk.code())?;
    let bits = frame.serialize();
    println!(
        "{} payload bytes -> {} bits ({} overhead)",
        payload.len(),
        bits.len(),
        OVERHEAD_BITS
    );
    println!(
        "sfd {:#04x}  length {}  modulation {:?}  header csc {:#06x}  payload csc {:#06x}",
        frame.sfd,
        frame.frame_length,
        frame.modulation(),
        frame.header_csc,
        frame.payload_csc
    );
    println!("crc16(\"123456789\") = {:#06x}", crc16(b"123456789"));

    let clean = parse_frame(bits.bits())?;
    assert!(clean.payload_ok && clean.frame == frame);
    println!(
        "clean frame: payload ok, {} bits consumed",
        clean.bits_consumed
    );

    let mut noisy = bits.clone();
    noisy.flip(3);
    noisy.flip(PREAMBLE_BITS - 1);
    println!(
        "preamble hits: payload ok = {}",
        parse_frame(noisy.bits())?.payload_ok
    );

    let mut noisy = bits.clone();
    noisy.flip(OVERHEAD_BITS - 16 + 5);
    let parsed = parse_frame(noisy.bits())?;
    println!(
        "payload hit: payload ok = {}, byte 0 reads {:?}",
        parsed.payload_ok, parsed.frame.payload[0] as char
    );

    let mut noisy = bits;
    noisy.flip(PREAMBLE_BITS + 12);
    match parse_frame(noisy.bits()) {
        Err(e) => println!("header hit: {e}"),
        Ok(_) => unreachable!("a corrupted length byte fails the header check"),
    }
    Ok(())
}

fn main() -> Result<(), FrameError> {
    run()
}
