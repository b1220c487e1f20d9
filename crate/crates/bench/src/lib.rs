//! Fixtures shared by the benchmarks.

use alamouti_blind::channel::{
    draw_channel, transmit, ChannelRealization, RngStream, StreamPurpose,
};
use alamouti_blind::{Constellation, Modulation, ReceivedBurst, SymbolMatrix};

pub struct Fixture {
    pub cons: Constellation,
    pub symbols: SymbolMatrix,
    pub channel: ChannelRealization,
    pub rx: ReceivedBurst,
}

/// One received burst at `snr_db`, fully determined by `seed`.
pub fn fixture(modulation: Modulation, blocks: usize, snr_db: f64, seed: u64) -> Fixture {
    let cons = modulation.constellation();
    let g = draw_channel(&mut RngStream::derive(seed, 0, StreamPurpose::Channel));
    let channel = ChannelRealization::with_snr_db(g, snr_db);
    let symbols = SymbolMatrix::random(
        &cons,
        blocks,
        &mut RngStream::derive(seed, 0, StreamPurpose::Symbols),
    )
    .expect("blocks >= 1");
    let rx = transmit(
        &symbols,
        &channel,
        &mut RngStream::derive(seed, 0, StreamPurpose::Noise),
    );
    Fixture {
        cons,
        symbols,
        channel,
        rx,
    }
}
