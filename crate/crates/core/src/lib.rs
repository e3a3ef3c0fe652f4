//! Log-FSK frequency-domain over-the-air computation.
//!
//! Each user maps its measurement `m_k` to a logarithmically warped cosine tone.
//! The multiple-access channel adds the frames, the receiver exponentiates the
//! sum and the strongest high-frequency tone sits at `sum_k m_k`.
//!
//! The crate covers waveform synthesis, the analysis filter bank, the channel,
//! the demodulator, closed-form performance expressions, a DSB linear baseline
//! and a seeded Monte-Carlo experiment driver.

pub mod channel;
pub mod dsb;
pub mod error;
pub mod experiments;
pub mod receiver;
mod rng;
pub mod theory;
pub mod transform;
pub mod waveform;

pub use channel::{superpose, AwgnChannel, FlatFadingLink};
pub use dsb::{dsb_estimate_sum, dsb_transmit, DsbConfig};
pub use error::{Error, Result};
pub use receiver::{
    demodulate, exp_postprocess, measure_destination_snr, DemodOutcome, ReceiverConfig,
};
pub use theory::{LogNormalStats, QInterpretation, TheoryPoint};
pub use transform::{detect_max_frequency, AnalysisOperator, Detection, Spectrum};
pub use waveform::{
    cosine_basis, log_term_power, modulate, CosineGrid, LogFskBuilder, LogFskParams,
    PowerNormalization, SampleFrame, Violation,
};
