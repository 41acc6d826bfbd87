//! Analytic complex-multiplication counts per waveform.
//!
//! Itemized model, every assumption explicit.
//!
//! FFT_n = (n/2) * ceil(log2 n) complex multiplies. Shared FD equalization
//! per (k, m): Gram B*U^2, matched filter B*U, Cholesky U^3/3, two
//! triangular solves 2*U^2 -- total K*M*(B*U^2 + B*U + U^3/3 + 2*U^2).
//! Per-antenna TD->FD transforms: B*M*FFT_K.
//!
//! Per-user demodulation extras:
//!
//! * OFDM: none.
//! * SC-FDMA: M despreading IDFTs, U*M*FFT_K.
//! * GFDM: M block IDFTs plus per-subcarrier circular convolution with the
//!   length-M inverse polyphase filter, counted in direct form (M multiplies
//!   per output sample, M outputs, K subcarriers): U*(M*FFT_K + K*M^2). The
//!   direct count reflects the filter-length scaling of the receiver (total
//!   filtering work M*(MK), proportional to the length-MK prototype).
//! * FBMC: per subsymbol one K-point transform plus the length-L polyphase
//!   analysis window, U*M_pam*(FFT_K + L) with M_pam = 2M (two PAM
//!   subsymbols carry one QAM block) and L = 4K. Unit-modulus derotations
//!   are absorbed into the filters and the demapper and are not counted.

use crate::waveform::WaveformKind;

/// Complex multiplies of an n-point FFT.
pub fn fft_mults(n: usize) -> f64 {
    if n <= 1 {
        return 0.0;
    }
    (n as f64 / 2.0) * (n as f64).log2().ceil()
}

/// One itemized complexity evaluation.
#[derive(Debug, Clone)]
pub struct ComplexityBreakdown {
    pub waveform: WaveformKind,
    pub b: usize,
    pub u: usize,
    pub k: usize,
    pub m: usize,
    /// (term name, complex multiply count) pairs.
    pub terms: Vec<(&'static str, f64)>,
}

impl ComplexityBreakdown {
    pub fn total(&self) -> f64 {
        self.terms.iter().map(|(_, c)| c).sum()
    }
}

/// Itemized complex-multiplication count for detecting one frame.
pub fn complexity_count(
    waveform: WaveformKind,
    b: usize,
    u: usize,
    k: usize,
    m: usize,
) -> ComplexityBreakdown {
    let (bf, uf, kf, mf) = (b as f64, u as f64, k as f64, m as f64);
    let fft_k = fft_mults(k);
    let mut terms = vec![
        (
            "fd_equalization",
            kf * mf * (bf * uf * uf + bf * uf + uf * uf * uf / 3.0 + 2.0 * uf * uf),
        ),
        ("antenna_fft", bf * mf * fft_k),
    ];
    match waveform {
        WaveformKind::Ofdm => {}
        WaveformKind::Scfdma => {
            terms.push(("user_fft", uf * mf * fft_k));
        }
        WaveformKind::Gfdm => {
            terms.push(("user_fft", uf * mf * fft_k));
            terms.push(("user_filtering", uf * kf * mf * mf));
        }
        WaveformKind::Fbmc => {
            let m_pam = 2.0 * mf;
            let l = 4.0 * kf;
            terms.push(("user_fft", uf * m_pam * fft_k));
            terms.push(("user_filtering", uf * m_pam * l));
        }
    }
    ComplexityBreakdown {
        waveform,
        b,
        u,
        k,
        m,
        terms,
    }
}
