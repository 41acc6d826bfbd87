//! FBMC/OQAM: PHYDYAS prototype generation, the polyphase modulator and
//! receiver, and noise-variance constants from the diagonal of P P^H.
//!
//! Real PAM subsymbols are staggered at half-block spacing K/2. Subsymbol m
//! scales its symbols by beta_{m,k} = exp(-j2*pi*k(L-1)/(2K)) * j^{m+k},
//! takes an unnormalized K-point inverse DFT across subcarriers, and adds
//! the result through the length-L prototype window starting at sample
//! m*K/2:
//!
//!   x_n = s_tx * sum_m p_{n-mK/2} sum_k d_{m,k} beta_{m,k} exp(j2*pi*k*n/K)
//!
//! The receiver runs the adjoint: window by the prototype, fold into K bins,
//! normalized forward DFT, derotate, take the real part. Normalization is
//! fixed by two constraints: ||p||^2 = 2K and s_tx = 1/(2*sqrt(K)) give unit
//! loopback gain, unit average transmit power for unit-energy PAM at full
//! load, and make white noise of variance v2 at the receiver input come out
//! as real-part variance v2 per demodulated symbol.

use num_complex::Complex64;
use std::f64::consts::PI;
use std::io::Write;

use crate::error::{Error, Result};
use crate::num::{dft_inplace, idft_inplace};
use crate::waveform::FrameGrid;

/// PHYDYAS overlap factor; the prototype spans `OVERLAP * K` samples.
pub const OVERLAP: usize = 4;

/// PHYDYAS frequency-domain coefficients H_1..H_3 (H_0 = 1). H_2 = 1/sqrt(2)
/// satisfies the power-complementarity pair constraint H_2^2 + H_2^2 = 1.
pub const PHYDYAS_H: [f64; 3] = [0.971960, std::f64::consts::FRAC_1_SQRT_2, 0.235147];

/// Real, symmetric PHYDYAS prototype of length L = 4K, normalized to
/// ||p||^2 = 2K.
#[derive(Debug, Clone)]
pub struct PhydyasPrototype {
    k: usize,
    taps: Vec<f64>,
}

impl PhydyasPrototype {
    /// Cosine-sum construction sampled at half-integer points,
    /// p[n] = 1 + 2 sum_l (-1)^l H_l cos(2*pi*l*(n+1/2)/L), computed on the
    /// first half and mirrored so the symmetry p[n] = p[L-1-n] holds exactly.
    ///
    /// The half-integer sampling keeps the frequency-sampling design exact
    /// (the L-point DFT of p is the H coefficients with zeros elsewhere)
    /// while centering the filter at (L-1)/2, the group delay the
    /// beta_{m,k} phases refer to. Integer sampling would shift the center
    /// to L/2 and leak intrinsic interference into the real part.
    pub fn new(k: usize) -> Result<Self> {
        if k < 4 || !k.is_multiple_of(2) {
            return Err(Error::invalid(format!(
                "PHYDYAS needs even K >= 4 (K/2 staggering), got {k}"
            )));
        }
        let l = OVERLAP * k;
        let mut taps = vec![0.0; l];
        for n in 0..l / 2 {
            let mut v = 1.0;
            for (i, &h) in PHYDYAS_H.iter().enumerate() {
                let li = (i + 1) as f64;
                let sign = if (i + 1) % 2 == 0 { 1.0 } else { -1.0 };
                v += sign * 2.0 * h * (2.0 * PI * li * (n as f64 + 0.5) / l as f64).cos();
            }
            taps[n] = v;
            taps[l - 1 - n] = v;
        }
        let energy: f64 = taps.iter().map(|t| t * t).sum();
        let scale = (2.0 * k as f64 / energy).sqrt();
        for t in taps.iter_mut() {
            *t *= scale;
        }
        Ok(Self { k, taps })
    }

    /// Raw-tap constructor (length must be 4K). Normalization is the
    /// caller's business.
    pub fn from_taps(k: usize, taps: Vec<f64>) -> Result<Self> {
        if k < 2 || !k.is_multiple_of(2) {
            return Err(Error::invalid(format!("K must be even >= 2, got {k}")));
        }
        if taps.len() != OVERLAP * k {
            return Err(Error::LengthMismatch {
                context: "PhydyasPrototype::from_taps",
                expected: OVERLAP * k,
                got: taps.len(),
            });
        }
        Ok(Self { k, taps })
    }

    pub fn subcarriers(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    /// Transmit scale making the full-load interior signal unit power.
    pub fn tx_scale(&self) -> f64 {
        1.0 / (2.0 * (self.k as f64).sqrt())
    }

    /// Time-domain frame length for a given subsymbol count.
    pub fn frame_len(&self, m_pam: usize) -> usize {
        (m_pam.saturating_sub(1)) * self.k / 2 + self.len()
    }

    pub fn export_taps_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "index,value")?;
        for (i, t) in self.taps.iter().enumerate() {
            writeln!(w, "{i},{t:.17e}")?;
        }
        Ok(())
    }
}

/// Unit-modulus phase factors beta_{m,k} and the matching receiver
/// derotation (which also absorbs the absolute-position phase of the
/// relative polyphase fold).
#[derive(Debug, Clone)]
pub struct FbmcPhaseTable {
    k: usize,
    /// exp(-j2*pi*k(L-1)/(2K)) * j^k for each subcarrier.
    per_k: Vec<Complex64>,
}

impl FbmcPhaseTable {
    pub fn new(proto: &PhydyasPrototype) -> Self {
        let k = proto.subcarriers();
        let l = proto.len();
        let per_k = (0..k)
            .map(|kk| {
                let ang = -PI * (kk * (l - 1)) as f64 / k as f64;
                Complex64::new(ang.cos(), ang.sin()) * j_pow(kk)
            })
            .collect();
        Self { k, per_k }
    }

    pub fn beta(&self, m: usize, k: usize) -> Complex64 {
        self.per_k[k] * j_pow(m)
    }

    /// conj(beta_{m,k}) * exp(-j*pi*k*m): applied after the forward DFT of
    /// the relative fold in the receiver.
    pub fn derot(&self, m: usize, k: usize) -> Complex64 {
        let sign = if (k * m) % 2 == 1 { -1.0 } else { 1.0 };
        (self.per_k[k] * j_pow(m)).conj() * sign
    }

    pub fn subcarriers(&self) -> usize {
        self.k
    }
}

fn j_pow(e: usize) -> Complex64 {
    match e % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// FBMC modulation of a K x M_pam grid of real PAM symbols into a
/// time-domain frame of length (M_pam - 1) K/2 + L.
pub fn fbmc_modulate(grid: &FrameGrid, proto: &PhydyasPrototype) -> Result<Vec<Complex64>> {
    let k = proto.subcarriers();
    if grid.subcarriers() != k {
        return Err(Error::invalid(format!(
            "grid has {} subcarriers, prototype {}",
            grid.subcarriers(),
            k
        )));
    }
    for s in grid.symbols() {
        if s.im != 0.0 {
            return Err(Error::invalid(
                "FBMC symbols must be real-valued PAM".to_string(),
            ));
        }
    }
    let m_pam = grid.blocks();
    let l = proto.len();
    let phases = FbmcPhaseTable::new(proto);
    // s_tx times the sqrt(K) of the unnormalized IDFT
    let scale = proto.tx_scale() * (k as f64).sqrt();
    let mut x = vec![Complex64::new(0.0, 0.0); proto.frame_len(m_pam)];
    let mut a = vec![Complex64::new(0.0, 0.0); k];
    for m in 0..m_pam {
        for kk in 0..k {
            a[kk] = grid.get(kk, m) * phases.beta(m, kk);
        }
        idft_inplace(&mut a);
        let off = m * k / 2;
        for (ll, &p) in proto.taps().iter().enumerate().take(l) {
            x[off + ll] += scale * p * a[(off + ll) % k];
        }
    }
    Ok(x)
}

/// Pre-real-extraction receiver statistics: polyphase window, fold into K
/// bins, normalized DFT, derotate. The imaginary parts carry the intrinsic
/// OQAM interference.
pub fn fbmc_demodulate_complex(
    xhat: &[Complex64],
    proto: &PhydyasPrototype,
    m_pam: usize,
) -> Result<Vec<Vec<Complex64>>> {
    let k = proto.subcarriers();
    let l = proto.len();
    let needed = proto.frame_len(m_pam);
    if xhat.len() < needed {
        return Err(Error::LengthMismatch {
            context: "fbmc_demodulate",
            expected: needed,
            got: xhat.len(),
        });
    }
    let phases = FbmcPhaseTable::new(proto);
    let mut out = Vec::with_capacity(m_pam);
    let mut fold = vec![Complex64::new(0.0, 0.0); k];
    for m in 0..m_pam {
        let off = m * k / 2;
        for f in fold.iter_mut() {
            *f = Complex64::new(0.0, 0.0);
        }
        for (ll, &p) in proto.taps().iter().enumerate().take(l) {
            fold[ll % k] += p * xhat[off + ll];
        }
        let mut c = fold.clone();
        dft_inplace(&mut c);
        for (kk, v) in c.iter_mut().enumerate() {
            *v *= phases.derot(m, kk);
        }
        out.push(c);
    }
    Ok(out)
}

/// FBMC demodulation to the real symbol grid (K x M_pam).
pub fn fbmc_demodulate(
    xhat: &[Complex64],
    proto: &PhydyasPrototype,
    m_pam: usize,
) -> Result<FrameGrid> {
    let k = proto.subcarriers();
    let stats = fbmc_demodulate_complex(xhat, proto, m_pam)?;
    let mut data = vec![Complex64::new(0.0, 0.0); k * m_pam];
    for (m, block) in stats.iter().enumerate() {
        for (kk, v) in block.iter().enumerate() {
            data[m * k + kk] = Complex64::new(v.re, 0.0);
        }
    }
    FrameGrid::from_symbols(k, m_pam, data)
}

/// Main diagonal q of P P^H for the polyphase analysis matrix P mapping the
/// received frame to the K*M_pam folded values. Row (m, r) collects the taps
/// p_l with l = r (mod K), so q_{mK+r} is the energy of polyphase component
/// r -- computable from the prototype taps alone.
pub fn build_p_diag(proto: &PhydyasPrototype, m_pam: usize) -> Vec<f64> {
    let k = proto.subcarriers();
    let mut poly_energy = vec![0.0; k];
    for (l, &p) in proto.taps().iter().enumerate() {
        poly_energy[l % k] += p * p;
    }
    let mut q = Vec::with_capacity(k * m_pam);
    for _ in 0..m_pam {
        q.extend_from_slice(&poly_energy);
    }
    q
}

/// Offline NPI constants: q = diag(P P^H) and its per-subsymbol means.
#[derive(Debug, Clone)]
pub struct FbmcNpiConstants {
    k: usize,
    q: Vec<f64>,
    per_subsymbol: Vec<f64>,
}

impl FbmcNpiConstants {
    pub fn new(proto: &PhydyasPrototype, m_pam: usize) -> Self {
        let k = proto.subcarriers();
        let q = build_p_diag(proto, m_pam);
        let per_subsymbol = (0..m_pam)
            .map(|m| q[m * k..(m + 1) * k].iter().sum::<f64>() / k as f64)
            .collect();
        Self {
            k,
            q,
            per_subsymbol,
        }
    }

    pub fn q(&self) -> &[f64] {
        &self.q
    }

    pub fn subcarriers(&self) -> usize {
        self.k
    }

    /// Per-subsymbol NPI variances v̂2_m = v2 (1/K) sum_k q_{k+mK}. The
    /// demapper halves these before real-part PAM demapping, since only the
    /// real noise component survives the real-part extraction.
    pub fn npi(&self, v2: f64) -> Vec<f64> {
        self.per_subsymbol.iter().map(|s| v2 * s).collect()
    }
}
