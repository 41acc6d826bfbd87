//! Error-rate accumulators with associative, commutative merge so
//! Monte-Carlo shards can be combined in any order.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ErrorCounters {
    pub symbol_errors: u64,
    pub symbols: u64,
    pub bit_errors: u64,
    pub bits: u64,
    pub frame_errors: u64,
    pub frames: u64,
}

impl ErrorCounters {
    /// Accumulates one per-user frame: bit errors plus a frame error if any
    /// bit is wrong.
    pub fn record_frame_bits(&mut self, truth: &[u8], decided: &[u8]) -> Result<()> {
        if truth.len() != decided.len() {
            return Err(Error::LengthMismatch {
                context: "record_frame_bits",
                expected: truth.len(),
                got: decided.len(),
            });
        }
        let errs = truth
            .iter()
            .zip(decided)
            .filter(|(a, b)| a != b)
            .count() as u64;
        self.bit_errors += errs;
        self.bits += truth.len() as u64;
        self.frames += 1;
        if errs > 0 {
            self.frame_errors += 1;
        }
        Ok(())
    }

    /// Accumulates symbol decisions (labels).
    pub fn record_symbols(&mut self, truth: &[usize], decided: &[usize]) -> Result<()> {
        if truth.len() != decided.len() {
            return Err(Error::LengthMismatch {
                context: "record_symbols",
                expected: truth.len(),
                got: decided.len(),
            });
        }
        self.symbol_errors += truth
            .iter()
            .zip(decided)
            .filter(|(a, b)| a != b)
            .count() as u64;
        self.symbols += truth.len() as u64;
        Ok(())
    }

    pub fn merge(&mut self, other: &ErrorCounters) {
        self.symbol_errors += other.symbol_errors;
        self.symbols += other.symbols;
        self.bit_errors += other.bit_errors;
        self.bits += other.bits;
        self.frame_errors += other.frame_errors;
        self.frames += other.frames;
    }

    pub fn ser(&self) -> f64 {
        if self.symbols == 0 {
            0.0
        } else {
            self.symbol_errors as f64 / self.symbols as f64
        }
    }

    pub fn ber(&self) -> f64 {
        if self.bits == 0 {
            0.0
        } else {
            self.bit_errors as f64 / self.bits as f64
        }
    }

    pub fn fer(&self) -> f64 {
        if self.frames == 0 {
            0.0
        } else {
            self.frame_errors as f64 / self.frames as f64
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_streams_count_zero_errors() {
        let mut c = ErrorCounters::default();
        c.record_frame_bits(&[0, 1, 1, 0], &[0, 1, 1, 0]).unwrap();
        c.record_symbols(&[3, 5], &[3, 5]).unwrap();
        assert_eq!(c.bit_errors, 0);
        assert_eq!(c.symbol_errors, 0);
        assert_eq!(c.frame_errors, 0);
        assert_eq!(c.frames, 1);
    }

    #[test]
    fn one_flipped_bit_marks_the_frame() {
        let mut c = ErrorCounters::default();
        c.record_frame_bits(&[0, 1, 1, 0], &[0, 1, 0, 0]).unwrap();
        assert_eq!(c.bit_errors, 1);
        assert_eq!(c.frame_errors, 1);
        assert_eq!(c.frames, 1);
        assert!((c.ber() - 0.25).abs() < 1e-15);
        assert!((c.fer() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn merge_equals_concatenated_counting() {
        let mut a = ErrorCounters::default();
        a.record_frame_bits(&[0, 0, 1], &[1, 0, 1]).unwrap();
        a.record_symbols(&[1, 2, 3], &[1, 0, 3]).unwrap();
        let mut b = ErrorCounters::default();
        b.record_frame_bits(&[1, 1], &[1, 1]).unwrap();
        b.record_symbols(&[7], &[7]).unwrap();

        let mut merged_ab = a;
        merged_ab.merge(&b);
        let mut merged_ba = b;
        merged_ba.merge(&a);
        assert_eq!(merged_ab, merged_ba);

        let mut whole = ErrorCounters::default();
        whole.record_frame_bits(&[0, 0, 1], &[1, 0, 1]).unwrap();
        whole.record_symbols(&[1, 2, 3], &[1, 0, 3]).unwrap();
        whole.record_frame_bits(&[1, 1], &[1, 1]).unwrap();
        whole.record_symbols(&[7], &[7]).unwrap();
        assert_eq!(merged_ab, whole);
    }

    #[test]
    fn length_mismatch_rejected() {
        let mut c = ErrorCounters::default();
        assert!(c.record_frame_bits(&[0, 1], &[0]).is_err());
        assert!(c.record_symbols(&[0], &[]).is_err());
    }
}
