//! Canonical byte encoding for everything that gets hashed.
//!
//! One rule, applied everywhere: a record is the concatenation of its fields
//! in declared order, each field length-prefixed with a big-endian `u32`.
//! Integers encode big-endian at fixed width inside their field. Collections
//! encode a count field followed by one field per element; maps iterate in
//! sorted key order. Two values encode to the same bytes iff they are equal,
//! which is what transaction ids, block hashes, document records, and
//! commitments all rely on.

/// Append-only canonical encoder.
#[derive(Default)]
pub struct Encoder {
    buf: Vec<u8>,
}

impl Encoder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn finish(self) -> Vec<u8> {
        self.buf
    }

    fn field(&mut self, payload: &[u8]) {
        self.buf
            .extend_from_slice(&(payload.len() as u32).to_be_bytes());
        self.buf.extend_from_slice(payload);
    }

    pub fn bytes(&mut self, b: &[u8]) -> &mut Self {
        self.field(b);
        self
    }

    pub fn str(&mut self, s: &str) -> &mut Self {
        self.field(s.as_bytes());
        self
    }

    pub fn u64(&mut self, v: u64) -> &mut Self {
        self.field(&v.to_be_bytes());
        self
    }

    pub fn u32(&mut self, v: u32) -> &mut Self {
        self.field(&v.to_be_bytes());
        self
    }

    pub fn u8(&mut self, v: u8) -> &mut Self {
        self.field(&[v]);
        self
    }

    pub fn bool(&mut self, v: bool) -> &mut Self {
        self.u8(v as u8)
    }

    /// Optional value: a presence tag field, then the value if present.
    pub fn opt<T, F: FnOnce(&mut Self, &T)>(&mut self, v: &Option<T>, f: F) -> &mut Self {
        match v {
            None => {
                self.u8(0);
            }
            Some(inner) => {
                self.u8(1);
                f(self, inner);
            }
        }
        self
    }

    /// Sequence: count field, then each element. Accepts anything that
    /// iterates references with a known length (slices, Vec, BTreeSet).
    pub fn seq<'a, T: 'a, I, F>(&mut self, items: I, mut f: F) -> &mut Self
    where
        I: IntoIterator<Item = &'a T>,
        I::IntoIter: ExactSizeIterator,
        F: FnMut(&mut Self, &T),
    {
        let iter = items.into_iter();
        self.u32(iter.len() as u32);
        for item in iter {
            f(self, item);
        }
        self
    }
}

/// Types with a single canonical byte form.
pub trait CanonicalEncode {
    fn encode(&self, enc: &mut Encoder);

    fn canonical_bytes(&self) -> Vec<u8> {
        let mut enc = Encoder::new();
        self.encode(&mut enc);
        enc.finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fields_are_length_prefixed_in_order() {
        let mut enc = Encoder::new();
        enc.str("ab").u64(7);
        let bytes = enc.finish();
        assert_eq!(
            bytes,
            vec![0, 0, 0, 2, b'a', b'b', 0, 0, 0, 8, 0, 0, 0, 0, 0, 0, 0, 7]
        );
    }

    #[test]
    fn adjacent_fields_cannot_be_confused() {
        // ("ab", "c") and ("a", "bc") must encode differently.
        let mut left = Encoder::new();
        left.str("ab").str("c");
        let mut right = Encoder::new();
        right.str("a").str("bc");
        assert_ne!(left.finish(), right.finish());
    }

    #[test]
    fn option_tags_distinguish_none_from_zero() {
        let mut none = Encoder::new();
        none.opt(&None::<u64>, |e, v| {
            e.u64(*v);
        });
        let mut some_zero = Encoder::new();
        some_zero.opt(&Some(0u64), |e, v| {
            e.u64(*v);
        });
        assert_ne!(none.finish(), some_zero.finish());
    }

    #[test]
    fn sequences_carry_their_length() {
        let mut one = Encoder::new();
        one.seq(&["x"], |e, s| {
            e.str(s);
        });
        let mut two = Encoder::new();
        two.seq(&["x", "x"], |e, s| {
            e.str(s);
        });
        assert_ne!(one.finish(), two.finish());
    }
}
