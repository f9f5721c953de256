//! Bit-packed matrices over F_2.

use rand::Rng;

use super::{DistKind, EntryDistribution, ResidueRing};

/// Square F_2 matrix, each row packed into `words` u64s.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitMatrix {
    pub n: usize,
    words: usize,
    bits: Vec<u64>,
}

impl BitMatrix {
    pub fn zeros(n: usize) -> Self {
        let words = n.div_ceil(64);
        BitMatrix {
            n,
            words,
            bits: vec![0; n * words],
        }
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.words + j / 64] >> (j % 64) & 1 == 1
    }

    pub fn set(&mut self, i: usize, j: usize, v: bool) {
        let w = &mut self.bits[i * self.words + j / 64];
        if v {
            *w |= 1 << (j % 64);
        } else {
            *w &= !(1 << (j % 64));
        }
    }

    /// Entries drawn from `dist` and reduced mod 2. The uniform law is drawn
    /// 64 entries per generator call.
    pub fn sample<R: Rng + ?Sized>(dist: &EntryDistribution, n: usize, rng: &mut R) -> Self {
        let mut m = Self::zeros(n);
        if dist.kind == DistKind::UniformResidues {
            let tail = n % 64;
            for i in 0..n {
                for w in 0..m.words {
                    let mut x: u64 = rng.random();
                    if w == m.words - 1 && tail != 0 {
                        x &= (1 << tail) - 1;
                    }
                    m.bits[i * m.words + w] = x;
                }
            }
        } else {
            let ring = ResidueRing::new(2, 1).unwrap();
            for i in 0..n {
                for j in 0..n {
                    m.set(i, j, dist.sample(&ring, rng) == 1);
                }
            }
        }
        m
    }

    /// Row i of the product is the XOR of the rows of `other` selected by row i of self.
    pub fn mul(&self, other: &BitMatrix) -> BitMatrix {
        assert_eq!(self.n, other.n);
        let w = self.words;
        let mut out = Self::zeros(self.n);
        for i in 0..self.n {
            let dst = &mut out.bits[i * w..(i + 1) * w];
            for k in 0..self.n {
                if self.get(i, k) {
                    let src = &other.bits[k * w..(k + 1) * w];
                    for (d, s) in dst.iter_mut().zip(src) {
                        *d ^= s;
                    }
                }
            }
        }
        out
    }

    /// Rank by Gaussian elimination on packed rows.
    pub fn rank(&self) -> usize {
        let w = self.words;
        let mut rows = self.bits.clone();
        let mut rank = 0;
        for col in 0..self.n {
            let (cw, cb) = (col / 64, 1u64 << (col % 64));
            let Some(piv) = (rank..self.n).find(|&r| rows[r * w + cw] & cb != 0) else {
                continue;
            };
            if piv != rank {
                for x in 0..w {
                    rows.swap(piv * w + x, rank * w + x);
                }
            }
            let (head, tail) = rows.split_at_mut((rank + 1) * w);
            let prow = &head[rank * w..];
            for row in tail.chunks_exact_mut(w) {
                if row[cw] & cb != 0 {
                    for x in cw..w {
                        row[x] ^= prow[x];
                    }
                }
            }
            rank += 1;
        }
        rank
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_small() {
        let mut m = BitMatrix::zeros(3);
        m.set(0, 0, true);
        m.set(0, 1, true);
        m.set(1, 0, true);
        m.set(1, 1, true);
        m.set(2, 2, true);
        assert_eq!(m.rank(), 2);
        assert_eq!(BitMatrix::zeros(70).rank(), 0);
    }
}
