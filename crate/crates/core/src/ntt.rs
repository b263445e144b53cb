//! Number-theoretic transforms over word-sized primes, used to multiply
//! truncated power series exactly modulo several primes.

use crate::arith::{factorize, is_prime_u64, pow_mod};

#[derive(Debug, Clone, Copy)]
pub struct NttPrime {
    pub p: u32,
    /// Largest `k` with `2^k | p - 1`.
    pub two_adicity: u32,
    root: u32,
    pinv: u32, // -p^{-1} mod 2^32
    r2: u32,   // 2^64 mod p
}

impl NttPrime {
    fn new(p: u32) -> Self {
        let pm1 = (p - 1) as u64;
        let two_adicity = pm1.trailing_zeros();
        let factors = factorize(pm1);
        let mut g = 2u64;
        while factors.iter().any(|&(q, _)| pow_mod(g, pm1 / q, p as u64) == 1) {
            g += 1;
        }
        let mut inv: u32 = 1;
        for _ in 0..5 {
            inv = inv.wrapping_mul(2u32.wrapping_sub(p.wrapping_mul(inv)));
        }
        let r = (1u64 << 32) % p as u64;
        NttPrime {
            p,
            two_adicity,
            root: g as u32,
            pinv: inv.wrapping_neg(),
            r2: ((r * r) % p as u64) as u32,
        }
    }

    #[inline(always)]
    fn redc(&self, t: u64) -> u32 {
        let m = (t as u32).wrapping_mul(self.pinv);
        let u = ((t + m as u64 * self.p as u64) >> 32) as u32;
        if u >= self.p {
            u - self.p
        } else {
            u
        }
    }

    #[inline(always)]
    fn mmul(&self, a: u32, b: u32) -> u32 {
        self.redc(a as u64 * b as u64)
    }

    fn to_mont(&self, a: u32) -> u32 {
        self.mmul(a, self.r2)
    }

    fn from_mont(&self, a: u32) -> u32 {
        self.redc(a as u64)
    }

    fn mpow(&self, mut b: u32, mut e: u64) -> u32 {
        let mut r = self.to_mont(1);
        while e > 0 {
            if e & 1 == 1 {
                r = self.mmul(r, b);
            }
            b = self.mmul(b, b);
            e >>= 1;
        }
        r
    }

    #[inline(always)]
    fn add(&self, a: u32, b: u32) -> u32 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline(always)]
    fn sub(&self, a: u32, b: u32) -> u32 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    /// In-place transform of Montgomery-form data; `inverse` includes the 1/n scaling.
    fn transform(&self, a: &mut [u32], inverse: bool) {
        let n = a.len();
        let log = n.trailing_zeros();
        assert!(log <= self.two_adicity, "transform length exceeds prime capacity");
        let mut j = 0usize;
        for i in 1..n {
            let mut bit = n >> 1;
            while j & bit != 0 {
                j ^= bit;
                bit >>= 1;
            }
            j |= bit;
            if i < j {
                a.swap(i, j);
            }
        }
        let g = self.to_mont(self.root);
        let mut len = 2;
        let mut tw = vec![0u32; n / 2];
        while len <= n {
            let e = (self.p as u64 - 1) / len as u64;
            let mut w = self.mpow(g, e);
            if inverse {
                w = self.mpow(w, self.p as u64 - 2);
            }
            let half = len / 2;
            tw[0] = self.to_mont(1);
            for k in 1..half {
                tw[k] = self.mmul(tw[k - 1], w);
            }
            for chunk in a.chunks_mut(len) {
                let (lo, hi) = chunk.split_at_mut(half);
                for k in 0..half {
                    let u = lo[k];
                    let v = self.mmul(hi[k], tw[k]);
                    lo[k] = self.add(u, v);
                    hi[k] = self.sub(u, v);
                }
            }
            len <<= 1;
        }
        if inverse {
            let ninv = self.mpow(self.to_mont(n as u32 % self.p), self.p as u64 - 2);
            for x in a.iter_mut() {
                *x = self.mmul(*x, ninv);
            }
        }
    }

    /// Product of two series (plain residues), truncated to `n` terms.
    pub fn mul_trunc(&self, a: &[u32], b: &[u32], n: usize) -> Vec<u32> {
        let la = a.len().min(n);
        let lb = b.len().min(n);
        if la == 0 || lb == 0 {
            return vec![0; n];
        }
        let size = (la + lb - 1).next_power_of_two();
        let mut fa = vec![0u32; size];
        for (d, &s) in fa.iter_mut().zip(&a[..la]) {
            *d = self.to_mont(s);
        }
        self.transform(&mut fa, false);
        let same = std::ptr::eq(a, b);
        if same {
            for x in fa.iter_mut() {
                *x = self.mmul(*x, *x);
            }
        } else {
            let mut fb = vec![0u32; size];
            for (d, &s) in fb.iter_mut().zip(&b[..lb]) {
                *d = self.to_mont(s);
            }
            self.transform(&mut fb, false);
            for (x, y) in fa.iter_mut().zip(&fb) {
                *x = self.mmul(*x, *y);
            }
        }
        self.transform(&mut fa, true);
        fa.truncate(n);
        let mut out: Vec<u32> = fa.into_iter().map(|x| self.from_mont(x)).collect();
        out.resize(n, 0);
        out
    }

    /// Reduce a signed integer into `[0, p)`.
    pub fn reduce_i64(&self, x: i64) -> u32 {
        x.rem_euclid(self.p as i64) as u32
    }

    pub fn mul_plain(&self, a: u32, b: u32) -> u32 {
        ((a as u64 * b as u64) % self.p as u64) as u32
    }
}

/// `count` distinct primes below 2^31 whose multiplicative group supports
/// transforms of length `2^min_log`, largest first.
pub fn ntt_primes(count: usize, min_log: u32) -> Vec<NttPrime> {
    let step = 1u64 << min_log;
    let mut c = ((1u64 << 31) - 1) / step;
    let mut out = Vec::with_capacity(count);
    while out.len() < count && c > 0 {
        let p = c * step + 1;
        if p < (1u64 << 31) && is_prime_u64(p) {
            out.push(NttPrime::new(p as u32));
        }
        c -= 1;
    }
    out
}
