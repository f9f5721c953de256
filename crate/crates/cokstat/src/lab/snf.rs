//! Smith valuations over Z/p^L by minimal-valuation pivoting.

use super::MatrixModPL;

/// Sorted p-valuations (v_1 ≤ … ≤ v_n) of the Smith form, with v(0) = L.
///
/// Pivot: first entry in row-major order of minimal valuation within the
/// remaining block. Its row is scaled by the inverse of the unit part and used
/// to clear its column; clearing the row afterwards does not touch the block.
pub fn smith_valuations(m: &MatrixModPL) -> Vec<u32> {
    let n = m.n;
    let ring = m.ring;
    let md = ring.modulus;
    let mut a = m.entries.clone();
    let mut vals = Vec::with_capacity(n);
    for t in 0..n {
        let mut best = (ring.l, t, t);
        'search: for i in t..n {
            for j in t..n {
                let x = a[i * n + j];
                if x == 0 {
                    continue;
                }
                let v = ring.valuation(x);
                if v < best.0 {
                    best = (v, i, j);
                    if v == 0 {
                        break 'search;
                    }
                }
            }
        }
        let (v, pi, pj) = best;
        if v == ring.l {
            vals.resize(n, ring.l);
            break;
        }
        if pi != t {
            for j in 0..n {
                a.swap(t * n + j, pi * n + j);
            }
        }
        if pj != t {
            for i in 0..n {
                a.swap(i * n + t, i * n + pj);
            }
        }
        let pv = ring.p.pow(v);
        let unit = a[t * n + t] / pv;
        let uinv = ring.inv(unit % md);
        for j in t..n {
            a[t * n + j] = ring.mul(a[t * n + j], uinv);
        }
        let (head, tail) = a.split_at_mut((t + 1) * n);
        let prow = &head[t * n..];
        for row in tail.chunks_exact_mut(n) {
            let f = row[t] / pv;
            if f == 0 {
                continue;
            }
            if md.is_power_of_two() {
                let mask = md - 1;
                for j in t..n {
                    row[j] = row[j].wrapping_sub(f.wrapping_mul(prow[j])) & mask;
                }
            } else {
                for j in t..n {
                    row[j] = ring.sub(row[j], ring.mul(f, prow[j]));
                }
            }
        }
        vals.push(v);
    }
    vals.sort_unstable();
    vals
}
