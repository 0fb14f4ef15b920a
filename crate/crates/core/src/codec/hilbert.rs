//! Hilbert scan of a 2^q × 2^q array.
//!
//! Orientation: the order-1 curve visits (0,0), (0,1), (1,1), (1,0),
//! where a site is (axis-0 index, axis-1 index).

use crate::error::{Error, Result};
use crate::lattice::{Alphabet, NdArray};

/// Site visited at step `t` of the curve filling an `n × n` grid.
pub fn hilbert_point(n: usize, t: usize) -> (usize, usize) {
    let (mut x, mut y) = (0usize, 0usize);
    let mut t = t;
    let mut s = 1usize;
    while s < n {
        let rx = 1 & (t / 2);
        let ry = 1 & (t ^ rx);
        if ry == 0 {
            if rx == 1 {
                x = s - 1 - x;
                y = s - 1 - y;
            }
            std::mem::swap(&mut x, &mut y);
        }
        x += s * rx;
        y += s * ry;
        t /= 4;
        s *= 2;
    }
    (x, y)
}

fn square_side(dims: &[usize]) -> Result<usize> {
    match dims {
        [a, b] if a == b && a.is_power_of_two() => Ok(*a),
        _ => Err(Error::domain(format!(
            "Hilbert scan needs a 2^q × 2^q array, got {dims:?}"
        ))),
    }
}

/// Row-major offsets in visiting order.
pub fn hilbert_order(n: usize) -> Result<Vec<usize>> {
    square_side(&[n, n])?;
    Ok((0..n * n)
        .map(|t| {
            let (x, y) = hilbert_point(n, t);
            x * n + y
        })
        .collect())
}

pub fn hilbert_scan(x: &NdArray) -> Result<Vec<u8>> {
    let n = square_side(x.dims())?;
    let data = x.data();
    Ok(hilbert_order(n)?.into_iter().map(|o| data[o]).collect())
}

pub fn hilbert_unscan(seq: &[u8], alphabet: Alphabet, n: usize) -> Result<NdArray> {
    let order = hilbert_order(n)?;
    if seq.len() != order.len() {
        return Err(Error::domain(format!(
            "sequence of {} symbols does not fill a {n}×{n} grid",
            seq.len()
        )));
    }
    let mut data = vec![0u8; seq.len()];
    for (&o, &s) in order.iter().zip(seq) {
        data[o] = s;
    }
    NdArray::new(alphabet, vec![n, n], data)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_one_orientation() {
        let pts: Vec<_> = (0..4).map(|t| hilbert_point(2, t)).collect();
        assert_eq!(pts, vec![(0, 0), (0, 1), (1, 1), (1, 0)]);
    }

    #[test]
    fn bijective_and_adjacent() {
        for q in 0..=8u32 {
            let n = 1usize << q;
            let order = hilbert_order(n).unwrap();
            let mut seen = vec![false; n * n];
            for &o in &order {
                assert!(!seen[o]);
                seen[o] = true;
            }
            assert_eq!(order[0], 0);
            for w in order.windows(2) {
                let (a, b) = ((w[0] / n, w[0] % n), (w[1] / n, w[1] % n));
                assert_eq!(a.0.abs_diff(b.0) + a.1.abs_diff(b.1), 1, "q={q}");
            }
        }
    }

    #[test]
    fn scan_inverse() {
        let x = NdArray::from_fn(Alphabet::new(16).unwrap(), vec![4, 4], |i| {
            (i[0] * 4 + i[1]) as u8
        })
        .unwrap();
        let s = hilbert_scan(&x).unwrap();
        assert_eq!(&s[..4], &[0, 4, 5, 1]);
        assert_eq!(hilbert_unscan(&s, x.alphabet(), 4).unwrap(), x);
    }

    #[test]
    fn rejects_non_square() {
        let x = NdArray::filled(Alphabet::binary(), vec![4, 8], 0).unwrap();
        assert!(hilbert_scan(&x).is_err());
        let x = NdArray::filled(Alphabet::binary(), vec![6, 6], 0).unwrap();
        assert!(hilbert_scan(&x).is_err());
        let x = NdArray::filled(Alphabet::binary(), vec![4], 0).unwrap();
        assert!(hilbert_scan(&x).is_err());
        assert!(hilbert_unscan(&[0, 1], Alphabet::binary(), 2).is_err());
    }
}
