use super::{sign, BipolarHv, ItemMemory};
use crate::error::{Error, Result};
use crate::spectra::FeatureVector;

/// Maps `v` to a level in `1..=m`; out-of-range values are clipped.
pub fn quantize_level(v: f64, l_min: f64, l_max: f64, m: usize) -> usize {
    debug_assert!(l_min < l_max);
    let clipped = v.clamp(l_min, l_max);
    let level = 1 + ((clipped - l_min) / (l_max - l_min) * m as f64).floor() as usize;
    level.clamp(1, m)
}

/// ID-level encoding: per dimension, the sign of the sum over features of
/// `ID_i[d] * LV_{q_i}[d]`, with sign(0) = -1.
///
/// With `skip_zero`, features equal to exactly 0 contribute nothing.
pub fn encode(f: &FeatureVector, im: &ItemMemory, skip_zero: bool) -> Result<BipolarHv> {
    if f.len() != im.features() {
        return Err(Error::param(format!(
            "feature vector has {} values, item memory expects {}",
            f.len(),
            im.features()
        )));
    }
    let mut acc = vec![0i32; im.dim()];
    for (i, &v) in f.values.iter().enumerate() {
        if skip_zero && v == 0.0 {
            continue;
        }
        let level = im.level(quantize_level(v, f.l_min, f.l_max, im.levels()));
        for ((a, &id), &lv) in acc.iter_mut().zip(im.id(i)).zip(level) {
            *a += (id * lv) as i32;
        }
    }
    Ok(BipolarHv::from_raw(acc.into_iter().map(sign).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fv(values: Vec<f64>) -> FeatureVector {
        FeatureVector {
            values,
            l_min: 0.0,
            l_max: 1.0,
            empty: false,
        }
    }

    #[test]
    fn quantize_edges() {
        assert_eq!(quantize_level(0.0, 0.0, 1.0, 4), 1);
        assert_eq!(quantize_level(1.0, 0.0, 1.0, 4), 4);
        assert_eq!(quantize_level(0.49, 0.0, 1.0, 4), 2);
        assert_eq!(quantize_level(-3.0, 0.0, 1.0, 4), 1);
        assert_eq!(quantize_level(7.0, 0.0, 1.0, 4), 4);
    }

    #[test]
    fn single_feature_is_bound_pair() {
        let im = ItemMemory::generate(11, 256, 1, 8).unwrap();
        let hv = encode(&fv(vec![0.6]), &im, true).unwrap();
        let q = quantize_level(0.6, 0.0, 1.0, 8);
        let expect: Vec<i8> = im.id(0).iter().zip(im.level(q)).map(|(&a, &b)| a * b).collect();
        assert_eq!(hv.as_slice(), expect.as_slice());
    }

    #[test]
    fn toy_accumulator_and_tie_rule() {
        // Two features, four dimensions. Products per dimension:
        // feature 0: [+1, -1, +1, +1], feature 1: [+1, -1, -1, +1]
        // acc = [2, -2, 0, 2]  ->  [+1, -1, -1, +1] with sign(0) = -1.
        let ids = vec![1, -1, 1, 1, /* */ 1, -1, -1, 1];
        let lv1 = vec![1, 1, 1, 1];
        let lv2 = vec![-1, -1, 1, 1];
        let im = ItemMemory::from_parts(4, ids, [lv1, lv2].concat()).unwrap();
        // Both features at level 1 (value below the midpoint).
        let hv = encode(&fv(vec![0.2, 0.3]), &im, true).unwrap();
        assert_eq!(hv.as_slice(), &[1, -1, -1, 1]);
    }

    #[test]
    fn empty_spectrum_is_all_minus_one() {
        let im = ItemMemory::generate(2, 64, 5, 4).unwrap();
        let hv = encode(&fv(vec![0.0; 5]), &im, true).unwrap();
        assert!(hv.as_slice().iter().all(|&e| e == -1));
    }

    #[test]
    fn skip_zero_changes_result() {
        let im = ItemMemory::generate(2, 512, 5, 4).unwrap();
        let f = fv(vec![0.0, 0.9, 0.0, 0.0, 0.0]);
        let sparse = encode(&f, &im, true).unwrap();
        let dense = encode(&f, &im, false).unwrap();
        assert_ne!(sparse, dense);
    }

    #[test]
    fn length_mismatch() {
        let im = ItemMemory::generate(2, 64, 5, 4).unwrap();
        assert!(encode(&fv(vec![0.5; 4]), &im, true).is_err());
    }

    #[test]
    fn deterministic() {
        let im = ItemMemory::generate(9, 2048, 30, 16).unwrap();
        let f = fv((0..30).map(|i| (i % 7) as f64 / 7.0).collect());
        assert_eq!(encode(&f, &im, true).unwrap(), encode(&f, &im, true).unwrap());
    }
}
