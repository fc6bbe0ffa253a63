//! Apex location from a per-frame feature matrix (one row per frame), as
//! used after a frame-level CNN or any other per-frame descriptor.

use ndarray::ArrayView2;

use crate::error::{Error, Result};

/// `A_i = sum_j (F[i, j] - F[0, j])^2`.
pub fn difference_energy(features: ArrayView2<'_, f64>) -> Vec<f64> {
    if features.nrows() == 0 {
        return Vec::new();
    }
    let first = features.row(0);
    features
        .rows()
        .into_iter()
        .map(|row| row.iter().zip(first.iter()).map(|(a, b)| (a - b) * (a - b)).sum())
        .collect()
}

/// `B_i = sum_{m = i - h}^{i + h - 1} A_m` for `i` in `h ..= len - h`; entry
/// `j` of the result is `B_{j + h}`.
pub fn windowed_sums(energy: &[f64], h: usize) -> Vec<f64> {
    if h == 0 || energy.len() < 2 * h {
        return Vec::new();
    }
    (h..=energy.len() - h)
        .map(|i| energy[i - h..i + h].iter().sum())
        .collect()
}

/// Frame with the largest windowed difference energy and that energy. Ties
/// go to the earliest frame.
pub fn feature_engineering_apex(features: ArrayView2<'_, f64>, h: usize) -> Result<(usize, f64)> {
    if h == 0 {
        return Err(Error::Argument("half window h must be at least 1".into()));
    }
    if features.nrows() <= 2 * h {
        return Err(Error::SequenceTooShort {
            frames: features.nrows(),
            required: 2 * h + 1,
        });
    }
    let sums = windowed_sums(&difference_energy(features), h);
    let (j, &score) = sums
        .iter()
        .enumerate()
        .fold(None, |best: Option<(usize, &f64)>, (j, v)| match best {
            Some((_, b)) if *v <= *b => best,
            _ => Some((j, v)),
        })
        .expect("at least one window");
    Ok((j + h, score))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;

    #[test]
    fn constant_rows() {
        let f = Array2::from_elem((60, 4), 3.0);
        assert_eq!(feature_engineering_apex(f.view(), 17).unwrap(), (17, 0.0));
    }

    #[test]
    fn spike_row() {
        let mut f = Array2::zeros((120, 3));
        f.row_mut(50).fill(2.0);
        let (apex, score) = feature_engineering_apex(f.view(), 17).unwrap();
        assert!((33..=67).contains(&apex));
        assert_eq!(score, 12.0);
        // windows [i - 17, i + 17) cover row 50 for i in 34..=67
        assert_eq!(apex, 34);
    }

    #[test]
    fn too_few_rows() {
        let f = Array2::<f64>::zeros((34, 2));
        assert!(feature_engineering_apex(f.view(), 17).is_err());
        assert!(feature_engineering_apex(Array2::<f64>::zeros((35, 2)).view(), 17).is_ok());
    }
}
