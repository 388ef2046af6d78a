use crate::scalar::Real;

/// `exp(−γ‖a − b‖²)`.
pub fn rbf_kernel<T: Real>(a: &[T], b: &[T], gamma: T) -> T {
    debug_assert_eq!(a.len(), b.len());
    let dist: T = a.iter().zip(b).map(|(x, y)| (*x - *y) * (*x - *y)).sum();
    (-gamma * dist).exp()
}

/// `1 / (p · Var(X))` with the variance taken over every entry of the training matrix.
pub fn gamma_scale<T: Real>(xs: &[Vec<T>]) -> T {
    let p = xs.first().map_or(1, Vec::len).max(1);
    let n = T::from_count(xs.len() * p);
    let mean = xs.iter().flatten().copied().sum::<T>() / n;
    let var = xs.iter().flatten().map(|v| (*v - mean) * (*v - mean)).sum::<T>() / n;
    if var > T::zero() {
        T::one() / (T::from_count(p) * var)
    } else {
        T::one()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rbf_values() {
        assert_eq!(rbf_kernel(&[0.3_f64, 0.2], &[0.3, 0.2], 2.0), 1.0);
        assert!((rbf_kernel(&[0.0_f64], &[1.0], 1.0) - 0.367_879_441_171_442_3).abs() < 1e-12);
        assert!((rbf_kernel(&[0.0_f64, 5.0], &[3.0, -1.0], 1e-12) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn gamma_scale_uses_pooled_variance() {
        // entries {0, 1, 0, 1}: variance 0.25, p = 2 -> gamma = 2
        let xs = vec![vec![0.0_f64, 1.0], vec![0.0, 1.0]];
        assert!((gamma_scale(&xs) - 2.0).abs() < 1e-12);
    }
}
