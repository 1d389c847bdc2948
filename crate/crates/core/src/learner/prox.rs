use crate::error::{Error, Result};
use crate::params::{l2, GroupedParameterVector};

/// Block soft-thresholding of a single group in place.
#[inline]
pub(crate) fn shrink_group(v: &mut [f64], threshold: f64) {
    let norm = l2(v);
    if norm <= threshold || norm == 0.0 {
        v.iter_mut().for_each(|x| *x = 0.0);
    } else {
        let scale = 1.0 - threshold / norm;
        v.iter_mut().for_each(|x| *x *= scale);
    }
}

/// Proximal operator of `t λ ‖·‖_{1,2}` over the layout's groups:
/// each group is scaled by `max(0, 1 - tλ / ‖v_g‖)`.
pub fn group_prox(v: &GroupedParameterVector, t_lambda: f64) -> Result<GroupedParameterVector> {
    if !(t_lambda >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "prox threshold must be non-negative, got {t_lambda}"
        )));
    }
    let mut out = v.clone();
    for g in 0..v.layout().num_groups() {
        shrink_group(out.group_mut(g), t_lambda);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::GroupLayout;
    use std::sync::Arc;

    fn vector(values: Vec<f64>) -> GroupedParameterVector {
        // groups of sizes 1 and 1
        let l = Arc::new(GroupLayout::new(&[1, 1], 0).unwrap());
        GroupedParameterVector::from_values(l, values).unwrap()
    }

    #[test]
    fn zero_is_fixed() {
        let v = vector(vec![0.0, 0.0]);
        assert_eq!(group_prox(&v, 1.0).unwrap(), v);
    }

    #[test]
    fn small_groups_vanish_exactly() {
        let out = group_prox(&vector(vec![0.5, -2.0]), 1.0).unwrap();
        assert_eq!(out.values(), &[0.0, -1.0]);
        let out = group_prox(&vector(vec![1.0, 1.0]), 1.0).unwrap();
        assert_eq!(out.values(), &[0.0, 0.0]);
    }

    #[test]
    fn three_four_five() {
        let mut v = vec![3.0, 4.0];
        shrink_group(&mut v, 1.0);
        assert!((v[0] - 2.4).abs() < 1e-15 && (v[1] - 3.2).abs() < 1e-15);
    }

    #[test]
    fn negative_threshold_rejected() {
        assert!(group_prox(&vector(vec![1.0, 1.0]), -0.1).is_err());
    }
}
