//! JSON encodings shared by the commands.

use ellstab::combinatorics::{ColoredPartition, FixedPoint};
use ellstab::numeric::{ParamPoint, Slot};
use num_complex::Complex64 as C;
use serde_json::{json, Value};

/// A complex number as `[re, im]`.
pub fn complex(z: C) -> Value {
    json!([z.re, z.im])
}

pub fn complex_list(zs: &[C]) -> Value {
    Value::Array(zs.iter().copied().map(complex).collect())
}

fn slot(s: &Slot) -> Value {
    json!({ "value": complex(s.val), "log": complex(s.log) })
}

/// Values and fixed logarithms of every base variable.
pub fn param_point(pp: &ParamPoint) -> Value {
    json!({
        "N": pp.n,
        "t1": slot(&pp.t1),
        "t2": slot(&pp.t2),
        "p": slot(&pp.p),
        "u": pp.u.iter().map(slot).collect::<Vec<_>>(),
        "z": pp.z.iter().map(slot).collect::<Vec<_>>(),
        "M": pp.trunc,
        "sample_seed": pp.seed,
    })
}

/// `[[color, [rows...]], ...]`.
pub fn label(fp: &FixedPoint) -> Value {
    json!(fp.label())
}

/// `[color, [rows...]]`.
pub fn partition(lam: &ColoredPartition) -> Value {
    json!([lam.color, lam.rows])
}

/// Row-major nested lists of `[re, im]`.
pub fn matrix(rows: usize, cols: usize, entry: impl Fn(usize, usize) -> C) -> Value {
    Value::Array((0..rows).map(|i| Value::Array((0..cols).map(|j| complex(entry(i, j))).collect())).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_is_a_pair() {
        assert_eq!(complex(C::new(1.5, -2.0)).to_string(), "[1.5,-2.0]");
    }

    #[test]
    fn labels_nest_color_and_rows() {
        let fp = FixedPoint::new(3, vec![ColoredPartition::new(vec![2, 1], 1).unwrap()]).unwrap();
        assert_eq!(label(&fp).to_string(), "[[1,[2,1]]]");
    }

    #[test]
    fn matrix_is_row_major() {
        let m = matrix(2, 1, |i, _| C::new(i as f64, 0.0));
        assert_eq!(m.to_string(), "[[[0.0,0.0]],[[1.0,0.0]]]");
    }
}
