//! The hat and tilde constructions turning forms on `M` into forms on `LM`.

use crate::geometry::{DifferentialForm, OneForm};
use crate::grassmann::{GrassmannElement, IndexSet};
use crate::linalg::{CMat, C64};
use crate::transport::DiscretizedLoop;

/// `Σ_{a₁<…<a_k} f(X_{a₁}, …, X_{a_k}) η_{a₁}…η_{a_k}` at sample `i`.
pub fn hat_eval_with<F>(l: &DiscretizedLoop, i: usize, k: usize, f: F) -> GrassmannElement
where
    F: Fn(&[Vec<f64>]) -> C64,
{
    let p = l.field_count();
    let mut out = GrassmannElement::zero(p, 1);
    if k > p {
        return out;
    }
    for bits in 0u32..(1 << p) {
        if bits.count_ones() as usize != k {
            continue;
        }
        let set = IndexSet::from_bits(bits);
        let vectors: Vec<Vec<f64>> = set.iter().map(|a| l.field(a, i).to_vec()).collect();
        out.set_coeff(set, &CMat::from_element(1, 1, f(&vectors)));
    }
    out
}

/// `ω̂(t_i)`, zero when the degree exceeds the number of fields.
pub fn hat_eval(omega: &dyn DifferentialForm, l: &DiscretizedLoop, i: usize) -> GrassmannElement {
    let x = l.point(i);
    hat_eval_with(l, i, omega.degree(), |v| omega.eval(x, v))
}

/// `ω̃(t_i) = ω(γ̇(t_i))`.
pub fn tilde_eval(omega: &dyn OneForm, l: &DiscretizedLoop, i: usize) -> C64 {
    omega.eval(l.point(i), l.velocity(i))
}
