use crate::linalg::orth;
use crate::{DMat, DVec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Orthonormal basis obtained from a randomized sketch of a snapshot matrix.
pub struct Sketch {
    /// Orthonormal columns spanning (a subspace of) the snapshot range.
    pub basis: DMat,
    /// Number of columns asked for.
    pub requested: usize,
    /// Set when the sketch could not deliver `requested` independent columns.
    pub warning: Option<String>,
}

/// Compresses `d` to roughly `l` columns by right-multiplying with a seeded
/// uniform random matrix and orthonormalizing the product.
///
/// The draw is deterministic for a given `seed`. When `l` exceeds the
/// numerical rank of `d` the basis comes back thinner and `warning` says so.
pub fn orth_random_sketch(d: &DMat, l: usize, seed: u64) -> Sketch {
    assert!(l > 0, "sketch width must be positive");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r = DMat::from_fn(d.ncols(), l, |_, _| rng.random::<f64>());
    let basis = orth(&(d * r));
    let warning = if basis.ncols() < l {
        Some(format!(
            "requested {} sketch columns but snapshot rank supports only {}",
            l,
            basis.ncols()
        ))
    } else {
        None
    };
    Sketch {
        basis,
        requested: l,
        warning,
    }
}

impl Sketch {
    /// Residual of projecting `v` onto the sketch basis, relative to `||v||`.
    pub fn projection_residual(&self, v: &DVec) -> f64 {
        let nv = v.norm();
        if nv == 0.0 {
            return 0.0;
        }
        let proj = &self.basis * (self.basis.transpose() * v);
        (v - proj).norm() / nv
    }
}
