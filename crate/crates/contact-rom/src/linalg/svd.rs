use crate::error::{Error, Result};
use crate::{DMat, DVec};

/// Orthonormal basis extracted from a snapshot matrix by truncated SVD.
#[derive(Debug, Clone)]
pub struct TruncatedBasis {
    /// Orthonormal columns spanning the retained subspace (n x rank).
    pub vectors: DMat,
    /// Full singular spectrum of the input, descending.
    pub singular_values: DVec,
    /// Energy tolerance the truncation was computed with.
    pub energy_tolerance: f64,
}

impl TruncatedBasis {
    pub fn rank(&self) -> usize {
        self.vectors.ncols()
    }

    /// Orthogonal projection of the columns of `s` onto the leading `m`
    /// basis vectors.
    pub fn project(&self, s: &DMat, m: usize) -> DMat {
        let m = m.min(self.rank());
        let phi = self.vectors.columns(0, m);
        &phi * (phi.transpose() * s)
    }

    /// Relative Frobenius tail `sqrt(sum_{i>m} s_i^2 / sum s_i^2)` predicted
    /// by the singular spectrum.
    pub fn tail_fraction(&self, m: usize) -> f64 {
        let total: f64 = self.singular_values.iter().map(|s| s * s).sum();
        let tail: f64 = self.singular_values.iter().skip(m).map(|s| s * s).sum();
        (tail / total).sqrt()
    }
}

/// Truncated SVD of a snapshot matrix.
///
/// The retained rank is the smallest `n` whose discarded spectral energy
/// fraction `1 - sum_{i<=n} s_i^2 / sum s_i^2` falls below `delta`, so the
/// relative Frobenius reconstruction error is at most `sqrt(delta)`. With
/// `delta = 0` every singular value above `1e-14 * s_max` is kept; the pure
/// tail rule would retain round-off noise directions.
pub fn svd_truncated(s: &DMat, delta: f64) -> Result<TruncatedBasis> {
    assert!((0.0..1.0).contains(&delta), "delta must be in [0, 1)");
    let svd = s.clone().svd(true, false);
    let sigma = &svd.singular_values;
    let total: f64 = sigma.iter().map(|v| v * v).sum();
    if total == 0.0 {
        return Err(Error::DegenerateSnapshotMatrix);
    }

    let rank = if delta == 0.0 {
        let smax = sigma[0];
        sigma.iter().filter(|&&v| v > 1e-14 * smax).count()
    } else {
        let mut acc = 0.0;
        let mut n = sigma.len();
        for (i, v) in sigma.iter().enumerate() {
            acc += v * v;
            if 1.0 - acc / total < delta {
                n = i + 1;
                break;
            }
        }
        n
    };

    let u = svd.u.expect("svd with u");
    Ok(TruncatedBasis {
        vectors: u.columns(0, rank).into_owned(),
        singular_values: sigma.clone().into_owned(),
        energy_tolerance: delta,
    })
}

/// Orthonormal basis of the column span of `d` via SVD; singular values
/// below `1e-12 * sigma_max` are treated as rank deficiency.
pub fn orth(d: &DMat) -> DMat {
    let svd = d.clone().svd(true, false);
    let sigma = &svd.singular_values;
    let smax = sigma.iter().cloned().fold(0.0f64, f64::max);
    let rank = if smax == 0.0 {
        0
    } else {
        sigma.iter().filter(|&&v| v > 1e-12 * smax).count()
    };
    svd.u.expect("svd with u").columns(0, rank).into_owned()
}

/// Moore-Penrose pseudo-inverse with relative singular-value cutoff.
pub fn pinv(a: &DMat, cutoff_rel: f64) -> DMat {
    let svd = a.clone().svd(true, true);
    let u = svd.u.expect("svd with u");
    let vt = svd.v_t.expect("svd with v_t");
    let sigma = &svd.singular_values;
    let smax = sigma.iter().cloned().fold(0.0f64, f64::max);
    let cutoff = cutoff_rel * smax;
    let mut si = DMat::zeros(vt.nrows(), u.ncols());
    for i in 0..sigma.len().min(si.nrows()).min(si.ncols()) {
        if sigma[i] > cutoff {
            si[(i, i)] = 1.0 / sigma[i];
        }
    }
    vt.transpose() * si * u.transpose()
}
