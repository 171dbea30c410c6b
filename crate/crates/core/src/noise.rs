//! Seeded symmetric random noise and exact spectral norms.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::spectral::{eigenvalues, SymMatrix};

/// Noise family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseKind {
    /// Gaussian orthogonal ensemble `(G + G^T) / 2`: diagonal variance
    /// `delta^2`, off-diagonal variance `delta^2 / 2`.
    Goe,
    /// Upper triangle i.i.d. `N(0, delta^2)` mirrored below: every entry has
    /// variance `delta^2`.
    Wigner,
    /// Upper triangle i.i.d. `+-delta` mirrored below.
    Rademacher,
}

impl std::str::FromStr for NoiseKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "goe" | "gaussian" => Ok(Self::Goe),
            "wigner" => Ok(Self::Wigner),
            "rademacher" => Ok(Self::Rademacher),
            other => Err(format!("unknown noise kind '{other}' (goe|wigner|rademacher)")),
        }
    }
}

/// Noise family, entry scale `delta`, multiplier `scale` and seed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    pub delta: f64,
    #[serde(default = "one")]
    pub scale: f64,
    #[serde(default)]
    pub seed: u64,
}

fn one() -> f64 {
    1.0
}

impl NoiseSpec {
    pub fn new(kind: NoiseKind, delta: f64) -> Self {
        Self {
            kind,
            delta,
            scale: 1.0,
            seed: 0,
        }
    }

    pub fn with_scale(self, scale: f64) -> Self {
        Self { scale, ..self }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    /// The spec used for trial `t` of an experiment: seed `base + t`.
    pub fn for_trial(self, trial: u64) -> Self {
        Self {
            seed: self.seed.wrapping_add(trial),
            ..self
        }
    }
}

/// Draws the matrix described by `spec`. Entries are generated row by row
/// over the upper triangle, so identical specs give identical matrices.
pub fn sample_noise(spec: &NoiseSpec, n: usize) -> SymMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let amp = spec.delta * spec.scale;
    let mut upper = vec![0.0; n * (n + 1) / 2];
    let mut at = 0;
    for i in 0..n {
        for j in i..n {
            let z = match spec.kind {
                NoiseKind::Goe => {
                    let g: f64 = rng.sample(StandardNormal);
                    if i == j {
                        g
                    } else {
                        g * std::f64::consts::FRAC_1_SQRT_2
                    }
                }
                NoiseKind::Wigner => rng.sample(StandardNormal),
                NoiseKind::Rademacher => {
                    if rng.gen::<bool>() {
                        1.0
                    } else {
                        -1.0
                    }
                }
            };
            upper[at] = amp * z;
            at += 1;
        }
    }
    // Row-major upper-triangle offset of (i, j), i <= j.
    let offset = |i: usize, j: usize| i * n - i * (i + 1) / 2 + j;
    SymMatrix::from_upper(n, |i, j| upper[offset(i, j)])
}

/// `max |eigenvalue|`, from the dense symmetric solver.
pub fn spectral_norm(m: &SymMatrix) -> Result<f64> {
    Ok(eigenvalues(m)?.iter().fold(0.0f64, |a, &x| a.max(x.abs())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_delta_gives_zero_matrix() {
        let e = sample_noise(&NoiseSpec::new(NoiseKind::Goe, 0.0).with_seed(4), 5);
        assert_eq!(e, SymMatrix::zeros(5));
    }

    #[test]
    fn exact_symmetry_and_determinism() {
        for kind in [NoiseKind::Goe, NoiseKind::Wigner, NoiseKind::Rademacher] {
            let spec = NoiseSpec::new(kind, 0.7).with_seed(9).with_scale(3.0);
            let a = sample_noise(&spec, 7);
            let b = sample_noise(&spec, 7);
            assert_eq!(a, b);
            for i in 0..7 {
                for j in 0..7 {
                    assert_eq!(a.get(i, j), a.get(j, i));
                }
            }
        }
    }

    #[test]
    fn rademacher_entries_are_signed_delta() {
        let e = sample_noise(&NoiseSpec::new(NoiseKind::Rademacher, 0.5).with_scale(2.0), 6);
        for i in 0..6 {
            for j in 0..6 {
                assert_eq!(e.get(i, j).abs(), 1.0);
            }
        }
    }

    #[test]
    fn spectral_norm_examples() {
        assert_eq!(spectral_norm(&SymMatrix::diag(&[3.0, -5.0, 1.0])).unwrap(), 5.0);
        assert_eq!(spectral_norm(&SymMatrix::zeros(4)).unwrap(), 0.0);
    }

    #[test]
    fn spectral_norm_matches_power_iteration() {
        let e = sample_noise(&NoiseSpec::new(NoiseKind::Wigner, 1.0).with_seed(2), 8);
        // Power iteration on E^2 converges to the largest |eigenvalue| squared.
        let mut v = vec![1.0; 8];
        let mut est = 0.0;
        for _ in 0..5000 {
            let w = e.matvec(&e.matvec(&v));
            let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
            est = norm.sqrt();
            v = w.iter().map(|x| x / norm).collect();
        }
        let got = spectral_norm(&e).unwrap();
        assert!((got - est).abs() <= 1e-6 * got);
    }

    #[test]
    fn goe_variances() {
        // Diagonal variance delta^2, off-diagonal delta^2 / 2.
        let n = 200;
        let e = sample_noise(&NoiseSpec::new(NoiseKind::Goe, 2.0).with_seed(1), n);
        let diag: f64 = (0..n).map(|i| e.get(i, i).powi(2)).sum::<f64>() / n as f64;
        let mut off = 0.0;
        let mut count = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                off += e.get(i, j).powi(2);
                count += 1.0;
            }
        }
        off /= count;
        assert!((diag / 4.0 - 1.0).abs() < 0.25, "diag {diag}");
        assert!((off / 2.0 - 1.0).abs() < 0.05, "off {off}");
    }

    #[test]
    fn trial_seeds_are_offsets() {
        let base = NoiseSpec::new(NoiseKind::Goe, 1.0).with_seed(10);
        assert_eq!(base.for_trial(3).seed, 13);
        assert_eq!(
            sample_noise(&base.for_trial(3), 4),
            sample_noise(&base.with_seed(13), 4)
        );
    }

    #[test]
    fn kind_parses() {
        assert_eq!("goe".parse::<NoiseKind>().unwrap(), NoiseKind::Goe);
        assert_eq!("Rademacher".parse::<NoiseKind>().unwrap(), NoiseKind::Rademacher);
        assert!("laplace".parse::<NoiseKind>().is_err());
    }
}
