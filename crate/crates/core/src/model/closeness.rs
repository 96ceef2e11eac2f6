//! Incoherence and (epsilon, kappa)-closeness between two dictionaries.

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::Rng;
use rand_distr::StandardNormal;

use super::dictionary::{norm, Dictionary};
use crate::error::{NoodlError, Result};
use crate::rng::{label, substream};

/// `sqrt(n) * max_{i != j} |<A_i, A_j>|`, or 0 when there is a single atom.
pub fn incoherence(a: &Dictionary) -> f64 {
    let m = a.m();
    if m < 2 {
        return 0.0;
    }
    let gram = a.matrix().t().dot(&a.matrix());
    let mut worst = 0.0f64;
    for j in 0..m {
        for i in 0..j {
            worst = worst.max(gram[[i, j]].abs());
        }
    }
    (a.n() as f64).sqrt() * worst
}

/// Alignment of an estimated dictionary to the truth: true atom `i` is
/// matched to estimated atom `perm[i]` with sign `signs[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Matching {
    pub perm: Vec<usize>,
    pub signs: Vec<f64>,
    /// `|| signs[i] * A_hat[perm[i]] - A*_i ||` for each true atom.
    pub col_err: Vec<f64>,
}

impl Matching {
    pub fn identity(m: usize) -> Self {
        Matching {
            perm: (0..m).collect(),
            signs: vec![1.0; m],
            col_err: vec![0.0; m],
        }
    }

    pub fn max_err(&self) -> f64 {
        self.col_err.iter().copied().fold(0.0, f64::max)
    }

    pub fn is_identity(&self) -> bool {
        self.perm.iter().enumerate().all(|(i, &p)| i == p) && self.signs.iter().all(|&s| s == 1.0)
    }

    /// Inverse map: estimated atom index -> true atom index.
    pub fn inverse(&self) -> Vec<usize> {
        let mut inv = vec![0; self.perm.len()];
        for (i, &p) in self.perm.iter().enumerate() {
            inv[p] = i;
        }
        inv
    }

    /// Columns of `a_hat` reordered and sign-corrected into the truth's frame.
    pub fn align(&self, a_hat: ArrayView2<'_, f64>) -> Array2<f64> {
        let mut out = Array2::zeros(a_hat.raw_dim());
        for (i, mut col) in out.axis_iter_mut(Axis(1)).enumerate() {
            col.assign(&(&a_hat.column(self.perm[i]) * self.signs[i]));
        }
        out
    }
}

/// Greedy max-correlation matching: pairs are taken in descending order of
/// `|<A_hat_i, A*_j>|`, skipping atoms already used on either side.
pub fn match_columns(a_hat: &Dictionary, a_star: &Dictionary) -> Result<Matching> {
    if a_hat.n() != a_star.n() || a_hat.m() != a_star.m() {
        return Err(NoodlError::shape(format!(
            "cannot match {}x{} against {}x{}",
            a_hat.n(),
            a_hat.m(),
            a_star.n(),
            a_star.m()
        )));
    }
    let m = a_star.m();
    // corr[[i, j]] = <A_hat_i, A*_j>
    let corr = a_hat.matrix().t().dot(&a_star.matrix());
    if corr.iter().any(|v| !v.is_finite()) {
        return Err(NoodlError::Matching("non-finite correlation".into()));
    }

    // When every true atom has a distinct best partner, the greedy order
    // reproduces exactly that assignment, so the full sort can be skipped.
    let best: Vec<usize> = (0..m)
        .map(|j| {
            let col = corr.column(j);
            (0..m).fold(0, |b, i| if col[i].abs() > col[b].abs() { i } else { b })
        })
        .collect();
    let mut taken = vec![false; m];
    let injective = best.iter().all(|&i| !std::mem::replace(&mut taken[i], true));

    let perm = if injective {
        best
    } else {
        let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(m * m);
        for j in 0..m {
            for i in 0..m {
                pairs.push((corr[[i, j]].abs(), i, j));
            }
        }
        pairs.sort_unstable_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        let mut perm = vec![usize::MAX; m];
        let mut used = vec![false; m];
        let mut assigned = 0;
        for (_, i, j) in pairs {
            if perm[j] == usize::MAX && !used[i] {
                perm[j] = i;
                used[i] = true;
                assigned += 1;
                if assigned == m {
                    break;
                }
            }
        }
        if assigned != m {
            return Err(NoodlError::Matching(format!("only {assigned} of {m} atoms matched")));
        }
        perm
    };

    let signs: Vec<f64> = (0..m)
        .map(|j| if corr[[perm[j], j]] < 0.0 { -1.0 } else { 1.0 })
        .collect();
    let col_err = (0..m)
        .map(|j| {
            let d = &a_hat.atom(perm[j]) * signs[j] - a_star.atom(j);
            norm(d.view())
        })
        .collect();
    Ok(Matching { perm, signs, col_err })
}

/// Maximum power-iteration sweeps for [`spectral_norm`].
pub const POWER_ITERS: usize = 100;
/// Relative change at which power iteration stops.
pub const POWER_TOL: f64 = 1e-10;

/// Largest singular value by power iteration on `M^T M`.
pub fn spectral_norm(mat: ArrayView2<'_, f64>) -> f64 {
    let cols = mat.ncols();
    if cols == 0 || mat.nrows() == 0 {
        return 0.0;
    }
    let mut rng = substream(0, &[label::POWER_ITER]);
    let mut v: Array1<f64> = (0..cols).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    let nv = norm(v.view());
    v /= nv;
    let mut sigma = 0.0;
    for _ in 0..POWER_ITERS {
        let w = mat.dot(&v);
        let next = norm(w.view());
        if next == 0.0 {
            return 0.0;
        }
        let u = mat.t().dot(&(w / next));
        let nu = norm(u.view());
        // ||M^T u|| with u the normalized image of v converges to sigma_max.
        let converged = (nu - sigma).abs() <= POWER_TOL * nu;
        sigma = nu;
        if nu == 0.0 {
            return 0.0;
        }
        v = u / nu;
        if converged {
            break;
        }
    }
    sigma
}

/// Outcome of a closeness check.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosenessReport {
    /// Largest matched column distance.
    pub epsilon: f64,
    /// Whether `epsilon` is within the requested bound.
    pub columns_ok: bool,
    /// Whether `||A - A*|| <= kappa ||A*||` after alignment.
    pub kappa_ok: bool,
    pub spectral_ratio: f64,
    pub matching: Option<Matching>,
    pub diagnostic: Option<String>,
}

impl ClosenessReport {
    pub fn is_close(&self) -> bool {
        self.columns_ok && self.kappa_ok
    }
}

/// Tests whether `a` is `(epsilon, kappa)`-close to `a_star`.
///
/// The spectral condition is evaluated on `a` after the column matching has
/// been applied.
pub fn check_closeness(a: &Dictionary, a_star: &Dictionary, epsilon: f64, kappa: f64) -> ClosenessReport {
    let matching = match match_columns(a, a_star) {
        Ok(m) => m,
        Err(e) => {
            return ClosenessReport {
                epsilon: f64::INFINITY,
                columns_ok: false,
                kappa_ok: false,
                spectral_ratio: f64::INFINITY,
                matching: None,
                diagnostic: Some(e.to_string()),
            }
        }
    };
    let eps_hat = matching.max_err();
    let diff = matching.align(a.matrix()) - a_star.matrix();
    let ratio = spectral_norm(diff.view()) / spectral_norm(a_star.matrix());
    ClosenessReport {
        epsilon: eps_hat,
        columns_ok: eps_hat <= epsilon,
        kappa_ok: ratio <= kappa,
        spectral_ratio: ratio,
        matching: Some(matching),
        diagnostic: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::synth::{generate_ground_truth, perturb_dictionary};
    use ndarray::{array, Array2};

    #[test]
    fn identity_is_perfectly_incoherent() {
        let d = Dictionary::from_unit_columns(Array2::eye(5)).unwrap();
        assert_eq!(incoherence(&d), 0.0);
    }

    #[test]
    fn duplicated_columns_give_sqrt_n() {
        let mut mat = Array2::eye(4);
        mat.column_mut(1).assign(&array![1.0, 0.0, 0.0, 0.0]);
        let d = Dictionary::from_unit_columns(mat).unwrap();
        assert_eq!(incoherence(&d), 2.0);
    }

    #[test]
    fn single_atom_incoherence_is_zero() {
        let d = Dictionary::from_unit_columns(array![[1.0], [0.0]]).unwrap();
        assert_eq!(incoherence(&d), 0.0);
    }

    #[test]
    fn incoherence_matches_brute_force() {
        let d = generate_ground_truth(100, 150, 21).unwrap();
        let mut brute = 0.0f64;
        for i in 0..150 {
            for j in 0..150 {
                if i != j {
                    let ip: f64 = d.atom_slice(i).iter().zip(d.atom_slice(j)).map(|(a, b)| a * b).sum();
                    brute = brute.max(ip.abs());
                }
            }
        }
        let mu = incoherence(&d);
        assert!((mu - 10.0 * brute).abs() <= 1e-13 * mu, "{mu} vs {}", 10.0 * brute);
    }

    #[test]
    fn self_closeness() {
        let d = generate_ground_truth(20, 30, 2).unwrap();
        let r = check_closeness(&d, &d, 1e-12, 2.0);
        assert_eq!(r.epsilon, 0.0);
        assert!(r.is_close());
        assert!(r.matching.unwrap().is_identity());
    }

    #[test]
    fn swapped_and_negated_columns_are_undone() {
        let d = generate_ground_truth(20, 30, 2).unwrap();
        let mut mat = d.matrix().to_owned();
        let c0 = d.atom(0).to_owned();
        mat.column_mut(0).assign(&d.atom(1));
        mat.column_mut(1).assign(&(-&c0));
        let swapped = Dictionary::from_unit_columns(mat).unwrap();
        let r = check_closeness(&swapped, &d, 1e-12, 2.0);
        let m = r.matching.unwrap();
        assert_eq!(&m.perm[..3], &[1, 0, 2]);
        assert_eq!(&m.signs[..3], &[-1.0, 1.0, 1.0]);
        assert_eq!(r.epsilon, 0.0);
    }

    #[test]
    fn perturbed_distance_recovered() {
        let d = generate_ground_truth(60, 90, 2).unwrap();
        let p = perturb_dictionary(&d, 0.1, 3).unwrap();
        let r = check_closeness(&p, &d, 0.1 + 1e-6, 2.0);
        assert!((r.epsilon - 0.1).abs() <= 1e-6);
        assert!(r.is_close());
        assert!(r.matching.unwrap().is_identity());
    }

    #[test]
    fn greedy_resolves_collisions() {
        // Both true atoms correlate best with estimated atom 0.
        let truth = Dictionary::from_unit_columns(array![[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]]).unwrap();
        let est = Dictionary::normalized(array![[1.0, 0.6], [1.1, 0.0], [0.0, 0.8]]).unwrap();
        let m = match_columns(&est, &truth).unwrap();
        assert_eq!(m.perm, vec![1, 0]);
        assert_eq!(m.inverse(), vec![1, 0]);
    }

    #[test]
    fn spectral_norm_of_diagonal() {
        let m = array![[3.0, 0.0], [0.0, -5.0], [0.0, 0.0]];
        assert!((spectral_norm(m.view()) - 5.0).abs() < 1e-8);
        assert_eq!(spectral_norm(Array2::<f64>::zeros((3, 3)).view()), 0.0);
    }
}
