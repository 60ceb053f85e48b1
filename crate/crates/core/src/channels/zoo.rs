//! Constructors for the channel families analyzed by this crate.

use super::KrausChannel;
use crate::error::{Error, Result};
use crate::operator::{self, pauli, HermitianOperator, Operator};
use crate::rng;

/// Tolerance for unitarity and group-closure checks.
pub const TOL_UNITARY: f64 = 1e-9;
/// Tolerance on `Σ p = 1` for mixed-unitary weights.
pub const TOL_PROB: f64 = 1e-12;

fn open_unit_interval(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value < 1.0 {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            name,
            value,
            range: "(0, 1)",
        })
    }
}

fn require_unitary(u: &Operator) -> Result<()> {
    let deviation = u.unitary_deviation();
    if deviation > TOL_UNITARY {
        return Err(Error::NotUnitary { deviation });
    }
    Ok(())
}

/// Completely depolarizing channel `Ω(a) = Tr(a)/d · id`, Kraus set
/// `{|i⟩⟨j| / √d}`.
pub fn omega(dim: usize) -> Result<KrausChannel> {
    if dim == 0 {
        return Err(Error::ZeroDimension);
    }
    let scale = 1.0 / (dim as f64).sqrt();
    let kraus = Operator::matrix_unit_basis(dim)
        .into_iter()
        .map(|e| e.scale(scale))
        .collect();
    KrausChannel::new(kraus)?.validated()
}

/// Conjugation by a single unitary, `a ↦ U a U*`.
pub fn unistochastic(u: &Operator) -> Result<KrausChannel> {
    require_unitary(u)?;
    KrausChannel::new(vec![u.clone()])?.validated()
}

/// `a ↦ Σ_ℓ p_ℓ U_ℓ a U_ℓ*`
pub fn mixed_unitary(unitaries: &[Operator], probabilities: &[f64]) -> Result<KrausChannel> {
    if unitaries.is_empty() {
        return Err(Error::EmptyKraus);
    }
    if unitaries.len() != probabilities.len() {
        return Err(Error::InvalidProbabilities(format!(
            "{} unitaries but {} weights",
            unitaries.len(),
            probabilities.len()
        )));
    }
    if let Some(p) = probabilities.iter().find(|p| p.is_nan() || **p < 0.0) {
        return Err(Error::InvalidProbabilities(format!("negative weight {p}")));
    }
    let total: f64 = probabilities.iter().sum();
    if (total - 1.0).abs() > TOL_PROB {
        return Err(Error::InvalidProbabilities(format!(
            "weights sum to {total}"
        )));
    }
    for u in unitaries {
        require_unitary(u)?;
    }
    let kraus = unitaries
        .iter()
        .zip(probabilities)
        .filter(|(_, &p)| p > 0.0)
        .map(|(u, &p)| u.scale(p.sqrt()))
        .collect();
    KrausChannel::new(kraus)?.validated()
}

/// Uniform average `(1/|G|) Σ_{U∈G} U a U*` over a finite unitary group.
///
/// Conjugation ignores global phases, so the list is checked as a group of
/// unitaries modulo phase: it must contain the identity, be closed under
/// products and adjoints, and hold no two elements that differ only by a
/// phase, all within [`TOL_UNITARY`].
pub fn group_average(group: &[Operator]) -> Result<KrausChannel> {
    if group.is_empty() {
        return Err(Error::NotAGroup("empty list".into()));
    }
    let dim = group[0].dim();
    for g in group {
        if g.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: g.dim(),
            });
        }
        require_unitary(g)?;
    }
    let position = |x: &Operator| group.iter().position(|g| equal_up_to_phase(g, x));
    for (i, g) in group.iter().enumerate() {
        if group[i + 1..].iter().any(|h| equal_up_to_phase(g, h)) {
            return Err(Error::NotAGroup(format!("element {i} is duplicated")));
        }
    }
    if position(&Operator::identity(dim)).is_none() {
        return Err(Error::NotAGroup("identity missing".into()));
    }
    for (i, g) in group.iter().enumerate() {
        if position(&g.adjoint()).is_none() {
            return Err(Error::NotAGroup(format!("inverse of element {i} missing")));
        }
        for (j, h) in group.iter().enumerate() {
            if position(&(g * h)).is_none() {
                return Err(Error::NotAGroup(format!(
                    "product of elements {i} and {j} missing"
                )));
            }
        }
    }
    let weights = vec![1.0 / group.len() as f64; group.len()];
    mixed_unitary(group, &weights)
}

/// `a = e^{iφ} b` for some phase, within [`TOL_UNITARY`].
fn equal_up_to_phase(a: &Operator, b: &Operator) -> bool {
    let overlap = (&b.adjoint() * a).trace();
    if overlap.norm() < 1e-12 {
        return false;
    }
    let phase = overlap / overlap.norm();
    a.max_abs_diff(&b.scale_complex(phase)) <= TOL_UNITARY
}

/// `{id, σx, σy, σz}`, the qubit Pauli group modulo phases. Its average is
/// the completely depolarizing channel.
pub fn pauli_group() -> Vec<Operator> {
    vec![pauli::id(), pauli::x(), pauli::y(), pauli::z()]
}

/// `{id, σz}`; its average is complete dephasing in the computational basis.
pub fn dephasing_group() -> Vec<Operator> {
    vec![pauli::id(), pauli::z()]
}

/// Qubit depolarizing channel with Kraus operators `√(1−α) id` and
/// `√(α/3) σ` for each Pauli σ.
pub fn qubit_depolarizing(alpha: f64) -> Result<KrausChannel> {
    open_unit_interval("alpha", alpha)?;
    let s = (alpha / 3.0).sqrt();
    KrausChannel::new(vec![
        pauli::id().scale((1.0 - alpha).sqrt()),
        pauli::x().scale(s),
        pauli::y().scale(s),
        pauli::z().scale(s),
    ])?
    .validated()
}

/// `α M + (1−α) Ω` as one Kraus channel: `{√α Kᵢ} ∪ {√(1−α) Ωⱼ}`.
pub fn convex_with_omega(ch: &KrausChannel, alpha: f64) -> Result<KrausChannel> {
    open_unit_interval("alpha", alpha)?;
    let om = omega(ch.dim())?;
    let kraus = ch
        .kraus()
        .iter()
        .map(|k| k.scale(alpha.sqrt()))
        .chain(om.kraus().iter().map(|k| k.scale((1.0 - alpha).sqrt())))
        .collect();
    KrausChannel::new(kraus)?.validated()
}

/// Random channel with `n_kraus` Kraus operators from a Haar-random
/// isometry: stacked Ginibre blocks `Gᵢ`, then `Kᵢ = Gᵢ (Σ Gⱼ*Gⱼ)^{-1/2}`.
pub fn random_channel(dim: usize, n_kraus: usize, seed: u64) -> Result<KrausChannel> {
    if dim == 0 {
        return Err(Error::ZeroDimension);
    }
    if n_kraus == 0 {
        return Err(Error::EmptyKraus);
    }
    let mut rng = rng::stream(seed, 0);
    let blocks: Vec<Operator> = (0..n_kraus)
        .map(|_| {
            Operator::new(
                dim,
                (0..dim * dim)
                    .map(|_| rng::complex_gaussian(&mut rng))
                    .collect(),
            )
            .expect("block shape")
        })
        .collect();
    let gram = blocks
        .iter()
        .fold(Operator::zeros(dim), |acc, g| &acc + &(&g.adjoint() * g));
    let eig = HermitianOperator::symmetrized(&gram).eigen()?;
    let inv_sqrt = eig
        .values
        .iter()
        .zip(&eig.vectors)
        .fold(Operator::zeros(dim), |acc, (&lambda, v)| {
            &acc + &Operator::outer(v, v).scale(1.0 / lambda.sqrt())
        });
    let kraus = blocks.iter().map(|g| g * &inv_sqrt).collect();
    KrausChannel::new(kraus)?.validated()
}

/// Unistochastic channel of a Haar-random unitary.
pub fn random_unistochastic(dim: usize, seed: u64) -> Result<KrausChannel> {
    unistochastic(&operator::random_unitary(dim, seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{random_density, random_pure_state, DensityMatrix, TOL_PSD};
    use num_complex::Complex64;

    fn same_action(a: &KrausChannel, b: &KrausChannel, tol: f64) -> bool {
        Operator::matrix_unit_basis(a.dim())
            .iter()
            .all(|e| a.apply(e).unwrap().max_abs_diff(&b.apply(e).unwrap()) <= tol)
    }

    #[test]
    fn omega_examples() {
        let om = omega(4).unwrap();
        let rho = random_density(4, 3);
        let out = om.apply(rho.as_operator()).unwrap();
        assert!(out.max_abs_diff(&Operator::identity(4).scale(0.25)) < 1e-15);
        assert!(same_action(
            &omega(1).unwrap(),
            &KrausChannel::identity(1),
            0.0
        ));
        let choi = omega(3).unwrap().to_choi();
        assert!(
            choi.matrix()
                .max_abs_diff(&Operator::identity(9).scale(1.0 / 3.0))
                < 1e-15
        );
    }

    #[test]
    fn unistochastic_examples() {
        assert!(same_action(
            &unistochastic(&Operator::identity(3)).unwrap(),
            &KrausChannel::identity(3),
            0.0
        ));
        let u = operator::random_unitary(3, 17);
        let xi = random_pure_state(3, 2);
        let out = unistochastic(&u).unwrap().apply(&xi.projector()).unwrap();
        let u_xi = u.mul_vec(xi.amplitudes());
        assert!(out.max_abs_diff(&Operator::outer(&u_xi, &u_xi)) < 1e-14);
        assert!(matches!(
            unistochastic(&Operator::identity(2).scale(1.1)),
            Err(Error::NotUnitary { .. })
        ));
    }

    #[test]
    fn mixed_unitary_examples() {
        let u = operator::random_unitary(2, 5);
        assert!(same_action(
            &mixed_unitary(std::slice::from_ref(&u), &[1.0]).unwrap(),
            &unistochastic(&u).unwrap(),
            1e-15
        ));

        let us = [u.clone(), operator::random_unitary(2, 6), pauli::x()];
        let p = [0.2, 0.5, 0.3];
        let ch = mixed_unitary(&us, &p).unwrap();
        let xi = random_pure_state(2, 4);
        let expected = us.iter().zip(&p).fold(Operator::zeros(2), |acc, (u, &p)| {
            let v = u.mul_vec(xi.amplitudes());
            &acc + &Operator::outer(&v, &v).scale(p)
        });
        assert!(ch.apply(&xi.projector()).unwrap().max_abs_diff(&expected) < 1e-14);

        assert!(matches!(
            mixed_unitary(&us, &[0.2, 0.5, 0.2]),
            Err(Error::InvalidProbabilities(_))
        ));
        assert!(mixed_unitary(&us, &[1.2, -0.2, 0.0]).is_err());
        assert!(mixed_unitary(&us, &[1.0]).is_err());
    }

    #[test]
    fn group_average_examples() {
        assert!(same_action(
            &group_average(&[Operator::identity(2)]).unwrap(),
            &KrausChannel::identity(2),
            0.0
        ));

        // hand oracle: (a + σz a σz)/2 keeps the diagonal, kills off-diagonals
        let deph = group_average(&dephasing_group()).unwrap();
        let a = Operator::from_fn(2, |i, j| Complex64::new(1.0 + i as f64, j as f64 - 0.5));
        let out = deph.apply(&a).unwrap();
        let expected = Operator::diagonal(&[a.get(0, 0), a.get(1, 1)]);
        assert!(out.max_abs_diff(&expected) < 1e-15);

        let twice = deph.compose(&deph).unwrap();
        assert!(same_action(&twice, &deph, 1e-12));

        let twirl = group_average(&pauli_group()).unwrap();
        assert!(same_action(&twirl, &omega(2).unwrap(), 1e-15));
        assert!(same_action(
            &twice.compose(&twirl).unwrap(),
            &omega(2).unwrap(),
            1e-12
        ));
    }

    #[test]
    fn group_average_rejects_non_groups() {
        assert!(matches!(
            group_average(&[pauli::x()]),
            Err(Error::NotAGroup(_))
        ));
        assert!(matches!(
            group_average(&[pauli::id(), pauli::z(), pauli::z()]),
            Err(Error::NotAGroup(_))
        ));
        // iσz duplicates σz modulo phase
        let mut with_phase = pauli_group();
        with_phase.push(pauli::z().scale_complex(Complex64::new(0.0, 1.0)));
        assert!(matches!(
            group_average(&with_phase),
            Err(Error::NotAGroup(_))
        ));
        // {id, σx} ∪ {σz} misses σx σz
        assert!(matches!(
            group_average(&[pauli::id(), pauli::x(), pauli::z()]),
            Err(Error::NotAGroup(_))
        ));
        let t = Operator::diagonal(&[
            Complex64::new(1.0, 0.0),
            Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4),
        ]);
        assert!(group_average(&[pauli::id(), t]).is_err());
    }

    #[test]
    fn depolarizing_examples() {
        let alpha: f64 = 0.3;
        let ch = qubit_depolarizing(alpha).unwrap();
        let k = ch.kraus();
        assert_eq!(k.len(), 4);
        assert!(k[0].max_abs_diff(&pauli::id().scale((1.0 - alpha).sqrt())) < 1e-15);
        assert!(k[1].max_abs_diff(&pauli::x().scale((alpha / 3.0).sqrt())) < 1e-15);
        assert!(k[2].max_abs_diff(&pauli::y().scale((alpha / 3.0).sqrt())) < 1e-15);
        assert!(k[3].max_abs_diff(&pauli::z().scale((alpha / 3.0).sqrt())) < 1e-15);

        assert!(same_action(
            &qubit_depolarizing(1e-12).unwrap(),
            &KrausChannel::identity(2),
            1e-11
        ));

        let mixed = DensityMatrix::maximally_mixed(2);
        let out = ch.apply(mixed.as_operator()).unwrap();
        assert!(out.max_abs_diff(mixed.as_operator()) < 1e-15);

        for bad in [0.0, 1.0, 1.5, -0.1, f64::NAN] {
            assert!(matches!(
                qubit_depolarizing(bad),
                Err(Error::OutOfRange { .. })
            ));
        }
    }

    #[test]
    fn convex_with_omega_examples() {
        let base = random_channel(3, 2, 21).unwrap();
        assert!(same_action(
            &convex_with_omega(&base, 1.0 - 1e-12).unwrap(),
            &base,
            1e-11
        ));

        let alpha = 0.6;
        let mixed = convex_with_omega(&base, alpha).unwrap();
        assert!(mixed.validate().passed);
        let floor = Operator::identity(3).scale((1.0 - alpha) / 3.0);
        for seed in 0..20 {
            let rho = random_density(3, seed);
            let out = mixed.apply(rho.as_operator()).unwrap();
            let gap = HermitianOperator::symmetrized(&(&out - &floor));
            assert!(gap.min_eigenvalue().unwrap() >= -TOL_PSD);
        }
        assert!(convex_with_omega(&base, 1.0).is_err());
    }

    #[test]
    fn random_channel_is_cptp() {
        for (d, k) in [(1, 1), (2, 3), (3, 2), (4, 4)] {
            let ch = random_channel(d, k, (d * 10 + k) as u64).unwrap();
            assert_eq!(ch.kraus().len(), k);
            assert!(ch.validate().passed);
        }
        assert_eq!(
            random_channel(2, 2, 3).unwrap(),
            random_channel(2, 2, 3).unwrap()
        );
    }
}
