//! Observables: Hermitian operators with cached spectral data, spin-j
//! systems built from ladder elements, and spin-direction states.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hilbert::{ComplexMatrix, EigenDecomposition};
use crate::states::PureState;

/// Relative tolerance deciding whether two numerical eigenvalues belong to
/// the same degenerate branch.
fn grouping_gap(spectrum_scale: f64) -> f64 {
    1e-8 * spectrum_scale + 1e-12
}

/// A Hermitian operator together with its distinct eigenvalues, the
/// projector onto each branch, and the branch multiplicities.
#[derive(Debug, Clone)]
pub struct Observable {
    matrix: ComplexMatrix,
    eigen: EigenDecomposition,
    spectrum: Vec<f64>,
    projectors: Vec<ComplexMatrix>,
    degeneracies: Vec<usize>,
}

impl Observable {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let eigen = matrix.hermitian_eig()?;
        let n = eigen.dim();
        let scale = eigen
            .eigenvalues
            .iter()
            .fold(0.0f64, |m, &l| m.max(l.abs()));
        let gap = grouping_gap(scale);

        let mut spectrum = Vec::new();
        let mut projectors = Vec::new();
        let mut degeneracies = Vec::new();
        let mut k = 0;
        while k < n {
            let mut end = k + 1;
            while end < n && (eigen.eigenvalues[end] - eigen.eigenvalues[end - 1]).abs() <= gap {
                end += 1;
            }
            let branch = &eigen.eigenvalues[k..end];
            let value = branch.iter().sum::<f64>() / branch.len() as f64;
            let mut pi = ComplexMatrix::zeros(n, n);
            for col in k..end {
                for i in 0..n {
                    for j in 0..n {
                        pi[(i, j)] +=
                            eigen.eigenvectors[(i, col)] * eigen.eigenvectors[(j, col)].conj();
                    }
                }
            }
            spectrum.push(value);
            projectors.push(pi);
            degeneracies.push(end - k);
            k = end;
        }

        Ok(Self {
            matrix,
            eigen,
            spectrum,
            projectors,
            degeneracies,
        })
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn eigen(&self) -> &EigenDecomposition {
        &self.eigen
    }

    /// Distinct eigenvalues, ascending.
    pub fn spectrum(&self) -> &[f64] {
        &self.spectrum
    }

    pub fn outcome_count(&self) -> usize {
        self.spectrum.len()
    }

    pub fn projector(&self, n: usize) -> Result<&ComplexMatrix> {
        self.projectors.get(n).ok_or(Error::OutcomeIndex {
            index: n,
            len: self.projectors.len(),
        })
    }

    pub fn degeneracies(&self) -> &[usize] {
        &self.degeneracies
    }

    pub fn is_degenerate(&self) -> bool {
        self.degeneracies.iter().any(|&d| d > 1)
    }

    /// `<psi|Pi_n|psi>`: the relative frequency Born's rule assigns to the
    /// n-th distinct outcome.
    pub fn projector_frequency(&self, psi: &PureState, n: usize) -> Result<f64> {
        self.check_dim(psi)?;
        let pi = self.projector(n)?;
        let pv = pi.apply(psi.amplitudes())?;
        Ok(crate::hilbert::inner(psi.amplitudes(), &pv).re)
    }

    /// All branch frequencies at once.
    pub fn frequencies(&self, psi: &PureState) -> Result<Vec<f64>> {
        self.check_dim(psi)?;
        let coords = self.eigen.project(psi.amplitudes())?;
        let mut freqs = vec![0.0; self.spectrum.len()];
        let mut col = 0;
        for (branch, &mult) in self.degeneracies.iter().enumerate() {
            for _ in 0..mult {
                freqs[branch] += coords[col].norm_sqr();
                col += 1;
            }
        }
        Ok(freqs)
    }

    /// `<psi|F^N|psi> = sum_n f_n^N |c_n|^2`, evaluated through the spectral
    /// form rather than repeated matrix powers.
    pub fn moment(&self, psi: &PureState, order: u32) -> Result<f64> {
        let freqs = self.frequencies(psi)?;
        Ok(self
            .spectrum
            .iter()
            .zip(&freqs)
            .map(|(&f, &p)| f.powi(order as i32) * p)
            .sum())
    }

    fn check_dim(&self, psi: &PureState) -> Result<()> {
        if psi.dim() != self.dim() {
            return Err(Error::ShapeMismatch {
                op: "observable",
                left_rows: self.dim(),
                left_cols: self.dim(),
                right_rows: psi.dim(),
                right_cols: 1,
            });
        }
        Ok(())
    }
}

/// Pauli axis label used wherever a single-site spin component is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "x" | "X" => Ok(Axis::X),
            "y" | "Y" => Ok(Axis::Y),
            "z" | "Z" => Ok(Axis::Z),
            other => Err(Error::InvalidArgument {
                reason: format!("unknown axis '{other}', expected x, y, or z"),
            }),
        }
    }
}

/// The 2x2 Pauli matrix along `axis`.
pub fn pauli(axis: Axis) -> ComplexMatrix {
    let c = Complex64::new;
    let entries = match axis {
        Axis::X => vec![c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)],
        Axis::Y => vec![c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)],
        Axis::Z => vec![c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)],
    };
    ComplexMatrix::new(2, 2, entries).expect("static entries")
}

/// Spin component `s . n` for a unit vector `n`, in hbar = 1 units.
pub fn spin_along(direction: [f64; 3]) -> ComplexMatrix {
    let c = Complex64::new;
    let [nx, ny, nz] = direction;
    let sx = pauli(Axis::X).scale(c(0.5 * nx, 0.0));
    let sy = pauli(Axis::Y).scale(c(0.5 * ny, 0.0));
    let sz = pauli(Axis::Z).scale(c(0.5 * nz, 0.0));
    sx.add(&sy).and_then(|m| m.add(&sz)).expect("2x2 shapes")
}

/// The spin-j operator triple, basis ordered `m = j, j-1, ..., -j`.
#[derive(Debug, Clone)]
pub struct SpinSystem {
    j: f64,
    jx: Observable,
    jy: Observable,
    jz: Observable,
}

impl SpinSystem {
    pub fn j(&self) -> f64 {
        self.j
    }

    pub fn dim(&self) -> usize {
        self.jz.dim()
    }

    pub fn jx(&self) -> &Observable {
        &self.jx
    }

    pub fn jy(&self) -> &Observable {
        &self.jy
    }

    pub fn jz(&self) -> &Observable {
        &self.jz
    }

    pub fn component(&self, axis: Axis) -> &Observable {
        match axis {
            Axis::X => &self.jx,
            Axis::Y => &self.jy,
            Axis::Z => &self.jz,
        }
    }

    /// The `|j, m>` basis state; `m` must be one of `j, j-1, ..., -j`.
    pub fn basis_state(&self, m: f64) -> Result<PureState> {
        let idx = (self.j - m).round();
        if (self.j - m - idx).abs() > 1e-9 || idx < 0.0 || idx as usize >= self.dim() {
            return Err(Error::InvalidArgument {
                reason: format!("m = {m} is not a magnetic quantum number for j = {}", self.j),
            });
        }
        PureState::basis_state(self.dim(), idx as usize)
    }

    /// The highest-weight state `|j, j>`.
    pub fn highest_weight(&self) -> PureState {
        PureState::basis_state(self.dim(), 0).expect("dim >= 1")
    }
}

/// Builds the spin-j matrices from the ladder elements
/// `<j,m+1|J+|j,m> = sqrt(j(j+1) - m(m+1))`.
pub fn make_spin(j: f64) -> Result<SpinSystem> {
    let two_j = 2.0 * j;
    if j < 0.0 || !two_j.is_finite() || (two_j - two_j.round()).abs() > 1e-9 {
        return Err(Error::InvalidSpin { j });
    }
    let dim = two_j.round() as usize + 1;
    let c = Complex64::new;

    let m_of = |k: usize| j - k as f64;
    let mut jp = ComplexMatrix::zeros(dim, dim);
    for k in 1..dim {
        // J+ raises |j, m_k> (column k) into row k-1
        let m = m_of(k);
        jp[(k - 1, k)] = c((j * (j + 1.0) - m * (m + 1.0)).sqrt(), 0.0);
    }
    let jm = jp.dagger();
    let jx = jp.add(&jm)?.scale(c(0.5, 0.0));
    let jy = jp.sub(&jm)?.scale(c(0.0, -0.5));
    let jz = ComplexMatrix::from_fn(dim, dim, |i, k| {
        if i == k {
            c(m_of(i), 0.0)
        } else {
            c(0.0, 0.0)
        }
    });

    Ok(SpinSystem {
        j,
        jx: Observable::new(jx)?,
        jy: Observable::new(jy)?,
        jz: Observable::new(jz)?,
    })
}

/// The spin-1/2 state pointing along `(theta, phi)`:
/// `(e^{-i phi/2} cos(theta/2), e^{i phi/2} sin(theta/2))`.
pub fn spin_toward(theta: f64, phi: f64) -> PureState {
    let half = theta / 2.0;
    let up = Complex64::from_polar(half.cos(), -phi / 2.0);
    let down = Complex64::from_polar(half.sin(), phi / 2.0);
    PureState::new(vec![up, down]).expect("unit by construction")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::inner;
    use crate::rng::CounterRng;
    use crate::states::PureState;
    use std::f64::consts::PI;

    fn random_state(dim: usize, rng: &mut CounterRng) -> PureState {
        let amps: Vec<Complex64> = (0..dim)
            .map(|_| Complex64::new(rng.next_f64() * 2.0 - 1.0, rng.next_f64() * 2.0 - 1.0))
            .collect();
        PureState::normalized(amps).unwrap()
    }

    fn random_observable(dim: usize, rng: &mut CounterRng) -> Observable {
        let m = ComplexMatrix::from_fn(dim, dim, |_, _| {
            Complex64::new(rng.next_f64() - 0.5, rng.next_f64() - 0.5)
        });
        Observable::new(m.add(&m.dagger()).unwrap().scale(Complex64::new(0.5, 0.0))).unwrap()
    }

    #[test]
    fn spin_half_is_pauli_over_two() {
        let s = make_spin(0.5).unwrap();
        let half = Complex64::new(0.5, 0.0);
        assert!(s.jz().matrix().max_abs_diff(&pauli(Axis::Z).scale(half)) < 1e-15);
        assert!(s.jx().matrix().max_abs_diff(&pauli(Axis::X).scale(half)) < 1e-15);
        assert!(s.jy().matrix().max_abs_diff(&pauli(Axis::Y).scale(half)) < 1e-15);
    }

    #[test]
    fn make_spin_rejects_bad_j() {
        assert!(matches!(make_spin(0.7), Err(Error::InvalidSpin { .. })));
        assert!(matches!(make_spin(-0.5), Err(Error::InvalidSpin { .. })));
    }

    #[test]
    fn commutation_and_casimir_invariants() {
        for &j in &[0.5, 1.0, 1.5, 2.0, 2.5] {
            let s = make_spin(j).unwrap();
            let i_c = Complex64::new(0.0, 1.0);
            let pairs = [
                (s.jx().matrix(), s.jy().matrix(), s.jz().matrix()),
                (s.jy().matrix(), s.jz().matrix(), s.jx().matrix()),
                (s.jz().matrix(), s.jx().matrix(), s.jy().matrix()),
            ];
            for (a, b, c_) in pairs {
                let comm = a.commutator(b).unwrap();
                assert!(comm.max_abs_diff(&c_.scale(i_c)) < 1e-10, "j = {j}");
            }
            let sq = |m: &ComplexMatrix| m.mul(m).unwrap();
            let casimir = sq(s.jx().matrix())
                .add(&sq(s.jy().matrix()))
                .unwrap()
                .add(&sq(s.jz().matrix()))
                .unwrap();
            let expect = ComplexMatrix::identity(s.dim()).scale(Complex64::new(j * (j + 1.0), 0.0));
            assert!(casimir.max_abs_diff(&expect) < 1e-9, "j = {j}");
        }
    }

    #[test]
    fn transverse_fluctuation_of_top_spin_three_halves() {
        // <3/2,3/2| Jx^2 + Jy^2 |3/2,3/2> = 15/4 - 9/4 = 3/2
        let s = make_spin(1.5).unwrap();
        let top = s.highest_weight();
        let val = s.jx().moment(&top, 2).unwrap() + s.jy().moment(&top, 2).unwrap();
        assert!((val - 1.5).abs() < 1e-10);
    }

    #[test]
    fn fourth_moment_of_top_spin_three_halves() {
        let s = make_spin(1.5).unwrap();
        let val = s.jx().moment(&s.highest_weight(), 4).unwrap();
        assert!((val - 21.0 / 16.0).abs() < 1e-10);
    }

    #[test]
    fn transverse_fluctuations_match_j_and_m() {
        // <j,m| Jx^2 + Jy^2 |j,m> = j(j+1) - m^2 for every valid (j, m)
        for &j in &[0.5, 1.0, 1.5, 2.0, 2.5] {
            let s = make_spin(j).unwrap();
            let mut m = j;
            while m >= -j - 1e-9 {
                let state = s.basis_state(m).unwrap();
                let val =
                    s.jx().moment(&state, 2).unwrap() + s.jy().moment(&state, 2).unwrap();
                assert!((val - (j * (j + 1.0) - m * m)).abs() < 1e-10, "j={j} m={m}");
                m -= 1.0;
            }
        }
    }

    #[test]
    fn spin_toward_poles() {
        let up = spin_toward(0.0, 0.0);
        assert!((up.amplitude(0).norm() - 1.0).abs() < 1e-12);
        let down = spin_toward(PI, 0.0);
        assert!(down.amplitude(0).norm() < 1e-12);
        assert!((down.amplitude(1).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn spin_toward_is_eigenstate_of_spin_along() {
        let (theta, phi) = (1.1_f64, 2.3_f64);
        let n = [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()];
        let psi = spin_toward(theta, phi);
        let sv = spin_along(n).apply(psi.amplitudes()).unwrap();
        for (got, want) in sv.iter().zip(psi.amplitudes()) {
            assert!((got - want * 0.5).norm() < 1e-10);
        }
    }

    #[test]
    fn spin_toward_frequencies_are_half_angle_squares() {
        let (theta, phi) = (2.0 * PI / 3.0, 0.4);
        let psi = spin_toward(theta, phi);
        assert!((psi.amplitude(0).norm_sqr() - (theta / 2.0).cos().powi(2)).abs() < 1e-12);
        assert!((psi.amplitude(1).norm_sqr() - (theta / 2.0).sin().powi(2)).abs() < 1e-12);
    }

    #[test]
    fn projector_frequencies_of_up_along_sx() {
        let s = make_spin(0.5).unwrap();
        let up = PureState::basis_state(2, 0).unwrap();
        for n in 0..2 {
            let f = s.jx().projector_frequency(&up, n).unwrap();
            assert!((f - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn projector_frequencies_of_top_spin_three_halves_along_jx() {
        let s = make_spin(1.5).unwrap();
        let top = s.highest_weight();
        let jx = s.jx();
        // spectrum ascending: -3/2, -1/2, +1/2, +3/2
        let expect = [1.0 / 8.0, 3.0 / 8.0, 3.0 / 8.0, 1.0 / 8.0];
        for (n, want) in expect.iter().enumerate() {
            let f = jx.projector_frequency(&top, n).unwrap();
            assert!((f - want).abs() < 1e-10, "branch {n}: {f} vs {want}");
        }
        assert!((jx.projector_frequency(&top, 3).unwrap() - 0.125).abs() < 1e-10);
    }

    #[test]
    fn projector_frequency_rejects_bad_index() {
        let s = make_spin(0.5).unwrap();
        let up = PureState::basis_state(2, 0).unwrap();
        assert!(matches!(
            s.jz().projector_frequency(&up, 5),
            Err(Error::OutcomeIndex { .. })
        ));
    }

    #[test]
    fn projectors_are_complete_and_orthogonal() {
        let mut rng = CounterRng::new(21);
        for dim in [2, 3, 5] {
            let f = random_observable(dim, &mut rng);
            let mut sum = ComplexMatrix::zeros(dim, dim);
            for n in 0..f.outcome_count() {
                sum = sum.add(f.projector(n).unwrap()).unwrap();
            }
            assert!(sum.max_abs_diff(&ComplexMatrix::identity(dim)) < 1e-10);
            for n in 0..f.outcome_count() {
                for m in 0..f.outcome_count() {
                    let prod = f
                        .projector(n)
                        .unwrap()
                        .mul(f.projector(m).unwrap())
                        .unwrap();
                    let expect = if n == m {
                        f.projector(n).unwrap().clone()
                    } else {
                        ComplexMatrix::zeros(dim, dim)
                    };
                    assert!(prod.max_abs_diff(&expect) < 1e-9);
                }
            }
        }
    }

    #[test]
    fn spectral_reconstruction_from_projectors() {
        let mut rng = CounterRng::new(22);
        let f = random_observable(5, &mut rng);
        let mut rebuilt = ComplexMatrix::zeros(5, 5);
        for (n, &fv) in f.spectrum().iter().enumerate() {
            rebuilt = rebuilt
                .add(&f.projector(n).unwrap().scale(Complex64::new(fv, 0.0)))
                .unwrap();
        }
        assert!(rebuilt.max_abs_diff(f.matrix()) < 1e-9);
    }

    #[test]
    fn degenerate_branch_grouping() {
        // sz on two spins ignores the second spin: eigenvalues (+-1/2) each twice
        let sz1 = make_spin(0.5)
            .unwrap()
            .jz()
            .matrix()
            .kron(&ComplexMatrix::identity(2));
        let obs = Observable::new(sz1).unwrap();
        assert_eq!(obs.outcome_count(), 2);
        assert_eq!(obs.degeneracies(), &[2, 2]);
        assert!(obs.is_degenerate());
    }

    #[test]
    fn frequencies_sum_to_one_and_match_moments() {
        let mut rng = CounterRng::new(23);
        for _ in 0..20 {
            let dim = 2 + (rng.next_u64() % 4) as usize;
            let f = random_observable(dim, &mut rng);
            let psi = random_state(dim, &mut rng);
            let freqs = f.frequencies(&psi).unwrap();
            let total: f64 = freqs.iter().sum();
            assert!((total - 1.0).abs() < 1e-10);
            for order in 1..=3u32 {
                let direct = f.moment(&psi, order).unwrap();
                let weighted: f64 = f
                    .spectrum()
                    .iter()
                    .zip(&freqs)
                    .map(|(&fv, &p)| fv.powi(order as i32) * p)
                    .sum();
                assert!((direct - weighted).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn first_moment_of_top_state_vanishes_along_x() {
        let s = make_spin(1.5).unwrap();
        assert!(s.jx().moment(&s.highest_weight(), 1).unwrap().abs() < 1e-12);
        assert!((s.jx().moment(&s.highest_weight(), 2).unwrap() - 0.75).abs() < 1e-10);
    }

    #[test]
    fn eigen_projection_preserves_norm() {
        let mut rng = CounterRng::new(24);
        let f = random_observable(4, &mut rng);
        let psi = random_state(4, &mut rng);
        let coords = f.eigen().project(psi.amplitudes()).unwrap();
        assert!((inner(&coords, &coords).re - 1.0).abs() < 1e-10);
    }
}
